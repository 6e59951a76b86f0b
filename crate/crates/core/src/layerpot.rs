//! The weakly singular operator `V v = -(1/2π) ∫_Γ v(y) log|· - y| ds_y` on
//! straight elements.
//!
//! Inner integrals of Legendre polynomials against the logarithmic kernel are
//! evaluated in closed form for targets close to the source element, and by
//! Gauss quadrature with a point count chosen from the Bernstein ellipse
//! through the target otherwise. Outer integrals use Gauss rules on a
//! subdivision of the target element that is graded towards the source.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;

use crate::mesh::{dist, point_segment_dist, segment_segment_dist, Mesh, Point};
use crate::polyspace::{cached_rule, legendre_values, PwPoly, PwPolySpace};

/// Semi-major axis (in reference coordinates) below which the closed form is used.
const NEAR_AXIS: f64 = 1.25;

const INV_2PI: f64 = 0.5 / PI;

/// Quadrature controls for the outer integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Gauss points per admissible sub-interval (raised with the polynomial degree).
    pub outer_order: usize,
    /// Maximal number of bisections towards a singular point.
    pub max_depth: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            outer_order: 12,
            max_depth: 32,
        }
    }
}

/// `∫_T P_k(ξ(y)) log|x - y| ds_y` for `k = 0..out.len()`, where `ξ` maps the
/// segment from `start` to `end` affinely onto `(-1, 1)`.
pub fn legendre_log_moments(start: Point, end: Point, x: Point, out: &mut [f64]) {
    let l = dist(start, end);
    let tx = (end[0] - start[0]) / l;
    let ty = (end[1] - start[1]) / l;
    let rx = x[0] - start[0];
    let ry = x[1] - start[1];
    let s = rx * tx + ry * ty;
    let d = (rx * ty - ry * tx).abs();
    let sh = 2.0 * s / l - 1.0;
    let dh = 2.0 * d / l;
    reference_log_moments(sh, dh, out);
    let half = 0.5 * l;
    for v in out.iter_mut() {
        *v *= half;
    }
    if let Some(first) = out.first_mut() {
        *first += l * half.ln();
    }
}

/// `∫_{-1}^{1} P_k(u) · ½ log((u - ŝ)² + d̂²) du` for `k = 0..out.len()`.
fn reference_log_moments(sh: f64, dh: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let r_minus = ((1.0 - sh).powi(2) + dh * dh).sqrt();
    let r_plus = ((1.0 + sh).powi(2) + dh * dh).sqrt();
    let axis = 0.5 * (r_minus + r_plus);
    if axis <= NEAR_AXIS {
        near_moments(sh, dh, r_minus, r_plus, out);
    } else {
        far_moments(sh, dh, axis, out);
    }
}

fn near_moments(sh: f64, dh: f64, r_minus: f64, r_plus: f64, out: &mut [f64]) {
    // k = 0: antiderivative of ½ log(w² + d²) is ½ w log(w² + d²) - w + d atan(w / d)
    let prim = |w: f64| -> f64 {
        let r2 = w * w + dh * dh;
        let log_term = if r2 > 0.0 { 0.5 * w * r2.ln() } else { 0.0 };
        let atan_term = if dh > 0.0 { dh * (w / dh).atan() } else { 0.0 };
        log_term - w + atan_term
    };
    out[0] = prim(1.0 - sh) - prim(-1.0 - sh);
    let n = out.len();
    if n == 1 {
        return;
    }
    // For k ≥ 1, (2k+1) J_k = -Re ∫ (P_{k+1} - P_{k-1})(u) / (u - z) du with z = ŝ + i d̂.
    // Writing ∫ P_m(u)/(u - z) du = P_m(z) R_0(z) + E_m(z) splits off the polynomial part E_m.
    let z = Complex::new(sh, dh);
    let mut p = vec![Complex::new(0.0, 0.0); n + 1];
    let mut e = vec![Complex::new(0.0, 0.0); n + 1];
    p[0] = Complex::new(1.0, 0.0);
    p[1] = z;
    e[1] = Complex::new(2.0, 0.0);
    for m in 1..n {
        let mf = m as f64;
        p[m + 1] = (p[m] * z * (2.0 * mf + 1.0) - p[m - 1] * mf) / (mf + 1.0);
        e[m + 1] = (e[m] * z * (2.0 * mf + 1.0) - e[m - 1] * mf) / (mf + 1.0);
    }
    let at_endpoint = r_minus == 0.0 || r_plus == 0.0;
    let r0 = if at_endpoint {
        Complex::new(0.0, 0.0)
    } else {
        let im = if dh > 0.0 {
            ((1.0 - sh) / dh).atan() + ((1.0 + sh) / dh).atan()
        } else if sh.abs() < 1.0 {
            PI
        } else {
            0.0
        };
        Complex::new((r_minus / r_plus).ln(), im)
    };
    for k in 1..n {
        let dk = p[k + 1] - p[k - 1];
        let ek = e[k + 1] - e[k - 1];
        // D_k(±1) = 0, so the logarithmic term drops out at the element endpoints.
        let total = if at_endpoint { ek } else { ek + dk * r0 };
        out[k] = -total.re / (2 * k + 1) as f64;
    }
}

fn far_moments(sh: f64, dh: f64, axis: f64, out: &mut [f64]) {
    let rho = axis + (axis * axis - 1.0).sqrt();
    let kmax = out.len() - 1;
    let n = (((36.8 / rho.ln()) + kmax as f64) / 2.0).ceil() as usize + 2;
    let rule = cached_rule(n.clamp(4, 100));
    for v in out.iter_mut() {
        *v = 0.0;
    }
    let mut pk = [0.0; 32];
    let pk = &mut pk[..out.len()];
    for (&u, &w) in rule.points.iter().zip(&rule.weights) {
        let g = 0.5 * w * ((u - sh).powi(2) + dh * dh).ln();
        legendre_values(u, pk);
        for (o, p) in out.iter_mut().zip(pk.iter()) {
            *o += g * p;
        }
    }
}

/// Log-moments of the orthonormal basis of element `e`:
/// `out[k] = ∫_T b_k(y) log|x - y| ds_y`.
pub fn log_moments(mesh: &Mesh, e: usize, x: Point, out: &mut [f64]) {
    let el = mesh.element(e);
    legendre_log_moments(el.start, el.end, x, out);
    for (k, v) in out.iter_mut().enumerate() {
        *v *= ((2 * k + 1) as f64 / el.length).sqrt();
    }
}

/// `(Vτ)(x)`.
pub fn v_eval(tau: &PwPoly, x: Point) -> f64 {
    let space = &tau.space;
    let mesh = space.mesh();
    let mut buf = vec![0.0; space.max_degree() + 1];
    let mut acc = 0.0;
    for e in 0..mesh.num_elements() {
        let local = tau.local(e);
        if local.iter().all(|&c| c == 0.0) {
            continue;
        }
        let m = &mut buf[..local.len()];
        log_moments(mesh, e, x, m);
        acc += local.iter().zip(m.iter()).map(|(c, m)| c * m).sum::<f64>();
    }
    -INV_2PI * acc
}

/// Quadrature points `(s, w)` on element `ea` for integrands carrying the
/// potential of element `eb`.
///
/// Sub-intervals are bisected until their length does not exceed their
/// distance to the singular set: the source segment, or only its endpoints
/// when source and target coincide.
pub fn outer_rule(mesh: &Mesh, ea: usize, eb: usize, order: usize, max_depth: usize) -> Vec<(f64, f64)> {
    let a = mesh.element(ea);
    let b = mesh.element(eb);
    let h = a.length;
    let distance = |s0: f64, s1: f64| -> f64 {
        if ea == eb {
            s0.min(h - s1).max(0.0)
        } else {
            segment_segment_dist(a.point_at(s0), a.point_at(s1), b.start, b.end)
        }
    };
    let rule = cached_rule(order);
    let mut out = Vec::new();
    let mut stack = vec![(0.0, h, 0usize)];
    while let Some((s0, s1, depth)) = stack.pop() {
        let len = s1 - s0;
        if len <= distance(s0, s1) || depth >= max_depth {
            let (c, r) = (0.5 * (s0 + s1), 0.5 * len);
            out.extend(
                rule.points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&x, &w)| (c + r * x, r * w)),
            );
        } else {
            let mid = 0.5 * (s0 + s1);
            stack.push((s0, mid, depth + 1));
            stack.push((mid, s1, depth + 1));
        }
    }
    out
}

/// Graded rule on element `ea` towards its own endpoints, used where the
/// integrand carries the potential of a whole function on the curve.
fn self_graded_rule(mesh: &Mesh, ea: usize, order: usize, max_depth: usize) -> Vec<(f64, f64)> {
    outer_rule(mesh, ea, ea, order, max_depth)
}

/// Local Galerkin block `⟨b_i^{(a)}, V b_k^{(b)}⟩` for `i ≤ pa`, `k ≤ pb`,
/// row-major with `pb + 1` columns.
pub fn galerkin_v_block(
    mesh: &Mesh,
    ea: usize,
    pa: usize,
    eb: usize,
    pb: usize,
    opts: &QuadOptions,
) -> Vec<f64> {
    let order = opts.outer_order + (pa + pb) / 2;
    let ha = mesh.len(ea);
    let el = mesh.element(ea);
    let mut block = vec![0.0; (pa + 1) * (pb + 1)];
    let mut bi = vec![0.0; pa + 1];
    let mut mk = vec![0.0; pb + 1];
    for (s, w) in outer_rule(mesh, ea, eb, order, opts.max_depth) {
        legendre_values(2.0 * s / ha - 1.0, &mut bi);
        log_moments(mesh, eb, el.point_at(s), &mut mk);
        for i in 0..=pa {
            let wi = -INV_2PI * w * bi[i] * ((2 * i + 1) as f64 / ha).sqrt();
            for k in 0..=pb {
                block[i * (pb + 1) + k] += wi * mk[k];
            }
        }
    }
    block
}

/// `⟨b_i^{(a)}, V b_k^{(b)}⟩` for single local basis functions.
pub fn galerkin_v_entry(mesh: &Mesh, ea: usize, i: usize, eb: usize, k: usize, opts: &QuadOptions) -> f64 {
    galerkin_v_block(mesh, ea, i, eb, k, opts)[i * (k + 1) + k]
}

/// Dense Galerkin matrix `⟨b_m, V b_n⟩` of a piecewise polynomial space.
pub fn galerkin_v_matrix(space: &PwPolySpace, opts: &QuadOptions) -> DMatrix<f64> {
    let mesh = space.mesh();
    let ne = mesh.num_elements();
    let dim = space.dim();
    let rows: Vec<Vec<f64>> = (0..ne)
        .into_par_iter()
        .map(|a| {
            let pa = space.degree(a);
            let mut rows = vec![0.0; (pa + 1) * dim];
            for b in 0..ne {
                let pb = space.degree(b);
                let block = galerkin_v_block(mesh, a, pa, b, pb, opts);
                for i in 0..=pa {
                    for k in 0..=pb {
                        rows[i * dim + space.index(b, k)] = block[i * (pb + 1) + k];
                    }
                }
            }
            rows
        })
        .collect();
    let mut mat = DMatrix::zeros(dim, dim);
    for (a, rows) in rows.iter().enumerate() {
        for (i, row) in rows.chunks(dim).enumerate() {
            let r = space.index(a, i);
            for (c, &v) in row.iter().enumerate() {
                mat[(r, c)] = v;
            }
        }
    }
    mat
}

/// Potentials `V b_k^{(b)}` of every basis function of `space` at every mesh
/// node, laid out as `[node][space index]`.
fn node_potentials(space: &PwPolySpace) -> Vec<Vec<f64>> {
    let mesh = space.mesh();
    let dim = space.dim();
    (0..mesh.num_nodes())
        .into_par_iter()
        .map(|j| {
            let x = mesh.node(j);
            let mut row = vec![0.0; dim];
            for b in 0..mesh.num_elements() {
                let r = space.local_range(b);
                log_moments(mesh, b, x, &mut row[r.clone()]);
                for v in &mut row[r] {
                    *v *= -INV_2PI;
                }
            }
            row
        })
        .collect()
}

/// Matrix `G[m, n] = ⟨φ_m, (V ψ_n)'⟩_Γ` for `φ_m` in `trial` and `ψ_n` in `test`.
///
/// Each entry is integrated by parts elementwise:
/// `⟨φ, (Vψ)'⟩_T = φ(Vψ)|_{end} - φ(Vψ)|_{start} - ⟨φ', Vψ⟩_T`.
pub fn phi_vtau_matrix(trial: &PwPolySpace, test: &PwPolySpace, opts: &QuadOptions) -> DMatrix<f64> {
    let mesh = trial.mesh();
    let ne = mesh.num_elements();
    let dim_test = test.dim();
    let pots = node_potentials(test);
    let rows: Vec<Vec<f64>> = (0..ne)
        .into_par_iter()
        .map(|a| {
            let pa = trial.degree(a);
            let ha = mesh.len(a);
            let (n0, n1) = mesh.element_nodes(a);
            let mut rows = vec![0.0; (pa + 1) * dim_test];
            for i in 0..=pa {
                let scale = ((2 * i + 1) as f64 / ha).sqrt();
                let (v_end, v_start) = (scale, if i % 2 == 0 { scale } else { -scale });
                let row = &mut rows[i * dim_test..(i + 1) * dim_test];
                for (r, (p1, p0)) in row.iter_mut().zip(pots[n1].iter().zip(&pots[n0])) {
                    *r = v_end * p1 - v_start * p0;
                }
            }
            if pa >= 1 {
                let el = mesh.element(a);
                let mut dpi = vec![0.0; pa + 1];
                let mut mk = vec![0.0; test.max_degree() + 1];
                let derivs: Vec<_> = (0..=pa)
                    .map(|i| trial.basis_poly(a, i).derivative())
                    .collect();
                for b in 0..ne {
                    let pb = test.degree(b);
                    let order = opts.outer_order + (pa + pb) / 2;
                    let cols = test.local_range(b);
                    for (s, w) in outer_rule(mesh, a, b, order, opts.max_depth) {
                        for (d, dp) in dpi.iter_mut().zip(&derivs) {
                            *d = dp.eval(s);
                        }
                        let m = &mut mk[..=pb];
                        log_moments(mesh, b, el.point_at(s), m);
                        for i in 1..=pa {
                            let f = INV_2PI * w * dpi[i];
                            let row = &mut rows[i * dim_test..(i + 1) * dim_test];
                            for (r, mv) in row[cols.clone()].iter_mut().zip(m.iter()) {
                                // - ⟨φ', Vψ⟩ with Vψ = -(1/2π) M
                                *r += f * mv;
                            }
                        }
                    }
                }
            }
            rows
        })
        .collect();
    let mut mat = DMatrix::zeros(trial.dim(), dim_test);
    for (a, rows) in rows.iter().enumerate() {
        for (i, row) in rows.chunks(dim_test).enumerate() {
            let r = trial.index(a, i);
            for (c, &v) in row.iter().enumerate() {
                mat[(r, c)] = v;
            }
        }
    }
    mat
}

/// `⟨φ, (Vτ)'⟩_Γ`, integrated by parts on each element with `Vτ` evaluated
/// pointwise through [`v_eval`].
pub fn phi_vtau_form(phi: &PwPoly, tau: &PwPoly, opts: &QuadOptions) -> f64 {
    let mesh = phi.mesh();
    let mut acc = 0.0;
    for a in 0..mesh.num_elements() {
        let poly = phi.local_poly(a);
        if poly.coeffs.iter().all(|&c| c == 0.0) {
            continue;
        }
        let el = mesh.element(a);
        acc += poly.end_value() * v_eval(tau, el.end) - poly.start_value() * v_eval(tau, el.start);
        let dp = poly.derivative();
        if dp.coeffs.iter().any(|&c| c != 0.0) {
            let order = opts.outer_order + phi.space.degree(a) + tau.space.max_degree();
            for (s, w) in self_graded_rule(mesh, a, order, opts.max_depth) {
                acc -= w * dp.eval(s) * v_eval(tau, el.point_at(s));
            }
        }
    }
    acc
}

/// Distance from `x` to element `e`.
pub fn distance_to_element(mesh: &Mesh, e: usize, x: Point) -> f64 {
    let el = mesh.element(e);
    point_segment_dist(x, el.start, el.end)
}
