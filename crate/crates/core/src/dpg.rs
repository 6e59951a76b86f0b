//! Assembly and solution of the DPG system, residual lift, error indicators
//! and L² errors against a reference solution.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::layerpot::{phi_vtau_matrix, QuadOptions};
use crate::mesh::{Mesh, Point};
use crate::polyspace::{cached_rule, legendre_values, LocalPoly, PwPoly, PwPolySpace};
use crate::trialtest::{
    eval_b, local_v_inner, mean_profile, node_profile_after, node_profile_before, v_inner,
    BrokenPoly, TestFunction, Theta, TrialFunction, TrialIndex,
};

/// Right-hand side `f` of `W φ = f`.
pub type Load = dyn Fn(Point) -> f64 + Send + Sync;

#[derive(Debug, Clone, PartialEq)]
pub struct DpgOptions {
    /// Degree increment of the `τ` space used for the optimal test functions.
    pub enrich_solve: usize,
    /// Degree increment of both test components in the residual lift.
    pub enrich_error: usize,
    pub quad: QuadOptions,
    /// Gauss points beyond the polynomial degree when integrating `f`.
    pub load_extra: usize,
}

impl Default for DpgOptions {
    fn default() -> Self {
        DpgOptions {
            enrich_solve: 1,
            enrich_error: 2,
            quad: QuadOptions::default(),
            load_extra: 8,
        }
    }
}

/// Per-element Legendre moments `∫_T f P_k(ξ) ds` of the load.
#[derive(Debug, Clone)]
pub struct LoadMoments {
    moments: Vec<Vec<f64>>,
}

impl LoadMoments {
    pub fn new(mesh: &Mesh, f: &Load, kmax: usize, extra: usize) -> Self {
        let rule = cached_rule(kmax + extra);
        let moments = (0..mesh.num_elements())
            .into_par_iter()
            .map(|e| {
                let el = mesh.element(e);
                let mut out = vec![0.0; kmax + 1];
                let mut pk = vec![0.0; kmax + 1];
                for (&x, &w) in rule.points.iter().zip(&rule.weights) {
                    legendre_values(x, &mut pk);
                    let fx = 0.5 * el.length * w * f(el.point_at(0.5 * (x + 1.0) * el.length));
                    for (o, p) in out.iter_mut().zip(&pk) {
                        *o += fx * p;
                    }
                }
                out
            })
            .collect();
        LoadMoments { moments }
    }

    /// `⟨f, q⟩_T` for a polynomial on element `e`.
    pub fn dot(&self, e: usize, q: &LocalPoly) -> f64 {
        let m = &self.moments[e];
        assert!(q.coeffs.len() <= m.len(), "load moments computed to low degree");
        q.coeffs.iter().zip(m).map(|(a, b)| a * b).sum()
    }

    pub fn dot_broken(&self, v: &BrokenPoly) -> f64 {
        v.pieces().iter().map(|(e, q)| self.dot(*e, q)).sum()
    }
}

/// Stiffness matrix and load vector of the DPG scheme.
#[derive(Debug, Clone)]
pub struct DpgSystem {
    pub theta: Theta,
    pub stiffness: DMatrix<f64>,
    pub load: DVector<f64>,
}

/// Per-element test functions of the σ and node families with their global
/// trial indices.
fn local_family(theta: &Theta, e: usize) -> Vec<(usize, LocalPoly)> {
    let layout = theta.layout();
    let trial = theta.trial_space();
    let mesh = theta.mesh();
    let h = mesh.len(e);
    let (n0, n1) = mesh.element_nodes(e);
    let mut out: Vec<(usize, LocalPoly)> = (0..=trial.degree(e))
        .map(|k| {
            (
                layout.join(TrialIndex::Sigma(trial.index(e, k))),
                trial.basis_poly(e, k).antiderivative(),
            )
        })
        .collect();
    out.push((layout.join(TrialIndex::Node(n0)), node_profile_after(h)));
    out.push((layout.join(TrialIndex::Node(n1)), node_profile_before(h)));
    out
}

/// Builds Θ and the Gram stiffness matrix `⟨Θu_m, Θu_n⟩_V` blockwise.
pub fn assemble(trial: Arc<PwPolySpace>, f: &Load, opts: &DpgOptions) -> DpgSystem {
    let theta = Theta::new(trial.clone(), opts.enrich_solve, &opts.quad);
    let mesh = theta.mesh().clone();
    let layout = theta.layout();
    let dim = layout.dim();
    let d = trial.dim();
    let test = theta.test_space();
    let g = theta.g();
    let c = theta.means();
    let closed = mesh.is_closed();
    let loads = LoadMoments::new(&mesh, f, trial.max_degree() + 2, opts.load_extra);

    let mut k = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);

    // τ parts
    let ggt = g * g.transpose();
    k.view_mut((0, 0), (d, d)).copy_from(&ggt);
    for j in 0..d {
        let (e, kk) = trial.locate(j);
        let col = test.index(e, kk);
        for i in 0..d {
            k[(i, d + j)] = g[(i, col)];
        }
        k[(d + j, d + j)] = 1.0;
    }

    // v parts of the σ and node families
    let mut mean_cross = vec![0.0; dim];
    let mut mean_norm = 0.0;
    let mut mean_load = 0.0;
    for e in 0..mesh.num_elements() {
        let fam = local_family(&theta, e);
        for (a, (ma, pa)) in fam.iter().enumerate() {
            for (mb, pb) in &fam[a..] {
                let val = local_v_inner(pa, pb);
                k[(*ma, *mb)] += val;
                if ma != mb {
                    k[(*mb, *ma)] += val;
                }
            }
            rhs[*ma] += loads.dot(e, pa);
        }
        if closed {
            let q = mean_profile(mesh.len(e));
            mean_norm += local_v_inner(&q, &q);
            mean_load += loads.dot(e, &q);
            for (m, p) in &fam {
                mean_cross[*m] += local_v_inner(&q, p);
            }
        }
    }

    // v parts of the φ family: c_i times the mean profile
    if closed {
        for i in 0..d {
            if c[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                k[(i, j)] += c[i] * c[j] * mean_norm;
            }
            for m in d..dim {
                k[(i, m)] += c[i] * mean_cross[m];
            }
            rhs[i] = c[i] * mean_load;
        }
    }
    for i in 0..d {
        for m in d..dim {
            k[(m, i)] = k[(i, m)];
        }
    }
    DpgSystem {
        theta,
        stiffness: k,
        load: rhs,
    }
}

/// Stiffness matrix from explicit optimal test functions, `⟨Θu_m, Θu_n⟩_V`.
pub fn gram_matrix(theta: &Theta) -> DMatrix<f64> {
    let dim = theta.layout().dim();
    let tests: Vec<TestFunction> = (0..dim).into_par_iter().map(|m| theta.theta_basis(m)).collect();
    let rows: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|m| tests.iter().map(|t| v_inner(&tests[m], t)).collect())
        .collect();
    DMatrix::from_fn(dim, dim, |m, n| rows[m][n])
}

/// Stiffness matrix through the bilinear form, `b(u_n, Θu_m)`.
pub fn b_matrix(theta: &Theta, quad: &QuadOptions) -> DMatrix<f64> {
    let layout = theta.layout();
    let dim = layout.dim();
    let rows: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|m| {
            let t = theta.theta_basis(m);
            (0..dim)
                .map(|n| eval_b(&TrialFunction::basis(layout, n), &t, quad))
                .collect()
        })
        .collect();
    DMatrix::from_fn(dim, dim, |m, n| rows[m][n])
}

/// Symmetric positive definite solve with Jacobi scaling.
pub fn solve(sys: &DpgSystem) -> Result<TrialFunction> {
    let x = spd_solve(&sys.stiffness, &sys.load, "DPG stiffness")?;
    Ok(TrialFunction::from_vector(
        sys.theta.trial_space().clone(),
        x.as_slice(),
    ))
}

pub(crate) fn spd_solve(k: &DMatrix<f64>, rhs: &DVector<f64>, what: &'static str) -> Result<DVector<f64>> {
    let n = k.nrows();
    let mut scale = DVector::zeros(n);
    for i in 0..n {
        let d = k[(i, i)];
        if d.is_nan() || d <= 0.0 {
            return Err(Error::NotPositiveDefinite { what });
        }
        scale[i] = 1.0 / d.sqrt();
    }
    let scaled = DMatrix::from_fn(n, n, |i, j| scale[i] * k[(i, j)] * scale[j]);
    let chol = Cholesky::new(scaled).ok_or(Error::NotPositiveDefinite { what })?;
    let y = chol.solve(&rhs.component_mul(&scale));
    Ok(y.component_mul(&scale))
}

/// Error quantities of a discrete solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub energy_total: f64,
    /// `η_T` per element, with `Σ η_T² = energy_total²`.
    pub indicators: Vec<f64>,
    pub l2: Option<L2Errors>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Errors {
    pub phi: f64,
    pub sigma: f64,
    /// `N^{-1/2} |σ̂ - σ̂_ref|`.
    pub nodes_scaled: f64,
}

impl L2Errors {
    /// `‖φ - φ_ref‖ + ‖σ - σ_ref‖`.
    pub fn fields(&self) -> f64 {
        self.phi + self.sigma
    }

    pub fn total(&self) -> f64 {
        self.phi + self.sigma + self.nodes_scaled
    }
}

/// Riesz representative `e` of the residual in the enriched test space:
/// `⟨e, w⟩_V = ⟨f, w.v⟩ - b(u, w)`.
pub fn residual_lift(u: &TrialFunction, f: &Load, opts: &DpgOptions) -> TestFunction {
    let trial = u.space().clone();
    let mesh = trial.mesh().clone();
    let delta = opts.enrich_error;
    let lift_space = Arc::new(trial.enriched(delta));
    let g = phi_vtau_matrix(&trial, &lift_space, &opts.quad);
    let mut tau = -g.tr_mul(&DVector::from_column_slice(&u.phi.coeffs));
    for e in 0..mesh.num_elements() {
        let start = lift_space.index(e, 0);
        for (k, s) in u.sigma.local(e).iter().enumerate() {
            tau[start + k] -= s;
        }
    }
    let c_phi = if mesh.is_closed() { u.phi.integral() } else { 0.0 };
    let loads = LoadMoments::new(&mesh, f, trial.max_degree() + delta, opts.load_extra);
    let pieces: Vec<(usize, LocalPoly)> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let h = mesh.len(e);
            let q = trial.degree(e) + delta;
            let (n0, n1) = mesh.element_nodes(e);
            let jump = u.sigma_hat[n0] - u.sigma_hat[n1];
            let sigma = u.sigma.local(e);
            // ψ_0 = 1
            let one = LocalPoly::constant(h, 1.0);
            let r0 = loads.dot(e, &one) - c_phi * h - jump;
            let mut v = one.scaled(r0 / h);
            // ψ_k = ∫ b_{k-1}, orthonormal in the derivative seminorm
            for k in 1..=q {
                let psi = LocalPoly::legendre(h, k - 1).antiderivative();
                let mut r = loads.dot(e, &psi) - c_phi * psi.integral();
                r -= sigma.get(k - 1).copied().unwrap_or(0.0);
                if k == 1 {
                    r += u.sigma_hat[n1] * h.sqrt();
                }
                v.axpy(r, &psi);
            }
            (e, v)
        })
        .collect();
    TestFunction {
        tau: PwPoly::from_coeffs(lift_space, tau.iter().copied().collect()),
        v: BrokenPoly::from_pieces(pieces),
    }
}

/// `η_T = (‖τ_e‖²_T + ‖v_e'‖²_T + |T| v_e(x_T)²)^{1/2}`.
pub fn indicators(lift: &TestFunction) -> Vec<f64> {
    let mesh = lift.tau.mesh();
    (0..mesh.num_elements())
        .map(|e| {
            let tau: f64 = lift.tau.local(e).iter().map(|c| c * c).sum();
            let v = lift.v.piece(e).map_or(0.0, |p| local_v_inner(p, p));
            (tau + v).sqrt()
        })
        .collect()
}

/// Energy error and indicators from the residual lift.
pub fn energy_error(u: &TrialFunction, f: &Load, opts: &DpgOptions) -> ErrorReport {
    let lift = residual_lift(u, f, opts);
    report_from_lift(&lift)
}

pub fn report_from_lift(lift: &TestFunction) -> ErrorReport {
    let indicators = indicators(lift);
    let energy_total = indicators.iter().map(|x| x * x).sum::<f64>().sqrt();
    ErrorReport {
        energy_total,
        indicators,
        l2: None,
    }
}

/// Exact solution `(φ, σ)` of a model problem; `σ̂` is `σ` at the nodes.
#[derive(Clone)]
pub struct Reference {
    pub phi: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    pub sigma: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for Reference {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Reference")
    }
}

/// Quadrature points `(s, w)` on element `e`: plain Gauss inside, graded
/// towards the endpoints of an open curve.
fn error_rule(mesh: &Mesh, e: usize, p: usize) -> Vec<(f64, f64)> {
    let h = mesh.len(e);
    let rule = cached_rule(p + 8);
    let mut pieces = Vec::new();
    let open = !mesh.is_closed();
    let at_start = open && e == 0;
    let at_end = open && e + 1 == mesh.num_elements();
    let grade = |pieces: &mut Vec<(f64, f64)>, lo: f64, hi: f64, toward_lo: bool| {
        let mut len = hi - lo;
        for _ in 0..40 {
            let inner = 0.5 * len;
            if toward_lo {
                pieces.push((lo + inner, lo + len));
            } else {
                pieces.push((hi - len, hi - inner));
            }
            len = inner;
        }
        if toward_lo {
            pieces.push((lo, lo + len));
        } else {
            pieces.push((hi - len, hi));
        }
    };
    match (at_start, at_end) {
        (true, true) => {
            grade(&mut pieces, 0.0, 0.5 * h, true);
            grade(&mut pieces, 0.5 * h, h, false);
        }
        (true, false) => grade(&mut pieces, 0.0, h, true),
        (false, true) => grade(&mut pieces, 0.0, h, false),
        (false, false) => pieces.push((0.0, h)),
    }
    let mut out = Vec::with_capacity(pieces.len() * rule.points.len());
    for (a, b) in pieces {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        out.extend(rule.points.iter().zip(&rule.weights).map(|(&x, &w)| (c + r * x, r * w)));
    }
    out
}

/// `‖φ_ref - g‖_{L²(Γ)}` for a piecewise polynomial `g`.
pub fn l2_distance(g: &PwPoly, exact: &(dyn Fn(Point) -> f64 + Send + Sync)) -> f64 {
    let mesh = g.mesh();
    (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let el = mesh.element(e);
            let poly = g.local_poly(e);
            error_rule(mesh, e, g.space.degree(e))
                .into_iter()
                .map(|(s, w)| {
                    let d = exact(el.point_at(s)) - poly.eval(s);
                    w * d * d
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// L² errors of `u` against a reference solution.
pub fn l2_errors(u: &TrialFunction, reference: &Reference) -> L2Errors {
    let mesh = u.phi.mesh();
    let n = mesh.num_nodes();
    let nodes = (0..n)
        .map(|j| {
            let d = u.sigma_hat[j] - (reference.sigma)(mesh.node(j));
            d * d
        })
        .sum::<f64>()
        .sqrt();
    L2Errors {
        phi: l2_distance(&u.phi, reference.phi.as_ref()),
        sigma: l2_distance(&u.sigma, reference.sigma.as_ref()),
        nodes_scaled: nodes / (n as f64).sqrt(),
    }
}

/// L² projection of `g` onto `space`, using the graded error quadrature.
pub fn project(space: Arc<PwPolySpace>, g: &(dyn Fn(Point) -> f64 + Send + Sync)) -> PwPoly {
    let mesh = space.mesh().clone();
    let mut out = PwPoly::zeros(space.clone());
    for e in 0..mesh.num_elements() {
        let el = mesh.element(e);
        let p = space.degree(e);
        let mut vals = vec![0.0; p + 1];
        let range = space.local_range(e);
        for (s, w) in error_rule(&mesh, e, p) {
            let gx = g(el.point_at(s));
            space.basis_values(e, s, &mut vals);
            for (c, b) in out.coeffs[range.clone()].iter_mut().zip(&vals) {
                *c += w * gx * b;
            }
        }
    }
    out
}

/// `‖φ_ref - Πφ_ref‖ + ‖σ_ref - Πσ_ref‖` over `space`.
pub fn best_approximation(space: Arc<PwPolySpace>, reference: &Reference) -> f64 {
    let phi = project(space.clone(), reference.phi.as_ref());
    let sigma = project(space, reference.sigma.as_ref());
    l2_distance(&phi, reference.phi.as_ref()) + l2_distance(&sigma, reference.sigma.as_ref())
}
