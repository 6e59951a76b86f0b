//! Discontinuous piecewise polynomials with L²-orthonormal Legendre bases.
//!
//! On an element `T` of length `h`, with local arclength `s ∈ (0, h)` and
//! `t = s / h`, the local basis is `b_k(s) = sqrt((2k+1)/h) P_k(2t - 1)`.
//! Elementwise mass matrices are therefore identities and the bases for
//! degrees `p` and `p + 1` are nested.

use std::sync::{Arc, OnceLock};

use crate::mesh::{BrokenTrace, Mesh, Point};

/// Gauss–Legendre rule on `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// Integrates `f` over `(a, b)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(c + r * x))
            .sum::<f64>()
            * r
    }
}

/// Standard `n`-point Gauss–Legendre rule, computed by Newton iteration on `P_n`.
pub fn gauss_rule(n: usize) -> QuadRule {
    assert!(n >= 1, "Gauss rule needs at least one point");
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    QuadRule { points, weights }
}

const CACHED_RULES: usize = 128;

/// Shared copy of `gauss_rule(n)` for hot loops.
pub(crate) fn cached_rule(n: usize) -> &'static QuadRule {
    static RULES: [OnceLock<QuadRule>; CACHED_RULES] = [const { OnceLock::new() }; CACHED_RULES];
    assert!(
        (1..CACHED_RULES).contains(&n),
        "quadrature order {n} out of cached range"
    );
    RULES[n].get_or_init(|| gauss_rule(n))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// `P_0(x), ..., P_n(x)` written into `out`.
pub fn legendre_values(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 1..out.len().saturating_sub(1) {
        out[k + 1] = ((2 * k + 1) as f64 * x * out[k] - k as f64 * out[k - 1]) / (k + 1) as f64;
    }
}

/// A polynomial on one element of length `h`, stored by its coefficients
/// in the Legendre polynomials `P_k(ξ)`, `ξ = 2s/h - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPoly {
    pub h: f64,
    pub coeffs: Vec<f64>,
}

impl LocalPoly {
    pub fn zero(h: f64) -> Self {
        LocalPoly { h, coeffs: vec![] }
    }

    pub fn constant(h: f64, c: f64) -> Self {
        LocalPoly { h, coeffs: vec![c] }
    }

    /// `c0 + c1 s`.
    pub fn linear(h: f64, c0: f64, c1: f64) -> Self {
        let half = 0.5 * c1 * h;
        LocalPoly {
            h,
            coeffs: vec![c0 + half, half],
        }
    }

    /// `Σ_j c_j s^j`.
    pub fn from_power_series(h: f64, c: &[f64]) -> Self {
        // Horner in s = h (ξ + 1) / 2, multiplying Legendre series by ξ
        let mut acc = LocalPoly::zero(h);
        for &cj in c.iter().rev() {
            let n = acc.coeffs.len();
            let mut xi = vec![0.0; n + 1];
            for (k, &a) in acc.coeffs.iter().enumerate() {
                let d = (2 * k + 1) as f64;
                xi[k + 1] += a * (k + 1) as f64 / d;
                if k > 0 {
                    xi[k - 1] += a * k as f64 / d;
                }
            }
            let mut next = LocalPoly { h, coeffs: xi };
            next.axpy(1.0, &acc);
            acc = next.scaled(0.5 * h);
            if acc.coeffs.is_empty() {
                acc.coeffs.push(0.0);
            }
            acc.coeffs[0] += cj;
        }
        acc
    }

    /// Orthonormal Legendre basis function `b_k` on an element of length `h`.
    pub fn legendre(h: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = ((2 * k + 1) as f64 / h).sqrt();
        LocalPoly { h, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Value at the reference coordinate `ξ ∈ [-1, 1]`.
    pub fn eval_ref(&self, xi: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, xi);
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            let pk = match k {
                0 => 1.0,
                1 => xi,
                _ => {
                    let p2 = ((2 * k - 1) as f64 * xi * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            acc += c * pk;
        }
        acc
    }

    /// Value at arclength `s`.
    pub fn eval(&self, s: f64) -> f64 {
        self.eval_ref(2.0 * s / self.h - 1.0)
    }

    pub fn start_value(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 0 { *c } else { -c })
            .sum()
    }

    pub fn end_value(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// Derivative with respect to arclength.
    pub fn derivative(&self) -> LocalPoly {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n.saturating_sub(1)];
        // P_j' = Σ_{k < j, j - k odd} (2k + 1) P_k
        let (mut odd, mut even) = (0.0, 0.0);
        for j in (1..n).rev() {
            if j % 2 == 1 {
                odd += self.coeffs[j];
            } else {
                even += self.coeffs[j];
            }
            let k = j - 1;
            let tail = if k % 2 == 0 { odd } else { even };
            out[k] = (2 * k + 1) as f64 * tail * 2.0 / self.h;
        }
        LocalPoly {
            h: self.h,
            coeffs: out,
        }
    }

    /// Antiderivative with respect to arclength, vanishing at `s = 0`.
    pub fn antiderivative(&self) -> LocalPoly {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n + 1];
        let half = 0.5 * self.h;
        for (j, &c) in self.coeffs.iter().enumerate() {
            if j == 0 {
                // ∫_{-1}^ξ P_0 = P_0 + P_1
                out[0] += half * c;
                out[1] += half * c;
            } else {
                let f = half * c / (2 * j + 1) as f64;
                out[j + 1] += f;
                out[j - 1] -= f;
            }
        }
        LocalPoly {
            h: self.h,
            coeffs: out,
        }
    }

    pub fn scaled(&self, a: f64) -> LocalPoly {
        LocalPoly {
            h: self.h,
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &LocalPoly) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), 0.0);
        }
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }

    /// `∫_T self · other ds`.
    pub fn l2_dot(&self, other: &LocalPoly) -> f64 {
        self.h
            * self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .enumerate()
                .map(|(k, (a, b))| a * b / (2 * k + 1) as f64)
                .sum::<f64>()
    }

    /// `∫_T self ds`.
    pub fn integral(&self) -> f64 {
        self.h * self.coeffs.first().copied().unwrap_or(0.0)
    }
}

/// Piecewise polynomial space with per-element degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct PwPolySpace {
    mesh: Arc<Mesh>,
    degrees: Vec<usize>,
    offsets: Vec<usize>,
}

impl PwPolySpace {
    pub fn new(mesh: Arc<Mesh>, degrees: Vec<usize>) -> Self {
        assert_eq!(degrees.len(), mesh.num_elements());
        let mut offsets = Vec::with_capacity(degrees.len() + 1);
        offsets.push(0);
        for &p in &degrees {
            offsets.push(offsets.last().unwrap() + p + 1);
        }
        PwPolySpace {
            mesh,
            degrees,
            offsets,
        }
    }

    pub fn uniform(mesh: Arc<Mesh>, p: usize) -> Self {
        let n = mesh.num_elements();
        Self::new(mesh, vec![p; n])
    }

    /// Same mesh, every degree raised by `delta`.
    pub fn enriched(&self, delta: usize) -> Self {
        Self::new(
            self.mesh.clone(),
            self.degrees.iter().map(|p| p + delta).collect(),
        )
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn degree(&self, e: usize) -> usize {
        self.degrees[e]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// Global index of local basis function `k` on element `e`.
    pub fn index(&self, e: usize, k: usize) -> usize {
        debug_assert!(k <= self.degrees[e]);
        self.offsets[e] + k
    }

    /// Range of global indices on element `e`.
    pub fn local_range(&self, e: usize) -> std::ops::Range<usize> {
        self.offsets[e]..self.offsets[e + 1]
    }

    /// `(element, local index)` of global index `i`.
    pub fn locate(&self, i: usize) -> (usize, usize) {
        let e = self.offsets.partition_point(|&o| o <= i) - 1;
        (e, i - self.offsets[e])
    }

    pub fn basis_poly(&self, e: usize, k: usize) -> LocalPoly {
        LocalPoly::legendre(self.mesh.len(e), k)
    }

    /// Values of all local basis functions of element `e` at arclength `s`.
    pub fn basis_values(&self, e: usize, s: f64, out: &mut [f64]) {
        let h = self.mesh.len(e);
        legendre_values(2.0 * s / h - 1.0, out);
        for (k, v) in out.iter_mut().enumerate() {
            *v *= ((2 * k + 1) as f64 / h).sqrt();
        }
    }
}

/// A function in a [`PwPolySpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct PwPoly {
    pub space: Arc<PwPolySpace>,
    pub coeffs: Vec<f64>,
}

impl PwPoly {
    pub fn zeros(space: Arc<PwPolySpace>) -> Self {
        let n = space.dim();
        PwPoly {
            space,
            coeffs: vec![0.0; n],
        }
    }

    pub fn from_coeffs(space: Arc<PwPolySpace>, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), space.dim(), "coefficient length mismatch");
        PwPoly { space, coeffs }
    }

    /// Single basis function `i` of `space`.
    pub fn basis(space: Arc<PwPolySpace>, i: usize) -> Self {
        let mut p = Self::zeros(space);
        p.coeffs[i] = 1.0;
        p
    }

    pub fn mesh(&self) -> &Mesh {
        self.space.mesh()
    }

    pub fn local(&self, e: usize) -> &[f64] {
        &self.coeffs[self.space.local_range(e)]
    }

    pub fn local_poly(&self, e: usize) -> LocalPoly {
        let h = self.mesh().len(e);
        LocalPoly {
            h,
            coeffs: self
                .local(e)
                .iter()
                .enumerate()
                .map(|(k, c)| c * ((2 * k + 1) as f64 / h).sqrt())
                .collect(),
        }
    }

    /// Value on element `e` at arclength `s ∈ [0, |T|]`.
    pub fn eval(&self, e: usize, s: f64) -> f64 {
        let h = self.mesh().len(e);
        let local = self.local(e);
        let mut pk = vec![0.0; local.len()];
        legendre_values(2.0 * s / h - 1.0, &mut pk);
        local
            .iter()
            .zip(&pk)
            .enumerate()
            .map(|(k, (c, p))| c * p * ((2 * k + 1) as f64 / h).sqrt())
            .sum()
    }

    /// L² projection of `g` using `p_T + 2` Gauss points per element.
    pub fn l2_project<G: Fn(Point) -> f64>(space: Arc<PwPolySpace>, g: G) -> Self {
        Self::l2_project_with(space, g, 2)
    }

    /// L² projection of `g` using `p_T + extra` Gauss points per element.
    pub fn l2_project_with<G: Fn(Point) -> f64>(
        space: Arc<PwPolySpace>,
        g: G,
        extra: usize,
    ) -> Self {
        let mut out = Self::zeros(space.clone());
        let mesh = space.mesh();
        let mut vals = vec![0.0; space.max_degree() + 1];
        for e in 0..mesh.num_elements() {
            let el = mesh.element(e);
            let p = space.degree(e);
            let rule = cached_rule(p + extra.max(1));
            let range = space.local_range(e);
            for (&x, &w) in rule.points.iter().zip(&rule.weights) {
                let s = 0.5 * (x + 1.0) * el.length;
                let gx = g(el.point_at(s));
                space.basis_values(e, s, &mut vals[..=p]);
                for (c, b) in out.coeffs[range.clone()].iter_mut().zip(&vals[..=p]) {
                    *c += 0.5 * el.length * w * gx * b;
                }
            }
        }
        out
    }

    /// `⟨self, other⟩_{L²(Γ)}` for functions on the same mesh (degrees may differ).
    pub fn l2_dot(&self, other: &PwPoly) -> f64 {
        (0..self.mesh().num_elements())
            .map(|e| {
                self.local(e)
                    .iter()
                    .zip(other.local(e))
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `⟨self, 1⟩_{L²(Γ)}`.
    pub fn integral(&self) -> f64 {
        (0..self.mesh().num_elements())
            .map(|e| self.local(e)[0] * self.mesh().len(e).sqrt())
            .sum()
    }

    /// Same function expressed in a space with degrees at least as large.
    pub fn embed(&self, target: Arc<PwPolySpace>) -> PwPoly {
        let mut out = PwPoly::zeros(target.clone());
        for e in 0..self.mesh().num_elements() {
            assert!(target.degree(e) >= self.space.degree(e));
            let start = target.index(e, 0);
            let local = self.local(e);
            out.coeffs[start..start + local.len()].copy_from_slice(local);
        }
        out
    }

    /// Overwrites the restriction to element `e`; `poly` must fit its degree.
    pub fn set_local(&mut self, e: usize, poly: &LocalPoly) {
        let p = self.space.degree(e);
        assert!(poly.coeffs.len() <= p + 1, "degree too high");
        let range = self.space.local_range(e);
        let out = &mut self.coeffs[range];
        out.fill(0.0);
        for (k, (o, a)) in out.iter_mut().zip(&poly.coeffs).enumerate() {
            *o = a * (poly.h / (2 * k + 1) as f64).sqrt();
        }
    }

    pub fn axpy(&mut self, a: f64, other: &PwPoly) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += a * y;
        }
    }
}

impl BrokenTrace for PwPoly {
    fn start_value(&self, _: &Mesh, e: usize) -> f64 {
        self.eval(e, 0.0)
    }

    fn end_value(&self, mesh: &Mesh, e: usize) -> f64 {
        self.eval(e, mesh.len(e))
    }
}

/// Antiderivative `s ↦ ∫_0^s p` of the restriction of `p` to element `e`.
pub fn antiderivative_on_element(p: &PwPoly, e: usize) -> LocalPoly {
    p.local_poly(e).antiderivative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn interval(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::interval([-1.0, 0.0], [1.0, 0.0], n).unwrap())
    }

    #[test]
    fn small_gauss_rules() {
        let r1 = gauss_rule(1);
        assert_eq!(r1.points, vec![0.0]);
        assert!((r1.weights[0] - 2.0).abs() < 1e-15);
        let r2 = gauss_rule(2);
        let x = 1.0 / 3f64.sqrt();
        assert!((r2.points[0] + x).abs() < 1e-15 && (r2.points[1] - x).abs() < 1e-15);
        assert!((r2.weights[0] - 1.0).abs() < 1e-15 && (r2.weights[1] - 1.0).abs() < 1e-15);
        let r3 = gauss_rule(3);
        assert!((r3.integrate(-1.0, 1.0, |t| t.powi(4)) - 0.4).abs() < 1e-14);
    }

    #[test]
    fn gauss_monomial_exactness() {
        for n in 1..=40 {
            let rule = gauss_rule(n);
            for d in 0..2 * n {
                let exact = if d % 2 == 0 { 2.0 / (d + 1) as f64 } else { 0.0 };
                let got = rule.integrate(-1.0, 1.0, |t| t.powi(d as i32));
                let scale = exact.abs().max(1.0);
                assert!(
                    (got - exact).abs() <= 1e-13 * scale,
                    "n={n} d={d} got={got} exact={exact}"
                );
            }
        }
    }

    #[test]
    fn local_mass_is_identity() {
        let mesh = Arc::new(
            Mesh::interval([-1.0, 0.0], [1.0, 0.0], 3)
                .unwrap()
                .refine_halve(&[0])
                .unwrap(),
        );
        let space = PwPolySpace::new(mesh.clone(), vec![0, 3, 6, 2]);
        let rule = gauss_rule(8);
        for e in 0..mesh.num_elements() {
            let p = space.degree(e);
            let h = mesh.len(e);
            for i in 0..=p {
                for j in 0..=p {
                    let m = rule.integrate(0.0, h, |s| {
                        let mut b = vec![0.0; p + 1];
                        space.basis_values(e, s, &mut b);
                        b[i] * b[j]
                    });
                    let poly = space.basis_poly(e, i).l2_dot(&space.basis_poly(e, j));
                    assert!((poly - m).abs() < 1e-12);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((m - want).abs() < 1e-12, "e={e} i={i} j={j} m={m}");
                }
            }
        }
    }

    #[test]
    fn power_series_matches_horner() {
        let h = 0.7;
        let c = [0.3, -1.2, 0.5, 2.0];
        let p = LocalPoly::from_power_series(h, &c);
        for s in [0.0, 0.2, 0.55, 0.7] {
            let want = c.iter().rev().fold(0.0, |acc, cj| acc * s + cj);
            assert!((p.eval(s) - want).abs() < 1e-14);
        }
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn set_local_round_trips() {
        let space = Arc::new(PwPolySpace::uniform(interval(3), 2));
        let mut f = PwPoly::zeros(space);
        let q = LocalPoly::from_power_series(f.mesh().len(1), &[1.0, -2.0, 0.5]);
        f.set_local(1, &q);
        for s in [0.0, 0.3, 0.6] {
            assert!((f.eval(1, s) - q.eval(s)).abs() < 1e-14);
        }
        assert!(f.local(0).iter().all(|&c| c == 0.0));
    }

    #[test]
    fn constant_basis_value() {
        let space = Arc::new(PwPolySpace::uniform(interval(4), 2));
        let b0 = PwPoly::basis(space.clone(), space.index(1, 0));
        for s in [0.0, 0.1, 0.5] {
            assert!((b0.eval(1, s) - 1.0 / 0.5f64.sqrt()).abs() < 1e-14);
        }
        assert_eq!(PwPoly::zeros(space).eval(2, 0.3), 0.0);
    }

    #[test]
    fn projection_reproduces_linear() {
        let mesh = interval(1);
        let space = Arc::new(PwPolySpace::uniform(mesh.clone(), 1));
        // s measured from (-1, 0), so s = x + 1
        let p = PwPoly::l2_project(space, |x| x[0] + 1.0);
        assert!((p.eval(0, 1.0) - 1.0).abs() < 1e-13);
        assert!((p.eval(0, 0.3) - 0.3).abs() < 1e-13);
    }

    #[test]
    fn projection_of_space_member_is_identity() {
        let mesh = interval(3);
        let space = Arc::new(PwPolySpace::new(mesh.clone(), vec![2, 0, 3]));
        let coeffs = vec![0.3, -1.0, 2.0, 0.7, 1.5, -0.2, 0.1, 0.05];
        let f = PwPoly::from_coeffs(space.clone(), coeffs.clone());
        let g = |x: Point| {
            // locate the element containing x and evaluate f there
            let e = ((x[0] + 1.0) / (2.0 / 3.0)).floor().min(2.0) as usize;
            f.eval(e, x[0] + 1.0 - e as f64 * 2.0 / 3.0)
        };
        let p = PwPoly::l2_project(space, g);
        for (a, b) in p.coeffs.iter().zip(&coeffs) {
            assert!((a - b).abs() < 1e-12);
        }
        let zero = PwPoly::l2_project(p.space.clone(), |_| 0.0);
        assert!(zero.coeffs.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn projection_of_semicircle() {
        let space = Arc::new(PwPolySpace::uniform(interval(1), 0));
        let p = PwPoly::l2_project_with(space, |x| (1.0 - x[0] * x[0]).sqrt(), 120);
        // ∫ sqrt(1 - x²) = π/2, basis constant 1/√2
        let want = std::f64::consts::FRAC_PI_2 / 2f64.sqrt();
        assert!((p.coeffs[0] - want).abs() < 1e-5);
        assert!((p.integral() - std::f64::consts::FRAC_PI_2).abs() < 1e-5);
    }

    #[test]
    fn antiderivative_examples() {
        let mesh = Arc::new(Mesh::interval([0.0, 0.0], [0.5, 0.0], 1).unwrap());
        let space = Arc::new(PwPolySpace::uniform(mesh.clone(), 1));
        let h: f64 = 0.5;
        // φ = 1 → v(s) = s
        let one = PwPoly::from_coeffs(space.clone(), vec![h.sqrt(), 0.0]);
        let v = antiderivative_on_element(&one, 0);
        for s in [0.0, 0.2, 0.5] {
            assert!((v.eval(s) - s).abs() < 1e-15);
        }
        let zero = antiderivative_on_element(&PwPoly::zeros(space.clone()), 0);
        assert_eq!(zero.eval(0.3), 0.0);
        // φ(s) = s on (0, 1) → s²/2
        let unit = Arc::new(Mesh::interval([0.0, 0.0], [1.0, 0.0], 1).unwrap());
        let sp1 = Arc::new(PwPolySpace::uniform(unit, 1));
        let lin = PwPoly::l2_project(sp1, |x| x[0]);
        let v = antiderivative_on_element(&lin, 0);
        for s in [0.0, 0.25, 1.0] {
            assert!((v.eval(s) - 0.5 * s * s).abs() < 1e-14);
        }
    }

    #[test]
    fn embedding_and_integral() {
        let space = Arc::new(PwPolySpace::uniform(interval(2), 1));
        let rich = Arc::new(space.enriched(2));
        let p = PwPoly::from_coeffs(space.clone(), vec![1.0, 2.0, -1.0, 0.5]);
        let q = p.embed(rich.clone());
        assert_eq!(q.coeffs.len(), 8);
        for s in [0.0, 0.3, 1.0] {
            assert!((p.eval(1, s) - q.eval(1, s)).abs() < 1e-14);
        }
        assert!((p.integral() - (1.0 - 1.0)).abs() < 1e-15);
        assert_eq!(space.locate(3), (1, 1));
        assert_eq!(rich.locate(4), (1, 0));
    }

    proptest! {
        #[test]
        fn antiderivative_inverts_derivative(
            coeffs in proptest::collection::vec(-3.0f64..3.0, 1..7),
            h in 0.01f64..2.0,
        ) {
            let mut p = LocalPoly { h, coeffs };
            p.coeffs[0] -= p.start_value();
            let back = p.derivative().antiderivative();
            for s in [0.0, 0.3, 0.77, 1.0] {
                prop_assert!((back.eval(s * h) - p.eval(s * h)).abs() < 1e-11);
            }
        }

        #[test]
        fn global_mass_identity(degrees in proptest::collection::vec(0usize..6, 1..6)) {
            let n = degrees.len();
            let mesh = Arc::new(Mesh::interval([-1.0, 0.0], [1.0, 0.0], n).unwrap());
            let space = Arc::new(PwPolySpace::new(mesh, degrees));
            for i in 0..space.dim() {
                let pi = PwPoly::basis(space.clone(), i);
                for j in 0..space.dim() {
                    let (ei, ki) = space.locate(i);
                    let (ej, kj) = space.locate(j);
                    let m = if ei == ej {
                        space.basis_poly(ei, ki).l2_dot(&space.basis_poly(ej, kj))
                    } else {
                        0.0
                    };
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((m - want).abs() < 1e-12);
                    prop_assert!((pi.l2_dot(&PwPoly::basis(space.clone(), j)) - want).abs() < 1e-15);
                }
            }
        }
    }
}
