//! Trial and test functions, the test inner product, the bilinear form and
//! the trial-to-test operator.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::layerpot::{phi_vtau_form, phi_vtau_matrix, QuadOptions};
use crate::mesh::{BrokenTrace, Mesh};
use crate::polyspace::{LocalPoly, PwPoly, PwPolySpace};

/// Position of a trial basis function in the unknown vector `(φ, σ, σ̂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialIndex {
    Phi(usize),
    Sigma(usize),
    Node(usize),
}

/// Block layout of the trial space `U_hp`.
#[derive(Debug, Clone)]
pub struct TrialLayout {
    space: Arc<PwPolySpace>,
}

impl TrialLayout {
    pub fn new(space: Arc<PwPolySpace>) -> Self {
        TrialLayout { space }
    }

    pub fn space(&self) -> &Arc<PwPolySpace> {
        &self.space
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.space.mesh()
    }

    pub fn num_nodes(&self) -> usize {
        self.space.mesh().num_nodes()
    }

    pub fn dim(&self) -> usize {
        2 * self.space.dim() + self.num_nodes()
    }

    pub fn split(&self, m: usize) -> TrialIndex {
        let d = self.space.dim();
        if m < d {
            TrialIndex::Phi(m)
        } else if m < 2 * d {
            TrialIndex::Sigma(m - d)
        } else {
            TrialIndex::Node(m - 2 * d)
        }
    }

    pub fn join(&self, idx: TrialIndex) -> usize {
        let d = self.space.dim();
        match idx {
            TrialIndex::Phi(i) => i,
            TrialIndex::Sigma(i) => d + i,
            TrialIndex::Node(j) => 2 * d + j,
        }
    }
}

/// `(φ, σ, σ̂) ∈ L² × L² × ℝᴺ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFunction {
    pub phi: PwPoly,
    pub sigma: PwPoly,
    pub sigma_hat: Vec<f64>,
}

impl TrialFunction {
    pub fn zeros(space: Arc<PwPolySpace>) -> Self {
        let n = space.mesh().num_nodes();
        TrialFunction {
            phi: PwPoly::zeros(space.clone()),
            sigma: PwPoly::zeros(space),
            sigma_hat: vec![0.0; n],
        }
    }

    pub fn basis(layout: &TrialLayout, m: usize) -> Self {
        let mut u = Self::zeros(layout.space.clone());
        match layout.split(m) {
            TrialIndex::Phi(i) => u.phi.coeffs[i] = 1.0,
            TrialIndex::Sigma(i) => u.sigma.coeffs[i] = 1.0,
            TrialIndex::Node(j) => u.sigma_hat[j] = 1.0,
        }
        u
    }

    /// Splits a coefficient vector laid out as `[φ | σ | σ̂]`.
    pub fn from_vector(space: Arc<PwPolySpace>, x: &[f64]) -> Self {
        let d = space.dim();
        assert_eq!(x.len(), 2 * d + space.mesh().num_nodes());
        TrialFunction {
            phi: PwPoly::from_coeffs(space.clone(), x[..d].to_vec()),
            sigma: PwPoly::from_coeffs(space, x[d..2 * d].to_vec()),
            sigma_hat: x[2 * d..].to_vec(),
        }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut out = self.phi.coeffs.clone();
        out.extend_from_slice(&self.sigma.coeffs);
        out.extend_from_slice(&self.sigma_hat);
        out
    }

    pub fn space(&self) -> &Arc<PwPolySpace> {
        &self.phi.space
    }
}

/// Elementwise polynomial with no continuity across nodes, stored sparsely.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BrokenPoly {
    pieces: Vec<(usize, LocalPoly)>,
}

impl BrokenPoly {
    pub fn zero() -> Self {
        BrokenPoly { pieces: vec![] }
    }

    pub fn single(e: usize, poly: LocalPoly) -> Self {
        BrokenPoly {
            pieces: vec![(e, poly)],
        }
    }

    /// Pieces are sorted by element; later duplicates are summed.
    pub fn from_pieces(mut pieces: Vec<(usize, LocalPoly)>) -> Self {
        pieces.sort_by_key(|(e, _)| *e);
        let mut out: Vec<(usize, LocalPoly)> = Vec::with_capacity(pieces.len());
        for (e, p) in pieces {
            match out.last_mut() {
                Some((last, q)) if *last == e => q.axpy(1.0, &p),
                _ => out.push((e, p)),
            }
        }
        BrokenPoly { pieces: out }
    }

    pub fn pieces(&self) -> &[(usize, LocalPoly)] {
        &self.pieces
    }

    pub fn piece(&self, e: usize) -> Option<&LocalPoly> {
        self.pieces
            .binary_search_by_key(&e, |(k, _)| *k)
            .ok()
            .map(|i| &self.pieces[i].1)
    }

    pub fn is_zero(&self) -> bool {
        self.pieces
            .iter()
            .all(|(_, p)| p.coeffs.iter().all(|&c| c == 0.0))
    }

    pub fn scaled(&self, a: f64) -> BrokenPoly {
        BrokenPoly {
            pieces: self.pieces.iter().map(|(e, p)| (*e, p.scaled(a))).collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, other: &BrokenPoly) {
        let mut all = std::mem::take(&mut self.pieces);
        all.extend(other.pieces.iter().map(|(e, p)| (*e, p.scaled(a))));
        *self = Self::from_pieces(all);
    }

    pub fn eval(&self, e: usize, s: f64) -> f64 {
        self.piece(e).map_or(0.0, |p| p.eval(s))
    }

    /// `⟨v, 1⟩_Γ`.
    pub fn integral(&self) -> f64 {
        self.pieces.iter().map(|(_, p)| p.integral()).sum()
    }

    /// Broken part of the test inner product:
    /// `Σ_T ⟨v', w'⟩_T + |T| v(x_T) w(x_T)`.
    pub fn v_inner(&self, other: &BrokenPoly) -> f64 {
        let mut acc = 0.0;
        let (mut i, mut j) = (0, 0);
        while i < self.pieces.len() && j < other.pieces.len() {
            let (ea, pa) = &self.pieces[i];
            let (eb, pb) = &other.pieces[j];
            match ea.cmp(eb) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += local_v_inner(pa, pb);
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

/// `⟨p', q'⟩_T + |T| p(x_T) q(x_T)` on a single element.
pub fn local_v_inner(p: &LocalPoly, q: &LocalPoly) -> f64 {
    p.derivative().l2_dot(&q.derivative()) + p.h * p.start_value() * q.start_value()
}

impl BrokenTrace for BrokenPoly {
    fn start_value(&self, _: &Mesh, e: usize) -> f64 {
        self.piece(e).map_or(0.0, |p| p.start_value())
    }

    fn end_value(&self, _: &Mesh, e: usize) -> f64 {
        self.piece(e).map_or(0.0, |p| p.end_value())
    }
}

/// `(τ, v) ∈ L² × H¹(T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub tau: PwPoly,
    pub v: BrokenPoly,
}

impl TestFunction {
    pub fn zeros(space: Arc<PwPolySpace>) -> Self {
        TestFunction {
            tau: PwPoly::zeros(space),
            v: BrokenPoly::zero(),
        }
    }

    pub fn axpy(&mut self, a: f64, other: &TestFunction) {
        self.tau.axpy(a, &other.tau);
        self.v.axpy(a, &other.v);
    }
}

/// `⟨τ, δτ⟩_Γ + Σ_T ⟨v', δv'⟩_T + Σ_T |T| v(x_T) δv(x_T)`.
pub fn v_inner(a: &TestFunction, b: &TestFunction) -> f64 {
    a.tau.l2_dot(&b.tau) + a.v.v_inner(&b.v)
}

/// `b(φ, σ, σ̂; τ, v)`; the rank-one term `⟨φ,1⟩⟨v,1⟩` only on closed curves.
pub fn eval_b(u: &TrialFunction, w: &TestFunction, opts: &QuadOptions) -> f64 {
    let mesh = u.phi.mesh();
    let mut acc = phi_vtau_form(&u.phi, &w.tau, opts);
    if mesh.is_closed() {
        acc += u.phi.integral() * w.v.integral();
    }
    acc += u.sigma.l2_dot(&w.tau);
    for (e, v) in w.v.pieces() {
        acc += u.sigma.local_poly(*e).l2_dot(&v.derivative());
    }
    acc += mesh
        .jump_vector(&w.v)
        .iter()
        .zip(&u.sigma_hat)
        .map(|(j, s)| j * s)
        .sum::<f64>();
    acc
}

/// `(|T| - s/2) s + 1`: the per-element profile of `v` for the φ family on a
/// closed curve, up to the factor `⟨φ_i, 1⟩`.
pub fn mean_profile(h: f64) -> LocalPoly {
    LocalPoly::from_power_series(h, &[1.0, h, -0.5])
}

/// `v` of the node family restricted to the element starting at the node.
pub fn node_profile_after(h: f64) -> LocalPoly {
    LocalPoly::constant(h, 1.0 / h)
}

/// `v` of the node family restricted to the element ending at the node.
pub fn node_profile_before(h: f64) -> LocalPoly {
    LocalPoly::linear(h, -1.0 / h, -1.0)
}

/// Trial-to-test operator for a trial space of piecewise polynomials, with
/// `τ` approximated in the same mesh's space of degrees raised by `delta`.
#[derive(Debug, Clone)]
pub struct Theta {
    layout: TrialLayout,
    test: Arc<PwPolySpace>,
    g: DMatrix<f64>,
    means: Vec<f64>,
}

impl Theta {
    pub fn new(trial: Arc<PwPolySpace>, delta: usize, opts: &QuadOptions) -> Self {
        let test = Arc::new(trial.enriched(delta));
        let g = phi_vtau_matrix(&trial, &test, opts);
        let means = (0..trial.dim())
            .map(|i| {
                let (e, k) = trial.locate(i);
                if k == 0 {
                    trial.mesh().len(e).sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        Theta {
            layout: TrialLayout::new(trial),
            test,
            g,
            means,
        }
    }

    pub fn layout(&self) -> &TrialLayout {
        &self.layout
    }

    pub fn trial_space(&self) -> &Arc<PwPolySpace> {
        self.layout.space()
    }

    pub fn test_space(&self) -> &Arc<PwPolySpace> {
        &self.test
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.layout.mesh()
    }

    /// `G[i, k] = ⟨φ_i, (V b_k)'⟩_Γ` over the enriched space.
    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// `⟨φ_i, 1⟩_Γ` for every trial basis function.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn theta_phi(&self, i: usize) -> TestFunction {
        let tau = PwPoly::from_coeffs(self.test.clone(), self.g.row(i).iter().copied().collect());
        let mesh = self.mesh();
        let c = self.means[i];
        let v = if mesh.is_closed() && c != 0.0 {
            BrokenPoly::from_pieces(
                (0..mesh.num_elements())
                    .map(|e| (e, mean_profile(mesh.len(e)).scaled(c)))
                    .collect(),
            )
        } else {
            BrokenPoly::zero()
        };
        TestFunction { tau, v }
    }

    pub fn theta_sigma(&self, i: usize) -> TestFunction {
        let trial = self.trial_space();
        let (e, k) = trial.locate(i);
        let mut tau = PwPoly::zeros(self.test.clone());
        tau.coeffs[self.test.index(e, k)] = 1.0;
        let v = BrokenPoly::single(e, trial.basis_poly(e, k).antiderivative());
        TestFunction { tau, v }
    }

    pub fn theta_node(&self, j: usize) -> TestFunction {
        let mesh = self.mesh();
        let (before, after) = mesh.elements_at_node(j);
        let mut pieces = Vec::with_capacity(2);
        if let Some(e) = before {
            pieces.push((e, node_profile_before(mesh.len(e))));
        }
        if let Some(e) = after {
            pieces.push((e, node_profile_after(mesh.len(e))));
        }
        TestFunction {
            tau: PwPoly::zeros(self.test.clone()),
            v: BrokenPoly::from_pieces(pieces),
        }
    }

    /// Image of trial basis function `m` of the layout.
    pub fn theta_basis(&self, m: usize) -> TestFunction {
        match self.layout.split(m) {
            TrialIndex::Phi(i) => self.theta_phi(i),
            TrialIndex::Sigma(i) => self.theta_sigma(i),
            TrialIndex::Node(j) => self.theta_node(j),
        }
    }

    pub fn theta(&self, u: &TrialFunction) -> TestFunction {
        let mesh = self.mesh();
        let mut tau = self.g.tr_mul(&nalgebra::DVector::from_column_slice(&u.phi.coeffs));
        for e in 0..mesh.num_elements() {
            let start = self.test.index(e, 0);
            for (k, s) in u.sigma.local(e).iter().enumerate() {
                tau[start + k] += s;
            }
        }
        let c = if mesh.is_closed() { u.phi.integral() } else { 0.0 };
        let mut pieces = Vec::with_capacity(mesh.num_elements());
        for e in 0..mesh.num_elements() {
            let h = mesh.len(e);
            let mut v = mean_profile(h).scaled(c);
            v.axpy(1.0, &u.sigma.local_poly(e).antiderivative());
            let (n0, n1) = mesh.element_nodes(e);
            v.axpy(u.sigma_hat[n0], &node_profile_after(h));
            v.axpy(u.sigma_hat[n1], &node_profile_before(h));
            pieces.push((e, v));
        }
        TestFunction {
            tau: PwPoly::from_coeffs(self.test.clone(), tau.iter().copied().collect()),
            v: BrokenPoly::from_pieces(pieces),
        }
    }
}
