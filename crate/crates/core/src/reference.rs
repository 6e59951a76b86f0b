//! Conforming Galerkin discretisation of `⟨Wφ, ψ⟩ = ⟨f, ψ⟩` through
//! `⟨Wφ, ψ⟩ = ⟨ψ', Vφ'⟩`, used as an independent check of the DPG solver.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dpg::{spd_solve, Load, LoadMoments};
use crate::error::{Error, Result};
use crate::layerpot::{galerkin_v_matrix, QuadOptions};
use crate::mesh::Mesh;
use crate::polyspace::{LocalPoly, PwPoly, PwPolySpace};

/// Continuous piecewise polynomials of degree `q ≥ 1`: hat functions at the
/// nodes (interior nodes only on an open curve) followed by integrated
/// Legendre bubbles `∫ b_{k-1}`, `k = 2..=q`, on each element.
#[derive(Debug, Clone)]
pub struct ConformingSpace {
    mesh: Arc<Mesh>,
    degree: usize,
    hats: Vec<Option<usize>>,
    num_hats: usize,
}

impl ConformingSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Self {
        assert!(degree >= 1, "conforming space needs degree at least 1");
        let n = mesh.num_nodes();
        let closed = mesh.is_closed();
        let mut next = 0;
        let hats = (0..n)
            .map(|j| {
                if closed || (j != 0 && j + 1 != n) {
                    next += 1;
                    Some(next - 1)
                } else {
                    None
                }
            })
            .collect();
        ConformingSpace {
            mesh,
            degree,
            hats,
            num_hats: next,
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.num_hats + self.mesh.num_elements() * (self.degree - 1)
    }

    fn bubble(&self, e: usize, k: usize) -> usize {
        self.num_hats + e * (self.degree - 1) + (k - 2)
    }

    /// `(global index, restriction)` of every basis function living on `e`.
    pub fn local_basis(&self, e: usize) -> Vec<(usize, LocalPoly)> {
        let h = self.mesh.len(e);
        let (n0, n1) = self.mesh.element_nodes(e);
        let mut out = Vec::with_capacity(self.degree + 1);
        if let Some(i) = self.hats[n0] {
            out.push((i, LocalPoly::linear(h, 1.0, -1.0 / h)));
        }
        if let Some(i) = self.hats[n1] {
            out.push((i, LocalPoly::linear(h, 0.0, 1.0 / h)));
        }
        for k in 2..=self.degree {
            out.push((self.bubble(e, k), LocalPoly::legendre(h, k - 1).antiderivative()));
        }
        out
    }

    /// Derivative map into the discontinuous space of degree `q - 1`.
    fn derivative_matrix(&self, target: &PwPolySpace) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(target.dim(), self.dim());
        for e in 0..self.mesh.num_elements() {
            for (i, poly) in self.local_basis(e) {
                let dp = poly.derivative();
                let h = poly.h;
                for (k, a) in dp.coeffs.iter().enumerate() {
                    d[(target.index(e, k), i)] += a * (h / (2 * k + 1) as f64).sqrt();
                }
            }
        }
        d
    }

    /// Discontinuous representation of `Σ x_i ψ_i`.
    pub fn to_pw_poly(&self, x: &[f64]) -> PwPoly {
        let space = Arc::new(PwPolySpace::uniform(self.mesh.clone(), self.degree));
        let mut out = PwPoly::zeros(space);
        for e in 0..self.mesh.num_elements() {
            let mut local = LocalPoly::zero(self.mesh.len(e));
            for (i, poly) in self.local_basis(e) {
                local.axpy(x[i], &poly);
            }
            out.set_local(e, &local);
        }
        out
    }
}

/// Galerkin solution with its stiffness matrix.
#[derive(Debug, Clone)]
pub struct GalerkinSolution {
    pub space: ConformingSpace,
    pub coeffs: Vec<f64>,
    pub phi: PwPoly,
    pub stiffness: DMatrix<f64>,
    /// `⟨φ_h', V φ_h'⟩`.
    pub energy: f64,
}

/// Stiffness matrix `⟨ψ_i', V ψ_j'⟩` of the conforming space.
pub fn stiffness(space: &ConformingSpace, opts: &QuadOptions) -> DMatrix<f64> {
    let dspace = PwPolySpace::uniform(space.mesh.clone(), space.degree - 1);
    let v = galerkin_v_matrix(&dspace, opts);
    let d = space.derivative_matrix(&dspace);
    let s = d.transpose() * v * &d;
    0.5 * (&s + s.transpose())
}

/// Solves the conforming Galerkin problem of degree `q`; on a closed curve the
/// solution is normalised to zero mean by a bordered system.
pub fn solve_reference(mesh: Arc<Mesh>, q: usize, f: &Load, opts: &QuadOptions) -> Result<GalerkinSolution> {
    let space = ConformingSpace::new(mesh.clone(), q);
    let s = stiffness(&space, opts);
    let n = space.dim();
    let loads = LoadMoments::new(&mesh, f, q, 8);
    let mut rhs = DVector::zeros(n);
    let mut mean = DVector::zeros(n);
    for e in 0..mesh.num_elements() {
        for (i, poly) in space.local_basis(e) {
            rhs[i] += loads.dot(e, &poly);
            mean[i] += poly.integral();
        }
    }
    let x = if mesh.is_closed() {
        let mut big = DMatrix::zeros(n + 1, n + 1);
        big.view_mut((0, 0), (n, n)).copy_from(&s);
        for i in 0..n {
            big[(i, n)] = mean[i];
            big[(n, i)] = mean[i];
        }
        let mut b = DVector::zeros(n + 1);
        b.rows_mut(0, n).copy_from(&rhs);
        let sol = big
            .lu()
            .solve(&b)
            .ok_or(Error::Singular { what: "bordered Galerkin" })?;
        sol.rows(0, n).into_owned()
    } else {
        spd_solve(&s, &rhs, "Galerkin stiffness")?
    };
    let energy = x.dot(&(&s * &x));
    let phi = space.to_pw_poly(x.as_slice());
    Ok(GalerkinSolution {
        coeffs: x.iter().copied().collect(),
        space,
        phi,
        stiffness: s,
        energy,
    })
}
