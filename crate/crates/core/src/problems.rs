//! Model problems: right-hand sides and, where known, exact solutions.

use std::sync::Arc;

use crate::dpg::{Load, Reference};
use crate::error::Result;
use crate::mesh::{dist, Mesh, Point};
use crate::polyspace::cached_rule;

/// Initial mesh, load and optional exact solution.
#[derive(Clone)]
pub struct Problem {
    pub mesh: Mesh,
    pub load: Arc<Load>,
    pub reference: Option<Reference>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("mesh", &self.mesh)
            .field("reference", &self.reference.is_some())
            .finish()
    }
}

/// `f = 1/2` on the segment from `a` to `b`, split into `n` elements.
///
/// With `t` the signed distance from the midpoint along the segment and `r`
/// its half-length, `φ = √(r² - t²)` and `σ = Vφ' = -t/2`.
pub fn interval(a: Point, b: Point, n: usize) -> Result<Problem> {
    let mesh = Mesh::interval(a, b, n)?;
    let r = 0.5 * dist(a, b);
    let c = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let dir = [(b[0] - a[0]) / (2.0 * r), (b[1] - a[1]) / (2.0 * r)];
    let coord = move |x: Point| (x[0] - c[0]) * dir[0] + (x[1] - c[1]) * dir[1];
    Ok(Problem {
        mesh,
        load: Arc::new(|_| 0.5),
        reference: Some(Reference {
            phi: Arc::new(move |x| {
                let t = coord(x);
                (r * r - t * t).max(0.0).sqrt()
            }),
            sigma: Arc::new(move |x| -0.5 * coord(x)),
        }),
    })
}

/// First angular harmonic `x₁/|x - c|` about the vertex centroid `c`, shifted
/// to have zero mean on the polygon.
pub fn polygon_harmonic(vertices: &[Point], per_edge: usize) -> Result<Problem> {
    let mesh = Mesh::polygon(vertices, per_edge)?;
    let n = vertices.len() as f64;
    let c = [
        vertices.iter().map(|v| v[0]).sum::<f64>() / n,
        vertices.iter().map(|v| v[1]).sum::<f64>() / n,
    ];
    let raw = move |x: Point| {
        let d = [x[0] - c[0], x[1] - c[1]];
        d[0] / (d[0] * d[0] + d[1] * d[1]).sqrt()
    };
    let rule = cached_rule(40);
    let mut integral = 0.0;
    for e in 0..vertices.len() {
        let (p, q) = (vertices[e], vertices[(e + 1) % vertices.len()]);
        let l = dist(p, q);
        integral += rule.integrate(0.0, l, |s| {
            let t = s / l;
            raw([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])])
        });
    }
    let mean = integral / mesh.total_length();
    Ok(Problem {
        mesh,
        load: Arc::new(move |x| raw(x) - mean),
        reference: None,
    })
}

/// Axis-aligned square of the given side length centred at the origin.
pub fn square_vertices(side: f64) -> Vec<Point> {
    let a = 0.5 * side;
    vec![[-a, -a], [a, -a], [a, a], [-a, a]]
}
