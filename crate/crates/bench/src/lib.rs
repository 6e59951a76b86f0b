//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use hypdpg::problems::{self, Problem};
use hypdpg::PwPolySpace;

/// Uniformly refined interval problem with `n` elements and degree-`p` trial space.
pub fn interval_case(n: usize, p: usize) -> (Problem, Arc<PwPolySpace>) {
    let problem = problems::interval([-1.0, 0.0], [1.0, 0.0], n).expect("valid interval");
    let space = Arc::new(PwPolySpace::uniform(Arc::new(problem.mesh.clone()), p));
    (problem, space)
}

/// Square of side 0.5 with `per_edge` elements on each side.
pub fn square_case(per_edge: usize, p: usize) -> (Problem, Arc<PwPolySpace>) {
    let problem = problems::polygon_harmonic(&problems::square_vertices(0.5), per_edge).expect("valid square");
    let space = Arc::new(PwPolySpace::uniform(Arc::new(problem.mesh.clone()), p));
    (problem, space)
}
