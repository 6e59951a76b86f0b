//! Straight-element meshes of an open interval or a closed polygon.
//!
//! Elements are numbered along the positive orientation of the curve. Element
//! `e` runs from node `e` to node `e + 1` (wrapping to node 0 on closed
//! curves), so on a closed curve the node count equals the element count and
//! on an open curve there is one node more than elements.

use crate::error::{Error, Result};

pub type Point = [f64; 2];

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Distance from `x` to the segment `[a, b]`.
pub(crate) fn point_segment_dist(x: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let ax = sub(x, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ax[0] * ab[0] + ax[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(x, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// Distance between two segments that do not cross.
pub(crate) fn segment_segment_dist(a0: Point, a1: Point, b0: Point, b1: Point) -> f64 {
    point_segment_dist(a0, b0, b1)
        .min(point_segment_dist(a1, b0, b1))
        .min(point_segment_dist(b0, a0, a1))
        .min(point_segment_dist(b1, a0, a1))
}

fn segments_intersect(p0: Point, p1: Point, q0: Point, q1: Point) -> bool {
    let d1 = cross(sub(q1, q0), sub(p0, q0));
    let d2 = cross(sub(q1, q0), sub(p1, q0));
    let d3 = cross(sub(p1, p0), sub(q0, p0));
    let d4 = cross(sub(p1, p0), sub(q1, p0));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    // collinear overlaps and touching
    d1 == 0.0 && point_segment_dist(p0, q0, q1) == 0.0
        || d2 == 0.0 && point_segment_dist(p1, q0, q1) == 0.0
        || d3 == 0.0 && point_segment_dist(q0, p0, p1) == 0.0
        || d4 == 0.0 && point_segment_dist(q1, p0, p1) == 0.0
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    OpenInterval { a: Point, b: Point },
    ClosedPolygon { vertices: Vec<Point> },
}

/// A straight element of the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub start: Point,
    pub end: Point,
    pub length: f64,
    pub start_node: usize,
    pub end_node: usize,
}

impl Element {
    /// Point at arclength `s` measured from the start node.
    pub fn point_at(&self, s: f64) -> Point {
        let t = s / self.length;
        [
            self.start[0] + t * (self.end[0] - self.start[0]),
            self.start[1] + t * (self.end[1] - self.start[1]),
        ]
    }

    pub fn midpoint(&self) -> Point {
        self.point_at(0.5 * self.length)
    }
}

/// Values of a broken (elementwise) function at element start and end points.
pub trait BrokenTrace {
    fn start_value(&self, mesh: &Mesh, e: usize) -> f64;
    fn end_value(&self, mesh: &Mesh, e: usize) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    kind: CurveKind,
    nodes: Vec<Point>,
    lengths: Vec<f64>,
}

impl Mesh {
    /// Uniform mesh of the segment from `a` to `b` with `n` elements.
    pub fn interval(a: Point, b: Point, n: usize) -> Result<Mesh> {
        if n == 0 {
            return Err(Error::NoElements);
        }
        let chord = dist(a, b);
        if chord == 0.0 {
            return Err(Error::DegenerateCurve);
        }
        // capacity of a segment is a quarter of its length
        if chord / 4.0 >= 1.0 {
            return Err(Error::CapacityViolation { radius: chord / 4.0 });
        }
        let nodes = (0..=n)
            .map(|j| {
                let t = j as f64 / n as f64;
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
            })
            .collect();
        Ok(Mesh::from_nodes(CurveKind::OpenInterval { a, b }, nodes))
    }

    /// Closed polygon with every edge split into `per_edge` equal elements.
    pub fn polygon(vertices: &[Point], per_edge: usize) -> Result<Mesh> {
        if per_edge == 0 {
            return Err(Error::NoElements);
        }
        let m = vertices.len();
        if m < 3 {
            return Err(Error::TooFewVertices(m));
        }
        for i in 0..m {
            if dist(vertices[i], vertices[(i + 1) % m]) == 0.0 {
                return Err(Error::DegenerateCurve);
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                let adjacent = j == i + 1 || (i == 0 && j == m - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(
                    vertices[i],
                    vertices[(i + 1) % m],
                    vertices[j],
                    vertices[(j + 1) % m],
                ) {
                    return Err(Error::SelfIntersecting(i, j));
                }
            }
        }
        let area2: f64 = (0..m)
            .map(|i| cross(vertices[i], vertices[(i + 1) % m]))
            .sum();
        if area2 <= 0.0 {
            return Err(Error::NegativeOrientation(0.5 * area2));
        }
        let radius = enclosing_radius(vertices);
        if radius >= 1.0 {
            return Err(Error::CapacityViolation { radius });
        }
        let mut nodes = Vec::with_capacity(m * per_edge);
        for i in 0..m {
            let (p, q) = (vertices[i], vertices[(i + 1) % m]);
            for k in 0..per_edge {
                let t = k as f64 / per_edge as f64;
                nodes.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        Ok(Mesh::from_nodes(
            CurveKind::ClosedPolygon {
                vertices: vertices.to_vec(),
            },
            nodes,
        ))
    }

    fn from_nodes(kind: CurveKind, nodes: Vec<Point>) -> Mesh {
        let n = nodes.len();
        let ne = match kind {
            CurveKind::OpenInterval { .. } => n - 1,
            CurveKind::ClosedPolygon { .. } => n,
        };
        let lengths = (0..ne).map(|e| dist(nodes[e], nodes[(e + 1) % n])).collect();
        Mesh {
            kind,
            nodes,
            lengths,
        }
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.kind, CurveKind::ClosedPolygon { .. })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.lengths.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> Point {
        self.nodes[j]
    }

    pub fn len(&self, e: usize) -> f64 {
        self.lengths[e]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn element(&self, e: usize) -> Element {
        let (start_node, end_node) = self.element_nodes(e);
        Element {
            start: self.nodes[start_node],
            end: self.nodes[end_node],
            length: self.lengths[e],
            start_node,
            end_node,
        }
    }

    pub fn element_nodes(&self, e: usize) -> (usize, usize) {
        (e, (e + 1) % self.nodes.len())
    }

    /// Elements `(T_{j-1}, T_j)` ending and starting at node `j`.
    pub fn elements_at_node(&self, j: usize) -> (Option<usize>, Option<usize>) {
        let ne = self.num_elements();
        if self.is_closed() {
            (Some((j + ne - 1) % ne), Some(j))
        } else {
            let before = if j == 0 { None } else { Some(j - 1) };
            let after = if j == ne { None } else { Some(j) };
            (before, after)
        }
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn h_min(&self) -> f64 {
        self.lengths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        self.lengths.iter().copied().fold(0.0, f64::max)
    }

    /// Halves every marked element. Node 0 stays node 0.
    pub fn refine_halve(&self, marked: &[usize]) -> Result<Mesh> {
        let ne = self.num_elements();
        let mut flag = vec![false; ne];
        for &e in marked {
            if e >= ne {
                return Err(Error::InvalidElement {
                    index: e,
                    count: ne,
                });
            }
            flag[e] = true;
        }
        let mut nodes = Vec::with_capacity(self.nodes.len() + marked.len());
        for (e, &split) in flag.iter().enumerate() {
            let el = self.element(e);
            nodes.push(el.start);
            if split {
                nodes.push(el.midpoint());
            }
        }
        if !self.is_closed() {
            nodes.push(*self.nodes.last().unwrap());
        }
        Ok(Mesh::from_nodes(self.kind.clone(), nodes))
    }

    pub fn refine_uniform(&self) -> Mesh {
        let all: Vec<usize> = (0..self.num_elements()).collect();
        self.refine_halve(&all).expect("indices in range")
    }

    /// Jumps `[[v]]_j = v|_{T_j}(x_j) - v|_{T_{j-1}}(x_j)`; on an open curve
    /// the endpoint entries are `v(x_1)` and `-v(x_N)`.
    pub fn jump_vector<V: BrokenTrace + ?Sized>(&self, v: &V) -> Vec<f64> {
        (0..self.num_nodes())
            .map(|j| {
                let (before, after) = self.elements_at_node(j);
                let plus = after.map_or(0.0, |e| v.start_value(self, e));
                let minus = before.map_or(0.0, |e| v.end_value(self, e));
                plus - minus
            })
            .collect()
    }
}

/// Radius of the disk centred at the bounding-box centre that encloses all points.
fn enclosing_radius(points: &[Point]) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    points.iter().map(|&p| dist(p, c)).fold(0.0, f64::max)
}
