//! The regular triangular lattice and its three hexagonal sublattices.
//!
//! A vertex is `k + l*omega + m*omega^2` with `omega = exp(2 pi i / 3)`.
//! Triples differing by `(n, n, n)` name the same point, so points are
//! stored in the canonical form `m = 0`.
//!
//! Directions are the six unit steps `eps^t`, `eps = exp(i pi / 3)`:
//!
//! | t | step        | (dk, dl) | positive |
//! |---|-------------|----------|----------|
//! | 0 | `1`         | (1, 0)   | yes      |
//! | 1 | `1 + omega` | (1, 1)   | no       |
//! | 2 | `omega`     | (0, 1)   | yes      |
//! | 3 | `-1`        | (-1, 0)  | no       |
//! | 4 | `omega^2`   | (-1, -1) | yes      |
//! | 5 | `-omega`    | (0, -1)  | no       |

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// `omega = exp(2 pi i / 3)`.
pub fn omega() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

/// `eps = exp(i pi / 3) = 1 + omega`.
pub fn eps() -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::PI / 3.0)
}

/// Lattice steps `eps^t` in `(dk, dl)` coordinates, indexed by `t`.
pub const STEPS: [(i64, i64); 6] = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)];

/// A lattice point in canonical form (`m = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub k: i64,
    pub l: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { k: 0, l: 0 };

    pub const fn new(k: i64, l: i64) -> Self {
        LatticePoint { k, l }
    }

    /// Always zero for the canonical representative.
    pub const fn m(&self) -> i64 {
        0
    }

    pub fn embed(&self) -> Complex64 {
        embed(*self)
    }

    pub fn sublattice_index(&self) -> u8 {
        sublattice_index(*self)
    }

    /// `self + eps^t`.
    pub fn step(&self, t: usize) -> LatticePoint {
        let (dk, dl) = STEPS[t % 6];
        LatticePoint::new(self.k + dk, self.l + dl)
    }

    pub fn offset(&self, dk: i64, dl: i64) -> LatticePoint {
        LatticePoint::new(self.k + dk, self.l + dl)
    }

    /// The direction index `t` with `other = self + eps^t`, if adjacent.
    pub fn direction_to(&self, other: &LatticePoint) -> Option<usize> {
        let d = (other.k - self.k, other.l - self.l);
        STEPS.iter().position(|s| *s == d)
    }

    /// The representative `(k + n, l + n, n)` of this class.
    pub fn representative(&self, n: i64) -> Triple {
        Triple { k: self.k + n, l: self.l + n, m: n }
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.k, self.l)
    }
}

/// A raw triple `(k, l, m)`; the lift of a point to the cover `Z^3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub k: i64,
    pub l: i64,
    pub m: i64,
}

impl Triple {
    pub const fn new(k: i64, l: i64, m: i64) -> Self {
        Triple { k, l, m }
    }

    pub fn canonical(&self) -> LatticePoint {
        canonicalize(self.k, self.l, self.m)
    }

    pub fn shifted(&self, n: i64) -> Triple {
        Triple::new(self.k + n, self.l + n, self.m + n)
    }
}

pub fn canonicalize(k: i64, l: i64, m: i64) -> LatticePoint {
    LatticePoint::new(k - m, l - m)
}

pub fn embed(p: LatticePoint) -> Complex64 {
    Complex64::new(p.k as f64, 0.0) + omega() * p.l as f64
}

/// `(k + l + m) mod 3`; the point is a hexagon center of sublattice `j` iff this is `j`.
pub fn sublattice_index(p: LatticePoint) -> u8 {
    (p.k + p.l).rem_euclid(3) as u8
}

/// An edge `tail -> head = tail + eps^direction`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OrientedEdge {
    pub tail: LatticePoint,
    pub head: LatticePoint,
    pub direction: usize,
}

impl OrientedEdge {
    pub fn new(tail: LatticePoint, direction: usize) -> Self {
        OrientedEdge { tail, head: tail.step(direction), direction: direction % 6 }
    }

    pub fn between(tail: LatticePoint, head: LatticePoint) -> Option<Self> {
        tail.direction_to(&head).map(|t| OrientedEdge::new(tail, t))
    }

    /// Steps `+1`, `+omega`, `+omega^2` are positive.
    pub fn is_positive(&self) -> bool {
        self.direction % 2 == 0
    }

    pub fn reversed(&self) -> Self {
        OrientedEdge::new(self.head, self.direction + 3)
    }

    /// The same undirected edge with positive orientation, and whether it was flipped.
    pub fn positive(&self) -> (Self, bool) {
        if self.is_positive() {
            (*self, false)
        } else {
            (self.reversed(), true)
        }
    }
}

/// The six neighbors of a hexagon center `z'`, listed as `z' + eps^k`, `k = 1..6`.
///
/// `vertices[i]` is `center + eps^(i+1)`, so the list starts at `z' + 1 + omega`
/// and ends at `z' + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HexStar {
    pub center: LatticePoint,
    pub vertices: [LatticePoint; 6],
}

impl HexStar {
    /// Spoke `t` joins the center and `center + eps^t`, oriented positively:
    /// outgoing for even `t` (labels 0, 2, 4), incoming for odd `t`
    /// (label 1 from `z - omega^2`, 3 from `z - 1`, 5 from `z - omega`).
    pub fn spoke(&self, t: usize) -> OrientedEdge {
        star_edge(self.center, t)
    }
}

pub fn hex_star(center: LatticePoint) -> HexStar {
    let mut vertices = [center; 6];
    for (i, v) in vertices.iter_mut().enumerate() {
        *v = center.step(i + 1);
    }
    HexStar { center, vertices }
}

/// Positively oriented star edge with label `t` at `z`.
pub fn star_edge(z: LatticePoint, t: usize) -> OrientedEdge {
    let t = t % 6;
    if t % 2 == 0 {
        OrientedEdge::new(z, t)
    } else {
        OrientedEdge::new(z.step(t), t + 3)
    }
}

/// An elementary triangle listed along its cycle of positive edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle(pub [LatticePoint; 3]);

impl Triangle {
    /// `(p, p + 1, p + 1 + omega)`: steps `+1, +omega, +omega^2`; counterclockwise.
    pub fn up(p: LatticePoint) -> Self {
        Triangle([p, p.offset(1, 0), p.offset(1, 1)])
    }

    /// `(p, p + 1, p - omega)`: steps `+1, +omega^2, +omega`; clockwise.
    pub fn down(p: LatticePoint) -> Self {
        Triangle([p, p.offset(1, 0), p.offset(0, -1)])
    }

    pub fn is_counterclockwise(&self) -> bool {
        self.0[2] == self.0[0].offset(1, 1)
    }

    /// Vertices in counterclockwise order.
    pub fn ccw(&self) -> [LatticePoint; 3] {
        if self.is_counterclockwise() {
            self.0
        } else {
            [self.0[0], self.0[2], self.0[1]]
        }
    }

    pub fn edges(&self) -> [OrientedEdge; 3] {
        let v = self.0;
        [0, 1, 2].map(|i| OrientedEdge::between(v[i], v[(i + 1) % 3]).expect("adjacent vertices"))
    }
}

/// The two triangles of the rhombus with lower-left corner `(k, l)`.
pub fn cell_triangles(k: i64, l: i64) -> [Triangle; 2] {
    [Triangle::up(LatticePoint::new(k, l)), Triangle::down(LatticePoint::new(k, l + 1))]
}

/// Points `k + l omega` with `0 <= k, l <= n`.
pub fn sector_points(n: usize) -> Vec<LatticePoint> {
    let n = n as i64;
    (0..=n).flat_map(|k| (0..=n).map(move |l| LatticePoint::new(k, l))).collect()
}
