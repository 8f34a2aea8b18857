//! Riemann-sphere primitives: multi-ratios, Moebius maps, circles and inversion.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default relative tolerance for geometric residuals.
pub const TAU: f64 = 1e-9;

/// Dead zone of the orientation predicate, relative to the squared edge scale.
pub const ORIENTATION_DEAD_ZONE: f64 = 1e-12;

/// A point of the extended complex plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExtComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtComplex {
    pub fn new(re: f64, im: f64) -> Self {
        ExtComplex::Finite(Complex64::new(re, im))
    }

    pub fn finite(&self) -> Option<Complex64> {
        match self {
            ExtComplex::Finite(z) => Some(*z),
            ExtComplex::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtComplex::Infinity)
    }

    /// `1/z` with `1/0 = inf` and `1/inf = 0`.
    pub fn recip(&self) -> Self {
        match self {
            ExtComplex::Infinity => ExtComplex::Finite(Complex64::new(0.0, 0.0)),
            ExtComplex::Finite(z) if *z == Complex64::new(0.0, 0.0) => ExtComplex::Infinity,
            ExtComplex::Finite(z) => ExtComplex::Finite(z.inv()),
        }
    }

    /// Distance between two points, infinite if exactly one is `inf`.
    pub fn dist(&self, other: &ExtComplex) -> f64 {
        match (self, other) {
            (ExtComplex::Finite(a), ExtComplex::Finite(b)) => (a - b).norm(),
            (ExtComplex::Infinity, ExtComplex::Infinity) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

impl From<Complex64> for ExtComplex {
    fn from(z: Complex64) -> Self {
        ExtComplex::Finite(z)
    }
}

impl From<f64> for ExtComplex {
    fn from(x: f64) -> Self {
        ExtComplex::Finite(Complex64::new(x, 0.0))
    }
}

/// `prod (w_{2j-1} - w_{2j}) / prod (w_{2j} - w_{2j+1})`, indices cyclic.
///
/// An infinite argument drops its two factors and contributes a sign `-1`.
pub fn multi_ratio(points: &[ExtComplex]) -> Result<ExtComplex> {
    let n = points.len();
    if n < 4 || n % 2 != 0 {
        return Err(Error::BadPointCount(n));
    }
    let mut num = Complex64::new(1.0, 0.0);
    let mut den = Complex64::new(1.0, 0.0);
    let mut sign = 1.0;
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        let factor = match (a, b) {
            (ExtComplex::Finite(a), ExtComplex::Finite(b)) => a - b,
            (ExtComplex::Infinity, ExtComplex::Infinity) => return Err(Error::IndeterminateRatio),
            _ => continue,
        };
        if i % 2 == 0 {
            num *= factor;
        } else {
            den *= factor;
        }
    }
    for p in points {
        if p.is_infinite() {
            sign = -sign;
        }
    }
    let zero = Complex64::new(0.0, 0.0);
    match (num == zero, den == zero) {
        (true, true) => Err(Error::IndeterminateRatio),
        (false, true) => Ok(ExtComplex::Infinity),
        _ => Ok(ExtComplex::Finite(num / den * sign)),
    }
}

/// `z -> (a z + b) / (c z + d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        if a * d - b * c == Complex64::new(0.0, 0.0) {
            return Err(Error::DegenerateMap);
        }
        Ok(Mobius { a, b, c, d })
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Mobius { a: o, b: z, c: z, d: o }
    }

    pub fn apply(&self, z: ExtComplex) -> ExtComplex {
        let zero = Complex64::new(0.0, 0.0);
        match z {
            ExtComplex::Infinity => {
                if self.c == zero {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::Finite(self.a / self.c)
                }
            }
            ExtComplex::Finite(z) => {
                let den = self.c * z + self.d;
                if den == zero {
                    ExtComplex::Infinity
                } else {
                    ExtComplex::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    pub fn inverse(&self) -> Self {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `self o other`.
    pub fn compose(&self, other: &Mobius) -> Self {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// Image of a circle, taken through three of its points.
    pub fn apply_circle(&self, circle: &Circle) -> Result<Circle> {
        let [p, q, r] = circle.sample_points();
        circle_through(self.apply(p), self.apply(q), self.apply(r))
    }
}

pub fn mobius_apply(map: &Mobius, z: ExtComplex) -> ExtComplex {
    map.apply(z)
}

/// A circle on the sphere: a proper circle or a line (a circle through `inf`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Circle {
    Proper { center: Complex64, radius: f64 },
    Line { point: Complex64, direction: Complex64 },
}

impl Circle {
    /// Distance from `p` to the circle; zero for `inf` on a line.
    pub fn distance(&self, p: ExtComplex) -> f64 {
        match (self, p) {
            (Circle::Proper { .. }, ExtComplex::Infinity) => f64::INFINITY,
            (Circle::Line { .. }, ExtComplex::Infinity) => 0.0,
            (Circle::Proper { center, radius }, ExtComplex::Finite(z)) => ((z - center).norm() - radius).abs(),
            (Circle::Line { point, direction }, ExtComplex::Finite(z)) => ((z - point) * direction.conj()).im.abs(),
        }
    }

    /// Three distinct points on the circle.
    pub fn sample_points(&self) -> [ExtComplex; 3] {
        match *self {
            Circle::Proper { center, radius } => [
                (center + radius).into(),
                (center + Complex64::new(0.0, radius)).into(),
                (center - radius).into(),
            ],
            Circle::Line { point, direction } => [point.into(), (point + direction).into(), ExtComplex::Infinity],
        }
    }
}

/// The unique circle through three distinct points; collinear triples give a line.
pub fn circle_through(a: ExtComplex, b: ExtComplex, c: ExtComplex) -> Result<Circle> {
    if a == b || b == c || a == c {
        return Err(Error::DuplicatePoints);
    }
    let pts: Vec<Complex64> = [a, b, c].iter().filter_map(|p| p.finite()).collect();
    if pts.len() < 2 {
        return Err(Error::DuplicatePoints);
    }
    if pts.len() == 2 {
        return Ok(line_through(pts[0], pts[1]));
    }
    let (a, b, c) = (pts[0], pts[1], pts[2]);
    let (bb, cc) = (b - a, c - a);
    let d = 2.0 * (bb.re * cc.im - bb.im * cc.re);
    if d.abs() <= 1e-13 * bb.norm() * cc.norm() {
        return Ok(line_through(a, b));
    }
    let (nb, nc) = (bb.norm_sqr(), cc.norm_sqr());
    let center = a + Complex64::new((cc.im * nb - bb.im * nc) / d, (bb.re * nc - cc.re * nb) / d);
    Ok(Circle::Proper { center, radius: (center - a).norm() })
}

fn line_through(a: Complex64, b: Complex64) -> Circle {
    let d = b - a;
    Circle::Line { point: a, direction: d / d.norm() }
}

/// Inversion in a proper circle, mirror reflection in a line.
pub fn reflect_in_circle(p: ExtComplex, circle: &Circle) -> ExtComplex {
    match (*circle, p) {
        (Circle::Proper { center, .. }, ExtComplex::Infinity) => center.into(),
        (Circle::Proper { center, radius }, ExtComplex::Finite(z)) => {
            let d = z - center;
            if d == Complex64::new(0.0, 0.0) {
                ExtComplex::Infinity
            } else {
                (center + radius * radius / d.conj()).into()
            }
        }
        (Circle::Line { .. }, ExtComplex::Infinity) => ExtComplex::Infinity,
        (Circle::Line { point, direction }, ExtComplex::Finite(z)) => {
            (point + direction * direction * (z - point).conj()).into()
        }
    }
}

/// Given one common point `p` of two intersecting circles, the other one.
pub fn second_intersection(c1: &Circle, c2: &Circle, p: ExtComplex) -> ExtComplex {
    match (*c1, *c2) {
        (Circle::Proper { center: a, .. }, Circle::Proper { center: b, .. }) => {
            if a == b {
                return p;
            }
            reflect_in_circle(p, &line_through(a, b))
        }
        (Circle::Line { direction, .. }, Circle::Proper { center, .. })
        | (Circle::Proper { center, .. }, Circle::Line { direction, .. }) => {
            let axis = Circle::Line { point: center, direction: direction * Complex64::i() };
            reflect_in_circle(p, &axis)
        }
        (Circle::Line { point: p1, direction: d1 }, Circle::Line { point: p2, direction: d2 }) => {
            if !p.is_infinite() {
                return ExtComplex::Infinity;
            }
            let cross = (d1.conj() * d2).im;
            if cross == 0.0 {
                return ExtComplex::Infinity;
            }
            let s = (d1.conj() * (p1 - p2)).im / cross;
            (p2 + d2 * s).into()
        }
    }
}

/// Mean distance from `center` and the largest deviation from it.
pub fn fit_circle_with_center(points: &[Complex64], center: Complex64) -> (f64, f64) {
    if points.is_empty() {
        return (0.0, 0.0);
    }
    let dists: Vec<f64> = points.iter().map(|p| (p - center).norm()).collect();
    let radius = dists.iter().sum::<f64>() / dists.len() as f64;
    let dev = dists.iter().map(|d| (d - radius).abs()).fold(0.0, f64::max);
    (radius, dev)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Positive,
    Negative,
    Inconclusive,
}

/// Sign of the signed area of `(a, b, c)` with a relative dead zone.
pub fn orientation(a: Complex64, b: Complex64, c: Complex64) -> Orientation {
    let (u, v) = (b - a, c - a);
    let det = u.re * v.im - u.im * v.re;
    let scale = u.norm_sqr().max(v.norm_sqr()).max((c - b).norm_sqr());
    if det.abs() <= ORIENTATION_DEAD_ZONE * scale {
        Orientation::Inconclusive
    } else if det > 0.0 {
        Orientation::Positive
    } else {
        Orientation::Negative
    }
}
