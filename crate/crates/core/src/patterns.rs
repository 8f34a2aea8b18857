//! Hexagonal circle patterns: generation from the constrained system, central
//! extension, row-by-row circle construction, full-plane assembly and checks.

use crate::error::{Error, Result};
use crate::fgh::{extend_third_field, fill_sector, hexagon_values, verify_mr, FieldTag, MrReport, VertexField};
use crate::geometry::{
    circle_through, fit_circle_with_center, orientation, reflect_in_circle, second_intersection, Circle, ExtComplex,
    Orientation, ORIENTATION_DEAD_ZONE,
};
use crate::isomonodromic::{closed_form_axis_limits, solve_constrained_sector, ConstraintParams, LimitCase, ALPHA_EPS};
use crate::lattice::{hex_star, sector_points, LatticePoint, Triangle, STEPS};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

/// Largest accepted distance of a hexagon vertex from its circle, relative to `max(1, radius)`.
pub const CIRCULARITY_TOL: f64 = 1e-8;

/// Largest denominator accepted by [`assemble_full_plane`].
pub const MAX_DENOMINATOR: u64 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Zalpha,
    Z32Log,
    LogZ3,
}

impl PatternKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PatternKind::Zalpha => "zalpha",
            PatternKind::Z32Log => "z32log",
            PatternKind::LogZ3 => "logz3",
        }
    }
}

impl std::str::FromStr for PatternKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zalpha" => Ok(PatternKind::Zalpha),
            "z32log" => Ok(PatternKind::Z32Log),
            "logz3" => Ok(PatternKind::LogZ3),
            _ => Err(format!("unknown pattern `{s}` (expected zalpha, z32log or logz3)")),
        }
    }
}

/// Circles of one field on the hexagons centered at sublattice `sublattice`.
#[derive(Clone, Debug, PartialEq)]
pub struct CirclePattern {
    pub sublattice: u8,
    pub tag: FieldTag,
    pub circles: BTreeMap<LatticePoint, Circle>,
    /// Largest distance of a hexagon vertex from the stored circle.
    pub deviations: BTreeMap<LatticePoint, f64>,
    /// Complete hexagons left without a circle (an infinite vertex or center).
    pub excluded: Vec<LatticePoint>,
    /// The field restricted to the vertices of the hexagonal sublattice.
    pub points: VertexField,
}

impl CirclePattern {
    fn empty(field: &VertexField, sublattice: u8) -> Self {
        let mut points = VertexField::new(field.tag);
        for p in field.points() {
            if p.sublattice_index() != sublattice {
                if let Some(z) = field.get(p) {
                    points.set(p, z);
                }
            }
        }
        CirclePattern { sublattice, tag: field.tag, circles: BTreeMap::new(), deviations: BTreeMap::new(), excluded: vec![], points }
    }

    /// Circles centered at the field values of the hexagon centers, radius the mean distance.
    pub fn with_centers(field: &VertexField) -> Self {
        let j = field.tag.center_index();
        let mut pat = Self::empty(field, j);
        for p in field.points().filter(|p| p.sublattice_index() == j) {
            let Some(vals) = hexagon_values(field, p) else { continue };
            let finite: Option<Vec<Complex64>> = vals.iter().map(|z| z.finite()).collect();
            match (finite, field.finite(p)) {
                (Some(pts), Some(center)) => {
                    let (radius, dev) = fit_circle_with_center(&pts, center);
                    pat.circles.insert(p, Circle::Proper { center, radius });
                    pat.deviations.insert(p, dev);
                }
                _ => pat.excluded.push(p),
            }
        }
        pat
    }

    /// Circles through alternate vertices of each complete hexagon of sublattice `j`.
    pub fn through_vertices(field: &VertexField, j: u8) -> Self {
        let mut pat = Self::empty(field, j);
        let centers: Vec<LatticePoint> = field.points().filter(|p| p.sublattice_index() == j).collect();
        let mut candidates: BTreeSet<LatticePoint> = centers.into_iter().collect();
        for p in field.points() {
            for (dk, dl) in STEPS {
                let q = p.offset(dk, dl);
                if q.sublattice_index() == j {
                    candidates.insert(q);
                }
            }
        }
        for p in candidates {
            let Some(vals) = hexagon_values(field, p) else { continue };
            match circle_through(vals[0], vals[2], vals[4]) {
                Ok(c) => {
                    let dev = vals.iter().map(|z| c.distance(*z)).fold(0.0, f64::max);
                    pat.circles.insert(p, c);
                    pat.deviations.insert(p, dev);
                }
                Err(_) => pat.excluded.push(p),
            }
        }
        pat
    }

    /// Worst relative deviation and its hexagon center.
    pub fn worst_deviation(&self) -> Option<(LatticePoint, f64)> {
        self.deviations
            .iter()
            .map(|(p, d)| (*p, d / radius_scale(&self.circles[p])))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Rotation and translation `z -> a z + b` of all points and circles.
    pub fn transformed(&self, a: Complex64, b: Complex64) -> Self {
        let mut out = self.clone();
        out.points = self.points.affine(a, b);
        for c in out.circles.values_mut() {
            *c = match *c {
                Circle::Proper { center, radius } => Circle::Proper { center: a * center + b, radius: radius * a.norm() },
                Circle::Line { point, direction } => Circle::Line { point: a * point + b, direction: direction * a / a.norm() },
            };
        }
        out
    }
}

fn radius_scale(c: &Circle) -> f64 {
    match c {
        Circle::Proper { radius, .. } => radius.max(1.0),
        Circle::Line { .. } => 1.0,
    }
}

/// A generated solution with its three circle patterns.
#[derive(Clone, Debug)]
pub struct GeneratedPattern {
    pub kind: PatternKind,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub n: usize,
    pub u: VertexField,
    pub v: VertexField,
    pub w: VertexField,
    /// Circle patterns of `u`, `v`, `w` in this order.
    pub patterns: [CirclePattern; 3],
}

impl GeneratedPattern {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kind: PatternKind,
        alpha: f64,
        theta: f64,
        n: usize,
        u: VertexField,
        v: VertexField,
        w: VertexField,
        enforce: bool,
    ) -> Result<Self> {
        let patterns = [CirclePattern::with_centers(&u), CirclePattern::with_centers(&v), CirclePattern::with_centers(&w)];
        for pat in patterns.iter().filter(|_| enforce) {
            if let Some((at, deviation)) = pat.worst_deviation() {
                if deviation > CIRCULARITY_TOL {
                    return Err(Error::CircularityViolation { at, deviation });
                }
            }
        }
        let gamma = 1.0 - 2.0 * alpha;
        Ok(GeneratedPattern { kind, alpha, beta: alpha, gamma, theta, n, u, v, w, patterns })
    }

    pub fn fields(&self) -> [&VertexField; 3] {
        [&self.u, &self.v, &self.w]
    }

    /// The field whose base tag is `tag`.
    pub fn field(&self, tag: FieldTag) -> &VertexField {
        match tag.base() {
            FieldTag::U => &self.u,
            FieldTag::V => &self.v,
            _ => &self.w,
        }
    }

    pub fn pattern(&self, tag: FieldTag) -> &CirclePattern {
        match tag.base() {
            FieldTag::U => &self.patterns[0],
            FieldTag::V => &self.patterns[1],
            _ => &self.patterns[2],
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > ALPHA_EPS && alpha < 0.5 - ALPHA_EPS) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(())
}

/// The discrete `z^(3 alpha)` on the sector `0 <= k, l <= n`, with `theta = 2 pi alpha`.
pub fn generate_zalpha(alpha: f64, n: usize) -> Result<GeneratedPattern> {
    zalpha(alpha, 2.0 * PI * alpha, n, true)
}

/// The constrained solution with `u(1) = v(1) = 1`, `u(omega) = v(omega) = exp(i theta)`.
///
/// These are circle patterns for every `0 < theta < pi`, but away from
/// `theta = 2 pi alpha` rounding errors grow quickly, so circularity is only
/// recorded in `deviations` and not enforced.
pub fn generate_zalpha_theta(alpha: f64, theta: f64, n: usize) -> Result<GeneratedPattern> {
    zalpha(alpha, theta, n, false)
}

fn zalpha(alpha: f64, theta: f64, n: usize, enforce: bool) -> Result<GeneratedPattern> {
    check_alpha(alpha)?;
    let e = Complex64::from_polar(1.0, theta);
    let one = Complex64::new(1.0, 0.0);
    let sol = solve_constrained_sector(&ConstraintParams::symmetric(alpha), one, one, e, e, n)?;
    GeneratedPattern::assemble(PatternKind::Zalpha, alpha, theta, n, sol.u, sol.v, sol.w, enforce)
}

fn ext(x: Option<f64>) -> ExtComplex {
    x.map_or(ExtComplex::Infinity, ExtComplex::from)
}

fn ci(re: f64, im: f64) -> ExtComplex {
    ExtComplex::new(re, im)
}

/// Near-origin values of `(u°, v°, w°)` that the limit axes do not cover.
fn limit_tables(case: LimitCase) -> Vec<(LatticePoint, [ExtComplex; 3])> {
    let p = LatticePoint::new;
    let inf = ExtComplex::Infinity;
    match case {
        LimitCase::Half => vec![
            (p(0, 0), [ci(0.0, 0.0), ci(0.0, 0.0), inf]),
            (p(1, 0), [ci(1.0, 0.0), ci(0.0, 0.0), ci(0.0, 0.0)]),
            (p(0, 1), [ci(-1.0, 0.0), ci(0.0, 0.0), ci(0.0, 2.0 * PI)]),
            (p(1, 1), [ci(0.0, 0.0), ci(0.0, 1.0 / PI), ci(0.0, PI)]),
        ],
        LimitCase::Zero => vec![
            (p(0, 0), [inf, inf, ci(0.0, 0.0)]),
            (p(1, 0), [inf, ci(0.0, 0.0), ci(0.0, 0.0)]),
            (p(0, 1), [inf, ci(0.0, 2.0 * PI), ci(0.0, 0.0)]),
            (p(2, 0), [ci(0.0, 0.0), ci(1.0, 0.0), ci(0.0, 0.0)]),
            (p(0, 2), [ci(0.0, 2.0 * PI), ci(1.0, 2.0 * PI), ci(0.0, 0.0)]),
            (p(1, 1), [ci(0.0, PI), inf, ci(0.0, 0.0)]),
            (p(2, 1), [ci(0.0, PI), ci(0.0, 0.0), ci(0.0, 1.0 / PI)]),
            (p(1, 2), [ci(0.0, PI), ci(0.0, 2.0 * PI), ci(0.0, -1.0 / PI)]),
            (p(2, 2), [ci(1.0, PI), ci(0.0, PI), ci(0.0, 0.0)]),
        ],
    }
}

/// The `l`-axis value from the `k`-axis value in a limit case.
fn limit_l_axis(case: LimitCase, field: usize, x: ExtComplex) -> ExtComplex {
    let Some(z) = x.finite() else { return x };
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    match (case, field) {
        (LimitCase::Half, 0 | 1) => (-z).into(),
        (LimitCase::Half, _) => (z + two_pi_i).into(),
        (LimitCase::Zero, 0 | 1) => (z + two_pi_i).into(),
        (LimitCase::Zero, _) => z.into(),
    }
}

/// The rescaled limits `alpha -> 1/2` (`z^(3/2)` and `log z`) and `alpha -> 0` (`log z` and `z^3`).
pub fn generate_limit_pattern(case: LimitCase, n: usize) -> Result<GeneratedPattern> {
    if n < 2 {
        return Err(Error::SectorTooSmall(n));
    }
    let axis = closed_form_axis_limits(case, n);
    let tags = [FieldTag::URing, FieldTag::VRing, FieldTag::WRing];
    let mut fields = tags.map(VertexField::new);
    for (fi, seq) in [&axis.u, &axis.v, &axis.w].into_iter().enumerate() {
        for (j, x) in seq.iter().enumerate() {
            let x = ext(*x);
            fields[fi].set(LatticePoint::new(j as i64, 0), x);
            if j > 0 {
                fields[fi].set(LatticePoint::new(0, j as i64), limit_l_axis(case, fi, x));
            }
        }
    }
    for (p, vals) in limit_tables(case) {
        for (fi, x) in vals.into_iter().enumerate() {
            fields[fi].set(p, x);
        }
    }
    let [mut u, mut v, known_w] = fields;
    fill_sector(&mut u, &mut v, n)?;
    let w = extend_third_field(&u, &v, &known_w)?;
    let (kind, alpha) = match case {
        LimitCase::Half => (PatternKind::Z32Log, 0.5),
        LimitCase::Zero => (PatternKind::LogZ3, 0.0),
    };
    GeneratedPattern::assemble(kind, alpha, 2.0 * PI * alpha, n, u, v, w, true)
}

/// Fills every hexagon center with the reflection of `p_inf` in its circle.
pub fn central_extension(pattern: &CirclePattern, p_inf: ExtComplex) -> VertexField {
    let mut out = pattern.points.clone();
    for (p, c) in &pattern.circles {
        out.set(*p, reflect_in_circle(p_inf, c));
    }
    out
}

/// The value of the missing vertex `missing` that makes the multi-ratio `-1`.
///
/// The multi-ratio is Moebius in each vertex, so numerator and denominator are
/// affine in the unknown; both are sampled at 0 and 1.
pub fn complete_hexagon(vals: [Complex64; 6], missing: usize) -> Result<Complex64> {
    let parts = |x: Complex64| {
        let mut w = vals;
        w[missing] = x;
        let num = (w[0] - w[1]) * (w[2] - w[3]) * (w[4] - w[5]);
        let den = (w[1] - w[2]) * (w[3] - w[4]) * (w[5] - w[0]);
        (num, den)
    };
    let zero = Complex64::new(0.0, 0.0);
    let (n0, d0) = parts(zero);
    let (n1, d1) = parts(Complex64::new(1.0, 0.0));
    let (a, b, c, d) = (n1 - n0, n0, d1 - d0, d0);
    let s = a + c;
    if s.norm() == 0.0 || !s.is_finite() {
        return Err(Error::IndeterminateRatio);
    }
    Ok(-(b + d) / s)
}

/// Result of one step of the row construction.
#[derive(Clone, Debug)]
pub struct RowStep {
    pub field: VertexField,
    pub circles: BTreeMap<LatticePoint, Circle>,
    /// Vertices computed by this step.
    pub added: Vec<LatticePoint>,
    /// Largest distance of a computed sixth point from the circle through the other five.
    pub membership: f64,
}

fn in_window(p: LatticePoint, n: usize) -> bool {
    let n = n as i64;
    (0..=n).contains(&p.k) && (0..=n).contains(&p.l)
}

/// Advances a circle pattern of sublattice `j` across the row of hexagons whose
/// centers lie on the anti-diagonal `k + l = row`.
///
/// Each row hexagon must have five known vertices; the sixth comes from the
/// multi-ratio condition. The next row of circles then passes through three known
/// points each, and the remaining vertices are second intersections of
/// neighboring circles. Everything stays inside `0 <= k, l <= n`.
pub fn circle_row_propagate(points: &VertexField, j: u8, row: i64, n: usize) -> Result<RowStep> {
    let mut field = points.clone();
    let mut circles = BTreeMap::new();
    let mut added = Vec::new();
    let mut membership: f64 = 0.0;
    let row_centers: Vec<LatticePoint> = (0..=row)
        .map(|k| LatticePoint::new(k, row - k))
        .filter(|p| p.sublattice_index() == j && in_window(*p, n))
        .collect();
    for &c in &row_centers {
        let star = hex_star(c);
        if !star.vertices.iter().all(|p| in_window(*p, n)) {
            continue;
        }
        let known: Vec<Option<Complex64>> = star.vertices.iter().map(|p| field.finite(*p)).collect();
        let missing: Vec<usize> = (0..6).filter(|i| known[*i].is_none()).collect();
        if missing.len() != 1 {
            continue;
        }
        let m = missing[0];
        let mut vals = [Complex64::new(0.0, 0.0); 6];
        for i in 0..6 {
            vals[i] = known[i].unwrap_or_default();
        }
        let x = complete_hexagon(vals, m)?;
        let circle = circle_through(vals[(m + 1) % 6].into(), vals[(m + 3) % 6].into(), vals[(m + 5) % 6].into())
            .map_err(|_| Error::CircleConstructionFailure { at: c })?;
        membership = membership.max(circle.distance(x.into()));
        field.set(star.vertices[m], x);
        circles.insert(c, circle);
        added.push(star.vertices[m]);
    }
    // circles of the next row, then their remaining vertices
    let next: Vec<LatticePoint> = (0..=row + 3)
        .map(|k| LatticePoint::new(k, row + 3 - k))
        .filter(|p| p.sublattice_index() == j && in_window(*p, n))
        .collect();
    for &c in &next {
        let star = hex_star(c);
        let known: Vec<Complex64> = star.vertices.iter().filter_map(|p| field.finite(*p)).collect();
        if known.len() < 3 {
            continue;
        }
        let circle = circle_through(known[0].into(), known[1].into(), known[2].into())
            .map_err(|_| Error::CircleConstructionFailure { at: c })?;
        circles.insert(c, circle);
    }
    for w in next.windows(2) {
        let (c1, c2) = (w[0], w[1]);
        let (Some(a), Some(b)) = (circles.get(&c1), circles.get(&c2)) else { continue };
        let s1 = hex_star(c1).vertices;
        let common: Vec<LatticePoint> = hex_star(c2).vertices.into_iter().filter(|p| s1.contains(p)).collect();
        if common.len() != 2 {
            continue;
        }
        let (known, unknown) = match (field.finite(common[0]), field.finite(common[1])) {
            (Some(z), None) => (z, common[1]),
            (None, Some(z)) => (z, common[0]),
            _ => continue,
        };
        if !in_window(unknown, n) {
            continue;
        }
        let x = second_intersection(a, b, known.into());
        field.set(unknown, x);
        added.push(unknown);
    }
    Ok(RowStep { field, circles, added, membership })
}

/// A rotated copy of a sector image.
#[derive(Clone, Debug)]
pub struct SectorCopy {
    pub rotation: Complex64,
    pub pattern: CirclePattern,
}

#[derive(Clone, Debug)]
pub struct Assembly {
    pub tag: FieldTag,
    pub copies: Vec<SectorCopy>,
    /// Rotation angle between consecutive copies.
    pub angle: f64,
    /// Total turning `copies * angle / (2 pi)`.
    pub turns: u64,
    pub seam_mismatch: f64,
}

/// `x = p/q` with `q <= max_den`, if one exists.
pub fn rational_approx(x: f64, max_den: u64) -> Option<(i64, u64)> {
    (1..=max_den).find_map(|q| {
        let p = (x * q as f64).round();
        ((x * q as f64 - p).abs() < 1e-12).then_some((p as i64, q))
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Attaches rotated copies of a sector image until they close up.
///
/// For `u` and `v` the copies turn by `2 pi alpha`; for `w` by `2 pi gamma`,
/// `gamma = 1 - 2 alpha`, and the number of copies is the reduced denominator of `gamma`.
/// Consecutive copies must agree along the shared semiaxis.
pub fn assemble_full_plane(pattern: &GeneratedPattern, tag: FieldTag) -> Result<Assembly> {
    let (p, q) = rational_approx(pattern.alpha, MAX_DENOMINATOR).ok_or(Error::NotRational(pattern.alpha))?;
    let (num, den) = match tag.base() {
        FieldTag::W => (q as i64 - 2 * p, q),
        _ => (p, q),
    };
    let g = gcd(num.unsigned_abs(), den).max(1);
    let (num, den) = (num / g as i64, den / g);
    let angle = 2.0 * PI * num as f64 / den as f64;
    let rot = Complex64::from_polar(1.0, angle);
    let base = pattern.pattern(tag);
    let field = pattern.field(tag);
    let mut seam: f64 = 0.0;
    for j in 1..=pattern.n as i64 {
        let (Some(a), Some(b)) = (field.finite(LatticePoint::new(j, 0)), field.finite(LatticePoint::new(0, j))) else {
            continue;
        };
        seam = seam.max((rot * a - b).norm());
    }
    let scale = field.scale().max(1.0);
    if seam > crate::geometry::TAU * scale {
        return Err(Error::SeamMismatch(seam));
    }
    let zero = Complex64::new(0.0, 0.0);
    let copies = (0..den)
        .map(|i| {
            let r = Complex64::from_polar(1.0, angle * i as f64);
            SectorCopy { rotation: r, pattern: base.transformed(r, zero) }
        })
        .collect();
    Ok(Assembly { tag, copies, angle, turns: num.unsigned_abs(), seam_mismatch: seam })
}

/// Best similarity factor `c` with `v(eps z) = c u(z)` over the half-sector `l <= k`,
/// where `eps z` is the point `(k - l, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSectorFit {
    pub factor: Complex64,
    pub residual: f64,
    pub pairs: usize,
}

pub fn half_sector_fit(u: &VertexField, v: &VertexField) -> HalfSectorFit {
    let mut pairs = Vec::new();
    for p in u.points() {
        if p.l > p.k {
            continue;
        }
        let q = LatticePoint::new(p.k - p.l, p.k);
        if let (Some(a), Some(b)) = (u.finite(p), v.finite(q)) {
            pairs.push((a, b));
        }
    }
    let num: Complex64 = pairs.iter().map(|(a, b)| a.conj() * b).sum();
    let den: f64 = pairs.iter().map(|(a, _)| a.norm_sqr()).sum();
    let factor = if den > 0.0 { num / den } else { Complex64::new(0.0, 0.0) };
    let residual = pairs.iter().map(|(a, b)| (factor * a - b).norm()).fold(0.0, f64::max);
    HalfSectorFit { factor, residual, pairs: pairs.len() }
}

/// Largest relative violation of the isosceles relations on the rhombi
/// `(z0, z0 + 1, z0 + omega, z0 + 1 + omega)`.
///
/// With `(a, b, c)` the fields `(u, v, w)` rotated so that `z0` is a center of
/// `a`: `a` is equidistant from `a(z0)`, `b(z1)` and `b(z2)` are apexes, and `w(z3)`
/// is equidistant from the other three.
pub fn isosceles_residual(u: &VertexField, v: &VertexField, w: &VertexField) -> f64 {
    let mut worst: f64 = 0.0;
    for z0 in u.points() {
        let zs = [z0, z0.offset(1, 0), z0.offset(0, 1), z0.offset(1, 1)];
        let (a, b, c) = match z0.sublattice_index() {
            1 => (u, v, w),
            2 => (v, w, u),
            _ => (w, u, v),
        };
        let get = |f: &VertexField| -> Option<[Complex64; 4]> {
            Some([f.finite(zs[0])?, f.finite(zs[1])?, f.finite(zs[2])?, f.finite(zs[3])?])
        };
        let (Some(a), Some(b), Some(c)) = (get(a), get(b), get(c)) else { continue };
        let d = |x: Complex64, y: Complex64| (x - y).norm();
        let rel = |x: f64, y: f64| (x - y).abs() / x.max(y).max(1e-300);
        let checks = [
            rel(d(a[3], a[0]), d(a[1], a[0])),
            rel(d(a[2], a[0]), d(a[1], a[0])),
            rel(d(b[3], b[1]), d(b[0], b[1])),
            rel(d(b[3], b[2]), d(b[0], b[2])),
            rel(d(c[3], c[1]), d(c[3], c[0])),
            rel(d(c[3], c[2]), d(c[3], c[0])),
        ];
        worst = checks.into_iter().fold(worst, f64::max);
    }
    worst
}

/// `|w1 - w2||w3 - w4||w5 - w6| - |w2 - w3||w4 - w5||w6 - w1|`, relative.
pub fn side_product_residual(w: &[Complex64; 6]) -> f64 {
    let a = (w[0] - w[1]).norm() * (w[2] - w[3]).norm() * (w[4] - w[5]).norm();
    let b = (w[1] - w[2]).norm() * (w[3] - w[4]).norm() * (w[5] - w[0]).norm();
    (a - b).abs() / a.max(b).max(f64::MIN_POSITIVE)
}

/// Outcome of an overlap test over image triangles.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OverlapCheck {
    pub ok: bool,
    pub violations: usize,
    /// Pairs or vertices within the dead zone; never counted as passing evidence.
    pub inconclusive: usize,
    pub worst: Vec<LatticePoint>,
}

/// Elementary triangles whose three values are finite.
pub fn image_triangles(field: &VertexField) -> Vec<(Triangle, [Complex64; 3])> {
    let mut out = Vec::new();
    for p in field.points() {
        for tri in [Triangle::up(p), Triangle::down(p)] {
            let vals: Option<Vec<Complex64>> = tri.0.iter().map(|q| field.finite(*q)).collect();
            if let Some(v) = vals {
                out.push((tri, [v[0], v[1], v[2]]));
            }
        }
    }
    out
}

fn side(a: Complex64, b: Complex64, p: Complex64) -> Orientation {
    orientation(a, b, p)
}

/// Local injectivity: across every interior edge the two opposite vertices lie
/// on opposite sides, and the angles around every interior vertex sum to `2 pi`.
pub fn immersion_check(field: &VertexField) -> OverlapCheck {
    let mut out = OverlapCheck::default();
    let mut seen = BTreeSet::new();
    for p in field.points() {
        for t in [0usize, 2, 4] {
            let q = p.step(t);
            // the two triangles on an edge have apexes p + eps^(t+1) and p + eps^(t-1)
            let (r1, r2) = (p.step(t + 1), p.step(t + 5));
            let vals: Option<Vec<Complex64>> = [p, q, r1, r2].iter().map(|x| field.finite(*x)).collect();
            let Some(vals) = vals else { continue };
            if !seen.insert((p, t)) {
                continue;
            }
            match (side(vals[0], vals[1], vals[2]), side(vals[0], vals[1], vals[3])) {
                (Orientation::Inconclusive, _) | (_, Orientation::Inconclusive) => out.inconclusive += 1,
                (a, b) if a == b => {
                    out.violations += 1;
                    out.worst.push(p);
                }
                _ => {}
            }
        }
        let ring: Option<Vec<Complex64>> = hex_star(p).vertices.iter().map(|x| field.finite(*x)).collect();
        if let (Some(ring), Some(c)) = (ring, field.finite(p)) {
            let total: f64 = (0..6).map(|i| ((ring[(i + 1) % 6] - c) / (ring[i] - c)).arg()).sum();
            let turns = total / (2.0 * PI);
            if !turns.is_finite() {
                out.inconclusive += 1;
            } else if (turns.abs() - 1.0).abs() > 1e-6 {
                out.violations += 1;
                out.worst.push(p);
            }
        }
    }
    out.worst.truncate(8);
    out.ok = out.violations == 0 && out.inconclusive == 0;
    out
}

/// Largest separation of two triangles over the six edge normals; negative means overlap.
fn separation(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for tri in [a, b] {
        for i in 0..3 {
            let e = tri[(i + 1) % 3] - tri[i];
            let nrm = Complex64::new(-e.im, e.re) / e.norm().max(f64::MIN_POSITIVE);
            let proj = |p: &Complex64| p.re * nrm.re + p.im * nrm.im;
            let (amin, amax) = a.iter().map(proj).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
            let (bmin, bmax) = b.iter().map(proj).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
            best = best.max((amin - bmax).max(bmin - amax));
        }
    }
    best
}

/// No two image triangle interiors intersect; quadratic in the number of triangles.
pub fn embedding_check(field: &VertexField) -> OverlapCheck {
    let tris = image_triangles(field);
    let mut out = OverlapCheck::default();
    for i in 0..tris.len() {
        for j in i + 1..tris.len() {
            let (a, b) = (&tris[i].1, &tris[j].1);
            let scale = a.iter().chain(b).map(|z| z.norm()).fold(1.0, f64::max);
            let s = separation(a, b);
            if s < -ORIENTATION_DEAD_ZONE * scale {
                out.violations += 1;
                if out.worst.len() < 8 {
                    out.worst.push(tris[i].0 .0[0]);
                }
            } else if s < ORIENTATION_DEAD_ZONE * scale && s > -ORIENTATION_DEAD_ZONE * scale {
                // touching along a shared edge or vertex
                let shared = tris[i].0 .0.iter().filter(|p| tris[j].0 .0.contains(p)).count();
                if shared == 0 {
                    out.inconclusive += 1;
                }
            }
        }
    }
    out.ok = out.violations == 0 && out.inconclusive == 0;
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldVerification {
    pub tag: FieldTag,
    pub mr: MrReport,
    pub circularity: f64,
    pub circles: usize,
    pub circularity_worst: Vec<(LatticePoint, f64)>,
    pub excluded_circles: Vec<LatticePoint>,
    pub immersion: OverlapCheck,
    pub embedding: Option<OverlapCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub fields: Vec<FieldVerification>,
    pub max_mr: f64,
    pub max_circularity: f64,
    pub immersed: bool,
    pub embedded: Option<bool>,
}

/// Multi-ratio, circularity and overlap checks for each field.
pub fn verify_pattern(fields: &[&VertexField], embedding: bool) -> VerificationReport {
    let mut out = Vec::new();
    for f in fields {
        let pat = CirclePattern::with_centers(f);
        let mut worst: Vec<(LatticePoint, f64)> = pat.deviations.iter().map(|(p, d)| (*p, d / radius_scale(&pat.circles[p]))).collect();
        worst.sort_by(|a, b| b.1.total_cmp(&a.1));
        let circularity = worst.first().map_or(0.0, |x| x.1);
        worst.truncate(5);
        out.push(FieldVerification {
            tag: f.tag,
            mr: verify_mr(f),
            circularity,
            circles: pat.circles.len(),
            circularity_worst: worst,
            excluded_circles: pat.excluded,
            immersion: immersion_check(f),
            embedding: embedding.then(|| embedding_check(f)),
        });
    }
    VerificationReport {
        max_mr: out.iter().map(|f| f.mr.max()).fold(0.0, f64::max),
        max_circularity: out.iter().map(|f| f.circularity).fold(0.0, f64::max),
        immersed: out.iter().all(|f| f.immersion.ok),
        embedded: embedding.then(|| out.iter().all(|f| f.embedding.as_ref().is_some_and(|e| e.ok))),
        fields: out,
    }
}

/// The identity map on the sector, as a field with the given tag.
pub fn regular_lattice(tag: FieldTag, n: usize) -> VertexField {
    VertexField::from_fn(tag, &sector_points(n), |p| p.embed())
}
