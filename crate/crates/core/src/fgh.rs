//! The fgh-system: vertex fields, edge fields and their propagation.
//!
//! On a positively oriented edge `e = (z1, z2)` the edge fields are
//! `f = u(z2) - u(z1)`, `g = v(z2) - v(z1)` and `h = w(z2) - w(z1) = 1/(f g)`.
//! Around every triangle, listed along its positive edges, the vertex fields
//! satisfy `(u2 - u1)/(u3 - u2) = (v3 - v2)/(v1 - v3)`.

use crate::error::{Error, Result};
use crate::geometry::{multi_ratio, ExtComplex};
use crate::lattice::{hex_star, LatticePoint, OrientedEdge, Triangle, STEPS};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use std::fmt;

/// Relative size below which a difference is treated as zero.
pub const DEGENERACY: f64 = 1e-13;

/// Closure tolerance for edge integration, relative to the field scale.
pub const CLOSURE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FieldTag {
    #[serde(rename = "u")]
    U,
    #[serde(rename = "v")]
    V,
    #[serde(rename = "w")]
    W,
    #[serde(rename = "u°")]
    URing,
    #[serde(rename = "v°")]
    VRing,
    #[serde(rename = "w°")]
    WRing,
}

impl FieldTag {
    /// Sublattice index of the points at which this field's circles are centered.
    pub fn center_index(self) -> u8 {
        match self {
            FieldTag::U | FieldTag::URing => 1,
            FieldTag::V | FieldTag::VRing => 2,
            FieldTag::W | FieldTag::WRing => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FieldTag::U => "u",
            FieldTag::V => "v",
            FieldTag::W => "w",
            FieldTag::URing => "u°",
            FieldTag::VRing => "v°",
            FieldTag::WRing => "w°",
        }
    }

    /// The unscaled tag of the same role.
    pub fn base(self) -> FieldTag {
        match self {
            FieldTag::URing => FieldTag::U,
            FieldTag::VRing => FieldTag::V,
            FieldTag::WRing => FieldTag::W,
            t => t,
        }
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Values of one field on a finite set of lattice points.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexField {
    pub tag: FieldTag,
    pub values: BTreeMap<LatticePoint, ExtComplex>,
}

impl VertexField {
    pub fn new(tag: FieldTag) -> Self {
        VertexField { tag, values: BTreeMap::new() }
    }

    pub fn from_fn(tag: FieldTag, points: &[LatticePoint], f: impl Fn(LatticePoint) -> Complex64) -> Self {
        let values = points.iter().map(|p| (*p, ExtComplex::Finite(f(*p)))).collect();
        VertexField { tag, values }
    }

    pub fn get(&self, p: LatticePoint) -> Option<ExtComplex> {
        self.values.get(&p).copied()
    }

    pub fn finite(&self, p: LatticePoint) -> Option<Complex64> {
        self.get(p).and_then(|v| v.finite())
    }

    pub fn require(&self, p: LatticePoint) -> Result<Complex64> {
        self.finite(p).ok_or(Error::MissingValue { at: p })
    }

    pub fn set(&mut self, p: LatticePoint, value: impl Into<ExtComplex>) {
        self.values.insert(p, value.into());
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        self.values.contains_key(&p)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        self.values.keys().copied()
    }

    /// Largest finite modulus, at least 1.
    pub fn scale(&self) -> f64 {
        self.values.values().filter_map(|v| v.finite()).map(|z| z.norm()).fold(1.0, f64::max)
    }

    /// Apply `z -> a z + b` to every finite value.
    pub fn affine(&self, a: Complex64, b: Complex64) -> Self {
        let values = self
            .values
            .iter()
            .map(|(p, v)| (*p, v.finite().map_or(ExtComplex::Infinity, |z| (a * z + b).into())))
            .collect();
        VertexField { tag: self.tag, values }
    }

    /// Largest distance between finite values present in both fields.
    pub fn max_difference(&self, other: &VertexField) -> f64 {
        self.values
            .iter()
            .filter_map(|(p, a)| Some((a.finite()?, other.finite(*p)?)))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `(f, g, h)` on a positively oriented edge, `f g h = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeFieldTriple {
    pub f: Complex64,
    pub g: Complex64,
    pub h: Complex64,
}

impl EdgeFieldTriple {
    /// Completes `(f, g)` with `h = 1/(f g)`.
    pub fn new(f: Complex64, g: Complex64) -> Self {
        EdgeFieldTriple { f, g, h: (f * g).inv() }
    }

    pub fn unit_residual(&self) -> f64 {
        (self.f * self.g * self.h - 1.0).norm()
    }
}

pub fn edge_fields(u: &VertexField, v: &VertexField, e: OrientedEdge) -> Result<EdgeFieldTriple> {
    let (e, _) = e.positive();
    let f = u.require(e.head)? - u.require(e.tail)?;
    let g = v.require(e.head)? - v.require(e.tail)?;
    if f == Complex64::new(0.0, 0.0) || g == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroEdge { tail: e.tail, head: e.head });
    }
    Ok(EdgeFieldTriple::new(f, g))
}

/// `(u2 - u1)/(u3 - u2) - (v3 - v2)/(v1 - v3)` for a triangle listed along its positive edges.
pub fn triangle_residual(u: &VertexField, v: &VertexField, tri: &Triangle) -> Result<Complex64> {
    let [a, b, c] = tri.0;
    let (u1, u2, u3) = (u.require(a)?, u.require(b)?, u.require(c)?);
    let (v1, v2, v3) = (v.require(a)?, v.require(b)?, v.require(c)?);
    let zero = Complex64::new(0.0, 0.0);
    if u3 - u2 == zero || v1 - v3 == zero {
        return Err(Error::DegenerateTriangle { at: a });
    }
    Ok((u2 - u1) / (u3 - u2) - (v3 - v2) / (v1 - v3))
}

/// The nine scalar triangle equations for the three consecutive edges of a triangle.
///
/// Returns the largest of the residuals of: the three sums, the three products
/// `f3 g2 h1 = 1` (and cyclic), and the three quadratic relations
/// `f3 g2 + f3 g1 + f2 g1 = 0` (and cyclic).
pub fn triangle_equations_residual(t: [EdgeFieldTriple; 3]) -> [f64; 3] {
    let [a, b, c] = t;
    let sums = [(a.f + b.f + c.f).norm(), (a.g + b.g + c.g).norm(), (a.h + b.h + c.h).norm()];
    let prods = [
        (c.f * b.g * a.h - 1.0).norm(),
        (c.g * b.h * a.f - 1.0).norm(),
        (c.h * b.f * a.g - 1.0).norm(),
    ];
    let quads = [
        (c.f * b.g + c.f * a.g + b.f * a.g).norm(),
        (c.g * b.h + c.g * a.h + b.g * a.h).norm(),
        (c.h * b.f + c.h * a.f + b.h * a.f).norm(),
    ];
    let max = |x: [f64; 3]| x.into_iter().fold(0.0, f64::max);
    [max(sums), max(prods), max(quads)]
}

/// Solves the quad `z0, z1 = z0 + 1, z2 = z0 + omega, z3 = z0 + 1 + omega` for `(u3, v3)`.
pub fn fourth_point(u: [Complex64; 3], v: [Complex64; 3]) -> Result<(ExtComplex, ExtComplex)> {
    fourth_point_at(LatticePoint::new(1, 1), u, v)
}

pub(crate) fn fourth_point_at(
    cell: LatticePoint,
    u: [Complex64; 3],
    v: [Complex64; 3],
) -> Result<(ExtComplex, ExtComplex)> {
    let [u0, u1, u2] = u;
    let [v0, v1, v2] = v;
    let vscale = v0.norm().max(v1.norm()).max(v2.norm());
    if (v1 - v2).norm() <= DEGENERACY * vscale {
        return Err(Error::SplitPointsCoincide { cell });
    }
    let u3 = u0 + (u1 - u0) * (v1 - v0) / (v1 - v2) + (u2 - u0) * (v2 - v0) / (v2 - v1);
    let uscale = u0.norm().max(u3.norm()).max(u1.norm());
    if (u0 - u3).norm() <= DEGENERACY * uscale {
        return Ok((u3.into(), ExtComplex::Infinity));
    }
    let v3 = v1 + (v1 - v0) * (u1 - u0) / (u0 - u3);
    Ok((u3.into(), v3.into()))
}

/// The second form of the `v3` update, `v3 = v2 + (v2 - v0)(u2 - u0)/(u0 - u3)`.
pub fn fourth_point_v_alt(u0: Complex64, u2: Complex64, u3: Complex64, v0: Complex64, v2: Complex64) -> Complex64 {
    v2 + (v2 - v0) * (u2 - u0) / (u0 - u3)
}

fn quad_inputs(u: &VertexField, v: &VertexField, z0: LatticePoint) -> Option<([Complex64; 3], [Complex64; 3])> {
    let pts = [z0, z0.offset(1, 0), z0.offset(0, 1)];
    let uu = [u.finite(pts[0])?, u.finite(pts[1])?, u.finite(pts[2])?];
    let vv = [v.finite(pts[0])?, v.finite(pts[1])?, v.finite(pts[2])?];
    Some((uu, vv))
}

/// Fills `0 <= k, l <= n` from the values already present, along anti-diagonals.
///
/// Cells that already carry both values are kept. Every other interior cell is
/// computed from its south-west, south and west neighbors.
pub fn fill_sector(u: &mut VertexField, v: &mut VertexField, n: usize) -> Result<()> {
    let n = n as i64;
    for s in 2..=2 * n {
        for k in (s - n).max(1)..=(s - 1).min(n) {
            let cell = LatticePoint::new(k, s - k);
            if u.contains(cell) && v.contains(cell) {
                continue;
            }
            let z0 = cell.offset(-1, -1);
            let (uu, vv) = quad_inputs(u, v, z0).ok_or_else(|| {
                let missing = [z0, z0.offset(1, 0), z0.offset(0, 1)]
                    .into_iter()
                    .find(|p| u.finite(*p).is_none() || v.finite(*p).is_none())
                    .unwrap_or(z0);
                Error::MissingValue { at: missing }
            })?;
            let (u3, v3) = fourth_point_at(cell, uu, vv)?;
            u.set(cell, u3);
            v.set(cell, v3);
        }
    }
    Ok(())
}

/// Solves the Cauchy problem with data on both semiaxes `{k}` and `{l omega}`, `0..=n`.
pub fn solve_sector(u_axes: &VertexField, v_axes: &VertexField, n: usize) -> Result<(VertexField, VertexField)> {
    for j in 0..=n as i64 {
        for p in [LatticePoint::new(j, 0), LatticePoint::new(0, j)] {
            u_axes.require(p)?;
            v_axes.require(p)?;
        }
    }
    let (mut u, mut v) = (u_axes.clone(), v_axes.clone());
    fill_sector(&mut u, &mut v, n)?;
    Ok((u, v))
}

/// Solves the Cauchy problem with data on two neighboring anti-diagonals
/// `k + l = s0` and `k + l = s0 + 1`, extending `levels` diagonals each way.
pub fn solve_from_zigzag(u_zz: &VertexField, v_zz: &VertexField, levels: usize) -> Result<(VertexField, VertexField)> {
    let s0 = match u_zz.points().map(|p| p.k + p.l).min() {
        Some(s) => s,
        None => return Ok((u_zz.clone(), v_zz.clone())),
    };
    let (mut u, mut v) = (u_zz.clone(), v_zz.clone());
    let (kmin, kmax) = u_zz.points().fold((i64::MAX, i64::MIN), |(a, b), p| (a.min(p.k), b.max(p.k)));
    for step in 1..=levels as i64 {
        let s = s0 + 1 + step;
        for k in kmin..=kmax {
            let cell = LatticePoint::new(k, s - k);
            if let Some((uu, vv)) = quad_inputs(&u, &v, cell.offset(-1, -1)) {
                let (u3, v3) = fourth_point_at(cell, uu, vv)?;
                u.set(cell, u3);
                v.set(cell, v3);
            }
        }
        let s = s0 - step;
        for k in kmin..=kmax {
            let cell = LatticePoint::new(k, s - k);
            // The point reflection z -> -z with u and v exchanged maps
            // solutions to solutions; backward steps reuse the forward stencil.
            let stencil = [cell.offset(1, 1), cell.offset(0, 1), cell.offset(1, 0)];
            let get = |f: &VertexField| -> Option<[Complex64; 3]> {
                Some([f.finite(stencil[0])?, f.finite(stencil[1])?, f.finite(stencil[2])?])
            };
            if let (Some(uu), Some(vv)) = (get(&u), get(&v)) {
                let (v0, u0) = fourth_point_at(cell, vv, uu)?;
                u.set(cell, u0);
                v.set(cell, v0);
            }
        }
    }
    Ok((u, v))
}

fn edge_h(u: &VertexField, v: &VertexField, tail: LatticePoint, head: LatticePoint) -> Option<Complex64> {
    let f = u.finite(head)? - u.finite(tail)?;
    let g = v.finite(head)? - v.finite(tail)?;
    let fg = f * g;
    if fg.norm() == 0.0 || !fg.is_finite() {
        return None;
    }
    Some(fg.inv())
}

/// Extends the known values of `w` across every edge with finite nonzero `f g`,
/// using `w(z2) - w(z1) = 1/(f g)`, then checks closure on all such edges.
pub fn extend_third_field(u: &VertexField, v: &VertexField, known: &VertexField) -> Result<VertexField> {
    let mut w = known.clone();
    let mut queue: VecDeque<LatticePoint> = w.points().filter(|p| w.finite(*p).is_some()).collect();
    while let Some(p) = queue.pop_front() {
        let wp = w.require(p)?;
        for (t, _) in STEPS.iter().enumerate() {
            let q = p.step(t);
            if w.contains(q) || !u.contains(q) {
                continue;
            }
            let e = OrientedEdge::new(p, t);
            let (pe, flipped) = e.positive();
            if let Some(h) = edge_h(u, v, pe.tail, pe.head) {
                w.set(q, if flipped { wp - h } else { wp + h });
                queue.push_back(q);
            }
        }
    }
    let scale = w.scale();
    for p in w.points().collect::<Vec<_>>() {
        for t in [0usize, 2, 4] {
            let q = p.step(t);
            let (Some(wp), Some(wq)) = (w.finite(p), w.finite(q)) else { continue };
            if let Some(h) = edge_h(u, v, p, q) {
                let residual = (wq - wp - h).norm();
                if residual > CLOSURE_TOL * scale.max(h.norm()) {
                    return Err(Error::PathDependent { at: p, residual });
                }
            }
        }
    }
    Ok(w)
}

/// The third field `w`, anchored by `w(anchor) = value`.
pub fn third_field(u: &VertexField, v: &VertexField, anchor: LatticePoint, value: Complex64) -> Result<VertexField> {
    let tag = match u.tag {
        FieldTag::URing | FieldTag::VRing | FieldTag::WRing => FieldTag::WRing,
        _ => FieldTag::W,
    };
    let mut known = VertexField::new(tag);
    known.set(anchor, value);
    extend_third_field(u, v, &known)
}

fn triangles_of(field: &VertexField) -> Vec<Triangle> {
    let mut out = Vec::new();
    for p in field.points() {
        for tri in [Triangle::up(p), Triangle::down(p)] {
            if tri.0.iter().all(|q| field.finite(*q).is_some()) {
                out.push(tri);
            }
        }
    }
    out
}

/// Solves the triangle relation for the companion value at position 3.
fn companion_value(u: [Complex64; 3], v1: Complex64, v2: Complex64) -> Option<Complex64> {
    let r = (u[1] - u[0]) / (u[2] - u[1]);
    let d = 1.0 + r;
    if !r.is_finite() || d.norm() == 0.0 {
        return None;
    }
    Some((v2 + r * v1) / d)
}

/// The companion field `v` of `u`, seeded at two adjacent points.
///
/// Values spread triangle by triangle; every triangle whose three values are
/// known is checked against the triangle relation.
pub fn companion_field(u: &VertexField, seeds: [(LatticePoint, Complex64); 2]) -> Result<VertexField> {
    let tag = match u.tag {
        FieldTag::URing => FieldTag::VRing,
        FieldTag::VRing => FieldTag::WRing,
        FieldTag::WRing => FieldTag::URing,
        FieldTag::U => FieldTag::V,
        FieldTag::V => FieldTag::W,
        FieldTag::W => FieldTag::U,
    };
    let mut v = VertexField::new(tag);
    for (p, z) in seeds {
        v.set(p, z);
    }
    let tris = triangles_of(u);
    loop {
        let mut progress = false;
        for tri in &tris {
            let known: Vec<bool> = tri.0.iter().map(|p| v.contains(*p)).collect();
            if known.iter().filter(|b| **b).count() != 2 {
                continue;
            }
            let j = known.iter().position(|b| !*b).expect("one unknown");
            let order = [tri.0[(j + 1) % 3], tri.0[(j + 2) % 3], tri.0[j]];
            let uu = [u.require(order[0])?, u.require(order[1])?, u.require(order[2])?];
            if let Some(val) = companion_value(uu, v.require(order[0])?, v.require(order[1])?) {
                v.set(order[2], val);
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    let scale = v.scale();
    for tri in &tris {
        if tri.0.iter().all(|p| v.contains(*p)) {
            let [a, b, c] = tri.0;
            let (v1, v2, v3) = (v.require(a)?, v.require(b)?, v.require(c)?);
            let uu = [u.require(a)?, u.require(b)?, u.require(c)?];
            let residual = ((uu[1] - uu[0]) * (v1 - v3) - (v3 - v2) * (uu[2] - uu[1])).norm();
            let norm = ((uu[1] - uu[0]).norm() + (uu[2] - uu[1]).norm()) * scale;
            if residual > 1e-9 * norm {
                return Err(Error::InconsistentAroundVertex { at: a, residual: residual / norm });
            }
        }
    }
    Ok(v)
}

/// Multi-ratio deviations over all hexagons inside a field's domain.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MrReport {
    /// `max |M + 1|` over hexagons centered at points of index `j`.
    pub max_by_sublattice: [f64; 3],
    pub hexagons: usize,
    /// Hexagon centers skipped because a vertex is infinite or two vertices coincide.
    pub excluded: Vec<LatticePoint>,
    /// The largest deviations, worst first.
    pub worst: Vec<(LatticePoint, f64)>,
}

impl MrReport {
    pub fn max(&self) -> f64 {
        self.max_by_sublattice.iter().copied().fold(0.0, f64::max)
    }
}

/// The six vertex values around `center`, or `None` if any is missing.
pub fn hexagon_values(field: &VertexField, center: LatticePoint) -> Option<[ExtComplex; 6]> {
    let star = hex_star(center);
    let mut out = [ExtComplex::Infinity; 6];
    for (o, p) in out.iter_mut().zip(star.vertices) {
        *o = field.get(p)?;
    }
    Some(out)
}

/// Finite hexagon values with no two neighbors closer than the degeneracy threshold.
pub fn regular_hexagon_values(field: &VertexField, center: LatticePoint) -> Option<[Complex64; 6]> {
    let vals = hexagon_values(field, center)?;
    let mut out = [Complex64::new(0.0, 0.0); 6];
    for (o, v) in out.iter_mut().zip(vals) {
        *o = v.finite()?;
    }
    let scale = out.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for i in 0..6 {
        if (out[i] - out[(i + 1) % 6]).norm() <= DEGENERACY * scale {
            return None;
        }
    }
    Some(out)
}

pub fn verify_mr(field: &VertexField) -> MrReport {
    let mut report = MrReport::default();
    let mut all = Vec::new();
    for p in field.points() {
        if hexagon_values(field, p).is_none() {
            continue;
        }
        let Some(vals) = regular_hexagon_values(field, p) else {
            report.excluded.push(p);
            continue;
        };
        let pts: Vec<ExtComplex> = vals.iter().map(|z| (*z).into()).collect();
        let dev = match multi_ratio(&pts) {
            Ok(ExtComplex::Finite(m)) => (m + 1.0).norm(),
            _ => f64::INFINITY,
        };
        let j = p.sublattice_index() as usize;
        report.max_by_sublattice[j] = report.max_by_sublattice[j].max(dev);
        report.hexagons += 1;
        all.push((p, dev));
    }
    all.sort_by(|a, b| b.1.total_cmp(&a.1));
    all.truncate(5);
    report.worst = all;
    report
}
