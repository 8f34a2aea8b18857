//! The non-autonomous constraint, its axis recurrences and closed forms, and
//! the matrices of the isomonodromic deformation.
//!
//! For a vertex with representative `(k, l, m)` the constraint reads
//!
//! ```text
//! alpha u = k f0 g0 f3 / D0 + l f2 g2 f5 / D2 + m f4 g4 f1 / D4
//! beta  v = k g0 f3 g3 / D0 + l g2 f5 g5 / D2 + m g4 f1 g1 / D4
//! Dj      = fj gj + gj f(j+3) + f(j+3) g(j+3)
//! ```
//!
//! with star labels as in [`crate::lattice::star_edge`].

use crate::error::{Error, Result};
use crate::fgh::{fill_sector, third_field, FieldTag, VertexField};
use crate::lattice::{star_edge, LatticePoint, Triple};
use crate::lax::{identity, mat_dist, mat_mul, QuadraticForms, M3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Generic generation keeps `alpha` in `(ALPHA_EPS, 1/2 - ALPHA_EPS)`.
pub const ALPHA_EPS: f64 = 1e-6;

/// Relative size below which a product factor counts as a pole.
const POLE_TOL: f64 = 1e-14;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintParams {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

impl ConstraintParams {
    /// `gamma = 1 - alpha - beta`.
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        ConstraintParams { alpha, beta, gamma: 1.0 - alpha - beta }
    }

    pub fn real(alpha: f64, beta: f64) -> Self {
        Self::new(c(alpha), c(beta))
    }

    /// `beta = alpha`.
    pub fn symmetric(alpha: f64) -> Self {
        Self::real(alpha, alpha)
    }
}

/// Edge fields on the six star edges of a vertex, positively oriented.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarData {
    pub center: LatticePoint,
    pub f: [Complex64; 6],
    pub g: [Complex64; 6],
    pub h: [Complex64; 6],
}

/// Differences of `field` along the six positively oriented star edges at `p`.
pub fn star_differences(field: &VertexField, p: LatticePoint) -> Result<[Complex64; 6]> {
    let mut out = [c(0.0); 6];
    for (t, o) in out.iter_mut().enumerate() {
        let e = star_edge(p, t);
        *o = field.require(e.head)? - field.require(e.tail)?;
    }
    Ok(out)
}

impl StarData {
    pub fn from_fields(u: &VertexField, v: &VertexField, p: LatticePoint) -> Result<Self> {
        let f = star_differences(u, p)?;
        let g = star_differences(v, p)?;
        let mut h = [c(0.0); 6];
        for t in 0..6 {
            h[t] = (f[t] * g[t]).inv();
        }
        Ok(StarData { center: p, f, g, h })
    }

    /// `Dj = fj gj + gj f(j+3) + f(j+3) g(j+3)`.
    pub fn denominator(&self, j: usize) -> Complex64 {
        let (a, b) = (j % 6, (j + 3) % 6);
        self.f[a] * self.g[a] + self.g[a] * self.f[b] + self.f[b] * self.g[b]
    }

    fn checked_denominator(&self, j: usize) -> Result<Complex64> {
        let d = self.denominator(j);
        let scale = (self.f[j] * self.g[j]).norm().max((self.f[(j + 3) % 6] * self.g[(j + 3) % 6]).norm());
        if d.norm() <= 1e-14 * scale || !d.is_finite() {
            return Err(Error::SingularDenominator { at: self.center });
        }
        Ok(d)
    }
}

fn weighted(rep: Triple, mut term: impl FnMut(usize) -> Result<Complex64>) -> Result<Complex64> {
    Ok(term(0)? * rep.k as f64 + term(2)? * rep.l as f64 + term(4)? * rep.m as f64)
}

/// `(r1, r2)`: right-hand sides minus `alpha u` and `beta v`.
pub fn constraint_residual(
    star: &StarData,
    u: Complex64,
    v: Complex64,
    params: &ConstraintParams,
    rep: Triple,
) -> Result<(Complex64, Complex64)> {
    let (f, g) = (&star.f, &star.g);
    let ru = weighted(rep, |j| Ok(f[j] * g[j] * f[(j + 3) % 6] / star.checked_denominator(j)?))?;
    let rv = weighted(rep, |j| Ok(g[j] * f[(j + 3) % 6] * g[(j + 3) % 6] / star.checked_denominator(j)?))?;
    Ok((ru - params.alpha * u, rv - params.beta * v))
}

/// Right-hand side of the `w` constraint minus `gamma w`.
pub fn constraint_residual_w(star: &StarData, w: Complex64, params: &ConstraintParams, rep: Triple) -> Result<Complex64> {
    let rw = weighted(rep, |j| Ok(star.checked_denominator(j)?.inv()))?;
    Ok(rw - params.gamma * w)
}

fn pair_term(a: &[Complex64; 6], b: &[Complex64; 6], j: usize, at: LatticePoint) -> Result<Complex64> {
    let k = (j + 3) % 6;
    let d = a[j] * b[j] + b[j] * a[k] + a[k] * b[k];
    if d.norm() == 0.0 || !d.is_finite() {
        return Err(Error::SingularDenominator { at });
    }
    Ok(a[j] * b[j] * a[k] / d)
}

/// The `v` and `w` constraints written with `h`: the `u` constraint under
/// `(f, g, h) -> (g, h, f)` once and twice. Returns `(r2, r3)`.
pub fn constraint_residual_alt(
    star: &StarData,
    v: Complex64,
    w: Complex64,
    params: &ConstraintParams,
    rep: Triple,
) -> Result<(Complex64, Complex64)> {
    let rv = weighted(rep, |j| pair_term(&star.g, &star.h, j, star.center))?;
    let rw = weighted(rep, |j| pair_term(&star.h, &star.f, j, star.center))?;
    Ok((rv - params.beta * v, rw - params.gamma * w))
}

/// The constraint for a single field from its own star differences `d`:
/// `coeff x = sum_j n_j d_j d(j+3) (d(j+1) + d(j+2)) / ((d_j - d(j+2)) (d(j+1) - d(j+3)))`.
pub fn one_field_constraint_residual(
    d: &[Complex64; 6],
    value: Complex64,
    coeff: Complex64,
    rep: Triple,
    at: LatticePoint,
) -> Result<Complex64> {
    let r = weighted(rep, |j| {
        let x = |i: usize| d[(j + i) % 6];
        let den = (x(0) - x(2)) * (x(1) - x(3));
        if den.norm() == 0.0 {
            return Err(Error::SingularDenominator { at });
        }
        Ok(x(0) * x(3) * (x(1) + x(2)) / den)
    })?;
    Ok(r - coeff * value)
}

/// `(f0 + f1)(f2 + f3)(f4 + f5) - (f1 + f2)(f3 + f4)(f5 + f0)`, relative to the larger product.
pub fn hexagon_identity_residual(f: &[Complex64; 6]) -> f64 {
    let a = (f[0] + f[1]) * (f[2] + f[3]) * (f[4] + f[5]);
    let b = (f[1] + f[2]) * (f[3] + f[4]) * (f[5] + f[0]);
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    K,
    L,
}

impl Axis {
    pub fn point(self, j: i64) -> LatticePoint {
        match self {
            Axis::K => LatticePoint::new(j, 0),
            Axis::L => LatticePoint::new(0, j),
        }
    }
}

/// Fields along a semiaxis: vertex values at `0..=kmax`, edge values at `0..kmax`.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisSequences {
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
    pub h: Vec<Complex64>,
}

/// Runs the axis recurrence from `u(0) = v(0) = 0`, `f(0) = u(1)`, `g(0) = v(1)`.
///
/// The `l`-axis uses the same recurrence seeded with `u(omega)`, `v(omega)`;
/// `axis` only records which lattice points the result belongs to.
pub fn axis_solve(params: &ConstraintParams, u1: Complex64, v1: Complex64, kmax: usize, _axis: Axis) -> Result<AxisSequences> {
    let (a, b) = (params.alpha, params.beta);
    let mut u = vec![c(0.0), u1];
    let mut v = vec![c(0.0), v1];
    let mut f = vec![u1];
    let mut g = vec![v1];
    for k in 1..kmax {
        if k >= 2 {
            u.push(u[k - 1] + f[k - 1]);
            v.push(v[k - 1] + g[k - 1]);
        }
        let bv = b * v[k];
        let den = k as f64 - a * u[k] / f[k - 1] - bv / g[k - 1];
        let scale = (k as f64).max((a * u[k] / f[k - 1]).norm());
        if bv.norm() == 0.0 || den.norm() <= 1e-14 * scale || !den.is_finite() {
            return Err(Error::SingularStep { k });
        }
        f.push(a * u[k] / bv * g[k - 1]);
        g.push(bv / den);
    }
    if kmax >= 2 {
        let k = kmax;
        u.push(u[k - 1] + f[k - 1]);
        v.push(v[k - 1] + g[k - 1]);
    }
    u.truncate(kmax + 1);
    v.truncate(kmax + 1);
    let h: Vec<Complex64> = f.iter().zip(&g).map(|(x, y)| (x * y).inv()).collect();
    let mut w = vec![c(0.0)];
    for hk in &h {
        w.push(w.last().expect("nonempty") + hk);
    }
    Ok(AxisSequences { u, v, w, f, g, h })
}

/// Running products `Pi1(k)`, `Pi2(k)`, `Pi3(k)` for `k = 0..=kmax`.
fn pi_products(alpha: f64, kmax: usize) -> Result<[Vec<f64>; 3]> {
    let pole = |x: f64, k: usize| if x.abs() <= POLE_TOL { Err(Error::PoleAt { alpha, k }) } else { Ok(x) };
    let mut p1 = vec![1.0];
    let mut p2 = vec![1.0];
    let mut p3 = vec![1.0];
    for k in 1..=kmax {
        let j = k as f64;
        p1.push(p1[k - 1] * (j + 2.0 * alpha) / pole(j - alpha, k)?);
        p2.push(p2[k - 1] * (j + alpha) / pole(j - 2.0 * alpha, k)?);
        let den = pole(j - 1.0 + alpha, k)? * pole(j - 1.0 + 2.0 * alpha, k)?;
        p3.push(p3[k - 1] * (j - alpha) * (j - 2.0 * alpha) / den);
    }
    Ok([p1, p2, p3])
}

/// Closed-form axis values for `beta = alpha`, `u(1) = v(1) = 1`, positions `0..=nmax`.
pub fn closed_form_axis(alpha: f64, nmax: usize) -> Result<AxisSequences> {
    if alpha.abs() <= POLE_TOL || (1.0 - 2.0 * alpha).abs() <= POLE_TOL {
        return Err(Error::PoleAt { alpha, k: 0 });
    }
    let kmax = nmax / 3 + 2;
    let [p1, p2, p3] = pi_products(alpha, kmax)?;
    let a = alpha;
    let pole = |x: f64, k: usize| if x.abs() <= POLE_TOL { Err(Error::PoleAt { alpha, k }) } else { Ok(x) };
    let gm = 1.0 - 2.0 * a;
    let mut s = AxisSequences { u: vec![], v: vec![], w: vec![], f: vec![], g: vec![], h: vec![] };
    for n in 0..=nmax {
        let (k, r) = (n / 3, n % 3);
        let kf = k as f64;
        let u = match r {
            0 => 2.0 * kf / pole(kf + 2.0 * a, k)? * p1[k],
            1 => (2.0 * kf + 2.0 * a) / pole(kf + 2.0 * a, k)? * p1[k],
            _ => 2.0 * p1[k],
        };
        // v and w are grouped as 3k-1, 3k, 3k+1
        let (kv, rv) = ((n + 1) / 3, (n + 1) % 3);
        let kvf = kv as f64;
        let v = match rv {
            0 => (kvf - a) / pole(kvf + a, kv)? * p2[kv],
            1 => kvf / pole(kvf + a, kv)? * p2[kv],
            _ => p2[kv],
        };
        let w = match rv {
            0 => (kvf - 1.0 + 2.0 * a) / gm * p3[kv],
            1 => kvf / gm * p3[kv],
            _ => (kvf + 1.0 - 2.0 * a) / gm * p3[kv],
        };
        s.u.push(c(u));
        s.v.push(c(v));
        s.w.push(c(w));
        if n < nmax {
            let f = 2.0 * a / pole(kvf + 2.0 * a, kv)? * p1[kv];
            // g groups as 3k-2, 3k-1, 3k
            let kg = (n + 2) / 3;
            let g = a / pole(kg as f64 + a, kg)? * p2[kg];
            let h = match rv {
                0 | 1 => p3[kv],
                _ => (kvf + 1.0 - 2.0 * a) / pole(kvf + a, kv)? * p3[kv],
            };
            s.f.push(c(f));
            s.g.push(c(g));
            s.h.push(c(h));
        }
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitCase {
    /// `alpha -> 1/2`: `u = u°`, `v = v°/(1 - 2 alpha)`, `w = 1 + (1 - 2 alpha) w°`.
    Half,
    /// `alpha -> 0`: `u = 2 + 2 alpha u°`, `v = 1 + alpha v°`, `w = w°/(2 alpha^2)`.
    Zero,
}

/// Rescaled axis values in a limit case; `None` marks an infinite value.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitAxis {
    pub u: Vec<Option<f64>>,
    pub v: Vec<Option<f64>>,
    pub w: Vec<Option<f64>>,
    pub f: Vec<Option<f64>>,
    pub g: Vec<Option<f64>>,
    pub h: Vec<Option<f64>>,
}

fn diffs(x: &[Option<f64>]) -> Vec<Option<f64>> {
    x.windows(2).map(|p| Some(p[1]? - p[0]?)).collect()
}

fn integrate_from(start: usize, first: Option<f64>, steps: &[Option<f64>], n: usize) -> Vec<Option<f64>> {
    let mut x = vec![None; n + 1];
    if start <= n {
        x[start] = first;
    }
    for j in start + 1..=n {
        x[j] = match (x[j - 1], steps.get(j - 1).copied().flatten()) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
    }
    x
}

/// Closed-form limit values on the `k`-axis, positions `0..=nmax`.
pub fn closed_form_axis_limits(case: LimitCase, nmax: usize) -> LimitAxis {
    match case {
        LimitCase::Half => {
            // c_k = 2^k k!/(2k-1)!!, d_k = (2k-1)!!/(2^k (k-1)!)
            let kmax = nmax / 3 + 2;
            let mut ck = vec![1.0];
            let mut dk = vec![f64::NAN, 0.5];
            for k in 1..=kmax {
                let kf = k as f64;
                ck.push(ck[k - 1] * 2.0 * kf / (2.0 * kf - 1.0));
                if k >= 2 {
                    dk.push(dk[k - 1] * (2.0 * kf - 1.0) / (2.0 * (kf - 1.0)));
                }
            }
            let u: Vec<Option<f64>> = (0..=nmax)
                .map(|n| {
                    let (k, r) = (n / 3, n % 3);
                    Some(ck[k] * (2 * k + r) as f64)
                })
                .collect();
            let v: Vec<Option<f64>> = (0..=nmax)
                .map(|n| {
                    if n <= 1 {
                        return Some(0.0);
                    }
                    let k = (n + 1) / 3;
                    Some(dk[k] * (2 * k + (n + 1) % 3 - 1) as f64)
                })
                .collect();
            let h: Vec<Option<f64>> = (0..nmax)
                .map(|n| match n {
                    0 => None,
                    _ => {
                        let k = (n + 1) / 3;
                        if (n + 1) % 3 == 2 {
                            Some(1.0 / (k as f64 + 0.5))
                        } else {
                            Some(1.0 / k as f64)
                        }
                    }
                })
                .collect();
            let w = {
                let mut w = integrate_from(1, Some(0.0), &h, nmax);
                w[0] = None;
                w
            };
            LimitAxis { f: diffs(&u), g: diffs(&v), u, v, w, h }
        }
        LimitCase::Zero => {
            let f: Vec<Option<f64>> = (0..nmax).map(|n| if n < 2 { None } else { Some(1.0 / ((n + 1) / 3) as f64) }).collect();
            let g: Vec<Option<f64>> = (0..nmax).map(|n| if n < 1 { None } else { Some(1.0 / ((n + 2) / 3) as f64) }).collect();
            let u = integrate_from(2, Some(0.0), &f, nmax);
            let v = integrate_from(1, Some(0.0), &g, nmax);
            let w: Vec<Option<f64>> = (0..=nmax)
                .map(|n| {
                    if n <= 2 {
                        return Some(0.0);
                    }
                    let (k, r) = ((n / 3) as f64, n % 3);
                    Some(match r {
                        0 => k * k * k,
                        1 => k * k * (k + 1.0),
                        _ => k * (k + 1.0) * (k + 1.0),
                    })
                })
                .collect();
            LimitAxis { h: diffs(&w), f, g, u, v, w }
        }
    }
}

/// A constrained solution on the sector `0 <= k, l <= n`.
#[derive(Clone, Debug)]
pub struct ConstrainedSolution {
    pub params: ConstraintParams,
    pub u: VertexField,
    pub v: VertexField,
    pub w: VertexField,
    pub n: usize,
}

/// Axes from the constraint, interior by the fourth-point rule, `w` by edge integration.
pub fn solve_constrained_sector(
    params: &ConstraintParams,
    u1: Complex64,
    v1: Complex64,
    u_omega: Complex64,
    v_omega: Complex64,
    n: usize,
) -> Result<ConstrainedSolution> {
    let ka = axis_solve(params, u1, v1, n, Axis::K)?;
    let la = axis_solve(params, u_omega, v_omega, n, Axis::L)?;
    let mut u = VertexField::new(FieldTag::U);
    let mut v = VertexField::new(FieldTag::V);
    for j in 0..=n {
        u.set(Axis::K.point(j as i64), ka.u[j]);
        v.set(Axis::K.point(j as i64), ka.v[j]);
        u.set(Axis::L.point(j as i64), la.u[j]);
        v.set(Axis::L.point(j as i64), la.v[j]);
    }
    fill_sector(&mut u, &mut v, n)?;
    let w = third_field(&u, &v, LatticePoint::ORIGIN, c(0.0))?;
    Ok(ConstrainedSolution { params: *params, u, v, w, n })
}

/// Worst constraint residuals over the vertices of a solution whose stars are complete.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub alt: f64,
    pub one_field: f64,
    /// Largest change of `(r1, r2)` between the representatives `n = -1, 0, 1`.
    pub representative_spread: f64,
    pub hexagon_identity: f64,
    pub vertices: usize,
}

impl ConstraintReport {
    pub fn max(&self) -> f64 {
        [self.u, self.v, self.w, self.alt, self.one_field].into_iter().fold(0.0, f64::max)
    }
}

pub fn constraint_report(sol: &ConstrainedSolution) -> ConstraintReport {
    let mut rep = ConstraintReport::default();
    let p = &sol.params;
    for z in sol.u.points().collect::<Vec<_>>() {
        let Ok(star) = StarData::from_fields(&sol.u, &sol.v, z) else { continue };
        let (Some(u), Some(v), Some(w)) = (sol.u.finite(z), sol.v.finite(z), sol.w.finite(z)) else { continue };
        let Ok(hd) = star_differences(&sol.w, z) else { continue };
        let base = z.representative(0);
        let Ok((r1, r2)) = constraint_residual(&star, u, v, p, base) else { continue };
        let Ok(r3) = constraint_residual_w(&star, w, p, base) else { continue };
        rep.vertices += 1;
        rep.u = rep.u.max(r1.norm());
        rep.v = rep.v.max(r2.norm());
        rep.w = rep.w.max(r3.norm());
        if let Ok((a2, a3)) = constraint_residual_alt(&star, v, w, p, base) {
            rep.alt = rep.alt.max(a2.norm()).max(a3.norm());
        }
        for (d, x, coeff) in [(&star.f, u, p.alpha), (&star.g, v, p.beta), (&hd, w, p.gamma)] {
            if let Ok(r) = one_field_constraint_residual(d, x, coeff, base, z) {
                rep.one_field = rep.one_field.max(r.norm());
            }
        }
        for n in [-1, 1] {
            if let Ok((s1, s2)) = constraint_residual(&star, u, v, p, z.representative(n)) {
                rep.representative_spread = rep.representative_spread.max((s1 - r1).norm()).max((s2 - r2).norm());
            }
        }
        rep.hexagon_identity = rep.hexagon_identity.max(hexagon_identity_residual(&star.f));
    }
    rep
}

/// `|u(3k-1) - u(3k-2)| = |u(3k-2) - u(3k-3)|` with the `v`, `w` analogues shifted by one
/// and two; returns the worst absolute mismatch over the sequence.
pub fn equidistance_residual(s: &AxisSequences) -> f64 {
    let mut worst: f64 = 0.0;
    for (x, shift) in [(&s.u, 0usize), (&s.v, 1), (&s.w, 2)] {
        let mut k = 1;
        while 3 * k + shift - 1 < x.len() {
            let i = 3 * k + shift - 1;
            let a = (x[i] - x[i - 1]).norm();
            let b = (x[i - 1] - x[i - 2]).norm();
            worst = worst.max((a - b).abs());
            k += 1;
        }
    }
    worst
}

/// `Q`: the only nonzero entry is a one in the bottom left corner.
pub fn matrix_q() -> M3 {
    let mut q = [[c(0.0); 3]; 3];
    q[2][0] = c(1.0);
    q
}

/// Right null vector `xi = (f g, -g, 1)` and left null vector `eta = (1, -f, f g)` of `L(-1)`.
pub fn null_vectors(f: Complex64, g: Complex64) -> ([Complex64; 3], [Complex64; 3]) {
    ([f * g, -g, c(1.0)], [c(1.0), -f, f * g])
}

/// `P_j = xi_j eta_(j+3)^T / D_j`.
pub fn projector(star: &StarData, j: usize) -> Result<M3> {
    let (xi, _) = null_vectors(star.f[j], star.g[j]);
    let (_, eta) = null_vectors(star.f[(j + 3) % 6], star.g[(j + 3) % 6]);
    let d = star.checked_denominator(j)?;
    let mut p = [[c(0.0); 3]; 3];
    for r in 0..3 {
        for s in 0..3 {
            p[r][s] = xi[r] * eta[s] / d;
        }
    }
    Ok(p)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsoMatrices {
    pub rep: Triple,
    pub c: M3,
    pub d: M3,
    pub p: [M3; 3],
}

impl IsoMatrices {
    /// `A(mu) = C/(1 + mu) + D/mu`.
    pub fn a_matrix(&self, mu: Complex64) -> M3 {
        let mut m = [[c(0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.c[i][j] / (1.0 + mu) + self.d[i][j] / mu;
            }
        }
        m
    }
}

/// `C = k P0 + l P2 + m P4` and the upper triangular `D` with `d13 = beta a - alpha a'`.
pub fn build_iso_matrices(
    u: &VertexField,
    v: &VertexField,
    forms: &QuadraticForms,
    params: &ConstraintParams,
    rep: Triple,
) -> Result<IsoMatrices> {
    let z = rep.canonical();
    let star = StarData::from_fields(u, v, z)?;
    let p = [projector(&star, 0)?, projector(&star, 2)?, projector(&star, 4)?];
    let mut cm = [[c(0.0); 3]; 3];
    for (pj, n) in p.iter().zip([rep.k, rep.l, rep.m]) {
        for i in 0..3 {
            for j in 0..3 {
                cm[i][j] += pj[i][j] * n as f64;
            }
        }
    }
    let (a, b) = (params.alpha, params.beta);
    let aa = *forms.a.get(&z).ok_or(Error::MissingValue { at: z })?;
    let ap = *forms.a_prime.get(&z).ok_or(Error::MissingValue { at: z })?;
    let zero = c(0.0);
    let d = [
        [-(2.0 * a + b) / 3.0, a * u.require(z)?, b * aa - a * ap],
        [zero, (a - b) / 3.0, b * v.require(z)?],
        [zero, zero, (2.0 * b + a) / 3.0],
    ];
    Ok(IsoMatrices { rep, c: cm, d, p })
}

fn l_at(f: Complex64, g: Complex64, mu: f64) -> M3 {
    let z = c(0.0);
    let one = c(1.0);
    [[one, f, z], [z, one, g], [(f * g).inv() * mu, z, one]]
}

fn add(a: &M3, b: &M3) -> M3 {
    let mut m = *a;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] += b[i][j];
        }
    }
    m
}

/// Worst residuals of the compatibility equations over a window.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IsoAudit {
    /// `C' L(e, -1) = L(e, -1) C` along `e0`, `e2`, `e4`.
    pub c: [f64; 3],
    /// `D' L(e, 0) = L(e, 0) D`.
    pub d: [f64; 3],
    /// `(C' + D') Q - Q (C + D) = Q`.
    pub cd: [f64; 3],
    /// `|P0 + P2 + P4 - I|`.
    pub projector_sum: f64,
    /// `|P^2 - P|`, `|tr P - 1|`.
    pub projector_shape: f64,
    /// `|L(-1) xi|`, `|eta^T L(-1)|`.
    pub null_vectors: f64,
    /// `|c12 + d12 + r1|`, `|c23 + d23 + r2|`: these entries are the constraint.
    pub cd_vs_constraint: f64,
    /// Difference form of `c13 + d13 = 0` along `k`, `l`, and `m` with `c13` read at both points.
    pub cd13: [f64; 3],
    /// The `m` equation read with `c11` at the base point.
    pub cd13_m_c11_reading: f64,
    /// `c33' - c11 + d33 - d11 = 1` along `k`, `l`, `m`.
    pub cd11_33: [f64; 3],
    pub points: usize,
}

impl IsoAudit {
    pub fn max(&self) -> f64 {
        self.c
            .iter()
            .chain(&self.d)
            .chain(&self.cd)
            .chain(&self.cd13)
            .chain(&self.cd11_33)
            .chain([&self.projector_sum, &self.projector_shape, &self.null_vectors, &self.cd_vs_constraint])
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Audits the isomonodromy equations at every `window` point whose neighbors have complete stars.
pub fn audit_iso_equations(
    u: &VertexField,
    v: &VertexField,
    forms: &QuadraticForms,
    params: &ConstraintParams,
    window: &[LatticePoint],
) -> IsoAudit {
    let mut out = IsoAudit::default();
    let q = matrix_q();
    for &z in window {
        let base = z.representative(0);
        let neighbors = [
            (z.offset(1, 0), Triple::new(base.k + 1, base.l, 0)),
            (z.offset(0, 1), Triple::new(base.k, base.l + 1, 0)),
            (z.offset(-1, -1), Triple::new(base.k, base.l, 1)),
        ];
        let Ok(m0) = build_iso_matrices(u, v, forms, params, base) else { continue };
        let mut ms = Vec::with_capacity(3);
        for (p, rep) in neighbors {
            debug_assert_eq!(rep.canonical(), p);
            match build_iso_matrices(u, v, forms, params, rep) {
                Ok(m) => ms.push(m),
                Err(_) => break,
            }
        }
        if ms.len() < 3 {
            continue;
        }
        let Ok(star) = StarData::from_fields(u, v, z) else { continue };
        out.points += 1;
        let psum = add(&add(&m0.p[0], &m0.p[1]), &m0.p[2]);
        out.projector_sum = out.projector_sum.max(mat_dist(&psum, &identity()));
        for p in &m0.p {
            let sq = mat_mul(p, p);
            let tr = p[0][0] + p[1][1] + p[2][2];
            out.projector_shape = out.projector_shape.max(mat_dist(&sq, p)).max((tr - 1.0).norm());
        }
        for (i, t) in [0usize, 2, 4].into_iter().enumerate() {
            let (f, g) = (star.f[t], star.g[t]);
            let lm = l_at(f, g, -1.0);
            let l0 = l_at(f, g, 0.0);
            let (xi, eta) = null_vectors(f, g);
            for r in 0..3 {
                let right: Complex64 = (0..3).map(|s| lm[r][s] * xi[s]).sum();
                let left: Complex64 = (0..3).map(|s| eta[s] * lm[s][r]).sum();
                out.null_vectors = out.null_vectors.max(right.norm()).max(left.norm());
            }
            let m1 = &ms[i];
            out.c[i] = out.c[i].max(mat_dist(&mat_mul(&m1.c, &lm), &mat_mul(&lm, &m0.c)));
            out.d[i] = out.d[i].max(mat_dist(&mat_mul(&m1.d, &l0), &mat_mul(&l0, &m0.d)));
            let lhs = {
                let x = mat_mul(&add(&m1.c, &m1.d), &q);
                let y = mat_mul(&q, &add(&m0.c, &m0.d));
                let mut r = x;
                for a in 0..3 {
                    for b in 0..3 {
                        r[a][b] -= y[a][b];
                    }
                }
                r
            };
            out.cd[i] = out.cd[i].max(mat_dist(&lhs, &q));
            let cd13 = m1.c[0][2] - m0.c[0][2] + m1.d[0][2] - m0.d[0][2];
            out.cd13[i] = out.cd13[i].max(cd13.norm());
            if i == 2 {
                let alt = m1.c[0][2] - m0.c[0][0] + m1.d[0][2] - m0.d[0][2];
                out.cd13_m_c11_reading = out.cd13_m_c11_reading.max(alt.norm());
            }
            let e = m1.c[2][2] - m0.c[0][0] + m0.d[2][2] - m0.d[0][0] - 1.0;
            out.cd11_33[i] = out.cd11_33[i].max(e.norm());
        }
        if let (Ok(uz), Ok(vz)) = (u.require(z), v.require(z)) {
            if let Ok((r1, r2)) = constraint_residual(&star, uz, vz, params, base) {
                let e1 = (m0.c[0][1] + m0.d[0][1] + r1).norm();
                let e2 = (m0.c[1][2] + m0.d[1][2] + r2).norm();
                out.cd_vs_constraint = out.cd_vs_constraint.max(e1).max(e2);
            }
        }
    }
    out
}

/// Residuals of the single-field identities used to derive the `w` constraint
/// and the projector intertwining, at `z` and `z + 1`.
///
/// Returns relative residuals, in order: the `h`-expressions for the `l`-term
/// numerators at `z + 1` and `z`, for the denominators `D2` at `z + 1` and `z`,
/// `h~4 - h~2 = h1 - h5`, the projector ratio identity, and the four rational
/// relations between edge values at `z` and `z + 1`.
pub fn star_identities(u: &VertexField, v: &VertexField, z: LatticePoint) -> Result<[f64; 10]> {
    let s = StarData::from_fields(u, v, z)?;
    let t = StarData::from_fields(u, v, z.offset(1, 0))?;
    let (f, g, h) = (&s.f, &s.g, &s.h);
    let (ft, gt, ht) = (&t.f, &t.g, &t.h);
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / a.norm().max(b.norm()).max(1e-300);
    Ok([
        rel(
            ft[2] * gt[2] * ft[5] / f[0] + ft[5] * gt[5] * gt[2] / g[0],
            -ht[5].inv() + h[0] * (h[0] - ht[5]) / (ht[2] * ht[5] * h[5]),
        ),
        rel(f[2] * g[2] * f[5] / f[0] + f[5] * g[5] * g[2] / g[0], -h[2].inv() + h[0] * (h[0] - h[2]) / (ht[2] * h[2] * h[5])),
        rel(t.denominator(2), (h[0] - ht[5]) * (ht[4] - ht[2]) / (ht[2] * ht[5] * h[5])),
        rel(s.denominator(2), (h[0] - h[2]) * (h[1] - h[5]) / (ht[2] * h[2] * h[5])),
        rel(ht[4] - ht[2], h[1] - h[5]),
        rel((1.0 - h[0] / ht[5]) / t.denominator(2), (1.0 - h[0] / h[2]) / s.denominator(2)),
        rel(ft[2], g[2] * (f[0] - f[2]) / (g[0] - g[2])),
        rel(gt[2], h[2] * (g[0] - g[2]) / (h[0] - h[2])),
        rel(ht[5], f[5] * (h[0] - ht[5]) / (f[0] - ft[5])),
        rel(ft[5], g[5] * (f[0] - ft[5]) / (g[0] - gt[5])),
    ])
}
