//! Transition matrices, wave functions and the closed forms they carry.
//!
//! Edge matrices are kept in the polynomial gauge
//! `L(mu) = [[1, f, 0], [0, 1, g], [mu h, 0, 1]]`, `det = 1 + mu`.
//! The loop-group gauge `L(lambda) = (1 + lambda^3)^(-1/3) [[1, lambda f, 0], ...]`
//! is related entrywise by `L_ij(lambda) = s(lambda) lambda^(j-i) L_ij(lambda^3)`,
//! so its Taylor coefficients at `lambda = 0` are read off the polynomial ones.
//!
//! Inverse steps use `L^-1 = adj(L) / (1 + mu)`; a wave function stores the
//! polynomial part and the number of such divisions separately.

use crate::error::{Error, Result};
use crate::fgh::{edge_fields, EdgeFieldTriple, FieldTag, VertexField};
use crate::geometry::TAU;
use crate::lattice::{omega, LatticePoint, OrientedEdge, Triangle, STEPS};
use num_complex::Complex64;
use std::collections::{BTreeMap, VecDeque};
use std::ops::{Add, Mul, Sub};

pub type M3 = [[Complex64; 3]; 3];

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn identity() -> M3 {
    let mut m = [[zero(); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = one();
    }
    m
}

pub fn mat_mul(a: &M3, b: &M3) -> M3 {
    let mut m = [[zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

/// Max-entry distance.
pub fn mat_dist(a: &M3, b: &M3) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}

pub fn mat_scale(a: &M3, s: Complex64) -> M3 {
    a.map(|row| row.map(|x| x * s))
}

pub fn det3(m: &M3) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// A polynomial in `mu` with complex coefficients, lowest degree first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Complex64) -> Self {
        Poly(vec![c])
    }

    pub fn monomial(c: Complex64, deg: usize) -> Self {
        let mut v = vec![zero(); deg + 1];
        v[deg] = c;
        Poly(v)
    }

    /// `(1 + mu)^n`.
    pub fn one_plus_mu_pow(n: usize) -> Self {
        let mut p = Poly::constant(one());
        for _ in 0..n {
            p = &p * &Poly(vec![one(), one()]);
        }
        p
    }

    pub fn coeff(&self, i: usize) -> Complex64 {
        self.0.get(i).copied().unwrap_or_else(zero)
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.0.iter().rev().fold(zero(), |acc, c| acc * x + c)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Quotient and remainder of division by `1 + mu`.
    pub fn div_one_plus_mu(&self) -> (Poly, Complex64) {
        if self.0.is_empty() {
            return (Poly::zero(), zero());
        }
        // p = (1 + mu) q + r, solved from the top coefficient down.
        let n = self.0.len() - 1;
        let mut q = vec![zero(); n];
        for i in (1..=n).rev() {
            q[i - 1] = self.0[i] - if i < n { q[i] } else { zero() };
        }
        let rem = self.0[0] - q.first().copied().unwrap_or_else(zero);
        (Poly(q), rem)
    }

    /// Drops trailing coefficients of modulus at most `tol`.
    pub fn trimmed(mut self, tol: f64) -> Self {
        while self.0.last().is_some_and(|c| c.norm() <= tol) {
            self.0.pop();
        }
        self
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        Poly((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        Poly((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.0.is_empty() || rhs.0.is_empty() {
            return Poly::zero();
        }
        let mut v = vec![zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly(v)
    }
}

/// A 3x3 matrix of polynomials in `mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix(pub [[Poly; 3]; 3]);

impl PolyMatrix {
    pub fn identity() -> Self {
        let mut m: [[Poly; 3]; 3] = Default::default();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Poly::constant(one());
        }
        PolyMatrix(m)
    }

    pub fn scalar(p: Poly) -> Self {
        let mut m: [[Poly; 3]; 3] = Default::default();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = p.clone();
        }
        PolyMatrix(m)
    }

    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        &self.0[i][j]
    }

    pub fn eval(&self, mu: Complex64) -> M3 {
        let mut m = [[zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.0[i][j].eval(mu);
            }
        }
        m
    }

    /// The constant matrices multiplying `mu^d`.
    pub fn coeff(&self, d: usize) -> M3 {
        let mut m = [[zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.0[i][j].coeff(d);
            }
        }
        m
    }

    pub fn degree(&self) -> usize {
        self.0.iter().flatten().map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn mul(&self, rhs: &PolyMatrix) -> PolyMatrix {
        let mut m: [[Poly; 3]; 3] = Default::default();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Poly::zero();
                for k in 0..3 {
                    acc = &acc + &(&self.0[i][k] * &rhs.0[k][j]);
                }
                m[i][j] = acc;
            }
        }
        PolyMatrix(m)
    }

    pub fn sub(&self, rhs: &PolyMatrix) -> PolyMatrix {
        let mut m: [[Poly; 3]; 3] = Default::default();
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = &self.0[i][j] - &rhs.0[i][j];
            }
        }
        PolyMatrix(m)
    }

    /// Largest coefficient modulus over all entries.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|p| p.max_abs()).fold(0.0, f64::max)
    }

    /// Adjugate (transposed cofactor matrix).
    pub fn adj(&self) -> PolyMatrix {
        let a = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| &(&a[r0][c0] * &a[r1][c1]) - &(&a[r0][c1] * &a[r1][c0]);
        let mut m: [[Poly; 3]; 3] = Default::default();
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = match j {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let (c0, c1) = match i {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let c = cof(r0, r1, c0, c1);
                m[i][j] = if (i + j) % 2 == 0 { c } else { &Poly::zero() - &c };
            }
        }
        PolyMatrix(m)
    }

    pub fn det(&self) -> Poly {
        let a = &self.0;
        let t = |i: usize, j: usize, k: usize| &(&a[0][i] * &a[1][j]) * &a[2][k];
        let plus = &(&t(0, 1, 2) + &t(1, 2, 0)) + &t(2, 0, 1);
        let minus = &(&t(0, 2, 1) + &t(1, 0, 2)) + &t(2, 1, 0);
        &plus - &minus
    }

    /// Exact division of every entry by `1 + mu`; also returns the largest remainder.
    pub fn div_one_plus_mu(&self) -> (PolyMatrix, f64) {
        let mut m: [[Poly; 3]; 3] = Default::default();
        let mut rem: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let (q, r) = self.0[i][j].div_one_plus_mu();
                m[i][j] = q;
                rem = rem.max(r.norm());
            }
        }
        (PolyMatrix(m), rem)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gauge {
    Lambda,
    Mu,
}

/// The transition matrix of one positively oriented edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionMatrix {
    pub f: Complex64,
    pub g: Complex64,
    pub h: Complex64,
}

impl TransitionMatrix {
    pub fn new(t: EdgeFieldTriple) -> Result<Self> {
        let r = t.unit_residual();
        if !(r <= TAU) {
            return Err(Error::TripleNotUnit(r));
        }
        Ok(TransitionMatrix { f: t.f, g: t.g, h: t.h })
    }

    /// Builds the matrix from `(f, g)` with `h = 1/(f g)`.
    pub fn from_fg(f: Complex64, g: Complex64) -> Self {
        let t = EdgeFieldTriple::new(f, g);
        TransitionMatrix { f: t.f, g: t.g, h: t.h }
    }

    pub fn triple(&self) -> EdgeFieldTriple {
        EdgeFieldTriple { f: self.f, g: self.g, h: self.h }
    }

    pub fn mu_poly(&self) -> PolyMatrix {
        let c = Poly::constant;
        let mut m = PolyMatrix::identity();
        m.0[0][1] = c(self.f);
        m.0[1][2] = c(self.g);
        m.0[2][0] = Poly::monomial(self.h, 1);
        m
    }

    pub fn eval_mu(&self, mu: Complex64) -> M3 {
        self.mu_poly().eval(mu)
    }

    /// `(1 + lambda^3)^(-1/3) [[1, lambda f, 0], [0, 1, lambda g], [lambda h, 0, 1]]`, principal branch.
    pub fn eval_lambda(&self, lambda: Complex64) -> M3 {
        let s = (one() + lambda.powu(3)).powf(-1.0 / 3.0);
        let m = [
            [one(), lambda * self.f, zero()],
            [zero(), one(), lambda * self.g],
            [lambda * self.h, zero(), one()],
        ];
        mat_scale(&m, s)
    }

    pub fn eval(&self, gauge: Gauge, x: Complex64) -> M3 {
        match gauge {
            Gauge::Lambda => self.eval_lambda(x),
            Gauge::Mu => self.eval_mu(x),
        }
    }

    pub fn adj_poly(&self) -> PolyMatrix {
        self.mu_poly().adj()
    }

    /// `|| L(omega lambda) - Omega^-1 L(lambda) Omega ||` with `Omega = diag(1, omega, omega^2)`.
    pub fn twist_residual(&self, lambda: Complex64) -> f64 {
        let w = omega();
        let om = diag([one(), w, w * w]);
        let om_inv = diag([one(), w.conj(), (w * w).conj()]);
        let lhs = self.eval_lambda(w * lambda);
        let rhs = mat_mul(&mat_mul(&om_inv, &self.eval_lambda(lambda)), &om);
        mat_dist(&lhs, &rhs)
    }

    /// The same check with the conjugation written the other way round,
    /// `Omega L(lambda) Omega^-1`; nonzero unless `lambda f = lambda g = lambda h = 0`.
    pub fn twist_residual_reversed(&self, lambda: Complex64) -> f64 {
        let w = omega();
        let om = diag([one(), w, w * w]);
        let om_inv = diag([one(), w.conj(), (w * w).conj()]);
        let lhs = self.eval_lambda(w * lambda);
        let rhs = mat_mul(&mat_mul(&om, &self.eval_lambda(lambda)), &om_inv);
        mat_dist(&lhs, &rhs)
    }
}

fn diag(d: [Complex64; 3]) -> M3 {
    let mut m = [[zero(); 3]; 3];
    for i in 0..3 {
        m[i][i] = d[i];
    }
    m
}

/// Sample points for polynomial identities in `mu`.
pub const MU_SAMPLES: [(f64, f64); 4] = [(0.37, 0.0), (-0.6, 0.2), (0.0, 1.3), (2.1, -0.4)];

/// `max || L3(mu) L2(mu) L1(mu) - (1 + mu) I ||` over the sample points,
/// for the three consecutive positive edges of a triangle.
pub fn check_zero_curvature(t: [EdgeFieldTriple; 3]) -> f64 {
    let mus: Vec<Complex64> = MU_SAMPLES.iter().map(|(re, im)| Complex64::new(*re, *im)).collect();
    zero_curvature_at(t, &mus)
}

/// The same residual at the given values of `mu`.
pub fn zero_curvature_at(t: [EdgeFieldTriple; 3], mus: &[Complex64]) -> f64 {
    let ms = t.map(|e| TransitionMatrix::from_fg(e.f, e.g).mu_poly());
    let prod = ms[2].mul(&ms[1]).mul(&ms[0]);
    mus.iter().map(|mu| mat_dist(&prod.eval(*mu), &mat_scale(&identity(), one() + mu))).fold(0.0, f64::max)
}

/// `Psi = poly / (1 + mu)^inverse_steps`, with step counts for the winding.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    pub poly: PolyMatrix,
    pub forward_steps: usize,
    pub inverse_steps: usize,
}

impl WaveFunction {
    pub fn identity() -> Self {
        WaveFunction { poly: PolyMatrix::identity(), forward_steps: 0, inverse_steps: 0 }
    }

    /// Applies one edge: `L Psi` along the edge, `L^-1 Psi` against it.
    pub fn step(&self, m: &TransitionMatrix, forward: bool) -> Self {
        if forward {
            WaveFunction {
                poly: m.mu_poly().mul(&self.poly),
                forward_steps: self.forward_steps + 1,
                inverse_steps: self.inverse_steps,
            }
        } else {
            WaveFunction {
                poly: m.adj_poly().mul(&self.poly),
                forward_steps: self.forward_steps,
                inverse_steps: self.inverse_steps + 1,
            }
        }
    }

    pub fn eval(&self, mu: Complex64) -> M3 {
        let s = (one() + mu).powi(-(self.inverse_steps as i32));
        mat_scale(&self.poly.eval(mu), s)
    }

    /// Taylor coefficient of `mu^n` of `Psi` around `mu = 0`.
    pub fn taylor(&self, n: usize) -> M3 {
        // (1 + mu)^-d = sum_j binom(-d, j) mu^j
        let d = self.inverse_steps as f64;
        let mut out = [[zero(); 3]; 3];
        let mut b = 1.0;
        for j in 0..=n {
            let c = self.poly.coeff(n - j);
            for r in 0..3 {
                for s in 0..3 {
                    out[r][s] += c[r][s] * b;
                }
            }
            b *= -(d + j as f64) / (j as f64 + 1.0);
        }
        out
    }

    /// Net `(1,1,1)` winding `(forward - inverse) / 3` if the step counts allow one.
    pub fn winding(&self) -> Option<i64> {
        let n = self.forward_steps as i64 - self.inverse_steps as i64;
        (n % 3 == 0).then_some(n / 3)
    }

    /// Measures `n` with `Psi = (1 + mu)^n I`, or `None` if `Psi` is not of that form.
    pub fn loop_exponent(&self, tol: f64) -> Option<i64> {
        let scale = self.poly.max_abs().max(1.0);
        let d = self.poly.0[0][0].clone().trimmed(tol * scale).degree();
        let target = PolyMatrix::scalar(Poly::one_plus_mu_pow(d));
        if self.poly.sub(&target).max_abs() > tol * scale {
            return None;
        }
        Some(d as i64 - self.inverse_steps as i64)
    }
}

/// Transports `start` along consecutive lattice points; returns the value at every point.
pub fn transport<F>(start: &WaveFunction, path: &[LatticePoint], mut triple: F) -> Result<Vec<WaveFunction>>
where
    F: FnMut(OrientedEdge) -> Result<EdgeFieldTriple>,
{
    let mut out = vec![start.clone()];
    for pair in path.windows(2) {
        let e = OrientedEdge::between(pair[0], pair[1]).ok_or(Error::DisconnectedPath { from: pair[0], to: pair[1] })?;
        let (pe, flipped) = e.positive();
        let m = TransitionMatrix::new(triple(pe)?)?;
        let next = out.last().expect("nonempty").step(&m, !flipped);
        out.push(next);
    }
    Ok(out)
}

/// [`transport`] with edge data taken from the fields `u`, `v`.
pub fn transport_fields(u: &VertexField, v: &VertexField, path: &[LatticePoint]) -> Result<Vec<WaveFunction>> {
    transport(&WaveFunction::identity(), path, |e| edge_fields(u, v, e))
}

/// Transport around the elementary hexagon centered at `center`, starting at `center + 1`.
pub fn hexagon_loop(u: &VertexField, v: &VertexField, center: LatticePoint) -> Result<WaveFunction> {
    let path: Vec<LatticePoint> = (0..=6).map(|t| center.step(t % 6)).collect();
    Ok(transport_fields(u, v, &path)?.pop().expect("nonempty"))
}

/// Wave function values over a domain, normalized to `I` at `base`.
#[derive(Clone, Debug)]
pub struct WaveField {
    pub base: LatticePoint,
    pub values: BTreeMap<LatticePoint, WaveFunction>,
}

/// Builds `Psi` on every point reachable from `base` through edges with known fields.
pub fn wave_field(u: &VertexField, v: &VertexField, base: LatticePoint) -> Result<WaveField> {
    let mut values = BTreeMap::new();
    values.insert(base, WaveFunction::identity());
    let mut queue = VecDeque::from([base]);
    while let Some(p) = queue.pop_front() {
        for (t, _) in STEPS.iter().enumerate() {
            let q = p.step(t);
            if values.contains_key(&q) || u.finite(q).is_none() || v.finite(q).is_none() {
                continue;
            }
            let (pe, flipped) = OrientedEdge::new(p, t).positive();
            let Ok(triple) = edge_fields(u, v, pe) else { continue };
            let m = TransitionMatrix::new(triple)?;
            let next = values[&p].step(&m, !flipped);
            values.insert(q, next);
            queue.push_back(q);
        }
    }
    Ok(WaveField { base, values })
}

/// Regularity of `Psi` at `lambda = 0`: `Psi(0) = I`, i.e. the constant
/// coefficient is unipotent upper triangular.
fn shape_residual(psi: &WaveFunction) -> f64 {
    let c0 = psi.taylor(0);
    let mut r: f64 = 0.0;
    for i in 0..3 {
        r = r.max((c0[i][i] - 1.0).norm());
        for j in 0..i {
            r = r.max(c0[i][j].norm());
        }
    }
    r
}

/// The first and second `lambda`-derivatives at `lambda = 0`.
///
/// Returns `(u, v, w)` from `dPsi/dlambda` and `(a, b, c)` from `1/2 d^2 Psi / dlambda^2`.
pub fn lambda_jets(psi: &WaveFunction) -> Result<([Complex64; 3], [Complex64; 3])> {
    let r = shape_residual(psi);
    if r > TAU * psi.poly.max_abs().max(1.0) {
        return Err(Error::ShapeViolation(r));
    }
    let c0 = psi.taylor(0);
    let c1 = psi.taylor(1);
    Ok(([c0[0][1], c0[1][2], c1[2][0]], [c0[0][2], c1[1][0], c1[2][1]]))
}

/// Recovers `(u, v, w)` from the first `lambda`-derivative of `Psi`; they vanish at the base.
pub fn sym_extract(psi: &WaveField) -> Result<(VertexField, VertexField, VertexField)> {
    let mut u = VertexField::new(FieldTag::U);
    let mut v = VertexField::new(FieldTag::V);
    let mut w = VertexField::new(FieldTag::W);
    for (p, wf) in &psi.values {
        let ([a, b, c], _) = lambda_jets(wf)?;
        u.set(*p, a);
        v.set(*p, b);
        w.set(*p, c);
    }
    Ok((u, v, w))
}

/// `(a, b, c)` from `1/2 d^2 Psi / dlambda^2`.
pub fn sym_second(psi: &WaveField) -> Result<[BTreeMap<LatticePoint, Complex64>; 3]> {
    let mut out: [BTreeMap<LatticePoint, Complex64>; 3] = Default::default();
    for (p, wf) in &psi.values {
        let (_, second) = lambda_jets(wf)?;
        for (m, x) in out.iter_mut().zip(second) {
            m.insert(*p, x);
        }
    }
    Ok(out)
}

/// The six exact forms and the worst closure residual found while integrating them.
#[derive(Clone, Debug, Default)]
pub struct QuadraticForms {
    pub a: BTreeMap<LatticePoint, Complex64>,
    pub b: BTreeMap<LatticePoint, Complex64>,
    pub c: BTreeMap<LatticePoint, Complex64>,
    pub a_prime: BTreeMap<LatticePoint, Complex64>,
    pub b_prime: BTreeMap<LatticePoint, Complex64>,
    pub c_prime: BTreeMap<LatticePoint, Complex64>,
    pub closure: f64,
}

/// Integrates `F(head) - F(tail) = delta(tail, head)` over positive edges from `anchor`.
///
/// Returns the values and the largest relative closure residual over all edges.
pub fn integrate_exact_form<D>(
    domain: &VertexField,
    anchor: LatticePoint,
    delta: D,
) -> (BTreeMap<LatticePoint, Complex64>, f64)
where
    D: Fn(LatticePoint, LatticePoint) -> Option<Complex64>,
{
    let mut vals = BTreeMap::new();
    vals.insert(anchor, zero());
    let mut queue = VecDeque::from([anchor]);
    while let Some(p) = queue.pop_front() {
        for t in 0..6 {
            let q = p.step(t);
            if vals.contains_key(&q) || !domain.contains(q) {
                continue;
            }
            let (pe, flipped) = OrientedEdge::new(p, t).positive();
            if let Some(d) = delta(pe.tail, pe.head) {
                let x = vals[&p] + if flipped { -d } else { d };
                vals.insert(q, x);
                queue.push_back(q);
            }
        }
    }
    let scale = vals.values().map(|z| z.norm()).fold(1.0, f64::max);
    let mut closure: f64 = 0.0;
    for (p, x) in &vals {
        for t in [0, 2, 4] {
            let q = p.step(t);
            if let (Some(y), Some(d)) = (vals.get(&q), delta(*p, q)) {
                closure = closure.max((y - x - d).norm() / scale);
            }
        }
    }
    (vals, closure)
}

fn unprimed<'a>(x: &'a VertexField, y: &'a VertexField) -> impl Fn(LatticePoint, LatticePoint) -> Option<Complex64> + 'a {
    move |p, q| Some(y.finite(p)? * (x.finite(q)? - x.finite(p)?))
}

fn primed<'a>(x: &'a VertexField, y: &'a VertexField) -> impl Fn(LatticePoint, LatticePoint) -> Option<Complex64> + 'a {
    move |p, q| Some(x.finite(q)? * (y.finite(q)? - y.finite(p)?))
}

/// `a, b, c` and `a', b', c'` from `u, v, w`, anchored at zero.
///
/// `a(z2) - a(z1) = v(z1)(u(z2) - u(z1))` and `a'(z2) - a'(z1) = u(z2)(v(z2) - v(z1))`;
/// `b, b'` and `c, c'` follow under `(u, v, w) -> (w, u, v)`.
pub fn quadratic_forms(u: &VertexField, v: &VertexField, w: &VertexField, anchor: LatticePoint) -> Result<QuadraticForms> {
    let (a, r1) = integrate_exact_form(u, anchor, unprimed(u, v));
    let (b, r2) = integrate_exact_form(u, anchor, unprimed(v, w));
    let (c, r3) = integrate_exact_form(u, anchor, unprimed(w, u));
    let (a_prime, r4) = integrate_exact_form(u, anchor, primed(u, v));
    let (b_prime, r5) = integrate_exact_form(u, anchor, primed(v, w));
    let (c_prime, r6) = integrate_exact_form(u, anchor, primed(w, u));
    let closure = [r1, r2, r3, r4, r5, r6].into_iter().fold(0.0, f64::max);
    if closure > 1e-9 {
        return Err(Error::PathDependent { at: anchor, residual: closure });
    }
    Ok(QuadraticForms { a, b, c, a_prime, b_prime, c_prime, closure })
}

/// Relative tolerance for the distinctness hypothesis of the square extension.
pub const DISTINCTNESS_TOL: f64 = 1e-10;

/// Given a flat square `L1 L2 = L3 L4`, returns the diagonal triple `L0` with `L0 L1 L2 = I`
/// up to the factor `(1 + mu)`.
///
/// Labels: `L2` on `z -> z+1`, `L1` on `z+1 -> z+1+omega`, `L4` on `z -> z+omega`,
/// `L3` on `z+omega -> z+1+omega`; `L0` sits on `z+1+omega -> z`.
pub fn square_extension(l: [TransitionMatrix; 4]) -> Result<EdgeFieldTriple> {
    let [l1, l2, l3, l4] = l;
    let p12 = l1.mu_poly().mul(&l2.mu_poly());
    let p34 = l3.mu_poly().mul(&l4.mu_poly());
    let scale = p12.max_abs().max(1.0);
    let flat = p12.sub(&p34).max_abs();
    if flat > TAU * scale {
        return Err(Error::NotFlat(flat));
    }
    for (a, b) in [(l1, l3), (l2, l4)] {
        for (x, y) in [(a.f, b.f), (a.g, b.g), (a.h, b.h)] {
            let d = (x - y).norm();
            if d <= DISTINCTNESS_TOL * x.norm().max(y.norm()) {
                return Err(Error::NotInClass(d));
            }
        }
    }
    let (l0, rem) = p12.adj().div_one_plus_mu();
    let off = [l0.entry(0, 2).max_abs(), l0.entry(1, 0).max_abs(), l0.entry(2, 1).max_abs(), rem]
        .into_iter()
        .fold(0.0, f64::max);
    if off > DISTINCTNESS_TOL * scale * scale {
        return Err(Error::NotInClass(off));
    }
    Ok(EdgeFieldTriple { f: l0.entry(0, 1).coeff(0), g: l0.entry(1, 2).coeff(0), h: l0.entry(2, 0).coeff(1) })
}

/// Edge matrices `(e1, e2)` closing a triangle whose third edge carries `l0`.
///
/// `t` is the free value of `f` on the first edge. Uses `f1 + f2 + f3 = 0`,
/// `f3 g3 = f2 g1` and `f2 g2 = f1 g3`.
pub fn triangle_through(l0: TransitionMatrix, t: Complex64) -> Option<(TransitionMatrix, TransitionMatrix)> {
    let f2 = -l0.f - t;
    if f2.norm() == 0.0 || t.norm() == 0.0 {
        return None;
    }
    let g1 = l0.f * l0.g / f2;
    let g2 = t * l0.g / f2;
    Some((TransitionMatrix::from_fg(t, g1), TransitionMatrix::from_fg(f2, g2)))
}

/// A flat square `L1 L2 = L3 L4` whose diagonal is `l0`, from two triangles
/// through `l0` with first-edge parameters `t` (for `L2`) and `s` (for `L4`).
///
/// A generic pair `L1, L2` only admits the trivial refactorization `L3 = L1`,
/// `L4 = L2`; a second one exists exactly when `(L1 L2)^-1` is in the class,
/// and then it comes in a one-parameter family.
pub fn flat_square_through(l0: TransitionMatrix, t: Complex64, s: Complex64) -> Option<[TransitionMatrix; 4]> {
    let (l2, l1) = triangle_through(l0, t)?;
    let (l4, l3) = triangle_through(l0, s)?;
    Some([l1, l2, l3, l4])
}

/// The four square matrices and the diagonal triple at the cell with corner `z`.
pub fn solution_square(u: &VertexField, v: &VertexField, z: LatticePoint) -> Result<([TransitionMatrix; 4], EdgeFieldTriple)> {
    let e = |p: LatticePoint, t: usize| -> Result<TransitionMatrix> { TransitionMatrix::new(edge_fields(u, v, OrientedEdge::new(p, t))?) };
    let l2 = e(z, 0)?;
    let l1 = e(z.offset(1, 0), 2)?;
    let l4 = e(z, 2)?;
    let l3 = e(z.offset(0, 1), 0)?;
    let l0 = edge_fields(u, v, OrientedEdge::new(z.offset(1, 1), 4))?;
    Ok(([l1, l2, l3, l4], l0))
}

/// The triangle's three edge triples in cycle order.
pub fn triangle_triples(u: &VertexField, v: &VertexField, tri: &Triangle) -> Result<[EdgeFieldTriple; 3]> {
    let e = tri.edges();
    Ok([edge_fields(u, v, e[0])?, edge_fields(u, v, e[1])?, edge_fields(u, v, e[2])?])
}
