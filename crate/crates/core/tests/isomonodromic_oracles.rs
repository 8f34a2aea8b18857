use hexcircles::isomonodromic::{
    axis_solve, closed_form_axis, closed_form_axis_limits, constraint_report, constraint_residual, constraint_residual_w,
    solve_constrained_sector, star_identities, Axis, ConstraintParams, LimitCase, StarData,
};
use hexcircles::lattice::LatticePoint;
use hexcircles::patterns::{generate_limit_pattern, generate_zalpha, half_sector_fit};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

mod common;
use common::printed_tables;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// On the `k`-axis only the `j = 0` star term survives, so the constraint reads
/// `alpha u = k f0 g0 f3 / D`, `beta v = k g0 f3 g3 / D`, `gamma w = k / D`,
/// with `f0 = f(k)` and `f3 = f(k - 1)`.
#[test]
fn closed_form_satisfies_raw_axis_constraint() {
    for alpha in [0.1, 0.2, 0.25, 0.3, 0.4, 0.45] {
        let s = closed_form_axis(alpha, 40).unwrap();
        let gamma = 1.0 - 2.0 * alpha;
        for k in 1..40 {
            let (f0, g0, f3, g3) = (s.f[k], s.g[k], s.f[k - 1], s.g[k - 1]);
            let d = f0 * g0 + g0 * f3 + f3 * g3;
            let kf = k as f64;
            assert!(rel(kf * f0 * g0 * f3 / d, alpha * s.u[k]) < 1e-12, "u alpha={alpha} k={k}");
            assert!(rel(kf * g0 * f3 * g3 / d, alpha * s.v[k]) < 1e-12, "v alpha={alpha} k={k}");
            assert!(rel(kf / d, gamma * s.w[k]) < 1e-12, "w alpha={alpha} k={k}");
            assert!(rel(s.h[k] * s.f[k] * s.g[k], c(1.0, 0.0)) < 1e-13);
            assert!(rel(s.u[k] + s.f[k], s.u[k + 1]) < 1e-13 && rel(s.v[k] + s.g[k], s.v[k + 1]) < 1e-13);
        }
    }
}

#[test]
fn closed_form_matches_recurrence() {
    for alpha in [0.1, 0.25, 0.4] {
        let rec = axis_solve(&ConstraintParams::symmetric(alpha), c(1.0, 0.0), c(1.0, 0.0), 30, Axis::K).unwrap();
        let cf = closed_form_axis(alpha, 30).unwrap();
        for k in 1..=30 {
            assert!(rel(rec.u[k], cf.u[k]) < 1e-10 && rel(rec.v[k], cf.v[k]) < 1e-10, "alpha={alpha} k={k}");
        }
    }
}

#[test]
fn printed_axis_values() {
    for alpha in [0.1, 0.25, 0.4] {
        let s = closed_form_axis(alpha, 6).unwrap();
        assert!((s.u[2] - 2.0).norm() < 1e-12);
        assert!((s.w[2] - (1.0 - alpha) / alpha).norm() < 1e-12);
        assert!((s.v[2] - (1.0 - alpha) / (1.0 - 2.0 * alpha)).norm() < 1e-12);
        assert!((s.u[3] - 2.0 / (1.0 - alpha)).norm() < 1e-12);
    }
    let s = closed_form_axis(0.25, 3).unwrap();
    assert!((s.u[3] - 8.0 / 3.0).norm() < 1e-12);
}

/// Near-origin values of the `z^(3 alpha)` solution in closed form.
fn near_origin(alpha: f64) -> Vec<(LatticePoint, [Complex64; 3])> {
    let e = Complex64::from_polar(1.0, 2.0 * PI * alpha);
    let ei = |t: f64| Complex64::from_polar(1.0, t);
    let one = c(1.0, 0.0);
    let a = alpha;
    let p = LatticePoint::new;
    vec![
        (p(1, 1), [one + e, e / (one + e), ei(PI * (1.0 - 2.0 * a))]),
        (p(0, 1), [e, e, ei(2.0 * PI * (1.0 - 2.0 * a))]),
        (p(0, 2), [2.0 * e, (1.0 - a) / (1.0 - 2.0 * a) * e, (1.0 - a) / a * ei(-4.0 * PI * a)]),
        (p(2, 1), [(one + e) / (1.0 + a * (e - 1.0)), one / (1.0 + a * (e.conj() - 1.0)), -one / (a * (e - 1.0))]),
        (p(1, 2), [(one + e) / (1.0 + a * (e.conj() - 1.0)), e / (1.0 + a * (e - 1.0)), e.conj() / (a * (e - 1.0))]),
        (p(2, 2), [(1.0 - a) / (1.0 - 2.0 * a) * (one + e), 2.0 * e / (one + e), -(1.0 - a) / a * e.conj()]),
    ]
}

#[test]
fn near_origin_values() {
    for alpha in [0.15, 0.3, 0.4] {
        let g = generate_zalpha(alpha, 4).unwrap();
        for (p, [u, v, w]) in near_origin(alpha) {
            assert!(rel(g.u.require(p).unwrap(), u) < 1e-12, "u{p} alpha={alpha}");
            assert!(rel(g.v.require(p).unwrap(), v) < 1e-12, "v{p} alpha={alpha}");
            assert!(rel(g.w.require(p).unwrap(), w) < 1e-12, "w{p} alpha={alpha}");
        }
    }
}

// Limit axes from their own recurrences.

/// `alpha = beta = 1/2`: `f(k) = u(k)/v(k) g(k-1)`, `g(k) = v/2 / (k - u/(2 f(k-1)) - v/(2 g(k-1)))`.
fn z32_oracle(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let (mut u, mut v) = (vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 0.5]);
    let (mut f, mut g) = (vec![1.0, 1.0], vec![f64::NAN, 0.5]);
    for k in 2..n {
        f.push(u[k] / v[k] * g[k - 1]);
        g.push(0.5 * v[k] / (k as f64 - 0.5 * u[k] / f[k - 1] - 0.5 * v[k] / g[k - 1]));
        u.push(u[k] + f[k]);
        v.push(v[k] + g[k]);
    }
    (u, v, f, g)
}

/// `alpha -> 0`: `f(k) = g(k-1)`, `g(k) = 1 / (k - 1/f(k-1) - 1/g(k-1))` from `f(2) = g(2) = 1`.
fn logz3_oracle(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (mut f, mut g) = (vec![f64::NAN, f64::NAN, 1.0], vec![f64::NAN, 1.0, 1.0]);
    for k in 3..n {
        f.push(g[k - 1]);
        g.push(1.0 / (k as f64 - 1.0 / f[k - 1] - 1.0 / g[k - 1]));
    }
    (f, g)
}

#[test]
fn z32_axes_match_recurrence() {
    let n = 40;
    let lim = closed_form_axis_limits(LimitCase::Half, n);
    let (u, v, f, g) = z32_oracle(n);
    let mut w = 0.0;
    for k in 1..n {
        assert!((lim.u[k].unwrap() - u[k]).abs() < 1e-12 * u[k].max(1.0), "u {k}");
        assert!((lim.v[k].unwrap() - v[k]).abs() < 1e-12 * v[k].max(1.0), "v {k}");
        assert!((lim.f[k].unwrap() - f[k]).abs() < 1e-12 * f[k].max(1.0), "f {k}");
        assert!((lim.g[k].unwrap() - g[k]).abs() < 1e-12 * g[k].max(1.0), "g {k}");
        assert!((lim.w[k].unwrap() - w).abs() < 1e-12 * w.max(1.0), "w {k}");
        w += 1.0 / (f[k] * g[k]);
    }
    assert_eq!(lim.w[0], None);
    assert_eq!(lim.u[4], Some(6.0));
    assert!((lim.h[1].unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn logz3_axes_match_recurrence() {
    let n = 30;
    let lim = closed_form_axis_limits(LimitCase::Zero, n);
    let (f, g) = logz3_oracle(n);
    let (mut u, mut v, mut w) = (0.0, 0.0, 0.0);
    assert_eq!(lim.g[1], Some(1.0));
    v += 1.0;
    for k in 2..n {
        assert!((lim.u[k].unwrap() - u).abs() < 1e-12 * u.max(1.0), "u {k}");
        assert!((lim.v[k].unwrap() - v).abs() < 1e-12 * v.max(1.0), "v {k}");
        assert!((lim.w[k].unwrap() - w).abs() < 1e-12 * w.max(1.0), "w {k}");
        u += f[k];
        v += g[k];
        w += 1.0 / (f[k] * g[k]);
    }
    for k in 1..=8usize {
        let kf = k as f64;
        assert!((lim.w[3 * k].unwrap() - kf.powi(3)).abs() < 1e-12);
        assert!((lim.w[3 * k + 1].unwrap() - kf * kf * (kf + 1.0)).abs() < 1e-12);
        assert!((lim.w[3 * k + 2].unwrap() - kf * (kf + 1.0).powi(2)).abs() < 1e-12);
    }
    assert!(lim.u[0].is_none() && lim.u[1].is_none() && lim.v[0].is_none());
}

#[test]
fn limit_patterns_carry_printed_tables() {
    for case in [LimitCase::Half, LimitCase::Zero] {
        let g = generate_limit_pattern(case, 12).unwrap();
        for ((k, l), vals) in printed_tables(case) {
            let p = LatticePoint::new(k, l);
            for (field, want) in g.fields().into_iter().zip(vals) {
                let got = field.get(p).unwrap();
                match want {
                    None => assert!(got.is_infinite(), "{case:?} {} {p}", field.tag),
                    Some((re, im)) => {
                        let z = got.finite().unwrap();
                        assert!((z - c(re, im)).norm() < 1e-12, "{case:?} {} {p}: {z}", field.tag);
                    }
                }
            }
        }
    }
}

/// The rescaled solutions for `alpha` close to `1/2` and `0` approach the tables.
#[test]
fn rescaled_solutions_approach_tables() {
    let one = c(1.0, 0.0);
    let near = |alpha: f64| {
        let e = Complex64::from_polar(1.0, 2.0 * PI * alpha);
        solve_constrained_sector(&ConstraintParams::symmetric(alpha), one, one, e, e, 3).unwrap()
    };
    let d = 1e-5;
    let a = 0.5 - d;
    let s = near(a);
    for ((k, l), vals) in printed_tables(LimitCase::Half) {
        let p = LatticePoint::new(k, l);
        let got = [s.u.require(p).unwrap(), s.v.require(p).unwrap() * (1.0 - 2.0 * a), (s.w.require(p).unwrap() - 1.0) / (1.0 - 2.0 * a)];
        for (z, want) in got.into_iter().zip(vals) {
            if let Some((re, im)) = want {
                assert!((z - c(re, im)).norm() < 1e-3, "half {p}: {z}");
            }
        }
    }
    let a = 1e-4;
    let s = near(a);
    for ((k, l), vals) in printed_tables(LimitCase::Zero) {
        let p = LatticePoint::new(k, l);
        let got = [(s.u.require(p).unwrap() - 2.0) / (2.0 * a), (s.v.require(p).unwrap() - 1.0) / a, s.w.require(p).unwrap() * 2.0 * a * a];
        for (z, want) in got.into_iter().zip(vals) {
            match want {
                Some((re, im)) => assert!((z - c(re, im)).norm() < 1e-2, "zero {p}: {z} {}", (z - c(re, im)).norm()),
                None => assert!(z.norm() > 1e3, "zero {p}: {z}"),
            }
        }
    }
}

#[test]
fn half_sectors_differ_by_similarity() {
    for alpha in [0.2, 0.35] {
        let g = generate_zalpha(alpha, 10).unwrap();
        let fit = half_sector_fit(&g.u, &g.v);
        let want = Complex64::from_polar(1.0, PI * alpha) / (2.0 * (PI * alpha).cos());
        assert!(fit.pairs > 30);
        assert!((fit.factor - want).norm() < 1e-10, "{} vs {want}", fit.factor);
        assert!(fit.residual < 1e-9 * g.u.scale());
    }
}

#[test]
fn asymmetric_parameters_keep_all_constraints() {
    let e = Complex64::from_polar(1.0, 1.1);
    let sol = solve_constrained_sector(&ConstraintParams::real(0.3, 0.2), c(1.0, 0.0), c(0.8, 0.1), e, 0.9 * e, 10).unwrap();
    let r = constraint_report(&sol);
    assert!(r.vertices > 40);
    assert!(r.max() < 1e-8, "{r:?}");
}

#[test]
fn star_identities_on_solution() {
    let g = generate_zalpha(0.3, 8).unwrap();
    for k in 1..6 {
        for l in 1..6 {
            let r = star_identities(&g.u, &g.v, LatticePoint::new(k, l)).unwrap();
            assert!(r.iter().all(|x| *x < 1e-10), "({k}, {l}): {r:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The constraints do not depend on the lift `(k + n, l + n, n)` of a point.
    #[test]
    fn constraints_ignore_representative(
        alpha in 0.1..0.45f64,
        beta in 0.1..0.45f64,
        theta in 0.5..2.5f64,
        k in 1i64..6,
        l in 1i64..6,
        n in -30i64..30,
    ) {
        let e = Complex64::from_polar(1.0, theta);
        let params = ConstraintParams::real(alpha, beta);
        let sol = solve_constrained_sector(&params, c(1.0, 0.0), c(1.0, 0.0), e, e, 7);
        prop_assume!(sol.is_ok());
        let sol = sol.unwrap();
        let p = LatticePoint::new(k, l);
        let star = StarData::from_fields(&sol.u, &sol.v, p);
        prop_assume!(star.is_ok());
        let star = star.unwrap();
        let (u, v, w) = (sol.u.require(p).unwrap(), sol.v.require(p).unwrap(), sol.w.require(p).unwrap());
        let (a0, b0) = constraint_residual(&star, u, v, &params, p.representative(0)).unwrap();
        let (a1, b1) = constraint_residual(&star, u, v, &params, p.representative(n)).unwrap();
        let w0 = constraint_residual_w(&star, w, &params, p.representative(0)).unwrap();
        let w1 = constraint_residual_w(&star, w, &params, p.representative(n)).unwrap();
        let scale = u.norm().max(v.norm()).max(w.norm()).max(1.0) * (n.abs() as f64 + 1.0);
        prop_assert!((a0 - a1).norm() < 1e-9 * scale);
        prop_assert!((b0 - b1).norm() < 1e-9 * scale);
        prop_assert!((w0 - w1).norm() < 1e-9 * scale);
        prop_assert!(a0.norm() < 1e-8 * scale && b0.norm() < 1e-8 * scale && w0.norm() < 1e-8 * scale);
    }
}
