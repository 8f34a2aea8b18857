//! One line per acceptance criterion, `PASS` or `FAIL` with the measured value.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the table.

use hexcircles::cli::cli_main;
use hexcircles::fgh::{verify_mr, FieldTag, VertexField};
use hexcircles::io::{load_json, save_json};
use hexcircles::isomonodromic::{
    audit_iso_equations, axis_solve, closed_form_axis, closed_form_axis_limits, constraint_report, solve_constrained_sector, Axis,
    ConstraintParams, LimitCase,
};
use hexcircles::lattice::{sector_points, LatticePoint, Triangle};
use hexcircles::lax::{
    flat_square_through, lambda_jets, quadratic_forms, square_extension, transport_fields, triangle_triples, zero_curvature_at,
    Poly, PolyMatrix, TransitionMatrix,
};
use hexcircles::patterns::{generate_limit_pattern, generate_zalpha, generate_zalpha_theta, immersion_check, CirclePattern, GeneratedPattern};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

mod common;
use common::printed_tables;

const ALPHAS: [f64; 5] = [0.1, 0.25, 1.0 / 3.0, 0.4, 0.45];
const N: usize = 12;

const TOL_MR: f64 = 1e-9;
const TOL_CIRCLE: f64 = 1e-8;
const TOL_CLOSED_FORM: f64 = 1e-10;
const TOL_ANCHOR: f64 = 1e-12;
const TOL_CONSTRAINT: f64 = 1e-8;
const TOL_ZERO_CURVATURE: f64 = 1e-11;
const TOL_SYM: f64 = 1e-10;
const TOL_ISO: f64 = 1e-9;
const TOL_PROJECTOR: f64 = 1e-10;
const TOL_SQUARE: f64 = 1e-11;
const TOL_LIMIT: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Line {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(id: u8, name: &'static str, value: f64, tol: f64) -> Line {
    Line { id, name, pass: value < tol, detail: format!("max {value:.3e} < {tol:.0e}") }
}

fn zalphas() -> Vec<GeneratedPattern> {
    ALPHAS.iter().map(|a| generate_zalpha(*a, N).unwrap()).collect()
}

fn criterion_1(gs: &[GeneratedPattern]) -> Line {
    let worst = gs.iter().flat_map(|g| g.fields().map(|f| verify_mr(f).max())).fold(0.0, f64::max);
    check(1, "multi-ratio -1 on u, v, w", worst, TOL_MR)
}

fn criterion_2(gs: &[GeneratedPattern]) -> Line {
    let mut worst: f64 = 0.0;
    let mut circles = 0;
    for g in gs {
        for f in g.fields() {
            let pat = CirclePattern::with_centers(f);
            circles += pat.circles.len();
            worst = worst.max(pat.worst_deviation().map_or(f64::INFINITY, |x| x.1));
        }
    }
    let mut l = check(2, "circles centered at the third field", worst, TOL_CIRCLE);
    l.detail += &format!(" over {circles} circles");
    l
}

fn criterion_3() -> Line {
    let mut worst: f64 = 0.0;
    let mut anchors: f64 = 0.0;
    for alpha in [0.1, 0.25, 0.4] {
        let rec = axis_solve(&ConstraintParams::symmetric(alpha), c(1.0, 0.0), c(1.0, 0.0), 31, Axis::K).unwrap();
        let cf = closed_form_axis(alpha, 30).unwrap();
        for k in 1..=30 {
            for (a, b) in [(rec.u[k], cf.u[k]), (rec.v[k], cf.v[k]), (rec.w[k], cf.w[k])] {
                worst = worst.max((a - b).norm() / b.norm());
            }
        }
        anchors = anchors.max((rec.u[2] - 2.0).norm()).max((rec.w[2] - (1.0 - alpha) / alpha).norm());
    }
    let pass = worst < TOL_CLOSED_FORM && anchors < TOL_ANCHOR;
    Line {
        id: 3,
        name: "closed form vs recurrence",
        pass,
        detail: format!("rel {worst:.3e} < {TOL_CLOSED_FORM:.0e}, anchors {anchors:.3e} < {TOL_ANCHOR:.0e}"),
    }
}

fn criterion_4() -> Line {
    let one = c(1.0, 0.0);
    let mut worst: f64 = 0.0;
    for (alpha, beta, theta) in [(0.25, 0.25, 2.0 * PI * 0.25), (0.4, 0.4, 2.0 * PI * 0.4), (0.3, 0.2, 1.0)] {
        let e = Complex64::from_polar(1.0, theta);
        let sol = solve_constrained_sector(&ConstraintParams::real(alpha, beta), one, one, e, e, N).unwrap();
        let r = constraint_report(&sol);
        worst = worst.max(r.u).max(r.v).max(r.w).max(r.alt);
    }
    check(4, "interior constraints r1, r2, r3", worst, TOL_CONSTRAINT)
}

fn criterion_5(gs: &[GeneratedPattern]) -> Line {
    let mus = [c(0.0, 0.0), c(0.5, 0.0), c(-0.3, 0.2)];
    let mut worst: f64 = 0.0;
    let mut triangles = 0;
    for g in gs {
        for p in sector_points(g.n) {
            for tri in [Triangle::up(p), Triangle::down(p)] {
                if let Ok(t) = triangle_triples(&g.u, &g.v, &tri) {
                    worst = worst.max(zero_curvature_at(t, &mus));
                    triangles += 1;
                }
            }
        }
    }
    let mut l = check(5, "zero curvature", worst, TOL_ZERO_CURVATURE);
    l.detail += &format!(" over {triangles} triangles");
    l
}

fn criterion_6(gs: &[GeneratedPattern]) -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut sym: f64 = 0.0;
    let mut closure: f64 = 0.0;
    for g in gs {
        let n = g.n as i64;
        for _ in 0..5 {
            let mut path = vec![LatticePoint::ORIGIN];
            while path.len() < 21 {
                let q = path.last().unwrap().step(rng.gen_range(0..6));
                if (0..=n).contains(&q.k) && (0..=n).contains(&q.l) {
                    path.push(q);
                }
            }
            let psis = transport_fields(&g.u, &g.v, &path).unwrap();
            for (p, psi) in path.iter().zip(&psis) {
                let ([a, b, cc], _) = lambda_jets(psi).unwrap();
                let d = |f: &VertexField| f.require(*p).unwrap() - f.require(path[0]).unwrap();
                sym = sym.max((a - d(&g.u)).norm()).max((b - d(&g.v)).norm()).max((cc - d(&g.w)).norm());
            }
        }
        closure = closure.max(quadratic_forms(&g.u, &g.v, &g.w, LatticePoint::ORIGIN).unwrap().closure);
    }
    let pass = sym < TOL_SYM && closure < TOL_SYM;
    Line { id: 6, name: "Sym formula and quadratic forms", pass, detail: format!("sym {sym:.3e}, closure {closure:.3e} < {TOL_SYM:.0e}") }
}

fn criterion_7() -> Line {
    let alpha = 0.35;
    let e = Complex64::from_polar(1.0, 2.0 * PI * alpha);
    let one = c(1.0, 0.0);
    let params = ConstraintParams::symmetric(alpha);
    let sol = solve_constrained_sector(&params, one, one, e, e, 8).unwrap();
    let forms = quadratic_forms(&sol.u, &sol.v, &sol.w, LatticePoint::ORIGIN).unwrap();
    let window: Vec<LatticePoint> = sector_points(8).into_iter().filter(|p| p.k >= 1 && p.l >= 1).collect();
    let a = audit_iso_equations(&sol.u, &sol.v, &forms, &params, &window);
    let cd = a.c.iter().chain(&a.d).chain(&a.cd).copied().fold(0.0, f64::max);
    let pass = a.points > 10 && cd < TOL_ISO && a.projector_sum < TOL_PROJECTOR;
    Line {
        id: 7,
        name: "isomonodromy C, D, CD and projectors",
        pass,
        detail: format!("C/D/CD {cd:.3e} < {TOL_ISO:.0e}, P0+P2+P4-I {:.3e} < {TOL_PROJECTOR:.0e} at {} points", a.projector_sum, a.points),
    }
}

fn criterion_8() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut polar = move || Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0 * PI));
    let one_plus_mu = PolyMatrix::scalar(Poly::one_plus_mu_pow(1));
    let lambdas = [c(0.3, 0.1), c(-0.7, 0.4), c(0.0, 1.1)];
    let (mut done, mut tries) = (0, 0);
    let (mut prod_err, mut lam_err, mut entries): (f64, f64, f64) = (0.0, 0.0, 0.0);
    while done < 100 && tries < 1000 {
        tries += 1;
        let l0 = TransitionMatrix::from_fg(polar(), polar());
        let Some(sq) = flat_square_through(l0, polar(), polar()) else { continue };
        let Ok(t0) = square_extension(sq) else { continue };
        let [l1, l2, _, _] = sq;
        let back = TransitionMatrix { f: t0.f, g: t0.g, h: t0.h };
        let p12 = l1.mu_poly().mul(&l2.mu_poly());
        prod_err = prod_err.max(back.mu_poly().mul(&p12).sub(&one_plus_mu).max_abs());
        for lam in lambdas {
            let m = mat_mul(&mat_mul(&back.eval_lambda(lam), &l1.eval_lambda(lam)), &l2.eval_lambda(lam));
            for (i, row) in m.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    lam_err = lam_err.max((x - if i == j { 1.0 } else { 0.0 }).norm());
                }
            }
        }
        let (inv, rem) = p12.adj().div_one_plus_mu();
        entries = entries.max(inv.entry(0, 2).max_abs()).max(inv.entry(1, 0).max_abs()).max(inv.entry(2, 1).max_abs()).max(rem);
        done += 1;
    }
    let worst = prod_err.max(lam_err);
    let pass = done == 100 && worst < TOL_SQUARE && entries < TOL_SQUARE;
    Line {
        id: 8,
        name: "flat squares extend to triangles",
        pass,
        detail: format!("{done} squares, L0L1L2 {worst:.3e}, (L1L2)^-1 entries {entries:.3e} < {TOL_SQUARE:.0e}"),
    }
}

type M3 = [[Complex64; 3]; 3];

fn mat_mul(a: &M3, b: &M3) -> M3 {
    let mut out = [[c(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn criterion_9() -> Line {
    let mut worst: f64 = 0.0;
    let half = closed_form_axis_limits(LimitCase::Half, 12);
    worst = worst.max((half.u[4].unwrap() - 6.0).abs());
    for case in [LimitCase::Half, LimitCase::Zero] {
        // w°(3k) = k^3 is checked up to k = 8
        let n = if case == LimitCase::Zero { 24 } else { N };
        let g = generate_limit_pattern(case, n).unwrap();
        for ((k, l), vals) in printed_tables(case) {
            let p = LatticePoint::new(k, l);
            for (f, want) in g.fields().into_iter().zip(vals) {
                let got = f.get(p).unwrap();
                worst = worst.max(match (want, got.finite()) {
                    (None, None) => 0.0,
                    (Some((re, im)), Some(z)) => (z - c(re, im)).norm(),
                    _ => f64::INFINITY,
                });
            }
        }
        if case == LimitCase::Zero {
            for k in 1..=8i64 {
                let w = g.w.require(LatticePoint::new(3 * k, 0)).unwrap();
                worst = worst.max((w - (k * k * k) as f64).norm());
            }
        } else {
            worst = worst.max((g.u.require(LatticePoint::new(4, 0)).unwrap() - 6.0).norm());
        }
    }
    check(9, "limit patterns reproduce printed values", worst, TOL_LIMIT)
}

fn criterion_10() -> (Line, Option<String>) {
    let alphas: Vec<f64> = (2..=9).map(|i| i as f64 * 0.05).collect();
    let mut failed = Vec::new();
    for &alpha in &alphas {
        let g = generate_zalpha(alpha, N).unwrap();
        if !g.fields().iter().all(|f| immersion_check(f).ok) {
            failed.push(alpha);
        }
    }
    let control = generate_zalpha_theta(0.3, 1.0, N).unwrap();
    let control_immersed = control.fields().iter().all(|f| immersion_check(f).ok);
    let warning = control_immersed.then(|| "control theta = 1.0, alpha = 0.3 came out immersed".to_string());
    let line = Line {
        id: 10,
        name: "immersion for alpha in 0.1..0.45",
        pass: failed.is_empty(),
        detail: format!("{} of {} immersed, control immersed: {control_immersed}", alphas.len() - failed.len(), alphas.len()),
    };
    (line, warning)
}

fn run(args: &[&str]) -> i32 {
    let argv: Vec<String> = std::iter::once("hexcircles").chain(args.iter().copied()).map(String::from).collect();
    cli_main(&argv)
}

fn criterion_11() -> Line {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("out.json");
    let svg = dir.path().join("out.svg");
    let (js, ss) = (json.to_str().unwrap(), svg.to_str().unwrap());
    let codes = [
        run(&["generate", "--pattern", "zalpha", "--alpha", "0.4", "--levels", "12", "--field", "w", "--json", js, "--svg", ss]),
        run(&["verify", js, "--tol", "1e-8"]),
        run(&["axis", "--alpha", "0.25", "--kmax", "30", "--compare-closed-form"]),
    ];
    let bytes = std::fs::read(&json).unwrap();
    let doc = load_json(&bytes).unwrap();
    let round_trip = save_json(&doc) == bytes && load_json(&save_json(&doc)).unwrap() == doc;
    let text = std::fs::read_to_string(&svg).unwrap();
    let svg_circles = roxmltree::Document::parse(&text).map(|d| d.descendants().filter(|n| n.has_tag_name("circle")).count());
    let svg_ok = svg_circles == Ok(doc.circles.len());
    Line {
        id: 11,
        name: "CLI, JSON round trip, SVG",
        pass: codes == [0, 0, 0] && round_trip && svg_ok,
        detail: format!("exit codes {codes:?}, round trip {round_trip}, svg circles {svg_circles:?} of {}", doc.circles.len()),
    }
}

#[test]
fn acceptance() {
    let gs = zalphas();
    let (l10, warning) = criterion_10();
    let lines = [
        criterion_1(&gs),
        criterion_2(&gs),
        criterion_3(),
        criterion_4(),
        criterion_5(&gs),
        criterion_6(&gs),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        l10,
        criterion_11(),
    ];
    for l in &lines {
        println!("{} criterion {:>2} {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.name, l.detail);
    }
    if let Some(w) = warning {
        println!("WARN criterion 10: {w}");
    }
    let failed: Vec<u8> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn field_tags_cover_three_sublattices() {
    let idx: Vec<u8> = [FieldTag::U, FieldTag::V, FieldTag::W].iter().map(|t| t.center_index()).collect();
    assert_eq!(idx, [1, 2, 0]);
}
