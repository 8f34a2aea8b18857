use hexcircles::fgh::{verify_mr, FieldTag, VertexField};
use hexcircles::geometry::{ExtComplex, Mobius};
use hexcircles::isomonodromic::{solve_constrained_sector, ConstraintParams, LimitCase};
use hexcircles::lattice::{hex_star, sector_points, LatticePoint};
use hexcircles::patterns::{
    assemble_full_plane, central_extension, circle_row_propagate, generate_limit_pattern, generate_zalpha,
    generate_zalpha_theta, immersion_check, isosceles_residual, regular_lattice, verify_pattern, CirclePattern,
};
use hexcircles::Error;
use num_complex::Complex64;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn central_extension_of_centers_is_the_field() {
    let g = generate_zalpha(0.3, 10).unwrap();
    let ext = central_extension(&g.patterns[0], ExtComplex::Infinity);
    for p in g.patterns[0].circles.keys() {
        assert!((ext.require(*p).unwrap() - g.u.require(*p).unwrap()).norm() < 1e-9);
    }
}

/// Reflections of a finite point keep the multi-ratio on the other two sublattices,
/// and commute with Moebius maps.
#[test]
fn central_extension_with_finite_point() {
    let g = generate_zalpha(0.35, 10).unwrap();
    let pat = &g.patterns[0];
    let p_inf = ExtComplex::from(c(-0.7, 2.3));
    let ext = central_extension(pat, p_inf);
    let r = verify_mr(&ext);
    for j in 0..3 {
        if j != pat.sublattice as usize {
            assert!(r.max_by_sublattice[j] < 1e-8, "{r:?}");
        }
    }

    let m = Mobius::new(c(1.0, 0.5), c(-0.3, 0.0), c(0.2, -0.1), c(1.0, 0.0)).unwrap();
    let mut moved = pat.clone();
    for circle in moved.circles.values_mut() {
        *circle = m.apply_circle(circle).unwrap();
    }
    let mut pts = VertexField::new(pat.points.tag);
    for p in pat.points.points() {
        pts.set(p, m.apply(pat.points.get(p).unwrap()));
    }
    moved.points = pts;
    let a = central_extension(&moved, m.apply(p_inf));
    for p in pat.circles.keys() {
        let want = m.apply(ext.get(*p).unwrap());
        assert!(a.get(*p).unwrap().dist(&want) < 1e-8 * want.finite().map_or(1.0, |z| z.norm().max(1.0)), "{p}");
    }
}

/// Row by row, the circle construction regrows the `u` pattern from two boundary strips and a corner.
#[test]
fn row_propagation_regrows_pattern() {
    let n = 9;
    let g = generate_zalpha(0.3, n).unwrap();
    let j = FieldTag::U.center_index();
    let start = 4;
    let mut field = VertexField::new(FieldTag::U);
    for p in sector_points(n) {
        if p.sublattice_index() != j && (p.k <= 1 || p.l <= 1 || p.k + p.l <= start + 1) {
            field.set(p, g.u.get(p).unwrap());
        }
    }
    let mut row = start;
    let mut added = 0;
    while row <= 2 * n as i64 {
        let step = circle_row_propagate(&field, j, row, n).unwrap();
        assert!(step.membership < 1e-9, "row {row}: {}", step.membership);
        for p in &step.added {
            let z = step.field.require(*p).unwrap();
            let want = g.u.require(*p).unwrap();
            assert!((z - want).norm() < 1e-8 * want.norm().max(1.0), "row {row} {p}: {z} vs {want}");
        }
        // boundary circles have no stored counterpart; compare with the vertices in the window
        for (p, circle) in &step.circles {
            for q in hex_star(*p).vertices.into_iter().filter(|q| g.u.contains(*q)) {
                let z = g.u.require(q).unwrap();
                assert!(circle.distance(z.into()) < 1e-8 * z.norm().max(1.0), "circle {p} misses {q}");
            }
        }
        added += step.added.len();
        field = step.field;
        row += 3;
    }
    assert!(added > 20);
    for p in sector_points(n).into_iter().filter(|p| p.sublattice_index() != j) {
        assert!(field.contains(p), "{p} not reached");
    }
}

#[test]
fn assemblies_close_up() {
    let g = generate_zalpha(0.2, 8).unwrap();
    let w = assemble_full_plane(&g, FieldTag::W).unwrap();
    assert_eq!((w.copies.len(), w.turns), (5, 3));
    assert!((w.angle - 2.0 * PI * 0.6).abs() < 1e-12);
    let u = assemble_full_plane(&g, FieldTag::U).unwrap();
    assert_eq!((u.copies.len(), u.turns), (5, 1));

    let g = generate_zalpha(1.0 / 3.0, 8).unwrap();
    let u = assemble_full_plane(&g, FieldTag::U).unwrap();
    assert_eq!((u.copies.len(), u.turns), (3, 1));
    assert!(u.seam_mismatch < 1e-9 * g.u.scale());
    let w = assemble_full_plane(&g, FieldTag::W).unwrap();
    assert_eq!((w.copies.len(), w.turns), (3, 1));

    // the last copy turned once more lands on the first
    let last = u.copies.last().unwrap();
    let r = last.rotation * Complex64::from_polar(1.0, u.angle);
    assert!((r - 1.0).norm() < 1e-12);

    let g = generate_zalpha(0.27, 4).unwrap();
    assert!(matches!(assemble_full_plane(&g, FieldTag::U), Err(Error::NotRational(_))));
}

#[test]
fn zalpha_report_is_clean() {
    let g = generate_zalpha(0.4, 12).unwrap();
    let r = verify_pattern(&g.fields(), false);
    assert!(r.max_mr < 1e-9, "{}", r.max_mr);
    assert!(r.max_circularity < 1e-8, "{}", r.max_circularity);
    assert!(r.immersed);
    assert!(r.fields.iter().all(|f| f.circles > 20));
}

#[test]
fn small_pattern_is_embedded() {
    let g = generate_zalpha(0.3, 6).unwrap();
    let r = verify_pattern(&g.fields(), true);
    assert_eq!(r.embedded, Some(true));
}

#[test]
fn isosceles_relations() {
    for alpha in [0.15, 0.3, 0.45] {
        let g = generate_zalpha(alpha, 10).unwrap();
        assert!(isosceles_residual(&g.u, &g.v, &g.w) < 1e-9);
    }
    // every member of the theta family is a circle pattern
    let g = generate_zalpha_theta(0.3, 1.0, 8).unwrap();
    assert!(isosceles_residual(&g.u, &g.v, &g.w) < 1e-7);
    let e = Complex64::from_polar(1.0, 1.0);
    let one = c(1.0, 0.0);
    let s = solve_constrained_sector(&ConstraintParams::symmetric(0.3), one, one, e, 0.8 * e, 8).unwrap();
    assert!(isosceles_residual(&s.u, &s.v, &s.w) > 1e-3);
}

#[test]
fn theta_control_is_not_immersed() {
    let g = generate_zalpha_theta(0.3, 1.0, 12).unwrap();
    let r = verify_pattern(&g.fields(), false);
    assert!(!r.immersed);
    assert!(r.max_mr < 1e-6);
}

#[test]
fn opening_angles() {
    for alpha in [0.15, 0.3, 0.4] {
        let g = generate_zalpha(alpha, 10).unwrap();
        let ru = Complex64::from_polar(1.0, 2.0 * PI * alpha);
        let rw = Complex64::from_polar(1.0, 2.0 * PI * (1.0 - 2.0 * alpha));
        for k in 1..=10 {
            let (a, b) = (LatticePoint::new(k, 0), LatticePoint::new(0, k));
            let s = g.u.scale().max(g.w.scale());
            assert!((ru * g.u.require(a).unwrap() - g.u.require(b).unwrap()).norm() < 1e-9 * s);
            assert!((ru * g.v.require(a).unwrap() - g.v.require(b).unwrap()).norm() < 1e-9 * s);
            assert!((rw * g.w.require(a).unwrap() - g.w.require(b).unwrap()).norm() < 1e-9 * s);
        }
    }
}

/// The symmetric `log z` is mirrored in the line `Im = pi` under `k <-> l`.
#[test]
fn symmetric_log_reflection() {
    let g = generate_limit_pattern(LimitCase::Half, 10).unwrap();
    let mut checked = 0;
    for p in g.w.points() {
        let q = LatticePoint::new(p.l, p.k);
        if let (Some(a), Some(b)) = (g.w.finite(p), g.w.finite(q)) {
            assert!((a.conj() + c(0.0, 2.0 * PI) - b).norm() < 1e-9 * a.norm().max(1.0), "{p}");
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn limit_patterns_verify() {
    for case in [LimitCase::Half, LimitCase::Zero] {
        let g = generate_limit_pattern(case, 12).unwrap();
        let r = verify_pattern(&g.fields(), false);
        assert!(r.max_mr < 1e-9, "{case:?} {}", r.max_mr);
        assert!(r.max_circularity < 1e-8, "{case:?} {}", r.max_circularity);
        for f in &r.fields {
            assert_eq!(f.immersion.violations, 0, "{case:?} {}", f.tag);
        }
    }
    assert!(matches!(generate_limit_pattern(LimitCase::Zero, 1), Err(Error::SectorTooSmall(1))));
}

#[test]
fn regular_lattice_is_embedded() {
    let f = regular_lattice(FieldTag::U, 6);
    let r = verify_pattern(&[&f], true);
    assert!(r.max_mr < 1e-12);
    assert_eq!(r.embedded, Some(true));
    assert!(immersion_check(&f).ok);
    let pat = CirclePattern::with_centers(&f);
    assert!(pat.worst_deviation().unwrap().1 < 1e-12);
}
