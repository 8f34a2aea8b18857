use hexcircles::isomonodromic::LimitCase;
use std::f64::consts::PI;

/// Limit values printed for the first lattice points, in order `(u°, v°, w°)`; `None` is infinity.
pub type Table = Vec<((i64, i64), [Option<(f64, f64)>; 3])>;

pub fn printed_tables(case: LimitCase) -> Table {
    let z = |re: f64, im: f64| Some((re, im));
    match case {
        LimitCase::Half => vec![
            ((0, 0), [z(0.0, 0.0), z(0.0, 0.0), None]),
            ((1, 0), [z(1.0, 0.0), z(0.0, 0.0), z(0.0, 0.0)]),
            ((0, 1), [z(-1.0, 0.0), z(0.0, 0.0), z(0.0, 2.0 * PI)]),
            ((1, 1), [z(0.0, 0.0), z(0.0, 1.0 / PI), z(0.0, PI)]),
        ],
        LimitCase::Zero => vec![
            ((0, 0), [None, None, z(0.0, 0.0)]),
            ((1, 0), [None, z(0.0, 0.0), z(0.0, 0.0)]),
            ((0, 1), [None, z(0.0, 2.0 * PI), z(0.0, 0.0)]),
            ((2, 0), [z(0.0, 0.0), z(1.0, 0.0), z(0.0, 0.0)]),
            ((0, 2), [z(0.0, 2.0 * PI), z(1.0, 2.0 * PI), z(0.0, 0.0)]),
            ((1, 1), [z(0.0, PI), None, z(0.0, 0.0)]),
            ((2, 1), [z(0.0, PI), z(0.0, 0.0), z(0.0, 1.0 / PI)]),
            ((1, 2), [z(0.0, PI), z(0.0, 2.0 * PI), z(0.0, -1.0 / PI)]),
            ((2, 2), [z(1.0, PI), z(0.0, PI), z(0.0, 0.0)]),
        ],
    }
}
