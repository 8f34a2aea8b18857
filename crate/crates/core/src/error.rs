use crate::lattice::LatticePoint;
use thiserror::Error;

/// Every failure the library can report.
///
/// Variants that arise during propagation carry the lattice cell where the
/// computation stopped.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("indeterminate multi-ratio: a numerator and a denominator factor both vanish")]
    IndeterminateRatio,
    #[error("degenerate Moebius map (ad - bc = 0)")]
    DegenerateMap,
    #[error("points are not pairwise distinct")]
    DuplicatePoints,
    #[error("multi-ratio needs an even number of at least four points, got {0}")]
    BadPointCount(usize),

    #[error("zero edge difference on {tail} -> {head}")]
    ZeroEdge { tail: LatticePoint, head: LatticePoint },
    #[error("degenerate triangle at {at}")]
    DegenerateTriangle { at: LatticePoint },
    #[error("split points coincide (v1 = v2) while filling {cell}")]
    SplitPointsCoincide { cell: LatticePoint },
    #[error("missing or infinite value at {at}")]
    MissingValue { at: LatticePoint },
    #[error("edge integration is path dependent near {at} (closure residual {residual:e})")]
    PathDependent { at: LatticePoint, residual: f64 },
    #[error("companion field inconsistent around {at} (mismatch {residual:e})")]
    InconsistentAroundVertex { at: LatticePoint, residual: f64 },

    #[error("edge triple violates fgh = 1 (|fgh - 1| = {0:e})")]
    TripleNotUnit(f64),
    #[error("path is not connected between {from} and {to}")]
    DisconnectedPath { from: LatticePoint, to: LatticePoint },
    #[error("wave function derivative has the wrong shape (off-pattern entry {0:e})")]
    ShapeViolation(f64),
    #[error("square is not flat: |L1 L2 - L3 L4| = {0:e}")]
    NotFlat(f64),
    #[error("diagonal matrix is not in the loop group class (residual {0:e})")]
    NotInClass(f64),

    #[error("singular constraint denominator at {at}")]
    SingularDenominator { at: LatticePoint },
    #[error("axis recurrence is singular at step {k}")]
    SingularStep { k: usize },
    #[error("closed form has a pole for alpha = {alpha} at k = {k}")]
    PoleAt { alpha: f64, k: usize },
    #[error("sector size {0} is too small")]
    SectorTooSmall(usize),
    #[error("alpha = {0} is outside the admissible range")]
    AlphaOutOfRange(f64),

    #[error("circle through {at} deviates by {deviation:e}")]
    CircularityViolation { at: LatticePoint, deviation: f64 },
    #[error("cannot construct circle for {at}")]
    CircleConstructionFailure { at: LatticePoint },
    #[error("alpha = {0} is not a rational number with denominator <= 12")]
    NotRational(f64),
    #[error("rotated copies do not match along the seam (mismatch {0:e})")]
    SeamMismatch(f64),

    #[error("schema version {found} is not supported (expected {expected})")]
    SchemaVersionMismatch { found: u64, expected: u64 },
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("document has nothing to render")]
    NothingToRender,
}

pub type Result<T> = std::result::Result<T, Error>;
