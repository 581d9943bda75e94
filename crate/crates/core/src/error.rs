use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go structurally wrong when assembling or running a system.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("expected {expected} {what}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("coupling index ({i}, {j}, {k}) out of range for p = {p}")]
    IndexOutOfRange { i: usize, j: usize, k: usize, p: usize },

    #[error("coupling entry ({i}, {j}, {k}) appears more than once")]
    DuplicateTriplet { i: usize, j: usize, k: usize },

    #[error("coupling is not symmetric in its last two indices at ({i}, {j}, {k}): {a} vs {b}")]
    AsymmetricCoupling { i: usize, j: usize, k: usize, a: f64, b: f64 },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("resonant coupling: A[{i}][{j}][{k}] = {value} but components {j} and {k} share speed {speed}")]
    ResonantCoupling { i: usize, j: usize, k: usize, value: f64, speed: f64 },

    #[error("all speeds equal ({speed}); the interaction triangle degenerates")]
    DegenerateDomain { speed: f64 },

    #[error("empty interval: [{a}, {b}]")]
    EmptyInterval { a: f64, b: f64 },

    #[error("{what} = {value} lies outside [{lo}, {hi}]")]
    OutOfRange { what: &'static str, value: f64, lo: f64, hi: f64 },

    #[error("breakpoints must be strictly increasing in x (offender at index {index})")]
    UnsortedBreakpoints { index: usize },

    #[error("datum must start and end at value exactly 0, got {value} at x = {x}")]
    OpenSupport { x: f64, value: f64 },

    #[error("grid step must be positive and finite, got dx = {dx}, dt = {dt}")]
    BadGridStep { dx: f64, dt: f64 },

    #[error("grid [{gx0}, {gx1}] x [0, {gt1}] does not cover {what} needing [{x0}, {x1}] x [0, {t1}]")]
    Coverage {
        what: &'static str,
        gx0: f64,
        gx1: f64,
        gt1: f64,
        x0: f64,
        x1: f64,
        t1: f64,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("characteristic foot at x = {x} (t = {t}) falls inside the data support but outside the grid")]
    FootOutsideGrid { x: f64, t: f64 },

    #[error("Riccati denominator vanishes at t = {t} (blow-up point)")]
    BlowUpPoint { t: f64 },

    #[error("components {j} and {k} share speed {speed}; the interaction bound is void")]
    EqualSpeeds { j: usize, k: usize, speed: f64 },

    #[error("cannot reduce: both fields travel at speed {speed}")]
    SingularReduction { speed: f64 },

    #[error("grid too small for centered differences: need at least 2x2 cells, got {nx}x{nt}")]
    StencilTooSmall { nx: usize, nt: usize },

    #[error("glued sub-solutions disagree at (x = {x}, t = {t}): |delta| = {delta}")]
    GluingInconsistency { x: f64, t: f64, delta: f64 },

    #[error("partition does not cover the data support: {detail}")]
    PartitionGap { detail: String },

    #[error("sub-problem {index} carries mass {mass}, above the admissible budget {budget}")]
    BudgetExceeded { index: usize, mass: f64, budget: f64 },
}
