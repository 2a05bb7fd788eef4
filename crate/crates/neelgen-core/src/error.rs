use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("linear size {0} is odd; sublattices require even sizes")]
    OddLinearSize(usize),

    #[error("geometry {geometry} expects {expected} linear sizes, got {got}")]
    DimensionCount {
        geometry: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("coupling set is empty")]
    EmptyCouplings,

    #[error("on-site coupling (zero displacement) is not allowed")]
    OnSiteCoupling,

    #[error("couplings not symmetric under negation: J({0:?}) = {1} but J({2:?}) = {3}")]
    AsymmetricCouplings(Vec<i64>, f64, Vec<i64>, f64),

    #[error("coupling displacement {got:?} has {} components, lattice has {expected} dimensions", got.len())]
    CouplingDimension { got: Vec<i64>, expected: usize },

    #[error("no admissible ordering vector: J_q is not maximized on the 2Q=0 subgrid (non-bipartite coupling set)")]
    NoOrderingVector,

    #[error("ordering vector is q = 0 (ferromagnetic couplings); staggered sublattices are undefined")]
    FerromagneticOrdering,

    #[error("site index {site} out of range for {n} sites")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("momentum index {0:?} is off the lattice grid")]
    MomentumOffGrid(Vec<usize>),

    #[error("state dimension mismatch: {0} vs {1} sites")]
    DimensionMismatch(usize, usize),

    #[error("site count {n} exceeds the cap of {cap} for this operation")]
    SizeCap { n: usize, cap: usize },

    #[error("M = {m} out of range 0..={n}")]
    MOutOfRange { m: usize, n: usize },

    #[error("invalid easy-axis weights: {0}")]
    InvalidWeights(String),

    #[error("both branch norms below 1e-14: degenerate measurement input")]
    DegenerateBranches,

    #[error("explicit schedule has no site for step {0}")]
    ScheduleExhausted(usize),

    #[error("zero-norm state")]
    ZeroNorm,

    #[error("no AFM correlations: K^{{+-}}(Q) below 1e-14")]
    NoAfmCorrelations,

    #[error("dispersion radicand {0} below -1e-12 at grid point {1:?}: inconsistent ordering vector")]
    NegativeRadicand(f64, Vec<usize>),

    #[error("state file: bad magic bytes")]
    BadMagic,

    #[error("state file: unsupported version {0}")]
    BadVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
