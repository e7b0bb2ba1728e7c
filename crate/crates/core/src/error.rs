use thiserror::Error;

/// Errors surfaced by the numerical layers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("empty product")]
    EmptyProduct,

    #[error("operator is not Hermitian: max asymmetry {asymmetry:.3e} exceeds {allowed:.3e}")]
    NotHermitian { asymmetry: f64, allowed: f64 },

    #[error("exponent overflow: t*lambda = {0:.3e} > 700; rescale the argument")]
    ExponentOverflow(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("basis mismatch: {0} vs {1}")]
    BasisMismatch(String, String),

    #[error("not in real subspace: {0}")]
    NotInRealSubspace(String),

    #[error("not J-real: residual {0:.3e}")]
    NotJReal(f64),

    #[error("use sampled_positive_map: membership of a map in the PSD-cone order is not decided entrywise")]
    UsePsdSampling,

    #[error("reflection-positivity certificate missing: {0}")]
    NotCertified(String),

    #[error("lattice condition violated: {0}")]
    LatticeCondition(String),

    #[error("empty sector: N_e = {n_electrons}, 2*S_z = {two_sz}")]
    EmptySector { n_electrons: usize, two_sz: i64 },

    #[error("time grid invalid: {0}")]
    TimeGrid(String),

    #[error("beta out of range: {0}")]
    BetaRange(String),

    #[error("chain too long: n = {0} exceeds the combinatorial cap of 8")]
    CombinatorialCap(usize),

    #[error("missing transform or operator `{0}` on model instance")]
    MissingEntry(String),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("config error: {0}")]
    Config(String),
}
