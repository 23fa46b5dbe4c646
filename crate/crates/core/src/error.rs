use thiserror::Error;

/// Everything that can go wrong inside the simulation library.
///
/// Variants split into two broad classes that callers (notably the CLI)
/// treat differently: *usage* errors — a request that can never succeed as
/// stated — and *numerical* errors — a computation that ran but violated an
/// invariant it is contractually required to uphold.
#[derive(Debug, Error)]
pub enum Error {
    /// A site was queried past the horizon it could ever have entered.
    #[error("site x={x} never enters the light cone within t_max={t_max}")]
    SiteBeyondHorizon { x: i64, t_max: u64 },

    /// Fractal-mode stepping needs the pattern row for the *current* step.
    #[error("pattern row is at t={row_t} but the walker is at t={state_t}")]
    RowStepMismatch { row_t: u64, state_t: u64 },

    /// Fractal mode was requested without a pattern row to read coins from.
    #[error("fractal mode requires a pattern row")]
    MissingPatternRow,

    /// The requested evolution would allocate more lattice sites than the
    /// configured cap allows.
    #[error(
        "t_max={t_max} needs a window of {needed} sites, above the cap of {cap}; \
         raise the window cap explicitly to run this"
    )]
    WindowCapExceeded { t_max: u64, needed: u64, cap: u64 },

    /// The closed-form interference values only exist for the first few steps.
    #[error("analytic interference values are only available for t <= 5, got t={0}")]
    OracleStepUnsupported(u64),

    /// A log-log fit was attempted on too few usable samples.
    #[error("log-log fit needs at least {min} positive samples in the window, found {found}")]
    InsufficientSamples { found: usize, min: usize },

    /// A log-log fit window contained no strictly positive values at all.
    #[error("log-log fit window contains no positive values")]
    NonPositiveSeries,

    /// An averaging window selected no samples.
    #[error("no samples at or after t0={t0}")]
    EmptyAverageWindow { t0: u64 },

    /// A density matrix had an eigenvalue outside [0, 1] beyond tolerance.
    #[error("density matrix eigenvalue {0} lies outside [0, 1]")]
    InvalidDensityMatrix(f64),

    /// The walker norm drifted beyond the guaranteed bound.
    #[error("norm drifted to |1 - sum P| = {drift:.3e} at t={t}")]
    UnitarityLost { t: u64, drift: f64 },
}

impl Error {
    /// True for errors that indicate an impossible request rather than a
    /// numerical failure during an otherwise valid run.
    pub fn is_usage(&self) -> bool {
        !matches!(
            self,
            Error::InvalidDensityMatrix(_) | Error::UnitarityLost { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
