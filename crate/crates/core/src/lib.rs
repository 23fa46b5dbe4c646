//! Discrete-time quantum walks on a line whose coin is chosen, site by site
//! and step by step, from a self-similar binary carpet.
//!
//! The carpet is the parity of Pascal's triangle — a Sierpinski gasket —
//! grown row by row with a mod-2 rule ([`pattern`]). While a 1-bit is
//! current at a site the Hadamard-family coin `C_H(θ_H)` acts there; a
//! 0-bit applies the Fourier-family coin `C_F(θ_F)` ([`coin`]). Each step
//! the coin acts at every site, then the up component shifts right and the
//! down component shifts left ([`walk`], fast engine in [`engine`]).
//!
//! On top of the evolution sit the measured quantities ([`observables`]):
//! the position distribution and its second moment, the interference degree
//! and fringe visibility, and the reduced coin state with its entanglement
//! entropy and trace distance. [`analysis`] turns their time series into
//! spreading exponents (`m₂ ~ t^α`), decay exponents (`D ~ t^{-β}`) and
//! asymptotic entropy averages.
//!
//! Two uniform modes (everywhere-Hadamard, everywhere-Fourier) provide the
//! disorder-free references; the default initial coin state is the
//! symmetric one, γ = φ = π/2.
//!
//! Runs are deterministic: with the `parallel` feature on (default), the
//! step kernel and sweeps spread across workers in a way that keeps outputs
//! byte-identical to the sequential build at any worker count.

pub mod analysis;
pub mod coin;
pub mod engine;
pub mod error;
pub mod exec;
pub mod observables;
pub mod pattern;
pub mod walk;

pub use analysis::{
    alpha_diagram, asymptotic_mean_entropy, default_entropy_t0, default_fit_window,
    log_spaced_times, loglog_fit, loglog_fit_with, split_stationary, spreading_exponent,
    trace_distance_series, AlphaPoint, PowerLawFit, DEFAULT_FIT_SAMPLES, MIN_FIT_SAMPLES,
    STATIONARITY_FLOOR,
};
pub use coin::{coin_matrix, CoinKind, CoinMatrix, CoinParams};
pub use engine::{
    evolve, Cadence, EvolveOutput, ObservableSeries, Observers, RunSpec, Series, Simulation,
    DEFAULT_WINDOW_CAP,
};
pub use error::{Error, Result};
pub use exec::Parallelism;
pub use observables::{
    analytic_interference_oracle, coin_density_matrix, entanglement_entropy, flux_branches,
    initial_interference, interference_degree, position_distribution, second_moment,
    trace_distance, visibility, DensityMatrix2, FluxBranches, InterferenceField,
    PositionDistribution, DENSITY_EIGENVALUE_TOLERANCE,
};
pub use pattern::{coin_change_intervals, ones_in_rows, PackedRow, PatternRow};
pub use walk::{initial_state, step, Mode, WalkerState};
