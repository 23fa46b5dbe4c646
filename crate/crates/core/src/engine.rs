//! The production walk engine: parity-packed double-buffered stepping.
//!
//! Amplitudes are only ever nonzero on sites with `x - x0 + t` even, so the
//! engine stores exactly those: entry `k` of each buffer holds the amplitude
//! at `x = x0 - t + 2k`, `k = 0..=t`. One step maps buffers of length
//! `t + 1` to length `t + 2` with the unit-stride stencil
//!
//! ```text
//! u'[j] = c_uu[j-1] u[j-1] + c_ud[j-1] d[j-1]       (u'[0] = 0)
//! d'[j] = c_du[j]   u[j]   + c_dd[j]   d[j]         (d'[t+1] = 0)
//! ```
//!
//! with coin entries read at the source index. The carpet row advances in
//! the same packed layout. Every write lands on a distinct site and all
//! reductions (norm, moments, density matrices) run sequentially in site
//! order, so results are byte-identical regardless of worker count.

use crate::coin::{coin_matrix, CoinKind, CoinMatrix, CoinParams};
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::observables::{coin_density_packed, trace_distance, DensityMatrix2};
use crate::pattern::{PackedRow, PatternRow};
use crate::walk::{Mode, WalkerState};
use num_complex::Complex64;

const C_ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Default cap on the dense window size (`2 t_max + 1` sites), i.e. runs up
/// to `t_max = 10^6`. Four packed complex buffers at that size stay around
/// 128 MB; anything larger should be a deliberate choice.
pub const DEFAULT_WINDOW_CAP: u64 = 2_000_001;

/// Everything needed to reproduce one evolution.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub mode: Mode,
    pub params: CoinParams,
    /// Bloch polar angle of the initial coin state (radians).
    pub gamma: f64,
    /// Bloch azimuthal angle of the initial coin state (radians).
    pub phi: f64,
    pub x0: i64,
    pub t_max: u64,
    /// Upper bound on the dense window `2 t_max + 1` this run may allocate.
    pub window_cap: u64,
    /// Worker policy for the step kernel (and for sweeps built on top).
    pub parallelism: Parallelism,
}

impl RunSpec {
    /// A spec with the library defaults: symmetric initial coin state
    /// (γ = φ = π/2), origin start, default window cap, automatic
    /// parallelism.
    pub fn new(mode: Mode, params: CoinParams, t_max: u64) -> Self {
        RunSpec {
            mode,
            params,
            gamma: std::f64::consts::FRAC_PI_2,
            phi: std::f64::consts::FRAC_PI_2,
            x0: 0,
            t_max,
            window_cap: DEFAULT_WINDOW_CAP,
            parallelism: Parallelism::Auto,
        }
    }
}

/// The fast, stateful simulation. Construct from a [`RunSpec`], call
/// [`step`](Simulation::step) up to `t_max` times, read observables along
/// the way.
pub struct Simulation {
    spec: RunSpec,
    t: u64,
    up: Vec<Complex64>,
    dn: Vec<Complex64>,
    up_next: Vec<Complex64>,
    dn_next: Vec<Complex64>,
    row: Option<PackedRow>,
    coin_h: CoinMatrix,
    coin_f: CoinMatrix,
}

impl Simulation {
    pub fn new(spec: RunSpec) -> Result<Self> {
        let needed = 2 * spec.t_max + 1;
        if needed > spec.window_cap {
            return Err(Error::WindowCapExceeded {
                t_max: spec.t_max,
                needed,
                cap: spec.window_cap,
            });
        }
        let cap = spec.t_max as usize + 2;
        let mut up = Vec::with_capacity(cap);
        let mut dn = Vec::with_capacity(cap);
        up.push(Complex64::new((spec.gamma / 2.0).cos(), 0.0));
        dn.push(Complex64::from_polar((spec.gamma / 2.0).sin(), spec.phi));
        let row = match spec.mode {
            Mode::Fractal => Some(PackedRow::seed_with_capacity(spec.t_max)),
            _ => None,
        };
        let coin_h = coin_matrix(CoinKind::Hadamard, &spec.params);
        let coin_f = coin_matrix(CoinKind::Fourier, &spec.params);
        Ok(Simulation {
            spec,
            t: 0,
            up,
            dn,
            up_next: Vec::with_capacity(cap),
            dn_next: Vec::with_capacity(cap),
            row,
            coin_h,
            coin_f,
        })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn spec(&self) -> &RunSpec {
        &self.spec
    }

    /// Advance one step.
    pub fn step(&mut self) {
        let n = self.up.len();
        let parallel = self.spec.parallelism.kernel_enabled(n);
        let (mh, mf) = (self.coin_h, self.coin_f);
        let up = &self.up;
        let dn = &self.dn;
        let up_next = &mut self.up_next;
        let dn_next = &mut self.dn_next;
        match (self.spec.mode, &self.row) {
            (Mode::Fractal, Some(row)) if self.spec.x0 % 2 == 0 => {
                // Walker sites share the carpet's parity; packed indices
                // differ by the constant x0/2 (and leave the carpet cone
                // entirely for |x0| > 0 at early times, where bits read 0).
                let bits = row.packed_bits();
                let off = self.spec.x0 / 2;
                let last = bits.len() as i64 - 1;
                let coin_of = move |k: usize| -> CoinMatrix {
                    let kc = k as i64 + off;
                    if kc >= 0 && kc <= last && bits[kc as usize] == 1 {
                        mh
                    } else {
                        mf
                    }
                };
                advance_into(up, dn, up_next, dn_next, coin_of, parallel);
            }
            (Mode::Fractal, Some(_)) => {
                // Odd x0: the walker only ever occupies sites where the
                // carpet parity forces the bit to 0, i.e. the Fourier coin.
                advance_into(up, dn, up_next, dn_next, move |_| mf, parallel);
            }
            (Mode::Fractal, None) => unreachable!("fractal simulation always carries a row"),
            (Mode::UniformHadamard, _) => {
                advance_into(up, dn, up_next, dn_next, move |_| mh, parallel);
            }
            (Mode::UniformFourier, _) => {
                advance_into(up, dn, up_next, dn_next, move |_| mf, parallel);
            }
        }
        std::mem::swap(&mut self.up, &mut self.up_next);
        std::mem::swap(&mut self.dn, &mut self.dn_next);
        if let Some(row) = self.row.as_mut() {
            row.step();
        }
        self.t += 1;
    }

    /// Total probability, summed in fixed site order.
    pub fn norm(&self) -> f64 {
        self.up
            .iter()
            .zip(&self.dn)
            .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
            .sum()
    }

    /// Second moment `Σ_x x² P(x)` of the position distribution.
    pub fn second_moment(&self) -> f64 {
        let x_left = self.spec.x0 - self.t as i64;
        let mut m2 = 0.0;
        for (k, (u, d)) in self.up.iter().zip(&self.dn).enumerate() {
            let x = (x_left + 2 * k as i64) as f64;
            m2 += x * x * (u.norm_sqr() + d.norm_sqr());
        }
        m2
    }

    /// Reduced coin state `ρ_c` of the current state.
    pub fn coin_density(&self) -> DensityMatrix2 {
        coin_density_packed(&self.up, &self.dn)
    }

    /// Dense snapshot of the current state on `[x0 - t, x0 + t]`.
    pub fn state(&self) -> WalkerState {
        let width = 2 * self.t as usize + 1;
        let mut up = vec![C_ZERO; width];
        let mut down = vec![C_ZERO; width];
        for (k, (u, d)) in self.up.iter().zip(&self.dn).enumerate() {
            up[2 * k] = *u;
            down[2 * k] = *d;
        }
        WalkerState::from_amplitudes(self.t, self.spec.x0, self.spec.x0 - self.t as i64, up, down)
    }

    /// Dense snapshot of the current carpet row (fractal mode only).
    pub fn pattern_row(&self) -> Option<PatternRow> {
        self.row.as_ref().map(PackedRow::to_row)
    }
}

/// The packed stencil, shared by the sequential and parallel paths.
#[inline]
fn stencil<F: Fn(usize) -> CoinMatrix>(
    j: usize,
    n: usize,
    up: &[Complex64],
    dn: &[Complex64],
    coin_of: &F,
) -> (Complex64, Complex64) {
    let u_out = if j >= 1 {
        let m = coin_of(j - 1);
        m.uu * up[j - 1] + m.ud * dn[j - 1]
    } else {
        C_ZERO
    };
    let d_out = if j < n {
        let m = coin_of(j);
        m.du * up[j] + m.dd * dn[j]
    } else {
        C_ZERO
    };
    (u_out, d_out)
}

#[cfg(feature = "parallel")]
const PAR_CHUNK: usize = 8 * 1024;

fn advance_into<F>(
    up: &[Complex64],
    dn: &[Complex64],
    up_next: &mut Vec<Complex64>,
    dn_next: &mut Vec<Complex64>,
    coin_of: F,
    parallel: bool,
) where
    F: Fn(usize) -> CoinMatrix + Sync,
{
    let n = up.len();
    up_next.clear();
    up_next.resize(n + 1, C_ZERO);
    dn_next.clear();
    dn_next.resize(n + 1, C_ZERO);

    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        up_next
            .par_chunks_mut(PAR_CHUNK)
            .zip(dn_next.par_chunks_mut(PAR_CHUNK))
            .enumerate()
            .for_each(|(ci, (nu, nd))| {
                let base = ci * PAR_CHUNK;
                for (jj, (nu_j, nd_j)) in nu.iter_mut().zip(nd.iter_mut()).enumerate() {
                    let (u_out, d_out) = stencil(base + jj, n, up, dn, &coin_of);
                    *nu_j = u_out;
                    *nd_j = d_out;
                }
            });
        return;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;

    for (j, (nu_j, nd_j)) in up_next.iter_mut().zip(dn_next.iter_mut()).enumerate() {
        let (u_out, d_out) = stencil(j, n, up, dn, &coin_of);
        *nu_j = u_out;
        *nd_j = d_out;
    }
}

/// Which times to record and which observables to compute there.
#[derive(Debug, Clone)]
pub struct Observers {
    /// Sorted, deduplicated times in `[0, t_max]` at which to record.
    pub sample_times: Vec<u64>,
    pub second_moment: bool,
    pub entropy: bool,
    /// Record `D(ρ_t, ρ_{t+1})` at each sampled `t` (skipped for
    /// `t = t_max`, where no successor state exists).
    pub trace_distance: bool,
    /// Tolerance on `|1 - Σ P|` checked at every sampled time.
    pub norm_tolerance: f64,
}

impl Observers {
    pub fn at(cadence: Cadence, t_max: u64) -> Self {
        Observers {
            sample_times: cadence.sample_times(t_max),
            second_moment: false,
            entropy: false,
            trace_distance: false,
            norm_tolerance: 1e-10,
        }
    }

    pub fn with_second_moment(mut self) -> Self {
        self.second_moment = true;
        self
    }

    pub fn with_entropy(mut self) -> Self {
        self.entropy = true;
        self
    }

    pub fn with_trace_distance(mut self) -> Self {
        self.trace_distance = true;
        self
    }
}

/// Recording cadence, resolved against `t_max` into explicit sample times.
#[derive(Debug, Clone)]
pub enum Cadence {
    /// Every step including `t = 0`.
    EveryStep,
    /// `t = 0, s, 2s, …` up to `t_max`.
    Stride(u64),
    /// Up to `n` logarithmically spaced times in `[lo, hi]` (never `t = 0`).
    LogSpaced { lo: u64, hi: u64, n: usize },
    /// Explicit times; sorted, deduplicated and clamped to `[0, t_max]`.
    Times(Vec<u64>),
}

impl Cadence {
    pub fn sample_times(&self, t_max: u64) -> Vec<u64> {
        match self {
            Cadence::EveryStep => (0..=t_max).collect(),
            Cadence::Stride(s) => {
                let s = (*s).max(1);
                (0..=t_max / s).map(|i| i * s).collect()
            }
            Cadence::LogSpaced { lo, hi, n } => {
                crate::analysis::log_spaced_times(*lo, (*hi).min(t_max), *n)
            }
            Cadence::Times(v) => {
                let mut v: Vec<u64> = v.iter().copied().filter(|&t| t <= t_max).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }
}

/// One recorded observable column.
#[derive(Debug, Clone, Default)]
pub struct Series {
    pub times: Vec<u64>,
    pub values: Vec<f64>,
}

impl Series {
    pub fn push(&mut self, t: u64, v: f64) {
        self.times.push(t);
        self.values.push(v);
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(t, value)` pairs as floats, ready for fitting.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.values)
            .map(|(&t, &v)| (t as f64, v))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }
}

/// All columns recorded by one [`evolve`] call.
#[derive(Debug, Clone, Default)]
pub struct ObservableSeries {
    /// Total probability at every sampled time (always recorded).
    pub norm: Series,
    pub second_moment: Option<Series>,
    pub entropy: Option<Series>,
    /// `D(ρ_t, ρ_{t+1})` indexed by `t`.
    pub trace_distance: Option<Series>,
}

/// Result of a full evolution: the recorded series plus the final state.
pub struct EvolveOutput {
    pub series: ObservableSeries,
    pub final_state: WalkerState,
}

/// Run a complete evolution, recording observables at the requested times.
///
/// Fails fast with [`Error::UnitarityLost`] if the norm drifts past the
/// observer tolerance at any sampled time.
pub fn evolve(spec: &RunSpec, observers: &Observers) -> Result<EvolveOutput> {
    let mut sim = Simulation::new(spec.clone())?;
    let mut series = ObservableSeries {
        norm: Series::default(),
        second_moment: observers.second_moment.then(Series::default),
        entropy: observers.entropy.then(Series::default),
        trace_distance: observers.trace_distance.then(Series::default),
    };
    let mut sampled = vec![false; spec.t_max as usize + 1];
    for &t in &observers.sample_times {
        if t <= spec.t_max {
            sampled[t as usize] = true;
        }
    }

    // Trace distance needs the density matrix one step after each sampled
    // time; `pending` carries it across the step boundary.
    let mut pending: Option<(u64, DensityMatrix2)> = None;

    for t in 0..=spec.t_max {
        if t > 0 {
            sim.step();
        }
        let is_sampled = sampled[t as usize];
        let mut rho_now: Option<DensityMatrix2> = None;

        if let (Some((tp, rho_prev)), Some(col)) = (pending.take(), series.trace_distance.as_mut())
        {
            debug_assert_eq!(tp + 1, t);
            let rho = *rho_now.get_or_insert_with(|| sim.coin_density());
            col.push(tp, trace_distance(&rho_prev, &rho));
        }

        if is_sampled {
            let norm = sim.norm();
            let drift = (1.0 - norm).abs();
            if drift > observers.norm_tolerance {
                return Err(Error::UnitarityLost { t, drift });
            }
            series.norm.push(t, norm);
            if let Some(col) = series.second_moment.as_mut() {
                col.push(t, sim.second_moment());
            }
            if let Some(col) = series.entropy.as_mut() {
                let rho = *rho_now.get_or_insert_with(|| sim.coin_density());
                col.push(t, crate::observables::entanglement_entropy(&rho)?);
            }
            if series.trace_distance.is_some() && t < spec.t_max {
                let rho = *rho_now.get_or_insert_with(|| sim.coin_density());
                pending = Some((t, rho));
            }
        }
    }

    Ok(EvolveOutput {
        series,
        final_state: sim.state(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{initial_state, step};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    /// The packed engine and the reference stepper must agree amplitude by
    /// amplitude — they evaluate the same arithmetic in the same order.
    #[test]
    fn engine_matches_reference_stepper() {
        for (mode, x0) in [
            (Mode::Fractal, 0),
            (Mode::Fractal, 4),
            (Mode::Fractal, -3),
            (Mode::UniformHadamard, 0),
            (Mode::UniformFourier, 2),
        ] {
            let params = CoinParams::new(0.83, 0.37);
            let mut spec = RunSpec::new(mode, params, 60);
            spec.gamma = 1.1;
            spec.phi = 0.6;
            spec.x0 = x0;
            let mut sim = Simulation::new(spec).unwrap();
            let mut state = initial_state(1.1, 0.6, x0);
            let mut row = crate::pattern::PatternRow::seed();
            for _ in 0..60 {
                let row_arg = (mode == Mode::Fractal).then_some(&row);
                state = step(&state, row_arg, &params, mode).unwrap();
                row = row.next();
                sim.step();
            }
            let snap = sim.state();
            for x in state.x_range() {
                assert_eq!(
                    snap.up_at(x),
                    state.up_at(x),
                    "mode {mode:?} x0={x0} at x={x}"
                );
                assert_eq!(
                    snap.down_at(x),
                    state.down_at(x),
                    "mode {mode:?} x0={x0} at x={x}"
                );
            }
        }
    }

    #[test]
    fn window_cap_refuses_oversized_runs() {
        let mut spec = RunSpec::new(Mode::UniformHadamard, CoinParams::new(0.5, 0.5), 100);
        spec.window_cap = 150;
        assert!(matches!(
            Simulation::new(spec),
            Err(Error::WindowCapExceeded {
                needed: 201,
                cap: 150,
                ..
            })
        ));
    }

    #[test]
    fn evolve_records_norm_at_every_step_for_tiny_run() {
        let spec = RunSpec::new(Mode::Fractal, CoinParams::new(FRAC_PI_2 / 2.0, 0.3), 1);
        let out = evolve(&spec, &Observers::at(Cadence::EveryStep, 1)).unwrap();
        assert_eq!(out.series.norm.times, vec![0, 1]);
        for v in &out.series.norm.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn evolve_trace_column_skips_the_final_step() {
        let spec = RunSpec::new(Mode::Fractal, CoinParams::new(0.7, 0.7), 8);
        let obs = Observers::at(Cadence::EveryStep, 8).with_trace_distance();
        let out = evolve(&spec, &obs).unwrap();
        let trace = out.series.trace_distance.unwrap();
        assert_eq!(trace.times, (0..8).collect::<Vec<u64>>());
        assert!(trace.values.iter().all(|d| d.is_finite() && *d >= 0.0));
    }

    #[test]
    fn cadence_resolution() {
        assert_eq!(Cadence::EveryStep.sample_times(3), vec![0, 1, 2, 3]);
        assert_eq!(Cadence::Stride(4).sample_times(10), vec![0, 4, 8]);
        let times = Cadence::LogSpaced {
            lo: 1,
            hi: 100,
            n: 10,
        }
        .sample_times(100);
        assert!(times.first() == Some(&1) && times.last() == Some(&100));
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(
            Cadence::Times(vec![7, 3, 3, 99]).sample_times(10),
            vec![3, 7]
        );
    }
}
