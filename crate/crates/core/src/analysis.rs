//! Fits and aggregates: power-law exponents from time series, the α(θ)
//! diagram, and asymptotic entropy averages.

use crate::engine::{evolve, Cadence, Observers, RunSpec, Series};
use crate::error::{Error, Result};
use crate::walk::Mode;

/// Number of logarithmically spaced sample times a fit draws by default.
pub const DEFAULT_FIT_SAMPLES: usize = 50;

/// A fit refuses to run on fewer usable samples than this.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Default fit window `[t_max/100, t_max]`.
pub fn default_fit_window(t_max: u64) -> (u64, u64) {
    ((t_max / 100).max(1), t_max)
}

/// Up to `n` distinct integer times spread logarithmically over `[lo, hi]`.
pub fn log_spaced_times(lo: u64, hi: u64, n: usize) -> Vec<u64> {
    let lo = lo.max(1);
    if hi < lo || n == 0 {
        return Vec::new();
    }
    if n == 1 || hi == lo {
        return vec![lo];
    }
    let (llo, lhi) = ((lo as f64).ln(), (hi as f64).ln());
    let mut times: Vec<u64> = (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            (llo + f * (lhi - llo)).exp().round() as u64
        })
        .map(|t| t.clamp(lo, hi))
        .collect();
    times.sort_unstable();
    times.dedup();
    times
}

/// An ordinary least-squares fit of `ln y` against `ln t`.
///
/// Sign convention: `exponent` is the raw slope. Growth laws (`m₂ ~ t^α`)
/// read it directly as `α`; decay laws (`D ~ t^{-β}`) read
/// `β = -exponent`, available as [`decay_exponent`](Self::decay_exponent).
#[derive(Debug, Clone)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub intercept: f64,
    pub exponent_stderr: f64,
    pub window: (u64, u64),
    /// The recorded times the fit actually used.
    pub sample_times: Vec<u64>,
}

impl PowerLawFit {
    pub fn decay_exponent(&self) -> f64 {
        -self.exponent
    }

    pub fn n_samples(&self) -> usize {
        self.sample_times.len()
    }
}

/// Fit `ln y` vs `ln t` over `window` with the default sample budget.
///
/// From the points inside the window whose value exceeds
/// [`STATIONARITY_FLOOR`], up to [`DEFAULT_FIT_SAMPLES`] are selected at
/// logarithmically spaced target times (each target snapping to the next
/// recorded point). Zeros, sentinels, and working-precision zeros are
/// excluded before selection: a localized walker's even-step variance or a
/// repeated coin state shows up as rounding residue around 1e-13 though the
/// exact value is 0, and feeding those into a log fit measures noise.
pub fn loglog_fit(series: &[(f64, f64)], window: (u64, u64)) -> Result<PowerLawFit> {
    loglog_fit_with(series, window, DEFAULT_FIT_SAMPLES)
}

/// As [`loglog_fit`] with an explicit sample budget.
pub fn loglog_fit_with(
    series: &[(f64, f64)],
    window: (u64, u64),
    n_samples: usize,
) -> Result<PowerLawFit> {
    let (lo, hi) = (window.0.max(1), window.1);
    let mut pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, y)| t >= lo as f64 && t <= hi as f64 && y > STATIONARITY_FLOOR)
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.is_empty() {
        return Err(Error::NonPositiveSeries);
    }

    // Snap each logarithmic target to the first recorded point at or after
    // it (falling back to the last point past the top), then deduplicate.
    let (llo, lhi) = ((lo as f64).ln(), (hi as f64).ln());
    let mut chosen: Vec<usize> = Vec::with_capacity(n_samples);
    for i in 0..n_samples.max(1) {
        let f = if n_samples > 1 {
            i as f64 / (n_samples - 1) as f64
        } else {
            0.0
        };
        let target = (llo + f * (lhi - llo)).exp();
        let idx = pts.partition_point(|&(t, _)| t < target).min(pts.len() - 1);
        chosen.push(idx);
    }
    chosen.sort_unstable();
    chosen.dedup();

    if chosen.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            found: chosen.len(),
            min: MIN_FIT_SAMPLES,
        });
    }

    let lt: Vec<f64> = chosen.iter().map(|&i| pts[i].0.ln()).collect();
    let ly: Vec<f64> = chosen.iter().map(|&i| pts[i].1.ln()).collect();
    let n = lt.len() as f64;
    let mean_t = lt.iter().sum::<f64>() / n;
    let mean_y = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lt.iter().map(|v| (v - mean_t).powi(2)).sum();
    let sxy: f64 = lt
        .iter()
        .zip(&ly)
        .map(|(t, y)| (t - mean_t) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_t;
    let ssr: f64 = lt
        .iter()
        .zip(&ly)
        .map(|(t, y)| {
            let r = y - (intercept + slope * t);
            r * r
        })
        .sum();
    let stderr = if lt.len() > 2 && sxx > 0.0 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(PowerLawFit {
        exponent: slope,
        intercept,
        exponent_stderr: stderr,
        window: (lo, hi),
        sample_times: chosen.iter().map(|&i| pts[i].0.round() as u64).collect(),
    })
}

/// One point of the α(θ) diagram.
#[derive(Debug)]
pub struct AlphaPoint {
    /// Coin angle θ (radians) applied as both θ_H and θ_F.
    pub theta: f64,
    pub fit: Result<PowerLawFit>,
}

/// Spreading exponents over a grid of coin angles in fractal mode with
/// θ_H = θ_F = θ.
///
/// `base` supplies everything but the angles (initial state, `t_max`,
/// parallelism — grid points are independent jobs under
/// `base.parallelism`). Failures are reported per point without aborting
/// the sweep. The fit runs over `window` (default `[t_max/100, t_max]`)
/// with `m₂` recorded exactly at the fit's sample times.
pub fn alpha_diagram(
    thetas: &[f64],
    base: &RunSpec,
    window: Option<(u64, u64)>,
    n_samples: usize,
) -> Vec<AlphaPoint> {
    let window = window.unwrap_or_else(|| default_fit_window(base.t_max));
    let fits = base.parallelism.map(thetas, |&theta| {
        let mut spec = base.clone();
        spec.mode = Mode::Fractal;
        spec.params.theta_h = theta;
        spec.params.theta_f = theta;
        spreading_exponent(&spec, window, n_samples)
    });
    thetas
        .iter()
        .zip(fits)
        .map(|(&theta, fit)| AlphaPoint { theta, fit })
        .collect()
}

/// Evolve one spec and fit its second-moment series over `window`.
pub fn spreading_exponent(
    spec: &RunSpec,
    window: (u64, u64),
    n_samples: usize,
) -> Result<PowerLawFit> {
    let cadence = Cadence::LogSpaced {
        lo: window.0,
        hi: window.1,
        n: n_samples,
    };
    let observers = Observers::at(cadence, spec.t_max).with_second_moment();
    let out = evolve(spec, &observers)?;
    let series = out
        .series
        .second_moment
        .expect("second moment was recorded");
    loglog_fit_with(&series.pairs(), window, n_samples)
}

/// Record `D(ρ_c(t), ρ_c(t+1))` at the fit's sample times.
///
/// The evolution runs one step past `spec.t_max` so the distance is defined
/// at the window's upper edge as well. Stationary samples stay in the
/// series (an unmoved state is data); [`split_stationary`] separates them
/// before fitting.
pub fn trace_distance_series(
    spec: &RunSpec,
    window: (u64, u64),
    n_samples: usize,
) -> Result<Series> {
    let mut spec = spec.clone();
    spec.t_max += 1;
    spec.window_cap = spec.window_cap.max(2 * spec.t_max + 1);
    let cadence = Cadence::LogSpaced {
        lo: window.0,
        hi: window.1,
        n: n_samples,
    };
    let observers = Observers::at(cadence, spec.t_max).with_trace_distance();
    let out = evolve(&spec, &observers)?;
    Ok(out
        .series
        .trace_distance
        .expect("trace distance was recorded"))
}

/// Observable values at or below this are working-precision zeros.
///
/// Some evolutions are exactly stationary on a subsequence: a swap coin
/// (θ = 90°) bounces the walker between its origin and one neighbour, so
/// the position variance returns to exactly 0 on even steps, and the
/// uniform Hadamard walk from the symmetric start repeats its coin state on
/// every other step, making consecutive trace distances exactly 0 there. In
/// floating point those zeros surface as rounding residue around 1e-13 or
/// below, many orders under any genuine signal in the same series. Such
/// samples say "nothing moved", not "motion of size 1e-13", so fits must
/// not see them. The floor sits midway (in decades) between accumulated
/// rounding noise and the smallest genuine signals the fit windows reach.
pub const STATIONARITY_FLOOR: f64 = 1e-10;

/// Split a trace-distance series into fit-usable `(t, D)` points and the
/// count of stationary samples (those at or below [`STATIONARITY_FLOOR`]),
/// which are excluded from log fits and reported separately.
pub fn split_stationary(series: &Series) -> (Vec<(f64, f64)>, usize) {
    let mut points = Vec::with_capacity(series.times.len());
    let mut stationary = 0usize;
    for (t, v) in series.iter() {
        if v > STATIONARITY_FLOOR {
            points.push((t as f64, v));
        } else {
            stationary += 1;
        }
    }
    (points, stationary)
}

/// Arithmetic mean of a series over `t >= t0` (the asymptotic regime).
pub fn asymptotic_mean_entropy(series: &[(u64, f64)], t0: u64) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0u64;
    for &(t, v) in series {
        if t >= t0 {
            sum += v;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyAverageWindow { t0 });
    }
    Ok(sum / count as f64)
}

/// Default start of the asymptotic averaging window: `t_max / 2`.
pub fn default_entropy_t0(t_max: u64) -> u64 {
    t_max / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_power_laws_are_recovered_exactly() {
        let quad: Vec<(f64, f64)> = (1..=10_000)
            .map(|t| (t as f64, (t as f64).powi(2)))
            .collect();
        let fit = loglog_fit(&quad, (100, 10_000)).unwrap();
        assert_abs_diff_eq!(fit.exponent, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.exponent_stderr, 0.0, epsilon = 1e-12);

        let decay: Vec<(f64, f64)> = (1..=10_000)
            .map(|t| (t as f64, 7.0 * (t as f64).powf(-1.5)))
            .collect();
        let fit = loglog_fit(&decay, (100, 10_000)).unwrap();
        assert_abs_diff_eq!(fit.decay_exponent(), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn fit_errors_are_specific() {
        let flat: Vec<(f64, f64)> = (1..=100).map(|t| (t as f64, 0.0)).collect();
        assert!(matches!(
            loglog_fit(&flat, (1, 100)),
            Err(Error::NonPositiveSeries)
        ));

        let few: Vec<(f64, f64)> = (1..=5).map(|t| (t as f64, t as f64)).collect();
        assert!(matches!(
            loglog_fit(&few, (1, 5)),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn zeros_are_excluded_before_sampling() {
        // A decaying series with exact zeros sprinkled in: the fit must
        // ignore the zeros and still recover the law.
        let series: Vec<(f64, f64)> = (1..=2000)
            .map(|t| {
                let y = if t % 7 == 0 {
                    0.0
                } else {
                    3.0 * (t as f64).powf(-0.5)
                };
                (t as f64, y)
            })
            .collect();
        let fit = loglog_fit(&series, (10, 2000)).unwrap();
        assert_abs_diff_eq!(fit.decay_exponent(), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn log_spacing_is_sorted_unique_and_bounded() {
        let ts = log_spaced_times(100, 10_000, 50);
        assert!(ts.len() > 40 && ts.len() <= 50);
        assert_eq!(*ts.first().unwrap(), 100);
        assert_eq!(*ts.last().unwrap(), 10_000);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(log_spaced_times(5, 5, 10), vec![5]);
        assert!(log_spaced_times(10, 2, 10).is_empty());
    }

    #[test]
    fn mean_entropy_window() {
        let series: Vec<(u64, f64)> = (0..10).map(|t| (t, t as f64)).collect();
        assert_abs_diff_eq!(asymptotic_mean_entropy(&series, 5).unwrap(), 7.0);
        assert!(matches!(
            asymptotic_mean_entropy(&series, 100),
            Err(Error::EmptyAverageWindow { t0: 100 })
        ));
    }
}
