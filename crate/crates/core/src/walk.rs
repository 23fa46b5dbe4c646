//! Walker state and the coin-plus-shift update.
//!
//! One step applies, at every site, the coin selected for that site and
//! time, then shifts the up component right and the down component left:
//!
//! ```text
//! ψ'_U(x) = c_uu(x-1) ψ_U(x-1) + c_ud(x-1) ψ_D(x-1)
//! ψ'_D(x) = c_du(x+1) ψ_U(x+1) + c_dd(x+1) ψ_D(x+1)
//! ```
//!
//! where the coin entries are read at the *source* site. In fractal mode the
//! pattern row current at time `t` decides which coin family acts where; the
//! two uniform modes apply a single family everywhere.
//!
//! This module holds the inspectable, allocation-per-step implementation
//! used for small-step work and as the reference the fast engine
//! ([`crate::engine::Simulation`]) is tested against.

use crate::coin::{coin_matrix, CoinKind, CoinMatrix, CoinParams};
use crate::error::{Error, Result};
use crate::pattern::PatternRow;
use num_complex::Complex64;

const C_ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// How coins are assigned across the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Site- and time-dependent choice driven by the carpet bits:
    /// 1 selects the Hadamard-family coin, 0 the Fourier-family coin.
    Fractal,
    /// The Hadamard-family coin everywhere, always (disorder-free reference).
    UniformHadamard,
    /// The Fourier-family coin everywhere, always.
    UniformFourier,
}

/// The walker's spinor field at a fixed time, on the exact light-cone
/// window `[x0 - t, x0 + t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    t: u64,
    x0: i64,
    x_min: i64,
    up: Vec<Complex64>,
    down: Vec<Complex64>,
}

impl WalkerState {
    pub fn t(&self) -> u64 {
        self.t
    }

    /// The starting site of this walk.
    pub fn x0(&self) -> i64 {
        self.x0
    }

    pub fn x_min(&self) -> i64 {
        self.x_min
    }

    pub fn x_max(&self) -> i64 {
        self.x_min + self.up.len() as i64 - 1
    }

    /// Inclusive window `[x0 - t, x0 + t]`.
    pub fn x_range(&self) -> std::ops::RangeInclusive<i64> {
        self.x_min()..=self.x_max()
    }

    /// Up amplitude at `x`; zero outside the window.
    pub fn up_at(&self, x: i64) -> Complex64 {
        self.amp(&self.up, x)
    }

    /// Down amplitude at `x`; zero outside the window.
    pub fn down_at(&self, x: i64) -> Complex64 {
        self.amp(&self.down, x)
    }

    fn amp(&self, buf: &[Complex64], x: i64) -> Complex64 {
        let i = x - self.x_min;
        if i < 0 || i as usize >= buf.len() {
            C_ZERO
        } else {
            buf[i as usize]
        }
    }

    /// `|ψ_U(x)|² + |ψ_D(x)|²`.
    pub fn probability_at(&self, x: i64) -> f64 {
        self.up_at(x).norm_sqr() + self.down_at(x).norm_sqr()
    }

    /// Total probability; unity up to rounding for any evolved state.
    pub fn norm(&self) -> f64 {
        self.up
            .iter()
            .zip(&self.down)
            .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
            .sum()
    }

    /// Assemble a state directly from per-site amplitudes (mainly for
    /// tests and for unpacking engine snapshots).
    pub fn from_amplitudes(
        t: u64,
        x0: i64,
        x_min: i64,
        up: Vec<Complex64>,
        down: Vec<Complex64>,
    ) -> Self {
        assert_eq!(up.len(), down.len(), "spinor component lengths differ");
        WalkerState {
            t,
            x0,
            x_min,
            up,
            down,
        }
    }
}

/// The walker localized at `x0` with coin state
/// `cos(γ/2) |U> + e^{iφ} sin(γ/2) |D>`.
pub fn initial_state(gamma: f64, phi: f64, x0: i64) -> WalkerState {
    let up = Complex64::new((gamma / 2.0).cos(), 0.0);
    let down = Complex64::from_polar((gamma / 2.0).sin(), phi);
    WalkerState {
        t: 0,
        x0,
        x_min: x0,
        up: vec![up],
        down: vec![down],
    }
}

/// Apply one coin-plus-shift step, returning the state at `t + 1`.
///
/// In [`Mode::Fractal`] the pattern row for the walker's *current* step must
/// be supplied; the uniform modes ignore `row`. Norm is preserved to within
/// a few ulps per step.
pub fn step(
    state: &WalkerState,
    row: Option<&PatternRow>,
    params: &CoinParams,
    mode: Mode,
) -> Result<WalkerState> {
    let mh = coin_matrix(CoinKind::Hadamard, params);
    let mf = coin_matrix(CoinKind::Fourier, params);
    let row = match mode {
        Mode::Fractal => {
            let row = row.ok_or(Error::MissingPatternRow)?;
            if row.t() != state.t {
                return Err(Error::RowStepMismatch {
                    row_t: row.t(),
                    state_t: state.t,
                });
            }
            Some(row)
        }
        _ => None,
    };
    let coin_at = |x: i64| -> CoinMatrix {
        match mode {
            Mode::Fractal => match row.unwrap().coin_kind_at(x) {
                CoinKind::Hadamard => mh,
                CoinKind::Fourier => mf,
            },
            Mode::UniformHadamard => mh,
            Mode::UniformFourier => mf,
        }
    };

    let t1 = state.t + 1;
    let x_min = state.x0 - t1 as i64;
    let width = 2 * t1 as usize + 1;
    let mut up = Vec::with_capacity(width);
    let mut down = Vec::with_capacity(width);
    for i in 0..width {
        let x = x_min + i as i64;
        let ml = coin_at(x - 1);
        let mr = coin_at(x + 1);
        up.push(ml.uu * state.up_at(x - 1) + ml.ud * state.down_at(x - 1));
        down.push(mr.du * state.up_at(x + 1) + mr.dd * state.down_at(x + 1));
    }
    Ok(WalkerState {
        t: t1,
        x0: state.x0,
        x_min,
        up,
        down,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::PatternRow;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn evolve_fractal(theta_h: f64, theta_f: f64, gamma: f64, phi: f64, t: u64) -> WalkerState {
        let params = CoinParams::new(theta_h, theta_f);
        let mut state = initial_state(gamma, phi, 0);
        let mut row = PatternRow::seed();
        for _ in 0..t {
            state = step(&state, Some(&row), &params, Mode::Fractal).unwrap();
            row = row.next();
        }
        state
    }

    #[test]
    fn initial_state_poles_and_balance() {
        let s = initial_state(0.0, 1.234, 0);
        assert_eq!(s.up_at(0), Complex64::new(1.0, 0.0));
        assert_eq!(s.down_at(0), Complex64::new(0.0, 0.0));

        let s = initial_state(FRAC_PI_2, 0.0, 0);
        assert_abs_diff_eq!(s.up_at(0).re, 1.0 / SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.down_at(0).re, 1.0 / SQRT_2, epsilon = 1e-15);

        let s = initial_state(FRAC_PI_2, FRAC_PI_2, 0);
        assert_abs_diff_eq!(s.down_at(0).im, 1.0 / SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.down_at(0).re, 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn one_step_matches_closed_form() {
        // Balanced real start, fractal mode: after one step the up weight
        // sits at +1 with amplitude (cos θ_H + sin θ_H)/√2 and the down
        // weight at -1 with (sin θ_H - cos θ_H)/√2.
        for theta_deg in [5.0_f64, 30.0, 45.0, 85.0] {
            let th = theta_deg.to_radians();
            let s = evolve_fractal(th, 0.0, FRAC_PI_2, 0.0, 1);
            assert_abs_diff_eq!(
                s.up_at(1).re,
                (th.cos() + th.sin()) / SQRT_2,
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(
                s.down_at(-1).re,
                (th.sin() - th.cos()) / SQRT_2,
                epsilon = 1e-15
            );
            assert_eq!(s.up_at(-1), C_ZERO);
            assert_eq!(s.down_at(1), C_ZERO);
            assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn two_steps_with_identity_fourier_match_closed_form() {
        let th = 0.3_f64;
        let s = evolve_fractal(th, 0.0, FRAC_PI_2, 0.0, 2);
        // Leading edge after two steps: cos θ_H (cos θ_H + sin θ_H)/√2.
        assert_abs_diff_eq!(
            s.up_at(2).re,
            th.cos() * (th.cos() + th.sin()) / SQRT_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn uniform_hadamard_two_step_distribution() {
        let params = CoinParams::new(PI / 4.0, 0.0);
        let mut s = initial_state(FRAC_PI_2, FRAC_PI_2, 0);
        for _ in 0..2 {
            s = step(&s, None, &params, Mode::UniformHadamard).unwrap();
        }
        assert_abs_diff_eq!(s.probability_at(-2), 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(s.probability_at(0), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.probability_at(2), 0.25, epsilon = 1e-14);
        assert_eq!(s.probability_at(1), 0.0);
        assert_eq!(s.probability_at(-1), 0.0);
    }

    #[test]
    fn fractal_mode_demands_a_matching_row() {
        let params = CoinParams::new(1.0, 0.5);
        let s = initial_state(FRAC_PI_2, FRAC_PI_2, 0);
        assert!(matches!(
            step(&s, None, &params, Mode::Fractal),
            Err(Error::MissingPatternRow)
        ));
        let wrong_row = PatternRow::seed().next();
        assert!(matches!(
            step(&s, Some(&wrong_row), &params, Mode::Fractal),
            Err(Error::RowStepMismatch {
                row_t: 1,
                state_t: 0
            })
        ));
    }

    #[test]
    fn light_cone_and_parity_zeros_are_exact() {
        let s = evolve_fractal(1.1, 0.7, 1.0, 0.4, 9);
        for x in -12..=12 {
            let p = s.probability_at(x);
            if x.abs() > 9 || (x + 9) % 2 != 0 {
                assert_eq!(p, 0.0, "nonzero at x={x}");
            }
        }
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-13);
    }
}
