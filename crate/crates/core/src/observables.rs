//! Measured quantities: position statistics, interference, the reduced coin
//! state and the distances/entropies built on it.

use crate::coin::{coin_matrix, CoinKind, CoinMatrix, CoinParams};
use crate::error::{Error, Result};
use crate::pattern::PatternRow;
use crate::walk::{Mode, WalkerState};
use num_complex::Complex64;

/// Eigenvalues of a density matrix may undershoot 0 or overshoot 1 by this
/// much before the matrix is rejected as invalid.
pub const DENSITY_EIGENVALUE_TOLERANCE: f64 = 1e-10;

/// The position distribution `P_t(x)` with its maximum.
#[derive(Debug, Clone)]
pub struct PositionDistribution {
    t: u64,
    x_min: i64,
    values: Vec<f64>,
    max: f64,
}

impl PositionDistribution {
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn x_min(&self) -> i64 {
        self.x_min
    }

    pub fn x_range(&self) -> std::ops::RangeInclusive<i64> {
        self.x_min..=self.x_min + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `P_t(x)`, zero outside the stored window.
    pub fn value_at(&self, x: i64) -> f64 {
        let i = x - self.x_min;
        if i < 0 || i as usize >= self.values.len() {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    /// The largest probability in the row, `P_t^max`.
    pub fn max_value(&self) -> f64 {
        self.max
    }
}

/// Per-site probabilities of a state, `P(x) = |ψ_U(x)|² + |ψ_D(x)|²`.
pub fn position_distribution(state: &WalkerState) -> PositionDistribution {
    let mut values = Vec::with_capacity(state.x_range().count());
    let mut max = 0.0f64;
    for x in state.x_range() {
        let p = state.probability_at(x);
        max = max.max(p);
        values.push(p);
    }
    PositionDistribution {
        t: state.t(),
        x_min: state.x_min(),
        values,
        max,
    }
}

/// Second statistical moment `m₂ = Σ_x x² P(x)`.
pub fn second_moment(p: &PositionDistribution) -> f64 {
    let mut m2 = 0.0;
    for (i, v) in p.values.iter().enumerate() {
        let x = (p.x_min + i as i64) as f64;
        m2 += x * x * v;
    }
    m2
}

/// The interference degree `μ(x, t)` on the light-cone window at time `t`.
#[derive(Debug, Clone)]
pub struct InterferenceField {
    t: u64,
    x_min: i64,
    values: Vec<f64>,
}

impl InterferenceField {
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn x_min(&self) -> i64 {
        self.x_min
    }

    pub fn x_range(&self) -> std::ops::RangeInclusive<i64> {
        self.x_min..=self.x_min + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, x: i64) -> f64 {
        let i = x - self.x_min;
        if i < 0 || i as usize >= self.values.len() {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// The `t = 0` convention: interference one at the starting site, zero
/// elsewhere.
pub fn initial_interference(x0: i64) -> InterferenceField {
    InterferenceField {
        t: 0,
        x_min: x0,
        values: vec![1.0],
    }
}

/// Interference degree of the state *one step after* `prev`.
///
/// Writing the incoming flux onto site `x` as `a + b` (up channel, from the
/// left neighbour) and `c + d` (down channel, from the right neighbour),
/// with
///
/// ```text
/// a = c_uu(x-1) ψ_U(x-1)     b = c_ud(x-1) ψ_D(x-1)
/// c = c_du(x+1) ψ_U(x+1)     d = c_dd(x+1) ψ_D(x+1)
/// ```
///
/// the cross terms define `f(x) = a b̄ + c d̄` and the degree of
/// interference is `μ(x) = |4 Re f(x)|`. In fractal mode `prev_row` must be
/// the carpet row at `prev.t()`; uniform modes ignore it.
pub fn interference_degree(
    prev: &WalkerState,
    prev_row: Option<&PatternRow>,
    params: &CoinParams,
    mode: Mode,
) -> Result<InterferenceField> {
    let flux = flux_branches(prev, prev_row, params, mode)?;
    let values = flux.re_f.iter().map(|re| (4.0 * re).abs()).collect();
    Ok(InterferenceField {
        t: flux.t,
        x_min: flux.x_min,
        values,
    })
}

/// The two probability branches behind visibility: at every target site the
/// same-step probability splits as `P± = common ± 2 Re f`, where `common`
/// collects the four direct intensities and `f` the cross terms.
#[derive(Debug, Clone)]
pub struct FluxBranches {
    pub t: u64,
    pub x_min: i64,
    /// `|a|² + |b|² + |c|² + |d|²` per target site.
    pub common: Vec<f64>,
    /// `Re f` per target site.
    pub re_f: Vec<f64>,
}

impl FluxBranches {
    /// Fringe visibility at `x`, or `None` where no flux arrives.
    pub fn visibility_at(&self, x: i64) -> Option<f64> {
        let i = x - self.x_min;
        if i < 0 || i as usize >= self.common.len() {
            return None;
        }
        let c = self.common[i as usize];
        let r = self.re_f[i as usize];
        visibility(c + 2.0 * r, c - 2.0 * r)
    }
}

/// Compute the interference branches for the step out of `prev`.
pub fn flux_branches(
    prev: &WalkerState,
    prev_row: Option<&PatternRow>,
    params: &CoinParams,
    mode: Mode,
) -> Result<FluxBranches> {
    let mh = coin_matrix(CoinKind::Hadamard, params);
    let mf = coin_matrix(CoinKind::Fourier, params);
    let row = match mode {
        Mode::Fractal => {
            let row = prev_row.ok_or(Error::MissingPatternRow)?;
            if row.t() != prev.t() {
                return Err(Error::RowStepMismatch {
                    row_t: row.t(),
                    state_t: prev.t(),
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

    let t1 = prev.t() + 1;
    let x_min = prev.x0() - t1 as i64;
    let width = 2 * t1 as usize + 1;
    let mut common = Vec::with_capacity(width);
    let mut re_f = Vec::with_capacity(width);
    for i in 0..width {
        let x = x_min + i as i64;
        let ml = coin_at(x - 1);
        let mr = coin_at(x + 1);
        let a = ml.uu * prev.up_at(x - 1);
        let b = ml.ud * prev.down_at(x - 1);
        let c = mr.du * prev.up_at(x + 1);
        let d = mr.dd * prev.down_at(x + 1);
        let f = a * b.conj() + c * d.conj();
        common.push(a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr());
        re_f.push(f.re);
    }
    Ok(FluxBranches {
        t: t1,
        x_min,
        common,
        re_f,
    })
}

/// Fringe visibility `(P_max - P_min) / (P_max + P_min)`.
///
/// Returns `None` when no flux is present (`P_max + P_min = 0`), so callers
/// can emit an explicit sentinel instead of a NaN.
pub fn visibility(p_max: f64, p_min: f64) -> Option<f64> {
    let total = p_max + p_min;
    if total <= 0.0 {
        None
    } else {
        Some((p_max - p_min) / total)
    }
}

/// A 2x2 density matrix in the (up, down) coin basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    pub uu: Complex64,
    pub ud: Complex64,
    pub du: Complex64,
    pub dd: Complex64,
}

impl DensityMatrix2 {
    pub fn trace(&self) -> f64 {
        self.uu.re + self.dd.re
    }

    /// Determinant of the matrix; real for Hermitian input.
    pub fn det(&self) -> f64 {
        (self.uu * self.dd - self.ud * self.du).re
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        (self.ud - self.du.conj())
            .norm()
            .max(self.uu.im.abs())
            .max(self.dd.im.abs())
    }

    /// Eigenvalues `(λ₊, λ₋)` in descending order, from the characteristic
    /// polynomial `λ² - tr λ + det`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let tr = self.trace();
        let half = tr / 2.0;
        let disc = (half * half - self.det()).max(0.0).sqrt();
        (half + disc, half - disc)
    }

    /// Difference `self - other`, entry by entry.
    pub fn sub(&self, other: &DensityMatrix2) -> DensityMatrix2 {
        DensityMatrix2 {
            uu: self.uu - other.uu,
            ud: self.ud - other.ud,
            du: self.du - other.du,
            dd: self.dd - other.dd,
        }
    }
}

/// Reduced coin state: trace out position,
/// `ρ_c = Σ_x (ψ_U, ψ_D)(x) ⊗ (ψ_U, ψ_D)(x)†`.
pub fn coin_density_matrix(state: &WalkerState) -> DensityMatrix2 {
    let mut uu = 0.0f64;
    let mut dd = 0.0f64;
    let mut ud = Complex64::new(0.0, 0.0);
    for x in state.x_range() {
        let u = state.up_at(x);
        let d = state.down_at(x);
        uu += u.norm_sqr();
        dd += d.norm_sqr();
        ud += u * d.conj();
    }
    DensityMatrix2 {
        uu: Complex64::new(uu, 0.0),
        ud,
        du: ud.conj(),
        dd: Complex64::new(dd, 0.0),
    }
}

/// Same reduction over parity-packed buffers (used by the engine; summed in
/// the same fixed order as the dense version restricted to its support).
pub(crate) fn coin_density_packed(up: &[Complex64], dn: &[Complex64]) -> DensityMatrix2 {
    let mut uu = 0.0f64;
    let mut dd = 0.0f64;
    let mut ud = Complex64::new(0.0, 0.0);
    for (u, d) in up.iter().zip(dn) {
        uu += u.norm_sqr();
        dd += d.norm_sqr();
        ud += u * d.conj();
    }
    DensityMatrix2 {
        uu: Complex64::new(uu, 0.0),
        ud,
        du: ud.conj(),
        dd: Complex64::new(dd, 0.0),
    }
}

/// Entanglement entropy `S_E = -λ₊ log₂ λ₊ - λ₋ log₂ λ₋` of a coin state,
/// in `[0, 1]` with the convention `0 · log 0 = 0`.
pub fn entanglement_entropy(rho: &DensityMatrix2) -> Result<f64> {
    let (hi, lo) = rho.eigenvalues();
    for lambda in [hi, lo] {
        if !(-DENSITY_EIGENVALUE_TOLERANCE..=1.0 + DENSITY_EIGENVALUE_TOLERANCE).contains(&lambda) {
            return Err(Error::InvalidDensityMatrix(lambda));
        }
    }
    let mut s = 0.0;
    for lambda in [hi, lo] {
        let l = lambda.clamp(0.0, 1.0);
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s)
}

/// Trace distance `D = ½ ‖ρ - σ‖₁` between two coin states.
///
/// For unit-trace inputs the difference is traceless and Hermitian, so its
/// eigenvalues are `±√(-det Δ)` and the distance collapses to the closed
/// form `√(-det Δ)` (clamped at zero against rounding).
pub fn trace_distance(rho: &DensityMatrix2, sigma: &DensityMatrix2) -> f64 {
    let delta = rho.sub(sigma);
    (-delta.det()).max(0.0).sqrt()
}

/// Closed-form interference degree for the first six steps of the
/// fractal-mode walk with the identity Fourier coin (`θ_F = 0`) and the
/// balanced real start (`γ = π/2`, `φ = 0`) at the origin:
///
/// * `t = 0`: 1 at the origin;
/// * `t = 1`: `2 sin θ_H cos θ_H` at `x = ±1`;
/// * `t = 2, 3, 5`: identically zero;
/// * `t = 4`: `4 cos²θ_H sin³θ_H cos 2θ_H` at `x = 0` and half that at
///   `x = ±2`.
///
/// Steps beyond `t = 5` have no closed form here and return an error.
pub fn analytic_interference_oracle(theta_h: f64, t: u64) -> Result<InterferenceField> {
    if t > 5 {
        return Err(Error::OracleStepUnsupported(t));
    }
    let width = 2 * t as usize + 1;
    let x_min = -(t as i64);
    let mut values = vec![0.0; width];
    let at = |values: &mut Vec<f64>, x: i64, v: f64| {
        values[(x - x_min) as usize] = v;
    };
    let (s, c) = theta_h.sin_cos();
    match t {
        0 => at(&mut values, 0, 1.0),
        1 => {
            let mu = (2.0 * s * c).abs();
            at(&mut values, -1, mu);
            at(&mut values, 1, mu);
        }
        4 => {
            let mu0 = (4.0 * c * c * s * s * s * (2.0 * theta_h).cos()).abs();
            at(&mut values, 0, mu0);
            at(&mut values, -2, mu0 / 2.0);
            at(&mut values, 2, mu0 / 2.0);
        }
        _ => {}
    }
    Ok(InterferenceField { t, x_min, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::initial_state;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn localized_state_distribution() {
        let s = initial_state(FRAC_PI_2, FRAC_PI_2, 0);
        let p = position_distribution(&s);
        assert_eq!(p.value_at(0), 1.0);
        assert_eq!(p.max_value(), 1.0);
        assert_eq!(second_moment(&p), 0.0);
    }

    #[test]
    fn pure_coin_state_has_zero_entropy_and_expected_matrix() {
        let s = initial_state(FRAC_PI_2, FRAC_PI_2, 0);
        let rho = coin_density_matrix(&s);
        assert_abs_diff_eq!(rho.uu.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.dd.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.ud.im, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-15);
        assert!(rho.hermiticity_defect() < 1e-15);
        assert_abs_diff_eq!(entanglement_entropy(&rho).unwrap(), 0.0, epsilon = 1e-7);
    }

    #[test]
    fn one_hadamard_step_maximizes_entropy() {
        // From the symmetric start the up/down components land on disjoint
        // sites, so the coin state becomes I/2.
        let params = CoinParams::new(FRAC_PI_4, 0.0);
        let s = initial_state(FRAC_PI_2, FRAC_PI_2, 0);
        let s1 = crate::walk::step(&s, None, &params, Mode::UniformHadamard).unwrap();
        let rho = coin_density_matrix(&s1);
        assert_abs_diff_eq!(rho.uu.re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.ud.norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(entanglement_entropy(&rho).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_rejects_nonphysical_matrices() {
        let bad = DensityMatrix2 {
            uu: Complex64::new(1.2, 0.0),
            ud: Complex64::new(0.0, 0.0),
            du: Complex64::new(0.0, 0.0),
            dd: Complex64::new(-0.2, 0.0),
        };
        assert!(matches!(
            entanglement_entropy(&bad),
            Err(Error::InvalidDensityMatrix(_))
        ));
    }

    #[test]
    fn trace_distance_basics() {
        let pure_up = DensityMatrix2 {
            uu: Complex64::new(1.0, 0.0),
            ud: Complex64::new(0.0, 0.0),
            du: Complex64::new(0.0, 0.0),
            dd: Complex64::new(0.0, 0.0),
        };
        let pure_dn = DensityMatrix2 {
            uu: Complex64::new(0.0, 0.0),
            ud: Complex64::new(0.0, 0.0),
            du: Complex64::new(0.0, 0.0),
            dd: Complex64::new(1.0, 0.0),
        };
        assert_eq!(trace_distance(&pure_up, &pure_up), 0.0);
        assert_abs_diff_eq!(trace_distance(&pure_up, &pure_dn), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn visibility_is_one_for_fully_constructive_flux_and_none_for_no_flux() {
        assert_eq!(visibility(0.0, 0.0), None);
        assert_abs_diff_eq!(visibility(2.0, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(visibility(0.0, 2.0).unwrap(), -1.0, epsilon = 1e-15);

        // One fractal step from the balanced real start at θ_H = 45°: the
        // flux onto x = ±1 is fully constructive/destructive.
        let params = CoinParams::new(FRAC_PI_4, 0.0);
        let prev = initial_state(FRAC_PI_2, 0.0, 0);
        let row = PatternRow::seed();
        let flux = flux_branches(&prev, Some(&row), &params, Mode::Fractal).unwrap();
        assert_abs_diff_eq!(flux.visibility_at(1).unwrap().abs(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(flux.visibility_at(-1).unwrap().abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn oracle_rejects_unsupported_steps_and_covers_known_values() {
        assert!(matches!(
            analytic_interference_oracle(0.3, 6),
            Err(Error::OracleStepUnsupported(6))
        ));
        let th = 30f64.to_radians();
        let f1 = analytic_interference_oracle(th, 1).unwrap();
        assert_abs_diff_eq!(f1.value_at(1), 3f64.sqrt() / 2.0, epsilon = 1e-15);
        let f4 = analytic_interference_oracle(th, 4).unwrap();
        assert_abs_diff_eq!(f4.value_at(0), 0.1875, epsilon = 1e-15);
        assert_abs_diff_eq!(f4.value_at(2), 0.09375, epsilon = 1e-15);
        // θ_H = π/4 kills the t = 4 field through the cos 2θ factor.
        let f4q = analytic_interference_oracle(FRAC_PI_4, 4).unwrap();
        assert!(f4q.values().iter().all(|v| v.abs() < 1e-16));
        for t in [2u64, 3, 5] {
            let f = analytic_interference_oracle(0.7, t).unwrap();
            assert!(f.values().iter().all(|&v| v == 0.0));
        }
    }
}
