//! The two coin families and their 2x2 unitaries.
//!
//! Both coins are one-parameter rotations acting on the walker's internal
//! (up/down) state:
//!
//! ```text
//! C_H(θ) = [ cos θ   sin θ ]        C_F(θ) = [ cos θ   i sin θ ]
//!          [ sin θ  -cos θ ]                 [ i sin θ   cos θ ]
//! ```
//!
//! `C_H` is the Hadamard family (the textbook Hadamard coin at θ = π/4);
//! `C_F` is the Fourier family (the identity at θ = 0, the 2-point discrete
//! Fourier transform at θ = π/4 up to phases).

use num_complex::Complex64;

/// Which of the two coin families acts at a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoinKind {
    Hadamard,
    Fourier,
}

/// The pair of rotation angles (radians) that fixes both coin matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinParams {
    pub theta_h: f64,
    pub theta_f: f64,
}

impl CoinParams {
    pub fn new(theta_h: f64, theta_f: f64) -> Self {
        CoinParams { theta_h, theta_f }
    }
}

/// A concrete 2x2 coin, stored entrywise in the (up, down) basis.
///
/// Entry names follow the transfer-matrix convention: `uu` maps an incoming
/// up component onto up, `ud` maps an incoming down component onto up, and
/// so on — i.e. `uu = <U|C|U>`, `ud = <U|C|D>`, `du = <D|C|U>`,
/// `dd = <D|C|D>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinMatrix {
    pub uu: Complex64,
    pub ud: Complex64,
    pub du: Complex64,
    pub dd: Complex64,
}

/// Build the coin matrix of the given family at the given angles.
pub fn coin_matrix(kind: CoinKind, params: &CoinParams) -> CoinMatrix {
    match kind {
        CoinKind::Hadamard => {
            let (s, c) = params.theta_h.sin_cos();
            CoinMatrix {
                uu: Complex64::new(c, 0.0),
                ud: Complex64::new(s, 0.0),
                du: Complex64::new(s, 0.0),
                dd: Complex64::new(-c, 0.0),
            }
        }
        CoinKind::Fourier => {
            let (s, c) = params.theta_f.sin_cos();
            CoinMatrix {
                uu: Complex64::new(c, 0.0),
                ud: Complex64::new(0.0, s),
                du: Complex64::new(0.0, s),
                dd: Complex64::new(c, 0.0),
            }
        }
    }
}

impl CoinMatrix {
    /// Deviation of this matrix from unitarity: the largest entrywise
    /// distance of `M M†` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        // Rows of M: (uu, ud) and (du, dd).
        let r00 = self.uu * self.uu.conj() + self.ud * self.ud.conj();
        let r01 = self.uu * self.du.conj() + self.ud * self.dd.conj();
        let r11 = self.du * self.du.conj() + self.dd * self.dd.conj();
        let one = Complex64::new(1.0, 0.0);
        (r00 - one).norm().max(r01.norm()).max((r11 - one).norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn hadamard_at_quarter_pi_is_the_textbook_coin() {
        let m = coin_matrix(CoinKind::Hadamard, &CoinParams::new(PI / 4.0, 0.0));
        assert_abs_diff_eq!(m.uu.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(m.ud.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(m.du.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(m.dd.re, -FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_eq!(m.uu.im, 0.0);
    }

    #[test]
    fn fourier_at_zero_is_the_identity() {
        let m = coin_matrix(CoinKind::Fourier, &CoinParams::new(0.0, 0.0));
        assert_eq!(m.uu, Complex64::new(1.0, 0.0));
        assert_eq!(m.ud, Complex64::new(0.0, 0.0));
        assert_eq!(m.du, Complex64::new(0.0, 0.0));
        assert_eq!(m.dd, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn fourier_at_quarter_pi_has_imaginary_off_diagonals() {
        let m = coin_matrix(CoinKind::Fourier, &CoinParams::new(0.0, PI / 4.0));
        assert_abs_diff_eq!(m.uu.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(m.ud.im, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(m.du.im, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(m.dd.re, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn both_families_stay_unitary_across_angles() {
        for i in 0..=36 {
            let th = i as f64 * PI / 18.0;
            let p = CoinParams::new(th, th / 2.0);
            for kind in [CoinKind::Hadamard, CoinKind::Fourier] {
                assert!(coin_matrix(kind, &p).unitarity_defect() < 1e-12);
            }
        }
    }
}
