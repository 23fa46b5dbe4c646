//! Carpet invariants checked against an independent binomial-parity oracle.

use fractal_walk::{ones_in_rows, PackedRow, PatternRow};
use proptest::prelude::*;

/// Independent oracle: `b_t(x)` equals the parity of the binomial
/// coefficient `C(t, (t+x)/2)` on even-parity sites. By Kummer's theorem
/// `C(n, k)` is odd exactly when adding `k` and `n - k` in binary carries
/// nowhere, i.e. `k & (n - k) == 0`.
fn binomial_parity_bit(t: u64, x: i64) -> u8 {
    let ti = t as i64;
    if x < -ti || x > ti || (x + ti) % 2 != 0 {
        return 0;
    }
    let k = ((x + ti) / 2) as u64;
    u8::from(k & (t - k) == 0)
}

#[test]
fn rows_match_binomial_parity_up_to_t_300() {
    let mut row = PatternRow::seed();
    for t in 0..=300u64 {
        if t > 0 {
            row = row.next();
        }
        for x in row.x_range() {
            assert_eq!(
                row.bit(x),
                binomial_parity_bit(t, x),
                "mismatch at t={t}, x={x}"
            );
        }
    }
}

#[test]
fn rows_are_reflection_symmetric_and_parity_sparse() {
    let mut row = PatternRow::seed();
    for t in 0..=512u64 {
        if t > 0 {
            row = row.next();
        }
        assert_eq!(row.bit(-(t as i64)), 1, "left edge at t={t}");
        assert_eq!(row.bit(t as i64), 1, "right edge at t={t}");
        for x in 0..=t as i64 {
            assert_eq!(row.bit(x), row.bit(-x), "asymmetry at t={t}, x={x}");
            if (x + t as i64) % 2 != 0 {
                assert_eq!(row.bit(x), 0, "parity violation at t={t}, x={x}");
            }
        }
    }
}

#[test]
fn ones_counts_follow_the_carpet_self_similarity() {
    for k in 0..=10u32 {
        assert_eq!(ones_in_rows(1u64 << k), 3u64.pow(k), "rows=2^{k}");
    }
}

proptest! {
    #[test]
    fn packed_bit_lookup_agrees_with_oracle(t in 0u64..400, xs in proptest::collection::vec(-450i64..450, 1..20)) {
        let mut row = PackedRow::seed();
        for _ in 0..t {
            row.step();
        }
        for x in xs {
            prop_assert_eq!(row.bit(x), binomial_parity_bit(t, x));
        }
    }

    #[test]
    fn interval_estimator_is_shift_symmetric_and_in_range(x in 0i64..200) {
        let t_max = 2_000u64;
        let tau = fractal_walk::coin_change_intervals(x, t_max).unwrap();
        let tau_neg = fractal_walk::coin_change_intervals(-x, t_max).unwrap();
        prop_assert_eq!(tau, tau_neg);
        if tau.is_finite() {
            // A mean gap is at least one step and fits inside the watch span.
            prop_assert!(tau >= 1.0);
            prop_assert!(tau <= (t_max - x.unsigned_abs()) as f64);
        }
    }
}
