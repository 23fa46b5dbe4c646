//! The binary coin-selection pattern: a Sierpinski-gasket carpet grown row
//! by row with the mod-2 neighbour rule
//!
//! ```text
//! b_{t+1}(x) = ( b_t(x-1) + b_t(x+1) ) mod 2,      b_0(x) = 1 iff x = 0,
//! ```
//!
//! with sites outside the current row reading as 0. Row `t` is supported on
//! `|x| <= t`, its edges are always 1, and every site with `x + t` odd is 0.

use crate::coin::CoinKind;
use crate::error::{Error, Result};

/// One fully materialized row `b_t(x)` of the carpet for `x` in `[-t, t]`.
///
/// This is the convenient, inspectable representation. Bulk consumers (the
/// walk engine, the interval statistics below) use [`PackedRow`], which
/// stores only the even-parity half of each row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternRow {
    t: u64,
    /// `bits[i]` holds `b_t(x)` for `x = i - t`; length `2t + 1`.
    bits: Vec<u8>,
}

impl PatternRow {
    /// Row `t = 0`: a single 1 at the origin.
    pub fn seed() -> Self {
        PatternRow {
            t: 0,
            bits: vec![1],
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// `b_t(x)`, with every site outside `[-t, t]` reading 0.
    pub fn bit(&self, x: i64) -> u8 {
        let t = self.t as i64;
        if x < -t || x > t {
            0
        } else {
            self.bits[(x + t) as usize]
        }
    }

    /// The next row, one step wider on each side.
    pub fn next(&self) -> Self {
        let t1 = self.t + 1;
        let width = 2 * t1 as usize + 1;
        let mut bits = Vec::with_capacity(width);
        for i in 0..width {
            let x = i as i64 - t1 as i64;
            bits.push(self.bit(x - 1) ^ self.bit(x + 1));
        }
        PatternRow { t: t1, bits }
    }

    /// Which coin acts at site `x` while this row is current: the pattern
    /// selects the Hadamard-family coin on 1-bits and the Fourier-family
    /// coin on 0-bits (including everywhere outside the cone).
    pub fn coin_kind_at(&self, x: i64) -> CoinKind {
        if self.bit(x) == 1 {
            CoinKind::Hadamard
        } else {
            CoinKind::Fourier
        }
    }

    /// Number of 1-bits in this row.
    pub fn ones(&self) -> u64 {
        self.bits.iter().map(|&b| b as u64).sum()
    }

    /// Inclusive site range `[-t, t]` covered by this row.
    pub fn x_range(&self) -> std::ops::RangeInclusive<i64> {
        -(self.t as i64)..=self.t as i64
    }
}

/// Parity-packed carpet row: only sites with `x + t` even are stored, since
/// all others are identically 0. Entry `k` holds `b_t(-t + 2k)`, `k = 0..=t`.
///
/// The packed update is the same stencil as the walk's shift: the row at
/// `t + 1` reads `nb[j] = b[j-1] XOR b[j]` with out-of-range terms 0, so the
/// two cone edges stay 1 forever.
#[derive(Debug, Clone)]
pub struct PackedRow {
    t: u64,
    bits: Vec<u8>,
    scratch: Vec<u8>,
}

impl PackedRow {
    pub fn seed() -> Self {
        PackedRow {
            t: 0,
            bits: vec![1],
            scratch: Vec::new(),
        }
    }

    /// Seed with capacity already reserved for rows up to `t_max`.
    pub fn seed_with_capacity(t_max: u64) -> Self {
        let cap = t_max as usize + 2;
        let mut bits = Vec::with_capacity(cap);
        bits.push(1);
        PackedRow {
            t: 0,
            bits,
            scratch: Vec::with_capacity(cap),
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// `b_t(x)` including the parity and cone zeros.
    pub fn bit(&self, x: i64) -> u8 {
        let t = self.t as i64;
        if x < -t || x > t || (x + t) & 1 != 0 {
            return 0;
        }
        self.bits[((x + t) / 2) as usize]
    }

    /// Direct access to the packed half-row (`k` -> `x = -t + 2k`).
    pub fn packed_bits(&self) -> &[u8] {
        &self.bits
    }

    /// Advance to row `t + 1` in place.
    pub fn step(&mut self) {
        let n = self.bits.len(); // t + 1
        self.scratch.clear();
        self.scratch.reserve(n + 1);
        self.scratch.push(self.bits[0]);
        for j in 1..n {
            self.scratch.push(self.bits[j - 1] ^ self.bits[j]);
        }
        self.scratch.push(self.bits[n - 1]);
        std::mem::swap(&mut self.bits, &mut self.scratch);
        self.t += 1;
    }

    pub fn ones(&self) -> u64 {
        self.bits.iter().map(|&b| b as u64).sum()
    }

    /// Expand into the dense representation.
    pub fn to_row(&self) -> PatternRow {
        let t = self.t;
        let width = 2 * t as usize + 1;
        let mut bits = vec![0u8; width];
        for (k, &b) in self.bits.iter().enumerate() {
            bits[2 * k] = b;
        }
        PatternRow { t, bits }
    }
}

/// Total count of 1-bits over rows `t = 0 .. n_rows-1`.
///
/// The carpet's self-similarity makes this count exactly `3^k` for
/// `n_rows = 2^k`, which is what pins its fractal dimension to `ln 3 / ln 2`.
pub fn ones_in_rows(n_rows: u64) -> u64 {
    let mut row = PackedRow::seed_with_capacity(n_rows);
    let mut total = 0;
    for t in 0..n_rows {
        if t > 0 {
            row.step();
        }
        total += row.ones();
    }
    total
}

/// Mean interval between coin changes at a fixed site `x`, watched up to
/// `t_max`.
///
/// A change happens at step `t` when `b_t(x) != b_{t-1}(x)`, counted for
/// `t` in `(|x|, t_max]` so the site is inside the cone at both steps. With
/// change times `t_1 < t_2 < ... < t_n` the mean interval is
/// `(t_n - t_1) / (n - 1)` — the ordinary inter-event mean. Fewer than two
/// change events leave no interval to average, so `+inf` is returned as the
/// sentinel (this includes sites that never change, such as `x = ±t_max`
/// which only just entered the cone).
pub fn coin_change_intervals(x: i64, t_max: u64) -> Result<f64> {
    let xa = x.unsigned_abs();
    if t_max < xa {
        return Err(Error::SiteBeyondHorizon { x, t_max });
    }
    let mut row = PackedRow::seed_with_capacity(t_max);
    let mut prev = if xa == 0 { 1u8 } else { 0u8 }; // b_0(x)
    let mut first_change: Option<u64> = None;
    let mut last_change = 0u64;
    let mut changes = 0u64;
    for t in 1..=t_max {
        row.step();
        let cur = row.bit(x);
        if t > xa && cur != prev {
            changes += 1;
            last_change = t;
            if first_change.is_none() {
                first_change = Some(t);
            }
        }
        prev = cur;
    }
    match (first_change, changes) {
        (Some(first), n) if n >= 2 => Ok((last_change - first) as f64 / (n - 1) as f64),
        _ => Ok(f64::INFINITY),
    }
}
