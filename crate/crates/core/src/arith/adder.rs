//! Ripple-carry and carry-window addition on `n`-bit integers.
//!
//! `exact_add` ripples carries through all positions. `windowed_add` computes
//! each carry from the `k` positions below it only, with zero carry-in, so a
//! carry that has to travel further than `k` positions is lost.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::statevec::Permutation;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdderConfig {
    pub n: usize,
    pub k: usize,
}

impl AdderConfig {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 || n > 31 || k == 0 || k > n {
            return Err(Error::InvalidParameter(format!(
                "adder needs 1 <= k <= n <= 31 (got n={n}, k={k})"
            )));
        }
        Ok(Self { n, k })
    }
}

pub fn majority(a: bool, b: bool, c: bool) -> bool {
    (a & b) | (a & c) | (b & c)
}

fn bit(x: u64, i: usize) -> bool {
    (x >> i) & 1 == 1
}

/// Sum as `n + 1` bits together with the carries `c_0 … c_n`.
pub fn exact_add(a: u64, b: u64, n: usize) -> (u64, Vec<bool>) {
    let mut carries = Vec::with_capacity(n + 1);
    let mut c = false;
    let mut s = 0u64;
    carries.push(c);
    for i in 0..n {
        let (ai, bi) = (bit(a, i), bit(b, i));
        s |= u64::from(ai ^ bi ^ c) << i;
        c = majority(ai, bi, c);
        carries.push(c);
    }
    s |= u64::from(c) << n;
    (s, carries)
}

/// Carry-out of adding bits `lo..hi` of `a` and `b` with zero carry-in.
fn slice_carry(a: u64, b: u64, lo: usize, hi: usize) -> bool {
    let mut c = false;
    for i in lo..hi {
        c = majority(bit(a, i), bit(b, i), c);
    }
    c
}

/// Sum as `n + 1` bits with every carry `c_i` computed from the window
/// `[max(0, i−k), i)` alone.
pub fn windowed_add(a: u64, b: u64, n: usize, k: usize) -> u64 {
    let mut s = 0u64;
    for i in 0..=n {
        let c = slice_carry(a, b, i.saturating_sub(k), i);
        let t = if i < n { bit(a, i) ^ bit(b, i) ^ c } else { c };
        s |= u64::from(t) << i;
    }
    s
}

/// Longest distance a carry travels: the largest `i − g` over positions `i`
/// receiving a carry first generated at position `g` (`a_g = b_g = 1`).
pub fn longest_carry_chain(a: u64, b: u64, n: usize) -> usize {
    let mut longest = 0;
    let mut origin: Option<usize> = None;
    for i in 0..n {
        if let Some(g) = origin {
            longest = longest.max(i - g);
        }
        let (ai, bi) = (bit(a, i), bit(b, i));
        origin = match (ai, bi) {
            (true, true) => Some(i),
            (false, false) => None,
            _ => origin,
        };
    }
    if let Some(g) = origin {
        longest = longest.max(n - g);
    }
    longest
}

/// Windowed adder as a permutation on `2n + 1` qubits:
/// `|a⟩|b⟩|t⟩ ↦ |a⟩|s mod 2^n⟩|t ⊕ s_n⟩` with `a` on the low `n` qubits, `b`
/// on the next `n` and the carry-out on the top qubit.
pub fn adder_permutation(cfg: AdderConfig, windowed: bool) -> Result<Permutation> {
    let n = cfg.n;
    if 2 * n + 1 > 24 {
        return Err(Error::SizeLimit(format!(
            "adder permutation limited to n <= 11 (got {n})"
        )));
    }
    let mask = (1u64 << n) - 1;
    Permutation::from_fn(1 << (2 * n + 1), |idx| {
        let x = idx as u64;
        let (a, b, t) = (x & mask, (x >> n) & mask, x >> (2 * n));
        let s = if windowed {
            windowed_add(a, b, n, cfg.k)
        } else {
            exact_add(a, b, n).0
        };
        (a | ((s & mask) << n) | ((t ^ (s >> n)) << (2 * n))) as usize
    })
}

/// Number of pairs `(a, b)` on which the windowed sum differs from the exact one.
pub fn count_mismatches(cfg: AdderConfig) -> u64 {
    let n = cfg.n;
    let mut bad = 0u64;
    for a in 0..1u64 << n {
        for b in 0..1u64 << n {
            if windowed_add(a, b, n, cfg.k) != exact_add(a, b, n).0 {
                bad += 1;
            }
        }
    }
    bad
}

/// Average Frobenius error of the windowed adder permutation, `2·Pr[mismatch]`.
/// Exhaustive for `2n ≤ 24`, otherwise estimated from `2^20` seeded samples.
pub fn adder_avg_error(cfg: AdderConfig) -> f64 {
    if 2 * cfg.n <= 24 {
        2.0 * count_mismatches(cfg) as f64 / (1u64 << (2 * cfg.n)) as f64
    } else {
        adder_avg_error_sampled(cfg, 1 << 20, 0)
    }
}

pub fn adder_avg_error_sampled(cfg: AdderConfig, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.n;
    let bad = (0..samples)
        .filter(|_| {
            let a = rng.random_range(0..1u64 << n);
            let b = rng.random_range(0..1u64 << n);
            windowed_add(a, b, n, cfg.k) != exact_add(a, b, n).0
        })
        .count();
    2.0 * bad as f64 / samples as f64
}

/// Union bound `2(n−k)·2^{−(k+1)}` on [`adder_avg_error`].
pub fn adder_error_bound(cfg: AdderConfig) -> f64 {
    2.0 * (cfg.n - cfg.k) as f64 * 0.5f64.powi(cfg.k as i32 + 1)
}
