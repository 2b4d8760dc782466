//! Period finding with simulated modular multipliers.
//!
//! The counting register only ever acts as a control, so its basis values are
//! handled classically: the work-register state for counting value `x` is
//! `M_{t−1}^{x_{t−1}} ⋯ M_0^{x_0}|r⟩` with `M_j` the multiplier by
//! `g^{2^j} mod N`. States are filled in along a binary tree,
//! `ψ(x + 2^j) = M_j ψ(x)` for `x < 2^j`, and the joint state is then
//! transformed by an exact inverse QFT on the counting register.

use num_complex::Complex64 as Complex;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

use super::modmul::{bits_for, modmul_circuit, variant_builder, ModularMultiplier};
use crate::errmetrics::column_error;
use crate::qftlib::{exact_qft, reverse_bits, QftVariant};
use crate::statevec::Statevector;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FactoringConfig {
    pub modulus: u64,
    pub base: u64,
    /// Counting qubits.
    pub t: usize,
    /// QFT family inside the multipliers.
    #[serde(serialize_with = "ser_variant")]
    pub variant: QftVariant,
    /// Initial work value `r` (the register starts in `|r mod N⟩`).
    pub r_rand: Option<u64>,
}

fn ser_variant<S: serde::Serializer>(v: &QftVariant, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl FactoringConfig {
    /// Defaults to `t = 2⌈log2 N⌉`, exact multipliers and `r = 1`.
    pub fn new(modulus: u64, base: u64) -> Result<Self> {
        let cfg = Self {
            modulus,
            base,
            t: 2 * bits_for(modulus.saturating_sub(1)),
            variant: QftVariant::Exact,
            r_rand: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.t = t;
        self
    }

    pub fn with_variant(mut self, variant: QftVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_r(mut self, r: Option<u64>) -> Self {
        self.r_rand = r;
        self
    }

    pub fn n_bits(&self) -> usize {
        bits_for(self.modulus)
    }

    pub fn work_width(&self) -> usize {
        2 * self.n_bits() + 2
    }

    pub fn validate(&self) -> Result<()> {
        let (n, g) = (self.modulus, self.base);
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "modulus {n} must be odd and >= 3"
            )));
        }
        if g <= 1 || g >= n {
            return Err(Error::InvalidParameter(format!(
                "base {g} must satisfy 1 < g < N"
            )));
        }
        if g.gcd(&n) != 1 {
            return Err(Error::NotCoprime { a: g, modulus: n });
        }
        if let Some(r) = self.r_rand {
            if r % n == 0 || r.gcd(&n) != 1 {
                return Err(Error::NotCoprime { a: r, modulus: n });
            }
        }
        if self.t == 0 || self.t + self.work_width() > 20 {
            return Err(Error::SizeLimit(format!(
                "{} counting + {} work qubits exceeds the 20-qubit budget",
                self.t,
                self.work_width()
            )));
        }
        Ok(())
    }

    fn start(&self) -> u64 {
        self.r_rand.unwrap_or(1) % self.modulus
    }
}

pub fn pow_mod(base: u64, exp: u64, modulus: u64) -> u64 {
    let mut acc = 1u128;
    let mut b = base as u128 % modulus as u128;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % modulus as u128;
        }
        b = b * b % modulus as u128;
        e >>= 1;
    }
    acc as u64
}

/// Multiplicative order of `g` modulo `N` (`gcd(g, N) = 1`).
pub fn multiplicative_order(g: u64, modulus: u64) -> u64 {
    let mut x = g % modulus;
    let mut r = 1;
    while x != 1 {
        x = (x as u128 * g as u128 % modulus as u128) as u64;
        r += 1;
    }
    r
}

/// Denominators of the continued-fraction convergents of `k / 2^t` that do
/// not exceed `max_den`.
pub fn convergent_denominators(k: u64, t: usize, max_den: u64) -> Vec<u64> {
    let (mut num, mut den) = (k as u128, 1u128 << t);
    let (mut h_prev, mut h) = (0u128, 1u128);
    let mut out = Vec::new();
    // convergent denominators: q_{-1} = 0, q_0 = 1, q_i = a_i q_{i−1} + q_{i−2}
    let a0 = num / den;
    num -= a0 * den;
    out.push(1);
    while num != 0 {
        let (n2, d2) = (den, num);
        let a = n2 / d2;
        num = n2 - a * d2;
        den = d2;
        let next = a * h + h_prev;
        if next > max_den as u128 {
            break;
        }
        h_prev = h;
        h = next;
        out.push(h as u64);
    }
    out
}

/// Factor recovered from outcome `k`, if any. Candidate periods are the
/// convergent denominators `d ≤ N` and `2d`; a candidate `r` is used when
/// `g^r ≡ 1`, `r` is even and `g^{r/2} ≢ −1 (mod N)`.
pub fn factor_from_outcome(k: u64, t: usize, g: u64, modulus: u64) -> Option<u64> {
    for d in convergent_denominators(k, t, modulus) {
        for r in [d, 2 * d] {
            if r % 2 != 0 || pow_mod(g, r, modulus) != 1 {
                continue;
            }
            let h = pow_mod(g, r / 2, modulus);
            if h == modulus - 1 {
                continue;
            }
            for f in [(h + modulus - 1).gcd(&modulus), (h + 1).gcd(&modulus)] {
                if f > 1 && f < modulus {
                    return Some(f);
                }
            }
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct FactoringResult {
    pub config: FactoringConfig,
    /// Probability of each counting outcome `k`.
    pub distribution: Vec<f64>,
    /// Whether outcome `k` yields a nontrivial factor.
    pub success: Vec<bool>,
    pub p_success: f64,
    /// Trials drawn from `distribution`, with the number that succeeded.
    pub trials: usize,
    pub trial_successes: usize,
}

impl FactoringResult {
    /// CSV with columns `k,probability,success`.
    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("k,probability,success\n");
        for (k, (p, ok)) in self.distribution.iter().zip(&self.success).enumerate() {
            s.push_str(&format!("{k},{p:.17e},{}\n", u8::from(*ok)));
        }
        s
    }
}

/// Multipliers `M_j` by `g^{2^j} mod N` for `j < t`.
pub fn stage_multipliers(cfg: &FactoringConfig) -> Result<Vec<ModularMultiplier>> {
    cfg.validate()?;
    let builder = variant_builder(cfg.variant);
    let mut c = cfg.base % cfg.modulus;
    let mut out = Vec::with_capacity(cfg.t);
    for _ in 0..cfg.t {
        out.push(modmul_circuit(c, cfg.modulus, cfg.n_bits(), &builder)?);
        c = (c as u128 * c as u128 % cfg.modulus as u128) as u64;
    }
    Ok(out)
}

/// Work-register states `ψ(x)` for every counting value `x < 2^t`.
pub fn controlled_states(
    cfg: &FactoringConfig,
    mults: &[ModularMultiplier],
) -> Result<Vec<Statevector>> {
    let w = cfg.work_width();
    let mut states = Vec::with_capacity(1 << cfg.t);
    states.push(Statevector::basis_state(w, cfg.start() as usize)?);
    for mult in mults.iter().take(cfg.t) {
        let next = states
            .par_iter()
            .map(|s| s.apply_circuit(&mult.circuit))
            .collect::<Result<Vec<_>>>()?;
        states.extend(next);
    }
    Ok(states)
}

/// Exact outcome distribution of the counting register.
pub fn outcome_distribution(cfg: &FactoringConfig) -> Result<Vec<f64>> {
    let mults = stage_multipliers(cfg)?;
    let states = controlled_states(cfg, &mults)?;
    let (t, w) = (cfg.t, cfg.work_width());
    let norm = ((1usize << t) as f64).sqrt().recip();
    let mut amps = Vec::with_capacity(1 << (t + w));
    for s in &states {
        amps.extend(s.amplitudes().iter().map(|a| a * norm));
    }
    let joint = Statevector::from_amplitudes(amps)?;
    let joint = joint.apply_circuit(&exact_qft(t)?.inverse().embed(t + w, w)?)?;
    let mut dist = vec![0.0; 1 << t];
    for (idx, p) in joint.probabilities().into_iter().enumerate() {
        dist[reverse_bits(idx >> w, t)] += p;
    }
    Ok(dist)
}

/// Outcome distribution of ideal period finding, computed from the orbit of
/// `r·g^x mod N` without any circuit.
pub fn classical_outcome_distribution(cfg: &FactoringConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let dim = 1usize << cfg.t;
    let mut orbit = vec![Vec::new(); cfg.modulus as usize];
    let mut v = cfg.start();
    for x in 0..dim {
        orbit[v as usize].push(x);
        v = v * cfg.base % cfg.modulus;
    }
    Ok((0..dim)
        .map(|k| {
            orbit
                .iter()
                .map(|xs| {
                    let s: Complex = xs
                        .iter()
                        .map(|&x| {
                            Complex::from_polar(1.0, -TAU * ((x * k) % dim) as f64 / dim as f64)
                        })
                        .sum();
                    s.norm_sqr()
                })
                .sum::<f64>()
                / (dim * dim) as f64
        })
        .collect())
}

/// Exact success probability of one run, plus `trials` sampled outcomes.
pub fn period_finding_experiment(
    cfg: &FactoringConfig,
    trials: usize,
    seed: u64,
) -> Result<FactoringResult> {
    let distribution = outcome_distribution(cfg)?;
    let success: Vec<bool> = (0..distribution.len() as u64)
        .map(|k| factor_from_outcome(k, cfg.t, cfg.base, cfg.modulus).is_some())
        .collect();
    let p_success = distribution
        .iter()
        .zip(&success)
        .filter(|(_, ok)| **ok)
        .map(|(p, _)| p)
        .sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: f64 = distribution.iter().sum();
    let mut trial_successes = 0;
    for _ in 0..trials {
        let mut u = rng.random::<f64>() * total;
        let mut k = distribution.len() - 1;
        for (i, p) in distribution.iter().enumerate() {
            if u < *p {
                k = i;
                break;
            }
            u -= p;
        }
        trial_successes += usize::from(success[k]);
    }
    Ok(FactoringResult {
        config: *cfg,
        distribution,
        success,
        p_success,
        trials,
        trial_successes,
    })
}

/// Composed error of one counting value against its stagewise bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StageCheck {
    pub x: usize,
    /// `|ψ̃(x) − ψ(x)|²`.
    pub composed: f64,
    /// `(Σ_j √ε_j)²` over the stages applied, with `ε_j` the error of stage
    /// `j` on the exact intermediate input.
    pub bound: f64,
}

/// Compares approximate and exact work states for every counting value.
pub fn stagewise_errors(cfg: &FactoringConfig) -> Result<Vec<StageCheck>> {
    let exact_cfg = cfg.with_variant(QftVariant::Exact);
    let approx = stage_multipliers(cfg)?;
    let exact = stage_multipliers(&exact_cfg)?;
    let approx_states = controlled_states(cfg, &approx)?;
    let (n, g, t) = (cfg.modulus, cfg.base, cfg.t);
    (0..1usize << t)
        .into_par_iter()
        .map(|x| {
            let ideal = exact_ideal_state(cfg, x)?;
            let composed = approx_states[x].error_norm_sq(&ideal)?;
            let mut y = cfg.start();
            let mut root_sum = 0.0;
            for j in 0..t {
                if (x >> j) & 1 == 1 {
                    root_sum += column_error(&approx[j], &exact[j], y as usize)?.sqrt();
                    y = y * pow_mod(g, 1 << j, n) % n;
                }
            }
            Ok(StageCheck {
                x,
                composed,
                bound: root_sum * root_sum,
            })
        })
        .collect()
}

fn exact_ideal_state(cfg: &FactoringConfig, x: usize) -> Result<Statevector> {
    let y = cfg.start() * pow_mod(cfg.base, x as u64, cfg.modulus) % cfg.modulus;
    Statevector::basis_state(cfg.work_width(), y as usize)
}

/// Uniformly random unit modulo `N`.
pub fn random_unit(modulus: u64, rng: &mut impl Rng) -> u64 {
    loop {
        let r = rng.random_range(1..modulus);
        if r.gcd(&modulus) == 1 {
            return r;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modular_powers() {
        assert_eq!(pow_mod(7, 4, 15), 1);
        assert_eq!(pow_mod(7, 2, 15), 4);
        assert_eq!(multiplicative_order(7, 15), 4);
        assert_eq!(multiplicative_order(2, 21), 6);
    }

    #[test]
    fn convergents() {
        // 64/256 = 1/4
        assert_eq!(convergent_denominators(64, 8, 15), vec![1, 4]);
        assert_eq!(convergent_denominators(0, 8, 15), vec![1]);
        // 85/256 ≈ 1/3
        assert!(convergent_denominators(85, 8, 15).contains(&3));
    }

    #[test]
    fn outcomes_for_fifteen() {
        assert_eq!(factor_from_outcome(64, 8, 7, 15), Some(3));
        assert_eq!(factor_from_outcome(128, 8, 7, 15), Some(3));
        assert_eq!(factor_from_outcome(192, 8, 7, 15), Some(3));
        assert_eq!(factor_from_outcome(0, 8, 7, 15), None);
    }

    #[test]
    fn config_checks() {
        assert!(FactoringConfig::new(15, 7).is_ok());
        assert_eq!(FactoringConfig::new(15, 7).unwrap().t, 8);
        assert!(FactoringConfig::new(15, 5).is_err());
        assert!(FactoringConfig::new(16, 7).is_err());
        assert!(FactoringConfig::new(15, 7)
            .unwrap()
            .with_t(11)
            .validate()
            .is_err());
    }

    #[test]
    fn classical_distribution_is_normalized() {
        let d = classical_outcome_distribution(&FactoringConfig::new(15, 7).unwrap()).unwrap();
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for k in [0, 64, 128, 192] {
            assert!((d[k] - 0.25).abs() < 1e-12);
        }
    }
}
