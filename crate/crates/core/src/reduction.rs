//! Worst-case to average-case reductions for the QFT.
//!
//! A random Weyl–Heisenberg operator `V(r1, r2)` is applied before the
//! approximate QFT and its Fourier conjugate `V(r2, −r1)` after it. For the
//! exact QFT the two cancel; for an approximate one every input then sees the
//! average error. The purified form replaces the random draw by a uniform
//! superposition on a control register.
//!
//! The QFT circuits here have no terminal swap layer, so the input register
//! is read with qubit 0 as its most significant bit. The input-side operator
//! is therefore `R·V·R` with `R` the bit reversal; the output side uses
//! `V(r2, −r1)` on the ordinary (least-significant-first) index.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::circuit::{Circuit, DyadicAngle, Gate};
use crate::errmetrics::mean_and_stderr;
use crate::qftlib::{exact_qft, optimistic_qft, reverse_bits};
use crate::statevec::Statevector;
use crate::{Error, Result};

/// `V(r1, r2)|x⟩ = e^{2πi·r2·x/2^n}|x + r1 mod 2^n⟩` (phase first, then shift).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WeylOp {
    pub n: usize,
    pub r1: u64,
    pub r2: u64,
}

impl WeylOp {
    /// Reduces both parameters modulo `2^n`.
    pub fn new(n: usize, r1: i64, r2: i64) -> Self {
        let modulus = 1i64 << n;
        Self {
            n,
            r1: r1.rem_euclid(modulus) as u64,
            r2: r2.rem_euclid(modulus) as u64,
        }
    }

    /// Output-side partner `V(r2, −r1)`.
    pub fn conjugate(&self) -> WeylOp {
        WeylOp::new(self.n, self.r2 as i64, -(self.r1 as i64))
    }

    fn check(&self, state: &Statevector) -> Result<()> {
        if state.num_qubits() != self.n {
            return Err(Error::QubitCountMismatch {
                expected: self.n,
                got: state.num_qubits(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, state: &Statevector) -> Result<Statevector> {
        self.check(state)?;
        Ok(self.apply_with(state, |x| x))
    }

    /// `V†`.
    pub fn apply_adjoint(&self, state: &Statevector) -> Result<Statevector> {
        self.check(state)?;
        let dim = state.dim();
        let mask = dim - 1;
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (y, a) in state.amplitudes().iter().enumerate() {
            let x = y.wrapping_sub(self.r1 as usize) & mask;
            out[x] = a * self.phase(x).conj();
        }
        Statevector::from_amplitudes(out)
    }

    /// `R·V·R`: the same operator with qubit 0 read as the most significant bit.
    pub fn apply_reversed(&self, state: &Statevector) -> Result<Statevector> {
        self.check(state)?;
        let n = self.n;
        Ok(self.apply_with(state, |x| reverse_bits(x, n)))
    }

    fn phase(&self, x: usize) -> Complex64 {
        let dim = 1u64 << self.n;
        let k = (self.r2 as u128 * x as u128 % dim as u128) as f64;
        Complex64::from_polar(1.0, TAU * k / dim as f64)
    }

    /// Applies `V` with basis relabelling `frame` (an involution).
    fn apply_with(&self, state: &Statevector, frame: impl Fn(usize) -> usize) -> Statevector {
        let dim = state.dim();
        let mask = dim - 1;
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (idx, a) in state.amplitudes().iter().enumerate() {
            let x = frame(idx);
            let y = (x + self.r1 as usize) & mask;
            out[frame(y)] = a * self.phase(x);
        }
        Statevector::from_amplitudes(out).expect("same length as input")
    }
}

/// Largest entrywise deviation between `U·V_in†·U†` and `V(r2, −r1)`, with
/// `U` the exact QFT circuit and `V_in = R·V(r1, r2)·R`.
pub fn weyl_conjugation_check(n: usize, r1: i64, r2: i64) -> Result<f64> {
    if n > 10 {
        return Err(Error::SizeLimit(format!(
            "conjugation check limited to n <= 10 (got {n})"
        )));
    }
    let v = WeylOp::new(n, r1, r2);
    let u = exact_qft(n)?;
    let u_dag = u.inverse();
    let target = v.conjugate();
    let devs = (0..1usize << n)
        .into_par_iter()
        .map(|y| {
            let e = Statevector::basis_state(n, y)?;
            let s = e.apply_circuit(&u_dag)?;
            // V_in† = R·V†·R
            let s = reverse_frame(&v.apply_adjoint(&reverse_frame(&s))?);
            let s = s.apply_circuit(&u)?;
            s.max_abs_diff(&target.apply(&e)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

fn reverse_frame(state: &Statevector) -> Statevector {
    let n = state.num_qubits();
    let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
    for (x, a) in state.amplitudes().iter().enumerate() {
        out[reverse_bits(x, n)] = *a;
    }
    Statevector::from_amplitudes(out).expect("same length as input")
}

/// `(1/4^n)·Σ_{r1,r2} V|ψ⟩⟨ψ|V†` as a row-major `2^n × 2^n` matrix.
pub fn weyl_twirl(state: &Statevector) -> Result<Vec<Complex64>> {
    let n = state.num_qubits();
    if n > 6 {
        return Err(Error::SizeLimit(format!(
            "twirl limited to n <= 6 (got {n})"
        )));
    }
    let dim = state.dim();
    let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
    let weight = 1.0 / (dim * dim) as f64;
    for r1 in 0..dim {
        for r2 in 0..dim {
            let v = WeylOp::new(n, r1 as i64, r2 as i64).apply(state)?;
            let a = v.amplitudes();
            for i in 0..dim {
                for j in 0..dim {
                    rho[i * dim + j] += a[i] * a[j].conj() * weight;
                }
            }
        }
    }
    Ok(rho)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionConfig {
    pub n: usize,
    /// Block size of the optimistic QFT being wrapped.
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
}

impl ReductionConfig {
    pub fn new(n: usize, m: usize, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidParameter("sample count must be >= 1".into()));
        }
        if m == 0 || m > n {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= m <= n (got n={n}, m={m})"
            )));
        }
        Ok(Self {
            n,
            m,
            samples,
            seed,
        })
    }

    pub fn circuit(&self) -> Result<Circuit> {
        optimistic_qft(self.n, self.m)
    }
}

/// `V(r2, −r1)·Ũ·V_in(r1, r2)` applied to `input`.
pub fn reduced_apply_with(input: &Statevector, approx: &Circuit, v: WeylOp) -> Result<Statevector> {
    let s = v.apply_reversed(input)?;
    let s = s.apply_circuit(approx)?;
    v.conjugate().apply(&s)
}

/// Draws `(r1, r2)` uniformly and applies the wrapped circuit.
pub fn randomized_reduced_apply(
    input: &Statevector,
    cfg: &ReductionConfig,
    rng: &mut impl Rng,
) -> Result<(Statevector, WeylOp)> {
    let dim = 1u64 << cfg.n;
    let v = WeylOp {
        n: cfg.n,
        r1: rng.random_range(0..dim),
        r2: rng.random_range(0..dim),
    };
    Ok((reduced_apply_with(input, &cfg.circuit()?, v)?, v))
}

/// Average over the whole Weyl group of `|V̂†ŨV|ψ⟩ − U|ψ⟩|²`.
pub fn expected_error_exact(input: &Statevector, cfg: &ReductionConfig) -> Result<f64> {
    let n = cfg.n;
    if n > 8 {
        return Err(Error::SizeLimit(format!(
            "exact expectation limited to n <= 8 (got {n})"
        )));
    }
    let approx = cfg.circuit()?;
    let ideal = input.apply_circuit(&exact_qft(n)?)?;
    let dim = 1i64 << n;
    let errs = (0..dim * dim)
        .into_par_iter()
        .map(|i| {
            let v = WeylOp::new(n, i / dim, i % dim);
            reduced_apply_with(input, &approx, v)?.error_norm_sq(&ideal)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errs.iter().sum::<f64>() / errs.len() as f64)
}

/// Per-draw errors of `cfg.samples` seeded draws.
pub fn sampled_errors(input: &Statevector, cfg: &ReductionConfig) -> Result<Vec<(WeylOp, f64)>> {
    let approx = cfg.circuit()?;
    let ideal = input.apply_circuit(&exact_qft(cfg.n)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dim = 1u64 << cfg.n;
    let draws: Vec<WeylOp> = (0..cfg.samples)
        .map(|_| WeylOp {
            n: cfg.n,
            r1: rng.random_range(0..dim),
            r2: rng.random_range(0..dim),
        })
        .collect();
    draws
        .par_iter()
        .map(|&v| {
            Ok((
                v,
                reduced_apply_with(input, &approx, v)?.error_norm_sq(&ideal)?,
            ))
        })
        .collect()
}

/// Monte-Carlo estimate `(mean, stderr)` of [`expected_error_exact`].
pub fn expected_error_sampled(input: &Statevector, cfg: &ReductionConfig) -> Result<(f64, f64)> {
    if cfg.samples < 2 {
        return Err(Error::InvalidParameter(
            "sampled estimate needs >= 2 samples".into(),
        ));
    }
    let errs: Vec<f64> = sampled_errors(input, cfg)?
        .into_iter()
        .map(|(_, e)| e)
        .collect();
    Ok(mean_and_stderr(&errs))
}

fn check_purified(n: usize) -> Result<()> {
    if n == 0 || 3 * n > 15 {
        return Err(Error::SizeLimit(format!(
            "purified simulation needs 3n <= 15 qubits (got n={n})"
        )));
    }
    Ok(())
}

/// `(1/2^n)·Σ_i |i⟩ ⊗ |ψ⟩` with the control index `i = r1·2^n + r2` on the
/// high `2n` qubits.
pub fn purified_input(input: &Statevector) -> Result<Statevector> {
    let n = input.num_qubits();
    check_purified(n)?;
    let k = 1usize << (2 * n);
    let norm = (k as f64).sqrt().recip();
    let control = Statevector::from_amplitudes(vec![Complex64::new(norm, 0.0); k])?;
    control.tensor(input)
}

/// Applies `f(r1, r2, slice)` to every control block of a joint state.
fn controlled(
    joint: &Statevector,
    n: usize,
    f: impl Fn(WeylOp, &Statevector) -> Result<Statevector> + Sync,
) -> Result<Statevector> {
    let dim = 1usize << n;
    let blocks = joint
        .amplitudes()
        .par_chunks(dim)
        .enumerate()
        .map(|(i, chunk)| {
            let v = WeylOp::new(n, (i / dim) as i64, (i % dim) as i64);
            let s = Statevector::from_amplitudes(chunk.to_vec())?;
            Ok(f(v, &s)?.into_amplitudes())
        })
        .collect::<Result<Vec<Vec<Complex64>>>>()?;
    Statevector::from_amplitudes(blocks.concat())
}

/// Control-register version of the reduction: controlled `V_in`, then
/// `I ⊗ Ũ`, then controlled `V(r2, −r1)`, on `3n` qubits.
pub fn purified_apply(input: &Statevector, cfg: &ReductionConfig) -> Result<Statevector> {
    let n = cfg.n;
    check_purified(n)?;
    let joint = purified_input(input)?;
    let joint = controlled(&joint, n, |v, s| v.apply_reversed(s))?;
    let joint = joint.apply_circuit(&cfg.circuit()?.embed(3 * n, 0)?)?;
    controlled(&joint, n, |v, s| v.conjugate().apply(s))
}

/// `|U′(u ⊗ ψ) − (I ⊗ U)(u ⊗ ψ)|²` with `u` the uniform control state.
pub fn purified_error(input: &Statevector, cfg: &ReductionConfig) -> Result<f64> {
    let out = purified_apply(input, cfg)?;
    let ideal = purified_input(input)?.apply_circuit(&exact_qft(cfg.n)?.embed(3 * cfg.n, 0)?)?;
    out.error_norm_sq(&ideal)
}

/// Purified reduction with both controlled phase gradients replaced by
/// [`controlled_phase_gradient`] circuits truncated at `m_grad`. The shifts
/// stay exact permutations.
pub fn purified_apply_approx_gradient(
    input: &Statevector,
    cfg: &ReductionConfig,
    m_grad: usize,
) -> Result<Statevector> {
    let n = cfg.n;
    check_purified(n)?;
    let w = 3 * n;
    let cpg = controlled_phase_gradient(n, m_grad)?;
    // input side: phase e^{2πi·r2·rev(x)/2^n}, x read with qubit 0 as MSB
    let map_in: Vec<usize> = (0..2 * n)
        .map(|j| if j < n { n - 1 - j } else { j })
        .collect();
    // output side: phase e^{−2πi·r1·y/2^n}, r1 on the top register
    let map_out: Vec<usize> = (0..2 * n).map(|j| if j < n { j } else { j + n }).collect();
    let phase_in = cpg.remap(w, &map_in)?;
    let phase_out = cpg.inverse().remap(w, &map_out)?;

    let shift_in = |v: WeylOp, s: &Statevector| WeylOp { r2: 0, ..v }.apply_reversed(s);
    let shift_out = |v: WeylOp, s: &Statevector| {
        WeylOp {
            r2: 0,
            ..v.conjugate()
        }
        .apply(s)
    };

    let joint = purified_input(input)?.apply_circuit(&phase_in)?;
    let joint = controlled(&joint, n, shift_in)?;
    let joint = joint.apply_circuit(&cfg.circuit()?.embed(w, 0)?)?;
    let joint = joint.apply_circuit(&phase_out)?;
    controlled(&joint, n, shift_out)
}

/// Diagonal `|x⟩|z⟩ ↦ e^{2πi·x·z/2^n}` on `2n` qubits (`x` on qubits
/// `0..n`, `z` on `n..2n`), keeping only the phases of exponent at most `m`.
///
/// Each `z` bit receives the first `m` bits of its binary fraction of `x`.
/// Gates with equal exponent touch disjoint qubits and are emitted together,
/// giving greedy depth at most `m`.
pub fn controlled_phase_gradient(n: usize, m: usize) -> Result<Circuit> {
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= m <= n (got n={n}, m={m})"
        )));
    }
    let mut c = Circuit::new(2 * n);
    for e in 1..=m {
        for a in 0..=n - e {
            let b = n - e - a;
            c.push(Gate::CPhase(a, n + b, DyadicAngle::new(1, e as u32)))?;
        }
    }
    Ok(c)
}

/// Truncation length guaranteeing operator-norm error at most `δ`:
/// `⌈log2(2πn/δ)⌉`, clamped to `[1, n]`.
pub fn gradient_block_size(n: usize, delta: f64) -> Result<usize> {
    if delta.is_nan() || delta <= 0.0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "need n >= 1 and δ > 0 (got {n}, {delta})"
        )));
    }
    let m = (TAU * n as f64 / delta).log2().ceil().max(1.0) as usize;
    Ok(m.min(n))
}

/// `2πn·2^{−m}`.
pub fn phase_gradient_bound(n: usize, m: usize) -> f64 {
    TAU * n as f64 * 0.5f64.powi(m as i32)
}

/// Operator-norm distance between a diagonal circuit on `2n` qubits and the
/// ideal gradient `e^{2πi·x·z/2^n}`, i.e. `max_{x,z} |e^{iφ̃} − e^{iφ}|`.
///
/// The circuit may contain only `CPhase` gates between the `x` and `z`
/// registers; its phase is read off gate by gate.
pub fn phase_gradient_error(circuit: &Circuit, n: usize) -> Result<f64> {
    if circuit.num_qubits() != 2 * n {
        return Err(Error::QubitCountMismatch {
            expected: 2 * n,
            got: circuit.num_qubits(),
        });
    }
    if n > 12 {
        return Err(Error::SizeLimit(format!(
            "gradient error limited to n <= 12 (got {n})"
        )));
    }
    let dim = 1usize << n;
    // theta[b][x]: turns contributed when z bit b is set
    let mut theta = vec![vec![0.0f64; dim]; n];
    for g in circuit.gates() {
        let (a, b, ang) = match *g {
            Gate::CPhase(p, q, ang) if p < n && q >= n => (p, q - n, ang),
            Gate::CPhase(p, q, ang) if q < n && p >= n => (q, p - n, ang),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "gate `{g}` is not a controlled phase between the two registers"
                )))
            }
        };
        let turns = ang.numerator() as f64 / 2f64.powi(ang.exponent() as i32);
        for (x, t) in theta[b].iter_mut().enumerate() {
            if (x >> a) & 1 == 1 {
                *t += turns;
            }
        }
    }
    let worst = (0..dim)
        .into_par_iter()
        .map(|x| {
            let mut acc = vec![0.0f64; dim];
            let mut worst = 0.0f64;
            for z in 1..dim {
                let low = z.trailing_zeros() as usize;
                acc[z] = acc[z & (z - 1)] + theta[low][x];
                let ideal = ((x * z) & (dim - 1)) as f64 / dim as f64;
                let d = acc[z] - ideal;
                worst = worst.max(2.0 * (std::f64::consts::PI * d).sin().abs());
            }
            worst
        })
        .collect::<Vec<f64>>();
    Ok(worst.into_iter().fold(0.0, f64::max))
}
