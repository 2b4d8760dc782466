//! Error functionals for approximate unitaries.
//!
//! The central quantity is the average Frobenius error
//! `ε = ‖Ũ − U‖²_F / 2^n = 2^{−n} Σ_x |Ũ|x⟩ − U|x⟩|²`, computed either
//! exhaustively over the computational basis or by sampling basis states.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use crate::circuit::{block_phase_rotation, Circuit, DyadicAngle, Gate};
use crate::qftlib::{exact_qft, reference_qft_state, reverse_bits, BlockLayout};
use crate::statevec::{Permutation, Statevector};
use crate::{Error, Result};

/// Largest register for which exhaustive column sums are attempted.
pub const MAX_EXHAUSTIVE_QUBITS: usize = 14;

/// A linear map on `n` qubits that can be applied to statevectors.
pub trait Operator: Sync {
    fn num_qubits(&self) -> usize;

    fn apply(&self, state: &Statevector) -> Result<Statevector>;

    /// Image of the basis state `|x⟩`.
    fn column(&self, x: usize) -> Result<Statevector> {
        self.apply(&Statevector::basis_state(self.num_qubits(), x)?)
    }
}

impl Operator for Circuit {
    fn num_qubits(&self) -> usize {
        Circuit::num_qubits(self)
    }

    fn apply(&self, state: &Statevector) -> Result<Statevector> {
        state.apply_circuit(self)
    }
}

impl Operator for Permutation {
    fn num_qubits(&self) -> usize {
        self.len().trailing_zeros() as usize
    }

    fn apply(&self, state: &Statevector) -> Result<Statevector> {
        state.apply_permutation(self)
    }
}

impl<T: Operator + ?Sized> Operator for &T {
    fn num_qubits(&self) -> usize {
        (**self).num_qubits()
    }

    fn apply(&self, state: &Statevector) -> Result<Statevector> {
        (**self).apply(state)
    }

    fn column(&self, x: usize) -> Result<Statevector> {
        (**self).column(x)
    }
}

/// Operator given by its columns. `apply` expands the input in the
/// computational basis, so it costs `2^n` column evaluations.
pub struct ColumnFn<F> {
    n: usize,
    f: F,
}

impl<F> ColumnFn<F>
where
    F: Fn(usize) -> Result<Statevector> + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> Operator for ColumnFn<F>
where
    F: Fn(usize) -> Result<Statevector> + Sync,
{
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn column(&self, x: usize) -> Result<Statevector> {
        let col = (self.f)(x)?;
        if col.num_qubits() != self.n {
            return Err(Error::QubitCountMismatch {
                expected: self.n,
                got: col.num_qubits(),
            });
        }
        Ok(col)
    }

    fn apply(&self, state: &Statevector) -> Result<Statevector> {
        check_n(self.n, state.num_qubits())?;
        let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
        for (x, a) in state.amplitudes().iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let col = self.column(x)?;
            for (o, c) in out.iter_mut().zip(col.amplitudes()) {
                *o += a * c;
            }
        }
        Statevector::from_amplitudes(out)
    }
}

/// The ideal QFT, evaluated from the product formula rather than from gates.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceQft {
    n: usize,
}

impl ReferenceQft {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Operator for ReferenceQft {
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn column(&self, x: usize) -> Result<Statevector> {
        reference_qft_state(self.n, x)
    }

    fn apply(&self, state: &Statevector) -> Result<Statevector> {
        check_n(self.n, state.num_qubits())?;
        let dim = state.dim();
        let norm = (dim as f64).sqrt().recip();
        let roots: Vec<Complex64> = (0..dim)
            .map(|k| Complex64::from_polar(norm, TAU * k as f64 / dim as f64))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (x, a) in state.amplitudes().iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let rx = reverse_bits(x, self.n);
            for (y, o) in out.iter_mut().enumerate() {
                *o += a * roots[(rx * y) % dim];
            }
        }
        Statevector::from_amplitudes(out)
    }
}

fn check_n(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::QubitCountMismatch { expected, got });
    }
    Ok(())
}

fn check_exhaustive(n: usize) -> Result<()> {
    if n > MAX_EXHAUSTIVE_QUBITS {
        return Err(Error::SizeLimit(format!(
            "exhaustive error sums are limited to {MAX_EXHAUSTIVE_QUBITS} qubits (got {n})"
        )));
    }
    Ok(())
}

/// Squared error of a single basis column.
pub fn column_error(test: &dyn Operator, reference: &dyn Operator, x: usize) -> Result<f64> {
    test.column(x)?.error_norm_sq(&reference.column(x)?)
}

/// Exhaustive error summary over all computational basis states.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub n: usize,
    pub m: Option<usize>,
    pub avg_frobenius: f64,
    /// Squared error of every basis column, indexed by `x`.
    pub per_state: Vec<f64>,
    pub bound: Option<f64>,
    pub label: String,
}

impl ErrorReport {
    pub fn with_m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn per_state_max(&self) -> f64 {
        self.per_state.iter().copied().fold(0.0, f64::max)
    }

    pub fn median(&self) -> f64 {
        median(&self.per_state)
    }

    /// Header line `n=.. m=.. avg=.. bound=..` followed by one `x error` line
    /// per basis state.
    pub fn to_records(&self) -> String {
        let mut s = String::new();
        let fmt_opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "label={} n={} m={} avg={:.17e} bound={} max={:.17e}",
            if self.label.is_empty() {
                "-"
            } else {
                &self.label
            },
            self.n,
            fmt_opt(self.m.map(|m| m.to_string())),
            self.avg_frobenius,
            fmt_opt(self.bound.map(|b| format!("{b:.17e}"))),
            self.per_state_max(),
        );
        for (x, e) in self.per_state.iter().enumerate() {
            let _ = writeln!(s, "{x} {e:.17e}");
        }
        s
    }

    /// CSV with columns `x,error`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,error\n");
        for (x, e) in self.per_state.iter().enumerate() {
            let _ = writeln!(s, "{x},{e:.17e}");
        }
        s
    }

    /// CSV with columns `x,error,bad`, flagging [`is_bad_state`] inputs.
    pub fn to_csv_with_flags(&self, layout: &BlockLayout) -> String {
        let mut s = String::from("x,error,bad\n");
        for (x, e) in self.per_state.iter().enumerate() {
            let _ = writeln!(s, "{x},{e:.17e},{}", u8::from(is_bad_state(x, layout)));
        }
        s
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Exhaustive average Frobenius error of `test` against `reference`.
pub fn frobenius_error_avg(test: &dyn Operator, reference: &dyn Operator) -> Result<ErrorReport> {
    let n = test.num_qubits();
    check_n(n, reference.num_qubits())?;
    check_exhaustive(n)?;
    let per_state = (0..1usize << n)
        .into_par_iter()
        .map(|x| column_error(test, reference, x))
        .collect::<Result<Vec<f64>>>()?;
    let avg = per_state.iter().sum::<f64>() / per_state.len() as f64;
    Ok(ErrorReport {
        n,
        m: None,
        avg_frobenius: avg,
        per_state,
        bound: None,
        label: String::new(),
    })
}

/// Monte-Carlo estimate of the average Frobenius error from uniformly drawn
/// basis states. Returns `(mean, standard error)`.
pub fn frobenius_error_sampled(
    test: &dyn Operator,
    reference: &dyn Operator,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let n = test.num_qubits();
    check_n(n, reference.num_qubits())?;
    if samples < 2 {
        return Err(Error::InvalidParameter(
            "sampled estimate needs >= 2 samples".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<usize> = (0..samples)
        .map(|_| rng.random_range(0..1usize << n))
        .collect();
    let errs = xs
        .par_iter()
        .map(|&x| column_error(test, reference, x))
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_and_stderr(&errs))
}

/// Sample mean and `s/√k` with the unbiased sample deviation `s`.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Average error measured on the basis `{P|x⟩}` for a basis-change circuit
/// `P`. For a unitary `P` this equals the computational-basis average.
pub fn frobenius_error_in_basis(
    test: &dyn Operator,
    reference: &dyn Operator,
    basis: &Circuit,
) -> Result<f64> {
    let n = test.num_qubits();
    check_n(n, reference.num_qubits())?;
    check_n(n, basis.num_qubits())?;
    check_exhaustive(n)?;
    let errs = (0..1usize << n)
        .into_par_iter()
        .map(|x| {
            let phi = Statevector::basis_state(n, x)?.apply_circuit(basis)?;
            test.apply(&phi)?.error_norm_sq(&reference.apply(&phi)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errs.iter().sum::<f64>() / errs.len() as f64)
}

/// Error restricted to a subspace spanned by computational basis states.
#[derive(Clone, Debug, Serialize)]
pub struct SubspaceReport {
    pub states: Vec<usize>,
    pub per_state: Vec<f64>,
    /// Mean squared error over `states`.
    pub mu: f64,
    /// Exhaustive average error over the whole space.
    pub epsilon: f64,
    /// `2^n·ε/μ`, the largest dimension a subspace with mean error `μ` can have.
    pub dim_bound: f64,
}

impl SubspaceReport {
    pub fn dimension_consistent(&self) -> bool {
        self.states.len() as f64 <= self.dim_bound + 1e-9
    }
}

pub fn subspace_error(
    test: &dyn Operator,
    reference: &dyn Operator,
    states: &[usize],
) -> Result<SubspaceReport> {
    let full = frobenius_error_avg(test, reference)?;
    subspace_error_from(&full, states)
}

/// Same as [`subspace_error`], reusing an existing exhaustive report.
pub fn subspace_error_from(full: &ErrorReport, states: &[usize]) -> Result<SubspaceReport> {
    if states.is_empty() {
        return Err(Error::EmptySubspace);
    }
    let mut seen = std::collections::HashSet::new();
    let mut per_state = Vec::with_capacity(states.len());
    for &x in states {
        if x >= full.per_state.len() {
            return Err(Error::BasisOutOfRange {
                index: x,
                n: full.n,
            });
        }
        if !seen.insert(x) {
            return Err(Error::InvalidParameter(format!(
                "basis state {x} listed twice"
            )));
        }
        per_state.push(full.per_state[x]);
    }
    let mu = per_state.iter().sum::<f64>() / states.len() as f64;
    let dim_bound = if mu > 0.0 {
        full.per_state.len() as f64 * full.avg_frobenius / mu
    } else {
        f64::INFINITY
    };
    Ok(SubspaceReport {
        states: states.to_vec(),
        per_state,
        mu,
        epsilon: full.avg_frobenius,
        dim_bound,
    })
}

/// Circular distance of `z` from 0 modulo `2^m`.
pub fn lee_distance(z: i64, m: u32) -> u64 {
    let modulus = 1i128 << m;
    let r = (z as i128).rem_euclid(modulus);
    r.min(modulus - r) as u64
}

/// Linear-depth blocked approximation bound `(4π²/3)·⌈n/m⌉·2^{−m}`.
pub fn aqft_frobenius_bound(n: usize, m: usize) -> f64 {
    4.0 * PI * PI / 3.0 * n.div_ceil(m) as f64 * 0.5f64.powi(m as i32)
}

/// Input whose even-indexed block phase value sits next to the modular
/// boundary (`lee ≤ 1`), where phase estimation wraps around.
pub fn is_bad_state(x: usize, layout: &BlockLayout) -> bool {
    (0..layout.num_blocks())
        .step_by(2)
        .any(|i| lee_distance(layout.phase_value(x, i) as i64, layout.width(i) as u32) <= 1)
}

/// Output amplitudes `α_{X'}` of phase estimation on an `m`-qubit register
/// holding `Σ_Y e^{2πi(X+frac)Y/2^m}|Y⟩/√2^m`, indexed by the estimate `X'`.
pub fn qpe_wraparound_profile(m: usize, x: usize, frac: f64) -> Result<Vec<Complex64>> {
    if m == 0 || x >= 1 << m || !(0.0..1.0).contains(&frac) {
        return Err(Error::InvalidParameter(format!(
            "profile needs m >= 1, X < 2^m and 0 <= frac < 1 (got m={m}, X={x}, frac={frac})"
        )));
    }
    let dim = 1usize << m;
    let norm = (dim as f64).sqrt().recip();
    let theta = x as f64 + frac;
    let amps = (0..dim)
        .map(|y| Complex64::from_polar(norm, TAU * theta * y as f64 / dim as f64))
        .collect();
    let out = Statevector::from_amplitudes(amps)?.apply_circuit(&exact_qft(m)?.inverse())?;
    Ok((0..dim)
        .map(|xp| out.amplitude(reverse_bits(xp, m)))
        .collect())
}

/// `Σ_{Δ: lee(Δ) > t} |α_{X+Δ}|²`.
pub fn tail_mass(alpha: &[Complex64], x: usize, t: u64) -> f64 {
    let m = alpha.len().trailing_zeros();
    alpha
        .iter()
        .enumerate()
        .filter(|&(xp, _)| lee_distance(xp as i64 - x as i64, m) > t)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Squared Frobenius distance `‖W − W′‖²_F` over three blocks of `m` qubits,
/// where `W` applies the rotation between blocks 0 and 1, then QFT on block
/// 1, the rotation between blocks 1 and 2, and QFT† on block 1, and `W′`
/// applies the first rotation last instead.
///
/// Blocks 0 and 2 only ever see diagonal gates, so the computation runs per
/// sector `(Y_0, X_2)` on the middle block alone.
pub fn commutation_gap(m: usize) -> Result<f64> {
    if m == 0 || 3 * m > 18 {
        return Err(Error::SizeLimit(format!(
            "commutation gap is limited to 1 <= m <= 6 (got {m})"
        )));
    }
    let dim = 1usize << m;
    let sectors: Vec<(usize, usize)> = (0..dim)
        .flat_map(|y| (0..dim).map(move |x| (y, x)))
        .collect();
    let parts = sectors
        .par_iter()
        .map(|&(yprev, xnext)| commutation_sector(m, yprev, xnext))
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum())
}

/// Contribution of one `(Y_0, X_2)` sector to [`commutation_gap`].
pub fn commutation_sector(m: usize, yprev: usize, xnext: usize) -> Result<f64> {
    let exp = 2 * m as u32;
    let mut first = Circuit::new(m);
    for a in 0..m {
        let num = (yprev << (m - 1 - a)) as i64;
        first.push(Gate::Phase(a, DyadicAngle::new(num, exp)))?;
    }
    let rx = reverse_bits(xnext, m);
    let mut second = Circuit::new(m);
    for b in 0..m {
        second.push(Gate::Phase(b, DyadicAngle::new((rx << b) as i64, exp)))?;
    }
    let qft = exact_qft(m)?;
    let mut middle = qft.clone();
    middle.append(&second)?;
    middle.append(&qft.inverse())?;
    let w = first.then(&middle)?;
    let w_prime = middle.then(&first)?;
    let mut total = 0.0;
    for x in 0..1usize << m {
        total += column_error(&w, &w_prime, x)?;
    }
    Ok(total)
}

/// The two circuits compared by [`commutation_gap`], on `3m` qubits.
pub fn commutation_circuits(m: usize) -> Result<(Circuit, Circuit)> {
    let n = 3 * m;
    let exp = 2 * m as u32;
    let mut r1 = Circuit::new(n);
    r1.append(&block_phase_rotation(0..m, m..2 * m, exp)?)?;
    let r2 = block_phase_rotation(m..2 * m, 2 * m..3 * m, exp)?;
    let q = exact_qft(m)?.embed(n, m)?;
    let mut middle = q.clone();
    middle.append(&r2)?;
    middle.append(&q.inverse())?;
    Ok((r1.then(&middle)?, middle.then(&r1)?))
}
