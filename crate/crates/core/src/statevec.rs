//! Dense statevector simulation.
//!
//! Basis index `x` is read with qubit 0 as its least significant bit, so a
//! register split into blocks of `m` qubits satisfies `x = Σ 2^{m·i} X_i`.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::circuit::{Circuit, Gate};
use crate::{Error, Result, MAX_QUBITS};

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// Computational basis state `|x⟩` on `n` qubits.
    pub fn basis_state(n: usize, x: usize) -> Result<Self> {
        check_width(n)?;
        if x >= 1 << n {
            return Err(Error::BasisOutOfRange { index: x, n });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[x] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Uniform superposition over all `2^n` basis states.
    pub fn uniform(n: usize) -> Result<Self> {
        check_width(n)?;
        let a = (1.0 / (1u64 << n) as f64).sqrt();
        Ok(Self {
            n,
            amps: vec![Complex64::new(a, 0.0); 1 << n],
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two (at least 2);
    /// no normalization is applied.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        check_width(n)?;
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn amplitude(&self, x: usize) -> Complex64 {
        self.amps[x]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// Tensor product with `self` on the high qubits and `low` on the low ones.
    pub fn tensor(&self, low: &Statevector) -> Result<Statevector> {
        let n = self.n + low.n;
        check_width(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for hi in &self.amps {
            amps.extend(low.amps.iter().map(|lo| hi * lo));
        }
        Ok(Statevector { n, amps })
    }

    pub fn apply_gate(&self, gate: &Gate) -> Result<Statevector> {
        let mut out = self.clone();
        out.apply_gate_mut(gate)?;
        Ok(out)
    }

    pub fn apply_gate_mut(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub fn apply_circuit(&self, circuit: &Circuit) -> Result<Statevector> {
        let mut out = self.clone();
        out.apply_circuit_mut(circuit)?;
        Ok(out)
    }

    /// Gates are applied in list order. Circuits validate their gates on
    /// construction, so only the register width is checked here.
    pub fn apply_circuit_mut(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() != self.n {
            return Err(Error::QubitCountMismatch {
                expected: self.n,
                got: circuit.num_qubits(),
            });
        }
        for g in circuit.gates() {
            self.apply_unchecked(g);
        }
        Ok(())
    }

    /// `amps'[perm(x)] = amps[x]`.
    pub fn apply_permutation(&self, perm: &Permutation) -> Result<Statevector> {
        if perm.len() != self.dim() {
            return Err(Error::QubitCountMismatch {
                expected: self.n,
                got: perm.len().trailing_zeros() as usize,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (x, a) in self.amps.iter().enumerate() {
            amps[perm.apply(x)] = *a;
        }
        Ok(Statevector { n: self.n, amps })
    }

    /// Multiplies amplitude `x` by `phase(x)`.
    pub fn apply_diagonal_mut(&mut self, phase: impl Fn(usize) -> Complex64) {
        for (x, a) in self.amps.iter_mut().enumerate() {
            *a *= phase(x);
        }
    }

    pub fn error_norm_sq(&self, other: &Statevector) -> Result<f64> {
        error_norm_sq(self, other)
    }

    /// Largest entrywise amplitude difference.
    pub fn max_abs_diff(&self, other: &Statevector) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Probability of each basis outcome.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_same(&self, other: &Statevector) -> Result<()> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(())
    }

    fn apply_unchecked(&mut self, gate: &Gate) {
        let v = &mut self.amps;
        match *gate {
            Gate::H(q) => {
                let stride = 1usize << q;
                let s = FRAC_1_SQRT_2;
                for base in (0..v.len()).step_by(stride << 1) {
                    for i in base..base + stride {
                        let a = v[i];
                        let b = v[i + stride];
                        v[i] = (a + b) * s;
                        v[i + stride] = (a - b) * s;
                    }
                }
            }
            Gate::X(q) => {
                let stride = 1usize << q;
                for base in (0..v.len()).step_by(stride << 1) {
                    for i in base..base + stride {
                        v.swap(i, i + stride);
                    }
                }
            }
            Gate::Phase(q, angle) => {
                if angle.is_zero() {
                    return;
                }
                let w = angle.phase();
                let mask = 1usize << q;
                for (i, a) in v.iter_mut().enumerate() {
                    if i & mask != 0 {
                        *a *= w;
                    }
                }
            }
            Gate::CPhase(p, q, angle) => {
                if angle.is_zero() {
                    return;
                }
                let w = angle.phase();
                let mask = (1usize << p) | (1usize << q);
                for (i, a) in v.iter_mut().enumerate() {
                    if i & mask == mask {
                        *a *= w;
                    }
                }
            }
            Gate::Swap(p, q) => {
                let (bp, bq) = (1usize << p, 1usize << q);
                for i in 0..v.len() {
                    if i & bp != 0 && i & bq == 0 {
                        v.swap(i, i ^ bp ^ bq);
                    }
                }
            }
        }
    }
}

/// `Σ_x |a[x] − b[x]|²`; global phases count.
pub fn error_norm_sq(a: &Statevector, b: &Statevector) -> Result<f64> {
    a.check_same(b)?;
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum())
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "register needs at least one qubit".into(),
        ));
    }
    if n > MAX_QUBITS {
        return Err(Error::SizeLimit(format!(
            "{n} qubits exceeds the dense limit of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// A bijection on `{0, …, len−1}`, checked at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let size = map.len();
        let mut seen = vec![false; size];
        for &y in &map {
            if y >= size || seen[y] {
                return Err(Error::NotBijective { size });
            }
            seen[y] = true;
        }
        Ok(Self { map })
    }

    pub fn from_fn(size: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        Self::new((0..size).map(f).collect())
    }

    pub fn identity(size: usize) -> Self {
        Self {
            map: (0..size).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (x, &y) in self.map.iter().enumerate() {
            inv[y] = x;
        }
        Permutation { map: inv }
    }

    /// `self` after `first`.
    pub fn after(&self, first: &Permutation) -> Result<Permutation> {
        if self.len() != first.len() {
            return Err(Error::NotBijective { size: first.len() });
        }
        Ok(Permutation {
            map: first.map.iter().map(|&y| self.map[y]).collect(),
        })
    }
}
