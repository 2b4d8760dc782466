//! In-place modular multiplication by a classical constant, built from
//! Fourier-space adders (Draper/Beauregard style).
//!
//! Register layout on `W = 2n + 2` qubits for `n`-bit moduli:
//!
//! | qubits         | role                                   |
//! |----------------|----------------------------------------|
//! | `0..n`         | `y`, the multiplicand                  |
//! | `n..2n+1`      | `b`, the `(n+1)`-bit accumulator        |
//! | `2n+1`         | comparison ancilla                     |
//!
//! `|y⟩|0⟩|0⟩ ↦ |c·y mod N⟩|0⟩|0⟩` for `y < N`. Every QFT and QFT† on the
//! accumulator is produced by the supplied builder, so approximate QFT
//! families can be swapped in. Behaviour for `y ≥ N` is unspecified.

use num_integer::Integer;

use crate::circuit::{Circuit, DyadicAngle, Gate};
use crate::errmetrics::{frobenius_error_avg, subspace_error_from, Operator, SubspaceReport};
use crate::qftlib::QftVariant;
use crate::statevec::{Permutation, Statevector};
use crate::{Error, Result};

/// Builds an `w`-qubit QFT circuit in the crate's convention.
pub type QftBuilder<'a> = &'a (dyn Fn(usize) -> Result<Circuit> + Sync);

pub fn mod_inverse(a: u64, modulus: u64) -> Result<u64> {
    let e = (a as i64).extended_gcd(&(modulus as i64));
    if e.gcd != 1 {
        return Err(Error::NotCoprime { a, modulus });
    }
    Ok(e.x.rem_euclid(modulus as i64) as u64)
}

/// Smallest `n` with `N < 2^n`.
pub fn bits_for(modulus: u64) -> usize {
    (64 - modulus.leading_zeros()) as usize
}

#[derive(Clone, Debug)]
pub struct ModularMultiplier {
    pub constant: u64,
    pub modulus: u64,
    pub n_bits: usize,
    pub circuit: Circuit,
    /// Number of QFT / QFT† instances in the circuit.
    pub qft_count: usize,
}

impl ModularMultiplier {
    pub fn width(&self) -> usize {
        self.circuit.num_qubits()
    }

    /// Basis indices `|y⟩|0⟩|0⟩` for `y < N`.
    pub fn valid_inputs(&self) -> Vec<usize> {
        (0..self.modulus as usize).collect()
    }

    /// Ideal action on the valid inputs, extended to a permutation of the
    /// whole register by fixing every other basis state.
    pub fn ideal_permutation(&self) -> Result<Permutation> {
        let (c, modulus) = (self.constant, self.modulus as usize);
        Permutation::from_fn(1 << self.width(), |x| {
            if x < modulus {
                (c as usize * x) % modulus
            } else {
                x
            }
        })
    }
}

impl Operator for ModularMultiplier {
    fn num_qubits(&self) -> usize {
        self.width()
    }

    fn apply(&self, state: &Statevector) -> Result<Statevector> {
        state.apply_circuit(&self.circuit)
    }
}

struct Layout {
    n: usize,
    width: usize,
}

impl Layout {
    fn acc(&self, j: usize) -> usize {
        self.n + j
    }

    fn acc_width(&self) -> usize {
        self.n + 1
    }

    fn anc(&self) -> usize {
        2 * self.n + 1
    }

    fn acc_msb(&self) -> usize {
        self.acc(self.n)
    }
}

struct Builder {
    lay: Layout,
    qft: Circuit,
    qft_inv: Circuit,
    modulus: u64,
    out: Circuit,
    qft_count: usize,
}

impl Builder {
    fn new(n: usize, modulus: u64, builder: QftBuilder<'_>) -> Result<Self> {
        let lay = Layout {
            n,
            width: 2 * n + 2,
        };
        let w = lay.acc_width();
        let local = builder(w)?;
        if local.num_qubits() != w {
            return Err(Error::QubitCountMismatch {
                expected: w,
                got: local.num_qubits(),
            });
        }
        // circuit qubit j sits on accumulator bit w−1−j, which turns the
        // builder's input-reversed QFT into an ordinary adder basis
        let map: Vec<usize> = (0..w).map(|j| lay.acc(w - 1 - j)).collect();
        let qft = local.remap(lay.width, &map)?;
        let qft_inv = qft.inverse();
        let out = Circuit::new(lay.width);
        Ok(Self {
            lay,
            qft,
            qft_inv,
            modulus,
            out,
            qft_count: 0,
        })
    }

    fn qft(&mut self) -> Result<()> {
        self.qft_count += 1;
        self.out.append(&self.qft)
    }

    fn qft_inv(&mut self) -> Result<()> {
        self.qft_count += 1;
        self.out.append(&self.qft_inv)
    }

    /// Fourier-space addition of `sign·a`, optionally controlled.
    fn phi_add(&mut self, a: u64, sign: i64, control: Option<usize>) -> Result<()> {
        let w = self.lay.acc_width();
        for j in 0..w {
            let num = sign * ((a as i64) << j);
            let angle = DyadicAngle::new(num.rem_euclid(1 << w), w as u32);
            if angle.is_zero() {
                continue;
            }
            let target = self.lay.acc(w - 1 - j);
            let g = match control {
                Some(c) => Gate::CPhase(c, target, angle),
                None => Gate::Phase(target, angle),
            };
            self.out.push(g)?;
        }
        Ok(())
    }

    fn cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.out.push(Gate::H(target))?;
        self.out
            .push(Gate::CPhase(control, target, DyadicAngle::new(1, 1)))?;
        self.out.push(Gate::H(target))
    }

    /// `b ← b + a mod N` in Fourier space when `control` is set, for `b < N`.
    fn phi_add_mod(&mut self, a: u64, control: usize) -> Result<()> {
        let (anc, msb, modulus) = (self.lay.anc(), self.lay.acc_msb(), self.modulus);
        self.phi_add(a, 1, Some(control))?;
        self.phi_add(modulus, -1, None)?;
        self.qft_inv()?;
        self.cnot(msb, anc)?;
        self.qft()?;
        self.phi_add(modulus, 1, Some(anc))?;
        self.phi_add(a, -1, Some(control))?;
        self.qft_inv()?;
        self.out.push(Gate::X(msb))?;
        self.cnot(msb, anc)?;
        self.out.push(Gate::X(msb))?;
        self.qft()?;
        self.phi_add(a, 1, Some(control))
    }

    /// `b ← b + a·y mod N`.
    fn mult_add(&mut self, a: u64) -> Result<()> {
        self.qft()?;
        let mut shifted = a % self.modulus;
        for j in 0..self.lay.n {
            self.phi_add_mod(shifted, j)?;
            shifted = (shifted * 2) % self.modulus;
        }
        self.qft_inv()
    }
}

/// Multiplier `|y⟩ ↦ |c·y mod N⟩` whose accumulator QFTs come from `builder`.
pub fn modmul_circuit(
    c: u64,
    modulus: u64,
    n_bits: usize,
    builder: QftBuilder<'_>,
) -> Result<ModularMultiplier> {
    if modulus < 2 || bits_for(modulus) > n_bits {
        return Err(Error::InvalidParameter(format!(
            "modulus {modulus} does not fit in {n_bits} bits"
        )));
    }
    if 2 * n_bits + 2 > crate::MAX_QUBITS {
        return Err(Error::SizeLimit(format!(
            "multiplier on {n_bits} bits is too wide"
        )));
    }
    let c = c % modulus;
    let c_inv = mod_inverse(c, modulus)?;

    let mut fwd = Builder::new(n_bits, modulus, builder)?;
    fwd.mult_add(c)?;
    let mut back = Builder::new(n_bits, modulus, builder)?;
    back.mult_add(c_inv)?;

    let mut circuit = fwd.out;
    for j in 0..n_bits {
        circuit.push(Gate::Swap(j, n_bits + j))?;
    }
    circuit.append(&back.out.inverse())?;
    Ok(ModularMultiplier {
        constant: c,
        modulus,
        n_bits,
        circuit,
        qft_count: fwd.qft_count + back.qft_count,
    })
}

/// Builder closure for a QFT family.
pub fn variant_builder(variant: QftVariant) -> impl Fn(usize) -> Result<Circuit> + Sync {
    move |w| variant.build(w)
}

/// Error of an approximate multiplier over the valid inputs, measured
/// against the exact-QFT multiplier for the same constant.
pub fn multiplier_subspace_error(approx: &ModularMultiplier) -> Result<SubspaceReport> {
    let exact = modmul_circuit(
        approx.constant,
        approx.modulus,
        approx.n_bits,
        &variant_builder(QftVariant::Exact),
    )?;
    let full = frobenius_error_avg(approx, &exact)?;
    subspace_error_from(&full, &approx.valid_inputs())
}

/// Triangle-inequality bound on the valid-input error:
/// `μ ≤ L²·2^W·ε_qft / N`, with `L` QFT instances of average error `ε_qft`.
pub fn multiplier_error_bound(mult: &ModularMultiplier, qft_eps: f64) -> f64 {
    let l = mult.qft_count as f64;
    l * l * (1u64 << mult.width()) as f64 * qft_eps / mult.modulus as f64
}
