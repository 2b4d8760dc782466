//! QFT circuit families and their reference states.
//!
//! Every builder emits H and controlled-phase gates only, without a terminal
//! bit-reversal layer. Output qubit `i` carries the phase
//! `0.x_i x_{i+1} … x_{n−1}` where `x_j` is the bit of the input on qubit
//! `j`. Read with qubit 0 as the least significant bit on both sides, the
//! exact QFT is therefore the DFT preceded by a bit reversal of the input:
//! `QFT|x⟩ = Σ_y e^{2πi·rev(x)·y/2^n}|y⟩/√2^n`.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::circuit::{block_phase_rotation, Circuit, DyadicAngle, Gate};
use crate::statevec::Statevector;
use crate::{Error, Result};

/// Partition of `n` qubits into blocks of `m`; only the last block may be
/// narrower. Block 0 holds the least significant bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    n: usize,
    m: usize,
    blocks: Vec<Range<usize>>,
}

impl BlockLayout {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "block layout needs n >= 1 and m >= 1 (got n={n}, m={m})"
            )));
        }
        let blocks = (0..n.div_ceil(m))
            .map(|i| i * m..((i + 1) * m).min(n))
            .collect();
        Ok(Self { n, m, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> Range<usize> {
        self.blocks[i].clone()
    }

    pub fn width(&self, i: usize) -> usize {
        self.blocks[i].len()
    }

    /// `X_i`, with `x = Σ_i 2^{m·i} X_i`.
    pub fn block_value(&self, x: usize, i: usize) -> usize {
        let r = &self.blocks[i];
        (x >> r.start) & ((1 << r.len()) - 1)
    }

    /// `X_i` read most-significant-first from the low end of the block: the
    /// integer whose binary fraction the QFT writes into the block's phase.
    pub fn phase_value(&self, x: usize, i: usize) -> usize {
        reverse_bits(self.block_value(x, i), self.width(i))
    }
}

/// Reverses the low `width` bits of `x`.
pub fn reverse_bits(x: usize, width: usize) -> usize {
    let mut out = 0;
    for j in 0..width {
        out |= ((x >> j) & 1) << (width - 1 - j);
    }
    out
}

/// Circuit families. The payload is the block size (or truncation length) `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QftVariant {
    Exact,
    Coppersmith(usize),
    BlockedLinear(usize),
    Optimistic(usize),
    OptimisticAlt(usize),
}

impl QftVariant {
    pub fn block_size(&self) -> Option<usize> {
        match *self {
            QftVariant::Exact => None,
            QftVariant::Coppersmith(m)
            | QftVariant::BlockedLinear(m)
            | QftVariant::Optimistic(m)
            | QftVariant::OptimisticAlt(m) => Some(m),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            QftVariant::Exact => "exact",
            QftVariant::Coppersmith(_) => "coppersmith",
            QftVariant::BlockedLinear(_) => "blocked",
            QftVariant::Optimistic(_) => "optimistic",
            QftVariant::OptimisticAlt(_) => "optimistic-alt",
        }
    }

    /// Parses a family name; `m` is required by every family except `exact`.
    pub fn from_name(name: &str, m: Option<usize>) -> Result<Self> {
        let need_m = || {
            m.ok_or_else(|| Error::InvalidParameter(format!("variant `{name}` needs a block size")))
        };
        Ok(match name {
            "exact" => QftVariant::Exact,
            "coppersmith" => QftVariant::Coppersmith(need_m()?),
            "blocked" => QftVariant::BlockedLinear(need_m()?),
            "optimistic" => QftVariant::Optimistic(need_m()?),
            "optimistic-alt" => QftVariant::OptimisticAlt(need_m()?),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown QFT variant `{name}`"
                )))
            }
        })
    }

    /// Same family with `m` replaced.
    pub fn with_block_size(&self, m: usize) -> Self {
        match self {
            QftVariant::Exact => QftVariant::Exact,
            QftVariant::Coppersmith(_) => QftVariant::Coppersmith(m),
            QftVariant::BlockedLinear(_) => QftVariant::BlockedLinear(m),
            QftVariant::Optimistic(_) => QftVariant::Optimistic(m),
            QftVariant::OptimisticAlt(_) => QftVariant::OptimisticAlt(m),
        }
    }

    /// Builds the `n`-qubit circuit. A block size above `n` is clamped to `n`.
    pub fn build(&self, n: usize) -> Result<Circuit> {
        let clamp = |m: usize| m.min(n);
        match *self {
            QftVariant::Exact => exact_qft(n),
            QftVariant::Coppersmith(m) => coppersmith_aqft(n, clamp(m)),
            QftVariant::BlockedLinear(m) => blocked_aqft(n, clamp(m)),
            QftVariant::Optimistic(m) => optimistic_qft(n, clamp(m)),
            QftVariant::OptimisticAlt(m) => optimistic_qft_alt(n, clamp(m)),
        }
    }
}

impl fmt::Display for QftVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.block_size() {
            Some(m) => write!(f, "{}(m={m})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for QftVariant {
    type Err = Error;

    /// Accepts `exact`, or `<family>:<m>` such as `optimistic:3`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None => QftVariant::from_name(s, None),
            Some((name, m)) => {
                let m = m
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad block size in `{s}`")))?;
                QftVariant::from_name(name, Some(m))
            }
        }
    }
}

/// Product-form Fourier state for input `x`: factor `i` is
/// `(|0⟩ + e^{2πi·0.x_i x_{i+1}⋯x_{n−1}}|1⟩)/√2` on output qubit `i`.
pub fn reference_qft_state(n: usize, x: usize) -> Result<Statevector> {
    let mut state = Statevector::basis_state(n, x)?;
    let half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for i in 0..n {
        let mut frac = 0.0;
        for j in i..n {
            if (x >> j) & 1 == 1 {
                frac += 0.5f64.powi((j - i + 1) as i32);
            }
        }
        let factor = [half, half * Complex64::from_polar(1.0, TAU * frac)];
        // qubit i becomes the new most significant position
        let mut next = Vec::with_capacity(amps.len() * 2);
        for f in factor {
            next.extend(amps.iter().map(|a| a * f));
        }
        amps = next;
    }
    state.amplitudes_mut().copy_from_slice(&amps);
    Ok(state)
}

/// Standard linear-depth QFT: for each qubit `q` in increasing order, `H(q)`
/// then controlled phases `2π/2^{j−q+1}` from every later qubit `j`.
pub fn exact_qft(n: usize) -> Result<Circuit> {
    truncated_qft(n, n)
}

/// Exact QFT with every controlled phase of exponent above `m` dropped.
pub fn coppersmith_aqft(n: usize, m: usize) -> Result<Circuit> {
    check_nm(n, m)?;
    truncated_qft(n, m)
}

fn truncated_qft(n: usize, m: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidParameter("QFT needs n >= 1".into()));
    }
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.push(Gate::H(q))?;
        for j in q + 1..n {
            let exp = (j - q + 1) as u32;
            if exp as usize > m {
                break;
            }
            c.push(Gate::CPhase(q, j, DyadicAngle::new(1, exp)))?;
        }
    }
    Ok(c)
}

fn check_nm(n: usize, m: usize) -> Result<()> {
    if m == 0 || n == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "block size must satisfy 1 <= m <= n (got n={n}, m={m})"
        )));
    }
    Ok(())
}

fn local_qft(n: usize, range: Range<usize>) -> Result<Circuit> {
    exact_qft(range.len())?.embed(n, range.start)
}

fn rotation(n: usize, layout: &BlockLayout, i: usize) -> Result<Circuit> {
    let lo = layout.block(i);
    let hi = layout.block(i + 1);
    let denom = (lo.len() + hi.len()) as u32;
    let mut c = Circuit::new(n);
    c.append(&block_phase_rotation(lo, hi, denom)?)?;
    Ok(c)
}

/// Blocked linear-depth approximate QFT: for each block in order, a local QFT
/// followed by the phase rotation coupling it to the next (still untouched)
/// block.
pub fn blocked_aqft(n: usize, m: usize) -> Result<Circuit> {
    check_nm(n, m)?;
    let layout = BlockLayout::new(n, m)?;
    let b = layout.num_blocks();
    let mut c = Circuit::new(n);
    for i in 0..b {
        c.append(&local_qft(n, layout.block(i))?)?;
        if i + 1 < b {
            c.append(&rotation(n, &layout, i)?)?;
        }
    }
    Ok(c)
}

/// Ancilla-free optimistic QFT, five layers:
///
/// 1. local QFT on even blocks;
/// 2. rotations `(i, i+1)` for even `i`;
/// 3. local QFT on odd blocks, local QFT† on even blocks;
/// 4. rotations `(i, i+1)` for odd `i`;
/// 5. local QFT on even blocks.
///
/// Block 0 (least significant) is even.
pub fn optimistic_qft(n: usize, m: usize) -> Result<Circuit> {
    check_nm(n, m)?;
    let layout = BlockLayout::new(n, m)?;
    let b = layout.num_blocks();
    let even = || (0..b).step_by(2);
    let odd = || (1..b).step_by(2);
    let mut c = Circuit::new(n);
    for i in even() {
        c.append(&local_qft(n, layout.block(i))?)?;
    }
    for i in even().filter(|i| i + 1 < b) {
        c.append(&rotation(n, &layout, i)?)?;
    }
    for i in odd() {
        c.append(&local_qft(n, layout.block(i))?)?;
    }
    for i in even() {
        c.append(&local_qft(n, layout.block(i))?.inverse())?;
    }
    for i in odd().filter(|i| i + 1 < b) {
        c.append(&rotation(n, &layout, i)?)?;
    }
    for i in even() {
        c.append(&local_qft(n, layout.block(i))?)?;
    }
    Ok(c)
}

/// Optimistic QFT written with QFT blocks only:
///
/// 1. QFT spanning blocks `(i, i+1)` for even `i`;
/// 2. QFT† on every block;
/// 3. QFT spanning blocks `(i, i+1)` for odd `i`, starting from `i = −1`.
///
/// A pair whose partner block does not exist degenerates to a lone QFT on
/// the block that does, so block 0 gets a lone QFT in step 3 and the top
/// block gets one in whichever step leaves it unpaired.
pub fn optimistic_qft_alt(n: usize, m: usize) -> Result<Circuit> {
    check_nm(n, m)?;
    let layout = BlockLayout::new(n, m)?;
    let b = layout.num_blocks() as isize;
    let span = |i: isize| -> Range<usize> {
        let lo = i.max(0) as usize;
        let hi = (i + 1).min(b - 1) as usize;
        layout.block(lo).start..layout.block(hi).end
    };
    let mut c = Circuit::new(n);
    for i in (0..b).step_by(2) {
        c.append(&local_qft(n, span(i))?)?;
    }
    for i in 0..b as usize {
        c.append(&local_qft(n, layout.block(i))?.inverse())?;
    }
    for i in (-1..b).step_by(2) {
        c.append(&local_qft(n, span(i))?)?;
    }
    Ok(c)
}

/// Block size `⌈log2(n²/ε)⌉`, clamped to `[1, n]`. Accepts `0 < ε ≤ 1`.
pub fn block_size_for(n: usize, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "error parameter {eps} outside (0, 1]"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let m = ((n * n) as f64 / eps).log2().ceil();
    Ok((m.max(1.0) as usize).min(n))
}
