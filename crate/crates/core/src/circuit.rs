//! Gate-level circuit representation.
//!
//! All rotation angles are dyadic multiples of a full turn, `θ = 2π·k/2^e`,
//! stored exactly so that inversion and equality never drift.
//!
//! Text exchange format (UTF-8, one gate per line, `#` starts a comment):
//!
//! ```text
//! QUBITS 4
//! H 0
//! CP 0,3 1/4
//! P 2 3/5
//! X 1
//! SWAP 1,2
//! ```
//!
//! Phase gates carry the pair `k/e`; `CP 0,3 1/4` is a controlled phase of
//! `2π·1/16` between qubits 0 and 3.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::{Error, Result};

const MAX_ANGLE_EXP: u32 = 62;

/// Angle `2π·num/2^exp`, normalized so that `num < 2^exp` and `num` is odd
/// (the zero angle is `0/0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicAngle {
    num: u64,
    exp: u32,
}

impl DyadicAngle {
    pub const ZERO: DyadicAngle = DyadicAngle { num: 0, exp: 0 };

    /// # Panics
    /// If `exp` exceeds 62.
    pub fn new(num: i64, exp: u32) -> Self {
        assert!(exp <= MAX_ANGLE_EXP, "angle exponent {exp} too large");
        let modulus = 1i128 << exp;
        let mut k = (num as i128).rem_euclid(modulus) as u64;
        let mut e = exp;
        if k == 0 {
            return Self::ZERO;
        }
        while k.is_multiple_of(2) {
            k /= 2;
            e -= 1;
        }
        Self { num: k, exp: e }
    }

    pub fn numerator(self) -> u64 {
        self.num
    }

    pub fn exponent(self) -> u32 {
        self.exp
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn radians(self) -> f64 {
        self.num as f64 / (1u64 << self.exp) as f64 * TAU
    }

    /// `e^{iθ}`.
    pub fn phase(self) -> Complex64 {
        Complex64::from_polar(1.0, self.radians())
    }
}

impl std::ops::Neg for DyadicAngle {
    type Output = DyadicAngle;

    fn neg(self) -> DyadicAngle {
        DyadicAngle::new(-(self.num as i64), self.exp)
    }
}

impl fmt::Display for DyadicAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.exp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    X(usize),
    Phase(usize, DyadicAngle),
    /// Symmetric in its two qubits.
    CPhase(usize, usize, DyadicAngle),
    Swap(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> ([usize; 2], usize) {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Phase(q, _) => ([q, q], 1),
            Gate::CPhase(a, b, _) | Gate::Swap(a, b) => ([a, b], 2),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits().1 == 2
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let (qs, k) = self.qubits();
        for &q in &qs[..k] {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
        }
        if k == 2 && qs[0] == qs[1] {
            return Err(Error::DuplicateQubit(qs[0]));
        }
        Ok(())
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Phase(q, a) => Gate::Phase(q, -a),
            Gate::CPhase(p, q, a) => Gate::CPhase(p, q, -a),
            g => g,
        }
    }

    fn remap(&self, map: &[usize]) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(map[q]),
            Gate::X(q) => Gate::X(map[q]),
            Gate::Phase(q, a) => Gate::Phase(map[q], a),
            Gate::CPhase(p, q, a) => Gate::CPhase(map[p], map[q], a),
            Gate::Swap(p, q) => Gate::Swap(map[p], map[q]),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "H {q}"),
            Gate::X(q) => write!(f, "X {q}"),
            Gate::Phase(q, a) => write!(f, "P {q} {a}"),
            Gate::CPhase(p, q, a) => write!(f, "CP {p},{q} {a}"),
            Gate::Swap(p, q) => write!(f, "SWAP {p},{q}"),
        }
    }
}

/// Ordered gate list over a fixed register width.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            g.validate(n)?;
        }
        Ok(Self { n, gates })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends `other`, which may be narrower than `self`.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n > self.n {
            return Err(Error::QubitCountMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// `self` followed by `other` on the same register.
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        if other.n != self.n {
            return Err(Error::QubitCountMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut out = self.clone();
        out.gates.extend_from_slice(&other.gates);
        Ok(out)
    }

    /// Gates reversed with every angle negated.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n: self.n,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Relabels qubit `q` as `map[q]` inside an `n_total`-qubit register.
    pub fn remap(&self, n_total: usize, map: &[usize]) -> Result<Circuit> {
        if map.len() != self.n {
            return Err(Error::QubitCountMismatch {
                expected: self.n,
                got: map.len(),
            });
        }
        let mut seen = vec![false; n_total];
        for &q in map {
            if q >= n_total {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    n: n_total,
                });
            }
            if seen[q] {
                return Err(Error::DuplicateQubit(q));
            }
            seen[q] = true;
        }
        Ok(Circuit {
            n: n_total,
            gates: self.gates.iter().map(|g| g.remap(map)).collect(),
        })
    }

    /// Places this circuit on qubits `offset..offset + n` of a wider register.
    pub fn embed(&self, n_total: usize, offset: usize) -> Result<Circuit> {
        let map: Vec<usize> = (offset..offset + self.n).collect();
        self.remap(n_total, &map)
    }

    /// Greedy layering: each gate lands in the layer after the latest layer
    /// touching any of its qubits. No commutation analysis.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.n];
        let mut depth = 0;
        for g in &self.gates {
            let (qs, k) = g.qubits();
            let layer = qs[..k].iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for &q in &qs[..k] {
                level[q] = layer;
            }
            depth = depth.max(layer);
        }
        depth
    }

    /// Largest `|q1 − q2|` over two-qubit gates.
    pub fn locality(&self) -> usize {
        self.gates
            .iter()
            .filter_map(|g| match *g {
                Gate::CPhase(a, b, _) | Gate::Swap(a, b) => Some(a.abs_diff(b)),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("QUBITS {}\n", self.n);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            let mut parts = line.split_whitespace();
            let op = parts.next().unwrap_or_default();
            let args: Vec<&str> = parts.collect();
            let Some(c) = circuit.as_mut() else {
                if op != "QUBITS" || args.len() != 1 {
                    return Err(err("expected `QUBITS n` header"));
                }
                let n = args[0]
                    .parse::<usize>()
                    .map_err(|_| err("bad qubit count"))?;
                circuit = Some(Circuit::new(n));
                continue;
            };
            let gate = match (op, args.as_slice()) {
                ("H", [q]) => Gate::H(parse_qubit(q, line_no)?),
                ("X", [q]) => Gate::X(parse_qubit(q, line_no)?),
                ("P", [q, a]) => Gate::Phase(parse_qubit(q, line_no)?, parse_angle(a, line_no)?),
                ("CP", [qs, a]) => {
                    let (p, q) = parse_pair(qs, line_no)?;
                    Gate::CPhase(p, q, parse_angle(a, line_no)?)
                }
                ("SWAP", [qs]) => {
                    let (p, q) = parse_pair(qs, line_no)?;
                    Gate::Swap(p, q)
                }
                ("QUBITS", _) => return Err(err("duplicate QUBITS header")),
                _ => return Err(err(&format!("unrecognized gate line `{line}`"))),
            };
            c.push(gate).map_err(|e| err(&e.to_string()))?;
        }
        circuit.ok_or(Error::Parse {
            line: text.lines().count().max(1),
            msg: "missing QUBITS header".into(),
        })
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Circuit> {
        Circuit::parse_text(s)
    }
}

fn parse_qubit(s: &str, line: usize) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad qubit index `{s}`"),
    })
}

fn parse_pair(s: &str, line: usize) -> Result<(usize, usize)> {
    let (a, b) = s.split_once(',').ok_or(Error::Parse {
        line,
        msg: format!("expected `q1,q2`, got `{s}`"),
    })?;
    Ok((parse_qubit(a, line)?, parse_qubit(b, line)?))
}

fn parse_angle(s: &str, line: usize) -> Result<DyadicAngle> {
    let bad = || Error::Parse {
        line,
        msg: format!("bad angle `{s}`, expected `k/e`"),
    };
    let (k, e) = s.split_once('/').ok_or_else(bad)?;
    let k: i64 = k.parse().map_err(|_| bad())?;
    let e: u32 = e.parse().map_err(|_| bad())?;
    if e > MAX_ANGLE_EXP {
        return Err(bad());
    }
    Ok(DyadicAngle::new(k, e))
}

/// Diagonal phase `exp(2πi·X·Y/2^denom_exp)` between two disjoint qubit
/// ranges, built from controlled phases.
///
/// `Y` is the value of `lo` read least-significant-first (qubit `lo.start`
/// has weight 1). `X` is the value of `hi` read most-significant-first: qubit
/// `hi.start + a` has weight `2^{|hi|−1−a}`, which continues the binary
/// fraction of the QFT phase across the block boundary. For two equal blocks
/// of width `m` the denominator is `2^{2m}`.
///
/// Gates are emitted as a sequence of perfect matchings, so the greedy depth
/// equals `max(|lo|, |hi|)`.
pub fn block_phase_rotation(lo: Range<usize>, hi: Range<usize>, denom_exp: u32) -> Result<Circuit> {
    if lo.start < hi.end && hi.start < lo.end {
        return Err(Error::OverlappingRanges);
    }
    let (wl, wh) = (lo.len(), hi.len());
    let n = lo.end.max(hi.end);
    let mut c = Circuit::new(n);
    let span = wl.max(wh);
    for shift in 0..span {
        for b in 0..wl {
            let a = (b + shift) % span;
            if a >= wh {
                continue;
            }
            let weight = (wh - 1 - a) + b;
            if weight as u32 >= denom_exp {
                continue;
            }
            let angle = DyadicAngle::new(1, denom_exp - weight as u32);
            c.push(Gate::CPhase(hi.start + a, lo.start + b, angle))?;
        }
    }
    Ok(c)
}
