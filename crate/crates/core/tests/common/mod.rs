//! Reference helpers shared by the integration tests. Nothing here calls
//! into the statevector engine.

#![allow(dead_code)]

use num_complex::Complex64;
use optqft::{Circuit, Gate};
use std::f64::consts::TAU;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Applies a circuit by summing over local matrix elements for every output
/// index.
pub fn naive_apply(circuit: &Circuit, input: &[Complex64]) -> Vec<Complex64> {
    let mut v = input.to_vec();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for g in circuit.gates() {
        let mut out = vec![c(0.0, 0.0); v.len()];
        for (i, o) in out.iter_mut().enumerate() {
            *o = match *g {
                Gate::H(q) => {
                    let b = (i >> q) & 1;
                    let i0 = i & !(1 << q);
                    let i1 = i | (1 << q);
                    let sign = if b == 1 { -1.0 } else { 1.0 };
                    (v[i0] + v[i1] * sign) * h
                }
                Gate::X(q) => v[i ^ (1 << q)],
                Gate::Phase(q, a) => {
                    if (i >> q) & 1 == 1 {
                        v[i] * Complex64::from_polar(1.0, a.radians())
                    } else {
                        v[i]
                    }
                }
                Gate::CPhase(p, q, a) => {
                    if (i >> p) & 1 == 1 && (i >> q) & 1 == 1 {
                        v[i] * Complex64::from_polar(1.0, a.radians())
                    } else {
                        v[i]
                    }
                }
                Gate::Swap(p, q) => {
                    let (bp, bq) = ((i >> p) & 1, (i >> q) & 1);
                    let j = (i & !(1 << p) & !(1 << q)) | (bq << p) | (bp << q);
                    v[j]
                }
            };
        }
        v = out;
    }
    v
}

pub fn basis(n: usize, x: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[x] = c(1.0, 0.0);
    v
}

pub fn dist_sq(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn rev(x: usize, w: usize) -> usize {
    (0..w).fold(0, |acc, j| acc | (((x >> j) & 1) << (w - 1 - j)))
}

/// Product state whose qubit `q` carries the phase `Σ_{j ∈ [q, cut(q))} x_j/2^{j−q+1}`.
pub fn truncated_fourier_state(n: usize, x: usize, cut: impl Fn(usize) -> usize) -> Vec<Complex64> {
    let dim = 1usize << n;
    let norm = (dim as f64).sqrt().recip();
    let fracs: Vec<f64> = (0..n)
        .map(|q| {
            (q..cut(q))
                .filter(|&j| (x >> j) & 1 == 1)
                .map(|j| 0.5f64.powi((j - q + 1) as i32))
                .sum()
        })
        .collect();
    (0..dim)
        .map(|y| {
            let ph: f64 = (0..n)
                .filter(|&q| (y >> q) & 1 == 1)
                .map(|q| fracs[q])
                .sum();
            Complex64::from_polar(norm, TAU * ph)
        })
        .collect()
}

/// DFT column `x` after reversing the bits of `x`.
pub fn dft_rev_column(n: usize, x: usize) -> Vec<Complex64> {
    let dim = 1usize << n;
    let rx = rev(x, n);
    let norm = (dim as f64).sqrt().recip();
    (0..dim)
        .map(|y| Complex64::from_polar(norm, TAU * ((rx * y) % dim) as f64 / dim as f64))
        .collect()
}
