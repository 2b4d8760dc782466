mod common;

use common::*;
use num_complex::Complex64;
use optqft::errmetrics::{frobenius_error_avg, ReferenceQft};
use optqft::qftlib::exact_qft;
use optqft::reduction::*;
use optqft::Statevector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn random_state(n: usize, rng: &mut impl Rng) -> Statevector {
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Statevector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

#[test]
fn weyl_examples() {
    let s = Statevector::basis_state(3, 5).unwrap();
    let out = WeylOp::new(3, 2, 0).apply(&s).unwrap();
    assert!((out.amplitude(7).norm() - 1.0).abs() < 1e-12);
    let out = WeylOp::new(3, 0, 1).apply(&s).unwrap();
    let expect = Complex64::from_polar(1.0, TAU * 5.0 / 8.0);
    assert!((out.amplitude(5) - expect).norm() < 1e-12);
    assert_eq!(WeylOp::new(3, -1, 9), WeylOp { n: 3, r1: 7, r2: 1 });
    assert_eq!(
        WeylOp::new(3, 2, 5).conjugate(),
        WeylOp { n: 3, r1: 5, r2: 6 }
    );
}

/// `U·V_in†·U†·e_y` against `V(r2, −r1)·e_y` with the reversed-input DFT
/// written out densely.
fn dense_conjugation_gap(n: usize, r1: i64, r2: i64) -> f64 {
    let dim = 1usize << n;
    let u: Vec<Vec<Complex64>> = (0..dim).map(|x| dft_rev_column(n, x)).collect();
    let v = WeylOp::new(n, r1, r2);
    let mut worst = 0.0f64;
    for y in 0..dim {
        // U† e_y has entries conj(U[x][y]) over x; V_in† = R·V†·R
        let col: Vec<Complex64> = (0..dim).map(|x| u[x][y].conj()).collect();
        let rev_in: Vec<Complex64> = (0..dim).map(|x| col[rev(x, n)]).collect();
        let adj = v
            .apply_adjoint(&Statevector::from_amplitudes(rev_in).unwrap())
            .unwrap();
        let back: Vec<Complex64> = (0..dim).map(|x| adj.amplitude(rev(x, n))).collect();
        let mut out = vec![c(0.0, 0.0); dim];
        for (x, a) in back.iter().enumerate() {
            for k in 0..dim {
                out[k] += u[x][k] * a;
            }
        }
        let want = v
            .conjugate()
            .apply(&Statevector::basis_state(n, y).unwrap())
            .unwrap();
        worst = worst.max(max_diff(&out, want.amplitudes()));
    }
    worst
}

#[test]
fn conjugation_identity_exhaustive_small() {
    for r1 in 0..8 {
        for r2 in 0..8 {
            assert!(weyl_conjugation_check(3, r1, r2).unwrap() < 1e-10);
            assert!(dense_conjugation_gap(3, r1, r2) < 1e-10);
        }
    }
}

#[test]
fn conjugation_identity_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let (r1, r2) = (rng.random_range(0..64), rng.random_range(0..64));
        assert!(weyl_conjugation_check(6, r1, r2).unwrap() < 1e-9);
    }
    assert!(dense_conjugation_gap(5, 13, 22) < 1e-9);
}

#[test]
fn twirl_is_maximally_mixed() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=5 {
        for _ in 0..5 {
            let psi = random_state(n, &mut rng);
            let rho = weyl_twirl(&psi).unwrap();
            let dim = 1usize << n;
            for i in 0..dim {
                for j in 0..dim {
                    let want = if i == j { 1.0 / dim as f64 } else { 0.0 };
                    assert!((rho[i * dim + j] - c(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn expected_error_equals_average_case_error() {
    let cfg = ReductionConfig::new(6, 2, 1, 0).unwrap();
    let avg = frobenius_error_avg(&cfg.circuit().unwrap(), &ReferenceQft::new(6))
        .unwrap()
        .avg_frobenius;
    assert!((avg - 0.113_519).abs() < 1e-5);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut inputs = vec![
        Statevector::basis_state(6, 0).unwrap(),
        Statevector::basis_state(6, 63).unwrap(),
        Statevector::uniform(6).unwrap(),
    ];
    inputs.push(random_state(6, &mut rng));
    inputs.push(random_state(6, &mut rng));
    for psi in &inputs {
        let e = expected_error_exact(psi, &cfg).unwrap();
        assert!((e - avg).abs() < 1e-9, "{e} vs {avg}");
    }
}

#[test]
fn reduction_helps_the_worst_input() {
    let cfg = ReductionConfig::new(6, 2, 2000, 17).unwrap();
    let ones = Statevector::basis_state(6, 63).unwrap();
    let raw = ones
        .apply_circuit(&cfg.circuit().unwrap())
        .unwrap()
        .error_norm_sq(&ones.apply_circuit(&exact_qft(6).unwrap()).unwrap())
        .unwrap();
    let exact = expected_error_exact(&ones, &cfg).unwrap();
    assert!(exact < raw, "{exact} !< {raw}");
    let (mean, se) = expected_error_sampled(&ones, &cfg).unwrap();
    assert!((mean - exact).abs() <= 4.0 * se, "{mean} ± {se} vs {exact}");
}

#[test]
fn purified_error_matches_average() {
    for (n, m) in [(4, 2), (4, 1), (5, 2)] {
        let cfg = ReductionConfig::new(n, m, 1, 0).unwrap();
        let avg = frobenius_error_avg(&cfg.circuit().unwrap(), &ReferenceQft::new(n))
            .unwrap()
            .avg_frobenius;
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for psi in [
            Statevector::basis_state(n, (1 << n) - 1).unwrap(),
            random_state(n, &mut rng),
        ] {
            let e = purified_error(&psi, &cfg).unwrap();
            assert!((e - avg).abs() < 1e-9, "n={n} m={m}: {e} vs {avg}");
        }
        if (n, m) != (4, 2) {
            assert!(avg > 1e-3);
        }
    }
}

#[test]
fn approximate_gradient_stays_within_bound() {
    let n = 4;
    let cfg = ReductionConfig::new(n, 1, 1, 0).unwrap();
    let psi = Statevector::basis_state(n, 9).unwrap();
    let eps = purified_error(&psi, &cfg).unwrap();
    let ideal = purified_input(&psi)
        .unwrap()
        .apply_circuit(&exact_qft(n).unwrap().embed(3 * n, 0).unwrap())
        .unwrap();
    for m_grad in 1..=n {
        let delta =
            phase_gradient_error(&controlled_phase_gradient(n, m_grad).unwrap(), n).unwrap();
        let out = purified_apply_approx_gradient(&psi, &cfg, m_grad).unwrap();
        let err = out.error_norm_sq(&ideal).unwrap();
        let bound = (eps.sqrt() + 2.0 * delta).powi(2);
        assert!(err <= bound + 1e-9, "m_grad={m_grad}: {err} > {bound}");
        if m_grad == n {
            assert!((err - eps).abs() < 1e-9);
        }
    }
}

#[test]
fn phase_gradient_properties() {
    for n in 1..=6 {
        let full = controlled_phase_gradient(n, n).unwrap();
        assert!(phase_gradient_error(&full, n).unwrap() < 1e-10);
        // direct check on basis states with x = 0 or z = 0
        let dim = 1usize << n;
        for v in 0..dim {
            for idx in [v, v << n] {
                let s = Statevector::basis_state(2 * n, idx)
                    .unwrap()
                    .apply_circuit(&full)
                    .unwrap();
                assert!((s.amplitude(idx) - c(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }
    for n in 1..=12 {
        for m in 1..=n {
            let g = controlled_phase_gradient(n, m).unwrap();
            assert!(g.depth() <= m + 1);
            let d = phase_gradient_error(&g, n).unwrap();
            assert!(d <= phase_gradient_bound(n, m) + 1e-12, "n={n} m={m}");
        }
    }
    for (n, delta) in [(8, 0.5), (12, 0.1), (12, 1e-3)] {
        let m = gradient_block_size(n, delta).unwrap();
        let d = phase_gradient_error(&controlled_phase_gradient(n, m).unwrap(), n).unwrap();
        assert!(d <= delta);
    }
}
