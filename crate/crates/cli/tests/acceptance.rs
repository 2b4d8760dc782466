use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use optqft::arith::adder::{
    adder_avg_error, adder_error_bound, exact_add, longest_carry_chain, windowed_add, AdderConfig,
};
use optqft::arith::shor::{period_finding_experiment, FactoringConfig};
use optqft::errmetrics::{
    aqft_frobenius_bound, commutation_gap, frobenius_error_avg, median, qpe_wraparound_profile,
    tail_mass, ReferenceQft,
};
use optqft::qftlib::{
    block_size_for, blocked_aqft, exact_qft, optimistic_qft, optimistic_qft_alt,
    reference_qft_state,
};
use optqft::reduction::{
    controlled_phase_gradient, expected_error_exact, expected_error_sampled, phase_gradient_bound,
    phase_gradient_error, purified_error, weyl_conjugation_check, weyl_twirl, ReductionConfig,
};
use optqft::{Circuit, QftVariant, Statevector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(start: Instant, limit: Duration, detail: String) -> Outcome {
    let t = start.elapsed();
    check(
        t < limit,
        format!("{detail}; {:.1}s of {}s", t.as_secs_f64(), limit.as_secs()),
    )
}

fn random_state(n: usize, rng: &mut impl Rng) -> Statevector {
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Statevector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn avg_error(c: &Circuit) -> f64 {
    frobenius_error_avg(c, &ReferenceQft::new(c.num_qubits()))
        .unwrap()
        .avg_frobenius
}

fn c1_exactness() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 1..=8 {
        let c = exact_qft(n).unwrap();
        let dev = (0..1usize << n)
            .into_par_iter()
            .map(|x| {
                let out = Statevector::basis_state(n, x)
                    .unwrap()
                    .apply_circuit(&c)
                    .unwrap();
                out.max_abs_diff(&reference_qft_state(n, x).unwrap())
                    .unwrap()
            })
            .reduce(|| 0.0, f64::max);
        worst = worst.max(dev);
    }
    if worst >= 1e-10 {
        return Err(format!("max deviation {worst:.3e}"));
    }
    within(
        start,
        Duration::from_secs(10),
        format!("max deviation {worst:.3e}"),
    )
}

fn c2_blocked_bound() -> Outcome {
    let start = Instant::now();
    for n in [4, 6, 8, 10, 12] {
        for m in 1..=4 {
            let e = avg_error(&blocked_aqft(n, m).unwrap());
            let b = aqft_frobenius_bound(n, m);
            if e > b {
                return Err(format!("n={n} m={m}: {e:.6e} > {b:.6e}"));
            }
        }
    }
    within(
        start,
        Duration::from_secs(120),
        "20 grid points within bound".into(),
    )
}

fn c3_optimistic_guarantee() -> Outcome {
    for n in [8, 10, 12] {
        for eps in [0.5, 0.1] {
            let m = block_size_for(n, eps).unwrap();
            let e = avg_error(&optimistic_qft(n, m).unwrap());
            if e > eps {
                return Err(format!("n={n} ε={eps}: m={m} gives {e:.6e}"));
            }
        }
        let errs: Vec<f64> = (1..=n)
            .map(|m| avg_error(&optimistic_qft(n, m).unwrap()))
            .collect();
        for (i, w) in errs.windows(2).enumerate() {
            if w[1] > w[0] + 1e-12 {
                return Err(format!(
                    "n={n}: error rises from m={} to m={}",
                    i + 1,
                    i + 2
                ));
            }
        }
    }
    Ok("ε targets met; errors monotone in m".into())
}

fn c4_two_orderings() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=10 {
        for m in 1..=n {
            let a = optimistic_qft(n, m).unwrap();
            let b = optimistic_qft_alt(n, m).unwrap();
            let dev = (0..1usize << n)
                .into_par_iter()
                .map(|x| {
                    let s = Statevector::basis_state(n, x).unwrap();
                    s.apply_circuit(&a)
                        .unwrap()
                        .max_abs_diff(&s.apply_circuit(&b).unwrap())
                        .unwrap()
                })
                .reduce(|| 0.0, f64::max);
            worst = worst.max(dev);
        }
    }
    check(worst < 1e-9, format!("max entry deviation {worst:.3e}"))
}

fn c5_bad_states(bin: &Path, dir: &Path) -> Outcome {
    let status = Command::new(bin)
        .args([
            "error-sweep",
            "--variant",
            "optimistic",
            "--n",
            "8",
            "--m",
            "2",
            "--per-state-dir",
        ])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("error-sweep exited with {}", status.status));
    }
    let csv = std::fs::read_to_string(dir.join("optimistic_n8_m2.csv"))
        .map_err(|e| format!("histogram CSV missing: {e}"))?;
    let errs: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    if errs.len() != 256 {
        return Err(format!("expected 256 rows, got {}", errs.len()));
    }
    let med = median(&errs);
    let (zero, ones) = (errs[0], errs[255]);
    check(
        ones >= 10.0 * med && zero < 1e-9,
        format!(
            "|1…1⟩ {ones:.4e}, median {med:.4e}, ratio {:.2}, |0…0⟩ {zero:.1e}",
            ones / med
        ),
    )
}

fn c6_weyl() -> Outcome {
    let mut worst: f64 = 0.0;
    for r1 in 0..8 {
        for r2 in 0..8 {
            worst = worst.max(weyl_conjugation_check(3, r1, r2).unwrap());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let (r1, r2) = (rng.random_range(0..64), rng.random_range(0..64));
        worst = worst.max(weyl_conjugation_check(6, r1, r2).unwrap());
    }
    if worst >= 1e-10 {
        return Err(format!("conjugation deviation {worst:.3e}"));
    }
    let mut twirl: f64 = 0.0;
    for n in 1..=5 {
        let dim = 1usize << n;
        for _ in 0..3 {
            let rho = weyl_twirl(&random_state(n, &mut rng)).unwrap();
            for i in 0..dim {
                for j in 0..dim {
                    let want = if i == j { 1.0 / dim as f64 } else { 0.0 };
                    twirl = twirl.max((rho[i * dim + j] - Complex64::new(want, 0.0)).norm());
                }
            }
        }
    }
    check(
        twirl < 1e-9,
        format!("conjugation {worst:.2e}, twirl {twirl:.2e}"),
    )
}

fn c7_reduction() -> Outcome {
    let cfg = ReductionConfig::new(6, 2, 2000, 7).unwrap();
    let avg = avg_error(&cfg.circuit().unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let inputs = [
        Statevector::basis_state(6, 63).unwrap(),
        Statevector::basis_state(6, 0).unwrap(),
        Statevector::uniform(6).unwrap(),
        random_state(6, &mut rng),
        random_state(6, &mut rng),
    ];
    let mut worst = 0.0f64;
    for psi in &inputs {
        worst = worst.max((expected_error_exact(psi, &cfg).unwrap() - avg).abs());
    }
    if worst >= 1e-9 {
        return Err(format!("expected error off by {worst:.3e}"));
    }
    let pcfg = ReductionConfig::new(4, 2, 1, 0).unwrap();
    let pavg = avg_error(&pcfg.circuit().unwrap());
    let pe = purified_error(&Statevector::basis_state(4, 15).unwrap(), &pcfg).unwrap();
    if (pe - pavg).abs() >= 1e-9 {
        return Err(format!("purified {pe:.6e} vs {pavg:.6e}"));
    }
    let (mean, se) = expected_error_sampled(&inputs[0], &cfg).unwrap();
    check(
        (mean - avg).abs() <= 4.0 * se,
        format!(
            "avg {avg:.6e}; exact dev {worst:.1e}; purified dev {:.1e}; MC {mean:.4e} ± {se:.1e}",
            (pe - pavg).abs()
        ),
    )
}

fn c8_phase_gradient() -> Outcome {
    for n in 1..=12 {
        for m in 1..=n {
            let c = controlled_phase_gradient(n, m).unwrap();
            let e = phase_gradient_error(&c, n).unwrap();
            if e > phase_gradient_bound(n, m) || c.depth() > m + 1 {
                return Err(format!("n={n} m={m}: error {e:.3e}, depth {}", c.depth()));
            }
        }
    }
    Ok("78 (n, m) pairs within bound and depth".into())
}

fn c9_qpe_tails() -> Outcome {
    let mut worst_ratio = 0.0f64;
    for m in 2..=6usize {
        for x in 0..1usize << m {
            for k in 0..16 {
                let a = qpe_wraparound_profile(m, x, k as f64 / 16.0).unwrap();
                for t in 2..=(1u64 << (m - 1)) {
                    let bound = 1.0 / (2.0 * (t as f64 - 1.0));
                    worst_ratio = worst_ratio.max(tail_mass(&a, x, t) / bound);
                }
            }
        }
    }
    if worst_ratio >= 1.0 {
        return Err(format!("tail reaches {worst_ratio:.3} of bound"));
    }
    let per: Vec<f64> = (2..=5)
        .map(|m| commutation_gap(m).unwrap() / (1u64 << (2 * m)) as f64 / m as f64)
        .collect();
    check(
        per.iter().all(|&p| p <= per[0] + 1e-12),
        format!("tail ≤ {worst_ratio:.3} of bound; gap/(4^m·m) = {per:.3?}"),
    )
}

fn c10_adder() -> Outcome {
    for n in 1..=10usize {
        for k in 1..=n {
            for a in 0..1u64 << n {
                for b in 0..1u64 << n {
                    let eq = windowed_add(a, b, n, k) == exact_add(a, b, n).0;
                    if eq != (longest_carry_chain(a, b, n) <= k) {
                        return Err(format!("n={n} k={k} a={a} b={b}"));
                    }
                }
            }
            let cfg = AdderConfig::new(n, k).unwrap();
            if adder_avg_error(cfg) > adder_error_bound(cfg) {
                return Err(format!("bound violated at n={n} k={k}"));
            }
        }
    }
    Ok("iff holds for n ≤ 10; bound holds on 55 points".into())
}

fn c11_factoring() -> Outcome {
    let start = Instant::now();
    let cfg = FactoringConfig::new(15, 7).unwrap().with_t(8);
    let p0 = period_finding_experiment(&cfg, 0, 0).unwrap().p_success;
    let p = |m: usize| {
        period_finding_experiment(&cfg.with_variant(QftVariant::Optimistic(m)), 0, 0)
            .unwrap()
            .p_success
    };
    let full = p(cfg.n_bits());
    let (p2, p3) = (p(2), p(3));
    if (full - p0).abs() >= 1e-9 || p3 < p2 {
        return Err(format!(
            "p0 {p0:.9}, m=n {full:.9}, m=2 {p2:.6}, m=3 {p3:.6}"
        ));
    }
    within(
        start,
        Duration::from_secs(600),
        format!("p0 {p0:.6}, m=2 {p2:.6}, m=3 {p3:.6}"),
    )
}

fn c12_determinism(bin: &Path) -> Outcome {
    let runs: [&[&str]; 7] = [
        &[
            "build",
            "--variant",
            "optimistic",
            "--n",
            "9",
            "--m",
            "2",
            "--out",
            "o.txt",
        ],
        &[
            "error-sweep",
            "--variant",
            "optimistic",
            "--n",
            "6,8",
            "--m",
            "1,2",
            "--mode",
            "sampled",
            "--samples",
            "512",
            "--seed",
            "4",
            "--out",
            "o.csv",
        ],
        &[
            "reduce",
            "--n",
            "5",
            "--m",
            "2",
            "--mode",
            "sampled",
            "--samples",
            "200",
            "--input",
            "random",
            "--seed",
            "5",
            "--format",
            "json",
            "--out",
            "o.json",
        ],
        &[
            "purified", "--n", "3", "--m", "1", "--input", "random", "--seed", "2", "--m-grad",
            "2", "--out", "o.csv",
        ],
        &[
            "adder",
            "--n",
            "14",
            "--mode",
            "sampled",
            "--samples",
            "4096",
            "--seed",
            "3",
            "--out",
            "o.csv",
        ],
        &[
            "factor",
            "--variant",
            "optimistic:2",
            "--random-r",
            "--trials",
            "100",
            "--seed",
            "8",
            "--format",
            "json",
            "--out",
            "o.json",
        ],
        &[
            "error-sweep",
            "--variant",
            "blocked",
            "--n",
            "6",
            "--m",
            "2",
            "--format",
            "json",
            "--out",
            "o.json",
        ],
    ];
    let base = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let dir = base.path().join(format!("{i}_{rep}"));
            std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
            let out = Command::new(bin)
                .args(*args)
                .current_dir(&dir)
                .output()
                .map_err(|e| e.to_string())?;
            if !out.status.success() {
                return Err(format!(
                    "`{}` failed: {}",
                    args.join(" "),
                    String::from_utf8_lossy(&out.stderr)
                ));
            }
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&dir)
                .map_err(|e| e.to_string())?
                .map(|e| {
                    let e = e.unwrap();
                    (
                        e.file_name().to_string_lossy().into_owned(),
                        std::fs::read(e.path()).unwrap(),
                    )
                })
                .collect();
            files.sort();
            outputs.push((out.stdout, files));
        }
        if outputs[0] != outputs[1] {
            return Err(format!("`{}` differs between runs", args.join(" ")));
        }
    }
    Ok(format!("{} seeded commands byte-identical", runs.len()))
}

fn main() -> ExitCode {
    let bin = Path::new(env!("CARGO_BIN_EXE_optqft"));
    let hist = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("exact QFT matches product states", Box::new(c1_exactness)),
        (
            "blocked approximation within bound",
            Box::new(c2_blocked_bound),
        ),
        (
            "optimistic block size meets ε",
            Box::new(c3_optimistic_guarantee),
        ),
        ("two optimistic orderings agree", Box::new(c4_two_orderings)),
        (
            "bad-state structure",
            Box::new(|| c5_bad_states(bin, hist.path())),
        ),
        ("Weyl conjugation and twirl", Box::new(c6_weyl)),
        ("reduction equalities", Box::new(c7_reduction)),
        ("controlled phase gradient", Box::new(c8_phase_gradient)),
        (
            "phase-estimation tails and commutation gap",
            Box::new(c9_qpe_tails),
        ),
        ("windowed adder", Box::new(c10_adder)),
        ("period finding", Box::new(c11_factoring)),
        ("determinism", Box::new(|| c12_determinism(bin))),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} criterion {:>2} {name}: {detail} [{:.1}s]",
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
