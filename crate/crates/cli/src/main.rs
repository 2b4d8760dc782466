mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use optqft::arith::adder::{
    adder_avg_error, adder_avg_error_sampled, adder_error_bound, AdderConfig,
};
use optqft::arith::shor::{period_finding_experiment, random_unit, FactoringConfig};
use optqft::errmetrics::{
    aqft_frobenius_bound, commutation_gap, frobenius_error_avg, frobenius_error_sampled,
    lee_distance, qpe_wraparound_profile, tail_mass, ReferenceQft,
};
use optqft::qftlib::exact_qft;
use optqft::reduction::{
    controlled_phase_gradient, expected_error_exact, phase_gradient_bound, phase_gradient_error,
    purified_apply_approx_gradient, purified_error, purified_input, sampled_errors,
    ReductionConfig,
};
use optqft::{BlockLayout, QftVariant, Statevector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use output::{num, opt_num, summary_line, Format, Output, RunRecord, Table};

#[derive(Parser, Debug)]
#[command(
    name = "optqft",
    version,
    about = "Approximate and optimistic QFT experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Machine-readable output file. Without it the output goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a QFT circuit in the text exchange format.
    Build(BuildArgs),
    /// Average Frobenius error over a grid of sizes and block sizes.
    ErrorSweep(SweepArgs),
    /// Randomized Weyl-twirled error of the optimistic QFT on one input.
    Reduce(ReduceArgs),
    /// Control-register version of the reduction.
    Purified(PurifiedArgs),
    /// Truncated controlled phase gradient error.
    Cpg(CpgArgs),
    /// Commutation gap of the three-block rotation/QFT pattern.
    Commutation(CommutationArgs),
    /// Phase-estimation output amplitudes on one block.
    QpeProfile(QpeArgs),
    /// Windowed-carry adder error.
    Adder(AdderArgs),
    /// Period finding with QFT-based modular multipliers.
    Factor(FactorArgs),
}

#[derive(Args, Debug, Serialize)]
struct BuildArgs {
    /// exact, coppersmith, blocked, optimistic or optimistic-alt
    #[arg(long)]
    variant: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long)]
    variant: String,
    /// Comma-separated sizes; may be empty.
    #[arg(long, default_value = "")]
    n: UsizeList,
    #[arg(long, default_value = "")]
    m: UsizeList,
    #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
    mode: Mode,
    #[arg(long, default_value_t = 4096)]
    samples: usize,
    /// Required in sampled mode.
    #[arg(long)]
    seed: Option<u64>,
    /// Write per-state `x,error[,bad]` CSVs for every grid point here.
    #[arg(long)]
    #[serde(skip)]
    per_state_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ReduceMode {
    Exact,
    Sampled,
}

#[derive(Args, Debug, Serialize)]
struct ReduceArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// zero, ones, uniform, random, or a basis index
    #[arg(long, default_value = "ones")]
    input: String,
    #[arg(long, value_enum, default_value_t = ReduceMode::Exact)]
    mode: ReduceMode,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct PurifiedArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value = "ones")]
    input: String,
    /// Also run with both phase gradients truncated at this length.
    #[arg(long)]
    m_grad: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct CpgArgs {
    #[arg(long)]
    n: usize,
    /// Truncation lengths; defaults to 1..=n.
    #[arg(long, default_value = "")]
    m: UsizeList,
}

#[derive(Args, Debug, Serialize)]
struct CommutationArgs {
    #[arg(long, default_value = "2,3,4,5")]
    m: UsizeList,
}

#[derive(Args, Debug, Serialize)]
struct QpeArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    x: usize,
    #[arg(long, default_value_t = 0.5)]
    frac: f64,
}

#[derive(Args, Debug, Serialize)]
struct AdderArgs {
    #[arg(long)]
    n: usize,
    /// Window lengths; defaults to 1..=n.
    #[arg(long, default_value = "")]
    k: UsizeList,
    #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
    mode: Mode,
    #[arg(long, default_value_t = 1 << 20)]
    samples: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct FactorArgs {
    #[arg(long, default_value_t = 15)]
    modulus: u64,
    #[arg(long, default_value_t = 7)]
    base: u64,
    /// Counting qubits (default 2⌈log2 N⌉).
    #[arg(long)]
    t: Option<usize>,
    /// QFT family in the multipliers, e.g. `exact` or `optimistic:2`.
    #[arg(long, default_value = "exact")]
    variant: String,
    /// Initial work value.
    #[arg(long, conflicts_with = "random_r")]
    r: Option<u64>,
    /// Draw the initial work value as a random unit.
    #[arg(long)]
    random_r: bool,
    /// Sampled runs drawn from the outcome distribution.
    #[arg(long, default_value_t = 0)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Histogram CSV path (defaults to `<out>.hist.csv` next to `--out`).
    #[arg(long)]
    #[serde(skip)]
    histogram: Option<PathBuf>,
}

/// Comma-separated list of sizes; the empty string is the empty list.
#[derive(Clone, Debug, Default, Serialize)]
#[serde(transparent)]
struct UsizeList(Vec<usize>);

impl FromStr for UsizeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse()
                    .map_err(|_| format!("`{p}` is not a non-negative integer"))
            })
            .collect::<Result<_, _>>()
            .map(UsizeList)
    }
}

impl std::ops::Deref for UsizeList {
    type Target = Vec<usize>;

    fn deref(&self) -> &Vec<usize> {
        &self.0
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Limit(String),
    Io(std::io::Error),
}

impl From<optqft::Error> for CliError {
    fn from(e: optqft::Error) -> Self {
        match e {
            optqft::Error::SizeLimit(_) => CliError::Limit(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn config<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn parse_input(input: &str, n: usize, seed: u64) -> CliResult<Statevector> {
    let dim = 1usize << n;
    Ok(match input {
        "zero" => Statevector::basis_state(n, 0)?,
        "ones" => Statevector::basis_state(n, dim - 1)?,
        "uniform" => Statevector::uniform(n)?,
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let amps: Vec<_> = (0..dim)
                .map(|_| {
                    num_complex::Complex64::new(
                        rng.random::<f64>() - 0.5,
                        rng.random::<f64>() - 0.5,
                    )
                })
                .collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            Statevector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())?
        }
        s => {
            let x: usize = s.parse().map_err(|_| {
                usage(format!(
                    "unknown input `{s}`: use zero, ones, uniform, random or an index"
                ))
            })?;
            Statevector::basis_state(n, x)?
        }
    })
}

fn cmd_build(args: &BuildArgs) -> CliResult<Output> {
    if args.m == Some(0) {
        return Err(usage("block size m must be >= 1"));
    }
    if args.n == 0 || args.n > optqft::MAX_QUBITS {
        return Err(usage(format!("n must be in 1..={}", optqft::MAX_QUBITS)));
    }
    let variant = QftVariant::from_name(&args.variant, args.m)?;
    let c = variant.build(args.n)?;
    let stats = json!({
        "qubits": c.num_qubits(),
        "gates": c.gate_count(),
        "two_qubit_gates": c.two_qubit_count(),
        "depth": c.depth(),
        "locality": c.locality(),
    });
    let mut summary = String::new();
    summary_line(
        &mut summary,
        format!(
            "{variant} n={}: gates={} two_qubit={} depth={} locality={}",
            args.n,
            c.gate_count(),
            c.two_qubit_count(),
            c.depth(),
            c.locality()
        ),
    );
    let mut table = Table::new(&["qubits", "gates", "two_qubit_gates", "depth", "locality"]);
    table.push(vec![
        c.num_qubits().to_string(),
        c.gate_count().to_string(),
        c.two_qubit_count().to_string(),
        c.depth().to_string(),
        c.locality().to_string(),
    ]);
    let record = RunRecord::new(
        "build",
        config(args),
        None,
        json!({ "stats": stats, "circuit": c.to_text() }),
    );
    Ok(Output {
        summary,
        table,
        record,
        text: Some(c.to_text()),
    })
}

#[derive(Serialize)]
struct SweepRow {
    n: usize,
    m: Option<usize>,
    avg_error: f64,
    stderr: Option<f64>,
    bound: Option<f64>,
    per_state_max: Option<f64>,
}

fn sweep_bound(variant: QftVariant, n: usize) -> Option<f64> {
    match variant {
        QftVariant::Exact => Some(0.0),
        QftVariant::BlockedLinear(m) => Some(aqft_frobenius_bound(n, m)),
        QftVariant::Optimistic(m) | QftVariant::OptimisticAlt(m) => {
            Some((n * n) as f64 * 0.5f64.powi(m as i32))
        }
        QftVariant::Coppersmith(_) => None,
    }
}

fn cmd_error_sweep(args: &SweepArgs) -> CliResult<Output> {
    let base = QftVariant::from_name(&args.variant, Some(1))?;
    let seed = match (args.mode, args.seed) {
        (Mode::Sampled, None) => return Err(usage("sampled mode needs --seed")),
        (_, s) => s,
    };
    if args.m.contains(&0) || args.n.contains(&0) {
        return Err(usage("n and m must be >= 1"));
    }
    let mut points = Vec::new();
    for &n in args.n.iter() {
        if base == QftVariant::Exact {
            points.push((n, QftVariant::Exact));
            continue;
        }
        for &m in args.m.iter() {
            if m <= n {
                points.push((n, base.with_block_size(m)));
            }
        }
    }
    points.sort_by_key(|&(n, v)| (n, v.block_size()));
    points.dedup();
    for &(n, _) in &points {
        if n > optqft::MAX_QUBITS {
            return Err(CliError::Limit(format!(
                "n={n} exceeds {} qubits",
                optqft::MAX_QUBITS
            )));
        }
    }

    let results = points
        .par_iter()
        .map(|&(n, v)| -> CliResult<(SweepRow, Option<String>)> {
            let c = v.build(n)?;
            let reference = ReferenceQft::new(n);
            let bound = sweep_bound(v, n);
            match args.mode {
                Mode::Exhaustive => {
                    let r = frobenius_error_avg(&c, &reference)?;
                    let csv = match v.block_size() {
                        Some(m) => r.to_csv_with_flags(&BlockLayout::new(n, m)?),
                        None => r.to_csv(),
                    };
                    Ok((
                        SweepRow {
                            n,
                            m: v.block_size(),
                            avg_error: r.avg_frobenius,
                            stderr: None,
                            bound,
                            per_state_max: Some(r.per_state_max()),
                        },
                        Some(csv),
                    ))
                }
                Mode::Sampled => {
                    let (mean, se) =
                        frobenius_error_sampled(&c, &reference, args.samples, seed.unwrap_or(0))?;
                    Ok((
                        SweepRow {
                            n,
                            m: v.block_size(),
                            avg_error: mean,
                            stderr: Some(se),
                            bound,
                            per_state_max: None,
                        },
                        None,
                    ))
                }
            }
        })
        .collect::<CliResult<Vec<_>>>()?;

    if let Some(dir) = &args.per_state_dir {
        for (row, csv) in &results {
            if let Some(csv) = csv {
                let name = match row.m {
                    Some(m) => format!("{}_n{}_m{}.csv", base.name(), row.n, m),
                    None => format!("{}_n{}.csv", base.name(), row.n),
                };
                std::fs::write(output::sibling(dir, &name)?, csv)?;
            }
        }
    }

    let mut table = Table::new(&["n", "m", "avg_error", "bound", "per_state_max"]);
    let mut summary = String::new();
    for (r, _) in &results {
        table.push(vec![
            r.n.to_string(),
            r.m.map(|m| m.to_string()).unwrap_or_default(),
            num(r.avg_error),
            opt_num(r.bound),
            opt_num(r.per_state_max),
        ]);
        summary_line(
            &mut summary,
            format!(
                "n={:<3} m={:<3} avg={:.6e}{}",
                r.n,
                r.m.map(|m| m.to_string()).unwrap_or_else(|| "-".into()),
                r.avg_error,
                r.bound
                    .map(|b| format!(" bound={b:.6e}"))
                    .unwrap_or_default()
            ),
        );
    }
    let rows: Vec<&SweepRow> = results.iter().map(|(r, _)| r).collect();
    let record = RunRecord::new("error-sweep", config(args), seed, json!({ "rows": rows }));
    Ok(Output {
        summary,
        table,
        record,
        text: None,
    })
}

fn cmd_reduce(args: &ReduceArgs) -> CliResult<Output> {
    let cfg = ReductionConfig::new(args.n, args.m, args.samples, args.seed)?;
    let psi = parse_input(&args.input, args.n, args.seed)?;
    let circuit = cfg.circuit()?;
    let ideal = psi.apply_circuit(&exact_qft(args.n)?)?;
    let raw = psi.apply_circuit(&circuit)?.error_norm_sq(&ideal)?;
    let avg = if args.n <= optqft::errmetrics::MAX_EXHAUSTIVE_QUBITS {
        Some(frobenius_error_avg(&circuit, &ReferenceQft::new(args.n))?.avg_frobenius)
    } else {
        None
    };
    let mut summary = String::new();
    let (table, results) = match args.mode {
        ReduceMode::Exact => {
            let e = expected_error_exact(&psi, &cfg)?;
            let mut t = Table::new(&["input", "raw_error", "expected_error", "avg_frobenius"]);
            t.push(vec![args.input.clone(), num(raw), num(e), opt_num(avg)]);
            summary_line(
                &mut summary,
                format!("expected error {e:.9e} (raw {raw:.6e})"),
            );
            (
                t,
                json!({ "raw_error": raw, "expected_error": e, "avg_frobenius": avg }),
            )
        }
        ReduceMode::Sampled => {
            if args.samples < 2 {
                return Err(usage("sampled mode needs --samples >= 2"));
            }
            let draws = sampled_errors(&psi, &cfg)?;
            let errs: Vec<f64> = draws.iter().map(|d| d.1).collect();
            let (mean, se) = optqft::errmetrics::mean_and_stderr(&errs);
            let mut t = Table::new(&["draw", "r1", "r2", "error"]);
            for (i, (v, e)) in draws.iter().enumerate() {
                t.push(vec![
                    i.to_string(),
                    v.r1.to_string(),
                    v.r2.to_string(),
                    num(*e),
                ]);
            }
            summary_line(
                &mut summary,
                format!(
                    "sampled error {mean:.6e} ± {se:.2e} over {} draws (raw {raw:.6e})",
                    errs.len()
                ),
            );
            (
                t,
                json!({ "raw_error": raw, "mean": mean, "stderr": se, "avg_frobenius": avg }),
            )
        }
    };
    if let Some(a) = avg {
        summary_line(&mut summary, format!("average Frobenius error {a:.9e}"));
    }
    let record = RunRecord::new("reduce", config(args), Some(args.seed), results);
    Ok(Output {
        summary,
        table,
        record,
        text: None,
    })
}

fn cmd_purified(args: &PurifiedArgs) -> CliResult<Output> {
    let cfg = ReductionConfig::new(args.n, args.m, 1, args.seed)?;
    let psi = parse_input(&args.input, args.n, args.seed)?;
    let eps = purified_error(&psi, &cfg)?;
    let avg = frobenius_error_avg(&cfg.circuit()?, &ReferenceQft::new(args.n))?.avg_frobenius;
    let mut summary = String::new();
    summary_line(
        &mut summary,
        format!("purified error {eps:.9e}, average {avg:.9e}"),
    );
    let mut table = Table::new(&[
        "input",
        "purified_error",
        "avg_frobenius",
        "m_grad",
        "approx_error",
        "bound",
    ]);
    let mut results = json!({ "purified_error": eps, "avg_frobenius": avg });
    let (mut approx_cell, mut bound_cell) = (String::new(), String::new());
    if let Some(mg) = args.m_grad {
        let n = args.n;
        let delta = phase_gradient_error(&controlled_phase_gradient(n, mg)?, n)?;
        let ideal = purified_input(&psi)?.apply_circuit(&exact_qft(n)?.embed(3 * n, 0)?)?;
        let err = purified_apply_approx_gradient(&psi, &cfg, mg)?.error_norm_sq(&ideal)?;
        let bound = (eps.sqrt() + 2.0 * delta).powi(2);
        summary_line(
            &mut summary,
            format!("truncated gradients (m={mg}): error {err:.6e}, bound {bound:.6e}"),
        );
        results["approx_gradient"] =
            json!({ "m_grad": mg, "delta": delta, "error": err, "bound": bound });
        approx_cell = num(err);
        bound_cell = num(bound);
    }
    table.push(vec![
        args.input.clone(),
        num(eps),
        num(avg),
        args.m_grad.map(|m| m.to_string()).unwrap_or_default(),
        approx_cell,
        bound_cell,
    ]);
    let record = RunRecord::new("purified", config(args), Some(args.seed), results);
    Ok(Output {
        summary,
        table,
        record,
        text: None,
    })
}

fn cmd_cpg(args: &CpgArgs) -> CliResult<Output> {
    let ms: Vec<usize> = if args.m.is_empty() {
        (1..=args.n).collect()
    } else {
        args.m.to_vec()
    };
    let rows = ms
        .par_iter()
        .map(|&m| {
            let c = controlled_phase_gradient(args.n, m)?;
            let err = phase_gradient_error(&c, args.n)?;
            Ok((m, err, phase_gradient_bound(args.n, m), c.depth()))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(&["n", "m", "error", "bound", "depth"]);
    let mut summary = String::new();
    for &(m, e, b, d) in &rows {
        table.push(vec![
            args.n.to_string(),
            m.to_string(),
            num(e),
            num(b),
            d.to_string(),
        ]);
        summary_line(
            &mut summary,
            format!("m={m:<3} error={e:.6e} bound={b:.6e} depth={d}"),
        );
    }
    let json_rows: Vec<_> = rows
        .iter()
        .map(|&(m, e, b, d)| json!({ "m": m, "error": e, "bound": b, "depth": d }))
        .collect();
    let record = RunRecord::new(
        "cpg",
        config(args),
        None,
        json!({ "n": args.n, "rows": json_rows }),
    );
    Ok(Output {
        summary,
        table,
        record,
        text: None,
    })
}

fn cmd_commutation(args: &CommutationArgs) -> CliResult<Output> {
    let mut table = Table::new(&["m", "gap", "gap_per_dim"]);
    let mut summary = String::new();
    let mut rows = Vec::new();
    for &m in args.m.iter() {
        let g = commutation_gap(m)?;
        let per = g / (1u64 << (2 * m)) as f64;
        table.push(vec![m.to_string(), num(g), num(per)]);
        summary_line(&mut summary, format!("m={m}: gap={g:.6e} per 4^m={per:.6}"));
        rows.push(json!({ "m": m, "gap": g, "gap_per_dim": per }));
    }
    let record = RunRecord::new("commutation", config(args), None, json!({ "rows": rows }));
    Ok(Output {
        summary,
        table,
        record,
        text: None,
    })
}

fn cmd_qpe(args: &QpeArgs) -> CliResult<Output> {
    let alpha = qpe_wraparound_profile(args.m, args.x, args.frac)?;
    let mut table = Table::new(&["k", "probability", "lee"]);
    for (k, a) in alpha.iter().enumerate() {
        let d = lee_distance(k as i64 - args.x as i64, args.m as u32);
        table.push(vec![k.to_string(), num(a.norm_sqr()), d.to_string()]);
    }
    let mut summary = String::new();
    let mut tails = Vec::new();
    for t in 2..=(1u64 << (args.m - 1)) {
        let mass = tail_mass(&alpha, args.x, t);
        let bound = 1.0 / (2.0 * (t as f64 - 1.0));
        summary_line(
            &mut summary,
            format!("t={t}: tail={mass:.6e} bound={bound:.6e}"),
        );
        tails.push(json!({ "t": t, "tail": mass, "bound": bound }));
    }
    let probs: Vec<f64> = alpha.iter().map(|a| a.norm_sqr()).collect();
    let record = RunRecord::new(
        "qpe-profile",
        config(args),
        None,
        json!({ "probabilities": probs, "tails": tails }),
    );
    Ok(Output {
        summary,
        table,
        record,
        text: None,
    })
}

fn cmd_adder(args: &AdderArgs) -> CliResult<Output> {
    let ks: Vec<usize> = if args.k.is_empty() {
        (1..=args.n).collect()
    } else {
        args.k.to_vec()
    };
    if args.mode == Mode::Exhaustive && args.n > 12 {
        return Err(CliError::Limit(format!(
            "exhaustive adder limited to n <= 12 (got {})",
            args.n
        )));
    }
    let rows = ks
        .par_iter()
        .map(|&k| {
            let cfg = AdderConfig::new(args.n, k)?;
            let e = match args.mode {
                Mode::Exhaustive => adder_avg_error(cfg),
                Mode::Sampled => adder_avg_error_sampled(cfg, args.samples, args.seed),
            };
            Ok((k, e, adder_error_bound(cfg)))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(&["n", "k", "avg_error", "bound"]);
    let mut summary = String::new();
    for &(k, e, b) in &rows {
        table.push(vec![args.n.to_string(), k.to_string(), num(e), num(b)]);
        summary_line(
            &mut summary,
            format!("k={k:<3} error={e:.6e} bound={b:.6e}"),
        );
    }
    let json_rows: Vec<_> = rows
        .iter()
        .map(|&(k, e, b)| json!({ "k": k, "avg_error": e, "bound": b }))
        .collect();
    let record = RunRecord::new(
        "adder",
        config(args),
        Some(args.seed),
        json!({ "n": args.n, "rows": json_rows }),
    );
    Ok(Output {
        summary,
        table,
        record,
        text: None,
    })
}

fn histogram_path(args: &FactorArgs, out: Option<&Path>) -> Option<PathBuf> {
    args.histogram
        .clone()
        .or_else(|| out.map(|o| o.with_extension("hist.csv")))
}

fn cmd_factor(args: &FactorArgs, out: Option<&Path>) -> CliResult<Output> {
    let variant: QftVariant = args.variant.parse()?;
    let mut cfg = FactoringConfig::new(args.modulus, args.base)?.with_variant(variant);
    if let Some(t) = args.t {
        cfg = cfg.with_t(t);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let r = if args.random_r {
        Some(random_unit(args.modulus, &mut rng))
    } else {
        args.r
    };
    cfg = cfg.with_r(r);
    cfg.validate()?;
    let res = period_finding_experiment(&cfg, args.trials, rng.random())?;
    let p0 = if variant == QftVariant::Exact {
        res.p_success
    } else {
        period_finding_experiment(&cfg.with_variant(QftVariant::Exact), 0, 0)?.p_success
    };
    let hist = histogram_path(args, out);
    if let Some(p) = &hist {
        std::fs::write(p, res.histogram_csv())?;
    }
    let mut table = Table::new(&["k", "probability", "success"]);
    for (k, (p, ok)) in res.distribution.iter().zip(&res.success).enumerate() {
        table.push(vec![k.to_string(), num(*p), u8::from(*ok).to_string()]);
    }
    let mut summary = String::new();
    summary_line(
        &mut summary,
        format!(
            "N={} g={} t={} {}: p_success={:.9} p0={:.9}",
            cfg.modulus, cfg.base, cfg.t, variant, res.p_success, p0
        ),
    );
    if args.trials > 0 {
        summary_line(
            &mut summary,
            format!(
                "{} of {} sampled runs succeeded",
                res.trial_successes, res.trials
            ),
        );
    }
    let record = RunRecord::new(
        "factor",
        config(args),
        Some(args.seed),
        json!({
            "p_success": res.p_success,
            "p0_baseline": p0,
            "histogram_csv_path": hist.map(|p| p.display().to_string()),
            "r": cfg.r_rand,
            "t": cfg.t,
            "trials": res.trials,
            "trial_successes": res.trial_successes,
        }),
    );
    Ok(Output {
        summary,
        table,
        record,
        text: None,
    })
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(j) = cli.common.jobs {
        if j == 0 {
            return Err(usage("--jobs must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    let out = cli.common.out.as_deref();
    let output = match &cli.command {
        Command::Build(a) => cmd_build(a)?,
        Command::ErrorSweep(a) => cmd_error_sweep(a)?,
        Command::Reduce(a) => cmd_reduce(a)?,
        Command::Purified(a) => cmd_purified(a)?,
        Command::Cpg(a) => cmd_cpg(a)?,
        Command::Commutation(a) => cmd_commutation(a)?,
        Command::QpeProfile(a) => cmd_qpe(a)?,
        Command::Adder(a) => cmd_adder(a)?,
        Command::Factor(a) => cmd_factor(a, out)?,
    };
    let body = output.render(cli.common.format);
    match out {
        Some(path) => {
            std::fs::write(path, body)?;
            print!("{}", output.summary);
        }
        None => {
            eprint!("{}", output.summary);
            print!("{body}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let code = match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Limit(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    };
    eprintln!("wall time: {:.3}s", start.elapsed().as_secs_f64());
    code
}
