//! Command-line frontend tying ensemble analysis, complexity-driven design,
//! code construction and Monte Carlo simulation into reproducible runs.
//!
//! Exit codes: 0 on success, 1 on domain or convergence failures, 2 on usage
//! or parse problems. Every output file opens with a `#` manifest block
//! citing the digest of the invocation that produced it.

mod manifest;

use clap::{Args, Parser, Subcommand};
use manifest::RunManifest;
use nbldpc::ensemble::{read_ensemble, write_ensemble, DegreeDistribution};
use nbldpc::exitchart::{
    complexity_from_iterations, count_iterations_discrete, estimate_iterations, threshold,
    threshold_of_chart, Chart,
};
use nbldpc::galois::GField;
use nbldpc::graph::{girth, peg_construct, read_matrix, write_matrix, Encoder};
use nbldpc::montecarlo::{run_sweep, sweep_csv, ChannelSweep, DecoderKind, SimConfig};
use nbldpc::optimizer::{optimize, OptimizeError, PctConfig};
use nbldpc::reference::{
    two_point_ensemble, ITERATION_TABLE, ITERATION_TABLE_CHANNEL_P0, ITERATION_TABLE_Q,
    MIN_COLUMN_WEIGHT_TABLE,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nbldpc", version, about = "Design toolkit for low-complexity non-binary LDPC codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an ensemble's transfer chart: iteration counts, complexity,
    /// threshold, and optionally the f(p) curve as CSV.
    Analyze(AnalyzeArgs),
    /// Minimize decoding complexity over degree distributions from a
    /// feasible starting ensemble.
    Design(DesignArgs),
    /// Realize an ensemble at a block length and build a parity-check
    /// matrix with progressive edge growth.
    Construct(ConstructArgs),
    /// Monte Carlo BER/WER sweep of a constructed code.
    Simulate(SimulateArgs),
    /// Reproduce the published iteration-count and minimum-column-weight
    /// tables as CSV.
    Tables(TablesArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Ensemble file (lambda/rho/q lines).
    #[arg(long, conflicts_with = "chart_poly")]
    ensemble: Option<PathBuf>,
    /// Direct chart polynomial "c1,c2,..." meaning c1 p + c2 p^2 + ...
    #[arg(long)]
    chart_poly: Option<String>,
    /// Initial message error probability.
    #[arg(long)]
    p0: f64,
    /// Target message error probability.
    #[arg(long)]
    pt: f64,
    /// Field order override (defaults to the ensemble file's q).
    #[arg(long)]
    q: Option<usize>,
    /// Target rate for the complexity figure (defaults to the design rate).
    #[arg(long)]
    r0: Option<f64>,
    /// Write the chart curve (p_in, f(p_in)) here as CSV.
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct DesignArgs {
    /// Starting ensemble file.
    #[arg(long)]
    init: PathBuf,
    /// Rate floor.
    #[arg(long)]
    r0: f64,
    /// Field order override.
    #[arg(long)]
    q: Option<usize>,
    /// Design point (defaults to 0.95 x starting threshold).
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pt: f64,
    /// Trust-region radius for lambda, in (0, 0.2].
    #[arg(long, default_value_t = 0.05)]
    zeta1: f64,
    /// Trust-region radius for rho, in (0, 0.2].
    #[arg(long, default_value_t = 0.05)]
    zeta2: f64,
    #[arg(long, default_value_t = 60)]
    rounds: usize,
    #[arg(long, default_value_t = 512)]
    grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optimized ensemble output.
    #[arg(long)]
    out: PathBuf,
    /// Per-round trajectory CSV output.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

#[derive(Args)]
struct ConstructArgs {
    /// Ensemble file to realize.
    #[arg(long)]
    ensemble: PathBuf,
    /// Number of variable nodes (codeword symbols).
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Matrix file output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Matrix file.
    #[arg(long)]
    matrix: PathBuf,
    /// Decoder: gallager-b or fft-qspa.
    #[arg(long)]
    decoder: String,
    /// Sweep: "ebn0:1.5,2.0,2.5" (dB) or "eps:0.01,0.02".
    #[arg(long)]
    sweep: String,
    #[arg(long, default_value_t = 30)]
    max_iter: usize,
    #[arg(long, default_value_t = 50)]
    min_word_errors: usize,
    #[arg(long, default_value_t = 1_000_000)]
    max_trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Encode seeded random messages instead of the all-zero word.
    #[arg(long)]
    random_codeword: bool,
    /// Worker threads (results are independent of this).
    #[arg(long)]
    workers: Option<usize>,
    /// Results CSV output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

/// Errors mapped to exit codes: usage/parse -> 2, domain/convergence -> 1.
enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    fn usage(e: impl ToString) -> Self {
        CliError::Usage(e.to_string())
    }
    fn domain(e: impl ToString) -> Self {
        CliError::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Design(args) => cmd_design(args),
        Command::Construct(args) => cmd_construct(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Tables(args) => cmd_tables(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

fn load_ensemble(
    path: &Path,
    q_override: Option<usize>,
) -> Result<(DegreeDistribution, usize, String), CliError> {
    let text = read_to_string(path)?;
    let (dd, q_file) = read_ensemble(&text).map_err(CliError::usage)?;
    Ok((dd, q_override.unwrap_or(q_file), text))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    if args.pt >= args.p0 {
        return Err(CliError::usage(format!(
            "target pt = {} must lie below p0 = {}",
            args.pt, args.p0
        )));
    }
    let mut manifest = RunManifest::new();
    manifest.push("p0", args.p0);
    manifest.push("pt", args.pt);

    let (chart, label, k_inputs) = match (&args.ensemble, &args.chart_poly) {
        (Some(path), None) => {
            let (dd, q, text) = load_ensemble(path, args.q)?;
            GField::new(q).map_err(CliError::usage)?;
            manifest.push_input_digest("ensemble", text.as_bytes());
            manifest.push("q", q);
            let r0 = match args.r0 {
                Some(r) => r,
                None => dd.rate().map_err(CliError::domain)?,
            };
            (Chart::Ensemble { dd: dd.clone(), p0: args.p0, q }, path.display().to_string(), Some((dd, q, r0)))
        }
        (None, Some(spec)) => {
            let coeffs: Vec<f64> = spec
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::usage(format!("bad --chart-poly: {e}")))?;
            if coeffs.is_empty() {
                return Err(CliError::usage("--chart-poly needs at least one coefficient"));
            }
            manifest.push("chart_poly", spec);
            (Chart::Polynomial(coeffs), "polynomial".to_string(), None)
        }
        _ => {
            return Err(CliError::usage("exactly one of --ensemble or --chart-poly is required"))
        }
    };

    let est = estimate_iterations(&chart, args.p0, args.pt).map_err(CliError::domain)?;
    let disc = count_iterations_discrete(&chart, args.p0, args.pt).map_err(CliError::domain)?;
    println!("chart {label}");
    println!("estimated_iterations {est:.4}");
    println!("discrete_iterations {disc}");
    match &k_inputs {
        Some((dd, q, r0)) => {
            let k = complexity_from_iterations(est, dd, *r0, *q);
            println!("complexity_per_info_bit {k:.4}");
            let thr = threshold(dd, *q, args.pt).map_err(CliError::domain)?;
            println!("threshold {thr:.6}");
        }
        None => {
            let thr = threshold_of_chart(&chart, args.pt).map_err(CliError::domain)?;
            println!("threshold {thr:.6}");
        }
    }

    if let Some(curve) = &args.curve {
        let mut out = manifest.header();
        out.push_str("p_in,f\n");
        let cells = 256;
        let (lo, hi) = (args.pt.ln(), args.p0.ln());
        for j in 0..=cells {
            let p = (lo + (hi - lo) * j as f64 / cells as f64).exp();
            let f = chart.eval(p).map_err(CliError::domain)?;
            out.push_str(&format!("{p},{f}\n"));
        }
        write_file(curve, &out)?;
    }
    Ok(())
}

fn cmd_design(args: DesignArgs) -> Result<(), CliError> {
    let (init, q, text) = load_ensemble(&args.init, args.q)?;
    let mut manifest = RunManifest::new();
    manifest.push_input_digest("init", text.as_bytes());
    manifest.push("seed", args.seed);

    let cfg = PctConfig {
        r0: args.r0,
        q,
        p0: args.p0,
        pt: args.pt,
        zeta1: args.zeta1,
        zeta2: args.zeta2,
        max_rounds: args.rounds,
        grid_size: args.grid,
        seed: args.seed,
    };
    let result = optimize(&init, &cfg).map_err(|e| match e {
        OptimizeError::BadConfig(_) => CliError::usage(e),
        OptimizeError::InfeasibleStart(ref report) => {
            CliError::domain(format!("{e}; constraint report: {report}"))
        }
        _ => CliError::domain(e),
    })?;

    println!("design_p0 {:.6}", result.design_p0);
    println!("rounds_used {}", result.rounds_used);
    println!("complexity_per_info_bit {:.4}", result.complexity);
    println!("estimated_iterations {:.4}", result.iterations);

    let mut out = manifest.header();
    out.push_str(&write_ensemble(&result.dd, q));
    write_file(&args.out, &out)?;

    if let Some(path) = &args.trajectory {
        let mut csv = manifest.header();
        csv.push_str("round,complexity,iterations,threshold\n");
        for point in &result.trajectory {
            let thr = threshold(&point.dd, q, args.pt)
                .map(|t| format!("{t:.6}"))
                .unwrap_or_else(|_| "nan".to_string());
            csv.push_str(&format!(
                "{},{},{},{}\n",
                point.round, point.complexity, point.iterations, thr
            ));
        }
        write_file(path, &csv)?;
    }
    Ok(())
}

fn cmd_construct(args: ConstructArgs) -> Result<(), CliError> {
    let (dd, q, text) = load_ensemble(&args.ensemble, None)?;
    let field = GField::new(q).map_err(CliError::usage)?;
    let mut manifest = RunManifest::new();
    manifest.push_input_digest("ensemble", text.as_bytes());
    manifest.push("n", args.n);
    manifest.push("seed", args.seed);

    let (vs, cs) = dd.realize_node_counts(args.n).map_err(CliError::domain)?;
    let h = peg_construct(&vs, &cs)
        .map_err(CliError::domain)?
        .assign_labels(&field, args.seed);

    println!("n {}", h.n());
    println!("m {}", h.m());
    println!("edges {}", h.edge_count());
    println!("girth {}", girth(&h));
    println!("design_rate {:.6}", 1.0 - h.m() as f64 / h.n() as f64);

    let mut out = manifest.header();
    out.push_str(&write_matrix(&h));
    write_file(&args.out, &out)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let text = read_to_string(&args.matrix)?;
    let h = read_matrix(&text).map_err(CliError::usage)?;
    let field = GField::new(h.q()).map_err(CliError::usage)?;

    let decoder = match args.decoder.as_str() {
        "gallager-b" => DecoderKind::GallagerB,
        "fft-qspa" => DecoderKind::FftQspa,
        other => return Err(CliError::usage(format!("unknown decoder {other:?}"))),
    };
    let sweep = parse_sweep(&args.sweep)?;

    let mut manifest = RunManifest::new();
    manifest.push_input_digest("matrix", text.as_bytes());
    manifest.push("seed", args.seed);

    let cfg = SimConfig {
        sweep,
        decoder,
        max_iter: args.max_iter,
        min_word_errors: args.min_word_errors,
        max_trials: args.max_trials,
        seed: args.seed,
        all_zero: !args.random_codeword,
    };
    let encoder = if args.random_codeword { Some(Encoder::new(&h, &field)) } else { None };

    let run = || run_sweep(&h, &field, &cfg, encoder.as_ref());
    let result = match args.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(CliError::usage)?;
            pool.install(run)
        }
        None => run(),
    }
    .map_err(CliError::domain)?;

    for p in &result.points {
        println!(
            "param {} ber {:.6e} wer {:.6e} trials {}",
            p.param, p.ber, p.wer, p.trials
        );
    }
    write_file(&args.out, &sweep_csv(&result, &cfg, &manifest.meta()))
}

fn parse_sweep(spec: &str) -> Result<ChannelSweep, CliError> {
    let (axis, rest) = spec
        .split_once(':')
        .ok_or_else(|| CliError::usage("sweep must look like \"ebn0:1.5,2.0\" or \"eps:0.01\""))?;
    let points: Vec<f64> = rest
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::usage(format!("bad sweep point: {e}")))?;
    if points.is_empty() {
        return Err(CliError::usage("sweep needs at least one point"));
    }
    match axis {
        "ebn0" => Ok(ChannelSweep::AwgnBpsk { ebn0_dbs: points }),
        "eps" => Ok(ChannelSweep::QSymmetric { epsilons: points }),
        other => Err(CliError::usage(format!("unknown sweep axis {other:?}"))),
    }
}

fn cmd_tables(args: TablesArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let manifest = RunManifest::new();

    // Iteration table: the published rows replayed from the full charts at
    // the recovered operating point, with the printed-polynomial figures as
    // companion columns.
    let mut csv = manifest.header();
    csv.push_str(
        "mean_var_degree,mean_chk_degree,estimated,actual,published_estimated,published_actual,poly_estimated,poly_actual\n",
    );
    for row in &ITERATION_TABLE {
        let dd = two_point_ensemble(row.mean_var_degree, row.mean_chk_degree)
            .ok_or_else(|| CliError::domain("two-point split failed"))?;
        let chart =
            Chart::Ensemble { dd, p0: ITERATION_TABLE_CHANNEL_P0, q: ITERATION_TABLE_Q };
        let est = estimate_iterations(&chart, 1e-2, 1e-6).map_err(CliError::domain)?;
        let disc = count_iterations_discrete(&chart, 1e-2, 1e-6).map_err(CliError::domain)?;
        let poly = Chart::Polynomial(row.polynomial.to_vec());
        let est_poly = estimate_iterations(&poly, 1e-2, 1e-6).map_err(CliError::domain)?;
        let disc_poly = count_iterations_discrete(&poly, 1e-2, 1e-6).map_err(CliError::domain)?;
        csv.push_str(&format!(
            "{},{},{est:.2},{disc},{},{},{est_poly:.2},{disc_poly}\n",
            row.mean_var_degree, row.mean_chk_degree, row.estimated, row.actual
        ));
        println!(
            "iterations ({}, {}): {est:.2} est / {disc} actual (published {} / {})",
            row.mean_var_degree, row.mean_chk_degree, row.estimated, row.actual
        );
    }
    write_file(&args.out_dir.join("iteration_table.csv"), &csv)?;

    let mut csv = manifest.header();
    csv.push_str("rate,min_mean_column_weight,published\n");
    let scan = nbldpc::optimizer::ValidityScan::default();
    for &(rate, published) in &MIN_COLUMN_WEIGHT_TABLE {
        let got = nbldpc::optimizer::min_valid_mean_column_weight(rate, 4, &scan)
            .ok_or_else(|| CliError::domain(format!("no valid weight below 5 at rate {rate}")))?;
        csv.push_str(&format!("{rate},{got:.3},{published}\n"));
        println!("min column weight at rate {rate:.4}: {got:.3} (published {published})");
    }
    write_file(&args.out_dir.join("min_column_weight_table.csv"), &csv)
}
