use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ecf_robust::refinement::{oblivious_estimate, ObliviousScenario};
use ecf_robust::{choose_radius, estimate_mean, InnerSolverConfig64, Norm, NormPair, OuterSolverConfig64, SampleSet64};
use ecf_bench::output::{emit, Format};
use ecf_bench::rates::{fit_rates, summarize};
use ecf_bench::runner::{coverage, run_experiment, RunOptions};
use ecf_bench::verify::{run_all, VerifyConfig};
use ecf_bench::{BenchError, ExperimentConfig, Result};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "ecf-bench", version, about = "Robust mean estimation via the empirical characteristic function")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Override the seed (base_seed for experiments).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Zero runtime_ms so repeated runs are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker threads for trials.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L2,
    L1,
    Linf,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Norm {
        match n {
            NormArg::L2 => Norm::L2,
            NormArg::L1 => Norm::L1,
            NormArg::Linf => Norm::Linf,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the mean of one dataset (CSV, one sample per row).
    Estimate {
        data: PathBuf,
        /// Skip the first line.
        #[arg(long)]
        header: bool,
        /// Use this radius directly.
        #[arg(long, conflicts_with = "eps")]
        radius: Option<f64>,
        /// Target accuracy; the radius is tuned from it and --delta.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = NormArg::L2)]
        norm: NormArg,
    },
    /// Run a Monte Carlo experiment and write one record per trial and estimator.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
    },
    /// Median and 95% error per sample size with a log-log slope per estimator.
    Rates {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the randomized theory suites.
    Verify {
        /// Reduced case counts.
        #[arg(long)]
        quick: bool,
    },
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_rows<S: Serialize>(out: Box<dyn Write>, rows: &[S], header: &[&str], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(header)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut out = out;
            for r in rows {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

fn read_dataset(path: &Path, header: bool) -> Result<SampleSet64> {
    let file = File::open(path)?;
    let mut rd = csv::ReaderBuilder::new().has_headers(header).trim(csv::Trim::All).from_reader(file);
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| BenchError::config(format!("{}:{}", path.display(), i + 1 + usize::from(header)), e.to_string()))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(BenchError::config(path.display().to_string(), "dataset has no rows"));
    }
    SampleSet64::from_rows(&rows).map_err(|e| BenchError::config(path.display().to_string(), e.to_string()))
}

#[derive(Serialize)]
struct EstimateReport {
    mu_hat: Vec<f64>,
    method: &'static str,
    radius: Option<f64>,
    eps: Option<f64>,
    objective_value: Option<f64>,
    converged: bool,
}

fn run(cli: Cli) -> Result<bool> {
    let c = &cli.common;
    let opts = RunOptions {
        deterministic: c.deterministic,
        jobs: c.jobs,
    };
    let load = |path: &Path| -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(s) = c.seed {
            cfg.base_seed = s;
        }
        Ok(cfg)
    };
    match &cli.cmd {
        Command::Estimate {
            data,
            header,
            radius,
            eps,
            delta,
            norm,
        } => {
            let s = read_dataset(data, *header)?;
            let norm = NormPair::new((*norm).into());
            let (inner, outer) = (InnerSolverConfig64::default(), OuterSolverConfig64::default());
            let radius = match (radius, eps) {
                (Some(r), _) => Some(*r),
                (None, Some(e)) => Some(choose_radius(*e, *delta, s.n())?),
                (None, None) => None,
            };
            let report = match radius {
                Some(r) => {
                    let out = estimate_mean(&s, r, norm, &inner, &outer)?;
                    EstimateReport {
                        mu_hat: out.mu_hat,
                        method: "ecf",
                        radius: Some(r),
                        eps: *eps,
                        objective_value: Some(out.objective_value),
                        converged: out.converged,
                    }
                }
                None => {
                    let out = oblivious_estimate(&s, *delta, norm, &inner, &outer, None)?;
                    let bracketed = matches!(out.scenario, ObliviousScenario::Bracketed { .. });
                    EstimateReport {
                        mu_hat: out.mu_hat,
                        method: "ecf_oblivious",
                        radius: bracketed.then(|| choose_radius(out.eps0, *delta, s.n())).transpose()?,
                        eps: Some(out.eps0),
                        objective_value: None,
                        converged: true,
                    }
                }
            };
            let mut w = open_out(c.out.as_deref())?;
            serde_json::to_writer(&mut w, &report)?;
            w.write_all(b"\n")?;
            w.flush()?;
            Ok(true)
        }
        Command::Benchmark { config } => {
            let cfg = load(config)?;
            let report = run_experiment(&cfg, opts)?;
            emit(open_out(c.out.as_deref())?, &report.records, c.format)?;
            for (n, id, frac) in coverage(&report) {
                eprintln!("coverage n={n} {id}: {frac:.3}");
            }
            Ok(true)
        }
        Command::Rates { config } => {
            let cfg = load(config)?;
            let report = run_experiment(&cfg, opts)?;
            let rows = summarize(&report.records);
            let fits = fit_rates(&rows)?;
            #[derive(Serialize)]
            struct Row {
                estimator_id: String,
                n: usize,
                median_error: f64,
                q95_error: f64,
                slope: f64,
            }
            let table: Vec<Row> = rows
                .iter()
                .map(|r| Row {
                    estimator_id: r.estimator_id.to_string(),
                    n: r.n,
                    median_error: r.median_error,
                    q95_error: r.q95_error,
                    slope: fits.iter().find(|f| f.estimator_id == r.estimator_id).map_or(f64::NAN, |f| f.slope),
                })
                .collect();
            let header = ["estimator_id", "n", "median_error", "q95_error", "slope"];
            write_rows(open_out(c.out.as_deref())?, &table, &header, c.format)?;
            Ok(true)
        }
        Command::Verify { quick } => {
            let mut vc = VerifyConfig {
                seed: c.seed.unwrap_or(0),
                ..VerifyConfig::default()
            };
            if *quick {
                vc.sin_cases = 10_000;
                vc.conjugate_cases = 100;
                vc.deviation_trials = 50;
            }
            let suites = run_all(&vc)?;
            let header = [
                "name",
                "cases",
                "violations",
                "worst",
                "pass_rate",
                "required_rate",
                "runtime_ms",
            ];
            let mut suites = suites;
            if c.deterministic {
                suites.iter_mut().for_each(|s| s.runtime_ms = 0.0);
            }
            write_rows(open_out(c.out.as_deref())?, &suites, &header, c.format)?;
            let ok = suites.iter().all(|s| s.passed());
            for s in suites.iter().filter(|s| !s.passed()) {
                eprintln!("suite {} failed: pass rate {:.4} < {}", s.name, s.pass_rate, s.required_rate);
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
