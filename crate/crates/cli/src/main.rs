use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use entwit::bounds::{concurrence_lower_bound, family_bounds_numeric, BoundOptions, BoundReport, FamilySweepRow};
use entwit::criteria::{build_witness, evaluate_criteria_with, CriteriaVerdict, MinimizeBudget, WitnessForm};
use entwit::io::read_state;
use entwit::matkit::hermitian_spectrum;
use entwit::oracle::{cluster_eigenvalues, CLUSTER_TOL};
use entwit::spinspace::CoupledSpinSystem;
use entwit::states::{family_state, random_density, seeded_rng};
use entwit::verify::{run_suite, Suite, VerifyConfig};

/// Entanglement witness, separability criteria and entanglement bounds for
/// two coupled spins.
#[derive(Parser)]
#[command(name = "entwit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Witness,
    #[value(name = "appendixA", alias = "appendix-a")]
    AppendixA,
    #[value(name = "appendixB", alias = "appendix-b")]
    AppendixB,
    Figures,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Lifted,
    Swap,
    Spectral,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the family ρ(λ) and emit every criterion and bound per λ.
    Family {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Criteria and lower bounds for a state read from a JSON file.
    Bounds {
        state: PathBuf,
        /// Also minimize the witness over local unitary twists.
        #[arg(long)]
        optimize: bool,
        #[arg(long, default_value_t = MinimizeBudget::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = MinimizeBudget::DEFAULT_ITERATIONS)]
        iterations: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check the numeric pipeline against closed-form results.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Override every per-check tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Evaluate the three criteria on random density matrices.
    Survey {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long)]
        samples: usize,
        /// Rank of the sampled states (defaults to full rank N²).
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Append ρ(λ) for λ = 0.05, 0.06, ..., 0.09.
        #[arg(long)]
        include_family: bool,
    },
    /// Print the spectrum of W, and optionally its matrix.
    Witness {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, value_enum, default_value_t = FormArg::Swap)]
        form: FormArg,
        #[arg(long)]
        matrix: bool,
    },
}

/// Failure of a verification suite, reported with its own exit code.
struct VerificationFailed;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(VerificationFailed)) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<std::result::Result<(), VerificationFailed>> {
    match cli.command {
        Command::Family { n, lambda_min, lambda_max, steps, out, format } => {
            cmd_family(n, lambda_min, lambda_max, steps, out.as_deref(), format)?
        }
        Command::Bounds { state, optimize, restarts, iterations, seed } => {
            cmd_bounds(&state, optimize, restarts, iterations, seed)?
        }
        Command::Verify { suite, n, samples, seed, tol } => return cmd_verify(suite, n, samples, seed, tol),
        Command::Survey { n, samples, rank, seed, out, format, include_family } => {
            cmd_survey(n, samples, rank, seed, out.as_deref(), format, include_family)?
        }
        Command::Witness { n, form, matrix } => cmd_witness(n, form, matrix)?,
    }
    Ok(Ok(()))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot write {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Shortest representation that parses back to the same double.
fn num(x: f64) -> String {
    format!("{x}")
}

fn write_csv(out: Box<dyn Write>, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(mut out: Box<dyn Write>, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_family(n: usize, min: f64, max: f64, steps: usize, out: Option<&Path>, format: Format) -> Result<()> {
    if steps < 2 {
        bail!("--steps must be at least 2");
    }
    if !(0.0..=1.0).contains(&min) || !(0.0..=1.0).contains(&max) || min > max {
        bail!("need 0 <= lambda-min <= lambda-max <= 1");
    }
    let sys = CoupledSpinSystem::shared(n)?;
    let rows: Vec<FamilySweepRow> = (0..steps)
        .into_par_iter()
        .map(|i| {
            let l = if i == steps - 1 { max } else { min + (max - min) * i as f64 / (steps - 1) as f64 };
            family_bounds_numeric(&sys, l)
        })
        .collect::<entwit::Result<_>>()?;
    let w = open_output(out)?;
    match format {
        Format::Csv => write_csv(w, &FamilySweepRow::HEADER, rows.iter().map(|r| r.values().map(num).to_vec())),
        Format::Json => write_json(w, &rows),
    }
}

#[derive(Serialize)]
struct BoundsOutput {
    #[serde(flatten)]
    report: BoundReport,
    #[serde(flatten)]
    verdict: CriteriaVerdict,
}

fn cmd_bounds(path: &Path, optimize: bool, restarts: usize, iterations: usize, seed: Option<u64>) -> Result<()> {
    let state = read_state(path)?;
    let sys = CoupledSpinSystem::shared(state.n_local())?;
    let rho = state.density();
    let options = if optimize {
        let Some(seed) = seed else { bail!("--optimize needs an explicit --seed") };
        BoundOptions { optimize: Some(MinimizeBudget { restarts, iterations, seed }) }
    } else {
        BoundOptions::default()
    };
    let report = concurrence_lower_bound(&rho, &sys, &options)?;
    let w = build_witness(&sys, WitnessForm::Swap)?;
    let verdict = evaluate_criteria_with(rho.matrix(), &sys, &w)?;
    write_json(open_output(None)?, &BoundsOutput { report, verdict })
}

fn cmd_verify(
    suite: SuiteArg,
    n: usize,
    samples: usize,
    seed: Option<u64>,
    tol: Option<f64>,
) -> Result<std::result::Result<(), VerificationFailed>> {
    let suite = match suite {
        SuiteArg::Witness => Suite::Witness,
        SuiteArg::AppendixA => Suite::AppendixA,
        SuiteArg::AppendixB => Suite::AppendixB,
        SuiteArg::Figures => Suite::Figures,
        SuiteArg::All => Suite::All,
    };
    if suite.needs_seed() && seed.is_none() {
        bail!("this suite samples random states; pass --seed");
    }
    let checks = run_suite(suite, &VerifyConfig { n, samples, seed, tol })?;
    let mut failed = 0;
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag}  {}  max_error={:e}  tol={:e}", c.name, c.max_error, c.tolerance);
        failed += usize::from(!c.passed);
    }
    println!("{} checks, {} failed", checks.len(), failed);
    Ok(if failed == 0 { Ok(()) } else { Err(VerificationFailed) })
}

#[derive(Serialize)]
struct SurveyRow {
    index: usize,
    source: &'static str,
    #[serde(flatten)]
    verdict: CriteriaVerdict,
}

const SURVEY_HEADER: [&str; 8] = [
    "index",
    "source",
    "ppt_violated",
    "realignment_violated",
    "witness_value",
    "witness_detects",
    "trace_norm_t2",
    "trace_norm_r",
];

const FAMILY_PROBES: [f64; 5] = [0.05, 0.06, 0.07, 0.08, 0.09];

#[allow(clippy::too_many_arguments)]
fn cmd_survey(
    n: usize,
    samples: usize,
    rank: Option<usize>,
    seed: Option<u64>,
    out: Option<&Path>,
    format: Format,
    include_family: bool,
) -> Result<()> {
    if samples == 0 {
        bail!("--samples must be at least 1");
    }
    let Some(seed) = seed else { bail!("survey samples random states; pass --seed") };
    let sys = CoupledSpinSystem::shared(n)?;
    let rank = rank.unwrap_or(n * n);
    if rank == 0 || rank > n * n {
        bail!("--rank must lie in 1..={}", n * n);
    }
    let w = build_witness(&sys, WitnessForm::Swap)?;
    let mut rows: Vec<SurveyRow> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(seed, i as u64);
            let rho = random_density(n, rank, &mut rng)?;
            let verdict = evaluate_criteria_with(rho.matrix(), &sys, &w)?;
            Ok(SurveyRow { index: i, source: "random", verdict })
        })
        .collect::<entwit::Result<_>>()?;
    if include_family {
        for (k, &l) in FAMILY_PROBES.iter().enumerate() {
            let rho = family_state(&sys, l)?;
            let verdict = evaluate_criteria_with(rho.matrix(), &sys, &w)?;
            rows.push(SurveyRow { index: samples + k, source: "family", verdict });
        }
    }

    let summary = format!(
        "states={} ppt={} realignment={} witness={} witness_only={} any={}",
        rows.len(),
        rows.iter().filter(|r| r.verdict.ppt_violated).count(),
        rows.iter().filter(|r| r.verdict.realignment_violated).count(),
        rows.iter().filter(|r| r.verdict.witness_detects).count(),
        rows.iter().filter(|r| r.verdict.witness_only()).count(),
        rows.iter().filter(|r| r.verdict.any_detects()).count(),
    );

    let sink = open_output(out)?;
    match format {
        Format::Csv => write_csv(
            sink,
            &SURVEY_HEADER,
            rows.iter().map(|r| {
                let v = &r.verdict;
                vec![
                    r.index.to_string(),
                    r.source.to_string(),
                    v.ppt_violated.to_string(),
                    v.realignment_violated.to_string(),
                    num(v.witness_value),
                    v.witness_detects.to_string(),
                    num(v.trace_norm_t2),
                    num(v.trace_norm_r),
                ]
            }),
        )?,
        Format::Json => write_json(sink, &rows)?,
    }
    // keep standard output clean when it carries the table
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn cmd_witness(n: usize, form: FormArg, show_matrix: bool) -> Result<()> {
    let sys = CoupledSpinSystem::shared(n)?;
    let form = match form {
        FormArg::Lifted => WitnessForm::Lifted,
        FormArg::Swap => WitnessForm::Swap,
        FormArg::Spectral => WitnessForm::Spectral,
    };
    let w = build_witness(&sys, form)?;
    let spec = hermitian_spectrum(w.matrix())?;
    let mut out = io::stdout().lock();
    writeln!(out, "eigenvalue,multiplicity")?;
    for (v, m) in cluster_eigenvalues(&spec.values, CLUSTER_TOL) {
        // clusters are exact up to roundoff; print the nearest representable tidy value
        let v = if v.abs() < CLUSTER_TOL { 0.0 } else { v };
        writeln!(out, "{},{m}", num((v * 1e9).round() / 1e9))?;
    }
    if show_matrix {
        writeln!(out)?;
        let m = w.matrix();
        for r in 0..m.rows() {
            let row: Vec<String> = (0..m.cols())
                .map(|c| {
                    let z = m.get(r, c);
                    format!("{}{:+}i", num(z.re), z.im)
                })
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
    }
    Ok(())
}
