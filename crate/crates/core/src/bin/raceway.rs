use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use raceway_core::control::{ControllerSelection, DoMode, HdMode, PhMode, TempMode};
use raceway_core::evaluation::{comparison_table, summarize, CostWeights, RunSummary};
use raceway_core::io::export::{parse_summary, summary_text, SUMMARY_FILE};
use raceway_core::io::{
    emit_scenario, export_results, generate_synthetic_scenario, load_manifest, load_results, PreparedRun, RunManifest,
    SyntheticSpec,
};
use raceway_core::{Error, Result};

/// Raceway photobioreactor control benchmark.
///
/// Exit codes: 0 success, 2 configuration, 3 scenario, 4 controller, 5 integration,
/// 6 I/O, 7 evaluation.
#[derive(Parser)]
#[command(name = "raceway", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and export its results.
    Run(RunArgs),
    /// Recompute costs and KPIs from an exported run directory.
    Evaluate {
        dir: PathBuf,
        /// Fail with the evaluation exit code if the stored summary differs.
        #[arg(long)]
        check: bool,
    },
    /// Run several manifests and print a comparison normalized to the first.
    Compare {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        /// Export every run below this directory (one sub-directory per label).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic weather scenario.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run manifest; flags below override its fields.
    manifest: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    ph: Option<PhMode>,
    #[arg(long = "do")]
    do_: Option<DoMode>,
    #[arg(long)]
    hd: Option<HdMode>,
    #[arg(long)]
    temp: Option<TempMode>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    days: Option<f64>,
    /// Relative integrator tolerance; absolute tolerances scale with it.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    days: Option<u32>,
    #[arg(long)]
    peak_rad: Option<f64>,
    #[arg(long)]
    temp_mean: Option<f64>,
    #[arg(long)]
    temp_swing: Option<f64>,
    #[arg(long)]
    rh_mean: Option<f64>,
    #[arg(long)]
    wind_mean: Option<f64>,
    #[arg(long)]
    period: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn assets_dir() -> PathBuf {
    std::env::var_os("RACEWAY_ASSETS")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("assets"))
}

fn build_manifest(args: &RunArgs) -> Result<RunManifest> {
    let mut m = match &args.manifest {
        Some(p) => load_manifest(p)?,
        None => {
            let mut m = RunManifest::new(assets_dir().join("scenario_6d.csv"), ControllerSelection::PLAYER_1);
            m.label = "run".into();
            m
        }
    };
    if let Some(p) = &args.scenario {
        m.scenario = p.clone();
    }
    if let Some(p) = &args.params {
        m.params = Some(p.clone());
    }
    if let Some(v) = args.ph {
        m.controllers.ph = v;
    }
    if let Some(v) = args.do_ {
        m.controllers.do_ = v;
    }
    if let Some(v) = args.hd {
        m.controllers.hd = v;
    }
    if let Some(v) = args.temp {
        m.controllers.temp = v;
    }
    if let Some(p) = &args.out {
        m.output_dir = Some(p.clone());
    }
    if args.days.is_some() {
        m.days = args.days;
    }
    if let Some(tol) = args.tol {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
        }
        m.sim.integrator = m.sim.integrator.scaled(tol / m.sim.integrator.rel_tol);
    }
    if let Some(l) = &args.label {
        m.label = l.clone();
    }
    m.validate()?;
    Ok(m)
}

/// Runs one manifest, exports it when an output directory is known and returns its summary.
fn execute(manifest: RunManifest) -> Result<RunSummary> {
    let run = PreparedRun::load(manifest)?;
    let log = run.execute()?;
    let summary = run.summarize(&log)?;
    if let Some(dir) = &run.manifest.output_dir {
        export_results(&log, &summary, &run.params.geometry, dir)?;
    }
    Ok(summary)
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut m = build_manifest(&args)?;
    if m.output_dir.is_none() {
        let label = if m.label.is_empty() { "run" } else { &m.label };
        m.output_dir = Some(PathBuf::from("results").join(label));
    }
    let dir = m.output_dir.clone();
    let summary = execute(m)?;
    print!("{}", summary_text(&summary));
    if let Some(d) = dir {
        eprintln!("results written to {}", d.display());
    }
    Ok(())
}

fn cmd_evaluate(dir: &Path, check: bool) -> Result<()> {
    let (log, info) = load_results(dir)?;
    let summary = summarize(&info.label, &log, &info.geometry, &CostWeights::default())?;
    let text = summary_text(&summary);
    print!("{text}");
    if check {
        let path = dir.join(SUMMARY_FILE);
        let stored = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        if parse_summary(&stored)? != parse_summary(&text)? {
            return Err(Error::Evaluation(format!(
                "recomputed summary differs from {}",
                path.display()
            )));
        }
    }
    Ok(())
}

fn cmd_compare(paths: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let manifests = paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut m = load_manifest(p)?;
            if m.label.is_empty() {
                m.label = format!("run{}", i + 1);
            }
            m.output_dir = out.map(|d| d.join(&m.label));
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let summaries = std::thread::scope(|s| {
        let handles: Vec<_> = manifests.into_iter().map(|m| s.spawn(move || execute(m))).collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::Evaluation("a run panicked".into())))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let table = comparison_table(&summaries)?;
    println!("{table}");
    if let Some(d) = out {
        let path = d.join("comparison.txt");
        fs::write(&path, &table).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let mut spec = SyntheticSpec::default();
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = args.$f { spec.$f = v; })* };
    }
    set!(days, peak_rad, temp_mean, temp_swing, rh_mean, wind_mean, period, seed);
    let file = generate_synthetic_scenario(&spec)?;
    fs::write(&args.out, emit_scenario(&file)).map_err(|e| Error::io(&args.out, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Evaluate { dir, check } => cmd_evaluate(&dir, check),
        Command::Compare { manifests, out } => cmd_compare(&manifests, out.as_deref()),
        Command::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
