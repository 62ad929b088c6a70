//! `mimo-energy`: theory reports, Monte-Carlo ensembles, planning tables and
//! the acceptance suite from the command line.
//!
//! Exit status is 0 on success, 1 when a run or a validation check fails
//! and 2 for configuration errors.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use mimo_energy::asymptotics::SchemeKind;
use mimo_energy::config::ConfigFile;
use mimo_energy::geometry::write_trajectories_csv;
use mimo_energy::report::{plan_tables, theory_report, write_battery_csv, write_radius_csv, write_theory_csv, REPORT_SCHEMES};
use mimo_energy::simkit::{
    compare_outage, default_grid, run_ensemble, theory_law, trial_trajectories, write_ccdf_csv, write_results_csv,
    ExperimentConfig, RunSummary, SimMode,
};
use mimo_energy::validation::{exact_reference_cell, ValidationOptions, CRITERIA};
use mimo_energy::Error;

#[derive(Parser)]
#[command(name = "mimo-energy", version, about = "Energy statistics of MU-MIMO downlinks with mobile users")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean and variance of the consumed energy for each scheme.
    Theory(Common),
    /// Monte-Carlo ensemble of the consumed energy.
    Simulate(Common),
    /// Battery levels over a rate grid and optimal cell radius over a user grid.
    Plan(Common),
    /// Run the acceptance suite.
    Validate(ValidateArgs),
    /// Dump walker positions per slot.
    Trajectories(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment file; defaults to the reference scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// exact | fast
    #[arg(long)]
    mode: Option<String>,
    /// olp | mrt | zf | rzf | rzf-classical
    #[arg(long)]
    scheme: Option<String>,
    /// Minimum number of terms of the Theta series.
    #[arg(long)]
    terms: Option<usize>,
    /// Uniform CSI error in [0, 1).
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Also run the EXACT-mode reference ensemble with this many trials.
    #[arg(long)]
    exact_trials: Option<u64>,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Run(String),
    Checks(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Config(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(format!("i/o error: {e}"))
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Serialize)]
struct OutputFile {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    config_digest: String,
    started_unix_s: u64,
    finished_unix_s: u64,
    outputs: Vec<OutputFile>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Collects output files and writes `manifest.json` next to them.
struct Outputs {
    dir: PathBuf,
    subcommand: &'static str,
    digest: String,
    started: u64,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path, subcommand: &'static str, digest: String) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            subcommand,
            digest,
            started: now(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> io::Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }

    fn finish(self) -> io::Result<()> {
        let outputs = self
            .files
            .iter()
            .map(|p| {
                Ok(OutputFile {
                    path: p.display().to_string(),
                    sha256: hex::encode(Sha256::digest(fs::read(p)?)),
                })
            })
            .collect::<io::Result<Vec<_>>>()?;
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            config_digest: self.digest,
            started_unix_s: self.started,
            finished_unix_s: now(),
            outputs,
        };
        let mut w = BufWriter::new(File::create(self.dir.join("manifest.json"))?);
        serde_json::to_writer_pretty(&mut w, &manifest)?;
        writeln!(w)?;
        w.flush()
    }
}

fn load(args: &Common) -> Result<(ConfigFile, ExperimentConfig), Failure> {
    let mut file = match &args.config {
        Some(p) => ConfigFile::read(p)?,
        None => ConfigFile::default(),
    };
    if let Some(s) = args.seed {
        file.simulation.seed = s;
    }
    if let Some(t) = args.trials {
        file.simulation.trials = t;
    }
    if let Some(m) = &args.mode {
        file.simulation.mode = m.parse::<SimMode>()?.name().into();
    }
    if let Some(s) = &args.scheme {
        file.system.scheme = s.parse::<SchemeKind>()?.name().into();
    }
    if let Some(t) = args.terms {
        file.simulation.theta_terms = t;
    }
    if let Some(t) = args.tau {
        file.system.tau = t;
    }
    let cfg = file.experiment()?;
    Ok((file, cfg))
}

fn cmd_theory(args: &Common) -> CmdResult {
    let (_, cfg) = load(args)?;
    let schemes: Vec<SchemeKind> = if args.scheme.is_some() {
        vec![cfg.scheme]
    } else {
        let mut v = vec![cfg.scheme];
        v.extend(REPORT_SCHEMES.iter().filter(|s| **s != cfg.scheme));
        v.retain(|s| *s != SchemeKind::RzfClassical);
        v
    };
    let report = theory_report(&cfg, &schemes)?;
    let mut out = Outputs::new(&args.out_dir, "theory", cfg.digest())?;
    out.json("theory.json", &report)?;
    out.write("theory.csv", |w| write_theory_csv(w, &report))?;
    out.finish()?;
    for r in &report.schemes {
        let e = &r.energy;
        println!(
            "{:<16} eta {:.4}  eps {:.1} J ({:.3} Wh)  sd {:.1} J",
            e.scheme, e.eta, e.epsilon_j, e.epsilon_wh, e.std_dev_j
        );
    }
    Ok(())
}

fn cmd_simulate(args: &Common) -> CmdResult {
    let (_, cfg) = load(args)?;
    let stats = run_ensemble(&cfg)?;
    let summary = RunSummary::new(&cfg, &stats);
    let mut out = Outputs::new(&args.out_dir, "simulate", cfg.digest())?;
    out.write("results.csv", |w| write_results_csv(w, &stats.energies))?;
    out.json("summary.json", &summary)?;
    if cfg.scheme != SchemeKind::RzfClassical && stats.epsilon_j.is_some() {
        let law = theory_law(&cfg)?.law;
        let rows = compare_outage(&stats, &law, &default_grid(&stats, 200));
        out.write("ccdf.csv", |w| write_ccdf_csv(w, &rows))?;
    }
    out.finish()?;
    println!(
        "{} {} K={} trials={}: mean {:.1} J, var {:.4e} J^2",
        cfg.mode, cfg.scheme, cfg.users, stats.energies.len(), stats.mean_j, stats.variance_j2
    );
    if let (Some(m), Some(v)) = (stats.ratio_mean, stats.ratio_var) {
        println!("ratio_mean {m:.4}  ratio_var {v:.4}  ks {:.4}", stats.ks_stat.unwrap_or(f64::NAN));
    }
    Ok(())
}

fn cmd_plan(args: &Common) -> CmdResult {
    let (file, cfg) = load(args)?;
    let plan = file.plan_settings()?;
    let tables = plan_tables(&cfg, &plan)?;
    let mut out = Outputs::new(&args.out_dir, "plan", cfg.digest())?;
    out.write("battery.csv", |w| write_battery_csv(w, &tables.battery))?;
    out.write("radius.csv", |w| write_radius_csv(w, &tables.radius))?;
    out.json("plan.json", &tables)?;
    out.finish()?;
    for s in &tables.skipped {
        eprintln!("skipped {} K={} r={}: {}", s.scheme, s.users, s.rate, s.reason);
    }
    println!("{} battery rows, {} radius rows", tables.battery.len(), tables.radius.len());
    Ok(())
}

fn cmd_trajectories(args: &Common) -> CmdResult {
    let (_, mut cfg) = load(args)?;
    cfg.trials = args.trials.unwrap_or(1);
    let mut out = Outputs::new(&args.out_dir, "trajectories", cfg.digest())?;
    let mut err = None;
    out.write("trajectories.csv", |w| {
        for trial in 0..cfg.trials {
            match trial_trajectories(&cfg, trial) {
                Ok(t) => write_trajectories_csv(w, trial, &t, trial == 0)?,
                Err(e) => {
                    err = Some(e);
                    break;
                }
            }
        }
        Ok(())
    })?;
    if let Some(e) = err {
        return Err(e.into());
    }
    out.finish()?;
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> CmdResult {
    let mut opts = ValidationOptions::default();
    if let Some(s) = args.seed {
        opts.seed = s;
    }
    if let Some(t) = args.trials {
        opts.trials = t;
    }
    let mut reports = Vec::new();
    for f in CRITERIA {
        let r = f(&opts)?;
        println!("{r}");
        reports.push(r);
    }
    if let Some(t) = args.exact_trials {
        opts.exact_trials = t;
        let r = exact_reference_cell(&opts)?;
        println!("{r}");
        reports.push(r);
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let digest = hex::encode(Sha256::digest(serde_json::to_vec(&opts).expect("options serialize")));
    let mut out = Outputs::new(&args.out_dir, "validate", digest)?;
    out.json("validation.json", &reports)?;
    out.finish()?;
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Theory(a) => cmd_theory(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Plan(a) => cmd_plan(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Trajectories(a) => cmd_trajectories(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Checks(n)) => {
            eprintln!("{n} criteria failed");
            ExitCode::from(1)
        }
    }
}
