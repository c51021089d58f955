use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nerve_recon::complex::build_cech_nerve_capped;
use nerve_recon::harness::{Experiment, ExperimentConfig, HarnessError};
use nerve_recon::homology::homology;
use nerve_recon::io::{read_complex, read_points, write_complex, write_map, write_nerve, write_points};
use nerve_recon::SimplicialComplex;

#[derive(Parser, Debug)]
#[command(name = "nerve-recon", version, about = "Reconstruct manifolds and maps from samples via Čech nerves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; `validate` prints plain text unless this is given.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the sample bounds, radius windows and matching radius.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Draw the samples of one trial.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Build a Čech nerve from a config sample or a points file.
    Nerve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        dmax: Option<usize>,
    },
    /// Integer homology of a complex file, a points file or a config sample.
    Homology {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        complex: Option<PathBuf>,
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        dmax: Option<usize>,
    },
    /// Run the full pipeline once and write every intermediate object.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Run the Monte Carlo experiment.
    Experiment {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
        /// Exit with status 2 when more trials than this fail.
        #[arg(long)]
        max_fail: Option<usize>,
    },
    /// Print the hypothesis report; exits 1 if any check fails.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
enum CliError {
    /// Invalid input or usage: exit 1.
    Usage(String),
    /// Too many failed trials: exit 2.
    TooManyFailures(String),
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn load_config(common: &Common) -> Result<ExperimentConfig, CliError> {
    let path = common.config.as_ref().ok_or_else(|| usage("--config is required"))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = common.seed {
        cfg.scenario.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(common: &Common) -> Result<&Path, CliError> {
    common.out.as_deref().ok_or_else(|| usage("--out is required"))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(usage)?;
    }
    std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

/// Runs validation regardless of outcome so values can be shown.
fn forced_experiment(common: &Common) -> Result<Experiment, CliError> {
    let mut cfg = load_config(common)?;
    cfg.scenario.override_validation = true;
    Ok(Experiment::new(cfg)?)
}

fn points_nerve(
    common: &Common,
    points: &Option<PathBuf>,
    epsilon: Option<f64>,
    dmax: Option<usize>,
) -> Result<(nerve_recon::CechNerve, usize), CliError> {
    if let Some(path) = points {
        let cloud = read_points(&read(path)?).map_err(usage)?;
        let eps = epsilon.ok_or_else(|| usage("--epsilon is required with --points"))?;
        let d = dmax.unwrap_or(2);
        let nerve = build_cech_nerve_capped(&cloud, eps, d, nerve_recon::complex::DEFAULT_SIMPLEX_CAP).map_err(usage)?;
        return Ok((nerve, d));
    }
    let exp = forced_experiment(common)?;
    let (x, _) = exp.samples(0)?;
    let eps = epsilon.unwrap_or(exp.plan.eps_x);
    let d = dmax.unwrap_or(exp.plan.d_max_x);
    let nerve = build_cech_nerve_capped(&x, eps, d, exp.config.scenario.simplex_cap).map_err(usage)?;
    Ok((nerve, d))
}

fn print_homology(k: &SimplicialComplex, up_to: usize) -> Result<(), CliError> {
    let h = homology(k, up_to).map_err(usage)?;
    println!("{}", json(&h.summary()));
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bounds { common } => {
            let exp = forced_experiment(&common)?;
            match common.format.unwrap_or(Format::Json) {
                Format::Json => println!("{}", json(&exp.plan.bounds)),
                Format::Csv => {
                    println!("name,value");
                    for (k, v) in &exp.plan.bounds {
                        println!("{k},{v}");
                    }
                }
            }
        }
        Command::Sample { common, trial } => {
            let exp = forced_experiment(&common)?;
            let (x, y) = exp.samples(trial)?;
            let dir = out_dir(&common)?;
            write(&dir.join("x.pts"), &write_points(&x))?;
            if let Some(y) = &y {
                write(&dir.join("y.pts"), &write_points(y))?;
            }
        }
        Command::Nerve { common, points, epsilon, dmax } => {
            let (nerve, _) = points_nerve(&common, &points, epsilon, dmax)?;
            let text = write_nerve(&nerve);
            match &common.out {
                Some(dir) => write(&dir.join("nerve.cx"), &text)?,
                None => print!("{text}"),
            }
        }
        Command::Homology { common, complex, points, epsilon, dmax } => match complex {
            Some(path) => {
                let (k, _) = read_complex(&read(&path)?).map_err(usage)?;
                print_homology(&k, k.d_max().saturating_sub(1))?;
            }
            None => {
                let (nerve, d) = points_nerve(&common, &points, epsilon, dmax)?;
                print_homology(&nerve.complex, d - 1)?;
            }
        },
        Command::Reconstruct { common, trial } => {
            let exp = Experiment::new(load_config(&common)?)?;
            let dir = out_dir(&common)?;
            let (outcome, art) = exp.run_trial_detailed(trial, true);
            if let Some(x) = &art.x {
                write(&dir.join("x.pts"), &write_points(x))?;
            }
            if let Some(y) = &art.y {
                write(&dir.join("y.pts"), &write_points(y))?;
            }
            if let Some(n) = &art.nerve_x {
                write(&dir.join("x.cx"), &write_nerve(n))?;
            }
            if let Some(n) = &art.nerve_y {
                write(&dir.join("y.cx"), &write_complex(&n.complex, n.epsilon))?;
            }
            if let Some(r) = &art.reconstruction {
                write(&dir.join("phi.map"), &write_map(&r.map, "x.cx", "y.cx"))?;
            }
            write(&dir.join("outcome.json"), &json(&outcome))?;
            println!("{}", if outcome.success { "success" } else { "failure" });
            if let Some(reason) = &outcome.failure {
                println!("reason: {reason}");
            }
        }
        Command::Experiment { common, trials, max_fail } => {
            let mut cfg = load_config(&common)?;
            if let Some(t) = trials {
                cfg.scenario.trials = t;
            }
            let exp = Experiment::new(cfg)?;
            let report = exp.run()?;
            if let Some(dir) = common.out.as_deref().or(exp.config.output.dir.as_deref()) {
                report.write(dir)?;
                if exp.config.output.plot {
                    exp.write_plots(dir)?;
                }
            } else {
                match common.format.unwrap_or(Format::Json) {
                    Format::Json => println!("{}", report.to_json()),
                    Format::Csv => print!("{}", report.to_csv()),
                }
            }
            eprintln!("{}", report.summary());
            if let Some(limit) = max_fail {
                if report.failures() > limit {
                    return Err(CliError::TooManyFailures(format!(
                        "{} failed trials exceed --max-fail {limit}",
                        report.failures()
                    )));
                }
            }
        }
        Command::Validate { common } => {
            let exp = forced_experiment(&common)?;
            let report = &exp.plan.validation;
            match common.format {
                Some(Format::Json) => println!("{}", json(report)),
                Some(Format::Csv) => {
                    println!("hypothesis,description,lhs,relation,rhs,passed");
                    for c in &report.checks {
                        let rel = serde_json::to_value(c.relation).expect("serializable");
                        println!(
                            "{},\"{}\",{},{},{},{}",
                            c.hypothesis,
                            c.description,
                            c.lhs,
                            rel.as_str().unwrap_or("?"),
                            c.rhs,
                            c.passed
                        );
                    }
                }
                None => print!("{report}"),
            }
            if !report.passed() {
                return Err(usage("hypotheses not satisfied"));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::TooManyFailures(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
