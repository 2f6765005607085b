use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rockrelax::experiments::{
    config_from_settings, gamma_schedule_study, gamma_table, metrics_table, parse_config_text,
    run_example, standard_gamma_schedule, theta_sweep, Example, ExperimentConfig, MetricsReport,
};
use rockrelax::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rockrelax",
    version,
    about = "Rockafellian relaxation experiments for corrupted stochastic optimal control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// True, corrupted and relaxed solves for one configuration.
    Run(Common),
    /// One relaxed solve per theta, sharing the true and corrupted solves.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated theta values.
        #[arg(long, value_delimiter = ',', required = true)]
        thetas: Vec<f64>,
    },
    /// Distance to the uncorrupted minimizer along an (eps, theta) schedule (ex1).
    Gamma {
        #[command(flatten)]
        common: Common,
        /// `eps:theta` pairs separated by commas, or `standard:K` for
        /// eps_k = 2^-k, theta_k = eps_k^(-1/2), k = 1..K.
        #[arg(long, default_value = "standard:6")]
        schedule: String,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    example: Option<Example>,
    #[arg(long)]
    corruption: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the CSV outputs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Exit with status 3 if any solve stops short of its tolerance.
    #[arg(long)]
    strict: bool,
}

impl Common {
    fn build(&self) -> Result<ExperimentConfig, Error> {
        let settings = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => Default::default(),
        };
        let example = match (self.example, settings.contains_key("example")) {
            (Some(e), _) => Some(e),
            (None, true) => None,
            (None, false) => {
                return Err(Error::Config(
                    "--example is required (or set it in --config)".into(),
                ))
            }
        };
        let mut cfg = config_from_settings(&settings, example)?;
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects key=value, got '{kv}'")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(c) = self.corruption {
            cfg.corruption = c;
        }
        if let Some(t) = self.theta {
            cfg.theta = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_schedule(s: &str) -> Result<Vec<(f64, f64)>, Error> {
    let bad = || Error::Config(format!("bad schedule '{s}'"));
    if let Some(k) = s.strip_prefix("standard:") {
        let k: usize = k.trim().parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        return Ok(standard_gamma_schedule(k));
    }
    s.split(',')
        .map(|pair| {
            let (e, t) = pair.split_once(':').ok_or_else(bad)?;
            Ok((
                e.trim().parse().map_err(|_| bad())?,
                t.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn print_csv(table: &rockrelax::experiments::Table) -> Result<(), Error> {
    let bytes = table.to_csv_bytes()?;
    print!("{}", String::from_utf8_lossy(&bytes));
    Ok(())
}

fn exit_for(strict: bool, converged: bool) -> ExitCode {
    if strict && !converged {
        eprintln!("rockrelax: at least one solve did not reach its tolerance");
        ExitCode::from(EXIT_NONCONVERGED)
    } else {
        ExitCode::SUCCESS
    }
}

fn execute(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.build()?;
            let out = run_example(&cfg)?;
            print_csv(&metrics_table(std::slice::from_ref(&out.metrics)))?;
            Ok(exit_for(common.strict, out.metrics.all_converged()))
        }
        Command::Sweep { common, thetas } => {
            let cfg = common.build()?;
            let outs = theta_sweep(&cfg, &thetas)?;
            let reports: Vec<MetricsReport> = outs.into_iter().map(|o| o.metrics).collect();
            print_csv(&metrics_table(&reports))?;
            Ok(exit_for(
                common.strict,
                reports.iter().all(MetricsReport::all_converged),
            ))
        }
        Command::Gamma { common, schedule } => {
            let cfg = common.build()?;
            let schedule = parse_schedule(&schedule)?;
            let rows = gamma_schedule_study(&cfg, &schedule)?;
            print_csv(&gamma_table(&rows))?;
            let converged = rows
                .iter()
                .all(|r| r.report.termination.as_str() == "tolerance");
            Ok(exit_for(common.strict, converged))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("rockrelax: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) => ExitCode::from(EXIT_CONFIG),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
