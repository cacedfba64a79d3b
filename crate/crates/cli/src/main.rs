use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nmcavity::acceptance::Suite;
use nmcavity::scenario::{run_scenario, Overrides, Preset, Report, ScenarioConfig};
use nmcavity::Error;
use rayon::prelude::*;

/// Non-Markovian nanocavity dynamics: run figure presets or custom scenarios.
#[derive(Parser, Debug)]
#[command(name = "nmcavity", version)]
#[command(group = clap::ArgGroup::new("what").required(true).multiple(true).args(["preset", "config", "seed_check"]))]
struct Cli {
    /// Preset to run (fig2a..fig2c, fig3a..fig3c, custom); repeat for a batch, or `all`.
    #[arg(long, value_name = "NAME")]
    preset: Vec<String>,
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (one subdirectory per preset when running a batch).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Time step in units of 1/ω₀.
    #[arg(long)]
    dt: Option<f64>,
    /// Final time in units of 1/ω₀.
    #[arg(long)]
    tmax: Option<f64>,
    /// Coupling ratio λ/λ₀.
    #[arg(long)]
    eta: Option<f64>,
    /// Skip the chain-oracle comparison.
    #[arg(long)]
    no_oracle: bool,
    /// Skip the Fock-space master-equation check.
    #[arg(long)]
    no_fock: bool,
    /// Run the acceptance suite on all figure presets.
    #[arg(long)]
    seed_check: bool,
}

/// 1: bad input, 3: numerical failure.
fn error_status(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::InvalidConfig(_)
        | Error::InvalidGrid(_)
        | Error::InvalidModel(_)
        | Error::InvalidState(_)
        | Error::NegativeOccupation { .. }
        | Error::ValidityWindow { .. }
        | Error::Io(_) => 1,
        _ => 3,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(error_status(e))
}

fn presets(names: &[String]) -> Result<Vec<Preset>, Error> {
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            out.extend(Preset::FIGURES);
        } else {
            out.push(name.parse().map_err(Error::InvalidConfig)?);
        }
    }
    Ok(out)
}

fn seed_check() -> ExitCode {
    let suite = match Suite::build() {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let mut ok = true;
    for id in nmcavity::acceptance::CRITERIA {
        match suite.evaluate(id) {
            Ok(r) => {
                ok &= r.passed;
                println!("{r}");
            }
            Err(e) => return fail(&e),
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.seed_check {
        return seed_check();
    }

    let from_file = match &cli.config {
        Some(path) => match std::fs::read_to_string(path).map_err(Error::from).and_then(|t| Overrides::parse(&t)) {
            Ok(o) => o,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(error_status(&e));
            }
        },
        None => Overrides::default(),
    };
    let flags = Overrides {
        dt: cli.dt,
        t_max: cli.tmax,
        eta: cli.eta,
        run_oracle: cli.no_oracle.then_some(false),
        run_fock: cli.no_fock.then_some(false),
        ..Overrides::default()
    };
    let presets = match presets(&cli.preset) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let batch = presets.len() > 1;

    let configs: Result<Vec<ScenarioConfig>, Error> = if presets.is_empty() {
        let mut o = from_file.merge(flags);
        o.out = cli.out.clone().or(o.out);
        ScenarioConfig::from_overrides(&o).map(|c| vec![c])
    } else {
        presets
            .iter()
            .map(|p| {
                let mut o = from_file.clone().merge(flags.clone());
                o.preset = Some(*p);
                o.out = match (&cli.out, batch) {
                    (Some(dir), true) => Some(dir.join(p.name())),
                    (Some(dir), false) => Some(dir.clone()),
                    (None, _) => o.out.map(|d| if batch { d.join(p.name()) } else { d }),
                };
                ScenarioConfig::from_overrides(&o)
            })
            .collect()
    };
    let configs = match configs {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };

    let results: Vec<Result<Report, Error>> =
        configs.par_iter().map(|c| run_scenario(c).map(|(_, report)| report)).collect();

    let mut status = 0u8;
    for (config, result) in configs.iter().zip(results) {
        match result {
            Ok(report) => {
                print!("{}", report.render());
                println!("artifacts: {}\n", config.out.display());
                if !report.passed() {
                    status = status.max(2);
                }
            }
            Err(e) => {
                eprintln!("error: {}: {e}", config.preset);
                status = status.max(error_status(&e));
            }
        }
    }
    ExitCode::from(status)
}
