use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use finsler_metrize::app;
use finsler_metrize::config::{load_config, ScenarioConfig};
use finsler_metrize::{Error, Result};

/// Decide Finsler metrizability of connections with vectorial nonmetricity.
#[derive(Parser)]
#[command(name = "finsler-metrize", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Subfamily tags of (c1, c2, c3)
    Classify(Common),
    /// Fit both theorem branches and construct the Lagrangian
    Decide(Common),
    /// Residuals, spray comparison and paired integration
    Verify(Common),
    /// Integrate autoparallels and/or geodesics, optionally to CSV
    Integrate {
        #[command(flatten)]
        common: Common,
        /// Directory for trajectory CSV files (overrides integrate.csv_dir)
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// key=value, e.g. fit_residual=1e-8 or verify.spray=1e-6; repeatable
    #[arg(long = "tolerance", value_name = "KEY=VALUE")]
    tolerances: Vec<String>,
}

fn apply_overrides(cfg: &mut ScenarioConfig, c: &Common) -> Result<()> {
    if let Some(s) = c.seed {
        cfg.sampling.seed = s;
    }
    let mut errors = Vec::new();
    for kv in &c.tolerances {
        let Some((k, v)) = kv.split_once('=') else {
            errors.push(format!("--tolerance {kv}: expected KEY=VALUE"));
            continue;
        };
        let Ok(x) = v.trim().parse::<f64>() else {
            errors.push(format!("--tolerance {kv}: not a number"));
            continue;
        };
        let k = k.trim();
        let res = if let Some(vk) = k.strip_prefix("verify.") {
            let t = &mut cfg.verify.tolerances;
            let slot = match vk {
                "delta_l" => Some(&mut t.delta_l),
                "spray" => Some(&mut t.spray),
                "deviation" => Some(&mut t.deviation),
                "conservation" => Some(&mut t.conservation),
                "min_order" => Some(&mut t.min_order),
                _ => None,
            };
            match slot {
                Some(s) => {
                    *s = x;
                    Ok(())
                }
                None => Err(Error::Config(vec![format!("verify.tolerances.{vk}: unknown tolerance")])),
            }
        } else {
            cfg.tolerances.set(k, x)
        };
        if let Err(Error::Config(e)) = res {
            errors.extend(e);
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(errors))
    }
}

fn run(cli: Cli) -> Result<i32> {
    let (common, csv_dir) = match &cli.command {
        Cmd::Classify(c) | Cmd::Decide(c) | Cmd::Verify(c) => (c, None),
        Cmd::Integrate { common, csv_dir } => (common, csv_dir.as_deref()),
    };
    let mut cfg = load_config(&common.config)?;
    apply_overrides(&mut cfg, common)?;
    let report = match &cli.command {
        Cmd::Classify(_) => app::run_classify(&cfg)?,
        Cmd::Decide(_) => app::run_decide(&cfg)?,
        Cmd::Verify(_) => app::run_verify(&cfg)?,
        Cmd::Integrate { .. } => app::run_integrate(&cfg, csv_dir)?,
    };
    let json = report.to_json();
    match &common.out {
        Some(p) => std::fs::write(p, json).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        None => print!("{json}"),
    }
    Ok(report.outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
