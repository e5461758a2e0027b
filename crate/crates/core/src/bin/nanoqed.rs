use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nanoqed::runner::{self, ExperimentConfig, RunOptions};
use nanoqed::{Error, Result};

/// Excitation spectrum of an atom near a dielectric nanostructure.
#[derive(Parser, Debug)]
#[command(name = "nanoqed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset (see `nanoqed presets`).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Master seed for disordered placement.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Abort on the first numerical failure instead of recording it.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Calibrate the medium and write the permittivity scan.
    Fit(Common),
    /// Distance sweep of the excited-state spectrum.
    Scan(Common),
    /// Compare the fast self-energy with the full-matrix route.
    Oracle {
        #[arg(long, default_value_t = 30)]
        instances: usize,
        #[arg(long, default_value_t = 50)]
        max_scatterers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
        #[arg(long, hide = true)]
        corrupt_coupling_sign: bool,
    },
    /// Overlay sweeps at several densities calibrated to the same permittivity.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Comma-separated densities overriding the config.
        #[arg(long, value_delimiter = ',')]
        densities: Option<Vec<f64>>,
    },
    /// Macroscopic van der Waals shift along the sweep.
    Vdw(Common),
    /// Repeat a comb sweep over several periods to locate the most sub-radiant one.
    PeriodScan {
        #[command(flatten)]
        common: Common,
        /// Comma-separated comb periods in nm.
        #[arg(long, value_delimiter = ',', required = true)]
        periods_nm: Vec<f64>,
    },
    /// List the built-in presets, or print one as a JSON config.
    Presets {
        /// Preset to print.
        #[arg(long)]
        show: Option<String>,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), None) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
        (None, Some(name)) => runner::preset(name)?,
        _ => return Err(Error::Config("pass exactly one of --config or --preset".into())),
    };
    if let Some(seed) = common.seed {
        cfg.placement.seed = seed;
        if let Some(conv) = &mut cfg.converge {
            conv.placements.iter_mut().for_each(|p| p.seed = seed);
        }
    }
    Ok(cfg)
}

fn options(common: &Common) -> RunOptions {
    RunOptions { out_dir: common.out.clone(), strict: common.strict, threads: common.threads, corrupt_coupling_sign: false }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Presets { show: Some(name) } => {
            let cfg = runner::preset(&name)?;
            println!("{}", serde_json::to_string_pretty(&cfg).map_err(|e| Error::Config(e.to_string()))?);
        }
        Command::Presets { show: None } => {
            for name in runner::PRESET_NAMES {
                let cfg = runner::preset(name)?;
                println!("{name}{}", if cfg.long_running { "  (long-running)" } else { "" });
            }
        }
        Command::Fit(common) => {
            let cfg = load(&common)?.resolve()?;
            let report = runner::cmd_fit(&cfg, &options(&common))?;
            println!(
                "delta_M = {:.4} Gamma_inf (n0 = {}, target eps = {}); max |Re eps/target - 1| over +-{} Gamma_inf = {:.3e}; wrote {}",
                report.model.delta_m,
                report.model.n0,
                report.target_eps,
                runner::commands::FLATNESS_WINDOW,
                report.flatness_deviation,
                report.csv.display()
            );
        }
        Command::Scan(common) => {
            let cfg = load(&common)?.resolve()?;
            let out = runner::cmd_scan(&cfg, &options(&common))?;
            println!(
                "{} points, {} realizations, {} failures in {:.1}s; wrote {} and {}",
                out.result.points.len(),
                out.result.realizations.len(),
                out.result.failures(),
                out.seconds,
                out.csv.display(),
                out.sidecar.display()
            );
        }
        Command::Vdw(common) => {
            let cfg = load(&common)?.resolve()?;
            let rows = runner::cmd_vdw(&cfg, &options(&common))?;
            println!("{} distances written to {}", rows.len(), common.out.display());
        }
        Command::Converge { common, densities } => {
            let cfg = load(&common)?.resolve()?;
            let report = runner::cmd_converge(&cfg, densities.as_deref(), &options(&common))?;
            for p in &report.pairs {
                println!("{} vs {}: max relative deviation {:.4e} ({:.2} sigma)", p.a, p.b, p.max_rel_deviation, p.max_sigma);
            }
        }
        Command::PeriodScan { common, periods_nm } => {
            let cfg = load(&common)?;
            let report = runner::cmd_period_scan(&cfg, &periods_nm, &options(&common))?;
            if let Some(best) = &report.most_subradiant {
                println!(
                    "slowest maximal-|M| decay {:.4} at period {} nm, distance {} nm; wrote {}",
                    best.max_label_gamma,
                    best.period_nm,
                    best.distance_nm,
                    report.csv.display()
                );
            }
        }
        Command::Oracle { instances, max_scatterers, seed, threads, out, corrupt_coupling_sign } => {
            let opts = RunOptions { out_dir: out, strict: true, threads, corrupt_coupling_sign };
            let result = runner::cmd_oracle(instances, max_scatterers, seed, &opts);
            match &result {
                Ok(report) => println!("{}", serde_json::to_string(report)?),
                Err(Error::Oracle(_)) => {
                    let text = std::fs::read_to_string(opts.out_dir.join("oracle.json")).unwrap_or_default();
                    println!("{}", text.trim());
                }
                Err(_) => {}
            }
            result?;
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
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
