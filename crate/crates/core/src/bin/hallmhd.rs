use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hallmhd::harness::{
    exit_code, experiment, run, run_checks, snapshot_header, CheckOptions, Preset, RunConfig,
};
use hallmhd::{Error, Result};

#[derive(Parser)]
#[command(name = "hallmhd", version, about = "Pseudo-spectral Hall-MHD solver and verification suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time-step one configuration and write its artifacts.
    Run(Overrides),
    /// Run a named experiment preset and print its report.
    Experiment(Overrides),
    /// Operator identities and inequality probes; no time stepping.
    Check {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the header of a snapshot file.
    Inspect { path: PathBuf },
}

#[derive(Args)]
struct Overrides {
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
}

impl Overrides {
    fn preset(&self) -> Result<Option<Preset>> {
        self.preset.as_deref().map(str::parse).transpose()
    }

    /// Preset defaults, then the config file, then the flags.
    fn config(&self) -> Result<RunConfig> {
        let mut c = self.preset()?.map(|p| p.config()).unwrap_or_default();
        if let Some(path) = &self.config {
            c.apply_text(&std::fs::read_to_string(path)?)?;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        if let Some(s) = self.seed {
            c.set_seed(s);
        }
        if let Some(n) = self.n {
            c.n = n;
        }
        if let Some(dt) = self.dt {
            c.dt = dt;
        }
        if let Some(t) = self.t_end {
            c.t_end = t;
        }
        c.validate()?;
        Ok(c)
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data")
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(o) => {
            let c = o.config()?;
            let outcome = run(&c)?;
            println!("{}", json(&outcome.summary));
            Ok(outcome.summary.passed)
        }
        Command::Experiment(o) => {
            let p = o.preset()?.ok_or_else(|| Error::Config("experiment needs --preset".into()))?;
            let c = o.config()?;
            let report = experiment(p, &c)?;
            std::fs::create_dir_all(&c.out)?;
            std::fs::write(c.out.join("report.json"), report.to_json())?;
            println!("{}", report.to_json());
            Ok(report.passed)
        }
        Command::Check { n, seed, out } => {
            let report = run_checks(&CheckOptions { n, seed, ..CheckOptions::default() })?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("check.json"), json(&report))?;
            }
            println!("{}", json(&report));
            Ok(report.passed)
        }
        Command::Inspect { path } => {
            println!("{}", json(&snapshot_header(&path)?));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let result = dispatch(Cli::parse());
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result) as u8)
}
