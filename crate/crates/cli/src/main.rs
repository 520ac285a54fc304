//! `graphsha` command-line entry point.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure (partial
//! results are still written).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graphsha::data::{generate_sbm, save_graph_container};
use graphsha::diffusion::{cache_path, compute_diffusion, save_cache, CACHE_DIR_ENV};
use graphsha::experiment::{run_experiment, sweep_csv, sweep_delta, sweep_imbalance, ExperimentReport, MeanStd};
use graphsha::{Error, ExperimentSpec};

// Per-epoch arrays change size with every synthesis batch; glibc malloc keeps
// returning them to the OS and faulting them back in.
#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

#[derive(Parser)]
#[command(name = "graphsha", version, about = "Hardness-guided minor-node synthesis for imbalanced node classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecArgs {
    /// Flat TOML experiment file. Without it every key takes its default.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set rho=20` or `--set methods='["vanilla"]'`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Graph container file (overrides `dataset`).
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Comma-separated seeds (overrides `seeds`).
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Comma-separated methods (overrides `methods`).
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
}

impl SpecArgs {
    fn load(&self) -> Result<ExperimentSpec, Error> {
        let mut overrides = Vec::new();
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
        let quoted = |s: &str| format!("{s:?}");
        if let Some(d) = &self.dataset {
            overrides.push(("dataset".into(), quoted(&d.to_string_lossy())));
        }
        if !self.seeds.is_empty() {
            overrides.push(("seeds".into(), format!("{:?}", self.seeds)));
        }
        if !self.methods.is_empty() {
            let list: Vec<String> = self.methods.iter().map(|m| quoted(m)).collect();
            overrides.push(("methods".into(), format!("[{}]", list.join(","))));
        }
        if let Some(o) = &self.output_dir {
            overrides.push(("output_dir".into(), quoted(&o.to_string_lossy())));
        }
        match &self.config {
            Some(path) => ExperimentSpec::from_file(path, &overrides),
            None => ExperimentSpec::from_toml_with_overrides("", &overrides),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an SBM graph from the `sbm_*` keys and save it as a container.
    Gen {
        #[command(flatten)]
        spec: SpecArgs,
        /// Destination container file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Precompute the sparsified diffusion matrix into the cache directory.
    Diffuse {
        #[command(flatten)]
        spec: SpecArgs,
        /// Cache directory; defaults to the environment variable.
        #[arg(long, env = CACHE_DIR_ENV)]
        cache_dir: PathBuf,
    },
    /// Run every (method, seed) pair and write the report.
    Run {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Macro-F1 per method across imbalance ratios.
    SweepRho {
        #[command(flatten)]
        spec: SpecArgs,
        /// Comma-separated imbalance ratios.
        #[arg(long, value_delimiter = ',', required = true)]
        rhos: Vec<f64>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Macro-F1 of GraphSHA across Beta distributions of the mixing weight.
    SweepDelta {
        #[command(flatten)]
        spec: SpecArgs,
        /// Comma-separated `b1:b2` pairs, e.g. `1:4,1:1,4:1`.
        #[arg(long, value_delimiter = ',', required = true)]
        betas: Vec<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn print_report(report: &ExperimentReport) {
    println!("{:<14} {:>5} {:>17} {:>17} {:>17}", "method", "runs", "acc", "bacc", "f1");
    let fmt = |m: Option<MeanStd>| {
        m.map(|m| format!("{:.2} ± {:.2}", 100.0 * m.mean, 100.0 * m.std))
            .unwrap_or_else(|| "-".into())
    };
    for a in &report.aggregates {
        println!(
            "{:<14} {:>5} {:>17} {:>17} {:>17}",
            a.method.name(),
            a.runs - a.failed,
            fmt(a.accuracy),
            fmt(a.balanced_accuracy),
            fmt(a.macro_f1)
        );
    }
}

fn write_csv(path: Option<&PathBuf>, csv: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, csv).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn parse_beta(s: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::Config(format!("beta pair must look like b1:b2, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { spec, out } => {
            let spec = spec.load()?;
            let g = generate_sbm(&spec.sbm_spec())?;
            save_graph_container(&g, &out)?;
            println!("wrote {} ({} nodes, {} classes)", out.display(), g.num_nodes(), g.num_classes());
        }
        Command::Diffuse { spec, cache_dir } => {
            let spec = spec.load()?;
            let g = spec.load_graph()?;
            let cfg = spec.diffusion_config();
            let dm = compute_diffusion(&g, &cfg)?;
            let path = cache_path(&cache_dir, &g, &cfg);
            save_cache(&path, &g, &cfg, &dm)?;
            println!("wrote {}", path.display());
        }
        Command::Run { spec } => {
            let spec = spec.load()?;
            let report = run_experiment(&spec)?;
            print_report(&report);
            if let Some(dir) = &spec.output_dir {
                println!("report written to {}", dir.display());
            }
            let failures: Vec<String> = report.failures().filter_map(|r| r.error.clone()).collect();
            if !failures.is_empty() {
                return Err(Failure::Runtime(failures.join("\n")));
            }
        }
        Command::SweepRho { spec, rhos, csv } => {
            let spec = spec.load()?;
            let rows = sweep_imbalance(&spec, &rhos)?;
            write_csv(csv.as_ref(), &sweep_csv("rho", &rows))?;
            if rows.iter().any(|r| r.error.is_some()) {
                return Err(Failure::Runtime("some sweep points failed; see the error column".into()));
            }
        }
        Command::SweepDelta { spec, betas, csv } => {
            let spec = spec.load()?;
            let params = betas.iter().map(|b| parse_beta(b)).collect::<Result<Vec<_>, _>>()?;
            let rows = sweep_delta(&spec, &params)?;
            write_csv(csv.as_ref(), &sweep_csv("mean_delta", &rows))?;
            if rows.iter().any(|r| r.error.is_some()) {
                return Err(Failure::Runtime("some sweep points failed; see the error column".into()));
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
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
