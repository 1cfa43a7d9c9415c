//! `ehcap` — experiment runner for energy-harvesting channel capacity
//! computations.
//!
//! A run is described by an optional config file (`--config`, flat
//! `key = value` lines) with command-line flags overriding individual keys.
//! Results go to `--out` or stdout. Exit codes: 0 success, 2 a row violated
//! a numerical invariant or failed to compute, 3 an enumeration budget was
//! refused, 4 the configuration was unusable. When several rows fail, the
//! first failing row in output order decides the code.

use clap::error::ErrorKind;
use clap::Parser;

use ehcap_cli::config::{ExperimentConfig, ExperimentKind, HarvestSpec, OutputFormat, Quantum};
use ehcap_cli::{exit, experiments};

#[derive(Debug, Parser)]
#[command(
    name = "ehcap",
    version,
    about = "Capacity experiments for an AWGN channel with an energy-harvesting transmitter"
)]
struct Cli {
    /// Experiment to run: capacity-sweep, tg-convergence, greedy-compare, or
    /// no-bsir.
    #[arg(long)]
    experiment: Option<ExperimentKind>,
    /// Config file of `key = value` lines; flags override its entries.
    #[arg(long)]
    config: Option<String>,
    /// Buffer capacity in energy units.
    #[arg(long)]
    gamma: Option<f64>,
    /// Energy quantum of the state grid, or `auto`.
    #[arg(long)]
    quantum: Option<Quantum>,
    /// Largest per-slot harvest in energy units.
    #[arg(long)]
    ymax: Option<f64>,
    /// Harvest law: point, uniform, or pmf:<path>.
    #[arg(long)]
    harvest: Option<HarvestSpec>,
    /// Noise variance.
    #[arg(long)]
    sigma2: Option<f64>,
    /// Simulated signalling power backoff below the mean harvest.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Base seed for all randomized stages.
    #[arg(long)]
    seed: Option<u64>,
    /// Capacity-search restarts.
    #[arg(long)]
    restarts: Option<usize>,
    /// Monte-Carlo slots recorded per buffer size.
    #[arg(long)]
    samples: Option<usize>,
    /// Monte-Carlo slots discarded per replica before recording.
    #[arg(long)]
    burn_in: Option<usize>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<String>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<OutputFormat>,
}

impl Cli {
    fn apply_to(&self, cfg: &mut ExperimentConfig) {
        if let Some(v) = self.experiment {
            cfg.experiment = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.quantum {
            cfg.quantum = v;
        }
        if let Some(v) = self.ymax {
            cfg.ymax = v;
        }
        if let Some(v) = &self.harvest {
            cfg.harvest = v.clone();
        }
        if let Some(v) = self.sigma2 {
            cfg.sigma2 = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.restarts {
            cfg.restarts = v;
        }
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if let Some(v) = self.burn_in {
            cfg.burn_in = v;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
    }
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return exit::OK;
        }
        Err(e) => {
            let _ = e.print();
            return exit::BAD_CONFIG;
        }
    };

    let mut cfg = match &cli.config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(text) => text,
                Err(e) => {
                    eprintln!("config error: cannot read '{path}': {e}");
                    return exit::BAD_CONFIG;
                }
            };
            match ExperimentConfig::from_file_str(&text) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("config error: {path}: {e}");
                    return exit::BAD_CONFIG;
                }
            }
        }
        None => ExperimentConfig::default(),
    };
    cli.apply_to(&mut cfg);
    if let Err(e) = cfg.validate() {
        eprintln!("config error: {e}");
        return exit::BAD_CONFIG;
    }

    let outcome = match experiments::run(&cfg) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("config error: {e}");
            return exit::BAD_CONFIG;
        }
    };
    let rendered = match cfg.format {
        OutputFormat::Csv => outcome.table.to_csv(),
        OutputFormat::Json => outcome.table.to_json(),
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("config error: cannot write '{path}': {e}");
                return exit::BAD_CONFIG;
            }
        }
        None => print!("{rendered}"),
    }
    outcome.exit_code
}

fn main() {
    std::process::exit(run());
}
