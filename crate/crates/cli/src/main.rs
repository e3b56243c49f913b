use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use relay_contracts::io::{
    contract_table_csv, menu_csv, metrics_csv, read_offers_csv, selection_csv,
};
use relay_contracts::selection::{
    best_snr_baseline, exhaustive_optimum, heuristic_candidates, overall_from_candidates,
    relaxed_solution, SelectionProblem, EXHAUSTIVE_LIMIT,
};
use relay_contracts::sim::{contract_table, run_experiment};
use relay_contracts::{ContractMenu, ExperimentConfig, MenuKind, TypeGrid};

#[derive(Parser, Debug)]
#[command(
    name = "relay-contracts",
    version,
    about = "Relay contract menus and budget-constrained relay selection"
)]
struct Cli {
    #[command(flatten)]
    opts: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Source budget T.
    #[arg(long, global = true, allow_negative_numbers = true, value_parser = non_negative)]
    budget: Option<f64>,
    /// Number of relays M.
    #[arg(long, global = true)]
    relays: Option<usize>,
    /// Number of subcarriers N.
    #[arg(long, global = true)]
    subcarriers: Option<usize>,
    /// Quantization factor K.
    #[arg(long, global = true)]
    quant: Option<usize>,
    /// Cost per unit power c.
    #[arg(long, global = true)]
    cost: Option<f64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Money-discretization units per 1.0 of currency.
    #[arg(long, global = true)]
    resolution: Option<u32>,
    /// Output file; stdout when absent or `-`.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Contract menu for the configured type distribution.
    Contracts {
        #[arg(long, value_enum)]
        menu: Option<MenuArg>,
    },
    /// Relay selection on an offers CSV (m,n,gamma_linear,transfer).
    Select {
        offers: PathBuf,
        /// Also write the per-subcarrier selections here.
        #[arg(long, value_name = "PATH")]
        detail: Option<PathBuf>,
    },
    /// Monte Carlo experiment over the configured (M, T) sweep.
    Simulate,
    /// First- and second-best contracts side by side with information rents.
    Table3,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MenuArg {
    FirstBest,
    SecondBest,
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be finite and non-negative, got {v}"))
    }
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

struct Settings {
    config: ExperimentConfig,
    out: Option<PathBuf>,
    verbose: bool,
}

fn load_settings(opts: &Overrides) -> std::result::Result<Settings, Failure> {
    let mut out = None;
    let mut verbose = false;
    let mut config = match &opts.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))
                .map_err(Failure::Runtime)?;
            let mut value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
            if let Some(map) = value.as_object_mut() {
                if let Some(v) = map.remove("out") {
                    out = v.as_str().map(PathBuf::from);
                }
                if let Some(v) = map.remove("verbose") {
                    verbose = v.as_bool().unwrap_or(false);
                }
            }
            ExperimentConfig::from_json_value(value)
                .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = opts.seed {
        config.seed = v;
    }
    if let Some(v) = opts.budget {
        config.budget = vec![v];
    }
    if let Some(v) = opts.relays {
        config.relays = vec![v];
    }
    if let Some(v) = opts.subcarriers {
        config.subcarriers = v;
    }
    if let Some(v) = opts.quant {
        config.quant = v;
    }
    if let Some(v) = opts.cost {
        config.cost = v;
    }
    if let Some(v) = opts.trials {
        config.trials = v;
    }
    if let Some(v) = opts.resolution {
        config.resolution = v;
    }
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(Settings {
        config,
        out: opts.out.clone().or(out),
        verbose: verbose || opts.verbose,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out.filter(|p| *p != Path::new("-")) {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_contracts(s: &Settings, menu: Option<MenuArg>) -> Result<String> {
    let c = &s.config;
    let kind = match menu {
        Some(MenuArg::FirstBest) => MenuKind::FirstBest,
        Some(MenuArg::SecondBest) => MenuKind::SecondBest,
        None => c.menu,
    };
    let grid = TypeGrid::from_distribution(&c.distribution, c.quant, c.subcarriers)?;
    let menu = ContractMenu::build(kind, &grid, c.cost)?;
    if s.verbose && menu.is_pooled() {
        eprintln!("note: pointwise optimum was not monotone; adjacent types were pooled");
    }
    Ok(menu_csv(&menu)?)
}

fn cmd_select(s: &Settings, offers_path: &Path, detail: Option<&Path>) -> Result<String> {
    let file = fs::File::open(offers_path)
        .with_context(|| format!("opening offers {}", offers_path.display()))?;
    let offers = read_offers_csv(file, None)
        .with_context(|| format!("reading offers {}", offers_path.display()))?;
    let budget = s.config.budget[0];
    let problem = SelectionProblem::new(offers, budget, s.config.resolution)?;

    let candidates = heuristic_candidates(&problem);
    let mut results = candidates.to_vec();
    results.push(overall_from_candidates(candidates));
    results.push(best_snr_baseline(&problem));
    let cells = problem.offers.relays() * problem.offers.subcarriers();
    if cells <= EXHAUSTIVE_LIMIT {
        results.push(exhaustive_optimum(&problem)?);
    }
    let relaxed = relaxed_solution(&problem);

    if let Some(path) = detail {
        let text = selection_csv(&problem.offers, &results)?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if s.verbose {
        eprintln!(
            "{} relays x {} subcarriers, {} offers, budget {budget}",
            problem.offers.relays(),
            problem.offers.subcarriers(),
            problem.offers.offer_count()
        );
    }
    let mut text = String::from("method,capacity,spend\n");
    for r in &results {
        text.push_str(&format!("{},{},{}\n", r.method, r.capacity, r.spend));
    }
    text.push_str(&format!("relaxed,{},{}\n", relaxed.bound, relaxed.spend));
    Ok(text)
}

fn cmd_simulate(s: &Settings) -> Result<String> {
    if s.verbose {
        eprintln!(
            "simulating {} trials for M in {:?}, T in {:?}",
            s.config.trials, s.config.relays, s.config.budget
        );
    }
    let table = run_experiment(&s.config)?;
    Ok(metrics_csv(&table)?)
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
    let settings = load_settings(&cli.opts)?;
    let text = match &cli.command {
        Command::Contracts { menu } => cmd_contracts(&settings, *menu)?,
        Command::Select { offers, detail } => cmd_select(&settings, offers, detail.as_deref())?,
        Command::Simulate => cmd_simulate(&settings)?,
        Command::Table3 => {
            let c = &settings.config;
            let rows = contract_table(&c.distribution, c.quant, c.subcarriers, c.cost)
                .map_err(anyhow::Error::from)?;
            contract_table_csv(&rows).map_err(anyhow::Error::from)?
        }
    };
    emit(settings.out.as_deref(), &text)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
