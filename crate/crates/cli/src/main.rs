use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use edgeworth_core::oracle::{find_all_pure_equilibria, DEFAULT_GRID_CAP};
use edgeworth_core::report::{self, Format, OracleSettings};
use edgeworth_core::selfcheck::self_check;
use edgeworth_core::{Duopoly, MarketParams, RationingRule};

#[derive(Parser)]
#[command(name = "edgeworth", version, about = "Equilibrium analysis for the capacity-constrained price duopoly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the capacity threshold k(gamma) over a range of entanglement values
    ThresholdSweep(SweepArgs),
    /// Closed-form equilibrium verdict, optionally checked by the grid oracle
    Analyze(AnalyzeArgs),
    /// Tabulate a firm's payoff as it raises its action against the candidate
    DeviationProfile(ProfileArgs),
    /// Enumerate the pure equilibria of the discretised game
    FindEquilibria(SearchArgs),
    /// Run the built-in invariant checks
    SelfCheck,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Proportional,
    Efficient,
}

impl From<Rule> for RationingRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Proportional => RationingRule::Proportional,
            Rule::Efficient => RationingRule::Efficient,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Args)]
struct Market {
    /// Demand intercept
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Capacity of each firm (must be below a/2)
    #[arg(long)]
    k: f64,
    #[arg(long, value_enum, default_value_t = Rule::Proportional)]
    rule: Rule,
}

impl Market {
    fn params(&self) -> Result<MarketParams> {
        Ok(MarketParams::feasible_new(self.a, self.k)?)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma_min: f64,
    #[arg(long, default_value_t = 5.0)]
    gamma_max: f64,
    #[arg(long, default_value_t = 501)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    market: Market,
    /// Entanglement; omit for the classical game
    #[arg(long)]
    gamma: Option<f64>,
    /// Also verify the candidate with the grid oracle
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 2001)]
    grid_n: usize,
    /// Tolerance on deviation gains (default 1e-9 a^2)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    market: Market,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    /// Defaults to the candidate action
    #[arg(long)]
    x_min: Option<f64>,
    /// Defaults to the action that prices the firm at a
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long, default_value_t = 201)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    market: Market,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 401)]
    grid_n: usize,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn default_epsilon(a: f64, epsilon: Option<f64>) -> f64 {
    epsilon.unwrap_or(1e-9 * a * a)
}

fn threshold_sweep(args: SweepArgs) -> Result<ExitCode> {
    let sweep = report::threshold_sweep(args.a, args.gamma_min, args.gamma_max, args.steps)?;
    emit(&sweep.render(args.format.into())?, args.output.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

fn analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    let params = args.market.params()?;
    let settings = args.oracle.then(|| OracleSettings {
        grid_n: args.grid_n,
        epsilon: default_epsilon(params.a, args.epsilon),
    });
    let analysis = report::analyze(&params, args.market.rule.into(), args.gamma, settings)?;
    eprint!("{}", analysis.summary());
    emit(&analysis.to_json()?, args.output.as_ref())?;
    if analysis.agrees() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: oracle and closed form disagree outside the margin band");
        Ok(ExitCode::from(2))
    }
}

fn deviation_profile(args: ProfileArgs) -> Result<ExitCode> {
    let params = args.market.params()?;
    let (lo, hi) = report::deviation_range(&params, args.gamma)?;
    let table = report::deviation_profile(
        &params,
        args.market.rule.into(),
        args.gamma,
        args.x_min.unwrap_or(lo),
        args.x_max.unwrap_or(hi),
        args.steps,
    )?;
    emit(&table.render(args.format.into())?, args.output.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

fn find_equilibria(args: SearchArgs) -> Result<ExitCode> {
    let params = args.market.params()?;
    let game = Duopoly::new(params, args.market.rule.into(), args.gamma)?;
    let grid = game.default_grid(args.grid_n)?;
    let epsilon = default_epsilon(params.a, args.epsilon);
    let found = find_all_pure_equilibria(&game, &grid, epsilon, DEFAULT_GRID_CAP)?;
    eprintln!("{} pure equilibria on a {}-point grid", found.len(), args.grid_n);
    let text = match args.format {
        OutputFormat::Json => serde_json::to_string_pretty(&found)? + "\n",
        OutputFormat::Csv => {
            let mut s = String::from("action1,action2,payoff1,payoff2,gain,cluster_size\n");
            for eq in &found {
                let f = |v: f64| report::format_sig(v, 12);
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    f(eq.actions.0),
                    f(eq.actions.1),
                    f(eq.payoffs.0),
                    f(eq.payoffs.1),
                    f(eq.gain),
                    eq.cluster_size
                ));
            }
            s
        }
    };
    emit(&text, args.output.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

fn run_self_check() -> Result<ExitCode> {
    let outcomes = self_check()?;
    let mut failed = 0;
    for c in &outcomes {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        println!("[{mark}] {} ({})", c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} checks, {failed} failed", outcomes.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::ThresholdSweep(args) => threshold_sweep(args),
        Command::Analyze(args) => analyze(args),
        Command::DeviationProfile(args) => deviation_profile(args),
        Command::FindEquilibria(args) => find_equilibria(args),
        Command::SelfCheck => run_self_check(),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
