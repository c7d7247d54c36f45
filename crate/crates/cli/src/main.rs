//! Command-line harness: solve single-shot games, play out repeated-game
//! matches, sweep priors, and synthesize payoff matrices from the cell
//! model. All numeric output uses fixed decimal formatting; CSV files are
//! byte-reproducible under a fixed seed.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 solver failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use jamgame::engine::{self, EnbStrategyKind, MatchConfig, Monitoring, SweepConfig};
use jamgame::informed::{single_shot_value, BeliefState};
use jamgame::lte::{build_payoff_matrices, emit_scenario, CellConfig};
use jamgame::{solve_matrix_game, GameSpec};

#[derive(Parser)]
#[command(
    name = "jamgame",
    about = "Zero-sum repeated jamming game: security strategies, matches, sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the single-shot game: one state's matrix game, or the
    /// asymmetric game at a prior.
    Solve(SolveArgs),
    /// Play one repeated-game match and write the trajectory CSV.
    Play(PlayArgs),
    /// Run one match per prior grid point and write the steady-state CSV.
    Sweep(SweepArgs),
    /// Monte-Carlo the cell model into a scenario file.
    GenPayoffs(GenArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// State label or index for the complete-information game.
    #[arg(long)]
    state: Option<String>,
    /// Comma-separated prior for the asymmetric single-shot game.
    #[arg(long)]
    prior: Option<String>,
    /// Also write the report to a file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlayArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// True state drawn by nature.
    #[arg(long)]
    state: String,
    /// Comma-separated prior; defaults to the scenario's.
    #[arg(long)]
    prior: Option<String>,
    /// Discount factor override.
    #[arg(long)]
    lambda: Option<f64>,
    /// Lookahead depth override.
    #[arg(long)]
    horizon: Option<usize>,
    /// Stages to play.
    #[arg(long, default_value_t = 30)]
    stages: usize,
    /// Explicit seed; there is no silent default.
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = EnbArg::Approx)]
    enb: EnbArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    state: String,
    /// Grid over the true state's prior mass: `start:stop:step` or a
    /// comma-separated list. Remaining mass spreads evenly over the other
    /// states.
    #[arg(long)]
    grid: String,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value_t = 30)]
    stages: usize,
    /// Final stages averaged into the steady-state policies.
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = EnbArg::Approx)]
    enb: EnbArg,
    /// Worker threads for grid points.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Cell configuration file.
    #[arg(long)]
    cell: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EnbArg {
    Approx,
    Expected,
}

enum CliError {
    Usage(String),
    Data(String),
    Solver(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Solver(m) => m,
        }
    }
}

impl From<jamgame::Error> for CliError {
    fn from(e: jamgame::Error) -> Self {
        match e {
            jamgame::Error::Lp(_) | jamgame::Error::StageLp { .. } => {
                CliError::Solver(e.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits; real parse errors are usage
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Play(args) => cmd_play(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::GenPayoffs(args) => cmd_gen_payoffs(args),
    }
}

fn load_scenario(path: &Path) -> Result<GameSpec, CliError> {
    let doc = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(GameSpec::from_toml_str(&doc)?)
}

fn parse_floats(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("not a number: {tok:?}")))
        })
        .collect()
}

fn resolve_state(game: &GameSpec, label: &str) -> Result<usize, CliError> {
    if let Some(i) = game.state_index(label) {
        return Ok(i);
    }
    if let Ok(i) = label.parse::<usize>() {
        if i >= 1 && i <= game.num_states() {
            return Ok(i - 1);
        }
    }
    Err(CliError::Data(format!(
        "unknown state {label:?}; expected one of {:?} or an index",
        game.states()
    )))
}

fn mix_line(label: &str, probs: &[f64]) -> String {
    let cells: Vec<String> = probs.iter().map(|p| format!("{p:.4}")).collect();
    format!("  {label}: [{}]\n", cells.join(", "))
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let game = load_scenario(&args.scenario)?;
    let mut report = String::new();
    match (&args.state, &args.prior) {
        (Some(state), None) => {
            let theta = resolve_state(&game, state)?;
            let sol = solve_matrix_game(game.payoff(theta)).map_err(jamgame::Error::Lp)?;
            let _ = writeln!(
                report,
                "complete-information game, state {}: value = {:.4}",
                game.states()[theta],
                sol.value
            );
            report.push_str(&mix_line("jammer mix", sol.row_mix.probs()));
            report.push_str(&mix_line("enb mix   ", sol.col_mix.probs()));
        }
        (None, Some(prior)) => {
            let p = parse_floats(prior)?;
            let belief = BeliefState::new(p)?;
            let sol = single_shot_value(&game, &belief)?;
            let _ = writeln!(report, "asymmetric single-shot game: value = {:.4}", sol.value);
            for theta in 0..game.num_states() {
                report.push_str(&mix_line(
                    &format!("jammer mix | {}", game.states()[theta]),
                    sol.strategy.column(theta).probs(),
                ));
            }
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --state or --prior is required".into(),
            ));
        }
    }
    print!("{report}");
    if let Some(out) = &args.out {
        std::fs::write(out, &report)
            .map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
    }
    Ok(())
}

fn apply_lambda(game: GameSpec, lambda: Option<f64>) -> Result<GameSpec, CliError> {
    match lambda {
        Some(l) => Ok(game.with_discount(l)?),
        None => Ok(game),
    }
}

fn cmd_play(args: PlayArgs) -> Result<(), CliError> {
    let game = apply_lambda(load_scenario(&args.scenario)?, args.lambda)?;
    let true_state = resolve_state(&game, &args.state)?;
    let prior = match &args.prior {
        Some(s) => parse_floats(s)?,
        None => game.prior().to_vec(),
    };
    let (enb_strategy, monitoring) = match args.enb {
        EnbArg::Approx => (EnbStrategyKind::Approximated, Monitoring::Full),
        EnbArg::Expected => (EnbStrategyKind::Expected, Monitoring::None),
    };
    let config = MatchConfig {
        true_state,
        prior,
        enb_strategy,
        horizon: args.horizon.unwrap_or_else(|| game.horizon()),
        stages: args.stages,
        seed: args.seed,
        monitoring,
    };
    let trajectory = engine::play_match(&game, &config)?;
    std::fs::write(&args.out, trajectory.to_csv())
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    println!(
        "played {} stages, state {}: discounted utility {:.6} (tail bound {:.3e})",
        args.stages,
        game.states()[true_state],
        trajectory.jammer_utility(),
        trajectory.tail_bound
    );
    Ok(())
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Usage("grid range must be start:stop:step".into()));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("not a number: {p:?}")))
            })
            .collect::<Result<_, _>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 || stop < start {
            return Err(CliError::Usage("grid range must ascend with positive step".into()));
        }
        let mut grid = Vec::new();
        let n = ((stop - start) / step).round() as usize;
        for k in 0..=n {
            let v = start + step * k as f64;
            if v <= stop + 1e-12 {
                grid.push(v.min(1.0));
            }
        }
        Ok(grid)
    } else {
        parse_floats(s)
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let game = apply_lambda(load_scenario(&args.scenario)?, args.lambda)?;
    let true_state = resolve_state(&game, &args.state)?;
    let values = parse_grid(&args.grid)?;
    let n = game.num_states();
    let grid: Vec<Vec<f64>> = values
        .iter()
        .map(|&v| {
            let mut p = vec![if n > 1 { (1.0 - v) / (n - 1) as f64 } else { 0.0 }; n];
            p[true_state] = v;
            if n == 1 {
                p[0] = 1.0;
            }
            p
        })
        .collect();
    let (enb_strategy, monitoring) = match args.enb {
        EnbArg::Approx => (EnbStrategyKind::Approximated, Monitoring::Full),
        EnbArg::Expected => (EnbStrategyKind::Expected, Monitoring::None),
    };
    let config = SweepConfig {
        true_state,
        enb_strategy,
        horizon: args.horizon.unwrap_or_else(|| game.horizon()),
        stages: args.stages,
        tail_window: args.window,
        seed: args.seed,
        monitoring,
        jobs: args.jobs,
    };
    let rows = engine::sweep_prior(&game, &grid, &config)?;
    std::fs::write(&args.out, engine::sweep_csv(&game, &rows))
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    println!("swept {} grid points into {}", rows.len(), args.out.display());
    Ok(())
}

fn cmd_gen_payoffs(args: GenArgs) -> Result<(), CliError> {
    let doc = std::fs::read_to_string(&args.cell)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.cell.display())))?;
    let config = CellConfig::from_toml_str(&doc)?;
    let payoffs = build_payoff_matrices(&config, args.seed)?;
    let scenario = emit_scenario(&config, &payoffs)?;
    std::fs::write(&args.out, &scenario)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    println!(
        "wrote scenario to {} (baseline entries {:.4}, {:.4})",
        args.out.display(),
        payoffs.cheater.get(0, 0),
        payoffs.saboteur.get(0, 0)
    );
    Ok(())
}
