use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sscover::format::{instance_to_json, parse_instance};
use sscover::generators::{point_mass_embedding, random_instance, tight_instance, CoverageMode, GenParams};
use sscover::harness::run_trials;
use sscover::oracle::{Caps, OracleError, DEFAULT_DP_STATE_CAP, DEFAULT_REALIZATION_CAP};
use sscover::reduction::EdgeMap;
use sscover::{
    exact_greedy_report, exact_imperfect_report, is_perfect_coverage, marginals, reduce_instance, run_greedy,
    sample_realization, solve_imperfect, ElementSubset, GreedyError, Instance, Rational,
};

#[derive(Parser)]
#[command(name = "sscover", version, about = "Adaptive greedy for stochastic set cover")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file.
    Validate { file: PathBuf },
    /// Print the marginal table q[item][element].
    Marginals { file: PathBuf },
    /// Sample one realization and run greedy on it.
    Run {
        file: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Write the trace here instead of embedding it in the output.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Run greedy on the source instance even if coverage is imperfect.
        #[arg(long)]
        no_reduce: bool,
    },
    /// Write the reduced perfect-coverage instance and its edge map.
    Reduce {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        edges: PathBuf,
    },
    /// Exact greedy vs optimal comparison; exits 3 if a guarantee fails.
    Compare {
        file: PathBuf,
        /// Maximum number of realizations to enumerate.
        #[arg(long, default_value_t = DEFAULT_REALIZATION_CAP)]
        cap: u128,
        /// Maximum policy state space for the optimal DP.
        #[arg(long, default_value_t = DEFAULT_DP_STATE_CAP)]
        dp_cap: u128,
    },
    /// Monte Carlo estimate of greedy's expected cost.
    Mc {
        file: PathBuf,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        no_reduce: bool,
    },
    /// Generate an instance.
    Gen(Box<GenArgs>),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Random,
    Tight,
    Pointmass,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Perfect,
    Imperfect,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, default_value_t = 4)]
    items: usize,
    #[arg(long, default_value_t = 4)]
    elements: usize,
    #[arg(long, default_value_t = 3)]
    max_support: usize,
    #[arg(long, default_value = "1/2")]
    cost_lo: Rational,
    #[arg(long, default_value = "3")]
    cost_hi: Rational,
    #[arg(long, value_enum, default_value_t = Mode::Perfect)]
    mode: Mode,
    #[arg(long, default_value_t = 4)]
    granularity: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Tight family size.
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value = "1/10")]
    epsilon: Rational,

    /// Point-mass sets, e.g. "0,1;1,2;" (an empty entry is the empty set).
    #[arg(long, default_value = "")]
    sets: String,
    /// Point-mass costs, comma separated.
    #[arg(long, default_value = "")]
    costs: String,
    #[arg(long)]
    ground_size: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    TooLarge(String),
    Violation(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::TooLarge(_) => 2,
            CliError::Violation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::TooLarge(m) | CliError::Violation(m) => m,
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge(_) => CliError::TooLarge(e.to_string()),
            OracleError::NotPerfect => CliError::Input(e.to_string()),
            OracleError::Infeasible { .. } | OracleError::Greedy(_) => CliError::Violation(e.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

fn load(path: &Path) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization cannot fail")
}

fn stuck(inst: &Instance, e: GreedyError) -> CliError {
    if is_perfect_coverage(inst) {
        CliError::Violation(format!("greedy got stuck on a perfect-coverage instance: {e}"))
    } else {
        CliError::Input(format!("{e} (instance has imperfect coverage; drop --no-reduce)"))
    }
}

fn validate(file: &Path) -> CliResult {
    let inst = load(file)?;
    println!(
        "ok: {} items, ground size {}, {} coverage",
        inst.items.len(),
        inst.ground_size,
        if is_perfect_coverage(&inst) { "perfect" } else { "imperfect" }
    );
    Ok(())
}

fn print_marginals(file: &Path) -> CliResult {
    let inst = load(file)?;
    #[derive(Serialize)]
    struct Out<'a> {
        ground_size: usize,
        perfect_coverage: bool,
        marginals: &'a [Vec<Rational>],
    }
    let q = marginals(&inst);
    println!(
        "{}",
        to_json(&Out { ground_size: inst.ground_size, perfect_coverage: is_perfect_coverage(&inst), marginals: q.rows() })
    );
    Ok(())
}

fn run(file: &Path, seed: u64, trace_out: Option<&Path>, no_reduce: bool) -> CliResult {
    let inst = load(file)?;
    let real = sample_realization(&inst, seed);
    let reduced = !no_reduce && !is_perfect_coverage(&inst);
    let trace = if reduced {
        solve_imperfect(&inst, &real).map(|s| s.trace)
    } else {
        run_greedy(&inst, &real)
    }
    .map_err(|e| stuck(&inst, e))?;
    if let Some(path) = trace_out {
        write_file(path, &to_json(&trace))?;
    }
    #[derive(Serialize)]
    struct Out<'a> {
        seed: u64,
        reduced: bool,
        cost: &'a Rational,
        chosen: Vec<usize>,
        realization: &'a [ElementSubset],
        #[serde(skip_serializing_if = "Option::is_none")]
        trace: Option<&'a sscover::GreedyTrace>,
    }
    println!(
        "{}",
        to_json(&Out {
            seed,
            reduced,
            cost: &trace.total_cost,
            chosen: trace.evaluated_items(),
            realization: &real.states,
            trace: trace_out.is_none().then_some(&trace),
        })
    );
    Ok(())
}

fn reduce(file: &Path, out: &Path, edges: &Path) -> CliResult {
    let inst = load(file)?;
    let red = reduce_instance(&inst);
    write_file(out, &instance_to_json(&red.instance))?;
    write_file(edges, &serde_json::to_string(&EdgeMap::from(&red.graph)).expect("edge map"))?;
    println!("reduced: {} items, {} edges", red.instance.items.len(), red.graph.len());
    Ok(())
}

fn compare(file: &Path, caps: Caps) -> CliResult {
    let inst = load(file)?;
    let report = if is_perfect_coverage(&inst) {
        exact_greedy_report(&inst, caps)?
    } else {
        exact_imperfect_report(&inst, caps)?
    };
    println!("{}", to_json(&report));
    if !report.identity_holds {
        return Err(CliError::Violation(format!(
            "accounting identity failed: {} ≠ {}",
            report.eval_cost_sum, report.price_sum
        )));
    }
    if !report.bound_holds {
        return Err(CliError::Violation(format!(
            "ratio bound failed: {} > {}·{}",
            report.greedy_expected_cost, report.bound, report.optimal_expected_cost
        )));
    }
    Ok(())
}

fn monte_carlo(file: &Path, trials: usize, seed: u64, csv: Option<&Path>, no_reduce: bool) -> CliResult {
    let inst = load(file)?;
    let run = run_trials(&inst, trials, seed, no_reduce).map_err(|e| match e {
        sscover::harness::HarnessError::Greedy { source, .. } => stuck(&inst, source),
        other => CliError::Input(other.to_string()),
    })?;
    if let Some(path) = csv {
        let mut text = String::from("trial,seed,cost\n");
        for r in &run.records {
            text.push_str(&format!("{},{},{}\n", r.trial, r.seed, r.cost.to_f64()));
        }
        write_file(path, &text)?;
    }
    println!("{}", to_json(&run.stats));
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|e| CliError::Input(format!("bad {what} `{t}`: {e}"))))
        .collect()
}

fn generate(args: &GenArgs) -> CliResult {
    let inst = match args.family {
        Family::Random => random_instance(&GenParams {
            n_items: args.items,
            n_elements: args.elements,
            max_support: args.max_support,
            cost_lo: args.cost_lo.clone(),
            cost_hi: args.cost_hi.clone(),
            coverage_mode: match args.mode {
                Mode::Perfect => CoverageMode::Perfect,
                Mode::Imperfect => CoverageMode::Imperfect,
            },
            prob_granularity: args.granularity,
            seed: args.seed,
        })
        .map_err(|e| CliError::Input(e.to_string()))?,
        Family::Tight => {
            if args.n == 0 || !args.epsilon.is_positive() {
                return Err(CliError::Input("tight family needs n ≥ 1 and epsilon > 0".into()));
            }
            tight_instance(args.n, &args.epsilon)
        }
        Family::Pointmass => {
            let sets: Vec<ElementSubset> = if args.sets.is_empty() {
                Vec::new()
            } else {
                args.sets
                    .split(';')
                    .map(|s| parse_list::<usize>(s, "element").map(ElementSubset::from_elements))
                    .collect::<Result<_, _>>()?
            };
            let costs: Vec<Rational> = parse_list(&args.costs, "cost")?;
            if costs.iter().any(|c| !c.is_positive()) {
                return Err(CliError::Input("costs must be positive".into()));
            }
            let ground = args
                .ground_size
                .unwrap_or_else(|| sets.iter().filter_map(ElementSubset::max_element).max().map_or(0, |m| m + 1));
            point_mass_embedding(ground, &sets, &costs, true).map_err(|e| CliError::Input(e.to_string()))?
        }
    };
    let text = instance_to_json(&inst);
    match &args.out {
        Some(path) => write_file(path, &text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> CliResult {
    match cli.command {
        Command::Validate { file } => validate(&file),
        Command::Marginals { file } => print_marginals(&file),
        Command::Run { file, seed, trace, no_reduce } => run(&file, seed, trace.as_deref(), no_reduce),
        Command::Reduce { file, out, edges } => reduce(&file, &out, &edges),
        Command::Compare { file, cap, dp_cap } => compare(&file, Caps { realizations: cap, dp_states: dp_cap }),
        Command::Mc { file, trials, seed, csv, no_reduce } => monte_carlo(&file, trials, seed, csv.as_deref(), no_reduce),
        Command::Gen(args) => generate(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
