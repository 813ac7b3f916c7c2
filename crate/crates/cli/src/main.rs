//! Command-line front end: load instances, run planners, compute curvature
//! and clique covers, emit certificates and per-cell tables.
//!
//! Exit codes: 0 success (certificates: bound held), 1 certificate failed,
//! 2 validation/domain/parse error, 3 enumeration budget exceeded,
//! 4 uncertifiable (unbounded eta or vacuous beta = 1 bound).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use greedybound::bos::{cell_curvature_table, BosObjective, GridMap};
use greedybound::bounds::{brute_force_optimum, certify, CertifyOptions, Mode};
use greedybound::curvature::{
    curvature_report_with_budget, total_curvature, total_curvature_unchecked,
    DEFAULT_CURVATURE_BUDGET,
};
use greedybound::graphs::{fractional_clique_cover, CommGraph};
use greedybound::greedy::{greedy_full, greedy_limited, SelectionPolicy};
use greedybound::matroid::{selection_mask, PartitionMatroid};
use greedybound::setfn::{tabular_from_json, GroundElement, GroundSet, SetFunctionOracle};
use greedybound::suite::{run_t1_suite, run_t2_suite, SuiteConfig};
use greedybound::{Error, Result};

#[derive(Parser)]
#[command(name = "greedybound", version, about = "Greedy planning with curvature-based suboptimality certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the greedy planner and write the trace.
    Plan(PlanArgs),
    /// Certify a greedy run against its theorem bound, or run a randomized suite.
    Certify(CertifyArgs),
    /// Compute generalized/inverse generalized curvature (and total curvature
    /// when the objective is submodular).
    Curvature(CurvatureArgs),
    /// Fractional clique cover number of a communication graph.
    Cliquecover(CliquecoverArgs),
    /// Per-cell benefit and curvature table for a search map.
    BosTable(BosTableArgs),
    /// Brute-force optimal joint plan.
    Oracle(OracleArgs),
}

/// Instance selection shared by planning-style commands: either a tabular
/// set-function file, or a map plus a candidate-paths file.
#[derive(Args)]
struct InstanceArgs {
    /// Tabular set-function JSON (elements + total value table).
    #[arg(long, conflicts_with_all = ["map", "paths"])]
    input: Option<PathBuf>,
    /// Search-map JSON; requires --paths.
    #[arg(long, requires = "paths")]
    map: Option<PathBuf>,
    /// Candidate-paths JSON ({"elements": [...]}); requires --map.
    #[arg(long, requires = "map")]
    paths: Option<PathBuf>,
    /// Truncation cap: visits to a cell beyond this earn nothing.
    #[arg(long)]
    k_cap: Option<usize>,
    /// Agent planning order as a permutation of 1..=N, e.g. 2,1,3.
    #[arg(long, value_delimiter = ',')]
    agent_order: Option<Vec<usize>>,
}

#[derive(Args)]
struct SelectorArgs {
    /// Selection policy: exact or epsilon.
    #[arg(long, default_value = "exact")]
    selector: String,
    /// Slack for the epsilon selector.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
}

impl SelectorArgs {
    fn policy(&self) -> Result<SelectionPolicy> {
        match self.selector.as_str() {
            "exact" => Ok(SelectionPolicy::Exact),
            "epsilon" => SelectionPolicy::epsilon(self.eps),
            other => Err(Error::Domain(format!(
                "unknown selector {other:?}; expected exact or epsilon"
            ))),
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    selector: SelectorArgs,
    /// full: agents see all predecessors; limited: in-neighbors only.
    #[arg(long, default_value = "full")]
    mode: String,
    /// Communication graph JSON (limited mode).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Write the trace JSON here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    selector: SelectorArgs,
    #[arg(long, default_value = "full")]
    mode: String,
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Planner-declared eta; the certificate uses max(measured, declared).
    #[arg(long)]
    declared_eta: Option<f64>,
    /// Curvature enumeration budget (ground-set size).
    #[arg(long, default_value_t = DEFAULT_CURVATURE_BUDGET)]
    budget: usize,
    /// Run a randomized suite instead of certifying one instance: t1 or t2.
    #[arg(long)]
    suite: Option<String>,
    /// Suite size.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Master seed for the suite generators.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Epsilon selectors exercised by the suite.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.25, 0.5])]
    eps_list: Vec<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CurvatureArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = DEFAULT_CURVATURE_BUDGET)]
    budget: usize,
    /// Evaluate the total-curvature formula even if submodularity fails.
    #[arg(long)]
    force_total: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CliquecoverArgs {
    /// Communication graph JSON.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BosTableArgs {
    /// Search-map JSON.
    #[arg(long)]
    map: PathBuf,
    /// Visit budgets to tabulate, e.g. --k 1 2 3 4.
    #[arg(long, num_args = 1.., required = true)]
    k: Vec<usize>,
    #[arg(long)]
    k_cap: Option<usize>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Applies --agent-order by relabeling blocks: the b-th planned block is the
/// one the user listed b-th.
fn permute_blocks(elements: &mut [GroundElement], order: &[usize]) -> Result<()> {
    let n = elements.iter().map(|e| e.block).max().unwrap_or(0);
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::Domain(format!(
            "--agent-order lists {} blocks, instance has {n}",
            order.len()
        )));
    }
    for &b in order {
        if b == 0 || b > n || seen[b - 1] {
            return Err(Error::Domain(format!("--agent-order must be a permutation of 1..={n}")));
        }
        seen[b - 1] = true;
    }
    let mut new_block = vec![0usize; n + 1];
    for (position, &old) in order.iter().enumerate() {
        new_block[old] = position + 1;
    }
    for e in elements.iter_mut() {
        e.block = new_block[e.block];
    }
    Ok(())
}

fn load_instance(args: &InstanceArgs) -> Result<SetFunctionOracle> {
    match (&args.input, &args.map) {
        (Some(input), None) => {
            let text = read(input)?;
            if let Some(order) = &args.agent_order {
                let mut value: serde_json::Value = serde_json::from_str(&text)?;
                let elements = value
                    .get_mut("elements")
                    .and_then(|v| v.as_array_mut())
                    .ok_or_else(|| Error::Validation("missing elements array".into()))?;
                let mut parsed: Vec<GroundElement> = elements
                    .iter()
                    .map(|e| serde_json::from_value(e.clone()).map_err(Error::Json))
                    .collect::<Result<_>>()?;
                permute_blocks(&mut parsed, order)?;
                for (slot, e) in elements.iter_mut().zip(&parsed) {
                    slot["block"] = serde_json::json!(e.block);
                }
                tabular_from_json(&value.to_string())
            } else {
                tabular_from_json(&text)
            }
        }
        (None, Some(map_path)) => {
            let map = GridMap::from_json(&read(map_path)?)?;
            let paths_path = args.paths.as_ref().expect("clap enforces --paths with --map");
            let file: serde_json::Value = serde_json::from_str(&read(paths_path)?)?;
            let mut elements: Vec<GroundElement> = serde_json::from_value(
                file.get("elements")
                    .cloned()
                    .ok_or_else(|| Error::Validation("missing elements array".into()))?,
            )?;
            if let Some(order) = &args.agent_order {
                permute_blocks(&mut elements, order)?;
            }
            let ground = Arc::new(GroundSet::new(elements)?);
            Ok(BosObjective::new(&map, ground, args.k_cap)?.into_oracle())
        }
        _ => Err(Error::Domain(
            "provide either --input or --map with --paths".into(),
        )),
    }
}

fn parse_mode(mode: &str) -> Result<Mode> {
    match mode {
        "full" => Ok(Mode::Full),
        "limited" => Ok(Mode::Limited),
        other => Err(Error::Domain(format!("unknown mode {other:?}; expected full or limited"))),
    }
}

fn emit(output: &Option<PathBuf>, content: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, content).map_err(Error::Io),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn to_pretty<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn cmd_plan(args: &PlanArgs) -> Result<ExitCode> {
    let oracle = load_instance(&args.instance)?;
    let matroid = PartitionMatroid::new(oracle.ground_arc());
    let policy = args.selector.policy()?;
    let trace = match parse_mode(&args.mode)? {
        Mode::Full => greedy_full(&oracle, &matroid, policy)?,
        Mode::Limited => {
            let graph_path = args
                .graph
                .as_ref()
                .ok_or_else(|| Error::Domain("limited mode requires --graph".into()))?;
            let graph = CommGraph::from_json(&read(graph_path)?)?;
            greedy_limited(&oracle, &matroid, &graph, policy)?
        }
    };
    emit(&args.output, &to_pretty(&trace)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_certify(args: &CertifyArgs) -> Result<ExitCode> {
    if let Some(which) = &args.suite {
        let config = SuiteConfig { seed: args.seed, instances: args.n, ..SuiteConfig::default() };
        let outcome = match which.as_str() {
            "t1" => run_t1_suite(&config, &args.eps_list)?,
            "t2" => run_t2_suite(&config, &args.eps_list)?,
            other => return Err(Error::Domain(format!("unknown suite {other:?}; expected t1 or t2"))),
        };
        println!(
            "SUITE {which} instances={} certificates={} held={} vacuous={} min_margin={:.6}",
            args.n, outcome.certificates, outcome.held, outcome.vacuous, outcome.min_margin
        );
        if let Some(path) = &args.output {
            fs::write(path, to_pretty(&outcome)?)?;
        }
        return Ok(if outcome.all_hold() { ExitCode::SUCCESS } else { ExitCode::FAILURE });
    }

    let oracle = load_instance(&args.instance)?;
    let matroid = PartitionMatroid::new(oracle.ground_arc());
    let graph = match &args.graph {
        Some(path) => Some(CommGraph::from_json(&read(path)?)?),
        None => None,
    };
    let options = CertifyOptions {
        mode: parse_mode(&args.mode)?,
        graph: graph.as_ref(),
        policy: args.selector.policy()?,
        declared_eta: args.declared_eta,
        curvature_budget: args.budget,
    };
    let cert = certify(&oracle, &matroid, &options)?;
    let verdict = if cert.vacuous {
        "VACUOUS"
    } else if cert.holds {
        "HOLDS"
    } else {
        "FAILS"
    };
    println!("{verdict} ratio={:.6} bound={:.6}", cert.ratio, cert.bound);
    if let Some(path) = &args.output {
        fs::write(path, to_pretty(&cert)?)?;
    }
    Ok(if cert.vacuous {
        ExitCode::from(4)
    } else if cert.holds {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_curvature(args: &CurvatureArgs) -> Result<ExitCode> {
    let oracle = load_instance(&args.instance)?;
    let mut report = curvature_report_with_budget(&oracle, args.budget)?;
    let total = if args.force_total {
        Some(total_curvature_unchecked(&oracle)?)
    } else {
        match total_curvature(&oracle) {
            Ok(t) => Some(t),
            Err(Error::Validation(_)) => None,
            Err(e) => return Err(e),
        }
    };
    if let Some((alpha_c, witness)) = total {
        report.alpha_c = Some(alpha_c);
        report.alpha_c_witness = Some(witness);
    }
    emit(&args.output, &to_pretty(&report)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_cliquecover(args: &CliquecoverArgs) -> Result<ExitCode> {
    let graph = CommGraph::from_json(&read(&args.graph)?)?;
    let solution = fractional_clique_cover(&graph)?;
    println!("{}", solution.objective);
    if let Some(path) = &args.output {
        fs::write(path, to_pretty(&solution)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bos_table(args: &BosTableArgs) -> Result<ExitCode> {
    let map = GridMap::from_json(&read(&args.map)?)?;
    let table = cell_curvature_table(&map, &args.k, args.k_cap)?;
    emit(&args.output, table.to_csv().trim_end())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(args: &OracleArgs) -> Result<ExitCode> {
    let oracle = load_instance(&args.instance)?;
    let matroid = PartitionMatroid::new(oracle.ground_arc());
    let (selection, value) = brute_force_optimum(&oracle, &matroid)?;
    let ids = oracle.ground().ids_from_mask(selection_mask(&selection));
    let payload = serde_json::json!({ "optimal": ids, "value": value });
    emit(&args.output, &serde_json::to_string_pretty(&payload)?)?;
    Ok(ExitCode::SUCCESS)
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::Capacity(_) => ExitCode::from(3),
        Error::Uncertifiable(_) | Error::Degenerate(_) => ExitCode::from(4),
        _ => ExitCode::from(2),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Curvature(args) => cmd_curvature(args),
        Command::Cliquecover(args) => cmd_cliquecover(args),
        Command::BosTable(args) => cmd_bos_table(args),
        Command::Oracle(args) => cmd_oracle(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}
