//! Command-line surface: validate inputs, reduce graphs, run oracles,
//! sweep breakpoint-growth experiments, and check separator-graph
//! preservation.
//!
//! Exit codes: 0 success, 1 validation or verification failure, 2 usage or
//! parse error.

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use starmesh::decomposition::{balanced_separator, heuristic_decomposition, TreeDecomposition};
use starmesh::experiment::{run_experiment, ExperimentConfig, GeneratorKind, CSV_HEADER};
use starmesh::io::{parse_graph, parse_td};
use starmesh::oracle::{enumerate_paths_arrival, td_dijkstra, OracleError, OracleResult};
use starmesh::rational::{fmt_rat, midpoint, parse_rat};
use starmesh::reduction::{
    contract_to_separator_graph, reduce_to_terminals, reduce_with_observer, Reduced,
};
use starmesh::{rat_int, Arrival, Graph, Rat};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "starmesh",
    about = "Exact end-to-end arrival functions via star-mesh reduction",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GeneratorArg {
    Layered,
    SeriesParallel,
    RandomPartialKtree,
}

impl From<GeneratorArg> for GeneratorKind {
    fn from(g: GeneratorArg) -> Self {
        match g {
            GeneratorArg::Layered => GeneratorKind::Layered,
            GeneratorArg::SeriesParallel => GeneratorKind::SeriesParallel,
            GeneratorArg::RandomPartialKtree => GeneratorKind::RandomPartialKtree,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check FIFO validity of a graph and, optionally, a tree decomposition.
    Validate {
        graph: PathBuf,
        /// Tree decomposition file (PACE-style `s td` format).
        #[arg(long)]
        td: Option<PathBuf>,
    },
    /// Reduce a graph to its end-to-end arrival functions.
    Reduce {
        graph: PathBuf,
        /// Tree decomposition file; computed heuristically when absent.
        #[arg(long)]
        td: Option<PathBuf>,
        /// Verify after every transformation that the s-d arrival is
        /// unchanged (small instances only).
        #[arg(long)]
        check_steps: bool,
        /// Print every transformation step.
        #[arg(long)]
        emit_trace: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Run the independent oracles: arrival tables for given departure
    /// times, or the full enumerated function when no times are given.
    Oracle {
        graph: PathBuf,
        /// Departure times (exact rationals, e.g. `0 5/2 7`).
        times: Vec<String>,
    },
    /// Generate instance families, reduce them, and emit growth statistics.
    Experiment {
        #[arg(long, value_enum)]
        generator: GeneratorArg,
        /// Vertex counts: comma-separated values or inclusive ranges,
        /// e.g. `10,20,30` or `10..60,80`.
        #[arg(long)]
        n: String,
        /// Width parameter (layer size, or k for partial k-trees).
        #[arg(long, default_value_t = 2)]
        w: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        pieces_per_edge: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
    },
    /// Build the separator graph and check it preserves the end-to-end
    /// arrival function exactly.
    Claim1 {
        graph: PathBuf,
        #[arg(long)]
        td: PathBuf,
    },
}

/// Failure modes mapped to exit codes.
enum CliError {
    /// Exit 2: bad usage, unreadable or unparseable input.
    Usage(String),
    /// Exit 1: input invalid or a verification failed.
    Verification(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
    fn verification(msg: impl Into<String>) -> Self {
        CliError::Verification(msg.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { graph, td } => cmd_validate(&graph, td.as_deref()),
        Command::Reduce { graph, td, check_steps, emit_trace, format } => {
            cmd_reduce(&graph, td.as_deref(), check_steps, emit_trace, format)
        }
        Command::Oracle { graph, times } => cmd_oracle(&graph, &times),
        Command::Experiment { generator, n, w, seed, pieces_per_edge, format } => {
            cmd_experiment(generator.into(), &n, w, seed, pieces_per_edge, format)
        }
        Command::Claim1 { graph, td } => cmd_claim1(&graph, &td),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Verification(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let text = read_file(path)?;
    parse_graph(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn load_td(path: &Path) -> Result<TreeDecomposition, CliError> {
    let text = read_file(path)?;
    parse_td(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn cmd_validate(graph_path: &Path, td_path: Option<&Path>) -> Result<(), CliError> {
    let g = load_graph(graph_path)?;
    let mut failed = false;
    for v in g.validate() {
        println!("{v}");
        failed = true;
    }
    if let Some(td_path) = td_path {
        let td = load_td(td_path)?;
        for v in td.validate(&g) {
            println!("{v}");
            failed = true;
        }
    }
    if failed {
        Err(CliError::verification("validation failed".to_string()))
    } else {
        println!("ok");
        Ok(())
    }
}

fn decomposition_for(g: &Graph, td_path: Option<&Path>) -> Result<TreeDecomposition, CliError> {
    match td_path {
        None => Ok(heuristic_decomposition(g)),
        Some(path) => {
            let td = load_td(path)?;
            let violations = td.validate(g);
            if !violations.is_empty() {
                let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                return Err(CliError::verification(lines.join("\n")));
            }
            Ok(td)
        }
    }
}

fn cmd_reduce(
    graph_path: &Path,
    td_path: Option<&Path>,
    check_steps: bool,
    emit_trace: bool,
    format: OutputFormat,
) -> Result<(), CliError> {
    let g = load_graph(graph_path)?;
    let fifo = g.validate();
    if !fifo.is_empty() {
        let lines: Vec<String> = fifo.iter().map(|v| v.to_string()).collect();
        return Err(CliError::verification(lines.join("\n")));
    }
    let td = decomposition_for(&g, td_path)?;

    let reduced = if check_steps {
        let (s, d) = g.terminals();
        let est = enumerate_paths_arrival(&g, s, d).map_err(|e| match e {
            OracleError::InstanceTooLarge { .. } => {
                CliError::usage(format!("--check-steps: {e}"))
            }
            other => CliError::verification(other.to_string()),
        })?;
        let mut grid: Vec<Rat> = vec![rat_int(0)];
        let bps: Vec<Rat> = est.breakpoints().into_iter().map(|b| b.t).collect();
        for w in bps.windows(2) {
            grid.push(midpoint(&w[0], &w[1]));
        }
        grid.push(bps.last().map_or(rat_int(1), |last| last + rat_int(1)));
        grid.extend(bps);
        grid.sort();
        grid.dedup();
        let baseline: Vec<Arrival> = grid
            .iter()
            .map(|t| td_dijkstra(&g, s, t).map(|m| m[&d].clone()))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::verification(e.to_string()))?;
        let mut observer = |current: &Graph, step: &starmesh::reduction::ReductionStep| {
            for (t, want) in grid.iter().zip(&baseline) {
                let arrivals = td_dijkstra(current, s, t).map_err(|e| e.to_string())?;
                if &arrivals[&d] != want {
                    return Err(format!(
                        "after `{step}`: arrival at t = {} is {}, expected {}",
                        fmt_rat(t),
                        arrivals[&d],
                        want
                    ));
                }
            }
            Ok(())
        };
        reduce_with_observer(&g, &td, Some(&mut observer))
            .map_err(|e| CliError::verification(format!("step verification failed: {e}")))?
    } else {
        reduce_to_terminals(&g, &td).map_err(|e| CliError::verification(e.to_string()))?
    };

    print_reduced(&reduced, emit_trace, format)
}

fn print_reduced(r: &Reduced, emit_trace: bool, format: OutputFormat) -> Result<(), CliError> {
    match format {
        OutputFormat::Text => {
            println!("A_sd: {}", r.forward);
            println!("A_ds: {}", r.backward);
            println!("breakpoints_sd: {}", r.forward.breakpoint_count());
            println!("breakpoints_ds: {}", r.backward.breakpoint_count());
            println!("width: {}", r.width);
            println!("{}", r.trace.summary());
            if emit_trace {
                for (i, step) in r.trace.steps.iter().enumerate() {
                    println!("step {:>4}: {step}", i + 1);
                }
            }
            Ok(())
        }
        OutputFormat::Json => {
            let mut obj = json!({
                "a_sd": r.forward.to_string(),
                "a_ds": r.backward.to_string(),
                "breakpoints_sd": r.forward.breakpoint_count(),
                "breakpoints_ds": r.backward.breakpoint_count(),
                "width": r.width,
                "star_mesh": r.trace.star_mesh_count,
                "parallel": r.trace.parallel_count,
                "self_loop": r.trace.self_loop_count,
                "max_star_degree": r.trace.max_star_degree,
                "max_breakpoints": r.trace.max_breakpoints,
            });
            if emit_trace {
                obj["trace"] = json!(r
                    .trace
                    .steps
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>());
            }
            println!("{}", serde_json::to_string_pretty(&obj).expect("serializable"));
            Ok(())
        }
        OutputFormat::Csv => Err(CliError::usage("reduce does not support csv output")),
    }
}

fn cmd_oracle(graph_path: &Path, times: &[String]) -> Result<(), CliError> {
    let g = load_graph(graph_path)?;
    let result = if times.is_empty() {
        let (s, d) = g.terminals();
        let f = enumerate_paths_arrival(&g, s, d).map_err(|e| match e {
            OracleError::InstanceTooLarge { .. } => CliError::usage(e.to_string()),
            other => CliError::verification(other.to_string()),
        })?;
        OracleResult::FullFunction(f)
    } else {
        let mut parsed: Vec<Rat> = Vec::new();
        for tok in times {
            let t = parse_rat(tok).map_err(|e| CliError::usage(e.to_string()))?;
            if t < rat_int(0) {
                return Err(CliError::usage(format!("departure time {tok} is negative")));
            }
            parsed.push(t);
        }
        let (s, _) = g.terminals();
        let mut rows = Vec::new();
        for t in parsed {
            let arrivals =
                td_dijkstra(&g, s, &t).map_err(|e| CliError::verification(e.to_string()))?;
            rows.push((t, arrivals));
        }
        OracleResult::ArrivalTable(rows)
    };
    match result {
        OracleResult::FullFunction(f) => {
            println!("A_sd: {f}");
            println!("breakpoints: {}", f.breakpoint_count());
        }
        OracleResult::ArrivalTable(rows) => {
            for (t, arrivals) in rows {
                println!("departure {}:", fmt_rat(&t));
                for (v, a) in arrivals {
                    println!("  {v} {a}");
                }
            }
        }
    }
    Ok(())
}

/// Expands `10,20..23,40` into a sorted deduplicated list.
fn parse_n_list(list: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in list.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        match part.split_once("..") {
            None => out.push(
                part.parse::<usize>()
                    .map_err(|_| CliError::usage(format!("invalid n value `{part}`")))?,
            ),
            Some((a, b)) => {
                let a = a
                    .parse::<usize>()
                    .map_err(|_| CliError::usage(format!("invalid range start `{a}`")))?;
                let b = b
                    .parse::<usize>()
                    .map_err(|_| CliError::usage(format!("invalid range end `{b}`")))?;
                if a > b {
                    return Err(CliError::usage(format!("empty range `{part}`")));
                }
                out.extend(a..=b);
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::usage("no n values given"));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn cmd_experiment(
    generator: GeneratorKind,
    n_list: &str,
    w: usize,
    seed: u64,
    pieces_per_edge: usize,
    format: OutputFormat,
) -> Result<(), CliError> {
    let ns = parse_n_list(n_list)?;
    let mut rows = Vec::new();
    for n in ns {
        let config = ExperimentConfig { generator, n, width: w, seed, pieces_per_edge };
        config.validate().map_err(|e| CliError::usage(e.to_string()))?;
        let row = run_experiment(&config).map_err(|e| CliError::verification(e.to_string()))?;
        rows.push(row);
    }
    match format {
        OutputFormat::Csv | OutputFormat::Text => {
            println!("{CSV_HEADER}");
            for row in rows {
                println!("{}", row.to_csv());
            }
        }
        OutputFormat::Json => {
            let arr: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "n": r.n,
                        "w": r.w,
                        "K": r.total_pieces,
                        "breakpoints": r.breakpoints,
                        "star_mesh_count": r.star_mesh_count,
                        "parallel_count": r.parallel_count,
                        "max_degree": r.max_degree,
                        "wall_time": r.wall_time_secs,
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&arr).expect("serializable"));
        }
    }
    Ok(())
}

fn cmd_claim1(graph_path: &Path, td_path: &Path) -> Result<(), CliError> {
    let g = load_graph(graph_path)?;
    let td = load_td(td_path)?;
    let violations = td.validate(&g);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::verification(lines.join("\n")));
    }
    let w = td.width();
    if g.vertex_count() <= 2 * w + 2 {
        return Err(CliError::usage(format!(
            "graph too small for the separator path: need more than 2w+2 = {} vertices, have {}",
            2 * w + 2,
            g.vertex_count()
        )));
    }
    let sep = balanced_separator(&g, &td).map_err(|e| CliError::usage(e.to_string()))?;
    let contracted = contract_to_separator_graph(&g, &sep.separator, &sep.side_a, &sep.side_b)
        .map_err(|e| CliError::verification(e.to_string()))?;
    let original =
        reduce_to_terminals(&g, &td).map_err(|e| CliError::verification(e.to_string()))?;
    let separator_td = heuristic_decomposition(&contracted);
    let via_separator = reduce_to_terminals(&contracted, &separator_td)
        .map_err(|e| CliError::verification(e.to_string()))?;

    let sep_list: Vec<String> = sep.separator.iter().map(|v| v.to_string()).collect();
    println!("separator: {}", sep_list.join(" "));
    println!("side_sizes: {} {}", sep.side_a.len(), sep.side_b.len());
    println!("a_sd_original: {}", original.forward);
    println!("a_sd_separator: {}", via_separator.forward);
    println!("breakpoints_original: {}", original.forward.breakpoint_count());
    println!("breakpoints_separator: {}", via_separator.forward.breakpoint_count());
    let equal = original.forward == via_separator.forward;
    println!("equal: {equal}");
    if equal {
        Ok(())
    } else {
        Err(CliError::verification("separator graph changed the end-to-end function"))
    }
}
