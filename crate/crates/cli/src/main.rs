mod genspec;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use monothresh::audit::gap_audit;
use monothresh::cover::{automorphisms, q_star_with_group, q_threshold};
use monothresh::graphs::{
    containment_family, expectation_threshold, max_density, q_of_graph, q_of_graph_with_star,
    tree_threshold_bracket,
};
use monothresh::io::{parse_family, parse_graph, to_canonical_json};
use monothresh::measure::{
    geometric_grid, optimal_p_sweep, sweep_csv, wide_optimality_scan, AnalysisReport, Analyzer,
    SWEEP_POINTS,
};
use monothresh::simulate::{
    empirical_critical_p, estimate_mu_stream, CriticalSearchOptions, Property,
};
use monothresh::{AuditConfig, Error, MonotoneFamily, Result};

use genspec::GenSpec;

#[derive(Parser)]
#[command(
    name = "monothresh",
    version,
    about = "Thresholds of monotone set families"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Root-finding tolerance on p.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Ground-set cap for exact enumeration (hard maximum 30).
    #[arg(long, global = true, default_value_t = 24)]
    cap: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV where the command supports it.
    #[arg(long, global = true)]
    csv: bool,
    /// Sweep width parameter.
    #[arg(long, global = true, default_value_t = 0.5)]
    eps: f64,
    /// Monte Carlo trials (per estimate, or the per-probe cap for `mc --mode pc`).
    #[arg(long, global = true, default_value_t = 10_000)]
    trials: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Measure, derivative, influence and isoperimetric columns on a p-grid.
    Analyze {
        family: PathBuf,
        /// Evaluation point; repeatable. Defaults to an even grid.
        #[arg(long = "p")]
        p: Vec<f64>,
        /// Number of interior points of the even grid on (0, 1).
        #[arg(long, default_value_t = 19)]
        grid: usize,
    },
    /// Critical probability.
    Pc { family: PathBuf },
    /// Cover threshold with its witness.
    Q { family: PathBuf },
    /// Symmetric cover threshold.
    Qstar { family: PathBuf },
    /// Gap audit row comparing p_c with q.
    Audit {
        family: Option<PathBuf>,
        /// Generator spec instead of a file, e.g. dual-tribes:8:2.
        #[arg(long = "gen", conflicts_with = "family")]
        generator: Option<String>,
        /// Also compute q*.
        #[arg(long)]
        qstar: bool,
        #[arg(long, default_value_t = 1.0)]
        k_gap: f64,
    },
    /// Graph threshold reports.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Monte Carlo estimates for random graphs and hypergraphs.
    Mc(McArgs),
    /// p-grid CSV and near-optimality witness.
    Sweep {
        family: PathBuf,
        /// Constant for the scan down to eps·p_c/log2 n.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Also write the grid CSV to this file.
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Print a generated family, e.g. `gen majority:5`.
    Gen { spec: String },
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Expectation threshold with the constraint table.
    Pe { graph: PathBuf },
    /// Maximum density.
    Density { graph: PathBuf },
    /// Containment family on K_n as family JSON.
    Family {
        graph: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Cover threshold of the containment property.
    Q {
        graph: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        qstar: bool,
    },
    /// Threshold bracket for a tree pattern.
    Tree {
        graph: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        k1: f64,
        #[arg(long, default_value_t = 1.0)]
        k2: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PropertyKind {
    Subgraph,
    Hamilton,
    Trianglefactor,
    Hypermatching,
    Mindegree,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum McMode {
    Mu,
    Pc,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    property: PropertyKind,
    /// Number of vertices.
    #[arg(long)]
    n: usize,
    /// Edge size for hypergraph matching.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Pattern graph file for subgraph containment.
    #[arg(long)]
    pattern: Option<PathBuf>,
    /// Minimum degree for `mindegree`.
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, value_enum, default_value_t = McMode::Mu)]
    mode: McMode,
    /// Edge probability for `--mode mu`.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// Target bracket width for `--mode pc`.
    #[arg(long, default_value_t = 0.01)]
    width: f64,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::BadParameter(format!("cannot read {}: {e}", path.display())))
}

fn load_family(path: &Path) -> Result<MonotoneFamily> {
    parse_family(&read(path)?)
}

fn config(g: &Global) -> AuditConfig {
    let mut cfg = AuditConfig {
        eps: g.eps,
        tol_root: g.tol,
        seed: g.seed,
        ..AuditConfig::default()
    };
    cfg.caps.enum_cap = g.cap;
    cfg
}

enum Output {
    Json(Value),
    Text(String),
    /// Printed before exiting with the given code.
    JsonWithCode(Value, u8),
}

fn json_of<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn analyze(g: &Global, path: &Path, ps: &[f64], grid: usize) -> Result<Output> {
    let cfg = config(g);
    let f = load_family(path)?;
    let a = Analyzer::new(&f, &cfg.caps)?;
    let points: Vec<f64> = if ps.is_empty() {
        (1..=grid).map(|i| i as f64 / (grid + 1) as f64).collect()
    } else {
        ps.to_vec()
    };
    if let Some(&p) = points.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::DomainError(format!("p = {p} not in (0, 1)")));
    }
    let rows: Vec<AnalysisReport> = points.iter().map(|&p| a.report(p)).collect();
    Ok(if g.json {
        Output::Json(json_of(&rows))
    } else {
        Output::Text(sweep_csv(&rows))
    })
}

fn sweep(g: &Global, path: &Path, c: f64, csv_out: Option<&Path>) -> Result<Output> {
    let cfg = config(g);
    cfg.validate()?;
    let f = load_family(path)?;
    let a = Analyzer::new(&f, &cfg.caps)?;
    let p_c = a.critical_probability(cfg.tol_root);
    let lower = (f.n() as f64).powf(-cfg.eps) * p_c;
    let rows: Vec<AnalysisReport> = geometric_grid(lower, p_c, SWEEP_POINTS)
        .into_iter()
        .rev()
        .map(|p| a.report(p))
        .collect();
    let csv = sweep_csv(&rows);
    if let Some(out) = csv_out {
        fs::write(out, &csv)
            .map_err(|e| Error::BadParameter(format!("cannot write {}: {e}", out.display())))?;
    }
    if g.csv {
        return Ok(Output::Text(csv));
    }
    let witness = optimal_p_sweep(&a, cfg.eps, cfg.tol_root)?;
    let wide = wide_optimality_scan(&a, cfg.eps, c, cfg.tol_root);
    Ok(Output::Json(json!({
        "eps": cfg.eps,
        "p_c": p_c,
        "grid": {"lower": lower, "upper": p_c, "points": SWEEP_POINTS},
        "witness": witness,
        "wide_scan": wide,
    })))
}

fn mc(g: &Global, args: &McArgs) -> Result<Output> {
    let property = match args.property {
        PropertyKind::Subgraph => {
            let path = args.pattern.as_ref().ok_or_else(|| {
                Error::BadParameter("--pattern is required for subgraph containment".into())
            })?;
            Property::Subgraph {
                pattern: parse_graph(&read(path)?)?,
            }
        }
        PropertyKind::Hamilton => Property::Hamilton,
        PropertyKind::Trianglefactor => Property::TriangleFactor,
        PropertyKind::Hypermatching => Property::HyperMatching { k: args.k },
        PropertyKind::Mindegree => Property::MinDegree { d: args.d },
    };
    match args.mode {
        McMode::Mu => {
            let p = args
                .p
                .ok_or_else(|| Error::BadParameter("--p is required for --mode mu".into()))?;
            let est =
                estimate_mu_stream(&property, args.n, p, g.trials, g.seed, 0, args.confidence)?;
            Ok(Output::Json(json!({
                "property": property,
                "n": args.n,
                "mode": "mu",
                "result": est,
            })))
        }
        McMode::Pc => {
            let opts = CriticalSearchOptions {
                tol: args.width,
                confidence: args.confidence,
                max_trials: g.trials,
                ..CriticalSearchOptions::default()
            };
            let est = empirical_critical_p(&property, args.n, &opts, g.seed)?;
            let converged = est.converged;
            let report = json!({
                "property": property,
                "n": args.n,
                "mode": "pc",
                "options": opts,
                "result": est,
            });
            Ok(if converged {
                Output::Json(report)
            } else {
                let code = Error::Inconclusive(String::new()).exit_code() as u8;
                Output::JsonWithCode(report, code)
            })
        }
    }
}

fn graph(g: &Global, cmd: &GraphCommand) -> Result<Output> {
    let cfg = config(g);
    let load = |p: &Path| -> Result<_> { parse_graph(&read(p)?) };
    Ok(Output::Json(match cmd {
        GraphCommand::Pe { graph } => json_of(&expectation_threshold(&load(graph)?)?),
        GraphCommand::Density { graph } => json_of(&max_density(&load(graph)?)?),
        GraphCommand::Family { graph, n } => json_of(&containment_family(&load(graph)?, *n)?),
        GraphCommand::Q { graph, n, qstar } => {
            let h = load(graph)?;
            if *qstar {
                json_of(&q_of_graph_with_star(&h, *n, cfg.tol_root, &cfg.caps)?)
            } else {
                json_of(&q_of_graph(&h, *n, cfg.tol_root, &cfg.caps)?)
            }
        }
        GraphCommand::Tree { graph, n, k1, k2 } => {
            json_of(&tree_threshold_bracket(&load(graph)?, *n, *k1, *k2)?)
        }
    }))
}

fn run(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    let cfg = config(g);
    match &cli.command {
        Command::Analyze { family, p, grid } => analyze(g, family, p, *grid),
        Command::Pc { family } => {
            let f = load_family(family)?;
            let p_c = Analyzer::new(&f, &cfg.caps)?.critical_probability(cfg.tol_root);
            Ok(Output::Json(
                json!({"n": f.n(), "p_c": p_c, "tol": cfg.tol_root}),
            ))
        }
        Command::Q { family } => {
            let f = load_family(family)?;
            Ok(Output::Json(json_of(&q_threshold(
                &f,
                cfg.tol_root,
                &cfg.caps,
            )?)))
        }
        Command::Qstar { family } => {
            let f = load_family(family)?;
            let group = automorphisms(&f, &cfg.caps)?;
            let w = q_star_with_group(&f, &group, cfg.tol_root, &cfg.caps)?;
            let mut v = json_of(&w);
            v["group_order"] = json!(group.order());
            Ok(Output::Json(v))
        }
        Command::Audit {
            family,
            generator,
            qstar,
            k_gap,
        } => {
            let (id, f) = match (family, generator) {
                (Some(path), None) => (path.display().to_string(), load_family(path)?),
                (None, Some(spec)) => (spec.clone(), spec.parse::<GenSpec>()?.build(g.seed)?),
                _ => {
                    return Err(Error::BadParameter(
                        "give a family file or --gen SPEC".into(),
                    ))
                }
            };
            let cfg = AuditConfig {
                k_gap: *k_gap,
                ..cfg
            };
            Ok(Output::Json(json_of(&gap_audit(&id, &f, &cfg, *qstar)?)))
        }
        Command::Graph { command } => graph(g, command),
        Command::Mc(args) => mc(g, args),
        Command::Sweep { family, c, csv_out } => sweep(g, family, *c, csv_out.as_deref()),
        Command::Gen { spec } => {
            let f = spec.parse::<GenSpec>()?.build(g.seed)?;
            Ok(Output::Json(json_of(&f)))
        }
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
        Err(e) => eprintln!("error: cannot write output: {e}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Output::Json(v)) => {
            emit(&format!("{}\n", to_canonical_json(&v)));
            ExitCode::SUCCESS
        }
        Ok(Output::Text(t)) => {
            emit(&t);
            ExitCode::SUCCESS
        }
        Ok(Output::JsonWithCode(v, code)) => {
            emit(&format!("{}\n", to_canonical_json(&v)));
            eprintln!("warning: Monte Carlo search was inconclusive; the reported bracket is wider than requested");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
