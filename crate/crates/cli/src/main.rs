mod run;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qsg_core::config::{GraphSpec, OutputFormat, RangeSpec, RunConfig};
use qsg_core::{CouplingDistribution, Hypergraph, LimitLaw};
use serde_json::json;

use run::CliError;

#[derive(Parser)]
#[command(name = "qsg", version, about = "Density-of-states and moment experiments for random Pauli Hamiltonians on hypergraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArgs {
    /// chain, complete, star, p-uniform or circulant
    #[arg(long)]
    graph: Option<String>,
    /// Number of sites
    #[arg(long)]
    n: Option<u32>,
    /// Hyperedge size for p-uniform
    #[arg(long)]
    p: Option<u32>,
    /// Circulant offsets, comma separated
    #[arg(long, value_delimiter = ',')]
    offsets: Vec<u32>,
    /// Hypergraph text file, in place of --graph
    #[arg(long, conflicts_with = "graph")]
    graph_file: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value = "gauss")]
    dist: CouplingDistribution,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct LawArgs {
    /// gaussian, semicircle, star or q-interp (with --lambda)
    #[arg(long)]
    law: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct OutArgs {
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Sample and diagonalize; emit a pooled histogram or raw eigenvalues
    Spectrum {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[arg(long, default_value_t = 101)]
        bins: usize,
        #[command(flatten)]
        law: LawArgs,
        /// Emit every eigenvalue instead of the histogram
        #[arg(long)]
        eigenvalues: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Empirical, exact and limit-law moments side by side
    Moments {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, default_value_t = 100)]
        samples: u64,
        #[arg(long, default_value_t = 8)]
        k_max: u32,
        /// Add the exact combinatorial expectation
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        law: LawArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Limit-law moments, or densities with --density
    Laws {
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 8)]
        k_max: u32,
        #[arg(long)]
        density: bool,
        #[arg(long, default_value_t = 101)]
        bins: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Pair partition counts and crossing histograms up to length k
    Partitions {
        #[arg(long, default_value_t = 8)]
        k: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Moment error against d_max/e across a graph family
    Convergence {
        #[arg(long)]
        family: String,
        /// Sizes as a:b:step
        #[arg(long)]
        n: RangeSpec,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        offsets: Vec<u32>,
        #[command(flatten)]
        sample: SampleArgs,
        /// Monte Carlo samples per size, on top of the exact value
        #[arg(long, default_value_t = 0)]
        samples: u64,
        /// Moment order
        #[arg(long, default_value_t = 4)]
        k: u32,
        #[command(flatten)]
        law: LawArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Dump sampled coefficients for audit
    Coefficients {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Re-run an artifact from its embedded config and compare byte for byte
    Replay { artifact: PathBuf },
}

fn graph_spec(a: &GraphArgs) -> Result<GraphSpec, CliError> {
    if let Some(path) = &a.graph_file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let g = Hypergraph::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        return Ok(GraphSpec::from_hypergraph(&g, Some(path.display().to_string())));
    }
    let kind = a.graph.as_deref().ok_or_else(|| CliError::Config("one of --graph or --graph-file is required".into()))?;
    Ok(GraphSpec::from_parts(kind, a.n, a.p, &a.offsets)?)
}

fn law_name(a: &LawArgs) -> Result<Option<String>, CliError> {
    let law = match (a.law.as_deref(), a.lambda) {
        (None, None) => return Ok(None),
        (None | Some("q-interp"), Some(l)) => LimitLaw::q_interp(l)?,
        (Some("q-interp"), None) => return Err(CliError::Config("q-interp needs --lambda".into())),
        (Some(name), _) => name.parse::<LimitLaw>()?,
    };
    Ok(Some(law.name()))
}

fn base_config(command: &str, out: &OutArgs) -> RunConfig {
    RunConfig {
        command: command.into(),
        graph: None,
        n_range: None,
        dist: CouplingDistribution::StandardNormal,
        samples: 0,
        seed: 0,
        k_max: 0,
        bins: None,
        lambda: None,
        law: None,
        options: serde_json::Map::new(),
        format: match out.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        },
        version: env!("CARGO_PKG_VERSION").into(),
    }
}

fn build_config(cmd: &Command) -> Result<(RunConfig, Option<PathBuf>), CliError> {
    let (cfg, out) = match cmd {
        Command::Spectrum { graph, sample, samples, bins, law, eigenvalues, out } => {
            let mut c = base_config("spectrum", out);
            c.graph = Some(graph_spec(graph)?);
            c.dist = sample.dist;
            c.seed = sample.seed;
            c.samples = *samples;
            c.bins = Some(*bins);
            c.law = law_name(law)?;
            c.options.insert("eigenvalues".into(), json!(eigenvalues));
            (c, out)
        }
        Command::Moments { graph, sample, samples, k_max, oracle, law, out } => {
            let mut c = base_config("moments", out);
            c.graph = Some(graph_spec(graph)?);
            c.dist = sample.dist;
            c.seed = sample.seed;
            c.samples = *samples;
            c.k_max = *k_max;
            c.law = law_name(law)?;
            c.options.insert("oracle".into(), json!(oracle));
            (c, out)
        }
        Command::Laws { lambda, k_max, density, bins, out } => {
            let mut c = base_config("laws", out);
            if let Some(l) = lambda {
                LimitLaw::q_interp(*l)?;
            }
            c.lambda = *lambda;
            c.k_max = *k_max;
            c.bins = Some(*bins);
            c.options.insert("density".into(), json!(density));
            (c, out)
        }
        Command::Partitions { k, out } => {
            let mut c = base_config("partitions", out);
            c.k_max = *k;
            (c, out)
        }
        Command::Convergence { family, n, p, offsets, sample, samples, k, law, out } => {
            let mut c = base_config("convergence", out);
            c.graph = Some(GraphSpec::from_parts(family, Some(n.start), *p, offsets)?);
            c.n_range = Some(*n);
            c.dist = sample.dist;
            c.seed = sample.seed;
            c.samples = *samples;
            c.k_max = *k;
            c.law = law_name(law)?;
            (c, out)
        }
        Command::Coefficients { graph, sample, samples, out } => {
            let mut c = base_config("coefficients", out);
            c.graph = Some(graph_spec(graph)?);
            c.dist = sample.dist;
            c.seed = sample.seed;
            c.samples = *samples;
            (c, out)
        }
        Command::Replay { .. } => unreachable!("replay has no config of its own"),
    };
    Ok((cfg, out.out.clone()))
}

fn set_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("QSG_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("QSG_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn replay(path: &PathBuf) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let cfg = qsg_core::config::parse_artifact_config(&text)?;
    let fresh = run::execute(&cfg)?;
    let mut failures = fresh.failures;
    if fresh.text != text {
        let line = fresh.text.lines().zip(text.lines()).position(|(a, b)| a != b).map_or_else(
            || fresh.text.lines().count().min(text.lines().count()) + 1,
            |i| i + 1,
        );
        failures.push(format!("replay differs from {} at line {line}", path.display()));
    } else {
        println!("{}", json!({ "replay": "identical", "artifact": path.display().to_string(), "command": cfg.command }));
    }
    Ok(failures)
}

fn main_inner(cli: Cli) -> Result<(String, Vec<String>), CliError> {
    set_threads()?;
    if let Command::Replay { artifact } = &cli.command {
        return Ok(("replay".into(), replay(artifact)?));
    }
    let (cfg, out) = build_config(&cli.command)?;
    let result = run::execute(&cfg)?;
    match out {
        Some(p) => std::fs::write(&p, &result.text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => print!("{}", result.text),
    }
    Ok((cfg.command, result.failures))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok((_, failures)) if failures.is_empty() => ExitCode::SUCCESS,
        Ok((command, failures)) => {
            eprintln!("{}", json!({ "status": "contract-failure", "command": command, "failures": failures }));
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("{}", json!({ "status": "error", "kind": e.kind(), "message": e.to_string() }));
            ExitCode::from(e.exit_code())
        }
    }
}
