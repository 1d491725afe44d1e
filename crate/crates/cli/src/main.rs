//! graphanon: anonymize graphs with clustering or modification methods and
//! evaluate information loss and re-identification risk.

mod config;
mod rank;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use graphanon::anonymize::Method;
use graphanon::community::louvain;
use graphanon::evaluate::QueryId;
use graphanon::metrics::{clustering_coefficients, path_stats};
use graphanon::similarity::{save_weights, train_weights, SaConfig};
use graphanon::{Graph, GraphError, Result};

use config::RunConfig;

/// Env var naming a directory searched for datasets given by bare file name.
const DATA_DIR_ENV: &str = "GRAPHANON_DATA_DIR";

const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "graphanon", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print graph statistics (nodes, edges, degree, cc, paths, communities)
    Stats {
        dataset: PathBuf,
        #[arg(long, default_value_t = config::DEFAULT_SEED)]
        seed: u64,
    },
    /// Train similarity weights by simulated annealing and save them
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = config::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = graphanon::similarity::DEFAULT_SAMPLE_SIZE)]
        sample_size: usize,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 50)]
        proposals: usize,
    },
    /// Anonymize over a method x k grid and write report files
    Run(RunArgs),
    /// Rank methods over a completed run directory
    Rank { dir: PathBuf },
    /// Risk-only evaluation of an external published graph + provenance pair
    Attack {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        provenance: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// key=value config file; flags below override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// may repeat; defaults to all five methods
    #[arg(long = "method")]
    methods: Vec<String>,
    /// may repeat; defaults to 2,4,8,16
    #[arg(long = "k")]
    ks: Vec<usize>,
    #[arg(long)]
    hub_pct: Option<f64>,
    #[arg(long)]
    bridge_pct: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sample_size: Option<usize>,
}

fn resolve_dataset(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    if let Ok(dir) = std::env::var(DATA_DIR_ENV) {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_path_buf()
}

fn cmd_stats(dataset: &Path, seed: u64) -> Result<()> {
    let g = Graph::load_edge_list(&resolve_dataset(dataset))?;
    println!("nodes\tedges\tavg_degree\tmean_cc\tapl\tdiameter\tcommunities");
    if g.node_count() == 0 {
        return Ok(());
    }
    let n = g.node_count();
    let avg_degree = 2.0 * g.edge_count() as f64 / n as f64;
    let ccs = clustering_coefficients(&g);
    let mean_cc = ccs.iter().sum::<f64>() / n as f64;
    let (apl, diameter) = match path_stats(&g) {
        Ok(ps) => (
            format!("{:.3}", ps.average_path_length),
            ps.diameter.to_string(),
        ),
        Err(_) => ("-".to_string(), "-".to_string()),
    };
    let communities = louvain(&g, 1.0, seed)?.community_count;
    println!(
        "{n}\t{}\t{avg_degree:.3}\t{mean_cc:.3}\t{apl}\t{diameter}\t{communities}",
        g.edge_count()
    );
    Ok(())
}

fn cmd_train(
    dataset: &Path,
    out: &Path,
    seed: u64,
    sample_size: usize,
    epochs: usize,
    proposals: usize,
) -> Result<()> {
    let g = Graph::load_edge_list(&resolve_dataset(dataset))?;
    let sa = SaConfig {
        epochs,
        proposals_per_epoch: proposals,
        ..SaConfig::default()
    };
    let sample = sample_size.min(g.node_count());
    let outcome = train_weights(&g, sample, &sa, seed)?;
    save_weights(out, &outcome.weights, &g)?;
    println!(
        "trained weights: {:?} fitness {:.4} -> {}",
        outcome.weights.0,
        outcome.best_fitness,
        out.display()
    );
    Ok(())
}

fn cmd_attack(graph: &Path, provenance: &Path) -> Result<()> {
    let g = Graph::load_edge_list(graph)?;
    let text = std::fs::read_to_string(provenance).map_err(|e| GraphError::Io {
        path: provenance.display().to_string(),
        source: e,
    })?;
    let a = run::parse_provenance(&text, g)?;
    let risks: Vec<_> = QueryId::ALL
        .iter()
        .map(|&q| graphanon::evaluate::risk_report(&a, q))
        .collect::<Result<_>>()?;
    print!("{}", run::risk_csv(&risks));
    Ok(())
}

fn build_run_config(args: RunArgs) -> Result<RunConfig> {
    let RunArgs {
        config,
        dataset,
        methods,
        ks,
        hub_pct,
        bridge_pct,
        seed,
        weights,
        out,
        sample_size,
    } = args;
    let mut cfg = match config {
        Some(path) => RunConfig::from_file(&path)?,
        None => RunConfig {
            dataset: PathBuf::new(),
            methods: Method::ALL.to_vec(),
            k_grid: config::DEFAULT_K_GRID.to_vec(),
            hub_pct: config::DEFAULT_HUB_PCT,
            bridge_pct: config::DEFAULT_BRIDGE_PCT,
            seed: config::DEFAULT_SEED,
            weights: None,
            out: PathBuf::from("out"),
            sample_size: graphanon::similarity::DEFAULT_SAMPLE_SIZE,
        },
    };
    if let Some(d) = dataset {
        cfg.dataset = d;
    }
    if !methods.is_empty() {
        cfg.methods = methods
            .iter()
            .map(|m| Method::parse(m))
            .collect::<Result<_>>()?;
    }
    if !ks.is_empty() {
        cfg.k_grid = ks;
    }
    if let Some(p) = hub_pct {
        cfg.hub_pct = p;
    }
    if let Some(p) = bridge_pct {
        cfg.bridge_pct = p;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if weights.is_some() {
        cfg.weights = weights;
    }
    if let Some(o) = out {
        cfg.out = o;
    }
    if let Some(s) = sample_size {
        cfg.sample_size = s;
    }
    if cfg.dataset.as_os_str().is_empty() {
        return Err(GraphError::Config(
            "a dataset must be given via --dataset or the config file".into(),
        ));
    }
    cfg.dataset = resolve_dataset(&cfg.dataset);
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<bool> = match cli.command {
        Command::Stats { dataset, seed } => cmd_stats(&dataset, seed).map(|_| true),
        Command::Train {
            dataset,
            out,
            seed,
            sample_size,
            epochs,
            proposals,
        } => cmd_train(&dataset, &out, seed, sample_size, epochs, proposals).map(|_| true),
        Command::Run(args) => build_run_config(args).and_then(|cfg| run::cmd_run(&cfg)),
        Command::Rank { dir } => rank::cmd_rank(&dir).map(|table| {
            print!("{table}");
            true
        }),
        Command::Attack { graph, provenance } => cmd_attack(&graph, &provenance).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: at least one grid cell failed verification");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
