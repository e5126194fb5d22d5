use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use exactsim::baselines::DEFAULT_NODE_CAP;
use exactsim::diag::DEFAULT_SAMPLE_CAP;
use exactsim::eval::{Algorithm, Report};
use exactsim::query::{
    read_scores_csv_path, write_meta_json_path, write_scores_csv_path, QueryOptions,
};
use exactsim::{
    max_error, power_method, precision_at_k, run_experiment, single_source, top_k,
    AllocationStrategy, DiagMethod, EdgeListOptions, Error, Graph,
};

#[derive(Parser)]
#[command(name = "exactsim", version, about = "Single-source SimRank queries")]
struct Cli {
    /// Worker threads (overrides EXACTSIM_THREADS; default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a whitespace edge list to the binary graph cache
    Convert {
        /// Edge list: one "src dst" pair per line, '#' comments
        #[arg(long)]
        input: PathBuf,
        /// Output cache path
        #[arg(long)]
        output: PathBuf,
        /// Add the reverse of every arc
        #[arg(long)]
        undirected: bool,
    },
    /// Run a single-source query
    Query(QueryArgs),
    /// Compute all-pairs ground truth by the power method
    Groundtruth {
        #[arg(long)]
        graph: PathBuf,
        /// Only "power" is supported
        #[arg(long, default_value = "power")]
        method: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60)]
        iterations: usize,
        #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
        node_cap: usize,
        /// Also extract this row as a scores CSV next to the matrix
        #[arg(long)]
        row: Option<u32>,
    },
    /// Compare an estimate CSV against a truth CSV
    Eval {
        #[arg(long)]
        est: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = 500)]
        k: usize,
        /// Source node to exclude from the top-k
        #[arg(long)]
        source: Option<u32>,
    },
    /// Benchmark several algorithms over random queries
    Bench {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 50)]
        queries: usize,
        /// Comma list, e.g. "exactsim:1e-3,mc:1000,parsim:20,power:60"
        #[arg(long)]
        algos: String,
        #[arg(long, default_value_t = 500)]
        k: usize,
        #[arg(long, default_value_t = 0.6)]
        decay: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    source: u32,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.6)]
    decay: f64,
    /// Basic diagonal estimator instead of the optimized one
    #[arg(long)]
    basic: bool,
    /// Disable hop-table sparsification
    #[arg(long)]
    dense: bool,
    /// Sample allocation: "prop" or "sq"
    #[arg(long, default_value = "prop")]
    alloc: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the theoretical pair-sample count
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_CAP)]
    sample_cap: u64,
    /// Scores CSV; a .meta.json sidecar is written next to it
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here with non-error kinds
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = cli.threads.or_else(|| {
        std::env::var("EXACTSIM_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_refusal() { 2 } else { 1 })
        }
    }
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Convert {
            input,
            output,
            undirected,
        } => {
            let opts = EdgeListOptions {
                undirected,
                ..EdgeListOptions::default()
            };
            let g = Graph::load_edge_list(&input, opts)?;
            g.save_cache(&output)?;
            write_label_map(&g, &output)?;
            println!(
                "converted: {} nodes, {} arcs -> {}",
                g.node_count(),
                g.arc_count(),
                output.display()
            );
            Ok(())
        }
        Command::Query(args) => {
            let g = Graph::load_cache(&args.graph)?;
            let opts = QueryOptions {
                eps: args.eps,
                c: args.decay,
                allocation: match args.alloc.as_str() {
                    "prop" => AllocationStrategy::Proportional,
                    "sq" => AllocationStrategy::SquaredNorm,
                    other => return Err(Error::Invalid(format!("unknown allocation: {other}"))),
                },
                diag_method: if args.basic {
                    DiagMethod::Basic
                } else {
                    DiagMethod::Optimized
                },
                sparse: !args.dense,
                seed: args.seed,
                l_override: None,
                sample_cap: args.sample_cap,
                sample_override: args.samples,
            };
            if args.eps < 1e-7 {
                eprintln!(
                    "warning: eps={} is below 1e-7; double precision cannot support it",
                    args.eps
                );
            }
            let result = single_source(&g, args.source, &opts)?;
            write_scores_csv_path(&args.out, &result.scores)?;
            write_meta_json_path(sidecar_path(&args.out), &result.meta)?;
            println!(
                "query done: source={} L={} R={} -> {}",
                args.source,
                result.meta.l,
                result.meta.r_total,
                args.out.display()
            );
            Ok(())
        }
        Command::Groundtruth {
            graph,
            method,
            out,
            iterations,
            node_cap,
            row,
        } => {
            if method != "power" {
                return Err(Error::Invalid(format!("unknown method: {method}")));
            }
            let g = Graph::load_cache(&graph)?;
            let s = power_method(&g, 0.6, iterations, node_cap)?;
            s.save(&out)?;
            if let Some(i) = row {
                g.check_node(i)?;
                let row_path = out.with_extension("row.csv");
                write_scores_csv_path(&row_path, s.row(i))?;
                println!("row {} -> {}", i, row_path.display());
            }
            println!("ground truth ({iterations} iterations) -> {}", out.display());
            Ok(())
        }
        Command::Eval {
            est,
            truth,
            k,
            source,
        } => {
            let est = read_scores_csv_path(&est)?;
            let truth = read_scores_csv_path(&truth)?;
            let me = max_error(&est, &truth)?;
            let ranking = top_k(&est, k, source);
            let prec = precision_at_k(&ranking, &truth, k, source);
            println!("max_error={me:.6e} precision@{k}={prec}");
            Ok(())
        }
        Command::Bench {
            graph,
            queries,
            algos,
            k,
            decay,
            seed,
            out,
        } => {
            let g = Graph::load_cache(&graph)?;
            let algorithms = parse_algos(&algos, seed)?;
            let report = run_experiment(&g, decay, &algorithms, queries, k, seed)?;
            report.write_csv_path(&out)?;
            print_averages(&report);
            println!("report -> {}", out.display());
            Ok(())
        }
    }
}

fn sidecar_path(out: &std::path::Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn write_label_map(g: &Graph, cache: &std::path::Path) -> Result<(), Error> {
    use std::io::Write;
    let path = cache.with_extension("map.csv");
    let io_err = |e| Error::Io {
        path: path.clone(),
        source: e,
    };
    let mut w = std::io::BufWriter::new(std::fs::File::create(&path).map_err(io_err)?);
    (|| {
        writeln!(w, "node,label")?;
        for (k, &label) in g.labels().iter().enumerate() {
            writeln!(w, "{k},{label}")?;
        }
        w.flush()
    })()
    .map_err(io_err)
}

fn parse_algos(spec: &str, seed: u64) -> Result<Vec<Algorithm>, Error> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let (name, param) = part.split_once(':').unwrap_or((part, ""));
        let algo = match name {
            "exactsim" => {
                let eps: f64 = if param.is_empty() {
                    1e-3
                } else {
                    param
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad eps: {param}")))?
                };
                Algorithm::ExactSim(QueryOptions {
                    seed,
                    ..QueryOptions::new(eps)
                })
            }
            "mc" => {
                let r: u64 = if param.is_empty() {
                    1000
                } else {
                    param
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad walk count: {param}")))?
                };
                Algorithm::MonteCarlo {
                    walk_cap: 50,
                    walks_per_node: r,
                    seed,
                }
            }
            "parsim" => {
                let l: usize = if param.is_empty() {
                    30
                } else {
                    param
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad iteration count: {param}")))?
                };
                Algorithm::ParSim { iterations: l }
            }
            "power" => {
                let l: usize = if param.is_empty() {
                    60
                } else {
                    param
                        .parse()
                        .map_err(|_| Error::Invalid(format!("bad iteration count: {param}")))?
                };
                Algorithm::Power { iterations: l }
            }
            other => return Err(Error::Invalid(format!("unknown algorithm: {other}"))),
        };
        out.push(algo);
    }
    if out.is_empty() {
        return Err(Error::Invalid("empty algorithm list".into()));
    }
    Ok(out)
}

fn print_averages(report: &Report) {
    for row in report.rows.iter().filter(|r| r.query_id == "avg") {
        println!(
            "{}: avg max_error={:.6e} avg precision={:.4}",
            row.algorithm, row.max_error, row.precision_at_k
        );
    }
}
