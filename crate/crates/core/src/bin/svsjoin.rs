use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use svsjoin::cli::{self, exit, BenchParams, Sweep};
use svsjoin::datagen::GenSpec;
use svsjoin::{Algorithm, JoinConfig, WeightScheme};

#[derive(Parser)]
#[command(name = "svsjoin", version, about = "Spatial-visual similarity joins over geo-tagged token sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        /// Output file (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Join a dataset and write `id_a id_b` lines.
    Join {
        input: PathBuf,
        #[command(flatten)]
        join: JoinArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Join a dataset and compare against the brute-force result.
    Check {
        input: PathBuf,
        #[command(flatten)]
        join: JoinArgs,
    },
    /// Sweep one workload axis and report per-algorithm timings.
    Bench {
        /// size, words, gamma_g or gamma_v; all four if omitted.
        sweep: Option<Sweep>,
        #[arg(long, default_value_t = 0.01)]
        scale: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Comma-separated algorithms.
        #[arg(long, value_delimiter = ',', default_value = "b,g,q")]
        algo: Vec<Algorithm>,
        #[arg(long, default_value_t = WeightScheme::Uniform)]
        weights: WeightScheme,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Seconds per run.
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 3000)]
    records: usize,
    /// Scales --records.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = 10_000)]
    vocab: u32,
    #[arg(long, default_value_t = 60.0)]
    words: f64,
    #[arg(long, default_value_t = 1.0)]
    skew: f64,
    #[arg(long, default_value_t = 20)]
    clusters: usize,
    #[arg(long, default_value_t = 50.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1000.0)]
    extent: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct JoinArgs {
    #[arg(long, default_value_t = 0.06)]
    gamma_g: f64,
    #[arg(long, default_value_t = 0.7)]
    gamma_v: f64,
    #[arg(long, default_value_t = Algorithm::Quadtree)]
    algo: Algorithm,
    #[arg(long, default_value_t = WeightScheme::Uniform)]
    weights: WeightScheme,
    #[arg(long)]
    suffix_filter: bool,
    #[arg(long, default_value_t = 64)]
    leaf_capacity: usize,
    /// Normalization distance instead of the dataset diameter.
    #[arg(long)]
    max_dis: Option<f64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Seconds.
    #[arg(long)]
    timeout: Option<f64>,
}

impl JoinArgs {
    fn config(&self) -> JoinConfig {
        JoinConfig {
            gamma_g: self.gamma_g,
            gamma_v: self.gamma_v,
            algorithm: self.algo,
            weight_scheme: self.weights,
            suffix_filter: self.suffix_filter,
            leaf_capacity: self.leaf_capacity,
            max_dis_override: self.max_dis,
            threads: self.threads,
            deadline: self.timeout.map(|s| Instant::now() + Duration::from_secs_f64(s)),
            ..JoinConfig::default()
        }
    }
}

fn run(command: Command) -> svsjoin::Result<i32> {
    match command {
        Command::Generate { gen, output } => {
            let spec = GenSpec {
                n_records: (gen.records as f64 * gen.scale).round() as usize,
                vocab_size: gen.vocab,
                tokens_per_record: gen.words,
                token_skew: gen.skew,
                n_clusters: gen.clusters,
                cluster_sigma: gen.sigma,
                extent: gen.extent,
                seed: gen.seed,
            };
            let n = cli::cmd_generate(&spec, output.as_deref())?;
            eprintln!("wrote {n} records");
        }
        Command::Join { input, join, output } => {
            let (out, secs) = cli::cmd_join(&input, output.as_deref(), &join.config())?;
            eprintln!("{}", cli::format_stats(&out.stats, secs));
        }
        Command::Check { input, join } => {
            let report = cli::cmd_check(&input, &join.config())?;
            for (a, b) in &report.missing {
                println!("missing {a} {b}");
            }
            for (a, b) in &report.extra {
                println!("extra {a} {b}");
            }
            eprintln!(
                "{}: {} oracle pairs, {} missing, {} extra",
                report.algorithm,
                report.pairs,
                report.missing.len(),
                report.extra.len()
            );
            if !report.agrees() {
                return Ok(exit::MISMATCH);
            }
        }
        Command::Bench {
            sweep,
            scale,
            seed,
            algo,
            weights,
            threads,
            timeout,
            output,
        } => {
            let params = BenchParams {
                scale,
                seed,
                algorithms: algo,
                weights,
                threads,
                timeout: timeout.map(Duration::from_secs_f64),
                ..BenchParams::default()
            };
            let sweeps = sweep.map_or_else(|| Sweep::ALL.to_vec(), |s| vec![s]);
            let mut text = String::new();
            for (k, s) in sweeps.iter().enumerate() {
                let report = cli::run_sweep(*s, &params)?;
                let tsv = report.to_tsv();
                // one header for the whole table
                text.push_str(if k == 0 { &tsv } else { tsv.split_once('\n').map_or("", |x| x.1) });
                if !report.results_agree() {
                    eprintln!("warning: result counts differ across algorithms in sweep {s}");
                }
            }
            match output {
                Some(p) => std::fs::write(p, text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { exit::OK as u8 });
        }
    };
    match run(parsed.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
