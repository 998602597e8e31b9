//! `lakescout` — profile a CSV data lake, train the quality model, and rank
//! joinable columns.
//!
//! Exit codes: 0 success, 1 fatal processing error, 2 bad arguments or
//! name not found. Human-readable output goes to stdout; logs to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use lakescout_core::catalog::{ingest_directory, load_profiles, store_profiles, IngestOptions};
use lakescout_core::error::Error;
use lakescout_core::eval::study::metric_comparison_study;
use lakescout_core::eval::synth::{generate_synthetic_lake, SyntheticLakeConfig};
use lakescout_core::eval::{read_ground_truth, run_benchmark, spearman};
use lakescout_core::joinmetric::{fit_truncated_normal, QualityParams};
use lakescout_core::model::{
    distance_vector, load_model, make_training_set, save_model, train, RegressorConfig,
    SamplingConfig,
};
use lakescout_core::profiler::{
    compute_normalization_stats, profile_lake, NormalizationStats, ProfileSet,
};
use lakescout_core::search::{rank, rank_exact, QuerySpec, Ranking};

#[derive(Parser)]
#[command(
    name = "lakescout",
    version,
    about = "Join discovery for CSV data lakes from compact column profiles"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalArgs {
    /// JSON config file; values set there override flags.
    /// Falls back to $LAKESCOUT_CONFIG when not given.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory holding `*.profile.json` files and `stats.json`.
    #[arg(long, global = true)]
    profiles: Option<PathBuf>,
    /// Trained model JSON.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Quality-parameter JSON (mu/sigma pairs and strictness).
    #[arg(long, global = true)]
    quality_params: Option<PathBuf>,
    /// Strictness of the continuous quality metric.
    #[arg(long, global = true)]
    strictness: Option<f64>,
    /// Allow strictness values other than 0, 0.25 and 0.5.
    #[arg(long, global = true)]
    strictness_raw: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for profiling and scoring; 1 forces sequential runs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// error | warn | info | debug | trace.
    #[arg(long, global = true)]
    log_level: Option<String>,
}

/// Config-file schema. Every field is optional; present fields win over
/// command-line flags.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    profiles_dir: Option<PathBuf>,
    model_path: Option<PathBuf>,
    quality_params_path: Option<PathBuf>,
    strictness: Option<f64>,
    seed: Option<u64>,
    threads: Option<usize>,
    log_level: Option<String>,
}

struct Resolved {
    profiles: Option<PathBuf>,
    model: Option<PathBuf>,
    quality_params: Option<PathBuf>,
    strictness: f64,
    seed: u64,
    threads: usize,
    log_level: String,
}

#[derive(Subcommand)]
enum Command {
    /// Profile every column of a lake and write profiles plus stats.
    Profile {
        lake_dir: PathBuf,
        /// Output directory for `*.profile.json` and `stats.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a training set from a lake and fit the quality regressor.
    Train {
        lake_dir: PathBuf,
        /// Output path of the model JSON.
        #[arg(long)]
        out: PathBuf,
        /// Maximum number of training pairs to sample.
        #[arg(long, default_value_t = 4000)]
        pairs: usize,
        /// Minimum share of disjoint pairs in the sample.
        #[arg(long, default_value_t = 0.3)]
        negative_fraction: f64,
        /// Fail (exit 1) when held-out Spearman falls below this.
        #[arg(long, default_value_t = 0.8)]
        min_spearman: f64,
    },
    /// Rank joinable candidate columns for a query column.
    Query {
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        column: String,
        #[arg(short, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// Print the ranking as JSON instead of a table.
        #[arg(long)]
        json: bool,
        /// Score with the exact metric over raw values (needs --lake).
        #[arg(long)]
        exact: bool,
        /// Lake directory, required with --exact.
        #[arg(long)]
        lake: Option<PathBuf>,
        /// Keep candidates from the query's own dataset.
        #[arg(long)]
        include_same_dataset: bool,
        /// Rank candidates of every kind, not only textual columns.
        #[arg(long)]
        all_kinds: bool,
    },
    /// Benchmark a lake against ground truth: P@k, R@k, timing, footprint.
    Eval {
        #[arg(long)]
        lake: PathBuf,
        /// Ground-truth CSV
        /// (query_dataset,query_column,candidate_dataset,candidate_column,label).
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        /// Also run the set-overlap metric comparison study.
        #[arg(long)]
        study: bool,
        /// Allow parallel scoring; timings are labeled as parallel.
        #[arg(long)]
        parallel: bool,
        /// Write the report as JSON here.
        #[arg(long)]
        report_json: Option<PathBuf>,
        /// Write (k, precision, recall) rows as CSV here.
        #[arg(long)]
        report_csv: Option<PathBuf>,
    },
    /// Generate a synthetic lake with planted joinable pairs.
    Gen {
        #[arg(long)]
        out: PathBuf,
        /// Number of CSV files.
        #[arg(long)]
        files: Option<usize>,
        /// Per-file size, e.g. `1048576` or `1MB`.
        #[arg(long)]
        size: Option<String>,
        /// reference: planted queries, candidates and decoys;
        /// filler: uniform filler files only.
        #[arg(long, default_value = "reference")]
        preset: String,
        /// Designated query columns (reference preset).
        #[arg(long)]
        queries: Option<usize>,
        /// Planted joinable candidates per query (reference preset).
        #[arg(long)]
        semantic: Option<usize>,
        /// Planted decoys per query (reference preset).
        #[arg(long)]
        syntactic: Option<usize>,
    },
    /// Fit truncated-normal parameters to samples by Wasserstein grid search.
    Fit {
        /// CSV with a header row; every column is fitted independently.
        samples: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let resolved = match resolve(&cli.global) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    env_logger::Builder::new()
        .parse_filters(&resolved.log_level)
        .init();
    if resolved.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(resolved.threads)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    match dispatch(cli.command, &resolved) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ColumnNotFound { .. } | Error::DatasetNotFound(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn resolve(global: &GlobalArgs) -> Result<Resolved, String> {
    let config_path = global
        .config
        .clone()
        .or_else(|| std::env::var_os("LAKESCOUT_CONFIG").map(PathBuf::from));
    let file: ConfigFile = match &config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("config {}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))?
        }
        None => ConfigFile::default(),
    };

    let strictness = file
        .strictness
        .or(global.strictness)
        .unwrap_or(QualityParams::default().strictness);
    if !global.strictness_raw && ![0.0, 0.25, 0.5].contains(&strictness) {
        return Err(format!(
            "strictness {strictness} is not one of 0, 0.25, 0.5 (use --strictness-raw to override)"
        ));
    }

    Ok(Resolved {
        profiles: file.profiles_dir.or_else(|| global.profiles.clone()),
        model: file.model_path.or_else(|| global.model.clone()),
        quality_params: file
            .quality_params_path
            .or_else(|| global.quality_params.clone()),
        strictness,
        seed: file.seed.or(global.seed).unwrap_or(42),
        threads: file.threads.or(global.threads).unwrap_or(0),
        log_level: file
            .log_level
            .clone()
            .or_else(|| global.log_level.clone())
            .unwrap_or_else(|| "warn".to_string()),
    })
}

fn quality_params(resolved: &Resolved) -> Result<QualityParams, Error> {
    let mut params = match &resolved.quality_params {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| Error::MalformedProfile {
                path: path.clone(),
                message: e.to_string(),
            })?
        }
        None => QualityParams::default(),
    };
    params.strictness = resolved.strictness;
    params.validate()?;
    Ok(params)
}

fn require<T: Clone>(value: &Option<T>, what: &str) -> Result<T, Error> {
    value.clone().ok_or_else(|| Error::MalformedProfile {
        path: PathBuf::from(what),
        message: format!("missing: pass --{what} or set it in the config file"),
    })
}

fn load_profile_set(dir: &Path) -> Result<ProfileSet, Error> {
    let profiles = load_profiles(dir)?;
    let stats = NormalizationStats::load(&dir.join("stats.json"))?;
    Ok(ProfileSet::new(profiles, stats))
}

fn parse_size(text: &str) -> Result<u64, Error> {
    let t = text.trim().to_ascii_uppercase();
    let (digits, mult) = if let Some(p) = t.strip_suffix("GB").or_else(|| t.strip_suffix("G")) {
        (p, 1u64 << 30)
    } else if let Some(p) = t.strip_suffix("MB").or_else(|| t.strip_suffix("M")) {
        (p, 1u64 << 20)
    } else if let Some(p) = t.strip_suffix("KB").or_else(|| t.strip_suffix("K")) {
        (p, 1u64 << 10)
    } else {
        (t.as_str(), 1)
    };
    digits
        .trim()
        .parse::<u64>()
        .map(|n| n * mult)
        .map_err(|_| Error::Domain {
            what: "size",
            value: f64::NAN,
        })
}

fn print_ranking(ranking: &Ranking, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(&ranking.to_json()).unwrap());
        return;
    }
    println!("{:>5} {:<28} {:<20} {:>8}", "rank", "dataset", "column", "score");
    for (i, e) in ranking.entries.iter().enumerate() {
        println!(
            "{:>5} {:<28} {:<20} {:>8.4}",
            i + 1,
            e.candidate.dataset_id,
            e.candidate.column_name,
            e.score
        );
    }
    if ranking.is_empty() {
        println!("(no eligible candidates)");
    }
}

fn dispatch(command: Command, resolved: &Resolved) -> Result<ExitCode, Error> {
    match command {
        Command::Profile { lake_dir, out } => {
            let start = Instant::now();
            let catalog = ingest_directory(&lake_dir, IngestOptions::default())?;
            let profiles = profile_lake(&catalog)?;
            let stats = compute_normalization_stats(
                &profiles.iter().map(|(_, p)| p.clone()).collect::<Vec<_>>(),
            )?;
            store_profiles(&profiles, &out)?;
            stats.save(&out.join("stats.json"))?;
            let bytes: u64 = std::fs::read_dir(&out)
                .map_err(|e| Error::io(&out, e))?
                .filter_map(|e| e.ok())
                .filter_map(|e| e.metadata().ok())
                .filter(|m| m.is_file())
                .map(|m| m.len())
                .sum();
            println!(
                "profiled {} columns across {} datasets in {:.2} s ({} bytes of profiles)",
                profiles.len(),
                catalog.datasets().len(),
                start.elapsed().as_secs_f64(),
                bytes
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Train {
            lake_dir,
            out,
            pairs,
            negative_fraction,
            min_spearman,
        } => {
            let profiles_dir = require(&resolved.profiles, "profiles")?;
            let set = load_profile_set(&profiles_dir)?;
            let catalog = ingest_directory(&lake_dir, IngestOptions::default())?;
            let sampling = SamplingConfig {
                max_pairs: pairs,
                negative_fraction,
                strictness: resolved.strictness,
                seed: resolved.seed,
                textual_only: true,
            };
            let all_pairs = make_training_set(&catalog, &set, &sampling)?;

            // Hold out the tail fifth for the fidelity check; the sampler
            // already shuffles.
            let holdout_len = all_pairs.len() / 5;
            let (train_pairs, holdout) = if all_pairs.len() - holdout_len >= 100 {
                all_pairs.split_at(all_pairs.len() - holdout_len)
            } else {
                (&all_pairs[..], &all_pairs[..0])
            };
            let cfg = RegressorConfig {
                seed: resolved.seed,
                ..RegressorConfig::default()
            };
            let model = train(train_pairs, &cfg)?;
            save_model(&model, &out)?;

            let eval_pairs = if holdout.is_empty() {
                log::warn!("too few pairs for a held-out split; reporting training fit");
                train_pairs
            } else {
                holdout
            };
            let predicted: Vec<f64> = eval_pairs
                .iter()
                .map(|p| model.predict(&distance_vector(&p.a, &p.b)))
                .collect();
            let exact: Vec<f64> = eval_pairs.iter().map(|p| p.target).collect();
            let rho = spearman(&predicted, &exact);
            println!(
                "trained on {} pairs; held-out spearman {:.4} over {} pairs; model written to {}",
                train_pairs.len(),
                rho,
                eval_pairs.len(),
                out.display()
            );
            if rho < min_spearman {
                eprintln!("error: held-out spearman {rho:.4} below --min-spearman {min_spearman}");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Query {
            dataset,
            column,
            k,
            json,
            exact,
            lake,
            include_same_dataset,
            all_kinds,
        } => {
            let mut spec = QuerySpec::new(dataset, column, k as usize);
            spec.exclude_same_dataset = !include_same_dataset;
            spec.textual_only = !all_kinds;
            let ranking = if exact {
                let lake = require(&lake, "lake")?;
                let catalog = ingest_directory(&lake, IngestOptions::default())?;
                let params = quality_params(resolved)?;
                rank_exact(&spec, &catalog, &params)?
            } else {
                let profiles_dir = require(&resolved.profiles, "profiles")?;
                let model_path = require(&resolved.model, "model")?;
                let set = load_profile_set(&profiles_dir)?;
                let model = load_model(&model_path)?;
                rank(&spec, &set, &model)?
            };
            print_ranking(&ranking, json);
            Ok(ExitCode::SUCCESS)
        }

        Command::Eval {
            lake,
            truth,
            kmax,
            study,
            parallel,
            report_json,
            report_csv,
        } => {
            let model_path = require(&resolved.model, "model")?;
            let model = load_model(&model_path)?;
            let entries = read_ground_truth(&truth)?;
            let report = run_benchmark(&lake, &entries, &model, kmax, parallel)?;
            print!("{}", report.table());
            if let Some(path) = report_json {
                std::fs::write(&path, serde_json::to_string_pretty(&report).unwrap())
                    .map_err(|e| Error::io(&path, e))?;
            }
            if let Some(path) = report_csv {
                std::fs::write(&path, report.to_csv()).map_err(|e| Error::io(&path, e))?;
            }
            if study {
                let catalog = ingest_directory(&lake, IngestOptions::default())?;
                let ks: Vec<usize> = [1, 10, 50, 100]
                    .into_iter()
                    .filter(|&k| k <= kmax.max(10))
                    .collect();
                let study = metric_comparison_study(&catalog, &entries, &ks)?;
                println!();
                print!("{}", study.table());
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Gen {
            out,
            files,
            size,
            preset,
            queries,
            semantic,
            syntactic,
        } => {
            let size_bytes = match size {
                Some(s) => parse_size(&s)?,
                None => 1 << 20,
            };
            let mut cfg = match preset.as_str() {
                "reference" => SyntheticLakeConfig::reference(resolved.seed),
                "filler" => SyntheticLakeConfig::filler(files.unwrap_or(16), size_bytes, resolved.seed),
                other => {
                    return Err(Error::InfeasibleSchedule(format!(
                        "unknown preset `{other}` (expected reference or filler)"
                    )))
                }
            };
            cfg.file_size_bytes = size_bytes;
            if let Some(q) = queries {
                cfg.n_queries = q;
            }
            if let Some(s) = semantic {
                cfg.semantic_per_query = s;
            }
            if let Some(s) = syntactic {
                cfg.syntactic_per_query = s;
            }
            if let Some(n) = files {
                cfg = if queries.is_none() {
                    // Shrink the planted structure to the file budget.
                    cfg.scaled_to_files(n)
                } else {
                    cfg.n_files = n;
                    cfg
                };
            }
            let lake = generate_synthetic_lake(&cfg, &out)?;
            let total: u64 = lake
                .files
                .iter()
                .filter_map(|f| std::fs::metadata(f).ok())
                .map(|m| m.len())
                .sum();
            println!(
                "wrote {} files ({} bytes) to {}",
                lake.files.len(),
                total,
                out.display()
            );
            match &lake.truth_path {
                Some(p) => println!(
                    "planted {} pairs; ground truth at {}",
                    lake.planted.len(),
                    p.display()
                ),
                None => println!("no planted pairs"),
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Fit { samples, grid_step } => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_path(&samples)
                .map_err(|e| Error::Csv {
                    path: samples.clone(),
                    message: e.to_string(),
                })?;
            let headers = reader
                .headers()
                .map_err(|e| Error::Csv {
                    path: samples.clone(),
                    message: e.to_string(),
                })?
                .clone();
            let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
            for record in reader.records() {
                let record = record.map_err(|e| Error::Csv {
                    path: samples.clone(),
                    message: e.to_string(),
                })?;
                for (i, cell) in record.iter().enumerate() {
                    if cell.is_empty() {
                        continue;
                    }
                    let v: f64 = cell.trim().parse().map_err(|_| Error::Csv {
                        path: samples.clone(),
                        message: format!("column {}: `{cell}` is not a number", &headers[i]),
                    })?;
                    columns[i].push(v);
                }
            }
            for (name, values) in headers.iter().zip(&columns) {
                let (mu, sigma) = fit_truncated_normal(values, grid_step)?;
                println!("{name}: mu={mu:.4} sigma={sigma:.4} (n={})", values.len());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
