//! Subcommand implementations. Exit codes: 0 success, 1 usage error,
//! 2 data error, 3 partial failure (some grid cells failed).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fairsynth::classifier::GbdtConfig;
use fairsynth::dataset::Dataset;
use fairsynth::generators::{fit_and_sample_plan, GeneratorKind};
use fairsynth::harness::{profile_runtime, run_grid, ExperimentConfig};
use fairsynth::partition::{partition, SubgroupKey};
use fairsynth::schema::DatasetSchema;
use fairsynth::strategies::{plan, summarize_distribution, DistributionTable, StrategyKind};

#[derive(Parser)]
#[command(
    name = "fairsynth",
    about = "Per-subgroup synthetic oversampling for class- and group-imbalanced tabular data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV (header row required)
    #[arg(long)]
    data: PathBuf,
    /// Schema file (TOML with a [[columns]] array)
    #[arg(long)]
    schema: PathBuf,
    /// Override protected columns (comma-separated names)
    #[arg(long, value_delimiter = ',')]
    protected: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Report subgroup distributions and per-strategy sampling plans without sampling
    Inspect {
        #[command(flatten)]
        data: DataArgs,
        /// Write per-strategy distribution CSVs next to this path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit generators per subgroup, sample per strategy, write the augmented CSV
    Augment {
        #[command(flatten)]
        data: DataArgs,
        /// class | class-protected | protected | class-ratio
        #[arg(long)]
        strategy: String,
        /// copula | cart | smote-nc
        #[arg(long)]
        generator: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV (input layout plus an `origin` column)
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated benchmark over a strategy x generator grid
    Benchmark {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated strategies (default: all four)
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<String>,
        /// Comma-separated generators (default: all three)
        #[arg(long, value_delimiter = ',')]
        generators: Vec<String>,
        #[arg(long, default_value_t = 3)]
        folds: usize,
        #[arg(long, default_value_t = 2)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Boosting rounds for the downstream classifier
        #[arg(long, default_value_t = 100)]
        rounds: usize,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Fit/sample runtime comparison per generator
    Profile {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated generators (default: all three)
        #[arg(long, value_delimiter = ',')]
        generators: Vec<String>,
        /// Synthetic instances to sample per trial
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not usage errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_thread_pool();
    let outcome = match cli.command {
        Command::Inspect { data, out } => inspect(&data, out.as_deref()),
        Command::Augment {
            data,
            strategy,
            generator,
            seed,
            out,
        } => augment(&data, &strategy, &generator, seed, &out),
        Command::Benchmark {
            data,
            strategies,
            generators,
            folds,
            repeats,
            seed,
            rounds,
            out_dir,
        } => benchmark(
            &data,
            &strategies,
            &generators,
            folds,
            repeats,
            seed,
            rounds,
            &out_dir,
        ),
        Command::Profile {
            data,
            generators,
            n,
            trials,
            out,
        } => profile(&data, &generators, n, trials, &out),
    };
    match outcome {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

enum CliError {
    Usage(String),
    Data(String),
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("FAIRSYNTH_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build_global();
        }
    }
}

fn load(data: &DataArgs) -> Result<Dataset, CliError> {
    if !data.schema.exists() {
        return Err(CliError::Usage(format!(
            "schema file not found: {}",
            data.schema.display()
        )));
    }
    let mut schema =
        DatasetSchema::load(&data.schema).map_err(|e| CliError::Data(e.to_string()))?;
    if !data.protected.is_empty() {
        schema = schema
            .with_protected(&data.protected)
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    Dataset::load_csv(&data.data, &schema).map_err(|e| CliError::Data(e.to_string()))
}

fn parse_strategies(names: &[String]) -> Result<Vec<StrategyKind>, CliError> {
    if names.is_empty() {
        return Ok(StrategyKind::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| {
            StrategyKind::parse(n).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown strategy `{n}`; valid: class, class-protected, protected, class-ratio"
                ))
            })
        })
        .collect()
}

fn parse_generators(names: &[String]) -> Result<Vec<GeneratorKind>, CliError> {
    if names.is_empty() {
        return Ok(GeneratorKind::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| {
            GeneratorKind::parse(n).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown generator `{n}`; valid: copula, cart, smote-nc"
                ))
            })
        })
        .collect()
}

fn group_label(d: &Dataset, key: &SubgroupKey) -> String {
    let protected_cols = d.schema().protected_indices();
    key.protected_values
        .iter()
        .zip(&protected_cols)
        .map(|(&v, &col)| d.categories(col)[v as usize].clone())
        .collect::<Vec<_>>()
        .join("|")
}

fn class_label(d: &Dataset, class: u8) -> String {
    d.categories(d.schema().target_index())[class as usize].clone()
}

fn write_distribution_csv(
    path: &Path,
    d: &Dataset,
    table: &DistributionTable,
) -> Result<(), CliError> {
    let mut out = String::from("group,class,real_count,synthetic_count,real_pct,r_aug\n");
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{:.6},{:.6}\n",
            group_label(d, &row.key),
            class_label(d, row.key.class_label),
            row.real_count,
            row.synthetic_count,
            row.real_pct,
            table.r_aug
        ));
    }
    std::fs::write(path, out).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn print_distribution(d: &Dataset, table: &DistributionTable) {
    println!(
        "strategy: {}  (r_aug = {:.6})",
        table.strategy.name(),
        table.r_aug
    );
    println!(
        "  {:<20} {:<10} {:>10} {:>12} {:>9}",
        "group", "class", "real", "synthetic", "real_pct"
    );
    for row in &table.rows {
        println!(
            "  {:<20} {:<10} {:>10} {:>12} {:>8.4}%",
            group_label(d, &row.key),
            class_label(d, row.key.class_label),
            row.real_count,
            row.synthetic_count,
            row.real_pct
        );
    }
}

fn inspect(data: &DataArgs, out: Option<&Path>) -> Result<ExitCode, CliError> {
    let d = load(data)?;
    let counts = partition(&d).counts();
    println!(
        "{} rows, {} subgroups ({} protected column(s))",
        d.n_rows(),
        counts.counts.len(),
        d.schema().protected_indices().len()
    );
    for strategy in StrategyKind::ALL {
        match plan(strategy, &counts) {
            Ok(p) => {
                let table = summarize_distribution(&counts, &p);
                print_distribution(&d, &table);
                if let Some(base) = out {
                    let path = suffixed(base, strategy.name());
                    write_distribution_csv(&path, &d, &table)?;
                }
            }
            Err(e) => println!("strategy: {}  unavailable: {e}", strategy.name()),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn suffixed(base: &Path, suffix: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn augment(
    data: &DataArgs,
    strategy: &str,
    generator: &str,
    seed: u64,
    out: &Path,
) -> Result<ExitCode, CliError> {
    let strategy = parse_strategies(&[strategy.to_string()])?[0];
    let generator = parse_generators(&[generator.to_string()])?[0];
    let d = load(data)?;
    let part = partition(&d);
    let counts = part.counts();
    let sampling_plan = plan(strategy, &counts).map_err(|e| CliError::Data(e.to_string()))?;
    println!(
        "strategy: {}  r_aug = {:.6}",
        strategy.name(),
        sampling_plan.r_aug
    );
    for (key, count) in &sampling_plan.to_sample {
        println!(
            "  sample {:>8} rows for group={} class={}",
            count,
            group_label(&d, key),
            class_label(&d, key.class_label)
        );
    }
    if sampling_plan.to_sample.is_empty() {
        println!("  nothing to sample");
    }
    let batches = fit_and_sample_plan(generator, &d, &part, &sampling_plan, seed)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let augmented = d
        .augment(&batches)
        .map_err(|e| CliError::Data(e.to_string()))?;
    augmented
        .write_csv(out, true)
        .map_err(|e| CliError::Data(e.to_string()))?;
    println!(
        "wrote {} rows ({} synthetic) to {}",
        augmented.n_rows(),
        augmented.n_synthetic(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn benchmark(
    data: &DataArgs,
    strategies: &[String],
    generators: &[String],
    folds: usize,
    repeats: usize,
    seed: u64,
    rounds: usize,
    out_dir: &Path,
) -> Result<ExitCode, CliError> {
    if folds < 2 {
        return Err(CliError::Usage("folds must be at least 2".into()));
    }
    if repeats < 1 {
        return Err(CliError::Usage("repeats must be at least 1".into()));
    }
    let strategies = parse_strategies(strategies)?;
    let generators = parse_generators(generators)?;
    let d = load(data)?;
    let config = ExperimentConfig {
        folds,
        repeats,
        base_seed: seed,
        strategies,
        generators,
        classifier: GbdtConfig {
            rounds,
            ..GbdtConfig::default()
        },
        include_real_baseline: true,
    };
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;
    let result = run_grid(&d, &config);

    let results_path = out_dir.join("results.csv");
    let mut csv = String::from(
        "strategy,generator,accuracy_mean,accuracy_std,roc_auc_mean,roc_auc_std,f1_mean,f1_std,eq_odds_mean,eq_odds_std,sp_mean,sp_std,eq_opp_mean,eq_opp_std,r_aug,note\n",
    );
    for (key, cell) in &result.cells {
        let field = |name: &str| {
            if cell.runs == 0 {
                (0.0, 0.0)
            } else {
                (cell.mean[name], cell.std[name])
            }
        };
        let (acc, acc_s) = field("accuracy");
        let (auc, auc_s) = field("roc_auc");
        let (f1, f1_s) = field("f1");
        let (odds, odds_s) = field("eq_odds");
        let (sp, sp_s) = field("sp");
        let (opp, opp_s) = field("eq_opp");
        csv.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
            key.strategy_name(),
            key.generator_name(),
            acc, acc_s, auc, auc_s, f1, f1_s, odds, odds_s, sp, sp_s, opp, opp_s,
            cell.r_aug_mean,
            cell.note.replace(',', ";"),
        ));
    }
    std::fs::write(&results_path, &csv)
        .map_err(|e| CliError::Data(format!("{}: {e}", results_path.display())))?;

    let runs_path = out_dir.join("runs.jsonl");
    let mut file = std::fs::File::create(&runs_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", runs_path.display())))?;
    for record in &result.records {
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(file, "{line}").map_err(|e| CliError::Data(e.to_string()))?;
    }

    println!(
        "wrote {} and {}",
        results_path.display(),
        runs_path.display()
    );
    for (key, message) in &result.failures {
        eprintln!(
            "cell ({}, {}) failed: {message}",
            key.strategy_name(),
            key.generator_name()
        );
    }
    if result.has_failures() {
        if result.cells.values().any(|c| c.runs > 0) {
            return Ok(ExitCode::from(3));
        }
        return Err(CliError::Data("all grid cells failed".into()));
    }
    Ok(ExitCode::SUCCESS)
}

fn profile(
    data: &DataArgs,
    generators: &[String],
    n: usize,
    trials: usize,
    out: &Path,
) -> Result<ExitCode, CliError> {
    if trials < 1 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    let generators = parse_generators(generators)?;
    let d = load(data)?;
    let profile = profile_runtime(&d, &generators, n, trials);
    let mut csv = String::from(
        "generator,fit_s_mean,fit_s_std,sample_s_mean,sample_s_std,overall_s_mean,overall_s_std\n",
    );
    for p in &profile.profiles {
        csv.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            p.generator.name(),
            p.fit_s.0,
            p.fit_s.1,
            p.sample_s.0,
            p.sample_s.1,
            p.overall_s.0,
            p.overall_s.1
        ));
        println!(
            "{:<10} fit {:.3}s +/- {:.3}  sample {:.3}s +/- {:.3}  overall {:.3}s{}",
            p.generator.name(),
            p.fit_s.0,
            p.fit_s.1,
            p.sample_s.0,
            p.sample_s.1,
            p.overall_s.0,
            if p.note.is_empty() {
                String::new()
            } else {
                format!("  [{}]", p.note)
            }
        );
    }
    std::fs::write(out, csv).map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
    Ok(ExitCode::SUCCESS)
}
