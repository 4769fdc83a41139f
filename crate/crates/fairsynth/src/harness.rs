//! Experiment orchestration: per (strategy x generator) grid cell, run
//! fit-augment-train-evaluate across folds and repeats, aggregate, and time
//! the generators. Generators are always fit on training folds only and all
//! metrics come from the untouched real test fold.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::{train, GbdtConfig};
use crate::dataset::Dataset;
use crate::folds::stratified_kfold;
use crate::generators::{fit, fit_and_sample_plan, GeneratorKind};
use crate::metrics::{report, EvalFrame, MetricReport, METRIC_FIELDS};
use crate::partition::partition;
use crate::seed;
use crate::strategies::{plan, StrategyKind};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub folds: usize,
    pub repeats: usize,
    pub base_seed: u64,
    pub strategies: Vec<StrategyKind>,
    pub generators: Vec<GeneratorKind>,
    pub classifier: GbdtConfig,
    pub include_real_baseline: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            folds: 3,
            repeats: 2,
            base_seed: 0,
            strategies: StrategyKind::ALL.to_vec(),
            generators: GeneratorKind::ALL.to_vec(),
            classifier: GbdtConfig::default(),
            include_real_baseline: true,
        }
    }
}

/// Grid cell identity. The real-only baseline is the cell with no strategy
/// and no generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CellKey {
    pub strategy: Option<StrategyKind>,
    pub generator: Option<GeneratorKind>,
}

impl CellKey {
    pub const BASELINE: CellKey = CellKey {
        strategy: None,
        generator: None,
    };

    pub fn strategy_name(&self) -> &'static str {
        self.strategy.map_or("real-only", |s| s.name())
    }

    pub fn generator_name(&self) -> &'static str {
        self.generator.map_or("", |g| g.name())
    }
}

/// One fold x repeat execution of one cell.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub strategy: String,
    pub generator: String,
    pub repeat: usize,
    pub fold: usize,
    pub r_aug: f64,
    pub accuracy: f64,
    pub roc_auc: f64,
    pub f1: f64,
    pub eq_odds: f64,
    pub sp: f64,
    pub eq_opp: f64,
    pub n_train_real: usize,
    pub n_train_synthetic: usize,
    pub n_test: usize,
    pub undefined_flags: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct CellAggregate {
    /// mean and std per metric field, in METRIC_FIELDS order
    pub mean: BTreeMap<&'static str, f64>,
    pub std: BTreeMap<&'static str, f64>,
    pub r_aug_mean: f64,
    pub runs: usize,
    pub note: String,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentResult {
    pub cells: BTreeMap<CellKey, CellAggregate>,
    pub records: Vec<RunRecord>,
    pub failures: Vec<(CellKey, String)>,
}

impl ExperimentResult {
    pub fn has_failures(&self) -> bool {
        !self.failures.is_empty()
    }
}

fn sample_std(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

struct RunOutcome {
    key: CellKey,
    repeat: usize,
    fold: usize,
    result: Result<(MetricReport, f64, usize, usize, usize), String>,
}

fn strategy_label(s: Option<StrategyKind>) -> u64 {
    s.map_or(0, |s| {
        1 + StrategyKind::ALL.iter().position(|x| *x == s).unwrap() as u64
    })
}

fn generator_label(g: Option<GeneratorKind>) -> u64 {
    g.map_or(0, |g| {
        1 + GeneratorKind::ALL.iter().position(|x| *x == g).unwrap() as u64
    })
}

fn run_one(
    d: &Dataset,
    config: &ExperimentConfig,
    key: CellKey,
    repeat: usize,
    fold: usize,
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<(MetricReport, f64, usize, usize, usize), String> {
    // leakage guard: the fit/training side must never see a test row
    debug_assert!(train_idx.iter().all(|i| !test_idx.contains(i)));
    let train_set = d.select(train_idx);
    let cell_seed = seed::mix(
        config.base_seed,
        &[
            repeat as u64,
            fold as u64,
            strategy_label(key.strategy),
            generator_label(key.generator),
        ],
    );

    let (augmented, r_aug) = match (key.strategy, key.generator) {
        (Some(strategy), Some(generator)) => {
            let part = partition(&train_set);
            let sampling_plan = plan(strategy, &part.counts()).map_err(|e| e.to_string())?;
            let batches =
                fit_and_sample_plan(generator, &train_set, &part, &sampling_plan, cell_seed)
                    .map_err(|e| e.to_string())?;
            let augmented = train_set.augment(&batches).map_err(|e| e.to_string())?;
            (augmented, sampling_plan.r_aug)
        }
        (None, None) => (train_set.clone(), 0.0),
        _ => return Err("strategy and generator must be set together".into()),
    };

    let mut classifier_config = config.classifier.clone();
    classifier_config.seed = seed::mix(cell_seed, &[0xC1]);
    let model = train(&augmented, &classifier_config).map_err(|e| e.to_string())?;

    let test_set = d.select(test_idx);
    let scores = model.predict_proba(&test_set).map_err(|e| e.to_string())?;
    let frame = EvalFrame {
        y_true: (0..test_set.n_rows())
            .map(|i| test_set.class_of(i))
            .collect(),
        y_pred: scores.iter().map(|&s| u8::from(s >= 0.5)).collect(),
        y_score: scores,
        group_of_row: (0..test_set.n_rows())
            .map(|i| test_set.protected_of(i))
            .collect(),
    };
    let metrics = report(&frame).map_err(|e| e.to_string())?;
    let n_synth = augmented.n_synthetic();
    Ok((metrics, r_aug, train_idx.len(), n_synth, test_idx.len()))
}

/// Execute the full grid. Deterministic for a fixed config regardless of the
/// level of parallelism: every run derives its own seed from
/// (base_seed, repeat, fold, strategy, generator) and results are merged in
/// cell-key order.
pub fn run_grid(d: &Dataset, config: &ExperimentConfig) -> ExperimentResult {
    let mut cell_keys: Vec<CellKey> = Vec::new();
    if config.include_real_baseline {
        cell_keys.push(CellKey::BASELINE);
    }
    for &s in &config.strategies {
        for &g in &config.generators {
            cell_keys.push(CellKey {
                strategy: Some(s),
                generator: Some(g),
            });
        }
    }

    // fold assignments per repeat, reshuffled with a repeat-derived seed
    let folds_by_repeat: Vec<_> = (0..config.repeats)
        .map(|r| {
            stratified_kfold(
                d,
                config.folds,
                seed::mix(config.base_seed, &[0xF0, r as u64]),
            )
            .expect("dataset large enough for the requested folds")
        })
        .collect();

    let mut tasks = Vec::new();
    for &key in &cell_keys {
        for repeat in 0..config.repeats {
            for fold in 0..config.folds {
                tasks.push((key, repeat, fold));
            }
        }
    }

    let outcomes: Vec<RunOutcome> = tasks
        .par_iter()
        .map(|&(key, repeat, fold)| {
            let assignment = &folds_by_repeat[repeat];
            let train_idx = assignment.train_indices(fold);
            let test_idx = assignment.test_indices(fold);
            RunOutcome {
                key,
                repeat,
                fold,
                result: run_one(d, config, key, repeat, fold, &train_idx, &test_idx),
            }
        })
        .collect();

    let mut result = ExperimentResult::default();
    let mut per_cell: BTreeMap<CellKey, Vec<(usize, usize, MetricReport, f64)>> = BTreeMap::new();
    let mut failures: BTreeMap<CellKey, String> = BTreeMap::new();
    for outcome in outcomes {
        match outcome.result {
            Ok((metrics, r_aug, n_real, n_synth, n_test)) => {
                result.records.push(RunRecord {
                    strategy: CellKey::strategy_name(&outcome.key).to_string(),
                    generator: CellKey::generator_name(&outcome.key).to_string(),
                    repeat: outcome.repeat,
                    fold: outcome.fold,
                    r_aug,
                    accuracy: metrics.accuracy,
                    roc_auc: metrics.roc_auc,
                    f1: metrics.f1,
                    eq_odds: metrics.eq_odds,
                    sp: metrics.stat_parity,
                    eq_opp: metrics.eq_opp,
                    n_train_real: n_real,
                    n_train_synthetic: n_synth,
                    n_test,
                    undefined_flags: metrics
                        .undefined_flags
                        .iter()
                        .map(|f| format!("{}:{}", f.metric, f.group))
                        .collect(),
                });
                per_cell.entry(outcome.key).or_default().push((
                    outcome.repeat,
                    outcome.fold,
                    metrics,
                    r_aug,
                ));
            }
            Err(message) => {
                failures.entry(outcome.key).or_insert(message);
            }
        }
    }

    let expected_runs = config.repeats * config.folds;
    for key in cell_keys {
        if let Some(message) = failures.get(&key) {
            result.cells.insert(
                key,
                CellAggregate {
                    note: message.clone(),
                    ..Default::default()
                },
            );
            result.failures.push((key, message.clone()));
            continue;
        }
        let mut runs = per_cell.remove(&key).unwrap_or_default();
        runs.sort_by_key(|(r, f, _, _)| (*r, *f));
        assert_eq!(runs.len(), expected_runs, "cell aggregates all runs");
        let mut aggregate = CellAggregate {
            runs: runs.len(),
            ..Default::default()
        };
        for field in METRIC_FIELDS {
            let values: Vec<f64> = runs.iter().map(|(_, _, m, _)| m.field(field)).collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            aggregate.mean.insert(field, mean);
            aggregate.std.insert(field, sample_std(&values, mean));
        }
        aggregate.r_aug_mean = runs.iter().map(|(_, _, _, r)| *r).sum::<f64>() / runs.len() as f64;
        result.cells.insert(key, aggregate);
    }
    // records in deterministic order
    result.records.sort_by(|a, b| {
        (&a.strategy, &a.generator, a.repeat, a.fold).cmp(&(
            &b.strategy,
            &b.generator,
            b.repeat,
            b.fold,
        ))
    });
    result
}

#[derive(Debug, Clone)]
pub struct GeneratorProfile {
    pub generator: GeneratorKind,
    pub fit_s: (f64, f64),
    pub sample_s: (f64, f64),
    pub overall_s: (f64, f64),
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct RuntimeProfile {
    pub n_sample: usize,
    pub trials: usize,
    pub profiles: Vec<GeneratorProfile>,
}

/// Wall-clock fit and sample timing per generator, fitting on the whole
/// dataset, mean +/- std over `trials` trials. Single-threaded, no I/O.
pub fn profile_runtime(
    d: &Dataset,
    generators: &[GeneratorKind],
    n_sample: usize,
    trials: usize,
) -> RuntimeProfile {
    assert!(trials >= 1);
    let rows: Vec<_> = d.rows().to_vec();
    let mut profiles = Vec::new();
    for &kind in generators {
        let mut fit_times = Vec::new();
        let mut sample_times = Vec::new();
        let mut note = String::new();
        for trial in 0..trials {
            let start = Instant::now();
            match fit(kind, &rows, d.schema(), seed::mix(0xBE, &[trial as u64])) {
                Ok(model) => {
                    let fit_s = start.elapsed().as_secs_f64();
                    let start = Instant::now();
                    let batch = model.sample(n_sample, seed::mix(0xAF, &[trial as u64]));
                    let sample_s = start.elapsed().as_secs_f64();
                    assert_eq!(batch.len(), n_sample);
                    fit_times.push(fit_s);
                    sample_times.push(sample_s);
                }
                Err(e) => {
                    note = e.to_string();
                    break;
                }
            }
        }
        let stats = |values: &[f64]| {
            if values.is_empty() {
                return (0.0, 0.0);
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            (mean, sample_std(values, mean))
        };
        let fit_s = stats(&fit_times);
        let sample_s = stats(&sample_times);
        let overall: Vec<f64> = fit_times
            .iter()
            .zip(&sample_times)
            .map(|(a, b)| a + b)
            .collect();
        let overall_s = stats(&overall);
        profiles.push(GeneratorProfile {
            generator: kind,
            fit_s,
            sample_s,
            overall_s,
            note,
        });
    }
    RuntimeProfile {
        n_sample,
        trials,
        profiles,
    }
}
