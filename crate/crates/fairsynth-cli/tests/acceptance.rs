//! Acceptance gate: one test per release criterion, each printing a single
//! pass/fail line. Tolerances are pinned in the assertions below.

// the check! macro negates arbitrary float comparisons by design
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use fairsynth::classifier::{gradient_hessian, log_loss, train, GbdtConfig};
use fairsynth::fixtures::{all_discrete_fixture, imbalanced_fixture, wide_fixture};
use fairsynth::generators::{fit, GeneratorKind};
use fairsynth::harness::{run_grid, ExperimentConfig, RunRecord};
use fairsynth::metrics::{
    accuracy, equal_opportunity, equalized_odds, f1, roc_auc, statistical_parity, EvalFrame,
};
use fairsynth::partition::{GroupClassCounts, SubgroupKey};
use fairsynth::schema::ColumnKind;
use fairsynth::seed;
use fairsynth::strategies::{plan, StrategyKind};
use fairsynth::{Cell, Dataset, FitError};

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn criterion(n: usize, name: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("criterion {n} ({name}): pass"),
        Err(msg) => {
            println!("criterion {n} ({name}): FAIL - {msg}");
            panic!("criterion {n} ({name}) failed: {msg}");
        }
    }
}

// ---------- criterion 1: strategy plans vs brute-force postconditions ----------

fn binary_tuples(attrs: usize) -> Vec<Vec<u32>> {
    let mut tuples = vec![Vec::new()];
    for _ in 0..attrs {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                [0u32, 1].iter().map(move |&b| {
                    let mut next = t.clone();
                    next.push(b);
                    next
                })
            })
            .collect();
    }
    tuples
}

fn brute_largest(counts: &GroupClassCounts) -> Vec<u32> {
    let mut best: Option<(usize, Vec<u32>)> = None;
    for g in counts.group_tuples() {
        let total = counts.get(&g, 0) + counts.get(&g, 1);
        let better = match &best {
            None => true,
            Some((t, tuple)) => total > *t || (total == *t && g < *tuple),
        };
        if better {
            best = Some((total, g));
        }
    }
    best.unwrap().1
}

fn check_one_table(counts: &GroupClassCounts) -> Result<(), String> {
    let largest = brute_largest(counts);
    let largest_total = counts.get(&largest, 0) + counts.get(&largest, 1);
    let groups = counts.group_tuples();

    for strategy in StrategyKind::ALL {
        let p = plan(strategy, counts).map_err(|e| format!("{strategy:?}: {e}"))?;
        let mut post: BTreeMap<SubgroupKey, usize> = counts.counts.clone();
        for (key, &n) in &p.to_sample {
            check!(n > 0, "{strategy:?}: plan stores a zero entry");
            check!(
                counts.counts[key] > 0,
                "{strategy:?}: empty subgroup sampled"
            );
            *post.get_mut(key).unwrap() += n;
        }
        let synthetic = p.total_synthetic();
        let r_aug = synthetic as f64 / (synthetic + counts.total()) as f64;
        check!((p.r_aug - r_aug).abs() < 1e-15, "{strategy:?}: r_aug off");
        let at = |g: &[u32], c: u8| post[&SubgroupKey::new(g.to_vec(), c)];

        match strategy {
            StrategyKind::Class => {
                for g in &groups {
                    let target = counts.get(g, 0).max(counts.get(g, 1));
                    check!(
                        at(g, 0) == target && at(g, 1) == target,
                        "class: {g:?} unbalanced"
                    );
                }
            }
            StrategyKind::ClassAndProtected => {
                let target = counts.get(&largest, 0).max(counts.get(&largest, 1));
                for g in &groups {
                    for c in 0..2u8 {
                        check!(
                            at(g, c) == counts.get(g, c).max(target),
                            "class-protected: {g:?}/{c} at {}, want {}",
                            at(g, c),
                            counts.get(g, c).max(target)
                        );
                    }
                }
            }
            StrategyKind::Protected => {
                for g in &groups {
                    if *g == largest {
                        check!(
                            p.count_for(&SubgroupKey::new(g.clone(), 0)) == 0
                                && p.count_for(&SubgroupKey::new(g.clone(), 1)) == 0,
                            "protected: largest group sampled"
                        );
                        continue;
                    }
                    check!(
                        at(g, 0) + at(g, 1) == largest_total,
                        "protected: {g:?} total {} != {largest_total}",
                        at(g, 0) + at(g, 1)
                    );
                    // exact largest-remainder split, ties to class 0
                    let (q, pc) = (counts.get(g, 0), counts.get(g, 1));
                    let total = q + pc;
                    let deficit = largest_total - total;
                    let exact0 = deficit as f64 * q as f64 / total as f64;
                    let exact1 = deficit as f64 * pc as f64 / total as f64;
                    let mut want = [exact0.floor() as usize, exact1.floor() as usize];
                    if want[0] + want[1] < deficit {
                        let idx = usize::from(exact1 - want[1] as f64 > exact0 - want[0] as f64);
                        want[idx] += 1;
                    }
                    for c in 0..2u8 {
                        check!(
                            p.count_for(&SubgroupKey::new(g.clone(), c)) == want[c as usize],
                            "protected: {g:?}/{c} rounding mismatch"
                        );
                    }
                }
            }
            StrategyKind::ClassRatio => {
                let rho = counts.get(&largest, 1) as f64 / largest_total as f64;
                for g in &groups {
                    if *g == largest {
                        check!(
                            p.count_for(&SubgroupKey::new(g.clone(), 0)) == 0
                                && p.count_for(&SubgroupKey::new(g.clone(), 1)) == 0,
                            "class-ratio: largest group sampled"
                        );
                        continue;
                    }
                    let total = (at(g, 0) + at(g, 1)) as f64;
                    let ratio = at(g, 1) as f64 / total;
                    check!(
                        (ratio - rho).abs() <= 0.5 / total + 1e-12,
                        "class-ratio: {g:?} off by more than half a row"
                    );
                }
            }
        }
    }
    Ok(())
}

#[test]
fn acceptance_1_strategy_oracles() {
    criterion(1, "strategy oracle suite, 1000 tables", || {
        let start = Instant::now();
        let mut rng = seed::rng(0xACC1);
        for case in 0..1000 {
            let attrs = rng.random_range(1..=3usize);
            let mut counts = BTreeMap::new();
            for tuple in binary_tuples(attrs) {
                for c in 0..2u8 {
                    counts.insert(
                        SubgroupKey::new(tuple.clone(), c),
                        rng.random_range(1..=10_000usize),
                    );
                }
            }
            check_one_table(&GroupClassCounts { counts })
                .map_err(|e| format!("table {case}: {e}"))?;
        }
        let elapsed = start.elapsed().as_secs_f64();
        check!(elapsed < 10.0, "took {elapsed:.1}s, budget 10s");
        Ok(())
    });
}

// ---------- criterion 2: metrics vs loop oracles ----------

fn oracle_auc_all_pairs(frame: &EvalFrame) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..frame.y_true.len() {
        for j in 0..frame.y_true.len() {
            if frame.y_true[i] == 1 && frame.y_true[j] == 0 {
                pairs += 1.0;
                if frame.y_score[i] > frame.y_score[j] {
                    wins += 1.0;
                } else if frame.y_score[i] == frame.y_score[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

fn oracle_spread(frame: &EvalFrame, cond: impl Fn(u8) -> bool) -> (f64, usize) {
    let mut groups: Vec<Vec<u32>> = frame.group_of_row.clone();
    groups.sort();
    groups.dedup();
    let mut rates = Vec::new();
    for g in &groups {
        let (mut hits, mut total) = (0.0, 0.0);
        for i in 0..frame.y_true.len() {
            if &frame.group_of_row[i] == g && cond(frame.y_true[i]) {
                total += 1.0;
                hits += f64::from(frame.y_pred[i]);
            }
        }
        if total > 0.0 {
            rates.push(hits / total);
        }
    }
    let gap = if rates.len() >= 2 {
        rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - rates.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    (gap, rates.len())
}

#[test]
fn acceptance_2_metric_oracles() {
    criterion(2, "metric oracle suite, 1000 frames", || {
        let start = Instant::now();
        let mut rng = seed::rng(0xACC2);
        for case in 0..1000 {
            let n = rng.random_range(2..=200usize);
            let n_groups = rng.random_range(2..=4u32);
            let mut frame = EvalFrame {
                y_true: (0..n).map(|_| rng.random_range(0..2u8)).collect(),
                y_pred: (0..n).map(|_| rng.random_range(0..2u8)).collect(),
                y_score: (0..n)
                    .map(|_| rng.random_range(0..8u32) as f64 / 7.0)
                    .collect(),
                group_of_row: (0..n).map(|i| vec![i as u32 % n_groups]).collect(),
            };
            // guarantee both classes so every metric is defined
            frame.y_true[0] = 1;
            frame.y_true[n - 1] = 0;

            let correct = frame
                .y_true
                .iter()
                .zip(&frame.y_pred)
                .filter(|(t, p)| t == p)
                .count() as f64;
            let acc = accuracy(&frame).map_err(|e| e.to_string())?;
            check!(
                (acc - correct / n as f64).abs() < 1e-12,
                "case {case}: accuracy"
            );

            let tp = (0..n)
                .filter(|&i| frame.y_true[i] == 1 && frame.y_pred[i] == 1)
                .count() as f64;
            let fp = (0..n)
                .filter(|&i| frame.y_true[i] == 0 && frame.y_pred[i] == 1)
                .count() as f64;
            let fne = (0..n)
                .filter(|&i| frame.y_true[i] == 1 && frame.y_pred[i] == 0)
                .count() as f64;
            let (f1_value, _) = f1(&frame).map_err(|e| e.to_string())?;
            let f1_oracle = if tp + fp + fne == 0.0 {
                0.0
            } else {
                2.0 * tp / (2.0 * tp + fp + fne)
            };
            check!((f1_value - f1_oracle).abs() < 1e-12, "case {case}: f1");

            let auc = roc_auc(&frame).map_err(|e| e.to_string())?;
            check!(
                (auc - oracle_auc_all_pairs(&frame)).abs() < 1e-12,
                "case {case}: roc_auc vs all-pairs Mann-Whitney"
            );

            let (tpr_gap, tpr_defined) = oracle_spread(&frame, |y| y == 1);
            let (fpr_gap, _) = oracle_spread(&frame, |y| y == 0);
            match equalized_odds(&frame) {
                Ok((v, _)) => check!(
                    (v - (tpr_gap + fpr_gap)).abs() < 1e-12,
                    "case {case}: eq_odds"
                ),
                Err(e) => return Err(format!("case {case}: eq_odds {e}")),
            }
            match equal_opportunity(&frame) {
                Ok((v, _)) => check!((v - tpr_gap).abs() < 1e-12, "case {case}: eq_opp"),
                Err(_) => check!(tpr_defined == 0, "case {case}: eq_opp errored with support"),
            }
            let (sp_gap, _) = oracle_spread(&frame, |_| true);
            let (sp, _) = statistical_parity(&frame).map_err(|e| e.to_string())?;
            check!((sp - sp_gap).abs() < 1e-12, "case {case}: sp");
        }
        let elapsed = start.elapsed().as_secs_f64();
        check!(elapsed < 30.0, "took {elapsed:.1}s, budget 30s");
        Ok(())
    });
}

// ---------- criterion 3: hand-derived fixtures ----------

#[test]
fn acceptance_3_hand_derived_fixtures() {
    criterion(3, "hand-derived fixtures", || {
        // Male [1]: 200 positive / 600 negative; Female [0]: 50 / 150
        let mut counts = BTreeMap::new();
        counts.insert(SubgroupKey::new(vec![1], 1), 200);
        counts.insert(SubgroupKey::new(vec![1], 0), 600);
        counts.insert(SubgroupKey::new(vec![0], 1), 50);
        counts.insert(SubgroupKey::new(vec![0], 0), 150);
        let counts = GroupClassCounts { counts };

        let p = plan(StrategyKind::Class, &counts).map_err(|e| e.to_string())?;
        check!(
            p.count_for(&SubgroupKey::new(vec![1], 1)) == 400,
            "class M1"
        );
        check!(
            p.count_for(&SubgroupKey::new(vec![0], 1)) == 100,
            "class F1"
        );
        check!(
            (p.r_aug - 1.0 / 3.0).abs() < 5e-5,
            "class r_aug {}",
            p.r_aug
        );

        let p = plan(StrategyKind::ClassAndProtected, &counts).map_err(|e| e.to_string())?;
        check!(p.count_for(&SubgroupKey::new(vec![1], 1)) == 400, "cp M1");
        check!(p.count_for(&SubgroupKey::new(vec![0], 1)) == 550, "cp F1");
        check!(p.count_for(&SubgroupKey::new(vec![0], 0)) == 450, "cp F0");
        check!((p.r_aug - 0.5833).abs() < 5e-5, "cp r_aug {}", p.r_aug);

        let mut ratio_counts = counts.counts.clone();
        ratio_counts.insert(SubgroupKey::new(vec![0], 1), 30);
        ratio_counts.insert(SubgroupKey::new(vec![0], 0), 170);
        let p = plan(
            StrategyKind::ClassRatio,
            &GroupClassCounts {
                counts: ratio_counts,
            },
        )
        .map_err(|e| e.to_string())?;
        check!(p.count_for(&SubgroupKey::new(vec![0], 1)) == 27, "ratio F1");
        check!(p.total_synthetic() == 27, "ratio total");

        // eq odds 1.5 / eq opp 0.5 frame
        let frame = EvalFrame {
            y_true: vec![1, 1, 0, 0, 1, 0],
            y_pred: vec![1, 0, 0, 0, 1, 1],
            y_score: vec![0.0; 6],
            group_of_row: vec![vec![0], vec![0], vec![0], vec![0], vec![1], vec![1]],
        };
        let (odds, _) = equalized_odds(&frame).map_err(|e| e.to_string())?;
        check!((odds - 1.5).abs() < 1e-12, "eq odds {odds}");
        let (opp, _) = equal_opportunity(&frame).map_err(|e| e.to_string())?;
        check!((opp - 0.5).abs() < 1e-12, "eq opp {opp}");

        // sp 0.25 frame
        let frame = EvalFrame {
            y_true: vec![1, 1, 0, 0, 1, 0, 0, 0],
            y_pred: vec![1, 1, 0, 0, 1, 0, 0, 0],
            y_score: vec![0.0; 8],
            group_of_row: vec![vec![0]; 4]
                .into_iter()
                .chain(vec![vec![1]; 4])
                .collect(),
        };
        let (sp, _) = statistical_parity(&frame).map_err(|e| e.to_string())?;
        check!((sp - 0.25).abs() < 1e-12, "sp {sp}");

        // auc 0.75 frame
        let frame = EvalFrame {
            y_true: vec![1, 0, 1, 0],
            y_pred: vec![1, 1, 0, 0],
            y_score: vec![0.9, 0.8, 0.3, 0.2],
            group_of_row: vec![vec![0]; 4],
        };
        let auc = roc_auc(&frame).map_err(|e| e.to_string())?;
        check!((auc - 0.75).abs() < 1e-12, "auc {auc}");
        Ok(())
    });
}

// ---------- criterion 4: generator fidelity ----------

fn tv_distance(a: &[u32], b: &[u32]) -> f64 {
    let mut pa: BTreeMap<u32, f64> = BTreeMap::new();
    let mut pb: BTreeMap<u32, f64> = BTreeMap::new();
    for &v in a {
        *pa.entry(v).or_default() += 1.0 / a.len() as f64;
    }
    for &v in b {
        *pb.entry(v).or_default() += 1.0 / b.len() as f64;
    }
    let keys: Vec<u32> = pa.keys().chain(pb.keys()).copied().collect();
    0.5 * keys
        .iter()
        .map(|k| (pa.get(k).unwrap_or(&0.0) - pb.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut max = 0.0f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let fa = i as f64 / a.len() as f64;
        let fb = j as f64 / b.len() as f64;
        max = max.max((fa - fb).abs());
    }
    max
}

/// k-nearest neighbors under the SMOTE-NC metric, recomputed independently:
/// standardized continuous Euclidean plus median-std^2 per categorical
/// mismatch, neighbors ordered by (distance, index).
fn smote_knn(d: &Dataset, k: usize) -> Vec<Vec<usize>> {
    let cont: Vec<usize> = (0..d.schema().len())
        .filter(|&j| d.schema().columns[j].kind == ColumnKind::Continuous)
        .collect();
    let cat: Vec<usize> = (0..d.schema().len())
        .filter(|&j| d.schema().columns[j].kind == ColumnKind::Discrete)
        .collect();
    let n = d.n_rows() as f64;
    let mut means = Vec::new();
    let mut stds = Vec::new();
    for &j in &cont {
        let mean = (0..d.n_rows()).map(|i| d.row(i)[j].as_cont()).sum::<f64>() / n;
        let var = (0..d.n_rows())
            .map(|i| (d.row(i)[j].as_cont() - mean).powi(2))
            .sum::<f64>()
            / n;
        means.push(mean);
        stds.push(var.sqrt().max(f64::MIN_POSITIVE));
    }
    let mut sorted = stds.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_std = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
    };
    let dist = |a: usize, b: usize| {
        let mut total = 0.0;
        for (c, &j) in cont.iter().enumerate() {
            let za = (d.row(a)[j].as_cont() - means[c]) / stds[c];
            let zb = (d.row(b)[j].as_cont() - means[c]) / stds[c];
            total += (za - zb) * (za - zb);
        }
        for &j in &cat {
            if d.row(a)[j].as_disc() != d.row(b)[j].as_disc() {
                total += median_std * median_std;
            }
        }
        total
    };
    (0..d.n_rows())
        .map(|i| {
            let mut ds: Vec<(f64, usize)> = (0..d.n_rows())
                .filter(|&j| j != i)
                .map(|j| (dist(i, j), j))
                .collect();
            ds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            ds.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// Does `sample` lie on the segment between `base` and `nb` in every
/// continuous column, with one shared interpolation parameter?
fn on_segment(d: &Dataset, cont: &[usize], sample: &[Cell], base: usize, nb: usize) -> bool {
    let tol = 1e-9;
    let mut u: Option<f64> = None;
    for &j in cont {
        let b = d.row(base)[j].as_cont();
        let n = d.row(nb)[j].as_cont();
        let s = sample[j].as_cont();
        if (n - b).abs() > tol * b.abs().max(n.abs()).max(1.0) {
            let candidate = (s - b) / (n - b);
            match u {
                None => {
                    if !(-tol..=1.0 + tol).contains(&candidate) {
                        return false;
                    }
                    u = Some(candidate);
                }
                Some(prev) => {
                    if (candidate - prev).abs() > tol * prev.abs().max(1.0) {
                        return false;
                    }
                }
            }
        } else if (s - b).abs() > tol * b.abs().max(1.0) {
            return false;
        }
    }
    true
}

#[test]
fn acceptance_4_generator_fidelity() {
    criterion(4, "generator fidelity", || {
        let d = imbalanced_fixture(5000, 404);
        let schema = d.schema();
        let disc_cols: Vec<usize> = (0..schema.len())
            .filter(|&j| schema.columns[j].kind == ColumnKind::Discrete)
            .collect();
        let cont_cols: Vec<usize> = (0..schema.len())
            .filter(|&j| schema.columns[j].kind == ColumnKind::Continuous)
            .collect();

        // CART: per-discrete-column total variation vs training data
        let cart =
            fit(GeneratorKind::CartChain, d.rows(), schema, 11).map_err(|e| e.to_string())?;
        let cart_sample = cart.sample(10_000, 12);
        for &j in &disc_cols {
            let train: Vec<u32> = (0..d.n_rows()).map(|i| d.row(i)[j].as_disc()).collect();
            let synth: Vec<u32> = cart_sample.iter().map(|r| r[j].as_disc()).collect();
            let tv = tv_distance(&train, &synth);
            check!(tv <= 0.05, "cart TV {tv:.4} on column {j}");
        }

        // copula: per-continuous-column KS vs training data
        let copula =
            fit(GeneratorKind::GaussianCopula, d.rows(), schema, 13).map_err(|e| e.to_string())?;
        let copula_sample = copula.sample(10_000, 14);
        for &j in &cont_cols {
            let train: Vec<f64> = (0..d.n_rows()).map(|i| d.row(i)[j].as_cont()).collect();
            let synth: Vec<f64> = copula_sample.iter().map(|r| r[j].as_cont()).collect();
            let ks = ks_distance(&train, &synth);
            check!(ks <= 0.05, "copula KS {ks:.4} on column {j}");
        }

        // SMOTE-NC: every sample sits on a base-to-k-nearest-neighbor segment
        let small = imbalanced_fixture(60, 21);
        let smote = fit(GeneratorKind::SmoteNC, small.rows(), small.schema(), 15)
            .map_err(|e| e.to_string())?;
        let k = 5.min(small.n_rows() - 1);
        let knn = smote_knn(&small, k);
        let smote_sample = smote.sample(10_000, 16);
        for (s_idx, sample) in smote_sample.iter().enumerate() {
            let hit = (0..small.n_rows()).any(|b| {
                knn[b]
                    .iter()
                    .any(|&nb| on_segment(&small, &cont_cols, sample, b, nb))
            });
            check!(hit, "smote sample {s_idx} off every base-neighbor segment");
        }

        // SMOTE-NC refuses all-discrete data
        let discrete = all_discrete_fixture(100, 3);
        match fit(
            GeneratorKind::SmoteNC,
            discrete.rows(),
            discrete.schema(),
            17,
        ) {
            Err(FitError::NotApplicable(_)) => {}
            other => {
                return Err(format!(
                    "expected NotApplicable on all-discrete data, got {other:?}"
                ))
            }
        }
        Ok(())
    });
}

// ---------- criterion 5: classifier checks ----------

#[test]
fn acceptance_5_classifier() {
    criterion(5, "classifier checks", || {
        // training log-loss beats the constant model on every fixture
        for (name, d) in [
            ("imbalanced", imbalanced_fixture(800, 31)),
            ("all-discrete", all_discrete_fixture(400, 32)),
            ("wide", wide_fixture(400, 33)),
        ] {
            let config = GbdtConfig {
                rounds: 30,
                ..GbdtConfig::default()
            };
            let model = train(&d, &config).map_err(|e| format!("{name}: {e}"))?;
            let labels: Vec<u8> = (0..d.n_rows()).map(|i| d.class_of(i)).collect();
            let pos = labels.iter().filter(|&&y| y == 1).count() as f64;
            let rate = pos / labels.len() as f64;
            let base = log_loss(&labels, &vec![rate; labels.len()]);
            let probs = model.predict_proba(&d).map_err(|e| e.to_string())?;
            let loss = log_loss(&labels, &probs);
            check!(
                loss <= base + 1e-9,
                "{name}: loss {loss:.6} > base {base:.6}"
            );
        }

        // gradient and hessian vs central finite differences, 1e-6 relative
        let sigmoid = |s: f64| 1.0 / (1.0 + (-s).exp());
        let eps = 5e-4;
        for &(s, y) in &[(0.3, 1u8), (-1.2, 0u8), (0.8, 0u8), (0.0, 1u8), (-0.4, 1u8)] {
            let loss = |s: f64| log_loss(&[y], &[sigmoid(s)]);
            let (g, h) = gradient_hessian(sigmoid(s), y);
            let g_fd = (loss(s + eps) - loss(s - eps)) / (2.0 * eps);
            let h_fd = (loss(s + eps) - 2.0 * loss(s) + loss(s - eps)) / (eps * eps);
            check!(
                (g - g_fd).abs() / g_fd.abs() < 1e-6,
                "gradient at ({s}, {y}): {g} vs fd {g_fd}"
            );
            check!(
                (h - h_fd).abs() / h_fd.abs() < 1e-6,
                "hessian at ({s}, {y}): {h} vs fd {h_fd}"
            );
        }

        // protected blindness: permuting the protected column changes nothing
        let d = imbalanced_fixture(500, 34);
        let protected_col = d.schema().protected_indices()[0];
        let model = train(&d, &GbdtConfig::default()).map_err(|e| e.to_string())?;
        let base = model.predict_proba(&d).map_err(|e| e.to_string())?;
        let mut rows: Vec<Vec<Cell>> = d.rows().to_vec();
        let n = rows.len();
        for (i, row) in rows.iter_mut().enumerate() {
            row[protected_col] = d.row((i + 13) % n)[protected_col];
        }
        let permuted = model.predict_proba_rows(&rows).map_err(|e| e.to_string())?;
        check!(
            base == permuted,
            "scores changed under protected permutation"
        );
        Ok(())
    });
}

// ---------- criterion 6: directional end-to-end ----------

fn paired_wins(
    records: &[RunRecord],
    strategy: &str,
    better: impl Fn(&RunRecord, &RunRecord) -> bool,
) -> usize {
    let baseline: BTreeMap<(usize, usize), &RunRecord> = records
        .iter()
        .filter(|r| r.strategy == "real-only")
        .map(|r| ((r.repeat, r.fold), r))
        .collect();
    records
        .iter()
        .filter(|r| r.strategy == strategy && r.generator == "cart")
        .filter(|r| better(r, baseline[&(r.repeat, r.fold)]))
        .count()
}

#[test]
fn acceptance_6_directional_end_to_end() {
    criterion(6, "directional end-to-end", || {
        let start = Instant::now();
        let d = imbalanced_fixture(5000, 17);
        let config = ExperimentConfig {
            strategies: vec![
                StrategyKind::Class,
                StrategyKind::ClassAndProtected,
                StrategyKind::ClassRatio,
            ],
            generators: vec![GeneratorKind::CartChain],
            base_seed: 7,
            classifier: GbdtConfig {
                rounds: 50,
                max_depth: 4,
                min_leaf: 60,
                ..GbdtConfig::default()
            },
            ..Default::default()
        };
        let result = run_grid(&d, &config);
        check!(
            !result.has_failures(),
            "grid failures: {:?}",
            result.failures
        );

        let auc_class = paired_wins(&result.records, "class", |r, b| r.roc_auc >= b.roc_auc);
        let auc_cp = paired_wins(&result.records, "class-protected", |r, b| {
            r.roc_auc >= b.roc_auc
        });
        check!(
            auc_class >= 4 || auc_cp >= 4,
            "AUC direction: class {auc_class}/6, class-protected {auc_cp}/6"
        );
        let sp_ratio = paired_wins(&result.records, "class-ratio", |r, b| r.sp <= b.sp);
        check!(sp_ratio >= 4, "SP direction: class-ratio {sp_ratio}/6");

        let elapsed = start.elapsed().as_secs_f64();
        check!(elapsed < 300.0, "took {elapsed:.0}s, budget 300s");
        Ok(())
    });
}

// ---------- criterion 7: leakage guard + byte-identical benchmark output ----------

const FIXTURE_SCHEMA_TOML: &str = r#"
[[columns]]
name = "x1"
kind = "continuous"
role = "feature"

[[columns]]
name = "x2"
kind = "continuous"
role = "feature"

[[columns]]
name = "x3"
kind = "continuous"
role = "feature"

[[columns]]
name = "d1"
kind = "discrete"
role = "feature"

[[columns]]
name = "d2"
kind = "discrete"
role = "feature"

[[columns]]
name = "d3"
kind = "discrete"
role = "feature"

[[columns]]
name = "sex"
kind = "discrete"
role = "protected"

[[columns]]
name = "label"
kind = "discrete"
role = "target"
"#;

#[test]
fn acceptance_7_leakage_and_reproducibility() {
    criterion(7, "leakage guard and reproducibility", || {
        // debug assertions are active in this profile, so the in-process full
        // grid exercises the leakage guard on every run
        let d = imbalanced_fixture(800, 77);
        let config = ExperimentConfig {
            classifier: GbdtConfig {
                rounds: 15,
                ..GbdtConfig::default()
            },
            ..Default::default()
        };
        let result = run_grid(&d, &config);
        check!(
            !result.has_failures(),
            "full grid failed: {:?}",
            result.failures
        );

        // two identical CLI benchmark invocations, byte-compared
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let data = dir.path().join("fixture.csv");
        let schema = dir.path().join("schema.toml");
        d.write_csv(&data, false).map_err(|e| e.to_string())?;
        std::fs::write(&schema, FIXTURE_SCHEMA_TOML).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out_dir = dir.path().join(format!("out{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_fairsynth"))
                .args([
                    "benchmark",
                    "--data",
                    data.to_str().unwrap(),
                    "--schema",
                    schema.to_str().unwrap(),
                    "--strategies",
                    "class,class-ratio",
                    "--generators",
                    "cart",
                    "--rounds",
                    "15",
                    "--out-dir",
                    out_dir.to_str().unwrap(),
                ])
                .status()
                .map_err(|e| e.to_string())?;
            check!(
                status.code() == Some(0),
                "benchmark exit {:?}",
                status.code()
            );
            let results = std::fs::read(out_dir.join("results.csv")).map_err(|e| e.to_string())?;
            let runs = std::fs::read(out_dir.join("runs.jsonl")).map_err(|e| e.to_string())?;
            outputs.push((results, runs));
        }
        check!(
            outputs[0].0 == outputs[1].0,
            "results.csv differs between runs"
        );
        check!(
            outputs[0].1 == outputs[1].1,
            "runs.jsonl differs between runs"
        );
        Ok(())
    });
}

// ---------- criterion 8: runtime sanity ----------

#[test]
fn acceptance_8_runtime() {
    criterion(8, "runtime sanity, 45k x 15 fixture", || {
        let d = wide_fixture(45_000, 8);
        for (kind, budget) in [
            (GeneratorKind::CartChain, 60.0),
            (GeneratorKind::GaussianCopula, 120.0),
        ] {
            let start = Instant::now();
            let model = fit(kind, d.rows(), d.schema(), 80).map_err(|e| e.to_string())?;
            let batch = model.sample(10_000, 81);
            let elapsed = start.elapsed().as_secs_f64();
            check!(batch.len() == 10_000, "{} short batch", kind.name());
            check!(
                elapsed <= budget,
                "{} fit+sample took {elapsed:.1}s, budget {budget}s",
                kind.name()
            );
        }
        Ok(())
    });
}
