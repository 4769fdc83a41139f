//! Utility and group-fairness metrics on held-out data.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::error::MetricError;

/// Predictions and ground truth for one evaluation split.
#[derive(Debug, Clone)]
pub struct EvalFrame {
    pub y_true: Vec<u8>,
    pub y_score: Vec<f64>,
    pub y_pred: Vec<u8>,
    /// Protected-value tuple per row.
    pub group_of_row: Vec<Vec<u32>>,
}

impl EvalFrame {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.y_true.is_empty() {
            return Err(MetricError::EmptyFrame);
        }
        assert_eq!(self.y_true.len(), self.y_score.len());
        assert_eq!(self.y_true.len(), self.y_pred.len());
        assert_eq!(self.y_true.len(), self.group_of_row.len());
        Ok(())
    }

    fn groups(&self) -> Vec<Vec<u32>> {
        let set: BTreeSet<Vec<u32>> = self.group_of_row.iter().cloned().collect();
        set.into_iter().collect()
    }
}

/// Records a (metric, group) pair whose conditional rate had empty support
/// and was skipped rather than treated as zero.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct UndefinedFlag {
    pub metric: &'static str,
    pub group: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub accuracy: f64,
    pub f1: f64,
    pub roc_auc: f64,
    pub eq_odds: f64,
    pub stat_parity: f64,
    pub eq_opp: f64,
    pub undefined_flags: BTreeSet<UndefinedFlag>,
}

pub fn accuracy(frame: &EvalFrame) -> Result<f64, MetricError> {
    frame.validate()?;
    let correct = frame
        .y_true
        .iter()
        .zip(&frame.y_pred)
        .filter(|(t, p)| t == p)
        .count();
    Ok(correct as f64 / frame.y_true.len() as f64)
}

/// F1 of the positive class; 0 (with a flag) when there are neither
/// predicted nor true positives.
pub fn f1(frame: &EvalFrame) -> Result<(f64, bool), MetricError> {
    frame.validate()?;
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut fne = 0.0;
    for (&t, &p) in frame.y_true.iter().zip(&frame.y_pred) {
        match (t, p) {
            (1, 1) => tp += 1.0,
            (0, 1) => fp += 1.0,
            (1, 0) => fne += 1.0,
            _ => {}
        }
    }
    if tp + fp + fne == 0.0 {
        return Ok((0.0, true));
    }
    Ok((2.0 * tp / (2.0 * tp + fp + fne), false))
}

/// ROC AUC as the Mann-Whitney statistic with half credit for score ties.
pub fn roc_auc(frame: &EvalFrame) -> Result<f64, MetricError> {
    frame.validate()?;
    let n_pos = frame.y_true.iter().filter(|&&t| t == 1).count();
    let n_neg = frame.y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricError::AucUndefined);
    }
    let mut order: Vec<usize> = (0..frame.y_true.len()).collect();
    order.sort_by(|&a, &b| frame.y_score[a].partial_cmp(&frame.y_score[b]).unwrap());
    let mut wins = 0.0; // positive strictly above a negative
    let mut ties = 0.0;
    let mut cum_neg = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && frame.y_score[order[j + 1]] == frame.y_score[order[i]] {
            j += 1;
        }
        let pos_here = order[i..=j]
            .iter()
            .filter(|&&r| frame.y_true[r] == 1)
            .count() as f64;
        let neg_here = (j - i + 1) as f64 - pos_here;
        wins += pos_here * cum_neg;
        ties += pos_here * neg_here;
        cum_neg += neg_here;
        i = j + 1;
    }
    Ok((wins + 0.5 * ties) / (n_pos as f64 * n_neg as f64))
}

/// Per-group conditional rate P[pred = 1 | condition], or None when the
/// conditioning set is empty.
fn group_rate(frame: &EvalFrame, group: &[u32], cond: impl Fn(u8) -> bool) -> Option<f64> {
    let mut hits = 0usize;
    let mut total = 0usize;
    for i in 0..frame.y_true.len() {
        if frame.group_of_row[i] == group && cond(frame.y_true[i]) {
            total += 1;
            hits += usize::from(frame.y_pred[i] == 1);
        }
    }
    (total > 0).then(|| hits as f64 / total as f64)
}

struct RateSpread {
    gap: f64,
    flags: Vec<UndefinedFlag>,
    defined: usize,
}

/// max - min over the groups where the rate is defined; reduces to the
/// absolute difference for two groups.
fn rate_spread(
    frame: &EvalFrame,
    metric: &'static str,
    cond: impl Fn(u8) -> bool + Copy,
) -> RateSpread {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut flags = Vec::new();
    let mut defined = 0;
    for group in frame.groups() {
        match group_rate(frame, &group, cond) {
            Some(rate) => {
                min = min.min(rate);
                max = max.max(rate);
                defined += 1;
            }
            None => flags.push(UndefinedFlag {
                metric,
                group: format!("{group:?}"),
            }),
        }
    }
    let gap = if defined >= 2 { max - min } else { 0.0 };
    RateSpread {
        gap,
        flags,
        defined,
    }
}

/// (max TPR - min TPR) + (max FPR - min FPR) across groups.
pub fn equalized_odds(frame: &EvalFrame) -> Result<(f64, Vec<UndefinedFlag>), MetricError> {
    frame.validate()?;
    let tpr = rate_spread(frame, "eq_odds_tpr", |y| y == 1);
    let fpr = rate_spread(frame, "eq_odds_fpr", |y| y == 0);
    if tpr.defined == 0 && fpr.defined == 0 {
        return Err(MetricError::AllRatesUndefined);
    }
    let mut flags = tpr.flags;
    flags.extend(fpr.flags);
    Ok((tpr.gap + fpr.gap, flags))
}

/// max - min of positive-prediction rates across groups.
pub fn statistical_parity(frame: &EvalFrame) -> Result<(f64, Vec<UndefinedFlag>), MetricError> {
    frame.validate()?;
    let spread = rate_spread(frame, "stat_parity", |_| true);
    if spread.defined == 0 {
        return Err(MetricError::AllRatesUndefined);
    }
    Ok((spread.gap, spread.flags))
}

/// max - min of true positive rates across groups.
pub fn equal_opportunity(frame: &EvalFrame) -> Result<(f64, Vec<UndefinedFlag>), MetricError> {
    frame.validate()?;
    let spread = rate_spread(frame, "eq_opp", |y| y == 1);
    if spread.defined == 0 {
        return Err(MetricError::AllRatesUndefined);
    }
    Ok((spread.gap, spread.flags))
}

/// All six metrics in one report.
pub fn report(frame: &EvalFrame) -> Result<MetricReport, MetricError> {
    let accuracy = accuracy(frame)?;
    let (f1, f1_flag) = f1(frame)?;
    let roc_auc = roc_auc(frame)?;
    let (eq_odds, odds_flags) = equalized_odds(frame)?;
    let (stat_parity, sp_flags) = statistical_parity(frame)?;
    let (eq_opp, opp_flags) = equal_opportunity(frame)?;
    let mut undefined_flags: BTreeSet<UndefinedFlag> = BTreeSet::new();
    if f1_flag {
        undefined_flags.insert(UndefinedFlag {
            metric: "f1",
            group: String::new(),
        });
    }
    undefined_flags.extend(odds_flags);
    undefined_flags.extend(sp_flags);
    undefined_flags.extend(opp_flags);
    Ok(MetricReport {
        accuracy,
        f1,
        roc_auc,
        eq_odds,
        stat_parity,
        eq_opp,
        undefined_flags,
    })
}

/// Per-run metric fields in a fixed order, used by aggregation and reports.
pub const METRIC_FIELDS: [&str; 6] = ["accuracy", "roc_auc", "f1", "eq_odds", "sp", "eq_opp"];

impl MetricReport {
    pub fn field(&self, name: &str) -> f64 {
        match name {
            "accuracy" => self.accuracy,
            "roc_auc" => self.roc_auc,
            "f1" => self.f1,
            "eq_odds" => self.eq_odds,
            "sp" => self.stat_parity,
            "eq_opp" => self.eq_opp,
            other => panic!("unknown metric field {other}"),
        }
    }

    pub fn fields(&self) -> BTreeMap<&'static str, f64> {
        METRIC_FIELDS.iter().map(|&f| (f, self.field(f))).collect()
    }
}
