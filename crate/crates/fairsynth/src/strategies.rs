//! Sampling strategies: per-subgroup synthetic sample counts and the
//! resulting augmentation ratio.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::PlanError;
use crate::partition::{GroupClassCounts, SubgroupKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StrategyKind {
    /// Per group, oversample the minority class to a 50/50 class balance.
    Class,
    /// Bring every (group, class) subgroup up to the largest subgroup of the
    /// largest group, so all subgroups end at the same size.
    ClassAndProtected,
    /// Bring every group total up to the largest group's total, preserving
    /// each group's own class ratio.
    Protected,
    /// Bring every group's class ratio to the largest group's class ratio.
    ClassRatio,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Class,
        StrategyKind::ClassAndProtected,
        StrategyKind::Protected,
        StrategyKind::ClassRatio,
    ];

    /// Stable CLI / file name.
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Class => "class",
            StrategyKind::ClassAndProtected => "class-protected",
            StrategyKind::Protected => "protected",
            StrategyKind::ClassRatio => "class-ratio",
        }
    }

    pub fn parse(name: &str) -> Option<StrategyKind> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// Synthetic sample counts per subgroup. Only positive entries are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub strategy: StrategyKind,
    pub to_sample: BTreeMap<SubgroupKey, usize>,
    pub r_aug: f64,
}

impl SamplingPlan {
    pub fn total_synthetic(&self) -> usize {
        self.to_sample.values().sum()
    }

    pub fn count_for(&self, key: &SubgroupKey) -> usize {
        self.to_sample.get(key).copied().unwrap_or(0)
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Compute the sampling plan for `strategy` from real subgroup counts.
///
/// The "largest group" is the protected tuple with the largest class total,
/// ties broken by the lexicographically smallest tuple.
pub fn plan(strategy: StrategyKind, counts: &GroupClassCounts) -> Result<SamplingPlan, PlanError> {
    if counts.counts.is_empty() || counts.total() == 0 {
        return Err(PlanError::EmptyCounts);
    }
    let groups = counts.group_tuples();
    let largest = groups
        .iter()
        .max_by(|a, b| {
            let ta = counts.get(a, 0) + counts.get(a, 1);
            let tb = counts.get(b, 0) + counts.get(b, 1);
            // on ties prefer the smaller tuple, so compare (total, Reverse(tuple))
            ta.cmp(&tb).then_with(|| b.cmp(a))
        })
        .expect("non-empty counts")
        .clone();
    let largest_total = counts.get(&largest, 0) + counts.get(&largest, 1);

    let mut to_sample: BTreeMap<SubgroupKey, usize> = BTreeMap::new();
    let mut add = |tuple: &[u32], class: u8, n: usize| {
        if n > 0 {
            to_sample.insert(SubgroupKey::new(tuple.to_vec(), class), n);
        }
    };

    match strategy {
        StrategyKind::Class => {
            for g in &groups {
                let (q, p) = (counts.get(g, 0), counts.get(g, 1));
                if p < q {
                    add(g, 1, q - p);
                } else {
                    add(g, 0, p - q);
                }
            }
        }
        StrategyKind::ClassAndProtected => {
            let target = counts.get(&largest, 0).max(counts.get(&largest, 1));
            for g in &groups {
                for class in 0..2u8 {
                    // only oversample: a cell already above the target keeps
                    // all of its rows
                    add(g, class, target.saturating_sub(counts.get(g, class)));
                }
            }
        }
        StrategyKind::Protected => {
            for g in &groups {
                if *g == largest {
                    continue;
                }
                let (q, p) = (counts.get(g, 0), counts.get(g, 1));
                let total = p + q;
                let deficit = largest_total - total;
                if deficit == 0 {
                    continue;
                }
                if total == 0 {
                    return Err(PlanError::EmptyRequiredSubgroup(
                        SubgroupKey::new(g.clone(), 0).to_string(),
                    ));
                }
                // proportional split with largest-remainder rounding
                let exact = [
                    deficit as f64 * q as f64 / total as f64,
                    deficit as f64 * p as f64 / total as f64,
                ];
                let mut whole = [exact[0].floor() as usize, exact[1].floor() as usize];
                let mut leftover = deficit - whole[0] - whole[1];
                let mut order = [0usize, 1usize];
                // larger fractional remainder first; ties to class 0
                if (exact[1] - whole[1] as f64) > (exact[0] - whole[0] as f64) {
                    order = [1, 0];
                }
                for c in order {
                    if leftover == 0 {
                        break;
                    }
                    whole[c] += 1;
                    leftover -= 1;
                }
                add(g, 0, whole[0]);
                add(g, 1, whole[1]);
            }
        }
        StrategyKind::ClassRatio => {
            let (q_l, p_l) = (counts.get(&largest, 0), counts.get(&largest, 1));
            if p_l == 0 || q_l == 0 {
                return Err(PlanError::DegenerateRatio(
                    p_l as f64 / largest_total as f64,
                ));
            }
            let rho = p_l as f64 / largest_total as f64;
            for g in &groups {
                if *g == largest {
                    continue;
                }
                let (q, p) = (counts.get(g, 0), counts.get(g, 1));
                let total = p + q;
                if total == 0 {
                    continue; // nothing to match; no support to sample from either
                }
                let ratio = p as f64 / total as f64;
                if ratio < rho {
                    add(
                        g,
                        1,
                        round_half_up((rho * total as f64 - p as f64) / (1.0 - rho)),
                    );
                } else if ratio > rho {
                    add(g, 0, round_half_up((p as f64 - rho * total as f64) / rho));
                }
            }
        }
    }

    // a positive count can only be sampled from a non-empty subgroup
    for (key, &n) in &to_sample {
        if n > 0 && counts.counts.get(key).copied().unwrap_or(0) == 0 {
            return Err(PlanError::EmptyRequiredSubgroup(key.to_string()));
        }
    }

    let synthetic: usize = to_sample.values().sum();
    let r_aug = synthetic as f64 / (synthetic + counts.total()) as f64;
    Ok(SamplingPlan {
        strategy,
        to_sample,
        r_aug,
    })
}

/// One row of the per-subgroup distribution report.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionRow {
    pub key: SubgroupKey,
    pub real_count: usize,
    pub synthetic_count: usize,
    pub real_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    pub strategy: StrategyKind,
    pub rows: Vec<DistributionRow>,
    pub r_aug: f64,
}

/// Tabulate real and planned synthetic counts per subgroup, with real-row
/// percentages of the source dataset.
pub fn summarize_distribution(counts: &GroupClassCounts, plan: &SamplingPlan) -> DistributionTable {
    let total = counts.total() as f64;
    let rows = counts
        .counts
        .iter()
        .map(|(key, &real)| DistributionRow {
            key: key.clone(),
            real_count: real,
            synthetic_count: plan.count_for(key),
            real_pct: 100.0 * real as f64 / total,
        })
        .collect();
    DistributionTable {
        strategy: plan.strategy,
        rows,
        r_aug: plan.r_aug,
    }
}
