//! Subgroup partitioning: rows keyed by (protected-value tuple, class label).

use std::collections::BTreeMap;
use std::fmt;

use crate::dataset::Dataset;

/// One subgroup: a protected-value tuple (category indices, one per protected
/// column in schema order) intersected with a class label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubgroupKey {
    pub protected_values: Vec<u32>,
    pub class_label: u8,
}

impl SubgroupKey {
    pub fn new(protected_values: Vec<u32>, class_label: u8) -> Self {
        SubgroupKey {
            protected_values,
            class_label,
        }
    }

    /// Just the protected tuple; shared by both class labels of a group.
    pub fn group(&self) -> &[u32] {
        &self.protected_values
    }
}

impl fmt::Display for SubgroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tuple: Vec<String> = self
            .protected_values
            .iter()
            .map(|v| v.to_string())
            .collect();
        write!(f, "({}, y={})", tuple.join("|"), self.class_label)
    }
}

/// Disjoint cover of all row indices by subgroup. Empty subgroups keep an
/// empty index list so the key set is always the full cartesian product.
#[derive(Debug, Clone)]
pub struct SubgroupPartition {
    pub groups: BTreeMap<SubgroupKey, Vec<usize>>,
    pub source_row_count: usize,
}

/// Real-row counts per subgroup, the input to sampling-plan computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupClassCounts {
    pub counts: BTreeMap<SubgroupKey, usize>,
}

impl GroupClassCounts {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Distinct protected tuples, ascending.
    pub fn group_tuples(&self) -> Vec<Vec<u32>> {
        let mut tuples: Vec<Vec<u32>> = self
            .counts
            .keys()
            .map(|k| k.protected_values.clone())
            .collect();
        tuples.dedup();
        tuples
    }

    pub fn get(&self, tuple: &[u32], class: u8) -> usize {
        self.counts
            .get(&SubgroupKey::new(tuple.to_vec(), class))
            .copied()
            .unwrap_or(0)
    }
}

/// Partition a dataset into all (protected tuple × class) subgroups.
pub fn partition(d: &Dataset) -> SubgroupPartition {
    let protected_cols = d.schema().protected_indices();
    let mut groups: BTreeMap<SubgroupKey, Vec<usize>> = BTreeMap::new();
    // seed the full cartesian product so empty subgroups are represented
    let cardinalities: Vec<usize> = protected_cols
        .iter()
        .map(|&j| d.categories(j).len().max(1))
        .collect();
    let mut tuple = vec![0u32; protected_cols.len()];
    loop {
        for class in 0..2u8 {
            groups.insert(SubgroupKey::new(tuple.clone(), class), Vec::new());
        }
        let mut pos = protected_cols.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            tuple[pos] += 1;
            if (tuple[pos] as usize) < cardinalities[pos] {
                break;
            }
            tuple[pos] = 0;
        }
        if tuple.iter().all(|&v| v == 0) {
            break;
        }
    }

    for i in 0..d.n_rows() {
        let key = SubgroupKey::new(d.protected_of(i), d.class_of(i));
        groups.entry(key).or_default().push(i);
    }
    SubgroupPartition {
        groups,
        source_row_count: d.n_rows(),
    }
}

impl SubgroupPartition {
    pub fn counts(&self) -> GroupClassCounts {
        GroupClassCounts {
            counts: self
                .groups
                .iter()
                .map(|(k, v)| (k.clone(), v.len()))
                .collect(),
        }
    }

    pub fn n_keys(&self) -> usize {
        self.groups.len()
    }
}
