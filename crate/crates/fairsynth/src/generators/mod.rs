//! Per-subgroup generative models behind one interface.

pub mod cart;
pub mod copula;
pub mod smote;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{Cell, Dataset};
use crate::error::FitError;
use crate::partition::{SubgroupKey, SubgroupPartition};
use crate::schema::DatasetSchema;
use crate::seed;
use crate::strategies::SamplingPlan;

pub use cart::CartChainModel;
pub use copula::CopulaModel;
pub use smote::SmoteModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GeneratorKind {
    GaussianCopula,
    CartChain,
    SmoteNC,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 3] = [
        GeneratorKind::GaussianCopula,
        GeneratorKind::CartChain,
        GeneratorKind::SmoteNC,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GeneratorKind::GaussianCopula => "copula",
            GeneratorKind::CartChain => "cart",
            GeneratorKind::SmoteNC => "smote-nc",
        }
    }

    pub fn parse(name: &str) -> Option<GeneratorKind> {
        Self::ALL.into_iter().find(|g| g.name() == name)
    }
}

#[derive(Debug, Clone)]
pub enum GeneratorModel {
    Copula(CopulaModel),
    Cart(CartChainModel),
    Smote(SmoteModel),
}

/// Fit one generator on a homogeneous row subset.
pub fn fit(
    kind: GeneratorKind,
    rows: &[Vec<Cell>],
    schema: &DatasetSchema,
    fit_seed: u64,
) -> Result<GeneratorModel, FitError> {
    match kind {
        GeneratorKind::GaussianCopula => {
            copula::fit(rows, schema, fit_seed).map(GeneratorModel::Copula)
        }
        GeneratorKind::CartChain => cart::fit(rows, schema, fit_seed).map(GeneratorModel::Cart),
        GeneratorKind::SmoteNC => smote::fit(rows, schema, fit_seed).map(GeneratorModel::Smote),
    }
}

impl GeneratorModel {
    /// Draw exactly `n` schema-conformant rows; deterministic in (model, n, seed).
    pub fn sample(&self, n: usize, sample_seed: u64) -> Vec<Vec<Cell>> {
        match self {
            GeneratorModel::Copula(m) => m.sample(n, sample_seed),
            GeneratorModel::Cart(m) => m.sample(n, sample_seed),
            GeneratorModel::Smote(m) => m.sample(n, sample_seed),
        }
    }
}

/// Fit one model per subgroup named by the plan and sample its quota. The
/// protected and target cells of each batch are forced to the subgroup key,
/// and per-subgroup seeds are derived from (seed, key).
pub fn fit_and_sample_plan(
    kind: GeneratorKind,
    d: &Dataset,
    part: &SubgroupPartition,
    plan: &SamplingPlan,
    base_seed: u64,
) -> Result<BTreeMap<SubgroupKey, Vec<Vec<Cell>>>, FitError> {
    let protected_cols = d.schema().protected_indices();
    let target_col = d.schema().target_index();
    let mut batches = BTreeMap::new();
    for (key, &count) in &plan.to_sample {
        if count == 0 {
            continue;
        }
        let indices = part.groups.get(key).cloned().unwrap_or_default();
        let rows: Vec<Vec<Cell>> = indices.iter().map(|&i| d.row(i).to_vec()).collect();
        let sub_seed = seed::mix_str(base_seed, &key.to_string());
        let annotate = |source: FitError| FitError::Subgroup {
            key: key.to_string(),
            source: Box::new(source),
        };
        let model = fit(kind, &rows, d.schema(), seed::mix(sub_seed, &[1])).map_err(annotate)?;
        let mut batch = model.sample(count, seed::mix(sub_seed, &[2]));
        for row in &mut batch {
            for (t, &col) in protected_cols.iter().enumerate() {
                row[col] = Cell::Disc(key.protected_values[t]);
            }
            row[target_col] = Cell::Disc(u32::from(key.class_label));
        }
        batches.insert(key.clone(), batch);
    }
    Ok(batches)
}
