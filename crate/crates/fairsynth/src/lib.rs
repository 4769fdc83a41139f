//! fairsynth: mitigate simultaneous class and group imbalance in tabular
//! datasets by fitting per-subgroup generative models, oversampling per
//! configurable strategies, and benchmarking downstream classifier utility
//! and fairness on real held-out data.

pub mod classifier;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod folds;
pub mod generators;
pub mod harness;
pub mod metrics;
pub mod partition;
pub mod schema;
pub mod seed;
pub mod strategies;

pub use dataset::{Cell, Dataset, Origin};
pub use error::{DataError, FitError, MetricError, PlanError, TrainError};
pub use partition::{partition, GroupClassCounts, SubgroupKey, SubgroupPartition};
pub use schema::{ColumnKind, ColumnRole, ColumnSchema, DatasetSchema};
pub use strategies::{plan, summarize_distribution, SamplingPlan, StrategyKind};
