//! Python bindings: schema/dataset loading, sampling plans, augmentation,
//! benchmarking, and runtime profiling.

use std::path::Path;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use fairsynth::classifier::GbdtConfig;
use fairsynth::generators::{fit_and_sample_plan, GeneratorKind};
use fairsynth::harness::{profile_runtime, run_grid, ExperimentConfig};
use fairsynth::metrics::METRIC_FIELDS;
use fairsynth::partition::{partition, SubgroupKey};
use fairsynth::strategies::{plan, StrategyKind};
use fairsynth::{Dataset, DatasetSchema};

/// (group label, class label, row count) triples.
type SubgroupRows = Vec<(String, String, usize)>;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_strategy(name: &str) -> PyResult<StrategyKind> {
    StrategyKind::parse(name).ok_or_else(|| {
        PyValueError::new_err(format!(
            "unknown strategy `{name}`; valid: class, class-protected, protected, class-ratio"
        ))
    })
}

fn parse_generator(name: &str) -> PyResult<GeneratorKind> {
    GeneratorKind::parse(name).ok_or_else(|| {
        PyValueError::new_err(format!(
            "unknown generator `{name}`; valid: copula, cart, smote-nc"
        ))
    })
}

#[pyclass(name = "Schema", frozen)]
struct PySchema {
    inner: DatasetSchema,
}

#[pymethods]
impl PySchema {
    /// Parse a TOML schema document (a `[[columns]]` array).
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(PySchema {
            inner: DatasetSchema::from_toml_str(text).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PySchema {
            inner: DatasetSchema::load(Path::new(path)).map_err(value_err)?,
        })
    }

    /// New schema with the given columns as the protected set.
    fn with_protected(&self, names: Vec<String>) -> PyResult<Self> {
        Ok(PySchema {
            inner: self.inner.with_protected(&names).map_err(value_err)?,
        })
    }

    fn column_names(&self) -> Vec<String> {
        self.inner.columns.iter().map(|c| c.name.clone()).collect()
    }

    fn protected_columns(&self) -> Vec<String> {
        self.inner
            .protected_indices()
            .into_iter()
            .map(|i| self.inner.columns[i].name.clone())
            .collect()
    }

    fn target_column(&self) -> String {
        self.inner.columns[self.inner.target_index()].name.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "Dataset", frozen)]
struct PyDataset {
    inner: Dataset,
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

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn load_csv(path: &str, schema: &PySchema) -> PyResult<Self> {
        Ok(PyDataset {
            inner: Dataset::load_csv(Path::new(path), &schema.inner).map_err(value_err)?,
        })
    }

    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    fn n_synthetic(&self) -> usize {
        self.inner.n_synthetic()
    }

    /// Real-row counts per (group, class) subgroup.
    fn subgroup_counts(&self) -> SubgroupRows {
        partition(&self.inner)
            .counts()
            .counts
            .iter()
            .map(|(key, &n)| {
                (
                    group_label(&self.inner, key),
                    class_label(&self.inner, key.class_label),
                    n,
                )
            })
            .collect()
    }

    /// Sampling plan for a strategy: ([(group, class, count), ...], r_aug).
    fn plan(&self, strategy: &str) -> PyResult<(SubgroupRows, f64)> {
        let strategy = parse_strategy(strategy)?;
        let counts = partition(&self.inner).counts();
        let p = plan(strategy, &counts).map_err(value_err)?;
        let rows = p
            .to_sample
            .iter()
            .map(|(key, &n)| {
                (
                    group_label(&self.inner, key),
                    class_label(&self.inner, key.class_label),
                    n,
                )
            })
            .collect();
        Ok((rows, p.r_aug))
    }

    /// Fit per-subgroup generators and append the planned synthetic rows.
    fn augment(&self, strategy: &str, generator: &str, seed: u64) -> PyResult<Self> {
        let strategy = parse_strategy(strategy)?;
        let generator = parse_generator(generator)?;
        let part = partition(&self.inner);
        let sampling_plan = plan(strategy, &part.counts()).map_err(value_err)?;
        let batches = fit_and_sample_plan(generator, &self.inner, &part, &sampling_plan, seed)
            .map_err(value_err)?;
        Ok(PyDataset {
            inner: self.inner.augment(&batches).map_err(value_err)?,
        })
    }

    #[pyo3(signature = (path, with_origin = true))]
    fn write_csv(&self, path: &str, with_origin: bool) -> PyResult<()> {
        self.inner
            .write_csv(Path::new(path), with_origin)
            .map_err(value_err)
    }
}

/// Cross-validated benchmark over a strategy x generator grid. Returns one
/// dict per grid cell (the `real-only` baseline included) with per-metric
/// means and standard deviations.
#[pyfunction]
#[pyo3(signature = (dataset, strategies = None, generators = None, folds = 3, repeats = 2, seed = 0, rounds = 100))]
#[allow(clippy::too_many_arguments)]
fn benchmark<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    strategies: Option<Vec<String>>,
    generators: Option<Vec<String>>,
    folds: usize,
    repeats: usize,
    seed: u64,
    rounds: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let strategies = match strategies {
        Some(names) => names
            .iter()
            .map(|n| parse_strategy(n))
            .collect::<PyResult<Vec<_>>>()?,
        None => StrategyKind::ALL.to_vec(),
    };
    let generators = match generators {
        Some(names) => names
            .iter()
            .map(|n| parse_generator(n))
            .collect::<PyResult<Vec<_>>>()?,
        None => GeneratorKind::ALL.to_vec(),
    };
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
    let result = run_grid(&dataset.inner, &config);
    let mut out = Vec::new();
    for (key, cell) in &result.cells {
        let item = PyDict::new(py);
        item.set_item("strategy", key.strategy_name())?;
        item.set_item("generator", key.generator_name())?;
        item.set_item("runs", cell.runs)?;
        item.set_item("r_aug", cell.r_aug_mean)?;
        item.set_item("note", &cell.note)?;
        for field in METRIC_FIELDS {
            if cell.runs > 0 {
                item.set_item(format!("{field}_mean"), cell.mean[field])?;
                item.set_item(format!("{field}_std"), cell.std[field])?;
            }
        }
        out.push(item);
    }
    Ok(out)
}

/// Fit/sample wall-clock timing per generator, as one dict per generator.
#[pyfunction]
#[pyo3(signature = (dataset, generators = None, n = 10_000, trials = 3))]
fn profile<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    generators: Option<Vec<String>>,
    n: usize,
    trials: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let generators = match generators {
        Some(names) => names
            .iter()
            .map(|g| parse_generator(g))
            .collect::<PyResult<Vec<_>>>()?,
        None => GeneratorKind::ALL.to_vec(),
    };
    let result = profile_runtime(&dataset.inner, &generators, n, trials);
    let mut out = Vec::new();
    for p in &result.profiles {
        let item = PyDict::new(py);
        item.set_item("generator", p.generator.name())?;
        item.set_item("fit_s_mean", p.fit_s.0)?;
        item.set_item("fit_s_std", p.fit_s.1)?;
        item.set_item("sample_s_mean", p.sample_s.0)?;
        item.set_item("sample_s_std", p.sample_s.1)?;
        item.set_item("overall_s_mean", p.overall_s.0)?;
        item.set_item("overall_s_std", p.overall_s.1)?;
        item.set_item("note", &p.note)?;
        out.push(item);
    }
    Ok(out)
}

/// Seeded mixed-type fixture with class and group imbalance, for demos and
/// smoke tests.
#[pyfunction]
#[pyo3(signature = (n, seed = 0))]
fn imbalanced_fixture(n: usize, seed: u64) -> PyDataset {
    PyDataset {
        inner: fairsynth::fixtures::imbalanced_fixture(n, seed),
    }
}

#[pymodule]
fn fairsynth_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySchema>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(imbalanced_fixture, m)?)?;
    Ok(())
}
