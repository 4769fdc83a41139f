//! Gradient-boosted decision trees with logistic loss, used as the
//! downstream classifier. Second-order (Newton) leaf weights, no row or
//! column subsampling. Protected columns are never used as features.

use serde::Serialize;

use crate::dataset::{Cell, Dataset};
use crate::error::TrainError;
use crate::schema::{ColumnKind, DatasetSchema};

const LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, Serialize)]
pub struct GbdtConfig {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        GbdtConfig {
            rounds: 100,
            learning_rate: 0.1,
            max_depth: 6,
            min_leaf: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
enum TreeNode {
    Leaf {
        weight: f64,
    },
    Split {
        /// schema column index
        column: usize,
        /// on the tree's ordinal encoding; left when encoded value <= threshold
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, Serialize)]
struct Tree {
    root: TreeNode,
    /// Per discrete feature column: ordinal position of each category index,
    /// fixed for this tree from the mean-gradient ordering.
    encodings: Vec<(usize, Vec<f64>)>,
}

impl Tree {
    fn encode(&self, col: usize, cell: &Cell) -> f64 {
        match cell {
            Cell::Cont(v) => *v,
            Cell::Disc(c) => {
                let table = &self
                    .encodings
                    .iter()
                    .find(|(j, _)| *j == col)
                    .expect("encoding recorded for every discrete feature")
                    .1;
                table[*c as usize]
            }
        }
    }

    fn output(&self, row: &[Cell]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split {
                    column,
                    threshold,
                    left,
                    right,
                } => {
                    node = if self.encode(*column, &row[*column]) <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GbdtModel {
    pub base_score: f64,
    trees: Vec<Tree>,
    pub config: GbdtConfig,
    schema: DatasetSchema,
    /// Training-time dictionary sizes, for schema-conformance checks.
    category_counts: Vec<usize>,
    feature_cols: Vec<usize>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn log_loss(y: &[u8], p: &[f64]) -> f64 {
    let eps = 1e-15;
    y.iter()
        .zip(p)
        .map(|(&y, &p)| {
            let p = p.clamp(eps, 1.0 - eps);
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum::<f64>()
        / y.len() as f64
}

/// Per-row first and second derivatives of the logistic loss at probability p.
pub fn gradient_hessian(p: f64, y: u8) -> (f64, f64) {
    (p - f64::from(y), p * (1.0 - p))
}

struct TreeBuilder<'a> {
    encoded: &'a [Vec<f64>], // per feature position, per row
    grad: &'a [f64],
    hess: &'a [f64],
    feature_cols: &'a [usize],
    max_depth: usize,
    min_leaf: usize,
}

impl<'a> TreeBuilder<'a> {
    fn leaf(&self, idx: &[usize]) -> TreeNode {
        let g: f64 = idx.iter().map(|&i| self.grad[i]).sum();
        let h: f64 = idx.iter().map(|&i| self.hess[i]).sum();
        TreeNode::Leaf {
            weight: -g / (h + LAMBDA),
        }
    }

    fn build(&self, idx: Vec<usize>, depth: usize) -> TreeNode {
        if depth >= self.max_depth || idx.len() < 2 * self.min_leaf {
            return self.leaf(&idx);
        }
        let g_total: f64 = idx.iter().map(|&i| self.grad[i]).sum();
        let h_total: f64 = idx.iter().map(|&i| self.hess[i]).sum();
        let parent_score = g_total * g_total / (h_total + LAMBDA);

        let mut best: Option<(f64, usize, f64, Vec<usize>, usize)> = None; // gain, feat pos, threshold, sorted idx, cut
        for (pos, _col) in self.feature_cols.iter().enumerate() {
            let values = &self.encoded[pos];
            let mut sorted = idx.clone();
            sorted.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
            let mut gl = 0.0;
            let mut hl = 0.0;
            for cut in 1..sorted.len() {
                let i = sorted[cut - 1];
                gl += self.grad[i];
                hl += self.hess[i];
                if cut < self.min_leaf || sorted.len() - cut < self.min_leaf {
                    continue;
                }
                if values[sorted[cut - 1]] == values[sorted[cut]] {
                    continue;
                }
                let gr = g_total - gl;
                let hr = h_total - hl;
                let gain = 0.5 * (gl * gl / (hl + LAMBDA) + gr * gr / (hr + LAMBDA) - parent_score);
                if gain > 0.0 && best.as_ref().is_none_or(|(b, ..)| gain > *b) {
                    let threshold = (values[sorted[cut - 1]] + values[sorted[cut]]) / 2.0;
                    best = Some((gain, pos, threshold, sorted.clone(), cut));
                }
            }
        }

        match best {
            Some((_, pos, threshold, sorted, cut)) => {
                let left_idx = sorted[..cut].to_vec();
                let right_idx = sorted[cut..].to_vec();
                TreeNode::Split {
                    column: self.feature_cols[pos],
                    threshold,
                    left: Box::new(self.build(left_idx, depth + 1)),
                    right: Box::new(self.build(right_idx, depth + 1)),
                }
            }
            None => self.leaf(&idx),
        }
    }
}

pub fn train(d: &Dataset, config: &GbdtConfig) -> Result<GbdtModel, TrainError> {
    assert!(config.rounds >= 1, "rounds must be at least 1");
    assert!(
        config.learning_rate > 0.0 && config.learning_rate <= 1.0,
        "learning rate must be in (0, 1]"
    );
    assert!(config.max_depth >= 1, "max depth must be at least 1");
    let n = d.n_rows();
    if n < 2 {
        return Err(TrainError::TooFewRows(n));
    }
    let labels: Vec<u8> = (0..n).map(|i| d.class_of(i)).collect();
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    if n_pos == 0 || n_pos == n {
        return Err(TrainError::SingleClassTraining);
    }
    let base_score = (n_pos as f64 / (n - n_pos) as f64).ln();
    let feature_cols = d.schema().feature_indices();

    let mut scores = vec![base_score; n];
    let mut trees = Vec::with_capacity(config.rounds);
    let all: Vec<usize> = (0..n).collect();
    for _round in 0..config.rounds {
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n];
        for i in 0..n {
            let p = sigmoid(scores[i]);
            let (g, h) = gradient_hessian(p, labels[i]);
            grad[i] = g;
            hess[i] = h;
        }

        // per-tree ordinal encoding of discrete features by mean gradient
        let mut encodings: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut encoded: Vec<Vec<f64>> = Vec::with_capacity(feature_cols.len());
        for &col in &feature_cols {
            match d.schema().columns[col].kind {
                ColumnKind::Continuous => {
                    encoded.push((0..n).map(|i| d.row(i)[col].as_cont()).collect());
                }
                ColumnKind::Discrete => {
                    let n_cats = d.categories(col).len();
                    let mut sums = vec![0.0; n_cats];
                    let mut counts = vec![0usize; n_cats];
                    for (i, g) in grad.iter().enumerate() {
                        let c = d.row(i)[col].as_disc() as usize;
                        sums[c] += g;
                        counts[c] += 1;
                    }
                    let mut order: Vec<usize> = (0..n_cats).collect();
                    let mean = |c: usize| {
                        if counts[c] > 0 {
                            sums[c] / counts[c] as f64
                        } else {
                            0.0
                        }
                    };
                    order.sort_by(|&a, &b| mean(a).partial_cmp(&mean(b)).unwrap().then(a.cmp(&b)));
                    let mut table = vec![0.0; n_cats];
                    for (position, &cat) in order.iter().enumerate() {
                        table[cat] = position as f64;
                    }
                    encoded.push(
                        (0..n)
                            .map(|i| table[d.row(i)[col].as_disc() as usize])
                            .collect(),
                    );
                    encodings.push((col, table));
                }
            }
        }

        let builder = TreeBuilder {
            encoded: &encoded,
            grad: &grad,
            hess: &hess,
            feature_cols: &feature_cols,
            max_depth: config.max_depth,
            min_leaf: config.min_leaf,
        };
        let tree = Tree {
            root: builder.build(all.clone(), 0),
            encodings,
        };
        for (i, score) in scores.iter_mut().enumerate() {
            *score += config.learning_rate * tree.output(d.row(i));
        }
        trees.push(tree);
    }

    Ok(GbdtModel {
        base_score,
        trees,
        config: config.clone(),
        schema: d.schema().clone(),
        category_counts: (0..d.schema().len())
            .map(|j| d.categories(j).len())
            .collect(),
        feature_cols,
    })
}

impl GbdtModel {
    fn check_row(&self, row: &[Cell]) -> Result<(), TrainError> {
        if row.len() != self.schema.len() {
            return Err(TrainError::SchemaMismatch(format!(
                "row has {} cells, expected {}",
                row.len(),
                self.schema.len()
            )));
        }
        for &col in &self.feature_cols {
            match (&self.schema.columns[col].kind, &row[col]) {
                (ColumnKind::Continuous, Cell::Cont(_)) => {}
                (ColumnKind::Discrete, Cell::Disc(c)) => {
                    if *c as usize >= self.category_counts[col] {
                        return Err(TrainError::SchemaMismatch(format!(
                            "unseen category index {c} in column `{}`",
                            self.schema.columns[col].name
                        )));
                    }
                }
                _ => {
                    return Err(TrainError::SchemaMismatch(format!(
                        "cell kind mismatch in column `{}`",
                        self.schema.columns[col].name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn predict_proba_rows(&self, rows: &[Vec<Cell>]) -> Result<Vec<f64>, TrainError> {
        rows.iter()
            .map(|row| {
                self.check_row(row)?;
                let mut score = self.base_score;
                for tree in &self.trees {
                    score += self.config.learning_rate * tree.output(row);
                }
                Ok(sigmoid(score))
            })
            .collect()
    }

    pub fn predict_proba(&self, d: &Dataset) -> Result<Vec<f64>, TrainError> {
        self.predict_proba_rows(d.rows())
    }

    /// Hard labels: 1 iff score >= threshold.
    pub fn predict(&self, d: &Dataset, threshold: f64) -> Result<Vec<u8>, TrainError> {
        Ok(self
            .predict_proba(d)?
            .into_iter()
            .map(|p| u8::from(p >= threshold))
            .collect())
    }

    /// Debug dump of the fitted ensemble as pretty JSON. The layout is not
    /// stability-guaranteed.
    pub fn dump_text(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            base_score: f64,
            config: &'a GbdtConfig,
            trees: &'a [Tree],
        }
        serde_json::to_string_pretty(&Dump {
            base_score: self.base_score,
            config: &self.config,
            trees: &self.trees,
        })
        .expect("model serializes")
    }
}
