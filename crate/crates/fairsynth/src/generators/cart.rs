//! Sequential CART synthesis: columns are visited in schema order, the first
//! is bootstrapped, and each later column is sampled from the donor leaves of
//! a tree fitted on the columns generated before it.

use rand::Rng;

use crate::dataset::Cell;
use crate::error::FitError;
use crate::schema::{ColumnKind, DatasetSchema};
use crate::seed;

const MAX_DEPTH: usize = 16;
const MIN_LEAF: usize = 5;

#[derive(Debug, Clone)]
enum SplitTest {
    /// Continuous predictor: go left when value <= threshold.
    Threshold { col: usize, threshold: f64 },
    /// Discrete predictor: go left when the category is in the set
    /// (categories were ordered by node-local target mean, then cut).
    Membership { col: usize, left: Vec<u32> },
}

impl SplitTest {
    fn goes_left(&self, row: &[Cell]) -> bool {
        match self {
            SplitTest::Threshold { col, threshold } => row[*col].as_cont() <= *threshold,
            SplitTest::Membership { col, left } => left.binary_search(&row[*col].as_disc()).is_ok(),
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        donors: Vec<usize>,
    },
    Split {
        test: SplitTest,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone)]
struct ColumnTree {
    column: usize,
    root: Node,
}

#[derive(Debug, Clone)]
pub struct CartChainModel {
    schema: DatasetSchema,
    /// Copy of the fit rows; leaves index into this.
    fit_rows: Vec<Vec<Cell>>,
    /// Bootstrap table for the first visited column.
    root_column: usize,
    trees: Vec<ColumnTree>,
}

/// Ordinal view of the target column used by split criteria and by the
/// ordering of discrete predictor categories.
fn target_value(cell: &Cell) -> f64 {
    match cell {
        Cell::Cont(v) => *v,
        Cell::Disc(v) => *v as f64,
    }
}

/// Impurity of a candidate split, to be minimized: weighted child variance
/// for continuous targets, weighted child Gini for discrete targets.
struct SplitSearch<'a> {
    rows: &'a [Vec<Cell>],
    target: usize,
    discrete_target: bool,
}

impl<'a> SplitSearch<'a> {
    fn node_impurity(&self, idx: &[usize]) -> f64 {
        if self.discrete_target {
            gini(self.rows, self.target, idx)
        } else {
            variance(self.rows, self.target, idx)
        }
    }

    /// Best (impurity, split) over a predictor, given node rows sorted by the
    /// predictor's ordinal key. Children must each keep MIN_LEAF rows.
    fn best_cut(&self, sorted: &[(f64, usize)]) -> Option<(f64, usize)> {
        let n = sorted.len();
        let mut best: Option<(f64, usize)> = None;
        if self.discrete_target {
            let n_cats = 1 + sorted
                .iter()
                .map(|&(_, i)| self.rows[i][self.target].as_disc())
                .max()
                .unwrap() as usize;
            let mut left = vec![0usize; n_cats];
            let mut right = vec![0usize; n_cats];
            for &(_, i) in sorted {
                right[self.rows[i][self.target].as_disc() as usize] += 1;
            }
            for cut in 1..n {
                let cat = self.rows[sorted[cut - 1].1][self.target].as_disc() as usize;
                left[cat] += 1;
                right[cat] -= 1;
                if cut < MIN_LEAF || n - cut < MIN_LEAF {
                    continue;
                }
                if sorted[cut - 1].0 == sorted[cut].0 {
                    continue; // no boundary between equal keys
                }
                let score = weighted_gini(&left, cut) + weighted_gini(&right, n - cut);
                if best.is_none_or(|(b, _)| score < b) {
                    best = Some((score, cut));
                }
            }
        } else {
            let mut lsum = 0.0;
            let mut lsq = 0.0;
            let mut rsum = 0.0;
            let mut rsq = 0.0;
            for &(_, i) in sorted {
                let v = self.rows[i][self.target].as_cont();
                rsum += v;
                rsq += v * v;
            }
            for cut in 1..n {
                let v = self.rows[sorted[cut - 1].1][self.target].as_cont();
                lsum += v;
                lsq += v * v;
                rsum -= v;
                rsq -= v * v;
                if cut < MIN_LEAF || n - cut < MIN_LEAF {
                    continue;
                }
                if sorted[cut - 1].0 == sorted[cut].0 {
                    continue;
                }
                let lvar = (lsq - lsum * lsum / cut as f64).max(0.0);
                let rvar = (rsq - rsum * rsum / (n - cut) as f64).max(0.0);
                let score = (lvar + rvar) / n as f64;
                if best.is_none_or(|(b, _)| score < b) {
                    best = Some((score, cut));
                }
            }
        }
        best
    }
}

fn variance(rows: &[Vec<Cell>], col: usize, idx: &[usize]) -> f64 {
    let n = idx.len() as f64;
    let mean = idx.iter().map(|&i| rows[i][col].as_cont()).sum::<f64>() / n;
    idx.iter()
        .map(|&i| {
            let d = rows[i][col].as_cont() - mean;
            d * d
        })
        .sum::<f64>()
        / n
}

fn gini(rows: &[Vec<Cell>], col: usize, idx: &[usize]) -> f64 {
    let n_cats = 1 + idx.iter().map(|&i| rows[i][col].as_disc()).max().unwrap() as usize;
    let mut counts = vec![0usize; n_cats];
    for &i in idx {
        counts[rows[i][col].as_disc() as usize] += 1;
    }
    let n = idx.len() as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// count-weighted Gini contribution: n_child * gini_child (the common 1/n of
/// the parent is applied by the caller via comparison only).
fn weighted_gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    nf * (1.0 - counts.iter().map(|&c| (c as f64 / nf).powi(2)).sum::<f64>())
}

/// Rows as (sort key, row index) pairs, plus the category-mean ordering used
/// to derive the keys when the predictor is discrete.
type KeyedRows = (Vec<(f64, usize)>, Option<Vec<(u32, f64)>>);

/// (impurity score, split test, cut position, keyed rows) of the best split
/// found so far.
type BestSplit = (f64, SplitTest, usize, Vec<(f64, usize)>);

/// Ordinal sort keys of a predictor column at a node. Discrete predictors are
/// re-ordered per node by the mean (ordinal) target of each category.
fn predictor_keys(
    rows: &[Vec<Cell>],
    idx: &[usize],
    col: usize,
    kind: ColumnKind,
    target: usize,
) -> KeyedRows {
    match kind {
        ColumnKind::Continuous => {
            let mut keyed: Vec<(f64, usize)> =
                idx.iter().map(|&i| (rows[i][col].as_cont(), i)).collect();
            keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            (keyed, None)
        }
        ColumnKind::Discrete => {
            let mut sums: std::collections::BTreeMap<u32, (f64, usize)> = Default::default();
            for &i in idx {
                let c = rows[i][col].as_disc();
                let e = sums.entry(c).or_insert((0.0, 0));
                e.0 += target_value(&rows[i][target]);
                e.1 += 1;
            }
            let mut ordering: Vec<(u32, f64)> = sums
                .into_iter()
                .map(|(c, (s, n))| (c, s / n as f64))
                .collect();
            ordering.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
            let position: std::collections::BTreeMap<u32, usize> = ordering
                .iter()
                .enumerate()
                .map(|(pos, (c, _))| (*c, pos))
                .collect();
            let mut keyed: Vec<(f64, usize)> = idx
                .iter()
                .map(|&i| (position[&rows[i][col].as_disc()] as f64, i))
                .collect();
            keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            (keyed, Some(ordering))
        }
    }
}

fn build_node(
    rows: &[Vec<Cell>],
    schema: &DatasetSchema,
    idx: Vec<usize>,
    target: usize,
    depth: usize,
) -> Node {
    if depth >= MAX_DEPTH || idx.len() < 2 * MIN_LEAF {
        return Node::Leaf { donors: idx };
    }
    let search = SplitSearch {
        rows,
        target,
        discrete_target: schema.columns[target].kind == ColumnKind::Discrete,
    };
    let parent = search.node_impurity(&idx) * idx.len() as f64;
    if parent <= 0.0 {
        return Node::Leaf { donors: idx };
    }

    let mut best: Option<BestSplit> = None;
    for col in 0..target {
        let kind = schema.columns[col].kind;
        let (keyed, ordering) = predictor_keys(rows, &idx, col, kind, target);
        if let Some((score_raw, cut)) = search.best_cut(&keyed) {
            // normalize both criteria to count-weighted impurity
            let score = if search.discrete_target {
                score_raw
            } else {
                score_raw * idx.len() as f64
            };
            if best.as_ref().is_none_or(|(b, _, _, _)| score < *b) {
                let test = match kind {
                    ColumnKind::Continuous => {
                        let lo = keyed[cut - 1].0;
                        let hi = keyed[cut].0;
                        SplitTest::Threshold {
                            col,
                            threshold: (lo + hi) / 2.0,
                        }
                    }
                    ColumnKind::Discrete => {
                        let ordering = ordering.unwrap();
                        let cut_pos = keyed[cut].0 as usize;
                        let mut left: Vec<u32> =
                            ordering[..cut_pos].iter().map(|(c, _)| *c).collect();
                        left.sort_unstable();
                        SplitTest::Membership { col, left }
                    }
                };
                best = Some((score, test, cut, keyed));
            }
        }
    }

    match best {
        Some((score, test, cut, keyed)) if score < parent - 1e-12 => {
            let left_idx: Vec<usize> = keyed[..cut].iter().map(|&(_, i)| i).collect();
            let right_idx: Vec<usize> = keyed[cut..].iter().map(|&(_, i)| i).collect();
            Node::Split {
                test,
                left: Box::new(build_node(rows, schema, left_idx, target, depth + 1)),
                right: Box::new(build_node(rows, schema, right_idx, target, depth + 1)),
            }
        }
        _ => Node::Leaf { donors: idx },
    }
}

pub fn fit(
    rows: &[Vec<Cell>],
    schema: &DatasetSchema,
    _seed: u64,
) -> Result<CartChainModel, FitError> {
    if rows.len() < 2 {
        return Err(FitError::TooFewRows(rows.len()));
    }
    let all: Vec<usize> = (0..rows.len()).collect();
    let trees = (1..schema.len())
        .map(|column| ColumnTree {
            column,
            root: build_node(rows, schema, all.clone(), column, 0),
        })
        .collect();
    Ok(CartChainModel {
        schema: schema.clone(),
        fit_rows: rows.to_vec(),
        root_column: 0,
        trees,
    })
}

impl CartChainModel {
    fn route<'a>(&'a self, node: &'a Node, row: &[Cell]) -> &'a [usize] {
        match node {
            Node::Leaf { donors } => donors,
            Node::Split { test, left, right } => {
                if test.goes_left(row) {
                    self.route(left, row)
                } else {
                    self.route(right, row)
                }
            }
        }
    }

    pub fn sample(&self, n: usize, sample_seed: u64) -> Vec<Vec<Cell>> {
        let mut rng = seed::rng(sample_seed);
        let m = self.schema.len();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let mut row: Vec<Cell> = Vec::with_capacity(m);
            let donor = rng.random_range(0..self.fit_rows.len());
            row.push(self.fit_rows[donor][self.root_column]);
            for tree in &self.trees {
                let donors = self.route(&tree.root, &row);
                let pick = donors[rng.random_range(0..donors.len())];
                row.push(self.fit_rows[pick][tree.column]);
            }
            out.push(row);
        }
        out
    }
}
