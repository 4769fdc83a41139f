//! Seeded synthetic fixtures for tests, examples, and benchmarks. Not a
//! substitute for real datasets; the generated tables have known
//! dependencies, class imbalance, and an injected group disparity.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::{Cell, Dataset};
use crate::schema::{ColumnKind, ColumnRole, ColumnSchema, DatasetSchema};
use crate::seed;

fn normal(rng: &mut impl Rng) -> f64 {
    let dist = Normal::new(0.0, 1.0).unwrap();
    dist.inverse_cdf(rng.random::<f64>().clamp(1e-12, 1.0 - 1e-12))
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn pick(rng: &mut impl Rng, probs: &[f64]) -> u32 {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (i, p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i as u32;
        }
    }
    (probs.len() - 1) as u32
}

/// Mixed-type fixture schema: x1..x3 continuous, d1..d3 discrete, a binary
/// protected `sex` and binary target `label`.
pub fn fixture_schema() -> DatasetSchema {
    DatasetSchema::new(vec![
        ColumnSchema {
            name: "x1".into(),
            kind: ColumnKind::Continuous,
            role: ColumnRole::Feature,
        },
        ColumnSchema {
            name: "x2".into(),
            kind: ColumnKind::Continuous,
            role: ColumnRole::Feature,
        },
        ColumnSchema {
            name: "x3".into(),
            kind: ColumnKind::Continuous,
            role: ColumnRole::Feature,
        },
        ColumnSchema {
            name: "d1".into(),
            kind: ColumnKind::Discrete,
            role: ColumnRole::Feature,
        },
        ColumnSchema {
            name: "d2".into(),
            kind: ColumnKind::Discrete,
            role: ColumnRole::Feature,
        },
        ColumnSchema {
            name: "d3".into(),
            kind: ColumnKind::Discrete,
            role: ColumnRole::Feature,
        },
        ColumnSchema {
            name: "sex".into(),
            kind: ColumnKind::Discrete,
            role: ColumnRole::Protected,
        },
        ColumnSchema {
            name: "label".into(),
            kind: ColumnKind::Discrete,
            role: ColumnRole::Target,
        },
    ])
    .unwrap()
}

fn fixture_categories() -> Vec<Vec<String>> {
    vec![
        Vec::new(),
        Vec::new(),
        Vec::new(),
        vec!["c0".into(), "c1".into(), "c2".into()],
        vec!["n".into(), "y".into()],
        vec!["q0".into(), "q1".into(), "q2".into(), "q3".into()],
        vec!["F".into(), "M".into()],
        vec!["0".into(), "1".into()],
    ]
}

/// Class- and group-imbalanced fixture. The minority group (F) is smaller
/// and, through a feature shift, is under-represented in the high-rate
/// discrete regions, so oversampling strategies have a real disparity to
/// correct. Positives concentrate in a few discrete regions: a dense
/// male-leaning region, a thin female-only pocket that is hard to isolate
/// from real data alone, a medium-rate middle band, and a near-zero
/// background.
pub fn imbalanced_fixture(n: usize, fixture_seed: u64) -> Dataset {
    let mut rng = seed::rng(seed::mix(fixture_seed, &[0xF1D0]));
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let male = rng.random::<f64>() < 0.7;
        let x1 = normal(&mut rng) + if male { 1.0 } else { 0.0 };
        let x2 = normal(&mut rng);
        let x3 = 0.5 * x1 + 0.5 * normal(&mut rng);
        let d1 = if x1 > 0.5 {
            pick(&mut rng, &[0.6, 0.3, 0.1])
        } else {
            pick(&mut rng, &[0.2, 0.3, 0.5])
        };
        let d2 = if x2 > 0.0 {
            pick(&mut rng, &[0.3, 0.7])
        } else {
            pick(&mut rng, &[0.7, 0.3])
        };
        let d3 = pick(&mut rng, &[0.25, 0.25, 0.25, 0.25]);
        let p = if d1 == 0 && d2 == 1 && d3 <= 1 {
            0.95
        } else if !male && d1 == 2 && d2 == 0 && d3 == 3 {
            0.9
        } else if d1 == 1 {
            if male {
                0.42
            } else {
                0.25
            }
        } else {
            0.01
        };
        let y = u32::from(rng.random::<f64>() < p);
        rows.push(vec![
            Cell::Cont(x1),
            Cell::Cont(x2),
            Cell::Cont(x3),
            Cell::Disc(d1),
            Cell::Disc(d2),
            Cell::Disc(d3),
            Cell::Disc(u32::from(male)),
            Cell::Disc(y),
        ]);
    }
    Dataset::from_cells(fixture_schema(), fixture_categories(), rows).unwrap()
}

/// All-discrete fixture (no continuous columns), mirroring datasets where
/// SMOTE-NC is not applicable.
pub fn all_discrete_fixture(n: usize, fixture_seed: u64) -> Dataset {
    let schema = DatasetSchema::new(vec![
        ColumnSchema {
            name: "d1".into(),
            kind: ColumnKind::Discrete,
            role: ColumnRole::Feature,
        },
        ColumnSchema {
            name: "d2".into(),
            kind: ColumnKind::Discrete,
            role: ColumnRole::Feature,
        },
        ColumnSchema {
            name: "d3".into(),
            kind: ColumnKind::Discrete,
            role: ColumnRole::Feature,
        },
        ColumnSchema {
            name: "sex".into(),
            kind: ColumnKind::Discrete,
            role: ColumnRole::Protected,
        },
        ColumnSchema {
            name: "label".into(),
            kind: ColumnKind::Discrete,
            role: ColumnRole::Target,
        },
    ])
    .unwrap();
    let cats = vec![
        vec!["a".into(), "b".into(), "c".into()],
        vec!["n".into(), "y".into()],
        vec!["q0".into(), "q1".into()],
        vec!["F".into(), "M".into()],
        vec!["0".into(), "1".into()],
    ];
    let mut rng = seed::rng(seed::mix(fixture_seed, &[0xD15C]));
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let male = rng.random::<f64>() < 0.65;
        let d1 = pick(&mut rng, &[0.5, 0.3, 0.2]);
        let d2 = pick(&mut rng, &[0.6, 0.4]);
        let d3 = pick(&mut rng, &[0.5, 0.5]);
        let score =
            1.0 * f64::from(d1 == 0) + 0.8 * f64::from(d2 == 1) + if male { 0.4 } else { -0.4 }
                - 1.3;
        let y = u32::from(rng.random::<f64>() < sigmoid(score));
        rows.push(vec![
            Cell::Disc(d1),
            Cell::Disc(d2),
            Cell::Disc(d3),
            Cell::Disc(u32::from(male)),
            Cell::Disc(y),
        ]);
    }
    Dataset::from_cells(schema, cats, rows).unwrap()
}

/// Wide fixture for runtime profiling: 7 continuous + 6 discrete features
/// plus protected and target, 15 columns in total.
pub fn wide_fixture(n: usize, fixture_seed: u64) -> Dataset {
    let mut cols = Vec::new();
    for i in 0..7 {
        cols.push(ColumnSchema {
            name: format!("x{i}"),
            kind: ColumnKind::Continuous,
            role: ColumnRole::Feature,
        });
    }
    for i in 0..6 {
        cols.push(ColumnSchema {
            name: format!("d{i}"),
            kind: ColumnKind::Discrete,
            role: ColumnRole::Feature,
        });
    }
    cols.push(ColumnSchema {
        name: "sex".into(),
        kind: ColumnKind::Discrete,
        role: ColumnRole::Protected,
    });
    cols.push(ColumnSchema {
        name: "label".into(),
        kind: ColumnKind::Discrete,
        role: ColumnRole::Target,
    });
    let schema = DatasetSchema::new(cols).unwrap();
    let mut cats: Vec<Vec<String>> = vec![Vec::new(); 7];
    for _ in 0..6 {
        cats.push(vec!["a".into(), "b".into(), "c".into(), "d".into()]);
    }
    cats.push(vec!["F".into(), "M".into()]);
    cats.push(vec!["0".into(), "1".into()]);

    let mut rng = seed::rng(seed::mix(fixture_seed, &[0xB16]));
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let male = rng.random::<f64>() < 0.6;
        let base = normal(&mut rng);
        let mut row = Vec::with_capacity(15);
        let mut score = -1.8;
        for c in 0..7 {
            let v = 0.4 * base + normal(&mut rng) + if male && c == 0 { 0.8 } else { 0.0 };
            score += 0.25 * v;
            row.push(Cell::Cont(v));
        }
        for _ in 0..6 {
            let d = pick(&mut rng, &[0.4, 0.3, 0.2, 0.1]);
            score += 0.1 * f64::from(d == 0);
            row.push(Cell::Disc(d));
        }
        row.push(Cell::Disc(u32::from(male)));
        let y = u32::from(rng.random::<f64>() < sigmoid(score));
        row.push(Cell::Disc(y));
        rows.push(row);
    }
    Dataset::from_cells(schema, cats, rows).unwrap()
}
