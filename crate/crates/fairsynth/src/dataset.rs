//! Typed mixed-column tabular dataset with CSV ingestion and augmentation.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::DataError;
use crate::partition::SubgroupKey;
use crate::schema::{ColumnKind, DatasetSchema};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Cont(f64),
    Disc(u32),
}

impl Cell {
    pub fn as_cont(&self) -> f64 {
        match self {
            Cell::Cont(v) => *v,
            Cell::Disc(_) => panic!("discrete cell read as continuous"),
        }
    }

    pub fn as_disc(&self) -> u32 {
        match self {
            Cell::Disc(v) => *v,
            Cell::Cont(_) => panic!("continuous cell read as discrete"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Real,
    Synthetic,
}

/// Immutable table of parsed rows. Discrete cells are indices into per-column
/// category dictionaries sorted lexicographically by original string value.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: DatasetSchema,
    categories: Vec<Vec<String>>,
    rows: Vec<Vec<Cell>>,
    origin: Vec<Origin>,
}

impl Dataset {
    /// Read a CSV file (header row required, schema names must appear in the
    /// header) and dictionary-encode it against `schema`.
    pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<Self, DataError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| DataError::Io(format!("{}: {e}", path.display())))?;
        let headers = reader
            .headers()
            .map_err(|e| DataError::Csv(e.to_string()))?
            .clone();
        let mut col_pos = Vec::with_capacity(schema.len());
        for col in &schema.columns {
            let pos = headers
                .iter()
                .position(|h| h.trim() == col.name)
                .ok_or_else(|| DataError::MissingColumn(col.name.clone()))?;
            col_pos.push(pos);
        }

        let mut raw: Vec<Vec<String>> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| DataError::Csv(e.to_string()))?;
            raw.push(
                col_pos
                    .iter()
                    .map(|&p| record.get(p).unwrap_or("").trim().to_string())
                    .collect(),
            );
        }
        Self::from_strings(schema.clone(), &raw)
    }

    /// Build a dataset from already-split string cells (one inner vec per row,
    /// in schema column order).
    pub fn from_strings(schema: DatasetSchema, raw: &[Vec<String>]) -> Result<Self, DataError> {
        let mut categories: Vec<Vec<String>> = vec![Vec::new(); schema.len()];
        for (j, col) in schema.columns.iter().enumerate() {
            if col.kind != ColumnKind::Discrete {
                continue;
            }
            let mut values: Vec<String> = raw.iter().map(|r| r[j].clone()).collect();
            values.sort();
            values.dedup();
            if values.iter().any(|v| v.is_empty()) {
                let row = raw.iter().position(|r| r[j].is_empty()).unwrap();
                return Err(DataError::MissingValue {
                    row,
                    column: col.name.clone(),
                });
            }
            categories[j] = values;
        }
        let target = schema.target_index();
        if !raw.is_empty() && categories[target].len() != 2 {
            return Err(DataError::TargetNotBinary(categories[target].len()));
        }

        let mut rows = Vec::with_capacity(raw.len());
        for (i, record) in raw.iter().enumerate() {
            let mut row = Vec::with_capacity(schema.len());
            for (j, col) in schema.columns.iter().enumerate() {
                let text = &record[j];
                if text.is_empty() {
                    return Err(DataError::MissingValue {
                        row: i,
                        column: col.name.clone(),
                    });
                }
                match col.kind {
                    ColumnKind::Continuous => {
                        let v: f64 = text.parse().map_err(|_| DataError::UnparseableCell {
                            row: i,
                            column: col.name.clone(),
                        })?;
                        if !v.is_finite() {
                            return Err(DataError::UnparseableCell {
                                row: i,
                                column: col.name.clone(),
                            });
                        }
                        row.push(Cell::Cont(v));
                    }
                    ColumnKind::Discrete => {
                        let idx = categories[j].binary_search(text).expect("seen in pass 1");
                        row.push(Cell::Disc(idx as u32));
                    }
                }
            }
            rows.push(row);
        }
        let origin = vec![Origin::Real; rows.len()];
        Ok(Dataset {
            schema,
            categories,
            rows,
            origin,
        })
    }

    /// Build directly from encoded cells; used by fixture generators.
    /// `categories` must already be sorted per discrete column.
    pub fn from_cells(
        schema: DatasetSchema,
        categories: Vec<Vec<String>>,
        rows: Vec<Vec<Cell>>,
    ) -> Result<Self, DataError> {
        let d = Dataset {
            origin: vec![Origin::Real; rows.len()],
            schema,
            categories,
            rows,
        };
        for row in &d.rows {
            d.validate_row(row)?;
        }
        Ok(d)
    }

    pub fn schema(&self) -> &DatasetSchema {
        &self.schema
    }

    pub fn categories(&self, col: usize) -> &[String] {
        &self.categories[col]
    }

    pub fn all_categories(&self) -> &[Vec<String>] {
        &self.categories
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[Cell] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn origin(&self, i: usize) -> Origin {
        self.origin[i]
    }

    pub fn n_synthetic(&self) -> usize {
        self.origin
            .iter()
            .filter(|o| **o == Origin::Synthetic)
            .count()
    }

    /// Class label of row `i`: the target cell's category index (0 or 1).
    pub fn class_of(&self, i: usize) -> u8 {
        self.rows[i][self.schema.target_index()].as_disc() as u8
    }

    /// Protected-value tuple of row `i`, in schema order of protected columns.
    pub fn protected_of(&self, i: usize) -> Vec<u32> {
        self.schema
            .protected_indices()
            .iter()
            .map(|&j| self.rows[i][j].as_disc())
            .collect()
    }

    pub fn validate_row(&self, row: &[Cell]) -> Result<(), DataError> {
        if row.len() != self.schema.len() {
            return Err(DataError::SchemaMismatch(format!(
                "row has {} cells, schema has {}",
                row.len(),
                self.schema.len()
            )));
        }
        for (j, col) in self.schema.columns.iter().enumerate() {
            match (col.kind, &row[j]) {
                (ColumnKind::Continuous, Cell::Cont(v)) => {
                    if !v.is_finite() {
                        return Err(DataError::SchemaMismatch(format!(
                            "non-finite value in column `{}`",
                            col.name
                        )));
                    }
                }
                (ColumnKind::Discrete, Cell::Disc(idx)) => {
                    if *idx as usize >= self.categories[j].len() {
                        return Err(DataError::SchemaMismatch(format!(
                            "category index {idx} out of range for column `{}`",
                            col.name
                        )));
                    }
                }
                _ => {
                    return Err(DataError::SchemaMismatch(format!(
                        "cell kind does not match column `{}`",
                        col.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Subset view as an owned dataset (schema and dictionaries preserved).
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            categories: self.categories.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            origin: indices.iter().map(|&i| self.origin[i]).collect(),
        }
    }

    /// Concatenate real rows with per-subgroup synthetic batches. Real rows
    /// come first; batches are appended in ascending subgroup-key order and
    /// tagged `Origin::Synthetic`.
    pub fn augment(
        &self,
        batches: &BTreeMap<SubgroupKey, Vec<Vec<Cell>>>,
    ) -> Result<Dataset, DataError> {
        let protected_cols = self.schema.protected_indices();
        let target_col = self.schema.target_index();
        let mut out = self.clone();
        for (key, batch) in batches {
            for row in batch {
                self.validate_row(row)?;
                let tuple: Vec<u32> = protected_cols.iter().map(|&j| row[j].as_disc()).collect();
                if tuple != key.protected_values {
                    return Err(DataError::SubgroupLabelMismatch {
                        key: key.to_string(),
                        detail: format!("protected cells {tuple:?}"),
                    });
                }
                let class = row[target_col].as_disc() as u8;
                if class != key.class_label {
                    return Err(DataError::SubgroupLabelMismatch {
                        key: key.to_string(),
                        detail: format!("class cell {class}"),
                    });
                }
                out.rows.push(row.clone());
                out.origin.push(Origin::Synthetic);
            }
        }
        Ok(out)
    }

    /// Write rows back out as CSV in schema column order. When `with_origin`
    /// is set an extra `origin` column (`real`/`synthetic`) is appended.
    pub fn write_csv(&self, path: &Path, with_origin: bool) -> Result<(), DataError> {
        let mut writer = csv::Writer::from_path(path)
            .map_err(|e| DataError::Io(format!("{}: {e}", path.display())))?;
        let mut header: Vec<&str> = self
            .schema
            .columns
            .iter()
            .map(|c| c.name.as_str())
            .collect();
        if with_origin {
            header.push("origin");
        }
        writer
            .write_record(&header)
            .map_err(|e| DataError::Csv(e.to_string()))?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut record: Vec<String> = Vec::with_capacity(header.len());
            for (j, cell) in row.iter().enumerate() {
                match cell {
                    Cell::Cont(v) => record.push(format!("{v}")),
                    Cell::Disc(idx) => record.push(self.categories[j][*idx as usize].clone()),
                }
            }
            if with_origin {
                record.push(
                    match self.origin[i] {
                        Origin::Real => "real",
                        Origin::Synthetic => "synthetic",
                    }
                    .to_string(),
                );
            }
            writer
                .write_record(&record)
                .map_err(|e| DataError::Csv(e.to_string()))?;
        }
        writer.flush().map_err(|e| DataError::Io(e.to_string()))?;
        Ok(())
    }
}
