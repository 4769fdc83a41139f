//! Column schema types and the on-disk schema file format.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Feature,
    Protected,
    Target,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub role: ColumnRole,
}

/// Ordered list of column schemas. Exactly one target (discrete, binary once
/// data is observed) and at least one discrete protected column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub columns: Vec<ColumnSchema>,
}

#[derive(Deserialize)]
struct SchemaFile {
    columns: Vec<ColumnSchema>,
}

impl DatasetSchema {
    pub fn new(columns: Vec<ColumnSchema>) -> Result<Self, DataError> {
        let schema = DatasetSchema { columns };
        schema.validate()?;
        Ok(schema)
    }

    /// Parse a schema file: a TOML document with a `[[columns]]` array where
    /// each entry carries `name`, `kind` (continuous|discrete) and
    /// `role` (feature|protected|target).
    pub fn from_toml_str(text: &str) -> Result<Self, DataError> {
        let file: SchemaFile =
            toml::from_str(text).map_err(|e| DataError::InvalidSchema(e.to_string()))?;
        Self::new(file.columns)
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DataError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn validate(&self) -> Result<(), DataError> {
        let mut seen = std::collections::HashSet::new();
        for col in &self.columns {
            if col.name.is_empty() {
                return Err(DataError::InvalidSchema("empty column name".into()));
            }
            if !seen.insert(col.name.as_str()) {
                return Err(DataError::InvalidSchema(format!(
                    "duplicate column name `{}`",
                    col.name
                )));
            }
        }
        let targets: Vec<_> = self
            .columns
            .iter()
            .filter(|c| c.role == ColumnRole::Target)
            .collect();
        if targets.len() != 1 {
            return Err(DataError::InvalidSchema(format!(
                "expected exactly one target column, found {}",
                targets.len()
            )));
        }
        if targets[0].kind != ColumnKind::Discrete {
            return Err(DataError::InvalidSchema(
                "target column must be discrete".into(),
            ));
        }
        let protected: Vec<_> = self
            .columns
            .iter()
            .filter(|c| c.role == ColumnRole::Protected)
            .collect();
        if protected.is_empty() {
            return Err(DataError::InvalidSchema(
                "at least one protected column is required".into(),
            ));
        }
        if protected.iter().any(|c| c.kind != ColumnKind::Discrete) {
            return Err(DataError::InvalidSchema(
                "protected columns must be discrete".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn target_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.role == ColumnRole::Target)
            .expect("schema validated to hold one target")
    }

    /// Indices of protected columns, in schema order.
    pub fn protected_indices(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == ColumnRole::Protected)
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices of classifier feature columns (everything except protected and target).
    pub fn feature_indices(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == ColumnRole::Feature)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn n_continuous(&self) -> usize {
        self.columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Continuous)
            .count()
    }

    pub fn n_discrete(&self) -> usize {
        self.columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Discrete)
            .count()
    }

    /// Reassign protected roles: the named columns become protected, all other
    /// previously protected columns become plain features.
    pub fn with_protected(&self, names: &[String]) -> Result<Self, DataError> {
        let mut columns = self.columns.clone();
        for name in names {
            if !columns.iter().any(|c| &c.name == name) {
                return Err(DataError::MissingColumn(name.clone()));
            }
        }
        for col in &mut columns {
            if names.contains(&col.name) {
                if col.role == ColumnRole::Target {
                    return Err(DataError::InvalidSchema(format!(
                        "column `{}` is the target and cannot be protected",
                        col.name
                    )));
                }
                col.role = ColumnRole::Protected;
            } else if col.role == ColumnRole::Protected {
                col.role = ColumnRole::Feature;
            }
        }
        Self::new(columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
        [[columns]]
        name = "age"
        kind = "continuous"
        role = "feature"

        [[columns]]
        name = "sex"
        kind = "discrete"
        role = "protected"

        [[columns]]
        name = "income"
        kind = "discrete"
        role = "target"
    "#;

    #[test]
    fn parses_schema_file() {
        let schema = DatasetSchema::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(schema.len(), 3);
        assert_eq!(schema.target_index(), 2);
        assert_eq!(schema.protected_indices(), vec![1]);
        assert_eq!(schema.feature_indices(), vec![0]);
    }

    #[test]
    fn rejects_missing_target() {
        let text = EXAMPLE.replace("\"target\"", "\"feature\"");
        assert!(matches!(
            DatasetSchema::from_toml_str(&text),
            Err(DataError::InvalidSchema(_))
        ));
    }

    #[test]
    fn rejects_continuous_protected() {
        let text = EXAMPLE.replace(
            "name = \"sex\"\n        kind = \"discrete\"",
            "name = \"sex\"\n        kind = \"continuous\"",
        );
        assert!(matches!(
            DatasetSchema::from_toml_str(&text),
            Err(DataError::InvalidSchema(_))
        ));
    }

    #[test]
    fn rejects_duplicate_names() {
        let text = EXAMPLE.replace("\"age\"", "\"sex\"");
        assert!(matches!(
            DatasetSchema::from_toml_str(&text),
            Err(DataError::InvalidSchema(_))
        ));
    }

    #[test]
    fn with_protected_swaps_roles() {
        let schema = DatasetSchema::from_toml_str(EXAMPLE).unwrap();
        // `sex` discrete so it can be demoted; promote nothing new here, just keep it.
        let same = schema.with_protected(&["sex".into()]).unwrap();
        assert_eq!(same, schema);
        assert!(schema.with_protected(&["nope".into()]).is_err());
    }
}
