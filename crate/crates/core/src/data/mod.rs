//! Dataset representation, CSV ingestion, discretization and synthetic
//! generators.
//!
//! A [`Dataset`] is immutable once built. Every sample carries a
//! nonnegative weight (default 1) so the same estimators work on empirical
//! data and on exactly enumerated joint distributions.

mod csv_io;
mod discretize;
mod synth;

pub use csv_io::{load_csv, read_csv, write_csv, LabelColumn, Schema};
pub use discretize::{discretize, BinStrategy};
pub use synth::{
    enumerate_joint, enumerate_joint_with_cap, gen_from_spec, gen_tree_synthetic,
    random_naive_bayes_spec, random_two_layer_tree_spec, DiscreteNode, DiscreteTreeSpec,
    GaussianNode, GaussianTreeSpec, TreeModelSpec, DEFAULT_ENUMERATION_CAP,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical,
    Continuous,
}

/// One feature column.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    /// Codes in `0..cardinality`.
    Categorical { codes: Vec<u32>, cardinality: usize },
    Continuous(Vec<f64>),
}

impl Column {
    pub fn categorical(codes: Vec<u32>, cardinality: usize) -> Self {
        Column::Categorical { codes, cardinality }
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Categorical { codes, .. } => codes.len(),
            Column::Continuous(values) => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            Column::Categorical { .. } => ColumnKind::Categorical,
            Column::Continuous(_) => ColumnKind::Continuous,
        }
    }

    pub fn codes(&self) -> Option<&[u32]> {
        match self {
            Column::Categorical { codes, .. } => Some(codes),
            Column::Continuous(_) => None,
        }
    }

    pub fn values(&self) -> Option<&[f64]> {
        match self {
            Column::Continuous(values) => Some(values),
            Column::Categorical { .. } => None,
        }
    }

    pub fn cardinality(&self) -> Option<usize> {
        match self {
            Column::Categorical { cardinality, .. } => Some(*cardinality),
            Column::Continuous(_) => None,
        }
    }

    fn take_rows(&self, rows: &[usize]) -> Column {
        match self {
            Column::Categorical { codes, cardinality } => Column::Categorical {
                codes: rows.iter().map(|&r| codes[r]).collect(),
                cardinality: *cardinality,
            },
            Column::Continuous(values) => {
                Column::Continuous(rows.iter().map(|&r| values[r]).collect())
            }
        }
    }
}

/// N samples by D features with discrete labels in `0..n_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    labels: Vec<u32>,
    n_classes: usize,
    weights: Vec<f64>,
    feature_names: Vec<String>,
    label_name: String,
    levels: Vec<Option<Vec<String>>>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a unit-weight dataset and checks every invariant.
    pub fn new(
        columns: Vec<Column>,
        labels: Vec<u32>,
        n_classes: usize,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n = labels.len();
        let ds = Dataset {
            levels: vec![None; columns.len()],
            class_names: (0..n_classes).map(|c| c.to_string()).collect(),
            columns,
            labels,
            n_classes,
            weights: vec![1.0; n],
            feature_names,
            label_name: "y".to_string(),
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Convenience constructor for all-categorical data, feature names `x1..xD`.
    pub fn from_codes(columns: Vec<(Vec<u32>, usize)>, labels: Vec<u32>, n_classes: usize) -> Result<Self> {
        let names = (1..=columns.len()).map(|i| format!("x{i}")).collect();
        let cols = columns
            .into_iter()
            .map(|(codes, cardinality)| Column::Categorical { codes, cardinality })
            .collect();
        Dataset::new(cols, labels, n_classes, names)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        self.weights = weights;
        self.validate()?;
        Ok(self)
    }

    pub fn with_label_name(mut self, name: impl Into<String>) -> Self {
        self.label_name = name.into();
        self
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_classes {
            return Err(Error::InvalidDataset(format!(
                "{} class names for {} classes",
                names.len(),
                self.n_classes
            )));
        }
        self.class_names = names;
        Ok(self)
    }

    /// Attaches decoding dictionaries for categorical columns.
    pub fn with_levels(mut self, levels: Vec<Option<Vec<String>>>) -> Result<Self> {
        if levels.len() != self.columns.len() {
            return Err(Error::InvalidDataset("levels length mismatch".into()));
        }
        for (i, lv) in levels.iter().enumerate() {
            if let Some(lv) = lv {
                if self.columns[i].cardinality() != Some(lv.len()) {
                    return Err(Error::InvalidDataset(format!(
                        "column {i}: {} levels for cardinality {:?}",
                        lv.len(),
                        self.columns[i].cardinality()
                    )));
                }
            }
        }
        self.levels = levels;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        if n == 0 {
            return Err(Error::InvalidDataset("dataset has no samples".into()));
        }
        if self.n_classes == 0 {
            return Err(Error::InvalidDataset("n_classes must be at least 1".into()));
        }
        if self.feature_names.len() != self.columns.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {} columns",
                self.feature_names.len(),
                self.columns.len()
            )));
        }
        if let Some(&bad) = self.labels.iter().find(|&&y| y as usize >= self.n_classes) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} out of range for {} classes",
                self.n_classes
            )));
        }
        for (i, col) in self.columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "column {i} has {} entries, expected {n}",
                    col.len()
                )));
            }
            match col {
                Column::Categorical { codes, cardinality } => {
                    if let Some(&bad) = codes.iter().find(|&&v| v as usize >= *cardinality) {
                        return Err(Error::InvalidDataset(format!(
                            "column {i}: code {bad} out of range for cardinality {cardinality}"
                        )));
                    }
                }
                Column::Continuous(values) => {
                    if values.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidDataset(format!(
                            "column {i} contains a non-finite value"
                        )));
                    }
                }
            }
        }
        if self.weights.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} weights for {n} samples",
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDataset("weights must be finite and nonnegative".into()));
        }
        if self.total_weight() <= 0.0 {
            return Err(Error::InvalidDataset("sum of weights must be positive".into()));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn column(&self, i: usize) -> &Column {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_name(&self, i: usize) -> &str {
        &self.feature_names[i]
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn levels(&self, i: usize) -> Option<&[String]> {
        self.levels[i].as_deref()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn is_all_categorical(&self) -> bool {
        self.columns.iter().all(|c| c.kind() == ColumnKind::Categorical)
    }

    /// Codes of a categorical column, or an error naming the column.
    pub fn codes(&self, i: usize) -> Result<&[u32]> {
        self.check_feature(i)?;
        self.columns[i].codes().ok_or_else(|| Error::ContinuousColumn {
            index: i,
            name: self.feature_names[i].clone(),
        })
    }

    pub fn check_feature(&self, i: usize) -> Result<()> {
        if i >= self.columns.len() {
            return Err(Error::InvalidArgument(format!(
                "feature index {i} out of range for {} features",
                self.columns.len()
            )));
        }
        Ok(())
    }

    /// Row-restricted copy. Cardinalities, class count and dictionaries are
    /// kept so tables fitted on the subset align with the full dataset.
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let ds = Dataset {
            columns: self.columns.iter().map(|c| c.take_rows(rows)).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            n_classes: self.n_classes,
            weights: rows.iter().map(|&r| self.weights[r]).collect(),
            feature_names: self.feature_names.clone(),
            label_name: self.label_name.clone(),
            levels: self.levels.clone(),
            class_names: self.class_names.clone(),
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Column-restricted copy in the given order.
    pub fn select_features(&self, features: &[usize]) -> Result<Dataset> {
        for &f in features {
            self.check_feature(f)?;
        }
        Ok(Dataset {
            columns: features.iter().map(|&f| self.columns[f].clone()).collect(),
            labels: self.labels.clone(),
            n_classes: self.n_classes,
            weights: self.weights.clone(),
            feature_names: features.iter().map(|&f| self.feature_names[f].clone()).collect(),
            label_name: self.label_name.clone(),
            levels: features.iter().map(|&f| self.levels[f].clone()).collect(),
            class_names: self.class_names.clone(),
        })
    }

    /// Copy with one more column appended.
    pub fn with_column(&self, column: Column, name: impl Into<String>) -> Result<Dataset> {
        let mut ds = self.clone();
        ds.columns.push(column);
        ds.feature_names.push(name.into());
        ds.levels.push(None);
        ds.validate()?;
        Ok(ds)
    }

    /// Copy with class codes relabeled through `perm` (old code -> new code).
    pub fn permute_classes(&self, perm: &[u32]) -> Result<Dataset> {
        if perm.len() != self.n_classes {
            return Err(Error::InvalidArgument("class permutation has wrong length".into()));
        }
        let mut ds = self.clone();
        ds.labels = self.labels.iter().map(|&y| perm[y as usize]).collect();
        let mut names = self.class_names.clone();
        for (old, &new) in perm.iter().enumerate() {
            names[new as usize] = self.class_names[old].clone();
        }
        ds.class_names = names;
        ds.validate()?;
        Ok(ds)
    }

    pub(crate) fn replace_columns(&self, columns: Vec<Column>) -> Result<Dataset> {
        let mut ds = self.clone();
        ds.levels = columns.iter().zip(&self.levels).zip(&self.columns).map(|((new, lv), old)| {
            if new.kind() == ColumnKind::Categorical && old.kind() == ColumnKind::Categorical {
                lv.clone()
            } else {
                None
            }
        }).collect();
        ds.columns = columns;
        ds.validate()?;
        Ok(ds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_codes_and_labels() {
        assert!(Dataset::from_codes(vec![(vec![0, 2], 2)], vec![0, 1], 2).is_err());
        assert!(Dataset::from_codes(vec![(vec![0, 1], 2)], vec![0, 2], 2).is_err());
        assert!(Dataset::from_codes(vec![(vec![0], 2)], vec![0, 1], 2).is_err());
    }

    #[test]
    fn rejects_zero_total_weight() {
        let ds = Dataset::from_codes(vec![(vec![0, 1], 2)], vec![0, 1], 2).unwrap();
        assert!(ds.clone().with_weights(vec![0.0, 0.0]).is_err());
        assert!(ds.clone().with_weights(vec![-1.0, 2.0]).is_err());
        assert!(ds.with_weights(vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(Dataset::from_codes(vec![], vec![], 2).is_err());
    }

    #[test]
    fn subset_keeps_cardinality() {
        let ds = Dataset::from_codes(vec![(vec![0, 1, 2], 3)], vec![0, 1, 1], 2).unwrap();
        let sub = ds.subset_rows(&[0]).unwrap();
        assert_eq!(sub.column(0).cardinality(), Some(3));
        assert_eq!(sub.n_classes(), 2);
        assert_eq!(sub.labels(), &[0]);
    }

    #[test]
    fn class_permutation_moves_names() {
        let ds = Dataset::from_codes(vec![(vec![0, 1], 2)], vec![0, 1], 2)
            .unwrap()
            .with_class_names(vec!["a".into(), "b".into()])
            .unwrap();
        let p = ds.permute_classes(&[1, 0]).unwrap();
        assert_eq!(p.labels(), &[1, 0]);
        assert_eq!(p.class_names(), &["b".to_string(), "a".to_string()]);
    }
}
