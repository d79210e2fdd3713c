use std::time::Duration;

use serde::{Deserialize, Serialize};

/// One iteration of a greedy selection loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum StepRecord {
    /// `feature` was added; `value` is the objective after adding it.
    Select { feature: usize, value: f64 },
    /// No candidate improved the bound; the conditioning set was cleared.
    Restart {
        best_feature: usize,
        best_score: f64,
        lb_before: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub method: String,
    pub n_select: usize,
    pub alpha: f64,
}

/// Output of any ranking method in this crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub config: ConfigEcho,
    /// Selected features in selection order.
    pub ranked: Vec<usize>,
    pub feature_names: Vec<String>,
    /// Objective value after each selection, aligned with `ranked`.
    pub scores: Vec<f64>,
    pub steps: Vec<StepRecord>,
    /// Number of features already selected when each restart fired.
    pub restarts: Vec<usize>,
    #[serde(skip)]
    pub elapsed: Duration,
}
