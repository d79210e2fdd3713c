//! Classical information-theoretic filter criteria and the exact greedy
//! oracle, all on plug-in estimates with no smoothing.
//!
//! Scoring conventions for a candidate `i` given the selected set `S`:
//!
//! | kind        | score                                                        |
//! |-------------|--------------------------------------------------------------|
//! | MIM         | `I(x_i;y)`                                                   |
//! | mRMR        | `I(x_i;y) - mean_j I(x_i;x_j)`                               |
//! | JMI         | `I(x_i;y) - mean_j [I(x_i;x_j) - I(x_i;x_j|y)]`              |
//! | CMIM        | `min_j I(x_i;y|x_j)`                                         |
//! | CIFE        | `I(x_i;y) - sum_j I(x_i;x_j) + sum_j I(x_i;x_j|y)`           |
//! | ExactGreedy | `I(x_{S+i};y)` by brute force                                |
//!
//! Empty means, sums and minima reduce every kind to `I(x_i;y)` at `S = {}`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{cmi_plugin, cond_relevance, joint_mi_exact, mi_pair, mi_plugin};
use crate::selection::{ConfigEcho, SelectionResult, StepRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    Mim,
    Mrmr,
    Jmi,
    Cmim,
    Cife,
    ExactGreedy,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 6] = [
        BaselineKind::Mim,
        BaselineKind::Mrmr,
        BaselineKind::Jmi,
        BaselineKind::Cmim,
        BaselineKind::Cife,
        BaselineKind::ExactGreedy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Mim => "mim",
            BaselineKind::Mrmr => "mrmr",
            BaselineKind::Jmi => "jmi",
            BaselineKind::Cmim => "cmim",
            BaselineKind::Cife => "cife",
            BaselineKind::ExactGreedy => "exact-greedy",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown baseline method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Term {
    Relevance(usize),
    /// `I(x_a; x_b)` with `a < b`.
    Pair(usize, usize),
    /// `I(x_a; x_b | y)` with `a < b`.
    CondPair(usize, usize),
    /// `I(x_i; y | x_j)`, not symmetric.
    CondRelevance(usize, usize),
}

impl Term {
    fn pair(i: usize, j: usize) -> Self {
        Term::Pair(i.min(j), i.max(j))
    }

    fn cond_pair(i: usize, j: usize) -> Self {
        Term::CondPair(i.min(j), i.max(j))
    }

    fn eval(self, ds: &Dataset) -> Result<f64> {
        match self {
            Term::Relevance(i) => mi_plugin(ds, i, 0.0),
            Term::Pair(a, b) => mi_pair(ds, a, b, 0.0),
            Term::CondPair(a, b) => cmi_plugin(ds, a, b, 0.0),
            Term::CondRelevance(i, j) => cond_relevance(ds, i, j, 0.0),
        }
    }
}

/// Memo of the plug-in information terms used by the baseline scorers.
/// Symmetric terms share one entry per unordered pair.
#[derive(Debug)]
pub struct MiCache<'a> {
    ds: &'a Dataset,
    enabled: bool,
    values: Mutex<HashMap<Term, f64>>,
}

impl<'a> MiCache<'a> {
    pub fn new(ds: &'a Dataset) -> Self {
        MiCache { ds, enabled: true, values: Mutex::new(HashMap::new()) }
    }

    /// A cache that stores nothing; every lookup recomputes.
    pub fn disabled(ds: &'a Dataset) -> Self {
        MiCache { ds, enabled: false, values: Mutex::new(HashMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.values.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, term: Term) -> Result<f64> {
        if !self.enabled {
            return term.eval(self.ds);
        }
        if let Some(&v) = self.values.lock().expect("cache lock").get(&term) {
            return Ok(v);
        }
        let v = term.eval(self.ds)?;
        self.values.lock().expect("cache lock").insert(term, v);
        Ok(v)
    }

    pub fn relevance(&self, i: usize) -> Result<f64> {
        self.get(Term::Relevance(i))
    }

    pub fn pair(&self, i: usize, j: usize) -> Result<f64> {
        self.get(Term::pair(i, j))
    }

    pub fn cond_pair(&self, i: usize, j: usize) -> Result<f64> {
        self.get(Term::cond_pair(i, j))
    }

    pub fn cond_relevance(&self, i: usize, j: usize) -> Result<f64> {
        self.get(Term::CondRelevance(i, j))
    }
}

/// Score of candidate `i` given the selected set `s`.
pub fn baseline_score(kind: BaselineKind, ds: &Dataset, s: &[usize], i: usize, cache: &MiCache<'_>) -> Result<f64> {
    ds.check_feature(i)?;
    if s.contains(&i) {
        return Err(Error::AlreadySelected(i));
    }
    if kind == BaselineKind::ExactGreedy {
        let mut set = s.to_vec();
        set.push(i);
        return joint_mi_exact(ds, &set);
    }
    let relevance = cache.relevance(i)?;
    if s.is_empty() {
        return Ok(relevance);
    }
    let n = s.len() as f64;
    match kind {
        BaselineKind::Mim => Ok(relevance),
        BaselineKind::Mrmr => {
            let redundancy = s.iter().map(|&j| cache.pair(i, j)).sum::<Result<f64>>()?;
            Ok(relevance - redundancy / n)
        }
        BaselineKind::Jmi => {
            let mut acc = 0.0;
            for &j in s {
                acc += cache.pair(i, j)? - cache.cond_pair(i, j)?;
            }
            Ok(relevance - acc / n)
        }
        BaselineKind::Cmim => {
            let mut min = f64::INFINITY;
            for &j in s {
                min = min.min(cache.cond_relevance(i, j)?);
            }
            Ok(min)
        }
        BaselineKind::Cife => {
            let mut acc = relevance;
            for &j in s {
                acc += cache.cond_pair(i, j)? - cache.pair(i, j)?;
            }
            Ok(acc)
        }
        BaselineKind::ExactGreedy => unreachable!("handled above"),
    }
}

/// Greedy forward selection of `n_select` features under `kind`.
pub fn baseline_select(kind: BaselineKind, ds: &Dataset, n_select: usize) -> Result<SelectionResult> {
    baseline_select_with_cache(kind, ds, n_select, &MiCache::new(ds))
}

pub fn baseline_select_with_cache(
    kind: BaselineKind,
    ds: &Dataset,
    n_select: usize,
    cache: &MiCache<'_>,
) -> Result<SelectionResult> {
    if n_select == 0 {
        return Err(Error::InvalidArgument("number of features to select must be at least 1".into()));
    }
    if !ds.is_all_categorical() {
        let i = (0..ds.n_features()).find(|&i| ds.codes(i).is_err()).unwrap_or(0);
        return Err(Error::ContinuousColumn { index: i, name: ds.feature_name(i).to_string() });
    }
    let start = Instant::now();
    let target = n_select.min(ds.n_features());
    let mut selected: Vec<usize> = Vec::with_capacity(target);
    let mut scores = Vec::with_capacity(target);
    let mut steps = Vec::with_capacity(target);
    while selected.len() < target {
        let candidates: Vec<usize> = (0..ds.n_features()).filter(|i| !selected.contains(i)).collect();
        let scored = candidates
            .par_iter()
            .map(|&i| baseline_score(kind, ds, &selected, i, cache))
            .collect::<Result<Vec<f64>>>()?;
        let mut best = 0;
        for (pos, &s) in scored.iter().enumerate() {
            if s > scored[best] {
                best = pos;
            }
        }
        let (feature, value) = (candidates[best], scored[best]);
        selected.push(feature);
        scores.push(value);
        steps.push(StepRecord::Select { feature, value });
    }
    Ok(SelectionResult {
        config: ConfigEcho { method: kind.name().to_string(), n_select, alpha: 0.0 },
        feature_names: selected.iter().map(|&i| ds.feature_name(i).to_string()).collect(),
        ranked: selected,
        scores,
        steps,
        restarts: Vec::new(),
        elapsed: start.elapsed(),
    })
}
