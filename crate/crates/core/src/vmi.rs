//! Variational forward feature selection.
//!
//! For a conditioning set `S` the estimated lower bound on `I(x_S; y)` is
//!
//! ```text
//! I_LB = (1/W) sum_k w_k [ ln q(x_S^k | y^k) - ln sum_c p(c) q(x_S^k | c) ]
//! ```
//!
//! where `q(x_S | y)` factorizes auto-regressively over the selection order.
//! The state keeps, per sample and class, `ln q(x_S | c)` (the Q matrix) and
//! for every candidate `ln q(x_i | x_S, c)` (its C matrix), so scoring a
//! candidate costs O(N L) and a full run O(N D T). Everything is kept in the
//! log domain.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Column, Dataset};
use crate::error::{Error, Result};
use crate::estimators::{fit_cond_pmf, fit_pairwise_cond_pmf, fit_prior, Kde1d, Kde2d};
use crate::numeric::log_sum_exp;
use crate::selection::{ConfigEcho, SelectionResult, StepRecord};

/// Family of variational conditionals `q(x_t | x_<t, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QDistKind {
    /// `q(x_t | x_<t, y) = p(x_t | y)`.
    Naive,
    /// Geometric mean of `p(x_t | x_s, y)` over the conditioning set.
    Pairwise,
}

impl QDistKind {
    pub fn method_name(self) -> &'static str {
        match self {
            QDistKind::Naive => "vmi-naive",
            QDistKind::Pairwise => "vmi-pairwise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VmiConfig {
    /// Additive smoothing for categorical conditional tables.
    pub alpha: f64,
}

impl Default for VmiConfig {
    fn default() -> Self {
        VmiConfig { alpha: 0.1 }
    }
}

/// Selection state after some number of steps.
#[derive(Debug, Clone)]
pub struct SelectionState<'a> {
    ds: &'a Dataset,
    kind: QDistKind,
    config: VmiConfig,
    selected: Vec<usize>,
    conditioning: Vec<usize>,
    log_q: Vec<f64>,
    /// Candidate C matrices that differ from `base_log_c`; Naive never fills these.
    log_c: Vec<Option<Vec<f64>>>,
    /// `ln p(x_i | c)` per feature, the C matrices at `S = {}`.
    base_log_c: Vec<Vec<f64>>,
    log_prior: Vec<f64>,
    lb_current: f64,
    trajectory: Vec<StepRecord>,
    restarts: Vec<usize>,
}

/// `ln p(x_i^k | c)` for every sample and class, from a smoothed table or a
/// per-class KDE.
fn univariate_log_c(ds: &Dataset, i: usize, alpha: f64) -> Result<Vec<f64>> {
    let l = ds.n_classes();
    match ds.column(i) {
        Column::Categorical { codes, .. } => {
            let table = fit_cond_pmf(ds, i, alpha)?;
            let mut out = Vec::with_capacity(codes.len() * l);
            for &v in codes {
                out.extend((0..l).map(|c| table.prob(v, c).ln()));
            }
            Ok(out)
        }
        Column::Continuous(values) => Ok(Kde1d::fit(ds, i)?.log_density_matrix(values)),
    }
}

/// `ln p(x_i^k | x_j^k, c)`.
fn pairwise_log_c(ds: &Dataset, i: usize, j: usize, alpha: f64) -> Result<Vec<f64>> {
    let l = ds.n_classes();
    match (ds.column(i), ds.column(j)) {
        (Column::Categorical { codes: ci, .. }, Column::Categorical { codes: cj, .. }) => {
            let table = fit_pairwise_cond_pmf(ds, i, j, alpha)?;
            let mut out = Vec::with_capacity(ci.len() * l);
            for (&v, &u) in ci.iter().zip(cj) {
                out.extend((0..l).map(|c| table.prob(v, u, c).ln()));
            }
            Ok(out)
        }
        (Column::Continuous(xi), Column::Continuous(xj)) => Ok(Kde2d::fit(ds, i, j)?.log_cond_matrix(xi, xj)),
        _ => Err(Error::Unsupported(format!(
            "pairwise conditional between {} and {} mixes categorical and continuous columns",
            ds.feature_name(i),
            ds.feature_name(j)
        ))),
    }
}

impl<'a> SelectionState<'a> {
    /// State at `S = {}`: Q is all zeros and every C matrix holds `ln p(x_i | c)`.
    pub fn new(ds: &'a Dataset, kind: QDistKind, config: VmiConfig) -> Result<Self> {
        let prior = fit_prior(ds)?;
        let base_log_c = (0..ds.n_features())
            .into_par_iter()
            .map(|i| univariate_log_c(ds, i, config.alpha))
            .collect::<Result<Vec<_>>>()?;
        Ok(SelectionState {
            ds,
            kind,
            config,
            selected: Vec::new(),
            conditioning: Vec::new(),
            log_q: vec![0.0; ds.n_samples() * ds.n_classes()],
            log_c: vec![None; ds.n_features()],
            base_log_c,
            log_prior: prior.iter().map(|p| p.ln()).collect(),
            lb_current: 0.0,
            trajectory: Vec::new(),
            restarts: Vec::new(),
        })
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.ds
    }

    pub fn kind(&self) -> QDistKind {
        self.kind
    }

    pub fn config(&self) -> VmiConfig {
        self.config
    }

    /// Every feature selected so far, in order.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// Features selected since the last restart.
    pub fn conditioning(&self) -> &[usize] {
        &self.conditioning
    }

    /// `ln q(x_S^k | c)`, row-major `[k * L + c]`.
    pub fn log_q(&self) -> &[f64] {
        &self.log_q
    }

    /// `ln q(x_i^k | x_S^k, c)` for a candidate; `None` once `i` is selected.
    pub fn log_c(&self, i: usize) -> Option<&[f64]> {
        if self.selected.contains(&i) {
            return None;
        }
        Some(self.log_c[i].as_deref().unwrap_or(&self.base_log_c[i]))
    }

    pub fn log_prior(&self) -> &[f64] {
        &self.log_prior
    }

    pub fn lb_current(&self) -> f64 {
        self.lb_current
    }

    pub fn trajectory(&self) -> &[StepRecord] {
        &self.trajectory
    }

    pub fn restarts(&self) -> &[usize] {
        &self.restarts
    }

    pub fn candidates(&self) -> Vec<usize> {
        (0..self.ds.n_features()).filter(|i| !self.selected.contains(i)).collect()
    }

    /// Lower-bound estimate for the current conditioning set; 0 at `S = {}`.
    pub fn lb_estimate(&self) -> f64 {
        if self.conditioning.is_empty() {
            return 0.0;
        }
        self.bound(|_| 0.0)
    }

    /// Weighted sample mean of `ln q(x^k | y^k) - ln sum_c p(c) q(x^k | c)`
    /// where `extra(k*L + c)` is added to `ln q` (a candidate's C matrix).
    fn bound(&self, extra: impl Fn(usize) -> f64) -> f64 {
        let l = self.ds.n_classes();
        let mut acc = 0.0;
        for (k, (&y, &w)) in self.ds.labels().iter().zip(self.ds.weights()).enumerate() {
            if w == 0.0 {
                continue;
            }
            let row = k * l;
            let own = self.log_q[row + y as usize] + extra(row + y as usize);
            let marginal = log_sum_exp(
                (0..l).map(|c| self.log_prior[c] + self.log_q[row + c] + extra(row + c)),
            );
            acc += w * (own - marginal);
        }
        acc / self.ds.total_weight()
    }

    /// `I_LB(x_{S + i}; y)` from the cached Q and C matrices. Pure.
    pub fn score_candidate(&self, i: usize) -> Result<f64> {
        self.ds.check_feature(i)?;
        let log_c = self.log_c(i).ok_or(Error::AlreadySelected(i))?;
        Ok(self.bound(|idx| log_c[idx]))
    }

    /// Scores of all remaining candidates in feature-index order.
    pub fn score_all(&self) -> Vec<(usize, f64)> {
        let candidates = self.candidates();
        let scores: Vec<f64> = candidates
            .par_iter()
            .map(|&i| self.score_candidate(i).expect("candidate is unselected"))
            .collect();
        candidates.into_iter().zip(scores).collect()
    }

    /// One iteration: select the best candidate, or restart when it does not
    /// beat the current bound. Right after a restart (or at the very start)
    /// the best candidate is always taken, which guarantees progress.
    pub fn step(&mut self) -> Result<StepRecord> {
        let scored = self.score_all();
        let (best, best_score) = argmax(&scored).ok_or(Error::NoCandidates)?;
        if !self.conditioning.is_empty() && best_score <= self.lb_current {
            let record = StepRecord::Restart {
                best_feature: best,
                best_score,
                lb_before: self.lb_current,
            };
            self.restart();
            self.trajectory.push(record.clone());
            return Ok(record);
        }
        self.commit(best, best_score)?;
        let record = StepRecord::Select { feature: best, value: best_score };
        self.trajectory.push(record.clone());
        Ok(record)
    }

    /// Adds `i` to the conditioning set regardless of its score.
    pub fn force_select(&mut self, i: usize) -> Result<StepRecord> {
        let score = self.score_candidate(i)?;
        self.commit(i, score)?;
        let record = StepRecord::Select { feature: i, value: score };
        self.trajectory.push(record.clone());
        Ok(record)
    }

    fn restart(&mut self) {
        self.restarts.push(self.selected.len());
        self.conditioning.clear();
        self.log_q.iter_mut().for_each(|v| *v = 0.0);
        self.log_c.iter_mut().for_each(|c| *c = None);
        self.lb_current = 0.0;
    }

    /// Adds `chosen` to the conditioning set and updates Q and the C matrices.
    fn commit(&mut self, chosen: usize, score: f64) -> Result<()> {
        let chosen_c = self.log_c(chosen).ok_or(Error::AlreadySelected(chosen))?.to_vec();
        self.log_q.iter_mut().zip(&chosen_c).for_each(|(q, c)| *q += c);
        self.selected.push(chosen);
        self.conditioning.push(chosen);
        self.log_c[chosen] = None;
        match self.kind {
            QDistKind::Naive => update_naive(self),
            QDistKind::Pairwise => update_pairwise(self, chosen)?,
        }
        self.lb_current = score;
        Ok(())
    }
}

/// Naive Bayes: `q(x_i | x_S, y) = p(x_i | y)` regardless of `S`, so no
/// candidate matrix changes.
fn update_naive(_state: &mut SelectionState<'_>) {}

/// Geometric-mean recursion in log domain with `t = |S|` after insertion:
/// `ln q_t = (ln p(x_i | x_chosen, y) + (t - 1) ln q_{t-1}) / t`.
fn update_pairwise(state: &mut SelectionState<'_>, chosen: usize) -> Result<()> {
    let t = state.conditioning.len() as f64;
    let ds = state.ds;
    let alpha = state.config.alpha;
    let candidates = state.candidates();
    let updated = candidates
        .par_iter()
        .map(|&i| {
            let pair = pairwise_log_c(ds, i, chosen, alpha)?;
            if t == 1.0 {
                return Ok(pair);
            }
            let old = state.log_c(i).expect("candidate is unselected");
            Ok(pair.iter().zip(old).map(|(p, o)| (p + (t - 1.0) * o) / t).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    for (i, c) in candidates.into_iter().zip(updated) {
        state.log_c[i] = Some(c);
    }
    Ok(())
}

/// First maximum in index order; NaN scores never win.
fn argmax(scored: &[(usize, f64)]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &(i, s) in scored {
        match best {
            _ if s.is_nan() => {}
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.or_else(|| scored.first().copied())
}

pub fn init_state(ds: &Dataset, kind: QDistKind, config: VmiConfig) -> Result<SelectionState<'_>> {
    SelectionState::new(ds, kind, config)
}

/// Greedy forward selection of `n_select` features by maximizing the
/// variational lower bound, restarting from an empty conditioning set
/// whenever no candidate raises it.
pub fn select(ds: &Dataset, kind: QDistKind, n_select: usize, config: VmiConfig) -> Result<SelectionResult> {
    if n_select == 0 {
        return Err(Error::InvalidArgument("number of features to select must be at least 1".into()));
    }
    let start = Instant::now();
    let target = n_select.min(ds.n_features());
    let mut state = SelectionState::new(ds, kind, config)?;
    let mut scores = Vec::with_capacity(target);
    while state.selected().len() < target {
        if let StepRecord::Select { value, .. } = state.step()? {
            scores.push(value);
        }
    }
    Ok(SelectionResult {
        config: ConfigEcho {
            method: kind.method_name().to_string(),
            n_select,
            alpha: config.alpha,
        },
        ranked: state.selected().to_vec(),
        feature_names: state.selected().iter().map(|&i| ds.feature_name(i).to_string()).collect(),
        scores,
        steps: state.trajectory().to_vec(),
        restarts: state.restarts().to_vec(),
        elapsed: start.elapsed(),
    })
}
