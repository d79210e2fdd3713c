//! Randomized self-checks of the selection engine against brute-force
//! information oracles.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{enumerate_joint, random_naive_bayes_spec, random_two_layer_tree_spec, Dataset};
use crate::error::{Error, Result};
use crate::estimators::{joint_mi_exact, mi_plugin};
use crate::selection::StepRecord;
use crate::vmi::{init_state, QDistKind, VmiConfig};

pub const TOLERANCE: f64 = 1e-10;

const EXACT: VmiConfig = VmiConfig { alpha: 0.0 };
const KINDS: [QDistKind; 2] = [QDistKind::Naive, QDistKind::Pairwise];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Naive bound equals the exact MI of any enumerated Naive Bayes joint.
    Theorem1,
    /// On two-layer trees, greedy picks layer-1 features and the bound is
    /// exact until it reaches the MI of all features.
    Theorem2,
    /// The bound never exceeds the empirical MI along greedy runs.
    Bound,
    /// Single-feature bounds equal plug-in MI.
    Step1,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Theorem1, Suite::Theorem2, Suite::Bound, Suite::Step1];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Theorem2 => "theorem2",
            Suite::Bound => "bound",
            Suite::Step1 => "step1",
        }
    }

    pub fn default_cases(self) -> usize {
        match self {
            Suite::Theorem1 => 100,
            Suite::Theorem2 => 50,
            Suite::Bound | Suite::Step1 => 200,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown verification suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub cases: usize,
    pub checks: usize,
    pub passed: bool,
    /// Largest violation seen, in nats; negative values mean slack.
    pub max_deviation: f64,
    pub failures: Vec<String>,
}

struct Tally {
    checks: usize,
    max_deviation: f64,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { checks: 0, max_deviation: f64::NEG_INFINITY, failures: Vec::new() }
    }

    /// Records `deviation`, failing when it exceeds the tolerance.
    fn check(&mut self, deviation: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        self.max_deviation = self.max_deviation.max(deviation);
        if !(deviation <= TOLERANCE) {
            self.failures.push(what());
        }
    }

    fn fail(&mut self, what: String) {
        self.checks += 1;
        self.failures.push(what);
    }
}

/// Random categorical dataset with a binary label where each feature copies
/// a function of the label with probability one half.
pub fn random_categorical_dataset<R: Rng>(rng: &mut R, n: usize, d: usize, max_card: usize) -> Result<Dataset> {
    let labels: Vec<u32> = (0..n).map(|_| rng.random_range(0..2)).collect();
    let cols = (0..d)
        .map(|_| {
            let card = rng.random_range(2..=max_card.max(2));
            let shift = rng.random_range(0..card as u32);
            let codes = labels
                .iter()
                .map(|&y| if rng.random_bool(0.5) { (y + shift) % card as u32 } else { rng.random_range(0..card as u32) })
                .collect();
            (codes, card)
        })
        .collect();
    Dataset::from_codes(cols, labels, 2)
}

fn theorem1(rng: &mut ChaCha8Rng, cases: usize, t: &mut Tally) -> Result<()> {
    for case in 0..cases {
        let d = rng.random_range(3..=5);
        let ds = enumerate_joint(&random_naive_bayes_spec(rng, d, 2..=3))?;
        let mut state = init_state(&ds, QDistKind::Naive, EXACT)?;
        for i in 0..d {
            state.force_select(i)?;
            let lb = state.lb_estimate();
            let exact = joint_mi_exact(&ds, state.conditioning())?;
            t.check((lb - exact).abs(), || format!("case {case}: |S|={} lb {lb} vs exact {exact}", i + 1));
        }
    }
    Ok(())
}

fn theorem2(rng: &mut ChaCha8Rng, cases: usize, t: &mut Tally) -> Result<()> {
    for case in 0..cases {
        let n_layer1 = rng.random_range(2..=3);
        let children = rng.random_range(1..=2);
        let ds = enumerate_joint(&random_two_layer_tree_spec(rng, n_layer1, children, 2..=3))?;
        let target = joint_mi_exact(&ds, &(0..ds.n_features()).collect::<Vec<_>>())?;
        for kind in KINDS {
            let mut state = init_state(&ds, kind, EXACT)?;
            while (state.lb_current() - target).abs() > TOLERANCE {
                match state.step()? {
                    StepRecord::Select { feature, value } if feature < n_layer1 => {
                        let exact = joint_mi_exact(&ds, state.conditioning())?;
                        t.check((value - exact).abs(), || {
                            format!("case {case} {kind:?}: lb {value} vs exact {exact} at {:?}", state.conditioning())
                        });
                    }
                    other => {
                        t.fail(format!("case {case} {kind:?}: {other:?} before reaching the full-set MI {target}"));
                        break;
                    }
                }
            }
        }
    }
    Ok(())
}

fn bound(rng: &mut ChaCha8Rng, cases: usize, t: &mut Tally) -> Result<()> {
    for case in 0..cases {
        let n = rng.random_range(10..=60);
        let d = rng.random_range(2..=5);
        let ds = random_categorical_dataset(rng, n, d, 4)?;
        for kind in KINDS {
            let mut state = init_state(&ds, kind, EXACT)?;
            while !state.candidates().is_empty() {
                for (i, score) in state.score_all() {
                    let mut set = state.conditioning().to_vec();
                    set.push(i);
                    let exact = joint_mi_exact(&ds, &set)?;
                    t.check(score - exact, || format!("case {case} {kind:?}: score {score} > exact {exact} at {set:?}"));
                }
                state.step()?;
                let (lb, exact) = (state.lb_estimate(), joint_mi_exact(&ds, state.conditioning())?);
                t.check(lb - exact, || format!("case {case} {kind:?}: lb {lb} > exact {exact}"));
            }
        }
    }
    Ok(())
}

fn step1(rng: &mut ChaCha8Rng, cases: usize, t: &mut Tally) -> Result<()> {
    for case in 0..cases {
        let n = rng.random_range(5..=80);
        let d = rng.random_range(1..=5);
        let ds = random_categorical_dataset(rng, n, d, 5)?;
        for kind in KINDS {
            let state = init_state(&ds, kind, EXACT)?;
            for i in 0..d {
                let (lb, mi) = (state.score_candidate(i)?, mi_plugin(&ds, i, 0.0)?);
                t.check((lb - mi).abs(), || format!("case {case} {kind:?} feature {i}: lb {lb} vs mi {mi}"));
            }
        }
    }
    Ok(())
}

/// Runs `cases` randomized instances of `suite`.
pub fn run_suite(suite: Suite, cases: usize, seed: u64) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    match suite {
        Suite::Theorem1 => theorem1(&mut rng, cases, &mut tally)?,
        Suite::Theorem2 => theorem2(&mut rng, cases, &mut tally)?,
        Suite::Bound => bound(&mut rng, cases, &mut tally)?,
        Suite::Step1 => step1(&mut rng, cases, &mut tally)?,
    }
    Ok(VerifyReport {
        suite,
        seed,
        cases,
        checks: tally.checks,
        passed: tally.failures.is_empty(),
        max_deviation: tally.max_deviation,
        failures: tally.failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass() {
        for suite in Suite::ALL {
            let r = run_suite(suite, 5, 1).unwrap();
            assert!(r.passed, "{suite}: {:?}", r.failures);
            assert!(r.checks > 0);
        }
    }

    #[test]
    fn names_round_trip() {
        for suite in Suite::ALL {
            assert_eq!(suite.name().parse::<Suite>().unwrap(), suite);
        }
        assert!("theorem3".parse::<Suite>().is_err());
    }

    #[test]
    fn tally_flags_violations() {
        let mut t = Tally::new();
        t.check(0.0, || "ok".into());
        t.check(1e-9, || "bad".into());
        t.check(f64::NAN, || "nan".into());
        assert_eq!(t.failures, vec!["bad".to_string(), "nan".to_string()]);
    }
}
