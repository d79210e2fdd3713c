//! Cross-validated 3-NN benchmark: error curves over feature counts for any
//! ranking method, plus paired t-tests between methods.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::baselines::{baseline_select, BaselineKind};
use crate::data::{Column, Dataset};
use crate::error::{Error, Result};
use crate::vmi::{select, QDistKind, VmiConfig};

pub const DEFAULT_K: usize = 3;
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;
/// Datasets with fewer samples use leave-one-out.
pub const KFOLD_MIN_SAMPLES: usize = 100;
pub const KFOLD: usize = 10;

/// Produces a ranking of features from a training set.
pub trait FeatureRanker: Sync {
    fn name(&self) -> String;
    /// Top `n` features, best first. `fold` identifies the training split.
    fn rank(&self, train: &Dataset, n: usize, fold: usize) -> Result<Vec<usize>>;
}

/// Ranking methods available to the harness.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Vmi { kind: QDistKind, config: VmiConfig },
    Baseline(BaselineKind),
    /// A seeded random permutation, identical on every fold.
    Random { seed: u64 },
    /// A fixed ranking.
    Fixed { name: String, ranking: Vec<usize> },
}

impl Method {
    pub const NAMES: [&'static str; 9] =
        ["vmi-naive", "vmi-pairwise", "mim", "mrmr", "jmi", "cmim", "cife", "exact-greedy", "random"];

    pub fn is_vmi(&self) -> bool {
        matches!(self, Method::Vmi { .. })
    }

    /// Parses a method name; `alpha` applies to VMI methods, `seed` to random.
    pub fn parse(name: &str, alpha: f64, seed: u64) -> Result<Method> {
        Ok(match name {
            "vmi-naive" => Method::Vmi { kind: QDistKind::Naive, config: VmiConfig { alpha } },
            "vmi-pairwise" => Method::Vmi { kind: QDistKind::Pairwise, config: VmiConfig { alpha } },
            "random" => Method::Random { seed },
            other => Method::Baseline(other.parse()?),
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Vmi { kind, .. } => f.write_str(kind.method_name()),
            Method::Baseline(kind) => f.write_str(kind.name()),
            Method::Random { .. } => f.write_str("random"),
            Method::Fixed { name, .. } => f.write_str(name),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::parse(s, VmiConfig::default().alpha, 0)
    }
}

impl FeatureRanker for Method {
    fn name(&self) -> String {
        self.to_string()
    }

    fn rank(&self, train: &Dataset, n: usize, _fold: usize) -> Result<Vec<usize>> {
        match self {
            Method::Vmi { kind, config } => Ok(select(train, *kind, n, *config)?.ranked),
            Method::Baseline(kind) => Ok(baseline_select(*kind, train, n)?.ranked),
            Method::Random { seed } => {
                let mut perm: Vec<usize> = (0..train.n_features()).collect();
                perm.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
                perm.truncate(n);
                Ok(perm)
            }
            Method::Fixed { ranking, .. } => {
                for &f in ranking {
                    train.check_feature(f)?;
                }
                Ok(ranking.iter().copied().take(n).collect())
            }
        }
    }
}

/// Hamming distance over categorical columns plus squared difference over
/// continuous ones.
fn distance(a: &Dataset, ra: usize, b: &Dataset, rb: usize) -> f64 {
    a.columns()
        .iter()
        .zip(b.columns())
        .map(|(ca, cb)| match (ca, cb) {
            (Column::Categorical { codes: x, .. }, Column::Categorical { codes: z, .. }) => {
                f64::from(u8::from(x[ra] != z[rb]))
            }
            (Column::Continuous(x), Column::Continuous(z)) => (x[ra] - z[rb]).powi(2),
            _ => f64::INFINITY,
        })
        .sum()
}

/// k-nearest-neighbor labels for every row of `query`, using all columns of
/// `train` (which must match `query` column-for-column). Distance ties go to
/// the smaller train row, vote ties to the smaller class.
pub fn knn_predict(train: &Dataset, query: &Dataset, k: usize) -> Result<Vec<u32>> {
    if k == 0 || k > train.n_samples() {
        return Err(Error::InvalidArgument(format!(
            "k must be in [1, {}] (training rows), got {k}",
            train.n_samples()
        )));
    }
    if train.n_features() != query.n_features()
        || train.columns().iter().zip(query.columns()).any(|(a, b)| a.kind() != b.kind())
    {
        return Err(Error::InvalidArgument("train and query columns do not match".into()));
    }
    let l = train.n_classes().max(query.n_classes());
    Ok((0..query.n_samples())
        .into_par_iter()
        .map(|q| {
            let mut d: Vec<(f64, usize)> =
                (0..train.n_samples()).map(|r| (distance(train, r, query, q), r)).collect();
            d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut votes = vec![0usize; l];
            for &(_, r) in &d[..k] {
                votes[train.labels()[r] as usize] += 1;
            }
            let mut best = 0;
            for (c, &v) in votes.iter().enumerate() {
                if v > votes[best] {
                    best = c;
                }
            }
            best as u32
        })
        .collect())
}

/// Fold count used for `n` samples: 10-fold, or leave-one-out for small sets.
pub fn n_folds_for(n: usize) -> usize {
    if n >= KFOLD_MIN_SAMPLES {
        KFOLD
    } else {
        n
    }
}

/// Stratified fold index per sample. Each class is shuffled with the seed and
/// dealt round-robin, continuing the deal across classes.
pub fn stratified_folds(labels: &[u32], n_classes: usize, n_folds: usize, seed: u64) -> Result<Vec<usize>> {
    if n_folds < 2 || n_folds > labels.len() {
        return Err(Error::InvalidArgument(format!(
            "fold count must be in [2, {}], got {n_folds}",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&k| labels[k] as usize == c).collect();
        members.shuffle(&mut rng);
        for k in members {
            folds[k] = next % n_folds;
            next += 1;
        }
    }
    Ok(folds)
}

/// Training and held-out copies of `ds` for fold `f`.
pub fn fold_split(ds: &Dataset, folds: &[usize], f: usize) -> Result<(Dataset, Dataset)> {
    let (test, train): (Vec<usize>, Vec<usize>) = (0..ds.n_samples()).partition(|&k| folds[k] == f);
    let train_ds = ds.subset_rows(&train)?;
    let mut present = vec![false; ds.n_classes()];
    train_ds.labels().iter().for_each(|&y| present[y as usize] = true);
    for &y in ds.labels() {
        if !present[y as usize] {
            return Err(Error::ClassAbsentFromFold { class: y as usize, fold: f });
        }
    }
    Ok((train_ds, ds.subset_rows(&test)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub m: usize,
    pub mean_error: f64,
    /// Sample standard deviation of the fold errors.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCurve {
    pub method: String,
    pub points: Vec<CurvePoint>,
    /// Mean of `mean_error` over all feature counts.
    pub average_error: f64,
    /// `fold_errors[m_index][fold]`.
    pub fold_errors: Vec<Vec<f64>>,
    /// Ranking produced on each training fold.
    pub fold_rankings: Vec<Vec<usize>>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn check_counts(counts: &[usize], d: usize) -> Result<()> {
    if counts.is_empty() {
        return Err(Error::InvalidArgument("feature-count list is empty".into()));
    }
    if counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("feature counts must be strictly increasing".into()));
    }
    if counts[0] == 0 || counts[counts.len() - 1] > d {
        return Err(Error::InvalidArgument(format!("feature counts must lie in [1, {d}]")));
    }
    Ok(())
}

/// 10, 20, ..., 100 up to `d`; or every count 1..=d when `d < 10`.
pub fn default_feature_counts(d: usize) -> Vec<usize> {
    let grid: Vec<usize> = (10..=100).step_by(10).filter(|&m| m <= d).collect();
    if grid.is_empty() {
        (1..=d).collect()
    } else {
        grid
    }
}

/// Error curve of one ranker. Ranking and classification on each fold see
/// only that fold's training rows.
pub fn cross_validate_with_folds(
    ds: &Dataset,
    ranker: &dyn FeatureRanker,
    feature_counts: &[usize],
    folds: &[usize],
    k: usize,
) -> Result<MethodCurve> {
    check_counts(feature_counts, ds.n_features())?;
    let n_folds = folds.iter().max().map_or(0, |m| m + 1);
    let max_m = feature_counts[feature_counts.len() - 1];
    let per_fold = (0..n_folds)
        .into_par_iter()
        .map(|f| {
            let (train, test) = fold_split(ds, folds, f)?;
            let ranking = ranker.rank(&train, max_m, f)?;
            let errors = feature_counts
                .iter()
                .map(|&m| {
                    let cols = &ranking[..m.min(ranking.len())];
                    let predicted = knn_predict(&train.select_features(cols)?, &test.select_features(cols)?, k)?;
                    let wrong = predicted.iter().zip(test.labels()).filter(|(p, y)| p != y).count();
                    Ok(wrong as f64 / test.n_samples() as f64)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((ranking, errors))
        })
        .collect::<Result<Vec<_>>>()?;
    let fold_errors: Vec<Vec<f64>> =
        (0..feature_counts.len()).map(|mi| per_fold.iter().map(|(_, e)| e[mi]).collect()).collect();
    let points: Vec<CurvePoint> = feature_counts
        .iter()
        .zip(&fold_errors)
        .map(|(&m, errs)| CurvePoint { m, mean_error: mean(errs), std: sample_std(errs) })
        .collect();
    Ok(MethodCurve {
        method: ranker.name(),
        average_error: mean(&points.iter().map(|p| p.mean_error).collect::<Vec<_>>()),
        points,
        fold_errors,
        fold_rankings: per_fold.into_iter().map(|(r, _)| r).collect(),
    })
}

/// [`cross_validate_with_folds`] on seeded stratified folds.
pub fn cross_validate(
    ds: &Dataset,
    ranker: &dyn FeatureRanker,
    feature_counts: &[usize],
    seed: u64,
    k: usize,
) -> Result<MethodCurve> {
    let folds = stratified_folds(ds.labels(), ds.n_classes(), n_folds_for(ds.n_samples()), seed)?;
    cross_validate_with_folds(ds, ranker, feature_counts, &folds, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Significant,
    NotSignificant,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub statistic: f64,
    pub p_value: f64,
    pub verdict: Verdict,
}

/// Two-sided paired t-test of `a - b` at the 5% level.
///
/// Zero-variance differences: a zero mean is a tie (`t = 0`, `p = 1`); a
/// nonzero mean gives `t = +-f64::MAX` and `p = 0`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "paired t-test needs two samples of equal length >= 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (m, s) = (mean(&d), sample_std(&d));
    if s == 0.0 {
        return Ok(if m == 0.0 {
            TTest { statistic: 0.0, p_value: 1.0, verdict: Verdict::Tie }
        } else {
            TTest { statistic: f64::MAX.copysign(m), p_value: 0.0, verdict: Verdict::Significant }
        });
    }
    let n = d.len() as f64;
    let t = m / (s / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    let verdict = if p < SIGNIFICANCE_LEVEL { Verdict::Significant } else { Verdict::NotSignificant };
    Ok(TTest { statistic: t, p_value: p, verdict })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    /// `per-feature-count` or `per-fold`.
    pub paired_on: String,
    #[serde(flatten)]
    pub test: TTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub seed: u64,
    pub k: usize,
    pub n_folds: usize,
    pub feature_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    /// Fold index of every sample.
    pub folds: Vec<usize>,
    pub methods: Vec<MethodCurve>,
    pub t_tests: Vec<PairComparison>,
}

/// Pairs per-feature-count mean errors; with a single feature count, pairs
/// the per-fold errors instead.
pub fn compare(a: &MethodCurve, b: &MethodCurve) -> Result<PairComparison> {
    let (paired_on, test) = if a.points.len() >= 2 {
        let ea: Vec<f64> = a.points.iter().map(|p| p.mean_error).collect();
        let eb: Vec<f64> = b.points.iter().map(|p| p.mean_error).collect();
        ("per-feature-count", paired_t_test(&ea, &eb)?)
    } else {
        ("per-fold", paired_t_test(&a.fold_errors[0], &b.fold_errors[0])?)
    };
    Ok(PairComparison { a: a.method.clone(), b: b.method.clone(), paired_on: paired_on.into(), test })
}

/// Cross-validates every method on shared folds and t-tests every pair.
pub fn run_bench(
    ds: &Dataset,
    methods: &[&dyn FeatureRanker],
    feature_counts: &[usize],
    seed: u64,
    k: usize,
) -> Result<BenchReport> {
    check_counts(feature_counts, ds.n_features())?;
    let n_folds = n_folds_for(ds.n_samples());
    let folds = stratified_folds(ds.labels(), ds.n_classes(), n_folds, seed)?;
    let curves = methods
        .iter()
        .map(|m| cross_validate_with_folds(ds, *m, feature_counts, &folds, k))
        .collect::<Result<Vec<_>>>()?;
    let mut t_tests = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            t_tests.push(compare(&curves[i], &curves[j])?);
        }
    }
    Ok(BenchReport {
        config: BenchConfig { seed, k, n_folds, feature_counts: feature_counts.to_vec() },
        folds,
        methods: curves,
        t_tests,
    })
}

impl BenchReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// One row per method and feature count: `method,m,mean_error,std`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            method: &'a str,
            m: usize,
            mean_error: f64,
            std: f64,
        }
        let mut w = csv::Writer::from_writer(writer);
        for curve in &self.methods {
            for p in &curve.points {
                w.serialize(Row { method: &curve.method, m: p.m, mean_error: p.mean_error, std: p.std })
                    .map_err(|e| Error::Serialize(e.to_string()))?;
            }
        }
        w.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// Outcome of the canary leakage check for one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageFold {
    pub fold: usize,
    pub baseline_ranking: Vec<usize>,
    pub canary_ranking: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub passed: bool,
    pub folds: Vec<LeakageFold>,
}

/// Appends a canary column that equals the label on fold `f`'s held-out rows
/// and a sentinel elsewhere, and checks that the ranking computed through
/// [`fold_split`] is identical to the one obtained with an all-sentinel
/// canary. Any difference means held-out rows reached the ranker.
pub fn leakage_self_check(ds: &Dataset, ranker: &dyn FeatureRanker, m: usize, seed: u64) -> Result<LeakageReport> {
    let n_folds = n_folds_for(ds.n_samples());
    let folds = stratified_folds(ds.labels(), ds.n_classes(), n_folds, seed)?;
    let l = ds.n_classes();
    let sentinel = l as u32;
    let m = m.min(ds.n_features() + 1);
    let flat = ds.with_column(Column::categorical(vec![sentinel; ds.n_samples()], l + 1), "canary")?;
    let results = (0..n_folds)
        .into_par_iter()
        .map(|f| {
            let canary: Vec<u32> =
                (0..ds.n_samples()).map(|k| if folds[k] == f { ds.labels()[k] } else { sentinel }).collect();
            let leaky = ds.with_column(Column::categorical(canary, l + 1), "canary")?;
            let baseline_ranking = ranker.rank(&fold_split(&flat, &folds, f)?.0, m, f)?;
            let canary_ranking = ranker.rank(&fold_split(&leaky, &folds, f)?.0, m, f)?;
            Ok(LeakageFold { fold: f, baseline_ranking, canary_ranking })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LeakageReport {
        passed: results.iter().all(|r| r.baseline_ranking == r.canary_ranking),
        folds: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn cat(cols: Vec<Vec<u32>>, y: Vec<u32>) -> Dataset {
        let cols = cols
            .into_iter()
            .map(|c| {
                let card = *c.iter().max().unwrap() as usize + 1;
                (c, card)
            })
            .collect();
        Dataset::from_codes(cols, y, 2).unwrap()
    }

    #[test]
    fn knn_basics() {
        let train = cat(vec![vec![0, 1, 1, 0], vec![0, 0, 1, 1]], vec![0, 1, 1, 0]);
        let query = train.subset_rows(&[1]).unwrap();
        assert_eq!(knn_predict(&train, &query, 1).unwrap(), vec![1]);
        // Nearest three to (0, 0): row 0 (d=0, y=0), rows 1 and 3 (d=1, y=1 and 0).
        let q = train.subset_rows(&[0]).unwrap();
        assert_eq!(knn_predict(&train, &q, 3).unwrap(), vec![0]);
        assert!(knn_predict(&train, &q, 5).is_err());
        assert!(knn_predict(&train, &q, 0).is_err());
    }

    #[test]
    fn knn_ties_prefer_smaller_row_and_class() {
        let train = cat(vec![vec![0, 0, 0, 1]], vec![1, 0, 0, 1]);
        let q = train.subset_rows(&[0]).unwrap();
        assert_eq!(knn_predict(&train, &q, 1).unwrap(), vec![1]);
        let train = cat(vec![vec![0, 0]], vec![1, 0]);
        let q = train.subset_rows(&[0]).unwrap();
        assert_eq!(knn_predict(&train, &q, 2).unwrap(), vec![0]);
    }

    #[test]
    fn separated_clusters_have_zero_loo_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 40;
        let y: Vec<u32> = (0..n).map(|k| (k % 2) as u32).collect();
        let x: Vec<f64> = y.iter().map(|&c| c as f64 * 10.0 + rng.random_range(0.0..1.0)).collect();
        let ds = Dataset::new(vec![Column::Continuous(x)], y, 2, vec!["x".into()]).unwrap();
        let fixed = Method::Fixed { name: "x".into(), ranking: vec![0] };
        let curve = cross_validate(&ds, &fixed, &[1], 0, 3).unwrap();
        assert_eq!(curve.fold_errors[0].len(), 40);
        assert_eq!(curve.points[0].mean_error, 0.0);
    }

    #[test]
    fn folds_are_stratified_and_seeded() {
        let labels: Vec<u32> = (0..237).map(|k| u32::from(k % 3 == 0)).collect();
        let f = stratified_folds(&labels, 2, 10, 4).unwrap();
        assert_eq!(f, stratified_folds(&labels, 2, 10, 4).unwrap());
        assert_ne!(f, stratified_folds(&labels, 2, 10, 5).unwrap());
        for c in 0..2u32 {
            let total = labels.iter().filter(|&&y| y == c).count() as f64;
            for fold in 0..10 {
                let n = (0..labels.len()).filter(|&k| f[k] == fold && labels[k] == c).count() as f64;
                assert!((n - total / 10.0).abs() <= 1.0);
            }
        }
        assert_eq!(n_folds_for(50), 50);
        assert_eq!(n_folds_for(100), 10);
    }

    #[test]
    fn missing_class_in_training_fold_errors() {
        let ds = cat(vec![vec![0, 1, 0, 1, 0]], vec![0, 0, 0, 0, 1]);
        let err = cross_validate(&ds, &Method::Baseline(BaselineKind::Mim), &[1], 0, 1).unwrap_err();
        assert!(matches!(err, Error::ClassAbsentFromFold { class: 1, .. }));
    }

    #[test]
    fn perfect_feature_gives_zero_error() {
        let y: Vec<u32> = (0..120).map(|k| (k % 2) as u32).collect();
        let noise: Vec<u32> = (0..120).map(|k| ((k / 2) % 3) as u32).collect();
        let ds = cat(vec![noise, y.clone()], y);
        let fixed = Method::Fixed { name: "oracle".into(), ranking: vec![1, 0] };
        let curve = cross_validate(&ds, &fixed, &[1, 2], 3, 3).unwrap();
        assert_eq!(curve.points[0].mean_error, 0.0);
        assert_eq!(curve.fold_errors[0].len(), 10);
    }

    #[test]
    fn t_test_edge_cases() {
        let a = [0.1, 0.2, 0.3];
        let t = paired_t_test(&a, &a).unwrap();
        assert_eq!((t.statistic, t.p_value, t.verdict), (0.0, 1.0, Verdict::Tie));
        let b: Vec<f64> = (0..10).map(|k| k as f64 * 0.25).collect();
        let a: Vec<f64> = b.iter().map(|v| v + 0.1).collect();
        let t = paired_t_test(&a, &b).unwrap();
        assert!(t.p_value < 0.001);
        assert_eq!(t.verdict, Verdict::Significant);
        assert!(paired_t_test(&[1.0], &[2.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[2.0]).is_err());
    }

    #[test]
    fn t_test_matches_known_quantile() {
        // t = 2.262157 is the two-sided 5% critical value at 9 degrees of freedom.
        let d = 2.262157_f64 / 10f64.sqrt();
        let a: Vec<f64> = (0..10).map(|k| if k % 2 == 0 { d + 1.0 } else { d - 1.0 }).collect();
        let scale = (10.0f64 / 9.0).sqrt();
        let a: Vec<f64> = a.iter().map(|v| (v - d) / scale + d).collect();
        let t = paired_t_test(&a, &[0.0; 10]).unwrap();
        assert!((t.statistic - 2.262157).abs() < 1e-6);
        assert!((t.p_value - 0.05).abs() < 1e-6);
    }

    #[test]
    fn t_test_is_calibrated() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut hits = 0;
        for _ in 0..1000 {
            let a: Vec<f64> = (0..10).map(|_| rng.sample(StandardNormal)).collect();
            let b: Vec<f64> = (0..10).map(|_| rng.sample(StandardNormal)).collect();
            if paired_t_test(&a, &b).unwrap().verdict == Verdict::Significant {
                hits += 1;
            }
        }
        let rate = hits as f64 / 1000.0;
        assert!((rate - 0.05).abs() <= 0.02, "rate {rate}");
    }

    #[test]
    fn method_names_round_trip() {
        for name in Method::NAMES {
            assert_eq!(Method::parse(name, 0.1, 0).unwrap().to_string(), name);
        }
        assert!("svm".parse::<Method>().is_err());
    }

    #[test]
    fn report_serializes() {
        let y: Vec<u32> = (0..100).map(|k| (k % 2) as u32).collect();
        let x: Vec<u32> = (0..100).map(|k| ((k * 7) % 3) as u32).collect();
        let ds = cat(vec![y.clone(), x], y);
        let mim = Method::Baseline(BaselineKind::Mim);
        let rnd = Method::Random { seed: 1 };
        let report = run_bench(&ds, &[&mim, &rnd], &[1, 2], 0, 3).unwrap();
        assert_eq!(report.methods.len(), 2);
        assert_eq!(report.t_tests.len(), 1);
        let json = report.to_json().unwrap();
        assert!(json.find("\"config\"").unwrap() < json.find("\"methods\"").unwrap());
        let mut out = Vec::new();
        report.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), "method,m,mean_error,std");
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn canary_check_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let y: Vec<u32> = (0..120).map(|_| rng.random_range(0..2)).collect();
        let x: Vec<u32> = y.iter().map(|&c| if rng.random_bool(0.7) { c } else { 1 - c }).collect();
        let z: Vec<u32> = (0..120).map(|_| rng.random_range(0..3)).collect();
        let ds = cat(vec![x, z], y);
        let vmi = Method::parse("vmi-naive", 0.1, 0).unwrap();
        let report = leakage_self_check(&ds, &vmi, 3, 0).unwrap();
        assert!(report.passed);
        assert_eq!(report.folds.len(), 10);
    }

    #[test]
    fn canary_would_win_if_held_out_rows_leaked() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let y: Vec<u32> = (0..120).map(|_| rng.random_range(0..2)).collect();
        let x: Vec<u32> = y.iter().map(|&c| if rng.random_bool(0.6) { c } else { 1 - c }).collect();
        let ds = cat(vec![x], y);
        let folds = stratified_folds(ds.labels(), 2, 10, 0).unwrap();
        let canary: Vec<u32> = (0..120).map(|k| if folds[k] == 0 { ds.labels()[k] } else { 2 }).collect();
        let leaky = ds.with_column(Column::categorical(canary, 3), "canary").unwrap();
        let mim = Method::Baseline(BaselineKind::Mim);
        assert_eq!(mim.rank(&leaky, 2, 0).unwrap()[0], 1);
        assert_eq!(mim.rank(&fold_split(&leaky, &folds, 0).unwrap().0, 2, 0).unwrap()[0], 0);
    }
}
