//! Tree-structured generative models with the class label at the root.
//!
//! Node `i` may only name a parent with a smaller index (or the label), which
//! keeps the node list in topological order for ancestral sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Column, Dataset};
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

const PMF_TOLERANCE: f64 = 1e-9;

/// A categorical node. `cpt[u][v] = p(node = v | parent = u)`; when `parent`
/// is `None` the parent is the label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteNode {
    pub name: String,
    pub parent: Option<usize>,
    pub cardinality: usize,
    pub cpt: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteTreeSpec {
    pub label_prior: Vec<f64>,
    pub nodes: Vec<DiscreteNode>,
}

/// `node ~ Normal(mean_scale * parent_value, sigma)`, where the label's value
/// is its class code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNode {
    pub name: String,
    pub parent: Option<usize>,
    pub mean_scale: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianTreeSpec {
    pub label_prior: Vec<f64>,
    pub nodes: Vec<GaussianNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeModelSpec {
    Discrete(DiscreteTreeSpec),
    Gaussian(GaussianTreeSpec),
}

fn check_pmf(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() || p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument(format!("{what}: invalid probabilities {p:?}")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > PMF_TOLERANCE {
        return Err(Error::InvalidArgument(format!("{what}: sums to {s}, not 1")));
    }
    Ok(())
}

fn check_parent(i: usize, parent: Option<usize>) -> Result<()> {
    match parent {
        Some(p) if p >= i => Err(Error::InvalidArgument(format!(
            "node {i} names parent {p}; parents must precede their children"
        ))),
        _ => Ok(()),
    }
}

fn layers(parents: impl Iterator<Item = Option<usize>>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for p in parents {
        let layer = match p {
            None => 1,
            Some(p) => out[p] + 1,
        };
        out.push(layer);
    }
    out
}

fn sample_index<R: Rng>(rng: &mut R, pmf: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left `u` above the last cumulative value.
    pmf.iter().rposition(|&p| p > 0.0).unwrap_or(pmf.len() - 1)
}

impl DiscreteTreeSpec {
    pub fn validate(&self) -> Result<()> {
        check_pmf(&self.label_prior, "label prior")?;
        for (i, node) in self.nodes.iter().enumerate() {
            check_parent(i, node.parent)?;
            let parent_card = match node.parent {
                None => self.label_prior.len(),
                Some(p) => self.nodes[p].cardinality,
            };
            if node.cardinality == 0 {
                return Err(Error::InvalidArgument(format!("node {i} has cardinality 0")));
            }
            if node.cpt.len() != parent_card {
                return Err(Error::InvalidArgument(format!(
                    "node {i}: {} cpt rows for parent cardinality {parent_card}",
                    node.cpt.len()
                )));
            }
            for (u, row) in node.cpt.iter().enumerate() {
                if row.len() != node.cardinality {
                    return Err(Error::InvalidArgument(format!(
                        "node {i}, row {u}: {} entries for cardinality {}",
                        row.len(),
                        node.cardinality
                    )));
                }
                check_pmf(row, &format!("node {i}, row {u}"))?;
            }
        }
        Ok(())
    }

    /// Depth of each node; the label's children are layer 1.
    pub fn layers(&self) -> Vec<usize> {
        layers(self.nodes.iter().map(|n| n.parent))
    }

    pub fn n_classes(&self) -> usize {
        self.label_prior.len()
    }

    fn parent_value(&self, node: &DiscreteNode, label: usize, values: &[u32]) -> usize {
        match node.parent {
            None => label,
            Some(p) => values[p] as usize,
        }
    }
}

impl GaussianTreeSpec {
    /// Nine-feature reference tree: x1..x3 hang off the label with means
    /// y, y/1.5 and y/2.25; x4,x5 | x1, x6,x7 | x2 and x8,x9 | x3 have mean
    /// equal to their parent. Every sigma is 1 and y ~ Bernoulli(0.5).
    pub fn reference() -> Self {
        let node = |name: &str, parent: Option<usize>, mean_scale: f64| GaussianNode {
            name: name.to_string(),
            parent,
            mean_scale,
            sigma: 1.0,
        };
        GaussianTreeSpec {
            label_prior: vec![0.5, 0.5],
            nodes: vec![
                node("x1", None, 1.0),
                node("x2", None, 1.0 / 1.5),
                node("x3", None, 1.0 / 2.25),
                node("x4", Some(0), 1.0),
                node("x5", Some(0), 1.0),
                node("x6", Some(1), 1.0),
                node("x7", Some(1), 1.0),
                node("x8", Some(2), 1.0),
                node("x9", Some(2), 1.0),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_pmf(&self.label_prior, "label prior")?;
        for (i, node) in self.nodes.iter().enumerate() {
            check_parent(i, node.parent)?;
            if !(node.sigma.is_finite() && node.sigma > 0.0) || !node.mean_scale.is_finite() {
                return Err(Error::InvalidArgument(format!("node {i}: invalid mean scale or sigma")));
            }
        }
        Ok(())
    }

    pub fn layers(&self) -> Vec<usize> {
        layers(self.nodes.iter().map(|n| n.parent))
    }
}

impl TreeModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            TreeModelSpec::Discrete(s) => s.validate(),
            TreeModelSpec::Gaussian(s) => s.validate(),
        }
    }

    pub fn layers(&self) -> Vec<usize> {
        match self {
            TreeModelSpec::Discrete(s) => s.layers(),
            TreeModelSpec::Gaussian(s) => s.layers(),
        }
    }
}

/// Samples from the nine-feature Gaussian reference tree.
pub fn gen_tree_synthetic(n: usize, seed: u64) -> Result<Dataset> {
    gen_from_spec(&TreeModelSpec::Gaussian(GaussianTreeSpec::reference()), n, seed)
}

/// Ancestral sampling, root to leaves, one sample at a time.
pub fn gen_from_spec(spec: &TreeModelSpec, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec {
        TreeModelSpec::Discrete(s) => {
            let d = s.nodes.len();
            let mut cols = vec![Vec::with_capacity(n); d];
            let mut labels = Vec::with_capacity(n);
            let mut values = vec![0u32; d];
            for _ in 0..n {
                let y = sample_index(&mut rng, &s.label_prior);
                for (i, node) in s.nodes.iter().enumerate() {
                    let u = s.parent_value(node, y, &values);
                    values[i] = sample_index(&mut rng, &node.cpt[u]) as u32;
                    cols[i].push(values[i]);
                }
                labels.push(y as u32);
            }
            let columns = cols
                .into_iter()
                .zip(&s.nodes)
                .map(|(codes, node)| Column::Categorical { codes, cardinality: node.cardinality })
                .collect();
            let names = s.nodes.iter().map(|n| n.name.clone()).collect();
            Dataset::new(columns, labels, s.n_classes(), names)
        }
        TreeModelSpec::Gaussian(s) => {
            let d = s.nodes.len();
            let mut cols = vec![Vec::with_capacity(n); d];
            let mut labels = Vec::with_capacity(n);
            let mut values = vec![0.0f64; d];
            let noise: Vec<Normal<f64>> = s
                .nodes
                .iter()
                .map(|node| Normal::new(0.0, node.sigma).expect("validated sigma"))
                .collect();
            for _ in 0..n {
                let y = sample_index(&mut rng, &s.label_prior);
                for (i, node) in s.nodes.iter().enumerate() {
                    let parent = match node.parent {
                        None => y as f64,
                        Some(p) => values[p],
                    };
                    values[i] = node.mean_scale * parent + noise[i].sample(&mut rng);
                    cols[i].push(values[i]);
                }
                labels.push(y as u32);
            }
            let columns = cols.into_iter().map(Column::Continuous).collect();
            let names = s.nodes.iter().map(|n| n.name.clone()).collect();
            Dataset::new(columns, labels, s.label_prior.len(), names)
        }
    }
}

pub fn enumerate_joint(spec: &DiscreteTreeSpec) -> Result<Dataset> {
    enumerate_joint_with_cap(spec, DEFAULT_ENUMERATION_CAP)
}

/// One row per joint configuration (label outermost, then nodes in order,
/// last node fastest), weighted by its exact probability.
pub fn enumerate_joint_with_cap(spec: &DiscreteTreeSpec, cap: usize) -> Result<Dataset> {
    spec.validate()?;
    let l = spec.n_classes();
    let total = spec
        .nodes
        .iter()
        .fold(l as u128, |acc, n| acc.saturating_mul(n.cardinality as u128));
    if total > cap as u128 {
        return Err(Error::CapExceeded { count: total, cap });
    }
    let total = total as usize;
    let d = spec.nodes.len();
    let mut cols = vec![Vec::with_capacity(total); d];
    let mut labels = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut values = vec![0u32; d];
    for y in 0..l {
        values.iter_mut().for_each(|v| *v = 0);
        'configs: loop {
            let mut w = spec.label_prior[y];
            for (i, node) in spec.nodes.iter().enumerate() {
                w *= node.cpt[spec.parent_value(node, y, &values)][values[i] as usize];
            }
            for i in 0..d {
                cols[i].push(values[i]);
            }
            labels.push(y as u32);
            weights.push(w);
            // Odometer increment, last node fastest.
            let mut pos = d;
            loop {
                if pos == 0 {
                    break 'configs;
                }
                pos -= 1;
                values[pos] += 1;
                if (values[pos] as usize) < spec.nodes[pos].cardinality {
                    continue 'configs;
                }
                values[pos] = 0;
            }
        }
    }
    let columns = cols
        .into_iter()
        .zip(&spec.nodes)
        .map(|(codes, node)| Column::Categorical { codes, cardinality: node.cardinality })
        .collect();
    let names = spec.nodes.iter().map(|n| n.name.clone()).collect();
    Dataset::new(columns, labels, l, names)?.with_weights(weights)
}

fn random_pmf<R: Rng>(rng: &mut R, k: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| floor + rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Random Naive Bayes model: binary label, every feature a child of the label.
pub fn random_naive_bayes_spec<R: Rng>(
    rng: &mut R,
    n_features: usize,
    card_range: std::ops::RangeInclusive<usize>,
) -> DiscreteTreeSpec {
    let p = rng.random_range(0.2..0.8);
    let nodes = (0..n_features)
        .map(|i| {
            let cardinality = rng.random_range(card_range.clone());
            DiscreteNode {
                name: format!("x{}", i + 1),
                parent: None,
                cardinality,
                cpt: (0..2).map(|_| random_pmf(rng, cardinality, 0.05)).collect(),
            }
        })
        .collect();
    DiscreteTreeSpec { label_prior: vec![1.0 - p, p], nodes }
}

/// Random two-layer tree: `n_layer1` children of a binary label, each with
/// `children` descendants in layer 2. Every layer-2 edge has all
/// conditional probabilities at least `0.1 / cardinality`, so no child is a
/// deterministic copy of its parent.
pub fn random_two_layer_tree_spec<R: Rng>(
    rng: &mut R,
    n_layer1: usize,
    children: usize,
    card_range: std::ops::RangeInclusive<usize>,
) -> DiscreteTreeSpec {
    let p = rng.random_range(0.25..0.75);
    let mut nodes = Vec::new();
    for i in 0..n_layer1 {
        let cardinality = rng.random_range(card_range.clone());
        nodes.push(DiscreteNode {
            name: format!("x{}", i + 1),
            parent: None,
            cardinality,
            cpt: (0..2).map(|_| random_pmf(rng, cardinality, 0.02)).collect(),
        });
    }
    for parent in 0..n_layer1 {
        let parent_card = nodes[parent].cardinality;
        for _ in 0..children {
            let cardinality = rng.random_range(card_range.clone());
            let cpt = (0..parent_card)
                .map(|_| {
                    let base = random_pmf(rng, cardinality, 0.02);
                    base.iter().map(|b| 0.9 * b + 0.1 / cardinality as f64).collect()
                })
                .collect();
            nodes.push(DiscreteNode {
                name: format!("x{}", nodes.len() + 1),
                parent: Some(parent),
                cardinality,
                cpt,
            });
        }
    }
    DiscreteTreeSpec { label_prior: vec![1.0 - p, p], nodes }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deterministic_edge() -> DiscreteTreeSpec {
        DiscreteTreeSpec {
            label_prior: vec![0.5, 0.5],
            nodes: vec![DiscreteNode {
                name: "x".into(),
                parent: None,
                cardinality: 2,
                cpt: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            }],
        }
    }

    #[test]
    fn enumerate_deterministic_edge() {
        let ds = enumerate_joint(&deterministic_edge()).unwrap();
        assert_eq!(ds.n_samples(), 4);
        assert_eq!(ds.weights(), &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(ds.labels(), &[0, 0, 1, 1]);
        assert_eq!(ds.column(0).codes(), Some(&[0, 1, 0, 1][..]));
    }

    #[test]
    fn enumerate_naive_bayes_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spec = random_naive_bayes_spec(&mut rng, 3, 2..=2);
        let ds = enumerate_joint(&spec).unwrap();
        assert_eq!(ds.n_samples(), 16);
        assert!((ds.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enumerate_weights_are_edge_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = random_two_layer_tree_spec(&mut rng, 2, 1, 2..=3);
        let ds = enumerate_joint(&spec).unwrap();
        for k in 0..ds.n_samples() {
            let y = ds.labels()[k] as usize;
            let vals: Vec<u32> = (0..ds.n_features()).map(|i| ds.column(i).codes().unwrap()[k]).collect();
            let mut w = spec.label_prior[y];
            for (i, node) in spec.nodes.iter().enumerate() {
                let u = node.parent.map(|p| vals[p] as usize).unwrap_or(y);
                w *= node.cpt[u][vals[i] as usize];
            }
            assert_eq!(w, ds.weights()[k]);
        }
        assert!((ds.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = random_naive_bayes_spec(&mut rng, 4, 3..=3);
        assert!(matches!(
            enumerate_joint_with_cap(&spec, 100),
            Err(Error::CapExceeded { count: 162, cap: 100 })
        ));
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = deterministic_edge();
        spec.nodes[0].cpt[0] = vec![0.7, 0.7];
        assert!(spec.validate().is_err());
        let mut spec = deterministic_edge();
        spec.nodes[0].parent = Some(0);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn tree_synthetic_shape_and_seeds() {
        let ds = gen_tree_synthetic(5000, 1).unwrap();
        assert_eq!((ds.n_samples(), ds.n_features(), ds.n_classes()), (5000, 9, 2));
        assert_eq!(ds.feature_names()[8], "x9");
        let again = gen_tree_synthetic(5000, 1).unwrap();
        assert_eq!(ds, again);
        let other = gen_tree_synthetic(5000, 2).unwrap();
        let mean = |d: &Dataset, i: usize| d.column(i).values().unwrap().iter().sum::<f64>();
        for i in 0..9 {
            assert_ne!(mean(&ds, i), mean(&other, i));
        }
        let single = gen_tree_synthetic(1, 0).unwrap();
        assert_eq!(single.n_samples(), 1);
    }

    #[test]
    fn reference_tree_layers() {
        assert_eq!(GaussianTreeSpec::reference().layers(), vec![1, 1, 1, 2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn gen_from_spec_rejects_zero() {
        let spec = TreeModelSpec::Discrete(deterministic_edge());
        assert!(gen_from_spec(&spec, 0, 0).is_err());
    }

    #[test]
    fn degenerate_spec_gives_identical_rows() {
        let spec = DiscreteTreeSpec {
            label_prior: vec![0.0, 1.0],
            nodes: vec![DiscreteNode {
                name: "x".into(),
                parent: None,
                cardinality: 3,
                cpt: vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]],
            }],
        };
        let ds = gen_from_spec(&TreeModelSpec::Discrete(spec), 50, 9).unwrap();
        assert!(ds.labels().iter().all(|&y| y == 1));
        assert!(ds.column(0).codes().unwrap().iter().all(|&v| v == 2));
    }

    #[test]
    fn sampled_marginals_match_spec() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let spec = random_two_layer_tree_spec(&mut rng, 2, 1, 2..=3);
        let ds = gen_from_spec(&TreeModelSpec::Discrete(spec.clone()), 50_000, 4).unwrap();
        let exact = enumerate_joint(&spec).unwrap();
        for i in 0..spec.nodes.len() {
            let card = spec.nodes[i].cardinality;
            let mut emp = vec![0.0; card];
            let mut truth = vec![0.0; card];
            for (&v, w) in ds.column(i).codes().unwrap().iter().zip(ds.weights()) {
                emp[v as usize] += w / ds.total_weight();
            }
            for (&v, w) in exact.column(i).codes().unwrap().iter().zip(exact.weights()) {
                truth[v as usize] += w;
            }
            let tv: f64 = emp.iter().zip(&truth).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
            assert!(tv < 0.02, "node {i}: tv {tv}");
        }
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec = TreeModelSpec::Gaussian(GaussianTreeSpec::reference());
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"kind\":\"gaussian\""));
        let back: TreeModelSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }
}
