//! Per-class Gaussian kernel density estimates with Silverman bandwidths.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Densities are clamped to at least this value before any logarithm.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Bandwidth floor as a fraction of the column range.
const BANDWIDTH_RANGE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
struct Kernel1d {
    points: Vec<f64>,
    weights: Vec<f64>,
    bandwidth: f64,
}

impl Kernel1d {
    fn density(&self, x: f64) -> f64 {
        let inv_h = 1.0 / self.bandwidth;
        let sum: f64 = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| {
                let z = (x - p) * inv_h;
                w * (-0.5 * z * z).exp()
            })
            .sum();
        sum * inv_h / (2.0 * PI).sqrt()
    }
}

#[derive(Debug, Clone)]
struct Kernel2d {
    xs: Vec<f64>,
    ys: Vec<f64>,
    weights: Vec<f64>,
    hx: f64,
    hy: f64,
}

impl Kernel2d {
    fn joint(&self, x: f64, y: f64) -> f64 {
        let (ix, iy) = (1.0 / self.hx, 1.0 / self.hy);
        let mut sum = 0.0;
        for k in 0..self.xs.len() {
            let zx = (x - self.xs[k]) * ix;
            let zy = (y - self.ys[k]) * iy;
            sum += self.weights[k] * (-0.5 * (zx * zx + zy * zy)).exp();
        }
        sum * ix * iy / (2.0 * PI)
    }

    /// Marginal over the conditioning coordinate; this is the exact marginal
    /// of the product kernel.
    fn marginal_y(&self, y: f64) -> f64 {
        let iy = 1.0 / self.hy;
        let sum: f64 = self
            .ys
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| {
                let z = (y - p) * iy;
                w * (-0.5 * z * z).exp()
            })
            .sum();
        sum * iy / (2.0 * PI).sqrt()
    }
}

/// One-dimensional density of a feature, one kernel estimate per class.
#[derive(Debug, Clone)]
pub struct Kde1d {
    feature: usize,
    classes: Vec<Kernel1d>,
}

/// Density of `x_i` given `x_j` per class, from a 2D product kernel.
#[derive(Debug, Clone)]
pub struct Kde2d {
    feature: usize,
    given: usize,
    classes: Vec<Kernel2d>,
}

#[derive(Debug, Clone)]
pub enum KdeModel {
    Univariate(Kde1d),
    Pairwise(Kde2d),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KdeTarget {
    Feature(usize),
    /// `(i, j)`: density of `x_i` conditioned on `x_j`.
    Pair(usize, usize),
}

fn continuous(ds: &Dataset, i: usize) -> Result<&[f64]> {
    ds.check_feature(i)?;
    ds.column(i).values().ok_or_else(|| {
        Error::InvalidArgument(format!("feature {} is categorical; KDE needs a continuous column", ds.feature_name(i)))
    })
}

/// Samples of each class with positive weight: (indices, normalized weights).
fn class_members(ds: &Dataset) -> Result<Vec<(Vec<usize>, Vec<f64>)>> {
    let mut members = vec![(Vec::new(), Vec::new()); ds.n_classes()];
    for (k, (&y, &w)) in ds.labels().iter().zip(ds.weights()).enumerate() {
        if w > 0.0 {
            members[y as usize].0.push(k);
            members[y as usize].1.push(w);
        }
    }
    for (c, (idx, w)) in members.iter_mut().enumerate() {
        if idx.len() < 2 {
            return Err(Error::TooFewClassSamples { class: c, count: idx.len() });
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
    }
    Ok(members)
}

/// `1.06 * sigma * m^(-1/5)`, floored at a small fraction of the column range.
fn silverman(values: &[f64], idx: &[usize], weights: &[f64], range: f64) -> f64 {
    let mean: f64 = idx.iter().zip(weights).map(|(&k, &w)| w * values[k]).sum();
    let var: f64 = idx.iter().zip(weights).map(|(&k, &w)| w * (values[k] - mean).powi(2)).sum();
    let h = 1.06 * var.sqrt() * (idx.len() as f64).powf(-0.2);
    let floor = if range > 0.0 { BANDWIDTH_RANGE_FLOOR * range } else { BANDWIDTH_RANGE_FLOOR };
    h.max(floor)
}

fn range(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

impl Kde1d {
    pub fn fit(ds: &Dataset, i: usize) -> Result<Self> {
        let values = continuous(ds, i)?;
        let r = range(values);
        let classes = class_members(ds)?
            .into_iter()
            .map(|(idx, weights)| Kernel1d {
                bandwidth: silverman(values, &idx, &weights, r),
                points: idx.iter().map(|&k| values[k]).collect(),
                weights,
            })
            .collect();
        Ok(Kde1d { feature: i, classes })
    }

    pub fn feature(&self) -> usize {
        self.feature
    }

    pub fn bandwidth(&self, class: usize) -> f64 {
        self.classes[class].bandwidth
    }

    /// Floored density of `x` under class `class`.
    pub fn density(&self, x: f64, class: usize) -> f64 {
        self.classes[class].density(x).max(DENSITY_FLOOR)
    }

    /// `ln q(x_k | c)` for every value, row-major `[k * L + c]`.
    pub fn log_density_matrix(&self, values: &[f64]) -> Vec<f64> {
        let l = self.classes.len();
        let mut out = vec![0.0; values.len() * l];
        out.par_chunks_mut(l).zip(values.par_iter()).for_each(|(row, &x)| {
            for (c, slot) in row.iter_mut().enumerate() {
                *slot = self.density(x, c).ln();
            }
        });
        out
    }
}

impl Kde2d {
    pub fn fit(ds: &Dataset, i: usize, j: usize) -> Result<Self> {
        let xi = continuous(ds, i)?;
        let xj = continuous(ds, j)?;
        let (ri, rj) = (range(xi), range(xj));
        let classes = class_members(ds)?
            .into_iter()
            .map(|(idx, weights)| Kernel2d {
                hx: silverman(xi, &idx, &weights, ri),
                hy: silverman(xj, &idx, &weights, rj),
                xs: idx.iter().map(|&k| xi[k]).collect(),
                ys: idx.iter().map(|&k| xj[k]).collect(),
                weights,
            })
            .collect();
        Ok(Kde2d { feature: i, given: j, classes })
    }

    pub fn features(&self) -> (usize, usize) {
        (self.feature, self.given)
    }

    pub fn bandwidths(&self, class: usize) -> (f64, f64) {
        (self.classes[class].hx, self.classes[class].hy)
    }

    pub fn joint_density(&self, x: f64, given: f64, class: usize) -> f64 {
        self.classes[class].joint(x, given).max(DENSITY_FLOOR)
    }

    /// `q(x_i | x_j, c)` as floored joint over floored marginal.
    pub fn cond_density(&self, x: f64, given: f64, class: usize) -> f64 {
        let k = &self.classes[class];
        k.joint(x, given).max(DENSITY_FLOOR) / k.marginal_y(given).max(DENSITY_FLOOR)
    }

    /// `ln q(x_i^k | x_j^k, c)`, row-major `[k * L + c]`.
    pub fn log_cond_matrix(&self, xi: &[f64], xj: &[f64]) -> Vec<f64> {
        let l = self.classes.len();
        let mut out = vec![0.0; xi.len() * l];
        out.par_chunks_mut(l).enumerate().for_each(|(k, row)| {
            for (c, slot) in row.iter_mut().enumerate() {
                *slot = self.cond_density(xi[k], xj[k], c).ln();
            }
        });
        out
    }
}

pub fn fit_kde(ds: &Dataset, target: KdeTarget) -> Result<KdeModel> {
    match target {
        KdeTarget::Feature(i) => Kde1d::fit(ds, i).map(KdeModel::Univariate),
        KdeTarget::Pair(i, j) => Kde2d::fit(ds, i, j).map(KdeModel::Pairwise),
    }
}

/// Evaluates a fitted model: one value for a univariate model, `[x_i, x_j]`
/// for a pairwise one (the conditional density of `x_i` given `x_j`).
pub fn kde_cond_density(model: &KdeModel, values: &[f64], class: usize) -> Result<f64> {
    let n_classes = match model {
        KdeModel::Univariate(m) => m.classes.len(),
        KdeModel::Pairwise(m) => m.classes.len(),
    };
    if class >= n_classes {
        return Err(Error::InvalidArgument(format!("class {class} out of range")));
    }
    match (model, values) {
        (KdeModel::Univariate(m), [x]) => Ok(m.density(*x, class)),
        (KdeModel::Pairwise(m), [x, given]) => Ok(m.cond_density(*x, *given, class)),
        _ => Err(Error::InvalidArgument("value count does not match the model dimension".into())),
    }
}
