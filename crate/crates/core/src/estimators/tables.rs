use crate::data::Dataset;
use crate::error::{Error, Result};

/// Weighted class totals, accumulated in sample order.
pub(crate) fn class_weights(ds: &Dataset) -> Vec<f64> {
    let mut totals = vec![0.0; ds.n_classes()];
    for (&y, &w) in ds.labels().iter().zip(ds.weights()) {
        totals[y as usize] += w;
    }
    totals
}

/// Empirical label distribution, unsmoothed.
pub fn fit_prior(ds: &Dataset) -> Result<Vec<f64>> {
    let total = ds.total_weight();
    if ds.n_samples() == 0 || total <= 0.0 {
        return Err(Error::InvalidDataset("empty dataset".into()));
    }
    Ok(class_weights(ds).into_iter().map(|w| w / total).collect())
}

/// `p(x_i = v | y = c)`, stored class-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CondTable {
    cardinality: usize,
    n_classes: usize,
    probs: Vec<f64>,
    empty_cells: usize,
}

impl CondTable {
    pub fn prob(&self, v: u32, c: usize) -> f64 {
        self.probs[c * self.cardinality + v as usize]
    }

    pub fn slice(&self, c: usize) -> &[f64] {
        &self.probs[c * self.cardinality..(c + 1) * self.cardinality]
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Classes with no mass that fell back to the uniform distribution.
    pub fn empty_cells(&self) -> usize {
        self.empty_cells
    }
}

/// `p(x_i = v | x_j = u, y = c)`, indexed `[(c * card_j + u) * card_i + v]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCondTable {
    card_i: usize,
    card_j: usize,
    n_classes: usize,
    probs: Vec<f64>,
    empty_cells: usize,
}

impl PairCondTable {
    pub fn prob(&self, v: u32, u: u32, c: usize) -> f64 {
        self.probs[(c * self.card_j + u as usize) * self.card_i + v as usize]
    }

    pub fn slice(&self, u: u32, c: usize) -> &[f64] {
        let start = (c * self.card_j + u as usize) * self.card_i;
        &self.probs[start..start + self.card_i]
    }

    pub fn cardinalities(&self) -> (usize, usize) {
        (self.card_i, self.card_j)
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn empty_cells(&self) -> usize {
        self.empty_cells
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("smoothing must be finite and >= 0, got {alpha}")));
    }
    Ok(())
}

/// Normalizes each consecutive run of `width` counts in place after adding
/// `alpha`; runs with no mass become uniform. Returns the number of such runs.
fn normalize_slices(counts: &mut [f64], width: usize, alpha: f64) -> usize {
    let mut empty = 0;
    for slice in counts.chunks_mut(width) {
        let total: f64 = slice.iter().sum::<f64>() + alpha * width as f64;
        if total > 0.0 {
            slice.iter_mut().for_each(|p| *p = (*p + alpha) / total);
        } else {
            empty += 1;
            slice.iter_mut().for_each(|p| *p = 1.0 / width as f64);
        }
    }
    empty
}

/// `p(v|c) = (count(v,c) + alpha) / (count(c) + alpha * card)`.
pub fn fit_cond_pmf(ds: &Dataset, i: usize, alpha: f64) -> Result<CondTable> {
    check_alpha(alpha)?;
    let codes = ds.codes(i)?;
    let card = ds.column(i).cardinality().unwrap_or(0);
    let l = ds.n_classes();
    let mut probs = vec![0.0; card * l];
    for ((&v, &y), &w) in codes.iter().zip(ds.labels()).zip(ds.weights()) {
        probs[y as usize * card + v as usize] += w;
    }
    let empty_cells = normalize_slices(&mut probs, card, alpha);
    if empty_cells > 0 {
        log::warn!(
            "feature {}: {empty_cells} empty class slice(s) fell back to uniform",
            ds.feature_name(i)
        );
    }
    Ok(CondTable { cardinality: card, n_classes: l, probs, empty_cells })
}

/// Pairwise conditional table; empty `(u, c)` cells with `alpha = 0` fall
/// back to uniform.
pub fn fit_pairwise_cond_pmf(ds: &Dataset, i: usize, j: usize, alpha: f64) -> Result<PairCondTable> {
    check_alpha(alpha)?;
    let codes_i = ds.codes(i)?;
    let codes_j = ds.codes(j)?;
    let card_i = ds.column(i).cardinality().unwrap_or(0);
    let card_j = ds.column(j).cardinality().unwrap_or(0);
    let l = ds.n_classes();
    let mut probs = vec![0.0; card_i * card_j * l];
    for (k, (&y, &w)) in ds.labels().iter().zip(ds.weights()).enumerate() {
        let (v, u) = (codes_i[k] as usize, codes_j[k] as usize);
        probs[(y as usize * card_j + u) * card_i + v] += w;
    }
    let empty_cells = normalize_slices(&mut probs, card_i, alpha);
    if empty_cells > 0 {
        log::debug!(
            "pair ({}, {}): {empty_cells} empty conditioning cell(s) fell back to uniform",
            ds.feature_name(i),
            ds.feature_name(j)
        );
    }
    Ok(PairCondTable { card_i, card_j, n_classes: l, probs, empty_cells })
}
