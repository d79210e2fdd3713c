//! Plug-in information quantities in nats.

use std::collections::BTreeMap;

use super::tables::class_weights;
use crate::data::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_JOINT_CAP: usize = 1_000_000;

/// `I(X; Y)` from a row-major table whose rows are values of X and whose
/// columns are classes. Empty rows and cells contribute nothing.
fn mi_from_rows(rows: &[f64], class_totals: &[f64], total: f64) -> f64 {
    let l = class_totals.len();
    let mut acc = 0.0;
    for row in rows.chunks(l) {
        let row_total: f64 = row.iter().sum();
        if row_total <= 0.0 {
            continue;
        }
        for (&n_vc, &n_c) in row.iter().zip(class_totals) {
            if n_vc > 0.0 {
                acc += (n_vc / total) * (n_vc * total / (row_total * n_c)).ln();
            }
        }
    }
    acc.max(0.0)
}

/// `I(A; B | C)` from counts indexed `[(a * nb + b) * nc + c]`.
fn cond_mi_from_counts(counts: &[f64], na: usize, nb: usize, nc: usize) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut n_ac = vec![0.0; na * nc];
    let mut n_bc = vec![0.0; nb * nc];
    let mut n_c = vec![0.0; nc];
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let n = counts[(a * nb + b) * nc + c];
                n_ac[a * nc + c] += n;
                n_bc[b * nc + c] += n;
                n_c[c] += n;
            }
        }
    }
    let mut acc = 0.0;
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let n = counts[(a * nb + b) * nc + c];
                if n > 0.0 {
                    acc += (n / total) * (n * n_c[c] / (n_ac[a * nc + c] * n_bc[b * nc + c])).ln();
                }
            }
        }
    }
    acc.max(0.0)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("smoothing must be finite and >= 0, got {alpha}")));
    }
    Ok(())
}

fn cardinality(ds: &Dataset, i: usize) -> Result<(usize, &[u32])> {
    let codes = ds.codes(i)?;
    Ok((ds.column(i).cardinality().unwrap_or(0), codes))
}

/// `I(x_i; y)` with `alpha` pseudo-counts added to every `(v, c)` cell.
pub fn mi_plugin(ds: &Dataset, i: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let (card, codes) = cardinality(ds, i)?;
    let l = ds.n_classes();
    let mut rows = vec![0.0; card * l];
    for ((&v, &y), &w) in codes.iter().zip(ds.labels()).zip(ds.weights()) {
        rows[v as usize * l + y as usize] += w;
    }
    let mut class_totals = class_weights(ds);
    let mut total = ds.total_weight();
    if alpha > 0.0 {
        rows.iter_mut().for_each(|n| *n += alpha);
        class_totals.iter_mut().for_each(|n| *n += alpha * card as f64);
        total += alpha * (card * l) as f64;
    }
    Ok(mi_from_rows(&rows, &class_totals, total))
}

/// Three-way counts over `(x_a, x_b, third)` with `alpha` added per cell.
fn three_way(
    ds: &Dataset,
    a: &[u32],
    na: usize,
    b: &[u32],
    nb: usize,
    third: Option<(&[u32], usize)>,
    alpha: f64,
) -> (Vec<f64>, usize) {
    let nc = third.map(|(_, n)| n).unwrap_or(1);
    let mut counts = vec![alpha; na * nb * nc];
    for k in 0..ds.n_samples() {
        let c = third.map(|(codes, _)| codes[k] as usize).unwrap_or(0);
        counts[(a[k] as usize * nb + b[k] as usize) * nc + c] += ds.weights()[k];
    }
    (counts, nc)
}

/// `I(x_i; x_j | y)`.
pub fn cmi_plugin(ds: &Dataset, i: usize, j: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let (ni, ci) = cardinality(ds, i)?;
    let (nj, cj) = cardinality(ds, j)?;
    let (counts, nc) = three_way(ds, ci, ni, cj, nj, Some((ds.labels(), ds.n_classes())), alpha);
    Ok(cond_mi_from_counts(&counts, ni, nj, nc))
}

/// `I(x_i; x_j)`, label ignored.
pub fn mi_pair(ds: &Dataset, i: usize, j: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let (ni, ci) = cardinality(ds, i)?;
    let (nj, cj) = cardinality(ds, j)?;
    let (counts, nc) = three_way(ds, ci, ni, cj, nj, None, alpha);
    Ok(cond_mi_from_counts(&counts, ni, nj, nc))
}

/// `I(x_i; y | x_j)`, the conditional relevance used by CMIM.
pub fn cond_relevance(ds: &Dataset, i: usize, j: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let (ni, ci) = cardinality(ds, i)?;
    let (nj, cj) = cardinality(ds, j)?;
    let (counts, nc) = three_way(ds, ci, ni, ds.labels(), ds.n_classes(), Some((cj, nj)), alpha);
    Ok(cond_mi_from_counts(&counts, ni, ds.n_classes(), nc))
}

pub fn joint_mi_exact(ds: &Dataset, set: &[usize]) -> Result<f64> {
    joint_mi_exact_with_cap(ds, set, DEFAULT_JOINT_CAP)
}

/// `I(x_S; y)` on the weighted empirical joint, by brute force over the
/// observed configurations of `x_S`.
///
/// Configurations are visited in lexicographic code order, so for a single
/// feature the arithmetic matches [`mi_plugin`] with `alpha = 0` exactly.
pub fn joint_mi_exact_with_cap(ds: &Dataset, set: &[usize], cap: usize) -> Result<f64> {
    let cols: Vec<&[u32]> = set.iter().map(|&i| ds.codes(i)).collect::<Result<_>>()?;
    let l = ds.n_classes();
    if set.is_empty() {
        return Ok(0.0);
    }
    let mut joint: BTreeMap<Vec<u32>, Vec<f64>> = BTreeMap::new();
    let mut key = Vec::with_capacity(set.len());
    for k in 0..ds.n_samples() {
        key.clear();
        key.extend(cols.iter().map(|c| c[k]));
        if let Some(row) = joint.get_mut(key.as_slice()) {
            row[ds.labels()[k] as usize] += ds.weights()[k];
            continue;
        }
        if joint.len() >= cap {
            return Err(Error::CapExceeded { count: joint.len() as u128 + 1, cap });
        }
        let mut row = vec![0.0; l];
        row[ds.labels()[k] as usize] += ds.weights()[k];
        joint.insert(key.clone(), row);
    }
    let rows: Vec<f64> = joint.into_values().flatten().collect();
    Ok(mi_from_rows(&rows, &class_weights(ds), ds.total_weight()))
}
