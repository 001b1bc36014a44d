//! Compound e-values built from rejection sets and competition statistics,
//! and the base e-BH combiner.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::RATIO_SLACK;
use crate::model::CompetitionTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EValueVector {
    ids: Vec<String>,
    values: Vec<f64>,
}

impl EValueVector {
    pub fn new(ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if ids.len() != values.len() {
            return Err(Error::LengthMismatch {
                column: "values",
                expected: ids.len(),
                found: values.len(),
            });
        }
        if let Some(&v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "e-values must be finite and nonnegative, got {v}"
            )));
        }
        Ok(Self { ids, values })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Concatenates vectors; the combined length is the e-BH multiplicity.
    pub fn concat(parts: impl IntoIterator<Item = EValueVector>) -> Self {
        let mut out = Self {
            ids: Vec::new(),
            values: Vec::new(),
        };
        for part in parts {
            out.ids.extend(part.ids);
            out.values.extend(part.values);
        }
        out
    }
}

fn membership(ids: &[String], rejected: &[String]) -> Result<Vec<bool>> {
    let known: HashSet<&str> = ids.iter().map(String::as_str).collect();
    let mut chosen: HashSet<&str> = HashSet::with_capacity(rejected.len());
    for id in rejected {
        if !known.contains(id.as_str()) {
            return Err(Error::UnknownId(id.clone()));
        }
        chosen.insert(id.as_str());
    }
    Ok(ids.iter().map(|id| chosen.contains(id.as_str())).collect())
}

/// `E_j = p / |D|` on the rejection set `D` and 0 elsewhere.
pub fn evalues_from_procedure(ids: &[String], rejected: &[String]) -> Result<EValueVector> {
    evalues_from_procedure_scaled(ids, rejected, 1.0)
}

/// `E_j = p / (alpha_d |D|)` on `D`: e-BH at level `alpha_d` returns exactly `D`.
pub fn evalues_from_procedure_scaled(
    ids: &[String],
    rejected: &[String],
    alpha_d: f64,
) -> Result<EValueVector> {
    if !(alpha_d > 0.0 && alpha_d <= 1.0) {
        return Err(Error::InvalidLevel(alpha_d));
    }
    let inside = membership(ids, rejected)?;
    let size = inside.iter().filter(|&&b| b).count();
    let value = if size == 0 {
        0.0
    } else {
        ids.len() as f64 / (alpha_d * size as f64)
    };
    let values = inside.iter().map(|&b| if b { value } else { 0.0 }).collect();
    EValueVector::new(ids.to_vec(), values)
}

/// `E_j = p 1{W_j >= T, L_j = 1} / (r (1 + #{W >= T, L = 0}))`.
pub fn evalues_from_competition(
    table: &CompetitionTable,
    threshold: f64,
    r: f64,
) -> Result<EValueVector> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidSymmetry(r));
    }
    let above = |j: usize| table.scores()[j] >= threshold;
    let losers = (0..table.len())
        .filter(|&j| above(j) && !table.labels()[j])
        .count();
    let value = table.len() as f64 / (r * (1 + losers) as f64);
    let values = (0..table.len())
        .map(|j| if above(j) && table.labels()[j] { value } else { 0.0 })
        .collect();
    EValueVector::new(table.ids().to_vec(), values)
}

/// Base e-BH: with `e_[1] >= ... >= e_[p]`, let `k = max{k : e_[k] >= p/(alpha k)}`
/// and reject every hypothesis with `e_j >= p/(alpha k)`. Ids are returned in
/// input order.
pub fn ebh(e: &EValueVector, alpha: f64) -> Result<Vec<String>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidLevel(alpha));
    }
    let p = e.len() as f64;
    let passes = |v: f64, k: usize| v > 0.0 && v * alpha * k as f64 >= p * (1.0 - RATIO_SLACK);
    let mut sorted = e.values.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k_hat = (1..=sorted.len())
        .rev()
        .find(|&k| passes(sorted[k - 1], k))
        .unwrap_or(0);
    if k_hat == 0 {
        return Ok(Vec::new());
    }
    Ok(e.ids
        .iter()
        .zip(&e.values)
        .filter(|(_, &v)| passes(v, k_hat))
        .map(|(id, _)| id.clone())
        .collect())
}
