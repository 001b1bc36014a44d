//! Parallel Monte Carlo harness. Trial `t` draws from its own stream seeded
//! with `seed ^ t`, and results are reduced in trial order, so summaries do
//! not depend on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generators::{generate, ModelConfig, ShiftModel};
use super::MeanSe;
use crate::corrections::{CorrectionRule, CorrectionSpec};
use crate::error::{Error, Result};
use crate::filters::{competition_filter, gc_filter};
use crate::model::{GroupedTable, RejectionReport};

pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ trial as u64)
}

/// Runs `f` once per trial and returns per-trial outputs in trial order.
pub fn replicate<T, F>(trials: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| f(&mut trial_rng(seed, t)))
        .collect()
}

/// Column-wise mean and standard error of per-trial rows.
pub fn summarize_columns(rows: &[Vec<f64>]) -> Vec<MeanSe> {
    let width = rows.first().map_or(0, Vec::len);
    (0..width)
        .map(|c| MeanSe::of(&rows.iter().map(|r| r[c]).collect::<Vec<_>>()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    /// Single competition filter on the pooled table at `alpha / r`.
    Oc,
    /// Grouped filter with per-group levels from a correction rule.
    Gc { correction: CorrectionRule },
}

impl Method {
    pub fn gc(rule: CorrectionRule) -> Self {
        Self::Gc { correction: rule }
    }

    pub fn apply(&self, grouped: &GroupedTable, alpha: f64) -> Result<RejectionReport> {
        match self {
            Self::Oc => {
                let r = grouped.r().iter().cloned().fold(f64::MIN, f64::max);
                competition_filter(&grouped.pooled(), alpha, r)
            }
            Self::Gc { correction } => {
                let levels = CorrectionSpec::new(alpha, correction.clone()).for_table(grouped)?;
                gc_filter(grouped, &levels)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    #[serde(flatten)]
    pub method: Method,
    pub alpha: f64,
    pub fdp: MeanSe,
    pub tdp: MeanSe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub cells: Vec<Cell>,
    pub trials: usize,
    pub seed: u64,
}

impl TrialSummary {
    pub fn cell(&self, method: &Method, alpha: f64) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| &c.method == method && c.alpha == alpha)
    }
}

fn proportions(report: &RejectionReport) -> Result<(f64, f64)> {
    match (report.fdp, report.tdp) {
        (Some(f), Some(t)) => Ok((f, t)),
        _ => Err(Error::InvalidParameter("generated data lacks truth flags".into())),
    }
}

fn assemble(
    rows: Vec<Vec<(f64, f64)>>,
    methods: &[Method],
    alphas: &[f64],
    trials: usize,
    seed: u64,
) -> TrialSummary {
    let mut cells = Vec::with_capacity(methods.len() * alphas.len());
    let mut idx = 0;
    for method in methods {
        for &alpha in alphas {
            let fdp: Vec<f64> = rows.iter().map(|r| r[idx].0).collect();
            let tdp: Vec<f64> = rows.iter().map(|r| r[idx].1).collect();
            cells.push(Cell {
                method: method.clone(),
                alpha,
                fdp: MeanSe::of(&fdp),
                tdp: MeanSe::of(&tdp),
            });
            idx += 1;
        }
    }
    TrialSummary { cells, trials, seed }
}

/// Every method at every level on the same grouped draws.
pub fn run_trials(
    config: &ModelConfig,
    methods: &[Method],
    alphas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<TrialSummary> {
    config.validate()?;
    let rows = replicate(trials, seed, |rng| {
        let grouped = generate(config, rng)?;
        let mut row = Vec::with_capacity(methods.len() * alphas.len());
        for method in methods {
            for &alpha in alphas {
                row.push(proportions(&method.apply(&grouped, alpha)?)?);
            }
        }
        Ok(row)
    })?;
    Ok(assemble(rows, methods, alphas, trials, seed))
}

/// Single competition filter on one-group shift-model draws.
pub fn run_single_filter(
    model: &ShiftModel,
    alphas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<TrialSummary> {
    let rows = replicate(trials, seed, |rng| {
        let table = model.draw(1, rng)?;
        alphas
            .iter()
            .map(|&a| proportions(&competition_filter(&table, a, model.r)?))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(assemble(rows, &[Method::Oc], alphas, trials, seed))
}
