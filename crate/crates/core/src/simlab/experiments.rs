//! Targeted experiments: an adversarial construction where per-group
//! filtering at the nominal level loses control, the e-value power curve,
//! and the pooled null win/loss ratio under uncorrected thresholds.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::generators::ShiftModel;
use super::trials::replicate;
use super::MeanSe;
use crate::corrections::CorrectionRule;
use crate::error::{Error, Result};
use crate::evalues::{ebh, evalues_from_competition, EValueVector};
use crate::filters::{competition_threshold, gc_filter};
use crate::model::{CompetitionTable, GroupedTable};

/// Adversarial grouped model. Nulls come first with strictly decreasing
/// scores above every alternative; each group's alternatives all win, and
/// the first `shift` of them score 1 (the rest 0) exactly when some other
/// group has at least `min_wins` wins among its first `window` nulls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleConfig {
    pub m: usize,
    pub p: usize,
    pub p0: usize,
    pub window: usize,
    pub min_wins: usize,
    pub shift: usize,
    pub null_step: f64,
}

impl CounterexampleConfig {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            p: 300,
            p0: 280,
            window: 15,
            min_wins: 10,
            shift: 11,
            null_step: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.p0 > self.p || self.window > self.p0 || self.shift > self.p - self.p0 {
            return Err(Error::InvalidParameter(format!(
                "need m >= 1, window <= p0 <= p and shift <= p - p0, got {self:?}"
            )));
        }
        // the last null must stay above the alternative scores {0, 1}
        let lowest = 2.0 - (self.p0 as f64 - 1.0) * self.null_step;
        if !(self.null_step > 0.0 && lowest > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "null_step {} does not keep nulls above 1",
                self.null_step
            )));
        }
        Ok(())
    }

    /// Shift applied to each group given every group's null labels.
    pub fn shifts(&self, null_labels: &[Vec<bool>]) -> Vec<usize> {
        let hot: Vec<bool> = null_labels
            .iter()
            .map(|l| l[..self.window].iter().filter(|&&b| b).count() >= self.min_wins)
            .collect();
        (0..null_labels.len())
            .map(|i| {
                let other = hot.iter().enumerate().any(|(k, &h)| k != i && h);
                if other { self.shift } else { 0 }
            })
            .collect()
    }
}

/// Builds the grouped table from per-group null labels of length `p0`.
pub fn counterexample_table(cfg: &CounterexampleConfig, null_labels: &[Vec<bool>]) -> Result<GroupedTable> {
    cfg.validate()?;
    if null_labels.len() != cfg.m {
        return Err(Error::LengthMismatch {
            column: "null_labels",
            expected: cfg.m,
            found: null_labels.len(),
        });
    }
    if let Some(bad) = null_labels.iter().find(|l| l.len() != cfg.p0) {
        return Err(Error::LengthMismatch {
            column: "null_labels",
            expected: cfg.p0,
            found: bad.len(),
        });
    }
    let shifts = cfg.shifts(null_labels);
    let mut tables = Vec::with_capacity(cfg.m);
    for (i, (labels, &f)) in null_labels.iter().zip(&shifts).enumerate() {
        let mut scores = Vec::with_capacity(cfg.p);
        let mut all_labels = labels.clone();
        for j in 1..=cfg.p0 {
            scores.push(2.0 + (cfg.p0 - j) as f64 * cfg.null_step);
        }
        for offset in 1..=cfg.p - cfg.p0 {
            scores.push(if offset > f { 0.0 } else { 1.0 });
            all_labels.push(true);
        }
        let ids = (1..=cfg.p).map(|j| format!("{}:{j}", i + 1)).collect();
        let truth = (0..cfg.p).map(|j| j >= cfg.p0).collect();
        tables.push(CompetitionTable::new(ids, scores, all_labels)?.with_truth(truth)?);
    }
    GroupedTable::uniform(tables, 1.0)
}

/// FDP of one draw at one level, with and without correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleFdp {
    pub uncorrected: f64,
    pub corrected: f64,
}

fn fdp_of(grouped: &GroupedTable, level: f64) -> Result<f64> {
    let report = gc_filter(grouped, &vec![level; grouped.m()])?;
    report
        .fdp
        .ok_or_else(|| Error::InvalidParameter("table lacks truth flags".into()))
}

/// One draw of null labels filtered at every level in `alphas`: at the
/// level itself and at the power-rule corrected level.
pub fn counterexample_trial<R: Rng + ?Sized>(
    cfg: &CounterexampleConfig,
    alphas: &[f64],
    rng: &mut R,
) -> Result<Vec<CounterexampleFdp>> {
    let labels: Vec<Vec<bool>> = (0..cfg.m)
        .map(|_| (0..cfg.p0).map(|_| rng.random_bool(0.5)).collect())
        .collect();
    let grouped = counterexample_table(cfg, &labels)?;
    alphas
        .iter()
        .map(|&alpha| {
            let corrected = CorrectionRule::Power.uniform(cfg.m, alpha, 1.0, cfg.p)?;
            Ok(CounterexampleFdp {
                uncorrected: fdp_of(&grouped, alpha)?,
                corrected: fdp_of(&grouped, corrected)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleCell {
    pub alpha: f64,
    pub corrected_alpha: f64,
    pub uncorrected: MeanSe,
    pub corrected: MeanSe,
}

pub fn run_counterexample(
    cfg: &CounterexampleConfig,
    alphas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<CounterexampleCell>> {
    cfg.validate()?;
    let rows = replicate(trials, seed, |rng| counterexample_trial(cfg, alphas, rng))?;
    alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let unc: Vec<f64> = rows.iter().map(|r| r[k].uncorrected).collect();
            let cor: Vec<f64> = rows.iter().map(|r| r[k].corrected).collect();
            Ok(CounterexampleCell {
                alpha,
                corrected_alpha: CorrectionRule::Power.uniform(cfg.m, alpha, 1.0, cfg.p)?,
                uncorrected: MeanSe::of(&unc),
                corrected: MeanSe::of(&cor),
            })
        })
        .collect()
}

/// Groups of equal size with a uniformly drawn null count and `N(mu, 1)`
/// alternatives, `mu ~ U(signal)`, against `N(0, 1)` decoys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalueConfig {
    pub groups: usize,
    pub size: usize,
    pub nulls: (usize, usize),
    pub signal: (f64, f64),
    pub alpha_ebh: f64,
}

impl Default for EvalueConfig {
    fn default() -> Self {
        Self {
            groups: 10,
            size: 1000,
            nulls: (150, 600),
            signal: (2.0, 4.0),
            alpha_ebh: 0.1,
        }
    }
}

impl EvalueConfig {
    fn validate(&self) -> Result<()> {
        if self.groups == 0 || self.nulls.0 > self.nulls.1 || self.nulls.1 > self.size {
            return Err(Error::InvalidParameter(format!(
                "need groups >= 1 and null counts within 0..=size, got {self:?}"
            )));
        }
        if !(self.signal.0 <= self.signal.1) {
            return Err(Error::InvalidParameter("signal range is empty".into()));
        }
        if !(self.alpha_ebh > 0.0 && self.alpha_ebh <= 1.0) {
            return Err(Error::InvalidLevel(self.alpha_ebh));
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<CompetitionTable>> {
        self.validate()?;
        let nulls = Uniform::new_inclusive(self.nulls.0, self.nulls.1).expect("checked range");
        (1..=self.groups)
            .map(|g| {
                let model = ShiftModel {
                    p: self.size,
                    p0: nulls.sample(rng),
                    signal: self.signal,
                    r: 1.0,
                };
                model.draw(g, rng)
            })
            .collect()
    }
}

/// True rejections at one competition level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalueCounts {
    pub ebh_true: usize,
    pub direct_true: usize,
}

fn true_hits(table: &CompetitionTable, ids: &HashSet<&str>) -> usize {
    let truth = table.truth().expect("generated tables carry truth");
    table
        .ids()
        .iter()
        .zip(truth)
        .filter(|(id, &h)| h && ids.contains(id.as_str()))
        .count()
}

/// Per-group competition at `alpha_cp`, then e-BH on the pooled e-values.
pub fn evalue_counts(tables: &[CompetitionTable], alpha_cp: f64, alpha_ebh: f64) -> Result<EvalueCounts> {
    let mut parts = Vec::with_capacity(tables.len());
    let mut direct_true = 0;
    for table in tables {
        let t = competition_threshold(table, alpha_cp);
        let truth = table.truth().expect("generated tables carry truth");
        direct_true += (0..table.len())
            .filter(|&j| truth[j] && table.labels()[j] && table.scores()[j] >= t.threshold)
            .count();
        parts.push(evalues_from_competition(table, t.threshold, 1.0)?);
    }
    let pooled = EValueVector::concat(parts);
    let rejected = ebh(&pooled, alpha_ebh)?;
    let chosen: HashSet<&str> = rejected.iter().map(String::as_str).collect();
    let ebh_true = tables.iter().map(|t| true_hits(t, &chosen)).sum();
    Ok(EvalueCounts { ebh_true, direct_true })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub alpha_cp: f64,
    pub ebh_true: MeanSe,
    pub direct_true: MeanSe,
}

/// Mean true-rejection counts over `trials` draws, each reused across the grid.
pub fn evalue_experiment(
    cfg: &EvalueConfig,
    grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    let rows = replicate(trials, seed, |rng| {
        let tables = cfg.draw(rng)?;
        grid.iter()
            .map(|&a| evalue_counts(&tables, a, cfg.alpha_ebh))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(grid
        .iter()
        .enumerate()
        .map(|(k, &alpha_cp)| {
            let e: Vec<f64> = rows.iter().map(|r| r[k].ebh_true as f64).collect();
            let d: Vec<f64> = rows.iter().map(|r| r[k].direct_true as f64).collect();
            CurvePoint {
                alpha_cp,
                ebh_true: MeanSe::of(&e),
                direct_true: MeanSe::of(&d),
            }
        })
        .collect())
}

/// `(1/r) sum_i V+_i / (sum_i V-_i + 1)` where `V+_i` and `V-_i` count the
/// winning and losing nulls at or above group `i`'s threshold at `alpha / r`.
pub fn null_ratio(tables: &[CompetitionTable], alpha: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidSymmetry(r));
    }
    let (mut plus, mut minus) = (0usize, 0usize);
    for table in tables {
        let truth = table
            .truth()
            .ok_or_else(|| Error::InvalidParameter("table lacks truth flags".into()))?;
        let t = competition_threshold(table, alpha / r).threshold;
        for j in 0..table.len() {
            if !truth[j] && table.scores()[j] >= t {
                if table.labels()[j] { plus += 1 } else { minus += 1 }
            }
        }
    }
    Ok(plus as f64 / (r * (minus + 1) as f64))
}

/// Monte Carlo mean of [`null_ratio`] over `m` independent shift-model groups.
pub fn loss_of_control(
    model: &ShiftModel,
    m: usize,
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<MeanSe> {
    if m == 0 {
        return Err(Error::NoGroups);
    }
    let values = replicate(trials, seed, |rng| {
        let tables = (1..=m).map(|g| model.draw(g, rng)).collect::<Result<Vec<_>>>()?;
        null_ratio(&tables, alpha, model.r)
    })?;
    Ok(MeanSe::of(&values))
}
