//! Domain types shared by every procedure: competition tables, grouped
//! tables, the truncated geometric law of the leading null win-run, and the
//! rejection report with its FDP/TDP accounting.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scores, labels and optional truth/side information for `p` hypotheses.
///
/// `labels[j] == true` means the original statistic beat its artificial
/// competitor. `truth[j] == true` marks a true alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetitionTable {
    ids: Vec<String>,
    scores: Vec<f64>,
    labels: Vec<bool>,
    truth: Option<Vec<bool>>,
    side: Option<Vec<f64>>,
}

impl CompetitionTable {
    pub fn new(ids: Vec<String>, scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::EmptyTable);
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        Self::build(ids, scores, labels)
    }

    /// Table whose ids are the row indices `"0"`, `"1"`, ...
    pub fn from_scores(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        let ids = (0..scores.len()).map(|j| j.to_string()).collect();
        Self::build(ids, scores, labels)
    }

    fn build(ids: Vec<String>, scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        let p = ids.len();
        if p == 0 {
            return Err(Error::EmptyTable);
        }
        check_len("scores", p, scores.len())?;
        check_len("labels", p, labels.len())?;
        if let Some(row) = scores.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFiniteScore { row });
        }
        Ok(Self {
            ids,
            scores,
            labels,
            truth: None,
            side: None,
        })
    }

    pub fn with_truth(mut self, truth: Vec<bool>) -> Result<Self> {
        check_len("truth", self.len(), truth.len())?;
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn with_side(mut self, side: Vec<f64>) -> Result<Self> {
        check_len("side", self.len(), side.len())?;
        self.side = Some(side);
        Ok(self)
    }

    /// Replaces the labels, keeping scores and annotations.
    pub fn with_labels(mut self, labels: Vec<bool>) -> Result<Self> {
        check_len("labels", self.len(), labels.len())?;
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn truth(&self) -> Option<&[bool]> {
        self.truth.as_deref()
    }

    pub fn side(&self) -> Option<&[f64]> {
        self.side.as_deref()
    }

    /// Rows `rows` in the given order. Returns `None` when `rows` is empty.
    pub fn select(&self, rows: &[usize]) -> Option<Self> {
        if rows.is_empty() {
            return None;
        }
        let pick = |v: &[f64]| rows.iter().map(|&j| v[j]).collect::<Vec<_>>();
        Some(Self {
            ids: rows.iter().map(|&j| self.ids[j].clone()).collect(),
            scores: pick(&self.scores),
            labels: rows.iter().map(|&j| self.labels[j]).collect(),
            truth: self
                .truth
                .as_ref()
                .map(|t| rows.iter().map(|&j| t[j]).collect()),
            side: self.side.as_deref().map(pick),
        })
    }

    /// Number of true alternatives, when truth flags are present.
    pub fn alternatives(&self) -> Option<usize> {
        self.truth().map(|t| t.iter().filter(|&&h| h).count())
    }
}

fn check_len(column: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            column,
            expected,
            found,
        })
    }
}

/// A partition of hypotheses into `m` groups, each with its own partial
/// symmetry parameter `r_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedTable {
    groups: Vec<CompetitionTable>,
    r: Vec<f64>,
    keys: Vec<String>,
}

impl GroupedTable {
    pub fn new(groups: Vec<CompetitionTable>, r: Vec<f64>, keys: Vec<String>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::NoGroups);
        }
        check_len("r", groups.len(), r.len())?;
        check_len("group_keys", groups.len(), keys.len())?;
        if let Some(&bad) = r.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidSymmetry(bad));
        }
        let mut seen = HashSet::new();
        for key in &keys {
            if !seen.insert(key.as_str()) {
                return Err(Error::InvalidParameter(format!("duplicate group key `{key}`")));
            }
        }
        Ok(Self { groups, r, keys })
    }

    /// Groups sharing one symmetry parameter, keyed `"1"`, `"2"`, ...
    pub fn uniform(groups: Vec<CompetitionTable>, r: f64) -> Result<Self> {
        let m = groups.len();
        let keys = (1..=m).map(|i| i.to_string()).collect();
        Self::new(groups, vec![r; m], keys)
    }

    pub fn m(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[CompetitionTable] {
        &self.groups
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(CompetitionTable::len).collect()
    }

    /// All groups concatenated in key order, ignoring the partition.
    pub fn pooled(&self) -> CompetitionTable {
        let mut ids = Vec::new();
        let mut scores = Vec::new();
        let mut labels = Vec::new();
        let mut truth = Some(Vec::new());
        for g in &self.groups {
            ids.extend_from_slice(g.ids());
            scores.extend_from_slice(g.scores());
            labels.extend_from_slice(g.labels());
            match (truth.as_mut(), g.truth()) {
                (Some(t), Some(h)) => t.extend_from_slice(h),
                _ => truth = None,
            }
        }
        let table = CompetitionTable {
            ids,
            scores,
            labels,
            truth: None,
            side: None,
        };
        match truth {
            Some(t) => CompetitionTable {
                truth: Some(t),
                ..table
            },
            None => table,
        }
    }

    /// Truth flags keyed by hypothesis id, when every group carries them.
    pub fn truth_map(&self) -> Option<HashMap<String, bool>> {
        let mut map = HashMap::new();
        for g in &self.groups {
            for (id, &h) in g.ids().iter().zip(g.truth()?) {
                map.insert(id.clone(), h);
            }
        }
        Some(map)
    }
}

/// Descending-score order; ties go to the lower original index.
pub fn rank_table(table: &CompetitionTable) -> Vec<usize> {
    rank_scores(table.scores())
}

pub(crate) fn rank_scores(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // stable sort keeps index order within ties
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Law of the leading run of null wins: `P(Z = k) = r^k (1+r)^{-(k+1)}` for
/// `k < cap` and `P(Z = cap) = (r/(1+r))^cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedGeometric {
    r: f64,
    cap: u64,
}

impl TruncatedGeometric {
    pub fn new(r: f64, cap: u64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidSymmetry(r));
        }
        Ok(Self { r, cap })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Per-trial win probability `r / (1 + r)`.
    pub fn win_probability(&self) -> f64 {
        self.r / (1.0 + self.r)
    }

    pub fn ln_pmf(&self, k: u64) -> Result<f64> {
        if k > self.cap {
            return Err(Error::OutOfSupport { k, cap: self.cap });
        }
        let ln_q = self.r.ln() - self.r.ln_1p();
        let k_f = k as f64;
        Ok(if k < self.cap {
            k_f * ln_q - self.r.ln_1p()
        } else {
            k_f * ln_q
        })
    }

    pub fn pmf(&self, k: u64) -> Result<f64> {
        self.ln_pmf(k).map(f64::exp)
    }

    /// `E[Z] = sum_{k=1}^{cap} q^k` with `q = r/(1+r)`.
    pub fn mean(&self) -> f64 {
        let q = self.win_probability();
        if self.cap == 0 {
            return 0.0;
        }
        // q (1 - q^cap) / (1 - q), with 1/(1-q) = 1 + r
        let q_cap = (self.cap as f64 * q.ln()).exp();
        self.r * (1.0 - q_cap)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        // wins before the first loss, loss probability 1/(1+r)
        let run = Geometric::new(1.0 / (1.0 + self.r))
            .expect("loss probability lies in (0, 1)")
            .sample(rng);
        run.min(self.cap)
    }
}

/// Per-group outcome of a rejection procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub key: String,
    /// Score threshold; `+inf` (serialized as `null`) when nothing is rejected.
    #[serde(with = "threshold_serde")]
    pub threshold: f64,
    /// Working level the threshold was selected at.
    pub level: f64,
    pub r_plus: usize,
    pub r_minus: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub group: String,
    pub id: String,
    pub score: f64,
}

/// Rejections pooled over all groups. `fdp`/`tdp` are filled only when the
/// input carried truth flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub groups: Vec<GroupSummary>,
    pub rejected: Vec<Rejection>,
    pub fdp: Option<f64>,
    pub tdp: Option<f64>,
}

impl RejectionReport {
    pub fn empty() -> Self {
        Self {
            groups: Vec::new(),
            rejected: Vec::new(),
            fdp: None,
            tdp: None,
        }
    }

    pub fn len(&self) -> usize {
        self.rejected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rejected.is_empty()
    }

    pub fn rejected_ids(&self) -> Vec<&str> {
        self.rejected.iter().map(|r| r.id.as_str()).collect()
    }
}

/// False and true discovery proportions of `report` under `truth`
/// (`true` = alternative). Uses the `max(., 1)` guard on both denominators.
pub fn fdp_tdp(report: &RejectionReport, truth: &HashMap<String, bool>) -> Result<(f64, f64)> {
    let mut false_rej = 0usize;
    for r in &report.rejected {
        match truth.get(&r.id) {
            Some(false) => false_rej += 1,
            Some(true) => {}
            None => return Err(Error::UnknownId(r.id.clone())),
        }
    }
    let total = report.rejected.len();
    let alternatives = truth.values().filter(|&&h| h).count();
    Ok(proportions(false_rej, total, alternatives))
}

pub(crate) fn proportions(false_rej: usize, total: usize, alternatives: usize) -> (f64, f64) {
    let fdp = false_rej as f64 / total.max(1) as f64;
    let tdp = (total - false_rej) as f64 / alternatives.max(1) as f64;
    (fdp, tdp)
}

pub(crate) mod threshold_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &f64, s: S) -> Result<S::Ok, S::Error> {
        if t.is_finite() {
            s.serialize_some(t)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
