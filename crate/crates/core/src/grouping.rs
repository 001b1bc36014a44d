//! Data-driven grouping by sample splitting: one half chooses the groups,
//! the other half is tested with them.
//!
//! The self-grouping scan walks the descending ranking and cuts maximal
//! runs whose competition ratio is feasible at `alpha'(K, alpha)`. Adding
//! groups is accepted while the covered label-1 count grows by more than a
//! factor `C`.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corrections::CorrectionRule;
use crate::error::{Error, Result};
use crate::filters::{gc_filter, sgo_filter, Ranked, SegmentPlan, RATIO_SLACK};
use crate::model::{CompetitionTable, GroupedTable, RejectionReport};

/// Every scanned segment must cover at least this many label-1 entries.
pub const MIN_SEGMENT_WINS: usize = 2;

#[derive(Debug, Clone)]
pub struct SplitPair {
    pub grouping: CompetitionTable,
    pub testing: CompetitionTable,
    pub seed: u64,
}

/// Seeded uniform split; the grouping half receives `floor(fraction * p)`
/// rows and both halves keep the input row order.
pub fn split_samples(table: &CompetitionTable, fraction: f64, seed: u64) -> Result<SplitPair> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let p = table.len();
    let take = (fraction * p as f64).floor() as usize;
    if take == 0 || take == p {
        return Err(Error::DegenerateSplit { fraction, size: p });
    }
    let mut rows: Vec<usize> = (0..p).collect();
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (mut first, mut second) = (rows[..take].to_vec(), rows[take..].to_vec());
    first.sort_unstable();
    second.sort_unstable();
    Ok(SplitPair {
        grouping: table.select(&first).expect("nonempty half"),
        testing: table.select(&second).expect("nonempty half"),
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingParams {
    pub r: f64,
    pub alpha: f64,
    /// Improvement factor; `None` means `1 + alpha`.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub rule: CorrectionRule,
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_fraction() -> f64 {
    0.5
}

impl GroupingParams {
    pub fn new(alpha: f64, r: f64) -> Self {
        Self {
            r,
            alpha,
            c: None,
            rule: CorrectionRule::default(),
            fraction: default_fraction(),
            seed: 0,
        }
    }

    pub fn factor(&self) -> f64 {
        self.c.unwrap_or(1.0 + self.alpha)
    }

    fn validate(&self) -> Result<()> {
        let c = self.factor();
        if c.is_nan() || c < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "improvement factor must be at least 1, got {c}"
            )));
        }
        Ok(())
    }

    /// Working level shared by `k` groups drawn from `p` hypotheses.
    pub fn level(&self, k: usize, p: usize) -> Result<f64> {
        self.rule.uniform(k, self.alpha, self.r, p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Grouping {
    /// Contiguous score bands. `score_cuts[e]` is the grouping-half score at
    /// the start of band `e + 2`; `assignment` maps grouping-half ids to
    /// 1-based bands.
    Sg {
        rank_points: SegmentPlan,
        score_cuts: Vec<f64>,
        assignment: BTreeMap<String, usize>,
    },
    Sgo { rank_points: SegmentPlan },
    /// Index of the winning path entry.
    Gp { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingOutcome {
    pub k: usize,
    /// Label-1 count covered by the accepted candidate.
    pub accepted_score: usize,
    #[serde(flatten)]
    pub grouping: Grouping,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingTest {
    pub outcome: GroupingOutcome,
    pub report: RejectionReport,
}

struct Scan {
    /// 1-based start ranks, first entry 1.
    points: Vec<usize>,
    accepted: usize,
}

/// Greedy segmentation at level `level` with at most `k` segments; returns
/// 0-based segment starts and the covered label-1 count.
fn segment_scan(labels: &[bool], level: f64, k: usize) -> (Vec<usize>, usize) {
    let p = labels.len();
    // run i..=j is feasible iff g[j+1] - g[i] >= 1 with g[t] = level*O[t] - Z[t]
    let mut ones = vec![0usize; p + 1];
    let mut g = vec![0.0f64; p + 1];
    for t in 0..p {
        ones[t + 1] = ones[t] + labels[t] as usize;
        let zeros = (t + 1 - ones[t + 1]) as f64;
        g[t + 1] = level * ones[t + 1] as f64 - zeros;
    }
    let mut suffix_max = g.clone();
    for t in (0..p).rev() {
        suffix_max[t] = suffix_max[t].max(suffix_max[t + 1]);
    }
    let (mut starts, mut covered) = (Vec::new(), 0);
    let mut i = 0;
    while starts.len() < k && i + 1 < p {
        let target = g[i] + 1.0 - RATIO_SLACK * (1.0 + g[i].abs());
        // suffix_max is nonincreasing: locate the last t with suffix_max[t] >= target
        let last = suffix_max[i + 2..].partition_point(|&v| v >= target);
        let end = if last == 0 { None } else { Some(i + 1 + last) };
        match end {
            Some(t) if ones[t] - ones[i] >= MIN_SEGMENT_WINS => {
                starts.push(i);
                covered += ones[t] - ones[i];
                i = t;
            }
            _ => i += 1,
        }
    }
    (starts, covered)
}

fn scan(table: &CompetitionTable, params: &GroupingParams) -> Result<Scan> {
    params.validate()?;
    let ranked = Ranked::from_table(table);
    let p = table.len();
    let c = params.factor();
    let mut best: Option<(Vec<usize>, usize)> = None;
    for k in 1..=p {
        let level = params.level(k, p)?;
        if k as f64 > p as f64 * level {
            break;
        }
        let (starts, covered) = segment_scan(&ranked.labels, level, k);
        let incumbent = best.as_ref().map_or(0, |b| b.1);
        let improves = covered > 0 && (incumbent == 0 || covered as f64 > c * incumbent as f64);
        if !improves {
            break;
        }
        best = Some((starts, covered));
    }
    let (starts, accepted) = best.unwrap_or_default();
    let mut points: Vec<usize> = starts.iter().map(|s| s + 1).collect();
    match points.first_mut() {
        Some(first) => *first = 1,
        None => points.push(1),
    }
    Ok(Scan { points, accepted })
}

/// Self-grouping on one table: contiguous score bands.
pub fn sg_group(table: &CompetitionTable, params: &GroupingParams) -> Result<GroupingOutcome> {
    let s = scan(table, params)?;
    let ranked = Ranked::from_table(table);
    let score_cuts: Vec<f64> = s.points[1..].iter().map(|&t| ranked.scores[t - 1]).collect();
    let mut assignment = BTreeMap::new();
    for (pos, &row) in ranked.order.iter().enumerate() {
        let band = s.points.partition_point(|&t| t <= pos + 1);
        assignment.insert(table.ids()[row].clone(), band);
    }
    Ok(GroupingOutcome {
        k: s.points.len(),
        accepted_score: s.accepted,
        grouping: Grouping::Sg {
            rank_points: SegmentPlan::new(s.points).expect("scan points increase"),
            score_cuts,
            assignment,
        },
    })
}

/// Self-grouping returning only the 1-based segment start ranks.
pub fn sgo_points(table: &CompetitionTable, params: &GroupingParams) -> Result<GroupingOutcome> {
    let s = scan(table, params)?;
    Ok(GroupingOutcome {
        k: s.points.len(),
        accepted_score: s.accepted,
        grouping: Grouping::Sgo {
            rank_points: SegmentPlan::new(s.points).expect("scan points increase"),
        },
    })
}

/// Band of a score given the cut scores of bands `2..`.
fn band_of(score: f64, cuts: &[f64]) -> usize {
    1 + cuts.iter().filter(|&&c| score <= c).count()
}

fn grouped_by_band(table: &CompetitionTable, bands: &[usize], r: f64) -> Result<GroupedTable> {
    let k = bands.iter().copied().max().unwrap_or(1);
    let mut rows = vec![Vec::new(); k];
    for (row, &b) in bands.iter().enumerate() {
        rows[b - 1].push(row);
    }
    let (mut groups, mut keys) = (Vec::new(), Vec::new());
    for (b, members) in rows.iter().enumerate() {
        if let Some(g) = table.select(members) {
            groups.push(g);
            keys.push((b + 1).to_string());
        }
    }
    let m = groups.len();
    GroupedTable::new(groups, vec![r; m], keys)
}

/// Split, band the grouping half, then run the grouped filter on the testing
/// half with one level for all `K` bands.
pub fn sg_test(table: &CompetitionTable, params: &GroupingParams) -> Result<GroupingTest> {
    let split = split_samples(table, params.fraction, params.seed)?;
    let outcome = sg_group(&split.grouping, params)?;
    let Grouping::Sg { score_cuts, .. } = &outcome.grouping else {
        unreachable!("sg_group yields bands")
    };
    let testing = &split.testing;
    let bands: Vec<usize> = testing.scores().iter().map(|&w| band_of(w, score_cuts)).collect();
    let grouped = grouped_by_band(testing, &bands, params.r)?;
    let level = params.level(outcome.k, testing.len())?;
    let report = gc_filter(&grouped, &vec![level; grouped.m()])?;
    Ok(GroupingTest { outcome, report })
}

/// Maps 1-based rank points of a table of size `from` onto one of size `to`.
pub fn rescale_points(points: &[usize], from: usize, to: usize) -> Vec<usize> {
    let mut out: Vec<usize> = points
        .iter()
        .map(|&t| 1 + ((t - 1) * to) / from)
        .collect();
    out.dedup();
    out
}

/// Split, find rank points on the grouping half, then run the rank-segment
/// filter on the testing half with the points rescaled to its size.
pub fn sgo_test(table: &CompetitionTable, params: &GroupingParams) -> Result<GroupingTest> {
    let split = split_samples(table, params.fraction, params.seed)?;
    let outcome = sgo_points(&split.grouping, params)?;
    let Grouping::Sgo { rank_points } = &outcome.grouping else {
        unreachable!("sgo_points yields rank points")
    };
    let (pg, ps) = (split.grouping.len(), split.testing.len());
    let plan = SegmentPlan::new(rescale_points(rank_points.start_ranks(), pg, ps))?;
    let level = params.level(outcome.k, ps)?;
    let report = sgo_filter(&split.testing, &plan, level)?;
    Ok(GroupingTest { outcome, report })
}

/// A candidate grouping: disjoint lists of ids.
pub type Partition = Vec<Vec<String>>;

fn check_path(path: &[Partition], table: &CompetitionTable) -> Result<()> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    let known: HashSet<&str> = table.ids().iter().map(String::as_str).collect();
    for (index, partition) in path.iter().enumerate() {
        let mut seen = HashSet::new();
        for id in partition.iter().flatten() {
            if !known.contains(id.as_str()) {
                return Err(Error::InvalidPartition {
                    index,
                    reason: format!("unknown id `{id}`"),
                });
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidPartition {
                    index,
                    reason: format!("id `{id}` appears twice"),
                });
            }
        }
        if partition.iter().all(Vec::is_empty) {
            return Err(Error::InvalidPartition {
                index,
                reason: "no ids".into(),
            });
        }
    }
    Ok(())
}

/// Restricts `partition` to the rows of `table`, dropping emptied groups.
fn restrict(table: &CompetitionTable, partition: &Partition, r: f64) -> Result<Option<GroupedTable>> {
    let row_of: HashMap<&str, usize> = table
        .ids()
        .iter()
        .enumerate()
        .map(|(j, id)| (id.as_str(), j))
        .collect();
    let (mut groups, mut keys) = (Vec::new(), Vec::new());
    for (g, members) in partition.iter().enumerate() {
        let rows: Vec<usize> = members
            .iter()
            .filter_map(|id| row_of.get(id.as_str()).copied())
            .collect();
        if let Some(t) = table.select(&rows) {
            groups.push(t);
            keys.push((g + 1).to_string());
        }
    }
    if groups.is_empty() {
        return Ok(None);
    }
    let m = groups.len();
    GroupedTable::new(groups, vec![r; m], keys).map(Some)
}

fn path_rejections(
    table: &CompetitionTable,
    partition: &Partition,
    params: &GroupingParams,
) -> Result<RejectionReport> {
    let Some(grouped) = restrict(table, partition, params.r)? else {
        return Ok(RejectionReport::empty());
    };
    let level = params.level(partition.len(), table.len())?;
    gc_filter(&grouped, &vec![level; grouped.m()])
}

/// Walks the path on the grouping half, moving to the next entry while its
/// rejection count exceeds `C` times the incumbent, and tests the testing
/// half with the last accepted entry (the first entry by default).
pub fn gp_test(
    path: &[Partition],
    table: &CompetitionTable,
    params: &GroupingParams,
) -> Result<GroupingTest> {
    check_path(path, table)?;
    params.validate()?;
    let split = split_samples(table, params.fraction, params.seed)?;
    let c = params.factor();
    let (mut winner, mut best) = (0usize, 0usize);
    for (index, partition) in path.iter().enumerate() {
        let count = path_rejections(&split.grouping, partition, params)?.len();
        let improves = count > 0 && (best == 0 || count as f64 > c * best as f64);
        if !improves {
            break;
        }
        winner = index;
        best = count;
    }
    let report = path_rejections(&split.testing, &path[winner], params)?;
    Ok(GroupingTest {
        outcome: GroupingOutcome {
            k: path[winner].len(),
            accepted_score: best,
            grouping: Grouping::Gp { index: winner },
        },
        report,
    })
}
