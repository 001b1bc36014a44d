//! Rejection procedures built on the competition threshold: the single
//! filter, the grouped (GC) filter, side-information grouping and the
//! rank-segment filter.
//!
//! A threshold `t` is feasible at level `c` when
//! `(#{W >= t, L = 0} + 1) / max(#{W >= t, L = 1}, 1) <= c`; each procedure
//! picks the smallest feasible observed score, or `+inf` when none is.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    proportions, rank_scores, CompetitionTable, GroupSummary, GroupedTable, Rejection,
    RejectionReport,
};

/// Relative slack on ratio comparisons, so that exact rational ties such as
/// `1/2 <= 0.5` survive floating-point rounding.
pub(crate) const RATIO_SLACK: f64 = 1e-12;

/// `num / max(den, 1) <= level`, up to [`RATIO_SLACK`].
#[inline]
pub(crate) fn within_level(num: usize, den: usize, level: f64) -> bool {
    num as f64 <= level * den.max(1) as f64 * (1.0 + RATIO_SLACK)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// Selected score, or `+inf` when no candidate is feasible.
    #[serde(with = "crate::model::threshold_serde")]
    pub threshold: f64,
    pub r_plus: usize,
    pub r_minus: usize,
}

impl ThresholdResult {
    pub const NONE: Self = Self {
        threshold: f64::INFINITY,
        r_plus: 0,
        r_minus: 0,
    };

    pub fn is_finite(&self) -> bool {
        self.threshold.is_finite()
    }
}

/// Scores and labels sorted by descending score (ties by index).
#[derive(Debug, Clone)]
pub(crate) struct Ranked {
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
    pub labels: Vec<bool>,
}

/// Prefix of a [`Ranked`] sequence selected by a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Cut {
    pub len: usize,
    pub r_plus: usize,
    pub r_minus: usize,
}

impl Ranked {
    pub fn new(scores: &[f64], labels: &[bool]) -> Self {
        let order = rank_scores(scores);
        Self {
            scores: order.iter().map(|&j| scores[j]).collect(),
            labels: order.iter().map(|&j| labels[j]).collect(),
            order,
        }
    }

    pub fn from_table(table: &CompetitionTable) -> Self {
        Self::new(table.scores(), table.labels())
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    /// Deepest tie-block boundary whose prefix is feasible at `level`.
    pub fn cut(&self, level: f64) -> Option<Cut> {
        let p = self.len();
        let (mut plus, mut minus) = (0usize, 0usize);
        let mut best = None;
        for k in 0..p {
            if self.labels[k] {
                plus += 1;
            } else {
                minus += 1;
            }
            let block_end = k + 1 == p || self.scores[k + 1] < self.scores[k];
            if block_end && within_level(minus + 1, plus, level) {
                best = Some(Cut {
                    len: k + 1,
                    r_plus: plus,
                    r_minus: minus,
                });
            }
        }
        best
    }

    pub fn threshold(&self, level: f64) -> ThresholdResult {
        match self.cut(level) {
            Some(c) => ThresholdResult {
                threshold: self.scores[c.len - 1],
                r_plus: c.r_plus,
                r_minus: c.r_minus,
            },
            None => ThresholdResult::NONE,
        }
    }
}

/// Smallest observed score `t` with `(R_-(t) + 1) / max(R_+(t), 1) <= level`.
pub fn competition_threshold(table: &CompetitionTable, level: f64) -> ThresholdResult {
    Ranked::from_table(table).threshold(level)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(alpha))
    }
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSymmetry(r))
    }
}

/// Accumulates per-group outcomes into a [`RejectionReport`].
struct ReportBuilder {
    report: RejectionReport,
    false_rej: usize,
    alternatives: Option<usize>,
}

impl ReportBuilder {
    fn new(with_truth: bool) -> Self {
        Self {
            report: RejectionReport::empty(),
            false_rej: 0,
            alternatives: with_truth.then_some(0),
        }
    }

    /// Rejects the label-1 rows among `ranked.order[start..end]`.
    fn push(
        &mut self,
        key: &str,
        table: &CompetitionTable,
        ranked: &Ranked,
        span: Option<(usize, usize)>,
        level: f64,
    ) {
        let truth = table.truth();
        if let (Some(alt), Some(t)) = (self.alternatives.as_mut(), truth) {
            *alt += t.iter().filter(|&&h| h).count();
        }
        let (mut r_plus, mut r_minus) = (0, 0);
        let mut threshold = f64::INFINITY;
        if let Some((start, end)) = span {
            threshold = ranked.scores[end - 1];
            for k in start..end {
                let row = ranked.order[k];
                if !ranked.labels[k] {
                    r_minus += 1;
                    continue;
                }
                r_plus += 1;
                if truth.is_some_and(|t| !t[row]) {
                    self.false_rej += 1;
                }
                self.report.rejected.push(Rejection {
                    group: key.to_string(),
                    id: table.ids()[row].clone(),
                    score: table.scores()[row],
                });
            }
        }
        self.report.groups.push(GroupSummary {
            key: key.to_string(),
            threshold,
            level,
            r_plus,
            r_minus,
        });
    }

    fn finish(mut self) -> RejectionReport {
        if let Some(alt) = self.alternatives {
            let (fdp, tdp) = proportions(self.false_rej, self.report.rejected.len(), alt);
            self.report.fdp = Some(fdp);
            self.report.tdp = Some(tdp);
        }
        self.report
    }
}

/// The single competition filter at level `alpha / r`.
pub fn competition_filter(table: &CompetitionTable, alpha: f64, r: f64) -> Result<RejectionReport> {
    check_alpha(alpha)?;
    check_r(r)?;
    let level = alpha / r;
    let ranked = Ranked::from_table(table);
    let mut builder = ReportBuilder::new(table.truth().is_some());
    let span = ranked.cut(level).map(|c| (0, c.len));
    builder.push("all", table, &ranked, span, level);
    Ok(builder.finish())
}

/// Grouped competition filter: group `i` is thresholded at its own working
/// level `alphas[i]` and the rejections are pooled.
///
/// The per-group constraints are separable and each group's rejection count
/// is nonincreasing in its threshold, so taking every group's smallest
/// feasible threshold maximizes the pooled rejection count.
pub fn gc_filter(grouped: &GroupedTable, alphas: &[f64]) -> Result<RejectionReport> {
    if alphas.len() != grouped.m() {
        return Err(Error::LengthMismatch {
            column: "alphas",
            expected: grouped.m(),
            found: alphas.len(),
        });
    }
    for &a in alphas {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidLevel(a));
        }
    }
    let with_truth = grouped.groups().iter().all(|g| g.truth().is_some());
    let mut builder = ReportBuilder::new(with_truth);
    for ((table, key), &level) in grouped.groups().iter().zip(grouped.keys()).zip(alphas) {
        let ranked = Ranked::from_table(table);
        let span = ranked.cut(level).map(|c| (0, c.len));
        builder.push(key, table, &ranked, span, level);
    }
    Ok(builder.finish())
}

/// Splits `table` by the group key assigned to each id. Keys are ordered by
/// first appearance in row order; keys without members never appear.
pub fn partition_by_key(
    table: &CompetitionTable,
    group_of: &HashMap<String, String>,
    r: f64,
) -> Result<GroupedTable> {
    let mut keys: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for (j, id) in table.ids().iter().enumerate() {
        let key = group_of
            .get(id)
            .ok_or_else(|| Error::UnmappedId(id.clone()))?;
        let s = *slot.entry(key.as_str()).or_insert_with(|| {
            keys.push(key.clone());
            rows.push(Vec::new());
            keys.len() - 1
        });
        rows[s].push(j);
    }
    let groups = rows
        .iter()
        .map(|r| table.select(r).expect("groups are nonempty"))
        .collect::<Vec<_>>();
    let m = groups.len();
    GroupedTable::new(groups, vec![r; m], keys)
}

/// Side-information grouping: partition by the key of each id, then run the
/// GC filter with one working level for every key.
pub fn agcs_filter(
    table: &CompetitionTable,
    group_of: &HashMap<String, String>,
    alpha_prime: f64,
) -> Result<RejectionReport> {
    let grouped = partition_by_key(table, group_of, 1.0)?;
    gc_filter(&grouped, &vec![alpha_prime; grouped.m()])
}

/// Maps each id to `bin{k}`, where `k` counts the edges at or below its side
/// value. `edges` must be strictly increasing.
pub fn side_bins(table: &CompetitionTable, edges: &[f64]) -> Result<HashMap<String, String>> {
    let side = table
        .side()
        .ok_or_else(|| Error::InvalidParameter("table has no side information".into()))?;
    if edges.windows(2).any(|w| !(w[0] < w[1])) || edges.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidParameter(
            "bin edges must be finite and strictly increasing".into(),
        ));
    }
    Ok(table
        .ids()
        .iter()
        .zip(side)
        .map(|(id, &s)| {
            let k = edges.partition_point(|&e| e <= s);
            (id.clone(), format!("bin{k}"))
        })
        .collect())
}

/// Strictly increasing 1-based start ranks `T_1 < ... < T_K` of contiguous
/// rank segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentPlan {
    start_ranks: Vec<usize>,
}

impl SegmentPlan {
    pub fn new(start_ranks: Vec<usize>) -> Result<Self> {
        if start_ranks.is_empty() {
            return Err(Error::MalformedPlan("no segments".into()));
        }
        if start_ranks[0] < 1 {
            return Err(Error::MalformedPlan("ranks are 1-based".into()));
        }
        if start_ranks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedPlan(
                "start ranks must be strictly increasing".into(),
            ));
        }
        Ok(Self { start_ranks })
    }

    pub fn start_ranks(&self) -> &[usize] {
        &self.start_ranks
    }

    pub fn len(&self) -> usize {
        self.start_ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.start_ranks.is_empty()
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        match self.start_ranks.last() {
            Some(&last) if last <= p => Ok(()),
            _ => Err(Error::MalformedPlan(format!(
                "last start rank exceeds table size {p}"
            ))),
        }
    }

    /// 0-based half-open rank ranges `[start, end)`.
    pub(crate) fn segments(&self, p: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let starts = &self.start_ranks;
        (0..starts.len()).map(move |s| {
            let end = starts.get(s + 1).map_or(p, |&next| next - 1);
            (starts[s] - 1, end)
        })
    }
}

/// Deepest rank `j` in `[start, end)` such that the run `start..=j` is
/// feasible at `level`; returns the exclusive end `j + 1`.
pub(crate) fn segment_stop(labels: &[bool], start: usize, end: usize, level: f64) -> Option<usize> {
    let (mut ones, mut zeros) = (0usize, 0usize);
    let mut stop = None;
    for (k, &won) in labels.iter().enumerate().take(end).skip(start) {
        if won {
            ones += 1;
        } else {
            zeros += 1;
        }
        if within_level(zeros + 1, ones, level) {
            stop = Some(k + 1);
        }
    }
    stop
}

/// Rank-segment filter: within each segment `[T_i, T_{i+1})` of the
/// descending ranking, reject the label-1 hypotheses up to the deepest rank
/// where `(#label-0 + 1) / max(#label-1, 1) <= alpha_prime`, counting from
/// the segment start.
pub fn sgo_filter(
    table: &CompetitionTable,
    plan: &SegmentPlan,
    alpha_prime: f64,
) -> Result<RejectionReport> {
    plan.validate(table.len())?;
    if !(alpha_prime > 0.0 && alpha_prime.is_finite()) {
        return Err(Error::InvalidLevel(alpha_prime));
    }
    let ranked = Ranked::from_table(table);
    let mut builder = ReportBuilder::new(table.truth().is_some());
    for (s, (start, end)) in plan.segments(table.len()).enumerate() {
        let span = segment_stop(&ranked.labels, start, end, alpha_prime).map(|stop| (start, stop));
        builder.push(&format!("segment-{}", s + 1), table, &ranked, span, alpha_prime);
    }
    Ok(builder.finish())
}

/// Both sides of the pooled-FDP decomposition at fixed per-group thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    /// `sum V+ / max(sum R+, 1)`.
    pub fdp: f64,
    /// Convex combination of the per-group estimates `(R- + 1)/R+` times
    /// `sum_A V+ / sum_A (R- + 1)`, over groups `A` with `R+ > 0`.
    pub factored: f64,
}

pub fn fdp_decomposition(grouped: &GroupedTable, thresholds: &[f64]) -> Result<Decomposition> {
    if thresholds.len() != grouped.m() {
        return Err(Error::LengthMismatch {
            column: "thresholds",
            expected: grouped.m(),
            found: thresholds.len(),
        });
    }
    let mut counts = Vec::with_capacity(grouped.m());
    for (g, &t) in grouped.groups().iter().zip(thresholds) {
        let truth = g
            .truth()
            .ok_or_else(|| Error::InvalidParameter("decomposition needs truth flags".into()))?;
        let (mut rp, mut rm, mut vp) = (0usize, 0usize, 0usize);
        for ((&w, &l), &h) in g.scores().iter().zip(g.labels()).zip(truth) {
            if w < t {
                continue;
            }
            if l {
                rp += 1;
                if !h {
                    vp += 1;
                }
            } else {
                rm += 1;
            }
        }
        counts.push((rp, rm, vp));
    }
    let total_rp: usize = counts.iter().map(|c| c.0).sum();
    let total_vp: usize = counts.iter().map(|c| c.2).sum();
    let fdp = total_vp as f64 / total_rp.max(1) as f64;
    if total_rp == 0 {
        return Ok(Decomposition { fdp, factored: 0.0 });
    }
    let active = counts.iter().filter(|c| c.0 > 0);
    let weighted: f64 = active
        .clone()
        .map(|&(rp, rm, _)| (rm as f64 + 1.0) / rp as f64 * (rp as f64 / total_rp as f64))
        .sum();
    let vp_a: usize = active.clone().map(|c| c.2).sum();
    let denom_a: f64 = active.map(|c| c.1 as f64 + 1.0).sum();
    Ok(Decomposition {
        fdp,
        factored: weighted * (vp_a as f64 / denom_a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(scores: &[f64], labels: &[u8]) -> CompetitionTable {
        CompetitionTable::from_scores(scores.to_vec(), labels.iter().map(|&l| l == 1).collect())
            .unwrap()
    }

    /// Brute force over every observed score: the smallest feasible one.
    fn threshold_oracle(scores: &[f64], labels: &[bool], level: f64) -> f64 {
        let mut best = f64::INFINITY;
        for &t in scores {
            let plus = scores.iter().zip(labels).filter(|(&w, &l)| w >= t && l).count();
            let minus = scores.iter().zip(labels).filter(|(&w, &l)| w >= t && !l).count();
            if (minus + 1) as f64 <= level * plus.max(1) as f64 * (1.0 + 1e-12) && t < best {
                best = t;
            }
        }
        best
    }

    #[test]
    fn threshold_examples() {
        // the deepest prefix is feasible: (0 + 1) / 3 <= 0.5
        let t = table(&[3.0, 2.0, 1.0], &[1, 1, 1]);
        let res = competition_threshold(&t, 0.5);
        assert_eq!((res.threshold, res.r_plus, res.r_minus), (1.0, 3, 0));
        assert_eq!(competition_threshold(&t, 0.4).threshold, 1.0);
        assert_eq!(competition_threshold(&t, 0.3), ThresholdResult::NONE);

        let t = table(&[3.0, 2.0, 1.0], &[1, 1, 0]);
        assert_eq!(competition_threshold(&t, 0.5).threshold, 2.0);

        let t = table(&[3.0, 2.0, 1.0], &[0, 0, 0]);
        assert_eq!(competition_threshold(&t, 0.99), ThresholdResult::NONE);

        let t = table(&[4.5], &[1]);
        let res = competition_threshold(&t, 1.0);
        assert_eq!((res.threshold, res.r_plus), (4.5, 1));
    }

    #[test]
    fn ties_enter_the_threshold_together() {
        // at t = 2 both tied rows count, giving (1 + 1) / 2 = 1
        let t = table(&[3.0, 2.0, 2.0], &[1, 0, 1]);
        assert_eq!(competition_threshold(&t, 1.0).threshold, 2.0);
        assert_eq!(competition_threshold(&t, 0.9).threshold, f64::INFINITY);
    }

    #[test]
    fn filter_examples() {
        let t = table(&[3.0, 2.0, 1.0], &[1, 1, 1]);
        let rep = competition_filter(&t, 0.5, 1.0).unwrap();
        assert_eq!(rep.rejected_ids(), vec!["0", "1", "2"]);
        assert_eq!(rep.groups[0].threshold, 1.0);
        // level 0.25 is below every attainable ratio 1, 1/2, 1/3
        let rep = competition_filter(&t, 0.5, 2.0).unwrap();
        assert!(rep.is_empty());
        assert_eq!(rep.groups[0].threshold, f64::INFINITY);
        let t = table(&[3.0, 2.0, 1.0], &[1, 1, 0]);
        let rep = competition_filter(&t, 1.0, 2.0).unwrap();
        assert_eq!(rep.rejected_ids(), vec!["0", "1"]);
        let none = competition_filter(&table(&[1.0, 2.0], &[0, 0]), 0.5, 1.0).unwrap();
        assert!(none.is_empty());
        assert!(competition_filter(&t, 0.0, 1.0).is_err());
        assert!(competition_filter(&t, 0.5, -1.0).is_err());
    }

    #[test]
    fn gc_filter_example() {
        let g1 = table(&[3.0, 2.0, 1.0], &[1, 1, 0]);
        let g2 = CompetitionTable::new(vec!["x".into(), "y".into()], vec![9.0, 8.0], vec![false, true])
            .unwrap();
        let grouped = GroupedTable::uniform(vec![g1, g2], 1.0).unwrap();
        let rep = gc_filter(&grouped, &[0.5, 0.5]).unwrap();
        assert_eq!(rep.len(), 2);
        assert_eq!(rep.groups[0].threshold, 2.0);
        assert_eq!(rep.groups[1].threshold, f64::INFINITY);
        assert!(matches!(
            gc_filter(&grouped, &[0.5]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn single_group_gc_matches_threshold() {
        let t = table(&[5.0, 4.0, 3.0, 2.0, 1.0], &[1, 1, 0, 1, 1]);
        let grouped = GroupedTable::uniform(vec![t.clone()], 1.0).unwrap();
        let rep = gc_filter(&grouped, &[0.7]).unwrap();
        let th = competition_threshold(&t, 0.7);
        assert_eq!(rep.groups[0].threshold, th.threshold);
        assert_eq!(rep.len(), th.r_plus);
    }

    #[test]
    fn report_carries_fdp_when_truth_known() {
        let t = table(&[3.0, 2.0, 1.0], &[1, 1, 0])
            .with_truth(vec![false, true, true])
            .unwrap();
        let rep = competition_filter(&t, 0.5, 1.0).unwrap();
        assert_eq!(rep.fdp, Some(0.5));
        assert_eq!(rep.tdp, Some(0.5));
        let rep = competition_filter(&table(&[1.0], &[1]), 0.5, 1.0).unwrap();
        assert_eq!(rep.fdp, None);
    }

    #[test]
    fn agcs_examples() {
        let t = table(&[6.0, 5.0, 4.0, 3.0, 2.0, 1.0], &[1, 1, 0, 1, 1, 1])
            .with_side(vec![1.0, -1.0, 2.0, -2.0, 3.0, -3.0])
            .unwrap();
        let constant: HashMap<String, String> =
            t.ids().iter().map(|id| (id.clone(), "k".to_string())).collect();
        let rep = agcs_filter(&t, &constant, 0.5).unwrap();
        assert_eq!(rep.len(), competition_threshold(&t, 0.5).r_plus);

        // bins with no members are never formed
        let bins = side_bins(&t, &[-10.0, 0.0, 50.0]).unwrap();
        let rep = agcs_filter(&t, &bins, 0.5).unwrap();
        let keys: Vec<_> = rep.groups.iter().map(|g| g.key.as_str()).collect();
        assert_eq!(keys, vec!["bin2", "bin1"]);

        let mut partial = constant.clone();
        partial.remove("3");
        assert_eq!(
            agcs_filter(&t, &partial, 0.5).unwrap_err(),
            Error::UnmappedId("3".into())
        );
    }

    #[test]
    fn sgo_examples() {
        let scores = [6.0, 5.0, 4.0, 3.0, 2.0, 1.0];
        let t = table(&scores, &[1, 1, 0, 1, 1, 1]);
        let plan = SegmentPlan::new(vec![1, 4]).unwrap();
        let rep = sgo_filter(&t, &plan, 0.5).unwrap();
        assert_eq!(rep.groups[0].r_plus, 2);
        assert_eq!(rep.groups[1].r_plus, 3);
        assert_eq!(rep.len(), 5);

        let zeros = table(&scores, &[0; 6]);
        assert!(sgo_filter(&zeros, &plan, 0.5).unwrap().is_empty());

        assert!(SegmentPlan::new(vec![]).is_err());
        assert!(SegmentPlan::new(vec![0, 2]).is_err());
        assert!(SegmentPlan::new(vec![3, 2]).is_err());
        let long = SegmentPlan::new(vec![1, 7]).unwrap();
        assert!(matches!(sgo_filter(&t, &long, 0.5), Err(Error::MalformedPlan(_))));
    }

    #[test]
    fn decomposition_with_no_rejections_is_zero() {
        let t = table(&[1.0, 2.0], &[0, 1]).with_truth(vec![false, false]).unwrap();
        let grouped = GroupedTable::uniform(vec![t], 1.0).unwrap();
        let d = fdp_decomposition(&grouped, &[f64::INFINITY]).unwrap();
        assert_eq!((d.fdp, d.factored), (0.0, 0.0));
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        (1usize..30).prop_flat_map(|p| {
            (
                prop::collection::vec((0i32..12).prop_map(f64::from), p),
                prop::collection::vec(any::<bool>(), p),
            )
        })
    }

    proptest! {
        #[test]
        fn threshold_matches_brute_force((scores, labels) in instance(), level in 0.05f64..1.5) {
            let t = CompetitionTable::from_scores(scores.clone(), labels.clone()).unwrap();
            let res = competition_threshold(&t, level);
            prop_assert_eq!(res.threshold, threshold_oracle(&scores, &labels, level));
            if res.is_finite() {
                prop_assert!(within_level(res.r_minus + 1, res.r_plus, level));
                prop_assert!(scores.contains(&res.threshold));
            }
        }

        #[test]
        fn shrinking_level_never_enlarges((scores, labels) in instance(), a in 0.05f64..1.0, b in 0.05f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let t = CompetitionTable::from_scores(scores, labels).unwrap();
            let grouped = GroupedTable::uniform(vec![t], 1.0).unwrap();
            let small = gc_filter(&grouped, &[lo]).unwrap();
            let large = gc_filter(&grouped, &[hi]).unwrap();
            let large_ids: Vec<_> = large.rejected_ids();
            prop_assert!(small.rejected_ids().iter().all(|id| large_ids.contains(id)));
        }

        #[test]
        fn single_segment_is_the_competition_filter(labels in prop::collection::vec(any::<bool>(), 1..40), level in 0.1f64..1.0) {
            let p = labels.len();
            let scores: Vec<f64> = (0..p).map(|j| (p - j) as f64).collect();
            let t = CompetitionTable::from_scores(scores, labels).unwrap();
            let plan = SegmentPlan::new(vec![1]).unwrap();
            let rep = sgo_filter(&t, &plan, level).unwrap();
            prop_assert_eq!(rep.len(), competition_threshold(&t, level).r_plus);
        }
    }
}
