//! Working levels `alpha'` for grouped competition filters.
//!
//! Every rule maps a target FDR `alpha` and a group structure to the level
//! at which each group's competition threshold is chosen. With `q = r/(1+r)`
//! the per-group null excess is bounded by a truncated geometric variable
//! with `P(k) = q^k/(1+r)` below the cap `p` and `q^p` at the cap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GroupedTable;
use crate::optimize::maximize;

const GRID: usize = 1000;
const REL_TOL: f64 = 1e-10;
/// Terms more than this many nats below the peak are dropped from `ln c(a)`.
const WINDOW_NATS: f64 = 60.0;

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

fn check_count(what: &str, n: usize) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be at least 1")))
    }
}

fn ln_q(r: f64) -> f64 {
    (r / (1.0 + r)).ln()
}

/// `alpha / m`.
pub fn alpha_bonferroni(m: usize, alpha: f64) -> Result<f64> {
    check_count("m", m)?;
    check_alpha(alpha)?;
    Ok(alpha / m as f64)
}

/// Exponential-moment rule: the largest
/// `lambda * alpha / (ln m - ln(1+r) - ln(1 - e^lambda q))` over
/// `lambda in (0, -ln q)`, floored at `alpha / (r m)`.
pub fn alpha_exp(m: usize, alpha: f64, r: f64) -> Result<f64> {
    check_count("m", m)?;
    check_alpha(alpha)?;
    check_r(r)?;
    if m == 1 {
        return Ok(alpha);
    }
    let (lm, lq, l1r) = ((m as f64).ln(), ln_q(r), r.ln_1p());
    let g = |lambda: f64| {
        let denom = lm - l1r - (-(lambda + lq).exp()).ln_1p();
        lambda * alpha / denom
    };
    // open interval: stay one grid step inside both ends
    let upper = -lq;
    let h = upper / (GRID + 1) as f64;
    let opt = maximize(g, h, upper - h, GRID, REL_TOL);
    Ok(opt.value.max(alpha / (r * m as f64)))
}

/// `ln c(a)` with `c(a) = sum_{k<cap} q^k/(1+r) k^a + q^cap cap^a`; the
/// `k = 0` term vanishes for `a >= 1`.
pub(crate) fn ln_moment(a: f64, r: f64, cap: usize) -> f64 {
    let lq = ln_q(r);
    let l1r = r.ln_1p();
    let cap_term = cap as f64 * lq + a * (cap as f64).ln();
    if cap <= 1 {
        return cap_term;
    }
    // k -> k ln q + a ln k is concave, so terms fall off monotonically on
    // both sides of the peak
    let body = |k: usize| k as f64 * lq + a * (k as f64).ln();
    let peak = ((a / -lq).round() as usize).clamp(1, cap - 1);
    let top = body(peak);
    let mut sum = 0.0;
    let mut k = peak;
    loop {
        let t = body(k) - top;
        if t < -WINDOW_NATS {
            break;
        }
        sum += t.exp();
        if k == 1 {
            break;
        }
        k -= 1;
    }
    for k in peak + 1..cap {
        let t = body(k) - top;
        if t < -WINDOW_NATS {
            break;
        }
        sum += t.exp();
    }
    let body_ln = top - l1r + sum.ln();
    let hi = body_ln.max(cap_term);
    hi + ((body_ln - hi).exp() + (cap_term - hi).exp()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAlpha {
    pub alpha_prime: f64,
    /// Maximizing exponent.
    pub a: f64,
}

/// Power-moment rule: `alpha * max_{a in [1, m]} (m c(a))^{-1/a}`.
pub fn alpha_power(m: usize, alpha: f64, r: f64, p: usize) -> Result<PowerAlpha> {
    check_count("m", m)?;
    check_count("p", p)?;
    check_alpha(alpha)?;
    check_r(r)?;
    let lm = (m as f64).ln();
    // optimize over u = ln a so the grid is dense where the peak sits
    let phi = |u: f64| {
        let a = u.exp();
        -(lm + ln_moment(a, r, p)) / a
    };
    let opt = maximize(phi, 0.0, lm, GRID, REL_TOL);
    Ok(PowerAlpha {
        alpha_prime: alpha * opt.value.exp(),
        a: opt.x.exp(),
    })
}

/// Expected maximum of `m` independent truncated geometric variables,
/// `sum_{k=1}^{cap} (1 - (1 - q^k)^m)`.
pub fn expected_max_truncated_geometric(m: usize, r: f64, cap: usize) -> f64 {
    let lq = ln_q(r);
    let q = lq.exp();
    let mf = m as f64;
    let mut sum = 0.0;
    for k in 1..=cap {
        let qk = (k as f64 * lq).exp();
        let term = -(mf * (-qk).ln_1p()).exp_m1();
        sum += term;
        // remaining terms are below m q^k / (1 - q)
        if mf * qk * q / (1.0 - q) < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Independent-groups rule: `alpha / E[max of m truncated geometrics]`.
pub fn alpha_independent(m: usize, alpha: f64, r: f64, p: usize) -> Result<f64> {
    check_count("m", m)?;
    check_count("p", p)?;
    check_alpha(alpha)?;
    check_r(r)?;
    Ok(alpha / expected_max_truncated_geometric(m, r, p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedAlpha {
    pub alphas: Vec<f64>,
    pub a: f64,
}

/// Weighted rule for groups of unequal size or symmetry:
/// `alpha'_i = alpha w_i (sum_j c_j(a) w_j^a)^{-1/a}` at the best `a in [1, m]`.
pub fn alpha_weighted(p: &[usize], r: &[f64], w: &[f64], alpha: f64) -> Result<WeightedAlpha> {
    let m = p.len();
    check_count("m", m)?;
    check_alpha(alpha)?;
    for (column, len) in [("r", r.len()), ("weights", w.len())] {
        if len != m {
            return Err(Error::LengthMismatch {
                column,
                expected: m,
                found: len,
            });
        }
    }
    for &pi in p {
        check_count("p", pi)?;
    }
    for &ri in r {
        check_r(ri)?;
    }
    for &wi in w {
        if !(wi > 0.0 && wi.is_finite()) {
            return Err(Error::NonPositive {
                what: "weight",
                value: wi,
            });
        }
    }
    // groups sharing (p, r) share c_j(a)
    let mut classes: Vec<(usize, f64, Vec<f64>)> = Vec::new();
    for j in 0..m {
        match classes.iter_mut().find(|c| c.0 == p[j] && c.1 == r[j]) {
            Some(c) => c.2.push(w[j].ln()),
            None => classes.push((p[j], r[j], vec![w[j].ln()])),
        }
    }
    let psi = |u: f64| {
        let a = u.exp();
        let logs: Vec<f64> = classes
            .iter()
            .flat_map(|(pj, rj, lw)| {
                let lc = ln_moment(a, *rj, *pj);
                lw.iter().map(move |l| lc + a * l)
            })
            .collect();
        let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = hi + logs.iter().map(|l| (l - hi).exp()).sum::<f64>().ln();
        -lse / a
    };
    let opt = maximize(psi, 0.0, (m as f64).ln(), GRID, REL_TOL);
    let scale = alpha * opt.value.exp();
    Ok(WeightedAlpha {
        alphas: w.iter().map(|wi| wi * scale).collect(),
        a: opt.x.exp(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CLower {
    pub c: f64,
    pub eps_star: f64,
}

/// `1 / min_{eps > 0} [((1+eps) r v 1) + r / ln((1+eps) v 1/r)]`, searched on
/// `(0, 100)`.
pub fn c_lower(r: f64) -> Result<CLower> {
    check_r(r)?;
    let h = |eps: f64| {
        let u = 1.0 + eps;
        (u * r).max(1.0) + r / u.max(1.0 / r).ln()
    };
    let step = 100.0 / (GRID + 1) as f64;
    let opt = maximize(|eps| -h(eps), step, 100.0 - step, GRID, 1e-12);
    Ok(CLower {
        c: -1.0 / opt.value,
        eps_star: opt.x,
    })
}

/// Rule selecting the working levels of a grouped filter.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum CorrectionRule {
    Bonferroni,
    Exp,
    #[default]
    Power,
    Independent,
    Weighted { weights: Vec<f64> },
    Fixed { value: f64 },
}

impl CorrectionRule {
    /// One level shared by `m` groups of size `p` with symmetry `r`. Weights
    /// are ignored here since they are tied to a known group count.
    pub fn uniform(&self, m: usize, alpha: f64, r: f64, p: usize) -> Result<f64> {
        match self {
            Self::Bonferroni => Ok(alpha_bonferroni(m, alpha)? / checked_r(r)?),
            Self::Exp => alpha_exp(m, alpha, r),
            Self::Power | Self::Weighted { .. } => Ok(alpha_power(m, alpha, r, p)?.alpha_prime),
            Self::Independent => alpha_independent(m, alpha, r, p),
            Self::Fixed { value } => fixed(*value),
        }
    }
}

fn checked_r(r: f64) -> Result<f64> {
    check_r(r).map(|_| r)
}

fn fixed(value: f64) -> Result<f64> {
    if value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(Error::InvalidLevel(value))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionSpec {
    pub alpha: f64,
    #[serde(flatten)]
    pub rule: CorrectionRule,
}

impl CorrectionSpec {
    pub fn new(alpha: f64, rule: CorrectionRule) -> Self {
        Self { alpha, rule }
    }

    /// Per-group levels for groups of the given sizes and symmetry parameters.
    ///
    /// Bonferroni divides each group's share by its own `r_i`. The exp and
    /// independent rules use the largest `r_i` (and largest size), which
    /// dominates every group stochastically. Power with unequal groups falls
    /// back to the weighted rule with unit weights.
    pub fn alphas(&self, sizes: &[usize], rs: &[f64]) -> Result<Vec<f64>> {
        let m = sizes.len();
        check_count("m", m)?;
        if rs.len() != m {
            return Err(Error::LengthMismatch {
                column: "r",
                expected: m,
                found: rs.len(),
            });
        }
        for &r in rs {
            check_r(r)?;
        }
        let alpha = self.alpha;
        let r_max = rs.iter().cloned().fold(f64::MIN, f64::max);
        let p_max = *sizes.iter().max().expect("m >= 1");
        let homogeneous = sizes.iter().all(|&p| p == sizes[0]) && rs.iter().all(|&r| r == rs[0]);
        match &self.rule {
            CorrectionRule::Bonferroni => {
                let base = alpha_bonferroni(m, alpha)?;
                Ok(rs.iter().map(|r| base / r).collect())
            }
            CorrectionRule::Exp => Ok(vec![alpha_exp(m, alpha, r_max)?; m]),
            CorrectionRule::Power if homogeneous => {
                Ok(vec![alpha_power(m, alpha, rs[0], sizes[0])?.alpha_prime; m])
            }
            CorrectionRule::Power => Ok(alpha_weighted(sizes, rs, &vec![1.0; m], alpha)?.alphas),
            CorrectionRule::Independent => Ok(vec![alpha_independent(m, alpha, r_max, p_max)?; m]),
            CorrectionRule::Weighted { weights } => Ok(alpha_weighted(sizes, rs, weights, alpha)?.alphas),
            CorrectionRule::Fixed { value } => {
                check_alpha(alpha)?;
                Ok(vec![fixed(*value)?; m])
            }
        }
    }

    pub fn for_table(&self, grouped: &GroupedTable) -> Result<Vec<f64>> {
        self.alphas(&grouped.sizes(), grouped.r())
    }
}
