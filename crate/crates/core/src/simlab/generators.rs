//! Synthetic competition data: the heterogeneous Gamma and Gaussian group
//! models, label bias and cross-group dependence.
//!
//! In every group the alternatives occupy the tail indices `p0+1..=p`.
//! Scores are `W = max(X, X~)` with label `L = 1{X >= X~}`.

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Gamma, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CompetitionTable, GroupedTable};

fn ceil_div(i: usize, d: usize) -> usize {
    i.div_ceil(d)
}

/// Shape `theta_i = 2 ceil(i/5) + 1` and `beta_i = 3i - 12 ceil(i/4) + 12`
/// for the 1-based group index `i`.
pub fn gamma_params(i: usize) -> (f64, f64) {
    let theta = 2 * ceil_div(i, 5) + 1;
    let beta = 3 * i + 12 - 12 * ceil_div(i, 4);
    (theta as f64, beta as f64)
}

/// Mean shift `mu_i0` (by `i mod 5`) and variance `sigma_i^2` (by
/// `ceil(i/5)`, cycling with period 4) for the 1-based group index `i`.
pub fn gaussian_params(i: usize) -> (f64, f64) {
    const MU: [f64; 5] = [5.0, 3.0, 3.5, 3.75, 4.0];
    const SIGMA2: [f64; 4] = [0.5, 1.0, 4.0, 25.0];
    (MU[i % 5], SIGMA2[(ceil_div(i, 5) - 1) % 4])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    /// `X - mu h ~ Gamma(theta_i, beta_i)` with `beta_i` a scale, or a rate
    /// when `rate` is set.
    Gamma {
        #[serde(default = "unit")]
        mu: f64,
        #[serde(default)]
        rate: bool,
    },
    /// `X ~ N(mu_i0 h, Sigma_i)` with an AR(1) block of correlation `rho`
    /// among the alternatives.
    Gaussian {
        #[serde(default = "default_rho")]
        rho: f64,
    },
}

fn unit() -> f64 {
    1.0
}

fn default_rho() -> f64 {
    0.8
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Standard,
    /// Losing labels flip to wins with probability `(r-1)/(r+1)`.
    Bias { r: f64 },
    /// Shared perturbation across groups (Gaussian model only).
    Dependent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(flatten)]
    pub model: Model,
    pub m: usize,
    pub p: usize,
    pub p0: usize,
    #[serde(default)]
    pub variant: Variant,
}

impl ModelConfig {
    /// Twenty Gaussian groups of 1000 with 700 nulls.
    pub fn gaussian_default() -> Self {
        Self {
            model: Model::Gaussian { rho: default_rho() },
            m: 20,
            p: 1000,
            p0: 700,
            variant: Variant::Standard,
        }
    }

    pub fn gamma_default() -> Self {
        Self {
            model: Model::Gamma { mu: 1.0, rate: false },
            ..Self::gaussian_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.p == 0 || self.p0 > self.p {
            return Err(Error::InvalidParameter(format!(
                "need m >= 1 and 0 <= p0 <= p >= 1, got m={} p={} p0={}",
                self.m, self.p, self.p0
            )));
        }
        if let Model::Gaussian { rho } = self.model {
            if !(rho > -1.0 && rho < 1.0) {
                return Err(Error::InvalidParameter(format!("rho must lie in (-1, 1), got {rho}")));
            }
        }
        match (&self.variant, &self.model) {
            (Variant::Bias { r }, _) if !(*r >= 1.0 && r.is_finite()) => Err(Error::InvalidSymmetry(*r)),
            (Variant::Dependent, Model::Gamma { .. }) => Err(Error::InvalidParameter(
                "the dependent variant needs the Gaussian model".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Symmetry parameter of the generated statistics.
    pub fn r(&self) -> f64 {
        match self.variant {
            Variant::Bias { r } => r,
            _ => 1.0,
        }
    }
}

/// Raw statistic pairs of one group before competition.
#[derive(Debug, Clone, PartialEq)]
pub struct RawGroup {
    pub x: Vec<f64>,
    pub x_tilde: Vec<f64>,
    pub truth: Vec<bool>,
}

impl RawGroup {
    /// Competition table with ids `"{group}:{j}"`, both 1-based.
    pub fn to_table(&self, group: usize) -> CompetitionTable {
        let p = self.x.len();
        let ids = (1..=p).map(|j| format!("{group}:{j}")).collect();
        let scores = self.x.iter().zip(&self.x_tilde).map(|(a, b)| a.max(*b)).collect();
        let labels = self.x.iter().zip(&self.x_tilde).map(|(a, b)| a >= b).collect();
        CompetitionTable::new(ids, scores, labels)
            .and_then(|t| t.with_truth(self.truth.clone()))
            .expect("generated columns are consistent")
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Unit-variance Gaussian vector: iid on `..p0`, AR(1) with correlation
/// `rho` on `p0..`.
pub(crate) fn block_noise<R: Rng + ?Sized>(p: usize, p0: usize, rho: f64, rng: &mut R) -> Vec<f64> {
    let mut z: Vec<f64> = (0..p).map(|_| normal(rng)).collect();
    let innovation = (1.0 - rho * rho).sqrt();
    for j in p0 + 1..p {
        z[j] = rho * z[j - 1] + innovation * z[j];
    }
    z
}

fn truth(p: usize, p0: usize) -> Vec<bool> {
    (0..p).map(|j| j >= p0).collect()
}

/// Draws the raw pairs of every group.
pub fn draw_raw<R: Rng + ?Sized>(config: &ModelConfig, rng: &mut R) -> Result<Vec<RawGroup>> {
    config.validate()?;
    let (p, p0) = (config.p, config.p0);
    let mut groups = Vec::with_capacity(config.m);
    for i in 1..=config.m {
        let group = match config.model {
            Model::Gamma { mu, rate } => {
                let (theta, beta) = gamma_params(i);
                let scale = if rate { 1.0 / beta } else { beta };
                let dist = Gamma::new(theta, scale)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                let x = (0..p)
                    .map(|j| dist.sample(rng) + if j >= p0 { mu } else { 0.0 })
                    .collect();
                let x_tilde = (0..p).map(|_| dist.sample(rng)).collect();
                RawGroup { x, x_tilde, truth: truth(p, p0) }
            }
            Model::Gaussian { rho } => {
                let (mu, sigma2) = gaussian_params(i);
                let sigma = sigma2.sqrt();
                let x = block_noise(p, p0, rho, rng)
                    .into_iter()
                    .enumerate()
                    .map(|(j, z)| sigma * z + if j >= p0 { mu } else { 0.0 })
                    .collect();
                let x_tilde = block_noise(p, p0, rho, rng)
                    .into_iter()
                    .map(|z| sigma * z)
                    .collect();
                RawGroup { x, x_tilde, truth: truth(p, p0) }
            }
        };
        groups.push(group);
    }
    Ok(groups)
}

/// Per-index perturbation shared by all groups.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedShock {
    pub v: Vec<f64>,
    pub z: Vec<f64>,
    pub z_tilde: Vec<f64>,
}

impl SharedShock {
    /// `v_j ~ U(-0.1, 0.1)`; `Z` and `Z~` are unit-variance with an AR(1)
    /// block of correlation `rho` beyond `p0`.
    pub fn draw<R: Rng + ?Sized>(p: usize, p0: usize, rho: f64, rng: &mut R) -> Self {
        let u = Uniform::new(-0.1, 0.1).expect("valid range");
        let v = (0..p).map(|_| u.sample(rng)).collect();
        let z = block_noise(p, p0, rho, rng);
        let z_tilde = block_noise(p, p0, rho, rng);
        Self { v, z, z_tilde }
    }
}

/// `X' = sqrt|1 - v^2| X + (-1)^j v sigma_i Z + v mu_i0 1{j > p0}` and
/// `X~' = sqrt|1 - v^2| X~ + (-1)^j v sigma_i Z~` with 1-based `j`, where
/// `(mu_i0, sigma_i)` come from `params[i]`.
pub fn dependent_transform(
    groups: &mut [RawGroup],
    params: &[(f64, f64)],
    p0: usize,
    shock: &SharedShock,
) -> Result<()> {
    if params.len() != groups.len() {
        return Err(Error::LengthMismatch {
            column: "params",
            expected: groups.len(),
            found: params.len(),
        });
    }
    for (g, &(mu0, sigma)) in groups.iter_mut().zip(params) {
        if g.x.len() != shock.v.len() {
            return Err(Error::LengthMismatch {
                column: "shock",
                expected: g.x.len(),
                found: shock.v.len(),
            });
        }
        for j in 0..g.x.len() {
            let v = shock.v[j];
            let keep = (1.0 - v * v).abs().sqrt();
            // 1-based index j + 1
            let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
            let shift = if j >= p0 { v * mu0 } else { 0.0 };
            g.x[j] = keep * g.x[j] + sign * v * sigma * shock.z[j] + shift;
            g.x_tilde[j] = keep * g.x_tilde[j] + sign * v * sigma * shock.z_tilde[j];
        }
    }
    Ok(())
}

/// Flips each losing label to a win with probability `(r-1)/(r+1)`, so
/// nulls win with probability `r/(1+r)`.
pub fn bias_labels<R: Rng + ?Sized>(table: CompetitionTable, r: f64, rng: &mut R) -> Result<CompetitionTable> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::InvalidSymmetry(r));
    }
    let flip = Bernoulli::new((r - 1.0) / (r + 1.0)).expect("probability in [0, 1)");
    let labels = table
        .labels()
        .iter()
        .map(|&l| l || flip.sample(rng))
        .collect();
    table.with_labels(labels)
}

/// One grouped dataset drawn from `config`.
pub fn generate<R: Rng + ?Sized>(config: &ModelConfig, rng: &mut R) -> Result<GroupedTable> {
    let mut raw = draw_raw(config, rng)?;
    if let (Variant::Dependent, Model::Gaussian { rho }) = (&config.variant, &config.model) {
        let params: Vec<(f64, f64)> = (1..=config.m)
            .map(|i| {
                let (mu, s2) = gaussian_params(i);
                (mu, s2.sqrt())
            })
            .collect();
        let shock = SharedShock::draw(config.p, config.p0, *rho, rng);
        dependent_transform(&mut raw, &params, config.p0, &shock)?;
    }
    let mut tables = Vec::with_capacity(config.m);
    for (i, g) in raw.iter().enumerate() {
        let t = g.to_table(i + 1);
        tables.push(match config.variant {
            Variant::Bias { r } => bias_labels(t, r, rng)?,
            _ => t,
        });
    }
    GroupedTable::uniform(tables, config.r())
}

/// Single group with iid `N(0, 1)` nulls and `N(mu_j, 1)` alternatives,
/// `mu_j ~ U(lo, hi)`, label-biased to symmetry `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftModel {
    pub p: usize,
    pub p0: usize,
    pub signal: (f64, f64),
    pub r: f64,
}

impl ShiftModel {
    pub fn draw<R: Rng + ?Sized>(&self, group: usize, rng: &mut R) -> Result<CompetitionTable> {
        if self.p == 0 || self.p0 > self.p || !(self.signal.0 <= self.signal.1) {
            return Err(Error::InvalidParameter("invalid shift model".into()));
        }
        let signal = Uniform::new_inclusive(self.signal.0, self.signal.1)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let x = (0..self.p)
            .map(|j| normal(rng) + if j >= self.p0 { signal.sample(rng) } else { 0.0 })
            .collect();
        let x_tilde = (0..self.p).map(|_| normal(rng)).collect();
        let raw = RawGroup {
            x,
            x_tilde,
            truth: truth(self.p, self.p0),
        };
        bias_labels(raw.to_table(group), self.r, rng)
    }
}
