//! Command parameters. Every subcommand's flags double as its on-disk JSON
//! form, so `run --config` replays any invocation.

use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use compfdr::corrections::CorrectionRule;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    Bonferroni,
    Exp,
    #[default]
    Power,
    Independent,
    Weighted,
    Fixed,
}

#[derive(Args, Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RuleArgs {
    /// Correction rule for the per-group working level
    #[arg(long, value_enum, default_value_t = RuleName::Power)]
    #[serde(default)]
    pub rule: RuleName,
    /// Working level used by `--rule fixed`
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// Group weights used by `--rule weighted`, in group order
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<f64>,
}

impl RuleArgs {
    pub fn rule(&self) -> Result<CorrectionRule> {
        Ok(match self.rule {
            RuleName::Bonferroni => CorrectionRule::Bonferroni,
            RuleName::Exp => CorrectionRule::Exp,
            RuleName::Power => CorrectionRule::Power,
            RuleName::Independent => CorrectionRule::Independent,
            RuleName::Weighted => {
                if self.weights.is_empty() {
                    return Err(CliError::Config("--rule weighted needs --weights".into()));
                }
                CorrectionRule::Weighted {
                    weights: self.weights.clone(),
                }
            }
            RuleName::Fixed => CorrectionRule::Fixed {
                value: self
                    .value
                    .ok_or_else(|| CliError::Config("--rule fixed needs --value".into()))?,
            },
        })
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterArgs {
    /// Input table (TSV with id, score, label)
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    /// Symmetry parameter; the filter runs at alpha / r
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub r: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcArgs {
    /// Input table with a `group` column
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    /// Symmetry parameter shared by all groups
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub r: f64,
    /// Per-group override `KEY=R`, repeatable
    #[arg(long = "group-r")]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub group_r: Vec<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub rule: RuleArgs,
}

impl GcArgs {
    /// Symmetry of each key, applying the `KEY=R` overrides.
    pub fn r_lookup(&self) -> Result<impl Fn(&str) -> f64> {
        let mut overrides = Vec::with_capacity(self.group_r.len());
        for entry in &self.group_r {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--group-r expects KEY=R, got `{entry}`")))?;
            let r: f64 = value
                .parse()
                .map_err(|_| CliError::Config(format!("--group-r value `{value}` is not a number")))?;
            overrides.push((key.to_string(), r));
        }
        let base = self.r;
        Ok(move |k: &str| {
            overrides
                .iter()
                .rev()
                .find(|(key, _)| key == k)
                .map_or(base, |(_, r)| *r)
        })
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgcsArgs {
    /// Input table; bins come from `side` via `--edges`, else from `group`
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub r: f64,
    /// Strictly increasing bin edges on the side column
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub rule: RuleArgs,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgoArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub r: f64,
    /// 1-based segment start ranks, starting at 1
    #[arg(long, value_delimiter = ',', required = true)]
    pub starts: Vec<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub rule: RuleArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Sg,
    Sgo,
    Gp,
}

fn half() -> f64 {
    0.5
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub strategy: Strategy,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub r: f64,
    /// Improvement factor; defaults to 1 + alpha
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Share of rows used to choose the grouping
    #[arg(long, default_value_t = 0.5)]
    #[serde(default = "half")]
    pub fraction: f64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// JSON array of partitions (arrays of id arrays), needed by `gp`
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub rule: RuleArgs,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EbhArgs {
    /// TSV of `id, e` rows
    #[arg(long, conflicts_with = "input")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evalues: Option<PathBuf>,
    /// Competition table converted to e-values at `--alpha-cp`
    #[arg(long, requires = "alpha_cp")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_cp: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub r: f64,
}

fn tenth() -> f64 {
    0.1
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaArgs {
    /// Group counts: `N`, `A..B` (inclusive) or a comma list
    #[arg(long)]
    pub m: String,
    #[arg(long, default_value_t = 0.1)]
    #[serde(default = "tenth")]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub r: f64,
    /// Group size, used by the power and independent rules
    #[arg(long)]
    pub p: usize,
}

impl AlphaArgs {
    pub fn counts(&self) -> Result<Vec<usize>> {
        let bad = || CliError::Config(format!("cannot read group counts from `{}`", self.m));
        let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
        let counts: Vec<usize> = if let Some((a, b)) = self.m.split_once("..") {
            (parse(a)?..=parse(b)?).collect()
        } else {
            self.m.split(',').map(parse).collect::<Result<_>>()?
        };
        if counts.is_empty() || counts.contains(&0) {
            return Err(bad());
        }
        Ok(counts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Gamma,
    Gaussian,
    Bias,
    Dependent,
    /// One group with normal signals, label-biased to `r`
    Single,
    Counterexample,
    EvalueCurve,
    /// Pooled null win/loss ratio with uncorrected per-group thresholds
    Loss,
}

fn default_trials() -> usize {
    500
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub preset: Preset,
    #[arg(long, default_value_t = 500)]
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Target levels (e-value curve: competition levels)
    #[arg(long = "alpha", value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub rule: RuleArgs,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Single competition filter
    Filter(FilterArgs),
    /// Grouped competition filter with corrected per-group levels
    Gcfilter(GcArgs),
    /// Grouped filter on side-information bins
    Agcs(AgcsArgs),
    /// Rank-segment filter on given segment starts
    Sgo(SgoArgs),
    /// Data-driven grouping on a split sample, then testing on the rest
    Group(GroupArgs),
    /// e-BH on supplied or competition-derived e-values
    Ebh(EbhArgs),
    /// Table of corrected levels over a range of group counts
    Alpha(AlphaArgs),
    /// Monte Carlo presets
    Simulate(SimulateArgs),
}

impl Command {
    pub fn seed_mut(&mut self) -> Option<&mut Option<u64>> {
        match self {
            Self::Group(a) => Some(&mut a.seed),
            Self::Simulate(a) => Some(&mut a.seed),
            _ => None,
        }
    }
}

fn current_dir() -> PathBuf {
    PathBuf::from(".")
}

/// A full invocation as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default = "current_dir")]
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Fills an absent seed of a randomized command with a fresh draw.
    pub fn resolve_seed(&mut self) {
        if let Some(seed @ None) = self.command.seed_mut() {
            *seed = Some(rand::random());
        }
    }
}
