//! Executes a [`RunConfig`] into in-memory artifacts, then writes them.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use compfdr::corrections::{alpha_exp, alpha_independent, alpha_power, CorrectionRule, CorrectionSpec};
use compfdr::evalues::{ebh, evalues_from_competition, EValueVector};
use compfdr::filters::{
    agcs_filter, competition_filter, competition_threshold, gc_filter, partition_by_key, sgo_filter,
    side_bins, SegmentPlan,
};
use compfdr::grouping::{gp_test, sg_test, sgo_test, GroupingParams, Partition};
use compfdr::model::{CompetitionTable, RejectionReport};
use compfdr::simlab::experiments::{
    evalue_experiment, loss_of_control, run_counterexample, CounterexampleConfig, EvalueConfig,
};
use compfdr::simlab::generators::{ModelConfig, ShiftModel, Variant};
use compfdr::simlab::trials::{run_single_filter, run_trials, Method, TrialSummary};
use serde_json::{json, Value};

use crate::config::{
    AgcsArgs, AlphaArgs, Command, EbhArgs, FilterArgs, GcArgs, GroupArgs, Preset, RunConfig, SgoArgs,
    SimulateArgs, Strategy,
};
use crate::error::{CliError, Result};
use crate::io::{emit_csv, emit_rejections, emit_tsv, read_evalues, read_table};

/// Summary JSON plus named output files.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub summary: Value,
    pub files: Vec<(&'static str, Vec<u8>)>,
}

impl Artifacts {
    pub fn summary_text(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes") + "\n"
    }
}

/// Runs the command. Randomized commands must carry a resolved seed.
pub fn execute(cfg: &RunConfig) -> Result<Artifacts> {
    match &cfg.command {
        Command::Filter(a) => filter(a),
        Command::Gcfilter(a) => gcfilter(a),
        Command::Agcs(a) => agcs(a),
        Command::Sgo(a) => sgo(a),
        Command::Group(a) => group(a),
        Command::Ebh(a) => ebh_command(a),
        Command::Alpha(a) => alpha_table(a),
        Command::Simulate(a) => simulate(a),
    }
}

/// Writes `config.json`, `summary.json` and the command's files into
/// `cfg.out_dir`.
pub fn write_artifacts(cfg: &RunConfig, artifacts: &Artifacts) -> Result<()> {
    let dir = &cfg.out_dir;
    let write = |name: &str, bytes: &[u8]| {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|source| CliError::Write { path, source })
    };
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.clone(),
        source,
    })?;
    write("config.json", cfg.to_json().as_bytes())?;
    write("summary.json", artifacts.summary_text().as_bytes())?;
    for (name, bytes) in &artifacts.files {
        write(name, bytes)?;
    }
    Ok(())
}

fn report_summary(command: &str, report: &RejectionReport, extra: Value) -> Value {
    let mut v = json!({
        "command": command,
        "rejections": report.len(),
        "fdp": report.fdp,
        "tdp": report.tdp,
        "groups": report.groups,
    });
    if let (Value::Object(base), Value::Object(more)) = (&mut v, extra) {
        base.extend(more);
    }
    v
}

fn with_rejections(summary: Value, report: &RejectionReport) -> Result<Artifacts> {
    Ok(Artifacts {
        summary,
        files: vec![("rejections.tsv", emit_rejections(report)?)],
    })
}

fn filter(a: &FilterArgs) -> Result<Artifacts> {
    let input = read_table(&a.input)?;
    let report = competition_filter(&input.table, a.alpha, a.r)?;
    let summary = report_summary("filter", &report, json!({ "alpha": a.alpha, "r": a.r }));
    with_rejections(summary, &report)
}

fn gcfilter(a: &GcArgs) -> Result<Artifacts> {
    let input = read_table(&a.input)?;
    let grouped = input.grouped(a.r_lookup()?)?;
    let rule = a.rule.rule()?;
    let levels = CorrectionSpec::new(a.alpha, rule.clone()).for_table(&grouped)?;
    let report = gc_filter(&grouped, &levels)?;
    let summary = report_summary(
        "gcfilter",
        &report,
        json!({ "alpha": a.alpha, "correction": rule, "r": grouped.r(), "m": grouped.m() }),
    );
    with_rejections(summary, &report)
}

fn largest(sizes: &[usize]) -> usize {
    sizes.iter().copied().max().unwrap_or(0)
}

fn agcs(a: &AgcsArgs) -> Result<Artifacts> {
    let input = read_table(&a.input)?;
    let map: HashMap<String, String> = if a.edges.is_empty() {
        let groups = input.groups.as_ref().ok_or_else(|| {
            CliError::Config("agcs needs --edges with a `side` column, or a `group` column".into())
        })?;
        input.table.ids().iter().cloned().zip(groups.iter().cloned()).collect()
    } else {
        side_bins(&input.table, &a.edges).map_err(CliError::Table)?
    };
    let grouped = partition_by_key(&input.table, &map, a.r).map_err(CliError::Table)?;
    let rule = a.rule.rule()?;
    let alpha_prime = rule.uniform(grouped.m(), a.alpha, a.r, largest(&grouped.sizes()))?;
    let report = agcs_filter(&input.table, &map, alpha_prime)?;
    let summary = report_summary(
        "agcs",
        &report,
        json!({ "alpha": a.alpha, "alpha_prime": alpha_prime, "correction": rule, "r": a.r, "m": grouped.m() }),
    );
    with_rejections(summary, &report)
}

fn sgo(a: &SgoArgs) -> Result<Artifacts> {
    let input = read_table(&a.input)?;
    let plan = SegmentPlan::new(a.starts.clone())?;
    let rule = a.rule.rule()?;
    let alpha_prime = rule.uniform(plan.len(), a.alpha, a.r, input.table.len())?;
    let report = sgo_filter(&input.table, &plan, alpha_prime)?;
    let summary = report_summary(
        "sgo",
        &report,
        json!({ "alpha": a.alpha, "alpha_prime": alpha_prime, "correction": rule, "r": a.r, "starts": a.starts }),
    );
    with_rejections(summary, &report)
}

fn resolved(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| CliError::Config("randomized command run without a seed".into()))
}

fn read_path(path: &Path) -> Result<Vec<Partition>> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn group(a: &GroupArgs) -> Result<Artifacts> {
    let input = read_table(&a.input)?;
    let seed = resolved(a.seed)?;
    let params = GroupingParams {
        r: a.r,
        alpha: a.alpha,
        c: a.c,
        rule: a.rule.rule()?,
        fraction: a.fraction,
        seed,
    };
    let test = match a.strategy {
        Strategy::Sg => sg_test(&input.table, &params)?,
        Strategy::Sgo => sgo_test(&input.table, &params)?,
        Strategy::Gp => {
            let path = a
                .path
                .as_deref()
                .ok_or_else(|| CliError::Config("--strategy gp needs --path".into()))?;
            gp_test(&read_path(path)?, &input.table, &params)?
        }
    };
    let summary = report_summary(
        "group",
        &test.report,
        json!({ "alpha": a.alpha, "r": a.r, "seed": seed, "outcome": test.outcome }),
    );
    with_rejections(summary, &test.report)
}

fn competition_evalues(table: &CompetitionTable, alpha_cp: f64, r: f64) -> Result<EValueVector> {
    let t = competition_threshold(table, alpha_cp / r);
    Ok(evalues_from_competition(table, t.threshold, r)?)
}

fn ebh_command(a: &EbhArgs) -> Result<Artifacts> {
    let (e, group_of) = match (&a.evalues, &a.input) {
        (Some(path), None) => (read_evalues(path)?, HashMap::new()),
        (None, Some(path)) => {
            let alpha_cp = a
                .alpha_cp
                .ok_or_else(|| CliError::Config("--input needs --alpha-cp".into()))?;
            let input = read_table(path)?;
            if input.groups.is_some() {
                let grouped = input.grouped(|_| a.r)?;
                let mut parts = Vec::with_capacity(grouped.m());
                let mut group_of = HashMap::new();
                for (t, key) in grouped.groups().iter().zip(grouped.keys()) {
                    parts.push(competition_evalues(t, alpha_cp, a.r)?);
                    group_of.extend(t.ids().iter().map(|id| (id.clone(), key.clone())));
                }
                (EValueVector::concat(parts), group_of)
            } else {
                (competition_evalues(&input.table, alpha_cp, a.r)?, HashMap::new())
            }
        }
        _ => return Err(CliError::Config("ebh needs exactly one of --evalues and --input".into())),
    };
    let rejected = ebh(&e, a.alpha)?;
    let value_of: HashMap<&str, f64> = e.ids().iter().map(String::as_str).zip(e.values().iter().copied()).collect();
    let rows: Vec<Vec<String>> = rejected
        .iter()
        .map(|id| {
            vec![
                id.clone(),
                group_of.get(id).cloned().unwrap_or_else(|| "all".into()),
                value_of[id.as_str()].to_string(),
            ]
        })
        .collect();
    let bytes = emit_tsv(&["id", "group", "e"], &rows)?;
    let summary = json!({
        "command": "ebh",
        "alpha": a.alpha,
        "alpha_cp": a.alpha_cp,
        "r": a.r,
        "hypotheses": e.len(),
        "rejections": rejected.len(),
    });
    Ok(Artifacts {
        summary,
        files: vec![("rejections.tsv", bytes)],
    })
}

fn alpha_table(a: &AlphaArgs) -> Result<Artifacts> {
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for m in a.counts()? {
        let bonferroni = CorrectionRule::Bonferroni.uniform(m, a.alpha, a.r, a.p)?;
        let exp = alpha_exp(m, a.alpha, a.r)?;
        let power = alpha_power(m, a.alpha, a.r, a.p)?;
        let independent = alpha_independent(m, a.alpha, a.r, a.p)?;
        rows.push(vec![
            m.to_string(),
            bonferroni.to_string(),
            exp.to_string(),
            power.alpha_prime.to_string(),
            power.a.to_string(),
            independent.to_string(),
        ]);
        records.push(json!({
            "m": m,
            "bonferroni": bonferroni,
            "exp": exp,
            "power": power.alpha_prime,
            "power_a": power.a,
            "independent": independent,
        }));
    }
    let csv = emit_csv(&["m", "bonferroni", "exp", "power", "power_a", "independent"], &rows)?;
    let summary = json!({ "command": "alpha", "alpha": a.alpha, "r": a.r, "p": a.p, "rows": records });
    Ok(Artifacts {
        summary,
        files: vec![("alpha.csv", csv)],
    })
}

fn method_name(m: &Method) -> String {
    match m {
        Method::Oc => "oc".into(),
        Method::Gc { correction } => {
            let tag = serde_json::to_value(correction).expect("rule serializes");
            format!("gc:{}", tag["rule"].as_str().unwrap_or("custom"))
        }
    }
}

fn trial_artifacts(preset: Preset, summary: &TrialSummary, extra: Value) -> Result<Artifacts> {
    let rows: Vec<Vec<String>> = summary
        .cells
        .iter()
        .map(|c| {
            vec![
                method_name(&c.method),
                c.alpha.to_string(),
                c.fdp.mean.to_string(),
                c.fdp.se.to_string(),
                c.tdp.mean.to_string(),
                c.tdp.se.to_string(),
            ]
        })
        .collect();
    let csv = emit_csv(&["method", "alpha", "fdr", "fdr_se", "tdr", "tdr_se"], &rows)?;
    let mut v = json!({ "command": "simulate", "preset": preset, "summary": summary });
    if let (Value::Object(base), Value::Object(more)) = (&mut v, extra) {
        base.extend(more);
    }
    Ok(Artifacts {
        summary: v,
        files: vec![("simulate.csv", csv)],
    })
}

fn levels_or(alphas: &[f64], default: &[f64]) -> Vec<f64> {
    if alphas.is_empty() {
        default.to_vec()
    } else {
        alphas.to_vec()
    }
}

/// Competition levels 0.005, 0.010, ..., 0.100.
pub fn evalue_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.005).collect()
}

fn simulate(a: &SimulateArgs) -> Result<Artifacts> {
    let seed = resolved(a.seed)?;
    match a.preset {
        Preset::Gamma | Preset::Gaussian | Preset::Bias | Preset::Dependent => {
            let base = match a.preset {
                Preset::Gamma => ModelConfig::gamma_default(),
                _ => ModelConfig::gaussian_default(),
            };
            let variant = match a.preset {
                Preset::Bias => Variant::Bias { r: a.r.unwrap_or(1.5) },
                Preset::Dependent => Variant::Dependent,
                _ => Variant::Standard,
            };
            let config = ModelConfig {
                m: a.m.unwrap_or(base.m),
                p: a.p.unwrap_or(base.p),
                p0: a.p0.unwrap_or(base.p0),
                variant,
                ..base
            };
            let methods = [Method::Oc, Method::gc(a.rule.rule()?)];
            let alphas = levels_or(&a.alphas, &[0.05, 0.1, 0.15, 0.2]);
            let summary = run_trials(&config, &methods, &alphas, a.trials, seed)?;
            trial_artifacts(a.preset, &summary, json!({ "model": config }))
        }
        Preset::Single => {
            let p = a.p.unwrap_or(500);
            let model = ShiftModel {
                p,
                p0: a.p0.unwrap_or(p * 3 / 5),
                signal: (2.0, 4.0),
                r: a.r.unwrap_or(1.0),
            };
            let alphas = levels_or(&a.alphas, &[0.05, 0.1, 0.2]);
            let summary = run_single_filter(&model, &alphas, a.trials, seed)?;
            trial_artifacts(a.preset, &summary, json!({ "model": model }))
        }
        Preset::Counterexample => {
            let mut cfg = CounterexampleConfig::new(a.m.unwrap_or(16));
            cfg.p = a.p.unwrap_or(cfg.p);
            cfg.p0 = a.p0.unwrap_or(cfg.p0);
            let alphas = levels_or(&a.alphas, &[0.2]);
            let cells = run_counterexample(&cfg, &alphas, a.trials, seed)?;
            let rows: Vec<Vec<String>> = cells
                .iter()
                .map(|c| {
                    vec![
                        c.alpha.to_string(),
                        c.uncorrected.mean.to_string(),
                        c.uncorrected.se.to_string(),
                        c.corrected_alpha.to_string(),
                        c.corrected.mean.to_string(),
                        c.corrected.se.to_string(),
                    ]
                })
                .collect();
            let header = ["alpha", "mean_fdp", "se", "corrected_alpha", "corrected_mean_fdp", "corrected_se"];
            let json_cells: Vec<Value> = cells
                .iter()
                .map(|c| {
                    json!({
                        "alpha": c.alpha,
                        "mean_fdp": c.uncorrected.mean,
                        "se": c.uncorrected.se,
                        "corrected_alpha": c.corrected_alpha,
                        "corrected_mean_fdp": c.corrected.mean,
                        "corrected_se": c.corrected.se,
                    })
                })
                .collect();
            let summary = json!({
                "command": "simulate",
                "preset": a.preset,
                "model": cfg,
                "trials": a.trials,
                "seed": seed,
                "cells": json_cells,
            });
            Ok(Artifacts {
                summary,
                files: vec![("simulate.csv", emit_csv(&header, &rows)?)],
            })
        }
        Preset::EvalueCurve => {
            let cfg = EvalueConfig::default();
            let grid = levels_or(&a.alphas, &evalue_grid());
            let curve = evalue_experiment(&cfg, &grid, a.trials, seed)?;
            let rows: Vec<Vec<String>> = curve
                .iter()
                .map(|c| {
                    vec![
                        c.alpha_cp.to_string(),
                        c.ebh_true.mean.to_string(),
                        c.ebh_true.se.to_string(),
                        c.direct_true.mean.to_string(),
                        c.direct_true.se.to_string(),
                    ]
                })
                .collect();
            let header = ["alpha_cp", "ebh_true", "ebh_true_se", "direct_true", "direct_true_se"];
            let summary = json!({
                "command": "simulate",
                "preset": a.preset,
                "model": cfg,
                "trials": a.trials,
                "seed": seed,
                "curve": curve,
            });
            Ok(Artifacts {
                summary,
                files: vec![("simulate.csv", emit_csv(&header, &rows)?)],
            })
        }
        Preset::Loss => {
            let model = ShiftModel {
                p: a.p.unwrap_or(200),
                p0: a.p0.unwrap_or(100),
                signal: (2.0, 2.0),
                r: a.r.unwrap_or(1.0),
            };
            let m = a.m.unwrap_or(10);
            let alpha = levels_or(&a.alphas, &[0.2])[0];
            let stat = loss_of_control(&model, m, alpha, a.trials, seed)?;
            let summary = json!({
                "command": "simulate",
                "preset": a.preset,
                "model": model,
                "m": m,
                "alpha": alpha,
                "trials": a.trials,
                "seed": seed,
                "statistic": stat,
            });
            let rows = vec![vec![alpha.to_string(), stat.mean.to_string(), stat.se.to_string()]];
            Ok(Artifacts {
                summary,
                files: vec![("simulate.csv", emit_csv(&["alpha", "mean", "se"], &rows)?)],
            })
        }
    }
}
