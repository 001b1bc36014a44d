//! End-to-end acceptance checks, one PASS/FAIL line per criterion.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use compfdr::corrections::{
    alpha_exp, alpha_independent, alpha_power, c_lower, expected_max_truncated_geometric, CorrectionRule,
    CorrectionSpec,
};
use compfdr::evalues::{ebh, evalues_from_competition, evalues_from_procedure_scaled};
use compfdr::filters::{competition_filter, competition_threshold, fdp_decomposition, gc_filter};
use compfdr::model::{CompetitionTable, GroupedTable, TruncatedGeometric};
use compfdr::simlab::experiments::{evalue_experiment, loss_of_control, run_counterexample, CounterexampleConfig, EvalueConfig};
use compfdr::simlab::generators::{ModelConfig, ShiftModel, Variant};
use compfdr::simlab::oracles::{delta_oracle, max_ratio_oracle};
use compfdr::simlab::trials::{run_single_filter, run_trials, Method};
use compfdr::simlab::MeanSe;
use compfdr_cli::io::{emit_table, InputTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

fn within_time(c: Check, elapsed: Duration, limit: Duration) -> Check {
    if elapsed <= limit {
        c
    } else {
        check(false, format!("{}; runtime {elapsed:?} over {limit:?}", c.detail))
    }
}

fn single_filter_control() -> Check {
    let alphas = [0.05, 0.1, 0.2];
    let mut worst = String::new();
    let mut pass = true;
    for r in [1.0, 1.5] {
        let model = ShiftModel { p: 500, p0: 300, signal: (2.0, 4.0), r };
        let s = run_single_filter(&model, &alphas, 1000, 11).unwrap();
        for c in &s.cells {
            let ok = c.fdp.mean <= c.alpha + 3.0 * c.fdp.se;
            pass &= ok;
            worst += &format!(" r={r} a={}: {:.4}+-{:.4};", c.alpha, c.fdp.mean, c.fdp.se);
        }
    }
    check(pass, format!("FDR <= alpha + 3se:{worst}"))
}

fn gc_control_and_power() -> Check {
    let alphas = [0.05, 0.1, 0.15, 0.2];
    let methods = [Method::Oc, Method::gc(CorrectionRule::Power)];
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, variant) in [
        ("standard", Variant::Standard),
        ("bias", Variant::Bias { r: 1.5 }),
        ("dependent", Variant::Dependent),
    ] {
        let config = ModelConfig { variant, ..ModelConfig::gaussian_default() };
        let s = run_trials(&config, &methods, &alphas, 100, 21).unwrap();
        for &a in &alphas {
            let oc = s.cell(&methods[0], a).unwrap();
            let gc = s.cell(&methods[1], a).unwrap();
            let fdr_ok = gc.fdp.mean <= a + 3.0 * gc.fdp.se;
            let power_ok = gc.tdp.mean >= oc.tdp.mean - oc.tdp.se;
            pass &= fdr_ok && power_ok;
            if !(fdr_ok && power_ok) {
                notes.push(format!(
                    "{name} a={a}: FDR_GC {:.4}+-{:.4}, TDP_GC {:.4} vs TDP_OC {:.4}+-{:.4}",
                    gc.fdp.mean, gc.fdp.se, gc.tdp.mean, oc.tdp.mean, oc.tdp.se
                ));
            }
        }
        let g = s.cell(&methods[1], 0.1).unwrap();
        let o = s.cell(&methods[0], 0.1).unwrap();
        notes.push(format!(
            "{name} a=0.1: FDR_GC {:.4} TDP_GC {:.4} TDP_OC {:.4}",
            g.fdp.mean, g.tdp.mean, o.tdp.mean
        ));
    }
    check(pass, notes.join("; "))
}

fn counterexample() -> Check {
    let mut exceeded = false;
    let mut corrected_ok = true;
    let mut notes = Vec::new();
    for m in [4, 8, 16] {
        let cell = &run_counterexample(&CounterexampleConfig::new(m), &[0.2], 1500, 31).unwrap()[0];
        exceeded |= cell.uncorrected.mean - 3.0 * cell.uncorrected.se > 0.2;
        corrected_ok &= cell.corrected.mean <= 0.2 + 3.0 * cell.corrected.se;
        notes.push(format!(
            "m={m}: uncorrected {:.4}+-{:.4}, corrected {:.4}+-{:.4}",
            cell.uncorrected.mean, cell.uncorrected.se, cell.corrected.mean, cell.corrected.se
        ));
    }
    check(exceeded && corrected_ok, notes.join("; "))
}

fn set(ids: impl IntoIterator<Item = impl Into<String>>) -> BTreeSet<String> {
    ids.into_iter().map(Into::into).collect()
}

fn ebh_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let (mut competition_fail, mut procedure_fail) = (0, 0);
    for i in 0..500 {
        let p = rng.random_range(10..=200);
        let model = ShiftModel {
            p,
            p0: rng.random_range(0..=p),
            signal: (0.0, rng.random_range(0.5..5.0)),
            r: if i % 2 == 0 { 1.0 } else { 1.5 },
        };
        let table = model.draw(1, &mut rng).unwrap();
        let alpha = rng.random_range(0.01..0.5);

        let direct = competition_filter(&table, alpha, model.r).unwrap();
        let t = competition_threshold(&table, alpha / model.r);
        let e = evalues_from_competition(&table, t.threshold, model.r).unwrap();
        if set(ebh(&e, alpha).unwrap()) != set(direct.rejected_ids()) {
            competition_fail += 1;
        }

        let d: Vec<String> = table.ids().iter().filter(|_| rng.random_bool(0.3)).cloned().collect();
        let d = if d.is_empty() { vec![table.ids()[0].clone()] } else { d };
        let alpha_d = rng.random_range(0.01..=1.0);
        let e = evalues_from_procedure_scaled(table.ids(), &d, alpha_d).unwrap();
        if set(ebh(&e, alpha_d).unwrap()) != set(d) {
            procedure_fail += 1;
        }
    }
    check(
        competition_fail == 0 && procedure_fail == 0,
        format!("mismatches: competition {competition_fail}/500, procedure {procedure_fail}/500"),
    )
}

fn correction_ordering() -> Check {
    let (alpha, r, p) = (0.1, 1.0, 300);
    let mut order_fail = Vec::new();
    for m in 2..=100 {
        let ind = alpha_independent(m, alpha, r, p).unwrap();
        let pow = alpha_power(m, alpha, r, p).unwrap().alpha_prime;
        let exp = alpha_exp(m, alpha, r).unwrap();
        let bon = alpha / m as f64;
        let tol = 1e-12;
        if !(ind >= pow * (1.0 - tol) && pow >= exp * (1.0 - tol) && exp >= bon * (1.0 - tol)) {
            order_fail.push(m);
        }
    }
    let ms = [2usize, 10, 100, 1000, 10_000];
    let bon_exp: Vec<f64> = ms.iter().map(|&m| (alpha / m as f64) / alpha_exp(m, alpha, r).unwrap()).collect();
    let exp_pow: Vec<f64> = ms
        .iter()
        .map(|&m| alpha_exp(m, alpha, r).unwrap() / alpha_power(m, alpha, r, p).unwrap().alpha_prime)
        .collect();
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    check(
        order_fail.is_empty() && decreasing(&bon_exp) && decreasing(&exp_pow),
        format!(
            "ordering violations at m={order_fail:?}; (a/m)/exp = [{}] decreasing={}; exp/power = [{}] decreasing={}",
            fmt(&bon_exp),
            decreasing(&bon_exp),
            fmt(&exp_pow),
            decreasing(&exp_pow)
        ),
    )
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

fn oracles() -> Check {
    let mut notes = Vec::new();
    let mut pmf_ok = true;
    for n in 1..=12usize {
        for k2 in 0..=n {
            let k1 = n - k2;
            let d = delta_oracle(k1, k2).unwrap();
            for (k3, &c) in d.counts.iter().enumerate() {
                let want = if k2 == 0 {
                    u64::from(k3 == k1)
                } else {
                    binomial((k1 - k3 + k2 - 1) as u64, (k2 - 1) as u64)
                };
                pmf_ok &= c == want && d.total == binomial(n as u64, k2 as u64);
            }
        }
    }
    notes.push(format!("(a) pmf exact={pmf_ok}"));

    let mut max_ok = true;
    for (i, &(m, r, p)) in [(10usize, 1.0, 300u64), (100, 1.5, 300), (5, 2.0, 1000)].iter().enumerate() {
        let z = TruncatedGeometric::new(r, p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(51 + i as u64);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| (0..m).map(|_| z.sample(&mut rng)).max().unwrap() as f64)
            .collect();
        let mc = MeanSe::of(&draws);
        let exact = expected_max_truncated_geometric(m, r, p as usize);
        let ok = (mc.mean - exact).abs() <= 3.0 * mc.se;
        max_ok &= ok;
        notes.push(format!("(b) m={m} r={r} p={p}: {exact:.4} vs {:.4}+-{:.4}", mc.mean, mc.se));
    }

    let cl = c_lower(1.0).unwrap();
    let walk = max_ratio_oracle(1.0, 10_000, 4000, 61).unwrap();
    let bound_ok = walk.mean <= 1.0 / cl.c + 3.0 * walk.se;
    notes.push(format!("(c) {:.4}+-{:.4} vs 1/c_lower {:.4}", walk.mean, walk.se, 1.0 / cl.c));
    let eps_ok = (cl.eps_star - 1.021).abs() <= 0.01;
    notes.push(format!("(d) eps* {:.5}", cl.eps_star));
    check(pmf_ok && max_ok && bound_ok && eps_ok, notes.join("; "))
}

fn loss_positivity() -> Check {
    let model = ShiftModel { p: 200, p0: 100, signal: (2.0, 2.0), r: 1.0 };
    let s = loss_of_control(&model, 10, 0.2, 2000, 71).unwrap();
    check(s.mean - 1.0 >= 3.0 * s.se, format!("statistic {:.4}+-{:.4}", s.mean, s.se))
}

fn evalue_collapse() -> Check {
    let grid: Vec<f64> = (1..=20).map(|k| k as f64 * 0.005).collect();
    let curve = evalue_experiment(&EvalueConfig::default(), &grid, 300, 81).unwrap();
    let peak = curve.iter().map(|c| c.ebh_true.mean).fold(0.0, f64::max);
    let tail: Vec<f64> = curve
        .iter()
        .filter(|c| c.alpha_cp >= 0.09 - 1e-9)
        .map(|c| c.ebh_true.mean)
        .collect();
    let pass = peak > 0.0 && tail.iter().all(|&t| t < 0.05 * peak);
    let fmt = tail.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ");
    check(pass, format!("peak {peak:.1}; tail at 0.09..0.10 = [{fmt}]"))
}

type Group = (Vec<f64>, Vec<bool>, Vec<bool>);

fn random_group(rng: &mut ChaCha8Rng, max_p: usize, levels: u32) -> Group {
    let p = rng.random_range(1..=max_p);
    let w = (0..p).map(|_| f64::from(rng.random_range(0..levels))).collect();
    let l = (0..p).map(|_| rng.random_bool(0.6)).collect();
    let h = (0..p).map(|_| rng.random_bool(0.4)).collect();
    (w, l, h)
}

fn to_grouped(groups: &[Group]) -> GroupedTable {
    let tables = groups
        .iter()
        .enumerate()
        .map(|(i, (w, l, h))| {
            let ids = (0..w.len()).map(|j| format!("{i}:{j}")).collect();
            CompetitionTable::new(ids, w.clone(), l.clone())
                .unwrap()
                .with_truth(h.clone())
                .unwrap()
        })
        .collect();
    GroupedTable::uniform(tables, 1.0).unwrap()
}

/// Largest pooled label-1 count over every combination of feasible
/// per-group thresholds, with "reject nothing" always allowed.
fn exhaustive_optimum(groups: &[Group], levels: &[f64]) -> usize {
    let options: Vec<Vec<usize>> = groups
        .iter()
        .zip(levels)
        .map(|((w, l, _), &level)| {
            let mut opts = vec![0];
            for &t in w {
                let plus = w.iter().zip(l).filter(|(&x, &y)| x >= t && y).count();
                let minus = w.iter().zip(l).filter(|(&x, &y)| x >= t && !y).count();
                if (minus + 1) as f64 <= level * plus.max(1) as f64 * (1.0 + 1e-12) {
                    opts.push(plus);
                }
            }
            opts
        })
        .collect();
    let mut best = 0;
    let mut stack = vec![(0usize, 0usize)];
    while let Some((depth, total)) = stack.pop() {
        if depth == options.len() {
            best = best.max(total);
            continue;
        }
        for &o in &options[depth] {
            stack.push((depth + 1, total + o));
        }
    }
    best
}

fn decomposition_and_exhaustive() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let m = rng.random_range(1..=5);
        let groups: Vec<Group> = (0..m).map(|_| random_group(&mut rng, 20, 8)).collect();
        let thresholds: Vec<f64> = groups
            .iter()
            .map(|(w, _, _)| {
                if rng.random_bool(0.1) {
                    f64::INFINITY
                } else {
                    w[rng.random_range(0..w.len())]
                }
            })
            .collect();
        let d = fdp_decomposition(&to_grouped(&groups), &thresholds).unwrap();
        worst = worst.max((d.fdp - d.factored).abs());
    }
    let mut mismatches = 0;
    for _ in 0..1000 {
        let m = rng.random_range(1..=3);
        let groups: Vec<Group> = (0..m).map(|_| random_group(&mut rng, 8, 6)).collect();
        let levels: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
        let report = gc_filter(&to_grouped(&groups), &levels).unwrap();
        if report.len() != exhaustive_optimum(&groups, &levels) {
            mismatches += 1;
        }
    }
    check(
        worst <= 1e-12 && mismatches == 0,
        format!("max |fdp - factored| = {worst:.2e} over 1e4; gc_filter vs exhaustive mismatches {mismatches}/1000"),
    )
}

fn psm_table(seed: u64) -> InputTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = [("Unmodified", 4000, 1400), ("Oxidation", 900, 500), ("Phospho", 300, 220), ("Acetyl", 80, 70)];
    let (mut ids, mut scores, mut labels, mut groups) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (g, &(kind, p, p0)) in kinds.iter().enumerate() {
        let model = ShiftModel { p, p0, signal: (1.5, 5.0), r: 1.0 };
        let t = model.draw(g + 1, &mut rng).unwrap();
        for j in 0..t.len() {
            ids.push(format!("scan{}", ids.len() + 1));
            scores.push((t.scores()[j] * 1e4).round() / 1e4);
            labels.push(t.labels()[j]);
            groups.push(kind.to_string());
        }
    }
    InputTable {
        table: CompetitionTable::new(ids, scores, labels).unwrap(),
        groups: Some(groups),
    }
}

fn pipeline_shape() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let input = psm_table(101);
    let path = dir.path().join("psm.tsv");
    fs::write(&path, emit_table(&input).unwrap()).unwrap();
    let bin = env!("CARGO_BIN_EXE_compfdr");
    let run = |out: &str| {
        Command::new(bin)
            .args(["gcfilter", "--input", path.to_str().unwrap(), "--alpha", "0.01", "--rule", "power"])
            .arg("--out-dir")
            .arg(dir.path().join(out))
            .output()
            .unwrap()
    };
    let first = run("a");
    let second = run("b");
    if !(first.status.success() && second.status.success()) {
        return check(false, String::from_utf8_lossy(&first.stderr).to_string());
    }
    let replay = Command::new(bin)
        .args(["run", "--config", dir.path().join("a/config.json").to_str().unwrap()])
        .arg("--out-dir")
        .arg(dir.path().join("c"))
        .output()
        .unwrap();
    let read = |d: &str, f: &str| fs::read(dir.path().join(d).join(f)).unwrap();
    let deterministic = ["summary.json", "rejections.tsv"]
        .iter()
        .all(|f| read("a", f) == read("b", f) && replay.status.success() && read("a", f) == read("c", f));

    let summary: serde_json::Value = serde_json::from_slice(&read("a", "summary.json")).unwrap();
    let keys: Vec<&str> = summary["groups"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g["key"].as_str().unwrap())
        .collect();
    let shape_ok = keys == ["Unmodified", "Oxidation", "Phospho", "Acetyl"]
        && summary["groups"]
            .as_array()
            .unwrap()
            .iter()
            .all(|g| g["level"].is_f64() && (g["threshold"].is_f64() || g["threshold"].is_null()));

    let grouped = input.grouped(|_| 1.0).unwrap();
    let levels = CorrectionSpec::new(0.01, CorrectionRule::Power).for_table(&grouped).unwrap();
    let direct = gc_filter(&grouped, &levels).unwrap();
    let tsv = String::from_utf8(read("a", "rejections.tsv")).unwrap();
    let listed: Vec<&str> = tsv.lines().skip(1).map(|l| l.split('\t').next().unwrap()).collect();
    let pooled_ok = listed == direct.rejected_ids() && summary["rejections"] == direct.len();
    let per_group: HashMap<&str, usize> = direct.groups.iter().map(|g| (g.key.as_str(), g.r_plus)).collect();
    check(
        deterministic && shape_ok && pooled_ok,
        format!(
            "deterministic={deterministic} shape={shape_ok} pooled={pooled_ok}; {} rejections {per_group:?}",
            direct.len()
        ),
    )
}

/// Name, check and optional runtime limit in seconds.
type Criterion = (&'static str, fn() -> Check, Option<u64>);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 single-filter FDR control", single_filter_control, Some(60)),
        ("2 GC FDR and power ordering", gc_control_and_power, Some(600)),
        ("3 counterexample", counterexample, Some(300)),
        ("4 eBH equivalence", ebh_equivalence, None),
        ("5 correction ordering and trends", correction_ordering, None),
        ("6 oracle agreements", oracles, None),
        ("7 uncorrected ratio statistic above 1", loss_positivity, None),
        ("8 e-value power collapse", evalue_collapse, Some(300)),
        ("9 decomposition and exhaustive optimum", decomposition_and_exhaustive, None),
        ("10 CLI pipeline shape and determinism", pipeline_shape, None),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if let Some(secs) = limit {
            outcome = within_time(outcome, elapsed, Duration::from_secs(secs));
        }
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {name} ({:.1}s): {}", elapsed.as_secs_f64(), outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
