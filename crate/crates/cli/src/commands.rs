//! One function per subcommand: validated config in, table and summary out.

use onebit_rip::embedding::{embed_batch, hamming};
use onebit_rip::geometry::{antipodal_gap, disagreement_probability, distorted_distance, sample_sparse_unit};
use onebit_rip::par::try_map_range;
use onebit_rip::ripcheck::{
    geodesic_floor_check, scaling_fit, sweep_m, trial_stream, FloorConfig, SweepConfig,
};
use onebit_rip::stochastics::binomial_band;
use onebit_rip::vctool::{
    is_shattered, lambert_w_minus1, packing_estimate, vc_lower_bound_search, vc_upper_bound,
    verify_witnesses, PointSet, SetClass, Witness,
};
use onebit_rip::{BitCode, Execution, NoiseModel, NoiseVector, RngStream, SensingMatrix, UnitVector};
use serde_json::{json, Value};

use crate::config::{EmbedMcConfig, MetricTableConfig, NoisyFloorConfig, RipSweepConfig, VcConfig, VcTask};
use crate::output::{flag, float, Table, TrialSeed};
use crate::CliError;

/// Everything a subcommand produces before it is written out.
#[derive(Debug, Clone)]
pub struct Run {
    pub table: Table,
    pub summary: Value,
    pub trial_seeds: Vec<TrialSeed>,
    pub passed: bool,
    pub codes: Option<Vec<BitCode>>,
}

fn seeds(seed: u64, count: usize) -> Vec<TrialSeed> {
    (0..count)
        .map(|t| TrialSeed {
            trial: t,
            seed,
            stream_id: t as u64,
        })
        .collect()
}

fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub fn metric_table(cfg: &MetricTableConfig) -> Result<Run, CliError> {
    cfg.validate()?;
    let mut table = Table::new(vec!["rho", "sigma", "d", "d_sigma", "gap", "antipodal_gap"]);
    let mut violations = 0usize;
    for &sigma in &cfg.sigma_grid {
        let noise = NoiseModel::new(sigma)?;
        let cap = antipodal_gap(noise);
        for &rho in &cfg.rho_grid {
            let d = disagreement_probability(rho)?;
            let ds = disagreement_probability(noise.lifted_correlation(rho))?;
            let gap = d - ds;
            if gap > cap + 1e-12 {
                violations += 1;
            }
            table.push(vec![float(rho), float(sigma), float(d), float(ds), float(gap), float(cap)]);
        }
    }
    Ok(Run {
        table,
        summary: json!({ "rows": cfg.rho_grid.len() * cfg.sigma_grid.len(), "gap_violations": violations }),
        trial_seeds: Vec::new(),
        passed: violations == 0,
        codes: None,
    })
}

/// The pair `x = e_1`, `y = rho e_1 + sqrt(1 - rho^2) e_2` in `R^n`.
pub fn correlated_pair(n: usize, rho: f64) -> Result<(UnitVector, UnitVector), CliError> {
    let x = UnitVector::basis(n, 0)?;
    let mut c = vec![0.0; n];
    c[0] = rho;
    c[1] = (1.0 - rho * rho).max(0.0).sqrt();
    Ok((x, UnitVector::normalized(c)?))
}

pub fn embed_mc(cfg: &EmbedMcConfig, dump: bool) -> Result<Run, CliError> {
    let noise = cfg.validate()?;
    let (x, y) = correlated_pair(cfg.n, cfg.rho)?;
    let predicted = distorted_distance(&x, &y, noise)?;
    let (lo, hi) = binomial_band(predicted, cfg.m as u64, cfg.z)?;
    let signals = [x, y];
    let per_trial = try_map_range(Execution::Parallel, cfg.trials, |t| {
        let base = trial_stream(cfg.seed, t);
        let a = SensingMatrix::gaussian(&mut base.fork(0), cfg.m, cfg.n)?;
        let eta = if noise.is_noiseless() {
            None
        } else {
            Some(NoiseVector::sample(&mut base.fork(1), cfg.m, noise)?)
        };
        let codes = embed_batch(&a, eta.as_ref(), &signals, Execution::Sequential)?;
        Ok::<_, onebit_rip::Error>((hamming(&codes[0], &codes[1])?, codes))
    })?;

    let mut table = Table::new(vec!["trial", "empirical_hamming", "predicted", "ci_lo", "ci_hi", "inside_ci"]);
    let mut inside = 0usize;
    let mut all_codes = Vec::new();
    for (t, (h, codes)) in per_trial.into_iter().enumerate() {
        let ok = lo <= h && h <= hi;
        inside += usize::from(ok);
        table.push(vec![t.to_string(), float(h), float(predicted), float(lo), float(hi), flag(ok)]);
        if dump {
            all_codes.extend(codes);
        }
    }
    let fraction = inside as f64 / cfg.trials as f64;
    Ok(Run {
        table,
        summary: json!({
            "predicted": predicted,
            "band": [lo, hi],
            "inside": inside,
            "trials": cfg.trials,
            "inside_fraction": fraction,
        }),
        trial_seeds: seeds(cfg.seed, cfg.trials),
        passed: fraction >= cfg.min_pass_fraction,
        codes: dump.then_some(all_codes),
    })
}

pub fn rip_sweep(cfg: &RipSweepConfig) -> Result<Run, CliError> {
    let (noise, sampler) = cfg.validate()?;
    let points = sweep_m(&SweepConfig {
        noise,
        m_grid: cfg.m_grid.clone(),
        trials: cfg.trials,
        sampler,
        metric: cfg.metric,
        seed: cfg.seed,
        exec: Execution::Parallel,
    })?;
    let mut table = Table::new(vec![
        "kind", "m", "trial", "sup_dev", "mean_dev", "q95_dev", "slope", "r_squared",
    ]);
    for p in &points {
        for (t, r) in p.reports.iter().enumerate() {
            table.push(vec![
                "trial".into(),
                p.m.to_string(),
                t.to_string(),
                float(r.sup_dev),
                float(r.mean_dev),
                float(r.q95_dev),
                String::new(),
                String::new(),
            ]);
        }
    }
    let fit = scaling_fit(&points).ok();
    let [lo, hi] = cfg.slope_band;
    let passed = fit.is_some_and(|f| lo <= f.slope && f.slope <= hi && f.r_squared >= cfg.min_r_squared);
    table.push(vec![
        "fit".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        opt_float(fit.map(|f| f.slope)),
        opt_float(fit.map(|f| f.r_squared)),
    ]);
    let mean_sup: Vec<Value> = points.iter().map(|p| json!({ "m": p.m, "mean_sup": p.mean_sup, "max_sup": p.max_sup })).collect();
    Ok(Run {
        table,
        summary: json!({
            "metric": cfg.metric.as_str(),
            "slope": fit.map(|f| f.slope),
            "intercept": fit.map(|f| f.intercept),
            "r_squared": fit.map(|f| f.r_squared),
            "slope_band": cfg.slope_band,
            "per_m": mean_sup,
        }),
        trial_seeds: seeds(cfg.seed, cfg.trials),
        passed,
        codes: None,
    })
}

pub fn noisy_floor(cfg: &NoisyFloorConfig) -> Result<Run, CliError> {
    let (noise, sampler) = cfg.validate()?;
    let report = geodesic_floor_check(&FloorConfig {
        noise,
        m_grid: cfg.m_grid.clone(),
        trials: cfg.trials,
        sampler,
        seed: cfg.seed,
        slack: cfg.slack,
        exec: Execution::Parallel,
    })?;
    let mut table = Table::new(vec!["m", "trial", "geodesic_sup", "distorted_sup", "floor"]);
    for c in &report.cells {
        table.push(vec![
            c.m.to_string(),
            c.trial.to_string(),
            float(c.geodesic_sup),
            float(c.distorted_sup),
            float(report.floor),
        ]);
    }
    let last = report.points.last().map(|p| p.mean_distorted_sup).unwrap_or(0.0);
    let distorted_ok = cfg.distorted_max.is_none_or(|cap| last <= cap);
    Ok(Run {
        table,
        summary: json!({
            "floor": report.floor,
            "slack": report.slack,
            "above_floor": report.above_floor,
            "converges_to_floor": report.converges_to_floor,
            "distorted_decays": report.distorted_decays,
            "distorted_at_largest_m": last,
            "distorted_max": cfg.distorted_max,
            "points": report.points,
        }),
        trial_seeds: seeds(cfg.seed, cfg.trials),
        passed: report.passed() && distorted_ok,
        codes: None,
    })
}

const VC_HEADER: [&str; 10] = ["mode", "n", "s", "k", "label", "x", "value", "bound", "pass", "witness"];

#[derive(Default)]
struct VcRow {
    n: Option<usize>,
    s: Option<usize>,
    k: Option<usize>,
    label: String,
    x: Option<f64>,
    value: String,
    bound: Option<f64>,
    pass: Option<bool>,
    witness: String,
}

fn push_vc(table: &mut Table, mode: &str, r: VcRow) {
    let num = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
    table.push(vec![
        mode.to_string(),
        num(r.n),
        num(r.s),
        num(r.k),
        r.label,
        opt_float(r.x),
        r.value,
        opt_float(r.bound),
        r.pass.map(flag).unwrap_or_default(),
        r.witness,
    ]);
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| float(*x)).collect::<Vec<_>>().join(" ")
}

fn describe_witness(w: &Witness) -> String {
    let dir = |d: &onebit_rip::vctool::Direction| {
        let sup: Vec<String> = d.support.iter().map(|j| j.to_string()).collect();
        format!("support={} p={}", sup.join(" "), join_floats(&d.p))
    };
    match w {
        Witness::Hemisphere(d) => dir(d),
        Witness::Wedge(a, b) => format!("{} ^ {}", dir(a), dir(b)),
    }
}

fn class_name(c: SetClass) -> &'static str {
    match c {
        SetClass::Hemisphere => "hemisphere",
        SetClass::Wedge => "wedge",
    }
}

pub fn vc(cfg: &VcConfig) -> Result<Run, CliError> {
    cfg.validate()?;
    let mut table = Table::new(VC_HEADER.to_vec());
    let mut passed = true;
    let mut trial_seeds = Vec::new();
    let summary = match &cfg.task {
        VcTask::ShatterBasis { s_max } => {
            let mut shattered = Vec::new();
            for s in 1..=*s_max {
                let pts = PointSet::standard_basis(s, s)?;
                let r = is_shattered(&pts, s, SetClass::Hemisphere)?;
                let ok = r.shattered && verify_witnesses(&pts, &r)?;
                passed &= ok;
                shattered.push(ok);
                push_vc(&mut table, "shatter-basis", VcRow {
                    n: Some(s),
                    s: Some(s),
                    k: Some(s),
                    label: "shattered".into(),
                    value: r.achieved_count.to_string(),
                    bound: Some((1u64 << s) as f64),
                    pass: Some(ok),
                    ..VcRow::default()
                });
                for (d, w) in r.witnesses.iter().flatten() {
                    push_vc(&mut table, "shatter-basis", VcRow {
                        n: Some(s),
                        s: Some(s),
                        k: Some(s),
                        label: d.signs(),
                        witness: describe_witness(w),
                        ..VcRow::default()
                    });
                }
            }
            json!({ "basis_shattered": shattered })
        }
        VcTask::RandomSets { s_grid, probes } => {
            let mut counts = Vec::new();
            for &s in s_grid {
                let hits = try_map_range(Execution::Parallel, *probes, |i| {
                    let mut st = RngStream::new(cfg.seed, i as u64).fork(s as u64);
                    let pts = (0..=s).map(|_| sample_sparse_unit(&mut st, s, s)).collect::<Result<Vec<_>, _>>()?;
                    let pts = PointSet::new(pts)?;
                    let r = is_shattered(&pts, s, SetClass::Hemisphere)?;
                    Ok::<_, onebit_rip::Error>(r.shattered)
                })?;
                let count = hits.iter().filter(|h| **h).count();
                passed &= count == 0;
                counts.push(json!({ "s": s, "shattered": count, "probes": probes }));
                push_vc(&mut table, "random-sets", VcRow {
                    n: Some(s),
                    s: Some(s),
                    k: Some(s + 1),
                    label: "shattered_sets".into(),
                    value: count.to_string(),
                    bound: Some(0.0),
                    pass: Some(count == 0),
                    ..VcRow::default()
                });
            }
            trial_seeds = seeds(cfg.seed, *probes);
            json!({ "random_sets": counts })
        }
        VcTask::Search {
            n_max,
            s_max,
            budget,
            classes,
        } => {
            let mut cells = Vec::new();
            for &class in classes {
                for n in 1..=*n_max {
                    for s in 1..=(*s_max).min(n) {
                        cells.push((class, n, s));
                    }
                }
            }
            let results = try_map_range(Execution::Parallel, cells.len(), |i| {
                let (class, n, s) = cells[i];
                let mut st = RngStream::new(cfg.seed, i as u64);
                let r = vc_lower_bound_search(n, s, class, *budget, &mut st)?;
                let verified = match (&r.points, &r.result) {
                    (Some(p), Some(res)) => verify_witnesses(p, res)?,
                    _ => r.size == 0,
                };
                Ok::<_, onebit_rip::Error>((r, verified, vc_upper_bound(n, s)?))
            })?;
            let mut rows = Vec::new();
            for (i, ((class, n, s), (r, verified, ub))) in cells.iter().zip(&results).enumerate() {
                let ok = *verified && (r.size as f64) <= *ub;
                passed &= ok;
                trial_seeds.push(TrialSeed {
                    trial: i,
                    seed: cfg.seed,
                    stream_id: i as u64,
                });
                let witness = r
                    .points
                    .as_ref()
                    .map(|p| p.points().iter().map(|u| join_floats(u.coords())).collect::<Vec<_>>().join(" | "))
                    .unwrap_or_default();
                rows.push(json!({ "class": class_name(*class), "n": n, "s": s, "lower_bound": r.size, "upper_bound": ub, "spent": r.spent }));
                push_vc(&mut table, "search", VcRow {
                    n: Some(*n),
                    s: Some(*s),
                    k: Some(r.size),
                    label: class_name(*class).into(),
                    value: r.size.to_string(),
                    bound: Some(*ub),
                    pass: Some(ok),
                    witness,
                    ..VcRow::default()
                });
            }
            // Wedge lower bounds stay within ten times the hemisphere ones.
            let mut consistent = true;
            for (i, (class, n, s)) in cells.iter().enumerate() {
                if *class != SetClass::Wedge {
                    continue;
                }
                if let Some(j) = cells.iter().position(|c| *c == (SetClass::Hemisphere, *n, *s)) {
                    let ok = results[i].0.size <= 10 * results[j].0.size;
                    consistent &= ok;
                    push_vc(&mut table, "search", VcRow {
                        n: Some(*n),
                        s: Some(*s),
                        label: "wedge-within-10x-hemisphere".into(),
                        value: results[i].0.size.to_string(),
                        bound: Some(10.0 * results[j].0.size as f64),
                        pass: Some(ok),
                        ..VcRow::default()
                    });
                }
            }
            passed &= consistent;
            json!({ "cells": rows, "wedge_consistent": consistent })
        }
        VcTask::Lambert { points, offset } => {
            let lo = -(-1.0f64).exp() + offset;
            let hi = -offset;
            let mut worst: f64 = 0.0;
            let mut failures = 0usize;
            for i in 0..*points {
                let x = if *points == 1 {
                    lo
                } else {
                    lo + (hi - lo) * i as f64 / (*points - 1) as f64
                };
                let w = lambert_w_minus1(x)?;
                let log_bound = (x * x).ln();
                let residual = (w * w.exp() - x).abs() / x.abs();
                let ok = w >= log_bound && residual <= 1e-12;
                worst = worst.max(residual);
                failures += usize::from(!ok);
                push_vc(&mut table, "lambert", VcRow {
                    label: "w_minus1".into(),
                    x: Some(x),
                    value: float(w),
                    bound: Some(log_bound),
                    pass: Some(ok),
                    ..VcRow::default()
                });
            }
            passed &= failures == 0;
            json!({ "points": points, "failures": failures, "worst_relative_residual": worst })
        }
        VcTask::Packing {
            n,
            s,
            sigma,
            t_grid,
            candidates,
            empirical_points,
        } => {
            let noise = NoiseModel::new(*sigma)?;
            let stream = RngStream::new(cfg.seed, 0);
            trial_seeds = seeds(cfg.seed, 1);
            let ub = vc_upper_bound(*n, *s)?;
            let mut ts = t_grid.clone();
            ts.sort_by(|a, b| b.total_cmp(a));
            let mut prev = 0usize;
            let mut monotone = true;
            let mut counts = Vec::new();
            for t in ts {
                let count = packing_estimate(*n, *s, noise, t, *candidates, *empirical_points, &stream)?;
                let ok = count >= prev;
                monotone &= ok;
                prev = count;
                counts.push(json!({ "t": t, "count": count }));
                push_vc(&mut table, "packing", VcRow {
                    n: Some(*n),
                    s: Some(*s),
                    label: "packing_count".into(),
                    x: Some(t),
                    value: count.to_string(),
                    bound: Some((ub + 1.0) * (1.0 / (t * t)).ln()),
                    pass: Some(ok),
                    ..VcRow::default()
                });
            }
            passed &= monotone;
            json!({ "counts": counts, "monotone": monotone, "vc_upper_bound": ub })
        }
    };
    Ok(Run {
        table,
        summary,
        trial_seeds,
        passed,
        codes: None,
    })
}
