//! Metrics computed from a report's stored series only, so that a stored
//! report can be re-verified without rerunning the simulation.

use std::collections::BTreeMap;

use super::run::{pattern_code, DECAY_TIMES};
use super::*;
use crate::plasticity::fit_stdp;

type Metrics = BTreeMap<String, f64>;

fn flag(b: bool) -> f64 {
    b as u8 as f64
}

fn min(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NAN, f64::min)
}

fn max(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NAN, f64::max)
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    mean_se(&v).0
}

/// Value of one per-seed metric across all runs.
fn across(report: &Report, key: &str) -> Vec<f64> {
    report.runs.iter().filter_map(|r| r.metrics.get(key).copied()).collect()
}

/// Fills per-seed and ensemble metrics and the failure flags.
pub fn derive_metrics(report: &mut Report, script: &ExperimentScript) -> Result<()> {
    match script.protocol {
        Protocol::Synaptogenesis => synaptogenesis(report),
        Protocol::Reinforcement => reinforcement(report, script),
        Protocol::FrequencySweep => frequency_sweep(report, script),
        Protocol::Pavlov => pavlov(report, script),
        Protocol::PatternRecognition => pattern(report, script),
        Protocol::Std => std_metrics(report, script),
        Protocol::Stdp => stdp(report),
    }
    report.failed = report.runs.iter().any(|r| r.failed);
    Ok(())
}

/// Fraction of the protocol, at its end, over which the terminal slope is taken.
const TERMINAL_WINDOW: f64 = 0.1;
/// Saturation onset: the conductance has covered this share of its
/// post-bridge rise.
const SATURATION_SHARE: f64 = 0.9;

/// Segmentation and shape metrics of one conductance trace.
pub(crate) fn trace_metrics(t: &[f64], g: &[f64], bridged: &[f64]) -> Option<Metrics> {
    let ib = bridged.iter().position(|&b| b > 0.0)?;
    let mut m = Metrics::new();
    let n = g.len();
    let base = if ib == 0 { g[0] } else { mean(g[..ib].iter().copied()) };
    let (gb, gf) = (g[ib], g[n - 1]);
    let t_end = t[n - 1];
    let peak = max((1..n).filter(|&k| t[k] > t[k - 1]).map(|k| (g[k] - g[k - 1]) / (t[k] - t[k - 1])));
    let t_w = t_end * (1.0 - TERMINAL_WINDOW);
    let kw = t.iter().position(|&x| x >= t_w).unwrap_or(n - 1);
    let terminal = if t_end > t[kw] { (gf - g[kw]) / (t_end - t[kw]) } else { 0.0 };
    let sat = (ib..n).find(|&k| g[k] >= gb + SATURATION_SHARE * (gf - gb)).unwrap_or(n - 1);
    m.insert("bridge_time_s".into(), t[ib]);
    m.insert("saturation_time_s".into(), t[sat]);
    m.insert("baseline_S".into(), base);
    m.insert("bridge_S".into(), gb);
    m.insert("final_S".into(), gf);
    m.insert("baseline_fraction".into(), base / gf);
    m.insert("rise_factor".into(), gb / base);
    m.insert("post_bridge_gain".into(), gf / gb);
    m.insert("peak_slope_S_per_s".into(), peak);
    m.insert("terminal_slope_S_per_s".into(), terminal);
    m.insert("terminal_slope_fraction".into(), if peak > 0.0 { terminal / peak } else { 0.0 });
    Some(m)
}

fn synaptogenesis(report: &mut Report) {
    for r in &mut report.runs {
        let Some(tr) = r.series("trace") else {
            r.failed = true;
            continue;
        };
        let (t, g, b, v) = (tr.col("t_s"), tr.col("conductance_S"), tr.col("bridged"), tr.col("volume_um3"));
        match trace_metrics(&t, &g, &b) {
            Some(m) => {
                let ib = b.iter().position(|&x| x > 0.0).unwrap();
                r.metrics = m;
                r.metrics.insert("bridge_volume_um3".into(), v[ib]);
                r.metrics.insert("final_volume_um3".into(), v[v.len() - 1]);
                r.failed = false;
            }
            None => {
                r.metrics.insert("final_S".into(), g.last().copied().unwrap_or(0.0));
                r.failed = true;
            }
        }
    }
    let n = report.runs.len() as f64;
    let bridged = report.runs.iter().filter(|r| !r.failed).count() as f64;
    let m = &mut report.metrics;
    m.insert("bridged_fraction".into(), bridged / n);
    let a = |k: &str| across(report, k);
    let vals = [
        ("max_baseline_fraction", max(a("baseline_fraction"))),
        ("min_rise_factor", min(a("rise_factor"))),
        ("max_terminal_slope_fraction", max(a("terminal_slope_fraction"))),
        ("mean_bridge_time_s", mean(a("bridge_time_s"))),
        ("max_bridge_time_s", max(a("bridge_time_s"))),
        ("mean_saturation_time_s", mean(a("saturation_time_s"))),
        ("mean_final_S", mean(a("final_S"))),
        ("mean_bridge_volume_um3", mean(a("bridge_volume_um3"))),
        ("mean_final_volume_um3", mean(a("final_volume_um3"))),
        ("min_post_bridge_gain", min(a("post_bridge_gain"))),
    ];
    for (k, v) in vals {
        report.metrics.insert(k.into(), v);
    }
}

fn reinforcement(report: &mut Report, script: &ExperimentScript) {
    let hours48 = DECAY_TIMES.iter().position(|&t| t == 172800.0).expect("48 h checkpoint");
    let days7 = DECAY_TIMES.len() - 1;
    for r in &mut report.runs {
        let ep = r.series("epochs").cloned().unwrap_or_else(|| Table::new("epochs", &[]));
        let g = ep.col("g_iv_S");
        r.failed = g.is_empty();
        if g.is_empty() {
            continue;
        }
        let incr: Vec<f64> = g.windows(2).map(|w| w[1] - w[0]).collect();
        let up = incr.iter().all(|&d| d > 0.0);
        let shrink = incr.len() < 2 || incr[incr.len() - 1] < incr[0];
        let vol = ep.col("volume_um3");
        r.metrics.insert("strictly_increasing".into(), flag(up));
        r.metrics.insert("shrinking_increments".into(), flag(shrink));
        r.metrics.insert("g_bridge_S".into(), g[0]);
        r.metrics.insert("g_final_S".into(), g[g.len() - 1]);
        r.metrics.insert("gain".into(), g[g.len() - 1] / g[0]);
        r.metrics.insert("bridge_volume_um3".into(), vol[0]);
        r.metrics.insert("final_volume_um3".into(), vol[vol.len() - 1]);
        if let Some(d) = r.series("decay").cloned() {
            r.metrics.insert("weak_class_g48".into(), d.col("weak_class")[hours48]);
            r.metrics.insert("bridge_volume_g48".into(), d.col("bridge_volume")[hours48]);
            r.metrics.insert("final_volume_g7d".into(), d.col("final_volume")[days7]);
        }
    }
    let ok: Vec<&SeedRun> = report.runs.iter().filter(|r| !r.failed).collect();
    let n = report.runs.len() as f64;
    let frac = |k: &str| ok.iter().filter(|r| r.metrics.get(k) == Some(&1.0)).count() as f64 / n;
    let vals = [
        ("bridged_fraction", ok.len() as f64 / n),
        ("increasing_fraction", frac("strictly_increasing")),
        ("shrinking_fraction", frac("shrinking_increments")),
        ("min_gain", min(across(report, "gain"))),
        ("weak_class_g48", mean(across(report, "weak_class_g48"))),
        ("min_final_volume_g7d", min(across(report, "final_volume_g7d"))),
        ("mean_final_volume_g7d", mean(across(report, "final_volume_g7d"))),
        ("volume_ratio", mean(across(report, "final_volume_um3")) / script.retention.v_weak),
    ];
    for (k, v) in vals {
        report.metrics.insert(k.into(), v);
    }
}

fn fkey(f: f64) -> String {
    format!("{f}Hz")
}

/// Least-squares log-space areal capacitance matching `targets` (F) to
/// mean surfaces `surfaces` (µm²).
pub fn calibrate_capacitance(surfaces: &[f64], targets: &[f64]) -> f64 {
    let n = surfaces.len().min(targets.len());
    let s: f64 = (0..n).map(|k| targets[k].ln() - surfaces[k].ln()).sum();
    (s / n as f64).exp()
}

fn frequency_sweep(report: &mut Report, script: &ExperimentScript) {
    let o = &script.options;
    let mut freqs = o.frequencies.clone();
    freqs.sort_by(f64::total_cmp);
    // per frequency: surface, thickness, branch points, channel conductance
    let mut by_f: BTreeMap<String, [Vec<f64>; 5]> = BTreeMap::new();
    for r in &report.runs {
        let Some(t) = r.series("morphology") else { continue };
        for row in &t.rows {
            let e = by_f.entry(fkey(row[0])).or_default();
            e[0].push(row[4]);
            e[1].push(row[2]);
            e[2].push(row[3]);
            e[3].push(row[5]);
            e[4].push(row[6]);
        }
    }
    let get = |f: f64, k: usize| by_f.get(&fkey(f)).map(|e| e[k].clone()).unwrap_or_default();
    let target = |f: f64| o.frequencies.iter().position(|&x| x == f).and_then(|k| o.targets_uf.get(k)).map(|t| t * 1e-6);
    let cal: Vec<(f64, f64)> = o
        .calibrate_at
        .iter()
        .filter_map(|&f| target(f).map(|t| (mean_se(&get(f, 0)).0, t)))
        .collect();
    let c_s = calibrate_capacitance(&cal.iter().map(|c| c.0).collect::<Vec<_>>(), &cal.iter().map(|c| c.1).collect::<Vec<_>>());
    let m = &mut report.metrics;
    m.insert("c_s_F_per_um2".into(), c_s);
    let mut ens = Table::new(
        "ensemble",
        &[
            "frequency_Hz",
            "thickness_mean_um",
            "thickness_se_um",
            "branch_points_mean",
            "branch_points_se",
            "surface_mean_um2",
            "capacitance_uF",
            "capacitance_se_uF",
            "tau_mean_s",
            "bridged_fraction",
            "target_uF",
        ],
    );
    let mut rows = Vec::new();
    for &f in &freqs {
        let (w, wse) = mean_se(&get(f, 1));
        let (bp, bpse) = mean_se(&get(f, 2));
        let (s, sse) = mean_se(&get(f, 0));
        let taus: Vec<f64> = get(f, 0).iter().zip(get(f, 3)).filter(|p| p.1 > 0.0).map(|(s, g)| c_s * s / g).collect();
        let bridged = mean_se(&get(f, 4)).0;
        let tau = mean_se(&taus).0;
        let row = vec![f, w, wse, bp, bpse, s, c_s * s * 1e6, c_s * sse * 1e6, tau, bridged, target(f).map_or(f64::NAN, |t| t * 1e6)];
        let k = fkey(f);
        m.insert(format!("thickness_mean_{k}"), w);
        m.insert(format!("branch_points_mean_{k}"), bp);
        m.insert(format!("capacitance_uF_{k}"), c_s * s * 1e6);
        m.insert(format!("tau_s_{k}"), tau);
        m.insert(format!("bridged_fraction_{k}"), bridged);
        if let (Some(t), false) = (target(f), o.calibrate_at.contains(&f)) {
            m.insert(format!("heldout_rel_error_{k}"), c_s * s / t - 1.0);
        }
        ens.push(row.clone());
        rows.push(row);
    }
    let separated = |mean_col: usize, se_col: usize, sign: f64| {
        rows.windows(2).all(|w| {
            let d = sign * (w[1][mean_col] - w[0][mean_col]);
            d > 0.0 && d >= (w[0][se_col].powi(2) + w[1][se_col].powi(2)).sqrt()
        })
    };
    let increasing = |col: usize| rows.windows(2).all(|w| w[1][col] > w[0][col]);
    m.insert("thickness_decreasing_1se".into(), flag(separated(1, 2, -1.0)));
    m.insert("branching_increasing_1se".into(), flag(separated(3, 4, 1.0)));
    m.insert("capacitance_increasing".into(), flag(increasing(6)));
    m.insert("tau_increasing".into(), flag(increasing(8)));
    let worst = freqs
        .iter()
        .filter_map(|&f| m.get(&format!("heldout_rel_error_{}", fkey(f))).map(|e| e.abs()))
        .fold(0.0, f64::max);
    m.insert("max_heldout_abs_error".into(), worst);
    report.tables = vec![ens];
}

fn pavlov(report: &mut Report, script: &ExperimentScript) {
    for r in &mut report.runs {
        let Some(t) = r.series("phases").cloned() else {
            r.failed = true;
            continue;
        };
        let base = r.series("baseline").map(|b| b.col("current_A")[0]).unwrap_or(f64::NAN);
        for (k, p) in script.phases.iter().enumerate() {
            let Some(row) = t.rows.get(k) else { continue };
            let n = &p.name;
            r.metrics.insert(format!("volume_{n}"), row[3]);
            r.metrics.insert(format!("conditioned_volume_{n}"), row[4]);
            r.metrics.insert(format!("bridged_{n}"), row[5]);
            r.metrics.insert(format!("response_ratio_{n}"), row[6] / base);
            r.metrics.insert(format!("cs_us_ratio_{n}"), row[6] / row[7]);
            r.metrics.insert(format!("overlap_{n}"), row[8]);
            r.metrics.insert(format!("field_ratio_{n}"), row[9]);
        }
        r.failed = false;
    }
    for p in &script.phases {
        let n = &p.name;
        let vals = [
            (format!("max_volume_{n}"), max(across(report, &format!("volume_{n}")))),
            (format!("max_conditioned_volume_{n}"), max(across(report, &format!("conditioned_volume_{n}")))),
            (format!("bridged_fraction_{n}"), mean(across(report, &format!("bridged_{n}")))),
            (format!("min_response_ratio_{n}"), min(across(report, &format!("response_ratio_{n}")))),
            (format!("max_response_ratio_{n}"), max(across(report, &format!("response_ratio_{n}")))),
            (format!("min_cs_us_ratio_{n}"), min(across(report, &format!("cs_us_ratio_{n}")))),
            (format!("max_overlap_{n}"), max(across(report, &format!("overlap_{n}")))),
            (format!("max_field_ratio_{n}"), max(across(report, &format!("field_ratio_{n}")))),
        ];
        for (k, v) in vals {
            report.metrics.insert(k, v);
        }
    }
}

fn pattern(report: &mut Report, script: &ExperimentScript) {
    let o = &script.options;
    for r in &mut report.runs {
        let Some(t) = r.series("readout").cloned() else {
            r.failed = true;
            continue;
        };
        for name in &o.train {
            let code = pattern_code(name);
            let rows: Vec<&Vec<f64>> = t.rows.iter().filter(|row| row[0] == code).collect();
            let trained = rows.iter().find(|row| row[1] == code).map(|row| row[2]);
            let others = rows.iter().filter(|row| row[1] != code).map(|row| row[2]);
            let strict = trained.is_some_and(|i| i > 0.0 && others.clone().all(|x| x < i));
            r.metrics.insert(format!("trained_strictly_highest_{name}"), flag(strict));
            if let (Some(i8), Some(it)) = (rows.iter().find(|row| row[1] == 8.0).map(|row| row[2]), trained) {
                if code != 8.0 {
                    r.metrics.insert(format!("eight_below_trained_{name}"), flag(i8 < it));
                    r.metrics.insert(format!("eight_confidence_{name}"), i8 / it);
                }
            }
            if let Some(b) = rows.iter().find(|row| row[1] == -1.0) {
                r.metrics.insert(format!("blank_confidence_{name}"), b[3]);
            }
            for row in &rows {
                if row[1] >= 0.0 {
                    r.metrics.insert(format!("confidence_{name}_{}", row[1]), row[3]);
                }
            }
        }
        r.failed = false;
    }
    for name in &o.train {
        let frac = |k: String| mean(across(report, &k));
        let vals = [
            (format!("strictly_highest_fraction_{name}"), frac(format!("trained_strictly_highest_{name}"))),
            (format!("eight_below_fraction_{name}"), frac(format!("eight_below_trained_{name}"))),
            (format!("max_blank_confidence_{name}"), max(across(report, &format!("blank_confidence_{name}")))),
            (format!("max_eight_confidence_{name}"), max(across(report, &format!("eight_confidence_{name}")))),
        ];
        for (k, v) in vals {
            report.metrics.insert(k, v);
        }
    }
}

fn std_metrics(report: &mut Report, script: &ExperimentScript) {
    let o = &script.options;
    // pulse windows from the timeline of non-growth phases
    let mut spans = Vec::new();
    let mut t = 0.0;
    for p in script.phases.iter().filter(|p| p.mode != Mode::Grow) {
        let t1 = t + p.duration();
        spans.push((p.name.clone(), t, t1, p.stimuli.get(&o.gate).is_some()));
        t = t1;
    }
    let first_pulse = spans.iter().find(|s| s.3).map(|s| s.1);
    for r in &mut report.runs {
        let tr = r.series("trace").cloned().unwrap_or_else(|| Table::new("trace", &[]));
        r.failed = tr.rows.is_empty();
        if !tr.rows.is_empty() {
            let (ts, i) = (tr.col("t_s"), tr.col("current_A"));
            let at = |x: f64| {
                let k = ts.iter().position(|&s| s >= x - 1e-9).unwrap_or(ts.len() - 1);
                i[k]
            };
            let base = at(first_pulse.unwrap_or(0.0));
            r.metrics.insert("baseline_A".into(), base);
            for (name, t0, t1, pulsed) in &spans {
                let inside: Vec<f64> = ts.iter().zip(&i).filter(|(s, _)| *s > t0 && *s <= t1).map(|p| *p.1).collect();
                if *pulsed {
                    r.metrics.insert(format!("suppression_{name}"), mean(inside.iter().copied()) / base);
                    r.metrics.insert(format!("min_fraction_{name}"), min(inside.iter().copied()) / base);
                } else {
                    r.metrics.insert(format!("recovery_{name}"), at(*t1) / base);
                    let dev = max(inside.iter().map(|x| (x / base - 1.0).abs()));
                    r.metrics.insert(format!("deviation_{name}"), dev);
                }
            }
        }
        if let Some(p) = r.series("ppd").cloned() {
            for &f in &o.frequencies {
                let rows: Vec<&Vec<f64>> = p.rows.iter().filter(|row| row[0] == f).collect();
                // non-decreasing: a fast network sits at 1 within rounding
                let mut mono = !rows.is_empty();
                for w in rows.windows(2) {
                    mono &= w[1][2] >= w[0][2] && w[1][1] > w[0][1];
                }
                r.metrics.insert(format!("ppd_monotone_{}", fkey(f)), flag(mono));
                for row in &rows {
                    r.metrics.insert(format!("ppd_{}_{}ms", fkey(f), row[1]), row[2]);
                }
                if let Some(row) = rows.first() {
                    r.metrics.insert(format!("tau_ch_s_{}", fkey(f)), row[3]);
                }
            }
        }
    }
    let mut put = Metrics::new();
    for (name, _, _, pulsed) in &spans {
        if *pulsed {
            put.insert(format!("max_suppression_{name}"), max(across(report, &format!("suppression_{name}"))));
        } else {
            put.insert(format!("min_recovery_{name}"), min(across(report, &format!("recovery_{name}"))));
            put.insert(format!("max_deviation_{name}"), max(across(report, &format!("deviation_{name}"))));
        }
    }
    for &f in &o.frequencies {
        let k = fkey(f);
        put.insert(format!("ppd_monotone_fraction_{k}"), mean(across(report, &format!("ppd_monotone_{k}"))));
        put.insert(format!("mean_tau_ch_s_{k}"), mean(across(report, &format!("tau_ch_s_{k}"))));
        for &iv in &o.intervals_ms {
            let key = format!("ppd_{k}_{iv}ms");
            put.insert(format!("max_{key}"), max(across(report, &key)));
            put.insert(format!("min_{key}"), min(across(report, &key)));
        }
    }
    report.metrics.extend(put);
}

fn stdp(report: &mut Report) {
    for r in &mut report.runs {
        let t = r.series("stdp").cloned().unwrap_or_else(|| Table::new("stdp", &[]));
        r.failed = t.rows.is_empty();
        if t.rows.is_empty() {
            continue;
        }
        let table: Vec<(f64, f64)> = t.rows.iter().map(|row| (row[0] * 1e-3, row[1])).collect();
        let side = |pos: bool| {
            let mut s: Vec<(f64, f64)> = table.iter().copied().filter(|p| (p.0 > 0.0) == pos && p.0 != 0.0).collect();
            s.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
            s
        };
        let (plus, minus) = (side(true), side(false));
        let anti = plus.iter().all(|p| p.1 > 0.0) && minus.iter().all(|p| p.1 < 0.0);
        let mono = [&plus, &minus].iter().all(|s| s.windows(2).all(|w| w[1].1.abs() < w[0].1.abs()));
        let (p, r2) = fit_stdp(&table);
        r.metrics.insert("antisymmetric".into(), flag(anti));
        r.metrics.insert("monotone".into(), flag(mono));
        r.metrics.insert("r2".into(), r2);
        r.metrics.insert("fit_a_plus".into(), p.a_plus);
        r.metrics.insert("fit_a_minus".into(), p.a_minus);
        r.metrics.insert("fit_tau_s".into(), p.tau_plus);
    }
    let n = report.runs.len() as f64;
    let ok = |k: &str| report.runs.iter().filter(|r| r.metrics.get(k) == Some(&1.0)).count() as f64 / n;
    let vals = [
        ("antisymmetric_fraction", ok("antisymmetric")),
        ("monotone_fraction", ok("monotone")),
        ("min_r2", min(across(report, "r2"))),
    ];
    for (k, v) in vals {
        report.metrics.insert(k.into(), v);
    }
}
