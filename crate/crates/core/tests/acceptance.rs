//! End-to-end acceptance run. Criteria are evaluated in order on one
//! thread so each timing is a real wall-clock figure, and every criterion
//! prints one PASS/FAIL line whether or not an earlier one failed.

mod common;

use std::io::Write as _;
use std::time::{Duration, Instant};

use fdp::artifacts;
use fdp::circuit::{self, Branch, Netlist};
use fdp::field::{bias, solve_potential, solve_with, linearity_check, Electrode, ElectrodeId, Role, SimDomain, SolveOptions};
use fdp::growth::FiberGraph;
use fdp::plasticity::{self, affine_residual, Retention, SynapseState};
use fdp::protocols::{self, retention_curve, stock, DECAY_TIMES, ExperimentScript, Format, Report};
use fdp::render::SvgStyle;
use fdp::signals::{pairwise_overlap, Waveform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Collects failed checks of one criterion.
#[derive(Default)]
struct Verdict {
    notes: Vec<String>,
    failures: Vec<String>,
}

impl Verdict {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if !ok {
            self.failures.push(what.clone());
        }
        self.notes.push(format!("{}{what}", if ok { "" } else { "!" }));
    }

    fn within(&mut self, elapsed: Duration, limit_s: f64) {
        self.check(elapsed.as_secs_f64() < limit_s, format!("runtime {:.2} s < {limit_s} s", elapsed.as_secs_f64()));
    }

    /// Every criterion of the report named in `names`, with its value.
    fn criteria(&mut self, report: &Report, names: &[&str]) {
        for name in names {
            let hits: Vec<_> = report.criteria.iter().filter(|c| c.criterion.starts_with(&format!("{name} "))).collect();
            if hits.is_empty() {
                self.check(false, format!("{name} not evaluated"));
            }
            for c in hits {
                let v = c.value.map_or("missing".to_string(), |v| format!("{v:.4}"));
                self.check(c.passed, format!("{} [{v}]", c.criterion));
            }
        }
    }
}

/// Writes past the harness capture so the lines land in the test log.
fn say(line: &str) {
    let mut e = std::io::stderr().lock();
    let _ = writeln!(e, "{line}");
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn run(script: &ExperimentScript) -> (Report, Duration) {
    let (r, dt) = timed(|| protocols::run(script));
    (r.unwrap_or_else(|e| panic!("{} failed: {e}", script.name)), dt)
}

fn plates(n: usize) -> SimDomain {
    SimDomain::new(
        n,
        n,
        512.0 / n as f64,
        vec![Electrode::rect("lo", Role::Input, 0, 0, 0, n - 1), Electrode::rect("hi", Role::Input, n - 1, 0, n - 1, n - 1)],
    )
    .unwrap()
}

fn random_boundaries(rng: &mut ChaCha8Rng, n: usize) -> (SimDomain, fdp::field::Bias) {
    let mut es = Vec::new();
    let mut b = fdp::field::Bias::new();
    let mut used = vec![false; n * n];
    for k in 0..rng.random_range(2..6) {
        let (w, h) = (rng.random_range(1..6), rng.random_range(1..6));
        let (x0, y0) = (rng.random_range(0..n - w), rng.random_range(0..n - h));
        if (y0..y0 + h).any(|y| (x0..x0 + w).any(|x| used[y * n + x])) {
            continue;
        }
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                used[y * n + x] = true;
            }
        }
        let id = format!("e{k}");
        if rng.random_bool(0.8) {
            b.insert(ElectrodeId::from(id.as_str()), rng.random_range(-5.0..5.0));
        }
        es.push(Electrode::rect(id.as_str(), Role::Input, x0, y0, x0 + w - 1, y0 + h - 1));
    }
    (SimDomain::new(n, n, 4.0, es).unwrap(), b)
}

fn field_solver() -> Verdict {
    let mut v = Verdict::default();
    let ((), dt) = timed(|| {
        let d = plates(128);
        let g = FiberGraph::for_domain(&d);
        let opts = SolveOptions { error_control: true, ..SolveOptions::tol(1e-7) };
        let p = solve_with(&d, &g, &bias([("lo", 0.0), ("hi", 1.0)]), &opts, None).unwrap();
        let mut err = 0.0f64;
        for y in 0..128 {
            for x in 0..128 {
                err = err.max((p.value(x, y) - x as f64 / 127.0).abs());
            }
        }
        v.check(err < 1e-3, format!("parallel plate max error {err:.2e} < 1e-3"));

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut violations = 0;
        for _ in 0..100 {
            let (d, b) = random_boundaries(&mut rng, 32);
            let p = solve_potential(&d, &FiberGraph::for_domain(&d), &b, 1e-7).unwrap();
            if let Some((lo, hi)) = p.boundary_range() {
                violations += (0..d.len()).filter(|&i| p.is_electrolyte(i) && !(p.values[i] >= lo - 1e-9 && p.values[i] <= hi + 1e-9)).count();
            }
        }
        v.check(violations == 0, format!("maximum principle on 100 random boundaries ({violations} violations)"));

        let d = SimDomain::new(
            48,
            48,
            4.0,
            vec![
                Electrode::rect("bell", Role::Input, 6, 6, 9, 9),
                Electrode::rect("food", Role::Input, 6, 36, 9, 39),
                Electrode::rect("sal", Role::Output, 38, 20, 41, 27),
            ],
        )
        .unwrap();
        let mut g = FiberGraph::for_domain(&d);
        for x in 10..38 {
            g.add_fixture(&d, (x, 24), "sal", 1.0).unwrap();
        }
        let b = |x: f64, y: f64| bias([("bell", x), ("food", y), ("sal", 0.0)]);
        let lin = linearity_check(&d, &g, &b(2.0, 0.0), &b(0.0, 2.0), 1.0, 1.0, 1e-6).unwrap()
            && linearity_check(&d, &g, &b(1.0, 1.5), &b(0.5, -1.0), 2.0, -3.0, 1e-6).unwrap();
        v.check(lin, "superposition within 10 tol");
    });
    v.within(dt, 5.0);
    v
}

fn circuit_oracle() -> Verdict {
    let mut v = Verdict::default();
    let ((), dt) = timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let net = common::random_net(&mut rng);
            let w = 10f64.powf(rng.random_range(0.0..6.0));
            worst = worst.max(common::oracle_mismatch(&net, w));
        }
        v.check(worst <= 1e-9, format!("200 random RC networks, worst relative mismatch {worst:.2e} <= 1e-9"));

        let two = |g1: f64, g2: f64, series: bool| {
            let mut n = Netlist::new();
            let a = n.add_terminal("a");
            let b = n.add_terminal("b");
            if series {
                let m = n.add_node("m");
                n.add_conductance(a, m, g1, Branch::Channel);
                n.add_conductance(m, b, g2, Branch::Channel);
            } else {
                n.add_conductance(a, b, g1, Branch::Channel);
                n.add_conductance(a, b, g2, Branch::Channel);
            }
            circuit::channel_conductance(&n, "a", "b").unwrap()
        };
        // bit-equal when the closed form is representable, else within 2 ulp
        let mut exact = true;
        for (g1, g2) in [(1.0, 1.0), (2.0, 2.0), (0.5, 0.5), (4.0, 0.25), (1e-3, 3e-3)] {
            let close = |got: f64, want: f64| got == want || (got - want).abs() <= 2.0 * f64::EPSILON * want;
            exact &= two(g1, g2, false) == g1 + g2;
            exact &= close(two(g1, g2, true), 1.0 / (1.0 / g1 + 1.0 / g2));
        }
        exact &= two(1.0, 1.0, true) == 0.5 && two(2.0, 2.0, true) == 1.0 && two(0.5, 0.5, true) == 0.25;
        v.check(exact, "series and parallel closed forms exact");
    });
    v.within(dt, 5.0);
    v
}

fn morphology(sweep: &Report, dt: Duration) -> Verdict {
    let mut v = Verdict::default();
    v.check(sweep.seeds.len() == 32, format!("{} seeds", sweep.seeds.len()));
    v.criteria(sweep, &["thickness_decreasing_1se", "branching_increasing_1se"]);
    let f = sweep.runs[0].series("morphology").map(|t| t.col("frequency_Hz")).unwrap_or_default();
    v.check(f == [10.0, 60.0, 200.0], format!("frequencies {f:?} Hz"));
    v.within(dt, 300.0);
    v
}

fn capacitance(sweep: &Report, dt: Duration) -> Verdict {
    let mut v = Verdict::default();
    v.criteria(sweep, &["capacitance_increasing", "tau_increasing", "max_heldout_abs_error"]);
    v.within(dt, 300.0);
    v
}

fn synaptogenesis(r: &Report, dt: Duration) -> Verdict {
    let mut v = Verdict::default();
    v.check(r.seeds.len() == 32, format!("{} seeds", r.seeds.len()));
    v.criteria(r, &["bridged_fraction", "max_baseline_fraction", "min_rise_factor", "max_terminal_slope_fraction"]);
    let segmented = r.runs.iter().filter(|run| {
        let (b, s) = (run.metrics.get("bridge_time_s"), run.metrics.get("saturation_time_s"));
        matches!((b, s), (Some(&b), Some(&s)) if b > 0.0 && b < s && s <= 8.0)
    });
    let n = segmented.count();
    v.check(n == r.runs.len(), format!("three-phase segmentation on {n}/{} seeds", r.runs.len()));
    v.within(dt, 300.0);
    v
}

fn reinforcement(r: &Report, dt: Duration) -> Verdict {
    let mut v = Verdict::default();
    v.criteria(r, &["bridged_fraction", "increasing_fraction", "shrinking_fraction"]);
    let flat: Vec<u64> = r
        .runs
        .iter()
        .filter(|run| run.metrics.get("strictly_increasing") != Some(&1.0) || run.metrics.get("shrinking_increments") != Some(&1.0))
        .map(|run| run.seed)
        .collect();
    v.check(flat.is_empty(), format!("seeds off the monotone pattern {flat:?}"));
    v.within(dt, 120.0);
    v
}

fn decay(r: &Report, script: &ExperimentScript) -> Verdict {
    let mut v = Verdict::default();
    let ret = script.retention;
    let (worst, dt) = timed(|| {
        let mut worst = 0.0f64;
        let mut curves: Vec<(f64, Vec<f64>)> = vec![(ret.v_weak, retention_curve(&ret, ret.v_weak).unwrap())];
        for run in &r.runs {
            let Some(e) = run.series("epochs") else { continue };
            for vol in [e.rows[0][4], e.rows[e.rows.len() - 1][4]] {
                curves.push((vol, retention_curve(&ret, vol).unwrap()));
            }
        }
        for (vol, c) in &curves {
            let floor = ret.g_inf_fraction(*vol);
            let pts: Vec<(f64, f64)> = DECAY_TIMES.iter().zip(c).map(|(&t, &g)| (t, (g - floor).ln())).collect();
            worst = worst.max(affine_residual(&pts));
        }
        worst
    });
    v.criteria(r, &["weak_class_g48", "min_final_volume_g7d"]);
    v.check(worst < 1e-9, format!("exponential-form residual {worst:.2e} < 1e-9"));
    v.within(dt, 1.0);
    v
}

fn ppd(r: &Report, script: &ExperimentScript, dt: Duration) -> Verdict {
    let mut v = Verdict::default();
    v.check(script.options.intervals_ms.len() == 5, format!("{}-point interval sweep", script.options.intervals_ms.len()));
    v.criteria(r, &["max_ppd_200Hz_200ms", "min_ppd_10Hz_200ms", "ppd_monotone_fraction_10Hz", "ppd_monotone_fraction_200Hz"]);
    // each network's ratios follow from its own charging time
    let mut consistent = true;
    for run in &r.runs {
        let t = run.series("ppd").unwrap();
        for row in &t.rows {
            consistent &= row[3] > 0.0 && (plasticity::ppd_closed_form(row[3], row[1] * 1e-3) - row[2]).abs() <= 1e-9;
        }
    }
    v.check(consistent, "ratios reproduce from the tabulated charging times");
    v.within(dt, 60.0);
    v
}

fn std_trace(r: &Report, dt: Duration) -> Verdict {
    let mut v = Verdict::default();
    let run = &r.runs[0];
    let at = |k: &str| run.marks.get(k).copied().unwrap_or(f64::NAN);
    let windows = [at("rest1_end_s"), at("pulse1_end_s"), at("rest3_end_s"), at("pulse2_end_s")];
    let near = |a: f64, b: f64| (a - b).abs() < 1e-9;
    v.check(
        near(windows[0], 10.0) && near(windows[1], 20.0) && near(windows[2], 35.0) && near(windows[3], 40.0),
        format!("pulse windows {windows:?}"),
    );
    v.criteria(r, &["max_suppression_pulse1", "max_suppression_pulse2", "min_recovery_rest2"]);
    v.within(dt, 60.0);
    v
}

fn stdp(r: &Report, script: &ExperimentScript, dt: Duration) -> Verdict {
    let mut v = Verdict::default();
    let mut grid = script.options.dt_ms.clone();
    grid.sort_by(f64::total_cmp);
    v.check(grid == [-100.0, -25.0, -10.0, -5.0, -2.0, 2.0, 5.0, 10.0, 25.0, 100.0], format!("dt grid {grid:?} ms"));
    v.criteria(r, &["antisymmetric_fraction", "monotone_fraction", "min_r2"]);
    v.within(dt, 120.0);
    v
}

fn pavlov(r: &Report, dt: Duration) -> Verdict {
    let mut v = Verdict::default();
    v.check(r.seeds.len() == 32, format!("{} seeds", r.seeds.len()));
    v.criteria(
        r,
        &[
            "max_conditioned_volume_bell_alone",
            "max_conditioned_volume_offset",
            "bridged_fraction_paired",
            "min_response_ratio_test",
        ],
    );
    let w = Waveform::square(2.0, 50.0);
    let o = pairwise_overlap(&w, &w, 0.010).unwrap();
    v.check(o == 0.0, format!("pairwise overlap at 10 ms, 50 Hz = {o}"));
    v.within(dt, 600.0);
    v
}

fn pattern(r: &Report, dt: Duration) -> Verdict {
    let mut v = Verdict::default();
    v.check(r.seeds.len() == 16, format!("{} seeds", r.seeds.len()));
    v.criteria(
        r,
        &[
            "strictly_highest_fraction_0",
            "eight_below_fraction_0",
            "max_blank_confidence_0",
            "strictly_highest_fraction_5",
            "max_blank_confidence_5",
        ],
    );
    v.within(dt, 600.0);
    v
}

fn all_artifacts(report: &Report, script: &ExperimentScript) -> Vec<artifacts::Artifact> {
    artifacts::build(report, script, &[Format::Csv, Format::Json, Format::Svg], &SvgStyle::default()).unwrap()
}

fn determinism(ensembles: &[(&ExperimentScript, &Report)]) -> Verdict {
    let mut v = Verdict::default();
    for (script, ensemble) in ensembles {
        let seed = script.seeds[0];
        let one = script.with_seed(seed);
        let (a, b) = (protocols::run(&one).unwrap(), protocols::run(&one).unwrap());
        let (fa, fb) = (all_artifacts(&a, &one), all_artifacts(&b, &one));
        let same_bytes = fa == fb && artifacts::manifest(&a, &fa).unwrap() == artifacts::manifest(&b, &fb).unwrap();
        v.check(same_bytes, format!("{}: {} artifacts byte-identical", script.name, fa.len()));
        // the seed's geometry does not depend on which other seeds ran with it
        let hashes = |r: &Report| r.runs.iter().find(|x| x.seed == seed).unwrap().snapshots.iter().map(|s| s.hash.clone()).collect::<Vec<_>>();
        v.check(hashes(&a) == hashes(ensemble), format!("{}: graph hashes match the ensemble run", script.name));
        v.check(ensemble.recheck(script).unwrap(), format!("{}: verdicts recompute from stored series", script.name));
    }
    v
}

fn timescales() -> Verdict {
    let mut v = Verdict::default();
    let (_, dt) = timed(|| {
        let fine = plasticity::STDP_STEP;
        v.check(fine <= 1e-5, format!("STDP step {fine:e} s"));
        let tau = 0.02;
        let pot = plasticity::stdp_simulate(2e-3, 1.0, tau, 1.0).unwrap();
        let dep = plasticity::stdp_simulate(-2e-3, 1.0, tau, 1.0).unwrap();
        v.check(pot > 0.0 && dep < 0.0, format!("2 ms pairing: dG/G {pot:+.4} / {dep:+.4}"));

        let ret = Retention::default();
        let week = DECAY_TIMES[DECAY_TIMES.len() - 1];
        v.check(week >= 6.048e5, format!("decay horizon {week} s"));
        let s = SynapseState::new(1.0, 1, tau, &ret, ret.v_weak).unwrap();
        let g = plasticity::decay(&s, week).unwrap();
        let expect = (-week / ret.tau(ret.v_weak).unwrap()).exp();
        v.check((g - expect).abs() <= 1e-15, format!("7 d weak-class G/G0 {g:.6e} analytic"));
        let span = (week / fine).log10();
        v.check(span >= 9.0, format!("{span:.2} orders of magnitude"));
    });
    v.within(dt, 5.0);
    v
}

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    let mut emit = |n: usize, name: &str, v: Verdict| {
        let status = if v.failures.is_empty() { "PASS" } else { "FAIL" };
        say(&format!("criterion {n:>2} {name}: {status} ({})", v.notes.join("; ")));
        if !v.failures.is_empty() {
            failed.push(format!("{n} {name}: {}", v.failures.join("; ")));
        }
    };

    emit(1, "field solver", field_solver());
    emit(2, "circuit oracle", circuit_oracle());

    let sweep_s = stock::frequency_sweep();
    let (sweep, sweep_t) = run(&sweep_s);
    emit(3, "morphology vs frequency", morphology(&sweep, sweep_t));
    emit(4, "capacitance calibration", capacitance(&sweep, sweep_t));

    let syn_s = stock::synaptogenesis();
    let (syn, syn_t) = run(&syn_s);
    emit(5, "synaptogenesis", synaptogenesis(&syn, syn_t));

    let rein_s = stock::reinforcement();
    let (rein, rein_t) = run(&rein_s);
    emit(6, "reinforcement", reinforcement(&rein, rein_t));
    emit(7, "decay", decay(&rein, &rein_s));

    let std_s = stock::std();
    let (std, std_t) = run(&std_s);
    emit(8, "paired-pulse depression", ppd(&std, &std_s, std_t));
    emit(9, "short-term depression trace", std_trace(&std, std_t));

    let stdp_s = stock::stdp();
    let (stdp_r, stdp_t) = run(&stdp_s);
    emit(10, "STDP", stdp(&stdp_r, &stdp_s, stdp_t));

    let pav_s = stock::pavlov();
    let (pav, pav_t) = run(&pav_s);
    emit(11, "pavlov", pavlov(&pav, pav_t));

    let pat_s = stock::pattern_recognition();
    let (pat, pat_t) = run(&pat_s);
    emit(12, "pattern recognition", pattern(&pat, pat_t));

    let all = [
        (&syn_s, &syn),
        (&rein_s, &rein),
        (&sweep_s, &sweep),
        (&pav_s, &pav),
        (&pat_s, &pat),
        (&std_s, &std),
        (&stdp_s, &stdp_r),
    ];
    emit(13, "determinism", determinism(&all));
    emit(14, "timescale span", timescales());

    say(&format!("acceptance: {}/14 criteria pass", 14 - failed.len()));
    assert!(failed.is_empty(), "failing criteria:\n{}", failed.join("\n"));
}
