use std::collections::BTreeMap;

use crate::circuit::{self, CircuitParams};
use crate::error::{Error, Result};
use crate::field::{self, ElectrodeId, Role, SimDomain};
use crate::growth::{self, detect_bridge, FiberGraph, Grower};
use crate::plasticity::{self, InhibitionParams, SynapseState};
use crate::signals::{pairwise_overlap, StimulusSet, Waveform};

use super::layouts::Bitmap;
use super::*;

fn grower(script: &ExperimentScript, seed: u64) -> Result<Grower> {
    let domain = script.domain()?;
    let fibers = script.initial_fibers(&domain)?;
    let params = GrowthParams { seed, ..script.growth };
    params.validate()?;
    Ok(Grower::with_fibers(domain, params, fibers))
}

fn snapshot(label: &str, t: f64, g: &Grower, keep: bool) -> Snapshot {
    Snapshot {
        label: label.to_string(),
        t,
        cycle: g.cycle,
        hash: g.fibers.content_hash(&g.domain),
        graph: keep.then(|| g.fibers.to_json(&g.domain)),
    }
}

/// Steps `n` cycles at growth frequency `f` starting from time `t0`, with a
/// `label@cycle` snapshot at every multiple of the snapshot interval.
#[allow(clippy::too_many_arguments)]
fn step(
    g: &mut Grower,
    stim: &StimulusSet,
    n: u64,
    f: f64,
    t0: f64,
    label: &str,
    every: u64,
    run: &mut SeedRun,
    keep: bool,
) -> Result<()> {
    if every == 0 {
        g.cycle_step(stim, n)?;
        return Ok(());
    }
    let (start, end) = (g.cycle, g.cycle + n);
    while g.cycle < end {
        let next = ((g.cycle / every + 1) * every).min(end);
        g.cycle_step(stim, next - g.cycle)?;
        if g.cycle.is_multiple_of(every) {
            let t = t0 + (g.cycle - start) as f64 / f;
            run.snapshots.push(snapshot(&format!("{label}@{}", g.cycle), t, g, keep));
        }
    }
    Ok(())
}

fn keep_graphs(script: &ExperimentScript, seed: u64) -> bool {
    script.seeds.iter().position(|&s| s == seed).is_some_and(|k| k < SNAPSHOT_SEEDS)
}

fn port(domain: &SimDomain) -> Result<(String, String)> {
    let first = |role| domain.electrodes.iter().find(|e| e.role == role).map(|e| e.id.to_string());
    first(Role::Input)
        .zip(first(Role::Output))
        .ok_or_else(|| Error::Domain("layout needs an input and an output electrode".into()))
}

/// Port conductance with the electrolyte included, and through fibers only.
fn conductances(fibers: &FiberGraph, domain: &SimDomain, cp: &CircuitParams) -> Result<(f64, f64)> {
    let net = circuit::extract_netlist(fibers, domain, cp)?;
    let (a, b) = port(domain)?;
    Ok((circuit::port_conductance(&net)?, circuit::channel_conductance(&net, &a, &b)?))
}

fn bridged(fibers: &FiberGraph, domain: &SimDomain) -> Result<bool> {
    let (a, b) = port(domain)?;
    Ok(detect_bridge(fibers, domain, &a, &b)?.is_some())
}

fn finish(mut report: Report, script: &ExperimentScript) -> Result<Report> {
    derive_metrics(&mut report, script)?;
    report.evaluate(&script.criteria);
    Ok(report)
}

/// Conductance trace of a growing two-terminal channel.
pub fn run_synaptogenesis(script: &ExperimentScript) -> Result<Report> {
    let runs = fan_out(&script.seeds, |seed| synaptogenesis_seed(script, seed))?;
    finish(Report { runs, ..Report::new(script) }, script)
}

fn synaptogenesis_seed(script: &ExperimentScript, seed: u64) -> Result<SeedRun> {
    let mut g = grower(script, seed)?;
    let keep = keep_graphs(script, seed);
    let cp = script.circuit;
    let vr = script.options.read_voltage;
    let every = script.options.snapshot_every;
    let mut run = SeedRun::new(seed);
    let mut trace = Table::new(
        "trace",
        &["t_s", "cycle", "current_A", "conductance_S", "channel_S", "bridged", "volume_um3", "nodes"],
    );
    let mut cache: Option<(u64, (f64, f64))> = None;
    let mut sample = |g: &Grower, t: f64, trace: &mut Table| -> Result<bool> {
        let (gp, gc) = match cache {
            Some((v, x)) if v == g.fibers.version() => x,
            _ => {
                let x = conductances(&g.fibers, &g.domain, &cp)?;
                cache = Some((g.fibers.version(), x));
                x
            }
        };
        let b = gc > 0.0 && bridged(&g.fibers, &g.domain)?;
        trace.push(vec![
            t,
            g.cycle as f64,
            vr * gp,
            gp,
            gc,
            b as u8 as f64,
            g.fibers.deposited_volume,
            g.fibers.len() as f64,
        ]);
        Ok(b)
    };
    let mut t = 0.0;
    sample(&g, t, &mut trace)?;
    run.snapshots.push(snapshot("start", t, &g, keep));
    let mut was_bridged = false;
    for phase in &script.phases {
        run.marks.insert(format!("{}_start_s", phase.name), t);
        match phase.mode {
            Mode::Grow => {
                let f = phase.stimuli.growth_frequency().unwrap_or(script.growth.f0);
                let total = phase.cycles();
                let mut done = 0;
                while done < total {
                    let n = script.options.sample_every.max(1).min(total - done);
                    step(&mut g, &phase.stimuli, n, f, t, &phase.name, every, &mut run, keep)?;
                    done += n;
                    t += n as f64 / f;
                    let b = sample(&g, t, &mut trace)?;
                    if b && !was_bridged {
                        was_bridged = true;
                        run.snapshots.push(snapshot("bridge", t, &g, keep));
                    }
                }
            }
            Mode::Measure | Mode::Rest => {
                t += phase.duration();
                sample(&g, t, &mut trace)?;
            }
        }
        run.snapshots.push(snapshot(&phase.name, t, &g, keep));
    }
    run.series.push(trace);
    Ok(run)
}

/// Grows to a bridge, then runs `n_epochs` further epochs of the same
/// stimulus, measuring the IV origin slope after each.
pub fn run_reinforcement(script: &ExperimentScript, n_epochs: usize) -> Result<Report> {
    let runs = fan_out(&script.seeds, |seed| reinforcement_seed(script, seed, n_epochs))?;
    finish(Report { runs, ..Report::new(script) }, script)
}

const IV_POINTS: [f64; 11] = [-0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

fn iv_slope(g: &Grower, cp: &CircuitParams) -> Result<f64> {
    let net = circuit::extract_netlist(&g.fibers, &g.domain, cp)?;
    Ok(circuit::origin_slope(&circuit::iv_curve(&net, &IV_POINTS)?))
}

/// Decay checkpoints, s: 0 to 7 days.
pub const DECAY_TIMES: [f64; 9] =
    [0.0, 3600.0, 21600.0, 43200.0, 86400.0, 172800.0, 259200.0, 432000.0, 604800.0];

/// G(t)/G₀ of an undisturbed synapse holding `volume` of deposit.
pub fn retention_curve(retention: &plasticity::Retention, volume: f64) -> Result<Vec<f64>> {
    let s = SynapseState::new(1.0, 1, 1.0, retention, volume)?;
    DECAY_TIMES.iter().map(|&t| plasticity::decay(&s, t)).collect()
}

fn reinforcement_seed(script: &ExperimentScript, seed: u64, n_epochs: usize) -> Result<SeedRun> {
    let phase = script
        .phases
        .iter()
        .find(|p| p.mode == Mode::Grow)
        .ok_or_else(|| Error::Domain("reinforcement needs a grow phase".into()))?;
    let f = phase.stimuli.growth_frequency().unwrap_or(script.growth.f0);
    let mut g = grower(script, seed)?;
    let keep = keep_graphs(script, seed);
    let mut run = SeedRun::new(seed);
    let mut epochs = Table::new("epochs", &["epoch", "t_s", "cycle", "g_iv_S", "volume_um3", "nodes"]);
    run.snapshots.push(snapshot("start", 0.0, &g, keep));
    let budget = phase.cycles();
    while g.cycle < budget && !bridged(&g.fibers, &g.domain)? {
        g.cycle_step(&phase.stimuli, 1)?;
    }
    let t0 = g.cycle as f64 / f;
    if !bridged(&g.fibers, &g.domain)? {
        run.series.push(epochs);
        return Ok(run);
    }
    run.marks.insert("bridge_time_s".into(), t0);
    run.snapshots.push(snapshot("bridge", t0, &g, keep));
    let row = |k: usize, g: &Grower| -> Result<Vec<f64>> {
        Ok(vec![
            k as f64,
            g.cycle as f64 / f,
            g.cycle as f64,
            iv_slope(g, &script.circuit)?,
            g.fibers.deposited_volume,
            g.fibers.len() as f64,
        ])
    };
    epochs.push(row(0, &g)?);
    let per_epoch = (script.options.epoch_s * f).round() as u64;
    for k in 1..=n_epochs {
        let t = g.cycle as f64 / f;
        step(&mut g, &phase.stimuli, per_epoch, f, t, &format!("epoch{k}"), script.options.snapshot_every, &mut run, keep)?;
        epochs.push(row(k, &g)?);
        run.snapshots.push(snapshot(&format!("epoch{k}"), g.cycle as f64 / f, &g, keep));
    }
    let mut decay = Table::new("decay", &["t_s", "weak_class", "bridge_volume", "final_volume"]);
    let r = &script.retention;
    let weak = retention_curve(r, r.v_weak)?;
    let at_bridge = retention_curve(r, epochs.rows[0][4])?;
    let last = retention_curve(r, g.fibers.deposited_volume)?;
    for k in 0..DECAY_TIMES.len() {
        decay.push(vec![DECAY_TIMES[k], weak[k], at_bridge[k], last[k]]);
    }
    run.series.push(epochs);
    run.series.push(decay);
    Ok(run)
}

/// Template stimulus of the first grow phase with every periodic waveform
/// retuned to `f`.
fn retuned(script: &ExperimentScript, f: f64) -> Result<StimulusSet> {
    let phase = script
        .phases
        .iter()
        .find(|p| p.mode == Mode::Grow)
        .ok_or_else(|| Error::Domain(format!("{} needs a grow phase", script.protocol.name())))?;
    let mut s = phase.stimuli.clone();
    for (_, w) in &mut s.assignments {
        if w.is_periodic() {
            w.frequency = f;
            w.phase_offset = 0.0;
            if w.pulse_width > 1.0 / f {
                w.pulse_width = 0.5 / f;
            }
        }
    }
    s.validate()?;
    Ok(s)
}

fn grow_for(g: &mut Grower, stim: &StimulusSet, label: &str, every: u64, run: &mut SeedRun, keep: bool) -> Result<()> {
    let f = stim.growth_frequency().unwrap_or(g.params.f0);
    step(g, stim, (stim.duration * f).round() as u64, f, 0.0, label, every, run, keep)
}

/// Networks grown for equal time at each frequency of the options.
pub fn run_frequency_sweep(script: &ExperimentScript) -> Result<Report> {
    if script.options.frequencies.is_empty() {
        return Err(Error::Domain("frequency sweep needs frequencies".into()));
    }
    let runs = fan_out(&script.seeds, |seed| {
        let keep = keep_graphs(script, seed);
        let mut run = SeedRun::new(seed);
        let mut morph = Table::new(
            "morphology",
            &["frequency_Hz", "nodes", "mean_thickness_um", "branch_points", "surface_um2", "channel_S", "bridged", "volume_um3"],
        );
        for &f in &script.options.frequencies {
            let stim = retuned(script, f)?;
            let mut g = grower(script, seed)?;
            grow_for(&mut g, &stim, &format!("{f}Hz"), script.options.snapshot_every, &mut run, keep)?;
            let s = growth::branch_statistics(&g.fibers, &g.domain);
            let (_, gc) = conductances(&g.fibers, &g.domain, &script.circuit)?;
            morph.push(vec![
                f,
                s.nodes as f64,
                s.mean_thickness,
                s.branch_points as f64,
                s.total_surface,
                gc,
                bridged(&g.fibers, &g.domain)? as u8 as f64,
                g.fibers.deposited_volume,
            ]);
            run.snapshots.push(snapshot(&format!("{f}Hz"), stim.duration, &g, keep));
        }
        run.series.push(morph);
        Ok(run)
    })?;
    finish(Report { runs, ..Report::new(script) }, script)
}

/// Fiber cells connected to electrode `k` through other fiber cells.
fn touching(fibers: &FiberGraph, domain: &SimDomain, k: usize) -> Vec<bool> {
    let mut seen = vec![false; domain.len()];
    let mut stack: Vec<usize> = fibers
        .nodes()
        .iter()
        .map(|n| n.cell)
        .filter(|&c| domain.neighbors(c).any(|j| domain.owner(j) == Some(k)))
        .collect();
    for &c in &stack {
        seen[c] = true;
    }
    while let Some(c) = stack.pop() {
        for j in domain.neighbors(c) {
            if fibers.is_occupied(j) && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

/// DC current into `to` with `from` at `v` and every other electrode floating.
fn transfer_current(fibers: &FiberGraph, domain: &SimDomain, cp: &CircuitParams, from: &str, to: &str, v: f64) -> Result<f64> {
    let net = circuit::extract_netlist(fibers, domain, cp)?;
    let src = BTreeMap::from([(ElectrodeId::from(from), v), (ElectrodeId::from(to), 0.0)]);
    Ok(-circuit::solve_dc(&net, &src)?.currents[&ElectrodeId::from(to)])
}

/// Largest peak-instant field over the growth candidates, over E_ox.
fn field_ratio(g: &mut Grower, stim: &StimulusSet) -> Result<f64> {
    if stim.growth_frequency().is_none() {
        return Ok(0.0);
    }
    let active = growth::active_electrodes(&g.domain, stim)?;
    let cand = growth::growth_candidates(&g.fibers, &g.domain, &active);
    let nx = g.domain.nx;
    let e_ox = g.params.e_ox;
    let fields = g.peak_fields(stim)?;
    Ok(cand
        .iter()
        .map(|&c| fields.iter().map(|f| field::field_at(f, (c % nx, c / nx))).fold(0.0, f64::max))
        .fold(0.0, f64::max)
        / e_ox)
}

/// Classical conditioning on three electrodes: the conditioned stimulus
/// wires to the response only when paired in phase with the unconditioned
/// one.
pub fn run_pavlov(script: &ExperimentScript) -> Result<Report> {
    let runs = fan_out(&script.seeds, |seed| pavlov_seed(script, seed))?;
    finish(Report { runs, ..Report::new(script) }, script)
}

fn pavlov_seed(script: &ExperimentScript, seed: u64) -> Result<SeedRun> {
    let o = &script.options;
    let (cs, us, resp) = (o.conditioned.as_str(), o.unconditioned.as_str(), o.response.as_str());
    let mut g = grower(script, seed)?;
    let keep = keep_graphs(script, seed);
    let d = g.domain.clone();
    let k_cs = d.electrode_index(cs)?;
    if detect_bridge(&g.fibers, &d, us, resp)?.is_none() {
        return Err(Error::Domain(format!("pavlov needs a fiber joining `{us}` and `{resp}` before training")));
    }
    let cp = script.circuit;
    let vr = o.read_voltage;
    let baseline = transfer_current(&FiberGraph::for_domain(&d), &d, &cp, cs, resp, vr)?;
    let mut run = SeedRun::new(seed);
    let mut base = Table::new("baseline", &["current_A"]);
    base.push(vec![baseline]);
    run.series.push(base);
    let mut table = Table::new(
        "phases",
        &[
            "phase",
            "t_end_s",
            "cycles",
            "volume_um3",
            "conditioned_volume_um3",
            "conditioned_bridged",
            "response_to_conditioned_A",
            "response_to_unconditioned_A",
            "overlap",
            "field_ratio",
        ],
    );
    let mut t = 0.0;
    run.snapshots.push(snapshot("start", t, &g, keep));
    for (k, phase) in script.phases.iter().enumerate() {
        let mut overlap = f64::NAN;
        if let (Some(a), Some(b)) = (phase.stimuli.get(cs), phase.stimuli.get(us)) {
            if a.is_periodic() && b.is_periodic() {
                overlap = pairwise_overlap(a, b, 0.0)?;
            }
        }
        let before = g.fibers.deposited_volume;
        let born_before = g.cycle;
        let mut ratio = 0.0;
        if phase.mode == Mode::Grow {
            ratio = field_ratio(&mut g, &phase.stimuli)?;
            let f = phase.stimuli.growth_frequency().unwrap_or(script.growth.f0);
            step(&mut g, &phase.stimuli, phase.cycles(), f, t, &phase.name, script.options.snapshot_every, &mut run, keep)?;
        }
        t += phase.duration();
        let near = touching(&g.fibers, &d, k_cs);
        let h = d.cell_size;
        let cs_volume: f64 = g
            .fibers
            .nodes()
            .iter()
            .filter(|n| n.born > born_before && near[n.cell])
            .map(|n| h * n.thickness * n.thickness)
            .fold(0.0, |a, v| a + v);
        table.push(vec![
            k as f64,
            t,
            phase.cycles() as f64 * (phase.mode == Mode::Grow) as u8 as f64,
            g.fibers.deposited_volume - before,
            cs_volume,
            detect_bridge(&g.fibers, &d, cs, resp)?.is_some() as u8 as f64,
            transfer_current(&g.fibers, &d, &cp, cs, resp, vr)?,
            transfer_current(&g.fibers, &d, &cp, us, resp, vr)?,
            overlap,
            ratio,
        ]);
        run.marks.insert(format!("{}_end_s", phase.name), t);
        run.snapshots.push(snapshot(&phase.name, t, &g, keep));
    }
    run.series.push(table);
    Ok(run)
}

/// Test-pattern label stored in numeric tables: the digit, −1 for blank,
/// −2 for a literal bitmap.
pub fn pattern_code(name: &str) -> f64 {
    match name {
        "blank" => -1.0,
        s if s.len() == 1 && s.as_bytes()[0].is_ascii_digit() => (s.as_bytes()[0] - b'0') as f64,
        _ => -2.0,
    }
}

/// Pixel inputs are the Input electrodes in layout order; outputs are
/// every Output electrode, read as one summed node.
fn pixel_ids(d: &SimDomain) -> Result<(Vec<String>, Vec<String>)> {
    let ids = |r: Role| d.electrodes.iter().filter(|e| e.role == r).map(|e| e.id.to_string()).collect::<Vec<_>>();
    let (inputs, outputs) = (ids(Role::Input), ids(Role::Output));
    if inputs.len() != 15 || outputs.is_empty() {
        return Err(Error::Domain("pattern recognition needs 15 inputs and at least one output".into()));
    }
    Ok((inputs, outputs))
}

/// Trains on each bitmap of `options.train`, then reads every test bitmap.
pub fn run_pattern_recognition(script: &ExperimentScript) -> Result<Report> {
    let runs = fan_out(&script.seeds, |seed| pattern_seed(script, seed))?;
    finish(Report { runs, ..Report::new(script) }, script)
}

fn pattern_seed(script: &ExperimentScript, seed: u64) -> Result<SeedRun> {
    let o = &script.options;
    let train_phase = script
        .phases
        .iter()
        .find(|p| p.mode == Mode::Grow)
        .ok_or_else(|| Error::Domain("pattern recognition needs a grow phase".into()))?;
    let drive: Waveform = train_phase
        .stimuli
        .assignments
        .first()
        .map(|(_, w)| *w)
        .ok_or_else(|| Error::Domain("training phase needs a template stimulus".into()))?;
    let read_time = script.phases.iter().find(|p| p.mode == Mode::Measure).map_or(1.0, |p| p.duration());
    let keep = keep_graphs(script, seed);
    let mut run = SeedRun::new(seed);
    let mut table = Table::new("readout", &["train", "test", "current_A", "confidence", "inhibitors", "connected"]);
    for train_name in &o.train {
        let train = bitmap(train_name)?;
        let mut g = grower(script, seed)?;
        let (inputs, outputs) = pixel_ids(&g.domain)?;
        let mut stim = StimulusSet::new(train_phase.duration());
        for (k, id) in inputs.iter().enumerate() {
            if train[k] {
                stim.assign(id.as_str(), drive);
            }
        }
        let f = stim.growth_frequency().unwrap_or(script.growth.f0);
        let label = format!("train_{train_name}");
        step(&mut g, &stim, train_phase.cycles(), f, 0.0, &label, o.snapshot_every, &mut run, keep)?;
        run.snapshots.push(snapshot(&format!("train_{train_name}"), train_phase.duration(), &g, keep));
        let mut rows = Vec::new();
        for test_name in &o.tests {
            let test = bitmap(test_name)?;
            let (i, gates, conn) = readout(script, &g, &inputs, &outputs, &test, read_time)?;
            rows.push((pattern_code(test_name), i, gates, conn));
        }
        let max = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        for (code, i, gates, conn) in rows {
            let conf = if max > 0.0 { i / max } else { 0.0 };
            table.push(vec![pattern_code(train_name), code, i, conf, gates as f64, conn as f64]);
        }
    }
    run.series.push(table);
    Ok(run)
}

/// Summed output current for one test bitmap. Biased inputs with no fiber
/// path to an output act as gates on the fibers around them and carry no
/// current themselves.
fn readout(
    script: &ExperimentScript,
    g: &Grower,
    inputs: &[String],
    outputs: &[String],
    test: &Bitmap,
    read_time: f64,
) -> Result<(f64, usize, usize)> {
    let d = &g.domain;
    let vr = script.options.read_voltage;
    let mut connected = vec![false; inputs.len()];
    for (k, id) in inputs.iter().enumerate() {
        for out in outputs {
            if detect_bridge(&g.fibers, d, id, out)?.is_some() {
                connected[k] = true;
            }
        }
    }
    let cp = script.circuit;
    let net = circuit::extract_netlist(&g.fibers, d, &cp)?;
    let tau = match circuit::charging_time(&net)? {
        t if t > 0.0 => t,
        _ => read_time,
    };
    let p = InhibitionParams { d_max: script.options.inhibition_reach, v_dedope: script.retention.v_dedope, tau_ch: tau };
    let mut fibers = g.fibers.clone();
    let gates: Vec<usize> = (0..inputs.len()).filter(|&k| test[k] && !connected[k]).collect();
    if !gates.is_empty() {
        // every gate acts on the undisturbed profile; a node keeps the
        // strongest dedoping it receives
        let mut lowest: Vec<f64> = g.fibers.nodes().iter().map(|n| n.doping).collect();
        for &k in &gates {
            let mut f = g.fibers.clone();
            plasticity::gate_inhibition(&mut f, d, d.electrode(&inputs[k])?, vr, read_time, &p)?;
            for (l, n) in lowest.iter_mut().zip(f.nodes()) {
                *l = l.min(n.doping);
            }
        }
        let mut it = lowest.into_iter();
        fibers.for_each_doping(|_| it.next().expect("same node order"));
    }
    let net = circuit::extract_netlist(&fibers, d, &cp)?;
    let mut src = BTreeMap::new();
    // a gate draws no DC current: it floats in the read solve
    for (k, id) in inputs.iter().enumerate() {
        if !gates.contains(&k) {
            src.insert(ElectrodeId::from(id.as_str()), if test[k] { vr } else { 0.0 });
        }
    }
    for id in outputs {
        src.insert(ElectrodeId::from(id.as_str()), 0.0);
    }
    let sol = circuit::solve_dc(&net, &src)?;
    let i = outputs.iter().map(|id| -sol.currents[&ElectrodeId::from(id.as_str())]).fold(0.0, |a, x| a + x);
    Ok((i, gates.len(), connected.iter().filter(|&&c| c).count()))
}

/// Gate-pulse depression of a grown channel, and paired-pulse ratios of
/// networks grown at each option frequency.
pub fn run_std(script: &ExperimentScript) -> Result<Report> {
    let runs = fan_out(&script.seeds, |seed| std_seed(script, seed))?;
    finish(Report { runs, ..Report::new(script) }, script)
}

/// Doping integration step of the pulse trace, s.
const STD_STEP: f64 = 2.5e-4;
/// Trace sampling interval, s.
const STD_SAMPLE: f64 = 0.01;

fn synapse(script: &ExperimentScript, g: &Grower) -> Result<Option<(SynapseState, f64)>> {
    if !bridged(&g.fibers, &g.domain)? {
        return Ok(None);
    }
    let (gp, gc) = conductances(&g.fibers, &g.domain, &script.circuit)?;
    let s = SynapseState::from_network(&g.fibers, &g.domain, &script.circuit, &script.retention)?;
    Ok(Some((s, gp - gc)))
}

fn network_table(s: &SynapseState) -> Table {
    let mut t = Table::new("network", &["tau_ch_s", "conductance_0_S", "reinforcement_um3"]);
    t.push(vec![s.tau_ch, s.conductance_0, s.reinforcement]);
    t
}

fn std_seed(script: &ExperimentScript, seed: u64) -> Result<SeedRun> {
    let o = &script.options;
    let keep = keep_graphs(script, seed);
    let mut run = SeedRun::new(seed);
    let mut g = grower(script, seed)?;
    let mut t = 0.0;
    let mut trace = Table::new("trace", &["t_s", "gate_V", "doping_mean", "conductance_S", "current_A"]);
    let mut state: Option<(SynapseState, f64)> = None;
    for phase in &script.phases {
        match phase.mode {
            Mode::Grow => {
                grow_for(&mut g, &phase.stimuli, &phase.name, o.snapshot_every, &mut run, keep)?;
                run.snapshots.push(snapshot(&phase.name, phase.duration(), &g, keep));
                state = synapse(script, &g)?;
                if let Some((s, _)) = &state {
                    run.series.push(network_table(s));
                }
            }
            Mode::Measure | Mode::Rest => {
                let Some((s, g_access)) = state.as_mut() else { continue };
                let gate = phase.stimuli.get(&o.gate).copied();
                let steps = (phase.duration() / STD_STEP).round() as usize;
                let per_sample = (STD_SAMPLE / STD_STEP).round() as usize;
                if trace.rows.is_empty() {
                    let gch = s.conductance();
                    trace.push(vec![t, 0.0, s.doping_mean(), gch, o.read_voltage * (gch + *g_access)]);
                }
                let t0 = t;
                for k in 0..steps {
                    let mid = t0 + (k as f64 + 0.5) * STD_STEP;
                    let v = gate.map_or(0.0, |w| w.sample(mid - t0));
                    plasticity::doping_step(s, v, STD_STEP)?;
                    if (k + 1) % per_sample == 0 {
                        let gch = s.conductance();
                        let tt = t0 + (k + 1) as f64 * STD_STEP;
                        trace.push(vec![tt, v, s.doping_mean(), gch, o.read_voltage * (gch + *g_access)]);
                    }
                }
                t = t0 + steps as f64 * STD_STEP;
                run.marks.insert(format!("{}_end_s", phase.name), t);
            }
        }
    }
    let mut ppd = Table::new("ppd", &["frequency_Hz", "interval_ms", "ratio", "tau_ch_s"]);
    for &f in &o.frequencies {
        let stim = retuned(script, f)?;
        let mut gf = grower(script, seed)?;
        grow_for(&mut gf, &stim, &format!("{f}Hz"), o.snapshot_every, &mut run, keep)?;
        run.snapshots.push(snapshot(&format!("{f}Hz"), stim.duration, &gf, keep));
        let Some((s, _)) = synapse(script, &gf)? else {
            for &iv in &o.intervals_ms {
                ppd.push(vec![f, iv, f64::NAN, 0.0]);
            }
            continue;
        };
        for &iv in &o.intervals_ms {
            ppd.push(vec![f, iv, plasticity::ppd_ratio(&s, iv * 1e-3)?, s.tau_ch]);
        }
    }
    run.series.push(trace);
    run.series.push(ppd);
    Ok(run)
}

/// Pre/post action-potential pairings simulated on each seed's grown channel.
pub fn run_stdp_sweep(script: &ExperimentScript) -> Result<Report> {
    let runs = fan_out(&script.seeds, |seed| {
        let keep = keep_graphs(script, seed);
        let mut run = SeedRun::new(seed);
        let mut g = grower(script, seed)?;
        for phase in script.phases.iter().filter(|p| p.mode == Mode::Grow) {
            grow_for(&mut g, &phase.stimuli, &phase.name, script.options.snapshot_every, &mut run, keep)?;
        }
        run.snapshots.push(snapshot("grown", 0.0, &g, keep));
        let mut table = Table::new("stdp", &["dt_ms", "dG_over_G"]);
        if let Some((s, _)) = synapse(script, &g)? {
            run.series.push(network_table(&s));
            for &dt in &script.options.dt_ms {
                let y = plasticity::stdp_simulate(dt * 1e-3, script.options.spike_amplitude, s.tau_ch, s.v_dedope)?;
                table.push(vec![dt, y]);
            }
        }
        run.series.push(table);
        Ok(run)
    })?;
    finish(Report { runs, ..Report::new(script) }, script)
}
