//! Synaptic state of a grown channel: gate-driven doping, paired-pulse and
//! spike-timing plasticity, and long-term retention.

use serde::{Deserialize, Serialize};

use crate::circuit::{self, CircuitParams};
use crate::error::{Error, Result};
use crate::field::{Cell, Electrode, SimDomain};
use crate::growth::FiberGraph;
use crate::signals::Waveform;

/// Weak-synapse retention time: half the conductance is lost in 48 h.
pub const TAU_WEAK: f64 = 48.0 * 3600.0 / std::f64::consts::LN_2;

/// Equilibrium doping under gate voltage `v`.
pub fn s_eq(v: f64, v_dedope: f64) -> f64 {
    if v <= 0.0 {
        1.0
    } else {
        (1.0 - v / v_dedope).clamp(0.0, 1.0)
    }
}

/// Exact relaxation of `s` toward `target` over `dt`.
pub fn relax(s: f64, target: f64, tau: f64, dt: f64) -> f64 {
    (target + (s - target) * (-dt / tau).exp()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynapseState {
    /// Channel conductance when fully doped, S.
    pub conductance_0: f64,
    /// Doping fraction per fiber node, in FiberGraph node order.
    pub doping: Vec<f64>,
    pub tau_ch: f64,
    pub tau_decay: f64,
    pub g_inf: f64,
    /// Deposited volume, µm³.
    pub reinforcement: f64,
    pub v_dedope: f64,
}

impl SynapseState {
    pub fn new(conductance_0: f64, nodes: usize, tau_ch: f64, retention: &Retention, reinforcement: f64) -> Result<Self> {
        let (tau_decay, g_inf) = retention.constants(reinforcement, conductance_0)?;
        let s = SynapseState {
            conductance_0,
            doping: vec![1.0; nodes.max(1)],
            tau_ch,
            tau_decay,
            g_inf,
            reinforcement,
            v_dedope: retention.v_dedope,
        };
        s.validate()?;
        Ok(s)
    }

    /// State of a grown network: fully doped conductance and τ from its
    /// netlist, retention from its deposited volume.
    pub fn from_network(fibers: &FiberGraph, domain: &SimDomain, cp: &CircuitParams, retention: &Retention) -> Result<Self> {
        let mut doped = fibers.clone();
        doped.set_uniform_doping(1.0);
        let net = circuit::extract_netlist(&doped, domain, cp)?;
        let (a, b) = net.port.clone().ok_or_else(|| Error::Circuit("network has no port".into()))?;
        let g0 = circuit::channel_conductance(&net, a.as_str(), b.as_str())?;
        let tau = circuit::charging_time(&net)?;
        if !(g0 > 0.0 && tau > 0.0) {
            return Err(Error::DisconnectedTerminal(b.to_string()));
        }
        let mut s = SynapseState::new(g0, fibers.len(), tau, retention, fibers.deposited_volume)?;
        s.doping = fibers.nodes().iter().map(|n| n.doping).collect();
        if s.doping.is_empty() {
            s.doping.push(1.0);
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.conductance_0 >= 0.0
            && self.tau_ch > 0.0
            && self.tau_decay > 0.0
            && self.g_inf >= 0.0
            && self.g_inf <= self.conductance_0
            && self.v_dedope > 0.0
            && self.doping.iter().all(|s| (0.0..=1.0).contains(s));
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("synapse state out of range".into()))
        }
    }

    pub fn doping_mean(&self) -> f64 {
        self.doping.iter().sum::<f64>() / self.doping.len() as f64
    }

    /// Channel conductance for a uniform doping profile, S.
    pub fn conductance(&self) -> f64 {
        self.conductance_0 * self.doping_mean()
    }
}

/// Relaxes every node's doping under a uniform gate voltage for `dt`.
pub fn doping_step(state: &mut SynapseState, v_gate: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::Domain("doping step needs dt > 0".into()));
    }
    let target = s_eq(v_gate, state.v_dedope);
    for s in &mut state.doping {
        *s = relax(*s, target, state.tau_ch, dt);
    }
    Ok(())
}

/// Pulse length used for paired-pulse tests, in charging times: long enough
/// that each pulse brings the channel to its dedoped equilibrium.
pub const PPD_PULSE_TAUS: f64 = 5.0;

/// Conductance at the onset of the second of two identical gate pulses
/// relative to the first. Pulses sit at `v_dedope` for
/// `PPD_PULSE_TAUS·tau_ch`; `interval` is the gap between them.
pub fn ppd_ratio(state: &SynapseState, interval: f64) -> Result<f64> {
    if !(interval > 0.0) {
        return Err(Error::Domain("paired-pulse interval must be positive".into()));
    }
    let mut s = state.clone();
    let g1 = s.conductance();
    if g1 == 0.0 {
        return Ok(1.0);
    }
    let (v, w) = (s.v_dedope, PPD_PULSE_TAUS * s.tau_ch);
    doping_step(&mut s, v, w)?;
    doping_step(&mut s, 0.0, interval)?;
    Ok(s.conductance() / g1)
}

/// Closed form of [`ppd_ratio`] from a rested (fully doped) channel.
pub fn ppd_closed_form(tau_ch: f64, interval: f64) -> f64 {
    let r0 = (-PPD_PULSE_TAUS).exp();
    1.0 - (1.0 - r0) * (-interval / tau_ch).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdpParams {
    pub a_plus: f64,
    pub a_minus: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
}

impl Default for StdpParams {
    fn default() -> Self {
        StdpParams { a_plus: 0.3, a_minus: 0.25, tau_plus: 0.025, tau_minus: 0.025 }
    }
}

impl StdpParams {
    pub fn validate(&self) -> Result<()> {
        if [self.a_plus, self.a_minus, self.tau_plus, self.tau_minus].iter().all(|v| *v > 0.0) {
            Ok(())
        } else {
            Err(Error::Domain("STDP parameters must be positive".into()))
        }
    }
}

/// Pair-based STDP kernel; `dt_spike = t_post − t_pre`.
pub fn stdp_delta(dt_spike: f64, p: &StdpParams) -> f64 {
    if dt_spike.is_infinite() || dt_spike == 0.0 {
        0.0
    } else if dt_spike > 0.0 {
        p.a_plus * (-dt_spike / p.tau_plus).exp()
    } else {
        -p.a_minus * (dt_spike / p.tau_minus).exp()
    }
}

/// Resting gate–channel bias during STDP pairing, V.
pub const STDP_REST: f64 = 0.5;
/// Integration step of the pairing simulation, s.
pub const STDP_STEP: f64 = 1e-5;

/// Simulated lasting ΔG/G for a pre (gate) and post (drain) action
/// potential pair `dt_spike` apart.
///
/// The channel sees `STDP_REST + v_pre − v_post` and its doping follows
/// [`relax`]. A spike leaves a lasting change only by coinciding with the
/// doping deflection the other spike left behind: post during a
/// pre-induced deficit potentiates, pre during a post-induced excess
/// depresses. Isolated spikes leave no lasting change.
pub fn stdp_simulate(dt_spike: f64, amplitude: f64, tau_ch: f64, v_dedope: f64) -> Result<f64> {
    if !dt_spike.is_finite() {
        return Ok(0.0);
    }
    if !(tau_ch > 0.0 && amplitude > 0.0) {
        return Err(Error::Domain("STDP simulation needs tau_ch > 0 and amplitude > 0".into()));
    }
    let ap = Waveform::action_potential(amplitude, 1.0);
    let (t_pre, t_post) = if dt_spike >= 0.0 { (0.0, dt_spike) } else { (-dt_spike, 0.0) };
    let span = t_pre.max(t_post) + ap_duration();
    let spike = |t: f64, t0: f64| if t >= t0 && t - t0 < ap_duration() { ap.sample(t - t0) } else { 0.0 };
    let rest = s_eq(STDP_REST, v_dedope);
    let steps = (span / STDP_STEP).ceil() as usize;
    let mut s = rest;
    let mut w = 0.0;
    for k in 0..steps {
        let t = (k as f64 + 0.5) * STDP_STEP;
        let (pre, post) = (spike(t, t_pre), spike(t, t_post));
        let ds = s - rest;
        w += (post.max(0.0) * (-ds).max(0.0) - pre.max(0.0) * ds.max(0.0)) * STDP_STEP;
        s = relax(s, s_eq(STDP_REST + pre - post, v_dedope), tau_ch, STDP_STEP);
    }
    // normalize by the drive of one positive lobe at full deflection
    Ok(w / (amplitude * crate::signals::AP_RISE))
}

fn ap_duration() -> f64 {
    crate::signals::AP_RISE + crate::signals::AP_FALL + crate::signals::AP_RECOVER
}

/// Least-squares fit of the kernel amplitudes and one shared time constant
/// to an STDP table. Returns the parameters and R².
pub fn fit_stdp(table: &[(f64, f64)]) -> (StdpParams, f64) {
    let mut best = (StdpParams::default(), f64::NEG_INFINITY);
    let ss_tot = {
        let mean = table.iter().map(|p| p.1).sum::<f64>() / table.len().max(1) as f64;
        table.iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>()
    };
    // log-spaced scan then golden refinement over tau
    let sse = |tau: f64| -> (StdpParams, f64) {
        let fit_side = |pos: bool| {
            let (mut num, mut den) = (0.0, 0.0);
            for &(dt, y) in table.iter().filter(|p| (p.0 > 0.0) == pos && p.0 != 0.0) {
                let k = (-dt.abs() / tau).exp();
                num += y.abs() * k;
                den += k * k;
            }
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        };
        let p = StdpParams { a_plus: fit_side(true), a_minus: fit_side(false), tau_plus: tau, tau_minus: tau };
        let e = table.iter().map(|&(dt, y)| (y - stdp_delta(dt, &p)).powi(2)).sum();
        (p, e)
    };
    let mut lo = 1e-4f64;
    let mut best_tau = lo;
    let mut best_e = f64::INFINITY;
    while lo < 100.0 {
        let e = sse(lo).1;
        if e < best_e {
            best_e = e;
            best_tau = lo;
        }
        lo *= 1.1;
    }
    let (mut a, mut b) = (best_tau / 1.1, best_tau * 1.1);
    for _ in 0..60 {
        let m1 = b - (b - a) / 1.618_033_988_75;
        let m2 = a + (b - a) / 1.618_033_988_75;
        if sse(m1).1 < sse(m2).1 {
            b = m2;
        } else {
            a = m1;
        }
    }
    let (p, e) = sse(0.5 * (a + b));
    if ss_tot > 0.0 {
        best = (p, 1.0 - e / ss_tot);
    }
    best
}

/// Retention law: maps deposited volume to the long-term decay constant and
/// asymptote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Retention {
    /// Volume of a weak (just-bridged) synapse, µm³. The default is the mean
    /// bridge volume of the stock 4 V, 50 Hz two-electrode growth.
    pub v_weak: f64,
    /// Asymptote of a fully reinforced synapse, as a fraction of G₀.
    pub g_inf_reinforced: f64,
    pub v_dedope: f64,
}

impl Default for Retention {
    fn default() -> Self {
        Retention { v_weak: 794.0, g_inf_reinforced: 0.7, v_dedope: 1.0 }
    }
}

impl Retention {
    /// τ(V) = τ₀·(1 + ln(1 + V/V_w)), with τ₀ placing the weak class on
    /// the 48 h half-life.
    pub fn tau(&self, reinforcement: f64) -> Result<f64> {
        reinforcement_to_tau(reinforcement, self.v_weak)
    }

    /// Asymptote fraction: 0 up to the weak volume, rising linearly to the
    /// reinforced value at twice the weak volume.
    pub fn g_inf_fraction(&self, reinforcement: f64) -> f64 {
        self.g_inf_reinforced * (reinforcement / self.v_weak - 1.0).clamp(0.0, 1.0)
    }

    pub fn constants(&self, reinforcement: f64, g0: f64) -> Result<(f64, f64)> {
        Ok((self.tau(reinforcement)?, g0 * self.g_inf_fraction(reinforcement)))
    }
}

pub fn reinforcement_to_tau(reinforcement: f64, v_weak: f64) -> Result<f64> {
    if !(reinforcement >= 0.0) || !(v_weak > 0.0) {
        return Err(Error::Domain("reinforcement must be non-negative".into()));
    }
    let tau0 = TAU_WEAK / (1.0 + std::f64::consts::LN_2);
    Ok(tau0 * (1.0 + (1.0 + reinforcement / v_weak).ln()))
}

/// Long-term conductance after `elapsed` seconds without stimulation.
pub fn decay(state: &SynapseState, elapsed: f64) -> Result<f64> {
    if !(elapsed >= 0.0) {
        return Err(Error::Domain("elapsed time must be non-negative".into()));
    }
    let g0 = state.conductance();
    let g_inf = state.g_inf.min(g0);
    Ok(g_inf + (g0 - g_inf) * (-elapsed / state.tau_decay).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InhibitionParams {
    /// Reach of a gating electrode, cells.
    pub d_max: f64,
    pub v_dedope: f64,
    pub tau_ch: f64,
}

/// Lattice (Manhattan) distance from a cell to the nearest electrode cell.
pub fn distance_to(e: &Electrode, (x, y): Cell) -> f64 {
    e.cells
        .iter()
        .map(|&(ex, ey)| x.abs_diff(ex) + y.abs_diff(ey))
        .min()
        .unwrap_or(usize::MAX) as f64
}

/// Dedopes fibers near a biased gate electrode: each node relaxes toward
/// `s_eq(v·w(d))` with w(d) = clamp(1 − d/d_max, 0, 1). Nodes with w = 0
/// keep their doping.
pub fn gate_inhibition(
    fibers: &mut FiberGraph,
    domain: &SimDomain,
    gate: &Electrode,
    v: f64,
    duration: f64,
    p: &InhibitionParams,
) -> Result<()> {
    if !(v >= 0.0) {
        return Err(Error::Domain("gate inhibition needs v ≥ 0".into()));
    }
    if v == 0.0 || duration <= 0.0 {
        return Ok(());
    }
    fibers.for_each_doping(|n| {
        let wd = (1.0 - distance_to(gate, domain.coords(n.cell)) / p.d_max).clamp(0.0, 1.0);
        if wd == 0.0 {
            n.doping
        } else {
            relax(n.doping, s_eq(v * wd, p.v_dedope), p.tau_ch, duration)
        }
    });
    Ok(())
}

/// Largest residual of a least-squares line through `pts`.
pub fn affine_residual(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(tau: f64) -> SynapseState {
        SynapseState::new(1e-6, 4, tau, &Retention::default(), 0.0).unwrap()
    }

    #[test]
    fn doping_relaxes_and_dedopes() {
        let mut s = state(0.1);
        s.doping = vec![0.3; 4];
        doping_step(&mut s, 0.0, 0.05).unwrap();
        assert!(s.doping_mean() > 0.3 && s.doping_mean() < 1.0);
        doping_step(&mut s, 1.0, 10.0).unwrap();
        assert!(s.doping_mean() < 1e-12);
        assert!(doping_step(&mut s, 0.0, 0.0).is_err());
    }

    #[test]
    fn pulse_train_suppresses_then_recovers() {
        let tau = 0.5;
        let mut s = state(tau);
        let dt = 1e-3;
        let pulses = Waveform::pulse_train(0.6, 100.0, 0.005);
        let mut t = 0.0;
        while t < 10.0 - 1e-12 {
            doping_step(&mut s, pulses.sample(t + 0.5 * dt), dt).unwrap();
            t += dt;
        }
        let low = s.conductance() / s.conductance_0;
        assert!(low < 0.8, "{low}");
        doping_step(&mut s, 0.0, 5.0 * tau).unwrap();
        assert!(s.conductance() / s.conductance_0 >= 0.95);
    }

    #[test]
    fn ppd_matches_closed_form_and_limits() {
        for tau in [0.003, 0.05, 0.6, 2.0] {
            for iv in [0.05, 0.2, 1.0] {
                let r = ppd_ratio(&state(tau), iv).unwrap();
                assert!((r - ppd_closed_form(tau, iv)).abs() < 1e-12);
            }
            assert!((ppd_ratio(&state(tau), 1e6).unwrap() - 1.0).abs() < 1e-9);
        }
        assert!(ppd_ratio(&state(0.6), 0.2).unwrap() <= 0.55);
        assert!(ppd_ratio(&state(0.05), 0.2).unwrap() >= 0.85);
    }

    #[test]
    fn stdp_kernel_values() {
        let p = StdpParams::default();
        assert_eq!(stdp_delta(f64::INFINITY, &p), 0.0);
        assert_eq!(stdp_delta(f64::NEG_INFINITY, &p), 0.0);
        assert!((stdp_delta(p.tau_plus, &p) - p.a_plus / std::f64::consts::E).abs() < 1e-15);
        assert!(stdp_delta(0.005, &p) > 0.0 && stdp_delta(-0.005, &p) < 0.0);
    }

    #[test]
    fn stdp_simulation_shape() {
        let dts = [0.002, 0.005, 0.01, 0.025, 0.1];
        let tau = 0.03;
        let mut table = Vec::new();
        let mut last = f64::INFINITY;
        for &d in &dts {
            let plus = stdp_simulate(d, 0.5, tau, 1.0).unwrap();
            let minus = stdp_simulate(-d, 0.5, tau, 1.0).unwrap();
            assert!(plus > 0.0 && minus < 0.0, "dt {d}: {plus} {minus}");
            assert!(plus.abs() < last);
            last = plus.abs();
            table.push((d, plus));
            table.push((-d, minus));
        }
        let (_, r2) = fit_stdp(&table);
        assert!(r2 >= 0.9, "{r2}");
        // isolated spikes leave nothing
        assert!(stdp_simulate(10.0, 0.5, tau, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_kernel() {
        let p = StdpParams { a_plus: 0.2, a_minus: 0.1, tau_plus: 0.02, tau_minus: 0.02 };
        let table: Vec<(f64, f64)> = [-0.1, -0.02, -0.005, 0.003, 0.01, 0.05]
            .iter()
            .map(|&d| (d, stdp_delta(d, &p)))
            .collect();
        let (q, r2) = fit_stdp(&table);
        assert!(r2 > 0.999999);
        assert!((q.tau_plus - 0.02).abs() < 1e-6 && (q.a_plus - 0.2).abs() < 1e-6);
    }

    #[test]
    fn weak_and_reinforced_decay() {
        let r = Retention::default();
        let weak = SynapseState::new(1e-6, 1, 0.1, &r, r.v_weak).unwrap();
        assert!((weak.tau_decay - TAU_WEAK).abs() < 1e-6);
        assert_eq!(decay(&weak, 0.0).unwrap(), 1e-6);
        let half = decay(&weak, 48.0 * 3600.0).unwrap() / 1e-6;
        assert!((half - 0.5).abs() < 1e-12);
        let strong = SynapseState::new(1e-6, 1, 0.1, &r, 20.0 * r.v_weak).unwrap();
        assert!(decay(&strong, 7.0 * 86400.0).unwrap() / 1e-6 >= 0.8);
        assert!(decay(&weak, -1.0).is_err());
    }

    #[test]
    fn tau_inversion_oracle() {
        // invert G(48 h) = G₀/2 with G_inf = 0
        let oracle = 48.0 * 3600.0 / (1.0f64 / 0.5).ln();
        assert!((reinforcement_to_tau(1000.0, 1000.0).unwrap() - oracle).abs() < 1e-6);
        let t0 = reinforcement_to_tau(0.0, 1000.0).unwrap();
        assert!(t0 < oracle);
        assert!(reinforcement_to_tau(4000.0, 1000.0).unwrap() > reinforcement_to_tau(2000.0, 1000.0).unwrap());
    }

    #[test]
    fn decay_is_log_affine() {
        let r = Retention::default();
        let s = SynapseState::new(2e-6, 1, 0.1, &r, 1.5 * r.v_weak).unwrap();
        let pts: Vec<(f64, f64)> = (0..30)
            .map(|k| {
                let t = k as f64 * 20000.0;
                (t, (decay(&s, t).unwrap() - s.g_inf).ln())
            })
            .collect();
        assert!(crate::plasticity::affine_residual(&pts) < 1e-9);
    }

    fn gate_fixture() -> (SimDomain, FiberGraph) {
        let d = SimDomain::new(
            32,
            32,
            4.0,
            vec![
                Electrode::rect("in", crate::field::Role::Input, 2, 4, 3, 27),
                Electrode::rect("g", crate::field::Role::Gate, 8, 20, 9, 21),
            ],
        )
        .unwrap();
        let mut g = FiberGraph::for_domain(&d);
        for x in 4..30 {
            g.add_fixture(&d, (x, 18), "in", 1.0).unwrap();
        }
        (d, g)
    }

    #[test]
    fn inhibition_is_local() {
        let (d, mut g) = gate_fixture();
        let p = InhibitionParams { d_max: 12.0, v_dedope: 1.0, tau_ch: 0.01 };
        let gate = d.electrode("g").unwrap().clone();
        let before = g.clone();
        gate_inhibition(&mut g, &d, &gate, 0.0, 1.0, &p).unwrap();
        assert_eq!(g.nodes(), before.nodes());
        gate_inhibition(&mut g, &d, &gate, 1.0, 10.0, &p).unwrap();
        let near = g.node(d.index(8, 18)).unwrap().doping;
        let far = g.node(d.index(29, 18)).unwrap().doping;
        assert!(near < 0.3 && far == 1.0, "{near} {far}");
        // adjacent to the gate at full dedoping voltage
        let mut h = FiberGraph::for_domain(&d);
        for x in 4..10 {
            h.add_fixture(&d, (x, 19), "in", 1.0).unwrap();
        }
        let p1 = InhibitionParams { d_max: 1e9, ..p };
        gate_inhibition(&mut h, &d, &gate, 1.0, 100.0, &p1).unwrap();
        assert!(h.node(d.index(8, 19)).unwrap().doping < 1e-6);
    }

    proptest! {
        #[test]
        fn doping_stays_bounded(steps in prop::collection::vec((-2.0f64..3.0, 1e-6f64..2.0), 1..60)) {
            let mut s = state(0.2);
            for (v, dt) in steps {
                doping_step(&mut s, v, dt).unwrap();
                prop_assert!(s.doping.iter().all(|x| (0.0..=1.0).contains(x)));
            }
        }

        #[test]
        fn ppd_monotone(tau in 1e-3f64..5.0, a in 1e-3f64..2.0, b in 1e-3f64..2.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let s = state(tau);
            let r_lo = ppd_ratio(&s, lo).unwrap();
            let r_hi = ppd_ratio(&s, hi).unwrap();
            prop_assert!(r_lo <= r_hi + 1e-12);
            prop_assert!(r_lo > 0.0 && r_hi <= 1.0);
            let slower = ppd_ratio(&state(tau * 1.5), lo).unwrap();
            prop_assert!(slower <= r_lo + 1e-12);
        }

        #[test]
        fn kernel_antisymmetric_and_decaying(d1 in 1e-4f64..1.0, d2 in 1e-4f64..1.0) {
            let p = StdpParams::default();
            prop_assert!(stdp_delta(d1, &p) > 0.0 && stdp_delta(-d1, &p) < 0.0);
            let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(stdp_delta(lo, &p).abs() >= stdp_delta(hi, &p).abs());
            prop_assert!(stdp_delta(-lo, &p).abs() >= stdp_delta(-hi, &p).abs());
        }
    }
}
