//! Stimulus waveforms and the per-cycle quantities the growth engine needs.
//!
//! Sampling is closed form. Every periodic kind is described over one period
//! as a short list of linear segments, which also gives exact positive
//! windows and overlaps without numerical integration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ElectrodeId;

/// Action-potential template timing, in seconds.
pub const AP_RISE: f64 = 1.0e-3;
pub const AP_FALL: f64 = 1.5e-3;
pub const AP_RECOVER: f64 = 2.5e-3;
/// Hyperpolarization depth as a fraction of the amplitude.
pub const AP_UNDERSHOOT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveKind {
    SquareAc,
    Dc,
    PulseTrain,
    ActionPotential,
}

impl WaveKind {
    pub fn name(self) -> &'static str {
        match self {
            WaveKind::SquareAc => "square_ac",
            WaveKind::Dc => "dc",
            WaveKind::PulseTrain => "pulse_train",
            WaveKind::ActionPotential => "action_potential",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "square_ac" => WaveKind::SquareAc,
            "dc" => WaveKind::Dc,
            "pulse_train" => WaveKind::PulseTrain,
            "action_potential" => WaveKind::ActionPotential,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub kind: WaveKind,
    /// Volts, non-negative.
    pub amplitude: f64,
    /// Hertz; zero for DC.
    pub frequency: f64,
    /// Seconds, in `[0, period)`.
    pub phase_offset: f64,
    /// Seconds; only meaningful for pulse trains.
    pub pulse_width: f64,
    pub baseline: f64,
}

impl Waveform {
    fn periodic(kind: WaveKind, amplitude: f64, frequency: f64) -> Self {
        Waveform {
            kind,
            amplitude,
            frequency,
            phase_offset: 0.0,
            pulse_width: 0.0,
            baseline: 0.0,
        }
    }

    pub fn square(amplitude: f64, frequency: f64) -> Self {
        Self::periodic(WaveKind::SquareAc, amplitude, frequency)
    }

    pub fn dc(volts: f64) -> Self {
        Self::periodic(WaveKind::Dc, volts, 0.0)
    }

    pub fn pulse_train(amplitude: f64, frequency: f64, width: f64) -> Self {
        Waveform {
            pulse_width: width,
            ..Self::periodic(WaveKind::PulseTrain, amplitude, frequency)
        }
    }

    pub fn action_potential(amplitude: f64, frequency: f64) -> Self {
        Self::periodic(WaveKind::ActionPotential, amplitude, frequency)
    }

    /// Shifts the waveform later by `offset` seconds, wrapped into one period.
    pub fn delayed(mut self, offset: f64) -> Self {
        self.phase_offset = match self.period() {
            Some(p) => offset.rem_euclid(p),
            None => 0.0,
        };
        self
    }

    pub fn with_baseline(mut self, baseline: f64) -> Self {
        self.baseline = baseline;
        self
    }

    pub fn is_periodic(&self) -> bool {
        self.kind != WaveKind::Dc && self.frequency > 0.0
    }

    pub fn period(&self) -> Option<f64> {
        self.is_periodic().then(|| 1.0 / self.frequency)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Signal(m.to_string()));
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return bad("amplitude must be finite and non-negative");
        }
        if !(self.frequency.is_finite() && self.frequency >= 0.0) {
            return bad("frequency must be finite and non-negative");
        }
        if self.kind != WaveKind::Dc && self.frequency == 0.0 {
            return bad("periodic waveform needs a positive frequency");
        }
        if let Some(p) = self.period() {
            if !(0.0..p).contains(&self.phase_offset) {
                return bad("phase offset must lie within one period");
            }
            if self.kind == WaveKind::PulseTrain && !(self.pulse_width > 0.0 && self.pulse_width <= p) {
                return bad("pulse width must be positive and at most one period");
            }
        }
        Ok(())
    }

    /// Linear pieces `(t0, t1, v0, v1)` covering one period in local time
    /// (before the phase offset is applied).
    fn segments(&self) -> Vec<(f64, f64, f64, f64)> {
        let a = self.amplitude;
        let b = self.baseline;
        let Some(p) = self.period() else {
            return vec![(0.0, 1.0, a + b, a + b)];
        };
        let mut segs = match self.kind {
            WaveKind::SquareAc => vec![(0.0, p / 2.0, b + a, b + a), (p / 2.0, p, b - a, b - a)],
            WaveKind::PulseTrain => {
                let w = self.pulse_width.min(p);
                vec![(0.0, w, b + a, b + a), (w, p, b, b)]
            }
            WaveKind::ActionPotential => {
                let t1 = AP_RISE;
                let t2 = t1 + AP_FALL;
                let t3 = t2 + AP_RECOVER;
                let low = b - AP_UNDERSHOOT * a;
                vec![
                    (0.0, t1, b, b + a),
                    (t1, t2, b + a, low),
                    (t2, t3, low, b),
                    (t3, p.max(t3), b, b),
                ]
            }
            WaveKind::Dc => unreachable!(),
        };
        // A period shorter than the template truncates it.
        segs.retain(|s| s.0 < p);
        for s in segs.iter_mut() {
            if s.1 > p {
                let frac = (p - s.0) / (s.1 - s.0);
                s.3 = s.2 + (s.3 - s.2) * frac;
                s.1 = p;
            }
        }
        segs.retain(|s| s.1 > s.0);
        segs
    }

    /// Local time within the period for absolute time `t`.
    fn local_time(&self, t: f64) -> f64 {
        match self.period() {
            Some(p) => (t - self.phase_offset).rem_euclid(p),
            None => 0.0,
        }
    }

    pub fn sample(&self, t: f64) -> f64 {
        if !self.is_periodic() {
            return self.amplitude + self.baseline;
        }
        let tau = self.local_time(t);
        for &(t0, t1, v0, v1) in &self.segments() {
            if tau >= t0 && tau < t1 {
                return if v0 == v1 { v0 } else { v0 + (v1 - v0) * (tau - t0) / (t1 - t0) };
            }
        }
        self.baseline
    }

    /// Time of the positive maximum within the first period, absolute.
    pub fn peak_time(&self) -> f64 {
        let Some(p) = self.period() else { return 0.0 };
        let local = match self.kind {
            WaveKind::SquareAc => p / 4.0,
            WaveKind::PulseTrain => self.pulse_width.min(p) / 2.0,
            WaveKind::ActionPotential => AP_RISE.min(p),
            WaveKind::Dc => 0.0,
        };
        (local + self.phase_offset).rem_euclid(p)
    }

    /// Sub-intervals of `[0, period)` (absolute time modulo period) where the
    /// waveform is strictly positive.
    pub fn positive_intervals(&self) -> Result<Vec<(f64, f64)>> {
        let p = self
            .period()
            .ok_or_else(|| Error::Signal("DC waveform has no period".into()))?;
        let mut local = Vec::new();
        for (t0, t1, v0, v1) in self.segments() {
            match (v0 > 0.0, v1 > 0.0) {
                (true, true) => local.push((t0, t1)),
                (false, false) => {}
                (true, false) => local.push((t0, t0 + (t1 - t0) * v0 / (v0 - v1))),
                (false, true) => local.push((t0 + (t1 - t0) * (-v0) / (v1 - v0), t1)),
            }
        }
        Ok(shift_intervals(&merge(local), self.phase_offset, p))
    }

    /// Total time per period during which the waveform is positive.
    pub fn positive_window(&self) -> Result<f64> {
        Ok(measure(&self.positive_intervals()?))
    }
}

fn merge(mut iv: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    iv.retain(|&(a, b)| b > a);
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn shift_intervals(iv: &[(f64, f64)], shift: f64, period: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(iv.len() + 1);
    for &(a, b) in iv {
        let len = b - a;
        if len >= period {
            return vec![(0.0, period)];
        }
        let s = (a + shift).rem_euclid(period);
        let e = s + len;
        if e <= period {
            out.push((s, e));
        } else {
            out.push((s, period));
            out.push((0.0, e - period));
        }
    }
    merge(out)
}

fn measure(iv: &[(f64, f64)]) -> f64 {
    iv.iter().map(|(a, b)| b - a).sum()
}

fn intersection(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if hi > lo {
                total += hi - lo;
            }
        }
    }
    total
}

/// Fraction of one period during which `w1` and `w2` delayed by `offset` are
/// simultaneously positive.
pub fn pairwise_overlap(w1: &Waveform, w2: &Waveform, offset: f64) -> Result<f64> {
    let (Some(p1), Some(p2)) = (w1.period(), w2.period()) else {
        return Err(Error::Signal("overlap needs two periodic waveforms".into()));
    };
    if (p1 - p2).abs() > 1e-12 * p1.max(p2) {
        return Err(Error::Signal(format!(
            "mismatched frequencies {} Hz and {} Hz",
            w1.frequency, w2.frequency
        )));
    }
    let i1 = w1.positive_intervals()?;
    let i2 = shift_intervals(&w2.positive_intervals()?, offset, p1);
    Ok((intersection(&i1, &i2) / p1).clamp(0.0, 1.0))
}

/// Waveform assignments for one phase. Electrodes not listed float.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StimulusSet {
    pub assignments: Vec<(ElectrodeId, Waveform)>,
    pub duration: f64,
}

impl StimulusSet {
    pub fn new(duration: f64) -> Self {
        StimulusSet { assignments: Vec::new(), duration }
    }

    pub fn with(mut self, id: impl Into<ElectrodeId>, w: Waveform) -> Self {
        self.assign(id, w);
        self
    }

    /// Replaces any existing waveform on `id`.
    pub fn assign(&mut self, id: impl Into<ElectrodeId>, w: Waveform) {
        let id = id.into();
        self.assignments.retain(|(e, _)| *e != id);
        self.assignments.push((id, w));
    }

    pub fn get(&self, id: &str) -> Option<&Waveform> {
        self.assignments.iter().find(|(e, _)| e.as_str() == id).map(|(_, w)| w)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, (id, w)) in self.assignments.iter().enumerate() {
            if self.assignments[..i].iter().any(|(e, _)| e == id) {
                return Err(Error::Signal(format!("electrode `{id}` assigned twice")));
            }
            w.validate()?;
        }
        Ok(())
    }

    pub fn periodic(&self) -> impl Iterator<Item = &Waveform> {
        self.assignments.iter().map(|(_, w)| w).filter(|w| w.is_periodic())
    }

    /// Highest stimulus frequency, which sets the deposited fiber thickness.
    pub fn growth_frequency(&self) -> Option<f64> {
        self.periodic().map(|w| w.frequency).reduce(f64::max)
    }

    /// Shortest period into which every periodic stimulus fits an integer
    /// number of times. Errors when the frequencies are not integer-related
    /// at microhertz resolution.
    pub fn macro_period(&self) -> Result<Option<f64>> {
        let freqs: Vec<u64> = self
            .periodic()
            .map(|w| (w.frequency * 1e6).round() as u64)
            .collect();
        if freqs.is_empty() {
            return Ok(None);
        }
        let g = freqs.iter().copied().fold(0, gcd);
        let max = *freqs.iter().max().unwrap();
        if g == 0 || max / g > 10_000 {
            return Err(Error::Signal("stimulus frequencies share no common macro-period".into()));
        }
        Ok(Some(1e6 / g as f64))
    }

    /// Instants within one macro-period at which some stimulus peaks.
    pub fn peak_instants(&self) -> Result<Vec<f64>> {
        let Some(t_macro) = self.macro_period()? else {
            return Ok(vec![0.0]);
        };
        let mut out: Vec<f64> = Vec::new();
        for w in self.periodic() {
            let p = 1.0 / w.frequency;
            let n = (t_macro / p).round() as usize;
            for k in 0..n.max(1) {
                let t = w.peak_time() + k as f64 * p;
                if !out.iter().any(|&o| (o - t).abs() < 1e-9) {
                    out.push(t);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    /// Deposition window per macro-period: the longest total positive time
    /// among the driven electrodes.
    pub fn positive_window(&self) -> Result<f64> {
        let Some(t_macro) = self.macro_period()? else {
            return Ok(0.0);
        };
        let mut best = 0.0f64;
        for w in self.periodic() {
            let reps = (t_macro * w.frequency).round();
            best = best.max(w.positive_window()? * reps);
        }
        Ok(best)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}
