//! Scripted experiments: a script names a protocol, its lattice, stimulus
//! phases and seeds; running it yields a [`Report`] of series, snapshots and
//! metrics checked against the script's declared criteria.

pub mod layouts;
mod metrics;
mod run;
pub mod stock;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::CircuitParams;
use crate::error::{Error, Result};
use crate::field::{Cell, Electrode, SimDomain};
use crate::growth::{hex_digest, FiberGraph, GrowthParams};
use crate::plasticity::Retention;
use crate::signals::StimulusSet;

pub use layouts::{bitmap, digit, Bitmap, Layout};
pub use metrics::{calibrate_capacitance, derive_metrics};
pub use run::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Grow,
    Measure,
    Rest,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Grow => "grow",
            Mode::Measure => "measure",
            Mode::Rest => "rest",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Mode::Grow, Mode::Measure, Mode::Rest].into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub name: String,
    pub mode: Mode,
    /// Stimuli and duration, s.
    pub stimuli: StimulusSet,
}

impl Phase {
    pub fn new(name: impl Into<String>, mode: Mode, stimuli: StimulusSet) -> Self {
        Phase { name: name.into(), mode, stimuli }
    }

    pub fn duration(&self) -> f64 {
        self.stimuli.duration
    }

    /// Growth cycles of a Grow phase: duration times the growth frequency.
    pub fn cycles(&self) -> u64 {
        match self.stimuli.growth_frequency() {
            Some(f) => (self.stimuli.duration * f).round() as u64,
            None => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Synaptogenesis,
    Reinforcement,
    FrequencySweep,
    Pavlov,
    PatternRecognition,
    Std,
    Stdp,
}

impl Protocol {
    pub const ALL: [Protocol; 7] = [
        Protocol::Synaptogenesis,
        Protocol::Reinforcement,
        Protocol::FrequencySweep,
        Protocol::Pavlov,
        Protocol::PatternRecognition,
        Protocol::Std,
        Protocol::Stdp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Synaptogenesis => "synaptogenesis",
            Protocol::Reinforcement => "reinforcement",
            Protocol::FrequencySweep => "frequency_sweep",
            Protocol::Pavlov => "pavlov",
            Protocol::PatternRecognition => "pattern_recognition",
            Protocol::Std => "std",
            Protocol::Stdp => "stdp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// Protocol-specific settings. Fields a protocol does not use must stay at
/// their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOptions {
    /// Cycles between conductance samples during growth.
    pub sample_every: u64,
    /// Cycles between extra geometry snapshots inside grow phases; 0 keeps
    /// phase-boundary snapshots only.
    pub snapshot_every: u64,
    /// DC read bias for conductance traces, V.
    pub read_voltage: f64,
    pub epochs: usize,
    /// Length of one reinforcement epoch, s.
    pub epoch_s: f64,
    pub frequencies: Vec<f64>,
    /// Capacitance targets paired with `frequencies`, µF.
    pub targets_uf: Vec<f64>,
    /// Frequencies whose targets enter the calibration; the rest are held out.
    pub calibrate_at: Vec<f64>,
    pub intervals_ms: Vec<f64>,
    pub dt_ms: Vec<f64>,
    pub spike_amplitude: f64,
    pub train: Vec<String>,
    pub tests: Vec<String>,
    /// Reach of an inhibiting input, cells.
    pub inhibition_reach: f64,
    /// Output present when its current exceeds this multiple of the
    /// solution-only baseline.
    pub detection_factor: f64,
    /// Stimulated electrode whose growth is tracked (Pavlov).
    pub conditioned: String,
    pub unconditioned: String,
    pub response: String,
    pub gate: String,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            sample_every: 1,
            snapshot_every: 0,
            read_voltage: 0.5,
            epochs: 3,
            epoch_s: 1.0,
            frequencies: vec![10.0, 60.0, 200.0],
            targets_uf: vec![0.10, 0.39, 1.93],
            calibrate_at: vec![10.0, 200.0],
            intervals_ms: vec![50.0, 100.0, 200.0, 500.0, 1000.0],
            dt_ms: vec![-100.0, -25.0, -10.0, -5.0, -2.0, 2.0, 5.0, 10.0, 25.0, 100.0],
            spike_amplitude: 0.5,
            train: vec!["0".into()],
            tests: vec!["0".into(), "8".into(), "5".into(), "blank".into()],
            inhibition_reach: 6.0,
            detection_factor: 10.0,
            conditioned: "bell".into(),
            unconditioned: "food".into(),
            response: "salivation".into(),
            gate: "gate".into(),
        }
    }
}

/// Pre-existing straight fiber between two lattice cells, inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub seed: String,
    pub from: Cell,
    pub to: Cell,
    /// µm.
    pub thickness: f64,
}

impl Fixture {
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let ((x0, y0), (x1, y1)) = (self.from, self.to);
        if x0 != x1 && y0 != y1 {
            return Err(Error::Domain("fixture must be horizontal or vertical".into()));
        }
        Ok(if x0 == x1 {
            (y0.min(y1)..=y0.max(y1)).map(|y| (x0, y)).collect()
        } else {
            (x0.min(x1)..=x0.max(x1)).map(|x| (x, y0)).collect()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Format::Csv, Format::Json, Format::Svg].into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
            Cmp::Eq => "==",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Cmp::Le, Cmp::Ge, Cmp::Eq, Cmp::Lt, Cmp::Gt].into_iter().find(|c| c.symbol() == s)
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
            Cmp::Eq => a == b,
        }
    }
}

/// `metric cmp threshold`, evaluated against the report's ensemble metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub metric: String,
    pub cmp: Cmp,
    pub threshold: f64,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.metric, self.cmp.symbol(), self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentScript {
    pub name: String,
    pub protocol: Protocol,
    /// Stock layout the electrodes came from, if any.
    pub layout: Option<Layout>,
    pub nx: usize,
    pub ny: usize,
    /// µm.
    pub cell_size: f64,
    pub electrodes: Vec<Electrode>,
    pub fixtures: Vec<Fixture>,
    pub growth: GrowthParams,
    pub circuit: CircuitParams,
    pub retention: Retention,
    pub phases: Vec<Phase>,
    pub seeds: Vec<u64>,
    pub outputs: Vec<Format>,
    pub options: ProtocolOptions,
    pub criteria: Vec<Criterion>,
}

impl ExperimentScript {
    /// Script on a stock layout with default parameters and no phases.
    pub fn on_layout(name: impl Into<String>, protocol: Protocol, layout: Layout) -> Self {
        let (nx, ny, cell_size) = layout.grid();
        ExperimentScript {
            name: name.into(),
            protocol,
            layout: Some(layout),
            nx,
            ny,
            cell_size,
            electrodes: layout.electrodes(),
            fixtures: Vec::new(),
            growth: GrowthParams::default(),
            circuit: CircuitParams::default(),
            retention: Retention::default(),
            phases: Vec::new(),
            seeds: vec![1],
            outputs: vec![Format::Csv, Format::Json, Format::Svg],
            options: ProtocolOptions::default(),
            criteria: Vec::new(),
        }
    }

    pub fn domain(&self) -> Result<SimDomain> {
        SimDomain::new(self.nx, self.ny, self.cell_size, self.electrodes.clone())
    }

    /// Empty graph with the fixtures laid down.
    pub fn initial_fibers(&self, domain: &SimDomain) -> Result<FiberGraph> {
        let mut g = FiberGraph::for_domain(domain);
        for f in &self.fixtures {
            for c in f.cells()? {
                g.add_fixture(domain, c, &f.seed, f.thickness)?;
            }
        }
        Ok(g)
    }

    /// Structural checks beyond what parsing enforces.
    pub fn validate(&self) -> Result<()> {
        let domain = self.domain()?;
        self.growth.validate()?;
        self.circuit.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Domain("script declares no seeds".into()));
        }
        for p in &self.phases {
            if !(p.duration() > 0.0) {
                return Err(Error::Domain(format!("phase {}: duration must be positive", p.name)));
            }
            p.stimuli.validate()?;
            for (id, _) in &p.stimuli.assignments {
                domain
                    .electrode_index(id.as_str())
                    .map_err(|_| Error::Domain(format!("phase {}: stimulus on undefined electrode `{id}`", p.name)))?;
            }
            if p.mode == Mode::Grow && p.stimuli.growth_frequency().is_none() && !self.growth.allow_dc {
                return Err(Error::Domain(format!("phase {}: grow phase needs a periodic stimulus", p.name)));
            }
        }
        self.initial_fibers(&domain)?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        hex_digest(serde_json::to_string(self).expect("serializable").as_bytes())
    }

    /// Copy that runs only `seed`.
    pub fn with_seed(&self, seed: u64) -> Self {
        ExperimentScript { seeds: vec![seed], ..self.clone() }
    }
}

/// Named columns of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn col(&self, name: &str) -> Vec<f64> {
        match self.columns.iter().position(|c| c == name) {
            Some(k) => self.rows.iter().map(|r| r[k]).collect(),
            None => Vec::new(),
        }
    }
}

/// Geometry at a named moment of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub label: String,
    pub t: f64,
    pub cycle: u64,
    pub hash: String,
    /// Full graph JSON, kept for the first few seeds only.
    pub graph: Option<serde_json::Value>,
}

/// Runs beyond this many seeds keep snapshot hashes without the graphs.
pub const SNAPSHOT_SEEDS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub series: Vec<Table>,
    pub snapshots: Vec<Snapshot>,
    /// Named instants, s (phase boundaries, bridge time).
    pub marks: BTreeMap<String, f64>,
    pub metrics: BTreeMap<String, f64>,
    pub failed: bool,
}

impl SeedRun {
    pub fn new(seed: u64) -> Self {
        SeedRun {
            seed,
            series: Vec::new(),
            snapshots: Vec::new(),
            marks: BTreeMap::new(),
            metrics: BTreeMap::new(),
            failed: false,
        }
    }

    pub fn series(&self, name: &str) -> Option<&Table> {
        self.series.iter().find(|t| t.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub criterion: String,
    pub value: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub experiment: String,
    pub protocol: Protocol,
    pub script_hash: String,
    pub seeds: Vec<u64>,
    pub runs: Vec<SeedRun>,
    /// Ensemble tables.
    pub tables: Vec<Table>,
    pub metrics: BTreeMap<String, f64>,
    pub criteria: Vec<CriterionResult>,
    /// Set when any seed failed to reach its protocol goal.
    pub failed: bool,
}

impl Report {
    pub fn new(script: &ExperimentScript) -> Self {
        Report {
            schema: 1,
            experiment: script.name.clone(),
            protocol: script.protocol,
            script_hash: script.hash(),
            seeds: script.seeds.clone(),
            runs: Vec::new(),
            tables: Vec::new(),
            metrics: BTreeMap::new(),
            criteria: Vec::new(),
            failed: false,
        }
    }

    pub fn hash(&self) -> String {
        hex_digest(serde_json::to_string(self).expect("serializable").as_bytes())
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    /// Evaluates criteria against the current metrics. A criterion on a
    /// missing or NaN metric fails.
    pub fn evaluate(&mut self, criteria: &[Criterion]) {
        self.criteria = criteria
            .iter()
            .map(|c| {
                let value = self.metrics.get(&c.metric).copied().filter(|v| !v.is_nan());
                CriterionResult {
                    criterion: c.to_string(),
                    value,
                    passed: value.is_some_and(|v| c.cmp.holds(v, c.threshold)),
                }
            })
            .collect();
    }

    /// Recomputes every metric and verdict from the stored series and
    /// compares them with the stored values.
    pub fn recheck(&self, script: &ExperimentScript) -> Result<bool> {
        let mut again = self.clone();
        for r in &mut again.runs {
            r.metrics.clear();
        }
        again.metrics.clear();
        derive_metrics(&mut again, script)?;
        again.evaluate(&script.criteria);
        // NaN metrics never compare equal, their serialized forms do
        Ok(again.hash() == self.hash())
    }
}

/// Mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Runs `f` for every seed, concurrently when the parallel feature is on,
/// returning results in seed order.
pub(crate) fn fan_out<T: Send>(seeds: &[u64], f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        seeds.par_iter().map(|&s| f(s)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seeds.iter().map(|&s| f(s)).collect()
    }
}

/// Runs the script's protocol.
pub fn run(script: &ExperimentScript) -> Result<Report> {
    script.validate()?;
    let mut report = match script.protocol {
        Protocol::Synaptogenesis => run_synaptogenesis(script)?,
        Protocol::Reinforcement => run_reinforcement(script, script.options.epochs)?,
        Protocol::FrequencySweep => run_frequency_sweep(script)?,
        Protocol::Pavlov => run_pavlov(script)?,
        Protocol::PatternRecognition => run_pattern_recognition(script)?,
        Protocol::Std => run_std(script)?,
        Protocol::Stdp => run_stdp_sweep(script)?,
    };
    derive_metrics(&mut report, script)?;
    report.evaluate(&script.criteria);
    Ok(report)
}
