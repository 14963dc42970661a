//! Field-directed fiber growth on the electrolyte lattice.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{self, Bias, Cell, ElectrodeId, PotentialField, Role, SimDomain, SolveOptions};
use crate::signals::{StimulusSet, WaveKind};

const EMPTY: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberNode {
    pub cell: usize,
    /// Index of the electrode this node descends from.
    pub seed: u16,
    /// µm.
    pub thickness: f64,
    pub doping: f64,
    /// Growth cycle at which the node appeared (0 for fixtures).
    pub born: u64,
    /// Peak field at the moment of occupation, V/µm (0 for fixtures).
    pub birth_field: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberGraph {
    nx: usize,
    ny: usize,
    slot: Vec<u32>,
    nodes: Vec<FiberNode>,
    /// µm³.
    pub deposited_volume: f64,
    /// Deposited volume split by seed electrode index.
    pub seed_volume: Vec<f64>,
    version: u64,
}

impl FiberGraph {
    pub fn new(nx: usize, ny: usize) -> Self {
        FiberGraph {
            nx,
            ny,
            slot: vec![EMPTY; nx * ny],
            nodes: Vec::new(),
            deposited_volume: 0.0,
            seed_volume: Vec::new(),
            version: 0,
        }
    }

    pub fn for_domain(domain: &SimDomain) -> Self {
        let mut g = Self::new(domain.nx, domain.ny);
        g.seed_volume = vec![0.0; domain.electrodes.len()];
        g
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Bumped whenever a node is added or an attribute changes.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn is_occupied(&self, i: usize) -> bool {
        self.slot[i] != EMPTY
    }

    pub fn node(&self, i: usize) -> Option<&FiberNode> {
        match self.slot[i] {
            EMPTY => None,
            k => Some(&self.nodes[k as usize]),
        }
    }

    /// Nodes in insertion order.
    pub fn nodes(&self) -> &[FiberNode] {
        &self.nodes
    }

    /// Mutable access to every node's doping, for plasticity updates.
    pub fn for_each_doping(&mut self, mut f: impl FnMut(&FiberNode) -> f64) {
        for n in self.nodes.iter_mut() {
            n.doping = f(n).clamp(0.0, 1.0);
        }
        self.version += 1;
    }

    pub fn set_uniform_doping(&mut self, s: f64) {
        self.for_each_doping(|_| s);
    }

    /// Adds a node without checking growth rules; the volume counts toward
    /// `deposited_volume` only when `count_volume` is set.
    pub fn insert(&mut self, node: FiberNode, cell_size: f64, count_volume: bool) -> Result<()> {
        if node.cell >= self.slot.len() {
            return Err(Error::Domain(format!("fiber cell {} outside lattice", node.cell)));
        }
        if self.slot[node.cell] != EMPTY {
            return Err(Error::Domain(format!("fiber cell {} already occupied", node.cell)));
        }
        if !(node.thickness > 0.0) || !(0.0..=1.0).contains(&node.doping) {
            return Err(Error::Domain("fiber node needs positive thickness and doping in [0, 1]".into()));
        }
        self.slot[node.cell] = self.nodes.len() as u32;
        self.nodes.push(node);
        if count_volume {
            let v = cell_size * node.thickness * node.thickness;
            self.deposited_volume += v;
            let s = node.seed as usize;
            if self.seed_volume.len() <= s {
                self.seed_volume.resize(s + 1, 0.0);
            }
            self.seed_volume[s] += v;
        }
        self.version += 1;
        Ok(())
    }

    /// Fixture helper: a fully doped node.
    pub fn add_fixture(&mut self, domain: &SimDomain, cell: Cell, seed: &str, thickness: f64) -> Result<()> {
        let seed = domain.electrode_index(seed)? as u16;
        let i = domain.index(cell.0, cell.1);
        if domain.owner(i).is_some() {
            return Err(Error::Domain(format!("fiber cell {cell:?} lies on an electrode")));
        }
        self.insert(
            FiberNode { cell: i, seed, thickness, doping: 1.0, born: 0, birth_field: 0.0 },
            domain.cell_size,
            false,
        )
    }

    fn occupied_or_electrode(&self, domain: &SimDomain, i: usize) -> bool {
        self.is_occupied(i) || domain.owner(i).is_some()
    }

    /// Occupied neighbours of a node; electrode cells count as occupied.
    pub fn occupied_neighbors(&self, domain: &SimDomain, i: usize) -> usize {
        domain.neighbors(i).filter(|&j| self.occupied_or_electrode(domain, j)).count()
    }

    /// Nodes with exactly one occupied neighbour, in lattice order.
    pub fn tips(&self, domain: &SimDomain) -> Vec<usize> {
        let mut t: Vec<usize> = self
            .nodes
            .iter()
            .map(|n| n.cell)
            .filter(|&c| self.occupied_neighbors(domain, c) == 1)
            .collect();
        t.sort_unstable();
        t
    }

    /// Mean doping over nodes, 1 for an empty graph.
    pub fn mean_doping(&self) -> f64 {
        if self.nodes.is_empty() {
            return 1.0;
        }
        self.nodes.iter().map(|n| n.doping).sum::<f64>() / self.nodes.len() as f64
    }

    /// Canonical JSON with sorted nodes and explicit edges.
    pub fn to_json(&self, domain: &SimDomain) -> serde_json::Value {
        let mut nodes: Vec<&FiberNode> = self.nodes.iter().collect();
        nodes.sort_by_key(|n| n.cell);
        let node_json: Vec<serde_json::Value> = nodes
            .iter()
            .map(|n| {
                let (x, y) = domain.coords(n.cell);
                serde_json::json!({
                    "x": x,
                    "y": y,
                    "seed": domain.electrodes.get(n.seed as usize).map(|e| e.id.as_str()).unwrap_or("?"),
                    "thickness_um": n.thickness,
                    "doping": n.doping,
                    "born": n.born,
                    "birth_field_V_per_um": n.birth_field,
                })
            })
            .collect();
        let mut edges = Vec::new();
        for n in &nodes {
            for j in domain.neighbors(n.cell) {
                if j > n.cell && self.is_occupied(j) {
                    let (a, b) = (domain.coords(n.cell), domain.coords(j));
                    edges.push(serde_json::json!([[a.0, a.1], [b.0, b.1]]));
                }
            }
        }
        let electrodes: Vec<serde_json::Value> = domain
            .electrodes
            .iter()
            .map(|e| {
                serde_json::json!({
                    "id": e.id.as_str(),
                    "role": e.role.name(),
                    "cells": e.cells.iter().map(|&(x, y)| [x, y]).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "schema": 1,
            "nx": domain.nx,
            "ny": domain.ny,
            "cell_size_um": domain.cell_size,
            "electrodes": electrodes,
            "deposited_volume_um3": self.deposited_volume,
            "nodes": node_json,
            "edges": edges,
        })
    }

    /// Stable content hash of [`FiberGraph::to_json`].
    pub fn content_hash(&self, domain: &SimDomain) -> String {
        let text = serde_json::to_string(&self.to_json(domain)).expect("serializable");
        hex_digest(text.as_bytes())
    }

    /// Inverse of [`FiberGraph::to_json`].
    pub fn from_json(v: &serde_json::Value) -> Result<(SimDomain, FiberGraph)> {
        let bad = |m: &str| Error::Io(format!("fiber graph json: {m}"));
        if v.get("schema").and_then(|s| s.as_u64()) != Some(1) {
            return Err(bad("unsupported schema"));
        }
        let num = |k: &str| v.get(k).and_then(|x| x.as_f64()).ok_or_else(|| bad(k));
        let nx = num("nx")? as usize;
        let ny = num("ny")? as usize;
        let h = num("cell_size_um")?;
        let mut electrodes = Vec::new();
        for e in v.get("electrodes").and_then(|e| e.as_array()).ok_or_else(|| bad("electrodes"))? {
            let id = e.get("id").and_then(|x| x.as_str()).ok_or_else(|| bad("electrode id"))?;
            let role = e
                .get("role")
                .and_then(|x| x.as_str())
                .and_then(Role::parse)
                .ok_or_else(|| bad("electrode role"))?;
            let cells = e
                .get("cells")
                .and_then(|x| x.as_array())
                .ok_or_else(|| bad("electrode cells"))?
                .iter()
                .map(|c| {
                    let x = c.get(0).and_then(|x| x.as_u64()).ok_or_else(|| bad("cell"))?;
                    let y = c.get(1).and_then(|x| x.as_u64()).ok_or_else(|| bad("cell"))?;
                    Ok((x as usize, y as usize))
                })
                .collect::<Result<Vec<_>>>()?;
            electrodes.push(field::Electrode { id: ElectrodeId::from(id), role, cells });
        }
        let domain = SimDomain::new(nx, ny, h, electrodes)?;
        let mut g = FiberGraph::for_domain(&domain);
        for n in v.get("nodes").and_then(|x| x.as_array()).ok_or_else(|| bad("nodes"))? {
            let f = |k: &str| n.get(k).and_then(|x| x.as_f64()).ok_or_else(|| bad(k));
            let seed = n.get("seed").and_then(|x| x.as_str()).ok_or_else(|| bad("seed"))?;
            let (x, y) = (f("x")? as usize, f("y")? as usize);
            if x >= nx || y >= ny {
                return Err(bad("node outside lattice"));
            }
            g.insert(
                FiberNode {
                    cell: domain.index(x, y),
                    seed: domain.electrode_index(seed)? as u16,
                    thickness: f("thickness_um")?,
                    doping: f("doping")?,
                    born: f("born")? as u64,
                    birth_field: f("birth_field_V_per_um")?,
                },
                h,
                false,
            )?;
        }
        g.deposited_volume = num("deposited_volume_um3")?;
        Ok((domain, g))
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    /// Oxidation field threshold, V/µm.
    pub e_ox: f64,
    pub eta: f64,
    /// µm³ per second of positive stimulus.
    pub k_dep: f64,
    /// Thickness law w = w0·(f0/f)^alpha.
    pub w0: f64,
    pub f0: f64,
    pub alpha: f64,
    /// Extra per-cycle nucleation at tip flanks, in units of one reference
    /// cell volume `cell_size·w0²`.
    pub branch_bias: f64,
    pub seed: u64,
    /// Permit deposition under pure DC bias.
    pub allow_dc: bool,
    /// Potential solve tolerance, V.
    pub tol: f64,
}

/// Maximum field at the perimeter of the default two-electrode pads at 1 V.
/// Computed by [`calibrate_e_ox`]; kept here so defaults need no solve.
pub const UNIT_PERIMETER_FIELD: f64 = 0.010068732152088367;

/// Ratio of the oxidation threshold to the unit perimeter field.
pub const E_OX_RATIO: f64 = 2.5;

/// Largest surface field on the perimeter of `drive` when it sits at 1 V
/// and `ground` at 0 V, with no fibers present.
pub fn calibrate_e_ox(domain: &SimDomain, drive: &str, ground: &str) -> Result<f64> {
    let fibers = FiberGraph::for_domain(domain);
    let volts = field::bias([(drive, 1.0), (ground, 0.0)]);
    let p = field::solve_with(domain, &fibers, &volts, &SolveOptions::tol(1e-8), None)?;
    let k = domain.electrode_index(drive)?;
    Ok(domain.electrodes[k]
        .cells
        .iter()
        .map(|&c| field::field_at(&p, c))
        .fold(0.0, f64::max))
}

impl Default for GrowthParams {
    fn default() -> Self {
        GrowthParams {
            e_ox: E_OX_RATIO * UNIT_PERIMETER_FIELD,
            eta: 2.0,
            k_dep: 3200.0,
            w0: 2.0,
            f0: 10.0,
            alpha: 0.5,
            branch_bias: 0.0,
            seed: 1,
            allow_dc: false,
            tol: 1e-4,
        }
    }
}

impl GrowthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Domain(format!("growth parameters: {m}")));
        if !(self.e_ox > 0.0) {
            return bad("E_ox must be positive");
        }
        if !(self.eta >= 1.0) {
            return bad("eta must be at least 1");
        }
        if !(self.alpha > 0.0) {
            return bad("alpha must be positive");
        }
        if !(self.k_dep >= 0.0 && self.w0 > 0.0 && self.f0 > 0.0 && self.branch_bias >= 0.0 && self.tol > 0.0) {
            return bad("k_dep, w0, f0, branch_bias and tol must be non-negative (w0, f0, tol positive)");
        }
        Ok(())
    }

    /// Deposit thickness at growth frequency `f`.
    pub fn thickness(&self, f: f64) -> f64 {
        self.w0 * (self.f0 / f).powf(self.alpha)
    }
}

/// Electrodes counted as driven at every instant: every stimulated electrode
/// plus unassigned outputs, which sit at ground.
pub fn active_electrodes(domain: &SimDomain, stimuli: &StimulusSet) -> Result<Vec<usize>> {
    let mut on = vec![false; domain.electrodes.len()];
    for (id, _) in &stimuli.assignments {
        on[domain.electrode_index(id.as_str())?] = true;
    }
    for (k, e) in domain.electrodes.iter().enumerate() {
        if e.role == Role::Output {
            on[k] = true;
        }
    }
    Ok((0..on.len()).filter(|&k| on[k]).collect())
}

/// Electrode voltages at time `t`.
pub fn bias_at(domain: &SimDomain, stimuli: &StimulusSet, t: f64) -> Result<Bias> {
    let mut b = Bias::new();
    for e in &domain.electrodes {
        if e.role == Role::Output {
            b.insert(e.id.clone(), 0.0);
        }
    }
    for (id, w) in &stimuli.assignments {
        domain.electrode_index(id.as_str())?;
        b.insert(id.clone(), w.sample(t));
    }
    Ok(b)
}

/// Empty lattice neighbours of tips and of the given electrodes' perimeters,
/// in lattice order.
pub fn growth_candidates(fibers: &FiberGraph, domain: &SimDomain, active: &[usize]) -> Vec<usize> {
    let mut mark = vec![false; domain.len()];
    let free = |j: usize| !fibers.is_occupied(j) && domain.owner(j).is_none();
    for t in fibers.tips(domain) {
        for j in domain.neighbors(t) {
            if free(j) {
                mark[j] = true;
            }
        }
    }
    for &k in active {
        for &(x, y) in &domain.electrodes[k].cells {
            for j in domain.neighbors(domain.index(x, y)) {
                if free(j) {
                    mark[j] = true;
                }
            }
        }
    }
    (0..mark.len()).filter(|&i| mark[i]).collect()
}

/// Cells beside a tip, perpendicular to its stem.
fn flank_cells(fibers: &FiberGraph, domain: &SimDomain) -> Vec<bool> {
    let mut flank = vec![false; domain.len()];
    let nx = domain.nx as isize;
    for t in fibers.tips(domain) {
        let Some(stem) = domain.neighbors(t).find(|&j| fibers.occupied_or_electrode(domain, j)) else {
            continue;
        };
        let d = stem as isize - t as isize;
        let horizontal = d.abs() == 1;
        for j in domain.neighbors(t) {
            let dj = j as isize - t as isize;
            let lateral = if horizontal { dj.abs() == nx } else { dj.abs() == 1 };
            if lateral {
                flank[j] = true;
            }
        }
    }
    flank
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StepReport {
    pub cycles_run: u64,
    pub new_cells: usize,
    /// µm³ deposited during the step.
    pub deposited: f64,
    /// Cycles whose expected deposit was nonzero.
    pub active_cycles: u64,
    /// Set when pure DC refused to grow.
    pub dc_refused: bool,
}

/// Per-candidate occupation probabilities `min(1, q·g)` whose sum is
/// `target`, or every positive weight at 1 when that is not reachable.
fn normalize(q: &[f64], target: f64) -> Vec<f64> {
    let mut p = vec![0.0; q.len()];
    if target <= 0.0 {
        return p;
    }
    let mut idx: Vec<usize> = (0..q.len()).filter(|&i| q[i] > 0.0).collect();
    if (idx.len() as f64) <= target {
        for i in idx {
            p[i] = 1.0;
        }
        return p;
    }
    idx.sort_by(|&a, &b| q[b].total_cmp(&q[a]).then(a.cmp(&b)));
    let mut tail: f64 = idx.iter().map(|&i| q[i]).sum();
    let mut g = 0.0;
    for (k, &i) in idx.iter().enumerate() {
        g = (target - k as f64) / tail;
        if q[i] * g < 1.0 {
            break;
        }
        tail -= q[i];
    }
    for &i in &idx {
        p[i] = (q[i] * g).min(1.0);
    }
    p
}

/// One growth trajectory: the lattice, its fibers and cached fields.
#[derive(Debug, Clone)]
pub struct Grower {
    pub domain: SimDomain,
    pub params: GrowthParams,
    pub fibers: FiberGraph,
    /// Macro-cycles run so far; also the random substream index.
    pub cycle: u64,
    fields: Vec<PotentialField>,
    fields_key: Option<(u64, u64)>,
    pub solves: u64,
}

impl Grower {
    pub fn new(domain: SimDomain, params: GrowthParams) -> Result<Self> {
        params.validate()?;
        let fibers = FiberGraph::for_domain(&domain);
        Ok(Self::with_fibers(domain, params, fibers))
    }

    pub fn with_fibers(domain: SimDomain, params: GrowthParams, fibers: FiberGraph) -> Self {
        Grower { domain, params, fibers, cycle: 0, fields: Vec::new(), fields_key: None, solves: 0 }
    }

    /// Fields at every peak instant for the current geometry, reusing the
    /// previous solves when nothing changed.
    pub fn peak_fields(&mut self, stimuli: &StimulusSet) -> Result<&[PotentialField]> {
        let instants = stimuli.peak_instants()?;
        let key = (self.fibers.version(), stimulus_key(stimuli));
        if self.fields_key == Some(key) && self.fields.len() == instants.len() {
            return Ok(&self.fields);
        }
        let opts = SolveOptions::tol(self.params.tol);
        let mut out = Vec::with_capacity(instants.len());
        for (k, &t) in instants.iter().enumerate() {
            let b = bias_at(&self.domain, stimuli, t)?;
            let guess = self.fields.get(k).map(|f| f.values.as_slice());
            out.push(field::solve_with(&self.domain, &self.fibers, &b, &opts, guess)?);
            self.solves += 1;
        }
        self.fields = out;
        self.fields_key = Some(key);
        Ok(&self.fields)
    }

    /// Runs `n_cycles` macro-cycles of deposition under `stimuli`.
    pub fn cycle_step(&mut self, stimuli: &StimulusSet, n_cycles: u64) -> Result<StepReport> {
        stimuli.validate()?;
        let mut rep = StepReport::default();
        let growth_f = stimuli.growth_frequency();
        let (window, freq) = match growth_f {
            Some(f) => (stimuli.positive_window()?, f),
            None => {
                let any = stimuli.assignments.iter().any(|(_, w)| w.kind == WaveKind::Dc && w.amplitude + w.baseline != 0.0);
                if !self.params.allow_dc || !any {
                    rep.dc_refused = any;
                    rep.cycles_run = n_cycles;
                    self.cycle += n_cycles;
                    return Ok(rep);
                }
                (1.0 / self.params.f0, self.params.f0)
            }
        };
        let active = active_electrodes(&self.domain, stimuli)?;
        let h = self.domain.cell_size;
        let w = self.params.thickness(freq);
        let v_cell = h * w * w;
        let main_target = self.params.k_dep * window / v_cell;
        let nuc_target = self.params.branch_bias * h * self.params.w0 * self.params.w0 / v_cell;
        let e_ox = self.params.e_ox;
        let eta = self.params.eta;

        let start = self.cycle;
        for _ in 0..n_cycles {
            let cand = growth_candidates(&self.fibers, &self.domain, &active);
            let fields = self.peak_fields(stimuli)?;
            let peak: Vec<f64> = cand
                .iter()
                .map(|&c| {
                    let cell = (c % fields[0].nx, c / fields[0].nx);
                    fields.iter().map(|f| field::field_at(f, cell)).fold(0.0, f64::max)
                })
                .collect();
            let q: Vec<f64> = cand
                .iter()
                .zip(&peak)
                .map(|(&c, &e)| {
                    if e >= e_ox && self.eligible_seed(c, &active).is_some() {
                        (e / e_ox - 1.0).powf(eta)
                    } else {
                        0.0
                    }
                })
                .collect();
            rep.cycles_run += 1;
            let cycle = self.cycle;
            self.cycle += 1;
            if q.iter().all(|&x| x == 0.0) {
                // Geometry cannot change any more under this stimulus.
                rep.cycles_run = n_cycles;
                self.cycle = start + n_cycles;
                break;
            }
            rep.active_cycles += 1;
            let p_main = normalize(&q, main_target);
            let p = if nuc_target > 0.0 {
                let flank = flank_cells(&self.fibers, &self.domain);
                let qf: Vec<f64> = cand.iter().zip(&q).map(|(&c, &x)| if flank[c] { x } else { 0.0 }).collect();
                let p_nuc = normalize(&qf, nuc_target);
                p_main.iter().zip(&p_nuc).map(|(a, b)| 1.0 - (1.0 - a) * (1.0 - b)).collect()
            } else {
                p_main
            };
            let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed);
            rng.set_stream(cycle);
            let mut born = Vec::new();
            for (k, &c) in cand.iter().enumerate() {
                let u: f64 = rng.random();
                if p[k] > 0.0 && u < p[k] {
                    born.push((c, peak[k]));
                }
            }
            for (c, e) in born {
                // re-checked against this cycle's earlier births
                let Some(seed) = self.eligible_seed(c, &active) else { continue };
                self.fibers.insert(
                    FiberNode { cell: c, seed, thickness: w, doping: 1.0, born: cycle + 1, birth_field: e },
                    h,
                    true,
                )?;
                rep.new_cells += 1;
                rep.deposited += v_cell;
            }
        }
        Ok(rep)
    }

    /// Seed a new cell at `c` would inherit, if it may grow there.
    ///
    /// The anchor is the first fiber or driven-electrode neighbour in N, E,
    /// S, W order. Any further occupied neighbour must be foreign (another
    /// seed's fiber or another electrode): deposits extend fibers one cell
    /// wide and may touch other structures, but never fuse with their own.
    fn eligible_seed(&self, c: usize, active: &[usize]) -> Option<u16> {
        let seed_of = |j: usize| -> Option<(u16, bool)> {
            if let Some(n) = self.fibers.node(j) {
                return Some((n.seed, true));
            }
            self.domain.owner(j).map(|k| (k as u16, false))
        };
        let mut anchor: Option<u16> = None;
        let mut own = 0;
        let mut occupied = Vec::with_capacity(4);
        for j in self.domain.neighbors(c) {
            if let Some((s, is_fiber)) = seed_of(j) {
                occupied.push(s);
                if anchor.is_none() && (is_fiber || active.contains(&(s as usize))) {
                    anchor = Some(s);
                }
            }
        }
        let a = anchor?;
        for s in occupied {
            if s == a {
                own += 1;
            }
        }
        (own == 1).then_some(a)
    }
}

fn stimulus_key(s: &StimulusSet) -> u64 {
    let mut h = Sha256::new();
    for (id, w) in &s.assignments {
        h.update(id.as_str().as_bytes());
        h.update([w.kind as u8]);
        for x in [w.amplitude, w.frequency, w.phase_offset, w.pulse_width, w.baseline] {
            h.update(x.to_le_bytes());
        }
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Shortest chain of fiber cells joining electrodes `a` and `b`.
pub fn detect_bridge(fibers: &FiberGraph, domain: &SimDomain, a: &str, b: &str) -> Result<Option<Vec<Cell>>> {
    let ka = domain.electrode_index(a)?;
    let kb = domain.electrode_index(b)?;
    let touches = |i: usize, k: usize| domain.neighbors(i).any(|j| domain.owner(j) == Some(k));
    let n = domain.len();
    let mut prev = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut starts: Vec<usize> = fibers.nodes().iter().map(|n| n.cell).filter(|&c| touches(c, ka)).collect();
    starts.sort_unstable();
    for c in starts {
        prev[c] = c;
        queue.push_back(c);
    }
    while let Some(c) = queue.pop_front() {
        if touches(c, kb) {
            let mut path = vec![domain.coords(c)];
            let mut cur = c;
            while prev[cur] != cur {
                cur = prev[cur];
                path.push(domain.coords(cur));
            }
            path.reverse();
            return Ok(Some(path));
        }
        for j in domain.neighbors(c) {
            if fibers.is_occupied(j) && prev[j] == usize::MAX {
                prev[j] = c;
                queue.push_back(j);
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BranchStats {
    pub nodes: usize,
    /// µm.
    pub mean_thickness: f64,
    pub branch_points: usize,
    /// µm².
    pub total_surface: f64,
    pub tip_count: usize,
}

/// Exposed faces of a node: lattice sides not shared with fibers or electrodes.
pub fn exposed_faces(fibers: &FiberGraph, domain: &SimDomain, i: usize) -> usize {
    4 - fibers.occupied_neighbors(domain, i)
}

pub fn branch_statistics(fibers: &FiberGraph, domain: &SimDomain) -> BranchStats {
    let mut s = BranchStats { nodes: fibers.len(), ..Default::default() };
    let h = domain.cell_size;
    for n in fibers.nodes() {
        let occ = fibers.occupied_neighbors(domain, n.cell);
        s.mean_thickness += n.thickness;
        if occ >= 3 {
            s.branch_points += 1;
        }
        if occ == 1 {
            s.tip_count += 1;
        }
        s.total_surface += h * (4 - occ) as f64 * n.thickness;
    }
    if s.nodes > 0 {
        s.mean_thickness /= s.nodes as f64;
    }
    s
}
