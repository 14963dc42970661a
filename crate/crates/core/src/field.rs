//! Electrolyte lattice, electrode layout and the quasi-static potential solve.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::growth::FiberGraph;
use crate::sparse::SymMatrix;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElectrodeId(pub String);

impl ElectrodeId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ElectrodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ElectrodeId {
    fn from(s: &str) -> Self {
        ElectrodeId(s.to_string())
    }
}

impl From<String> for ElectrodeId {
    fn from(s: String) -> Self {
        ElectrodeId(s)
    }
}

impl From<&ElectrodeId> for ElectrodeId {
    fn from(s: &ElectrodeId) -> Self {
        s.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Input,
    Output,
    Gate,
    Floating,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Input => "input",
            Role::Output => "output",
            Role::Gate => "gate",
            Role::Floating => "floating",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "input" => Role::Input,
            "output" => Role::Output,
            "gate" => Role::Gate,
            "floating" => Role::Floating,
            _ => return None,
        })
    }
}

pub type Cell = (usize, usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Electrode {
    pub id: ElectrodeId,
    pub role: Role,
    pub cells: Vec<Cell>,
}

impl Electrode {
    /// Axis-aligned block with inclusive corners.
    pub fn rect(id: impl Into<ElectrodeId>, role: Role, x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        let (x0, x1) = (x0.min(x1), x0.max(x1));
        let (y0, y1) = (y0.min(y1), y0.max(y1));
        let cells = (y0..=y1).flat_map(|y| (x0..=x1).map(move |x| (x, y))).collect();
        Electrode { id: id.into(), role, cells }
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)`.
    pub fn bounds(&self) -> (usize, usize, usize, usize) {
        let mut b = (usize::MAX, usize::MAX, 0, 0);
        for &(x, y) in &self.cells {
            b = (b.0.min(x), b.1.min(y), b.2.max(x), b.3.max(y));
        }
        b
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.cells.len().max(1) as f64;
        let (sx, sy) = self.cells.iter().fold((0.0, 0.0), |a, &(x, y)| (a.0 + x as f64, a.1 + y as f64));
        (sx / n, sy / n)
    }

    fn is_connected(&self) -> bool {
        let set: std::collections::BTreeSet<Cell> = self.cells.iter().copied().collect();
        let Some(&start) = self.cells.first() else { return false };
        let mut seen = std::collections::BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some((x, y)) = stack.pop() {
            let nbrs = [(x + 1, y), (x.wrapping_sub(1), y), (x, y + 1), (x, y.wrapping_sub(1))];
            for n in nbrs {
                if set.contains(&n) && seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        seen.len() == set.len()
    }
}

pub const NO_ELECTRODE: u16 = u16::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct SimDomain {
    pub nx: usize,
    pub ny: usize,
    /// µm per cell.
    pub cell_size: f64,
    pub electrodes: Vec<Electrode>,
    /// Effective 2D conductivity, S/µm.
    pub solution_conductivity: f64,
    owner: Vec<u16>,
}

impl SimDomain {
    pub fn new(nx: usize, ny: usize, cell_size: f64, electrodes: Vec<Electrode>) -> Result<Self> {
        let bad = |m: String| Err(Error::Domain(m));
        if nx < 16 || ny < 16 {
            return bad(format!("lattice {nx}x{ny} is smaller than 16x16"));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return bad("cell size must be positive".into());
        }
        if electrodes.len() >= NO_ELECTRODE as usize {
            return bad("too many electrodes".into());
        }
        let mut owner = vec![NO_ELECTRODE; nx * ny];
        for (k, e) in electrodes.iter().enumerate() {
            if e.cells.is_empty() {
                return bad(format!("electrode `{}` has no cells", e.id));
            }
            if electrodes[..k].iter().any(|o| o.id == e.id) {
                return bad(format!("electrode `{}` defined twice", e.id));
            }
            for &(x, y) in &e.cells {
                if x >= nx || y >= ny {
                    return bad(format!("electrode `{}` cell ({x}, {y}) lies outside the lattice", e.id));
                }
                let o = &mut owner[y * nx + x];
                if *o != NO_ELECTRODE {
                    return bad(format!(
                        "electrodes `{}` and `{}` overlap at ({x}, {y})",
                        electrodes[*o as usize].id, e.id
                    ));
                }
                *o = k as u16;
            }
            if !e.is_connected() {
                return bad(format!("electrode `{}` is not 4-connected", e.id));
            }
        }
        Ok(SimDomain { nx, ny, cell_size, electrodes, solution_conductivity: 1e-9, owner })
    }

    pub fn with_conductivity(mut self, sigma: f64) -> Self {
        self.solution_conductivity = sigma;
        self
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.nx + x
    }

    pub fn coords(&self, i: usize) -> Cell {
        (i % self.nx, i / self.nx)
    }

    /// Electrode index owning cell `i`.
    pub fn owner(&self, i: usize) -> Option<usize> {
        let o = self.owner[i];
        (o != NO_ELECTRODE).then_some(o as usize)
    }

    pub fn electrode(&self, id: &str) -> Result<&Electrode> {
        self.electrodes
            .iter()
            .find(|e| e.id.as_str() == id)
            .ok_or_else(|| Error::UnknownElectrode(id.to_string()))
    }

    pub fn electrode_index(&self, id: &str) -> Result<usize> {
        self.electrodes
            .iter()
            .position(|e| e.id.as_str() == id)
            .ok_or_else(|| Error::UnknownElectrode(id.to_string()))
    }

    /// 4-neighbours of cell `i` that are inside the lattice.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let (x, y) = self.coords(i);
        let nx = self.nx;
        [
            (y > 0).then(|| i - nx),
            (x + 1 < nx).then(|| i + 1),
            (y + 1 < self.ny).then(|| i + nx),
            (x > 0).then(|| i - 1),
        ]
        .into_iter()
        .flatten()
    }
}

/// Electrode voltages at one instant. Electrodes not listed float.
pub type Bias = BTreeMap<ElectrodeId, f64>;

pub fn bias<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Bias {
    pairs.into_iter().map(|(k, v)| (ElectrodeId::from(k), v)).collect()
}

const FREE: u8 = 0;
const FIXED: u8 = 1;
const INSUL: u8 = 2;
/// Electrolyte pocket with no path to any driven conductor.
const DEAD: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub omega: f64,
    /// Defaults to 50·max(nx, ny).
    pub max_iter: Option<usize>,
    /// Build the cold-start guess from a coarser lattice.
    pub nested_start: bool,
    /// Also bound the extrapolated error by `tol`, not just the residual.
    pub error_control: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-5, omega: 1.8, max_iter: None, nested_start: true, error_control: false }
    }
}

impl SolveOptions {
    pub fn tol(tol: f64) -> Self {
        SolveOptions { tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub nx: usize,
    pub ny: usize,
    pub cell_size: f64,
    pub values: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Hash of conductor layout plus the Dirichlet values.
    pub boundary_stamp: u64,
    /// Hash of conductor layout only; equal stamps mean comparable solves.
    pub geometry_stamp: u64,
    kind: Vec<u8>,
}

impl PotentialField {
    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.nx + x]
    }

    pub fn is_conductor(&self, i: usize) -> bool {
        self.kind[i] == FIXED
    }

    pub fn is_insulator(&self, i: usize) -> bool {
        self.kind[i] == INSUL
    }

    pub fn is_electrolyte(&self, i: usize) -> bool {
        self.kind[i] == FREE || self.kind[i] == DEAD
    }

    /// Range of the Dirichlet values, if any.
    pub fn boundary_range(&self) -> Option<(f64, f64)> {
        let mut r: Option<(f64, f64)> = None;
        for (v, &k) in self.values.iter().zip(&self.kind) {
            if k == FIXED {
                r = Some(match r {
                    None => (*v, *v),
                    Some((lo, hi)) => (lo.min(*v), hi.max(*v)),
                });
            }
        }
        r
    }

    /// Field magnitude map over the whole lattice.
    pub fn field_map(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| field_at_index(self, i)).collect()
    }
}

/// |∇V| in V/µm. Electrolyte cells use central differences, falling back to
/// one-sided differences at the rim and next to insulators. Conductor cells
/// report their surface field: the steepest drop to an electrolyte
/// neighbour.
pub fn field_at(p: &PotentialField, cell: Cell) -> f64 {
    field_at_index(p, cell.1 * p.nx + cell.0)
}

fn field_at_index(p: &PotentialField, i: usize) -> f64 {
    let (nx, ny) = (p.nx, p.ny);
    let (x, y) = (i % nx, i / nx);
    let h = p.cell_size;
    let v = &p.values;
    let ok = |j: usize| p.kind[j] != INSUL;
    match p.kind[i] {
        INSUL | DEAD => 0.0,
        FIXED => {
            let mut best = 0.0f64;
            let mut consider = |j: usize| {
                if p.kind[j] == FREE {
                    best = best.max((v[j] - v[i]).abs() / h);
                }
            };
            if x > 0 {
                consider(i - 1);
            }
            if x + 1 < nx {
                consider(i + 1);
            }
            if y > 0 {
                consider(i - nx);
            }
            if y + 1 < ny {
                consider(i + nx);
            }
            best
        }
        _ => {
            let diff = |lo: Option<usize>, hi: Option<usize>| -> f64 {
                let lo = lo.filter(|&j| ok(j));
                let hi = hi.filter(|&j| ok(j));
                match (lo, hi) {
                    (Some(a), Some(b)) => (v[b] - v[a]) / (2.0 * h),
                    (Some(a), None) => (v[i] - v[a]) / h,
                    (None, Some(b)) => (v[b] - v[i]) / h,
                    (None, None) => 0.0,
                }
            };
            let gx = diff((x > 0).then(|| i - 1), (x + 1 < nx).then(|| i + 1));
            let gy = diff((y > 0).then(|| i - nx), (y + 1 < ny).then(|| i + nx));
            gx.hypot(gy)
        }
    }
}

/// Dirichlet data assembled from electrodes, fibers and the instantaneous bias.
struct Boundary {
    nx: usize,
    ny: usize,
    kind: Vec<u8>,
    values: Vec<f64>,
    geometry_stamp: u64,
}

fn hash_u64(h: Sha256) -> u64 {
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

fn build_boundary(domain: &SimDomain, fibers: &FiberGraph, volts: &Bias) -> Result<Boundary> {
    if fibers.nx() != domain.nx || fibers.ny() != domain.ny {
        return Err(Error::GeometryMismatch(format!(
            "fiber lattice {}x{} vs domain {}x{}",
            fibers.nx(),
            fibers.ny(),
            domain.nx,
            domain.ny
        )));
    }
    let mut driven: Vec<Option<f64>> = vec![None; domain.electrodes.len()];
    for (id, &v) in volts {
        let k = domain.electrode_index(id.as_str())?;
        if !v.is_finite() {
            return Err(Error::Signal(format!("non-finite voltage on `{id}`")));
        }
        driven[k] = Some(v);
    }
    let n = domain.len();
    let is_cond = |i: usize| domain.owner(i).is_some() || fibers.is_occupied(i);
    let mut kind = vec![FREE; n];
    let mut values = vec![0.0; n];
    let mut comp = vec![usize::MAX; n];
    let mut geo = Sha256::new();
    geo.update((domain.nx as u64).to_le_bytes());
    geo.update((domain.ny as u64).to_le_bytes());

    let mut members = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX || !is_cond(start) {
            continue;
        }
        members.clear();
        comp[start] = start;
        members.push(start);
        let mut head = 0;
        while head < members.len() {
            let c = members[head];
            head += 1;
            for j in domain.neighbors(c) {
                if comp[j] == usize::MAX && is_cond(j) {
                    comp[j] = start;
                    members.push(j);
                }
            }
        }
        members.sort_unstable();
        let mut levels: Vec<f64> = Vec::new();
        for &c in &members {
            if let Some(v) = domain.owner(c).and_then(|k| driven[k]) {
                if !levels.contains(&v) {
                    levels.push(v);
                }
            }
        }
        geo.update((members.len() as u64).to_le_bytes());
        for &c in &members {
            geo.update((c as u64).to_le_bytes());
            if let Some(node) = fibers.node(c) {
                geo.update(node.thickness.to_le_bytes());
                geo.update(node.doping.to_le_bytes());
            }
        }
        match levels.len() {
            0 => {
                for &c in &members {
                    kind[c] = INSUL;
                }
            }
            1 => {
                for &c in &members {
                    kind[c] = FIXED;
                    values[c] = levels[0];
                }
            }
            _ => grade_bridged(domain, fibers, &driven, &members, &mut kind, &mut values)?,
        }
    }
    mark_dead(domain.nx, domain.ny, &mut kind, &mut values);
    Ok(Boundary { nx: domain.nx, ny: domain.ny, kind, values, geometry_stamp: hash_u64(geo) })
}

/// Link conductance scale of a cell in a bridged component.
fn cell_conductance(domain: &SimDomain, fibers: &FiberGraph, i: usize, g_max: f64) -> f64 {
    match (domain.owner(i), fibers.node(i)) {
        (None, Some(node)) => (node.doping * node.thickness * node.thickness).max(g_max * 1e-9),
        // floating electrode metal
        _ => g_max * 1e6,
    }
}

/// Potentials along a conductor cluster that touches electrodes at different
/// voltages, from a resistive solve over its cells.
fn grade_bridged(
    domain: &SimDomain,
    fibers: &FiberGraph,
    driven: &[Option<f64>],
    members: &[usize],
    kind: &mut [u8],
    values: &mut [f64],
) -> Result<()> {
    let fixed = |i: usize| domain.owner(i).and_then(|k| driven[k]);
    let g_max = members
        .iter()
        .filter_map(|&i| fibers.node(i))
        .map(|n| n.doping * n.thickness * n.thickness)
        .fold(f64::MIN_POSITIVE, f64::max);
    let mut unknown = BTreeMap::new();
    for &i in members {
        if fixed(i).is_none() {
            let k = unknown.len();
            unknown.insert(i, k);
        }
    }
    let mut m = SymMatrix::<f64>::new(unknown.len());
    let mut rhs = vec![0.0; unknown.len()];
    for (&i, &ki) in &unknown {
        let gi = cell_conductance(domain, fibers, i, g_max);
        for j in domain.neighbors(i) {
            if let Some(vj) = fixed(j) {
                let g = 2.0 * gi;
                m.add_diag(ki, g);
                rhs[ki] += g * vj;
            } else if let Some(&kj) = unknown.get(&j) {
                if j > i {
                    let gj = cell_conductance(domain, fibers, j, g_max);
                    m.stamp(ki, kj, 2.0 * gi * gj / (gi + gj));
                }
            }
        }
    }
    let x = m
        .factor()
        .map_err(|_| Error::Circuit("singular conductor cluster in potential boundary".into()))?
        .solve(&rhs);
    for &i in members {
        kind[i] = FIXED;
        values[i] = match fixed(i) {
            Some(v) => v,
            None => x[unknown[&i]],
        };
    }
    Ok(())
}

/// Electrolyte regions sealed off from every Dirichlet cell carry no field.
fn mark_dead(nx: usize, ny: usize, kind: &mut [u8], values: &mut [f64]) {
    let n = nx * ny;
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    for i in 0..n {
        if kind[i] == FIXED {
            seen[i] = true;
            stack.push(i);
        }
    }
    while let Some(i) = stack.pop() {
        let (x, y) = (i % nx, i / nx);
        let mut visit = |j: usize| {
            if !seen[j] && kind[j] == FREE {
                seen[j] = true;
                stack.push(j);
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < nx {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - nx);
        }
        if y + 1 < ny {
            visit(i + nx);
        }
    }
    for i in 0..n {
        if kind[i] == FREE && !seen[i] {
            kind[i] = DEAD;
            values[i] = 0.0;
        }
    }
}

/// Neighbour validity bits (W, E, S, N) per free cell.
fn neighbor_masks(nx: usize, ny: usize, kind: &[u8]) -> Vec<u8> {
    let mut masks = vec![0u8; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            let i = y * nx + x;
            if kind[i] != FREE {
                continue;
            }
            let good = |j: usize| kind[j] == FREE || kind[j] == FIXED;
            let mut m = 0;
            if x > 0 && good(i - 1) {
                m |= 1;
            }
            if x + 1 < nx && good(i + 1) {
                m |= 2;
            }
            if y > 0 && good(i - nx) {
                m |= 4;
            }
            if y + 1 < ny && good(i + nx) {
                m |= 8;
            }
            masks[i] = m;
        }
    }
    masks
}

#[inline]
fn neighbor_mean(v: &[f64], i: usize, nx: usize, m: u8) -> f64 {
    let mut s = 0.0;
    let mut c = 0u32;
    if m & 1 != 0 {
        s += v[i - 1];
        c += 1;
    }
    if m & 2 != 0 {
        s += v[i + 1];
        c += 1;
    }
    if m & 4 != 0 {
        s += v[i - nx];
        c += 1;
    }
    if m & 8 != 0 {
        s += v[i + nx];
        c += 1;
    }
    s / c as f64
}

fn true_residual(nx: usize, kind: &[u8], masks: &[u8], v: &[f64]) -> f64 {
    let mut r = 0.0f64;
    for i in 0..v.len() {
        if kind[i] == FREE && masks[i] != 0 {
            r = r.max((neighbor_mean(v, i, nx, masks[i]) - v[i]).abs());
        }
    }
    r
}

/// Red–black SOR in place. Returns `(residual, sweeps, converged)`.
///
/// With `error_control`, sweeping continues until the error extrapolated
/// from the contraction rate of successive updates is below `tol` as well.
#[allow(clippy::too_many_arguments)]
fn sor(
    nx: usize,
    ny: usize,
    kind: &[u8],
    v: &mut [f64],
    omega: f64,
    tol: f64,
    cap: usize,
    error_control: bool,
) -> (f64, usize, bool) {
    let masks = neighbor_masks(nx, ny, kind);
    let r0 = true_residual(nx, kind, &masks, v);
    if r0 <= tol && !error_control {
        return (r0, 0, true);
    }
    const WINDOW: usize = 8;
    let mut history = [f64::INFINITY; WINDOW];
    let mut sweeps = 0;
    loop {
        let mut change = 0.0f64;
        for color in 0..2 {
            for y in 0..ny {
                let row = y * nx;
                let mut x = (y + color) % 2;
                while x < nx {
                    let i = row + x;
                    let m = masks[i];
                    if kind[i] == FREE && m != 0 {
                        let d = neighbor_mean(v, i, nx, m) - v[i];
                        change = change.max(d.abs());
                        v[i] += omega * d;
                    }
                    x += 2;
                }
            }
        }
        let oldest = history[sweeps % WINDOW];
        history[sweeps % WINDOW] = change;
        sweeps += 1;
        if change <= tol {
            let settled = !error_control || omega * change <= 1e-4 * tol || {
                let rate = (change / oldest).powf(1.0 / WINDOW as f64);
                rate < 1.0 && omega * change * rate / (1.0 - rate) <= tol
            };
            if settled {
                let r = true_residual(nx, kind, &masks, v);
                if r <= tol {
                    return (r, sweeps, true);
                }
            }
        }
        if sweeps >= cap {
            return (true_residual(nx, kind, &masks, v), sweeps, false);
        }
    }
}

/// SOR restricted to the neighbourhood of cells whose residual exceeds
/// `tol`, so a warm start only pays for the region a geometry change
/// disturbed. Returns the sweeps spent (each counted as a full sweep).
fn relax_locally(nx: usize, ny: usize, kind: &[u8], v: &mut [f64], omega: f64, tol: f64, cap: usize) -> usize {
    const REACH: usize = 10;
    let masks = neighbor_masks(nx, ny, kind);
    let mut hot_rows = vec![false; ny];
    let mut hot = vec![false; nx * ny];
    let mut any = false;
    for y in 0..ny {
        for x in 0..nx {
            let i = y * nx + x;
            if kind[i] == FREE && masks[i] != 0 && (neighbor_mean(v, i, nx, masks[i]) - v[i]).abs() > tol {
                any = true;
                for yy in y.saturating_sub(REACH)..(y + REACH + 1).min(ny) {
                    hot_rows[yy] = true;
                    let row = yy * nx;
                    for xx in x.saturating_sub(REACH)..(x + REACH + 1).min(nx) {
                        hot[row + xx] = true;
                    }
                }
            }
        }
    }
    if !any {
        return 0;
    }
    let cells: Vec<usize> = (0..nx * ny).filter(|&i| hot[i] && kind[i] == FREE && masks[i] != 0).collect();
    let (red, black): (Vec<usize>, Vec<usize>) = cells.iter().partition(|&&i| (i % nx + i / nx) % 2 == 0);
    let frac = cells.len() as f64 / (nx * ny) as f64;
    let mut sweeps = 0;
    while sweeps < cap {
        let mut change = 0.0f64;
        for set in [&red, &black] {
            for &i in set.iter() {
                let d = neighbor_mean(v, i, nx, masks[i]) - v[i];
                change = change.max(d.abs());
                v[i] += omega * d;
            }
        }
        sweeps += 1;
        if change <= tol {
            break;
        }
    }
    (sweeps as f64 * frac).ceil() as usize
}

/// Every electrolyte cell at the mean Dirichlet value.
fn flat_guess(kind: &[u8], fixed: &[f64]) -> Vec<f64> {
    let (mut s, mut c) = (0.0, 0usize);
    for (i, &k) in kind.iter().enumerate() {
        if k == FIXED {
            s += fixed[i];
            c += 1;
        }
    }
    let mean = if c > 0 { s / c as f64 } else { 0.0 };
    kind.iter()
        .zip(fixed)
        .map(|(&k, &f)| if k == FREE { mean } else { f })
        .collect()
}

/// Coarse-lattice guess: solve a 2×-coarsened copy of the boundary and copy
/// each coarse value onto its four children.
fn nested_guess(nx: usize, ny: usize, kind: &[u8], fixed: &[f64], omega: f64, tol: f64) -> Vec<f64> {
    if nx < 32 || ny < 32 {
        return flat_guess(kind, fixed);
    }
    let mut v: Vec<f64> = fixed.to_vec();
    let (cx, cy) = (nx.div_ceil(2), ny.div_ceil(2));
    let mut ck = vec![INSUL; cx * cy];
    let mut cv = vec![0.0; cx * cy];
    for j in 0..cy {
        for i in 0..cx {
            let (mut nf, mut sf, mut any_free, mut any_dead) = (0, 0.0, false, false);
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let (x, y) = (2 * i + dx, 2 * j + dy);
                if x >= nx || y >= ny {
                    continue;
                }
                let f = y * nx + x;
                match kind[f] {
                    FIXED => {
                        nf += 1;
                        sf += fixed[f];
                    }
                    FREE => any_free = true,
                    DEAD => any_dead = true,
                    _ => {}
                }
            }
            let c = j * cx + i;
            if nf > 0 {
                ck[c] = FIXED;
                cv[c] = sf / nf as f64;
            } else if any_free {
                ck[c] = FREE;
            } else if any_dead {
                ck[c] = DEAD;
            }
        }
    }
    mark_dead(cx, cy, &mut ck, &mut cv);
    let mut coarse = nested_guess(cx, cy, &ck, &cv, omega, tol);
    sor(cx, cy, &ck, &mut coarse, omega, tol, 50 * cx.max(cy), false);
    for y in 0..ny {
        for x in 0..nx {
            let f = y * nx + x;
            if kind[f] == FREE {
                v[f] = coarse[(y / 2) * cx + x / 2];
            }
        }
    }
    v
}

/// Solves Laplace's equation with conductor cells as Dirichlet data and the
/// rim plus floating conductors as insulating boundaries.
pub fn solve_potential(domain: &SimDomain, fibers: &FiberGraph, volts: &Bias, tol: f64) -> Result<PotentialField> {
    solve_with(domain, fibers, volts, &SolveOptions::tol(tol), None)
}

/// As [`solve_potential`], optionally warm-started from a previous solution
/// on the same lattice.
pub fn solve_with(
    domain: &SimDomain,
    fibers: &FiberGraph,
    volts: &Bias,
    opts: &SolveOptions,
    guess: Option<&[f64]>,
) -> Result<PotentialField> {
    if !(opts.tol > 0.0) {
        return Err(Error::Domain("solver tolerance must be positive".into()));
    }
    let b = build_boundary(domain, fibers, volts)?;
    let (nx, ny) = (b.nx, b.ny);
    let mut v = match guess {
        Some(g) if g.len() == nx * ny => {
            let mut v = g.to_vec();
            for i in 0..v.len() {
                if b.kind[i] != FREE {
                    v[i] = b.values[i];
                }
            }
            v
        }
        _ if opts.nested_start => nested_guess(nx, ny, &b.kind, &b.values, opts.omega, opts.tol),
        _ => flat_guess(&b.kind, &b.values),
    };
    let cap = opts.max_iter.unwrap_or(50 * nx.max(ny));
    let mut local = 0;
    if guess.is_some() {
        local = relax_locally(nx, ny, &b.kind, &mut v, opts.omega, opts.tol, cap / 4);
    }
    let (residual, iterations, ok) = sor(nx, ny, &b.kind, &mut v, opts.omega, opts.tol, cap, opts.error_control);
    let iterations = iterations + local;
    if !ok {
        return Err(Error::NonConvergence { residual, iterations });
    }
    let mut stamp = Sha256::new();
    stamp.update(b.geometry_stamp.to_le_bytes());
    for i in 0..v.len() {
        if b.kind[i] == FIXED {
            stamp.update(v[i].to_le_bytes());
        }
    }
    Ok(PotentialField {
        nx,
        ny,
        cell_size: domain.cell_size,
        values: v,
        residual,
        iterations,
        boundary_stamp: hash_u64(stamp),
        geometry_stamp: b.geometry_stamp,
        kind: b.kind,
    })
}

/// Cellwise check that `combined ≈ α·p1 + β·p2` within `tol`.
pub fn superposes(
    p1: &PotentialField,
    p2: &PotentialField,
    combined: &PotentialField,
    alpha: f64,
    beta: f64,
    tol: f64,
) -> Result<bool> {
    if p1.geometry_stamp != p2.geometry_stamp || p1.geometry_stamp != combined.geometry_stamp {
        return Err(Error::GeometryMismatch("fields were solved on different conductor layouts".into()));
    }
    Ok(p1
        .values
        .iter()
        .zip(&p2.values)
        .zip(&combined.values)
        .all(|((a, b), c)| (alpha * a + beta * b - c).abs() <= tol))
}

/// Solves for `v1`, `v2` and `α·v1 + β·v2` and checks superposition within
/// 10·tol. Both biases must drive the same electrode set.
pub fn linearity_check(
    domain: &SimDomain,
    fibers: &FiberGraph,
    v1: &Bias,
    v2: &Bias,
    alpha: f64,
    beta: f64,
    tol: f64,
) -> Result<bool> {
    if v1.keys().ne(v2.keys()) {
        return Err(Error::GeometryMismatch("biases drive different electrode sets".into()));
    }
    let mix: Bias = v1.iter().map(|(k, a)| (k.clone(), alpha * a + beta * v2[k])).collect();
    let opts = SolveOptions { error_control: true, ..SolveOptions::tol(tol) };
    let p1 = solve_with(domain, fibers, v1, &opts, None)?;
    let p2 = solve_with(domain, fibers, v2, &opts, None)?;
    let p12 = solve_with(domain, fibers, &mix, &opts, None)?;
    superposes(&p1, &p2, &p12, alpha, beta, 10.0 * tol)
}
