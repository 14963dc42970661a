//! RC netlists extracted from fiber networks, and their nodal solution.
//!
//! Terminal voltages are imposed by eliminating the terminal nodes, so the
//! reduced systems stay symmetric and the sparse LDLᵀ applies to both the
//! DC (real) and AC (complex symmetric) cases.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ElectrodeId, Role, SimDomain};
use crate::growth::{exposed_faces, FiberGraph};
use crate::sparse::{Scalar, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Doped fiber resistivity, Ω·µm.
    pub rho_fiber: f64,
    /// Areal capacitance of exposed fiber surface, F/µm².
    pub c_s: f64,
    pub r_gate: f64,
    pub c_gate: f64,
    /// Two-terminal resistance of the electrolyte alone, Ω.
    pub r_sol: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        CircuitParams { rho_fiber: 11950.0, c_s: 2.95e-10, r_gate: 1.0e4, c_gate: 1.0e-6, r_sol: 5.0e7 }
    }
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.rho_fiber, self.c_s, self.r_gate, self.c_gate, self.r_sol];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::Circuit("circuit parameters must be positive".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Channel,
    Access,
    Gate,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub a: usize,
    pub b: usize,
    /// Siemens for resistors, farads for capacitors.
    pub value: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub nodes: Vec<String>,
    pub resistors: Vec<Element>,
    pub capacitors: Vec<Element>,
    pub terminals: BTreeMap<ElectrodeId, usize>,
    /// First input and first output electrode, the default measurement port.
    pub port: Option<(ElectrodeId, ElectrodeId)>,
    /// Lattice cell of each fiber node, by node index.
    pub fiber_cells: BTreeMap<usize, usize>,
}

impl Netlist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> usize {
        self.nodes.push(name.into());
        self.nodes.len() - 1
    }

    pub fn add_terminal(&mut self, id: impl Into<ElectrodeId>) -> usize {
        let id = id.into();
        let n = self.add_node(format!("T_{id}"));
        self.terminals.insert(id, n);
        n
    }

    /// Resistor given by its conductance; non-positive values are skipped.
    pub fn add_conductance(&mut self, a: usize, b: usize, g: f64, branch: Branch) {
        if g > 0.0 && a != b {
            self.resistors.push(Element { a, b, value: g, branch });
        }
    }

    pub fn add_capacitor(&mut self, a: usize, b: usize, c: f64, branch: Branch) {
        if c > 0.0 && a != b {
            self.capacitors.push(Element { a, b, value: c, branch });
        }
    }

    pub fn terminal(&self, id: &str) -> Result<usize> {
        self.terminals
            .iter()
            .find(|(k, _)| k.as_str() == id)
            .map(|(_, &n)| n)
            .ok_or_else(|| Error::UnknownElectrode(id.to_string()))
    }

    fn port_ids(&self) -> Result<(ElectrodeId, ElectrodeId)> {
        self.port.clone().ok_or_else(|| Error::Circuit("netlist has no input/output port".into()))
    }

    /// SPICE-style card deck.
    pub fn to_spice(&self, title: &str) -> String {
        let mut s = format!("* {title}\n");
        for (id, n) in &self.terminals {
            let _ = writeln!(s, "* terminal {id} = n{n}");
        }
        for (k, r) in self.resistors.iter().enumerate() {
            let _ = writeln!(s, "R{} n{} n{} {:.6e}", k + 1, r.a, r.b, 1.0 / r.value);
        }
        for (k, c) in self.capacitors.iter().enumerate() {
            let _ = writeln!(s, "C{} n{} n{} {:.6e}", k + 1, c.a, c.b, c.value);
        }
        s.push_str(".end\n");
        s
    }
}

/// Conductance of one fiber cell along its length, S.
fn cell_conductance(doping: f64, thickness: f64, rho: f64, h: f64) -> f64 {
    doping * thickness * thickness / (rho * h)
}

/// Builds the channel network over fiber cells, the electrolyte access
/// resistors and the gate branch.
pub fn extract_netlist(fibers: &FiberGraph, domain: &SimDomain, params: &CircuitParams) -> Result<Netlist> {
    params.validate()?;
    let h = domain.cell_size;
    let mut net = Netlist::new();
    let sol = net.add_node("solution");
    for e in &domain.electrodes {
        let t = net.add_terminal(e.id.clone());
        match e.role {
            Role::Gate => {
                let m = net.add_node(format!("G_{}", e.id));
                net.add_conductance(t, m, 1.0 / params.r_gate, Branch::Gate);
                net.add_capacitor(m, sol, params.c_gate, Branch::Gate);
            }
            _ => net.add_conductance(t, sol, 2.0 / params.r_sol, Branch::Access),
        }
    }
    if !domain.electrodes.iter().any(|e| e.role == Role::Gate) {
        let t = net.add_node("gate_ref");
        let m = net.add_node("G_ref");
        net.add_conductance(t, m, 1.0 / params.r_gate, Branch::Gate);
        net.add_capacitor(m, sol, params.c_gate, Branch::Gate);
    }
    let first = |role| domain.electrodes.iter().find(|e| e.role == role).map(|e| e.id.clone());
    net.port = first(Role::Input).zip(first(Role::Output));

    let mut cells: Vec<usize> = fibers.nodes().iter().map(|n| n.cell).collect();
    cells.sort_unstable();
    let mut node_of = BTreeMap::new();
    for &c in &cells {
        let (x, y) = domain.coords(c);
        let n = net.add_node(format!("F_{x}_{y}"));
        node_of.insert(c, n);
        net.fiber_cells.insert(n, c);
    }
    for &c in &cells {
        let fc = fibers.node(c).expect("listed");
        let gc = cell_conductance(fc.doping, fc.thickness, params.rho_fiber, h);
        let nc = node_of[&c];
        let surface = h * exposed_faces(fibers, domain, c) as f64 * fc.thickness;
        net.add_capacitor(nc, sol, params.c_s * surface, Branch::Channel);
        for j in domain.neighbors(c) {
            if let Some(k) = domain.owner(j) {
                let t = net.terminals[&domain.electrodes[k].id];
                net.add_conductance(nc, t, 2.0 * gc, Branch::Channel);
            } else if j > c {
                if let Some(fj) = fibers.node(j) {
                    let gj = cell_conductance(fj.doping, fj.thickness, params.rho_fiber, h);
                    if gc > 0.0 && gj > 0.0 {
                        net.add_conductance(nc, node_of[&j], 2.0 * gc * gj / (gc + gj), Branch::Channel);
                    }
                }
            }
        }
    }
    Ok(net)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcSolution {
    pub voltages: Vec<f64>,
    /// Current flowing from each source terminal into the network, A.
    pub currents: BTreeMap<ElectrodeId, f64>,
}

/// Union-find over the elements accepted by `keep`.
fn components(n: usize, elems: &[&Element]) -> Vec<usize> {
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut p: Vec<usize> = (0..n).collect();
    for e in elems {
        let (a, b) = (find(&mut p, e.a), find(&mut p, e.b));
        if a != b {
            p[a.max(b)] = a.min(b);
        }
    }
    (0..n).map(|i| find(&mut p, i)).collect()
}

/// Nodal solve with the given nodes held at fixed values. Nodes in
/// components without any fixed node are returned as zero.
fn nodal<T: Scalar>(n: usize, admittances: &[(usize, usize, T)], fixed: &BTreeMap<usize, T>) -> Result<Vec<T>> {
    let mut x = vec![T::zero(); n];
    for (&k, &v) in fixed {
        x[k] = v;
    }
    let elems: Vec<Element> =
        admittances.iter().map(|&(a, b, _)| Element { a, b, value: 1.0, branch: Branch::Other }).collect();
    let refs: Vec<&Element> = elems.iter().collect();
    let comp = components(n, &refs);
    let mut anchored = vec![false; n];
    for &k in fixed.keys() {
        anchored[comp[k]] = true;
    }
    let mut index = vec![usize::MAX; n];
    let mut unknowns = 0;
    for i in 0..n {
        if !fixed.contains_key(&i) && anchored[comp[i]] {
            index[i] = unknowns;
            unknowns += 1;
        }
    }
    let mut m = SymMatrix::<T>::new(unknowns);
    let mut rhs = vec![T::zero(); unknowns];
    for &(a, b, y) in admittances {
        match (index[a], index[b]) {
            (usize::MAX, usize::MAX) => {}
            (ia, usize::MAX) => {
                m.add_diag(ia, y);
                if let Some(&v) = fixed.get(&b) {
                    rhs[ia] = rhs[ia] + y * v;
                }
            }
            (usize::MAX, ib) => {
                m.add_diag(ib, y);
                if let Some(&v) = fixed.get(&a) {
                    rhs[ib] = rhs[ib] + y * v;
                }
            }
            (ia, ib) => m.stamp(ia, ib, y),
        }
    }
    let f = m.factor().map_err(|_| Error::Circuit("singular nodal system".into()))?;
    let sol = f.solve(&rhs);
    for i in 0..n {
        if index[i] != usize::MAX {
            x[i] = sol[index[i]];
        }
    }
    Ok(x)
}

fn check_sources(net: &Netlist, sources: &BTreeMap<ElectrodeId, f64>) -> Result<BTreeMap<usize, f64>> {
    let mut fixed = BTreeMap::new();
    for (id, &v) in sources {
        fixed.insert(net.terminal(id.as_str())?, v);
    }
    if !sources.values().any(|&v| v == 0.0) {
        return Err(Error::Circuit("no grounded terminal among the sources".into()));
    }
    let refs: Vec<&Element> = net.resistors.iter().collect();
    let comp = components(net.nodes.len(), &refs);
    for (id, v) in sources {
        let c = comp[net.terminal(id.as_str())?];
        let grounded = sources
            .iter()
            .any(|(o, &ov)| ov == 0.0 && comp[net.terminals[o]] == c);
        if !grounded && *v != 0.0 {
            return Err(Error::DisconnectedTerminal(id.to_string()));
        }
    }
    Ok(fixed)
}

/// DC operating point with terminal voltages imposed; other terminals float.
pub fn solve_dc(net: &Netlist, sources: &BTreeMap<ElectrodeId, f64>) -> Result<DcSolution> {
    let fixed = check_sources(net, sources)?;
    let adm: Vec<(usize, usize, f64)> = net.resistors.iter().map(|r| (r.a, r.b, r.value)).collect();
    let v = nodal(net.nodes.len(), &adm, &fixed)?;
    let mut flow = vec![0.0; net.nodes.len()];
    for r in &net.resistors {
        let i = r.value * (v[r.a] - v[r.b]);
        flow[r.a] += i;
        flow[r.b] -= i;
    }
    let currents = sources.keys().map(|id| (id.clone(), flow[net.terminals[id]])).collect();
    Ok(DcSolution { voltages: v, currents })
}

/// KCL imbalance at every non-source node of a DC solution.
pub fn kcl_residual(net: &Netlist, sol: &DcSolution) -> f64 {
    let mut flow = vec![0.0; net.nodes.len()];
    for r in &net.resistors {
        let i = r.value * (sol.voltages[r.a] - sol.voltages[r.b]);
        flow[r.a] += i;
        flow[r.b] -= i;
    }
    let sources: Vec<usize> = sol.currents.keys().map(|k| net.terminals[k]).collect();
    (0..flow.len()).filter(|i| !sources.contains(i)).map(|i| flow[i].abs()).fold(0.0, f64::max)
}

/// Sum of fiber-cell capacitances, F.
pub fn network_capacitance(net: &Netlist) -> f64 {
    net.capacitors.iter().filter(|c| c.branch == Branch::Channel).map(|c| c.value).sum()
}

/// Small-signal impedance between `a` and `b` at angular frequency `omega`,
/// with every other terminal floating.
pub fn impedance_between(net: &Netlist, a: &str, b: &str, omega: f64) -> Result<Complex64> {
    if !(omega >= 0.0) {
        return Err(Error::Circuit("omega must be non-negative".into()));
    }
    let (ta, tb) = (net.terminal(a)?, net.terminal(b)?);
    let j = Complex64::new(0.0, omega);
    let mut adm: Vec<(usize, usize, Complex64)> =
        net.resistors.iter().map(|r| (r.a, r.b, Complex64::from_f64(r.value))).collect();
    if omega > 0.0 {
        adm.extend(net.capacitors.iter().map(|c| (c.a, c.b, j * c.value)));
    }
    // Drive 1 V at `a` against grounded `b` and read the current.
    let fixed = BTreeMap::from([(ta, Complex64::from_f64(1.0)), (tb, Complex64::zero())]);
    let v = nodal(net.nodes.len(), &adm, &fixed)?;
    let mut i = Complex64::zero();
    for &(p, q, y) in &adm {
        if p == ta {
            i += y * (v[p] - v[q]);
        } else if q == ta {
            i += y * (v[q] - v[p]);
        }
    }
    if i.norm() == 0.0 {
        return Err(Error::DisconnectedTerminal(a.to_string()));
    }
    Ok(Complex64::from_f64(1.0) / i)
}

/// Impedance across the netlist's input/output port.
pub fn impedance(net: &Netlist, omega: f64) -> Result<Complex64> {
    let (a, b) = net.port_ids()?;
    impedance_between(net, a.as_str(), b.as_str(), omega)
}

/// DC conductance between two terminals counting only channel resistors.
pub fn channel_conductance(net: &Netlist, a: &str, b: &str) -> Result<f64> {
    let (ta, tb) = (net.terminal(a)?, net.terminal(b)?);
    let channel: Vec<&Element> = net.resistors.iter().filter(|r| r.branch == Branch::Channel).collect();
    let comp = components(net.nodes.len(), &channel);
    if comp[ta] != comp[tb] {
        return Ok(0.0);
    }
    let adm: Vec<(usize, usize, f64)> = channel.iter().map(|r| (r.a, r.b, r.value)).collect();
    let fixed = BTreeMap::from([(ta, 1.0), (tb, 0.0)]);
    let v = nodal(net.nodes.len(), &adm, &fixed)?;
    Ok(adm
        .iter()
        .map(|&(p, q, g)| if p == ta { g * (v[p] - v[q]) } else if q == ta { g * (v[q] - v[p]) } else { 0.0 })
        .sum())
}

/// Two-terminal DC conductance across the port, electrolyte included.
pub fn port_conductance(net: &Netlist) -> Result<f64> {
    let (a, b) = net.port_ids()?;
    let src = BTreeMap::from([(a.clone(), 1.0), (b, 0.0)]);
    Ok(solve_dc(net, &src)?.currents[&a])
}

/// τ = R·C of the channel: port resistance through fibers alone times the
/// total fiber capacitance. Zero for a channel that does not bridge.
pub fn charging_time(net: &Netlist) -> Result<f64> {
    let (a, b) = net.port_ids()?;
    let g = channel_conductance(net, a.as_str(), b.as_str())?;
    if g <= 0.0 {
        return Ok(0.0);
    }
    Ok(network_capacitance(net) / g)
}

/// Port current at each voltage, port output grounded.
pub fn iv_curve(net: &Netlist, v_range: &[f64]) -> Result<Vec<(f64, f64)>> {
    let (a, b) = net.port_ids()?;
    if v_range.iter().any(|v| !v.is_finite()) {
        return Err(Error::Circuit("non-finite voltage in sweep".into()));
    }
    v_range
        .iter()
        .map(|&v| {
            let src = BTreeMap::from([(a.clone(), v), (b.clone(), 0.0)]);
            Ok((v, solve_dc(net, &src)?.currents[&a]))
        })
        .collect()
}

/// Least-squares slope through the origin of an IV series.
pub fn origin_slope(iv: &[(f64, f64)]) -> f64 {
    let (sxy, sxx) = iv.iter().fold((0.0, 0.0), |(a, b), &(v, i)| (a + v * i, b + v * v));
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Electrode;

    fn src(pairs: &[(&str, f64)]) -> BTreeMap<ElectrodeId, f64> {
        pairs.iter().map(|&(k, v)| (ElectrodeId::from(k), v)).collect()
    }

    #[test]
    fn divider() {
        let mut n = Netlist::new();
        let a = n.add_terminal("a");
        let m = n.add_node("m");
        let b = n.add_terminal("b");
        n.add_conductance(a, m, 1.0, Branch::Other);
        n.add_conductance(m, b, 1.0, Branch::Other);
        let s = solve_dc(&n, &src(&[("a", 1.0), ("b", 0.0)])).unwrap();
        assert!((s.voltages[m] - 0.5).abs() < 1e-15);
        assert!((s.currents[&ElectrodeId::from("a")] - 0.5).abs() < 1e-15);
        assert!((s.currents.values().sum::<f64>()).abs() < 1e-15);
        let z = solve_dc(&n, &src(&[("a", 0.0), ("b", 0.0)])).unwrap();
        assert!(z.currents.values().all(|&i| i == 0.0));
    }

    #[test]
    fn rc_impedances() {
        let mut n = Netlist::new();
        let a = n.add_terminal("a");
        let b = n.add_terminal("b");
        n.add_conductance(a, b, 1e-3, Branch::Other);
        for w in [0.0, 10.0, 1e6] {
            let z = impedance_between(&n, "a", "b", w).unwrap();
            assert!((z - Complex64::new(1000.0, 0.0)).norm() < 1e-9);
        }
        let mut s = Netlist::new();
        let a = s.add_terminal("a");
        let m = s.add_node("m");
        let b = s.add_terminal("b");
        s.add_conductance(a, m, 1e-3, Branch::Other);
        s.add_capacitor(m, b, 1e-6, Branch::Other);
        let z = impedance_between(&s, "a", "b", 1000.0).unwrap();
        assert!((z - Complex64::new(1000.0, -1000.0)).norm() < 1e-6, "{z}");
    }

    fn bar_domain() -> SimDomain {
        SimDomain::new(
            32,
            32,
            4.0,
            vec![
                Electrode::rect("in", Role::Input, 2, 4, 3, 27),
                Electrode::rect("out", Role::Output, 14, 4, 15, 27),
            ],
        )
        .unwrap()
    }

    fn straight(d: &SimDomain, g: &mut FiberGraph, y: usize) {
        for x in 4..14 {
            g.add_fixture(d, (x, y), "in", 1.0).unwrap();
        }
    }

    #[test]
    fn series_and_parallel_fibers() {
        let d = bar_domain();
        let p = CircuitParams::default();
        let per_link = cell_conductance(1.0, 1.0, p.rho_fiber, d.cell_size);
        let mut g = FiberGraph::for_domain(&d);
        straight(&d, &mut g, 10);
        let net = extract_netlist(&g, &d, &p).unwrap();
        let one = channel_conductance(&net, "in", "out").unwrap();
        assert!((one - per_link / 10.0).abs() < 1e-12 * per_link);
        straight(&d, &mut g, 20);
        let two = channel_conductance(&extract_netlist(&g, &d, &p).unwrap(), "in", "out").unwrap();
        assert!((two - 2.0 * one).abs() < 1e-12 * one);
        // full port conductance adds the electrolyte in parallel
        let net2 = extract_netlist(&g, &d, &p).unwrap();
        let total = port_conductance(&net2).unwrap();
        assert!((total - two - 1.0 / p.r_sol).abs() < 1e-9 * total);
    }

    #[test]
    fn dedoped_channel_leaves_solution_branch() {
        let d = bar_domain();
        let p = CircuitParams::default();
        let mut g = FiberGraph::for_domain(&d);
        straight(&d, &mut g, 10);
        g.set_uniform_doping(0.0);
        let net = extract_netlist(&g, &d, &p).unwrap();
        assert!((port_conductance(&net).unwrap() - 1.0 / p.r_sol).abs() < 1e-9 / p.r_sol);
        assert_eq!(charging_time(&net).unwrap(), 0.0);
        let empty = extract_netlist(&FiberGraph::for_domain(&d), &d, &p).unwrap();
        assert_eq!(network_capacitance(&empty), 0.0);
        assert_eq!(charging_time(&empty).unwrap(), 0.0);
    }

    #[test]
    fn capacitance_tracks_surface() {
        let d = bar_domain();
        let p = CircuitParams::default();
        let mut g = FiberGraph::for_domain(&d);
        g.add_fixture(&d, (8, 30), "in", 1.5).unwrap();
        let c = network_capacitance(&extract_netlist(&g, &d, &p).unwrap());
        assert!((c - p.c_s * 4.0 * 4.0 * 1.5).abs() < 1e-24);
        straight(&d, &mut g, 10);
        let s = crate::growth::branch_statistics(&g, &d).total_surface;
        let c = network_capacitance(&extract_netlist(&g, &d, &p).unwrap());
        assert!((c - p.c_s * s).abs() < 1e-12 * c);
    }

    #[test]
    fn charging_time_arithmetic() {
        let mut n = Netlist::new();
        let a = n.add_terminal("a");
        let m = n.add_node("m");
        let b = n.add_terminal("b");
        n.port = Some(("a".into(), "b".into()));
        n.add_conductance(a, m, 2e-4, Branch::Channel);
        n.add_conductance(m, b, 2e-4, Branch::Channel);
        n.add_capacitor(m, a, 0.1e-6, Branch::Channel);
        assert!((charging_time(&n).unwrap() - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn iv_slope_and_doping() {
        let d = bar_domain();
        let p = CircuitParams { r_sol: 1e15, ..Default::default() };
        let mut g = FiberGraph::for_domain(&d);
        straight(&d, &mut g, 10);
        let vs = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let iv = iv_curve(&extract_netlist(&g, &d, &p).unwrap(), &vs).unwrap();
        let k = origin_slope(&iv);
        assert!(iv.iter().all(|&(v, i)| (i - k * v).abs() < 1e-18));
        g.set_uniform_doping(0.5);
        let half = origin_slope(&iv_curve(&extract_netlist(&g, &d, &p).unwrap(), &vs).unwrap());
        assert!((half - 0.5 * k).abs() < 1e-6 * k);
    }

    #[test]
    fn missing_ground_and_disconnected_terminal() {
        let mut n = Netlist::new();
        let a = n.add_terminal("a");
        let b = n.add_terminal("b");
        let c = n.add_terminal("c");
        n.add_conductance(a, b, 1.0, Branch::Other);
        let _ = c;
        assert!(matches!(solve_dc(&n, &src(&[("a", 1.0), ("b", 2.0)])), Err(Error::Circuit(_))));
        match solve_dc(&n, &src(&[("a", 0.0), ("c", 1.0)])) {
            Err(Error::DisconnectedTerminal(t)) => assert_eq!(t, "c"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn impedance_monotone_for_parallel_rc() {
        let mut n = Netlist::new();
        let a = n.add_terminal("a");
        let b = n.add_terminal("b");
        n.add_conductance(a, b, 1e-3, Branch::Other);
        n.add_capacitor(a, b, 1e-6, Branch::Other);
        let mut last = f64::INFINITY;
        for k in 0..60 {
            let w = 10f64.powf(k as f64 / 10.0);
            let z = impedance_between(&n, "a", "b", w).unwrap().norm();
            assert!(z <= last * (1.0 + 1e-12));
            last = z;
        }
    }

    #[test]
    fn spice_export_lists_cards() {
        let d = bar_domain();
        let mut g = FiberGraph::for_domain(&d);
        straight(&d, &mut g, 10);
        let net = extract_netlist(&g, &d, &CircuitParams::default()).unwrap();
        let deck = net.to_spice("bar");
        assert_eq!(deck.lines().filter(|l| l.starts_with('R')).count(), net.resistors.len());
        assert_eq!(deck.lines().filter(|l| l.starts_with('C')).count(), net.capacitors.len());
        assert!(deck.contains("* terminal in = n"));
    }
}
