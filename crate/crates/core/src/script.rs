//! Text form of an [`ExperimentScript`]: `[section]` headers over
//! `key = value` lines, `#` comments on their own line.
//!
//! ```text
//! [experiment]
//! name = pavlov
//! protocol = pavlov
//! seeds = 1-32
//!
//! [domain]
//! layout = pavlov
//!
//! [phase paired]
//! mode = grow
//! duration_s = 3
//! stimulus.bell = {kind=square_ac, amplitude_V=2, frequency_Hz=50}
//!
//! [criteria]
//! min_response_ratio_test >= 10
//! ```
//!
//! Keys absent from a section take their defaults; unknown keys are errors.
//! A `layout` supplies the lattice and electrodes, which explicit `nx`, `ny`,
//! `cell_size_um` and `[electrode id]` sections replace.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::circuit::CircuitParams;
use crate::error::Diagnostic;
use crate::field::{Electrode, ElectrodeId, Role, SimDomain};
use crate::growth::GrowthParams;
use crate::plasticity::Retention;
use crate::protocols::{
    Cmp, Criterion, ExperimentScript, Fixture, Format, Layout, Mode, Phase, Protocol, ProtocolOptions,
};
use crate::signals::{StimulusSet, WaveKind, Waveform};

type Parse<T> = std::result::Result<T, Diagnostic>;

struct Entry {
    key: String,
    value: String,
    line: usize,
}

struct Section {
    kind: String,
    name: Option<String>,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn label(&self) -> String {
        match &self.name {
            Some(n) => format!("{} {n}", self.kind),
            None => self.kind.clone(),
        }
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'-' || c == b'.')
}

fn tokenize(text: &str) -> Parse<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        if let Some(h) = s.strip_prefix('[') {
            let Some(h) = h.strip_suffix(']') else {
                return Err(Diagnostic::new(line, h.trim(), "", "unterminated section header"));
            };
            let mut parts = h.split_whitespace();
            let kind = parts.next().unwrap_or("").to_string();
            let name = parts.next().map(str::to_string);
            if parts.next().is_some() {
                return Err(Diagnostic::new(line, h.trim(), "", "section header takes at most one name"));
            }
            let named = matches!(kind.as_str(), "electrode" | "phase");
            let known = named || matches!(
                kind.as_str(),
                "experiment" | "domain" | "fixture" | "growth" | "circuit" | "retention" | "options" | "criteria"
            );
            if !known {
                return Err(Diagnostic::new(line, h.trim(), "", format!("unknown section `{kind}`")));
            }
            match (&name, named) {
                (None, true) => return Err(Diagnostic::new(line, kind, "", "section needs a name")),
                (Some(_), false) => return Err(Diagnostic::new(line, kind, "", "section takes no name")),
                (Some(n), true) if !is_ident(n) => {
                    return Err(Diagnostic::new(line, h.trim(), "", format!("invalid name `{n}`")))
                }
                _ => {}
            }
            let sec = Section { kind, name, line, entries: Vec::new() };
            if sec.kind != "fixture" && out.iter().any(|o| o.kind == sec.kind && o.name == sec.name) {
                return Err(Diagnostic::new(line, sec.label(), "", "duplicate section"));
            }
            out.push(sec);
            continue;
        }
        let Some(sec) = out.last_mut() else {
            return Err(Diagnostic::new(line, "(top)", "", "line outside any section"));
        };
        if sec.kind == "criteria" {
            sec.entries.push(Entry { key: String::new(), value: s.to_string(), line });
            continue;
        }
        let Some((key, value)) = s.split_once('=') else {
            return Err(Diagnostic::new(line, sec.label(), "", format!("expected `key = value`, got `{s}`")));
        };
        let key = key.trim();
        if !is_ident(key) {
            return Err(Diagnostic::new(line, sec.label(), key, "invalid key"));
        }
        if sec.entries.iter().any(|e| e.key == key) {
            return Err(Diagnostic::new(line, sec.label(), key, "duplicate key"));
        }
        sec.entries.push(Entry { key: key.to_string(), value: value.trim().to_string(), line });
    }
    Ok(out)
}

/// Typed access to one section's entries; [`Fields::finish`] rejects any
/// entry nobody asked for.
struct Fields<'a> {
    sec: &'a Section,
    used: Vec<bool>,
}

impl<'a> Fields<'a> {
    fn new(sec: &'a Section) -> Self {
        Fields { sec, used: vec![false; sec.entries.len()] }
    }

    fn err(&self, line: usize, field: &str, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::new(line, self.sec.label(), field, msg)
    }

    fn raw(&mut self, key: &str) -> Option<&'a Entry> {
        let k = self.sec.entries.iter().position(|e| e.key == key)?;
        self.used[k] = true;
        Some(&self.sec.entries[k])
    }

    fn parsed<T>(&mut self, key: &str, f: impl Fn(&str) -> Option<T>, what: &str) -> Parse<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => f(&e.value).map(Some).ok_or_else(|| self.err(e.line, key, format!("expected {what}, got `{}`", e.value))),
        }
    }

    fn f64(&mut self, key: &str, into: &mut f64) -> Parse<()> {
        if let Some(v) = self.parsed(key, parse_f64, "a number")? {
            *into = v;
        }
        Ok(())
    }

    fn u64(&mut self, key: &str, into: &mut u64) -> Parse<()> {
        if let Some(v) = self.parsed(key, |s| s.parse().ok(), "a non-negative integer")? {
            *into = v;
        }
        Ok(())
    }

    fn usize(&mut self, key: &str, into: &mut usize) -> Parse<()> {
        if let Some(v) = self.parsed(key, |s| s.parse().ok(), "a non-negative integer")? {
            *into = v;
        }
        Ok(())
    }

    fn bool(&mut self, key: &str, into: &mut bool) -> Parse<()> {
        let p = |s: &str| match s {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        };
        if let Some(v) = self.parsed(key, p, "true or false")? {
            *into = v;
        }
        Ok(())
    }

    fn ident(&mut self, key: &str, into: &mut String) -> Parse<()> {
        if let Some(v) = self.parsed(key, |s| is_ident(s).then(|| s.to_string()), "a name")? {
            *into = v;
        }
        Ok(())
    }

    fn f64s(&mut self, key: &str, into: &mut Vec<f64>) -> Parse<()> {
        if let Some(v) = self.parsed(key, |s| list(s).map(parse_f64).collect(), "a comma-separated number list")? {
            *into = v;
        }
        Ok(())
    }

    fn idents(&mut self, key: &str, into: &mut Vec<String>) -> Parse<()> {
        let p = |s: &str| list(s).map(|x| is_ident(x).then(|| x.to_string())).collect();
        if let Some(v) = self.parsed(key, p, "a comma-separated name list")? {
            *into = v;
        }
        Ok(())
    }

    fn required<T>(&self, v: Option<T>, key: &str) -> Parse<T> {
        v.ok_or_else(|| self.err(self.sec.line, key, "missing required key"))
    }

    fn line_of(&self, key: &str) -> usize {
        self.sec.entries.iter().find(|e| e.key == key).map_or(self.sec.line, |e| e.line)
    }

    fn finish(self) -> Parse<()> {
        match self.used.iter().position(|u| !u) {
            Some(k) => {
                let e = &self.sec.entries[k];
                Err(self.err(e.line, &e.key, "unknown key"))
            }
            None => Ok(()),
        }
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse().ok()
}

fn list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

fn parse_pair(s: &str) -> Option<(usize, usize)> {
    let v: Vec<usize> = list(s).map(|x| x.parse().ok()).collect::<Option<_>>()?;
    (v.len() == 2).then(|| (v[0], v[1]))
}

/// `1-4, 9` style seed lists; ranges are inclusive.
fn parse_seeds(s: &str) -> Option<Vec<u64>> {
    let mut out = Vec::new();
    for part in list(s) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
                if b < a {
                    return None;
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().ok()?),
        }
    }
    Some(out)
}

fn parse_waveform(s: &str) -> std::result::Result<Waveform, String> {
    let inner = s
        .strip_prefix('{')
        .and_then(|x| x.strip_suffix('}'))
        .ok_or_else(|| "expected `{kind=..., amplitude_V=..., ...}`".to_string())?;
    let mut w = Waveform::dc(0.0);
    let mut kind = None;
    let mut amplitude = None;
    let mut seen = BTreeSet::new();
    for part in list(inner) {
        let (k, v) = part.split_once('=').ok_or_else(|| format!("expected `key=value`, got `{part}`"))?;
        let (k, v) = (k.trim(), v.trim());
        if !seen.insert(k.to_string()) {
            return Err(format!("duplicate waveform key `{k}`"));
        }
        let num = || parse_f64(v).ok_or_else(|| format!("{k}: expected a number, got `{v}`"));
        match k {
            "kind" => kind = Some(WaveKind::parse(v).ok_or_else(|| format!("unknown waveform kind `{v}`"))?),
            "amplitude_V" => amplitude = Some(num()?),
            "frequency_Hz" => w.frequency = num()?,
            "offset_s" => w.phase_offset = num()?,
            "width_s" => w.pulse_width = num()?,
            "baseline_V" => w.baseline = num()?,
            _ => return Err(format!("unknown waveform key `{k}`")),
        }
    }
    w.kind = kind.ok_or("waveform needs `kind`")?;
    w.amplitude = amplitude.ok_or("waveform needs `amplitude_V`")?;
    Ok(w)
}

/// Parses and validates a script. Every failure carries the line, section
/// and key it concerns.
pub fn parse_script(text: &str) -> Parse<ExperimentScript> {
    let sections = tokenize(text)?;
    let find = |kind: &str| sections.iter().find(|s| s.kind == kind);

    let exp = find("experiment").ok_or_else(|| Diagnostic::new(1, "experiment", "", "missing [experiment] section"))?;
    let mut f = Fields::new(exp);
    let name = f.raw("name").map(|e| e.value.clone());
    let name = f.required(name, "name")?;
    let protocol = f.parsed("protocol", Protocol::parse, "a protocol name")?;
    let protocol = f.required(protocol, "protocol")?;
    let seeds = f.parsed("seeds", parse_seeds, "seeds such as `1-8, 12`")?;
    let seeds = f.required(seeds, "seeds")?;
    let outputs = f.parsed("outputs", |s| list(s).map(Format::parse).collect::<Option<Vec<_>>>(), "formats from csv, json, svg")?;
    f.finish()?;
    if name.is_empty() {
        return Err(Diagnostic::new(exp.line, "experiment", "name", "empty name"));
    }

    let dom = find("domain").ok_or_else(|| Diagnostic::new(exp.line, "domain", "", "missing [domain] section"))?;
    let mut f = Fields::new(dom);
    let layout = f.parsed("layout", Layout::parse, "a layout name")?;
    let mut s = match layout {
        Some(l) => ExperimentScript::on_layout(name, protocol, l),
        None => {
            let mut s = ExperimentScript::on_layout(name, protocol, Layout::TwoElectrode);
            s.layout = None;
            s.electrodes.clear();
            for k in ["nx", "ny", "cell_size_um"] {
                if f.line_of(k) == dom.line {
                    return Err(f.err(dom.line, k, "required without a layout"));
                }
            }
            s
        }
    };
    s.seeds = seeds;
    if let Some(o) = outputs {
        s.outputs = o;
    }
    f.usize("nx", &mut s.nx)?;
    f.usize("ny", &mut s.ny)?;
    f.f64("cell_size_um", &mut s.cell_size)?;
    f.finish()?;

    let mut explicit = Vec::new();
    for sec in sections.iter().filter(|x| x.kind == "electrode") {
        let mut f = Fields::new(sec);
        let id = sec.name.clone().expect("named section");
        let role = f.parsed("role", Role::parse, "input, output, gate or floating")?;
        let role = f.required(role, "role")?;
        let rect = f.parsed(
            "rect",
            |v| {
                let c: Vec<usize> = list(v).map(|x| x.parse().ok()).collect::<Option<_>>()?;
                (c.len() == 4).then(|| (c[0], c[1], c[2], c[3]))
            },
            "`x0, y0, x1, y1`",
        )?;
        let cells = f.parsed("cells", |v| v.split(';').map(parse_pair).collect::<Option<Vec<_>>>(), "`x, y; x, y; ...`")?;
        f.finish()?;
        let e = match (rect, cells) {
            (Some((x0, y0, x1, y1)), None) => Electrode::rect(id, role, x0, y0, x1, y1),
            (None, Some(cells)) => Electrode { id: ElectrodeId::from(id), role, cells },
            _ => return Err(Diagnostic::new(sec.line, sec.label(), "rect", "give exactly one of `rect` or `cells`")),
        };
        explicit.push((sec.line, e));
    }
    if !explicit.is_empty() {
        s.electrodes = explicit.iter().map(|(_, e)| e.clone()).collect();
    }
    if s.electrodes.is_empty() {
        return Err(Diagnostic::new(dom.line, "domain", "", "no electrodes: give a layout or [electrode id] sections"));
    }
    if let Err(e) = SimDomain::new(s.nx, s.ny, s.cell_size, s.electrodes.clone()) {
        // blame the electrode named in the message, else the domain
        let (line, label) = explicit
            .iter()
            .find(|(_, el)| e.to_string().contains(&format!("`{}`", el.id)))
            .map_or((dom.line, "domain".to_string()), |(l, el)| (*l, format!("electrode {}", el.id)));
        return Err(Diagnostic::new(line, label, "", e.to_string()));
    }
    let ids: BTreeSet<&str> = s.electrodes.iter().map(|e| e.id.as_str()).collect();
    let undefined = |id: &str| format!("undefined electrode `{id}`");

    for sec in sections.iter().filter(|x| x.kind == "fixture") {
        let mut f = Fields::new(sec);
        let mut fx = Fixture { seed: String::new(), from: (0, 0), to: (0, 0), thickness: s.growth.w0 };
        f.ident("seed", &mut fx.seed)?;
        let from = f.parsed("from", parse_pair, "`x, y`")?;
        let to = f.parsed("to", parse_pair, "`x, y`")?;
        f.f64("thickness_um", &mut fx.thickness)?;
        fx.from = f.required(from, "from")?;
        fx.to = f.required(to, "to")?;
        if fx.seed.is_empty() {
            return Err(f.err(sec.line, "seed", "missing required key"));
        }
        if !ids.contains(fx.seed.as_str()) {
            return Err(f.err(f.line_of("seed"), "seed", undefined(&fx.seed)));
        }
        if !(fx.thickness > 0.0) {
            return Err(f.err(f.line_of("thickness_um"), "thickness_um", "must be positive"));
        }
        if let Err(e) = fx.cells() {
            return Err(f.err(f.line_of("to"), "to", e.to_string()));
        }
        f.finish()?;
        s.fixtures.push(fx);
    }

    if let Some(sec) = find("growth") {
        let g = &mut s.growth;
        let mut f = Fields::new(sec);
        f.f64("e_ox_V_per_um", &mut g.e_ox)?;
        f.f64("eta", &mut g.eta)?;
        f.f64("k_dep_um3_per_s", &mut g.k_dep)?;
        f.f64("w0_um", &mut g.w0)?;
        f.f64("f0_Hz", &mut g.f0)?;
        f.f64("alpha", &mut g.alpha)?;
        f.f64("branch_bias", &mut g.branch_bias)?;
        f.u64("seed", &mut g.seed)?;
        f.bool("allow_dc", &mut g.allow_dc)?;
        f.f64("tol_V", &mut g.tol)?;
        f.finish()?;
        g.validate().map_err(|e| Diagnostic::new(sec.line, "growth", "", e.to_string()))?;
    }
    if let Some(sec) = find("circuit") {
        let c = &mut s.circuit;
        let mut f = Fields::new(sec);
        f.f64("rho_fiber_ohm_um", &mut c.rho_fiber)?;
        f.f64("c_s_F_per_um2", &mut c.c_s)?;
        f.f64("r_gate_ohm", &mut c.r_gate)?;
        f.f64("c_gate_F", &mut c.c_gate)?;
        f.f64("r_sol_ohm", &mut c.r_sol)?;
        f.finish()?;
        c.validate().map_err(|e| Diagnostic::new(sec.line, "circuit", "", e.to_string()))?;
    }
    if let Some(sec) = find("retention") {
        let r = &mut s.retention;
        let mut f = Fields::new(sec);
        f.f64("v_weak_um3", &mut r.v_weak)?;
        f.f64("g_inf_reinforced", &mut r.g_inf_reinforced)?;
        f.f64("v_dedope", &mut r.v_dedope)?;
        f.finish()?;
    }
    if let Some(sec) = find("options") {
        let o = &mut s.options;
        let mut f = Fields::new(sec);
        f.u64("sample_every", &mut o.sample_every)?;
        f.u64("snapshot_every", &mut o.snapshot_every)?;
        f.f64("read_voltage_V", &mut o.read_voltage)?;
        f.usize("epochs", &mut o.epochs)?;
        f.f64("epoch_s", &mut o.epoch_s)?;
        f.f64s("frequencies_Hz", &mut o.frequencies)?;
        f.f64s("targets_uF", &mut o.targets_uf)?;
        f.f64s("calibrate_at_Hz", &mut o.calibrate_at)?;
        f.f64s("intervals_ms", &mut o.intervals_ms)?;
        f.f64s("dt_ms", &mut o.dt_ms)?;
        f.f64("spike_amplitude_V", &mut o.spike_amplitude)?;
        f.idents("train", &mut o.train)?;
        f.idents("tests", &mut o.tests)?;
        f.f64("inhibition_reach_cells", &mut o.inhibition_reach)?;
        f.f64("detection_factor", &mut o.detection_factor)?;
        f.ident("conditioned", &mut o.conditioned)?;
        f.ident("unconditioned", &mut o.unconditioned)?;
        f.ident("response", &mut o.response)?;
        f.ident("gate", &mut o.gate)?;
        for key in ["train", "tests"] {
            let names = if key == "train" { &o.train } else { &o.tests };
            if let Some(bad) = names.iter().find(|n| crate::protocols::bitmap(n).is_err()) {
                return Err(f.err(f.line_of(key), key, format!("unknown bitmap `{bad}`")));
            }
        }
        f.finish()?;
    }

    for sec in sections.iter().filter(|x| x.kind == "phase") {
        let pname = sec.name.clone().expect("named section");
        let mut f = Fields::new(sec);
        let mode = f.parsed("mode", Mode::parse, "grow, measure or rest")?;
        let mode = f.required(mode, "mode")?;
        let duration = f.parsed("duration_s", parse_f64, "a number")?;
        let duration = f.required(duration, "duration_s")?;
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(f.err(f.line_of("duration_s"), "duration_s", "duration must be positive"));
        }
        let mut stim = StimulusSet::new(duration);
        for e in &sec.entries {
            let Some(id) = e.key.strip_prefix("stimulus.") else { continue };
            f.raw(&e.key);
            if !ids.contains(id) {
                return Err(f.err(e.line, &e.key, undefined(id)));
            }
            let w = parse_waveform(&e.value).map_err(|m| f.err(e.line, &e.key, m))?;
            w.validate().map_err(|err| f.err(e.line, &e.key, err.to_string()))?;
            stim.assign(id, w);
        }
        f.finish()?;
        if let Err(e) = stim.validate() {
            return Err(Diagnostic::new(sec.line, sec.label(), "", e.to_string()));
        }
        if mode == Mode::Grow && stim.growth_frequency().is_none() && !s.growth.allow_dc {
            let line = sec.entries.iter().find(|e| e.key == "mode").map_or(sec.line, |e| e.line);
            return Err(Diagnostic::new(line, sec.label(), "mode", "grow phase needs a periodic stimulus"));
        }
        s.phases.push(Phase::new(pname, mode, stim));
    }

    if let Some(sec) = find("criteria") {
        for e in &sec.entries {
            let t: Vec<&str> = e.value.split_whitespace().collect();
            let bad = || Diagnostic::new(e.line, "criteria", "", format!("expected `metric op threshold`, got `{}`", e.value));
            if t.len() != 3 || !is_ident(t[0]) {
                return Err(bad());
            }
            let cmp = Cmp::parse(t[1]).ok_or_else(bad)?;
            let threshold = parse_f64(t[2]).ok_or_else(bad)?;
            s.criteria.push(Criterion { metric: t[0].to_string(), cmp, threshold });
        }
    }

    if s.seeds.is_empty() {
        return Err(Diagnostic::new(exp.line, "experiment", "seeds", "no seeds"));
    }
    s.validate().map_err(|e| Diagnostic::new(exp.line, "experiment", "", e.to_string()))?;
    Ok(s)
}

/// Shortest text that parses back to exactly `v`.
fn num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn nums(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ")
}

fn seeds_text(seeds: &[u64]) -> String {
    let mut parts = Vec::new();
    let mut k = 0;
    while k < seeds.len() {
        let mut j = k;
        while j + 1 < seeds.len() && seeds[j + 1] == seeds[j] + 1 {
            j += 1;
        }
        parts.push(if j > k + 1 { format!("{}-{}", seeds[k], seeds[j]) } else { seeds[k].to_string() });
        if j == k + 1 {
            parts.push(seeds[j].to_string());
        }
        k = j + 1;
    }
    parts.join(", ")
}

fn waveform_text(w: &Waveform) -> String {
    let mut s = format!("{{kind={}, amplitude_V={}", w.kind.name(), num(w.amplitude));
    for (k, v) in [("frequency_Hz", w.frequency), ("offset_s", w.phase_offset), ("width_s", w.pulse_width), ("baseline_V", w.baseline)] {
        if v != 0.0 {
            let _ = write!(s, ", {k}={}", num(v));
        }
    }
    s.push('}');
    s
}

fn electrode_text(out: &mut String, e: &Electrode) {
    let _ = writeln!(out, "\n[electrode {}]\nrole = {}", e.id, e.role.name());
    let (x0, y0, x1, y1) = e.bounds();
    if Electrode::rect(e.id.clone(), e.role, x0, y0, x1, y1).cells == e.cells {
        let _ = writeln!(out, "rect = {x0}, {y0}, {x1}, {y1}");
    } else {
        let cells: Vec<String> = e.cells.iter().map(|(x, y)| format!("{x}, {y}")).collect();
        let _ = writeln!(out, "cells = {}", cells.join("; "));
    }
}

/// Canonical text of a script; [`parse_script`] inverts it.
pub fn serialize_script(s: &ExperimentScript) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "[experiment]\nname = {}\nprotocol = {}\nseeds = {}", s.name, s.protocol.name(), seeds_text(&s.seeds));
    let formats: Vec<&str> = s.outputs.iter().map(|f| f.name()).collect();
    let _ = writeln!(w, "outputs = {}", formats.join(", "));

    let _ = writeln!(w, "\n[domain]");
    let (grid, electrodes) = match s.layout {
        Some(l) => {
            let _ = writeln!(w, "layout = {}", l.name());
            (l.grid(), l.electrodes())
        }
        None => ((0, 0, f64::NAN), Vec::new()),
    };
    if grid.0 != s.nx || grid.1 != s.ny || grid.2 != s.cell_size {
        let _ = writeln!(w, "nx = {}\nny = {}\ncell_size_um = {}", s.nx, s.ny, num(s.cell_size));
    }
    if electrodes != s.electrodes {
        for e in &s.electrodes {
            electrode_text(w, e);
        }
    }
    for f in &s.fixtures {
        let _ = writeln!(
            w,
            "\n[fixture]\nseed = {}\nfrom = {}, {}\nto = {}, {}\nthickness_um = {}",
            f.seed,
            f.from.0,
            f.from.1,
            f.to.0,
            f.to.1,
            num(f.thickness)
        );
    }

    let GrowthParams { e_ox, eta, k_dep, w0, f0, alpha, branch_bias, seed, allow_dc, tol } = s.growth;
    let _ = writeln!(
        w,
        "\n[growth]\ne_ox_V_per_um = {}\neta = {}\nk_dep_um3_per_s = {}\nw0_um = {}\nf0_Hz = {}\nalpha = {}\nbranch_bias = {}\nseed = {seed}\nallow_dc = {allow_dc}\ntol_V = {}",
        num(e_ox),
        num(eta),
        num(k_dep),
        num(w0),
        num(f0),
        num(alpha),
        num(branch_bias),
        num(tol)
    );
    let CircuitParams { rho_fiber, c_s, r_gate, c_gate, r_sol } = s.circuit;
    let _ = writeln!(
        w,
        "\n[circuit]\nrho_fiber_ohm_um = {}\nc_s_F_per_um2 = {}\nr_gate_ohm = {}\nc_gate_F = {}\nr_sol_ohm = {}",
        num(rho_fiber),
        num(c_s),
        num(r_gate),
        num(c_gate),
        num(r_sol)
    );
    let Retention { v_weak, g_inf_reinforced, v_dedope } = s.retention;
    let _ = writeln!(
        w,
        "\n[retention]\nv_weak_um3 = {}\ng_inf_reinforced = {}\nv_dedope = {}",
        num(v_weak),
        num(g_inf_reinforced),
        num(v_dedope)
    );

    let (o, d) = (&s.options, ProtocolOptions::default());
    let mut lines = Vec::new();
    let mut opt = |k: &str, differs: bool, v: String| {
        if differs {
            lines.push(format!("{k} = {v}"));
        }
    };
    opt("sample_every", o.sample_every != d.sample_every, o.sample_every.to_string());
    opt("snapshot_every", o.snapshot_every != d.snapshot_every, o.snapshot_every.to_string());
    opt("read_voltage_V", o.read_voltage != d.read_voltage, num(o.read_voltage));
    opt("epochs", o.epochs != d.epochs, o.epochs.to_string());
    opt("epoch_s", o.epoch_s != d.epoch_s, num(o.epoch_s));
    opt("frequencies_Hz", o.frequencies != d.frequencies, nums(&o.frequencies));
    opt("targets_uF", o.targets_uf != d.targets_uf, nums(&o.targets_uf));
    opt("calibrate_at_Hz", o.calibrate_at != d.calibrate_at, nums(&o.calibrate_at));
    opt("intervals_ms", o.intervals_ms != d.intervals_ms, nums(&o.intervals_ms));
    opt("dt_ms", o.dt_ms != d.dt_ms, nums(&o.dt_ms));
    opt("spike_amplitude_V", o.spike_amplitude != d.spike_amplitude, num(o.spike_amplitude));
    opt("train", o.train != d.train, o.train.join(", "));
    opt("tests", o.tests != d.tests, o.tests.join(", "));
    opt("inhibition_reach_cells", o.inhibition_reach != d.inhibition_reach, num(o.inhibition_reach));
    opt("detection_factor", o.detection_factor != d.detection_factor, num(o.detection_factor));
    opt("conditioned", o.conditioned != d.conditioned, o.conditioned.clone());
    opt("unconditioned", o.unconditioned != d.unconditioned, o.unconditioned.clone());
    opt("response", o.response != d.response, o.response.clone());
    opt("gate", o.gate != d.gate, o.gate.clone());
    if !lines.is_empty() {
        let _ = writeln!(w, "\n[options]\n{}", lines.join("\n"));
    }

    for p in &s.phases {
        let _ = writeln!(w, "\n[phase {}]\nmode = {}\nduration_s = {}", p.name, p.mode.name(), num(p.duration()));
        for (id, wf) in &p.stimuli.assignments {
            let _ = writeln!(w, "stimulus.{id} = {}", waveform_text(wf));
        }
    }
    if !s.criteria.is_empty() {
        let _ = writeln!(w, "\n[criteria]");
        for c in &s.criteria {
            let _ = writeln!(w, "{} {} {}", c.metric, c.cmp.symbol(), num(c.threshold));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::stock;

    const MINIMAL: &str = "\
[experiment]
name = minimal
protocol = synaptogenesis
seeds = 1

[domain]
layout = two_electrode

[phase grow]
mode = grow
duration_s = 1
stimulus.a = {kind=square_ac, amplitude_V=4, frequency_Hz=50}
";

    #[test]
    fn minimal_script() {
        let s = parse_script(MINIMAL).unwrap();
        assert_eq!(s.phases.len(), 1);
        assert_eq!(s.phases[0].cycles(), 50);
        assert_eq!(s.electrodes.len(), 2);
        assert_eq!(s.growth, GrowthParams::default());
    }

    #[test]
    fn stock_scripts_round_trip() {
        for p in Protocol::ALL {
            let s = stock::for_protocol(p);
            let text = serialize_script(&s);
            let back = parse_script(&text).unwrap_or_else(|d| panic!("{}: {d}\n{text}", p.name()));
            assert_eq!(back, s, "{}", p.name());
            assert_eq!(serialize_script(&back), text);
        }
    }

    #[test]
    fn explicit_geometry_round_trips() {
        let mut s = stock::synaptogenesis();
        s.layout = None;
        s.electrodes[1].cells.pop();
        s.seeds = vec![3, 4, 5, 9, 11, 12];
        let text = serialize_script(&s);
        assert!(text.contains("cells = "));
        assert!(text.contains("seeds = 3-5, 9, 11, 12"));
        assert_eq!(parse_script(&text).unwrap(), s);
    }

    fn diag(text: &str) -> Diagnostic {
        parse_script(text).expect_err("should be rejected")
    }

    #[test]
    fn typo_names_phase_and_field() {
        let d = diag(&MINIMAL.replace("stimulus.a", "stimulus.belle"));
        assert_eq!((d.line, d.section.as_str(), d.field.as_str()), (12, "phase grow", "stimulus.belle"));
        assert!(d.message.contains("belle"));
    }

    #[test]
    fn strict_keys() {
        let d = diag(&MINIMAL.replace("duration_s", "duraton_s"));
        assert_eq!(d.field, "duration_s");
        let d = diag(&MINIMAL.replace("[domain]", "[domain]\nlayuot = compact"));
        assert_eq!((d.line, d.field.as_str(), d.message.as_str()), (7, "layuot", "unknown key"));
        let d = diag(&MINIMAL.replace("amplitude_V=4", "amplitude=4"));
        assert!(d.message.contains("amplitude"));
        let d = diag(&MINIMAL.replace("[phase grow]", "[phase grow]\nmode = rest"));
        assert_eq!(d.message, "duplicate key");
        let d = diag(&format!("{MINIMAL}\n[plotting]\n"));
        assert!(d.message.contains("unknown section"));
    }

    #[test]
    fn located_value_errors() {
        let d = diag(&MINIMAL.replace("duration_s = 1", "duration_s = 0"));
        assert_eq!((d.line, d.field.as_str()), (11, "duration_s"));
        let d = diag(&MINIMAL.replace("duration_s = 1", "duration_s = -2"));
        assert_eq!(d.line, 11);
        let d = diag(&MINIMAL.replace("seeds = 1", "seeds = one"));
        assert_eq!((d.line, d.field.as_str()), (4, "seeds"));
        let d = diag(&MINIMAL.replace("square_ac", "triangle"));
        assert_eq!(d.line, 12);
        let d = diag(&MINIMAL.replace("kind=square_ac, amplitude_V=4, frequency_Hz=50", "kind=dc, amplitude_V=4"));
        assert_eq!(d.field, "mode");
        let d = diag(&MINIMAL.replace("layout = two_electrode", "layout = two_electrode\nnx = 10"));
        assert_eq!(d.section, "domain");
        let d = diag("name = x\n");
        assert_eq!(d.line, 1);
    }

    #[test]
    fn criteria_lines() {
        let s = parse_script(&format!("{MINIMAL}\n[criteria]\nbridged_fraction == 1\nmin_rise_factor >= 1e1\n")).unwrap();
        assert_eq!(s.criteria.len(), 2);
        assert_eq!(s.criteria[1].threshold, 10.0);
        let d = diag(&format!("{MINIMAL}\n[criteria]\nbridged_fraction = 1\n"));
        assert_eq!(d.line, 15);
    }

    #[test]
    fn number_text_is_exact() {
        for v in [0.1, 2.95e-10, 1e-6, 11950.0, 0.7, 1.0 / 3.0, 5e7, 0.8888888888888888] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(50.0), "50");
    }
}
