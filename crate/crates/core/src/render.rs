//! SVG 1.1 drawings of fiber graphs.

use std::fmt::Write as _;

use crate::field::{Role, SimDomain};
use crate::growth::FiberGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgStyle {
    /// Pixels per lattice cell.
    pub scale: f64,
    /// Stroke pixels per µm of fiber thickness.
    pub width_per_um: f64,
    /// Opacity of a fully dedoped fiber; doping 1 draws opaque.
    pub min_opacity: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle { scale: 4.0, width_per_um: 2.0, min_opacity: 0.15 }
    }
}

fn role_fill(r: Role) -> &'static str {
    match r {
        Role::Input => "#c0392b",
        Role::Output => "#2c3e50",
        Role::Gate => "#8e44ad",
        Role::Floating => "#7f8c8d",
    }
}

/// Maximal runs of occupied cells whose interior cells have exactly two
/// occupied neighbours. Junctions and ends close a chain and may appear in
/// several; a ring with no junction is one chain starting at its lowest cell.
pub fn fiber_chains(fibers: &FiberGraph, domain: &SimDomain) -> Vec<Vec<usize>> {
    let mut cells: Vec<usize> = fibers.nodes().iter().map(|n| n.cell).collect();
    cells.sort_unstable();
    let nbrs = |i: usize| -> Vec<usize> {
        let mut v: Vec<usize> = domain.neighbors(i).filter(|&j| fibers.is_occupied(j)).collect();
        v.sort_unstable();
        v
    };
    let degree = |i: usize| nbrs(i).len();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut used = std::collections::BTreeSet::new();
    let mut chains = Vec::new();
    let walk = |start: usize, first: usize, used: &mut std::collections::BTreeSet<(usize, usize)>| {
        let mut chain = vec![start, first];
        used.insert(key(start, first));
        let (mut prev, mut cur) = (start, first);
        while cur != start && degree(cur) == 2 {
            let next = nbrs(cur).into_iter().find(|&n| n != prev).expect("degree two");
            if !used.insert(key(cur, next)) {
                break;
            }
            chain.push(next);
            (prev, cur) = (cur, next);
        }
        chain
    };
    for &c in &cells {
        match degree(c) {
            0 => chains.push(vec![c]),
            2 => {}
            _ => {
                for n in nbrs(c) {
                    if !used.contains(&key(c, n)) {
                        chains.push(walk(c, n, &mut used));
                    }
                }
            }
        }
    }
    for &c in &cells {
        if let Some(n) = nbrs(c).into_iter().find(|&n| !used.contains(&key(c, n))) {
            chains.push(walk(c, n, &mut used));
        }
    }
    chains
}

/// Electrodes in declaration order, then one polyline per fiber chain in
/// [`fiber_chains`] order. Stroke width follows the mean thickness of the
/// chain's non-junction cells and opacity their mean doping.
pub fn render_svg(fibers: &FiberGraph, domain: &SimDomain, style: &SvgStyle) -> String {
    let s = style.scale;
    let (w, h) = (domain.nx as f64 * s, domain.ny as f64 * s);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r##"<rect width="{w}" height="{h}" fill="#f4f1e8"/>"##);
    for e in &domain.electrodes {
        let (x0, y0, x1, y1) = e.bounds();
        let filled = (x1 - x0 + 1) * (y1 - y0 + 1) == e.cells.len();
        let fill = role_fill(e.role);
        if filled {
            let _ = writeln!(
                out,
                r#"<rect id="electrode-{}" x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
                e.id,
                x0 as f64 * s,
                y0 as f64 * s,
                (x1 - x0 + 1) as f64 * s,
                (y1 - y0 + 1) as f64 * s
            );
        } else {
            let mut d = String::new();
            for &(x, y) in &e.cells {
                let _ = write!(d, "M{} {}h{s}v{s}h-{s}z", x as f64 * s, y as f64 * s);
            }
            let _ = writeln!(out, r#"<path id="electrode-{}" d="{d}" fill="{fill}"/>"#, e.id);
        }
    }
    for chain in fiber_chains(fibers, domain) {
        // junction cells belong to several chains and would blur each arm
        let junction = |c: usize| domain.neighbors(c).filter(|&j| fibers.is_occupied(j)).count() > 2;
        let own: Vec<usize> = chain.iter().copied().filter(|&c| !junction(c)).collect();
        let pick = if own.is_empty() { &chain } else { &own };
        let nodes: Vec<_> = pick.iter().filter_map(|&c| fibers.node(c)).collect();
        let n = nodes.len().max(1) as f64;
        let thickness = nodes.iter().fold(0.0, |a, x| a + x.thickness) / n;
        let doping = nodes.iter().fold(0.0, |a, x| a + x.doping) / n;
        let opacity = style.min_opacity + (1.0 - style.min_opacity) * doping.clamp(0.0, 1.0);
        let pts: Vec<String> = chain
            .iter()
            .map(|&c| {
                let (x, y) = domain.coords(c);
                format!("{},{}", (x as f64 + 0.5) * s, (y as f64 + 0.5) * s)
            })
            .collect();
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#1b6f3a" stroke-linecap="round" stroke-linejoin="round" stroke-width="{:.4}" stroke-opacity="{:.4}"/>"##,
            pts.join(" "),
            thickness * style.width_per_um,
            opacity
        );
    }
    out.push_str("</svg>\n");
    out
}
