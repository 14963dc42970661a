//! Electrode layouts and bitmap fixtures used by the stock experiments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Electrode, Role, SimDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// 128² lattice, 4 µm cells, two 14×20 pads 50 cells apart.
    TwoElectrode,
    /// 80² lattice, 4 µm cells, two 2×4 pads 4 cells apart.
    Compact,
    /// Compact pads plus a gate pad above the gap.
    CompactGated,
    /// 64² lattice, 12 µm cells: bell and food pads either side of a small
    /// salivation pad.
    Pavlov,
    /// 24×232 lattice, 4 µm cells: 15 pixel inputs on a left rail, three
    /// outputs on the right.
    PatternRail,
}

impl Layout {
    pub const ALL: [Layout; 5] =
        [Layout::TwoElectrode, Layout::Compact, Layout::CompactGated, Layout::Pavlov, Layout::PatternRail];

    pub fn name(self) -> &'static str {
        match self {
            Layout::TwoElectrode => "two_electrode",
            Layout::Compact => "compact",
            Layout::CompactGated => "compact_gated",
            Layout::Pavlov => "pavlov",
            Layout::PatternRail => "pattern_rail",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name() == s)
    }

    /// Lattice size and cell size.
    pub fn grid(self) -> (usize, usize, f64) {
        match self {
            Layout::TwoElectrode => (128, 128, 4.0),
            Layout::Compact | Layout::CompactGated => (80, 80, 4.0),
            Layout::Pavlov => (64, 64, 12.0),
            Layout::PatternRail => (PATTERN_NX, PATTERN_NY, PATTERN_CELL),
        }
    }

    pub fn electrodes(self) -> Vec<Electrode> {
        match self {
            Layout::TwoElectrode => vec![
                Electrode::rect("a", Role::Input, 25, 54, 38, 73),
                Electrode::rect("b", Role::Output, 89, 54, 102, 73),
            ],
            Layout::Compact => compact(),
            Layout::CompactGated => {
                let mut e = compact();
                e.push(Electrode::rect("gate", Role::Gate, 36, 70, 43, 73));
                e
            }
            Layout::Pavlov => vec![
                Electrode::rect("bell", Role::Input, 13, 24, 18, 39),
                Electrode::rect("salivation", Role::Output, 31, 31, 32, 32),
                Electrode::rect("food", Role::Input, 45, 24, 50, 39),
            ],
            Layout::PatternRail => pattern_rail(),
        }
    }

    pub fn domain(self) -> Result<SimDomain> {
        let (nx, ny, h) = self.grid();
        SimDomain::new(nx, ny, h, self.electrodes())
    }
}

fn compact() -> Vec<Electrode> {
    // gap 4, pads 2 wide and 4 tall, centred on the lattice
    vec![Electrode::rect("a", Role::Input, 36, 38, 37, 41), Electrode::rect("b", Role::Output, 42, 38, 43, 41)]
}

pub const PATTERN_NX: usize = 24;
pub const PATTERN_NY: usize = 232;
pub const PATTERN_CELL: f64 = 4.0;
/// Rows of the first and of each following pixel pad on the input rail.
const RAIL_Y0: usize = 3;
/// 64 µm: closer pads get swallowed by their neighbours' side branches.
pub const RAIL_PITCH: usize = 16;
/// First column and row span of each output pad.
pub const OUTPUT_X: usize = 20;
pub const OUTPUT_SPAN: usize = 75;

/// Input `p0`…`p14` in reading order, one 2×2 pad every 16 rows at the
/// left edge; outputs `o0`…`o2` are tall pads 16 cells across the gap.
fn pattern_rail() -> Vec<Electrode> {
    let mut e: Vec<Electrode> = (0..15)
        .map(|k| {
            let y = RAIL_Y0 + RAIL_PITCH * k;
            Electrode::rect(format!("p{k}"), Role::Input, 2, y, 3, y + 1)
        })
        .collect();
    for k in 0..3 {
        let y0 = 3 + OUTPUT_SPAN * k;
        e.push(Electrode::rect(format!("o{k}"), Role::Output, OUTPUT_X, y0, OUTPUT_X + 1, y0 + OUTPUT_SPAN - 3));
    }
    e
}

/// 3×5 digit font, rows top to bottom, `true` for a filled pixel.
pub type Bitmap = [bool; 15];

const FONT: [&str; 10] = [
    "111101101101111",
    "010110010010111",
    "111001111100111",
    "111001111001111",
    "101101111001001",
    "111100111001111",
    "111100111101111",
    "111001001001001",
    "111101111101111",
    "111101111001111",
];

pub fn digit(d: u8) -> Result<Bitmap> {
    let s = FONT.get(d as usize).ok_or_else(|| Error::Domain(format!("no glyph for digit {d}")))?;
    Ok(bits(s))
}

fn bits(s: &str) -> Bitmap {
    let mut b = [false; 15];
    for (k, c) in s.bytes().enumerate() {
        b[k] = c == b'1';
    }
    b
}

/// `0`–`9`, `blank`, or a literal 15-character string of 0/1.
pub fn bitmap(name: &str) -> Result<Bitmap> {
    match name {
        "blank" => Ok([false; 15]),
        s if s.len() == 1 && s.as_bytes()[0].is_ascii_digit() => digit(s.as_bytes()[0] - b'0'),
        s if s.len() == 15 && s.bytes().all(|c| c == b'0' || c == b'1') => Ok(bits(s)),
        s => Err(Error::Domain(format!("unknown bitmap {s:?}"))),
    }
}

pub fn render_bitmap(b: &Bitmap) -> String {
    b.chunks(3).map(|r| r.iter().map(|&p| if p { '#' } else { '.' }).collect::<String>()).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layouts_build() {
        for l in Layout::ALL {
            let d = l.domain().unwrap();
            assert_eq!(Layout::parse(l.name()), Some(l));
            assert!(!d.electrodes.is_empty());
        }
        assert_eq!(Layout::PatternRail.electrodes().len(), 18);
    }

    #[test]
    fn glyphs() {
        assert_eq!(render_bitmap(&digit(0).unwrap()), "###\n#.#\n#.#\n#.#\n###");
        assert_eq!(render_bitmap(&digit(5).unwrap()), "###\n#..\n###\n..#\n###");
        let (z, e) = (digit(0).unwrap(), digit(8).unwrap());
        // 8 is 0 plus the centre pixel
        let extra: Vec<usize> = (0..15).filter(|&k| e[k] && !z[k]).collect();
        assert_eq!(extra, vec![7]);
        assert!((0..15).all(|k| !z[k] || e[k]));
        assert!(bitmap("blank").unwrap().iter().all(|&p| !p));
        assert!(bitmap("x").is_err());
    }
}
