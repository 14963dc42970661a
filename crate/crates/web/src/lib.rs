//! wasm-bindgen surface for `www/index.html`.

use serde_json::json;
use wasm_bindgen::prelude::*;

use fdp::circuit::{self, CircuitParams};
use fdp::growth::{self, GrowthParams, Grower};
use fdp::plasticity::{self, Retention, SynapseState};
use fdp::protocols::Layout;
use fdp::render::{render_svg, SvgStyle};
use fdp::signals::{pairwise_overlap, StimulusSet, Waveform};

fn js(e: fdp::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// A network growing between the input and output pads of a stock layout.
#[wasm_bindgen]
pub struct Network {
    grower: Grower,
    circuit: CircuitParams,
}

#[wasm_bindgen]
impl Network {
    /// `layout` is `compact` or `two_electrode`.
    #[wasm_bindgen(constructor)]
    pub fn new(layout: &str, seed: u64) -> Result<Network, JsError> {
        let l = Layout::parse(layout).ok_or_else(|| JsError::new(&format!("unknown layout {layout}")))?;
        let mut params = GrowthParams { seed, ..GrowthParams::default() };
        if l == Layout::Compact {
            // the stock sweep settings for the small gap
            params.k_dep = 640.0;
            params.branch_bias = 0.3;
        }
        let grower = Grower::new(l.domain().map_err(js)?, params).map_err(js)?;
        Ok(Network { grower, circuit: CircuitParams::default() })
    }

    /// Grows `cycles` cycles of a square wave on pad `a`, `b` grounded.
    pub fn grow(&mut self, amplitude: f64, frequency: f64, cycles: u32) -> Result<(), JsError> {
        let stim = StimulusSet::new(cycles as f64 / frequency).with("a", Waveform::square(amplitude, frequency));
        self.grower.cycle_step(&stim, cycles as u64).map_err(js)?;
        Ok(())
    }

    pub fn svg(&self) -> String {
        render_svg(&self.grower.fibers, &self.grower.domain, &SvgStyle { scale: 5.0, ..SvgStyle::default() })
    }

    /// JSON: cycle, node and branch counts, volume, bridge state, port
    /// conductance with and without the electrolyte.
    pub fn stats(&self) -> Result<String, JsError> {
        let (g, d) = (&self.grower.fibers, &self.grower.domain);
        let s = growth::branch_statistics(g, d);
        let net = circuit::extract_netlist(g, d, &self.circuit).map_err(js)?;
        let bridged = growth::detect_bridge(g, d, "a", "b").map_err(js)?.is_some();
        Ok(json!({
            "cycle": self.grower.cycle,
            "nodes": s.nodes,
            "branch_points": s.branch_points,
            "mean_thickness_um": s.mean_thickness,
            "volume_um3": g.deposited_volume,
            "bridged": bridged,
            "port_S": circuit::port_conductance(&net).map_err(js)?,
            "channel_S": circuit::channel_conductance(&net, "a", "b").map_err(js)?,
        })
        .to_string())
    }
}

/// Fraction of a period two equal square waves are both positive when one
/// lags by `offset_ms`.
#[wasm_bindgen]
pub fn overlap(frequency: f64, offset_ms: f64) -> Result<f64, JsError> {
    let w = Waveform::square(2.0, frequency);
    pairwise_overlap(&w, &w, offset_ms * 1e-3).map_err(js)
}

/// JSON `[[t_h, G/G0], ...]` over a week for a synapse holding
/// `volume_ratio` times the weak-synapse deposit.
#[wasm_bindgen]
pub fn retention(volume_ratio: f64) -> Result<String, JsError> {
    let r = Retention::default();
    let s = SynapseState::new(1.0, 1, 1.0, &r, volume_ratio * r.v_weak).map_err(js)?;
    let pts: Vec<[f64; 2]> = (0..=168)
        .map(|h| Ok([h as f64, plasticity::decay(&s, h as f64 * 3600.0)?]))
        .collect::<fdp::Result<_>>()
        .map_err(js)?;
    Ok(serde_json::to_string(&pts).expect("finite numbers"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn network_grows_and_renders() {
        let mut n = Network::new("compact", 1).unwrap();
        let empty = n.svg();
        n.grow(5.0, 60.0, 30).unwrap();
        let v: serde_json::Value = serde_json::from_str(&n.stats().unwrap()).unwrap();
        assert_eq!(v["cycle"], 30);
        assert!(v["nodes"].as_u64().unwrap() > 0);
        assert!(n.svg().len() > empty.len());
    }

    #[test]
    fn anti_phase_has_no_overlap() {
        assert_eq!(overlap(50.0, 10.0).unwrap(), 0.0);
        assert_eq!(overlap(50.0, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn retention_halves_weak_synapse_in_two_days() {
        let pts: Vec<[f64; 2]> = serde_json::from_str(&retention(1.0).unwrap()).unwrap();
        assert_eq!(pts.len(), 169);
        assert!((pts[48][1] - 0.5).abs() < 0.02);
    }
}
