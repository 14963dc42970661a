mod common;

use std::collections::BTreeMap;

use fdp::circuit::*;
use fdp::field::{ElectrodeId, Electrode, Role, SimDomain};
use fdp::growth::FiberGraph;
use num_complex::Complex64;
use common::{dense_nodal, elements, random_net};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn sparse_solves_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let net = random_net(&mut rng);
        let n = net.nodes.len();
        // DC node voltages
        let src = BTreeMap::from([(ElectrodeId::from("a"), 1.0), (ElectrodeId::from("b"), 0.0)]);
        let dc = solve_dc(&net, &src).unwrap();
        let fixed = BTreeMap::from([(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.0, 0.0))]);
        let oracle = dense_nodal(n, &elements(&net, 0.0), &fixed);
        for i in 0..n {
            assert!((dc.voltages[i] - oracle[i].re).abs() <= 1e-9 * oracle[i].norm().max(1.0));
        }
        // impedance at a random frequency
        let w = 10f64.powf(rng.random_range(0.0..6.0));
        let z = impedance(&net, w).unwrap();
        let v = dense_nodal(n, &elements(&net, w), &fixed);
        let i_in: Complex64 = elements(&net, w)
            .iter()
            .map(|&(p, q, y)| if p == 0 { y * (v[0] - v[q]) } else if q == 0 { y * (v[0] - v[p]) } else { Complex64::new(0.0, 0.0) })
            .sum();
        let z_oracle = Complex64::new(1.0, 0.0) / i_in;
        assert!((z - z_oracle).norm() <= 1e-9 * z_oracle.norm(), "{z} vs {z_oracle}");
    }
}

fn layout() -> SimDomain {
    SimDomain::new(
        24,
        24,
        4.0,
        vec![
            Electrode::rect("in", Role::Input, 2, 4, 3, 19),
            Electrode::rect("out", Role::Output, 14, 4, 15, 19),
            Electrode::rect("g", Role::Gate, 8, 21, 9, 22),
        ],
    )
    .unwrap()
}

fn grown(d: &SimDomain, rows: &[usize], doping: f64) -> FiberGraph {
    let mut g = FiberGraph::for_domain(d);
    for &y in rows {
        for x in 4..14 {
            g.add_fixture(d, (x, y), "in", 1.0 + 0.1 * y as f64).unwrap();
        }
    }
    g.set_uniform_doping(doping);
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn passivity_reciprocity_kcl(rows in prop::sample::subsequence(vec![5usize, 8, 11, 14, 17], 0..=5),
                                 doping in 0.05f64..1.0, va in -3.0f64..3.0) {
        let d = layout();
        let net = extract_netlist(&grown(&d, &rows, doping), &d, &CircuitParams::default()).unwrap();
        let src = BTreeMap::from([(ElectrodeId::from("in"), va), (ElectrodeId::from("out"), 0.0)]);
        let sol = solve_dc(&net, &src).unwrap();
        let imax = sol.currents.values().fold(0.0f64, |m, i| m.max(i.abs()));
        prop_assert!(kcl_residual(&net, &sol) <= 1e-9 * imax.max(1e-30));
        prop_assert!(sol.currents.values().sum::<f64>().abs() <= 1e-9 * imax.max(1e-30));
        let dissipated: f64 = net.resistors.iter().map(|r| r.value * (sol.voltages[r.a] - sol.voltages[r.b]).powi(2)).sum();
        let supplied: f64 = src.iter().map(|(k, v)| v * sol.currents[k]).sum();
        prop_assert!(dissipated >= 0.0 && supplied >= -1e-30);
        prop_assert!((dissipated - supplied).abs() <= 1e-9 * supplied.abs().max(1e-30));
        // transfer conductances between input and output
        let one = |hot: &str| {
            let s: BTreeMap<ElectrodeId, f64> = ["in", "out"].iter().map(|&k| (ElectrodeId::from(k), if k == hot { 1.0 } else { 0.0 })).collect();
            solve_dc(&net, &s).unwrap()
        };
        let g_ab = -one("out").currents[&ElectrodeId::from("in")];
        let g_ba = -one("in").currents[&ElectrodeId::from("out")];
        prop_assert!((g_ab - g_ba).abs() <= 1e-9 * g_ab.abs());
    }
}

#[test]
fn capacitance_matches_branch_surface() {
    let d = layout();
    let g = grown(&d, &[5, 11, 17], 1.0);
    let p = CircuitParams::default();
    let s = fdp::growth::branch_statistics(&g, &d).total_surface;
    let c = network_capacitance(&extract_netlist(&g, &d, &p).unwrap());
    assert!((c - p.c_s * s).abs() <= 1e-12 * c);
}

#[test]
fn spice_deck_values_round_trip() {
    let d = layout();
    let net = extract_netlist(&grown(&d, &[8], 1.0), &d, &CircuitParams::default()).unwrap();
    let deck = net.to_spice("fixture");
    let first: Vec<&str> = deck.lines().find(|l| l.starts_with("R1 ")).unwrap().split_whitespace().collect();
    let r: f64 = first[3].parse().unwrap();
    assert!((r * net.resistors[0].value - 1.0).abs() < 1e-6);
}
