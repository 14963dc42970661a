#![allow(dead_code)]

use std::collections::BTreeMap;

use fdp::circuit::*;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dense nodal solve by Gaussian elimination with partial pivoting; nodes
/// listed in `fixed` are held at their values.
pub fn dense_nodal(n: usize, elems: &[(usize, usize, Complex64)], fixed: &BTreeMap<usize, Complex64>) -> Vec<Complex64> {
    let free: Vec<usize> = (0..n).filter(|i| !fixed.contains_key(i)).collect();
    let pos: BTreeMap<usize, usize> = free.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let m = free.len();
    let mut a = vec![vec![Complex64::new(0.0, 0.0); m + 1]; m];
    for &(p, q, y) in elems {
        for (u, v) in [(p, q), (q, p)] {
            if let Some(&r) = pos.get(&u) {
                a[r][r] += y;
                match pos.get(&v) {
                    Some(&c) => a[r][c] -= y,
                    None => a[r][m] += y * fixed[&v],
                }
            }
        }
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        a.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=m {
                    let t = a[col][c];
                    a[r][c] -= f * t;
                }
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for (&i, &v) in fixed {
        x[i] = v;
    }
    for (k, &i) in free.iter().enumerate() {
        x[i] = a[k][m] / a[k][k];
    }
    x
}

/// Random connected RC network with terminals "a" (node 0) and "b" (node 1).
pub fn random_net(rng: &mut ChaCha8Rng) -> Netlist {
    let n = rng.random_range(2..=6);
    let mut net = Netlist::new();
    net.add_terminal("a");
    net.add_terminal("b");
    for k in 2..n {
        net.add_node(format!("n{k}"));
    }
    for k in 1..n {
        let j = rng.random_range(0..k);
        net.add_conductance(j, k, 10f64.powf(rng.random_range(-4.0..1.0)), Branch::Other);
    }
    for _ in 0..rng.random_range(0..6) {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i != j {
            if rng.random_bool(0.5) {
                net.add_conductance(i, j, 10f64.powf(rng.random_range(-4.0..1.0)), Branch::Other);
            } else {
                net.add_capacitor(i, j, 10f64.powf(rng.random_range(-9.0..-5.0)), Branch::Other);
            }
        }
    }
    net.port = Some(("a".into(), "b".into()));
    net
}

pub fn elements(net: &Netlist, omega: f64) -> Vec<(usize, usize, Complex64)> {
    let mut e: Vec<_> = net.resistors.iter().map(|r| (r.a, r.b, Complex64::new(r.value, 0.0))).collect();
    if omega > 0.0 {
        e.extend(net.capacitors.iter().map(|c| (c.a, c.b, Complex64::new(0.0, omega * c.value))));
    }
    e
}

/// Worst relative mismatch between the sparse solves of `net` (DC node
/// voltages and port impedance at `omega`) and the dense oracle.
pub fn oracle_mismatch(net: &Netlist, omega: f64) -> f64 {
    let n = net.nodes.len();
    let src = BTreeMap::from([(fdp::field::ElectrodeId::from("a"), 1.0), (fdp::field::ElectrodeId::from("b"), 0.0)]);
    let dc = solve_dc(net, &src).unwrap();
    let fixed = BTreeMap::from([(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.0, 0.0))]);
    let oracle = dense_nodal(n, &elements(net, 0.0), &fixed);
    let mut worst = 0.0f64;
    for i in 0..n {
        worst = worst.max((dc.voltages[i] - oracle[i].re).abs() / oracle[i].norm().max(1.0));
    }
    let z = impedance(net, omega).unwrap();
    let v = dense_nodal(n, &elements(net, omega), &fixed);
    let i_in = elements(net, omega).iter().fold(Complex64::new(0.0, 0.0), |acc, &(p, q, y)| {
        if p == 0 {
            acc + y * (v[0] - v[q])
        } else if q == 0 {
            acc + y * (v[0] - v[p])
        } else {
            acc
        }
    });
    let z_oracle = Complex64::new(1.0, 0.0) / i_in;
    worst.max((z - z_oracle).norm() / z_oracle.norm())
}
