//! Sparse symmetric LDLᵀ factorization with a greedy minimum-degree order.
//!
//! Works for real symmetric positive definite systems and for the complex
//! symmetric (not Hermitian) matrices that arise from AC nodal analysis.
//! No pivoting: callers guarantee a nonzero diagonal through elimination,
//! which holds for connected conductance networks with a grounded node.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

pub trait Scalar:
    Copy
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn zero() -> Self;
    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Symmetric matrix assembled from stamps. Only one triangle is stored.
#[derive(Debug, Clone)]
pub struct SymMatrix<T> {
    n: usize,
    diag: Vec<T>,
    off: Vec<BTreeMap<usize, T>>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn new(n: usize) -> Self {
        SymMatrix { n, diag: vec![T::zero(); n], off: vec![BTreeMap::new(); n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add_diag(&mut self, i: usize, v: T) {
        self.diag[i] = self.diag[i] + v;
    }

    /// Adds `v` at (i, j) and (j, i).
    pub fn add_off(&mut self, i: usize, j: usize, v: T) {
        assert_ne!(i, j, "off-diagonal stamp on the diagonal");
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let e = self.off[a].entry(b).or_insert_with(T::zero);
        *e = *e + v;
    }

    /// Conductance-style stamp between two unknowns.
    pub fn stamp(&mut self, i: usize, j: usize, g: T) {
        self.add_diag(i, g);
        self.add_diag(j, g);
        self.add_off(i, j, -g);
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y: Vec<T> = (0..self.n).map(|i| self.diag[i] * x[i]).collect();
        for (i, row) in self.off.iter().enumerate() {
            for (&j, &v) in row {
                y[i] = y[i] + v * x[j];
                y[j] = y[j] + v * x[i];
            }
        }
        y
    }

    pub fn factor(&self) -> Result<Factor<T>, usize> {
        Factor::new(self)
    }
}

/// LDLᵀ factors in elimination order.
#[derive(Debug, Clone)]
pub struct Factor<T> {
    order: Vec<usize>,
    pivots: Vec<T>,
    /// For each eliminated node, multipliers `(row, l)` below the pivot.
    cols: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> Factor<T> {
    /// Fails with the index of the first node whose pivot vanished.
    fn new(m: &SymMatrix<T>) -> Result<Self, usize> {
        let n = m.n;
        let mut adj: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); n];
        for (i, row) in m.off.iter().enumerate() {
            for (&j, &v) in row {
                if v != T::zero() {
                    adj[i].insert(j, v);
                    adj[j].insert(i, v);
                }
            }
        }
        let mut diag = m.diag.clone();
        let mut done = vec![false; n];
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            (0..n).map(|i| Reverse((adj[i].len(), i))).collect();
        let mut order = Vec::with_capacity(n);
        let mut pivots = Vec::with_capacity(n);
        let mut cols = Vec::with_capacity(n);

        while let Some(Reverse((deg, p))) = heap.pop() {
            if done[p] || deg != adj[p].len() {
                continue;
            }
            done[p] = true;
            let d = diag[p];
            if !(d.modulus() > m.diag[p].modulus() * 1e-12) {
                return Err(p);
            }
            let nbrs: Vec<(usize, T)> = std::mem::take(&mut adj[p]).into_iter().collect();
            let col: Vec<(usize, T)> = nbrs.iter().map(|&(j, v)| (j, v / d)).collect();
            for &(j, _) in &nbrs {
                adj[j].remove(&p);
            }
            for (a_idx, &(a, va)) in nbrs.iter().enumerate() {
                let la = va / d;
                diag[a] = diag[a] - la * va;
                for &(b, vb) in &nbrs[a_idx + 1..] {
                    let upd = la * vb;
                    let e = adj[a].entry(b).or_insert_with(T::zero);
                    *e = *e - upd;
                    let ev = *e;
                    adj[b].insert(a, ev);
                }
            }
            for &(j, _) in &nbrs {
                heap.push(Reverse((adj[j].len(), j)));
            }
            order.push(p);
            pivots.push(d);
            cols.push(col);
        }
        Ok(Factor { order, pivots, cols })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        for (k, &p) in self.order.iter().enumerate() {
            let xp = x[p];
            for &(j, l) in &self.cols[k] {
                x[j] = x[j] - l * xp;
            }
        }
        for (k, &p) in self.order.iter().enumerate() {
            x[p] = x[p] / self.pivots[k];
        }
        for (k, &p) in self.order.iter().enumerate().rev() {
            let mut acc = x[p];
            for &(j, l) in &self.cols[k] {
                acc = acc - l * x[j];
            }
            x[p] = acc;
        }
        x
    }

    /// Off-diagonal entries of L, a measure of fill.
    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }
}
