//! In-cell node sets on the reference cell `[0, 1]`, Lagrange interpolation
//! on those nodes, and the integration tableau
//! `I[q][t] = int_0^{x_q} l_t(s) ds` used to accumulate source integrals.
//!
//! For Gauss-Lobatto nodes the tableau coincides with the Butcher matrix of
//! the Lobatto IIIA collocation method with the same number of stages.

use crate::error::{Result, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeFamily {
    GaussLobatto,
    GaussLegendre,
    Equispaced,
}

/// Lagrange basis on a fixed node set, evaluated in barycentric form.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(nodes: &[f64]) -> Self {
        let bary = nodes
            .iter()
            .enumerate()
            .map(|(j, xj)| {
                let prod: f64 = nodes
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, xk)| xj - xk)
                    .product();
                1.0 / prod
            })
            .collect();
        Self {
            nodes: nodes.to_vec(),
            bary,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All basis functions at `x`.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        if let Some(i) = self.nodes.iter().position(|&n| n == x) {
            let mut out = vec![0.0; self.len()];
            out[i] = 1.0;
            return out;
        }
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.bary)
            .map(|(n, w)| w / (x - n))
            .collect();
        let denom: f64 = terms.iter().sum();
        terms.into_iter().map(|t| t / denom).collect()
    }

    pub fn eval(&self, j: usize, x: f64) -> f64 {
        self.eval_all(x)[j]
    }

    /// Derivative of basis function `j` at `x`.
    pub fn derivative(&self, j: usize, x: f64) -> f64 {
        if let Some(i) = self.nodes.iter().position(|&n| n == x) {
            if i != j {
                return (self.bary[j] / self.bary[i]) / (self.nodes[i] - self.nodes[j]);
            }
            return -(0..self.len())
                .filter(|&k| k != i)
                .map(|k| (self.bary[k] / self.bary[i]) / (self.nodes[i] - self.nodes[k]))
                .sum::<f64>();
        }
        let lj = self.eval(j, x);
        let s: f64 = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, n)| 1.0 / (x - n))
            .sum();
        lj * s
    }

    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        self.eval_all(x)
            .iter()
            .zip(values)
            .map(|(l, v)| l * v)
            .sum()
    }
}

/// Node set with weights, differentiation matrix and integration tableau on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    family: NodeFamily,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    basis: LagrangeBasis,
    /// `diff[s][t] = l_s'(x_t)` on the reference cell (divide by `dx` at use sites).
    diff: Vec<Vec<f64>>,
    /// `tableau[q][t] = int_0^{x_q} l_t`.
    tableau: Vec<Vec<f64>>,
    left_edge: Vec<f64>,
    right_edge: Vec<f64>,
}

impl QuadratureRule {
    fn from_nodes(family: NodeFamily, nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        let basis = LagrangeBasis::new(&nodes);
        let n = nodes.len();
        let diff = (0..n)
            .map(|s| nodes.iter().map(|&x| basis.derivative(s, x)).collect())
            .collect();
        let tableau = nodes
            .iter()
            .map(|&xq| partial_integrals(&basis, xq))
            .collect();
        let left_edge = basis.eval_all(0.0);
        let right_edge = basis.eval_all(1.0);
        Self {
            family,
            nodes,
            weights,
            basis,
            diff,
            tableau,
            left_edge,
            right_edge,
        }
    }

    pub fn family(&self) -> NodeFamily {
        self.family
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn tableau(&self) -> &[Vec<f64>] {
        &self.tableau
    }

    pub fn differentiation_matrix(&self) -> &[Vec<f64>] {
        &self.diff
    }

    /// `int_0^1 l_t`, i.e. the weights again.
    pub fn partial_to_right_edge(&self) -> &[f64] {
        &self.weights
    }

    /// `l_t(0)` and `l_t(1)`.
    pub fn edge_rows(&self) -> (&[f64], &[f64]) {
        (&self.left_edge, &self.right_edge)
    }

    pub fn includes_edges(&self) -> bool {
        self.nodes.first() == Some(&0.0) && self.nodes.last() == Some(&1.0)
    }

    /// `sum_t I[target][t] * values[t]` on the reference cell.
    pub fn integrate_partial(&self, values: &[f64], target: usize) -> Result<f64> {
        if values.len() != self.len() {
            return Err(SolverError::SizeMismatch(values.len(), self.len()));
        }
        let row = self.tableau.get(target).ok_or(SolverError::OutOfRange {
            index: target,
            len: self.len(),
        })?;
        Ok(dot(row, values))
    }

    /// Quadrature average on the reference cell, written relative to the
    /// first sample so that constant data is returned bit-for-bit.
    pub fn average(&self, values: &[f64]) -> f64 {
        let v0 = values[0];
        v0 + self
            .weights
            .iter()
            .zip(values)
            .skip(1)
            .map(|(w, v)| w * (v - v0))
            .sum::<f64>()
    }

    /// Derivative of the interpolant at every node (reference cell).
    pub fn derivative_at_nodes(&self, values: &[f64], out: &mut [f64]) {
        for (t, o) in out.iter_mut().enumerate() {
            *o = self
                .diff
                .iter()
                .zip(values)
                .map(|(row, v)| row[t] * v)
                .sum();
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `int_0^{upper} l_t(s) ds` for every basis function, integrated exactly
/// with a Gauss-Legendre rule of matching size.
fn partial_integrals(basis: &LagrangeBasis, upper: f64) -> Vec<f64> {
    let n = basis.len();
    let mut out = vec![0.0; n];
    if upper == 0.0 {
        return out;
    }
    let (gx, gw) = legendre_nodes(n.max(1));
    for (x, w) in gx.iter().zip(&gw) {
        let s = 0.5 * (x + 1.0) * upper;
        let l = basis.eval_all(s);
        for (o, li) in out.iter_mut().zip(&l) {
            *o += 0.5 * upper * w * li;
        }
    }
    out
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    // derivative from the standard identity, valid for |x| != 1
    let dp = if x.abs() == 1.0 {
        let nn = n as f64;
        x.powi(n as i32 + 1) * nn * (nn + 1.0) / 2.0
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-17 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    // symmetrise
    for i in 0..n / 2 {
        let a = 0.5 * (x[n - 1 - i] - x[i]);
        x[i] = -a;
        x[n - 1 - i] = a;
        let b = 0.5 * (w[i] + w[n - 1 - i]);
        w[i] = b;
        w[n - 1 - i] = b;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss-Lobatto nodes and weights on `[-1, 1]`: endpoints plus the roots of `P'_{n-1}`.
fn lobatto_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = n - 1;
    let mut x = vec![0.0; n];
    x[0] = -1.0;
    x[m] = 1.0;
    for i in 1..m {
        // Chebyshev-Gauss-Lobatto initial guess, Newton on P'_m using
        // P''_m = (2x P'_m - m(m+1) P_m) / (1 - x^2)
        let mut z = -(std::f64::consts::PI * i as f64 / m as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, z);
            let d2p = (2.0 * z * dp - (m * (m + 1)) as f64 * p) / (1.0 - z * z);
            let dz = dp / d2p;
            z -= dz;
            if dz.abs() < 1e-17 {
                break;
            }
        }
        x[i] = z;
    }
    for i in 0..n / 2 {
        let a = 0.5 * (x[n - 1 - i] - x[i]);
        x[i] = -a;
        x[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let w = x
        .iter()
        .map(|&z| {
            let (p, _) = legendre(m, z);
            2.0 / ((m * n) as f64 * p * p)
        })
        .collect();
    (x, w)
}

fn to_unit(x: Vec<f64>, w: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let nodes = x.iter().map(|z| 0.5 * (z + 1.0)).collect::<Vec<_>>();
    let weights = w.iter().map(|v| 0.5 * v).collect();
    (nodes, weights)
}

/// Gauss-Lobatto rule with `n_nodes >= 2` points on `[0, 1]`; exact for degree `2 n - 3`.
pub fn gauss_lobatto(n_nodes: usize) -> Result<QuadratureRule> {
    if n_nodes < 2 {
        return Err(SolverError::InvalidParameter(format!(
            "Gauss-Lobatto needs at least 2 nodes, got {n_nodes}"
        )));
    }
    let (x, w) = lobatto_nodes(n_nodes);
    let (mut nodes, weights) = to_unit(x, w);
    nodes[0] = 0.0;
    nodes[n_nodes - 1] = 1.0;
    if n_nodes % 2 == 1 {
        nodes[n_nodes / 2] = 0.5;
    }
    Ok(QuadratureRule::from_nodes(
        NodeFamily::GaussLobatto,
        nodes,
        weights,
    ))
}

/// Gauss-Legendre rule with `n_nodes >= 1` points on `[0, 1]`; exact for degree `2 n - 1`.
pub fn gauss_legendre(n_nodes: usize) -> Result<QuadratureRule> {
    if n_nodes < 1 {
        return Err(SolverError::InvalidParameter(
            "Gauss-Legendre needs at least 1 node".into(),
        ));
    }
    let (x, w) = legendre_nodes(n_nodes);
    let (mut nodes, weights) = to_unit(x, w);
    if n_nodes % 2 == 1 {
        nodes[n_nodes / 2] = 0.5;
    }
    Ok(QuadratureRule::from_nodes(
        NodeFamily::GaussLegendre,
        nodes,
        weights,
    ))
}

/// Closed Newton-Cotes nodes `k / (n - 1)`; weights are the exact integrals of the basis.
pub fn equispaced(n_nodes: usize) -> Result<QuadratureRule> {
    if n_nodes < 2 {
        return Err(SolverError::InvalidParameter(format!(
            "equispaced rule needs at least 2 nodes, got {n_nodes}"
        )));
    }
    let nodes: Vec<f64> = (0..n_nodes)
        .map(|k| k as f64 / (n_nodes - 1) as f64)
        .collect();
    let basis = LagrangeBasis::new(&nodes);
    let weights = partial_integrals(&basis, 1.0);
    Ok(QuadratureRule::from_nodes(
        NodeFamily::Equispaced,
        nodes,
        weights,
    ))
}
