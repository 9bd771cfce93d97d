//! Global flux assembly: the source integral `R` at quadrature nodes and
//! interfaces, the interface jumps of `R`, and the cell averages
//! `G_i = (q_i, F2_i + R_i)` that are reconstructed at interfaces.
//!
//! `R` is accumulated by a single left-to-right sweep starting from `R = 0` at
//! the left end of the physical domain. Halo cells on the left are filled by
//! running the same relations backwards.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::grid::{Bathymetry, Grid, PhysicalParams, State};
use crate::quadrature::{dot, QuadratureRule};
use crate::weno::{WenoReconstructor, WenoWeights};

/// How the bathymetric source is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceMode {
    /// Split form `-g eta b' + g (b^2/2)'` with `h, b` slaved to the weights
    /// of `eta`, plus interface jumps. Exact for the lake at rest.
    WellBalanced,
    /// `-g h b'` with analytic `b, b'` at the nodes and per-variable weights.
    Direct,
}

/// Physical flux `F(h, q) = (q, q^2/h + g h^2/2)`.
#[inline]
pub fn physical_flux(h: f64, q: f64, g: f64) -> [f64; 2] {
    [q, q * q / h + 0.5 * g * h * h]
}

/// Quadrature average of `F` over a cell from reconstructed node values.
pub fn hyperbolic_flux_average(
    cell: usize,
    h: &[f64],
    q: &[f64],
    g: f64,
    rule: &QuadratureRule,
) -> Result<[f64; 2]> {
    check_depths(cell, h)?;
    let mut f2 = [0.0; 8];
    for k in 0..h.len() {
        f2[k] = physical_flux(h[k], q[k], g)[1];
    }
    Ok([rule.average(q), rule.average(&f2[..h.len()])])
}

fn check_depths(cell: usize, h: &[f64]) -> Result<()> {
    for (node, &value) in h.iter().enumerate() {
        if !(value > 0.0) {
            return Err(SolverError::NonPositiveNodeDepth { cell, node, value });
        }
    }
    Ok(())
}

#[inline]
fn friction(q: f64, h: f64, n: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        n * n * q * q.abs() / h.powf(7.0 / 3.0)
    }
}

/// Jump of `R` across an interface along a straight path in `(eta, b)`.
#[inline]
pub fn interface_jump(eta_l: f64, eta_r: f64, b_l: f64, b_r: f64, g: f64) -> f64 {
    g * 0.5 * (eta_r + eta_l) * (b_r - b_l) - g * (0.5 * b_r * b_r - 0.5 * b_l * b_l)
}

/// Increments of `R` at every node and at the right edge relative to the
/// value at the cell's left edge, split well-balanced form.
///
/// `out[k] = dx sum_t I[k][t] g (eta_t (Db)_t / dx + n^2 q_t|q_t|/h_t^{7/3}) - g (b_k^2 - b_l^2)/2`.
#[allow(clippy::too_many_arguments)]
pub fn split_source_increments(
    rule: &QuadratureRule,
    dx: f64,
    eta: &[f64],
    b: &[f64],
    q: &[f64],
    h: &[f64],
    params: &PhysicalParams,
    out: &mut [f64],
) -> f64 {
    let n = rule.len();
    let g = params.g;
    let diff = rule.differentiation_matrix();
    let mut s = [0.0; 8];
    for t in 0..n {
        let db: f64 = (0..n).map(|k| diff[k][t] * b[k]).sum();
        s[t] = g * (eta[t] * db / dx + friction(q[t], h[t], params.n_manning));
    }
    let (left, right) = rule.edge_rows();
    let bl = dot(left, b);
    let br = dot(right, b);
    for (k, o) in out.iter_mut().enumerate().take(n) {
        *o = dx * dot(&rule.tableau()[k], &s[..n]) - g * (0.5 * b[k] * b[k] - 0.5 * bl * bl);
    }
    if rule.includes_edges() {
        out[n - 1]
    } else {
        dx * dot(rule.weights(), &s[..n]) - g * (0.5 * br * br - 0.5 * bl * bl)
    }
}

/// Same as [`split_source_increments`] for the direct form `g h b' + friction`.
#[allow(clippy::too_many_arguments)]
pub fn direct_source_increments(
    rule: &QuadratureRule,
    dx: f64,
    h: &[f64],
    q: &[f64],
    slopes: &[f64],
    params: &PhysicalParams,
    out: &mut [f64],
) -> f64 {
    let n = rule.len();
    let g = params.g;
    let mut s = [0.0; 8];
    for t in 0..n {
        s[t] = g * (h[t] * slopes[t] + friction(q[t], h[t], params.n_manning));
    }
    for (k, o) in out.iter_mut().enumerate().take(n) {
        *o = dx * dot(&rule.tableau()[k], &s[..n]);
    }
    if rule.includes_edges() {
        out[n - 1]
    } else {
        dx * dot(rule.weights(), &s[..n])
    }
}

/// `R` inside one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSourceIntegral {
    /// `R_{i,q}` at every node.
    pub nodes: Vec<f64>,
    /// `R^R_{i-1/2}`, the value at the left edge.
    pub left: f64,
    /// `R^L_{i+1/2}`, the value at the right edge.
    pub right: f64,
}

/// Well-balanced source integral of one cell given the value `prev_r` at its left edge.
#[allow(clippy::too_many_arguments)]
pub fn source_integral_reconstruct(
    cell: usize,
    eta: &[f64],
    b: &[f64],
    q: &[f64],
    h: &[f64],
    dx: f64,
    params: &PhysicalParams,
    rule: &QuadratureRule,
    prev_r: f64,
) -> Result<CellSourceIntegral> {
    let n = rule.len();
    for len in [eta.len(), b.len(), q.len(), h.len()] {
        if len != n {
            return Err(SolverError::SizeMismatch(len, n));
        }
    }
    if params.n_manning > 0.0 {
        check_depths(cell, h)?;
    }
    let mut inc = vec![0.0; n];
    let right = split_source_increments(rule, dx, eta, b, q, h, params, &mut inc);
    Ok(CellSourceIntegral {
        nodes: inc.iter().map(|v| prev_r + v).collect(),
        left: prev_r,
        right: prev_r + right,
    })
}

/// Node reconstructions, source integral and global flux averages over the
/// extended grid. Arrays are indexed by extended cell; node arrays hold
/// `n_nodes` entries per cell. Only cells in `valid` carry data.
#[derive(Debug, Clone, Default)]
pub struct GlobalFluxField {
    pub n_nodes: usize,
    pub valid: Range<usize>,
    /// `G_i = (q_i, K_i)`.
    pub averages: Vec<[f64; 2]>,
    pub h_nodes: Vec<f64>,
    pub q_nodes: Vec<f64>,
    pub eta_nodes: Vec<f64>,
    pub b_nodes: Vec<f64>,
    pub r_nodes: Vec<f64>,
    /// `R^R_{i-1/2}`: trace of `R` at the left edge, seen from inside cell `i`.
    pub r_left: Vec<f64>,
    /// `R^L_{i+1/2}`: trace at the right edge, seen from inside cell `i`.
    pub r_right: Vec<f64>,
    /// `[[R]]_{i+1/2}` between cells `i` and `i + 1`.
    pub jumps: Vec<f64>,
    /// `(eta, b)` traces at the left and right edge of each cell.
    pub eta_edges: Vec<[f64; 2]>,
    pub b_edges: Vec<[f64; 2]>,
    increments: Vec<f64>,
    right_increments: Vec<f64>,
}

impl GlobalFluxField {
    pub fn new(grid: &Grid, rule: &QuadratureRule, order: usize) -> Self {
        let total = grid.total_cells();
        let n = rule.len();
        let r = order.div_ceil(2);
        let lo = r - 1;
        let hi = total + 1 - r;
        Self {
            n_nodes: n,
            valid: lo..hi,
            averages: vec![[0.0; 2]; total],
            h_nodes: vec![0.0; total * n],
            q_nodes: vec![0.0; total * n],
            eta_nodes: vec![0.0; total * n],
            b_nodes: vec![0.0; total * n],
            r_nodes: vec![0.0; total * n],
            r_left: vec![0.0; total],
            r_right: vec![0.0; total],
            jumps: vec![0.0; total],
            eta_edges: vec![[0.0; 2]; total],
            b_edges: vec![[0.0; 2]; total],
            increments: vec![0.0; total * n],
            right_increments: vec![0.0; total],
        }
    }

    fn nodes(v: &[f64], n: usize, cell: usize) -> &[f64] {
        &v[cell * n..(cell + 1) * n]
    }

    pub fn k_average(&self, cell: usize) -> f64 {
        self.averages[cell][1]
    }
}

/// Scratch space for [`assemble_global_flux_averages`].
#[derive(Debug, Clone, Default)]
pub struct NodeScratch {
    eta_bar: Vec<f64>,
    weights: WenoWeights,
    weights_q: WenoWeights,
}

/// Fills `field` from the state (halo already set). `recon` must evaluate at
/// the nodes of `rule`.
#[allow(clippy::too_many_arguments)]
pub fn assemble_global_flux_averages(
    state: &State,
    grid: &Grid,
    bathymetry: &Bathymetry,
    params: &PhysicalParams,
    rule: &QuadratureRule,
    recon: &WenoReconstructor,
    mode: SourceMode,
    field: &mut GlobalFluxField,
    scratch: &mut NodeScratch,
) -> Result<()> {
    let n = rule.len();
    let p = recon.width();
    let r = p.div_ceil(2);
    let g = params.g;
    let dx = grid.dx;
    let total = grid.total_cells();
    let valid = field.valid.clone();
    let b_bar = &bathymetry.cell_averages;
    scratch.eta_bar.clear();
    scratch
        .eta_bar
        .extend(state.h.iter().zip(b_bar.iter()).map(|(h, b)| h + b));
    let (left_row, right_row) = rule.edge_rows();

    for j in valid.clone() {
        let win = j + 1 - r..j + r;
        let nodes = j * n..(j + 1) * n;
        match mode {
            SourceMode::WellBalanced => {
                recon.compute_weights(&scratch.eta_bar[win.clone()], &mut scratch.weights);
                recon.apply(
                    &scratch.eta_bar[win.clone()],
                    &scratch.weights,
                    &mut field.eta_nodes[nodes.clone()],
                );
                recon.apply(
                    &state.h[win.clone()],
                    &scratch.weights,
                    &mut field.h_nodes[nodes.clone()],
                );
                recon.apply(
                    &b_bar[win.clone()],
                    &scratch.weights,
                    &mut field.b_nodes[nodes.clone()],
                );
            }
            SourceMode::Direct => {
                recon.compute_weights(&state.h[win.clone()], &mut scratch.weights);
                recon.apply(
                    &state.h[win.clone()],
                    &scratch.weights,
                    &mut field.h_nodes[nodes.clone()],
                );
                let b = bathymetry.nodes_of(j);
                field.b_nodes[nodes.clone()].copy_from_slice(b);
                for k in nodes.clone() {
                    field.eta_nodes[k] = field.h_nodes[k] + field.b_nodes[k];
                }
            }
        }
        recon.compute_weights(&state.q[win.clone()], &mut scratch.weights_q);
        recon.apply(
            &state.q[win],
            &scratch.weights_q,
            &mut field.q_nodes[nodes.clone()],
        );

        let h = &field.h_nodes[nodes.clone()];
        check_depths(j, h)?;
        let q = &field.q_nodes[nodes.clone()];
        let eta = &field.eta_nodes[nodes.clone()];
        let b = &field.b_nodes[nodes.clone()];
        field.right_increments[j] = match mode {
            SourceMode::WellBalanced => split_source_increments(
                rule,
                dx,
                eta,
                b,
                q,
                h,
                params,
                &mut field.increments[nodes.clone()],
            ),
            SourceMode::Direct => direct_source_increments(
                rule,
                dx,
                h,
                q,
                bathymetry.slopes_of(j),
                params,
                &mut field.increments[nodes.clone()],
            ),
        };
        field.eta_edges[j] = [dot(left_row, eta), dot(right_row, eta)];
        field.b_edges[j] = [dot(left_row, b), dot(right_row, b)];
    }

    let jump = |field: &GlobalFluxField, j: usize| -> f64 {
        match mode {
            SourceMode::WellBalanced => interface_jump(
                field.eta_edges[j][1],
                field.eta_edges[j + 1][0],
                field.b_edges[j][1],
                field.b_edges[j + 1][0],
                g,
            ),
            SourceMode::Direct => 0.0,
        }
    };

    // forward sweep from the physical left boundary
    let first = grid.n_ghost;
    field.r_left[first] = 0.0;
    for j in first..valid.end {
        field.r_right[j] = field.r_left[j] + field.right_increments[j];
        if j + 1 < valid.end {
            field.jumps[j] = jump(field, j);
            field.r_left[j + 1] = field.r_right[j] + field.jumps[j];
        }
    }
    // halo cells on the left, backwards
    for j in (valid.start..first).rev() {
        field.jumps[j] = jump(field, j);
        field.r_right[j] = field.r_left[j + 1] - field.jumps[j];
        field.r_left[j] = field.r_right[j] - field.right_increments[j];
    }

    for j in valid {
        let base = field.r_left[j];
        for k in j * n..(j + 1) * n {
            field.r_nodes[k] = base + field.increments[k];
        }
        let h = GlobalFluxField::nodes(&field.h_nodes, n, j);
        let q = GlobalFluxField::nodes(&field.q_nodes, n, j);
        let f = hyperbolic_flux_average(j, h, q, g, rule)?;
        let rbar = rule.average(GlobalFluxField::nodes(&field.r_nodes, n, j));
        field.averages[j] = [f[0], f[1] + rbar];
    }
    debug_assert!(field.averages.len() == total);
    Ok(())
}
