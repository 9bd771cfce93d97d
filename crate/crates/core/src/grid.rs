//! Uniform 1D grid, conserved-variable cell averages, bathymetry sampling and
//! ghost-cell management.
//!
//! All per-cell arrays cover the full extended grid: `n_ghost` halo cells on
//! the left, the `n_cells` physical cells, then `n_ghost` halo cells on the
//! right. Index `i` of an extended array is the cell centred at
//! `x_left + (i - n_ghost + 1/2) dx`.

use std::ops::{Deref, DerefMut, Range};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::quadrature::QuadratureRule;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x_left: f64,
    pub x_right: f64,
    pub n_cells: usize,
    pub dx: f64,
    pub n_ghost: usize,
}

impl Grid {
    pub fn new(x_left: f64, x_right: f64, n_cells: usize, n_ghost: usize) -> Result<Self> {
        if !(x_left.is_finite() && x_right.is_finite()) || x_right <= x_left {
            return Err(SolverError::InvalidGrid(format!(
                "domain [{x_left}, {x_right}] has non-positive extent"
            )));
        }
        if n_cells == 0 {
            return Err(SolverError::InvalidGrid("zero cells".into()));
        }
        let dx = (x_right - x_left) / n_cells as f64;
        Ok(Self {
            x_left,
            x_right,
            n_cells,
            dx,
            n_ghost,
        })
    }

    /// Number of cells including both halos.
    pub fn total_cells(&self) -> usize {
        self.n_cells + 2 * self.n_ghost
    }

    /// Extended indices of the physical cells.
    pub fn interior(&self) -> Range<usize> {
        self.n_ghost..self.n_ghost + self.n_cells
    }

    /// Centre of the physical cell `i` (0-based, no halo offset).
    pub fn cell_center(&self, i: usize) -> f64 {
        self.x_left + (i as f64 + 0.5) * self.dx
    }

    /// Left edge of an extended-array cell (may lie outside the domain for halo cells).
    pub fn cell_left_edge(&self, extended: usize) -> f64 {
        self.x_left + (extended as f64 - self.n_ghost as f64) * self.dx
    }

    /// Centre of an extended-array cell.
    pub fn extended_center(&self, extended: usize) -> f64 {
        self.x_left + (extended as f64 - self.n_ghost as f64 + 0.5) * self.dx
    }

    /// Physical cell centres, in order.
    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.cell_center(i)).collect()
    }
}

/// Per-cell averages of a scalar quantity over the extended grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellField(pub Vec<f64>);

impl CellField {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn filled(len: usize, value: f64) -> Self {
        Self(vec![value; len])
    }
}

impl Deref for CellField {
    type Target = Vec<f64>;
    fn deref(&self) -> &Vec<f64> {
        &self.0
    }
}

impl DerefMut for CellField {
    fn deref_mut(&mut self) -> &mut Vec<f64> {
        &mut self.0
    }
}

/// Conserved variables: water depth and discharge cell averages.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub h: CellField,
    pub q: CellField,
}

impl State {
    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.total_cells();
        Self {
            h: CellField::zeros(n),
            q: CellField::zeros(n),
        }
    }

    /// Builds a state from physical-cell values; halos are left at zero.
    pub fn from_interior(grid: &Grid, h: &[f64], q: &[f64]) -> Result<Self> {
        if h.len() != grid.n_cells {
            return Err(SolverError::SizeMismatch(h.len(), grid.n_cells));
        }
        if q.len() != grid.n_cells {
            return Err(SolverError::SizeMismatch(q.len(), grid.n_cells));
        }
        let mut state = Self::zeros(grid);
        state.h[grid.interior()].copy_from_slice(h);
        state.q[grid.interior()].copy_from_slice(q);
        Ok(state)
    }

    pub fn interior_h<'a>(&'a self, grid: &Grid) -> &'a [f64] {
        &self.h[grid.interior()]
    }

    pub fn interior_q<'a>(&'a self, grid: &Grid) -> &'a [f64] {
        &self.q[grid.interior()]
    }

    /// Packs the physical cells as `[h_0..h_{N-1}, q_0..q_{N-1}]`.
    pub fn to_vector(&self, grid: &Grid) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * grid.n_cells);
        y.extend_from_slice(self.interior_h(grid));
        y.extend_from_slice(self.interior_q(grid));
        y
    }

    /// Inverse of [`State::to_vector`]; halo cells are untouched.
    pub fn load_vector(&mut self, grid: &Grid, y: &[f64]) {
        let n = grid.n_cells;
        let r = grid.interior();
        self.h[r.clone()].copy_from_slice(&y[..n]);
        self.q[r].copy_from_slice(&y[n..2 * n]);
    }

    /// Fails on the first physical cell whose depth is not strictly positive.
    pub fn check_positive(&self, grid: &Grid) -> Result<()> {
        for i in grid.interior() {
            let h = self.h[i];
            if !(h > 0.0) {
                return Err(SolverError::NonPositiveDepth {
                    cell: i - grid.n_ghost,
                    value: h,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub g: f64,
    pub n_manning: f64,
}

impl PhysicalParams {
    pub fn new(g: f64, n_manning: f64) -> Result<Self> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(SolverError::InvalidParameter(format!(
                "gravity g = {g} must be positive"
            )));
        }
        if !(n_manning >= 0.0) || !n_manning.is_finite() {
            return Err(SolverError::InvalidParameter(format!(
                "Manning coefficient n = {n_manning} must be non-negative"
            )));
        }
        Ok(Self { g, n_manning })
    }
}

/// Analytic bottom elevation profiles used by the benchmark catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BathymetryProfile {
    Flat,
    /// `amplitude * sin(x - center) * exp(1 - (x - center)^2)`
    DampedSine {
        amplitude: f64,
        center: f64,
    },
    /// `amplitude * exp(1 - 1 / (1 - ((x - center) / half_width)^2))` inside the support, zero outside.
    CompactBump {
        amplitude: f64,
        center: f64,
        half_width: f64,
    },
    /// `height` on the open interval `(start, end)`, zero elsewhere.
    Step {
        start: f64,
        end: f64,
        height: f64,
    },
    /// `sum_k coeffs[k] * x^k`
    Polynomial {
        coeffs: Vec<f64>,
    },
}

impl BathymetryProfile {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Flat => 0.0,
            Self::DampedSine { amplitude, center } => {
                let s = x - center;
                amplitude * s.sin() * (1.0 - s * s).exp()
            }
            Self::CompactBump {
                amplitude,
                center,
                half_width,
            } => {
                let z = (x - center) / half_width;
                if z.abs() < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - z * z)).exp()
                } else {
                    0.0
                }
            }
            Self::Step { start, end, height } => {
                if *start < x && x < *end {
                    *height
                } else {
                    0.0
                }
            }
            Self::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }

    /// Analytic derivative `b'(x)`; zero away from the jumps of a step.
    pub fn slope(&self, x: f64) -> f64 {
        match self {
            Self::Flat | Self::Step { .. } => 0.0,
            Self::DampedSine { amplitude, center } => {
                let s = x - center;
                amplitude * (1.0 - s * s).exp() * (s.cos() - 2.0 * s * s.sin())
            }
            Self::CompactBump {
                amplitude,
                center,
                half_width,
            } => {
                let z = (x - center) / half_width;
                if z.abs() < 1.0 {
                    let d = 1.0 - z * z;
                    let v = amplitude * (1.0 - 1.0 / d).exp();
                    // d/dx [1 - 1/d] = -2 z / (d^2 w)
                    v * (-2.0 * z / (d * d * half_width))
                } else {
                    0.0
                }
            }
            Self::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c),
        }
    }

    pub fn is_discontinuous(&self) -> bool {
        matches!(self, Self::Step { .. })
    }

    /// Samples the profile at `x` seen from inside the cell `[lo, hi]`: at a
    /// jump located on a cell edge the one-sided limit from the cell interior
    /// is returned.
    pub fn value_in_cell(&self, x: f64, lo: f64, hi: f64) -> f64 {
        if let Self::Step { start, end, height } = self {
            let inside = |y: f64| if *start < y && y < *end { *height } else { 0.0 };
            if x <= lo {
                // right limit
                return if *start <= x && x < *end {
                    *height
                } else {
                    0.0
                };
            }
            if x >= hi {
                // left limit
                return if *start < x && x <= *end {
                    *height
                } else {
                    0.0
                };
            }
            return inside(x);
        }
        self.value(x)
    }
}

/// Bathymetry sampled on the grid: cell averages and in-cell node values.
#[derive(Debug, Clone)]
pub struct Bathymetry {
    pub profile: BathymetryProfile,
    /// Cell averages over the extended grid, computed with the in-cell rule.
    pub cell_averages: CellField,
    /// `node_values[i * n_nodes + k]`: analytic value at node `k` of extended cell `i`.
    pub node_values: Vec<f64>,
    /// Analytic slope at the same nodes.
    pub node_slopes: Vec<f64>,
    pub n_nodes: usize,
}

impl Bathymetry {
    pub fn new(profile: BathymetryProfile, grid: &Grid, rule: &QuadratureRule) -> Self {
        let n_nodes = rule.len();
        let total = grid.total_cells();
        let mut node_values = Vec::with_capacity(total * n_nodes);
        let mut node_slopes = Vec::with_capacity(total * n_nodes);
        let mut averages = CellField::zeros(total);
        for i in 0..total {
            let lo = grid.cell_left_edge(i);
            let hi = lo + grid.dx;
            let start = node_values.len();
            for &xi in rule.nodes() {
                let x = lo + xi * grid.dx;
                node_values.push(profile.value_in_cell(x, lo, hi));
                node_slopes.push(profile.slope(x));
            }
            averages[i] = rule.average(&node_values[start..]);
        }
        Self {
            profile,
            cell_averages: averages,
            node_values,
            node_slopes,
            n_nodes,
        }
    }

    pub fn nodes_of(&self, cell: usize) -> &[f64] {
        &self.node_values[cell * self.n_nodes..(cell + 1) * self.n_nodes]
    }

    pub fn slopes_of(&self, cell: usize) -> &[f64] {
        &self.node_slopes[cell * self.n_nodes..(cell + 1) * self.n_nodes]
    }

    /// Free-surface cell averages `eta = h + b`.
    pub fn free_surface(&self, state: &State) -> CellField {
        CellField(
            state
                .h
                .iter()
                .zip(self.cell_averages.iter())
                .map(|(h, b)| h + b)
                .collect(),
        )
    }
}

/// Ghost-cell policy at one end of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    /// Subcritical inflow: discharge imposed, depth extrapolated.
    Discharge { q: f64 },
    /// Subcritical outflow: depth imposed, discharge extrapolated.
    Depth { h: f64 },
    /// Supercritical inflow: both imposed.
    State { h: f64, q: f64 },
    /// Supercritical outflow: zeroth-order extrapolation of both.
    Extrapolate,
    /// Equilibrium extension of a lake at rest, `h = eta - b`, `q = 0`.
    LakeAtRest { eta: f64 },
}

impl Boundary {
    pub fn parse(kind: &str, values: &[f64]) -> Result<Self> {
        let need = |n: usize| -> Result<()> {
            if values.len() == n {
                Ok(())
            } else {
                Err(SolverError::InvalidParameter(format!(
                    "boundary {kind} expects {n} values, got {}",
                    values.len()
                )))
            }
        };
        match kind {
            "discharge" => need(1).map(|_| Self::Discharge { q: values[0] }),
            "depth" => need(1).map(|_| Self::Depth { h: values[0] }),
            "state" => need(2).map(|_| Self::State {
                h: values[0],
                q: values[1],
            }),
            "extrapolate" => need(0).map(|_| Self::Extrapolate),
            "lake_at_rest" => need(1).map(|_| Self::LakeAtRest { eta: values[0] }),
            other => Err(SolverError::Unknown {
                kind: "boundary type",
                value: other.into(),
            }),
        }
    }

    fn fill(
        &self,
        state: &mut State,
        bathymetry: &Bathymetry,
        ghosts: Range<usize>,
        nearest: usize,
    ) {
        let h_in = state.h[nearest];
        let q_in = state.q[nearest];
        for i in ghosts {
            let (h, q) = match *self {
                Boundary::Discharge { q } => (h_in, q),
                Boundary::Depth { h } => (h, q_in),
                Boundary::State { h, q } => (h, q),
                Boundary::Extrapolate => (h_in, q_in),
                Boundary::LakeAtRest { eta } => (eta - bathymetry.cell_averages[i], 0.0),
            };
            state.h[i] = h;
            state.q[i] = q;
        }
    }
}

/// Fills both halos from the physical cells according to the boundary policies.
pub fn apply_boundary(
    state: &mut State,
    grid: &Grid,
    bathymetry: &Bathymetry,
    left: &Boundary,
    right: &Boundary,
) {
    let g = grid.n_ghost;
    let n = grid.n_cells;
    left.fill(state, bathymetry, 0..g, g);
    right.fill(state, bathymetry, g + n..n + 2 * g, g + n - 1);
}
