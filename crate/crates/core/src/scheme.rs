//! Semi-discrete operators `dU/dt = -(H_{i+1/2} - H_{i-1/2}) / dx (+ S_i)`
//! for the global flux schemes and the classical WENO + Rusanov scheme.
//!
//! Solution vectors hold the physical cells only, `[h_0..h_{N-1}, q_0..q_{N-1}]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::global_flux::{assemble_global_flux_averages, GlobalFluxField, NodeScratch, SourceMode};
use crate::grid::{
    apply_boundary, Bathymetry, BathymetryProfile, Boundary, Grid, PhysicalParams, State,
};
use crate::numerical_flux::{recover_depth, rusanov_flux, upwind_global_flux, RoeState};
use crate::quadrature::{gauss_legendre, gauss_lobatto, QuadratureRule};
use crate::weno::{WenoConfig, WenoOrder, WenoReconstructor, WenoWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    GfWb,
    GfNonwb,
    Classical,
}

impl SchemeKind {
    pub fn is_global_flux(self) -> bool {
        !matches!(self, Self::Classical)
    }

    fn source_mode(self) -> SourceMode {
        match self {
            Self::GfWb => SourceMode::WellBalanced,
            _ => SourceMode::Direct,
        }
    }
}

impl FromStr for SchemeKind {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gf_wb" => Ok(Self::GfWb),
            "gf_nonwb" => Ok(Self::GfNonwb),
            "classical" => Ok(Self::Classical),
            other => Err(SolverError::Unknown {
                kind: "scheme",
                value: other.into(),
            }),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::GfWb => "gf_wb",
            Self::GfNonwb => "gf_nonwb",
            Self::Classical => "classical",
        })
    }
}

/// Number of source quadrature nodes of the classical scheme.
const CLASSICAL_SOURCE_NODES: usize = 5;

#[derive(Debug, Clone)]
pub struct SpatialOperator {
    pub kind: SchemeKind,
    pub order: WenoOrder,
    pub grid: Grid,
    pub params: PhysicalParams,
    pub bathymetry: Bathymetry,
    pub left: Boundary,
    pub right: Boundary,
    rule: QuadratureRule,
    node_recon: WenoReconstructor,
    edge_recon: WenoReconstructor,
    source_rule: QuadratureRule,
    source_recon: WenoReconstructor,
    source_slopes: Vec<f64>,
    field: GlobalFluxField,
    scratch: NodeScratch,
    state: State,
    fluxes: Vec<[f64; 2]>,
    weights: WenoWeights,
    buf: Vec<f64>,
    buf2: Vec<f64>,
}

impl SpatialOperator {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: SchemeKind,
        order: WenoOrder,
        x_left: f64,
        x_right: f64,
        n_cells: usize,
        profile: BathymetryProfile,
        params: PhysicalParams,
        left: Boundary,
        right: Boundary,
    ) -> Result<Self> {
        let p = order.order();
        let r = order.substencils();
        let grid = Grid::new(x_left, x_right, n_cells, p)?;
        let rule = gauss_lobatto(r + 1)?;
        let bathymetry = Bathymetry::new(profile, &grid, &rule);
        let node_recon = WenoReconstructor::new(WenoConfig::new(order, rule.nodes()))?;
        let edge_recon = WenoReconstructor::new(WenoConfig::new(order, &[0.0, 1.0]))?;
        let source_rule = gauss_legendre(CLASSICAL_SOURCE_NODES)?;
        let source_recon = WenoReconstructor::new(WenoConfig::new(order, source_rule.nodes()))?;
        let mut source_slopes = Vec::with_capacity(grid.total_cells() * CLASSICAL_SOURCE_NODES);
        for i in 0..grid.total_cells() {
            let lo = grid.cell_left_edge(i);
            for &xi in source_rule.nodes() {
                source_slopes.push(bathymetry.profile.slope(lo + xi * grid.dx));
            }
        }
        let field = GlobalFluxField::new(&grid, &rule, p);
        let state = State::zeros(&grid);
        Ok(Self {
            kind,
            order,
            params,
            bathymetry,
            left,
            right,
            rule,
            node_recon,
            edge_recon,
            source_rule,
            source_recon,
            source_slopes,
            field,
            scratch: NodeScratch::default(),
            state,
            fluxes: vec![[0.0; 2]; n_cells + 1],
            weights: WenoWeights::default(),
            buf: vec![0.0; 2],
            buf2: vec![0.0; 2],
            grid,
        })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Length of a solution vector.
    pub fn len(&self) -> usize {
        2 * self.grid.n_cells
    }

    pub fn is_empty(&self) -> bool {
        self.grid.n_cells == 0
    }

    /// Extended state with halo filled from the interior vector `y`.
    pub fn load(&mut self, y: &[f64]) -> &State {
        self.state.load_vector(&self.grid, y);
        apply_boundary(
            &mut self.state,
            &self.grid,
            &self.bathymetry,
            &self.left,
            &self.right,
        );
        &self.state
    }

    /// Extended state of the last evaluation.
    pub fn state(&self) -> &State {
        &self.state
    }

    /// Global flux data of the last residual evaluation.
    pub fn field(&self) -> &GlobalFluxField {
        &self.field
    }

    /// Interface fluxes of the last residual evaluation, `N + 1` entries.
    pub fn fluxes(&self) -> &[[f64; 2]] {
        &self.fluxes
    }

    /// `K_i` of the physical cells from the last evaluation.
    pub fn k_averages(&self) -> Vec<f64> {
        self.grid
            .interior()
            .map(|i| self.field.averages[i][1])
            .collect()
    }

    /// Builds the global flux field for `y` without computing fluxes.
    pub fn global_flux(&mut self, y: &[f64]) -> Result<&GlobalFluxField> {
        if !self.kind.is_global_flux() {
            return Err(SolverError::InvalidParameter(
                "the classical scheme has no global flux".into(),
            ));
        }
        self.load(y);
        self.state.check_positive(&self.grid)?;
        self.assemble()?;
        Ok(&self.field)
    }

    fn assemble(&mut self) -> Result<()> {
        assemble_global_flux_averages(
            &self.state,
            &self.grid,
            &self.bathymetry,
            &self.params,
            &self.rule,
            &self.node_recon,
            self.kind.source_mode(),
            &mut self.field,
            &mut self.scratch,
        )
    }

    /// `dU/dt` for the interior vector `y`.
    pub fn residual(&mut self, y: &[f64], out: &mut [f64]) -> Result<()> {
        if y.len() != self.len() || out.len() != self.len() {
            return Err(SolverError::SizeMismatch(y.len(), self.len()));
        }
        self.load(y);
        self.state.check_positive(&self.grid)?;
        match self.kind {
            SchemeKind::Classical => self.classical_residual(out)?,
            _ => {
                self.assemble()?;
                self.flux_residual(out)?;
            }
        }
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite(format!("residual entry {i}")));
        }
        Ok(())
    }

    /// Residual computed from prescribed global flux averages `G_i` on the
    /// extended grid, with the auxiliary traces (`R`, `eta`, `b`) taken from `y`.
    pub fn residual_with_global_averages(
        &mut self,
        y: &[f64],
        averages: &[[f64; 2]],
        out: &mut [f64],
    ) -> Result<()> {
        self.global_flux(y)?;
        if averages.len() != self.field.averages.len() {
            return Err(SolverError::SizeMismatch(
                averages.len(),
                self.field.averages.len(),
            ));
        }
        self.field.averages.copy_from_slice(averages);
        self.flux_residual(out)
    }

    fn flux_residual(&mut self, out: &mut [f64]) -> Result<()> {
        let n = self.grid.n_cells;
        let first = self.grid.n_ghost;
        let p = self.order.order();
        let r = self.order.substencils();
        let g = self.params.g;
        let mut comp = [vec![0.0; p], vec![0.0; p]];
        // traces of G at the left and right edge of cells first-1 ..= first+n
        let mut edges = vec![[[0.0; 2]; 2]; n + 2];
        for (slot, j) in (first - 1..=first + n).enumerate() {
            for c in 0..2 {
                for (w, k) in comp[c].iter_mut().zip(j + 1 - r..j + r) {
                    *w = self.field.averages[k][c];
                }
                self.edge_recon.compute_weights(&comp[c], &mut self.weights);
                self.edge_recon
                    .apply(&comp[c], &self.weights, &mut self.buf);
                edges[slot][0][c] = self.buf[0];
                edges[slot][1][c] = self.buf[1];
            }
        }
        for k in 0..=n {
            let jl = first - 1 + k;
            let jr = jl + 1;
            let gl = edges[k][1];
            let gr = edges[k + 1][0];
            let f = &self.field;
            let side = |q: f64, kk: f64, rr: f64, eta: f64, b: f64| {
                recover_depth(q, kk, rr, eta, b, g).map_err(|e| match e {
                    SolverError::DepthRecovery { fallback, .. } => SolverError::DepthRecovery {
                        interface: k,
                        fallback,
                    },
                    other => other,
                })
            };
            let hl = side(
                gl[0],
                gl[1],
                f.r_right[jl],
                f.eta_edges[jl][1],
                f.b_edges[jl][1],
            )?
            .h;
            let hr = side(
                gr[0],
                gr[1],
                f.r_left[jr],
                f.eta_edges[jr][0],
                f.b_edges[jr][0],
            )?
            .h;
            let roe = RoeState::new(hl, gl[0] / hl, hr, gr[0] / hr, g)?;
            self.fluxes[k] = upwind_global_flux(gl, gr, &roe);
        }
        self.divergence(out);
        Ok(())
    }

    fn divergence(&self, out: &mut [f64]) {
        let n = self.grid.n_cells;
        let dx = self.grid.dx;
        for i in 0..n {
            out[i] = -(self.fluxes[i + 1][0] - self.fluxes[i][0]) / dx;
            out[n + i] = -(self.fluxes[i + 1][1] - self.fluxes[i][1]) / dx;
        }
    }

    fn classical_residual(&mut self, out: &mut [f64]) -> Result<()> {
        let n = self.grid.n_cells;
        let first = self.grid.n_ghost;
        let r = self.order.substencils();
        let g = self.params.g;
        let mut edges = vec![[[0.0; 2]; 2]; n + 2];
        for (slot, j) in (first - 1..=first + n).enumerate() {
            let win = j + 1 - r..j + r;
            for (c, data) in [&self.state.h, &self.state.q].into_iter().enumerate() {
                self.edge_recon
                    .compute_weights(&data[win.clone()], &mut self.weights);
                self.edge_recon
                    .apply(&data[win.clone()], &self.weights, &mut self.buf);
                edges[slot][0][c] = self.buf[0];
                edges[slot][1][c] = self.buf[1];
            }
        }
        for k in 0..=n {
            self.fluxes[k] =
                rusanov_flux(edges[k][1], edges[k + 1][0], g).map_err(|e| match e {
                    SolverError::NonPositiveDepth { value, .. } => {
                        SolverError::NonPositiveDepth { cell: k, value }
                    }
                    other => other,
                })?;
        }
        self.divergence(out);
        let m = self.source_rule.len();
        self.buf.resize(m, 0.0);
        self.buf2.resize(m, 0.0);
        let nm = self.params.n_manning;
        for i in 0..n {
            let j = first + i;
            let win = j + 1 - r..j + r;
            self.source_recon
                .compute_weights(&self.state.h[win.clone()], &mut self.weights);
            self.source_recon
                .apply(&self.state.h[win.clone()], &self.weights, &mut self.buf);
            self.source_recon
                .compute_weights(&self.state.q[win.clone()], &mut self.weights);
            self.source_recon
                .apply(&self.state.q[win], &self.weights, &mut self.buf2);
            let slopes = &self.source_slopes[j * m..(j + 1) * m];
            let mut s = 0.0;
            for t in 0..m {
                let h = self.buf[t];
                if !(h > 0.0) {
                    return Err(SolverError::NonPositiveNodeDepth {
                        cell: i,
                        node: t,
                        value: h,
                    });
                }
                let mut v = -g * h * slopes[t];
                if nm > 0.0 {
                    let q = self.buf2[t];
                    v -= g * nm * nm * q * q.abs() / h.powf(7.0 / 3.0);
                }
                s += self.source_rule.weights()[t] * v;
            }
            out[n + i] += s;
        }
        self.buf.resize(2, 0.0);
        Ok(())
    }
}
