//! Explicit Deferred Correction time integration.
//!
//! A step of size `dt` is split by `M + 1` sub-time nodes. Each correction
//! sweep updates every sub-node from the previous iterate,
//! `y_m = y_n + dt sum_r theta[m][r] f(y_r)`, which is the closed form of
//! `L1(y^(k)) = L1(y^(k-1)) - L2(y^(k-1))` with explicit Euler `L1`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::grid::{Grid, PhysicalParams, State};
use crate::quadrature::{equispaced, gauss_lobatto};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeNodes {
    Equispaced,
    #[serde(alias = "lobatto")]
    GaussLobatto,
}

impl TimeNodes {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "equispaced" => Ok(Self::Equispaced),
            "lobatto" | "gauss_lobatto" => Ok(Self::GaussLobatto),
            other => Err(SolverError::Unknown {
                kind: "DeC node type",
                value: other.into(),
            }),
        }
    }
}

/// `theta[m][r] = int_0^{beta_m} l_r` on `[0, 1]` and `beta_m`, for `M + 1` sub-time nodes.
pub fn theta_coefficients(m: usize, nodes: TimeNodes) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if m < 1 {
        return Err(SolverError::InvalidParameter(
            "DeC needs at least one sub-interval".into(),
        ));
    }
    let rule = match nodes {
        TimeNodes::Equispaced => equispaced(m + 1)?,
        TimeNodes::GaussLobatto => gauss_lobatto(m + 1)?,
    };
    Ok((rule.tableau().to_vec(), rule.nodes().to_vec()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecScheme {
    pub subintervals: usize,
    pub nodes: TimeNodes,
    pub iterations: usize,
    pub theta: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
}

impl DecScheme {
    pub fn new(subintervals: usize, nodes: TimeNodes, iterations: usize) -> Result<Self> {
        if iterations < 1 {
            return Err(SolverError::InvalidParameter(
                "DeC needs at least one correction".into(),
            ));
        }
        let (theta, beta) = theta_coefficients(subintervals, nodes)?;
        Ok(Self {
            subintervals,
            nodes,
            iterations,
            theta,
            beta,
        })
    }

    /// Default pairing for a target order `p`: `K = p` corrections,
    /// `M = p - 1` equispaced or the fewest Gauss-Lobatto sub-intervals.
    pub fn for_order(p: usize, nodes: TimeNodes) -> Result<Self> {
        if p < 1 {
            return Err(SolverError::InvalidParameter(
                "order must be positive".into(),
            ));
        }
        let m = match nodes {
            TimeNodes::Equispaced => (p - 1).max(1),
            TimeNodes::GaussLobatto => p.div_ceil(2).max(1),
        };
        Self::new(m, nodes, p)
    }

    /// Formal order of accuracy.
    pub fn order(&self) -> usize {
        let collocation = match self.nodes {
            TimeNodes::Equispaced => self.subintervals + 1,
            TimeNodes::GaussLobatto => 2 * self.subintervals,
        };
        self.iterations.min(collocation)
    }
}

/// Stage storage reused across steps.
#[derive(Debug, Clone, Default)]
pub struct DecWorkspace {
    stages: Vec<Vec<f64>>,
    rhs: Vec<Vec<f64>>,
}

impl DecWorkspace {
    /// `f(y_n)` from the last step.
    pub fn initial_rhs(&self) -> &[f64] {
        self.rhs.first().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

impl DecScheme {
    /// Advances `y` by `dt` in place.
    pub fn step<F>(&self, y: &mut [f64], dt: f64, mut f: F, ws: &mut DecWorkspace) -> Result<()>
    where
        F: FnMut(&[f64], &mut [f64]) -> Result<()>,
    {
        let n = y.len();
        let m = self.subintervals;
        ws.stages.resize_with(m + 1, Vec::new);
        ws.rhs.resize_with(m + 1, Vec::new);
        for s in ws.stages.iter_mut().chain(ws.rhs.iter_mut()) {
            s.resize(n, 0.0);
        }
        f(y, &mut ws.rhs[0])?;
        for r in 1..=m {
            let (first, rest) = ws.rhs.split_at_mut(1);
            rest[r - 1].copy_from_slice(&first[0]);
        }
        for k in 0..self.iterations {
            if k > 0 {
                for r in 1..=m {
                    f(&ws.stages[r], &mut ws.rhs[r])?;
                }
            }
            for s in 1..=m {
                let row = &self.theta[s];
                let stage = &mut ws.stages[s];
                for i in 0..n {
                    let mut acc = 0.0;
                    for (r, th) in row.iter().enumerate() {
                        acc += th * ws.rhs[r][i];
                    }
                    stage[i] = y[i] + dt * acc;
                }
            }
        }
        y.copy_from_slice(&ws.stages[m]);
        Ok(())
    }
}

/// `cfl dx / max(|u| + sqrt(g h))` over the physical cells.
pub fn cfl_timestep(state: &State, grid: &Grid, params: &PhysicalParams, cfl: f64) -> Result<f64> {
    let mut smax: f64 = 0.0;
    for i in grid.interior() {
        let h = state.h[i];
        if !(h > 0.0) {
            return Err(SolverError::NonPositiveDepth {
                cell: i - grid.n_ghost,
                value: h,
            });
        }
        smax = smax.max((state.q[i] / h).abs() + (params.g * h).sqrt());
    }
    if !(smax > 0.0) || !smax.is_finite() {
        return Err(SolverError::VanishingWaveSpeed);
    }
    Ok(cfl * grid.dx / smax)
}

/// Shortens `dt` so that `t + dt` does not pass `t_end`.
pub fn clamp_to_end(t: f64, dt: f64, t_end: f64) -> f64 {
    if t + dt > t_end {
        t_end - t
    } else {
        dt
    }
}
