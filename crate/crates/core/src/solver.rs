//! Time-stepping driver: builds the initial state of a case, advances it with
//! DeC, and reports errors and invariant drift.

use serde::{Deserialize, Serialize};

use crate::cases::{
    compute_errors, eoa, find_case, reference_averages, CaseSpec, ErrorReport, InitialCondition,
};
use crate::dec::{cfl_timestep, clamp_to_end, DecScheme, DecWorkspace, TimeNodes};
use crate::error::{Result, SolverError};
use crate::grid::PhysicalParams;
use crate::scheme::{SchemeKind, SpatialOperator};
use crate::weno::WenoOrder;

pub const DEFAULT_CFL: f64 = 0.4;
pub const STEADY_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub scheme: SchemeKind,
    pub order: usize,
    pub n_cells: usize,
    pub cfl: f64,
    /// Overrides the case's final time.
    pub t_end: Option<f64>,
    pub dec_nodes: TimeNodes,
    /// Overrides the case's snapshot times.
    pub snapshots: Option<Vec<f64>>,
    /// Stop steady cases once `||dU/dt||_2` drops below this.
    pub steady_tolerance: f64,
    pub max_steps: Option<usize>,
}

impl SimulationConfig {
    pub fn new(scheme: SchemeKind, order: usize, n_cells: usize) -> Self {
        Self {
            scheme,
            order,
            n_cells,
            cfl: DEFAULT_CFL,
            t_end: None,
            dec_nodes: TimeNodes::Equispaced,
            snapshots: None,
            steady_tolerance: STEADY_TOLERANCE,
            max_steps: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        WenoOrder::from_order(self.order)?;
        if self.n_cells == 0 {
            return Err(SolverError::InvalidGrid("zero cells".into()));
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(SolverError::InvalidParameter(format!(
                "cfl {} must be positive",
                self.cfl
            )));
        }
        if let Some(t) = self.t_end {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(SolverError::InvalidParameter(format!(
                    "final time {t} must be non-negative"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub case: String,
    pub scheme: SchemeKind,
    pub order: usize,
    pub n_cells: usize,
    pub t_final: f64,
    pub steps: usize,
    pub converged: bool,
    pub residual_norm: f64,
    pub errors: ErrorReport,
    /// `max |h - h_eq|` over all recorded times, for perturbed cases.
    pub max_perturbation: Option<f64>,
}

pub struct Simulation {
    pub case: CaseSpec,
    pub config: SimulationConfig,
    op: SpatialOperator,
    dec: DecScheme,
    ws: DecWorkspace,
    y: Vec<f64>,
    t: f64,
    t_end: f64,
    steps: usize,
    residual_norm: f64,
    h_eq: Option<Vec<f64>>,
    max_perturbation: Option<f64>,
}

impl Simulation {
    pub fn new(case: CaseSpec, config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let order = WenoOrder::from_order(config.order)?;
        let params = PhysicalParams::new(case.g, case.n_manning)?;
        let op = SpatialOperator::new(
            config.scheme,
            order,
            case.x_left,
            case.x_right,
            config.n_cells,
            case.bathymetry.clone(),
            params,
            case.left,
            case.right,
        )?;
        let dec = DecScheme::for_order(config.order, config.dec_nodes)?;
        let t_end = config.t_end.unwrap_or(case.t_end);
        let mut sim = Self {
            case,
            config,
            op,
            dec,
            ws: DecWorkspace::default(),
            y: vec![],
            t: 0.0,
            t_end,
            steps: 0,
            residual_norm: f64::NAN,
            h_eq: None,
            max_perturbation: None,
        };
        let (y, base_h) = sim.initial_vector()?;
        sim.y = y;
        if let Some(p) = sim.case.perturbation {
            let n = sim.op.grid.n_cells;
            let grid = sim.op.grid.clone();
            let rule = sim.op.rule().clone();
            let mut vals = vec![0.0; rule.len()];
            for i in 0..n {
                let lo = grid.cell_left_edge(i + grid.n_ghost);
                for (v, xi) in vals.iter_mut().zip(rule.nodes()) {
                    *v = p.value(lo + xi * grid.dx);
                }
                sim.y[i] += rule.average(&vals);
            }
            sim.h_eq = Some(base_h);
            sim.record_perturbation();
        }
        Ok(sim)
    }

    /// Unperturbed initial vector and its depth.
    fn initial_vector(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let grid = &self.op.grid;
        let b_bar = &self.op.bathymetry.cell_averages;
        let n = grid.n_cells;
        let y = match &self.case.initial {
            InitialCondition::LakeAtRest { eta } => {
                let mut y: Vec<f64> = grid.interior().map(|i| eta - b_bar[i]).collect();
                y.extend(std::iter::repeat_n(0.0, n));
                y
            }
            InitialCondition::Level { level, q } => {
                let mut y: Vec<f64> = grid.interior().map(|i| level - b_bar[i]).collect();
                y.extend(std::iter::repeat_n(*q, n));
                y
            }
            InitialCondition::SteadyOf { case } => {
                let base_case = find_case(case)?;
                let mut cfg = self.config.clone();
                cfg.t_end = None;
                cfg.snapshots = Some(vec![]);
                let mut base = Simulation::new(base_case, cfg)?;
                base.run(|_, _| Ok(()))?;
                base.y
            }
        };
        let h = y[..n].to_vec();
        Ok((y, h))
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn operator(&self) -> &SpatialOperator {
        &self.op
    }

    pub fn vector(&self) -> &[f64] {
        &self.y
    }

    /// Replaces the solution vector, e.g. to restart from a known state.
    pub fn set_vector(&mut self, y: &[f64]) -> Result<()> {
        if y.len() != self.y.len() {
            return Err(SolverError::SizeMismatch(y.len(), self.y.len()));
        }
        self.y.copy_from_slice(y);
        Ok(())
    }

    pub fn x(&self) -> Vec<f64> {
        self.op.grid.centers()
    }

    pub fn h(&self) -> &[f64] {
        &self.y[..self.op.grid.n_cells]
    }

    pub fn q(&self) -> &[f64] {
        &self.y[self.op.grid.n_cells..]
    }

    pub fn b(&self) -> Vec<f64> {
        self.op
            .grid
            .interior()
            .map(|i| self.op.bathymetry.cell_averages[i])
            .collect()
    }

    pub fn h_eq(&self) -> Option<&[f64]> {
        self.h_eq.as_deref()
    }

    /// `K_i` of the current state (global flux schemes only).
    pub fn k(&mut self) -> Result<Option<Vec<f64>>> {
        if !self.config.scheme.is_global_flux() {
            return Ok(None);
        }
        let y = self.y.clone();
        self.op.global_flux(&y)?;
        Ok(Some(self.op.k_averages()))
    }

    /// `h - h_eq`, or `h - h_ref` when there is a reference, else zeros.
    pub fn perturbation_field(&self) -> Vec<f64> {
        let h = self.h();
        if let Some(eq) = &self.h_eq {
            return h.iter().zip(eq).map(|(a, b)| a - b).collect();
        }
        let b_bar = &self.op.bathymetry.cell_averages;
        match reference_averages(&self.case, &self.op.grid, self.op.rule(), b_bar) {
            Ok((hr, _)) => h.iter().zip(&hr).map(|(a, b)| a - b).collect(),
            Err(_) => vec![0.0; h.len()],
        }
    }

    fn record_perturbation(&mut self) {
        if let Some(eq) = &self.h_eq {
            let m = self
                .h()
                .iter()
                .zip(eq)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            self.max_perturbation = Some(self.max_perturbation.map_or(m, |p: f64| p.max(m)));
        }
    }

    /// `||dU/dt||_2` of the current state.
    pub fn residual_norm(&mut self) -> Result<f64> {
        let mut out = vec![0.0; self.y.len()];
        let y = self.y.clone();
        self.op.residual(&y, &mut out)?;
        Ok(self.norm(&out))
    }

    fn norm(&self, v: &[f64]) -> f64 {
        (self.op.grid.dx * v.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }

    /// Advances by at most `max_dt`; returns the step taken.
    pub fn step(&mut self, max_dt: f64) -> Result<f64> {
        self.op.load(&self.y);
        let dt = cfl_timestep(
            self.op.state(),
            &self.op.grid,
            &self.op.params,
            self.config.cfl,
        )?
        .min(max_dt);
        let op = &mut self.op;
        self.dec
            .step(&mut self.y, dt, |y, out| op.residual(y, out), &mut self.ws)?;
        self.t += dt;
        self.steps += 1;
        self.residual_norm = self.norm(self.ws.initial_rhs());
        if let Some(i) = self.y.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite(format!(
                "solution entry {i} at t = {}",
                self.t
            )));
        }
        self.record_perturbation();
        Ok(dt)
    }

    /// Runs to the final time, calling `on_snapshot` at every snapshot time.
    pub fn run<F>(&mut self, mut on_snapshot: F) -> Result<RunSummary>
    where
        F: FnMut(&mut Simulation, f64) -> Result<()>,
    {
        let mut snaps: Vec<f64> = self
            .config
            .snapshots
            .clone()
            .unwrap_or_else(|| self.case.snapshots.clone());
        snaps.retain(|&s| s >= self.t && s <= self.t_end);
        snaps.sort_by(f64::total_cmp);
        snaps.dedup();
        let mut next = 0;
        while next < snaps.len() && snaps[next] <= self.t {
            on_snapshot(self, snaps[next])?;
            next += 1;
        }
        let mut converged = false;
        while self.t < self.t_end {
            if self.config.max_steps.is_some_and(|m| self.steps >= m) {
                break;
            }
            let target = if next < snaps.len() {
                snaps[next]
            } else {
                self.t_end
            };
            let dt_cap = clamp_to_end(self.t, f64::INFINITY, target);
            self.step(dt_cap)?;
            if (target - self.t).abs() <= 1e-12 * target.abs().max(1.0) {
                self.t = target;
            }
            if next < snaps.len() && self.t == snaps[next] {
                on_snapshot(self, target)?;
                next += 1;
            }
            if self.case.steady && self.residual_norm < self.config.steady_tolerance {
                converged = true;
                break;
            }
        }
        self.summary(converged)
    }

    pub fn errors(&mut self) -> Result<ErrorReport> {
        let k = self.k()?;
        let b_bar = self.op.bathymetry.cell_averages.clone();
        compute_errors(
            &self.case,
            &self.op.grid,
            self.op.rule(),
            &b_bar,
            self.h(),
            self.q(),
            k.as_deref(),
        )
    }

    fn summary(&mut self, converged: bool) -> Result<RunSummary> {
        let errors = self.errors()?;
        Ok(RunSummary {
            case: self.case.name.clone(),
            scheme: self.config.scheme,
            order: self.config.order,
            n_cells: self.config.n_cells,
            t_final: self.t,
            steps: self.steps,
            converged,
            residual_norm: self.residual_norm,
            errors,
            max_perturbation: self.max_perturbation,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_cells: usize,
    pub l2_h: f64,
    pub eoa_h: Option<f64>,
    pub l2_q: f64,
    pub eoa_q: Option<f64>,
}

/// Errors on each mesh and the orders between consecutive entries.
pub fn convergence(
    case: &CaseSpec,
    base: &SimulationConfig,
    meshes: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    if matches!(case.reference, crate::cases::Reference::None) {
        return Err(SolverError::MissingOracle(case.name.clone()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(meshes.len());
    for &n in meshes {
        let mut cfg = base.clone();
        cfg.n_cells = n;
        cfg.snapshots = Some(vec![]);
        let mut sim = Simulation::new(case.clone(), cfg)?;
        let s = sim.run(|_, _| Ok(()))?;
        let l2_h = s.errors.l2_h.unwrap_or(f64::NAN);
        let l2_q = s.errors.l2_q.unwrap_or(f64::NAN);
        let (eoa_h, eoa_q) = match rows.last() {
            Some(prev) => (
                eoa(prev.l2_h, l2_h, prev.n_cells, n),
                eoa(prev.l2_q, l2_q, prev.n_cells, n),
            ),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n_cells: n,
            l2_h,
            eoa_h,
            l2_q,
            eoa_q,
        });
    }
    Ok(rows)
}

/// Plain-text table with columns `N_e L2(h) EOA(h) L2(q) EOA(q)`.
pub fn format_convergence_table(rows: &[ConvergenceRow]) -> String {
    let fmt_eoa = |e: Option<f64>| e.map_or("--".to_string(), |v| format!("{v:.2}"));
    let mut s = String::from("N_e L2(h) EOA(h) L2(q) EOA(q)\n");
    for r in rows {
        s.push_str(&format!(
            "{} {:.4E} {} {:.4E} {}\n",
            r.n_cells,
            r.l2_h,
            fmt_eoa(r.eoa_h),
            r.l2_q,
            fmt_eoa(r.eoa_q)
        ));
    }
    s
}
