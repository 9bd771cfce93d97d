//! WENO reconstruction from cell averages to point values at arbitrary
//! locations inside the reconstruction cell, for orders 3 and 5.
//!
//! Each evaluation point gets its own optimal linear weights. Three regimes
//! arise:
//!
//! * `Positive`: all linear weights are non-negative, classical WENO.
//! * `Split`: some weights are negative (e.g. the cell centre for order 5);
//!   weights are split into a positive and a negative group, each
//!   renormalised and made nonlinear separately (Shi, Hu & Shu, 2002).
//! * `Central`: no linear weights reproduce the high-order polynomial (the
//!   cell centre for order 3). The optimal polynomial enters as an extra
//!   candidate in central-WENO fashion (Levy, Puppo & Russo).
//!
//! Smoothness indicators depend on the cell only and are shared by all
//! evaluation points. Reconstructions can reuse weights computed on a
//! different variable, which is how `h` and `b` are slaved to the weights of
//! the free surface.

use crate::error::{Result, SolverError};

pub const DEFAULT_EPSILON: f64 = 1e-6;
const MAX_CANDIDATES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WenoOrder {
    Three,
    Five,
}

impl WenoOrder {
    pub fn from_order(p: usize) -> Result<Self> {
        match p {
            3 => Ok(Self::Three),
            5 => Ok(Self::Five),
            other => Err(SolverError::InvalidParameter(format!(
                "WENO order {other} (supported: 3, 5)"
            ))),
        }
    }

    /// Formal order `p` (stencil width).
    pub fn order(self) -> usize {
        match self {
            Self::Three => 3,
            Self::Five => 5,
        }
    }

    /// Number of candidate stencils `r`, with `2 r - 1 = p`.
    pub fn substencils(self) -> usize {
        self.order().div_ceil(2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WenoConfig {
    pub order: WenoOrder,
    pub epsilon: f64,
    /// Evaluation points on the reference cell `[0, 1]`.
    pub points: Vec<f64>,
}

impl WenoConfig {
    pub fn new(order: WenoOrder, points: &[f64]) -> Self {
        Self {
            order,
            epsilon: DEFAULT_EPSILON,
            points: points.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRegime {
    Positive,
    Split,
    Central,
}

/// Optimal linear weights at one point.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearWeights {
    Positive(Vec<f64>),
    /// Reproduce the optimal polynomial but contain negative entries.
    Mixed(Vec<f64>),
    /// No combination of the candidate stencils reproduces the optimal polynomial here.
    Singular,
}

/// Nonlinear weights used at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointWeights {
    pub regime: WeightRegime,
    /// Effective coefficients of the candidate values
    /// `[p_0, ..., p_{r-1}, p_opt]`; they sum to one.
    pub coefficients: [f64; MAX_CANDIDATES],
    /// Convex weights of the positive group (all candidates for
    /// `Positive`/`Central`).
    pub positive: [f64; MAX_CANDIDATES],
    /// Convex weights of the negative group (`Split` only).
    pub negative: [f64; MAX_CANDIDATES],
    /// Group scalings `(sigma+, sigma-)`; `(1, 0)` outside the split regime.
    pub sigma: (f64, f64),
}

impl Default for PointWeights {
    fn default() -> Self {
        Self {
            regime: WeightRegime::Positive,
            coefficients: [0.0; MAX_CANDIDATES],
            positive: [0.0; MAX_CANDIDATES],
            negative: [0.0; MAX_CANDIDATES],
            sigma: (1.0, 0.0),
        }
    }
}

/// Weights used by one reconstruction: smoothness indicators of the cell and
/// the per-point nonlinear weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WenoWeights {
    /// `beta[0..r]` for the stencils, `beta[r]` for the central candidate when present.
    pub beta: [f64; MAX_CANDIDATES],
    pub points: Vec<PointWeights>,
}

#[derive(Debug, Clone)]
struct PointPlan {
    xi: f64,
    /// `stencil[m][j]`: coefficient of `u_{m + j}` (window index) in `p_m(xi)`.
    stencil: [[f64; 3]; 3],
    /// Coefficients of the whole window in `p_opt(xi)`.
    optimal: [f64; 5],
    regime: WeightRegime,
    /// Linear weights (`Positive`), signed weights (`Split`), unused for `Central`.
    d: Vec<f64>,
    gamma_plus: Vec<f64>,
    gamma_minus: Vec<f64>,
    sigma: (f64, f64),
}

/// Precomputed reconstruction operator for a fixed order and point set.
#[derive(Debug, Clone)]
pub struct WenoReconstructor {
    config: WenoConfig,
    plans: Vec<PointPlan>,
    /// Quadratic forms of the stencil smoothness indicators, acting on the
    /// differences `u_{m+j} - u_center`.
    beta_forms: [[[f64; 3]; 3]; 3],
    /// Quadratic form of the central candidate's indicator over the whole window.
    central_form: Option<Vec<Vec<f64>>>,
    /// Linear weights of the central construction: `[d_0..d_{r-1}, d_c]`.
    central_d: Vec<f64>,
}

impl WenoReconstructor {
    pub fn new(config: WenoConfig) -> Result<Self> {
        if !(config.epsilon > 0.0) {
            return Err(SolverError::InvalidParameter(format!(
                "WENO epsilon {} must be positive",
                config.epsilon
            )));
        }
        if config.points.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(SolverError::InvalidParameter(
                "WENO evaluation points must lie in [0, 1]".into(),
            ));
        }
        let p = config.order.order();
        let r = config.order.substencils();
        let mut plans = Vec::with_capacity(config.points.len());
        for &xi in &config.points {
            let s = xi - 0.5;
            let mut stencil = [[0.0; 3]; 3];
            for (m, row) in stencil.iter_mut().enumerate().take(r) {
                row[..r].copy_from_slice(&point_coefficients(&stencil_offsets(r, m), s));
            }
            let mut optimal = [0.0; 5];
            optimal[..p].copy_from_slice(&point_coefficients(&window_offsets(r), s));
            let mut plan = PointPlan {
                xi,
                stencil,
                optimal,
                regime: WeightRegime::Positive,
                d: vec![],
                gamma_plus: vec![],
                gamma_minus: vec![],
                sigma: (1.0, 0.0),
            };
            match linear_weights(config.order, xi) {
                LinearWeights::Positive(d) => plan.d = d,
                LinearWeights::Mixed(d) => {
                    // theta = 3 splitting
                    let tp: Vec<f64> = d.iter().map(|v| 0.5 * (v + 3.0 * v.abs())).collect();
                    let tm: Vec<f64> = tp.iter().zip(&d).map(|(a, v)| a - v).collect();
                    let sp: f64 = tp.iter().sum();
                    let sm: f64 = tm.iter().sum();
                    plan.gamma_plus = tp.iter().map(|v| v / sp).collect();
                    plan.gamma_minus = tm.iter().map(|v| v / sm).collect();
                    plan.sigma = (sp, sm);
                    plan.regime = WeightRegime::Split;
                    plan.d = d;
                }
                LinearWeights::Singular => plan.regime = WeightRegime::Central,
            }
            plans.push(plan);
        }
        let mut beta_forms = [[[0.0; 3]; 3]; 3];
        for (m, form) in beta_forms.iter_mut().enumerate().take(r) {
            for (row, src) in form.iter_mut().zip(stencil_beta_form(r, m)) {
                row[..r].copy_from_slice(&src);
            }
        }
        let mut central_d = vec![0.5 / r as f64; r];
        central_d.push(0.5);
        let central_form = plans
            .iter()
            .any(|p| p.regime == WeightRegime::Central)
            .then(|| central_beta_form(r, &central_d));
        Ok(Self {
            config,
            plans,
            beta_forms,
            central_form,
            central_d,
        })
    }

    pub fn config(&self) -> &WenoConfig {
        &self.config
    }

    pub fn order(&self) -> WenoOrder {
        self.config.order
    }

    pub fn points(&self) -> &[f64] {
        &self.config.points
    }

    pub fn regimes(&self) -> Vec<WeightRegime> {
        self.plans.iter().map(|p| p.regime).collect()
    }

    /// Window length `p`.
    pub fn width(&self) -> usize {
        self.config.order.order()
    }

    /// Smoothness indicators of the `r` candidate stencils for a window of `p` averages.
    pub fn smoothness_indicators(&self, window: &[f64]) -> Vec<f64> {
        let r = self.config.order.substencils();
        let c = window[r - 1];
        let mut diff = [0.0; 5];
        (0..r)
            .map(|m| {
                for j in 0..r {
                    diff[j] = window[m + j] - c;
                }
                quadratic_fixed(&self.beta_forms[m], &diff[..r])
            })
            .collect()
    }

    /// Computes the nonlinear weights of a window of `p` cell averages.
    pub fn compute_weights(&self, window: &[f64], out: &mut WenoWeights) {
        let r = self.config.order.substencils();
        let eps = self.config.epsilon;
        let c = window[r - 1];
        let mut diff = [0.0; 5];
        for m in 0..r {
            for j in 0..r {
                diff[j] = window[m + j] - c;
            }
            out.beta[m] = quadratic_fixed(&self.beta_forms[m], &diff[..r]);
        }
        if let Some(form) = &self.central_form {
            for (j, d) in diff.iter_mut().enumerate().take(window.len()) {
                *d = window[j] - c;
            }
            out.beta[r] = quadratic(form, &diff[..window.len()]);
        }
        out.points.resize(self.plans.len(), PointWeights::default());
        for (plan, pw) in self.plans.iter().zip(out.points.iter_mut()) {
            *pw = PointWeights {
                regime: plan.regime,
                ..Default::default()
            };
            match plan.regime {
                WeightRegime::Positive => {
                    nonlinear(&plan.d, &out.beta[..r], eps, &mut pw.positive);
                    pw.coefficients[..r].copy_from_slice(&pw.positive[..r]);
                }
                WeightRegime::Split => {
                    nonlinear(&plan.gamma_plus, &out.beta[..r], eps, &mut pw.positive);
                    nonlinear(&plan.gamma_minus, &out.beta[..r], eps, &mut pw.negative);
                    let (sp, sm) = plan.sigma;
                    for m in 0..r {
                        pw.coefficients[m] = sp * pw.positive[m] - sm * pw.negative[m];
                    }
                    pw.sigma = plan.sigma;
                }
                WeightRegime::Central => {
                    nonlinear(&self.central_d, &out.beta[..r + 1], eps, &mut pw.positive);
                    let wc = pw.positive[r];
                    let dc = self.central_d[r];
                    for m in 0..r {
                        pw.coefficients[m] = pw.positive[m] - wc * self.central_d[m] / dc;
                    }
                    pw.coefficients[r] = wc / dc;
                }
            }
        }
    }

    /// Linear (optimal) weights written in the same form as nonlinear ones.
    pub fn linear_weight_set(&self) -> WenoWeights {
        let r = self.config.order.substencils();
        let mut out = WenoWeights::default();
        for plan in &self.plans {
            let mut pw = PointWeights {
                regime: plan.regime,
                ..Default::default()
            };
            match plan.regime {
                WeightRegime::Positive => {
                    pw.positive[..r].copy_from_slice(&plan.d);
                    pw.coefficients[..r].copy_from_slice(&plan.d);
                }
                WeightRegime::Split => {
                    pw.positive[..r].copy_from_slice(&plan.gamma_plus);
                    pw.negative[..r].copy_from_slice(&plan.gamma_minus);
                    pw.sigma = plan.sigma;
                    pw.coefficients[..r].copy_from_slice(&plan.d);
                }
                WeightRegime::Central => {
                    pw.positive[..r + 1].copy_from_slice(&self.central_d);
                    pw.coefficients[r] = 1.0;
                }
            }
            out.points.push(pw);
        }
        out
    }

    /// Evaluates the reconstruction with the given weights. `values` receives
    /// one entry per evaluation point.
    pub fn apply(&self, window: &[f64], weights: &WenoWeights, values: &mut [f64]) {
        let r = self.config.order.substencils();
        let c = window[r - 1];
        for ((plan, pw), v) in self
            .plans
            .iter()
            .zip(&weights.points)
            .zip(values.iter_mut())
        {
            let mut acc = 0.0;
            for m in 0..r {
                let coeff = pw.coefficients[m];
                if coeff != 0.0 {
                    let vm: f64 = plan.stencil[m][..r]
                        .iter()
                        .zip(&window[m..])
                        .map(|(a, u)| a * (u - c))
                        .sum();
                    acc += coeff * vm;
                }
            }
            let copt = pw.coefficients[r];
            if copt != 0.0 {
                let vo: f64 = plan.optimal[..window.len()]
                    .iter()
                    .zip(window)
                    .map(|(a, u)| a * (u - c))
                    .sum();
                acc += copt * vo;
            }
            *v = c + acc;
        }
    }

    /// Reconstructs point values, computing weights from `window` unless
    /// `imposed` is given. Returns the weights actually used.
    pub fn reconstruct(
        &self,
        window: &[f64],
        imposed: Option<&WenoWeights>,
    ) -> (Vec<f64>, WenoWeights) {
        let mut values = vec![0.0; self.plans.len()];
        let weights = match imposed {
            Some(w) => w.clone(),
            None => {
                let mut w = WenoWeights::default();
                self.compute_weights(window, &mut w);
                w
            }
        };
        self.apply(window, &weights, &mut values);
        (values, weights)
    }

    /// Evaluation point of plan `k`.
    pub fn point(&self, k: usize) -> f64 {
        self.plans[k].xi
    }
}

fn nonlinear(d: &[f64], beta: &[f64], eps: f64, out: &mut [f64]) {
    let mut total = 0.0;
    for (k, (dk, bk)) in d.iter().zip(beta).enumerate() {
        let a = dk / ((bk + eps) * (bk + eps));
        out[k] = a;
        total += a;
    }
    for o in out.iter_mut().take(d.len()) {
        *o /= total;
    }
}

fn quadratic_fixed(form: &[[f64; 3]; 3], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for (row, vi) in form.iter().zip(v) {
        let t: f64 = row[..v.len()].iter().zip(v).map(|(a, vj)| a * vj).sum();
        s += vi * t;
    }
    s.max(0.0)
}

fn quadratic(form: &[Vec<f64>], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for (row, vi) in form.iter().zip(v) {
        let t: f64 = row.iter().zip(v).map(|(a, vj)| a * vj).sum();
        s += vi * t;
    }
    s.max(0.0)
}

/// Cell offsets (relative to the reconstruction cell) of candidate stencil `m`.
fn stencil_offsets(r: usize, m: usize) -> Vec<i32> {
    let start = m as i32 - (r as i32 - 1);
    (start..start + r as i32).collect()
}

fn window_offsets(r: usize) -> Vec<i32> {
    let r = r as i32;
    (-(r - 1)..=(r - 1)).collect()
}

/// `C[k][j]`: monomial coefficient `s^k` contributed by the average of cell
/// `offsets[j]`, for the unique polynomial of degree `len - 1` matching all
/// averages. Cells are unit length, `s = 0` is the reconstruction-cell centre.
fn averages_to_monomials(offsets: &[i32]) -> Vec<Vec<f64>> {
    let n = offsets.len();
    let a: Vec<Vec<f64>> = offsets
        .iter()
        .map(|&o| {
            let lo = o as f64 - 0.5;
            let hi = o as f64 + 0.5;
            (0..n)
                .map(|k| (hi.powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / (k as f64 + 1.0))
                .collect()
        })
        .collect();
    invert(&a).expect("cell-average moment matrix is nonsingular")
}

fn point_coefficients(offsets: &[i32], s: f64) -> Vec<f64> {
    let c = averages_to_monomials(offsets);
    let n = offsets.len();
    (0..n)
        .map(|j| (0..n).map(|k| s.powi(k as i32) * c[k][j]).sum())
        .collect()
}

/// `sum_l int_{-1/2}^{1/2} (P^{(l)})^2` as a quadratic form, for polynomials
/// given by monomial coefficient columns `coef[k][j]`, `l = 1..=max_deriv`.
fn beta_form(coef: &[Vec<f64>], max_deriv: usize) -> Vec<Vec<f64>> {
    let deg = coef.len() - 1;
    let nvar = coef[0].len();
    let moment = |a: usize| -> f64 {
        let e = a as i32 + 1;
        (0.5f64.powi(e) - (-0.5f64).powi(e)) / e as f64
    };
    let falling = |k: usize, l: usize| -> f64 { ((k - l + 1)..=k).map(|v| v as f64).product() };
    let mut form = vec![vec![0.0; nvar]; nvar];
    for l in 1..=max_deriv.min(deg) {
        for k1 in l..=deg {
            for k2 in l..=deg {
                let w = falling(k1, l) * falling(k2, l) * moment(k1 - l + k2 - l);
                for i in 0..nvar {
                    for j in 0..nvar {
                        form[i][j] += w * coef[k1][i] * coef[k2][j];
                    }
                }
            }
        }
    }
    form
}

fn stencil_beta_form(r: usize, m: usize) -> Vec<Vec<f64>> {
    beta_form(&averages_to_monomials(&stencil_offsets(r, m)), r - 1)
}

/// Indicator of `P_c = (p_opt - sum_m d_m p_m) / d_c` over the full window.
fn central_beta_form(r: usize, d: &[f64]) -> Vec<Vec<f64>> {
    let p = 2 * r - 1;
    let opt = averages_to_monomials(&window_offsets(r));
    let mut coef = opt.clone();
    for m in 0..r {
        let cm = averages_to_monomials(&stencil_offsets(r, m));
        for k in 0..r {
            for j in 0..r {
                coef[k][m + j] -= d[m] * cm[k][j];
            }
        }
    }
    for row in coef.iter_mut() {
        for v in row.iter_mut() {
            *v /= d[r];
        }
    }
    beta_form(&coef, p - 1)
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))?;
        if m[piv][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, piv);
        let pv = m[col][col];
        for v in m[col].iter_mut() {
            *v /= pv;
        }
        for row in 0..n {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[row][k] -= f * m[col][k];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Optimal linear weights `d_m` with `sum_m d_m p_m(xi) = p_opt(xi)` for all data.
pub fn linear_weights(order: WenoOrder, xi: f64) -> LinearWeights {
    let r = order.substencils();
    let p = order.order();
    let s = xi - 0.5;
    // E[pos][m]
    let mut e = vec![vec![0.0; r]; p];
    for m in 0..r {
        for (j, c) in point_coefficients(&stencil_offsets(r, m), s)
            .into_iter()
            .enumerate()
        {
            e[m + j][m] = c;
        }
    }
    let target = point_coefficients(&window_offsets(r), s);
    // normal equations
    let ete: Vec<Vec<f64>> = (0..r)
        .map(|a| {
            (0..r)
                .map(|b| (0..p).map(|k| e[k][a] * e[k][b]).sum())
                .collect()
        })
        .collect();
    let ett: Vec<f64> = (0..r)
        .map(|a| (0..p).map(|k| e[k][a] * target[k]).sum())
        .collect();
    let Some(inv) = invert(&ete) else {
        return LinearWeights::Singular;
    };
    let mut d: Vec<f64> = (0..r)
        .map(|a| (0..r).map(|b| inv[a][b] * ett[b]).sum())
        .collect();
    let residual_of = |d: &[f64]| -> Vec<f64> {
        (0..p)
            .map(|k| target[k] - (0..r).map(|m| e[k][m] * d[m]).sum::<f64>())
            .collect()
    };
    // two refinement sweeps, the normal equations square the conditioning
    for _ in 0..2 {
        let res = residual_of(&d);
        let rhs: Vec<f64> = (0..r)
            .map(|a| (0..p).map(|k| e[k][a] * res[k]).sum())
            .collect();
        for a in 0..r {
            d[a] += (0..r).map(|b| inv[a][b] * rhs[b]).sum::<f64>();
        }
    }
    let residual = residual_of(&d).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if residual > 1e-12 {
        return LinearWeights::Singular;
    }
    if d.iter().any(|&v| v < -1e-14) {
        LinearWeights::Mixed(d)
    } else {
        LinearWeights::Positive(d.into_iter().map(|v| v.max(0.0)).collect())
    }
}

/// Smoothness indicators of a window of `p` cell averages.
pub fn smoothness_indicators(window: &[f64], order: WenoOrder) -> Vec<f64> {
    let r = order.substencils();
    let c = window[r - 1];
    (0..r)
        .map(|m| {
            let diff: Vec<f64> = (0..r).map(|j| window[m + j] - c).collect();
            quadratic(&stencil_beta_form(r, m), &diff)
        })
        .collect()
}
