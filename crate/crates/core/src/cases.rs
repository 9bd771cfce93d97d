//! Benchmark catalog, reference solutions and error measures.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::global_flux::physical_flux;
use crate::grid::{BathymetryProfile, Boundary, Grid};
use crate::quadrature::QuadratureRule;

/// Branch of the steady Bernoulli relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowBranch {
    Subcritical,
    Supercritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `h = eta - b` with `b` the scheme's cell averages, `q = 0`.
    LakeAtRest { eta: f64 },
    /// `h = level - b` sampled pointwise, constant `q`.
    Level { level: f64, q: f64 },
    /// Converged state of another catalog case on the same mesh.
    SteadyOf { case: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reference {
    LakeAtRest {
        eta: f64,
    },
    /// Smooth frictionless steady flow, `q = q0` and constant head `upsilon`.
    Steady {
        q0: f64,
        upsilon: f64,
        branch: FlowBranch,
    },
    None,
}

/// Bump `alpha psi(x)` added to the initial depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub alpha: f64,
    pub center: f64,
}

impl Perturbation {
    /// `psi(x) = exp(1 - 1/(1 - r)^2)`, `r = 4 (x - c)^2`, zero for `r >= 1`.
    pub fn psi(&self, x: f64) -> f64 {
        let r = 4.0 * (x - self.center).powi(2);
        if r >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - r).powi(2)).exp()
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.alpha * self.psi(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub name: String,
    pub x_left: f64,
    pub x_right: f64,
    pub bathymetry: BathymetryProfile,
    pub initial: InitialCondition,
    pub perturbation: Option<Perturbation>,
    pub left: Boundary,
    pub right: Boundary,
    pub g: f64,
    pub n_manning: f64,
    pub t_end: f64,
    pub default_cells: usize,
    pub snapshots: Vec<f64>,
    pub reference: Reference,
    /// `(q0, K0)` forced by the boundary data, when the flow is steady.
    pub invariants: Option<(f64, f64)>,
    /// Runs may stop once the residual vanishes.
    pub steady: bool,
}

const DOMAIN: (f64, f64) = (0.0, 25.0);
const G_SWASHES: f64 = 9.812;

fn damped_sine(amplitude: f64) -> BathymetryProfile {
    BathymetryProfile::DampedSine {
        amplitude,
        center: 12.5,
    }
}

fn step() -> BathymetryProfile {
    BathymetryProfile::Step {
        start: 8.0,
        end: 12.0,
        height: 0.2,
    }
}

fn base(name: &str, bathymetry: BathymetryProfile, g: f64, t_end: f64) -> CaseSpec {
    CaseSpec {
        name: name.into(),
        x_left: DOMAIN.0,
        x_right: DOMAIN.1,
        bathymetry,
        initial: InitialCondition::Level { level: 2.0, q: 0.0 },
        perturbation: None,
        left: Boundary::Extrapolate,
        right: Boundary::Extrapolate,
        g,
        n_manning: 0.0,
        t_end,
        default_cells: 100,
        snapshots: vec![],
        reference: Reference::None,
        invariants: None,
        steady: false,
    }
}

fn supercritical_flow(name: &str, bathymetry: BathymetryProfile, t_end: f64) -> CaseSpec {
    let (h0, q0) = (2.0, 24.0);
    CaseSpec {
        left: Boundary::State { h: h0, q: q0 },
        right: Boundary::Extrapolate,
        invariants: Some((q0, physical_flux(h0, q0, G_SWASHES)[1])),
        steady: true,
        ..base(name, bathymetry, G_SWASHES, t_end)
    }
}

fn subcritical_flow(name: &str, bathymetry: BathymetryProfile, t_end: f64) -> CaseSpec {
    let (h0, q0) = (2.0, 4.42);
    CaseSpec {
        left: Boundary::Discharge { q: q0 },
        right: Boundary::Depth { h: h0 },
        invariants: Some((q0, physical_flux(h0, q0, G_SWASHES)[1])),
        steady: true,
        ..base(name, bathymetry, G_SWASHES, t_end)
    }
}

/// Bernoulli head `u^2/2 + g (h + b)` of a state.
pub fn head(h: f64, q: f64, b: f64, g: f64) -> f64 {
    let u = q / h;
    0.5 * u * u + g * (h + b)
}

/// All benchmark cases.
pub fn catalog() -> Vec<CaseSpec> {
    let mut out = Vec::new();

    out.push(CaseSpec {
        initial: InitialCondition::LakeAtRest { eta: 1.0 },
        left: Boundary::LakeAtRest { eta: 1.0 },
        right: Boundary::LakeAtRest { eta: 1.0 },
        reference: Reference::LakeAtRest { eta: 1.0 },
        default_cells: 25,
        ..base("lake_at_rest", damped_sine(0.05), 1.0, 1.0)
    });

    out.push(CaseSpec {
        initial: InitialCondition::LakeAtRest { eta: 1.0 },
        perturbation: Some(Perturbation {
            alpha: 1e-4,
            center: 9.5,
        }),
        left: Boundary::LakeAtRest { eta: 1.0 },
        right: Boundary::LakeAtRest { eta: 1.0 },
        default_cells: 150,
        snapshots: vec![0.0, 0.5, 1.0, 1.5],
        ..base("lar_perturbed", damped_sine(0.5), 9.8, 1.5)
    });

    let mut sup = supercritical_flow("supercritical", damped_sine(0.05), 50.0);
    sup.reference = Reference::Steady {
        q0: 24.0,
        upsilon: head(2.0, 24.0, 0.0, G_SWASHES),
        branch: FlowBranch::Supercritical,
    };
    out.push(sup);

    let mut sub = subcritical_flow("subcritical", damped_sine(0.05), 200.0);
    sub.reference = Reference::Steady {
        q0: 4.42,
        upsilon: head(2.0, 4.42, 0.0, G_SWASHES),
        branch: FlowBranch::Subcritical,
    };
    out.push(sub);

    out.push(CaseSpec {
        initial: InitialCondition::Level {
            level: 0.33,
            q: 0.0,
        },
        left: Boundary::Discharge { q: 0.18 },
        right: Boundary::Depth { h: 0.33 },
        steady: true,
        ..base(
            "transcritical",
            BathymetryProfile::CompactBump {
                amplitude: 0.2,
                center: 10.0,
                half_width: 5.0,
            },
            G_SWASHES,
            200.0,
        )
    });

    out.push(CaseSpec {
        initial: InitialCondition::SteadyOf {
            case: "subcritical".into(),
        },
        perturbation: Some(Perturbation {
            alpha: 1e-3,
            center: 9.5,
        }),
        t_end: 2.0,
        steady: false,
        snapshots: vec![0.0, 0.66, 1.33, 2.0],
        ..subcritical_flow("sub_perturbed", damped_sine(0.05), 2.0)
    });

    out.push(CaseSpec {
        initial: InitialCondition::SteadyOf {
            case: "supercritical".into(),
        },
        perturbation: Some(Perturbation {
            alpha: 1e-4,
            center: 9.5,
        }),
        steady: false,
        snapshots: vec![0.0, 0.33, 0.66, 1.0],
        ..supercritical_flow("super_perturbed", damped_sine(0.05), 1.0)
    });

    out.push(subcritical_flow("step_subcritical", step(), 500.0));
    out.push(supercritical_flow("step_supercritical", step(), 50.0));

    let mut f = subcritical_flow("friction_subcritical", damped_sine(0.05), 200.0);
    f.n_manning = 0.05;
    out.push(f);
    let mut f = supercritical_flow("friction_supercritical", damped_sine(0.05), 50.0);
    f.n_manning = 0.05;
    out.push(f);

    out.push(CaseSpec {
        initial: InitialCondition::Level {
            level: 2.0,
            q: 4.42,
        },
        left: Boundary::State { h: 2.0, q: 4.42 },
        right: Boundary::Extrapolate,
        invariants: Some((4.42, physical_flux(2.0, 4.42, G_SWASHES)[1])),
        steady: false,
        ..base("uniform_flow", BathymetryProfile::Flat, G_SWASHES, 1.0)
    });

    out
}

pub fn case_names() -> Vec<String> {
    catalog().into_iter().map(|c| c.name).collect()
}

pub fn find_case(name: &str) -> Result<CaseSpec> {
    catalog()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| SolverError::Unknown {
            kind: "case",
            value: name.into(),
        })
}

/// Depth on the requested branch of `g h^3 + (g b - upsilon) h^2 + q^2/2 = 0`.
pub fn steady_depth(b: f64, q0: f64, upsilon: f64, g: f64, branch: FlowBranch) -> Result<f64> {
    let a = upsilon - g * b;
    let phi = |h: f64| g * h * h * h - a * h * h + 0.5 * q0 * q0;
    // phi has a local minimum at h_m = 2a/(3g); roots straddle it
    let hm = 2.0 * a / (3.0 * g);
    if !(a > 0.0) || phi(hm) > 0.0 {
        return Err(SolverError::InvalidParameter(format!(
            "no steady depth for b = {b}"
        )));
    }
    let (mut lo, mut hi) = match branch {
        FlowBranch::Subcritical => (hm, a / g),
        FlowBranch::Supercritical => (0.0, hm),
    };
    // phi(lo) and phi(hi) have opposite signs on both brackets
    let s_lo = phi(lo).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut h = 0.5 * (lo + hi);
    // one Newton step to clean the last bits
    let d = 3.0 * g * h * h - 2.0 * a * h;
    if d != 0.0 {
        let next = h - phi(h) / d;
        if next > 0.0 && phi(next).abs() < phi(h).abs() {
            h = next;
        }
    }
    Ok(h)
}

/// Reference cell averages of `(h, q)` on the physical cells, using `rule`.
pub fn reference_averages(
    case: &CaseSpec,
    grid: &Grid,
    rule: &QuadratureRule,
    b_bar: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    match &case.reference {
        Reference::LakeAtRest { eta } => {
            let h: Vec<f64> = grid.interior().map(|i| eta - b_bar[i]).collect();
            Ok((h, vec![0.0; grid.n_cells]))
        }
        Reference::Steady {
            q0,
            upsilon,
            branch,
        } => {
            let mut h = Vec::with_capacity(grid.n_cells);
            let mut vals = vec![0.0; rule.len()];
            for i in grid.interior() {
                let lo = grid.cell_left_edge(i);
                for (v, xi) in vals.iter_mut().zip(rule.nodes()) {
                    let x = lo + xi * grid.dx;
                    *v = steady_depth(case.bathymetry.value(x), *q0, *upsilon, case.g, *branch)?;
                }
                h.push(rule.average(&vals));
            }
            Ok((h, vec![*q0; grid.n_cells]))
        }
        Reference::None => Err(SolverError::MissingOracle(case.name.clone())),
    }
}

/// Discrete `L2` norm `sqrt(sum dx e_i^2)`.
pub fn l2_error(a: &[f64], b: &[f64], dx: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(SolverError::SizeMismatch(a.len(), b.len()));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| dx * (x - y).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `log(e_c / e_f) / log(N_f / N_c)`; `None` for equal meshes or vanishing errors.
pub fn eoa(e_coarse: f64, e_fine: f64, n_coarse: usize, n_fine: usize) -> Option<f64> {
    if n_coarse == n_fine || !(e_coarse > 0.0) || !(e_fine > 0.0) {
        return None;
    }
    Some((e_coarse / e_fine).ln() / (n_fine as f64 / n_coarse as f64).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub n_cells: usize,
    pub l2_h: Option<f64>,
    pub l2_q: Option<f64>,
    /// `max |q_i - q0|`.
    pub q_drift: Option<f64>,
    /// `max |K_i - K0|`.
    pub k_drift: Option<f64>,
}

/// Errors against the reference (when any) and drift of the invariants.
pub fn compute_errors(
    case: &CaseSpec,
    grid: &Grid,
    rule: &QuadratureRule,
    b_bar: &[f64],
    h: &[f64],
    q: &[f64],
    k: Option<&[f64]>,
) -> Result<ErrorReport> {
    if h.len() != grid.n_cells || q.len() != grid.n_cells {
        return Err(SolverError::SizeMismatch(h.len(), grid.n_cells));
    }
    let (l2_h, l2_q) = match reference_averages(case, grid, rule, b_bar) {
        Ok((hr, qr)) => (
            Some(l2_error(h, &hr, grid.dx)?),
            Some(l2_error(q, &qr, grid.dx)?),
        ),
        Err(SolverError::MissingOracle(_)) => (None, None),
        Err(e) => return Err(e),
    };
    let max_dev = |v: &[f64], c: f64| v.iter().map(|x| (x - c).abs()).fold(0.0, f64::max);
    let (q_drift, k_drift) = match case.invariants {
        Some((q0, k0)) => (Some(max_dev(q, q0)), k.map(|k| max_dev(k, k0))),
        None => (None, None),
    };
    Ok(ErrorReport {
        n_cells: grid.n_cells,
        l2_h,
        l2_q,
        q_drift,
        k_drift,
    })
}
