//! Interface fluxes: upwinding of the global flux with Roe-averaged
//! eigenstructure, positive recovery of the interface depth from `(q, K, R)`,
//! and the Rusanov flux of the classical scheme.

use std::f64::consts::PI;

use crate::error::{Result, SolverError};
use crate::global_flux::physical_flux;

const ARCCOS_TOLERANCE: f64 = 1e-12;

/// Which formula produced a recovered depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthBranch {
    /// `q = 0`, `h = sqrt(2 (K - R) / g)`.
    AtRest,
    /// Positive root of the cubic closest to `eta - b`.
    Cubic,
    /// No admissible root, `h = eta - b`.
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveredDepth {
    pub h: f64,
    pub branch: DepthBranch,
}

/// The three real roots `2 sqrt(P) cos((Theta + 2 pi k)/3)` of
/// `h^3 - 3 P h + 2 q^2 / g = 0`, `P = 2 D / (3 g)`, or `None` when the
/// discriminant does not admit three real roots.
pub fn trigonometric_roots(q: f64, d: f64, g: f64) -> Option<[f64; 3]> {
    if !(d > 0.0) || q.powi(4) >= 8.0 * d.powi(3) / (27.0 * g) {
        return None;
    }
    let p = 2.0 * d / (3.0 * g);
    let mut arg = -q * q / (g * p.powf(1.5));
    if !(-1.0 - ARCCOS_TOLERANCE..=1.0 + ARCCOS_TOLERANCE).contains(&arg) {
        return None;
    }
    arg = arg.clamp(-1.0, 1.0);
    let theta = arg.acos();
    let s = 2.0 * p.sqrt();
    Some([0, 1, 2].map(|k| s * ((theta + 2.0 * PI * k as f64) / 3.0).cos()))
}

/// Recovers the depth at one side of an interface from the reconstructed
/// global flux. `eta - b` is the fallback and the tie-breaker between the
/// subcritical and supercritical roots.
pub fn recover_depth(q: f64, k: f64, r: f64, eta: f64, b: f64, g: f64) -> Result<RecoveredDepth> {
    let d = k - r;
    let guess = eta - b;
    let fallback = || {
        if guess > 0.0 {
            Ok(RecoveredDepth {
                h: guess,
                branch: DepthBranch::Fallback,
            })
        } else {
            Err(SolverError::DepthRecovery {
                interface: 0,
                fallback: guess,
            })
        }
    };
    if !d.is_finite() || !(d > 0.0) {
        return fallback();
    }
    if q == 0.0 {
        return Ok(RecoveredDepth {
            h: (2.0 * d / g).sqrt(),
            branch: DepthBranch::AtRest,
        });
    }
    let Some(roots) = trigonometric_roots(q, d, g) else {
        return fallback();
    };
    let best = roots
        .iter()
        .copied()
        .filter(|&h| h > 0.0)
        .min_by(|a, b| (a - guess).abs().total_cmp(&(b - guess).abs()));
    match best {
        Some(h) => Ok(RecoveredDepth {
            h: polish(h, q, d, g),
            branch: DepthBranch::Cubic,
        }),
        None => fallback(),
    }
}

/// Newton steps on `g h^3/2 - D h + q^2`, kept only while the residual drops.
fn polish(mut h: f64, q: f64, d: f64, g: f64) -> f64 {
    let f = |h: f64| 0.5 * g * h * h * h - d * h + q * q;
    let mut fh = f(h);
    for _ in 0..3 {
        let df = 1.5 * g * h * h - d;
        if df == 0.0 {
            break;
        }
        let next = h - fh / df;
        let fn_ = f(next);
        if !(next > 0.0) || fn_.abs() >= fh.abs() {
            break;
        }
        h = next;
        fh = fn_;
    }
    h
}

/// Roe-averaged state and eigenvalues of the homogeneous Jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoeState {
    pub h: f64,
    pub u: f64,
    pub lambda: [f64; 2],
}

impl RoeState {
    pub fn new(h_l: f64, u_l: f64, h_r: f64, u_r: f64, g: f64) -> Result<Self> {
        let h = 0.5 * (h_l + h_r);
        if !(h > 0.0) || !(h_l >= 0.0) || !(h_r >= 0.0) {
            return Err(SolverError::DegenerateRoeState(h));
        }
        let sl = h_l.sqrt();
        let sr = h_r.sqrt();
        let u = (sl * u_l + sr * u_r) / (sl + sr);
        let c = (g * h).sqrt();
        Ok(Self {
            h,
            u,
            lambda: [u - c, u + c],
        })
    }

    /// Left eigenvectors (rows), normalised against right eigenvectors `(1, lambda_k)`.
    pub fn left_eigenvectors(&self) -> [[f64; 2]; 2] {
        let [l1, l2] = self.lambda;
        let s = 1.0 / (l2 - l1);
        [[s * l2, -s], [-s * l1, s]]
    }

    /// Spectral projector onto the `k`-th eigenvector.
    pub fn projector(&self, k: usize) -> [[f64; 2]; 2] {
        let [l1, l2] = self.lambda;
        let s = 1.0 / (l2 - l1);
        if k == 0 {
            [[s * l2, -s], [s * l1 * l2, -s * l1]]
        } else {
            [[-s * l1, s], [-s * l1 * l2, s * l2]]
        }
    }

    /// `L^{-1} Lambda^- L`; eigenvalues exactly zero count as positive.
    pub fn negative_part(&self) -> [[f64; 2]; 2] {
        let mut m = [[0.0; 2]; 2];
        for k in 0..2 {
            if self.lambda[k] < 0.0 {
                let p = self.projector(k);
                for i in 0..2 {
                    for j in 0..2 {
                        m[i][j] += p[i][j];
                    }
                }
            }
        }
        m
    }
}

/// Upwind flux `L^{-1} Lambda^+ L G^L + L^{-1} Lambda^- L G^R`, evaluated as
/// `G^L + A^- (G^R - G^L)` so that equal traces give `G^L` exactly.
pub fn upwind_global_flux(g_l: [f64; 2], g_r: [f64; 2], roe: &RoeState) -> [f64; 2] {
    let [l1, l2] = roe.lambda;
    if l1 >= 0.0 && l2 >= 0.0 {
        return g_l;
    }
    if l1 < 0.0 && l2 < 0.0 {
        return g_r;
    }
    let a = roe.negative_part();
    let d = [g_r[0] - g_l[0], g_r[1] - g_l[1]];
    [
        g_l[0] + a[0][0] * d[0] + a[0][1] * d[1],
        g_l[1] + a[1][0] * d[0] + a[1][1] * d[1],
    ]
}

/// Rusanov flux for the conserved variables `(h, q)`.
pub fn rusanov_flux(u_l: [f64; 2], u_r: [f64; 2], g: f64) -> Result<[f64; 2]> {
    if !(u_l[0] > 0.0) || !(u_r[0] > 0.0) {
        return Err(SolverError::NonPositiveDepth {
            cell: 0,
            value: u_l[0].min(u_r[0]),
        });
    }
    if u_l == u_r {
        return Ok(physical_flux(u_l[0], u_l[1], g));
    }
    let fl = physical_flux(u_l[0], u_l[1], g);
    let fr = physical_flux(u_r[0], u_r[1], g);
    let speed = |u: [f64; 2]| (u[1] / u[0]).abs() + (g * u[0]).sqrt();
    let s = speed(u_l).max(speed(u_r));
    Ok([
        0.5 * (fl[0] + fr[0]) - 0.5 * s * (u_r[0] - u_l[0]),
        0.5 * (fl[1] + fr[1]) - 0.5 * s * (u_r[1] - u_l[1]),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k_of(h: f64, q: f64, r: f64, g: f64) -> f64 {
        q * q / h + 0.5 * g * h * h + r
    }

    #[test]
    fn depth_at_rest() {
        let g = 9.81;
        let a = recover_depth(0.0, 0.5 * g, 0.0, 1.0, 0.0, g).unwrap();
        assert!((a.h - 1.0).abs() < 1e-15);
        assert_eq!(a.branch, DepthBranch::AtRest);
        let a = recover_depth(0.0, 2.0 * g + 3.0, 3.0, 2.0, 0.0, g).unwrap();
        assert!((a.h - 2.0).abs() < 1e-14);
    }

    #[test]
    fn subcritical_and_supercritical_roots() {
        let g = 9.812;
        let k = k_of(2.0, 4.42, 0.0, g);
        let a = recover_depth(4.42, k, 0.0, 2.0, 0.0, g).unwrap();
        assert_eq!(a.branch, DepthBranch::Cubic);
        assert!((a.h - 2.0).abs() < 1e-10);
        let k = k_of(2.0, 24.0, 0.0, g);
        let a = recover_depth(24.0, k, 0.0, 2.05, 0.0, g).unwrap();
        assert!((a.h - 2.0).abs() < 1e-10);
    }

    #[test]
    fn fallback_when_no_root() {
        let g = 9.8;
        // D too small for this discharge
        let a = recover_depth(5.0, 0.1, 0.0, 0.7, 0.2, g).unwrap();
        assert_eq!(a.branch, DepthBranch::Fallback);
        assert!((a.h - 0.5).abs() < 1e-15);
        assert!(matches!(
            recover_depth(5.0, 0.1, 0.0, 0.2, 0.3, g),
            Err(SolverError::DepthRecovery { .. })
        ));
        let a = recover_depth(1.0, -1.0, 0.0, 1.0, 0.0, g).unwrap();
        assert_eq!(a.branch, DepthBranch::Fallback);
    }

    #[test]
    fn supercritical_fluxes_take_left_state() {
        let g = 9.812;
        let roe = RoeState::new(2.0, 12.0, 2.0, 12.0, g).unwrap();
        assert!(roe.lambda[0] > 0.0);
        let gl = [24.0, 307.624];
        let gr = [23.9, 307.0];
        assert_eq!(upwind_global_flux(gl, gr, &roe), gl);
        let roe = RoeState::new(2.0, -12.0, 2.0, -12.0, g).unwrap();
        assert_eq!(upwind_global_flux(gl, gr, &roe), gr);
    }

    #[test]
    fn equal_traces_are_consistent() {
        let g = 9.812;
        let roe = RoeState::new(2.0, 2.21, 2.0, 2.21, g).unwrap();
        assert!(roe.lambda[0] < 0.0 && roe.lambda[1] > 0.0);
        let gg = [4.42, 29.3922];
        assert_eq!(upwind_global_flux(gg, gg, &roe), gg);
    }

    #[test]
    fn projectors_sum_to_identity_and_match_eigenvectors() {
        let roe = RoeState::new(1.3, 0.4, 0.9, -0.2, 9.8).unwrap();
        let p0 = roe.projector(0);
        let p1 = roe.projector(1);
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((p0[i][j] + p1[i][j] - id).abs() < 1e-14);
            }
        }
        // P_k = r_k l_k with r_k = (1, lambda_k)
        let l = roe.left_eigenvectors();
        for k in 0..2 {
            let p = roe.projector(k);
            let r = [1.0, roe.lambda[k]];
            for i in 0..2 {
                for j in 0..2 {
                    assert!((p[i][j] - r[i] * l[k][j]).abs() < 1e-14);
                }
            }
        }
        // Jacobian reproduced by the spectral decomposition
        let (h, u) = (roe.h, roe.u);
        let jac = [[0.0, 1.0], [-u * u + 9.8 * h, 2.0 * u]];
        for i in 0..2 {
            for j in 0..2 {
                let s = roe.lambda[0] * p0[i][j] + roe.lambda[1] * p1[i][j];
                assert!((s - jac[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_eigenvalue_counts_as_positive() {
        let g = 1.0;
        // u* = sqrt(g h*) makes lambda_1 = 0
        let roe = RoeState::new(1.0, 1.0, 1.0, 1.0, g).unwrap();
        assert_eq!(roe.lambda[0], 0.0);
        assert_eq!(upwind_global_flux([1.0, 2.0], [3.0, 4.0], &roe), [1.0, 2.0]);
    }

    #[test]
    fn degenerate_roe_state() {
        assert!(RoeState::new(0.0, 0.0, 0.0, 0.0, 9.8).is_err());
    }

    #[test]
    fn rusanov_examples() {
        assert_eq!(
            rusanov_flux([1.0, 0.0], [1.0, 0.0], 1.0).unwrap(),
            [0.0, 0.5]
        );
        let f = rusanov_flux([1.0, 0.0], [0.5, 0.0], 1.0).unwrap();
        assert!((f[0] - 0.25).abs() < 1e-15);
        assert!((f[1] - 0.3125).abs() < 1e-15);
        // independent scalar evaluation
        let (hl, ql, hr, qr, g): (f64, f64, f64, f64, f64) = (1.3, 0.7, 0.8, -0.2, 9.8);
        let s = (ql / hl).abs().max((qr / hr).abs()) + 0.0;
        let s = ((ql / hl).abs() + (g * hl).sqrt())
            .max((qr / hr).abs() + (g * hr).sqrt())
            .max(s);
        let f2l = ql * ql / hl + 0.5 * g * hl * hl;
        let f2r = qr * qr / hr + 0.5 * g * hr * hr;
        let f = rusanov_flux([hl, ql], [hr, qr], g).unwrap();
        assert!((f[0] - (0.5 * (ql + qr) - 0.5 * s * (hr - hl))).abs() < 1e-14);
        assert!((f[1] - (0.5 * (f2l + f2r) - 0.5 * s * (qr - ql))).abs() < 1e-13);
        assert!(rusanov_flux([0.0, 0.0], [1.0, 0.0], 1.0).is_err());
    }
}
