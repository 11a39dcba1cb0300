//! Trajectory classification, equator endpoint extrapolation, curvature
//! fields along a profile, and the two PDE residuals (the second-order
//! membrane relation and the fourth-order bending equation).
//!
//! The angle equation is singular at the equator plane, so the quantities at
//! arc length `ell` (total length, equator radius, angle derivatives) are
//! never read off directly. They are produced by re-integrating the tail
//! with a shrinking stop threshold and fitting the approach with polynomials
//! constrained by the proved limits `phi(ell) = ±π/2` and
//! `phi'(ell) = 2 c_o ∓ 1/r_*`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::lstsq_monomials;
use crate::ode::{
    continue_membrane, ProfileCurve, ProfileKind, ProfileState, ShootingParams, SolverConfig,
    Termination,
};
use crate::stepper::DriverStatus;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("endpoint extrapolation needs an equator-terminated curve")]
    NotEquatorTerminated,
    #[error("endpoint extrapolation applies to membrane-angle curves only")]
    UnsupportedCurveKind,
    #[error("tail re-integration failed before reaching the refined stop threshold")]
    TailIntegrationFailed,
    #[error("endpoint fit is under-determined")]
    FitFailed,
    #[error("stop-threshold refinements stopped contracting: level {level} moved {diff:e} after {prev:e}")]
    ExtrapolationDiverged { level: u32, diff: f64, prev: f64 },
}

/// Qualitative class of a shooting problem, decided by `(c_o, z_0)` alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveClass {
    UnduloidType,
    OvaloidType,
    NodoidType,
    HorizontalLine,
    Circle,
}

/// Classification table: circles for `c_o = 0`; otherwise the sign of
/// `phi'(0) = -1/z_0 - c_o` splits `z_0 > 0`, `-1/c_o < z_0 < 0`, and
/// `z_0 < -1/c_o`, with the horizontal line exactly at `z_0 = -1/c_o`.
pub fn classify(params: &ShootingParams) -> CurveClass {
    if params.c_o == 0.0 {
        return CurveClass::Circle;
    }
    if params.z_0 > 0.0 {
        return CurveClass::UnduloidType;
    }
    let z_line = -1.0 / params.c_o;
    if (params.z_0 - z_line).abs() <= 1e-12 * z_line.abs().max(1.0) {
        CurveClass::HorizontalLine
    } else if params.z_0 > z_line {
        CurveClass::OvaloidType
    } else {
        CurveClass::NodoidType
    }
}

/// Extrapolated equator quantities for one cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointData {
    /// Total arc length of the cap, axis to equator.
    pub ell: f64,
    /// Equator radius.
    pub r_star: f64,
    /// Measured `phi'(ell)`; must reproduce the analytic limit.
    pub dphi: f64,
    /// Extrapolated `phi''(ell)`.
    pub ddphi: f64,
    /// Convergence-based error estimate for `ddphi`.
    pub fit_uncertainty: f64,
}

/// Curvature data at one arc-length sample, oriented so that the membrane
/// relation reads `H + c_o = -nu3 / z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub s: f64,
    /// Mean curvature `sin(phi)/(2r) + phi'/2`.
    pub h: f64,
    /// Gaussian curvature `phi' sin(phi)/r`.
    pub k: f64,
    /// Vertical normal component `cos(phi)`.
    pub nu3: f64,
}

fn curvature_at(state: &ProfileState) -> CurvatureSample {
    let (sin_phi, cos_phi) = state.phi.sin_cos();
    CurvatureSample {
        s: state.s,
        h: sin_phi / (2.0 * state.r) + state.dphi / 2.0,
        k: state.dphi * sin_phi / state.r,
        nu3: cos_phi,
    }
}

/// Curvature fields at every stored sample. The angle rate is the stored
/// analytic rate, never a finite difference of the trajectory.
pub fn curvature_fields(curve: &ProfileCurve) -> Vec<CurvatureSample> {
    curve.samples.iter().map(curvature_at).collect()
}

/// Max residual of the membrane relation `H + c_o + cos(phi)/z` over the
/// samples with `z != 0` (a discoid rim sample sits exactly on the plane).
///
/// Algebraically zero for curves generated by the membrane angle equation;
/// bounded away from zero for profiles that merely solve the fourth-order
/// equation (the discoid family).
pub fn rme_residual(curve: &ProfileCurve) -> f64 {
    let c_o = curve.params.c_o;
    curve
        .samples
        .iter()
        .filter(|p| p.z != 0.0)
        .map(|p| {
            let cs = curvature_at(p);
            (cs.h + c_o + p.phi.cos() / p.z).abs()
        })
        .fold(0.0, f64::max)
}

/// Oriented sign of the equator angle: `phi(ell) = eq_sign * π/2`.
pub(crate) fn equator_sign(params: &ShootingParams) -> f64 {
    if params.z_0 > 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Analytic limit of `phi'(ell)` for a cap meeting the equator with radius
/// `r_star`: `2 c_o - 1/r_star` for caps descending from `z_0 > 0`,
/// `2 c_o + 1/r_star` for caps rising from `z_0 < 0`.
pub fn endpoint_phi_rate(params: &ShootingParams, r_star: f64) -> f64 {
    2.0 * params.c_o + equator_sign(params) / r_star
}

/// Fit window width for the equator approach. The window shrinks with the
/// local inverse length scale at the equator — the angle rate, 1/r_star, and
/// c_o all bound the growth of the omitted Taylor orders — so the fits stay
/// below their noise floor across the whole height range.
fn fit_window(params: &ShootingParams, ell_rough: f64, r_end: f64) -> f64 {
    let osc = if params.c_o.abs() > 0.0 {
        (1.0 / params.c_o.abs()).min(params.z_0.abs().max(1.0))
    } else {
        params.z_0.abs()
    };
    let inv_scale = endpoint_phi_rate(params, r_end)
        .abs()
        .max(1.0 / r_end.max(1e-12))
        .max(params.c_o.abs())
        .max(1.0);
    (0.35 * ell_rough).min(0.15 * osc).min(0.30 / inv_scale)
}

struct TailSolve {
    ell: f64,
    r_star: f64,
    dphi_limit: f64,
}

/// Solve `(delta, r_star, phi'(ell))` from one near-equator state using the
/// endpoint Taylor model; `ddphi` feeds the O(δ³)/O(δ⁴) correction terms.
fn solve_endpoint(params: &ShootingParams, end: &ProfileState, ddphi: f64) -> TailSolve {
    let tau = equator_sign(params);
    let mut delta = end.z.abs();
    let mut r_star = end.r;
    let mut dphi_limit = endpoint_phi_rate(params, r_star);
    for _ in 0..4 {
        dphi_limit = endpoint_phi_rate(params, r_star);
        delta = end.z.abs() + dphi_limit * dphi_limit * delta.powi(3) / 6.0
            - dphi_limit * ddphi * delta.powi(4) / 8.0;
        r_star = end.r + tau * dphi_limit * delta * delta / 2.0 - tau * ddphi * delta.powi(3) / 6.0;
    }
    TailSolve {
        ell: end.s + delta,
        r_star,
        dphi_limit,
    }
}

/// Extrapolate `(ell, r_star, phi'(ell), phi''(ell))` at the equator.
///
/// The tail is re-integrated with stop thresholds `z_stop / 2^k`,
/// `k = 0..=richardson_levels`, on a dense grid. Each level solves the
/// endpoint from its deepest state and fits the constrained expansion
/// `phi + π/2·sign - phi'(ell)·δ = Σ_{m≥2} a_m δ^m` over the approach
/// window; `phi''(ell) = 2 a_2`. The reported uncertainty combines the last
/// two level differences with the disagreement against an independent fit of
/// the analytically evaluated rate `phi'(s)`.
pub fn endpoint_extrapolate(
    curve: &ProfileCurve,
    config: &SolverConfig,
) -> Result<EndpointData, AnalysisError> {
    if curve.kind != ProfileKind::Membrane {
        return Err(AnalysisError::UnsupportedCurveKind);
    }
    if curve.termination != Termination::EquatorReached {
        return Err(AnalysisError::NotEquatorTerminated);
    }
    let params = &curve.params;
    let tau = equator_sign(params);
    let end = curve.last();
    let ell_rough = end.s + end.z.abs();
    let w = fit_window(params, ell_rough, end.r);
    let z_stop = config.z_stop_abs(params);

    // Dense window: restart just outside the window and re-integrate with a
    // capped step so the fits see a uniform-density approach.
    let restart_idx = curve
        .samples
        .iter()
        .rposition(|p| p.s <= ell_rough - 1.05 * w)
        .unwrap_or(0);
    let mut dense: Vec<ProfileState> = vec![curve.samples[restart_idx]];
    let max_step = w / 64.0;

    let levels = config.richardson_levels;
    let mut level_end = Vec::with_capacity(levels as usize + 1);
    for k in 0..=levels {
        let target = z_stop / 2f64.powi(k as i32);
        let from = *dense.last().unwrap();
        if from.z.abs() > target {
            let status = continue_membrane(params, &from, target, max_step, config, &mut dense);
            if status != DriverStatus::EventHit {
                return Err(AnalysisError::TailIntegrationFailed);
            }
        }
        level_end.push(dense.len() - 1);
    }

    // Per-level constrained fits.
    let mut dd_levels: Vec<f64> = Vec::with_capacity(level_end.len());
    let mut last_solve = None;
    for (k, &idx) in level_end.iter().enumerate() {
        let dd_prev = dd_levels.last().copied().unwrap_or(0.0);
        let solve = solve_endpoint(params, &dense[idx], dd_prev);
        let mut xs = Vec::new();
        let mut us = Vec::new();
        for p in &dense[..=idx] {
            let delta = solve.ell - p.s;
            if delta <= 0.0 || delta > w {
                continue;
            }
            xs.push(delta / w);
            us.push(p.phi - tau * std::f64::consts::FRAC_PI_2 + solve.dphi_limit * delta);
        }
        let coeffs = lstsq_monomials(&xs, &us, &[2, 3, 4, 5]).ok_or(AnalysisError::FitFailed)?;
        let dd = 2.0 * coeffs[0] / (w * w);
        if k + 1 == level_end.len() {
            last_solve = Some(solve_endpoint(params, &dense[idx], dd));
        }
        dd_levels.push(dd);
    }
    let solve = last_solve.expect("at least one level");

    // Contraction check with a roundoff floor: refinements must shrink the
    // level-to-level movement unless it is already negligible.
    let ddphi = *dd_levels.last().unwrap();
    let floor = 1e-8 * (1.0 + ddphi.abs());
    let mut diffs = Vec::new();
    for pair in dd_levels.windows(2) {
        diffs.push((pair[1] - pair[0]).abs());
    }
    for (i, pair) in diffs.windows(2).enumerate() {
        if pair[1] > 0.5 * pair[0] && pair[1] > floor {
            return Err(AnalysisError::ExtrapolationDiverged {
                level: i as u32 + 2,
                diff: pair[1],
                prev: pair[0],
            });
        }
    }

    // Unconstrained-slope fit: measures phi'(ell) instead of assuming it, so
    // the analytic limit is something the data must reproduce.
    let deepest = level_end[level_end.len() - 1];
    let mut xs = Vec::new();
    let mut u0 = Vec::new();
    let mut xs_rate = Vec::new();
    let mut v_rate = Vec::new();
    for p in &dense[..=deepest] {
        let delta = solve.ell - p.s;
        if delta <= 0.0 || delta > w {
            continue;
        }
        xs.push(delta / w);
        u0.push(p.phi - tau * std::f64::consts::FRAC_PI_2);
        if delta >= w / 16.0 {
            xs_rate.push(delta / w);
            v_rate.push(p.dphi - solve.dphi_limit);
        }
    }
    let slope_fit = lstsq_monomials(&xs, &u0, &[1, 2, 3, 4, 5]).ok_or(AnalysisError::FitFailed)?;
    let dphi_measured = -slope_fit[0] / w;
    let rate_fit =
        lstsq_monomials(&xs_rate, &v_rate, &[1, 2, 3, 4]).ok_or(AnalysisError::FitFailed)?;
    let ddphi_from_rate = -rate_fit[0] / w;

    let level_diff = diffs.last().copied().unwrap_or(0.0);
    let fit_uncertainty = level_diff
        .max(0.5 * (ddphi - ddphi_from_rate).abs())
        .max(1e-12 * (1.0 + ddphi.abs()));

    Ok(EndpointData {
        ell: solve.ell,
        r_star: solve.r_star,
        dphi: dphi_measured,
        ddphi,
        fit_uncertainty,
    })
}

/// Max residual of the fourth-order equation
/// `ΔH + 2 (H + c_o) (H (H - c_o) - K)` on a uniform grid of spacing `ds`,
/// with `ΔH = H'' + (cos(phi)/r) H'` by centered differences.
///
/// Excludes the axis series zone (`s < 5 h0`) and, for equator-terminated
/// curves, the extrapolation tail (`10 × stop height`). The curve should be
/// sampled at least twice as densely as `ds`; resampling is cubic Hermite.
pub fn el_residual(curve: &ProfileCurve, ds: f64) -> f64 {
    el_residual_filtered(curve, ds, 2, 0.0)
}

/// Shared stencil driver. `order` selects 3-point (2) or 5-point (4)
/// differencing; residuals are reported only at nodes with `r >= r_min`.
pub(crate) fn el_residual_filtered(curve: &ProfileCurve, ds: f64, order: usize, r_min: f64) -> f64 {
    assert!(order == 2 || order == 4, "stencil order must be 2 or 4");
    let first = curve.samples.first().expect("curve has samples");
    let end = curve.last();
    let s_lo = 5.0 * first.s;
    // Near the stop plane the angle-rate evaluation loses digits to the
    // 0/0 cancellation, and second differences amplify that by 1/ds^2, so
    // the equator margin scales with the stencil as well as the stop height.
    let s_hi = if curve.termination == Termination::EquatorReached {
        end.s - (10.0 * curve.stop_height).max(25.0 * ds)
    } else {
        end.s
    };
    let n = ((s_hi - s_lo) / ds).floor() as usize;
    assert!(n >= order + 5, "el_residual grid too coarse for the curve");

    let c_o = curve.params.c_o;
    let mut h_vals = Vec::with_capacity(n + 1);
    let mut nodes = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let st = curve.state_at(s_lo + j as f64 * ds);
        h_vals.push(curvature_at(&st).h);
        nodes.push(st);
    }

    let m = order / 2;
    let mut max_resid: f64 = 0.0;
    for j in m..=(n - m) {
        let st = &nodes[j];
        if st.r < r_min {
            continue;
        }
        let (hp, hpp) = if order == 2 {
            (
                (h_vals[j + 1] - h_vals[j - 1]) / (2.0 * ds),
                (h_vals[j + 1] - 2.0 * h_vals[j] + h_vals[j - 1]) / (ds * ds),
            )
        } else {
            (
                (h_vals[j - 2] - 8.0 * h_vals[j - 1] + 8.0 * h_vals[j + 1] - h_vals[j + 2])
                    / (12.0 * ds),
                (-h_vals[j - 2] + 16.0 * h_vals[j - 1] - 30.0 * h_vals[j] + 16.0 * h_vals[j + 1]
                    - h_vals[j + 2])
                    / (12.0 * ds * ds),
            )
        };
        let cs = curvature_at(st);
        let lap = hpp + st.phi.cos() / st.r * hp;
        let resid = (lap + 2.0 * (cs.h + c_o) * (cs.h * (cs.h - c_o) - cs.k)).abs();
        max_resid = max_resid.max(resid);
    }
    max_resid
}
