//! Profile-curve initial value problem for axially symmetric membrane
//! surfaces: series start at the axis, adaptive integration, controlled stop
//! at the equator plane, first-integral residual, and the scaling map.
//!
//! The generating curve `(r(s), z(s))` is parameterized by arc length with
//! tangent angle `phi`, so `r' = cos phi`, `z' = sin phi`, and
//! `phi' = -2 cos(phi)/z - sin(phi)/r - 2 c_o`. Both `r = 0` (the axis) and
//! `z = 0` (the equator plane) are singular points of the angle equation;
//! the axis is handled by a Taylor start and the equator by stopping at a
//! small height and extrapolating in the analysis module.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{classify, CurveClass};
use crate::stepper::{integrate_adaptive, DriverOpts, DriverStatus};

#[derive(Debug, Error, PartialEq)]
pub enum OdeError {
    #[error("initial height z_0 must be nonzero and finite")]
    InvalidHeight,
    #[error("spontaneous curvature must be finite and >= 0 (rescale negative c_o by lambda = -1)")]
    InvalidCurvature,
    #[error("singular point: need r > 0 and z != 0, got r = {r}, z = {z}")]
    SingularPoint { r: f64, z: f64 },
    #[error("series offset h0 must be positive, got {0}")]
    InvalidOffset(f64),
    #[error("scaling factor must be nonzero and finite")]
    InvalidScale,
    #[error("solver configuration rejected: {0}")]
    InvalidConfig(&'static str),
}

/// The pair `(c_o, z_0)` defining one shooting problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingParams {
    /// Spontaneous curvature, units 1/length. Non-negative for integration;
    /// curves produced by `apply_scaling` with negative lambda may carry a
    /// negative value.
    pub c_o: f64,
    /// Initial height of the axis point, nonzero.
    pub z_0: f64,
}

impl ShootingParams {
    pub fn new(c_o: f64, z_0: f64) -> Result<Self, OdeError> {
        if !z_0.is_finite() || z_0 == 0.0 {
            return Err(OdeError::InvalidHeight);
        }
        if !c_o.is_finite() || c_o < 0.0 {
            return Err(OdeError::InvalidCurvature);
        }
        Ok(Self { c_o, z_0 })
    }

    /// Tangent-angle rate at the axis point, by the singular limit of the
    /// angle equation: `phi'(0) = -1/z_0 - c_o`.
    pub fn initial_phi_rate(&self) -> f64 {
        -1.0 / self.z_0 - self.c_o
    }
}

/// One arc-length sample of the profile curve. `dphi` is the tangent-angle
/// rate at the sample, stored so downstream interpolation and curvature
/// evaluation never re-difference the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub s: f64,
    pub r: f64,
    pub z: f64,
    pub phi: f64,
    pub dphi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// Stopped at |z| <= z_stop with the tangent angle near ±π/2.
    EquatorReached,
    /// Ran to the arc-length cap (horizontal line and nodoid-type curves).
    MaxArcLength,
    /// Guard violation or step-size underflow; data up to the failure is kept.
    StepFailure,
}

/// How the tangent angle is generated along the curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// `phi` solves the reduced-membrane angle equation.
    Membrane,
    /// `phi = arcsin(-2 c_o r ln r + a r)` evaluated pointwise from `r`.
    Discoid { a: f64 },
}

/// An arc-length-sampled trajectory with termination metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub params: ShootingParams,
    pub kind: ProfileKind,
    pub samples: Vec<ProfileState>,
    pub termination: Termination,
    /// Smallest |z| reached along the trajectory.
    pub stop_height: f64,
}

/// Solver knobs. Length-like fields are stored relative to the natural
/// problem scales and resolved per shooting problem:
///
/// * `h0` multiplies `max(1, |z_0|)`,
/// * `z_stop` multiplies `|z_0|`,
/// * `s_max` divides by `max(c_o, 1)`,
/// * `max_step` multiplies `min(|z_0|, 1/c_o)` (just `|z_0|` when `c_o = 0`),
///
/// which keeps one config usable across a whole `z_0` sweep and makes the
/// sampling covariant under the scaling map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Series-start offset from the axis (relative).
    pub h0: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Equator stop threshold (relative to |z_0|); must be < 1.
    pub z_stop: f64,
    /// Arc-length cap (relative).
    pub s_max: f64,
    /// Sample-spacing cap (relative); bounds interpolation error downstream.
    pub max_step: f64,
    /// Accepted half-width around ±π/2 for classifying an equator stop, radians.
    pub phi_window: f64,
    /// Stop-threshold refinements used by endpoint extrapolation.
    pub richardson_levels: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            h0: 1e-6,
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            z_stop: 1e-4,
            s_max: 50.0,
            max_step: 0.02,
            phi_window: 0.5,
            richardson_levels: 4,
        }
    }
}

impl SolverConfig {
    pub fn h0_abs(&self, params: &ShootingParams) -> f64 {
        self.h0 * params.z_0.abs().max(1.0)
    }

    pub fn z_stop_abs(&self, params: &ShootingParams) -> f64 {
        self.z_stop * params.z_0.abs()
    }

    pub fn s_max_abs(&self, params: &ShootingParams) -> f64 {
        self.s_max / params.c_o.abs().max(1.0)
    }

    pub fn max_step_abs(&self, params: &ShootingParams) -> f64 {
        let scale = if params.c_o != 0.0 {
            params.z_0.abs().min(1.0 / params.c_o.abs())
        } else {
            params.z_0.abs()
        };
        self.max_step * scale
    }

    pub fn validate(&self, params: &ShootingParams) -> Result<(), OdeError> {
        let all_pos = self.h0 > 0.0
            && self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.z_stop > 0.0
            && self.s_max > 0.0
            && self.max_step > 0.0
            && self.phi_window > 0.0;
        if !all_pos {
            return Err(OdeError::InvalidConfig("all fields must be positive"));
        }
        if self.z_stop >= 1.0 {
            return Err(OdeError::InvalidConfig("z_stop must be below |z_0|"));
        }
        if self.h0_abs(params) >= 0.01 * params.z_0.abs() {
            return Err(OdeError::InvalidConfig("h0 must be small against |z_0|"));
        }
        Ok(())
    }
}

/// Right-hand side of the profile system at a regular point.
///
/// Returns `(dr, dz, dphi)` per unit arc length.
pub fn rhs(state: &ProfileState, c_o: f64) -> Result<(f64, f64, f64), OdeError> {
    if state.r <= 0.0 || state.z == 0.0 {
        return Err(OdeError::SingularPoint {
            r: state.r,
            z: state.z,
        });
    }
    let (sin_phi, cos_phi) = state.phi.sin_cos();
    Ok((
        cos_phi,
        sin_phi,
        -2.0 * cos_phi / state.z - sin_phi / state.r - 2.0 * c_o,
    ))
}

#[inline]
fn membrane_rates(c_o: f64, y: &[f64; 3]) -> [f64; 3] {
    let (sin_phi, cos_phi) = y[2].sin_cos();
    [
        cos_phi,
        sin_phi,
        -2.0 * cos_phi / y[1] - sin_phi / y[0] - 2.0 * c_o,
    ]
}

/// Tangent-angle rate for a given curve kind at a regular point.
pub(crate) fn phi_rate(kind: ProfileKind, c_o: f64, r: f64, z: f64, phi: f64) -> f64 {
    match kind {
        ProfileKind::Membrane => {
            let (sin_phi, cos_phi) = phi.sin_cos();
            -2.0 * cos_phi / z - sin_phi / r - 2.0 * c_o
        }
        ProfileKind::Discoid { a } => -2.0 * c_o * (r.ln() + 1.0) + a,
    }
}

/// Taylor state at arc length `h0` from the axis point.
///
/// Труncation: the expansion uses `phi(0) = 0`, `phi'(0) = -1/z_0 - c_o`,
/// `phi''(0) = 0`, and the forced third derivative
/// `phi'''(0) = -(3 c_o / 2) phi'(0) / z_0`, giving
///
/// * `phi` and `r` to O(h0^5),
/// * `z`          to O(h0^6),
///
/// so with the default `h0 = 1e-6 max(1, |z_0|)` the truncation error sits
/// far below the integration tolerances.
pub fn series_start(params: &ShootingParams, h0: f64) -> Result<ProfileState, OdeError> {
    if !h0.is_finite() || h0 <= 0.0 {
        return Err(OdeError::InvalidOffset(h0));
    }
    if params.z_0 == 0.0 {
        return Err(OdeError::InvalidHeight);
    }
    let z0 = params.z_0;
    let a = params.initial_phi_rate();
    let b = -1.5 * params.c_o * a / z0; // phi'''(0)

    let r = h0 - a * a * h0.powi(3) / 6.0;
    let z = z0 + a * h0 * h0 / 2.0 + (b - a.powi(3)) * h0.powi(4) / 24.0;
    let phi = a * h0 + b * h0.powi(3) / 6.0;
    let mut state = ProfileState {
        s: h0,
        r,
        z,
        phi,
        dphi: 0.0,
    };
    let (_, _, dphi) = rhs(&state, params.c_o)?;
    state.dphi = dphi;
    Ok(state)
}

/// Tangent-angle band that a class provably stays inside, padded by the
/// configured window. Height decreases strictly along unduloid-type curves,
/// which pins sin(phi) < 0, i.e. phi in (-pi, 0) — the radius itself may
/// oscillate, so the angle does cross -pi/2 on elongated profiles.
/// Nodoid-type angles wind without bound and get no band.
fn phi_band(class: CurveClass, window: f64) -> Option<(f64, f64)> {
    use std::f64::consts::{FRAC_PI_2, PI};
    match class {
        CurveClass::UnduloidType => Some((-PI, window)),
        CurveClass::OvaloidType => Some((-window, FRAC_PI_2 + window)),
        CurveClass::Circle => Some((-FRAC_PI_2 - window, FRAC_PI_2 + window)),
        CurveClass::HorizontalLine => Some((-window, window)),
        CurveClass::NodoidType => None,
    }
}

/// Integrate the shooting problem from the series start.
///
/// Terminates with `EquatorReached` at `|z| = z_stop` (the stop point is
/// located to solver accuracy), `MaxArcLength` at the arc-length cap, or
/// `StepFailure` when a guard trips or the step controller underflows.
pub fn integrate_profile(
    params: &ShootingParams,
    config: &SolverConfig,
) -> Result<ProfileCurve, OdeError> {
    if params.c_o < 0.0 {
        return Err(OdeError::InvalidCurvature);
    }
    config.validate(params)?;

    let start = series_start(params, config.h0_abs(params))?;
    let z_stop = config.z_stop_abs(params);
    let s_max = config.s_max_abs(params);
    let max_step = config.max_step_abs(params);
    let class = classify(params);
    let band = phi_band(class, config.phi_window);

    let c_o = params.c_o;
    let z_sign = params.z_0.signum();
    let f = move |_s: f64, y: &[f64; 3]| membrane_rates(c_o, y);
    // Signed distance to the stop plane: crosses zero exactly once even when
    // a step straddles the thin |z| <= z_stop band.
    let event = move |_s: f64, y: &[f64; 3]| z_sign * y[1] - z_stop;
    let guard = move |_s: f64, y: &[f64; 3]| {
        y[0] > 0.0
            && y[1].is_finite()
            && match band {
                Some((lo, hi)) => y[2] > lo && y[2] < hi,
                None => y[2].is_finite(),
            }
    };

    let mut samples = vec![start];
    let opts = DriverOpts {
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
        max_step,
        h_init: max_step / 16.0,
        s_end: s_max,
    };
    let status = integrate_adaptive(
        &f,
        start.s,
        [start.r, start.z, start.phi],
        &opts,
        &event,
        &guard,
        &mut |s, y, dy| {
            samples.push(ProfileState {
                s,
                r: y[0],
                z: y[1],
                phi: y[2],
                dphi: dy[2],
            });
        },
    );

    let termination = match status {
        DriverStatus::EventHit => {
            let end = samples.last().unwrap();
            let target = if params.z_0 > 0.0 {
                -std::f64::consts::FRAC_PI_2
            } else {
                std::f64::consts::FRAC_PI_2
            };
            if (end.phi - target).abs() <= config.phi_window {
                Termination::EquatorReached
            } else {
                Termination::StepFailure
            }
        }
        DriverStatus::ReachedEnd => Termination::MaxArcLength,
        DriverStatus::GuardTripped | DriverStatus::StepUnderflow => Termination::StepFailure,
    };

    let stop_height = samples
        .iter()
        .map(|p| p.z.abs())
        .fold(f64::INFINITY, f64::min);
    Ok(ProfileCurve {
        params: *params,
        kind: ProfileKind::Membrane,
        samples,
        termination,
        stop_height,
    })
}

/// Continue a membrane trajectory from `from` until `|z|` reaches `z_target`,
/// recording every accepted state. Used by endpoint extrapolation to densify
/// the equator approach below the main stop threshold.
pub(crate) fn continue_membrane(
    params: &ShootingParams,
    from: &ProfileState,
    z_target: f64,
    max_step: f64,
    config: &SolverConfig,
    out: &mut Vec<ProfileState>,
) -> DriverStatus {
    let c_o = params.c_o;
    let z_sign = params.z_0.signum();
    let f = move |_s: f64, y: &[f64; 3]| membrane_rates(c_o, y);
    let event = move |_s: f64, y: &[f64; 3]| z_sign * y[1] - z_target;
    let guard = move |_s: f64, y: &[f64; 3]| y[0] > 0.0 && y[1] != 0.0;
    let opts = DriverOpts {
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
        max_step,
        h_init: max_step / 8.0,
        s_end: from.s + config.s_max_abs(params),
    };
    integrate_adaptive(
        &f,
        from.s,
        [from.r, from.z, from.phi],
        &opts,
        &event,
        &guard,
        &mut |s, y, dy| {
            out.push(ProfileState {
                s,
                r: y[0],
                z: y[1],
                phi: y[2],
                dphi: dy[2],
            });
        },
    )
}

impl ProfileCurve {
    pub fn last(&self) -> &ProfileState {
        self.samples.last().expect("curve has samples")
    }

    pub fn arc_length(&self) -> f64 {
        self.last().s
    }

    /// Cubic Hermite state at arc length `s`, using the stored rates
    /// `(cos phi, sin phi, dphi)` as interval derivatives. `dphi` at the
    /// interpolated point is re-evaluated from the curve's angle law.
    pub fn state_at(&self, s: f64) -> ProfileState {
        let samples = &self.samples;
        let first = samples.first().expect("curve has samples");
        let last = samples.last().unwrap();
        if s <= first.s {
            return *first;
        }
        if s >= last.s {
            return *last;
        }
        let idx = match samples.binary_search_by(|p| p.s.partial_cmp(&s).unwrap()) {
            Ok(i) => return samples[i],
            Err(i) => i - 1,
        };
        let (p0, p1) = (&samples[idx], &samples[idx + 1]);
        let h = p1.s - p0.s;
        let t = (s - p0.s) / h;
        let (sin0, cos0) = p0.phi.sin_cos();
        let (sin1, cos1) = p1.phi.sin_cos();
        let r = crate::numeric::hermite(p0.r, cos0, p1.r, cos1, h, t);
        let z = crate::numeric::hermite(p0.z, sin0, p1.z, sin1, h, t);
        let phi = crate::numeric::hermite(p0.phi, p0.dphi, p1.phi, p1.dphi, h, t);
        let dphi = phi_rate(self.kind, self.params.c_o, r, z, phi);
        ProfileState { s, r, z, phi, dphi }
    }
}

/// Max first-integral defect along the curve:
/// `| r (sin phi + c_o r) + 2 ∫_0^s r cos^2(phi)/z dt |`.
///
/// The integral is accumulated by corrected-trapezoid quadrature on the
/// sample grid with the analytic limit `∫_0^{h0} ≈ h0^2 / (2 z_0)` on the
/// initial axis segment. Identically zero for exact solutions of the
/// membrane angle equation; the value measures integrator error.
pub fn conserved_residual(curve: &ProfileCurve) -> f64 {
    debug_assert!(curve.termination != Termination::StepFailure);
    let c_o = curve.params.c_o;
    let integrand = |p: &ProfileState| -> (f64, f64) {
        let (sin_phi, cos_phi) = p.phi.sin_cos();
        let g = p.r * cos_phi * cos_phi / p.z;
        let gp = cos_phi.powi(3) / p.z
            - 2.0 * p.r * cos_phi * sin_phi * p.dphi / p.z
            - p.r * cos_phi * cos_phi * sin_phi / (p.z * p.z);
        (g, gp)
    };

    let first = curve.samples.first().expect("curve has samples");
    let mut integral = first.s * first.s / (2.0 * curve.params.z_0);
    let residual = |p: &ProfileState, integral: f64| -> f64 {
        (p.r * (p.phi.sin() + c_o * p.r) + 2.0 * integral).abs()
    };

    let mut max_resid = residual(first, integral);
    let (mut g0, mut gp0) = integrand(first);
    for pair in curve.samples.windows(2) {
        let p1 = &pair[1];
        let (g1, gp1) = integrand(p1);
        integral += crate::numeric::hermite_quad(g0, gp0, g1, gp1, p1.s - pair[0].s);
        max_resid = max_resid.max(residual(p1, integral));
        g0 = g1;
        gp0 = gp1;
    }
    max_resid
}

/// Rescale a curve by `lambda != 0`:
/// `r ↦ λ r(s/λ)`, `z ↦ λ z(s/λ)`, `phi ↦ phi(s/λ)`, params `(c_o/λ, λ z_0)`.
///
/// A negative `lambda` composes the positive scaling with the extension of
/// the curve through the axis, which lands on the reflected representation
/// `(r, -z, -phi)` carrying params `(-c_o/|λ|, -|λ| z_0)`; such curves are
/// valid containers for analysis but cannot be re-integrated directly.
pub fn apply_scaling(curve: &ProfileCurve, lambda: f64) -> Result<ProfileCurve, OdeError> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(OdeError::InvalidScale);
    }
    let mag = lambda.abs();
    let flip = lambda < 0.0;
    let (z_sign, phi_sign) = if flip { (-1.0, -1.0) } else { (1.0, 1.0) };

    let samples = curve
        .samples
        .iter()
        .map(|p| ProfileState {
            s: mag * p.s,
            r: mag * p.r,
            z: z_sign * mag * p.z,
            phi: phi_sign * p.phi,
            dphi: p.dphi / lambda,
        })
        .collect();
    let kind = match curve.kind {
        ProfileKind::Membrane => ProfileKind::Membrane,
        ProfileKind::Discoid { a } => ProfileKind::Discoid {
            a: (a + 2.0 * curve.params.c_o * mag.ln()) / lambda,
        },
    };
    Ok(ProfileCurve {
        params: ShootingParams {
            c_o: curve.params.c_o / lambda,
            z_0: lambda * curve.params.z_0,
        },
        kind,
        samples,
        termination: curve.termination,
        stop_height: mag * curve.stop_height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn state(r: f64, z: f64, phi: f64) -> ProfileState {
        ProfileState {
            s: 0.0,
            r,
            z,
            phi,
            dphi: 0.0,
        }
    }

    #[test]
    fn rhs_on_exact_circle_state() {
        // r = sin s, z = cos s, phi = -s solves the system at c_o = 0 with dphi = -1.
        let s = 0.3f64;
        let (dr, dz, dphi) = rhs(&state(s.sin(), s.cos(), -s), 0.0).unwrap();
        assert!((dr - s.cos()).abs() < 1e-15);
        assert!((dz + s.sin()).abs() < 1e-15);
        assert!((dphi + 1.0).abs() < 1e-13);
    }

    #[test]
    fn rhs_line_is_stationary_in_phi() {
        let (dr, dz, dphi) = rhs(&state(1.0, -1.0, 0.0), 1.0).unwrap();
        assert_eq!((dr, dz, dphi), (1.0, 0.0, 0.0));
    }

    #[test]
    fn rhs_closed_form_point() {
        let (dr, dz, dphi) = rhs(&state(0.5, 0.5, -FRAC_PI_4), 1.0).unwrap();
        assert!((dr - SQRT_2 / 2.0).abs() < 1e-15);
        assert!((dz + SQRT_2 / 2.0).abs() < 1e-15);
        assert!((dphi - (-SQRT_2 - 2.0)).abs() < 1e-13);
    }

    #[test]
    fn rhs_rejects_singular_points() {
        assert!(rhs(&state(0.0, 1.0, 0.0), 1.0).is_err());
        assert!(rhs(&state(1.0, 0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn series_start_axis_rate_limit() {
        // phi/h0 → phi'(0) = -1/z_0 - c_o = -2 for (c_o, z_0) = (1, 1).
        let p = ShootingParams::new(1.0, 1.0).unwrap();
        let mut prev_err = f64::INFINITY;
        for k in 2..6 {
            let h0 = 10f64.powi(-k);
            let st = series_start(&p, h0).unwrap();
            let err = (st.phi / h0 + 2.0).abs();
            assert!(err < prev_err || err < 1e-12);
            prev_err = err;
        }
        assert!(prev_err < 1e-9);
    }

    #[test]
    fn series_start_matches_circle() {
        let p = ShootingParams::new(0.0, 1.0).unwrap();
        let h0 = 1e-3;
        let st = series_start(&p, h0).unwrap();
        assert!((st.r - h0.sin()).abs() < 1e-9);
        assert!((st.z - h0.cos()).abs() < 1e-9);
        assert!((st.phi + h0).abs() < 1e-9);
    }

    #[test]
    fn series_start_ovaloid_opens_upward() {
        let p = ShootingParams::new(1.0, -0.5).unwrap();
        assert!(p.initial_phi_rate() > 0.0);
        let st = series_start(&p, 1e-6).unwrap();
        assert!(st.phi > 0.0);
    }

    #[test]
    fn series_start_rejects_bad_offset() {
        let p = ShootingParams::new(1.0, 1.0).unwrap();
        assert!(series_start(&p, 0.0).is_err());
        assert!(series_start(&p, -1e-6).is_err());
    }

    #[test]
    fn integrates_quarter_circle() {
        let p = ShootingParams::new(0.0, 1.0).unwrap();
        let curve = integrate_profile(&p, &SolverConfig::default()).unwrap();
        assert_eq!(curve.termination, Termination::EquatorReached);
        let mut max_err: f64 = 0.0;
        for st in &curve.samples {
            max_err = max_err.max((st.r - st.s.sin()).abs());
            max_err = max_err.max((st.z - st.s.cos()).abs());
        }
        assert!(max_err < 1e-8, "circle error {max_err}");
        assert!((curve.arc_length() - FRAC_PI_2).abs() < 2e-4);
    }

    #[test]
    fn integrates_horizontal_line() {
        let p = ShootingParams::new(1.0, -1.0).unwrap();
        let mut config = SolverConfig::default();
        config.s_max = 20.0;
        let curve = integrate_profile(&p, &config).unwrap();
        assert_eq!(curve.termination, Termination::MaxArcLength);
        for st in &curve.samples {
            assert!((st.z + 1.0).abs() < 1e-8);
            assert!(st.phi.abs() < 1e-8);
        }
    }

    #[test]
    fn nodoid_stays_below_line_height() {
        let p = ShootingParams::new(1.0, -2.0).unwrap();
        let mut config = SolverConfig::default();
        config.s_max = 12.0;
        let curve = integrate_profile(&p, &config).unwrap();
        assert_eq!(curve.termination, Termination::MaxArcLength);
        assert!(curve.samples.iter().all(|st| st.z < -1.0));
        // Self-intersecting convex curve: the angle leaves (-pi, pi).
        assert!(curve
            .samples
            .iter()
            .any(|st| st.phi < -std::f64::consts::PI));
    }

    #[test]
    fn conserved_residual_circle() {
        let p = ShootingParams::new(0.0, 1.0).unwrap();
        let curve = integrate_profile(&p, &SolverConfig::default()).unwrap();
        assert!(conserved_residual(&curve) < 1e-7);
    }

    #[test]
    fn conserved_residual_unduloid() {
        let p = ShootingParams::new(1.0, 0.5).unwrap();
        let curve = integrate_profile(&p, &SolverConfig::default()).unwrap();
        assert_eq!(curve.termination, Termination::EquatorReached);
        assert!(conserved_residual(&curve) < 1e-6);
    }

    #[test]
    fn conserved_residual_line() {
        let p = ShootingParams::new(1.0, -1.0).unwrap();
        let mut config = SolverConfig::default();
        config.s_max = 10.0;
        let curve = integrate_profile(&p, &config).unwrap();
        assert!(conserved_residual(&curve) < 1e-9);
    }

    #[test]
    fn scaling_identity() {
        let p = ShootingParams::new(1.0, 0.5).unwrap();
        let curve = integrate_profile(&p, &SolverConfig::default()).unwrap();
        let scaled = apply_scaling(&curve, 1.0).unwrap();
        assert_eq!(curve, scaled);
    }

    #[test]
    fn scaling_circle_doubles_radius() {
        let p = ShootingParams::new(0.0, 1.0).unwrap();
        let curve = integrate_profile(&p, &SolverConfig::default()).unwrap();
        let scaled = apply_scaling(&curve, 2.0).unwrap();
        assert_eq!(scaled.params.z_0, 2.0);
        for st in &scaled.samples {
            assert!((st.r - 2.0 * (st.s / 2.0).sin()).abs() < 2e-8);
            assert!((st.z - 2.0 * (st.s / 2.0).cos()).abs() < 2e-8);
        }
    }

    #[test]
    fn scaling_matches_direct_integration() {
        let config = SolverConfig::default();
        let base = integrate_profile(&ShootingParams::new(1.0, 0.7).unwrap(), &config).unwrap();
        let scaled = apply_scaling(&base, 2.0).unwrap();
        let direct = integrate_profile(&ShootingParams::new(0.5, 1.4).unwrap(), &config).unwrap();
        let s_hi = scaled.arc_length().min(direct.arc_length());
        for i in 0..=200 {
            let s =
                scaled.samples[0].s.max(direct.samples[0].s) + i as f64 / 200.0 * (s_hi * 0.999);
            let a = scaled.state_at(s);
            let b = direct.state_at(s);
            assert!((a.r - b.r).abs() < 1e-6, "r mismatch at s={s}");
            assert!((a.z - b.z).abs() < 1e-6, "z mismatch at s={s}");
            assert!((a.phi - b.phi).abs() < 1e-6, "phi mismatch at s={s}");
        }
    }

    #[test]
    fn negative_scaling_is_axis_reflection() {
        let p = ShootingParams::new(1.0, 0.5).unwrap();
        let curve = integrate_profile(&p, &SolverConfig::default()).unwrap();
        let scaled = apply_scaling(&curve, -1.0).unwrap();
        assert_eq!(scaled.params.c_o, -1.0);
        assert_eq!(scaled.params.z_0, -0.5);
        // Reflecting z back recovers the original samples exactly.
        for (a, b) in curve.samples.iter().zip(&scaled.samples) {
            assert_eq!(a.s, b.s);
            assert_eq!(a.r, b.r);
            assert_eq!(a.z, -b.z);
            assert_eq!(a.phi, -b.phi);
        }
    }

    #[test]
    fn scaling_rejects_zero() {
        let p = ShootingParams::new(1.0, 0.5).unwrap();
        let curve = integrate_profile(&p, &SolverConfig::default()).unwrap();
        assert!(apply_scaling(&curve, 0.0).is_err());
    }
}
