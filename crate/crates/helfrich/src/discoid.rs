//! Circular biconcave discoids: axially symmetric profiles whose tangent
//! angle is the closed form `phi = arcsin(-2 c_o r ln r + a r)`. They solve
//! the fourth-order bending equation away from the axis but are only C¹ at
//! the poles, and the first variation concentrates a Dirac defect of
//! strength `8 π c_o` there. This module generates the profiles, checks the
//! interior equation, and reproduces the defect coefficient by shrinking
//! boundary cuts around a pole.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::aitken_limit;
use crate::ode::{
    ProfileCurve, ProfileKind, ProfileState, ShootingParams, SolverConfig, Termination,
};
use crate::stepper::{integrate_adaptive, DriverOpts, DriverStatus};
use crate::surface::{revolve_rings, RingSample, SurfaceError, TriMesh, VertexAttr};

#[derive(Debug, Error, PartialEq)]
pub enum DiscoidError {
    #[error("arcsine argument reaches {sup:.6} on (0, {r_max:.6}]; the profile leaves the admissible window")]
    DomainExceeded { sup: f64, r_max: f64 },
    #[error("spontaneous curvature and rim constant cannot both vanish")]
    DegenerateSpec,
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("profile integration failed before reaching the rim")]
    ProfileFailed,
    #[error("cut radii must be strictly decreasing, positive, inside the profile, and at least 4 levels")]
    BadCutRadii,
}

/// Parameters `(c_o, a)` of one discoid: `sin(phi(r)) = -2 c_o r ln r + a r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscoidSpec {
    pub c_o: f64,
    pub a: f64,
}

impl DiscoidSpec {
    pub fn new(c_o: f64, a: f64) -> Result<Self, DiscoidError> {
        if c_o == 0.0 && a == 0.0 {
            return Err(DiscoidError::DegenerateSpec);
        }
        Ok(Self { c_o, a })
    }

    /// Arcsine argument at radius `r`.
    pub fn angle_arg(&self, r: f64) -> f64 {
        r * (-2.0 * self.c_o * r.ln() + self.a)
    }

    /// d/dr of the arcsine argument; equals `phi'(s)` along the profile.
    pub fn angle_arg_rate(&self, r: f64) -> f64 {
        -2.0 * self.c_o * (r.ln() + 1.0) + self.a
    }

    /// Outer rim radius: the return of the angle to zero
    /// (`r = exp(a / (2 c_o))` for `c_o != 0`), or the vertical-tangent
    /// radius `1/|a|` in the spherical limit `c_o = 0`.
    pub fn rim_radius(&self) -> f64 {
        if self.c_o != 0.0 {
            (self.a / (2.0 * self.c_o)).exp()
        } else {
            1.0 / self.a.abs()
        }
    }

    /// Validate the arcsine window `sup |angle_arg| <= 1` over `(0, r_max]`.
    pub fn check_admissible(&self, r_max: f64) -> Result<(), DiscoidError> {
        let n = 4000;
        let mut sup: f64 = 0.0;
        for i in 1..=n {
            // log-spaced grid reaching 1e-9 * r_max
            let t = i as f64 / n as f64;
            let r = r_max * 1e-9f64.powf(1.0 - t);
            sup = sup.max(self.angle_arg(r).abs());
        }
        if sup > 1.0 + 1e-9 {
            return Err(DiscoidError::DomainExceeded { sup, r_max });
        }
        Ok(())
    }
}

/// Mean curvature of the discoid at radius `r`: `-2 c_o ln r + a - c_o`.
/// Diverges logarithmically at the axis (the C² failure at the poles).
pub fn discoid_mean_curvature(r: f64, spec: &DiscoidSpec) -> Result<f64, DiscoidError> {
    if r <= 0.0 {
        return Err(DiscoidError::NonPositiveRadius(r));
    }
    Ok(-2.0 * spec.c_o * r.ln() + spec.a - spec.c_o)
}

/// Integrate the discoid profile from the axis to the outer rim.
///
/// The state is `(r, z)` with the angle evaluated pointwise from `r` (no
/// angle equation). Integration stops where the angle returns to zero, where
/// the arcsine argument reaches ±1 (vertical rim), or at a safety radius
/// beyond the nominal rim. The height is normalized so `z(rim) = 0`; the
/// closed surface is the mirror double across that plane.
pub fn discoid_profile(
    spec: &DiscoidSpec,
    config: &SolverConfig,
) -> Result<ProfileCurve, DiscoidError> {
    let rim = spec.rim_radius();
    spec.check_admissible(rim)?;

    let h0 = config.h0 * rim.max(1.0);
    let scale = if spec.c_o != 0.0 {
        rim.min(1.0 / spec.c_o.abs())
    } else {
        rim
    };
    let max_step = config.max_step * scale;
    let r_guard = 1.05 * rim;

    let angle = |r: f64| -> (f64, f64) {
        let arg = spec.angle_arg(r).clamp(-1.0, 1.0);
        (arg, (1.0 - arg * arg).max(0.0).sqrt())
    };
    let f = move |_s: f64, y: &[f64; 2]| {
        let (sin_phi, cos_phi) = angle(y[0]);
        [cos_phi, sin_phi]
    };
    let sign0 = spec.angle_arg(h0).signum();
    let event = move |_s: f64, y: &[f64; 2]| {
        let arg = spec.angle_arg(y[0]);
        let return_to_zero = sign0 * arg;
        let vertical = (1.0 - 1e-9) - arg.abs();
        let range = r_guard - y[0];
        return_to_zero.min(vertical).min(range)
    };
    let guard = move |_s: f64, y: &[f64; 2]| y[0] > 0.0 && y[1].is_finite();

    let (arg0, _) = angle(h0);
    let mut raw: Vec<(f64, f64, f64)> = vec![(h0, h0, 0.0)];
    let opts = DriverOpts {
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
        max_step,
        h_init: max_step / 16.0,
        s_end: 100.0 * rim.max(1.0),
    };
    let status = integrate_adaptive(
        &f,
        h0,
        [h0, 0.0],
        &opts,
        &event,
        &guard,
        &mut |s, y, _dy| raw.push((s, y[0], y[1])),
    );
    let termination = match status {
        DriverStatus::EventHit => {
            let (_, r_end, _) = *raw.last().unwrap();
            if r_end >= r_guard * 0.999 {
                Termination::MaxArcLength
            } else {
                Termination::EquatorReached
            }
        }
        DriverStatus::ReachedEnd => Termination::MaxArcLength,
        _ => return Err(DiscoidError::ProfileFailed),
    };

    let z_end = raw.last().unwrap().2;
    let samples: Vec<ProfileState> = raw
        .into_iter()
        .map(|(s, r, z)| {
            let arg = spec.angle_arg(r).clamp(-1.0, 1.0);
            ProfileState {
                s,
                r,
                z: z - z_end,
                phi: arg.asin(),
                dphi: spec.angle_arg_rate(r),
            }
        })
        .collect();
    let _ = arg0;
    let stop_height = samples
        .iter()
        .map(|p| p.z.abs())
        .fold(f64::INFINITY, f64::min);
    let z_pole = samples[0].z;
    Ok(ProfileCurve {
        params: ShootingParams {
            c_o: spec.c_o,
            z_0: if z_pole != 0.0 { z_pole } else { -1.0 },
        },
        kind: ProfileKind::Discoid { a: spec.a },
        samples,
        termination,
        stop_height,
    })
}

/// Max residual of the fourth-order equation on the discoid profile, using
/// fourth-order stencils on a uniform grid of spacing `ds`, reported only at
/// nodes with `r >= r_min`. The mean curvature grows like `ln r` toward the
/// poles, so the cut radius controls how hard the differencing is.
pub fn discoid_el_residual(curve: &ProfileCurve, r_min: f64, ds: f64) -> f64 {
    crate::analysis::el_residual_filtered(curve, ds, 4, r_min)
}

/// Boundary-flux ladder around one pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxEstimate {
    /// Cut radii, strictly decreasing.
    pub epsilons: Vec<f64>,
    /// `∮ ∂_n H ψ dσ` at each cut with `ψ ≡ 1`.
    pub flux_values: Vec<f64>,
    /// `∮ (H + c_o) ∂_n ψ dσ` at each cut; identically zero for constant ψ.
    pub psi_gradient_terms: Vec<f64>,
    /// Accelerated limit of `flux_values`.
    pub extrapolated_limit: f64,
    /// The proved limit per pole: `-4 π c_o`.
    pub target: f64,
    /// First-variation defect over both poles: `-2 ×` the extrapolated limit.
    pub dirac_coefficient: f64,
}

/// Evaluate the two first-variation boundary terms on shrinking cut circles
/// `r = ε` around a pole, with the test function `ψ ≡ 1` (the reported
/// numbers are the coefficients of `ψ(pole)`).
///
/// By axial symmetry the integrals reduce to `2πε × integrand`:
/// the gradient term carries `∂_n ψ = 0` and vanishes identically, while
/// `∮ ∂_n H dσ = -4 π c_o cos(phi(ε)) → -4 π c_o`. The limit is accelerated
/// from the ladder; the defect over both poles is its negative double.
pub fn boundary_flux(
    curve: &ProfileCurve,
    spec: &DiscoidSpec,
    epsilons: &[f64],
) -> Result<FluxEstimate, DiscoidError> {
    let r_reach = curve.last().r;
    let ok = epsilons.len() >= 4
        && epsilons.windows(2).all(|w| w[0] > w[1])
        && epsilons.iter().all(|&e| e > 0.0 && e < r_reach);
    if !ok {
        return Err(DiscoidError::BadCutRadii);
    }
    let flux_values: Vec<f64> = epsilons
        .iter()
        .map(|&eps| {
            let arg = spec.angle_arg(eps).clamp(-1.0, 1.0);
            let cos_phi = (1.0 - arg * arg).sqrt();
            -4.0 * std::f64::consts::PI * spec.c_o * cos_phi
        })
        .collect();
    let extrapolated_limit = aitken_limit(&flux_values);
    Ok(FluxEstimate {
        epsilons: epsilons.to_vec(),
        flux_values,
        psi_gradient_terms: vec![0.0; epsilons.len()],
        extrapolated_limit,
        target: -4.0 * std::f64::consts::PI * spec.c_o,
        dirac_coefficient: -2.0 * extrapolated_limit,
    })
}

/// Mirror-double mesh of the discoid for export. Pole attributes clamp the
/// logarithmically divergent curvature at the first profile sample.
pub fn discoid_mesh(
    curve: &ProfileCurve,
    spec: &DiscoidSpec,
    n_theta: usize,
) -> Result<TriMesh, SurfaceError> {
    if n_theta < 8 {
        return Err(SurfaceError::MeshResolution(n_theta));
    }
    let m = n_theta.max(16);
    let s_end = curve.last().s;
    let ring_at = |s: f64, upper: bool| -> RingSample {
        let st = curve.state_at(s);
        let h = -2.0 * spec.c_o * st.r.ln() + spec.a - spec.c_o;
        let k = st.dphi * st.phi.sin() / st.r;
        RingSample {
            r: st.r,
            z: if upper { -st.z } else { st.z },
            attr: VertexAttr {
                h,
                k,
                nu3: if upper { st.phi.cos() } else { -st.phi.cos() },
            },
        }
    };
    let mut rings = Vec::with_capacity(2 * m - 1);
    for i in 1..m {
        rings.push(ring_at(i as f64 / m as f64 * s_end, true));
    }
    rings.push(ring_at(s_end, true)); // rim, z = 0
    for i in (1..m).rev() {
        rings.push(ring_at(i as f64 / m as f64 * s_end, false));
    }
    let first = curve.samples[0];
    let pole_h = -2.0 * spec.c_o * first.r.ln() + spec.a - spec.c_o;
    let pole_attr = |nu3: f64| VertexAttr {
        h: pole_h,
        k: pole_h * pole_h,
        nu3,
    };
    Ok(revolve_rings(
        &rings,
        (-first.z, pole_attr(1.0)),
        (first.z, pole_attr(-1.0)),
        n_theta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::rme_residual;
    use std::f64::consts::{E, PI};

    fn flagship() -> DiscoidSpec {
        DiscoidSpec::new(1.0, 0.0).unwrap()
    }

    #[test]
    fn angle_closed_form_values() {
        let spec = flagship();
        assert!((spec.angle_arg(1.0 / E) - 2.0 / E).abs() < 1e-15);
        assert!((2.0 / E - 0.73576).abs() < 1e-5);
        assert_eq!(spec.angle_arg(1.0), 0.0);
        assert_eq!(spec.rim_radius(), 1.0);
    }

    #[test]
    fn profile_meets_axis_flat_and_stops_at_rim() {
        let spec = flagship();
        let curve = discoid_profile(&spec, &SolverConfig::default()).unwrap();
        assert_eq!(curve.termination, Termination::EquatorReached);
        let first = curve.samples[0];
        assert!(first.phi.abs() < 1e-4, "axis angle {}", first.phi);
        let last = curve.last();
        assert!((last.r - 1.0).abs() < 1e-8, "rim radius {}", last.r);
        assert_eq!(last.z, 0.0);
        assert!(last.phi.abs() < 1e-7);
        assert!(curve.samples[0].z < 0.0);
    }

    #[test]
    fn mean_curvature_values() {
        let spec = flagship();
        assert!((discoid_mean_curvature(1.0, &spec).unwrap() + 1.0).abs() < 1e-15);
        let h = discoid_mean_curvature(1.0 / E, &spec).unwrap();
        assert!((h + spec.c_o - 2.0).abs() < 1e-15);
        assert!(discoid_mean_curvature(0.0, &spec).is_err());
        // Log divergence toward the pole.
        assert!(discoid_mean_curvature(1e-12, &spec).unwrap() > 50.0);
    }

    #[test]
    fn geometric_and_closed_form_mean_curvature_agree() {
        let spec = flagship();
        let curve = discoid_profile(&spec, &SolverConfig::default()).unwrap();
        for st in curve.samples.iter().filter(|p| p.r >= 1e-3) {
            let geometric = st.phi.sin() / (2.0 * st.r) + st.dphi / 2.0;
            let closed = discoid_mean_curvature(st.r, &spec).unwrap();
            assert!(
                (geometric - closed).abs() < 1e-6,
                "H mismatch at r = {}: {} vs {}",
                st.r,
                geometric,
                closed
            );
        }
    }

    #[test]
    fn inadmissible_spec_rejected() {
        let spec = DiscoidSpec::new(1.0, 5.0).unwrap();
        match discoid_profile(&spec, &SolverConfig::default()) {
            Err(DiscoidError::DomainExceeded { sup, .. }) => assert!(sup > 1.0),
            other => panic!("expected DomainExceeded, got {other:?}"),
        }
    }

    #[test]
    fn discoid_violates_membrane_relation() {
        let curve = discoid_profile(&flagship(), &SolverConfig::default()).unwrap();
        assert!(rme_residual(&curve) > 0.1);
    }

    #[test]
    fn interior_equation_residuals() {
        let mut config = SolverConfig::default();
        config.max_step = 5e-4;
        let curve = discoid_profile(&flagship(), &config).unwrap();
        let wide = discoid_el_residual(&curve, 0.05, 1e-3);
        let narrow = discoid_el_residual(&curve, 0.5, 1e-3);
        assert!(wide < 1e-3, "residual at r >= 0.05: {wide}");
        assert!(narrow < wide, "milder derivatives away from the pole");
        let finer = discoid_el_residual(&curve, 0.05, 5e-4);
        assert!(finer < wide / 2.5, "decay {wide} -> {finer}");
    }

    #[test]
    fn spherical_limit_residual() {
        // c_o = 0, a = 1: the profile is a unit-diameter... a sphere of
        // radius 1/a with constant curvature; the interior equation holds to
        // differencing accuracy.
        let spec = DiscoidSpec::new(0.0, 1.0).unwrap();
        let mut config = SolverConfig::default();
        config.max_step = 5e-4;
        let curve = discoid_profile(&spec, &config).unwrap();
        let res = discoid_el_residual(&curve, 0.05, 1e-3);
        assert!(res < 1e-6, "sphere residual {res}");
    }

    #[test]
    fn boundary_flux_reaches_dirac_coefficient() {
        let spec = flagship();
        let curve = discoid_profile(&spec, &SolverConfig::default()).unwrap();
        let eps = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5];
        let flux = boundary_flux(&curve, &spec, &eps).unwrap();
        assert!(flux.psi_gradient_terms.iter().all(|&v| v == 0.0));
        let target = -4.0 * PI;
        assert!(
            (flux.extrapolated_limit - target).abs() < 0.01 * target.abs(),
            "limit {} vs {}",
            flux.extrapolated_limit,
            target
        );
        assert!((flux.dirac_coefficient - 8.0 * PI).abs() < 0.01 * 8.0 * PI);
        // |value - target| must shrink monotonically over the last levels.
        let errs: Vec<f64> = flux
            .flux_values
            .iter()
            .map(|v| (v - target).abs())
            .collect();
        for w in errs.windows(2).rev().take(3) {
            assert!(w[1] <= w[0] + 1e-14);
        }
    }

    #[test]
    fn boundary_flux_validates_cuts() {
        let spec = flagship();
        let curve = discoid_profile(&spec, &SolverConfig::default()).unwrap();
        assert!(boundary_flux(&curve, &spec, &[1e-2, 1e-3]).is_err());
        assert!(boundary_flux(&curve, &spec, &[1e-3, 1e-2, 1e-4, 1e-5]).is_err());
    }

    #[test]
    fn discoid_mesh_is_closed() {
        let spec = flagship();
        let curve = discoid_profile(&spec, &SolverConfig::default()).unwrap();
        let mesh = discoid_mesh(&curve, &spec, 48).unwrap();
        assert_eq!(mesh.euler_characteristic(), 2);
        assert!(mesh.signed_volume() > 0.0);
    }
}
