//! Closed surfaces of revolution glued from two caps at the equator plane:
//! surface integrals, bending energy, the dilation (rescaling) integral,
//! equator regularity diagnostics, and watertight triangle meshes.
//!
//! A cap is stored un-reflected. The bottom half of the closed surface is
//! either the reflection of a `z_0 > 0` cap or a `z_0 < 0` cap used in place;
//! in both cases the stored fields are mapped to the closed surface's
//! outward orientation before integration (`nu3` flips for every bottom cap,
//! `H` flips only for `z_0 < 0` caps, whose stored normal points inward).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{endpoint_phi_rate, equator_sign, CurvatureSample, EndpointData};
use crate::numeric::simpson_uniform;
use crate::ode::{ProfileCurve, ProfileState, Termination};

#[derive(Debug, Error, PartialEq)]
pub enum SurfaceError {
    #[error("cap radii differ by {gap:e}, beyond the gluing tolerance {tol:e}")]
    RadiusMismatch { gap: f64, tol: f64 },
    #[error("gluing needs equator-terminated caps")]
    NotEquatorTerminated,
    #[error("the top cap must come from z_0 > 0")]
    TopCapOrientation,
    #[error("azimuthal resolution must be at least 8, got {0}")]
    MeshResolution(usize),
}

/// One cap: trajectory plus its extrapolated equator data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub curve: ProfileCurve,
    pub endpoint: EndpointData,
}

/// Two caps sharing an equator radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedSurface {
    pub top: Cap,
    pub bottom: Cap,
    pub r_star: f64,
    /// True when both caps come from the same initial height.
    pub symmetric: bool,
}

/// Field transforms from a cap's stored orientation to the closed surface's
/// outward orientation.
#[derive(Debug, Clone, Copy)]
struct Orient {
    h_sign: f64,
    nu3_sign: f64,
}

fn orient(side_top: bool, cap: &Cap) -> Orient {
    if side_top {
        Orient {
            h_sign: 1.0,
            nu3_sign: 1.0,
        }
    } else if cap.curve.params.z_0 > 0.0 {
        Orient {
            h_sign: 1.0,
            nu3_sign: -1.0,
        }
    } else {
        Orient {
            h_sign: -1.0,
            nu3_sign: -1.0,
        }
    }
}

/// Glue two caps along the equator circle. Fails when the extrapolated
/// radii differ by more than `tol` (absolute).
pub fn glue(top: Cap, bottom: Cap, tol: f64) -> Result<ClosedSurface, SurfaceError> {
    if top.curve.termination != Termination::EquatorReached
        || bottom.curve.termination != Termination::EquatorReached
    {
        return Err(SurfaceError::NotEquatorTerminated);
    }
    if top.curve.params.z_0 <= 0.0 {
        return Err(SurfaceError::TopCapOrientation);
    }
    let gap = (top.endpoint.r_star - bottom.endpoint.r_star).abs();
    if gap > tol {
        return Err(SurfaceError::RadiusMismatch { gap, tol });
    }
    let r_star = 0.5 * (top.endpoint.r_star + bottom.endpoint.r_star);
    let symmetric = top.curve.params == bottom.curve.params;
    Ok(ClosedSurface {
        top,
        bottom,
        r_star,
        symmetric,
    })
}

/// Default gluing tolerance for a given equator radius.
pub fn gluing_tolerance(r_star: f64) -> f64 {
    1e-6 * r_star
}

/// A quadrature value with a refinement-based error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
}

fn curvature_of(state: &ProfileState, orient: Orient) -> CurvatureSample {
    let (sin_phi, cos_phi) = state.phi.sin_cos();
    CurvatureSample {
        s: state.s,
        h: orient.h_sign * (sin_phi / (2.0 * state.r) + state.dphi / 2.0),
        k: state.dphi * sin_phi / state.r,
        nu3: orient.nu3_sign * cos_phi,
    }
}

/// Oriented curvature sample at the equator limit of a cap.
fn equator_sample(cap: &Cap, orient: Orient) -> CurvatureSample {
    let params = &cap.curve.params;
    let tau = equator_sign(params);
    let r_star = cap.endpoint.r_star;
    let dphi_limit = endpoint_phi_rate(params, r_star);
    CurvatureSample {
        s: cap.endpoint.ell,
        h: orient.h_sign * (params.c_o + tau / r_star),
        k: dphi_limit * tau / r_star,
        nu3: 0.0,
    }
}

/// `2π ∫ f(curvature) r ds` over one cap by composite Simpson on a uniform
/// resampling, with analytic limit segments at the axis (`[0, h0]`) and the
/// equator tail (`[s_end, ell]`).
fn cap_integral(
    cap: &Cap,
    orient: Orient,
    field: &dyn Fn(&CurvatureSample) -> f64,
    n: usize,
) -> f64 {
    let first = cap.curve.samples.first().expect("cap has samples");
    let end = cap.curve.last();
    let span = end.s - first.s;
    let h = span / n as f64;
    let values: Vec<f64> = (0..=n)
        .map(|j| {
            let st = cap.curve.state_at(first.s + j as f64 * h);
            field(&curvature_of(&st, orient)) * st.r
        })
        .collect();
    let body = simpson_uniform(&values, h);

    // Axis segment: r grows linearly from the exact pole, so the integrand
    // vanishes there.
    let pole = 0.5 * first.s * values[0];

    // Equator tail between the stop height and the extrapolated endpoint.
    let eq = equator_sample(cap, orient);
    let tail = 0.5 * (cap.endpoint.ell - end.s) * (values[n] + field(&eq) * cap.endpoint.r_star);

    2.0 * std::f64::consts::PI * (pole + body + tail)
}

const QUAD_N: usize = 512;

/// Integrate a per-arc-length curvature field over the closed surface.
///
/// The field sees samples already mapped to the outward orientation, so e.g.
/// `|cs| cs.nu3` integrates the vertical normal component of the closed
/// surface. The error estimate compares against a half-resolution pass.
pub fn surface_integral(
    surface: &ClosedSurface,
    field: impl Fn(&CurvatureSample) -> f64,
) -> Quadrature {
    let o_top = orient(true, &surface.top);
    let o_bot = orient(false, &surface.bottom);
    let fine = cap_integral(&surface.top, o_top, &field, QUAD_N)
        + cap_integral(&surface.bottom, o_bot, &field, QUAD_N);
    let coarse = cap_integral(&surface.top, o_top, &field, QUAD_N / 2)
        + cap_integral(&surface.bottom, o_bot, &field, QUAD_N / 2);
    Quadrature {
        value: fine,
        error_estimate: (fine - coarse).abs(),
    }
}

pub fn area(surface: &ClosedSurface) -> Quadrature {
    surface_integral(surface, |_| 1.0)
}

/// Bending energy `∫ (H + c_o)^2 dΣ` of the closed surface.
pub fn helfrich_energy(surface: &ClosedSurface, c_o: f64) -> f64 {
    surface_integral(surface, |cs| (cs.h + c_o) * (cs.h + c_o)).value
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescalingIntegral {
    pub total: f64,
    pub top: f64,
    pub bottom: f64,
}

/// `∫ (H + c_o) dΣ` in total and per cap. Vanishing total is the dilation
/// stationarity condition; each cap value separately obeys the flux identity
/// `2 c_o ∫_cap (H + c_o) dΣ = -π r_*^2 phi''(ell)`.
pub fn rescaling_integral(surface: &ClosedSurface, c_o: f64) -> RescalingIntegral {
    let field = |cs: &CurvatureSample| cs.h + c_o;
    let top = cap_integral(&surface.top, orient(true, &surface.top), &field, QUAD_N);
    let bottom = cap_integral(
        &surface.bottom,
        orient(false, &surface.bottom),
        &field,
        QUAD_N,
    );
    RescalingIntegral {
        total: top + bottom,
        top,
        bottom,
    }
}

/// Matching defects at the equator circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    /// Radius mismatch between the caps.
    pub c1_gap: f64,
    /// Mismatch of the measured `phi'(ell)` values in the common frame.
    pub c2_gap: f64,
    /// Outward-conormal mean-curvature derivative of the top cap.
    pub dh_top: f64,
    /// Outward-conormal mean-curvature derivative of the bottom cap.
    pub dh_bottom: f64,
    /// `|dh_top + dh_bottom|`; zero is the third-order matching (criticality).
    pub c3_gap: f64,
}

pub fn regularity_report(surface: &ClosedSurface) -> RegularityReport {
    let top = &surface.top.endpoint;
    let bottom = &surface.bottom.endpoint;
    let bottom_mirrored = surface.bottom.curve.params.z_0 > 0.0;
    let dh_top = top.ddphi / 2.0;
    let dh_bottom = if bottom_mirrored {
        bottom.ddphi / 2.0
    } else {
        -bottom.ddphi / 2.0
    };
    let c2_gap = if bottom_mirrored {
        (top.dphi - bottom.dphi).abs()
    } else {
        (top.dphi + bottom.dphi).abs()
    };
    RegularityReport {
        c1_gap: (top.r_star - bottom.r_star).abs(),
        c2_gap,
        dh_top,
        dh_bottom,
        c3_gap: (dh_top + dh_bottom).abs(),
    }
}

/// Per-vertex scalar attributes carried by meshes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexAttr {
    pub h: f64,
    pub k: f64,
    pub nu3: f64,
}

/// Closed orientable triangle mesh with per-vertex curvature attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[u32; 3]>,
    pub attrs: Vec<VertexAttr>,
}

impl TriMesh {
    pub fn area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = [
                    self.vertices[f[0] as usize],
                    self.vertices[f[1] as usize],
                    self.vertices[f[2] as usize],
                ];
                let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                let n = [
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ];
                0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
            })
            .sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        use std::collections::BTreeSet;
        let mut edges = BTreeSet::new();
        for f in &self.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    /// Signed enclosed volume; positive for outward-oriented faces.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = [
                    self.vertices[f[0] as usize],
                    self.vertices[f[1] as usize],
                    self.vertices[f[2] as usize],
                ];
                (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0]))
                    / 6.0
            })
            .sum()
    }
}

/// One latitude circle of a revolved profile.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RingSample {
    pub r: f64,
    pub z: f64,
    pub attr: VertexAttr,
}

/// Revolve a pole-to-pole profile (excluding the exact poles) into a closed
/// triangle mesh: fans at the poles, quad strips in between.
pub(crate) fn revolve_rings(
    rings: &[RingSample],
    pole_top: (f64, VertexAttr),
    pole_bottom: (f64, VertexAttr),
    n_theta: usize,
) -> TriMesh {
    let nr = rings.len();
    let mut vertices = Vec::with_capacity(2 + nr * n_theta);
    let mut attrs = Vec::with_capacity(2 + nr * n_theta);
    vertices.push([0.0, 0.0, pole_top.0]);
    attrs.push(pole_top.1);
    for ring in rings {
        for j in 0..n_theta {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
            vertices.push([ring.r * theta.cos(), ring.r * theta.sin(), ring.z]);
            attrs.push(ring.attr);
        }
    }
    vertices.push([0.0, 0.0, pole_bottom.0]);
    attrs.push(pole_bottom.1);
    let bottom_pole = (1 + nr * n_theta) as u32;

    let ring_vertex = |i: usize, j: usize| (1 + i * n_theta + j % n_theta) as u32;
    let mut faces = Vec::with_capacity(2 * n_theta * nr);
    for j in 0..n_theta {
        faces.push([0, ring_vertex(0, j), ring_vertex(0, j + 1)]);
    }
    for i in 0..nr - 1 {
        for j in 0..n_theta {
            let (uj, uj1) = (ring_vertex(i, j), ring_vertex(i, j + 1));
            let (lj, lj1) = (ring_vertex(i + 1, j), ring_vertex(i + 1, j + 1));
            faces.push([uj, lj, lj1]);
            faces.push([uj, lj1, uj1]);
        }
    }
    for j in 0..n_theta {
        faces.push([
            bottom_pole,
            ring_vertex(nr - 1, j + 1),
            ring_vertex(nr - 1, j),
        ]);
    }
    TriMesh {
        vertices,
        faces,
        attrs,
    }
}

/// Watertight triangulation of the closed surface with per-vertex curvature
/// attributes. Ring count scales with `n_theta` so area and energy converge
/// at second order in the azimuthal resolution.
pub fn revolve_mesh(surface: &ClosedSurface, n_theta: usize) -> Result<TriMesh, SurfaceError> {
    if n_theta < 8 {
        return Err(SurfaceError::MeshResolution(n_theta));
    }
    let m = n_theta.max(16);
    let mut rings: Vec<RingSample> = Vec::with_capacity(2 * m - 1);

    let cap_rings = |cap: &Cap, o: Orient, z_sign: f64| -> Vec<RingSample> {
        let end_s = cap.curve.last().s;
        let mut out = Vec::with_capacity(m - 1);
        for i in 1..m {
            let st = cap.curve.state_at(i as f64 / m as f64 * end_s);
            out.push(RingSample {
                r: st.r,
                z: z_sign * st.z,
                attr: {
                    let cs = curvature_of(&st, o);
                    VertexAttr {
                        h: cs.h,
                        k: cs.k,
                        nu3: cs.nu3,
                    }
                },
            });
        }
        out
    };

    let o_top = orient(true, &surface.top);
    let o_bot = orient(false, &surface.bottom);
    rings.extend(cap_rings(&surface.top, o_top, 1.0));

    let eq = equator_sample(&surface.top, o_top);
    rings.push(RingSample {
        r: surface.r_star,
        z: 0.0,
        attr: VertexAttr {
            h: eq.h,
            k: eq.k,
            nu3: 0.0,
        },
    });

    let bottom_mirrored = surface.bottom.curve.params.z_0 > 0.0;
    let z_sign = if bottom_mirrored { -1.0 } else { 1.0 };
    let mut lower = cap_rings(&surface.bottom, o_bot, z_sign);
    lower.reverse();
    rings.extend(lower);

    let pole_attr = |cap: &Cap, o: Orient, nu3: f64| {
        let a = cap.curve.samples[0].dphi;
        VertexAttr {
            h: o.h_sign * a,
            k: a * a,
            nu3,
        }
    };
    let pole_top = (
        surface.top.curve.params.z_0,
        pole_attr(&surface.top, o_top, 1.0),
    );
    let pole_bottom = (
        z_sign * surface.bottom.curve.params.z_0,
        pole_attr(&surface.bottom, o_bot, -1.0),
    );
    Ok(revolve_rings(&rings, pole_top, pole_bottom, n_theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::endpoint_extrapolate;
    use crate::ode::{integrate_profile, ShootingParams, SolverConfig};
    use std::f64::consts::PI;

    fn cap(c_o: f64, z_0: f64) -> Cap {
        let config = SolverConfig::default();
        let params = ShootingParams::new(c_o, z_0).unwrap();
        let curve = integrate_profile(&params, &config).unwrap();
        let endpoint = endpoint_extrapolate(&curve, &config).unwrap();
        Cap { curve, endpoint }
    }

    fn unit_sphere() -> ClosedSurface {
        let c = cap(0.0, 1.0);
        glue(c.clone(), c, 1e-6).unwrap()
    }

    #[test]
    fn glue_symmetric_circle_caps() {
        let s = unit_sphere();
        assert!(s.symmetric);
        assert!((s.r_star - 1.0).abs() < 1e-6);
    }

    #[test]
    fn glue_rejects_radius_mismatch() {
        let a = cap(1.0, 0.4);
        let b = cap(1.0, 0.8);
        assert!((a.endpoint.r_star - b.endpoint.r_star).abs() > 0.01);
        match glue(a, b, 1e-6) {
            Err(SurfaceError::RadiusMismatch { .. }) => {}
            other => panic!("expected RadiusMismatch, got {other:?}"),
        }
    }

    #[test]
    fn unit_sphere_area_and_energy() {
        let s = unit_sphere();
        let a = area(&s);
        assert!((a.value - 4.0 * PI).abs() < 1e-6, "area {}", a.value);
        assert!((helfrich_energy(&s, 0.0) - 4.0 * PI).abs() < 1e-5);
    }

    #[test]
    fn sphere_at_matching_curvature_has_zero_energy() {
        // Unit sphere carries H = -1; with c_o = 1 the energy vanishes and so
        // does the dilation integral.
        let s = unit_sphere();
        assert!(helfrich_energy(&s, 1.0) < 1e-10);
        let ri = rescaling_integral(&s, 1.0);
        assert!(ri.total.abs() < 1e-7, "total {}", ri.total);
    }

    #[test]
    fn closed_surface_identities_mixed_caps() {
        // Glue the z_0 = 1 circle cap against the independently integrated
        // z_0 = -1 cap: the two quadratures are unrelated, so the vanishing
        // integrals exercise the orientation bookkeeping for real.
        let s = glue(cap(0.0, 1.0), cap(0.0, -1.0), 1e-6).unwrap();
        assert!(!s.symmetric);
        let nu3 = surface_integral(&s, |cs| cs.nu3);
        assert!(nu3.value.abs() < 1e-6, "nu3 integral {}", nu3.value);
        let hnu3 = surface_integral(&s, |cs| 2.0 * cs.h * cs.nu3);
        assert!(hnu3.value.abs() < 1e-5, "2H nu3 integral {}", hnu3.value);
        assert!((area(&s).value - 4.0 * PI).abs() < 1e-5);
    }

    #[test]
    fn regularity_round_sphere() {
        let rep = regularity_report(&unit_sphere());
        assert!(rep.c1_gap < 1e-9);
        assert!(rep.c2_gap < 1e-5);
        assert!(rep.c3_gap < 1e-4);
    }

    #[test]
    fn symmetric_nonroot_gap_equals_ddphi() {
        let c = cap(1.0, 0.5);
        let dd = c.endpoint.ddphi;
        let s = glue(c.clone(), c, 1e-6).unwrap();
        let rep = regularity_report(&s);
        assert!((rep.c3_gap - dd.abs()).abs() < 1e-12);
        assert!((rep.dh_top - dd / 2.0).abs() < 1e-12);
    }

    #[test]
    fn flux_identity_links_quadrature_and_endpoint() {
        for z_0 in [0.4, 0.5, 0.8, 1.3] {
            let c = cap(1.0, z_0);
            let s = glue(c.clone(), c, 1e-6).unwrap();
            let ri = rescaling_integral(&s, 1.0);
            let lhs = 2.0 * 1.0 * ri.top;
            let rhs = -PI * s.r_star * s.r_star * s.top.endpoint.ddphi;
            assert!(
                (lhs - rhs).abs() < 1e-4 * (1.0 + s.top.endpoint.ddphi.abs()),
                "flux identity at z_0 = {z_0}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn mesh_sphere_metrics() {
        let s = unit_sphere();
        let mesh = revolve_mesh(&s, 64).unwrap();
        assert_eq!(mesh.euler_characteristic(), 2);
        assert!(mesh.signed_volume() > 0.0);
        let rel = (mesh.area() - 4.0 * PI).abs() / (4.0 * PI);
        assert!(rel < 5e-3, "mesh area off by {rel}");
        assert_eq!(mesh.vertices.len(), mesh.attrs.len());
    }

    #[test]
    fn mesh_area_second_order_convergence() {
        let s = unit_sphere();
        let exact = 4.0 * PI;
        let e32 = (revolve_mesh(&s, 32).unwrap().area() - exact).abs();
        let e64 = (revolve_mesh(&s, 64).unwrap().area() - exact).abs();
        assert!(e64 < e32 / 3.0, "area errors {e32} -> {e64}");
    }

    #[test]
    fn mesh_rejects_low_resolution() {
        let s = unit_sphere();
        assert_eq!(revolve_mesh(&s, 7), Err(SurfaceError::MeshResolution(7)));
    }
}
