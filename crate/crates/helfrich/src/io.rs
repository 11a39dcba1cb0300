//! Versioned text outputs: CSV for trajectories and scans, JSON for
//! structured records, OBJ for meshes. All floats use the shortest
//! round-trip decimal form, LF line endings, and '.' separators, so
//! identical inputs produce byte-identical files.

use serde_json::{json, Value};

use crate::analysis::{CurvatureSample, EndpointData};
use crate::discoid::{DiscoidSpec, FluxEstimate};
use crate::ode::{ProfileCurve, SolverConfig, Termination};
use crate::search::{CandidatePair, ScanRecord, SphereRoot};
use crate::surface::{ClosedSurface, Quadrature, RegularityReport, RescalingIntegral, TriMesh};

pub const PROFILE_SCHEMA: &str = "profile/1";
pub const ANALYSIS_SCHEMA: &str = "analysis/1";
pub const SCAN_SCHEMA: &str = "scan/1";
pub const ROOTS_SCHEMA: &str = "roots/1";
pub const PAIRS_SCHEMA: &str = "pairs/1";
pub const SURFACE_SCHEMA: &str = "surface/1";
pub const DISCOID_SCHEMA: &str = "discoid/1";

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::from("")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Trajectory CSV: schema comment, header `s,r,z,phi`, one row per sample.
pub fn profile_csv(curve: &ProfileCurve) -> String {
    let mut out = format!("# schema: {PROFILE_SCHEMA}\ns,r,z,phi\n");
    for p in &curve.samples {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt(p.s),
            fmt(p.r),
            fmt(p.z),
            fmt(p.phi)
        ));
    }
    out
}

fn termination_tag(t: Termination) -> &'static str {
    match t {
        Termination::EquatorReached => "EquatorReached",
        Termination::MaxArcLength => "MaxArcLength",
        Termination::StepFailure => "StepFailure",
    }
}

/// Full trajectory record with the generating parameters and solver config.
pub fn profile_json(curve: &ProfileCurve, config: &SolverConfig) -> Value {
    json!({
        "schema": PROFILE_SCHEMA,
        "params": { "c_o": curve.params.c_o, "z_0": curve.params.z_0 },
        "config": config,
        "termination": termination_tag(curve.termination),
        "stop_height": curve.stop_height,
        "samples": curve.samples.iter().map(|p| json!({
            "s": p.s, "r": p.r, "z": p.z, "phi": p.phi
        })).collect::<Vec<_>>(),
    })
}

/// Endpoint and residual summary for one trajectory.
pub fn analysis_json(
    curve: &ProfileCurve,
    class: &str,
    endpoint: Option<&EndpointData>,
    rme_residual: f64,
    conserved_residual: f64,
) -> Value {
    json!({
        "schema": ANALYSIS_SCHEMA,
        "params": { "c_o": curve.params.c_o, "z_0": curve.params.z_0 },
        "class": class,
        "endpoint": endpoint,
        "rme_residual": rme_residual,
        "conserved_residual": conserved_residual,
    })
}

/// Curvature samples as CSV (`analysis/1`).
pub fn curvature_csv(samples: &[CurvatureSample]) -> String {
    let mut out = format!("# schema: {ANALYSIS_SCHEMA}\ns,H,K,nu3\n");
    for c in samples {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt(c.s),
            fmt(c.h),
            fmt(c.k),
            fmt(c.nu3)
        ));
    }
    out
}

fn status_tag(r: &ScanRecord) -> &'static str {
    use crate::search::ScanStatus::*;
    match r.status {
        Unduloid => "unduloid",
        Ovaloid => "ovaloid",
        Circle => "circle",
        Line => "line",
        Nodoid => "nodoid",
        StepFailure => "step_failure",
        ExtrapolationFailed => "extrapolation_failed",
        Invalid => "invalid",
    }
}

/// Scan CSV: `z0, ell, r_star, ddphi, status`; empty fields where a record
/// carries no equator data.
pub fn scan_csv(records: &[ScanRecord]) -> String {
    let mut out = format!("# schema: {SCAN_SCHEMA}\nz0,ell,r_star,ddphi,status\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(r.z0),
            opt(r.ell),
            opt(r.r_star),
            opt(r.ddphi),
            status_tag(r)
        ));
    }
    out
}

/// The evidence polyline `(ddphi, r_star)` ordered by height.
pub fn spiral_csv(points: &[(f64, f64)]) -> String {
    let mut out = format!("# schema: {SCAN_SCHEMA}\nddphi,r_star\n");
    for (dd, r) in points {
        out.push_str(&format!("{},{}\n", fmt(*dd), fmt(*r)));
    }
    out
}

pub fn roots_json(c_o: f64, roots: &[SphereRoot]) -> Value {
    json!({
        "schema": ROOTS_SCHEMA,
        "c_o": c_o,
        "roots": roots.iter().map(|r| json!({
            "index": r.index,
            "z0": r.z0_root,
            "bracket": [r.bracket.0, r.bracket.1],
            "endpoint": r.endpoint,
        })).collect::<Vec<_>>(),
    })
}

pub fn pairs_json(c_o: f64, tol_r: f64, tol_d: f64, pairs: &[CandidatePair]) -> Value {
    json!({
        "schema": PAIRS_SCHEMA,
        "c_o": c_o,
        "tol_r": tol_r,
        "tol_d": tol_d,
        "pairs": pairs,
    })
}

/// Per-surface summary: energies, integrals, matching report, identities.
#[allow(clippy::too_many_arguments)]
pub fn surface_json(
    surface: &ClosedSurface,
    c_o: f64,
    area: Quadrature,
    energy: f64,
    rescaling: &RescalingIntegral,
    report: &RegularityReport,
    nu3_integral: f64,
    h_nu3_integral: f64,
) -> Value {
    json!({
        "schema": SURFACE_SCHEMA,
        "c_o": c_o,
        "z0_top": surface.top.curve.params.z_0,
        "z0_bottom": surface.bottom.curve.params.z_0,
        "symmetric": surface.symmetric,
        "r_star": surface.r_star,
        "area": area.value,
        "area_error": area.error_estimate,
        "helfrich_energy": energy,
        "rescaling_integral": rescaling,
        "regularity": report,
        "identities": { "nu3": nu3_integral, "two_h_nu3": h_nu3_integral },
    })
}

pub fn flux_json(spec: &DiscoidSpec, rim: f64, flux: &FluxEstimate, verdict: &str) -> Value {
    json!({
        "schema": DISCOID_SCHEMA,
        "c_o": spec.c_o,
        "a": spec.a,
        "rim_radius": rim,
        "epsilons": flux.epsilons,
        "flux_values": flux.flux_values,
        "psi_gradient_terms": flux.psi_gradient_terms,
        "extrapolated_limit": flux.extrapolated_limit,
        "target_per_pole": flux.target,
        "dirac_coefficient": flux.dirac_coefficient,
        "verdict": verdict,
    })
}

/// Wavefront OBJ with per-vertex curvature attributes in comment-extension
/// lines: each `v x y z` is followed by `# a H K nu3` for the same vertex.
pub fn obj_string(mesh: &TriMesh, name: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# schema: surface-obj/1\no {name}\n"));
    for (v, a) in mesh.vertices.iter().zip(&mesh.attrs) {
        out.push_str(&format!("v {} {} {}\n", fmt(v[0]), fmt(v[1]), fmt(v[2])));
        out.push_str(&format!("# a {} {} {}\n", fmt(a.h), fmt(a.k), fmt(a.nu3)));
    }
    for f in &mesh.faces {
        out.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::endpoint_extrapolate;
    use crate::ode::{integrate_profile, ShootingParams};
    use crate::surface::{glue, revolve_mesh, Cap};

    #[test]
    fn profile_csv_shape() {
        let config = SolverConfig::default();
        let curve = integrate_profile(&ShootingParams::new(0.0, 1.0).unwrap(), &config).unwrap();
        let csv = profile_csv(&curve);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("# schema: profile/1"));
        assert_eq!(lines.next(), Some("s,r,z,phi"));
        assert_eq!(csv.lines().count(), curve.samples.len() + 2);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn profile_json_roundtrips_schema() {
        let config = SolverConfig::default();
        let curve = integrate_profile(&ShootingParams::new(1.0, 0.5).unwrap(), &config).unwrap();
        let v = profile_json(&curve, &config);
        assert_eq!(v["schema"], "profile/1");
        assert_eq!(v["termination"], "EquatorReached");
        assert_eq!(v["samples"].as_array().unwrap().len(), curve.samples.len());
        let reparsed: Value = serde_json::from_str(&v.to_string()).unwrap();
        assert_eq!(reparsed["params"]["z_0"], 0.5);
    }

    #[test]
    fn scan_csv_empty_fields_for_line() {
        let records = crate::search::scan(1.0, &[-1.0, 0.4], &SolverConfig::default());
        let csv = scan_csv(&records);
        let row = csv.lines().nth(2).unwrap();
        assert!(row.starts_with("-1,,,,line"));
    }

    #[test]
    fn obj_is_parseable_and_tagged() {
        let config = SolverConfig::default();
        let params = ShootingParams::new(0.0, 1.0).unwrap();
        let curve = integrate_profile(&params, &config).unwrap();
        let endpoint = endpoint_extrapolate(&curve, &config).unwrap();
        let cap = Cap { curve, endpoint };
        let surface = glue(cap.clone(), cap, 1e-6).unwrap();
        let mesh = revolve_mesh(&surface, 16).unwrap();
        let obj = obj_string(&mesh, "sphere");
        let v_count = obj.lines().filter(|l| l.starts_with("v ")).count();
        let f_count = obj.lines().filter(|l| l.starts_with("f ")).count();
        let a_count = obj.lines().filter(|l| l.starts_with("# a ")).count();
        assert_eq!(v_count, mesh.vertices.len());
        assert_eq!(v_count, a_count);
        assert_eq!(f_count, mesh.faces.len());
        // 1-based indices within range
        for line in obj.lines().filter(|l| l.starts_with("f ")) {
            for idx in line[2..].split_whitespace() {
                let i: usize = idx.parse().unwrap();
                assert!(i >= 1 && i <= v_count);
            }
        }
    }

    #[test]
    fn deterministic_output() {
        let config = SolverConfig::default();
        let curve = integrate_profile(&ShootingParams::new(1.0, 0.7).unwrap(), &config).unwrap();
        assert_eq!(profile_csv(&curve), profile_csv(&curve));
        assert_eq!(
            profile_json(&curve, &config).to_string(),
            profile_json(&curve, &config).to_string()
        );
    }
}
