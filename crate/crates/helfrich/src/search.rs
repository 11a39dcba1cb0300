//! Shooting search over the initial height: grid scans of the equator data,
//! bracketing and refinement of the closed-surface condition
//! `phi''(ell) = 0`, the spiral evidence curve, and the search for mirrored
//! cap pairs (expected empty).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{classify, endpoint_extrapolate, CurveClass, EndpointData};
use crate::ode::{integrate_profile, ShootingParams, SolverConfig, Termination};
use crate::par;

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("c_o = 0 closes at every height (round-sphere family); the root search is degenerate")]
    RoundSphereFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStatus {
    Unduloid,
    Ovaloid,
    Circle,
    Line,
    Nodoid,
    StepFailure,
    ExtrapolationFailed,
    Invalid,
}

/// One scan point. Equator data is present only for heights whose curve
/// reaches the equator plane and extrapolates cleanly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub z0: f64,
    pub ell: Option<f64>,
    pub r_star: Option<f64>,
    pub ddphi: Option<f64>,
    pub status: ScanStatus,
}

fn scan_point(c_o: f64, z0: f64, config: &SolverConfig) -> ScanRecord {
    let blank = |status| ScanRecord {
        z0,
        ell: None,
        r_star: None,
        ddphi: None,
        status,
    };
    let params = match ShootingParams::new(c_o, z0) {
        Ok(p) => p,
        Err(_) => return blank(ScanStatus::Invalid),
    };
    let class_status = match classify(&params) {
        CurveClass::HorizontalLine => return blank(ScanStatus::Line),
        CurveClass::NodoidType => return blank(ScanStatus::Nodoid),
        CurveClass::UnduloidType => ScanStatus::Unduloid,
        CurveClass::OvaloidType => ScanStatus::Ovaloid,
        CurveClass::Circle => ScanStatus::Circle,
    };
    let curve = match integrate_profile(&params, config) {
        Ok(c) => c,
        Err(_) => return blank(ScanStatus::Invalid),
    };
    if curve.termination != Termination::EquatorReached {
        return blank(ScanStatus::StepFailure);
    }
    match endpoint_extrapolate(&curve, config) {
        Ok(ep) => ScanRecord {
            z0,
            ell: Some(ep.ell),
            r_star: Some(ep.r_star),
            ddphi: Some(ep.ddphi),
            status: class_status,
        },
        Err(_) => blank(ScanStatus::ExtrapolationFailed),
    }
}

/// Evaluate one record per grid height. Points run in parallel (feature
/// `parallel`); the output order follows the input grid.
pub fn scan(c_o: f64, z0_grid: &[f64], config: &SolverConfig) -> Vec<ScanRecord> {
    let cfg = *config;
    par::map_collect(z0_grid.to_vec(), move |z0| scan_point(c_o, z0, &cfg))
}

/// Sequential twin of [`scan`], kept for benchmarking the parallel speedup.
pub fn scan_seq(c_o: f64, z0_grid: &[f64], config: &SolverConfig) -> Vec<ScanRecord> {
    let cfg = *config;
    par::map_seq(z0_grid.to_vec(), move |z0| scan_point(c_o, z0, &cfg))
}

/// Uniform grid of `n` heights on `(0, z_max]`.
pub fn default_grid(z_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| z_max * i as f64 / n as f64).collect()
}

/// Scan a uniform grid, then refine once (4x density) every interval that
/// brackets a sign change of `phi''(ell)` or comes within 0.1 of zero.
pub fn scan_adaptive(c_o: f64, z_max: f64, n: usize, config: &SolverConfig) -> Vec<ScanRecord> {
    let mut records = scan(c_o, &default_grid(z_max, n), config);
    let mut extra = Vec::new();
    for pair in records.windows(2) {
        if let (Some(da), Some(db)) = (pair[0].ddphi, pair[1].ddphi) {
            if da * db < 0.0 || da.abs().min(db.abs()) < 0.1 {
                let (a, b) = (pair[0].z0, pair[1].z0);
                for k in 1..4 {
                    extra.push(a + (b - a) * k as f64 / 4.0);
                }
            }
        }
    }
    records.extend(scan(c_o, &extra, config));
    records.sort_by(|a, b| a.z0.partial_cmp(&b.z0).unwrap());
    records
}

/// A refined zero of `phi''(ell)` over the initial height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereRoot {
    pub z0_root: f64,
    pub bracket: (f64, f64),
    pub endpoint: EndpointData,
    /// Ordinal in increasing initial height.
    pub index: usize,
}

/// A bracket abandoned because the evaluator failed inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LostBracket {
    pub z0_lo: f64,
    pub z0_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RefineOutcome {
    pub roots: Vec<SphereRoot>,
    pub lost: Vec<LostBracket>,
}

/// Standard evaluator for the map `z0 ↦ equator data` at fixed `c_o`.
pub fn sphere_eval(c_o: f64, config: SolverConfig) -> impl Fn(f64) -> Option<EndpointData> + Sync {
    move |z0: f64| {
        let params = ShootingParams::new(c_o, z0).ok()?;
        let curve = integrate_profile(&params, &config).ok()?;
        if curve.termination != Termination::EquatorReached {
            return None;
        }
        endpoint_extrapolate(&curve, &config).ok()
    }
}

fn refine_bracket(
    mut lo: f64,
    mut f_lo: f64,
    mut hi: f64,
    mut f_hi: f64,
    tol: f64,
    eval: &(impl Fn(f64) -> Option<EndpointData> + Sync),
) -> Option<SphereRoot> {
    debug_assert!(f_lo * f_hi < 0.0);
    let mut best: Option<(f64, EndpointData)> = None;
    for _ in 0..80 {
        let mid_scale = 0.5 * (lo + hi);
        let width_floor = (tol * mid_scale).max(1e-10 * mid_scale);
        let tol_eff = best
            .as_ref()
            .map(|(_, ep)| tol.max(ep.fit_uncertainty))
            .unwrap_or(tol);
        if let Some((_, ep)) = &best {
            if ep.ddphi.abs() <= tol_eff || hi - lo <= width_floor {
                break;
            }
        }
        let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let margin = 0.05 * (hi - lo);
        let x = if secant.is_finite() && secant > lo + margin && secant < hi - margin {
            secant
        } else {
            0.5 * (lo + hi)
        };
        let ep = eval(x)?;
        let fx = ep.ddphi;
        if best
            .as_ref()
            .is_none_or(|(_, b)| fx.abs() < b.ddphi.abs())
        {
            best = Some((x, ep));
        }
        if fx * f_lo > 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
    }
    best.map(|(z0_root, endpoint)| SphereRoot {
        z0_root,
        bracket: (lo, hi),
        endpoint,
        index: 0,
    })
}

/// Refine every sign change of `phi''(ell)` between consecutive
/// equator-reaching records with a safeguarded secant/bisection hybrid.
///
/// `tol` is the zero tolerance on `phi''(ell)`, clamped from below by the
/// endpoint fit uncertainty at the candidate. Brackets whose evaluator fails
/// are reported in `lost`, never aborting the rest.
pub fn bracket_and_refine(
    records: &[ScanRecord],
    tol: f64,
    eval: &(impl Fn(f64) -> Option<EndpointData> + Sync),
) -> RefineOutcome {
    let mut brackets = Vec::new();
    for pair in records.windows(2) {
        if let (Some(da), Some(db)) = (pair[0].ddphi, pair[1].ddphi) {
            if da * db < 0.0 {
                brackets.push((pair[0].z0, da, pair[1].z0, db));
            }
        }
    }
    let refined = par::map_collect(brackets, |(lo, f_lo, hi, f_hi)| {
        (lo, hi, refine_bracket(lo, f_lo, hi, f_hi, tol, eval))
    });
    let mut outcome = RefineOutcome::default();
    for (lo, hi, root) in refined {
        match root {
            Some(r) => outcome.roots.push(r),
            None => outcome.lost.push(LostBracket {
                z0_lo: lo,
                z0_hi: hi,
            }),
        }
    }
    outcome
        .roots
        .sort_by(|a, b| a.z0_root.partial_cmp(&b.z0_root).unwrap());
    for (i, r) in outcome.roots.iter_mut().enumerate() {
        r.index = i;
    }
    outcome
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereSearch {
    pub records: Vec<ScanRecord>,
    pub roots: Vec<SphereRoot>,
    pub lost: Vec<LostBracket>,
}

/// Scan-and-refine pipeline for the discrete closed-surface family at fixed
/// `c_o > 0`. For `c_o = 0` every height closes into a round sphere and the
/// zero condition is identically satisfied, so the search refuses to run.
pub fn find_helfrich_spheres(
    c_o: f64,
    z_max: f64,
    n: usize,
    root_tol: f64,
    config: &SolverConfig,
) -> Result<SphereSearch, SearchError> {
    if c_o == 0.0 {
        return Err(SearchError::RoundSphereFamily);
    }
    let records = scan_adaptive(c_o, z_max, n, config);
    let eval = sphere_eval(c_o, *config);
    let outcome = bracket_and_refine(&records, root_tol, &eval);
    Ok(SphereSearch {
        records,
        roots: outcome.roots,
        lost: outcome.lost,
    })
}

/// The evidence polyline `z0 ↦ (phi''(ell), r_star)`, ordered by height.
pub fn spiral_curve(records: &[ScanRecord]) -> Vec<(f64, f64)> {
    records
        .iter()
        .filter_map(|r| Some((r.ddphi?, r.r_star?)))
        .collect()
}

/// A candidate mirrored pair: equal equator radii and opposite `phi''(ell)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidatePair {
    pub z0_a: f64,
    pub z0_b: f64,
    pub r_star: f64,
    pub ddphi_a: f64,
    pub ddphi_b: f64,
}

/// Search unduloid-type records for pairs with `r_a = r_b` and
/// `phi''_a(ell) = -phi''_b(ell)` (the matching conditions for a closed
/// surface glued from two different heights). Record pairs already within
/// the tolerances are polished by a damped two-dimensional Newton iteration;
/// only polished pairs still meeting the tolerances are reported, and pairs
/// where both second derivatives vanish are excluded as two symmetric
/// closures rather than one asymmetric surface.
pub fn asymmetric_pair_search(
    records: &[ScanRecord],
    tol_r: f64,
    tol_d: f64,
    eval: &(impl Fn(f64) -> Option<EndpointData> + Sync),
) -> Vec<CandidatePair> {
    let points: Vec<(f64, f64, f64)> = records
        .iter()
        .filter(|r| r.status == ScanStatus::Unduloid)
        .filter_map(|r| Some((r.z0, r.r_star?, r.ddphi?)))
        .collect();

    let mut candidates = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (za, ra, da) = points[i];
            let (zb, rb, db) = points[j];
            if (ra - rb).abs() <= tol_r
                && (da + db).abs() <= tol_d
                && da.abs() > tol_d
                && db.abs() > tol_d
            {
                candidates.push((za, zb));
            }
        }
    }

    let mut pairs: Vec<CandidatePair> = Vec::new();
    'candidates: for (mut za, mut zb) in candidates {
        for _ in 0..10 {
            let (Some(ea), Some(eb)) = (eval(za), eval(zb)) else {
                continue 'candidates;
            };
            let f1 = ea.r_star - eb.r_star;
            let f2 = ea.ddphi + eb.ddphi;
            if f1.abs() <= tol_r && f2.abs() <= tol_d {
                if ea.ddphi.abs() <= tol_d || eb.ddphi.abs() <= tol_d || (za - zb).abs() < 1e-9 {
                    continue 'candidates;
                }
                let dup = pairs.iter().any(|p| {
                    (p.z0_a - za).abs() < 1e3 * tol_d && (p.z0_b - zb).abs() < 1e3 * tol_d
                });
                if !dup {
                    pairs.push(CandidatePair {
                        z0_a: za,
                        z0_b: zb,
                        r_star: 0.5 * (ea.r_star + eb.r_star),
                        ddphi_a: ea.ddphi,
                        ddphi_b: eb.ddphi,
                    });
                }
                continue 'candidates;
            }
            // Damped Newton step with a one-sided difference Jacobian.
            let ha = 1e-6 * za.max(1e-3);
            let hb = 1e-6 * zb.max(1e-3);
            let (Some(ea2), Some(eb2)) = (eval(za + ha), eval(zb + hb)) else {
                continue 'candidates;
            };
            let j11 = (ea2.r_star - ea.r_star) / ha;
            let j12 = -(eb2.r_star - eb.r_star) / hb;
            let j21 = (ea2.ddphi - ea.ddphi) / ha;
            let j22 = (eb2.ddphi - eb.ddphi) / hb;
            let det = j11 * j22 - j12 * j21;
            if det.abs() < 1e-14 {
                continue 'candidates;
            }
            let step_a = (f1 * j22 - f2 * j12) / det;
            let step_b = (f2 * j11 - f1 * j21) / det;
            let clamp = 0.05 * za.max(zb);
            za -= step_a.clamp(-clamp, clamp);
            zb -= step_b.clamp(-clamp, clamp);
            if za <= 0.0 || zb <= 0.0 {
                continue 'candidates;
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_eval(
        r_of: impl Fn(f64) -> f64 + Sync,
        d_of: impl Fn(f64) -> f64 + Sync,
    ) -> impl Fn(f64) -> Option<EndpointData> + Sync {
        move |z0| {
            Some(EndpointData {
                ell: 1.0,
                r_star: r_of(z0),
                dphi: -1.0,
                ddphi: d_of(z0),
                fit_uncertainty: 1e-12,
            })
        }
    }

    fn record(z0: f64, r_star: f64, ddphi: f64) -> ScanRecord {
        ScanRecord {
            z0,
            ell: Some(1.0),
            r_star: Some(r_star),
            ddphi: Some(ddphi),
            status: ScanStatus::Unduloid,
        }
    }

    #[test]
    fn linear_bracket_root() {
        let records = vec![record(1.0, 0.5, 1.0), record(2.0, 0.5, -1.0)];
        let eval = synthetic_eval(|_| 0.5, |z| 1.5 - z);
        let outcome = bracket_and_refine(&records, 1e-10, &eval);
        assert_eq!(outcome.roots.len(), 1);
        assert!((outcome.roots[0].z0_root - 1.5).abs() < 1e-8);
        assert!(outcome.lost.is_empty());
    }

    #[test]
    fn lost_bracket_is_reported() {
        let records = vec![record(1.0, 0.5, 1.0), record(2.0, 0.5, -1.0)];
        let eval = |_z0: f64| -> Option<EndpointData> { None };
        let outcome = bracket_and_refine(&records, 1e-10, &eval);
        assert!(outcome.roots.is_empty());
        assert_eq!(outcome.lost.len(), 1);
    }

    #[test]
    fn round_sphere_family_is_refused() {
        assert_eq!(
            find_helfrich_spheres(0.0, 6.0, 10, 1e-8, &SolverConfig::default()),
            Err(SearchError::RoundSphereFamily)
        );
    }

    #[test]
    fn scan_handles_mixed_grid() {
        let config = SolverConfig::default();
        let records = scan(1.0, &[-2.0, -1.0, -0.5, 0.4], &config);
        assert_eq!(records[0].status, ScanStatus::Nodoid);
        assert_eq!(records[1].status, ScanStatus::Line);
        assert!(records[1].r_star.is_none());
        assert_eq!(records[2].status, ScanStatus::Ovaloid);
        assert_eq!(records[3].status, ScanStatus::Unduloid);
        assert!(records[3].r_star.is_some());
    }

    #[test]
    fn small_height_cap_is_graph_over_r_axis() {
        let config = SolverConfig::default();
        let params = ShootingParams::new(1.0, 0.1).unwrap();
        let curve = integrate_profile(&params, &config).unwrap();
        assert_eq!(curve.termination, Termination::EquatorReached);
        for pair in curve.samples.windows(2) {
            assert!(pair[1].r > pair[0].r, "r must increase monotonically");
        }
        let ep = endpoint_extrapolate(&curve, &config).unwrap();
        assert!(ep.r_star < 0.2);
    }

    #[test]
    fn spiral_single_record() {
        let records = vec![record(1.0, 0.4, 0.2)];
        assert_eq!(spiral_curve(&records), vec![(0.2, 0.4)]);
    }

    #[test]
    fn mirrored_fixture_yields_one_pair() {
        // ddphi is odd around z0 = 2; the odd part of r vanishes only at
        // offset 0.25, so (1.75, 2.25) is the unique mirrored pair and the
        // grid contains it exactly.
        let r_of = |z: f64| {
            let t = z - 2.0;
            0.5 + 0.1 * t * t + 0.05 * t * (t * t - 0.0625)
        };
        let d_of = |z: f64| z - 2.0;
        let eval = synthetic_eval(r_of, d_of);
        let records: Vec<ScanRecord> = (0..=40)
            .map(|i| {
                let z = 1.5 + i as f64 / 40.0;
                record(z, r_of(z), d_of(z))
            })
            .collect();
        let pairs = asymmetric_pair_search(&records, 1e-6, 1e-6, &eval);
        assert_eq!(pairs.len(), 1, "pairs: {pairs:?}");
        assert!((pairs[0].z0_a - 1.75).abs() < 1e-6);
        assert!((pairs[0].z0_b - 2.25).abs() < 1e-6);
        assert!((pairs[0].ddphi_a + pairs[0].ddphi_b).abs() < 1e-6);
    }

    #[test]
    fn both_zero_pairs_are_excluded() {
        // Two symmetric roots with matching radii must not count as a pair.
        let records = vec![record(1.0, 0.5, 1e-9), record(2.0, 0.5, -1e-9)];
        let eval = synthetic_eval(|_| 0.5, |_| 1e-9);
        let pairs = asymmetric_pair_search(&records, 1e-4, 1e-4, &eval);
        assert!(pairs.is_empty());
    }
}
