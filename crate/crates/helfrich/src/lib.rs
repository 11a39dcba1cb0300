//! Axially symmetric membrane shapes from a singular profile-curve system.
//!
//! The crate integrates the tangent-angle form of the reduced membrane
//! relation for surfaces of revolution, classifies the resulting generating
//! curves, extrapolates their equator data across the stop singularity,
//! searches the initial height for the discrete family of closed surfaces,
//! glues and verifies those surfaces (quadrature identities, bending energy,
//! equator regularity), and handles the closed-form biconcave discoids with
//! their pole defect.
//!
//! Modules mirror the pipeline stages:
//!
//! * [`ode`] — the shooting problem: series start, adaptive integration,
//!   first integral, scaling map.
//! * [`analysis`] — classification, equator endpoint extrapolation,
//!   curvature fields, membrane and bending-equation residuals.
//! * [`search`] — height scans, root bracketing for `phi''(ell) = 0`,
//!   spiral evidence data, mirrored-pair search.
//! * [`surface`] — gluing, surface integrals, regularity report, meshes.
//! * [`discoid`] — closed-form profiles and the pole flux defect.
//! * [`io`] — versioned CSV/JSON/OBJ writers.
//!
//! Scans and bracket refinements run data-parallel on rayon under the
//! `parallel` feature (enabled by default); disabling it leaves a purely
//! sequential build with identical outputs.

pub mod analysis;
pub mod discoid;
pub mod io;
pub mod ode;
pub mod par;
pub mod search;
pub mod surface;

mod numeric;
mod stepper;

pub use analysis::{
    classify, curvature_fields, el_residual, endpoint_extrapolate, rme_residual, AnalysisError,
    CurvatureSample, CurveClass, EndpointData,
};
pub use discoid::{
    boundary_flux, discoid_el_residual, discoid_mean_curvature, discoid_mesh, discoid_profile,
    DiscoidError, DiscoidSpec, FluxEstimate,
};
pub use ode::{
    apply_scaling, conserved_residual, integrate_profile, rhs, series_start, OdeError,
    ProfileCurve, ProfileKind, ProfileState, ShootingParams, SolverConfig, Termination,
};
pub use search::{
    asymmetric_pair_search, bracket_and_refine, default_grid, find_helfrich_spheres, scan,
    scan_adaptive, scan_seq, sphere_eval, spiral_curve, CandidatePair, ScanRecord, ScanStatus,
    SearchError, SphereRoot, SphereSearch,
};
pub use surface::{
    area, glue, gluing_tolerance, helfrich_energy, regularity_report, rescaling_integral,
    revolve_mesh, surface_integral, Cap, ClosedSurface, Quadrature, RegularityReport,
    RescalingIntegral, SurfaceError, TriMesh, VertexAttr,
};
