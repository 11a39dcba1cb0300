//! Command-line front end: profile integration, height scans, closed-surface
//! enumeration with verification reports, mirrored-pair evidence runs, and
//! discoid flux computations. All numeric outputs are deterministic; wall
//! clock timestamps go only to the sidecar `run.log`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use helfrich::{
    conserved_residual, discoid_mesh, discoid_profile, endpoint_extrapolate, find_helfrich_spheres,
    glue, gluing_tolerance, integrate_profile, io, regularity_report, rescaling_integral,
    revolve_mesh, rme_residual, scan_adaptive, spiral_curve, surface, surface_integral, Cap,
    CurveClass, DiscoidError, DiscoidSpec, ShootingParams, SolverConfig, Termination,
};

const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "helfrich",
    version,
    about = "Axially symmetric membrane profiles, closed-surface search, and verification outputs"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat key=value config file (keys match solver fields plus `out`).
    /// Precedence: command-line flags, then file values, then defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    /// Series-start offset, relative to max(1, |z0|).
    #[arg(long, global = true)]
    h0: Option<f64>,
    /// Equator stop threshold, relative to |z0|.
    #[arg(long, global = true)]
    z_stop: Option<f64>,
    /// Arc-length cap, relative.
    #[arg(long, global = true)]
    s_max: Option<f64>,
    /// Sample-spacing cap, relative.
    #[arg(long, global = true)]
    max_step: Option<f64>,
    /// Stop-threshold refinements for endpoint extrapolation.
    #[arg(long, global = true)]
    levels: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one profile and write trajectory + endpoint analysis.
    Profile {
        #[arg(long)]
        co: f64,
        #[arg(long, allow_hyphen_values = true)]
        z0: f64,
    },
    /// Sweep initial heights and write the equator-data scan and spiral CSV.
    Scan {
        #[arg(long)]
        co: f64,
        #[arg(long, default_value_t = 6.0)]
        zmax: f64,
        #[arg(long, default_value_t = 2000)]
        n: usize,
    },
    /// Enumerate closed surfaces (zeros of phi''(ell)), verify, and export.
    Spheres {
        #[arg(long)]
        co: f64,
        #[arg(long, default_value_t = 6.0)]
        zmax: f64,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Keep only the first `count` roots.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 96)]
        ntheta: usize,
    },
    /// Search for mirrored cap pairs (evidence run; expected empty).
    Pairs {
        #[arg(long)]
        co: f64,
        #[arg(long, default_value_t = 6.0)]
        zmax: f64,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol_r: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol_d: f64,
    },
    /// Generate a biconcave discoid, check the interior equation, and
    /// compute the pole flux defect.
    Discoid {
        #[arg(long)]
        co: f64,
        #[arg(long = "A", allow_hyphen_values = true)]
        a: f64,
        /// Number of cut radii, geometric from 1e-2 down to 1e-5.
        #[arg(long, default_value_t = 7)]
        eps_levels: usize,
        #[arg(long, default_value_t = 96)]
        ntheta: usize,
    },
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), lineno + 1);
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn resolve(common: &Common) -> Result<(SolverConfig, PathBuf)> {
    let mut config = SolverConfig::default();
    let mut out = PathBuf::from("out");

    if let Some(path) = &common.config {
        let map = parse_config_file(path)?;
        let get_f64 = |map: &BTreeMap<String, String>, key: &str| -> Result<Option<f64>> {
            map.get(key)
                .map(|v| {
                    v.parse::<f64>()
                        .with_context(|| format!("config key {key}: bad float {v}"))
                })
                .transpose()
        };
        if let Some(v) = get_f64(&map, "rel_tol")? {
            config.rel_tol = v;
        }
        if let Some(v) = get_f64(&map, "abs_tol")? {
            config.abs_tol = v;
        }
        if let Some(v) = get_f64(&map, "h0")? {
            config.h0 = v;
        }
        if let Some(v) = get_f64(&map, "z_stop")? {
            config.z_stop = v;
        }
        if let Some(v) = get_f64(&map, "s_max")? {
            config.s_max = v;
        }
        if let Some(v) = get_f64(&map, "max_step")? {
            config.max_step = v;
        }
        if let Some(v) = get_f64(&map, "phi_window")? {
            config.phi_window = v;
        }
        if let Some(v) = map.get("richardson_levels") {
            config.richardson_levels = v
                .parse()
                .with_context(|| format!("config key richardson_levels: bad value {v}"))?;
        }
        if let Some(v) = map.get("out") {
            out = PathBuf::from(v);
        }
    }

    if let Some(v) = common.rel_tol {
        config.rel_tol = v;
    }
    if let Some(v) = common.abs_tol {
        config.abs_tol = v;
    }
    if let Some(v) = common.h0 {
        config.h0 = v;
    }
    if let Some(v) = common.z_stop {
        config.z_stop = v;
    }
    if let Some(v) = common.s_max {
        config.s_max = v;
    }
    if let Some(v) = common.max_step {
        config.max_step = v;
    }
    if let Some(v) = common.levels {
        config.richardson_levels = v;
    }
    if let Some(v) = &common.out {
        out = v.clone();
    }
    Ok((config, out))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(dir, name, &text)
}

fn append_run_log(dir: &Path) {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let argv: Vec<String> = std::env::args().collect();
    let line = format!("{} {}\n", stamp, argv.join(" "));
    let _ = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(dir.join("run.log"))
        .and_then(|mut f| std::io::Write::write_all(&mut f, line.as_bytes()));
}

fn class_tag(class: CurveClass) -> &'static str {
    match class {
        CurveClass::UnduloidType => "unduloid",
        CurveClass::OvaloidType => "ovaloid",
        CurveClass::NodoidType => "nodoid",
        CurveClass::HorizontalLine => "line",
        CurveClass::Circle => "circle",
    }
}

fn cmd_profile(co: f64, z0: f64, config: &SolverConfig, out: &Path) -> Result<u8> {
    let params = ShootingParams::new(co, z0).map_err(|e| anyhow::anyhow!("{e}"))?;
    let curve = integrate_profile(&params, config).map_err(|e| anyhow::anyhow!("{e}"))?;
    let class = helfrich::classify(&params);
    let endpoint = if curve.termination == Termination::EquatorReached {
        Some(endpoint_extrapolate(&curve, config).map_err(|e| anyhow::anyhow!("{e}"))?)
    } else {
        None
    };
    let rme = rme_residual(&curve);
    let conserved = if curve.termination == Termination::StepFailure {
        f64::NAN
    } else {
        conserved_residual(&curve)
    };
    write_file(out, "profile.csv", &io::profile_csv(&curve))?;
    write_json(out, "profile.json", &io::profile_json(&curve, config))?;
    write_file(
        out,
        "curvature.csv",
        &io::curvature_csv(&helfrich::curvature_fields(&curve)),
    )?;
    write_json(
        out,
        "analysis.json",
        &io::analysis_json(&curve, class_tag(class), endpoint.as_ref(), rme, conserved),
    )?;
    match curve.termination {
        Termination::EquatorReached => {
            let ep = endpoint.unwrap();
            println!(
                "{}: equator reached, ell = {:.9}, r* = {:.9}, phi'(ell) = {:.9}, phi''(ell) = {:.6e}",
                class_tag(class),
                ep.ell,
                ep.r_star,
                ep.dphi,
                ep.ddphi
            );
            Ok(0)
        }
        Termination::MaxArcLength => {
            println!(
                "{}: ran to the arc-length cap (no equator stop)",
                class_tag(class)
            );
            Ok(0)
        }
        Termination::StepFailure => {
            eprintln!("integration failed before a clean stop");
            Ok(EXIT_NUMERIC)
        }
    }
}

fn cmd_scan(co: f64, zmax: f64, n: usize, config: &SolverConfig, out: &Path) -> Result<u8> {
    if co <= 0.0 {
        bail!("scan needs c_o > 0 (c_o = 0 closes at every height)");
    }
    let records = scan_adaptive(co, zmax, n, config);
    write_file(out, "scan.csv", &io::scan_csv(&records))?;
    write_file(out, "spiral.csv", &io::spiral_csv(&spiral_curve(&records)))?;
    let closed = records.iter().filter(|r| r.ddphi.is_some()).count();
    println!(
        "{} scan points, {} with equator data",
        records.len(),
        closed
    );
    Ok(0)
}

fn surface_report(
    cap: &Cap,
    co: f64,
    ntheta: usize,
) -> Result<(serde_json::Value, helfrich::TriMesh)> {
    let s = glue(
        cap.clone(),
        cap.clone(),
        gluing_tolerance(cap.endpoint.r_star),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let area = surface::area(&s);
    let energy = surface::helfrich_energy(&s, co);
    let rescale = rescaling_integral(&s, co);
    let report = regularity_report(&s);
    let nu3 = surface_integral(&s, |cs| cs.nu3).value;
    let hnu3 = surface_integral(&s, |cs| 2.0 * cs.h * cs.nu3).value;
    let mesh = revolve_mesh(&s, ntheta).map_err(|e| anyhow::anyhow!("{e}"))?;
    let json = io::surface_json(&s, co, area, energy, &rescale, &report, nu3, hnu3);
    Ok((json, mesh))
}

fn cmd_spheres(
    co: f64,
    zmax: f64,
    n: usize,
    count: Option<usize>,
    ntheta: usize,
    config: &SolverConfig,
    out: &Path,
) -> Result<u8> {
    let search = match find_helfrich_spheres(co, zmax, n, 1e-8, config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return Ok(EXIT_NUMERIC);
        }
    };
    write_file(out, "scan.csv", &io::scan_csv(&search.records))?;
    write_file(
        out,
        "spiral.csv",
        &io::spiral_csv(&spiral_curve(&search.records)),
    )?;
    let mut roots = search.roots.clone();
    if let Some(k) = count {
        roots.truncate(k);
    }
    write_json(out, "roots.json", &io::roots_json(co, &roots))?;
    for lost in &search.lost {
        eprintln!(
            "bracket ({:.6}, {:.6}) lost: evaluation failed inside",
            lost.z0_lo, lost.z0_hi
        );
    }

    for root in &roots {
        let params = ShootingParams::new(co, root.z0_root).map_err(|e| anyhow::anyhow!("{e}"))?;
        let curve = integrate_profile(&params, config).map_err(|e| anyhow::anyhow!("{e}"))?;
        let cap = Cap {
            curve,
            endpoint: root.endpoint,
        };
        let (json, mesh) = surface_report(&cap, co, ntheta)?;
        write_json(out, &format!("sphere_{}.json", root.index), &json)?;
        write_file(
            out,
            &format!("sphere_{}.obj", root.index),
            &io::obj_string(&mesh, &format!("helfrich_sphere_{}", root.index)),
        )?;
        println!(
            "root {}: z0 = {:.9}, r* = {:.6}, phi''(ell) = {:.3e}",
            root.index, root.z0_root, root.endpoint.r_star, root.endpoint.ddphi
        );
    }
    println!("{} certified roots", roots.len());
    Ok(0)
}

fn cmd_pairs(
    co: f64,
    zmax: f64,
    n: usize,
    tol_r: f64,
    tol_d: f64,
    config: &SolverConfig,
    out: &Path,
) -> Result<u8> {
    if co <= 0.0 {
        bail!("pairs search needs c_o > 0");
    }
    let records = scan_adaptive(co, zmax, n, config);
    let eval = helfrich::sphere_eval(co, *config);
    let pairs = helfrich::asymmetric_pair_search(&records, tol_r, tol_d, &eval);
    write_json(out, "pairs.json", &io::pairs_json(co, tol_r, tol_d, &pairs))?;
    println!(
        "{} mirrored pair(s) at tolerances ({tol_r:e}, {tol_d:e})",
        pairs.len()
    );
    Ok(0)
}

fn cmd_discoid(
    co: f64,
    a: f64,
    eps_levels: usize,
    ntheta: usize,
    config: &SolverConfig,
    out: &Path,
) -> Result<u8> {
    let spec = match DiscoidSpec::new(co, a) {
        Ok(s) => s,
        Err(e) => bail!("{e}"),
    };
    let curve = match discoid_profile(&spec, config) {
        Ok(c) => c,
        Err(e @ DiscoidError::DomainExceeded { .. }) => {
            eprintln!("{e}");
            return Ok(EXIT_NUMERIC);
        }
        Err(e) => {
            eprintln!("{e}");
            return Ok(EXIT_NUMERIC);
        }
    };
    write_file(out, "discoid_profile.csv", &io::profile_csv(&curve))?;

    let levels = eps_levels.max(4);
    let epsilons: Vec<f64> = (0..levels)
        .map(|i| 10f64.powf(-(2.0 + 3.0 * i as f64 / (levels as f64 - 1.0))))
        .collect();
    let flux =
        helfrich::boundary_flux(&curve, &spec, &epsilons).map_err(|e| anyhow::anyhow!("{e}"))?;
    let verdict = if co == 0.0 {
        String::from("critical (Willmore sphere)")
    } else {
        format!(
            "not critical: first-variation defect {:.6} (expected 8 pi c_o = {:.6})",
            flux.dirac_coefficient,
            8.0 * std::f64::consts::PI * co
        )
    };
    write_json(
        out,
        "discoid_flux.json",
        &io::flux_json(&spec, spec.rim_radius(), &flux, &verdict),
    )?;
    let mesh = discoid_mesh(&curve, &spec, ntheta).map_err(|e| anyhow::anyhow!("{e}"))?;
    write_file(out, "discoid.obj", &io::obj_string(&mesh, "discoid"))?;
    println!("{verdict}");
    Ok(0)
}

#[cfg(feature = "parallel")]
fn init_threads() {
    if let Ok(v) = std::env::var("HELFRICH_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn init_threads() {}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    init_threads();
    let (config, out) = resolve(&cli.common)?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    append_run_log(&out);
    match cli.command {
        Command::Profile { co, z0 } => cmd_profile(co, z0, &config, &out),
        Command::Scan { co, zmax, n } => cmd_scan(co, zmax, n, &config, &out),
        Command::Spheres {
            co,
            zmax,
            n,
            count,
            ntheta,
        } => cmd_spheres(co, zmax, n, count, ntheta, &config, &out),
        Command::Pairs {
            co,
            zmax,
            n,
            tol_r,
            tol_d,
        } => cmd_pairs(co, zmax, n, tol_r, tol_d, &config, &out),
        Command::Discoid {
            co,
            a,
            eps_levels,
            ntheta,
        } => cmd_discoid(co, a, eps_levels, ntheta, &config, &out),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
