// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde_json::json;

use tescatter::admittance::DsaoCache;
use tescatter::geometry::Point2;
use tescatter::scene::{parse_scene, Scene};
use tescatter::solver::metrics::check_resources;
use tescatter::solver::{
    far_field_rcs, full_circle, mie_layered_rcs, near_field, relative_error, solve_pmchwt, solve_ss_sie, CostReport,
    FarField, Method, Problem, Solution,
};
use tescatter::study::{integration_study, StudyConfig};
use tescatter::{Error, Result};

use output::{num, write_json, Csv, Provenance};

#[derive(Parser)]
#[command(name = "tescatter", version, about = "TE scattering from multilayered cylinders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scene, writing currents, echo width and a run summary.
    Solve(SolveArgs),
    /// Bistatic echo width of a scene.
    Rcs(RcsArgs),
    /// Electric field on a rectangular grid outside the scatterers.
    Nearfield(NearfieldArgs),
    /// Solve with both formulations and report cost and agreement.
    Compare(CompareArgs),
    /// Point counts and accuracy of the near-singular integration.
    IntegrationStudy(StudyArgs),
    /// Series solution of a concentric circular scene.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct SceneArgs {
    /// Scene description (JSON).
    #[arg(long)]
    scene: PathBuf,
    /// Radius of the near-field disc in units of 1/k.
    #[arg(long)]
    delta: Option<f64>,
    /// Gauss points on observation segments.
    #[arg(long = "outer-q")]
    outer_q: Option<usize>,
    /// Gauss points on source segments.
    #[arg(long = "inner-q")]
    inner_q: Option<usize>,
    /// Segments per wavelength.
    #[arg(long = "mesh-spw")]
    mesh_spw: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Abort when projected dense storage exceeds this many GB.
    #[arg(long = "memory-limit-gb", default_value_t = 8.0)]
    memory_limit_gb: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    SsSie,
    Pmchwt,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::SsSie => Method::SsSie,
            MethodArg::Pmchwt => Method::Pmchwt,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: SceneArgs,
    #[arg(long, value_enum, default_value = "ss-sie")]
    method: MethodArg,
    /// Number of equally spaced observation angles.
    #[arg(long, default_value_t = 360)]
    angles: usize,
}

#[derive(Args)]
struct RcsArgs {
    #[command(flatten)]
    common: SceneArgs,
    #[arg(long, value_enum, default_value = "ss-sie")]
    method: MethodArg,
    #[arg(long, default_value_t = 360)]
    angles: usize,
}

#[derive(Args)]
struct NearfieldArgs {
    #[command(flatten)]
    common: SceneArgs,
    #[arg(long, value_enum, default_value = "ss-sie")]
    method: MethodArg,
    /// Grid extent as xmin,xmax,ymin,ymax in metres (write `--window=-1,1,-1,1`
    /// when the first value is negative).
    #[arg(long, value_delimiter = ',', default_values_t = [-2.0, 2.0, -2.0, 2.0], allow_negative_numbers = true)]
    window: Vec<f64>,
    /// Grid spacing in metres.
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    /// Write the scattered field instead of the total field.
    #[arg(long)]
    scattered: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: SceneArgs,
    #[arg(long, default_value_t = 360)]
    angles: usize,
}

#[derive(Args)]
struct StudyArgs {
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Wavenumber in 1/m.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Distance of the observation point from the segment end, in metres.
    #[arg(long, default_value_t = 0.02)]
    distance: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: SceneArgs,
    #[arg(long, default_value_t = 360)]
    angles: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    match run(cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("TESCATTER_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("TESCATTER_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("cannot size the worker pool: {e}")))
}

fn run(command: Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::Solve(a) => cmd_solve(a),
        Command::Rcs(a) => cmd_rcs(a),
        Command::Nearfield(a) => cmd_nearfield(a),
        Command::Compare(a) => cmd_compare(a),
        Command::IntegrationStudy(a) => cmd_study(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

/// Scene with command-line overrides applied, validated and meshed.
fn load(args: &SceneArgs) -> Result<(Scene, Problem, Provenance)> {
    let mut scene = parse_scene(&args.scene)?;
    if let Some(d) = args.delta {
        scene.quadrature.delta = d;
    }
    if let Some(n) = args.outer_q {
        scene.quadrature.outer_points = n;
    }
    if let Some(n) = args.inner_q {
        scene.quadrature.inner_points = n;
    }
    if let Some(s) = args.mesh_spw {
        scene.mesh.segments_per_wavelength = s;
    }
    scene.validate()?;
    let problem = scene.to_problem()?;
    let prov = Provenance { scene_hash: Some(scene.hash()), quadrature: scene.quadrature };
    Ok((scene, problem, prov))
}

fn limit_bytes(args: &SceneArgs) -> Result<usize> {
    if !(args.memory_limit_gb > 0.0) {
        return Err(Error::InvalidArgument("memory limit must be positive".into()));
    }
    Ok((args.memory_limit_gb * 1e9) as usize)
}

fn solve(problem: &Problem, method: Method, limit: usize) -> Result<Solution> {
    check_resources(problem, method, limit)?;
    let sol = match method {
        Method::SsSie => solve_ss_sie(problem, &DsaoCache::new())?,
        Method::Pmchwt => solve_pmchwt(problem)?,
    };
    info!("{method:?}: {} unknowns, {:.2} s", sol.unknowns, sol.timings.total);
    Ok(sol)
}

fn angle_count(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one observation angle is required".into()));
    }
    Ok(full_circle(n))
}

fn rcs_csv(prov: &Provenance, ff: &FarField, notes: &[String]) -> Csv {
    let mut csv = Csv::new(prov, notes, &["phi_deg", "rcs_m", "rcs_dbm"]);
    for ((phi, s), db) in ff.angles.iter().zip(&ff.rcs).zip(ff.rcs_db()) {
        csv.row(&[num(phi.to_degrees()), num(*s), num(db)]);
    }
    csv
}

fn method_note(method: Method) -> String {
    match method {
        Method::SsSie => "method single-source".into(),
        Method::Pmchwt => "method two-current".into(),
    }
}

fn cmd_solve(a: SolveArgs) -> Result<Vec<PathBuf>> {
    let (_, problem, prov) = load(&a.common)?;
    let method = a.method.into();
    let sol = solve(&problem, method, limit_bytes(&a.common)?)?;
    let notes = [method_note(method)];
    let mut paths = Vec::new();

    let mut currents = Csv::new(&prov, &notes, &["contour", "index", "re_j", "im_j", "re_m", "im_m"]);
    for r in &sol.radiators {
        for (i, j) in r.electric.iter().enumerate() {
            let m = r.magnetic.as_ref().map(|m| m[i]).unwrap_or_default();
            currents.row(&[r.boundary.id.to_string(), i.to_string(), num(j.re), num(j.im), num(m.re), num(m.im)]);
        }
    }
    paths.push(currents.write(&a.common.out, "currents.csv")?);

    if !sol.radiators.is_empty() {
        let ff = far_field_rcs(&sol, &angle_count(a.angles)?, &problem.quadrature)?;
        paths.push(rcs_csv(&prov, &ff, &notes).write(&a.common.out, "rcs.csv")?);
    } else {
        warn!("scene has no scatterers; no echo width written");
    }

    let summary = json!({
        "provenance": prov.json(),
        "cost": CostReport::of(&sol),
        "system_condition": sol.system_condition,
    });
    paths.push(write_json(&a.common.out, "solution.json", &summary)?);
    Ok(paths)
}

fn cmd_rcs(a: RcsArgs) -> Result<Vec<PathBuf>> {
    let (_, problem, prov) = load(&a.common)?;
    let method = a.method.into();
    let sol = solve(&problem, method, limit_bytes(&a.common)?)?;
    let ff = far_field_rcs(&sol, &angle_count(a.angles)?, &problem.quadrature)?;
    Ok(vec![rcs_csv(&prov, &ff, &[method_note(method)]).write(&a.common.out, "rcs.csv")?])
}

fn cmd_nearfield(a: NearfieldArgs) -> Result<Vec<PathBuf>> {
    let (_, problem, prov) = load(&a.common)?;
    let &[x0, x1, y0, y1] = a.window.as_slice() else {
        return Err(Error::InvalidArgument("--window takes xmin,xmax,ymin,ymax".into()));
    };
    if !(a.step > 0.0) || !(x1 >= x0) || !(y1 >= y0) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("grid window must be ordered and finite with a positive step".into()));
    }
    let nx = ((x1 - x0) / a.step + 1e-9).floor() as usize + 1;
    let ny = ((y1 - y0) / a.step + 1e-9).floor() as usize + 1;
    let outer = problem.outer_boundaries();
    let mut points = Vec::new();
    let mut skipped = 0;
    for i in 0..nx {
        for j in 0..ny {
            let p = Point2::new(x0 + i as f64 * a.step, y0 + j as f64 * a.step);
            if outer.iter().any(|b| b.contains(p) || b.distance_to(p) < 1e-6 * b.perimeter()) {
                skipped += 1;
            } else {
                points.push(p);
            }
        }
    }
    let method = a.method.into();
    let sol = solve(&problem, method, limit_bytes(&a.common)?)?;
    let field = near_field(&sol, &points, &problem.quadrature, !a.scattered)?;
    let notes = [
        method_note(method),
        format!("field {}", if a.scattered { "scattered" } else { "total" }),
        format!("skipped {skipped} grid points inside or on a scatterer"),
    ];
    let mut csv = Csv::new(&prov, &notes, &["x", "y", "re_ex", "im_ex", "re_ey", "im_ey"]);
    for (p, e) in points.iter().zip(&field) {
        csv.row(&[num(p.x), num(p.y), num(e[0].re), num(e[0].im), num(e[1].re), num(e[1].im)]);
    }
    Ok(vec![csv.write(&a.common.out, "nearfield.csv")?])
}

fn cmd_compare(a: CompareArgs) -> Result<Vec<PathBuf>> {
    let (_, problem, prov) = load(&a.common)?;
    let limit = limit_bytes(&a.common)?;
    check_resources(&problem, Method::Pmchwt, limit)?;
    let ss = solve(&problem, Method::SsSie, limit)?;
    let pm = solve(&problem, Method::Pmchwt, limit)?;
    let angles = angle_count(a.angles)?;
    let discrepancy = if problem.scatterers.is_empty() {
        None
    } else {
        let a = far_field_rcs(&ss, &angles, &problem.quadrature)?;
        let b = far_field_rcs(&pm, &angles, &problem.quadrature)?;
        Some(relative_error(&a.rcs, &b.rcs)?)
    };
    let ratio = |x: f64, y: f64| if y > 0.0 { Some(x / y) } else { None };
    let report = json!({
        "provenance": prov.json(),
        "single_source": {
            "cost": CostReport::of(&ss),
            "system_condition": ss.system_condition,
        },
        "two_current": {
            "cost": CostReport::of(&pm),
            "system_condition": pm.system_condition,
        },
        "rcs_relative_discrepancy": discrepancy,
        "ratios": {
            "unknowns": ratio(ss.unknowns as f64, pm.unknowns as f64),
            "memory": ratio(ss.memory_bytes as f64, pm.memory_bytes as f64),
            "time": ratio(ss.timings.total, pm.timings.total),
        },
    });
    Ok(vec![write_json(&a.common.out, "compare.json", &report)?])
}

fn cmd_study(a: StudyArgs) -> Result<Vec<PathBuf>> {
    let cfg = StudyConfig { k: a.k, distance: a.distance, ..StudyConfig::default() };
    let rows = integration_study(&cfg)?;
    let prov = Provenance { scene_hash: None, quadrature: Default::default() };
    let notes = [format!(
        "half_length {} distance {} k {} tolerance {:e}",
        cfg.half_length, cfg.distance, cfg.k, cfg.tolerance
    )];
    let mut csv = Csv::new(
        &prov,
        &notes,
        &["theta_over_pi", "delta", "kernel", "hybrid_points", "gauss_points", "discrepancy"],
    );
    let count = |n: Option<usize>| n.map_or_else(|| "unconverged".to_string(), |n| n.to_string());
    for r in &rows {
        csv.row(&[
            format!("{}", r.theta_over_pi),
            format!("{}", r.delta),
            format!("{:?}", r.kernel),
            count(r.hybrid_points),
            count(r.gauss_points),
            num(r.discrepancy),
        ]);
    }
    Ok(vec![csv.write(&a.out, "integration_study.csv")?])
}

fn cmd_oracle(a: OracleArgs) -> Result<Vec<PathBuf>> {
    let (scene, _, prov) = load(&a.common)?;
    let cyl = scene.layered_cylinder()?;
    let d = scene.incidence.direction;
    let ff = mie_layered_rcs(&cyl, scene.frequency, d.y.atan2(d.x), &angle_count(a.angles)?)?;
    let notes = ["method series".to_string()];
    Ok(vec![rcs_csv(&prov, &ff, &notes).write(&a.common.out, "oracle.csv")?])
}
