//! Batch driver: each subcommand runs one experiment and writes JSON or CSV.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use willmore::acceptance;
use willmore::conformal_lab::{check_invariance, li_yau_chain, LiYauRecord};
use willmore::curves::{
    elastic_energy_s2, half_plane_circle, hyperbolic_bending, latitude, total_curvature, trefoil, ClosedCurve,
    CurveAmbient, Harmonic,
};
use willmore::family::{sup_area_landscape, sweepout_phi1, LandscapeGrid};
use willmore::quadrature::{Domain, QuadratureGrid, MIN_NODES};
use willmore::s3::random_param;
use willmore::shapes::{hopf_torus, tube_energy_profile, ShapeSpec};
use willmore::spectral::jacobi_spectrum;
use willmore::surface::Ambient;

use output::{g12, round12, sink, write_csv, write_json};

#[derive(Parser)]
#[command(name = "willmore", version, about = "Willmore energy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Quadrature resolution, `N` or `NUxNV`.
    #[arg(long, value_parser = parse_res)]
    res: Option<(usize, usize)>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Area and Willmore energy of each shape (JSON).
    Energy {
        /// Shape spec, repeatable.
        #[arg(long, value_parser = parse_shape)]
        shape: Vec<ShapeSpec>,
        #[command(flatten)]
        common: Common,
    },
    /// Willmore energy of tube tori around a circle of radius R (CSV).
    TubeProfile {
        #[arg(long = "R")]
        big_r: f64,
        #[arg(long)]
        rmin: f64,
        #[arg(long)]
        rmax: f64,
        /// Number of intervals; the table has steps + 1 rows.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Energy deviation under random conformal maps (CSV).
    Invariance {
        #[arg(long, value_parser = parse_shape)]
        shape: Option<ShapeSpec>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Largest |v|.
        #[arg(long, default_value_t = 0.8)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Area landscape of the canonical family (CSV) with a summary (JSON).
    Family {
        #[arg(long, value_parser = parse_shape)]
        shape: Option<ShapeSpec>,
        #[arg(long, default_value_t = 9)]
        per_axis: usize,
        #[arg(long, default_value_t = 0.9)]
        radius: f64,
        #[arg(long, default_value_t = 33)]
        t_steps: usize,
        /// Nelder-Mead evaluations after the grid.
        #[arg(long, default_value_t = 400)]
        refine: usize,
        /// Where the JSON summary goes; standard error when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Areas of the slices x4 = 2t - 1 (CSV).
    Sweep {
        /// Number of samples of t in [0, 1], endpoints included.
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lowest Jacobi eigenvalues, index and nullity (JSON).
    Spectrum {
        #[arg(long, value_parser = parse_shape)]
        shape: Option<ShapeSpec>,
        /// Eigenvalues computed; those up to 20 are reported.
        #[arg(long, default_value_t = 40)]
        count: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Balancing and the lambda1 area chain for flat tori (JSON).
    Liyau {
        #[arg(long, value_parser = parse_shape)]
        shape: Vec<ShapeSpec>,
        #[command(flatten)]
        common: Common,
    },
    /// Energies of closed curves (CSV).
    Curves {
        /// Curve in text form, repeatable; a small catalog when absent.
        #[arg(long, value_parser = parse_curve)]
        curve: Vec<ClosedCurve>,
        #[command(flatten)]
        common: Common,
    },
    /// Runs the acceptance criteria; exit status 0 iff all pass.
    Report {
        /// Comma-separated criterion numbers; all when absent.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        /// JSON record of the outcomes.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Energy { .. } => "energy",
            Command::TubeProfile { .. } => "tube-profile",
            Command::Invariance { .. } => "invariance",
            Command::Family { .. } => "family",
            Command::Sweep { .. } => "sweep",
            Command::Spectrum { .. } => "spectrum",
            Command::Liyau { .. } => "liyau",
            Command::Curves { .. } => "curves",
            Command::Report { .. } => "report",
        }
    }
}

fn parse_shape(s: &str) -> Result<ShapeSpec, String> {
    s.parse().map_err(|e: willmore::Error| e.to_string())
}

fn parse_curve(s: &str) -> Result<ClosedCurve, String> {
    s.parse().map_err(|e: willmore::Error| e.to_string())
}

fn parse_res(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('x').unwrap_or((s, s));
    let n_u: usize = a.trim().parse().map_err(|_| format!("bad resolution {s:?}"))?;
    let n_v: usize = b.trim().parse().map_err(|_| format!("bad resolution {s:?}"))?;
    if n_u < MIN_NODES || n_v < MIN_NODES {
        return Err(format!("resolution must be at least {MIN_NODES}"));
    }
    Ok((n_u, n_v))
}

fn grid(domain: Domain, res: Option<(usize, usize)>, default: usize) -> anyhow::Result<QuadratureGrid> {
    let (n_u, n_v) = res.unwrap_or((default, default));
    Ok(QuadratureGrid::new(domain, n_u, n_v)?)
}

#[derive(Serialize)]
struct EnergyRecord {
    shape: String,
    ambient: &'static str,
    n_u: usize,
    n_v: usize,
    area: f64,
    willmore: f64,
}

fn ambient_tag(a: Ambient) -> &'static str {
    match a {
        Ambient::R3 => "r3",
        Ambient::S3 => "s3",
    }
}

fn energy(shapes: Vec<ShapeSpec>, common: Common) -> anyhow::Result<()> {
    let shapes = if shapes.is_empty() { vec![ShapeSpec::clifford()] } else { shapes };
    let mut records = Vec::new();
    for spec in shapes {
        let s = spec.build()?;
        let q = grid(s.domain, common.res, 128)?;
        records.push(EnergyRecord {
            shape: spec.to_string(),
            ambient: ambient_tag(s.ambient),
            n_u: q.n_u,
            n_v: q.n_v,
            area: round12(s.area(&q)?),
            willmore: round12(s.willmore_energy(&q)?),
        });
    }
    write_json(&mut *sink(common.out.as_deref())?, &records)
}

fn tube_profile(big_r: f64, rmin: f64, rmax: f64, steps: usize, common: Common) -> anyhow::Result<()> {
    if !(0.0 < rmin && rmin < rmax && rmax < big_r) || steps == 0 {
        bail!("need 0 < rmin < rmax < R and steps >= 1");
    }
    // The integrand does not depend on the angle around the axis.
    let (_, n_v) = common.res.unwrap_or((16, 128));
    let q = QuadratureGrid::new(Domain::Torus, 16, n_v)?;
    let samples: Vec<f64> = (0..=steps)
        .map(|k| rmin + (rmax - rmin) * k as f64 / steps as f64)
        .collect();
    let rows: Vec<Vec<String>> = tube_energy_profile(big_r, &samples, &q)?
        .into_iter()
        .map(|(r, w)| vec![g12(r), g12(w)])
        .collect();
    write_csv(sink(common.out.as_deref())?, &["r", "W"], &rows)
}

fn invariance(shape: Option<ShapeSpec>, samples: usize, radius: f64, seed: u64, common: Common) -> anyhow::Result<()> {
    if !(0.0..1.0).contains(&radius) {
        bail!("radius must lie in [0, 1)");
    }
    let spec = shape.unwrap_or_else(ShapeSpec::clifford);
    let s = spec.build()?;
    if s.ambient != Ambient::S3 {
        bail!("conformal maps act on S³ shapes; lift ℝ³ shapes with lift=s3");
    }
    let q = grid(s.domain, common.res, 128)?;
    let base = s.willmore_energy(&q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(samples);
    for _ in 0..samples {
        let v = random_param(&mut rng, radius);
        let dev = check_invariance(&s, &v, &q)?;
        let x = v.vector();
        rows.push(vec![
            g12(x[0]),
            g12(x[1]),
            g12(x[2]),
            g12(x[3]),
            g12(v.norm()),
            g12(base),
            g12(dev),
        ]);
    }
    write_csv(
        sink(common.out.as_deref())?,
        &["v1", "v2", "v3", "v4", "norm", "willmore", "deviation"],
        &rows,
    )
}

#[derive(Serialize)]
struct FamilySummary {
    shape: String,
    n_u: usize,
    n_v: usize,
    grid_points: usize,
    sup: f64,
    argmax_v: [f64; 4],
    argmax_t: f64,
    willmore: f64,
    certified: bool,
}

fn family(
    shape: Option<ShapeSpec>,
    landscape_grid: LandscapeGrid,
    refine: usize,
    summary: Option<PathBuf>,
    common: Common,
) -> anyhow::Result<()> {
    let spec = shape.unwrap_or_else(ShapeSpec::clifford);
    let s = spec.build()?;
    let q = grid(s.domain, common.res, 32)?;
    let l = sup_area_landscape(&s, &landscape_grid, &q, refine)?;
    let rows: Vec<Vec<String>> = l
        .rows
        .iter()
        .map(|(p, a)| {
            let v = p.v.vector();
            vec![g12(v[0]), g12(v[1]), g12(v[2]), g12(v[3]), g12(p.t), g12(*a)]
        })
        .collect();
    write_csv(sink(common.out.as_deref())?, &["v1", "v2", "v3", "v4", "t", "area"], &rows)?;
    let v = l.argmax.v.vector();
    let record = FamilySummary {
        shape: spec.to_string(),
        n_u: q.n_u,
        n_v: q.n_v,
        grid_points: l.rows.len(),
        sup: round12(l.sup),
        argmax_v: [round12(v[0]), round12(v[1]), round12(v[2]), round12(v[3])],
        argmax_t: round12(l.argmax.t),
        willmore: round12(l.willmore),
        certified: l.certified,
    };
    match summary {
        Some(path) => write_json(&mut *sink(Some(&path))?, &record),
        None => write_json(&mut std::io::stderr().lock(), &record),
    }
}

fn sweep(steps: usize, out: Option<PathBuf>) -> anyhow::Result<()> {
    if steps < 2 {
        bail!("need at least 2 samples");
    }
    let rows = (0..steps)
        .map(|k| {
            let t = k as f64 / (steps - 1) as f64;
            Ok(vec![g12(t), g12(sweepout_phi1(t)?)])
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    write_csv(sink(out.as_deref())?, &["t", "area"], &rows)
}

#[derive(Serialize)]
struct SpectrumRecord {
    shape: String,
    res: usize,
    eigenvalues: Vec<f64>,
    index: usize,
    nullity: usize,
    tol: f64,
    killing_nullity: usize,
    indeterminate: bool,
}

fn spectrum(shape: Option<ShapeSpec>, count: usize, common: Common) -> anyhow::Result<()> {
    let spec = shape.unwrap_or_else(ShapeSpec::clifford);
    let s = spec.build()?;
    let n = match common.res {
        Some((a, b)) if a != b => bail!("the Jacobi operator uses a square grid"),
        Some((a, _)) => a,
        None => 64,
    };
    let js = jacobi_spectrum(&s, n, count.max(1))?;
    if js.indeterminate {
        log::warn!("nullity {} exceeds the rotation count {}; index may be off", js.nullity, js.killing_nullity);
    }
    let record = SpectrumRecord {
        shape: spec.to_string(),
        res: n,
        eigenvalues: js.eigenvalues.iter().copied().filter(|&l| l <= 20.0).map(round12).collect(),
        index: js.index,
        nullity: js.nullity,
        tol: round12(js.tol),
        killing_nullity: js.killing_nullity,
        indeterminate: js.indeterminate,
    };
    write_json(&mut *sink(common.out.as_deref())?, &record)
}

fn liyau(shapes: Vec<ShapeSpec>, common: Common) -> anyhow::Result<()> {
    let shapes = if shapes.is_empty() {
        vec![
            ShapeSpec::clifford(),
            ShapeSpec::product(0.6),
            ShapeSpec::product(0.3),
            ShapeSpec::hopf(latitude(0.4, 0.08, 3)?),
        ]
    } else {
        shapes
    };
    let mut records: Vec<LiYauRecord> = Vec::new();
    for spec in shapes {
        let s = spec.build()?;
        let q = grid(s.domain, common.res, 64)?;
        let mut r = li_yau_chain(&spec.to_string(), &s, &q)?;
        r.v0 = r.v0.map(round12);
        r.lambda1_area = round12(r.lambda1_area);
        r.two_w = round12(r.two_w);
        records.push(r);
    }
    write_json(&mut *sink(common.out.as_deref())?, &records)
}

fn catalog_curves() -> anyhow::Result<Vec<(String, ClosedCurve)>> {
    let circle = ClosedCurve::new(
        CurveAmbient::R3,
        vec![
            Harmonic::new(0.0, vec![(1.0, 0.0)]),
            Harmonic::new(0.0, vec![(0.0, 1.0)]),
            Harmonic::constant(0.0),
        ],
    )?;
    Ok(vec![
        ("circle".into(), circle),
        ("trefoil".into(), trefoil()),
        ("equator".into(), latitude(0.0, 0.0, 0)?),
        ("latitude(0.4)".into(), latitude(0.4, 0.0, 0)?),
        ("wavy latitude".into(), latitude(0.4, 0.08, 3)?),
        ("profile h/r=sqrt2".into(), half_plane_circle(2f64.sqrt(), 1.0)?),
        ("profile h/r=2".into(), half_plane_circle(2.0, 1.0)?),
    ])
}

fn curves(given: Vec<ClosedCurve>, common: Common) -> anyhow::Result<()> {
    let list = if given.is_empty() {
        catalog_curves()?
    } else {
        given.into_iter().enumerate().map(|(i, c)| (format!("curve{}", i + 1), c)).collect()
    };
    let q = grid(Domain::Torus, common.res, 128)?;
    let mut rows = Vec::new();
    for (name, c) in list {
        let (mut total, mut elastic, mut hopf, mut bending) = (String::new(), String::new(), String::new(), String::new());
        match c.ambient {
            CurveAmbient::R3 => total = g12(total_curvature(&c)?),
            CurveAmbient::S2 => {
                elastic = g12(elastic_energy_s2(&c)?);
                hopf = g12(hopf_torus(&c)?.willmore_energy(&q)?);
            }
            CurveAmbient::H2 => bending = g12(hyperbolic_bending(&c)?),
        }
        rows.push(vec![name, c.to_string(), g12(c.length()?), total, elastic, hopf, bending]);
    }
    write_csv(
        sink(common.out.as_deref())?,
        &["name", "curve", "length", "total_curvature", "elastic_energy", "hopf_willmore", "hyperbolic_bending"],
        &rows,
    )
}

fn report(only: Vec<u8>, out: Option<PathBuf>) -> anyhow::Result<bool> {
    let ids: Vec<u8> = if only.is_empty() { (1..=acceptance::COUNT).collect() } else { only };
    if let Some(bad) = ids.iter().find(|&&id| id == 0 || id > acceptance::COUNT) {
        bail!("no criterion {bad}; valid ids are 1 to {}", acceptance::COUNT);
    }
    let mut outcomes = Vec::new();
    for id in ids {
        let o = acceptance::run(id);
        println!("{o}");
        outcomes.push(o);
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    if let Some(path) = out {
        write_json(&mut *sink(Some(&path))?, &outcomes)?;
    }
    Ok(passed == outcomes.len())
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("WILLMORE_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("WILLMORE_THREADS={v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(command: Command) -> anyhow::Result<bool> {
    configure_threads()?;
    match command {
        Command::Energy { shape, common } => energy(shape, common)?,
        Command::TubeProfile { big_r, rmin, rmax, steps, common } => tube_profile(big_r, rmin, rmax, steps, common)?,
        Command::Invariance { shape, samples, radius, seed, common } => {
            invariance(shape, samples, radius, seed, common)?
        }
        Command::Family { shape, per_axis, radius, t_steps, refine, summary, common } => {
            let g = LandscapeGrid { per_axis, radius, t_steps };
            family(shape, g, refine, summary, common)?
        }
        Command::Sweep { steps, out } => sweep(steps, out)?,
        Command::Spectrum { shape, count, common } => spectrum(shape, count, common)?,
        Command::Liyau { shape, common } => liyau(shape, common)?,
        Command::Curves { curve, common } => curves(curve, common)?,
        Command::Report { only, out } => return report(only, out),
    }
    Ok(true)
}

#[derive(Serialize)]
struct Failure<'a> {
    command: &'a str,
    error: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            let record = Failure { command: name, error: format!("{e:#}") };
            println!("{}", serde_json::to_string(&record).expect("serializable"));
            ExitCode::FAILURE
        }
    }
}
