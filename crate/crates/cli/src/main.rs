use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sphcoords::cohomology::{compute_barcode, select_bar, BarSelection, DEFAULT_PRIME};
use sphcoords::complex::DistanceMatrix;
use sphcoords::energy::{EnergyConfig, EnergyKind};
use sphcoords::geometry::SpherePoint;
use sphcoords::io;
use sphcoords::mapping::{extract_spherical, CoordinateTable, SphericalMapState};
use sphcoords::optimizer::{OptimizerConfig, RunReport};
use sphcoords::pipeline::{
    build_complex, run_from_bar, CircleMethod, MapState, PipelineConfig, Rest,
};
use sphcoords::postprocess::{evaluate_recovery, prune_and_rerun, DEFAULT_PRUNE_THRESHOLD};
use sphcoords::synth::{self, rng_from_seed, Dataset, SensorParams, SphereSampling, TwoSpheres};
use sphcoords::{Error, ErrorCategory};

/// Sphere- and circle-valued coordinates from persistent cohomology.
#[derive(Parser)]
#[command(name = "sphcoords", version)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "SPHCOORDS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Barcode and cocycle representatives of a point cloud.
    Barcode(BarcodeArgs),
    /// Full pipeline: barcode, bar, cocycle, lift, minimization, coordinates.
    Map(MapArgs),
    /// Drop small triangles from a spherical state and minimize again.
    Prune(PruneArgs),
    /// Write a synthetic data set with ground truth.
    Synth(SynthArgs),
    /// Compare coordinates with ground truth after the best alignment.
    Eval(EvalArgs),
}

#[derive(Args)]
struct InputArgs {
    /// CSV of points, one per row, or a distance matrix with --distance.
    #[arg(long, short)]
    input: PathBuf,
    /// Read the input as a square distance matrix.
    #[arg(long)]
    distance: bool,
    /// 1 for circle-valued, 2 for sphere-valued coordinates.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    prime: u32,
    /// Largest edge length in the complex (default: enclosing radius).
    #[arg(long, conflicts_with = "scale_quantile")]
    max_scale: Option<f64>,
    /// Largest edge length as a quantile of the pairwise distances.
    #[arg(long)]
    scale_quantile: Option<f64>,
}

#[derive(Args)]
struct BarcodeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, short, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnergyArg {
    Harmonic,
    Spring,
}

#[derive(Args)]
struct EnergyArgs {
    #[arg(long, value_enum, default_value = "harmonic")]
    energy: EnergyArg,
    /// Spring constant.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Rest area or rest length: a number or `auto` for an equal share.
    #[arg(long, default_value = "0")]
    rest: String,
}

#[derive(Args)]
struct OptimizerArgs {
    #[arg(long, default_value_t = OptimizerConfig::default().delta_g)]
    delta_g: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().delta_m)]
    delta_m: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().warmup)]
    warmup: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().max_iters)]
    max_iters: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().tol_energy)]
    tol_energy: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().tol_center)]
    tol_center: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().max_step)]
    max_step: f64,
    /// Write outputs and exit 0 even when the run does not converge.
    #[arg(long)]
    allow_unconverged: bool,
}

impl OptimizerArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            delta_g: self.delta_g,
            delta_m: self.delta_m,
            warmup: self.warmup,
            max_iters: self.max_iters,
            tol_energy: self.tol_energy,
            tol_center: self.tol_center,
            max_step: self.max_step,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CircleMethodArg {
    Explicit,
    Descent,
}

#[derive(Args)]
struct MapArgs {
    #[command(flatten)]
    input: InputArgs,
    /// longest, shortest, index:K or BIRTH,DEATH
    #[arg(long, default_value = "longest")]
    bar: String,
    /// Scale of the cocycle (default: middle of the bar).
    #[arg(long)]
    epsilon: Option<f64>,
    #[command(flatten)]
    energy: EnergyArgs,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[arg(long, value_enum, default_value = "explicit")]
    circle_method: CircleMethodArg,
    /// Basepoint of the initial spherical map as x,y,z.
    #[arg(long, default_value = "1,0,0")]
    basepoint: String,
    #[arg(long, short, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PruneArgs {
    /// state.json written by `map --dim 2`.
    #[arg(long)]
    state: PathBuf,
    #[arg(long, default_value_t = DEFAULT_PRUNE_THRESHOLD)]
    threshold: f64,
    #[command(flatten)]
    energy: EnergyArgs,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[arg(long, short, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Circle,
    Trefoil,
    Ellipse,
    Sphere,
    Ellipsoid,
    TwoSpheres,
    Wedge,
    TwoCircles,
    Sensors,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(value_enum)]
    generator: Generator,
    /// Number of points (per sphere for two-spheres and wedge, on the large
    /// circle for two-circles, sensors for sensors).
    #[arg(long, short, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ellipse semi-axes; ellipsoid uses a, b and c.
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Ambient dimension of the isometric embedding.
    #[arg(long)]
    ambient: Option<usize>,
    /// Use uniform random points on the sphere instead of a Fibonacci lattice.
    #[arg(long)]
    uniform: bool,
    #[arg(long, default_value_t = 15)]
    n_small: usize,
    #[arg(long, default_value_t = 0.3)]
    radius: f64,
    #[arg(long, default_value_t = 25)]
    walks: usize,
    #[arg(long, default_value_t = 25)]
    walk_len: usize,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[arg(long, short, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Kind {
    Sphere,
    Circle,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    coords: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Write the metrics here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the aligned coordinates.
    #[arg(long)]
    aligned: Option<PathBuf>,
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| {
        format!("cannot open {}", path.display())
    })?))
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| {
        format!("cannot create {}", path.display())
    })?))
}

fn read_input(a: &InputArgs) -> anyhow::Result<DistanceMatrix> {
    let ctx = || format!("reading {}", a.input.display());
    let d = if a.distance {
        io::read_distance_matrix(open(&a.input)?).with_context(ctx)?
    } else {
        io::read_point_cloud(open(&a.input)?)
            .with_context(ctx)?
            .distance_matrix()
    };
    Ok(d)
}

fn max_scale(a: &InputArgs, d: &DistanceMatrix) -> anyhow::Result<Option<f64>> {
    Ok(match a.scale_quantile {
        Some(q) => Some(d.quantile(q)?),
        None => a.max_scale,
    })
}

fn parse_rest(s: &str) -> anyhow::Result<Rest> {
    if s == "auto" {
        return Ok(Rest::Auto);
    }
    s.parse()
        .map(Rest::Value)
        .map_err(|_| Error::InvalidInput(format!("bad rest value {s:?}")).into())
}

fn parse_basepoint(s: &str) -> anyhow::Result<SpherePoint> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::InvalidInput(format!("bad basepoint {s:?}")))?;
    if v.len() != 3 {
        return Err(
            Error::InvalidInput(format!("basepoint needs 3 coordinates, got {}", v.len())).into(),
        );
    }
    Ok(SpherePoint::new(v[0], v[1], v[2])?)
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> anyhow::Result<()> {
    fs::write(dir.join(name), serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("cannot write {}", dir.join(name).display()))
}

fn report_json(r: &RunReport, extra: serde_json::Value) -> serde_json::Value {
    let mut v = json!({
        "iterations": r.iterations,
        "converged": r.converged,
        "final_energy": r.final_energy,
        "final_center_norm": r.final_center_norm,
        "max_displacement": r.max_displacement,
        "max_barycenter_displacement": r.max_barycenter_displacement,
        "halvings": r.halvings,
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

fn barcode(a: &BarcodeArgs) -> anyhow::Result<()> {
    let d = read_input(&a.input)?;
    let c = build_complex(&d, a.input.dim, max_scale(&a.input, &d)?)?;
    let b = compute_barcode(&c, a.input.dim, a.input.prime)?;
    fs::create_dir_all(&a.out_dir)?;
    io::write_barcode(&b, create(&a.out_dir, "barcode.csv")?)?;
    fs::write(
        a.out_dir.join("representatives.json"),
        io::representatives_json(&b)? + "\n",
    )?;
    eprintln!("{} bars in dimension {}", b.bars.len(), a.input.dim);
    Ok(())
}

fn map(a: &MapArgs) -> anyhow::Result<bool> {
    let d = read_input(&a.input)?;
    let cfg = PipelineConfig {
        dim: a.input.dim,
        prime: a.input.prime,
        max_scale: max_scale(&a.input, &d)?,
        selection: a.bar.parse::<BarSelection>()?,
        epsilon: a.epsilon,
        energy: match a.energy.energy {
            EnergyArg::Harmonic => EnergyKind::Harmonic,
            EnergyArg::Spring => EnergyKind::Spring,
        },
        k: a.energy.k,
        rest: parse_rest(&a.energy.rest)?,
        optimizer: a.optimizer.config(),
        basepoint: parse_basepoint(&a.basepoint)?,
        circle_method: match a.circle_method {
            CircleMethodArg::Explicit => CircleMethod::Explicit,
            CircleMethodArg::Descent => CircleMethod::Descent,
        },
    };
    if !(1..=2).contains(&cfg.dim) {
        bail!(Error::InvalidInput(format!(
            "dimension must be 1 or 2, got {}",
            cfg.dim
        )));
    }
    let complex = build_complex(&d, cfg.dim, cfg.max_scale)?;
    let b = compute_barcode(&complex, cfg.dim, cfg.prime)?;
    let bar = select_bar(&b, cfg.selection)?.clone();
    let out = run_from_bar(&complex, b, bar, &cfg)?;

    fs::create_dir_all(&a.out_dir)?;
    io::write_barcode(&out.barcode, create(&a.out_dir, "barcode.csv")?)?;
    fs::write(
        a.out_dir.join("cocycle.json"),
        io::cochain_json(&out.cocycle)? + "\n",
    )?;
    io::write_coordinates(&out.coordinates, create(&a.out_dir, "coordinates.csv")?)?;
    io::write_energy_trace(&out.report, create(&a.out_dir, "energy.csv")?)?;
    if let MapState::Spherical(m) = &out.state {
        fs::write(a.out_dir.join("state.json"), m.to_json()?)?;
    }
    let extra = json!({
        "dim": cfg.dim,
        "prime": cfg.prime,
        "max_scale": complex.max_value(),
        "bar": { "birth": out.bar.birth, "death": out.bar.death.is_finite().then_some(out.bar.death) },
        "epsilon": out.epsilon,
        "energy": out.energy,
        "optimizer": cfg.optimizer,
    });
    write_json(&a.out_dir, "report.json", &report_json(&out.report, extra))?;
    eprintln!(
        "{} vertices, energy {}, {} after {} iterations",
        out.coordinates.len(),
        io::g12(out.report.final_energy),
        if out.report.converged {
            "converged"
        } else {
            "not converged"
        },
        out.report.iterations
    );
    Ok(out.report.converged || a.optimizer.allow_unconverged)
}

fn energy_for(
    a: &EnergyArgs,
    m: &SphericalMapState,
    threshold: f64,
) -> anyhow::Result<EnergyConfig> {
    Ok(match a.energy {
        EnergyArg::Harmonic => EnergyConfig::harmonic(),
        EnergyArg::Spring => {
            let rest = match parse_rest(&a.rest)? {
                Rest::Value(r) => r,
                Rest::Auto => {
                    let kept = m.areas().iter().filter(|&&x| x >= threshold).count().max(1);
                    sphcoords::geometry::FOUR_PI / kept as f64
                }
            };
            EnergyConfig::spring(a.k, rest)
        }
    })
}

fn prune(a: &PruneArgs) -> anyhow::Result<bool> {
    let text = fs::read_to_string(&a.state)
        .with_context(|| format!("cannot read {}", a.state.display()))?;
    let m = SphericalMapState::from_json(&text)?;
    let e = energy_for(&a.energy, &m, a.threshold)?;
    let before = m.faces().len();
    let (p, report) = prune_and_rerun(&m, &e, &a.optimizer.config(), a.threshold)?;
    fs::create_dir_all(&a.out_dir)?;
    io::write_coordinates(
        &extract_spherical(&p),
        create(&a.out_dir, "coordinates.csv")?,
    )?;
    io::write_energy_trace(&report, create(&a.out_dir, "energy.csv")?)?;
    fs::write(a.out_dir.join("state.json"), p.to_json()?)?;
    let extra = json!({
        "threshold": a.threshold,
        "faces_before": before,
        "faces_after": p.faces().len(),
        "energy": e,
    });
    write_json(&a.out_dir, "report.json", &report_json(&report, extra))?;
    eprintln!("kept {} of {} triangles", p.faces().len(), before);
    Ok(report.converged || a.optimizer.allow_unconverged)
}

fn synth(a: &SynthArgs) -> anyhow::Result<()> {
    let mut rng = rng_from_seed(a.seed);
    let sampling = if a.uniform {
        SphereSampling::Uniform
    } else {
        SphereSampling::Fibonacci
    };
    let data: Dataset = match a.generator {
        Generator::Circle => synth::gen_circle(a.n, a.sigma, &mut rng)?,
        Generator::Trefoil => synth::gen_trefoil(a.n)?,
        Generator::Ellipse => {
            synth::gen_curvature_ellipse(a.n, a.a, a.b, a.ambient.unwrap_or(2), a.sigma, &mut rng)?
        }
        Generator::Sphere => synth::gen_sphere(a.n, a.sigma, sampling, a.ambient, &mut rng)?,
        Generator::Ellipsoid => synth::gen_ellipsoid(a.n, [a.a, a.b, a.c], &mut rng)?,
        Generator::TwoSpheres => synth::gen_two_spheres(a.n, TwoSpheres::Disjoint, &mut rng)?,
        Generator::Wedge => synth::gen_two_spheres(a.n, TwoSpheres::Wedge, &mut rng)?,
        Generator::TwoCircles => {
            synth::gen_two_circles(a.n, a.n_small, a.radius, a.sigma, &mut rng)?
        }
        Generator::Sensors => {
            let p = SensorParams {
                n_sensors: a.n,
                n_walks: a.walks,
                walk_len: a.walk_len,
                step: a.step,
                sigma: a.sigma,
            };
            synth::gen_sensor_walk(&p, &mut rng)?.sensor_dataset()?
        }
    };
    fs::create_dir_all(&a.out_dir)?;
    io::write_point_cloud(&data.points, create(&a.out_dir, "points.csv")?)?;
    io::write_truth(&data.truth, create(&a.out_dir, "truth.csv")?)?;
    if let Some(labels) = &data.labels {
        io::write_labels(labels, create(&a.out_dir, "labels.csv")?)?;
    }
    eprintln!(
        "{} points in dimension {}",
        data.points.len(),
        data.points.dim()
    );
    Ok(())
}

fn eval(a: &EvalArgs) -> anyhow::Result<()> {
    let found = io::read_coordinates(open(&a.coords)?)
        .with_context(|| format!("reading {}", a.coords.display()))?;
    let truth = io::read_coordinates(open(&a.truth)?)
        .with_context(|| format!("reading {}", a.truth.display()))?;
    if let Some(kind) = a.kind {
        let is_sphere = matches!(found, CoordinateTable::Spherical(_));
        if is_sphere != (kind == Kind::Sphere) {
            bail!(Error::InvalidInput(
                "coordinate table does not match --kind".into()
            ));
        }
    }
    let (metrics, aligned) = evaluate_recovery(&found, &truth)?;
    let text = serde_json::to_string_pretty(&metrics)? + "\n";
    match &a.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    if let Some(path) = &a.aligned {
        io::write_coordinates(&aligned, BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e.category() {
                ErrorCategory::Usage | ErrorCategory::Io => 2,
                ErrorCategory::Topology => 3,
                ErrorCategory::Numerical => 4,
            };
        }
    }
    2
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match &cli.command {
        Command::Barcode(a) => barcode(a).map(|_| true),
        Command::Map(a) => map(a),
        Command::Prune(a) => prune(a),
        Command::Synth(a) => synth(a).map(|_| true),
        Command::Eval(a) => eval(a).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: the minimization did not converge (outputs were written; pass --allow-unconverged to accept them)");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
