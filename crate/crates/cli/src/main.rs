//! Command-line front end for the bell3322 toolkit: classify points,
//! behaviors, and measurement runs against the strongly-local / quantum /
//! no-signalling hierarchy; realize witness models; estimate region
//! volumes; scan the quantum angle space; and compare against the
//! two-setting CHSH baseline.
//!
//! Exit codes for `classify`: 0 strongly local, 10 quantum only, 20
//! no-signalling only, 30 outside no-signalling, 2 input error. Boundary
//! verdicts resolve to the inner region (closed-set convention). All
//! randomized commands echo their seed; identical inputs and seed give
//! identical structured output (modulo the measured `wall_time_s` field).

mod reports;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bell3322::behavior::{reduce_to_moment_point, validate, Behavior};
use bell3322::chsh::occupancy_ratios;
use bell3322::geometry::{barycentric_of, classify, GramMatrix, MomentPoint, DEFAULT_TOLERANCE};
use bell3322::models::{
    photon_moments, realize_sl_point, LocalHiddenVariableModel, PhotonPairModel,
};
use bell3322::montecarlo::{estimate_volume, hierarchy_breakdown, Region, DEFAULT_SAMPLES};
use bell3322::sampler::{
    classify_run, estimate_moments, read_events, sample_events, write_events, EventSource,
    SettingPolicy,
};

use reports::*;

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(
    name = "bell3322",
    version,
    about = "Geometry and simulation toolkit for the symmetric (3,3,2,2) Bell scenario"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a moment point, a behavior file, or an event file.
    Classify(ClassifyArgs),
    /// Realize a tetrahedron point as a hidden-variable model file.
    Realize(RealizeArgs),
    /// Estimate region volumes by seeded Monte Carlo.
    Volume(VolumeArgs),
    /// Generate an event file from a model, photon angles, or a behavior.
    Sample(SampleArgs),
    /// Estimate the moment point of an event file.
    Estimate(EstimateArgs),
    /// Tabulate photon-pair correlators over an angle grid.
    ScanQuantum(ScanArgs),
    /// Compare pyramid and CHSH occupancy ratios.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Structured,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

impl OutputArgs {
    fn emit<T: serde::Serialize>(&self, doc: &T, human: String) -> CliResult<()> {
        let content = match self.format {
            Format::Human => human,
            Format::Structured => {
                let mut json = serde_json::to_string_pretty(doc)?;
                json.push('\n');
                json
            }
        };
        match &self.out {
            Some(path) => fs::write(path, content)?,
            None => {
                print!("{content}");
                std::io::stdout().flush()?;
            }
        }
        Ok(())
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ClassifyInput {
    /// Moment point (X, Y, Z).
    #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], allow_negative_numbers = true)]
    point: Option<Vec<f64>>,
    /// Behavior document (JSON).
    #[arg(long, value_name = "FILE")]
    behavior: Option<PathBuf>,
    /// Event file.
    #[arg(long, value_name = "FILE")]
    events: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    input: ClassifyInput,
    /// Boundary tolerance.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Significance level for the z-score report on event files.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct RealizeArgs {
    /// Moment point (X, Y, Z); must lie in the closed tetrahedron.
    #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], allow_negative_numbers = true, required = true)]
    point: Vec<f64>,
    /// Model file to write.
    #[arg(long, value_name = "FILE", required = true)]
    model_out: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegionArg {
    Sl,
    Q,
    Ns,
    All,
}

#[derive(Args)]
struct VolumeArgs {
    /// Region to estimate; `all` reports the SL / Q\SL / NS\Q breakdown.
    #[arg(long, value_enum, default_value = "all")]
    region: RegionArg,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SampleSource {
    /// Hidden-variable model document (JSON).
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Photon-pair polarizer angles (radians).
    #[arg(long, num_args = 3, value_names = ["T0", "T1", "T2"], allow_negative_numbers = true)]
    photon: Option<Vec<f64>>,
    /// Behavior document (JSON).
    #[arg(long, value_name = "FILE")]
    behavior: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    source: SampleSource,
    /// Number of events to generate.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also sample diagonal setting pairs (uniform over all nine).
    #[arg(long)]
    include_diagonals: bool,
    /// Event file to write.
    #[arg(long, value_name = "FILE", required = true)]
    events_out: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct EstimateArgs {
    /// Event file.
    #[arg(long, value_name = "FILE", required = true)]
    events: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ScanArgs {
    /// Grid steps per angle; the grid is {k*pi/steps}^3.
    #[arg(long, default_value_t = 8)]
    steps: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Classify(args) => cmd_classify(args),
        Command::Realize(args) => cmd_realize(args),
        Command::Volume(args) => cmd_volume(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::ScanQuantum(args) => cmd_scan_quantum(args),
        Command::Compare(args) => cmd_compare(args),
    }
}

fn parse_point(values: &[f64]) -> CliResult<MomentPoint> {
    Ok(MomentPoint::new(values[0], values[1], values[2])?)
}

fn load_behavior(path: &PathBuf) -> CliResult<Behavior> {
    let text = fs::read_to_string(path)?;
    let behavior = Behavior::from_json(&text)?;
    let report = validate(&behavior, DEFAULT_TOLERANCE);
    if !report.valid {
        return Err(format!(
            "behavior file {} is invalid: max normalization residual {:.3e}, {} negative entries",
            path.display(),
            report.max_residual(),
            report.negative_entries.len()
        )
        .into());
    }
    Ok(behavior)
}

fn cmd_classify(args: ClassifyArgs) -> CliResult<u8> {
    let (input, membership, run) = if let Some(values) = &args.input.point {
        let point = parse_point(values)?;
        (
            InputEcho::Point {
                point: point.coords(),
            },
            classify(point, args.tol)?,
            None,
        )
    } else if let Some(path) = &args.input.behavior {
        let behavior = load_behavior(path)?;
        let point = reduce_to_moment_point(&behavior, args.tol.max(DEFAULT_TOLERANCE))?;
        (
            InputEcho::Behavior {
                path: path.display().to_string(),
            },
            classify(point, args.tol)?,
            None,
        )
    } else {
        let path = args.input.events.as_ref().expect("clap group");
        let file = fs::File::open(path)?;
        let (events, _source) = read_events(std::io::BufReader::new(file))?;
        let run = classify_run(&events, args.tol, args.alpha)?;
        (
            InputEcho::Events {
                path: path.display().to_string(),
                records: events.len() as u64,
            },
            run.membership,
            Some(RunEcho::from_run(&run)),
        )
    };

    let region = membership.region();
    let exit_code = region_exit_code(region);
    let report = ClassifyReport {
        version: REPORT_VERSION,
        command: "classify",
        input,
        tolerance: args.tol,
        membership,
        region,
        exit_code,
        run,
    };
    let human = render_classify_human(&report);
    args.output.emit(&report, human)?;
    Ok(exit_code)
}

fn cmd_realize(args: RealizeArgs) -> CliResult<u8> {
    let point = parse_point(&args.point)?;
    let model = realize_sl_point(point)?;
    fs::write(&args.model_out, model.to_json())?;
    let report = RealizeReport {
        version: REPORT_VERSION,
        command: "realize",
        point: point.coords(),
        n_lambda: model.len(),
        weights: model.weights().to_vec(),
        out: args.model_out.display().to_string(),
    };
    let human = render_realize_human(&report);
    args.output.emit(&report, human)?;
    Ok(0)
}

fn cmd_volume(args: VolumeArgs) -> CliResult<u8> {
    let started = Instant::now();
    match args.region {
        RegionArg::All => {
            let breakdown = hierarchy_breakdown(args.samples, args.seed);
            let q_ref = std::f64::consts::PI.powi(2) / 16.0;
            let report = BreakdownReport {
                version: REPORT_VERSION,
                command: "volume",
                breakdown,
                reference_fractions: [1.0 / 3.0, q_ref - 1.0 / 3.0, 1.0 - q_ref],
                wall_time_s: started.elapsed().as_secs_f64(),
            };
            let human = render_breakdown_human(&report);
            args.output.emit(&report, human)?;
        }
        region => {
            let region = match region {
                RegionArg::Sl => Region::StronglyLocal,
                RegionArg::Q => Region::Quantum,
                RegionArg::Ns => Region::NoSignalling,
                RegionArg::All => unreachable!(),
            };
            let estimate = estimate_volume(region, args.samples, args.seed);
            let report = VolumeReport {
                version: REPORT_VERSION,
                command: "volume",
                estimate,
                reference_fraction: region.reference_fraction(),
                wall_time_s: started.elapsed().as_secs_f64(),
            };
            let human = render_volume_human(&report);
            args.output.emit(&report, human)?;
        }
    }
    Ok(0)
}

fn cmd_sample(args: SampleArgs) -> CliResult<u8> {
    let started = Instant::now();
    let policy = if args.include_diagonals {
        SettingPolicy::uniform_all()
    } else {
        SettingPolicy::uniform_off_diagonal()
    };

    // Owners for whichever source gets loaded.
    let mut loaded_model = None;
    let mut loaded_behavior = None;
    let mut loaded_photon = None;

    let (source, description) = if let Some(path) = &args.source.model {
        let text = fs::read_to_string(path)?;
        let model = loaded_model.insert(LocalHiddenVariableModel::from_json(&text)?);
        (EventSource::Lhv(model), format!("lhv:{}", path.display()))
    } else if let Some(angles) = &args.source.photon {
        let photon = loaded_photon.insert(PhotonPairModel::new(angles[0], angles[1], angles[2])?);
        let description = EventSource::Photon(photon).describe();
        (EventSource::Photon(photon), description)
    } else {
        let path = args.source.behavior.as_ref().expect("clap group");
        let behavior = loaded_behavior.insert(load_behavior(path)?);
        (
            EventSource::Behavior(behavior),
            format!("behavior:{}", path.display()),
        )
    };

    let events = sample_events(source, &policy, args.samples, args.seed);
    let file = fs::File::create(&args.events_out)?;
    write_events(std::io::BufWriter::new(file), &events, &description)?;

    let report = SampleReport {
        version: REPORT_VERSION,
        command: "sample",
        source: description,
        events: args.samples,
        seed: args.seed,
        out: args.events_out.display().to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let human = render_sample_human(&report);
    args.output.emit(&report, human)?;
    Ok(0)
}

fn cmd_estimate(args: EstimateArgs) -> CliResult<u8> {
    let file = fs::File::open(&args.events)?;
    let (events, source) = read_events(std::io::BufReader::new(file))?;
    let estimate = estimate_moments(&events)?;
    let report = EstimateReport::new(source, events.len() as u64, &estimate);
    let human = render_estimate_human(&report);
    args.output.emit(&report, human)?;
    Ok(0)
}

fn cmd_scan_quantum(args: ScanArgs) -> CliResult<u8> {
    if args.steps == 0 {
        return Err("--steps must be at least 1".into());
    }
    let step = std::f64::consts::PI / f64::from(args.steps);
    let angles: Vec<f64> = (0..args.steps).map(|k| f64::from(k) * step).collect();
    let mut rows = Vec::with_capacity(angles.len().pow(3));
    for &t0 in &angles {
        for &t1 in &angles {
            for &t2 in &angles {
                let model = PhotonPairModel::new(t0, t1, t2)?;
                let p = photon_moments(&model);
                let xi = barycentric_of(p).xi();
                rows.push(ScanRow {
                    theta0: t0,
                    theta1: t1,
                    theta2: t2,
                    x: p.x(),
                    y: p.y(),
                    z: p.z(),
                    det_g: GramMatrix::from_point(p).det(),
                    xi,
                    sl_violated: xi.iter().any(|&m| m < 0.0),
                });
            }
        }
    }
    let report = ScanReport {
        version: REPORT_VERSION,
        command: "scan-quantum",
        steps: args.steps,
        rows,
    };
    let human = render_scan_human(&report);
    args.output.emit(&report, human)?;
    Ok(0)
}

fn cmd_compare(args: CompareArgs) -> CliResult<u8> {
    let ratios = occupancy_ratios();
    let report = CompareReport {
        version: REPORT_VERSION,
        command: "compare",
        beyond_quantum_pyramid: ratios.beyond_quantum_pyramid(),
        beyond_quantum_chsh: ratios.beyond_quantum_chsh(),
        ratios,
    };
    let human = render_compare_human(&report);
    args.output.emit(&report, human)?;
    Ok(0)
}
