//! Versioned structured-output documents and their human renderings.
//!
//! Field names are a compatibility contract: scripts parse these documents.
//! Every document carries `version` and `command`. Identical inputs and
//! seeds produce identical documents except for `wall_time_s`, which is the
//! one measured (non-deterministic) field.

use serde::Serialize;

use bell3322::chsh::OccupancyRatios;
use bell3322::geometry::{HierarchyRegion, RegionMembership};
use bell3322::montecarlo::{HierarchyBreakdown, VolumeEstimate};
use bell3322::sampler::{MomentEstimate, RunClassification};

pub const REPORT_VERSION: u32 = 1;

/// Exit code encoding of the hierarchy: SL 0, Q\SL 10, NS\Q 20,
/// outside NS 30 (input errors use 2).
pub fn region_exit_code(region: HierarchyRegion) -> u8 {
    match region {
        HierarchyRegion::StronglyLocal => 0,
        HierarchyRegion::QuantumOnly => 10,
        HierarchyRegion::NoSignallingOnly => 20,
        HierarchyRegion::BeyondNoSignalling => 30,
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputEcho {
    Point { point: [f64; 3] },
    Behavior { path: String },
    Events { path: String, records: u64 },
}

#[derive(Serialize)]
pub struct ClassifyReport {
    pub version: u32,
    pub command: &'static str,
    pub input: InputEcho,
    pub tolerance: f64,
    pub membership: RegionMembership,
    pub region: HierarchyRegion,
    pub exit_code: u8,
    /// Present only for event-file inputs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunEcho>,
}

#[derive(Serialize)]
pub struct RunEcho {
    pub point: [f64; 3],
    pub counts: [u64; 3],
    pub stderr: [f64; 3],
    pub facet_z: [f64; 4],
    pub gram_det_z: f64,
    pub alpha: f64,
    pub z_critical: f64,
}

impl RunEcho {
    pub fn from_run(run: &RunClassification) -> Self {
        Self {
            point: run.estimate.point.coords(),
            counts: run.estimate.counts,
            stderr: run.estimate.stderr,
            facet_z: run.facet_z,
            gram_det_z: run.gram_det_z,
            alpha: run.alpha,
            z_critical: run.z_critical,
        }
    }
}

pub fn render_classify_human(r: &ClassifyReport) -> String {
    let m = &r.membership;
    let [x1, x2, x3, x4] = m.barycentric.xi();
    let mut out = String::new();
    match &r.input {
        InputEcho::Point { point } => {
            out += &format!("point ({}, {}, {})\n", point[0], point[1], point[2]);
        }
        InputEcho::Behavior { path } => out += &format!("behavior file {path}\n"),
        InputEcho::Events { path, records } => {
            out += &format!("event file {path} ({records} records)\n");
        }
    }
    out += &format!(
        "region {} (SL {}, Q {}, NS {})\n",
        r.region, m.sl, m.q, m.ns
    );
    out += &format!("facet margins xi = [{x1:.9}, {x2:.9}, {x3:.9}, {x4:.9}]\n");
    out += &format!("det G = {:.9}\n", m.gram_det);
    out += &format!("tolerance {}\n", r.tolerance);
    if let Some(run) = &r.run {
        out += &format!(
            "estimate ({:.6}, {:.6}, {:.6}) +- ({:.6}, {:.6}, {:.6})\n",
            run.point[0], run.point[1], run.point[2], run.stderr[0], run.stderr[1], run.stderr[2]
        );
        out += &format!("class counts {:?}\n", run.counts);
        out += &format!(
            "facet z = [{:.2}, {:.2}, {:.2}, {:.2}], det G z = {:.2} \
             (alpha {}, |z| >= {:.3} is significant)\n",
            run.facet_z[0],
            run.facet_z[1],
            run.facet_z[2],
            run.facet_z[3],
            run.gram_det_z,
            run.alpha,
            run.z_critical
        );
    }
    out += &format!("exit code {}\n", r.exit_code);
    out
}

#[derive(Serialize)]
pub struct VolumeReport {
    pub version: u32,
    pub command: &'static str,
    pub estimate: VolumeEstimate,
    pub reference_fraction: f64,
    pub wall_time_s: f64,
}

pub fn render_volume_human(r: &VolumeReport) -> String {
    let e = &r.estimate;
    format!(
        "region {}\nsamples {} (seed {})\nhits {}\nfraction {:.6} +- {:.6} (reference {:.6})\n\
         absolute volume {:.6}\nwall time {:.3}s\n",
        e.region,
        e.samples,
        e.seed,
        e.hits,
        e.fraction,
        e.stderr,
        r.reference_fraction,
        e.absolute_volume,
        r.wall_time_s
    )
}

#[derive(Serialize)]
pub struct BreakdownReport {
    pub version: u32,
    pub command: &'static str,
    pub breakdown: HierarchyBreakdown,
    /// Reference fractions (SL, Q\SL, NS\Q): 1/3, pi^2/16 - 1/3, 1 - pi^2/16.
    pub reference_fractions: [f64; 3],
    pub wall_time_s: f64,
}

pub fn render_breakdown_human(r: &BreakdownReport) -> String {
    let b = &r.breakdown;
    format!(
        "samples {} (seed {})\nSL     {:.6} +- {:.6} (reference {:.6})\n\
         Q\\SL   {:.6} +- {:.6} (reference {:.6})\n\
         NS\\Q   {:.6} +- {:.6} (reference {:.6})\nwall time {:.3}s\n",
        b.samples,
        b.seed,
        b.sl_fraction,
        b.sl_stderr,
        r.reference_fractions[0],
        b.q_only_fraction,
        b.q_only_stderr,
        r.reference_fractions[1],
        b.ns_only_fraction,
        b.ns_only_stderr,
        r.reference_fractions[2],
        r.wall_time_s,
    )
}

#[derive(Serialize)]
pub struct RealizeReport {
    pub version: u32,
    pub command: &'static str,
    pub point: [f64; 3],
    pub n_lambda: usize,
    pub weights: Vec<f64>,
    pub out: String,
}

pub fn render_realize_human(r: &RealizeReport) -> String {
    format!(
        "realized ({}, {}, {}) as a {}-lambda model\nweights {:?}\nwrote {}\n",
        r.point[0], r.point[1], r.point[2], r.n_lambda, r.weights, r.out
    )
}

#[derive(Serialize)]
pub struct SampleReport {
    pub version: u32,
    pub command: &'static str,
    pub source: String,
    pub events: u64,
    pub seed: u64,
    pub out: String,
    pub wall_time_s: f64,
}

pub fn render_sample_human(r: &SampleReport) -> String {
    format!(
        "sampled {} events from {} (seed {})\nwrote {}\nwall time {:.3}s\n",
        r.events, r.source, r.seed, r.out, r.wall_time_s
    )
}

#[derive(Serialize)]
pub struct EstimateReport {
    pub version: u32,
    pub command: &'static str,
    pub source: String,
    pub records: u64,
    pub point: [f64; 3],
    pub counts: [u64; 3],
    pub stderr: [f64; 3],
}

impl EstimateReport {
    pub fn new(source: String, records: u64, est: &MomentEstimate) -> Self {
        Self {
            version: REPORT_VERSION,
            command: "estimate",
            source,
            records,
            point: est.point.coords(),
            counts: est.counts,
            stderr: est.stderr,
        }
    }
}

pub fn render_estimate_human(r: &EstimateReport) -> String {
    format!(
        "source {}\nrecords {}\nmoment estimate ({:.6}, {:.6}, {:.6})\n\
         stderr ({:.6}, {:.6}, {:.6})\nclass counts {:?}\n",
        r.source,
        r.records,
        r.point[0],
        r.point[1],
        r.point[2],
        r.stderr[0],
        r.stderr[1],
        r.stderr[2],
        r.counts
    )
}

#[derive(Serialize)]
pub struct ScanRow {
    pub theta0: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub det_g: f64,
    pub xi: [f64; 4],
    pub sl_violated: bool,
}

#[derive(Serialize)]
pub struct ScanReport {
    pub version: u32,
    pub command: &'static str,
    pub steps: u32,
    pub rows: Vec<ScanRow>,
}

pub fn render_scan_human(r: &ScanReport) -> String {
    let mut out =
        String::from("theta0\ttheta1\ttheta2\tx\ty\tz\tdet_g\txi1\txi2\txi3\txi4\tsl_violated\n");
    for row in &r.rows {
        out += &format!(
            "{:.9}\t{:.9}\t{:.9}\t{:.9}\t{:.9}\t{:.9}\t{:.3e}\t{:.9}\t{:.9}\t{:.9}\t{:.9}\t{}\n",
            row.theta0,
            row.theta1,
            row.theta2,
            row.x,
            row.y,
            row.z,
            row.det_g,
            row.xi[0],
            row.xi[1],
            row.xi[2],
            row.xi[3],
            row.sl_violated
        );
    }
    out
}

#[derive(Serialize)]
pub struct CompareReport {
    pub version: u32,
    pub command: &'static str,
    pub ratios: OccupancyRatios,
    pub beyond_quantum_pyramid: f64,
    pub beyond_quantum_chsh: f64,
}

pub fn render_compare_human(r: &CompareReport) -> String {
    format!(
        "occupied fractions of the no-signalling set\n\
         {:>24}  pyramid (3 settings)  chsh (2 settings)\n\
         {:>24}  {:>19.5}  {:>17.5}\n\
         {:>24}  {:>19.5}  {:>17.5}\n\
         {:>24}  {:>19.5}  {:>17.5}\n",
        "",
        "strongly local",
        r.ratios.pyramid_sl,
        r.ratios.chsh_sl,
        "quantum",
        r.ratios.pyramid_q,
        r.ratios.chsh_q,
        "beyond quantum",
        r.beyond_quantum_pyramid,
        r.beyond_quantum_chsh,
    )
}
