//! Event-level simulation: finite runs of `(q1, q2, a1, a2)` records from
//! any model, and moment estimation with uncertainties — what an experiment
//! would actually log.
//!
//! Settings are drawn from a policy distribution independent of everything
//! else. Hidden-variable sources then draw λ and the two outcomes
//! independently per site; behavior-backed sources draw the outcome pair
//! from the block directly. Estimation pools each off-diagonal setting pair
//! with its transpose (the moments agree for symmetric sources) and is an
//! associative fold over `(count, sum)` pairs, so chunked and streamed
//! ingestion give the same answer.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::Serialize;

use crate::behavior::Behavior;
use crate::error::{Error, Result};
use crate::geometry::{self, GramMatrix, MomentPoint, RegionMembership};
use crate::models::{LocalHiddenVariableModel, PhotonPairModel};
use crate::rng::{collect_chunks, stream_rng};

/// Events generated per RNG substream.
pub const EVENTS_PER_STREAM: u64 = 1 << 13;

/// Version written into event-file headers; readers reject anything else.
pub const EVENT_FILE_VERSION: u32 = 1;

const EVENT_HEADER_PREFIX: &str = "# bell3322-events v1";

#[cfg(test)]
mod header_version {
    #[test]
    fn prefix_matches_version_constant() {
        assert_eq!(
            super::EVENT_HEADER_PREFIX,
            format!("# bell3322-events v{}", super::EVENT_FILE_VERSION)
        );
    }
}

/// One measurement event.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EventRecord {
    pub q1: u8,
    pub q2: u8,
    pub a1: i8,
    pub a2: i8,
}

impl EventRecord {
    pub fn new(q1: u8, q2: u8, a1: i8, a2: i8) -> Result<Self> {
        if q1 > 2 || q2 > 2 {
            return Err(Error::OutOfRange {
                what: "setting label",
                value: f64::from(q1.max(q2)),
                min: 0.0,
                max: 2.0,
            });
        }
        if !matches!(a1, 1 | -1) || !matches!(a2, 1 | -1) {
            return Err(Error::OutOfRange {
                what: "outcome label",
                value: f64::from(if matches!(a1, 1 | -1) { a2 } else { a1 }),
                min: -1.0,
                max: 1.0,
            });
        }
        Ok(Self { q1, q2, a1, a2 })
    }

    /// The event quantity `a1 · a2`.
    pub fn product(&self) -> i64 {
        i64::from(self.a1) * i64::from(self.a2)
    }

    /// Index of the symmetric off-diagonal class {01, 02, 12} this event
    /// belongs to; `None` for diagonal settings.
    pub fn class(&self) -> Option<usize> {
        match (self.q1.min(self.q2), self.q1.max(self.q2)) {
            (0, 1) => Some(0),
            (0, 2) => Some(1),
            (1, 2) => Some(2),
            _ => None,
        }
    }
}

/// Distribution over the nine ordered setting pairs, row-major `[q1][q2]`.
///
/// The default is uniform over the six off-diagonal pairs; diagonal pairs
/// can be sampled but never enter moment estimation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SettingPolicy {
    weights: [f64; 9],
}

impl SettingPolicy {
    pub fn new(weights: [f64; 9]) -> Result<Self> {
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidPolicy {
                    reason: format!("negative or non-finite weight {w}"),
                });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPolicy {
                reason: format!("weights sum to {sum}, expected 1"),
            });
        }
        let mut weights = weights;
        for w in &mut weights {
            *w /= sum;
        }
        Ok(Self { weights })
    }

    /// Uniform over the six ordered off-diagonal pairs.
    pub fn uniform_off_diagonal() -> Self {
        let mut weights = [1.0 / 6.0; 9];
        for q in 0..3 {
            weights[q * 3 + q] = 0.0;
        }
        Self { weights }
    }

    /// Uniform over all nine ordered pairs.
    pub fn uniform_all() -> Self {
        Self {
            weights: [1.0 / 9.0; 9],
        }
    }

    pub fn weights(&self) -> [f64; 9] {
        self.weights
    }

    fn cumulative(&self) -> [f64; 9] {
        let mut cum = [0.0; 9];
        let mut acc = 0.0;
        for (c, w) in cum.iter_mut().zip(self.weights) {
            acc += w;
            *c = acc;
        }
        cum[8] = f64::INFINITY; // guard against rounding at the top end
        cum
    }
}

impl Default for SettingPolicy {
    fn default() -> Self {
        Self::uniform_off_diagonal()
    }
}

/// What to draw events from.
#[derive(Clone, Copy, Debug)]
pub enum EventSource<'a> {
    Behavior(&'a Behavior),
    Lhv(&'a LocalHiddenVariableModel),
    Photon(&'a PhotonPairModel),
}

impl EventSource<'_> {
    /// Short label for event-file headers.
    pub fn describe(&self) -> String {
        match self {
            EventSource::Behavior(_) => "behavior".to_string(),
            EventSource::Lhv(m) => format!("lhv(n_lambda={})", m.len()),
            EventSource::Photon(p) => {
                let [t0, t1, t2] = p.angles();
                format!("photon({t0},{t1},{t2})")
            }
        }
    }
}

fn draw_pair(cum: &[f64; 9], rng: &mut impl Rng) -> (u8, u8) {
    let u: f64 = rng.random();
    let idx = cum.iter().position(|&c| u < c).unwrap_or(8);
    ((idx / 3) as u8, (idx % 3) as u8)
}

/// Per-block cumulative outcome distributions for behavior-backed sampling.
fn block_cumulatives(b: &Behavior) -> [[[f64; 4]; 3]; 3] {
    let mut cum = [[[0.0; 4]; 3]; 3];
    for q1 in 0..3 {
        for q2 in 0..3 {
            let block = b.block(q1, q2);
            let mut acc = 0.0;
            for k in 0..4 {
                acc += block[k].max(0.0);
                cum[q1][q2][k] = acc;
            }
            cum[q1][q2][3] = f64::INFINITY;
        }
    }
    cum
}

enum Sampler {
    Blocks(Box<[[[f64; 4]; 3]; 3]>),
    Lhv {
        cum_weights: Vec<f64>,
        prob_plus: Vec<[f64; 3]>,
    },
}

impl Sampler {
    fn for_source(source: &EventSource) -> Sampler {
        match source {
            EventSource::Behavior(b) => Sampler::Blocks(Box::new(block_cumulatives(b))),
            EventSource::Photon(p) => Sampler::Blocks(Box::new(block_cumulatives(&p.behavior()))),
            EventSource::Lhv(m) => {
                let mut acc = 0.0;
                let cum_weights = m
                    .weights()
                    .iter()
                    .map(|w| {
                        acc += w;
                        acc
                    })
                    .collect();
                let prob_plus = m
                    .responses()
                    .iter()
                    .map(|r| [r.prob_plus(0), r.prob_plus(1), r.prob_plus(2)])
                    .collect();
                Sampler::Lhv {
                    cum_weights,
                    prob_plus,
                }
            }
        }
    }

    fn draw_outcomes(&self, q1: usize, q2: usize, rng: &mut impl Rng) -> (i8, i8) {
        match self {
            Sampler::Blocks(cum) => {
                let u: f64 = rng.random();
                let k = cum[q1][q2].iter().position(|&c| u < c).unwrap_or(3);
                crate::behavior::OUTCOME_PAIRS[k]
            }
            Sampler::Lhv {
                cum_weights,
                prob_plus,
            } => {
                // Bell factorization: draw lambda, then each site on its own.
                let u: f64 = rng.random();
                let lambda = cum_weights
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(cum_weights.len() - 1);
                let p = &prob_plus[lambda];
                let a1 = if rng.random::<f64>() < p[q1] { 1 } else { -1 };
                let a2 = if rng.random::<f64>() < p[q2] { 1 } else { -1 };
                (a1, a2)
            }
        }
    }
}

fn sample_events_impl(
    source: EventSource,
    policy: &SettingPolicy,
    n: u64,
    seed: u64,
    parallel: bool,
) -> Vec<EventRecord> {
    let sampler = Sampler::for_source(&source);
    let cum_policy = policy.cumulative();
    collect_chunks(n, EVENTS_PER_STREAM, parallel, |stream, count| {
        let mut rng = stream_rng(seed, stream);
        let mut events = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let (q1, q2) = draw_pair(&cum_policy, &mut rng);
            let (a1, a2) = sampler.draw_outcomes(q1 as usize, q2 as usize, &mut rng);
            events.push(EventRecord { q1, q2, a1, a2 });
        }
        events
    })
}

/// Generates `n` events from `source` under the given setting policy.
/// Deterministic in `(source, policy, n, seed)`; the parallel and
/// sequential paths produce the same event list in the same order.
pub fn sample_events(
    source: EventSource,
    policy: &SettingPolicy,
    n: u64,
    seed: u64,
) -> Vec<EventRecord> {
    sample_events_impl(source, policy, n, seed, true)
}

/// Single-threaded variant; bit-identical to [`sample_events`].
pub fn sample_events_sequential(
    source: EventSource,
    policy: &SettingPolicy,
    n: u64,
    seed: u64,
) -> Vec<EventRecord> {
    sample_events_impl(source, policy, n, seed, false)
}

/// Streaming accumulator for moment estimation: per-class event counts and
/// sums of `a1·a2`. Merging accumulators commutes, so any chunking of the
/// event stream yields the same estimate.
#[derive(Clone, Copy, Debug, Default)]
pub struct MomentAccumulator {
    counts: [u64; 3],
    sums: [i64; 3],
}

impl MomentAccumulator {
    pub fn push(&mut self, event: &EventRecord) {
        if let Some(class) = event.class() {
            self.counts[class] += 1;
            self.sums[class] += event.product();
        }
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        for k in 0..3 {
            self.counts[k] += other.counts[k];
            self.sums[k] += other.sums[k];
        }
    }

    pub fn finish(&self) -> Result<MomentEstimate> {
        const CLASS_NAMES: [&str; 3] = ["0,1", "0,2", "1,2"];
        let mut coords = [0.0; 3];
        let mut stderr = [0.0; 3];
        for k in 0..3 {
            if self.counts[k] == 0 {
                return Err(Error::EmptyClass {
                    class: CLASS_NAMES[k],
                });
            }
            let n = self.counts[k] as f64;
            let mean = self.sums[k] as f64 / n;
            coords[k] = mean;
            // Sample mean of a ±1 variable: var = 1 - mean^2.
            stderr[k] = ((1.0 - mean * mean).max(0.0) / n).sqrt();
        }
        Ok(MomentEstimate {
            point: MomentPoint::new(coords[0], coords[1], coords[2])?,
            counts: self.counts,
            stderr,
        })
    }
}

/// Estimated moment point with per-coordinate sampling uncertainty.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MomentEstimate {
    pub point: MomentPoint,
    /// Events per symmetric class {01, 02, 12} (transposes pooled).
    pub counts: [u64; 3],
    /// Standard error `sqrt((1 - m²)/n)` per coordinate.
    pub stderr: [f64; 3],
}

/// Estimates the moment point from a finite run. Transposed setting pairs
/// are pooled; diagonal events are ignored. Errors if any of the three
/// classes has no events, naming the class.
pub fn estimate_moments(events: &[EventRecord]) -> Result<MomentEstimate> {
    let mut acc = MomentAccumulator::default();
    for event in events {
        acc.push(event);
    }
    acc.finish()
}

/// Classification of a finite run: the point-estimate membership plus
/// z-scores (margin over propagated standard error) for each tetrahedron
/// facet and for `det G`. No accept/reject verdict is attached; the
/// threshold `z_critical` corresponding to `alpha` is reported so callers
/// can judge boundary proximity themselves.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RunClassification {
    pub estimate: MomentEstimate,
    pub membership: RegionMembership,
    /// `ξᵢ / stderr(ξᵢ)`; the ξᵢ are linear in the coordinates with
    /// coefficients ±1/4, so all four share one propagated error.
    pub facet_z: [f64; 4],
    /// `det G / stderr(det G)` via the delta method with gradient
    /// `(2yz-2x, 2xz-2y, 2xy-2z)`.
    pub gram_det_z: f64,
    pub alpha: f64,
    pub z_critical: f64,
}

fn safe_z(margin: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        margin / stderr
    } else if margin == 0.0 {
        0.0
    } else {
        margin.signum() * f64::INFINITY
    }
}

/// Classifies the moment estimate of a run at tolerance `tol` and
/// significance level `alpha` (two-sided).
pub fn classify_run(events: &[EventRecord], tol: f64, alpha: f64) -> Result<RunClassification> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha { alpha });
    }
    let estimate = estimate_moments(events)?;
    let membership = geometry::classify(estimate.point, tol)?;

    let [sx, sy, sz] = estimate.stderr;
    let se_norm = (sx * sx + sy * sy + sz * sz).sqrt();
    let se_xi = 0.25 * se_norm;
    let xi = membership.barycentric.xi();
    let facet_z = [
        safe_z(xi[0], se_xi),
        safe_z(xi[1], se_xi),
        safe_z(xi[2], se_xi),
        safe_z(xi[3], se_xi),
    ];

    let [x, y, z] = estimate.point.coords();
    let grad = [
        2.0 * y * z - 2.0 * x,
        2.0 * x * z - 2.0 * y,
        2.0 * x * y - 2.0 * z,
    ];
    let se_det = ((grad[0] * sx).powi(2) + (grad[1] * sy).powi(2) + (grad[2] * sz).powi(2)).sqrt();
    let gram_det_z = safe_z(GramMatrix::from_point(estimate.point).det(), se_det);

    Ok(RunClassification {
        estimate,
        membership,
        facet_z,
        gram_det_z,
        alpha,
        z_critical: standard_normal_quantile(1.0 - alpha / 2.0),
    })
}

/// Inverse standard-normal CDF (Acklam's rational approximation,
/// |relative error| < 1.2e-9 — far below any sampling uncertainty here).
pub fn standard_normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile argument must be in (0, 1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Writes events in the line format `q1 q2 a1 a2` with a header carrying
/// the format version and a free-text source description.
pub fn write_events<W: Write>(
    mut w: W,
    events: &[EventRecord],
    source_description: &str,
) -> Result<()> {
    writeln!(w, "{EVENT_HEADER_PREFIX} source={source_description}")?;
    for e in events {
        writeln!(w, "{} {} {:+} {:+}", e.q1, e.q2, e.a1, e.a2)?;
    }
    Ok(())
}

/// Reads an event file, rejecting unknown headers and out-of-range labels.
/// Returns the events and the header's source description.
pub fn read_events<R: BufRead>(r: R) -> Result<(Vec<EventRecord>, String)> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.ok_or(Error::EventParse {
        line: 1,
        reason: "empty file, expected header".to_string(),
    })?;
    let Some(rest) = header.strip_prefix(EVENT_HEADER_PREFIX) else {
        return Err(Error::EventParse {
            line: 1,
            reason: format!("bad header {header:?}, expected \"{EVENT_HEADER_PREFIX} ...\""),
        });
    };
    let source = rest
        .trim()
        .strip_prefix("source=")
        .unwrap_or("")
        .to_string();

    let mut events = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::EventParse {
                line: line_no,
                reason: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let parse = |s: &str| -> std::result::Result<i64, _> {
            s.parse::<i64>().map_err(|e| (s.to_string(), e))
        };
        let values: Vec<i64> = fields
            .iter()
            .map(|f| parse(f))
            .collect::<std::result::Result<_, _>>()
            .map_err(|(token, e)| Error::EventParse {
                line: line_no,
                reason: format!("cannot parse {token:?}: {e}"),
            })?;
        let in_u8 = |v: i64| u8::try_from(v).ok().filter(|&q| q <= 2);
        let (Some(q1), Some(q2)) = (in_u8(values[0]), in_u8(values[1])) else {
            return Err(Error::EventParse {
                line: line_no,
                reason: format!("setting labels out of range in {line:?}"),
            });
        };
        if !matches!(values[2], 1 | -1) || !matches!(values[3], 1 | -1) {
            return Err(Error::EventParse {
                line: line_no,
                reason: format!("outcome labels out of range in {line:?}"),
            });
        }
        events.push(EventRecord {
            q1,
            q2,
            a1: values[2] as i8,
            a2: values[3] as i8,
        });
    }
    Ok((events, source))
}
