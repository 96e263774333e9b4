//! Event-level model of the counting apparatus: time-tagged detector clicks
//! drawn from the biphoton joint density, detector jitter and loss, and a
//! start-stop coincidence counter.
//!
//! Per created pair the coincidence channel (one click on each detector) is
//! taken with probability P_c = R / (4 P), where R is the normalized
//! coincidence rate of the term set and P the pump-train norm (N for well
//! separated pulses). The remaining probability is split so that each
//! detector fires with probability 1/2 regardless of analyzer angles and
//! pump phase: D1 only and D2 only with 1/2 − P_c each, neither with P_c.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_amplitude_terms, AmplitudeTerm};
use crate::rate::{coincidence_rate, pump_norm};
use crate::scan::{Curve, ScanParameter, YKind};
use crate::setup::{ExperimentSetup, ModelParams};

/// Largest pair probability per frame accepted as the single-pair regime.
pub const MAX_PAIR_PROBABILITY: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    /// Gaussian RMS timing jitter per click.
    pub jitter_ps: f64,
    pub coincidence_window_ns: f64,
    /// Probability of one pair per repetition frame.
    pub pair_probability: f64,
    /// Per-photon detection efficiency.
    pub efficiency: f64,
}

impl Default for DetectorSpec {
    fn default() -> Self {
        Self {
            jitter_ps: 300.0,
            coincidence_window_ns: 3.0,
            pair_probability: 0.001,
            efficiency: 1.0,
        }
    }
}

impl DetectorSpec {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.jitter_ps.is_finite() && self.jitter_ps >= 0.0) {
            v.push(format!("detectors.jitter must be >= 0 (got {} ps)", self.jitter_ps));
        }
        if !(self.coincidence_window_ns.is_finite() && self.coincidence_window_ns > 0.0) {
            v.push(format!("detectors.coincidence_window must be > 0 (got {} ns)", self.coincidence_window_ns));
        }
        if !(0.0..=MAX_PAIR_PROBABILITY).contains(&self.pair_probability) {
            v.push(format!(
                "detectors.pair_probability must lie in [0, {MAX_PAIR_PROBABILITY}] (got {})",
                self.pair_probability
            ));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            v.push(format!("detectors.efficiency must lie in (0, 1] (got {})", self.efficiency));
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Detector {
    D1,
    D2,
}

impl Detector {
    pub fn as_str(&self) -> &'static str {
        match self {
            Detector::D1 => "D1",
            Detector::D2 => "D2",
        }
    }
}

/// One detector click. Timestamps are absolute lab time in integer femtoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventRecord {
    pub detector: Detector,
    pub timestamp_fs: i64,
    pub frame_index: u64,
}

impl EventRecord {
    pub fn timestamp_ps(&self) -> f64 {
        self.timestamp_fs as f64 / 1e3
    }
}

/// Rejection sampler for p(t₊, t₁₂) ∝ |Σ wᵢ Gᵢ e^{iφᵢ}|².
///
/// Proposal: the incoherent mixture Σ|wᵢ|²|Gᵢ|², bound M = number of terms with
/// nonzero weight (Cauchy–Schwarz).
#[derive(Debug, Clone)]
pub struct PairSampler {
    coeffs: Vec<Complex64>,
    centers: Vec<(f64, f64)>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    bound: f64,
    sigma_plus: f64,
    sigma_minus: f64,
    tau: f64,
}

impl PairSampler {
    pub fn new(terms: &[AmplitudeTerm], model: &ModelParams, tau_fs: f64) -> Result<Self> {
        let live: Vec<&AmplitudeTerm> = terms.iter().filter(|t| t.weight.norm_sqr() > 0.0).collect();
        if live.is_empty() {
            return Err(Error::ZeroWeight);
        }
        let probs: Vec<f64> = live.iter().map(|t| t.weight.norm_sqr()).collect();
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            coeffs: live.iter().map(|t| t.coefficient()).collect(),
            centers: live.iter().map(|t| (t.mu_plus, t.mu_12)).collect(),
            probs,
            cumulative,
            bound: live.len() as f64,
            sigma_plus: model.sigma_plus_fs,
            sigma_minus: model.sigma_minus_fs,
            tau: tau_fs,
        })
    }

    fn envelope(&self, i: usize, tp: f64, t12: f64) -> f64 {
        let (mp, m12) = self.centers[i];
        let dp = tp - mp;
        let dm = t12 - m12;
        (-dp * dp / (4.0 * self.sigma_plus * self.sigma_plus) - dm * dm / (4.0 * self.sigma_minus * self.sigma_minus)).exp()
    }

    /// Unnormalized target and proposal densities at (t₊, t₁₂).
    pub fn densities(&self, tp: f64, t12: f64) -> (f64, f64) {
        let mut amp = Complex64::new(0.0, 0.0);
        let mut proposal = 0.0;
        for i in 0..self.coeffs.len() {
            let g = self.envelope(i, tp, t12);
            amp += self.coeffs[i] * g;
            proposal += self.probs[i] * g * g;
        }
        (amp.norm_sqr(), proposal)
    }

    /// One accepted (t₊, t₁₂) sample and the number of proposals it took.
    pub fn sample_coordinates<R: Rng + ?Sized>(&self, rng: &mut R) -> ((f64, f64), u32) {
        let total = *self.cumulative.last().expect("nonempty");
        let mut attempts = 0;
        loop {
            attempts += 1;
            let u: f64 = rng.random::<f64>() * total;
            let i = self.cumulative.partition_point(|&c| c <= u).min(self.coeffs.len() - 1);
            let (mp, m12) = self.centers[i];
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let tp = mp + self.sigma_plus * z1;
            let t12 = m12 + self.sigma_minus * z2;
            let (target, proposal) = self.densities(tp, t12);
            let v: f64 = rng.random();
            if v * self.bound * proposal <= target {
                return ((tp, t12), attempts);
            }
        }
    }

    /// Detection times (t₁, t₂) in fs relative to the first pulse of the frame.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let ((tp, t12), _) = self.sample_coordinates(rng);
        self.to_detection_times(tp, t12)
    }

    pub fn to_detection_times(&self, tp: f64, t12: f64) -> (f64, f64) {
        let half = 0.5 * (t12 - self.tau);
        (tp + self.tau + half, tp + self.tau - half)
    }
}

/// One draw of detection times from the joint density of `terms`.
pub fn sample_pair_times<R: Rng + ?Sized>(
    terms: &[AmplitudeTerm],
    model: &ModelParams,
    tau_fs: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    Ok(PairSampler::new(terms, model, tau_fs)?.sample(rng))
}

/// Probability that a created pair yields one click on each detector
/// (before detector efficiency).
pub fn coincidence_probability_per_pair(setup: &ExperimentSetup) -> f64 {
    let terms = build_amplitude_terms(setup);
    let r = coincidence_rate(&terms, &setup.model) / setup.model.normalization;
    let p = pump_norm(&terms, &setup.model);
    if p > 0.0 {
        (r / (4.0 * p)).clamp(0.0, 0.5)
    } else {
        0.0
    }
}

pub fn expected_coincidences_per_frame(setup: &ExperimentSetup) -> f64 {
    let d = &setup.detectors;
    d.pair_probability * d.efficiency * d.efficiency * coincidence_probability_per_pair(setup)
}

/// Singles per frame on either detector; independent of angles and pump phase.
pub fn expected_singles_per_frame(setup: &ExperimentSetup) -> f64 {
    setup.detectors.pair_probability * setup.detectors.efficiency * 0.5
}

const FRAMES_PER_CHUNK: u64 = 4096;

/// Seeded event stream for `n_frames` repetition frames, sorted by timestamp.
/// Frames are cut into fixed blocks of 4096; block c draws sequentially from
/// stream c of a ChaCha8 generator keyed by `seed`, so the output does not
/// depend on how blocks are scheduled across threads.
pub fn generate_events(setup: &ExperimentSetup, n_frames: u64, seed: u64) -> Result<Vec<EventRecord>> {
    setup.validate()?;
    let terms = build_amplitude_terms(setup);
    let sampler = match PairSampler::new(&terms, &setup.model, setup.delays.tau_fs) {
        Ok(s) => s,
        Err(Error::ZeroWeight) => {
            // No coincidence amplitude; singles still need a timing model.
            let unit: Vec<AmplitudeTerm> = terms
                .iter()
                .map(|t| AmplitudeTerm { weight: Complex64::new(1.0, 0.0), ..*t })
                .collect();
            PairSampler::new(&unit, &setup.model, setup.delays.tau_fs)?
        }
        Err(e) => return Err(e),
    };
    let p_coinc = coincidence_probability_per_pair(setup);
    let det = setup.detectors;
    let rep = setup.pump.rep_period_fs;
    let jitter_fs = det.jitter_ps * 1e3;
    let base = ChaCha8Rng::seed_from_u64(seed);

    let frame_events = |k: u64, rng: &mut ChaCha8Rng, out: &mut Vec<EventRecord>| {
        let created: f64 = rng.random();
        if created >= det.pair_probability {
            return;
        }
        let route: f64 = rng.random();
        let (d1, d2) = if route < p_coinc {
            (true, true)
        } else if route < 0.5 {
            (true, false)
        } else if route < 1.0 - p_coinc {
            (false, true)
        } else {
            (false, false)
        };
        let (t1, t2) = sampler.sample(rng);
        let origin = k as f64 * rep;
        for (fires, t, detector) in [(d1, t1, Detector::D1), (d2, t2, Detector::D2)] {
            let z: f64 = rng.sample(StandardNormal);
            let kept = rng.random::<f64>() < det.efficiency;
            if fires && kept {
                out.push(EventRecord {
                    detector,
                    timestamp_fs: (origin + t + jitter_fs * z).round() as i64,
                    frame_index: k,
                });
            }
        }
    };

    let n_chunks = n_frames.div_ceil(FRAMES_PER_CHUNK);
    let chunks: Vec<Vec<EventRecord>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = base.clone();
            rng.set_stream(c);
            let mut out = Vec::new();
            let end = ((c + 1) * FRAMES_PER_CHUNK).min(n_frames);
            for k in c * FRAMES_PER_CHUNK..end {
                frame_events(k, &mut rng, &mut out);
            }
            out
        })
        .collect();
    let mut events: Vec<EventRecord> = chunks.into_iter().flatten().collect();
    sort_events(&mut events);
    Ok(events)
}

/// Order by timestamp, ties broken by detector then frame.
pub fn sort_events(events: &mut [EventRecord]) {
    events.sort_by_key(|e| (e.timestamp_fs, e.detector, e.frame_index));
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceSummary {
    pub n_frames: u64,
    pub singles_d1: u64,
    pub singles_d2: u64,
    pub coincidences: u64,
    /// (bin center of t_D2 − t_D1 in ps, count)
    #[serde(rename = "histogram")]
    pub dt_histogram: Vec<(f64, u64)>,
}

/// Start-stop coincidence counter: each click pairs with the earliest
/// still-unmatched click of the other detector within the window; every
/// click is used at most once.
pub fn count_coincidences(
    events: &[EventRecord],
    n_frames: u64,
    window_ns: f64,
    histogram_bins: usize,
) -> Result<CoincidenceSummary> {
    if !(window_ns > 0.0) || !window_ns.is_finite() {
        return Err(Error::InvalidArgument(format!("coincidence window must be > 0, got {window_ns} ns")));
    }
    if histogram_bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    if let Some(i) = events.windows(2).position(|w| w[1].timestamp_fs < w[0].timestamp_fs) {
        return Err(Error::UnsortedStream(i + 1));
    }
    let window_fs = (window_ns * 1e6).round() as i64;
    let bin_width = 2.0 * window_fs as f64 / histogram_bins as f64;
    let mut counts = vec![0u64; histogram_bins];
    let mut pending: [VecDeque<i64>; 2] = [VecDeque::new(), VecDeque::new()];
    let (mut singles_d1, mut singles_d2, mut coincidences) = (0u64, 0u64, 0u64);

    for e in events {
        let (own, other) = match e.detector {
            Detector::D1 => {
                singles_d1 += 1;
                (0, 1)
            }
            Detector::D2 => {
                singles_d2 += 1;
                (1, 0)
            }
        };
        let t = e.timestamp_fs;
        for q in pending.iter_mut() {
            while q.front().is_some_and(|&s| t - s > window_fs) {
                q.pop_front();
            }
        }
        if let Some(partner) = pending[other].pop_front() {
            coincidences += 1;
            let dt = if e.detector == Detector::D2 { t - partner } else { partner - t };
            let bin = (((dt + window_fs) as f64) / bin_width).floor() as usize;
            counts[bin.min(histogram_bins - 1)] += 1;
        } else {
            pending[own].push_back(t);
        }
    }

    let dt_histogram = counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| ((-(window_fs as f64) + (i as f64 + 0.5) * bin_width) / 1e3, c))
        .collect();
    Ok(CoincidenceSummary { n_frames, singles_d1, singles_d2, coincidences, dt_histogram })
}

/// Singles per frame on (D1, D2).
pub fn singles_rates(summary: &CoincidenceSummary) -> Result<(f64, f64)> {
    if summary.n_frames == 0 {
        return Err(Error::InvalidArgument("summary covers zero frames".into()));
    }
    let n = summary.n_frames as f64;
    Ok((summary.singles_d1 as f64 / n, summary.singles_d2 as f64 / n))
}

fn format_ps(fs: i64) -> String {
    let sign = if fs < 0 { "-" } else { "" };
    let a = fs.unsigned_abs();
    format!("{sign}{}.{:03}", a / 1000, a % 1000)
}

/// `frame,detector,timestamp_ps` with a header line.
pub fn write_events_csv(events: &[EventRecord]) -> String {
    let mut out = String::from("frame,detector,timestamp_ps\n");
    for e in events {
        let _ = writeln!(out, "{},{},{}", e.frame_index, e.detector.as_str(), format_ps(e.timestamp_fs));
    }
    out
}

pub fn read_events_csv(text: &str) -> Result<Vec<EventRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some("frame,detector,timestamp_ps") {
        return Err(Error::InvalidArgument("event file lacks `frame,detector,timestamp_ps` header".into()));
    }
    let bad = |n: usize| Error::InvalidArgument(format!("malformed event row {n}"));
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let mut f = line.split(',');
            let frame = f.next().and_then(|s| s.parse::<u64>().ok()).ok_or_else(|| bad(i + 2))?;
            let detector = match f.next() {
                Some("D1") => Detector::D1,
                Some("D2") => Detector::D2,
                _ => return Err(bad(i + 2)),
            };
            let ts = f.next().ok_or_else(|| bad(i + 2))?;
            let (neg, digits) = ts.strip_prefix('-').map_or((false, ts), |d| (true, d));
            let (whole, frac) = digits.split_once('.').ok_or_else(|| bad(i + 2))?;
            if frac.len() != 3 || f.next().is_some() {
                return Err(bad(i + 2));
            }
            let w: i64 = whole.parse().map_err(|_| bad(i + 2))?;
            let fr: i64 = frac.parse().map_err(|_| bad(i + 2))?;
            let v = w * 1000 + fr;
            Ok(EventRecord { detector, timestamp_fs: if neg { -v } else { v }, frame_index: frame })
        })
        .collect()
}

pub fn summary_json(summary: &CoincidenceSummary) -> String {
    serde_json::to_string_pretty(summary).expect("summary serializes")
}

/// Monte Carlo coincidence counts at each value of `parameter`.
pub fn coincidence_counts_curve(
    setup: &ExperimentSetup,
    parameter: ScanParameter,
    xs: &[f64],
    n_frames: u64,
    seed: u64,
) -> Result<Curve> {
    let mut points = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        let mut s = *setup;
        parameter.apply(&mut s, x);
        let point_seed = seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let events = generate_events(&s, n_frames, point_seed)?;
        let summary = count_coincidences(&events, n_frames, s.detectors.coincidence_window_ns, 1)?;
        points.push((x, summary.coincidences as f64));
    }
    Ok(Curve { parameter: parameter.name().to_string(), y_kind: YKind::Counts, points })
}
