//! Coincidence rates: closed-form Gaussian overlaps, a brute-force grid
//! oracle, envelope overlap factors and the closed-form fringe.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrema;
use crate::model::{build_amplitude_terms, envelope_overlap, overlap, AmplitudeTerm, Path};
use crate::setup::{ExperimentSetup, ModelParams};

/// normalization · [Σ|wᵢ|² + 2 Re Σ_{i<j} wᵢ w̄ⱼ ⟨i|j⟩]
pub fn coincidence_rate(terms: &[AmplitudeTerm], model: &ModelParams) -> f64 {
    let mut sum = 0.0;
    for (i, a) in terms.iter().enumerate() {
        sum += a.weight.norm_sqr();
        for b in &terms[i + 1..] {
            sum += 2.0 * (a.weight * b.weight.conj() * overlap(a, b, model)).re;
        }
    }
    model.normalization * sum.max(0.0)
}

/// Rate with every cross term dropped.
pub fn incoherent_rate(terms: &[AmplitudeTerm], model: &ModelParams) -> f64 {
    model.normalization * terms.iter().map(|t| t.weight.norm_sqr()).sum::<f64>()
}

/// Rate of the setup's own term set.
pub fn setup_rate(setup: &ExperimentSetup) -> f64 {
    coincidence_rate(&build_amplitude_terms(setup), &setup.model)
}

/// Squared norm of the pump train as seen through one path, Σ_{m,m'} Re⟨TT_m|TT_m'⟩.
/// Equals N for well separated pulses.
pub fn pump_norm(terms: &[AmplitudeTerm], model: &ModelParams) -> f64 {
    let tt: Vec<&AmplitudeTerm> = terms.iter().filter(|t| t.path == Path::TT).collect();
    let mut sum = 0.0;
    for a in &tt {
        for b in &tt {
            sum += overlap(a, b, model).re;
        }
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_plus_range: (f64, f64),
    pub t_12_range: (f64, f64),
    pub steps_per_axis: usize,
}

/// Minimum margin, in envelope widths, every term center must keep from the grid edge.
pub const MIN_COVERAGE_WIDTHS: f64 = 6.0;
const DEFAULT_COVERAGE_WIDTHS: f64 = 12.0;

impl GridSpec {
    /// Smallest rectangle holding every center ± 12 widths.
    pub fn covering(terms: &[AmplitudeTerm], model: &ModelParams, steps_per_axis: usize) -> Self {
        let span = |f: fn(&AmplitudeTerm) -> f64, sigma: f64| {
            let lo = terms.iter().map(f).fold(f64::INFINITY, f64::min);
            let hi = terms.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
            (lo - DEFAULT_COVERAGE_WIDTHS * sigma, hi + DEFAULT_COVERAGE_WIDTHS * sigma)
        };
        Self {
            t_plus_range: span(|t| t.mu_plus, model.sigma_plus_fs),
            t_12_range: span(|t| t.mu_12, model.sigma_minus_fs),
            steps_per_axis,
        }
    }

    fn check(&self, terms: &[AmplitudeTerm], model: &ModelParams) -> Result<()> {
        if self.steps_per_axis < 64 {
            return Err(Error::GridCoverage(format!(
                "steps_per_axis must be >= 64, got {}",
                self.steps_per_axis
            )));
        }
        let (p0, p1) = self.t_plus_range;
        let (m0, m1) = self.t_12_range;
        let mp = MIN_COVERAGE_WIDTHS * model.sigma_plus_fs;
        let mm = MIN_COVERAGE_WIDTHS * model.sigma_minus_fs;
        for t in terms {
            if t.mu_plus - mp < p0 || t.mu_plus + mp > p1 || t.mu_12 - mm < m0 || t.mu_12 + mm > m1 {
                return Err(Error::GridCoverage(format!(
                    "term (pulse {}, {:?}) centered at t+ = {:.3} fs, t12 = {:.3} fs needs ±{} widths inside t+ ∈ [{:.3}, {:.3}], t12 ∈ [{:.3}, {:.3}]",
                    t.pulse_index, t.path, t.mu_plus, t.mu_12, MIN_COVERAGE_WIDTHS, p0, p1, m0, m1
                )));
            }
        }
        Ok(())
    }
}

fn axis_profile(lo: f64, hi: f64, steps: usize, mu: f64, sigma: f64) -> Vec<f64> {
    let h = (hi - lo) / steps as f64;
    let scale = (2.0 * PI * sigma * sigma).powf(-0.25);
    (0..steps)
        .map(|k| {
            let t = lo + (k as f64 + 0.5) * h;
            let d = t - mu;
            scale * (-d * d / (4.0 * sigma * sigma)).exp()
        })
        .collect()
}

/// Midpoint-rule integral of |Σ terms|² over the grid. The (t₁, t₂) → (t₊, t₁₂)
/// Jacobian is 1.
pub fn grid_rate_oracle(terms: &[AmplitudeTerm], model: &ModelParams, grid: &GridSpec) -> Result<f64> {
    grid.check(terms, model)?;
    let n = grid.steps_per_axis;
    let (p0, p1) = grid.t_plus_range;
    let (m0, m1) = grid.t_12_range;
    let hp = (p1 - p0) / n as f64;
    let hm = (m1 - m0) / n as f64;
    let plus: Vec<Vec<f64>> = terms
        .iter()
        .map(|t| axis_profile(p0, p1, n, t.mu_plus, model.sigma_plus_fs))
        .collect();
    let minus: Vec<Vec<f64>> = terms
        .iter()
        .map(|t| axis_profile(m0, m1, n, t.mu_12, model.sigma_minus_fs))
        .collect();
    let coeffs: Vec<Complex64> = terms.iter().map(AmplitudeTerm::coefficient).collect();

    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let v: Vec<Complex64> = coeffs.iter().zip(&plus).map(|(c, g)| c * g[k]).collect();
            let mut acc = 0.0;
            for l in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for (vi, g) in v.iter().zip(&minus) {
                    s += vi * g[l];
                }
                acc += s.norm_sqr();
            }
            acc
        })
        .collect();
    let total: f64 = rows.iter().sum();
    Ok(model.normalization * total * hp * hm)
}

/// η(T): largest envelope overlap between the TT and RR paths of adjacent pulses.
pub fn eta(setup: &ExperimentSetup) -> Result<f64> {
    if setup.pump.n_pulses < 2 {
        return Err(Error::InvalidArgument(format!(
            "eta needs at least two pulses, got {}",
            setup.pump.n_pulses
        )));
    }
    let terms = build_amplitude_terms(setup);
    let mut best: f64 = 0.0;
    for a in &terms {
        for b in &terms {
            if a.path != b.path && b.pulse_index == a.pulse_index + 1 {
                best = best.max(envelope_overlap(a, b, &setup.model));
            }
        }
    }
    Ok(best)
}

/// Closed-form fringe R(φ) = mean − amplitude · cos(Ω_p φ + const), in units
/// of a single unit-weight wavepacket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedFringe {
    pub mean: f64,
    pub amplitude: f64,
}

impl PredictedFringe {
    pub fn at_phase(&self, phase: f64) -> f64 {
        self.mean - self.amplitude * phase.cos()
    }

    pub fn visibility(&self) -> f64 {
        if self.mean > 0.0 {
            self.amplitude / self.mean
        } else {
            0.0
        }
    }
}

pub fn predicted_fringe(theta1: f64, theta2: f64, eta: f64, n: u32, delta_m: u32) -> PredictedFringe {
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    let n_f = n as f64;
    PredictedFringe {
        mean: n_f * (s1 * s1 * c2 * c2 + c1 * c1 * s2 * s2),
        amplitude: 2.0 * n.saturating_sub(delta_m) as f64 * (s1 * c2 * c1 * s2).abs() * eta,
    }
}

/// Path-resolved sums of Re⟨i|j⟩ with unit weights: (TT·TT, RR·RR, TT·RR).
/// The rate at analyzer angles θ₁, θ₂ is a²·S_TT + b²·S_RR + 2ab·X with
/// a = −sinθ₁cosθ₂, b = cosθ₁sinθ₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSums {
    pub tt: f64,
    pub rr: f64,
    pub cross: f64,
}

impl PathSums {
    pub fn from_terms(terms: &[AmplitudeTerm], model: &ModelParams) -> Self {
        let mut s = PathSums { tt: 0.0, rr: 0.0, cross: 0.0 };
        for a in terms {
            for b in terms {
                let o = overlap(a, b, model).re;
                match (a.path, b.path) {
                    (Path::TT, Path::TT) => s.tt += o,
                    (Path::RR, Path::RR) => s.rr += o,
                    (Path::TT, Path::RR) => s.cross += o,
                    (Path::RR, Path::TT) => {}
                }
            }
        }
        s
    }

    /// R(θ₁) = A + B cos 2θ₁ + C sin 2θ₁ at fixed θ₂.
    fn harmonics(&self, theta2: f64) -> (f64, f64, f64) {
        let (s2, c2) = theta2.sin_cos();
        (
            0.5 * (c2 * c2 * self.tt + s2 * s2 * self.rr),
            0.5 * (s2 * s2 * self.rr - c2 * c2 * self.tt),
            -c2 * s2 * self.cross,
        )
    }

    pub fn rate(&self, theta1: f64, theta2: f64) -> f64 {
        let (a, b, c) = self.harmonics(theta2);
        a + b * (2.0 * theta1).cos() + c * (2.0 * theta1).sin()
    }

    /// Visibility of the θ₁ fringe over the quarter turn [θ₂ − π/4, θ₂ + π/4].
    pub fn quarter_turn_visibility(&self, theta2: f64) -> f64 {
        let (a, b, c) = self.harmonics(theta2);
        let lo = theta2 - FRAC_PI_4;
        let hi = theta2 + FRAC_PI_4;
        let r = |t: f64| a + b * (2.0 * t).cos() + c * (2.0 * t).sin();
        let mut candidates = vec![lo, hi];
        // Stationary points: 2θ = atan2(C, B) + kπ.
        let base = 0.5 * c.atan2(b);
        for k in -4..=4 {
            let t = base + k as f64 * PI / 2.0;
            if t > lo && t < hi {
                candidates.push(t);
            }
        }
        let values: Vec<f64> = candidates.iter().map(|&t| r(t)).collect();
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        extrema::contrast(min, max)
    }

    /// Visibility of the θ₁ fringe over a full analyzer turn.
    pub fn full_turn_visibility(&self, theta2: f64) -> f64 {
        let (a, b, c) = self.harmonics(theta2);
        let h = b.hypot(c);
        extrema::contrast(a - h, a + h)
    }
}

/// Quarter-turn θ₁-fringe visibility of the closed-form fringe at its most
/// destructive pump phase.
pub fn quarter_turn_visibility_closed_form(theta2: f64, eta: f64, n: u32, delta_m: u32) -> f64 {
    let n_f = n as f64;
    let x = n.saturating_sub(delta_m) as f64 * eta;
    [x, -x]
        .iter()
        .map(|&cross| PathSums { tt: n_f, rr: n_f, cross }.quarter_turn_visibility(theta2))
        .fold(0.0, f64::max)
}

fn with_phase_path(setup: &ExperimentSetup, path_nm: f64) -> ExperimentSetup {
    let mut s = *setup;
    s.pump.extra_phase_path_nm = path_nm;
    s
}

/// Space-time fringe visibility: sweep the pump phase knob over two pump
/// periods from the setup's current setting.
pub fn phase_sweep_visibility(setup: &ExperimentSetup) -> f64 {
    let start = setup.pump.extra_phase_path_nm;
    let span = 2.0 * setup.pump.wavelength_nm;
    let (min, max) = extrema::extrema(
        |p| setup_rate(&with_phase_path(setup, p)),
        start,
        start + span,
        129,
    );
    extrema::contrast(min, max)
}

/// Polarization-fringe visibility: the θ₁ fringe over a quarter turn centered
/// on θ₂, at the pump phase maximizing it.
pub fn polarization_visibility(setup: &ExperimentSetup) -> f64 {
    let theta2 = setup.analyzers.theta2;
    let start = setup.pump.extra_phase_path_nm;
    extrema::maximum(
        |p| {
            let s = with_phase_path(setup, p);
            PathSums::from_terms(&build_amplitude_terms(&s), &s.model).quarter_turn_visibility(theta2)
        },
        start,
        start + setup.pump.wavelength_nm,
        65,
    )
}

/// Full-turn counterpart of [`polarization_visibility`].
pub fn polarization_visibility_full_turn(setup: &ExperimentSetup) -> f64 {
    let theta2 = setup.analyzers.theta2;
    let start = setup.pump.extra_phase_path_nm;
    extrema::maximum(
        |p| {
            let s = with_phase_path(setup, p);
            PathSums::from_terms(&build_amplitude_terms(&s), &s.model).full_turn_visibility(theta2)
        },
        start,
        start + setup.pump.wavelength_nm,
        65,
    )
}
