//! Feynman-path amplitude terms for an N-pulse pump and the two
//! coincidence-producing beamsplitter paths.
//!
//! Coordinates: t₊ = (t₁ + t₂ − 2τ)/2 and t₁₂ = t₁ − t₂ + τ. Every term carries
//! the unit-norm envelope
//!
//! G(t₊, t₁₂) = (2π σ₊ σ₋)^(−1/2) · exp(−(t₊−μ₊)²/(4σ₊²)) · exp(−(t₁₂−μ₁₂)²/(4σ₋²))
//!
//! times a complex weight and a carrier phase.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate::{predicted_fringe, quarter_turn_visibility_closed_form};
use crate::setup::{ExperimentSetup, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Path {
    /// Signal and idler both transmitted at the beamsplitter.
    TT,
    /// Both reflected.
    RR,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTerm {
    pub weight: Complex64,
    pub mu_plus: f64,
    pub mu_12: f64,
    pub phase: f64,
    pub pulse_index: u32,
    pub path: Path,
}

impl AmplitudeTerm {
    /// Complex coefficient w·e^{iφ} multiplying the real envelope.
    pub fn coefficient(&self) -> Complex64 {
        self.weight * Complex64::from_polar(1.0, self.phase)
    }
}

/// Two TT/RR terms per pump pulse, ordered by (pulse, path).
pub fn build_amplitude_terms(setup: &ExperimentSetup) -> Vec<AmplitudeTerm> {
    build_amplitude_terms_from(setup, 0.0)
}

/// As [`build_amplitude_terms`], with the first pulse emitted at `origin_fs`.
pub fn build_amplitude_terms_from(setup: &ExperimentSetup, origin_fs: f64) -> Vec<AmplitudeTerm> {
    let pump = &setup.pump;
    let omega = pump.omega();
    let knob = pump.phase_knob_fs();
    let (s1, c1) = setup.analyzers.theta1.sin_cos();
    let (s2, c2) = setup.analyzers.theta2.sin_cos();
    let tau = setup.delays.tau_fs;
    let tau1 = setup.delays.tau1_fs;

    let mut terms = Vec::with_capacity(2 * pump.n_pulses as usize);
    for m in 0..pump.n_pulses {
        let t0 = origin_fs + m as f64 * pump.inter_pulse_delay_fs;
        let pulse_phase = omega * (t0 + m as f64 * knob);
        terms.push(AmplitudeTerm {
            weight: Complex64::new(-s1 * c2, 0.0),
            mu_plus: t0 + (tau1 - tau) / 2.0,
            mu_12: tau1,
            phase: pulse_phase + 0.5 * omega * (tau1 + tau),
            pulse_index: m,
            path: Path::TT,
        });
        terms.push(AmplitudeTerm {
            weight: Complex64::new(c1 * s2, 0.0),
            mu_plus: t0 - tau / 2.0,
            mu_12: 2.0 * tau,
            phase: pulse_phase + 0.5 * omega * tau,
            pulse_index: m,
            path: Path::RR,
        });
    }
    terms
}

/// Envelope-only overlap exp(−Δμ₊²/(8σ₊²) − Δμ₁₂²/(8σ₋²)).
pub fn envelope_overlap(a: &AmplitudeTerm, b: &AmplitudeTerm, model: &ModelParams) -> f64 {
    let dp = a.mu_plus - b.mu_plus;
    let dm = a.mu_12 - b.mu_12;
    (-dp * dp / (8.0 * model.sigma_plus_fs * model.sigma_plus_fs)
        - dm * dm / (8.0 * model.sigma_minus_fs * model.sigma_minus_fs))
        .exp()
}

/// ∬ G_a G_b* dt₊ dt₁₂ including the carrier phase difference.
pub fn overlap(a: &AmplitudeTerm, b: &AmplitudeTerm, model: &ModelParams) -> Complex64 {
    Complex64::from_polar(envelope_overlap(a, b, model), a.phase - b.phase)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// T − τ
    pub residual_t_fs: f64,
    /// τ₁ − 2τ
    pub residual_tau1_fs: f64,
    pub tolerance_fs: f64,
    pub max_cross_overlap: f64,
    pub predicted_spacetime_visibility: f64,
    pub predicted_polarization_visibility: f64,
    pub satisfied: bool,
}

/// Residuals of T = τ, τ₁ = 2τ plus the envelope overlap between TT and RR
/// paths of different pulses.
pub fn interference_condition(setup: &ExperimentSetup) -> ConditionReport {
    let terms = build_amplitude_terms(setup);
    let model = &setup.model;
    let mut max_cross: f64 = 0.0;
    for a in terms.iter().filter(|t| t.path == Path::TT) {
        for b in terms.iter().filter(|t| t.path == Path::RR && t.pulse_index != a.pulse_index) {
            max_cross = max_cross.max(envelope_overlap(a, b, model));
        }
    }
    let residual_t_fs = setup.pump.inter_pulse_delay_fs - setup.delays.tau_fs;
    let residual_tau1_fs = setup.delays.tau1_fs - 2.0 * setup.delays.tau_fs;
    let tolerance_fs = (model.sigma_plus_fs / 50.0).max(1.0);
    let n = setup.pump.n_pulses;

    let fringe = predicted_fringe(FRAC_PI_4, FRAC_PI_4, max_cross, n, 1);
    ConditionReport {
        residual_t_fs,
        residual_tau1_fs,
        tolerance_fs,
        max_cross_overlap: max_cross,
        predicted_spacetime_visibility: fringe.visibility(),
        predicted_polarization_visibility: quarter_turn_visibility_closed_form(FRAC_PI_4, max_cross, n, 1),
        // a single pulse has no partner to interfere with, whatever the delays
        satisfied: n >= 2 && residual_t_fs.abs() < tolerance_fs && residual_tau1_fs.abs() < tolerance_fs,
    }
}

/// (n − Δm)/n for pulses Δm apart in an n-pulse train.
pub fn theoretical_visibility(delta_m: u32, n: u32) -> Result<f64> {
    if delta_m < 1 || delta_m > n {
        return Err(Error::InvalidArgument(format!(
            "delta_m must lie in 1..={n}, got {delta_m}"
        )));
    }
    Ok((n - delta_m) as f64 / n as f64)
}
