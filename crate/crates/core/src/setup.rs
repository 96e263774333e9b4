//! Apparatus description: pump train, filters, interferometer delays,
//! analyzers, detectors and envelope model parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::DetectorSpec;
use crate::units::{self, coherence_time_from_filter, fwhm_to_sigma_factor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpec {
    pub wavelength_nm: f64,
    /// Intensity FWHM of a single pump pulse.
    pub pulse_fwhm_fs: f64,
    pub rep_period_fs: f64,
    pub n_pulses: u32,
    /// Delay T between consecutive pulses within one repetition frame.
    pub inter_pulse_delay_fs: f64,
    /// Pump phase knob expressed as optical path; pulse m is advanced in
    /// phase by m · 2π · path / wavelength.
    pub extra_phase_path_nm: f64,
}

impl PumpSpec {
    /// Carrier angular frequency Ω_p in rad/fs.
    pub fn omega(&self) -> f64 {
        units::angular_frequency(self.wavelength_nm)
    }

    /// Phase knob converted to a carrier time offset in fs.
    pub fn phase_knob_fs(&self) -> f64 {
        self.extra_phase_path_nm / units::SPEED_OF_LIGHT_NM_PER_FS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub center_nm: f64,
    pub fwhm_nm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelaySpec {
    /// τ: idler delay ahead of the beamsplitter.
    pub tau_fs: f64,
    /// τ₁: delay of the transmitted signal on its way to D1.
    pub tau1_fs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyzerSpec {
    pub theta1: f64,
    pub theta2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// RMS width of every envelope along t₊.
    pub sigma_plus_fs: f64,
    /// RMS width along t₁₂.
    pub sigma_minus_fs: f64,
    pub normalization: f64,
}

impl ModelParams {
    /// Widths derived from the pump pulse length and the filter coherence time.
    pub fn derived(pump: &PumpSpec, filter: &FilterSpec) -> Result<Self> {
        let coherence = coherence_time_from_filter(filter)?;
        Ok(Self {
            sigma_plus_fs: pump.pulse_fwhm_fs / fwhm_to_sigma_factor(),
            sigma_minus_fs: coherence.time_fs / fwhm_to_sigma_factor(),
            normalization: 1.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrystalType {
    TypeI,
    TypeII,
}

impl CrystalType {
    pub fn as_str(&self) -> &'static str {
        match self {
            CrystalType::TypeI => "type-I",
            CrystalType::TypeII => "type-II",
        }
    }
}

/// Carried as metadata only; the envelope model does not use it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalSpec {
    pub kind: CrystalType,
    pub thickness_nm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSetup {
    pub pump: PumpSpec,
    pub crystal: CrystalSpec,
    pub filter: FilterSpec,
    pub delays: DelaySpec,
    pub analyzers: AnalyzerSpec,
    pub detectors: DetectorSpec,
    pub model: ModelParams,
}

impl ExperimentSetup {
    /// The two-pulse experiment: 400 nm / 140 fs pump, 197 μm delays, 10 nm filters.
    pub fn standard() -> Self {
        let delay = units::delay_from_length(197.0).expect("finite");
        let pump = PumpSpec {
            wavelength_nm: 400.0,
            pulse_fwhm_fs: 140.0,
            rep_period_fs: 11.0e6,
            n_pulses: 2,
            inter_pulse_delay_fs: delay,
            extra_phase_path_nm: 0.0,
        };
        let filter = FilterSpec { center_nm: 800.0, fwhm_nm: 10.0 };
        Self {
            pump,
            crystal: CrystalSpec { kind: CrystalType::TypeII, thickness_nm: 100_000.0 },
            filter,
            delays: DelaySpec {
                tau_fs: delay,
                tau1_fs: units::delay_from_length(394.0).expect("finite"),
            },
            analyzers: AnalyzerSpec {
                theta1: 45f64.to_radians(),
                theta2: 45f64.to_radians(),
            },
            detectors: DetectorSpec::default(),
            model: ModelParams::derived(&pump, &filter).expect("default filter is valid"),
        }
    }

    /// Every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                out.push(msg);
            }
        };
        let p = &self.pump;
        check(p.wavelength_nm.is_finite() && p.wavelength_nm > 0.0, format!("pump.wavelength must be > 0 (got {} nm)", p.wavelength_nm));
        check(p.pulse_fwhm_fs.is_finite() && p.pulse_fwhm_fs > 0.0, format!("pump.pulse_fwhm must be > 0 (got {} fs)", p.pulse_fwhm_fs));
        check(p.n_pulses >= 1, "pump.n_pulses must be >= 1".to_string());
        check(p.inter_pulse_delay_fs.is_finite(), "pump.inter_pulse_delay must be finite".to_string());
        check(p.extra_phase_path_nm.is_finite(), "pump.extra_phase_path must be finite".to_string());
        let frame = p.n_pulses as f64 * p.inter_pulse_delay_fs + 10.0 * p.pulse_fwhm_fs;
        check(
            p.rep_period_fs.is_finite() && p.rep_period_fs > frame,
            format!(
                "pump.rep_period ({} fs) must exceed n_pulses * inter_pulse_delay + 10 * pulse_fwhm ({} fs)",
                p.rep_period_fs, frame
            ),
        );
        let f = &self.filter;
        check(f.center_nm.is_finite() && f.center_nm > 0.0, format!("filter.center must be > 0 (got {} nm)", f.center_nm));
        check(
            f.fwhm_nm.is_finite() && f.fwhm_nm > 0.0 && f.fwhm_nm < f.center_nm,
            format!("filter.fwhm must lie in (0, center) (got {} nm)", f.fwhm_nm),
        );
        check(self.crystal.thickness_nm.is_finite() && self.crystal.thickness_nm > 0.0, "crystal.thickness must be > 0".to_string());
        let d = &self.delays;
        check(d.tau_fs.is_finite() && d.tau_fs >= 0.0, format!("interferometer.tau must be >= 0 (got {} fs)", d.tau_fs));
        check(d.tau1_fs.is_finite() && d.tau1_fs >= 0.0, format!("interferometer.tau1 must be >= 0 (got {} fs)", d.tau1_fs));
        check(self.analyzers.theta1.is_finite(), "analyzers.theta1 must be finite".to_string());
        check(self.analyzers.theta2.is_finite(), "analyzers.theta2 must be finite".to_string());
        let m = &self.model;
        check(m.sigma_plus_fs.is_finite() && m.sigma_plus_fs > 0.0, format!("model.sigma_plus must be > 0 (got {} fs)", m.sigma_plus_fs));
        check(m.sigma_minus_fs.is_finite() && m.sigma_minus_fs > 0.0, format!("model.sigma_minus must be > 0 (got {} fs)", m.sigma_minus_fs));
        check(m.normalization.is_finite() && m.normalization > 0.0, format!("model.normalization must be > 0 (got {})", m.normalization));
        out.extend(self.detectors.violations());
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Retune T, τ and τ₁ so that pulses Δm apart satisfy the matched condition:
    /// τ = Δm·T, τ₁ = 2τ.
    pub fn matched_for(mut self, delta_m: u32) -> Self {
        self.delays.tau_fs = delta_m as f64 * self.pump.inter_pulse_delay_fs;
        self.delays.tau1_fs = 2.0 * self.delays.tau_fs;
        self
    }
}

impl Default for ExperimentSetup {
    fn default() -> Self {
        Self::standard()
    }
}
