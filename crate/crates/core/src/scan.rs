//! Parameter scans over a setup, producing [`Curve`]s.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrema;
use crate::rate::{phase_sweep_visibility, polarization_visibility, setup_rate};
use crate::setup::ExperimentSetup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum YKind {
    Rate,
    Visibility,
    Counts,
}

impl YKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            YKind::Rate => "RATE",
            YKind::Visibility => "VISIBILITY",
            YKind::Counts => "COUNTS",
        }
    }
}

impl FromStr for YKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "RATE" => Ok(YKind::Rate),
            "VISIBILITY" => Ok(YKind::Visibility),
            "COUNTS" => Ok(YKind::Counts),
            other => Err(Error::CurveFormat(format!("unknown y_kind `{other}`"))),
        }
    }
}

/// An ordered scan result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub parameter: String,
    pub y_kind: YKind,
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            out.push("x values must be strictly increasing".to_string());
        }
        match self.y_kind {
            YKind::Rate | YKind::Counts if self.ys().any(|y| !(y >= 0.0)) => {
                out.push("y must be >= 0".to_string())
            }
            YKind::Visibility if self.ys().any(|y| !(0.0..=1.0).contains(&y)) => {
                out.push("visibility must lie in [0, 1]".to_string())
            }
            _ => {}
        }
        out
    }

    /// x of the largest y (first one on ties).
    pub fn argmax(&self) -> Option<f64> {
        self.points
            .iter()
            .fold(None::<(f64, f64)>, |best, &p| match best {
                Some(b) if b.1 >= p.1 => Some(b),
                _ => Some(p),
            })
            .map(|p| p.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScanParameter {
    /// T, fs
    InterPulseDelay,
    /// φ_p as optical path, nm
    PumpPhasePath,
    /// θ₁, rad
    Theta1,
    /// τ, fs
    Tau,
    /// τ₁, fs
    Tau1,
}

impl ScanParameter {
    pub const ALL: [ScanParameter; 5] = [
        ScanParameter::InterPulseDelay,
        ScanParameter::PumpPhasePath,
        ScanParameter::Theta1,
        ScanParameter::Tau,
        ScanParameter::Tau1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScanParameter::InterPulseDelay => "inter_pulse_delay",
            ScanParameter::PumpPhasePath => "pump_phase_path",
            ScanParameter::Theta1 => "theta1",
            ScanParameter::Tau => "tau",
            ScanParameter::Tau1 => "tau1",
        }
    }

    /// Internal unit of the scanned value.
    pub fn unit(&self) -> &'static str {
        match self {
            ScanParameter::PumpPhasePath => "nm",
            ScanParameter::Theta1 => "rad",
            _ => "fs",
        }
    }

    pub fn apply(&self, setup: &mut ExperimentSetup, x: f64) {
        match self {
            ScanParameter::InterPulseDelay => setup.pump.inter_pulse_delay_fs = x,
            ScanParameter::PumpPhasePath => setup.pump.extra_phase_path_nm = x,
            ScanParameter::Theta1 => setup.analyzers.theta1 = x,
            ScanParameter::Tau => setup.delays.tau_fs = x,
            ScanParameter::Tau1 => setup.delays.tau1_fs = x,
        }
    }
}

impl fmt::Display for ScanParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScanParameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scan parameter `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reduce {
    /// Coincidence rate at each point.
    Rate,
    /// Space-time visibility from an internal pump-phase sweep.
    Visibility,
    /// Quarter-turn θ₁ polarization-fringe visibility.
    PolarizationVisibility,
}

impl FromStr for Reduce {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "rate" => Ok(Reduce::Rate),
            "visibility" => Ok(Reduce::Visibility),
            "polarization_visibility" => Ok(Reduce::PolarizationVisibility),
            _ => Err(Error::InvalidArgument(format!("unknown reduce mode `{s}`"))),
        }
    }
}

/// `steps` evenly spaced values from `from` to `to`, both ends included exactly.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    let h = (to - from) / (steps - 1) as f64;
    (0..steps)
        .map(|i| if i + 1 == steps { to } else { from + i as f64 * h })
        .collect()
}

/// Rebuild the setup at every point of the range and record the reduced value.
/// Points are evaluated in parallel and assembled in index order.
pub fn scan(
    setup: &ExperimentSetup,
    parameter: ScanParameter,
    range: (f64, f64),
    steps: usize,
    reduce: Reduce,
) -> Result<Curve> {
    let (from, to) = range;
    if steps < 2 {
        return Err(Error::InvalidArgument(format!("scan needs at least 2 steps, got {steps}")));
    }
    if !from.is_finite() || !to.is_finite() {
        return Err(Error::InvalidArgument("scan range must be finite".to_string()));
    }
    if !(to > from) {
        return Err(Error::InvalidArgument(format!("degenerate scan range [{from}, {to}]")));
    }
    let xs = linspace(from, to, steps);
    let points = xs
        .par_iter()
        .map(|&x| {
            let mut s = *setup;
            parameter.apply(&mut s, x);
            s.validate()?;
            let y = match reduce {
                Reduce::Rate => setup_rate(&s),
                Reduce::Visibility => phase_sweep_visibility(&s),
                Reduce::PolarizationVisibility => polarization_visibility(&s),
            };
            Ok((x, y))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Curve {
        parameter: parameter.name().to_string(),
        y_kind: match reduce {
            Reduce::Rate => YKind::Rate,
            _ => YKind::Visibility,
        },
        points,
    })
}

/// (max y − min y)/(max y + min y) of a rate or count curve.
pub fn visibility_from_curve(curve: &Curve) -> Result<f64> {
    if curve.points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "visibility needs at least 3 points, got {}",
            curve.points.len()
        )));
    }
    if curve.y_kind == YKind::Visibility {
        return Err(Error::InvalidArgument("curve already holds visibilities".to_string()));
    }
    let max = curve.ys().fold(f64::NEG_INFINITY, f64::max);
    let min = curve.ys().fold(f64::INFINITY, f64::min);
    Ok(extrema::contrast(min, max))
}
