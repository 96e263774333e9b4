//! Physical constants and unit conversions. Internal units are fs for time,
//! nm for length and rad for angles.

use crate::error::{Error, Result};
use crate::setup::FilterSpec;

/// Speed of light in nm/fs (exactly 299 792 458 m/s).
pub const SPEED_OF_LIGHT_NM_PER_FS: f64 = 299.792_458;

/// Ratio between a Gaussian's intensity FWHM and its RMS width, 2√(2 ln 2).
pub fn fwhm_to_sigma_factor() -> f64 {
    2.0 * (2.0 * std::f64::consts::LN_2).sqrt()
}

/// Optical path length in μm converted to the equivalent delay in fs.
pub fn delay_from_length(length_um: f64) -> Result<f64> {
    if !length_um.is_finite() {
        return Err(Error::InvalidArgument(format!("path length must be finite, got {length_um}")));
    }
    Ok(length_um * 1e3 / SPEED_OF_LIGHT_NM_PER_FS)
}

/// Delay in fs converted back to optical path length in nm.
pub fn length_nm_from_delay(delay_fs: f64) -> f64 {
    delay_fs * SPEED_OF_LIGHT_NM_PER_FS
}

/// Coherence length λ²/Δλ (nm) and coherence time (fs) fixed by a detection filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coherence {
    pub length_nm: f64,
    pub time_fs: f64,
}

pub fn coherence_time_from_filter(filter: &FilterSpec) -> Result<Coherence> {
    if !(filter.fwhm_nm > 0.0) || !filter.fwhm_nm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "filter fwhm must be positive, got {} nm",
            filter.fwhm_nm
        )));
    }
    if !(filter.center_nm > 0.0) || !filter.center_nm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "filter center must be positive, got {} nm",
            filter.center_nm
        )));
    }
    let length_nm = filter.center_nm * filter.center_nm / filter.fwhm_nm;
    Ok(Coherence {
        length_nm,
        time_fs: length_nm / SPEED_OF_LIGHT_NM_PER_FS,
    })
}

/// Pump carrier angular frequency in rad/fs.
pub fn angular_frequency(wavelength_nm: f64) -> f64 {
    std::f64::consts::TAU * SPEED_OF_LIGHT_NM_PER_FS / wavelength_nm
}
