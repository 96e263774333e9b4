//! Two-photon interference from SPDC pumped by temporally separated pulses.
//!
//! The crate builds the Feynman-path biphoton amplitudes of a pulsed pump
//! train passing a two-output interferometer, evaluates coincidence rates in
//! closed form (with a brute-force grid oracle alongside), scans apparatus
//! parameters, fits fringes, parses apparatus descriptions and simulates
//! time-tagged detection events.

pub mod config;
pub mod curve_io;
pub mod error;
mod extrema;
pub mod fit;
pub mod model;
pub mod montecarlo;
pub mod rate;
pub mod scan;
pub mod setup;
pub mod units;

pub use config::{parse_config, parse_config_with_overrides, parse_quantity, render_config, Quantity, Unit, DEFAULT_CONFIG};
pub use curve_io::{read_curve, write_curve, CurveFormat};
pub use error::{Error, ParseError, Result};
pub use fit::{fit_fringe, FringeFit};
pub use model::{
    build_amplitude_terms, interference_condition, overlap, theoretical_visibility, AmplitudeTerm, ConditionReport, Path,
};
pub use montecarlo::{
    count_coincidences, generate_events, singles_rates, CoincidenceSummary, Detector, DetectorSpec, EventRecord, PairSampler,
};
pub use rate::{coincidence_rate, eta, grid_rate_oracle, predicted_fringe, GridSpec, PredictedFringe};
pub use scan::{scan, visibility_from_curve, Curve, Reduce, ScanParameter, YKind};
pub use setup::{AnalyzerSpec, CrystalSpec, CrystalType, DelaySpec, ExperimentSetup, FilterSpec, ModelParams, PumpSpec};
pub use units::{coherence_time_from_filter, delay_from_length};
