//! Line-oriented INI apparatus description with unit-tagged values.
//!
//! ```text
//! [pump]
//! wavelength = 400 nm
//! inter_pulse_delay = 197 um   # lengths are accepted wherever a delay is expected
//! ```
//!
//! Sections: `pump crystal filter interferometer analyzers detectors model`.
//! Omitted keys keep their default values; unknown keys are errors.

use std::fmt::{self, Write as _};

use crate::error::{Error, ParseError, Result};
use crate::setup::{CrystalType, ExperimentSetup, ModelParams};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Nm,
    Um,
    Fs,
    Ps,
    Ns,
    Deg,
    Rad,
    Dimensionless,
}

impl Unit {
    fn from_token(tok: &str) -> Option<Unit> {
        Some(match tok {
            "nm" => Unit::Nm,
            "um" | "μm" | "µm" => Unit::Um,
            "fs" => Unit::Fs,
            "ps" => Unit::Ps,
            "ns" => Unit::Ns,
            "deg" => Unit::Deg,
            "rad" => Unit::Rad,
            _ => return None,
        })
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Unit::Nm => "nm",
            Unit::Um => "um",
            Unit::Fs => "fs",
            Unit::Ps => "ps",
            Unit::Ns => "ns",
            Unit::Deg => "deg",
            Unit::Rad => "rad",
            Unit::Dimensionless => "",
        }
    }

    fn is_length(&self) -> bool {
        matches!(self, Unit::Nm | Unit::Um)
    }

    fn is_time(&self) -> bool {
        matches!(self, Unit::Fs | Unit::Ps | Unit::Ns)
    }

    // Exponent of ten relative to the base unit of its dimension (nm, fs).
    fn decade(&self) -> i32 {
        match self {
            Unit::Um => 3,
            Unit::Ps => 3,
            Unit::Ns => 6,
            _ => 0,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    /// Convert within one dimension (length or time). Identity conversions are exact.
    pub fn to_unit(&self, target: Unit) -> f64 {
        let diff = self.unit.decade() - target.decade();
        if diff == 0 {
            self.value
        } else if diff > 0 {
            self.value * 10f64.powi(diff)
        } else {
            self.value / 10f64.powi(-diff)
        }
    }

    /// A time, or a length turned into a delay.
    pub fn as_delay_fs(&self) -> Option<f64> {
        if self.unit.is_time() {
            Some(self.to_unit(Unit::Fs))
        } else if self.unit == Unit::Um {
            units::delay_from_length(self.value).ok()
        } else if self.unit == Unit::Nm {
            Some(self.value / units::SPEED_OF_LIGHT_NM_PER_FS)
        } else {
            None
        }
    }
}

fn quantity_at(token: &str, line: usize, col0: usize, snippet: &str) -> std::result::Result<Quantity, ParseError> {
    let lead = token.len() - token.trim_start().len();
    let t = token.trim();
    let col = col0 + lead;
    if t.is_empty() {
        return Err(ParseError::new(line, col, "missing value", snippet));
    }
    let split = t
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_alphabetic())
        .last()
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let (num, unit_tok) = t.split_at(split);
    let num_trim = num.trim_end();
    let unit = if unit_tok.is_empty() {
        Unit::Dimensionless
    } else {
        Unit::from_token(unit_tok).ok_or_else(|| {
            ParseError::new(
                line,
                col + t[..split].chars().count(),
                format!("unknown unit `{unit_tok}` (expected one of nm, um, fs, ps, ns, deg, rad)"),
                snippet,
            )
        })?
    };
    if num_trim.is_empty() {
        return Err(ParseError::new(line, col, format!("missing number before `{unit_tok}`"), snippet));
    }
    let value: f64 = num_trim
        .parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
        .ok_or_else(|| ParseError::new(line, col, format!("malformed number `{num_trim}`"), snippet))?;
    Ok(Quantity { value, unit })
}

/// `<real><space?><unit>`; dimensionless when the unit is absent.
pub fn parse_quantity(token: &str) -> std::result::Result<Quantity, ParseError> {
    quantity_at(token, 1, 1, token)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Length,
    Time,
    Delay,
    Angle,
    Count,
    Number,
    CrystalKind,
}

impl Kind {
    fn describe(&self) -> &'static str {
        match self {
            Kind::Length => "a length (nm, um)",
            Kind::Time => "a time (fs, ps, ns)",
            Kind::Delay => "a time (fs, ps, ns) or length (nm, um)",
            Kind::Angle => "an angle (deg, rad)",
            Kind::Count => "a positive integer",
            Kind::Number => "a dimensionless number",
            Kind::CrystalKind => "`type-I` or `type-II`",
        }
    }
}

const SECTIONS: [&str; 7] = ["pump", "crystal", "filter", "interferometer", "analyzers", "detectors", "model"];

fn key_kind(section: &str, key: &str) -> Option<Kind> {
    Some(match (section, key) {
        ("pump", "wavelength") => Kind::Length,
        ("pump", "pulse_fwhm") => Kind::Time,
        ("pump", "rep_period") => Kind::Time,
        ("pump", "n_pulses") => Kind::Count,
        ("pump", "inter_pulse_delay") => Kind::Delay,
        ("pump", "extra_phase_path") => Kind::Length,
        ("crystal", "type") => Kind::CrystalKind,
        ("crystal", "thickness") => Kind::Length,
        ("crystal", "thickness_um") => Kind::Number,
        ("filter", "center") | ("filter", "fwhm") => Kind::Length,
        ("interferometer", "tau") | ("interferometer", "tau1") => Kind::Delay,
        ("analyzers", "theta1") | ("analyzers", "theta2") => Kind::Angle,
        ("detectors", "jitter") | ("detectors", "coincidence_window") => Kind::Time,
        ("detectors", "pair_probability") | ("detectors", "efficiency") => Kind::Number,
        ("model", "sigma_plus") | ("model", "sigma_minus") => Kind::Time,
        ("model", "normalization") => Kind::Number,
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy)]
enum Value {
    Quantity(Quantity),
    Count(u32),
    Crystal(CrystalType),
}

fn parse_value(kind: Kind, raw: &str, line: usize, col: usize, snippet: &str, key: &str) -> std::result::Result<Value, ParseError> {
    if kind == Kind::CrystalKind {
        return match raw.trim() {
            "type-I" | "type-1" => Ok(Value::Crystal(CrystalType::TypeI)),
            "type-II" | "type-2" => Ok(Value::Crystal(CrystalType::TypeII)),
            other => Err(ParseError::new(line, col, format!("`{other}` is not {}", kind.describe()), snippet)),
        };
    }
    let q = quantity_at(raw, line, col, snippet)?;
    let unit_col = col + raw.trim_end().len() - q.unit.symbol().len();
    let bad_unit = || {
        ParseError::new(
            line,
            unit_col,
            format!("`{key}` expects {}, got unit `{}`", kind.describe(), if q.unit == Unit::Dimensionless { "none" } else { q.unit.symbol() }),
            snippet,
        )
    };
    let ok = match kind {
        Kind::Length => q.unit.is_length(),
        Kind::Time => q.unit.is_time(),
        Kind::Delay => q.unit.is_length() || q.unit.is_time(),
        Kind::Angle => matches!(q.unit, Unit::Deg | Unit::Rad),
        Kind::Count | Kind::Number => q.unit == Unit::Dimensionless,
        Kind::CrystalKind => unreachable!(),
    };
    if !ok {
        return Err(bad_unit());
    }
    if kind == Kind::Count {
        if q.value.fract() != 0.0 || q.value < 0.0 || q.value > u32::MAX as f64 {
            return Err(ParseError::new(line, col, format!("`{key}` expects {}", kind.describe()), snippet));
        }
        return Ok(Value::Count(q.value as u32));
    }
    Ok(Value::Quantity(q))
}

#[derive(Default)]
struct Explicit {
    sigma_plus: bool,
    sigma_minus: bool,
}

fn assign(setup: &mut ExperimentSetup, explicit: &mut Explicit, section: &str, key: &str, value: Value) {
    let q = match value {
        Value::Count(n) => {
            setup.pump.n_pulses = n;
            return;
        }
        Value::Crystal(k) => {
            setup.crystal.kind = k;
            return;
        }
        Value::Quantity(q) => q,
    };
    let nm = || q.to_unit(Unit::Nm);
    let fs = || q.to_unit(Unit::Fs);
    let delay = || q.as_delay_fs().unwrap_or(f64::NAN);
    let angle = || if q.unit == Unit::Deg { q.value.to_radians() } else { q.value };
    match (section, key) {
        ("pump", "wavelength") => setup.pump.wavelength_nm = nm(),
        ("pump", "pulse_fwhm") => setup.pump.pulse_fwhm_fs = fs(),
        ("pump", "rep_period") => setup.pump.rep_period_fs = fs(),
        ("pump", "inter_pulse_delay") => setup.pump.inter_pulse_delay_fs = delay(),
        ("pump", "extra_phase_path") => setup.pump.extra_phase_path_nm = nm(),
        ("crystal", "thickness") => setup.crystal.thickness_nm = nm(),
        ("crystal", "thickness_um") => setup.crystal.thickness_nm = q.value * 1e3,
        ("filter", "center") => setup.filter.center_nm = nm(),
        ("filter", "fwhm") => setup.filter.fwhm_nm = nm(),
        ("interferometer", "tau") => setup.delays.tau_fs = delay(),
        ("interferometer", "tau1") => setup.delays.tau1_fs = delay(),
        ("analyzers", "theta1") => setup.analyzers.theta1 = angle(),
        ("analyzers", "theta2") => setup.analyzers.theta2 = angle(),
        ("detectors", "jitter") => setup.detectors.jitter_ps = q.to_unit(Unit::Ps),
        ("detectors", "coincidence_window") => setup.detectors.coincidence_window_ns = q.to_unit(Unit::Ns),
        ("detectors", "pair_probability") => setup.detectors.pair_probability = q.value,
        ("detectors", "efficiency") => setup.detectors.efficiency = q.value,
        ("model", "sigma_plus") => {
            setup.model.sigma_plus_fs = fs();
            explicit.sigma_plus = true;
        }
        ("model", "sigma_minus") => {
            setup.model.sigma_minus_fs = fs();
            explicit.sigma_minus = true;
        }
        ("model", "normalization") => setup.model.normalization = q.value,
        _ => unreachable!("key table and assignment table disagree on {section}.{key}"),
    }
}

fn unknown_key(section: &str, key: &str, line: usize, col: usize, snippet: &str) -> ParseError {
    let msg = if section == "detectors" && key == "dark_rate" {
        "`detectors.dark_rate` is reserved: dark counts are not implemented".to_string()
    } else {
        format!("unknown key `{key}` in section [{section}]")
    };
    ParseError::new(line, col, msg, snippet)
}

/// Parse a config; every omitted key keeps the standard value.
pub fn parse_config(source: &str) -> Result<ExperimentSetup> {
    parse_config_with_overrides(source, &[])
}

/// Parse, then apply `section.key=value` overrides, then validate.
pub fn parse_config_with_overrides(source: &str, overrides: &[String]) -> Result<ExperimentSetup> {
    let mut setup = ExperimentSetup::standard();
    let mut explicit = Explicit::default();
    let mut section: Option<String> = None;
    let mut seen: Vec<(String, String)> = Vec::new();

    for (idx, raw_line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let col_of = |byte: usize| raw_line[..byte].chars().count() + 1;

        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(ParseError::new(line_no, col_of(indent + trimmed.len()), "expected `]` to close section header", raw_line).into());
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(ParseError::new(
                    line_no,
                    col_of(indent + 1),
                    format!("unknown section [{name}] (expected one of {})", SECTIONS.join(", ")),
                    raw_line,
                )
                .into());
            }
            section = Some(name.to_string());
            continue;
        }

        let Some(eq) = content.find('=') else {
            return Err(ParseError::new(line_no, col_of(indent), "expected `key = value` or `[section]`", raw_line).into());
        };
        let key = content[..eq].trim();
        if key.is_empty() {
            return Err(ParseError::new(line_no, col_of(indent), "missing key before `=`", raw_line).into());
        }
        let Some(sec) = section.as_deref() else {
            return Err(ParseError::new(line_no, col_of(indent), format!("key `{key}` appears before any [section]"), raw_line).into());
        };
        let Some(kind) = key_kind(sec, key) else {
            return Err(unknown_key(sec, key, line_no, col_of(indent), raw_line).into());
        };
        // thickness_um is an alias of thickness
        let canonical = if key == "thickness_um" { "thickness" } else { key };
        if seen.iter().any(|(s, k)| s == sec && k == canonical) {
            return Err(ParseError::new(line_no, col_of(indent), format!("duplicate key `{key}` in [{sec}]"), raw_line).into());
        }
        seen.push((sec.to_string(), canonical.to_string()));
        let value_text = &content[eq + 1..];
        let value = parse_value(kind, value_text, line_no, col_of(eq + 1), raw_line, key)?;
        assign(&mut setup, &mut explicit, sec, key, value);
    }

    for ov in overrides {
        let Some(eq) = ov.find('=') else {
            return Err(ParseError::new(1, 1, format!("override `{ov}` is not of the form section.key=value"), ov).into());
        };
        let path = ov[..eq].trim();
        let Some((sec, key)) = path.split_once('.') else {
            return Err(ParseError::new(1, 1, format!("override key `{path}` must be section.key"), ov).into());
        };
        if !SECTIONS.contains(&sec) {
            return Err(ParseError::new(1, 1, format!("unknown section `{sec}` in override"), ov).into());
        }
        let Some(kind) = key_kind(sec, key) else {
            return Err(unknown_key(sec, key, 1, 1, ov).into());
        };
        let value = parse_value(kind, &ov[eq + 1..], 1, ov[..eq + 1].chars().count() + 1, ov, key)?;
        assign(&mut setup, &mut explicit, sec, key, value);
    }

    if !explicit.sigma_plus || !explicit.sigma_minus {
        if let Ok(derived) = ModelParams::derived(&setup.pump, &setup.filter) {
            if !explicit.sigma_plus {
                setup.model.sigma_plus_fs = derived.sigma_plus_fs;
            }
            if !explicit.sigma_minus {
                setup.model.sigma_minus_fs = derived.sigma_minus_fs;
            }
        }
    }
    let violations = setup.violations();
    if violations.is_empty() {
        Ok(setup)
    } else {
        Err(Error::Validation(violations))
    }
}

/// Canonical form: every key, internal units, shortest round-trip numerals.
pub fn render_config(setup: &ExperimentSetup) -> String {
    let mut s = String::new();
    let p = &setup.pump;
    let _ = writeln!(s, "[pump]");
    let _ = writeln!(s, "wavelength = {} nm", p.wavelength_nm);
    let _ = writeln!(s, "pulse_fwhm = {} fs", p.pulse_fwhm_fs);
    let _ = writeln!(s, "rep_period = {} fs", p.rep_period_fs);
    let _ = writeln!(s, "n_pulses = {}", p.n_pulses);
    let _ = writeln!(s, "inter_pulse_delay = {} fs", p.inter_pulse_delay_fs);
    let _ = writeln!(s, "extra_phase_path = {} nm", p.extra_phase_path_nm);
    let _ = writeln!(s, "[crystal]");
    let _ = writeln!(s, "type = {}", setup.crystal.kind.as_str());
    let _ = writeln!(s, "thickness = {} nm", setup.crystal.thickness_nm);
    let _ = writeln!(s, "[filter]");
    let _ = writeln!(s, "center = {} nm", setup.filter.center_nm);
    let _ = writeln!(s, "fwhm = {} nm", setup.filter.fwhm_nm);
    let _ = writeln!(s, "[interferometer]");
    let _ = writeln!(s, "tau = {} fs", setup.delays.tau_fs);
    let _ = writeln!(s, "tau1 = {} fs", setup.delays.tau1_fs);
    let _ = writeln!(s, "[analyzers]");
    let _ = writeln!(s, "theta1 = {} rad", setup.analyzers.theta1);
    let _ = writeln!(s, "theta2 = {} rad", setup.analyzers.theta2);
    let d = &setup.detectors;
    let _ = writeln!(s, "[detectors]");
    let _ = writeln!(s, "jitter = {} ps", d.jitter_ps);
    let _ = writeln!(s, "coincidence_window = {} ns", d.coincidence_window_ns);
    let _ = writeln!(s, "pair_probability = {}", d.pair_probability);
    let _ = writeln!(s, "efficiency = {}", d.efficiency);
    let m = &setup.model;
    let _ = writeln!(s, "[model]");
    let _ = writeln!(s, "sigma_plus = {} fs", m.sigma_plus_fs);
    let _ = writeln!(s, "sigma_minus = {} fs", m.sigma_minus_fs);
    let _ = writeln!(s, "normalization = {}", m.normalization);
    s
}

/// The default apparatus description, as shipped.
pub const DEFAULT_CONFIG: &str = "\
[pump]
wavelength = 400 nm        # central wavelength
pulse_fwhm = 140 fs
rep_period = 11 ns
n_pulses = 2
inter_pulse_delay = 197 um
extra_phase_path = 0 nm
[crystal]
type = type-II
thickness = 100 um
[filter]
center = 800 nm
fwhm = 10 nm
[interferometer]
tau = 197 um
tau1 = 394 um
[analyzers]
theta1 = 45 deg
theta2 = 45 deg
[detectors]
jitter = 300 ps
coincidence_window = 3 ns
pair_probability = 0.001
efficiency = 1.0
";
