use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use biphoton_core::montecarlo::{summary_json, write_events_csv};
use biphoton_core::rate::{incoherent_rate, polarization_visibility, polarization_visibility_full_turn, setup_rate};
use biphoton_core::{
    build_amplitude_terms, coincidence_rate, count_coincidences, eta, generate_events, grid_rate_oracle,
    interference_condition, parse_config_with_overrides, parse_quantity, scan, write_curve, Curve, CurveFormat,
    ExperimentSetup, GridSpec, Quantity, Reduce, ScanParameter, Unit,
};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Two-pulse SPDC interference: condition checks, rates, scans, event simulation.
#[derive(Debug, Parser)]
#[command(name = "biphoton", version)]
struct Cli {
    /// Apparatus description (INI). Built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format; scans default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Override a config value, e.g. `--set pump.n_pulses=4`. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReduceArg {
    Rate,
    Visibility,
    PolarizationVisibility,
}

impl From<ReduceArg> for Reduce {
    fn from(r: ReduceArg) -> Self {
        match r {
            ReduceArg::Rate => Reduce::Rate,
            ReduceArg::Visibility => Reduce::Visibility,
            ReduceArg::PolarizationVisibility => Reduce::PolarizationVisibility,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report the interference condition and predicted visibilities.
    Check,
    /// Closed-form coincidence rate at the configured settings.
    Rate,
    /// Sweep one parameter and emit the resulting curve.
    Scan {
        #[arg(long, value_parser = parse_scan_parameter)]
        param: ScanParameter,
        /// Start, with unit (e.g. 533fs, 0nm, -45deg).
        #[arg(long, allow_hyphen_values = true, value_parser = parse_unit_quantity)]
        from: Quantity,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_unit_quantity)]
        to: Quantity,
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
        steps: u32,
        #[arg(long, value_enum, default_value = "rate")]
        reduce: ReduceArg,
    },
    /// Simulate time-tagged detector events and count coincidences.
    Events {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        frames: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..), default_value_t = 60)]
        bins: u32,
        #[arg(long)]
        out_events: Option<PathBuf>,
        #[arg(long)]
        out_summary: Option<PathBuf>,
    },
    /// Compare the closed-form rate with brute-force grid integration.
    Oracle {
        #[arg(long, value_parser = clap::value_parser!(u32).range(64..), default_value_t = 512)]
        steps_per_axis: u32,
    },
}

fn parse_scan_parameter(s: &str) -> std::result::Result<ScanParameter, String> {
    s.parse().map_err(|e: biphoton_core::Error| e.to_string())
}

fn parse_unit_quantity(s: &str) -> std::result::Result<Quantity, String> {
    let q = parse_quantity(s).map_err(|e| e.message.clone())?;
    if q.unit == Unit::Dimensionless {
        return Err(format!("`{s}` needs a unit"));
    }
    Ok(q)
}

/// Convert a flag quantity into the scanned parameter's internal unit.
fn to_internal(param: ScanParameter, q: Quantity) -> Option<f64> {
    match param {
        ScanParameter::InterPulseDelay | ScanParameter::Tau | ScanParameter::Tau1 => q.as_delay_fs(),
        ScanParameter::PumpPhasePath => matches!(q.unit, Unit::Nm | Unit::Um).then(|| q.to_unit(Unit::Nm)),
        ScanParameter::Theta1 => match q.unit {
            Unit::Deg => Some(q.value.to_radians()),
            Unit::Rad => Some(q.value),
            _ => None,
        },
    }
}

fn load_setup(cli: &Cli) -> Result<ExperimentSetup> {
    let source = match &cli.config {
        Some(path) => fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?,
        None => String::new(),
    };
    let setup = parse_config_with_overrides(&source, &cli.overrides)?;
    Ok(setup)
}

fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(value).expect("json value serializes") + "\n",
        Format::Csv => {
            let mut out = String::from("key,value\n");
            if let Value::Object(map) = value {
                for (k, v) in map {
                    out.push_str(&format!("{k},{v}\n"));
                }
            }
            out
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_check(setup: &ExperimentSetup) -> Value {
    let report = interference_condition(setup);
    let mut v = serde_json::to_value(report).expect("report serializes");
    v["polarization_visibility"] = json!(polarization_visibility(setup));
    v["polarization_visibility_full_turn"] = json!(polarization_visibility_full_turn(setup));
    v["theta1_deg"] = json!(setup.analyzers.theta1.to_degrees());
    v["theta2_deg"] = json!(setup.analyzers.theta2.to_degrees());
    v
}

fn cmd_rate(setup: &ExperimentSetup) -> Value {
    let terms = build_amplitude_terms(setup);
    json!({
        "rate": setup_rate(setup),
        "incoherent_rate": incoherent_rate(&terms, &setup.model),
        "eta": eta(setup).ok(),
        "n_pulses": setup.pump.n_pulses,
        "theta1_deg": setup.analyzers.theta1.to_degrees(),
        "theta2_deg": setup.analyzers.theta2.to_degrees(),
        "extra_phase_path_nm": setup.pump.extra_phase_path_nm,
    })
}

fn cmd_oracle(setup: &ExperimentSetup, steps: usize) -> Result<Value> {
    let terms = build_amplitude_terms(setup);
    let exact = coincidence_rate(&terms, &setup.model);
    let grid = grid_rate_oracle(&terms, &setup.model, &GridSpec::covering(&terms, &setup.model, steps))?;
    let abs = (grid - exact).abs();
    Ok(json!({
        "closed_form": exact,
        "grid": grid,
        "abs_diff": abs,
        "rel_diff": if exact > 0.0 { abs / exact } else { abs },
        "steps_per_axis": steps,
    }))
}

fn usage_error(message: String) -> ! {
    Cli::command().error(ErrorKind::InvalidValue, message).exit()
}

fn run(cli: &Cli) -> Result<()> {
    let setup = load_setup(cli)?;
    let stdout = match &cli.command {
        Command::Check => render(&cmd_check(&setup), cli.format.unwrap_or(Format::Json)),
        Command::Rate => render(&cmd_rate(&setup), cli.format.unwrap_or(Format::Json)),
        Command::Oracle { steps_per_axis } => {
            render(&cmd_oracle(&setup, *steps_per_axis as usize)?, cli.format.unwrap_or(Format::Json))
        }
        Command::Scan { param, from, to, steps, reduce } => {
            let convert = |q: Quantity, flag: &str| {
                to_internal(*param, q).unwrap_or_else(|| {
                    usage_error(format!("--{flag} {}{} is not a valid {param} value", q.value, q.unit))
                })
            };
            let range = (convert(*from, "from"), convert(*to, "to"));
            let mut curve = scan(&setup, *param, range, *steps as usize, (*reduce).into())?;
            if *param == ScanParameter::Theta1 {
                curve = Curve {
                    parameter: "theta1_deg".into(),
                    points: curve.points.iter().map(|&(x, y)| (x.to_degrees(), y)).collect(),
                    ..curve
                };
            }
            let format = match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => CurveFormat::Csv,
                Format::Json => CurveFormat::Json,
            };
            write_curve(&curve, format)
        }
        Command::Events { frames, seed, bins, out_events, out_summary } => {
            let events = generate_events(&setup, *frames, *seed)?;
            let summary = count_coincidences(&events, *frames, setup.detectors.coincidence_window_ns, *bins as usize)?;
            let json = summary_json(&summary) + "\n";
            if let Some(path) = out_events {
                write_file(path, &write_events_csv(&events))?;
            }
            if let Some(path) = out_summary {
                write_file(path, &json)?;
            }
            eprintln!(
                "{} frames: {} D1, {} D2, {} coincidences",
                summary.n_frames, summary.singles_d1, summary.singles_d2, summary.coincidences
            );
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => json,
                Format::Csv => {
                    let mut out = String::from("dt_ps,count\n");
                    for (dt, n) in &summary.dt_histogram {
                        out.push_str(&format!("{dt},{n}\n"));
                    }
                    out
                }
            }
        }
    };
    print!("{stdout}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
