//! CSV and JSON serialization of curves.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scan::{Curve, YKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveFormat {
    Csv,
    Json,
}

impl FromStr for CurveFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(CurveFormat::Csv),
            "json" => Ok(CurveFormat::Json),
            _ => Err(Error::InvalidArgument(format!("unknown format `{s}` (csv or json)"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CurveJson {
    parameter: String,
    y_kind: YKind,
    points: Vec<[f64; 2]>,
}

pub fn write_curve(curve: &Curve, format: CurveFormat) -> String {
    match format {
        CurveFormat::Csv => {
            let mut out = format!("# parameter={} y_kind={}\n", curve.parameter, curve.y_kind.as_str());
            for (x, y) in &curve.points {
                let _ = writeln!(out, "{x:.16e},{y:.16e}");
            }
            out
        }
        CurveFormat::Json => {
            let doc = CurveJson {
                parameter: curve.parameter.clone(),
                y_kind: curve.y_kind,
                points: curve.points.iter().map(|&(x, y)| [x, y]).collect(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("curve serializes");
            s.push('\n');
            s
        }
    }
}

/// Inverse of [`write_curve`]; the format is detected from the first character.
pub fn read_curve(text: &str) -> Result<Curve> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let doc: CurveJson = serde_json::from_str(trimmed).map_err(|e| Error::CurveFormat(e.to_string()))?;
        return Ok(Curve {
            parameter: doc.parameter,
            y_kind: doc.y_kind,
            points: doc.points.into_iter().map(|[x, y]| (x, y)).collect(),
        });
    }
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::CurveFormat("empty input".into()))?;
    let rest = header
        .strip_prefix("# ")
        .ok_or_else(|| Error::CurveFormat(format!("bad header `{header}`")))?;
    let mut parameter = None;
    let mut y_kind = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("parameter", v)) => parameter = Some(v.to_string()),
            Some(("y_kind", v)) => y_kind = Some(v.parse::<YKind>()?),
            _ => return Err(Error::CurveFormat(format!("bad header field `{field}`"))),
        }
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::CurveFormat(format!("row {}: bad number `{s}`", i + 2)))
        };
        let (x, y) = line
            .split_once(',')
            .ok_or_else(|| Error::CurveFormat(format!("row {}: expected `x,y`", i + 2)))?;
        points.push((parse(x)?, parse(y)?));
    }
    Ok(Curve {
        parameter: parameter.ok_or_else(|| Error::CurveFormat("header lacks parameter".into()))?,
        y_kind: y_kind.ok_or_else(|| Error::CurveFormat("header lacks y_kind".into()))?,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_point() -> Curve {
        Curve { parameter: "tau".into(), y_kind: YKind::Rate, points: vec![(1.0, 0.5), (2.0, 1.0 / 3.0)] }
    }

    #[test]
    fn csv_layout() {
        let text = write_curve(&two_point(), CurveFormat::Csv);
        let lines: Vec<&str> = text.split('\n').filter(|l| !l.is_empty()).collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "# parameter=tau y_kind=RATE");
        assert_eq!(lines[1], "1.0000000000000000e0,5.0000000000000000e-1");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn json_layout() {
        let text = write_curve(&two_point(), CurveFormat::Json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["parameter"], "tau");
        assert_eq!(v["y_kind"], "RATE");
        assert_eq!(v["points"][1][0], 2.0);
    }

    #[test]
    fn malformed_input() {
        assert!(read_curve("").is_err());
        assert!(read_curve("x,y\n1,2").is_err());
        assert!(read_curve("# parameter=a y_kind=NOPE\n").is_err());
        assert!(read_curve("# parameter=a y_kind=RATE\n1;2").is_err());
        assert!(read_curve("{\"parameter\": 1}").is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_is_lossless(
            ys in proptest::collection::vec(0.0f64..1e6, 1..40),
            x0 in -1e4f64..1e4,
            json in any::<bool>(),
        ) {
            let curve = Curve {
                parameter: "pump_phase_path".into(),
                y_kind: YKind::Counts,
                points: ys.iter().enumerate().map(|(i, &y)| (x0 + i as f64 * 0.37, y)).collect(),
            };
            let fmt = if json { CurveFormat::Json } else { CurveFormat::Csv };
            let text = write_curve(&curve, fmt);
            let back = read_curve(&text).unwrap();
            prop_assert_eq!(&back, &curve);
            prop_assert_eq!(write_curve(&back, fmt), text);
        }
    }
}
