//! Result records and serialization.
//!
//! Two formats, both losslessly round-trippable:
//!
//! - JSON via serde (`solve` reports and sweep tables),
//! - CSV with a units header row, `.` decimal separator and 17 significant
//!   digits — enough that parse-then-reformat reproduces the bytes exactly.

use crate::error::{Error, Result};
use crate::matching::MatchingSolution;
use crate::series::{Cutoff, PhaseShift, ScatteringResult};
use serde::{Deserialize, Serialize};

/// Format a float with 17 significant digits (1 leading + 16 after the
/// point in scientific notation).  This is the unique-decimal length for
/// IEEE doubles: `parse(fmt(x)) == x` bit-for-bit.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidInput(format!(
                "unknown format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// Flat record of one solved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub class: String,
    /// Wave number, units 1/length.
    pub k: f64,
    pub l: u32,
    /// Matching radius, units length.
    pub r_match: f64,
    /// Core exponent at the matching radius (dimensionless).
    pub stage: f64,
    /// Coupling strength, units 1/length^2.
    pub g2: f64,
    pub cutoff_eps: usize,
    pub cutoff_tau: usize,
    /// Principal-value phase shift, radians.
    pub delta: f64,
    /// Accumulated half-turns beyond the principal value.
    pub branches: i64,
    /// Far boundary used for phase extraction, in units of `r_match`.
    pub t_far: f64,
}

impl SolveReport {
    pub fn from_result(res: &ScatteringResult) -> SolveReport {
        SolveReport {
            class: res.sol.class.tag().to_string(),
            k: res.sol.k,
            l: res.sol.triad.l,
            r_match: res.sol.r_match,
            stage: res.sol.stage,
            g2: res.sol.g2,
            cutoff_eps: res.coeffs.cutoff.eps,
            cutoff_tau: res.coeffs.cutoff.tau,
            delta: res.phase.principal,
            branches: res.phase.branches,
            t_far: res.t_far,
        }
    }

    pub fn from_parts(
        sol: &MatchingSolution,
        cutoff: Cutoff,
        phase: PhaseShift,
        t_far: f64,
    ) -> SolveReport {
        SolveReport {
            class: sol.class.tag().to_string(),
            k: sol.k,
            l: sol.triad.l,
            r_match: sol.r_match,
            stage: sol.stage,
            g2: sol.g2,
            cutoff_eps: cutoff.eps,
            cutoff_tau: cutoff.tau,
            delta: phase.principal,
            branches: phase.branches,
            t_far,
        }
    }
}

/// CSV header: column names with units in brackets.
pub const CSV_HEADER: &str = "class,k[1/length],l,r_match[length],stage,g2[1/length^2],cutoff_eps,cutoff_tau,delta[rad],branches,t_far";

/// One report as a CSV line.
pub fn to_csv_row(r: &SolveReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.class,
        fmt_f64(r.k),
        r.l,
        fmt_f64(r.r_match),
        fmt_f64(r.stage),
        fmt_f64(r.g2),
        r.cutoff_eps,
        r.cutoff_tau,
        fmt_f64(r.delta),
        r.branches,
        fmt_f64(r.t_far),
    )
}

/// A full CSV document (header + rows + trailing newline).
pub fn to_csv(rows: &[SolveReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&to_csv_row(r));
        out.push('\n');
    }
    out
}

/// Parse a CSV document produced by [`to_csv`].
pub fn from_csv(text: &str) -> Result<Vec<SolveReport>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        Some(h) => {
            return Err(Error::InvalidInput(format!("unexpected CSV header: {h}")));
        }
        None => return Err(Error::InvalidInput("empty CSV document".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(Error::InvalidInput(format!(
                "CSV row {}: expected 11 fields, got {}",
                i + 2,
                fields.len()
            )));
        }
        let parse_f = |s: &str, name: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("CSV row {}: bad {name} '{s}'", i + 2)))
        };
        let parse_u = |s: &str, name: &str| -> Result<u64> {
            s.parse::<u64>()
                .map_err(|_| Error::InvalidInput(format!("CSV row {}: bad {name} '{s}'", i + 2)))
        };
        rows.push(SolveReport {
            class: fields[0].to_string(),
            k: parse_f(fields[1], "k")?,
            l: parse_u(fields[2], "l")? as u32,
            r_match: parse_f(fields[3], "r_match")?,
            stage: parse_f(fields[4], "stage")?,
            g2: parse_f(fields[5], "g2")?,
            cutoff_eps: parse_u(fields[6], "cutoff_eps")? as usize,
            cutoff_tau: parse_u(fields[7], "cutoff_tau")? as usize,
            delta: parse_f(fields[8], "delta")?,
            branches: fields[9].parse::<i64>().map_err(|_| {
                Error::InvalidInput(format!("CSV row {}: bad branches '{}'", i + 2, fields[9]))
            })?,
            t_far: parse_f(fields[10], "t_far")?,
        });
    }
    Ok(rows)
}

/// JSON document for a list of reports.
pub fn to_json(rows: &[SolveReport]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rows)
        .map_err(|e| Error::InvalidInput(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Parse a JSON document produced by [`to_json`].
pub fn from_json(text: &str) -> Result<Vec<SolveReport>> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("JSON parse: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<SolveReport> {
        vec![
            SolveReport {
                class: "EEE".into(),
                k: 1.0,
                l: 0,
                r_match: 2.0,
                stage: 8.0 + 2.0 * (31.0f64 / 32.0).ln(),
                g2: (0.25f64).exp().recip(),
                cutoff_eps: 2,
                cutoff_tau: 2,
                delta: -0.731,
                branches: -1,
                t_far: 5.5,
            },
            SolveReport {
                class: "PPP".into(),
                k: 1.5,
                l: 1,
                r_match: 7.0,
                stage: 123.456789012345678,
                g2: 1e-30,
                cutoff_eps: 0,
                cutoff_tau: 0,
                delta: 0.1,
                branches: 0,
                t_far: 3.0,
            },
        ]
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let rows = sample();
        let text = to_csv(&rows);
        let back = from_csv(&text).unwrap();
        assert_eq!(rows, back);
        assert_eq!(text, to_csv(&back));
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let rows = sample();
        let text = to_json(&rows).unwrap();
        let back = from_json(&text).unwrap();
        assert_eq!(rows, back);
        assert_eq!(text, to_json(&back).unwrap());
    }

    #[test]
    fn fmt_is_lossless() {
        for &x in &[0.1, std::f64::consts::PI, 1e-300, -7.936502562486255, 1e307] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            assert!(s.contains('.') || s.contains('e'));
            assert!(!s.contains(','));
        }
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(from_csv("a,b,c\n1,2,3\n").is_err());
    }
}
