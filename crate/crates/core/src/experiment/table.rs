use std::path::Path;

use super::run::{ExperimentReport, SummaryRow};
use super::ExperimentError;

pub const TABLE_HEADER: [&str; 7] = [
    "p",
    "T_p",
    "mode",
    "iterations",
    "model_cost",
    "fitted_C_bar",
    "error_vs_oracle",
];

/// Scientific notation with 3 significant digits and a signed two-digit
/// exponent, e.g. `1.49E-07`.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let raw = format!("{x:.2E}");
    let (mantissa, exp) = raw.split_once('E').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", exp.abs())
}

/// Fixed notation with at most 9 decimals and no trailing zeros.
fn format_fixed(x: f64) -> String {
    let s = format!("{x:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Table-1 layout, rows sorted by `(p, mode)`.
pub fn emit_table(rows: &[SummaryRow]) -> Result<String, ExperimentError> {
    let mut sorted: Vec<&SummaryRow> = rows.iter().collect();
    sorted.sort_by_key(|r| (r.p, r.mode));
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(TABLE_HEADER)?;
    for r in sorted {
        writer.write_record([
            r.p.to_string(),
            format_fixed(r.t_p),
            r.mode.name().to_string(),
            r.iterations.map(|k| k.to_string()).unwrap_or_default(),
            format_fixed(r.model_cost),
            r.fitted_c_bar.map(format_fixed).unwrap_or_default(),
            format_sci(r.error_vs_oracle),
        ])?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| ExperimentError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_report(dir: &Path) -> Result<ExperimentReport, ExperimentError> {
    let path = dir.join("report.json");
    let text = std::fs::read_to_string(&path).map_err(ExperimentError::io(&path))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Mode;

    fn row(p: usize, mode: Mode, err: f64) -> SummaryRow {
        SummaryRow {
            p,
            t_p: p as f64 * 0.2,
            mode,
            policy: None,
            seed: None,
            delay_bound: None,
            iterations: Some(10),
            events: None,
            model_cost: 288.99,
            fitted_c_bar: (mode == Mode::Sync).then_some(1.53),
            error_vs_oracle: err,
            converged: true,
            stop_reason: None,
            kappa_over_k: None,
            sync_converges: true,
            sync_margin: 0.1,
            async_converges: true,
            async_margin: 0.1,
            alpha: 0.1,
            alpha_tilde: 0.5,
        }
    }

    #[test]
    fn sci_format() {
        assert_eq!(format_sci(1.49e-7), "1.49E-07");
        assert_eq!(format_sci(4.95e-11), "4.95E-11");
        assert_eq!(format_sci(0.0), "0.00E+00");
        assert_eq!(format_sci(123.456), "1.23E+02");
    }

    #[test]
    fn single_sync_row() {
        let text = emit_table(&[row(16, Mode::Sync, 1.49e-7)]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "p,T_p,mode,iterations,model_cost,fitted_C_bar,error_vs_oracle"
        );
        assert_eq!(lines[1], "16,3.2,sync,10,288.99,1.53,1.49E-07");
    }

    #[test]
    fn sorted_by_p_then_mode() {
        let rows = [
            row(8, Mode::Async, 1e-8),
            row(4, Mode::Sync, 1e-7),
            row(8, Mode::Sequential, 0.0),
            row(4, Mode::Async, 1e-9),
        ];
        let text = emit_table(&rows).unwrap();
        let keys: Vec<String> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').take(3).collect::<Vec<_>>().join(","))
            .collect();
        assert_eq!(
            keys,
            vec![
                "4,0.8,sync",
                "4,0.8,async",
                "8,1.6,sequential",
                "8,1.6,async"
            ]
        );
    }

    #[test]
    fn empty_table_has_header() {
        assert_eq!(emit_table(&[]).unwrap().lines().count(), 1);
    }
}
