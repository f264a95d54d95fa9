use std::fmt::Write as _;
use std::path::Path;

use super::sweep::SweepResult;

pub const CSV_HEADER: &str = "n,pairing,interleaved,run,aggregate,snr_db,kl_bits,kurtosis,run_ratio,\
run_ratio_abs,run_ratio_arg,ci_low_db,ci_high_db,seed,wall_s";

/// Formats `v` with 6 significant digits in the style of C's `%g`.
pub fn format_g6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..6).contains(&exp) {
        trim(&format!("{:.*}", (5 - exp) as usize, v))
    } else {
        format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_g6).unwrap_or_default()
}

/// Renders the sweep as CSV: per point, its run rows followed by its aggregate row.
pub fn render_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for agg in &result.aggregates {
        let p = &agg.point;
        let coords = format!("{},{},{}", p.block_length(), p.pairing_label(), u8::from(p.interleaved));
        for r in result.runs.iter().filter(|r| r.point == *p) {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{coords},{},0,{},{},{},{},{},{},,,{},{}",
                r.run,
                opt(r.snr_db),
                format_g6(m.kl_bits),
                format_g6(m.kurtosis),
                format_g6(m.run_ratio),
                format_g6(m.run_ratio_abs),
                format_g6(m.run_ratio_arg),
                r.seed,
                opt(r.wall_s),
            );
        }
        let _ = writeln!(
            out,
            "{coords},,1,{},{},{},{},{},{},{},{},,",
            opt(agg.snr_db),
            format_g6(agg.kl_bits),
            format_g6(agg.kurtosis),
            format_g6(agg.run_ratio),
            format_g6(agg.run_ratio_abs),
            format_g6(agg.run_ratio_arg),
            opt(agg.ci_db.map(|c| c.0)),
            opt(agg.ci_db.map(|c| c.1)),
        );
    }
    out
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, render_csv(result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sweep::{aggregate, PointKind, RunRow, SweepPoint};
    use crate::mapping::PairingMode;
    use crate::metrics::MetricsReport;

    #[test]
    fn g6_formatting() {
        assert_eq!(format_g6(21.53264), "21.5326");
        assert_eq!(format_g6(1.0), "1");
        assert_eq!(format_g6(0.000123456789), "0.000123457");
        assert_eq!(format_g6(4.5e-5), "4.5e-05");
        assert_eq!(format_g6(1234567.0), "1.23457e+06");
        assert_eq!(format_g6(999999.7), "1e+06");
        assert_eq!(format_g6(-0.5), "-0.5");
        assert_eq!(format_g6(f64::INFINITY), "inf");
        assert_eq!(format_g6(0.0), "0");
    }

    #[test]
    fn empty_sweep_is_header_only() {
        assert_eq!(render_csv(&SweepResult::default()), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn rows_and_aggregate() {
        let point = SweepPoint {
            kind: PointKind::Shaped {
                pairing: PairingMode::Intra,
                n: 10,
            },
            interleaved: false,
        };
        let m = MetricsReport {
            kl_bits: 0.1,
            kurtosis: 1.6,
            run_ratio: 0.8,
            run_ratio_abs: 0.7,
            run_ratio_arg: 0.75,
            n_sim: 10,
        };
        let runs: Vec<RunRow> = [20.0, 21.0]
            .iter()
            .enumerate()
            .map(|(i, &s)| RunRow {
                point,
                run: i,
                seed: 7 + i as u64,
                snr_db: Some(s),
                metrics: m,
                wall_s: None,
                error: None,
            })
            .collect();
        let result = SweepResult {
            aggregates: aggregate(&runs),
            runs,
        };
        let csv = render_csv(&result);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "10,intra,0,0,0,20,0.1,1.6,0.8,0.7,0.75,,,7,");
        assert!(lines[3].starts_with("10,intra,0,,1,20.5,0.1,1.6,0.8,0.7,0.75,"));
        assert_eq!(lines[3].split(',').count(), 15);
    }
}
