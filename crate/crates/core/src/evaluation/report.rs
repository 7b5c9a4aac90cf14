use std::io::Write;
use std::path::Path;

use super::benchmark::{BenchmarkOutcome, CorrelationReport, StimulusScore};
use super::EvalError;

/// Formats `v` with `digits` significant digits in the style of C's `%g`.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn g6(v: f64) -> String {
    format_significant(v, 6)
}

/// CSV with one row per report.
pub fn write_report_csv<W: Write>(reports: &[CorrelationReport], w: W) -> Result<(), EvalError> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| EvalError::Io(e.into());
    out.write_record([
        "group",
        "error_kind",
        "peak_spec",
        "k",
        "n",
        "plcc",
        "srocc",
        "monotone_fit",
        "beta1",
        "beta2",
        "beta3",
        "beta4",
    ])
    .map_err(io)?;
    for r in reports {
        let b = r.coefficients;
        out.write_record([
            r.group.clone(),
            r.variant.error.label().to_string(),
            r.variant.peak.label(),
            r.variant
                .peak
                .k()
                .map(|k| k.to_string())
                .unwrap_or_default(),
            r.n.to_string(),
            g6(r.plcc),
            g6(r.srocc),
            r.monotone_fit.to_string(),
            g6(b[0]),
            g6(b[1]),
            g6(b[2]),
            g6(b[3]),
        ])
        .map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

/// CSV with the pooled objective score of every stimulus and variant.
/// Infinite scores are written as an empty field.
pub fn write_scores_csv<W: Write>(scores: &[StimulusScore], w: W) -> Result<(), EvalError> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| EvalError::Io(e.into());
    out.write_record([
        "stimulus_id",
        "group",
        "error_kind",
        "peak_spec",
        "k",
        "score",
        "mos",
    ])
    .map_err(io)?;
    for s in scores {
        out.write_record([
            s.stimulus_id.clone(),
            s.group.clone(),
            s.variant.error.label().to_string(),
            s.variant.peak.label(),
            s.variant
                .peak
                .k()
                .map(|k| k.to_string())
                .unwrap_or_default(),
            s.score.map(g6).unwrap_or_default(),
            g6(s.mos),
        ])
        .map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `correlation.csv`, `scores.csv` and `report.json` into `dir`.
pub fn write_outputs(outcome: &BenchmarkOutcome, dir: &Path) -> Result<(), EvalError> {
    std::fs::create_dir_all(dir)?;
    write_report_csv(
        &outcome.reports,
        std::fs::File::create(dir.join("correlation.csv"))?,
    )?;
    write_scores_csv(
        &outcome.scores,
        std::fs::File::create(dir.join("scores.csv"))?,
    )?;
    let mut json = serde_json::to_vec_pretty(outcome).map_err(|e| EvalError::Io(e.into()))?;
    json.push(b'\n');
    std::fs::write(dir.join("report.json"), json)?;
    Ok(())
}
