//! Result rows and their CSV encoding.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// How a row's error is compared with its tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// abs_err ≤ tolerance.
    Abs,
    /// rel_err ≤ tolerance.
    Rel,
    /// abs_err ≤ tolerance · error_bar (Monte Carlo comparisons).
    Sigma,
    /// No verdict; the row documents an intermediate value.
    Info,
}

impl Metric {
    fn name(self) -> &'static str {
        match self {
            Metric::Abs => "abs",
            Metric::Rel => "rel",
            Metric::Sigma => "sigma",
            Metric::Info => "info",
        }
    }
}

/// One line of a report.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub phantom: String,
    pub seed: u64,
    pub check: String,
    /// Plane frame flattened, followed by its offset (or another point descriptor).
    pub point: String,
    pub value: f64,
    pub reference: f64,
    /// |value − reference| for pointwise rows; the norm of the difference for aggregates.
    pub abs_err: f64,
    pub error_bar: f64,
    pub metric: Metric,
    pub tolerance: f64,
}

impl ResultRow {
    pub fn rel_err(&self) -> f64 {
        let r = self.reference.abs();
        if r > 0.0 {
            self.abs_err / r
        } else {
            self.abs_err
        }
    }

    pub fn pass(&self) -> bool {
        match self.metric {
            Metric::Abs => self.abs_err <= self.tolerance,
            Metric::Rel => self.rel_err() <= self.tolerance,
            Metric::Sigma => self.abs_err <= self.tolerance * self.error_bar,
            Metric::Info => true,
        }
    }
}

pub const HEADER: [&str; 13] = [
    "experiment",
    "phantom",
    "seed",
    "check",
    "point",
    "value",
    "reference",
    "abs_err",
    "rel_err",
    "error_bar",
    "metric",
    "tolerance",
    "pass",
];

/// Writes the rows as CSV (header first, LF line endings, minimal RFC-4180 quoting, floats in
/// shortest round-trip form).
pub fn emit_csv(rows: &[ResultRow], out: impl Write) -> Result<()> {
    if rows.is_empty() {
        bail!("refusing to write an empty report");
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        let tol = if r.metric == Metric::Info { String::new() } else { fmt_f64(r.tolerance) };
        w.write_record([
            r.experiment.clone(),
            r.phantom.clone(),
            r.seed.to_string(),
            r.check.clone(),
            r.point.clone(),
            fmt_f64(r.value),
            fmt_f64(r.reference),
            fmt_f64(r.abs_err),
            fmt_f64(r.rel_err()),
            fmt_f64(r.error_bar),
            r.metric.name().to_string(),
            tol,
            r.pass().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip decimal: positional or scientific, whichever is shorter.
pub fn fmt_f64(x: f64) -> String {
    let plain = x.to_string();
    let sci = format!("{x:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    emit_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    emit_csv(rows, std::io::BufWriter::new(file))
}

/// Exit status implied by the rows.
pub fn all_pass(rows: &[ResultRow]) -> bool {
    rows.iter().all(ResultRow::pass)
}

/// Formats numbers as a bracketed, space-separated list.
pub fn format_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", parts.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(name: &str) -> ResultRow {
        ResultRow {
            experiment: "e".into(),
            phantom: name.into(),
            seed: 1,
            check: "c".into(),
            point: "[0 1]".into(),
            value: 0.1,
            reference: 0.3,
            abs_err: 0.19999999999999998,
            error_bar: 0.0,
            metric: Metric::Rel,
            tolerance: 0.7,
        }
    }

    #[test]
    fn single_row_gives_two_lines() {
        let s = csv_string(&[row("gaussian")]).unwrap();
        assert_eq!(s.lines().count(), 2);
        assert!(s.ends_with('\n') && !s.contains('\r'));
        assert!(s.contains(",0.1,0.3,0.19999999999999998,"));
    }

    #[test]
    fn floats_round_trip_in_short_form() {
        for x in [0.1, 1e-15, 6.8542513752017814e-15, 123456.75, 1e300, -2.5e-7, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert!(s.len() <= x.to_string().len());
        }
        assert_eq!(fmt_f64(1e-15), "1e-15");
        assert_eq!(fmt_f64(0.25), "0.25");
    }

    #[test]
    fn empty_reports_are_rejected() {
        assert!(csv_string(&[]).is_err());
    }

    #[test]
    fn awkward_names_are_quoted() {
        let s = csv_string(&[row("Gauß, \"shifted\"")]).unwrap();
        assert!(s.contains("\"Gauß, \"\"shifted\"\"\""), "{s}");
    }

    #[test]
    fn verdicts_follow_the_metric() {
        let mut r = row("g");
        assert!(r.pass());
        r.tolerance = 0.5;
        r.metric = Metric::Abs;
        assert!(r.pass());
        r.metric = Metric::Sigma;
        r.error_bar = 0.01;
        r.tolerance = 3.0;
        assert!(!r.pass());
        r.metric = Metric::Info;
        assert!(r.pass());
    }
}
