//! CSV emission for experiment results.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::{ExperimentReport, Setting};
use crate::classifiers::ClassifierKind;
use crate::error::{Error, Result};
use crate::rankers::Method;

/// How floats are printed in CSV output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Six significant digits, `%g` style.
    #[default]
    Six,
    /// Shortest representation that parses back to the same value.
    Full,
}

impl Precision {
    pub fn format(&self, x: f64) -> String {
        match self {
            Precision::Six => format_significant(x, 6),
            Precision::Full => format!("{x}"),
        }
    }
}

/// `%g`-style formatting with `digits` significant digits and trailing
/// zeros removed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Outcome of one (method, setting, classifier) combination.
#[derive(Debug, Clone)]
pub struct Combination {
    pub dataset: String,
    pub method: Method,
    pub setting: Setting,
    pub classifier: ClassifierKind,
    pub outcome: std::result::Result<ExperimentReport, String>,
}

impl Combination {
    /// File stem shared by this combination's detail files.
    pub fn stem(&self) -> String {
        format!("{}_{}_{}", self.method, self.setting, self.classifier)
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn finish(writer: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    let mut inner = writer.into_inner().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.into_error(),
    })?;
    inner.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

macro_rules! csv_try {
    ($path:expr, $e:expr) => {
        $e.map_err(|source| Error::Csv {
            path: $path.to_path_buf(),
            source,
        })?
    };
}

pub const REPORT_HEADER: [&str; 10] = [
    "dataset",
    "method",
    "setting",
    "classifier",
    "selected",
    "ca",
    "baseline_ca",
    "rho",
    "single_feature",
    "error",
];

/// One row per combination; failed combinations keep their key columns and
/// carry the error message.
pub fn write_report(path: &Path, rows: &[Combination], precision: Precision) -> Result<()> {
    let mut w = csv_writer(path)?;
    csv_try!(path, w.write_record(REPORT_HEADER));
    for row in rows {
        let key = [
            row.dataset.clone(),
            row.method.to_string(),
            row.setting.to_string(),
            row.classifier.to_string(),
        ];
        let rest = match &row.outcome {
            Ok(r) => [
                precision.format(r.selected),
                precision.format(r.ca),
                precision.format(r.baseline_ca),
                precision.format(r.rho),
                r.single_feature().to_string(),
                String::new(),
            ],
            Err(msg) => [
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                msg.clone(),
            ],
        };
        csv_try!(path, w.write_record(key.iter().chain(rest.iter())));
    }
    finish(w, path)
}

/// `n,accuracy` curve.
pub fn write_curve(path: &Path, curve: &[(usize, f64)], precision: Precision) -> Result<()> {
    let mut w = csv_writer(path)?;
    csv_try!(path, w.write_record(["n", "accuracy"]));
    for &(n, acc) in curve {
        csv_try!(path, w.write_record([n.to_string(), precision.format(acc)]));
    }
    finish(w, path)
}

/// Per-trial bests: `trial,best_n,best_accuracy,baseline_accuracy`.
pub fn write_trials(path: &Path, report: &ExperimentReport, precision: Precision) -> Result<()> {
    let mut w = csv_writer(path)?;
    csv_try!(path, w.write_record(["trial", "best_n", "best_accuracy", "baseline_accuracy"]));
    for t in &report.trials {
        csv_try!(
            path,
            w.write_record([
                t.trial.to_string(),
                t.sweep.best_n.to_string(),
                precision.format(t.sweep.best_accuracy),
                precision.format(t.sweep.baseline_accuracy),
            ])
        );
    }
    finish(w, path)
}

/// Per-trial curves: `trial,n,accuracy`.
pub fn write_trial_curves(path: &Path, report: &ExperimentReport, precision: Precision) -> Result<()> {
    let mut w = csv_writer(path)?;
    csv_try!(path, w.write_record(["trial", "n", "accuracy"]));
    for t in &report.trials {
        for &(n, acc) in &t.sweep.per_n {
            csv_try!(path, w.write_record([t.trial.to_string(), n.to_string(), precision.format(acc)]));
        }
    }
    finish(w, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_significant(21.894409937888196, 6), "21.8944");
        assert_eq!(format_significant(100.0, 6), "100");
        assert_eq!(format_significant(56.88, 6), "56.88");
        assert_eq!(format_significant(0.5, 6), "0.5");
        assert_eq!(format_significant(1234567.0, 6), "1.23457e+06");
        assert_eq!(format_significant(0.00001234, 6), "1.234e-05");
        assert_eq!(format_significant(-2.5, 6), "-2.5");
        assert_eq!(format_significant(0.0, 6), "0");
        assert_eq!(format_significant(999999.5, 6), "1e+06");
        assert_eq!(format_significant(f64::INFINITY, 6), "inf");
    }

    #[test]
    fn full_precision_round_trips() {
        let x = 1.0 / 3.0;
        assert_eq!(Precision::Full.format(x).parse::<f64>().unwrap(), x);
    }
}
