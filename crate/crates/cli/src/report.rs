//! Versioned JSON run reports.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

pub const SCHEMA: &str = "fracdirac-report/1";

/// One checked quantity.
#[derive(Debug, Clone, Serialize)]
pub struct Case {
    pub index: usize,
    pub label: String,
    pub inputs: Value,
    pub computed: Option<f64>,
    pub oracle: Option<f64>,
    /// Relative error, or the checked statistic for non-comparison cases.
    pub rel_err: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    pub max_rel_err: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub config: Value,
    pub cases: Vec<Case>,
    pub summary: Summary,
    /// Command-specific payload (traces, sweeps).
    pub extra: Value,
    pub wall_time_s: f64,
}

/// Accumulates cases in index order.
#[derive(Debug, Default)]
pub struct CaseList {
    cases: Vec<Case>,
}

impl CaseList {
    /// `|computed − oracle| / |oracle| ≤ tol`.
    pub fn compare(&mut self, label: impl Into<String>, inputs: Value, computed: f64, oracle: f64, tol: f64) {
        let err = ((computed - oracle) / oracle).abs();
        self.push(label, inputs, Some(computed), Some(oracle), Some(err), tol, err <= tol, None);
    }

    /// A statistic checked against a one-sided bound; `pass` decided by the caller.
    pub fn check(&mut self, label: impl Into<String>, inputs: Value, value: f64, tol: f64, pass: bool) {
        self.push(label, inputs, Some(value), None, Some(value), tol, pass, None);
    }

    /// A case whose computation failed.
    pub fn failed(&mut self, label: impl Into<String>, inputs: Value, tol: f64, error: String) {
        self.push(label, inputs, None, None, None, tol, false, Some(error));
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        label: impl Into<String>,
        inputs: Value,
        computed: Option<f64>,
        oracle: Option<f64>,
        rel_err: Option<f64>,
        tolerance: f64,
        pass: bool,
        error: Option<String>,
    ) {
        self.cases.push(Case {
            index: self.cases.len(),
            label: label.into(),
            inputs,
            computed,
            oracle,
            rel_err,
            tolerance,
            pass,
            error,
        });
    }

    pub fn finish(self, command: &str, config: Value, extra: Value, wall_time_s: f64) -> Report {
        let passed = self.cases.iter().filter(|c| c.pass).count();
        let max_rel_err = self
            .cases
            .iter()
            .filter(|c| c.oracle.is_some())
            .filter_map(|c| c.rel_err)
            .fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))));
        Report {
            schema: SCHEMA,
            command: command.to_string(),
            config,
            summary: Summary {
                cases: self.cases.len(),
                passed,
                failed: self.cases.len() - passed,
                max_rel_err,
            },
            cases: self.cases,
            extra,
            wall_time_s,
        }
    }
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> io::Result<Vec<u8>> {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, SignificantDigits::default());
        self.serialize(&mut ser).map_err(io::Error::other)?;
        out.push(b'\n');
        Ok(out)
    }
}

/// Pretty JSON with every float written as `d.dddddddddddddddde±x` (17 significant digits).
#[derive(Default)]
pub struct SignificantDigits {
    inner: PrettyFormatter<'static>,
}

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}
