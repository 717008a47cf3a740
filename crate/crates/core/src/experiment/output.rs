use serde::Serialize;

use super::commands::{CommandResult, PointReport, Report};
use super::config::Format;
use crate::error::{Error, Result};

/// One flat row per point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub z1_re: f64,
    pub z1_im: f64,
    pub z2_re: f64,
    pub z2_im: f64,
    /// `|ε|`
    pub epsilon: f64,
    /// `|s|`
    pub s: f64,
    pub delta: f64,
    pub eta: f64,
    pub green_upper: Option<f64>,
    pub green_lower: Option<f64>,
    pub lempert_best: Option<f64>,
    pub gap: Option<f64>,
    pub strict: Option<bool>,
}

impl CsvRow {
    pub fn from_point(p: &PointReport) -> Self {
        let c = &p.config;
        let (eps, s) = match c.pole_config() {
            Ok(pc) => (pc.epsilon().norm(), pc.s().norm()),
            Err(_) => (f64::NAN, f64::NAN),
        };
        let mut row = Self {
            z1_re: c.z[0][0],
            z1_im: c.z[0][1],
            z2_re: c.z[1][0],
            z2_im: c.z[1][1],
            epsilon: eps,
            s,
            delta: c.delta,
            eta: c.eta,
            green_upper: None,
            green_lower: None,
            lempert_best: None,
            gap: None,
            strict: None,
        };
        match &p.result {
            Some(CommandResult::GreenBound(r)) => {
                row.green_upper = Some(r.upper.value.as_f64());
                row.green_lower = Some(r.lower.value.as_f64());
            }
            Some(CommandResult::LempertSearch(r)) => {
                row.lempert_best = Some(r.outcome.best.objective.as_f64());
            }
            Some(CommandResult::Gap(r)) => {
                row.green_upper = r.green_upper.as_ref().map(|b| b.value.as_f64());
                row.green_lower = r.green_lower.as_ref().map(|b| b.value.as_f64());
                row.lempert_best = r.lempert.as_ref().map(|o| o.best.objective.as_f64());
                row.gap = r.verdict.map(|v| v.gap);
                row.strict = Some(r.strict);
            }
            Some(CommandResult::BallTransfer(r)) => {
                row.green_upper = Some(r.ball_upper.value.value);
                row.gap = Some(r.verdict.gap);
                row.strict = Some(r.verdict.strict);
            }
            Some(CommandResult::NeilVerify(_)) | Some(CommandResult::ChainCheck(_)) | None => {}
        }
        row
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))
}

pub fn to_csv(report: &Report) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in &report.points {
        w.serialize(CsvRow::from_point(p))
            .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report),
    }
}
