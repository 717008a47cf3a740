//! Offline re-validation of emitted reports.

use serde::{Deserialize, Serialize};

use super::commands::{CommandResult, Report, RESIDUAL_TOL, SCHEMA};
use super::config::RunConfig;
use crate::ball::gap_verdict;
use crate::certificate::{evaluate_chain, ChainParams};
use crate::error::{Error, Result};
use crate::green::{BoundReport, Witness};
use crate::lempert::{feasible, objective, SearchOutcome, PROB_TOL};
use crate::neil::{build_neil_with_eta, containment_margin, NeilDisk, DEFAULT_CONTAINMENT_SAMPLES};
use crate::pick::{prob_residual, FactorizedDisk};

/// Agreement required between a stored value and its recomputation.
pub const REVALIDATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub point: usize,
    pub name: String,
    /// Discrepancy or margin, depending on the check.
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub command: String,
    pub source_command: String,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

struct Checks {
    point: usize,
    out: Vec<Check>,
}

impl Checks {
    /// Passes when `value <= tol`.
    fn at_most(&mut self, name: &str, value: f64, tol: f64) {
        self.push(name, value, value <= tol);
    }

    /// Passes when `value > 0`.
    fn positive(&mut self, name: &str, value: f64) {
        self.push(name, value, value > 0.0);
    }

    fn push(&mut self, name: &str, value: f64, pass: bool) {
        self.out.push(Check {
            point: self.point,
            name: name.to_string(),
            value,
            pass,
        });
    }

    fn error(&mut self, name: &str, e: Error) {
        self.push(&format!("{name}: {e}"), f64::NAN, false);
    }
}

pub fn parse_report(text: &str) -> Result<Report> {
    let r: Report =
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("not a report: {e}")))?;
    if r.schema != SCHEMA {
        return Err(Error::InvalidParameter(format!("unsupported schema '{}'", r.schema)));
    }
    Ok(r)
}

pub fn verify_report(report: &Report) -> VerifyReport {
    let mut all = Vec::new();
    for (i, p) in report.points.iter().enumerate() {
        let mut c = Checks { point: i, out: Vec::new() };
        if let Some(r) = &p.result {
            verify_result(&mut c, &p.config, r);
        }
        all.extend(c.out);
    }
    let all_pass = all.iter().all(|c| c.pass);
    VerifyReport {
        schema: SCHEMA.to_string(),
        command: "verify".to_string(),
        source_command: serde_json::to_value(report.command)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default(),
        checks: all,
        all_pass,
    }
}

fn verify_result(c: &mut Checks, cfg: &RunConfig, r: &CommandResult) {
    match r {
        CommandResult::NeilVerify(r) => {
            verify_neil(c, "neil", &r.disk, r.disk.eta);
        }
        CommandResult::GreenBound(r) => {
            verify_bound(c, "upper", &r.upper);
            verify_bound(c, "lower", &r.lower);
            let ordered = r.upper.value.as_f64() - r.lower.value.as_f64();
            c.push("ordered", ordered, r.ordered == (ordered >= -crate::green::SANDWICH_SLACK));
        }
        CommandResult::LempertSearch(r) => verify_search(c, cfg, &r.outcome),
        CommandResult::ChainCheck(r) => {
            let params = ChainParams::unchecked(r.params.delta, r.params.z, r.params.cfg);
            match params.and_then(|p| evaluate_chain(&p, &r.candidate)) {
                // compare serialized forms so NaN margins match themselves
                Ok(t) => {
                    let same = serde_json::to_string(&t).ok() == serde_json::to_string(&r.trace).ok();
                    c.push("chain re-evaluation", 0.0, same)
                }
                Err(e) => c.error("chain re-evaluation", e),
            }
        }
        CommandResult::Gap(r) => {
            if let Some(b) = &r.green_upper {
                verify_bound(c, "bidisk upper", b);
            }
            if let Some(b) = &r.green_lower {
                verify_bound(c, "lower", b);
            }
            if let Some(o) = &r.lempert {
                verify_search(c, cfg, o);
            }
            if let Some(b) = &r.ball_upper {
                verify_bound(c, "ball upper (scaled data)", &b.scaled_report);
                c.at_most(
                    "ball upper equals scaled bound",
                    (b.value.value - b.scaled_report.value.as_f64()).abs(),
                    REVALIDATE_TOL,
                );
            }
            if let (Some(lo), Some(up), Some(v)) = (&r.ball_lower, &r.ball_upper, &r.verdict) {
                let again = gap_verdict(lo.value, up.value.value);
                let d = (again.gap - v.gap).abs();
                c.push("gap verdict", d, d <= REVALIDATE_TOL && again.strict == v.strict);
            }
        }
        CommandResult::BallTransfer(r) => {
            verify_bound(c, "bidisk upper", &r.bidisk_upper);
            verify_bound(c, "ball upper (scaled data)", &r.ball_upper.scaled_report);
            let again = gap_verdict(r.ball_lower.value, r.ball_upper.value.value);
            let d = (again.gap - r.verdict.gap).abs();
            c.push("gap verdict", d, d <= REVALIDATE_TOL && again.strict == r.verdict.strict);
        }
    }
}

fn verify_bound(c: &mut Checks, name: &str, b: &BoundReport) {
    match b.revalidate() {
        Ok(d) => c.at_most(&format!("{name}: witness value"), d, REVALIDATE_TOL),
        Err(e) => c.error(&format!("{name}: witness value"), e),
    }
    if let Witness::NeilDisk { disk, eta, .. } = &b.witness {
        verify_neil(c, name, disk, *eta);
    }
}

fn verify_neil(c: &mut Checks, name: &str, disk: &NeilDisk, eta: f64) {
    c.at_most(
        &format!("{name}: pole passages"),
        disk.passage_residuals().max(),
        RESIDUAL_TOL,
    );
    match build_neil_with_eta(&disk.source_z, &disk.source_cfg, eta) {
        Ok(again) => {
            let diff = [
                again.lambda - disk.lambda,
                again.mu - disk.mu,
                again.zeta_z - disk.zeta_z,
            ]
            .iter()
            .map(|d| d.norm())
            .fold(0.0, f64::max);
            c.at_most(&format!("{name}: disk rebuild"), diff, REVALIDATE_TOL);
        }
        Err(e) => c.error(&format!("{name}: disk rebuild"), e),
    }
    match containment_margin(disk, eta, DEFAULT_CONTAINMENT_SAMPLES) {
        Ok(m) => c.positive(&format!("{name}: containment"), m),
        Err(e) => c.error(&format!("{name}: containment"), e),
    }
}

fn verify_search(c: &mut Checks, run: &RunConfig, o: &SearchOutcome) {
    let (z, cfg) = match run.point().and_then(|z| Ok((z, run.pole_config()?))) {
        Ok(v) => v,
        Err(e) => return c.error("lempert: config", e),
    };
    let best = &o.best;
    match feasible(best, &z, &cfg) {
        Ok(f) => c.push(
            "lempert: feasibility",
            f.modulus_margins.iter().chain(&f.pick_margins).copied().fold(f64::INFINITY, f64::min),
            f.feasible,
        ),
        Err(e) => c.error("lempert: feasibility", e),
    }
    let obj = objective(best).as_f64();
    c.at_most("lempert: objective", (obj - best.objective.as_f64()).abs(), REVALIDATE_TOL);
    let disk = match (best.zeta1, best.zeta2) {
        (Some(a), Some(b)) => FactorizedDisk::through_poles(&z, &cfg, best.zeta0, a, b),
        _ => FactorizedDisk::through_origin(&z, best.zeta0),
    };
    match disk {
        Ok(d) => c.at_most(
            "lempert: interpolation",
            prob_residual(&d, &z, &cfg, best.zeta0),
            PROB_TOL,
        ),
        Err(e) => c.error("lempert: interpolation", e),
    }
}
