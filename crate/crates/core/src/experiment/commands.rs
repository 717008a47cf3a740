use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{to_complex, RunConfig};
use crate::ball::{gap_verdict, green_upper_in_ball, lempert_lower_in_ball, BallGreenBound, GapVerdict, TaggedValue};
use crate::certificate::{
    disprove_below_threshold, evaluate_chain, probe_below_threshold, sample_below_threshold, ChainParams,
    ChainTrace, DisproofReport,
};
use crate::error::{Error, Result};
use crate::green::{green_lower_report, green_upper_from_neil, sandwich, BoundReport, SANDWICH_SLACK};
use crate::lempert::{search, CandidateData, SearchOutcome};
use crate::neil::{build_neil_with_eta, containment_margin, NeilDisk, PassageResiduals, PoleMode};

pub const SCHEMA: &str = "plurigap/1";
/// Tolerance on pole-passage and target residuals of a Neil disk.
pub const RESIDUAL_TOL: f64 = 1e-9;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_OUT_OF_REGIME: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    NeilVerify,
    GreenBound,
    LempertSearch,
    ChainCheck,
    Gap,
    BallTransfer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeilVerifyResult {
    pub disk: NeilDisk,
    pub residuals: PassageResiduals,
    pub residual_max: f64,
    /// `|ζ_z|` against `|z₂|^{1/2}`.
    pub zeta_z_modulus: f64,
    pub sqrt_z2_modulus: f64,
    pub modzeta_deviation: f64,
    pub modzeta_within_eta: bool,
    pub containment_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenBoundResult {
    pub upper: BoundReport,
    pub lower: BoundReport,
    pub ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LempertResult {
    pub outcome: SearchOutcome,
    /// `(2−δ) log|z₂|` in three-pole mode.
    pub threshold: Option<f64>,
    pub below_threshold: Option<bool>,
    /// `log max(|z₁|,|z₂|)` in single-pole mode.
    pub single_pole_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainResult {
    pub params: ChainParams,
    pub regime_violations: Vec<String>,
    pub candidate: CandidateData,
    pub trace: ChainTrace,
    pub disproof: Option<DisproofReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    pub lempert_threshold: f64,
    pub regime_violations: Vec<String>,
    pub green_upper: Option<BoundReport>,
    pub green_lower: Option<BoundReport>,
    pub lempert: Option<SearchOutcome>,
    /// No feasible candidate was found below the threshold.
    pub threshold_respected: Option<bool>,
    pub chain: Option<DisproofReport>,
    pub ball_upper: Option<BallGreenBound>,
    pub ball_lower: Option<TaggedValue>,
    pub verdict: Option<GapVerdict>,
    /// The gap is positive and the lower bound is unrefuted.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallTransferResult {
    pub lempert_threshold: f64,
    pub bidisk_upper: BoundReport,
    pub ball_upper: BallGreenBound,
    pub ball_lower: TaggedValue,
    pub verdict: GapVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "data", rename_all = "kebab-case")]
// One value per point, built once and serialized; boxing buys nothing.
#[allow(clippy::large_enum_variant)]
pub enum CommandResult {
    NeilVerify(NeilVerifyResult),
    GreenBound(GreenBoundResult),
    LempertSearch(LempertResult),
    ChainCheck(ChainResult),
    Gap(GapResult),
    BallTransfer(BallTransferResult),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub config: RunConfig,
    pub exit_code: i32,
    pub messages: Vec<String>,
    pub result: Option<CommandResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: Command,
    pub config: RunConfig,
    /// First nonzero point exit code, or 0.
    pub exit_code: i32,
    pub points: Vec<PointReport>,
}

pub fn exit_code_for(e: &Error) -> i32 {
    if e.is_out_of_regime() {
        EXIT_OUT_OF_REGIME
    } else {
        EXIT_CHECK_FAILED
    }
}

/// Outcome of one point before it is wrapped in a [`PointReport`].
struct Step {
    exit_code: i32,
    messages: Vec<String>,
    result: Option<CommandResult>,
}

impl Step {
    fn ok(result: CommandResult) -> Self {
        Self {
            exit_code: EXIT_OK,
            messages: Vec::new(),
            result: Some(result),
        }
    }

    fn failed(e: &Error) -> Self {
        Self {
            exit_code: exit_code_for(e),
            messages: vec![e.to_string()],
            result: None,
        }
    }

    fn check(&mut self, holds: bool, message: impl FnOnce() -> String) {
        if !holds {
            self.messages.push(message());
            if self.exit_code == EXIT_OK {
                self.exit_code = EXIT_CHECK_FAILED;
            }
        }
    }
}

/// Runs a command on every point of the (possibly swept) config.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Report> {
    let points = cfg.expand_sweep()?;
    let points: Vec<PointReport> = points
        .into_iter()
        .map(|pc| {
            let step = run_point(command, &pc);
            PointReport {
                config: pc,
                exit_code: step.exit_code,
                messages: step.messages,
                result: step.result,
            }
        })
        .collect();
    let exit_code = points.iter().map(|p| p.exit_code).find(|&c| c != EXIT_OK).unwrap_or(EXIT_OK);
    Ok(Report {
        schema: SCHEMA.to_string(),
        command,
        config: cfg.clone(),
        exit_code,
        points,
    })
}

fn run_point(command: Command, cfg: &RunConfig) -> Step {
    let f = match command {
        Command::NeilVerify => neil_verify,
        Command::GreenBound => green_bound,
        Command::LempertSearch => lempert_search,
        Command::ChainCheck => chain_check,
        Command::Gap => gap,
        Command::BallTransfer => ball_transfer,
    };
    f(cfg).unwrap_or_else(|e| Step::failed(&e))
}

fn neil_verify(cfg: &RunConfig) -> Result<Step> {
    let z = cfg.point()?;
    let poles = cfg.pole_config()?;
    let disk = build_neil_with_eta(&z, &poles, cfg.eta)?;
    let residuals = disk.passage_residuals();
    let margin = containment_margin(&disk, cfg.eta, cfg.containment_samples)?;
    let zeta_z_modulus = disk.zeta_z.norm();
    let sqrt_z2_modulus = z.z2().norm().sqrt();
    let deviation = (zeta_z_modulus - sqrt_z2_modulus).abs();
    let result = NeilVerifyResult {
        disk,
        residuals,
        residual_max: residuals.max(),
        zeta_z_modulus,
        sqrt_z2_modulus,
        modzeta_deviation: deviation,
        modzeta_within_eta: deviation <= cfg.eta,
        containment_margin: margin,
    };
    let mut step = Step::ok(CommandResult::NeilVerify(result));
    step.check(residuals.max() < RESIDUAL_TOL, || {
        format!("pole-passage residual {:e} exceeds {RESIDUAL_TOL:e}", residuals.max())
    });
    if !(margin > 0.0) {
        step.messages.push(Error::ContainmentFailed { margin }.to_string());
        step.exit_code = EXIT_OUT_OF_REGIME;
    }
    if deviation > cfg.eta {
        step.messages
            .push(format!("||zeta_z| - |z2|^(1/2)| = {deviation:e} exceeds eta (point outside the asymptotic regime)"));
    }
    Ok(step)
}

fn green_bound(cfg: &RunConfig) -> Result<Step> {
    let z = cfg.point()?;
    let poles = cfg.pole_config()?;
    let (lower, upper) = sandwich(&poles, &z, cfg.eta)?;
    let ordered = lower.value.as_f64() <= upper.value.as_f64() + SANDWICH_SLACK;
    let mut step = Step::ok(CommandResult::GreenBound(GreenBoundResult { upper, lower, ordered }));
    step.check(ordered, || "lower oracle exceeds the Neil upper bound".into());
    Ok(step)
}

fn lempert_search(cfg: &RunConfig) -> Result<Step> {
    let z = cfg.point()?;
    let poles = cfg.pole_config()?;
    let outcome = search(&z, &poles, &cfg.search_config())?;
    let best = outcome.best.objective.as_f64();
    let (threshold, below, single) = match poles.mode() {
        PoleMode::Triple => {
            let t = (2.0 - cfg.delta) * z.z2().norm().ln();
            (Some(t), Some(best < t), None)
        }
        PoleMode::SingleOrigin => (None, None, Some(z.sup_norm().ln())),
    };
    let mut step = Step::ok(CommandResult::LempertSearch(LempertResult {
        outcome,
        threshold,
        below_threshold: below,
        single_pole_value: single,
    }));
    if below == Some(true) {
        step.messages.push(format!(
            "feasible candidate with objective {best} below (2-delta) log|z2| = {}",
            threshold.unwrap_or_default()
        ));
    }
    Ok(step)
}

fn chain_check(cfg: &RunConfig) -> Result<Step> {
    let z = cfg.point()?;
    let poles = cfg.pole_config()?;
    let params = ChainParams::unchecked(cfg.delta, z, poles)?;
    let violations = params.regime_violations().unwrap_or_default();
    let candidate = match cfg.candidate {
        Some([a, b, c]) => CandidateData::triple(&z, &poles, to_complex(a), to_complex(b), to_complex(c))?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            sample_below_threshold(&params, &mut rng)?
        }
    };
    let trace = evaluate_chain(&params, &candidate)?;
    let mut messages: Vec<String> = violations.iter().map(|v| format!("outside regime: {v}")).collect();
    let mut exit_code = EXIT_OK;
    let disproof = if cfg.samples == 0 {
        None
    } else if violations.is_empty() {
        match disprove_below_threshold(&params, cfg.samples, cfg.seed) {
            Ok(r) => Some(r),
            Err(e) => {
                messages.push(e.to_string());
                exit_code = exit_code_for(&e);
                None
            }
        }
    } else {
        Some(probe_below_threshold(&params, cfg.samples, cfg.seed)?)
    };
    if let Some(s) = trace.first_broken() {
        messages.push(format!("first broken step: {}", s.name));
    }
    Ok(Step {
        exit_code,
        messages,
        result: Some(CommandResult::ChainCheck(ChainResult {
            params,
            regime_violations: violations,
            candidate,
            trace,
            disproof,
        })),
    })
}

fn gap(cfg: &RunConfig) -> Result<Step> {
    let z = cfg.point()?;
    let poles = cfg.pole_config()?;
    let params = ChainParams::unchecked(cfg.delta, z, poles)?;
    let threshold = params.lempert_threshold();
    let violations = params.regime_violations().unwrap_or_default();
    let mut messages: Vec<String> = violations.iter().map(|v| format!("outside regime: {v}")).collect();
    let mut note = |what: &str, e: Error| messages.push(format!("{what}: {e}"));

    let green_upper = match build_neil_with_eta(&z, &poles, cfg.eta).and_then(|d| green_upper_from_neil(&d, cfg.eta)) {
        Ok(r) => Some(r),
        Err(e) => {
            note("bidisk upper bound", e);
            None
        }
    };
    let green_lower = green_lower_report(&poles, &z).map_err(|e| note("lower oracle", e)).ok();
    let lempert = search(&z, &poles, &cfg.search_config())
        .map_err(|e| note("lempert search", e))
        .ok();
    let threshold_respected = lempert.as_ref().map(|o| o.best.objective.as_f64() >= threshold);

    let chain = if cfg.samples == 0 {
        None
    } else if violations.is_empty() {
        disprove_below_threshold(&params, cfg.samples, cfg.seed)
            .map_err(|e| note("chain", e))
            .ok()
    } else {
        probe_below_threshold(&params, cfg.samples, cfg.seed)
            .map_err(|e| note("chain probe", e))
            .ok()
    };
    let ball_upper = green_upper_in_ball(&z, &poles, cfg.eta)
        .map_err(|e| note("ball upper bound", e))
        .ok();
    let ball_lower = lempert_lower_in_ball(threshold, &z, &poles)
        .map_err(|e| note("ball lower bound", e))
        .ok();
    let verdict = match (&ball_lower, &ball_upper) {
        (Some(lo), Some(up)) => Some(gap_verdict(lo.value, up.value.value)),
        _ => None,
    };
    if threshold_respected == Some(false) {
        messages.push(format!("the search found a feasible candidate below {threshold}"));
    }
    let strict = verdict.is_some_and(|v| v.strict) && threshold_respected == Some(true);
    let mut step = Step {
        exit_code: EXIT_OK,
        messages,
        result: Some(CommandResult::Gap(GapResult {
            lempert_threshold: threshold,
            regime_violations: violations,
            green_upper,
            green_lower,
            lempert,
            threshold_respected,
            chain,
            ball_upper,
            ball_lower,
            verdict,
            strict,
        })),
    };
    if cfg.expect_strict {
        step.check(strict, || "expected a strict gap".into());
    }
    Ok(step)
}

fn ball_transfer(cfg: &RunConfig) -> Result<Step> {
    let z = cfg.point()?;
    let poles = cfg.pole_config()?;
    let params = ChainParams::unchecked(cfg.delta, z, poles)?;
    let threshold = params.lempert_threshold();
    let bidisk_upper = green_upper_from_neil(&build_neil_with_eta(&z, &poles, cfg.eta)?, cfg.eta)?;
    let ball_upper = green_upper_in_ball(&z, &poles, cfg.eta)?;
    let ball_lower = lempert_lower_in_ball(threshold, &z, &poles)?;
    let verdict = gap_verdict(ball_lower.value, ball_upper.value.value);
    let mut step = Step::ok(CommandResult::BallTransfer(BallTransferResult {
        lempert_threshold: threshold,
        bidisk_upper,
        ball_upper,
        ball_lower,
        verdict,
    }));
    if cfg.expect_strict {
        step.check(verdict.strict, || "expected a strict gap".into());
    }
    Ok(step)
}
