//! Quantitative form of the lower bound `ℓ(z) ≥ (2−δ) log|z₂|`.
//!
//! Suppose a node triple has objective `≤ (2−δ) log|z₂|`. Then, for `z` in
//! the sector and below the radius thresholds, the following chain holds
//! for any *feasible* triple, and its last two links contradict each other:
//!
//! | step      | inequality                                                   | uses           |
//! |-----------|--------------------------------------------------------------|----------------|
//! | `symest`  | `log 1/|w₂| + log 1/|w₃| + log 1/|ζ₀| ≤ (½+δ) log 1/|z₂| + log 2` | sector     |
//! | `w3est`   | `log|w₃| ≥ (½+δ) log|z₂| − log 2`                            | `|w₂| < 1`     |
//! | `phi02est`| `log d(ζ₂,ζ₀) ≤ (1−δ) log|z₂| + log 2`                       | `|w₃| < 1`     |
//! | `w4est`   | `|w₄| ≥ ½|w₃|`                                               | Pick for `h₂`, `r₁` |
//! | `ze2est`  | `½|ζ₀| ≤ |ζ₂| ≤ 3/2 |ζ₀|`                                    | `r₂`           |
//! | `phi12est`| `d(ζ₁,ζ₂) ≤ 8|ε| |z₂|^{−δ−½}`                                |                |
//! | `phi10est`| `d(ζ₁,ζ₀) < 3|z₂|^{1−δ}`                                     | `|ε| < ⅛|z₂|^{3/2}` |
//! | `w2bel`   | `|w₂| ≥ ½|z₂|^{½+δ}`                                         | `|w₃| < 1`     |
//! | `ze1bel`  | `|ζ₁| ≥ ¼|ζ₀|`                                               | `r₃`           |
//! | `w1w4`    | `|w₁/w₄| ≤ 6|s|`                                             |                |
//! | `w2abv`   | `|w₂| ≤ 9|z₂|^{1−δ}`                                         | Pick for `h₁`, `|w₄| < 1`, `|s| < |z₂|^{1−δ}` |
//! | `final`   | `9|z₂|^{1−δ} < ½|z₂|^{½+δ}`                                  | `r₀`           |
//!
//! The radii come from solving each "small enough" comparison exactly:
//!
//! * `r₁`: `2r^{1−δ} < ¼ r^{½+δ}` (from `phi02est` against half of `w3est`),
//!   i.e. `log r₁ = −log 8 / (½ − 2δ)`.
//! * `r₂`: `2r^{1−δ} ≤ ¼ r^{½+δ}` (`phi02est` against `½|ζ₀|`, with
//!   `|ζ₀| ≥ ½|z₂|^{½+δ}` from `symest`); same value as `r₁`.
//! * `r₃`: `r^{1−δ} ≤ ⅛ r^{½+δ}` (`|ζ₁| ≥ ½|ζ₀| − |z₂|^{1−δ} ≥ ¼|ζ₀|`);
//!   again `log r₃ = −log 8 / (½ − 2δ)`.
//! * `r_final`: `9r^{1−δ} < ½ r^{½+δ}`, i.e. `log r = −log 18 / (½ − 2δ)`.
//!
//! `r₀ = min(r₁, r₂, r₃, r_final) = r_final`. Everything is evaluated on
//! log-moduli since `r₀` is tiny (`18^{−10}` at `δ = 0.2`).

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{pdist, phi, BidiskPoint};
use crate::lempert::{feasible, CandidateData, Feasibility, Violation};
use crate::neil::{PoleConfig, PoleMode};

/// Relative tolerance for re-evaluating steps marked as holding.
pub const STEP_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub log_value: f64,
    pub certifies: String,
}

impl Threshold {
    /// `exp(log_value)`; may underflow to zero for `δ` close to `¼`.
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub delta: f64,
    pub r1: Threshold,
    pub r2: Threshold,
    pub r3: Threshold,
    pub r_final: Threshold,
    pub r0: Threshold,
    /// `⅛ |z₂|^{3/2}`, the bound on `|ε|`.
    pub eps0: f64,
    /// `|z₂|^{1−δ}`, the bound on `|s(ε)|`.
    pub s_max: f64,
}

impl Thresholds {
    /// Largest admissible `|ε|` when `s(ε) = ε`.
    pub fn eps0_with_default_s(&self) -> f64 {
        self.eps0.min(self.s_max)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 0.25 {
        Ok(())
    } else {
        Err(Error::OutsideRegime(format!("delta = {delta} is not in (0, 1/4)")))
    }
}

pub fn compute_thresholds(delta: f64, z2_mod: f64) -> Result<Thresholds> {
    check_delta(delta)?;
    if !(z2_mod > 0.0 && z2_mod < 1.0) {
        return Err(Error::InvalidParameter(format!("|z2| = {z2_mod} must lie in (0,1)")));
    }
    let gap = 0.5 - 2.0 * delta;
    let ln8 = 8f64.ln();
    let r1 = Threshold {
        log_value: -ln8 / gap,
        certifies: "2 |z2|^(1-d) < 1/4 |z2|^(1/2+d): |phi_z2(z0)| < |w3|/2 (w4est)".into(),
    };
    let r2 = Threshold {
        log_value: -ln8 / gap,
        certifies: "2 |z2|^(1-d) <= 1/4 |z2|^(1/2+d): |phi_z2(z0)| <= |z0|/2 (ze2est)".into(),
    };
    let r3 = Threshold {
        log_value: -ln8 / gap,
        certifies: "|z2|^(1-d) <= 1/8 |z2|^(1/2+d): |z1| >= |z0|/4 (ze1bel)".into(),
    };
    let r_final = Threshold {
        log_value: -(18f64.ln()) / gap,
        certifies: "9 |z2|^(1-d) < 1/2 |z2|^(1/2+d): upper and lower bounds on |w2| cross".into(),
    };
    let log_r0 = r1
        .log_value
        .min(r2.log_value)
        .min(r3.log_value)
        .min(r_final.log_value);
    Ok(Thresholds {
        delta,
        r1,
        r2,
        r3,
        r_final,
        r0: Threshold {
            log_value: log_r0,
            certifies: "min(r1, r2, r3, r_final)".into(),
        },
        eps0: 0.125 * z2_mod.powf(1.5),
        s_max: z2_mod.powf(1.0 - delta),
    })
}

/// Parameters of the chain, validated against the regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub delta: f64,
    pub z: BidiskPoint,
    pub cfg: PoleConfig,
    pub thresholds: Thresholds,
}

impl ChainParams {
    pub fn new(delta: f64, z: BidiskPoint, cfg: PoleConfig) -> Result<Self> {
        let p = Self::unchecked(delta, z, cfg)?;
        p.regime_violations().map_or(Ok(p), |v| Err(Error::OutsideRegime(v.join("; "))))
    }

    /// Builds the parameters without asserting the regime; the chain is then
    /// evaluated but carries no guarantee.
    pub fn unchecked(delta: f64, z: BidiskPoint, cfg: PoleConfig) -> Result<Self> {
        check_delta(delta)?;
        if cfg.mode() != PoleMode::Triple {
            return Err(Error::OutsideRegime("the chain needs the three-pole configuration".into()));
        }
        let thresholds = compute_thresholds(delta, z.z2().norm())?;
        Ok(Self {
            delta,
            z,
            cfg,
            thresholds,
        })
    }

    /// Human-readable list of failed regime conditions, if any.
    pub fn regime_violations(&self) -> Option<Vec<String>> {
        let mut v = Vec::new();
        let t = &self.thresholds;
        let z2 = self.z.z2().norm();
        if !self.z.in_sector() {
            v.push("z is not in the sector 1/2|z2|^(3/2) <= |z1| <= |z2|^(3/2)".to_string());
        }
        if !(z2.ln() < t.r0.log_value) {
            v.push(format!(
                "|z2| = {z2:e} is not below r0 = exp({:.4})",
                t.r0.log_value
            ));
        }
        let eps = self.cfg.epsilon().norm();
        if !(eps > 0.0 && eps < t.eps0) {
            v.push(format!("|eps| = {eps:e} is not in (0, {:e})", t.eps0));
        }
        let s = self.cfg.s().norm();
        if !(s > 0.0 && s < t.s_max) {
            v.push(format!("|s| = {s:e} is not in (0, {:e})", t.s_max));
        }
        if v.is_empty() {
            None
        } else {
            Some(v)
        }
    }

    /// `(2−δ) log|z₂|`.
    pub fn lempert_threshold(&self) -> f64 {
        (2.0 - self.delta) * self.z.z2().norm().ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
    pub holds: bool,
    /// `rhs − lhs` in log units.
    pub margin: f64,
}

impl ChainStep {
    fn new(name: &str, lhs: f64, rhs: f64, strict: bool) -> Self {
        let holds = if strict { lhs < rhs } else { lhs <= rhs };
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            strict,
            holds,
            margin: rhs - lhs,
        }
    }

    /// Violations whose absence the step relies on (besides earlier steps).
    pub fn dependencies(name: &str) -> &'static [Violation] {
        match name {
            "w3est" => &[Violation::W2Modulus],
            "phi02est" => &[Violation::W3Modulus],
            "w4est" => &[Violation::Pick2],
            "w2bel" => &[Violation::W3Modulus],
            "w2abv" => &[Violation::Pick1, Violation::W4Modulus, Violation::W1Modulus],
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "step", rename_all = "snake_case")]
pub enum ChainVerdict {
    /// The objective is above `(2−δ) log|z₂|`; nothing to refute.
    HypothesisNotSatisfied,
    /// The named step fails, so one of its feasibility premises is violated.
    Broken(String),
    /// No step failed; only possible outside the regime.
    Unrefuted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub objective: f64,
    pub threshold: f64,
    pub hypothesis_holds: bool,
    pub steps: Vec<ChainStep>,
    pub feasibility: Feasibility,
    pub verdict: ChainVerdict,
}

impl ChainTrace {
    pub fn first_broken(&self) -> Option<&ChainStep> {
        self.steps.iter().find(|s| !s.holds)
    }

    /// The chain forces infeasibility: the hypothesis holds and some step
    /// breaks.
    pub fn implies_infeasible(&self) -> bool {
        matches!(self.verdict, ChainVerdict::Broken(_))
    }

    /// The first broken step's premises (cumulative) include a violation
    /// reported by the direct feasibility test.
    pub fn consistent_with_feasibility(&self) -> bool {
        match &self.verdict {
            ChainVerdict::Broken(name) => {
                let mut deps = Vec::new();
                for s in &self.steps {
                    deps.extend_from_slice(ChainStep::dependencies(&s.name));
                    if &s.name == name {
                        break;
                    }
                }
                self.feasibility.violations.iter().any(|v| deps.contains(v))
            }
            ChainVerdict::HypothesisNotSatisfied => true,
            ChainVerdict::Unrefuted => true,
        }
    }
}

const STEP_NAMES: [&str; 12] = [
    "symest", "w3est", "phi02est", "w4est", "ze2est", "phi12est", "phi10est", "w2bel", "ze1bel",
    "w1w4", "w2abv", "final",
];

/// Evaluates every step of the chain for a candidate.
pub fn check_chain(p: &ChainParams, c: &CandidateData) -> Result<ChainTrace> {
    if let Some(v) = p.regime_violations() {
        return Err(Error::OutsideRegime(v.join("; ")));
    }
    evaluate_chain(p, c)
}

/// [`check_chain`] without the regime precondition.
pub fn evaluate_chain(p: &ChainParams, c: &CandidateData) -> Result<ChainTrace> {
    let (Some(zeta1), Some(zeta2)) = (c.zeta1, c.zeta2) else {
        return Err(Error::DegenerateNodes("the chain needs zeta1 and zeta2"));
    };
    let feas = feasible(c, &p.z, &p.cfg)?;
    let w = crate::pick::compute_w_values(&p.z, &p.cfg, c.zeta0, zeta1, zeta2)?;
    let d = p.delta;
    let lz2 = p.z.z2().norm().ln();
    let (lw1, lw2, lw3, lw4) = (w.w1.norm().ln(), w.w2.norm().ln(), w.w3.norm().ln(), w.w4.norm().ln());
    let (l0, l1, l2) = (c.zeta0.norm().ln(), zeta1.norm().ln(), zeta2.norm().ln());
    let ld02 = pdist(zeta2, c.zeta0).ln();
    let ld12 = pdist(zeta1, zeta2).ln();
    let ld10 = pdist(zeta1, c.zeta0).ln();
    let leps = p.cfg.epsilon().norm().ln();
    let ls = p.cfg.s().norm().ln();
    let (ln3, ln4, ln6, ln8, ln9) = (3f64.ln(), 4f64.ln(), 6f64.ln(), 8f64.ln(), 9f64.ln());

    let objective = c.objective.as_f64();
    let threshold = p.lempert_threshold();
    let hypothesis_holds = objective <= threshold;

    let w_floor = (0.5 + d) * lz2 - LN_2;
    let ze2 = {
        let lower = l2 - (l0 - LN_2);
        let upper = (l0 + 1.5f64.ln()) - l2;
        if lower <= upper {
            ChainStep::new("ze2est", l0 - LN_2, l2, false)
        } else {
            ChainStep::new("ze2est", l2, l0 + 1.5f64.ln(), false)
        }
    };
    let steps = vec![
        ChainStep::new("symest", -lw2 - lw3 - l0, -(0.5 + d) * lz2 + LN_2, false),
        ChainStep::new("w3est", w_floor, lw3, false),
        ChainStep::new("phi02est", ld02, (1.0 - d) * lz2 + LN_2, false),
        ChainStep::new("w4est", lw3 - LN_2, lw4, false),
        ze2,
        ChainStep::new("phi12est", ld12, ln8 + leps - (d + 0.5) * lz2, false),
        ChainStep::new("phi10est", ld10, ln3 + (1.0 - d) * lz2, true),
        ChainStep::new("w2bel", w_floor, lw2, false),
        ChainStep::new("ze1bel", l0 - ln4, l1, false),
        ChainStep::new("w1w4", lw1 - lw4, ln6 + ls, false),
        ChainStep::new("w2abv", lw2, ln9 + (1.0 - d) * lz2, false),
        ChainStep::new("final", ln9 + (1.0 - d) * lz2, w_floor, true),
    ];
    debug_assert!(steps.iter().map(|s| s.name.as_str()).eq(STEP_NAMES));

    let verdict = if !hypothesis_holds {
        ChainVerdict::HypothesisNotSatisfied
    } else {
        match steps.iter().position(|s| !s.holds) {
            Some(i) => ChainVerdict::Broken(STEP_NAMES[i].to_string()),
            None => ChainVerdict::Unrefuted,
        }
    };
    Ok(ChainTrace {
        objective,
        threshold,
        hypothesis_holds,
        steps,
        feasibility: feas,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisproofReport {
    pub n_samples: usize,
    pub seed: u64,
    pub threshold: f64,
    pub in_regime: bool,
    pub infeasible: usize,
    pub feasible: usize,
    /// Samples where the chain verdict and the direct predicate agree.
    pub agreements: usize,
    /// First broken step, by name.
    pub step_histogram: BTreeMap<String, usize>,
    /// First violation reported by the direct predicate.
    pub violation_histogram: BTreeMap<String, usize>,
    /// Lowest objective among sampled candidates that were feasible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_feasible_objective: Option<f64>,
}

/// Draws a node triple with objective below the threshold.
///
/// Log-moduli `(log|ζ₀|, log|t₁|, log|t₂|)` split a budget in
/// `(1.5·T, T)` uniformly over the simplex; `ζⱼ = φ_{ζ₀}(tⱼ)` with uniform
/// phases. `|tⱼ| ≥ 10⁻⁶|ζ₀|` keeps the nodes resolvable in double precision.
pub fn sample_below_threshold(
    p: &ChainParams,
    rng: &mut ChaCha8Rng,
) -> Result<CandidateData> {
    let t = p.lempert_threshold();
    let min_rel = (1e-6f64).ln();
    for _ in 0..10_000 {
        let budget = t * (1.0 + 0.5 * rng.gen::<f64>()) - 1e-9 * t.abs();
        let (mut u, mut v): (f64, f64) = (rng.gen(), rng.gen());
        if u > v {
            std::mem::swap(&mut u, &mut v);
        }
        let shares = [u, v - u, 1.0 - v];
        let a = shares.map(|g| budget * g);
        if a[1] < a[0] + min_rel || a[2] < a[0] + min_rel {
            continue;
        }
        let zeta0 = Complex64::from_polar(a[0].exp(), rng.gen_range(-PI..PI));
        let t1 = Complex64::from_polar(a[1].exp(), rng.gen_range(-PI..PI));
        let t2 = Complex64::from_polar(a[2].exp(), rng.gen_range(-PI..PI));
        let (zeta1, zeta2) = (phi(zeta0, t1), phi(zeta0, t2));
        let Ok(c) = CandidateData::triple(&p.z, &p.cfg, zeta0, zeta1, zeta2) else {
            continue;
        };
        if c.objective.as_f64() < t {
            return Ok(c);
        }
    }
    Err(Error::InvalidParameter("could not sample a below-threshold candidate".into()))
}

fn sample_report(p: &ChainParams, n_samples: usize, seed: u64) -> Result<(DisproofReport, Vec<ChainTrace>)> {
    let traces = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let c = sample_below_threshold(p, &mut rng)?;
            evaluate_chain(p, &c)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = DisproofReport {
        n_samples,
        seed,
        threshold: p.lempert_threshold(),
        in_regime: p.regime_violations().is_none(),
        infeasible: 0,
        feasible: 0,
        agreements: 0,
        step_histogram: BTreeMap::new(),
        violation_histogram: BTreeMap::new(),
        best_feasible_objective: None,
    };
    for tr in &traces {
        if tr.feasibility.feasible {
            report.feasible += 1;
            let best = report.best_feasible_objective.get_or_insert(tr.objective);
            *best = best.min(tr.objective);
        } else {
            report.infeasible += 1;
        }
        if tr.implies_infeasible() != tr.feasibility.feasible && tr.consistent_with_feasibility() {
            report.agreements += 1;
        }
        let step = tr.first_broken().map_or("none".to_string(), |s| s.name.clone());
        *report.step_histogram.entry(step).or_default() += 1;
        let viol = tr
            .feasibility
            .first_violation()
            .map_or("none".to_string(), |v| {
                serde_json::to_value(v)
                    .ok()
                    .and_then(|x| x.as_str().map(str::to_string))
                    .unwrap_or_default()
            });
        *report.violation_histogram.entry(viol).or_default() += 1;
    }
    Ok((report, traces))
}

/// Samples below-threshold triples in the regime and checks that none is
/// feasible.
pub fn disprove_below_threshold(p: &ChainParams, n_samples: usize, seed: u64) -> Result<DisproofReport> {
    if let Some(v) = p.regime_violations() {
        return Err(Error::OutsideRegime(v.join("; ")));
    }
    let (report, traces) = sample_report(p, n_samples, seed)?;
    if let Some(tr) = traces.iter().find(|t| t.feasibility.feasible) {
        return Err(Error::CounterexampleFound {
            objective: tr.objective,
            threshold: tr.threshold,
        });
    }
    Ok(report)
}

/// Same sampling outside the regime: reports feasible samples instead of
/// failing on them.
pub fn probe_below_threshold(p: &ChainParams, n_samples: usize, seed: u64) -> Result<DisproofReport> {
    sample_report(p, n_samples, seed).map(|(r, _)| r)
}
