//! The three-pole Lempert function of the bidisk through its finite
//! reduction.
//!
//! After recentering so that the preimage of `(0,0)` is `0`, a disk through
//! `(εs,0)`, `(0,ε)` and `z` at `ζ₁`, `ζ₂`, `ζ₀` exists iff the two
//! two-point Pick problems `h₁: ζ₁ ↦ w₁, ζ₀ ↦ w₂` and
//! `h₂: ζ₂ ↦ w₄, ζ₀ ↦ w₃` are solvable. The Lempert function is the infimum
//! of `log|ζ₀| + log d(ζ₀,ζ₁) + log d(ζ₀,ζ₂)` over such triples.
//!
//! The search parametrizes a triple by six reals
//! `(log|ζ₀|, arg ζ₀, log|t₁|, arg t₁, log|t₂|, arg t₂)` with
//! `ζⱼ = φ_{ζ₀}(tⱼ)`, so the objective is the sum of the three log-moduli
//! and the disk constraints are `log|·| < 0`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{pdist, phi, BidiskPoint};
use crate::green::LogValue;
use crate::neil::{build_neil_with_eta, containment_margin, PoleConfig, PoleMode};
use crate::pick::{compute_w_values, prob_residual, FactorizedDisk, WValues};
use crate::simplex::{nelder_mead, SimplexCoefficients, SimplexOptions};

/// Minimal pairwise distance between interpolation nodes (including the
/// origin).
pub const NODE_FLOOR: f64 = 1e-8;
/// Tolerance on the four interpolation conditions of a returned disk.
pub const PROB_TOL: f64 = 1e-9;

/// A node triple with its interpolation targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateData {
    pub zeta0: Complex64,
    /// `None` in single-pole mode.
    pub zeta1: Option<Complex64>,
    pub zeta2: Option<Complex64>,
    pub w: WValues,
    pub objective: LogValue,
}

impl CandidateData {
    pub fn triple(
        z: &BidiskPoint,
        cfg: &PoleConfig,
        zeta0: Complex64,
        zeta1: Complex64,
        zeta2: Complex64,
    ) -> Result<Self> {
        for v in [zeta0, zeta1, zeta2] {
            if !(v.norm() < 1.0) {
                return Err(Error::DegenerateNodes("node outside the unit disk"));
            }
        }
        let w = compute_w_values(z, cfg, zeta0, zeta1, zeta2)?;
        let mut c = Self {
            zeta0,
            zeta1: Some(zeta1),
            zeta2: Some(zeta2),
            w,
            objective: LogValue::NegInfinity,
        };
        c.objective = objective(&c);
        Ok(c)
    }

    /// Single-pole candidate: `w₂ = z₁/ζ₀`, `w₃ = z₂/ζ₀`.
    pub fn single(z: &BidiskPoint, zeta0: Complex64) -> Result<Self> {
        if !(zeta0.norm() < 1.0) {
            return Err(Error::DegenerateNodes("node outside the unit disk"));
        }
        if zeta0.norm() < crate::pick::DENOM_FLOOR {
            return Err(Error::DegenerateNodes("zeta0 = 0"));
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut c = Self {
            zeta0,
            zeta1: None,
            zeta2: None,
            w: WValues {
                w1: zero,
                w2: z.z1() / zeta0,
                w3: z.z2() / zeta0,
                w4: zero,
            },
            objective: LogValue::NegInfinity,
        };
        c.objective = objective(&c);
        Ok(c)
    }

    /// Real coordinates used for deterministic tie-breaks.
    pub fn coordinates(&self) -> [f64; 6] {
        let z1 = self.zeta1.unwrap_or_default();
        let z2 = self.zeta2.unwrap_or_default();
        [self.zeta0.re, self.zeta0.im, z1.re, z1.im, z2.re, z2.im]
    }
}

/// `log|ζ₀| + log d(ζ₀,ζ₁) + log d(ζ₀,ζ₂)`; the sentinel on coincidence.
pub fn objective(c: &CandidateData) -> LogValue {
    let mut terms = vec![c.zeta0.norm()];
    terms.extend(c.zeta1.map(|z| pdist(c.zeta0, z)));
    terms.extend(c.zeta2.map(|z| pdist(c.zeta0, z)));
    if terms.contains(&0.0) {
        LogValue::NegInfinity
    } else {
        LogValue::Finite(terms.iter().map(|t| t.ln()).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    W1Modulus,
    W2Modulus,
    W3Modulus,
    W4Modulus,
    /// `d(w₁,w₂) < d(ζ₁,ζ₀)` fails.
    Pick1,
    /// `d(w₃,w₄) < d(ζ₂,ζ₀)` fails.
    Pick2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// `1 − |wᵢ|`
    pub modulus_margins: [f64; 4],
    /// `d(ζ₁,ζ₀) − d(w₁,w₂)` and `d(ζ₂,ζ₀) − d(w₃,w₄)`
    pub pick_margins: [f64; 2],
    pub violations: Vec<Violation>,
}

impl Feasibility {
    pub fn first_violation(&self) -> Option<Violation> {
        self.violations.first().copied()
    }

    /// Sum of the negative parts of all margins.
    pub fn deficit(&self) -> f64 {
        self.modulus_margins
            .iter()
            .chain(&self.pick_margins)
            .map(|m| (-m).max(0.0))
            .sum()
    }
}

/// Checks `|wᵢ| < 1` and both Pick inequalities, with w-values recomputed
/// from the nodes.
pub fn feasible(c: &CandidateData, z: &BidiskPoint, cfg: &PoleConfig) -> Result<Feasibility> {
    match (cfg.mode(), c.zeta1, c.zeta2) {
        (PoleMode::SingleOrigin, _, _) => {
            let fresh = CandidateData::single(z, c.zeta0)?;
            let m2 = 1.0 - fresh.w.w2.norm();
            let m3 = 1.0 - fresh.w.w3.norm();
            let mut violations = Vec::new();
            if !(m2 > 0.0) {
                violations.push(Violation::W2Modulus);
            }
            if !(m3 > 0.0) {
                violations.push(Violation::W3Modulus);
            }
            Ok(Feasibility {
                feasible: violations.is_empty(),
                modulus_margins: [1.0, m2, m3, 1.0],
                pick_margins: [1.0, 1.0],
                violations,
            })
        }
        (PoleMode::Triple, Some(zeta1), Some(zeta2)) => {
            let w = compute_w_values(z, cfg, c.zeta0, zeta1, zeta2)?;
            let ws = w.as_array();
            let modulus_margins = ws.map(|wi| 1.0 - wi.norm());
            let pick_margins = [
                pdist(zeta1, c.zeta0) - pdist(w.w1, w.w2),
                pdist(zeta2, c.zeta0) - pdist(w.w3, w.w4),
            ];
            let mut violations = Vec::new();
            for (m, v) in modulus_margins.iter().zip([
                Violation::W1Modulus,
                Violation::W2Modulus,
                Violation::W3Modulus,
                Violation::W4Modulus,
            ]) {
                if !(*m > 0.0) {
                    violations.push(v);
                }
            }
            for (m, v) in pick_margins.iter().zip([Violation::Pick1, Violation::Pick2]) {
                if !(*m > 0.0) {
                    violations.push(v);
                }
            }
            Ok(Feasibility {
                feasible: violations.is_empty(),
                modulus_margins,
                pick_margins,
                violations,
            })
        }
        _ => Err(Error::DegenerateNodes("three-pole mode needs zeta1 and zeta2")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityMode {
    /// Infeasible points evaluate to `+∞`.
    #[default]
    Reject,
    /// Infeasible points pay `penalty_weight · deficit`.
    Penalty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub n_starts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub coefficients: SimplexCoefficients,
    pub feasibility_mode: FeasibilityMode,
    pub penalty_weight: f64,
    /// Local restarts from the incumbent after the simplex collapses.
    pub restarts: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_starts: 64,
            max_iters: 3000,
            seed: 0,
            coefficients: SimplexCoefficients::default(),
            feasibility_mode: FeasibilityMode::Reject,
            penalty_weight: 1e3,
            restarts: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedKind {
    NeilWitness,
    Symmetric,
    Stratified,
}

/// Per-start summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub index: usize,
    pub kind: SeedKind,
    pub start_feasible: bool,
    pub best: Option<CandidateData>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: CandidateData,
    pub disk: FactorizedDisk,
    pub prob_residual: f64,
    pub n_starts: usize,
    pub feasible_starts: usize,
    pub evaluations: usize,
}

/// Maps six search coordinates to a node triple.
fn nodes_from_params(p: &[f64]) -> Option<(Complex64, Complex64, Complex64)> {
    if p[0] >= 0.0 || p[2] >= 0.0 || p[4] >= 0.0 || p.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let zeta0 = Complex64::from_polar(p[0].exp(), p[1]);
    let t1 = Complex64::from_polar(p[2].exp(), p[3]);
    let t2 = Complex64::from_polar(p[4].exp(), p[5]);
    Some((zeta0, phi(zeta0, t1), phi(zeta0, t2)))
}

fn params_from_nodes(zeta0: Complex64, zeta1: Complex64, zeta2: Complex64) -> [f64; 6] {
    let t1 = phi(zeta0, zeta1);
    let t2 = phi(zeta0, zeta2);
    [
        zeta0.norm().ln(),
        zeta0.arg(),
        t1.norm().ln(),
        t1.arg(),
        t2.norm().ln(),
        t2.arg(),
    ]
}

fn nodes_separated(nodes: &[Complex64]) -> bool {
    let zero = Complex64::new(0.0, 0.0);
    let all: Vec<Complex64> = std::iter::once(zero).chain(nodes.iter().copied()).collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if pdist(all[i], all[j]) < NODE_FLOOR {
                return false;
            }
        }
    }
    true
}

/// Candidate for a parameter vector, if it is well-formed.
fn candidate_at(z: &BidiskPoint, cfg: &PoleConfig, p: &[f64]) -> Option<CandidateData> {
    match cfg.mode() {
        PoleMode::SingleOrigin => {
            if p[0] >= 0.0 || !p[0].is_finite() || !p[1].is_finite() {
                return None;
            }
            let zeta0 = Complex64::from_polar(p[0].exp(), p[1]);
            if !nodes_separated(&[zeta0]) {
                return None;
            }
            CandidateData::single(z, zeta0).ok()
        }
        PoleMode::Triple => {
            let (a, b, c) = nodes_from_params(p)?;
            if !nodes_separated(&[a, b, c]) {
                return None;
            }
            CandidateData::triple(z, cfg, a, b, c).ok()
        }
    }
}

fn better(a: &CandidateData, b: &CandidateData) -> bool {
    let (fa, fb) = (a.objective.as_f64(), b.objective.as_f64());
    match fa.total_cmp(&fb) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => {
            let (ca, cb) = (a.coordinates(), b.coordinates());
            for (x, y) in ca.iter().zip(&cb) {
                match x.total_cmp(y) {
                    std::cmp::Ordering::Less => return true,
                    std::cmp::Ordering::Greater => return false,
                    _ => {}
                }
            }
            false
        }
    }
}

/// Node triple of the Neil disk recentred at the preimage of `(0,0)`.
///
/// With `R = 1−η` and `a = s/(2λR)`, the disk `ζ ↦ Ψ(R φ_a(ζ))` maps `𝔻`
/// into `𝔻²` and sends `0, φ_a(−a), φ_a(μ/R), φ_a(ζ_z/R)` to the three
/// poles and `z`.
pub fn neil_seed(z: &BidiskPoint, cfg: &PoleConfig) -> Option<(f64, [Complex64; 3])> {
    for eta in [0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4] {
        let Ok(d) = build_neil_with_eta(z, cfg, eta) else {
            continue;
        };
        match containment_margin(&d, eta, 8192) {
            Ok(m) if m > 0.0 => {}
            _ => continue,
        }
        let r = 1.0 - eta;
        let a = d.origin_preimage() / r;
        let nodes = [
            phi(a, d.zeta_z / r),
            phi(a, -a),
            phi(a, d.mu / r),
        ];
        if nodes.iter().all(|v| v.norm() < 1.0) {
            return Some((eta, nodes));
        }
    }
    None
}

fn start_params(
    index: usize,
    n_starts: usize,
    z: &BidiskPoint,
    cfg: &PoleConfig,
    rng: &mut ChaCha8Rng,
) -> (SeedKind, Vec<f64>) {
    let top = z.sup_norm().max(1e-300).ln();
    if cfg.mode() == PoleMode::SingleOrigin {
        let u = top * (1.0 - (index as f64 + rng.gen::<f64>()) / n_starts as f64);
        return (SeedKind::Stratified, vec![u, rng.gen_range(-PI..PI)]);
    }
    if index == 0 {
        if let Some((_, [z0, z1, z2])) = neil_seed(z, cfg) {
            return (SeedKind::NeilWitness, params_from_nodes(z0, z1, z2).to_vec());
        }
    }
    if index == 1 {
        let eps = cfg.epsilon().norm();
        let z0 = z.z2().sqrt() * 1.5;
        let z0 = if z0.norm() < 1.0 { z0 } else { z0 / (2.0 * z0.norm()) };
        let r2 = if eps > 0.0 { eps.sqrt() } else { 0.5 * z0.norm() };
        let z2 = Complex64::from_polar(r2, z.z2().arg() / 2.0 + PI / 2.0);
        return (SeedKind::Symmetric, params_from_nodes(z0, -z2, z2).to_vec());
    }
    // log|ζ₀| stratified over (log max|z|, 0); t-moduli log-uniform.
    let stratum = (index as f64 + rng.gen::<f64>()) / n_starts as f64;
    let u0 = top * (1.0 - stratum);
    let eps = cfg.epsilon().norm();
    let floor = if eps > 0.0 { eps.min(z.sup_norm()) } else { z.sup_norm() };
    let t_lo = floor.max(1e-300).ln() - 1.0;
    let mut p = vec![u0, rng.gen_range(-PI..PI)];
    for _ in 0..2 {
        p.push(rng.gen_range(t_lo..0.0));
        p.push(rng.gen_range(-PI..PI));
    }
    (SeedKind::Stratified, p)
}

fn run_start(index: usize, z: &BidiskPoint, cfg: &PoleConfig, sc: &SearchConfig) -> StartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    rng.set_stream(index as u64);
    let (kind, x0) = start_params(index, sc.n_starts, z, cfg, &mut rng);

    let best: RefCell<Option<CandidateData>> = RefCell::new(None);
    let mut evaluations = 1usize;
    let eval = |p: &[f64]| -> f64 {
        let Some(c) = candidate_at(z, cfg, p) else {
            return f64::INFINITY;
        };
        let Ok(fz) = feasible(&c, z, cfg) else {
            return f64::INFINITY;
        };
        let obj = c.objective.as_f64();
        if fz.feasible {
            let mut slot = best.borrow_mut();
            if slot.as_ref().is_none_or(|b| better(&c, b)) {
                *slot = Some(c);
            }
            obj
        } else {
            match sc.feasibility_mode {
                FeasibilityMode::Reject => f64::INFINITY,
                FeasibilityMode::Penalty => obj + sc.penalty_weight * fz.deficit(),
            }
        }
    };

    let start_feasible = {
        eval(&x0);
        best.borrow().is_some()
    };
    let opts = SimplexOptions {
        coefficients: sc.coefficients,
        max_iters: sc.max_iters,
        f_tol: 1e-13,
        x_tol: 1e-11,
        f_target: f64::NEG_INFINITY,
    };
    let mut x = x0;
    if !start_feasible && sc.feasibility_mode == FeasibilityMode::Reject {
        // restore feasibility first by driving the constraint deficit to zero
        let deficit = |p: &[f64]| -> f64 {
            candidate_at(z, cfg, p)
                .and_then(|c| feasible(&c, z, cfg).ok())
                .map_or(f64::INFINITY, |f| if f.feasible { 0.0 } else { f.deficit().max(f64::MIN_POSITIVE) })
        };
        let restore = SimplexOptions {
            f_target: 0.0,
            ..opts
        };
        let r = nelder_mead(deficit, &x, &vec![0.5; x.len()], &restore);
        if r.f > 0.0 {
            return StartOutcome {
                index,
                kind,
                start_feasible,
                best: None,
                evaluations: evaluations + r.evaluations,
            };
        }
        x = r.x;
        evaluations += r.evaluations;
    }
    let mut step = 0.5;
    for _ in 0..=sc.restarts {
        let steps = vec![step; x.len()];
        let r = nelder_mead(eval, &x, &steps, &opts);
        evaluations += r.evaluations;
        x = r.x;
        step *= 0.25;
    }
    StartOutcome {
        index,
        kind,
        start_feasible,
        best: best.into_inner(),
        evaluations,
    }
}

/// Runs every start and returns all outcomes in index order.
pub fn run_starts(z: &BidiskPoint, cfg: &PoleConfig, sc: &SearchConfig) -> Vec<StartOutcome> {
    (0..sc.n_starts)
        .into_par_iter()
        .map(|i| run_start(i, z, cfg, sc))
        .collect()
}

/// Multistart minimization of the Lempert objective over feasible triples.
///
/// The returned candidate is the best feasible point evaluated by any start;
/// its disk is rebuilt by solving both Pick problems and checked against the
/// interpolation conditions.
pub fn search(z: &BidiskPoint, cfg: &PoleConfig, sc: &SearchConfig) -> Result<SearchOutcome> {
    if sc.n_starts == 0 {
        return Err(Error::InvalidParameter("n_starts must be at least 1".into()));
    }
    if cfg.is_pole(z) {
        return Err(Error::PoleHit);
    }
    let outcomes = run_starts(z, cfg, sc);
    aggregate(z, cfg, &outcomes)
}

/// Picks the best verified candidate from start outcomes.
pub fn aggregate(z: &BidiskPoint, cfg: &PoleConfig, outcomes: &[StartOutcome]) -> Result<SearchOutcome> {
    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let feasible_starts = outcomes.iter().filter(|o| o.best.is_some()).count();
    let mut ranked: Vec<CandidateData> = outcomes.iter().filter_map(|o| o.best).collect();
    ranked.sort_by(|a, b| {
        if better(a, b) {
            std::cmp::Ordering::Less
        } else if better(b, a) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    let mut rejected = 0usize;
    for c in ranked {
        let disk = match (c.zeta1, c.zeta2) {
            (Some(a), Some(b)) => FactorizedDisk::through_poles(z, cfg, c.zeta0, a, b),
            _ => FactorizedDisk::through_origin(z, c.zeta0),
        };
        let Ok(disk) = disk else {
            rejected += 1;
            continue;
        };
        let residual = prob_residual(&disk, z, cfg, c.zeta0);
        if residual < PROB_TOL {
            return Ok(SearchOutcome {
                best: c,
                disk,
                prob_residual: residual,
                n_starts: outcomes.len(),
                feasible_starts,
                evaluations,
            });
        }
        rejected += 1;
    }
    Err(Error::NoFeasiblePoint {
        starts: outcomes.len(),
        detail: format!(
            "{} starts reached a feasible point, {} candidates failed disk verification",
            feasible_starts, rejected
        ),
    })
}
