//! The perturbed Neil parabola
//!
//! ```text
//! Ψ(ζ) = ( (λζ − s/2)(ζ² − μ²),  ζ² − (s/(2λ))² )
//! λ² = z₁/(z₂(z₂−ε)) · (z₁/(z₂−ε) + s),   μ² = ε + (s/(2λ))²
//! ζ_z = (z₁/(z₂−ε) + s/2) / λ
//! ```
//!
//! which passes through `(0,ε)` at `±μ`, through `(0,0)` at `s/(2λ)`,
//! through `(εs, 0)` at `−s/(2λ)` and through `z` at `ζ_z`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BidiskPoint, ClosedDiskPoint, TOL_GEOM};

/// Default shrink parameter `η` of the disk `D(0, 1−η)`.
pub const DEFAULT_ETA: f64 = 0.05;
/// Default number of circle samples in [`containment_check`].
pub const DEFAULT_CONTAINMENT_SAMPLES: usize = 8192;
/// Smallest accepted sample count for [`containment_check`].
pub const MIN_CONTAINMENT_SAMPLES: usize = 1024;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which pole set a configuration describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PoleMode {
    /// `{(0,0), (εs, 0), (0, ε)}`
    #[default]
    Triple,
    /// `{(0,0)}` alone; used to test against the one-pole closed form.
    SingleOrigin,
}

/// Coincidences among the three poles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    None,
    /// `s = 0`, `ε ≠ 0`: `(εs, 0)` merges with the origin.
    RhoCollapsed,
    /// `ε = 0`: all three poles sit at the origin.
    TriplePoleAtOrigin,
}

/// The pole set `S_ε = {(0,0), (ρ,0), (0,ε)}` with `ρ = ε·s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleConfig {
    epsilon: Complex64,
    s: Complex64,
    rho: Complex64,
    #[serde(default)]
    mode: PoleMode,
}

impl PoleConfig {
    pub fn new(epsilon: Complex64, s: Complex64) -> Result<Self> {
        if !(epsilon.norm() < 1.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need |epsilon| < 1 and finite s, got epsilon={epsilon}, s={s}"
            )));
        }
        let rho = epsilon * s;
        if !(rho.norm() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "pole (eps*s, 0) = ({rho}, 0) is outside the bidisk"
            )));
        }
        Ok(Self {
            epsilon,
            s,
            rho,
            mode: PoleMode::Triple,
        })
    }

    /// Default family `s(ε) = ε`, i.e. `ρ = ε²`.
    pub fn with_default_s(epsilon: Complex64) -> Result<Self> {
        Self::new(epsilon, epsilon)
    }

    pub fn single_origin() -> Self {
        Self {
            epsilon: ZERO,
            s: ZERO,
            rho: ZERO,
            mode: PoleMode::SingleOrigin,
        }
    }

    pub fn epsilon(&self) -> Complex64 {
        self.epsilon
    }
    pub fn s(&self) -> Complex64 {
        self.s
    }
    pub fn rho(&self) -> Complex64 {
        self.rho
    }
    pub fn mode(&self) -> PoleMode {
        self.mode
    }

    /// Poles in the fixed order `(0,0)`, `(ρ,0)`, `(0,ε)`, with multiplicity.
    pub fn poles(&self) -> Vec<[Complex64; 2]> {
        match self.mode {
            PoleMode::Triple => vec![[ZERO, ZERO], [self.rho, ZERO], [ZERO, self.epsilon]],
            PoleMode::SingleOrigin => vec![[ZERO, ZERO]],
        }
    }

    pub fn degeneracy(&self) -> Degeneracy {
        if self.mode == PoleMode::SingleOrigin {
            Degeneracy::None
        } else if self.epsilon == ZERO {
            Degeneracy::TriplePoleAtOrigin
        } else if self.rho == ZERO {
            Degeneracy::RhoCollapsed
        } else {
            Degeneracy::None
        }
    }

    /// The configuration `√2·S_ε` written again in `S_ε` form:
    /// `ε′ = factor·ε`, `s′ = s`, so `ρ′ = factor·ρ`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut out = Self::new(self.epsilon * factor, self.s)?;
        out.mode = self.mode;
        Ok(out)
    }

    pub fn is_pole(&self, z: &BidiskPoint) -> bool {
        self.poles().iter().any(|p| p[0] == z.z1() && p[1] == z.z2())
    }
}

/// The explicit disk `Ψ_{λ,μ}` built for a target point and pole set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeilDisk {
    pub lambda: Complex64,
    pub mu: Complex64,
    pub s: Complex64,
    pub zeta_z: Complex64,
    pub eta: f64,
    pub source_z: BidiskPoint,
    pub source_cfg: PoleConfig,
}

impl NeilDisk {
    /// `s/(2λ)`, the preimage of `(0,0)`.
    pub fn origin_preimage(&self) -> Complex64 {
        self.s / (self.lambda * 2.0)
    }

    /// Preimages `[μ, −μ, s/(2λ), −s/(2λ)]` of `(0,ε)`, `(0,ε)`, `(0,0)`, `(εs,0)`.
    pub fn preimages(&self) -> [Complex64; 4] {
        let a = self.origin_preimage();
        [self.mu, -self.mu, a, -a]
    }

    pub fn eval(&self, zeta: Complex64) -> [Complex64; 2] {
        let a = self.origin_preimage();
        let z2 = zeta * zeta;
        [
            (self.lambda * zeta - self.s * 0.5) * (z2 - self.mu * self.mu),
            z2 - a * a,
        ]
    }

    /// Largest residual among the pole passages and `Ψ(ζ_z) = z`.
    pub fn passage_residuals(&self) -> PassageResiduals {
        let cfg = &self.source_cfg;
        let dist = |v: [Complex64; 2], t: [Complex64; 2]| (v[0] - t[0]).norm().max((v[1] - t[1]).norm());
        let a = self.origin_preimage();
        PassageResiduals {
            mu_plus: dist(self.eval(self.mu), [ZERO, cfg.epsilon()]),
            mu_minus: dist(self.eval(-self.mu), [ZERO, cfg.epsilon()]),
            origin: dist(self.eval(a), [ZERO, ZERO]),
            rho: dist(self.eval(-a), [cfg.rho(), ZERO]),
            target: dist(self.eval(self.zeta_z), self.source_z.coords()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassageResiduals {
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub origin: f64,
    pub rho: f64,
    pub target: f64,
}

impl PassageResiduals {
    pub fn max(&self) -> f64 {
        [self.mu_plus, self.mu_minus, self.origin, self.rho, self.target]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Builds `Ψ_{λ,μ}` for `z` with principal square roots for `λ` and `μ`.
pub fn build_neil(z: &BidiskPoint, cfg: &PoleConfig) -> Result<NeilDisk> {
    build_neil_with_eta(z, cfg, DEFAULT_ETA)
}

pub fn build_neil_with_eta(z: &BidiskPoint, cfg: &PoleConfig, eta: f64) -> Result<NeilDisk> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!("eta must lie in (0,1), got {eta}")));
    }
    if cfg.mode() == PoleMode::SingleOrigin {
        return Err(Error::DegenerateTarget("the Neil disk needs the three-pole configuration"));
    }
    let (z1, z2, eps, s) = (z.z1(), z.z2(), cfg.epsilon(), cfg.s());
    if z1 == ZERO {
        return Err(Error::DegenerateTarget("z1 = 0"));
    }
    if z2 == ZERO {
        return Err(Error::DegenerateTarget("z2 = 0"));
    }
    let shifted = z2 - eps;
    if shifted == ZERO {
        return Err(Error::DegenerateTarget("z2 = epsilon"));
    }
    let q = z1 / shifted;
    let lambda_sq = q / z2 * (q + s);
    if (q + s).norm() <= TOL_GEOM * q.norm().max(s.norm()) || !lambda_sq.is_finite() {
        return Err(Error::DegenerateTarget("lambda^2 vanishes (z1/(z2-eps) = -s)"));
    }
    let lambda = lambda_sq.sqrt();
    let a = s / (lambda * 2.0);
    let mu = (eps + a * a).sqrt();
    let zeta_z = (q + s * 0.5) / lambda;

    for (v, which) in [
        (mu, "mu"),
        (a, "s/(2 lambda)"),
        (zeta_z, "zeta_z"),
    ] {
        if !(v.norm() < 1.0) {
            return Err(Error::PreimageOutsideDisk {
                which,
                modulus: v.norm(),
            });
        }
    }
    Ok(NeilDisk {
        lambda,
        mu,
        s,
        zeta_z,
        eta,
        source_z: *z,
        source_cfg: *cfg,
    })
}

pub fn eval_neil(d: &NeilDisk, zeta: ClosedDiskPoint) -> [Complex64; 2] {
    d.eval(zeta.value())
}

/// Upper bound for `sup |Ψ′|` on the closed disk of radius `r`, from the
/// coefficients of both coordinate polynomials.
pub fn derivative_bound(d: &NeilDisk, r: f64) -> f64 {
    let (l, s, mu2) = (d.lambda.norm(), d.s.norm(), (d.mu * d.mu).norm());
    // Ψ₁ = λζ³ − (s/2)ζ² − λμ²ζ + (s/2)μ²
    let first = 3.0 * l * r * r + s * r + l * mu2;
    let second = 2.0 * r;
    first.max(second)
}

/// Certifies `Ψ(D(0,1−η)) ⊂ 𝔻²`.
///
/// Samples `n_samples` equispaced points of `|ζ| = 1−η`; by the maximum
/// principle the circle carries the maximum modulus, and between two samples
/// the modulus can grow by at most `sup|Ψ′|·πr/n`. Returns
/// `1 − max_sample − slack`, which is positive exactly when certified.
pub fn containment_check(d: &NeilDisk, eta: f64, n_samples: usize) -> Result<f64> {
    let margin = containment_margin(d, eta, n_samples)?;
    if margin > 0.0 {
        Ok(margin)
    } else {
        Err(Error::ContainmentFailed { margin })
    }
}

/// Same as [`containment_check`] but returns a non-positive margin instead of
/// an error.
pub fn containment_margin(d: &NeilDisk, eta: f64, n_samples: usize) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!("eta must lie in (0,1), got {eta}")));
    }
    if n_samples < MIN_CONTAINMENT_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_CONTAINMENT_SAMPLES} samples, got {n_samples}"
        )));
    }
    let r = 1.0 - eta;
    // Fixed chunking keeps the reduction order independent of thread count.
    let max_mod = (0..n_samples)
        .collect::<Vec<_>>()
        .par_chunks(512)
        .map(|chunk| {
            chunk.iter().fold(0.0f64, |acc, &k| {
                let theta = 2.0 * PI * (k as f64) / (n_samples as f64);
                let v = d.eval(Complex64::from_polar(r, theta));
                acc.max(v[0].norm()).max(v[1].norm())
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    let slack = derivative_bound(d, r) * PI * r / n_samples as f64;
    Ok(1.0 - max_mod - slack)
}
