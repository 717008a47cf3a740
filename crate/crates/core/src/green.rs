//! Two-sided bounds for the three-pole Green function of the bidisk.
//!
//! Upper bounds come from analytic disks through the poles: if `f: 𝔻 → 𝔻²`
//! hits the poles at the points `α`, then `G ∘ f` is negative and
//! subharmonic with logarithmic poles at the `α`, so
//! `G(f(ζ)) ≤ Σ_α log d(ζ, α)`. The lower bound is the competitor
//! `Σ_a max(log d(z₁,a₁), log d(z₂,a₂))`, a negative plurisubharmonic
//! function with the required singularities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{pdist, BidiskPoint, DiskPoint};
use crate::neil::{build_neil_with_eta, containment_check, NeilDisk, PoleConfig, DEFAULT_CONTAINMENT_SAMPLES};

/// Slack allowed when comparing a lower and an upper bound.
pub const SANDWICH_SLACK: f64 = 1e-9;

/// A value on the logarithmic scale, with `−∞` kept as a distinct variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogValue {
    Finite(f64),
    NegInfinity,
}

impl LogValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            LogValue::Finite(v) => Some(v),
            LogValue::NegInfinity => None,
        }
    }

    /// `f64` view, mapping the sentinel to `−∞` for comparisons.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Upper,
    Lower,
}

/// What produced a bound; enough to re-evaluate it offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// The rescaled disk `ζ ↦ Ψ((1−η)ζ)` evaluated at `ζ_z/(1−η)`.
    NeilDisk {
        disk: NeilDisk,
        eta: f64,
        containment_margin: f64,
        eval_point: Complex64,
        preimages: Vec<Complex64>,
    },
    /// The sum-of-single-pole competitor.
    SinglePoleSum { terms: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: LogValue,
    pub witness: Witness,
    pub point: BidiskPoint,
    pub config: PoleConfig,
    /// `value − 2 log|z₂|` for Neil upper bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
}

impl BoundReport {
    /// Re-evaluates the witness and returns the absolute discrepancy with
    /// the stated value (zero when both are the sentinel).
    pub fn revalidate(&self) -> Result<f64> {
        let recomputed = match &self.witness {
            Witness::NeilDisk {
                eval_point,
                preimages,
                ..
            } => match poletsky_raw(preimages, *eval_point) {
                Ok(v) => LogValue::Finite(v),
                Err(Error::CoincidentPoint) => LogValue::NegInfinity,
                Err(e) => return Err(e),
            },
            Witness::SinglePoleSum { .. } => {
                LogValue::Finite(green_lower_oracle(&self.config, &self.point)?)
            }
        };
        Ok(match (recomputed, self.value) {
            (LogValue::Finite(a), LogValue::Finite(b)) => (a - b).abs(),
            (LogValue::NegInfinity, LogValue::NegInfinity) => 0.0,
            _ => f64::INFINITY,
        })
    }
}

/// `Σ_α log d(eval_point, α)`.
pub fn poletsky_disk_bound(preimages: &[DiskPoint], eval_point: DiskPoint) -> Result<f64> {
    let raw: Vec<Complex64> = preimages.iter().map(|p| p.value()).collect();
    poletsky_raw(&raw, eval_point.value())
}

fn poletsky_raw(preimages: &[Complex64], eval_point: Complex64) -> Result<f64> {
    if !(eval_point.norm() < 1.0) {
        return Err(Error::PreimageOutsideDisk {
            which: "evaluation point",
            modulus: eval_point.norm(),
        });
    }
    let mut sum = 0.0;
    for &a in preimages {
        if !(a.norm() < 1.0) {
            return Err(Error::PreimageOutsideDisk {
                which: "pole preimage",
                modulus: a.norm(),
            });
        }
        let d = pdist(eval_point, a);
        if d == 0.0 {
            return Err(Error::CoincidentPoint);
        }
        sum += d.ln();
    }
    Ok(sum)
}

/// Upper bound for `G_S(z)` from the Neil disk, shrunk by `1−η`.
///
/// Fails with `ContainmentFailed` when `Ψ(D(0,1−η)) ⊂ 𝔻²` cannot be
/// certified, since the bound is void without it.
pub fn green_upper_from_neil(d: &NeilDisk, eta: f64) -> Result<BoundReport> {
    let margin = containment_check(d, eta, DEFAULT_CONTAINMENT_SAMPLES)?;
    let r = 1.0 - eta;
    let preimages: Vec<Complex64> = d.preimages().iter().map(|p| p / r).collect();
    let eval_point = d.zeta_z / r;
    for (v, which) in preimages
        .iter()
        .zip(["mu/(1-eta)", "-mu/(1-eta)", "s/(2 lambda (1-eta))", "-s/(2 lambda (1-eta))"])
        .map(|(v, w)| (*v, w))
        .chain(std::iter::once((eval_point, "zeta_z/(1-eta)")))
    {
        if !(v.norm() < 1.0) {
            return Err(Error::PreimageOutsideDisk {
                which,
                modulus: v.norm(),
            });
        }
    }
    let value = match poletsky_raw(&preimages, eval_point) {
        Ok(v) => LogValue::Finite(v),
        Err(Error::CoincidentPoint) => LogValue::NegInfinity,
        Err(e) => return Err(e),
    };
    let c1 = value.finite().map(|v| v - 2.0 * d.source_z.z2().norm().ln());
    Ok(BoundReport {
        kind: BoundKind::Upper,
        value,
        witness: Witness::NeilDisk {
            disk: *d,
            eta,
            containment_margin: margin,
            eval_point,
            preimages,
        },
        point: d.source_z,
        config: d.source_cfg,
        c1,
    })
}

/// `Σ_a max(log d(z₁, a₁), log d(z₂, a₂))` over the poles, with multiplicity.
pub fn green_lower_oracle(cfg: &PoleConfig, z: &BidiskPoint) -> Result<f64> {
    lower_terms(cfg, z).map(|t| t.iter().sum())
}

fn lower_terms(cfg: &PoleConfig, z: &BidiskPoint) -> Result<Vec<f64>> {
    cfg.poles()
        .iter()
        .map(|a| {
            let d = pdist(z.z1(), a[0]).max(pdist(z.z2(), a[1]));
            if d == 0.0 {
                Err(Error::PoleHit)
            } else {
                Ok(d.ln())
            }
        })
        .collect()
}

pub fn green_lower_report(cfg: &PoleConfig, z: &BidiskPoint) -> Result<BoundReport> {
    let terms = lower_terms(cfg, z)?;
    Ok(BoundReport {
        kind: BoundKind::Lower,
        value: LogValue::Finite(terms.iter().sum()),
        witness: Witness::SinglePoleSum { terms },
        point: *z,
        config: *cfg,
        c1: None,
    })
}

/// Lower competitor and Neil upper bound at the same point.
///
/// Fails with `InvalidParameter` if the pair is out of order beyond
/// [`SANDWICH_SLACK`], which would mean one of the two is wrong.
pub fn sandwich(cfg: &PoleConfig, z: &BidiskPoint, eta: f64) -> Result<(BoundReport, BoundReport)> {
    let disk = build_neil_with_eta(z, cfg, eta)?;
    let upper = green_upper_from_neil(&disk, eta)?;
    let lower = green_lower_report(cfg, z)?;
    if lower.value.as_f64() > upper.value.as_f64() + SANDWICH_SLACK {
        return Err(Error::InvalidParameter(format!(
            "sandwich violated: lower {:?} > upper {:?}",
            lower.value, upper.value
        )));
    }
    Ok((lower, upper))
}
