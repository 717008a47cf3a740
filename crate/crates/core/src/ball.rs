//! Moving bidisk bounds to the unit ball of ℂ².
//!
//! `𝔹² ⊂ 𝔻²` gives `ℓ^{𝔹²} ≥ ℓ^{𝔻²}` directly. For the Green function,
//! `(√2/2)𝔻² ⊂ 𝔹²` and the dilation `z ↦ √2 z` give
//! `G^{𝔹²}_S(z) ≤ G^{(√2/2)𝔻²}_S(z) = G^{𝔻²}_{√2 S}(√2 z)`, and `√2 S_ε`
//! is again of the form `S_ε′` with `ε′ = √2 ε`, `s′ = s`.

use std::f64::consts::{LN_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BidiskPoint;
use crate::green::{green_upper_from_neil, BoundReport};
use crate::neil::{build_neil_with_eta, PoleConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum DomainTag {
    Bidisk,
    Ball,
    ScaledBidisk { factor: f64 },
}

impl DomainTag {
    pub fn scaled_bidisk(factor: f64) -> Result<Self> {
        if factor > 0.0 && factor <= 1.0 {
            Ok(Self::ScaledBidisk { factor })
        } else {
            Err(Error::InvalidParameter(format!("scale factor {factor} not in (0, 1]")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaggedValue {
    pub value: f64,
    pub domain: DomainTag,
}

/// `Σ|cᵢ|² < 1` for `z` and every pole, with no slack.
pub fn check_in_ball(z: &BidiskPoint, cfg: &PoleConfig) -> Result<()> {
    if !z.in_ball() {
        return Err(Error::NotInBall("z"));
    }
    for p in cfg.poles() {
        if p[0].norm_sqr() + p[1].norm_sqr() >= 1.0 {
            return Err(Error::NotInBall("a pole"));
        }
    }
    Ok(())
}

/// A bidisk lower bound for ℓ is a ball lower bound once everything lies
/// in the ball.
pub fn lempert_lower_in_ball(bidisk_lower: f64, z: &BidiskPoint, cfg: &PoleConfig) -> Result<TaggedValue> {
    check_in_ball(z, cfg)?;
    Ok(TaggedValue {
        value: bidisk_lower,
        domain: DomainTag::Ball,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallGreenBound {
    /// Upper bound for `G^{𝔹²}_{S_ε}(z)`.
    pub value: TaggedValue,
    /// The Neil bound computed on `(√2 z, √2 S_ε)`.
    pub scaled_report: BoundReport,
    /// `2 log|z₂| + log 2 + C₁′`, with `C₁′` measured on the scaled data.
    pub bookkeeping: String,
    pub scaled_c1: Option<f64>,
}

pub fn green_upper_in_ball(z: &BidiskPoint, cfg: &PoleConfig, eta: f64) -> Result<BallGreenBound> {
    check_in_ball(z, cfg)?;
    let zs = z.scaled(SQRT_2)?;
    if !zs.in_sector() {
        return Err(Error::SectorViolation);
    }
    let cs = cfg.scaled(SQRT_2)?;
    let disk = build_neil_with_eta(&zs, &cs, eta)?;
    let report = green_upper_from_neil(&disk, eta)?;
    let value = report.value.as_f64();
    let scaled_c1 = report.c1;
    let bookkeeping = match scaled_c1 {
        Some(c1) => format!(
            "2 log|z2| + log 2 + C1' = {:.12} + {:.12} + {:.12} = {:.12}",
            2.0 * z.z2().norm().ln(),
            LN_2,
            c1,
            value
        ),
        None => "scaled point is a pole: bound is -infinity".to_string(),
    };
    Ok(BallGreenBound {
        value: TaggedValue {
            value,
            domain: DomainTag::Ball,
        },
        scaled_report: report,
        bookkeeping,
        scaled_c1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapVerdict {
    pub gap: f64,
    pub strict: bool,
}

pub fn gap_verdict(lower_ball: f64, upper_ball: f64) -> GapVerdict {
    let gap = lower_ball - upper_ball;
    GapVerdict {
        gap,
        strict: gap > 0.0,
    }
}
