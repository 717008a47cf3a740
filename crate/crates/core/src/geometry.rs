//! Hyperbolic geometry of the unit disk: the involutive Möbius automorphisms
//! `φ_a(ζ) = (a − ζ)/(1 − ā ζ)`, the pseudohyperbolic distance and finite
//! Blaschke products.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for geometric identities (involution, boundary preservation,
/// contraction) in double precision.
pub const TOL_GEOM: f64 = 1e-12;

/// A point of the open unit disk, `|value| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(value: Complex64) -> Result<Self> {
        if value.norm() < 1.0 && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(outside("disk point", value, "open unit disk"))
        }
    }

    pub fn from_re(re: f64) -> Result<Self> {
        Self::new(Complex64::new(re, 0.0))
    }

    pub const ORIGIN: DiskPoint = DiskPoint(Complex64::new(0.0, 0.0));

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.0.norm()
    }

    pub fn closed(self) -> ClosedDiskPoint {
        ClosedDiskPoint(self.0)
    }
}

impl TryFrom<Complex64> for DiskPoint {
    type Error = Error;
    fn try_from(value: Complex64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.0
    }
}

/// A point of the closed unit disk, `|value| <= 1`. Used for boundary
/// evaluation only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct ClosedDiskPoint(Complex64);

impl ClosedDiskPoint {
    pub fn new(value: Complex64) -> Result<Self> {
        if value.norm() <= 1.0 && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(outside("closed disk point", value, "closed unit disk"))
        }
    }

    /// The point `r e^{iθ}`, with the modulus clamped into `[0, 1]`.
    pub fn polar(r: f64, theta: f64) -> Self {
        Self(Complex64::from_polar(r.clamp(0.0, 1.0), theta))
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }

    /// Narrows to the open disk, failing on the unit circle.
    pub fn interior(self) -> Result<DiskPoint> {
        DiskPoint::new(self.0)
    }
}

impl TryFrom<Complex64> for ClosedDiskPoint {
    type Error = Error;
    fn try_from(value: Complex64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ClosedDiskPoint> for Complex64 {
    fn from(p: ClosedDiskPoint) -> Self {
        p.0
    }
}

impl From<DiskPoint> for ClosedDiskPoint {
    fn from(p: DiskPoint) -> Self {
        ClosedDiskPoint(p.0)
    }
}

/// A point `(z₁, z₂)` of the open bidisk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[Complex64; 2]", into = "[Complex64; 2]")]
pub struct BidiskPoint {
    z1: Complex64,
    z2: Complex64,
}

impl BidiskPoint {
    pub fn new(z1: Complex64, z2: Complex64) -> Result<Self> {
        DiskPoint::new(z1).map_err(|_| outside("z1", z1, "open unit disk"))?;
        DiskPoint::new(z2).map_err(|_| outside("z2", z2, "open unit disk"))?;
        Ok(Self { z1, z2 })
    }

    #[inline]
    pub fn z1(&self) -> Complex64 {
        self.z1
    }

    #[inline]
    pub fn z2(&self) -> Complex64 {
        self.z2
    }

    pub fn coords(&self) -> [Complex64; 2] {
        [self.z1, self.z2]
    }

    /// `max(|z₁|, |z₂|)`, the bidisk norm.
    pub fn sup_norm(&self) -> f64 {
        self.z1.norm().max(self.z2.norm())
    }

    /// Squared Euclidean norm `|z₁|² + |z₂|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    pub fn in_ball(&self) -> bool {
        self.norm_sqr() < 1.0
    }

    /// `½|z₂|^{3/2} <= |z₁| <= |z₂|^{3/2}`.
    pub fn in_sector(&self) -> bool {
        let cusp = self.z2.norm().powf(1.5);
        let m = self.z1.norm();
        0.5 * cusp <= m && m <= cusp
    }

    /// Multiplies both coordinates by a positive real factor.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.z1 * factor, self.z2 * factor)
    }
}

impl TryFrom<[Complex64; 2]> for BidiskPoint {
    type Error = Error;
    fn try_from(c: [Complex64; 2]) -> Result<Self> {
        Self::new(c[0], c[1])
    }
}

impl From<BidiskPoint> for [Complex64; 2] {
    fn from(p: BidiskPoint) -> Self {
        p.coords()
    }
}

fn outside(what: &'static str, v: Complex64, domain: &'static str) -> Error {
    Error::OutsideDomain {
        what,
        re: v.re,
        im: v.im,
        domain,
    }
}

/// Raw `φ_a(ζ) = (a − ζ)/(1 − ā ζ)` without domain checks.
#[inline]
pub fn phi(a: Complex64, zeta: Complex64) -> Complex64 {
    (a - zeta) / (Complex64::new(1.0, 0.0) - a.conj() * zeta)
}

/// Raw pseudohyperbolic distance `|φ_a(b)|` without domain checks.
#[inline]
pub fn pdist(a: Complex64, b: Complex64) -> f64 {
    phi(a, b).norm()
}

/// The involutive automorphism exchanging `0` and `a`, applied to a point of
/// the closed disk.
pub fn mobius(a: DiskPoint, zeta: ClosedDiskPoint) -> ClosedDiskPoint {
    let w = phi(a.0, zeta.0);
    // |w| can exceed 1 by rounding on the circle.
    if w.norm() > 1.0 {
        ClosedDiskPoint(w / w.norm())
    } else {
        ClosedDiskPoint(w)
    }
}

/// Pseudohyperbolic distance `|(a − b)/(1 − ā b)|`.
pub fn pseudo_dist(a: DiskPoint, b: DiskPoint) -> f64 {
    pdist(a.0, b.0)
}

/// Finite Blaschke product `u · Π_k φ_{z_k}(ζ)` with `|u| = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeProduct {
    unimodular_factor: Complex64,
    zeros: Vec<DiskPoint>,
}

impl BlaschkeProduct {
    pub fn new(unimodular_factor: Complex64, zeros: Vec<DiskPoint>) -> Result<Self> {
        if (unimodular_factor.norm() - 1.0).abs() > TOL_GEOM {
            return Err(Error::InvalidParameter(format!(
                "Blaschke factor must be unimodular, got modulus {}",
                unimodular_factor.norm()
            )));
        }
        Ok(Self {
            unimodular_factor,
            zeros,
        })
    }

    pub fn zeros(&self) -> &[DiskPoint] {
        &self.zeros
    }

    pub fn unimodular_factor(&self) -> Complex64 {
        self.unimodular_factor
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }
}

pub fn blaschke_eval(b: &BlaschkeProduct, zeta: ClosedDiskPoint) -> Complex64 {
    b.zeros
        .iter()
        .fold(b.unimodular_factor, |acc, z| acc * phi(z.0, zeta.0))
}
