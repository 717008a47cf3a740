//! Two-point Schwarz–Pick interpolation and the factorized form of an
//! analytic disk through the three poles.
//!
//! A Schur function `h` with `h(a) = w_a`, `h(b) = w_b` exists iff
//! `d(w_a, w_b) < d(a, b)` (or `w_a = w_b`, `h` constant). The interpolant
//! used here is `h = φ_{w_a} ∘ (c · φ_a)` with `c = φ_{w_a}(w_b) / φ_a(b)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{phi, BidiskPoint, ClosedDiskPoint, DiskPoint};
use crate::neil::PoleConfig;

/// Denominator floor below which w-values are rejected as degenerate.
pub const DENOM_FLOOR: f64 = 1e-300;

/// Interpolation data `h(node_a) = target_a`, `h(node_b) = target_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointProblem {
    node_a: DiskPoint,
    target_a: DiskPoint,
    node_b: DiskPoint,
    target_b: DiskPoint,
}

impl TwoPointProblem {
    /// Targets must lie in the open disk; nodes must be distinct.
    pub fn new(
        node_a: Complex64,
        target_a: Complex64,
        node_b: Complex64,
        target_b: Complex64,
    ) -> Result<Self> {
        let node_a = DiskPoint::new(node_a)?;
        let node_b = DiskPoint::new(node_b)?;
        let target_a = DiskPoint::new(target_a)?;
        let target_b = DiskPoint::new(target_b)?;
        if node_a == node_b {
            return Err(Error::CoincidentNodes);
        }
        Ok(Self {
            node_a,
            target_a,
            node_b,
            target_b,
        })
    }

    pub fn node_a(&self) -> DiskPoint {
        self.node_a
    }
    pub fn node_b(&self) -> DiskPoint {
        self.node_b
    }
    pub fn target_a(&self) -> DiskPoint {
        self.target_a
    }
    pub fn target_b(&self) -> DiskPoint {
        self.target_b
    }
}

/// Outcome of the Pick test: `margin = d(node_a, node_b) − d(target_a, target_b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PickVerdict {
    pub feasible: bool,
    pub margin: f64,
}

/// `d(target_a, target_b) < d(node_a, node_b)`, strict, no slack.
pub fn pick_feasible(p: &TwoPointProblem) -> PickVerdict {
    let dn = phi(p.node_a.value(), p.node_b.value()).norm();
    let dt = phi(p.target_a.value(), p.target_b.value()).norm();
    PickVerdict {
        feasible: dt < dn,
        margin: dn - dt,
    }
}

/// `h(ζ) = φ_{outer_center}( (−1)^σ · schur_constant · φ_{inner_node}(ζ) )`.
///
/// `solve_two_point` always produces `σ = 0`; the field is kept so that a
/// serialized interpolant states its convention explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchurInterpolant {
    outer_center: DiskPoint,
    inner_node: DiskPoint,
    schur_constant: Complex64,
    sign_flip: bool,
}

impl SchurInterpolant {
    /// The constant function `h ≡ w`.
    pub fn constant(w: DiskPoint) -> Self {
        Self {
            outer_center: w,
            inner_node: DiskPoint::ORIGIN,
            schur_constant: Complex64::new(0.0, 0.0),
            sign_flip: false,
        }
    }

    pub fn outer_center(&self) -> DiskPoint {
        self.outer_center
    }
    pub fn inner_node(&self) -> DiskPoint {
        self.inner_node
    }
    pub fn schur_constant(&self) -> Complex64 {
        self.schur_constant
    }
    pub fn sign_flip(&self) -> bool {
        self.sign_flip
    }

    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        let sign = if self.sign_flip { -1.0 } else { 1.0 };
        let inner = self.schur_constant * sign * phi(self.inner_node.value(), zeta);
        phi(self.outer_center.value(), inner)
    }
}

/// Constructs the interpolant; fails with `InfeasibleProblem` exactly when
/// [`pick_feasible`] does.
pub fn solve_two_point(p: &TwoPointProblem) -> Result<SchurInterpolant> {
    let num = phi(p.target_a.value(), p.target_b.value());
    let den = phi(p.node_a.value(), p.node_b.value());
    let (num_mod, den_mod) = (num.norm(), den.norm());
    // |c| = |num|/|den|; for positive floats x < y the rounded quotient is < 1.
    let ratio = num_mod / den_mod;
    if !(ratio < 1.0) {
        return Err(Error::InfeasibleProblem {
            margin: den_mod - num_mod,
        });
    }
    Ok(SchurInterpolant {
        outer_center: p.target_a,
        inner_node: p.node_a,
        schur_constant: num / den,
        sign_flip: false,
    })
}

/// The four interpolation targets of a candidate disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WValues {
    /// `h₁(ζ₁)`
    pub w1: Complex64,
    /// `h₁(ζ₀)`
    pub w2: Complex64,
    /// `h₂(ζ₀)`
    pub w3: Complex64,
    /// `h₂(ζ₂)`
    pub w4: Complex64,
}

impl WValues {
    pub fn as_array(&self) -> [Complex64; 4] {
        [self.w1, self.w2, self.w3, self.w4]
    }
}

/// Targets for `h₁`, `h₂` in `φ(ζ) = (ζ φ_{ζ₂}(ζ) h₁(ζ), ζ φ_{ζ₁}(ζ) h₂(ζ))`:
///
/// ```text
/// w₁ = εs / (ζ₁ φ_{ζ₂}(ζ₁))     w₂ = z₁ / (ζ₀ φ_{ζ₂}(ζ₀))
/// w₄ = ε  / (ζ₂ φ_{ζ₁}(ζ₂))     w₃ = z₂ / (ζ₀ φ_{ζ₁}(ζ₀))
/// ```
pub fn compute_w_values(
    z: &BidiskPoint,
    cfg: &PoleConfig,
    zeta0: Complex64,
    zeta1: Complex64,
    zeta2: Complex64,
) -> Result<WValues> {
    let d1 = zeta1 * phi(zeta2, zeta1);
    let d2 = zeta0 * phi(zeta2, zeta0);
    let d4 = zeta2 * phi(zeta1, zeta2);
    let d3 = zeta0 * phi(zeta1, zeta0);
    for (d, what) in [
        (d1, "zeta1 * phi_zeta2(zeta1)"),
        (d2, "zeta0 * phi_zeta2(zeta0)"),
        (d3, "zeta0 * phi_zeta1(zeta0)"),
        (d4, "zeta2 * phi_zeta1(zeta2)"),
    ] {
        if !(d.norm() >= DENOM_FLOOR) {
            return Err(Error::DegenerateNodes(what));
        }
    }
    Ok(WValues {
        w1: cfg.rho() / d1,
        w2: z.z1() / d2,
        w3: z.z2() / d3,
        w4: cfg.epsilon() / d4,
    })
}

/// `φ(ζ) = (ζ·Z₁(ζ)·h₁(ζ), ζ·Z₂(ζ)·h₂(ζ))` where `Z₁ = φ_{ζ₂}` and
/// `Z₂ = φ_{ζ₁}` when the respective node is present, else `1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizedDisk {
    pub zeta1: Option<DiskPoint>,
    pub zeta2: Option<DiskPoint>,
    pub h1: SchurInterpolant,
    pub h2: SchurInterpolant,
}

impl FactorizedDisk {
    /// Builds the disk through the three poles from a node triple, solving
    /// both two-point problems. Fails if either is infeasible.
    pub fn through_poles(
        z: &BidiskPoint,
        cfg: &PoleConfig,
        zeta0: Complex64,
        zeta1: Complex64,
        zeta2: Complex64,
    ) -> Result<Self> {
        let w = compute_w_values(z, cfg, zeta0, zeta1, zeta2)?;
        let p1 = TwoPointProblem::new(zeta1, w.w1, zeta0, w.w2)?;
        let p2 = TwoPointProblem::new(zeta2, w.w4, zeta0, w.w3)?;
        Ok(Self {
            zeta1: Some(DiskPoint::new(zeta1)?),
            zeta2: Some(DiskPoint::new(zeta2)?),
            h1: solve_two_point(&p1)?,
            h2: solve_two_point(&p2)?,
        })
    }

    /// Disk `ζ ↦ (ζ z₁/ζ₀, ζ z₂/ζ₀)` through the origin and `z`.
    pub fn through_origin(z: &BidiskPoint, zeta0: Complex64) -> Result<Self> {
        if zeta0.norm() < DENOM_FLOOR {
            return Err(Error::DegenerateNodes("zeta0 = 0"));
        }
        Ok(Self {
            zeta1: None,
            zeta2: None,
            h1: SchurInterpolant::constant(DiskPoint::new(z.z1() / zeta0)?),
            h2: SchurInterpolant::constant(DiskPoint::new(z.z2() / zeta0)?),
        })
    }

    pub fn eval(&self, zeta: Complex64) -> [Complex64; 2] {
        let f1 = self.zeta2.map_or(Complex64::new(1.0, 0.0), |a| phi(a.value(), zeta));
        let f2 = self.zeta1.map_or(Complex64::new(1.0, 0.0), |a| phi(a.value(), zeta));
        [zeta * f1 * self.h1.eval(zeta), zeta * f2 * self.h2.eval(zeta)]
    }
}

/// Evaluates the assembled disk. The image of the closed disk lies in the
/// closed bidisk, so the result is returned as raw coordinates.
pub fn assemble_disk(d: &FactorizedDisk, zeta: ClosedDiskPoint) -> [Complex64; 2] {
    d.eval(zeta.value())
}

/// Largest residual of the four interpolation conditions
/// `φ(0) = (0,0)`, `φ(ζ₁) = (εs, 0)`, `φ(ζ₂) = (0, ε)`, `φ(ζ₀) = z`.
pub fn prob_residual(
    d: &FactorizedDisk,
    z: &BidiskPoint,
    cfg: &PoleConfig,
    zeta0: Complex64,
) -> f64 {
    let zero = Complex64::new(0.0, 0.0);
    let mut checks = vec![(Complex64::new(0.0, 0.0), [zero, zero]), (zeta0, z.coords())];
    if let Some(z1) = d.zeta1 {
        checks.push((z1.value(), [cfg.rho(), zero]));
    }
    if let Some(z2) = d.zeta2 {
        checks.push((z2.value(), [zero, cfg.epsilon()]));
    }
    checks
        .into_iter()
        .map(|(node, target)| {
            let v = d.eval(node);
            (v[0] - target[0]).norm().max((v[1] - target[1]).norm())
        })
        .fold(0.0, f64::max)
}
