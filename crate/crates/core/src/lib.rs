//! Analytic-disk bounds for the three-pole pluricomplex Green function and
//! Lempert function of the bidisk, and their transfer to the unit ball.
//!
//! The pole set is `S_ε = {(0,0), (εs,0), (0,ε)}`. Upper bounds for the
//! Green function come from an explicit perturbed Neil parabola
//! ([`neil`], [`green`]); the Lempert function is computed through an exact
//! reduction to two two-point Schwarz–Pick problems ([`pick`], [`lempert`]);
//! [`certificate`] checks the inequality chain that bounds it from below;
//! [`ball`] moves both bounds to the unit ball.

// `!(x < 1.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ball;
pub mod certificate;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod green;
pub mod lempert;
pub mod neil;
pub mod pick;
pub mod simplex;

pub use error::{Error, Result};
pub use geometry::{BidiskPoint, ClosedDiskPoint, DiskPoint};
pub use neil::PoleConfig;
