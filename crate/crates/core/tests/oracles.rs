//! Values frozen from `tests/oracle/frozen_values.py` (50-digit mpmath).

#![allow(clippy::excessive_precision)]

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use plurigap::ball::green_upper_in_ball;
use plurigap::green::{green_lower_oracle, green_upper_from_neil};
use plurigap::lempert::CandidateData;
use plurigap::neil::{build_neil, build_neil_with_eta};
use plurigap::pick::{compute_w_values, solve_two_point, TwoPointProblem};
use plurigap::{BidiskPoint, PoleConfig};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn close(got: Complex64, want: Complex64, rel: f64) {
    let scale = want.norm().max(1e-300);
    assert!(
        (got - want).norm() <= rel * scale,
        "got {got}, want {want}, rel err {:e}",
        (got - want).norm() / scale
    );
}

#[test]
fn w_values_real_nodes() {
    let z = BidiskPoint::new(c(1e-3, 0.0), c(1e-2, 0.0)).unwrap();
    let cfg = PoleConfig::new(c(1e-6, 0.0), c(1e-6, 0.0)).unwrap();
    let w = compute_w_values(&z, &cfg, c(0.1, 0.0), c(0.11, 0.0), c(0.09, 0.0)).unwrap();
    close(w.w1, c(-4.5004545454545455e-10, 0.0), 1e-13);
    close(w.w2, c(-0.991, 0.0), 1e-13);
    close(w.w3, c(9.89, 0.0), 1e-13);
    close(w.w4, c(0.00055005555555555556, 0.0), 1e-13);
    // |w3| > 1: this triple is infeasible
    assert!(w.w3.norm() > 1.0);
    let cand = CandidateData::triple(&z, &cfg, c(0.1, 0.0), c(0.11, 0.0), c(0.09, 0.0)).unwrap();
    assert!((cand.objective.as_f64() - (-11.492823772958654)).abs() < 1e-12);
}

#[test]
fn w_values_complex_nodes() {
    let z = BidiskPoint::new(c(1e-3, 2e-4), c(-5e-3, 1e-2)).unwrap();
    let cfg = PoleConfig::new(c(1e-5, 1e-5), c(0.5, -0.25)).unwrap();
    let w = compute_w_values(&z, &cfg, c(0.2, 0.05), c(-0.01, 0.02), c(0.03, -0.04)).unwrap();
    close(w.w1, c(0.0036572115384615385, -0.0032735576923076923), 1e-12);
    close(w.w2, c(-0.021917392686804452, 0.013257996820349762), 1e-12);
    close(w.w3, c(0.020774509803921569, -0.25506862745098039), 1e-12);
    close(w.w4, c(0.0035426923076923077, -0.0016934615384615385), 1e-12);
}

#[test]
fn neil_parameters_and_bounds() {
    let z = BidiskPoint::new(c(1e-3, 0.0), c(1e-2, 0.0)).unwrap();
    let cfg = PoleConfig::new(c(1e-4, 0.0), c(1e-4, 0.0)).unwrap();
    let d = build_neil(&z, &cfg).unwrap();
    close(d.lambda, c(1.0106008864122285, 0.0), 1e-13);
    close(d.mu, c(0.010000122390583608, 0.0), 1e-13);
    close(d.zeta_z, c(0.10000001223913251, 0.0), 1e-13);
    let up = green_upper_from_neil(&d, 0.05).unwrap();
    assert!((up.value.as_f64() - (-9.0152163024806589)).abs() < 1e-11);
    let lo = green_lower_oracle(&cfg, &z).unwrap();
    assert!((lo - (-13.825559893817276)).abs() < 1e-11);
}

#[test]
fn canonical_gap_point_bounds() {
    let z = BidiskPoint::new(Complex64::from_polar(10f64.powf(-4.5), FRAC_PI_4), c(1e-3, 0.0)).unwrap();
    let cfg = PoleConfig::new(c(1e-6, 0.0), c(1e-6, 0.0)).unwrap();
    let d = build_neil_with_eta(&z, &cfg, 0.05).unwrap();
    let up = green_upper_from_neil(&d, 0.05).unwrap();
    assert!((up.value.as_f64() - (-13.611337879519918)).abs() < 1e-10);
    let ball = green_upper_in_ball(&z, &cfg, 0.05).unwrap();
    assert!((ball.value.value - (-12.918190697732235)).abs() < 1e-10);
    let threshold = 1.8 * (1e-3f64).ln();
    assert!((threshold - (-12.433959502167847)).abs() < 1e-13);
}

#[test]
fn two_point_interpolant() {
    let p = TwoPointProblem::new(c(0.1, 0.2), c(-0.3, 0.1), c(0.5, -0.1), c(-0.1, 0.15)).unwrap();
    let h = solve_two_point(&p).unwrap();
    close(h.schur_constant(), c(0.23991240076649329, 0.346181220914317), 1e-13);
    close(h.eval(c(0.3, 0.2)), c(-0.25214440404923563, 0.16679684807049129), 1e-13);
}
