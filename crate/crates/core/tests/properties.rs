use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use plurigap::certificate::{evaluate_chain, ChainParams};
use plurigap::geometry::{
    blaschke_eval, mobius, pdist, phi, pseudo_dist, BlaschkeProduct, ClosedDiskPoint, DiskPoint, TOL_GEOM,
};
use plurigap::green::{green_lower_oracle, green_upper_from_neil, poletsky_disk_bound};
use plurigap::lempert::{feasible, neil_seed, CandidateData};
use plurigap::neil::{build_neil, build_neil_with_eta};
use plurigap::pick::{
    assemble_disk, pick_feasible, prob_residual, solve_two_point, FactorizedDisk, TwoPointProblem,
};
use plurigap::{BidiskPoint, PoleConfig};

fn disk_point(max_r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max_r, -PI..PI).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn dp(c: Complex64) -> DiskPoint {
    DiskPoint::new(c).unwrap()
}

/// A point of the sector `½|z₂|^{3/2} ≤ |z₁| ≤ |z₂|^{3/2}` with small `|z₂|`.
fn sector_point() -> impl Strategy<Value = BidiskPoint> {
    (-8.0f64..-2.0, 0.5f64..1.0, -PI..PI, -PI..PI).prop_map(|(l, k, a1, a2)| {
        let t = 10f64.powf(l);
        BidiskPoint::new(Complex64::from_polar(k * t.powf(1.5), a1), Complex64::from_polar(t, a2)).unwrap()
    })
}

proptest! {
    #[test]
    fn mobius_is_an_involution(a in disk_point(0.99), z in disk_point(1.0)) {
        let back = mobius(dp(a), mobius(dp(a), ClosedDiskPoint::new(z).unwrap()));
        prop_assert!((back.value() - z).norm() < TOL_GEOM);
    }

    #[test]
    fn mobius_exchanges_center_and_origin(a in disk_point(0.99)) {
        prop_assert!((phi(a, Complex64::new(0.0, 0.0)) - a).norm() < TOL_GEOM);
        prop_assert!(phi(a, a).norm() < TOL_GEOM);
    }

    #[test]
    fn pseudo_distance_is_a_metric(a in disk_point(0.99), b in disk_point(0.99), c in disk_point(0.99)) {
        let (a, b, c) = (dp(a), dp(b), dp(c));
        prop_assert!((pseudo_dist(a, b) - pseudo_dist(b, a)).abs() < TOL_GEOM);
        prop_assert!(pseudo_dist(a, c) <= pseudo_dist(a, b) + pseudo_dist(b, c) + TOL_GEOM);
        prop_assert!(pseudo_dist(a, b) < 1.0);
    }

    #[test]
    fn mobius_preserves_the_circle(a in disk_point(0.99), t in -PI..PI) {
        let w = mobius(dp(a), ClosedDiskPoint::polar(1.0, t));
        prop_assert!((w.value().norm() - 1.0).abs() < TOL_GEOM);
    }

    #[test]
    fn blaschke_products_contract(
        zeros in proptest::collection::vec(disk_point(0.95), 1..5),
        t in -PI..PI,
        a in disk_point(0.95),
        b in disk_point(0.95),
    ) {
        let bp = BlaschkeProduct::new(
            Complex64::from_polar(1.0, t),
            zeros.into_iter().map(dp).collect(),
        ).unwrap();
        let ba = blaschke_eval(&bp, dp(a).closed());
        let bb = blaschke_eval(&bp, dp(b).closed());
        prop_assert!(pdist(ba, bb) <= pdist(a, b) + TOL_GEOM);
    }

    #[test]
    fn pick_test_matches_construction(
        na in disk_point(0.95), ta in disk_point(0.95), nb in disk_point(0.95), tb in disk_point(0.95),
    ) {
        prop_assume!(na != nb);
        let p = TwoPointProblem::new(na, ta, nb, tb).unwrap();
        let verdict = pick_feasible(&p);
        let solved = solve_two_point(&p);
        prop_assert_eq!(verdict.feasible, solved.is_ok());
        if let Ok(h) = solved {
            prop_assert!((h.eval(na) - ta).norm() < 1e-10);
            prop_assert!((h.eval(nb) - tb).norm() < 1e-10);
            prop_assert!(h.schur_constant().norm() < 1.0);
        }
    }

    #[test]
    fn interpolants_contract(
        na in disk_point(0.9), ta in disk_point(0.9), nb in disk_point(0.9), tb in disk_point(0.9),
        u in disk_point(0.999), v in disk_point(0.999),
    ) {
        prop_assume!(na != nb);
        let p = TwoPointProblem::new(na, ta, nb, tb).unwrap();
        if let Ok(h) = solve_two_point(&p) {
            prop_assert!(pdist(h.eval(u), h.eval(v)) <= pdist(u, v) + TOL_GEOM);
        }
    }

    /// Builds a disk from random nodes and random Möbius factors, reads off
    /// the pole set and target it passes through, and checks that the
    /// reduction recognizes and reconstructs it.
    #[test]
    fn reduction_recovers_planted_disks(
        z0 in disk_point(0.9), z1 in disk_point(0.9), z2 in disk_point(0.9),
        a1 in disk_point(0.9), c1 in disk_point(0.9), b1 in disk_point(0.9),
        a2 in disk_point(0.9), c2 in disk_point(0.9), b2 in disk_point(0.9),
    ) {
        prop_assume!(pdist(z0, z1) > 1e-3 && pdist(z0, z2) > 1e-3 && pdist(z1, z2) > 1e-3);
        prop_assume!(z0.norm() > 1e-3 && z1.norm() > 1e-3 && z2.norm() > 1e-3);
        let h1 = |w: Complex64| phi(a1, c1 * phi(b1, w));
        let h2 = |w: Complex64| phi(a2, c2 * phi(b2, w));
        let rho = z1 * phi(z2, z1) * h1(z1);
        let eps = z2 * phi(z1, z2) * h2(z2);
        prop_assume!(eps.norm() > 1e-6);
        let cfg = PoleConfig::new(eps, rho / eps).unwrap();
        let target = BidiskPoint::new(z0 * phi(z2, z0) * h1(z0), z0 * phi(z1, z0) * h2(z0)).unwrap();
        let cand = CandidateData::triple(&target, &cfg, z0, z1, z2).unwrap();
        let f = feasible(&cand, &target, &cfg).unwrap();
        prop_assert!(f.feasible, "{:?}", f);
        let disk = FactorizedDisk::through_poles(&target, &cfg, z0, z1, z2).unwrap();
        prop_assert!(prob_residual(&disk, &target, &cfg, z0) < 1e-9);
    }

    #[test]
    fn feasibility_is_rotation_invariant(
        z in sector_point(), t in -PI..PI,
        z0 in disk_point(0.9), z1 in disk_point(0.9), z2 in disk_point(0.9),
    ) {
        prop_assume!(pdist(z0, z1) > 1e-3 && pdist(z0, z2) > 1e-3 && pdist(z1, z2) > 1e-3);
        prop_assume!(z0.norm() > 1e-3 && z1.norm() > 1e-3 && z2.norm() > 1e-3);
        let eps = z.z2().norm().powi(3);
        let cfg = PoleConfig::with_default_s(Complex64::new(eps, 0.0)).unwrap();
        let r = Complex64::from_polar(1.0, t);
        let a = CandidateData::triple(&z, &cfg, z0, z1, z2).unwrap();
        let b = CandidateData::triple(&z, &cfg, r * z0, r * z1, r * z2).unwrap();
        prop_assert!((a.objective.as_f64() - b.objective.as_f64()).abs() < 1e-9);
        let fa = feasible(&a, &z, &cfg).unwrap();
        let fb = feasible(&b, &z, &cfg).unwrap();
        for (x, y) in fa.modulus_margins.iter().zip(&fb.modulus_margins) {
            prop_assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn assembled_disks_stay_in_the_closed_bidisk(z in sector_point()) {
        let eps = z.z2().norm().powi(3);
        let cfg = PoleConfig::with_default_s(Complex64::new(eps, 0.0)).unwrap();
        let (_, [a, b, c]) = neil_seed(&z, &cfg).unwrap();
        let disk = FactorizedDisk::through_poles(&z, &cfg, a, b, c).unwrap();
        for k in 0..1000 {
            let zeta = ClosedDiskPoint::polar(1.0 - 1e-6, 2.0 * PI * k as f64 / 1000.0);
            let w = assemble_disk(&disk, zeta);
            prop_assert!(w[0].norm() <= 1.0 + 1e-9 && w[1].norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn neil_disk_passes_through_poles(z in sector_point(), le in -14.0f64..-3.0, s_log in -14.0f64..-1.0) {
        let cfg = PoleConfig::new(Complex64::new(10f64.powf(le), 0.0), Complex64::new(10f64.powf(s_log), 0.0)).unwrap();
        if let Ok(d) = build_neil(&z, &cfg) {
            prop_assert!(d.passage_residuals().max() < 1e-10, "{:?}", d.passage_residuals());
        }
    }

    #[test]
    fn lambda_is_bounded_below_on_the_sector(z in sector_point()) {
        let eps = z.z2().norm().powi(3);
        let cfg = PoleConfig::with_default_s(Complex64::new(eps, 0.0)).unwrap();
        let d = build_neil(&z, &cfg).unwrap();
        prop_assert!(d.lambda.norm_sqr() >= 1.0 / 32.0);
    }

    #[test]
    fn preimage_of_target_tracks_square_root(z in sector_point()) {
        let eps = z.z2().norm().powi(3) * 0.1;
        let cfg = PoleConfig::with_default_s(Complex64::new(eps, 0.0)).unwrap();
        let d = build_neil(&z, &cfg).unwrap();
        prop_assert!((d.zeta_z.norm() - z.z2().norm().sqrt()).abs() <= d.eta);
    }

    #[test]
    fn upper_bound_ignores_the_square_root_branch(z in sector_point()) {
        let eps = z.z2().norm().powi(3);
        let cfg = PoleConfig::with_default_s(Complex64::new(eps, 0.0)).unwrap();
        let d = build_neil(&z, &cfg).unwrap();
        let mut flipped = d;
        flipped.lambda = -d.lambda;
        flipped.zeta_z = -d.zeta_z;
        prop_assert!(flipped.passage_residuals().max() < 1e-10);
        let a = green_upper_from_neil(&d, d.eta).unwrap().value.as_f64();
        let b = green_upper_from_neil(&flipped, d.eta).unwrap().value.as_f64();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn upper_bound_dominates_lower_oracle(z in sector_point(), le in 0.0f64..3.0) {
        let eps = z.z2().norm().powf(3.0 + le);
        let cfg = PoleConfig::with_default_s(Complex64::new(eps, 0.0)).unwrap();
        let d = build_neil_with_eta(&z, &cfg, 0.05).unwrap();
        let up = green_upper_from_neil(&d, 0.05).unwrap().value.as_f64();
        let lo = green_lower_oracle(&cfg, &z).unwrap();
        prop_assert!(lo <= up + 1e-9);
    }

    #[test]
    fn bounds_are_invariant_under_coordinate_rotations(z in sector_point(), a in -PI..PI, b in -PI..PI) {
        let eps = Complex64::new(z.z2().norm().powi(3), 0.0);
        let cfg = PoleConfig::with_default_s(eps).unwrap();
        let (ra, rb) = (Complex64::from_polar(1.0, a), Complex64::from_polar(1.0, b));
        // (z₁, z₂) ↦ (ra z₁, rb z₂) maps S_ε to S_{rb ε} with s ↦ s·ra/rb
        let zr = BidiskPoint::new(ra * z.z1(), rb * z.z2()).unwrap();
        let cr = PoleConfig::new(rb * eps, cfg.s() * ra / rb).unwrap();
        let lo = green_lower_oracle(&cfg, &z).unwrap();
        let lor = green_lower_oracle(&cr, &zr).unwrap();
        prop_assert!((lo - lor).abs() < 1e-9);
        let up = green_upper_from_neil(&build_neil(&z, &cfg).unwrap(), 0.05).unwrap().value.as_f64();
        let upr = green_upper_from_neil(&build_neil(&zr, &cr).unwrap(), 0.05).unwrap().value.as_f64();
        prop_assert!((up - upr).abs() < 1e-9);
    }

    #[test]
    fn poletsky_bound_ignores_order(pts in proptest::collection::vec(disk_point(0.9), 1..6), e in disk_point(0.9), seed in any::<u64>()) {
        let pre: Vec<DiskPoint> = pts.iter().copied().map(dp).collect();
        let mut shuffled = pre.clone();
        let n = shuffled.len();
        shuffled.rotate_left((seed % n as u64) as usize);
        shuffled.reverse();
        let a = poletsky_disk_bound(&pre, dp(e));
        let b = poletsky_disk_bound(&shuffled, dp(e));
        match (a, b) {
            (Ok(x), Ok(y)) => prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0)),
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn chain_agrees_with_feasibility_and_steps_hold(
        z0 in disk_point(0.5), t1 in disk_point(0.5), t2 in disk_point(0.5),
    ) {
        prop_assume!(z0.norm() > 1e-6 && t1.norm() > 1e-6 && t2.norm() > 1e-6);
        let t: f64 = 1e-14;
        let z = BidiskPoint::new(Complex64::new(t.powf(1.5), 0.0), Complex64::new(t, 0.0)).unwrap();
        let cfg = PoleConfig::new(Complex64::new(1e-23, 0.0), Complex64::new(1e-23, 0.0)).unwrap();
        let p = ChainParams::new(0.2, z, cfg).unwrap();
        let cand = CandidateData::triple(&z, &cfg, z0, phi(z0, t1), phi(z0, t2)).unwrap();
        let tr = evaluate_chain(&p, &cand).unwrap();
        prop_assert_eq!(tr.feasibility, feasible(&cand, &z, &cfg).unwrap());
        for s in &tr.steps {
            if s.holds {
                prop_assert!(s.lhs <= s.rhs + 1e-12 * s.rhs.abs().max(1.0), "{:?}", s);
            }
        }
    }
}
