//! Acceptance suite: one line per criterion on stderr, then a single
//! assertion over all of them.

use std::f64::consts::{FRAC_PI_4, PI};
use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use plurigap::experiment::{self, Command, CommandResult, Report, RunConfig, SMode};
use plurigap::geometry::{
    blaschke_eval, mobius, pseudo_dist, BlaschkeProduct, ClosedDiskPoint, DiskPoint, TOL_GEOM,
};
use plurigap::green::{green_lower_oracle, green_upper_from_neil, SANDWICH_SLACK};
use plurigap::neil::{build_neil_with_eta, containment_margin, DEFAULT_CONTAINMENT_SAMPLES};
use plurigap::pick::{pick_feasible, solve_two_point, TwoPointProblem};
use plurigap::{BidiskPoint, PoleConfig};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn line(n: usize, name: &str, o: &Outcome, t: Duration) {
    // bypasses the test harness output capture so the lines always show
    let _ = writeln!(
        std::io::stderr(),
        "criterion {n:>2} [{}] {name}: {} ({:.2}s)",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        t.as_secs_f64()
    );
}

fn random_disk(rng: &mut ChaCha8Rng, max_r: f64) -> Complex64 {
    let r = max_r * rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, rng.gen_range(-PI..PI))
}

fn data(report: &Report, i: usize) -> &CommandResult {
    report.points[i].result.as_ref().expect("command produced no result")
}

fn geometry_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let n = 10_000;
    let mut worst = [0.0f64; 5];
    for _ in 0..n {
        let a = DiskPoint::new(random_disk(&mut rng, 0.99)).unwrap();
        let b = DiskPoint::new(random_disk(&mut rng, 0.99)).unwrap();
        let c = DiskPoint::new(random_disk(&mut rng, 0.99)).unwrap();
        let z = ClosedDiskPoint::new(random_disk(&mut rng, 1.0)).unwrap();
        worst[0] = worst[0].max((mobius(a, mobius(a, z)).value() - z.value()).norm());
        worst[1] = worst[1].max((pseudo_dist(a, b) - pseudo_dist(b, a)).abs());
        worst[2] = worst[2].max(pseudo_dist(a, c) - pseudo_dist(a, b) - pseudo_dist(b, c));
        let on_circle = ClosedDiskPoint::polar(1.0, rng.gen_range(-PI..PI));
        worst[3] = worst[3].max((mobius(a, on_circle).value().norm() - 1.0).abs());
        let k = rng.gen_range(1..5);
        let zeros = (0..k).map(|_| DiskPoint::new(random_disk(&mut rng, 0.95)).unwrap()).collect();
        let bp = BlaschkeProduct::new(Complex64::from_polar(1.0, rng.gen_range(-PI..PI)), zeros).unwrap();
        let (ba, bb) = (blaschke_eval(&bp, a.closed()), blaschke_eval(&bp, b.closed()));
        let contraction = plurigap::geometry::pdist(ba, bb) - pseudo_dist(a, b);
        worst[4] = worst[4].max(contraction);
    }
    let elapsed = start.elapsed();
    let pass = worst.iter().all(|w| *w < TOL_GEOM) && elapsed < Duration::from_secs(5);
    Outcome {
        pass,
        detail: format!(
            "{n} samples each; worst involution {:.1e}, symmetry {:.1e}, triangle excess {:.1e}, circle {:.1e}, Schwarz-Pick excess {:.1e}; {:.2}s",
            worst[0], worst[1], worst[2], worst[3], worst[4], elapsed.as_secs_f64()
        ),
    }
}

fn pick_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let n = 10_000;
    let (mut disagreements, mut feasible, mut worst) = (0, 0, 0.0f64);
    for _ in 0..n {
        let (na, nb) = (random_disk(&mut rng, 0.95), random_disk(&mut rng, 0.95));
        let (ta, tb) = (random_disk(&mut rng, 0.95), random_disk(&mut rng, 0.95));
        let p = TwoPointProblem::new(na, ta, nb, tb).unwrap();
        let verdict = pick_feasible(&p);
        let solved = solve_two_point(&p);
        if verdict.feasible != solved.is_ok() {
            disagreements += 1;
        }
        if let Ok(h) = solved {
            feasible += 1;
            worst = worst.max((h.eval(na) - ta).norm()).max((h.eval(nb) - tb).norm());
        }
    }
    Outcome {
        pass: disagreements == 0 && worst < 1e-10,
        detail: format!("{n} problems, {feasible} feasible, {disagreements} disagreements, worst residual {worst:.1e}"),
    }
}

fn neil_exactness() -> Outcome {
    let start = Instant::now();
    let z = BidiskPoint::new(Complex64::new(1e-3, 0.0), Complex64::new(1e-2, 0.0)).unwrap();
    let cfg = PoleConfig::new(Complex64::new(1e-4, 0.0), Complex64::new(1e-4, 0.0)).unwrap();
    let d = build_neil_with_eta(&z, &cfg, 0.05).unwrap();
    let r = d.passage_residuals();
    let margin = containment_margin(&d, 0.05, DEFAULT_CONTAINMENT_SAMPLES).unwrap();
    let elapsed = start.elapsed();
    Outcome {
        pass: r.max() < 1e-9 && margin > 0.0 && elapsed < Duration::from_secs(1),
        detail: format!(
            "residuals (0,eps) {:.1e}/{:.1e}, (0,0) {:.1e}, (rho,0) {:.1e}, target {:.1e}; containment margin {margin:.4}",
            r.mu_plus, r.mu_minus, r.origin, r.rho, r.target
        ),
    }
}

fn c1_band() -> Outcome {
    let cfg = RunConfig {
        sweep: Some("1e-2,1e-3,1e-4".into()),
        ..RunConfig::default()
    };
    let report = experiment::run(Command::GreenBound, &cfg).unwrap();
    let c1: Vec<f64> = (0..report.points.len())
        .map(|i| match data(&report, i) {
            CommandResult::GreenBound(g) => g.upper.c1.unwrap(),
            _ => unreachable!(),
        })
        .collect();
    let lo = c1.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = c1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Outcome {
        pass: c1.len() == 3 && hi - lo < 1.0,
        detail: format!("C1 = {c1:?}, band width {:.2e}", hi - lo),
    }
}

fn sandwich_points() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let n = 100;
    let (mut violations, mut min_gap) = (0, f64::INFINITY);
    for _ in 0..n {
        let t = 10f64.powf(rng.gen_range(-6.0..-2.0));
        let z1 = Complex64::from_polar(rng.gen_range(0.5..1.0) * t.powf(1.5), rng.gen_range(-PI..PI));
        let z = BidiskPoint::new(z1, Complex64::from_polar(t, rng.gen_range(-PI..PI))).unwrap();
        let eps = Complex64::from_polar(t.powi(3) * rng.gen_range(0.01..1.0), rng.gen_range(-PI..PI));
        let cfg = PoleConfig::with_default_s(eps).unwrap();
        let up = build_neil_with_eta(&z, &cfg, 0.05).and_then(|d| green_upper_from_neil(&d, 0.05));
        let lo = green_lower_oracle(&cfg, &z);
        match (up, lo) {
            (Ok(u), Ok(l)) => {
                let gap = u.value.as_f64() - l;
                min_gap = min_gap.min(gap);
                if gap < -SANDWICH_SLACK {
                    violations += 1;
                }
            }
            _ => violations += 1,
        }
    }
    Outcome {
        pass: violations == 0,
        detail: format!("{n} sector points, {violations} violations, smallest upper - lower {min_gap:.3}"),
    }
}

/// Brute-force single-pole Lempert value: the smallest radius on a fine
/// grid for which `z/r` stays in the bidisk.
fn single_pole_brute_force(z: &BidiskPoint) -> f64 {
    let n = 1_000_000;
    (1..n)
        .map(|k| k as f64 / n as f64)
        .find(|&r| z.z1().norm() / r < 1.0 && z.z2().norm() / r < 1.0)
        .map_or(0.0, f64::ln)
}

fn single_pole_reports() -> Vec<(RunConfig, Report)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    (0..20)
        .map(|_| {
            let z1 = random_disk(&mut rng, 0.9);
            let z2 = random_disk(&mut rng, 0.9);
            let cfg = RunConfig {
                z: [[z1.re, z1.im], [z2.re, z2.im]],
                single_pole: true,
                seed: SEED,
                ..RunConfig::default()
            };
            let r = experiment::run(Command::LempertSearch, &cfg).unwrap();
            (cfg, r)
        })
        .collect()
}

fn single_pole(reports: &[(RunConfig, Report)], elapsed: Duration) -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_closed = 0.0f64;
    for (cfg, r) in reports {
        let z = cfg.point().unwrap();
        let CommandResult::LempertSearch(l) = data(r, 0) else { unreachable!() };
        let best = l.outcome.best.objective.as_f64();
        worst = worst.max((best - single_pole_brute_force(&z)).abs());
        worst_closed = worst_closed.max((best - z.sup_norm().ln()).abs());
    }
    Outcome {
        pass: worst < 1e-3 && elapsed < Duration::from_secs(60),
        detail: format!(
            "20 points, worst |search - brute force| {worst:.1e}, worst |search - log max|z|| {worst_closed:.1e}"
        ),
    }
}

fn gap_config() -> RunConfig {
    let z1 = Complex64::from_polar(10f64.powf(-4.5), FRAC_PI_4);
    RunConfig {
        z: [[z1.re, z1.im], [1e-3, 0.0]],
        epsilon: [1e-6, 0.0],
        s_mode: SMode::Fixed,
        s: [1e-6, 0.0],
        delta: 0.2,
        n_starts: 1000,
        seed: SEED,
        samples: 1000,
        expect_strict: true,
        ..RunConfig::default()
    }
}

fn lempert_search_outcome(report: &Report, elapsed: Duration) -> Outcome {
    let CommandResult::Gap(g) = data(report, 0) else { unreachable!() };
    let threshold = -1.8 * (1e3f64).ln();
    match &g.lempert {
        Some(o) => {
            let best = o.best.objective.as_f64();
            Outcome {
                pass: best >= threshold && o.n_starts >= 1000 && elapsed < Duration::from_secs(300),
                detail: format!(
                    "{} starts ({} feasible), best feasible objective {best:.6} vs threshold {threshold:.6}",
                    o.n_starts, o.feasible_starts
                ),
            }
        }
        None => Outcome {
            pass: false,
            detail: format!("search failed: {:?}", report.points[0].messages),
        },
    }
}

fn chain_config() -> RunConfig {
    let t: f64 = 1e-14;
    RunConfig {
        z: [[t.powf(1.5), 0.0], [t, 0.0]],
        epsilon: [1e-23, 0.0],
        delta: 0.2,
        seed: SEED,
        samples: 1000,
        ..RunConfig::default()
    }
}

fn certificate_completeness(report: &Report) -> Outcome {
    let CommandResult::ChainCheck(c) = data(report, 0) else { unreachable!() };
    let in_regime = c.regime_violations.is_empty();
    match &c.disproof {
        Some(d) => Outcome {
            pass: in_regime && d.n_samples == 1000 && d.infeasible == 1000 && d.agreements == 1000,
            detail: format!(
                "in regime {in_regime}, {}/{} infeasible, {} agreements, steps {:?}",
                d.infeasible, d.n_samples, d.agreements, d.step_histogram
            ),
        },
        None => Outcome {
            pass: false,
            detail: format!("no disproof report: {:?}", report.points[0].messages),
        },
    }
}

fn ball_gap(report: &Report, elapsed: Duration) -> Outcome {
    let CommandResult::Gap(g) = data(report, 0) else { unreachable!() };
    match (&g.ball_upper, &g.ball_lower, &g.verdict) {
        (Some(up), Some(lo), Some(v)) => Outcome {
            pass: g.strict && v.gap > 0.3 && elapsed < Duration::from_secs(300),
            detail: format!(
                "ball upper {:.4} < ball lower {:.4}, gap {:.4}, C1' {:.4}",
                up.value.value,
                lo.value,
                v.gap,
                up.scaled_c1.unwrap_or(f64::NAN)
            ),
        },
        _ => Outcome {
            pass: false,
            detail: format!("incomplete gap report: {:?}", report.points[0].messages),
        },
    }
}

fn render_all(reports: &[&Report]) -> Vec<String> {
    reports.iter().map(|r| experiment::to_json(r).unwrap()).collect()
}

#[test]
fn acceptance_criteria() {
    let mut results: Vec<(usize, &str, Outcome, Duration)> = Vec::new();
    let mut record = |n: usize, name: &'static str, o: Outcome, t: Duration| {
        line(n, name, &o, t);
        results.push((n, name, o, t));
    };

    let t = Instant::now();
    record(1, "geometry suite", geometry_suite(), t.elapsed());
    let t = Instant::now();
    record(2, "Pick equivalence", pick_equivalence(), t.elapsed());
    let t = Instant::now();
    record(3, "Neil disk exactness", neil_exactness(), t.elapsed());
    let t = Instant::now();
    record(4, "uniform C1 band", c1_band(), t.elapsed());
    let t = Instant::now();
    record(5, "sandwich", sandwich_points(), t.elapsed());

    let t = Instant::now();
    let single = single_pole_reports();
    let single_time = t.elapsed();
    record(6, "single-pole oracle", single_pole(&single, single_time), single_time);

    let t = Instant::now();
    let gap_report = experiment::run(Command::Gap, &gap_config()).unwrap();
    let gap_time = t.elapsed();
    record(7, "Lempert search above threshold", lempert_search_outcome(&gap_report, gap_time), gap_time);

    let t = Instant::now();
    let chain_report = experiment::run(Command::ChainCheck, &chain_config()).unwrap();
    record(8, "certificate completeness", certificate_completeness(&chain_report), t.elapsed());

    record(9, "ball gap", ball_gap(&gap_report, gap_time), gap_time);

    let t = Instant::now();
    let first: Vec<&Report> = single
        .iter()
        .map(|(_, r)| r)
        .chain([&gap_report, &chain_report])
        .collect();
    let first = render_all(&first);
    let single_again = single_pole_reports();
    let gap_again = experiment::run(Command::Gap, &gap_config()).unwrap();
    let chain_again = experiment::run(Command::ChainCheck, &chain_config()).unwrap();
    let second: Vec<&Report> = single_again
        .iter()
        .map(|(_, r)| r)
        .chain([&gap_again, &chain_again])
        .collect();
    let second = render_all(&second);
    let identical = first.iter().zip(&second).filter(|(a, b)| a == b).count();
    let bytes: usize = first.iter().map(String::len).sum();
    record(
        10,
        "determinism",
        Outcome {
            pass: identical == first.len() && first.len() == second.len(),
            detail: format!("{identical}/{} reports byte-identical ({bytes} bytes)", first.len()),
        },
        t.elapsed(),
    );

    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.2.pass)
        .map(|r| format!("{} ({})", r.0, r.1))
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
