//! Nelder–Mead downhill simplex for objectives that may return `+∞`
//! (rejected points).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexCoefficients {
    pub reflect: f64,
    pub expand: f64,
    pub contract: f64,
    pub shrink: f64,
}

impl Default for SimplexCoefficients {
    fn default() -> Self {
        Self {
            reflect: 1.0,
            expand: 2.0,
            contract: 0.5,
            shrink: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub coefficients: SimplexCoefficients,
    pub max_iters: usize,
    /// Stop once `f_worst − f_best` and the simplex diameter fall below these.
    pub f_tol: f64,
    pub x_tol: f64,
    /// Stop as soon as the best value reaches this.
    pub f_target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

fn value(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` from an axis-aligned simplex around `x0` with edge `step`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n >= 1 && step.len() == n);
    let c = opts.coefficients;
    let mut evaluations = 0usize;
    let mut f = |x: &[f64]| {
        evaluations += 1;
        f(x)
    };

    let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    pts.push((x0.to_vec(), value(f(x0))));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let fx = value(f(&x));
        pts.push((x, fx));
    }

    let mut iterations = 0;
    while iterations < opts.max_iters {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = pts[n].1 - pts[0].1;
        let diameter = pts[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&pts[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && diameter <= opts.x_tol {
            break;
        }
        // an all-rejected simplex carries no information
        if diameter == 0.0 || pts[0].1 <= opts.f_target || pts[0].1 == f64::INFINITY {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &pts[..n] {
            for (ci, xi) in centroid.iter_mut().zip(x) {
                *ci += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[n].0)
                .map(|(cj, wj)| cj + t * (cj - wj))
                .collect()
        };

        let xr = along(c.reflect);
        let fr = value(f(&xr));
        if fr < pts[0].1 {
            let xe = along(c.reflect * c.expand);
            let fe = value(f(&xe));
            pts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < pts[n - 1].1 {
            pts[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < pts[n].1 {
            let x = along(c.reflect * c.contract);
            let fx = value(f(&x));
            (x, fx)
        } else {
            let x = along(-c.contract);
            let fx = value(f(&x));
            (x, fx)
        };
        if fc < pts[n].1.min(fr) {
            pts[n] = (xc, fc);
            continue;
        }
        let best = pts[0].0.clone();
        for (x, fx) in pts.iter_mut().skip(1) {
            for (xi, bi) in x.iter_mut().zip(&best) {
                *xi = bi + c.shrink * (*xi - bi);
            }
            *fx = value(f(x));
        }
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = pts.swap_remove(0);
    SimplexResult {
        x,
        f,
        iterations,
        evaluations,
    }
}
