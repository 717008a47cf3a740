use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BidiskPoint;
use crate::lempert::SearchConfig;
use crate::neil::{PoleConfig, DEFAULT_CONTAINMENT_SAMPLES, DEFAULT_ETA};

/// A complex number written as `[re, im]`.
pub type Pair = [f64; 2];

pub fn to_complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn to_pair(c: Complex64) -> Pair {
    [c.re, c.im]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SMode {
    /// `s = ε`
    #[default]
    EqualEpsilon,
    /// `s` taken from the `s` field.
    Fixed,
}

/// How `ε` follows `|z₂|` along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepEpsilon {
    /// `|ε| = |z₂|³`, keeping the phase of `epsilon`.
    #[default]
    Cube,
    /// `epsilon` as configured at every point.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Every parameter a command may use. Unused fields are still embedded in
/// the report so a run is reproducible from its output alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub z: [Pair; 2],
    pub epsilon: Pair,
    pub s_mode: SMode,
    pub s: Pair,
    /// Use the single pole at the origin instead of `S_ε`.
    pub single_pole: bool,
    pub delta: f64,
    pub eta: f64,
    pub containment_samples: usize,
    pub n_starts: usize,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Below-threshold samples for the chain checker.
    pub samples: usize,
    /// Node triple `[ζ₀, ζ₁, ζ₂]` for `chain-check`; sampled when absent.
    pub candidate: Option<[Pair; 3]>,
    /// Fail the gap run unless the gap is strict.
    pub expect_strict: bool,
    pub sweep: Option<String>,
    pub sweep_epsilon: SweepEpsilon,
    pub format: Format,
    pub output_path: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let search = SearchConfig::default();
        Self {
            z: [[1e-3, 0.0], [1e-2, 0.0]],
            epsilon: [1e-4, 0.0],
            s_mode: SMode::EqualEpsilon,
            s: [0.0, 0.0],
            single_pole: false,
            delta: 0.2,
            eta: DEFAULT_ETA,
            containment_samples: DEFAULT_CONTAINMENT_SAMPLES,
            n_starts: search.n_starts,
            max_iters: search.max_iters,
            restarts: search.restarts,
            seed: search.seed,
            samples: 1000,
            candidate: None,
            expect_strict: false,
            sweep: None,
            sweep_epsilon: SweepEpsilon::Cube,
            format: Format::Json,
            output_path: None,
        }
    }
}

impl RunConfig {
    /// Reads a config file; `.toml` files are TOML, anything else JSON.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        if is_toml {
            toml::from_str(&text).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
        } else {
            serde_json::from_str(&text).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
        }
    }

    pub fn point(&self) -> Result<BidiskPoint> {
        BidiskPoint::new(to_complex(self.z[0]), to_complex(self.z[1]))
    }

    pub fn pole_config(&self) -> Result<PoleConfig> {
        if self.single_pole {
            return Ok(PoleConfig::single_origin());
        }
        let eps = to_complex(self.epsilon);
        match self.s_mode {
            SMode::EqualEpsilon => PoleConfig::with_default_s(eps),
            SMode::Fixed => PoleConfig::new(eps, to_complex(self.s)),
        }
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            n_starts: self.n_starts,
            max_iters: self.max_iters,
            restarts: self.restarts,
            seed: self.seed,
            ..SearchConfig::default()
        }
    }

    /// One config per sweep value, or just `self` without a sweep.
    pub fn expand_sweep(&self) -> Result<Vec<RunConfig>> {
        let Some(spec) = &self.sweep else {
            return Ok(vec![self.clone()]);
        };
        let unit = |p: Pair| {
            let c = to_complex(p);
            if c.norm() > 0.0 {
                c / c.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        };
        let (u1, u2, ue) = (unit(self.z[0]), unit(self.z[1]), unit(self.epsilon));
        parse_sweep(spec)?
            .into_iter()
            .map(|t| {
                let mut c = self.clone();
                c.sweep = None;
                c.z = [to_pair(u1 * t.powf(1.5)), to_pair(u2 * t)];
                if self.sweep_epsilon == SweepEpsilon::Cube {
                    c.epsilon = to_pair(ue * t.powi(3));
                }
                Ok(c)
            })
            .collect()
    }
}

/// Parses `a,b,c` or `log10:start:stop:n` into values of `|z₂|`.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::InvalidParameter(format!("sweep '{spec}': {msg}"));
    let values: Vec<f64> = if let Some(rest) = spec.strip_prefix("log10:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected log10:start:stop:count"));
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad("start is not a number"))?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad("stop is not a number"))?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad("count is not an integer"))?;
        match n {
            0 => return Err(bad("count must be positive")),
            1 => vec![10f64.powf(start)],
            _ => (0..n)
                .map(|i| 10f64.powf(start + (stop - start) * i as f64 / (n - 1) as f64))
                .collect(),
        }
    } else {
        spec.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad("not a comma-separated list of numbers")))
            .collect::<Result<_>>()?
    };
    if values.is_empty() || values.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(bad("every |z2| must lie in (0, 1)"));
    }
    Ok(values)
}
