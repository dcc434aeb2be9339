//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//! out = "runs/quench"
//!
//! [model]
//! l = 20
//! alpha = 1.4
//! delta = 3.5
//! boundary = "open"
//!
//! [experiment]
//! kind = "quench"
//! sites = [10, 11]
//! t_max = 3.0
//! ```
//!
//! Sites are 1-based. Times are in units of 1/J. Command-line flags override
//! `seed`, `out` and `threads` from the file.

use std::path::PathBuf;

use magnon_core::evolve::SequenceSpec;
use magnon_core::model::{Boundary, ModelParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 20_240_521;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    pub model: ModelConfig,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub l: usize,
    #[serde(default = "one")]
    pub j: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
}

fn one() -> f64 {
    1.0
}
fn default_alpha() -> f64 {
    1.4
}
fn default_boundary() -> Boundary {
    Boundary::Open
}

impl ModelConfig {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.l, self.j, self.alpha, self.delta, self.boundary)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Inclusive uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || self.stop < self.start {
            return Err(CliError::Config(format!("bad grid {:?}", self)));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.start + self.step * i as f64).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Single-magnon dispersion, optionally with simulated spectroscopy.
    Dispersion1 {
        #[serde(default)]
        spectroscopy: bool,
        #[serde(default = "gamma")]
        gamma: f64,
        #[serde(default = "t_one")]
        t_max: f64,
        #[serde(default = "samples")]
        samples: usize,
    },
    /// Two-magnon bound-state dispersion on the ring.
    Dispersion2 {
        #[serde(default)]
        ms: Option<Vec<i64>>,
        #[serde(default)]
        spectroscopy: bool,
        #[serde(default = "t_prep")]
        t_prep: f64,
        #[serde(default = "t_two")]
        t_max: f64,
        #[serde(default = "samples")]
        samples: usize,
    },
    PhaseDiagram {
        #[serde(default = "delta_grid")]
        deltas: Grid,
        #[serde(default = "k_points")]
        k_points: usize,
        #[serde(default = "threshold_factor")]
        threshold_factor: f64,
        /// Omit to use the L4 threshold alone.
        #[serde(default = "scaling_exponent")]
        scaling_exponent: Option<f64>,
    },
    Quench {
        sites: Vec<usize>,
        t_max: f64,
        #[serde(default = "samples")]
        samples: usize,
        #[serde(default = "level")]
        level: f64,
    },
    Participation {
        #[serde(default = "participation_grid")]
        deltas: Grid,
        /// Chain lengths; the model's L when empty.
        #[serde(default)]
        ls: Vec<usize>,
        #[serde(default = "t_eval")]
        t: f64,
    },
    FloquetBench {
        #[serde(default = "sequences")]
        sequences: Vec<String>,
        /// Extra user-defined sequences, referenced by name.
        #[serde(default)]
        custom: Vec<SequenceSpec>,
        #[serde(default = "detuning_grid")]
        detunings: Grid,
        sites: Vec<usize>,
        t: f64,
        steps: usize,
        #[serde(default)]
        second_order: bool,
    },
    Entropy {
        initial: Vec<Vec<usize>>,
        region_a: Vec<usize>,
        region_b: Vec<usize>,
        #[serde(default = "entropy_times")]
        times: Grid,
        /// Snapshots per time for the sampled proxy; 0 skips sampling.
        #[serde(default)]
        shots: usize,
    },
    Sample {
        sites: Vec<usize>,
        times: Vec<f64>,
        #[serde(default = "shots")]
        shots: usize,
        #[serde(default)]
        postselect: Option<usize>,
    },
}

fn gamma() -> f64 {
    0.7
}
fn t_one() -> f64 {
    31.5
}
fn t_two() -> f64 {
    15.75
}
fn t_prep() -> f64 {
    0.19
}
fn samples() -> usize {
    64
}
fn delta_grid() -> Grid {
    Grid::new(0.0, 4.0, 0.1)
}
fn participation_grid() -> Grid {
    Grid::new(0.5, 4.5, 0.25)
}
fn detuning_grid() -> Grid {
    Grid::new(0.0, 1.2, 0.05)
}
fn entropy_times() -> Grid {
    Grid::new(0.0, 3.0, 0.1)
}
fn k_points() -> usize {
    41
}
fn threshold_factor() -> f64 {
    5.0
}
fn scaling_exponent() -> Option<f64> {
    Some(0.5)
}
fn level() -> f64 {
    0.5
}
fn t_eval() -> f64 {
    2.0
}
fn shots() -> usize {
    magnon_core::sampling::DEFAULT_SHOTS
}
fn sequences() -> Vec<String> {
    vec!["dd".into(), "plain".into()]
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Dispersion1 { .. } => "dispersion1",
            Experiment::Dispersion2 { .. } => "dispersion2",
            Experiment::PhaseDiagram { .. } => "phase-diagram",
            Experiment::Quench { .. } => "quench",
            Experiment::Participation { .. } => "participation",
            Experiment::FloquetBench { .. } => "floquet-bench",
            Experiment::Entropy { .. } => "entropy",
            Experiment::Sample { .. } => "sample",
        }
    }
}

/// Converts 1-based site labels, checking range.
pub fn zero_based(sites: &[usize], l: usize) -> Result<Vec<usize>> {
    sites
        .iter()
        .map(|&s| {
            if s == 0 || s > l {
                Err(CliError::Config(format!("site {s} outside 1..={l}")))
            } else {
                Ok(s - 1)
            }
        })
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(CliError::EmptyConfig);
        }
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Schema checks that do not need any computation.
    pub fn validate(&self) -> Result<()> {
        let p = self.model.params()?;
        let l = p.l;
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be positive")))
            }
        };
        let pair = |sites: &[usize]| -> Result<()> {
            let z = zero_based(sites, l)?;
            if z.len() != 2 || z[0] == z[1] {
                return Err(CliError::Config("need two distinct sites".into()));
            }
            Ok(())
        };
        match &self.experiment {
            Experiment::Dispersion1 { gamma, t_max, samples, .. } => {
                pos("t_max", *t_max)?;
                if *samples < 8 || !(*gamma > 0.0 && *gamma < std::f64::consts::FRAC_PI_2) {
                    return Err(CliError::Config("need samples ≥ 8 and 0 < gamma < π/2".into()));
                }
            }
            Experiment::Dispersion2 { t_max, samples, .. } => {
                pos("t_max", *t_max)?;
                if p.boundary != Boundary::Ring {
                    return Err(CliError::Config("dispersion2 needs boundary = \"ring\"".into()));
                }
                if *samples < 8 {
                    return Err(CliError::Config("need samples ≥ 8".into()));
                }
            }
            Experiment::PhaseDiagram { deltas, k_points, .. } => {
                deltas.values()?;
                if p.boundary != Boundary::Ring || *k_points == 0 {
                    return Err(CliError::Config("phase-diagram needs a ring and k_points ≥ 1".into()));
                }
            }
            Experiment::Quench { sites, t_max, samples, level } => {
                pair(sites)?;
                pos("t_max", *t_max)?;
                if *samples < 2 || !(*level > 0.0 && *level < 1.0) {
                    return Err(CliError::Config("need samples ≥ 2 and 0 < level < 1".into()));
                }
            }
            Experiment::Participation { deltas, ls, t } => {
                deltas.values()?;
                pos("t", *t)?;
                if ls.iter().any(|&x| x < 4) {
                    return Err(CliError::Config("chain lengths must be ≥ 4".into()));
                }
            }
            Experiment::FloquetBench { sites, t, steps, detunings, .. } => {
                pair(sites)?;
                pos("t", *t)?;
                detunings.values()?;
                if *steps == 0 {
                    return Err(CliError::Config("steps must be ≥ 1".into()));
                }
            }
            Experiment::Entropy { initial, region_a, region_b, times, .. } => {
                for s in initial {
                    pair(s)?;
                }
                zero_based(region_a, l)?;
                zero_based(region_b, l)?;
                if region_a.iter().any(|s| region_b.contains(s)) {
                    return Err(CliError::Config("regions overlap".into()));
                }
                times.values()?;
            }
            Experiment::Sample { sites, times, shots, .. } => {
                zero_based(sites, l)?;
                if times.is_empty() || *shots == 0 {
                    return Err(CliError::Config("need times and shots".into()));
                }
            }
        }
        Ok(())
    }
}
