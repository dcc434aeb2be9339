//! Preset runs that regenerate the standard figure data sets.

use magnon_core::model::{Boundary, SectorBasis, StateVector};
use magnon_core::probes::{bs_participation, front_velocity, quench_projectors, time_grid, FrontOptions};
use rayon::prelude::*;

use crate::config::{Experiment, Grid, ModelConfig, RunConfig};
use crate::error::Result;
use crate::experiments;
use crate::output::{Artifact, Cell, Table};
use crate::row;

pub const PRESETS: [&str; 7] = ["fig1c", "fig1d", "fig2", "fig3", "fig4", "figS5", "figS6"];

fn model(l: usize, delta: f64, boundary: Boundary) -> ModelConfig {
    ModelConfig {
        l,
        j: 1.0,
        alpha: 1.4,
        delta,
        boundary,
    }
}

fn cfg(model: ModelConfig, experiment: Experiment) -> RunConfig {
    RunConfig {
        seed: None,
        out: None,
        threads: None,
        model,
        experiment,
    }
}

/// Component runs of a preset, each with its file prefix.
pub fn runs(name: &str) -> Option<Vec<(String, RunConfig)>> {
    let open = Boundary::Open;
    let ring = Boundary::Ring;
    let v = match name {
        "fig1c" => vec![(
            String::new(),
            cfg(
                model(20, 0.0, open),
                Experiment::Dispersion1 {
                    spectroscopy: true,
                    gamma: 0.7,
                    t_max: 31.5,
                    samples: 64,
                },
            ),
        )],
        "fig1d" => vec![(
            String::new(),
            cfg(
                model(20, 3.0, ring),
                Experiment::Dispersion2 {
                    ms: Some((0..=10).collect()),
                    spectroscopy: true,
                    t_prep: 0.19,
                    t_max: 15.75,
                    samples: 64,
                },
            ),
        )],
        "fig2" => [(1.0, 5.5), (2.0, 4.1), (3.5, 3.0)]
            .iter()
            .map(|&(d, t)| {
                (
                    format!("delta{d:.1}_"),
                    cfg(
                        model(20, d, open),
                        Experiment::Quench {
                            sites: vec![10, 11],
                            t_max: t,
                            samples: 64,
                            level: 0.5,
                        },
                    ),
                )
            })
            .collect(),
        "fig3" => vec![(
            String::new(),
            cfg(
                model(20, 0.0, open),
                Experiment::Participation {
                    deltas: Grid::new(0.5, 4.5, 0.25),
                    ls: vec![20, 40],
                    t: 2.0,
                },
            ),
        )],
        "fig4" => [0.5, 4.5]
            .iter()
            .map(|&d| {
                (
                    format!("delta{d:.1}_"),
                    cfg(
                        model(20, d, open),
                        Experiment::Entropy {
                            initial: vec![vec![10, 11], vec![10, 12]],
                            region_a: vec![7, 8, 9],
                            region_b: vec![12, 13, 14],
                            times: Grid::new(0.0, 3.0, 0.25),
                            shots: 2200,
                        },
                    ),
                )
            })
            .collect(),
        "figS5" => vec![
            (
                "l300_".into(),
                cfg(
                    model(300, 0.0, ring),
                    Experiment::PhaseDiagram {
                        deltas: Grid::new(0.0, 4.0, 0.1),
                        k_points: 41,
                        threshold_factor: 5.0,
                        scaling_exponent: Some(0.5),
                    },
                ),
            ),
            (
                "l20_".into(),
                cfg(
                    model(20, 0.0, ring),
                    Experiment::PhaseDiagram {
                        deltas: Grid::new(0.0, 4.0, 0.1),
                        k_points: 6,
                        threshold_factor: 5.0,
                        scaling_exponent: None,
                    },
                ),
            ),
        ],
        "figS6" => vec![(
            String::new(),
            cfg(
                model(10, 3.5, open),
                Experiment::FloquetBench {
                    sequences: vec!["dd".into(), "plain".into()],
                    custom: vec![],
                    detunings: Grid::new(0.0, 1.2, 0.05),
                    sites: vec![5, 6],
                    t: 3.3,
                    steps: 32,
                    second_order: false,
                },
            ),
        )],
        _ => return None,
    };
    Some(v)
}

/// Artifacts that do not map onto a single experiment kind.
pub fn extras(name: &str) -> Result<Vec<Artifact>> {
    match name {
        "fig3" => fig3_dynamics(),
        _ => Ok(vec![]),
    }
}

/// Participation against time and the bound-pair front velocity against Δ, L = 20.
fn fig3_dynamics() -> Result<Vec<Artifact>> {
    let l = 20;
    let basis = SectorBasis::new(l, 2)?;
    let psi = StateVector::sector_config(&basis, &[9, 10])?;
    let times = time_grid(3.0, 61);
    let deltas = Grid::new(0.5, 5.0, 0.25).values()?;
    let base = model(l, 0.0, Boundary::Open).params()?;
    let results = deltas
        .par_iter()
        .map(|&d| {
            let (_, pair) = quench_projectors(&base.with_delta(d), &psi, &times)?;
            Ok((pair.row_sums(), front_velocity(&pair, &FrontOptions::default()).ok()))
        })
        .collect::<magnon_core::Result<Vec<_>>>()?;

    let mut header = vec!["t".to_string()];
    header.extend(deltas.iter().map(|d| format!("P_delta{d}")));
    let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut pt = Table::new("participation_time", &h)
        .meta("L", l)
        .meta("alpha", 1.4)
        .meta("initial", "[10, 11]");
    for (i, t) in times.iter().enumerate() {
        let mut r = row![t];
        r.extend(results.iter().map(|(sums, _)| bs_participation(&[sums[i]], l).cell()));
        pt.push(r);
    }

    let mut vt = Table::new("velocity", &["delta", "velocity", "residual", "points"])
        .meta("L", l)
        .meta("alpha", 1.4)
        .meta("map", "pair")
        .meta("level", 0.5);
    for (d, (_, fit)) in deltas.iter().zip(&results) {
        match fit {
            Some(f) => vt.push(row![d, f.velocity, f.residual, f.times.len()]),
            None => vt.push(row![d, "", "", 0]),
        }
    }
    Ok(vec![Artifact::Csv(pt), Artifact::Csv(vt)])
}

pub fn run(name: &str, seed: u64) -> Result<Option<Vec<Artifact>>> {
    let Some(parts) = runs(name) else {
        return Ok(None);
    };
    let mut out = Vec::new();
    for (prefix, c) in &parts {
        out.extend(experiments::run(c, seed, prefix)?);
    }
    out.extend(extras(name)?);
    Ok(Some(out))
}
