//! One runner per experiment kind. Each returns the artifacts to write, named
//! with an optional prefix so presets can combine several runs in one directory.

use std::f64::consts::PI;

use magnon_core::entropy::{config_mutual_proxy, config_mutual_proxy_exact, mutual_information, Region};
use magnon_core::evolve::{exact_evolve, fidelity, floquet_evolve, Eigensystem, FloquetOptions, PulseSequence};
use magnon_core::model::{Boundary, ModelParams, SectorBasis, SectorOperator, StateVector};
use magnon_core::probes::{
    front_velocity, participation_crossover, quench_projectors, spectroscopy_one, standing_wave_momenta,
    time_grid, FrontOptions, SpacetimeMap, TwoMagnonSpectroscopy,
};
use magnon_core::sampling::{derive_seed, jackknife, participation_estimate, postselect, sample_snapshots, write_snapshots, SnapshotSet};
use magnon_core::spectral::{
    dispersion_one, dispersion_two, even_momentum_grid, group_velocity_one, phase_diagram, BoundCriterion,
};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{zero_based, Experiment, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{Artifact, Cell, Table};
use crate::row;

pub fn run(cfg: &RunConfig, seed: u64, prefix: &str) -> Result<Vec<Artifact>> {
    let p = cfg.model.params()?;
    let name = |s: &str| format!("{prefix}{s}");
    let base = |t: Table| {
        t.meta("L", p.l)
            .meta("J", p.j)
            .meta("alpha", p.alpha)
            .meta("delta", p.delta)
            .meta("boundary", format!("{:?}", p.boundary).to_lowercase())
    };
    match &cfg.experiment {
        Experiment::Dispersion1 {
            spectroscopy,
            gamma,
            t_max,
            samples,
        } => dispersion1(&p, *spectroscopy, *gamma, *t_max, *samples, &name, base),
        Experiment::Dispersion2 {
            ms,
            spectroscopy,
            t_prep,
            t_max,
            samples,
        } => {
            let ms: Vec<i64> = ms.clone().unwrap_or_else(|| (0..=p.l as i64 / 2).collect());
            let curve = dispersion_two(&p, &ms, &BoundCriterion::default())?;
            let spec = if *spectroscopy {
                let sp = TwoMagnonSpectroscopy::new(&p, *t_prep)?;
                let times = time_grid(*t_max, *samples);
                Some(
                    curve
                        .points
                        .iter()
                        .map(|pt| sp.run(pt.k, &times))
                        .collect::<magnon_core::Result<Vec<_>>>()?,
                )
            } else {
                None
            };
            let mut header = vec!["m", "k", "energy", "l4", "continuum_edge", "separated", "above_threshold"];
            if spec.is_some() {
                header.extend(["peak", "bin", "dominance", "broad"]);
            }
            let mut t = base(Table::new(&name("dispersion2"), &header))
                .meta("threshold", curve.threshold)
                .meta("energies", "relative to the all-down state");
            if spec.is_some() {
                t = t.meta("t_prep", t_prep).meta("t_max", t_max).meta("samples", samples);
            }
            for (i, pt) in curve.points.iter().enumerate() {
                let mut r = row![pt.m, pt.k, pt.energy, pt.l4, pt.continuum_edge, pt.separated, pt.above_threshold];
                if let Some(s) = &spec {
                    r.extend(row![s[i].frequency, s[i].bin, s[i].dominance, s[i].broad]);
                }
                t.push(r);
            }
            Ok(vec![Artifact::Csv(t)])
        }
        Experiment::PhaseDiagram {
            deltas,
            k_points,
            threshold_factor,
            scaling_exponent,
        } => {
            let criterion = BoundCriterion {
                threshold_factor: *threshold_factor,
                scaling_exponent: *scaling_exponent,
            };
            let ms = even_momentum_grid(p.l, *k_points);
            let pd = phase_diagram(&p, &deltas.values()?, &ms, criterion)?;
            let mut t = base(Table::new(
                &name("phase_diagram"),
                &["delta", "m", "k", "energy", "l4", "partner_l", "l4_partner", "exponent", "above_threshold", "bound"],
            ))
            .meta("threshold", pd.threshold);
            for x in &pd.points {
                t.push(row![
                    x.delta,
                    x.m,
                    x.k,
                    x.energy,
                    x.l4,
                    x.partner_l,
                    x.l4_partner,
                    x.exponent,
                    x.above_threshold,
                    x.bound
                ]);
            }
            let summary = json!({
                "l": pd.l,
                "alpha": pd.alpha,
                "threshold": pd.threshold,
                "criterion": pd.criterion,
                "onset": pd.onset(),
                "k0_bound_at": pd.bound_at(0),
            });
            Ok(vec![Artifact::Csv(t), Artifact::json(&name("phase_summary"), &summary)?])
        }
        Experiment::Quench {
            sites,
            t_max,
            samples,
            level,
        } => {
            let basis = SectorBasis::new(p.l, 2)?;
            let psi = StateVector::sector_config(&basis, &zero_based(sites, p.l)?)?;
            let (up, pair) = quench_projectors(&p, &psi, &time_grid(*t_max, *samples))?;
            let opts = FrontOptions {
                level: *level,
                ..Default::default()
            };
            let fronts = json!({
                "level": level,
                "up": fit_json(&up, &opts),
                "pair": fit_json(&pair, &opts),
            });
            let sites_meta = format!("{:?}", sites);
            Ok(vec![
                Artifact::Csv(base(map_table(&name("up"), &up)).meta("initial", &sites_meta)),
                Artifact::Csv(base(map_table(&name("pair"), &pair)).meta("initial", &sites_meta)),
                Artifact::json(&name("fronts"), &fronts)?,
            ])
        }
        Experiment::Participation { deltas, ls, t } => {
            let ls = if ls.is_empty() { vec![p.l] } else { ls.clone() };
            let curves = participation_crossover(&p, &deltas.values()?, &ls, *t)?;
            let header: Vec<String> = std::iter::once("delta".to_string())
                .chain(ls.iter().map(|l| format!("P_L{l}")))
                .collect();
            let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            let mut tab = base(Table::new(&name("participation"), &h)).meta("t", t);
            for (i, d) in curves[0].deltas.iter().enumerate() {
                let mut r = row![d];
                r.extend(curves.iter().map(|c| c.participation[i].cell()));
                tab.push(r);
            }
            let steep: Vec<_> = curves.iter().map(|c| json!({ "l": c.l, "steepest": c.steepest() })).collect();
            Ok(vec![Artifact::Csv(tab), Artifact::json(&name("crossover"), &steep)?])
        }
        Experiment::FloquetBench {
            sequences,
            custom,
            detunings,
            sites,
            t,
            steps,
            second_order,
        } => {
            let seqs = sequences
                .iter()
                .map(|n| match custom.iter().find(|c| &c.name == n) {
                    Some(spec) => Ok(PulseSequence::from_spec(spec)?),
                    None => PulseSequence::builtin(n).ok_or_else(|| CliError::Config(format!("unknown sequence {n}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            let basis = SectorBasis::new(p.l, 2)?;
            let s = StateVector::sector_config(&basis, &zero_based(sites, p.l)?)?;
            let exact = exact_evolve(&SectorOperator::xxz(&p, &basis)?, &s, *t)?.to_full(&basis)?;
            let psi0 = s.to_full(&basis)?;
            let ds = detunings.values()?;
            let mut header = vec!["detuning".to_string()];
            for q in &seqs {
                header.push(format!("fidelity_{}", q.name));
                header.push(format!("leakage_{}", q.name));
            }
            let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            let mut tab = base(Table::new(&name("floquet"), &h))
                .meta("t", t)
                .meta("steps", steps)
                .meta("second_order", second_order)
                .meta("initial", format!("{sites:?}"));
            let rows = ds
                .par_iter()
                .map(|&d| {
                    let opts = FloquetOptions {
                        detuning: d,
                        second_order: *second_order,
                        ..Default::default()
                    };
                    let mut r = row![d];
                    for q in &seqs {
                        let rep = floquet_evolve(q, &p, &psi0, *t, *steps, &opts)?;
                        r.push(fidelity(&rep.state, &exact)?.cell());
                        r.push((1.0 - rep.number_weights[2]).cell());
                    }
                    Ok(r)
                })
                .collect::<magnon_core::Result<Vec<_>>>()?;
            rows.into_iter().for_each(|r| tab.push(r));
            Ok(vec![Artifact::Csv(tab)])
        }
        Experiment::Entropy {
            initial,
            region_a,
            region_b,
            times,
            shots,
        } => entropy(&p, initial, region_a, region_b, &times.values()?, *shots, seed, &name, base),
        Experiment::Sample {
            sites,
            times,
            shots,
            postselect: keep,
        } => {
            let n = sites.len();
            let basis = SectorBasis::new(p.l, n)?;
            let s0 = StateVector::sector_config(&basis, &zero_based(sites, p.l)?)?;
            let es = Eigensystem::new(&SectorOperator::xxz(&p, &basis)?)?;
            let c = es.coefficients(&s0.amps);
            let sets = times
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let psi = StateVector::new(s0.basis, es.state_at(&c, t));
                    let set = sample_snapshots(&psi, *shots, derive_seed(seed, "sample", i as u64))?;
                    let set = match keep {
                        Some(k) => postselect(&set, *k)?,
                        None => set,
                    };
                    Ok(set.with_context(t, p.delta, p.alpha))
                })
                .collect::<magnon_core::Result<Vec<SnapshotSet>>>()?;
            let mut buf = Vec::new();
            write_snapshots(&mut buf, &sets)?;
            let mut header = vec!["t".to_string(), "retained".to_string()];
            header.extend((1..=p.l).map(|j| format!("up{j}")));
            let pair = n == 2 && keep.is_some();
            if pair {
                header.extend(["participation".into(), "participation_err".into()]);
            }
            let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            let mut tab = base(Table::new(&name("densities"), &h)).meta("shots", shots);
            for set in &sets {
                let mut r = row![set.meta.time.unwrap_or_default(), set.meta.n_retained];
                r.extend(set.up_density().iter().map(Cell::cell));
                if pair {
                    let e = participation_estimate(set)?;
                    r.extend(row![e.value, e.error]);
                }
                tab.push(r);
            }
            Ok(vec![
                Artifact::Text {
                    name: name("snapshots.txt"),
                    content: String::from_utf8(buf).expect("snapshot writer emits ASCII"),
                },
                Artifact::Csv(tab),
            ])
        }
    }
}

fn dispersion1(
    p: &ModelParams,
    spectroscopy: bool,
    gamma: f64,
    t_max: f64,
    samples: usize,
    name: &dyn Fn(&str) -> String,
    base: impl Fn(Table) -> Table,
) -> Result<Vec<Artifact>> {
    let l = p.l;
    if spectroscopy && p.boundary != Boundary::Open {
        return Err(CliError::Config("single-magnon spectroscopy uses the open chain".into()));
    }
    let ks: Vec<f64> = match p.boundary {
        Boundary::Open => standing_wave_momenta(l),
        Boundary::Ring => (0..=l / 2).map(|m| 2.0 * PI * m as f64 / l as f64).collect(),
    };
    // finite ring of the same size for beat predictions
    let ring = p.with_boundary(Boundary::Ring);
    let mut header = vec!["n", "k", "energy", "group_velocity"];
    if spectroscopy {
        header.extend(["beat_predicted", "beat_measured", "bin", "dominance", "postselection_weight"]);
    }
    let mut t = base(Table::new(&name("dispersion1"), &header));
    if spectroscopy {
        t = t
            .meta("gamma", gamma)
            .meta("t_max", t_max)
            .meta("samples", samples)
            .meta("reference", "n = 1");
    }
    let times = time_grid(t_max, samples);
    let q = ks[0];
    let eq = dispersion_one(q, &ring)?;
    let rows = ks
        .par_iter()
        .enumerate()
        .map(|(i, &k)| {
            let mut r = row![i + 1, k, dispersion_one(k, p)?, group_velocity_one(k, p)?];
            if spectroscopy {
                if i == 0 {
                    r.extend(std::iter::repeat_n(String::new(), 5));
                } else {
                    let s = spectroscopy_one(k, q, p, &times, gamma)?;
                    let want = (dispersion_one(k, &ring)? - eq).abs();
                    r.extend(row![want, s.frequency, s.bin, s.dominance, s.postselection_weight]);
                }
            }
            Ok(r)
        })
        .collect::<magnon_core::Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| t.push(r));
    Ok(vec![Artifact::Csv(t)])
}

#[allow(clippy::too_many_arguments)]
fn entropy(
    p: &ModelParams,
    initial: &[Vec<usize>],
    region_a: &[usize],
    region_b: &[usize],
    times: &[f64],
    shots: usize,
    seed: u64,
    name: &dyn Fn(&str) -> String,
    base: impl Fn(Table) -> Table,
) -> Result<Vec<Artifact>> {
    let l = p.l;
    let ra = Region::one_based(region_a, l)?;
    let rb = Region::one_based(region_b, l)?;
    let basis = SectorBasis::new(l, 2)?;
    let es = Eigensystem::new(&SectorOperator::xxz(p, &basis)?)?;
    let mut header = vec!["initial".to_string(), "t".into(), "mutual_information".into(), "ic_with_number".into(), "ic_config".into()];
    if shots > 0 {
        header.extend(
            ["retained", "ic_sampled", "ic_sampled_err", "ic_config_sampled", "ic_config_sampled_err", "insufficient"]
                .map(String::from),
        );
    }
    let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut tab = base(Table::new(&name("entropy"), &h))
        .meta("region_a", format!("{region_a:?}"))
        .meta("region_b", format!("{region_b:?}"));
    if shots > 0 {
        tab = tab.meta("shots", shots);
    }
    for (idx, sites) in initial.iter().enumerate() {
        let s0 = StateVector::sector_config(&basis, &zero_based(sites, l)?)?;
        let c = es.coefficients(&s0.amps);
        let label = sites.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("-");
        let rows = times
            .par_iter()
            .enumerate()
            .map(|(ti, &t)| {
                let psi = StateVector::new(s0.basis, es.state_at(&c, t));
                let mi = mutual_information(&psi, &ra, &rb)?;
                let ex = config_mutual_proxy_exact(&psi, &ra, &rb)?;
                let mut r = row![label, t, mi, ex.with_number, ex.config_only];
                if shots > 0 {
                    let set = sample_snapshots(&psi, shots, derive_seed(seed, &format!("entropy-{idx}"), ti as u64))?;
                    let set = postselect(&set, 2)?;
                    let sampled = config_mutual_proxy(&set, &ra, &rb)?;
                    let est = |f: fn(&magnon_core::entropy::ConfigProxy) -> f64| {
                        jackknife(&set, |sh| {
                            let sub = SnapshotSet {
                                meta: set.meta.clone(),
                                shots: sh.to_vec(),
                            };
                            config_mutual_proxy(&sub, &ra, &rb).map(|x| f(&x)).unwrap_or(f64::NAN)
                        })
                    };
                    let wn = est(|x| x.with_number)?;
                    let co = est(|x| x.config_only)?;
                    r.extend(row![set.len(), wn.value, wn.error, co.value, co.error, sampled.insufficient]);
                }
                Ok(r)
            })
            .collect::<magnon_core::Result<Vec<_>>>()?;
        rows.into_iter().for_each(|r| tab.push(r));
    }
    Ok(vec![Artifact::Csv(tab)])
}

fn fit_json(map: &SpacetimeMap, opts: &FrontOptions) -> serde_json::Value {
    match front_velocity(map, opts) {
        Ok(f) => json!({
            "velocity": f.velocity,
            "intercept": f.intercept,
            "residual": f.residual,
            "points": f.times.len(),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Rows are times, columns sites (1-based) or bonds (j, j+1).
pub fn map_table(name: &str, map: &SpacetimeMap) -> Table {
    let mut header = vec!["t".to_string()];
    header.extend((1..=map.sites).map(|j| format!("s{j}")));
    let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut t = Table::new(name, &h);
    for (time, row) in map.times.iter().zip(&map.values) {
        let mut r = row![time];
        r.extend(row.iter().map(Cell::cell));
        t.push(r);
    }
    t
}
