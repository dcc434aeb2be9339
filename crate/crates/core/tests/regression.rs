use std::f64::consts::PI;

use magnon_core::entropy::{config_mutual_proxy, config_mutual_proxy_exact, mutual_information, Region};
use magnon_core::evolve::{exact_evolve, fidelity, floquet_evolve, FloquetOptions, PulseSequence, SequenceSpec};
use magnon_core::model::{ModelParams, SectorBasis, SectorOperator, StateVector};
use magnon_core::probes::participation_crossover;
use magnon_core::sampling::{postselect, read_snapshots, sample_snapshots, write_snapshots};
use magnon_core::spectral::{dispersion_two, BoundCriterion};

// frozen from an independent dense-ED reference
const PARTICIPATION_T2: [(f64, f64); 9] = [
    (0.5, 0.14195),
    (1.0, 0.19289),
    (1.5, 0.28969),
    (2.0, 0.41574),
    (2.25, 0.48185),
    (2.5, 0.54551),
    (3.0, 0.65434),
    (3.5, 0.72813),
    (4.5, 0.78599),
];

#[test]
fn participation_curve_matches_reference() {
    let p = ModelParams::open(20, 1.4, 0.0).unwrap();
    let deltas: Vec<f64> = PARTICIPATION_T2.iter().map(|x| x.0).collect();
    let c = &participation_crossover(&p, &deltas, &[20], 2.0).unwrap()[0];
    for ((d, want), got) in PARTICIPATION_T2.iter().zip(&c.participation) {
        assert!((got - want).abs() < 1e-4, "Δ = {d}: {got} vs {want}");
    }
}

#[test]
fn crossover_sharpens_with_size() {
    let p = ModelParams::open(12, 1.4, 0.0).unwrap();
    let deltas: Vec<f64> = (0..=16).map(|i| 0.5 + 0.25 * i as f64).collect();
    let curves = participation_crossover(&p, &deltas, &[12, 20], 2.0).unwrap();
    let max_slope = |v: &[f64]| v.windows(2).map(|w| (w[1] - w[0]) / 0.25).fold(0.0, f64::max);
    assert!(max_slope(&curves[1].participation) > max_slope(&curves[0].participation));
}

// (δ, dd, plain) at L = 10, Δ = 3.5, tJ = 3.3, 32 steps
const FLOQUET_TABLE: [(f64, f64, f64); 5] = [
    (0.1, 0.9947, 0.9469),
    (0.2, 0.9942, 0.8132),
    (0.3, 0.9934, 0.6337),
    (0.5, 0.9908, 0.3083),
    (1.2, 0.9716, 0.0061),
];

#[test]
fn floquet_detuning_table() {
    let p = ModelParams::open(10, 1.4, 3.5).unwrap();
    let b = SectorBasis::new(10, 2).unwrap();
    let s = StateVector::sector_config(&b, &[4, 5]).unwrap();
    let exact = exact_evolve(&SectorOperator::xxz(&p, &b).unwrap(), &s, 3.3)
        .unwrap()
        .to_full(&b)
        .unwrap();
    let psi0 = s.to_full(&b).unwrap();
    for (d, want_dd, want_plain) in FLOQUET_TABLE {
        let opts = FloquetOptions {
            detuning: d,
            ..Default::default()
        };
        let fd = fidelity(&floquet_evolve(&PulseSequence::dd(), &p, &psi0, 3.3, 32, &opts).unwrap().state, &exact).unwrap();
        let fp = fidelity(&floquet_evolve(&PulseSequence::plain(), &p, &psi0, 3.3, 32, &opts).unwrap().state, &exact).unwrap();
        assert!((fd - want_dd).abs() < 1e-3, "dd δ = {d}: {fd}");
        assert!((fp - want_plain).abs() < 1e-3, "plain δ = {d}: {fp}");
    }
}

#[test]
fn floquet_leakage_is_seen_by_postselection() {
    let p = ModelParams::open(10, 1.4, 3.5).unwrap();
    let b = SectorBasis::new(10, 2).unwrap();
    let psi0 = StateVector::sector_config(&b, &[4, 5]).unwrap().to_full(&b).unwrap();
    let opts = FloquetOptions {
        detuning: 0.5,
        ..Default::default()
    };
    let r = floquet_evolve(&PulseSequence::plain(), &p, &psi0, 3.3, 32, &opts).unwrap();
    let leak = 1.0 - r.number_weights[2];
    let set = sample_snapshots(&r.state, 20_000, 5).unwrap();
    let kept = postselect(&set, 2).unwrap();
    let sigma = (leak * (1.0 - leak) / 20_000.0).sqrt();
    assert!(kept.retention() < 1.0);
    assert!(((1.0 - kept.retention()) - leak).abs() < 5.0 * sigma + 1e-3);
}

#[test]
fn sequence_spec_rebuilds_plain() {
    let spec = SequenceSpec {
        name: "custom".into(),
        preamble: String::new(),
        steps: vec!["XX x90 y90 YY x90 -y90 -x90 ZZ -y90".into()],
        finals: vec![],
    };
    let seq = PulseSequence::from_spec(&spec).unwrap();
    assert_eq!(seq, PulseSequence { name: "custom".into(), ..PulseSequence::plain() });
}

#[test]
fn mutual_information_reference_values() {
    let l = 20;
    let b = SectorBasis::new(l, 2).unwrap();
    let ra = Region::one_based(&[7, 8, 9], l).unwrap();
    let rb = Region::one_based(&[12, 13, 14], l).unwrap();
    let p = ModelParams::open(l, 1.4, 4.5).unwrap();
    let h = SectorOperator::xxz(&p, &b).unwrap();
    let s0 = StateVector::sector_config(&b, &[9, 10]).unwrap();
    let s = exact_evolve(&h, &s0, 0.0).unwrap();
    assert!(mutual_information(&s, &ra, &rb).unwrap().abs() < 1e-12);
    let s = exact_evolve(&h, &s0, 2.0).unwrap();
    let i = mutual_information(&s, &ra, &rb).unwrap();
    assert!(i > 0.0 && i < 2.0 * 3f64.ln());
}

#[test]
fn snapshot_file_feeds_the_proxy() {
    let l = 20;
    let b = SectorBasis::new(l, 2).unwrap();
    let p = ModelParams::open(l, 1.4, 0.5).unwrap();
    let s0 = StateVector::sector_config(&b, &[9, 10]).unwrap();
    let s = exact_evolve(&SectorOperator::xxz(&p, &b).unwrap(), &s0, 2.0).unwrap();
    let set = postselect(&sample_snapshots(&s, 20_000, 3).unwrap(), 2)
        .unwrap()
        .with_context(2.0, 0.5, 1.4);
    let dir = std::env::temp_dir().join(format!("snapshots-{}.txt", std::process::id()));
    write_snapshots(std::fs::File::create(&dir).unwrap(), std::slice::from_ref(&set)).unwrap();
    let back = read_snapshots(std::io::BufReader::new(std::fs::File::open(&dir).unwrap())).unwrap();
    std::fs::remove_file(&dir).ok();
    assert_eq!(back[0], set);
    let ra = Region::one_based(&[7, 8, 9], l).unwrap();
    let rb = Region::one_based(&[12, 13, 14], l).unwrap();
    let sampled = config_mutual_proxy(&back[0], &ra, &rb).unwrap();
    let exact = config_mutual_proxy_exact(&s, &ra, &rb).unwrap();
    assert!(!sampled.insufficient);
    assert!((sampled.with_number - exact.with_number).abs() < 0.1 * exact.with_number.abs().max(0.05));
}

#[test]
fn bound_state_slope_decreases_at_strong_coupling() {
    // max_k |∂ε2/∂k| from the ring dispersion of the bound-state candidate
    let l = 60;
    let ms: Vec<i64> = (0..=l as i64 / 2).collect();
    let slope = |delta: f64| -> f64 {
        let p = ModelParams::ring(l, 1.4, delta).unwrap();
        let c = dispersion_two(&p, &ms, &BoundCriterion::default()).unwrap();
        c.points
            .windows(2)
            .filter(|w| w[0].k >= PI / 2.0)
            .map(|w| ((w[1].energy - w[0].energy) / (w[1].k - w[0].k)).abs())
            .fold(0.0, f64::max)
    };
    let s: Vec<f64> = [3.0, 4.0, 5.0].iter().map(|&d| slope(d)).collect();
    assert!(s[0] > s[1] && s[1] > s[2], "{s:?}");
}
