//! Riemann zeta and the polylogarithm on the unit circle, Li_s(e^{iμ}).

use statrs::function::gamma::{gamma, ln_gamma};
use std::f64::consts::PI;

use crate::C64;

// B_2, B_4, ..., B_24
const BERNOULLI: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

fn zeta_euler_maclaurin(s: f64) -> f64 {
    const N: usize = 16;
    let nf = N as f64;
    let mut sum: f64 = (1..N).map(|n| (n as f64).powf(-s)).sum();
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // Σ_k B_2k/(2k)! · s(s+1)…(s+2k−2) · N^{−s−2k+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = nf.powf(-s - 1.0);
    for (k, b) in BERNOULLI.iter().enumerate() {
        sum += b / fact * rising * npow;
        let k2 = 2.0 * (k as f64 + 1.0);
        rising *= (s + k2 - 1.0) * (s + k2);
        fact *= (k2 + 1.0) * (k2 + 2.0);
        npow /= nf * nf;
    }
    sum
}

/// Riemann zeta function for real s ≠ 1.
pub fn zeta(s: f64) -> f64 {
    if s == 0.0 {
        return -0.5;
    }
    if s >= 0.5 {
        if s > 60.0 {
            return 1.0 + 2f64.powf(-s);
        }
        return zeta_euler_maclaurin(s);
    }
    if s < 0.0 && (s / 2.0).fract() == 0.0 {
        return 0.0;
    }
    // ζ(s) = 2^s π^{s−1} sin(πs/2) Γ(1−s) ζ(1−s)
    let t = 1.0 - s;
    let mag = (s * 2f64.ln() + (s - 1.0) * PI.ln() + ln_gamma(t)).exp();
    mag * (PI * s / 2.0).sin() * zeta(t)
}

fn harmonic(m: usize) -> f64 {
    (1..=m).map(|i| 1.0 / i as f64).sum()
}

/// Li_s(e^{iμ}) for real s > 0 and 0 < μ < 2π.
///
/// Uses the expansion around μ = 0,
/// Li_s(e^w) = Γ(1−s)(−w)^{s−1} + Σ_n ζ(s−n) wⁿ/n!, w = iμ, |w| < 2π,
/// with the logarithmic limit for integer s.
pub fn polylog_unit(s: f64, mu: f64) -> C64 {
    assert!(s > 0.0, "polylog_unit needs s > 0");
    assert!(mu > 0.0 && mu < 2.0 * PI, "polylog_unit needs 0 < mu < 2π");
    // reflect into (0, π] where the series converges fastest
    if mu > PI {
        return polylog_unit(s, 2.0 * PI - mu).conj();
    }
    let w = C64::new(0.0, mu);
    let rounded = s.round();
    let integer = (s - rounded).abs() < 1e-12;

    if integer && rounded == 1.0 {
        return -(C64::new(1.0, 0.0) - w.exp()).ln();
    }

    let mut sum = C64::new(0.0, 0.0);
    let mut term = C64::new(1.0, 0.0); // wⁿ/n!
    let singular = if integer { Some(rounded as usize - 1) } else { None };
    for n in 0..400usize {
        if Some(n) != singular {
            let z = zeta(s - n as f64);
            let add = term * z;
            sum += add;
            if n > 8 && z != 0.0 && add.norm() < 1e-17 * sum.norm().max(1.0) {
                break;
            }
        }
        term *= w / (n as f64 + 1.0);
    }

    match singular {
        Some(m) => {
            // wᵐ/m! · (H_m − ln(−w))
            let mut wm = C64::new(1.0, 0.0);
            for i in 1..=m {
                wm *= w / i as f64;
            }
            sum + wm * (C64::new(harmonic(m), 0.0) - (-w).ln())
        }
        None => {
            // (−w)^{s−1} on the principal branch, −w = μ e^{−iπ/2}
            let lead = C64::from_polar(mu.powf(s - 1.0), -PI / 2.0 * (s - 1.0));
            sum + lead * gamma(1.0 - s)
        }
    }
}
