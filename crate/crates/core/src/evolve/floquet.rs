use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{krylov_propagate, walsh_hadamard};
use crate::model::{Basis, FullKind, FullOperator, ModelParams, StateVector};
use crate::C64;

type U2 = Matrix2<C64>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

// Pauli matrices in the (↑, ↓) basis
fn pauli(a: char) -> U2 {
    match a {
        'x' => U2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)),
        'y' => U2::new(c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)),
        _ => U2::new(c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    NegX,
    NegY,
}

impl Axis {
    fn pauli(&self) -> (char, f64) {
        match self {
            Axis::X => ('x', 1.0),
            Axis::Y => ('y', 1.0),
            Axis::NegX => ('x', -1.0),
            Axis::NegY => ('y', -1.0),
        }
    }
}

/// Global rotation R_a(θ) = exp(−iθσ_a/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub axis: Axis,
    pub angle: f64,
}

impl Rotation {
    pub fn new(axis: Axis, degrees: f64) -> Self {
        Self {
            axis,
            angle: degrees.to_radians(),
        }
    }

    pub fn matrix(&self, scale: f64) -> U2 {
        let (a, s) = self.axis.pauli();
        let half = 0.5 * self.angle * scale;
        U2::identity() * c(half.cos(), 0.0) - pauli(a) * c(0.0, s * half.sin())
    }

    /// Parses tokens like `x90`, `-y180`, `y45.5`.
    pub fn parse(tok: &str) -> Result<Self> {
        let (neg, rest) = match tok.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, tok),
        };
        let mut chars = rest.chars();
        let axis = match (chars.next(), neg) {
            (Some('x'), false) => Axis::X,
            (Some('x'), true) => Axis::NegX,
            (Some('y'), false) => Axis::Y,
            (Some('y'), true) => Axis::NegY,
            _ => return Err(Error::Sequence(format!("bad rotation token '{tok}'"))),
        };
        let deg: f64 = chars
            .as_str()
            .parse()
            .map_err(|_| Error::Sequence(format!("bad rotation angle in '{tok}'")))?;
        Ok(Self::new(axis, deg))
    }
}

/// Frame label of an Ising pulse; the physical interaction is always H_XX.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseKind {
    XX,
    YY,
    ZZ,
}

impl PulseKind {
    fn axis(&self) -> char {
        match self {
            PulseKind::XX => 'x',
            PulseKind::YY => 'y',
            PulseKind::ZZ => 'z',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Op {
    Rotate(Rotation),
    Pulse(PulseKind),
}

fn parse_ops(s: &str) -> Result<Vec<Op>> {
    s.split_whitespace()
        .map(|t| match t {
            "XX" => Ok(Op::Pulse(PulseKind::XX)),
            "YY" => Ok(Op::Pulse(PulseKind::YY)),
            "ZZ" => Ok(Op::Pulse(PulseKind::ZZ)),
            _ => Rotation::parse(t).map(Op::Rotate),
        })
        .collect()
}

fn parse_rotations(s: &str) -> Result<Vec<Rotation>> {
    s.split_whitespace().map(Rotation::parse).collect()
}

/// Declarative sequence description, e.g. loaded from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub name: String,
    #[serde(default)]
    pub preamble: String,
    pub steps: Vec<String>,
    #[serde(default)]
    pub finals: Vec<String>,
}

/// A Floquet cycle: preamble, repeating steps and the table of final frame rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub name: String,
    pub preamble: Vec<Rotation>,
    pub steps: Vec<Vec<Op>>,
    /// Final rotation after n steps, indexed by (n − 1) mod cycle; empty means
    /// the accumulated frame is undone exactly.
    pub finals: Vec<Vec<Rotation>>,
}

const DD_STEPS: [&str; 8] = [
    "XX y90 YY x90 -y90 ZZ -y90 x90",
    "-y90 XX y90 YY x90 -y90 ZZ x90 y90 -x90",
    "XX -y90 YY x90 -y90 ZZ y90 -x90",
    "-y90 XX -y90 YY x90 -y90 ZZ x90 -y90 x90",
    "XX y90 YY x90 -y90 ZZ y90 -x90",
    "y90 XX y90 YY x90 -y90 ZZ x90 y90 -x90",
    "XX -y90 YY x90 -y90 ZZ -y90 x90",
    "y90 XX -y90 YY x90 -y90 ZZ x90 -y90 x90",
];

// R_f,n in time order: n = 1,7: R_{-x}(π/2)R_y(π/2); 2,6: R_{-y}(π)R_x(π/2);
// 3,5: R_{-x}(π/2)R_{-y}(π/2); 4,8: R_{-x}(π/2)
const DD_FINALS: [&str; 8] = [
    "y90 -x90",
    "x90 -y180",
    "-y90 -x90",
    "-x90",
    "-y90 -x90",
    "x90 -y180",
    "y90 -x90",
    "-x90",
];

impl PulseSequence {
    pub fn from_spec(spec: &SequenceSpec) -> Result<Self> {
        let seq = Self {
            name: spec.name.clone(),
            preamble: parse_rotations(&spec.preamble)?,
            steps: spec.steps.iter().map(|s| parse_ops(s)).collect::<Result<_>>()?,
            finals: spec.finals.iter().map(|s| parse_rotations(s)).collect::<Result<_>>()?,
        };
        seq.validate()?;
        Ok(seq)
    }

    /// Eight-step sequence with detuning-cancelling frame changes.
    pub fn dd() -> Self {
        Self::from_spec(&SequenceSpec {
            name: "dd".into(),
            preamble: "x90".into(),
            steps: DD_STEPS.iter().map(|s| s.to_string()).collect(),
            finals: DD_FINALS.iter().map(|s| s.to_string()).collect(),
        })
        .expect("built-in dd sequence is valid")
    }

    /// The same Ising block in every step, no decoupling.
    pub fn plain() -> Self {
        Self::from_spec(&SequenceSpec {
            name: "plain".into(),
            preamble: String::new(),
            steps: vec!["XX x90 y90 YY x90 -y90 -x90 ZZ -y90".into()],
            finals: Vec::new(),
        })
        .expect("built-in plain sequence is valid")
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "dd" => Some(Self::dd()),
            "plain" => Some(Self::plain()),
            _ => None,
        }
    }

    pub fn cycle(&self) -> usize {
        self.steps.len()
    }

    fn product(rots: &[Rotation], start: U2) -> U2 {
        rots.iter().fold(start, |f, r| r.matrix(1.0) * f)
    }

    /// For each pulse of one cycle: (step, kind, logical image of σᶻ as (axis, sign)).
    pub fn detuning_images(&self) -> Vec<(usize, PulseKind, char, f64)> {
        let mut frame = Self::product(&self.preamble, U2::identity());
        let mut out = Vec::new();
        for (s, step) in self.steps.iter().enumerate() {
            for op in step {
                match op {
                    Op::Rotate(r) => frame = r.matrix(1.0) * frame,
                    Op::Pulse(k) => {
                        let (a, sign) = logical_axis(&frame, 'z').unwrap_or(('?', 0.0));
                        out.push((s, *k, a, sign));
                    }
                }
            }
        }
        out
    }

    /// Checks pulse frames, the cycle property and the final-rotation table.
    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::Sequence("no steps".into()));
        }
        let start = Self::product(&self.preamble, U2::identity());
        let mut frame = start;
        let mut after_step = Vec::with_capacity(self.cycle());
        for (s, step) in self.steps.iter().enumerate() {
            if !step.iter().any(|o| matches!(o, Op::Pulse(_))) {
                return Err(Error::Sequence(format!("step {} has no pulse", s + 1)));
            }
            for op in step {
                match op {
                    Op::Rotate(r) => frame = r.matrix(1.0) * frame,
                    Op::Pulse(k) => match logical_axis(&frame, 'x') {
                        Some((a, _)) if a == k.axis() => {}
                        other => {
                            return Err(Error::Sequence(format!(
                                "step {}: {:?} pulse acts along {:?}",
                                s + 1,
                                k,
                                other.map(|o| o.0)
                            )))
                        }
                    },
                }
            }
            after_step.push(frame);
        }
        if !proportional_to_identity(&(start.adjoint() * frame)) {
            return Err(Error::Sequence("frame does not close over one cycle".into()));
        }
        if !self.finals.is_empty() {
            if self.finals.len() != self.cycle() {
                return Err(Error::Sequence(format!(
                    "{} final rotations for a cycle of {}",
                    self.finals.len(),
                    self.cycle()
                )));
            }
            for (n, (f, fin)) in after_step.iter().zip(&self.finals).enumerate() {
                if !proportional_to_identity(&Self::product(fin, *f)) {
                    return Err(Error::Sequence(format!(
                        "final rotation {} does not restore the lab frame",
                        n + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

fn proportional_to_identity(u: &U2) -> bool {
    u[(0, 1)].norm() < 1e-9 && u[(1, 0)].norm() < 1e-9 && (u[(0, 0)] - u[(1, 1)]).norm() < 1e-9
}

// F† σ_a F as a signed Pauli axis, if it is one
fn logical_axis(frame: &U2, a: char) -> Option<(char, f64)> {
    let m = frame.adjoint() * pauli(a) * frame;
    for b in ['x', 'y', 'z'] {
        let coef = (m * pauli(b)).trace().re / 2.0;
        if (coef.abs() - 1.0).abs() < 1e-9 {
            return Some((b, coef.signum()));
        }
    }
    None
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FloquetOptions {
    /// Static detuning δ entering as (δ/2) Σ σᶻ during pulses.
    pub detuning: f64,
    /// Symmetrized steps: each step is run forward and mirrored with half-length pulses.
    pub second_order: bool,
    /// Per-site multiplier on every rotation angle (beam inhomogeneity).
    pub site_scale: Option<Vec<f64>>,
    pub krylov_tol: f64,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        Self {
            detuning: 0.0,
            second_order: false,
            site_scale: None,
            krylov_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionReport {
    pub state: StateVector,
    /// Effective XXZ time after each step.
    pub times: Vec<f64>,
    pub n_steps: usize,
    pub tau: f64,
    /// Probability of each total magnon number 0..=L in the final state.
    pub number_weights: Vec<f64>,
    pub fidelity: Option<f64>,
}

struct Propagator {
    l: usize,
    zz: Vec<f64>,
    xx: Option<FullOperator>,
    detuning: f64,
    tol: f64,
}

impl Propagator {
    fn pulse(&self, psi: &mut Vec<C64>, theta: f64) -> Result<()> {
        if theta == 0.0 {
            return Ok(());
        }
        match &self.xx {
            None => {
                // H_XX is diagonal after a Hadamard on every site
                walsh_hadamard(psi);
                let norm = 1.0 / (1u64 << self.l) as f64;
                psi.par_iter_mut()
                    .zip(self.zz.par_iter())
                    .for_each(|(p, e)| *p *= C64::from_polar(norm, -theta * e));
                walsh_hadamard(psi);
            }
            Some(xx) => {
                let half = 0.5 * self.detuning;
                let l = self.l as f64;
                let apply = |x: &[C64], y: &mut [C64]| {
                    xx.apply(x, y);
                    y.par_iter_mut().enumerate().for_each(|(i, yi)| {
                        let sz = 2.0 * (i as u64).count_ones() as f64 - l;
                        *yi += x[i] * (half * sz);
                    });
                };
                *psi = krylov_propagate(apply, psi, theta, theta.abs(), self.tol, 60)?;
            }
        }
        Ok(())
    }
}

fn rotate_sites(psi: &mut [C64], l: usize, mats: &[U2]) {
    for (i, u) in mats.iter().enumerate().take(l) {
        let bit = 1usize << i;
        let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
        psi.par_chunks_mut(2 * bit).for_each(|chunk| {
            let (down, up) = chunk.split_at_mut(bit);
            for (d, u_) in down.iter_mut().zip(up.iter_mut()) {
                let (a_up, a_dn) = (*u_, *d);
                *u_ = u00 * a_up + u01 * a_dn;
                *d = u10 * a_up + u11 * a_dn;
            }
        });
    }
}

/// Runs `n_steps` Floquet steps approximating exp(−iHt) for the XXZ model.
///
/// Each (XX, YY, ZZ) group has wall durations (τ, τ, Δτ) with τ = t/(3 n_steps)
/// and advances the effective time by 3τ.
pub fn floquet_evolve(
    seq: &PulseSequence,
    params: &ModelParams,
    psi0: &StateVector,
    t: f64,
    n_steps: usize,
    opts: &FloquetOptions,
) -> Result<EvolutionReport> {
    seq.validate()?;
    params.validate()?;
    let l = params.l;
    if psi0.basis != (Basis::Full { l }) {
        return Err(Error::Basis("floquet evolution needs a full-space state".into()));
    }
    if n_steps == 0 {
        return Err(Error::Sequence("n_steps must be at least 1".into()));
    }
    let scales = match &opts.site_scale {
        Some(s) if s.len() != l => {
            return Err(Error::Sequence(format!("site_scale has {} entries, L = {l}", s.len())))
        }
        Some(s) => s.clone(),
        None => vec![1.0; l],
    };
    let prop = Propagator {
        l,
        zz: crate::model::zz_energies(params)?,
        xx: if opts.detuning != 0.0 {
            Some(FullOperator::new(FullKind::XX, params)?)
        } else {
            None
        },
        detuning: opts.detuning,
        tol: opts.krylov_tol,
    };
    let tau = t / (3.0 * n_steps as f64);
    let mut psi = psi0.amps.clone();
    let mut frame = U2::identity();
    let rotate = |psi: &mut [C64], r: &Rotation, frame: &mut U2| {
        let mats: Vec<U2> = scales.iter().map(|&s| r.matrix(s)).collect();
        rotate_sites(psi, l, &mats);
        *frame = r.matrix(1.0) * *frame;
    };
    let duration = |k: &PulseKind| match k {
        PulseKind::XX | PulseKind::YY => tau,
        PulseKind::ZZ => params.delta * tau,
    };

    for r in &seq.preamble {
        rotate(&mut psi, r, &mut frame);
    }
    let mut times = Vec::with_capacity(n_steps);
    for n in 0..n_steps {
        let step = &seq.steps[n % seq.cycle()];
        if opts.second_order {
            for op in step {
                match op {
                    Op::Rotate(r) => rotate(&mut psi, r, &mut frame),
                    Op::Pulse(k) => prop.pulse(&mut psi, 0.5 * duration(k))?,
                }
            }
            for op in step.iter().rev() {
                match op {
                    Op::Rotate(r) => {
                        let inv = Rotation {
                            axis: r.axis,
                            angle: -r.angle,
                        };
                        rotate(&mut psi, &inv, &mut frame)
                    }
                    Op::Pulse(k) => prop.pulse(&mut psi, 0.5 * duration(k))?,
                }
            }
        } else {
            for op in step {
                match op {
                    Op::Rotate(r) => rotate(&mut psi, r, &mut frame),
                    Op::Pulse(k) => prop.pulse(&mut psi, duration(k))?,
                }
            }
        }
        times.push(3.0 * tau * (n + 1) as f64);
    }

    if seq.finals.is_empty() || opts.second_order {
        // undo the accumulated frame exactly
        if !proportional_to_identity(&frame) {
            let inv = frame.adjoint();
            let mats: Vec<U2> = vec![inv; l];
            rotate_sites(&mut psi, l, &mats);
        }
    } else {
        let fin = &seq.finals[(n_steps - 1) % seq.cycle()];
        for r in fin {
            rotate(&mut psi, r, &mut frame);
        }
    }

    let mut number_weights = vec![0.0; l + 1];
    for (i, a) in psi.iter().enumerate() {
        number_weights[(i as u64).count_ones() as usize] += a.norm_sqr();
    }
    Ok(EvolutionReport {
        state: StateVector::new(Basis::Full { l }, psi),
        times,
        n_steps,
        tau,
        number_weights,
        fidelity: None,
    })
}
