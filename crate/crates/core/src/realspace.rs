//! Exact stationary scattering of one photon on an arbitrary arrangement of
//! point-coupled emitters.
//!
//! Each waveguide is cut at its distinct coupling positions ("junctions")
//! into segments carrying right- and left-moving plane waves e^{±ikx}. The
//! unknowns are the segment coefficients not fixed by the radiation boundary
//! conditions, plus one excitation amplitude per emitter. Every junction
//! contributes two jump conditions and every emitter one equation of motion,
//! in which the field at a leg is the average of the two sides.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{norm_inf, solve_dense};
use crate::model::{
    validate_system, CouplingPoint, DirectCoupling, EmitterSpec, FrequencyUnits, PhaseMode,
    ScatteringAmplitudes, ScatteringProbabilities, SystemSpec, ValidationError, WaveguideSpec,
    DEFAULT_CARRIER,
};

/// Matrices with a 1-norm condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;
/// Relative residual ‖Ax − b‖∞ / ‖b‖∞ every accepted solve satisfies.
pub const MAX_RELATIVE_RESIDUAL: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    Rightward,
    Leftward,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Rightward => Direction::Leftward,
            Direction::Leftward => Direction::Rightward,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringProblem {
    pub system: SystemSpec,
    pub input_waveguide: usize,
    pub input_direction: Direction,
    /// Absolute energy, or detuning from the reference frequency, following
    /// the system's frequency units.
    pub photon_energy: f64,
}

impl ScatteringProblem {
    /// Photon entering waveguide 0 from the left.
    pub fn from_left(system: SystemSpec, photon_energy: f64) -> Self {
        Self {
            system,
            input_waveguide: 0,
            input_direction: Direction::Rightward,
            photon_energy,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("input waveguide {0} does not exist")]
    UnknownInput(usize),
    #[error("photon energy {0} is not finite")]
    NonFiniteEnergy(f64),
    #[error("wavevector must be positive (got {k} on waveguide {waveguide})")]
    NonPositiveWavevector { waveguide: usize, k: f64 },
    #[error("boundary-condition system is degenerate at photon energy {energy} (condition number {condition:e})")]
    SolverDegenerate { energy: f64, condition: f64 },
}

/// Outgoing amplitude in one waveguide and direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortAmplitude {
    pub waveguide: usize,
    pub direction: Direction,
    pub amplitude: Complex64,
}

/// Plane-wave coefficients on every segment of one waveguide. Segment `s`
/// lies between `junctions[s - 1]` and `junctions[s]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentAmplitudes {
    pub waveguide: usize,
    pub junctions: Vec<f64>,
    pub right: Vec<Complex64>,
    pub left: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub outgoing: Vec<PortAmplitude>,
    pub emitter_amplitudes: Vec<Complex64>,
    pub segment_amplitudes: Vec<SegmentAmplitudes>,
    pub input_waveguide: usize,
    pub input_direction: Direction,
    pub group_velocities: Vec<f64>,
    pub residual: f64,
    pub condition: f64,
}

impl SolveResult {
    pub fn amplitude(&self, waveguide: usize, direction: Direction) -> Complex64 {
        self.outgoing
            .iter()
            .find(|p| p.waveguide == waveguide && p.direction == direction)
            .map(|p| p.amplitude)
            .unwrap_or_default()
    }

    /// Outgoing probability in one port, weighted by the flux ratio of the
    /// port and input group velocities.
    pub fn probability(&self, waveguide: usize, direction: Direction) -> f64 {
        let v_in = self.group_velocities[self.input_waveguide];
        self.amplitude(waveguide, direction).norm_sqr() * self.group_velocities[waveguide] / v_in
    }

    pub fn total_probability(&self) -> f64 {
        self.outgoing
            .iter()
            .map(|p| self.probability(p.waveguide, p.direction))
            .sum()
    }

    /// Transmission and reflection on the input waveguide; forward and
    /// backward transfer summed over all other waveguides. "Forward" is the
    /// direction of the incoming photon.
    pub fn port_probabilities(&self) -> ScatteringProbabilities {
        let fwd = self.input_direction;
        let bwd = fwd.reversed();
        let w_in = self.input_waveguide;
        let others = (0..self.group_velocities.len()).filter(|&w| w != w_in);
        let (t_f, t_b) = others.fold((0.0, 0.0), |(f, b), w| {
            (f + self.probability(w, fwd), b + self.probability(w, bwd))
        });
        ScatteringProbabilities::from_parts(
            self.probability(w_in, fwd),
            self.probability(w_in, bwd),
            t_f,
            t_b,
        )
    }

    /// The four two-waveguide amplitudes, for a photon entering waveguide 0
    /// rightward (or waveguide 1, with the roles of the waveguides swapped).
    pub fn two_waveguide_amplitudes(&self) -> ScatteringAmplitudes {
        let fwd = self.input_direction;
        let bwd = fwd.reversed();
        let w_in = self.input_waveguide;
        let w_out = if w_in == 0 { 1 } else { 0 };
        ScatteringAmplitudes {
            t_r1: self.amplitude(w_in, fwd),
            r_l1: self.amplitude(w_in, bwd),
            t_r2: self.amplitude(w_out, fwd),
            r_l2: self.amplitude(w_out, bwd),
        }
    }
}

#[derive(Clone, Debug)]
struct Junction {
    position: f64,
    /// (emitter, coupling strength) for every leg at this position.
    legs: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
struct WaveguideLayout {
    velocity: f64,
    k: f64,
    junctions: Vec<Junction>,
    offset: usize,
}

/// A segment coefficient: either an unknown or a boundary value.
#[derive(Clone, Copy, Debug)]
enum Coefficient {
    Unknown(usize),
    Fixed(Complex64),
}

impl WaveguideLayout {
    fn segments(&self) -> usize {
        self.junctions.len() + 1
    }

    fn right(&self, s: usize, incoming: Complex64) -> Coefficient {
        if s == 0 {
            Coefficient::Fixed(incoming)
        } else {
            Coefficient::Unknown(self.offset + s - 1)
        }
    }

    fn left(&self, s: usize, incoming: Complex64) -> Coefficient {
        let m = self.junctions.len();
        if s == m {
            Coefficient::Fixed(incoming)
        } else {
            Coefficient::Unknown(self.offset + m + s)
        }
    }
}

/// The assembled boundary-condition system together with the bookkeeping
/// needed to read amplitudes back out of its solution.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
    layouts: Vec<WaveguideLayout>,
    emitter_offset: usize,
    incoming: Vec<(Complex64, Complex64)>,
    problem_energy: f64,
    input_waveguide: usize,
    input_direction: Direction,
}

impl LinearSystem {
    pub fn unknowns(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn segment_counts(&self) -> Vec<usize> {
        self.layouts.iter().map(|l| l.segments()).collect()
    }
}

struct Assembler {
    matrix: DMatrix<Complex64>,
    rhs: DVector<Complex64>,
}

impl Assembler {
    fn add(&mut self, row: usize, c: Coefficient, factor: Complex64) {
        match c {
            Coefficient::Unknown(col) => self.matrix[(row, col)] += factor,
            Coefficient::Fixed(value) => self.rhs[row] -= factor * value,
        }
    }
}

fn group_junctions(couplings: &[&CouplingPoint]) -> Vec<Junction> {
    let mut sorted: Vec<&CouplingPoint> = couplings.to_vec();
    sorted.sort_by(|a, b| a.position.total_cmp(&b.position));
    let mut junctions: Vec<Junction> = Vec::new();
    for c in sorted {
        match junctions.last_mut() {
            Some(j) if j.position == c.position => j.legs.push((c.emitter_id, c.strength)),
            _ => junctions.push(Junction {
                position: c.position,
                legs: vec![(c.emitter_id, c.strength)],
            }),
        }
    }
    junctions
}

pub fn build_linear_system(problem: &ScatteringProblem) -> Result<LinearSystem, SolverError> {
    let system = validate_system(problem.system.clone())?;
    if problem.input_waveguide >= system.waveguides.len() {
        return Err(SolverError::UnknownInput(problem.input_waveguide));
    }
    if !problem.photon_energy.is_finite() {
        return Err(SolverError::NonFiniteEnergy(problem.photon_energy));
    }

    let absolute_energy = match system.frequency_units {
        FrequencyUnits::Absolute => problem.photon_energy,
        FrequencyUnits::Detuning => system.reference_frequency + problem.photon_energy,
    };
    let phase_energy = match system.phase_mode {
        PhaseMode::FixedPhase => system.reference_frequency,
        PhaseMode::Dispersive => absolute_energy,
    };

    let mut offset = 0;
    let mut layouts = Vec::with_capacity(system.waveguides.len());
    for w in &system.waveguides {
        let k = phase_energy / w.group_velocity;
        if !(k > 0.0) {
            return Err(SolverError::NonPositiveWavevector { waveguide: w.id, k });
        }
        let legs: Vec<&CouplingPoint> = system
            .couplings
            .iter()
            .filter(|c| c.waveguide_id == w.id)
            .collect();
        let junctions = group_junctions(&legs);
        let m = junctions.len();
        layouts.push(WaveguideLayout {
            velocity: w.group_velocity,
            k,
            junctions,
            offset,
        });
        offset += 2 * m;
    }
    let emitter_offset = offset;
    let n = offset + system.emitters.len();

    let incoming: Vec<(Complex64, Complex64)> = (0..layouts.len())
        .map(|w| {
            let unit = Complex64::new(1.0, 0.0);
            let zero = Complex64::new(0.0, 0.0);
            if w != problem.input_waveguide {
                (zero, zero)
            } else {
                match problem.input_direction {
                    Direction::Rightward => (unit, zero),
                    Direction::Leftward => (zero, unit),
                }
            }
        })
        .collect();

    let mut asm = Assembler {
        matrix: DMatrix::zeros(n, n),
        rhs: DVector::zeros(n),
    };
    let emitter = |e: usize| Coefficient::Unknown(emitter_offset + e);

    let mut row = 0;
    for (w, layout) in layouts.iter().enumerate() {
        let (in_r, in_l) = incoming[w];
        let v = layout.velocity;
        for (j, junction) in layout.junctions.iter().enumerate() {
            let fwd = Complex64::from_polar(1.0, layout.k * junction.position);
            let bwd = fwd.conj();
            // −i v (R_after − R_before) e^{ikx} + Σ V C = 0
            asm.add(row, layout.right(j + 1, in_r), -I * v * fwd);
            asm.add(row, layout.right(j, in_r), I * v * fwd);
            // +i v (L_after − L_before) e^{−ikx} + Σ V C = 0
            asm.add(row + 1, layout.left(j + 1, in_l), I * v * bwd);
            asm.add(row + 1, layout.left(j, in_l), -I * v * bwd);
            for &(e, strength) in &junction.legs {
                let s = Complex64::new(strength, 0.0);
                asm.add(row, emitter(e), s);
                asm.add(row + 1, emitter(e), s);
            }
            row += 2;
        }
    }

    for e in &system.emitters {
        let row = emitter_offset + e.id;
        // photon energy and emitter frequency share the same units
        let detuning = problem.photon_energy - e.frequency;
        asm.add(row, emitter(e.id), Complex64::new(detuning, e.dissipation / 2.0));
        for d in &system.direct {
            let other = if d.emitter_a == e.id {
                d.emitter_b
            } else if d.emitter_b == e.id {
                d.emitter_a
            } else {
                continue;
            };
            asm.add(row, emitter(other), Complex64::new(-d.strength, 0.0));
        }
        for (w, layout) in layouts.iter().enumerate() {
            let (in_r, in_l) = incoming[w];
            for (j, junction) in layout.junctions.iter().enumerate() {
                let fwd = Complex64::from_polar(1.0, layout.k * junction.position);
                let bwd = fwd.conj();
                for &(owner, strength) in &junction.legs {
                    if owner != e.id {
                        continue;
                    }
                    let half = -0.5 * strength;
                    for s in [j, j + 1] {
                        asm.add(row, layout.right(s, in_r), half * fwd);
                        asm.add(row, layout.left(s, in_l), half * bwd);
                    }
                }
            }
        }
    }

    Ok(LinearSystem {
        matrix: asm.matrix,
        rhs: asm.rhs,
        layouts,
        emitter_offset,
        incoming,
        problem_energy: problem.photon_energy,
        input_waveguide: problem.input_waveguide,
        input_direction: problem.input_direction,
    })
}

pub fn solve(problem: &ScatteringProblem) -> Result<SolveResult, SolverError> {
    let ls = build_linear_system(problem)?;
    let degenerate = |condition: f64| SolverError::SolverDegenerate {
        energy: ls.problem_energy,
        condition,
    };
    let sol = solve_dense(&ls.matrix, &ls.rhs).ok_or_else(|| degenerate(f64::INFINITY))?;
    if !(sol.condition <= MAX_CONDITION) {
        return Err(degenerate(sol.condition));
    }
    let scale = norm_inf(&ls.rhs).max(f64::MIN_POSITIVE);
    if !(sol.residual <= MAX_RELATIVE_RESIDUAL * scale) {
        return Err(degenerate(sol.condition));
    }

    let value = |c: Coefficient| match c {
        Coefficient::Unknown(i) => sol.x[i],
        Coefficient::Fixed(v) => v,
    };

    let mut outgoing = Vec::new();
    let mut segment_amplitudes = Vec::new();
    for (w, layout) in ls.layouts.iter().enumerate() {
        let (in_r, in_l) = ls.incoming[w];
        let count = layout.segments();
        let right: Vec<Complex64> = (0..count).map(|s| value(layout.right(s, in_r))).collect();
        let left: Vec<Complex64> = (0..count).map(|s| value(layout.left(s, in_l))).collect();
        outgoing.push(PortAmplitude {
            waveguide: w,
            direction: Direction::Rightward,
            amplitude: right[count - 1],
        });
        outgoing.push(PortAmplitude {
            waveguide: w,
            direction: Direction::Leftward,
            amplitude: left[0],
        });
        segment_amplitudes.push(SegmentAmplitudes {
            waveguide: w,
            junctions: layout.junctions.iter().map(|j| j.position).collect(),
            right,
            left,
        });
    }
    let emitter_amplitudes = (ls.emitter_offset..ls.unknowns()).map(|i| sol.x[i]).collect();

    Ok(SolveResult {
        outgoing,
        emitter_amplitudes,
        segment_amplitudes,
        input_waveguide: ls.input_waveguide,
        input_direction: ls.input_direction,
        group_velocities: ls.layouts.iter().map(|l| l.velocity).collect(),
        residual: sol.residual,
        condition: sol.condition,
    })
}

/// Carrier (in units of γ) at which the three-qubit layout places its legs.
pub const FIG5_CARRIER: f64 = DEFAULT_CARRIER;

/// Three qubits bridging two waveguides for switchable directional transfer.
///
/// Q1 (id 0) sits at x = 0 on both waveguides. Q3 (id 2) sits at x = +d on
/// both, forming a forward pair with Q1 (θ = φ = π/2); Q2 (id 1) sits at +d
/// on the first waveguide and +3d on the second, forming a backward pair
/// (θ = π/2, φ = 3π/2). d is a quarter wavelength at the Q1 frequency.
///
/// Q2's second leg must lie at +3d rather than −d: exchange through the
/// waveguide depends on |x|, so a leg at −d acts like φ = π/2 and breaks the
/// degeneracy of the backward pair. Q1 and Q3 share the direct coupling −2γ
/// that cancels their waveguide exchange; Q2 is not directly coupled to
/// either. `delta2` and `delta3`
/// are the Q2 and Q3 detunings from Q1; `kappa` applies to all qubits.
pub fn fig5_preset(delta2: f64, delta3: f64, kappa: f64, gamma: f64) -> SystemSpec {
    let v_g = 1.0;
    let strength = (gamma * v_g).sqrt();
    let d = 0.25 * (2.0 * PI * v_g / FIG5_CARRIER);
    let leg = |emitter_id, waveguide_id, position| CouplingPoint {
        emitter_id,
        waveguide_id,
        position,
        strength,
    };
    let emitter = |id, frequency| EmitterSpec {
        id,
        frequency,
        dissipation: kappa,
    };
    let direct = |emitter_a, emitter_b, strength| DirectCoupling {
        emitter_a,
        emitter_b,
        strength,
    };
    SystemSpec {
        waveguides: (0..2).map(|id| WaveguideSpec { id, group_velocity: v_g }).collect(),
        emitters: vec![emitter(0, 0.0), emitter(1, delta2), emitter(2, delta3)],
        couplings: vec![
            leg(0, 0, 0.0),
            leg(0, 1, 0.0),
            leg(1, 0, d),
            leg(1, 1, 3.0 * d),
            leg(2, 0, d),
            leg(2, 1, d),
        ],
        direct: vec![
            direct(0, 2, -2.0 * gamma),
            direct(0, 1, 0.0),
            direct(1, 2, 0.0),
        ],
        phase_mode: PhaseMode::Dispersive,
        frequency_units: FrequencyUnits::Detuning,
        reference_frequency: FIG5_CARRIER,
    }
}
