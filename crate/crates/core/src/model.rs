//! Physical system description: waveguides, emitters, coupling points and
//! direct emitter-emitter couplings, plus the reduced two-atom parameter set.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Carrier frequency (in units of γ) used when a two-atom parameter set is
/// turned into a real-space system and no explicit carrier is requested.
pub const DEFAULT_CARRIER: f64 = 1.0e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveguideSpec {
    pub id: usize,
    #[serde(default = "unit_velocity")]
    pub group_velocity: f64,
}

fn unit_velocity() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmitterSpec {
    pub id: usize,
    /// Transition frequency, absolute or relative to the reference frequency
    /// depending on [`SystemSpec::frequency_units`].
    pub frequency: f64,
    /// Decay rate κ into non-waveguide modes.
    #[serde(default)]
    pub dissipation: f64,
}

/// One leg of an emitter: a point-like coupling of strength `strength` to
/// waveguide `waveguide_id` at coordinate `position`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingPoint {
    pub emitter_id: usize,
    pub waveguide_id: usize,
    pub position: f64,
    pub strength: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectCoupling {
    pub emitter_a: usize,
    pub emitter_b: usize,
    pub strength: f64,
}

/// How propagation phases between coupling points are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseMode {
    /// Phases frozen at the reference frequency for every probe energy.
    #[default]
    FixedPhase,
    /// Phases follow the probe wavevector k = E / v_g.
    Dispersive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnits {
    /// Emitter frequencies and photon energies are absolute.
    Absolute,
    /// Emitter frequencies and photon energies are offsets from
    /// `reference_frequency`.
    #[default]
    Detuning,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub waveguides: Vec<WaveguideSpec>,
    pub emitters: Vec<EmitterSpec>,
    pub couplings: Vec<CouplingPoint>,
    #[serde(default)]
    pub direct: Vec<DirectCoupling>,
    #[serde(default)]
    pub phase_mode: PhaseMode,
    #[serde(default)]
    pub frequency_units: FrequencyUnits,
    pub reference_frequency: f64,
}

/// A single broken invariant found by [`validate_system`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    WaveguideIds,
    EmitterIds,
    NonPositiveGroupVelocity { waveguide: usize, value: f64 },
    NegativeDissipation { emitter: usize, value: f64 },
    NonFiniteFrequency { emitter: usize },
    DanglingEmitter { coupling: usize, emitter: usize },
    DanglingWaveguide { coupling: usize, waveguide: usize },
    NegativeStrength { coupling: usize, value: f64 },
    NonFinitePosition { coupling: usize },
    SelfCoupling { entry: usize, emitter: usize },
    DanglingDirect { entry: usize, emitter: usize },
    DuplicateDirectPair { a: usize, b: usize },
    NonFiniteDirect { entry: usize },
    NonPositiveReference(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            WaveguideIds => write!(f, "waveguide ids must be unique and contiguous from 0"),
            EmitterIds => write!(f, "emitter ids must be unique and contiguous from 0"),
            NonPositiveGroupVelocity { waveguide, value } => {
                write!(f, "waveguide {waveguide}: group velocity must be positive (got {value})")
            }
            NegativeDissipation { emitter, value } => {
                write!(f, "emitter {emitter}: negative dissipation {value}")
            }
            NonFiniteFrequency { emitter } => write!(f, "emitter {emitter}: frequency is not finite"),
            DanglingEmitter { coupling, emitter } => {
                write!(f, "coupling {coupling}: dangling emitter id {emitter}")
            }
            DanglingWaveguide { coupling, waveguide } => {
                write!(f, "coupling {coupling}: dangling waveguide id {waveguide}")
            }
            NegativeStrength { coupling, value } => {
                write!(f, "coupling {coupling}: negative strength {value}")
            }
            NonFinitePosition { coupling } => write!(f, "coupling {coupling}: position is not finite"),
            SelfCoupling { entry, emitter } => {
                write!(f, "direct coupling {entry}: emitter {emitter} coupled to itself")
            }
            DanglingDirect { entry, emitter } => {
                write!(f, "direct coupling {entry}: dangling emitter id {emitter}")
            }
            DuplicateDirectPair { a, b } => write!(f, "duplicate direct coupling for pair ({a}, {b})"),
            NonFiniteDirect { entry } => write!(f, "direct coupling {entry}: strength is not finite"),
            NonPositiveReference(v) => write!(f, "reference frequency must be positive (got {v})"),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "invalid system: {}", parts.join("; "))
    }
}

fn ids_contiguous(ids: impl Iterator<Item = usize>, len: usize) -> bool {
    let mut seen = vec![false; len];
    for id in ids {
        if id >= len || seen[id] {
            return false;
        }
        seen[id] = true;
    }
    true
}

/// Checks every structural invariant of `spec`, collecting all violations
/// instead of stopping at the first one.
pub fn validate_system(spec: SystemSpec) -> Result<SystemSpec, ValidationError> {
    let mut violations = Vec::new();
    let n_wg = spec.waveguides.len();
    let n_em = spec.emitters.len();

    if !ids_contiguous(spec.waveguides.iter().map(|w| w.id), n_wg) {
        violations.push(Violation::WaveguideIds);
    }
    if !ids_contiguous(spec.emitters.iter().map(|e| e.id), n_em) {
        violations.push(Violation::EmitterIds);
    }
    for w in &spec.waveguides {
        if !(w.group_velocity > 0.0 && w.group_velocity.is_finite()) {
            violations.push(Violation::NonPositiveGroupVelocity {
                waveguide: w.id,
                value: w.group_velocity,
            });
        }
    }
    for e in &spec.emitters {
        if !(e.dissipation >= 0.0 && e.dissipation.is_finite()) {
            violations.push(Violation::NegativeDissipation {
                emitter: e.id,
                value: e.dissipation,
            });
        }
        if !e.frequency.is_finite() {
            violations.push(Violation::NonFiniteFrequency { emitter: e.id });
        }
    }
    for (i, c) in spec.couplings.iter().enumerate() {
        if c.emitter_id >= n_em {
            violations.push(Violation::DanglingEmitter {
                coupling: i,
                emitter: c.emitter_id,
            });
        }
        if c.waveguide_id >= n_wg {
            violations.push(Violation::DanglingWaveguide {
                coupling: i,
                waveguide: c.waveguide_id,
            });
        }
        if !(c.strength >= 0.0 && c.strength.is_finite()) {
            violations.push(Violation::NegativeStrength {
                coupling: i,
                value: c.strength,
            });
        }
        if !c.position.is_finite() {
            violations.push(Violation::NonFinitePosition { coupling: i });
        }
    }
    let mut pairs = HashSet::new();
    for (i, d) in spec.direct.iter().enumerate() {
        if d.emitter_a == d.emitter_b {
            violations.push(Violation::SelfCoupling {
                entry: i,
                emitter: d.emitter_a,
            });
        }
        for id in [d.emitter_a, d.emitter_b] {
            if id >= n_em {
                violations.push(Violation::DanglingDirect { entry: i, emitter: id });
            }
        }
        if !d.strength.is_finite() {
            violations.push(Violation::NonFiniteDirect { entry: i });
        }
        let key = (d.emitter_a.min(d.emitter_b), d.emitter_a.max(d.emitter_b));
        if d.emitter_a != d.emitter_b && !pairs.insert(key) {
            violations.push(Violation::DuplicateDirectPair { a: key.0, b: key.1 });
        }
    }
    if !(spec.reference_frequency > 0.0 && spec.reference_frequency.is_finite()) {
        violations.push(Violation::NonPositiveReference(spec.reference_frequency));
    }

    if violations.is_empty() {
        Ok(spec)
    } else {
        Err(ValidationError { violations })
    }
}

/// The reduced parameter set of two identical giant atoms A and B bridging
/// two waveguides: A sits at the origin of both, B at phase `theta` along the
/// first waveguide and `phi` along the second.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoAtomParams {
    /// Propagation phase k·x₁ between the legs on the first waveguide.
    pub theta: f64,
    /// Propagation phase k·x₂ between the legs on the second waveguide.
    pub phi: f64,
    /// Single-leg decay rate V²/v_g.
    pub gamma: f64,
    /// Direct coupling between the atoms.
    pub j: f64,
    /// Non-waveguide dissipation of each atom.
    #[serde(default)]
    pub kappa: f64,
    /// Probe detuning E − ω.
    #[serde(default)]
    pub detuning: f64,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("gamma must be positive (got {0})")]
    NonPositiveGamma(f64),
    #[error("kappa must be non-negative (got {0})")]
    NegativeKappa(f64),
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("carrier must be positive (got {0})")]
    NonPositiveCarrier(f64),
}

impl TwoAtomParams {
    pub fn new(theta: f64, phi: f64, gamma: f64, j: f64, kappa: f64, detuning: f64) -> Self {
        Self {
            theta,
            phi,
            gamma,
            j,
            kappa,
            detuning,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, v) in [
            ("theta", self.theta),
            ("phi", self.phi),
            ("gamma", self.gamma),
            ("j", self.j),
            ("kappa", self.kappa),
            ("detuning", self.detuning),
        ] {
            if !v.is_finite() {
                return Err(ParamError::NonFinite(name));
            }
        }
        if self.gamma <= 0.0 {
            return Err(ParamError::NonPositiveGamma(self.gamma));
        }
        if self.kappa < 0.0 {
            return Err(ParamError::NegativeKappa(self.kappa));
        }
        Ok(())
    }

    pub fn with_detuning(self, detuning: f64) -> Self {
        Self { detuning, ..self }
    }
}

/// Builds the real-space system for two giant atoms from the reduced
/// parameters. Phases are converted to positions at the carrier,
/// x = θ·v_g / carrier, and the emitters sit exactly at the carrier
/// (zero offset in [`FrequencyUnits::Detuning`]).
pub fn two_atom_to_system(p: &TwoAtomParams, carrier: f64) -> Result<SystemSpec, ParamError> {
    p.validate()?;
    if !(carrier > 0.0 && carrier.is_finite()) {
        return Err(ParamError::NonPositiveCarrier(carrier));
    }
    let v_g = 1.0;
    let strength = (p.gamma * v_g).sqrt();
    let x1 = p.theta * v_g / carrier;
    let x2 = p.phi * v_g / carrier;
    let leg = |emitter_id, waveguide_id, position| CouplingPoint {
        emitter_id,
        waveguide_id,
        position,
        strength,
    };
    Ok(SystemSpec {
        waveguides: (0..2).map(|id| WaveguideSpec { id, group_velocity: v_g }).collect(),
        emitters: (0..2)
            .map(|id| EmitterSpec {
                id,
                frequency: 0.0,
                dissipation: p.kappa,
            })
            .collect(),
        couplings: vec![leg(0, 0, 0.0), leg(0, 1, 0.0), leg(1, 0, x1), leg(1, 1, x2)],
        direct: vec![DirectCoupling {
            emitter_a: 0,
            emitter_b: 1,
            strength: p.j,
        }],
        phase_mode: PhaseMode::Dispersive,
        frequency_units: FrequencyUnits::Detuning,
        reference_frequency: carrier,
    })
}

/// Complex transport amplitudes for a photon entering the first waveguide
/// from the left: transmission and reflection in that waveguide, forward and
/// backward transfer into the second.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringAmplitudes {
    pub t_r1: Complex64,
    pub r_l1: Complex64,
    pub t_r2: Complex64,
    pub r_l2: Complex64,
}

impl ScatteringAmplitudes {
    pub fn probabilities(&self) -> ScatteringProbabilities {
        ScatteringProbabilities::from_parts(
            self.t_r1.norm_sqr(),
            self.r_l1.norm_sqr(),
            self.t_r2.norm_sqr(),
            self.r_l2.norm_sqr(),
        )
    }

    pub fn as_array(&self) -> [Complex64; 4] {
        [self.t_r1, self.r_l1, self.t_r2, self.r_l2]
    }

    /// Largest componentwise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringProbabilities {
    pub t: f64,
    pub r: f64,
    pub t_f: f64,
    pub t_b: f64,
    /// Whatever is not accounted for by the four ports.
    pub loss: f64,
}

impl ScatteringProbabilities {
    pub fn from_parts(t: f64, r: f64, t_f: f64, t_b: f64) -> Self {
        // loss is defined so that the five fields add to one in floating point
        let loss = 1.0 - (((t + r) + t_f) + t_b);
        Self { t, r, t_f, t_b, loss }
    }

    pub fn port_sum(&self) -> f64 {
        self.t + self.r + self.t_f + self.t_b
    }
}

/// Energies and waveguide-resolved decay rates of the dressed states
/// |±⟩ = (|eg⟩ ± |ge⟩)/√2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollectiveParams {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub gamma1_plus: f64,
    pub gamma1_minus: f64,
    pub gamma2_plus: f64,
    pub gamma2_minus: f64,
    pub j1: f64,
    pub j2: f64,
    pub j_sigma: f64,
}

impl CollectiveParams {
    pub fn decay_plus(&self) -> f64 {
        self.gamma1_plus + self.gamma2_plus
    }

    pub fn decay_minus(&self) -> f64 {
        self.gamma1_minus + self.gamma2_minus
    }
}

/// Reduces an angle to [0, 2π).
pub fn wrap_phase(angle: f64) -> f64 {
    let w = angle.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Distance between two angles on the circle, in [0, π].
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = wrap_phase(a - b);
    d.min(2.0 * PI - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_atom_layout() -> SystemSpec {
        let p = TwoAtomParams::new(PI / 2.0, PI / 2.0, 1.0, -2.0, 0.0, 0.0);
        two_atom_to_system(&p, 1e6).unwrap()
    }

    #[test]
    fn two_atom_system_is_valid() {
        let spec = two_atom_layout();
        assert_eq!(spec.waveguides.len(), 2);
        assert_eq!(spec.emitters.len(), 2);
        assert_eq!(spec.couplings.len(), 4);
        assert_eq!(spec.direct.len(), 1);
        assert!(validate_system(spec).is_ok());
    }

    #[test]
    fn positions_follow_phase_over_carrier() {
        let spec = two_atom_layout();
        let x1 = spec.couplings[2].position;
        let x2 = spec.couplings[3].position;
        assert!((x1 - PI / 2.0 * 1e-6).abs() < 1e-20);
        assert!((x2 - PI / 2.0 * 1e-6).abs() < 1e-20);
    }

    #[test]
    fn zero_theta_colocates_legs() {
        let p = TwoAtomParams::new(0.0, 1.0, 1.0, 0.0, 0.0, 0.0);
        let spec = two_atom_to_system(&p, 10.0).unwrap();
        assert_eq!(spec.couplings[2].position, 0.0);
        assert_eq!(spec.couplings[0].position, 0.0);
    }

    #[test]
    fn unit_gamma_gives_unit_strength() {
        let spec = two_atom_layout();
        assert!(spec.couplings.iter().all(|c| c.strength == 1.0));
    }

    #[test]
    fn rejects_bad_carrier() {
        let p = TwoAtomParams::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0);
        assert_eq!(
            two_atom_to_system(&p, 0.0),
            Err(ParamError::NonPositiveCarrier(0.0))
        );
    }

    #[test]
    fn dangling_emitter() {
        let mut spec = two_atom_layout();
        spec.emitters.clear();
        spec.direct.clear();
        spec.couplings.truncate(1);
        let err = validate_system(spec).unwrap_err();
        assert_eq!(
            err.violations,
            vec![Violation::DanglingEmitter { coupling: 0, emitter: 0 }]
        );
    }

    #[test]
    fn negative_dissipation() {
        let mut spec = two_atom_layout();
        spec.emitters[1].dissipation = -0.1;
        let err = validate_system(spec).unwrap_err();
        assert_eq!(
            err.violations,
            vec![Violation::NegativeDissipation { emitter: 1, value: -0.1 }]
        );
        assert!(err.to_string().contains("negative dissipation"));
    }

    #[test]
    fn collects_every_violation() {
        let mut spec = two_atom_layout();
        spec.waveguides[0].group_velocity = 0.0;
        spec.couplings[1].strength = -1.0;
        spec.direct.push(DirectCoupling { emitter_a: 1, emitter_b: 0, strength: 0.3 });
        spec.direct.push(DirectCoupling { emitter_a: 1, emitter_b: 1, strength: 0.3 });
        let err = validate_system(spec).unwrap_err();
        assert_eq!(err.violations.len(), 4, "{err}");
        assert!(err.violations.contains(&Violation::DuplicateDirectPair { a: 0, b: 1 }));
    }

    #[test]
    fn ids_must_be_contiguous() {
        let mut spec = two_atom_layout();
        spec.waveguides[1].id = 5;
        let err = validate_system(spec).unwrap_err();
        assert!(err.violations.contains(&Violation::WaveguideIds));
    }

    #[test]
    fn json_round_trip_keeps_field_names() {
        let spec = two_atom_layout();
        let text = serde_json::to_string(&spec).unwrap();
        for key in ["waveguides", "group_velocity", "emitter_id", "phase_mode", "reference_frequency"] {
            assert!(text.contains(key), "{key} missing from {text}");
        }
        let back: SystemSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn param_validation() {
        let p = TwoAtomParams::new(0.0, 0.0, -1.0, 0.0, 0.0, 0.0);
        assert_eq!(p.validate().unwrap_err().to_string(), "gamma must be positive (got -1)");
        let p = TwoAtomParams::new(0.0, 0.0, 1.0, 0.0, -0.5, 0.0);
        assert_eq!(p.validate(), Err(ParamError::NegativeKappa(-0.5)));
    }

    #[test]
    fn phase_helpers() {
        assert!((wrap_phase(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!(phase_distance(0.0, 2.0 * PI) < 1e-15);
        assert!((phase_distance(0.1, -0.1) - 0.2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn theta_round_trips_through_positions(
            theta in -10.0f64..10.0,
            phi in -10.0f64..10.0,
            carrier in 1.0f64..1e9,
        ) {
            let p = TwoAtomParams::new(theta, phi, 1.0, 0.0, 0.0, 0.0);
            let spec = two_atom_to_system(&p, carrier).unwrap();
            let v_g = spec.waveguides[0].group_velocity;
            let back_theta = carrier * spec.couplings[2].position / v_g;
            let back_phi = carrier * spec.couplings[3].position / v_g;
            prop_assert!((back_theta - theta).abs() <= 1e-12 * theta.abs().max(1e-300));
            prop_assert!((back_phi - phi).abs() <= 1e-12 * phi.abs().max(1e-300));
        }

        #[test]
        fn probabilities_close_to_one(
            parts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)
        ) {
            let a: Vec<Complex64> = parts.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
            let amps = ScatteringAmplitudes { t_r1: a[0], r_l1: a[1], t_r2: a[2], r_l2: a[3] };
            let p = amps.probabilities();
            prop_assert!((p.port_sum() + p.loss - 1.0).abs() <= f64::EPSILON);
        }
    }
}
