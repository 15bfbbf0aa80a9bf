//! Analytic single-photon amplitudes for two giant atoms bridging two
//! waveguides.
//!
//! Three evaluation routes are provided:
//!
//! * [`amplitudes_full`]: the direct rational form, valid for any κ ≥ 0.
//! * [`amplitudes_eigen`]: the same amplitudes split into the two dressed-state
//!   poles λ±, valid at κ = 0.
//! * [`amplitudes_matched`]: the reduced form for φ = θ with the waveguide
//!   exchange cancelled by the direct coupling.
//!
//! All amplitudes refer to a photon entering waveguide 1 from the left, with
//! plane-wave coefficients measured relative to the origin where atom A sits.
//!
//! At an exact dark state (a dressed state with vanishing decay sitting at
//! the probe energy) the rational forms are 0/0. The dark state does not take
//! part in scattering, so its pole is dropped and the finite remainder is
//! returned. Only singularities at the level of floating-point round-off are
//! treated this way; a genuine pole within the guard raises
//! [`ClosedFormError::NearPole`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{phase_distance, CollectiveParams, ParamError, ScatteringAmplitudes, TwoAtomParams};

/// Denominators below this (in units of γ or γ²) are treated as poles.
pub const POLE_GUARD: f64 = 1e-30;

/// Tolerance (in units of γ) used by [`classify_condition`].
pub const CONDITION_TOL: f64 = 1e-9;

/// Pole distances and residues below this (in units of γ, γ²) are
/// indistinguishable from round-off.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

const MATCHED_PHASE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ClosedFormError {
    #[error(transparent)]
    InvalidParams(#[from] ParamError),
    #[error("probe detuning {detuning} sits on a scattering pole (|denominator| = {magnitude:e})")]
    NearPole { detuning: f64, magnitude: f64 },
    #[error("the dressed-state decomposition requires kappa = 0 (got {0})")]
    KappaUnsupported(f64),
    #[error("matched-phase form not applicable: {}", list_conditions(.0))]
    PreconditionViolated(Vec<MatchedCondition>),
}

/// A failed precondition of [`amplitudes_matched`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchedCondition {
    PhasesDiffer,
    Dissipative,
    ExchangeNotCancelled,
    ThetaAtPi,
}

impl MatchedCondition {
    fn describe(&self) -> &'static str {
        match self {
            MatchedCondition::PhasesDiffer => "phi must equal theta",
            MatchedCondition::Dissipative => "kappa must be zero",
            MatchedCondition::ExchangeNotCancelled => "j must equal -2 gamma sin(theta)",
            MatchedCondition::ThetaAtPi => "theta must differ from pi",
        }
    }
}

fn list_conditions(c: &[MatchedCondition]) -> String {
    c.iter().map(|c| c.describe()).collect::<Vec<_>>().join(", ")
}

const I: Complex64 = Complex64::new(0.0, 1.0);

fn expi(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// Direct coupling that cancels the waveguide-mediated exchange, making the
/// dressed states degenerate in energy (J_Σ = 0).
pub fn degeneracy_coupling(theta: f64, phi: f64, gamma: f64) -> f64 {
    -gamma * (theta.sin() + phi.sin())
}

pub fn collective_params(p: &TwoAtomParams) -> CollectiveParams {
    let g = p.gamma;
    let (s1, c1) = p.theta.sin_cos();
    let (s2, c2) = p.phi.sin_cos();
    let gamma1_plus = g * (1.0 + c1);
    let gamma1_minus = g * (1.0 - c1);
    let gamma2_plus = g * (1.0 + c2);
    let gamma2_minus = g * (1.0 - c2);
    let j1 = g * s1;
    let j2 = g * s2;
    let j_sigma = p.j + j1 + j2;
    CollectiveParams {
        lambda_plus: Complex64::new(j_sigma, -(gamma1_plus + gamma2_plus)),
        lambda_minus: Complex64::new(-j_sigma, -(gamma1_minus + gamma2_minus)),
        gamma1_plus,
        gamma1_minus,
        gamma2_plus,
        gamma2_minus,
        j1,
        j2,
        j_sigma,
    }
}

/// Numerator of one amplitude as a polynomial in Δ′ = Δ + 2iγ + iκ/2:
/// value, first and (constant) second derivative.
struct Numerator {
    value: Box<dyn Fn(Complex64) -> Complex64>,
    slope: Box<dyn Fn(Complex64) -> Complex64>,
    curvature: Complex64,
}

/// Amplitudes from the direct rational form, for any κ ≥ 0.
pub fn amplitudes_full(p: &TwoAtomParams) -> Result<ScatteringAmplitudes, ClosedFormError> {
    p.validate()?;
    let g = p.gamma;
    let (sin_t, cos_t) = p.theta.sin_cos();
    let e_t = expi(p.theta);
    let e_p = expi(p.phi);
    let e_tmp = expi(p.theta - p.phi);
    let e_tpp = expi(p.theta + p.phi);

    let jc = p.j - I * g * (e_t + e_p);
    let dp = Complex64::new(p.detuning, 2.0 * g + p.kappa / 2.0);
    let den = dp * dp - jc * jc;

    let numerators = [
        Numerator {
            value: Box::new(move |z| {
                let a = z - I * g;
                let b = jc + I * g * cos_t;
                a * a - b * b + g * g * sin_t * sin_t
            }),
            slope: Box::new(move |z| 2.0 * (z - I * g)),
            curvature: Complex64::new(2.0, 0.0),
        },
        Numerator {
            value: Box::new(move |z| 2.0 * g * e_t * (jc + z * cos_t) / I),
            slope: Box::new(move |_| 2.0 * g * e_t * cos_t / I),
            curvature: Complex64::new(0.0, 0.0),
        },
        Numerator {
            value: Box::new(move |z| g * (jc * (e_t + e_p.conj()) + z * (e_tmp + 1.0)) / I),
            slope: Box::new(move |_| g * (e_tmp + 1.0) / I),
            curvature: Complex64::new(0.0, 0.0),
        },
        Numerator {
            value: Box::new(move |z| g * (jc * (e_t + e_p) + z * (e_tpp + 1.0)) / I),
            slope: Box::new(move |_| g * (e_tpp + 1.0) / I),
            curvature: Complex64::new(0.0, 0.0),
        },
    ];

    // Δ′² − J_C² = (Δ′ − J_C)(Δ′ + J_C); pick the factor closest to zero.
    let f_plus = dp - jc;
    let f_minus = dp + jc;
    let (near, root, far) = if f_plus.norm() <= f_minus.norm() {
        (f_plus, jc, f_minus)
    } else {
        (f_minus, -jc, f_plus)
    };

    let on_pole = den.norm() < POLE_GUARD * g * g;
    let mut out = [Complex64::new(0.0, 0.0); 4];
    if on_pole || near.norm() < ROUNDOFF * g {
        let dark = numerators
            .iter()
            .all(|n| (n.value)(root).norm() <= ROUNDOFF * g * g);
        if dark {
            for (slot, n) in out.iter_mut().zip(&numerators) {
                *slot = ((n.slope)(root) + 0.5 * n.curvature * near) / far;
            }
            return Ok(pack(out));
        }
        if on_pole {
            return Err(ClosedFormError::NearPole {
                detuning: p.detuning,
                magnitude: den.norm(),
            });
        }
    }
    for (slot, n) in out.iter_mut().zip(&numerators) {
        *slot = (n.value)(dp) / den;
    }
    Ok(pack(out))
}

fn pack(a: [Complex64; 4]) -> ScatteringAmplitudes {
    ScatteringAmplitudes {
        t_r1: a[0],
        r_l1: a[1],
        t_r2: a[2],
        r_l2: a[3],
    }
}

/// Amplitudes as a sum over the two dressed-state poles λ±. Requires κ = 0.
pub fn amplitudes_eigen(p: &TwoAtomParams) -> Result<ScatteringAmplitudes, ClosedFormError> {
    p.validate()?;
    if p.kappa != 0.0 {
        return Err(ClosedFormError::KappaUnsupported(p.kappa));
    }
    let g = p.gamma;
    let cp = collective_params(p);
    let cos_t = p.theta.cos();
    let e_t = expi(p.theta);
    let e_p = expi(p.phi);

    // residues for the |−⟩ pole (sign −1) and the |+⟩ pole (sign +1)
    let residues = |s: f64| {
        let a = 1.0 + s * e_t;
        [
            Complex64::new(g * (1.0 + s * cos_t), 0.0),
            g * a * a / 2.0,
            g * a * (1.0 + s * e_p.conj()) / 2.0,
            g * a * (1.0 + s * e_p) / 2.0,
        ]
    };

    let mut out = [Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default(), Complex64::default()];
    for (sign, lambda) in [(-1.0, cp.lambda_minus), (1.0, cp.lambda_plus)] {
        let res = residues(sign);
        let gap = p.detuning - lambda;
        if gap.norm() < ROUNDOFF * g {
            if res.iter().all(|r| r.norm() <= ROUNDOFF * g) {
                continue;
            }
            if gap.norm() < POLE_GUARD * g {
                return Err(ClosedFormError::NearPole {
                    detuning: p.detuning,
                    magnitude: gap.norm(),
                });
            }
        }
        let inv = 1.0 / (I * gap);
        for (slot, r) in out.iter_mut().zip(res) {
            *slot += r * inv;
        }
    }
    Ok(pack(out))
}

/// Reduced amplitudes for φ = θ ≠ π, κ = 0 and J = −2γ sin θ: the reflected
/// and backward amplitudes coincide and t_r1 = 1 + t_r2.
pub fn amplitudes_matched(p: &TwoAtomParams) -> Result<ScatteringAmplitudes, ClosedFormError> {
    p.validate()?;
    let g = p.gamma;
    let mut failed = Vec::new();
    if phase_distance(p.theta, p.phi) > MATCHED_PHASE_TOL {
        failed.push(MatchedCondition::PhasesDiffer);
    }
    if p.kappa != 0.0 {
        failed.push(MatchedCondition::Dissipative);
    }
    if (p.j + 2.0 * g * p.theta.sin()).abs() > CONDITION_TOL * g {
        failed.push(MatchedCondition::ExchangeNotCancelled);
    }
    if phase_distance(p.theta, PI) <= MATCHED_PHASE_TOL {
        failed.push(MatchedCondition::ThetaAtPi);
    }
    if !failed.is_empty() {
        return Err(ClosedFormError::PreconditionViolated(failed));
    }

    let cos_t = p.theta.cos();
    let gp = g * (1.0 + cos_t);
    let gm = g * (1.0 - cos_t);
    let lorentz = |rate: f64| {
        // a decoupled state (θ = 0 gives Γ₁₋ = 0) contributes nothing
        if rate <= ROUNDOFF * g {
            Complex64::default()
        } else {
            rate / Complex64::new(-2.0 * rate, p.detuning)
        }
    };
    let e_t = expi(p.theta);
    let t_r2 = lorentz(gm) + lorentz(gp);
    let r = e_t * lorentz(gp) - e_t * lorentz(gm);
    Ok(ScatteringAmplitudes {
        t_r1: 1.0 + t_r2,
        r_l1: r,
        t_r2,
        r_l2: r,
    })
}

/// Which of the special interference conditions hold for a parameter set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// Total exchange J_Σ vanishes: the dressed states are degenerate in energy.
    pub j_sigma_zero: bool,
    /// φ ≡ θ (mod 2π).
    pub matched_forward: bool,
    /// φ ≡ 2π − θ (mod 2π).
    pub matched_backward: bool,
    /// λ₊ = λ₋: degenerate in both energy and decay.
    pub fully_degenerate: bool,
    pub dark_plus: bool,
    pub dark_minus: bool,
}

impl ConditionReport {
    pub fn flags(&self) -> Vec<&'static str> {
        [
            (self.j_sigma_zero, "j_sigma_zero"),
            (self.matched_forward, "matched_forward"),
            (self.matched_backward, "matched_backward"),
            (self.fully_degenerate, "fully_degenerate"),
            (self.dark_plus, "dark_plus"),
            (self.dark_minus, "dark_minus"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect()
    }
}

pub fn classify_condition(p: &TwoAtomParams) -> ConditionReport {
    let cp = collective_params(p);
    let tol = CONDITION_TOL * p.gamma;
    ConditionReport {
        j_sigma_zero: cp.j_sigma.abs() < tol,
        matched_forward: phase_distance(p.phi, p.theta) < CONDITION_TOL,
        matched_backward: phase_distance(p.phi, -p.theta) < CONDITION_TOL,
        fully_degenerate: (cp.lambda_plus - cp.lambda_minus).norm() < tol,
        dark_plus: cp.decay_plus() < tol,
        dark_minus: cp.decay_minus() < tol,
    }
}
