//! Randomized invariant suite: conservation, eigen-vs-full agreement, the
//! matched/backward/dark identities, and solver-vs-closed-form agreement.
//!
//! Every invariant draws from its own ChaCha stream derived from the seed,
//! so a report depends only on `(samples, seed, corruption)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::closed_form::{amplitudes_eigen, amplitudes_full, amplitudes_matched, ClosedFormError};
use crate::model::{two_atom_to_system, ScatteringAmplitudes, TwoAtomParams};
use crate::realspace::{solve, ScatteringProblem};

pub const IDENTITY_TOL: f64 = 1e-12;
pub const SOLVER_TOL: f64 = 1e-6;
pub const SOLVER_CARRIER: f64 = 1e9;
pub const DETUNING_RANGE: f64 = 10.0;

/// Deliberate faults used to exercise the failure path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Corruption {
    /// Flips the sign of r_l1 in every closed-form result.
    FlipReflection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Invariant {
    Conservation,
    DissipativeLoss,
    EigenVsFull,
    MatchedIdentities,
    BackwardIdentities,
    ChannelDrop,
    DarkReduction,
    SolverVsClosedForm,
}

impl Invariant {
    pub const ALL: [Invariant; 8] = [
        Invariant::Conservation,
        Invariant::DissipativeLoss,
        Invariant::EigenVsFull,
        Invariant::MatchedIdentities,
        Invariant::BackwardIdentities,
        Invariant::ChannelDrop,
        Invariant::DarkReduction,
        Invariant::SolverVsClosedForm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Invariant::Conservation => "conservation",
            Invariant::DissipativeLoss => "dissipative_loss",
            Invariant::EigenVsFull => "eigen_vs_full",
            Invariant::MatchedIdentities => "matched_identities",
            Invariant::BackwardIdentities => "backward_identities",
            Invariant::ChannelDrop => "channel_drop",
            Invariant::DarkReduction => "dark_reduction",
            Invariant::SolverVsClosedForm => "solver_vs_closed_form",
        }
    }

    /// Largest acceptable error. For `DissipativeLoss` the error is
    /// `T+R+T_f+T_b − 1`, which must stay strictly negative.
    pub fn tolerance(&self) -> f64 {
        match self {
            Invariant::DissipativeLoss => 0.0,
            Invariant::SolverVsClosedForm => SOLVER_TOL,
            _ => IDENTITY_TOL,
        }
    }

    fn accepts(&self, err: f64) -> bool {
        match self {
            Invariant::DissipativeLoss => err < 0.0,
            _ => err <= self.tolerance(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantResult {
    pub invariant: Invariant,
    pub samples: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub worst: Option<TwoAtomParams>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub samples: usize,
    pub seed: u64,
    pub results: Vec<InvariantResult>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InvariantResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

fn describe(p: &TwoAtomParams) -> String {
    format!(
        "theta={:.17e} phi={:.17e} gamma={:.17e} j={:.17e} kappa={:.17e} delta={:.17e}",
        p.theta, p.phi, p.gamma, p.j, p.kappa, p.detuning
    )
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verify: {} samples per invariant, seed {}", self.samples, self.seed)?;
        writeln!(
            f,
            "{:<24} {:>8} {:>12} {:>10}  result",
            "invariant", "samples", "max_error", "tolerance"
        )?;
        for r in &self.results {
            writeln!(
                f,
                "{:<24} {:>8} {:>12.3e} {:>10.0e}  {}",
                r.invariant.name(),
                r.samples,
                r.max_error,
                r.tolerance,
                if r.passed { "PASS" } else { "FAIL" }
            )?;
        }
        for r in self.failures() {
            write!(f, "FAILED {}", r.invariant.name())?;
            match &r.worst {
                Some(p) => writeln!(f, " worst case: {}", describe(p))?,
                None => writeln!(f)?,
            }
        }
        Ok(())
    }
}

struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    fn phase(&mut self) -> f64 {
        self.rng.gen_range(0.0..2.0 * PI)
    }

    fn detuning(&mut self) -> f64 {
        self.rng.gen_range(-DETUNING_RANGE..=DETUNING_RANGE)
    }

    fn gamma(&mut self) -> f64 {
        self.rng.gen_range(0.5..2.0)
    }

    fn coupling(&mut self) -> f64 {
        self.rng.gen_range(-3.0..3.0)
    }

    fn generic(&mut self, kappa: f64) -> TwoAtomParams {
        TwoAtomParams::new(
            self.phase(),
            self.phase(),
            self.gamma(),
            self.coupling(),
            kappa,
            self.detuning(),
        )
    }
}

struct Auditor {
    corruption: Option<Corruption>,
}

impl Auditor {
    fn full(&self, p: &TwoAtomParams) -> Result<ScatteringAmplitudes, ClosedFormError> {
        let mut a = amplitudes_full(p)?;
        if self.corruption == Some(Corruption::FlipReflection) {
            a.r_l1 = -a.r_l1;
        }
        Ok(a)
    }

    /// Draws one parameter set and returns its error (NaN maps to ∞).
    fn sample(&self, inv: Invariant, s: &mut Sampler) -> (TwoAtomParams, f64) {
        let gap = |a: Complex64, b: Complex64| (a - b).norm();
        let one = Complex64::new(1.0, 0.0);
        let (p, err) = match inv {
            Invariant::Conservation => {
                let p = s.generic(0.0);
                let e = self.full(&p).map(|a| (a.probabilities().port_sum() - 1.0).abs());
                (p, e)
            }
            Invariant::DissipativeLoss => {
                let kappa = s.rng.gen_range(0.01..=1.0);
                let p = s.generic(kappa);
                let e = self.full(&p).map(|a| a.probabilities().port_sum() - 1.0);
                (p, e)
            }
            Invariant::EigenVsFull => {
                let p = s.generic(0.0);
                let e = self
                    .full(&p)
                    .and_then(|f| amplitudes_eigen(&p).map(|g| f.max_abs_diff(&g)));
                (p, e)
            }
            Invariant::MatchedIdentities => {
                let mut theta = s.phase();
                while (theta - PI).abs() < 1e-6 {
                    theta = s.phase();
                }
                let gamma = s.gamma();
                let p = TwoAtomParams::new(
                    theta,
                    theta,
                    gamma,
                    -2.0 * gamma * theta.sin(),
                    0.0,
                    s.detuning(),
                );
                let e = self.full(&p).and_then(|a| {
                    let m = amplitudes_matched(&p)?;
                    Ok(gap(a.r_l1, a.r_l2)
                        .max(gap(a.t_r1, one + a.t_r2))
                        .max(a.max_abs_diff(&m)))
                });
                (p, e)
            }
            Invariant::BackwardIdentities => {
                let p = TwoAtomParams::new(FRAC_PI_2, 3.0 * FRAC_PI_2, s.gamma(), 0.0, 0.0, s.detuning());
                let e = self
                    .full(&p)
                    .map(|a| gap(a.r_l1, a.t_r2).max(gap(a.t_r1, one + a.r_l2)));
                (p, e)
            }
            Invariant::ChannelDrop => {
                let gamma = s.gamma();
                let p = TwoAtomParams::new(FRAC_PI_2, FRAC_PI_2, gamma, -2.0 * gamma, 0.0, s.detuning());
                let e = self.full(&p).map(|a| a.r_l1.norm().max(a.r_l2.norm()));
                (p, e)
            }
            Invariant::DarkReduction => {
                let p = TwoAtomParams::new(PI, PI, s.gamma(), 0.0, 0.0, s.detuning());
                let e = self
                    .full(&p)
                    .map(|a| gap(a.r_l1, a.t_r2).max(gap(a.t_r2, a.r_l2)));
                (p, e)
            }
            Invariant::SolverVsClosedForm => {
                let kappa = s.rng.gen_range(0.0..=1.0);
                let p = s.generic(kappa);
                let e = self.full(&p).and_then(|a| {
                    let system = two_atom_to_system(&p, SOLVER_CARRIER)?;
                    Ok(solve(&ScatteringProblem::from_left(system, p.detuning))
                        .map(|r| r.two_waveguide_amplitudes().max_abs_diff(&a))
                        .unwrap_or(f64::INFINITY))
                });
                (p, e)
            }
        };
        let err = match err {
            Ok(e) if !e.is_nan() => e,
            _ => f64::INFINITY,
        };
        (p, err)
    }
}

pub fn run_invariant(
    inv: Invariant,
    samples: usize,
    seed: u64,
    corruption: Option<Corruption>,
) -> InvariantResult {
    let auditor = Auditor { corruption };
    let mut sampler = Sampler::new(seed, inv as u64);
    let mut max_error = f64::NEG_INFINITY;
    let mut worst = None;
    for _ in 0..samples {
        let (p, err) = auditor.sample(inv, &mut sampler);
        if err > max_error {
            max_error = err;
            worst = Some(p);
        }
    }
    InvariantResult {
        invariant: inv,
        samples,
        max_error,
        tolerance: inv.tolerance(),
        worst,
        passed: samples > 0 && inv.accepts(max_error),
    }
}

/// Runs every invariant with `samples` draws each.
pub fn run_audit(samples: usize, seed: u64, corruption: Option<Corruption>) -> AuditReport {
    use rayon::prelude::*;
    let results = Invariant::ALL
        .par_iter()
        .map(|&inv| run_invariant(inv, samples, seed, corruption))
        .collect();
    AuditReport {
        samples,
        seed,
        results,
    }
}
