//! The real-space solver and the closed form checked against an independent
//! Green's-function calculation: integrate out the waveguides, solve the
//! small emitter system, then read the outgoing fields off the sources.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use giantqed::model::{
    CouplingPoint, DirectCoupling, EmitterSpec, FrequencyUnits, PhaseMode, WaveguideSpec,
};
use giantqed::{
    amplitudes_full, solve, two_atom_to_system, Direction, ScatteringProblem, SolveResult,
    SolverError, SystemSpec, TwoAtomParams,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Outgoing amplitude per (waveguide, direction), from the effective
/// non-Hermitian emitter Hamiltonian.
fn green_oracle(problem: &ScatteringProblem) -> Vec<(usize, Direction, Complex64)> {
    let s = &problem.system;
    let n = s.emitters.len();
    let energy_abs = match s.frequency_units {
        FrequencyUnits::Absolute => problem.photon_energy,
        FrequencyUnits::Detuning => s.reference_frequency + problem.photon_energy,
    };
    let phase_energy = match s.phase_mode {
        PhaseMode::FixedPhase => s.reference_frequency,
        PhaseMode::Dispersive => energy_abs,
    };
    let wg = |id: usize| s.waveguides.iter().find(|w| w.id == id).unwrap();
    let k = |id: usize| phase_energy / wg(id).group_velocity;
    let sign = match problem.input_direction {
        Direction::Rightward => 1.0,
        Direction::Leftward => -1.0,
    };

    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let mut src = DVector::<Complex64>::zeros(n);
    for e in &s.emitters {
        m[(e.id, e.id)] += problem.photon_energy - e.frequency + I * e.dissipation / 2.0;
    }
    for d in &s.direct {
        m[(d.emitter_a, d.emitter_b)] -= d.strength;
        m[(d.emitter_b, d.emitter_a)] -= d.strength;
    }
    for a in &s.couplings {
        for b in s.couplings.iter().filter(|b| b.waveguide_id == a.waveguide_id) {
            let kw = k(a.waveguide_id);
            let v = wg(a.waveguide_id).group_velocity;
            let g = -I / v * a.strength * b.strength * (I * kw * (a.position - b.position).abs()).exp();
            m[(a.emitter_id, b.emitter_id)] -= g;
        }
        if a.waveguide_id == problem.input_waveguide {
            src[a.emitter_id] += a.strength * (I * sign * k(a.waveguide_id) * a.position).exp();
        }
    }
    let c = m.lu().solve(&src).expect("oracle matrix singular");

    let mut out = Vec::new();
    for w in &s.waveguides {
        for dir in [Direction::Rightward, Direction::Leftward] {
            let dsign = if dir == Direction::Rightward { -1.0 } else { 1.0 };
            let mut amp = if w.id == problem.input_waveguide && dir == problem.input_direction {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            for l in s.couplings.iter().filter(|l| l.waveguide_id == w.id) {
                amp += -I / w.group_velocity
                    * l.strength
                    * (I * dsign * k(w.id) * l.position).exp()
                    * c[l.emitter_id];
            }
            out.push((w.id, dir, amp));
        }
    }
    out
}

fn max_port_error(result: &SolveResult, oracle: &[(usize, Direction, Complex64)]) -> f64 {
    oracle
        .iter()
        .map(|&(w, d, a)| (result.amplitude(w, d) - a).norm())
        .fold(0.0, f64::max)
}

prop_compose! {
    fn random_system()(
        m in 1usize..=3,
        n in 1usize..=4,
        seed_legs in prop::collection::vec((0usize..3, -8i32..=8, 0.3f64..1.5), 12),
        legs_per in prop::collection::vec(1usize..=3, 4),
        freqs in prop::collection::vec(-2.0f64..2.0, 4),
        kappas in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..0.5], 4),
        velocities in prop::collection::vec(0.5f64..2.0, 3),
        direct in prop::collection::vec(-1.0f64..1.0, 6),
        jitter in prop::collection::vec(-0.1f64..0.1, 12),
        snap in any::<bool>(),
    ) -> SystemSpec {
        let mut couplings = Vec::new();
        let mut slot = 0;
        for e in 0..n {
            for _ in 0..legs_per[e] {
                let (w, pos, v) = seed_legs[slot];
                // snapped positions make legs coincide, exercising junction merging
                let x = 0.25 * pos as f64 + if snap { 0.0 } else { jitter[slot] };
                couplings.push(CouplingPoint { emitter_id: e, waveguide_id: w % m, position: x, strength: v });
                slot += 1;
            }
        }
        let mut pairs = Vec::new();
        let mut idx = 0;
        for a in 0..n {
            for b in a + 1..n {
                pairs.push(DirectCoupling { emitter_a: a, emitter_b: b, strength: direct[idx] });
                idx += 1;
            }
        }
        SystemSpec {
            waveguides: (0..m).map(|id| WaveguideSpec { id, group_velocity: velocities[id] }).collect(),
            emitters: (0..n).map(|id| EmitterSpec { id, frequency: freqs[id], dissipation: kappas[id] }).collect(),
            couplings,
            direct: pairs,
            phase_mode: PhaseMode::FixedPhase,
            frequency_units: FrequencyUnits::Detuning,
            reference_frequency: 2.0 * PI,
        }
    }
}

fn problem_on(system: SystemSpec, input: usize, dir: Direction, energy: f64) -> ScatteringProblem {
    ScatteringProblem {
        input_waveguide: input % system.waveguides.len(),
        system,
        input_direction: dir,
        photon_energy: energy,
    }
}

fn direction() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::Rightward), Just(Direction::Leftward)]
}

/// Skips only the measure-zero case of an exactly decoupled resonance.
fn solved(p: &ScatteringProblem) -> Option<SolveResult> {
    match solve(p) {
        Ok(r) => Some(r),
        Err(SolverError::SolverDegenerate { .. }) => None,
        Err(e) => panic!("unexpected solver error: {e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn solver_matches_green_oracle(
        system in random_system(),
        input in 0usize..3,
        dir in direction(),
        energy in -5.0f64..5.0,
    ) {
        let p = problem_on(system, input, dir, energy);
        if let Some(r) = solved(&p) {
            let err = max_port_error(&r, &green_oracle(&p));
            prop_assert!(err < 1e-9, "port error {err}");
        }
    }

    #[test]
    fn lossless_flux_is_conserved(
        mut system in random_system(),
        input in 0usize..3,
        dir in direction(),
        energy in -5.0f64..5.0,
    ) {
        system.emitters.iter_mut().for_each(|e| e.dissipation = 0.0);
        let p = problem_on(system, input, dir, energy);
        if let Some(r) = solved(&p) {
            prop_assert!((r.total_probability() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dissipation_only_removes_flux(
        system in random_system(),
        input in 0usize..3,
        energy in -5.0f64..5.0,
    ) {
        let p = problem_on(system, input, Direction::Rightward, energy);
        if let Some(r) = solved(&p) {
            prop_assert!(r.total_probability() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn mirror_parity(
        system in random_system(),
        input in 0usize..3,
        dir in direction(),
        energy in -5.0f64..5.0,
    ) {
        let mut mirrored = system.clone();
        mirrored.couplings.iter_mut().for_each(|c| c.position = -c.position);
        let p = problem_on(system, input, dir, energy);
        let q = problem_on(mirrored, input, dir.reversed(), energy);
        if let (Some(a), Some(b)) = (solved(&p), solved(&q)) {
            for w in 0..p.system.waveguides.len() {
                for d in [Direction::Rightward, Direction::Leftward] {
                    prop_assert!((a.amplitude(w, d) - b.amplitude(w, d.reversed())).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn emitter_relabeling_is_invisible(
        system in random_system(),
        input in 0usize..3,
        energy in -5.0f64..5.0,
        rot in 0usize..4,
    ) {
        let n = system.emitters.len();
        let relabel = |id: usize| (id + rot) % n;
        let mut permuted = system.clone();
        permuted.emitters.iter_mut().for_each(|e| e.id = relabel(e.id));
        permuted.emitters.reverse();
        permuted.couplings.iter_mut().for_each(|c| c.emitter_id = relabel(c.emitter_id));
        permuted.direct.iter_mut().for_each(|d| {
            d.emitter_a = relabel(d.emitter_a);
            d.emitter_b = relabel(d.emitter_b);
        });
        let p = problem_on(system, input, Direction::Rightward, energy);
        let q = problem_on(permuted, input, Direction::Rightward, energy);
        if let (Some(a), Some(b)) = (solved(&p), solved(&q)) {
            for w in 0..p.system.waveguides.len() {
                for d in [Direction::Rightward, Direction::Leftward] {
                    prop_assert!((a.amplitude(w, d) - b.amplitude(w, d)).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn closed_form_matches_oracle(
        theta in 0.0f64..2.0 * PI,
        phi in 0.0f64..2.0 * PI,
        gamma in 0.2f64..3.0,
        j in -3.0f64..3.0,
        kappa in prop_oneof![Just(0.0), 0.0f64..1.0],
        delta in -10.0f64..10.0,
    ) {
        let params = TwoAtomParams::new(theta, phi, gamma, j, kappa, delta);
        let mut system = two_atom_to_system(&params, 1e6).unwrap();
        system.phase_mode = PhaseMode::FixedPhase;
        let p = ScatteringProblem::from_left(system, delta);
        let a = amplitudes_full(&params).unwrap();
        let o = green_oracle(&p);
        let pick = |w: usize, d: Direction| o.iter().find(|x| x.0 == w && x.1 == d).unwrap().2;
        prop_assert!((a.t_r1 - pick(0, Direction::Rightward)).norm() < 1e-9);
        prop_assert!((a.r_l1 - pick(0, Direction::Leftward)).norm() < 1e-9);
        prop_assert!((a.t_r2 - pick(1, Direction::Rightward)).norm() < 1e-9);
        prop_assert!((a.r_l2 - pick(1, Direction::Leftward)).norm() < 1e-9);
    }

    #[test]
    fn input_on_second_waveguide_swaps_phases(
        theta in 0.0f64..2.0 * PI,
        phi in 0.0f64..2.0 * PI,
        j in -3.0f64..3.0,
        kappa in prop_oneof![Just(0.0), 0.0f64..1.0],
        delta in -10.0f64..10.0,
    ) {
        let params = TwoAtomParams::new(theta, phi, 1.0, j, kappa, delta);
        let mut system = two_atom_to_system(&params, 1e6).unwrap();
        system.phase_mode = PhaseMode::FixedPhase;
        let p = ScatteringProblem {
            system,
            input_waveguide: 1,
            input_direction: Direction::Rightward,
            photon_energy: delta,
        };
        let from_w2 = solve(&p).unwrap().two_waveguide_amplitudes();
        let swapped = amplitudes_full(&TwoAtomParams::new(phi, theta, 1.0, j, kappa, delta)).unwrap();
        prop_assert!(from_w2.max_abs_diff(&swapped) < 1e-9);
    }
}

#[test]
fn oracle_reproduces_single_emitter() {
    let system = SystemSpec {
        waveguides: vec![WaveguideSpec { id: 0, group_velocity: 1.0 }],
        emitters: vec![EmitterSpec { id: 0, frequency: 0.0, dissipation: 0.0 }],
        couplings: vec![CouplingPoint { emitter_id: 0, waveguide_id: 0, position: 0.0, strength: 1.0 }],
        direct: vec![],
        phase_mode: PhaseMode::FixedPhase,
        frequency_units: FrequencyUnits::Detuning,
        reference_frequency: 1.0,
    };
    for delta in [-3.0, -0.5, 0.0, 0.7, 4.0] {
        let o = green_oracle(&ScatteringProblem::from_left(system.clone(), delta));
        let t = o.iter().find(|x| x.0 == 0 && x.1 == Direction::Rightward).unwrap().2;
        let want = Complex64::new(delta, 0.0) / (delta + I);
        assert!((t - want).norm() < 1e-15);
    }
}
