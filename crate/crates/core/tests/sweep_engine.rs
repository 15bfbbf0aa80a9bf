use std::f64::consts::PI;

use proptest::prelude::*;

use giantqed::sweep::{
    figure_preset, run_sweep, Axis, AxisParam, Engine, Output, Preset, SweepBase, SweepSpec,
};
use giantqed::{amplitudes_full, TwoAtomParams};

fn two_axis_spec(engine: Engine) -> SweepSpec {
    SweepSpec {
        engine,
        base: SweepBase::TwoAtom {
            params: TwoAtomParams::new(0.3, 1.1, 1.0, 0.4, 0.05, 0.0),
            carrier: 1e9,
        },
        axes: vec![
            Axis::new(AxisParam::Theta, 0.1, 2.0, 7),
            Axis::new(AxisParam::Detuning, -3.0, 3.0, 5),
        ],
        outputs: vec![Output::T, Output::R, Output::TF, Output::TB, Output::Loss, Output::Amplitudes],
        enforce_degeneracy: false,
    }
}

#[test]
fn rows_follow_the_grid_in_order() {
    let spec = two_axis_spec(Engine::ClosedForm);
    let table = run_sweep(&spec).unwrap();
    assert_eq!(table.records.len(), 35);
    for (row, rec) in table.records.iter().enumerate() {
        let theta = spec.axes[0].value(row / 5);
        let delta = spec.axes[1].value(row % 5);
        assert_eq!(rec.axis_values, vec![theta, delta]);
        let p = TwoAtomParams::new(theta, 1.1, 1.0, 0.4, 0.05, delta);
        let want = amplitudes_full(&p).unwrap().probabilities();
        assert_eq!(&rec.values[..5], &[want.t, want.r, want.t_f, want.t_b, want.loss]);
    }
}

#[test]
fn repeated_runs_are_identical() {
    let spec = figure_preset(Preset::Fig5b);
    assert_eq!(run_sweep(&spec).unwrap(), run_sweep(&spec).unwrap());
}

#[test]
fn engines_share_schema_and_agree() {
    let a = run_sweep(&two_axis_spec(Engine::ClosedForm)).unwrap();
    let b = run_sweep(&two_axis_spec(Engine::RealSpace)).unwrap();
    assert_eq!(a.columns(), b.columns());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.axis_values, y.axis_values);
        for (u, v) in x.values.iter().zip(&y.values) {
            assert!((u - v).abs() < 1e-6, "{u} vs {v}");
        }
    }
}

#[test]
fn spec_json_round_trip() {
    for preset in Preset::ALL {
        let spec = figure_preset(preset);
        let text = serde_json::to_string(&spec).unwrap();
        let back: SweepSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec, "{}", preset.name());
    }
}

#[test]
fn hand_written_spec_parses() {
    let text = r#"{
        "engine": "ClosedForm",
        "base": {"TwoAtom": {"params": {"theta": 1.5707963267948966, "phi": 1.5707963267948966,
                                        "gamma": 1.0, "j": -2.0}}},
        "axes": [{"param": "kappa", "start": 0.0, "stop": 1.0, "count": 3}],
        "outputs": ["T", "T_f", "collective"]
    }"#;
    let spec: SweepSpec = serde_json::from_str(text).unwrap();
    assert!(!spec.enforce_degeneracy);
    let table = run_sweep(&spec).unwrap();
    let tf = table.column("T_f").unwrap();
    assert!((tf[1] - 16.0 / 20.25).abs() < 1e-12);
}

#[test]
fn fig2_corners_are_dark_not_errors() {
    let mut spec = figure_preset(Preset::Fig2);
    spec.axes = vec![
        Axis::new(AxisParam::Theta, 0.0, 2.0 * PI, 5),
        Axis::new(AxisParam::Phi, 0.0, 2.0 * PI, 5),
    ];
    let table = run_sweep(&spec).unwrap();
    assert_eq!(table.error_rows(), 0);
    for rec in &table.records {
        let sum: f64 = rec.values[..4].iter().sum();
        assert!((sum - 1.0).abs() < 1e-12, "{:?}", rec.axis_values);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degenerate_sweeps_cancel_exchange(theta in 0.0f64..2.0 * PI, phi in 0.0f64..2.0 * PI) {
        let spec = SweepSpec {
            engine: Engine::ClosedForm,
            base: SweepBase::TwoAtom { params: TwoAtomParams::new(theta, phi, 1.0, 5.0, 0.0, 0.0), carrier: 1e9 },
            axes: vec![Axis::new(AxisParam::Detuning, -1.0, 1.0, 3)],
            outputs: vec![Output::Collective],
            enforce_degeneracy: true,
        };
        let table = run_sweep(&spec).unwrap();
        let j1 = table.column("j1").unwrap();
        prop_assert!(table.column("j_sigma").unwrap().iter().all(|v| v.abs() < 1e-12));
        prop_assert!((j1[0] - theta.sin()).abs() < 1e-12);
    }

    #[test]
    fn probability_columns_conserve_flux(theta in 0.0f64..2.0 * PI, phi in 0.0f64..2.0 * PI, j in -3.0f64..3.0) {
        let spec = SweepSpec {
            engine: Engine::ClosedForm,
            base: SweepBase::TwoAtom { params: TwoAtomParams::new(theta, phi, 1.0, j, 0.0, 0.0), carrier: 1e9 },
            axes: vec![Axis::new(AxisParam::Detuning, -10.0, 10.0, 21)],
            outputs: Output::PROBABILITIES.to_vec(),
            enforce_degeneracy: false,
        };
        let table = run_sweep(&spec).unwrap();
        for rec in &table.records {
            let sum: f64 = rec.values[..4].iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }
    }
}
