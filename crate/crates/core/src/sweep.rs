//! Parameter grids over the closed-form or real-space engines, the figure
//! presets, and CSV output.
//!
//! Rows are evaluated independently (in parallel) and emitted row-major over
//! the axes in declared order. A point that fails to evaluate produces a row
//! with NaN outputs and an error status instead of aborting the sweep.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closed_form::{amplitudes_full, collective_params, degeneracy_coupling};
use crate::model::{
    two_atom_to_system, ScatteringAmplitudes, ScatteringProbabilities, SystemSpec, TwoAtomParams,
};
use crate::realspace::{fig5_preset, solve, ScatteringProblem};

/// Default number of points per axis.
pub const DEFAULT_POINTS: usize = 201;
/// Default detuning span ±10γ for spectra.
pub const DEFAULT_SPAN: f64 = 10.0;
/// Carrier used when the real-space engine runs on a two-atom base; large
/// enough that phase dispersion over |Δ| ≤ 10γ is below 1e-7.
pub const REALSPACE_TWO_ATOM_CARRIER: f64 = 1.0e9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    ClosedForm,
    RealSpace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SweepBase {
    TwoAtom {
        params: TwoAtomParams,
        /// Carrier for the real-space engine; ignored by the closed form.
        #[serde(default = "default_carrier")]
        carrier: f64,
    },
    System {
        system: SystemSpec,
        /// Photon energy when detuning is not an axis.
        #[serde(default)]
        detuning: f64,
    },
}

fn default_carrier() -> f64 {
    REALSPACE_TWO_ATOM_CARRIER
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisParam {
    Detuning,
    Theta,
    Phi,
    Kappa,
    /// Frequency offset of emitter 1 (Q2 in the three-qubit layout).
    Delta2,
    /// Frequency offset of emitter 2 (Q3 in the three-qubit layout).
    Delta3,
}

impl AxisParam {
    pub fn column(&self) -> &'static str {
        match self {
            AxisParam::Detuning => "delta",
            AxisParam::Theta => "theta",
            AxisParam::Phi => "phi",
            AxisParam::Kappa => "kappa",
            AxisParam::Delta2 => "delta2",
            AxisParam::Delta3 => "delta3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: AxisParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(param: AxisParam, start: f64, stop: f64, count: usize) -> Self {
        Self {
            param,
            start,
            stop,
            count,
        }
    }

    /// Grid value `i`; the endpoints are hit exactly.
    pub fn value(&self, i: usize) -> f64 {
        self.start + (self.stop - self.start) * (i as f64 / (self.count - 1) as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Output {
    T,
    R,
    #[serde(rename = "T_f")]
    TF,
    #[serde(rename = "T_b")]
    TB,
    #[serde(rename = "loss")]
    Loss,
    #[serde(rename = "amplitudes")]
    Amplitudes,
    #[serde(rename = "collective")]
    Collective,
}

impl Output {
    pub const PROBABILITIES: [Output; 5] = [Output::T, Output::R, Output::TF, Output::TB, Output::Loss];

    fn columns(&self) -> &'static [&'static str] {
        match self {
            Output::T => &["T"],
            Output::R => &["R"],
            Output::TF => &["T_f"],
            Output::TB => &["T_b"],
            Output::Loss => &["loss"],
            Output::Amplitudes => &[
                "t_r1_re", "t_r1_im", "r_l1_re", "r_l1_im", "t_r2_re", "t_r2_im", "r_l2_re",
                "r_l2_im",
            ],
            Output::Collective => &[
                "lambda_plus_re",
                "lambda_plus_im",
                "lambda_minus_re",
                "lambda_minus_im",
                "gamma1_plus",
                "gamma1_minus",
                "gamma2_plus",
                "gamma2_minus",
                "j1",
                "j2",
                "j_sigma",
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub engine: Engine,
    pub base: SweepBase,
    pub axes: Vec<Axis>,
    pub outputs: Vec<Output>,
    /// Recompute J = −γ(sin θ + sin φ) at every point so that J_Σ = 0.
    #[serde(default)]
    pub enforce_degeneracy: bool,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RowStatus {
    Ok,
    Error(String),
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Ok => write!(f, "ok"),
            // keep the CSV single-field
            RowStatus::Error(msg) => write!(f, "error: {}", msg.replace([',', '\n', '"'], ";")),
        }
    }
}

/// One grid point: the axis values followed by the requested output values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub axis_values: Vec<f64>,
    pub values: Vec<f64>,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub axis_columns: Vec<String>,
    pub value_columns: Vec<String>,
    pub records: Vec<SweepRecord>,
}

impl SweepTable {
    pub fn columns(&self) -> Vec<String> {
        self.axis_columns
            .iter()
            .chain(self.value_columns.iter())
            .cloned()
            .chain(std::iter::once("status".to_string()))
            .collect()
    }

    /// All values of a named axis or output column, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        if let Some(i) = self.axis_columns.iter().position(|c| c == name) {
            return Some(self.records.iter().map(|r| r.axis_values[i]).collect());
        }
        let i = self.value_columns.iter().position(|c| c == name)?;
        Some(self.records.iter().map(|r| r.values[i]).collect())
    }

    pub fn error_rows(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.status != RowStatus::Ok)
            .count()
    }

    /// Writes the table as CSV: a header row, 17 significant digits, LF
    /// line endings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.columns().join(","))?;
        for r in &self.records {
            let mut fields: Vec<String> = r
                .axis_values
                .iter()
                .chain(r.values.iter())
                .map(|v| format_number(*v))
                .collect();
            fields.push(r.status.to_string());
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn invalid(msg: impl Into<String>) -> SweepError {
    SweepError::InvalidSpec(msg.into())
}

fn check_spec(spec: &SweepSpec) -> Result<(), SweepError> {
    if spec.axes.is_empty() || spec.axes.len() > 2 {
        return Err(invalid("a sweep needs one or two axes"));
    }
    for (i, a) in spec.axes.iter().enumerate() {
        if a.count < 2 {
            return Err(invalid(format!("axis {} needs at least 2 points", a.param.column())));
        }
        if !(a.start.is_finite() && a.stop.is_finite()) {
            return Err(invalid(format!("axis {} bounds must be finite", a.param.column())));
        }
        if spec.axes[..i].iter().any(|b| b.param == a.param) {
            return Err(invalid(format!("axis {} appears twice", a.param.column())));
        }
    }
    if spec.outputs.is_empty() {
        return Err(invalid("no outputs requested"));
    }
    for (i, o) in spec.outputs.iter().enumerate() {
        if spec.outputs[..i].contains(o) {
            return Err(invalid(format!("output {} requested twice", o.columns()[0])));
        }
    }
    match &spec.base {
        SweepBase::TwoAtom { params, carrier } => {
            params.validate().map_err(|e| invalid(e.to_string()))?;
            if spec.engine == Engine::RealSpace && !(*carrier > 0.0) {
                return Err(invalid("carrier must be positive"));
            }
            if let Some(a) = spec
                .axes
                .iter()
                .find(|a| matches!(a.param, AxisParam::Delta2 | AxisParam::Delta3))
            {
                return Err(invalid(format!(
                    "axis {} needs a system base",
                    a.param.column()
                )));
            }
        }
        SweepBase::System { system, .. } => {
            if spec.engine == Engine::ClosedForm {
                return Err(invalid("the closed-form engine needs a two-atom base"));
            }
            if spec.enforce_degeneracy {
                return Err(invalid("enforce_degeneracy needs a two-atom base"));
            }
            if spec.outputs.contains(&Output::Collective) {
                return Err(invalid("collective parameters need a two-atom base"));
            }
            for a in &spec.axes {
                let needed = match a.param {
                    AxisParam::Theta | AxisParam::Phi => {
                        return Err(invalid(format!(
                            "axis {} needs a two-atom base",
                            a.param.column()
                        )))
                    }
                    AxisParam::Delta2 => 2,
                    AxisParam::Delta3 => 3,
                    _ => 0,
                };
                if system.emitters.len() < needed {
                    return Err(invalid(format!(
                        "axis {} needs at least {needed} emitters",
                        a.param.column()
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Everything an engine returns for one grid point.
struct PointResult {
    probabilities: ScatteringProbabilities,
    amplitudes: ScatteringAmplitudes,
    params: Option<TwoAtomParams>,
}

fn evaluate(spec: &SweepSpec, point: &[(AxisParam, f64)]) -> Result<PointResult, String> {
    match &spec.base {
        SweepBase::TwoAtom { params, carrier } => {
            let mut p = *params;
            for &(param, v) in point {
                match param {
                    AxisParam::Detuning => p.detuning = v,
                    AxisParam::Theta => p.theta = v,
                    AxisParam::Phi => p.phi = v,
                    AxisParam::Kappa => p.kappa = v,
                    AxisParam::Delta2 | AxisParam::Delta3 => unreachable!("rejected by check_spec"),
                }
            }
            if spec.enforce_degeneracy {
                p.j = degeneracy_coupling(p.theta, p.phi, p.gamma);
            }
            let amplitudes = match spec.engine {
                Engine::ClosedForm => amplitudes_full(&p).map_err(|e| e.to_string())?,
                Engine::RealSpace => {
                    let system = two_atom_to_system(&p, *carrier).map_err(|e| e.to_string())?;
                    solve(&ScatteringProblem::from_left(system, p.detuning))
                        .map_err(|e| e.to_string())?
                        .two_waveguide_amplitudes()
                }
            };
            Ok(PointResult {
                probabilities: amplitudes.probabilities(),
                amplitudes,
                params: Some(p),
            })
        }
        SweepBase::System { system, detuning } => {
            let mut system = system.clone();
            let mut energy = *detuning;
            for &(param, v) in point {
                match param {
                    AxisParam::Detuning => energy = v,
                    AxisParam::Kappa => system.emitters.iter_mut().for_each(|e| e.dissipation = v),
                    AxisParam::Delta2 => system.emitters[1].frequency = v,
                    AxisParam::Delta3 => system.emitters[2].frequency = v,
                    AxisParam::Theta | AxisParam::Phi => unreachable!("rejected by check_spec"),
                }
            }
            let result = solve(&ScatteringProblem::from_left(system, energy)).map_err(|e| e.to_string())?;
            Ok(PointResult {
                probabilities: result.port_probabilities(),
                amplitudes: result.two_waveguide_amplitudes(),
                params: None,
            })
        }
    }
}

fn output_values(out: Output, r: &PointResult, dest: &mut Vec<f64>) {
    let p = &r.probabilities;
    match out {
        Output::T => dest.push(p.t),
        Output::R => dest.push(p.r),
        Output::TF => dest.push(p.t_f),
        Output::TB => dest.push(p.t_b),
        Output::Loss => dest.push(p.loss),
        Output::Amplitudes => {
            for a in r.amplitudes.as_array() {
                dest.extend([a.re, a.im]);
            }
        }
        Output::Collective => {
            let c = collective_params(r.params.as_ref().expect("two-atom base"));
            dest.extend([
                c.lambda_plus.re,
                c.lambda_plus.im,
                c.lambda_minus.re,
                c.lambda_minus.im,
                c.gamma1_plus,
                c.gamma1_minus,
                c.gamma2_plus,
                c.gamma2_minus,
                c.j1,
                c.j2,
                c.j_sigma,
            ]);
        }
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable, SweepError> {
    check_spec(spec)?;
    let value_columns: Vec<String> = spec
        .outputs
        .iter()
        .flat_map(|o| o.columns().iter().map(|c| c.to_string()))
        .collect();
    let rows: usize = spec.axes.iter().map(|a| a.count).product();

    let records = (0..rows)
        .into_par_iter()
        .map(|row| {
            // row-major: the first axis varies slowest
            let mut rest = row;
            let mut point = vec![(AxisParam::Detuning, 0.0); spec.axes.len()];
            for (k, axis) in spec.axes.iter().enumerate().rev() {
                point[k] = (axis.param, axis.value(rest % axis.count));
                rest /= axis.count;
            }
            let axis_values = point.iter().map(|&(_, v)| v).collect();
            match evaluate(spec, &point) {
                Ok(result) => {
                    let mut values = Vec::with_capacity(value_columns.len());
                    for &o in &spec.outputs {
                        output_values(o, &result, &mut values);
                    }
                    SweepRecord {
                        axis_values,
                        values,
                        status: RowStatus::Ok,
                    }
                }
                Err(msg) => SweepRecord {
                    axis_values,
                    values: vec![f64::NAN; value_columns.len()],
                    status: RowStatus::Error(msg),
                },
            }
        })
        .collect();

    Ok(SweepTable {
        axis_columns: spec.axes.iter().map(|a| a.param.column().to_string()).collect(),
        value_columns,
        records,
    })
}

/// Named parameter sets reproducing each published figure panel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig2,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig4d,
    Fig4e,
    Fig4f,
    Fig5b,
    Fig5c,
    Fig5d,
}

impl Preset {
    pub const ALL: [Preset; 12] = [
        Preset::Fig2,
        Preset::Fig3a,
        Preset::Fig3b,
        Preset::Fig4a,
        Preset::Fig4b,
        Preset::Fig4c,
        Preset::Fig4d,
        Preset::Fig4e,
        Preset::Fig4f,
        Preset::Fig5b,
        Preset::Fig5c,
        Preset::Fig5d,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
            Preset::Fig4c => "fig4c",
            Preset::Fig4d => "fig4d",
            Preset::Fig4e => "fig4e",
            Preset::Fig4f => "fig4f",
            Preset::Fig5b => "fig5b",
            Preset::Fig5c => "fig5c",
            Preset::Fig5d => "fig5d",
        }
    }
}

impl FromStr for Preset {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| SweepError::UnknownPreset(s.to_string()))
    }
}

fn spectrum(theta: f64, phi: f64) -> SweepSpec {
    SweepSpec {
        engine: Engine::ClosedForm,
        base: SweepBase::TwoAtom {
            params: TwoAtomParams::new(theta, phi, 1.0, degeneracy_coupling(theta, phi, 1.0), 0.0, 0.0),
            carrier: REALSPACE_TWO_ATOM_CARRIER,
        },
        axes: vec![Axis::new(AxisParam::Detuning, -DEFAULT_SPAN, DEFAULT_SPAN, DEFAULT_POINTS)],
        outputs: Output::PROBABILITIES.to_vec(),
        enforce_degeneracy: true,
    }
}

fn three_qubit(system: SystemSpec, axis: Axis) -> SweepSpec {
    SweepSpec {
        engine: Engine::RealSpace,
        base: SweepBase::System { system, detuning: 0.0 },
        axes: vec![axis],
        outputs: Output::PROBABILITIES.to_vec(),
        enforce_degeneracy: false,
    }
}

/// Three-qubit dissipation used by the fig5 presets, in units of γ.
pub const FIG5_KAPPA: f64 = 0.1;
/// Detuning that parks the idle tunable qubit, in units of γ.
pub const FIG5_PARKING: f64 = 50.0;

pub fn figure_preset(preset: Preset) -> SweepSpec {
    let detuning_axis = Axis::new(AxisParam::Detuning, -DEFAULT_SPAN, DEFAULT_SPAN, DEFAULT_POINTS);
    match preset {
        Preset::Fig2 => {
            let mut spec = spectrum(0.0, 0.0);
            spec.axes = vec![
                Axis::new(AxisParam::Theta, 0.0, 2.0 * PI, DEFAULT_POINTS),
                Axis::new(AxisParam::Phi, 0.0, 2.0 * PI, DEFAULT_POINTS),
            ];
            spec
        }
        Preset::Fig3a => spectrum(PI, PI),
        Preset::Fig3b => spectrum(PI, 2.0 * PI),
        Preset::Fig4a => spectrum(PI / 8.0, PI / 8.0),
        Preset::Fig4b => spectrum(PI / 4.0, PI / 4.0),
        Preset::Fig4c => spectrum(PI / 2.0, PI / 2.0),
        Preset::Fig4d => spectrum(PI / 8.0, 2.0 * PI - PI / 8.0),
        Preset::Fig4e => spectrum(PI / 4.0, 2.0 * PI - PI / 4.0),
        Preset::Fig4f => spectrum(PI / 2.0, 2.0 * PI - PI / 2.0),
        Preset::Fig5b => three_qubit(fig5_preset(FIG5_PARKING, 0.0, FIG5_KAPPA, 1.0), detuning_axis),
        Preset::Fig5c => three_qubit(fig5_preset(0.0, FIG5_PARKING, FIG5_KAPPA, 1.0), detuning_axis),
        Preset::Fig5d => three_qubit(
            fig5_preset(FIG5_PARKING, 0.0, FIG5_KAPPA, 1.0),
            Axis::new(AxisParam::Kappa, 0.0, 1.0, DEFAULT_POINTS),
        ),
    }
}

pub fn figure_preset_by_name(name: &str) -> Result<SweepSpec, SweepError> {
    Ok(figure_preset(name.parse()?))
}
