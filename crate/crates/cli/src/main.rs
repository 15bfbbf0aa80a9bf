//! `giantqed`: single-point evaluation, figure reproduction, sweeps, the
//! real-space solver and the invariant audit from the command line.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 usage or validation error,
//! 3 I/O error.

mod angle;
mod files;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use giantqed::audit::{run_audit, Corruption};
use giantqed::sweep::{figure_preset_by_name, run_sweep, SweepSpec, SweepTable};
use giantqed::{
    amplitudes_full, classify_condition, collective_params, solve, two_atom_to_system, Direction,
    ScatteringAmplitudes, ScatteringProblem, SystemSpec, TwoAtomParams,
};

#[derive(Debug)]
pub enum Failure {
    Invariant(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invariant(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invariant(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "giantqed", version, about = "Photon routing between waveguides by giant atoms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate amplitudes, probabilities and the condition report at one point.
    Point(PointArgs),
    /// Reproduce a figure preset as CSV.
    Fig(FigArgs),
    /// Run a sweep described by a JSON config.
    Sweep(SweepArgs),
    /// Solve an arbitrary system with the real-space solver.
    Solve(SolveArgs),
    /// Run the randomized invariant suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    ClosedForm,
    RealSpace,
}

#[derive(Args)]
struct PointArgs {
    /// Phase between the legs on the first waveguide (radians or e.g. 0.5pi).
    #[arg(long, value_parser = angle::parse_angle, allow_hyphen_values = true,
          required_unless_present = "config")]
    theta: Option<f64>,
    /// Phase between the legs on the second waveguide.
    #[arg(long, value_parser = angle::parse_angle, allow_hyphen_values = true,
          required_unless_present = "config")]
    phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    j: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    /// Probe detuning.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Read the parameters from a JSON file instead of flags.
    #[arg(long, conflicts_with_all = ["theta", "phi", "j", "gamma", "kappa", "delta"])]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "closed-form")]
    engine: EngineArg,
    /// Carrier frequency for the real-space engine, in units of gamma.
    #[arg(long, default_value_t = giantqed::sweep::REALSPACE_TWO_ATOM_CARRIER)]
    carrier: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FigArgs {
    /// Preset name (fig2, fig3a, fig3b, fig4a..fig4f, fig5b, fig5c, fig5d).
    name: String,
    /// Output CSV path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// SystemSpec JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Photon energy (or detuning, per the system's frequency units).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    energy: f64,
    /// Waveguide id the photon enters on.
    #[arg(long, default_value_t = 0)]
    input: usize,
    /// Inject the photon from the right end, travelling leftward.
    #[arg(long)]
    leftward: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Samples per invariant.
    #[arg(short = 'n', long = "samples", default_value_t = 1000,
          value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
    /// Deliberately corrupt the closed form to exercise the failure path.
    #[arg(long, hide = true)]
    corrupt: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Point(a) => cmd_point(a),
        Command::Fig(a) => cmd_fig(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn stdout_err(e: io::Error) -> Failure {
    Failure::Io(format!("cannot write to stdout: {e}"))
}

#[derive(Serialize)]
struct PointReport {
    params: TwoAtomParams,
    amplitudes: ScatteringAmplitudes,
    probabilities: giantqed::ScatteringProbabilities,
    collective: giantqed::CollectiveParams,
    condition: giantqed::ConditionReport,
    flags: Vec<&'static str>,
}

fn complex(z: Complex64) -> String {
    format!("{:+.12e} {:+.12e}i", z.re, z.im)
}

fn cmd_point(a: PointArgs) -> Result<(), Failure> {
    let params = match &a.config {
        Some(path) => files::read_json::<TwoAtomParams>(path)?,
        None => TwoAtomParams::new(
            a.theta.expect("required by clap"),
            a.phi.expect("required by clap"),
            a.gamma.unwrap_or(1.0),
            a.j.unwrap_or(0.0),
            a.kappa.unwrap_or(0.0),
            a.delta.unwrap_or(0.0),
        ),
    };
    params.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let amplitudes = match a.engine {
        EngineArg::ClosedForm => amplitudes_full(&params).map_err(|e| Failure::Usage(e.to_string()))?,
        EngineArg::RealSpace => {
            let system = two_atom_to_system(&params, a.carrier).map_err(|e| Failure::Usage(e.to_string()))?;
            solve(&ScatteringProblem::from_left(system, params.detuning))
                .map_err(|e| Failure::Usage(e.to_string()))?
                .two_waveguide_amplitudes()
        }
    };
    let condition = classify_condition(&params);
    let report = PointReport {
        params,
        amplitudes,
        probabilities: amplitudes.probabilities(),
        collective: collective_params(&params),
        condition,
        flags: condition.flags(),
    };

    let mut out = io::stdout().lock();
    if a.json {
        serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Failure::Io(e.to_string()))?;
        writeln!(out).map_err(stdout_err)?;
        return Ok(());
    }
    let p = &report.probabilities;
    let c = &report.collective;
    let text = format!(
        "amplitudes\n  t_r1 = {}\n  r_l1 = {}\n  t_r2 = {}\n  r_l2 = {}\n\
         probabilities\n  T    = {:.15}\n  R    = {:.15}\n  T_f  = {:.15}\n  T_b  = {:.15}\n  loss = {:.15}\n\
         collective\n  lambda_+ = {}\n  lambda_- = {}\n  Gamma1_+ = {:.12e}  Gamma1_- = {:.12e}\n  \
         Gamma2_+ = {:.12e}  Gamma2_- = {:.12e}\n  J1 = {:.12e}  J2 = {:.12e}  J_sigma = {:.12e}\n\
         condition: {}\n",
        complex(amplitudes.t_r1),
        complex(amplitudes.r_l1),
        complex(amplitudes.t_r2),
        complex(amplitudes.r_l2),
        p.t,
        p.r,
        p.t_f,
        p.t_b,
        p.loss,
        complex(c.lambda_plus),
        complex(c.lambda_minus),
        c.gamma1_plus,
        c.gamma1_minus,
        c.gamma2_plus,
        c.gamma2_minus,
        c.j1,
        c.j2,
        c.j_sigma,
        if report.flags.is_empty() { "none".to_string() } else { report.flags.join(", ") },
    );
    out.write_all(text.as_bytes()).map_err(stdout_err)
}

fn summary(label: &str, table: &SweepTable) -> String {
    let mut line = format!("{label}: {} rows", table.records.len());
    let errors = table.error_rows();
    if errors > 0 {
        line.push_str(&format!(" ({errors} failed)"));
    }
    for col in ["T", "R", "T_f", "T_b", "loss"] {
        if let Some(values) = table.column(col) {
            let finite = values.iter().copied().filter(|v| v.is_finite());
            let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            line.push_str(&format!("; {col} [{lo:.6}, {hi:.6}]"));
        }
    }
    line
}

fn emit_table(label: &str, table: &SweepTable, output: Option<&PathBuf>) -> Result<(), Failure> {
    match output {
        Some(path) => {
            files::write_atomic(path, |w| table.write_csv(w))?;
            println!("{} -> {}", summary(label, table), path.display());
        }
        None => {
            table.write_csv(io::stdout().lock()).map_err(stdout_err)?;
            eprintln!("{}", summary(label, table));
        }
    }
    Ok(())
}

fn run(spec: &SweepSpec) -> Result<SweepTable, Failure> {
    run_sweep(spec).map_err(|e| Failure::Usage(e.to_string()))
}

fn cmd_fig(a: FigArgs) -> Result<(), Failure> {
    let spec = figure_preset_by_name(&a.name).map_err(|e| Failure::Usage(e.to_string()))?;
    let table = run(&spec)?;
    emit_table(&a.name, &table, a.output.as_ref())
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let spec: SweepSpec = files::read_json(&a.config)?;
    let table = run(&spec)?;
    emit_table("sweep", &table, a.output.as_ref())
}

fn cmd_solve(a: SolveArgs) -> Result<(), Failure> {
    let system: SystemSpec = files::read_json(&a.config)?;
    let problem = ScatteringProblem {
        system,
        input_waveguide: a.input,
        input_direction: if a.leftward {
            Direction::Leftward
        } else {
            Direction::Rightward
        },
        photon_energy: a.energy,
    };
    let result = solve(&problem).map_err(|e| Failure::Usage(e.to_string()))?;
    let write = |w: &mut dyn Write| -> io::Result<()> {
        serde_json::to_writer_pretty(&mut *w, &result)?;
        writeln!(w)
    };
    match &a.output {
        Some(path) => files::write_atomic(path, write),
        None => write(&mut io::stdout().lock()).map_err(stdout_err),
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let corruption = a.corrupt.then_some(Corruption::FlipReflection);
    let report = run_audit(a.samples as usize, a.seed, corruption);
    let mut out = io::stdout().lock();
    if a.json {
        serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Failure::Io(e.to_string()))?;
        writeln!(out).map_err(stdout_err)?;
    } else {
        write!(out, "{report}").map_err(stdout_err)?;
    }
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<_> = report.failures().map(|r| r.invariant.name()).collect();
        Err(Failure::Invariant(format!("invariant failure: {}", names.join(", "))))
    }
}
