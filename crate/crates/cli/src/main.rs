//! `hyperjacobi`: batch evaluation, transforms, convolutions, invariant
//! suites and harmonic iterations for Jacobi analysis.

mod format;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hyperjacobi::furstenberg::{check_mu_conditions, iterate_and_report};
use hyperjacobi::jacobi::{c_function, heckman_opdam_g, phi, phi_second_kind, weight_delta};
use hyperjacobi::resolvent::b_lambda;
use hyperjacobi::tauberian::StripScanGrid;
use hyperjacobi::transform::forward_transform;
use hyperjacobi::translation::convolve_measure;
use hyperjacobi::verify::{run_suite, Suite, VerifyConfig};
use hyperjacobi::{
    Error, EvenMeasure, GridFunction, Interpolation, JacobiParams, QuadMethod, QuadratureSpec, SpectralPoint,
};
use num_complex::Complex64;
use serde::Serialize;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_PRECISION: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;

#[derive(Parser, Debug)]
#[command(name = "hyperjacobi", version, about = "Jacobi functions, transforms and convolutions")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    run: RunConfig,
}

#[derive(clap::Args, Debug, Clone, Serialize)]
struct RunConfig {
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Right end of sampled grids.
    #[arg(long, global = true, default_value_t = 8.0)]
    tmax: f64,
    /// Number of grid samples.
    #[arg(long, global = true, default_value_t = 401)]
    n: usize,
    /// Accuracy target; also sets the printed significant digits.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Quad::Gauss)]
    quad: Quad,
    /// Spectral parameter `re[,im]`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Purely imaginary spectral parameter `i·value`.
    #[arg(long = "lambda-im", global = true, allow_hyphen_values = true)]
    lambda_im: Option<f64>,
    /// Comma-separated evaluation points.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    t: Vec<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Output::Csv)]
    out: Output,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Quad {
    Simpson,
    Gauss,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Output {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum EvalKind {
    #[value(name = "phi")]
    Phi,
    /// Second-kind function.
    #[value(name = "Phi")]
    PhiSecond,
    #[value(name = "G")]
    G,
    #[value(name = "c")]
    C,
    #[value(name = "delta-weight")]
    DeltaWeight,
    #[value(name = "b")]
    B,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Initial {
    Phi,
    Bump,
    Constant,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a function at the points given by `--t`.
    Eval {
        #[arg(value_enum)]
        kind: EvalKind,
    },
    /// Run an invariant suite and print its JSON report.
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
    },
    /// Iterate `f ↦ f ∗ μ` and report flatness and spectral decay.
    Furstenberg {
        /// Measure file (JSON).
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        /// Initial function; `phi` uses `--lambda`.
        #[arg(long, value_enum, default_value_t = Initial::Phi)]
        initial: Initial,
        /// Comma-separated real probes for `|μ̂|^n`.
        #[arg(long, value_delimiter = ',')]
        probes: Vec<f64>,
    },
    /// Forward transform of a sampled function (`t,re,im` CSV) at real `--t`
    /// values read as spectral points.
    Transform {
        #[arg(long)]
        input: PathBuf,
    },
    /// Convolve a sampled function with a measure.
    Convolve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        /// Where to write the validity sidecar (JSON).
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failure with its exit code and what to print.
struct Failure {
    exit: u8,
    code: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match &e {
            Error::Domain(_) | Error::DivisionUnstable(_) => EXIT_DOMAIN,
            Error::Precision { .. } => EXIT_PRECISION,
            Error::Invalid(_) => EXIT_USAGE,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_DATA,
        };
        Failure {
            exit,
            code: e.code().into(),
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        exit: EXIT_USAGE,
        code: "usage".into(),
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

impl RunConfig {
    fn params(&self) -> CliResult<JacobiParams> {
        match (self.alpha, self.beta) {
            (Some(a), Some(b)) => Ok(JacobiParams::new(a, b)?),
            _ => Err(usage("--alpha and --beta are required")),
        }
    }

    fn optional_params(&self) -> CliResult<Option<JacobiParams>> {
        match (self.alpha, self.beta) {
            (None, None) => Ok(None),
            _ => self.params().map(Some),
        }
    }

    fn lambda(&self) -> CliResult<SpectralPoint> {
        match (&self.lambda, self.lambda_im) {
            (Some(_), Some(_)) => Err(usage("give either --lambda or --lambda-im")),
            (None, Some(y)) => Ok(SpectralPoint::imag(y)),
            (Some(s), None) => parse_lambda(s),
            (None, None) => Err(usage("--lambda or --lambda-im is required")),
        }
    }

    fn quad(&self) -> CliResult<QuadratureSpec> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(usage("--tol must lie in (0, 1)"));
        }
        let method = match self.quad {
            Quad::Simpson => QuadMethod::AdaptiveSimpson,
            Quad::Gauss => QuadMethod::GaussLegendreComposite,
        };
        Ok(QuadratureSpec {
            method,
            abs_tol: (self.tol * 1e-4).max(1e-13),
            ..QuadratureSpec::default()
        })
    }

    fn digits(&self) -> usize {
        format::digits_for(self.tol)
    }

    fn points(&self) -> CliResult<&[f64]> {
        if self.t.is_empty() {
            return Err(usage("--t needs at least one value"));
        }
        Ok(&self.t)
    }
}

fn parse_lambda(s: &str) -> CliResult<SpectralPoint> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| usage(format!("cannot read '{p}' in --lambda")));
    match parts.as_slice() {
        [re] => Ok(SpectralPoint::real(num(re)?)),
        [re, im] => Ok(SpectralPoint::new(num(re)?, num(im)?)),
        _ => Err(usage("--lambda takes re or re,im")),
    }
}

#[derive(Serialize)]
struct Row {
    t: f64,
    re: f64,
    im: f64,
}

fn emit_table(run: &RunConfig, label: &str, rows: &[(f64, Complex64)]) -> CliResult<String> {
    let digits = run.digits();
    if run.out == Output::Json {
        let rows: Vec<Row> = rows
            .iter()
            .map(|&(t, z)| Row { t, re: z.re, im: z.im })
            .collect();
        return Ok(serde_json::to_string(&rows).map_err(Error::from)? + "\n");
    }
    let mut s = format!("{label},re,im\n");
    for &(t, z) in rows {
        let (re, im) = format::complex(z, run.tol, digits);
        let _ = writeln!(s, "{},{re},{im}", format::number(t, 17));
    }
    Ok(s)
}

fn cmd_eval(run: &RunConfig, kind: EvalKind) -> CliResult<String> {
    let p = run.params()?;
    if kind == EvalKind::C {
        let z = c_function(&p, run.lambda()?)?;
        if run.out == Output::Json {
            return Ok(serde_json::json!({ "re": z.re, "im": z.im }).to_string() + "\n");
        }
        let (re, im) = format::complex(z, run.tol, run.digits());
        return Ok(format!("re,im\n{re},{im}\n"));
    }
    let mut rows = Vec::new();
    for &t in run.points()? {
        let v = match kind {
            EvalKind::Phi => phi(&p, run.lambda()?, t)?,
            EvalKind::PhiSecond => phi_second_kind(&p, run.lambda()?, t)?,
            EvalKind::G => heckman_opdam_g(&p, run.lambda()?, t)?,
            EvalKind::DeltaWeight => Complex64::new(weight_delta(&p, t), 0.0),
            EvalKind::B => b_lambda(&p, run.lambda()?, t)?,
            EvalKind::C => unreachable!("handled above"),
        };
        rows.push((t, v));
    }
    emit_table(run, "t", &rows)
}

fn cmd_verify(run: &RunConfig, suite: Suite) -> CliResult<(String, bool)> {
    let config = VerifyConfig {
        params: run.optional_params()?,
        seed: run.seed,
        quad: QuadratureSpec {
            abs_tol: 1e-11,
            ..run.quad()?
        },
    };
    let report = run_suite(suite, &config)?;
    let text = serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n";
    Ok((text, report.pass))
}

fn smooth_bump(t: f64) -> Complex64 {
    if t.abs() >= 1.0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new((1.0 - t * t).powi(4), 0.0)
    }
}

fn cmd_furstenberg(run: &RunConfig, measure: &PathBuf, steps: usize, initial: Initial, probes: &[f64]) -> CliResult<String> {
    let p = run.params()?;
    let quad = run.quad()?;
    let mu = EvenMeasure::read_json(measure)?;
    let f = match initial {
        Initial::Phi => {
            let l = run.lambda()?;
            GridFunction::try_from_fn(run.tmax, run.n, Interpolation::Cubic, |t| phi(&p, l, t))?
        }
        Initial::Bump => GridFunction::from_fn(run.tmax, run.n, Interpolation::Cubic, |t| smooth_bump(t / 2.0))?,
        Initial::Constant => GridFunction::from_fn(run.tmax, run.n, Interpolation::Cubic, |_| Complex64::new(1.0, 0.0))?,
    };
    let mut run_out = iterate_and_report(&p, &f, &mu, steps, probes, &quad)?;
    let grid = StripScanGrid {
        re_max: 10.0,
        re_n: 10,
        im_margin: 0.1 * p.rho(),
        im_n: 4,
    };
    run_out.report.conditions = Some(check_mu_conditions(&p, &mu, &grid, 20, &quad)?);
    Ok(serde_json::to_string_pretty(&run_out.report).map_err(Error::from)? + "\n")
}

fn cmd_transform(run: &RunConfig, input: &PathBuf) -> CliResult<String> {
    let p = run.params()?;
    let quad = run.quad()?;
    let f = GridFunction::read_csv(input)?;
    let mut rows = Vec::new();
    for &l in run.points()? {
        rows.push((l, forward_transform(&p, &f, SpectralPoint::real(l), &quad)?));
    }
    emit_table(run, "lambda", &rows)
}

fn cmd_convolve(run: &RunConfig, input: &PathBuf, measure: &PathBuf, sidecar: Option<&PathBuf>) -> CliResult<String> {
    let p = run.params()?;
    let quad = run.quad()?;
    let f = GridFunction::read_csv(input)?;
    let mu = EvenMeasure::read_json(measure)?;
    let out = convolve_measure(&p, &f, &mu, &quad)?;
    if let Some(path) = sidecar {
        let text = serde_json::to_string_pretty(&out.sidecar()).map_err(Error::from)?;
        std::fs::write(path, text).map_err(Error::from)?;
    }
    let rows: Vec<(f64, Complex64)> = out.grid.samples().collect();
    emit_table(run, "t", &rows)
}

fn dispatch(cli: &Cli) -> CliResult<(String, bool)> {
    let run = &cli.run;
    match &cli.command {
        Command::Eval { kind } => cmd_eval(run, *kind).map(|s| (s, true)),
        Command::Verify { suite } => cmd_verify(run, *suite),
        Command::Furstenberg {
            measure,
            steps,
            initial,
            probes,
        } => cmd_furstenberg(run, measure, *steps, *initial, probes).map(|s| (s, true)),
        Command::Transform { input } => cmd_transform(run, input).map(|s| (s, true)),
        Command::Convolve { input, measure, sidecar } => {
            cmd_convolve(run, input, measure, sidecar.as_ref()).map(|s| (s, true))
        }
    }
}

fn report_failure(f: &Failure, context: serde_json::Value) {
    let line = serde_json::json!({
        "code": f.code,
        "message": f.message,
        "context": context,
    });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let f = usage(e.to_string().trim().to_string());
            report_failure(&f, serde_json::Value::Null);
            return ExitCode::from(f.exit);
        }
    };
    match dispatch(&cli) {
        Ok((text, pass)) => {
            print!("{text}");
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFY_FAILED)
            }
        }
        Err(f) => {
            let context = serde_json::json!({
                "command": format!("{:?}", cli.command),
                "config": &cli.run,
            });
            report_failure(&f, context);
            ExitCode::from(f.exit)
        }
    }
}
