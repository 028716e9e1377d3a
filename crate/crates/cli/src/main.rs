use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;
use spencer_lab::dispatch::{dispatch, Args, DispatchError, ErrorCategory, Input, COMMANDS};
use spencer_lab::dsl::parse_pde_dsl;
use spencer_lab::report::{canonical_json, emit_report, Format};

/// Formal integrability, microlocal classification, index and torsion computations.
#[derive(Debug, Parser)]
#[command(name = "spencer-lab", version)]
struct Cli {
    /// One of: symbol, prolong, spencer, involutivity, finite-type, poincare,
    /// classify, restrict, kunneth, index, grr, boundary-index, torsion, det,
    /// bcov, quillen, crosscheck.
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(COMMANDS))]
    command: String,
    /// DSL (`.pde`) or JSON input; `-` reads standard input.
    file: Option<PathBuf>,
    /// Jet order or series length.
    #[arg(long)]
    order: Option<usize>,
    /// Complex depth, prolongation count or search bound.
    #[arg(long)]
    depth: Option<usize>,
    /// `d<var>` or a comma-separated rational covector.
    #[arg(long, allow_hyphen_values = true)]
    direction: Option<String>,
    /// Grid points per axis (classify) or finite-difference size (crosscheck).
    #[arg(long)]
    grid: Option<usize>,
    /// Cohomology model (P1, P2, E, S2, T2, P1xP1), spectral model (circle, torus)
    /// or boundary model (interval, disk).
    #[arg(long)]
    model: Option<String>,
    /// Torus modulus as `re,im` or `i`.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    #[arg(long, default_value = "json")]
    format: Format,
    /// Seed for random grid samples.
    #[arg(long)]
    seed: Option<u64>,
    /// Largest acceptable numeric error bound.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    length: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    area: Option<f64>,
    /// Line-bundle degrees, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    twist: Vec<i64>,
    /// System names in the input; repeat for kunneth.
    #[arg(long = "system")]
    systems: Vec<String>,
    /// Spectrum names in the input, in degree order.
    #[arg(long = "spectrum")]
    spectra: Vec<String>,
    #[arg(long)]
    region: Option<String>,
    #[arg(long = "cone")]
    cones: Vec<String>,
    /// closed_form, mellin_theta or euler_maclaurin.
    #[arg(long)]
    method: Option<String>,
    /// exponential or product.
    #[arg(long)]
    convention: Option<String>,
    #[arg(long = "l2-norm")]
    l2_norm: Option<f64>,
}

fn read_input(path: &Option<PathBuf>) -> Result<Input, DispatchError> {
    let Some(path) = path else {
        return Ok(Input::None);
    };
    let mut bytes = Vec::new();
    let read = if path.as_os_str() == "-" {
        std::io::stdin().read_to_end(&mut bytes).map(|_| ())
    } else {
        std::fs::read(path).map(|b| bytes = b)
    };
    read.map_err(|e| DispatchError::usage(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes).map_err(|e| {
        let mut err = DispatchError::usage(format!("{} is not UTF-8: {e}", path.display()));
        err.category = ErrorCategory::Parse;
        err.code = "input.encoding".into();
        err
    })?;
    let is_json =
        path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    if is_json {
        let v = serde_json::from_str(&text).map_err(|e| {
            let mut err = DispatchError::usage(format!("{}: invalid JSON: {e}", path.display()));
            err.category = ErrorCategory::Parse;
            err.code = "input.json".into();
            err
        })?;
        return Ok(Input::Json(v));
    }
    parse_pde_dsl(&text)
        .map(Input::Dsl)
        .map_err(DispatchError::parse)
}

fn configure_threads() {
    if let Some(n) = std::env::var("SPENCER_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn run(cli: &Cli, echo: &[String]) -> Result<Vec<u8>, DispatchError> {
    let input = read_input(&cli.file)?;
    let args = Args {
        order: cli.order,
        depth: cli.depth,
        direction: cli.direction.clone(),
        grid: cli.grid,
        model: cli.model.clone(),
        tau: cli.tau.clone(),
        seed: cli.seed,
        tolerance: cli.tolerance,
        length: cli.length,
        area: cli.area,
        twist: cli.twist.clone(),
        systems: cli.systems.clone(),
        spectra: cli.spectra.clone(),
        region: cli.region.clone(),
        cones: cli.cones.clone(),
        method: cli.method.clone(),
        convention: cli.convention.clone(),
        l2_norm: cli.l2_norm,
    };
    let report = dispatch(&cli.command, &args, &input, echo)?;
    Ok(emit_report(&report, cli.format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(ErrorCategory::Precondition.exit_code() as u8),
            };
        }
    };
    configure_threads();
    let echo: Vec<String> = std::env::args().skip(1).collect();
    match run(&cli, &echo) {
        Ok(bytes) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(&bytes).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let text = match cli.format {
                Format::Json => canonical_json(&json!({ "error": e })),
                Format::Text => {
                    let file = cli
                        .file
                        .as_ref()
                        .map(|p| format!("{}:", p.display()))
                        .unwrap_or_default();
                    match &e.diagnostic {
                        Some(d) => format!("{file}{d}\n"),
                        None => format!("error[{}]: {}\n", e.code, e.message),
                    }
                }
            };
            let _ = std::io::stderr().write_all(text.as_bytes());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
