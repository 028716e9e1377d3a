//! Command routing from parsed input and flags to engine calls and reports.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{int, parse_rational, rat, rational_string, Matrix};
use crate::dsl::{Diagnostic, Document};
use crate::index::{
    boundary_index, grr_index, spencer_euler_characteristic, tangent_todd, twisted_index,
    CohomologyRingModel, IndexError, SymbolClass,
};
use crate::jet::spencer::polynomial_tail_degree;
use crate::jet::{
    delta_cohomology, geometric_symbol, involutivity_degree, is_finite_type, poincare_series,
    prolong, solution_dim_bound, symbol_at_degree, to_flat_connection, DeltaCohomologyTable,
    JetError, PdeSystem, SpencerComplex, DEFAULT_SEARCH_BOUND,
};
use crate::microlocal::grid::{compass_directions, random_grid, regular_grid};
use crate::microlocal::{
    classify_mixed, external_product_char, factorization_check, is_elliptic, is_hyperbolic,
    noncharacteristic_restrict, CovectorSample, HyperbolicStatus, MicrolocalError, Region,
};
use crate::report::{input_hash, Provenance, ReportDocument};
use crate::torsion::{
    bcov_invariant_model, fd_spectrum_crosscheck, quillen_norm, ray_singer_torsion,
    regularized_det, regularized_det_with, DegreeLabel, SpectrumModel, TorsionConvention,
    TorsionError, TorusLaplacian, ZetaMethod,
};
use crate::Rational;

pub const COMMANDS: [&str; 17] = [
    "symbol",
    "prolong",
    "spencer",
    "involutivity",
    "finite-type",
    "poincare",
    "classify",
    "restrict",
    "kunneth",
    "index",
    "grr",
    "boundary-index",
    "torsion",
    "det",
    "bcov",
    "quillen",
    "crosscheck",
];

/// Exit status families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    Parse,
    Precondition,
    Numeric,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Parse => 2,
            ErrorCategory::Precondition => 3,
            ErrorCategory::Numeric => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error, Serialize)]
#[error("{code}: {message}")]
pub struct DispatchError {
    pub category: ErrorCategory,
    /// Machine-readable `engine.kind` tag.
    pub code: String,
    pub message: String,
    pub diagnostic: Option<Diagnostic>,
}

impl DispatchError {
    pub fn usage(message: impl Into<String>) -> Self {
        DispatchError {
            category: ErrorCategory::Precondition,
            code: "cli.usage".into(),
            message: message.into(),
            diagnostic: None,
        }
    }

    pub fn numeric(code: &str, message: impl Into<String>) -> Self {
        DispatchError {
            category: ErrorCategory::Numeric,
            code: code.into(),
            message: message.into(),
            diagnostic: None,
        }
    }

    pub fn parse(d: Diagnostic) -> Self {
        DispatchError {
            category: ErrorCategory::Parse,
            code: "dsl.parse".into(),
            message: d.to_string(),
            diagnostic: Some(d),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.category.exit_code()
    }

    fn precondition(code: &str, message: String) -> Self {
        DispatchError {
            category: ErrorCategory::Precondition,
            code: code.into(),
            message,
            diagnostic: None,
        }
    }
}

impl From<JetError> for DispatchError {
    fn from(e: JetError) -> Self {
        let code = match &e {
            JetError::InvalidSystem(_) => "jet.invalid_system",
            JetError::InvalidArgument(_) => "jet.invalid_argument",
            JetError::Unsupported(_) => "jet.unsupported",
            JetError::Internal(_) => "jet.internal",
            JetError::DegenerateSymbol { .. } => "jet.degenerate_symbol",
            JetError::NotFiniteType { .. } => "jet.not_finite_type",
            JetError::Obstruction { .. } => "jet.obstruction",
        };
        DispatchError::precondition(code, e.to_string())
    }
}

impl From<MicrolocalError> for DispatchError {
    fn from(e: MicrolocalError) -> Self {
        match e {
            MicrolocalError::Jet(j) => j.into(),
            MicrolocalError::Algebra(a) => {
                DispatchError::precondition("algebra.error", a.to_string())
            }
            MicrolocalError::InvalidArgument(m) => {
                DispatchError::precondition("microlocal.invalid_argument", m)
            }
            MicrolocalError::Unsupported(m) => {
                DispatchError::precondition("microlocal.unsupported", m)
            }
        }
    }
}

impl From<IndexError> for DispatchError {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::Jet(j) => j.into(),
            IndexError::Microlocal(m) => m.into(),
            IndexError::InvalidArgument(m) => {
                DispatchError::precondition("index.invalid_argument", m)
            }
            IndexError::Precondition(m) => DispatchError::precondition("index.precondition", m),
            other => DispatchError::precondition("index.internal", other.to_string()),
        }
    }
}

impl From<TorsionError> for DispatchError {
    fn from(e: TorsionError) -> Self {
        match &e {
            TorsionError::InvalidArgument(_) => {
                DispatchError::precondition("torsion.invalid_argument", e.to_string())
            }
            TorsionError::Unsupported(_) => {
                DispatchError::precondition("torsion.unsupported", e.to_string())
            }
            TorsionError::Pole { .. } => DispatchError::numeric("torsion.pole", e.to_string()),
            TorsionError::Numeric(_) => DispatchError::numeric("torsion.numeric", e.to_string()),
        }
    }
}

/// Flags shared by every command; each command reads the ones it needs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Args {
    pub order: Option<usize>,
    pub depth: Option<usize>,
    pub direction: Option<String>,
    pub grid: Option<usize>,
    pub model: Option<String>,
    pub tau: Option<String>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub length: Option<f64>,
    pub area: Option<f64>,
    pub twist: Vec<i64>,
    pub systems: Vec<String>,
    pub spectra: Vec<String>,
    pub region: Option<String>,
    pub cones: Vec<String>,
    pub method: Option<String>,
    pub convention: Option<String>,
    pub l2_norm: Option<f64>,
}

/// Torsion request as JSON: spectra per degree label plus a convention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionRequest {
    pub convention: TorsionConvention,
    pub degrees: Vec<(DegreeLabel, SpectrumModel)>,
}

#[derive(Clone, Debug, Default)]
pub enum Input {
    #[default]
    None,
    Dsl(Document),
    Json(Value),
}

impl Input {
    fn source(&self) -> Option<String> {
        match self {
            Input::None => None,
            Input::Dsl(d) => Some(d.source.clone()),
            Input::Json(v) => Some(crate::report::canonical_json(v)),
        }
    }

    fn doc(&self) -> Option<&Document> {
        match self {
            Input::Dsl(d) => Some(d),
            _ => None,
        }
    }
}

/// Runs one command. `echo` is recorded verbatim in the report.
pub fn dispatch(
    command: &str,
    args: &Args,
    input: &Input,
    echo: &[String],
) -> Result<ReportDocument, DispatchError> {
    let mut prov = Vec::new();
    let mut seed = None;
    let result = match command {
        "symbol" => cmd_symbol(args, input)?,
        "prolong" => cmd_prolong(args, input)?,
        "spencer" => cmd_spencer(args, input)?,
        "involutivity" => cmd_involutivity(args, input)?,
        "finite-type" => cmd_finite_type(args, input)?,
        "poincare" => cmd_poincare(args, input)?,
        "classify" => {
            seed = Some(args.seed.unwrap_or(0));
            cmd_classify(args, input)?
        }
        "restrict" => cmd_restrict(args, input)?,
        "kunneth" => cmd_kunneth(args, input)?,
        "index" => cmd_index(args, input)?,
        "grr" => cmd_grr(args, input)?,
        "boundary-index" => cmd_boundary(args)?,
        "torsion" => cmd_torsion(args, input, &mut prov)?,
        "det" => cmd_det(args, input, &mut prov)?,
        "bcov" => cmd_bcov(args, &mut prov)?,
        "quillen" => cmd_quillen(args, input, &mut prov)?,
        "crosscheck" => cmd_crosscheck(args, &mut prov)?,
        other => {
            return Err(DispatchError::usage(format!(
                "unknown command `{other}`; expected one of {}",
                COMMANDS.join(", ")
            )))
        }
    };
    if let Some(tol) = args.tolerance {
        if let Some(p) = prov.iter().find(|p| p.error_bound.is_some_and(|b| b > tol)) {
            return Err(DispatchError::numeric(
                "numeric.tolerance",
                format!(
                    "{} error bound {:e} exceeds tolerance {tol:e}",
                    p.quantity,
                    p.error_bound.unwrap_or(f64::NAN)
                ),
            ));
        }
    }
    let hash = input_hash(echo, input.source().as_deref());
    let mut report = ReportDocument::new(command, echo.to_vec(), hash, result);
    report.seed = seed;
    report.provenance = prov;
    Ok(report)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("engine reports serialize")
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(rational_string).collect()
}

fn system_at<'a>(
    args: &Args,
    input: &'a Input,
    idx: usize,
) -> Result<&'a PdeSystem, DispatchError> {
    let doc = input
        .doc()
        .ok_or_else(|| DispatchError::usage("this command needs a DSL input file with a system"))?;
    match args.systems.get(idx) {
        Some(name) => doc
            .system(name)
            .ok_or_else(|| DispatchError::usage(format!("no system named `{name}`"))),
        None if args.systems.is_empty() || idx > 0 => doc
            .systems()
            .nth(idx)
            .or_else(|| doc.systems().next())
            .ok_or_else(|| DispatchError::usage("input declares no system")),
        None => Err(DispatchError::usage("missing system selection")),
    }
}

fn system<'a>(args: &Args, input: &'a Input) -> Result<&'a PdeSystem, DispatchError> {
    system_at(args, input, 0)
}

fn system_header(sys: &PdeSystem) -> Value {
    json!({
        "name": sys.name(),
        "vars": sys.indep_vars().to_vec(),
        "unknowns": sys.unknowns(),
        "order": sys.order(),
        "equations": sys.equations().iter().map(|e| crate::dsl::printer::render_equation(sys, e)).collect::<Vec<_>>(),
        "point": rationals(&sys.point()),
    })
}

fn table_value(t: &DeltaCohomologyTable) -> Value {
    json!({ "entries": to_value(&t.rows()), "euler_characteristic": t.euler_characteristic() })
}

fn cmd_symbol(args: &Args, input: &Input) -> Result<Value, DispatchError> {
    let sys = system(args, input)?;
    let j = args.order.unwrap_or(sys.order());
    let sym = symbol_at_degree(sys, &sys.point(), j)?;
    Ok(json!({
        "system": system_header(sys),
        "symbol": to_value(&sym.summary()),
        "basis": sym.basis.iter().map(|b| rationals(b)).collect::<Vec<_>>(),
    }))
}

fn cmd_prolong(args: &Args, input: &Input) -> Result<Value, DispatchError> {
    let sys = system(args, input)?;
    let ell = args.depth.unwrap_or(1);
    let g = geometric_symbol(sys, &sys.point())?;
    let steps: Vec<Value> = (0..=ell)
        .map(|l| json!({ "ell": l, "symbol": to_value(&prolong(&g, l).summary()) }))
        .collect();
    Ok(json!({ "system": system_header(sys), "prolongations": steps }))
}

fn cmd_spencer(args: &Args, input: &Input) -> Result<Value, DispatchError> {
    let sys = system(args, input)?;
    let depth = args.depth.unwrap_or(sys.n());
    let max_order = args.order.unwrap_or(sys.order() + 2);
    let cx = SpencerComplex::build(sys, depth, max_order)?;
    let table = delta_cohomology(&cx);
    Ok(json!({
        "system": system_header(sys),
        "depth": depth,
        "max_order": max_order,
        "delta_squared_zero": cx.verify_delta_squared(),
        "cohomology": table_value(&table),
    }))
}

fn cmd_involutivity(args: &Args, input: &Input) -> Result<Value, DispatchError> {
    let sys = system(args, input)?;
    let r = involutivity_degree(sys, args.depth.unwrap_or(DEFAULT_SEARCH_BOUND))?;
    Ok(json!({
        "system": system_header(sys),
        "ell0": r.ell0,
        "search_bound": r.search_bound,
        "cohomology": table_value(&r.table),
    }))
}

fn cmd_finite_type(args: &Args, input: &Input) -> Result<Value, DispatchError> {
    let sys = system(args, input)?;
    let r = is_finite_type(sys, args.depth.unwrap_or(DEFAULT_SEARCH_BOUND))?;
    let (bound, rank) = if r.finite {
        (
            Some(solution_dim_bound(sys)?),
            Some(to_flat_connection(sys)?.rank),
        )
    } else {
        (None, None)
    };
    Ok(json!({
        "system": system_header(sys),
        "report": to_value(&r),
        "solution_dim_bound": bound,
        "flat_connection_rank": rank,
    }))
}

fn cmd_poincare(args: &Args, input: &Input) -> Result<Value, DispatchError> {
    let sys = system(args, input)?;
    let max_k = args.order.unwrap_or(6);
    let coeffs = poincare_series(sys, max_k)?;
    let tail = polynomial_tail_degree(&coeffs, sys.order().min(max_k));
    Ok(
        json!({ "system": system_header(sys), "max_order": max_k, "coefficients": coeffs, "tail_polynomial_degree": tail }),
    )
}

/// `dt` (or `t`) names the unit covector of a variable; otherwise a rational list.
fn parse_direction(text: &str, sys: &PdeSystem) -> Result<Vec<Rational>, DispatchError> {
    let vars = sys.indep_vars();
    let name = text
        .strip_prefix('d')
        .filter(|v| vars.iter().any(|x| x == v))
        .unwrap_or(text);
    if let Some(i) = vars.iter().position(|x| x == name) {
        let mut v = vec![Rational::zero(); vars.len()];
        v[i] = Rational::one();
        return Ok(v);
    }
    let parts: Option<Vec<Rational>> = text.split(',').map(parse_rational).collect();
    match parts {
        Some(v) if v.len() == vars.len() => Ok(v),
        _ => Err(DispatchError::usage(format!(
            "direction `{text}` is neither d<var> for a variable in [{}] nor {} comma-separated rationals",
            vars.join(", "),
            vars.len()
        ))),
    }
}

/// Regular `grid^n` points on `[−1, 1]ⁿ` with compass covectors, plus `grid`
/// seeded random samples.
pub fn sampling_grid(n: usize, per_axis: usize, seed: u64) -> Vec<CovectorSample> {
    let per_axis = per_axis.max(1);
    let step = if per_axis == 1 {
        Rational::one()
    } else {
        rat(2, per_axis as i64 - 1)
    };
    let lo = if per_axis == 1 {
        Rational::zero()
    } else {
        int(-1)
    };
    let mut grid = regular_grid(n, per_axis, &lo, &step, &compass_directions(n, None));
    grid.extend(random_grid(n, per_axis, 4, seed));
    grid
}

fn cmd_classify(args: &Args, input: &Input) -> Result<Value, DispatchError> {
    let sys = system(args, input)?;
    let doc = input.doc().expect("system implies a document");
    let n = sys.n();
    let per_axis = args.grid.unwrap_or(5);
    let seed = args.seed.unwrap_or(0);
    if per_axis.checked_pow(n as u32).is_none_or(|c| c > 100_000) {
        return Err(DispatchError::usage("grid too large"));
    }
    let grid = sampling_grid(n, per_axis, seed);
    let direction = args
        .direction
        .as_deref()
        .map(|d| parse_direction(d, sys))
        .transpose()?;
    let region = match &args.region {
        Some(name) => {
            let r = doc
                .region(name)
                .ok_or_else(|| DispatchError::usage(format!("no region named `{name}`")))?;
            if r.vars != sys.indep_vars().to_vec() {
                return Err(DispatchError::usage(format!(
                    "region `{name}` is not over the variables of `{}`",
                    sys.name()
                )));
            }
            r.region.clone()
        }
        None => Region::everywhere(),
    };
    let cones = args
        .cones
        .iter()
        .map(|c| {
            doc.cone(c)
                .cloned()
                .ok_or_else(|| DispatchError::usage(format!("no cone named `{c}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let elliptic = is_elliptic(sys, &grid)?;
    let hyperbolic = match &direction {
        Some(theta) => match is_hyperbolic(sys, theta, &grid) {
            Ok(r) => Some(r),
            Err(MicrolocalError::Unsupported(_)) => None,
            Err(e) => return Err(e.into()),
        },
        None => None,
    };
    let mixed = classify_mixed(sys, &region, &grid, direction.as_deref(), &cones)?;
    let label = if elliptic.elliptic {
        "elliptic"
    } else if hyperbolic
        .as_ref()
        .is_some_and(|h| h.status == HyperbolicStatus::Hyperbolic)
    {
        "hyperbolic"
    } else {
        let e = mixed
            .strata
            .iter()
            .any(|s| s.kind == crate::microlocal::StratumKind::Elliptic);
        let h = mixed
            .strata
            .iter()
            .any(|s| s.kind == crate::microlocal::StratumKind::Hyperbolic);
        match (e, h) {
            (true, true) => "mixed",
            _ => "degenerate",
        }
    };
    Ok(json!({
        "system": system_header(sys),
        "label": label,
        "grid": { "per_axis": per_axis, "interval": ["-1/1", "1/1"], "random_points": per_axis, "seed": seed, "samples": grid.len() },
        "direction": direction.as_deref().map(rationals),
        "elliptic": to_value(&elliptic),
        "hyperbolic": hyperbolic.as_ref().map(to_value),
        "strata": to_value(&mixed.strata),
        "summary": to_value(&mixed.summary),
        "region": mixed.region,
        "cone_check": to_value(&mixed.cone_check),
        "counterexamples": to_value(&mixed.counterexamples),
    }))
}

fn cmd_restrict(args: &Args, input: &Input) -> Result<Value, DispatchError> {
    let sys = system(args, input)?;
    let dir = args
        .direction
        .as_deref()
        .ok_or_else(|| DispatchError::usage("restrict needs --direction (the conormal)"))?;
    let theta = parse_direction(dir, sys)?;
    // columns spanning the orthogonal complement of θ
    let embedding = Matrix::from_rows(vec![theta]).kernel_basis();
    let e = Matrix::from_columns(&embedding, sys.n());
    let r = noncharacteristic_restrict(sys, &e)?;
    Ok(json!({ "system": system_header(sys), "restriction": to_value(&r) }))
}

fn cmd_kunneth(args: &Args, input: &Input) -> Result<Value, DispatchError> {
    let a = system_at(args, input, 0)?;
    let b = system_at(args, input, 1)?;
    let (_, k) = external_product_char(a, b)?;
    let factorization = match args.depth {
        Some(n) => Some(to_value(&factorization_check(a, n)?)),
        None => None,
    };
    Ok(json!({
        "left": system_header(a),
        "right": system_header(b),
        "kunneth": to_value(&k),
        "factorization": factorization,
    }))
}

fn model(args: &Args, input: &Input) -> Result<Option<Arc<CohomologyRingModel>>, DispatchError> {
    let Some(name) = &args.model else {
        return Ok(None);
    };
    if let Some(m) = input.doc().and_then(|d| d.cohomology_model(name)) {
        return Ok(Some(m));
    }
    Ok(Some(CohomologyRingModel::by_name(name)?))
}

fn twist_for(args: &Args, m: &CohomologyRingModel) -> Vec<i64> {
    if args.twist.is_empty() {
        vec![0; m.generators.len()]
    } else {
        args.twist.clone()
    }
}

fn cmd_index(args: &Args, input: &Input) -> Result<Value, DispatchError> {
    if let Some(m) = model(args, input)? {
        let twist = twist_for(args, &m);
        let r = twisted_index(&m, &twist)?;
        return Ok(
            json!({ "model": m.name, "twist": twist, "index": r.index, "report": to_value(&r) }),
        );
    }
    let sys = system(args, input)?;
    let depth = args.depth.unwrap_or(sys.n());
    let max_order = args.order.unwrap_or(sys.order() + 2);
    let table = delta_cohomology(&SpencerComplex::build(sys, depth, max_order)?);
    let euler = spencer_euler_characteristic(&table);
    let rank = match is_finite_type(sys, DEFAULT_SEARCH_BOUND)? {
        ft if ft.finite => Some(to_flat_connection(sys)?.rank),
        _ => None,
    };
    Ok(json!({
        "system": system_header(sys),
        "index": euler.index,
        "euler": to_value(&euler),
        "flat_connection_rank": rank,
    }))
}

fn cmd_grr(args: &Args, input: &Input) -> Result<Value, DispatchError> {
    let m = model(args, input)?.ok_or_else(|| DispatchError::usage("grr needs --model"))?;
    let twist = twist_for(args, &m);
    let symbol = SymbolClass::dolbeault(&m, &twist)?;
    let ch = symbol.difference();
    let td = tangent_todd(&m)?;
    let r = grr_index(&ch, &td, &m)?;
    Ok(json!({
        "model": m.name,
        "relations": m.relations(),
        "twist": twist,
        "ch": ch.to_string(),
        "td": td.to_string(),
        "index": r.index,
        "breakdown": to_value(&r.breakdown),
    }))
}

/// Cohomology dimensions of the interior and of the boundary.
pub fn boundary_model(name: &str) -> Option<(Vec<usize>, Vec<usize>)> {
    match name {
        "interval" => Some((vec![1, 0], vec![2])),
        "disk" => Some((vec![1, 0, 0], vec![1, 1])),
        _ => None,
    }
}

fn cmd_boundary(args: &Args) -> Result<Value, DispatchError> {
    let name = args.model.as_deref().unwrap_or("interval");
    let (inner, bdry) = boundary_model(name).ok_or_else(|| {
        DispatchError::usage(format!(
            "unknown boundary model `{name}`; expected interval or disk"
        ))
    })?;
    let r = boundary_index(
        &DeltaCohomologyTable::from_degrees(&inner),
        &DeltaCohomologyTable::from_degrees(&bdry),
    );
    Ok(
        json!({ "model": name, "interior_betti": inner, "boundary_betti": bdry, "report": to_value(&r) }),
    )
}

fn parse_tau(text: Option<&str>) -> Result<Complex64, DispatchError> {
    let Some(t) = text else {
        return Ok(Complex64::new(0.0, 1.0));
    };
    if t.trim() == "i" {
        return Ok(Complex64::new(0.0, 1.0));
    }
    let parts: Vec<&str> = t.split(',').collect();
    let parsed: Option<Vec<f64>> = parts.iter().map(|p| p.trim().parse::<f64>().ok()).collect();
    match parsed.as_deref() {
        Some([re, im]) => Ok(Complex64::new(*re, *im)),
        _ => Err(DispatchError::usage(format!(
            "tau `{t}` must be `re,im` or `i`"
        ))),
    }
}

fn method(args: &Args) -> Result<Option<ZetaMethod>, DispatchError> {
    match args.method.as_deref() {
        None => Ok(None),
        Some("closed_form" | "closed-form") => Ok(Some(ZetaMethod::ClosedForm)),
        Some("mellin_theta" | "mellin-theta" | "mellin") => Ok(Some(ZetaMethod::MellinTheta)),
        Some("euler_maclaurin" | "euler-maclaurin") => Ok(Some(ZetaMethod::EulerMaclaurin)),
        Some(other) => Err(DispatchError::usage(format!("unknown method `{other}`"))),
    }
}

/// Spectrum of the scalar Laplacian of a named model.
fn model_spectrum(
    args: &Args,
    laplacian: TorusLaplacian,
) -> Result<Option<(String, SpectrumModel)>, DispatchError> {
    match args.model.as_deref() {
        None => Ok(None),
        Some("circle") => Ok(Some((
            "circle".into(),
            SpectrumModel::circle(args.length.unwrap_or(2.0 * PI)),
        ))),
        Some("torus") => {
            let tau = parse_tau(args.tau.as_deref())?;
            Ok(Some((
                "torus".into(),
                SpectrumModel::flat_torus_tau(tau, args.area.unwrap_or(1.0), laplacian),
            )))
        }
        Some(other) => Err(DispatchError::usage(format!(
            "unknown spectral model `{other}`; expected circle or torus"
        ))),
    }
}

fn spectrum(args: &Args, input: &Input) -> Result<(String, SpectrumModel), DispatchError> {
    if let Some(s) = model_spectrum(args, TorusLaplacian::Dolbeault)? {
        return Ok(s);
    }
    match input {
        Input::Json(v) => {
            let m: SpectrumModel = serde_json::from_value(v.clone())
                .map_err(|e| DispatchError::usage(format!("JSON input is not a spectrum: {e}")))?;
            Ok(("json".into(), m))
        }
        Input::Dsl(doc) => {
            let name = match args.spectra.first() {
                Some(n) => n.clone(),
                None => doc
                    .spectra()
                    .next()
                    .map(|s| s.name.clone())
                    .ok_or_else(|| DispatchError::usage("input declares no spectrum"))?,
            };
            let m = doc
                .spectrum(&name)
                .ok_or_else(|| DispatchError::usage(format!("no spectrum named `{name}`")))?;
            Ok((name, m))
        }
        Input::None => Err(DispatchError::usage(
            "needs --model circle|torus or an input file with a spectrum",
        )),
    }
}

fn cmd_det(args: &Args, input: &Input, prov: &mut Vec<Provenance>) -> Result<Value, DispatchError> {
    let (name, spec) = spectrum(args, input)?;
    let r = match method(args)? {
        Some(m) => regularized_det_with(&spec, m)?,
        None => regularized_det(&spec)?,
    };
    prov.push(Provenance {
        quantity: "det".into(),
        method: to_value(&r.method).as_str().unwrap_or("").into(),
        error_bound: Some(r.error_bound),
    });
    Ok(json!({ "spectrum": name, "model": to_value(&spec), "det": r.det, "report": to_value(&r) }))
}

fn convention(args: &Args) -> Result<TorsionConvention, DispatchError> {
    match args.convention.as_deref() {
        None | Some("exponential") => Ok(TorsionConvention::Exponential),
        Some("product" | "product_exponents") => Ok(TorsionConvention::ProductExponents),
        Some(other) => Err(DispatchError::usage(format!(
            "unknown convention `{other}`; expected exponential or product"
        ))),
    }
}

/// De Rham spectra by form degree for a flat model.
fn de_rham_family(
    args: &Args,
) -> Result<Option<(String, Vec<(DegreeLabel, SpectrumModel)>)>, DispatchError> {
    let Some((name, s)) = model_spectrum(args, TorusLaplacian::DeRham)? else {
        return Ok(None);
    };
    let deg = |k| DegreeLabel::Degree { k };
    let family = if name == "circle" {
        vec![(deg(0), s.clone()), (deg(1), s)]
    } else {
        vec![
            (deg(0), s.clone()),
            (deg(1), SpectrumModel::copies(s.clone(), 2)),
            (deg(2), s),
        ]
    };
    Ok(Some((name, family)))
}

fn doc_family(
    args: &Args,
    doc: &Document,
) -> Result<Vec<(DegreeLabel, SpectrumModel)>, DispatchError> {
    let names: Vec<String> = if args.spectra.is_empty() {
        doc.spectra().map(|s| s.name.clone()).collect()
    } else {
        args.spectra.clone()
    };
    if names.is_empty() {
        return Err(DispatchError::usage("input declares no spectrum"));
    }
    names
        .iter()
        .enumerate()
        .map(|(k, n)| {
            doc.spectrum(n)
                .map(|s| (DegreeLabel::Degree { k }, s))
                .ok_or_else(|| DispatchError::usage(format!("no spectrum named `{n}`")))
        })
        .collect()
}

fn cmd_torsion(
    args: &Args,
    input: &Input,
    prov: &mut Vec<Provenance>,
) -> Result<Value, DispatchError> {
    let (source, family, conv) = if let Some((name, family)) = de_rham_family(args)? {
        (name, family, convention(args)?)
    } else {
        match input {
            Input::Json(v) => {
                let req: TorsionRequest = serde_json::from_value(v.clone()).map_err(|e| {
                    DispatchError::usage(format!("JSON input is not a torsion request: {e}"))
                })?;
                ("json".into(), req.degrees, req.convention)
            }
            Input::Dsl(doc) => ("dsl".into(), doc_family(args, doc)?, convention(args)?),
            Input::None => {
                return Err(DispatchError::usage(
                    "torsion needs --model circle|torus or an input file",
                ))
            }
        }
    };
    let r = if conv == TorsionConvention::Bcov {
        let hodge = family
            .iter()
            .map(|(l, s)| match l {
                DegreeLabel::Hodge { p, q } => Ok((*p, *q, s.clone())),
                _ => Err(DispatchError::usage(
                    "the bcov convention needs Hodge (p, q) labels",
                )),
            })
            .collect::<Result<Vec<_>, _>>()?;
        crate::torsion::bcov_torsion(&hodge)?
    } else {
        ray_singer_torsion(&family, conv)?
    };
    prov.push(Provenance {
        quantity: "torsion".into(),
        method: "per-degree zeta".into(),
        error_bound: Some(r.error_bound),
    });
    Ok(
        json!({ "source": source, "torsion": r.torsion, "log_torsion": r.log_torsion, "report": to_value(&r) }),
    )
}

fn cmd_bcov(args: &Args, prov: &mut Vec<Provenance>) -> Result<Value, DispatchError> {
    let tau = parse_tau(args.tau.as_deref())?;
    let r = bcov_invariant_model(tau, args.area.unwrap_or(1.0))?;
    prov.push(Provenance {
        quantity: "t_bcov".into(),
        method: "per-degree zeta".into(),
        error_bound: Some(r.t_bcov.error_bound),
    });
    Ok(json!({ "t_bcov": r.t_bcov.torsion, "assembled": r.assembled, "report": to_value(&r) }))
}

fn cmd_quillen(
    args: &Args,
    input: &Input,
    prov: &mut Vec<Provenance>,
) -> Result<Value, DispatchError> {
    let family = match de_rham_family(args)? {
        Some((_, f)) => f,
        None => match input.doc() {
            Some(doc) => doc_family(args, doc)?,
            None => {
                return Err(DispatchError::usage(
                    "quillen needs --model circle|torus or a DSL file with spectra",
                ))
            }
        },
    };
    let l2 = args.l2_norm.unwrap_or(1.0);
    let mut dets = Vec::new();
    let mut entries = Vec::new();
    let mut bound = 0.0f64;
    for (label, s) in &family {
        let k = label.form_degree();
        let r = regularized_det(s)?;
        bound += 0.5 * k as f64 * r.log_error_bound;
        dets.push((k, r.det));
        entries.push(json!({ "degree": k, "det": r.det, "method": to_value(&r.method), "error_bound": r.error_bound }));
    }
    let norm = quillen_norm(l2, &dets)?;
    prov.push(Provenance {
        quantity: "quillen_norm".into(),
        method: "per-degree zeta".into(),
        error_bound: Some(norm * bound.exp_m1()),
    });
    Ok(json!({ "l2_norm": l2, "quillen_norm": norm, "dets": entries }))
}

fn cmd_crosscheck(args: &Args, prov: &mut Vec<Provenance>) -> Result<Value, DispatchError> {
    let length = args.length.unwrap_or(2.0 * PI);
    let n = args.grid.unwrap_or(64);
    if n > 4096 {
        return Err(DispatchError::usage("grid larger than 4096"));
    }
    let r = fd_spectrum_crosscheck(length, n)?;
    prov.push(Provenance {
        quantity: "fd_eigenvalues".into(),
        method: "dense symmetric eigensolver".into(),
        error_bound: None,
    });
    Ok(json!({ "within_bounds": r.within_bounds, "ordered": r.ordered, "report": to_value(&r) }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_pde_dsl;

    fn run(cmd: &str, args: Args, src: Option<&str>) -> Result<ReportDocument, DispatchError> {
        let input = match src {
            Some(s) => Input::Dsl(parse_pde_dsl(s).unwrap()),
            None => Input::None,
        };
        dispatch(cmd, &args, &input, &[cmd.to_string()])
    }

    const WAVE: &str = "system wave { vars t,x; unknowns u; eq: D[t,t](u) - D[x,x](u) = 0; }";

    #[test]
    fn det_circle() {
        let args = Args {
            model: Some("circle".into()),
            length: Some(6.283185307),
            ..Default::default()
        };
        let r = run("det", args, None).unwrap();
        let det = r.result["det"].as_f64().unwrap();
        assert!((det - 6.283185307f64.powi(2)).abs() < 1e-9);
        assert!((det - 39.4784176).abs() < 1e-6);
        assert!(r.provenance[0].error_bound.is_some());
    }

    #[test]
    fn index_p1() {
        let args = Args {
            model: Some("P1".into()),
            twist: vec![3],
            ..Default::default()
        };
        assert_eq!(run("index", args, None).unwrap().result["index"], 4);
    }

    #[test]
    fn classify_wave() {
        let args = Args {
            direction: Some("dt".into()),
            grid: Some(3),
            ..Default::default()
        };
        let r = run("classify", args, Some(WAVE)).unwrap();
        assert_eq!(r.result["label"], "hyperbolic");
        assert_eq!(r.seed, Some(0));
    }

    #[test]
    fn errors_map_to_categories() {
        let e = run("nope", Args::default(), None).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let e = run(
            "det",
            Args {
                model: Some("circle".into()),
                length: Some(-1.0),
                ..Default::default()
            },
            None,
        )
        .unwrap_err();
        assert_eq!(e.code, "torsion.invalid_argument");
        let tight = Args {
            model: Some("torus".into()),
            method: Some("mellin".into()),
            tolerance: Some(0.0),
            ..Default::default()
        };
        assert_eq!(run("det", tight, None).unwrap_err().exit_code(), 4);
    }

    #[test]
    fn every_command_routes() {
        let src = "system lap { vars x,y; unknowns u; eq: D[x,x](u) + D[y,y](u) = 0; }\n\
                   system dx { vars x; unknowns u; eq: D[x](u) = 0; }\n\
                   spectrum s { kind circle; length 2; }";
        let base = Args {
            model: None,
            ..Default::default()
        };
        for cmd in [
            "symbol",
            "prolong",
            "spencer",
            "involutivity",
            "finite-type",
            "poincare",
            "classify",
            "kunneth",
            "index",
        ] {
            run(cmd, base.clone(), Some(src)).unwrap_or_else(|e| panic!("{cmd}: {e}"));
        }
        run(
            "restrict",
            Args {
                direction: Some("dy".into()),
                ..Default::default()
            },
            Some(src),
        )
        .unwrap();
        run(
            "grr",
            Args {
                model: Some("P2".into()),
                twist: vec![1],
                ..Default::default()
            },
            None,
        )
        .unwrap();
        let b = run(
            "boundary-index",
            Args {
                model: Some("disk".into()),
                ..Default::default()
            },
            None,
        )
        .unwrap();
        assert_eq!(b.result["report"]["relative_index"], 1);
        run(
            "torsion",
            Args {
                model: Some("circle".into()),
                ..Default::default()
            },
            None,
        )
        .unwrap();
        run("torsion", Args::default(), Some(src)).unwrap();
        run("det", Args::default(), Some(src)).unwrap();
        run("bcov", Args::default(), None).unwrap();
        run(
            "quillen",
            Args {
                model: Some("circle".into()),
                ..Default::default()
            },
            None,
        )
        .unwrap();
        run(
            "crosscheck",
            Args {
                grid: Some(16),
                ..Default::default()
            },
            None,
        )
        .unwrap();
    }

    #[test]
    fn json_torsion_request() {
        let req = TorsionRequest {
            convention: TorsionConvention::Exponential,
            degrees: vec![
                (DegreeLabel::Degree { k: 0 }, SpectrumModel::circle(3.0)),
                (DegreeLabel::Degree { k: 1 }, SpectrumModel::circle(3.0)),
            ],
        };
        let input = Input::Json(serde_json::to_value(&req).unwrap());
        let r = dispatch("torsion", &Args::default(), &input, &[]).unwrap();
        assert!((r.result["torsion"].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-9);
    }
}
