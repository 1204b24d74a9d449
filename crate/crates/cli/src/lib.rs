//! The `zmc` command line.
//!
//! Every verb samples or solves on a rectangular lattice and writes one
//! table (CSV), document (JSON) or mesh (OBJ). The fully resolved
//! configuration goes into the metadata: inline for JSON on stdout, in a
//! `<out>.meta.json` sidecar when `--out` is given, otherwise as one JSON
//! line on stderr.
//!
//! Exit codes: 0 success, 1 domain errors (sonic point, causal type
//! violation, non-exact form, ...), 2 usage errors.

pub mod export;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use zmc_core::duality::{chaplygin_state, dualize, Direction, DualizeOptions, Epsilon};
use zmc_core::gallery::{catalog, emit};
use zmc_core::geometry::{
    classify_lattice, detect_lightlike_set, gauss_curvature_euclid, mean_curvature, minimal_residual,
    verify_line_theorem, zmc_residual, TAU_GRAD,
};
use zmc_core::solver::{
    convergence_report, solve, BoundaryData, DirichletProblem, Equation, FailureReport, SolverOptions,
};
use zmc_core::{parse, Error, GraphField, Lattice, Params, Point2, Rect, SampledGrid};

pub const SCHEMA: u32 = 1;

const GRAMMAR: &str = "\
Expressions (--field, --boundary):
  expr    := term (('+' | '-') term)*
  term    := unary (('*' | '/') unary)*
  unary   := '-' unary | power
  power   := primary ('^' unary)?
  primary := number | x | y | pi | e | name | func '(' expr ')' | atan2(expr, expr) | '(' expr ')'
  func    := sin cos tan exp log sqrt sinh cosh tanh atan asinh acosh abs
  Names are bound with --param name=value.

Exit codes: 0 success, 1 domain error, 2 usage error.";

#[derive(Parser, Debug)]
#[command(name = "zmc", version, about = "Zero mean curvature graphs in Lorentz-Minkowski space", after_help = GRAMMAR)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Causal type at every lattice node, plus refined light-like points between nodes.
    Classify(Common),
    /// Residual of the ZMC (`--equation maximal`, default) or minimal surface equation.
    Residual(Common),
    /// Mean curvature (or Euclidean Gauss curvature with `--kind gauss`).
    Curvature {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = CurvatureKind::Mean)]
        kind: CurvatureKind,
    },
    /// Integrate the dual one-form: stream function to potential or back.
    Dualize {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        direction: DirectionArg,
    },
    /// Chaplygin gas state (density, velocity, sound speed, pressure) at every node.
    Fluid(Common),
    /// Light-like points of the field, refined between lattice nodes.
    Detect(Common),
    /// Fit lines through degenerate light-like points and check their lifts are light-like.
    VerifyLines {
        #[command(flatten)]
        common: Common,
        /// Clustering radius; defaults to ten lattice spacings.
        #[arg(long)]
        link_radius: Option<f64>,
    },
    /// Newton solve of a Dirichlet problem for the minimal or maximal equation.
    Solve {
        #[command(flatten)]
        common: Common,
        /// JSON problem file: {equation, domain, resolution, boundary, tolerances}.
        #[arg(long)]
        problem: Option<PathBuf>,
    },
    /// List or emit the built-in example surfaces.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
    /// Sample a field on the lattice and write it as CSV, JSON or OBJ.
    Export(Common),
}

#[derive(Subcommand, Debug)]
enum ExamplesAction {
    /// Names, kinds and parameters of all examples.
    List {
        #[arg(long, value_enum, default_value_t = ListFormat::Text)]
        format: ListFormat,
    },
    /// Expressions and metadata of one example as JSON.
    Emit {
        name: String,
        #[arg(long = "param", value_name = "NAME=VALUE", allow_hyphen_values = true)]
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Field expression in x and y.
    #[arg(long, allow_hyphen_values = true)]
    field: Option<String>,
    /// Parameter binding, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", allow_hyphen_values = true)]
    params: Vec<String>,
    /// x0,x1,y0,y1
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// nx,ny
    #[arg(long)]
    res: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, allow_hyphen_values = true)]
    tol_light: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tol_grad: Option<f64>,
    /// +1 or -1
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    /// x,y
    #[arg(long, allow_hyphen_values = true)]
    base: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    base_value: Option<f64>,
    #[arg(long, value_enum)]
    equation: Option<EquationArg>,
    /// Boundary data expression in x and y.
    #[arg(long, allow_hyphen_values = true)]
    boundary: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p0: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
    Obj,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ListFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CurvatureKind {
    Mean,
    Gauss,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    ToPotential,
    ToStream,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum EquationArg {
    Minimal,
    Maximal,
}

impl From<EquationArg> for Equation {
    fn from(e: EquationArg) -> Self {
        match e {
            EquationArg::Minimal => Equation::Minimal,
            EquationArg::Maximal => Equation::Maximal,
        }
    }
}

/// Failures of a command, split by exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    /// A core error caused by bad input (syntax, unbound names, invalid values).
    Input(Error),
    Domain(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. } | Error::UnboundParameter(_) | Error::InvalidInput(_) => Failure::Input(e),
            other => Failure::Domain(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CmdResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn numbers(flag: &str, text: &str, n: usize) -> CmdResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != n {
        return usage(format!("--{flag} expects {n} comma-separated numbers, got `{text}`"));
    }
    parts
        .iter()
        .map(|p| p.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<Vec<_>>>()
        .map_or_else(|| usage(format!("--{flag}: `{text}` is not a list of finite numbers")), Ok)
}

fn parse_params(items: &[String]) -> CmdResult<Params> {
    let mut out = Params::new();
    for item in items {
        let Some((k, v)) = item.split_once('=') else {
            return usage(format!("--param expects NAME=VALUE, got `{item}`"));
        };
        let k = k.trim();
        let valid = k.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return usage(format!("--param: `{k}` is not a valid name"));
        }
        match v.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => {
                out.insert(k.to_string(), x);
            }
            _ => return usage(format!("--param {k}: `{v}` is not a finite number")),
        }
    }
    Ok(out)
}

fn parse_epsilon(text: &str) -> CmdResult<Epsilon> {
    match text.trim() {
        "+1" | "1" => Ok(Epsilon::Plus),
        "-1" => Ok(Epsilon::Minus),
        _ => usage(format!("--epsilon expects +1 or -1, got `{text}`")),
    }
}

/// Configuration after defaults are applied; echoed into every output.
#[derive(Clone, Debug, Default, Serialize)]
struct Resolved {
    verb: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
    #[serde(skip_serializing_if = "Params::is_empty")]
    params: Params,
    domain: Option<[f64; 4]>,
    res: Option<[usize; 2]>,
    format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol_light: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol_grad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<i8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    base: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    base_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equation: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<CurvatureKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    link_radius: Option<f64>,
}

/// Which common flags a verb reads; anything else given is a usage error.
#[derive(Clone, Copy)]
struct Accepts {
    field: bool,
    tolerances: bool,
    epsilon: bool,
    base: bool,
    equation: bool,
    boundary: bool,
    p0: bool,
}

const FIELD_ONLY: Accepts = Accepts {
    field: true,
    tolerances: false,
    epsilon: false,
    base: false,
    equation: false,
    boundary: false,
    p0: false,
};

impl Common {
    fn check(&self, verb: &str, a: Accepts) -> CmdResult<()> {
        let given = [
            ("field", self.field.is_some(), a.field),
            ("tol-light", self.tol_light.is_some(), a.tolerances),
            ("tol-grad", self.tol_grad.is_some(), a.tolerances),
            ("epsilon", self.epsilon.is_some(), a.epsilon),
            ("base", self.base.is_some(), a.base),
            ("base-value", self.base_value.is_some(), a.base),
            ("equation", self.equation.is_some(), a.equation),
            ("boundary", self.boundary.is_some(), a.boundary),
            ("p0", self.p0.is_some(), a.p0),
        ];
        for (flag, present, accepted) in given {
            if present && !accepted {
                return usage(format!("--{flag} is not used by `{verb}`"));
            }
        }
        Ok(())
    }

    fn resolve(&self, verb: &'static str, default_format: Format) -> CmdResult<Resolved> {
        let domain = match &self.domain {
            Some(d) => {
                let v = numbers("domain", d, 4)?;
                [v[0], v[1], v[2], v[3]]
            }
            None => [-1.0, 1.0, -1.0, 1.0],
        };
        let res = match &self.res {
            Some(r) => {
                let v = numbers("res", r, 2)?;
                if v.iter().any(|x| x.fract() != 0.0 || *x < 2.0 || *x > 1e5) {
                    return usage(format!("--res expects two integers in [2, 100000], got `{r}`"));
                }
                [v[0] as usize, v[1] as usize]
            }
            None => [33, 33],
        };
        Ok(Resolved {
            verb,
            field: self.field.clone(),
            params: parse_params(&self.params)?,
            domain: Some(domain),
            res: Some(res),
            format: Some(self.format.unwrap_or(default_format)),
            out: self.out.as_ref().map(|p| p.display().to_string()),
            tol_grad: self.tol_grad,
            tol_light: self.tol_light,
            epsilon: self.epsilon.as_deref().map(parse_epsilon).transpose()?.map(Epsilon::as_i8),
            base: self.base.as_deref().map(|b| numbers("base", b, 2).map(|v| [v[0], v[1]])).transpose()?,
            base_value: self.base_value,
            equation: self.equation.map(|e| Equation::from(e).as_str()),
            boundary: self.boundary.clone(),
            p0: self.p0,
            ..Resolved::default()
        })
    }
}

impl Resolved {
    fn rect(&self) -> CmdResult<Rect> {
        let d = self.domain.expect("resolved");
        Ok(Rect::new(d[0], d[1], d[2], d[3])?)
    }

    fn lattice(&self) -> CmdResult<Lattice> {
        let r = self.res.expect("resolved");
        Ok(Lattice::new(self.rect()?, r[0], r[1])?)
    }

    fn field(&self) -> CmdResult<GraphField> {
        let Some(text) = &self.field else {
            return usage(format!("`{}` needs --field", self.verb));
        };
        Ok(GraphField::parse(text, &self.params, self.rect()?)?)
    }

    fn format(&self) -> Format {
        self.format.expect("resolved")
    }

    fn epsilon(&self) -> CmdResult<Epsilon> {
        match self.epsilon {
            Some(1) => Ok(Epsilon::Plus),
            Some(_) => Ok(Epsilon::Minus),
            None => usage(format!("`{}` needs --epsilon +1|-1", self.verb)),
        }
    }

    /// Fill in tolerances from the field's defaults so they are echoed.
    fn tolerances(&mut self, f: &GraphField) -> CmdResult<(f64, f64)> {
        let tl = *self.tol_light.get_or_insert(f.default_tau_light());
        let tg = *self.tol_grad.get_or_insert(TAU_GRAD);
        if !(tl > 0.0 && tg > 0.0) {
            return usage("--tol-light and --tol-grad must be positive");
        }
        Ok((tl, tg))
    }
}

/// What a verb produced: a primary payload per format plus metadata.
struct Output {
    csv: Option<Vec<u8>>,
    obj: Option<Vec<u8>>,
    data: Value,
    meta: Map<String, Value>,
}

impl Output {
    fn new(data: Value) -> Self {
        Self { csv: None, obj: None, data, meta: Map::new() }
    }
}

fn csv_of(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> CmdResult<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn grid_output(grid: &SampledGrid, format: Format) -> CmdResult<Output> {
    values_output(grid.lattice(), grid.values(), format)
}

fn values_output(lat: &Lattice, values: &[f64], format: Format) -> CmdResult<Output> {
    let mut out = Output::new(export::values_json(lat, values));
    match format {
        Format::Csv => out.csv = Some(csv_of(|w| export::values_csv(w, lat, values))?),
        Format::Obj => out.obj = Some(csv_of(|w| export::obj_mesh(w, lat, values))?),
        Format::Json => {}
    }
    Ok(out)
}

fn no_obj(cfg: &Resolved) -> CmdResult<()> {
    if cfg.format() == Format::Obj {
        return usage(format!("`{}` writes tables; use --format csv or json", cfg.verb));
    }
    Ok(())
}

fn sample_grid(
    f: &GraphField,
    lat: &Lattice,
    value: impl Fn(&GraphField, Point2) -> zmc_core::Result<f64>,
) -> CmdResult<SampledGrid> {
    let values = lat.points().map(|p| value(f, p)).collect::<zmc_core::Result<Vec<_>>>()?;
    Ok(SampledGrid::new(*lat, values)?)
}

fn cmd_classify(cfg: &mut Resolved) -> CmdResult<Output> {
    no_obj(cfg)?;
    let f = cfg.field()?;
    let lat = cfg.lattice()?;
    let (tl, tg) = cfg.tolerances(&f)?;
    let mut samples = classify_lattice(&f, &lat, tl, tg)?;
    let node_count = samples.len();
    let on_node = |p: Point2| {
        let (fi, fj) = ((p.x - lat.rect.x0) / lat.hx(), (p.y - lat.rect.y0) / lat.hy());
        (fi - fi.round()).abs() < 1e-9 && (fj - fj.round()).abs() < 1e-9
    };
    samples.extend(detect_lightlike_set(&f, &lat, tl, tg)?.into_iter().filter(|s| !on_node(s.point)));
    let mut out = Output::new(export::to_json(&samples));
    out.meta.insert("lattice_samples".into(), json!(node_count));
    out.meta.insert("refined_samples".into(), json!(samples.len() - node_count));
    if cfg.format() == Format::Csv {
        out.csv = Some(csv_of(|w| export::causal_csv(w, &samples))?);
    }
    Ok(out)
}

fn cmd_residual(cfg: &mut Resolved) -> CmdResult<Output> {
    let f = cfg.field()?;
    let lat = cfg.lattice()?;
    let eq = cfg.equation.unwrap_or("maximal");
    cfg.equation = Some(eq);
    let grid =
        if eq == "minimal" { sample_grid(&f, &lat, minimal_residual)? } else { sample_grid(&f, &lat, zmc_residual)? };
    grid_output(&grid, cfg.format())
}

fn cmd_curvature(cfg: &mut Resolved, kind: CurvatureKind) -> CmdResult<Output> {
    let f = cfg.field()?;
    let lat = cfg.lattice()?;
    cfg.kind = Some(kind);
    let grid = match kind {
        CurvatureKind::Mean => {
            let (tl, _) = cfg.tolerances(&f)?;
            cfg.tol_grad = None;
            sample_grid(&f, &lat, |f, p| mean_curvature(f, p, tl))?
        }
        CurvatureKind::Gauss => sample_grid(&f, &lat, gauss_curvature_euclid)?,
    };
    grid_output(&grid, cfg.format())
}

fn cmd_dualize(cfg: &mut Resolved, direction: DirectionArg) -> CmdResult<Output> {
    let f = cfg.field()?;
    let lat = cfg.lattice()?;
    let eps = cfg.epsilon()?;
    let direction = match direction {
        DirectionArg::ToPotential => Direction::ToPotential,
        DirectionArg::ToStream => Direction::ToStream,
    };
    cfg.direction = Some(match direction {
        Direction::ToPotential => "to-potential",
        Direction::ToStream => "to-stream",
    });
    let base = *cfg.base.get_or_insert([lat.rect.x0, lat.rect.y0]);
    let base_value = *cfg.base_value.get_or_insert(0.0);
    let mut opts = DualizeOptions::default();
    if let Some(t) = cfg.tol_light {
        opts.tau = t;
    }
    cfg.tol_light = Some(opts.tau);
    let d = dualize(&f, &lat, Point2::new(base[0], base[1]), base_value, direction, eps, &opts)?;
    let mut out = grid_output(d.phi.grid().expect("dualize returns a grid"), cfg.format())?;
    out.meta.insert("dual".into(), export::to_json(&d.meta()));
    Ok(out)
}

fn cmd_fluid(cfg: &mut Resolved) -> CmdResult<Output> {
    no_obj(cfg)?;
    let f = cfg.field()?;
    let lat = cfg.lattice()?;
    let (tl, _) = cfg.tolerances(&f)?;
    cfg.tol_grad = None;
    let p0 = *cfg.p0.get_or_insert(0.0);
    let rows =
        lat.points().map(|p| chaplygin_state(&f, p, p0, tl).map(|s| (p, s))).collect::<zmc_core::Result<Vec<_>>>()?;
    let data: Vec<Value> =
        rows.iter().map(|(p, s)| json!({ "x": p.x, "y": p.y, "state": export::to_json(s) })).collect();
    let mut out = Output::new(Value::Array(data));
    if cfg.format() == Format::Csv {
        out.csv = Some(csv_of(|w| export::flow_csv(w, &rows))?);
    }
    Ok(out)
}

fn cmd_detect(cfg: &mut Resolved) -> CmdResult<Output> {
    no_obj(cfg)?;
    let f = cfg.field()?;
    let lat = cfg.lattice()?;
    let (tl, tg) = cfg.tolerances(&f)?;
    let samples = detect_lightlike_set(&f, &lat, tl, tg)?;
    let mut out = Output::new(export::to_json(&samples));
    if cfg.format() == Format::Csv {
        out.csv = Some(csv_of(|w| export::causal_csv(w, &samples))?);
    }
    Ok(out)
}

fn cmd_verify_lines(cfg: &mut Resolved, link_radius: Option<f64>) -> CmdResult<Output> {
    no_obj(cfg)?;
    let f = cfg.field()?;
    let lat = cfg.lattice()?;
    let (tl, tg) = cfg.tolerances(&f)?;
    let radius = *cfg.link_radius.insert(link_radius.unwrap_or(10.0 * lat.spacing()));
    let samples = detect_lightlike_set(&f, &lat, tl, tg)?;
    let lines = verify_line_theorem(&samples, &f, radius)?;
    let mut out = Output::new(export::to_json(&lines));
    out.meta.insert("all_verified".into(), json!(lines.iter().all(|l| l.verified)));
    if cfg.format() == Format::Csv {
        out.csv = Some(csv_of(|w| export::lines_csv(w, &lines))?);
    }
    Ok(out)
}

/// JSON problem file for `solve --problem`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    equation: EquationArg,
    domain: [f64; 4],
    resolution: [usize; 2],
    boundary: String,
    #[serde(default)]
    params: Params,
    #[serde(default)]
    tolerances: Option<ProblemTolerances>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemTolerances {
    residual: Option<f64>,
    linear: Option<f64>,
    max_iterations: Option<usize>,
}

fn cmd_solve(cfg: &mut Resolved, common: &Common, problem: Option<&Path>) -> CmdResult<Output> {
    let mut options = SolverOptions::default();
    if let Some(path) = problem {
        if common.equation.is_some() || common.boundary.is_some() || common.domain.is_some() || common.res.is_some() {
            return usage("--problem replaces --equation, --boundary, --domain and --res");
        }
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let p: ProblemFile =
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        cfg.equation = Some(Equation::from(p.equation).as_str());
        cfg.domain = Some(p.domain);
        cfg.res = Some(p.resolution);
        cfg.boundary = Some(p.boundary);
        cfg.params.extend(p.params);
        let t = p.tolerances.unwrap_or_default();
        options.tol = t.residual.unwrap_or(options.tol);
        options.linear_tol = t.linear.unwrap_or(options.linear_tol);
        options.max_iterations = t.max_iterations.unwrap_or(options.max_iterations);
    }
    let equation: Equation =
        cfg.equation.ok_or_else(|| Failure::Usage("`solve` needs --equation minimal|maximal".into()))?.parse()?;
    let Some(boundary) = cfg.boundary.clone() else {
        return usage("`solve` needs --boundary");
    };
    let lattice = cfg.lattice()?;
    let boundary = parse(&boundary, &cfg.params)?;
    let problem =
        DirichletProblem { options, ..DirichletProblem::new(equation, lattice, BoundaryData::Function(boundary)) };
    let sol = solve(&problem)?;
    let mut out = grid_output(&sol.grid, cfg.format())?;
    out.meta.insert("solver_options".into(), export::to_json(&options));
    out.meta.insert("convergence".into(), export::to_json(&sol.report));
    out.meta.insert("summary".into(), json!(convergence_report(&sol.report)));
    Ok(out)
}

fn cmd_export(cfg: &mut Resolved) -> CmdResult<Output> {
    let f = cfg.field()?;
    let lat = cfg.lattice()?;
    let values = lat.points().map(|p| f.value(p)).collect::<zmc_core::Result<Vec<_>>>()?;
    values_output(&lat, &values, cfg.format())
}

fn write_file(path: &Path, bytes: &[u8]) -> CmdResult<()> {
    std::fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("json values serialise");
    s.push(b'\n');
    s
}

fn emit_output(cfg: &Resolved, out: Output, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult<()> {
    let mut meta = Map::new();
    meta.insert("schema".into(), json!(SCHEMA));
    meta.insert("command".into(), json!(cfg.verb));
    meta.insert("config".into(), export::to_json(cfg));
    meta.extend(out.meta);
    let payload = match cfg.format() {
        Format::Csv => out.csv.expect("csv produced"),
        Format::Obj => out.obj.expect("obj produced"),
        Format::Json => {
            let mut doc = meta.clone();
            doc.insert("data".into(), out.data);
            pretty(&Value::Object(doc))
        }
    };
    match &cfg.out {
        Some(path) => {
            let path = Path::new(path);
            write_file(path, &payload)?;
            write_file(&sidecar(path), &pretty(&Value::Object(meta)))?;
        }
        None => {
            stdout.write_all(&payload)?;
            if cfg.format() != Format::Json {
                writeln!(stderr, "{}", Value::Object(meta))?;
            }
        }
    }
    Ok(())
}

fn examples(action: ExamplesAction, stdout: &mut dyn Write) -> CmdResult<()> {
    match action {
        ExamplesAction::List { format: ListFormat::Text } => {
            for e in catalog() {
                let defaults: Vec<String> = e.defaults.iter().map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(stdout, "{:<24}{:<12}{}", e.name, format!("{:?}", e.kind).to_lowercase(), e.description)?;
                if !defaults.is_empty() {
                    writeln!(stdout, "{:<24}params: {}", "", defaults.join(" "))?;
                }
            }
        }
        ExamplesAction::List { format: ListFormat::Json } => {
            stdout.write_all(&pretty(&json!({ "schema": SCHEMA, "examples": export::to_json(&catalog()) })))?;
        }
        ExamplesAction::Emit { name, params, out } => {
            let params = parse_params(&params)?;
            let e = emit(&name, &params)?;
            let mut doc = json!({ "schema": SCHEMA, "command": "examples emit" });
            doc.as_object_mut().unwrap().extend(export::to_json(&e).as_object().unwrap().clone());
            let bytes = pretty(&doc);
            match out {
                Some(p) => write_file(&p, &bytes)?,
                None => stdout.write_all(&bytes)?,
            }
        }
    }
    Ok(())
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult<()> {
    let tol = Accepts { tolerances: true, ..FIELD_ONLY };
    let (common, accepts, verb, default_format) = match &cli.command {
        Command::Examples { .. } => {
            let Command::Examples { action } = cli.command else { unreachable!() };
            return examples(action, stdout);
        }
        Command::Classify(c) => (c, tol, "classify", Format::Csv),
        Command::Residual(c) => (c, Accepts { equation: true, ..FIELD_ONLY }, "residual", Format::Csv),
        Command::Curvature { common, .. } => (common, tol, "curvature", Format::Csv),
        Command::Dualize { common, .. } => {
            (common, Accepts { epsilon: true, base: true, ..tol }, "dualize", Format::Csv)
        }
        Command::Fluid(c) => (c, Accepts { p0: true, ..tol }, "fluid", Format::Csv),
        Command::Detect(c) => (c, tol, "detect", Format::Csv),
        Command::VerifyLines { common, .. } => (common, tol, "verify-lines", Format::Json),
        Command::Solve { common, .. } => {
            (common, Accepts { field: false, equation: true, boundary: true, ..FIELD_ONLY }, "solve", Format::Csv)
        }
        Command::Export(c) => (c, FIELD_ONLY, "export", Format::Csv),
    };
    common.check(verb, accepts)?;
    let mut cfg = common.resolve(verb, default_format)?;
    let result = match &cli.command {
        Command::Classify(_) => cmd_classify(&mut cfg),
        Command::Residual(_) => cmd_residual(&mut cfg),
        Command::Curvature { kind, .. } => cmd_curvature(&mut cfg, *kind),
        Command::Dualize { direction, .. } => cmd_dualize(&mut cfg, *direction),
        Command::Fluid(_) => cmd_fluid(&mut cfg),
        Command::Detect(_) => cmd_detect(&mut cfg),
        Command::VerifyLines { link_radius, .. } => cmd_verify_lines(&mut cfg, *link_radius),
        Command::Solve { common, problem } => cmd_solve(&mut cfg, common, problem.as_deref()),
        Command::Export(_) => cmd_export(&mut cfg),
        Command::Examples { .. } => unreachable!(),
    };
    match result {
        Ok(out) => emit_output(&cfg, out, stdout, stderr),
        Err(Failure::Domain(e) | Failure::Input(e)) if cfg.format() == Format::Json && cfg.out.is_none() => {
            report_json_error(&cfg, &e, stdout)?;
            Err(Failure::from(e))
        }
        Err(e) => Err(e),
    }
}

fn report_json_error(cfg: &Resolved, e: &Error, stdout: &mut dyn Write) -> CmdResult<()> {
    let f = FailureReport::from_error(e);
    let doc =
        json!({ "schema": SCHEMA, "command": cfg.verb, "config": export::to_json(cfg), "error": export::to_json(&f) });
    stdout.write_all(&pretty(&doc))?;
    Ok(())
}

/// Run the command line; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = if code == 0 { write!(stdout, "{}", e.render()) } else { write!(stderr, "{}", e.render()) };
            return code;
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}\n\n{GRAMMAR}");
            2
        }
        Err(Failure::Input(e)) => {
            let _ = writeln!(stderr, "error [{}]: {e}\n\n{GRAMMAR}", e.code());
            2
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(stderr, "error [{}]: {e}", e.code());
            if let Some(r) = e.last_residual() {
                let _ = writeln!(stderr, "last residual: {r:e}");
            }
            1
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    }
}
