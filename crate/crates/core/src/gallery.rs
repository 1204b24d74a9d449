//! Explicit surfaces: graph families, parametric examples with implicit
//! validators, and a named catalog for the command line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse_with_vars, BinOp, Expr, Expression, Params};
use crate::field::{GraphField, Lattice, Point2, Rect, SampledGrid};
use crate::jet::Dual;
use crate::quadrature::adaptive_simpson;

/// Tolerance for the antiderivative quadrature of `1/g′`.
pub const PHI_QUAD_TOL: f64 = 1e-12;

/// The graph `t = y + g(x)` and its dual `φ = y − ∫ du/g′(u)`.
///
/// Every such graph is a ZMC graph without space-like points:
/// `B = −g′(x)²`, light-like exactly on the zeros of `g′`.
#[derive(Clone, Debug)]
pub struct TGraph {
    pub g: Expression,
    pub psi: GraphField,
    /// Lower limit of the `1/g′` integral.
    pub x_ref: f64,
}

fn derivative(g: &Expression, x: f64) -> Result<f64> {
    Ok(g.eval(&[Dual::<1>::var(0, x)])?.grad[0])
}

/// Build the graph of `y + g(x)` over `domain`. `g_text` may only use `x`.
pub fn tgraph(g_text: &str, params: &Params, domain: Rect) -> Result<TGraph> {
    let g = parse_with_vars(g_text, &["x"], params)?;
    let tree = Expr::binary(BinOp::Add, Expr::Var(1), g.tree().clone());
    let psi = GraphField::from_expression(Expression::new(tree, &["x", "y"])?, domain)?.named(format!("y + {g}"));
    let x_ref = 0.0f64.clamp(domain.x0, domain.x1);
    Ok(TGraph { g, psi, x_ref })
}

impl TGraph {
    pub fn g_prime(&self, x: f64) -> Result<f64> {
        derivative(&self.g, x)
    }

    /// Scan `g′` between `x_ref` and `x` for zeros or sign changes.
    fn check_no_zero(&self, x: f64) -> Result<()> {
        const SCAN: usize = 2000;
        let (a, b) = (self.x_ref.min(x), self.x_ref.max(x));
        let mut prev: Option<f64> = None;
        for k in 0..=SCAN {
            let u = a + (b - a) * k as f64 / SCAN as f64;
            let d = self.g_prime(u)?;
            if d == 0.0 || prev.is_some_and(|p| p.signum() != d.signum()) {
                return Err(Error::DividesByZeroDerivative { x: u });
            }
            prev = Some(d);
        }
        Ok(())
    }

    /// `φ(x, y) = y − ∫_{x_ref}^{x} du / g′(u)`.
    pub fn phi_at(&self, p: Point2) -> Result<f64> {
        if !self.psi.domain().contains(p) {
            return Err(Error::OutOfDomain(p));
        }
        self.check_no_zero(p.x)?;
        let integral = adaptive_simpson(
            |u| {
                let d = self.g_prime(u)?;
                if d == 0.0 {
                    return Err(Error::DividesByZeroDerivative { x: u });
                }
                Ok(1.0 / d)
            },
            self.x_ref,
            p.x,
            PHI_QUAD_TOL,
        )?;
        Ok(p.y - integral)
    }

    /// φ sampled on a lattice. One quadrature per column.
    pub fn phi_field(&self, lattice: &Lattice) -> Result<GraphField> {
        if !self.psi.domain().contains_rect(&lattice.rect) {
            return Err(Error::InvalidInput("lattice exceeds the graph domain".into()));
        }
        let offsets = (0..lattice.nx)
            .map(|i| self.phi_at(Point2::new(lattice.x(i), lattice.rect.y0)).map(|v| v - lattice.rect.y0))
            .collect::<Result<Vec<_>>>()?;
        let values = lattice.points().enumerate().map(|(k, p)| p.y + offsets[k % lattice.nx]).collect();
        Ok(GraphField::sampled(SampledGrid::new(*lattice, values)?).named(format!("dual of y + {}", self.g)))
    }
}

/// A map `(s, t) ↦ (x, y, t)` over a parameter rectangle.
#[derive(Clone, Debug)]
pub struct ParametricSurface {
    pub name: String,
    pub param_names: [String; 2],
    pub components: [Expression; 3],
    /// Parameter rectangle; `x` ranges over the first parameter.
    pub domain: Rect,
    pub params: Params,
}

impl ParametricSurface {
    fn new(name: &str, vars: [&str; 2], comps: [&str; 3], domain: Rect, params: &Params) -> Result<Self> {
        let parse = |s: &str| parse_with_vars(s, &vars, params);
        Ok(Self {
            name: name.into(),
            param_names: vars.map(String::from),
            components: [parse(comps[0])?, parse(comps[1])?, parse(comps[2])?],
            domain,
            params: params.clone(),
        })
    }

    pub fn point(&self, s: f64, t: f64) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.value_at(&[s, t])?;
        }
        Ok(out)
    }

    /// Partial derivatives of the map, `[∂_s F, ∂_t F]`.
    pub fn tangents(&self, s: f64, t: f64) -> Result<[[f64; 3]; 2]> {
        let vars = Dual::<2>::seed([s, t]);
        let mut out = [[0.0; 3]; 2];
        for (k, c) in self.components.iter().enumerate() {
            let d = c.eval(&vars)?;
            out[0][k] = d.grad[0];
            out[1][k] = d.grad[1];
        }
        Ok(out)
    }

    /// Images of an `n × n` lattice of the parameter rectangle.
    pub fn sample(&self, n: usize) -> Result<Vec<[f64; 3]>> {
        Lattice::new(self.domain, n, n)?.points().map(|q| self.point(q.x, q.y)).collect()
    }
}

/// Lorentzian norm `x² + y² − t²` of a vector.
pub fn lorentz_norm2(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] - v[2] * v[2]
}

/// A scalar function `G(x, y, t)` whose zero set contains a surface.
#[derive(Clone, Debug)]
pub struct ImplicitValidator {
    pub g: Expression,
    pub tolerance: f64,
}

impl ImplicitValidator {
    fn new(text: &str, params: &Params, tolerance: f64) -> Result<Self> {
        Ok(Self { g: parse_with_vars(text, &["x", "y", "t"], params)?, tolerance })
    }

    pub fn value(&self, p: [f64; 3]) -> Result<f64> {
        self.g.value_at(&p)
    }

    pub fn gradient(&self, p: [f64; 3]) -> Result<[f64; 3]> {
        Ok(self.g.eval(&Dual::<3>::seed(p))?.grad)
    }

    pub fn accepts(&self, p: [f64; 3]) -> Result<bool> {
        Ok(self.value(p)?.abs() <= self.tolerance)
    }

    /// Largest `|G|` over the surface's `n × n` parameter lattice.
    pub fn max_defect(&self, surface: &ParametricSurface, n: usize) -> Result<f64> {
        surface.sample(n)?.into_iter().try_fold(0.0f64, |m, p| Ok(m.max(self.value(p)?.abs())))
    }
}

fn params_with_a(a: f64) -> Result<Params> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::DomainViolation(format!("a must be positive, got {a}")));
    }
    Ok(Params::from([("a".to_string(), a)]))
}

/// A cylinder over a circle of radius `a`, translated along the light-like
/// direction `(1, 0, 1)`.
#[derive(Clone, Debug)]
pub struct TiltedCylinder {
    pub a: f64,
    pub surface: ParametricSurface,
    pub validator: ImplicitValidator,
    /// `t = x − √(a² − y²)` and `t = x + √(a² − y²)` on `|y| ≤ 0.9a`.
    pub branches: [GraphField; 2],
}

pub fn tilted_cylinder(a: f64) -> Result<TiltedCylinder> {
    let params = params_with_a(a)?;
    let tau = std::f64::consts::TAU;
    let surface = ParametricSurface::new(
        "tilted-cylinder",
        ["u", "v"],
        ["u + a*cos(v)", "a*sin(v)", "u"],
        Rect::new(-2.0 * a, 2.0 * a, 0.0, tau)?,
        &params,
    )?;
    let validator = ImplicitValidator::new("(x - t)^2 + y^2 - a^2", &params, 1e-10)?;
    let window = Rect::new(-2.0 * a, 2.0 * a, -0.9 * a, 0.9 * a)?;
    let branch = |sign: &str, name: &str| -> Result<GraphField> {
        GraphField::parse(&format!("x {sign} sqrt(a^2 - y^2)"), &params, window).map(|f| f.named(name))
    };
    Ok(TiltedCylinder {
        a,
        surface,
        validator,
        branches: [branch("-", "tilted-cylinder-minus")?, branch("+", "tilted-cylinder-plus")?],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialBranch {
    /// `r > 1/a`
    Outer,
    /// `r < −1/a`
    Inner,
}

/// Circles of radius `|r|` in horizontal planes, centred on a curve; a
/// closed surface after gluing the two radial branches.
#[derive(Clone, Debug)]
pub struct CircleFamily {
    pub a: f64,
    pub branch: RadialBranch,
    pub surface: ParametricSurface,
    pub validator: ImplicitValidator,
}

pub fn circle_family(a: f64, branch: RadialBranch, r_range: (f64, f64)) -> Result<CircleFamily> {
    let params = params_with_a(a)?;
    let (r0, r1) = r_range;
    if !(r0 < r1 && r0.is_finite() && r1.is_finite()) {
        return Err(Error::DomainViolation(format!("invalid radius range [{r0}, {r1}]")));
    }
    let ok = match branch {
        RadialBranch::Outer => r0 > 1.0 / a,
        RadialBranch::Inner => r1 < -1.0 / a,
    };
    if !ok {
        return Err(Error::DomainViolation(format!(
            "radius range [{r0}, {r1}] leaves the {} branch (|r| must exceed 1/a = {})",
            match branch {
                RadialBranch::Outer => "outer",
                RadialBranch::Inner => "inner",
            },
            1.0 / a
        )));
    }
    let shift = "(1/(2*a))*log((a*r - 1)/(a*r + 1))";
    let surface = ParametricSurface::new(
        "circle-family",
        ["r", "theta"],
        [&format!("r + {shift} + r*cos(theta)"), "r*sin(theta)", shift],
        Rect::new(r0, r1, 0.0, std::f64::consts::TAU)?,
        &params,
    )?;
    let validator = ImplicitValidator::new("a*sinh(a*t)*((x - t)^2 + y^2) + 2*(x - t)*cosh(a*t)", &params, 1e-10)?;
    Ok(CircleFamily { a, branch, surface, validator })
}

impl CircleFamily {
    /// Smallest `|∇G|` over an `n × n` parameter lattice.
    pub fn min_gradient_norm(&self, n: usize) -> Result<f64> {
        self.surface.sample(n)?.into_iter().try_fold(f64::INFINITY, |m, p| {
            let g = self.validator.gradient(p)?;
            Ok(m.min((g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()))
        })
    }
}

/// `φ = y + log(tan x)`: a time-like ZMC graph confined to the slab
/// `0 < x < π/2`. The window is `[δ, π/2 − δ] × [−2, 2]`.
pub fn log_tan_slab(delta: f64) -> Result<GraphField> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    if !(delta > 0.0 && delta < half_pi / 2.0) {
        return Err(Error::DomainViolation(format!("slab margin must lie in (0, π/4), got {delta}")));
    }
    GraphField::parse("y + log(tan(x))", &Params::new(), Rect::new(delta, half_pi - delta, -2.0, 2.0)?)
        .map(|f| f.named("log-tan-slab"))
}

/// The helicoid `φ = atan2(y, x)` (minimal) and its dual, the Lorentzian
/// catenoid `ψ = −asinh √(x² + y²)` (maximal), on `[1, 2]²`.
pub fn helicoid_catenoid_pair() -> Result<(GraphField, GraphField)> {
    let rect = Rect::new(1.0, 2.0, 1.0, 2.0)?;
    let none = Params::new();
    Ok((
        GraphField::parse("atan2(y, x)", &none, rect)?.named("helicoid"),
        GraphField::parse("-asinh(sqrt(x^2 + y^2))", &none, rect)?.named("lorentz-catenoid"),
    ))
}

/// Which equation a graph example solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeclaredEquation {
    /// `(1 − ψ_y²)ψ_xx + 2ψ_xψ_yψ_xy + (1 − ψ_x²)ψ_yy = 0`
    Zmc,
    /// `(1 + φ_y²)φ_xx − 2φ_xφ_yφ_xy + (1 + φ_x²)φ_yy = 0`
    Minimal,
    /// Parametric surface, checked through its implicit equation.
    Implicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleKind {
    Graph,
    Parametric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: ExampleKind,
    pub equation: DeclaredEquation,
    pub description: &'static str,
    /// Parameters the example accepts, with defaults.
    pub defaults: Vec<(&'static str, f64)>,
}

pub fn catalog() -> Vec<CatalogEntry> {
    use DeclaredEquation::*;
    use ExampleKind::*;
    let e = |name, kind, equation, description, defaults: &[(&'static str, f64)]| CatalogEntry {
        name,
        kind,
        equation,
        description,
        defaults: defaults.to_vec(),
    };
    vec![
        e("tgraph-exp", Graph, Zmc, "y + exp(x): time-like everywhere", &[]),
        e("tgraph-square", Graph, Zmc, "y + x^2: degenerate light-like line x = 0", &[]),
        e("tgraph-cube", Graph, Zmc, "y + x^3: degenerate light-like line x = 0", &[]),
        e("tgraph-sin", Graph, Zmc, "y + sin(x): degenerate light-like lines x = pi/2 + k pi", &[]),
        e("log-tan-slab", Graph, Zmc, "y + log(tan(x)): time-like, confined to 0 < x < pi/2", &[("delta", 0.05)]),
        e("helicoid", Graph, Minimal, "atan2(y, x) on [1,2]^2", &[]),
        e("lorentz-catenoid", Graph, Zmc, "-asinh(sqrt(x^2+y^2)) on [1,2]^2: maximal", &[]),
        e("tilted-cylinder-minus", Graph, Zmc, "x - sqrt(a^2 - y^2), |y| <= 0.9a", &[("a", 1.0)]),
        e("tilted-cylinder-plus", Graph, Zmc, "x + sqrt(a^2 - y^2), |y| <= 0.9a", &[("a", 1.0)]),
        e("tilted-cylinder", Parametric, Implicit, "(u + a cos v, a sin v, u)", &[("a", 1.0)]),
        e(
            "circle-family",
            Parametric,
            Implicit,
            "circles of radius r > 1/a shifted by log((ar-1)/(ar+1))/(2a)",
            &[("a", 1.0), ("rmin", 1.5), ("rmax", 4.0)],
        ),
    ]
}

/// An example in the uniform form consumed by the other modules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Emitted {
    pub name: String,
    pub kind: ExampleKind,
    pub equation: DeclaredEquation,
    /// Graph examples: `{"field": …}`. Parametric: `{"x", "y", "t", "validator"}`.
    pub expressions: std::collections::BTreeMap<String, String>,
    pub variables: Vec<String>,
    /// Field domain, or the parameter rectangle for parametric examples.
    pub domain: Rect,
    pub params: Params,
}

fn graph_emitted(name: &str, equation: DeclaredEquation, f: &GraphField, params: Params) -> Emitted {
    let expr = f.expression().expect("catalog graphs are expressions");
    Emitted {
        name: name.into(),
        kind: ExampleKind::Graph,
        equation,
        expressions: [("field".to_string(), expr.to_string())].into(),
        variables: expr.vars().to_vec(),
        domain: f.domain(),
        params,
    }
}

fn parametric_emitted(s: &ParametricSurface, v: &ImplicitValidator) -> Emitted {
    let mut expressions = std::collections::BTreeMap::new();
    for (k, c) in ["x", "y", "t"].iter().zip(&s.components) {
        expressions.insert(k.to_string(), c.to_string());
    }
    expressions.insert("validator".into(), v.g.to_string());
    Emitted {
        name: s.name.clone(),
        kind: ExampleKind::Parametric,
        equation: DeclaredEquation::Implicit,
        expressions,
        variables: s.param_names.to_vec(),
        domain: s.domain,
        params: s.params.clone(),
    }
}

/// Build a catalog example. Unknown parameters are rejected; missing ones
/// take their defaults.
pub fn emit(name: &str, overrides: &Params) -> Result<Emitted> {
    let entry = catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::InvalidInput(format!("unknown example `{name}` (see `examples list`)")))?;
    let mut p: Params = entry.defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in overrides {
        if !p.contains_key(k) {
            return Err(Error::InvalidInput(format!("example `{name}` has no parameter `{k}`")));
        }
        p.insert(k.clone(), *v);
    }
    let eq = entry.equation;
    let window = Rect::new(-2.0, 2.0, -2.0, 2.0)?;
    Ok(match name {
        "tgraph-exp" | "tgraph-square" | "tgraph-cube" | "tgraph-sin" => {
            let g = match name {
                "tgraph-exp" => "exp(x)",
                "tgraph-square" => "x^2",
                "tgraph-cube" => "x^3",
                _ => "sin(x)",
            };
            graph_emitted(name, eq, &tgraph(g, &Params::new(), window)?.psi, p)
        }
        "log-tan-slab" => graph_emitted(name, eq, &log_tan_slab(p["delta"])?, p),
        "helicoid" => graph_emitted(name, eq, &helicoid_catenoid_pair()?.0, p),
        "lorentz-catenoid" => graph_emitted(name, eq, &helicoid_catenoid_pair()?.1, p),
        "tilted-cylinder-minus" | "tilted-cylinder-plus" => {
            let c = tilted_cylinder(p["a"])?;
            let f = &c.branches[usize::from(name.ends_with("plus"))];
            graph_emitted(name, eq, f, p)
        }
        "tilted-cylinder" => {
            let c = tilted_cylinder(p["a"])?;
            parametric_emitted(&c.surface, &c.validator)
        }
        _ => {
            let c = circle_family(p["a"], RadialBranch::Outer, (p["rmin"], p["rmax"]))?;
            let mut e = parametric_emitted(&c.surface, &c.validator);
            e.params = p;
            e
        }
    })
}
