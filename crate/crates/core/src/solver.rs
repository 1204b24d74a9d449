//! Finite-difference Newton solver for Dirichlet problems of the minimal
//! surface equation and the maximal (space-like ZMC) equation.
//!
//! Both are written as
//! `(1 + σψ_y²)ψ_xx − 2σψ_xψ_yψ_xy + (1 + σψ_x²)ψ_yy = 0`
//! with σ = +1 for minimal and σ = −1 for maximal graphs, discretised with
//! second-order central differences on a rectangular lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::field::{Lattice, Point2, SampledGrid};
use crate::sparse::{gmres, CsrMatrix, GmresOptions, Ilu0};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equation {
    Minimal,
    Maximal,
}

impl Equation {
    fn sigma(self) -> f64 {
        match self {
            Equation::Minimal => 1.0,
            Equation::Maximal => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Equation::Minimal => "minimal",
            Equation::Maximal => "maximal",
        }
    }
}

impl std::str::FromStr for Equation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minimal" => Ok(Equation::Minimal),
            "maximal" => Ok(Equation::Maximal),
            _ => Err(Error::InvalidInput(format!("unknown equation `{s}` (expected minimal or maximal)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub enum BoundaryData {
    /// Evaluated at every boundary node.
    Function(Expression),
    /// One value per lattice node; only boundary entries are read.
    Nodes(Vec<f64>),
}

#[derive(Clone, Debug, Default)]
pub enum InitialGuess {
    /// Discrete harmonic extension of the boundary data.
    #[default]
    Harmonic,
    /// One value per lattice node; boundary entries are overwritten.
    Values(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: u32,
    pub linear_tol: f64,
    /// Smallest interior discrete B accepted for maximal iterates.
    pub b_floor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iterations: 50, max_halvings: 30, linear_tol: 1e-10, b_floor: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub struct DirichletProblem {
    pub equation: Equation,
    pub lattice: Lattice,
    pub boundary: BoundaryData,
    pub initial: InitialGuess,
    pub options: SolverOptions,
}

impl DirichletProblem {
    pub fn new(equation: Equation, lattice: Lattice, boundary: BoundaryData) -> Self {
        Self { equation, lattice, boundary, initial: InitialGuess::Harmonic, options: SolverOptions::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let lat = &self.lattice;
        if lat.nx < 5 || lat.ny < 5 {
            return Err(Error::InvalidInput(format!("solver needs at least 5x5 nodes, got {}x{}", lat.nx, lat.ny)));
        }
        if let BoundaryData::Nodes(v) = &self.boundary {
            if v.len() != lat.len() {
                return Err(Error::InvalidInput(format!("expected {} boundary values, got {}", lat.len(), v.len())));
            }
        }
        if let InitialGuess::Values(v) = &self.initial {
            if v.len() != lat.len() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("initial guess must hold one finite value per node".into()));
            }
        }
        Ok(())
    }

    /// Boundary values on the full lattice (interior entries zero).
    fn boundary_values(&self) -> Result<Vec<f64>> {
        let lat = &self.lattice;
        let mut out = vec![0.0; lat.len()];
        for j in 0..lat.ny {
            for i in 0..lat.nx {
                if !lat.is_boundary(i, j) {
                    continue;
                }
                let k = lat.index(i, j);
                let p = lat.node(i, j);
                let v = match &self.boundary {
                    BoundaryData::Function(e) => e.value_at(&[p.x, p.y])?,
                    BoundaryData::Nodes(v) => v[k],
                };
                if !v.is_finite() {
                    return Err(Error::InvalidInput(format!("boundary data not finite at ({}, {})", p.x, p.y)));
                }
                out[k] = v;
            }
        }
        Ok(out)
    }
}

/// Central-difference derivatives `[f_x, f_y, f_xx, f_xy, f_yy]` at an interior node.
fn stencil(v: &[f64], lat: &Lattice, i: usize, j: usize) -> [f64; 5] {
    let (hx, hy) = (lat.hx(), lat.hy());
    let f = |di: isize, dj: isize| v[lat.index((i as isize + di) as usize, (j as isize + dj) as usize)];
    let c = f(0, 0);
    [
        (f(1, 0) - f(-1, 0)) / (2.0 * hx),
        (f(0, 1) - f(0, -1)) / (2.0 * hy),
        (f(1, 0) - 2.0 * c + f(-1, 0)) / (hx * hx),
        (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4.0 * hx * hy),
        (f(0, 1) - 2.0 * c + f(0, -1)) / (hy * hy),
    ]
}

fn operator(sigma: f64, d: [f64; 5]) -> f64 {
    let [px, py, pxx, pxy, pyy] = d;
    (1.0 + sigma * py * py) * pxx - 2.0 * sigma * px * py * pxy + (1.0 + sigma * px * px) * pyy
}

fn interior_nodes(lat: &Lattice) -> impl Iterator<Item = (usize, usize)> + '_ {
    (1..lat.ny - 1).flat_map(move |j| (1..lat.nx - 1).map(move |i| (i, j)))
}

#[cfg(feature = "parallel")]
fn map_interior<T: Send>(lat: &Lattice, f: impl Fn(usize, usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    let w = lat.nx - 2;
    (0..w * (lat.ny - 2)).into_par_iter().map(|k| f(k % w + 1, k / w + 1)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_interior<T: Send>(lat: &Lattice, f: impl Fn(usize, usize) -> T + Sync + Send) -> Vec<T> {
    interior_nodes(lat).map(|(i, j)| f(i, j)).collect()
}

fn residual_sigma(v: &[f64], lat: &Lattice, sigma: f64) -> Vec<f64> {
    map_interior(lat, |i, j| operator(sigma, stencil(v, lat, i, j)))
}

/// Discrete residual at the interior nodes, ordered row by row
/// (`j` outer, `i` inner), `(nx − 2)(ny − 2)` entries.
pub fn discrete_residual(grid: &SampledGrid, equation: Equation) -> Result<Vec<f64>> {
    let lat = grid.lattice();
    if lat.nx < 5 || lat.ny < 5 {
        return Err(Error::InvalidInput(format!(
            "discrete residual needs at least 5x5 nodes, got {}x{}",
            lat.nx, lat.ny
        )));
    }
    Ok(residual_sigma(grid.values(), lat, equation.sigma()))
}

/// Interior discrete `B = 1 − f_x² − f_y²`, same ordering as the residual.
pub fn discrete_b(grid: &SampledGrid) -> Vec<f64> {
    let lat = grid.lattice();
    map_interior(lat, |i, j| {
        let d = stencil(grid.values(), lat, i, j);
        1.0 - d[0] * d[0] - d[1] * d[1]
    })
}

fn min_b(v: &[f64], lat: &Lattice) -> (f64, usize, usize) {
    interior_nodes(lat)
        .map(|(i, j)| {
            let d = stencil(v, lat, i, j);
            (1.0 - d[0] * d[0] - d[1] * d[1], i, j)
        })
        .fold((f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 { b } else { a })
}

fn inf_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m: f64, x| if m.is_nan() || x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

/// Jacobian of the interior residual with respect to the interior values.
fn jacobian(v: &[f64], lat: &Lattice, sigma: f64) -> CsrMatrix {
    let (hx, hy) = (lat.hx(), lat.hy());
    let w = lat.nx - 2;
    let unknown = |i: usize, j: usize| (!lat.is_boundary(i, j)).then(|| (j - 1) * w + (i - 1));
    let rows = map_interior(lat, |i, j| {
        let [px, py, pxx, pxy, pyy] = stencil(v, lat, i, j);
        let r_px = 2.0 * sigma * (px * pyy - py * pxy);
        let r_py = 2.0 * sigma * (py * pxx - px * pxy);
        let r_pxx = 1.0 + sigma * py * py;
        let r_pyy = 1.0 + sigma * px * px;
        let r_pxy = -2.0 * sigma * px * py;
        let cross = r_pxy / (4.0 * hx * hy);
        let taps = [
            (0, 0, -2.0 * r_pxx / (hx * hx) - 2.0 * r_pyy / (hy * hy)),
            (1, 0, r_px / (2.0 * hx) + r_pxx / (hx * hx)),
            (-1, 0, -r_px / (2.0 * hx) + r_pxx / (hx * hx)),
            (0, 1, r_py / (2.0 * hy) + r_pyy / (hy * hy)),
            (0, -1, -r_py / (2.0 * hy) + r_pyy / (hy * hy)),
            (1, 1, cross),
            (-1, -1, cross),
            (1, -1, -cross),
            (-1, 1, -cross),
        ];
        taps.iter()
            .filter_map(|&(di, dj, val)| {
                unknown((i as isize + di) as usize, (j as isize + dj) as usize).map(|c| (c, val))
            })
            .collect::<Vec<_>>()
    });
    CsrMatrix::from_rows(w * (lat.ny - 2), rows)
}

/// Solve `J δ = −r` to the configured relative tolerance.
fn newton_direction(
    v: &[f64],
    lat: &Lattice,
    sigma: f64,
    r: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, usize)> {
    let j = jacobian(v, lat, sigma);
    let ilu = Ilu0::new(&j)?;
    let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
    let mut delta = vec![0.0; rhs.len()];
    let gopts = GmresOptions { rel_tol: opts.linear_tol, ..GmresOptions::default() };
    let stats = gmres(&j, &rhs, &mut delta, &ilu, &gopts)?;
    Ok((delta, stats.iterations))
}

fn add_interior(v: &mut [f64], lat: &Lattice, delta: &[f64], t: f64) {
    for (k, (i, j)) in interior_nodes(lat).enumerate() {
        v[lat.index(i, j)] += t * delta[k];
    }
}

/// Convergence diagnostics of a successful solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub equation: Equation,
    pub nx: usize,
    pub ny: usize,
    pub iterations: usize,
    /// Recomputed from the returned values, not carried over from the loop.
    pub final_residual: f64,
    /// Residual ∞-norm of the initial guess and after each Newton step.
    pub residual_history: Vec<f64>,
    /// Accepted step length per Newton step.
    pub damping_history: Vec<f64>,
    pub linear_iterations: Vec<usize>,
    /// Smallest interior discrete B (maximal equation only).
    pub min_b: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct GridSolution {
    pub grid: SampledGrid,
    pub report: ConvergenceReport,
}

impl GridSolution {
    /// Largest nodal deviation from `exact`.
    pub fn max_error(&self, exact: impl Fn(Point2) -> f64) -> f64 {
        let lat = self.grid.lattice();
        lat.points().zip(self.grid.values()).map(|(p, v)| (v - exact(p)).abs()).fold(0.0, f64::max)
    }
}

/// Damped Newton iteration on the interior unknowns.
pub fn solve(problem: &DirichletProblem) -> Result<GridSolution> {
    problem.validate()?;
    let lat = &problem.lattice;
    let opts = &problem.options;
    let sigma = problem.equation.sigma();
    let maximal = problem.equation == Equation::Maximal;

    let mut v = problem.boundary_values()?;
    match &problem.initial {
        InitialGuess::Harmonic => {
            let r = residual_sigma(&v, lat, 0.0);
            let (delta, _) = newton_direction(&v, lat, 0.0, &r, opts)?;
            add_interior(&mut v, lat, &delta, 1.0);
        }
        InitialGuess::Values(init) => {
            for (i, j) in interior_nodes(lat) {
                let k = lat.index(i, j);
                v[k] = init[k];
            }
        }
    }

    let check_causal = |v: &[f64], iteration: usize, last_residual: f64| -> Result<()> {
        if maximal {
            let (b, i, j) = min_b(v, lat);
            if b.is_nan() || b <= opts.b_floor {
                return Err(Error::CausalTypeViolation { iteration, min_b: b, i, j, last_residual });
            }
        }
        Ok(())
    };

    let mut r = residual_sigma(&v, lat, sigma);
    let mut norm = inf_norm(&r);
    check_causal(&v, 0, norm)?;
    let mut residual_history = vec![norm];
    let mut damping_history = Vec::new();
    let mut linear_iterations = Vec::new();
    let mut iterations = 0;

    while iterations == 0 || norm >= opts.tol {
        if iterations >= opts.max_iterations {
            return Err(Error::MaxIterations { iterations, last_residual: norm, stalled: false });
        }
        iterations += 1;
        let (delta, lin) = newton_direction(&v, lat, sigma, &r, opts)?;
        linear_iterations.push(lin);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let mut trial = v.clone();
            add_interior(&mut trial, lat, &delta, t);
            let rt = residual_sigma(&trial, lat, sigma);
            let nt = inf_norm(&rt);
            if nt < norm || nt < opts.tol {
                accepted = Some((trial, rt, nt));
                break;
            }
            t *= 0.5;
        }
        let Some((trial, rt, nt)) = accepted else {
            return Err(Error::MaxIterations { iterations, last_residual: norm, stalled: true });
        };
        check_causal(&trial, iterations, nt)?;
        (v, r, norm) = (trial, rt, nt);
        residual_history.push(norm);
        damping_history.push(t);
    }

    let grid = SampledGrid::new(*lat, v)?;
    let final_residual = inf_norm(&discrete_residual(&grid, problem.equation)?);
    let min_b = maximal.then(|| min_b(grid.values(), lat).0);
    Ok(GridSolution {
        grid,
        report: ConvergenceReport {
            equation: problem.equation,
            nx: lat.nx,
            ny: lat.ny,
            iterations,
            final_residual,
            residual_history,
            damping_history,
            linear_iterations,
            min_b,
        },
    })
}

/// Diagnostics of a failed solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub kind: String,
    pub message: String,
    pub last_residual: Option<f64>,
}

impl FailureReport {
    pub fn from_error(e: &Error) -> Self {
        Self { kind: e.code().to_string(), message: e.to_string(), last_residual: e.last_residual() }
    }
}

/// Plain-text summary of a convergence report.
pub fn convergence_report(report: &ConvergenceReport) -> String {
    let mut s = format!(
        "equation: {}\nlattice: {}x{}\niterations: {}\nfinal residual: {:.3e}\n",
        report.equation.as_str(),
        report.nx,
        report.ny,
        report.iterations,
        report.final_residual
    );
    let hist: Vec<String> = report.residual_history.iter().map(|r| format!("{r:.3e}")).collect();
    s += &format!("residual history: {}\n", hist.join(" "));
    let damp: Vec<String> = report.damping_history.iter().map(|t| t.to_string()).collect();
    s += &format!("damping: {}\n", damp.join(" "));
    if let Some(b) = report.min_b {
        s += &format!("min B: {b:.6}\n");
    }
    s
}

pub fn failure_report_text(f: &FailureReport) -> String {
    let mut s = format!("failed: {}\n{}\n", f.kind, f.message);
    if let Some(r) = f.last_residual {
        s += &format!("last residual: {r:.3e}\n");
    }
    s
}

/// Node errors of one problem family solved at several resolutions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub resolutions: Vec<(usize, usize)>,
    pub errors: Vec<f64>,
    /// `errors[k] / errors[k + 1]`.
    pub ratios: Vec<f64>,
}

/// Solve `problem` at each resolution and compare with `exact`.
pub fn refinement_study(
    problem: &DirichletProblem,
    resolutions: &[(usize, usize)],
    exact: impl Fn(Point2) -> f64,
) -> Result<RefinementStudy> {
    let mut errors = Vec::new();
    for &(nx, ny) in resolutions {
        let p = DirichletProblem { lattice: Lattice::new(problem.lattice.rect, nx, ny)?, ..problem.clone() };
        errors.push(solve(&p)?.max_error(&exact));
    }
    let ratios = errors.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(RefinementStudy { resolutions: resolutions.to_vec(), errors, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Params};
    use crate::field::Rect;

    fn problem(eq: Equation, boundary: &str, rect: (f64, f64, f64, f64), n: usize) -> DirichletProblem {
        let lat = Lattice::new(Rect::new(rect.0, rect.1, rect.2, rect.3).unwrap(), n, n).unwrap();
        DirichletProblem::new(eq, lat, BoundaryData::Function(parse(boundary, &Params::new()).unwrap()))
    }

    #[test]
    fn quadratic_residual_is_exact() {
        let lat = Lattice::new(Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap(), 9, 9).unwrap();
        let vals = lat.points().map(|p| p.x * p.x + p.y * p.y).collect();
        let grid = SampledGrid::new(lat, vals).unwrap();
        let r = discrete_residual(&grid, Equation::Minimal).unwrap();
        for ((i, j), ri) in interior_nodes(&lat).zip(&r) {
            let p = lat.node(i, j);
            let expect = (1.0 + 4.0 * p.y * p.y) * 2.0 + (1.0 + 4.0 * p.x * p.x) * 2.0;
            assert!((ri - expect).abs() < 1e-11, "{ri} vs {expect}");
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let lat = Lattice::new(Rect::new(1.0, 2.0, 1.0, 2.0).unwrap(), 6, 7).unwrap();
        let v: Vec<f64> = lat.points().map(|p| 0.3 * (p.x * p.y).sin() + 0.1 * p.x * p.x).collect();
        for sigma in [1.0, -1.0] {
            let jac = jacobian(&v, &lat, sigma);
            let r0 = residual_sigma(&v, &lat, sigma);
            for (c, (i, j)) in interior_nodes(&lat).enumerate() {
                let h = 1e-6;
                let mut vp = v.clone();
                vp[lat.index(i, j)] += h;
                let mut vm = v.clone();
                vm[lat.index(i, j)] -= h;
                let (rp, rm) = (residual_sigma(&vp, &lat, sigma), residual_sigma(&vm, &lat, sigma));
                for row in 0..r0.len() {
                    let fd = (rp[row] - rm[row]) / (2.0 * h);
                    assert!((fd - jac.get(row, c)).abs() < 1e-4 * (1.0 + fd.abs()), "sigma {sigma} ({row},{c})");
                }
            }
        }
    }

    #[test]
    fn plane_is_reproduced_in_one_step() {
        for eq in [Equation::Minimal, Equation::Maximal] {
            let sol = solve(&problem(eq, "0.2*x - 0.3*y + 1", (0.0, 1.0, 0.0, 2.0), 9)).unwrap();
            assert_eq!(sol.report.iterations, 1);
            assert!(sol.report.final_residual < 1e-13);
            assert!(sol.max_error(|p| 0.2 * p.x - 0.3 * p.y + 1.0) < 1e-13);
            assert!(convergence_report(&sol.report).contains("iterations: 1"));
        }
    }

    #[test]
    fn catenoid_converges() {
        let sol = solve(&problem(Equation::Maximal, "-asinh(sqrt(x^2+y^2))", (1.0, 2.0, 1.0, 2.0), 17)).unwrap();
        assert!(sol.report.final_residual < 1e-10);
        assert!(sol.report.min_b.unwrap() > 0.0);
        assert!(sol.max_error(|p| -(p.x.hypot(p.y)).asinh()) < 2e-3);
    }

    #[test]
    fn scherk_minimal_converges() {
        // ln(cos y / cos x) is minimal on |x|, |y| < π/2.
        let sol = solve(&problem(Equation::Minimal, "log(cos(y)/cos(x))", (-1.0, 1.0, -1.0, 1.0), 21)).unwrap();
        assert!(sol.report.final_residual < 1e-10);
        assert!(sol.max_error(|p| (p.y.cos() / p.x.cos()).ln()) < 1e-2);
    }

    #[test]
    fn time_like_boundary_is_rejected() {
        let e = solve(&problem(Equation::Maximal, "y + x^2", (-1.0, 1.0, -1.0, 1.0), 9)).unwrap_err();
        assert!(matches!(e, Error::CausalTypeViolation { .. }), "{e:?}");
        let f = FailureReport::from_error(&e);
        assert_eq!(f.kind, "causal_type_violation");
        assert!(f.last_residual.is_some());
    }

    #[test]
    fn small_lattices_are_rejected() {
        assert!(solve(&problem(Equation::Minimal, "x", (0.0, 1.0, 0.0, 1.0), 4)).is_err());
    }
}
