//! Chaplygin gas flows and the stream function ↔ potential duality.
//!
//! A stream function ψ with `B = 1 − |∇ψ|² ≠ 0` describes a Chaplygin gas
//! flow (`ρc = 1`) with density `ρ = √(εB)`, `ε = sign B`. Its potential φ is
//! recovered from the closed one-form `(ψ_y, −ψ_x)/ρ`; conversely
//! `∇ψ = (−φ_y, φ_x)/√(|∇φ|² + ε)`. For ε = +1 this pairs maximal graphs with
//! Euclidean minimal graphs; for ε = −1 it maps time-like ZMC graphs to
//! time-like ZMC graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GraphField, Lattice, Point2, Rect, SampledGrid};
use crate::geometry::{bernoulli, TAU_LIGHT_EXACT};
use crate::jet::{Dual, Jet2, Scalar};
use crate::quadrature::composite_simpson;

/// Sign of the Bernoulli constant after normalisation (`μ = ε`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Epsilon {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Epsilon {
    pub fn value(self) -> f64 {
        match self {
            Epsilon::Plus => 1.0,
            Epsilon::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Epsilon::Plus => 1,
            Epsilon::Minus => -1,
        }
    }

    pub fn of(b: f64) -> Self {
        if b > 0.0 {
            Epsilon::Plus
        } else {
            Epsilon::Minus
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Stream function → potential.
    ToPotential,
    /// Potential → stream function.
    ToStream,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowRegime {
    SubSonic,
    SuperSonic,
    Sonic,
}

impl FlowRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowRegime::SubSonic => "sub-sonic",
            FlowRegime::SuperSonic => "super-sonic",
            FlowRegime::Sonic => "sonic",
        }
    }

    pub fn from_b(b: f64, tau_light: f64) -> Self {
        if b > tau_light {
            FlowRegime::SubSonic
        } else if b < -tau_light {
            FlowRegime::SuperSonic
        } else {
            FlowRegime::Sonic
        }
    }
}

/// Local state of the Chaplygin gas flow whose stream function is ψ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaplyginState {
    pub epsilon: Epsilon,
    pub rho: f64,
    pub velocity: [f64; 2],
    pub sound_speed: f64,
    pub pressure: f64,
    pub p0: f64,
    pub regime: FlowRegime,
}

impl ChaplyginState {
    pub fn speed_squared(&self) -> f64 {
        self.velocity[0] * self.velocity[0] + self.velocity[1] * self.velocity[1]
    }
}

pub fn chaplygin_state_of(jet: &Jet2, p: Point2, p0: f64, tau_light: f64) -> Result<ChaplyginState> {
    let b = bernoulli(jet.gx, jet.gy);
    if b.abs() <= tau_light {
        return Err(Error::SonicPoint { point: p, b });
    }
    let epsilon = Epsilon::of(b);
    let rho = (epsilon.value() * b).sqrt();
    Ok(ChaplyginState {
        epsilon,
        rho,
        velocity: [jet.gy / rho, -jet.gx / rho],
        sound_speed: 1.0 / rho,
        pressure: p0 - 1.0 / rho,
        p0,
        regime: FlowRegime::from_b(b, tau_light),
    })
}

/// Flow state at `p` of the stream function `f`.
pub fn chaplygin_state(f: &GraphField, p: Point2, p0: f64, tau_light: f64) -> Result<ChaplyginState> {
    chaplygin_state_of(&f.jet2(p)?, p, p0, tau_light)
}

/// Anything that can report a gradient field over a rectangle.
pub trait GradientSource {
    fn gradient(&self, p: Point2) -> Result<[f64; 2]>;

    fn domain(&self) -> Rect;

    /// Lattice spacing when the gradient comes from finite differences.
    fn spacing(&self) -> Option<f64> {
        None
    }
}

impl<T: GradientSource + ?Sized> GradientSource for &T {
    fn gradient(&self, p: Point2) -> Result<[f64; 2]> {
        (**self).gradient(p)
    }
    fn domain(&self) -> Rect {
        (**self).domain()
    }
    fn spacing(&self) -> Option<f64> {
        (**self).spacing()
    }
}

impl GradientSource for GraphField {
    fn gradient(&self, p: Point2) -> Result<[f64; 2]> {
        self.jet2(p).map(|j| j.gradient())
    }
    fn domain(&self) -> Rect {
        GraphField::domain(self)
    }
    fn spacing(&self) -> Option<f64> {
        self.grid().map(|g| g.lattice().spacing())
    }
}

fn check_form(grad: [f64; 2], p: Point2, direction: Direction, epsilon: Epsilon, tau: f64) -> Result<()> {
    match direction {
        Direction::ToPotential => {
            let b = bernoulli(grad[0], grad[1]);
            if b.abs() <= tau {
                return Err(Error::SonicPoint { point: p, b });
            }
            if Epsilon::of(b) != epsilon {
                return Err(Error::CausalMismatch { point: p, b, epsilon: epsilon.as_i8() });
            }
        }
        Direction::ToStream => {
            let s2 = grad[0] * grad[0] + grad[1] * grad[1] + epsilon.value();
            if s2 <= tau {
                return Err(Error::DegenerateDenominator { point: p, value: s2 });
            }
        }
    }
    Ok(())
}

/// The dual one-form as a function of the gradient, in any scalar type.
fn form_of<S: Scalar>(gx: S, gy: S, direction: Direction, epsilon: Epsilon) -> [S; 2] {
    let eps = epsilon.value();
    match direction {
        Direction::ToPotential => {
            let eb = bernoulli(gx, gy) * S::constant(eps);
            let rho = sqrt(eb);
            [gy / rho, -gx / rho]
        }
        Direction::ToStream => {
            let s = sqrt(gx * gx + gy * gy + S::constant(eps));
            [-gy / s, gx / s]
        }
    }
}

fn sqrt<S: Scalar>(a: S) -> S {
    let v = a.value();
    let s = v.sqrt();
    a.chain(s, 0.5 / s, -0.25 / (s * v))
}

/// Evaluate the dual one-form from a gradient value.
pub fn one_form(grad: [f64; 2], p: Point2, direction: Direction, epsilon: Epsilon, tau: f64) -> Result<[f64; 2]> {
    check_form(grad, p, direction, epsilon, tau)?;
    Ok(form_of(grad[0], grad[1], direction, epsilon))
}

/// `(ψ_y, −ψ_x)/√(εB)` (to potential) or `(−φ_y, φ_x)/√(|∇φ|² + ε)` (to stream).
pub fn dual_one_form(
    f: &(impl GradientSource + ?Sized),
    p: Point2,
    direction: Direction,
    epsilon: Epsilon,
    tau: f64,
) -> Result<[f64; 2]> {
    one_form(f.gradient(p)?, p, direction, epsilon, tau)
}

/// `∂_y ω₁ − ∂_x ω₂` of the dual one-form, from the exact 2-jet of `f`.
/// Vanishes exactly where `f` solves the matching equation.
pub fn closedness_defect(f: &GraphField, p: Point2, direction: Direction, epsilon: Epsilon, tau: f64) -> Result<f64> {
    let j = f.jet2(p)?;
    check_form(j.gradient(), p, direction, epsilon, tau)?;
    let gx = Dual::<2> { value: j.gx, grad: [j.hxx, j.hxy] };
    let gy = Dual::<2> { value: j.gy, grad: [j.hxy, j.hyy] };
    let [w1, w2] = form_of(gx, gy, direction, epsilon);
    Ok(w1.grad[1] - w2.grad[0])
}

/// One application of the duality, viewed as a gradient field in its own right.
#[derive(Clone, Debug)]
pub struct DualForm<S> {
    pub source: S,
    pub direction: Direction,
    pub epsilon: Epsilon,
    pub tau: f64,
}

impl<S: GradientSource> DualForm<S> {
    pub fn new(source: S, direction: Direction, epsilon: Epsilon) -> Self {
        Self { source, direction, epsilon, tau: TAU_LIGHT_EXACT }
    }
}

impl<S: GradientSource> GradientSource for DualForm<S> {
    fn gradient(&self, p: Point2) -> Result<[f64; 2]> {
        dual_one_form(&self.source, p, self.direction, self.epsilon, self.tau)
    }
    fn domain(&self) -> Rect {
        self.source.domain()
    }
    fn spacing(&self) -> Option<f64> {
        self.source.spacing()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualizeOptions {
    /// Per-segment stopping rule for successive Simpson refinements.
    pub quad_tol: f64,
    /// Exactness threshold is this multiple of `quad_tol`.
    pub exactness_factor: f64,
    /// Extra allowance `c · h²` when the gradient comes from a sampled grid.
    pub sampled_defect_factor: f64,
    /// Nodes compared between the two L-path orders.
    pub check_nodes: usize,
    pub seed: u64,
    pub tau: f64,
}

impl Default for DualizeOptions {
    fn default() -> Self {
        Self {
            quad_tol: 1e-10,
            exactness_factor: 100.0,
            sampled_defect_factor: 10.0,
            check_nodes: 20,
            seed: 0x5eed,
            tau: TAU_LIGHT_EXACT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathScheme {
    /// Along the base row first, then along each column.
    XFirstLPath,
}

#[derive(Clone, Debug)]
pub struct DualResult {
    pub phi: GraphField,
    pub base: Point2,
    pub base_value: f64,
    pub scheme: PathScheme,
    /// Largest disagreement between x-first and y-first L-paths.
    pub path_defect: f64,
    pub exactness_threshold: f64,
    pub direction: Direction,
    pub epsilon: Epsilon,
}

/// Summary of a [`DualResult`] for reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualMeta {
    pub base: Point2,
    pub base_value: f64,
    pub scheme: PathScheme,
    pub path_defect: f64,
    pub exactness_threshold: f64,
    pub direction: Direction,
    pub epsilon: Epsilon,
}

impl DualResult {
    pub fn meta(&self) -> DualMeta {
        DualMeta {
            base: self.base,
            base_value: self.base_value,
            scheme: self.scheme,
            path_defect: self.path_defect,
            exactness_threshold: self.exactness_threshold,
            direction: self.direction,
            epsilon: self.epsilon,
        }
    }
}

/// Integrals of `g` from `start` to every entry of the ascending `nodes`,
/// accumulated segment by segment outward from `start`.
fn accumulate(start: f64, nodes: &[f64], tol: f64, g: &impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    let mut out = vec![0.0; nodes.len()];
    let k = nodes.partition_point(|&v| v < start);
    let (mut cur, mut acc) = (start, 0.0);
    for m in k..nodes.len() {
        acc += composite_simpson(g, cur, nodes[m], tol)?;
        cur = nodes[m];
        out[m] = acc;
    }
    let (mut cur, mut acc) = (start, 0.0);
    for m in (0..k).rev() {
        acc += composite_simpson(g, cur, nodes[m], tol)?;
        cur = nodes[m];
        out[m] = acc;
    }
    Ok(out)
}

/// Integrate the dual one-form of `f` over `lattice` starting from
/// `base_value` at `base`.
///
/// Every node is reached by the L-path that runs along `y = base.y` and then
/// vertically. A second, y-first L-path to a random subset of nodes gives the
/// path-independence defect; a defect beyond the exactness threshold means the
/// form is not closed (`f` does not solve its equation) and is reported as
/// [`Error::NonExactForm`].
pub fn dualize(
    f: &(impl GradientSource + ?Sized),
    lattice: &Lattice,
    base: Point2,
    base_value: f64,
    direction: Direction,
    epsilon: Epsilon,
    opts: &DualizeOptions,
) -> Result<DualResult> {
    if !f.domain().contains_rect(&lattice.rect) {
        return Err(Error::InvalidInput("dualization lattice exceeds the field domain".into()));
    }
    if !lattice.rect.contains(base) {
        return Err(Error::OutOfDomain(base));
    }
    let omega = |p: Point2| -> Result<[f64; 2]> { one_form(f.gradient(p)?, p, direction, epsilon, opts.tau) };
    let xs: Vec<f64> = (0..lattice.nx).map(|i| lattice.x(i)).collect();
    let ys: Vec<f64> = (0..lattice.ny).map(|j| lattice.y(j)).collect();
    let tol = opts.quad_tol;

    let spine = accumulate(base.x, &xs, tol, &|x| Ok(omega(Point2::new(x, base.y))?[0]))?;
    let mut integrals = vec![0.0; lattice.len()];
    for (i, &x) in xs.iter().enumerate() {
        let column = accumulate(base.y, &ys, tol, &|y| Ok(omega(Point2::new(x, y))?[1]))?;
        for (j, c) in column.into_iter().enumerate() {
            integrals[lattice.index(i, j)] = spine[i] + c;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let left_spine = accumulate(base.y, &ys, tol, &|y| Ok(omega(Point2::new(base.x, y))?[1]))?;
    let mut path_defect = 0.0f64;
    for _ in 0..opts.check_nodes {
        let (i, j) = (rng.random_range(0..lattice.nx), rng.random_range(0..lattice.ny));
        let y = ys[j];
        let row = accumulate(base.x, &xs, tol, &|x| Ok(omega(Point2::new(x, y))?[0]))?;
        let other = left_spine[j] + row[i];
        path_defect = path_defect.max((other - integrals[lattice.index(i, j)]).abs());
    }

    let mut exactness_threshold = opts.exactness_factor * opts.quad_tol;
    if let Some(h) = f.spacing() {
        exactness_threshold = exactness_threshold.max(opts.sampled_defect_factor * h * h);
    }
    if path_defect > exactness_threshold {
        return Err(Error::NonExactForm { defect: path_defect, threshold: exactness_threshold });
    }

    let values = integrals.into_iter().map(|v| base_value + v).collect();
    let grid = SampledGrid::new(*lattice, values)?;
    Ok(DualResult {
        phi: GraphField::sampled(grid).named("dual"),
        base,
        base_value,
        scheme: PathScheme::XFirstLPath,
        path_defect,
        exactness_threshold,
        direction,
        epsilon,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleDualReport {
    pub epsilon: Epsilon,
    /// +1 when the double dual should reproduce ∇f, −1 when it should negate it.
    pub expected_sign: f64,
    /// max |∇(dual∘dual f) − sign·∇f| over the lattice.
    pub gradient_defect: f64,
    /// max |(dual∘dual f) − sign·f| over the lattice, with matching base values.
    pub value_defect: f64,
    pub first_path_defect: f64,
    pub second_path_defect: f64,
}

/// Apply the duality twice and compare with the start.
///
/// ε = +1 runs potential → stream → potential and should return ∇f. ε = −1
/// applies the stream map twice; that composition squares a quarter turn, so
/// the gradient comes back negated.
pub fn double_dual_check(
    f: &GraphField,
    lattice: &Lattice,
    epsilon: Epsilon,
    opts: &DualizeOptions,
) -> Result<DoubleDualReport> {
    let first = DualForm { source: f, direction: Direction::ToStream, epsilon, tau: opts.tau };
    let second_direction = match epsilon {
        Epsilon::Plus => Direction::ToPotential,
        Epsilon::Minus => Direction::ToStream,
    };
    let expected_sign = match epsilon {
        Epsilon::Plus => 1.0,
        Epsilon::Minus => -1.0,
    };
    let second = DualForm { source: first.clone(), direction: second_direction, epsilon, tau: opts.tau };

    let base = lattice.node(0, 0);
    let d1 = dualize(f, lattice, base, 0.0, Direction::ToStream, epsilon, opts)?;
    let d2 = dualize(&first, lattice, base, expected_sign * f.value(base)?, second_direction, epsilon, opts)?;

    let mut gradient_defect = 0.0f64;
    let mut value_defect = 0.0f64;
    let grid = d2.phi.grid().expect("dualize returns a sampled field");
    for j in 0..lattice.ny {
        for i in 0..lattice.nx {
            let p = lattice.node(i, j);
            let g = second.gradient(p)?;
            let jf = f.jet2(p)?;
            gradient_defect = gradient_defect.max((g[0] - expected_sign * jf.gx).hypot(g[1] - expected_sign * jf.gy));
            value_defect = value_defect.max((grid.at(i, j) - expected_sign * jf.value).abs());
        }
    }
    Ok(DoubleDualReport {
        epsilon,
        expected_sign,
        gradient_defect,
        value_defect,
        first_path_defect: d1.path_defect,
        second_path_defect: d2.path_defect,
    })
}

/// Potential values along the horizontal line `y`, approaching a vertical
/// line `x = x0` of degenerate light-like points of the stream function.
///
/// The potential is normalised to vanish at `(anchor, y)`; each returned
/// entry is `|φ(x_k, y)|`. Segments are split geometrically in the distance
/// to `x0` so the quadrature stays well conditioned near the line. The probe
/// approaches sonic points on purpose, so only `B = 0` exactly is rejected.
pub fn divergence_probe(
    f: &(impl GradientSource + ?Sized),
    x0: f64,
    anchor: f64,
    xs: &[f64],
    y: f64,
    epsilon: Epsilon,
    opts: &DualizeOptions,
) -> Result<Vec<f64>> {
    let side = (anchor - x0).signum();
    let mut prev = anchor;
    for &x in xs {
        let (d_prev, d) = ((prev - x0) * side, (x - x0) * side);
        if !(d > 0.0 && d < d_prev) {
            return Err(Error::InvalidInput(format!(
                "probe abscissae must approach x0 = {x0} strictly monotonically from the anchor side"
            )));
        }
        prev = x;
    }
    let omega1 = |x: f64| -> Result<f64> {
        let p = Point2::new(x, y);
        Ok(one_form(f.gradient(p)?, p, Direction::ToPotential, epsilon, 0.0)?[0])
    };
    let mut out = Vec::with_capacity(xs.len());
    let (mut phi, mut cur) = (0.0, anchor);
    for &x in xs {
        // Pieces whose distances to x0 differ by at most a factor of two.
        while (cur - x0) * side > 2.0 * (x - x0) * side {
            let next = x0 + 0.5 * (cur - x0);
            phi += composite_simpson(omega1, cur, next, opts.quad_tol)?;
            cur = next;
        }
        phi += composite_simpson(omega1, cur, x, opts.quad_tol)?;
        cur = x;
        out.push(phi.abs());
    }
    Ok(out)
}
