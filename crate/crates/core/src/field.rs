//! Scalar fields over rectangles: expression-backed (exact jets by forward
//! AD) or sampled on a uniform lattice (finite-difference jets).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{self, Expression, Params};
use crate::jet::Jet2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

/// Closed axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let finite = [x0, x1, y0, y1].iter().all(|v| v.is_finite());
        if !finite || x0 >= x1 || y0 >= y1 {
            return Err(Error::InvalidInput(format!("degenerate rectangle [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    /// Membership up to a rounding-level slack; nothing further is tolerated.
    pub fn contains(&self, p: Point2) -> bool {
        let sx = 1e-12 * (1.0 + self.x0.abs().max(self.x1.abs()));
        let sy = 1e-12 * (1.0 + self.y0.abs().max(self.y1.abs()));
        p.x >= self.x0 - sx && p.x <= self.x1 + sx && p.y >= self.y0 - sy && p.y <= self.y1 + sy
    }

    pub fn contains_rect(&self, o: &Rect) -> bool {
        self.contains(Point2::new(o.x0, o.y0)) && self.contains(Point2::new(o.x1, o.y1))
    }
}

/// Uniform `nx × ny` node set on a rectangle, row-major (`j * nx + i`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub rect: Rect,
    pub nx: usize,
    pub ny: usize,
}

impl Lattice {
    pub fn new(rect: Rect, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidInput(format!("lattice needs at least 2x2 nodes, got {nx}x{ny}")));
        }
        Ok(Self { rect, nx, ny })
    }

    pub fn hx(&self) -> f64 {
        self.rect.width() / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        self.rect.height() / (self.ny - 1) as f64
    }

    /// Largest of the two spacings.
    pub fn spacing(&self) -> f64 {
        self.hx().max(self.hy())
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.rect.x1
        } else {
            self.rect.x0 + i as f64 * self.hx()
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            self.rect.y1
        } else {
            self.rect.y0 + j as f64 * self.hy()
        }
    }

    pub fn node(&self, i: usize, j: usize) -> Point2 {
        Point2::new(self.x(i), self.y(j))
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All nodes in row-major order.
    pub fn points(&self) -> impl Iterator<Item = Point2> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| self.node(i, j)))
    }

    /// Nodes that are not on the lattice boundary.
    pub fn interior_points(&self) -> impl Iterator<Item = Point2> + '_ {
        (1..self.ny.saturating_sub(1)).flat_map(move |j| (1..self.nx.saturating_sub(1)).map(move |i| self.node(i, j)))
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }
}

/// Field values on a lattice with at least 3 nodes per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledGrid {
    lattice: Lattice,
    values: Vec<f64>,
}

impl SampledGrid {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if lattice.nx < 3 || lattice.ny < 3 {
            return Err(Error::InvalidInput(format!(
                "sampled grids need at least 3x3 nodes, got {}x{}",
                lattice.nx, lattice.ny
            )));
        }
        if values.len() != lattice.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} values for a {}x{} lattice, got {}",
                lattice.len(),
                lattice.nx,
                lattice.ny,
                values.len()
            )));
        }
        Ok(Self { lattice, values })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn nx(&self) -> usize {
        self.lattice.nx
    }

    pub fn ny(&self) -> usize {
        self.lattice.ny
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.lattice.index(i, j)]
    }

    /// Finite-difference jet at node `(i, j)`: second-order central stencils
    /// inside, second-order one-sided stencils on the boundary.
    pub fn node_jet(&self, i: usize, j: usize) -> Jet2 {
        let (nx, ny) = (self.nx(), self.ny());
        let (hx, hy) = (self.lattice.hx(), self.lattice.hy());
        let row = |jj: usize| move |ii: usize| self.at(ii, jj);
        let col = |ii: usize| move |jj: usize| self.at(ii, jj);
        let fx_at_row = |jj: usize| first_derivative(row(jj), i, nx, hx);
        Jet2 {
            value: self.at(i, j),
            gx: first_derivative(row(j), i, nx, hx),
            gy: first_derivative(col(i), j, ny, hy),
            hxx: second_derivative(row(j), i, nx, hx),
            hxy: first_derivative(fx_at_row, j, ny, hy),
            hyy: second_derivative(col(i), j, ny, hy),
        }
    }

    /// Jet at an arbitrary point of the rectangle: exact node jets at nodes,
    /// bilinear blending of the four surrounding node jets elsewhere.
    pub fn jet(&self, p: Point2) -> Result<Jet2> {
        if !self.lattice.rect.contains(p) {
            return Err(Error::OutOfDomain(p));
        }
        let (fi, ti) = cell_coordinate(p.x, self.lattice.rect.x0, self.lattice.hx(), self.nx());
        let (fj, tj) = cell_coordinate(p.y, self.lattice.rect.y0, self.lattice.hy(), self.ny());
        if ti == 0.0 && tj == 0.0 {
            return Ok(self.node_jet(fi, fj));
        }
        let mut out = Jet2::default();
        for (di, wi) in [(0, 1.0 - ti), (1, ti)] {
            for (dj, wj) in [(0, 1.0 - tj), (1, tj)] {
                let w = wi * wj;
                if w == 0.0 {
                    continue;
                }
                let jet = self.node_jet(fi + di, fj + dj);
                out.value += w * jet.value;
                out.gx += w * jet.gx;
                out.gy += w * jet.gy;
                out.hxx += w * jet.hxx;
                out.hxy += w * jet.hxy;
                out.hyy += w * jet.hyy;
            }
        }
        Ok(out)
    }
}

/// Cell index and fractional offset in `[0, 1)`; points on the far edge map
/// to the last node with offset 0.
fn cell_coordinate(v: f64, origin: f64, h: f64, n: usize) -> (usize, f64) {
    let s = ((v - origin) / h).clamp(0.0, (n - 1) as f64);
    let k = s.round();
    if (s - k).abs() < 1e-9 {
        return (k as usize, 0.0);
    }
    let base = (s.floor() as usize).min(n - 2);
    (base, s - base as f64)
}

fn first_derivative(f: impl Fn(usize) -> f64, k: usize, n: usize, h: f64) -> f64 {
    if k == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if k + 1 == n {
        (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
    } else {
        (f(k + 1) - f(k - 1)) / (2.0 * h)
    }
}

fn second_derivative(f: impl Fn(usize) -> f64, k: usize, n: usize, h: f64) -> f64 {
    let h2 = h * h;
    if k > 0 && k + 1 < n {
        return (f(k + 1) - 2.0 * f(k) + f(k - 1)) / h2;
    }
    // One-sided; fall back to the three-point rule on 3-node axes.
    let at = |m: usize| if k == 0 { f(m) } else { f(n - 1 - m) };
    if n >= 4 {
        (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2
    } else {
        (at(0) - 2.0 * at(1) + at(2)) / h2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldSource {
    Expression(Expression),
    Sampled(SampledGrid),
}

/// A graph function `t = f(x, y)` over a rectangle, queryable for 2-jets.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphField {
    source: FieldSource,
    domain: Rect,
    name: String,
}

impl GraphField {
    pub fn from_expression(expression: Expression, domain: Rect) -> Result<Self> {
        if expression.vars().len() > 2 {
            return Err(Error::InvalidInput("graph fields take at most two variables".into()));
        }
        let name = expression.to_string();
        Ok(Self { source: FieldSource::Expression(expression), domain, name })
    }

    /// Parse `text` in `x`, `y` and wrap it over `domain`.
    pub fn parse(text: &str, params: &Params, domain: Rect) -> Result<Self> {
        Self::from_expression(expr::parse(text, params)?, domain)
    }

    pub fn sampled(grid: SampledGrid) -> Self {
        let domain = grid.lattice().rect;
        Self { source: FieldSource::Sampled(grid), domain, name: "sampled".into() }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn source(&self) -> &FieldSource {
        &self.source
    }

    pub fn expression(&self) -> Option<&Expression> {
        match &self.source {
            FieldSource::Expression(e) => Some(e),
            FieldSource::Sampled(_) => None,
        }
    }

    pub fn grid(&self) -> Option<&SampledGrid> {
        match &self.source {
            FieldSource::Sampled(g) => Some(g),
            FieldSource::Expression(_) => None,
        }
    }

    pub fn params(&self) -> Params {
        self.expression().map(Expression::params).unwrap_or_default()
    }

    /// Same field over a different rectangle. Sampled fields cannot be
    /// widened beyond their lattice.
    pub fn with_domain(mut self, domain: Rect) -> Result<Self> {
        if let FieldSource::Sampled(g) = &self.source {
            if !g.lattice().rect.contains_rect(&domain) {
                return Err(Error::InvalidInput("domain exceeds the sampled lattice".into()));
            }
        }
        self.domain = domain;
        Ok(self)
    }

    /// Default light-like tolerance: rounding level for exact jets,
    /// `10 h²` for finite-difference jets.
    pub fn default_tau_light(&self) -> f64 {
        match &self.source {
            FieldSource::Expression(_) => crate::geometry::TAU_LIGHT_EXACT,
            FieldSource::Sampled(g) => 10.0 * g.lattice().spacing().powi(2),
        }
    }

    pub fn jet2(&self, p: Point2) -> Result<Jet2> {
        if !self.domain.contains(p) {
            return Err(Error::OutOfDomain(p));
        }
        match &self.source {
            FieldSource::Expression(e) => e.eval(&[Jet2::var_x(p.x), Jet2::var_y(p.y)]).map_err(|err| match err {
                Error::NonDifferentiablePoint { reason, .. } => Error::NonDifferentiablePoint { point: p, reason },
                other => other,
            }),
            FieldSource::Sampled(g) => g.jet(p),
        }
    }

    pub fn value(&self, p: Point2) -> Result<f64> {
        if !self.domain.contains(p) {
            return Err(Error::OutOfDomain(p));
        }
        match &self.source {
            FieldSource::Expression(e) => e.value_at(&[p.x, p.y]).map_err(|err| match err {
                Error::NonDifferentiablePoint { reason, .. } => Error::NonDifferentiablePoint { point: p, reason },
                other => other,
            }),
            FieldSource::Sampled(g) => g.jet(p).map(|j| j.value),
        }
    }

    /// Values on the uniform `nx × ny` lattice of the field's domain.
    pub fn sample(&self, nx: usize, ny: usize) -> Result<SampledGrid> {
        let lattice = Lattice::new(self.domain, nx, ny)?;
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidInput(format!("sampling needs at least 3x3 nodes, got {nx}x{ny}")));
        }
        let values = lattice.points().map(|p| self.value(p)).collect::<Result<Vec<_>>>()?;
        SampledGrid::new(lattice, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Rect {
        Rect::new(0.0, 1.0, 0.0, 1.0).unwrap()
    }

    fn field(text: &str, domain: Rect) -> GraphField {
        GraphField::parse(text, &Params::new(), domain).unwrap()
    }

    #[test]
    fn polynomial_jet_is_exact() {
        let f = field("y + x^2", Rect::new(0.0, 10.0, 0.0, 10.0).unwrap());
        let j = f.jet2(Point2::new(3.0, 5.0)).unwrap();
        assert_eq!(j, Jet2 { value: 14.0, gx: 6.0, gy: 1.0, hxx: 2.0, hxy: 0.0, hyy: 0.0 });
    }

    #[test]
    fn catenoid_gradient_at_unit_radius() {
        let f = field("-asinh(sqrt(x^2+y^2))", Rect::new(0.5, 2.0, -1.0, 1.0).unwrap());
        let j = f.jet2(Point2::new(1.0, 0.0)).unwrap();
        assert!((j.gx + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(j.gy, 0.0);
    }

    #[test]
    fn queries_outside_domain_are_rejected() {
        let f = field("x", unit());
        assert_eq!(f.jet2(Point2::new(1.5, 0.5)), Err(Error::OutOfDomain(Point2::new(1.5, 0.5))));
        let g = GraphField::sampled(f.sample(5, 5).unwrap());
        assert!(matches!(g.jet2(Point2::new(-0.1, 0.5)), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn non_differentiable_point_reports_location() {
        let f = field("sqrt(x^2 + y^2)", Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap());
        match f.jet2(Point2::new(0.0, 0.0)) {
            Err(Error::NonDifferentiablePoint { point, .. }) => assert_eq!(point, Point2::new(0.0, 0.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_sample() {
        let g = field("1", unit()).sample(3, 3).unwrap();
        assert_eq!(g.values(), &[1.0; 9]);
    }

    #[test]
    fn linear_sample_columns() {
        let g = field("x", unit()).sample(3, 3).unwrap();
        assert_eq!(g.values(), &[0.0, 0.5, 1.0, 0.0, 0.5, 1.0, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn quadratic_curvature_from_samples() {
        let f = field("x^2", Rect::new(0.0, 1.0, 0.0, 1.0).unwrap());
        let g = f.sample(11, 11).unwrap();
        let j = g.node_jet(5, 5);
        assert!((j.hxx - 2.0).abs() < 1e-12, "{}", j.hxx);
        assert!((j.gx - 1.0).abs() < 1e-13);
    }

    #[test]
    fn grid_jets_match_ad_on_quadratics() {
        let domain = Rect::new(-1.0, 2.0, 0.5, 1.5).unwrap();
        let f = field("3*x^2 - x*y + 0.5*y^2 + 2*x - y + 1", domain);
        for (nx, ny) in [(3, 3), (4, 7), (13, 9)] {
            let g = f.sample(nx, ny).unwrap();
            let lat = *g.lattice();
            let max_f = g.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let h = lat.hx().min(lat.hy());
            let tol1 = 1e2 * f64::EPSILON * max_f / h;
            let tol2 = 1e2 * f64::EPSILON * max_f / (h * h);
            for j in 0..ny {
                for i in 0..nx {
                    let ad = f.jet2(lat.node(i, j)).unwrap();
                    let fd = g.node_jet(i, j);
                    assert!((ad.gx - fd.gx).abs() <= tol1, "gx at {i},{j}");
                    assert!((ad.gy - fd.gy).abs() <= tol1, "gy at {i},{j}");
                    assert!((ad.hxx - fd.hxx).abs() <= tol2, "hxx at {i},{j}");
                    assert!((ad.hxy - fd.hxy).abs() <= tol2, "hxy at {i},{j}");
                    assert!((ad.hyy - fd.hyy).abs() <= tol2, "hyy at {i},{j}");
                }
            }
        }
    }

    #[test]
    fn off_node_jets_blend_neighbours() {
        let f = field("x + 2*y", unit());
        let g = GraphField::sampled(f.sample(5, 5).unwrap());
        let j = g.jet2(Point2::new(0.33, 0.71)).unwrap();
        assert!((j.value - (0.33 + 1.42)).abs() < 1e-14);
        assert!((j.gx - 1.0).abs() < 1e-13 && (j.gy - 2.0).abs() < 1e-13);
    }

    #[test]
    fn sampled_grids_need_three_nodes() {
        let lat = Lattice::new(unit(), 2, 5).unwrap();
        assert!(SampledGrid::new(lat, vec![0.0; 10]).is_err());
        assert!(field("x", unit()).sample(2, 3).is_err());
    }
}
