//! Pointwise Lorentzian and Euclidean geometry of graphs `t = ψ(x, y)`.
//!
//! The causal character of a graph point is the sign of
//! `B = 1 − ψ_x² − ψ_y²`: positive is space-like, negative time-like, zero
//! light-like. A light-like point is degenerate when `∇B` vanishes there too.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GraphField, Lattice, Point2};
use crate::jet::{Jet2, Scalar};

/// Light-like tolerance for fields with exact (AD) jets.
pub const TAU_LIGHT_EXACT: f64 = 1e-9;
/// Degeneracy tolerance on `|∇B|`.
pub const TAU_GRAD: f64 = 1e-7;
/// Positional tolerance for refining light-like points along lattice edges.
pub const BISECTION_TOL: f64 = 1e-10;
/// A fitted light-like line is accepted when both its straightness and
/// light-likeness defects stay below this.
pub const LINE_TOL: f64 = 1e-8;

pub fn b_of(j: &Jet2) -> f64 {
    bernoulli(j.gx, j.gy)
}

/// `1 − gx² − gy²`, factoring out the dominant component so that values
/// near the light cone keep their relative accuracy.
pub fn bernoulli<S: Scalar>(gx: S, gy: S) -> S {
    let one = S::constant(1.0);
    if gx.value().abs() >= gy.value().abs() {
        (one - gx) * (one + gx) - gy * gy
    } else {
        (one - gy) * (one + gy) - gx * gx
    }
}

pub fn grad_b_of(j: &Jet2) -> [f64; 2] {
    [-2.0 * (j.gx * j.hxx + j.gy * j.hxy), -2.0 * (j.gx * j.hxy + j.gy * j.hyy)]
}

/// `(1 − ψ_y²)ψ_xx + 2ψ_xψ_yψ_xy + (1 − ψ_x²)ψ_yy`
pub fn zmc_residual_of(j: &Jet2) -> f64 {
    (1.0 - j.gy * j.gy) * j.hxx + 2.0 * j.gx * j.gy * j.hxy + (1.0 - j.gx * j.gx) * j.hyy
}

/// `(1 + φ_y²)φ_xx − 2φ_xφ_yφ_xy + (1 + φ_x²)φ_yy`
pub fn minimal_residual_of(j: &Jet2) -> f64 {
    (1.0 + j.gy * j.gy) * j.hxx - 2.0 * j.gx * j.gy * j.hxy + (1.0 + j.gx * j.gx) * j.hyy
}

/// Euclidean Gauss curvature of the graph.
pub fn gauss_euclid_of(j: &Jet2) -> f64 {
    let w = 1.0 + j.gx * j.gx + j.gy * j.gy;
    j.hessian_det() / (w * w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalClass {
    SpaceLike,
    TimeLike,
    LightNonDegenerate,
    LightDegenerate,
}

impl CausalClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CausalClass::SpaceLike => "space-like",
            CausalClass::TimeLike => "time-like",
            CausalClass::LightNonDegenerate => "light-nondegenerate",
            CausalClass::LightDegenerate => "light-degenerate",
        }
    }

    pub fn is_light_like(self) -> bool {
        matches!(self, CausalClass::LightNonDegenerate | CausalClass::LightDegenerate)
    }

    /// Threshold semantics without hysteresis.
    pub fn from_b(b: f64, grad_b: [f64; 2], tau_light: f64, tau_grad: f64) -> Self {
        if b > tau_light {
            CausalClass::SpaceLike
        } else if b < -tau_light {
            CausalClass::TimeLike
        } else if grad_b[0].hypot(grad_b[1]) <= tau_grad {
            CausalClass::LightDegenerate
        } else {
            CausalClass::LightNonDegenerate
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalSample {
    pub point: Point2,
    pub b: f64,
    pub grad_b: [f64; 2],
    pub class: CausalClass,
}

pub fn causal_b(f: &GraphField, p: Point2) -> Result<(f64, [f64; 2])> {
    let j = f.jet2(p)?;
    Ok((b_of(&j), grad_b_of(&j)))
}

fn check_tolerances(tau_light: f64, tau_grad: f64) -> Result<()> {
    if tau_light > 0.0 && tau_grad > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("tolerances must be positive (light {tau_light}, grad {tau_grad})")))
    }
}

pub fn classify(f: &GraphField, p: Point2, tau_light: f64, tau_grad: f64) -> Result<CausalSample> {
    check_tolerances(tau_light, tau_grad)?;
    let (b, grad_b) = causal_b(f, p)?;
    Ok(CausalSample { point: p, b, grad_b, class: CausalClass::from_b(b, grad_b, tau_light, tau_grad) })
}

/// Classify every node of `lattice`, row-major.
pub fn classify_lattice(f: &GraphField, lattice: &Lattice, tau_light: f64, tau_grad: f64) -> Result<Vec<CausalSample>> {
    lattice.points().map(|p| classify(f, p, tau_light, tau_grad)).collect()
}

pub fn zmc_residual(f: &GraphField, p: Point2) -> Result<f64> {
    Ok(zmc_residual_of(&f.jet2(p)?))
}

pub fn minimal_residual(f: &GraphField, p: Point2) -> Result<f64> {
    Ok(minimal_residual_of(&f.jet2(p)?))
}

/// Residual of the time-like branch of the dual equation; algebraically the
/// same operator as the ZMC equation, applied to a potential.
pub fn timelike_residual(f: &GraphField, p: Point2) -> Result<f64> {
    zmc_residual(f, p)
}

/// Lorentzian mean curvature `H = residual / (2|B|^{3/2})`, upward
/// co-orientation. Undefined at light-like points.
pub fn mean_curvature(f: &GraphField, p: Point2, tau_light: f64) -> Result<f64> {
    let j = f.jet2(p)?;
    let b = b_of(&j);
    if b.abs() <= tau_light {
        return Err(Error::LightLikePoint { point: p, b });
    }
    Ok(zmc_residual_of(&j) / (2.0 * b.abs().powf(1.5)))
}

pub fn gauss_curvature_euclid(f: &GraphField, p: Point2) -> Result<f64> {
    Ok(gauss_euclid_of(&f.jet2(p)?))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// max |ψ_x² + ψ_y² − 1|
    pub max_eikonal_defect: f64,
    /// max |ZMC residual|
    pub max_residual: f64,
    /// max |ψ_xx ψ_yy − ψ_xy²|
    pub max_hessian_det: f64,
    pub points: usize,
}

/// Numerical certificate for "light-like ⇒ ZMC and Euclidean-flat". Defects
/// are reported, never turned into errors.
pub fn lightlike_identity_check(f: &GraphField, points: impl IntoIterator<Item = Point2>) -> Result<IdentityReport> {
    let mut r = IdentityReport::default();
    for p in points {
        let j = f.jet2(p)?;
        r.max_eikonal_defect = r.max_eikonal_defect.max((j.gx * j.gx + j.gy * j.gy - 1.0).abs());
        r.max_residual = r.max_residual.max(zmc_residual_of(&j).abs());
        r.max_hessian_det = r.max_hessian_det.max(j.hessian_det().abs());
        r.points += 1;
    }
    Ok(r)
}

/// Light-like points of `f` on and between the nodes of `lattice`.
///
/// Nodes with `|B| ≤ τ_light` are taken as they are. Along every lattice edge,
/// sign changes of `B` (non-degenerate crossings) and of the edge-direction
/// derivative of `B` (where `B` touches zero without crossing, the degenerate
/// case) are bisected to [`BISECTION_TOL`]. Candidates closer than half a
/// lattice spacing are merged, keeping the smallest `|B|`.
pub fn detect_lightlike_set(
    f: &GraphField,
    lattice: &Lattice,
    tau_light: f64,
    tau_grad: f64,
) -> Result<Vec<CausalSample>> {
    check_tolerances(tau_light, tau_grad)?;
    let nodes = classify_lattice(f, lattice, tau_light, tau_grad)?;
    let mut candidates: Vec<CausalSample> = nodes.iter().filter(|s| s.class.is_light_like()).copied().collect();

    let (nx, ny) = (lattice.nx, lattice.ny);
    let mut edges = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            if i + 1 < nx {
                edges.push((lattice.index(i, j), lattice.index(i + 1, j), 0usize));
            }
            if j + 1 < ny {
                edges.push((lattice.index(i, j), lattice.index(i, j + 1), 1usize));
            }
        }
    }
    for (a, b, axis) in edges {
        let (sa, sb) = (&nodes[a], &nodes[b]);
        if sa.b * sb.b < 0.0 && !sa.class.is_light_like() && !sb.class.is_light_like() {
            let p = bisect_edge(f, sa.point, sb.point, b_of, tau_light)?;
            candidates.push(classify(f, p, tau_light, tau_grad)?);
        }
        let (da, db) = (sa.grad_b[axis], sb.grad_b[axis]);
        if da * db < 0.0 {
            let p = bisect_edge(f, sa.point, sb.point, move |j| grad_b_of(j)[axis], 0.0)?;
            let s = classify(f, p, tau_light, tau_grad)?;
            if s.class.is_light_like() {
                candidates.push(s);
            }
        }
    }

    let radius = 0.5 * lattice.hx().min(lattice.hy());
    let mut merged = merge_nearby(candidates, radius);
    merged.sort_by(|a, b| a.point.x.total_cmp(&b.point.x).then(a.point.y.total_cmp(&b.point.y)));
    Ok(merged)
}

/// Bisect a sign change of `g` between `a` and `b` down to
/// [`BISECTION_TOL`]; when `target_b > 0`, keep halving while `|B|` still
/// exceeds it and the bracket is above rounding level.
fn bisect_edge(f: &GraphField, a: Point2, b: Point2, g: impl Fn(&Jet2) -> f64, target_b: f64) -> Result<Point2> {
    let len = a.dist(b);
    let at = |s: f64| Point2::new(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut g_lo = g(&f.jet2(a)?);
    let floor = 4.0 * f64::EPSILON * (1.0 + a.x.abs().max(a.y.abs()).max(b.x.abs()).max(b.y.abs())) / len;
    loop {
        let mid = 0.5 * (lo + hi);
        let jet = f.jet2(at(mid))?;
        let done = (hi - lo) * len <= BISECTION_TOL && (target_b <= 0.0 || b_of(&jet).abs() <= target_b);
        if done || hi - lo <= floor {
            return Ok(at(mid));
        }
        let g_mid = g(&jet);
        if g_mid == 0.0 {
            return Ok(at(mid));
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
}

fn merge_nearby(mut candidates: Vec<CausalSample>, radius: f64) -> Vec<CausalSample> {
    candidates.sort_by(|a, b| a.b.abs().total_cmp(&b.b.abs()));
    let cell = |p: Point2| ((p.x / radius).floor() as i64, (p.y / radius).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<Point2>> = HashMap::new();
    let mut kept = Vec::new();
    'outer: for s in candidates {
        let (cx, cy) = cell(s.point);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(pts) = buckets.get(&(cx + dx, cy + dy)) {
                    if pts.iter().any(|q| q.dist(s.point) < radius) {
                        continue 'outer;
                    }
                }
            }
        }
        buckets.entry((cx, cy)).or_default().push(s.point);
        kept.push(s);
    }
    kept
}

/// A straight run of degenerate light-like points together with its lift
/// to the graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightLine {
    /// Centroid of the cluster; lies on the fitted line.
    pub base: Point2,
    /// Unit direction in the plane, oriented so that `lifted[2] ≥ 0`.
    pub direction: [f64; 2],
    /// `(dx, dy, dt)` with `dt` the derivative of ψ along `direction` at `base`.
    pub lifted: [f64; 3],
    pub samples: Vec<Point2>,
    /// Largest distance of a sample to the fitted line.
    pub perpendicular_residual: f64,
    /// Largest `|dx² + dy² − dt²|` over the base and all samples.
    pub lightlike_defect: f64,
    pub verified: bool,
}

/// Group degenerate samples into straight clusters and check each lifts to
/// a light-like line on the graph.
///
/// Clusters grow greedily: a sample joins when it lies within `link_radius`
/// of a member (ten lattice spacings is the usual choice). Each cluster of
/// at least two samples gets a total-least-squares line.
pub fn verify_line_theorem(samples: &[CausalSample], f: &GraphField, link_radius: f64) -> Result<Vec<LightLine>> {
    let points: Vec<Point2> =
        samples.iter().filter(|s| s.class == CausalClass::LightDegenerate).map(|s| s.point).collect();
    if points.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: points.len() });
    }
    if link_radius <= 0.0 {
        return Err(Error::InvalidInput("link radius must be positive".into()));
    }
    let mut lines = Vec::new();
    for cluster in cluster_by_proximity(&points, link_radius) {
        if cluster.len() < 2 {
            continue;
        }
        lines.push(fit_light_line(f, cluster)?);
    }
    lines.sort_by(|a, b| a.base.x.total_cmp(&b.base.x).then(a.base.y.total_cmp(&b.base.y)));
    Ok(lines)
}

fn cluster_by_proximity(points: &[Point2], radius: f64) -> Vec<Vec<Point2>> {
    let cell = |p: Point2| ((p.x / radius).floor() as i64, (p.y / radius).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (k, p) in points.iter().enumerate() {
        buckets.entry(cell(*p)).or_default().push(k);
    }
    let mut assigned = vec![false; points.len()];
    let mut clusters = Vec::new();
    for start in 0..points.len() {
        if assigned[start] {
            continue;
        }
        assigned[start] = true;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(k) = stack.pop() {
            members.push(points[k]);
            let (cx, cy) = cell(points[k]);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for &m in buckets.get(&(cx + dx, cy + dy)).map(Vec::as_slice).unwrap_or(&[]) {
                        if !assigned[m] && points[m].dist(points[k]) <= radius {
                            assigned[m] = true;
                            stack.push(m);
                        }
                    }
                }
            }
        }
        members.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        clusters.push(members);
    }
    clusters
}

fn fit_light_line(f: &GraphField, samples: Vec<Point2>) -> Result<LightLine> {
    let n = samples.len() as f64;
    let cx = samples.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = samples.iter().map(|p| p.y).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &samples {
        let (dx, dy) = (p.x - cx, p.y - cy);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut d = [angle.cos(), angle.sin()];
    let base = Point2::new(cx, cy);
    let jet = f.jet2(base)?;
    let mut dt = jet.directional(d);
    if dt < 0.0 || (dt == 0.0 && (d[0] < 0.0 || (d[0] == 0.0 && d[1] < 0.0))) {
        d = [-d[0], -d[1]];
        dt = -dt;
    }
    let perpendicular_residual =
        samples.iter().map(|p| ((p.x - cx) * d[1] - (p.y - cy) * d[0]).abs()).fold(0.0, f64::max);
    let norm2 = d[0] * d[0] + d[1] * d[1];
    let mut lightlike_defect = (norm2 - dt * dt).abs();
    for p in &samples {
        let s = f.jet2(*p)?.directional(d);
        lightlike_defect = lightlike_defect.max((norm2 - s * s).abs());
    }
    Ok(LightLine {
        base,
        direction: d,
        lifted: [d[0], d[1], dt],
        samples,
        perpendicular_residual,
        lightlike_defect,
        verified: perpendicular_residual <= LINE_TOL && lightlike_defect <= LINE_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Params;
    use crate::field::Rect;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn field(text: &str, domain: (f64, f64, f64, f64)) -> GraphField {
        GraphField::parse(text, &Params::new(), Rect::new(domain.0, domain.1, domain.2, domain.3).unwrap()).unwrap()
    }

    const SQ: (f64, f64, f64, f64) = (-2.0, 2.0, -2.0, 2.0);

    #[test]
    fn plane_b_and_gradient() {
        let f = field("0.3*x + 0.4*y", SQ);
        let (b, g) = causal_b(&f, Point2::new(0.7, -1.2)).unwrap();
        assert!((b - 0.75).abs() < 1e-15);
        assert_eq!(g, [0.0, 0.0]);
    }

    #[test]
    fn parabola_cylinder_b() {
        let f = field("y + x^2", SQ);
        for x in [-1.5, -0.3, 0.25, 1.0] {
            let (b, g) = causal_b(&f, Point2::new(x, 0.4)).unwrap();
            assert_eq!(b, -4.0 * x * x);
            assert_eq!(g, [-8.0 * x, 0.0]);
        }
        let s = classify(&f, Point2::new(0.0, 1.0), TAU_LIGHT_EXACT, TAU_GRAD).unwrap();
        assert_eq!((s.b, s.class), (0.0, CausalClass::LightDegenerate));
    }

    #[test]
    fn catenoid_b_at_unit_radius() {
        let f = field("-asinh(sqrt(x^2+y^2))", SQ);
        let (b, _) = causal_b(&f, Point2::new(0.6, 0.8)).unwrap();
        assert!((b - 0.5).abs() < 1e-15);
    }

    #[test]
    fn classification_examples() {
        let f = field("y + sin(x)", (0.0, 4.0, -1.0, 1.0));
        let s = classify(&f, Point2::new(FRAC_PI_2, 0.0), TAU_LIGHT_EXACT, TAU_GRAD).unwrap();
        assert_eq!(s.class, CausalClass::LightDegenerate);

        let f = field("y + x", SQ);
        for p in [Point2::new(0.0, 0.0), Point2::new(1.3, -0.2)] {
            let s = classify(&f, p, TAU_LIGHT_EXACT, TAU_GRAD).unwrap();
            assert_eq!((s.b, s.class), (-1.0, CausalClass::TimeLike));
        }

        let f = field("x - sqrt(1 - y^2)", (-1.0, 1.0, -0.9, 0.9));
        let s = classify(&f, Point2::new(0.0, 0.0), TAU_LIGHT_EXACT, TAU_GRAD).unwrap();
        assert_eq!((s.b, s.grad_b), (0.0, [0.0, 0.0]));
        assert_eq!(s.class, CausalClass::LightDegenerate);
    }

    #[test]
    fn non_degenerate_light_point() {
        // B = 1 − (1 + x)² has a simple zero at x = 0.
        let f = field("y*0 + x + x^2/2", SQ);
        let s = classify(&f, Point2::new(0.0, 0.3), TAU_LIGHT_EXACT, TAU_GRAD).unwrap();
        assert_eq!(s.class, CausalClass::LightNonDegenerate);
        assert!(classify(&f, Point2::new(0.0, 0.0), 0.0, TAU_GRAD).is_err());
    }

    #[test]
    fn residual_examples() {
        let plane = field("2*x - 3*y + 1", SQ);
        let p = Point2::new(0.3, 0.9);
        assert_eq!(zmc_residual(&plane, p).unwrap(), 0.0);
        assert_eq!(minimal_residual(&plane, p).unwrap(), 0.0);
        assert_eq!(timelike_residual(&plane, p).unwrap(), 0.0);

        let f = field("y + cosh(x)^3", SQ);
        assert!(zmc_residual(&f, Point2::new(1.1, 0.0)).unwrap().abs() < 1e-12);

        let cat = field("-asinh(sqrt(x^2+y^2))", SQ);
        assert!(zmc_residual(&cat, Point2::new(1.0, 0.0)).unwrap().abs() < 1e-15);

        let helicoid = field("atan2(y, x)", SQ);
        assert!(minimal_residual(&helicoid, Point2::new(1.0, 1.0)).unwrap().abs() < 1e-15);

        let bowl = field("(x^2 + y^2)/2", SQ);
        assert_eq!(minimal_residual(&bowl, Point2::new(0.0, 0.0)).unwrap(), 2.0);

        let dual = field("y + exp(-x)", SQ);
        for x in [-1.0, 0.0, 1.7] {
            assert!(timelike_residual(&dual, Point2::new(x, 0.5)).unwrap().abs() < 1e-13);
        }

        let slab = field("y + log(tan(x))", (0.1, 1.4, -1.0, 1.0));
        assert!(timelike_residual(&slab, Point2::new(PI / 4.0, 0.0)).unwrap().abs() < 1e-14);
    }

    #[test]
    fn catenoid_residual_by_hand() {
        // ψ = −asinh r: ψ_r = −1/√(1+r²), ψ_rr = r/(1+r²)^{3/2}. With
        // ψ_xx = ψ_rr x²/r² + ψ_r y²/r³ etc. the residual collapses to
        // ψ_rr + ψ_r/r − ψ_r³/r, which vanishes identically.
        let r: f64 = 1.0;
        let q = 1.0 + r * r;
        let psi_r = -1.0 / q.sqrt();
        let psi_rr = r / q.powf(1.5);
        let hand = psi_rr + psi_r / r - psi_r.powi(3) / r;
        assert!(hand.abs() < 1e-15);
    }

    #[test]
    fn curvature_examples() {
        let plane = field("0.1*x + 0.2*y", SQ);
        assert_eq!(mean_curvature(&plane, Point2::new(0.0, 1.0), TAU_LIGHT_EXACT).unwrap(), 0.0);
        assert_eq!(gauss_curvature_euclid(&plane, Point2::new(0.0, 1.0)).unwrap(), 0.0);

        let cat = field("-asinh(sqrt(x^2+y^2))", (0.2, 3.0, -1.0, 1.0));
        for r in [0.3, 1.0, 2.5] {
            let h = mean_curvature(&cat, Point2::new(r, 0.1), TAU_LIGHT_EXACT).unwrap();
            assert!(h.abs() < 1e-13, "{h}");
        }

        let bowl = field("(x^2 + y^2)/2", SQ);
        assert_eq!(mean_curvature(&bowl, Point2::new(0.0, 0.0), TAU_LIGHT_EXACT).unwrap(), 1.0);
        assert_eq!(gauss_curvature_euclid(&bowl, Point2::new(0.0, 0.0)).unwrap(), 1.0);

        let cone = field("sqrt(x^2 + y^2)", SQ);
        assert!(gauss_curvature_euclid(&cone, Point2::new(1.0, 1.0)).unwrap().abs() < 1e-16);
        assert!(matches!(
            mean_curvature(&cone, Point2::new(1.0, 1.0), TAU_LIGHT_EXACT),
            Err(Error::LightLikePoint { .. })
        ));
    }

    #[test]
    fn identity_check_examples() {
        let lat = Lattice::new(Rect::new(-2.0, 2.0, -2.0, 2.0).unwrap(), 41, 41).unwrap();
        let plane = field("x*cos(0.4) + y*sin(0.4) + 3", SQ);
        let r = lightlike_identity_check(&plane, lat.points()).unwrap();
        assert!(r.max_eikonal_defect < 1e-15 && r.max_residual == 0.0 && r.max_hessian_det == 0.0);

        let cone = field("sqrt(x^2 + y^2)", SQ);
        let annulus = lat.points().filter(|p| (0.5..=2.0).contains(&p.x.hypot(p.y)));
        let r = lightlike_identity_check(&cone, annulus).unwrap();
        assert!(r.points > 100);
        assert!(r.max_eikonal_defect < 1e-12 && r.max_residual < 1e-12 && r.max_hessian_det < 1e-12, "{r:?}");

        let cyl = field("y + x^2", SQ);
        let r = lightlike_identity_check(&cyl, lat.points()).unwrap();
        assert!((r.max_eikonal_defect - 16.0).abs() < 1e-12);
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn detection_on_space_like_plane_is_empty() {
        let f = field("0.3*x + 0.4*y", SQ);
        let lat = Lattice::new(f.domain(), 21, 21).unwrap();
        assert!(detect_lightlike_set(&f, &lat, TAU_LIGHT_EXACT, TAU_GRAD).unwrap().is_empty());
    }

    #[test]
    fn detection_of_sine_cylinder_lines() {
        let f = field("y + sin(x)", (0.0, 2.0 * PI, -1.0, 1.0));
        let lat = Lattice::new(f.domain(), 101, 11).unwrap();
        let found = detect_lightlike_set(&f, &lat, TAU_LIGHT_EXACT, TAU_GRAD).unwrap();
        assert_eq!(found.len(), 22);
        for s in &found {
            assert_eq!(s.class, CausalClass::LightDegenerate);
            let off = (s.point.x - FRAC_PI_2).abs().min((s.point.x - 3.0 * FRAC_PI_2).abs());
            assert!(off < 1e-9, "{s:?}");
        }
        let lines = verify_line_theorem(&found, &f, 10.0 * lat.spacing()).unwrap();
        assert_eq!(lines.len(), 2);
        for l in &lines {
            assert!(l.verified, "{l:?}");
            assert!((l.direction[0]).abs() < 1e-12 && (l.direction[1] - 1.0).abs() < 1e-12);
        }
        let cross = lines[0].direction[0] * lines[1].direction[1] - lines[0].direction[1] * lines[1].direction[0];
        assert!(cross.abs() < 1e-12);
    }

    #[test]
    fn detection_of_circle_branch_line() {
        let f = field("x - sqrt(1 - y^2)", (-1.0, 1.0, -0.9, 0.9));
        let lat = Lattice::new(f.domain(), 21, 20).unwrap();
        let found = detect_lightlike_set(&f, &lat, TAU_LIGHT_EXACT, TAU_GRAD).unwrap();
        assert_eq!(found.len(), 21);
        assert!(found.iter().all(|s| s.point.y.abs() < 1e-9 && s.class == CausalClass::LightDegenerate));
        let lines = verify_line_theorem(&found, &f, 10.0 * lat.spacing()).unwrap();
        assert_eq!(lines.len(), 1);
        let l = &lines[0];
        assert!(l.verified);
        assert!((l.lifted[0] - 1.0).abs() < 1e-12 && l.lifted[1].abs() < 1e-12 && (l.lifted[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parabola_cylinder_line_is_vertical() {
        let f = field("y + x^2", (-1.0, 1.0, -1.0, 1.0));
        let lat = Lattice::new(f.domain(), 21, 21).unwrap();
        let found = detect_lightlike_set(&f, &lat, TAU_LIGHT_EXACT, TAU_GRAD).unwrap();
        let lines = verify_line_theorem(&found, &f, 10.0 * lat.spacing()).unwrap();
        assert_eq!(lines.len(), 1);
        let l = &lines[0];
        assert!(l.lifted[0].abs() < 1e-15 && l.lifted[1] == 1.0 && l.lifted[2] == 1.0, "{:?}", l.lifted);
        assert!(l.lightlike_defect < 1e-15);
    }

    #[test]
    fn non_degenerate_crossing_is_refined() {
        // B = 1 − (1 + x)² changes sign at x = 0 and x = −2.
        let f = field("x + x^2/2", (-0.55, 0.5, -0.5, 0.5));
        let lat = Lattice::new(f.domain(), 12, 5).unwrap();
        let found = detect_lightlike_set(&f, &lat, TAU_LIGHT_EXACT, TAU_GRAD).unwrap();
        assert_eq!(found.len(), 5);
        for s in &found {
            assert_eq!(s.class, CausalClass::LightNonDegenerate);
            assert!(s.point.x.abs() < 1e-9);
        }
        assert!(matches!(verify_line_theorem(&found, &f, 1.0), Err(Error::InsufficientSamples { needed: 2, got: 0 })));
    }
}
