//! Simpson quadrature, composite (uniform doubling) and adaptive.

use crate::error::{Error, Result};

/// Largest subinterval count tried by [`composite_simpson`].
pub const MAX_SUBINTERVALS: usize = 1 << 20;

/// Composite Simpson rule on `[a, b]`, doubling the subinterval count until
/// two successive estimates differ by less than `tol · max(1, |estimate|)`.
/// The relative part only matters for large integrals, where an absolute
/// target would sit below rounding noise. Previous nodes are reused, so each doubling costs one new evaluation per subinterval.
pub fn composite_simpson(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut n = 2usize;
    let ends = f(a)? + f(b)?;
    let mut evens = 0.0;
    let mut odds = f(0.5 * (a + b))?;
    let mut prev = (b - a) / 6.0 * (ends + 4.0 * odds);
    loop {
        n *= 2;
        if n > MAX_SUBINTERVALS {
            return Err(Error::QuadratureFailure { a, b, subintervals: n / 2 });
        }
        evens += odds;
        let h = (b - a) / n as f64;
        let mut sum = 0.0;
        for k in (1..n).step_by(2) {
            sum += f(a + k as f64 * h)?;
        }
        odds = sum;
        let cur = h / 3.0 * (ends + 4.0 * odds + 2.0 * evens);
        if (cur - prev).abs() < tol * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
}

/// Recursive adaptive Simpson with Richardson correction.
pub fn adaptive_simpson(mut f: impl FnMut(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (fa, fb) = (f(a)?, f(b)?);
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_step(&mut f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step(
    f: &mut impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        // Report the leaf that would not settle.
        return Err(Error::QuadratureFailure { a, b, subintervals: 2 });
    }
    Ok(adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_is_exact_on_cubics() {
        let v = composite_simpson(|x| Ok(x * x * x - 2.0 * x + 1.0), 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn composite_converges_on_exponential() {
        let v = composite_simpson(|x| Ok(x.exp()), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-11);
        let back = composite_simpson(|x| Ok(x.exp()), 1.0, 0.0, 1e-10).unwrap();
        assert!((back + v).abs() < 1e-11);
    }

    #[test]
    fn adaptive_handles_steep_integrands() {
        let v = adaptive_simpson(|x| Ok(1.0 / x), 1e-3, 1.0, 1e-12).unwrap();
        assert!((v - 1e3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn errors_propagate() {
        let r = composite_simpson(
            |x| if x > 0.5 { Err(Error::InvalidInput("boom".into())) } else { Ok(x) },
            0.0,
            1.0,
            1e-10,
        );
        assert!(r.is_err());
    }
}
