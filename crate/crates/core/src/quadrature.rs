//! Composite and adaptive 5-point Gauss–Legendre quadrature.

use crate::error::{Error, Result};

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// The five Gauss nodes mapped to `[a, b]` with their weights.
pub fn gl5_rule(a: f64, b: f64) -> [(f64, f64); 5] {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut out = [(0.0, 0.0); 5];
    for k in 0..5 {
        out[k] = (c + h * GL5_NODES[k], h * GL5_WEIGHTS[k]);
    }
    out
}

pub fn gl5<F>(f: &mut F, a: f64, b: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut s = 0.0;
    for (x, w) in gl5_rule(a, b) {
        s += w * f(x)?;
    }
    Ok(s)
}

/// Adaptive bisection on `[a, b]`: a panel is accepted when its GL5 value
/// and the sum over its halves agree to `tol`. Returns the integral and the
/// accumulated error estimate.
pub fn adaptive_gl5<F>(f: &mut F, a: f64, b: f64, tol: f64, max_depth: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok((0.0, 0.0));
    }
    let whole = gl5(f, a, b)?;
    recurse(f, a, b, whole, tol, max_depth)
}

fn recurse<F>(f: &mut F, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let left = gl5(f, a, m)?;
    let right = gl5(f, m, b)?;
    let err = (left + right - whole).abs();
    if err <= tol || depth == 0 {
        if err > tol {
            return Err(Error::QuadratureNonConvergence {
                estimate: left + right,
                error: err,
            });
        }
        return Ok((left + right, err));
    }
    let (l, el) = recurse(f, a, m, left, 0.5 * tol, depth - 1)?;
    let (r, er) = recurse(f, m, b, right, 0.5 * tol, depth - 1)?;
    Ok((l + r, el + er))
}

/// Bisection for a sign change of `g` on `[a, b]` (`g(a)·g(b) < 0`).
pub fn bisect_root<G>(g: &mut G, mut a: f64, mut b: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    let mut ga = g(a)?;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m)?;
        if gm == 0.0 {
            return Ok(m);
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl5_is_exact_for_degree_nine() {
        let mut f = |x: f64| Ok(x.powi(9) + 3.0 * x.powi(4));
        let v = gl5(&mut f, 0.0, 2.0).unwrap();
        let exact = 2f64.powi(10) / 10.0 + 3.0 * 2f64.powi(5) / 5.0;
        assert!((v - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn adaptive_handles_a_kink() {
        let mut f = |x: f64| Ok((x - 0.3).abs());
        let (v, _) = adaptive_gl5(&mut f, 0.0, 1.0, 1e-12, 40).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-11);
    }

    #[test]
    fn reports_non_convergence() {
        let mut f = |x: f64| Ok(if x < 0.3 { 0.0 } else { 1.0 });
        assert!(matches!(
            adaptive_gl5(&mut f, 0.0, 1.0, 1e-14, 3),
            Err(Error::QuadratureNonConvergence { .. })
        ));
    }

    #[test]
    fn bisection() {
        let r = bisect_root(&mut |x: f64| Ok(x * x - 2.0), 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }
}
