//! Small dense linear-algebra and root-finding helpers shared by the
//! curve, strength and shock solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A point of the state space `Ω ⊂ R^n`.
pub type State = DVector<f64>;

pub fn state(values: &[f64]) -> State {
    DVector::from_column_slice(values)
}

pub fn sup_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Options for [`newton_fd`].
#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            fd_step: 1e-6,
        }
    }
}

/// Central-difference Jacobian of `f` at `x`.
pub fn fd_jacobian<F>(f: &mut F, x: &DVector<f64>, step: f64) -> Result<DMatrix<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let n = x.len();
    let mut jac: Option<DMatrix<f64>> = None;
    for k in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[k] += step;
        xm[k] -= step;
        let fp = f(&xp)?;
        let fm = f(&xm)?;
        let m = jac.get_or_insert_with(|| DMatrix::zeros(fp.len(), n));
        let col = (fp - fm) / (2.0 * step);
        m.set_column(k, &col);
    }
    Ok(jac.unwrap_or_else(|| DMatrix::zeros(0, 0)))
}

/// Damped Newton iteration with a finite-difference Jacobian.
///
/// The Jacobian is refreshed only when the residual stops contracting by at
/// least a factor four, so well-conditioned problems usually cost one
/// Jacobian and a handful of residual evaluations. Returns the root and the
/// final sup-norm residual.
pub fn newton_fd<F>(
    mut f: F,
    x0: DVector<f64>,
    opts: NewtonOptions,
    context: &'static str,
) -> Result<(DVector<f64>, f64)>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut x = x0;
    let mut r = f(&x)?;
    let mut res = sup_norm(&r);
    if res <= opts.tol {
        return Ok((x, res));
    }
    let mut lu = fd_jacobian(&mut f, &x, opts.fd_step)?.lu();
    let mut fresh = true;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let Some(dx) = lu.solve(&(-&r)) else {
            return Err(Error::NewtonDivergence {
                context,
                residual: res,
                iterations,
            });
        };
        let mut accepted = None;
        let mut damping = 1.0;
        for _ in 0..12 {
            let candidate = &x + &dx * damping;
            if let Ok(rc) = f(&candidate) {
                let rc_norm = sup_norm(&rc);
                if rc_norm < res {
                    accepted = Some((candidate, rc, rc_norm));
                    break;
                }
            }
            damping *= 0.5;
        }
        match accepted {
            Some((xn, rn, rn_norm)) => {
                let contraction = rn_norm / res;
                x = xn;
                r = rn;
                res = rn_norm;
                if res <= opts.tol {
                    return Ok((x, res));
                }
                if contraction > 0.25 {
                    lu = fd_jacobian(&mut f, &x, opts.fd_step)?.lu();
                    fresh = true;
                } else {
                    fresh = false;
                }
            }
            None if !fresh => {
                lu = fd_jacobian(&mut f, &x, opts.fd_step)?.lu();
                fresh = true;
            }
            None => break,
        }
    }
    Err(Error::NewtonDivergence {
        context,
        residual: res,
        iterations,
    })
}

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical inverse of `index` in the given base (van der Corput).
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base as u64) as f64 * inv;
        index /= base as u64;
        inv /= b;
    }
    out
}

/// The first `count` points of the Halton sequence that fall inside the
/// closed ball of the given radius around `center`. The center itself is
/// always the first point.
pub fn halton_ball(center: &State, radius: f64, count: usize) -> Vec<State> {
    let n = center.len();
    assert!(
        n <= PRIMES.len(),
        "halton_ball supports at most {} dimensions",
        PRIMES.len()
    );
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(center.clone());
    let mut index = 1u64;
    while out.len() < count {
        let p = DVector::from_fn(n, |k, _| 2.0 * radical_inverse(index, PRIMES[k]) - 1.0);
        index += 1;
        if p.norm() <= 1.0 {
            out.push(center + p * radius);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_solves_a_smooth_system() {
        let f = |x: &DVector<f64>| -> Result<DVector<f64>> {
            Ok(DVector::from_vec(vec![
                x[0] * x[0] + x[1] - 2.0,
                x[0] - x[1] * x[1] * x[1],
            ]))
        };
        let (x, res) = newton_fd(f, state(&[0.8, 0.9]), NewtonOptions::default(), "test").unwrap();
        assert!(res <= 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-10 && (x[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn newton_reports_divergence() {
        let f = |x: &DVector<f64>| -> Result<DVector<f64>> { Ok(DVector::from_vec(vec![x[0] * x[0] + 1.0])) };
        let err = newton_fd(f, state(&[0.5]), NewtonOptions::default(), "test").unwrap_err();
        assert!(matches!(err, Error::NewtonDivergence { .. }));
    }

    #[test]
    fn halton_points_stay_in_the_ball() {
        let c = state(&[0.1, -0.2]);
        let pts = halton_ball(&c, 0.3, 200);
        assert_eq!(pts.len(), 200);
        assert!(pts.iter().all(|p| (p - &c).norm() <= 0.3 + 1e-15));
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }
}
