//! Seeded generators of admissible test data.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux_models::FluxModel;
use crate::functionals::StabilityConstants;
use crate::functionals::{glimm_values, PiecewiseConstantFn};
use crate::linalg::State;
use crate::wave_measures::{upsilon_hat, AffinePiece, BVFunction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parameters of a random step function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepSpec {
    pub pieces: usize,
    pub amplitude: f64,
    pub span: f64,
    /// Target bound on `Υ`; data are scaled down until below it.
    pub upsilon_max: f64,
}

impl Default for StepSpec {
    fn default() -> Self {
        Self {
            pieces: 6,
            amplitude: 0.03,
            span: 4.0,
            upsilon_max: 0.1,
        }
    }
}

fn random_state(rng: &mut ChaCha8Rng, n: usize, amplitude: f64) -> State {
    State::from_fn(n, |_, _| rng.gen_range(-amplitude..=amplitude))
}

fn sorted_points(rng: &mut ChaCha8Rng, count: usize, span: f64) -> Vec<f64> {
    // distinct points with a minimum separation keep the mesh honest
    loop {
        let mut pts: Vec<f64> = (0..count).map(|_| rng.gen_range(0.0..span)).collect();
        pts.sort_by(|a, b| a.total_cmp(b));
        if pts.windows(2).all(|w| w[1] - w[0] > 1e-3 * span) {
            return pts;
        }
    }
}

/// Scale `f` by powers of 0.7 until `measure(f) < bound`.
fn shrink_until<T, F, S>(mut f: T, bound: f64, measure: F, scale: S) -> Result<T>
where
    F: Fn(&T) -> Result<f64>,
    S: Fn(&T, f64) -> T,
{
    for _ in 0..60 {
        if measure(&f)? < bound {
            return Ok(f);
        }
        f = scale(&f, 0.7);
    }
    Err(Error::InvalidInput(format!(
        "could not bring the sample below the bound {bound}"
    )))
}

/// A random step function with `Υ < upsilon_max`.
pub fn random_step(model: &FluxModel, rng: &mut ChaCha8Rng, spec: &StepSpec, c0: f64) -> Result<PiecewiseConstantFn> {
    let n = model.dim();
    let bps = sorted_points(rng, spec.pieces + 1, spec.span);
    let vals = (0..spec.pieces).map(|_| random_state(rng, n, spec.amplitude)).collect();
    let u = PiecewiseConstantFn::new(n, bps, vals)?;
    shrink_until(
        u,
        spec.upsilon_max,
        |u| Ok(glimm_values(model, u, c0)?.upsilon),
        |u, s| u.scaled(s),
    )
}

/// A random pair `(v, ṽ)`: `ṽ` is either an independent sample or a
/// perturbation of `v` on a random subset of its plateaus.
pub fn random_step_pair(
    model: &FluxModel,
    rng: &mut ChaCha8Rng,
    spec: &StepSpec,
    c0: f64,
) -> Result<(PiecewiseConstantFn, PiecewiseConstantFn)> {
    let v = random_step(model, rng, spec, c0)?;
    let vt = if rng.gen_bool(0.5) {
        random_step(model, rng, spec, c0)?
    } else {
        let n = model.dim();
        let shift = rng.gen_range(-0.3..0.3) * spec.span / spec.pieces.max(1) as f64;
        let vals = v
            .values()
            .iter()
            .map(|x| {
                if rng.gen_bool(0.5) {
                    x + random_state(rng, n, 0.3 * spec.amplitude)
                } else {
                    x.clone()
                }
            })
            .collect();
        let bps = v.breakpoints().iter().map(|b| b + shift).collect();
        let w = PiecewiseConstantFn::new(n, bps, vals)?;
        shrink_until(
            w,
            spec.upsilon_max,
            |u| Ok(glimm_values(model, u, c0)?.upsilon),
            |u, s| u.scaled(s),
        )?
    };
    Ok((v, vt))
}

/// A random BV function of affine pieces, some joined continuously and
/// some separated by jumps, with `Υ̂ < upsilon_max`.
pub fn random_bv(
    model: &FluxModel,
    rng: &mut ChaCha8Rng,
    spec: &StepSpec,
    consts: &StabilityConstants,
) -> Result<BVFunction> {
    let n = model.dim();
    let bps = sorted_points(rng, spec.pieces + 1, spec.span);
    let mut pieces = Vec::with_capacity(spec.pieces);
    let mut end_value = State::zeros(n);
    for w in bps.windows(2) {
        let p = if pieces.is_empty() || rng.gen_bool(0.5) {
            random_state(rng, n, spec.amplitude)
        } else {
            end_value.clone()
        };
        let q = random_state(rng, n, spec.amplitude);
        let slope = (&q - &p) / (w[1] - w[0]);
        end_value = q;
        pieces.push(AffinePiece {
            a: w[0],
            b: w[1],
            p,
            slope,
        });
    }
    let u = BVFunction::new(n, pieces)?;
    shrink_until(
        u,
        spec.upsilon_max,
        |u| upsilon_hat(model, u, consts),
        |u, s| u.scaled(s),
    )
}
