//! Empirical calibration of `C₀`, `κ₂` and the L¹-equivalence constant by
//! sweeping pairwise interactions and state pairs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flux_models::FluxModel;
use crate::functionals::{gnl_flags, PointWave, StabilityConstants, WaveList};
use crate::linalg::State;
use crate::riemann::{psi_compose, solve_shock_strengths, solve_strengths, WaveStrengths};
use crate::sampling::rng;

/// Safety factor applied to every swept ratio.
pub const MARGIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub samples: usize,
    pub seed: u64,
    pub delta: f64,
    /// `max ΔV / (−ΔQ)` over accurate and simplified outcomes.
    pub max_v_ratio: f64,
    /// `max Δ𝐀 / (−ΔQ)` away from the interaction point.
    pub max_a_ratio: f64,
    /// `max(Σ|q_i| / |Δu|, |Δu| / Σ|q_i|)` over state pairs.
    pub max_q_ratio: f64,
    pub c0: f64,
    pub kappa2: f64,
    pub c_equiv: f64,
}

impl CalibrationReport {
    pub fn constants(&self, kappa1: f64) -> StabilityConstants {
        StabilityConstants {
            c0: self.c0,
            kappa1,
            kappa2: self.kappa2,
            delta: self.delta,
        }
    }
}

fn random_in_ball(r: &mut impl Rng, n: usize, radius: f64) -> State {
    loop {
        let v = State::from_fn(n, |_, _| r.gen_range(-radius..=radius));
        if v.norm() <= radius {
            return v;
        }
    }
}

fn list(gnl: &[bool], waves: Vec<PointWave>) -> WaveList {
    WaveList::new(gnl.to_vec(), waves)
}

fn point_waves(x: f64, sigma: &[f64]) -> Vec<PointWave> {
    sigma
        .iter()
        .enumerate()
        .filter(|(_, s)| **s != 0.0)
        .map(|(i, &s)| PointWave {
            x,
            family: i,
            strength: s,
        })
        .collect()
}

/// The largest positive change of `𝐀_i(q, x)` for `x` outside the
/// interaction region.
fn a_increase(before: &WaveList, after: &WaveList, n: usize) -> f64 {
    let mut worst = 0.0_f64;
    for x in [-2.0, 2.0] {
        let (sb, sa) = (before.side_sums(x), after.side_sums(x));
        for i in 0..n {
            for q in [-1.0, 1.0] {
                worst = worst.max(sa.big_a(i, q) - sb.big_a(i, q));
            }
        }
    }
    worst
}

/// Sweep `samples` random approaching pairs with strengths up to `δ/2`
/// from states within `δ/2` of the origin.
pub fn calibrate(model: &FluxModel, delta: f64, samples: usize, seed: u64) -> Result<CalibrationReport> {
    let n = model.dim();
    let gnl = gnl_flags(model);
    let mut r = rng(seed);
    let (mut v_ratio, mut a_ratio, mut q_ratio) = (0.0_f64, 0.0_f64, 1.0_f64);
    let mut done = 0;
    let mut attempts = 0;
    while done < samples && attempts < 50 * samples.max(1) {
        attempts += 1;
        let ul = random_in_ball(&mut r, n, 0.5 * delta);
        let i = r.gen_range(0..n);
        let j = r.gen_range(0..n);
        let s = r.gen_range(-0.5 * delta..0.5 * delta);
        let s2 = r.gen_range(-0.5 * delta..0.5 * delta);
        // the left wave must be of a faster family, or the same genuinely
        // nonlinear family with a shock
        if i < j || (i == j && (!gnl[i] || s.min(s2) >= 0.0)) {
            continue;
        }
        let mut a = vec![0.0; n];
        a[i] = s;
        let Ok(um) = psi_compose(model, &WaveStrengths::new(a), &ul) else {
            continue;
        };
        let mut b = vec![0.0; n];
        b[j] = s2;
        let Ok(ur) = psi_compose(model, &WaveStrengths::new(b), &um) else {
            continue;
        };
        let before = list(
            &gnl,
            vec![
                PointWave {
                    x: -1.0,
                    family: i,
                    strength: s,
                },
                PointWave {
                    x: 1.0,
                    family: j,
                    strength: s2,
                },
            ],
        );
        let q_before = before.interaction_potential();
        let v_before = before.linear_functional();

        // accurate outcome: the Riemann strengths of the combined jump
        let e = solve_strengths(model, &ul, &ur)?;
        let accurate = list(&gnl, point_waves(0.0, &e.sigma));
        // simplified outcome: the incoming strengths plus a non-physical rest
        let mut out = vec![0.0; n];
        out[j] += s2;
        out[i] += s;
        let reached = if i == j {
            psi_compose(model, &WaveStrengths::new(out.clone()), &ul)
        } else {
            let mut first = vec![0.0; n];
            first[j] = s2;
            let mid = psi_compose(model, &WaveStrengths::new(first), &ul)?;
            let mut second = vec![0.0; n];
            second[i] = s;
            psi_compose(model, &WaveStrengths::new(second), &mid)
        };
        let Ok(reached) = reached else { continue };
        let mut simplified_waves = point_waves(0.0, &out);
        simplified_waves.push(PointWave {
            x: 0.0,
            family: n,
            strength: (&ur - &reached).norm(),
        });
        let simplified = list(&gnl, simplified_waves);

        if q_before <= 0.0 {
            continue;
        }
        for after in [&accurate, &simplified] {
            let dq = q_before - after.interaction_potential();
            if dq <= 0.0 {
                continue;
            }
            v_ratio = v_ratio.max((after.linear_functional() - v_before) / dq);
            a_ratio = a_ratio.max(a_increase(&before, after, n) / dq);
        }

        // equivalence of Σ|q_i| and |Δu| on the same states
        let q = solve_shock_strengths(model, &ul, &ur)?;
        let dist = (&ur - &ul).norm();
        if dist > 0.0 {
            let qs: f64 = q.sigma.iter().map(|x| x.abs()).sum();
            q_ratio = q_ratio.max(qs / dist).max(dist / qs);
        }
        done += 1;
    }
    Ok(CalibrationReport {
        samples: done,
        seed,
        delta,
        max_v_ratio: v_ratio,
        max_a_ratio: a_ratio,
        max_q_ratio: q_ratio,
        c0: (MARGIN * v_ratio).max(4.0),
        kappa2: (MARGIN * a_ratio).max(1.0),
        c_equiv: MARGIN * q_ratio,
    })
}
