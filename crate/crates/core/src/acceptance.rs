//! The acceptance suite: nine seeded property checks over the whole
//! library, shared by the CLI and the integration tests.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{calibrate, CalibrationReport};
use crate::error::Result;
use crate::flux_models::{builtin, FluxModel, ModelId};
use crate::front_tracking::{ft_solve_with, max_phi_increase, phi_timeline, FTTrajectory, TrackingOptions};
use crate::functionals::{
    glimm_values, remove_values, stability_phi, stability_phi_detailed, PiecewiseConstantFn, StabilityConstants,
};
use crate::linalg::State;
use crate::riemann::{psi_compose, shock_compose, solve_shock_strengths, solve_strengths, WaveStrengths};
use crate::sampling::{random_bv, random_step, random_step_pair, rng, StepSpec};
use crate::wave_measures::{approx_sequence, gap_bound, wave_measures, xi_hat, AffinePiece, BVFunction};

/// Slack constant in `max [Φ(t₂) − Φ(t₁)]⁺ ≤ C·ε·(1 + T)`, fitted on
/// independent seeds and frozen.
pub const C_MONOTONICITY: f64 = 0.05;
/// Constant in `|Φ − Φ^ε| ≤ C·ε·‖w − w̃‖₁`, fitted and frozen.
pub const C_PHI_EPS: f64 = 0.05;
/// Constant in the gap bound on intervals without jumps.
pub const C_DIAM: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(label: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            measured,
            bound,
            pass: measured <= bound,
        }
    }

    fn at_least(label: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            measured,
            bound,
            pass: measured >= bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub checks: Vec<Check>,
}

impl CriterionResult {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    /// One line: id, name, verdict and every check.
    pub fn summary(&self) -> String {
        let checks: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                format!(
                    "{} {:.3e} vs {:.3e}{}",
                    c.label,
                    c.measured,
                    c.bound,
                    if c.pass { "" } else { " (FAILED)" }
                )
            })
            .collect();
        format!(
            "criterion {} {}: {} [{}]",
            self.id,
            self.name,
            if self.pass() { "PASS" } else { "FAIL" },
            checks.join("; ")
        )
    }
}

/// Seeds and sample counts; the defaults are the suite's stated sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcceptanceConfig {
    pub seed: u64,
    pub round_trips: usize,
    pub coarsenings: usize,
    pub equivalence_pairs: usize,
    pub coincidence_pairs: usize,
    pub approx_inputs: usize,
    pub trajectories: usize,
    pub eps: Vec<f64>,
    pub t_final: f64,
    pub sample_times: usize,
    pub lsc_sequences: usize,
    pub taylor_samples: usize,
    pub calibration_samples: usize,
    pub delta: f64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            round_trips: 1000,
            coarsenings: 1000,
            equivalence_pairs: 500,
            coincidence_pairs: 200,
            approx_inputs: 50,
            trajectories: 20,
            eps: vec![0.02, 0.01, 0.005],
            t_final: 1.0,
            sample_times: 21,
            lsc_sequences: 10,
            taylor_samples: 50,
            calibration_samples: 1000,
            delta: 0.1,
        }
    }
}

fn p_system() -> FluxModel {
    builtin(&ModelId::PSystem { gamma: 1.4 }).expect("built-in p-system")
}

fn burgers() -> FluxModel {
    builtin(&ModelId::Burgers).expect("built-in Burgers")
}

fn sub_seed(seed: u64, stream: u64, k: usize) -> u64 {
    seed.wrapping_mul(1_000_003)
        .wrapping_add(stream.wrapping_mul(7_919))
        .wrapping_add(k as u64)
}

fn random_ball(r: &mut impl Rng, n: usize, radius: f64) -> State {
    loop {
        let v = State::from_fn(n, |_, _| r.gen_range(-radius..=radius));
        if v.norm() <= radius {
            return v;
        }
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Criterion 1: `E∘Ψ` and `q∘S` reproduce the strengths.
pub fn riemann_round_trip(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    for (name, model) in [("burgers", burgers()), ("p_system", p_system())] {
        let n = model.dim();
        let errs = (0..cfg.round_trips)
            .into_par_iter()
            .map(|k| -> Result<(f64, f64)> {
                let mut r = rng(sub_seed(cfg.seed, 1, k));
                let um = random_ball(&mut r, n, 0.2);
                let sigma = WaveStrengths::new((0..n).map(|_| r.gen_range(-0.1..=0.1)).collect());
                let up = psi_compose(&model, &sigma, &um)?;
                let e = solve_strengths(&model, &um, &up)?;
                let us = shock_compose(&model, &sigma, &um)?;
                let q = solve_shock_strengths(&model, &um, &us)?;
                Ok((e.max_abs_diff(&sigma), q.max_abs_diff(&sigma)))
            })
            .collect::<Result<Vec<_>>>()?;
        let e = errs.iter().map(|p| p.0).fold(0.0, f64::max);
        let q = errs.iter().map(|p| p.1).fold(0.0, f64::max);
        checks.push(Check::at_most(format!("{name} |E(Ψ(σ))−σ|∞"), e, 1e-9));
        checks.push(Check::at_most(format!("{name} |q(S(q))−q|∞"), q, 1e-9));
    }
    Ok(CriterionResult {
        id: 1,
        name: "Riemann round trip",
        checks,
    })
}

/// Criterion 2: Removing values never increases `Q` or `Υ`.
pub fn coarsening_monotonicity(cfg: &AcceptanceConfig, consts: &StabilityConstants) -> Result<CriterionResult> {
    let model = p_system();
    let spec = StepSpec {
        pieces: 8,
        ..Default::default()
    };
    let out = (0..cfg.coarsenings)
        .into_par_iter()
        .map(|k| -> Result<(f64, f64)> {
            let mut r = rng(sub_seed(cfg.seed, 2, k));
            let u = random_step(&model, &mut r, &spec, consts.c0)?;
            let keep: Vec<bool> = (0..u.values().len()).map(|_| r.gen_bool(0.6)).collect();
            let coarse = remove_values(&u, &keep)?;
            let (g, gc) = (
                glimm_values(&model, &u, consts.c0)?,
                glimm_values(&model, &coarse, consts.c0)?,
            );
            Ok((gc.q - g.q, gc.upsilon - g.upsilon))
        })
        .collect::<Result<Vec<_>>>()?;
    let dq = out.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let du = out.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(CriterionResult {
        id: 2,
        name: "coarsening monotonicity",
        checks: vec![
            Check::at_most("max Q(ǔ)−Q(u)", dq, 1e-10),
            Check::at_most("max Υ(ǔ)−Υ(u)", du, 1e-10),
        ],
    })
}

/// Criterion 3: `Φ / ‖v − ṽ‖₁ ∈ [1/C, 2C]` and `Φ(u, u) = 0`.
pub fn l1_equivalence(
    cfg: &AcceptanceConfig,
    calibrations: &[(&str, FluxModel, CalibrationReport)],
) -> Result<CriterionResult> {
    let mut checks = Vec::new();
    for (name, model, cal) in calibrations {
        let consts = cal.constants(1.0);
        let spec = StepSpec {
            upsilon_max: cfg.delta,
            ..Default::default()
        };
        let ratios = (0..cfg.equivalence_pairs)
            .into_par_iter()
            .map(|k| -> Result<(f64, f64)> {
                let mut r = rng(sub_seed(cfg.seed, 3, k));
                let (v, vt) = random_step_pair(model, &mut r, &spec, consts.c0)?;
                let e = stability_phi_detailed(model, &v, &vt, &consts)?;
                let self_phi = stability_phi(model, &v, &v, &consts)?;
                Ok((if e.l1 > 0.0 { e.phi / e.l1 } else { 1.0 }, self_phi))
            })
            .collect::<Result<Vec<_>>>()?;
        let lo = ratios.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().map(|p| p.0).fold(0.0, f64::max);
        let self_max = ratios.iter().map(|p| p.1).fold(0.0, f64::max);
        checks.push(Check::at_least(
            format!("{name} min Φ/‖v−ṽ‖₁ (1/C)"),
            lo,
            1.0 / cal.c_equiv,
        ));
        checks.push(Check::at_most(
            format!("{name} max Φ/‖v−ṽ‖₁ (2C)"),
            hi,
            2.0 * cal.c_equiv,
        ));
        checks.push(Check::at_most(format!("{name} max Φ(u,u)"), self_max, 0.0));
    }
    Ok(CriterionResult {
        id: 3,
        name: "L1 equivalence",
        checks,
    })
}

/// Criterion 4: `Ξ̂ = Φ` on step functions and `Q̂(v_ν) → Q̂(u)` at rate `1/ν`.
pub fn coincidence(cfg: &AcceptanceConfig, consts: &StabilityConstants) -> Result<CriterionResult> {
    let model = p_system();
    let spec = StepSpec::default();
    let rel = (0..cfg.coincidence_pairs)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let mut r = rng(sub_seed(cfg.seed, 4, k));
            let (v, vt) = random_step_pair(&model, &mut r, &spec, consts.c0)?;
            let phi = stability_phi(&model, &v, &vt, consts)?;
            let xi = xi_hat(&model, &BVFunction::from_pcf(&v), &BVFunction::from_pcf(&vt), consts)?;
            Ok((xi - phi).abs() / phi.max(1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = rel.iter().copied().fold(0.0, f64::max);
    // The mesh budget 1/((b−a)ν) is absolute, so on data of tiny variation
    // it does not bind for small ν and the error is flat there. These inputs
    // are not capped in Υ̂, which keeps ν ∈ [10, 80] in the asymptotic range.
    let bv_spec = StepSpec {
        amplitude: 0.1,
        upsilon_max: f64::INFINITY,
        ..Default::default()
    };
    let nus = [10.0, 20.0, 40.0, 80.0];
    let slopes = (0..cfg.approx_inputs)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let mut r = rng(sub_seed(cfg.seed, 5, k));
            let u = random_bv(&model, &mut r, &bv_spec, consts)?;
            let q = wave_measures(&model, &u)?.interaction();
            let mut errs = Vec::new();
            for &nu in &nus {
                let v = approx_sequence(&u, nu as usize)?;
                let qv = wave_measures(&model, &BVFunction::from_pcf(&v))?.interaction();
                errs.push((qv - q).abs());
            }
            Ok(log_log_slope(&nus, &errs))
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CriterionResult {
        id: 4,
        name: "coincidence of the two constructions",
        checks: vec![
            Check::at_most("max |Ξ̂−Φ|/max(1,Φ)", worst, 1e-8),
            Check::at_most("max fitted slope of |Q̂(v_ν)−Q̂(u)|", slope, -0.8),
        ],
    })
}

/// Evolved pairs for one `ε`.
pub struct EvolvedPairs {
    pub eps: f64,
    pub pairs: Vec<(FTTrajectory, FTTrajectory)>,
}

pub fn evolve_pairs(cfg: &AcceptanceConfig, consts: &StabilityConstants) -> Result<Vec<EvolvedPairs>> {
    let model = p_system();
    let spec = StepSpec {
        upsilon_max: cfg.delta,
        ..Default::default()
    };
    let data = (0..cfg.trajectories)
        .map(|k| {
            let mut r = rng(sub_seed(cfg.seed, 6, k));
            random_step_pair(&model, &mut r, &spec, consts.c0)
        })
        .collect::<Result<Vec<_>>>()?;
    cfg.eps
        .iter()
        .map(|&eps| {
            let opts = TrackingOptions::new(eps, cfg.t_final);
            let pairs = data
                .par_iter()
                .map(|(v, vt)| {
                    Ok((
                        ft_solve_with(&model, v, &opts, consts)?,
                        ft_solve_with(&model, vt, &opts, consts)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(EvolvedPairs { eps, pairs })
        })
        .collect()
}

/// Per `ε`: the worst `Φ` increase, and the worst `|Φ − Φ^ε|` with its
/// ratio to `ε‖w − w̃‖₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryStats {
    pub eps: f64,
    pub max_excess: f64,
    pub max_gap: f64,
    pub max_gap_ratio: f64,
    pub max_upsilon_increase: f64,
    pub max_non_physical: f64,
}

pub fn trajectory_stats(
    cfg: &AcceptanceConfig,
    runs: &[EvolvedPairs],
    consts: &StabilityConstants,
) -> Result<Vec<TrajectoryStats>> {
    let times: Vec<f64> = (0..cfg.sample_times)
        .map(|k| cfg.t_final * k as f64 / (cfg.sample_times.max(2) - 1) as f64)
        .collect();
    runs.iter()
        .map(|run| {
            let per_pair = run
                .pairs
                .par_iter()
                .map(|(a, b)| -> Result<(f64, f64, f64)> {
                    let s = phi_timeline(a, b, consts, &times)?;
                    let gap = s.iter().map(|p| (p.phi - p.phi_eps).abs()).fold(0.0, f64::max);
                    let ratio = s
                        .iter()
                        .filter(|p| p.l1 > 0.0)
                        .map(|p| (p.phi - p.phi_eps).abs() / (run.eps * p.l1))
                        .fold(0.0, f64::max);
                    Ok((max_phi_increase(&s), gap, ratio))
                })
                .collect::<Result<Vec<_>>>()?;
            let trajs = run.pairs.iter().flat_map(|(a, b)| [a, b]);
            Ok(TrajectoryStats {
                eps: run.eps,
                max_excess: per_pair.iter().map(|p| p.0).fold(0.0, f64::max),
                max_gap: per_pair.iter().map(|p| p.1).fold(0.0, f64::max),
                max_gap_ratio: per_pair.iter().map(|p| p.2).fold(0.0, f64::max),
                max_upsilon_increase: trajs
                    .clone()
                    .map(|t| t.max_upsilon_increase())
                    .fold(f64::NEG_INFINITY, f64::max),
                max_non_physical: trajs.map(|t| t.max_non_physical()).fold(0.0, f64::max),
            })
        })
        .collect()
}

/// Least-squares slope of the excess against `ε` over the positive values.
/// Zeros are allowed only at the fine end; a single positive value, or none,
/// counts as `+∞`.
pub fn excess_slope(stats: &[TrajectoryStats]) -> f64 {
    let mut sorted: Vec<&TrajectoryStats> = stats.iter().collect();
    sorted.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let positive: Vec<&&TrajectoryStats> = sorted.iter().filter(|s| s.max_excess > 0.0).collect();
    if positive.is_empty() {
        return f64::INFINITY;
    }
    // a zero followed by a positive value at finer ε breaks the trend
    let first_zero = sorted.iter().position(|s| s.max_excess == 0.0);
    if let Some(z) = first_zero {
        if sorted[z..].iter().any(|s| s.max_excess > 0.0) {
            return f64::NEG_INFINITY;
        }
    }
    if positive.len() < 2 {
        return f64::INFINITY;
    }
    let x: Vec<f64> = positive.iter().map(|s| s.eps).collect();
    let y: Vec<f64> = positive.iter().map(|s| s.max_excess).collect();
    log_log_slope(&x, &y)
}

/// Criterion 5: `Φ` is nonincreasing up to `C·ε·(1 + T)`, the excess shrinking with `ε`.
pub fn monotonicity(cfg: &AcceptanceConfig, stats: &[TrajectoryStats]) -> CriterionResult {
    let mut checks: Vec<Check> = stats
        .iter()
        .map(|s| {
            Check::at_most(
                format!("ε={} max [Φ(t₂)−Φ(t₁)]⁺", s.eps),
                s.max_excess,
                C_MONOTONICITY * s.eps * (1.0 + cfg.t_final),
            )
        })
        .collect();
    checks.push(Check::at_least(
        "log-log slope of excess in ε",
        excess_slope(stats),
        0.8,
    ));
    CriterionResult {
        id: 5,
        name: "monotonicity along trajectories",
        checks,
    }
}

/// Criterion 6: `|Φ − Φ^ε| ≤ C·ε·‖w − w̃‖₁`, halving with `ε`.
pub fn phi_eps_gap(stats: &[TrajectoryStats]) -> CriterionResult {
    let mut checks: Vec<Check> = stats
        .iter()
        .map(|s| Check::at_most(format!("ε={} max |Φ−Φ^ε|/(ε‖w−w̃‖₁)", s.eps), s.max_gap_ratio, C_PHI_EPS))
        .collect();
    let mut sorted: Vec<&TrajectoryStats> = stats.iter().collect();
    sorted.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    for w in sorted.windows(2) {
        if (w[0].eps / w[1].eps - 2.0).abs() < 1e-9 {
            let ratio = w[0].max_gap / w[1].max_gap;
            let label = format!("gap ratio ε={} to ε={}", w[0].eps, w[1].eps);
            checks.push(Check {
                pass: (1.5..=2.5).contains(&ratio),
                label: format!("{label} in [1.5, 2.5]"),
                measured: ratio,
                bound: 2.0,
            });
        }
    }
    CriterionResult {
        id: 6,
        name: "Φ vs Φ^ε gap",
        checks,
    }
}

/// Criterion 7: `Υ^ε` never increases at an event.
pub fn glimm_decay(stats: &[TrajectoryStats]) -> CriterionResult {
    let worst = stats
        .iter()
        .map(|s| s.max_upsilon_increase)
        .fold(f64::NEG_INFINITY, f64::max);
    CriterionResult {
        id: 7,
        name: "Glimm decay",
        checks: vec![Check::at_most("max increase of Υ^ε at an event", worst, 1e-10)],
    }
}

/// Plateau `α` of `u` split into teeth alternating `u_α` and
/// `u_α + amplitude·d`; dropping the tooth values returns `u`.
fn sawtooth(
    u: &PiecewiseConstantFn,
    teeth: usize,
    amplitude: f64,
    dir: &State,
) -> Result<(PiecewiseConstantFn, Vec<bool>)> {
    let bp = u.breakpoints();
    let (mut xs, mut vals, mut keep) = (vec![bp[0]], Vec::new(), Vec::new());
    for (k, v) in u.values().iter().enumerate() {
        let h = (bp[k + 1] - bp[k]) / (2 * teeth) as f64;
        for m in 0..2 * teeth {
            let tooth = m % 2 == 1;
            vals.push(if tooth { v + dir * amplitude } else { v.clone() });
            keep.push(!tooth);
            xs.push(if m + 1 == 2 * teeth {
                bp[k + 1]
            } else {
                bp[k] + (m + 1) as f64 * h
            });
        }
    }
    Ok((PiecewiseConstantFn::new(u.dim(), xs, vals)?, keep))
}

/// Criterion 8: `Υ` and `Q̂` along oscillating sequences stay above their limits.
pub fn lower_semicontinuity(cfg: &AcceptanceConfig, consts: &StabilityConstants) -> Result<CriterionResult> {
    let (mut du, mut dq) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for k in 0..cfg.lsc_sequences {
        let model = if k % 2 == 0 { burgers() } else { p_system() };
        let n = model.dim();
        let mut r = rng(sub_seed(cfg.seed, 8, k));
        let u = random_step(
            &model,
            &mut r,
            &StepSpec {
                pieces: 4,
                upsilon_max: 0.5 * cfg.delta,
                ..Default::default()
            },
            consts.c0,
        )?;
        let dir = random_ball(&mut r, n, 1.0).normalize();
        let g = glimm_values(&model, &u, consts.c0)?;
        let qh = wave_measures(&model, &BVFunction::from_pcf(&u))?.interaction();
        for nu in [1usize, 2, 4, 8, 16, 32, 64] {
            let (un, keep) = sawtooth(&u, 3, 0.01 / nu as f64, &dir)?;
            debug_assert_eq!(remove_values(&un, &keep)?, u);
            let gn = glimm_values(&model, &un, consts.c0)?;
            let qn = wave_measures(&model, &BVFunction::from_pcf(&un))?.interaction();
            du = du.max(g.upsilon - gn.upsilon);
            dq = dq.max(qh - qn);
        }
        // an affine ramp against the same ramp with oscillating bumps
        let ramp = BVFunction::new(
            n,
            vec![AffinePiece {
                a: 0.0,
                b: 2.0,
                p: State::zeros(n),
                slope: &dir * (-0.02),
            }],
        )?;
        let q_ramp = wave_measures(&model, &ramp)?.interaction();
        for nu in [1usize, 2, 4, 8, 16, 32, 64] {
            let amp = 0.005 / nu as f64;
            let pieces = (0..6)
                .map(|m| {
                    let a = m as f64 / 3.0;
                    AffinePiece {
                        a,
                        b: a + 1.0 / 3.0,
                        p: &dir * (-0.02 * a) + &dir * if m % 2 == 1 { amp } else { 0.0 },
                        slope: &dir * (-0.02),
                    }
                })
                .collect();
            let bumped = BVFunction::new(n, pieces)?;
            dq = dq.max(q_ramp - wave_measures(&model, &bumped)?.interaction());
        }
    }
    Ok(CriterionResult {
        id: 8,
        name: "lower semicontinuity",
        checks: vec![
            Check::at_most("max Υ(u) − Υ(u_ν)", du, 1e-8),
            Check::at_most("max Q̂(u) − Q̂(u_ν)", dq, 1e-8),
        ],
    })
}

/// Criterion 9: Exact scalar gap bound, the fitted gap constant for the p-system and
/// the quadratic Taylor remainder of `E`.
pub fn gap_and_taylor(cfg: &AcceptanceConfig, consts: &StabilityConstants) -> Result<CriterionResult> {
    let (b, p) = (burgers(), p_system());
    let spec = StepSpec::default();
    let intervals = |r: &mut rand_chacha::ChaCha8Rng| {
        let a = r.gen_range(-0.5..spec.span);
        (a, a + r.gen_range(0.05..spec.span))
    };
    let mut scalar = 0.0_f64;
    let mut ratio = 0.0_f64;
    for k in 0..cfg.taylor_samples {
        let mut r = rng(sub_seed(cfg.seed, 9, k));
        let u = random_bv(&b, &mut r, &spec, consts)?;
        for _ in 0..4 {
            let (a, c) = intervals(&mut r);
            scalar = scalar.max(gap_bound(&b, &u, a, c)?.lhs);
        }
        let u = random_bv(&p, &mut r, &spec, consts)?;
        for _ in 0..4 {
            let (a, c) = intervals(&mut r);
            let g = gap_bound(&p, &u, a, c)?;
            if g.rhs > 0.0 {
                ratio = ratio.max(g.lhs / g.rhs);
            }
        }
    }
    let hs = [0.04, 0.02, 0.01];
    let mut exponent = f64::INFINITY;
    for k in 0..cfg.taylor_samples {
        let mut r = rng(sub_seed(cfg.seed, 10, k));
        let u = random_ball(&mut r, 2, 0.2);
        let dir = random_ball(&mut r, 2, 1.0).normalize();
        let l = p.eigen_at(&u)?.left_vecs;
        let mut rem = Vec::new();
        for &h in &hs {
            let ut = &u + &dir * h;
            let e = solve_strengths(&p, &u, &ut)?;
            let worst = (0..2)
                .map(|i| (e.sigma[i] - l[i].dot(&(&ut - &u))).abs())
                .fold(0.0, f64::max);
            rem.push(worst);
        }
        exponent = exponent.min(log_log_slope(&hs, &rem));
    }
    Ok(CriterionResult {
        id: 9,
        name: "gap bound and Taylor remainder",
        checks: vec![
            Check::at_most("burgers max lhs", scalar, 1e-13),
            Check::at_most("p_system max lhs/rhs", ratio, C_DIAM),
            Check::at_least("p_system min Taylor exponent", exponent, 1.8),
        ],
    })
}

/// The calibrations used by the suite.
pub fn calibrations(cfg: &AcceptanceConfig) -> Result<Vec<(&'static str, FluxModel, CalibrationReport)>> {
    [("burgers", burgers()), ("p_system", p_system())]
        .into_iter()
        .map(|(name, m)| {
            let c = calibrate(&m, cfg.delta, cfg.calibration_samples, cfg.seed)?;
            Ok((name, m, c))
        })
        .collect()
}

pub struct AcceptanceReport {
    pub calibrations: Vec<(&'static str, CalibrationReport)>,
    pub trajectory_stats: Vec<TrajectoryStats>,
    pub results: Vec<CriterionResult>,
}

impl AcceptanceReport {
    pub fn pass(&self) -> bool {
        self.results.iter().all(|r| r.pass())
    }

    /// Flat rows `{criterion, check, measured, bound, pass}`.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .results
            .iter()
            .flat_map(|r| {
                r.checks.iter().map(move |c| {
                    serde_json::json!({
                        "criterion": r.id,
                        "name": r.name,
                        "check": c.label,
                        "measured": c.measured,
                        "bound": c.bound,
                        "pass": c.pass,
                    })
                })
            })
            .collect();
        let cals: serde_json::Map<String, serde_json::Value> = self
            .calibrations
            .iter()
            .map(|(n, c)| (n.to_string(), serde_json::to_value(c).unwrap_or_default()))
            .collect();
        serde_json::json!({
            "pass": self.pass(),
            "criteria": rows,
            "calibration": cals,
            "frozen_constants": {
                "C_monotonicity": C_MONOTONICITY,
                "C_phi_eps": C_PHI_EPS,
                "C_diam": C_DIAM,
            },
            "trajectory_stats": self.trajectory_stats,
        })
    }
}

/// Run all nine criteria. Numerical failures abort; criterion failures are
/// reported in the results.
pub fn run_acceptance(cfg: &AcceptanceConfig) -> Result<AcceptanceReport> {
    let cals = calibrations(cfg)?;
    let p_consts = cals[1].2.constants(1.0);
    let runs = evolve_pairs(cfg, &p_consts)?;
    let stats = trajectory_stats(cfg, &runs, &p_consts)?;
    let results = vec![
        riemann_round_trip(cfg)?,
        coarsening_monotonicity(cfg, &p_consts)?,
        l1_equivalence(cfg, &cals)?,
        coincidence(cfg, &p_consts)?,
        monotonicity(cfg, &stats),
        phi_eps_gap(&stats),
        glimm_decay(&stats),
        lower_semicontinuity(cfg, &p_consts)?,
        gap_and_taylor(cfg, &p_consts)?,
    ];
    Ok(AcceptanceReport {
        calibrations: cals.into_iter().map(|(n, _, c)| (n, c)).collect(),
        trajectory_stats: stats,
        results,
    })
}
