//! Wave curves, their compositions `Ψ` and `S`, the inverse strength maps
//! `E(u⁻, u⁺)` and `q(u⁻, u⁺)`, and the ε-discretized Riemann fan.
//!
//! Families are 0-based throughout the library.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux_models::FluxModel;
use crate::linalg::{newton_fd, sup_norm, NewtonOptions, State};

/// RK4 step length along rarefaction curves.
pub const RK_STEP: f64 = 1e-3;
/// Waves weaker than this are dropped from fans.
pub const PRUNE_STRENGTH: f64 = 1e-14;
/// Below this `|σ|` the Hugoniot branch is replaced by the integral curve;
/// the two agree to `O(σ³)`, far beneath rounding.
const SHOCK_LINEAR_LIMIT: f64 = 1e-6;

/// Signed strengths `(σ_1, …, σ_n)` of the waves of one Riemann problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveStrengths {
    pub sigma: Vec<f64>,
}

impl WaveStrengths {
    pub fn new(sigma: Vec<f64>) -> Self {
        Self { sigma }
    }

    pub fn zeros(n: usize) -> Self {
        Self { sigma: vec![0.0; n] }
    }

    pub fn total(&self) -> f64 {
        self.sigma.iter().map(|s| s.abs()).sum()
    }

    pub fn max_abs_diff(&self, other: &WaveStrengths) -> f64 {
        self.sigma
            .iter()
            .zip(&other.sigma)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

fn rk4_curve(model: &FluxModel, i: usize, sigma: f64, u: &State) -> Result<State> {
    if sigma == 0.0 {
        return Ok(u.clone());
    }
    let steps = (sigma.abs() / RK_STEP).ceil().max(1.0) as usize;
    let h = sigma / steps as f64;
    let mut x = u.clone();
    for _ in 0..steps {
        let k1 = model.right_vector(i, &x)?;
        let k2 = model.right_vector(i, &(&x + &k1 * (0.5 * h)))?;
        let k3 = model.right_vector(i, &(&x + &k2 * (0.5 * h)))?;
        let k4 = model.right_vector(i, &(&x + &k3 * h))?;
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::IntegrationFailure(format!(
            "rarefaction curve of family {} left finite range (sigma = {sigma})",
            i + 1
        )));
    }
    Ok(x)
}

/// `R_i(σ)(u⁻)`: the integral curve of `r_i` through `u⁻`. Negative `σ`
/// integrates backwards, which is meaningful for linearly degenerate fields
/// and for curve comparisons.
pub fn rarefaction_point(model: &FluxModel, i: usize, sigma: f64, u_minus: &State) -> Result<State> {
    check_family(model, i)?;
    model.check_domain(u_minus)?;
    let u = rk4_curve(model, i, sigma, u_minus)?;
    model.check_domain(&u)?;
    Ok(u)
}

fn shock_raw(model: &FluxModel, i: usize, sigma: f64, u_minus: &State) -> Result<(State, f64)> {
    let lam_minus = model.lambda(i, u_minus)?;
    if sigma == 0.0 {
        return Ok((u_minus.clone(), lam_minus));
    }
    if !model.field_kind()[i].is_gnl() {
        // Hugoniot locus and integral curve coincide; the speed is constant.
        return Ok((rk4_curve(model, i, sigma, u_minus)?, lam_minus));
    }
    let predictor = rk4_curve(model, i, sigma, u_minus)?;
    if sigma.abs() < SHOCK_LINEAR_LIMIT {
        let s = 0.5 * (lam_minus + model.lambda(i, &predictor)?);
        return Ok((predictor, s));
    }
    let s0 = 0.5 * (lam_minus + model.lambda(i, &predictor)?);
    match hugoniot_newton(model, i, sigma, u_minus, lam_minus, predictor, s0) {
        Ok(found) => Ok(found),
        Err(_) => shock_by_continuation(model, i, sigma, u_minus, lam_minus),
    }
}

/// Newton on `(u⁺, s)` for `f(u⁺) − f(u⁻) = s(u⁺ − u⁻)`,
/// `λ_i(u⁺) − λ_i(u⁻) = k_i σ`, with the analytic Jacobian.
fn hugoniot_newton(
    model: &FluxModel,
    i: usize,
    sigma: f64,
    u_minus: &State,
    lam_minus: f64,
    mut u: State,
    mut s: f64,
) -> Result<(State, f64)> {
    let n = model.dim();
    let target = model.k()[i] * sigma;
    let f_minus = model.flux(u_minus);
    let residual = |u: &State, s: f64| -> Result<DVector<f64>> {
        let d = u - u_minus;
        let rh = model.flux(u) - &f_minus - &d * s;
        let mut r = DVector::zeros(n + 1);
        r.rows_mut(0, n).copy_from(&rh);
        r[n] = model.lambda(i, u)? - lam_minus - target;
        Ok(r)
    };
    let scale = sigma.abs().max(1e-300);
    let mut r = residual(&u, s)?;
    for iter in 0..30 {
        let res = sup_norm(&r);
        if res <= 1e-15 {
            return Ok((u, s));
        }
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        let df = model.jacobian(&u);
        jac.view_mut((0, 0), (n, n))
            .copy_from(&(df - DMatrix::identity(n, n) * s));
        let d = &u - u_minus;
        for k in 0..n {
            jac[(k, n)] = -d[k];
        }
        let g = model.lambda_gradient(i, &u)?;
        for k in 0..n {
            jac[(n, k)] = g[k];
        }
        let Some(dz) = jac.lu().solve(&(-&r)) else {
            break;
        };
        u += dz.rows(0, n);
        s += dz[n];
        r = residual(&u, s)?;
        let step = sup_norm(&dz.rows(0, n).into_owned());
        if step <= 1e-15 * (1.0 + sup_norm(&u)) && sup_norm(&r) <= 1e-13 * scale.max(1e-3) {
            return Ok((u, s));
        }
        if iter > 3 && sup_norm(&r) > 1e3 * scale {
            break;
        }
    }
    let res = sup_norm(&r);
    if res <= 1e-13 {
        return Ok((u, s));
    }
    Err(Error::NewtonDivergence {
        context: "Hugoniot curve",
        residual: res,
        iterations: 30,
    })
}

fn shock_by_continuation(
    model: &FluxModel,
    i: usize,
    sigma: f64,
    u_minus: &State,
    lam_minus: f64,
) -> Result<(State, f64)> {
    let mut last = Err(Error::NewtonDivergence {
        context: "Hugoniot continuation",
        residual: f64::NAN,
        iterations: 0,
    });
    for steps in [4usize, 16, 64] {
        let mut prev: Option<(State, f64, f64)> = None;
        let mut ok = true;
        for k in 1..=steps {
            let sk = sigma * k as f64 / steps as f64;
            let (guess_u, guess_s) = match &prev {
                None => {
                    let p = rk4_curve(model, i, sk, u_minus)?;
                    let s = 0.5 * (lam_minus + model.lambda(i, &p)?);
                    (p, s)
                }
                Some((pu, ps, psig)) => {
                    // secant through the origin of the branch
                    let ratio = sk / psig;
                    (u_minus + (pu - u_minus) * ratio, lam_minus + (ps - lam_minus) * ratio)
                }
            };
            match hugoniot_newton(model, i, sk, u_minus, lam_minus, guess_u, guess_s) {
                Ok((u, s)) => prev = Some((u, s, sk)),
                Err(e) => {
                    last = Err(e);
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            if let Some((u, s, _)) = prev {
                return Ok((u, s));
            }
        }
    }
    last
}

/// `S_i(σ)(u⁻)` together with the Rankine–Hugoniot speed. Genuinely
/// nonlinear branches are parametrized by `λ_i(u⁺) − λ_i(u⁻) = k_i σ`,
/// linearly degenerate ones by arc length.
pub fn shock_point(model: &FluxModel, i: usize, sigma: f64, u_minus: &State) -> Result<(State, f64)> {
    check_family(model, i)?;
    model.check_domain(u_minus)?;
    let (u, s) = shock_raw(model, i, sigma, u_minus)?;
    model.check_domain(&u)?;
    Ok((u, s))
}

fn lax_raw(model: &FluxModel, i: usize, sigma: f64, u_minus: &State) -> Result<State> {
    if sigma >= 0.0 || !model.field_kind()[i].is_gnl() {
        rk4_curve(model, i, sigma, u_minus)
    } else {
        Ok(shock_raw(model, i, sigma, u_minus)?.0)
    }
}

/// `ψ_i(σ)(u⁻)`: rarefaction branch for `σ ≥ 0`, shock branch for `σ < 0`.
pub fn lax_point(model: &FluxModel, i: usize, sigma: f64, u_minus: &State) -> Result<State> {
    check_family(model, i)?;
    model.check_domain(u_minus)?;
    let u = lax_raw(model, i, sigma, u_minus)?;
    model.check_domain(&u)?;
    Ok(u)
}

fn psi_raw(model: &FluxModel, sigma: &[f64], u_minus: &State) -> Result<State> {
    let mut u = u_minus.clone();
    for (i, &s) in sigma.iter().enumerate() {
        u = lax_raw(model, i, s, &u)?;
    }
    Ok(u)
}

fn shock_compose_raw(model: &FluxModel, q: &[f64], u_minus: &State) -> Result<State> {
    let mut u = u_minus.clone();
    for (i, &s) in q.iter().enumerate() {
        u = shock_raw(model, i, s, &u)?.0;
    }
    Ok(u)
}

/// `Ψ(σ)(u⁻) = ψ_n(σ_n) ∘ … ∘ ψ_1(σ_1)(u⁻)`.
pub fn psi_compose(model: &FluxModel, sigmas: &WaveStrengths, u_minus: &State) -> Result<State> {
    check_len(model, sigmas)?;
    model.check_domain(u_minus)?;
    let mut u = u_minus.clone();
    for (i, &s) in sigmas.sigma.iter().enumerate() {
        u = lax_raw(model, i, s, &u)?;
        model.check_domain(&u)?;
    }
    Ok(u)
}

/// `S(q)(u⁻) = S_n(q_n) ∘ … ∘ S_1(q_1)(u⁻)` along pure Hugoniot branches.
pub fn shock_compose(model: &FluxModel, q: &WaveStrengths, u_minus: &State) -> Result<State> {
    check_len(model, q)?;
    model.check_domain(u_minus)?;
    let mut u = u_minus.clone();
    for (i, &s) in q.sigma.iter().enumerate() {
        u = shock_raw(model, i, s, &u)?.0;
        model.check_domain(&u)?;
    }
    Ok(u)
}

/// Solve `forward(σ) = u⁺` for `σ`, starting from the linearization and
/// falling back to continuation along the segment `u⁻ → u⁺`.
fn invert<F>(
    model: &FluxModel,
    u_minus: &State,
    u_plus: &State,
    forward: F,
    context: &'static str,
) -> Result<WaveStrengths>
where
    F: Fn(&[f64]) -> Result<State>,
{
    let n = model.dim();
    if u_minus.len() != n || u_plus.len() != n {
        return Err(Error::InvalidInput(format!("states must have dimension {n}")));
    }
    if u_minus == u_plus {
        return Ok(WaveStrengths::zeros(n));
    }
    let eig = model.eigen_unchecked(u_minus)?;
    let jump = u_plus - u_minus;
    let guess = DVector::from_fn(n, |i, _| eig.left_vecs[i].dot(&jump));
    let opts = NewtonOptions::default();
    let solve = |target: &State, x0: DVector<f64>| {
        newton_fd(
            |s: &DVector<f64>| Ok(forward(s.as_slice())? - target),
            x0,
            opts,
            context,
        )
    };
    let first = solve(u_plus, guess.clone());
    let err = match first {
        Ok((s, _)) => return Ok(WaveStrengths::new(s.iter().copied().collect())),
        Err(e) => e,
    };
    // continuation: march the target along the segment, halving on failure
    let mut t = 0.0_f64;
    let mut dt = 0.125_f64;
    let mut sigma = DVector::zeros(n);
    while t < 1.0 {
        let t_next = (t + dt).min(1.0);
        let target = u_minus + &jump * t_next;
        let x0 = if t == 0.0 {
            &guess * t_next
        } else {
            &sigma * (t_next / t)
        };
        match solve(&target, x0) {
            Ok((s, _)) => {
                sigma = s;
                t = t_next;
            }
            Err(_) => {
                dt *= 0.5;
                if dt < 1.0 / 1024.0 {
                    return Err(err);
                }
            }
        }
    }
    Ok(WaveStrengths::new(sigma.iter().copied().collect()))
}

/// The map `E`: strengths with `Ψ(σ)(u⁻) = u⁺`.
pub fn solve_strengths(model: &FluxModel, u_minus: &State, u_plus: &State) -> Result<WaveStrengths> {
    model.check_domain(u_minus)?;
    model.check_domain(u_plus)?;
    invert(
        model,
        u_minus,
        u_plus,
        |s| psi_raw(model, s, u_minus),
        "wave strengths E",
    )
}

/// The map `q`: Hugoniot strengths with `S(q)(u⁻) = u⁺`.
pub fn solve_shock_strengths(model: &FluxModel, u_minus: &State, u_plus: &State) -> Result<WaveStrengths> {
    model.check_domain(u_minus)?;
    model.check_domain(u_plus)?;
    invert(
        model,
        u_minus,
        u_plus,
        |s| shock_compose_raw(model, s, u_minus),
        "shock strengths q",
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveKind {
    Shock,
    RarefactionPiece,
    Contact,
}

/// One front of a discretized Riemann fan.
#[derive(Debug, Clone, PartialEq)]
pub struct FanWave {
    pub family: usize,
    pub strength: f64,
    pub kind: WaveKind,
    pub left: State,
    pub right: State,
    pub speed: f64,
    /// For rarefaction pieces, the characteristic speeds `(λ_i(left), λ_i(right))`.
    pub speed_interval: Option<(f64, f64)>,
}

/// The ε-approximate solution of one Riemann problem, waves ordered left
/// to right.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Fan {
    pub waves: Vec<FanWave>,
}

impl Fan {
    pub fn is_empty(&self) -> bool {
        self.waves.is_empty()
    }

    pub fn len(&self) -> usize {
        self.waves.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let waves: Vec<serde_json::Value> = self
            .waves
            .iter()
            .map(|w| {
                serde_json::json!({
                    "family": w.family,
                    "strength": w.strength,
                    "kind": w.kind,
                    "left": w.left.as_slice(),
                    "right": w.right.as_slice(),
                    "speed": w.speed,
                    "speed_interval": w.speed_interval.map(|(a, b)| [a, b]),
                })
            })
            .collect();
        serde_json::json!({ "waves": waves })
    }
}

/// Build the fan for given strengths. The last right state is pinned to
/// `u_plus`, so consecutive states chain exactly.
pub fn fan_from_strengths(model: &FluxModel, sigma: &[f64], u_minus: &State, u_plus: &State, eps: f64) -> Result<Fan> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "fan resolution must be positive, got {eps}"
        )));
    }
    let mut waves = Vec::new();
    let mut left = u_minus.clone();
    for (i, &s) in sigma.iter().enumerate() {
        if s.abs() < PRUNE_STRENGTH {
            continue;
        }
        if !model.field_kind()[i].is_gnl() {
            let right = rk4_curve(model, i, s, &left)?;
            let speed = model.lambda(i, &left)?;
            waves.push(FanWave {
                family: i,
                strength: s,
                kind: WaveKind::Contact,
                left: left.clone(),
                right: right.clone(),
                speed,
                speed_interval: None,
            });
            left = right;
        } else if s < 0.0 {
            let (right, speed) = shock_raw(model, i, s, &left)?;
            waves.push(FanWave {
                family: i,
                strength: s,
                kind: WaveKind::Shock,
                left: left.clone(),
                right: right.clone(),
                speed,
                speed_interval: None,
            });
            left = right;
        } else {
            let pieces = ((s / eps) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let piece = s / pieces as f64;
            let mut lam_left = model.lambda(i, &left)?;
            for _ in 0..pieces {
                let right = rk4_curve(model, i, piece, &left)?;
                let lam_right = model.lambda(i, &right)?;
                waves.push(FanWave {
                    family: i,
                    strength: piece,
                    kind: WaveKind::RarefactionPiece,
                    left: left.clone(),
                    right: right.clone(),
                    speed: lam_right,
                    speed_interval: Some((lam_left, lam_right)),
                });
                left = right;
                lam_left = lam_right;
            }
        }
    }
    if let Some(last) = waves.last_mut() {
        last.right = u_plus.clone();
    }
    Ok(Fan { waves })
}

/// The ε-approximate Riemann solver: shocks and contacts as single fronts,
/// rarefactions split into `⌈σ/ε⌉` equal pieces moving at the
/// characteristic speed of their right state.
pub fn riemann_fan(model: &FluxModel, u_minus: &State, u_plus: &State, eps: f64) -> Result<Fan> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "fan resolution must be positive, got {eps}"
        )));
    }
    let strengths = solve_strengths(model, u_minus, u_plus)?;
    fan_from_strengths(model, &strengths.sigma, u_minus, u_plus, eps)
}

/// The fan of a single `i`-wave of strength `sigma` issuing from `u_minus`,
/// together with its right state.
pub fn single_wave_fan(model: &FluxModel, i: usize, sigma: f64, u_minus: &State, eps: f64) -> Result<(Fan, State)> {
    check_family(model, i)?;
    let right = if model.field_kind()[i].is_gnl() && sigma < 0.0 {
        shock_raw(model, i, sigma, u_minus)?.0
    } else {
        rk4_curve(model, i, sigma, u_minus)?
    };
    let mut s = vec![0.0; model.dim()];
    s[i] = sigma;
    let fan = fan_from_strengths(model, &s, u_minus, &right, eps)?;
    Ok((fan, right))
}

fn check_family(model: &FluxModel, i: usize) -> Result<()> {
    if i >= model.dim() {
        return Err(Error::InvalidInput(format!(
            "family index {i} out of range for a system of dimension {}",
            model.dim()
        )));
    }
    Ok(())
}

fn check_len(model: &FluxModel, s: &WaveStrengths) -> Result<()> {
    if s.sigma.len() != model.dim() {
        return Err(Error::InvalidInput(format!(
            "{} strengths given for a system of dimension {}",
            s.sigma.len(),
            model.dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux_models::{builtin, ModelId, PSystem};
    use crate::linalg::state;

    fn burgers() -> FluxModel {
        builtin(&ModelId::Burgers).unwrap()
    }

    fn psys() -> FluxModel {
        builtin(&ModelId::PSystem { gamma: 1.4 }).unwrap()
    }

    const GAMMA: f64 = 1.4;

    /// Closed-form p-system curves in `(v - 1, u)` coordinates. Along either
    /// family `λ` depends on `v` only, so `v⁺` follows from `c(v⁺)`.
    fn p_volume_after(v: f64, family: usize, sigma: f64) -> f64 {
        let ps = PSystem { gamma: GAMMA };
        let c_target = if family == 0 {
            ps.sound_speed(v) - sigma
        } else {
            ps.sound_speed(v) + sigma
        };
        // c(v) = sqrt(γ) v^{-(γ+1)/2}
        (c_target / GAMMA.sqrt()).powf(-2.0 / (GAMMA + 1.0))
    }

    fn p_rarefaction_exact(family: usize, sigma: f64, w: &State) -> State {
        let v0 = 1.0 + w[0];
        let v1 = p_volume_after(v0, family, sigma);
        // Riemann invariants: u ∓ ∫ c dv constant, ∫ c dv = 2 sqrt(γ) v^{(1-γ)/2} / (1-γ)
        let big_c = |v: f64| 2.0 * GAMMA.sqrt() * v.powf(0.5 * (1.0 - GAMMA)) / (1.0 - GAMMA);
        let du = big_c(v1) - big_c(v0);
        let u1 = if family == 0 { w[1] + du } else { w[1] - du };
        state(&[v1 - 1.0, u1])
    }

    fn p_shock_exact(family: usize, sigma: f64, w: &State) -> (State, f64) {
        let v0 = 1.0 + w[0];
        let v1 = p_volume_after(v0, family, sigma);
        let p = |v: f64| v.powf(-GAMMA);
        let s_abs = (-(p(v1) - p(v0)) / (v1 - v0)).sqrt();
        let s = if family == 0 { -s_abs } else { s_abs };
        (state(&[v1 - 1.0, w[1] - s * (v1 - v0)]), s)
    }

    #[test]
    fn burgers_curves_are_translations() {
        let m = burgers();
        let r = rarefaction_point(&m, 0, 0.2, &state(&[0.0])).unwrap();
        assert!((r[0] - 0.2).abs() < 1e-15);
        let (u, s) = shock_point(&m, 0, -0.2, &state(&[0.1])).unwrap();
        assert!((u[0] + 0.1).abs() < 1e-13);
        assert!(s.abs() < 1e-13);
        for sg in [-0.1, 0.1] {
            let u = lax_point(&m, 0, sg, &state(&[0.0])).unwrap();
            assert!((u[0] - sg).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_strength_is_identity() {
        let m = psys();
        let u = state(&[0.05, -0.02]);
        assert_eq!(rarefaction_point(&m, 1, 0.0, &u).unwrap(), u);
        let (v, s) = shock_point(&m, 0, 0.0, &u).unwrap();
        assert_eq!(v, u);
        assert_eq!(s, m.lambda(0, &u).unwrap());
        assert_eq!(psi_compose(&m, &WaveStrengths::zeros(2), &u).unwrap(), u);
        assert_eq!(shock_compose(&m, &WaveStrengths::zeros(2), &u).unwrap(), u);
    }

    #[test]
    fn p_system_rarefaction_matches_closed_form() {
        let m = psys();
        let u0 = state(&[0.0, 0.0]);
        for fam in 0..2 {
            for sigma in [0.05, 0.2, -0.05] {
                let got = rarefaction_point(&m, fam, sigma, &u0).unwrap();
                let want = p_rarefaction_exact(fam, sigma, &u0);
                assert!((got - want).amax() < 1e-12, "family {fam} sigma {sigma}");
            }
        }
    }

    #[test]
    fn p_system_rarefaction_matches_fine_rk4() {
        let m = psys();
        let u0 = state(&[0.0, 0.0]);
        let h = 0.05 / 1e4;
        let mut x = u0.clone();
        for _ in 0..10_000 {
            let k1 = m.right_vector(0, &x).unwrap();
            let k2 = m.right_vector(0, &(&x + &k1 * (0.5 * h))).unwrap();
            let k3 = m.right_vector(0, &(&x + &k2 * (0.5 * h))).unwrap();
            let k4 = m.right_vector(0, &(&x + &k3 * h)).unwrap();
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        let got = rarefaction_point(&m, 0, 0.05, &u0).unwrap();
        assert!((got - x).amax() < 1e-10);
    }

    #[test]
    fn p_system_shock_matches_closed_form() {
        let m = psys();
        for u0 in [state(&[0.0, 0.0]), state(&[0.1, -0.05])] {
            for fam in 0..2 {
                for sigma in [-0.05, -0.2, 0.03, -1e-8] {
                    let (got, s) = shock_point(&m, fam, sigma, &u0).unwrap();
                    let (want, s_want) = p_shock_exact(fam, sigma, &u0);
                    assert!(
                        (&got - &want).amax() < 1e-12,
                        "family {fam} sigma {sigma}: {got} vs {want}"
                    );
                    let tol = if sigma.abs() < 1e-6 { 1e-7 } else { 1e-10 };
                    assert!((s - s_want).abs() < tol, "speed {s} vs {s_want}");
                }
            }
        }
    }

    #[test]
    fn p_system_shock_matches_continuation_oracle() {
        // independent oracle: march λ-difference in 10³ steps, Newton with FD Jacobian
        let m = psys();
        let u0 = state(&[0.0, 0.0]);
        let sigma = -0.05;
        let lam0 = m.lambda(0, &u0).unwrap();
        let f0 = m.flux(&u0);
        let mut z = DVector::from_vec(vec![0.0, 0.0, lam0]);
        for k in 1..=1000 {
            let target = sigma * k as f64 / 1000.0;
            let g = |z: &DVector<f64>| -> Result<DVector<f64>> {
                let u = state(&[z[0], z[1]]);
                let rh = m.flux(&u) - &f0 - (&u - &u0) * z[2];
                Ok(DVector::from_vec(vec![rh[0], rh[1], m.lambda(0, &u)? - lam0 - target]))
            };
            let guess = if k == 1 {
                let e = m.eigen_at(&u0).unwrap();
                let p = &u0 + &e.right_vecs[0] * target;
                DVector::from_vec(vec![p[0], p[1], lam0 + 0.5 * target])
            } else {
                z.clone()
            };
            z = newton_fd(
                g,
                guess,
                NewtonOptions {
                    tol: 1e-14,
                    ..Default::default()
                },
                "oracle",
            )
            .unwrap()
            .0;
        }
        let (got, s) = shock_point(&m, 0, sigma, &u0).unwrap();
        assert!((got[0] - z[0]).abs() < 1e-9 && (got[1] - z[1]).abs() < 1e-9);
        assert!((s - z[2]).abs() < 1e-9);
    }

    #[test]
    fn lax_admissibility_of_shocks() {
        let m = psys();
        for u0 in [state(&[0.0, 0.0]), state(&[-0.1, 0.1]), state(&[0.2, 0.0])] {
            for fam in 0..2 {
                for sigma in [-0.01, -0.1] {
                    let (u1, s) = shock_point(&m, fam, sigma, &u0).unwrap();
                    assert!(m.lambda(fam, &u1).unwrap() < s && s < m.lambda(fam, &u0).unwrap());
                }
            }
        }
    }

    #[test]
    fn psi_is_sequential_application() {
        let m = psys();
        let u0 = state(&[0.0, 0.0]);
        let got = psi_compose(&m, &WaveStrengths::new(vec![-0.03, 0.04]), &u0).unwrap();
        let mid = p_shock_exact(0, -0.03, &u0).0;
        let want = p_rarefaction_exact(1, 0.04, &mid);
        assert!((got - want).amax() < 1e-12);
        let s = shock_compose(&m, &WaveStrengths::new(vec![0.01, 0.01]), &u0).unwrap();
        let want = p_shock_exact(1, 0.01, &p_shock_exact(0, 0.01, &u0).0).0;
        assert!((s - want).amax() < 1e-9);
    }

    #[test]
    fn strength_maps() {
        let b = burgers();
        let e = solve_strengths(&b, &state(&[0.1]), &state(&[-0.25])).unwrap();
        assert!((e.sigma[0] + 0.35).abs() < 1e-12);
        let q = solve_shock_strengths(&b, &state(&[0.1]), &state(&[0.3])).unwrap();
        assert!((q.sigma[0] - 0.2).abs() < 1e-12);
        let m = psys();
        let u0 = state(&[0.05, -0.03]);
        assert_eq!(solve_strengths(&m, &u0, &u0).unwrap().sigma, vec![0.0, 0.0]);
        let sig = WaveStrengths::new(vec![0.02, -0.01]);
        let u1 = psi_compose(&m, &sig, &u0).unwrap();
        assert!(solve_strengths(&m, &u0, &u1).unwrap().max_abs_diff(&sig) < 1e-9);
        let u2 = shock_compose(&m, &sig, &u0).unwrap();
        assert!(solve_shock_strengths(&m, &u0, &u2).unwrap().max_abs_diff(&sig) < 1e-9);
    }

    #[test]
    fn fans() {
        let b = burgers();
        assert!(riemann_fan(&b, &state(&[0.1]), &state(&[0.1]), 0.05)
            .unwrap()
            .is_empty());
        let shock = riemann_fan(&b, &state(&[0.2]), &state(&[-0.2]), 0.05).unwrap();
        assert_eq!(shock.len(), 1);
        assert_eq!(shock.waves[0].kind, WaveKind::Shock);
        assert!(shock.waves[0].speed.abs() < 1e-13);
        let rare = riemann_fan(&b, &state(&[-0.2]), &state(&[0.2]), 0.05).unwrap();
        assert_eq!(rare.len(), 8);
        for (k, w) in rare.waves.iter().enumerate() {
            assert!((w.speed - (-0.15 + 0.05 * k as f64)).abs() < 1e-12);
            assert!((w.strength - 0.05).abs() < 1e-12);
        }
    }

    #[test]
    fn p_system_fan_chains() {
        let m = psys();
        let ul = state(&[0.05, 0.02]);
        let ur = state(&[-0.03, 0.08]);
        let fan = riemann_fan(&m, &ul, &ur, 0.01).unwrap();
        assert_eq!(fan.waves[0].left, ul);
        assert_eq!(fan.waves.last().unwrap().right, ur);
        for w in fan.waves.windows(2) {
            assert_eq!(w[0].right, w[1].left);
            assert!(w[0].speed <= w[1].speed);
        }
        // the pinned final state agrees with the curve end point
        let sigma = solve_strengths(&m, &ul, &ur).unwrap();
        let end = psi_compose(&m, &sigma, &ul).unwrap();
        assert!((end - ur).amax() < 1e-9);
    }

    #[test]
    fn linear_contacts() {
        let m = builtin(&ModelId::Linear {
            matrix: vec![vec![-1.0, 0.0], vec![0.0, 1.0]],
        })
        .unwrap();
        let fan = riemann_fan(&m, &state(&[0.0, 0.0]), &state(&[0.1, -0.2]), 0.01).unwrap();
        assert_eq!(fan.len(), 2);
        assert!(fan.waves.iter().all(|w| w.kind == WaveKind::Contact));
        assert_eq!(fan.waves[0].speed, -1.0);
        assert!((fan.waves[0].strength.abs() - 0.1).abs() < 1e-12);
        assert!((fan.waves[1].strength.abs() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let m = burgers();
        assert!(matches!(
            rarefaction_point(&m, 0, 0.4, &state(&[0.3])),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            rarefaction_point(&m, 1, 0.1, &state(&[0.0])),
            Err(Error::InvalidInput(_))
        ));
        assert!(riemann_fan(&m, &state(&[0.0]), &state(&[0.1]), 0.0).is_err());
    }
}
