//! Step functions and the functionals built on their jumps: `V`, `Q`,
//! `Υ = V + C₀Q`, the side sums `A_j^±`, the weights `𝐀_i` and `W_i`, and
//! the stability functional `Φ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux_models::FluxModel;
use crate::linalg::State;
use crate::riemann::{solve_shock_strengths, solve_strengths};

/// Adjacent values closer than this (sup norm) are merged.
pub const MERGE_TOL: f64 = 1e-14;

/// A right-continuous, compactly supported step function with value
/// `values[α]` on `[breakpoints[α], breakpoints[α+1])` and zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPcf", into = "RawPcf")]
pub struct PiecewiseConstantFn {
    dim: usize,
    breakpoints: Vec<f64>,
    values: Vec<State>,
}

#[derive(Serialize, Deserialize)]
struct RawPcf {
    breakpoints: Vec<f64>,
    values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

impl TryFrom<RawPcf> for PiecewiseConstantFn {
    type Error = Error;

    fn try_from(raw: RawPcf) -> Result<Self> {
        let dim = raw
            .values
            .first()
            .map(|v| v.len())
            .or(raw.dim)
            .ok_or_else(|| Error::InvalidInput("empty step function needs an explicit \"dim\"".into()))?;
        let values = raw.values.iter().map(|v| State::from_column_slice(v)).collect();
        PiecewiseConstantFn::new(dim, raw.breakpoints, values)
    }
}

impl From<PiecewiseConstantFn> for RawPcf {
    fn from(u: PiecewiseConstantFn) -> Self {
        RawPcf {
            breakpoints: u.breakpoints,
            values: u.values.iter().map(|v| v.iter().copied().collect()).collect(),
            dim: Some(u.dim),
        }
    }
}

fn sup_dist(a: &State, b: &State) -> f64 {
    a.iter().zip(b.iter()).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

impl PiecewiseConstantFn {
    /// Validates and canonicalizes: merges nearly equal neighbours and trims
    /// zero plateaus at either end.
    pub fn new(dim: usize, breakpoints: Vec<f64>, values: Vec<State>) -> Result<Self> {
        if values.is_empty() {
            if breakpoints.len() > 1 {
                return Err(Error::InvalidInput("breakpoints given without values".into()));
            }
            return Ok(Self::zero(dim));
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints for {} values (need one more breakpoint than values)",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|x| !x.is_finite()) || breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        if values
            .iter()
            .any(|v| v.len() != dim || v.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::InvalidInput(format!(
                "every value must be a finite vector of length {dim}"
            )));
        }
        Ok(Self::canonical(dim, breakpoints, values))
    }

    fn canonical(dim: usize, breakpoints: Vec<f64>, values: Vec<State>) -> Self {
        let zero = State::zeros(dim);
        let mut plateaus: Vec<(f64, f64, State)> = Vec::with_capacity(values.len());
        for (k, v) in values.into_iter().enumerate() {
            let (a, b) = (breakpoints[k], breakpoints[k + 1]);
            match plateaus.last_mut() {
                Some(last) if sup_dist(&last.2, &v) <= MERGE_TOL => last.1 = b,
                _ => plateaus.push((a, b, v)),
            }
        }
        let is_zero = |p: &(f64, f64, State)| sup_dist(&p.2, &zero) <= MERGE_TOL;
        let first = plateaus.iter().position(|p| !is_zero(p));
        let Some(first) = first else {
            return Self::zero(dim);
        };
        let last = plateaus.iter().rposition(|p| !is_zero(p)).unwrap();
        let kept = &plateaus[first..=last];
        let mut bps: Vec<f64> = kept.iter().map(|p| p.0).collect();
        bps.push(kept[kept.len() - 1].1);
        Self {
            dim,
            breakpoints: bps,
            values: kept.iter().map(|p| p.2.clone()).collect(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            breakpoints: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Convenience for scalar functions.
    pub fn scalar(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(
            1,
            breakpoints,
            values.into_iter().map(|v| State::from_element(1, v)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[State] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// `[x₁, x_{N+1}]`, or `None` for the zero function.
    pub fn support(&self) -> Option<(f64, f64)> {
        Some((*self.breakpoints.first()?, *self.breakpoints.last()?))
    }

    /// `u(x)`, right-continuous.
    pub fn value_at(&self, x: f64) -> State {
        let k = self.breakpoints.partition_point(|&b| b <= x);
        if k == 0 || k > self.values.len() {
            State::zeros(self.dim)
        } else {
            self.values[k - 1].clone()
        }
    }

    /// `u(x−)`.
    pub fn left_limit(&self, x: f64) -> State {
        let k = self.breakpoints.partition_point(|&b| b < x);
        if k == 0 || k > self.values.len() {
            State::zeros(self.dim)
        } else {
            self.values[k - 1].clone()
        }
    }

    /// The full ordered sequence of attained values, with the implicit zero
    /// at both ends.
    pub fn jumps(&self) -> Vec<(f64, State, State)> {
        let zero = State::zeros(self.dim);
        let n = self.values.len();
        (0..self.breakpoints.len())
            .map(|k| {
                let left = if k == 0 {
                    zero.clone()
                } else {
                    self.values[k - 1].clone()
                };
                let right = if k == n { zero.clone() } else { self.values[k].clone() };
                (self.breakpoints[k], left, right)
            })
            .collect()
    }

    /// `Σ |u(x+) − u(x−)|` (Euclidean jumps).
    pub fn total_variation(&self) -> f64 {
        self.jumps().iter().map(|(_, l, r)| (r - l).norm()).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(k, v)| v.norm() * (self.breakpoints[k + 1] - self.breakpoints[k]))
            .sum()
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sorted union of both breakpoint sets.
    pub fn common_refinement(&self, other: &Self) -> Vec<f64> {
        let mut z: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .collect();
        z.sort_by(|a, b| a.total_cmp(b));
        z.dedup();
        z
    }

    /// `‖u − v‖_{L¹}` with the Euclidean norm on states.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        let z = self.common_refinement(other);
        z.windows(2)
            .map(|w| (self.value_at(w[0]) - other.value_at(w[0])).norm() * (w[1] - w[0]))
            .sum()
    }

    /// Multiply every value by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::canonical(
            self.dim,
            self.breakpoints.clone(),
            self.values.iter().map(|v| v * factor).collect(),
        )
    }

    /// `u(· − shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            dim: self.dim,
            breakpoints: self.breakpoints.iter().map(|x| x + shift).collect(),
            values: self.values.clone(),
        }
    }
}

/// `Σ_α u(y_α) χ_{[x_α, x_{α+1})}`.
pub fn sample_coarsen(u: &PiecewiseConstantFn, partition: &[f64], samples: &[f64]) -> Result<PiecewiseConstantFn> {
    if partition.len() < 2 {
        if samples.is_empty() {
            return Ok(PiecewiseConstantFn::zero(u.dim()));
        }
        return Err(Error::InvalidInput("sampling needs at least one interval".into()));
    }
    if samples.len() + 1 != partition.len() {
        return Err(Error::InvalidInput(format!(
            "{} samples for {} intervals",
            samples.len(),
            partition.len() - 1
        )));
    }
    for (k, &y) in samples.iter().enumerate() {
        if !(partition[k] <= y && y < partition[k + 1]) {
            return Err(Error::InvalidInput(format!(
                "sample {y} is not in [{}, {})",
                partition[k],
                partition[k + 1]
            )));
        }
    }
    PiecewiseConstantFn::new(
        u.dim(),
        partition.to_vec(),
        samples.iter().map(|&y| u.value_at(y)).collect(),
    )
}

/// Drop the values whose `keep` flag is false: each removed plateau takes
/// the value of the nearest kept plateau on its left (zero if none), so the
/// result attains a subsequence of the values of `u`.
pub fn remove_values(u: &PiecewiseConstantFn, keep: &[bool]) -> Result<PiecewiseConstantFn> {
    if keep.len() != u.values().len() {
        return Err(Error::InvalidInput(format!(
            "{} keep flags for {} values",
            keep.len(),
            u.values().len()
        )));
    }
    let mut current = State::zeros(u.dim());
    let mut vals = Vec::with_capacity(keep.len());
    for (v, &k) in u.values().iter().zip(keep) {
        if k {
            current = v.clone();
        }
        vals.push(current.clone());
    }
    PiecewiseConstantFn::new(u.dim(), u.breakpoints().to_vec(), vals)
}

/// A single wave located at `x`. Family indices `≥ n` denote non-physical
/// waves, which count as a fictitious fastest linearly degenerate family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointWave {
    pub x: f64,
    pub family: usize,
    pub strength: f64,
}

/// Waves sorted by position, together with the classification of the `n`
/// physical families.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveList {
    gnl: Vec<bool>,
    waves: Vec<PointWave>,
}

impl WaveList {
    pub fn new(gnl: Vec<bool>, mut waves: Vec<PointWave>) -> Self {
        waves.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.family.cmp(&b.family)));
        Self { gnl, waves }
    }

    pub fn n(&self) -> usize {
        self.gnl.len()
    }

    pub fn waves(&self) -> &[PointWave] {
        &self.waves
    }

    fn is_gnl(&self, family: usize) -> bool {
        family < self.gnl.len() && self.gnl[family]
    }

    /// `V = Σ |σ|`.
    pub fn linear_functional(&self) -> f64 {
        self.waves.iter().map(|w| w.strength.abs()).sum()
    }

    /// `Q`: `Σ |σ σ'|` over approaching pairs, the left wave of a strictly
    /// faster family, or the same genuinely nonlinear family with at least
    /// one negative strength. Waves at the same point do not interact.
    pub fn interaction_potential(&self) -> f64 {
        let fams = self.n() + 1;
        let mut left_abs = vec![0.0; fams];
        let mut left_neg = vec![0.0; fams];
        let mut q = 0.0;
        let mut k = 0;
        while k < self.waves.len() {
            let mut end = k;
            while end < self.waves.len() && self.waves[end].x == self.waves[k].x {
                end += 1;
            }
            for w in &self.waves[k..end] {
                let j = w.family.min(self.n());
                let faster: f64 = left_abs[j + 1..].iter().sum();
                let same = if self.is_gnl(j) {
                    if w.strength < 0.0 {
                        left_abs[j]
                    } else {
                        left_neg[j]
                    }
                } else {
                    0.0
                };
                q += w.strength.abs() * (faster + same);
            }
            for w in &self.waves[k..end] {
                let j = w.family.min(self.n());
                left_abs[j] += w.strength.abs();
                if w.strength < 0.0 {
                    left_neg[j] += w.strength.abs();
                }
            }
            k = end;
        }
        q
    }

    /// `Υ = V + C₀ Q`.
    pub fn glimm_total(&self, c0: f64) -> f64 {
        self.linear_functional() + c0 * self.interaction_potential()
    }

    /// Total physical strength per family, non-physical waves excluded.
    pub fn family_totals(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.n()];
        for w in &self.waves {
            if w.family < self.n() {
                t[w.family] += w.strength.abs();
            }
        }
        t
    }

    pub fn non_physical_total(&self) -> f64 {
        self.waves
            .iter()
            .filter(|w| w.family >= self.n())
            .map(|w| w.strength.abs())
            .sum()
    }

    /// `A_j^-(x) = Σ_{y≤x} |σ_{y,j}|` and `A_j^+(x) = Σ_{y>x} |σ_{y,j}|`
    /// over the physical families.
    pub fn side_sums(&self, x: f64) -> SideSums {
        let totals = self.family_totals();
        let mut minus = vec![0.0; self.n()];
        for w in self.waves.iter().take_while(|w| w.x <= x) {
            if w.family < self.n() {
                minus[w.family] += w.strength.abs();
            }
        }
        let plus = totals.iter().zip(&minus).map(|(t, m)| (t - m).max(0.0)).collect();
        SideSums {
            minus,
            plus,
            gnl: self.gnl.clone(),
        }
    }
}

/// The side sums `A_j^∓` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SideSums {
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
    gnl: Vec<bool>,
}

impl SideSums {
    /// `𝐀_i(q)`: waves of slower families on the right, faster families on
    /// the left and, for a genuinely nonlinear family, same-family waves on
    /// the right if `q ≥ 0` and on the left otherwise.
    pub fn big_a(&self, i: usize, q: f64) -> f64 {
        let mut a: f64 = self.plus[..i].iter().sum::<f64>() + self.minus[i + 1..].iter().sum::<f64>();
        if self.gnl[i] {
            a += if q >= 0.0 { self.plus[i] } else { self.minus[i] };
        }
        a
    }
}

/// Per-jump wave strengths `σ_{x,·} = E(u(x−), u(x+))`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpTable {
    pub jumps: Vec<Jump>,
    gnl: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub x: f64,
    pub sigma: Vec<f64>,
}

impl JumpTable {
    pub fn waves(&self) -> WaveList {
        let waves = self
            .jumps
            .iter()
            .flat_map(|j| {
                j.sigma
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| **s != 0.0)
                    .map(move |(i, &s)| PointWave {
                        x: j.x,
                        family: i,
                        strength: s,
                    })
            })
            .collect();
        WaveList::new(self.gnl.clone(), waves)
    }

    pub fn strength_at(&self, x: f64) -> Option<&[f64]> {
        self.jumps.iter().find(|j| j.x == x).map(|j| j.sigma.as_slice())
    }
}

pub fn jump_strengths(model: &FluxModel, u: &PiecewiseConstantFn) -> Result<JumpTable> {
    if u.dim() != model.dim() {
        return Err(Error::InvalidInput(format!(
            "step function of dimension {} for a model of dimension {}",
            u.dim(),
            model.dim()
        )));
    }
    let jumps = u
        .jumps()
        .into_iter()
        .map(|(x, l, r)| {
            Ok(Jump {
                x,
                sigma: solve_strengths(model, &l, &r)?.sigma,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JumpTable {
        jumps,
        gnl: gnl_flags(model),
    })
}

pub fn gnl_flags(model: &FluxModel) -> Vec<bool> {
    model.field_kind().iter().map(|k| k.is_gnl()).collect()
}

/// `C₀`, `κ₁`, `κ₂` and the smallness bound `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstants {
    #[serde(rename = "C0")]
    pub c0: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub delta: f64,
}

impl Default for StabilityConstants {
    fn default() -> Self {
        Self {
            c0: 4.0,
            kappa1: 1.0,
            kappa2: 1.0,
            delta: 0.1,
        }
    }
}

impl StabilityConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("C0", self.c0),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("delta", self.delta),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::BadParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// `V`, `Q` and `Υ` of one step function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlimmValues {
    pub v: f64,
    pub q: f64,
    pub upsilon: f64,
}

pub fn glimm_values(model: &FluxModel, u: &PiecewiseConstantFn, c0: f64) -> Result<GlimmValues> {
    let w = jump_strengths(model, u)?.waves();
    let v = w.linear_functional();
    let q = w.interaction_potential();
    Ok(GlimmValues {
        v,
        q,
        upsilon: v + c0 * q,
    })
}

pub fn linear_functional(model: &FluxModel, u: &PiecewiseConstantFn) -> Result<f64> {
    Ok(jump_strengths(model, u)?.waves().linear_functional())
}

pub fn interaction_potential(model: &FluxModel, u: &PiecewiseConstantFn) -> Result<f64> {
    Ok(jump_strengths(model, u)?.waves().interaction_potential())
}

pub fn glimm_total(model: &FluxModel, u: &PiecewiseConstantFn, consts: &StabilityConstants) -> Result<f64> {
    Ok(glimm_values(model, u, consts.c0)?.upsilon)
}

/// `𝐀_i[u](q, x)`.
pub fn big_a(model: &FluxModel, u: &PiecewiseConstantFn, i: usize, q: f64, x: f64) -> Result<f64> {
    Ok(jump_strengths(model, u)?.waves().side_sums(x).big_a(i, q))
}

/// `W_i = 1 + κ₁𝐀_i[v](q,x) + κ₁𝐀_i[ṽ](−q,x) + κ₁κ₂(Q(v) + Q(ṽ))` from
/// precomputed wave lists.
pub fn weight_from_waves(
    wv: &WaveList,
    wvt: &WaveList,
    q_sum: f64,
    i: usize,
    q: f64,
    x: f64,
    consts: &StabilityConstants,
) -> f64 {
    let a = wv.side_sums(x).big_a(i, q);
    let at = wvt.side_sums(x).big_a(i, -q);
    1.0 + consts.kappa1 * (a + at) + consts.kappa1 * consts.kappa2 * q_sum
}

pub fn stability_weight(
    model: &FluxModel,
    v: &PiecewiseConstantFn,
    v_tilde: &PiecewiseConstantFn,
    i: usize,
    q: f64,
    x: f64,
    consts: &StabilityConstants,
) -> Result<f64> {
    let wv = jump_strengths(model, v)?.waves();
    let wvt = jump_strengths(model, v_tilde)?.waves();
    let q_sum = wv.interaction_potential() + wvt.interaction_potential();
    Ok(weight_from_waves(&wv, &wvt, q_sum, i, q, x, consts))
}

/// `Φ` with its by-products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiEvaluation {
    pub phi: f64,
    /// `‖v − ṽ‖_{L¹}`.
    pub l1: f64,
    /// Extremes of `W_i` over the intervals where `q_i ≠ 0`.
    pub min_weight: f64,
    pub max_weight: f64,
}

/// `Σ_i ∫ |q_i(x)| W_i(q_i(x), x) dx` for step functions, given the wave
/// lists used in the weights and the interaction potentials entering them.
/// Exact: `q` and all weights are constant on each refinement interval.
#[allow(clippy::too_many_arguments)]
pub fn phi_with_waves(
    model: &FluxModel,
    v: &PiecewiseConstantFn,
    v_tilde: &PiecewiseConstantFn,
    wv: &WaveList,
    wvt: &WaveList,
    q_v: f64,
    q_vt: f64,
    consts: &StabilityConstants,
) -> Result<PhiEvaluation> {
    let set = WeightWaves {
        wv,
        wvt,
        q_sum: q_v + q_vt,
    };
    Ok(phi_with_wave_sets(model, v, v_tilde, &[set], consts)?[0])
}

/// Wave data entering the weights `W_i`.
#[derive(Debug, Clone, Copy)]
pub struct WeightWaves<'a> {
    pub wv: &'a WaveList,
    pub wvt: &'a WaveList,
    /// `Q(v) + Q(ṽ)`.
    pub q_sum: f64,
}

/// `Φ` for several choices of weights, sharing the pointwise `q`.
pub fn phi_with_wave_sets(
    model: &FluxModel,
    v: &PiecewiseConstantFn,
    v_tilde: &PiecewiseConstantFn,
    sets: &[WeightWaves<'_>],
    consts: &StabilityConstants,
) -> Result<Vec<PhiEvaluation>> {
    let n = model.dim();
    let z = v.common_refinement(v_tilde);
    let mut out = vec![
        PhiEvaluation {
            phi: 0.0,
            l1: 0.0,
            min_weight: f64::INFINITY,
            max_weight: f64::NEG_INFINITY,
        };
        sets.len()
    ];
    for w in z.windows(2) {
        let (x, len) = (w[0], w[1] - w[0]);
        let a = v.value_at(x);
        let b = v_tilde.value_at(x);
        if a == b {
            continue;
        }
        let l1 = (&b - &a).norm() * len;
        let q = solve_shock_strengths(model, &a, &b)?;
        for (set, o) in sets.iter().zip(out.iter_mut()) {
            o.l1 += l1;
            let sv = set.wv.side_sums(x);
            let svt = set.wvt.side_sums(x);
            for i in 0..n {
                let qi = q.sigma[i];
                if qi == 0.0 {
                    continue;
                }
                let weight = 1.0
                    + consts.kappa1 * (sv.big_a(i, qi) + svt.big_a(i, -qi))
                    + consts.kappa1 * consts.kappa2 * set.q_sum;
                o.min_weight = o.min_weight.min(weight);
                o.max_weight = o.max_weight.max(weight);
                o.phi += len * qi.abs() * weight;
            }
        }
    }
    Ok(out)
}

pub fn stability_phi_detailed(
    model: &FluxModel,
    v: &PiecewiseConstantFn,
    v_tilde: &PiecewiseConstantFn,
    consts: &StabilityConstants,
) -> Result<PhiEvaluation> {
    let wv = jump_strengths(model, v)?.waves();
    let wvt = jump_strengths(model, v_tilde)?.waves();
    let (qv, qvt) = (wv.interaction_potential(), wvt.interaction_potential());
    phi_with_waves(model, v, v_tilde, &wv, &wvt, qv, qvt, consts)
}

/// The stability functional `Φ(v, ṽ)`.
pub fn stability_phi(
    model: &FluxModel,
    v: &PiecewiseConstantFn,
    v_tilde: &PiecewiseConstantFn,
    consts: &StabilityConstants,
) -> Result<f64> {
    Ok(stability_phi_detailed(model, v, v_tilde, consts)?.phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux_models::{builtin, ModelId};
    use crate::linalg::state;

    fn burgers() -> FluxModel {
        builtin(&ModelId::Burgers).unwrap()
    }

    fn consts(k2: f64) -> StabilityConstants {
        StabilityConstants {
            kappa2: k2,
            ..Default::default()
        }
    }

    #[test]
    fn canonical_form() {
        let u = PiecewiseConstantFn::scalar(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.0, 0.1, 0.1, 0.0]).unwrap();
        assert_eq!(u.breakpoints(), &[1.0, 3.0]);
        assert_eq!(u.values().len(), 1);
        assert!(PiecewiseConstantFn::scalar(vec![0.0, 1.0], vec![0.0])
            .unwrap()
            .is_zero());
        assert!(PiecewiseConstantFn::scalar(vec![1.0, 0.0], vec![0.2]).is_err());
        assert!(PiecewiseConstantFn::scalar(vec![0.0, 1.0, 2.0], vec![0.2]).is_err());
        let u = PiecewiseConstantFn::scalar(vec![0.0, 1.0, 2.0], vec![0.2, -0.1]).unwrap();
        assert_eq!(u.value_at(1.0)[0], -0.1);
        assert_eq!(u.left_limit(1.0)[0], 0.2);
        assert_eq!(u.value_at(2.0)[0], 0.0);
        assert_eq!(u.value_at(-1.0)[0], 0.0);
    }

    #[test]
    fn json_round_trip() {
        let u =
            PiecewiseConstantFn::new(2, vec![0.0, 0.5, 2.0], vec![state(&[0.01, 0.02]), state(&[-0.01, 0.0])]).unwrap();
        let s = serde_json::to_string(&u).unwrap();
        let back: PiecewiseConstantFn = serde_json::from_str(&s).unwrap();
        assert_eq!(back, u);
        let parsed: PiecewiseConstantFn = serde_json::from_str(r#"{"breakpoints":[0,1],"values":[[-0.2]]}"#).unwrap();
        assert_eq!(parsed.dim(), 1);
        assert!(serde_json::from_str::<PiecewiseConstantFn>(r#"{"breakpoints":[1,0],"values":[[-0.2]]}"#).is_err());
    }

    #[test]
    fn jump_tables() {
        let m = burgers();
        assert!(jump_strengths(&m, &PiecewiseConstantFn::zero(1))
            .unwrap()
            .jumps
            .is_empty());
        // step 0 → −0.2 at x = 0
        let u = PiecewiseConstantFn::scalar(vec![0.0, 5.0], vec![-0.2]).unwrap();
        let t = jump_strengths(&m, &u).unwrap();
        assert!((t.strength_at(0.0).unwrap()[0] + 0.2).abs() < 1e-12);
    }

    #[test]
    fn v_and_q_by_definition() {
        let g = vec![true];
        let two_shocks = WaveList::new(
            g.clone(),
            vec![
                PointWave {
                    x: 0.0,
                    family: 0,
                    strength: -0.1,
                },
                PointWave {
                    x: 1.0,
                    family: 0,
                    strength: -0.2,
                },
            ],
        );
        assert!((two_shocks.interaction_potential() - 0.02).abs() < 1e-15);
        let two_rare = WaveList::new(
            g.clone(),
            vec![
                PointWave {
                    x: 0.0,
                    family: 0,
                    strength: 0.1,
                },
                PointWave {
                    x: 1.0,
                    family: 0,
                    strength: 0.2,
                },
            ],
        );
        assert_eq!(two_rare.interaction_potential(), 0.0);
        let mixed = WaveList::new(
            g,
            vec![
                PointWave {
                    x: 0.0,
                    family: 0,
                    strength: -0.2,
                },
                PointWave {
                    x: 1.0,
                    family: 0,
                    strength: 0.1,
                },
            ],
        );
        assert!((mixed.linear_functional() - 0.3).abs() < 1e-15);
        assert!((mixed.glimm_total(4.0) - 0.38).abs() < 1e-15);
        // faster family on the left approaches
        let p = WaveList::new(
            vec![true, true],
            vec![
                PointWave {
                    x: 0.0,
                    family: 1,
                    strength: 0.1,
                },
                PointWave {
                    x: 1.0,
                    family: 0,
                    strength: 0.3,
                },
            ],
        );
        assert!((p.interaction_potential() - 0.03).abs() < 1e-15);
        let p_rev = WaveList::new(
            vec![true, true],
            vec![
                PointWave {
                    x: 0.0,
                    family: 0,
                    strength: 0.3,
                },
                PointWave {
                    x: 1.0,
                    family: 1,
                    strength: 0.1,
                },
            ],
        );
        assert_eq!(p_rev.interaction_potential(), 0.0);
        // waves at one point never interact
        let same_point = WaveList::new(
            vec![true, true],
            vec![
                PointWave {
                    x: 0.0,
                    family: 0,
                    strength: -0.03,
                },
                PointWave {
                    x: 0.0,
                    family: 1,
                    strength: 0.04,
                },
            ],
        );
        assert_eq!(same_point.interaction_potential(), 0.0);
        assert!((same_point.linear_functional() - 0.07).abs() < 1e-15);
    }

    #[test]
    fn q_matches_pairwise_definition() {
        // brute force over all pairs
        let gnl = vec![true, false, true];
        let mut waves = Vec::new();
        let mut s = 0.37_f64;
        for k in 0..40 {
            s = (s * 7.13 + 0.11).fract();
            waves.push(PointWave {
                x: (k / 2) as f64,
                family: k % 4,
                strength: s - 0.5,
            });
        }
        let wl = WaveList::new(gnl.clone(), waves.clone());
        let mut brute = 0.0;
        for a in &waves {
            for b in &waves {
                if !(a.x < b.x) {
                    continue;
                }
                let fa = a.family.min(3);
                let fb = b.family.min(3);
                let approaching = fa > fb || (fa == fb && fa < 3 && gnl[fa] && a.strength.min(b.strength) < 0.0);
                if approaching {
                    brute += (a.strength * b.strength).abs();
                }
            }
        }
        assert!((wl.interaction_potential() - brute).abs() < 1e-12);
    }

    #[test]
    fn side_sums_and_weights() {
        let m = burgers();
        assert!(WaveList::new(vec![true], vec![])
            .side_sums(0.0)
            .minus
            .iter()
            .all(|&a| a == 0.0));
        let u = PiecewiseConstantFn::scalar(vec![0.0, 10.0], vec![-0.2]).unwrap();
        let w = WaveList::new(
            vec![true],
            vec![PointWave {
                x: 0.0,
                family: 0,
                strength: -0.2,
            }],
        );
        let at0 = w.side_sums(0.0);
        assert_eq!((at0.minus[0], at0.plus[0]), (0.2, 0.0));
        let before = w.side_sums(-1.0);
        assert_eq!((before.minus[0], before.plus[0]), (0.0, 0.2));
        assert!((w.side_sums(0.5).big_a(0, -1.0) - 0.2).abs() < 1e-15);
        assert_eq!(w.side_sums(0.5).big_a(0, 1.0), 0.0);
        // the compact version also jumps back up at x = 10
        assert!((big_a(&m, &u, 0, -1.0, 0.5).unwrap() - 0.2).abs() < 1e-12);
        assert!((big_a(&m, &u, 0, 1.0, 0.5).unwrap() - 0.2).abs() < 1e-12);
        let zero = PiecewiseConstantFn::zero(1);
        assert_eq!(
            stability_weight(&m, &zero, &zero, 0, 0.3, 0.0, &consts(1.0)).unwrap(),
            1.0
        );
        let vt = PiecewiseConstantFn::scalar(vec![0.0, 1.0], vec![-0.1]).unwrap();
        let wgt = stability_weight(&m, &zero, &vt, 0, -0.1, 0.5, &consts(1.0)).unwrap();
        assert!((wgt - 1.11).abs() < 1e-12);
        let swapped = stability_weight(&m, &vt, &zero, 0, 0.1, 0.5, &consts(1.0)).unwrap();
        assert!((swapped - wgt).abs() < 1e-15);
    }

    #[test]
    fn ld_weight_ignores_q() {
        let w = WaveList::new(
            vec![false, false],
            vec![
                PointWave {
                    x: 0.0,
                    family: 0,
                    strength: 0.1,
                },
                PointWave {
                    x: 1.0,
                    family: 1,
                    strength: -0.2,
                },
            ],
        );
        let s = w.side_sums(0.5);
        assert_eq!(s.big_a(0, 1.0), s.big_a(0, -1.0));
        assert_eq!(s.big_a(1, 1.0), s.big_a(1, -1.0));
    }

    #[test]
    fn phi_hand_example() {
        let m = burgers();
        let v = PiecewiseConstantFn::zero(1);
        let vt = PiecewiseConstantFn::scalar(vec![0.0, 1.0], vec![-0.1]).unwrap();
        let e = stability_phi_detailed(&m, &v, &vt, &consts(1.0)).unwrap();
        assert!((e.phi - 0.111).abs() < 1e-12);
        assert!((e.l1 - 0.1).abs() < 1e-15);
        assert_eq!(stability_phi(&m, &vt, &vt, &consts(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn coarsening_operations() {
        let u = PiecewiseConstantFn::scalar(vec![0.0, 1.0, 2.0, 3.0], vec![0.1, -0.05, 0.02]).unwrap();
        let same = sample_coarsen(&u, &[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(same, u);
        let c = PiecewiseConstantFn::scalar(vec![0.0, 3.0], vec![0.1]).unwrap();
        assert_eq!(sample_coarsen(&c, &[0.0, 1.5, 3.0], &[0.2, 2.9]).unwrap(), c);
        assert!(sample_coarsen(&u, &[0.0, 1.0], &[1.0]).is_err());
        // Glimm-type three-state instance: drop the middle value
        let m = burgers();
        let w = PiecewiseConstantFn::scalar(vec![0.0, 1.0, 2.0, 3.0], vec![0.1, 0.05, -0.03]).unwrap();
        let r = remove_values(&w, &[true, false, true]).unwrap();
        assert_eq!(r.values().len(), 2);
        let (q0, q1) = (
            interaction_potential(&m, &w).unwrap(),
            interaction_potential(&m, &r).unwrap(),
        );
        assert!(q1 <= q0 + 1e-15, "{q1} > {q0}");
    }
}
