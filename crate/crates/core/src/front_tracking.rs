//! ε-approximate front tracking for step-function data: Riemann fans at
//! the initial jumps, then an event-driven sequence of binary collisions
//! resolved by the accurate solver, by the simplified solver (which sheds a
//! non-physical front) or by letting a non-physical front cross.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux_models::FluxModel;
use crate::functionals::{
    gnl_flags, phi_with_wave_sets, PiecewiseConstantFn, PointWave, StabilityConstants, WaveList, WeightWaves,
};
use crate::linalg::State;
use crate::riemann::{riemann_fan, single_wave_fan, solve_strengths, Fan, PRUNE_STRENGTH};

/// Simultaneous collisions are detected within this window.
pub const COALESCE_WINDOW: f64 = 1e-13;
/// Relative shift that separates three or more fronts meeting at a point.
pub const COLLISION_SHIFT: f64 = 1e-9;
/// Default cap on the total non-physical strength, as a fraction of `ε`.
pub const DEFAULT_NP_BUDGET: f64 = 0.01;
pub const MAX_EVENTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontFamily {
    Physical(usize),
    NonPhysical,
}

/// One front over its lifetime `[born, died)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Front {
    pub id: usize,
    pub family: FrontFamily,
    pub strength: f64,
    pub left: State,
    pub right: State,
    pub speed: f64,
    pub born: f64,
    pub died: Option<f64>,
    x_born: f64,
}

impl Front {
    pub fn position(&self, t: f64) -> f64 {
        self.x_born + self.speed * (t - self.born)
    }

    pub fn is_non_physical(&self) -> bool {
        self.family == FrontFamily::NonPhysical
    }

    pub fn alive_at(&self, t: f64) -> bool {
        self.born <= t && self.died.is_none_or(|d| d > t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Accurate,
    Simplified,
    NonPhysicalCrossing,
    /// A front shifted to keep collisions binary.
    Perturbation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub position: f64,
    pub kind: EventKind,
    pub incoming: Vec<usize>,
    pub outgoing: Vec<usize>,
}

/// Glimm quantities of the front configuration, with non-physical fronts
/// as an extra fastest family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub v: f64,
    pub q: f64,
    pub upsilon: f64,
    pub non_physical: f64,
    pub fronts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingOptions {
    pub eps: f64,
    pub t_final: f64,
    /// Interactions with `|σσ'|` below this use the simplified solver.
    pub simplified_threshold: f64,
    /// The simplified solver is refused when it would push the total
    /// non-physical strength above `np_budget·ε`.
    pub np_budget: f64,
    pub max_events: usize,
}

impl TrackingOptions {
    pub fn new(eps: f64, t_final: f64) -> Self {
        Self {
            eps,
            t_final,
            simplified_threshold: eps,
            np_budget: DEFAULT_NP_BUDGET,
            max_events: MAX_EVENTS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FTTrajectory {
    model: FluxModel,
    pub eps: f64,
    pub t_final: f64,
    pub lambda_hat: f64,
    pub fronts: Vec<Front>,
    pub events: Vec<Event>,
    pub diagnostics: Vec<Diagnostics>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending {
    time: f64,
    left: usize,
    right: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on time, then leftmost creation order
        other
            .time
            .total_cmp(&self.time)
            .then(other.left.cmp(&self.left))
            .then(other.right.cmp(&self.right))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Tracker<'a> {
    model: &'a FluxModel,
    opts: TrackingOptions,
    lambda_hat: f64,
    c0: f64,
    fronts: Vec<Front>,
    prev: Vec<Option<usize>>,
    next: Vec<Option<usize>>,
    head: Option<usize>,
    heap: BinaryHeap<Pending>,
    events: Vec<Event>,
    diagnostics: Vec<Diagnostics>,
    non_physical: f64,
}

/// What an interaction produces before it is placed in the line.
struct Outgoing {
    family: FrontFamily,
    strength: f64,
    left: State,
    right: State,
    speed: f64,
}

impl<'a> Tracker<'a> {
    fn add(&mut self, o: Outgoing, x: f64, t: f64) -> usize {
        let id = self.fronts.len();
        self.fronts.push(Front {
            id,
            family: o.family,
            strength: o.strength,
            left: o.left,
            right: o.right,
            speed: o.speed,
            born: t,
            died: None,
            x_born: x,
        });
        self.prev.push(None);
        self.next.push(None);
        if self.fronts[id].is_non_physical() {
            self.non_physical += self.fronts[id].strength;
        }
        id
    }

    fn collision_time(&self, a: usize, b: usize, t: f64) -> Option<f64> {
        let (fa, fb) = (&self.fronts[a], &self.fronts[b]);
        if fa.speed <= fb.speed {
            return None;
        }
        let gap = (fb.position(t) - fa.position(t)).max(0.0);
        Some(t + gap / (fa.speed - fb.speed))
    }

    fn schedule(&mut self, a: Option<usize>, b: Option<usize>, t: f64) {
        if let (Some(a), Some(b)) = (a, b) {
            if let Some(tc) = self.collision_time(a, b, t) {
                if tc <= self.opts.t_final {
                    self.heap.push(Pending {
                        time: tc,
                        left: a,
                        right: b,
                    });
                }
            }
        }
    }

    fn link(&mut self, l: Option<usize>, r: Option<usize>) {
        match l {
            Some(l) => self.next[l] = r,
            None => self.head = r,
        }
        if let Some(r) = r {
            self.prev[r] = l;
        }
    }

    /// Replace the consecutive run `first..=last` by `new` (in order).
    fn splice(&mut self, first: usize, last: usize, new: &[usize], t: f64) {
        let before = self.prev[first];
        let after = self.next[last];
        let mut k = Some(first);
        while let Some(id) = k {
            self.fronts[id].died = Some(t);
            if self.fronts[id].is_non_physical() {
                self.non_physical -= self.fronts[id].strength;
            }
            k = if id == last { None } else { self.next[id] };
        }
        let mut left = before;
        for &id in new {
            self.link(left, Some(id));
            left = Some(id);
        }
        self.link(left, after);
        match (new.first(), new.last()) {
            (Some(&f), Some(&l)) => {
                self.schedule(before, Some(f), t);
                self.schedule(Some(l), after, t);
            }
            _ => self.schedule(before, after, t),
        }
    }

    fn fan_fronts(&self, fan: Fan) -> Vec<Outgoing> {
        fan.waves
            .into_iter()
            .map(|w| Outgoing {
                family: FrontFamily::Physical(w.family),
                strength: w.strength,
                left: w.left,
                right: w.right,
                speed: w.speed,
            })
            .collect()
    }

    fn non_physical(&self, left: State, right: State) -> Outgoing {
        Outgoing {
            family: FrontFamily::NonPhysical,
            strength: (&right - &left).norm(),
            left,
            right,
            speed: self.lambda_hat,
        }
    }

    /// Physical waves of the listed families from `ul`, then a non-physical
    /// front closing the gap to `ur`.
    fn shed(&self, waves: &[(usize, f64)], ul: &State, ur: &State) -> Result<Vec<Outgoing>> {
        let mut out = Vec::new();
        let mut left = ul.clone();
        for &(i, s) in waves {
            if s.abs() < PRUNE_STRENGTH {
                continue;
            }
            let (fan, right) = single_wave_fan(self.model, i, s, &left, self.opts.eps)?;
            out.extend(self.fan_fronts(fan));
            left = right;
        }
        if (ur - &left).amax() >= PRUNE_STRENGTH {
            out.push(self.non_physical(left, ur.clone()));
        } else if let Some(last) = out.last_mut() {
            last.right = ur.clone();
        }
        Ok(out)
    }

    fn interact(&mut self, a: usize, b: usize, t: f64) -> Result<()> {
        let (fa, fb) = (self.fronts[a].clone(), self.fronts[b].clone());
        let x = 0.5 * (fa.position(t) + fb.position(t));
        let (kind, out) = match (fa.family, fb.family) {
            (FrontFamily::NonPhysical, FrontFamily::Physical(j)) => (
                EventKind::NonPhysicalCrossing,
                self.shed(&[(j, fb.strength)], &fa.left, &fb.right)?,
            ),
            (FrontFamily::Physical(i), FrontFamily::Physical(j)) => {
                let simplified = if (fa.strength * fb.strength).abs() < self.opts.simplified_threshold {
                    let waves: &[(usize, f64)] = if i == j {
                        &[(i, fa.strength + fb.strength)]
                    } else {
                        // the right wave is of the slower family and passes first
                        &[(j, fb.strength), (i, fa.strength)]
                    };
                    let out = self.shed(waves, &fa.left, &fb.right)?;
                    let shed: f64 = out
                        .iter()
                        .filter(|o| o.family == FrontFamily::NonPhysical)
                        .map(|o| o.strength)
                        .sum();
                    (self.non_physical + shed <= self.opts.np_budget * self.opts.eps).then_some(out)
                } else {
                    None
                };
                match simplified {
                    Some(out) => (EventKind::Simplified, out),
                    None => {
                        let fan = riemann_fan(self.model, &fa.left, &fb.right, self.opts.eps)?;
                        (EventKind::Accurate, self.fan_fronts(fan))
                    }
                }
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "front {a} cannot catch up with front {b}: non-physical fronts are the fastest"
                )))
            }
        };
        let ids: Vec<usize> = out.into_iter().map(|o| self.add(o, x, t)).collect();
        self.splice(a, b, &ids, t);
        self.events.push(Event {
            time: t,
            position: x,
            kind,
            incoming: vec![a, b],
            outgoing: ids,
        });
        Ok(())
    }

    fn shift(&mut self, id: usize, dx: f64, t: f64) {
        let f = self.fronts[id].clone();
        let x = f.position(t) + dx;
        let new = self.add(
            Outgoing {
                family: f.family,
                strength: f.strength,
                left: f.left,
                right: f.right,
                speed: f.speed,
            },
            x,
            t,
        );
        self.splice(id, id, &[new], t);
        self.events.push(Event {
            time: t,
            position: x,
            kind: EventKind::Perturbation,
            incoming: vec![id],
            outgoing: vec![new],
        });
    }

    fn is_live_pair(&self, p: &Pending) -> bool {
        self.fronts[p.left].died.is_none() && self.fronts[p.right].died.is_none() && self.next[p.left] == Some(p.right)
    }

    /// Fronts meeting the pair `(a, b)` at time `tc`, leftmost first.
    fn cluster(&self, a: usize, b: usize, tc: f64) -> Vec<usize> {
        let meets = |l: usize, r: usize| {
            self.collision_time(l, r, tc)
                .is_some_and(|t| t - tc <= COALESCE_WINDOW * tc.abs().max(1.0))
        };
        let mut run = vec![a, b];
        while let Some(p) = self.prev[run[0]] {
            if meets(p, run[0]) {
                run.insert(0, p);
            } else {
                break;
            }
        }
        while let Some(nx) = self.next[*run.last().unwrap()] {
            if meets(*run.last().unwrap(), nx) {
                run.push(nx);
            } else {
                break;
            }
        }
        run
    }

    fn record(&mut self, t: f64) {
        let list = self.wave_list();
        let q = list.interaction_potential();
        let v = list.linear_functional();
        self.diagnostics.push(Diagnostics {
            t,
            v,
            q,
            upsilon: v + self.c0 * q,
            non_physical: list.non_physical_total(),
            fronts: list.waves().len(),
        });
    }

    fn wave_list(&self) -> WaveList {
        let mut waves = Vec::new();
        let mut k = self.head;
        let mut order = 0.0;
        while let Some(id) = k {
            let f = &self.fronts[id];
            // ordinal positions: waves at one point never interact, so
            // only the left-to-right order matters here
            waves.push(PointWave {
                x: order,
                family: match f.family {
                    FrontFamily::Physical(i) => i,
                    FrontFamily::NonPhysical => self.model.dim(),
                },
                strength: f.strength,
            });
            order += 1.0;
            k = self.next[id];
        }
        WaveList::new(gnl_flags(self.model), waves)
    }

    fn run(&mut self) -> Result<()> {
        self.record(0.0);
        while let Some(p) = self.heap.pop() {
            if !self.is_live_pair(&p) {
                continue;
            }
            if self.events.len() >= self.opts.max_events {
                return Err(Error::CollisionCascade {
                    events: self.events.len(),
                });
            }
            let run = self.cluster(p.left, p.right, p.time);
            if run.len() > 2 {
                let x = self.fronts[run[0]].position(p.time);
                let dx = COLLISION_SHIFT * x.abs().max(1.0);
                for (k, &id) in run.iter().enumerate().skip(2) {
                    self.shift(id, (k - 1) as f64 * dx, p.time);
                }
                self.interact(run[0], run[1], p.time)?;
            } else {
                self.interact(p.left, p.right, p.time)?;
            }
            self.record(p.time);
        }
        Ok(())
    }
}

/// Evolve `u0` to `t_final` with accuracy `eps`; interactions with
/// `|σσ'| < eps` use the simplified solver.
pub fn ft_solve(
    model: &FluxModel,
    u0: &PiecewiseConstantFn,
    eps: f64,
    t_final: f64,
    consts: &StabilityConstants,
) -> Result<FTTrajectory> {
    ft_solve_with(model, u0, &TrackingOptions::new(eps, t_final), consts)
}

pub fn ft_solve_with(
    model: &FluxModel,
    u0: &PiecewiseConstantFn,
    opts: &TrackingOptions,
    consts: &StabilityConstants,
) -> Result<FTTrajectory> {
    if !(opts.eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {}", opts.eps)));
    }
    if !(opts.t_final >= 0.0) || !opts.t_final.is_finite() {
        return Err(Error::InvalidInput(format!(
            "final time must be finite and ≥ 0, got {}",
            opts.t_final
        )));
    }
    if u0.dim() != model.dim() {
        return Err(Error::InvalidInput(format!(
            "initial data of dimension {} for a model of dimension {}",
            u0.dim(),
            model.dim()
        )));
    }
    let lambda_hat = model.max_characteristic_speed(256)? + 1.0;
    let mut tr = Tracker {
        model,
        opts: *opts,
        lambda_hat,
        c0: consts.c0,
        fronts: Vec::new(),
        prev: Vec::new(),
        next: Vec::new(),
        head: None,
        heap: BinaryHeap::new(),
        events: Vec::new(),
        diagnostics: Vec::new(),
        non_physical: 0.0,
    };
    let mut ids = Vec::new();
    for (x, l, r) in u0.jumps() {
        let fan = riemann_fan(model, &l, &r, opts.eps)?;
        for o in tr.fan_fronts(fan) {
            ids.push(tr.add(o, x, 0.0));
        }
    }
    for w in ids.windows(2) {
        tr.next[w[0]] = Some(w[1]);
        tr.prev[w[1]] = Some(w[0]);
    }
    tr.head = ids.first().copied();
    for w in ids.windows(2) {
        tr.schedule(Some(w[0]), Some(w[1]), 0.0);
    }
    tr.run()?;
    Ok(FTTrajectory {
        model: model.clone(),
        eps: opts.eps,
        t_final: opts.t_final,
        lambda_hat,
        fronts: tr.fronts,
        events: tr.events,
        diagnostics: tr.diagnostics,
    })
}

impl FTTrajectory {
    pub fn model(&self) -> &FluxModel {
        &self.model
    }

    /// Fronts alive at `t`, left to right.
    pub fn fronts_at(&self, t: f64) -> Vec<&Front> {
        let mut alive: Vec<&Front> = self.fronts.iter().filter(|f| f.alive_at(t)).collect();
        alive.sort_by(|a, b| a.position(t).total_cmp(&b.position(t)).then(a.id.cmp(&b.id)));
        alive
    }

    /// Interaction events, perturbations excluded.
    pub fn collisions(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.kind != EventKind::Perturbation)
    }

    /// `w(t, ·)`; at an event time the post-event state.
    pub fn snapshot(&self, t: f64) -> Result<PiecewiseConstantFn> {
        let n = self.model.dim();
        let fronts = self.fronts_at(t);
        if fronts.is_empty() {
            return Ok(PiecewiseConstantFn::zero(n));
        }
        let mut bps: Vec<f64> = Vec::new();
        let mut vals: Vec<State> = Vec::new();
        for f in &fronts {
            let x = f.position(t);
            if bps.last() == Some(&x) {
                *vals.last_mut().unwrap() = f.right.clone();
            } else {
                bps.push(x);
                vals.push(f.right.clone());
            }
        }
        vals.pop();
        PiecewiseConstantFn::new(n, bps, vals)
    }

    /// `w(t)` with two wave lists: the Riemann strengths of its jumps, as
    /// used by `Φ`, and the list used by `Φ^ε`, which differs only at points
    /// holding a non-physical front: there the fronts enter one by one and
    /// the non-physical strength goes to the fictitious family `n + 1`.
    pub fn wave_lists(&self, t: f64) -> Result<(PiecewiseConstantFn, WaveList, WaveList)> {
        let n = self.model.dim();
        let v = self.snapshot(t)?;
        let fronts = self.fronts_at(t);
        let (mut plain, mut eps) = (Vec::new(), Vec::new());
        for (x, l, r) in v.jumps() {
            let e = solve_strengths(&self.model, &l, &r)?;
            push_strengths(&mut plain, x, &e.sigma);
            let here: Vec<&&Front> = fronts.iter().filter(|f| f.position(t) == x).collect();
            if !here.iter().any(|f| f.is_non_physical()) {
                push_strengths(&mut eps, x, &e.sigma);
                continue;
            }
            for f in here {
                if f.is_non_physical() {
                    eps.push(PointWave {
                        x,
                        family: n,
                        strength: f.strength,
                    });
                } else {
                    let e = solve_strengths(&self.model, &f.left, &f.right)?;
                    push_strengths(&mut eps, x, &e.sigma);
                }
            }
        }
        let gnl = gnl_flags(&self.model);
        Ok((v, WaveList::new(gnl.clone(), plain), WaveList::new(gnl, eps)))
    }

    /// Largest increase of `Υ^ε` across any collision.
    pub fn max_upsilon_increase(&self) -> f64 {
        self.diagnostics
            .windows(2)
            .map(|w| w[1].upsilon - w[0].upsilon)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_non_physical(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.non_physical).fold(0.0, f64::max)
    }

    pub fn event_log_json(&self) -> serde_json::Value {
        let fronts: Vec<serde_json::Value> = self
            .fronts
            .iter()
            .map(|f| {
                serde_json::json!({
                    "id": f.id,
                    "family": match f.family {
                        FrontFamily::Physical(i) => serde_json::json!(i + 1),
                        FrontFamily::NonPhysical => serde_json::json!("non_physical"),
                    },
                    "strength": f.strength,
                    "speed": f.speed,
                    "born": f.born,
                    "died": f.died,
                    "x_born": f.x_born,
                    "left": f.left.as_slice(),
                    "right": f.right.as_slice(),
                })
            })
            .collect();
        serde_json::json!({
            "eps": self.eps,
            "t_final": self.t_final,
            "lambda_hat": self.lambda_hat,
            "fronts": fronts,
            "events": self.events,
            "diagnostics": self.diagnostics,
        })
    }
}

fn push_strengths(waves: &mut Vec<PointWave>, x: f64, sigma: &[f64]) {
    for (i, &s) in sigma.iter().enumerate() {
        if s != 0.0 {
            waves.push(PointWave {
                x,
                family: i,
                strength: s,
            });
        }
    }
}

/// `Φ` and `Φ^ε` of two trajectories at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairSample {
    pub t: f64,
    pub phi: f64,
    pub phi_eps: f64,
    pub l1: f64,
    pub upsilon: f64,
    pub upsilon_tilde: f64,
}

pub fn pair_sample(
    traj: &FTTrajectory,
    traj_tilde: &FTTrajectory,
    consts: &StabilityConstants,
    t: f64,
) -> Result<PairSample> {
    let (v, wv, wv_eps) = traj.wave_lists(t)?;
    let (vt, wvt, wvt_eps) = traj_tilde.wave_lists(t)?;
    let (q, qt) = (wv.interaction_potential(), wvt.interaction_potential());
    let sets = [
        WeightWaves {
            wv: &wv,
            wvt: &wvt,
            q_sum: q + qt,
        },
        WeightWaves {
            wv: &wv_eps,
            wvt: &wvt_eps,
            q_sum: wv_eps.interaction_potential() + wvt_eps.interaction_potential(),
        },
    ];
    let e = phi_with_wave_sets(traj.model(), &v, &vt, &sets, consts)?;
    Ok(PairSample {
        t,
        phi: e[0].phi,
        phi_eps: e[1].phi,
        l1: e[0].l1,
        upsilon: wv.glimm_total(consts.c0),
        upsilon_tilde: wvt.glimm_total(consts.c0),
    })
}

/// `Φ(w(t), w̃(t))` with `Φ^ε`, the L¹ distance and `Υ` at the sample times.
pub fn phi_timeline(
    traj: &FTTrajectory,
    traj_tilde: &FTTrajectory,
    consts: &StabilityConstants,
    sample_times: &[f64],
) -> Result<Vec<PairSample>> {
    sample_times
        .iter()
        .map(|&t| pair_sample(traj, traj_tilde, consts, t))
        .collect()
}

/// Largest `Φ(t₂) − Φ(t₁)` over sample pairs `t₁ < t₂`, floored at 0.
pub fn max_phi_increase(samples: &[PairSample]) -> f64 {
    let mut best = 0.0_f64;
    let mut running_min = f64::INFINITY;
    for s in samples {
        best = best.max(s.phi - running_min);
        running_min = running_min.min(s.phi);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiEpsComparison {
    pub t: f64,
    pub phi: f64,
    pub phi_eps: f64,
    pub l1: f64,
    /// `C·ε·‖w − w̃‖_{L¹}` for the supplied `C`.
    pub bound: f64,
}

/// `Φ` against `Φ^ε` at time `t`.
pub fn phi_eps_compare(
    traj: &FTTrajectory,
    traj_tilde: &FTTrajectory,
    consts: &StabilityConstants,
    t: f64,
    c_fit: f64,
) -> Result<PhiEpsComparison> {
    let s = pair_sample(traj, traj_tilde, consts, t)?;
    Ok(PhiEpsComparison {
        t,
        phi: s.phi,
        phi_eps: s.phi_eps,
        l1: s.l1,
        bound: c_fit * traj.eps.max(traj_tilde.eps) * s.l1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux_models::{builtin, ModelId};

    fn burgers() -> FluxModel {
        builtin(&ModelId::Burgers).unwrap()
    }

    #[test]
    fn single_shock_does_not_move() {
        let m = burgers();
        let u0 = PiecewiseConstantFn::scalar(vec![-1.0, 0.0, 1.0], vec![0.2, -0.2]).unwrap();
        let tr = ft_solve(&m, &u0, 0.01, 1.0, &StabilityConstants::default()).unwrap();
        // the outer jumps 0→0.2 and −0.2→0 are rarefactions: still one shock at x = 0
        let shocks: Vec<&Front> = tr.fronts.iter().filter(|f| f.strength < 0.0).collect();
        assert_eq!(shocks.len(), 1);
        assert!(shocks[0].speed.abs() < 1e-12 && shocks[0].died.is_none());
    }

    #[test]
    fn constant_data_has_no_fronts() {
        let tr = ft_solve(
            &burgers(),
            &PiecewiseConstantFn::zero(1),
            0.01,
            1.0,
            &StabilityConstants::default(),
        )
        .unwrap();
        assert!(tr.fronts.is_empty() && tr.events.is_empty());
        assert!(tr.snapshot(0.7).unwrap().is_zero());
    }

    #[test]
    fn shocks_merge() {
        let m = burgers();
        // 0.3 | 0.2 | 0.0: shocks of −0.1 at 0 (speed 0.25) and −0.2 at 1 (speed 0.1)
        let u0 = PiecewiseConstantFn::scalar(vec![-5.0, 0.0, 1.0], vec![0.3, 0.2]).unwrap();
        let tr = ft_solve(&m, &u0, 0.01, 10.0, &StabilityConstants::default()).unwrap();
        let merge = tr.collisions().find(|e| e.kind == EventKind::Accurate).unwrap();
        assert!((merge.time - 1.0 / 0.15).abs() < 1e-12);
        let out = &tr.fronts[merge.outgoing[0]];
        assert_eq!(merge.outgoing.len(), 1);
        assert!((out.strength + 0.3).abs() < 1e-12);
        assert!((out.speed - 0.15).abs() < 1e-12);
    }
}
