//! Wave measures of BV functions built from affine pieces, the interaction
//! measure `ρ`, `Q̂`, `Υ̂`, the weights `Â_i`, the functional `Ξ̂`, the
//! piecewise-constant approximating sequence and the gap bound on
//! intervals without jumps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux_models::FluxModel;
use crate::functionals::{gnl_flags, PiecewiseConstantFn, StabilityConstants, MERGE_TOL};
use crate::linalg::State;
use crate::quadrature::{adaptive_gl5, bisect_root, gl5_rule};
use crate::riemann::{solve_shock_strengths, solve_strengths};

/// Density cells per affine piece.
pub const CELLS_PER_PIECE: usize = 1000;

/// One affine piece `p + slope·(x − a)` on `[a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    pub a: f64,
    pub b: f64,
    pub p: State,
    pub slope: State,
}

impl AffinePiece {
    pub fn at(&self, x: f64) -> State {
        &self.p + &self.slope * (x - self.a)
    }
}

/// A right-continuous BV function made of finitely many affine pieces,
/// zero outside them; jumps sit wherever neighbouring values disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBv", into = "RawBv")]
pub struct BVFunction {
    dim: usize,
    pieces: Vec<AffinePiece>,
}

#[derive(Serialize, Deserialize)]
struct RawPiece {
    a: f64,
    b: f64,
    p: Vec<f64>,
    slope: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawBv {
    pieces: Vec<RawPiece>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

impl TryFrom<RawBv> for BVFunction {
    type Error = Error;

    fn try_from(raw: RawBv) -> Result<Self> {
        let dim = raw
            .pieces
            .first()
            .map(|p| p.p.len())
            .or(raw.dim)
            .ok_or_else(|| Error::InvalidInput("empty BV function needs an explicit \"dim\"".into()))?;
        let pieces = raw
            .pieces
            .into_iter()
            .map(|r| AffinePiece {
                a: r.a,
                b: r.b,
                p: State::from_vec(r.p),
                slope: State::from_vec(r.slope),
            })
            .collect();
        BVFunction::new(dim, pieces)
    }
}

impl From<BVFunction> for RawBv {
    fn from(u: BVFunction) -> Self {
        RawBv {
            pieces: u
                .pieces
                .into_iter()
                .map(|p| RawPiece {
                    a: p.a,
                    b: p.b,
                    p: p.p.iter().copied().collect(),
                    slope: p.slope.iter().copied().collect(),
                })
                .collect(),
            dim: Some(u.dim),
        }
    }
}

impl BVFunction {
    pub fn new(dim: usize, pieces: Vec<AffinePiece>) -> Result<Self> {
        for (k, p) in pieces.iter().enumerate() {
            if !(p.a < p.b) || !p.a.is_finite() || !p.b.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "piece {k} has an empty or infinite interval"
                )));
            }
            if p.p.len() != dim || p.slope.len() != dim {
                return Err(Error::InvalidInput(format!("piece {k} does not have dimension {dim}")));
            }
            if p.p.iter().chain(p.slope.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("piece {k} has non-finite data")));
            }
            if k > 0 && pieces[k - 1].b > p.a {
                return Err(Error::InvalidInput("pieces must be sorted and disjoint".into()));
            }
        }
        Ok(Self { dim, pieces })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            pieces: Vec::new(),
        }
    }

    pub fn from_pcf(u: &PiecewiseConstantFn) -> Self {
        let bp = u.breakpoints();
        Self {
            dim: u.dim(),
            pieces: u
                .values()
                .iter()
                .enumerate()
                .map(|(k, v)| AffinePiece {
                    a: bp[k],
                    b: bp[k + 1],
                    p: v.clone(),
                    slope: State::zeros(u.dim()),
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.pieces.iter().all(|p| p.slope.iter().all(|&s| s == 0.0))
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        Some((self.pieces.first()?.a, self.pieces.last()?.b))
    }

    pub fn value_at(&self, x: f64) -> State {
        let k = self.pieces.partition_point(|p| p.b <= x);
        match self.pieces.get(k) {
            Some(p) if p.a <= x => p.at(x),
            _ => State::zeros(self.dim),
        }
    }

    pub fn left_limit(&self, x: f64) -> State {
        let k = self.pieces.partition_point(|p| p.b < x);
        match self.pieces.get(k) {
            Some(p) if p.a < x => p.at(x),
            _ => State::zeros(self.dim),
        }
    }

    /// `(x, u(x−), u(x+))` at every discontinuity.
    pub fn jumps(&self) -> Vec<(f64, State, State)> {
        let mut pts: Vec<f64> = self.pieces.iter().flat_map(|p| [p.a, p.b]).collect();
        pts.dedup();
        pts.into_iter()
            .filter_map(|x| {
                let (l, r) = (self.left_limit(x), self.value_at(x));
                let gap = l.iter().zip(r.iter()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                (gap > MERGE_TOL).then_some((x, l, r))
            })
            .collect()
    }

    /// `|Du|(ℝ)` with the Euclidean norm.
    pub fn total_variation(&self) -> f64 {
        let cont: f64 = self.pieces.iter().map(|p| p.slope.norm() * (p.b - p.a)).sum();
        cont + self.jumps().iter().map(|(_, l, r)| (r - l).norm()).sum::<f64>()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            pieces: self
                .pieces
                .iter()
                .map(|p| AffinePiece {
                    a: p.a,
                    b: p.b,
                    p: &p.p * factor,
                    slope: &p.slope * factor,
                })
                .collect(),
        }
    }

    /// `‖u − v‖_{L¹}` against a step function, by composite GL5 on the
    /// common refinement.
    pub fn l1_distance_pcf(&self, v: &PiecewiseConstantFn) -> f64 {
        let mut z: Vec<f64> = self.pieces.iter().flat_map(|p| [p.a, p.b]).collect();
        z.extend_from_slice(v.breakpoints());
        z.sort_by(|a, b| a.total_cmp(b));
        z.dedup();
        let mut total = 0.0;
        for w in z.windows(2) {
            let panels = 8;
            let h = (w[1] - w[0]) / panels as f64;
            for k in 0..panels {
                let (a, b) = (w[0] + k as f64 * h, w[0] + (k + 1) as f64 * h);
                for (x, wt) in gl5_rule(a, b) {
                    total += wt * (self.value_at(x) - v.value_at(x)).norm();
                }
            }
        }
        total
    }
}

/// An atom or a constant-density cell `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Item {
    start: f64,
    end: f64,
    mass: f64,
    is_atom: bool,
}

impl Item {
    fn density(&self) -> f64 {
        if self.is_atom {
            0.0
        } else {
            self.mass / (self.end - self.start)
        }
    }

    fn center(&self) -> f64 {
        0.5 * (self.start + self.end)
    }
}

/// A finite signed measure on ℝ: atoms plus a piecewise-constant density.
/// All operations are exact on this representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure1D {
    items: Vec<Item>,
    prefix_mass: Vec<f64>,
    prefix_moment: Vec<f64>,
}

impl SignedMeasure1D {
    /// `atoms`: `(x, mass)`; `cells`: `(a, b, density)` on `[a, b)`.
    pub fn new(atoms: Vec<(f64, f64)>, cells: Vec<(f64, f64, f64)>) -> Result<Self> {
        // a cell containing an atom is cut there so items stay ordered by end
        let mut cuts: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        cuts.sort_by(|a, b| a.total_cmp(b));
        let cells: Vec<(f64, f64, f64)> = cells
            .into_iter()
            .flat_map(|(a, b, d)| {
                let lo = cuts.partition_point(|&c| c <= a);
                let hi = cuts.partition_point(|&c| c < b);
                let mut pts = vec![a];
                pts.extend_from_slice(&cuts[lo..hi.max(lo)]);
                pts.push(b);
                pts.windows(2).map(|w| (w[0], w[1], d)).collect::<Vec<_>>()
            })
            .collect();
        let mut items: Vec<Item> = atoms
            .into_iter()
            .filter(|(_, m)| *m != 0.0)
            .map(|(x, m)| Item {
                start: x,
                end: x,
                mass: m,
                is_atom: true,
            })
            .chain(cells.into_iter().filter(|c| c.2 != 0.0).map(|(a, b, d)| Item {
                start: a,
                end: b,
                mass: d * (b - a),
                is_atom: false,
            }))
            .collect();
        if items.iter().any(|it| !(it.start <= it.end) || !it.mass.is_finite()) {
            return Err(Error::InvalidInput(
                "measure items must be finite with start ≤ end".into(),
            ));
        }
        items.sort_by(|a, b| a.start.total_cmp(&b.start).then(b.is_atom.cmp(&a.is_atom)));
        for w in items.windows(2) {
            let clash = if w[0].is_atom && w[1].is_atom {
                w[0].start == w[1].start
            } else {
                w[0].end > w[1].start
            };
            if clash {
                return Err(Error::InvalidInput("measure atoms and cells must not overlap".into()));
            }
        }
        Ok(Self::from_sorted(items))
    }

    fn from_sorted(items: Vec<Item>) -> Self {
        let mut prefix_mass = Vec::with_capacity(items.len() + 1);
        let mut prefix_moment = Vec::with_capacity(items.len() + 1);
        let (mut m, mut mo) = (0.0, 0.0);
        prefix_mass.push(0.0);
        prefix_moment.push(0.0);
        for it in &items {
            m += it.mass;
            mo += it.mass * it.center();
            prefix_mass.push(m);
            prefix_moment.push(mo);
        }
        Self {
            items,
            prefix_mass,
            prefix_moment,
        }
    }

    pub fn zero() -> Self {
        Self::from_sorted(Vec::new())
    }

    fn map_items<F: Fn(&Item) -> f64>(&self, mass: F) -> Self {
        let items = self
            .items
            .iter()
            .map(|it| Item { mass: mass(it), ..*it })
            .filter(|it| it.mass != 0.0)
            .collect();
        Self::from_sorted(items)
    }

    pub fn positive_part(&self) -> Self {
        self.map_items(|it| it.mass.max(0.0))
    }

    pub fn negative_part(&self) -> Self {
        self.map_items(|it| (-it.mass).max(0.0))
    }

    pub fn total_variation_measure(&self) -> Self {
        self.map_items(|it| it.mass.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.items.is_empty()
    }

    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.items
            .iter()
            .filter(|i| i.is_atom)
            .map(|i| (i.start, i.mass))
            .collect()
    }

    /// `(a, b, density)` for every cell.
    pub fn cells(&self) -> Vec<(f64, f64, f64)> {
        self.items
            .iter()
            .filter(|i| !i.is_atom)
            .map(|i| (i.start, i.end, i.density()))
            .collect()
    }

    pub fn total(&self) -> f64 {
        *self.prefix_mass.last().unwrap()
    }

    /// Item boundaries, useful as quadrature breakpoints.
    pub fn boundaries(&self) -> impl Iterator<Item = f64> + '_ {
        self.items.iter().flat_map(|i| [i.start, i.end])
    }

    /// `μ(]−∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.items.partition_point(|it| it.end <= x);
        let mut v = self.prefix_mass[k];
        if let Some(it) = self.items.get(k) {
            if !it.is_atom && it.start < x {
                v += it.density() * (x - it.start);
            }
        }
        v
    }

    /// `μ(]−∞, x[)`.
    pub fn cdf_open(&self, x: f64) -> f64 {
        let k = self
            .items
            .partition_point(|it| if it.is_atom { it.start < x } else { it.end <= x });
        let mut v = self.prefix_mass[k];
        if let Some(it) = self.items.get(k) {
            if !it.is_atom && it.start < x {
                v += it.density() * (x - it.start);
            }
        }
        v
    }

    /// `μ(]a, b[)`.
    pub fn open_interval(&self, a: f64, b: f64) -> f64 {
        if !(a < b) {
            return 0.0;
        }
        self.cdf_open(b) - self.cdf(a)
    }

    /// `μ(]x, +∞[)`.
    pub fn right_of(&self, x: f64) -> f64 {
        self.total() - self.cdf(x)
    }

    /// `∫_{−∞}^x μ(]−∞, t]) dt`.
    fn integrated_cdf(&self, x: f64) -> f64 {
        let k = self.items.partition_point(|it| it.end <= x);
        let mut v = x * self.prefix_mass[k] - self.prefix_moment[k];
        if let Some(it) = self.items.get(k) {
            if !it.is_atom && it.start < x {
                v += 0.5 * it.density() * (x - it.start) * (x - it.start);
            }
        }
        v
    }

    /// `(α ⊗ β)({(x, y) : x < y})`, exactly.
    pub fn half_plane_product(&self, other: &SignedMeasure1D) -> f64 {
        let bt = other.total();
        self.items
            .iter()
            .map(|it| {
                if it.is_atom {
                    it.mass * (bt - other.cdf(it.start))
                } else {
                    let len = it.end - it.start;
                    it.density() * (len * bt - (other.integrated_cdf(it.end) - other.integrated_cdf(it.start)))
                }
            })
            .sum()
    }
}

/// The wave measures `μ_1, …, μ_n` of one function with cached Jordan parts.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveMeasureSet {
    pub mu: Vec<SignedMeasure1D>,
    pub plus: Vec<SignedMeasure1D>,
    pub minus: Vec<SignedMeasure1D>,
    pub abs: Vec<SignedMeasure1D>,
    gnl: Vec<bool>,
}

impl WaveMeasureSet {
    pub fn from_measures(mu: Vec<SignedMeasure1D>, gnl: Vec<bool>) -> Self {
        Self {
            plus: mu.iter().map(|m| m.positive_part()).collect(),
            minus: mu.iter().map(|m| m.negative_part()).collect(),
            abs: mu.iter().map(|m| m.total_variation_measure()).collect(),
            mu,
            gnl,
        }
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    /// `Σ_i |μ_i|(ℝ)`.
    pub fn total_strength(&self) -> f64 {
        self.abs.iter().map(|m| m.total()).sum()
    }

    /// `Q̂ = ρ({x < y})`. Same-family products enter for genuinely nonlinear
    /// families only, so that `Q̂` agrees with `Q` on step functions.
    pub fn interaction(&self) -> f64 {
        let n = self.n();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..i {
                q += self.abs[i].half_plane_product(&self.abs[j]);
            }
            if self.gnl[i] {
                q += self.minus[i].half_plane_product(&self.minus[i])
                    + self.plus[i].half_plane_product(&self.minus[i])
                    + self.minus[i].half_plane_product(&self.plus[i]);
            }
        }
        q
    }

    pub fn upsilon(&self, c0: f64) -> f64 {
        self.total_strength() + c0 * self.interaction()
    }

    fn boundaries(&self) -> Vec<f64> {
        self.mu
            .iter()
            .flat_map(|m| m.boundaries().collect::<Vec<_>>())
            .collect()
    }
}

/// `μ_i(B) = ∫_B l_i(u) dμ_c + Σ_{x∈B} E_i(u(x−), u(x+))`.
pub fn wave_measures(model: &FluxModel, u: &BVFunction) -> Result<WaveMeasureSet> {
    let n = model.dim();
    if u.dim() != n {
        return Err(Error::InvalidInput(format!(
            "BV function of dimension {} for a model of dimension {n}",
            u.dim()
        )));
    }
    let mut atoms: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n];
    for (x, l, r) in u.jumps() {
        let e = solve_strengths(model, &l, &r)?;
        for (family, s) in atoms.iter_mut().zip(&e.sigma) {
            family.push((x, *s));
        }
    }
    let mut cells: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); n];
    for piece in u.pieces() {
        if piece.slope.iter().all(|&s| s == 0.0) {
            continue;
        }
        let density = |x: f64, i: usize| -> Result<f64> {
            Ok(model.eigen_unchecked(&piece.at(x))?.left_vecs[i].dot(&piece.slope))
        };
        let all_densities = |x: f64| -> Result<Vec<f64>> {
            let e = model.eigen_unchecked(&piece.at(x))?;
            Ok(e.left_vecs.iter().map(|l| l.dot(&piece.slope)).collect())
        };
        let h = (piece.b - piece.a) / CELLS_PER_PIECE as f64;
        let mut left = all_densities(piece.a)?;
        for k in 0..CELLS_PER_PIECE {
            let a = piece.a + k as f64 * h;
            let b = if k + 1 == CELLS_PER_PIECE {
                piece.b
            } else {
                piece.a + (k + 1) as f64 * h
            };
            let right = all_densities(b)?;
            let mut masses = vec![0.0; n];
            for (x, w) in gl5_rule(a, b) {
                for (i, d) in all_densities(x)?.into_iter().enumerate() {
                    masses[i] += w * d;
                }
            }
            for i in 0..n {
                if left[i] * right[i] < 0.0 {
                    // split at the sign change so the Jordan parts stay exact
                    let root = bisect_root(&mut |x| density(x, i), a, b)?;
                    for (lo, hi) in [(a, root), (root, b)] {
                        if hi > lo {
                            let mut m = 0.0;
                            for (x, w) in gl5_rule(lo, hi) {
                                m += w * density(x, i)?;
                            }
                            cells[i].push((lo, hi, m / (hi - lo)));
                        }
                    }
                } else {
                    cells[i].push((a, b, masses[i] / (b - a)));
                }
            }
            left = right;
        }
    }
    let mu = atoms
        .into_iter()
        .zip(cells)
        .map(|(a, c)| SignedMeasure1D::new(a, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(WaveMeasureSet::from_measures(mu, gnl_flags(model)))
}

/// `Q̂(u)`.
pub fn interaction_measure(model: &FluxModel, u: &BVFunction) -> Result<f64> {
    Ok(wave_measures(model, u)?.interaction())
}

/// `Υ̂(u) = Σ_i |μ_i|(ℝ) + C₀ Q̂(u)`.
pub fn upsilon_hat(model: &FluxModel, u: &BVFunction, consts: &StabilityConstants) -> Result<f64> {
    Ok(wave_measures(model, u)?.upsilon(consts.c0))
}

/// `Â_i(x)` for the given sign of `q_i(x)`.
pub fn a_hat(ws: &WaveMeasureSet, ws_tilde: &WaveMeasureSet, i: usize, x: f64, q_negative: bool) -> f64 {
    let left = |w: &WaveMeasureSet, j: usize| w.abs[j].cdf(x);
    let right = |w: &WaveMeasureSet, j: usize| w.abs[j].right_of(x);
    let mut a = 0.0;
    for j in i + 1..ws.n() {
        a += left(ws, j) + left(ws_tilde, j);
    }
    for j in 0..i {
        a += right(ws, j) + right(ws_tilde, j);
    }
    if ws.gnl[i] {
        a += if q_negative {
            left(ws, i) + right(ws_tilde, i)
        } else {
            right(ws, i) + left(ws_tilde, i)
        };
    }
    a
}

/// `Ξ̂` with the quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiHatEvaluation {
    pub xi_hat: f64,
    pub error_estimate: f64,
    pub q_hat: f64,
    pub q_hat_tilde: f64,
}

/// `Ξ̂(u, ũ) = Σ_i ∫ |q_i(x)| Ŵ_i(x) dx`,
/// `Ŵ_i = 1 + κ₁Â_i + κ₁κ₂(Q̂(u) + Q̂(ũ))`.
pub fn xi_hat_detailed(
    model: &FluxModel,
    u: &BVFunction,
    u_tilde: &BVFunction,
    consts: &StabilityConstants,
) -> Result<XiHatEvaluation> {
    let ws = wave_measures(model, u)?;
    let wt = wave_measures(model, u_tilde)?;
    let (qh, qht) = (ws.interaction(), wt.interaction());
    let base = 1.0 + consts.kappa1 * consts.kappa2 * (qh + qht);
    let n = model.dim();

    let mut z: Vec<f64> = ws.boundaries();
    z.extend(wt.boundaries());
    for f in [u, u_tilde] {
        z.extend(f.pieces().iter().flat_map(|p| [p.a, p.b]));
    }
    z.sort_by(|a, b| a.total_cmp(b));
    z.dedup();

    let q_at =
        |x: f64| -> Result<Vec<f64>> { Ok(solve_shock_strengths(model, &u.value_at(x), &u_tilde.value_at(x))?.sigma) };
    let integrand_with = |x: f64, q: &[f64]| -> f64 {
        (0..n)
            .filter(|&i| q[i] != 0.0)
            .map(|i| q[i].abs() * (base + consts.kappa1 * a_hat(&ws, &wt, i, x, q[i] < 0.0)))
            .sum()
    };
    let both_constant = u.is_piecewise_constant() && u_tilde.is_piecewise_constant();

    let mut total = 0.0;
    let mut error = 0.0;
    for w in z.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        if both_constant {
            let q = q_at(mid)?;
            total += (b - a) * integrand_with(mid, &q);
            continue;
        }
        // split where some q_i changes sign, then integrate each smooth part
        let qa = solve_shock_strengths(model, &u.value_at(a), &u_tilde.value_at(a))?.sigma;
        let qb = solve_shock_strengths(model, &u.left_limit(b), &u_tilde.left_limit(b))?.sigma;
        let mut cuts = vec![a, b];
        for i in 0..n {
            if qa[i] * qb[i] < 0.0 {
                cuts.push(bisect_root(&mut |x| Ok(q_at(x)?[i]), a, b)?);
            }
        }
        cuts.sort_by(|x, y| x.total_cmp(y));
        for c in cuts.windows(2) {
            if c[1] <= c[0] {
                continue;
            }
            let mut f = |x: f64| -> Result<f64> { Ok(integrand_with(x, &q_at(x)?)) };
            let mut whole = 0.0;
            for (x, wgt) in gl5_rule(c[0], c[1]) {
                whole += wgt * f(x)?;
            }
            let tol = 1e-10 * whole.abs() + 1e-18 * (c[1] - c[0]);
            let (v, e) = adaptive_gl5(&mut f, c[0], c[1], tol, 30)?;
            total += v;
            error += e;
        }
    }
    if error > 1e-8 * total.abs().max(1e-300) && error > 1e-16 {
        return Err(Error::QuadratureNonConvergence { estimate: total, error });
    }
    Ok(XiHatEvaluation {
        xi_hat: total,
        error_estimate: error,
        q_hat: qh,
        q_hat_tilde: qht,
    })
}

pub fn xi_hat(model: &FluxModel, u: &BVFunction, u_tilde: &BVFunction, consts: &StabilityConstants) -> Result<f64> {
    Ok(xi_hat_detailed(model, u, u_tilde, consts)?.xi_hat)
}

/// The step function `v_ν` built on a mesh that contains every jump and
/// keeps `|Du|` of each open cell below `1/((b − a)ν)`, with
/// `[a, b]` the support widened by one half on each side.
pub fn approx_sequence(u: &BVFunction, nu: usize) -> Result<PiecewiseConstantFn> {
    if nu == 0 {
        return Err(Error::InvalidInput("nu must be a positive integer".into()));
    }
    let Some((lo, hi)) = u.support() else {
        return Ok(PiecewiseConstantFn::zero(u.dim()));
    };
    let (a, b) = (lo - 0.5, hi + 0.5);
    let cell_budget = 1.0 / ((b - a) * nu as f64);
    let mut xs = vec![a, b];
    for p in u.pieces() {
        xs.push(p.a);
        xs.push(p.b);
        let variation = p.slope.norm() * (p.b - p.a);
        if variation > 0.0 {
            let cells = (variation / cell_budget).ceil();
            if !cells.is_finite() || cells > 1e8 {
                return Err(Error::MeshFailure(format!(
                    "piece on [{}, {}) would need {cells} cells",
                    p.a, p.b
                )));
            }
            let cells = cells as usize;
            let h = (p.b - p.a) / cells as f64;
            xs.extend((1..cells).map(|k| p.a + k as f64 * h));
        }
    }
    xs.sort_by(|x, y| x.total_cmp(y));
    xs.dedup();
    let n_pts = xs.len();
    let y = |alpha: usize| -> f64 {
        // y_0 = x_1 − 1, y_α midpoints, y_N = x_N + 1 (0-based here)
        if alpha == 0 {
            xs[0] - 1.0
        } else if alpha == n_pts {
            xs[n_pts - 1] + 1.0
        } else {
            0.5 * (xs[alpha - 1] + xs[alpha])
        }
    };
    let mut bps = Vec::with_capacity(2 * n_pts + 1);
    let mut vals = Vec::with_capacity(2 * n_pts);
    for (k, &x) in xs.iter().enumerate() {
        bps.push(y(k));
        vals.push(u.left_limit(x));
        bps.push(x);
        vals.push(u.value_at(x));
    }
    bps.push(y(n_pts));
    PiecewiseConstantFn::new(u.dim(), bps, vals)
}

/// Both sides of the bound
/// `|E_i(u(a+), u(b−)) − μ_i(]a, b[)| ≤ C · diam(u(]a, b[)) · |μ|(]a, b[)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapBound {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn gap_bound(model: &FluxModel, u: &BVFunction, a: f64, b: f64) -> Result<GapBound> {
    if !(a < b) {
        return Err(Error::InvalidInput(format!("need a < b, got [{a}, {b}]")));
    }
    let ws = wave_measures(model, u)?;
    let e = solve_strengths(model, &u.value_at(a), &u.left_limit(b))?;
    let lhs = (0..model.dim())
        .map(|i| (e.sigma[i] - ws.mu[i].open_interval(a, b)).abs())
        .fold(0.0, f64::max);
    // |μ|(]a,b[) of the vector measure Du
    let mut tv = 0.0;
    for p in u.pieces() {
        let (lo, hi) = (p.a.max(a), p.b.min(b));
        if lo < hi {
            tv += p.slope.norm() * (hi - lo);
        }
    }
    for (x, l, r) in u.jumps() {
        if a < x && x < b {
            tv += (r - l).norm();
        }
    }
    Ok(GapBound {
        lhs,
        rhs: diameter(u, a, b) * tv,
    })
}

/// `diam(u(]a, b[))`: affine pieces attain their extremes at endpoints.
pub fn diameter(u: &BVFunction, a: f64, b: f64) -> f64 {
    let mut pts: Vec<State> = Vec::new();
    let mut covered = 0.0;
    for p in u.pieces() {
        let (lo, hi) = (p.a.max(a), p.b.min(b));
        if lo < hi {
            pts.push(p.at(lo));
            pts.push(p.at(hi));
            covered += hi - lo;
        }
    }
    if covered < (b - a) * (1.0 - 1e-15) {
        pts.push(State::zeros(u.dim()));
    }
    let mut d = 0.0_f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max((&pts[i] - &pts[j]).norm());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux_models::{builtin, ModelId};
    use crate::functionals::{glimm_values, jump_strengths, stability_phi};
    use crate::linalg::state;

    fn burgers() -> FluxModel {
        builtin(&ModelId::Burgers).unwrap()
    }

    fn ramp(a: f64, b: f64, p: f64, slope: f64) -> AffinePiece {
        AffinePiece {
            a,
            b,
            p: state(&[p]),
            slope: state(&[slope]),
        }
    }

    #[test]
    fn measure_primitives() {
        let m = SignedMeasure1D::new(vec![(0.0, -0.1), (1.0, 0.3)], vec![(0.0, 1.0, 0.2)]).unwrap();
        assert!((m.total() - 0.4).abs() < 1e-15);
        assert!((m.cdf(0.0) + 0.1).abs() < 1e-15);
        assert!((m.cdf_open(0.0)).abs() < 1e-15);
        assert!((m.cdf(0.5) - 0.0).abs() < 1e-15);
        assert!((m.open_interval(0.0, 1.0) - 0.2).abs() < 1e-15);
        assert!((m.right_of(1.0)).abs() < 1e-15);
        let (p, n, a) = (m.positive_part(), m.negative_part(), m.total_variation_measure());
        assert!((p.total() - n.total() - m.total()).abs() < 1e-15);
        assert!((p.total() + n.total() - a.total()).abs() < 1e-15);
        assert!(SignedMeasure1D::new(vec![], vec![(0.0, 1.0, 1.0), (0.5, 2.0, 1.0)]).is_err());
    }

    #[test]
    fn half_plane_product_against_brute_force() {
        // cells refined into many atoms approximate the product
        let a = SignedMeasure1D::new(vec![(0.3, 0.5), (1.0, -0.2)], vec![(0.0, 1.0, 0.7), (1.5, 2.0, -1.0)]).unwrap();
        let b = SignedMeasure1D::new(vec![(0.5, 1.0)], vec![(0.2, 1.7, 0.4)]).unwrap();
        let exact = a.half_plane_product(&b);
        let disc = |m: &SignedMeasure1D, k: usize| -> Vec<(f64, f64)> {
            let mut out = m.atoms();
            for (lo, hi, d) in m.cells() {
                let h = (hi - lo) / k as f64;
                for j in 0..k {
                    out.push((lo + (j as f64 + 0.5) * h, d * h));
                }
            }
            out
        };
        let (da, db) = (disc(&a, 4000), disc(&b, 4000));
        let mut brute = 0.0;
        for (x, m) in &da {
            for (y, w) in &db {
                if x < y {
                    brute += m * w;
                }
            }
        }
        assert!((exact - brute).abs() < 1e-3, "{exact} vs {brute}");
        // a single constant density against itself: half the square
        let c = SignedMeasure1D::new(vec![], vec![(0.0, 2.0, 0.5)]).unwrap();
        assert!((c.half_plane_product(&c) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn burgers_step_measures() {
        let m = burgers();
        assert!(wave_measures(&m, &BVFunction::zero(1)).unwrap().mu[0].is_zero());
        let u = BVFunction::new(1, vec![ramp(0.0, 1.0, -0.1, 0.0)]).unwrap();
        let ws = wave_measures(&m, &u).unwrap();
        let atoms = ws.mu[0].atoms();
        assert_eq!(atoms.len(), 2);
        assert!((atoms[0].1 + 0.1).abs() < 1e-12 && atoms[0].0 == 0.0);
        assert!((atoms[1].1 - 0.1).abs() < 1e-12 && atoms[1].0 == 1.0);
        assert!((ws.interaction() - 0.01).abs() < 1e-12);
        let c = StabilityConstants::default();
        assert!((ws.upsilon(c.c0) - (0.2 + 4.0 * 0.01)).abs() < 1e-12);
    }

    #[test]
    fn burgers_ramp_density() {
        let m = burgers();
        let u = BVFunction::new(1, vec![ramp(0.0, 1.0, 0.0, 0.1)]).unwrap();
        let ws = wave_measures(&m, &u).unwrap();
        assert!((ws.mu[0].open_interval(0.0, 1.0) - 0.1).abs() < 1e-12);
        let cells = ws.mu[0].cells();
        assert_eq!(cells.len(), CELLS_PER_PIECE);
        assert!(cells.iter().all(|c| (c.2 - 0.1).abs() < 1e-12));
        // jump back to 0 at x = 1 from 0.1
        assert!((ws.mu[0].atoms()[0].1 + 0.1).abs() < 1e-12);
    }

    #[test]
    fn same_sign_atoms_do_not_interact() {
        let m = burgers();
        // 0 → 0.05 → 0.1 then a ramp down: only the final descent is negative
        let u = BVFunction::new(1, vec![ramp(0.0, 1.0, 0.05, 0.0), ramp(1.0, 2.0, 0.1, 0.0)]).unwrap();
        let ws = wave_measures(&m, &u).unwrap();
        let plus_only = ws.plus[0].half_plane_product(&ws.plus[0]);
        assert!(plus_only > 0.0);
        // the positive pair is absent from ρ: Q̂ only sees pairs with the final shock
        assert!((ws.interaction() - (0.05 + 0.05) * 0.1).abs() < 1e-12);
    }

    #[test]
    fn coincides_with_step_functionals() {
        let m = builtin(&ModelId::PSystem { gamma: 1.4 }).unwrap();
        let u = PiecewiseConstantFn::new(
            2,
            vec![0.0, 0.4, 1.0, 1.7],
            vec![state(&[0.02, -0.01]), state(&[-0.01, 0.015]), state(&[0.005, 0.0])],
        )
        .unwrap();
        let ws = wave_measures(&m, &BVFunction::from_pcf(&u)).unwrap();
        let g = glimm_values(&m, &u, 4.0).unwrap();
        assert!((ws.interaction() - g.q).abs() < 1e-12);
        assert!((ws.upsilon(4.0) - g.upsilon).abs() < 1e-12);
        let t = jump_strengths(&m, &u).unwrap();
        for j in &t.jumps {
            for i in 0..2 {
                let atom = ws.mu[i].atoms().into_iter().find(|a| a.0 == j.x).map_or(0.0, |a| a.1);
                assert!((atom - j.sigma[i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn a_hat_matches_step_weights() {
        let m = builtin(&ModelId::PSystem { gamma: 1.4 }).unwrap();
        let v =
            PiecewiseConstantFn::new(2, vec![0.0, 1.0, 2.0], vec![state(&[0.02, -0.01]), state(&[0.0, 0.02])]).unwrap();
        let vt = PiecewiseConstantFn::new(2, vec![0.5, 1.5], vec![state(&[-0.01, 0.01])]).unwrap();
        let (ws, wt) = (
            wave_measures(&m, &BVFunction::from_pcf(&v)).unwrap(),
            wave_measures(&m, &BVFunction::from_pcf(&vt)).unwrap(),
        );
        let (lv, lt) = (
            jump_strengths(&m, &v).unwrap().waves(),
            jump_strengths(&m, &vt).unwrap().waves(),
        );
        for x in [-1.0, 0.0, 0.5, 0.7, 1.0, 1.5, 3.0] {
            for i in 0..2 {
                for q in [-0.3, 0.3] {
                    let step = lv.side_sums(x).big_a(i, q) + lt.side_sums(x).big_a(i, -q);
                    let hat = a_hat(&ws, &wt, i, x, q < 0.0);
                    assert!((step - hat).abs() < 1e-12, "x={x} i={i} q={q}");
                }
            }
        }
        let lin = builtin(&ModelId::Linear {
            matrix: vec![vec![-1.0, 0.0], vec![0.0, 1.0]],
        })
        .unwrap();
        let wl = wave_measures(&lin, &BVFunction::from_pcf(&v)).unwrap();
        assert_eq!(a_hat(&wl, &wl, 0, 0.5, true), a_hat(&wl, &wl, 0, 0.5, false));
    }

    #[test]
    fn xi_hat_on_steps_equals_phi() {
        let m = builtin(&ModelId::PSystem { gamma: 1.4 }).unwrap();
        let c = StabilityConstants::default();
        let v =
            PiecewiseConstantFn::new(2, vec![0.0, 1.0, 2.0], vec![state(&[0.02, -0.01]), state(&[0.0, 0.02])]).unwrap();
        let vt = PiecewiseConstantFn::new(2, vec![0.5, 1.5], vec![state(&[-0.01, 0.01])]).unwrap();
        let phi = stability_phi(&m, &v, &vt, &c).unwrap();
        let xi = xi_hat(&m, &BVFunction::from_pcf(&v), &BVFunction::from_pcf(&vt), &c).unwrap();
        assert!((phi - xi).abs() <= 1e-8 * phi.max(1.0));
        assert_eq!(
            xi_hat(&m, &BVFunction::from_pcf(&v), &BVFunction::from_pcf(&v), &c).unwrap(),
            0.0
        );
    }

    #[test]
    fn xi_hat_burgers_ramp() {
        let m = burgers();
        let c = StabilityConstants {
            kappa2: 1.0,
            ..Default::default()
        };
        let u = BVFunction::zero(1);
        let ut = BVFunction::new(1, vec![ramp(0.0, 1.0, 0.0, -0.1)]).unwrap();
        let e = xi_hat_detailed(&m, &u, &ut, &c).unwrap();
        assert!((e.q_hat_tilde - 0.015).abs() < 1e-12);
        // dense midpoint-rule oracle built directly from the definitions
        let cells = 100_000;
        let mut oracle = 0.0;
        for k in 0..cells {
            let x = (k as f64 + 0.5) / cells as f64;
            let q = -0.1 * x;
            let a = 0.1 * (1.0 - x) + 0.1;
            oracle += q.abs() * (1.0 + a + 0.015) / cells as f64;
        }
        assert!((e.xi_hat - oracle).abs() < 1e-6);
        assert!((e.xi_hat - 0.1 * (1.215 / 2.0 - 0.1 / 3.0)).abs() < 1e-10);
    }

    #[test]
    fn approx_sequence_basics() {
        assert!(approx_sequence(&BVFunction::zero(1), 10).unwrap().is_zero());
        let step = PiecewiseConstantFn::scalar(vec![0.0, 1.0], vec![-0.1]).unwrap();
        let u = BVFunction::from_pcf(&step);
        let v = approx_sequence(&u, 50).unwrap();
        // same jump atoms, plateaus cut at the mesh midpoints
        let jumps: Vec<f64> = v.jumps().iter().map(|j| j.0).collect();
        assert_eq!(jumps, vec![0.0, 1.0]);
        assert!(u.l1_distance_pcf(&v) < 1e-12);
        let r = BVFunction::new(1, vec![ramp(0.0, 1.0, 0.0, 0.1)]).unwrap();
        let d10 = r.l1_distance_pcf(&approx_sequence(&r, 10).unwrap());
        let d40 = r.l1_distance_pcf(&approx_sequence(&r, 40).unwrap());
        assert!(d40 < d10 / 3.0, "{d10} {d40}");
    }

    #[test]
    fn gap_bound_scalar_and_constant() {
        let m = burgers();
        let u = BVFunction::new(1, vec![ramp(0.0, 1.0, 0.02, 0.05), ramp(1.0, 2.0, -0.03, 0.02)]).unwrap();
        let g = gap_bound(&m, &u, 0.1, 1.9).unwrap();
        assert!(g.lhs < 1e-14, "{}", g.lhs);
        assert!(g.rhs > 0.0);
        let g0 = gap_bound(&m, &BVFunction::zero(1), 0.0, 1.0).unwrap();
        assert_eq!((g0.lhs, g0.rhs), (0.0, 0.0));
    }

    #[test]
    fn json_schema() {
        let u: BVFunction = serde_json::from_str(r#"{"pieces":[{"a":0,"b":1,"p":[0.0],"slope":[-0.1]}]}"#).unwrap();
        assert_eq!(u.pieces().len(), 1);
        let back: BVFunction = serde_json::from_str(&serde_json::to_string(&u).unwrap()).unwrap();
        assert_eq!(back, u);
        assert!(serde_json::from_str::<BVFunction>(r#"{"pieces":[{"a":1,"b":0,"p":[0.0],"slope":[0.0]}]}"#).is_err());
    }
}
