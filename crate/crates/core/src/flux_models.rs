//! Conservation-law systems `u_t + f(u)_x = 0`: flux, eigenstructure,
//! field classification and the normalization of the right eigenvectors.
//!
//! Genuinely nonlinear right eigenvectors are scaled so that
//! `∇λ_i · r_i = k_i`; linearly degenerate ones have unit length. Left
//! eigenvectors are always dual to the right ones, `l_i · r_j = δ_ij`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{halton_ball, State};

/// Eigenvalues closer than this are treated as coinciding.
pub const HYPERBOLICITY_GAP: f64 = 1e-12;
pub const DEFAULT_DOMAIN_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    #[serde(rename = "GNL")]
    GenuinelyNonlinear,
    #[serde(rename = "LD")]
    LinearlyDegenerate,
}

impl FieldKind {
    pub fn is_gnl(self) -> bool {
        matches!(self, FieldKind::GenuinelyNonlinear)
    }
}

/// The raw system: flux, Jacobian and an eigen decomposition with arbitrary
/// eigenvector scaling. Normalization is done by [`FluxModel`].
pub trait FluxSystem: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn flux(&self, u: &State) -> State;

    fn jacobian(&self, u: &State) -> DMatrix<f64>;

    /// Ascending eigenvalues and right eigenvectors (as columns).
    fn eigen_raw(&self, u: &State) -> Result<(Vec<f64>, DMatrix<f64>)> {
        general_eigen(&self.jacobian(u), u)
    }

    /// Analytic `∇λ_i(u)`, if the system knows it.
    fn lambda_gradient(&self, _i: usize, _u: &State) -> Option<State> {
        None
    }
}

/// Eigen decomposition of a general real matrix through a real Schur
/// factorization; fails if any eigenvalue is complex or two coincide.
pub fn general_eigen(a: &DMatrix<f64>, at: &State) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let schur = nalgebra::Schur::try_new(a.clone(), 1e-12, 10_000).ok_or_else(|| Error::NonHyperbolic {
        state: at.iter().copied().collect(),
        gap: f64::NAN,
    })?;
    let eig = schur.eigenvalues().ok_or_else(|| Error::NonHyperbolic {
        state: at.iter().copied().collect(),
        gap: 0.0,
    })?;
    let mut lambdas: Vec<f64> = eig.iter().copied().collect();
    lambdas.sort_by(|x, y| x.total_cmp(y));
    check_gaps(&lambdas, at)?;
    let mut right = DMatrix::zeros(n, n);
    for (k, &lam) in lambdas.iter().enumerate() {
        let shifted = a - DMatrix::identity(n, n) * lam;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty");
        let mut vec: DVector<f64> = v_t.row(imin).transpose();
        let big = vec
            .iter()
            .copied()
            .max_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap_or(1.0);
        if big < 0.0 {
            vec = -vec;
        }
        right.set_column(k, &vec);
    }
    Ok((lambdas, right))
}

fn check_gaps(lambdas: &[f64], at: &State) -> Result<()> {
    for w in lambdas.windows(2) {
        let gap = w[1] - w[0];
        if !(gap > HYPERBOLICITY_GAP) {
            return Err(Error::NonHyperbolic {
                state: at.iter().copied().collect(),
                gap,
            });
        }
    }
    Ok(())
}

/// Inviscid Burgers, `f(u) = u²/2`.
#[derive(Debug, Clone, Copy)]
pub struct Burgers;

impl FluxSystem for Burgers {
    fn dim(&self) -> usize {
        1
    }
    fn flux(&self, u: &State) -> State {
        State::from_element(1, 0.5 * u[0] * u[0])
    }
    fn jacobian(&self, u: &State) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, u[0])
    }
    fn eigen_raw(&self, u: &State) -> Result<(Vec<f64>, DMatrix<f64>)> {
        Ok((vec![u[0]], DMatrix::from_element(1, 1, 1.0)))
    }
    fn lambda_gradient(&self, _i: usize, _u: &State) -> Option<State> {
        Some(State::from_element(1, 1.0))
    }
}

/// The p-system `v_t - u_x = 0, u_t + p(v)_x = 0` with `p(v) = v^{-γ}`.
///
/// States are perturbations `(v - 1, u)` of the rest state `(1, 0)`, so the
/// origin of the state space is an admissible far-field value.
#[derive(Debug, Clone, Copy)]
pub struct PSystem {
    pub gamma: f64,
}

impl PSystem {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::BadParameter(format!("p-system needs gamma > 1, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    fn specific_volume(&self, u: &State) -> Result<f64> {
        let v = 1.0 + u[0];
        if v <= 0.0 {
            return Err(Error::OutOfDomain {
                state: u.iter().copied().collect(),
                radius: 1.0,
            });
        }
        Ok(v)
    }

    pub fn pressure(&self, v: f64) -> f64 {
        v.powf(-self.gamma)
    }

    /// Sound speed `c(v) = sqrt(-p'(v))`.
    pub fn sound_speed(&self, v: f64) -> f64 {
        (self.gamma * v.powf(-self.gamma - 1.0)).sqrt()
    }
}

impl FluxSystem for PSystem {
    fn dim(&self) -> usize {
        2
    }
    fn flux(&self, u: &State) -> State {
        let v = 1.0 + u[0];
        State::from_vec(vec![-u[1], self.pressure(v)])
    }
    fn jacobian(&self, u: &State) -> DMatrix<f64> {
        let v = 1.0 + u[0];
        let dp = -self.gamma * v.powf(-self.gamma - 1.0);
        DMatrix::from_row_slice(2, 2, &[0.0, -1.0, dp, 0.0])
    }
    fn eigen_raw(&self, u: &State) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let c = self.sound_speed(self.specific_volume(u)?);
        // columns (1, c) and (-1, c): both already oriented along increasing λ
        Ok((vec![-c, c], DMatrix::from_row_slice(2, 2, &[1.0, -1.0, c, c])))
    }
    fn lambda_gradient(&self, i: usize, u: &State) -> Option<State> {
        let v = self.specific_volume(u).ok()?;
        let dc = -0.5 * (self.gamma + 1.0) * self.sound_speed(v) / v;
        let dl = if i == 0 { -dc } else { dc };
        Some(State::from_vec(vec![dl, 0.0]))
    }
}

/// Linear system `f(u) = A u`; every field is linearly degenerate.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    matrix: DMatrix<f64>,
    lambdas: Vec<f64>,
    right: DMatrix<f64>,
}

impl LinearSystem {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::BadParameter(format!(
                "linear system needs a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::BadParameter("matrix has non-finite entries".into()));
        }
        let origin = State::zeros(matrix.nrows());
        let (lambdas, right) = general_eigen(&matrix, &origin)
            .map_err(|e| Error::BadParameter(format!("matrix must have distinct real eigenvalues: {e}")))?;
        Ok(Self { matrix, lambdas, right })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl FluxSystem for LinearSystem {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn flux(&self, u: &State) -> State {
        &self.matrix * u
    }
    fn jacobian(&self, _u: &State) -> DMatrix<f64> {
        self.matrix.clone()
    }
    fn eigen_raw(&self, _u: &State) -> Result<(Vec<f64>, DMatrix<f64>)> {
        Ok((self.lambdas.clone(), self.right.clone()))
    }
    fn lambda_gradient(&self, _i: usize, _u: &State) -> Option<State> {
        Some(State::zeros(self.dim()))
    }
}

/// Normalized eigenstructure at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenData {
    pub lambdas: Vec<f64>,
    pub right_vecs: Vec<State>,
    pub left_vecs: Vec<State>,
}

impl EigenData {
    /// `max |l_i · r_j - δ_ij|`.
    pub fn duality_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, l) in self.left_vecs.iter().enumerate() {
            for (j, r) in self.right_vecs.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((l.dot(r) - target).abs());
            }
        }
        worst
    }
}

/// Built-in model selection, as it appears in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum ModelId {
    Burgers,
    PSystem { gamma: f64 },
    Linear { matrix: Vec<Vec<f64>> },
}

/// A strictly hyperbolic system together with its field classification,
/// normalization constants `k_j` and the radius of the state domain `Ω`
/// (a closed ball around the origin).
#[derive(Clone)]
pub struct FluxModel {
    name: String,
    system: Arc<dyn FluxSystem>,
    field_kind: Vec<FieldKind>,
    k: Vec<f64>,
    domain_radius: f64,
}

impl fmt::Debug for FluxModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FluxModel")
            .field("name", &self.name)
            .field("field_kind", &self.field_kind)
            .field("k", &self.k)
            .field("domain_radius", &self.domain_radius)
            .finish()
    }
}

impl FluxModel {
    pub fn new(name: impl Into<String>, system: Arc<dyn FluxSystem>, field_kind: Vec<FieldKind>) -> Result<Self> {
        let n = system.dim();
        if field_kind.len() != n {
            return Err(Error::BadParameter(format!(
                "{} field kinds given for a system of dimension {n}",
                field_kind.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            system,
            field_kind,
            k: vec![1.0; n],
            domain_radius: DEFAULT_DOMAIN_RADIUS,
        })
    }

    pub fn with_k(mut self, k: Vec<f64>) -> Result<Self> {
        if k.len() != self.dim() || k.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::BadParameter(format!(
                "k must hold {} positive numbers, got {k:?}",
                self.dim()
            )));
        }
        self.k = k;
        Ok(self)
    }

    pub fn with_domain_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::BadParameter(format!(
                "domain radius must be positive, got {radius}"
            )));
        }
        self.domain_radius = radius;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn field_kind(&self) -> &[FieldKind] {
        &self.field_kind
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    pub fn system(&self) -> &dyn FluxSystem {
        self.system.as_ref()
    }

    pub fn flux(&self, u: &State) -> State {
        self.system.flux(u)
    }

    pub fn jacobian(&self, u: &State) -> DMatrix<f64> {
        self.system.jacobian(u)
    }

    pub fn in_domain(&self, u: &State) -> bool {
        u.norm() <= self.domain_radius * (1.0 + 1e-12)
    }

    pub fn check_domain(&self, u: &State) -> Result<()> {
        if self.in_domain(u) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                state: u.iter().copied().collect(),
                radius: self.domain_radius,
            })
        }
    }

    /// Raw ascending eigenvalues, without any normalization work.
    pub fn lambdas(&self, u: &State) -> Result<Vec<f64>> {
        let (lambdas, _) = self.system.eigen_raw(u)?;
        check_gaps(&lambdas, u)?;
        Ok(lambdas)
    }

    pub fn lambda(&self, i: usize, u: &State) -> Result<f64> {
        Ok(self.lambdas(u)?[i])
    }

    /// `∇λ_i(u)`: analytic when the system provides it, otherwise central
    /// differences with step `1e-5·max(1, |u|)`.
    pub fn lambda_gradient(&self, i: usize, u: &State) -> Result<State> {
        match self.system.lambda_gradient(i, u) {
            Some(g) => Ok(g),
            None => self.lambda_gradient_fd(i, u),
        }
    }

    pub fn lambda_gradient_fd(&self, i: usize, u: &State) -> Result<State> {
        let h = 1e-5 * u.norm().max(1.0);
        let mut g = State::zeros(self.dim());
        for k in 0..self.dim() {
            let mut up = u.clone();
            let mut um = u.clone();
            up[k] += h;
            um[k] -= h;
            g[k] = (self.lambda(i, &up)? - self.lambda(i, &um)?) / (2.0 * h);
        }
        Ok(g)
    }

    /// Normalized eigenstructure at `u`; errors if `u` leaves `Ω`.
    pub fn eigen_at(&self, u: &State) -> Result<EigenData> {
        self.check_domain(u)?;
        self.eigen_unchecked(u)
    }

    /// As [`FluxModel::eigen_at`] without the domain check; used inside
    /// iterations that may step marginally outside `Ω`.
    pub fn eigen_unchecked(&self, u: &State) -> Result<EigenData> {
        let (lambdas, raw) = self.system.eigen_raw(u)?;
        check_gaps(&lambdas, u)?;
        let n = self.dim();
        let mut right = DMatrix::zeros(n, n);
        for i in 0..n {
            let col = raw.column(i).into_owned();
            right.set_column(i, &self.normalize_right(i, u, col)?);
        }
        let left = right.clone().try_inverse().ok_or_else(|| Error::NonHyperbolic {
            state: u.iter().copied().collect(),
            gap: 0.0,
        })?;
        Ok(EigenData {
            lambdas,
            right_vecs: (0..n).map(|i| right.column(i).into_owned()).collect(),
            left_vecs: (0..n).map(|i| left.row(i).transpose()).collect(),
        })
    }

    /// The normalized `r_i(u)` alone.
    pub fn right_vector(&self, i: usize, u: &State) -> Result<State> {
        let (lambdas, raw) = self.system.eigen_raw(u)?;
        check_gaps(&lambdas, u)?;
        self.normalize_right(i, u, raw.column(i).into_owned())
    }

    fn normalize_right(&self, i: usize, u: &State, raw: State) -> Result<State> {
        match self.field_kind[i] {
            FieldKind::LinearlyDegenerate => {
                let norm = raw.norm();
                Ok(raw / norm)
            }
            FieldKind::GenuinelyNonlinear => {
                let g = self.lambda_gradient(i, u)?.dot(&raw);
                if !(g.abs() > 1e-12) {
                    return Err(Error::BadParameter(format!(
                        "field {} is declared genuinely nonlinear but ∇λ·r = {g:e} at {:?}",
                        i + 1,
                        u.as_slice()
                    )));
                }
                Ok(raw * (self.k[i] / g))
            }
        }
    }

    /// Largest `|λ_i|` over a deterministic sample of `Ω`.
    pub fn max_characteristic_speed(&self, samples: usize) -> Result<f64> {
        let mut best = 0.0_f64;
        for u in halton_ball(&State::zeros(self.dim()), self.domain_radius, samples.max(1)) {
            for l in self.lambdas(&u)? {
                best = best.max(l.abs());
            }
        }
        Ok(best)
    }
}

/// Construct one of the built-in models with default `k_j = 1` and
/// domain radius 0.5.
pub fn builtin(id: &ModelId) -> Result<FluxModel> {
    match id {
        ModelId::Burgers => FluxModel::new("burgers", Arc::new(Burgers), vec![FieldKind::GenuinelyNonlinear]),
        ModelId::PSystem { gamma } => FluxModel::new(
            format!("p_system(gamma={gamma})"),
            Arc::new(PSystem::new(*gamma)?),
            vec![FieldKind::GenuinelyNonlinear; 2],
        ),
        ModelId::Linear { matrix } => {
            let n = matrix.len();
            if n == 0 || matrix.iter().any(|row| row.len() != n) {
                return Err(Error::BadParameter("linear model needs a square matrix".into()));
            }
            let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
            let sys = LinearSystem::new(DMatrix::from_row_slice(n, n, &flat))?;
            FluxModel::new("linear", Arc::new(sys), vec![FieldKind::LinearlyDegenerate; n])
        }
    }
}

/// Outcome of [`check_hyperbolicity`]. Failures are reported, not raised.
#[derive(Debug, Clone, Serialize)]
pub struct HyperbolicityReport {
    pub samples: usize,
    /// `min (λ_{i+1} - λ_i)` over the sample; `+∞` for scalar models.
    pub min_gap: f64,
    pub max_duality_error: f64,
    /// `max |∇λ_i·r_i - k_i|` over GNL fields, `∇λ_i` by central differences.
    pub max_gnl_error: f64,
    pub failures: Vec<String>,
}

impl HyperbolicityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.min_gap > 0.0
    }
}

pub fn check_hyperbolicity(model: &FluxModel, samples: usize) -> HyperbolicityReport {
    let samples = samples.max(1);
    let mut report = HyperbolicityReport {
        samples,
        min_gap: f64::INFINITY,
        max_duality_error: 0.0,
        max_gnl_error: 0.0,
        failures: Vec::new(),
    };
    for u in halton_ball(&State::zeros(model.dim()), model.domain_radius(), samples) {
        let eig = match model.eigen_at(&u) {
            Ok(e) => e,
            Err(e) => {
                report.min_gap = report.min_gap.min(0.0);
                report.failures.push(e.to_string());
                continue;
            }
        };
        for w in eig.lambdas.windows(2) {
            report.min_gap = report.min_gap.min(w[1] - w[0]);
        }
        report.max_duality_error = report.max_duality_error.max(eig.duality_error());
        for i in 0..model.dim() {
            if !model.field_kind()[i].is_gnl() {
                continue;
            }
            match model.lambda_gradient_fd(i, &u) {
                Ok(g) => {
                    let err = (g.dot(&eig.right_vecs[i]) - model.k()[i]).abs();
                    report.max_gnl_error = report.max_gnl_error.max(err);
                }
                Err(e) => report.failures.push(e.to_string()),
            }
        }
    }
    if report.max_duality_error > 1e-9 {
        report
            .failures
            .push(format!("duality error {:e} exceeds 1e-9", report.max_duality_error));
    }
    if report.max_gnl_error > 1e-8 {
        report.failures.push(format!(
            "GNL normalization error {:e} exceeds 1e-8",
            report.max_gnl_error
        ));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::state;

    fn p_system() -> FluxModel {
        builtin(&ModelId::PSystem { gamma: 1.4 }).unwrap()
    }

    #[test]
    fn burgers_eigenstructure() {
        let m = builtin(&ModelId::Burgers).unwrap();
        assert_eq!(m.dim(), 1);
        assert_eq!(m.field_kind(), &[FieldKind::GenuinelyNonlinear]);
        let e = m.eigen_at(&state(&[0.3])).unwrap();
        assert_eq!(e.lambdas, vec![0.3]);
        assert_eq!(e.right_vecs[0][0], 1.0);
        assert_eq!(e.left_vecs[0][0], 1.0);
    }

    #[test]
    fn p_system_speeds_at_rest() {
        let e = p_system().eigen_at(&state(&[0.0, 0.0])).unwrap();
        let c = 1.4_f64.sqrt();
        assert!((e.lambdas[0] + c).abs() < 1e-15);
        assert!((e.lambdas[1] - c).abs() < 1e-15);
        assert_eq!(p_system().field_kind(), &[FieldKind::GenuinelyNonlinear; 2]);
    }

    #[test]
    fn duality_is_identity_at_origin() {
        for m in [
            builtin(&ModelId::Burgers).unwrap(),
            p_system(),
            builtin(&ModelId::Linear {
                matrix: vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.5], vec![0.0, 0.5, 1.0]],
            })
            .unwrap(),
        ] {
            let e = m.eigen_at(&State::zeros(m.dim())).unwrap();
            assert!(e.duality_error() < 1e-10, "{}: {}", m.name(), e.duality_error());
        }
    }

    #[test]
    fn linear_model_is_linearly_degenerate() {
        let m = builtin(&ModelId::Linear {
            matrix: vec![vec![-1.0, 0.0], vec![0.0, 1.0]],
        })
        .unwrap();
        assert_eq!(m.field_kind(), &[FieldKind::LinearlyDegenerate; 2]);
        let rep = check_hyperbolicity(&m, 50);
        assert_eq!(rep.min_gap, 2.0);
        assert!(rep.passed());
        let e = m.eigen_at(&state(&[0.1, 0.2])).unwrap();
        assert!((e.right_vecs[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gnl_normalization_matches_finite_differences() {
        let m = p_system().with_k(vec![1.0, 2.5]).unwrap();
        let rep = check_hyperbolicity(&m, 400);
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!(rep.max_gnl_error <= 1e-8);
    }

    #[test]
    fn scalar_min_gap_is_infinite() {
        let rep = check_hyperbolicity(&builtin(&ModelId::Burgers).unwrap(), 10);
        assert_eq!(rep.min_gap, f64::INFINITY);
    }

    #[test]
    fn p_system_small_ball_gap_is_positive() {
        let m = p_system().with_domain_radius(0.2).unwrap();
        let rep = check_hyperbolicity(&m, 500);
        // smallest sound speed on the ball is at v = 1.2
        let c_min = PSystem { gamma: 1.4 }.sound_speed(1.2);
        assert!(rep.min_gap >= 2.0 * c_min - 1e-12);
        assert!(rep.min_gap > 0.0);
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            builtin(&ModelId::PSystem { gamma: 1.0 }),
            Err(Error::BadParameter(_))
        ));
        assert!(matches!(
            builtin(&ModelId::Linear {
                matrix: vec![vec![0.0, -1.0], vec![1.0, 0.0]]
            }),
            Err(Error::BadParameter(_))
        ));
        assert!(matches!(
            builtin(&ModelId::Linear {
                matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]]
            }),
            Err(Error::BadParameter(_))
        ));
        let m = builtin(&ModelId::Burgers).unwrap();
        assert!(matches!(m.eigen_at(&state(&[0.7])), Err(Error::OutOfDomain { .. })));
    }
}
