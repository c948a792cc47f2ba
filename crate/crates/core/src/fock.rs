//! Truncated Fock space: quantum coordinates, canonical states, translations.
//!
//! Operators are `N x N` complex matrices in the number basis `|0>, ..., |N-1>`.
//! The deformation scale enters only through `theta = lambda_P^2`; the
//! annihilation operator acts as `a|n> = lambda_P sqrt(n) |n-1>` so that
//! `[a, a*] = theta` away from the truncation edge.
//!
//! Translations are expressed in position units: translating a state by `mu`
//! shifts the expectation of `a` by `mu / sqrt(2)`. With this scale the
//! coherent state of parameter `k` is the vacuum translated by
//! `sqrt(2) lambda_P k`.

use std::f64::consts::SQRT_2;
use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{MoyalError, Result};
use crate::linalg::{self, c, CMat};

pub const DEFAULT_LEAKAGE_BOUND: f64 = 1e-10;

/// Ambient configuration shared by every operator and state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockContext {
    trunc_dim: usize,
    theta: f64,
    tol: f64,
    edge_guard: usize,
    leakage_bound: f64,
}

/// Validated context with the default edge guard `max(2, N/8)`.
pub fn make_context(trunc_dim: usize, theta: f64, tol: f64) -> Result<FockContext> {
    FockContext::new(trunc_dim, theta, tol)
}

impl FockContext {
    pub fn new(trunc_dim: usize, theta: f64, tol: f64) -> Result<Self> {
        if trunc_dim < 8 {
            return Err(MoyalError::InvalidContext(format!("trunc_dim {trunc_dim} < 8")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(MoyalError::InvalidContext(format!("theta must be positive, got {theta}")));
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(MoyalError::InvalidContext(format!("tol must be positive, got {tol}")));
        }
        let ctx = FockContext {
            trunc_dim,
            theta,
            tol,
            edge_guard: (trunc_dim / 8).max(2),
            leakage_bound: DEFAULT_LEAKAGE_BOUND,
        };
        ctx.check_guard()?;
        Ok(ctx)
    }

    pub fn with_edge_guard(mut self, edge_guard: usize) -> Result<Self> {
        self.edge_guard = edge_guard;
        self.check_guard()?;
        Ok(self)
    }

    pub fn with_leakage_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound > 0.0 && bound < 1.0) {
            return Err(MoyalError::InvalidContext(format!("leakage bound {bound} outside (0, 1)")));
        }
        self.leakage_bound = bound;
        Ok(self)
    }

    fn check_guard(&self) -> Result<()> {
        if self.edge_guard < 2 || 2 * self.edge_guard >= self.trunc_dim {
            return Err(MoyalError::InvalidContext(format!(
                "edge_guard {} must satisfy 2 <= g < N/2 (N = {})",
                self.edge_guard, self.trunc_dim
            )));
        }
        Ok(())
    }

    /// Same deformation and tolerances at half the truncation (for
    /// convergence-in-N checks). The edge guard follows the default rule.
    pub fn halved(&self) -> Result<Self> {
        FockContext::new(self.trunc_dim / 2, self.theta, self.tol)?.with_leakage_bound(self.leakage_bound)
    }

    pub fn with_trunc_dim(&self, trunc_dim: usize) -> Result<Self> {
        FockContext::new(trunc_dim, self.theta, self.tol)?.with_leakage_bound(self.leakage_bound)
    }

    pub fn trunc_dim(&self) -> usize {
        self.trunc_dim
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lambda_p(&self) -> f64 {
        self.theta.sqrt()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn edge_guard(&self) -> usize {
        self.edge_guard
    }

    pub fn leakage_bound(&self) -> f64 {
        self.leakage_bound
    }

    /// Number of levels `0..N-g` on which truncation artifacts are absent.
    pub fn interior(&self) -> usize {
        self.trunc_dim - self.edge_guard
    }

    /// Oscillator level energy `theta (m + 1/2)`.
    pub fn energy(&self, m: usize) -> f64 {
        self.theta * (m as f64 + 0.5)
    }

    pub(crate) fn check_index(&self, m: usize) -> Result<()> {
        if m >= self.interior() {
            return Err(MoyalError::OutOfRange { index: m, limit: self.interior() });
        }
        Ok(())
    }
}

/// A truncated operator `pi_S(f)` in the number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    ctx: FockContext,
    mat: CMat,
}

impl Operator {
    pub fn new(ctx: FockContext, mat: CMat) -> Result<Self> {
        let n = ctx.trunc_dim;
        if mat.nrows() != n || mat.ncols() != n {
            return Err(MoyalError::InvalidArgument(format!(
                "operator must be {n}x{n}, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MoyalError::InvalidArgument("operator has non-finite entries".into()));
        }
        Ok(Operator { ctx, mat })
    }

    pub(crate) fn from_parts(ctx: FockContext, mat: CMat) -> Self {
        Operator { ctx, mat }
    }

    pub fn identity(ctx: FockContext) -> Self {
        Operator { ctx, mat: CMat::identity(ctx.trunc_dim, ctx.trunc_dim) }
    }

    /// `|m><n|`.
    pub fn matrix_unit(ctx: FockContext, m: usize, n: usize) -> Self {
        let mut mat = CMat::zeros(ctx.trunc_dim, ctx.trunc_dim);
        mat[(m, n)] = c(1.0);
        Operator { ctx, mat }
    }

    /// The vacuum projector `e_0`.
    pub fn vacuum_projector(ctx: FockContext) -> Self {
        Self::matrix_unit(ctx, 0, 0)
    }

    /// Diagonal operator with the given real entries (padded with the last value).
    pub fn diagonal(ctx: FockContext, values: &[f64]) -> Self {
        let n = ctx.trunc_dim;
        let last = values.last().copied().unwrap_or(0.0);
        let mat = CMat::from_fn(n, n, |i, j| if i == j { c(values.get(i).copied().unwrap_or(last)) } else { c(0.0) });
        Operator { ctx, mat }
    }

    pub fn ctx(&self) -> &FockContext {
        &self.ctx
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Operator { ctx: self.ctx, mat: self.mat.adjoint() }
    }

    pub fn hermitian_deviation(&self) -> f64 {
        linalg::hermitian_deviation(&self.mat)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= self.ctx.tol
    }

    /// Restriction to the interior block `0..N-g`.
    pub fn interior_block(&self) -> CMat {
        linalg::top_left(&self.mat, self.ctx.interior())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Operator { ctx: self.ctx, mat: &self.mat * factor }
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        same_ctx(&self.ctx, &other.ctx)?;
        Ok(Operator { ctx: self.ctx, mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        same_ctx(&self.ctx, &other.ctx)?;
        Ok(Operator { ctx: self.ctx, mat: &self.mat - &other.mat })
    }

    pub fn mul(&self, other: &Operator) -> Result<Self> {
        same_ctx(&self.ctx, &other.ctx)?;
        Ok(Operator { ctx: self.ctx, mat: &self.mat * &other.mat })
    }

    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        same_ctx(&self.ctx, &other.ctx)?;
        Ok(Operator { ctx: self.ctx, mat: linalg::commutator(&self.mat, &other.mat) })
    }
}

pub(crate) fn same_ctx(a: &FockContext, b: &FockContext) -> Result<()> {
    if a != b {
        return Err(MoyalError::ContextMismatch);
    }
    Ok(())
}

/// `a|n> = lambda_P sqrt(n) |n-1>`.
pub fn annihilation(ctx: FockContext) -> Operator {
    Operator { ctx, mat: annihilation_matrix(ctx.trunc_dim, ctx.lambda_p()) }
}

pub fn creation(ctx: FockContext) -> Operator {
    annihilation(ctx).adjoint()
}

pub(crate) fn annihilation_matrix(n: usize, lambda_p: f64) -> CMat {
    CMat::from_fn(n, n, |i, j| if j == i + 1 { c(lambda_p * (j as f64).sqrt()) } else { c(0.0) })
}

/// Quadratures `q1 = (a + a*)/sqrt(2)`, `q2 = (a - a*)/(i sqrt(2))`.
pub fn quadratures(ctx: FockContext) -> (Operator, Operator) {
    let a = annihilation(ctx).mat;
    let ad = a.adjoint();
    let q1 = (&a + &ad) / c(SQRT_2);
    let q2 = (&a - &ad) / Complex64::new(0.0, SQRT_2);
    (Operator { ctx, mat: q1 }, Operator { ctx, mat: q2 })
}

/// `H = (q1^2 + q2^2)/2`, assembled as `a* a + theta/2`; exactly diagonal.
pub fn hamiltonian(ctx: FockContext) -> Operator {
    let n = ctx.trunc_dim;
    let mat = CMat::from_fn(n, n, |i, j| if i == j { c(ctx.energy(i)) } else { c(0.0) });
    Operator { ctx, mat }
}

/// How a state was built. Carries enough information to rebuild the state
/// on another truncation.
#[derive(Debug, Clone, PartialEq)]
pub enum StateTag {
    Eigen(usize),
    Coherent(Complex64),
    Translated { base: Box<StateTag>, kappa: Complex64 },
    Superposition { indices: Vec<usize>, coeffs: Vec<Complex64> },
    Mixed { weights: Vec<f64>, tags: Vec<StateTag> },
}

impl StateTag {
    pub fn is_pure(&self) -> bool {
        match self {
            StateTag::Eigen(_) | StateTag::Coherent(_) | StateTag::Superposition { .. } => true,
            StateTag::Translated { base, .. } => base.is_pure(),
            StateTag::Mixed { .. } => false,
        }
    }

    /// `(m, mu)` when the state is the eigenstate `omega_m` translated by the
    /// position vector `mu`, i.e. a member of the family `C(omega_m)`.
    pub fn orbit(&self, lambda_p: f64) -> Option<(usize, Complex64)> {
        match self {
            StateTag::Eigen(m) => Some((*m, Complex64::new(0.0, 0.0))),
            StateTag::Coherent(k) => Some((0, k * (SQRT_2 * lambda_p))),
            StateTag::Translated { base, kappa } => base.orbit(lambda_p).map(|(m, mu)| (m, mu + kappa)),
            StateTag::Superposition { indices, coeffs } => {
                let nz: Vec<usize> =
                    indices.iter().zip(coeffs).filter(|(_, z)| z.norm() > 0.0).map(|(i, _)| *i).collect();
                if nz.len() == 1 {
                    Some((nz[0], Complex64::new(0.0, 0.0)))
                } else {
                    None
                }
            }
            StateTag::Mixed { .. } => None,
        }
    }
}

impl fmt::Display for StateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateTag::Eigen(m) => write!(f, "eigen:{m}"),
            StateTag::Coherent(k) => write!(f, "coherent:{}", fmt_complex(*k)),
            StateTag::Translated { base, kappa } => {
                write!(f, "translated:{base}:{}", fmt_complex(*kappa))
            }
            StateTag::Superposition { indices, coeffs } => {
                let idx: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
                let cs: Vec<String> = coeffs.iter().map(|z| fmt_complex(*z)).collect();
                write!(f, "super:{}:{}", idx.join(","), cs.join(","))
            }
            StateTag::Mixed { weights, tags } => {
                let parts: Vec<String> = weights.iter().zip(tags).map(|(w, t)| format!("{w}*{t}")).collect();
                write!(f, "mix:{}", parts.join(";"))
            }
        }
    }
}

/// `re+imi` / `re-imi`, the form accepted by the state grammar.
pub fn fmt_complex(z: Complex64) -> String {
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// A density matrix on the truncated space.
#[derive(Debug, Clone)]
pub struct QState {
    ctx: FockContext,
    rho: CMat,
    tag: StateTag,
}

impl QState {
    /// Wraps a density matrix after checking Hermiticity, trace, positivity,
    /// purity (for pure tags) and leakage.
    pub fn from_density(ctx: FockContext, rho: CMat, tag: StateTag) -> Result<Self> {
        let n = ctx.trunc_dim;
        if rho.nrows() != n || rho.ncols() != n {
            return Err(MoyalError::InvalidArgument(format!("density matrix must be {n}x{n}")));
        }
        let dev = linalg::hermitian_deviation(&rho);
        if dev > ctx.tol {
            return Err(MoyalError::NonHermitian(dev));
        }
        let tr = rho.trace();
        if (tr - c(1.0)).norm() > ctx.tol {
            return Err(MoyalError::InvalidArgument(format!("trace {tr} differs from 1")));
        }
        let (eigs, _) = linalg::hermitian_eigen(&rho);
        if eigs[0] < -ctx.tol {
            return Err(MoyalError::InvalidArgument(format!("negative eigenvalue {:.3e}", eigs[0])));
        }
        if tag.is_pure() {
            let dev = linalg::max_abs(&(&rho * &rho - &rho));
            if dev > 10.0 * ctx.tol {
                return Err(MoyalError::InvalidArgument(format!("pure state is not idempotent ({dev:.3e})")));
            }
        }
        let state = QState { ctx, rho, tag };
        state.check_leakage()?;
        Ok(state)
    }

    fn from_vector(ctx: FockContext, psi: &DVector<Complex64>, tag: StateTag) -> Result<Self> {
        let rho = psi * psi.adjoint();
        QState::from_density(ctx, rho, tag)
    }

    fn check_leakage(&self) -> Result<()> {
        let leak = self.leakage();
        if leak > self.ctx.leakage_bound {
            return Err(MoyalError::Leakage { leakage: leak, bound: self.ctx.leakage_bound });
        }
        Ok(())
    }

    pub fn ctx(&self) -> &FockContext {
        &self.ctx
    }

    pub fn rho(&self) -> &CMat {
        &self.rho
    }

    pub fn tag(&self) -> &StateTag {
        &self.tag
    }

    /// Mass on the top `edge_guard` levels.
    pub fn leakage(&self) -> f64 {
        let n = self.ctx.trunc_dim;
        (self.ctx.interior()..n).map(|i| self.rho[(i, i)].re.max(0.0)).sum()
    }

    /// Largest off-diagonal modulus of the density matrix.
    pub fn off_diagonal_mass(&self) -> f64 {
        let n = self.ctx.trunc_dim;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.rho[(i, j)].norm());
                }
            }
        }
        m
    }

    /// Number-basis populations.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.ctx.trunc_dim).map(|i| self.rho[(i, i)].re).collect()
    }

    /// Rebuilds the same construction on another context.
    pub fn rebuild(&self, ctx: FockContext) -> Result<QState> {
        from_tag(ctx, &self.tag)
    }
}

/// Builds a state from its construction descriptor.
pub fn from_tag(ctx: FockContext, tag: &StateTag) -> Result<QState> {
    match tag {
        StateTag::Eigen(m) => eigenstate(ctx, *m),
        StateTag::Coherent(k) => coherent_state(ctx, *k),
        StateTag::Translated { base, kappa } => displace(&from_tag(ctx, base)?, *kappa),
        StateTag::Superposition { indices, coeffs } => superposition_state(ctx, indices, coeffs),
        StateTag::Mixed { weights, tags } => {
            let states = tags.iter().map(|t| from_tag(ctx, t)).collect::<Result<Vec<_>>>()?;
            mixture(weights, &states)
        }
    }
}

/// `|m><m|`.
pub fn eigenstate(ctx: FockContext, m: usize) -> Result<QState> {
    ctx.check_index(m)?;
    let mut rho = CMat::zeros(ctx.trunc_dim, ctx.trunc_dim);
    rho[(m, m)] = c(1.0);
    Ok(QState { ctx, rho, tag: StateTag::Eigen(m) })
}

/// Coherent state with components `exp(-|k|^2/2) k^m / sqrt(m!)`, an
/// eigenvector of `a` with eigenvalue `lambda_P k`.
pub fn coherent_state(ctx: FockContext, kappa: Complex64) -> Result<QState> {
    let n = ctx.trunc_dim;
    let mut coeffs = DVector::<Complex64>::zeros(n);
    let mut cm = c((-kappa.norm_sqr() / 2.0).exp());
    let mut guarded = 0.0;
    let mut total = 0.0;
    let mut m = 0usize;
    // run the recursion past N so the mass lost to truncation counts as leakage
    loop {
        let p = cm.norm_sqr();
        if m < n {
            coeffs[m] = cm;
        }
        if m >= ctx.interior() {
            guarded += p;
        }
        total += p;
        m += 1;
        if m >= n && (p < 1e-300 || total >= 1.0 - 1e-17) {
            break;
        }
        if m > n + 100_000 {
            break;
        }
        cm = cm * kappa / (m as f64).sqrt();
    }
    if guarded > ctx.leakage_bound {
        return Err(MoyalError::Leakage { leakage: guarded, bound: ctx.leakage_bound });
    }
    let norm = coeffs.norm();
    QState::from_vector(ctx, &(coeffs / c(norm)), StateTag::Coherent(kappa))
}

/// Unitary translation by `mu` (position units): `exp((mu a* - conj(mu) a)/(sqrt(2) theta))`.
pub fn translation_unitary(ctx: FockContext, mu: Complex64) -> CMat {
    let a = annihilation_matrix(ctx.trunc_dim, ctx.lambda_p());
    let ad = a.adjoint();
    let gen = (&ad * mu - &a * mu.conj()) / c(SQRT_2 * ctx.theta);
    gen.exp()
}

/// Translated state `rho -> U rho U*`; the result shifts `<a>` by `mu/sqrt(2)`.
pub fn displace(state: &QState, mu: Complex64) -> Result<QState> {
    let ctx = state.ctx;
    let tag = StateTag::Translated { base: Box::new(state.tag.clone()), kappa: mu };
    if mu.norm() == 0.0 {
        return Ok(QState { ctx, rho: state.rho.clone(), tag });
    }
    let u = translation_unitary(ctx, mu);
    let mut rho = &u * &state.rho * u.adjoint();
    // restore exact Hermiticity lost to rounding
    rho = (&rho + rho.adjoint()) / c(2.0);
    QState::from_density(ctx, rho, tag)
}

/// Pure state built from the normalized vector `sum c_i |index_i>`.
pub fn superposition_state(ctx: FockContext, indices: &[usize], coeffs: &[Complex64]) -> Result<QState> {
    if indices.is_empty() || indices.len() != coeffs.len() {
        return Err(MoyalError::InvalidArgument(
            "indices and coefficients must be nonempty and of equal length".into(),
        ));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &i in indices {
        if !seen.insert(i) {
            return Err(MoyalError::RepeatedIndex(i));
        }
        ctx.check_index(i)?;
    }
    let mut psi = DVector::<Complex64>::zeros(ctx.trunc_dim);
    for (&i, &z) in indices.iter().zip(coeffs) {
        psi[i] = z;
    }
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(MoyalError::ZeroVector);
    }
    QState::from_vector(
        ctx,
        &(psi / c(norm)),
        StateTag::Superposition { indices: indices.to_vec(), coeffs: coeffs.to_vec() },
    )
}

/// Convex combination of states; weights are normalized.
pub fn mixture(weights: &[f64], states: &[QState]) -> Result<QState> {
    if weights.is_empty() || weights.len() != states.len() {
        return Err(MoyalError::InvalidArgument("weights and states must be nonempty and of equal length".into()));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(MoyalError::InvalidArgument("mixture weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(MoyalError::InvalidArgument("mixture weights sum to zero".into()));
    }
    let ctx = states[0].ctx;
    let mut rho = CMat::zeros(ctx.trunc_dim, ctx.trunc_dim);
    for (w, s) in weights.iter().zip(states) {
        same_ctx(&ctx, &s.ctx)?;
        rho += &s.rho * c(w / total);
    }
    let tag = StateTag::Mixed {
        weights: weights.iter().map(|w| w / total).collect(),
        tags: states.iter().map(|s| s.tag.clone()).collect(),
    };
    QState::from_density(ctx, rho, tag)
}

/// `Tr(rho A)`.
pub fn evaluate(state: &QState, op: &Operator) -> Result<Complex64> {
    same_ctx(&state.ctx, &op.ctx)?;
    Ok(linalg::trace_product(&state.rho, &op.mat))
}

/// `Delta q1 * Delta q2`, bounded below by `theta/2`.
pub fn uncertainty_product(state: &QState) -> f64 {
    let (q1, q2) = quadratures(state.ctx);
    let spread = |q: &Operator| {
        let mean = linalg::trace_product(&state.rho, &q.mat).re;
        let sq = linalg::trace_product(&state.rho, &(&q.mat * &q.mat)).re;
        (sq - mean * mean).max(0.0).sqrt()
    };
    spread(&q1) * spread(&q2)
}

/// `(1/2) || rho1 - rho2 ||_1`.
pub fn trace_distance(s1: &QState, s2: &QState) -> Result<f64> {
    same_ctx(&s1.ctx, &s2.ctx)?;
    Ok(0.5 * linalg::trace_norm_hermitian(&(&s1.rho - &s2.rho)))
}

/// Expectation of `a`.
pub fn mean_annihilation(state: &QState) -> Complex64 {
    linalg::trace_product(&state.rho, &annihilation_matrix(state.ctx.trunc_dim, state.ctx.lambda_p()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: usize) -> FockContext {
        make_context(n, 1.0, 1e-10).unwrap()
    }

    #[test]
    fn context_defaults_and_errors() {
        assert_eq!(ctx(64).edge_guard(), 8);
        assert_eq!(ctx(8).edge_guard(), 2);
        assert!(make_context(4, 1.0, 1e-10).is_err());
        assert!(make_context(16, 0.0, 1e-10).is_err());
        assert!(make_context(16, 1.0, 0.0).is_err());
        assert!(ctx(16).with_edge_guard(8).is_err());
        assert!(ctx(16).with_edge_guard(1).is_err());
    }

    #[test]
    fn annihilation_entries() {
        let a = annihilation(ctx(8));
        assert!((a.mat()[(0, 1)] - c(1.0)).norm() < 1e-15);
        let a4 = annihilation(make_context(8, 4.0, 1e-10).unwrap());
        assert!((a4.mat()[(1, 2)].re - 2.0 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn canonical_commutator_interior_and_corner() {
        let cx = ctx(8);
        let a = annihilation(cx);
        let comm = a.commutator(&a.adjoint()).unwrap();
        let k = cx.interior();
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((comm.mat()[(i, j)] - c(want)).norm() < 1e-14);
            }
        }
        assert!((comm.mat()[(7, 7)] - c(-7.0)).norm() < 1e-13);
    }

    #[test]
    fn quadrature_commutator_and_ground_variance() {
        let cx = ctx(16);
        let (q1, q2) = quadratures(cx);
        assert!(q1.is_hermitian() && q2.is_hermitian());
        let comm = q1.commutator(&q2).unwrap();
        for i in 0..cx.interior() {
            assert!((comm.mat()[(i, i)] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        }
        let q1sq = q1.mul(&q1).unwrap();
        assert!((q1sq.mat()[(0, 0)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_levels() {
        let h = hamiltonian(ctx(8));
        assert_eq!(h.mat()[(0, 0)].re, 0.5);
        assert_eq!(h.mat()[(2, 2)].re, 2.5);
        assert_eq!(h.mat()[(0, 1)], c(0.0));
        let h2 = hamiltonian(make_context(8, 2.0, 1e-10).unwrap());
        assert_eq!(h2.mat()[(3, 3)].re, 7.0);
    }

    #[test]
    fn eigenstate_range_and_energy() {
        let cx = ctx(16);
        assert!(eigenstate(cx, 15).is_err());
        let s = eigenstate(cx, 2).unwrap();
        assert_eq!(evaluate(&s, &hamiltonian(cx)).unwrap().re, 2.5);
        let s4 = eigenstate(cx, 4).unwrap();
        assert_eq!(evaluate(&s4, &hamiltonian(cx)).unwrap().re, 4.5);
        assert_eq!(evaluate(&s4, &Operator::identity(cx)).unwrap().re, 1.0);
    }

    #[test]
    fn coherent_components_and_leakage() {
        let cx = ctx(32);
        let s = coherent_state(cx, c(1.0)).unwrap();
        // rho_{11} = |c_1|^2 = e^{-1}
        assert!((s.rho()[(1, 1)].re - (-1.0f64).exp()).abs() < 1e-12);
        assert!((s.rho()[(0, 1)].re - (-1.0f64).exp()).abs() < 1e-12);
        let vac = coherent_state(cx, c(0.0)).unwrap();
        assert!(trace_distance(&vac, &eigenstate(cx, 0).unwrap()).unwrap() < 1e-15);
        assert!(matches!(coherent_state(ctx(16), c(10.0)), Err(MoyalError::Leakage { .. })));
    }

    #[test]
    fn coherent_is_eigenvector_of_a() {
        let cx = ctx(48);
        let k = Complex64::new(0.7, -0.4);
        let s = coherent_state(cx, k).unwrap();
        let got = evaluate(&s, &annihilation(cx)).unwrap();
        assert!((got - k * cx.lambda_p()).norm() < 1e-9);
    }

    #[test]
    fn vacuum_translation_is_coherent() {
        let cx = ctx(64);
        for k in [Complex64::new(1.0, 0.0), Complex64::new(-2.0, 1.5), Complex64::new(0.0, 3.0)] {
            let mu = k * (SQRT_2 * cx.lambda_p());
            let moved = displace(&eigenstate(cx, 0).unwrap(), mu).unwrap();
            let coh = coherent_state(cx, k).unwrap();
            assert!(trace_distance(&moved, &coh).unwrap() < 1e-8, "k = {k}");
        }
    }

    #[test]
    fn translation_shifts_a_on_the_interior() {
        let cx = ctx(64);
        let mu = Complex64::new(0.8, -0.3);
        let u = translation_unitary(cx, mu);
        let a = annihilation_matrix(64, 1.0);
        let shifted = u.adjoint() * &a * &u;
        let want = &a + CMat::identity(64, 64) * (mu / SQRT_2);
        let k = 24;
        let diff = linalg::max_abs(&(shifted - want).view((0, 0), (k, k)).into_owned());
        assert!(diff < 1e-10, "diff {diff}");
    }

    #[test]
    fn zero_translation_is_identity() {
        let cx = ctx(16);
        let s = superposition_state(cx, &[0, 3], &[c(1.0), Complex64::new(0.0, 1.0)]).unwrap();
        let t = displace(&s, c(0.0)).unwrap();
        assert_eq!(t.rho(), s.rho());
    }

    #[test]
    fn superposition_rules() {
        let cx = ctx(16);
        let s = superposition_state(cx, &[0, 2], &[c(1.0), c(1.0)]).unwrap();
        for (i, j) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
            assert!((s.rho()[(i, j)].re - 0.5).abs() < 1e-15);
        }
        let t = superposition_state(cx, &[0, 2, 4], &[c(1.0), c(1.0), c(1.0)]).unwrap();
        assert!((t.rho()[(2, 4)].re - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(superposition_state(cx, &[1, 1], &[c(1.0), c(1.0)]).unwrap_err(), MoyalError::RepeatedIndex(1));
        assert_eq!(superposition_state(cx, &[1, 2], &[c(0.0), c(0.0)]).unwrap_err(), MoyalError::ZeroVector);
    }

    #[test]
    fn uncertainty_examples() {
        let cx = ctx(48);
        assert!((uncertainty_product(&eigenstate(cx, 0).unwrap()) - 0.5).abs() < 1e-14);
        assert!((uncertainty_product(&eigenstate(cx, 3).unwrap()) - 3.5).abs() < 1e-13);
        let coh = coherent_state(cx, Complex64::new(1.2, 0.5)).unwrap();
        assert!((uncertainty_product(&coh) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn context_mismatch_is_reported() {
        let s = eigenstate(ctx(16), 0).unwrap();
        assert_eq!(evaluate(&s, &hamiltonian(ctx(24))).unwrap_err(), MoyalError::ContextMismatch);
    }

    #[test]
    fn tags_rebuild_on_smaller_truncation() {
        let cx = ctx(64);
        let s = displace(&eigenstate(cx, 1).unwrap(), Complex64::new(1.0, 0.5)).unwrap();
        let t = s.rebuild(cx.halved().unwrap()).unwrap();
        assert_eq!(t.ctx().trunc_dim(), 32);
        assert_eq!(s.tag().orbit(1.0), Some((1, Complex64::new(1.0, 0.5))));
    }
}
