//! Dirac calculus of the Moyal spectral triple and the spectral distance.
//!
//! In the number basis the two derivatives are scaled commutators,
//! `dz(F) = -[a*, F]/theta` and `dzbar(F) = [a, F]/theta`, normalized so that
//! `dz(a) = 1`. The commutator with the Dirac operator is the anti-diagonal
//! spinor block `-i sqrt2 (0, dzbar f; dz f, 0)`, whose norm is
//! `sqrt2 max(|dz f|, |dzbar f|)`.
//!
//! All seminorms are taken on the interior block (levels `0..N - edge_guard`)
//! so the truncation corner of `[a, a*]` never enters.

use std::f64::consts::SQRT_2;

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{MoyalError, Result};
use crate::fock::{self, same_ctx, FockContext, Operator, QState};
use crate::linalg::{self, c, CMat};

#[derive(Debug, Clone)]
pub struct DiracCalculus {
    ctx: FockContext,
    a: CMat,
    ad: CMat,
}

impl DiracCalculus {
    pub fn new(ctx: FockContext) -> Self {
        let a = fock::annihilation(ctx).into_mat();
        let ad = a.adjoint();
        DiracCalculus { ctx, a, ad }
    }

    pub fn ctx(&self) -> &FockContext {
        &self.ctx
    }

    /// `dz(F) = -[a*, F] / theta`.
    pub fn dz(&self, f: &Operator) -> Result<Operator> {
        same_ctx(&self.ctx, f.ctx())?;
        let m = linalg::commutator(&self.ad, f.mat()) * c(-1.0 / self.ctx.theta());
        Ok(Operator::from_parts(self.ctx, m))
    }

    /// `dzbar(F) = [a, F] / theta`.
    pub fn dzbar(&self, f: &Operator) -> Result<Operator> {
        same_ctx(&self.ctx, f.ctx())?;
        let m = linalg::commutator(&self.a, f.mat()) * c(1.0 / self.ctx.theta());
        Ok(Operator::from_parts(self.ctx, m))
    }

    fn interior(&self, m: &CMat) -> CMat {
        linalg::top_left(m, self.ctx.interior())
    }
}

/// `|| [D, f] ||` on the interior block.
pub fn lipschitz_seminorm(calc: &DiracCalculus, f: &Operator) -> Result<f64> {
    let dev = f.hermitian_deviation();
    if dev > calc.ctx.tol() * (1.0 + linalg::max_abs(f.mat())) {
        return Err(MoyalError::NonHermitian(dev));
    }
    let dz = calc.interior(calc.dz(f)?.mat());
    let dzbar = calc.interior(calc.dzbar(f)?.mat());
    Ok(SQRT_2 * linalg::op_norm(&dz).max(linalg::op_norm(&dzbar)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    DiagonalLP,
    ConvexSolver,
    Scaled,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed",
            Method::DiagonalLP => "lp",
            Method::ConvexSolver => "solver",
            Method::Scaled => "scaled",
        }
    }
}

/// The element attaining (or approaching) the supremum.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    Operator(Operator),
    /// `alpha_k - alpha_{k-1}` for `k = 1, 2, ...` of a diagonal element.
    Increments(Vec<f64>),
    /// one element per sheet of the doubled triple
    Pair(Operator, Operator),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub value: f64,
    pub method: Method,
    pub certificate: Option<Certificate>,
    /// achieved seminorm of the certificate
    pub feasibility: f64,
    /// `|value - reference|` when an independent value is known
    pub gap: Option<f64>,
    /// true when the certificate stands for a sequence that needs a decay
    /// factor at infinity; at finite `N` every element is bounded
    pub up_to_regularization: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormKind {
    /// a state against its translate by `kappa` (position units)
    Translation {
        kappa: Complex64,
    },
    Eigenstates {
        m: usize,
        n: usize,
    },
}

/// `(lambda_P/sqrt2) sum_{k=m+1}^{n} 1/sqrt(k)`.
pub fn eigenstate_distance(ctx: &FockContext, m: usize, n: usize) -> f64 {
    let (lo, hi) = (m.min(n), m.max(n));
    let s: f64 = ((lo + 1)..=hi).map(|k| 1.0 / (k as f64).sqrt()).sum();
    ctx.lambda_p() / SQRT_2 * s
}

pub fn distance_closed_form(calc: &DiracCalculus, kind: ClosedFormKind) -> Result<DistanceReport> {
    let ctx = calc.ctx;
    match kind {
        ClosedFormKind::Translation { kappa } => {
            let element = optimal_element_translation(calc, kappa.arg()).element;
            let feasibility = lipschitz_seminorm(calc, &element)?;
            Ok(DistanceReport {
                value: kappa.norm(),
                method: Method::ClosedForm,
                certificate: Some(Certificate::Operator(element)),
                feasibility,
                gap: None,
                up_to_regularization: true,
            })
        }
        ClosedFormKind::Eigenstates { m, n } => {
            let (lo, hi) = (m.min(n), m.max(n));
            let lp = ctx.lambda_p();
            let increments: Vec<f64> =
                (1..=hi).map(|k| if k > lo { lp / (2.0 * k as f64).sqrt() } else { 0.0 }).collect();
            let feasibility = increments_seminorm(&ctx, &increments);
            Ok(DistanceReport {
                value: eigenstate_distance(&ctx, lo, hi),
                method: Method::ClosedForm,
                certificate: Some(Certificate::Increments(increments)),
                feasibility,
                gap: None,
                up_to_regularization: false,
            })
        }
    }
}

/// Seminorm of a diagonal element from its increments: the commutator is a
/// weighted shift with weights `sqrt(2k) |delta_k| / lambda_P`.
fn increments_seminorm(ctx: &FockContext, increments: &[f64]) -> f64 {
    increments
        .iter()
        .enumerate()
        .map(|(i, d)| (2.0 * (i + 1) as f64).sqrt() * d.abs() / ctx.lambda_p())
        .fold(0.0, f64::max)
}

fn diagonal_from_increments(ctx: FockContext, increments: &[f64]) -> Operator {
    let mut acc = 0.0;
    let values: Vec<f64> = (0..ctx.trunc_dim())
        .map(|n| {
            if n >= 1 && n <= increments.len() {
                acc += increments[n - 1];
            }
            acc
        })
        .collect();
    Operator::diagonal(ctx, &values)
}

/// Exact optimum over diagonal elements with seminorm at most one.
///
/// Writing `alpha_n = sum_{k<=n} delta_k`, the objective becomes
/// `sum_k delta_k T_k` with tail sums `T_k = sum_{j>=k}(p_j - q_j)`, and the
/// constraints decouple into `|delta_k| <= lambda_P / sqrt(2k)`.
pub fn distance_diagonal_lp(calc: &DiracCalculus, s1: &QState, s2: &QState) -> Result<DistanceReport> {
    let ctx = calc.ctx;
    same_ctx(&ctx, s1.ctx())?;
    same_ctx(&ctx, s2.ctx())?;
    for s in [s1, s2] {
        let off = s.off_diagonal_mass();
        if off > ctx.tol() {
            return Err(MoyalError::NonDiagonal(off));
        }
        check_leakage(s)?;
    }
    let (p, q) = (s1.populations(), s2.populations());
    let k_max = ctx.interior();
    let mut tail = 0.0;
    let mut tails = vec![0.0; ctx.trunc_dim()];
    for j in (0..ctx.trunc_dim()).rev() {
        tail += p[j] - q[j];
        tails[j] = tail;
    }
    let lp = ctx.lambda_p();
    let mut value = 0.0;
    let mut increments = Vec::with_capacity(k_max - 1);
    for (j, &t) in tails.iter().enumerate().take(k_max).skip(1) {
        let bound = lp / (2.0 * j as f64).sqrt();
        let d = if t.abs() <= 1e-15 { 0.0 } else { t.signum() * bound };
        value += d * t;
        increments.push(d);
    }
    while increments.last() == Some(&0.0) {
        increments.pop();
    }
    let feasibility = lipschitz_seminorm(calc, &diagonal_from_increments(ctx, &increments))?;
    Ok(DistanceReport {
        value,
        method: Method::DiagonalLP,
        certificate: Some(Certificate::Increments(increments)),
        feasibility,
        gap: None,
        up_to_regularization: false,
    })
}

pub(crate) fn check_leakage(s: &QState) -> Result<()> {
    let leak = s.leakage();
    let bound = s.ctx().leakage_bound();
    if leak > bound {
        return Err(MoyalError::Leakage { leakage: leak, bound });
    }
    Ok(())
}

/// An independent value of `d_D(s1, s2)` when one is available: the exact
/// LP for diagonal pairs, `|mu1 - mu2|` for two members of one family
/// `C(omega_m)`.
pub fn reference_distance(calc: &DiracCalculus, s1: &QState, s2: &QState) -> Result<Option<f64>> {
    let tol = calc.ctx.tol();
    if s1.off_diagonal_mass() <= tol && s2.off_diagonal_mass() <= tol {
        return Ok(Some(distance_diagonal_lp(calc, s1, s2)?.value));
    }
    let lp = calc.ctx.lambda_p();
    match (s1.tag().orbit(lp), s2.tag().orbit(lp)) {
        (Some((m1, mu1)), Some((m2, mu2))) if m1 == m2 => Ok(Some((mu1 - mu2).norm())),
        _ => Ok(None),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// softmax temperature schedule of the smoothed operator norm
    pub beta_start: f64,
    pub beta_end: f64,
    pub step: f64,
    pub momentum: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            iterations: 2000,
            restarts: 8,
            seed: 0,
            beta_start: 5.0,
            beta_end: 200.0,
            step: 0.1,
            momentum: 0.9,
        }
    }
}

/// Scalars the ascent runs on: `f64` when the objective is real, which is
/// several times faster, and `Complex64` otherwise.
pub(crate) trait Field: ComplexField<RealField = f64> + Copy {
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;
}

impl Field for f64 {
    fn from_c64(z: Complex64) -> Self {
        z.re
    }
    fn to_c64(self) -> Complex64 {
        c(self)
    }
}

impl Field for Complex64 {
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(self) -> Complex64 {
        self
    }
}

/// A positively homogeneous constraint `scale * || apply(x) ||_op <= 1` on a
/// linear subspace of Hermitian matrices (the range of `project`).
pub(crate) trait RatioProblem<T: Field> {
    fn apply(&self, x: &DMatrix<T>) -> DMatrix<T>;
    fn apply_adjoint(&self, g: &DMatrix<T>) -> DMatrix<T>;
    fn project(&self, x: &DMatrix<T>) -> DMatrix<T>;
    fn scale(&self) -> f64;

    fn seminorm(&self, x: &DMatrix<T>) -> f64 {
        self.scale() * linalg::op_norm(&self.apply(x))
    }
}

/// Singular values, left vectors and adjoint right vectors.
fn singular_triplets<T: Field>(m: DMatrix<T>) -> (Vec<f64>, DMatrix<T>, DMatrix<T>) {
    let svd = m.svd(true, true);
    (svd.singular_values.iter().copied().collect(), svd.u.expect("left vectors"), svd.v_t.expect("right vectors"))
}

/// `Re tr(x* y)`.
pub(crate) fn inner<T: Field>(x: &DMatrix<T>, y: &DMatrix<T>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conjugate() * *b).real()).sum()
}

/// Maximizes `<delta, x> / seminorm(x)` from `start` by ascent on a smoothed
/// operator norm with heavy-ball momentum. Every iterate is renormalized to
/// seminorm one, so the best objective seen is a certified lower bound.
/// Returns `None` when `start` has zero seminorm and zero objective.
pub(crate) fn ascend<T: Field, P: RatioProblem<T>>(
    p: &P,
    delta: &DMatrix<T>,
    start: &DMatrix<T>,
    cfg: &SolverConfig,
) -> Result<Option<(f64, DMatrix<T>)>> {
    let delta = p.project(delta);
    let mut x = p.project(start);
    let s0 = p.seminorm(&x);
    if !(s0 > 1e-13 * x.norm().max(1e-300)) {
        let obj = inner(&delta, &x);
        if obj.abs() > 1e-12 * x.norm() {
            return Err(MoyalError::DegenerateSeminorm(obj));
        }
        return Ok(None);
    }
    x.unscale_mut(s0);
    let mut best = (inner(&delta, &x), x.clone());
    let mut vel = DMatrix::<T>::zeros(x.nrows(), x.ncols());
    let iters = cfg.iterations.max(1);
    for t in 0..=iters {
        let (sv, u, v_t) = singular_triplets(p.apply(&x));
        let top = sv.iter().copied().fold(0.0, f64::max);
        let snorm = p.scale() * top;
        if !(snorm > 0.0) || !snorm.is_finite() {
            break;
        }
        x.unscale_mut(snorm);
        vel.unscale_mut(snorm);
        let value = inner(&delta, &x);
        if value > best.0 {
            best = (value, x.clone());
        }
        if t == iters {
            break;
        }
        let beta = cfg.beta_start * (cfg.beta_end / cfg.beta_start).powf(t as f64 / iters as f64);
        let w: Vec<f64> = sv.iter().map(|s| (beta * p.scale() * (s - top) / snorm).exp()).collect();
        let total: f64 = w.iter().sum();
        let keep: Vec<usize> = (0..w.len()).filter(|&j| w[j] > 1e-16 * total).collect();
        let mut us = u.select_columns(&keep);
        for (col, &j) in keep.iter().enumerate() {
            us.column_mut(col).scale_mut(w[j] / total);
        }
        let g = us * v_t.select_rows(&keep);
        let grad_norm_part = p.project(&p.apply_adjoint(&g)) * T::from_real(p.scale());
        let grad = &delta - grad_norm_part * T::from_real(value);
        let gn = grad.norm();
        if gn < 1e-14 {
            break;
        }
        let eta = cfg.step / ((t + 1) as f64).sqrt() * x.norm() / gn;
        vel = vel * T::from_real(cfg.momentum) + grad * T::from_real(eta);
        x += &vel;
    }
    Ok(Some(best))
}

/// The single-sheet problem on Hermitian matrices supported on levels
/// `0..=K`, `K = N - edge_guard`, with the commutator compressed to `0..K`.
/// The corner entry `(K, K)` and the identity on `0..K` do not reach the
/// compressed commutator, so both are projected out.
pub(crate) struct MoyalProblem<T> {
    /// `w[i] = lambda_P sqrt(i) / theta`, the weights of `a*/theta` below the diagonal
    w: Vec<f64>,
    k: usize,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Field> MoyalProblem<T> {
    pub(crate) fn new(ctx: &FockContext) -> Self {
        let k = ctx.interior();
        let f = ctx.lambda_p() / ctx.theta();
        let w = (0..=k + 1).map(|i| f * (i as f64).sqrt()).collect();
        MoyalProblem { w, k, _scalar: std::marker::PhantomData }
    }

    #[cfg(test)]
    pub(crate) fn size(&self) -> usize {
        self.k + 1
    }

    /// `Z -> -(a Z - Z a)/theta` with `Z` the zero-padded input.
    pub(crate) fn pad_adjoint(&self, g: &DMatrix<T>) -> DMatrix<T> {
        let k = self.k;
        let mut out = DMatrix::<T>::zeros(k + 1, k + 1);
        for j in 0..=k {
            for i in 0..=k {
                let mut v = T::zero();
                if i + 1 < k && j < k {
                    v -= g[(i + 1, j)] * T::from_real(self.w[i + 1]);
                }
                if i < k && j >= 1 && j - 1 < k {
                    v += g[(i, j - 1)] * T::from_real(self.w[j]);
                }
                out[(i, j)] = v;
            }
        }
        out
    }

    /// `-(a* x - x a*)/theta` restricted to the leading `K` levels.
    pub(crate) fn compress_dz(&self, x: &DMatrix<T>) -> DMatrix<T> {
        let k = self.k;
        let mut out = DMatrix::<T>::zeros(k, k);
        for j in 0..k {
            for i in 0..k {
                let mut v = x[(i, j + 1)] * T::from_real(self.w[j + 1]);
                if i >= 1 {
                    v -= x[(i - 1, j)] * T::from_real(self.w[i]);
                }
                out[(i, j)] = v;
            }
        }
        out
    }
}

/// Hermitian part with the `(K, K)` entry zeroed.
pub(crate) fn hermitian_support<T: Field>(x: &DMatrix<T>, k: usize) -> DMatrix<T> {
    let mut h = (x + x.adjoint()) * T::from_real(0.5);
    h[(k, k)] = T::zero();
    h
}

/// Removes the component along the identity of the leading `k` levels.
pub(crate) fn remove_trace<T: Field>(h: &mut DMatrix<T>, k: usize) {
    let mean = (0..k).map(|i| h[(i, i)].real()).sum::<f64>() / k as f64;
    for i in 0..k {
        h[(i, i)] -= T::from_real(mean);
    }
}

impl<T: Field> RatioProblem<T> for MoyalProblem<T> {
    fn apply(&self, x: &DMatrix<T>) -> DMatrix<T> {
        self.compress_dz(x)
    }

    fn apply_adjoint(&self, g: &DMatrix<T>) -> DMatrix<T> {
        self.pad_adjoint(g)
    }

    fn project(&self, x: &DMatrix<T>) -> DMatrix<T> {
        let mut h = hermitian_support(x, self.k);
        remove_trace(&mut h, self.k);
        h
    }

    fn scale(&self) -> f64 {
        SQRT_2
    }
}

pub(crate) fn random_hermitian(size: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = CMat::from_fn(size, size, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    (&x + x.adjoint()) * c(0.5)
}

/// `(a e^{-i Xi} + a* e^{i Xi}) / sqrt2` on the first `size` levels.
fn linear_element(size: usize, lambda_p: f64, xi: f64) -> CMat {
    let a = fock::annihilation_matrix(size, lambda_p);
    let ph = Complex64::from_polar(1.0, xi);
    (&a * ph.conj() + a.adjoint() * ph) * c(1.0 / SQRT_2)
}

/// Starting points: the objective itself, the linear element aligned with
/// the shift of `<a>`, the diagonal LP optimum of the populations, then
/// seeded random Hermitian matrices.
pub(crate) fn seed_matrices(ctx: &FockContext, delta: &CMat, cfg: &SolverConfig) -> Vec<CMat> {
    let size = delta.nrows();
    let mut seeds = vec![delta.clone()];
    let a = fock::annihilation_matrix(size, ctx.lambda_p());
    let shift = linalg::trace_product(delta, &a);
    if shift.norm() > 1e-14 {
        seeds.push(linear_element(size, ctx.lambda_p(), shift.arg()));
    }
    let mut tail = 0.0;
    let mut alpha = vec![0.0; size];
    let mut tails = vec![0.0; size];
    for j in (0..size).rev() {
        tail += delta[(j, j)].re;
        tails[j] = tail;
    }
    for j in 1..size {
        alpha[j] = alpha[j - 1] + tails[j].signum() * ctx.lambda_p() / (2.0 * j as f64).sqrt();
    }
    seeds.push(CMat::from_diagonal(&nalgebra::DVector::from_vec(alpha).map(c)));
    let mut r = 0;
    while seeds.len() < cfg.restarts.max(1) {
        seeds.push(random_hermitian(size, cfg.seed + r));
        r += 1;
    }
    seeds.truncate(cfg.restarts.max(1));
    seeds
}

/// Best value and argument over all seeds for one problem.
pub(crate) fn run_seeds<T: Field, P: RatioProblem<T>>(
    p: &P,
    delta: &CMat,
    seeds: &[CMat],
    cfg: &SolverConfig,
) -> Result<Option<(f64, CMat)>> {
    let d = delta.map(T::from_c64);
    let mut best: Option<(f64, CMat)> = None;
    for s in seeds {
        if let Some((v, x)) = ascend(p, &d, &s.map(T::from_c64), cfg)? {
            if best.as_ref().is_none_or(|b| v > b.0) {
                best = Some((v, x.map(Field::to_c64)));
            }
        }
    }
    Ok(best)
}

/// Certified lower bound on `d_D(s1, s2)` from the seeded ascent.
pub fn distance_solver(calc: &DiracCalculus, s1: &QState, s2: &QState, cfg: &SolverConfig) -> Result<DistanceReport> {
    let ctx = calc.ctx;
    same_ctx(&ctx, s1.ctx())?;
    same_ctx(&ctx, s2.ctx())?;
    check_leakage(s1)?;
    check_leakage(s2)?;
    let full_delta = s1.rho() - s2.rho();
    let size = ctx.interior() + 1;
    let delta = linalg::top_left(&full_delta, size);
    let reference = reference_distance(calc, s1, s2)?;
    let zero = DistanceReport {
        value: 0.0,
        method: Method::ConvexSolver,
        certificate: None,
        feasibility: 0.0,
        gap: reference.map(f64::abs),
        up_to_regularization: false,
    };
    if linalg::max_abs(&full_delta) <= ctx.tol() {
        return Ok(zero);
    }
    let seeds = seed_matrices(&ctx, &delta, cfg);
    let best = if linalg::as_real(&delta, 1e-15).is_some() {
        run_seeds::<f64, _>(&MoyalProblem::new(&ctx), &delta, &seeds, cfg)?
    } else {
        run_seeds::<Complex64, _>(&MoyalProblem::new(&ctx), &delta, &seeds, cfg)?
    };
    let Some((_, x)) = best else {
        return Ok(zero);
    };
    let n = ctx.trunc_dim();
    let mut full = CMat::zeros(n, n);
    full.view_mut((0, 0), (size, size)).copy_from(&x);
    let mut cert = Operator::from_parts(ctx, full);
    let feas = lipschitz_seminorm(calc, &cert)?;
    cert = cert.scale(c(1.0 / feas));
    let value = linalg::trace_product(&full_delta, cert.mat()).re;
    let feasibility = lipschitz_seminorm(calc, &cert)?;
    Ok(DistanceReport {
        value,
        method: Method::ConvexSolver,
        certificate: Some(Certificate::Operator(cert)),
        feasibility,
        gap: reference.map(|r| (r - value).abs()),
        up_to_regularization: false,
    })
}

/// `Re(omega1(A) - omega2(A))`.
pub fn evaluation_gap(element: &Operator, s1: &QState, s2: &QState) -> Result<f64> {
    Ok((fock::evaluate(s1, element)? - fock::evaluate(s2, element)?).re)
}

#[derive(Debug, Clone)]
pub struct TranslationElement {
    pub element: Operator,
    /// `max | [D, l]* [D, l] - 1 |` on the interior block
    pub unit_residual: f64,
}

/// `pi(l_kappa) = (a e^{-i Xi} + a* e^{i Xi}) / sqrt2`.
pub fn optimal_element_translation(calc: &DiracCalculus, xi: f64) -> TranslationElement {
    let ctx = calc.ctx;
    let element = Operator::from_parts(ctx, linear_element(ctx.trunc_dim(), ctx.lambda_p(), xi));
    let x = calc.interior(calc.dz(&element).expect("same context").mat());
    let xb = calc.interior(calc.dzbar(&element).expect("same context").mat());
    let id = CMat::identity(x.nrows(), x.nrows());
    // [D, l]* [D, l] = 2 diag(X* X, Xbar* Xbar)
    let up = (x.adjoint() * &x) * c(2.0) - &id;
    let down = (xb.adjoint() * &xb) * c(2.0) - &id;
    TranslationElement { element, unit_residual: linalg::max_abs(&up).max(linalg::max_abs(&down)) }
}

#[derive(Debug, Clone)]
pub struct EigenElement {
    pub element: Operator,
    pub increments: Vec<f64>,
    /// size of the block on which the identities are checked
    pub block: usize,
    /// `1 - [D, A]* [D, A]`, upper and lower spinor blocks
    pub defect: (CMat, CMat),
    /// `max |defect - diag(0, e_0)|`
    pub defect_residual: f64,
    /// `max |(dz(A) a)(dz(A) a)* - a* a / 2|`
    pub shift_residual: f64,
}

/// Diagonal element with increments `lambda_P / sqrt(2k)`, `k = 1..=upto`.
/// Its derivative is `S / sqrt2` with `S` the unilateral shift.
pub fn optimal_element_eigenstates(calc: &DiracCalculus, upto: usize) -> Result<EigenElement> {
    let ctx = calc.ctx;
    if upto == 0 || upto >= ctx.interior() {
        return Err(MoyalError::OutOfRange { index: upto, limit: ctx.interior() });
    }
    let lp = ctx.lambda_p();
    let increments: Vec<f64> = (1..=upto).map(|k| lp / (2.0 * k as f64).sqrt()).collect();
    let element = diagonal_from_increments(ctx, &increments);
    let x = calc.dz(&element)?.into_mat();
    let id = CMat::identity(upto, upto);
    let up = &id - linalg::top_left(&(x.adjoint() * &x), upto) * c(2.0);
    let down = &id - linalg::top_left(&(&x * x.adjoint()), upto) * c(2.0);
    let mut e0 = CMat::zeros(upto, upto);
    e0[(0, 0)] = c(1.0);
    let defect_residual = linalg::max_abs(&up).max(linalg::max_abs(&(&down - &e0)));
    let a = fock::annihilation(ctx).into_mat();
    let y = &x * &a;
    let number = a.adjoint() * &a;
    let shift = linalg::top_left(&(&y * y.adjoint() - number * c(0.5)), upto);
    Ok(EigenElement {
        element,
        increments,
        block: upto,
        defect: (up, down),
        defect_residual,
        shift_residual: linalg::max_abs(&shift),
    })
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    pub d_d: f64,
    pub d_l_mod: f64,
    pub rel_gap: f64,
    /// `|omega_m(R) - omega_n(R)|` for the radial element `R = sqrt(a a* + a* a)`
    pub radial_gap: f64,
}

/// Spectral distance between eigenstates against the modified quantum
/// length `sqrt(2E_n) - sqrt(2E_m)`; the former is a midpoint Riemann sum of
/// the latter.
pub fn length_vs_optimal_discrepancy(calc: &DiracCalculus, m: usize, n: usize) -> Result<Discrepancy> {
    let ctx = calc.ctx;
    if m >= n {
        return Err(MoyalError::InvalidArgument(format!("need m < n, got ({m}, {n})")));
    }
    ctx.check_index(n)?;
    let d_d = eigenstate_distance(&ctx, m, n);
    let d_l_mod = (2.0 * ctx.energy(n)).sqrt() - (2.0 * ctx.energy(m)).sqrt();
    let a = fock::annihilation(ctx).into_mat();
    let (radial, _) = linalg::psd_sqrt(&(&a * a.adjoint() + a.adjoint() * &a));
    let radial_gap = (radial[(n, n)] - radial[(m, m)]).re.abs();
    Ok(Discrepancy { d_d, d_l_mod, rel_gap: relative_gap(d_d, d_l_mod), radial_gap })
}

/// Distance for the Dirac operator `sqrt(1 + Omega^2) D`.
pub fn scaled_distance(report: &DistanceReport, omega: f64) -> Result<DistanceReport> {
    if !(omega >= 0.0) {
        return Err(MoyalError::InvalidArgument(format!("Omega must be nonnegative, got {omega}")));
    }
    let f = 1.0 / (1.0 + omega * omega).sqrt();
    let certificate = report.certificate.as_ref().map(|cert| match cert {
        Certificate::Operator(op) => Certificate::Operator(op.scale(c(f))),
        Certificate::Increments(d) => Certificate::Increments(d.iter().map(|x| x * f).collect()),
        Certificate::Pair(a, b) => Certificate::Pair(a.scale(c(f)), b.scale(c(f))),
    });
    Ok(DistanceReport {
        value: report.value * f,
        method: Method::Scaled,
        certificate,
        feasibility: report.feasibility,
        gap: report.gap.map(|g| g * f),
        up_to_regularization: report.up_to_regularization,
    })
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, coherent_state, creation, displace, eigenstate, make_context, mixture};

    fn calc(n: usize) -> DiracCalculus {
        DiracCalculus::new(make_context(n, 1.0, 1e-10).unwrap())
    }

    fn quick() -> SolverConfig {
        SolverConfig { iterations: 600, restarts: 4, ..SolverConfig::default() }
    }

    #[test]
    fn derivative_calibration() {
        let d = calc(16);
        let ctx = *d.ctx();
        let k = ctx.interior();
        let id = CMat::identity(k, k);
        let dz_a = d.dz(&annihilation(ctx)).unwrap();
        assert!(linalg::max_abs(&(linalg::top_left(dz_a.mat(), k) - &id)) < 1e-14);
        let dzb = d.dzbar(&creation(ctx)).unwrap();
        assert!(linalg::max_abs(&(linalg::top_left(dzb.mat(), k) - &id)) < 1e-14);
        assert!(linalg::max_abs(d.dz(&creation(ctx)).unwrap().mat()) < 1e-14);
    }

    #[test]
    fn derivatives_commute_on_polynomials() {
        let d = calc(24);
        let ctx = *d.ctx();
        let a = annihilation(ctx);
        let ad = creation(ctx);
        let p = a.mul(&a).unwrap().add(&ad.mul(&a).unwrap()).unwrap().add(&ad).unwrap();
        let x = d.dz(&d.dzbar(&p).unwrap()).unwrap();
        let y = d.dzbar(&d.dz(&p).unwrap()).unwrap();
        let k = ctx.interior() - 3;
        assert!(linalg::max_abs(&linalg::top_left(&(x.mat() - y.mat()), k)) < 1e-12);
    }

    #[test]
    fn seminorm_examples() {
        let d = calc(32);
        let ctx = *d.ctx();
        assert!(lipschitz_seminorm(&d, &Operator::identity(ctx)).unwrap() < 1e-14);
        for xi in [0.0, 0.7, 2.0, -1.3] {
            let l = optimal_element_translation(&d, xi).element;
            assert!((lipschitz_seminorm(&d, &l).unwrap() - 1.0).abs() < 1e-10);
        }
        let incr: Vec<f64> = (1..ctx.interior()).map(|k| 1.0 / (2.0 * k as f64).sqrt()).collect();
        let diag = diagonal_from_increments(ctx, &incr);
        assert!((lipschitz_seminorm(&d, &diag).unwrap() - 1.0).abs() < 1e-10);
        let non_herm = annihilation(ctx);
        assert!(matches!(lipschitz_seminorm(&d, &non_herm), Err(MoyalError::NonHermitian(_))));
    }

    #[test]
    fn closed_forms() {
        let d = calc(16);
        let r = distance_closed_form(&d, ClosedFormKind::Translation { kappa: Complex64::new(0.0, 2.0) }).unwrap();
        assert_eq!(r.value, 2.0);
        assert!((r.feasibility - 1.0).abs() < 1e-10);
        let r = distance_closed_form(&d, ClosedFormKind::Eigenstates { m: 0, n: 1 }).unwrap();
        assert!((r.value - 0.5f64.sqrt()).abs() < 1e-15);
        let r = distance_closed_form(&d, ClosedFormKind::Eigenstates { m: 3, n: 0 }).unwrap();
        let want = (1.0 + 0.5f64.sqrt() + 1.0 / 3f64.sqrt()) / SQRT_2;
        assert!((r.value - want).abs() < 1e-15);
        assert!((r.value - 1.615355).abs() < 1e-6);
        assert!((r.feasibility - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_lp_examples() {
        let d = calc(16);
        let ctx = *d.ctx();
        let (w0, w1, w2) = (eigenstate(ctx, 0).unwrap(), eigenstate(ctx, 1).unwrap(), eigenstate(ctx, 2).unwrap());
        let r = distance_diagonal_lp(&d, &w0, &w1).unwrap();
        assert!((r.value - 0.5f64.sqrt()).abs() < 1e-15);
        let Some(Certificate::Increments(inc)) = &r.certificate else { panic!() };
        assert_eq!(inc.len(), 1);
        assert!((inc[0].abs() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((r.feasibility - 1.0).abs() < 1e-10);
        assert_eq!(distance_diagonal_lp(&d, &w2, &w2).unwrap().value, 0.0);
        let coh = coherent_state(ctx, Complex64::new(0.5, 0.0)).unwrap();
        assert!(matches!(distance_diagonal_lp(&d, &coh, &w0), Err(MoyalError::NonDiagonal(_))));
    }

    #[test]
    fn diagonal_lp_matches_brute_force() {
        // exhaustive search over increments on a 5-point lattice per level
        let d = calc(8);
        let ctx = *d.ctx();
        let mix = mixture(&[0.5, 0.5], &[eigenstate(ctx, 0).unwrap(), eigenstate(ctx, 1).unwrap()]).unwrap();
        let w2 = eigenstate(ctx, 2).unwrap();
        let lp = distance_diagonal_lp(&d, &mix, &w2).unwrap().value;
        let (p, q) = (mix.populations(), w2.populations());
        let levels = ctx.interior() - 1;
        let mut best = f64::NEG_INFINITY;
        let combos = 5usize.pow(levels as u32);
        for code in 0..combos {
            let mut rest = code;
            let mut alpha = 0.0;
            let mut obj = 0.0;
            for k in 1..=levels {
                let step = (rest % 5) as f64 / 2.0 - 1.0;
                rest /= 5;
                alpha += step / (2.0 * k as f64).sqrt();
                obj += (p[k] - q[k]) * alpha;
            }
            best = best.max(obj);
        }
        assert!((lp - best).abs() < 1e-9, "{lp} vs {best}");
        assert!((lp - 0.853553).abs() < 1e-6);
    }

    #[test]
    fn stencils_match_dense_commutators() {
        let ctx = make_context(12, 1.7, 1e-10).unwrap();
        let p = MoyalProblem::<Complex64>::new(&ctx);
        let s = p.size();
        let a = fock::annihilation_matrix(s, ctx.lambda_p());
        let x = random_hermitian(s, 3);
        let dense = (a.adjoint() * &x - &x * a.adjoint()) * c(-1.0 / ctx.theta());
        assert!(linalg::max_abs(&(p.compress_dz(&x) - linalg::top_left(&dense, s - 1))) < 1e-12);
        let g =
            random_hermitian(s - 1, 4) + CMat::from_fn(s - 1, s - 1, |i, j| Complex64::new(0.0, (i + 2 * j) as f64));
        let mut z = CMat::zeros(s, s);
        z.view_mut((0, 0), (s - 1, s - 1)).copy_from(&g);
        let dense = (&a * &z - &z * &a) * c(-1.0 / ctx.theta());
        assert!(linalg::max_abs(&(p.pad_adjoint(&g) - dense)) < 1e-12);
    }

    #[test]
    fn smoothed_norm_gradient_matches_finite_differences() {
        let ctx = make_context(12, 1.3, 1e-10).unwrap();
        let p = MoyalProblem::<Complex64>::new(&ctx);
        let x = p.project(&random_hermitian(p.size(), 1));
        let e = p.project(&random_hermitian(p.size(), 2));
        let svd = p.apply(&x).svd(true, true);
        let j = svd.singular_values.imax();
        let g = svd.u.unwrap().column(j) * svd.v_t.unwrap().row(j);
        let analytic = inner(&p.project(&p.apply_adjoint(&g)), &e) * p.scale();
        let h = 1e-6;
        let numeric = (p.seminorm(&(&x + &e * c(h))) - p.seminorm(&(&x - &e * c(h)))) / (2.0 * h);
        assert!((analytic - numeric).abs() < 1e-6, "{analytic} vs {numeric}");
    }

    #[test]
    fn solver_on_adjacent_eigenstates() {
        let d = calc(48);
        let ctx = *d.ctx();
        let r = distance_solver(&d, &eigenstate(ctx, 0).unwrap(), &eigenstate(ctx, 1).unwrap(), &quick()).unwrap();
        assert!(r.value >= 0.70711 * 0.98, "{}", r.value);
        assert!(r.value <= 0.5f64.sqrt() + 1e-8);
        assert!(r.feasibility <= 1.0 + 1e-8);
        assert!(r.gap.unwrap() < 0.02);
    }

    #[test]
    fn solver_on_translated_eigenstate() {
        let d = calc(48);
        let ctx = *d.ctx();
        let w2 = eigenstate(ctx, 2).unwrap();
        let kappa = Complex64::new(0.6, 0.8);
        let moved = displace(&w2, kappa).unwrap();
        let r = distance_solver(&d, &w2, &moved, &quick()).unwrap();
        assert!(r.value >= 0.98, "{}", r.value);
        let Some(Certificate::Operator(cert)) = &r.certificate else { panic!() };
        let gap = evaluation_gap(cert, &w2, &moved).unwrap();
        assert!((gap - 1.0).abs() < 1e-6, "{gap}");
        let l = optimal_element_translation(&d, (-kappa).arg()).element;
        let k = 16;
        let dist = linalg::max_abs(&linalg::top_left(&(cert.mat() - l.mat()), k));
        let shift = cert.mat()[(0, 0)] - l.mat()[(0, 0)];
        let centred = linalg::top_left(&(cert.mat() - l.mat()), k) - CMat::identity(k, k) * shift;
        assert!(linalg::max_abs(&centred) < 1e-3, "{dist}");
    }

    #[test]
    fn solver_on_equal_states() {
        let d = calc(16);
        let w = eigenstate(*d.ctx(), 3).unwrap();
        let r = distance_solver(&d, &w, &w, &quick()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn translation_element() {
        let d = calc(64);
        let ctx = *d.ctx();
        let t = optimal_element_translation(&d, 0.0);
        let (q1, _) = fock::quadratures(ctx);
        assert!(linalg::max_abs(&(t.element.mat() - q1.mat())) < 1e-15);
        assert!(t.unit_residual < 1e-12);
        let w0 = eigenstate(ctx, 0).unwrap();
        let moved = displace(&w0, c(1.5)).unwrap();
        assert!((evaluation_gap(&t.element, &w0, &moved).unwrap().abs() - 1.5).abs() < 1e-8);
    }

    #[test]
    fn eigenstate_element() {
        let d = calc(64);
        let ctx = *d.ctx();
        let e = optimal_element_eigenstates(&d, 3).unwrap();
        let want = [0.70711, 0.5, 0.40825];
        for (x, w) in e.increments.iter().zip(want) {
            assert!((x - w).abs() < 1e-5);
        }
        let full = optimal_element_eigenstates(&d, ctx.interior() - 1).unwrap();
        assert!(full.defect_residual < 1e-12);
        assert!((full.defect.1[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(full.shift_residual < 1e-12);
        for (m, n) in [(0, 3), (1, 5), (2, 4)] {
            let gap =
                evaluation_gap(&full.element, &eigenstate(ctx, n).unwrap(), &eigenstate(ctx, m).unwrap()).unwrap();
            assert!((gap - eigenstate_distance(&ctx, m, n)).abs() < 1e-12);
        }
        assert!(optimal_element_eigenstates(&d, ctx.interior()).is_err());
    }

    #[test]
    fn discrepancy_examples() {
        let d = calc(64);
        let r = length_vs_optimal_discrepancy(&d, 0, 1).unwrap();
        assert!((r.d_d - 0.70711).abs() < 1e-5);
        assert!((r.d_l_mod - 0.73205).abs() < 1e-5);
        assert!((r.rel_gap - 0.0341).abs() < 1e-4);
        assert!((r.radial_gap - (3f64.sqrt() - 1.0)).abs() < 1e-8);
        let r = length_vs_optimal_discrepancy(&d, 0, 50).unwrap();
        assert!(r.rel_gap < 0.01);
    }

    #[test]
    fn scaled_examples() {
        let d = calc(16);
        let r = distance_closed_form(&d, ClosedFormKind::Translation { kappa: c(1.0) }).unwrap();
        assert_eq!(scaled_distance(&r, 0.0).unwrap().value, 1.0);
        assert!((scaled_distance(&r, 1.0).unwrap().value - 0.5f64.sqrt()).abs() < 1e-15);
        let r2 = distance_closed_form(&d, ClosedFormKind::Translation { kappa: c(2.0) }).unwrap();
        assert!((scaled_distance(&r2, 3f64.sqrt()).unwrap().value - 1.0).abs() < 1e-15);
        assert!(scaled_distance(&r, -1.0).is_err());
    }
}
