//! The product of the Moyal triple with the two-point space: two sheets a
//! distance `1/|Lambda|` apart.
//!
//! With spinor index outermost per sheet, the commutator of
//! `D' = D (x) 1 + Gamma (x) D_I` with `(A1, A2)` is `-i M` where, in the
//! block order `[sheet1 up, sheet1 down, sheet2 up, sheet2 down]`,
//!
//! ```text
//!       | 0         sqrt2 X1*   i conj(L) Y   0            |
//!   M = | sqrt2 X1  0           0             -i conj(L) Y |
//!       | -i L Y    0           0             sqrt2 X2*    |
//!       | 0         i L Y       sqrt2 X2      0            |
//! ```
//!
//! with `Xi = dz(Ai)` and `Y = A2 - A1`, all compressed to the interior.
//! `M` is odd for the grading `diag(1, -1, -1, 1)`, so its norm is that of
//! the half-size block `W = (sqrt2 X1*, i conj(L) Y; i L Y, sqrt2 X2)`
//! between the even levels `[1 up, 2 down]` and the odd ones `[1 down, 2 up]`.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{MoyalError, Result};
use crate::fock::{self, same_ctx, QState, StateTag};
use crate::lengthop::{self, LengthOperator};
use crate::linalg::{self, c, CMat, I};
use crate::spectral::{
    self, ascend, check_leakage, hermitian_support, random_hermitian, Certificate, DiracCalculus, DistanceReport,
    Method, MoyalProblem, RatioProblem, SolverConfig,
};
use crate::sweep::{SweepRow, SweepTable};
use crate::Operator;

#[derive(Debug, Clone)]
pub struct DoubledDirac {
    calc: DiracCalculus,
    lambda: Complex64,
}

pub fn make_doubled(calc: &DiracCalculus, lambda: Complex64) -> Result<DoubledDirac> {
    if lambda.norm() == 0.0 || !lambda.norm().is_finite() {
        return Err(MoyalError::ZeroLambda);
    }
    Ok(DoubledDirac { calc: calc.clone(), lambda })
}

impl DoubledDirac {
    /// `Lambda = d_L2(omega, omega)^{-1/2}` for a reference square length.
    pub fn from_square_length(calc: &DiracCalculus, square_length: f64) -> Result<Self> {
        if !(square_length > 0.0) {
            return Err(MoyalError::ZeroLambda);
        }
        make_doubled(calc, c(1.0 / square_length.sqrt()))
    }

    pub fn calc(&self) -> &DiracCalculus {
        &self.calc
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// `1 / |Lambda|`.
    pub fn inter_sheet(&self) -> f64 {
        1.0 / self.lambda.norm()
    }

    /// `|| [D', (A1, A2)] ||` on the interior block.
    pub fn seminorm(&self, a1: &Operator, a2: &Operator) -> Result<f64> {
        same_ctx(a1.ctx(), a2.ctx())?;
        let k = self.calc.ctx().interior();
        let x1 = linalg::top_left(self.calc.dz(a1)?.mat(), k);
        let x2 = linalg::top_left(self.calc.dz(a2)?.mat(), k);
        let y = linalg::top_left(&(a2.mat() - a1.mat()), k);
        Ok(linalg::op_norm(&assemble(&x1, &x2, &y, self.lambda)))
    }
}

fn assemble(x1: &CMat, x2: &CMat, y: &CMat, lambda: Complex64) -> CMat {
    let k = x1.nrows();
    let mut m = CMat::zeros(4 * k, 4 * k);
    let r2 = c(SQRT_2);
    let lb = lambda.conj();
    let mut put = |r: usize, col: usize, b: CMat| m.view_mut((r * k, col * k), (k, k)).copy_from(&b);
    put(0, 1, x1.adjoint() * r2);
    put(1, 0, x1 * r2);
    put(0, 2, y * (I * lb));
    put(1, 3, y * (-I * lb));
    put(2, 0, y * (-I * lambda));
    put(3, 1, y * (I * lambda));
    put(2, 3, x2.adjoint() * r2);
    put(3, 2, x2 * r2);
    m
}

fn half_block(x1: &CMat, x2: &CMat, y: &CMat, lambda: Complex64) -> CMat {
    let k = x1.nrows();
    let mut w = CMat::zeros(2 * k, 2 * k);
    let r2 = c(SQRT_2);
    w.view_mut((0, 0), (k, k)).copy_from(&(x1.adjoint() * r2));
    w.view_mut((0, k), (k, k)).copy_from(&(y * (I * lambda.conj())));
    w.view_mut((k, 0), (k, k)).copy_from(&(y * (I * lambda)));
    w.view_mut((k, k), (k, k)).copy_from(&(x2 * r2));
    w
}

/// Pairs `(A1, A2)` stored as the block diagonal `diag(A1, A2)`; the image
/// is the half block `W`.
struct DoubledProblem {
    single: MoyalProblem<Complex64>,
    lambda: Complex64,
    k: usize,
}

impl DoubledProblem {
    fn new(dd: &DoubledDirac) -> Self {
        let ctx = dd.calc.ctx();
        DoubledProblem { single: MoyalProblem::new(ctx), lambda: dd.lambda, k: ctx.interior() }
    }

    fn split(&self, x: &CMat) -> (CMat, CMat) {
        let s = self.k + 1;
        (x.view((0, 0), (s, s)).into_owned(), x.view((s, s), (s, s)).into_owned())
    }

    fn join(&self, a1: &CMat, a2: &CMat) -> CMat {
        let s = self.k + 1;
        let mut x = CMat::zeros(2 * s, 2 * s);
        x.view_mut((0, 0), (s, s)).copy_from(a1);
        x.view_mut((s, s), (s, s)).copy_from(a2);
        x
    }
}

impl RatioProblem<Complex64> for DoubledProblem {
    fn apply(&self, x: &CMat) -> CMat {
        let (a1, a2) = self.split(x);
        let y = linalg::top_left(&(&a2 - &a1), self.k);
        half_block(&self.single.compress_dz(&a1), &self.single.compress_dz(&a2), &y, self.lambda)
    }

    fn apply_adjoint(&self, g: &CMat) -> CMat {
        let k = self.k;
        let b = |r: usize, col: usize| g.view((r * k, col * k), (k, k)).into_owned();
        let r2 = c(SQRT_2);
        let lam = self.lambda;
        let gx1 = b(0, 0).adjoint() * r2;
        let gx2 = b(1, 1) * r2;
        let gy = b(0, 1) * (-I * lam) + b(1, 0) * (-I * lam.conj());
        let mut py = CMat::zeros(k + 1, k + 1);
        py.view_mut((0, 0), (k, k)).copy_from(&gy);
        let g1 = self.single.pad_adjoint(&gx1) - &py;
        let g2 = self.single.pad_adjoint(&gx2) + &py;
        self.join(&g1, &g2)
    }

    fn project(&self, x: &CMat) -> CMat {
        let (a1, a2) = self.split(x);
        let mut h1 = hermitian_support(&a1, self.k);
        let mut h2 = hermitian_support(&a2, self.k);
        // (1, 1) on both sheets commutes with D'
        let mean = (0..self.k).map(|i| h1[(i, i)].re + h2[(i, i)].re).sum::<f64>() / (2 * self.k) as f64;
        for i in 0..self.k {
            h1[(i, i)] -= mean;
            h2[(i, i)] -= mean;
        }
        self.join(&h1, &h2)
    }

    fn scale(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    One,
    Two,
}

impl Sheet {
    pub fn from_index(i: u8) -> Result<Sheet> {
        match i {
            1 => Ok(Sheet::One),
            2 => Ok(Sheet::Two),
            _ => Err(MoyalError::InvalidArgument(format!("sheet must be 1 or 2, got {i}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SheetState {
    pub state: QState,
    pub sheet: Sheet,
}

impl SheetState {
    pub fn new(state: QState, sheet: u8) -> Result<Self> {
        Ok(SheetState { state, sheet: Sheet::from_index(sheet)? })
    }
}

fn same_state(s1: &QState, s2: &QState, tol: f64) -> bool {
    linalg::max_abs(&(s1.rho() - s2.rho())) <= tol
}

fn same_family(s1: &QState, s2: &QState) -> bool {
    let lp = s1.ctx().lambda_p();
    matches!((s1.tag().orbit(lp), s2.tag().orbit(lp)), (Some((m, _)), Some((n, _))) if m == n)
}

/// Closed-form doubled distance where one is known: same sheet, or
/// opposite sheets within one family `C(omega_m)`.
pub fn doubled_closed_form(dd: &DoubledDirac, s1: &SheetState, s2: &SheetState) -> Result<Option<f64>> {
    let calc = &dd.calc;
    let tol = calc.ctx().tol();
    if s1.sheet == s2.sheet {
        return spectral::reference_distance(calc, &s1.state, &s2.state);
    }
    if same_state(&s1.state, &s2.state, tol) {
        return Ok(Some(dd.inter_sheet()));
    }
    if same_family(&s1.state, &s2.state) {
        if let Some(d) = spectral::reference_distance(calc, &s1.state, &s2.state)? {
            return Ok(Some((d * d + dd.inter_sheet().powi(2)).sqrt()));
        }
    }
    Ok(None)
}

/// Lower bound on `d_D'` from the ascent over pairs `(A1, A2)`, warm
/// started from the single-sheet optimum: for opposite sheets the pair
/// `(c A + s/2, c A - s/2)` with `c = d/r`, `s = |Lambda|^-2 / r`,
/// `r = sqrt(d^2 + |Lambda|^-2)` has seminorm one and value `r`.
pub fn doubled_solver(
    dd: &DoubledDirac,
    s1: &SheetState,
    s2: &SheetState,
    cfg: &SolverConfig,
) -> Result<DistanceReport> {
    let single = spectral::distance_solver(&dd.calc, &s1.state, &s2.state, cfg)?;
    doubled_solver_from(dd, s1, s2, cfg, &single)
}

fn doubled_solver_from(
    dd: &DoubledDirac,
    s1: &SheetState,
    s2: &SheetState,
    cfg: &SolverConfig,
    single: &DistanceReport,
) -> Result<DistanceReport> {
    let calc = &dd.calc;
    let ctx = *calc.ctx();
    same_ctx(&ctx, s1.state.ctx())?;
    same_ctx(&ctx, s2.state.ctx())?;
    check_leakage(&s1.state)?;
    check_leakage(&s2.state)?;
    let k = ctx.interior();
    let size = k + 1;
    let (d, a_star) = match &single.certificate {
        Some(Certificate::Operator(op)) => (single.value, linalg::top_left(op.mat(), size)),
        _ => (0.0, CMat::zeros(size, size)),
    };
    let p = DoubledProblem::new(dd);
    let r1 = linalg::top_left(s1.state.rho(), size);
    let r2 = linalg::top_left(s2.state.rho(), size);
    let zero = CMat::zeros(size, size);
    let place = |sheet: Sheet, m: &CMat| match sheet {
        Sheet::One => p.join(m, &zero),
        Sheet::Two => p.join(&zero, m),
    };
    let delta = place(s1.sheet, &r1) - place(s2.sheet, &r2);
    let mut id = CMat::identity(size, size);
    id[(k, k)] = c(0.0);
    let mut seeds = Vec::new();
    if s1.sheet == s2.sheet {
        seeds.push(p.join(&a_star, &a_star));
    } else {
        let inv2 = dd.inter_sheet().powi(2);
        let r = (d * d + inv2).sqrt();
        let (cc, ss) = (d / r, inv2 / r);
        let near = &a_star * c(cc) + &id * c(ss / 2.0);
        let far = &a_star * c(cc) - &id * c(ss / 2.0);
        seeds.push(place(s1.sheet, &near) + place(s2.sheet, &far));
        seeds.push(place(s1.sheet, &id));
    }
    let mut r = 0;
    while seeds.len() < cfg.restarts.max(1) {
        let h1 = random_hermitian(size, cfg.seed + 1000 + r);
        let h2 = random_hermitian(size, cfg.seed + 2000 + r);
        seeds.push(p.join(&h1, &h2));
        r += 1;
    }
    let mut best: Option<(f64, CMat)> = None;
    for s in &seeds {
        if let Some((v, x)) = ascend(&p, &delta, s, cfg)? {
            if best.as_ref().is_none_or(|b| v > b.0) {
                best = Some((v, x));
            }
        }
    }
    let reference = doubled_closed_form(dd, s1, s2)?;
    let Some((_, x)) = best else {
        return Ok(DistanceReport {
            value: 0.0,
            method: Method::ConvexSolver,
            certificate: None,
            feasibility: 0.0,
            gap: reference,
            up_to_regularization: false,
        });
    };
    let (a1, a2) = p.split(&x);
    let n = ctx.trunc_dim();
    let embed = |m: &CMat| {
        let mut full = CMat::zeros(n, n);
        full.view_mut((0, 0), (size, size)).copy_from(m);
        Operator::from_parts(ctx, full)
    };
    let (mut e1, mut e2) = (embed(&a1), embed(&a2));
    let feas = dd.seminorm(&e1, &e2)?;
    e1 = e1.scale(c(1.0 / feas));
    e2 = e2.scale(c(1.0 / feas));
    let on = |s: &SheetState| if s.sheet == Sheet::One { &e1 } else { &e2 };
    let value = (fock::evaluate(&s1.state, on(s1))? - fock::evaluate(&s2.state, on(s2))?).re;
    let feasibility = dd.seminorm(&e1, &e2)?;
    Ok(DistanceReport {
        value,
        method: Method::ConvexSolver,
        certificate: Some(Certificate::Pair(e1, e2)),
        feasibility,
        gap: reference.map(|v| (v - value).abs()),
        up_to_regularization: false,
    })
}

/// Closed form when available, cross-checked by the doubled solver.
pub fn doubled_distance(
    dd: &DoubledDirac,
    s1: &SheetState,
    s2: &SheetState,
    cfg: &SolverConfig,
) -> Result<DistanceReport> {
    let solver = doubled_solver(dd, s1, s2, cfg)?;
    match doubled_closed_form(dd, s1, s2)? {
        Some(v) => {
            Ok(DistanceReport { value: v, method: Method::ClosedForm, gap: Some((v - solver.value).abs()), ..solver })
        }
        None => Ok(solver),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PythagorasCheck {
    /// squared doubled solver value, `s1` on sheet 1 and `s2` on sheet 2
    pub lhs: f64,
    /// `d_D^2 + 1/|Lambda|^2`
    pub rhs_equal: f64,
    pub rhs_lo: f64,
    pub rhs_hi: f64,
    /// single-sheet distance used on the right
    pub d_d: f64,
    /// true when both states lie in one family `C(omega_m)`
    pub same_family: bool,
}

impl PythagorasCheck {
    pub fn within_bracket(&self, tol: f64) -> bool {
        self.rhs_lo - tol <= self.lhs && self.lhs <= self.rhs_hi + tol
    }
}

pub fn pythagoras_check(dd: &DoubledDirac, s1: &QState, s2: &QState, cfg: &SolverConfig) -> Result<PythagorasCheck> {
    let a = SheetState { state: s1.clone(), sheet: Sheet::One };
    let b = SheetState { state: s2.clone(), sheet: Sheet::Two };
    let single = spectral::distance_solver(&dd.calc, s1, s2, cfg)?;
    let doubled = doubled_solver_from(dd, &a, &b, cfg, &single)?;
    let d_d = spectral::reference_distance(&dd.calc, s1, s2)?.unwrap_or(single.value);
    let rhs_equal = d_d * d_d + dd.inter_sheet().powi(2);
    Ok(PythagorasCheck {
        lhs: doubled.value * doubled.value,
        rhs_equal,
        rhs_lo: rhs_equal,
        rhs_hi: 2.0 * rhs_equal,
        d_d,
        same_family: same_family(s1, s2) || same_state(s1, s2, dd.calc.ctx().tol()),
    })
}

/// `alpha_{kappa/2} omega_m` and `alpha_{-kappa/2} omega_n`: the pair at
/// separation `kappa` with the least truncation leakage.
pub fn split_pair(ctx: crate::FockContext, m: usize, n: usize, kappa: f64) -> Result<(QState, QState)> {
    let half = c(kappa / 2.0);
    let t1 = StateTag::Translated { base: Box::new(StateTag::Eigen(m)), kappa: half };
    let t2 = StateTag::Translated { base: Box::new(StateTag::Eigen(n)), kappa: -half };
    Ok((fock::from_tag(ctx, &t1)?, fock::from_tag(ctx, &t2)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub pairs: Vec<(usize, usize)>,
    pub kappas: Vec<f64>,
    pub solver: SolverConfig,
}

/// Rows over `(m, n)` and `|kappa - kappa~|`: `d_D` against `d'_L`, and on
/// one family `d_L2` against `d_D'^2`.
///
/// `d_D` comes from the closed forms within a family or between untranslated
/// eigenstates, and from the solver (a lower bound) otherwise.
pub fn identification_sweep(dd: &DoubledDirac, lop: &LengthOperator, spec: &SweepSpec) -> Result<SweepTable> {
    if spec.pairs.is_empty() || spec.kappas.is_empty() {
        return Err(MoyalError::EmptyGrid);
    }
    let calc = &dd.calc;
    let ctx = *calc.ctx();
    same_ctx(&ctx, lop.ctx())?;
    let mut table = SweepTable::default();
    for &(m, n) in &spec.pairs {
        for &kappa in &spec.kappas {
            let (s1, s2) = split_pair(ctx, m, n, kappa)?;
            let d_l2 = lengthop::d_l2(lop, &s1, &s2)?;
            let d_l = lengthop::d_l(lop, &s1, &s2)?;
            let d_l_mod = lengthop::modified_length(lop, &s1, &s2)?;
            let (d_d, feasibility, route) = if m == n {
                (kappa.abs(), 1.0, Method::ClosedForm)
            } else if kappa == 0.0 {
                (spectral::eigenstate_distance(&ctx, m, n), 1.0, Method::ClosedForm)
            } else {
                let r = spectral::distance_solver(calc, &s1, &s2, &spec.solver)?;
                (r.value, r.feasibility, Method::ConvexSolver)
            };
            let d_dprime_sq = (m == n).then(|| d_d * d_d + dd.inter_sheet().powi(2));
            let family = if m == n { format!("C{m}") } else { format!("C{m}-C{n}") };
            table.rows.push(SweepRow {
                family,
                m,
                n,
                kappa,
                d_d,
                d_l,
                d_l2,
                d_l_mod,
                rel_gap: spectral::relative_gap(d_d, d_l_mod),
                feasibility,
                d_dprime_sq,
                route,
            });
        }
    }
    Ok(table)
}
