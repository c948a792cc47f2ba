//! The length operator on the two-point tensor space.
//!
//! `L^2 = 2(H (x) 1 + 1 (x) H - a (x) a* - a* (x) a)` acts on `|m> (x) |n>`.
//! Both hopping terms move one quantum between the factors, so `L^2`
//! preserves the total level `s = m + n`: it is block diagonal with one real
//! symmetric tridiagonal block per sector. This holds exactly on the
//! truncated space as well, which lets us work with `2N - 1` blocks of size
//! at most `N` instead of an `N^2 x N^2` matrix.

use num_complex::Complex64;

use crate::error::{MoyalError, Result};
use crate::fock::{self, same_ctx, FockContext, QState};
use crate::linalg::{self, RMat};

/// Default ceiling on `N` for [`build_length`].
pub const MAX_TRUNC_DIM: usize = 96;

#[derive(Debug, Clone)]
struct Sector {
    /// smallest first-factor level `m` in the sector
    first_m: usize,
    total: usize,
    l2: RMat,
    l: RMat,
}

impl Sector {
    fn len(&self) -> usize {
        self.l2.nrows()
    }

    fn level(&self, i: usize) -> (usize, usize) {
        let m = self.first_m + i;
        (m, self.total - m)
    }
}

#[derive(Debug, Clone)]
pub struct LengthOperator {
    ctx: FockContext,
    sectors: Vec<Sector>,
    spectrum: Vec<f64>,
    min_raw: f64,
}

pub fn build_length(ctx: FockContext) -> Result<LengthOperator> {
    build_length_with_budget(ctx, MAX_TRUNC_DIM)
}

pub fn build_length_with_budget(ctx: FockContext, max_dim: usize) -> Result<LengthOperator> {
    let n = ctx.trunc_dim();
    if n > max_dim {
        return Err(MoyalError::TooLarge { dim: n, max: max_dim });
    }
    let theta = ctx.theta();
    let mut sectors = Vec::with_capacity(2 * n - 1);
    let mut spectrum = Vec::with_capacity(n * n);
    let mut min_raw = f64::INFINITY;
    for total in 0..(2 * n - 1) {
        let first_m = total.saturating_sub(n - 1);
        let last_m = total.min(n - 1);
        let len = last_m - first_m + 1;
        let mut l2 = RMat::zeros(len, len);
        for i in 0..len {
            let m = first_m + i;
            let nn = total - m;
            l2[(i, i)] = 2.0 * (ctx.energy(m) + ctx.energy(nn));
            if i > 0 {
                // <m-1, n+1| a (x) a* |m, n> = theta sqrt(m (n+1))
                let hop = -2.0 * theta * ((m * (nn + 1)) as f64).sqrt();
                l2[(i, i - 1)] = hop;
                l2[(i - 1, i)] = hop;
            }
        }
        let (values, vectors) = linalg::hermitian_eigen(&l2);
        min_raw = min_raw.min(values[0]);
        if values[0] < -ctx.tol() {
            return Err(MoyalError::InvalidArgument(format!(
                "L^2 block {total} has negative eigenvalue {:.3e}",
                values[0]
            )));
        }
        let mut scaled = vectors.clone();
        for (k, v) in values.iter().enumerate() {
            // clamp tiny negatives from rounding
            let s = v.max(0.0).sqrt();
            scaled.column_mut(k).scale_mut(s);
            spectrum.push(v.max(0.0));
        }
        let l = &scaled * vectors.transpose();
        sectors.push(Sector { first_m, total, l2, l });
    }
    spectrum.sort_by(f64::total_cmp);
    Ok(LengthOperator { ctx, sectors, spectrum, min_raw })
}

impl LengthOperator {
    pub fn ctx(&self) -> &FockContext {
        &self.ctx
    }

    /// Ascending eigenvalues of `L^2`.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn min_l2(&self) -> f64 {
        self.spectrum[0]
    }

    /// Smallest eigenvalue before clamping.
    pub fn min_l2_raw(&self) -> f64 {
        self.min_raw
    }

    /// `min Sp(L) = sqrt(min Sp(L^2))`.
    pub fn min_l(&self) -> f64 {
        self.min_l2().sqrt()
    }

    /// `max |L L - L^2|` over all sectors.
    pub fn sqrt_residual(&self) -> f64 {
        self.sectors.iter().map(|s| (&s.l * &s.l - &s.l2).abs().max()).fold(0.0, f64::max)
    }

    /// `<m,n| L^2 |m',n'>`.
    pub fn l2_entry(&self, m: usize, n: usize, mp: usize, np: usize) -> f64 {
        self.entry(m, n, mp, np, |s| &s.l2)
    }

    pub fn l_entry(&self, m: usize, n: usize, mp: usize, np: usize) -> f64 {
        self.entry(m, n, mp, np, |s| &s.l)
    }

    fn entry(&self, m: usize, n: usize, mp: usize, np: usize, pick: impl Fn(&Sector) -> &RMat) -> f64 {
        if m + n != mp + np {
            return 0.0;
        }
        let s = &self.sectors[m + n];
        pick(s)[(m - s.first_m, mp - s.first_m)]
    }

    /// Dense `N^2 x N^2` matrix of `L^2` in the basis `|m> (x) |n>` (index `m N + n`).
    pub fn dense_l2(&self) -> RMat {
        self.dense(|s| &s.l2)
    }

    pub fn dense_l(&self) -> RMat {
        self.dense(|s| &s.l)
    }

    fn dense(&self, pick: impl Fn(&Sector) -> &RMat) -> RMat {
        let n = self.ctx.trunc_dim();
        let mut out = RMat::zeros(n * n, n * n);
        for s in &self.sectors {
            let b = pick(s);
            for i in 0..s.len() {
                let (m, nn) = s.level(i);
                for j in 0..s.len() {
                    let (mp, np) = s.level(j);
                    out[(m * n + nn, mp * n + np)] = b[(i, j)];
                }
            }
        }
        out
    }

    /// `Tr((rho1 (x) rho2) B)` for `B` one of the block families.
    fn pair_trace(&self, s1: &QState, s2: &QState, pick: impl Fn(&Sector) -> &RMat) -> Result<f64> {
        same_ctx(&self.ctx, s1.ctx())?;
        same_ctx(&self.ctx, s2.ctx())?;
        for s in [s1, s2] {
            let leak = s.leakage();
            if leak > self.ctx.leakage_bound() {
                return Err(MoyalError::Leakage { leakage: leak, bound: self.ctx.leakage_bound() });
            }
        }
        let (r1, r2) = (s1.rho(), s2.rho());
        let mut acc = Complex64::new(0.0, 0.0);
        for s in &self.sectors {
            let b = pick(s);
            for i in 0..s.len() {
                let (m, n) = s.level(i);
                for j in 0..s.len() {
                    let (mp, np) = s.level(j);
                    acc += r1[(m, mp)] * r2[(n, np)] * b[(j, i)];
                }
            }
        }
        Ok(acc.re)
    }
}

/// Quantum square-length `(omega1 (x) omega2)(L^2)`.
pub fn d_l2(lop: &LengthOperator, s1: &QState, s2: &QState) -> Result<f64> {
    lop.pair_trace(s1, s2, |s| &s.l2)
}

/// Quantum length `(omega1 (x) omega2)(L)`.
pub fn d_l(lop: &LengthOperator, s1: &QState, s2: &QState) -> Result<f64> {
    lop.pair_trace(s1, s2, |s| &s.l)
}

/// `Lambda^{-2}(omega1, omega2) = sqrt(d_L2(omega1, omega1) d_L2(omega2, omega2))`.
pub fn diagonal_scale(lop: &LengthOperator, s1: &QState, s2: &QState) -> Result<f64> {
    Ok((d_l2(lop, s1, s1)? * d_l2(lop, s2, s2)?).sqrt())
}

/// Modified quantum length `sqrt|d_L2 - Lambda^{-2}|`; zero on the diagonal.
pub fn modified_length(lop: &LengthOperator, s1: &QState, s2: &QState) -> Result<f64> {
    Ok((d_l2(lop, s1, s2)? - diagonal_scale(lop, s1, s2)?).abs().sqrt())
}

/// `2E_m + 2E_n + |kappa - kappa~|^2` for `alpha_kappa omega_m`, `alpha_kappa~ omega_n`.
pub fn closed_form_l2(ctx: &FockContext, m: usize, kappa: Complex64, n: usize, kappa_t: Complex64) -> f64 {
    2.0 * ctx.energy(m) + 2.0 * ctx.energy(n) + (kappa - kappa_t).norm_sqr()
}

/// Closed-form modified length on generalized coherent states.
pub fn closed_form_modified(ctx: &FockContext, m: usize, kappa: Complex64, n: usize, kappa_t: Complex64) -> f64 {
    let lambda2 = 4.0 * (ctx.energy(m) * ctx.energy(n)).sqrt();
    (closed_form_l2(ctx, m, kappa, n, kappa_t) - lambda2).abs().sqrt()
}

/// The two readings of the minimal length: `min sqrt(Sp(L^2))` and `d_L(omega_0, omega_0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanckLengths {
    pub min_spectrum: f64,
    pub ground_length: f64,
    pub ground_square_length: f64,
}

pub fn planck_lengths(lop: &LengthOperator) -> Result<PlanckLengths> {
    let w0 = fock::eigenstate(lop.ctx, 0)?;
    Ok(PlanckLengths {
        min_spectrum: lop.min_l(),
        ground_length: d_l(lop, &w0, &w0)?,
        ground_square_length: d_l2(lop, &w0, &w0)?,
    })
}

/// Both sides of the linearity relation a square-length operator `L'^2`
/// would force on `d'_L^2`, from closed forms and from tensor traces.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub indices: [usize; 4],
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub numeric_lhs: f64,
    pub numeric_rhs: f64,
    /// largest `|closed form - tensor trace|` over the seven `d'_L^2` terms
    pub max_term_gap: f64,
}

pub fn counterexample_l2prime(lop: &LengthOperator, i: usize, j: usize, k: usize, l: usize) -> Result<Counterexample> {
    let idx = [i, j, k, l];
    for a in 0..4 {
        for b in (a + 1)..4 {
            if idx[a].abs_diff(idx[b]) < 2 {
                return Err(MoyalError::IndexConstraint(format!(
                    "indices {} and {} differ by less than 2",
                    idx[a], idx[b]
                )));
            }
        }
    }
    let ctx = lop.ctx;
    for &x in &idx {
        if x >= ctx.interior() {
            return Err(MoyalError::OutOfRange { index: x, limit: ctx.interior() });
        }
    }
    let e = |m: usize| ctx.energy(m);
    let sq = |x: f64| x * x;
    let el = (2.0 * e(l)).sqrt();
    // d'_L^2 closed forms
    let single = |p: usize| sq((2.0 * e(p)).sqrt() - el);
    let pair = |p: usize, q: usize| sq((e(p) + e(q)).sqrt() - el);
    let triple = sq((2.0 / 3.0 * (e(i) + e(j) + e(k))).sqrt() - el);

    let lhs = 3.0 * triple;
    let rhs = 2.0 * (pair(i, j) + pair(i, k) + pair(j, k)) - (single(i) + single(j) + single(k));

    let one = Complex64::new(1.0, 0.0);
    let wl = fock::eigenstate(ctx, l)?;
    let numeric = |indices: &[usize]| -> Result<f64> {
        let coeffs = vec![one; indices.len()];
        let s = fock::superposition_state(ctx, indices, &coeffs)?;
        Ok(sq(modified_length(lop, &s, &wl)?))
    };
    let terms = [
        (numeric(&[i, j, k])?, triple),
        (numeric(&[i, j])?, pair(i, j)),
        (numeric(&[i, k])?, pair(i, k)),
        (numeric(&[j, k])?, pair(j, k)),
        (numeric(&[i])?, single(i)),
        (numeric(&[j])?, single(j)),
        (numeric(&[k])?, single(k)),
    ];
    let max_term_gap = terms.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let t: Vec<f64> = terms.iter().map(|(a, _)| *a).collect();
    let numeric_lhs = 3.0 * t[0];
    let numeric_rhs = 2.0 * (t[1] + t[2] + t[3]) - (t[4] + t[5] + t[6]);
    Ok(Counterexample { indices: idx, lhs, rhs, residual: lhs - rhs, numeric_lhs, numeric_rhs, max_term_gap })
}

/// A value computed at `N` and re-computed at `N/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Converged {
    pub value: f64,
    pub half_value: f64,
    pub diff: f64,
    pub tolerance: f64,
    pub ok: bool,
}

/// Accepts when the two truncations agree to within ten times `quoted_tol`.
pub fn convergence_check(
    ctx: &FockContext,
    quoted_tol: f64,
    f: impl Fn(&FockContext) -> Result<f64>,
) -> Result<Converged> {
    let value = f(ctx)?;
    let half_value = f(&ctx.halved()?)?;
    let diff = (value - half_value).abs();
    Ok(Converged { value, half_value, diff, tolerance: quoted_tol, ok: diff < 10.0 * quoted_tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, displace, eigenstate, hamiltonian, make_context};
    use nalgebra::DMatrix;

    fn ctx(n: usize) -> FockContext {
        make_context(n, 1.0, 1e-10).unwrap()
    }

    fn kron(x: &RMat, y: &RMat) -> RMat {
        x.kronecker(y)
    }

    #[test]
    fn sector_blocks_match_kronecker_assembly() {
        let cx = make_context(8, 1.7, 1e-10).unwrap();
        let lop = build_length(cx).unwrap();
        let h = hamiltonian(cx).mat().map(|z| z.re);
        let a = annihilation(cx).mat().map(|z| z.re);
        let id = DMatrix::<f64>::identity(8, 8);
        let want = (kron(&h, &id) + kron(&id, &h) - kron(&a, &a.transpose()) - kron(&a.transpose(), &a)) * 2.0;
        assert!((lop.dense_l2() - want).abs().max() < 1e-12);
    }

    #[test]
    fn minimal_eigenvalue_and_scale_covariance() {
        let lop = build_length(ctx(32)).unwrap();
        assert!((lop.min_l2() - 2.0).abs() < 1e-6);
        assert!((lop.l2_entry(0, 0, 0, 0) - 2.0).abs() < 1e-15);
        assert!(lop.sqrt_residual() < 100.0 * 1e-10);
        let lop4 = build_length(make_context(32, 4.0, 1e-10).unwrap()).unwrap();
        assert!((lop4.min_l2() - 8.0).abs() < 4e-6);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(build_length_with_budget(ctx(64), 32), Err(MoyalError::TooLarge { .. })));
    }

    #[test]
    fn square_length_examples() {
        let cx = ctx(64);
        let lop = build_length(cx).unwrap();
        let w0 = eigenstate(cx, 0).unwrap();
        assert!((d_l2(&lop, &w0, &w0).unwrap() - 2.0).abs() < 1e-12);
        let w1 = eigenstate(cx, 1).unwrap();
        let moved = displace(&eigenstate(cx, 2).unwrap(), Complex64::new(2.0, 0.0)).unwrap();
        assert!((d_l2(&lop, &w1, &moved).unwrap() - 12.0).abs() < 1e-8);
    }

    #[test]
    fn length_examples() {
        let cx = ctx(48);
        let lop = build_length(cx).unwrap();
        let w0 = eigenstate(cx, 0).unwrap();
        let w1 = eigenstate(cx, 1).unwrap();
        assert!((d_l(&lop, &w0, &w0).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(d_l(&lop, &w1, &w1).unwrap() < 6f64.sqrt() - 1e-3);
        let moved = displace(&w0, Complex64::new(1.0, 1.0)).unwrap();
        let dl = d_l(&lop, &w0, &moved).unwrap();
        assert!(dl < (2.0 + 2.0f64).sqrt() - 1e-6);
    }

    #[test]
    fn modified_length_examples() {
        let cx = ctx(64);
        let lop = build_length(cx).unwrap();
        let w1 = eigenstate(cx, 1).unwrap();
        let w2 = eigenstate(cx, 2).unwrap();
        assert!(modified_length(&lop, &w2, &w2).unwrap() < 1e-7);
        let want = 5f64.sqrt() - 3f64.sqrt();
        assert!((modified_length(&lop, &w1, &w2).unwrap() - want).abs() < 1e-12);
        let w0 = eigenstate(cx, 0).unwrap();
        let moved = displace(&w0, Complex64::new(0.0, 2.0)).unwrap();
        assert!((modified_length(&lop, &w0, &moved).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn counterexample_values() {
        let lop = build_length(ctx(32)).unwrap();
        let ce = counterexample_l2prime(&lop, 0, 2, 4, 6).unwrap();
        // direct arithmetic with E_m = m + 1/2:
        // lhs = 3 (sqrt 5 - sqrt 13)^2,
        // rhs = 2[(sqrt3-sqrt13)^2 + (sqrt5-sqrt13)^2 + (sqrt7-sqrt13)^2]
        //       - [(1-sqrt13)^2 + (sqrt5-sqrt13)^2 + (3-sqrt13)^2]
        let s13 = 13f64.sqrt();
        let sq = |x: f64| x * x;
        let lhs = 3.0 * sq(5f64.sqrt() - s13);
        let rhs = 2.0 * (sq(3f64.sqrt() - s13) + sq(5f64.sqrt() - s13) + sq(7f64.sqrt() - s13))
            - (sq(1.0 - s13) + sq(5f64.sqrt() - s13) + sq(3.0 - s13));
        assert!((ce.lhs - lhs).abs() < 1e-12 && (ce.rhs - rhs).abs() < 1e-12);
        assert!((ce.lhs - 5.62645).abs() < 1e-5);
        assert!((ce.rhs - 3.58233).abs() < 1e-5);
        assert!((ce.residual - 2.04412).abs() < 1e-5);
        assert!(ce.max_term_gap < 1e-6);
        assert!((ce.numeric_lhs - ce.numeric_rhs - ce.residual).abs() < 1e-6);
        assert!(matches!(counterexample_l2prime(&lop, 0, 1, 4, 6), Err(MoyalError::IndexConstraint(_))));
    }

    #[test]
    fn convergence_in_n_on_translated_pair() {
        let cx = ctx(64);
        let run = |c: &FockContext| -> Result<f64> {
            let lop = build_length(*c)?;
            let s1 = displace(&eigenstate(*c, 1)?, Complex64::new(0.5, 0.0))?;
            let s2 = eigenstate(*c, 2)?;
            d_l(&lop, &s1, &s2)
        };
        let conv = convergence_check(&cx, 1e-6, run).unwrap();
        assert!(conv.ok, "{conv:?}");
    }
}
