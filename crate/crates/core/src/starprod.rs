//! The Moyal star product, three ways.
//!
//! Through the matrix basis the product is matrix multiplication
//! ([`star_matrix`]). The two quadrature routes work directly on sampled
//! symbols and serve as independent oracles:
//!
//! * the double integral with kernel `exp((2i/theta) sigma(u, v))`
//!   ([`star_integral`]), which factorizes over the two coordinates so one
//!   evaluation costs three `M x M` matrix products;
//! * Fourier transform, twisted convolution with phase
//!   `exp(-i theta sigma(k', k)/2)`, inverse transform ([`FourierPair`]).
//!
//! Both kernel signs are those that reproduce the matrix route on the
//! symbols of `|1><0|` and `|0><1|`, with `[x1, x2] = i theta`.
//!
//! Symbols of matrices are `sigma_M(x) = 2 Tr(M D_x P D_x*)`, with `P` the
//! parity and `D_x` the translation by `x1 + i x2`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{MoyalError, Result};
use crate::fock::{self, Operator};
use crate::linalg::{self, c, CMat, I};

pub const DEFAULT_DECAY_THRESHOLD: f64 = 1e-8;

/// Uniform grid `-R, -R + h, ..., R` on each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    r: f64,
    h: f64,
    n: usize,
}

impl Grid {
    /// `2R/h` must be an even integer so the grid has a centre node and a
    /// half-resolution subgrid.
    pub fn new(r: f64, h: f64) -> Result<Grid> {
        if !(r > 0.0 && h > 0.0) {
            return Err(MoyalError::InvalidArgument(format!("grid needs R > 0 and h > 0, got R={r}, h={h}")));
        }
        let steps = 2.0 * r / h;
        let rounded = steps.round();
        if (steps - rounded).abs() > 1e-9 * steps.max(1.0) || !(rounded as usize).is_multiple_of(2) {
            return Err(MoyalError::InvalidArgument(format!("2R/h = {steps} is not an even integer")));
        }
        Ok(Grid { r, h, n: rounded as usize + 1 })
    }

    pub fn half_width(&self) -> f64 {
        self.r
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.r + i as f64 * self.h
    }

    fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Index of an interior node, if `x` is one.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let t = (x + self.r) / self.h;
        let i = t.round();
        if (t - i).abs() > 1e-9 || i < 1.0 || i > (self.n - 2) as f64 {
            return None;
        }
        Some(i as usize)
    }

    fn point_index(&self, x: (f64, f64)) -> Result<(usize, usize)> {
        match (self.index_of(x.0), self.index_of(x.1)) {
            (Some(i), Some(j)) => Ok((i, j)),
            _ => Err(MoyalError::OutsideGrid(x.0, x.1)),
        }
    }
}

/// Samples of a Schwartz function with a certificate of boundary decay.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSymbol {
    grid: Grid,
    /// `values[(i, j)] = f(node(i), node(j))`
    values: CMat,
    decay_cert: f64,
}

impl SampledSymbol {
    pub fn sample(grid: Grid, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        Self::sample_with_threshold(grid, f, DEFAULT_DECAY_THRESHOLD)
    }

    pub fn sample_with_threshold(grid: Grid, f: impl Fn(f64, f64) -> Complex64, threshold: f64) -> Result<Self> {
        let values = CMat::from_fn(grid.n, grid.n, |i, j| f(grid.node(i), grid.node(j)));
        Self::from_values(grid, values, threshold)
    }

    pub fn from_values(grid: Grid, values: CMat, threshold: f64) -> Result<Self> {
        if values.nrows() != grid.n || values.ncols() != grid.n {
            return Err(MoyalError::InvalidArgument("sample array does not match the grid".into()));
        }
        let last = grid.n - 1;
        let mut decay: f64 = 0.0;
        for i in 0..grid.n {
            for z in [values[(i, 0)], values[(i, last)], values[(0, i)], values[(last, i)]] {
                decay = decay.max(z.norm());
            }
        }
        if !(decay <= threshold) {
            return Err(MoyalError::DecayCertification { value: decay, threshold });
        }
        Ok(SampledSymbol { grid, values, decay_cert: decay })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &CMat {
        &self.values
    }

    pub fn decay_cert(&self) -> f64 {
        self.decay_cert
    }

    /// Value at a grid node.
    pub fn at(&self, x: (f64, f64)) -> Result<Complex64> {
        let (i, j) = self.grid.point_index(x)?;
        Ok(self.values[(i, j)])
    }

    /// `h^2 sum |f|`.
    fn l1(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum::<f64>() * self.grid.h * self.grid.h
    }

    /// Every other node.
    fn coarse(&self) -> SampledSymbol {
        let n = self.grid.center() + 1;
        let grid = Grid { r: self.grid.r, h: 2.0 * self.grid.h, n };
        let values = CMat::from_fn(n, n, |i, j| self.values[(2 * i, 2 * j)]);
        SampledSymbol { grid, values, decay_cert: self.decay_cert }
    }
}

/// A quadrature value with its error estimate: the difference to the same
/// rule at double spacing, plus a boundary term from the decay certificates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadValue {
    pub value: Complex64,
    pub error_bound: f64,
}

/// The star product transported to the matrix basis.
pub fn star_matrix(f: &Operator, g: &Operator) -> Result<Operator> {
    f.mul(g)
}

/// `sigma_M(x) = 2 Tr(M D_x P D_x*)`.
pub fn symbol_of(op: &Operator, x: (f64, f64)) -> Complex64 {
    let ctx = *op.ctx();
    let u = fock::translation_unitary(ctx, Complex64::new(x.0, x.1));
    let n = ctx.trunc_dim();
    let mut pu = u.adjoint();
    for i in (1..n).step_by(2) {
        pu.row_mut(i).neg_mut();
    }
    let m = &u * pu;
    linalg::trace_product(op.mat(), &m) * c(2.0)
}

fn same_grid(f: &SampledSymbol, g: &SampledSymbol) -> Result<()> {
    if f.grid != g.grid {
        return Err(MoyalError::InvalidArgument("symbols are sampled on different grids".into()));
    }
    Ok(())
}

/// `(1/(pi theta))^2 sum_{u,v} f(x+u) g(x+v) exp((2i/theta)(u1 v2 - u2 v1)) h^4`
fn star_sum(f: &SampledSymbol, g: &SampledSymbol, x: (f64, f64), theta: f64) -> Complex64 {
    let grid = f.grid;
    let n = grid.n;
    let k = 2.0 / theta;
    let off: Vec<f64> = (0..n).map(|i| grid.node(i)).collect();
    // E1[a, b] = exp(i k u1_a v2_b), E2[c, d] = exp(-i k u2_c v1_d)
    let e1 = CMat::from_fn(n, n, |a, b| (I * (k * (off[a] - x.0) * (off[b] - x.1))).exp());
    let e2 = CMat::from_fn(n, n, |cc, d| (-I * (k * (off[cc] - x.1) * (off[d] - x.0))).exp());
    let inner = &f.values * e2 * &g.values;
    let s: Complex64 = e1.iter().zip(inner.iter()).map(|(a, b)| a * b).sum();
    let h2 = grid.h * grid.h;
    s * (h2 * h2 / (PI * theta).powi(2))
}

/// Quadrature of the integral form of the Moyal product at a grid node.
pub fn star_integral(f: &SampledSymbol, g: &SampledSymbol, x: (f64, f64), theta: f64) -> Result<QuadValue> {
    same_grid(f, g)?;
    positive_theta(theta)?;
    f.grid.point_index(x)?;
    let fine = star_sum(f, g, x, theta);
    let coarse = star_sum(&f.coarse(), &g.coarse(), x, theta);
    let tail = (f.decay_cert * g.l1() + g.decay_cert * f.l1()) / (PI * theta).powi(2);
    let rounding = roundoff(f, g) / (PI * theta).powi(2);
    Ok(QuadValue { value: fine, error_bound: (fine - coarse).norm() + tail + rounding })
}

/// Accumulated rounding of an `M`-term inner sum over both factors.
fn roundoff(f: &SampledSymbol, g: &SampledSymbol) -> f64 {
    f64::EPSILON * f.grid.n as f64 * f.l1() * g.l1()
}

fn positive_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0) {
        return Err(MoyalError::InvalidArgument(format!("theta must be positive, got {theta}")));
    }
    Ok(())
}

/// `sum_{x'} F(x') G(x - x') exp(-i theta sigma(x', x)/2) h^2` at one node.
fn twisted_sum(f: &SampledSymbol, g: &SampledSymbol, ix: (usize, usize), theta: f64) -> Complex64 {
    let grid = f.grid;
    let n = grid.n as isize;
    let centre = grid.center() as isize;
    let x = (grid.node(ix.0), grid.node(ix.1));
    // sigma(x', x) = x'1 x2 - x'2 x1
    let p1: Vec<Complex64> = (0..grid.n).map(|a| (-I * (0.5 * theta * grid.node(a) * x.1)).exp()).collect();
    let p2: Vec<Complex64> = (0..grid.n).map(|b| (I * (0.5 * theta * grid.node(b) * x.0)).exp()).collect();
    let mut s = Complex64::new(0.0, 0.0);
    for a in 0..grid.n {
        let da = ix.0 as isize - a as isize + centre;
        if da < 0 || da >= n {
            continue;
        }
        let mut row = Complex64::new(0.0, 0.0);
        for b in 0..grid.n {
            let db = ix.1 as isize - b as isize + centre;
            if db < 0 || db >= n {
                continue;
            }
            row += f.values[(a, b)] * g.values[(da as usize, db as usize)] * p2[b];
        }
        s += row * p1[a];
    }
    s * (grid.h * grid.h)
}

/// Twisted convolution `int F(x') G(x - x') exp(-i theta sigma(x', x)/2) dx'`
/// at a grid node; `theta = 0` gives the ordinary convolution.
pub fn twisted_convolution(f: &SampledSymbol, g: &SampledSymbol, x: (f64, f64), theta: f64) -> Result<QuadValue> {
    same_grid(f, g)?;
    let ix = f.grid.point_index(x)?;
    let fine = twisted_sum(f, g, ix, theta);
    let err = if ix.0 % 2 == 0 && ix.1 % 2 == 0 {
        let coarse = twisted_sum(&f.coarse(), &g.coarse(), (ix.0 / 2, ix.1 / 2), theta);
        (fine - coarse).norm()
    } else {
        f64::NAN
    };
    let tail = f.decay_cert * g.l1() + g.decay_cert * f.l1();
    Ok(QuadValue { value: fine, error_bound: err + tail + roundoff(f, g) })
}

/// `F[f](k) = int f(x) exp(-i k.x) dx` sampled on a frequency grid.
pub fn fourier_transform(f: &SampledSymbol, dual: Grid) -> Result<SampledSymbol> {
    let grid = f.grid;
    let e = CMat::from_fn(dual.n, grid.n, |p, a| (-I * (dual.node(p) * grid.node(a))).exp() * grid.h);
    let values = &e * &f.values * e.transpose();
    SampledSymbol::from_values(dual, values, DEFAULT_DECAY_THRESHOLD)
}

/// The Fourier route `f * g = F^-1[F[f] x F[g]]` with the twisted
/// convolution in the middle.
#[derive(Debug, Clone)]
pub struct FourierPair {
    fh: SampledSymbol,
    gh: SampledSymbol,
}

impl FourierPair {
    pub fn new(f: &SampledSymbol, g: &SampledSymbol, dual: Grid) -> Result<Self> {
        same_grid(f, g)?;
        Ok(FourierPair { fh: fourier_transform(f, dual)?, gh: fourier_transform(g, dual)? })
    }

    /// Frequency grid with spacing `pi/R` (so the inverse transform is
    /// periodic with period `2R`) and the given half-width.
    pub fn dual_grid(grid: &Grid, half_width: f64) -> Result<Grid> {
        let dk = PI / grid.r;
        let steps = (half_width / dk).ceil();
        Grid::new(steps * dk, dk)
    }

    fn product_spectrum(fh: &SampledSymbol, gh: &SampledSymbol, theta: f64) -> CMat {
        let n = fh.grid.n;
        let norm = 1.0 / (2.0 * PI).powi(2);
        CMat::from_fn(n, n, |i, j| twisted_sum(fh, gh, (i, j), theta) * norm)
    }

    fn inverse_at(spec: &CMat, grid: &Grid, x: (f64, f64)) -> Complex64 {
        let n = grid.n;
        let e1: Vec<Complex64> = (0..n).map(|i| (I * (grid.node(i) * x.0)).exp()).collect();
        let e2: Vec<Complex64> = (0..n).map(|j| (I * (grid.node(j) * x.1)).exp()).collect();
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += spec[(i, j)] * e2[j];
            }
            s += row * e1[i];
        }
        s * (grid.h * grid.h / (2.0 * PI).powi(2))
    }

    /// `(f * g)(x)` at each point, with error estimates from the same route
    /// on the half-resolution frequency grid.
    pub fn star_at(&self, points: &[(f64, f64)], theta: f64) -> Vec<QuadValue> {
        let fine = Self::product_spectrum(&self.fh, &self.gh, theta);
        let (fc, gc) = (self.fh.coarse(), self.gh.coarse());
        let coarse = Self::product_spectrum(&fc, &gc, theta);
        let tail = self.fh.decay_cert * self.gh.l1() + self.gh.decay_cert * self.fh.l1();
        points
            .iter()
            .map(|&x| {
                let v = Self::inverse_at(&fine, &self.fh.grid, x);
                let w = Self::inverse_at(&coarse, &fc.grid, x);
                QuadValue { value: v, error_bound: (v - w).norm() + tail }
            })
            .collect()
    }
}

/// `exp(-a |x - c|^2)`.
pub fn gaussian(a: f64, centre: (f64, f64)) -> impl Fn(f64, f64) -> Complex64 {
    move |x1, x2| c((-a * ((x1 - centre.0).powi(2) + (x2 - centre.1).powi(2))).exp())
}

/// Symbol of the vacuum projector, `2 exp(-r^2/theta)`.
pub fn vacuum_symbol(theta: f64) -> impl Fn(f64, f64) -> Complex64 {
    move |x1, x2| c(2.0 * (-(x1 * x1 + x2 * x2) / theta).exp())
}

/// Symbol of `|1><0|` (`raising`) or `|0><1|`: `(4/sqrt theta) zbar exp(-r^2/theta)`
/// and its conjugate, `z = (x1 + i x2)/sqrt2`.
pub fn ladder_symbol(theta: f64, raising: bool) -> impl Fn(f64, f64) -> Complex64 {
    move |x1, x2| {
        let z = Complex64::new(x1, x2) / 2f64.sqrt();
        let z = if raising { z.conj() } else { z };
        z * (4.0 / theta.sqrt() * (-(x1 * x1 + x2 * x2) / theta).exp())
    }
}

/// Symbol of `|1><1|`, `2 (2 r^2/theta - 1) exp(-r^2/theta)`.
pub fn first_level_symbol(theta: f64) -> impl Fn(f64, f64) -> Complex64 {
    move |x1, x2| {
        let r2 = x1 * x1 + x2 * x2;
        c(2.0 * (2.0 * r2 / theta - 1.0) * (-r2 / theta).exp())
    }
}

/// `exp(-a r^2) * exp(-b r^2) = exp(-(a+b) r^2 / (1 + a b theta^2)) / (1 + a b theta^2)`.
pub fn gaussian_star_closed_form(a: f64, b: f64, theta: f64, r2: f64) -> f64 {
    let d = 1.0 + a * b * theta * theta;
    (-(a + b) * r2 / d).exp() / d
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub thetas: Vec<f64>,
    /// `max |f*g - g*f|` over the probe points
    pub norms: Vec<f64>,
    /// least-squares slope of `log norm` against `log theta`
    pub slope: f64,
}

/// Size of the commutator `f*g - g*f` as `theta` shrinks, through the
/// Fourier route.
pub fn noncommutativity_witness(
    f: &SampledSymbol,
    g: &SampledSymbol,
    dual: Grid,
    points: &[(f64, f64)],
    thetas: &[f64],
) -> Result<Witness> {
    if thetas.len() < 2 || points.is_empty() {
        return Err(MoyalError::EmptyGrid);
    }
    let fg = FourierPair::new(f, g, dual)?;
    let gf = FourierPair::new(g, f, dual)?;
    let mut norms = Vec::with_capacity(thetas.len());
    for &t in thetas {
        let a = fg.star_at(points, t);
        let b = gf.star_at(points, t);
        norms.push(a.iter().zip(&b).map(|(x, y)| (x.value - y.value).norm()).fold(0.0, f64::max));
    }
    let xs: Vec<f64> = thetas.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    Ok(Witness { thetas: thetas.to_vec(), norms, slope: fit_slope(&xs, &ys) })
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `|(f*g)(x) - f(x) g(x)|` for each `theta`, through the Fourier route.
pub fn commutative_limit(
    f: &SampledSymbol,
    g: &SampledSymbol,
    dual: Grid,
    x: (f64, f64),
    thetas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let pair = FourierPair::new(f, g, dual)?;
    let pointwise = f.at(x)? * g.at(x)?;
    Ok(thetas.iter().map(|&t| (t, (pair.star_at(&[x], t)[0].value - pointwise).norm())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::make_context;

    fn grid() -> Grid {
        Grid::new(8.0, 1.0 / 16.0).unwrap()
    }

    #[test]
    fn grid_rules() {
        let g = grid();
        assert_eq!(g.len(), 257);
        assert_eq!(g.index_of(0.0), Some(128));
        assert_eq!(g.index_of(0.03), None);
        assert_eq!(g.index_of(8.0), None);
        assert!(Grid::new(1.0, 0.3).is_err());
    }

    #[test]
    fn decay_certification() {
        let g = Grid::new(2.0, 0.25).unwrap();
        let err = SampledSymbol::sample(g, gaussian(1.0, (0.0, 0.0))).unwrap_err();
        assert!(matches!(err, MoyalError::DecayCertification { .. }));
        let s = SampledSymbol::sample(grid(), gaussian(1.0, (0.0, 0.0))).unwrap();
        assert!(s.decay_cert() < 1e-20);
        assert!(matches!(s.at((8.0, 0.0)), Err(MoyalError::OutsideGrid(..))));
    }

    #[test]
    fn matrix_route_examples() {
        let ctx = make_context(8, 1.0, 1e-10).unwrap();
        let e0 = Operator::vacuum_projector(ctx);
        assert_eq!(star_matrix(&e0, &e0).unwrap(), e0);
        let a = fock::annihilation(ctx);
        let ad = fock::creation(ctx);
        let comm = star_matrix(&a, &ad).unwrap().sub(&star_matrix(&ad, &a).unwrap()).unwrap();
        let k = ctx.interior();
        let id = CMat::identity(k, k);
        assert!(linalg::max_abs(&(linalg::top_left(comm.mat(), k) - id)) < 1e-14);
    }

    #[test]
    fn symbol_map_matches_closed_forms() {
        let ctx = make_context(48, 1.3, 1e-10).unwrap();
        for x in [(0.3, 0.2), (-0.5, 0.7), (1.0, -1.2)] {
            let e0 = symbol_of(&Operator::vacuum_projector(ctx), x);
            assert!((e0 - vacuum_symbol(1.3)(x.0, x.1)).norm() < 1e-10);
            let e10 = symbol_of(&Operator::matrix_unit(ctx, 1, 0), x);
            assert!((e10 - ladder_symbol(1.3, true)(x.0, x.1)).norm() < 1e-10);
            let e11 = symbol_of(&Operator::matrix_unit(ctx, 1, 1), x);
            assert!((e11 - first_level_symbol(1.3)(x.0, x.1)).norm() < 1e-10);
        }
    }

    #[test]
    fn integral_route_on_vacuum_and_ladder_symbols() {
        let g = grid();
        let ctx = make_context(48, 1.0, 1e-10).unwrap();
        let f0 = SampledSymbol::sample(g, vacuum_symbol(1.0)).unwrap();
        let e0 = Operator::vacuum_projector(ctx);
        let x = (0.5, -0.25);
        let q = star_integral(&f0, &f0, x, 1.0).unwrap();
        let m = symbol_of(&star_matrix(&e0, &e0).unwrap(), x);
        assert!((q.value - m).norm() <= q.error_bound.max(1e-12), "{q:?} vs {m}");
        assert!(q.error_bound <= 1e-5);
        // the ordering of |1><0| and |0><1| fixes the kernel sign
        let up = SampledSymbol::sample(g, ladder_symbol(1.0, true)).unwrap();
        let down = SampledSymbol::sample(g, ladder_symbol(1.0, false)).unwrap();
        let x = (0.25, 0.5);
        let q = star_integral(&up, &down, x, 1.0).unwrap();
        let want =
            symbol_of(&star_matrix(&Operator::matrix_unit(ctx, 1, 0), &Operator::matrix_unit(ctx, 0, 1)).unwrap(), x);
        assert!((q.value - want).norm() < 1e-8, "{q:?} vs {want}");
        assert!((want - first_level_symbol(1.0)(x.0, x.1)).norm() < 1e-10);
    }

    #[test]
    fn integral_route_on_gaussians() {
        let g = grid();
        let (a, b) = (0.7, 1.6);
        let f = SampledSymbol::sample(g, gaussian(a, (0.0, 0.0))).unwrap();
        let h = SampledSymbol::sample(g, gaussian(b, (0.0, 0.0))).unwrap();
        let x = (0.75, -0.5);
        let q = star_integral(&f, &h, x, 1.0).unwrap();
        let want = gaussian_star_closed_form(a, b, 1.0, x.0 * x.0 + x.1 * x.1);
        assert!((q.value - want).norm() < 1e-9);
    }

    #[test]
    fn unit_of_the_product() {
        let g = grid();
        let window = |x1: f64, x2: f64| c((-((x1 * x1 + x2 * x2).sqrt() / 6.0).powi(16)).exp());
        let one = SampledSymbol::sample(g, window).unwrap();
        let f = SampledSymbol::sample(g, gaussian(1.0, (0.25, 0.0))).unwrap();
        let x = (0.5, 0.25);
        let q = star_integral(&f, &one, x, 1.0).unwrap();
        let fx = f.at(x).unwrap();
        assert!((q.value - fx).norm() < q.error_bound + 1e-6, "{q:?} vs {fx}");
    }

    #[test]
    fn twisted_convolution_examples() {
        let g = Grid::new(8.0, 1.0 / 8.0).unwrap();
        let (a, b) = (1.0, 0.5);
        let f = SampledSymbol::sample(g, gaussian(a, (0.0, 0.0))).unwrap();
        let h = SampledSymbol::sample(g, gaussian(b, (0.0, 0.0))).unwrap();
        let x = (1.0, 0.5);
        let q = twisted_convolution(&f, &h, x, 0.0).unwrap();
        let r2 = x.0 * x.0 + x.1 * x.1;
        let want = PI / (a + b) * (-a * b * r2 / (a + b)).exp();
        assert!((q.value - want).norm() < 1e-10);
        let q0 = twisted_convolution(&f, &f, (0.0, 0.0), 1.0).unwrap();
        assert!(q0.value.im.abs() < 1e-14);
    }

    #[test]
    fn fourier_round_trip() {
        let g = grid();
        let f = SampledSymbol::sample(g, gaussian(1.0, (0.5, 0.0))).unwrap();
        let h = SampledSymbol::sample(g, gaussian(0.8, (0.0, -0.5))).unwrap();
        let dual = FourierPair::dual_grid(&g, 12.0).unwrap();
        let pair = FourierPair::new(&f, &h, dual).unwrap();
        let pts = [(0.25, 0.25), (-0.5, 0.75)];
        let four = pair.star_at(&pts, 1.0);
        for (x, fv) in pts.iter().zip(&four) {
            let q = star_integral(&f, &h, *x, 1.0).unwrap();
            assert!((q.value - fv.value).norm() < 1e-6, "{q:?} vs {fv:?}");
        }
    }

    #[test]
    fn witness_scales_linearly() {
        let g = Grid::new(8.0, 1.0 / 8.0).unwrap();
        let f = SampledSymbol::sample(g, gaussian(1.0, (0.5, 0.0))).unwrap();
        let h = SampledSymbol::sample(g, gaussian(1.0, (0.0, 0.5))).unwrap();
        let dual = FourierPair::dual_grid(&g, 12.0).unwrap();
        let w =
            noncommutativity_witness(&f, &h, dual, &[(0.25, 0.25), (0.0, 0.0)], &[0.1, 0.05, 0.025, 0.0125]).unwrap();
        assert!((w.slope - 1.0).abs() < 0.05, "{w:?}");
        let lim = commutative_limit(&f, &h, dual, (0.25, 0.25), &[0.4, 0.2, 0.1, 0.05]).unwrap();
        assert!(lim.windows(2).all(|p| p[1].1 < p[0].1), "{lim:?}");
    }
}
