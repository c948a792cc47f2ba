use clap::{Parser, Subcommand, ValueEnum};
use moyal_core::criteria::{self, Profile};
use moyal_core::doubling::{self, DoubledDirac, SweepSpec};
use moyal_core::fock::{self, FockContext, Operator, QState, StateTag};
use moyal_core::lengthop::{self, build_length};
use moyal_core::linalg::CMat;
use moyal_core::spectral::{self, Certificate, ClosedFormKind, DiracCalculus, DistanceReport};
use moyal_core::starprod::{self, FourierPair, Grid, SampledSymbol};
use moyal_core::sweep::{self, VALUE_COLUMNS};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{ConfigArgs, RunConfig};
use crate::expr::parse_state;
use crate::output::{self, num, round, Csv};
use crate::plot::{self, Series};
use crate::{CliError, EXIT_ANOMALY, EXIT_OK};

/// Slack allowed on a certificate's seminorm before it counts as infeasible.
const FEASIBILITY_SLACK: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "moyal", version, about = "Spectral distance and quantum length on the Moyal plane")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Closed,
    Lp,
    Solver,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ElementKind {
    /// the linear element for a translation in direction `xi`
    Translation,
    /// the diagonal element separating eigenstates up to `upto`
    Eigen,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral distance between two states
    Distance {
        a: String,
        b: String,
        #[arg(long, value_enum, default_value = "all")]
        method: MethodArg,
        #[arg(long)]
        with_certificate: bool,
    },
    /// Quantum length, square-length and modified length of a pair
    Qlength { a: String, b: String },
    /// Low end of the spectrum of the length operator
    Spectrum {
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Doubled distance against the Pythagoras equality and bracket
    Pythagoras {
        /// reference family C(omega_m), fixing the inter-sheet distance
        #[arg(long, default_value_t = 0)]
        family: usize,
        /// second state is omega_n (default: the family's own eigenstate)
        #[arg(long)]
        partner: Option<usize>,
        /// translations, `a,b,c` or `a..b`
        #[arg(long, default_value = "0,0.5,1,2")]
        kappa: String,
        #[arg(long, default_value_t = 1.0)]
        kappa_step: f64,
    },
    /// Relative gap between d_D and d'_L along translation and energy
    Asymptotics {
        #[arg(long, default_value_t = 0)]
        family: usize,
        /// other eigenstates to pair with the family, `n1,n2,...`
        #[arg(long)]
        partners: Option<String>,
        #[arg(long, default_value = "0..10")]
        kappa: String,
        #[arg(long, default_value_t = 1.0)]
        kappa_step: f64,
        /// also write an SVG plot
        #[arg(long)]
        plot: bool,
    },
    /// Residual of the linearity relation a square-length L'^2 would impose
    Counterexample {
        #[arg(long, default_value = "0,2,4,6")]
        indices: String,
    },
    /// Eigenstate distance as a midpoint Riemann sum of the modified length
    Riemann {
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long)]
        plot: bool,
    },
    /// Star product through the matrix basis against the quadrature routes
    Oracle {
        #[arg(long, default_value_t = 8.0)]
        r: f64,
        #[arg(long, default_value_t = 0.0625)]
        h: f64,
        /// also measure the commutator f*g - g*f as theta shrinks
        #[arg(long)]
        witness: bool,
    },
    /// Optimal elements and their defect identities
    OptimalElement {
        #[arg(long, value_enum, default_value = "translation")]
        kind: ElementKind,
        #[arg(long, default_value_t = 0.0)]
        xi: f64,
        #[arg(long, default_value_t = 8)]
        upto: usize,
        #[arg(long)]
        with_certificate: bool,
    },
    /// Run the acceptance criteria
    Suite {
        #[arg(long)]
        quick: bool,
        /// criterion numbers, `1,5,9`
        #[arg(long)]
        only: Option<String>,
    },
}

pub fn run(cli: Cli) -> Result<u8, CliError> {
    let cfg = RunConfig::resolve(&cli.config)?;
    match cli.command {
        Command::Distance { a, b, method, with_certificate } => distance(&cfg, &a, &b, method, with_certificate),
        Command::Qlength { a, b } => qlength(&cfg, &a, &b),
        Command::Spectrum { count } => spectrum(&cfg, count),
        Command::Pythagoras { family, partner, kappa, kappa_step } => {
            pythagoras(&cfg, family, partner.unwrap_or(family), &parse_grid(&kappa, kappa_step)?)
        }
        Command::Asymptotics { family, partners, kappa, kappa_step, plot } => {
            let partners = match partners {
                Some(p) => parse_list::<usize>(&p)?,
                None => Vec::new(),
            };
            asymptotics(&cfg, family, &partners, &parse_grid(&kappa, kappa_step)?, plot)
        }
        Command::Counterexample { indices } => counterexample(&cfg, &indices),
        Command::Riemann { m, n_max, plot } => riemann(&cfg, m, n_max, plot),
        Command::Oracle { r, h, witness } => oracle(&cfg, r, h, witness),
        Command::OptimalElement { kind, xi, upto, with_certificate } => {
            optimal_element(&cfg, kind, xi, upto, with_certificate)
        }
        Command::Suite { quick, only } => suite(&cfg, quick, only.as_deref()),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| CliError::Usage(format!("bad list entry `{t}` in `{s}`"))))
        .collect()
}

/// `a,b,c` or `a..b` (inclusive, with the given step).
pub fn parse_grid(s: &str, step: f64) -> Result<Vec<f64>, CliError> {
    if let Some((a, b)) = s.split_once("..") {
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad range `{s}`")));
        let (a, b) = (parse(a)?, parse(b)?);
        if !(step > 0.0) || b < a {
            return Err(CliError::Usage(format!("empty range `{s}` with step {step}")));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + i as f64 * step).collect());
    }
    parse_list(s)
}

fn build_state(ctx: FockContext, expr: &str) -> Result<QState, CliError> {
    Ok(fock::from_tag(ctx, &parse_state(expr)?)?)
}

fn matrix_json(m: &CMat) -> Value {
    let rows = |f: &dyn Fn(Complex64) -> f64| -> Vec<Vec<Value>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| round(f(m[(i, j)]))).collect()).collect()
    };
    json!({ "re": rows(&|z| z.re), "im": rows(&|z| z.im) })
}

fn certificate_json(cert: &Certificate) -> Value {
    match cert {
        Certificate::Operator(op) => json!({ "operator": matrix_json(op.mat()) }),
        Certificate::Increments(d) => json!({ "increments": d.iter().map(|x| round(*x)).collect::<Vec<_>>() }),
        Certificate::Pair(a, b) => json!({ "sheet1": matrix_json(a.mat()), "sheet2": matrix_json(b.mat()) }),
    }
}

fn report_json(r: &DistanceReport, with_certificate: bool) -> Value {
    let mut v = json!({
        "method": r.method.name(),
        "value": round(r.value),
        "feasibility": round(r.feasibility),
        "gap": r.gap.map(round),
        "up_to_regularization": r.up_to_regularization,
    });
    if with_certificate {
        v["certificate"] = r.certificate.as_ref().map(certificate_json).unwrap_or(Value::Null);
    }
    v
}

/// Closed form when both states lie in one family or are both eigenstates.
fn closed_kind(ctx: &FockContext, a: &StateTag, b: &StateTag) -> Option<ClosedFormKind> {
    let lp = ctx.lambda_p();
    let ((m, mu), (n, nu)) = (a.orbit(lp)?, b.orbit(lp)?);
    if m == n {
        Some(ClosedFormKind::Translation { kappa: mu - nu })
    } else if mu.norm() == 0.0 && nu.norm() == 0.0 {
        Some(ClosedFormKind::Eigenstates { m, n })
    } else {
        None
    }
}

fn distance(cfg: &RunConfig, a: &str, b: &str, method: MethodArg, with_certificate: bool) -> Result<u8, CliError> {
    let ctx = cfg.context()?;
    let calc = DiracCalculus::new(ctx);
    let (s1, s2) = (build_state(ctx, a)?, build_state(ctx, b)?);
    let want = |m: MethodArg| method == m || method == MethodArg::All;
    let mut reports: Vec<DistanceReport> = Vec::new();
    if want(MethodArg::Closed) {
        match closed_kind(&ctx, s1.tag(), s2.tag()) {
            Some(kind) => reports.push(spectral::distance_closed_form(&calc, kind)?),
            None if method == MethodArg::Closed => {
                return Err(CliError::Data("no closed form for this pair: states lie in different families".into()));
            }
            None => {}
        }
    }
    if want(MethodArg::Lp) {
        let diagonal = s1.off_diagonal_mass() <= ctx.tol() && s2.off_diagonal_mass() <= ctx.tol();
        if diagonal || method == MethodArg::Lp {
            reports.push(spectral::distance_diagonal_lp(&calc, &s1, &s2)?);
        }
    }
    if want(MethodArg::Solver) {
        reports.push(spectral::distance_solver(&calc, &s1, &s2, &cfg.solver())?);
    }
    let mut anomaly = false;
    for r in &reports {
        let bound = if r.method == spectral::Method::ConvexSolver { ">=" } else { "=" };
        println!("{:<7} {bound} {}  (feasibility {})", r.method.name(), num(r.value), num(r.feasibility));
        anomaly |= r.feasibility > 1.0 + FEASIBILITY_SLACK;
    }
    let mut gaps = Vec::new();
    for i in 0..reports.len() {
        for j in (i + 1)..reports.len() {
            let (x, y) = (&reports[i], &reports[j]);
            let gap = (x.value - y.value).abs();
            println!("gap {}-{} {}", x.method.name(), y.method.name(), num(gap));
            gaps.push(json!({ "a": x.method.name(), "b": y.method.name(), "gap": round(gap) }));
            // a certified lower bound may not exceed an exact value
            for (lower, exact) in [(x, y), (y, x)] {
                if lower.method == spectral::Method::ConvexSolver
                    && exact.method != spectral::Method::ConvexSolver
                    && lower.value > exact.value + FEASIBILITY_SLACK
                {
                    anomaly = true;
                }
            }
        }
    }
    let result = json!({
        "a": s1.tag().to_string(),
        "b": s2.tag().to_string(),
        "routes": reports.iter().map(|r| report_json(r, with_certificate)).collect::<Vec<_>>(),
        "gaps": gaps,
    });
    let path = output::write_json("distance", cfg, "distance.json", result)?;
    println!("wrote {}", path.display());
    Ok(if anomaly { EXIT_ANOMALY } else { EXIT_OK })
}

fn qlength(cfg: &RunConfig, a: &str, b: &str) -> Result<u8, CliError> {
    let ctx = cfg.context()?;
    let (ta, tb) = (parse_state(a)?, parse_state(b)?);
    let (s1, s2) = (fock::from_tag(ctx, &ta)?, fock::from_tag(ctx, &tb)?);
    let lop = build_length(ctx)?;
    let d_l = lengthop::d_l(&lop, &s1, &s2)?;
    let d_l2 = lengthop::d_l2(&lop, &s1, &s2)?;
    let d_l_mod = lengthop::modified_length(&lop, &s1, &s2)?;
    let lp = ctx.lambda_p();
    let closed = match (ta.orbit(lp), tb.orbit(lp)) {
        (Some((m, mu)), Some((n, nu))) => {
            Some((lengthop::closed_form_l2(&ctx, m, mu, n, nu), lengthop::closed_form_modified(&ctx, m, mu, n, nu)))
        }
        _ => None,
    };
    let conv = lengthop::convergence_check(&ctx, 1e-6, |c| {
        let lop = build_length(*c)?;
        lengthop::d_l2(&lop, &fock::from_tag(*c, &ta)?, &fock::from_tag(*c, &tb)?)
    });
    let (converged, half) = match &conv {
        Ok(c) => (c.ok, Some(c.half_value)),
        Err(_) => (false, None),
    };
    println!("d_L       {}", num(d_l));
    println!("d_L2      {}", num(d_l2));
    println!("sqrt d_L2 {}", num(d_l2.sqrt()));
    println!("d'_L      {}", num(d_l_mod));
    if let Some((l2, modified)) = closed {
        println!("closed d_L2 {}  closed d'_L {}", num(l2), num(modified));
    }
    println!("converged in N: {converged}");
    let result = json!({
        "a": ta.to_string(),
        "b": tb.to_string(),
        "d_L": round(d_l),
        "d_L2": round(d_l2),
        "sqrt_d_L2": round(d_l2.sqrt()),
        "d_L_mod": round(d_l_mod),
        "closed_d_L2": closed.map(|c| round(c.0)),
        "closed_d_L_mod": closed.map(|c| round(c.1)),
        "half_trunc_d_L2": half.map(round),
        "converged": converged,
    });
    output::write_json("qlength", cfg, "qlength.json", result)?;
    Ok(EXIT_OK)
}

fn spectrum(cfg: &RunConfig, count: usize) -> Result<u8, CliError> {
    let ctx = cfg.context()?;
    let lop = build_length(ctx)?;
    let pl = lengthop::planck_lengths(&lop)?;
    let mut t = Csv::new(&["index", "l2", "l"]);
    for (i, v) in lop.spectrum().iter().take(count).enumerate() {
        t.push(vec![i.to_string(), num(*v), num(v.sqrt())]);
    }
    println!("min Sp(L^2)    {}", num(pl.min_spectrum.powi(2)));
    println!("min Sp(L)      {}", num(pl.min_spectrum));
    println!("d_L(w0, w0)    {}", num(pl.ground_length));
    println!("d_L2(w0, w0)   {}", num(pl.ground_square_length));
    println!("||L L - L^2||  {}", num(lop.sqrt_residual()));
    let path = t.write("spectrum", cfg, "spectrum.csv")?;
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

fn translated(ctx: FockContext, m: usize, kappa: f64) -> Result<QState, CliError> {
    let tag = StateTag::Translated { base: Box::new(StateTag::Eigen(m)), kappa: Complex64::new(kappa, 0.0) };
    Ok(fock::from_tag(ctx, &tag)?)
}

fn pythagoras(cfg: &RunConfig, family: usize, partner: usize, kappas: &[f64]) -> Result<u8, CliError> {
    let ctx = cfg.context()?;
    let calc = DiracCalculus::new(ctx);
    let lop = build_length(ctx)?;
    let w = fock::eigenstate(ctx, family)?;
    let dd = DoubledDirac::from_square_length(&calc, lengthop::d_l2(&lop, &w, &w)?)?;
    let other = fock::eigenstate(ctx, partner)?;
    let mut t =
        Csv::new(&["family", "kappa", "lhs", "rhs_equal", "rhs_lo", "rhs_hi", "d_D", "same_family", "within_bracket"]);
    let mut violations = 0;
    for &k in kappas {
        let s1 = translated(ctx, family, k)?;
        let check = doubling::pythagoras_check(&dd, &s1, &other, &cfg.solver())?;
        let ok = check.within_bracket(1e-8 * check.rhs_equal);
        violations += usize::from(!ok);
        let label = if family == partner { format!("C{family}") } else { format!("C{family}-C{partner}") };
        println!("{label} kappa {}: lhs {} rhs {} bracket {ok}", num(k), num(check.lhs), num(check.rhs_equal));
        t.push(vec![
            label,
            num(k),
            num(check.lhs),
            num(check.rhs_equal),
            num(check.rhs_lo),
            num(check.rhs_hi),
            num(check.d_d),
            check.same_family.to_string(),
            ok.to_string(),
        ]);
    }
    t.write("pythagoras", cfg, "pythagoras.csv")?;
    Ok(if violations > 0 { EXIT_ANOMALY } else { EXIT_OK })
}

fn asymptotics(cfg: &RunConfig, family: usize, partners: &[usize], kappas: &[f64], plot: bool) -> Result<u8, CliError> {
    let ctx = cfg.context()?;
    let calc = DiracCalculus::new(ctx);
    let lop = build_length(ctx)?;
    let w = fock::eigenstate(ctx, family)?;
    let dd = DoubledDirac::from_square_length(&calc, lengthop::d_l2(&lop, &w, &w)?)?;
    let mut pairs = vec![(family, family)];
    pairs.extend(partners.iter().map(|&n| (family, n)));
    let spec = SweepSpec { pairs, kappas: kappas.to_vec(), solver: cfg.solver() };
    let table = doubling::identification_sweep(&dd, &lop, &spec)?;
    let mut columns = vec!["family", "m", "n", "kappa"];
    columns.extend(VALUE_COLUMNS);
    columns.extend(["d_Dprime_sq", "route"]);
    let mut t = Csv::new(&columns);
    for r in &table.rows {
        let mut row = vec![r.family.clone(), r.m.to_string(), r.n.to_string(), num(r.kappa)];
        row.extend(r.values().iter().map(|v| num(*v)));
        row.push(r.d_dprime_sq.map(num).unwrap_or_default());
        row.push(r.route.name().to_string());
        t.push(row);
    }
    let mut labels: Vec<String> = Vec::new();
    for r in &table.rows {
        if !labels.contains(&r.family) {
            labels.push(r.family.clone());
        }
    }
    let mut series = Vec::new();
    for label in &labels {
        let gaps = table.rel_gaps(label);
        println!("{label}: rel_gap non-increasing along kappa: {}", sweep::is_non_increasing(&gaps, 1e-9));
        let points = table.rows.iter().filter(|r| &r.family == label).map(|r| (r.kappa, r.rel_gap)).collect();
        series.push(Series { label: label.clone(), points });
    }
    let path = t.write("asymptotics", cfg, "asymptotics.csv")?;
    println!("wrote {}", path.display());
    if plot {
        let svg = plot::line_plot("relative gap d_D vs d'_L", "|kappa - kappa~|", "rel_gap", &series);
        output::write_file(cfg, "asymptotics.svg", &svg)?;
    }
    Ok(EXIT_OK)
}

fn counterexample(cfg: &RunConfig, indices: &str) -> Result<u8, CliError> {
    let idx: Vec<usize> = parse_list(indices)?;
    let [i, j, k, l] = idx[..] else {
        return Err(CliError::Usage(format!("need four indices, got `{indices}`")));
    };
    let lop = build_length(cfg.context()?)?;
    let ce = lengthop::counterexample_l2prime(&lop, i, j, k, l)?;
    println!("lhs {}  rhs {}  residual {}", num(ce.lhs), num(ce.rhs), num(ce.residual));
    println!("tensor traces: lhs {}  rhs {}", num(ce.numeric_lhs), num(ce.numeric_rhs));
    let mut t = Csv::new(&["indices", "lhs", "rhs", "residual", "numeric_lhs", "numeric_rhs", "max_term_gap"]);
    t.push(vec![
        format!("{i};{j};{k};{l}"),
        num(ce.lhs),
        num(ce.rhs),
        num(ce.residual),
        num(ce.numeric_lhs),
        num(ce.numeric_rhs),
        num(ce.max_term_gap),
    ]);
    t.write("counterexample", cfg, "counterexample.csv")?;
    Ok(EXIT_OK)
}

fn riemann(cfg: &RunConfig, m: usize, n_max: usize, plot: bool) -> Result<u8, CliError> {
    let calc = DiracCalculus::new(cfg.context()?);
    if n_max <= m {
        return Err(CliError::Usage(format!("need n-max > m, got {n_max} <= {m}")));
    }
    let mut t = Csv::new(&["m", "n", "d_D", "d_L_mod", "rel_gap", "radial_gap"]);
    let mut points = Vec::new();
    for n in (m + 1)..=n_max {
        let d = spectral::length_vs_optimal_discrepancy(&calc, m, n)?;
        t.push(vec![m.to_string(), n.to_string(), num(d.d_d), num(d.d_l_mod), num(d.rel_gap), num(d.radial_gap)]);
        points.push((n as f64, d.rel_gap));
    }
    let path = t.write("riemann", cfg, "riemann.csv")?;
    println!("wrote {}", path.display());
    if plot {
        let series = [Series { label: format!("m = {m}"), points }];
        let svg = plot::line_plot("Riemann-sum gap", "n", "rel_gap", &series);
        output::write_file(cfg, "riemann.svg", &svg)?;
    }
    Ok(EXIT_OK)
}

fn oracle(cfg: &RunConfig, r: f64, h: f64, witness: bool) -> Result<u8, CliError> {
    let ctx = cfg.context()?;
    let theta = cfg.theta;
    let grid = Grid::new(r, h)?;
    let dual = FourierPair::dual_grid(&grid, 12.0 / theta.sqrt())?;
    let points = [(0.0, 0.0), (0.5, -0.25), (-1.0, 0.75)];
    let mut t = Csv::new(&[
        "case",
        "x1",
        "x2",
        "reference_re",
        "reference_im",
        "integral_re",
        "integral_im",
        "error_bound",
        "fourier_re",
        "fourier_im",
    ]);
    let (a, b) = (0.7, 1.6);
    let vacuum = SampledSymbol::sample(grid, starprod::vacuum_symbol(theta))?;
    let up = SampledSymbol::sample(grid, starprod::ladder_symbol(theta, true))?;
    let down = SampledSymbol::sample(grid, starprod::ladder_symbol(theta, false))?;
    let ga = SampledSymbol::sample(grid, starprod::gaussian(a, (0.0, 0.0)))?;
    let gb = SampledSymbol::sample(grid, starprod::gaussian(b, (0.0, 0.0)))?;
    let e0 = Operator::vacuum_projector(ctx);
    let e00 = starprod::star_matrix(&e0, &e0)?;
    let e11 = starprod::star_matrix(&Operator::matrix_unit(ctx, 1, 0), &Operator::matrix_unit(ctx, 0, 1))?;
    type Reference<'a> = Box<dyn Fn((f64, f64)) -> Complex64 + 'a>;
    let cases: Vec<(&str, &SampledSymbol, &SampledSymbol, Reference)> = vec![
        ("e0*e0", &vacuum, &vacuum, Box::new(|x| starprod::symbol_of(&e00, x))),
        ("e10*e01", &up, &down, Box::new(|x| starprod::symbol_of(&e11, x))),
        (
            "gaussians",
            &ga,
            &gb,
            Box::new(move |x: (f64, f64)| {
                Complex64::new(starprod::gaussian_star_closed_form(a, b, theta, x.0 * x.0 + x.1 * x.1), 0.0)
            }),
        ),
    ];
    let mut worst: f64 = 0.0;
    for (name, f, g, reference) in &cases {
        let fourier = FourierPair::new(f, g, dual)?.star_at(&points, theta);
        for (x, fv) in points.iter().zip(&fourier) {
            let q = starprod::star_integral(f, g, *x, theta)?;
            let want = reference(*x);
            worst = worst.max((q.value - want).norm() - q.error_bound);
            t.push(vec![
                name.to_string(),
                num(x.0),
                num(x.1),
                num(want.re),
                num(want.im),
                num(q.value.re),
                num(q.value.im),
                num(q.error_bound),
                num(fv.value.re),
                num(fv.value.im),
            ]);
        }
    }
    let path = t.write("oracle", cfg, "oracle.csv")?;
    println!("wrote {}", path.display());
    println!("largest excess over the quadrature bound: {}", num(worst.max(0.0)));
    if witness {
        let coarse = Grid::new(r, 2.0 * h)?;
        let f = SampledSymbol::sample(coarse, starprod::gaussian(1.0, (0.5, 0.0)))?;
        let g = SampledSymbol::sample(coarse, starprod::gaussian(1.0, (0.0, 0.5)))?;
        let dual = FourierPair::dual_grid(&coarse, 12.0)?;
        let thetas = [0.1, 0.05, 0.025, 0.0125];
        let w = starprod::noncommutativity_witness(&f, &g, dual, &[(0.25, 0.25), (0.0, 0.0)], &thetas)?;
        let mut wt = Csv::new(&["theta", "commutator_norm"]);
        for (th, n) in w.thetas.iter().zip(&w.norms) {
            wt.push(vec![num(*th), num(*n)]);
        }
        wt.write("oracle", cfg, "witness.csv")?;
        println!("commutator slope in log theta: {}", num(w.slope));
    }
    Ok(if worst > 0.0 { EXIT_ANOMALY } else { EXIT_OK })
}

fn optimal_element(cfg: &RunConfig, kind: ElementKind, xi: f64, upto: usize, with_cert: bool) -> Result<u8, CliError> {
    let calc = DiracCalculus::new(cfg.context()?);
    let (element, mut result) = match kind {
        ElementKind::Translation => {
            let t = spectral::optimal_element_translation(&calc, xi);
            println!("unit residual {}", num(t.unit_residual));
            let r = json!({ "kind": "translation", "xi": round(xi), "unit_residual": round(t.unit_residual) });
            (t.element, r)
        }
        ElementKind::Eigen => {
            let e = spectral::optimal_element_eigenstates(&calc, upto)?;
            println!("defect residual {}  shift residual {}", num(e.defect_residual), num(e.shift_residual));
            let r = json!({
                "kind": "eigen",
                "upto": upto,
                "increments": e.increments.iter().map(|x| round(*x)).collect::<Vec<_>>(),
                "defect_residual": round(e.defect_residual),
                "shift_residual": round(e.shift_residual),
            });
            (e.element, r)
        }
    };
    let seminorm = spectral::lipschitz_seminorm(&calc, &element)?;
    println!("seminorm {}", num(seminorm));
    result["seminorm"] = round(seminorm);
    if with_cert {
        result["certificate"] = matrix_json(element.mat());
    }
    output::write_json("optimal-element", cfg, "optimal_element.json", result)?;
    Ok(if seminorm > 1.0 + FEASIBILITY_SLACK { EXIT_ANOMALY } else { EXIT_OK })
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn suite(cfg: &RunConfig, quick: bool, only: Option<&str>) -> Result<u8, CliError> {
    let mut profile = if quick { Profile::quick() } else { Profile::full() };
    profile.seed = cfg.seed;
    let ids: Vec<usize> = match only {
        Some(list) => parse_list(list)?,
        None => (1..=criteria::NAMES.len()).collect(),
    };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > criteria::NAMES.len()) {
        return Err(CliError::Usage(format!("no criterion {bad}")));
    }
    let mut t = Csv::new(&["id", "name", "pass", "failed_checks", "detail"]);
    let mut passed = 0;
    for &id in &ids {
        let o = criteria::run(id, &profile)?;
        println!("{}", o.line());
        passed += usize::from(o.pass);
        t.push(vec![id.to_string(), o.name.to_string(), o.pass.to_string(), o.failed().join(";"), quote(&o.detail)]);
    }
    let path = t.write("suite", cfg, "suite.csv")?;
    let header_ok = output::has_header(&path, cfg);
    println!(
        "{passed}/{} criteria passed ({} profile){}",
        ids.len(),
        profile.name,
        if header_ok { "" } else { "; header missing" }
    );
    Ok(if passed == ids.len() && header_ok { EXIT_OK } else { EXIT_ANOMALY })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0..2", 0.5).unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_grid("0,1,3", 1.0).unwrap(), vec![0.0, 1.0, 3.0]);
        assert!(parse_grid("2..1", 1.0).is_err());
        assert!(parse_grid("0..1", 0.0).is_err());
        assert!(parse_grid("a,b", 1.0).is_err());
    }

    #[test]
    fn closed_routes() {
        let ctx = fock::make_context(16, 1.0, 1e-10).unwrap();
        let e = |m| StateTag::Eigen(m);
        let tr = StateTag::Translated { base: Box::new(e(1)), kappa: Complex64::new(2.0, 0.0) };
        assert!(matches!(closed_kind(&ctx, &e(0), &e(3)), Some(ClosedFormKind::Eigenstates { m: 0, n: 3 })));
        assert!(matches!(closed_kind(&ctx, &tr, &e(1)), Some(ClosedFormKind::Translation { .. })));
        assert!(closed_kind(&ctx, &tr, &e(0)).is_none());
        assert_eq!(quote("a,b"), "\"a,b\"");
    }
}
