use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use sphere_gjms::extremize::{minimize as run_minimize, random_positive_start, random_unit, OptimizerConfig, Termination};
use sphere_gjms::flatcheck::{bump, conjugation_check, flat_energy_identity, null_vector_energy, random_admissible};
use sphere_gjms::functional::{constant_at_one, default_grid, functional_i, sin_counterexample, stated_sharp_constant, value_at_one};
use sphere_gjms::geometry::{MobiusMap, SpherePoint};
use sphere_gjms::gjms::{apply_p2m, green_spectral, kernel_degrees, is_nonnegative, GreenKernel, MultiplierTable};
use sphere_gjms::mobius::{invariance_pair, PullbackSpec};
use sphere_gjms::polyident::{check_delta_k_product, check_identity_2_1, random_polynomial, RationalPolynomial};
use sphere_gjms::spectral::{Basis, SpectralFunction};
use sphere_gjms::stability::hessian_spectrum;
use sphere_gjms::Error;

use crate::report::{float_json, rational_json, Cell, Provenance, Report};
use crate::Output;

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::NoConvergence { .. }) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(s) => write!(f, "invalid configuration: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Invalid(msg.into()))
}

fn check_nm(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return invalid("n and m must be at least 1");
    }
    Ok(())
}

fn check_functional(n: usize, m: usize) -> Result<()> {
    check_nm(n, m)?;
    if 2 * m <= n {
        return invalid(format!("this subcommand needs 2m > n (n = {n}, m = {m})"));
    }
    Ok(())
}

fn check_degree(l: usize) -> Result<()> {
    if l < 8 {
        return invalid(format!("L must be at least 8, got {l}"));
    }
    Ok(())
}

fn basis_for(n: usize) -> Result<Basis<f64>> {
    Ok(if n == 1 { Basis::Circle } else { Basis::zonal(n, SpherePoint::north(n))? })
}

#[derive(Args, Debug)]
pub struct NmArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Largest degree α.
    #[arg(long = "degree", short = 'L', visible_alias = "L", default_value_t = 12)]
    pub degree: usize,
    #[command(flatten)]
    pub output: Output,
}

pub fn multiplier_table(a: &TableArgs) -> Result<Report> {
    check_nm(a.n, a.m)?;
    let t = MultiplierTable::new(a.n, a.m, a.degree);
    let mut r = Report::new("multiplier-table", Provenance { n: Some(a.n), m: Some(a.m), degree: Some(a.degree), seed: None });
    r.columns = vec!["alpha", "numerator", "denominator", "value"];
    for (alpha, p) in t.entries().iter().enumerate() {
        let (num, den) = Cell::rational(p);
        r.rows.push(vec![alpha.into(), num, den, sphere_gjms::scalar::rational_to::<f64>(p).into()]);
    }
    r.set("kernelDegrees", json!(kernel_degrees(a.n, a.m).into_iter().filter(|&d| d <= a.degree).collect::<Vec<_>>()));
    r.set("nonnegative", json!(is_nonnegative(a.n, a.m, a.degree)));
    Ok(r)
}

pub fn constants(a: &NmArgs) -> Result<Report> {
    check_functional(a.n, a.m)?;
    if a.n % 2 == 0 {
        return invalid("closed-form constants are available for odd n");
    }
    let mut r = Report::new("constants", Provenance { n: Some(a.n), m: Some(a.m), degree: None, seed: None });
    let c = constant_at_one(a.n, a.m)?;
    r.set("closedForm", json!(c.closed_form()));
    r.setf("value", c.to_f64());
    let one = SpectralFunction::constant(basis_for(a.n)?, 8, 1.0);
    r.setf("numericI1", functional_i(&one, a.n, a.m, &default_grid(&one))?.functional);
    if let Ok(s) = stated_sharp_constant(a.n, a.m) {
        r.set("statedClosedForm", json!(s.closed_form()));
        r.setf("statedValue", s.to_f64());
        r.set("statedAgrees", json!(s.coeff == c.coeff));
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct EnergyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long = "degree", short = 'L', visible_alias = "L", default_value_t = 32)]
    pub degree: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sup of the random perturbation of 1.
    #[arg(long, default_value_t = 0.6)]
    pub amplitude: f64,
    /// Highest degree in the random perturbation.
    #[arg(long, default_value_t = 4)]
    pub active: usize,
    /// Spectral function JSON ({dim, kind, axis?, coeffs}) instead of a random start.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

pub fn energy(a: &EnergyArgs) -> Result<Report> {
    check_functional(a.n, a.m)?;
    check_degree(a.degree)?;
    if !(0.0..1.0).contains(&a.amplitude) {
        return invalid("amplitude must lie in [0, 1)");
    }
    let u: SpectralFunction<f64> = match &a.input {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?;
            let u: SpectralFunction<f64> =
                serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?;
            if u.dim() != a.n {
                return invalid(format!("input lives on S^{}, expected S^{}", u.dim(), a.n));
            }
            u
        }
        None => random_positive_start(basis_for(a.n)?, a.degree, a.active, a.amplitude, a.seed),
    };
    let rep = functional_i(&u, a.n, a.m, &default_grid(&u))?;
    let mut r = Report::new("energy", Provenance { n: Some(a.n), m: Some(a.m), degree: Some(u.degree()), seed: Some(a.seed) });
    r.setf("E", rep.energy);
    r.setf("negNorm", rep.neg_norm);
    r.setf("I", rep.functional);
    r.setf("elResidual", rep.el_residual);
    r.setf("minValue", rep.min_value);
    r.setf("I1", value_at_one::<f64>(a.n, a.m)?);
    Ok(r)
}

#[derive(Args, Debug)]
pub struct InvarianceArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    /// Degree the pulled-back functions are projected to.
    #[arg(long = "degree", short = 'L', visible_alias = "L", default_value_t = 64)]
    pub degree: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

pub fn invariance_check(a: &InvarianceArgs) -> Result<Report> {
    check_functional(a.n, a.m)?;
    check_degree(a.degree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let basis = basis_for(a.n)?;
    let mut r = Report::new("invariance-check", Provenance { n: Some(a.n), m: Some(a.m), degree: Some(a.degree), seed: Some(a.seed) });
    r.columns = vec!["trial", "lambda", "I", "IPulled", "relError"];
    let mut worst = 0f64;
    for trial in 0..a.trials {
        let u = random_positive_start(basis.clone(), 8, 4, 0.6, rng.random());
        let lambda = rng.random_range(0.4..2.5);
        let axis = if a.n == 1 { SpherePoint::on_circle(rng.random_range(0.0..2.0 * PI)) } else { SpherePoint::north(a.n) };
        let spec = PullbackSpec::new(MobiusMap::axis_dilation(axis, lambda)?, a.n, a.m);
        let (before, after) = invariance_pair(&u, &spec, a.degree)?;
        let rel = ((after - before) / before).abs();
        worst = worst.max(rel);
        r.rows.push(vec![trial.into(), lambda.into(), before.into(), after.into(), rel.into()]);
    }
    r.setf("maxRelError", worst);
    r.setf("tolerance", a.tol);
    if !(worst < a.tol) {
        r.fail(format!("invariance defect {worst:e} exceeds {:e}", a.tol));
    }
    Ok(r)
}

pub fn hessian(a: &TableArgs) -> Result<Report> {
    check_functional(a.n, a.m)?;
    let s = hessian_spectrum(a.n, a.m, a.degree)?;
    let mut r = Report::new("hessian", Provenance { n: Some(a.n), m: Some(a.m), degree: Some(a.degree), seed: None });
    r.columns = vec!["degree", "numerator", "denominator", "sign"];
    for (d, mu) in s.eigenvalues.iter().enumerate() {
        let (num, den) = Cell::rational(mu);
        let sign = if mu < &num_rational::BigRational::from_integer(0.into()) {
            "negative"
        } else if mu == &num_rational::BigRational::from_integer(0.into()) {
            "zero"
        } else {
            "positive"
        };
        r.rows.push(vec![d.into(), num, den, sign.into()]);
    }
    r.set("hasNegative", json!(s.has_negative));
    r.set("firstNegativeDegree", json!(s.first_negative_degree));
    if let Some(c) = &s.closed_form {
        r.set(
            "closedForm",
            json!({ "degree": c.degree, "spectral": rational_json(&c.spectral), "formula": rational_json(&c.formula), "agrees": c.agrees() }),
        );
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct MinimizeArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long = "degree", short = 'L', visible_alias = "L", default_value_t = 32)]
    pub degree: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 400)]
    pub max_iter: usize,
    /// `random` (1 plus a seeded low-degree perturbation) or `h2` (1 + 0.05·degree-2 harmonic).
    #[arg(long, default_value = "random")]
    pub start: String,
    #[arg(long, default_value_t = 0.6)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 4)]
    pub active: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub positivity_floor: f64,
    #[command(flatten)]
    pub output: Output,
}

pub fn minimize(a: &MinimizeArgs) -> Result<Report> {
    check_functional(a.n, a.m)?;
    check_degree(a.degree)?;
    let cfg = OptimizerConfig {
        degree: a.degree,
        max_iter: a.max_iter,
        seed: a.seed,
        positivity_floor: a.positivity_floor,
        ..OptimizerConfig::default()
    };
    cfg.validate()?;
    let basis = basis_for(a.n)?;
    let u0 = match a.start.as_str() {
        "random" => random_positive_start(basis, a.degree, a.active, a.amplitude, a.seed),
        "h2" => {
            let one = SpectralFunction::constant(basis.clone(), a.degree, 1.0);
            one.axpy(0.05, &SpectralFunction::harmonic(basis, a.degree, 2))?
        }
        other => return invalid(format!("unknown start `{other}` (expected random or h2)")),
    };
    let trace = run_minimize(a.n, a.m, &u0, &cfg)?;
    let mut r = Report::new("minimize", Provenance { n: Some(a.n), m: Some(a.m), degree: Some(a.degree), seed: Some(a.seed) });
    r.columns = vec!["iter", "I", "gradNorm", "minU", "baryNorm"];
    for row in &trace.rows {
        r.rows.push(vec![row.iter.into(), row.value.into(), row.grad_norm.into(), row.min_u.into(), row.bary_norm.into()]);
    }
    let i1 = value_at_one::<f64>(a.n, a.m)?;
    r.set("termination", json!(format!("{:?}", trace.termination)));
    r.setf("finalI", trace.final_value());
    r.setf("bestI", trace.best_value());
    r.setf("I1", i1);
    r.setf("ratioToI1", trace.best_value() / i1);
    r.set("monotone", json!(trace.is_monotone()));
    match trace.termination {
        Termination::Converged | Termination::Stalled => {}
        t => r.fail(format!("descent ended with {t:?}")),
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct GreenArgs {
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long = "degree", short = 'L', visible_alias = "L", default_value_t = 64)]
    pub degree: usize,
    /// Truncation of the series compared with the closed form.
    #[arg(long, default_value_t = 65536)]
    pub series_degree: usize,
    #[arg(long, default_value_t = 10)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

pub fn green_check(a: &GreenArgs) -> Result<Report> {
    check_functional(a.n, a.m)?;
    check_degree(a.degree)?;
    if a.n % 2 == 0 {
        return invalid("the Green's function closed form is for odd n");
    }
    if a.points < 2 {
        return invalid("need at least 2 sample points");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let xi = if a.n == 1 { SpherePoint::on_circle(rng.random_range(0.0..2.0 * PI)) } else { SpherePoint::north(a.n) };
    let basis = if a.n == 1 { Basis::Circle } else { Basis::zonal(a.n, xi.clone())? };
    let u = random_unit(basis, a.degree, a.degree, &mut rng);
    let g = green_spectral(a.n, a.m, &xi, a.degree)?;
    let reproduced = g.inner(&apply_p2m(&u, a.n, a.m)?)?;
    let direct = u.eval(&xi)?;
    let mut r = Report::new("green-check", Provenance { n: Some(a.n), m: Some(a.m), degree: Some(a.degree), seed: Some(a.seed) });
    r.setf("reproduced", reproduced);
    r.setf("direct", direct);
    r.setf("reproductionError", (reproduced - direct).abs());
    let kernel = GreenKernel::new(a.n, a.m, xi.clone())?;
    r.setf("kappa", kernel.kappa());
    r.columns = vec!["angle", "closedForm", "series", "ratio"];
    let mut ratios = Vec::with_capacity(a.points);
    for j in 0..a.points {
        let psi = 0.3 + (PI - 0.3) * j as f64 / (a.points - 1) as f64;
        let zeta = SpherePoint::at_polar_angle(&xi, psi);
        let c = kernel.closed_form(&zeta)?;
        let s = kernel.series_value(&zeta, a.series_degree)?;
        ratios.push(c / s);
        r.rows.push(vec![psi.into(), c.into(), s.into(), (c / s).into()]);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max) / mean.abs();
    r.setf("ratioMean", mean);
    r.setf("ratioSpread", spread);
    if !((reproduced - direct).abs() < 1e-8) {
        r.fail("Green's function does not reproduce u(ξ) within 1e-8");
    } else if !(spread < 1e-6) {
        r.fail(format!("closed-form/series ratio varies by {spread:e}"));
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct FlatArgs {
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long = "degree", short = 'L', visible_alias = "L", default_value_t = 64)]
    pub degree: usize,
    /// Degree of the compactly supported bump for the conjugation check.
    #[arg(long, default_value_t = 96)]
    pub bump_degree: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

pub fn flat_identity_check(a: &FlatArgs) -> Result<Report> {
    if !(1..=2).contains(&a.m) {
        return invalid("flat-identity-check covers m = 1 and m = 2");
    }
    check_degree(a.degree)?;
    check_degree(a.bump_degree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut r = Report::new("flat-identity-check", Provenance { n: Some(1), m: Some(a.m), degree: Some(a.degree), seed: Some(a.seed) });
    if a.m == 1 {
        // 1 − cos of the angle from N, i.e. 1 − sin θ
        let mut g = SpectralFunction::zeros(Basis::Circle, a.degree);
        g.coeffs_mut()[0] = (2.0 * PI).sqrt();
        g.coeffs_mut()[2] = -PI.sqrt();
        let rep = flat_energy_identity(&g, 1)?;
        r.set("golden", json!({ "sphereEnergy": float_json(rep.sphere_energy), "flatEnergy": float_json(rep.flat_energy), "expected": float_json(PI / 4.0) }));
    }
    r.columns = vec!["trial", "sphereEnergy", "flatEnergy", "relError"];
    let mut worst = 0f64;
    let mut min_flat = f64::INFINITY;
    for trial in 0..a.trials {
        let u = random_admissible::<f64>(a.m, a.degree, a.degree, &mut rng);
        let rep = flat_energy_identity(&u, a.m)?;
        worst = worst.max(rep.rel_error);
        min_flat = min_flat.min(rep.flat_energy);
        r.rows.push(vec![trial.into(), rep.sphere_energy.into(), rep.flat_energy.into(), rep.rel_error.into()]);
    }
    r.setf("maxRelError", worst);
    r.setf("minFlatEnergy", min_flat);
    let conj = conjugation_check(&bump::<f64>(a.bump_degree), a.m, 200)?;
    r.setf("conjugationRelError", conj.rel_error);
    r.setf("nullVectorEnergy", null_vector_energy::<f64>(a.m, 1024)?);
    if !(worst < 1e-6) {
        r.fail(format!("flat energy identity off by {worst:e}"));
    } else if !(conj.rel_error < 1e-5) {
        r.fail(format!("conjugated operator off by {:e}", conj.rel_error));
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct PolyArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Total degree bound of the random polynomials.
    #[arg(long, default_value_t = 6)]
    pub deg: u32,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

pub fn poly_identity(a: &PolyArgs) -> Result<Report> {
    if a.n == 0 || a.n > 6 {
        return invalid("poly-identity needs 1 <= n <= 6");
    }
    if a.deg > 12 || a.m > 8 {
        return invalid("poly-identity keeps deg <= 12 and m <= 8");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut r = Report::new("poly-identity", Provenance { n: Some(a.n), m: Some(a.m), degree: Some(a.deg as usize), seed: Some(a.seed) });
    r.columns = vec!["trial", "terms", "identityHolds", "deltaKHolds"];
    let mut failures = Vec::new();
    for trial in 0..a.trials {
        let u: RationalPolynomial = random_polynomial(a.n, a.deg, 0.4, &mut rng);
        let id = check_identity_2_1(&u, a.m);
        let dk = (1..=a.m + 1).all(|k| check_delta_k_product(&u, k).holds);
        if !id.holds {
            failures.push(format!("trial {trial}: residual {}", id.residual));
        }
        if !dk {
            failures.push(format!("trial {trial}: Δ^k product rule fails"));
        }
        r.rows.push(vec![trial.into(), u.terms().count().into(), id.holds.into(), dk.into()]);
    }
    r.set("failures", json!(failures));
    if !failures.is_empty() {
        r.fail(format!("{} nonzero residual(s)", failures.len()));
    }
    Ok(r)
}

#[derive(Args, Debug)]
pub struct SinArgs {
    /// Gauss nodes per quarter period for ∫|sin θ|^{-2/3}.
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    #[command(flatten)]
    pub output: Output,
}

pub fn counterexample_sin(a: &SinArgs) -> Result<Report> {
    if a.nodes < 4 {
        return invalid("need at least 4 nodes");
    }
    let c = sin_counterexample(a.nodes);
    let mut r = Report::new("counterexample-sin", Provenance { n: Some(1), m: Some(2), degree: None, seed: None });
    r.setf("energy", c.energy);
    r.setf("expectedEnergy", -15.0 * PI / 16.0);
    r.setf("negPowerIntegral", c.neg_power_integral);
    r.setf("negNorm", c.neg_norm);
    r.setf("value", c.value);
    r.set("finite", json!(c.value.is_finite()));
    r.set("negative", json!(c.value < 0.0));
    Ok(r)
}
