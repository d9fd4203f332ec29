//! Acceptance suite: one PASS/FAIL line per criterion on stderr, then a single
//! assertion over all of them.

use std::f64::consts::PI;
use std::io::Write;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sphere_gjms::extremize::{minimize, random_positive_start, random_unit, DescentTrace, OptimizerConfig};
use sphere_gjms::flatcheck::{bump, conjugation_check, flat_energy_identity, null_vector_energy, random_admissible};
use sphere_gjms::functional::{default_grid, energy, functional_value, sin_counterexample, stated_sharp_constant, constant_at_one};
use sphere_gjms::geometry::{MobiusMap, SpherePoint};
use sphere_gjms::gjms::{apply_p2m, green_spectral, is_nonnegative, kernel_degrees, GreenKernel};
use sphere_gjms::mobius::{invariance_pair, PullbackSpec};
use sphere_gjms::polyident::{check_delta_k_product, check_identity_2_1, random_polynomial, RationalPolynomial};
use sphere_gjms::scalar::rational;
use sphere_gjms::spectral::{Basis, SpectralFunction, SpectralGrid};
use sphere_gjms::stability::hessian_spectrum;

const TOL_CONSTANT: f64 = 1e-10;
const TOL_OPT_M1: f64 = 1e-6;
const TOL_OPT_M2: f64 = 1e-5;
const TOL_MOBIUS: f64 = 1e-6;
const DESCENT_FACTOR: f64 = 1.01;
const TOL_GOLDEN: f64 = 1e-8;
const TOL_FLAT: f64 = 1e-6;
const TOL_CONJUGATION: f64 = 1e-5;
const TOL_NULL: f64 = 1e-8;
const TOL_GREEN_REPRO: f64 = 1e-8;
const TOL_GREEN_RATIO: f64 = 1e-6;
const TOL_SIN: f64 = 1e-10;
const TOL_MEASURE: f64 = 1e-12;
const TOL_PARSEVAL: f64 = 1e-10;

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn zonal3() -> Basis<f64> {
    Basis::zonal(3, SpherePoint::north(3)).unwrap()
}

fn value_of_one(n: usize, m: usize) -> f64 {
    let basis = if n == 1 { Basis::Circle } else { Basis::zonal(n, SpherePoint::north(n)).unwrap() };
    let one = SpectralFunction::constant(basis, 32, 1.0);
    functional_value(&one, n, m, &default_grid(&one)).unwrap()
}

/// Worst relative distance of the best optimizer value to `target` over 5 seeded starts.
fn optimizer_gap(m: usize, target: f64) -> f64 {
    let cfg = OptimizerConfig::default();
    (0..5u64)
        .map(|seed| {
            let u0 = random_positive_start::<f64>(Basis::Circle, cfg.degree, 4, 0.6, seed + 7);
            let t = minimize(1, m, &u0, &OptimizerConfig { seed, ..cfg.clone() }).unwrap();
            rel(t.best_value(), target)
        })
        .fold(0.0, f64::max)
}

fn sharp_constant(m: usize, exact: f64, opt_tol: f64) -> Outcome {
    let i1 = value_of_one(1, m);
    let gap = optimizer_gap(m, exact);
    ensure(
        rel(i1, exact) < TOL_CONSTANT && gap < opt_tol,
        format!("I(1) = {i1:.12e} (rel {:.1e} vs {exact:.12e}), worst optimizer rel gap {gap:.1e}", rel(i1, exact)),
    )
}

fn criterion_1() -> Outcome {
    sharp_constant(1, -PI * PI, TOL_OPT_M1)
}

fn criterion_2() -> Outcome {
    sharp_constant(2, 9.0 * PI.powi(4), TOL_OPT_M2)
}

fn criterion_3() -> Outcome {
    let mut worst = 0f64;
    let mut exact = true;
    for m in [2, 3] {
        let stated = stated_sharp_constant(3, m).unwrap();
        worst = worst.max(rel(value_of_one(3, m), stated.to_f64()));
        exact &= stated.coeff == constant_at_one(3, m).unwrap().coeff;
    }
    // by hand with μ(S³) = 2π²: −(6!/(2^7·3!))·μ^{4/3} and (3·7!/(2^9·3!))·μ²
    let mu = 2.0 * PI * PI;
    let v2 = -(720.0 / (128.0 * 6.0)) * mu.powf(4.0 / 3.0);
    let v3 = (3.0 * 5040.0 / (512.0 * 6.0)) * mu.powf(2.0);
    let direct = rel(value_of_one(3, 2), v2).max(rel(value_of_one(3, 3), v3));
    ensure(
        worst < TOL_CONSTANT && direct < TOL_CONSTANT && exact,
        format!("(3,2) and (3,3): worst rel {worst:.1e}, against hand-expanded values {direct:.1e}, exact coefficients agree: {exact}"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_circle = 0f64;
    for k in 0..50u64 {
        let m = 1 + (k % 2) as usize;
        let u = random_positive_start::<f64>(Basis::Circle, 8, 4, 0.6, k);
        let lambda = rng.random_range(0.4..2.5);
        let axis = SpherePoint::on_circle(rng.random_range(0.0..2.0 * PI));
        let spec = PullbackSpec::new(MobiusMap::axis_dilation(axis, lambda).unwrap(), 1, m);
        let (a, b) = invariance_pair(&u, &spec, 64).unwrap();
        worst_circle = worst_circle.max(rel(b, a));
    }
    let mut worst_s3 = 0f64;
    for k in 0..20u64 {
        let m = 2 + (k % 2) as usize;
        let u = random_positive_start(zonal3(), 8, 4, 0.6, k);
        let lambda = rng.random_range(0.4..2.5);
        let spec = PullbackSpec::new(MobiusMap::axis_dilation(SpherePoint::north(3), lambda).unwrap(), 3, m);
        let (a, b) = invariance_pair(&u, &spec, 64).unwrap();
        worst_s3 = worst_s3.max(rel(b, a));
    }
    ensure(
        worst_circle < TOL_MOBIUS && worst_s3 < TOL_MOBIUS,
        format!("50 circle cases worst {worst_circle:.1e}, 20 zonal S^3 cases worst {worst_s3:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut problems = Vec::new();
    let mut cases = 0;
    for n in [1usize, 3, 5] {
        for m in (n + 1) / 2..=8 {
            if 2 * m <= n {
                continue;
            }
            cases += 1;
            let s = hessian_spectrum(n, m, 12).unwrap();
            if s.has_negative != (2 * m >= n + 5) {
                problems.push(format!("(n={n},m={m}) has_negative = {}", s.has_negative));
            }
            if !s.eigenvalues[0].is_zero() || !s.eigenvalues[1].is_zero() {
                problems.push(format!("(n={n},m={m}) mu0 = {}, mu1 = {}", s.eigenvalues[0], s.eigenvalues[1]));
            }
            if let Some(c) = &s.closed_form {
                if !c.agrees() || !c.spectral.is_negative() {
                    problems.push(format!("(n={n},m={m}) degree-{} closed form {} vs {}", c.degree, c.formula, c.spectral));
                }
            }
        }
    }
    let mu13 = hessian_spectrum(1, 3, 4).unwrap();
    let mu14 = hessian_spectrum(1, 4, 4).unwrap();
    let pinned = mu13.eigenvalues[2] == rational(-315, 16)
        && mu14.eigenvalues[3] == rational(-945, 2)
        && mu13.closed_form.as_ref().is_some_and(|c| c.degree == 2 && c.agrees())
        && mu14.closed_form.as_ref().is_some_and(|c| c.degree == 3 && c.agrees());
    if !pinned {
        problems.push("pinned eigenvalues -315/16 and -945/2 not reproduced".into());
    }
    ensure(problems.is_empty(), format!("{cases} (n,m) cases; {}", if problems.is_empty() { "all exact".into() } else { problems.join("; ") }))
}

fn criterion_6() -> Outcome {
    let mut problems = Vec::new();
    for n in [2usize, 4] {
        for m in 1..=8usize {
            let k = kernel_degrees(n, m);
            let want: Vec<usize> = if 2 * m >= n { (0..=m - n / 2).collect() } else { vec![] };
            if k != want {
                problems.push(format!("(n={n},m={m}) kernel {k:?}, expected {want:?}"));
            }
            if !is_nonnegative(n, m, 40) {
                problems.push(format!("(n={n},m={m}) negative multiplier"));
            }
        }
    }
    for n in [1usize, 3, 5] {
        for m in 1..=8 {
            if !kernel_degrees(n, m).is_empty() {
                problems.push(format!("odd (n={n},m={m}) has a kernel"));
            }
        }
    }
    ensure(problems.is_empty(), if problems.is_empty() { "n in {2,4}, m <= 8 exact; odd n kernel-free".into() } else { problems.join("; ") })
}

fn descent(max_iter: usize) -> DescentTrace<f64> {
    let basis = Basis::Circle;
    let one = SpectralFunction::constant(basis.clone(), 32, 1.0);
    let u0 = one.axpy(0.05, &SpectralFunction::harmonic(basis, 32, 2)).unwrap();
    minimize(1, 3, &u0, &OptimizerConfig { max_iter, ..OptimizerConfig::default() }).unwrap()
}

fn criterion_7() -> Outcome {
    let i1 = value_of_one(1, 3);
    let short = descent(10);
    let long = descent(20);
    let strict = short.rows.windows(2).all(|w| w[1].value < w[0].value);
    let below = short.final_value() <= DESCENT_FACTOR * i1;
    let again = long.best_value() < short.best_value();
    ensure(
        strict && below && again,
        format!(
            "I(1) = {i1:.6e}; maxIter 10: final {:.6e} ({:.1}x I(1), {:?}), strictly decreasing {strict}; maxIter 20: best {:.6e} ({:?})",
            short.final_value(),
            short.final_value() / i1,
            short.termination,
            long.best_value(),
            long.termination
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut golden = SpectralFunction::zeros(Basis::Circle, 64);
    golden.coeffs_mut()[0] = (2.0 * PI).sqrt();
    golden.coeffs_mut()[2] = -PI.sqrt();
    let g = flat_energy_identity(&golden, 1).unwrap();
    let golden_ok = (g.sphere_energy - PI / 4.0).abs() < TOL_GOLDEN && (g.flat_energy - PI / 4.0).abs() < TOL_GOLDEN;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0f64;
    let mut min_flat = f64::INFINITY;
    for m in [1, 2] {
        for _ in 0..100 {
            let u = random_admissible::<f64>(m, 64, 64, &mut rng);
            let r = flat_energy_identity(&u, m).unwrap();
            worst = worst.max(r.rel_error);
            min_flat = min_flat.min(r.flat_energy);
        }
    }
    let b = bump::<f64>(96);
    let conj = [1, 2].map(|m| conjugation_check(&b, m, 200).unwrap().rel_error);
    let conj_worst = conj[0].max(conj[1]);
    ensure(
        golden_ok && worst < TOL_FLAT && min_flat >= 0.0 && conj_worst < TOL_CONJUGATION,
        format!(
            "golden sphere {:.10} flat {:.10}; 2x100 random worst rel {worst:.1e}, min flat energy {min_flat:.3e}; conjugation at L=96 worst {conj_worst:.1e}",
            g.sphere_energy, g.flat_energy
        ),
    )
}

fn criterion_9() -> Outcome {
    let e2 = null_vector_energy::<f64>(1, 1024).unwrap();
    let e4 = null_vector_energy::<f64>(2, 1024).unwrap();
    ensure(e2.abs() < TOL_NULL, format!("E2 = {e2:.2e} (E4 of the m = 2 analogue {e4:.2e})"))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut id_fail = 0;
    let mut dk_fail = 0;
    let mut dk_cases = 0;
    for trial in 0..50 {
        let n = 1 + trial % 3;
        let m = trial % 5;
        let u: RationalPolynomial = random_polynomial(n, 6, 0.3, &mut rng);
        if !check_identity_2_1(&u, m).holds {
            id_fail += 1;
        }
        for k in 1..=3 {
            dk_cases += 1;
            if !check_delta_k_product(&u, k).holds {
                dk_fail += 1;
            }
        }
    }
    for _ in 0..5 {
        let u: RationalPolynomial = random_polynomial(3, 5, 0.5, &mut rng);
        for k in 1..=3 {
            dk_cases += 1;
            if !check_delta_k_product(&u, k).holds {
                dk_fail += 1;
            }
        }
    }
    ensure(id_fail == 0 && dk_fail == 0, format!("identity: {id_fail}/50 nonzero residuals; product rule: {dk_fail}/{dk_cases}"))
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0f64;
    for _ in 0..10 {
        let xi = SpherePoint::on_circle(rng.random_range(0.0..2.0 * PI));
        let u = random_unit(Basis::Circle, 64, 64, &mut rng);
        let g = green_spectral(1, 1, &xi, 64).unwrap();
        let got = g.inner(&apply_p2m(&u, 1, 1).unwrap()).unwrap();
        worst = worst.max((got - u.eval(&xi).unwrap()).abs());
    }
    let xi = SpherePoint::on_circle(0.4);
    let kernel = GreenKernel::new(1, 1, xi.clone()).unwrap();
    let ratios: Vec<f64> = (0..10)
        .map(|j| {
            let zeta = SpherePoint::at_polar_angle(&xi, 0.3 + (PI - 0.3) * j as f64 / 9.0);
            kernel.closed_form(&zeta).unwrap() / kernel.series_value(&zeta, 65536).unwrap()
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / 10.0;
    let spread = ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max) / mean.abs();
    ensure(
        worst < TOL_GREEN_REPRO && spread < TOL_GREEN_RATIO,
        format!("reproduction worst {worst:.1e}; closed/spectral ratio {mean:.10} with spread {spread:.1e}"),
    )
}

fn criterion_12() -> Outcome {
    let c = sin_counterexample(64);
    let mut s = SpectralFunction::zeros(Basis::Circle, 4);
    s.coeffs_mut()[2] = PI.sqrt();
    let e = energy(&s, &s, 1, 2).unwrap();
    let want = -15.0 * PI / 16.0;
    ensure(
        (c.energy - want).abs() < TOL_SIN && (e - want).abs() < TOL_SIN && c.value.is_finite() && c.value < 0.0 && c.neg_norm.is_finite(),
        format!("E4(sin) = {:.15}, norm factor {:.6e}, product {:.6e}", c.energy, c.neg_norm, c.value),
    )
}

fn criterion_13() -> Outcome {
    let measures = [(1usize, 2.0 * PI), (3, 2.0 * PI * PI), (5, PI.powi(3))];
    let mut worst_mu = 0f64;
    let mut worst_parseval = 0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (n, mu) in measures {
        let grid = SpectralGrid::<f64>::oversampled(n, 24, 2);
        let ones = vec![1.0; grid.rule().len()];
        worst_mu = worst_mu.max((grid.integrate(&ones) - mu).abs());
        let basis = if n == 1 { Basis::Circle } else { Basis::zonal(n, SpherePoint::north(n)).unwrap() };
        for _ in 0..5 {
            let u = random_unit(basis.clone(), 24, 24, &mut rng).scaled(rng.random_range(0.5..3.0));
            let vals = grid.synthesize(&u).unwrap();
            let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
            let norm2: f64 = u.coeffs().iter().map(|c| c * c).sum();
            worst_parseval = worst_parseval.max((grid.integrate(&sq) - norm2).abs() / norm2);
        }
    }
    ensure(
        worst_mu < TOL_MEASURE && worst_parseval < TOL_PARSEVAL,
        format!("integrate(1) worst abs error {worst_mu:.1e}; Parseval worst rel {worst_parseval:.1e}"),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("sharp constant n=1 m=1", criterion_1),
        ("sharp constant n=1 m=2", criterion_2),
        ("closed-form constants n=3", criterion_3),
        ("Mobius covariance", criterion_4),
        ("instability trichotomy", criterion_5),
        ("even-dimension kernel", criterion_6),
        ("descent below I(1) for n=1 m=3", criterion_7),
        ("flat energy identity", criterion_8),
        ("null vector of E2", criterion_9),
        ("polynomial identity", criterion_10),
        ("Green's function", criterion_11),
        ("sin counterexample", criterion_12),
        ("quadrature sanity", criterion_13),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr().lock();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        // written to the raw stream so the lines survive test output capture
        writeln!(err, "criterion {:>2} {tag}: {name}: {detail}", k + 1).unwrap();
        if outcome.is_err() {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
