//! Sparse multivariate polynomials over a [`Scalar`] ring and exact checks of
//! the induction identities for Δ^k((1+|x|²)/2 · u).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

/// Σ c_a x^a with no zero coefficients stored.
#[derive(Clone, PartialEq)]
pub struct Polynomial<S> {
    n: usize,
    terms: BTreeMap<Vec<u32>, S>,
}

pub type RationalPolynomial = Polynomial<BigRational>;

impl<S: Scalar> Polynomial<S> {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: S) -> Self {
        Self::monomial(n, vec![0; n], c)
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, S::one())
    }

    pub fn monomial(n: usize, exps: Vec<u32>, c: S) -> Self {
        assert_eq!(exps.len(), n, "exponent length must equal the number of variables");
        let mut p = Self::zero(n);
        p.add_term(exps, c);
        p
    }

    /// x_i, 0-based.
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(n, e, S::one())
    }

    /// (1 + |x|²)/2.
    pub fn conformal_weight(n: usize) -> Self {
        let half = S::from_ratio(1, 2);
        let mut p = Self::constant(n, half.clone());
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 2;
            p.add_term(e, half.clone());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &S)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn coeff(&self, exps: &[u32]) -> S {
        self.terms.get(exps).cloned().unwrap_or_else(S::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    fn add_term(&mut self, exps: Vec<u32>, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_zero() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone() * s.clone());
        }
        out
    }

    /// ∂/∂x_i.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c.clone() * S::from_int(e[i] as i64));
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            for i in 0..self.n {
                if e[i] < 2 {
                    continue;
                }
                let mut d = e.clone();
                d[i] -= 2;
                out.add_term(d, c.clone() * S::from_int((e[i] * (e[i] - 1)) as i64));
            }
        }
        out
    }

    pub fn laplacian_pow(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.laplacian())
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(self.n), |p, _| &p * self)
    }

    fn check_vars(&self, other: &Self) {
        assert_eq!(self.n, other.n, "polynomials in different numbers of variables");
    }
}

impl<S: Scalar> Add for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn add(self, rhs: Self) -> Polynomial<S> {
        self.check_vars(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<S: Scalar> Sub for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn sub(self, rhs: Self) -> Polynomial<S> {
        self.check_vars(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<S: Scalar> Neg for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn neg(self) -> Polynomial<S> {
        self.scale(&-S::one())
    }
}

impl<S: Scalar> Mul for &Polynomial<S> {
    type Output = Polynomial<S>;
    fn mul(self, rhs: Self) -> Polynomial<S> {
        self.check_vars(rhs);
        let mut out = Polynomial::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<S: Scalar + fmt::Display> fmt::Display for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{p}", i + 1)?,
                }
            }
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Debug for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

pub fn laplacian<S: Scalar>(p: &Polynomial<S>) -> Polynomial<S> {
    p.laplacian()
}

/// Outcome of an exact identity check: `residual` is LHS − RHS.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck<S: Scalar> {
    pub holds: bool,
    pub residual: Polynomial<S>,
}

impl<S: Scalar> IdentityCheck<S> {
    fn from_sides(lhs: &Polynomial<S>, rhs: &Polynomial<S>) -> Self {
        let residual = lhs - rhs;
        Self { holds: residual.is_zero(), residual }
    }
}

/// Δ[w^{m+1}Δ^m u] + m(m+1)w^{m−1}Δ^m u = w^m Δ^{m+1}(w u), w = (1+|x|²)/2.
pub fn check_identity_2_1<S: Scalar>(u: &Polynomial<S>, m: usize) -> IdentityCheck<S> {
    let n = u.nvars();
    let w = Polynomial::<S>::conformal_weight(n);
    let dm = u.laplacian_pow(m);
    let mut lhs = (&w.pow(m + 1) * &dm).laplacian();
    if m > 0 {
        let c = S::from_int((m * (m + 1)) as i64);
        lhs = &lhs + &(&w.pow(m - 1) * &dm).scale(&c);
    }
    let rhs = &w.pow(m) * &(&w * u).laplacian_pow(m + 1);
    IdentityCheck::from_sides(&lhs, &rhs)
}

/// Δ^k(w u) = k(2k+n−2)Δ^{k−1}u + 2k Σ_i x_i Δ^{k−1}∂_i u + w Δ^k u.
pub fn check_delta_k_product<S: Scalar>(u: &Polynomial<S>, k: usize) -> IdentityCheck<S> {
    assert!(k >= 1, "k must be at least 1");
    let n = u.nvars();
    let w = Polynomial::<S>::conformal_weight(n);
    let lhs = (&w * u).laplacian_pow(k);
    let (ki, ni) = (k as i64, n as i64);
    let mut rhs = u.laplacian_pow(k - 1).scale(&S::from_int(ki * (2 * ki + ni - 2)));
    let mut radial = Polynomial::zero(n);
    for i in 0..n {
        radial = &radial + &(&Polynomial::var(n, i) * &u.derivative(i).laplacian_pow(k - 1));
    }
    rhs = &rhs + &radial.scale(&S::from_int(2 * ki));
    rhs = &rhs + &(&w * &u.laplacian_pow(k));
    IdentityCheck::from_sides(&lhs, &rhs)
}

/// Random polynomial in n variables of total degree ≤ `degree`, each monomial
/// present with probability `density` and a coefficient p/q, |p| ≤ 9, 1 ≤ q ≤ 4.
pub fn random_polynomial<S: Scalar>(n: usize, degree: u32, density: f64, rng: &mut ChaCha8Rng) -> Polynomial<S> {
    let mut p = Polynomial::zero(n);
    let mut e = vec![0u32; n];
    loop {
        if e.iter().sum::<u32>() <= degree && rng.random_bool(density) {
            let num = rng.random_range(-9i64..=9);
            let den = rng.random_range(1i64..=4);
            p.add_term(e.clone(), S::from_ratio(num, den));
        }
        // odometer over [0, degree]^n
        let mut i = 0;
        while i < n {
            if e[i] < degree {
                e[i] += 1;
                break;
            }
            e[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use rand::SeedableRng;

    type P = RationalPolynomial;

    fn q(a: i64) -> BigRational {
        rational(a, 1)
    }

    #[test]
    fn laplacian_examples() {
        let r2 = &(&P::var(3, 0) * &P::var(3, 0)) + &(&(&P::var(3, 1) * &P::var(3, 1)) + &(&P::var(3, 2) * &P::var(3, 2)));
        assert_eq!(r2.laplacian(), P::constant(3, q(6)));
        let x1_3 = P::monomial(1, vec![3], q(1));
        assert_eq!(x1_3.laplacian(), P::monomial(1, vec![1], q(6)));
        let p = &P::monomial(2, vec![2, 1], q(1)) - &P::monomial(2, vec![0, 3], q(1));
        assert_eq!(p.laplacian(), P::monomial(2, vec![0, 1], q(-4)));
        let h = &P::monomial(2, vec![3, 0], q(1)) - &P::monomial(2, vec![1, 2], q(3));
        assert!(h.laplacian().is_zero());
    }

    #[test]
    fn identity_small_cases() {
        for n in 1..=3 {
            assert!(check_identity_2_1(&P::one(n), 0).holds);
            assert!(check_delta_k_product(&P::one(n), 1).holds);
        }
        assert!(check_identity_2_1(&P::var(3, 0), 1).holds);
        let u = &P::var(2, 0) * &P::var(2, 1);
        assert!(check_delta_k_product(&u, 2).holds);
    }

    #[test]
    fn wrong_constant_leaves_residual() {
        // replacing m(m+1) by m² breaks the identity whenever Δ^m u ≠ 0
        let n = 2;
        let u = P::monomial(n, vec![2, 2], q(1));
        let m = 1;
        let w = P::conformal_weight(n);
        let dm = u.laplacian_pow(m);
        let lhs = &(&w.pow(m + 1) * &dm).laplacian() + &dm;
        let rhs = &w.pow(m) * &(&w * &u).laplacian_pow(m + 1);
        assert!(!(&lhs - &rhs).is_zero());
    }

    #[test]
    fn random_generator_respects_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p: P = random_polynomial(3, 4, 0.5, &mut rng);
        assert!(p.total_degree().unwrap() <= 4);
        assert!(p.terms().all(|(_, c)| *c != q(0)));
    }
}
