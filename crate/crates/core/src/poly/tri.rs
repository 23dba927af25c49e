use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

use super::{Monomial, Poly1};

/// Sparse polynomial in `(u, v, t)`.
///
/// Terms are kept in graded-lex order and zero coefficients are never
/// stored, so structural equality is polynomial equality.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly3<T> {
    terms: BTreeMap<Monomial, T>,
}

impl<T: Scalar> Default for Poly3<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Scalar> Poly3<T> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: T) -> Self {
        Self::monomial(Monomial::ONE, c)
    }

    pub fn monomial(m: Monomial, c: T) -> Self {
        let mut out = Self::zero();
        out.add_term(m, c);
        out
    }

    pub fn u() -> Self {
        Self::monomial(Monomial::new(1, 0, 0), T::one())
    }

    pub fn v() -> Self {
        Self::monomial(Monomial::new(0, 1, 0), T::one())
    }

    pub fn t() -> Self {
        Self::monomial(Monomial::new(0, 0, 1), T::one())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, T)>) -> Self {
        let mut out = Self::zero();
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    /// Adds `c * m` in place.
    pub fn add_term(&mut self, m: Monomial, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Poly3<T>, c: &T) {
        if c.is_zero() {
            return;
        }
        for (m, a) in &other.terms {
            self.add_term(*m, a.clone() * c.clone());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> T {
        self.terms.get(m).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn max_over(&self, f: impl Fn(&Monomial) -> u32) -> i32 {
        self.terms.keys().map(|m| f(m) as i32).max().unwrap_or(-1)
    }

    pub fn deg_u(&self) -> i32 {
        self.max_over(|m| m.u)
    }

    pub fn deg_v(&self) -> i32 {
        self.max_over(|m| m.v)
    }

    pub fn deg_t(&self) -> i32 {
        self.max_over(|m| m.t)
    }

    /// Total degree in `(u, t)`, the grading that defines `R_d`.
    pub fn deg_ut(&self) -> i32 {
        self.max_over(|m| m.degree_ut())
    }

    pub fn deg_total(&self) -> i32 {
        self.max_over(|m| m.degree())
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(m, a)| (*m, a.clone() * c.clone())))
    }

    /// Exchanges the roles of `u` and `v`.
    pub fn swap_uv(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.swap_uv(), c.clone()))
                .collect(),
        }
    }

    pub fn is_uv_symmetric(&self) -> bool {
        self.terms
            .iter()
            .all(|(m, c)| self.terms.get(&m.swap_uv()) == Some(c))
    }

    /// `(F + swap_uv(F)) / 2`.
    pub fn symmetrize(&self) -> Self {
        let half = T::one() / (T::one() + T::one());
        (self + &self.swap_uv()).scale(&half)
    }

    /// The univariate polynomial `u -> F(u, u, 1)`.
    pub fn restrict_diagonal(&self) -> Poly1<T> {
        let deg = self.terms.keys().map(|m| (m.u + m.v) as usize).max();
        let Some(deg) = deg else {
            return Poly1::zero();
        };
        let mut coeffs = vec![T::zero(); deg + 1];
        for (m, c) in &self.terms {
            let i = (m.u + m.v) as usize;
            coeffs[i] = coeffs[i].clone() + c.clone();
        }
        Poly1::new(coeffs)
    }

    /// Exact evaluation in the coefficient field.
    pub fn eval(&self, point: [&T; 3]) -> T {
        let max = self.max_over(|m| m.u.max(m.v).max(m.t)).max(0) as usize;
        let powers: Vec<Vec<T>> = point
            .iter()
            .map(|x| {
                let mut p = Vec::with_capacity(max + 1);
                p.push(T::one());
                for i in 1..=max {
                    let next = p[i - 1].clone() * (*x).clone();
                    p.push(next);
                }
                p
            })
            .collect();
        self.terms.iter().fold(T::zero(), |acc, (m, c)| {
            acc + c.clone()
                * powers[0][m.u as usize].clone()
                * powers[1][m.v as usize].clone()
                * powers[2][m.t as usize].clone()
        })
    }

    /// Floating point evaluation at a real point.
    pub fn eval_f64(&self, point: [f64; 3]) -> f64 {
        self.terms.iter().fold(0.0, |acc, (m, c)| {
            acc + c.to_f64()
                * point[0].powi(m.u as i32)
                * point[1].powi(m.v as i32)
                * point[2].powi(m.t as i32)
        })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::constant(T::one());
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Coefficient of `t^k`, as a polynomial in `(u, v)`.
    pub fn t_slice(&self, k: u32) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.t == k)
                .map(|(m, c)| (Monomial::new(m.u, m.v, 0), c.clone())),
        )
    }

    pub fn map<S: Scalar>(&self, f: impl Fn(&T) -> S) -> Poly3<S> {
        Poly3::from_terms(self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    pub fn to_f64(&self) -> Poly3<f64> {
        self.map(|c| c.to_f64())
    }

    /// Sum of absolute coefficients. Bounds `|F|` on `[-1, 1]^3`.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }
}

impl<T: Scalar> Add for &Poly3<T> {
    type Output = Poly3<T>;
    fn add(self, rhs: &Poly3<T>) -> Poly3<T> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl<T: Scalar> Sub for &Poly3<T> {
    type Output = Poly3<T>;
    fn sub(self, rhs: &Poly3<T>) -> Poly3<T> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl<T: Scalar> Neg for &Poly3<T> {
    type Output = Poly3<T>;
    fn neg(self) -> Poly3<T> {
        Poly3 {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

impl<T: Scalar> Mul for &Poly3<T> {
    type Output = Poly3<T>;
    fn mul(self, rhs: &Poly3<T>) -> Poly3<T> {
        let mut out = Poly3::zero();
        for (ma, a) in &self.terms {
            for (mb, b) in &rhs.terms {
                out.add_term(ma.mul(mb), a.clone() * b.clone());
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl<T: Scalar> $tr for Poly3<T> {
            type Output = Poly3<T>;
            fn $f(self, rhs: Poly3<T>) -> Poly3<T> {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Scalar + fmt::Display> fmt::Display for Poly3<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.degree() == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "({c})*{m}")?;
            }
        }
        Ok(())
    }
}
