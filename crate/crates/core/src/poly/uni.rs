use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

use super::{Monomial, Poly3};

/// Dense univariate polynomial; `coeffs[i]` multiplies `x^i`.
///
/// Trailing zeros are always trimmed, so the zero polynomial has an empty
/// coefficient list and degree `-1`.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly1<T> {
    coeffs: Vec<T>,
}

/// Which variable of `(u, v, t)` a univariate polynomial is lifted into.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Var {
    U,
    V,
    T,
}

impl<T: Scalar> Poly1<T> {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::new(vec![T::zero(), T::one()])
    }

    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn degree(&self) -> i32 {
        self.coeffs.len() as i32 - 1
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::zero)
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::constant(T::one());
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Lifts into the trivariate ring as a polynomial in one variable.
    pub fn lift(&self, var: Var) -> Poly3<T> {
        let mut out = Poly3::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            let i = i as u32;
            let m = match var {
                Var::U => Monomial::new(i, 0, 0),
                Var::V => Monomial::new(0, i, 0),
                Var::T => Monomial::new(0, 0, i),
            };
            out.add_term(m, c.clone());
        }
        out
    }

    pub fn map<S: Scalar>(&self, f: impl Fn(&T) -> S) -> Poly1<S> {
        Poly1::new(self.coeffs.iter().map(f).collect())
    }
}

impl<T: Scalar> Add for &Poly1<T> {
    type Output = Poly1<T>;
    fn add(self, rhs: &Poly1<T>) -> Poly1<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly1::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Sub for &Poly1<T> {
    type Output = Poly1<T>;
    fn sub(self, rhs: &Poly1<T>) -> Poly1<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly1::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Neg for &Poly1<T> {
    type Output = Poly1<T>;
    fn neg(self) -> Poly1<T> {
        Poly1::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<T: Scalar> Mul for &Poly1<T> {
    type Output = Poly1<T>;
    fn mul(self, rhs: &Poly1<T>) -> Poly1<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly1::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly1::new(out)
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for Poly1<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*x")?,
                _ => write!(f, "({c})*x^{i}")?,
            }
        }
        Ok(())
    }
}
