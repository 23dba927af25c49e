//! Tensor Chebyshev coordinates for polynomials in `(u, v, t)`.
//!
//! A [`Poly3`] "in Chebyshev coordinates" stores at exponent `(a, b, c)` the
//! coefficient of `T_a(u) T_b(v) T_c(t)`. Every product `T_a T_b T_c` is
//! bounded by 1 on `[-1, 1]^3`, like a monomial.

use crate::scalar::Scalar;

use super::{Monomial, Poly1, Poly3};

/// Monomial coefficients of `T_0, ..., T_max_k`.
pub fn chebyshev_family<T: Scalar>(max_k: u32) -> Vec<Poly1<T>> {
    let mut out = vec![Poly1::constant(T::one())];
    if max_k == 0 {
        return out;
    }
    out.push(Poly1::x());
    let two_x = Poly1::x().scale(&T::from_i64(2));
    for k in 1..max_k as usize {
        let next = &(&two_x * &out[k]) - &out[k - 1];
        out.push(next);
    }
    out
}

/// `x^a = 2^{-a} sum_j binom(a, j) T_{|a - 2j|}`, as a dense vector indexed
/// by the Chebyshev degree.
fn power_in_chebyshev<T: Scalar>(a: u32) -> Vec<T> {
    let mut out = vec![T::zero(); a as usize + 1];
    let mut binom = T::one();
    let mut scale = T::one();
    for _ in 0..a {
        scale = scale / T::from_i64(2);
    }
    for j in 0..=a {
        let idx = (i64::from(a) - 2 * i64::from(j)).unsigned_abs() as usize;
        out[idx] = out[idx].clone() + binom.clone() * scale.clone();
        binom = binom * T::from_i64(i64::from(a - j)) / T::from_i64(i64::from(j) + 1);
    }
    out
}

/// Converts monomial coefficients to Chebyshev coordinates.
pub fn to_chebyshev<T: Scalar>(p: &Poly3<T>) -> Poly3<T> {
    let max = p
        .terms()
        .map(|(m, _)| m.u.max(m.v).max(m.t))
        .max()
        .unwrap_or(0);
    let table: Vec<Vec<T>> = (0..=max).map(power_in_chebyshev).collect();
    let mut out = Poly3::zero();
    for (m, c) in p.terms() {
        for (a, ca) in table[m.u as usize]
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
        {
            for (b, cb) in table[m.v as usize]
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
            {
                let cab = c.clone() * ca.clone() * cb.clone();
                for (e, ce) in table[m.t as usize]
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                {
                    out.add_term(
                        Monomial::new(a as u32, b as u32, e as u32),
                        cab.clone() * ce.clone(),
                    );
                }
            }
        }
    }
    out
}

/// Converts Chebyshev coordinates back to monomial coefficients.
pub fn from_chebyshev<T: Scalar>(p: &Poly3<T>) -> Poly3<T> {
    let max = p
        .terms()
        .map(|(m, _)| m.u.max(m.v).max(m.t))
        .max()
        .unwrap_or(0);
    let fam = chebyshev_family::<T>(max);
    let mut out = Poly3::zero();
    for (m, c) in p.terms() {
        for (a, ca) in fam[m.u as usize]
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
        {
            for (b, cb) in fam[m.v as usize]
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
            {
                let cab = c.clone() * ca.clone() * cb.clone();
                for (e, ce) in fam[m.t as usize]
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                {
                    out.add_term(
                        Monomial::new(a as u32, b as u32, e as u32),
                        cab.clone() * ce.clone(),
                    );
                }
            }
        }
    }
    out
}

/// Product of two polynomials given in Chebyshev coordinates, using
/// `T_a T_b = (T_{a+b} + T_{|a-b|}) / 2` in each variable.
pub fn chebyshev_mul<T: Scalar>(f: &Poly3<T>, g: &Poly3<T>) -> Poly3<T> {
    let eighth = T::one() / T::from_i64(8);
    let split = |a: u32, b: u32| [a + b, a.abs_diff(b)];
    let mut out = Poly3::zero();
    for (m, c) in f.terms() {
        for (n, d) in g.terms() {
            let w = c.clone() * d.clone() * eighth.clone();
            for a in split(m.u, n.u) {
                for b in split(m.v, n.v) {
                    for e in split(m.t, n.t) {
                        out.add_term(Monomial::new(a, b, e), w.clone());
                    }
                }
            }
        }
    }
    out
}
