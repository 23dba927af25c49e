use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::poly::{gegenbauer, gegenbauer_family, json as polyjson, Poly1, Poly3, TriPoly, Var};
use crate::scalar::{Rational, Scalar};

use super::dims::harm_dim;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Entries carry the `lambda_{i,j}` factor; orthonormal up to `1/h_k^{n-1}`.
    Normalized,
    /// `lambda_{i,j}` removed: congruent to the normalized family and rational.
    Unnormalized,
}

/// `Q_k^{n-1}(u,v,t) = ((1-u^2)(1-v^2))^{k/2} P_k^{n-1}((t-uv)/sqrt((1-u^2)(1-v^2)))`,
/// expanded into a genuine polynomial using the parity of `P_k^{n-1}`.
pub fn q_poly(n: u32, k: u32) -> Result<TriPoly> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "q_poly needs n >= 3, got {n}"
        )));
    }
    let p = gegenbauer(n - 1, k)?;
    let one = TriPoly::constant(Rational::from_integer(1.into()));
    let s = &(&one - &(&TriPoly::u() * &TriPoly::u())) * &(&one - &(&TriPoly::v() * &TriPoly::v()));
    let x = &TriPoly::t() - &(&TriPoly::u() * &TriPoly::v());
    let mut out = TriPoly::zero();
    for (j, c) in p.coeffs().iter().enumerate() {
        if num_traits::Zero::is_zero(c) {
            continue;
        }
        let j = j as u32;
        debug_assert_eq!((k - j) % 2, 0);
        let term = &x.pow(j) * &s.pow((k - j) / 2);
        out.add_scaled(&term, c);
    }
    Ok(out)
}

/// `omega_m / omega_{m-1}` with `omega_m = 2 pi^{m/2} / Gamma(m/2)`.
pub fn omega_ratio(m: u32) -> f64 {
    let m = f64::from(m);
    std::f64::consts::PI.sqrt() * (ln_gamma((m - 1.0) / 2.0) - ln_gamma(m / 2.0)).exp()
}

/// `lambda_{i,j}` for block `k` of the family on `S^{n-1}`.
pub fn lambda(n: u32, k: u32, i: u32, j: u32) -> f64 {
    let m = n + 2 * k;
    omega_ratio(n) / omega_ratio(m) * ((harm_dim(m, i) * harm_dim(m, j)) as f64).sqrt()
}

/// The zonal matrices `Y_0^n, ..., Y_d^n`.
///
/// Block `k` is `(d-k+1) x (d-k+1)` with entry
/// `lambda_{i,j} P_i^{n+2k}(u) P_j^{n+2k}(v) Q_k^{n-1}(u,v,t)` (or without
/// `lambda` when unnormalized). Swapping `u` and `v` in entry `(i, j)` gives
/// entry `(j, i)`, so `<A, Y_k> = <A, Ybar_k>` for symmetric `A`.
#[derive(Clone, Debug)]
pub struct ZonalFamily<T> {
    n: u32,
    d: u32,
    normalization: Normalization,
    /// `p[k][i] = P_i^{n+2k}` for `i <= d-k`.
    p: Vec<Vec<Poly1<T>>>,
    q: Vec<Poly3<T>>,
    lambda: Vec<SymMatrix<T>>,
    blocks: Vec<Vec<Vec<Poly3<T>>>>,
}

impl<T: Scalar> ZonalFamily<T> {
    pub fn new(n: u32, d: u32, normalization: Normalization) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "zonal family needs n >= 3, got {n}"
            )));
        }
        if normalization == Normalization::Normalized && T::is_exact() {
            return Err(Error::InvalidParameter(
                "normalized families carry irrational weights; use a floating point scalar".into(),
            ));
        }
        let mut p = Vec::new();
        let mut q = Vec::new();
        let mut lambdas = Vec::new();
        let mut blocks = Vec::new();
        for k in 0..=d {
            let size = (d - k + 1) as usize;
            let pk: Vec<Poly1<T>> = gegenbauer_family(n + 2 * k, d - k)?
                .iter()
                .map(|poly| poly.map(T::from_rational))
                .collect();
            let qk = q_poly(n, k)?.map(T::from_rational);
            let lam = match normalization {
                Normalization::Unnormalized => SymMatrix::from_fn(size, |_, _| T::one()),
                Normalization::Normalized => SymMatrix::from_fn(size, |i, j| {
                    let l = lambda(n, k, i as u32, j as u32);
                    T::from_rational(&Rational::from_float(l).expect("finite lambda"))
                }),
            };
            let pu: Vec<Poly3<T>> = pk.iter().map(|x| x.lift(Var::U)).collect();
            let pv: Vec<Poly3<T>> = pk.iter().map(|x| x.lift(Var::V)).collect();
            let rows: Vec<Vec<Poly3<T>>> = (0..size)
                .map(|i| {
                    (0..size)
                        .map(|j| (&(&pu[i] * &pv[j]) * &qk).scale(lam.get(i, j)))
                        .collect()
                })
                .collect();
            p.push(pk);
            q.push(qk);
            lambdas.push(lam);
            blocks.push(rows);
        }
        Ok(Self {
            n,
            d,
            normalization,
            p,
            q,
            lambda: lambdas,
            blocks,
        })
    }

    pub fn unnormalized(n: u32, d: u32) -> Result<Self> {
        Self::new(n, d, Normalization::Unnormalized)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn block_size(&self, k: u32) -> usize {
        (self.d - k + 1) as usize
    }

    /// `(Y_k)_{i,j}`.
    pub fn entry(&self, k: u32, i: usize, j: usize) -> &Poly3<T> {
        &self.blocks[k as usize][i][j]
    }

    /// `(Ybar_k)_{i,j} = ((Y_k)_{i,j} + (Y_k)_{j,i}) / 2`.
    pub fn symmetrized_entry(&self, k: u32, i: usize, j: usize) -> Poly3<T> {
        if i == j {
            return self.entry(k, i, i).clone();
        }
        let half = T::one() / (T::one() + T::one());
        (self.entry(k, i, j) + self.entry(k, j, i)).scale(&half)
    }

    /// `P_i^{n+2k}`.
    pub fn p(&self, k: u32, i: usize) -> &Poly1<T> {
        &self.p[k as usize][i]
    }

    /// `Q_k^{n-1}`.
    pub fn q(&self, k: u32) -> &Poly3<T> {
        &self.q[k as usize]
    }

    pub fn lambda(&self, k: u32) -> &SymMatrix<T> {
        &self.lambda[k as usize]
    }

    /// Numeric `Ybar_k(u, v, t)`.
    pub fn eval_block(&self, k: u32, point: [f64; 3]) -> SymMatrix<f64> {
        let kk = k as usize;
        let [u, v, t] = point;
        let q = self.q[kk].eval_f64([u, v, t]);
        let pu: Vec<f64> = self.p[kk].iter().map(|x| x.eval_f64(u)).collect();
        let pv: Vec<f64> = self.p[kk].iter().map(|x| x.eval_f64(v)).collect();
        let lam = &self.lambda[kk];
        SymMatrix::from_fn(self.block_size(k), |i, j| {
            0.5 * (pu[i] * pv[j] + pu[j] * pv[i]) * q * lam.get(i, j).to_f64()
        })
    }

    /// Family as JSON: the header `{n, d, normalization}` plus every block
    /// entry in the polynomial wire format.
    pub fn to_json(&self) -> Value {
        let blocks: Vec<Value> = self
            .blocks
            .iter()
            .map(|rows| {
                Value::Array(
                    rows.iter()
                        .map(|row| Value::Array(row.iter().map(polyjson::to_json).collect()))
                        .collect(),
                )
            })
            .collect();
        json!({
            "n": self.n,
            "d": self.d,
            "normalization": self.normalization,
            "blocks": blocks,
        })
    }
}
