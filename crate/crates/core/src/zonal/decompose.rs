use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::poly::{Monomial, Poly1, Poly3};
use crate::scalar::{rational_to_string, Scalar};

use super::family::ZonalFamily;

/// Matrix coefficients `(F_0, ..., F_d)` with `F = sum_k <F_k, Ybar_k>`.
#[derive(Clone, PartialEq, Debug)]
pub struct MatrixCoefficients<T> {
    pub d: u32,
    pub matrices: Vec<SymMatrix<T>>,
}

impl<T: Scalar> MatrixCoefficients<T> {
    pub fn zeros(d: u32) -> Self {
        Self {
            d,
            matrices: (0..=d)
                .map(|k| SymMatrix::zeros((d - k + 1) as usize))
                .collect(),
        }
    }

    pub fn to_f64(&self) -> MatrixCoefficients<f64> {
        MatrixCoefficients {
            d: self.d,
            matrices: self.matrices.iter().map(SymMatrix::to_f64).collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        let mats: Vec<Value> = self
            .matrices
            .iter()
            .map(|m| {
                json!(m
                    .rows()
                    .iter()
                    .map(|r| r
                        .iter()
                        .map(|x| x
                            .to_rational()
                            .map(|q| rational_to_string(&q))
                            .unwrap_or_default())
                        .collect::<Vec<_>>())
                    .collect::<Vec<_>>())
            })
            .collect();
        json!({ "d": self.d, "matrices": mats })
    }
}

/// Expresses `u^a` in the basis `basis[0..]` of polynomials with degree
/// `i` in slot `i`. Row `a` holds the coordinates of `u^a`.
fn monomial_to_basis<T: Scalar>(basis: &[Poly1<T>]) -> Vec<Vec<T>> {
    let size = basis.len();
    let mut out = vec![vec![T::zero(); size]; size];
    for a in 0..size {
        let mut coeffs = vec![T::zero(); a + 1];
        coeffs[a] = T::one();
        let mut rem = Poly1::new(coeffs);
        for i in (0..=a).rev() {
            let c = rem.coeff(i) / basis[i].leading();
            if !c.is_zero() {
                rem = &rem - &basis[i].scale(&c);
            }
            out[a][i] = c;
        }
    }
    out
}

fn approx_symmetric<T: Scalar>(f: &Poly3<T>) -> bool {
    if T::is_exact() {
        return f.is_uv_symmetric();
    }
    let scale = f.max_abs_coeff().max(1.0);
    f.terms()
        .all(|(m, c)| (c.to_f64() - f.coeff(&m.swap_uv()).to_f64()).abs() <= 1e-10 * scale)
}

/// Matrix coefficients of `F` in `R_d` (symmetric, `deg_t <= d`, total
/// `(u, t)`-degree `<= d`).
///
/// Blocks are peeled from the top: `Q_k` is the only source of `t`-degree
/// `k`, so the `t^k` slice of the residual divided by the leading
/// coefficient of `P_k^{n-1}` is `q_k(u, v)`, which is then expanded in the
/// products `P_i^{n+2k}(u) P_j^{n+2k}(v)`. Exact for rational input.
pub fn decompose<T: Scalar>(
    f: &Poly3<T>,
    family: &ZonalFamily<T>,
) -> Result<MatrixCoefficients<T>> {
    let d = family.d();
    if !approx_symmetric(f) {
        return Err(Error::Asymmetric);
    }
    if f.deg_t() > d as i32 {
        return Err(Error::NotInSpace {
            d,
            reason: format!("deg_t = {} > {d}", f.deg_t()),
        });
    }
    if f.deg_ut() > d as i32 {
        return Err(Error::NotInSpace {
            d,
            reason: format!("deg_(u,t) = {} > {d}", f.deg_ut()),
        });
    }

    let mut residual = f.clone();
    let mut matrices = vec![SymMatrix::zeros(0); (d + 1) as usize];
    for k in (0..=d).rev() {
        let size = family.block_size(k);
        let lead = family.q(k).coeff(&Monomial::new(0, 0, k));
        let slice = residual.t_slice(k).scale(&(T::one() / lead));
        if slice.deg_u() >= size as i32 {
            return Err(Error::NotInSpace {
                d,
                reason: format!(
                    "t^{k} coefficient has u-degree {} > {}",
                    slice.deg_u(),
                    d - k
                ),
            });
        }
        residual = &residual - &(&slice * family.q(k));

        let basis: Vec<Poly1<T>> = (0..size).map(|i| family.p(k, i).clone()).collect();
        let change = monomial_to_basis(&basis);
        let mut coeff: SymMatrix<T> = SymMatrix::zeros(size);
        for (m, c) in slice.terms() {
            let (a, b) = (m.u as usize, m.v as usize);
            for i in 0..=a {
                if change[a][i].is_zero() {
                    continue;
                }
                let ci = c.clone() * change[a][i].clone();
                for j in 0..=b {
                    if change[b][j].is_zero() {
                        continue;
                    }
                    let v = coeff.get(i, j).clone() + ci.clone() * change[b][j].clone();
                    coeff.set(i, j, v);
                }
            }
        }
        let lam = family.lambda(k);
        let fk = SymMatrix::from_fn(size, |i, j| {
            // average the two triangles so float input yields exact symmetry
            let half = T::one() / (T::one() + T::one());
            (coeff.get(i, j).clone() + coeff.get(j, i).clone()) * half / lam.get(i, j).clone()
        });
        matrices[k as usize] = fk;
    }
    if T::is_exact() && !residual.is_zero() {
        return Err(Error::NotInSpace {
            d,
            reason: "nonzero remainder after elimination".into(),
        });
    }
    Ok(MatrixCoefficients { d, matrices })
}

/// `sum_k <F_k, Ybar_k>` as an explicit polynomial.
pub fn reconstruct<T: Scalar>(
    coeffs: &MatrixCoefficients<T>,
    family: &ZonalFamily<T>,
) -> Result<Poly3<T>> {
    if coeffs.matrices.len() != (family.d() + 1) as usize {
        return Err(Error::SizeMismatch(format!(
            "{} coefficient blocks for a family of degree {}",
            coeffs.matrices.len(),
            family.d()
        )));
    }
    let mut out = Poly3::zero();
    for (k, m) in coeffs.matrices.iter().enumerate() {
        let k = k as u32;
        if m.dim() != family.block_size(k) {
            return Err(Error::SizeMismatch(format!(
                "block {k} has size {}, expected {}",
                m.dim(),
                family.block_size(k)
            )));
        }
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                out.add_scaled(family.entry(k, i, j), m.get(i, j));
            }
        }
    }
    Ok(out)
}

/// Outcome of the positive definiteness test.
#[derive(Clone, Debug)]
pub struct DefinitenessReport {
    pub positive_definite: bool,
    pub min_eigenvalues: Vec<f64>,
    pub spectra: Vec<Vec<f64>>,
}

/// `F` is positive definite iff every matrix coefficient is PSD; blocks with
/// minimum eigenvalue `>= -tol` count as PSD.
pub fn is_positive_definite<T: Scalar>(
    f: &Poly3<T>,
    family: &ZonalFamily<T>,
    tol: f64,
) -> Result<DefinitenessReport> {
    let coeffs = decompose(f, family)?;
    let spectra: Vec<Vec<f64>> = coeffs
        .matrices
        .iter()
        .map(|m| m.to_f64().eigenvalues())
        .collect();
    let min_eigenvalues: Vec<f64> = spectra
        .iter()
        .map(|s| s.first().copied().unwrap_or(0.0))
        .collect();
    let positive_definite = min_eigenvalues.iter().all(|&e| e >= -tol);
    Ok(DefinitenessReport {
        positive_definite,
        min_eigenvalues,
        spectra,
    })
}
