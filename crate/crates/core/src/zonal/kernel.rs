use num_traits::Float;

use crate::error::{Error, Result};
use crate::poly::Poly3;
use crate::scalar::Scalar;

use super::dims::harm_dim;
use super::family::{Normalization, ZonalFamily};

/// `K_d(., p) = sum_k h_k^{n-1} <Ybar_k(.), Ybar_k(p)>`, the reproducing
/// kernel of `R_d` for the inner product induced by the sphere.
pub fn reproducing_kernel<T: Scalar + Float>(
    family: &ZonalFamily<T>,
    point: [f64; 3],
) -> Result<Poly3<T>> {
    if family.normalization() != Normalization::Normalized {
        return Err(Error::NeedsNormalized);
    }
    let n = family.n();
    let mut out = Poly3::zero();
    for k in 0..=family.d() {
        let weight = harm_dim(n - 1, k) as f64;
        let at_point = family.eval_block(k, point);
        let size = family.block_size(k);
        for i in 0..size {
            for j in 0..size {
                let c = weight * at_point.get(i, j);
                if c != 0.0 {
                    out.add_scaled(family.entry(k, i, j), &T::from(c).expect("finite weight"));
                }
            }
        }
    }
    Ok(out)
}
