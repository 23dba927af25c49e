//! Zonal matrices `Y_k^n` for the stabilizer of a pole, the matrix
//! coefficient decomposition of `R_d`, positive definiteness and the
//! reproducing kernel.

mod decompose;
mod dims;
mod family;
mod kernel;

pub use decompose::{
    decompose, is_positive_definite, reconstruct, DefinitenessReport, MatrixCoefficients,
};
pub use dims::{harm_dim, DimensionTable};
pub use family::{lambda, omega_ratio, q_poly, Normalization, ZonalFamily};
pub use kernel::reproducing_kernel;

use rand::Rng;

use crate::linalg::SymMatrix;
use crate::scalar::{rat, Rational};

/// Random symmetric matrix coefficients with small rational entries.
pub fn random_coefficients<R: Rng>(d: u32, rng: &mut R) -> MatrixCoefficients<Rational> {
    let matrices = (0..=d)
        .map(|k| {
            let size = (d - k + 1) as usize;
            let mut m = SymMatrix::zeros(size);
            for i in 0..size {
                for j in i..size {
                    m.set_sym(i, j, rat(rng.gen_range(-9..=9), rng.gen_range(1..=4)));
                }
            }
            m
        })
        .collect();
    MatrixCoefficients { d, matrices }
}

/// Random PSD matrix coefficients `B B^T` with small integer `B`.
pub fn random_psd_coefficients<R: Rng>(d: u32, rng: &mut R) -> MatrixCoefficients<Rational> {
    let matrices = (0..=d)
        .map(|k| {
            let size = (d - k + 1) as usize;
            let b: Vec<Vec<i64>> = (0..size)
                .map(|_| (0..size).map(|_| rng.gen_range(-3..=3)).collect())
                .collect();
            SymMatrix::from_fn(size, |i, j| {
                let s: i64 = (0..size).map(|l| b[i][l] * b[j][l]).sum();
                rat(s, 1)
            })
        })
        .collect();
    MatrixCoefficients { d, matrices }
}
