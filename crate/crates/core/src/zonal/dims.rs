/// Binomial coefficient, zero when `k > n`.
fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// `h_k^m`, the dimension of degree-`k` harmonic polynomials in `m` variables:
/// `C(m+k-1, k) - C(m+k-3, k-2)`.
pub fn harm_dim(m: u32, k: u32) -> u64 {
    assert!(m >= 1, "harm_dim needs m >= 1");
    let (m, k) = (u64::from(m), u64::from(k));
    let all = binomial(m + k - 1, k);
    let lower = if k >= 2 {
        binomial(m + k - 3, k - 2)
    } else {
        0
    };
    u64::try_from(all - lower).expect("harmonic dimension overflows u64")
}

/// Precomputed `h_k^m` for `1 <= m <= max_m`, `0 <= k <= max_k`.
#[derive(Clone, Debug)]
pub struct DimensionTable {
    max_k: u32,
    values: Vec<u64>,
}

impl DimensionTable {
    pub fn new(max_m: u32, max_k: u32) -> Self {
        let mut values = Vec::with_capacity((max_m * (max_k + 1)) as usize);
        for m in 1..=max_m {
            for k in 0..=max_k {
                values.push(harm_dim(m, k));
            }
        }
        Self { max_k, values }
    }

    pub fn get(&self, m: u32, k: u32) -> u64 {
        if m == 0 || k > self.max_k {
            return harm_dim(m, k);
        }
        self.values
            .get(((m - 1) * (self.max_k + 1) + k) as usize)
            .copied()
            .unwrap_or_else(|| harm_dim(m, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Rational};
    use num_traits::Zero;

    #[test]
    fn spec_values() {
        for m in 1..10 {
            assert_eq!(harm_dim(m, 0), 1);
        }
        for k in 1..12 {
            assert_eq!(harm_dim(3, k), 2 * u64::from(k) + 1);
        }
        assert_eq!(harm_dim(8, 2), 35);
        assert_eq!(harm_dim(2, 5), 2);
    }

    /// Rank of the Laplacian from degree-k monomials in m variables onto
    /// degree k-2; the harmonic dimension is the kernel size.
    fn laplacian_kernel_dim(m: usize, k: usize) -> u64 {
        fn monomials(m: usize, k: usize) -> Vec<Vec<usize>> {
            if m == 1 {
                return vec![vec![k]];
            }
            (0..=k)
                .rev()
                .flat_map(|a| {
                    monomials(m - 1, k - a).into_iter().map(move |mut rest| {
                        rest.insert(0, a);
                        rest
                    })
                })
                .collect()
        }
        let src = monomials(m, k);
        if k < 2 {
            return src.len() as u64;
        }
        let dst = monomials(m, k - 2);
        let mut mat: Vec<Vec<Rational>> = dst
            .iter()
            .map(|_| vec![Rational::zero(); src.len()])
            .collect();
        for (j, e) in src.iter().enumerate() {
            for var in 0..m {
                if e[var] >= 2 {
                    let mut img = e.clone();
                    img[var] -= 2;
                    let row = dst.iter().position(|d| *d == img).unwrap();
                    mat[row][j] += int((e[var] * (e[var] - 1)) as i64);
                }
            }
        }
        // exact Gaussian elimination for the rank
        let mut rank = 0;
        let cols = src.len();
        for col in 0..cols {
            let Some(p) = (rank..mat.len()).find(|&r| !mat[r][col].is_zero()) else {
                continue;
            };
            mat.swap(rank, p);
            for r in 0..mat.len() {
                if r != rank && !mat[r][col].is_zero() {
                    let f = mat[r][col].clone() / mat[rank][col].clone();
                    for c in col..cols {
                        let v = mat[rank][c].clone() * f.clone();
                        mat[r][c] -= v;
                    }
                }
            }
            rank += 1;
        }
        (src.len() - rank) as u64
    }

    #[test]
    fn matches_laplacian_kernel() {
        for m in 1..=5usize {
            for k in 0..=4usize {
                assert_eq!(
                    harm_dim(m as u32, k as u32),
                    laplacian_kernel_dim(m, k),
                    "m={m} k={k}"
                );
            }
        }
    }

    #[test]
    fn table_lookup() {
        let t = DimensionTable::new(12, 10);
        assert_eq!(t.get(8, 2), 35);
        assert_eq!(t.get(3, 20), 41);
        for m in 2..=12 {
            for k in 0..=10 {
                assert!(t.get(m, k) >= 1);
            }
        }
    }
}
