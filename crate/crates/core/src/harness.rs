//! Numerical checks of the analytic identities behind the zonal family:
//! the change of variables onto `Omega`, orthogonality, the reproducing
//! kernel and positivity on random codes.
//!
//! Integrals over `Omega` use a product Gauss-Jacobi rule in `(u, v, alpha)`
//! with `t = uv + sqrt((1-u^2)(1-v^2)) alpha`. Odd powers of `alpha` cancel on
//! the symmetric nodes, so a rule with `m` nodes per axis integrates every
//! polynomial of total degree `<= 2m - 1` exactly.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codes::{random_unit_vector, Code};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::poly::{Monomial, Poly3};
use crate::scalar::Rational;
use crate::zonal::{
    harm_dim, random_coefficients, reconstruct, reproducing_kernel, Normalization, ZonalFamily,
};

/// `Gamma(m/2)` for integer `m >= 1`, by the half-integer recurrence.
fn gamma_half(m: u32) -> f64 {
    assert!(m >= 1);
    let (mut g, mut x) = if m.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    while 2.0 * x < f64::from(m) {
        g *= x;
        x += 1.0;
    }
    g
}

/// `omega_m`, the surface area of `S^{m-1}`.
pub fn sphere_area(m: u32) -> f64 {
    2.0 * std::f64::consts::PI.powf(f64::from(m) / 2.0) / gamma_half(m)
}

/// Gauss rule for the weight `(1 - x^2)^a` on `[-1, 1]`, `a > -1`.
pub fn gauss_jacobi_symmetric(m: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1 && a > -1.0);
    let lam = a + 0.5;
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let b2 = if k == 1 {
            1.0 / (2.0 * (1.0 + lam))
        } else {
            kf * (kf + 2.0 * lam - 1.0) / (4.0 * (kf + lam) * (kf + lam - 1.0))
        };
        jac[(k, k - 1)] = b2.sqrt();
        jac[(k - 1, k)] = b2.sqrt();
    }
    let mu0 = jacobi_mass(a);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // Symmetrize to kill the O(eps) asymmetry of the eigensolver.
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let j = m - 1 - i;
        nodes[i] = 0.5 * (pairs[i].0 - pairs[j].0);
        weights[i] = 0.5 * (pairs[i].1 + pairs[j].1);
    }
    (nodes, weights)
}

/// `int_{-1}^{1} (1 - x^2)^a dx` for `a` a multiple of `1/2`.
fn jacobi_mass(a: f64) -> f64 {
    let two_a = (2.0 * a).round() as i64;
    // sqrt(pi) Gamma(a+1) / Gamma(a+3/2), with Gamma(m/2) for m = 2a+2, 2a+3.
    std::f64::consts::PI.sqrt() * gamma_half((two_a + 2) as u32) / gamma_half((two_a + 3) as u32)
}

/// Product rule on `Omega` for `S^{n-1}`.
#[derive(Clone, Debug, Serialize)]
pub struct QuadratureRule {
    pub n: u32,
    pub nodes_per_axis: usize,
    /// Highest total degree integrated exactly.
    pub degree: u32,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(n: u32, nodes_per_axis: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs n >= 3, got {n}"
            )));
        }
        if nodes_per_axis == 0 {
            return Err(Error::InvalidParameter(
                "quadrature needs at least one node".into(),
            ));
        }
        let nf = f64::from(n);
        let (xu, wu) = gauss_jacobi_symmetric(nodes_per_axis, (nf - 3.0) / 2.0);
        let (xa, wa) = gauss_jacobi_symmetric(nodes_per_axis, (nf - 4.0) / 2.0);
        let scale = sphere_area(n - 1) * sphere_area(n - 2) / sphere_area(n).powi(2);
        let mut points = Vec::with_capacity(nodes_per_axis.pow(3));
        let mut weights = Vec::with_capacity(nodes_per_axis.pow(3));
        for (u, wu_i) in xu.iter().zip(&wu) {
            for (v, wv_j) in xu.iter().zip(&wu) {
                let s = ((1.0 - u * u) * (1.0 - v * v)).sqrt();
                for (a, wa_l) in xa.iter().zip(&wa) {
                    points.push([*u, *v, u * v + s * a]);
                    weights.push(scale * wu_i * wv_j * wa_l);
                }
            }
        }
        Ok(Self {
            n,
            nodes_per_axis,
            degree: 2 * nodes_per_axis as u32 - 1,
            points,
            weights,
        })
    }

    /// Smallest rule exact to total degree `degree`.
    pub fn for_degree(n: u32, degree: u32) -> Result<Self> {
        Self::new(n, degree as usize / 2 + 1)
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(*p))
            .sum()
    }

    /// Values of `f` at the nodes, for repeated inner products.
    pub fn tabulate(&self, f: &Poly3<f64>) -> Vec<f64> {
        self.points.iter().map(|p| f.eval_f64(*p)).collect()
    }

    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }
}

/// `[F, G] = int_Omega F G k`.
pub fn inner_product(f: &Poly3<f64>, g: &Poly3<f64>, rule: &QuadratureRule) -> Result<f64> {
    let need = (f.deg_total().max(0) + g.deg_total().max(0)) as u32;
    if need > rule.degree {
        return Err(Error::InsufficientRule {
            have: rule.degree,
            need,
        });
    }
    Ok(rule.integrate(|p| f.eval_f64(p) * g.eval_f64(p)))
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloEstimate {
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub quadrature: f64,
}

impl MonteCarloEstimate {
    /// `|mean - quadrature|` in standard errors.
    pub fn z_score(&self) -> f64 {
        if self.std_error == 0.0 {
            return if (self.mean - self.quadrature).abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
        }
        (self.mean - self.quadrature).abs() / self.std_error
    }
}

/// Averages `P(e.x, e.y, x.y)` over independent uniform `x, y` on
/// `S^{n-1}` and compares with `[P, 1]`.
pub fn sphere_integral_crosscheck(
    p: &Poly3<f64>,
    n: u32,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    let rule = QuadratureRule::for_degree(n, p.deg_total().max(0) as u32)?;
    let quadrature = rule.integrate(|pt| p.eval_f64(pt));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = n as usize;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let x = random_unit_vector(dim, &mut rng);
        let y = random_unit_vector(dim, &mut rng);
        let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let val = p.eval_f64([x[0], y[0], xy]);
        sum += val;
        sum_sq += val * val;
    }
    let s = samples as f64;
    let mean = sum / s;
    let var = (sum_sq / s - mean * mean).max(0.0) * s / (s - 1.0).max(1.0);
    Ok(MonteCarloEstimate {
        samples,
        seed,
        mean,
        std_error: (var / s).sqrt(),
        quadrature,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OrthogonalityReport {
    pub n: u32,
    pub d: u32,
    pub entries: usize,
    /// Max `|[Y_a, Y_b] - delta_ab / h_k|` over all entry pairs.
    pub max_deviation: f64,
    /// Max deviation of `[<A,Ybar_k>, <B,Ybar_l>]` from `delta_kl <A,B>/h_k`
    /// for random symmetric `A, B`, relative to `|<A,B>|/h_k`.
    pub trace_deviation: f64,
}

/// Full Gram matrix of the normalized family entries.
pub fn orthogonality_suite(n: u32, d: u32, seed: u64) -> Result<OrthogonalityReport> {
    let family = ZonalFamily::<f64>::new(n, d, Normalization::Normalized)?;
    let mut labels = Vec::new();
    let mut max_deg = 0;
    for k in 0..=d {
        let size = family.block_size(k);
        for i in 0..size {
            for j in 0..size {
                max_deg = max_deg.max(family.entry(k, i, j).deg_total());
                labels.push((k, i, j));
            }
        }
    }
    let rule = QuadratureRule::for_degree(n, 2 * max_deg.max(0) as u32)?;
    let tables: Vec<Vec<f64>> = labels
        .iter()
        .map(|&(k, i, j)| rule.tabulate(family.entry(k, i, j)))
        .collect();
    let mut max_deviation = 0.0f64;
    for a in 0..labels.len() {
        for b in a..labels.len() {
            let got = rule.dot(&tables[a], &tables[b]);
            let want = if a == b {
                1.0 / harm_dim(n - 1, labels[a].0) as f64
            } else {
                0.0
            };
            max_deviation = max_deviation.max((got - want).abs());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traces = Vec::new();
    for k in 0..=d {
        let size = family.block_size(k);
        let mut pair = Vec::new();
        for _ in 0..2 {
            let m = {
                let mut m = SymMatrix::<f64>::zeros(size);
                for i in 0..size {
                    for j in i..size {
                        m.set_sym(i, j, rng.gen_range(-1.0..1.0));
                    }
                }
                m
            };
            let mut poly = Poly3::zero();
            for i in 0..size {
                for j in 0..size {
                    poly.add_scaled(family.entry(k, i, j), m.get(i, j));
                }
            }
            pair.push((m, rule.tabulate(&poly)));
        }
        traces.push((k, pair));
    }
    let mut trace_deviation = 0.0f64;
    for (k, pk) in &traces {
        for (l, pl) in &traces {
            let h = harm_dim(n - 1, *k) as f64;
            let ab = pk[0].0.inner(&pk[1].0);
            let scale = (ab.abs() / h).max(1e-3);
            let got = rule.dot(&pk[0].1, &pl[1].1);
            let want = if k == l { ab / h } else { 0.0 };
            trace_deviation = trace_deviation.max((got - want).abs() / scale);
        }
    }
    Ok(OrthogonalityReport {
        n,
        d,
        entries: labels.len(),
        max_deviation,
        trace_deviation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureReport {
    pub masses: Vec<(u32, f64)>,
    pub max_mass_error: f64,
    pub pairs: usize,
    /// Max relative change of `[F, G]` when the node count doubles.
    pub max_doubling_change: f64,
}

fn random_poly<R: Rng>(degree: u32, rng: &mut R) -> Poly3<f64> {
    Poly3::from_terms(
        Monomial::all_up_to(degree)
            .into_iter()
            .map(|m| (m, rng.gen_range(-1.0..1.0))),
    )
}

/// Mass for each `n` and node-doubling stability on random polynomial pairs.
pub fn quadrature_suite(ns: &[u32], pairs: usize, seed: u64) -> Result<QuadratureReport> {
    let mut masses = Vec::new();
    let mut max_mass_error = 0.0f64;
    for &n in ns {
        let mass = QuadratureRule::new(n, 8)?.mass();
        max_mass_error = max_mass_error.max((mass - 1.0).abs());
        masses.push((n, mass));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_doubling_change = 0.0f64;
    for idx in 0..pairs {
        let n = ns[idx % ns.len()];
        let f = random_poly(rng.gen_range(0..=4), &mut rng);
        let g = random_poly(rng.gen_range(0..=4), &mut rng);
        let need = (f.deg_total() + g.deg_total()) as u32;
        let base = QuadratureRule::for_degree(n, need)?;
        let doubled = QuadratureRule::new(n, 2 * base.nodes_per_axis)?;
        let a = inner_product(&f, &g, &base)?;
        let b = inner_product(&f, &g, &doubled)?;
        let scale = base
            .integrate(|p| (f.eval_f64(p) * g.eval_f64(p)).abs())
            .max(1e-300);
        max_doubling_change = max_doubling_change.max((a - b).abs() / scale);
    }
    Ok(QuadratureReport {
        masses,
        max_mass_error,
        pairs,
        max_doubling_change,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub n: u32,
    pub d: u32,
    pub trials: usize,
    pub seed: u64,
    pub max_residual: f64,
}

/// A point of `Omega` from `(u, v, alpha)` uniform in `[-1, 1]^3`.
pub fn random_omega_point<R: Rng>(rng: &mut R) -> [f64; 3] {
    let u: f64 = rng.gen_range(-1.0..1.0);
    let v: f64 = rng.gen_range(-1.0..1.0);
    let a: f64 = rng.gen_range(-1.0..1.0);
    [u, v, u * v + ((1.0 - u * u) * (1.0 - v * v)).sqrt() * a]
}

/// `max |[K_d(., p), F] - F(p)|` over random `F in R_d` and points `p`.
pub fn kernel_reproduce_test(n: u32, d: u32, trials: usize, seed: u64) -> Result<KernelReport> {
    let normalized = ZonalFamily::<f64>::new(n, d, Normalization::Normalized)?;
    let exact = ZonalFamily::<Rational>::unnormalized(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rule = QuadratureRule::for_degree(n, 6 * d)?;
    let mut max_residual = 0.0f64;
    for _ in 0..trials {
        let f = reconstruct(&random_coefficients(d, &mut rng), &exact)?.to_f64();
        let p = random_omega_point(&mut rng);
        let kernel = reproducing_kernel(&normalized, p)?;
        let got = rule.dot(&rule.tabulate(&kernel), &rule.tabulate(&f));
        max_residual = max_residual.max((got - f.eval_f64(p)).abs());
    }
    Ok(KernelReport {
        n,
        d,
        trials,
        seed,
        max_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub n: u32,
    pub d: u32,
    pub code_size: usize,
    pub trials: usize,
    pub seed: u64,
    pub min_eigenvalue: f64,
}

/// `sum_{c,c'} a(c) a(c') Ybar_k(e.c, e.c', c.c')` for one code and weights.
pub fn weighted_zonal_sum(
    family: &ZonalFamily<f64>,
    k: u32,
    code: &Code<f64>,
    pole: &[f64],
    alpha: &[f64],
) -> SymMatrix<f64> {
    let pts = code.unit_points();
    let heights: Vec<f64> = pts
        .iter()
        .map(|c| c.iter().zip(pole).map(|(a, b)| a * b).sum())
        .collect();
    let size = family.block_size(k);
    let mut acc = vec![0.0; size * size];
    for a in 0..pts.len() {
        for b in 0..pts.len() {
            let w = alpha[a] * alpha[b];
            if w == 0.0 {
                continue;
            }
            let t: f64 = pts[a].iter().zip(&pts[b]).map(|(x, y)| x * y).sum();
            let block = family.eval_block(k, [heights[a], heights[b], t.clamp(-1.0, 1.0)]);
            for i in 0..size {
                for j in 0..size {
                    acc[i * size + j] += w * block.get(i, j);
                }
            }
        }
    }
    SymMatrix::from_fn(size, |i, j| 0.5 * (acc[i * size + j] + acc[j * size + i]))
}

/// Minimum eigenvalue of the weighted zonal sums over random codes, random
/// poles and weights uniform in `[-1, 1]`.
pub fn positivity_sample_test(
    n: u32,
    d: u32,
    code_size: usize,
    trials: usize,
    seed: u64,
) -> Result<PositivityReport> {
    let family = ZonalFamily::<f64>::new(n, d, Normalization::Normalized)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_eigenvalue = f64::INFINITY;
    for _ in 0..trials {
        let code = Code::random(n as usize, code_size, &mut rng);
        let pole = random_unit_vector(n as usize, &mut rng);
        let alpha: Vec<f64> = (0..code_size).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for k in 0..=d {
            min_eigenvalue = min_eigenvalue
                .min(weighted_zonal_sum(&family, k, &code, &pole, &alpha).min_eigenvalue());
        }
    }
    Ok(PositivityReport {
        n,
        d,
        code_size,
        trials,
        seed,
        min_eigenvalue,
    })
}
