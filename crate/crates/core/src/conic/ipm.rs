//! Infeasible-start primal-dual path following with Nesterov-Todd scaling
//! and Mehrotra's predictor-corrector, on a dense Schur complement.
//!
//! Free scalars are eliminated from the Newton system by a second Schur
//! complement. Rows are scaled to unit norm and linearly dependent rows are
//! dropped by a pivoted Cholesky factorization of `A A^T` before the solve.
//! The same `A A^T` projects every primal step back onto the equality
//! constraints, which the `X = R - W dZ W` update loses to cancellation
//! near the optimum.

use nalgebra::{Cholesky, DMatrix, DVector, SVD};

use super::{Backend, IterationLog, Residuals, SdpSolution, SolveStatus, SolverConfig};
use crate::error::Result;
use crate::linalg::{symmetric_eigenvalues, SymMatrix};
use crate::relax::SdpProblem;
use crate::scalar::Scalar;

const DEPENDENT_ROW_TOL: f64 = 1e-10;
/// Acceptance of a stalled run: infeasibilities below the first, relative
/// gap below the second.
const NEAR_FEASIBLE: f64 = 1e-6;
const NEAR_GAP: f64 = 1e-4;

/// The reference backend, identifier `"ipm"`.
#[derive(Clone, Copy, Debug, Default)]
pub struct InteriorPoint;

impl Backend for InteriorPoint {
    fn name(&self) -> &'static str {
        "ipm"
    }

    fn solve(&self, problem: &SdpProblem, config: &SolverConfig) -> Result<SdpSolution> {
        Ok(solve_ipm(problem, config))
    }
}

/// One constraint's entries inside one block: `(p, q, value)` with `p <= q`.
type BlockRow = (usize, Vec<(usize, usize, f64)>);

/// Scaled floating point data restricted to the kept rows.
struct Data {
    sizes: Vec<usize>,
    m: usize,
    nf: usize,
    b: DVector<f64>,
    bfree: DMatrix<f64>,
    cf: DVector<f64>,
    c: Vec<DMatrix<f64>>,
    rows: Vec<Vec<BlockRow>>,
    /// Factor of `[A B][A B]^T` on the kept rows.
    gram: Option<Cholesky<f64, nalgebra::Dyn>>,
}

impl Data {
    fn a_op(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (blk, rows) in self.rows.iter().enumerate() {
            for (row, ents) in rows {
                let mut acc = 0.0;
                for &(p, q, v) in ents {
                    acc += if p == q {
                        v * x[blk][(p, q)]
                    } else {
                        2.0 * v * x[blk][(p, q)]
                    };
                }
                out[*row] += acc;
            }
        }
        out
    }

    fn at_op(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (blk, rows) in self.rows.iter().enumerate() {
            for (row, ents) in rows {
                let yi = y[*row];
                for &(p, q, v) in ents {
                    out[blk][(p, q)] += yi * v;
                    if p != q {
                        out[blk][(q, p)] += yi * v;
                    }
                }
            }
        }
        out
    }

    /// `S_ij = <A_i, W A_j W>`, built per block from dense `W A_i W`.
    fn schur(&self, w: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut s = DMatrix::<f64>::zeros(self.m, self.m);
        let mut t = Vec::new();
        for (blk, rows) in self.rows.iter().enumerate() {
            let n = self.sizes[blk];
            let wd = w[blk].as_slice();
            t.resize(n * n, 0.0);
            for a in 0..rows.len() {
                t.iter_mut().for_each(|x| *x = 0.0);
                for &(r, c, x) in &rows[a].1 {
                    let wr = &wd[r * n..(r + 1) * n];
                    let wc = &wd[c * n..(c + 1) * n];
                    for p in 0..n {
                        let tp = &mut t[p * n + p..(p + 1) * n];
                        if r == c {
                            let xp = x * wr[p];
                            for (dst, wq) in tp.iter_mut().zip(&wr[p..]) {
                                *dst += xp * wq;
                            }
                        } else {
                            let (x1, x2) = (x * wr[p], x * wc[p]);
                            for ((dst, wcq), wrq) in tp.iter_mut().zip(&wc[p..]).zip(&wr[p..]) {
                                *dst += x1 * wcq + x2 * wrq;
                            }
                        }
                    }
                }
                let i = rows[a].0;
                for (j, ents) in &rows[a..] {
                    let mut acc = 0.0;
                    for &(p, q, v) in ents {
                        acc += if p == q {
                            v * t[p * n + q]
                        } else {
                            2.0 * v * t[p * n + q]
                        };
                    }
                    s[(i.min(*j), i.max(*j))] += acc;
                }
            }
        }
        for i in 0..self.m {
            for j in 0..i {
                s[(i, j)] = s[(j, i)];
            }
        }
        s
    }
}

struct Prepared {
    data: Data,
    keep: Vec<usize>,
    scale: Vec<f64>,
    dropped: Vec<usize>,
    zero_row_conflict: bool,
}

fn prepare(problem: &SdpProblem) -> Prepared {
    let sizes: Vec<usize> = problem.blocks.iter().map(|b| b.size).collect();
    let nf = problem.free_vars.len();
    let mut c: Vec<DMatrix<f64>> = sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect();
    for e in &problem.objective.entries {
        let v = e.value.to_f64();
        c[e.block][(e.i, e.j)] += v;
        if e.i != e.j {
            c[e.block][(e.j, e.i)] += v;
        }
    }
    let mut cf = DVector::zeros(nf);
    for f in &problem.objective.free {
        cf[f.var] += f.value.to_f64();
    }

    let mut candidates = Vec::new();
    let mut scale_all = vec![0.0; problem.constraints.len()];
    let mut dropped = Vec::new();
    let mut zero_row_conflict = false;
    for (idx, con) in problem.constraints.iter().enumerate() {
        let mut norm2 = 0.0;
        for e in &con.form.entries {
            let v = e.value.to_f64();
            norm2 += if e.i == e.j { v * v } else { 2.0 * v * v };
        }
        for f in &con.form.free {
            norm2 += f.value.to_f64().powi(2);
        }
        if norm2 == 0.0 {
            dropped.push(idx);
            if con.rhs.to_f64() != 0.0 {
                zero_row_conflict = true;
            }
            continue;
        }
        scale_all[idx] = 1.0 / norm2.sqrt();
        candidates.push(idx);
    }

    let build = |keep: &[usize]| -> Data {
        let m = keep.len();
        let mut rows: Vec<Vec<BlockRow>> = vec![Vec::new(); sizes.len()];
        let mut b = DVector::zeros(m);
        let mut bfree = DMatrix::zeros(m, nf);
        for (r, &idx) in keep.iter().enumerate() {
            let con = &problem.constraints[idx];
            let s = scale_all[idx];
            b[r] = s * con.rhs.to_f64();
            for f in &con.form.free {
                bfree[(r, f.var)] += s * f.value.to_f64();
            }
            let mut per_block: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); sizes.len()];
            for e in &con.form.entries {
                per_block[e.block].push((e.i, e.j, s * e.value.to_f64()));
            }
            for (blk, ents) in per_block.into_iter().enumerate() {
                if !ents.is_empty() {
                    rows[blk].push((r, ents));
                }
            }
        }
        Data {
            sizes: sizes.clone(),
            m,
            nf,
            b,
            bfree,
            cf: cf.clone(),
            c: c.clone(),
            rows,
            gram: None,
        }
    };

    let all = build(&candidates);
    let identity: Vec<DMatrix<f64>> = sizes.iter().map(|&n| DMatrix::identity(n, n)).collect();
    let gram = all.schur(&identity) + &all.bfree * all.bfree.transpose();
    let independent = independent_rows(&gram);
    let mut keep: Vec<usize> = independent.iter().map(|&r| candidates[r]).collect();
    keep.sort_unstable();
    for &idx in &candidates {
        if keep.binary_search(&idx).is_err() {
            dropped.push(idx);
        }
    }
    dropped.sort_unstable();
    let mut data = if keep.len() == candidates.len() {
        all
    } else {
        build(&keep)
    };
    let kept_gram = if keep.len() == candidates.len() {
        gram
    } else {
        data.schur(&identity) + &data.bfree * data.bfree.transpose()
    };
    data.gram = Cholesky::new(kept_gram);
    let scale = keep.iter().map(|&i| scale_all[i]).collect();
    Prepared {
        data,
        keep,
        scale,
        dropped,
        zero_row_conflict,
    }
}

/// Rows selected by diagonal-pivoted Cholesky of a Gram matrix, stopping at
/// relative pivot `DEPENDENT_ROW_TOL`.
fn independent_rows(gram: &DMatrix<f64>) -> Vec<usize> {
    let n = gram.nrows();
    let mut a = gram.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let max_diag = (0..n).map(|i| a[(i, i)]).fold(0.0, f64::max);
    let tol = DEPENDENT_ROW_TOL * max_diag.max(f64::MIN_POSITIVE);
    let mut rank = 0;
    for k in 0..n {
        let (p, best) = (k..n)
            .map(|j| (j, a[(j, j)]))
            .fold(
                (k, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
        if best <= tol {
            break;
        }
        if p != k {
            a.swap_rows(p, k);
            a.swap_columns(p, k);
            perm.swap(p, k);
        }
        let lkk = a[(k, k)].sqrt();
        a[(k, k)] = lkk;
        for i in (k + 1)..n {
            a[(i, k)] /= lkk;
        }
        for j in (k + 1)..n {
            let ljk = a[(j, k)];
            if ljk == 0.0 {
                continue;
            }
            // Full trailing update keeps the symmetric swaps valid.
            for i in (k + 1)..n {
                let lik = a[(i, k)];
                a[(i, j)] -= lik * ljk;
            }
        }
        rank += 1;
    }
    perm.truncate(rank);
    perm
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn frob2(ms: &[DMatrix<f64>]) -> f64 {
    ms.iter().map(|m| m.norm_squared()).sum()
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m)
        .first()
        .copied()
        .unwrap_or(f64::INFINITY)
}

/// Largest `alpha` with `L L^T + alpha D >= 0`, given `L^{-1}`.
fn max_step(linv: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let lam = min_eig(&sym(&(linv * d * linv.transpose())));
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

struct Scaling {
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    w: DMatrix<f64>,
    v: DVector<f64>,
    lx_inv: DMatrix<f64>,
    lz_inv: DMatrix<f64>,
}

fn nt_scaling(x: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<Scaling> {
    let n = x.nrows();
    let lx = Cholesky::new(x.clone())?.l();
    let lz = Cholesky::new(z.clone())?.l();
    let eye = DMatrix::identity(n, n);
    let lx_inv = lx.solve_lower_triangular(&eye)?;
    let lz_inv = lz.solve_lower_triangular(&eye)?;
    let svd = SVD::new(lz.transpose() * &lx, true, true);
    let q = svd.v_t.as_ref()?.transpose();
    let v = svd.singular_values.clone();
    if v.iter().any(|s| !(*s > 0.0)) {
        return None;
    }
    let inv_sqrt = DMatrix::from_diagonal(&v.map(|s| 1.0 / s.sqrt()));
    let sqrt = DMatrix::from_diagonal(&v.map(f64::sqrt));
    let g = &lx * &q * inv_sqrt;
    let ginv = sqrt * q.transpose() * &lx_inv;
    let w = sym(&(&g * g.transpose()));
    Some(Scaling {
        g,
        ginv,
        w,
        v,
        lx_inv,
        lz_inv,
    })
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    dxf: DVector<f64>,
}

struct Factored<'a> {
    data: &'a Data,
    s: DMatrix<f64>,
    chol: Cholesky<f64, nalgebra::Dyn>,
    sinv_b: DMatrix<f64>,
    reduced: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl<'a> Factored<'a> {
    fn new(data: &'a Data, s: DMatrix<f64>) -> Option<Self> {
        let max_diag = (0..s.nrows())
            .map(|i| s[(i, i)].abs())
            .fold(0.0, f64::max)
            .max(1e-300);
        let mut reg = 0.0;
        for _ in 0..4 {
            let mut sr = s.clone();
            for i in 0..sr.nrows() {
                sr[(i, i)] += reg;
            }
            if let Some(chol) = Cholesky::new(sr) {
                let sinv_b = chol.solve(&data.bfree);
                let reduced = if data.nf > 0 {
                    Some((data.bfree.transpose() * &sinv_b).lu())
                } else {
                    None
                };
                return Some(Self {
                    data,
                    s,
                    chol,
                    sinv_b,
                    reduced,
                });
            }
            reg = if reg == 0.0 {
                1e-14 * max_diag
            } else {
                reg * 100.0
            };
        }
        None
    }

    fn solve_kkt(
        &self,
        h: &DVector<f64>,
        rf: &DVector<f64>,
    ) -> Option<(DVector<f64>, DVector<f64>)> {
        let u = self.chol.solve(h);
        match &self.reduced {
            Some(lu) => {
                let dxf = lu.solve(&(self.data.bfree.transpose() * &u - rf))?;
                Some((u - &self.sinv_b * &dxf, dxf))
            }
            None => Some((u, DVector::zeros(0))),
        }
    }

    fn direction(
        &self,
        rc: Vec<DMatrix<f64>>,
        rd: &[DMatrix<f64>],
        rp: &DVector<f64>,
        rf: &DVector<f64>,
        sc: &[Scaling],
    ) -> Option<Direction> {
        let data = self.data;
        let tmp: Vec<DMatrix<f64>> = rc
            .iter()
            .zip(rd)
            .zip(sc)
            .map(|((r, d), s)| r - &s.w * d * &s.w)
            .collect();
        let h = rp - data.a_op(&tmp);
        // [S B; B^T 0] [dy; dxf] = [h; rf], with two rounds of refinement.
        let (mut dy, mut dxf) = self.solve_kkt(&h, rf)?;
        for _ in 0..2 {
            let r1 = &h - &self.s * &dy - &data.bfree * &dxf;
            let r2 = rf - data.bfree.transpose() * &dy;
            let (cy, cf) = self.solve_kkt(&r1, &r2)?;
            dy += cy;
            dxf += cf;
        }
        let aty = data.at_op(&dy);
        let dz: Vec<DMatrix<f64>> = rd.iter().zip(&aty).map(|(d, a)| d - a).collect();
        let dx: Vec<DMatrix<f64>> = rc
            .iter()
            .zip(&dz)
            .zip(sc)
            .map(|((r, z), s)| sym(&(r - &s.w * z * &s.w)))
            .collect();
        Some(Direction { dx, dz, dy, dxf })
    }
}

/// `dir` with its primal part moved onto `A dx + B dxf = rp` along
/// `A^T (A A^T)^{-1}`.
fn project_primal(data: &Data, dir: &Direction, rp: &DVector<f64>) -> Option<Direction> {
    let gram = data.gram.as_ref()?;
    let miss = rp - data.a_op(&dir.dx) - &data.bfree * &dir.dxf;
    let w = gram.solve(&miss);
    let dx = dir
        .dx
        .iter()
        .zip(data.at_op(&w))
        .map(|(x, a)| x + a)
        .collect();
    let dxf = &dir.dxf + data.bfree.transpose() * &w;
    Some(Direction {
        dx,
        dz: dir.dz.clone(),
        dy: dir.dy.clone(),
        dxf,
    })
}

struct Iterate {
    x: Vec<DMatrix<f64>>,
    z: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    xf: DVector<f64>,
}

struct Measures {
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    gap: f64,
    mu: f64,
    rp: DVector<f64>,
    rd: Vec<DMatrix<f64>>,
    rf: DVector<f64>,
}

impl Measures {
    fn error(&self) -> f64 {
        self.pinf.max(self.dinf).max(self.gap)
    }

    /// Ranks stored iterates. The gap only costs tightness, infeasibility
    /// costs validity, so the gap is discounted.
    fn merit(&self) -> f64 {
        self.pinf
            .max(self.dinf)
            .max(self.gap * NEAR_FEASIBLE / NEAR_GAP)
    }

    fn near_optimal(&self) -> bool {
        self.pinf.max(self.dinf) <= NEAR_FEASIBLE && self.gap <= NEAR_GAP
    }
}

fn measure(data: &Data, it: &Iterate, norm_b: f64, norm_c: f64, n_total: usize) -> Measures {
    let rp = &data.b - data.a_op(&it.x) - &data.bfree * &it.xf;
    let aty = data.at_op(&it.y);
    let rd: Vec<DMatrix<f64>> = data
        .c
        .iter()
        .zip(&aty)
        .zip(&it.z)
        .map(|((c, a), z)| c - a - z)
        .collect();
    let rf = &data.cf - data.bfree.transpose() * &it.y;
    let pobj = inner(&data.c, &it.x) + data.cf.dot(&it.xf);
    let dobj = data.b.dot(&it.y);
    let mu = inner(&it.x, &it.z) / n_total.max(1) as f64;
    let pinf = rp.norm() / (1.0 + norm_b);
    let dinf = (frob2(&rd) + rf.norm_squared()).sqrt() / (1.0 + norm_c);
    let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
    Measures {
        pobj,
        dobj,
        pinf,
        dinf,
        gap,
        mu,
        rp,
        rd,
        rf,
    }
}

fn initial_point(data: &Data) -> Iterate {
    let mut x = Vec::new();
    let mut z = Vec::new();
    for (blk, &n) in data.sizes.iter().enumerate() {
        let nf = n as f64;
        let mut xi: f64 = 10.0f64.max(nf.sqrt());
        let mut eta: f64 = 10.0f64.max(nf.sqrt()).max(data.c[blk].norm());
        for (row, ents) in &data.rows[blk] {
            let a_norm = ents
                .iter()
                .map(|&(p, q, v)| if p == q { v * v } else { 2.0 * v * v })
                .sum::<f64>()
                .sqrt();
            xi = xi.max(nf * (1.0 + data.b[*row].abs()) / (1.0 + a_norm));
            eta = eta.max(a_norm);
        }
        x.push(DMatrix::identity(n, n) * xi);
        z.push(DMatrix::identity(n, n) * eta);
    }
    Iterate {
        x,
        z,
        y: DVector::zeros(data.m),
        xf: DVector::zeros(data.nf),
    }
}

fn solve_ipm(problem: &SdpProblem, config: &SolverConfig) -> SdpSolution {
    let prep = prepare(problem);
    let data = &prep.data;
    let n_total: usize = data.sizes.iter().sum();
    let norm_b = data.b.norm();
    let norm_c = (frob2(&data.c) + data.cf.norm_squared()).sqrt();

    let mut it = initial_point(data);
    let mut log = Vec::new();
    let mut status = SolveStatus::NumericalFailure;
    let mut message = String::new();
    let mut best: Option<(f64, Iterate)> = None;
    let mut stalls = 0;

    if prep.zero_row_conflict {
        status = SolveStatus::Infeasible;
        message = "a constraint with no variables has a nonzero right-hand side".into();
    } else {
        for iteration in 0..=config.max_iterations {
            let ms = measure(data, &it, norm_b, norm_c, n_total);
            let err = ms.error();
            if best.as_ref().is_none_or(|(e, _)| ms.merit() < *e) {
                best = Some((
                    ms.merit(),
                    Iterate {
                        x: it.x.clone(),
                        z: it.z.clone(),
                        y: it.y.clone(),
                        xf: it.xf.clone(),
                    },
                ));
            }
            let mut entry = IterationLog {
                iteration,
                primal_objective: ms.pobj + problem.objective_constant.to_f64(),
                dual_objective: ms.dobj + problem.objective_constant.to_f64(),
                primal_infeasibility: ms.pinf,
                dual_infeasibility: ms.dinf,
                gap: ms.gap,
                mu: ms.mu,
                sigma: 0.0,
                step_primal: 0.0,
                step_dual: 0.0,
            };
            if err <= config.tolerance {
                status = SolveStatus::Optimal;
                push_log(&mut log, entry, config);
                break;
            }
            let dres = (frob2(&ms.rd) + ms.rf.norm_squared()).sqrt();
            if ms.dobj > 1e8 * (1.0 + norm_c) && dres <= 1e-6 * ms.dobj {
                status = SolveStatus::Infeasible;
                message = format!("primal infeasible: dual ray with b^T y = {:e}", ms.dobj);
                push_log(&mut log, entry, config);
                break;
            }
            let ax = (&data.b - &ms.rp).norm();
            if ms.pobj < -1e8 * (1.0 + norm_b) && ax <= 1e-6 * ms.pobj.abs() {
                status = SolveStatus::Infeasible;
                message = format!("dual infeasible: primal ray with objective {:e}", ms.pobj);
                push_log(&mut log, entry, config);
                break;
            }
            if iteration == config.max_iterations {
                message = "iteration limit reached".into();
                push_log(&mut log, entry, config);
                break;
            }

            let Some(scalings) =
                it.x.iter()
                    .zip(&it.z)
                    .map(|(x, z)| nt_scaling(x, z))
                    .collect::<Option<Vec<_>>>()
            else {
                message = "lost positive definiteness".into();
                push_log(&mut log, entry, config);
                break;
            };
            let ws: Vec<DMatrix<f64>> = scalings.iter().map(|s| s.w.clone()).collect();
            let Some(fact) = Factored::new(data, data.schur(&ws)) else {
                message = "Schur complement is not positive definite".into();
                push_log(&mut log, entry, config);
                break;
            };

            let rc_pred: Vec<DMatrix<f64>> = it.x.iter().map(|x| -x).collect();
            let Some(pred) = fact.direction(rc_pred, &ms.rd, &ms.rp, &ms.rf, &scalings) else {
                message = "singular free-variable system".into();
                push_log(&mut log, entry, config);
                break;
            };
            let (ap, ad) = step_lengths(&pred, &scalings, 1.0);
            let x_aff: Vec<DMatrix<f64>> =
                it.x.iter().zip(&pred.dx).map(|(x, d)| x + d * ap).collect();
            let z_aff: Vec<DMatrix<f64>> =
                it.z.iter().zip(&pred.dz).map(|(z, d)| z + d * ad).collect();
            let mu_aff = inner(&x_aff, &z_aff) / n_total.max(1) as f64;
            let sigma = if ms.mu > 0.0 {
                (mu_aff / ms.mu).clamp(0.0, 1.0).powi(3)
            } else {
                0.0
            };

            let rc_corr: Vec<DMatrix<f64>> = scalings
                .iter()
                .zip(pred.dx.iter().zip(&pred.dz))
                .map(|(s, (dx, dz))| {
                    let dxs = &s.ginv * dx * s.ginv.transpose();
                    let dzs = s.g.transpose() * dz * &s.g;
                    let h = sym(&(dxs * dzs));
                    let n = s.v.len();
                    let rt = DMatrix::from_fn(n, n, |i, j| {
                        let diag = if i == j {
                            sigma * ms.mu - s.v[i] * s.v[i]
                        } else {
                            0.0
                        };
                        2.0 * (diag - h[(i, j)]) / (s.v[i] + s.v[j])
                    });
                    &s.g * rt * s.g.transpose()
                })
                .collect();
            let Some(dir) = fact.direction(rc_corr, &ms.rd, &ms.rp, &ms.rf, &scalings) else {
                message = "singular free-variable system".into();
                push_log(&mut log, entry, config);
                break;
            };
            let fraction = 0.9 + 0.09 * ap.min(ad);
            let (mut ap, ad) = step_lengths(&dir, &scalings, fraction);
            // The projected step is preferred unless it runs into the cone
            // boundary much earlier.
            let mut dir = dir;
            if let Some(proj) = project_primal(data, &dir, &ms.rp) {
                let (app, _) = step_lengths(&proj, &scalings, fraction);
                if app >= 0.5 * ap {
                    dir = proj;
                    ap = app;
                }
            }
            for (x, d) in it.x.iter_mut().zip(&dir.dx) {
                *x = sym(&(&*x + d * ap));
            }
            it.xf += &dir.dxf * ap;
            it.y += &dir.dy * ad;
            for (z, d) in it.z.iter_mut().zip(&dir.dz) {
                *z = sym(&(&*z + d * ad));
            }
            entry.sigma = sigma;
            entry.step_primal = ap;
            entry.step_dual = ad;
            push_log(&mut log, entry, config);
            if ap < 1e-10 && ad < 1e-10 {
                stalls += 1;
                if stalls >= 3 {
                    message = "steps stalled".into();
                    break;
                }
            } else {
                stalls = 0;
            }
        }
    }

    let final_it = match (status, best) {
        (SolveStatus::Infeasible, _) | (_, None) => it,
        (SolveStatus::Optimal, _) => polish(data, it),
        (_, Some((_, b))) => {
            let b = polish(data, b);
            if measure(data, &b, norm_b, norm_c, n_total).near_optimal() {
                status = SolveStatus::NearOptimal;
                if message.is_empty() {
                    message = "stopped before full tolerance".into();
                }
            }
            b
        }
    };
    finish(
        problem, &prep, final_it, status, message, log, norm_b, norm_c, n_total,
    )
}

/// Moves `X, x` onto the equality constraints along `A^T (A A^T)^{-1}`. The
/// blocks may pick up eigenvalues of order of the residual below zero.
fn polish(data: &Data, mut it: Iterate) -> Iterate {
    let Some(gram) = &data.gram else { return it };
    for _ in 0..2 {
        let rp = &data.b - data.a_op(&it.x) - &data.bfree * &it.xf;
        let w = gram.solve(&rp);
        for (x, a) in it.x.iter_mut().zip(data.at_op(&w)) {
            *x += a;
        }
        it.xf += data.bfree.transpose() * &w;
    }
    it
}

fn push_log(log: &mut Vec<IterationLog>, entry: IterationLog, config: &SolverConfig) {
    if config.verbose {
        eprintln!(
            "{:3} pobj {:+.10e} dobj {:+.10e} pinf {:.2e} dinf {:.2e} gap {:.2e} mu {:.2e} sigma {:.2e} step {:.3}/{:.3}",
            entry.iteration,
            entry.primal_objective,
            entry.dual_objective,
            entry.primal_infeasibility,
            entry.dual_infeasibility,
            entry.gap,
            entry.mu,
            entry.sigma,
            entry.step_primal,
            entry.step_dual
        );
    }
    log.push(entry);
}

/// Fractions of the distance to the cone boundary, capped at 1.
fn step_lengths(dir: &Direction, sc: &[Scaling], fraction: f64) -> (f64, f64) {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for (s, (dx, dz)) in sc.iter().zip(dir.dx.iter().zip(&dir.dz)) {
        ap = ap.min(max_step(&s.lx_inv, dx));
        ad = ad.min(max_step(&s.lz_inv, dz));
    }
    ((fraction * ap).min(1.0), (fraction * ad).min(1.0))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    problem: &SdpProblem,
    prep: &Prepared,
    it: Iterate,
    status: SolveStatus,
    message: String,
    iterations: Vec<IterationLog>,
    norm_b: f64,
    norm_c: f64,
    n_total: usize,
) -> SdpSolution {
    let data = &prep.data;
    let ms = measure(data, &it, norm_b, norm_c, n_total);
    let block_values: Vec<SymMatrix<f64>> =
        it.x.iter()
            .map(|x| SymMatrix::from_dmatrix(&sym(x)))
            .collect();
    let scalars: Vec<f64> = it.xf.iter().copied().collect();
    let mut dual = vec![0.0; problem.constraints.len()];
    for (r, &idx) in prep.keep.iter().enumerate() {
        dual[idx] = it.y[r] * prep.scale[r];
    }
    let constant = problem.objective_constant.to_f64();
    let replay = problem.residuals_f64(&block_values, &scalars);
    let residuals = Residuals {
        primal_eq: ms.pinf,
        dual_eq: ms.dinf,
        duality_gap: ms.gap,
        min_eigenvalue: block_values
            .iter()
            .map(SymMatrix::min_eigenvalue)
            .fold(f64::INFINITY, f64::min),
        max_abs_residual: replay.iter().fold(0.0, |a, r| a.max(r.abs())),
    };
    SdpSolution {
        status,
        backend: "ipm".into(),
        block_labels: problem.blocks.iter().map(|b| b.label.clone()).collect(),
        block_values,
        scalar_names: problem.free_vars.clone(),
        scalars,
        dual,
        objective_value: ms.pobj + constant,
        dual_objective: ms.dobj + constant,
        residuals,
        dropped_rows: prep.dropped.clone(),
        iterations,
        message,
    }
}
