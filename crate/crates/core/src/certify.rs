//! Verified bounds: re-checking solver output in exact arithmetic, the
//! closed-form bounds for degrees 1 and 2, and the equality-case report.
//!
//! A solution is promoted to a bound as follows. Every float block is read
//! as the exact rational it stores and both polynomial identities are
//! re-expanded exactly. What is left over is a residual polynomial whose
//! coefficient 1-norm bounds its values on `[-1, 1]^3` (monomials and
//! Chebyshev products never exceed 1 there). Blocks with slightly negative
//! eigenvalues are shifted by `delta * I`, which moves each identity by at
//! most `delta` times a sup-norm estimate of the affected basis sum. With
//! `eps_u`, `eps_t` the resulting slacks in the univariate and trivariate
//! identities,
//!
//! `|C| <= 1 + (M + eps_u) / (1 - eps_t)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::codes::Code;
use crate::conic::{solve, Residuals, SdpSolution, SolveStatus, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::poly::{Monomial, Poly3, Var};
use crate::relax::{
    build_cap_sdp_with, BuildOptions, CapParams, DomainSystem, PolyBasis, RowKind, SdpProblem,
};
use crate::scalar::{int, rational_to_string, Rational, Scalar};
use crate::zonal::{MatrixCoefficients, ZonalFamily};

/// Default tolerance on eigenvalues and identity residuals.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Verified,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockAudit {
    pub label: String,
    pub size: usize,
    pub min_eigenvalue: f64,
    /// `delta` added to the diagonal before the block is trusted as PSD.
    pub shift: f64,
    /// Contribution of the shift to the identity slacks.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityAudit {
    pub kind: RowKind,
    pub rows: usize,
    pub max_abs_residual: f64,
    /// Coefficient 1-norm of the residual polynomial.
    pub l1_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginAnalysis {
    pub m: f64,
    /// `1 + M`, the solver's claim.
    pub raw_bound: f64,
    pub eps_univariate: f64,
    pub eps_trivariate: f64,
    /// `bound - raw_bound`.
    pub inflation: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub tolerance: f64,
    pub blocks: Vec<BlockAudit>,
    pub identities: Vec<IdentityAudit>,
    pub margin: Option<MarginAnalysis>,
    /// One line per violated check; empty iff verified.
    pub failures: Vec<String>,
}

/// A named Gram matrix over its basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub basis: Vec<Monomial>,
    pub matrix: SymMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub params: CapParams,
    pub poly_basis: PolyBasis,
    /// Verified upper bound on `A(n, theta, phi)`; absent when the checks
    /// did not get far enough to compute one.
    pub bound: Option<f64>,
    /// `1 + M` as reported by the solver.
    pub objective: f64,
    pub solver_status: SolveStatus,
    pub solver_residuals: Residuals,
    /// `F_0, ..., F_d` for the unnormalized zonal family.
    pub matrix_coefficients: Vec<SymMatrix<f64>>,
    pub sos_witnesses: Vec<Witness>,
    pub audit: Audit,
    pub verdict: Verdict,
}

impl BoundCertificate {
    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }

    pub fn coefficients(&self) -> MatrixCoefficients<f64> {
        MatrixCoefficients {
            d: self.params.d,
            matrices: self.matrix_coefficients.clone(),
        }
    }

    /// `M`, the bound on `H(u, u, 1)`.
    pub fn m(&self) -> f64 {
        self.objective - 1.0
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("certificate serializes")
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        Ok(serde_json::from_value(value.clone())?)
    }

    /// `n | lower | previous upper | <=bound`, the layout of the table of
    /// known bounds on `B(n)`; the middle columns are `-` when unknown.
    pub fn table_row(&self) -> String {
        let known = if is_kissing(&self.params) {
            table1_row(self.params.n)
        } else {
            None
        };
        let show = |x: Option<u32>| x.map_or("-".to_string(), |v| v.to_string());
        format!(
            "{} | {} | {} | {}",
            self.params.n,
            show(known.and_then(|r| r.lower)),
            show(known.and_then(|r| r.previous_upper)),
            self.bound_cell()
        )
    }

    /// `n | cos theta | cos phi | d | N | <=bound`.
    pub fn summary_row(&self) -> String {
        let p = &self.params;
        format!(
            "{} | {} | {} | {} | {} | {}",
            p.n,
            short_rational(&p.cos_theta),
            short_rational(&p.cos_phi),
            p.d,
            p.big_n,
            self.bound_cell()
        )
    }

    fn bound_cell(&self) -> String {
        match self.bound {
            Some(b) if self.is_verified() => format!("≤{:.2}", round_up_2(b)),
            _ => "failed".to_string(),
        }
    }
}

fn short_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        rational_to_string(q)
    }
}

/// Smallest multiple of 1/100 that is `>= x`.
pub fn round_up_2(x: f64) -> f64 {
    let r = (x * 100.0).ceil() / 100.0;
    if r < x {
        r + 0.01
    } else {
        r
    }
}

fn is_kissing(p: &CapParams) -> bool {
    p.cos_theta == Rational::new(1.into(), 2.into()) && p.cos_phi == int(0)
}

/// One row of the table of bounds on `B(n)`: best known lower bound,
/// previously known upper bound and the semidefinite bound at `d = N = 10`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Table1Row {
    pub n: u32,
    pub lower: Option<u32>,
    pub previous_upper: Option<u32>,
    pub sdp: u32,
}

const fn row(n: u32, lower: Option<u32>, previous_upper: Option<u32>, sdp: u32) -> Table1Row {
    Table1Row {
        n,
        lower,
        previous_upper,
        sdp,
    }
}

pub const TABLE1: [Table1Row; 8] = [
    row(3, Some(9), Some(9), 9),
    row(4, Some(18), Some(18), 18),
    row(5, Some(32), Some(35), 33),
    row(6, Some(51), Some(64), 61),
    row(7, Some(93), Some(110), 105),
    row(8, Some(183), Some(186), 183),
    row(9, None, Some(309), 297),
    row(10, None, None, 472),
];

pub fn table1_row(n: u32) -> Option<&'static Table1Row> {
    TABLE1.iter().find(|r| r.n == n)
}

/// Options the cap builder must have used to produce `problem`.
pub fn infer_build_options(problem: &SdpProblem) -> BuildOptions {
    let symmetry_reduction = !problem
        .constraints
        .iter()
        .any(|c| c.kind == RowKind::Trivariate && c.monomial.u < c.monomial.v);
    let multiplier_degree = problem
        .constraints
        .iter()
        .filter(|c| c.kind == RowKind::Univariate)
        .map(|c| c.monomial.u)
        .max();
    BuildOptions {
        symmetry_reduction,
        multiplier_degree,
        poly_basis: problem.poly_basis,
    }
}

/// Rounding guard for a float eigenvalue of `m`.
fn eigen_guard(m: &SymMatrix<f64>) -> f64 {
    let frob = m.inner(m).sqrt();
    8.0 * m.dim().max(1) as f64 * f64::EPSILON * frob.max(f64::MIN_POSITIVE)
}

/// Upward-biased float of `|q|`.
fn abs_up(q: &Rational) -> f64 {
    let x = q.to_f64().abs();
    x + x * 4.0 * f64::EPSILON
}

fn l1_up(p: &Poly3<Rational>) -> f64 {
    p.terms().map(|(_, c)| abs_up(c)).sum::<f64>() * (1.0 + 1e-12)
}

/// Re-verifies `solution` of the cap program `problem` for `params`.
///
/// Returns `Err` only for an unusable tolerance; every failed check is
/// recorded in the audit and turns the verdict to failed.
pub fn verify_certificate(
    solution: &SdpSolution,
    problem: &SdpProblem,
    params: &CapParams,
    tol: f64,
) -> Result<BoundCertificate> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    let mut audit = Audit {
        tolerance: tol,
        ..Audit::default()
    };
    let m_value = solution.scalar("M").unwrap_or(f64::NAN);
    let mut cert = BoundCertificate {
        params: params.clone(),
        poly_basis: problem.poly_basis,
        bound: None,
        objective: 1.0 + m_value,
        solver_status: solution.status,
        solver_residuals: solution.residuals.clone(),
        matrix_coefficients: Vec::new(),
        sos_witnesses: Vec::new(),
        audit: Audit::default(),
        verdict: Verdict::Failed,
    };
    let finish = |mut cert: BoundCertificate, audit: Audit| {
        cert.verdict = if audit.failures.is_empty() {
            Verdict::Verified
        } else {
            Verdict::Failed
        };
        cert.audit = audit;
        Ok(cert)
    };

    if !solution.status.is_usable() {
        audit.failures.push(format!(
            "solver status: {:?} is not usable",
            solution.status
        ));
    }
    if let Err(e) = params.validate() {
        audit.failures.push(format!("parameters: {e}"));
        return finish(cert, audit);
    }

    // Structure.
    if solution.block_values.len() != problem.blocks.len() {
        audit.failures.push(format!(
            "block shape: {} blocks in solution, {} in problem",
            solution.block_values.len(),
            problem.blocks.len()
        ));
        return finish(cert, audit);
    }
    for (b, x) in problem.blocks.iter().zip(&solution.block_values) {
        if x.dim() != b.size {
            audit.failures.push(format!(
                "block shape: {} has size {}, expected {}",
                b.label,
                x.dim(),
                b.size
            ));
        }
    }
    let m_index = problem.free_index("M");
    if solution.scalars.len() != problem.free_vars.len() || m_index.is_none() {
        audit
            .failures
            .push("block shape: free variable M missing".into());
    }
    if !audit
        .failures
        .iter()
        .all(|f| f.starts_with("solver status"))
    {
        return finish(cert, audit);
    }
    if !m_value.is_finite()
        || solution
            .block_values
            .iter()
            .any(|x| x.rows().iter().flatten().any(|v| !v.is_finite()))
    {
        audit.failures.push("non-finite value in solution".into());
        return finish(cert, audit);
    }

    // The program must be the cap program of `params`.
    let rebuilt = build_cap_sdp_with(params, &infer_build_options(problem));
    match rebuilt {
        Ok(r) if r.normalized() == problem.normalized() => {}
        Ok(_) => {
            audit.failures.push(format!(
                "problem mismatch: program is not the cap program for n={}, d={}, N={}",
                params.n, params.d, params.big_n
            ));
            return finish(cert, audit);
        }
        Err(e) => {
            audit.failures.push(format!("problem mismatch: {e}"));
            return finish(cert, audit);
        }
    }

    // Symmetric blocks from the upper triangle the identities read.
    let blocks: Vec<SymMatrix<f64>> = solution
        .block_values
        .iter()
        .map(|x| SymMatrix::from_fn(x.dim(), |i, j| *x.get(i.min(j), i.max(j))))
        .collect();
    let exact: Vec<SymMatrix<Rational>> = blocks
        .iter()
        .map(|x| x.map(|v| v.to_rational().expect("finite")))
        .collect();
    let free_exact: Vec<Rational> = solution
        .scalars
        .iter()
        .map(|v| v.to_rational().expect("finite"))
        .collect();
    let m_exact = free_exact[m_index.expect("checked")].clone();

    // (ii) exact identity residuals.
    let residuals = problem.residuals_exact(&exact, &free_exact);
    let mut l1 = [0.0f64; 2];
    for (idx, kind) in [RowKind::Univariate, RowKind::Trivariate]
        .into_iter()
        .enumerate()
    {
        let mut rows = 0;
        let mut max_abs = 0.0f64;
        for (c, r) in problem.constraints.iter().zip(&residuals) {
            if c.kind == kind {
                rows += 1;
                let a = abs_up(r);
                max_abs = max_abs.max(a);
                l1[idx] += a;
            }
        }
        l1[idx] *= 1.0 + 1e-12;
        if max_abs > tol {
            audit.failures.push(format!(
                "identity residual: {kind:?} identity off by {max_abs:.3e} > {tol:.1e}"
            ));
        }
        audit.identities.push(IdentityAudit {
            kind,
            rows,
            max_abs_residual: max_abs,
            l1_residual: l1[idx],
        });
    }

    // (i) eigenvalues, and the slack of shifting each block to PSD.
    let family = ZonalFamily::<Rational>::unnormalized(params.n, params.d)?;
    let domain = DomainSystem::new(&params.cos_theta, &params.cos_phi);
    let mut eps = l1;
    for (b, x) in problem.blocks.iter().zip(&blocks) {
        let lam = x.min_eigenvalue();
        let shift = (eigen_guard(x) - lam).max(0.0);
        if lam < -tol {
            audit.failures.push(format!(
                "negative eigenvalue: {} has {lam:.3e} < -{tol:.1e}",
                b.label
            ));
        }
        let (uni_w, tri_w) = match shift_weights(&b.label, b.size, params, &family, &domain) {
            Some(w) => w,
            None => {
                audit
                    .failures
                    .push(format!("block shape: unexpected block {}", b.label));
                (0.0, 0.0)
            }
        };
        eps[0] += shift * uni_w;
        eps[1] += shift * tri_w;
        audit.blocks.push(BlockAudit {
            label: b.label.clone(),
            size: b.size,
            min_eigenvalue: lam,
            shift,
            slack: shift * (uni_w + tri_w),
        });
    }

    cert.matrix_coefficients = (0..=params.d as usize).map(|k| blocks[k].clone()).collect();
    cert.sos_witnesses = problem
        .blocks
        .iter()
        .zip(&blocks)
        .filter_map(|(b, x)| {
            b.basis.as_ref().map(|basis| Witness {
                label: b.label.clone(),
                basis: basis.clone(),
                matrix: x.clone(),
            })
        })
        .collect();

    // (iii) margin.
    let m = m_exact.to_f64();
    if eps[1] >= 1.0 {
        audit.failures.push(format!(
            "margin: trivariate slack {:.3e} is not below 1",
            eps[1]
        ));
    } else {
        let raw = 1.0 + m;
        let bound = 1.0 + (m + eps[0]) / (1.0 - eps[1]);
        let bound = bound + bound.abs() * 4.0 * f64::EPSILON;
        cert.bound = Some(bound);
        audit.margin = Some(MarginAnalysis {
            m,
            raw_bound: raw,
            eps_univariate: eps[0],
            eps_trivariate: eps[1],
            inflation: bound - raw,
        });
    }
    finish(cert, audit)
}

/// Program, solver output and certificate of one bound computation.
#[derive(Clone, Debug)]
pub struct BoundRun {
    pub problem: SdpProblem,
    pub solution: SdpSolution,
    pub certificate: BoundCertificate,
}

/// Builds the cap program, solves it and verifies the result. Solver
/// errors are returned; an unusable status still yields a (failed)
/// certificate.
pub fn certified_bound(
    params: &CapParams,
    options: &BuildOptions,
    config: &SolverConfig,
    tol: f64,
) -> Result<BoundRun> {
    let problem = build_cap_sdp_with(params, options)?;
    let solution = solve(&problem, config)?;
    let certificate = verify_certificate(&solution, &problem, params, tol)?;
    Ok(BoundRun {
        problem,
        solution,
        certificate,
    })
}

/// Sup-norm weights `(univariate, trivariate)` of `sum_i b_i^2` times the
/// block's multiplier, i.e. how far a unit diagonal shift moves each
/// identity on `[-1, 1]^3`.
fn shift_weights(
    label: &str,
    size: usize,
    params: &CapParams,
    family: &ZonalFamily<Rational>,
    domain: &DomainSystem,
) -> Option<(f64, f64)> {
    let n = size as f64;
    if let Some(k) = label.strip_prefix("F_") {
        let k: u32 = k.parse().ok()?;
        if k > params.d {
            return None;
        }
        let mut trace = Poly3::zero();
        for i in 0..family.block_size(k) {
            trace = &trace + family.entry(k, i, i);
        }
        let diag = trace.restrict_diagonal().lift(Var::U);
        return Some((l1_up(&diag), l1_up(&trace)));
    }
    match label {
        "q_0" => Some((n, 0.0)),
        "q_1" => Some((n * l1_up(&domain.p.lift(Var::U)), 0.0)),
        "r_0" => Some((0.0, n)),
        _ => {
            let i: usize = label.strip_prefix("r_")?.parse().ok()?;
            if !(1..=4).contains(&i) {
                return None;
            }
            Some((0.0, n * l1_up(&domain.p_tri[i - 1])))
        }
    }
}

/// `(1 - cos theta) / (cos^2 phi - cos theta)`, valid in every dimension
/// when `cos phi >= 0` and `cos theta < cos^2 phi`.
pub fn bound_example1(cos_theta: &Rational, cos_phi: &Rational) -> Result<Rational> {
    let zero = int(0);
    let a = cos_phi * cos_phi - cos_theta;
    if *cos_phi < zero || a <= zero {
        return Err(Error::Inapplicable(
            "needs cos phi >= 0 and cos theta < cos^2 phi".into(),
        ));
    }
    Ok((int(1) - cos_theta) / a)
}

/// Hand-built optimal solution of the `d = 1`, `N = 2` monomial program for
/// `H = G / a - 1` with `G = (t - cos theta) - c (u + v - 2c)`, `c = cos phi`
/// and `a = c^2 - cos theta`; its objective is the degree-1 closed form.
///
/// Needs `0 <= c < 1`, `cos theta > -1` and `a > 0`.
pub fn example1_solution(params: &CapParams, problem: &SdpProblem) -> Result<SdpSolution> {
    let c = params.cos_phi.clone();
    let ct = params.cos_theta.clone();
    let one = int(1);
    let a = &c * &c - &ct;
    if params.d != 1 || params.big_n != 2 || problem.poly_basis != PolyBasis::Monomial {
        return Err(Error::InvalidParameter(
            "the hand-built solution is for d = 1, N = 2, monomial rows".into(),
        ));
    }
    if c < int(0) || c >= one || ct <= -one.clone() || a <= int(0) {
        return Err(Error::Inapplicable(
            "needs 0 <= cos phi < 1, cos theta > -1, cos theta < cos^2 phi".into(),
        ));
    }
    let b = &one - &ct;
    let u = Poly3::<Rational>::u();
    let v = Poly3::<Rational>::v();
    let t = Poly3::<Rational>::t();
    let cst = |x: &Rational| Poly3::constant(x.clone());
    let w = &c * int(2) / (&a * (&one - &c));

    let mut values: Vec<SymMatrix<Rational>> = Vec::new();
    for blk in &problem.blocks {
        let m = match blk.label.as_str() {
            "F_0" => SymMatrix::from_rows(vec![
                vec![&c * &c / &a, -&c / &a],
                vec![-&c / &a, &one / &a],
            ]),
            "F_1" => SymMatrix::from_rows(vec![vec![&one / &a]]),
            "q_0" => gram(blk.basis.as_deref(), &[(w.clone(), &u - &cst(&c))])?,
            "q_1" => SymMatrix::from_rows(vec![vec![w.clone()]]),
            "r_0" => gram(
                blk.basis.as_deref(),
                &[
                    (&one / (&a * (&one + &ct)), &t - &cst(&ct)),
                    (&w / int(2), &u - &cst(&c)),
                    (&w / int(2), &v - &cst(&c)),
                ],
            )?,
            "r_1" | "r_2" => SymMatrix::from_rows(vec![vec![&w / int(2)]]),
            "r_3" => SymMatrix::from_rows(vec![vec![&one / (&a * (&one + &ct))]]),
            other => return Err(Error::InvalidParameter(format!("unexpected block {other}"))),
        };
        if m.dim() != blk.size {
            return Err(Error::SizeMismatch(format!(
                "{} has size {}, built {}",
                blk.label,
                blk.size,
                m.dim()
            )));
        }
        values.push(m);
    }
    let m_value = &b / &a - &one;
    let free = vec![m_value.clone()];
    let res = problem.residuals_exact(&values, &free);
    let max_abs_residual = res.iter().map(|r| r.to_f64().abs()).fold(0.0, f64::max);
    let block_values: Vec<SymMatrix<f64>> = values.iter().map(SymMatrix::to_f64).collect();
    let min_eigenvalue = block_values
        .iter()
        .map(SymMatrix::min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    let objective = (&m_value + &one).to_f64();
    Ok(SdpSolution {
        status: SolveStatus::Optimal,
        backend: "hand-built".into(),
        block_labels: problem.blocks.iter().map(|b| b.label.clone()).collect(),
        block_values,
        scalar_names: vec!["M".into()],
        scalars: vec![m_value.to_f64()],
        dual: Vec::new(),
        objective_value: objective,
        dual_objective: objective,
        residuals: Residuals {
            min_eigenvalue,
            max_abs_residual,
            ..Residuals::default()
        },
        dropped_rows: Vec::new(),
        iterations: Vec::new(),
        message: "degree-1 closed form".into(),
    })
}

/// `sum_s w_s l_s l_s^T` for linear forms `l_s` over the Gram `basis`.
fn gram(
    basis: Option<&[Monomial]>,
    squares: &[(Rational, Poly3<Rational>)],
) -> Result<SymMatrix<Rational>> {
    let basis = basis.ok_or_else(|| Error::Format("Gram block without basis".into()))?;
    let mut out = SymMatrix::<Rational>::zeros(basis.len());
    for (w, l) in squares {
        let coords: Vec<Rational> = basis.iter().map(|m| l.coeff(m)).collect();
        if l.terms().any(|(m, _)| !basis.contains(m)) {
            return Err(Error::SizeMismatch(format!(
                "linear form outside the Gram basis of size {}",
                basis.len()
            )));
        }
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let x = out.get(i, j).clone() + w * &coords[i] * &coords[j];
                out.set(i, j, x);
            }
        }
    }
    Ok(out)
}

/// The degree-2 closed form, with the data needed to audit it.
#[derive(Clone, Debug, PartialEq)]
pub struct Example2 {
    pub n: u32,
    pub bound: Rational,
    /// Maximizer `a* = L / K` of `f_0(a)`.
    pub a: Rational,
    /// `f_0(a*)`.
    pub f0_max: Rational,
    /// `F_0` at `a*`.
    pub f0_matrix: SymMatrix<Rational>,
    /// `2(1 - cos theta)/(1/n - cos theta)` when `cos theta < 1/n`.
    pub lp_bound: Option<Rational>,
}

impl Example2 {
    pub fn to_json(&self) -> Value {
        let q = |x: &Rational| rational_to_string(x);
        json!({
            "n": self.n,
            "bound": q(&self.bound),
            "bound_f64": self.bound.to_f64(),
            "a": q(&self.a),
            "f0_max": q(&self.f0_max),
            "F_0": self.f0_matrix.rows().iter().map(|r| r.iter().map(q).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "lp_bound": self.lp_bound.as_ref().map(q),
        })
    }
}

/// `F_0(a)` of `(t+1)(t - cos theta) + a (p(u) + p(v))` in the `P_i^n`
/// basis of `Y_0`.
pub fn example2_f0(
    n: u32,
    cos_theta: &Rational,
    cos_phi: &Rational,
    a: &Rational,
) -> SymMatrix<Rational> {
    let inv_n = Rational::new(1.into(), n.into());
    let one = int(1);
    let m01 = -(a * (&one + cos_phi));
    let m02 = a * (&one - &inv_n);
    SymMatrix::from_rows(vec![
        vec![
            int(2) * a * (&inv_n + cos_phi) + &inv_n - cos_theta,
            m01.clone(),
            m02.clone(),
        ],
        vec![m01, &one - cos_theta, int(0)],
        vec![m02, int(0), &one - &inv_n],
    ])
}

/// `f_0(a) = -a^2 K + 2 a L + (1/n - cos theta)` with
/// `K = (1 + cos phi)^2/(1 - cos theta) + 1 - 1/n` and `L = 1/n + cos phi`.
pub fn example2_f0_of_a(
    n: u32,
    cos_theta: &Rational,
    cos_phi: &Rational,
    a: &Rational,
) -> Rational {
    let (k, l, c0) = example2_kl(n, cos_theta, cos_phi);
    -(a * a * k) + int(2) * a * l + c0
}

fn example2_kl(n: u32, cos_theta: &Rational, cos_phi: &Rational) -> (Rational, Rational, Rational) {
    let inv_n = Rational::new(1.into(), n.into());
    let one = int(1);
    let k = (&one + cos_phi) * (&one + cos_phi) / (&one - cos_theta) + &one - &inv_n;
    let l = &inv_n + cos_phi;
    (k, l, inv_n - cos_theta)
}

/// `2(1 - cos theta) / (f_0)_max`, valid when `(f_0)_max > 0` and
/// `1/n + cos phi > 0`.
pub fn bound_example2(n: u32, cos_theta: &Rational, cos_phi: &Rational) -> Result<Example2> {
    let one = int(1);
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "n must be at least 2, got {n}"
        )));
    }
    if *cos_theta >= one || *cos_theta < -one.clone() || *cos_phi > one || *cos_phi <= -one.clone()
    {
        return Err(Error::InvalidParameter(
            "cosines must lie in [-1, 1) and (-1, 1]".into(),
        ));
    }
    let (k, l, c0) = example2_kl(n, cos_theta, cos_phi);
    if l <= int(0) {
        return Err(Error::Inapplicable("needs 1/n + cos phi > 0".into()));
    }
    let a = &l / &k;
    let f0_max = c0 + &l * &l / &k;
    if f0_max <= int(0) {
        return Err(Error::Inapplicable("(f_0)_max is not positive".into()));
    }
    let bound = int(2) * (&one - cos_theta) / &f0_max;
    let f0_matrix = example2_f0(n, cos_theta, cos_phi, &a);
    let lp_bound = crate::relax::lp_fixed_polynomial_bound(n, cos_theta);
    Ok(Example2 {
        n,
        bound,
        a,
        f0_max,
        f0_matrix,
        lp_bound,
    })
}

/// How close a code comes to making the certificate's inequalities tight.
/// Values are `H + 1` on cross pairs (at most 0 on the domain) and
/// `H(u, u, 1) - M` on the diagonal (at most 0 on the cap).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EqualityReport {
    pub points: usize,
    pub cross_pairs: usize,
    pub max_abs_cross: Option<f64>,
    pub max_cross: Option<f64>,
    pub min_cross: Option<f64>,
    pub max_abs_diagonal: Option<f64>,
    pub min_diagonal: Option<f64>,
    /// Both maxima within `tolerance`.
    pub near_tight: bool,
    pub tolerance: f64,
}

impl EqualityReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Evaluates the certificate's `H` at every pair `(e.c, e.c', c.c')`,
/// `c != c'`, and `H(u, u, 1)` at every `u = e.c` of `code`.
pub fn equality_case_report<T: Scalar>(
    cert: &BoundCertificate,
    code: &Code<T>,
    tolerance: f64,
) -> Result<EqualityReport> {
    let mut report = EqualityReport {
        points: code.len(),
        tolerance,
        ..EqualityReport::default()
    };
    if code.is_empty() {
        return Ok(report);
    }
    let pole = code
        .pole()
        .ok_or_else(|| Error::InvalidParameter("code has no pole".into()))?;
    let pole: Vec<f64> = pole.iter().map(Scalar::to_f64).collect();
    let norm = pole.iter().map(|x| x * x).sum::<f64>().sqrt();
    let pole: Vec<f64> = pole.iter().map(|x| x / norm).collect();
    let pts = code.unit_points();
    let family = ZonalFamily::<f64>::unnormalized(cert.params.n, cert.params.d)?;
    if cert.matrix_coefficients.len() != cert.params.d as usize + 1 {
        return Err(Error::SizeMismatch(
            "certificate has no matrix coefficients".into(),
        ));
    }
    let h = |p: [f64; 3]| -> f64 {
        (0..=cert.params.d)
            .map(|k| {
                family
                    .eval_block(k, p)
                    .inner(&cert.matrix_coefficients[k as usize])
            })
            .sum()
    };
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let heights: Vec<f64> = pts.iter().map(|p| dot(p, &pole)).collect();
    let m = cert.m();
    let fold = |acc: Option<f64>, x: f64, f: fn(f64, f64) -> f64| Some(acc.map_or(x, |a| f(a, x)));
    for (i, &u) in heights.iter().enumerate() {
        let g = h([u, u, 1.0]) - m;
        report.max_abs_diagonal = fold(report.max_abs_diagonal, g.abs(), f64::max);
        report.min_diagonal = fold(report.min_diagonal, g, f64::min);
        for j in 0..pts.len() {
            if i == j {
                continue;
            }
            let val = h([u, heights[j], dot(&pts[i], &pts[j])]) + 1.0;
            report.cross_pairs += 1;
            report.max_abs_cross = fold(report.max_abs_cross, val.abs(), f64::max);
            report.max_cross = fold(report.max_cross, val, f64::max);
            report.min_cross = fold(report.min_cross, val, f64::min);
        }
    }
    report.near_tight = report.max_abs_cross.unwrap_or(0.0) <= tolerance
        && report.max_abs_diagonal.unwrap_or(0.0) <= tolerance;
    Ok(report)
}

/// Human-readable audit, one check per line.
pub fn audit_text(cert: &BoundCertificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "verdict: {:?}", cert.verdict);
    for b in &cert.audit.blocks {
        let _ = writeln!(
            s,
            "  {:<4} size {:>4}  min eig {:+.3e}  shift {:.1e}",
            b.label, b.size, b.min_eigenvalue, b.shift
        );
    }
    for id in &cert.audit.identities {
        let _ = writeln!(
            s,
            "  {:?} identity: {} rows, max |residual| {:.3e}, l1 {:.3e}",
            id.kind, id.rows, id.max_abs_residual, id.l1_residual
        );
    }
    if let Some(m) = &cert.audit.margin {
        let _ = writeln!(
            s,
            "  margin: 1+M = {:.9}, eps_u {:.2e}, eps_t {:.2e}, inflation {:.2e}",
            m.raw_bound, m.eps_univariate, m.eps_trivariate, m.inflation
        );
    }
    for f in &cert.audit.failures {
        let _ = writeln!(s, "  FAILED {f}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relax::build_cap_sdp;
    use crate::scalar::rat;
    use proptest::prelude::*;

    fn example1() -> (CapParams, SdpProblem, SdpSolution) {
        let params = CapParams::new(3, rat(-7, 25), rat(3, 5), 1, 2).unwrap();
        let problem = build_cap_sdp(&params).unwrap();
        let sol = example1_solution(&params, &problem).unwrap();
        (params, problem, sol)
    }

    #[test]
    fn example1_closed_form() {
        assert_eq!(bound_example1(&rat(-7, 25), &rat(3, 5)).unwrap(), int(2));
        assert_eq!(bound_example1(&int(0), &rat(1, 2)).unwrap(), int(4));
        assert!(matches!(
            bound_example1(&rat(1, 2), &int(0)),
            Err(Error::Inapplicable(_))
        ));
        assert!(matches!(
            bound_example1(&int(0), &rat(-1, 2)),
            Err(Error::Inapplicable(_))
        ));
    }

    #[test]
    fn hand_built_solution_is_exact_and_verifies() {
        let (params, problem, sol) = example1();
        assert_eq!(sol.residuals.max_abs_residual, 0.0);
        let cert = verify_certificate(&sol, &problem, &params, DEFAULT_TOLERANCE).unwrap();
        assert!(cert.is_verified(), "{}", audit_text(&cert));
        let b = cert.bound.unwrap();
        assert!((b - 2.0).abs() < 1e-9, "{b}");
        assert!(b >= cert.objective);
    }

    #[test]
    fn hand_built_solution_in_other_dimensions() {
        for n in [3, 5, 8] {
            for (ct, c) in [
                (rat(-1, 2), rat(1, 2)),
                (rat(0, 1), rat(1, 2)),
                (rat(1, 10), rat(4, 5)),
            ] {
                let params = CapParams::new(n, ct.clone(), c.clone(), 1, 2).unwrap();
                let problem = build_cap_sdp(&params).unwrap();
                let sol = example1_solution(&params, &problem).unwrap();
                assert_eq!(sol.residuals.max_abs_residual, 0.0);
                let cert = verify_certificate(&sol, &problem, &params, DEFAULT_TOLERANCE).unwrap();
                assert!(cert.is_verified(), "{}", audit_text(&cert));
                let want = bound_example1(&ct, &c).unwrap().to_f64();
                assert!((cert.bound.unwrap() - want).abs() < 1e-9);
            }
        }
    }

    fn failures(sol: &SdpSolution, problem: &SdpProblem, params: &CapParams) -> Vec<String> {
        let cert = verify_certificate(sol, problem, params, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(cert.verdict, Verdict::Failed);
        cert.audit.failures
    }

    #[test]
    fn injected_faults_fail() {
        let (params, problem, sol) = example1();
        let r0 = problem.block_index("r_0").unwrap();

        let mut bad = sol.clone();
        let f1 = problem.block_index("F_1").unwrap();
        bad.block_values[f1] = SymMatrix::from_rows(vec![vec![-0.5]]);
        assert!(failures(&bad, &problem, &params)
            .iter()
            .any(|f| f.starts_with("negative eigenvalue")));

        let mut bad = sol.clone();
        let x = *bad.block_values[r0].get(0, 1) + 1.0;
        bad.block_values[r0].set_sym(0, 1, x);
        assert!(failures(&bad, &problem, &params)
            .iter()
            .any(|f| f.starts_with("identity residual")));

        let mut bad = sol.clone();
        bad.scalars[0] = -bad.scalars[0];
        assert!(failures(&bad, &problem, &params)
            .iter()
            .any(|f| f.starts_with("identity residual")));

        let mut bad = sol.clone();
        let dim = bad.block_values[r0].dim() - 1;
        bad.block_values[r0] = SymMatrix::from_fn(dim, |i, j| *sol.block_values[r0].get(i, j));
        assert!(failures(&bad, &problem, &params)
            .iter()
            .any(|f| f.starts_with("block shape")));

        let wrong_d = CapParams {
            d: 2,
            ..params.clone()
        };
        assert!(failures(&sol, &problem, &wrong_d)
            .iter()
            .any(|f| f.starts_with("problem mismatch")));
    }

    #[test]
    fn unusable_status_fails() {
        let (params, problem, mut sol) = example1();
        sol.status = SolveStatus::NumericalFailure;
        assert!(failures(&sol, &problem, &params)
            .iter()
            .any(|f| f.starts_with("solver status")));
        assert!(verify_certificate(&sol, &problem, &params, 0.0).is_err());
    }

    #[test]
    fn tiny_negative_eigenvalue_is_absorbed() {
        let (params, problem, mut sol) = example1();
        let base = verify_certificate(&sol, &problem, &params, DEFAULT_TOLERANCE).unwrap();
        let f0 = problem.block_index("F_0").unwrap();
        let x = sol.block_values[f0].clone();
        sol.block_values[f0] =
            SymMatrix::from_fn(2, |i, j| x.get(i, j) - if i == j { 1e-9 } else { 0.0 });
        let cert = verify_certificate(&sol, &problem, &params, DEFAULT_TOLERANCE).unwrap();
        assert!(cert.audit.blocks[f0].min_eigenvalue < 0.0);
        assert!(cert.is_verified(), "{}", audit_text(&cert));
        assert!(cert.bound.unwrap() > base.bound.unwrap());
        assert!(cert.audit.margin.as_ref().unwrap().inflation > 0.0);
    }

    #[test]
    fn certificate_json_round_trip_and_rows() {
        let (params, problem, sol) = example1();
        let cert = verify_certificate(&sol, &problem, &params, DEFAULT_TOLERANCE).unwrap();
        let back = BoundCertificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
        assert_eq!(cert.table_row(), "3 | - | - | ≤2.01");
        assert_eq!(cert.summary_row(), "3 | -7/25 | 3/5 | 1 | 2 | ≤2.01");
        assert_eq!(round_up_2(9.66837), 9.67);
        assert_eq!(round_up_2(18.0), 18.0);
    }

    #[test]
    fn options_are_recovered() {
        let params = CapParams::kissing(3, 2, 3).unwrap();
        for sym in [false, true] {
            for pb in [PolyBasis::Monomial, PolyBasis::Chebyshev] {
                let opts = BuildOptions {
                    symmetry_reduction: sym,
                    multiplier_degree: Some(6),
                    poly_basis: pb,
                };
                let p = build_cap_sdp_with(&params, &opts).unwrap();
                assert_eq!(infer_build_options(&p), opts);
            }
        }
    }

    #[test]
    fn example2_recovers_2n_minus_1() {
        for n in 2..=12u32 {
            let e = bound_example2(n, &int(0), &int(0)).unwrap();
            assert_eq!(e.bound, int(2 * i64::from(n) - 1));
        }
        assert!(matches!(
            bound_example2(3, &int(0), &rat(-1, 2)),
            Err(Error::Inapplicable(_))
        ));
    }

    /// 3x3 determinant.
    fn det3(m: &SymMatrix<Rational>) -> Rational {
        let g = |i, j| m.get(i, j).clone();
        g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
            - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
            + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
    }

    #[test]
    fn example2_optimum_matches_a_grid_scan() {
        let e = bound_example2(3, &int(0), &int(0)).unwrap();
        assert_eq!(e.bound, int(5));
        // Dense scan of f_0 over a in [0, 2].
        let (best_a, best) = (0..=20000)
            .map(|i| rat(i, 10000))
            .map(|a| (a.clone(), example2_f0_of_a(3, &int(0), &int(0), &a)))
            .max_by(|x, y| x.1.cmp(&y.1))
            .unwrap();
        assert!(best <= e.f0_max);
        assert!((best_a.to_f64() - e.a.to_f64()).abs() < 1e-4);
        assert!((best.to_f64() - e.f0_max.to_f64()).abs() < 1e-8);
        // F_0 - f0_max E_0 is PSD and singular.
        let mut shifted = e.f0_matrix.clone();
        shifted.set(0, 0, shifted.get(0, 0).clone() - &e.f0_max);
        assert_eq!(det3(&shifted), int(0));
        assert!(shifted.to_f64().min_eigenvalue() > -1e-12);
        assert!(e.f0_matrix.to_f64().min_eigenvalue() > 0.0);
    }

    #[test]
    fn example2_f0_is_the_decomposition() {
        use crate::zonal::decompose;
        for (n, ct, c, a) in [
            (3u32, rat(1, 5), rat(1, 3), rat(2, 7)),
            (5, rat(-1, 4), rat(0, 1), rat(1, 2)),
        ] {
            let (u, v, t) = (
                Poly3::<Rational>::u(),
                Poly3::<Rational>::v(),
                Poly3::<Rational>::t(),
            );
            let k = |x: Rational| Poly3::constant(x);
            let one = int(1);
            let pu = &(&u - &k(c.clone())) * &(&u - &k(one.clone()));
            let pv = &(&v - &k(c.clone())) * &(&v - &k(one.clone()));
            let f = &(&(&t + &k(one.clone())) * &(&t - &k(ct.clone()))) + &(&pu + &pv).scale(&a);
            let fam = ZonalFamily::<Rational>::new(n, 2, crate::zonal::Normalization::Unnormalized)
                .unwrap();
            let dec = decompose(&f, &fam).unwrap();
            let want = example2_f0(n, &ct, &c, &a);
            assert_eq!(dec.matrices[0], want, "n={n}");
        }
    }

    proptest! {
        #[test]
        fn example2_below_lp(n in 2u32..12, ct_num in -20i64..20, cp_num in -19i64..20) {
            let ct = rat(ct_num, 20);
            let cp = rat(cp_num, 20);
            if let (Ok(e), Some(lp)) = (bound_example2(n, &ct, &cp), crate::relax::lp_fixed_polynomial_bound(n, &ct)) {
                prop_assert!(e.bound.to_f64() <= lp.to_f64() + 1e-12);
                prop_assert!(e.f0_max > int(0));
            }
        }

        #[test]
        fn example1_scale_free(n in 3u32..10, c_num in 1i64..9, ct_num in -9i64..9) {
            let c = rat(c_num, 10);
            let ct = rat(ct_num, 10);
            if let Ok(b) = bound_example1(&ct, &c) {
                prop_assert!(b >= int(1));
                let params = CapParams::new(n, ct.clone(), c.clone(), 1, 2).unwrap();
                let problem = build_cap_sdp(&params).unwrap();
                let sol = example1_solution(&params, &problem).unwrap();
                prop_assert_eq!(sol.residuals.max_abs_residual, 0.0);
            }
        }
    }
}
