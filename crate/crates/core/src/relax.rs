//! Finite semidefinite programs: the cap program with Putinar multipliers
//! and the single-variable LP used as a benchmark.
//!
//! Every constraint row is "coefficient of one basis polynomial" in a
//! polynomial identity, stored with exact rational data. The basis is either
//! the monomials or the tensor Chebyshev products `T_a(u) T_b(v) T_c(t)`;
//! Gram blocks use the same basis as the rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::poly::chebyshev::{chebyshev_mul, to_chebyshev};
use crate::poly::{gegenbauer_family, Monomial, Poly1, Poly3, Var};
use crate::scalar::{int, rational_serde, Rational, Scalar};
use crate::zonal::ZonalFamily;

/// Parameters of `A(n, theta, phi)` and of its relaxation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapParams {
    pub n: u32,
    #[serde(with = "rational_serde")]
    pub cos_theta: Rational,
    #[serde(with = "rational_serde")]
    pub cos_phi: Rational,
    pub d: u32,
    #[serde(rename = "N")]
    pub big_n: u32,
}

impl CapParams {
    pub fn new(n: u32, cos_theta: Rational, cos_phi: Rational, d: u32, big_n: u32) -> Result<Self> {
        let p = Self {
            n,
            cos_theta,
            cos_phi,
            d,
            big_n,
        };
        p.validate()?;
        Ok(p)
    }

    /// `theta = pi/3`, `phi = pi/2`.
    pub fn kissing(n: u32, d: u32, big_n: u32) -> Result<Self> {
        Self::new(n, Rational::new(1.into(), 2.into()), int(0), d, big_n)
    }

    pub fn validate(&self) -> Result<()> {
        let one = int(1);
        if self.n < 3 {
            return Err(Error::InvalidParameter(format!(
                "n must be at least 3, got {}",
                self.n
            )));
        }
        if self.cos_theta < -one.clone() || self.cos_theta >= one {
            return Err(Error::InvalidParameter(
                "cos_theta must lie in [-1, 1)".into(),
            ));
        }
        if self.cos_phi <= -one.clone() || self.cos_phi > one {
            return Err(Error::InvalidParameter(
                "cos_phi must lie in (-1, 1]".into(),
            ));
        }
        if self.d < 1 {
            return Err(Error::InvalidParameter("d must be at least 1".into()));
        }
        if self.big_n < 2 {
            return Err(Error::InvalidParameter(format!(
                "N must be at least 2, got {}",
                self.big_n
            )));
        }
        Ok(())
    }

    /// Degree `D = max(2d, N)` shared by both identities and the multipliers.
    pub fn multiplier_degree(&self) -> u32 {
        (2 * self.d).max(self.big_n)
    }
}

/// Defining polynomials of the cap interval and of `Delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSystem {
    /// `p(u) = -(u - cos phi)(u - 1)`.
    pub p: Poly1<Rational>,
    /// `p_1 = p(u)`, `p_2 = p(v)`, `p_3 = -(t+1)(t - cos theta)`,
    /// `p_4 = 1 + 2uvt - u^2 - v^2 - t^2`.
    pub p_tri: [Poly3<Rational>; 4],
}

impl DomainSystem {
    pub fn new(cos_theta: &Rational, cos_phi: &Rational) -> Self {
        let one = int(1);
        let p = Poly1::new(vec![-cos_phi.clone(), one.clone() + cos_phi, -one.clone()]);
        let (u, v, t) = (
            Poly3::<Rational>::u(),
            Poly3::<Rational>::v(),
            Poly3::<Rational>::t(),
        );
        let c1 = Poly3::constant(one.clone());
        let p3 = (&(&t + &c1) * &(&t - &Poly3::constant(cos_theta.clone()))).scale(&int(-1));
        let uvt = &(&u * &v) * &t;
        let p4 = &(&(&(&c1 + &uvt.scale(&int(2))) - &u.pow(2)) - &v.pow(2)) - &t.pow(2);
        Self {
            p_tri: [p.lift(Var::U), p.lift(Var::V), p3, p4],
            p,
        }
    }
}

/// Graded-lex monomials of total degree `<= max_total_degree` in `u` alone
/// (`num_vars = 1`) or in `(u, v, t)`.
pub fn monomial_basis(num_vars: usize, max_total_degree: u32) -> Result<Vec<Monomial>> {
    match num_vars {
        1 => Ok((0..=max_total_degree)
            .map(|i| Monomial::new(i, 0, 0))
            .collect()),
        3 => Ok(Monomial::all_up_to(max_total_degree)),
        _ => Err(Error::InvalidParameter(format!(
            "monomial bases exist for 1 or 3 variables, not {num_vars}"
        ))),
    }
}

/// One coefficient `A_ij` (with `i <= j`) of a symmetric data matrix;
/// `<A, X> = sum_i A_ii X_ii + 2 sum_{i<j} A_ij X_ij`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    #[serde(with = "rational_serde")]
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeTerm {
    pub var: usize,
    #[serde(with = "rational_serde")]
    pub value: Rational,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearForm {
    pub entries: Vec<Entry>,
    pub free: Vec<FreeTerm>,
}

impl LinearForm {
    pub fn eval_exact(&self, blocks: &[SymMatrix<Rational>], free: &[Rational]) -> Rational {
        let two = int(2);
        let mut acc = int(0);
        for e in &self.entries {
            let x = blocks[e.block].get(e.i, e.j);
            acc += if e.i == e.j {
                e.value.clone() * x
            } else {
                two.clone() * &e.value * x
            };
        }
        for f in &self.free {
            acc += f.value.clone() * &free[f.var];
        }
        acc
    }

    pub fn eval_f64(&self, blocks: &[SymMatrix<f64>], free: &[f64]) -> f64 {
        let mut acc = 0.0;
        for e in &self.entries {
            let w = if e.i == e.j { 1.0 } else { 2.0 };
            acc += w * e.value.to_f64() * blocks[e.block].get(e.i, e.j);
        }
        for f in &self.free {
            acc += f.value.to_f64() * free[f.var];
        }
        acc
    }
}

/// Which polynomial identity a row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Univariate,
    Trivariate,
    Normalization,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: RowKind,
    pub monomial: Monomial,
    pub form: LinearForm,
    #[serde(with = "rational_serde")]
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub label: String,
    pub size: usize,
    /// Basis of a Gram block, as exponents in the problem's [`PolyBasis`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Monomial>>,
}

/// How exponents in row labels and Gram bases are read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyBasis {
    /// `u^a v^b t^c`.
    #[default]
    Monomial,
    /// `T_a(u) T_b(v) T_c(t)`.
    Chebyshev,
}

impl PolyBasis {
    pub fn name(self) -> &'static str {
        match self {
            PolyBasis::Monomial => "monomial",
            PolyBasis::Chebyshev => "chebyshev",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "monomial" => Ok(PolyBasis::Monomial),
            "chebyshev" => Ok(PolyBasis::Chebyshev),
            _ => Err(Error::InvalidParameter(format!(
                "unknown polynomial basis {s:?}"
            ))),
        }
    }

    /// Coordinates of a monomial-form polynomial in this basis.
    pub fn coordinates(self, p: &Poly3<Rational>) -> Poly3<Rational> {
        match self {
            PolyBasis::Monomial => p.clone(),
            PolyBasis::Chebyshev => to_chebyshev(p),
        }
    }
}

/// `minimize <objective> + constant` over PSD blocks and free scalars
/// subject to exact linear equalities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    #[serde(default)]
    pub poly_basis: PolyBasis,
    pub blocks: Vec<Block>,
    pub free_vars: Vec<String>,
    pub objective: LinearForm,
    #[serde(with = "rational_serde")]
    pub objective_constant: Rational,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn block_index(&self, label: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.label == label)
    }

    pub fn free_index(&self, name: &str) -> Option<usize> {
        self.free_vars.iter().position(|b| b == name)
    }

    /// Checks that every reference lands inside a declared block.
    pub fn validate(&self) -> Result<()> {
        let check = |form: &LinearForm| -> Result<()> {
            for e in &form.entries {
                let b = self
                    .blocks
                    .get(e.block)
                    .ok_or_else(|| Error::Format(format!("unknown block {}", e.block)))?;
                if e.i > e.j || e.j >= b.size {
                    return Err(Error::Format(format!(
                        "entry ({}, {}) outside block {}",
                        e.i, e.j, b.label
                    )));
                }
            }
            for f in &form.free {
                if f.var >= self.free_vars.len() {
                    return Err(Error::Format(format!("unknown free variable {}", f.var)));
                }
            }
            Ok(())
        };
        check(&self.objective)?;
        self.constraints.iter().try_for_each(|c| check(&c.form))
    }

    /// `lhs - rhs` for every constraint, in exact arithmetic.
    pub fn residuals_exact(
        &self,
        blocks: &[SymMatrix<Rational>],
        free: &[Rational],
    ) -> Vec<Rational> {
        self.constraints
            .iter()
            .map(|c| c.form.eval_exact(blocks, free) - &c.rhs)
            .collect()
    }

    pub fn residuals_f64(&self, blocks: &[SymMatrix<f64>], free: &[f64]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| c.form.eval_f64(blocks, free) - c.rhs.to_f64())
            .collect()
    }

    pub fn objective_f64(&self, blocks: &[SymMatrix<f64>], free: &[f64]) -> f64 {
        self.objective.eval_f64(blocks, free) + self.objective_constant.to_f64()
    }

    /// Same problem with every form's entries sorted, merged and free of
    /// zeros; the representative used for structural comparison.
    pub fn normalized(&self) -> SdpProblem {
        let norm = |form: &LinearForm| -> LinearForm {
            let mut entries: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
            for e in &form.entries {
                *entries.entry((e.block, e.i, e.j)).or_insert_with(|| int(0)) += &e.value;
            }
            let mut free: BTreeMap<usize, Rational> = BTreeMap::new();
            for f in &form.free {
                *free.entry(f.var).or_insert_with(|| int(0)) += &f.value;
            }
            LinearForm {
                entries: entries
                    .into_iter()
                    .filter(|(_, v)| *v != int(0))
                    .map(|((block, i, j), value)| Entry { block, i, j, value })
                    .collect(),
                free: free
                    .into_iter()
                    .filter(|(_, v)| *v != int(0))
                    .map(|(var, value)| FreeTerm { var, value })
                    .collect(),
            }
        };
        SdpProblem {
            poly_basis: self.poly_basis,
            blocks: self.blocks.clone(),
            free_vars: self.free_vars.clone(),
            objective: norm(&self.objective),
            objective_constant: self.objective_constant.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    kind: c.kind,
                    monomial: c.monomial,
                    form: norm(&c.form),
                    rhs: c.rhs.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("problem serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let p: Self = serde_json::from_value(value.clone())?;
        p.validate()?;
        Ok(p)
    }
}

/// Knobs of [`build_cap_sdp_with`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Match only the `u <-> v` symmetrized trivariate identity and drop the
    /// `p(v)` multiplier; the feasible values are unchanged.
    pub symmetry_reduction: bool,
    /// Overrides the multiplier degree `max(2d, N)`; never lowered below it.
    pub multiplier_degree: Option<u32>,
    /// Row and Gram basis.
    pub poly_basis: PolyBasis,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            symmetry_reduction: false,
            multiplier_degree: None,
            poly_basis: PolyBasis::Monomial,
        }
    }
}

/// Accumulates constraint rows keyed by basis exponent.
struct RowBuilder {
    kind: RowKind,
    basis: PolyBasis,
    index: BTreeMap<Monomial, usize>,
    rows: Vec<Constraint>,
    canonical: fn(Monomial) -> Monomial,
}

impl RowBuilder {
    fn new(
        kind: RowKind,
        poly_basis: PolyBasis,
        basis: &[Monomial],
        canonical: fn(Monomial) -> Monomial,
    ) -> Self {
        let mut index = BTreeMap::new();
        let mut rows = Vec::new();
        for m in basis {
            let c = canonical(*m);
            index.entry(c).or_insert_with(|| {
                rows.push(Constraint {
                    kind,
                    monomial: c,
                    form: LinearForm::default(),
                    rhs: int(0),
                });
                rows.len() - 1
            });
        }
        Self {
            kind,
            basis: poly_basis,
            index,
            rows,
            canonical,
        }
    }

    fn row(&mut self, m: Monomial) -> Result<&mut Constraint> {
        let c = (self.canonical)(m);
        let idx = *self.index.get(&c).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "{:?} identity has a term {c} beyond its degree",
                self.kind
            ))
        })?;
        Ok(&mut self.rows[idx])
    }

    /// Adds `poly` (monomial form) as the coefficient of `X_ij`.
    fn add_entry(
        &mut self,
        block: usize,
        i: usize,
        j: usize,
        poly: &Poly3<Rational>,
    ) -> Result<()> {
        let coords = self.basis.coordinates(poly);
        self.add_coordinates(block, i, j, &coords)
    }

    fn add_coordinates(
        &mut self,
        block: usize,
        i: usize,
        j: usize,
        poly: &Poly3<Rational>,
    ) -> Result<()> {
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (m, c) in poly.terms() {
            *acc.entry((self.canonical)(*m)).or_insert_with(|| int(0)) += c;
        }
        for (m, c) in acc {
            if c != int(0) {
                let row = self.row(m)?;
                row.form.entries.push(Entry {
                    block,
                    i,
                    j,
                    value: c,
                });
            }
        }
        Ok(())
    }

    fn add_free(&mut self, var: usize, m: Monomial, value: Rational) -> Result<()> {
        self.row(m)?.form.free.push(FreeTerm { var, value });
        Ok(())
    }

    fn set_rhs(&mut self, m: Monomial, value: Rational) -> Result<()> {
        self.row(m)?.rhs = value;
        Ok(())
    }

    /// Adds `multiplier * (b^T G b)` for a Gram block over `basis`; the
    /// multiplier is in monomial form.
    fn add_gram(
        &mut self,
        block: usize,
        basis: &[Monomial],
        multiplier: &Poly3<Rational>,
    ) -> Result<()> {
        let mult = self.basis.coordinates(multiplier);
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let prod = match self.basis {
                    PolyBasis::Monomial => {
                        &mult * &Poly3::monomial(basis[i].mul(&basis[j]), int(1))
                    }
                    PolyBasis::Chebyshev => {
                        let bb = chebyshev_mul(
                            &Poly3::monomial(basis[i], int(1)),
                            &Poly3::monomial(basis[j], int(1)),
                        );
                        chebyshev_mul(&mult, &bb)
                    }
                };
                self.add_coordinates(block, i, j, &prod)?;
            }
        }
        Ok(())
    }
}

fn identity_canonical(m: Monomial) -> Monomial {
    m
}

fn symmetric_canonical(m: Monomial) -> Monomial {
    if m.u >= m.v {
        m
    } else {
        m.swap_uv()
    }
}

fn push_block(
    blocks: &mut Vec<Block>,
    label: &str,
    basis: Vec<Monomial>,
) -> Option<(usize, Vec<Monomial>)> {
    if basis.is_empty() {
        return None;
    }
    blocks.push(Block {
        label: label.into(),
        size: basis.len(),
        basis: Some(basis.clone()),
    });
    Some((blocks.len() - 1, basis))
}

fn gram_basis(num_vars: usize, degree: i64) -> Result<Vec<Monomial>> {
    if degree < 0 {
        return Ok(Vec::new());
    }
    monomial_basis(num_vars, degree as u32)
}

/// The cap program with default options.
pub fn build_cap_sdp(params: &CapParams) -> Result<SdpProblem> {
    build_cap_sdp_with(params, &BuildOptions::default())
}

/// Minimize `1 + M` over PSD `F_0..F_d` and SOS multipliers with
///
/// * `M - sum_k <F_k, Ybar_k(u,u,1)> = q_0(u) + p(u) q_1(u)`
/// * `-1 - sum_k <F_k, Ybar_k(u,v,t)> = r_0 + sum_i p_i r_i`
///
/// matched monomial by monomial. With `D = max(2d, N)` the Gram bases have
/// degree `D/2` for `q_0, r_0`, `(D-2)/2` for `q_1, r_1..r_3` and `(D-3)/2`
/// for `r_4` (rounded down), and both identities are matched up to degree
/// `D` (trivariate: `max(2d, N+1)`).
pub fn build_cap_sdp_with(params: &CapParams, options: &BuildOptions) -> Result<SdpProblem> {
    params.validate()?;
    let big_d = options
        .multiplier_degree
        .unwrap_or(0)
        .max(params.multiplier_degree());
    let tri_degree = big_d.max(params.big_n + 1);
    let family = ZonalFamily::<Rational>::unnormalized(params.n, params.d)?;
    let domain = DomainSystem::new(&params.cos_theta, &params.cos_phi);

    let mut blocks = Vec::new();
    let mut f_blocks = Vec::new();
    for k in 0..=params.d {
        blocks.push(Block {
            label: format!("F_{k}"),
            size: family.block_size(k),
            basis: None,
        });
        f_blocks.push(blocks.len() - 1);
    }
    let dd = i64::from(big_d);
    let q0 = push_block(&mut blocks, "q_0", gram_basis(1, dd / 2)?);
    let q1 = push_block(&mut blocks, "q_1", gram_basis(1, (dd - 2).div_euclid(2))?);
    let r0 = push_block(&mut blocks, "r_0", gram_basis(3, dd / 2)?);
    let mut r_mult = Vec::new();
    for (i, deg) in [(1, dd - 2), (2, dd - 2), (3, dd - 2), (4, dd - 3)] {
        if i == 2 && options.symmetry_reduction {
            continue;
        }
        if let Some(b) = push_block(
            &mut blocks,
            &format!("r_{i}"),
            gram_basis(3, deg.div_euclid(2))?,
        ) {
            r_mult.push((i, b));
        }
    }

    let free_vars = vec!["M".to_string()];
    let pb = options.poly_basis;
    let mut uni = RowBuilder::new(
        RowKind::Univariate,
        pb,
        &monomial_basis(1, big_d)?,
        identity_canonical,
    );
    let canonical = if options.symmetry_reduction {
        symmetric_canonical
    } else {
        identity_canonical
    };
    let mut tri = RowBuilder::new(
        RowKind::Trivariate,
        pb,
        &monomial_basis(3, tri_degree)?,
        canonical,
    );

    // sum_k <F_k, Ybar_k(u,u,1)> - M + q_0 + p q_1 = 0
    // sum_k <F_k, Ybar_k> + r_0 + sum p_i r_i = -1
    for k in 0..=params.d {
        let size = family.block_size(k);
        for i in 0..size {
            for j in i..size {
                let entry = family.symmetrized_entry(k, i, j);
                uni.add_entry(
                    f_blocks[k as usize],
                    i,
                    j,
                    &entry.restrict_diagonal().lift(Var::U),
                )?;
                tri.add_entry(f_blocks[k as usize], i, j, &entry)?;
            }
        }
    }
    uni.add_free(0, Monomial::ONE, int(-1))?;
    let one = Poly3::constant(int(1));
    if let Some((b, basis)) = &q0 {
        uni.add_gram(*b, basis, &one)?;
    }
    if let Some((b, basis)) = &q1 {
        uni.add_gram(*b, basis, &domain.p.lift(Var::U))?;
    }
    if let Some((b, basis)) = &r0 {
        tri.add_gram(*b, basis, &one)?;
    }
    for (i, (b, basis)) in &r_mult {
        tri.add_gram(*b, basis, &domain.p_tri[i - 1])?;
    }
    tri.set_rhs(Monomial::ONE, int(-1))?;

    let objective = LinearForm {
        entries: Vec::new(),
        free: vec![FreeTerm {
            var: 0,
            value: int(1),
        }],
    };
    let mut constraints = uni.rows;
    constraints.extend(tri.rows);
    let problem = SdpProblem {
        poly_basis: pb,
        blocks,
        free_vars,
        objective,
        objective_constant: int(1),
        constraints,
    };
    problem.validate()?;
    Ok(problem)
}

/// Single-variable LP over `f(t) = sum_k f_k P_k^n(t)` with `f_k >= 0`,
/// `f_0 = 1` and `f <= 0` on `[-1, cos theta]` (certified by
/// `-f = s_0 + p_3 s_1`), minimizing `f(1) = sum_k f_k`. Degree `max(2d, N)`.
/// The pole and the cap are ignored, so its value bounds the whole sphere.
pub fn assemble_distance_lp_comparison(params: &CapParams) -> Result<SdpProblem> {
    params.validate()?;
    let deg = params.multiplier_degree();
    let geg = gegenbauer_family(params.n, deg)?;
    let mut blocks: Vec<Block> = (0..=deg)
        .map(|k| Block {
            label: format!("f_{k}"),
            size: 1,
            basis: None,
        })
        .collect();
    let tvar = |m: Monomial| Monomial::new(0, 0, m.u);
    let s0 = push_block(
        &mut blocks,
        "s_0",
        gram_basis(1, i64::from(deg) / 2)?
            .into_iter()
            .map(tvar)
            .collect(),
    );
    let s1 = push_block(
        &mut blocks,
        "s_1",
        gram_basis(1, (i64::from(deg) - 2).div_euclid(2))?
            .into_iter()
            .map(tvar)
            .collect(),
    );
    let basis: Vec<Monomial> = (0..=deg).map(|i| Monomial::new(0, 0, i)).collect();
    let mut rows = RowBuilder::new(
        RowKind::Univariate,
        PolyBasis::Monomial,
        &basis,
        identity_canonical,
    );
    for (k, p) in geg.iter().enumerate() {
        rows.add_entry(k, 0, 0, &p.lift(Var::T))?;
    }
    let domain = DomainSystem::new(&params.cos_theta, &params.cos_phi);
    if let Some((b, basis)) = &s0 {
        rows.add_gram(*b, basis, &Poly3::constant(int(1)))?;
    }
    if let Some((b, basis)) = &s1 {
        rows.add_gram(*b, basis, &domain.p_tri[2])?;
    }
    let mut constraints = rows.rows;
    constraints.push(Constraint {
        kind: RowKind::Normalization,
        monomial: Monomial::ONE,
        form: LinearForm {
            entries: vec![Entry {
                block: 0,
                i: 0,
                j: 0,
                value: int(1),
            }],
            free: Vec::new(),
        },
        rhs: int(1),
    });
    let objective = LinearForm {
        entries: (0..=deg as usize)
            .map(|k| Entry {
                block: k,
                i: 0,
                j: 0,
                value: int(1),
            })
            .collect(),
        free: Vec::new(),
    };
    let problem = SdpProblem {
        poly_basis: PolyBasis::Monomial,
        blocks,
        free_vars: Vec::new(),
        objective,
        objective_constant: int(0),
        constraints,
    };
    problem.validate()?;
    Ok(problem)
}

/// `2(1 - cos theta)/(1/n - cos theta)`, the value of `(t+1)(t - cos theta)`
/// in the LP; `None` unless `cos theta < 1/n`.
pub fn lp_fixed_polynomial_bound(n: u32, cos_theta: &Rational) -> Option<Rational> {
    let f0 = Rational::new(1.into(), n.into()) - cos_theta;
    if f0 <= int(0) {
        return None;
    }
    Some(int(2) * (int(1) - cos_theta) / f0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn kissing(n: u32, d: u32, big_n: u32) -> CapParams {
        CapParams::kissing(n, d, big_n).unwrap()
    }

    #[test]
    fn bases() {
        assert_eq!(
            monomial_basis(1, 2).unwrap(),
            vec![
                Monomial::new(0, 0, 0),
                Monomial::new(1, 0, 0),
                Monomial::new(2, 0, 0)
            ]
        );
        assert_eq!(
            monomial_basis(3, 1).unwrap(),
            vec![
                Monomial::ONE,
                Monomial::new(1, 0, 0),
                Monomial::new(0, 1, 0),
                Monomial::new(0, 0, 1)
            ]
        );
        assert_eq!(monomial_basis(3, 4).unwrap().len(), 35);
        assert!(monomial_basis(2, 1).is_err());
    }

    #[test]
    fn param_validation() {
        assert!(CapParams::new(3, rat(1, 2), int(0), 2, 2).is_ok());
        assert!(CapParams::new(3, int(1), int(0), 2, 2).is_err());
        assert!(CapParams::new(3, rat(1, 2), int(-1), 2, 2).is_err());
        assert!(CapParams::new(3, rat(1, 2), int(0), 0, 2).is_err());
        assert!(CapParams::new(3, rat(1, 2), int(0), 2, 1).is_err());
        assert!(CapParams::new(2, rat(1, 2), int(0), 2, 2).is_err());
    }

    #[test]
    fn domain_polynomials() {
        let dom = DomainSystem::new(&rat(1, 2), &int(0));
        assert_eq!(dom.p.eval(&int(0)), int(0));
        assert_eq!(dom.p.eval(&int(1)), int(0));
        assert_eq!(dom.p.eval(&rat(1, 2)), rat(1, 4));
        let (h, z, o) = (rat(1, 2), int(0), int(1));
        assert_eq!(dom.p_tri[2].eval([&z, &z, &h]), int(0));
        assert_eq!(dom.p_tri[2].eval([&z, &z, &z]), rat(1, 2));
        // Boundary of Delta: t = uv +- sqrt((1-u^2)(1-v^2)).
        assert_eq!(dom.p_tri[3].eval([&o, &h, &h]), int(0));
        assert_eq!(dom.p_tri[3].eval([&z, &z, &z]), int(1));
    }

    #[test]
    fn block_inventory_small() {
        let p = build_cap_sdp(&CapParams::new(3, rat(1, 2), int(0), 2, 2).unwrap()).unwrap();
        let sizes: Vec<(String, usize)> =
            p.blocks.iter().map(|b| (b.label.clone(), b.size)).collect();
        let want: Vec<(String, usize)> = [
            ("F_0", 3),
            ("F_1", 2),
            ("F_2", 1),
            ("q_0", 3),
            ("q_1", 2),
            ("r_0", 10),
            ("r_1", 4),
            ("r_2", 4),
            ("r_3", 4),
            ("r_4", 1),
        ]
        .iter()
        .map(|(l, s)| (l.to_string(), *s))
        .collect();
        assert_eq!(sizes, want);
        let uni = p
            .constraints
            .iter()
            .filter(|c| c.kind == RowKind::Univariate)
            .count();
        assert_eq!(uni, 5);
        let tri = p
            .constraints
            .iter()
            .filter(|c| c.kind == RowKind::Trivariate)
            .count();
        assert_eq!(tri, 35);
    }

    #[test]
    fn multiplier_degree_override() {
        let params = kissing(3, 1, 2);
        let p = build_cap_sdp(&params).unwrap();
        assert!(p.block_index("r_4").is_none());
        let big = build_cap_sdp_with(
            &params,
            &BuildOptions {
                multiplier_degree: Some(4),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(big.blocks[big.block_index("r_0").unwrap()].size, 10);
    }

    #[test]
    fn diagonal_rows_match_closed_form() {
        // Block k entry (i,j) on the diagonal is P_i P_j (1-u^2)^k.
        let params = kissing(4, 2, 4);
        let p = build_cap_sdp(&params).unwrap();
        let fam = ZonalFamily::<Rational>::unnormalized(4, 2).unwrap();
        let uni: Vec<&Constraint> = p
            .constraints
            .iter()
            .filter(|c| c.kind == RowKind::Univariate)
            .collect();
        let one_minus_u2 = Poly1::new(vec![int(1), int(0), int(-1)]);
        for k in 0..=2u32 {
            let size = fam.block_size(k);
            for i in 0..size {
                for j in i..size {
                    let want = &(fam.p(k, i) * fam.p(k, j)) * &one_minus_u2.pow(k);
                    for c in &uni {
                        let got = c
                            .form
                            .entries
                            .iter()
                            .find(|e| e.block == k as usize && e.i == i && e.j == j)
                            .map(|e| e.value.clone())
                            .unwrap_or_else(|| int(0));
                        assert_eq!(got, want.coeff(c.monomial.u as usize));
                    }
                }
            }
        }
    }

    fn random_assignment(
        problem: &SdpProblem,
        seed: u64,
    ) -> (Vec<SymMatrix<Rational>>, Vec<Rational>) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let blocks = problem
            .blocks
            .iter()
            .map(|b| {
                let mut m = SymMatrix::zeros(b.size);
                for i in 0..b.size {
                    for j in i..b.size {
                        m.set_sym(i, j, rat(rng.gen_range(-5..=5), rng.gen_range(1..=3)));
                    }
                }
                m
            })
            .collect();
        let free = problem
            .free_vars
            .iter()
            .map(|_| rat(rng.gen_range(-5..=5), 2))
            .collect();
        (blocks, free)
    }

    #[test]
    fn rows_are_coefficients_of_the_identity() {
        let params = CapParams::new(3, rat(1, 3), rat(1, 4), 2, 3).unwrap();
        let p = build_cap_sdp(&params).unwrap();
        let (blocks, free) = random_assignment(&p, 5);
        let fam = ZonalFamily::<Rational>::unnormalized(3, 2).unwrap();
        let dom = DomainSystem::new(&params.cos_theta, &params.cos_phi);
        let gram = |label: &str| -> Poly3<Rational> {
            let idx = p.block_index(label).unwrap();
            let basis = p.blocks[idx].basis.as_ref().unwrap();
            let mut out = Poly3::zero();
            for i in 0..basis.len() {
                for j in 0..basis.len() {
                    out.add_term(basis[i].mul(&basis[j]), blocks[idx].get(i, j).clone());
                }
            }
            out
        };
        let mut f = Poly3::zero();
        for k in 0..=2u32 {
            let size = fam.block_size(k);
            for i in 0..size {
                for j in 0..size {
                    f.add_scaled(fam.entry(k, i, j), blocks[k as usize].get(i, j));
                }
            }
        }
        let tri_lhs = &(&(&(&(&f + &gram("r_0")) + &(&dom.p_tri[0] * &gram("r_1")))
            + &(&dom.p_tri[1] * &gram("r_2")))
            + &(&dom.p_tri[2] * &gram("r_3")))
            + &(&dom.p_tri[3] * &gram("r_4"));
        let uni_lhs = &(&(&f.restrict_diagonal().lift(Var::U) - &Poly3::constant(free[0].clone()))
            + &gram("q_0"))
            + &(&dom.p.lift(Var::U) * &gram("q_1"));
        let res = p.residuals_exact(&blocks, &free);
        for (c, r) in p.constraints.iter().zip(&res) {
            let lhs = match c.kind {
                RowKind::Univariate => uni_lhs.coeff(&c.monomial),
                RowKind::Trivariate => tri_lhs.coeff(&c.monomial),
                _ => unreachable!(),
            };
            assert_eq!(lhs - &c.rhs, *r, "{:?} {}", c.kind, c.monomial);
        }
    }

    #[test]
    fn symmetric_reduction_sums_orbits() {
        let params = kissing(3, 2, 2);
        let full = build_cap_sdp(&params).unwrap();
        let sym = build_cap_sdp_with(
            &params,
            &BuildOptions {
                symmetry_reduction: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(sym.block_index("r_2").is_none());
        let tri = |p: &SdpProblem| {
            p.constraints
                .iter()
                .filter(|c| c.kind == RowKind::Trivariate)
                .count()
        };
        assert_eq!(tri(&sym), 22);
        assert_eq!(tri(&full), 35);
    }

    #[test]
    fn json_round_trip() {
        let p = build_cap_sdp(&kissing(3, 1, 2)).unwrap();
        let back = SdpProblem::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn lp_rows_and_fixed_formula() {
        let params = CapParams::new(3, int(0), int(0), 2, 2).unwrap();
        let lp = assemble_distance_lp_comparison(&params).unwrap();
        // (t+1) t = P_2 (3/2)... as f_k with f_0 = 1/3 normalized: feasible point check.
        assert_eq!(lp.constraints.len(), 6);
        assert_eq!(lp_fixed_polynomial_bound(3, &int(0)), Some(int(6)));
        assert_eq!(lp_fixed_polynomial_bound(8, &rat(1, 2)), None);
        assert_eq!(lp_fixed_polynomial_bound(4, &rat(1, 8)), Some(rat(14, 1)));
    }
}
