//! Sparse SDPA (`.dat-s`) text.
//!
//! SDPA's dual form is `max <F_0, Y>  s.t. <F_i, Y> = c_i, Y >= 0`, so a
//! problem `min <C, X>  s.t. <A_i, X> = b_i` is written with `F_0 = -C`,
//! `F_i = A_i`, `c_i = b_i`. Free scalars become a trailing diagonal block
//! holding `x+` and `x-`. Block labels, Gram bases, row metadata and the
//! objective constant travel in `*` comment lines so that import restores
//! the original problem.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::poly::Monomial;
use crate::relax::{
    Block, Constraint, Entry, FreeTerm, LinearForm, PolyBasis, RowKind, SdpProblem,
};
use crate::scalar::{int, parse_rational, rational_to_string, Rational, Scalar};

fn fmt_value(q: &Rational) -> String {
    format!("{:e}", q.to_f64())
}

fn kind_name(kind: RowKind) -> &'static str {
    match kind {
        RowKind::Univariate => "univariate",
        RowKind::Trivariate => "trivariate",
        RowKind::Normalization => "normalization",
        RowKind::Other => "other",
    }
}

fn parse_kind(s: &str) -> Result<RowKind> {
    Ok(match s {
        "univariate" => RowKind::Univariate,
        "trivariate" => RowKind::Trivariate,
        "normalization" => RowKind::Normalization,
        "other" => RowKind::Other,
        _ => return Err(Error::Format(format!("unknown row kind {s:?}"))),
    })
}

/// Deterministic sparse SDPA text for `problem`.
pub fn export_sdpa(problem: &SdpProblem) -> String {
    let nf = problem.free_vars.len();
    let nb = problem.blocks.len();
    let mut out = String::new();
    for (k, b) in problem.blocks.iter().enumerate() {
        let _ = writeln!(out, "* block {} {}", k + 1, b.label);
        if let Some(basis) = &b.basis {
            let cells: Vec<String> = basis
                .iter()
                .map(|m| format!("{}.{}.{}", m.u, m.v, m.t))
                .collect();
            let _ = writeln!(out, "* basis {} {}", k + 1, cells.join(" "));
        }
    }
    for (k, name) in problem.free_vars.iter().enumerate() {
        let _ = writeln!(out, "* free {} {}", k + 1, name);
    }
    for (i, c) in problem.constraints.iter().enumerate() {
        let m = c.monomial;
        let _ = writeln!(
            out,
            "* row {} {} {} {} {}",
            i + 1,
            kind_name(c.kind),
            m.u,
            m.v,
            m.t
        );
    }
    let _ = writeln!(
        out,
        "* objective-constant {}",
        rational_to_string(&problem.objective_constant)
    );
    if problem.poly_basis != PolyBasis::Monomial {
        let _ = writeln!(out, "* poly-basis {}", problem.poly_basis.name());
    }

    let mut sizes: Vec<String> = problem.blocks.iter().map(|b| b.size.to_string()).collect();
    if nf > 0 {
        sizes.push(format!("-{}", 2 * nf));
    }
    let _ = writeln!(out, "{}", problem.constraints.len());
    let _ = writeln!(out, "{}", sizes.len());
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = problem
        .constraints
        .iter()
        .map(|c| fmt_value(&c.rhs))
        .collect();
    let _ = writeln!(out, "{}", rhs.join(" "));

    let mut emit = |matno: usize, form: &LinearForm, sign: i64| {
        let mut merged: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
        for e in &form.entries {
            *merged
                .entry((e.block + 1, e.i + 1, e.j + 1))
                .or_insert_with(|| int(0)) += e.value.clone() * int(sign);
        }
        for f in &form.free {
            let v = f.value.clone() * int(sign);
            *merged
                .entry((nb + 1, 2 * f.var + 1, 2 * f.var + 1))
                .or_insert_with(|| int(0)) += v.clone();
            *merged
                .entry((nb + 1, 2 * f.var + 2, 2 * f.var + 2))
                .or_insert_with(|| int(0)) -= v;
        }
        for ((blk, i, j), v) in merged {
            if v != int(0) {
                let _ = writeln!(out, "{matno} {blk} {i} {j} {}", fmt_value(&v));
            }
        }
    };
    emit(0, &problem.objective, -1);
    for (i, c) in problem.constraints.iter().enumerate() {
        emit(i + 1, &c.form, 1);
    }
    out
}

fn parse_f64(tok: &str) -> Result<Rational> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::Format(format!("bad number {tok:?}")))?;
    Rational::from_float(v).ok_or_else(|| Error::Format(format!("non-finite number {tok:?}")))
}

fn parse_usize(tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::Format(format!("bad integer {tok:?}")))
}

/// Parses sparse SDPA text. Comment metadata written by [`export_sdpa`] is
/// used when present; otherwise blocks are named `B_k`, diagonal blocks are
/// split into `1 x 1` blocks and all rows are of kind `other`.
pub fn import_sdpa(text: &str) -> Result<SdpProblem> {
    let mut labels: BTreeMap<usize, String> = BTreeMap::new();
    let mut bases: BTreeMap<usize, Vec<Monomial>> = BTreeMap::new();
    let mut free_names: BTreeMap<usize, String> = BTreeMap::new();
    let mut row_meta: BTreeMap<usize, (RowKind, Monomial)> = BTreeMap::new();
    let mut constant = int(0);
    let mut poly_basis = PolyBasis::Monomial;
    let mut body = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed
            .strip_prefix('*')
            .or_else(|| trimmed.strip_prefix('"'))
        {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            match toks.as_slice() {
                ["block", k, label] => {
                    labels.insert(parse_usize(k)?, (*label).to_string());
                }
                ["basis", k, cells @ ..] => {
                    let mut basis = Vec::new();
                    for cell in cells {
                        let e: Vec<u32> = cell
                            .split('.')
                            .map(|x| {
                                x.parse()
                                    .map_err(|_| Error::Format(format!("bad monomial {cell:?}")))
                            })
                            .collect::<Result<_>>()?;
                        if e.len() != 3 {
                            return Err(Error::Format(format!("bad monomial {cell:?}")));
                        }
                        basis.push(Monomial::new(e[0], e[1], e[2]));
                    }
                    bases.insert(parse_usize(k)?, basis);
                }
                ["free", k, name] => {
                    free_names.insert(parse_usize(k)?, (*name).to_string());
                }
                ["row", i, kind, u, v, t] => {
                    let m = Monomial::new(
                        parse_usize(u)? as u32,
                        parse_usize(v)? as u32,
                        parse_usize(t)? as u32,
                    );
                    row_meta.insert(parse_usize(i)?, (parse_kind(kind)?, m));
                }
                ["objective-constant", q] => {
                    constant = parse_rational(q)
                        .ok_or_else(|| Error::Format(format!("bad constant {q:?}")))?;
                }
                ["poly-basis", name] => {
                    poly_basis = PolyBasis::parse(name)?;
                }
                _ => {}
            }
            continue;
        }
        body.push(trimmed.replace([',', '{', '}', '(', ')'], " "));
    }
    let mut lines = body.iter();
    let mut next_line = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::Format(format!("missing {what}")))
    };
    let m = parse_usize(
        next_line("constraint count")?
            .split_whitespace()
            .next()
            .unwrap_or(""),
    )?;
    let nblocks = parse_usize(
        next_line("block count")?
            .split_whitespace()
            .next()
            .unwrap_or(""),
    )?;
    let size_toks: Vec<i64> = next_line("block sizes")?
        .split_whitespace()
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| Error::Format(format!("bad block size {t:?}")))
        })
        .collect::<Result<_>>()?;
    if size_toks.len() != nblocks {
        return Err(Error::Format(format!(
            "expected {nblocks} block sizes, found {}",
            size_toks.len()
        )));
    }
    let mut rhs_toks: Vec<Rational> = Vec::new();
    while rhs_toks.len() < m {
        for t in next_line("right-hand sides")?.split_whitespace() {
            rhs_toks.push(parse_f64(t)?);
        }
    }
    if rhs_toks.len() != m {
        return Err(Error::Format("too many right-hand sides".into()));
    }

    // Map SDPA blocks to problem blocks or free variables.
    let nf = free_names.len();
    enum Target {
        Dense(usize),
        Diagonal(usize),
        Free,
    }
    let mut blocks = Vec::new();
    let mut targets = Vec::new();
    for (k, &size) in size_toks.iter().enumerate() {
        let sdpa_idx = k + 1;
        if nf > 0 && sdpa_idx == nblocks && size == -(2 * nf as i64) {
            targets.push(Target::Free);
        } else if size > 0 {
            let label = labels
                .get(&sdpa_idx)
                .cloned()
                .unwrap_or_else(|| format!("B_{sdpa_idx}"));
            targets.push(Target::Dense(blocks.len()));
            blocks.push(Block {
                label,
                size: size as usize,
                basis: bases.get(&sdpa_idx).cloned(),
            });
        } else if size < 0 {
            targets.push(Target::Diagonal(blocks.len()));
            for i in 0..(-size) as usize {
                blocks.push(Block {
                    label: format!("B_{sdpa_idx}_{}", i + 1),
                    size: 1,
                    basis: None,
                });
            }
        } else {
            return Err(Error::Format("zero block size".into()));
        }
    }

    let mut forms: Vec<LinearForm> = vec![LinearForm::default(); m + 1];
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(Error::Format(format!("expected 5 fields in {line:?}")));
        }
        let matno = parse_usize(toks[0])?;
        let blk = parse_usize(toks[1])?;
        let (i, j) = (parse_usize(toks[2])?, parse_usize(toks[3])?);
        let value = parse_f64(toks[4])?;
        if matno > m || blk == 0 || blk > nblocks || i == 0 || j == 0 {
            return Err(Error::Format(format!("entry out of range: {line:?}")));
        }
        let (i, j) = (i.min(j) - 1, i.max(j) - 1);
        // F_0 = -C.
        let value = if matno == 0 { -value } else { value };
        let form = &mut forms[matno];
        match targets[blk - 1] {
            Target::Dense(b) => {
                if j >= blocks[b].size {
                    return Err(Error::Format(format!("entry outside block: {line:?}")));
                }
                form.entries.push(Entry {
                    block: b,
                    i,
                    j,
                    value,
                });
            }
            Target::Diagonal(first) => {
                if i != j {
                    return Err(Error::Format(format!(
                        "off-diagonal entry in diagonal block: {line:?}"
                    )));
                }
                form.entries.push(Entry {
                    block: first + i,
                    i: 0,
                    j: 0,
                    value,
                });
            }
            Target::Free => {
                if i != j {
                    return Err(Error::Format(format!(
                        "off-diagonal entry in free block: {line:?}"
                    )));
                }
                if i % 2 == 0 {
                    form.free.push(FreeTerm { var: i / 2, value });
                }
            }
        }
    }
    let mut forms = forms.into_iter();
    let objective = forms.next().expect("objective form");
    let constraints = forms
        .zip(rhs_toks)
        .enumerate()
        .map(|(i, (form, rhs))| {
            let (kind, monomial) = row_meta
                .get(&(i + 1))
                .copied()
                .unwrap_or((RowKind::Other, Monomial::ONE));
            Constraint {
                kind,
                monomial,
                form,
                rhs,
            }
        })
        .collect();
    let free_vars = (1..=nf)
        .map(|k| {
            free_names
                .get(&k)
                .cloned()
                .unwrap_or_else(|| format!("x_{k}"))
        })
        .collect();
    let problem = SdpProblem {
        poly_basis,
        blocks,
        free_vars,
        objective,
        objective_constant: constant,
        constraints,
    };
    problem.validate()?;
    Ok(problem)
}
