use capsdp::conic::{backend, export_sdpa, import_sdpa, solve, SolveStatus, SolverConfig};
use capsdp::poly::Monomial;
use capsdp::relax::{
    build_cap_sdp, Block, CapParams, Constraint, Entry, FreeTerm, LinearForm, PolyBasis, RowKind,
    SdpProblem,
};
use capsdp::scalar::{int, rat};
use capsdp::Rational;
use rand::{Rng, SeedableRng};

fn one_by_one(rhs: i64) -> SdpProblem {
    SdpProblem {
        poly_basis: PolyBasis::Monomial,
        blocks: vec![Block {
            label: "x".into(),
            size: 1,
            basis: None,
        }],
        free_vars: vec![],
        objective: LinearForm {
            entries: vec![Entry {
                block: 0,
                i: 0,
                j: 0,
                value: int(1),
            }],
            free: vec![],
        },
        objective_constant: int(0),
        constraints: vec![Constraint {
            kind: RowKind::Other,
            monomial: Monomial::ONE,
            form: LinearForm {
                entries: vec![Entry {
                    block: 0,
                    i: 0,
                    j: 0,
                    value: int(1),
                }],
                free: vec![],
            },
            rhs: int(rhs),
        }],
    }
}

#[test]
fn toy_scalar() {
    let sol = solve(&one_by_one(5), &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.objective_value - 5.0).abs() < 1e-7);
    assert!(sol.dual_objective <= sol.objective_value + 1e-8);
}

#[test]
fn two_by_two_trace() {
    // min X11 + X22 with X12 = 1: optimum 2 at [[1,1],[1,1]].
    let a12 = LinearForm {
        entries: vec![Entry {
            block: 0,
            i: 0,
            j: 1,
            value: rat(1, 2),
        }],
        free: vec![],
    };
    let trace = LinearForm {
        entries: vec![
            Entry {
                block: 0,
                i: 0,
                j: 0,
                value: int(1),
            },
            Entry {
                block: 0,
                i: 1,
                j: 1,
                value: int(1),
            },
        ],
        free: vec![],
    };
    let p = SdpProblem {
        poly_basis: PolyBasis::Monomial,
        blocks: vec![Block {
            label: "X".into(),
            size: 2,
            basis: None,
        }],
        free_vars: vec![],
        objective: trace,
        objective_constant: int(0),
        constraints: vec![Constraint {
            kind: RowKind::Other,
            monomial: Monomial::ONE,
            form: a12,
            rhs: int(1),
        }],
    };
    let sol = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!(
        (sol.objective_value - 2.0).abs() < 1e-7,
        "{}",
        sol.objective_value
    );
    let x = &sol.block_values[0];
    assert!((x.get(0, 1) - 1.0).abs() < 1e-7);
}

#[test]
fn free_variable_with_bound() {
    // min m s.t. m - x = 3, x >= 0  ->  3.
    let p = SdpProblem {
        poly_basis: PolyBasis::Monomial,
        blocks: vec![Block {
            label: "x".into(),
            size: 1,
            basis: None,
        }],
        free_vars: vec!["m".into()],
        objective: LinearForm {
            entries: vec![],
            free: vec![FreeTerm {
                var: 0,
                value: int(1),
            }],
        },
        objective_constant: int(1),
        constraints: vec![Constraint {
            kind: RowKind::Other,
            monomial: Monomial::ONE,
            form: LinearForm {
                entries: vec![Entry {
                    block: 0,
                    i: 0,
                    j: 0,
                    value: int(-1),
                }],
                free: vec![FreeTerm {
                    var: 0,
                    value: int(1),
                }],
            },
            rhs: int(3),
        }],
    };
    let sol = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!(
        (sol.objective_value - 4.0).abs() < 1e-6,
        "{}",
        sol.objective_value
    );
    assert!((sol.scalar("m").unwrap() - 3.0).abs() < 1e-6);
}

#[test]
fn infeasible_is_reported() {
    let sol = solve(&one_by_one(-1), &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible, "{}", sol.message);
}

#[test]
fn unknown_backend_and_bad_config() {
    assert!(backend("nope").is_err());
    let bad = SolverConfig {
        tolerance: 0.0,
        ..Default::default()
    };
    assert!(solve(&one_by_one(1), &bad).is_err());
}

#[test]
fn deterministic_logs() {
    let params = CapParams::kissing(3, 3, 3).unwrap();
    let p = build_cap_sdp(&params).unwrap();
    let a = solve(&p, &SolverConfig::default()).unwrap();
    let b = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(
        serde_json::to_string(&a.iterations).unwrap(),
        serde_json::to_string(&b.iterations).unwrap()
    );
    assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
}

#[test]
fn small_cap_program_replays() {
    let params = CapParams::kissing(3, 3, 3).unwrap();
    let p = build_cap_sdp(&params).unwrap();
    let cfg = SolverConfig::default();
    let sol = solve(&p, &cfg).unwrap();
    assert!(sol.status.is_usable(), "{:?} {}", sol.status, sol.message);
    assert!(sol.dual_objective <= sol.objective_value + 1e-6);
    assert!(
        sol.residuals.max_abs_residual <= 10.0 * cfg.tolerance * 100.0,
        "{:?}",
        sol.residuals
    );
    assert!(
        (sol.objective_value - 12.0787).abs() < 1e-3,
        "{}",
        sol.objective_value
    );
}

#[test]
fn low_degree_cap_program_is_infeasible() {
    let p = build_cap_sdp(&CapParams::kissing(3, 2, 2).unwrap()).unwrap();
    let sol = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible, "{}", sol.message);
}

#[test]
fn b3_reference_value() {
    let params = CapParams::kissing(3, 4, 4).unwrap();
    let p = build_cap_sdp(&params).unwrap();
    let sol = solve(&p, &SolverConfig::default()).unwrap();
    assert!(sol.status.is_usable(), "{:?} {}", sol.status, sol.message);
    assert!(sol.residuals.max_abs_residual < 1e-6);
    assert!(sol.objective_value > 9.0 && sol.objective_value <= 9.67);
}

#[test]
fn empty_problem_export() {
    let text = export_sdpa(&SdpProblem::default());
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('*')).collect();
    assert_eq!(body, vec!["0", "0", "", ""]);
}

#[test]
fn toy_export_layout() {
    let text = export_sdpa(&one_by_one(5));
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('*')).collect();
    assert_eq!(
        body,
        vec!["1", "1", "1", "5e0", "0 1 1 1 -1e0", "1 1 1 1 1e0"]
    );
}

fn random_problem(seed: u64) -> SdpProblem {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let nb = rng.gen_range(1..4);
    let blocks: Vec<Block> = (0..nb)
        .map(|k| Block {
            label: format!("b{k}"),
            size: rng.gen_range(1..4),
            basis: None,
        })
        .collect();
    let nf = rng.gen_range(0..3);
    let dyadic = |rng: &mut rand_chacha::ChaCha8Rng| -> Rational {
        rat(rng.gen_range(-16..=16), 1 << rng.gen_range(0..4))
    };
    let form = |rng: &mut rand_chacha::ChaCha8Rng| {
        let mut entries = Vec::new();
        for (b, blk) in blocks.iter().enumerate() {
            for i in 0..blk.size {
                for j in i..blk.size {
                    if rng.gen_bool(0.5) {
                        entries.push(Entry {
                            block: b,
                            i,
                            j,
                            value: dyadic(rng),
                        });
                    }
                }
            }
        }
        let mut free = Vec::new();
        for var in 0..nf {
            if rng.gen_bool(0.5) {
                free.push(FreeTerm {
                    var,
                    value: dyadic(rng),
                });
            }
        }
        LinearForm { entries, free }
    };
    let objective = form(&mut rng);
    let constraints = (0..rng.gen_range(0..5))
        .map(|i| Constraint {
            kind: RowKind::Trivariate,
            monomial: Monomial::new(i, 1, 0),
            form: form(&mut rng),
            rhs: dyadic(&mut rng),
        })
        .collect();
    SdpProblem {
        poly_basis: if rng.gen_bool(0.5) {
            PolyBasis::Chebyshev
        } else {
            PolyBasis::Monomial
        },
        blocks,
        free_vars: (0..nf).map(|k| format!("z{k}")).collect(),
        objective,
        objective_constant: rat(3, 7),
        constraints,
    }
}

#[test]
fn sdpa_round_trip() {
    for seed in 0..40 {
        let p = random_problem(seed).normalized();
        let text = export_sdpa(&p);
        let back = import_sdpa(&text).unwrap();
        assert_eq!(back.normalized(), p, "seed {seed}\n{text}");
        assert_eq!(export_sdpa(&back), text);
    }
    let cap = build_cap_sdp(&CapParams::kissing(3, 1, 2).unwrap())
        .unwrap()
        .normalized();
    assert_eq!(import_sdpa(&export_sdpa(&cap)).unwrap().normalized(), cap);
}

#[test]
fn sdpa_without_metadata() {
    let text = "2\n2\n2 -2\n1 2\n0 1 1 1 1\n1 1 1 2 1\n1 2 1 1 1\n2 2 2 2 1\n";
    let p = import_sdpa(text).unwrap();
    assert_eq!(p.blocks.len(), 3);
    assert_eq!(p.constraints.len(), 2);
    assert!(import_sdpa("1\n1\n2\n").is_err());
    assert!(import_sdpa("1\n1\n2\n1\n1 1 3 3 1\n").is_err());
}
