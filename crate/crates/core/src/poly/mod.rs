//! Exact polynomial arithmetic in one variable and in the three variables
//! `(u, v, t)`, plus the Gegenbauer family.

pub mod chebyshev;
mod gegenbauer;
pub mod json;
mod monomial;
mod tri;
mod uni;

pub use gegenbauer::{gegenbauer, gegenbauer_family};
pub use monomial::Monomial;
pub use tri::Poly3;
pub use uni::{Poly1, Var};

use crate::scalar::Rational;

/// Exact univariate polynomial.
pub type UniPoly = Poly1<Rational>;
/// Exact trivariate polynomial.
pub type TriPoly = Poly3<Rational>;

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::scalar::rat;
    use proptest::prelude::*;

    fn arb_tripoly() -> impl Strategy<Value = TriPoly> {
        prop::collection::vec(((0u32..3, 0u32..3, 0u32..3), -6i64..6, 1i64..4), 0..6).prop_map(
            |terms| {
                TriPoly::from_terms(
                    terms
                        .into_iter()
                        .map(|((a, b, c), n, d)| (Monomial::new(a, b, c), rat(n, d))),
                )
            },
        )
    }

    proptest! {
        #[test]
        fn ring_laws(f in arb_tripoly(), g in arb_tripoly(), h in arb_tripoly()) {
            prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
            prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
            prop_assert_eq!(&f + &g, &g + &f);
            prop_assert_eq!(&f * &g, &g * &f);
            prop_assert!((&f - &f).is_zero());
        }

        #[test]
        fn swap_is_involution(f in arb_tripoly()) {
            prop_assert_eq!(f.swap_uv().swap_uv(), f.clone());
            prop_assert!(f.symmetrize().is_uv_symmetric());
        }

        #[test]
        fn json_round_trip(f in arb_tripoly()) {
            let back: TriPoly = json::from_json(&json::to_json(&f)).unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn eval_is_a_ring_homomorphism(f in arb_tripoly(), g in arb_tripoly(), a in -4i64..4, b in -4i64..4, c in -4i64..4) {
            let p = [rat(a, 3), rat(b, 2), rat(c, 5)];
            let pt = [&p[0], &p[1], &p[2]];
            prop_assert_eq!((&f * &g).eval(pt), f.eval(pt) * g.eval(pt));
            let pf = [p[0].clone(), p[1].clone(), p[2].clone()].map(|q| crate::scalar::rational_to_f64(&q));
            prop_assert!(((&f + &g).eval_f64(pf) - crate::scalar::rational_to_f64(&(f.eval(pt) + g.eval(pt)))).abs() < 1e-9);
        }
    }
}
