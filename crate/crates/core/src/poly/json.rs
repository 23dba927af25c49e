//! Polynomial wire format: `{"terms": [[a, b, c, "num/den"], ...]}` in graded-lex order.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, rational_to_string, Scalar};

use super::{Monomial, Poly3};

pub fn to_json<T: Scalar>(p: &Poly3<T>) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .map(|(m, c)| {
            let q = c
                .to_rational()
                .map(|q| rational_to_string(&q))
                .unwrap_or_else(|| "NaN".into());
            json!([m.u, m.v, m.t, q])
        })
        .collect();
    json!({ "terms": terms })
}

pub fn from_json<T: Scalar>(value: &Value) -> Result<Poly3<T>> {
    let bad = |why: &str| Error::Format(format!("polynomial json: {why}"));
    let terms = value
        .get("terms")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing terms"))?;
    let mut out = Poly3::zero();
    for term in terms {
        let arr = term
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| bad("term is not a 4-array"))?;
        let exp = |i: usize| -> Result<u32> {
            arr[i]
                .as_u64()
                .and_then(|e| u32::try_from(e).ok())
                .ok_or_else(|| bad("bad exponent"))
        };
        let coeff = arr[3]
            .as_str()
            .and_then(parse_rational)
            .ok_or_else(|| bad("bad coefficient"))?;
        out.add_term(
            Monomial::new(exp(0)?, exp(1)?, exp(2)?),
            T::from_rational(&coeff),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    #[test]
    fn fixed_order_output() {
        let p = Poly3::<Rational>::from_terms([
            (Monomial::new(0, 0, 1), rat(1, 1)),
            (Monomial::new(1, 1, 0), rat(-1, 1)),
            (Monomial::ONE, rat(1, 4)),
        ]);
        let s = serde_json::to_string(&to_json(&p)).unwrap();
        assert_eq!(
            s,
            r#"{"terms":[[0,0,0,"1/4"],[0,0,1,"1/1"],[1,1,0,"-1/1"]]}"#
        );
        let back: Poly3<Rational> = from_json(&to_json(&p)).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn rejects_garbage() {
        assert!(from_json::<Rational>(&json!({"terms": [[1, 2]]})).is_err());
        assert!(from_json::<Rational>(&json!({})).is_err());
    }
}
