use crate::error::{Error, Result};
use crate::scalar::{int, Rational};

use super::UniPoly;

/// Zonal polynomial `P_k^n` of `S^{n-1}`: the Gegenbauer polynomial with
/// parameter `n/2 - 1`, normalized so that `P_k^n(1) = 1`. For `n = 2` this
/// is the Chebyshev polynomial `T_k`.
pub fn gegenbauer(n: u32, k: u32) -> Result<UniPoly> {
    Ok(gegenbauer_family(n, k)?.pop().expect("family is nonempty"))
}

/// `[P_0^n, ..., P_max_k^n]` from the normalized three-term recurrence
/// `(k+n-2) P_{k+1} = (2k+n-2) t P_k - k P_{k-1}`.
pub fn gegenbauer_family(n: u32, max_k: u32) -> Result<Vec<UniPoly>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "gegenbauer needs n >= 2, got {n}"
        )));
    }
    let mut out = vec![UniPoly::constant(int(1))];
    if max_k == 0 {
        return Ok(out);
    }
    out.push(UniPoly::x());
    let x = UniPoly::x();
    let n = i64::from(n);
    for k in 1..i64::from(max_k) {
        let prev = &out[(k - 1) as usize];
        let cur = &out[k as usize];
        let lead = (&x * cur).scale(&int(2 * k + n - 2));
        let next =
            (&lead - &prev.scale(&int(k))).scale(&Rational::new((1).into(), (k + n - 2).into()));
        out.push(next);
    }
    Ok(out)
}
