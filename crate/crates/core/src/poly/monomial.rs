use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent triple of `u^a v^b t^c`.
///
/// Ordered graded-lexicographically with `u > v > t`: lower total degree
/// first, and within a degree the lexicographically larger exponent first,
/// so a sorted degree-1 list reads `[u, v, t]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
pub struct Monomial {
    pub u: u32,
    pub v: u32,
    pub t: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { u: 0, v: 0, t: 0 };

    pub const fn new(u: u32, v: u32, t: u32) -> Self {
        Self { u, v, t }
    }

    pub const fn degree(&self) -> u32 {
        self.u + self.v + self.t
    }

    /// Total degree in `(u, t)`.
    pub const fn degree_ut(&self) -> u32 {
        self.u + self.t
    }

    pub const fn swap_uv(&self) -> Self {
        Self {
            u: self.v,
            v: self.u,
            t: self.t,
        }
    }

    pub const fn mul(&self, other: &Monomial) -> Self {
        Self {
            u: self.u + other.u,
            v: self.v + other.v,
            t: self.t + other.t,
        }
    }

    pub const fn as_array(&self) -> [u32; 3] {
        [self.u, self.v, self.t]
    }

    /// All exponent triples of total degree at most `max_degree`, in order.
    pub fn all_up_to(max_degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        for deg in 0..=max_degree {
            for a in (0..=deg).rev() {
                for b in (0..=deg - a).rev() {
                    out.push(Monomial::new(a, b, deg - a - b));
                }
            }
        }
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.as_array().cmp(&self.as_array()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (name, e) in [("u", self.u), ("v", self.v), ("t", self.t)] {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let basis = Monomial::all_up_to(1);
        assert_eq!(
            basis,
            vec![
                Monomial::ONE,
                Monomial::new(1, 0, 0),
                Monomial::new(0, 1, 0),
                Monomial::new(0, 0, 1)
            ]
        );
        let mut sorted = Monomial::all_up_to(4);
        assert_eq!(sorted.len(), 35);
        let copy = sorted.clone();
        sorted.sort();
        assert_eq!(sorted, copy);
    }
}
