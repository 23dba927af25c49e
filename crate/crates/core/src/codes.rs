//! Reference spherical codes, cap subcodes and two-point distance
//! distributions.
//!
//! Points are stored as raw coordinate vectors sharing one squared norm
//! `norm_sq`, so the unit vectors are `raw / sqrt(norm_sq)`. Root systems use
//! integer raw coordinates and get exact rational inner products.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::scalar::{int, rational_to_string, Rational, Scalar};
use crate::zonal::ZonalFamily;

/// Finite point set on `S^{n-1}`, optionally with a distinguished pole.
#[derive(Clone, Debug, PartialEq)]
pub struct Code<T> {
    dim: usize,
    norm_sq: T,
    points: Vec<Vec<T>>,
    pole: Option<Vec<T>>,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn close<T: Scalar>(a: &T, b: &T) -> bool {
    if T::is_exact() {
        a == b
    } else {
        (a.to_f64() - b.to_f64()).abs() <= 1e-12 * b.to_f64().abs().max(1.0)
    }
}

impl<T: Scalar> Code<T> {
    /// Validates that every raw point has squared norm `norm_sq` and that no
    /// point repeats.
    pub fn new(dim: usize, norm_sq: T, points: Vec<Vec<T>>) -> Result<Self> {
        if norm_sq <= T::zero() {
            return Err(Error::InvalidParameter("norm_sq must be positive".into()));
        }
        for (idx, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::SizeMismatch(format!(
                    "point {idx} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if !close(&dot(p, p), &norm_sq) {
                return Err(Error::InvalidParameter(format!(
                    "point {idx} is not unit length"
                )));
            }
        }
        for i in 0..points.len() {
            for j in 0..i {
                if close(&dot(&points[i], &points[j]), &norm_sq) {
                    return Err(Error::InvalidParameter(format!(
                        "points {j} and {i} coincide"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            norm_sq,
            points,
            pole: None,
        })
    }

    pub fn with_pole(mut self, pole: Vec<T>) -> Result<Self> {
        self.check_pole(&pole)?;
        self.pole = Some(pole);
        Ok(self)
    }

    fn check_pole(&self, pole: &[T]) -> Result<()> {
        if pole.len() != self.dim || !close(&dot(pole, pole), &self.norm_sq) {
            return Err(Error::InvalidParameter(
                "pole must be a unit vector in the code's normalization".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn norm_sq(&self) -> &T {
        &self.norm_sq
    }

    pub fn raw_points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn pole(&self) -> Option<&[T]> {
        self.pole.as_deref()
    }

    /// `c_i . c_j` for the unit vectors.
    pub fn inner(&self, i: usize, j: usize) -> T {
        dot(&self.points[i], &self.points[j]) / self.norm_sq.clone()
    }

    /// `e . c_i`.
    pub fn height(&self, i: usize) -> Option<T> {
        self.pole
            .as_ref()
            .map(|e| dot(e, &self.points[i]) / self.norm_sq.clone())
    }

    /// Unit vectors in floating point.
    pub fn unit_points(&self) -> Vec<Vec<f64>> {
        let s = self.norm_sq.to_f64().sqrt();
        self.points
            .iter()
            .map(|p| p.iter().map(|x| x.to_f64() / s).collect())
            .collect()
    }

    /// Points `c` with `e . c >= cos_phi` (closed cap); the pole is recorded.
    pub fn cap_subcode(&self, pole: &[T], cos_phi: &T) -> Result<Code<T>> {
        self.check_pole(pole)?;
        let points = self
            .points
            .iter()
            .filter(|p| dot(pole, p) / self.norm_sq.clone() >= *cos_phi)
            .cloned()
            .collect();
        Ok(Code {
            dim: self.dim,
            norm_sq: self.norm_sq.clone(),
            points,
            pole: Some(pole.to_vec()),
        })
    }

    /// Largest inner product between distinct points.
    pub fn max_inner_product(&self) -> Result<T> {
        if self.points.len() < 2 {
            return Err(Error::InvalidParameter(
                "minimal angle needs at least two points".into(),
            ));
        }
        let mut best: Option<T> = None;
        for i in 0..self.points.len() {
            for j in 0..i {
                let ip = self.inner(i, j);
                if best.as_ref().is_none_or(|b| ip > *b) {
                    best = Some(ip);
                }
            }
        }
        Ok(best.expect("at least one pair"))
    }

    /// Minimal angular distance in radians.
    pub fn min_angle(&self) -> Result<f64> {
        Ok(self.max_inner_product()?.to_f64().clamp(-1.0, 1.0).acos())
    }

    /// Plain text, one unit vector per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in self.unit_points() {
            let line: Vec<String> = p.iter().map(|x| format!("{x:e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let fmt = |x: &T| {
            x.to_rational()
                .map(|q| rational_to_string(&q))
                .unwrap_or_default()
        };
        json!({
            "dim": self.dim,
            "norm_sq": fmt(&self.norm_sq),
            "points": self.points.iter().map(|p| p.iter().map(fmt).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "pole": self.pole.as_ref().map(|e| e.iter().map(fmt).collect::<Vec<_>>()),
        })
    }
}

impl Code<f64> {
    /// Gaussian-normalized random points.
    pub fn random<R: Rng>(dim: usize, size: usize, rng: &mut R) -> Self {
        let points = (0..size).map(|_| random_unit_vector(dim, rng)).collect();
        Self {
            dim,
            norm_sq: 1.0,
            points,
            pole: None,
        }
    }
}

pub fn random_unit_vector<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// The 240 roots of `E_8`, scaled by 2 so all raw coordinates are integers
/// (`norm_sq = 8`): 112 of shape `(+-2, +-2, 0^6)` and 128 of shape `(+-1)^8`
/// with an even number of minus signs.
pub fn e8_roots() -> Code<Rational> {
    let mut points = Vec::with_capacity(240);
    for i in 0..8 {
        for j in (i + 1)..8 {
            for (si, sj) in [(2, 2), (2, -2), (-2, 2), (-2, -2)] {
                let mut p = vec![int(0); 8];
                p[i] = int(si);
                p[j] = int(sj);
                points.push(p);
            }
        }
    }
    for mask in 0u32..256 {
        if mask.count_ones() % 2 == 0 {
            points.push(
                (0..8)
                    .map(|b| if mask >> b & 1 == 1 { int(-1) } else { int(1) })
                    .collect(),
            );
        }
    }
    Code {
        dim: 8,
        norm_sq: int(8),
        points,
        pole: None,
    }
}

/// Pole `(1, 1, 0, ..., 0)/sqrt(2)` in the raw scaling of [`e8_roots`].
pub fn e8_pole() -> Vec<Rational> {
    let mut e = vec![int(0); 8];
    e[0] = int(2);
    e[1] = int(2);
    e
}

/// The `2n(n-1)` roots `(+-1, +-1, 0^{n-2})/sqrt(2)` of `D_n`.
pub fn dn_roots(n: usize) -> Result<Code<Rational>> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "D_n roots need n >= 3, got {n}"
        )));
    }
    let mut points = Vec::with_capacity(2 * n * (n - 1));
    for i in 0..n {
        for j in (i + 1)..n {
            for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let mut p = vec![int(0); n];
                p[i] = int(si);
                p[j] = int(sj);
                points.push(p);
            }
        }
    }
    Ok(Code {
        dim: n,
        norm_sq: int(2),
        points,
        pole: None,
    })
}

/// Pole `(1, 1, 0, ..., 0)/sqrt(2)` in the raw scaling of [`dn_roots`].
pub fn dn_pole(n: usize) -> Vec<Rational> {
    let mut e = vec![int(0); n];
    e[0] = int(1);
    e[1] = int(1);
    e
}

/// `(u, v, t)` key with `u <= v`.
pub type Triple = (Rational, Rational, Rational);

/// Two-point distance distribution `y` of a code relative to its pole.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceDistribution {
    pub entries: BTreeMap<Triple, Rational>,
    pub cardinality: usize,
}

impl DistanceDistribution {
    /// Sum of `y` over the diagonal keys `(u, u, 1)`.
    pub fn diagonal_sum(&self) -> Rational {
        let one = int(1);
        self.entries
            .iter()
            .filter(|((u, v, t), _)| u == v && *t == one)
            .fold(int(0), |acc, (_, y)| acc + y)
    }

    pub fn total(&self) -> Rational {
        self.entries.values().fold(int(0), |acc, y| acc + y)
    }

    /// `sum_{(u,v,t)} y(u,v,t) Ybar_k(u,v,t)`, exact, returned in floating point.
    pub fn zonal_moment(&self, family: &ZonalFamily<Rational>, k: u32) -> SymMatrix<f64> {
        let size = family.block_size(k);
        let entries: Vec<_> = (0..size)
            .flat_map(|i| (i..size).map(move |j| (i, j)))
            .map(|(i, j)| ((i, j), family.symmetrized_entry(k, i, j)))
            .collect();
        let mut acc = SymMatrix::<Rational>::zeros(size);
        for ((u, v, t), y) in &self.entries {
            for ((i, j), poly) in &entries {
                let val = acc.get(*i, *j).clone() + y.clone() * poly.eval([u, v, t]);
                acc.set_sym(*i, *j, val);
            }
        }
        acc.to_f64()
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|((u, v, t), y)| {
                json!([
                    rational_to_string(u),
                    rational_to_string(v),
                    rational_to_string(t),
                    rational_to_string(y)
                ])
            })
            .collect();
        json!({ "cardinality": self.cardinality, "entries": entries })
    }
}

impl Code<Rational> {
    /// `y(u,v,t) = m(u,v)/|C| * #{(c,c') : e.c = u, e.c' = v, c.c' = t}` on
    /// keys with `u <= v`, where `m = 2` off the diagonal `u = v`.
    pub fn distance_distribution(&self) -> Result<DistanceDistribution> {
        let heights: Vec<Rational> = (0..self.len())
            .map(|i| {
                self.height(i)
                    .ok_or_else(|| Error::InvalidParameter("code has no pole".into()))
            })
            .collect::<Result<_>>()?;
        let mut counts: BTreeMap<Triple, u64> = BTreeMap::new();
        for i in 0..self.len() {
            for j in 0..self.len() {
                let (u, v) = (&heights[i], &heights[j]);
                if u > v {
                    continue;
                }
                *counts
                    .entry((u.clone(), v.clone(), self.inner(i, j)))
                    .or_default() += 1;
            }
        }
        let card = int(self.len() as i64);
        let entries = counts
            .into_iter()
            .map(|(key, c)| {
                let m = if key.0 == key.1 { 1 } else { 2 };
                let y = int((m * c) as i64) / card.clone();
                (key, y)
            })
            .collect();
        Ok(DistanceDistribution {
            entries,
            cardinality: self.len(),
        })
    }

    /// Distinct inner products between distinct points.
    pub fn inner_product_set(&self) -> Vec<Rational> {
        let mut set = std::collections::BTreeSet::new();
        for i in 0..self.len() {
            for j in 0..i {
                set.insert(self.inner(i, j));
            }
        }
        set.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use std::f64::consts::PI;

    #[test]
    fn e8_facts() {
        let e8 = e8_roots();
        assert_eq!(e8.len(), 240);
        let ips = e8.inner_product_set();
        let allowed = [rat(-1, 1), rat(-1, 2), int(0), rat(1, 2)];
        assert!(ips.iter().all(|x| allowed.contains(x)), "{ips:?}");
        assert!((e8.min_angle().unwrap() - PI / 3.0).abs() < 1e-12);
        assert!(Code::new(8, int(8), e8.raw_points().to_vec()).is_ok());
    }

    #[test]
    fn e8_hemisphere() {
        let e8 = e8_roots();
        let cap = e8.cap_subcode(&e8_pole(), &int(0)).unwrap();
        assert_eq!(cap.len(), 183);
        let dist = cap.distance_distribution().unwrap();
        assert_eq!(dist.diagonal_sum(), int(1));
        assert_eq!(dist.total(), int(183));
    }

    #[test]
    fn cap_extremes() {
        let e8 = e8_roots();
        assert_eq!(e8.cap_subcode(&e8_pole(), &int(-1)).unwrap().len(), 240);
        let tip = e8.cap_subcode(&e8_pole(), &int(1)).unwrap();
        assert_eq!(tip.raw_points(), &[e8_pole()]);
        assert!(e8.cap_subcode(&vec![int(1); 8][..7], &int(0)).is_err());
    }

    #[test]
    fn dn_sizes_and_angles() {
        assert_eq!(dn_roots(3).unwrap().len(), 12);
        assert_eq!(dn_roots(4).unwrap().len(), 24);
        assert_eq!(dn_roots(5).unwrap().len(), 40);
        for n in 3..=5 {
            let c = dn_roots(n).unwrap();
            assert!((c.min_angle().unwrap() - PI / 3.0).abs() < 1e-12);
        }
        assert!(dn_roots(2).is_err());
    }

    #[test]
    fn small_distributions() {
        let single = Code::new(3, int(1), vec![vec![int(1), int(0), int(0)]])
            .unwrap()
            .with_pole(vec![int(1), int(0), int(0)])
            .unwrap();
        let d = single.distance_distribution().unwrap();
        assert_eq!(d.entries.len(), 1);
        assert_eq!(d.entries[&(int(1), int(1), int(1))], int(1));

        let pair = Code::new(
            3,
            int(1),
            vec![vec![int(1), int(0), int(0)], vec![int(0), int(1), int(0)]],
        )
        .unwrap()
        .with_pole(vec![int(1), int(0), int(0)])
        .unwrap();
        let d = pair.distance_distribution().unwrap();
        assert_eq!(d.entries[&(int(0), int(1), int(0))], int(1));
        assert_eq!(d.entries[&(int(0), int(0), int(1))], rat(1, 2));
        assert_eq!(d.entries[&(int(1), int(1), int(1))], rat(1, 2));
        assert_eq!(d.diagonal_sum(), int(1));
        assert_eq!(d.total(), int(2));
    }

    #[test]
    fn min_angle_cases() {
        let antipodal = Code::new(2, 1.0, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert!((antipodal.min_angle().unwrap() - PI).abs() < 1e-12);
        let lonely = Code::new(2, 1.0, vec![vec![1.0, 0.0]]).unwrap();
        assert!(lonely.min_angle().is_err());
    }

    #[test]
    fn rejects_bad_points() {
        assert!(Code::new(2, int(1), vec![vec![int(1), int(1)]]).is_err());
        assert!(Code::new(2, int(1), vec![vec![int(1), int(0)], vec![int(1), int(0)]]).is_err());
    }

    #[test]
    fn primal_moments_are_psd() {
        let family = ZonalFamily::<Rational>::unnormalized(4, 4).unwrap();
        let d4 = dn_roots(4).unwrap();
        let cap = d4.cap_subcode(&dn_pole(4), &int(0)).unwrap();
        assert_eq!(cap.len(), 15);
        let dist = cap.distance_distribution().unwrap();
        for k in 0..=4 {
            let m = dist.zonal_moment(&family, k);
            assert!(
                m.min_eigenvalue() >= -1e-9 * m.get(0, 0).abs().max(1.0),
                "k={k}"
            );
        }
    }
}
