//! Polynomials in the affine coordinates `c_2, c_3, ...` and the Kirillov
//! coordinate operators.
//!
//! The operators are fixed by the closed-form variations: `L_k[f] =
//! ζ^{1+k} f'` moves `c_m` by `(m - k) c_{m-k}` (with `c_1 = 1`) for
//! `k ≥ 1`, and `L_0[f] = ζf' - f` moves `c_m` by `(m - 1) c_m`.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient ring of a [`CoordinatePolynomial`].
pub trait Coefficient: Num + Clone + FromPrimitive + Debug {
    fn to_complex(&self) -> Complex64;
}

impl Coefficient for Complex64 {
    fn to_complex(&self) -> Complex64 {
        *self
    }
}

impl Coefficient for BigRational {
    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
}

/// Exponents keyed by variable index `j` of `c_j` (`j ≥ 2`).
pub type Monomial = BTreeMap<usize, u32>;

/// Weight of a monomial when `c_j` has weight `j - 1`.
pub fn monomial_weight(m: &Monomial) -> usize {
    m.iter().map(|(&j, &e)| (j - 1) * e as usize).sum()
}

/// All monomials of weight `n` in `c_2 .. c_{n+1}` (partitions of `n`).
pub fn monomials_of_weight(n: usize) -> Vec<Monomial> {
    fn rec(remaining: usize, max_part: usize, current: &mut Monomial, out: &mut Vec<Monomial>) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            *current.entry(part + 1).or_insert(0) += 1;
            rec(remaining - part, part, current, out);
            let e = current.get_mut(&(part + 1)).expect("just inserted");
            *e -= 1;
            if *e == 0 {
                current.remove(&(part + 1));
            }
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Monomial::new(), &mut out);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinatePolynomial<T: Coefficient> {
    terms: BTreeMap<Monomial, T>,
}

impl<T: Coefficient> Default for CoordinatePolynomial<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Coefficient> CoordinatePolynomial<T> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(value: T) -> Self {
        Self::term(Monomial::new(), value)
    }

    pub fn term(monomial: Monomial, value: T) -> Self {
        let mut p = Self::zero();
        p.add_term(monomial, value);
        p
    }

    /// `c_j` (`c_1` is the constant one).
    pub fn variable(j: usize) -> Self {
        if j == 1 {
            return Self::constant(T::one());
        }
        assert!(j >= 2, "coordinates start at c_1");
        Self::term(Monomial::from([(j, 1)]), T::one())
    }

    /// Builds from `(monomial as [(j, e)], coefficient)` pairs.
    pub fn from_terms(terms: &[(&[(usize, u32)], T)]) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            let mono: Monomial = m.iter().copied().filter(|&(_, e)| e > 0).collect();
            p.add_term(mono, c.clone());
        }
        p
    }

    pub fn add_term(&mut self, monomial: Monomial, value: T) {
        if value.is_zero() {
            return;
        }
        let entry = self.terms.entry(monomial.clone()).or_insert_with(T::zero);
        *entry = entry.clone() + value;
        if entry.is_zero() {
            self.terms.remove(&monomial);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, T> {
        &self.terms
    }

    pub fn coefficient(&self, monomial: &Monomial) -> T {
        self.terms.get(monomial).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&(T::zero() - T::one())))
    }

    pub fn scale(&self, factor: &T) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone() * factor.clone());
        }
        out
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                for (&j, &e) in m2 {
                    *m.entry(j).or_insert(0) += e;
                }
                out.add_term(m, c1.clone() * c2.clone());
            }
        }
        out
    }

    /// `∂/∂c_j`.
    pub fn derivative(&self, j: usize) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let Some(&e) = m.get(&j) else { continue };
            let mut reduced = m.clone();
            if e == 1 {
                reduced.remove(&j);
            } else {
                reduced.insert(j, e - 1);
            }
            out.add_term(reduced, c.clone() * T::from_u32(e).expect("small exponent"));
        }
        out
    }

    /// Largest variable index present.
    pub fn max_variable(&self) -> usize {
        self.terms.keys().flat_map(|m| m.keys().copied()).max().unwrap_or(1)
    }

    /// `Some(w)` when every term has weight `w`.
    pub fn homogeneous_weight(&self) -> Option<usize> {
        let mut weights = self.terms.keys().map(monomial_weight);
        let first = weights.next()?;
        weights.all(|w| w == first).then_some(first)
    }

    /// Value at `c_j = coords(j)`.
    pub fn evaluate(&self, coords: impl Fn(usize) -> Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter().fold(c.to_complex(), |acc, (&j, &e)| acc * coords(j).powi(e as i32))
            })
            .sum()
    }

    pub fn to_complex(&self) -> CoordinatePolynomial<Complex64> {
        let mut out = CoordinatePolynomial::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.to_complex());
        }
        out
    }

    /// JSON layout `[{"monomial": {"2": e2, ...}, "coeff": [re, im]}, ...]`.
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(m, c)| {
                let z = c.to_complex();
                TermRecord {
                    monomial: m.iter().map(|(j, e)| (j.to_string(), *e)).collect(),
                    coeff: [z.re, z.im],
                }
            })
            .collect()
    }
}

impl CoordinatePolynomial<Complex64> {
    pub fn from_records(records: &[TermRecord]) -> Result<Self> {
        let mut p = Self::zero();
        for r in records {
            let mut m = Monomial::new();
            for (k, &e) in &r.monomial {
                let j: usize = k
                    .parse()
                    .map_err(|_| Error::MalformedInput(format!("variable index {k:?} is not an integer")))?;
                if j < 2 {
                    return Err(Error::MalformedInput(format!("variable index {j} below 2")));
                }
                if e > 0 {
                    m.insert(j, e);
                }
            }
            p.add_term(m, Complex64::new(r.coeff[0], r.coeff[1]));
        }
        Ok(p)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub monomial: BTreeMap<String, u32>,
    pub coeff: [f64; 2],
}

/// Image of `c_j` under the derivation `L_k`.
fn coordinate_image<T: Coefficient>(k: usize, j: usize) -> CoordinatePolynomial<T> {
    if k == 0 {
        return CoordinatePolynomial::variable(j).scale(&T::from_usize(j - 1).expect("small index"));
    }
    if j <= k {
        return CoordinatePolynomial::zero();
    }
    CoordinatePolynomial::variable(j - k).scale(&T::from_usize(j - k).expect("small index"))
}

/// The derivation `L_k`, `k ≥ 0`, applied to `p`. It never raises a
/// variable index, so no truncation occurs.
pub fn kirillov_coordinate_operator<T: Coefficient>(k: usize, p: &CoordinatePolynomial<T>) -> CoordinatePolynomial<T> {
    let mut out = CoordinatePolynomial::zero();
    for j in 2..=p.max_variable() {
        let d = p.derivative(j);
        if d.is_zero() {
            continue;
        }
        out = out.add(&d.mul(&coordinate_image(k, j)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_integer(BigInt::from(n))
    }

    #[test]
    fn partitions_count() {
        let counts: Vec<usize> = (1..=8).map(|n| monomials_of_weight(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 7, 11, 15, 22]);
        assert!(monomials_of_weight(5).iter().all(|m| monomial_weight(m) == 5));
    }

    #[test]
    fn operator_examples() {
        let c2 = CoordinatePolynomial::<Q>::variable(2);
        let c3 = CoordinatePolynomial::<Q>::variable(3);
        assert_eq!(kirillov_coordinate_operator(0, &c2), c2);
        assert_eq!(kirillov_coordinate_operator(0, &c3), c3.scale(&q(2)));
        assert_eq!(kirillov_coordinate_operator(1, &c2), CoordinatePolynomial::constant(q(1)));
        assert_eq!(kirillov_coordinate_operator(1, &c3), c2.scale(&q(2)));
        assert_eq!(kirillov_coordinate_operator(2, &c3), CoordinatePolynomial::constant(q(1)));
        assert!(kirillov_coordinate_operator(2, &c2).is_zero());
    }

    #[test]
    fn weight_grading_is_l0_eigenvalue() {
        for n in 1..=6 {
            for m in monomials_of_weight(n) {
                let p = CoordinatePolynomial::<Q>::term(m, q(1));
                assert_eq!(kirillov_coordinate_operator(0, &p), p.scale(&q(n as i64)));
            }
        }
    }

    #[test]
    fn commutators_follow_witt_relations() {
        // [L_m, L_n] = (m - n) L_{m+n} on every monomial up to degree 3 in c_2..c_8
        let vars: Vec<usize> = (2..=8).collect();
        let mut monos = vec![Monomial::new()];
        for &a in &vars {
            monos.push(Monomial::from([(a, 1)]));
            for &b in &vars {
                let mut m = Monomial::from([(a, 1)]);
                *m.entry(b).or_insert(0) += 1;
                monos.push(m.clone());
                for &c in &vars {
                    let mut m3 = m.clone();
                    *m3.entry(c).or_insert(0) += 1;
                    monos.push(m3);
                }
            }
        }
        for (m, n) in [(1usize, 2usize), (0, 3), (2, 3), (1, 1)] {
            for mono in &monos {
                let p = CoordinatePolynomial::<Q>::term(mono.clone(), q(1));
                let lhs = kirillov_coordinate_operator(m, &kirillov_coordinate_operator(n, &p))
                    .sub(&kirillov_coordinate_operator(n, &kirillov_coordinate_operator(m, &p)));
                let rhs = kirillov_coordinate_operator(m + n, &p).scale(&q(m as i64 - n as i64));
                assert_eq!(lhs, rhs, "[L_{m}, L_{n}] on {mono:?}");
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let p = CoordinatePolynomial::<Complex64>::from_terms(&[
            (&[(3, 1)], Complex64::new(0.5, 0.0)),
            (&[(2, 2)], Complex64::new(-0.5, 0.25)),
        ]);
        let json = serde_json::to_string(&p.to_records()).unwrap();
        assert!(json.contains("\"monomial\":{\"2\":2}"));
        let back: Vec<TermRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(CoordinatePolynomial::from_records(&back).unwrap(), p);
        let bad = vec![TermRecord { monomial: BTreeMap::from([("x".to_string(), 1)]), coeff: [1.0, 0.0] }];
        assert!(CoordinatePolynomial::from_records(&bad).is_err());
    }

    #[test]
    fn evaluation_and_algebra() {
        let c2 = CoordinatePolynomial::<Complex64>::variable(2);
        let c3 = CoordinatePolynomial::<Complex64>::variable(3);
        let p = c3.sub(&c2.mul(&c2));
        let v = p.evaluate(|j| Complex64::new(j as f64, 0.0));
        assert_eq!(v, Complex64::new(-1.0, 0.0));
        assert_eq!(p.homogeneous_weight(), Some(2));
        assert_eq!(p.derivative(2), c2.scale(&Complex64::new(-2.0, 0.0)));
    }
}
