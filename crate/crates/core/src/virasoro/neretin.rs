//! Neretin polynomials, their Schwarzian generatrix, the Ψ-form pairing
//! and low-order Bieberbach functionals.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::field::CircleVectorField;
use super::polynomial::{kirillov_coordinate_operator, monomials_of_weight, CoordinatePolynomial, Monomial};
use crate::error::{Error, Result};
use crate::quadrature::periodic_trapezoid;
use crate::series::{uniform_angles, TruncatedSeries, UnivalentCoefficients};

type Q = BigRational;

fn rational(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Solves the augmented system `[A | b]` exactly by Gauss-Jordan
/// elimination; fails on inconsistency or a non-unique solution.
fn solve_exact(mut rows: Vec<Vec<Q>>, unknowns: usize) -> std::result::Result<Vec<Q>, String> {
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for col in 0..unknowns {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = Q::one() / rows[r][col].clone();
        for v in rows[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let factor = row[col].clone();
                for (v, p) in row.iter_mut().zip(&pivot).skip(col) {
                    *v = v.clone() - p.clone() * factor.clone();
                }
            }
        }
        pivot_cols.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[unknowns].is_zero()) {
        return Err("the linear system is inconsistent".into());
    }
    if pivot_cols.len() < unknowns {
        return Err(format!("solution not unique (rank {} of {unknowns})", pivot_cols.len()));
    }
    Ok((0..unknowns).map(|i| rows[i][unknowns].clone()).collect())
}

/// `Q_k = P_k / c` for `k = 0..=k_max`, solved exactly from
/// `L_m(P_n) = (n+m) P_{n-m} + (c/12) m(m²-1) δ_{n,m}`, `m = 1..=n`,
/// with `P_n` homogeneous of weight `n`.
pub fn neretin_recursion_exact(k_max: usize) -> Result<Vec<CoordinatePolynomial<Q>>> {
    let mut out: Vec<CoordinatePolynomial<Q>> = vec![CoordinatePolynomial::zero()];
    for n in 1..=k_max {
        let basis = monomials_of_weight(n);
        let images: Vec<Vec<CoordinatePolynomial<Q>>> = (1..=n)
            .map(|m| {
                basis
                    .iter()
                    .map(|b| kirillov_coordinate_operator(m, &CoordinatePolynomial::term(b.clone(), Q::one())))
                    .collect()
            })
            .collect();
        let mut rows = Vec::new();
        for m in 1..=n {
            let mut rhs = out[n - m].scale(&Q::from_integer(BigInt::from(n + m)));
            if m == n {
                let mi = m as i64;
                rhs.add_term(Monomial::new(), rational(mi * (mi * mi - 1), 12));
            }
            let mut keys: Vec<Monomial> = rhs.terms().keys().cloned().collect();
            for img in &images[m - 1] {
                keys.extend(img.terms().keys().cloned());
            }
            keys.sort();
            keys.dedup();
            for key in keys {
                let mut row: Vec<Q> = images[m - 1].iter().map(|img| img.coefficient(&key)).collect();
                row.push(rhs.coefficient(&key));
                rows.push(row);
            }
        }
        let x = solve_exact(rows, basis.len()).map_err(|reason| Error::RecursionInconsistent { k: n, reason })?;
        let mut p = CoordinatePolynomial::zero();
        for (b, v) in basis.into_iter().zip(x) {
            p.add_term(b, v);
        }
        out.push(p);
    }
    Ok(out)
}

/// `P_0 .. P_{k_max}` at central charge `charge`.
pub fn neretin_recursion(k_max: usize, charge: f64) -> Result<Vec<CoordinatePolynomial<Complex64>>> {
    let c = Complex64::new(charge, 0.0);
    Ok(neretin_recursion_exact(k_max)?.iter().map(|q| q.to_complex().scale(&c)).collect())
}

/// `Σ P_k ζ^k = (c ζ²/12) S_f(ζ)` for the normalized map `f/a_1`.
pub fn neretin_generatrix(f: &UnivalentCoefficients, charge: f64) -> Result<TruncatedSeries> {
    if f.order() < 5 {
        return Err(Error::InvalidArgument(format!("generatrix needs order at least 5, got {}", f.order())));
    }
    Ok(f.normalized().to_series().schwarzian()?.shift(2).scale_real(charge / 12.0))
}

/// `(Ψ, ν)_f = ∫ e^{2iθ} ν(e^{iθ}) S_f(e^{iθ}) dθ` by the trapezoid rule.
pub fn psi_pairing(f: &UnivalentCoefficients, nu: &CircleVectorField) -> Result<Complex64> {
    if f.order() < 5 {
        return Err(Error::InvalidArgument(format!("Ψ pairing needs order at least 5, got {}", f.order())));
    }
    let m = (4 * f.order()).max(4 * nu.k_max()).max(64);
    let angles = uniform_angles(m);
    let mut re = Vec::with_capacity(m);
    let mut im = Vec::with_capacity(m);
    for &theta in &angles {
        let e = Complex64::from_polar(1.0, theta);
        let [d1, d2, d3] = f.derivatives_at(e);
        if d1.norm() < f64::MIN_POSITIVE {
            return Err(Error::BoundaryDegeneracy { t: f64::NAN, min_abs_derivative: 0.0 });
        }
        let h = d2 / d1;
        let v = e * e * nu.evaluate(e) * (d3 / d1 - h * h * 1.5);
        re.push(v.re);
        im.push(v.im);
    }
    Ok(Complex64::new(periodic_trapezoid(&re), periodic_trapezoid(&im)))
}

/// `(|c_2|, |c_3 - c_2²|, P_2/c, P_3/c)` of `f/a_1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BieberbachFunctionals {
    pub c2_abs: f64,
    pub c3_minus_c2_sq_abs: f64,
    pub p2_over_c: Complex64,
    pub p3_over_c: Complex64,
}

pub fn bieberbach_functionals(f: &UnivalentCoefficients) -> BieberbachFunctionals {
    let (c2, c3, c4) = (f.c(2), f.c(3), f.c(4));
    BieberbachFunctionals {
        c2_abs: c2.norm(),
        c3_minus_c2_sq_abs: (c3 - c2 * c2).norm(),
        p2_over_c: (c3 - c2 * c2) * 0.5,
        p3_over_c: (c4 - c2 * c3 * 2.0 + c2 * c2 * c2) * 2.0,
    }
}
