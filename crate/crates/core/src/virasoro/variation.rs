//! Goluzin-Schiffer variations `L_ν[f]` of a normalized map.
//!
//! Three evaluations are provided: the contour integral, the printed closed
//! forms for `ν_k = -i e^{ikθ}` with `k ≥ -2`, and a residue expansion
//! valid for every mode, in which the pole at `w = 0` is resolved by series
//! division:
//!
//! `L_k[f] = ζ^{1+k} f' - Σ_{j=0}^{|k|} α_j f^{1-j}`,
//! `α_j = [w^{|k|}] (w f'/f)² f^j` (the sum is absent for `k ≥ 1`).

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::field::CircleVectorField;
use crate::error::{Error, Result};
use crate::series::{uniform_angles, TruncatedSeries, UnivalentCoefficients};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Trapezoid rule on `|w| = radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSettings {
    pub radius: f64,
    pub nodes: usize,
}

impl Default for ContourSettings {
    fn default() -> Self {
        Self { radius: 0.9, nodes: 1024 }
    }
}

impl ContourSettings {
    /// Points farther out than this lose spectral accuracy (`(|ζ|/r)^M > e^{-32}`).
    pub fn max_sample_radius(&self) -> f64 {
        self.radius * (1.0 - 32.0 / self.nodes as f64)
    }
}

fn winding_number(values: &[Complex64]) -> i64 {
    let mut total = 0.0;
    for j in 0..values.len() {
        let next = values[(j + 1) % values.len()];
        total += (next / values[j]).arg();
    }
    (total / (2.0 * PI)).round() as i64
}

/// `L_ν[f](ζ) = -(f(ζ)²/2πi) ∫_0^{2π} (w f'(w)/f(w))² ν(w)/(f(w) - f(ζ)) dθ`
/// on `w = r e^{iθ}`.
///
/// Injectivity of `f` on the contour is checked by requiring winding
/// number one of `f(w) - f(ζ)` around zero for every sample.
pub fn goluzin_schiffer(
    f: &UnivalentCoefficients,
    nu: &CircleVectorField,
    zetas: &[Complex64],
    settings: &ContourSettings,
) -> Result<Vec<Complex64>> {
    let r = settings.radius;
    if !(r > 0.0 && r < 1.0) || settings.nodes < 16 {
        return Err(Error::InvalidArgument(format!(
            "contour needs radius in (0, 1) and at least 16 nodes, got r = {r}, M = {}",
            settings.nodes
        )));
    }
    let ws: Vec<Complex64> = uniform_angles(settings.nodes).iter().map(|&t| Complex64::from_polar(r, t)).collect();
    let fw: Vec<Complex64> = ws.iter().map(|&w| f.evaluate(w)).collect();
    if winding_number(&fw) != 1 {
        return Err(Error::NotInjectiveOnContour { radius: r });
    }
    let kernel: Vec<Complex64> = ws
        .iter()
        .zip(&fw)
        .map(|(&w, &v)| {
            let g = w * f.derivative_at(w) / v;
            g * g * nu.evaluate(w)
        })
        .collect();
    let limit = settings.max_sample_radius();
    zetas
        .iter()
        .map(|&zeta| {
            if zeta.norm() > limit {
                return Err(Error::TooCloseToContour { point: zeta.norm(), radius: r });
            }
            let fz = f.evaluate(zeta);
            let shifted: Vec<Complex64> = fw.iter().map(|v| v - fz).collect();
            if winding_number(&shifted) != 1 {
                return Err(Error::NotInjectiveOnContour { radius: r });
            }
            let sum: Complex64 = kernel.iter().zip(&shifted).map(|(k, d)| k / d).sum();
            Ok(-fz * fz * sum / (I * settings.nodes as f64))
        })
        .collect()
}

/// Printed closed forms for `ν_k = -i e^{ikθ}`, `k ≥ -2`, of a map with
/// `a_1 = 1`; `None` for `k < -2`.
pub fn closed_form_variation(k: i64, f: &UnivalentCoefficients, zeta: Complex64) -> Option<Complex64> {
    let fz = f.evaluate(zeta);
    let d = f.derivative_at(zeta);
    let (c2, c3) = (f.c(2), f.c(3));
    let one = Complex64::new(1.0, 0.0);
    match k {
        0 => Some(zeta * d - fz),
        k if k >= 1 => Some(zeta.powi(1 + k as i32) * d),
        -1 => Some(d - one - c2 * fz * 2.0),
        -2 => Some(d / zeta - fz.inv() - c2 * 3.0 + (c2 * c2 - c3 * 4.0) * fz),
        _ => None,
    }
}

fn map_series(a: &[Complex64]) -> TruncatedSeries {
    let mut c = vec![Complex64::zero()];
    c.extend_from_slice(a);
    TruncatedSeries::from_coeffs(a.len(), &c)
}

/// `α_j = [w^{|k|}] (w f'/f)² f^j` for `j = 0..=|k|`.
fn residue_weights(a: &[Complex64], k: i64) -> Result<Vec<Complex64>> {
    let depth = k.unsigned_abs() as usize;
    if depth >= a.len() {
        return Err(Error::InvalidArgument(format!(
            "mode {k} needs truncation order above {depth}, got {}",
            a.len()
        )));
    }
    let f = map_series(a);
    let d = f.differentiate();
    let g = TruncatedSeries::identity(a.len()).mul(&d)?.div(&f)?;
    let mut acc = g.mul(&g)?;
    let mut out = Vec::with_capacity(depth + 1);
    for _ in 0..=depth {
        out.push(acc.coeff(depth as i32));
        acc = acc.mul(&f)?;
    }
    Ok(out)
}

/// Residue evaluation of `L_ν[f](ζ)`, valid for every mode of `ν`.
pub fn variation_residue(f: &UnivalentCoefficients, nu: &CircleVectorField, zetas: &[Complex64]) -> Result<Vec<Complex64>> {
    let kk = nu.k_max() as i64;
    let mut weights = Vec::new();
    for k in -kk..=kk {
        let c = nu.mode(k);
        if c.is_zero() {
            continue;
        }
        // ν̂_k e^{ikθ} = (i ν̂_k) ν_k
        let alpha = if k < 0 { residue_weights(f.coefficients(), k)? } else if k == 0 { vec![Complex64::new(1.0, 0.0)] } else { Vec::new() };
        weights.push((k, c * I, alpha));
    }
    Ok(zetas
        .iter()
        .map(|&zeta| {
            let fz = f.evaluate(zeta);
            let d = f.derivative_at(zeta);
            weights
                .iter()
                .map(|(k, scale, alpha)| {
                    let mut v = zeta.powi(1 + *k as i32) * d;
                    for (j, a) in alpha.iter().enumerate() {
                        v -= a * fz.powi(1 - j as i32);
                    }
                    scale * v
                })
                .sum()
        })
        .collect())
}

/// Coefficients `1..=N` of `L_ν[f]` as a power series, for `f` given by
/// `a_1 .. a_N` (not necessarily with real `a_1`).
pub fn variation_coefficients(a: &[Complex64], nu: &CircleVectorField) -> Result<Vec<Complex64>> {
    let n = a.len();
    let f = map_series(a);
    let d = f.differentiate();
    let mut total = TruncatedSeries::zeros(n, -(nu.k_max() as i32) - 1);
    let kk = nu.k_max() as i64;
    for k in -kk..=kk {
        let c = nu.mode(k);
        if c.is_zero() {
            continue;
        }
        let mut term = d.shift(1 + k as i32);
        if k <= 0 {
            let alpha = if k == 0 { vec![Complex64::new(1.0, 0.0)] } else { residue_weights(a, k)? };
            let inv = f.reciprocal()?;
            for (j, w) in alpha.iter().enumerate() {
                let power = if j == 0 { f.clone() } else if j == 1 { TruncatedSeries::one(n) } else { inv.powi(j as u32 - 1)? };
                term = term.sub(&power.scale(*w))?;
            }
        }
        total = total.add(&term.scale(c * I))?;
    }
    Ok((1..=n as i32).map(|k| total.coeff(k)).collect())
}

/// Vector-field bracket `D_X Y - D_Y X` of the variation fields
/// `X = L_{ν₁}`, `Y = L_{ν₂}` at `a`, by central differences with step `eps`.
///
/// Equals `-L_{[ν₁, ν₂]}` up to `O(eps²)` on coefficients unaffected by
/// truncation: the lift is an anti-homomorphism.
pub fn variation_commutator(a: &[Complex64], nu1: &CircleVectorField, nu2: &CircleVectorField, eps: f64) -> Result<Vec<Complex64>> {
    let x = variation_coefficients(a, nu1)?;
    let y = variation_coefficients(a, nu2)?;
    let directional = |field: &CircleVectorField, dir: &[Complex64]| -> Result<Vec<Complex64>> {
        let plus: Vec<Complex64> = a.iter().zip(dir).map(|(c, d)| c + d * eps).collect();
        let minus: Vec<Complex64> = a.iter().zip(dir).map(|(c, d)| c - d * eps).collect();
        let fp = variation_coefficients(&plus, field)?;
        let fm = variation_coefficients(&minus, field)?;
        Ok(fp.iter().zip(&fm).map(|(p, m)| (p - m) / (2.0 * eps)).collect())
    };
    let dy_x = directional(nu1, &y)?;
    let dx_y = directional(nu2, &x)?;
    Ok(dx_y.iter().zip(&dy_x).map(|(p, q)| p - q).collect())
}

#[cfg(test)]
mod tests {
    use super::super::field::witt_bracket;
    use super::*;

    fn test_map() -> UnivalentCoefficients {
        UnivalentCoefficients::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.2, 0.05),
            Complex64::new(-0.05, 0.02),
            Complex64::new(0.01, -0.02),
            Complex64::new(0.004, 0.0),
        ])
        .unwrap()
    }

    fn samples() -> Vec<Complex64> {
        (0..20)
            .map(|j| Complex64::from_polar(0.1 + 0.03 * j as f64, 0.7 * j as f64))
            .collect()
    }

    #[test]
    fn contour_matches_closed_forms() {
        let f = test_map();
        let zs = samples();
        for k in -2..=3 {
            let contour = goluzin_schiffer(&f, &CircleVectorField::nu(k), &zs, &ContourSettings::default()).unwrap();
            for (z, v) in zs.iter().zip(&contour) {
                let exact = closed_form_variation(k, &f, *z).unwrap();
                assert!((v - exact).norm() < 1e-8, "k = {k}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn koebe_l0() {
        let f = UnivalentCoefficients::koebe(40);
        for z in [Complex64::new(0.2, 0.1), Complex64::new(-0.3, 0.0)] {
            let one = Complex64::new(1.0, 0.0);
            let exact = z * z * 2.0 / (one - z).powi(3);
            assert!((closed_form_variation(0, &f, z).unwrap() - exact).norm() < 1e-9);
        }
    }

    #[test]
    fn residue_route_matches_contour_for_deep_modes() {
        let f = test_map().to_series().retruncate(12);
        let f = UnivalentCoefficients::from_series(&f).unwrap();
        let zs = &samples()[..8];
        for k in [-4, -3, -2, -1, 0, 2] {
            let nu = CircleVectorField::nu(k);
            let a = goluzin_schiffer(&f, &nu, zs, &ContourSettings::default()).unwrap();
            let b = variation_residue(&f, &nu, zs).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-8, "k = {k}");
            }
        }
    }

    #[test]
    fn injectivity_and_distance_guards() {
        let koebe = UnivalentCoefficients::koebe(16);
        let r = goluzin_schiffer(&koebe, &CircleVectorField::nu(0), &[Complex64::new(0.1, 0.0)], &ContourSettings::default());
        assert!(matches!(r, Err(Error::NotInjectiveOnContour { .. })));
        let r = goluzin_schiffer(&test_map(), &CircleVectorField::nu(0), &[Complex64::new(0.89, 0.0)], &ContourSettings::default());
        assert!(matches!(r, Err(Error::TooCloseToContour { .. })));
    }

    #[test]
    fn series_coefficients_match_pointwise() {
        let f = UnivalentCoefficients::from_series(&test_map().to_series().retruncate(14)).unwrap();
        let z = Complex64::new(0.05, 0.03);
        for k in [-2, -1, 0, 1, 3] {
            let nu = CircleVectorField::nu(k);
            let coeffs = variation_coefficients(f.coefficients(), &nu).unwrap();
            let from_series: Complex64 = coeffs.iter().enumerate().map(|(i, c)| c * z.powi(i as i32 + 1)).sum();
            let direct = variation_residue(&f, &nu, &[z]).unwrap()[0];
            assert!((from_series - direct).norm() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn commutator_closes_on_bracket() {
        let a: Vec<Complex64> = test_map().to_series().retruncate(16).coeffs()[1..].to_vec();
        let check = 16 - 6;
        for (m, n) in [(1, -1), (2, -1), (1, 2), (-2, 1), (0, -2)] {
            let (n1, n2) = (CircleVectorField::nu(m), CircleVectorField::nu(n));
            let comm = variation_commutator(&a, &n1, &n2, 1e-5).unwrap();
            let bracket = variation_coefficients(&a, &witt_bracket(&n1, &n2)).unwrap();
            for i in 0..check {
                assert!((comm[i] + bracket[i]).norm() < 1e-7, "({m},{n}) coeff {}: {} vs {}", i + 1, comm[i], bracket[i]);
            }
        }
    }
}
