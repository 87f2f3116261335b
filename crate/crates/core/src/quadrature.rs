//! Quadrature rules: Gauss-Legendre on intervals and the periodic trapezoid rule.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule; nodes from Newton iteration on `P_n` started at the
    /// Chebyshev-like guesses `cos(π(i - 1/4)/(n + 1/2))`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Composite rule with `panels` equal panels on `[a, b]`; returns
    /// `(abscissa, weight)` pairs.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let width = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let lo = a + p as f64 * width;
            let half = 0.5 * width;
            let mid = lo + half;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, half * w));
            }
        }
        out
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Trapezoid rule for a `2π`-periodic integrand sampled on `M` uniform
/// points: `(2π/M) Σ f(θ_j)`.
pub fn periodic_trapezoid(samples: &[f64]) -> f64 {
    2.0 * PI * samples.iter().sum::<f64>() / samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_integrate_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 64] {
            let gl = GaussLegendre::new(n);
            assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            // degree 2n - 1 is exact
            let deg = 2 * n - 1;
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let got = gl.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - exact).abs() < 1e-13, "n={n}");
            let even = 2 * n - 2;
            let got = gl.integrate(0.0, 1.0, |x| x.powi(even as i32));
            assert!((got - 1.0 / (even as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn composite_handles_log_singular_integrand() {
        let gl = GaussLegendre::new(16);
        let s: f64 = gl.composite(0.0, 1.0, 32).iter().map(|(x, w)| w * x.ln()).sum();
        assert!((s + 1.0).abs() < 1e-4);
    }

    #[test]
    fn trapezoid_is_spectral_for_trig_polynomials() {
        let m = 16;
        let samples: Vec<f64> = (0..m)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / m as f64;
                (2.0 + t.cos()).powi(2)
            })
            .collect();
        // ∫ (2 + cos)^2 = 2π (4 + 1/2)
        assert!((periodic_trapezoid(&samples) - 9.0 * PI).abs() < 1e-12);
    }
}
