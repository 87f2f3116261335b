//! SVG rendering of stored results and the nested-curve check.
//!
//! Everything here consumes numbers that were already computed; output is
//! byte-deterministic for identical input.

use std::fmt::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::evolution::ChainState;
use crate::io::EnergyRow;
use crate::series::uniform_angles;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

/// One polyline of a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

/// Cartesian line chart with labelled axes and a legend.
#[derive(Clone, Debug, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Equal scaling of both axes (for curves in the plane).
    pub equal_aspect: bool,
    /// Fixed data range `(x0, x1, y0, y1)`; fitted to the data when absent.
    pub bounds: Option<(f64, f64, f64, f64)>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (-1.0, 1.0);
    }
    let span = hi - lo;
    let pad = if span > 0.0 { 0.05 * span } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LineChart {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
            equal_aspect: false,
            bounds: None,
        }
    }

    pub fn with_series(mut self, series: Series) -> Self {
        self.series.push(series);
        self
    }

    fn frame(&self) -> Frame {
        if let Some((x0, x1, y0, y1)) = self.bounds {
            return self.fit(x0, x1, y0, y1);
        }
        let pts = self.series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        self.fit(x0, x1, y0, y1)
    }

    fn fit(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> Frame {
        let (mut x0, mut x1) = padded(x0, x1);
        let (mut y0, mut y1) = padded(y0, y1);
        if self.equal_aspect {
            let sx = (x1 - x0) / (WIDTH - 2.0 * MARGIN);
            let sy = (y1 - y0) / (HEIGHT - 2.0 * MARGIN);
            let s = sx.max(sy);
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            x0 = cx - 0.5 * s * (WIDTH - 2.0 * MARGIN);
            x1 = cx + 0.5 * s * (WIDTH - 2.0 * MARGIN);
            y0 = cy - 0.5 * s * (HEIGHT - 2.0 * MARGIN);
            y1 = cy + 0.5 * s * (HEIGHT - 2.0 * MARGIN);
        }
        Frame { x0, x1, y0, y1 }
    }

    fn render_body(&self, out: &mut String) {
        let fr = self.frame();
        let _ = writeln!(
            out,
            r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="24" text-anchor="middle" font-size="16">{}</text>"##,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            out,
            r##"<rect x="{l:.1}" y="{t:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444444"/>"##,
            r - l,
            b - t
        );
        for i in 0..=4 {
            let s = i as f64 / 4.0;
            let xv = fr.x0 + s * (fr.x1 - fr.x0);
            let yv = fr.y0 + s * (fr.y1 - fr.y0);
            let (xp, yp) = (fr.px(xv), fr.py(yv));
            let _ = writeln!(
                out,
                r##"<line x1="{xp:.2}" y1="{b:.1}" x2="{xp:.2}" y2="{:.1}" stroke="#444444"/><text x="{xp:.2}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"##,
                b + 5.0,
                b + 18.0,
                tick(xv)
            );
            let _ = writeln!(
                out,
                r##"<line x1="{:.1}" y1="{yp:.2}" x2="{l:.1}" y2="{yp:.2}" stroke="#444444"/><text x="{:.1}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"##,
                l - 5.0,
                l - 7.0,
                yp + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"##,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r##"<text x="14" y="{:.1}" text-anchor="middle" font-size="13" transform="rotate(-90 14 {:.1})">{}</text>"##,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let mut pts = String::new();
            for &(x, y) in s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                let _ = write!(pts, "{:.2},{:.2} ", fr.px(x), fr.py(y));
            }
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                out,
                r##"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"##,
                pts.trim_end()
            );
            let ly = t + 14.0 + 16.0 * i as f64;
            let _ = writeln!(
                out,
                r##"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"##,
                r - 150.0,
                r - 126.0,
                r - 120.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
    }

    pub fn render(&self) -> String {
        stack(std::slice::from_ref(self))
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// Charts stacked vertically in one document.
pub fn stack(charts: &[LineChart]) -> String {
    let mut out = String::new();
    let total = HEIGHT * charts.len() as f64;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{total}" viewBox="0 0 {WIDTH} {total}" font-family="sans-serif">"#
    );
    for (i, c) in charts.iter().enumerate() {
        let _ = writeln!(out, r#"<g transform="translate(0 {})">"#, HEIGHT * i as f64);
        c.render_body(&mut out);
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// `f(e^{iθ}, t)` on `samples` angles.
pub fn boundary_curve(state: &ChainState, samples: usize) -> Vec<Complex64> {
    uniform_angles(samples).iter().map(|&t| state.f.evaluate(Complex64::from_polar(1.0, t))).collect()
}

fn closed(curve: &[Complex64]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = curve.iter().map(|z| (z.re, z.im)).collect();
    if let Some(&p) = pts.first() {
        pts.push(p);
    }
    pts
}

/// All boundary curves of a chain in one frame.
pub fn boundary_curves_svg(states: &[ChainState], samples: usize) -> String {
    let mut chart = LineChart::new("boundary curves f(e^{iθ}, t)", "Re z", "Im z");
    chart.equal_aspect = true;
    for s in states {
        chart.series.push(Series::new(format!("t = {}", s.t), closed(&boundary_curve(s, samples))));
    }
    chart.render()
}

/// One frame per state, drawn on the view box of the last curve, which
/// encloses the others for a chain.
pub fn boundary_frames_svg(states: &[ChainState], samples: usize) -> Vec<String> {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    if let Some(last) = states.last() {
        for z in boundary_curve(last, samples) {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
    }
    states
        .iter()
        .map(|s| {
            let mut chart = LineChart::new(format!("f(e^{{iθ}}, t), t = {}", s.t), "Re z", "Im z");
            chart.equal_aspect = true;
            chart.bounds = Some((x0, x1, y0, y1));
            chart.with_series(Series::new(format!("t = {}", s.t), closed(&boundary_curve(s, samples)))).render()
        })
        .collect()
}

/// `S(t)` above and the `dS/dt` overlay (boundary formula and finite
/// difference) below.
pub fn energy_trace_svg(rows: &[EnergyRow]) -> String {
    let s = LineChart::new("logarithmic action", "t", "S(t)")
        .with_series(Series::new("S series", rows.iter().map(|r| (r.t, r.s_series)).collect()))
        .with_series(Series::new("S quadrature", rows.iter().map(|r| (r.t, r.s_quadrature)).collect()).dashed());
    let d = LineChart::new("action derivative", "t", "dS/dt")
        .with_series(Series::new("boundary formula", rows.iter().map(|r| (r.t, r.rhs)).collect()))
        .with_series(Series::new("finite difference", rows.iter().map(|r| (r.t, r.fd_dsdt)).collect()).dashed());
    stack(&[s, d])
}

/// Angular profiles sampled at one or more times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub t: f64,
    pub angles: Vec<f64>,
    pub nu: Vec<f64>,
    pub kappa_v_n: Vec<f64>,
}

pub fn nu_profiles_svg(profiles: &[Profile]) -> String {
    let mut chart = LineChart::new("boundary density", "θ", "ν(θ)");
    for p in profiles {
        chart.series.push(Series::new(
            format!("t = {}", p.t),
            p.angles.iter().copied().zip(p.nu.iter().copied()).collect(),
        ));
    }
    chart.render()
}

pub fn kappa_vn_profiles_svg(profiles: &[Profile]) -> String {
    let mut chart = LineChart::new("curvature times normal velocity", "θ", "κ v_n");
    for p in profiles {
        chart.series.push(Series::new(
            format!("t = {}", p.t),
            p.angles.iter().copied().zip(p.kappa_v_n.iter().copied()).collect(),
        ));
    }
    chart.render()
}

/// Ray-casting point-in-polygon test.
pub fn point_in_polygon(p: Complex64, polygon: &[Complex64]) -> bool {
    let mut inside = false;
    let n = polygon.len();
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[(i + 1) % n]);
        if (a.im > p.im) != (b.im > p.im) {
            let x = a.re + (p.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if p.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Result of checking that each boundary curve lies inside every later one.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NestingReport {
    pub pairs_checked: usize,
    /// `(t_inner, t_outer, points outside)` for each failing pair.
    pub violations: Vec<(f64, f64, usize)>,
}

impl NestingReport {
    pub fn is_nested(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Subordination check on rendered curves: for `s < t` every sample of
/// `f(e^{iθ}, s)` must lie inside the polygon `f(e^{iθ}, t)`.
pub fn check_nesting(states: &[ChainState], samples: usize) -> NestingReport {
    let curves: Vec<Vec<Complex64>> = states.iter().map(|s| boundary_curve(s, samples)).collect();
    let mut report = NestingReport::default();
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            if states[j].t <= states[i].t {
                continue;
            }
            report.pairs_checked += 1;
            let outside = curves[i].iter().filter(|&&z| !point_in_polygon(z, &curves[j])).count();
            if outside > 0 {
                report.violations.push((states[i].t, states[j].t, outside));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::UnivalentCoefficients;

    #[test]
    fn point_in_polygon_unit_square() {
        let sq = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 1.0), Complex64::new(0.0, 1.0)];
        assert!(point_in_polygon(Complex64::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(Complex64::new(1.5, 0.5), &sq));
        assert!(!point_in_polygon(Complex64::new(0.5, -0.1), &sq));
    }

    #[test]
    fn radial_chain_is_nested_and_reversal_is_not() {
        let states: Vec<ChainState> = [0.0, 0.1, 0.5]
            .iter()
            .map(|&t| ChainState::new(t, UnivalentCoefficients::scaled_identity(8, t)))
            .collect();
        let report = check_nesting(&states, 64);
        assert_eq!(report.pairs_checked, 3);
        assert!(report.is_nested());

        let mut shrinking = states.clone();
        for (s, t) in shrinking.iter_mut().zip([0.0, 0.1, 0.5]) {
            s.f = UnivalentCoefficients::scaled_identity(8, -t);
        }
        assert_eq!(check_nesting(&shrinking, 64).violations.len(), 3);
    }

    #[test]
    fn rendering_is_deterministic_and_well_formed() {
        let states = vec![ChainState::identity(8), ChainState::new(0.5, UnivalentCoefficients::scaled_identity(8, 0.5))];
        let a = boundary_curves_svg(&states, 32);
        assert_eq!(a, boundary_curves_svg(&states, 32));
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<polyline").count(), 2);
        let frames = boundary_frames_svg(&states, 32);
        assert_eq!(frames.len(), 2);
        assert!(frames.iter().all(|f| f.matches("<polyline").count() == 1));
    }
}
