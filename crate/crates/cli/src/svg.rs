//! Minimal SVG line and filled-contour plots.

use std::fmt::Write;

use crate::error::CliError;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    ImpedanceCurve,
    CouplingContour,
    RadialPower,
    RadialTemperature,
    AxialTemperature,
    GhsvVsBeta,
    EfficiencyVsBeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: &str, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.to_string(), points, dashed: false }
    }
}

/// Vertical reference line.
#[derive(Debug, Clone)]
pub struct Marker {
    pub x: f64,
    pub label: String,
}

/// Values on a rectangular `(x, y)` lattice; `values[j][i]` sits at `(xs[i], ys[j])`.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub masked: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    scale: Scale,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, scale: Scale) -> Option<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return None;
        }
        match scale {
            Scale::Log => {
                let (a, b) = (lo.log10().floor(), hi.log10().ceil());
                let b = if b <= a { a + 1.0 } else { b };
                Some(Self { lo: 10f64.powf(a), hi: 10f64.powf(b), scale })
            }
            Scale::Linear => {
                let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
                Some(Self { lo: lo - pad, hi: hi + pad, scale })
            }
        }
    }

    /// Position in `[0, 1]`.
    fn unit(&self, v: f64) -> f64 {
        match self.scale {
            Scale::Linear => (v - self.lo) / (self.hi - self.lo),
            Scale::Log => (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10()),
        }
    }

    fn ticks(&self) -> Vec<f64> {
        let mut t = self.candidate_ticks();
        t.retain(|v| (-1e-9..=1.0 + 1e-9).contains(&self.unit(*v)));
        t
    }

    fn candidate_ticks(&self) -> Vec<f64> {
        match self.scale {
            Scale::Log => {
                let (a, b) = (self.lo.log10().round() as i32, self.hi.log10().round() as i32);
                let step = ((b - a) / 8).max(1);
                (a..=b).step_by(step as usize).map(|k| 10f64.powi(k)).collect()
            }
            Scale::Linear => {
                let raw = (self.hi - self.lo) / 6.0;
                let mag = 10f64.powf(raw.log10().floor());
                let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
                let first = (self.lo / step).ceil() as i64;
                let last = (self.hi / step).floor() as i64;
                (first..=last).map(|k| k as f64 * step).collect()
            }
        }
    }
}

fn tick_label(v: f64, scale: Scale) -> String {
    if scale == Scale::Log {
        let k = v.log10().round() as i32;
        return if (-2..=3).contains(&k) { format!("{}", 10f64.powi(k)) } else { format!("1e{k}") };
    }
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn usable(p: (f64, f64), spec: &PlotSpec) -> bool {
    let ok = |v: f64, s: Scale| v.is_finite() && (s == Scale::Linear || v > 0.0);
    ok(p.0, spec.x_scale) && ok(p.1, spec.y_scale)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x: Axis,
    y: Axis,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + self.x.unit(x) * (WIDTH - LEFT - RIGHT)
    }
    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - self.y.unit(y) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(out: &mut String, spec: &PlotSpec) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    out.push('\n');
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(&spec.title)
    );
}

fn axes(out: &mut String, frame: &Frame, spec: &PlotSpec) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for t in frame.x.ticks() {
        let x = frame.px(t);
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 19.0,
            tick_label(t, frame.x.scale)
        );
    }
    for t in frame.y.ticks() {
        let y = frame.py(t);
        let _ = writeln!(out, r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            y + 4.0,
            tick_label(t, frame.y.scale)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(&spec.y_label)
    );
}

/// Line plot of one or more series.
pub fn line_plot(spec: &PlotSpec, series: &[Series], markers: &[Marker]) -> Result<String, CliError> {
    if spec.kind == PlotKind::CouplingContour {
        return Err(CliError::Config("a coupling contour needs lattice data, not series".into()));
    }
    let drawable: Vec<Vec<(f64, f64)>> =
        series.iter().map(|s| s.points.iter().copied().filter(|p| usable(*p, spec)).collect()).collect();
    if !drawable.iter().any(|p| p.len() >= 2) {
        return Err(CliError::Config(format!("{:?} plot needs a series with at least two plottable points", spec.kind)));
    }
    let all = || drawable.iter().flatten();
    let frame = Frame {
        x: Axis::fit(all().map(|p| p.0), spec.x_scale).expect("points exist"),
        y: Axis::fit(all().map(|p| p.1), spec.y_scale).expect("points exist"),
    };
    let mut out = String::new();
    open(&mut out, spec);
    axes(&mut out, &frame, spec);
    for m in markers.iter().filter(|m| usable((m.x, 1.0), spec)) {
        let u = frame.x.unit(m.x);
        if !(0.0..=1.0).contains(&u) {
            continue;
        }
        let x = frame.px(m.x);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{}" stroke="gray" stroke-dasharray="2,3"/>"#,
            HEIGHT - BOTTOM
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{}" fill="gray">{}</text>"#, x + 4.0, TOP + 14.0, escape(&m.label));
    }
    for (k, (s, pts)) in series.iter().zip(&drawable).enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
        if pts.len() >= 2 {
            let path: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", frame.px(p.0), frame.py(p.1))).collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"{dash}/>"#,
                path.join(" ")
            );
        }
        if pts.len() <= 40 {
            for p in pts {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#,
                    frame.px(p.0),
                    frame.py(p.1)
                );
            }
        }
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"{dash}/>"#,
            lx + 25.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn band_colour(level: usize, n_levels: usize) -> String {
    // Blue to yellow ramp.
    let t = if n_levels <= 1 { 1.0 } else { level as f64 / (n_levels - 1) as f64 };
    let lerp = |a: f64, b: f64| (a + t * (b - a)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(49.0, 253.0), lerp(54.0, 231.0), lerp(149.0, 37.0))
}

fn edges(c: &[f64], scale: Scale) -> Vec<f64> {
    let mid = |a: f64, b: f64| if scale == Scale::Log { (a * b).sqrt() } else { 0.5 * (a + b) };
    let n = c.len();
    let mut e = Vec::with_capacity(n + 1);
    if n == 1 {
        return vec![c[0], c[0]];
    }
    let first = if scale == Scale::Log { c[0] * c[0] / mid(c[0], c[1]) } else { 2.0 * c[0] - mid(c[0], c[1]) };
    e.push(first);
    for i in 0..n - 1 {
        e.push(mid(c[i], c[i + 1]));
    }
    let last = if scale == Scale::Log { c[n - 1] * c[n - 1] / e[n - 1] } else { 2.0 * c[n - 1] - e[n - 1] };
    e.push(last);
    e
}

/// Filled contour: each cell is coloured by the band of `levels` its value
/// falls in; masked cells are hatched.
pub fn contour_plot(spec: &PlotSpec, lattice: &Lattice, levels: &[f64]) -> Result<String, CliError> {
    if spec.kind != PlotKind::CouplingContour {
        return Err(CliError::Config(format!("{:?} is not a contour plot kind", spec.kind)));
    }
    let (nx, ny) = (lattice.xs.len(), lattice.ys.len());
    let shape_ok = nx >= 2
        && ny >= 2
        && lattice.values.len() == ny
        && lattice.masked.len() == ny
        && lattice.values.iter().all(|r| r.len() == nx)
        && lattice.masked.iter().all(|r| r.len() == nx);
    if !shape_ok {
        return Err(CliError::Config("contour plot needs at least a 2x2 lattice with matching value and mask shapes".into()));
    }
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config("contour levels must be non-empty and increasing".into()));
    }
    let xe = edges(&lattice.xs, spec.x_scale);
    let ye = edges(&lattice.ys, spec.y_scale);
    if xe.iter().chain(&ye).any(|v| !usable((*v, 1.0), spec) || !usable((1.0, *v), spec)) {
        return Err(CliError::Config("lattice coordinates must be positive on log axes".into()));
    }
    let fit = |e: &[f64], scale| Axis { lo: e[0], hi: e[e.len() - 1], scale };
    let frame = Frame { x: fit(&xe, spec.x_scale), y: fit(&ye, spec.y_scale) };

    let mut out = String::new();
    open(&mut out, spec);
    out.push_str(concat!(
        r#"<defs><pattern id="hatch" width="8" height="8" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">"#,
        r#"<rect width="8" height="8" fill="white" fill-opacity="0.55"/><line x1="0" y1="0" x2="0" y2="8" stroke="black" stroke-width="1.5"/></pattern></defs>"#,
        "\n"
    ));
    let n_bands = levels.len() + 1;
    for j in 0..ny {
        for i in 0..nx {
            let (xa, xb) = (frame.px(xe[i]), frame.px(xe[i + 1]));
            let (ya, yb) = (frame.py(ye[j + 1]), frame.py(ye[j]));
            let v = lattice.values[j][i];
            let fill = if v.is_finite() {
                band_colour(levels.iter().filter(|l| v >= **l).count(), n_bands)
            } else {
                "#dddddd".to_string()
            };
            let _ = writeln!(
                out,
                r#"<rect x="{xa:.2}" y="{ya:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="{fill}" stroke-width="0.5"/>"#,
                xb - xa,
                yb - ya
            );
            if lattice.masked[j][i] {
                let _ = writeln!(
                    out,
                    r#"<rect x="{xa:.2}" y="{ya:.2}" width="{:.2}" height="{:.2}" fill="url(#hatch)"/>"#,
                    xb - xa,
                    yb - ya
                );
            }
        }
    }
    axes(&mut out, &frame, spec);
    let lx = WIDTH - RIGHT + 15.0;
    for b in 0..n_bands {
        let label = match b {
            0 => format!("< {}", levels[0]),
            b if b == n_bands - 1 => format!(">= {}", levels[b - 1]),
            b => format!("{} to {}", levels[b - 1], levels[b]),
        };
        let y = TOP + 18.0 * (n_bands - 1 - b) as f64;
        let _ = writeln!(out, r#"<rect x="{lx}" y="{y}" width="16" height="14" fill="{}"/>"#, band_colour(b, n_bands));
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 22.0, y + 11.0, escape(&label));
    }
    let y = TOP + 18.0 * n_bands as f64 + 6.0;
    let _ = writeln!(out, r#"<rect x="{lx}" y="{y}" width="16" height="14" fill="url(#hatch)" stroke="black"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="{}">above SRF</text>"#, lx + 22.0, y + 11.0);
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: PlotKind, x: Scale, y: Scale) -> PlotSpec {
        PlotSpec { kind, title: "t".into(), x_label: "x".into(), y_label: "y".into(), x_scale: x, y_scale: y }
    }

    #[test]
    fn line_plot_draws_each_series() {
        let s = [
            Series::new("a", vec![(1.0, 1.0), (10.0, 100.0)]),
            Series { dashed: true, ..Series::new("b & c", vec![(1.0, 2.0), (10.0, 20.0)]) },
        ];
        let svg = line_plot(&spec(PlotKind::ImpedanceCurve, Scale::Log, Scale::Log), &s, &[]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b &amp; c"));
        assert!(svg.contains("stroke-dasharray"));
    }

    #[test]
    fn unplottable_points_are_dropped() {
        let s = [Series::new("a", vec![(1.0, 1.0), (2.0, f64::NAN), (3.0, -1.0), (4.0, 2.0)])];
        let svg = line_plot(&spec(PlotKind::GhsvVsBeta, Scale::Linear, Scale::Log), &s, &[]).unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
    }

    #[test]
    fn required_data_is_enforced() {
        let one = [Series::new("a", vec![(1.0, 1.0)])];
        assert!(line_plot(&spec(PlotKind::RadialTemperature, Scale::Linear, Scale::Linear), &one, &[]).is_err());
        let two = [Series::new("a", vec![(1.0, 1.0), (2.0, 2.0)])];
        assert!(line_plot(&spec(PlotKind::CouplingContour, Scale::Linear, Scale::Linear), &two, &[]).is_err());
        let lattice = Lattice { xs: vec![1.0], ys: vec![1.0], values: vec![vec![0.5]], masked: vec![vec![false]] };
        assert!(contour_plot(&spec(PlotKind::CouplingContour, Scale::Log, Scale::Log), &lattice, &[0.5]).is_err());
    }

    #[test]
    fn marker_is_drawn_inside_range() {
        let s = [Series::new("a", vec![(1e5, 1.0), (1e7, 2.0)])];
        let m = [Marker { x: 6.78e6, label: "f_ideal".into() }, Marker { x: 1e9, label: "outside".into() }];
        let svg = line_plot(&spec(PlotKind::ImpedanceCurve, Scale::Log, Scale::Log), &s, &m).unwrap();
        assert!(svg.contains("f_ideal"));
        assert!(!svg.contains("outside"));
    }

    #[test]
    fn contour_hatches_masked_cells() {
        let lattice = Lattice {
            xs: vec![1.0, 2.0, 4.0],
            ys: vec![1e4, 1e5],
            values: vec![vec![0.1, 0.5, 0.96], vec![0.2, f64::NAN, 0.99]],
            masked: vec![vec![false, false, false], vec![false, true, true]],
        };
        let svg = contour_plot(&spec(PlotKind::CouplingContour, Scale::Log, Scale::Log), &lattice, &[0.5, 0.9, 0.95]).unwrap();
        // Two masked cells plus the legend swatch.
        assert_eq!(svg.matches("url(#hatch)").count(), 3);
        assert!(svg.contains("&lt; 0.5") && !svg.contains("< 0.5"));
    }

    #[test]
    fn log_ticks_are_decades() {
        let a = Axis::fit([3.0, 4000.0].into_iter(), Scale::Log).unwrap();
        assert_eq!(a.ticks(), vec![1.0, 10.0, 100.0, 1000.0, 10000.0]);
        let clipped = Axis { lo: 0.9, hi: 70.0, scale: Scale::Log };
        assert_eq!(clipped.ticks(), vec![1.0, 10.0]);
        let l = Axis::fit([0.0, 1.0].into_iter(), Scale::Linear).unwrap();
        let t = l.ticks();
        assert_eq!(t.len(), 6);
        assert!(t[0] == 0.0 && (t[5] - 1.0).abs() < 1e-12);
    }
}
