//! SVG rendering of a Stokes geometry.
//!
//! Conventions: black dots are ordinary turning points, red dots virtual
//! ones. Curves from ordinary points are black and solid, curves from virtual
//! points red and dashed; portions without Stokes phenomena are dotted, and
//! portions lying on a connection between two turning points are drawn as a
//! doubled red line.

use crate::geometry::StokesGeometry;
use crate::surface::TpKind;
use crate::symbol::Region;
use crate::Complex;
use std::collections::BTreeMap;
use std::fmt::Write;

/// Whether a curve portion coincides with a connection between turning points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OverlapClass {
    Single,
    Overlap,
}

impl OverlapClass {
    fn class(self) -> &'static str {
        match self {
            OverlapClass::Single => "single",
            OverlapClass::Overlap => "overlap",
        }
    }
}

/// Key of the line style map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StyleKey {
    /// Kind of the turning point the curve emanates from.
    pub source: TpKind,
    pub active: bool,
    pub overlap: OverlapClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DotStyle {
    pub fill: String,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineStyle {
    pub stroke: String,
    pub width: f64,
    /// `stroke-dasharray` value; `None` for a solid line.
    pub dash: Option<String>,
    /// Draw as two parallel strokes (a wide stroke with a background-colored
    /// core).
    pub doubled: bool,
}

/// Style map for every element kind. Lookups never fail: missing keys fall
/// back to a thin solid gray line or a gray dot.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    /// Width of the drawing in pixels; the height follows the region aspect.
    pub width: f64,
    pub margin: f64,
    pub background: String,
    pub axes: bool,
    pub dots: BTreeMap<TpKind, DotStyle>,
    pub lines: BTreeMap<StyleKey, LineStyle>,
}

const DOTTED: &str = "1.5 3";
const DASHED: &str = "6 4";

impl Default for RenderStyle {
    fn default() -> Self {
        let mut dots = BTreeMap::new();
        dots.insert(TpKind::Ordinary, DotStyle { fill: "black".into(), radius: 4.0 });
        dots.insert(TpKind::Virtual, DotStyle { fill: "red".into(), radius: 4.0 });
        let mut lines = BTreeMap::new();
        for source in [TpKind::Ordinary, TpKind::Virtual] {
            for active in [true, false] {
                for overlap in [OverlapClass::Single, OverlapClass::Overlap] {
                    let color = match (source, overlap) {
                        (_, OverlapClass::Overlap) | (TpKind::Virtual, _) => "red",
                        (TpKind::Ordinary, OverlapClass::Single) => "black",
                    };
                    let dash = match (active, source, overlap) {
                        (false, _, _) => Some(DOTTED.to_string()),
                        (true, TpKind::Virtual, OverlapClass::Single) => Some(DASHED.to_string()),
                        (true, _, _) => None,
                    };
                    let doubled = overlap == OverlapClass::Overlap;
                    let style = LineStyle {
                        stroke: color.into(),
                        width: if doubled { 4.0 } else { 1.5 },
                        dash,
                        doubled,
                    };
                    lines.insert(StyleKey { source, active, overlap }, style);
                }
            }
        }
        Self { width: 600.0, margin: 24.0, background: "white".into(), axes: true, dots, lines }
    }
}

impl RenderStyle {
    pub fn dot(&self, kind: TpKind) -> DotStyle {
        self.dots.get(&kind).cloned().unwrap_or(DotStyle { fill: "gray".into(), radius: 3.0 })
    }

    pub fn line(&self, key: StyleKey) -> LineStyle {
        self.lines
            .get(&key)
            .cloned()
            .unwrap_or(LineStyle { stroke: "gray".into(), width: 1.0, dash: None, doubled: false })
    }
}

/// Map from the region to pixel coordinates (y up).
struct Frame {
    region: Region,
    scale: f64,
    margin: f64,
    height: f64,
}

impl Frame {
    fn new(region: Region, style: &RenderStyle) -> Self {
        let scale = style.width / region.width();
        let height = region.height() * scale;
        Self { region, scale, margin: style.margin, height }
    }

    fn px(&self, z: Complex) -> (f64, f64) {
        (
            self.margin + (z.re - self.region.x0) * self.scale,
            self.margin + self.height - (z.im - self.region.y0) * self.scale,
        )
    }
}

/// Point at a polyline position (index plus fraction of the next segment).
fn point_at(points: &[Complex], pos: f64) -> Complex {
    let last = points.len() - 1;
    let pos = pos.clamp(0.0, last as f64);
    let i = (pos.floor() as usize).min(last);
    if i == last {
        return points[last];
    }
    let u = pos - i as f64;
    points[i] + (points[i + 1] - points[i]) * u
}

fn sub_polyline(points: &[Complex], from: f64, to: f64) -> Vec<Complex> {
    let mut out = vec![point_at(points, from)];
    let first = from.floor() as usize + 1;
    for (i, p) in points.iter().enumerate().skip(first) {
        if i as f64 >= to {
            break;
        }
        out.push(*p);
    }
    out.push(point_at(points, to));
    out
}

/// Position ranges of each curve that lie on a connection: from the source
/// point to the point of the curve closest to the reached turning point.
fn overlap_ranges(g: &StokesGeometry) -> Vec<Vec<(f64, f64)>> {
    let mut ranges = vec![Vec::new(); g.curves.len()];
    for d in &g.degeneracies {
        let (Some(curve), Some(tp)) = (g.curves.get(d.curve), g.turning_points.get(d.to)) else { continue };
        let Some(hit) = curve
            .points
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - tp.location).norm().total_cmp(&(b.1 - tp.location).norm()))
            .map(|(i, _)| i)
        else {
            continue;
        };
        let (a, b) = (curve.source_point.min(hit), curve.source_point.max(hit));
        if a < b {
            ranges[d.curve].push((a as f64, b as f64));
        }
    }
    ranges
}

fn fmt_points(frame: &Frame, pts: &[Complex]) -> String {
    let mut s = String::with_capacity(pts.len() * 16);
    for (i, p) in pts.iter().enumerate() {
        let (x, y) = frame.px(*p);
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

fn polyline(out: &mut String, frame: &Frame, pts: &[Complex], class: &str, style: &LineStyle, background: &str) {
    let dash = style.dash.as_ref().map(|d| format!(" stroke-dasharray=\"{d}\"")).unwrap_or_default();
    let points = fmt_points(frame, pts);
    let _ = writeln!(
        out,
        "<polyline class=\"{class}\" points=\"{points}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{dash}/>",
        style.stroke, style.width
    );
    if style.doubled {
        let _ = writeln!(
            out,
            "<polyline class=\"{class} core\" points=\"{points}\" fill=\"none\" stroke=\"{background}\" stroke-width=\"{}\"{dash}/>",
            style.width / 2.5
        );
    }
}

fn kind_name(k: TpKind) -> &'static str {
    match k {
        TpKind::Ordinary => "ordinary",
        TpKind::Virtual => "virtual",
    }
}

/// `theta` as a multiple of pi when it is a simple fraction, else decimal.
fn theta_label(theta: f64) -> String {
    let r = theta / std::f64::consts::PI;
    for den in 1..=24u32 {
        let num = (r * den as f64).round();
        if (r * den as f64 - num).abs() < 1e-9 {
            let num = num as i64;
            return match (num, den) {
                (0, _) => "0".into(),
                (1, 1) => "π".into(),
                (-1, 1) => "-π".into(),
                (n, 1) => format!("{n}π"),
                (1, d) => format!("π/{d}"),
                (-1, d) => format!("-π/{d}"),
                (n, d) => format!("{n}π/{d}"),
            };
        }
    }
    format!("{theta:.6}")
}

/// Renders `g` as a standalone SVG document.
///
/// Each turning point is one `<circle>`; each curve is one `<g class="curve">`
/// holding polylines for its runs of uniform activity and overlap class.
pub fn render_svg(g: &StokesGeometry, style: &RenderStyle) -> String {
    let frame = Frame::new(g.config.region, style);
    let (w, h) = (style.width + 2.0 * style.margin, frame.height + 2.0 * style.margin);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">"
    );
    let _ = writeln!(out, "<rect class=\"background\" width=\"100%\" height=\"100%\" fill=\"{}\"/>", style.background);

    if style.axes {
        let r = g.config.region;
        let _ = writeln!(out, "<g class=\"axes\" stroke=\"#999\" stroke-width=\"0.75\">");
        if r.y0 <= 0.0 && 0.0 <= r.y1 {
            let (x0, y) = frame.px(Complex::new(r.x0, 0.0));
            let (x1, _) = frame.px(Complex::new(r.x1, 0.0));
            let _ = writeln!(out, "<line class=\"axis real\" x1=\"{x0:.2}\" y1=\"{y:.2}\" x2=\"{x1:.2}\" y2=\"{y:.2}\"/>");
        }
        if r.x0 <= 0.0 && 0.0 <= r.x1 {
            let (x, y0) = frame.px(Complex::new(0.0, r.y0));
            let (_, y1) = frame.px(Complex::new(0.0, r.y1));
            let _ = writeln!(out, "<line class=\"axis imag\" x1=\"{x:.2}\" y1=\"{y0:.2}\" x2=\"{x:.2}\" y2=\"{y1:.2}\"/>");
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(
            out,
            "<text class=\"theta\" x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\">arg η = {}</text>",
            style.margin,
            style.margin - 6.0,
            theta_label(g.theta)
        );
    }

    let overlaps = overlap_ranges(g);
    for (ci, curve) in g.curves.iter().enumerate() {
        let kind = curve.source.kind;
        let _ = writeln!(out, "<g class=\"curve {}\" data-index=\"{ci}\" data-source=\"{}\">", kind_name(kind), curve.source_index);
        if curve.points.len() >= 2 {
            let end = curve.end_position();
            let mut cuts: Vec<f64> = vec![0.0, end];
            for s in &curve.activity {
                cuts.extend([s.from, s.to]);
            }
            for (a, b) in &overlaps[ci] {
                cuts.extend([*a, *b]);
            }
            let mut cuts: Vec<f64> = cuts.into_iter().map(|c| c.clamp(0.0, end)).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

            // merge consecutive pieces with equal style
            let mut runs: Vec<(f64, f64, StyleKey)> = Vec::new();
            for w in cuts.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let overlap = if overlaps[ci].iter().any(|(a, b)| *a <= mid && mid <= *b) {
                    OverlapClass::Overlap
                } else {
                    OverlapClass::Single
                };
                let key = StyleKey { source: kind, active: curve.active_at(mid), overlap };
                match runs.last_mut() {
                    Some(last) if last.2 == key => last.1 = w[1],
                    _ => runs.push((w[0], w[1], key)),
                }
            }
            for (a, b, key) in runs {
                let pts = sub_polyline(&curve.points, a, b);
                let class = format!(
                    "{} {} {}",
                    kind_name(key.source),
                    if key.active { "active" } else { "inactive" },
                    key.overlap.class()
                );
                polyline(&mut out, &frame, &pts, &class, &style.line(key), &style.background);
            }
        }
        let _ = writeln!(out, "</g>");
    }

    for (i, tp) in g.turning_points.iter().enumerate() {
        let d = style.dot(tp.kind);
        let (x, y) = frame.px(tp.location);
        let _ = writeln!(
            out,
            "<circle class=\"tp {}\" data-index=\"{i}\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{}\" fill=\"{}\"/>",
            kind_name(tp.kind),
            d.radius,
            d.fill
        );
    }
    out.push_str("</svg>\n");
    out
}
