//! SVG phase portraits: direction-field arrows, iso-strength lines, the
//! sink and trend lines, and sampled orbits colored by their fate.
//!
//! Output is a self-contained SVG 1.1 document with the leader count on the
//! horizontal axis and the foot-soldier count on the vertical axis, origin
//! at the bottom-left. Rendering is a pure function of its inputs — element
//! order, attribute order, and number formatting are all fixed — so
//! identical inputs produce byte-identical documents.

use std::fmt::Write;

use crate::analysis::{ClassKind, Classification, PhaseAnalysis};
use crate::error::{Error, Result};
use crate::model::Vec2;
use crate::simulate::{vector_field, Bounds, Orbit};

/// Canvas size and plot margin, in pixels.
const CANVAS_W: f64 = 800.0;
const CANVAS_H: f64 = 600.0;
const MARGIN: f64 = 60.0;

/// Fraction of a grid cell an arrow occupies.
const ARROW_FRACTION: f64 = 0.75;

/// Stroke style for one class of drawable.
#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    /// CSS color, e.g. `#1f77b4`.
    pub color: String,
    pub width: f64,
    /// `stroke-dasharray` value, if dashed.
    pub dash: Option<String>,
}

impl Stroke {
    pub fn solid(color: &str, width: f64) -> Self {
        Stroke {
            color: color.to_string(),
            width,
            dash: None,
        }
    }

    pub fn dashed(color: &str, width: f64, dash: &str) -> Self {
        Stroke {
            color: color.to_string(),
            width,
            dash: Some(dash.to_string()),
        }
    }

    fn attrs(&self) -> String {
        let mut s = format!("stroke=\"{}\" stroke-width=\"{}\"", self.color, fmt_px(self.width));
        if let Some(dash) = &self.dash {
            let _ = write!(s, " stroke-dasharray=\"{dash}\"");
        }
        s
    }
}

/// Orbit strokes keyed by classification. Defeated orbits must be visually
/// distinct from growing ones (different color or width).
#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    /// Below the sink line: collapse ahead.
    pub defeated: Stroke,
    /// Soldier-rich growth.
    pub p_type: Stroke,
    /// Leader-rich growth.
    pub r_type: Stroke,
    /// Exactly on an invariant line.
    pub boundary: Stroke,
    /// Orbits outside the saddle regime (no classification exists).
    pub unclassified: Stroke,
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            defeated: Stroke::solid("#1f77b4", 1.0),
            p_type: Stroke::solid("#ff7f0e", 2.0),
            r_type: Stroke::solid("#d62728", 2.0),
            boundary: Stroke::solid("#7f7f7f", 1.5),
            unclassified: Stroke::solid("#9467bd", 1.5),
        }
    }
}

impl Palette {
    fn stroke_for(&self, classification: Option<&Classification>) -> &Stroke {
        match classification.map(|c| c.kind) {
            Some(ClassKind::Defeated) => &self.defeated,
            Some(ClassKind::PType) => &self.p_type,
            Some(ClassKind::RType) => &self.r_type,
            Some(ClassKind::OnSinkLine) | Some(ClassKind::OnTrendLine) => &self.boundary,
            None => &self.unclassified,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.defeated == self.p_type || self.defeated == self.r_type {
            return Err(Error::Domain(
                "palette must distinguish defeated orbits from growing ones".into(),
            ));
        }
        Ok(())
    }
}

/// What to draw and how.
#[derive(Debug, Clone, PartialEq)]
pub struct PortraitSpec {
    pub bounds: Bounds,
    pub draw_vector_field: bool,
    pub draw_iso_strength: bool,
    pub draw_sink_line: bool,
    pub draw_trend_line: bool,
    pub draw_orbits: bool,
    /// Direction-field resolution (cells along L, cells along F).
    pub grid: (usize, usize),
    /// Number of iso-strength levels spread across the visible range.
    pub iso_levels: usize,
    pub palette: Palette,
}

impl PortraitSpec {
    /// Everything on, with a 20x20 direction field and 5 iso levels.
    pub fn new(bounds: Bounds) -> Self {
        PortraitSpec {
            bounds,
            draw_vector_field: true,
            draw_iso_strength: true,
            draw_sink_line: true,
            draw_trend_line: true,
            draw_orbits: true,
            grid: (20, 20),
            iso_levels: 5,
            palette: Palette::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        self.palette.validate()
    }
}

/// Two decimals is sub-pixel for an 800x600 canvas and keeps output stable.
fn fmt_px(v: f64) -> String {
    let s = format!("{v:.2}");
    // avoid the two representations of zero
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

struct Frame {
    bounds: Bounds,
    sx: f64,
    sy: f64,
}

impl Frame {
    fn new(bounds: Bounds) -> Self {
        Frame {
            bounds,
            sx: (CANVAS_W - 2.0 * MARGIN) / bounds.width(),
            sy: (CANVAS_H - 2.0 * MARGIN) / bounds.height(),
        }
    }

    fn x(&self, l: f64) -> f64 {
        MARGIN + (l - self.bounds.l_min) * self.sx
    }

    /// Pixel y grows downward; data F grows upward.
    fn y(&self, f: f64) -> f64 {
        CANVAS_H - MARGIN - (f - self.bounds.f_min) * self.sy
    }

    fn point(&self, p: Vec2) -> (f64, f64) {
        (self.x(p.l), self.y(p.f))
    }
}

/// Clips the infinite line `anchor + t*direction` to `bounds`; `None` when
/// it misses the rectangle.
fn clip_line(anchor: Vec2, direction: Vec2, bounds: &Bounds) -> Option<(Vec2, Vec2)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for (pos, dir, lo, hi) in [
        (anchor.l, direction.l, bounds.l_min, bounds.l_max),
        (anchor.f, direction.f, bounds.f_min, bounds.f_max),
    ] {
        if dir == 0.0 {
            if pos < lo || pos > hi {
                return None;
            }
        } else {
            let (near, far) = ((lo - pos) / dir, (hi - pos) / dir);
            let (near, far) = if near <= far { (near, far) } else { (far, near) };
            t0 = t0.max(near);
            t1 = t1.min(far);
        }
    }
    (t0 < t1).then(|| (anchor + direction * t0, anchor + direction * t1))
}

fn line_element(out: &mut String, frame: &Frame, a: Vec2, b: Vec2, stroke: &Stroke, marker: bool) {
    let (x1, y1) = frame.point(a);
    let (x2, y2) = frame.point(b);
    let _ = write!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {}",
        fmt_px(x1),
        fmt_px(y1),
        fmt_px(x2),
        fmt_px(y2),
        stroke.attrs()
    );
    if marker {
        out.push_str(" marker-end=\"url(#arrowhead)\"");
    }
    out.push_str("/>\n");
}

/// Renders a phase portrait. Orbits are colored by their recorded
/// classification; layers stack bottom-to-top as direction field,
/// iso-strength lines, sink line, trend line, orbits.
pub fn render_portrait(
    analysis: &PhaseAnalysis,
    orbits: &[Orbit],
    spec: &PortraitSpec,
) -> Result<String> {
    spec.validate()?;
    let frame = Frame::new(spec.bounds);
    let b = &spec.bounds;
    let mut out = String::with_capacity(64 * 1024);

    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\">",
        CANVAS_W as u32, CANVAS_H as u32, CANVAS_W as u32, CANVAS_H as u32
    );

    // arrowhead marker and the plot-area clip shared by all data layers
    let plot_w = CANVAS_W - 2.0 * MARGIN;
    let plot_h = CANVAS_H - 2.0 * MARGIN;
    let _ = writeln!(
        out,
        "<defs>\n<marker id=\"arrowhead\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" \
         refY=\"3\" orient=\"auto\"><polygon points=\"0,0 6,3 0,6\" fill=\"#888888\"/></marker>\n\
         <clipPath id=\"plot-area\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/></clipPath>\n\
         </defs>",
        fmt_px(MARGIN),
        fmt_px(MARGIN),
        fmt_px(plot_w),
        fmt_px(plot_h)
    );

    // background frame and axis labels
    out.push_str("<g id=\"frame\">\n");
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#ffffff\" stroke=\"#333333\" \
         stroke-width=\"1\"/>",
        fmt_px(MARGIN),
        fmt_px(MARGIN),
        fmt_px(plot_w),
        fmt_px(plot_h)
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"14\" fill=\"#333333\" \
         text-anchor=\"middle\">L (leaders)</text>",
        fmt_px(CANVAS_W / 2.0),
        fmt_px(CANVAS_H - MARGIN / 3.0)
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"14\" fill=\"#333333\" \
         text-anchor=\"middle\" transform=\"rotate(-90 {} {})\">F (foot soldiers)</text>",
        fmt_px(MARGIN / 3.0),
        fmt_px(CANVAS_H / 2.0),
        fmt_px(MARGIN / 3.0),
        fmt_px(CANVAS_H / 2.0)
    );
    for (value, label_x, label_y, anchor) in [
        (b.l_min, frame.x(b.l_min), CANVAS_H - MARGIN + 18.0, "middle"),
        (b.l_max, frame.x(b.l_max), CANVAS_H - MARGIN + 18.0, "middle"),
        (b.f_min, MARGIN - 8.0, frame.y(b.f_min) + 4.0, "end"),
        (b.f_max, MARGIN - 8.0, frame.y(b.f_max) + 4.0, "end"),
    ] {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" fill=\"#333333\" \
             text-anchor=\"{}\">{}</text>",
            fmt_px(label_x),
            fmt_px(label_y),
            anchor,
            value
        );
    }
    out.push_str("</g>\n");

    if spec.draw_vector_field {
        out.push_str("<g id=\"vector-field\" clip-path=\"url(#plot-area)\">\n");
        let grid = vector_field(&analysis.params, b, spec.grid.0, spec.grid.1)?;
        let cell_px = (plot_w / spec.grid.0 as f64).min(plot_h / spec.grid.1 as f64);
        let half_len = 0.5 * ARROW_FRACTION * cell_px;
        let stroke = Stroke::solid("#888888", 1.0);
        for arrow in &grid.arrows {
            // normalize in pixel space so the drawn angle matches the
            // distorted aspect ratio of the plot
            let vx = arrow.velocity.l * frame.sx;
            let vy = arrow.velocity.f * frame.sy;
            let norm = vx.hypot(vy);
            let (ux, uy) = if norm > 0.0 {
                (vx / norm, vy / norm)
            } else {
                (0.0, 0.0)
            };
            let (cx, cy) = frame.point(arrow.position);
            let _ = write!(
                out,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {}",
                fmt_px(cx - ux * half_len),
                fmt_px(cy + uy * half_len),
                fmt_px(cx + ux * half_len),
                fmt_px(cy - uy * half_len),
                stroke.attrs()
            );
            if norm > 0.0 {
                out.push_str(" marker-end=\"url(#arrowhead)\"");
            }
            out.push_str("/>\n");
        }
        out.push_str("</g>\n");
    }

    if spec.draw_iso_strength && spec.iso_levels > 0 {
        out.push_str("<g id=\"iso-strength\" clip-path=\"url(#plot-area)\">\n");
        let m = analysis.params.leader_weight;
        let s_min = m * b.l_min + b.f_min;
        let s_max = m * b.l_max + b.f_max;
        let stroke = Stroke::dashed("#bbbbbb", 1.0, "3,3");
        for i in 0..spec.iso_levels {
            let level = s_min + (i as f64 + 1.0) * (s_max - s_min) / (spec.iso_levels as f64 + 1.0);
            // the line m*L + F = level, anchored where it meets L = l_min
            let anchor = Vec2::new(b.l_min, level - m * b.l_min);
            if let Some((p, q)) = clip_line(anchor, Vec2::new(1.0, -m), b) {
                line_element(&mut out, &frame, p, q, &stroke, false);
            }
        }
        out.push_str("</g>\n");
    }

    if spec.draw_sink_line {
        out.push_str("<g id=\"sink-line\" clip-path=\"url(#plot-area)\">\n");
        if let Some(line) = &analysis.sink_line {
            if let Some((p, q)) = clip_line(line.anchor, line.direction, b) {
                line_element(&mut out, &frame, p, q, &Stroke::solid("#8b0000", 2.5), false);
            }
        }
        out.push_str("</g>\n");
    }

    if spec.draw_trend_line {
        out.push_str("<g id=\"trend-line\" clip-path=\"url(#plot-area)\">\n");
        if let Some(line) = &analysis.trend_line {
            if let Some((p, q)) = clip_line(line.anchor, line.direction, b) {
                line_element(
                    &mut out,
                    &frame,
                    p,
                    q,
                    &Stroke::dashed("#000000", 1.25, "6,4"),
                    false,
                );
            }
        }
        out.push_str("</g>\n");
    }

    if spec.draw_orbits {
        out.push_str("<g id=\"orbits\" fill=\"none\" clip-path=\"url(#plot-area)\">\n");
        for orbit in orbits {
            let stroke = spec.palette.stroke_for(orbit.classification.as_ref());
            let mut d = String::with_capacity(orbit.trajectory.samples.len() * 16);
            for (i, sample) in orbit.trajectory.samples.iter().enumerate() {
                let (x, y) = frame.point(Vec2::new(sample.leaders, sample.foot_soldiers));
                let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, fmt_px(x), fmt_px(y));
            }
            let _ = writeln!(out, "<path d=\"{}\" {}/>", d, stroke.attrs());
        }
        out.push_str("</g>\n");
    }

    out.push_str("</svg>\n");
    Ok(out)
}
