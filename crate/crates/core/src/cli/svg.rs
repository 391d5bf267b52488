//! Minimal SVG writer: fixed 800x400 canvas, coordinates rounded to two
//! decimals, only rect/line/path/text elements.

use std::fmt::Write as _;

use crate::costmodel::{PipelineModel, PipelineSchedule};
use crate::decomp::Color;
use crate::tents::Rect;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 400.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 40.0;
const HATCH: f64 = 6.0;
const RED: &str = "#c0392b";
const BLACK: &str = "#222222";

/// Two-decimal coordinate without a negative zero.
fn n(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn color_hex(c: Color) -> &'static str {
    match c {
        Color::Red => RED,
        Color::Black => BLACK,
    }
}

#[derive(Default)]
pub struct Svg {
    body: String,
}

impl Svg {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" stroke="{stroke}" stroke-width="1"/>"#,
            n(x),
            n(y),
            n(w.max(0.0)),
            n(h.max(0.0))
        );
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"/>"#,
            n(x1),
            n(y1),
            n(x2),
            n(y2),
            n(width)
        );
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        if pts.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{},{}", if i == 0 { "M" } else { " L" }, n(*x), n(*y));
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{}"/>"#,
            n(width)
        );
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="{}" text-anchor="{anchor}">{}</text>"#,
            n(x),
            n(y),
            n(size),
            escape(s)
        );
    }

    /// Diagonal hatching inside a box, as one path.
    pub fn hatch_box(&mut self, x: f64, y: f64, w: f64, h: f64, stroke: &str) {
        if w <= 0.0 || h <= 0.0 {
            return;
        }
        let mut d = String::new();
        let mut s = HATCH;
        while s < w + h {
            // segment of the line x' + y' = s clipped to the box
            let (x0, y0) = if s <= h { (0.0, s) } else { (s - h, h) };
            let (x1, y1) = if s <= w { (s, 0.0) } else { (w, s - w) };
            let _ = write!(
                d,
                "M{},{} L{},{} ",
                n(x + x0),
                n(y + y0),
                n(x + x1),
                n(y + y1)
            );
            s += HATCH;
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{}" fill="none" stroke="{stroke}" stroke-width="0.5"/>"#,
            d.trim_end()
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\" stroke=\"none\"/>\n{}</svg>\n",
            self.body,
            w = WIDTH,
            h = HEIGHT
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Plot {
    x_max: f64,
    y_max: f64,
}

impl Plot {
    fn px(&self, x: f64) -> f64 {
        MARGIN_L + x / self.x_max * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, t: f64) -> f64 {
        HEIGHT - MARGIN_B - t / self.y_max * (HEIGHT - MARGIN_T - MARGIN_B)
    }

    fn axes(&self, svg: &mut Svg, x_label: &str, y_label: &str, y_ticks: bool) {
        let (x0, y0) = (self.px(0.0), self.py(0.0));
        svg.line(x0, y0, self.px(self.x_max), y0, BLACK, 1.0);
        svg.line(x0, y0, x0, self.py(self.y_max), BLACK, 1.0);
        svg.text(self.px(self.x_max), y0 + 25.0, 12.0, "end", x_label);
        svg.text(x0 - 8.0, self.py(self.y_max) - 10.0, 12.0, "start", y_label);
        svg.text(x0, y0 + 15.0, 10.0, "middle", "0");
        svg.text(self.px(self.x_max), y0 + 15.0, 10.0, "middle", &format!("{}", self.x_max));
        if y_ticks {
            svg.text(x0 - 5.0, self.py(self.y_max) + 4.0, 10.0, "end", &format!("{}", self.y_max));
        }
    }
}

/// Space-time diagram: pitched rectangles, the certified front after each
/// iteration, and vertical hatching under the front of the first iteration.
pub fn tent_diagram(length: f64, final_time: f64, rects: &[Rect<f64>], fronts: &[Vec<(f64, f64)>]) -> String {
    let plot = Plot {
        x_max: length,
        y_max: final_time,
    };
    let mut svg = Svg::new();
    if let Some(first) = fronts.first() {
        let mut d = Vec::new();
        let mut x = MARGIN_L;
        let right = plot.px(length);
        while x <= right + 1e-9 {
            let phys = (x - MARGIN_L) / (right - MARGIN_L) * length;
            let top = interpolate(first, phys);
            d.push((x, plot.py(0.0), x, plot.py(top)));
            x += HATCH;
        }
        for (x1, y1, x2, y2) in d {
            svg.line(x1, y1, x2, y2, "#999999", 0.5);
        }
    }
    for r in rects {
        let c = color_hex(Color::of_iteration(r.k));
        svg.rect(
            plot.px(r.x_lo),
            plot.py(r.t_hi),
            plot.px(r.x_hi) - plot.px(r.x_lo),
            plot.py(r.t_lo) - plot.py(r.t_hi),
            "none",
            c,
        );
    }
    for (k, front) in fronts.iter().enumerate() {
        let pts: Vec<(f64, f64)> = front.iter().map(|&(x, t)| (plot.px(x), plot.py(t))).collect();
        svg.polyline(&pts, color_hex(Color::of_iteration(k + 1)), 1.5);
    }
    plot.axes(&mut svg, "x", "t", true);
    svg.finish()
}

fn interpolate(front: &[(f64, f64)], x: f64) -> f64 {
    match front.iter().position(|&(px, _)| px >= x) {
        None => front.last().map_or(0.0, |p| p.1),
        Some(0) => front[0].1,
        Some(i) => {
            let (xa, ta) = front[i - 1];
            let (xb, tb) = front[i];
            if xb == xa {
                tb
            } else {
                ta + (tb - ta) * (x - xa) / (xb - xa)
            }
        }
    }
}

/// One row per process; tasks filled red/black, idle intervals hatched.
pub fn gantt(schedule: &PipelineSchedule<f64>, title: &str) -> String {
    let total = if schedule.total > 0.0 { schedule.total } else { 1.0 };
    let plot = Plot {
        x_max: total,
        y_max: schedule.processes as f64,
    };
    let mut svg = Svg::new();
    let row_h = (plot.py(0.0) - plot.py(1.0)) * 0.8;
    for p in 0..schedule.processes {
        let y = plot.py(p as f64 + 1.0) + (plot.py(0.0) - plot.py(1.0)) * 0.1;
        let mut busy: Vec<(f64, f64)> = Vec::new();
        for t in schedule.tasks.iter().filter(|t| t.process == p) {
            let fill = color_hex(Color::of_iteration(t.k));
            svg.rect(plot.px(t.start), y, plot.px(t.end) - plot.px(t.start), row_h, fill, "white");
            busy.push((t.start, t.end));
        }
        busy.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cursor = 0.0;
        let tol = 1e-12 * total;
        for (s, e) in busy.into_iter().chain(std::iter::once((total, total))) {
            if s - cursor > tol {
                let (x0, x1) = (plot.px(cursor), plot.px(s));
                svg.rect(x0, y, x1 - x0, row_h, "none", "#999999");
                svg.hatch_box(x0, y, x1 - x0, row_h, "#999999");
            }
            cursor = cursor.max(e);
        }
        svg.text(MARGIN_L - 8.0, y + row_h / 2.0 + 4.0, 11.0, "end", &format!("P{p}"));
    }
    let label = match schedule.model {
        PipelineModel::Synchronous => "synchronous",
        PipelineModel::Asynchronous => "asynchronous",
    };
    svg.text(
        WIDTH / 2.0,
        18.0,
        13.0,
        "middle",
        &format!("{title} ({label}, total {})", schedule.total),
    );
    plot.axes(&mut svg, "cost", "", false);
    svg.finish()
}
