//! Minimal static line charts.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log10,
}

impl Scale {
    fn apply(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::Log10 => v.log10(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Axis {
    pub label: String,
    pub range: (f64, f64),
    pub scale: Scale,
}

impl Axis {
    pub fn linear(label: &str, lo: f64, hi: f64) -> Self {
        Axis {
            label: label.into(),
            range: (lo, hi),
            scale: Scale::Linear,
        }
    }

    pub fn log(label: &str, lo: f64, hi: f64) -> Self {
        Axis {
            label: label.into(),
            range: (lo, hi),
            scale: Scale::Log10,
        }
    }

    /// Range covering `values`, padded when degenerate.
    pub fn fit(label: &str, values: impl IntoIterator<Item = f64>, scale: Scale) -> Self {
        let (mut lo, mut hi) = values
            .into_iter()
            .filter(|v| v.is_finite() && (scale == Scale::Linear || *v > 0.0))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (1.0, 10.0);
        }
        if lo == hi {
            (lo, hi) = match scale {
                Scale::Linear => (lo - 0.5, hi + 0.5),
                Scale::Log10 => (lo / 2.0, hi * 2.0),
            };
        }
        Axis {
            label: label.into(),
            range: (lo, hi),
            scale,
        }
    }

    fn frac(&self, v: f64) -> f64 {
        let (a, b) = (self.scale.apply(self.range.0), self.scale.apply(self.range.1));
        (self.scale.apply(v) - a) / (b - a)
    }
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct Chart {
    pub title: String,
    pub x: Axis,
    pub y: Axis,
    pub series: Vec<Series>,
    /// Horizontal reference lines.
    pub hlines: Vec<f64>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl Chart {
    pub fn new(title: &str, x: Axis, y: Axis) -> Self {
        Chart {
            title: title.into(),
            x,
            y,
            series: Vec::new(),
            hlines: Vec::new(),
        }
    }

    pub fn series(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            label: label.into(),
            points,
        });
        self
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let w = WIDTH - LEFT - RIGHT;
        let h = HEIGHT - TOP - BOTTOM;
        (LEFT + self.x.frac(x) * w, TOP + (1.0 - self.y.frac(y)) * h)
    }

    /// Self-contained SVG markup; every series is one polyline and points
    /// that cannot be placed on a log axis are dropped.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let (x0, y0) = self.px(self.x.range.0, self.y.range.0);
        let (x1, y1) = self.px(self.x.range.1, self.y.range.1);
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, esc(&self.title)).unwrap();
        writeln!(
            s,
            r#"<g class="axes" stroke="black" data-x-range="{} {}" data-y-range="{} {}">"#,
            self.x.range.0, self.x.range.1, self.y.range.0, self.y.range.1
        )
        .unwrap();
        writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#).unwrap();
        writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#).unwrap();
        writeln!(s, "</g>").unwrap();
        for (v, anchor) in [(self.x.range.0, "start"), (self.x.range.1, "end")] {
            let (px, _) = self.px(v, self.y.range.0);
            writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="{anchor}">{}</text>"#, y0 + 16.0, tick(v)).unwrap();
        }
        for v in [self.y.range.0, self.y.range.1] {
            let (_, py) = self.px(self.x.range.0, v);
            writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 6.0, py + 4.0, tick(v)).unwrap();
        }
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 10.0, esc(&self.x.label)).unwrap();
        writeln!(
            s,
            r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            (y0 + y1) / 2.0,
            esc(&self.y.label)
        )
        .unwrap();
        for &h in &self.hlines {
            let (_, py) = self.px(self.x.range.0, h);
            writeln!(s, r##"<line class="ref" x1="{x0:.2}" y1="{py:.2}" x2="{x1:.2}" y2="{py:.2}" stroke="#999" stroke-dasharray="4 3"/>"##).unwrap();
        }
        for (k, series) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let pts: Vec<String> = series
                .points
                .iter()
                .filter(|&&(x, y)| self.x.frac(x).is_finite() && self.y.frac(y).is_finite())
                .map(|&(x, y)| {
                    let (px, py) = self.px(x, y);
                    format!("{px:.2},{py:.2}")
                })
                .collect();
            writeln!(
                s,
                r#"<polyline class="series" data-label="{}" fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
                esc(&series.label),
                pts.join(" ")
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}" text-anchor="end">{}</text>"#,
                x1 - 4.0,
                TOP + 14.0 * (k as f64 + 1.0),
                esc(&series.label)
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}
