//! Minimal static SVG charts: line/scatter plots, grouped bars and
//! downsampled heatmaps, laid out on a shared canvas.

use std::fmt::Write;

use ndarray::Array2;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 12.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 40.0;

#[derive(Clone, Copy, Debug)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    fn plot_area(&self) -> Rect {
        Rect::new(
            self.x + MARGIN_LEFT,
            self.y + MARGIN_TOP,
            (self.w - MARGIN_LEFT - MARGIN_RIGHT).max(1.0),
            (self.h - MARGIN_TOP - MARGIN_BOTTOM).max(1.0),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

pub struct Series<'a> {
    pub name: &'a str,
    pub points: &'a [(f64, f64)],
    pub style: Style,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

pub struct Document {
    width: f64,
    height: f64,
    body: String,
}

impl Document {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height, body: String::new() }
    }

    /// `labels` is `[title, x label, y label]`.
    fn frame(&mut self, area: Rect, outer: Rect, labels: [&str; 3], x: Option<(f64, f64)>, y: (f64, f64)) {
        let [title, xlabel, ylabel] = labels;
        let b = &mut self.body;
        let _ = writeln!(
            b,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
            area.x, area.y, area.w, area.h
        );
        let _ = writeln!(
            b,
            r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{}</text>"#,
            outer.x + outer.w / 2.0,
            outer.y + 18.0,
            escape(title)
        );
        let _ = writeln!(
            b,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            area.x + area.w / 2.0,
            outer.y + outer.h - 6.0,
            escape(xlabel)
        );
        let _ = writeln!(
            b,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
            outer.x + 12.0,
            area.y + area.h / 2.0,
            outer.x + 12.0,
            area.y + area.h / 2.0,
            escape(ylabel)
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let px = area.x + f * area.w;
            let py = area.y + area.h - f * area.h;
            if let Some(x) = x {
                let _ = writeln!(
                    b,
                    r#"<text x="{px:.1}" y="{:.1}" font-size="9" text-anchor="middle">{}</text>"#,
                    area.y + area.h + 12.0,
                    tick_label(x.0 + f * (x.1 - x.0))
                );
            }
            let _ = writeln!(
                b,
                r#"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="end">{}</text>"#,
                area.x - 4.0,
                py + 3.0,
                tick_label(y.0 + f * (y.1 - y.0))
            );
        }
    }

    fn legend(&mut self, area: Rect, names: &[&str]) {
        for (i, name) in names.iter().enumerate() {
            let y = area.y + 12.0 + 13.0 * i as f64;
            let x = area.x + area.w - 120.0;
            let _ = writeln!(
                self.body,
                r#"<rect x="{x:.1}" y="{:.1}" width="10" height="3" fill="{}"/><text x="{:.1}" y="{y:.1}" font-size="10">{}</text>"#,
                y - 4.0,
                PALETTE[i % PALETTE.len()],
                x + 14.0,
                escape(name)
            );
        }
    }

    pub fn line_chart(&mut self, outer: Rect, title: &str, xlabel: &str, ylabel: &str, series: &[Series]) {
        let area = outer.plot_area();
        let x = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
        let y = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
        self.frame(area, outer, [title, xlabel, ylabel], Some(x), y);
        let map = |(px, py): (f64, f64)| {
            (
                area.x + (px - x.0) / (x.1 - x.0) * area.w,
                area.y + area.h - (py - y.0) / (y.1 - y.0) * area.h,
            )
        };
        for (i, s) in series.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            let pts: Vec<(f64, f64)> = s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).map(|&p| map(p)).collect();
            match s.style {
                Style::Line => {
                    let path: Vec<String> = pts.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
                    let _ = writeln!(
                        self.body,
                        r#"<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{}"/>"#,
                        path.join(" ")
                    );
                }
                Style::Markers => {
                    for (a, b) in pts {
                        let _ = writeln!(self.body, r#"<circle cx="{a:.2}" cy="{b:.2}" r="3" fill="{colour}"/>"#);
                    }
                }
            }
        }
        let names: Vec<&str> = series.iter().map(|s| s.name).collect();
        self.legend(area, &names);
    }

    /// Grouped bars: `values[s][c]` is series `s` in category `c`.
    pub fn bar_chart(&mut self, outer: Rect, title: &str, ylabel: &str, categories: &[String], names: &[&str], values: &[Vec<f64>]) {
        let area = outer.plot_area();
        let top = values.iter().flatten().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
        let y = (0.0, if top > 0.0 { top * 1.1 } else { 1.0 });
        self.frame(area, outer, [title, "", ylabel], None, y);
        let group = area.w / categories.len().max(1) as f64;
        let bar = group * 0.8 / names.len().max(1) as f64;
        for (s, row) in values.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    continue;
                }
                let h = v / y.1 * area.h;
                let _ = writeln!(
                    self.body,
                    r#"<rect x="{:.2}" y="{:.2}" width="{bar:.2}" height="{h:.2}" fill="{}"/>"#,
                    area.x + c as f64 * group + group * 0.1 + s as f64 * bar,
                    area.y + area.h - h,
                    PALETTE[s % PALETTE.len()]
                );
            }
        }
        for (c, label) in categories.iter().enumerate() {
            let _ = writeln!(
                self.body,
                r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
                area.x + (c as f64 + 0.5) * group,
                area.y + area.h + 26.0,
                escape(label)
            );
        }
        self.legend(area, names);
    }

    /// Greyscale heatmap, block-averaged down to at most `max_cells` per side.
    pub fn heatmap(&mut self, outer: Rect, title: &str, data: &Array2<f64>, max_cells: usize) {
        let (rows, cols) = data.dim();
        let fr = rows.div_ceil(max_cells.max(1)).max(1);
        let fc = cols.div_ceil(max_cells.max(1)).max(1);
        let (gr, gc) = (rows.div_ceil(fr), cols.div_ceil(fc));
        let cells = Array2::from_shape_fn((gr, gc), |(i, j)| {
            let r = i * fr..((i + 1) * fr).min(rows);
            let c = j * fc..((j + 1) * fc).min(cols);
            let n = (r.len() * c.len()) as f64;
            data.slice(ndarray::s![r, c]).sum() / n
        });
        let (lo, hi) = bounds(cells.iter().copied());
        let _ = writeln!(
            self.body,
            r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
            outer.x + outer.w / 2.0,
            outer.y + 16.0,
            escape(title)
        );
        let area = Rect::new(outer.x + 4.0, outer.y + 24.0, outer.w - 8.0, outer.h - 28.0);
        let (cw, ch) = (area.w / gc as f64, area.h / gr as f64);
        for ((i, j), v) in cells.indexed_iter() {
            let g = (((v - lo) / (hi - lo)).clamp(0.0, 1.0) * 255.0).round() as u8;
            let _ = writeln!(
                self.body,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},{g})"/>"#,
                area.x + j as f64 * cw,
                area.y + i as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_document() {
        let mut doc = Document::new(400.0, 300.0);
        let pts = [(0.0, 1.0), (1.0, 2.0), (2.0, f64::NAN)];
        doc.line_chart(
            Rect::new(0.0, 0.0, 400.0, 150.0),
            "a <b>",
            "x",
            "y",
            &[Series { name: "s", points: &pts, style: Style::Line }],
        );
        doc.bar_chart(
            Rect::new(0.0, 150.0, 200.0, 150.0),
            "bars",
            "s",
            &["one".into()],
            &["m", "c"],
            &[vec![1.0], vec![2.0]],
        );
        doc.heatmap(Rect::new(200.0, 150.0, 200.0, 150.0), "img", &Array2::from_elem((5, 7), 1.0), 4);
        let svg = doc.finish();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a &lt;b&gt;"));
        assert!(!svg.contains("NaN"));
    }
}
