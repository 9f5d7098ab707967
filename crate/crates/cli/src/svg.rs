//! Minimal SVG renderings of the CSV series.

use std::fmt::Write;

use fxpca::experiments::Summary;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut f = Frame {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for (x, y) in points.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            f.x0 = f.x0.min(x);
            f.x1 = f.x1.max(x);
            f.y0 = f.y0.min(y);
            f.y1 = f.y1.max(y);
        }
        if !f.x0.is_finite() {
            return Frame { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
        }
        if f.x1 == f.x0 {
            f.x1 = f.x0 + 1.0;
        }
        if f.y1 == f.y0 {
            f.y1 = f.y0 + 1.0;
        }
        f
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn open(title: &str, f: &Frame) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, WIDTH / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="{}">{:.4}</text>"#, HEIGHT - MARGIN + 15.0, f.x0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#, WIDTH - MARGIN, HEIGHT - MARGIN + 15.0, f.x1);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#, MARGIN - 4.0, HEIGHT - MARGIN, f.y0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#, MARGIN - 4.0, MARGIN + 8.0, f.y1);
    s
}

/// One polyline per named series.
pub fn line_plot(title: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let f = Frame::fit(series.iter().flat_map(|(_, pts)| pts.iter().copied()));
    let mut s = open(title, &f);
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", f.sx(x), f.sy(y)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" points="{}"/>"#, path.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{name}</text>"#,
            WIDTH - MARGIN + 4.0,
            MARGIN + 14.0 * (i as f64 + 1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Box plots from precomputed summaries.
pub fn box_plot(title: &str, boxes: &[(String, Summary)]) -> String {
    let f = Frame::fit(
        boxes
            .iter()
            .enumerate()
            .flat_map(|(i, (_, b))| [(i as f64 - 0.5, b.min), (i as f64 + 0.5, b.max)]),
    );
    let mut s = open(title, &f);
    for (i, (name, b)) in boxes.iter().enumerate() {
        let x = f.sx(i as f64);
        let half = 0.25 * (f.sx(1.0) - f.sx(0.0)).abs().min(80.0);
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(s, r#"<line x1="{x:.2}" x2="{x:.2}" y1="{:.2}" y2="{:.2}" stroke="{color}"/>"#, f.sy(b.min), f.sy(b.max));
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="white" stroke="{color}"/>"#,
            x - half,
            f.sy(b.q3),
            2.0 * half,
            (f.sy(b.q1) - f.sy(b.q3)).max(0.5)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" x2="{:.2}" y1="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
            x - half,
            x + half,
            f.sy(b.median),
            f.sy(b.median)
        );
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{name}</text>"#, HEIGHT - MARGIN + 28.0);
    }
    s.push_str("</svg>\n");
    s
}
