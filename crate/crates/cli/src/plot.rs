//! Minimal static SVG charts.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Line chart of several series against their index.
pub fn line_chart(title: &str, y_label: &str, series: &[(String, Vec<f64>)]) -> String {
    let n = series.iter().map(|(_, s)| s.len()).max().unwrap_or(1).max(2);
    let (lo, hi) = bounds(series.iter().flat_map(|(_, s)| s.iter().cloned()));
    let sx = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / (n - 1) as f64;
    let sy = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v - lo) / (hi - lo);

    let mut svg = header(title);
    writeln!(
        svg,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{m}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    )
    .unwrap();
    writeln!(svg, r#"<text x="{}" y="{}" font-size="11">{hi:.2}</text>"#, 4, MARGIN + 4.0).unwrap();
    writeln!(svg, r#"<text x="{}" y="{}" font-size="11">{lo:.2}</text>"#, 4, HEIGHT - MARGIN).unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11">iteration (0..{})</text>"#,
        WIDTH / 2.0 - 40.0,
        HEIGHT - 15.0,
        n - 1
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="12" y="{}" font-size="11" transform="rotate(-90 12 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    )
    .unwrap();
    for (idx, (name, values)) in series.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, v)| format!("{:.2},{:.2}", sx(i), sy(*v)))
            .collect();
        writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            MARGIN + 14.0 * (idx as f64 + 1.0),
            escape(name)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

/// Grayscale heatmap with values printed in each cell; dark is low.
pub fn heatmap(title: &str, rows: &[f64], cols: &[f64], values: &[Vec<f64>]) -> String {
    let (lo, hi) = bounds(values.iter().flatten().cloned());
    let cw = (WIDTH - 2.0 * MARGIN) / cols.len().max(1) as f64;
    let ch = (HEIGHT - 2.0 * MARGIN) / rows.len().max(1) as f64;
    let mut svg = header(title);
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let level = (255.0 * (v - lo) / (hi - lo)).round().clamp(0.0, 255.0) as u8;
            let (x, y) = (MARGIN + j as f64 * cw, MARGIN + i as f64 * ch);
            writeln!(
                svg,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="rgb({level},{level},{level})"/>"#
            )
            .unwrap();
            let ink = if level > 127 { "black" } else { "white" };
            writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" fill="{ink}" text-anchor="middle">{v:.3}</text>"#,
                x + cw / 2.0,
                y + ch / 2.0
            )
            .unwrap();
        }
    }
    for (j, c) in cols.iter().enumerate() {
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" font-size="11" text-anchor="middle">noise {c}</text>"#,
            MARGIN + (j as f64 + 0.5) * cw,
            HEIGHT - MARGIN + 16.0
        )
        .unwrap();
    }
    for (i, r) in rows.iter().enumerate() {
        writeln!(
            svg,
            r#"<text x="4" y="{:.2}" font-size="11">blur {r}</text>"#,
            MARGIN + (i as f64 + 0.5) * ch
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" font-family=\"sans-serif\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
}
