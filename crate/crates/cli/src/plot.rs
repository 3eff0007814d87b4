//! Static SVG scatter plots of a moment sweep with the (k-1)² reference line.

use std::fmt::Write;

use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x_column: String,
    pub y_column: String,
    pub k: f64,
    pub title: String,
}

/// The points read from `csv`: the two named columns, rows with unparsable
/// or non-finite cells skipped. An empty input gives no points.
pub fn read_points(csv: &[u8], spec: &PlotSpec) -> Result<Vec<(f64, f64)>, CliError> {
    if csv.iter().all(u8::is_ascii_whitespace) {
        return Ok(Vec::new());
    }
    let mut r = csv::ReaderBuilder::new().from_reader(csv);
    let bad = |e: csv::Error| CliError::Validation(format!("malformed CSV: {e}"));
    let headers = r.headers().map_err(bad)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Validation(format!("CSV has no column `{name}`")))
    };
    let (xi, yi) = (col(&spec.x_column)?, col(&spec.y_column)?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(bad)?;
        let parse = |i: usize| rec.get(i).and_then(|s| s.trim().parse::<f64>().ok()).filter(|v| v.is_finite());
        if let (Some(x), Some(y)) = (parse(xi), parse(yi)) {
            out.push((x, y));
        }
    }
    Ok(out)
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

/// Reference intercept: the line of slope (k-1)² through the centroid.
fn reference_intercept(points: &[(f64, f64)], slope: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    points.iter().map(|&(x, y)| y - slope * x).sum::<f64>() / points.len() as f64
}

pub fn render_svg(points: &[(f64, f64)], spec: &PlotSpec) -> String {
    let slope = (spec.k - 1.0) * (spec.k - 1.0);
    let c = reference_intercept(points, slope);
    let (x0, x1) = range(points.iter().map(|p| p.0));
    let (y0, y1) = range(points.iter().map(|p| p.1).chain(
        // keep the reference line visible at both ends
        if points.is_empty() { vec![] } else { vec![slope * x0 + c, slope * x1 + c] },
    ));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.3}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&spec.title));
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(s, r#"<line x1="{l:.3}" y1="{b:.3}" x2="{r:.3}" y2="{b:.3}"/>"#);
    let _ = writeln!(s, r#"<line x1="{l:.3}" y1="{b:.3}" x2="{l:.3}" y2="{t:.3}"/>"#);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11">"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{xv:.3}</text>"#, sx(xv), b + 16.0);
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{yv:.3}</text>"#, l - 6.0, sy(yv) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, escape(&spec.x_column));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.3}" text-anchor="middle" transform="rotate(-90 14 {:.3})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&spec.y_column)
    );
    let _ = writeln!(s, "</g>");
    if !points.is_empty() {
        let _ = writeln!(
            s,
            r#"<line class="reference" data-slope="{slope}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
            sx(x0),
            sy(slope * x0 + c),
            sx(x1),
            sy(slope * x1 + c)
        );
    }
    let _ = writeln!(s, r#"<g class="points" fill="steelblue">"#);
    for &(x, y) in points {
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="3"/>"#, sx(x), sy(y));
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(k: f64) -> PlotSpec {
        PlotSpec { x_column: "loglog_q".into(), y_column: "log_ratio".into(), k, title: "t".into() }
    }

    #[test]
    fn empty_input_gives_bare_axes() {
        let pts = read_points(b"", &spec(2.0)).unwrap();
        let svg = render_svg(&pts, &spec(2.0));
        assert!(svg.contains("class=\"axes\""));
        assert!(!svg.contains("<circle"));
        let header_only = read_points(b"loglog_q,log_ratio\n", &spec(2.0)).unwrap();
        assert!(header_only.is_empty());
    }

    #[test]
    fn one_circle_per_row_and_reference_slope() {
        let csv = b"loglog_q,log_ratio\n1.9,0.1\n2.0,0.2\n2.1,0.25\n";
        let pts = read_points(csv, &spec(3.0)).unwrap();
        let svg = render_svg(&pts, &spec(3.0));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("data-slope=\"4\""));
        assert_eq!(svg, render_svg(&pts, &spec(3.0)));
    }

    #[test]
    fn malformed_input() {
        assert!(read_points(b"a,b\n1,2\n", &spec(2.0)).is_err());
        assert!(read_points(b"loglog_q,log_ratio\n1,2,3\n", &spec(2.0)).is_err());
    }
}
