//! Minimal deterministic line charts.

use crate::stats::fmt_sig;
use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub series: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SvgError {
    #[error("cannot chart an empty table")]
    Empty,
    #[error("series {0} has {1} points but the x axis has {2}")]
    Ragged(String, usize, usize),
}

impl Chart {
    pub fn from_sweep(table: &crate::sweep::SweepTable, title: impl Into<String>) -> Self {
        Chart {
            title: title.into(),
            x_label: table.x_label().into(),
            y_label: "exponent (nats)".into(),
            x: table.x(),
            series: table.series().into_iter().map(|(n, v)| (n.to_string(), v)).collect(),
        }
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn coord(v: f64) -> String {
    format!("{v:.2}")
}

pub fn emit_svg(chart: &Chart) -> Result<String, SvgError> {
    if chart.x.is_empty() || chart.series.is_empty() {
        return Err(SvgError::Empty);
    }
    for (name, ys) in &chart.series {
        if ys.len() != chart.x.len() {
            return Err(SvgError::Ragged(name.clone(), ys.len(), chart.x.len()));
        }
    }
    let (x0, x1) = bounds(chart.x.iter().copied());
    let (_, y1) = bounds(chart.series.iter().flat_map(|s| s.1.iter().copied()));
    let y0 = 0.0f64.min(bounds(chart.series.iter().flat_map(|s| s.1.iter().copied())).0);
    let y1 = if y1 > y0 { y1 } else { y0 + 1.0 };
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * plot_h;

    let mut s = String::new();
    let w = &mut s;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        w,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(&chart.title)
    )
    .unwrap();
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(
        w,
        r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black" stroke-width="1"/>"#
    )
    .unwrap();
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        writeln!(
            w,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            coord(px(xv)),
            b + 16.0,
            fmt_tick(xv)
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            l - 6.0,
            coord(py(yv) + 4.0),
            fmt_tick(yv)
        )
        .unwrap();
    }
    writeln!(
        w,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(&chart.x_label)
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&chart.y_label)
    )
    .unwrap();

    for (i, (name, ys)) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = chart
            .x
            .iter()
            .zip(ys)
            .filter(|(_, y)| y.is_finite())
            .map(|(&x, &y)| format!("{},{}", coord(px(x)), coord(py(y))))
            .collect();
        writeln!(
            w,
            r#"<polyline data-series="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            escape(name),
            pts.join(" ")
        )
        .unwrap();
        let ly = t + 14.0 + 16.0 * i as f64;
        writeln!(
            w,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            r - 150.0,
            r - 130.0
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            r - 124.0,
            ly + 4.0,
            escape(name)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn fmt_tick(v: f64) -> String {
    let r: f64 = format!("{v:.3e}").parse().unwrap_or(v);
    fmt_sig(r)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_rows() -> Chart {
        Chart {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            x: vec![0.1, 0.2],
            series: vec![("a".into(), vec![1.0, 2.0]), ("b".into(), vec![0.5, 0.25])],
        }
    }

    #[test]
    fn two_point_polylines() {
        let svg = emit_svg(&two_rows()).unwrap();
        let lines: Vec<_> = svg.lines().filter(|l| l.starts_with("<polyline")).collect();
        assert_eq!(lines.len(), 2);
        for l in lines {
            let pts = l.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
            assert_eq!(pts.split(' ').count(), 2);
        }
    }

    #[test]
    fn deterministic_bytes() {
        assert_eq!(emit_svg(&two_rows()).unwrap(), emit_svg(&two_rows()).unwrap());
    }

    #[test]
    fn empty_and_ragged_rejected() {
        let mut c = two_rows();
        c.series[1].1.pop();
        assert!(matches!(emit_svg(&c), Err(SvgError::Ragged(..))));
        c.x.clear();
        assert_eq!(emit_svg(&c), Err(SvgError::Empty));
    }
}
