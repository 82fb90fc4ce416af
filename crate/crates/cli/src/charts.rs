//! Minimal hand-rolled SVG line charts: axes, ticks, gridlines, one
//! polyline per series, and a small legend. No drawing dependencies.

use std::fmt::Write as _;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 58.0;
const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Legend label for a passage-time column name: `mfpt_p50_p75_years`
/// becomes `p50 to p75`.
pub fn passage_series_label(column: &str) -> String {
    let trimmed = column.strip_prefix("mfpt_").unwrap_or(column);
    let trimmed = trimmed.strip_suffix("_years").unwrap_or(trimmed);
    match trimmed.split_once("_p") {
        Some((start, target)) => format!("{start} to p{target}"),
        None => trimmed.to_string(),
    }
}

/// Renders one chart. Series are drawn in order with a fixed palette; the
/// x axis is labeled `year`.
pub fn line_chart(title: &str, y_label: &str, series: &[Series]) -> String {
    let points: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();

    let mut svg = String::new();
    let _ = write!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"##
    );
    let _ = write!(
        svg,
        r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"#);
    let _ = write!(
        svg,
        r##"<text x="{}" y="28" font-size="17" text-anchor="middle" fill="#111111">{}</text>"##,
        WIDTH / 2.0,
        escape(title)
    );
    if points.is_empty() {
        svg.push_str("</svg>");
        return svg;
    }

    let (x_min, x_max) = padded_range(points.iter().map(|p| p.0), 0.0);
    let (y_min, y_max) = padded_range(points.iter().map(|p| p.1), 0.05);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_px = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let y_px = |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;

    // Gridlines and tick labels.
    for tick in year_ticks(x_min, x_max) {
        let x = x_px(tick);
        let _ = write!(
            svg,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##,
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        );
        let _ = write!(
            svg,
            r##"<text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="middle" fill="#333333">{}</text>"##,
            MARGIN_TOP + plot_h + 18.0,
            tick_label(tick)
        );
    }
    for tick in ticks(y_min, y_max, 6) {
        let y = y_px(tick);
        let _ = write!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        );
        let _ = write!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end" fill="#333333">{}</text>"##,
            MARGIN_LEFT - 8.0,
            y + 4.0,
            tick_label(tick)
        );
    }

    // Axes and labels.
    let _ = write!(
        svg,
        r##"<line x1="{l:.2}" y1="{t:.2}" x2="{l:.2}" y2="{b:.2}" stroke="#333333" stroke-width="1.2"/><line x1="{l:.2}" y1="{b:.2}" x2="{r:.2}" y2="{b:.2}" stroke="#333333" stroke-width="1.2"/>"##,
        l = MARGIN_LEFT,
        r = MARGIN_LEFT + plot_w,
        t = MARGIN_TOP,
        b = MARGIN_TOP + plot_h
    );
    let _ = write!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle" fill="#111111">year</text>"##,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    );
    let _ = write!(
        svg,
        r##"<text x="20" y="{:.2}" font-size="13" text-anchor="middle" fill="#111111" transform="rotate(-90 20 {:.2})">{}</text>"##,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(y_label)
    );

    // Data.
    for (index, s) in series.iter().enumerate() {
        let color = PALETTE[index % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", x_px(x), y_px(y)))
            .collect();
        let _ = write!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"##,
            path.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = write!(
                svg,
                r##"<circle cx="{:.2}" cy="{:.2}" r="2.6" fill="{color}"/>"##,
                x_px(x),
                y_px(y)
            );
        }
    }

    // Legend (only when there is more than one series to tell apart).
    if series.len() > 1 {
        for (index, s) in series.iter().enumerate() {
            let color = PALETTE[index % PALETTE.len()];
            let y = MARGIN_TOP + 14.0 + 18.0 * index as f64;
            let x = MARGIN_LEFT + plot_w - 150.0;
            let _ = write!(
                svg,
                r##"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2.4"/><text x="{:.2}" y="{:.2}" font-size="12" fill="#333333">{}</text>"##,
                x + 26.0,
                x + 32.0,
                y + 4.0,
                escape(&s.label)
            );
        }
    }

    svg.push_str("</svg>");
    svg
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Data range padded by a fraction on both sides; degenerate ranges are
/// widened to unit size so the mapping stays finite.
fn padded_range(values: impl Iterator<Item = f64>, pad: f64) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if min > max {
        return (0.0, 1.0);
    }
    if min == max {
        return (min - 0.5, max + 0.5);
    }
    let span = max - min;
    (min - pad * span, max + pad * span)
}

/// Round tick positions: steps of 1, 2, or 5 times a power of ten.
fn ticks(min: f64, max: f64, target: usize) -> Vec<f64> {
    let raw_step = (max - min) / target.max(1) as f64;
    let magnitude = 10f64.powf(raw_step.log10().floor());
    let normalized = raw_step / magnitude;
    let step = magnitude
        * if normalized <= 1.5 {
            1.0
        } else if normalized <= 3.0 {
            2.0
        } else if normalized <= 7.0 {
            5.0
        } else {
            10.0
        };
    let mut tick = (min / step).ceil() * step;
    let mut out = Vec::new();
    while tick <= max + step * 1e-9 {
        // Snap values like 0.30000000000000004 back onto the step lattice.
        out.push((tick / step).round() * step);
        tick += step;
    }
    out
}

/// Year ticks are forced onto whole years.
fn year_ticks(min: f64, max: f64) -> Vec<f64> {
    let mut t = ticks(min, max, 7);
    t.retain(|v| (v - v.round()).abs() < 1e-9);
    if t.is_empty() {
        t.push(min.ceil());
    }
    t
}

/// Tick label: trailing zeros trimmed from a fixed rendering.
fn tick_label(v: f64) -> String {
    let text = format!("{v:.6}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    text.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_steps_are_round_numbers() {
        let t = ticks(0.0, 10.0, 6);
        assert_eq!(t, vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        let t = ticks(1995.0, 2021.0, 7);
        assert!(t.iter().all(|v| v % 5.0 == 0.0), "{t:?}");
        let t = ticks(0.0, 0.37, 6);
        assert!(t.len() >= 4, "{t:?}");
    }

    #[test]
    fn chart_contains_series_and_axes() {
        let svg = line_chart(
            "Demo",
            "years",
            &[
                Series {
                    label: "p50 to p75".into(),
                    points: vec![(1995.0, 6.0), (1996.0, 6.5)],
                },
                Series {
                    label: "p50 to p90".into(),
                    points: vec![(1995.0, 24.0), (1996.0, 25.0)],
                },
            ],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("p50 to p90"));
        assert!(svg.contains("year"));
    }

    #[test]
    fn empty_series_still_render_a_document() {
        let svg = line_chart("Empty", "years", &[]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>"));
    }

    #[test]
    fn passage_labels_read_naturally() {
        assert_eq!(passage_series_label("mfpt_p50_p75_years"), "p50 to p75");
        assert_eq!(passage_series_label("mfpt_p50_p99_5_years"), "p50 to p99_5");
    }
}
