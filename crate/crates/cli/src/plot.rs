//! Dependency-free SVG line charts for trajectory plots.

use std::fmt::Write as _;

/// Chart geometry: fixed 800×480 canvas with room for axis labels on the
/// left/bottom and a legend column on the right.
const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 46.0;

/// Lines per chart are decimated to at most this many points; beyond that a
/// plot stops gaining visual information and only gains file size.
const MAX_POINTS_PER_LINE: usize = 2000;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Compact tick label: plain decimal in a comfortable range, scientific
/// notation outside it.
fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() || s == "-" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{v:.2e}")
    }
}

/// Render one `<polyline>` per series over a shared time axis.
///
/// Every series must have `times.len()` samples. Lines longer than
/// [`MAX_POINTS_PER_LINE`] are decimated with a uniform stride that always
/// keeps the final sample.
pub fn line_chart(title: &str, times: &[f64], series: &[(String, Vec<f64>)]) -> String {
    let (x_lo, x_hi) = axis_range(times.first().copied(), times.last().copied());
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for (_, values) in series {
        for &v in values {
            if v.is_finite() {
                y_lo = y_lo.min(v);
                y_hi = y_hi.max(v);
            }
        }
    }
    let (y_lo, y_hi) = axis_range(
        if y_lo.is_finite() { Some(y_lo) } else { None },
        if y_hi.is_finite() { Some(y_hi) } else { None },
    );

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |t: f64| MARGIN_LEFT + (t - x_lo) / (x_hi - x_lo) * plot_w;
    let y_of = |v: f64| MARGIN_TOP + (y_hi - v) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{}" y="22" font-size="14" text-anchor="middle">{}</text>
"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title),
    );

    // Grid and tick labels.
    for k in 0..=5 {
        let f = k as f64 / 5.0;
        let gx = MARGIN_LEFT + f * plot_w;
        let gy = MARGIN_TOP + f * plot_h;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_hi - f * (y_hi - y_lo);
        let _ = writeln!(
            svg,
            r##"<line x1="{gx:.1}" y1="{MARGIN_TOP}" x2="{gx:.1}" y2="{:.1}" stroke="#ddd"/>"##,
            MARGIN_TOP + plot_h
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" y1="{gy:.1}" x2="{:.1}" y2="{gy:.1}" stroke="#ddd"/>"##,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            r#"<text x="{gx:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + plot_h + 16.0,
            fmt_tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            gy + 4.0,
            fmt_tick(yv)
        );
    }

    // Axes on top of the grid.
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="#333"/>"##
    );

    let stride = times.len().div_ceil(MAX_POINTS_PER_LINE).max(1);
    for (s, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        let mut points = String::new();
        let mut push_point = |i: usize| {
            let v = values[i];
            if v.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", x_of(times[i]), y_of(v));
            }
        };
        let mut i = 0;
        while i < times.len() {
            push_point(i);
            i += stride;
        }
        if !times.is_empty() && !(times.len() - 1).is_multiple_of(stride) {
            push_point(times.len() - 1);
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            points.trim_end()
        );

        // Legend entry in the right-hand column.
        let ly = MARGIN_TOP + 14.0 + s as f64 * 16.0;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/>
<text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            ly - 4.0,
            lx + 18.0,
            ly - 4.0,
            lx + 24.0,
            ly,
            escape(name)
        );
    }

    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">time</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    svg.push_str("</svg>\n");
    svg
}

/// Pad a data range so lines never sit on the frame; degenerate or missing
/// ranges widen to a unit interval.
fn axis_range(lo: Option<f64>, hi: Option<f64>) -> (f64, f64) {
    match (lo, hi) {
        (Some(lo), Some(hi)) if hi > lo => {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
        (Some(lo), Some(_)) => (lo - 1.0, lo + 1.0),
        _ => (0.0, 1.0),
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_contains_one_polyline_per_series() {
        let times: Vec<f64> = (0..100).map(|i| i as f64 * 0.1).collect();
        let series = vec![
            ("a".to_string(), times.iter().map(|t| t.sin()).collect::<Vec<_>>()),
            ("b".to_string(), times.iter().map(|t| t.cos()).collect::<Vec<_>>()),
        ];
        let svg = line_chart("demo", &times, &series);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("<svg"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn long_series_are_decimated_but_keep_the_endpoint() {
        let count = 50_000;
        let times: Vec<f64> = (0..count).map(|i| i as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| t * 2.0).collect();
        let svg = line_chart("big", &times, &[("x".to_string(), values)]);
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let points = line.split("points=\"").nth(1).unwrap();
        let count_pts = points.split_whitespace().count();
        assert!(count_pts <= MAX_POINTS_PER_LINE + 1, "{count_pts} points");
        // The final sample lands on the right edge of the plot frame.
        let last = points.trim_end_matches("\"/>").split_whitespace().last().unwrap();
        let x: f64 = last.split(',').next().unwrap().parse().unwrap();
        assert!((x - (WIDTH - MARGIN_RIGHT)).abs() < 40.0);
    }

    #[test]
    fn degenerate_ranges_still_render() {
        let svg = line_chart("flat", &[0.0, 1.0], &[("c".to_string(), vec![3.0, 3.0])]);
        assert!(svg.contains("<polyline"));
        let svg = line_chart("empty", &[], &[]);
        assert!(svg.contains("</svg>"));
    }

    #[test]
    fn labels_are_escaped() {
        let svg = line_chart("a<b&c", &[0.0, 1.0], &[("x<y".to_string(), vec![0.0, 1.0])]);
        assert!(svg.contains("a&lt;b&amp;c"));
        assert!(svg.contains("x&lt;y"));
    }

    #[test]
    fn tick_labels_cover_plain_and_scientific_ranges() {
        assert_eq!(fmt_tick(0.0), "0");
        assert_eq!(fmt_tick(2.5), "2.5");
        assert_eq!(fmt_tick(-3.0), "-3");
        assert!(fmt_tick(1.23e-7).contains('e'));
        assert!(fmt_tick(4.56e9).contains('e'));
    }
}
