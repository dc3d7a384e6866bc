use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::ExperimentError;
use crate::stats::GenerationStats;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

type Field = fn(&GenerationStats) -> f64;

const SERIES: [(&str, &str, Field); 4] = [
    ("max", "#d62728", |s| s.max),
    ("mean", "#1f77b4", |s| s.mean),
    ("median", "#2ca02c", |s| s.median),
    ("min", "#9467bd", |s| s.min),
];

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64) -> Self {
        if hi > lo {
            Self { lo, hi }
        } else {
            Self {
                lo: lo - 1.0,
                hi: hi + 1.0,
            }
        }
    }

    fn scale(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

/// Line chart of max, mean, median and min fitness against generation.
pub fn render_svg(rows: &[GenerationStats]) -> Result<String, ExperimentError> {
    if rows.is_empty() {
        return Err(ExperimentError::EmptySeries);
    }
    let x_axis = Axis::new(
        rows.first().unwrap().generation as f64,
        rows.last().unwrap().generation as f64,
    );
    let y_lo = rows.iter().map(|r| r.min).fold(f64::INFINITY, f64::min);
    let y_hi = rows.iter().map(|r| r.max).fold(f64::NEG_INFINITY, f64::max);
    let y_axis = Axis::new(y_lo, y_hi);
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#
    )
    .unwrap();

    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let gx = x_axis.lo + t * (x_axis.hi - x_axis.lo);
        let px = x_axis.scale(gx, x0, x1);
        writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 20.0,
            format_tick(gx)
        )
        .unwrap();
        let fy = y_axis.lo + t * (y_axis.hi - y_axis.lo);
        let py = y_axis.scale(fy, y0, y1);
        writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            format_tick(fy)
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">generation</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">fitness</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )
    .unwrap();

    for (i, (name, color, value)) in SERIES.iter().enumerate() {
        let points = rows
            .iter()
            .map(|r| {
                format!(
                    "{:.2},{:.2}",
                    x_axis.scale(r.generation as f64, x0, x1),
                    y_axis.scale(value(r), y0, y1)
                )
            })
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(
            svg,
            r#"<polyline class="series" data-name="{name}" points="{points}" fill="none" stroke="{color}" stroke-width="2"/>"#
        )
        .unwrap();
        let ly = TOP + 10.0 + 20.0 * i as f64;
        writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{name}</text>"#,
            x1 + 20.0,
            x1 + 45.0,
            x1 + 52.0,
            ly + 4.0
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn format_tick(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e9 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Writes [`render_svg`] output to `path`. An empty series is an error and
/// leaves no file behind.
pub fn emit_plot(rows: &[GenerationStats], path: impl AsRef<Path>) -> Result<(), ExperimentError> {
    let svg = render_svg(rows)?;
    let path = path.as_ref();
    fs::write(path, svg).map_err(|source| ExperimentError::Write {
        path: path.to_path_buf(),
        source,
    })
}
