//! Static SVG line plots of aggregate CSVs.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::aggregate::{read_aggregate_csv, AggregateRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    /// Cumulative regret against episodes.
    Regret,
    /// Average gap `regret(K') / K'` against episodes.
    Epsilon,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regret" => Ok(PlotKind::Regret),
            "epsilon" => Ok(PlotKind::Epsilon),
            other => Err(Error::InvalidParameter(format!(
                "unknown plot kind `{other}` (expected regret or epsilon)"
            ))),
        }
    }
}

pub const WIDTH: f64 = 720.0;
pub const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

/// Data ranges mapped onto the plot area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotGeometry {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl PlotGeometry {
    pub fn x_px(&self, x: f64) -> f64 {
        LEFT + (x - self.x_range.0) / span(self.x_range) * (WIDTH - LEFT - RIGHT)
    }

    pub fn y_px(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y_range.0) / span(self.y_range) * (HEIGHT - TOP - BOTTOM)
    }
}

fn span((lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        hi - lo
    } else {
        1.0
    }
}

struct Series {
    x: Vec<f64>,
    mid: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn series(rows: &[AggregateRow], kind: PlotKind) -> Series {
    let scale = |r: &AggregateRow| match kind {
        PlotKind::Regret => 1.0,
        PlotKind::Epsilon => 1.0 / r.episode.max(1) as f64,
    };
    Series {
        x: rows.iter().map(|r| r.episode as f64).collect(),
        mid: rows.iter().map(|r| r.mean_regret * scale(r)).collect(),
        lo: rows.iter().map(|r| r.ci_lower * scale(r)).collect(),
        hi: rows.iter().map(|r| r.ci_upper * scale(r)).collect(),
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// Renders one series with its band. The axes span exactly the data extents
/// (band included); a zero-width range is drawn as a unit-wide one.
pub fn render_svg(rows: &[AggregateRow], kind: PlotKind) -> Result<(String, PlotGeometry)> {
    if rows.is_empty() {
        return Err(Error::MalformedCsv("aggregate has no rows".into()));
    }
    let s = series(rows, kind);
    let geom = PlotGeometry {
        x_range: extent(s.x.iter().copied()),
        y_range: extent(s.lo.iter().chain(&s.hi).chain(&s.mid).copied()),
    };
    let pt = |x: f64, y: f64| format!("{:.3},{:.3}", geom.x_px(x), geom.y_px(y));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<g id="axes" data-x-min="{}" data-x-max="{}" data-y-min="{}" data-y-max="{}" stroke="black" stroke-width="1">"#,
        geom.x_range.0, geom.x_range.1, geom.y_range.0, geom.y_range.1
    );
    let (x0, x1) = (geom.x_px(geom.x_range.0), geom.x_px(geom.x_range.1));
    let (y0, y1) = (geom.y_px(geom.y_range.0), geom.y_px(geom.y_range.1));
    let _ = writeln!(
        svg,
        r#"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y0:.3}"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x0:.3}" y2="{y1:.3}"/>"#
    );
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(
        svg,
        r#"<g font-family="sans-serif" font-size="11" fill="black">"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = geom.x_range.0 + t * (geom.x_range.1 - geom.x_range.0);
        let yv = geom.y_range.0 + t * (geom.y_range.1 - geom.y_range.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            geom.x_px(xv),
            y0 + 16.0,
            tick_label(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            geom.y_px(yv) + 4.0,
            tick_label(yv)
        );
    }
    let y_label = match kind {
        PlotKind::Regret => "cumulative robust regret",
        PlotKind::Epsilon => "average gap",
    };
    let _ = writeln!(
        svg,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">episode</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{y_label}</text>"#,
        (x0 + x1) / 2.0,
        TOP - 10.0
    );
    let _ = writeln!(svg, "</g>");

    let band: Vec<String> =
        s.x.iter()
            .zip(&s.hi)
            .map(|(&x, &y)| pt(x, y))
            .chain(s.x.iter().zip(&s.lo).rev().map(|(&x, &y)| pt(x, y)))
            .collect();
    let _ = writeln!(
        svg,
        r##"<polygon class="band" points="{}" fill="#1f77b4" fill-opacity="0.2" stroke="none"/>"##,
        band.join(" ")
    );
    let line: Vec<String> = s.x.iter().zip(&s.mid).map(|(&x, &y)| pt(x, y)).collect();
    let _ = writeln!(
        svg,
        r##"<polyline class="mean" points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##,
        line.join(" ")
    );
    let _ = writeln!(svg, "</svg>");
    Ok((svg, geom))
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// Reads `csv_path`, renders it, and writes `out` only if rendering succeeded.
pub fn emit_plot(
    csv_path: impl AsRef<Path>,
    kind: PlotKind,
    out: impl AsRef<Path>,
) -> Result<PlotGeometry> {
    let rows = read_aggregate_csv(std::fs::File::open(csv_path)?)?;
    let (svg, geom) = render_svg(&rows, kind)?;
    std::fs::write(out, svg)?;
    Ok(geom)
}
