//! Hand-emitted log-log SVG convergence plots: polylines, axes, decade
//! ticks, reference-slope guides and a legend. Byte output is a pure
//! function of the input data.

use std::fmt::Write as _;

/// One plotted series.
pub struct Series {
    pub label: String,
    /// (x, y) pairs; x is h or N, y the energy error. Must be positive.
    pub points: Vec<(f64, f64)>,
}

/// Which variable runs along the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    MeshSize,
    Dofs,
}

impl Axis {
    fn label(self) -> &'static str {
        match self {
            Axis::MeshSize => "h",
            Axis::Dofs => "N",
        }
    }

    /// Reference guide slopes in log-log space.
    fn guide_slopes(self) -> [(f64, &'static str); 2] {
        match self {
            Axis::MeshSize => [(0.5, "h^1/2"), (1.0, "h^1")],
            Axis::Dofs => [(-0.5, "N^-1/2"), (-1.0, "N^-1")],
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders the SVG document. Fails if any coordinate is non-positive
/// (log axes) or no series has data.
pub fn render(series: &[Series], axis: Axis) -> Result<String, String> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err("nothing to plot".into());
    }
    let mut lx_min = f64::INFINITY;
    let mut lx_max = f64::NEG_INFINITY;
    let mut ly_min = f64::INFINITY;
    let mut ly_max = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            if x <= 0.0 || y <= 0.0 {
                return Err(format!("non-positive value ({x}, {y}) on log axes"));
            }
            lx_min = lx_min.min(x.log10());
            lx_max = lx_max.max(x.log10());
            ly_min = ly_min.min(y.log10());
            ly_max = ly_max.max(y.log10());
        }
    }
    // Pad degenerate ranges so a single point still renders.
    if lx_max - lx_min < 1e-9 {
        lx_min -= 0.5;
        lx_max += 0.5;
    }
    if ly_max - ly_min < 1e-9 {
        ly_min -= 0.5;
        ly_max += 0.5;
    }
    let pad = |lo: &mut f64, hi: &mut f64| {
        let d = 0.05 * (*hi - *lo);
        *lo -= d;
        *hi += d;
    };
    pad(&mut lx_min, &mut lx_max);
    pad(&mut ly_min, &mut ly_max);

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x.log10() - lx_min) / (lx_max - lx_min) * plot_w;
    let sy = |y: f64| MARGIN_T + (ly_max - y.log10()) / (ly_max - ly_min) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );

    // Axes.
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    let _ = writeln!(
        out,
        "<path d=\"M {} {} L {} {} L {} {}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>",
        fmt(x0),
        fmt(y1),
        fmt(x0),
        fmt(y0),
        fmt(x1),
        fmt(y0)
    );

    // Decade ticks.
    let mut dec = lx_min.ceil() as i64;
    while (dec as f64) <= lx_max {
        let px = MARGIN_L + (dec as f64 - lx_min) / (lx_max - lx_min) * plot_w;
        let _ = writeln!(
            out,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>",
            fmt(px),
            fmt(y0),
            fmt(y0 + 5.0)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">1e{}</text>",
            fmt(px),
            fmt(y0 + 18.0),
            dec
        );
        dec += 1;
    }
    let mut dec = ly_min.ceil() as i64;
    while (dec as f64) <= ly_max {
        let py = MARGIN_T + (ly_max - dec as f64) / (ly_max - ly_min) * plot_h;
        let _ = writeln!(
            out,
            "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"black\"/>",
            fmt(py),
            fmt(x0 - 5.0),
            fmt(x0)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">1e{}</text>",
            fmt(x0 - 8.0),
            fmt(py + 4.0),
            dec
        );
        dec += 1;
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
        fmt((x0 + x1) / 2.0),
        fmt(HEIGHT - 12.0),
        axis.label()
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">energy error</text>",
        fmt((y0 + y1) / 2.0),
        fmt((y0 + y1) / 2.0)
    );

    // Reference-slope guides anchored at the last point of the first
    // non-empty series.
    if let Some(anchor_series) = series.iter().find(|s| !s.points.is_empty()) {
        let &(ax, ay) = anchor_series.points.last().unwrap();
        for (slope, name) in axis.guide_slopes() {
            let x_lo = 10f64.powf(lx_min + 0.05 * (lx_max - lx_min));
            let x_hi = 10f64.powf(lx_max - 0.05 * (lx_max - lx_min));
            let y_at = |x: f64| ay * (x / ax).powf(slope);
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>",
                fmt(sx(x_lo)),
                fmt(sy(y_at(x_lo))),
                fmt(sx(x_hi)),
                fmt(sy(y_at(x_hi)))
            );
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"#777777\">{}</text>",
                fmt(sx(x_hi) + 3.0),
                fmt(sy(y_at(x_hi))),
                name
            );
        }
    }

    // Data polylines and legend.
    for (k, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = COLORS[k % COLORS.len()];
        let mut d = String::new();
        for &(x, y) in &s.points {
            let _ = write!(d, "{},{} ", fmt(sx(x)), fmt(sy(y)));
        }
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            d.trim_end()
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{color}\"/>",
                fmt(sx(x)),
                fmt(sy(y))
            );
        }
        let ly = MARGIN_T + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            fmt(x1 + 8.0),
            fmt(ly - 4.0),
            fmt(x1 + 28.0)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>",
            fmt(x1 + 33.0),
            fmt(ly),
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
