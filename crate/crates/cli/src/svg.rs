//! Minimal self-contained SVG line charts with fixed-precision coordinates,
//! so identical data always yields identical bytes.

use std::fmt::Write as _;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 32.0;
const MARGIN_B: f64 = 44.0;
const LEGEND_ROW: f64 = 16.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl Panel {
    fn is_empty(&self) -> bool {
        self.series.iter().all(|s| s.points.is_empty())
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.05 * (1.0 + lo.abs());
        return (lo - pad, hi + pad);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn draw_panel(out: &mut String, panel: &Panel, ox: f64) {
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let pts = || panel.series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = bounds(pts().map(|p| p.0));
    let (y0, y1) = bounds(pts().map(|p| p.1));
    let sx = |x: f64| ox + MARGIN_L + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

    let _ = writeln!(
        out,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
        ox + MARGIN_L,
        MARGIN_T,
        plot_w,
        plot_h
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        ox + MARGIN_L + plot_w / 2.0,
        escape(&panel.title)
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            out,
            r##"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="#ccc"/><text x="{0:.2}" y="{3:.2}" text-anchor="middle" font-size="10">{4}</text>"##,
            sx(xv),
            MARGIN_T,
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 14.0,
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            r##"<line x1="{0:.2}" y1="{2:.2}" x2="{1:.2}" y2="{2:.2}" stroke="#ccc"/><text x="{3:.2}" y="{4:.2}" text-anchor="end" font-size="10">{5}</text>"##,
            ox + MARGIN_L,
            ox + MARGIN_L + plot_w,
            sy(yv),
            ox + MARGIN_L - 4.0,
            sy(yv) + 3.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
        ox + MARGIN_L + plot_w / 2.0,
        PANEL_H - 8.0,
        escape(&panel.x_label)
    );
    let (lx, ly) = (ox + 14.0, MARGIN_T + plot_h / 2.0);
    let _ = writeln!(
        out,
        r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
        escape(&panel.y_label)
    );

    for (i, s) in panel.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = if s.dashed {
            r#" stroke-dasharray="6 3""#
        } else {
            ""
        };
        if s.points.len() == 1 {
            let (x, y) = s.points[0];
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        } else if !s.points.is_empty() {
            let path: Vec<String> = s
                .points
                .iter()
                .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                path.join(" ")
            );
        }
        let row_y = PANEL_H + 4.0 + LEGEND_ROW * (i as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{row_y:.2}" x2="{:.2}" y2="{row_y:.2}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            ox + MARGIN_L,
            ox + MARGIN_L + 24.0,
            ox + MARGIN_L + 30.0,
            row_y + 4.0,
            escape(&s.label)
        );
    }
}

/// Renders panels side by side. Returns `None` when there is nothing to draw.
pub fn render(panels: &[Panel]) -> Option<String> {
    if panels.is_empty() || panels.iter().all(Panel::is_empty) {
        return None;
    }
    let legend_rows = panels.iter().map(|p| p.series.len()).max().unwrap_or(0);
    let width = PANEL_W * panels.len() as f64;
    let height = PANEL_H + 8.0 + LEGEND_ROW * legend_rows as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, panel) in panels.iter().enumerate() {
        draw_panel(&mut out, panel, PANEL_W * i as f64);
    }
    out.push_str("</svg>\n");
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel() -> Panel {
        Panel {
            title: "action".into(),
            x_label: "alpha".into(),
            y_label: "u".into(),
            series: vec![Series {
                label: "a<b".into(),
                points: vec![(0.0, 1.0), (1.0, 0.5)],
                dashed: false,
            }],
        }
    }

    #[test]
    fn renders_deterministically() {
        let a = render(&[panel(), panel()]).unwrap();
        assert_eq!(a, render(&[panel(), panel()]).unwrap());
        assert!(a.starts_with("<svg"));
        assert!(a.contains("a&lt;b"));
        assert_eq!(a.matches("<polyline").count(), 2);
    }

    #[test]
    fn empty_is_skipped() {
        assert!(render(&[]).is_none());
        let mut p = panel();
        p.series[0].points.clear();
        assert!(render(&[p]).is_none());
    }
}
