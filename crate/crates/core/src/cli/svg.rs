//! Static SVG renderings of curve data.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Murphy,
    Reliability,
    Roc,
    Pr,
    Performance,
    McbDsc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn line(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            name: name.into(),
            points,
            style: Style::Line,
        }
    }

    pub fn markers(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            name: name.into(),
            points,
            style: Style::Markers,
        }
    }
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#e66100", "#000000", "#1f5fbf", "#d6338a", "#2a9d3a", "#7b4fb0", "#8c6d1f", "#6b6b6b",
];

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }

    fn path(&self, pts: &[(f64, f64)]) -> String {
        pts.iter()
            .enumerate()
            .map(|(i, &(x, y))| format!("{}{:.2},{:.2}", if i == 0 { "M" } else { "L" }, self.px(x), self.py(y)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn labels(kind: PlotKind) -> (&'static str, &'static str, &'static str) {
    match kind {
        PlotKind::Murphy => ("Murphy diagram", "decision threshold", "mean elementary score"),
        PlotKind::Reliability => (
            "Reliability diagram",
            "forecast probability",
            "recalibrated probability",
        ),
        PlotKind::Roc => ("ROC curve", "false alarm rate", "hit rate"),
        PlotKind::Pr => ("Precision-recall curve", "recall", "precision"),
        PlotKind::Performance => ("Performance diagram", "success ratio", "probability of detection"),
        PlotKind::McbDsc => ("Miscalibration-discrimination diagram", "MCB", "DSC"),
    }
}

fn finite_points(series: &[Series]) -> impl Iterator<Item = (f64, f64)> + '_ {
    series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
}

fn nice_max(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&c| c >= v)
        .unwrap_or(10.0 * mag)
}

/// Renders `series` as a self-contained SVG document with the reference
/// geometry of the plot kind. `uncertainty` is used by the MCB–DSC diagram
/// to place iso-score lines.
pub fn emit_svg(kind: PlotKind, series: &[Series], uncertainty: Option<f64>) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::Validation("no curve data to plot".into()));
    }
    let frame = match kind {
        PlotKind::Murphy => {
            let ymax = finite_points(series).map(|p| p.1).fold(0.0, f64::max);
            Frame {
                x: (0.0, 1.0),
                y: (0.0, nice_max(ymax)),
            }
        }
        PlotKind::McbDsc => {
            let m = finite_points(series).map(|(x, y)| x.max(y)).fold(0.0, f64::max);
            let m = nice_max(m * 1.05);
            Frame {
                x: (0.0, m),
                y: (0.0, m),
            }
        }
        _ => Frame {
            x: (0.0, 1.0),
            y: (0.0, 1.0),
        },
    };

    let (title, xl, yl) = labels(kind);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" font-size="15" text-anchor="middle">{title}</text>"#,
        (LEFT + W - RIGHT) / 2.0
    );

    // reference geometry, clipped to the plot area
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{}" height="{}"/></clipPath></defs>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    let _ = writeln!(
        s,
        r##"<g clip-path="url(#plot)" fill="none" stroke="#bbbbbb" stroke-width="1">"##
    );
    match kind {
        PlotKind::Reliability | PlotKind::Roc => {
            let _ = writeln!(
                s,
                r#"<path d="{}" stroke-dasharray="4 3"/>"#,
                frame.path(&[(0.0, 0.0), (1.0, 1.0)])
            );
        }
        PlotKind::Performance => {
            for csi in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
                let pts: Vec<(f64, f64)> = (1..=200)
                    .map(|i| i as f64 / 200.0)
                    .filter_map(|sr| {
                        let pod = 1.0 / (1.0 / csi - 1.0 / sr + 1.0);
                        (pod > 0.0 && pod <= 1.0).then_some((sr, pod))
                    })
                    .collect();
                if pts.len() > 1 {
                    let _ = writeln!(s, r#"<path d="{}"/>"#, frame.path(&pts));
                }
            }
            for fb in [0.25, 0.5, 1.0, 2.0, 4.0] {
                let end = if fb >= 1.0 { (1.0 / fb, 1.0) } else { (1.0, fb) };
                let _ = writeln!(
                    s,
                    r#"<path d="{}" stroke-dasharray="2 4"/>"#,
                    frame.path(&[(0.0, 0.0), end])
                );
            }
        }
        PlotKind::McbDsc => {
            // iso-score lines DSC = MCB + UNC − S
            let m = frame.x.1;
            for k in -10..=10 {
                let c = k as f64 * m / 10.0;
                let _ = writeln!(
                    s,
                    r#"<path d="{}" stroke-dasharray="3 3"/>"#,
                    frame.path(&[(0.0, c), (m, m + c)])
                );
                // label lines entering through the left edge with their mean score
                if let (Some(unc), true) = (uncertainty, c > 0.0 && c < m) {
                    let _ = writeln!(
                        s,
                        r##"<text x="{:.2}" y="{:.2}" fill="#888888" stroke="none" font-size="9">{}</text>"##,
                        frame.px(0.0) + 3.0,
                        frame.py(c) - 3.0,
                        fmt_tick(unc - c)
                    );
                }
            }
        }
        PlotKind::Murphy | PlotKind::Pr => {}
    }
    let _ = writeln!(s, "</g>");

    // axes with five ticks each
    let _ = writeln!(
        s,
        r#"<g stroke="black" fill="none"><rect x="{LEFT}" y="{TOP}" width="{}" height="{}"/></g>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for i in 0..=5 {
        let tx = frame.x.0 + (frame.x.1 - frame.x.0) * i as f64 / 5.0;
        let ty = frame.y.0 + (frame.y.1 - frame.y.0) * i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            frame.px(tx),
            H - BOTTOM + 16.0,
            fmt_tick(tx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            frame.py(ty) + 4.0,
            fmt_tick(ty)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{xl}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 18.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{yl}</text>"#,
        (TOP + H - BOTTOM) / 2.0
    );

    let _ = writeln!(s, r#"<g clip-path="url(#plot)">"#);
    for (i, series) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = series
            .points
            .iter()
            .copied()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        match series.style {
            Style::Line => {
                if !pts.is_empty() {
                    let _ = writeln!(
                        s,
                        r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
                        frame.path(&pts)
                    );
                }
            }
            Style::Markers => {
                for &(x, y) in &pts {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#,
                        frame.px(x),
                        frame.py(y)
                    );
                }
            }
        }
    }
    let _ = writeln!(s, "</g>");

    // legend
    for (i, series) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = W - RIGHT + 12.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{color}"/>"#,
            y - 9.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{y}">{}</text>"#, x + 18.0, escape(&series.name));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn fmt_tick(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    format!("{r}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_data_rejected() {
        assert!(emit_svg(PlotKind::Roc, &[], None).is_err());
        assert!(emit_svg(PlotKind::Roc, &[Series::line("a", vec![])], None).is_err());
    }

    #[test]
    fn zero_murphy_curve_is_flat() {
        let svg = emit_svg(
            PlotKind::Murphy,
            &[Series::line("zero", vec![(0.0, 0.0), (1.0, 0.0)])],
            None,
        )
        .unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("M70.00,420.00 L470.00,420.00"));
    }

    #[test]
    fn reliability_points_and_diagonal() {
        let svg = emit_svg(
            PlotKind::Reliability,
            &[Series::markers("two-level", vec![(0.25, 0.25), (0.5, 0.5)])],
            None,
        )
        .unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("stroke-dasharray=\"4 3\""));
    }

    #[test]
    fn legend_escapes_names() {
        let svg = emit_svg(PlotKind::Pr, &[Series::line("A<B", vec![(0.1, 0.2)])], None).unwrap();
        assert!(svg.contains("A&lt;B"));
    }
}
