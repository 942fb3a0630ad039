//! Minimal log-log line chart. Output depends only on the inputs.

use std::fmt::Write as _;

use super::fit::SlopeFit;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    /// `(n, regret)`; non-positive values are skipped.
    pub points: Vec<(usize, f64)>,
    pub fit: Option<SlopeFit>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, n: f64) -> f64 {
        MARGIN + (n.log10() - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (v.log10() - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn widen(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

pub fn emit_svg(series: &[PlotSeries], title: &str) -> Result<String> {
    let usable: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|p| p.0 > 0 && p.1 > 0.0 && p.1.is_finite())
                .map(|&(n, v)| (n as f64, v))
                .collect()
        })
        .collect();
    let all: Vec<(f64, f64)> = usable.iter().flatten().copied().collect();
    if all.is_empty() {
        return Err(Error::EmptyInput);
    }
    let lx: Vec<f64> = all.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = all.iter().map(|p| p.1.log10()).collect();
    let (x0, x1) = widen(
        lx.iter().cloned().fold(f64::INFINITY, f64::min),
        lx.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = widen(
        ly.iter().cloned().fold(f64::INFINITY, f64::min).floor(),
        ly.iter().cloned().fold(f64::NEG_INFINITY, f64::max).ceil(),
    );
    let ax = Axes { x0, x1, y0, y1 };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<g stroke="black" fill="none"><line x1="{m}" y1="{b:.2}" x2="{r:.2}" y2="{b:.2}"/><line x1="{m}" y1="{m}" x2="{m}" y2="{b:.2}"/></g>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for e in (y0 as i64)..=(y1 as i64) {
        let y = ax.py(10f64.powi(e as i32));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"#,
            MARGIN - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">n (log scale)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let mut ticks: Vec<f64> = all.iter().map(|p| p.0).collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for n in ticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{n}</text>"#,
            ax.px(n),
            HEIGHT - MARGIN + 16.0
        );
    }

    for (i, (serie, pts)) in series.iter().zip(&usable).enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        if pts.is_empty() {
            continue;
        }
        let path: Vec<String> = pts.iter().map(|&(n, v)| format!("{:.2},{:.2}", ax.px(n), ax.py(v))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        for &(n, v) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, ax.px(n), ax.py(v));
        }
        let mut label = escape(&serie.label);
        if let Some(fit) = &serie.fit {
            let line: Vec<String> = pts
                .iter()
                .map(|&(n, _)| format!("{:.2},{:.2}", ax.px(n), ax.py(fit.predict(n))))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-dasharray="5,4" points="{}"/>"#,
                line.join(" ")
            );
            let _ = write!(label, " slope {:.3} ± {:.3}", fit.slope, fit.slope_se);
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" fill="{colour}">{label}</text>"#,
            WIDTH - MARGIN - 220.0,
            MARGIN + 16.0 * i as f64
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fit::{fit_slope, Correction};

    fn sample() -> Vec<PlotSeries> {
        let points: Vec<_> = [100usize, 1000, 10000].iter().map(|&n| (n, (n as f64).powf(-1.5))).collect();
        let fit = fit_slope(&points, Correction::None).unwrap();
        vec![PlotSeries {
            label: "lcb <demo>".into(),
            points,
            fit: Some(fit),
        }]
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(emit_svg(&[], "x").unwrap_err(), Error::EmptyInput);
        let s = PlotSeries {
            label: "z".into(),
            points: vec![(10, 0.0)],
            fit: None,
        };
        assert_eq!(emit_svg(&[s], "x").unwrap_err(), Error::EmptyInput);
    }

    #[test]
    fn output_is_valid_xml() {
        let svg = emit_svg(&sample(), "regret & fit").unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 3);
        assert!(svg.contains("slope -1.500"));
    }

    #[test]
    fn output_is_byte_stable() {
        assert_eq!(emit_svg(&sample(), "t").unwrap(), emit_svg(&sample(), "t").unwrap());
    }
}
