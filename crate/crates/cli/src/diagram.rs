//! Minimal SVG reliability diagram.

use std::fmt::Write;

use ascal::EceReport;

const SIZE: f64 = 400.0;
const MARGIN: f64 = 50.0;

fn x(conf: f64) -> f64 {
    // confidence axis spans [0.5, 1]
    MARGIN + (conf - 0.5) * 2.0 * SIZE
}

fn y(acc: f64) -> f64 {
    MARGIN + (1.0 - acc) * SIZE
}

/// Accuracy bars per confidence bin against the `accuracy = confidence`
/// diagonal. One series per report; the first is drawn filled.
pub fn reliability_svg(series: &[(&str, &EceReport)]) -> String {
    let total = SIZE + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="4 4"/>"#,
        x(0.5),
        y(0.5),
        x(1.0),
        y(1.0)
    );
    let colors = ["#1f77b4", "#d62728", "#2ca02c"];
    for (k, (label, report)) in series.iter().enumerate() {
        let color = colors[k % colors.len()];
        let (fill, opacity) = if k == 0 { (color, 0.5) } else { ("none", 1.0) };
        for bin in &report.bins {
            let Some(acc) = bin.accuracy else { continue };
            let (x0, x1) = (x(bin.lo), x(bin.hi.max(bin.lo + 1e-3)));
            let top = y(acc);
            let _ = writeln!(
                s,
                r#"<rect x="{x0:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{fill}" fill-opacity="{opacity}" stroke="{color}"/>"#,
                x1 - x0,
                (MARGIN + SIZE - top).max(0.0)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{label} (ECE {:.4})</text>"#,
            MARGIN + 8.0,
            MARGIN + 16.0 + 14.0 * k as f64,
            report.ece
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">confidence</text>"#,
        MARGIN + SIZE / 2.0,
        total - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">accuracy</text>"#,
        MARGIN + SIZE / 2.0,
        MARGIN + SIZE / 2.0
    );
    s.push_str("</svg>\n");
    s
}
