//! Minimal SVG line chart of node values against iteration.

use std::fmt::Write;

use misaka_core::swarm::PALETTE;
use misaka_core::Trajectory;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;

pub fn trajectory_svg(t: &Trajectory, title: &str) -> String {
    let k = t.iterations_run().max(1) as f64;
    let (mut lo, mut hi) = t
        .states
        .iter()
        .flat_map(|s| s.values().iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let x = |i: usize| MARGIN + i as f64 / k * (WIDTH - 2.0 * MARGIN);
    let y = |v: f64| HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(svg, r#"<text x="{x0}" y="{}" text-anchor="middle">0</text>"#, y0 + 16.0);
    let _ = writeln!(
        svg,
        r#"<text x="{x1}" y="{}" text-anchor="middle">{}</text>"#,
        y0 + 16.0,
        t.iterations_run()
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{y0}" text-anchor="end">{lo:.3}</text>"#, x0 - 4.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{hi:.3}</text>"#, x0 - 4.0, y1 + 4.0);

    for node in 0..t.node_count() {
        let mut d = String::new();
        for (i, s) in t.states.iter().enumerate() {
            let _ = write!(d, "{}{:.2} {:.2}", if i == 0 { "M" } else { " L" }, x(i), y(s.values()[node]));
        }
        let [r, g, b] = PALETTE[node % PALETTE.len()].0;
        let _ = writeln!(
            svg,
            r#"<path d="{d}" fill="none" stroke="rgb({r},{g},{b})" stroke-width="1.5"><title>node {}</title></path>"#,
            node + 1
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
