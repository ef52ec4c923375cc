//! Heatmap of the global order parameter with transition lines on top.

use std::fmt::Write;

use cubic_mf::{Axis, PhaseDiagram};

const LEFT: f64 = 70.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const RIGHT: f64 = 20.0;
const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 480.0;

const BLUE: [f64; 3] = [0.0, 0.0, 255.0];
const GRAY: [f64; 3] = [128.0, 128.0, 128.0];
const RED: [f64; 3] = [255.0, 0.0, 0.0];

/// Blue at -1, gray at 0, red at +1, linear in between.
pub fn color(m: f64) -> String {
    if !m.is_finite() {
        return "#ffffff".into();
    }
    let m = m.clamp(-1.0, 1.0);
    let (from, to, t) = if m < 0.0 { (GRAY, BLUE, -m) } else { (GRAY, RED, m) };
    let c: Vec<u8> = (0..3).map(|i| (from[i] + (to[i] - from[i]) * t).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace("--", "- -")
}

pub fn render(d: &PhaseDiagram, x: &Axis, y: &Axis, metadata: &[(String, String)]) -> String {
    let cw = PLOT_W / d.nx as f64;
    let ch = PLOT_H / d.ny as f64;
    let width = LEFT + PLOT_W + RIGHT;
    let height = TOP + PLOT_H + BOTTOM;
    // Cell centers sit on the grid values.
    let px = |v: f64| LEFT + cw * (0.5 + (v - x.from) / (x.to - x.from) * (d.nx - 1) as f64);
    let py = |v: f64| TOP + PLOT_H - ch * (0.5 + (v - y.from) / (y.to - y.from) * (d.ny - 1) as f64);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    s.push_str("<!--\n");
    for (k, v) in metadata {
        let _ = writeln!(s, "{} = {}", escape(k), escape(v));
    }
    s.push_str("-->\n");
    s.push_str(r#"<g shape-rendering="crispEdges">"#);
    s.push('\n');
    for iy in 0..d.ny {
        for ix in 0..d.nx {
            let cell = d.cell(ix, iy);
            let fill = if cell.valid { color(cell.m_total) } else { "#ffffff".into() };
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
                LEFT + ix as f64 * cw,
                TOP + PLOT_H - (iy + 1) as f64 * ch,
                cw,
                ch
            );
        }
    }
    s.push_str("</g>\n");
    for line in &d.polylines {
        let pts: Vec<String> = line.iter().map(|&(a, b)| format!("{:.3},{:.3}", px(a), py(b))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2" stroke-linecap="round"/>"#,
            pts.join(" ")
        );
    }
    let _ =
        writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{PLOT_W}" height="{PLOT_H}" fill="none" stroke="black"/>"#);
    let axis_y = TOP + PLOT_H;
    let _ =
        writeln!(s, r#"<text x="{LEFT}" y="{}" font-size="12" text-anchor="start">{}</text>"#, axis_y + 16.0, x.from);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{}</text>"#,
        LEFT + PLOT_W,
        axis_y + 16.0,
        x.to
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">{}</text>"#,
        LEFT + PLOT_W / 2.0,
        axis_y + 38.0,
        escape(&x.label())
    );
    let _ = writeln!(s, r#"<text x="{}" y="{axis_y}" font-size="12" text-anchor="end">{}</text>"#, LEFT - 6.0, y.from);
    let _ =
        writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{}</text>"#, LEFT - 6.0, TOP + 12.0, y.to);
    let (lx, ly) = (LEFT - 40.0, TOP + PLOT_H / 2.0);
    let _ = writeln!(
        s,
        r#"<text x="{lx}" y="{ly}" font-size="14" text-anchor="middle" transform="rotate(-90 {lx} {ly})">{}</text>"#,
        escape(&y.label())
    );
    s.push_str("</svg>\n");
    s
}
