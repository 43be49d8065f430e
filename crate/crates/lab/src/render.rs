//! Hand-written SVG output: permutation diagrams and coalescent fans.

use std::fmt::Write;

use permuton_lab_core::coalescent::CoalescentProcess;
use permuton_lab_core::Permutation;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 12.0;
/// Trajectories drawn in a coalescent fan.
pub const MAX_TRAJECTORIES: usize = 200;
/// Vertices per drawn trajectory.
const MAX_VERTICES: usize = 1000;

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">
<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    );
}

/// One dot per point `(i, σ(i))` in an `n × n` frame, values increasing
/// upwards.
pub fn diagram_svg(sigma: &Permutation) -> String {
    let n = sigma.len().max(1) as f64;
    let inner = SIZE - 2.0 * MARGIN;
    let cell = inner / n;
    let r = (cell * 0.35).clamp(0.4, 6.0);
    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    let _ = writeln!(out, r#"<rect x="{MARGIN}" y="{MARGIN}" width="{inner}" height="{inner}" fill="none" stroke="black" stroke-width="1"/>"#);
    out.push_str("<g fill=\"black\">\n");
    for (i, &v) in sigma.values().iter().enumerate() {
        let x = MARGIN + (i as f64 + 0.5) * cell;
        let y = MARGIN + (n - v as f64 + 0.5) * cell;
        let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r:.3}"/>"#);
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Indices `0..n` thinned to at most `m` evenly spaced ones, keeping both ends.
fn thin(n: usize, m: usize) -> Vec<usize> {
    if n <= m {
        return (0..n).collect();
    }
    let mut v: Vec<usize> = (0..m).map(|i| i * (n - 1) / (m - 1)).collect();
    v.dedup();
    v
}

/// Trajectories `s ↦ Z^{(t)}_s` for a spread of start times, with time on the
/// horizontal axis and the zero level marked.
pub fn coalescent_svg(p: &CoalescentProcess) -> String {
    let n = p.n();
    let starts = thin(n, MAX_TRAJECTORIES);
    let paths: Vec<(usize, Vec<i64>)> = starts.iter().map(|&t| (t, p.trajectory(t))).collect();
    let (lo, hi) = paths
        .iter()
        .flat_map(|(_, z)| z.iter())
        .fold((0i64, 0i64), |(lo, hi), &z| (lo.min(z), hi.max(z)));
    let span = (hi - lo).max(1) as f64;
    let inner = SIZE - 2.0 * MARGIN;
    let sx = inner / (n.max(2) - 1) as f64;
    let sy = inner / span;
    let px = |s: usize| MARGIN + s as f64 * sx;
    let py = |z: i64| MARGIN + (hi - z) as f64 * sy;

    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN}" y1="{y:.3}" x2="{x2}" y2="{y:.3}" stroke="gray" stroke-width="0.5" stroke-dasharray="4 3"/>"#,
        y = py(0),
        x2 = SIZE - MARGIN
    );
    out.push_str("<g fill=\"none\" stroke=\"black\" stroke-width=\"0.6\" stroke-opacity=\"0.6\">\n");
    for (t, z) in &paths {
        let mut pts = String::new();
        for i in thin(z.len(), MAX_VERTICES) {
            let _ = write!(pts, "{:.2},{:.2} ", px(t + i), py(z[i]));
        }
        let _ = writeln!(out, r#"<polyline points="{}"/>"#, pts.trim_end());
    }
    out.push_str("</g>\n</svg>\n");
    out
}
