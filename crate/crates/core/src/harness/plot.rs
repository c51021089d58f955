//! Static SVG scatter plots of a nerve's vertices and edges. Points in three
//! dimensions are drawn in an oblique projection.

use std::fmt::Write as _;

use crate::complex::SimplicialComplex;
use crate::geometry::PointCloud;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;

fn project(p: &[f64]) -> (f64, f64) {
    match p.len() {
        0 => (0.0, 0.0),
        1 => (p[0], 0.0),
        2 => (p[0], p[1]),
        _ => (p[0] + 0.35 * p[2], p[1] + 0.2 * p[2]),
    }
}

/// SVG document with one dot per point and one segment per edge of `k`.
pub fn nerve_svg(points: &PointCloud, k: &SimplicialComplex) -> String {
    let planar: Vec<(f64, f64)> = points.iter().map(project).collect();
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &planar {
        lo_x = lo_x.min(x);
        hi_x = hi_x.max(x);
        lo_y = lo_y.min(y);
        hi_y = hi_y.max(y);
    }
    let span = (hi_x - lo_x).max(hi_y - lo_y).max(f64::MIN_POSITIVE);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let to_px = |(x, y): (f64, f64)| (MARGIN + (x - lo_x) * scale, SIZE - MARGIN - (y - lo_y) * scale);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<g stroke=\"#4a78b5\" stroke-width=\"0.4\" stroke-opacity=\"0.5\">\n"
    );
    if k.d_max() >= 1 {
        for e in k.iter(1) {
            let (a, b) = (to_px(planar[e[0] as usize]), to_px(planar[e[1] as usize]));
            let _ = writeln!(svg, "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>", a.0, a.1, b.0, b.1);
        }
    }
    svg.push_str("</g>\n<g fill=\"#222\">\n");
    for &p in &planar {
        let (x, y) = to_px(p);
        let _ = writeln!(svg, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.5\"/>");
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}
