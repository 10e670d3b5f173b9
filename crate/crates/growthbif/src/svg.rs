//! Static SVG emitters: the bifurcation diagram and domain outlines.

use std::fmt::Write as _;
use std::path::Path;

use crate::continuation::Branch;
use crate::error::Result;
use crate::geometry::{self, ShapeCoeffs};
use crate::spectrum::BifurcationPoint;

const W: f64 = 760.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;

struct Frame {
    gmin: f64,
    gmax: f64,
    emin: f64,
    emax: f64,
}

impl Frame {
    fn x(&self, g: f64) -> f64 {
        MARGIN + (g - self.gmin) / (self.gmax - self.gmin) * (W - 2.0 * MARGIN)
    }
    fn y(&self, e: f64) -> f64 {
        H - MARGIN - (e - self.emin) / (self.emax - self.emin) * (H - 2.0 * MARGIN)
    }
}

/// Bifurcation diagram: G horizontally, branch amplitude vertically;
/// the trivial family is the axis, catalog entries are marked on it,
/// traced branches leave it at their origin values.
pub fn emit_diagram(catalog: &[BifurcationPoint], branches: &[Branch], path: &Path) -> Result<()> {
    let mut gs: Vec<f64> = catalog.iter().map(|p| p.g).collect();
    let mut es: Vec<f64> = vec![0.0];
    for b in branches {
        for p in &b.points {
            gs.push(p.g);
            es.push(p.eps);
        }
    }
    if gs.is_empty() {
        gs.push(1.0);
    }
    let gmin = gs.iter().cloned().fold(f64::INFINITY, f64::min);
    let gmax = gs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let emax = es.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
    let gpad = 0.08 * (gmax - gmin).max(1.0);
    let epad = 0.15 * emax.max(1e-3);
    let fr = Frame {
        gmin: gmin - gpad,
        gmax: gmax + gpad,
        emin: -(emax + epad),
        emax: emax + epad,
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    // axes
    let y0 = fr.y(0.0);
    let _ = writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{y0}\" x2=\"{}\" y2=\"{y0}\" stroke=\"#444\" stroke-width=\"1.5\"/>",
        fr.x(fr.gmin),
        fr.x(fr.gmax)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" fill=\"#222\">G</text>",
        W - MARGIN + 14.0,
        y0 + 4.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" fill=\"#222\">amplitude</text>",
        8.0,
        MARGIN - 10.0
    );
    // trivial family label
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#888\">trivial family</text>",
        fr.x(fr.gmin) + 4.0,
        y0 - 6.0
    );
    // catalog marks
    for p in catalog {
        let x = fr.x(p.g);
        let _ = writeln!(
            svg,
            "<circle cx=\"{x}\" cy=\"{y0}\" r=\"4\" fill=\"#c0392b\"/>"
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\" fill=\"#c0392b\">\
             G_{}</text>",
            y0 + 18.0,
            p.mode
        );
    }
    // branches
    let colors = ["#2457a8", "#1e8449", "#7d3c98", "#b9770e"];
    for (i, b) in branches.iter().enumerate() {
        let color = colors[i % colors.len()];
        let pts: Vec<String> = b
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", fr.x(p.g), fr.y(p.eps)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            pts.join(" ")
        );
        if let Some(last) = b.points.last() {
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">mode {}</text>",
                fr.x(last.g) + 6.0,
                fr.y(last.eps),
                b.mode()
            );
        }
    }
    let _ = writeln!(svg, "</svg>");
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, svg)?;
    Ok(())
}

/// Domain outline: the boundary curve of a shape next to the reference
/// circle of radius R_A.
pub fn emit_outline(shape: &ShapeCoeffs, r_a: f64, path: &Path) -> Result<()> {
    let size = 420.0;
    let c = size / 2.0;
    let scale = (size / 2.0 - 20.0) / (r_a * 1.35);
    let n = 512;
    let mut curve = Vec::with_capacity(n + 1);
    let mut circle = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let (x, y) = geometry::chart(shape, r_a, 1.0, t)?;
        curve.push(format!("{:.2},{:.2}", c + scale * x, c - scale * y));
        circle.push(format!(
            "{:.2},{:.2}",
            c + scale * r_a * t.cos(),
            c - scale * r_a * t.sin()
        ));
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" \
         viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>",
        circle.join(" ")
    );
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#2457a8\" stroke-width=\"2\"/>",
        curve.join(" ")
    );
    let _ = writeln!(svg, "</svg>");
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagram_with_marks_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.svg");
        let catalog = vec![
            BifurcationPoint {
                mode: 2,
                l: 2,
                k: 1,
                g: 174.8,
            },
            BifurcationPoint {
                mode: 4,
                l: 2,
                k: 2,
                g: 953.2,
            },
            BifurcationPoint {
                mode: 6,
                l: 2,
                k: 3,
                g: 2782.3,
            },
        ];
        emit_diagram(&catalog, &[], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("<circle").count(), 3);
        assert!(text.contains("trivial family"));
    }

    #[test]
    fn outline_of_circle_and_flower() {
        let dir = tempfile::tempdir().unwrap();
        let zero = ShapeCoeffs::zero(2, 2);
        emit_outline(&zero, 1.0, &dir.path().join("circle.svg")).unwrap();
        let flower = ShapeCoeffs::new(4, vec![0.0, 0.12]).unwrap();
        emit_outline(&flower, 1.0, &dir.path().join("flower.svg")).unwrap();
        assert!(dir.path().join("circle.svg").exists());
        assert!(dir.path().join("flower.svg").exists());
    }
}
