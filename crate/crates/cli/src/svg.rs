//! Deterministic SVG scatter plots: points as small circles colored by
//! label, boundary members emphasized, balance vectors as short segments.
//!
//! The renderer is a pure function of the scene — no timestamps, no
//! randomness, fixed float formatting — so the same scene always produces
//! byte-identical output. Regenerated clusters are plotted by passing the
//! pooled points with their cluster ids as labels.

use std::fmt::Write as _;

use boundclust::boundary::BoundarySet;
use boundclust::geometry::Point;

/// Canvas is square: `SIZE` x `SIZE` pixels with a `MARGIN` border.
pub const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;

/// Qualitative 12-color palette; labels wrap around it.
const PALETTE: [&str; 12] = [
    "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#eeca3b",
    "#b279a2", "#ff9da6", "#9d755d", "#5778a4", "#8cd17d", "#d67195",
];
const NOISE_COLOR: &str = "#999999";
const MUTED_COLOR: &str = "#cccccc";
const EMPHASIS_STROKE: &str = "#1a1a1a";

const POINT_RADIUS: f64 = 1.6;
const BOUNDARY_RADIUS: f64 = 3.0;
/// On-canvas length of a balance-vector segment, in pixels.
const BALANCE_LENGTH: f64 = 14.0;

/// What to draw. Geometry beyond two dimensions is projected onto the first
/// two coordinates; the caller is responsible for warning about that.
pub struct Scene<'a> {
    /// Base scatter, drawn first.
    pub points: &'a [Point],
    /// Per-point color labels (negative = noise grey). `None` = all one color.
    pub labels: Option<&'a [i64]>,
    /// Draw the base scatter in light grey regardless of labels, so overlays
    /// stand out.
    pub muted: bool,
    /// Boundary overlays, colored by the accompanying cluster id and drawn
    /// emphasized on top of the scatter.
    pub boundaries: &'a [(u64, BoundarySet)],
    /// Draw each boundary member's balance vector as a short segment.
    pub balance: bool,
}

fn color_for(label: i64) -> &'static str {
    if label < 0 {
        NOISE_COLOR
    } else {
        PALETTE[(label as u64 % PALETTE.len() as u64) as usize]
    }
}

/// Render the scene to an SVG document. An empty scene yields a valid empty
/// canvas.
pub fn render(scene: &Scene) -> String {
    let mut xy: Vec<(f64, f64)> = Vec::new();
    for p in scene.points {
        xy.push(project(p));
    }
    let boundary_xy: Vec<Vec<(f64, f64)>> = scene
        .boundaries
        .iter()
        .map(|(_, set)| set.members().iter().map(|m| project(&m.point)).collect())
        .collect();

    let mut doc = String::new();
    let _ = writeln!(
        doc,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" \
         viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let _ = writeln!(doc, "<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"#ffffff\"/>");

    let everything = xy.iter().chain(boundary_xy.iter().flatten());
    if let Some(map) = Mapping::fit(everything) {
        let _ = writeln!(doc, "<g stroke=\"none\">");
        for (i, &(x, y)) in xy.iter().enumerate() {
            let fill = if scene.muted {
                MUTED_COLOR
            } else {
                color_for(scene.labels.map_or(0, |l| l[i]))
            };
            let (px, py) = map.apply(x, y);
            let _ = writeln!(
                doc,
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"{POINT_RADIUS}\" fill=\"{fill}\"/>"
            );
        }
        let _ = writeln!(doc, "</g>");

        if scene.balance {
            let _ = writeln!(
                doc,
                "<g stroke=\"{EMPHASIS_STROKE}\" stroke-width=\"0.8\">"
            );
            for ((_, set), projected) in scene.boundaries.iter().zip(&boundary_xy) {
                for (member, &(x, y)) in set.members().iter().zip(projected) {
                    let (bx, by) = project(&member.balance);
                    if bx == 0.0 && by == 0.0 {
                        continue;
                    }
                    let (px, py) = map.apply(x, y);
                    // Balance vectors are unit length; draw at fixed pixel
                    // length, flipping y to match screen coordinates.
                    let (qx, qy) = (px + bx * BALANCE_LENGTH, py - by * BALANCE_LENGTH);
                    let _ = writeln!(
                        doc,
                        "<line x1=\"{px:.2}\" y1=\"{py:.2}\" x2=\"{qx:.2}\" y2=\"{qy:.2}\"/>"
                    );
                }
            }
            let _ = writeln!(doc, "</g>");
        }

        if !scene.boundaries.is_empty() {
            let _ = writeln!(
                doc,
                "<g stroke=\"{EMPHASIS_STROKE}\" stroke-width=\"1\">"
            );
            for ((id, _), projected) in scene.boundaries.iter().zip(&boundary_xy) {
                let fill = color_for(*id as i64);
                for &(x, y) in projected {
                    let (px, py) = map.apply(x, y);
                    let _ = writeln!(
                        doc,
                        "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"{BOUNDARY_RADIUS}\" \
                         fill=\"{fill}\"/>"
                    );
                }
            }
            let _ = writeln!(doc, "</g>");
        }
    }

    doc.push_str("</svg>\n");
    doc
}

fn project(p: &[f64]) -> (f64, f64) {
    (
        p.first().copied().unwrap_or(0.0),
        p.get(1).copied().unwrap_or(0.0),
    )
}

/// Uniform-scale data-to-canvas transform, centered in the drawable area.
struct Mapping {
    scale: f64,
    x_offset: f64,
    y_offset: f64,
}

impl Mapping {
    fn fit<'a>(xy: impl Iterator<Item = &'a (f64, f64)>) -> Option<Mapping> {
        let mut lo = (f64::INFINITY, f64::INFINITY);
        let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut any = false;
        for &(x, y) in xy {
            any = true;
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        if !any {
            return None;
        }
        let (dx, dy) = (hi.0 - lo.0, hi.1 - lo.1);
        let span = dx.max(dy).max(1e-12);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        // Center the tight bounding box inside the canvas; y flips so the
        // data's y axis points up on screen.
        Some(Mapping {
            scale,
            x_offset: MARGIN + (SIZE - 2.0 * MARGIN - dx * scale) / 2.0 - lo.0 * scale,
            y_offset: SIZE - (MARGIN + (SIZE - 2.0 * MARGIN - dy * scale) / 2.0) + lo.1 * scale,
        })
    }

    fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (
            x * self.scale + self.x_offset,
            self.y_offset - y * self.scale,
        )
    }
}
