//! Synthetic 2-D scenes and CSV ingestion.
//!
//! The generators produce the kinds of shapes the rest of the pipeline is
//! exercised against: Gaussian blobs, uniform disks, rings, a hook-shaped
//! crescent with a concave gap, and a rectangle with a hole punched out.
//! Every shape draws from its own seeded stream, so a scene is reproducible
//! point-for-point regardless of what else ran before it.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Gaussian blobs are truncated at this many standard deviations so a shape
/// has a definite footprint instead of a vanishing tail.
pub const BLOB_TRUNCATION: f64 = 2.2;

/// Inner radius of an annulus, as a fraction of its outer (`scale`) radius.
pub const ANNULUS_INNER_FRACTION: f64 = 0.7;

/// Base radius of the crescent spiral at angle zero (multiplied by `scale`).
pub const HOOK_R0: f64 = 0.4;
/// Radial growth of the crescent spiral per full turn (multiplied by `scale`).
pub const HOOK_PITCH: f64 = 0.25;
/// Width of the crescent strip (multiplied by `scale`).
pub const HOOK_THICKNESS: f64 = 0.18;
/// Angular extent of the crescent, in turns.
pub const HOOK_TURNS: f64 = 1.5;

/// Half-width of the rectangle-with-hole along y, relative to `scale`.
const RECT_ASPECT: f64 = 0.7;
/// Radius of the punched-out hole, relative to `scale`.
const RECT_HOLE_RADIUS: f64 = 0.35;

/// The families of shapes [`generate`] knows how to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    /// Uniform ring between `ANNULUS_INNER_FRACTION * scale` and `scale`.
    Annulus,
    /// Isotropic Gaussian with standard deviation `scale`, truncated at
    /// [`BLOB_TRUNCATION`] sigmas.
    Blob,
    /// Hook-shaped spiral strip: one and a half turns of an Archimedean
    /// spiral of strip width [`HOOK_THICKNESS`], leaving a concave gap
    /// between the turns and an empty core.
    Crescent,
    /// Uniform disk of radius `scale`.
    Disk,
    /// Uniform axis-aligned rectangle with a circular hole at its center.
    RectWithHole,
}

/// One shape in a scene: what to sample, where, and how much.
///
/// `rotation` (radians) and `center` place the shape in the plane; `scale`
/// sets its size with a kind-specific meaning (disk radius, blob sigma,
/// annulus outer radius, spiral multiplier, rectangle half-width).
/// `noise_stddev` adds isotropic Gaussian jitter after placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub center: Point,
    pub count: usize,
    pub kind: ShapeKind,
    #[serde(default)]
    pub noise_stddev: f64,
    #[serde(default)]
    pub rotation: f64,
    pub scale: f64,
    pub seed: u64,
}

impl ShapeSpec {
    /// A spec with no rotation and no jitter.
    pub fn new(kind: ShapeKind, center: Point, scale: f64, count: usize, seed: u64) -> Self {
        ShapeSpec {
            center,
            count,
            kind,
            noise_stddev: 0.0,
            rotation: 0.0,
            scale,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.center.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "shape center must be 2-D, got {} coordinates",
                self.center.len()
            )));
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("shape center must be finite".into()));
        }
        if self.count == 0 {
            return Err(Error::InvalidInput("shape count must be at least 1".into()));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::InvalidInput(format!(
                "shape scale must be positive and finite, got {}",
                self.scale
            )));
        }
        if !self.noise_stddev.is_finite() || self.noise_stddev < 0.0 {
            return Err(Error::InvalidInput(format!(
                "noise_stddev must be finite and non-negative, got {}",
                self.noise_stddev
            )));
        }
        if !self.rotation.is_finite() {
            return Err(Error::InvalidInput("rotation must be finite".into()));
        }
        Ok(())
    }
}

/// Sample every spec in order and return the points with ground-truth labels.
///
/// The label of each point is the index of the spec that produced it. Each
/// shape uses `ChaCha8Rng::seed_from_u64(spec.seed)`, so the output is a pure
/// function of the spec list.
pub fn generate(specs: &[ShapeSpec]) -> Result<(Vec<Point>, Vec<i64>)> {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (index, spec) in specs.iter().enumerate() {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let (sin, cos) = spec.rotation.sin_cos();
        for _ in 0..spec.count {
            let local = sample_local(spec.kind, &mut rng);
            let x = spec.scale * local[0];
            let y = spec.scale * local[1];
            let mut world = vec![
                spec.center[0] + cos * x - sin * y,
                spec.center[1] + sin * x + cos * y,
            ];
            if spec.noise_stddev > 0.0 {
                for c in world.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *c += spec.noise_stddev * z;
                }
            }
            points.push(world);
            labels.push(index as i64);
        }
    }
    Ok((points, labels))
}

/// One point of the unit-scale shape, centered at the origin.
fn sample_local(kind: ShapeKind, rng: &mut ChaCha8Rng) -> [f64; 2] {
    match kind {
        ShapeKind::Blob => loop {
            let x: f64 = StandardNormal.sample(rng);
            let y: f64 = StandardNormal.sample(rng);
            if x * x + y * y <= BLOB_TRUNCATION * BLOB_TRUNCATION {
                return [x, y];
            }
        },
        ShapeKind::Disk => loop {
            let x = rng.random_range(-1.0..=1.0);
            let y = rng.random_range(-1.0..=1.0);
            if x * x + y * y <= 1.0 {
                return [x, y];
            }
        },
        ShapeKind::Annulus => loop {
            let x = rng.random_range(-1.0..=1.0);
            let y = rng.random_range(-1.0..=1.0);
            let r2 = x * x + y * y;
            if r2 <= 1.0 && r2 >= ANNULUS_INNER_FRACTION * ANNULUS_INNER_FRACTION {
                return [x, y];
            }
        },
        ShapeKind::Crescent => {
            let theta_max = HOOK_TURNS * 2.0 * std::f64::consts::PI;
            let r_max = HOOK_R0 + HOOK_PITCH * HOOK_TURNS + HOOK_THICKNESS;
            loop {
                let theta = rng.random_range(0.0..theta_max);
                let u = rng.random_range(-HOOK_THICKNESS / 2.0..=HOOK_THICKNESS / 2.0);
                let r = HOOK_R0 + HOOK_PITCH * theta / (2.0 * std::f64::consts::PI) + u;
                // Area-weight by radius, otherwise the outer turn comes out
                // thinner than the inner one.
                if rng.random_range(0.0..r_max) <= r {
                    return [r * theta.cos(), r * theta.sin()];
                }
            }
        }
        ShapeKind::RectWithHole => loop {
            let x = rng.random_range(-1.0..=1.0);
            let y = rng.random_range(-RECT_ASPECT..=RECT_ASPECT);
            if x * x + y * y >= RECT_HOLE_RADIUS * RECT_HOLE_RADIUS {
                return [x, y];
            }
        },
    }
}

/// Four clusters, fifteen thousand points: two disks near each other in the
/// upper left, plus an isolated hook and an isolated disk. `seed` offsets
/// every shape's stream.
///
/// The counts are deliberately generous. Boundary extraction needs a healthy
/// neighbour count to behave — split a sparse scene across several nodes and
/// each node starts marking interior points as boundary, which survives
/// merging and poisons the containment test downstream.
pub fn ds1_like(seed: u64) -> Vec<ShapeSpec> {
    vec![
        ShapeSpec::new(ShapeKind::Disk, vec![-2.0, 2.2], 0.5, 3300, seed),
        ShapeSpec::new(
            ShapeKind::Disk,
            vec![-0.85, 2.0],
            0.5,
            3300,
            seed.wrapping_add(1),
        ),
        ShapeSpec {
            rotation: -1.2,
            ..ShapeSpec::new(
                ShapeKind::Crescent,
                vec![1.6, 1.8],
                1.0,
                4200,
                seed.wrapping_add(2),
            )
        },
        ShapeSpec::new(
            ShapeKind::Disk,
            vec![0.3, -1.6],
            0.7,
            4200,
            seed.wrapping_add(3),
        ),
    ]
}

/// A larger multi-blob scene: three uniform disks of differing radii and one
/// dense Gaussian blob, seventeen thousand points in all.
pub fn ds9_like(seed: u64) -> Vec<ShapeSpec> {
    vec![
        ShapeSpec::new(ShapeKind::Disk, vec![0.0, 0.0], 1.0, 4500, seed),
        ShapeSpec::new(
            ShapeKind::Disk,
            vec![3.0, 0.5],
            0.9,
            4500,
            seed.wrapping_add(1),
        ),
        ShapeSpec::new(
            ShapeKind::Blob,
            vec![1.5, 3.0],
            0.45,
            4200,
            seed.wrapping_add(2),
        ),
        ShapeSpec::new(
            ShapeKind::Disk,
            vec![-2.5, 2.5],
            0.8,
            3800,
            seed.wrapping_add(3),
        ),
    ]
}

/// Render points (optionally with a trailing integer label column) as CSV.
///
/// Coordinates are written with `Display`, which for `f64` emits the shortest
/// decimal form that parses back to the identical bits, so a save/load cycle
/// is lossless. With `write_header`, a `x,y,...[,label]` line is emitted
/// first.
pub fn format_csv(
    points: &[Point],
    labels: Option<&[i64]>,
    write_header: bool,
) -> Result<String> {
    if let Some(labels) = labels {
        if labels.len() != points.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} points",
                labels.len(),
                points.len()
            )));
        }
    }
    let dim = points.first().map_or(0, |p| p.len());
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidInput(
            "all points must share one dimension".into(),
        ));
    }
    let mut out = String::new();
    if write_header {
        for d in 0..dim {
            if d > 0 {
                out.push(',');
            }
            out.push_str(column_name(d, dim).as_ref());
        }
        if labels.is_some() {
            if dim > 0 {
                out.push(',');
            }
            out.push_str("label");
        }
        out.push('\n');
    }
    for (i, p) in points.iter().enumerate() {
        for (d, c) in p.iter().enumerate() {
            if d > 0 {
                out.push(',');
            }
            let _ = write!(out, "{c}");
        }
        if let Some(labels) = labels {
            let _ = write!(out, ",{}", labels[i]);
        }
        out.push('\n');
    }
    Ok(out)
}

/// [`format_csv`] straight to a file.
pub fn save_csv(
    path: &Path,
    points: &[Point],
    labels: Option<&[i64]>,
    write_header: bool,
) -> Result<()> {
    fs::write(path, format_csv(points, labels, write_header)?)?;
    Ok(())
}

fn column_name(d: usize, dim: usize) -> std::borrow::Cow<'static, str> {
    if dim <= 3 {
        ["x", "y", "z"][d].into()
    } else {
        format!("x{d}").into()
    }
}

/// Parse CSV text of points written by [`format_csv`] or by hand.
///
/// `has_header` skips the first line; `has_label` treats the last column as
/// an integer label and returns it separately. Ragged rows and non-numeric
/// fields are reported as `source:line`, where `source` names where the text
/// came from. Empty input (or input with only a header) yields no points.
pub fn parse_csv(
    text: &str,
    has_header: bool,
    has_label: bool,
    source: &str,
) -> Result<(Vec<Point>, Option<Vec<i64>>)> {
    let mut points: Vec<Point> = Vec::new();
    let mut labels: Vec<i64> = Vec::new();
    let mut dim: Option<usize> = None;
    let at = |line: usize| format!("{source}:{line}");
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        if has_header && i == 0 {
            continue;
        }
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let coord_count = fields.len() - usize::from(has_label);
        if coord_count == 0 {
            return Err(Error::Parse {
                location: at(line_no),
                message: "row has a label but no coordinates".into(),
            });
        }
        match dim {
            None => dim = Some(coord_count),
            Some(d) if d != coord_count => {
                return Err(Error::Parse {
                    location: at(line_no),
                    message: format!("expected {d} coordinates, found {coord_count}"),
                });
            }
            Some(_) => {}
        }
        let mut point = Vec::with_capacity(coord_count);
        for field in &fields[..coord_count] {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                location: at(line_no),
                message: format!("not a number: {:?}", field.trim()),
            })?;
            point.push(value);
        }
        if has_label {
            let field = fields[coord_count].trim();
            let label: i64 = field.parse().map_err(|_| Error::Parse {
                location: at(line_no),
                message: format!("not an integer label: {field:?}"),
            })?;
            labels.push(label);
        }
        points.push(point);
    }
    Ok((points, if has_label { Some(labels) } else { None }))
}

/// [`parse_csv`] over a file's contents, reporting errors by path and line.
pub fn load_csv(
    path: &Path,
    has_header: bool,
    has_label: bool,
) -> Result<(Vec<Point>, Option<Vec<i64>>)> {
    let text = fs::read_to_string(path)?;
    parse_csv(&text, has_header, has_label, &path.display().to_string())
}
