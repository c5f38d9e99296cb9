//! Quality measures for a finished run: how much of the original data the
//! merged boundaries still enclose, how faithful the regenerated shape is,
//! and what the models cost to ship compared to the raw rows.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundarySet;
use crate::error::{Error, Result};
use crate::geometry::{check_dimension, dist, Point};
use crate::harness::PipelineReport;
use crate::local_model::{build_local_model, LocalModel};
use crate::regenerate::{inside, meh};

/// Points sampled per ground-truth cluster when scoring coverage, so the
/// metric stays affordable on large scenes. Sampling is seeded and therefore
/// reproducible.
pub const COVERAGE_SAMPLE: usize = 500;

/// Fraction of an axis-aligned box a disk fills; used to aim a grid fill at
/// a requested point count.
const GRID_FILL_FACTOR: f64 = 0.78;

/// The measurable outcome of a pipeline run.
///
/// `coverage` and `cardinality_error` are fractions; `compression_ratio` is
/// model bytes over raw bytes and can exceed one when boundaries outweigh the
/// data they summarize; `boundary_hausdorff` is in data units; `density_cv`
/// is dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub boundary_hausdorff: f64,
    pub cardinality_error: f64,
    pub compression_ratio: f64,
    pub coverage: f64,
    pub density_cv: f64,
}

impl QualityReport {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("boundary_hausdorff", self.boundary_hausdorff),
            ("cardinality_error", self.cardinality_error),
            ("compression_ratio", self.compression_ratio),
            ("coverage", self.coverage),
            ("density_cv", self.density_cv),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Validation(format!(
                    "{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        if self.coverage > 1.0 {
            return Err(Error::Validation(format!(
                "coverage is a fraction, got {}",
                self.coverage
            )));
        }
        Ok(())
    }

    /// Column names for [`QualityReport::to_csv_row`], in row order.
    pub fn csv_header() -> &'static str {
        "boundary_hausdorff,cardinality_error,compression_ratio,coverage,density_cv"
    }

    /// One comma-separated line, suitable for appending to a sweep log.
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.boundary_hausdorff,
            self.cardinality_error,
            self.compression_ratio,
            self.coverage,
            self.density_cv
        )
    }

    /// A small human-readable block, one metric per line.
    pub fn to_text(&self) -> String {
        format!(
            "boundary_hausdorff  {:.6}\n\
             cardinality_error   {:.6}\n\
             compression_ratio   {:.6}\n\
             coverage            {:.6}\n\
             density_cv          {:.6}\n",
            self.boundary_hausdorff,
            self.cardinality_error,
            self.compression_ratio,
            self.coverage,
            self.density_cv
        )
    }
}

/// Fraction of `original` that the boundary still encloses.
pub fn coverage(original: &[Point], boundary: &BoundarySet) -> Result<f64> {
    if original.is_empty() {
        return Err(Error::InvalidInput(
            "coverage needs at least one original point".into(),
        ));
    }
    let mut hits = 0usize;
    for p in original {
        if inside(p, boundary)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / original.len() as f64)
}

/// Symmetric Hausdorff distance between the member points of two boundaries.
pub fn boundary_hausdorff(a: &BoundarySet, b: &BoundarySet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput(
            "hausdorff distance needs two nonempty boundaries".into(),
        ));
    }
    let dim_a = a.members()[0].point.len();
    let dim_b = b.members()[0].point.len();
    if dim_a != dim_b {
        return Err(Error::InvalidInput(format!(
            "boundary dimensions differ: {dim_a} vs {dim_b}"
        )));
    }
    Ok(f64::max(directed(a, b), directed(b, a)))
}

fn directed(from: &BoundarySet, to: &BoundarySet) -> f64 {
    from.members()
        .iter()
        .map(|m| {
            to.members()
                .iter()
                .map(|n| dist(&m.point, &n.point))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Coefficient of variation of the self-inclusive neighbour counts at
/// `radius` — the "how even is the density" score. Zero for perfectly
/// homogeneous data, larger the lumpier the cloud gets.
pub fn density_cv(points: &[Point], radius: f64) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidInput(
            "density needs at least one point".into(),
        ));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidInput(format!(
            "density radius must be positive and finite, got {radius}"
        )));
    }
    check_dimension(points)?;
    let index = crate::spatial_index::GridIndex::new(points.to_vec(), radius)?;
    let counts: Vec<f64> = (0..points.len())
        .map(|i| index.range_query(&points[i], radius).len() as f64)
        .collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n;
    Ok(var.sqrt() / mean)
}

/// Fill the boundary's enclosing box with a centered uniform lattice and keep
/// the points the boundary encloses. Aims for roughly `target` points; the
/// regular spacing makes it the "perfectly even" baseline that a sampled
/// regeneration is compared against.
pub fn grid_fill(boundary: &BoundarySet, target: u64) -> Result<Vec<Point>> {
    if target == 0 {
        return Ok(Vec::new());
    }
    let bounds = meh(boundary)?;
    let dim = bounds.min.len();
    let volume: f64 = bounds
        .min
        .iter()
        .zip(&bounds.max)
        .map(|(lo, hi)| hi - lo)
        .product();
    if !(volume > 0.0) {
        return Err(Error::InvalidInput(
            "boundary box has no volume to fill".into(),
        ));
    }
    let step = (volume * GRID_FILL_FACTOR / target as f64).powf(1.0 / dim as f64);
    let axes: Vec<Vec<f64>> = bounds
        .min
        .iter()
        .zip(&bounds.max)
        .map(|(&lo, &hi)| {
            let mut ticks = Vec::new();
            let mut x = lo + step / 2.0;
            while x < hi {
                ticks.push(x);
                x += step;
            }
            ticks
        })
        .collect();
    let mut out = Vec::new();
    let mut cursor = vec![0usize; dim];
    if axes.iter().any(Vec::is_empty) {
        return Ok(out);
    }
    loop {
        let candidate: Point = cursor.iter().enumerate().map(|(d, &i)| axes[d][i]).collect();
        if inside(&candidate, boundary)? {
            out.push(candidate);
        }
        let mut d = 0;
        loop {
            cursor[d] += 1;
            if cursor[d] < axes[d].len() {
                break;
            }
            cursor[d] = 0;
            d += 1;
            if d == dim {
                return Ok(out);
            }
        }
    }
}

/// Score a finished pipeline against the original points and their
/// ground-truth labels.
///
/// Each ground-truth cluster is matched to the global cluster that encloses
/// the most of a seeded sample of its points (ties to the lowest global id),
/// and `coverage` aggregates the matched hits over all samples. Points
/// labeled below zero are treated as ground-truth noise and ignored.
/// `boundary_hausdorff` compares the merged global boundary against the
/// boundary a centralized single-node run extracts from the full dataset.
/// `density_cv` is measured on the pooled regenerated points at the
/// configured boundary radius.
pub fn evaluate_pipeline(
    report: &PipelineReport,
    original: &[Point],
    labels: &[i64],
) -> Result<QualityReport> {
    if original.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} labels for {} points",
            labels.len(),
            original.len()
        )));
    }
    if original.is_empty() {
        return Err(Error::InvalidInput(
            "evaluation needs the original points".into(),
        ));
    }

    // Membership: match each ground-truth cluster to its best global cluster.
    let mut distinct: Vec<i64> = labels.iter().copied().filter(|&l| l >= 0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.is_empty() {
        return Err(Error::InvalidInput(
            "every point is labeled noise; nothing to cover".into(),
        ));
    }
    let mut covered = 0usize;
    let mut sampled = 0usize;
    for &label in &distinct {
        let member_indices: Vec<usize> = (0..original.len())
            .filter(|&i| labels[i] == label)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sample: Vec<usize> = member_indices
            .sample(&mut rng, COVERAGE_SAMPLE.min(member_indices.len()))
            .copied()
            .collect();
        let mut best = 0usize;
        for cluster in &report.final_global.clusters {
            if cluster.boundary.is_empty() {
                continue;
            }
            let mut hits = 0usize;
            for &i in &sample {
                if inside(&original[i], &cluster.boundary)? {
                    hits += 1;
                }
            }
            // Strict comparison: ties stay with the lowest global id.
            if hits > best {
                best = hits;
            }
        }
        covered += best;
        sampled += sample.len();
    }

    // Conservation: merged cardinality against what the nodes reported.
    let local_total: u64 = report
        .local_models
        .iter()
        .map(LocalModel::total_cardinality)
        .sum();
    let global_total = report.final_global.total_cardinality();
    let cardinality_error = if local_total == 0 {
        if global_total == 0 {
            0.0
        } else {
            1.0
        }
    } else {
        (global_total as f64 - local_total as f64).abs() / local_total as f64
    };

    // Shape: merged boundary against a centralized single-node extraction.
    let central = build_local_model(original, &report.config.local, 0)?;
    let central_union = BoundarySet::new(
        central
            .clusters
            .iter()
            .flat_map(|c| c.boundary.members())
            .cloned()
            .collect(),
    );
    let merged_union = BoundarySet::new(
        report
            .final_global
            .boundary_union()
            .into_iter()
            .cloned()
            .collect(),
    );
    let hausdorff = boundary_hausdorff(&central_union, &merged_union)?;

    // Cost: total model bytes over total raw bytes.
    let model_total: usize = report.model_bytes.iter().sum();
    let raw_total: usize = report.raw_bytes.iter().sum();
    let compression_ratio = if raw_total == 0 {
        0.0
    } else {
        model_total as f64 / raw_total as f64
    };

    // Evenness of the regenerated cloud.
    let pooled: Vec<Point> = report
        .regenerated
        .iter()
        .flat_map(|r| r.points.iter().cloned())
        .collect();
    let cv = if pooled.len() < 2 {
        0.0
    } else {
        density_cv(&pooled, report.config.local.eps_b)?
    };

    let quality = QualityReport {
        boundary_hausdorff: hausdorff,
        cardinality_error,
        compression_ratio,
        coverage: covered as f64 / sampled as f64,
        density_cv: cv,
    };
    quality.validate()?;
    Ok(quality)
}
