//! DBSCAN over a grid index.
//!
//! Deterministic by construction: clusters are seeded in point-index order,
//! expansion is breadth-first over index-sorted neighbour lists, and border
//! points stay with the first cluster that reaches them.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::spatial_index::GridIndex;

/// Label assigned to points that belong to no cluster.
pub const NOISE: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ClusterParams {
    pub eps: f64,
    pub min_pts: usize,
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "eps must be positive and finite, got {}",
                self.eps
            )));
        }
        if self.min_pts == 0 {
            return Err(Error::InvalidInput("min_pts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Labeling {
    /// Per-point cluster id, or [`NOISE`]. Ids are dense, starting at 0.
    pub labels: Vec<i64>,
    pub n_clusters: usize,
}

impl Labeling {
    /// Point indices of one cluster, in input order.
    pub fn cluster_indices(&self, cluster: i64) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == cluster)
            .collect()
    }

    pub fn non_noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l != NOISE).count()
    }
}

/// Cluster `points` with DBSCAN. The core-point test counts the point itself,
/// so a point with `min_pts - 1` genuine neighbours within `eps` is core.
pub fn dbscan(points: &[Point], params: ClusterParams) -> Result<Labeling> {
    params.validate()?;
    let index = GridIndex::new(points.to_vec(), params.eps)?;
    let n = points.len();
    const UNVISITED: i64 = -2;
    let mut labels = vec![UNVISITED; n];
    let mut next_cluster: i64 = 0;

    for seed in 0..n {
        if labels[seed] != UNVISITED {
            continue;
        }
        let neighbours = index.range_query(&points[seed], params.eps);
        if neighbours.len() < params.min_pts {
            labels[seed] = NOISE;
            continue;
        }
        let cluster = next_cluster;
        next_cluster += 1;
        labels[seed] = cluster;
        let mut queue: VecDeque<usize> = neighbours.into();
        while let Some(i) = queue.pop_front() {
            if labels[i] == NOISE {
                labels[i] = cluster; // border point, reached by a core point
                continue;
            }
            if labels[i] != UNVISITED {
                continue;
            }
            labels[i] = cluster;
            let reach = index.range_query(&points[i], params.eps);
            if reach.len() >= params.min_pts {
                queue.extend(reach);
            }
        }
    }

    Ok(Labeling {
        labels,
        n_clusters: next_cluster as usize,
    })
}
