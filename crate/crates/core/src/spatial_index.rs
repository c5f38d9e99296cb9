//! Uniform grid index for fixed-radius neighbourhood queries.
//!
//! Cells are hypercubes with side equal to the query radius the index was
//! built for, keyed by integer coordinates. A range query visits the cell
//! block covering the query ball (plus one cell of slack for floating-point
//! safety near cell edges) and filters candidates by exact distance, so its
//! results match a naive scan exactly.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{check_dimension, dist, Point};

pub struct GridIndex {
    points: Vec<Point>,
    dim: usize,
    cell_size: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl GridIndex {
    /// Build an index over `points` with the given cell size (normally the
    /// radius of the queries it will serve).
    pub fn new(points: Vec<Point>, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "cell size must be positive and finite, got {cell_size}"
            )));
        }
        let dim = check_dimension(&points)?;
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(cell_key(p, cell_size)).or_default().push(i);
        }
        Ok(GridIndex {
            points,
            dim,
            cell_size,
            cells,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Indices of all points within `radius` of `center` (inclusive),
    /// sorted ascending.
    pub fn range_query(&self, center: &[f64], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.points.is_empty() {
            return out;
        }
        debug_assert_eq!(center.len(), self.dim);
        // Cell block covering [center - radius, center + radius] per axis,
        // widened by one cell against rounding at cell borders.
        let lo: Vec<i64> = center
            .iter()
            .map(|c| ((c - radius) / self.cell_size).floor() as i64 - 1)
            .collect();
        let hi: Vec<i64> = center
            .iter()
            .map(|c| ((c + radius) / self.cell_size).floor() as i64 + 1)
            .collect();
        let mut key = lo.clone();
        loop {
            if let Some(bucket) = self.cells.get(&key) {
                for &i in bucket {
                    if dist(&self.points[i], center) <= radius {
                        out.push(i);
                    }
                }
            }
            // Odometer increment over the block.
            let mut axis = 0;
            loop {
                if axis == self.dim {
                    out.sort_unstable();
                    return out;
                }
                key[axis] += 1;
                if key[axis] <= hi[axis] {
                    break;
                }
                key[axis] = lo[axis];
                axis += 1;
            }
        }
    }

    /// Like [`range_query`](Self::range_query) centred on an indexed point,
    /// excluding the point itself (but keeping distinct coincident points).
    pub fn neighbours_of(&self, i: usize, radius: f64) -> Vec<usize> {
        let mut ids = self.range_query(&self.points[i], radius);
        ids.retain(|&j| j != i);
        ids
    }
}

fn cell_key(p: &[f64], cell_size: f64) -> Vec<i64> {
    p.iter().map(|c| (c / cell_size).floor() as i64).collect()
}
