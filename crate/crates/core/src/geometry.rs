//! Small vector helpers shared by every module. Points are plain `Vec<f64>`
//! so the whole crate stays dimension-agnostic.

use crate::error::{Error, Result};

/// A point in d-dimensional Euclidean space.
pub type Point = Vec<f64>;

/// Euclidean distance. Every module (index, clustering, boundary, metrics)
/// calls this one function so exact-equality oracle tests are meaningful.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Normalize to unit length; a zero vector stays zero.
pub fn normalize(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    if n == 0.0 {
        a.to_vec()
    } else {
        a.iter().map(|x| x / n).collect()
    }
}

/// `a + t * b`, used for the offset sphere center.
pub fn add_scaled(a: &[f64], t: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * y).collect()
}

/// Total order on coordinate vectors: lexicographic over the coordinates.
/// Coordinates are validated finite on every input path, so `partial_cmp`
/// cannot fail in practice; NaN is pushed last defensively.
pub fn cmp_points(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) => continue,
            Some(o) => return o,
            None => return std::cmp::Ordering::Greater,
        }
    }
    a.len().cmp(&b.len())
}

/// Check that all points share one finite dimension, returning it.
pub fn check_dimension(points: &[Point]) -> Result<usize> {
    let Some(first) = points.first() else {
        return Ok(0);
    };
    let dim = first.len();
    if dim == 0 {
        return Err(Error::InvalidInput("zero-dimensional point".into()));
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::InvalidInput(format!(
                "point {i} has dimension {}, expected {dim}",
                p.len()
            )));
        }
        if let Some(c) = p.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "point {i} has non-finite coordinate {c}"
            )));
        }
    }
    Ok(dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist_is_euclidean() {
        assert_eq!(dist(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
        assert_eq!(dist(&[1.0], &[1.0]), 0.0);
    }

    #[test]
    fn normalize_unit_and_zero() {
        let v = normalize(&[3.0, 4.0]);
        assert!((norm(&v) - 1.0).abs() < 1e-12);
        assert_eq!(normalize(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn cmp_points_is_lexicographic() {
        use std::cmp::Ordering::*;
        assert_eq!(cmp_points(&[1.0, 2.0], &[1.0, 3.0]), Less);
        assert_eq!(cmp_points(&[2.0, 0.0], &[1.0, 9.0]), Greater);
        assert_eq!(cmp_points(&[1.0, 2.0], &[1.0, 2.0]), Equal);
    }

    #[test]
    fn check_dimension_rejects_ragged_and_nonfinite() {
        assert!(check_dimension(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(check_dimension(&[vec![f64::NAN, 0.0]]).is_err());
        assert_eq!(check_dimension(&[vec![1.0, 2.0]]).unwrap(), 2);
        assert_eq!(check_dimension(&[]).unwrap(), 0);
    }
}
