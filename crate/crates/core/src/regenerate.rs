//! Regenerating representative point sets inside merged boundaries.
//!
//! A point q counts as inside a boundary when the balance vector of its
//! nearest boundary member points away from q — boundary vectors face the
//! empty outside, so "behind the nearest member" means within the cluster.
//! Random Throw rejection-samples the boundary's minimal enclosing hypercube
//! until the target cardinality is reached, giving each cluster its own seed
//! stream so results do not depend on evaluation order.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boundary::BoundarySet;
use crate::error::{Error, Result};
use crate::geometry::{dist, dot, sub, Point};
use crate::global_merge::GlobalModel;

/// Per-axis min/max box of a boundary: the minimal enclosing hypercube.
#[derive(Debug, Clone, PartialEq)]
pub struct Meh {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Meh {
    pub fn contains(&self, q: &[f64]) -> bool {
        q.len() == self.min.len()
            && q.iter()
                .zip(self.min.iter().zip(&self.max))
                .all(|(c, (lo, hi))| lo <= c && c <= hi)
    }
}

/// Minimal enclosing hypercube of a boundary set.
pub fn meh(boundary: &BoundarySet) -> Result<Meh> {
    let first = boundary
        .members()
        .first()
        .ok_or_else(|| Error::InvalidInput("MEH of an empty boundary".into()))?;
    let mut min = first.point.clone();
    let mut max = first.point.clone();
    for m in boundary.members() {
        for (k, &c) in m.point.iter().enumerate() {
            min[k] = min[k].min(c);
            max[k] = max[k].max(c);
        }
    }
    Ok(Meh { min, max })
}

/// Is q inside the region delimited by the boundary? Nearest member wins
/// (ties go to the lowest index in the canonical member order); the test is
/// a strict inequality, so q sitting exactly on a member counts as outside.
pub fn inside(q: &[f64], boundary: &BoundarySet) -> Result<bool> {
    let members = boundary.members();
    let first = members
        .first()
        .ok_or_else(|| Error::InvalidInput("inside test against an empty boundary".into()))?;
    if q.len() != first.point.len() {
        return Err(Error::InvalidInput(format!(
            "probe dimension {} does not match boundary dimension {}",
            q.len(),
            first.point.len()
        )));
    }
    let mut nearest = 0usize;
    let mut best = dist(q, &members[0].point);
    for (i, m) in members.iter().enumerate().skip(1) {
        let d = dist(q, &m.point);
        if d < best {
            best = d;
            nearest = i;
        }
    }
    let m = &members[nearest];
    Ok(dot(&sub(&m.point, q), &m.balance) > 0.0)
}

pub const DEFAULT_MAX_ATTEMPTS_FACTOR: usize = 1000;

/// Sample uniform points in the boundary's MEH, keeping those that pass
/// [`inside`], until `m` are accepted. Deterministic for a given rng state.
/// Gives up with [`Error::RegenerationStalled`] after `max_attempts_factor * m`
/// throws, reporting the acceptance rate seen so far.
pub fn random_throw(
    boundary: &BoundarySet,
    m: u64,
    rng: &mut ChaCha8Rng,
    max_attempts_factor: usize,
) -> Result<Vec<Point>> {
    if m == 0 {
        return Ok(Vec::new());
    }
    let target = m as usize;
    let the_box = meh(boundary)?;
    let dim = the_box.min.len();
    let max_attempts = max_attempts_factor.saturating_mul(target);
    let mut accepted = Vec::with_capacity(target);
    let mut attempts = 0usize;
    while accepted.len() < target {
        if attempts >= max_attempts {
            return Err(Error::RegenerationStalled {
                accepted: accepted.len(),
                target,
                attempts,
                rate: accepted.len() as f64 / attempts as f64,
            });
        }
        attempts += 1;
        let q: Point = (0..dim)
            .map(|k| {
                let u: f64 = rng.random();
                the_box.min[k] + u * (the_box.max[k] - the_box.min[k])
            })
            .collect();
        if inside(&q, boundary)? {
            accepted.push(q);
        }
    }
    Ok(accepted)
}

/// One regenerated cluster; on failure `points` is empty and `error` records
/// why, so a bad cluster never aborts its siblings.
#[derive(Debug, Clone, PartialEq)]
pub struct RegeneratedCluster {
    pub global_id: u64,
    pub target_cardinality: u64,
    pub points: Vec<Point>,
    pub error: Option<String>,
}

/// Regenerate every global cluster at its aggregated cardinality. Each
/// cluster draws from its own stream (`seed + global_id`), so the output is
/// independent of cluster evaluation order.
pub fn regenerate_all(global: &GlobalModel, seed: u64) -> Vec<RegeneratedCluster> {
    regenerate_all_with(global, seed, DEFAULT_MAX_ATTEMPTS_FACTOR)
}

pub fn regenerate_all_with(
    global: &GlobalModel,
    seed: u64,
    max_attempts_factor: usize,
) -> Vec<RegeneratedCluster> {
    global
        .clusters
        .iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(c.global_id));
            match random_throw(&c.boundary, c.cardinality, &mut rng, max_attempts_factor) {
                Ok(points) => RegeneratedCluster {
                    global_id: c.global_id,
                    target_cardinality: c.cardinality,
                    points,
                    error: None,
                },
                Err(e) => RegeneratedCluster {
                    global_id: c.global_id,
                    target_cardinality: c.cardinality,
                    points: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryMember;

    /// The four-member square boundary: balance vectors point outward.
    fn square() -> BoundarySet {
        BoundarySet::new(vec![
            BoundaryMember {
                balance: vec![1.0, 0.0],
                point: vec![1.0, 0.0],
            },
            BoundaryMember {
                balance: vec![-1.0, 0.0],
                point: vec![-1.0, 0.0],
            },
            BoundaryMember {
                balance: vec![0.0, 1.0],
                point: vec![0.0, 1.0],
            },
            BoundaryMember {
                balance: vec![0.0, -1.0],
                point: vec![0.0, -1.0],
            },
        ])
    }

    fn circle(n: usize, radius: f64) -> BoundarySet {
        circle_at(n, radius, (0.0, 0.0))
    }

    fn circle_at(n: usize, radius: f64, center: (f64, f64)) -> BoundarySet {
        BoundarySet::new(
            (0..n)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    BoundaryMember {
                        balance: vec![t.cos(), t.sin()],
                        point: vec![center.0 + radius * t.cos(), center.1 + radius * t.sin()],
                    }
                })
                .collect(),
        )
    }

    #[test]
    fn inside_square_examples() {
        let b = square();
        assert!(inside(&[0.2, 0.0], &b).unwrap());
        assert!(!inside(&[2.0, 0.0], &b).unwrap());
        // Exactly on a member: dot is zero, strictly outside.
        assert!(!inside(&[1.0, 0.0], &b).unwrap());
    }

    #[test]
    fn inside_rejects_empty_and_mismatched() {
        let empty = BoundarySet::new(Vec::new());
        assert!(inside(&[0.0, 0.0], &empty).is_err());
        assert!(inside(&[0.0, 0.0, 0.0], &square()).is_err());
    }

    #[test]
    fn inside_agrees_with_circle_geometry_away_from_the_rim() {
        use rand::prelude::*;
        let b = circle(400, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let q: [f64; 2] = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            let r = (q[0] * q[0] + q[1] * q[1]).sqrt();
            // The predicate is only approximate within one member spacing of
            // the rim; elsewhere it must match the disk test exactly.
            if (r - 1.0).abs() > 0.05 {
                assert_eq!(inside(&q, &b).unwrap(), r < 1.0, "probe {q:?}");
            }
        }
    }

    #[test]
    fn meh_is_the_per_axis_box() {
        let got = meh(&square()).unwrap();
        assert_eq!(got.min, vec![-1.0, -1.0]);
        assert_eq!(got.max, vec![1.0, 1.0]);
        assert!(got.contains(&[0.0, 0.0]));
        assert!(!got.contains(&[1.1, 0.0]));
        assert!(meh(&BoundarySet::new(Vec::new())).is_err());
    }

    #[test]
    fn random_throw_hits_target_exactly_and_reproducibly() {
        let b = square();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let pts = random_throw(&b, 10, &mut rng, 1000).unwrap();
        assert_eq!(pts.len(), 10);
        for p in &pts {
            assert!(inside(p, &b).unwrap());
            assert!(meh(&b).unwrap().contains(p));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        assert_eq!(random_throw(&b, 10, &mut rng, 1000).unwrap(), pts);
    }

    #[test]
    fn random_throw_zero_target_is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(random_throw(&square(), 0, &mut rng, 10)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn degenerate_boundary_stalls_with_rate_report() {
        // A single member: its MEH is one point, which the strict inequality
        // always rejects, so the throw loop can never accept anything.
        let b = BoundarySet::new(vec![BoundaryMember {
            balance: vec![1.0, 0.0],
            point: vec![0.0, 0.0],
        }]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = random_throw(&b, 5, &mut rng, 50).unwrap_err();
        match err {
            Error::RegenerationStalled {
                accepted,
                target,
                attempts,
                rate,
            } => {
                assert_eq!(accepted, 0);
                assert_eq!(target, 5);
                assert_eq!(attempts, 250);
                assert_eq!(rate, 0.0);
            }
            other => panic!("expected stall, got {other}"),
        }
    }

    #[test]
    fn cluster_streams_are_isolated_and_failures_localized() {
        use crate::boundary::BoundaryPredicate;
        use crate::global_merge::{GlobalCluster, GlobalModel, GlobalParams};
        let params = GlobalParams {
            g_eps: 0.5,
            g_nu: 0.5,
            predicate: BoundaryPredicate::Cone,
        };
        let degenerate = BoundarySet::new(vec![BoundaryMember {
            balance: vec![1.0, 0.0],
            point: vec![50.0, 50.0],
        }]);
        let model = GlobalModel {
            params,
            clusters: vec![
                GlobalCluster {
                    global_id: 0,
                    boundary: degenerate,
                    cardinality: 5,
                    contributing: vec![(0, 0)],
                },
                GlobalCluster {
                    global_id: 1,
                    boundary: circle_at(100, 1.0, (10.0, 0.0)),
                    cardinality: 40,
                    contributing: vec![(1, 0)],
                },
            ],
        };
        let full = regenerate_all_with(&model, 7, 50);
        assert!(full[0].error.is_some());
        assert!(full[0].points.is_empty());
        assert!(full[1].error.is_none());
        assert_eq!(full[1].points.len(), 40);

        // Dropping the failing sibling leaves cluster 1's stream untouched.
        let only1 = GlobalModel {
            params,
            clusters: vec![model.clusters[1].clone()],
        };
        let alone = regenerate_all_with(&only1, 7, 50);
        assert_eq!(alone[0].points, full[1].points);
    }

    #[test]
    fn regenerated_circle_centroid_is_near_the_center() {
        let b = circle(300, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts = random_throw(&b, 1000, &mut rng, 1000).unwrap();
        let (mut cx, mut cy) = (0.0, 0.0);
        for p in &pts {
            cx += p[0];
            cy += p[1];
        }
        let n = pts.len() as f64;
        let off = ((cx / n).powi(2) + (cy / n).powi(2)).sqrt();
        assert!(off < 0.1, "centroid offset {off}");
    }
}
