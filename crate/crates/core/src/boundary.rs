//! Cluster-boundary extraction from balance vectors.
//!
//! Every cluster point gets a displacement vector — the sum of `p - q` over
//! its neighbours — which points toward the locally emptiest direction. Its
//! normalization is the balance vector. A point is a boundary point when the
//! region in the direction of its balance vector is empty of cluster
//! material, tested either with a hyper-cone (no neighbour within aperture
//! `nu` of the balance direction) or with an offset hyper-sphere (no cluster
//! point within `eps_b` of `p + rho * b`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{add_scaled, cmp_points, dist, dot, normalize, sub, Point};
use crate::spatial_index::GridIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPredicate {
    Cone,
    Sphere,
}

/// How the sphere predicate's offset distance rho is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoMode {
    /// Twice the mean over cluster points (with nonempty neighbourhoods) of
    /// the distance to their furthest neighbour; one constant per cluster.
    Auto,
    /// Twice the distance to the point's own furthest neighbour.
    AutoPerPoint,
    Fixed(f64),
}

// On the wire rho is either the string "auto" / "auto_per_point" or a number.
impl Serialize for RhoMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RhoMode::Auto => s.serialize_str("auto"),
            RhoMode::AutoPerPoint => s.serialize_str("auto_per_point"),
            RhoMode::Fixed(r) => s.serialize_f64(*r),
        }
    }
}

impl<'de> Deserialize<'de> for RhoMode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = RhoMode;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("\"auto\", \"auto_per_point\", or a number")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<RhoMode, E> {
                match v {
                    "auto" => Ok(RhoMode::Auto),
                    "auto_per_point" => Ok(RhoMode::AutoPerPoint),
                    other => Err(E::custom(format!("unknown rho mode {other:?}"))),
                }
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> std::result::Result<RhoMode, E> {
                Ok(RhoMode::Fixed(v))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<RhoMode, E> {
                Ok(RhoMode::Fixed(v as f64))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<RhoMode, E> {
                Ok(RhoMode::Fixed(v as f64))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryParams {
    /// Neighbourhood radius for the balance field and both predicates.
    pub eps_b: f64,
    /// Cone half-aperture in radians.
    pub nu: f64,
    pub predicate: BoundaryPredicate,
    pub rho: RhoMode,
}

impl BoundaryParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_b > 0.0 && self.eps_b.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "eps_b must be positive and finite, got {}",
                self.eps_b
            )));
        }
        if !(self.nu > 0.0 && self.nu < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidInput(format!(
                "nu must lie in (0, pi/2), got {}",
                self.nu
            )));
        }
        if let RhoMode::Fixed(r) = self.rho {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "fixed rho must be positive and finite, got {r}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for BoundaryParams {
    fn default() -> Self {
        BoundaryParams {
            eps_b: 0.1,
            nu: std::f64::consts::FRAC_PI_6,
            predicate: BoundaryPredicate::Cone,
            rho: RhoMode::Auto,
        }
    }
}

/// One boundary point together with its balance vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMember {
    pub balance: Vec<f64>,
    pub point: Point,
}

/// A cluster boundary: members sorted lexicographically by coordinates.
/// The canonical order makes serialization and nearest-member tie-breaking
/// deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundarySet(Vec<BoundaryMember>);

impl BoundarySet {
    pub fn new(mut members: Vec<BoundaryMember>) -> Self {
        members.sort_by(|a, b| {
            cmp_points(&a.point, &b.point).then_with(|| cmp_points(&a.balance, &b.balance))
        });
        BoundarySet(members)
    }

    pub fn members(&self) -> &[BoundaryMember] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.0.iter().map(|m| &m.point)
    }

    /// Restore the sorted order after deserialization and check shape.
    pub fn validate(&mut self) -> Result<()> {
        for m in &self.0 {
            if m.point.is_empty() || m.point.len() != m.balance.len() {
                return Err(Error::Validation(
                    "boundary member point/balance dimensions disagree".into(),
                ));
            }
            if m.point.iter().chain(&m.balance).any(|c| !c.is_finite()) {
                return Err(Error::Validation(
                    "boundary member has non-finite coordinate".into(),
                ));
            }
        }
        self.0.sort_by(|a, b| {
            cmp_points(&a.point, &b.point).then_with(|| cmp_points(&a.balance, &b.balance))
        });
        Ok(())
    }
}

/// Balance vectors (unit length, or zero where the displacement sum cancels)
/// for every point of one cluster, at radius `eps_b`.
pub fn balance_field(points: &[Point], eps_b: f64) -> Result<Vec<Vec<f64>>> {
    let index = GridIndex::new(points.to_vec(), eps_b)?;
    Ok(balance_field_indexed(&index, eps_b))
}

fn balance_field_indexed(index: &GridIndex, eps_b: f64) -> Vec<Vec<f64>> {
    let points = index.points();
    (0..points.len())
        .map(|i| {
            let p = &points[i];
            let mut v = vec![0.0; p.len()];
            for j in index.neighbours_of(i, eps_b) {
                for (k, (a, b)) in p.iter().zip(&points[j]).enumerate() {
                    v[k] += a - b;
                }
            }
            normalize(&v)
        })
        .collect()
}

/// Twice the mean furthest-neighbour distance over points that have at least
/// one neighbour within `eps_b`; `None` when no point does.
pub fn auto_rho(points: &[Point], eps_b: f64) -> Result<Option<f64>> {
    let index = GridIndex::new(points.to_vec(), eps_b)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..points.len() {
        let far = furthest_neighbour_dist(&index, i, eps_b);
        if far > 0.0 {
            sum += far;
            count += 1;
        }
    }
    Ok((count > 0).then(|| 2.0 * sum / count as f64))
}

fn furthest_neighbour_dist(index: &GridIndex, i: usize, eps_b: f64) -> f64 {
    let p = &index.points()[i];
    index
        .neighbours_of(i, eps_b)
        .into_iter()
        .map(|j| dist(p, &index.points()[j]))
        .fold(0.0, f64::max)
}

/// True when no neighbour of `p` falls inside the cone of half-aperture `nu`
/// around the balance vector `b`. Callers must handle the zero-balance case
/// first; a zero `b` is rejected here only by the cosine never reaching the
/// threshold, which classifies everything as boundary.
fn cone_is_empty(p: &[f64], b: &[f64], neighbours: &[&Point], nu: f64) -> bool {
    let threshold = nu.cos();
    neighbours.iter().all(|q| {
        let d = normalize(&sub(q, p));
        dot(&d, b) < threshold
    })
}

/// Extract the boundary of one cluster. Rules, in order: a point with an
/// empty neighbourhood is boundary (nothing contradicts it); a point whose
/// displacement sum cancels exactly is interior (it is surrounded); anything
/// else passes through the configured predicate.
pub fn detect_boundary(points: &[Point], params: &BoundaryParams) -> Result<BoundarySet> {
    params.validate()?;
    let index = GridIndex::new(points.to_vec(), params.eps_b)?;
    let field = balance_field_indexed(&index, params.eps_b);
    let cluster_rho = match (params.predicate, params.rho) {
        (BoundaryPredicate::Sphere, RhoMode::Auto) => auto_rho(points, params.eps_b)?,
        _ => None,
    };

    let mut members = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let neighbour_ids = index.neighbours_of(i, params.eps_b);
        if neighbour_ids.is_empty() {
            members.push(BoundaryMember {
                balance: field[i].clone(),
                point: p.clone(),
            });
            continue;
        }
        let b = &field[i];
        if b.iter().all(|&c| c == 0.0) {
            continue;
        }
        let is_boundary = match params.predicate {
            BoundaryPredicate::Cone => {
                let neighbours: Vec<&Point> =
                    neighbour_ids.iter().map(|&j| &points[j]).collect();
                cone_is_empty(p, b, &neighbours, params.nu)
            }
            BoundaryPredicate::Sphere => {
                let rho = match params.rho {
                    RhoMode::Fixed(r) => r,
                    RhoMode::Auto => cluster_rho.expect("nonempty neighbourhood seen"),
                    RhoMode::AutoPerPoint => 2.0 * furthest_neighbour_dist(&index, i, params.eps_b),
                };
                let probe = add_scaled(p, rho, b);
                index.range_query(&probe, params.eps_b).is_empty()
            }
        };
        if is_boundary {
            members.push(BoundaryMember {
                balance: b.clone(),
                point: p.clone(),
            });
        }
    }
    Ok(BoundarySet::new(members))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::norm;

    fn cone_params(eps_b: f64, nu: f64) -> BoundaryParams {
        BoundaryParams {
            eps_b,
            nu,
            predicate: BoundaryPredicate::Cone,
            rho: RhoMode::Auto,
        }
    }

    /// Naive displacement sum straight from the definition.
    fn naive_balance(points: &[Point], i: usize, eps_b: f64) -> Vec<f64> {
        let p = &points[i];
        let mut v = vec![0.0; p.len()];
        for (j, q) in points.iter().enumerate() {
            if j != i && dist(p, q) <= eps_b {
                for k in 0..v.len() {
                    v[k] += p[k] - q[k];
                }
            }
        }
        normalize(&v)
    }

    #[test]
    fn balance_field_matches_naive_sum() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let points: Vec<Point> = (0..300)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let field = balance_field(&points, 0.3).unwrap();
        for i in 0..points.len() {
            let want = naive_balance(&points, i, 0.3);
            let got = &field[i];
            let err: f64 = want
                .iter()
                .zip(got)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-9, "point {i}: {want:?} vs {got:?}");
        }
    }

    #[test]
    fn symmetric_cross_cancels_exactly() {
        // The centre of a symmetric cross: displacement terms cancel in
        // exact f64 arithmetic, so the balance vector is exactly zero.
        let points = vec![
            vec![0.0, 0.0],
            vec![0.7, 0.0],
            vec![-0.7, 0.0],
            vec![0.0, 0.7],
            vec![0.0, -0.7],
        ];
        let field = balance_field(&points, 1.0).unwrap();
        assert_eq!(field[0], vec![0.0, 0.0]);
        assert!((norm(&field[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_balance_point_is_interior() {
        let points = vec![
            vec![0.0, 0.0],
            vec![0.7, 0.0],
            vec![-0.7, 0.0],
            vec![0.0, 0.7],
            vec![0.0, -0.7],
        ];
        let set = detect_boundary(&points, &cone_params(1.0, std::f64::consts::FRAC_PI_6)).unwrap();
        assert!(!set.points().any(|p| p == &vec![0.0, 0.0]));
        // The four arm tips all face empty space.
        assert_eq!(set.len(), 4);
    }

    #[test]
    fn isolated_point_is_boundary_by_vacuity() {
        let points = vec![vec![0.0, 0.0], vec![10.0, 10.0]];
        let set = detect_boundary(&points, &cone_params(1.0, 0.5)).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.members()[0].balance, vec![0.0, 0.0]);
    }

    #[test]
    fn segment_interior_vs_endpoint() {
        // On a line of points, the interior has material on both sides of its
        // balance vector's axis... but the vector itself cancels; endpoints
        // keep a vector pointing outward with an empty cone behind them.
        let points: Vec<Point> = (0..9).map(|i| vec![i as f64 * 0.1, 0.0]).collect();
        let set = detect_boundary(&points, &cone_params(0.25, std::f64::consts::FRAC_PI_6)).unwrap();
        let ends: Vec<_> = set.points().cloned().collect();
        assert!(ends.contains(&vec![0.0, 0.0]));
        assert!(ends.contains(&vec![0.8, 0.0]));
    }

    #[test]
    fn disk_boundary_lies_on_the_rim() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut points = Vec::new();
        while points.len() < 2000 {
            let x = rng.random_range(-1.0..1.0);
            let y = rng.random_range(-1.0..1.0);
            if x * x + y * y <= 1.0 {
                points.push(vec![x, y]);
            }
        }
        let set = detect_boundary(&points, &cone_params(0.15, std::f64::consts::FRAC_PI_6)).unwrap();
        assert!(!set.is_empty());
        let mean_radius: f64 =
            set.points().map(|p| norm(p)).sum::<f64>() / set.len() as f64;
        assert!(mean_radius > 0.85, "boundary should hug the rim, got {mean_radius}");
        // Boundary is a small fraction of the cluster.
        assert!(set.len() < points.len() / 2);
    }

    #[test]
    fn sphere_predicate_fixed_rho_on_a_pair() {
        // Two points: each has a unit balance vector pointing away from the
        // other; the probe sphere lands in empty space, so both are boundary.
        let points = vec![vec![0.0, 0.0], vec![0.5, 0.0]];
        let params = BoundaryParams {
            eps_b: 1.0,
            nu: 0.5,
            predicate: BoundaryPredicate::Sphere,
            rho: RhoMode::Fixed(1.5),
        };
        let set = detect_boundary(&points, &params).unwrap();
        assert_eq!(set.len(), 2);
        // With rho too small the probe still covers the cluster: interior.
        let params = BoundaryParams {
            rho: RhoMode::Fixed(0.4),
            ..params
        };
        assert_eq!(detect_boundary(&points, &params).unwrap().len(), 0);
    }

    #[test]
    fn auto_rho_is_twice_mean_furthest_neighbour() {
        // Distances: 0<->1 is 1.0, 1<->2 is 2.0 (outside eps_b of 0).
        let points = vec![vec![0.0], vec![1.0], vec![3.0]];
        // eps_b = 1.2: furthest neighbours are 1.0 (pt0), 1.0 (pt1), none (pt2).
        let rho = auto_rho(&points, 1.2).unwrap().unwrap();
        assert!((rho - 2.0).abs() < 1e-12);
        assert_eq!(auto_rho(&points, 0.5).unwrap(), None);
    }

    #[test]
    fn boundary_set_is_sorted_canonically() {
        let set = BoundarySet::new(vec![
            BoundaryMember {
                balance: vec![1.0, 0.0],
                point: vec![2.0, 0.0],
            },
            BoundaryMember {
                balance: vec![0.0, 1.0],
                point: vec![1.0, 5.0],
            },
            BoundaryMember {
                balance: vec![0.0, -1.0],
                point: vec![1.0, -5.0],
            },
        ]);
        let pts: Vec<_> = set.points().cloned().collect();
        assert_eq!(pts, vec![vec![1.0, -5.0], vec![1.0, 5.0], vec![2.0, 0.0]]);
    }

    #[test]
    fn rejects_invalid_params() {
        let points = vec![vec![0.0]];
        assert!(detect_boundary(&points, &cone_params(0.0, 0.5)).is_err());
        assert!(detect_boundary(&points, &cone_params(1.0, 2.0)).is_err());
        let bad_rho = BoundaryParams {
            eps_b: 1.0,
            nu: 0.5,
            predicate: BoundaryPredicate::Sphere,
            rho: RhoMode::Fixed(-1.0),
        };
        assert!(detect_boundary(&points, &bad_rho).is_err());
    }
}
