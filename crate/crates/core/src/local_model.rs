//! Per-node local models: cluster boundaries plus lightweight representatives,
//! with a canonical wire format.
//!
//! The serialized document is the only artifact that crosses the node-to-server
//! boundary. Canonical form: single-line JSON, keys sorted, clusters sorted by
//! id, boundary members in their canonical coordinate order, floats rendered
//! with shortest round-trip precision — so equal models serialize to equal
//! bytes.

use serde::{Deserialize, Serialize};

use crate::boundary::{detect_boundary, BoundaryParams, BoundaryPredicate, BoundarySet, RhoMode};
use crate::dbscan::{dbscan, ClusterParams};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::spatial_index::GridIndex;

pub const FORMAT_VERSION: u64 = 1;

/// Everything a node applies locally: clustering plus boundary extraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalParams {
    pub eps: f64,
    pub eps_b: f64,
    pub min_pts: usize,
    pub nu: f64,
    pub predicate: BoundaryPredicate,
    pub rho: RhoMode,
}

impl LocalParams {
    pub fn cluster_params(&self) -> ClusterParams {
        ClusterParams {
            eps: self.eps,
            min_pts: self.min_pts,
        }
    }

    pub fn boundary_params(&self) -> BoundaryParams {
        BoundaryParams {
            eps_b: self.eps_b,
            nu: self.nu,
            predicate: self.predicate,
            rho: self.rho,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cluster_params().validate()?;
        self.boundary_params().validate()
    }
}

impl Default for LocalParams {
    fn default() -> Self {
        LocalParams {
            eps: 0.1,
            eps_b: 0.1,
            min_pts: 5,
            nu: std::f64::consts::FRAC_PI_6,
            predicate: BoundaryPredicate::Cone,
            rho: RhoMode::Auto,
        }
    }
}

/// What a cluster ships instead of its points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterRepresentative {
    /// Number of points in the cluster (m).
    pub cardinality: u64,
    /// Mean eps_b-neighbourhood size per point, counting the point itself.
    pub mean_density: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalCluster {
    pub cluster_id: u64,
    pub representative: ClusterRepresentative,
    pub boundary: BoundarySet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalModel {
    pub node_id: u64,
    pub params: LocalParams,
    /// Sorted by cluster_id.
    pub clusters: Vec<LocalCluster>,
}

impl LocalModel {
    /// Dimension of the model's points, if it has any clusters.
    pub fn dimension(&self) -> Option<usize> {
        self.clusters
            .first()
            .and_then(|c| c.boundary.members().first())
            .map(|m| m.point.len())
    }

    pub fn total_cardinality(&self) -> u64 {
        self.clusters
            .iter()
            .map(|c| c.representative.cardinality)
            .sum()
    }

    /// Enforce every structural invariant, normalizing order along the way.
    pub fn validate(&mut self) -> Result<()> {
        self.params.validate()?;
        self.clusters.sort_by_key(|c| c.cluster_id);
        for w in self.clusters.windows(2) {
            if w[0].cluster_id == w[1].cluster_id {
                return Err(Error::Validation(format!(
                    "duplicate cluster id {} in node {} model",
                    w[0].cluster_id, self.node_id
                )));
            }
        }
        let mut dim: Option<usize> = None;
        for c in &mut self.clusters {
            if c.boundary.is_empty() {
                return Err(Error::Validation(format!(
                    "cluster {} has an empty boundary",
                    c.cluster_id
                )));
            }
            if c.representative.cardinality == 0 {
                return Err(Error::Validation(format!(
                    "cluster {} has zero cardinality",
                    c.cluster_id
                )));
            }
            if !(c.representative.mean_density >= 1.0 && c.representative.mean_density.is_finite())
            {
                return Err(Error::Validation(format!(
                    "cluster {} mean_density {} is not a finite value >= 1",
                    c.cluster_id, c.representative.mean_density
                )));
            }
            if (c.boundary.len() as u64) > c.representative.cardinality {
                return Err(Error::Validation(format!(
                    "cluster {} boundary has {} members but cardinality {}",
                    c.cluster_id,
                    c.boundary.len(),
                    c.representative.cardinality
                )));
            }
            c.boundary.validate()?;
            for m in c.boundary.members() {
                match dim {
                    None => dim = Some(m.point.len()),
                    Some(d) if d != m.point.len() => {
                        return Err(Error::Validation(format!(
                            "mixed point dimensions {d} and {} in one model",
                            m.point.len()
                        )));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// Cluster a partition and package boundaries plus representatives.
/// Noise points are dropped; a partition with no clusters yields a valid
/// empty model that still carries the parameters.
pub fn build_local_model(
    partition: &[Point],
    params: &LocalParams,
    node_id: u64,
) -> Result<LocalModel> {
    params.validate()?;
    let labeling = dbscan(partition, params.cluster_params())?;
    let mut clusters = Vec::with_capacity(labeling.n_clusters);
    for cid in 0..labeling.n_clusters as i64 {
        let member_points: Vec<Point> = labeling
            .cluster_indices(cid)
            .into_iter()
            .map(|i| partition[i].clone())
            .collect();
        let boundary = detect_boundary(&member_points, &params.boundary_params())?;
        if boundary.is_empty() {
            return Err(Error::Validation(format!(
                "boundary detection found no boundary for cluster {cid} \
                 ({} points); the model would violate the nonempty-boundary invariant",
                member_points.len()
            )));
        }
        clusters.push(LocalCluster {
            cluster_id: cid as u64,
            representative: ClusterRepresentative {
                cardinality: member_points.len() as u64,
                mean_density: mean_density(&member_points, params.eps_b)?,
            },
            boundary,
        });
    }
    Ok(LocalModel {
        node_id,
        params: *params,
        clusters,
    })
}

/// Mean eps_b-neighbourhood cardinality (self-inclusive) over cluster points.
fn mean_density(points: &[Point], eps_b: f64) -> Result<f64> {
    let index = GridIndex::new(points.to_vec(), eps_b)?;
    let total: usize = (0..points.len())
        .map(|i| index.range_query(&points[i], eps_b).len())
        .sum();
    Ok(total as f64 / points.len() as f64)
}

// Wire mirror of the document layout; field names are the wire keys.
#[derive(Serialize, Deserialize)]
struct WireModel {
    clusters: Vec<WireCluster>,
    format_version: u64,
    node_id: u64,
    params: LocalParams,
}

#[derive(Serialize, Deserialize)]
struct WireCluster {
    boundary: BoundarySet,
    cardinality: u64,
    cluster_id: u64,
    mean_density: f64,
}

/// Canonical single-line document for a model. Equal models yield equal bytes.
pub fn serialize(model: &LocalModel) -> Result<String> {
    let wire = WireModel {
        clusters: model
            .clusters
            .iter()
            .map(|c| WireCluster {
                boundary: c.boundary.clone(),
                cardinality: c.representative.cardinality,
                cluster_id: c.cluster_id,
                mean_density: c.representative.mean_density,
            })
            .collect(),
        format_version: FORMAT_VERSION,
        node_id: model.node_id,
        params: model.params,
    };
    // Through Value so keys serialize in sorted order.
    let value = serde_json::to_value(&wire)?;
    Ok(serde_json::to_string(&value)?)
}

/// Parse and fully validate a model document.
pub fn deserialize(text: &str) -> Result<LocalModel> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
    check_version(&value)?;
    let wire: WireModel = serde_json::from_value(value).map_err(parse_err)?;
    let mut model = LocalModel {
        node_id: wire.node_id,
        params: wire.params,
        clusters: wire
            .clusters
            .into_iter()
            .map(|c| LocalCluster {
                cluster_id: c.cluster_id,
                representative: ClusterRepresentative {
                    cardinality: c.cardinality,
                    mean_density: c.mean_density,
                },
                boundary: c.boundary,
            })
            .collect(),
    };
    model.validate()?;
    Ok(model)
}

pub(crate) fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    }
}

pub(crate) fn check_version(value: &serde_json::Value) -> Result<()> {
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Validation("document has no format_version".into()))?;
    if found != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found,
            supported: FORMAT_VERSION,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight_blob_params() -> LocalParams {
        LocalParams {
            eps: 0.3,
            eps_b: 0.3,
            min_pts: 3,
            ..LocalParams::default()
        }
    }

    fn blob(center: (f64, f64), n: usize, spread: f64, seed: u64) -> Vec<Point> {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                vec![
                    center.0 + rng.random_range(-spread..spread),
                    center.1 + rng.random_range(-spread..spread),
                ]
            })
            .collect()
    }

    #[test]
    fn one_blob_gives_one_cluster_with_boundary_inside_it() {
        let points = blob((0.0, 0.0), 200, 1.0, 1);
        let model = build_local_model(&points, &tight_blob_params(), 0).unwrap();
        assert_eq!(model.clusters.len(), 1);
        let c = &model.clusters[0];
        assert_eq!(c.representative.cardinality as usize, points.len());
        assert!(c.representative.mean_density >= 1.0);
        for p in c.boundary.points() {
            assert!(points.contains(p));
        }
        assert!(c.boundary.len() < points.len());
    }

    #[test]
    fn all_noise_scatter_gives_empty_model() {
        let points = vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![0.0, 10.0]];
        let params = LocalParams {
            min_pts: 5,
            ..tight_blob_params()
        };
        let model = build_local_model(&points, &params, 3).unwrap();
        assert!(model.clusters.is_empty());
        assert_eq!(model.node_id, 3);
        // Still serializes to a valid document.
        let doc = serialize(&model).unwrap();
        let back = deserialize(&doc).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn roundtrip_preserves_model_exactly() {
        let mut points = blob((0.0, 0.0), 150, 1.0, 2);
        points.extend(blob((6.0, 6.0), 150, 1.0, 3));
        let model = build_local_model(&points, &tight_blob_params(), 7).unwrap();
        assert_eq!(model.clusters.len(), 2);
        let doc = serialize(&model).unwrap();
        let back = deserialize(&doc).unwrap();
        assert_eq!(back, model);
        // Canonical: serializing again is byte-identical.
        assert_eq!(serialize(&back).unwrap(), doc);
    }

    #[test]
    fn document_keys_are_sorted() {
        let model = build_local_model(&blob((0.0, 0.0), 60, 0.8, 4), &tight_blob_params(), 0)
            .unwrap();
        let doc = serialize(&model).unwrap();
        let clusters_at = doc.find("\"clusters\"").unwrap();
        let version_at = doc.find("\"format_version\"").unwrap();
        let node_at = doc.find("\"node_id\"").unwrap();
        let params_at = doc.find("\"params\"").unwrap();
        assert!(clusters_at < version_at && version_at < node_at && node_at < params_at);
        assert!(!doc.contains('\n'));
    }

    #[test]
    fn truncated_document_is_a_parse_error() {
        let model = build_local_model(&blob((0.0, 0.0), 60, 0.8, 5), &tight_blob_params(), 0)
            .unwrap();
        let doc = serialize(&model).unwrap();
        let err = deserialize(&doc[..doc.len() / 2]).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn invariant_violations_are_validation_errors() {
        let model = build_local_model(&blob((0.0, 0.0), 60, 0.8, 6), &tight_blob_params(), 0)
            .unwrap();
        let doc = serialize(&model).unwrap();

        // Boundary larger than cardinality.
        let card = model.clusters[0].representative.cardinality;
        let bad = doc.replace(
            &format!("\"cardinality\":{card}"),
            "\"cardinality\":1",
        );
        assert!(matches!(
            deserialize(&bad).unwrap_err(),
            Error::Validation(_)
        ));

        // Unknown format version.
        let bad = doc.replace("\"format_version\":1", "\"format_version\":99");
        assert!(matches!(
            deserialize(&bad).unwrap_err(),
            Error::UnsupportedVersion { found: 99, .. }
        ));
    }

    #[test]
    fn rho_mode_wire_forms() {
        for (rho, token) in [
            (RhoMode::Auto, "\"auto\""),
            (RhoMode::AutoPerPoint, "\"auto_per_point\""),
            (RhoMode::Fixed(0.25), "0.25"),
        ] {
            let params = LocalParams {
                rho,
                ..tight_blob_params()
            };
            let model = LocalModel {
                node_id: 0,
                params,
                clusters: Vec::new(),
            };
            let doc = serialize(&model).unwrap();
            assert!(doc.contains(&format!("\"rho\":{token}")), "{doc}");
            assert_eq!(deserialize(&doc).unwrap().params.rho, rho);
        }
    }
}
