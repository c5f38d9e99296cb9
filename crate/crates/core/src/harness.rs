//! Simulated multi-node runs: partition, concurrent local modelling, merge,
//! regeneration.
//!
//! The simulation keeps the real system's one architectural rule: the only
//! artifact that crosses from a node to the coordinator is the serialized
//! model document. Even though everything runs in one process, every model is
//! forced through `serialize`/`deserialize`, so nothing can leak through a
//! shared pointer that would not survive a real wire.
//!
//! Two coordination modes are provided. `Sync` waits for every node and
//! merges once. `Async` merges after every arrival, in completion order, so
//! a consumer can watch the global model converge; the final merge covers
//! all models and is byte-identical to the `Sync` answer, because merging is
//! a pure function of the model multiset.

use std::collections::BTreeMap;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dimension, Point};
use crate::global_merge::{
    derive_global_params, merge, serialize_global, GlobalModel, GlobalParams,
};
use crate::local_model::{build_local_model, deserialize, serialize, LocalModel, LocalParams};
use crate::regenerate::{regenerate_all, RegeneratedCluster};

/// Coordination discipline for the merge phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Merge once after every model has arrived.
    #[default]
    Sync,
    /// Merge after each arrival over the models received so far; the last
    /// merge is the final answer.
    Async,
}

/// Everything a run needs besides the points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Merge parameters; derived from the local params when absent.
    #[serde(default)]
    pub global_override: Option<GlobalParams>,
    /// Parameters every node applies unless overridden.
    pub local: LocalParams,
    #[serde(default)]
    pub mode: Mode,
    pub node_count: usize,
    /// Wholesale per-node replacements for `local`, keyed by node id.
    /// Keys are strings on the wire so the config survives TOML and JSON.
    #[serde(default, with = "node_key_map")]
    pub node_overrides: BTreeMap<u64, LocalParams>,
    #[serde(default)]
    pub partition_seed: u64,
    #[serde(default)]
    pub regen_seed: u64,
}

impl PipelineConfig {
    /// A single-mode config with no overrides.
    pub fn new(node_count: usize, local: LocalParams) -> Self {
        PipelineConfig {
            global_override: None,
            local,
            mode: Mode::Sync,
            node_count,
            node_overrides: BTreeMap::new(),
            partition_seed: 0,
            regen_seed: 0,
        }
    }

    pub fn params_for(&self, node_id: u64) -> LocalParams {
        self.node_overrides
            .get(&node_id)
            .copied()
            .unwrap_or(self.local)
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count == 0 {
            return Err(Error::InvalidInput("node_count must be at least 1".into()));
        }
        self.local.validate()?;
        for (&node_id, params) in &self.node_overrides {
            if node_id >= self.node_count as u64 {
                return Err(Error::InvalidInput(format!(
                    "override for node {node_id} but only {} nodes",
                    self.node_count
                )));
            }
            params.validate()?;
        }
        if let Some(g) = &self.global_override {
            g.validate()?;
        }
        Ok(())
    }
}

/// (De)serializes a `BTreeMap<u64, V>` with stringified keys, because TOML
/// and JSON only allow string keys in tables.
mod node_key_map {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<V: Serialize, S: Serializer>(
        map: &BTreeMap<u64, V>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        serializer.collect_map(map.iter().map(|(k, v)| (k.to_string(), v)))
    }

    pub fn deserialize<'de, V: Deserialize<'de>, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<u64, V>, D::Error> {
        let raw = BTreeMap::<String, V>::deserialize(deserializer)?;
        let mut out = BTreeMap::new();
        for (key, value) in raw {
            let id: u64 = key
                .parse()
                .map_err(|_| D::Error::custom(format!("node key must be an integer: {key:?}")))?;
            out.insert(id, value);
        }
        Ok(out)
    }
}

/// Wall-clock spent in each phase. Informational only: timings never enter
/// the run manifest, which must be byte-identical across repeated runs.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimings {
    pub partition: Duration,
    pub local: Duration,
    pub merge: Duration,
    pub regenerate: Duration,
}

/// Everything a finished run produced.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    /// Points dealt to each node.
    pub partition_sizes: Vec<usize>,
    /// The models after their round-trip through the wire format, by node id.
    pub local_models: Vec<LocalModel>,
    /// Serialized size of each node's model document, by node id.
    pub model_bytes: Vec<usize>,
    /// Size of each node's raw partition as a CSV body — what shipping the
    /// data instead of the model would have cost.
    pub raw_bytes: Vec<usize>,
    /// `Async` only: one merge per arrival, in completion order. The last
    /// entry equals `final_global`. Empty under `Sync`.
    pub provisional_globals: Vec<GlobalModel>,
    pub final_global: GlobalModel,
    /// Serialized size of the final global model document.
    pub global_bytes: usize,
    pub regenerated: Vec<RegeneratedCluster>,
    pub timings: PhaseTimings,
}

/// Deal points into `k` near-equal piles, uniformly at random.
///
/// The shuffle is seeded, so the split is a pure function of `(n, k, seed)`.
/// Sizes differ by at most one; the first `n mod k` piles get the extra
/// point.
pub fn partition_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::InvalidInput("partition count must be positive".into()));
    }
    if k > n {
        return Err(Error::InvalidInput(format!(
            "cannot split {n} points across {k} nodes"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut parts = vec![Vec::with_capacity(n / k + 1); k];
    for (position, index) in order.into_iter().enumerate() {
        parts[position % k].push(index);
    }
    Ok(parts)
}

/// [`partition_indices`], materialized into point piles.
pub fn partition(points: &[Point], k: usize, seed: u64) -> Result<Vec<Vec<Point>>> {
    let parts = partition_indices(points.len(), k, seed)?;
    Ok(parts
        .into_iter()
        .map(|idx| idx.into_iter().map(|i| points[i].clone()).collect())
        .collect())
}

/// How the harness turns one node's partition into a serialized model.
///
/// The in-process backend calls the library directly; a runner can substitute
/// a subprocess (or anything else) as long as it returns a valid model
/// document, which the coordinator re-parses regardless.
pub trait NodeBackend: Sync {
    fn run_node(&self, node_id: u64, partition: &[Point], params: &LocalParams)
        -> Result<Vec<u8>>;
}

/// Runs each node as a library call inside the harness process.
#[derive(Debug, Clone, Copy, Default)]
pub struct InProcess;

impl NodeBackend for InProcess {
    fn run_node(
        &self,
        node_id: u64,
        partition: &[Point],
        params: &LocalParams,
    ) -> Result<Vec<u8>> {
        let model = build_local_model(partition, params, node_id)?;
        Ok(serialize(&model)?.into_bytes())
    }
}

/// Run the full three-phase pipeline with the in-process backend.
pub fn run_pipeline(points: &[Point], config: &PipelineConfig) -> Result<PipelineReport> {
    run_pipeline_with(points, config, &InProcess)
}

/// Run the full three-phase pipeline with a caller-supplied node backend.
pub fn run_pipeline_with<B: NodeBackend + ?Sized>(
    points: &[Point],
    config: &PipelineConfig,
    backend: &B,
) -> Result<PipelineReport> {
    config.validate()?;
    check_dimension(points)?;

    let started = Instant::now();
    let parts = partition(points, config.node_count, config.partition_seed)?;
    let partition_time = started.elapsed();

    // Phase 2: every node concurrently, models collected in completion order.
    let local_started = Instant::now();
    let mut arrivals: Vec<(u64, Result<Vec<u8>>)> = Vec::with_capacity(parts.len());
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for (i, part) in parts.iter().enumerate() {
            let node_id = i as u64;
            let params = config.params_for(node_id);
            let tx = tx.clone();
            scope.spawn(move || {
                let _ = tx.send((node_id, backend.run_node(node_id, part, &params)));
            });
        }
        drop(tx);
        arrivals.extend(rx);
    });
    let local_time = local_started.elapsed();

    if let Some(&(node_id, _)) = arrivals
        .iter()
        .filter(|(_, r)| r.is_err())
        .min_by_key(|(id, _)| *id)
    {
        let source = arrivals
            .into_iter()
            .find_map(|(id, r)| (id == node_id).then_some(r))
            .unwrap()
            .unwrap_err();
        return Err(attribute(node_id, source));
    }

    // Phase 3a: the coordinator re-parses every document — the enforced wire
    // boundary — merging per arrival when asynchronous.
    let merge_started = Instant::now();
    let mut received: Vec<(u64, usize, LocalModel)> = Vec::with_capacity(arrivals.len());
    let mut provisional_globals = Vec::new();
    for (node_id, bytes) in arrivals {
        let bytes = bytes.expect("errors were surfaced above");
        let text = String::from_utf8(bytes)
            .map_err(|e| attribute(node_id, Error::Validation(format!("model not UTF-8: {e}"))))?;
        let model = deserialize(&text).map_err(|e| attribute(node_id, e))?;
        if model.node_id != node_id {
            return Err(attribute(
                node_id,
                Error::Validation(format!("document claims node {}", model.node_id)),
            ));
        }
        received.push((node_id, text.len(), model));
        if config.mode == Mode::Async {
            let so_far: Vec<LocalModel> = received.iter().map(|(_, _, m)| m.clone()).collect();
            provisional_globals.push(merge_models(&so_far, config)?);
        }
    }
    received.sort_by_key(|(id, _, _)| *id);
    let model_bytes: Vec<usize> = received.iter().map(|(_, len, _)| *len).collect();
    let local_models: Vec<LocalModel> = received.into_iter().map(|(_, _, m)| m).collect();

    let final_global = match (config.mode, provisional_globals.last()) {
        (Mode::Async, Some(last)) => last.clone(),
        _ => merge_models(&local_models, config)?,
    };
    let global_bytes = serialize_global(&final_global)?.len();
    let merge_time = merge_started.elapsed();

    // Phase 3b: regeneration.
    let regen_started = Instant::now();
    let regenerated = regenerate_all(&final_global, config.regen_seed);
    let regenerate_time = regen_started.elapsed();

    Ok(PipelineReport {
        config: config.clone(),
        partition_sizes: parts.iter().map(Vec::len).collect(),
        local_models,
        model_bytes,
        raw_bytes: parts.iter().map(|p| csv_len(p)).collect(),
        provisional_globals,
        final_global,
        global_bytes,
        regenerated,
        timings: PhaseTimings {
            partition: partition_time,
            local: local_time,
            merge: merge_time,
            regenerate: regenerate_time,
        },
    })
}

fn merge_models(models: &[LocalModel], config: &PipelineConfig) -> Result<GlobalModel> {
    let params = match &config.global_override {
        Some(params) => *params,
        None => derive_global_params(models)?,
    };
    merge(models, &params)
}

fn attribute(node_id: u64, source: Error) -> Error {
    match source {
        already @ Error::Node { .. } => already,
        other => Error::Node {
            node_id,
            source: Box::new(other),
        },
    }
}

/// Size of `points` formatted as a CSV body (no header, no labels): the
/// baseline a model's size is compared against.
pub fn csv_len(points: &[Point]) -> usize {
    use std::fmt::Write as _;
    let mut counter = String::new();
    let mut total = 0;
    for p in points {
        for (d, c) in p.iter().enumerate() {
            if d > 0 {
                total += 1; // comma
            }
            counter.clear();
            let _ = write!(counter, "{c}");
            total += counter.len();
        }
        total += 1; // newline
    }
    total
}

/// Canonical single-line JSON record of a finished run.
///
/// Contains the config, sizes, models, and regeneration summary — everything
/// needed to audit the run. Timings and the asynchronous provisional merges
/// are deliberately absent: they vary run to run, and two runs with the same
/// inputs must produce byte-identical manifests.
pub fn run_manifest(report: &PipelineReport) -> Result<String> {
    use serde_json::{json, Value};

    let embedded_locals: Vec<Value> = report
        .local_models
        .iter()
        .map(|m| Ok(serde_json::from_str(&serialize(m)?)?))
        .collect::<Result<_>>()?;
    let embedded_global: Value = serde_json::from_str(&serialize_global(&report.final_global)?)?;
    let regenerated: Vec<Value> = report
        .regenerated
        .iter()
        .map(|r| {
            json!({
                "error": r.error,
                "global_id": r.global_id,
                "point_count": r.points.len(),
                "target_cardinality": r.target_cardinality,
            })
        })
        .collect();
    let manifest = json!({
        "config": serde_json::to_value(&report.config)?,
        "final_global": embedded_global,
        "format_version": 1,
        "global_bytes": report.global_bytes,
        "local_models": embedded_locals,
        "model_bytes": report.model_bytes,
        "partition_sizes": report.partition_sizes,
        "raw_bytes": report.raw_bytes,
        "regenerated": regenerated,
    });
    Ok(manifest.to_string())
}
