//! The grown directed graph.
//!
//! Vertices are 0-based ids; the vertex with id `v` is born at step `v + 1`.
//! Edges always point from the younger endpoint to the older one, so the
//! arrival time of in-neighbour `w` of any vertex is `w + 1`.

use std::collections::BTreeMap;

use crate::error::{Result, SpaError};
use crate::model::ModelParams;

/// One `(t, in_degree)` observation of a vertex's degree trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TrajectorySample {
    pub t: u64,
    pub in_degree: u32,
}

/// Which vertices get an explicit degree trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryPolicy {
    None,
    All,
    /// The `k` vertices of largest final in-degree (ties to the older vertex).
    TopK(usize),
}

impl Default for TrajectoryPolicy {
    fn default() -> Self {
        TrajectoryPolicy::TopK(20)
    }
}

impl TrajectoryPolicy {
    pub fn top(k: usize) -> Self {
        TrajectoryPolicy::TopK(k)
    }
}

impl std::str::FromStr for TrajectoryPolicy {
    type Err = SpaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(TrajectoryPolicy::None),
            "all" => Ok(TrajectoryPolicy::All),
            _ => s
                .strip_prefix("top:")
                .and_then(|k| k.parse().ok())
                .map(TrajectoryPolicy::TopK)
                .ok_or_else(|| SpaError::usage(format!("bad trajectory policy `{s}` (none, all, top:K)"))),
        }
    }
}

impl std::fmt::Display for TrajectoryPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrajectoryPolicy::None => f.write_str("none"),
            TrajectoryPolicy::All => f.write_str("all"),
            TrajectoryPolicy::TopK(k) => write!(f, "top:{k}"),
        }
    }
}

pub type Trajectories = BTreeMap<usize, Vec<TrajectorySample>>;

#[derive(Debug, Clone, PartialEq)]
pub struct GrownGraph {
    params: ModelParams,
    positions: Option<Vec<f64>>,
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    in_offsets: Vec<usize>,
    in_sources: Vec<u32>,
    trajectories: Trajectories,
}

impl GrownGraph {
    /// Builds a graph from its edge list.
    ///
    /// `edges` holds `(source, target)` pairs of 0-based ids; they are sorted
    /// into generation order. Fails on edges that do not point to an older
    /// vertex, on ids beyond `params.n`, and on duplicates.
    pub fn from_edges(
        params: ModelParams,
        mut edges: Vec<(u32, u32)>,
        positions: Option<Vec<f64>>,
        trajectories: Trajectories,
    ) -> Result<Self> {
        let n = params.n;
        if let Some(pos) = &positions {
            if pos.len() != n * params.dimension {
                return Err(SpaError::usage(format!(
                    "expected {} coordinates, got {}",
                    n * params.dimension,
                    pos.len()
                )));
            }
        }
        for &(s, t) in &edges {
            if s as usize >= n {
                return Err(SpaError::usage(format!("edge source {} beyond n = {n}", s + 1)));
            }
            if t >= s {
                return Err(SpaError::usage(format!(
                    "edge ({}, {}) does not point to an older vertex",
                    s + 1,
                    t + 1
                )));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(SpaError::usage(format!("duplicate edge ({}, {})", w[0].0 + 1, w[0].1 + 1)));
        }
        if let Some(&v) = trajectories.keys().find(|&&v| v >= n) {
            return Err(SpaError::usage(format!("trajectory for unknown vertex {}", v + 1)));
        }

        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for &(s, t) in &edges {
            out_offsets[s as usize + 1] += 1;
            in_offsets[t as usize + 1] += 1;
        }
        for v in 0..n {
            out_offsets[v + 1] += out_offsets[v];
            in_offsets[v + 1] += in_offsets[v];
        }
        let out_targets = edges.iter().map(|&(_, t)| t).collect();
        // sources visited in ascending order keep every in-list sorted
        let mut fill = in_offsets.clone();
        let mut in_sources = vec![0u32; edges.len()];
        for &(s, t) in &edges {
            in_sources[fill[t as usize]] = s;
            fill[t as usize] += 1;
        }
        Ok(GrownGraph {
            params,
            positions,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            trajectories,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    /// Targets of `v`'s out-edges, ascending.
    pub fn out_neighbors(&self, v: usize) -> &[u32] {
        &self.out_targets[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    /// Sources of `v`'s in-edges, ascending (equivalently, by arrival time).
    pub fn in_neighbors(&self, v: usize) -> &[u32] {
        &self.in_sources[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn in_degree(&self, v: usize) -> u32 {
        (self.in_offsets[v + 1] - self.in_offsets[v]) as u32
    }

    pub fn out_degree(&self, v: usize) -> u32 {
        (self.out_offsets[v + 1] - self.out_offsets[v]) as u32
    }

    /// In-degree of `v` in `G_t`.
    pub fn in_degree_at(&self, v: usize, t: u64) -> u32 {
        self.in_neighbors(v).partition_point(|&s| (s as u64) < t) as u32
    }

    /// Edges in generation order: by source, then by target.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |s| self.out_neighbors(s).iter().map(move |&t| (s, t as usize)))
    }

    pub fn has_positions(&self) -> bool {
        self.positions.is_some()
    }

    pub fn position(&self, v: usize) -> Option<&[f64]> {
        let m = self.params.dimension;
        self.positions.as_ref().map(|p| &p[v * m..(v + 1) * m])
    }

    pub fn positions(&self) -> Option<&[f64]> {
        self.positions.as_deref()
    }

    pub fn trajectories(&self) -> &Trajectories {
        &self.trajectories
    }

    pub fn trajectory(&self, v: usize) -> Result<&[TrajectorySample]> {
        self.trajectories
            .get(&v)
            .map(Vec::as_slice)
            .ok_or(SpaError::MissingTrajectory(v + 1))
    }

    /// Drops positions; used when an analysis does not need them.
    pub fn without_positions(mut self) -> Self {
        self.positions = None;
        self
    }

    /// Records trajectories for the vertices selected by `policy`,
    /// replacing any existing ones.
    pub fn record_trajectories(&mut self, policy: TrajectoryPolicy) {
        let chosen: Vec<usize> = match policy {
            TrajectoryPolicy::None => Vec::new(),
            TrajectoryPolicy::All => (0..self.n()).collect(),
            TrajectoryPolicy::TopK(k) => self.top_by_in_degree(k),
        };
        let checkpoints = checkpoints(self.n() as u64);
        self.trajectories = chosen
            .into_iter()
            .map(|v| (v, self.trajectory_of(v, &checkpoints)))
            .collect();
    }

    /// Vertices of largest final in-degree, ties broken towards older ids.
    pub fn top_by_in_degree(&self, k: usize) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.n()).collect();
        ids.sort_by(|&a, &b| self.in_degree(b).cmp(&self.in_degree(a)).then(a.cmp(&b)));
        ids.truncate(k);
        ids
    }

    /// Birth, every degree-change event together with the step just before
    /// it, and geometric checkpoints.
    fn trajectory_of(&self, v: usize, checkpoints: &[u64]) -> Vec<TrajectorySample> {
        let birth = v as u64 + 1;
        let mut samples = vec![TrajectorySample { t: birth, in_degree: 0 }];
        for (i, &s) in self.in_neighbors(v).iter().enumerate() {
            let t = s as u64 + 1;
            samples.push(TrajectorySample { t: t - 1, in_degree: i as u32 });
            samples.push(TrajectorySample { t, in_degree: i as u32 + 1 });
        }
        samples.extend(
            checkpoints
                .iter()
                .filter(|&&t| t >= birth)
                .map(|&t| TrajectorySample { t, in_degree: self.in_degree_at(v, t) }),
        );
        samples.sort_unstable();
        samples.dedup_by_key(|s| s.t);
        samples
    }
}

/// `⌈n·2^-j⌉` for `j = 0, 1, ...` down to 1, ascending.
pub fn checkpoints(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut j = 0u32;
    loop {
        let denom = 1u64 << j.min(63);
        let t = n.div_ceil(denom);
        if out.last() != Some(&t) {
            out.push(t);
        }
        if t <= 1 || j >= 63 {
            break;
        }
        j += 1;
    }
    out.reverse();
    out
}
