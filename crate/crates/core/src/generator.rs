//! The SPA growth process.
//!
//! Randomness contract for step `t` (1-based):
//! - `m` position uniforms `key.position(t, axis)`;
//! - for each covering vertex `u`, ascending, one coin `key.coin(t, u)`;
//!   the link exists iff the coin is below `p`.
//!
//! Coins are addressed by `(t, u)` rather than by draw order, so any two
//! candidate sources that agree on the covering set produce the same graph.

use crate::error::{Result, SpaError};
use crate::geometry::TorusPoint;
use crate::graph::{GrownGraph, Trajectories, TrajectoryPolicy};
use crate::index::{CandidateSource, InfluenceEntry, InfluenceIndex, LinearScan};
use crate::model::ModelParams;
use crate::rng::StreamKey;

/// Largest `n` accepted by [`generate_naive`] unless forced.
pub const NAIVE_GUARD: usize = 10_000;

/// Generation state after some prefix of the process.
pub struct Generator<S> {
    params: ModelParams,
    key: StreamKey,
    source: S,
    t: u64,
    coords: Vec<f64>,
    in_degree: Vec<u32>,
    edges: Vec<(u32, u32)>,
    candidates: Vec<usize>,
    position: Vec<f64>,
}

impl<S: CandidateSource> Generator<S> {
    pub fn new(params: ModelParams, source: S) -> Result<Self> {
        params.validate()?;
        let n = params.n;
        let m = params.dimension;
        let mut coords = Vec::new();
        coords
            .try_reserve_exact(n * m)
            .map_err(|e| SpaError::Resource(format!("positions for {n} vertices: {e}")))?;
        let mut in_degree = Vec::new();
        in_degree
            .try_reserve_exact(n)
            .map_err(|e| SpaError::Resource(format!("degrees for {n} vertices: {e}")))?;
        Ok(Generator {
            key: StreamKey::new(params.seed),
            params,
            source,
            t: 0,
            coords,
            in_degree,
            edges: Vec::new(),
            candidates: Vec::new(),
            position: vec![0.0; m],
        })
    }

    /// Number of steps taken so far.
    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn is_finished(&self) -> bool {
        self.t as usize >= self.params.n
    }

    /// Flat coordinates of every vertex placed so far.
    pub fn positions(&self) -> &[f64] {
        &self.coords
    }

    /// Current in-degree of every vertex placed so far.
    pub fn in_degrees(&self) -> &[u32] {
        &self.in_degree
    }

    /// Out-edge targets created at the most recent step.
    pub fn last_out_edges(&self) -> impl Iterator<Item = u32> + '_ {
        let newest = self.t.saturating_sub(1) as u32;
        self.edges.iter().rev().take_while(move |e| e.0 == newest).map(|e| e.1)
    }

    /// Advances from `G_{t-1}` to `G_t`.
    pub fn step(&mut self) -> Result<()> {
        if self.is_finished() {
            return Err(SpaError::usage(format!("process already reached n = {}", self.params.n)));
        }
        let t = self.t + 1;
        let v = self.t as usize;
        let m = self.params.dimension;
        for (axis, c) in self.position.iter_mut().enumerate() {
            *c = self.key.position(t, axis);
        }

        // spheres are evaluated at t-1; G_0 is empty so the first step has no candidates
        if t > 1 {
            debug_assert_eq!(self.source.time(), t - 1);
            self.source.covering_spheres(&self.position, &mut self.candidates);
            let p = self.params.p;
            for i in 0..self.candidates.len() {
                let u = self.candidates[i];
                if self.key.coin(t, u as u64) < p {
                    self.edges
                        .try_reserve(1)
                        .map_err(|e| SpaError::Resource(format!("edge storage: {e}")))?;
                    self.edges.push((v as u32, u as u32));
                    self.in_degree[u] += 1;
                    self.source.update_degree(u, self.in_degree[u])?;
                }
            }
        }

        self.source.advance(t);
        self.coords.extend_from_slice(&self.position);
        self.in_degree.push(0);
        let position = TorusPoint::new(self.position.clone())?;
        self.source.insert(InfluenceEntry { vertex: v, position, in_degree: 0 })?;
        debug_assert_eq!(self.coords.len(), (v + 1) * m);
        self.t = t;
        Ok(())
    }

    /// Runs the remaining steps and assembles the graph.
    pub fn run(mut self, policy: TrajectoryPolicy) -> Result<GrownGraph> {
        while !self.is_finished() {
            self.step()?;
        }
        self.finish(policy)
    }

    /// Assembles the graph from the steps taken so far.
    pub fn finish(self, policy: TrajectoryPolicy) -> Result<GrownGraph> {
        let mut params = self.params;
        params.n = self.t as usize;
        let mut graph = GrownGraph::from_edges(params, self.edges, Some(self.coords), Trajectories::new())?;
        graph.record_trajectories(policy);
        Ok(graph)
    }
}

/// Indexed generator.
pub fn generate(params: &ModelParams, policy: TrajectoryPolicy) -> Result<GrownGraph> {
    Generator::new(params.clone(), InfluenceIndex::new(params))?.run(policy)
}

/// Reference generator scanning every earlier vertex at every step.
pub fn generate_naive(params: &ModelParams, policy: TrajectoryPolicy, force: bool) -> Result<GrownGraph> {
    if params.n > NAIVE_GUARD && !force {
        return Err(SpaError::usage(format!(
            "naive generation is quadratic; n = {} exceeds the guard {NAIVE_GUARD}",
            params.n
        )));
    }
    Generator::new(params.clone(), LinearScan::new(params))?.run(policy)
}
