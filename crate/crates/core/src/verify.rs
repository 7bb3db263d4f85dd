//! Oracle harness: indexed against naive generation, and the clustering
//! module against brute-force pair enumeration.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::clustering::{band_grid, ClusteringReport, SplitPolicy, Variant, VertexClustering};
use crate::error::{Result, SpaError};
use crate::generator::Generator;
use crate::graph::{GrownGraph, TrajectoryPolicy};
use crate::index::{CandidateSource, InfluenceEntry, InfluenceIndex, LinearScan};
use crate::model::ModelParams;

/// Largest `n` accepted by [`verify`] by default.
pub const VERIFY_GUARD: usize = 5_000;

/// First step at which two generators disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub step: u64,
    pub detail: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.step, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub params: ModelParams,
    pub edges: usize,
    pub divergence: Option<Divergence>,
    /// One line per clustering disagreement (capped).
    pub clustering_mismatches: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.divergence.is_none() && self.clustering_mismatches.is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        write!(f, "n={} seed={} edges={}: ", p.n, p.seed, self.edges)?;
        match (&self.divergence, self.clustering_mismatches.first()) {
            (None, None) => f.write_str("pass"),
            (Some(d), _) => write!(f, "FAIL generators diverge at {d}"),
            (None, Some(m)) => write!(f, "FAIL clustering mismatch ({} total), first: {m}", self.clustering_mismatches.len()),
        }
    }
}

/// Runs two candidate sources in lockstep and reports the first step whose
/// position, out-edges or degrees differ. Returns the common graph when the
/// runs agree throughout.
pub fn compare_sources<A: CandidateSource, B: CandidateSource>(
    params: &ModelParams,
    a: A,
    b: B,
) -> Result<(Option<Divergence>, Option<GrownGraph>)> {
    let mut ga = Generator::new(params.clone(), a)?;
    let mut gb = Generator::new(params.clone(), b)?;
    let m = params.dimension;
    while !ga.is_finished() {
        ga.step()?;
        gb.step()?;
        let t = ga.time();
        let v = (t - 1) as usize;
        if ga.positions()[v * m..] != gb.positions()[v * m..] {
            return Ok((Some(Divergence { step: t, detail: "positions differ".into() }), None));
        }
        let ea: Vec<u32> = ga.last_out_edges().collect();
        let eb: Vec<u32> = gb.last_out_edges().collect();
        if ea != eb {
            let render = |e: &[u32]| e.iter().rev().map(|w| (w + 1).to_string()).collect::<Vec<_>>().join(",");
            return Ok((
                Some(Divergence {
                    step: t,
                    detail: format!("out-edges of vertex {} differ: [{}] vs [{}]", v + 1, render(&ea), render(&eb)),
                }),
                None,
            ));
        }
        if ga.in_degrees() != gb.in_degrees() {
            return Ok((Some(Divergence { step: t, detail: "in-degrees differ".into() }), None));
        }
    }
    let graph = ga.finish(TrajectoryPolicy::None)?;
    let other = gb.finish(TrajectoryPolicy::None)?;
    if graph != other {
        return Ok((Some(Divergence { step: params.n as u64, detail: "final graphs differ".into() }), None));
    }
    Ok((None, Some(graph)))
}

/// Full check at one parameter point: indexed against naive generation,
/// then the clustering module against brute force under both split policies.
pub fn verify(params: &ModelParams, guard: usize) -> Result<VerifyReport> {
    verify_with(params, guard, InfluenceIndex::new(params))
}

/// [`verify`] with a caller-supplied source in place of the spatial index.
pub fn verify_with<S: CandidateSource>(params: &ModelParams, guard: usize, source: S) -> Result<VerifyReport> {
    if params.n > guard {
        return Err(SpaError::usage(format!("verify needs n <= {guard}, got {}", params.n)));
    }
    let (divergence, graph) = compare_sources(params, source, LinearScan::new(params))?;
    let mut report = VerifyReport { params: params.clone(), edges: 0, divergence, clustering_mismatches: Vec::new() };
    if let Some(graph) = graph {
        report.edges = graph.edge_count();
        for split in [SplitPolicy::HalfFinal, SplitPolicy::ThresholdLog(Default::default())] {
            report.clustering_mismatches.extend(check_clustering(&graph, split, 0.1));
        }
    }
    Ok(report)
}

/// Test hook: a candidate source that drops every candidate at one step.
pub struct DropCandidates<S> {
    pub inner: S,
    /// Step (1-based) whose covering set is emptied.
    pub step: u64,
}

impl<S: CandidateSource> CandidateSource for DropCandidates<S> {
    fn insert(&mut self, entry: InfluenceEntry) -> Result<()> {
        self.inner.insert(entry)
    }

    fn update_degree(&mut self, vertex: usize, in_degree: u32) -> Result<()> {
        self.inner.update_degree(vertex, in_degree)
    }

    fn advance(&mut self, t: u64) {
        self.inner.advance(t)
    }

    fn time(&self) -> u64 {
        self.inner.time()
    }

    fn covering_spheres(&self, x: &[f64], out: &mut Vec<usize>) {
        self.inner.covering_spheres(x, out);
        if self.inner.time() + 1 == self.step {
            out.clear();
        }
    }
}

/// Edge counts of one vertex by explicit enumeration of neighbour pairs
/// against a hash set of edges.
pub fn brute_force_vertex(graph: &GrownGraph, edges: &HashSet<(usize, usize)>, v: usize, split: &SplitPolicy) -> VertexClustering {
    let linked = |a: usize, b: usize| edges.contains(&(a, b)) || edges.contains(&(b, a));
    let ins: Vec<usize> = (0..graph.n()).filter(|&u| edges.contains(&(u, v))).collect();
    let outs: Vec<usize> = (0..graph.n()).filter(|&w| edges.contains(&(v, w))).collect();
    let k = ins.len();

    // T̂_v: arrival time of the in-neighbour that first pushes the degree past the threshold
    let threshold = match split {
        SplitPolicy::HalfFinal => k as f64 / 2.0,
        SplitPolicy::ThresholdLog(omega) => omega.threshold(graph.n()),
    };
    let mut cutoff = graph.n() as u64;
    for (j, &u) in ins.iter().enumerate() {
        if (j + 1) as f64 > threshold {
            cutoff = u as u64 + 1;
            break;
        }
    }
    let is_old = |w: usize| (w as u64) < cutoff;

    let mut in_edges = 0;
    let mut old_edges = 0;
    for (i, &a) in ins.iter().enumerate() {
        for &b in &ins[i + 1..] {
            if linked(a, b) {
                in_edges += 1;
                if is_old(a.min(b)) {
                    old_edges += 1;
                }
            }
        }
    }
    let all: Vec<usize> = ins.iter().chain(&outs).copied().collect();
    let mut undirected_edges = 0;
    for (i, &a) in all.iter().enumerate() {
        for &b in &all[i + 1..] {
            if linked(a, b) {
                undirected_edges += 1;
            }
        }
    }
    VertexClustering {
        vertex: v,
        in_degree: k as u32,
        degree: all.len() as u32,
        in_edges,
        old_edges,
        undirected_edges,
    }
}

/// Compares [`ClusteringReport`] with brute force: per-vertex counts and
/// values exactly, the old/new identity to 1e-12, exact-degree curves
/// exactly and banded curves to 1e-12.
pub fn check_clustering(graph: &GrownGraph, split: SplitPolicy, delta: f64) -> Vec<String> {
    const CAP: usize = 20;
    let mut problems = Vec::new();
    let edges: HashSet<(usize, usize)> = graph.edges().collect();
    let report = ClusteringReport::compute(graph, split);
    let mut brute = Vec::new();
    for v in 0..graph.n() {
        let b = brute_force_vertex(graph, &edges, v, &split);
        let eligible = b.in_degree >= 2 || b.degree >= 2;
        match (report.get(v), eligible) {
            (Some(r), true) if *r == b => {}
            (None, false) => {}
            (r, _) => problems.push(format!("{split}: vertex {} module {r:?} brute {b:?}", v + 1)),
        }
        if let (Some(c), Some(o), Some(nw)) = (b.directed(), b.old(), b.new_part()) {
            if (c - o - nw).abs() > 1e-12 {
                problems.push(format!("{split}: vertex {} c={c} old+new={}", v + 1, o + nw));
            }
        }
        if eligible {
            brute.push(b);
        }
    }

    for variant in Variant::ALL {
        let mut by_degree: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
        for b in &brute {
            if let Some(c) = b.value(variant) {
                by_degree.entry(b.degree_for(variant)).or_default().push(c);
            }
        }
        let expected: Vec<(f64, u64, f64)> = by_degree
            .iter()
            .map(|(&d, cs)| (d as f64, cs.len() as u64, cs.iter().sum::<f64>() / cs.len() as f64))
            .collect();
        let curve = report.curve(variant);
        if curve.points() != expected {
            problems.push(format!("{split}: {variant} exact-degree curve differs"));
        }
        let Some(max_degree) = curve.max_degree() else { continue };
        let Ok(banded) = curve.banded(delta) else {
            problems.push(format!("{split}: {variant} banded curve failed"));
            continue;
        };
        let mut expected_band = Vec::new();
        for d in band_grid(max_degree, delta) {
            let members: Vec<f64> = brute
                .iter()
                .filter_map(|b| {
                    let k = b.degree_for(variant) as f64;
                    let inside = k >= (1.0 - delta) * d - 1e-9 && k <= (1.0 + delta) * d + 1e-9;
                    inside.then(|| b.value(variant)).flatten()
                })
                .collect();
            if !members.is_empty() {
                expected_band.push((d, members.len() as u64, members.iter().sum::<f64>() / members.len() as f64));
            }
        }
        let same = banded.len() == expected_band.len()
            && banded
                .iter()
                .zip(&expected_band)
                .all(|(a, b)| a.d == b.0 && a.count == b.1 && (a.mean - b.2).abs() <= 1e-12);
        if !same {
            problems.push(format!("{split}: {variant} banded curve differs"));
        }
    }
    problems.truncate(CAP);
    problems
}
