//! Local clustering: directed `c⁻(v)`, undirected `c(v)`, the old/new split
//! of `c⁻(v)`, degree-binned and banded curves, and global clustering.
//!
//! Edges point from younger to older vertices and there is at most one edge
//! per unordered pair, so counting, for every neighbour `u` of `v`, the
//! out-edges of `u` landing back in the neighbourhood counts each edge of the
//! induced subgraph exactly once. Out-degrees are small, so this costs
//! `O(deg(v) · mean out-degree)` per vertex.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SpaError};
use crate::graph::GrownGraph;

/// Growth function `ω(n)` used by the log-threshold split.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum OmegaMode {
    /// `ln ln n`
    #[default]
    LogLog,
    /// `ln ln ln n`
    LogLogLog,
    Const(f64),
}

impl OmegaMode {
    pub fn value(self, n: usize) -> f64 {
        let ln = (n.max(3) as f64).ln();
        match self {
            OmegaMode::LogLog => ln.ln().max(0.0),
            OmegaMode::LogLogLog => ln.ln().max(1.0).ln().max(0.0),
            OmegaMode::Const(c) => c,
        }
    }

    /// `ω(n) · ln n`.
    pub fn threshold(self, n: usize) -> f64 {
        self.value(n) * (n.max(1) as f64).ln()
    }
}

impl FromStr for OmegaMode {
    type Err = SpaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loglog" => Ok(OmegaMode::LogLog),
            "logloglog" => Ok(OmegaMode::LogLogLog),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|c| *c > 0.0 && c.is_finite())
                .map(OmegaMode::Const)
                .ok_or_else(|| SpaError::usage(format!("bad omega mode `{s}` (loglog, logloglog, or a positive number)"))),
        }
    }
}

impl fmt::Display for OmegaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaMode::LogLog => f.write_str("loglog"),
            OmegaMode::LogLogLog => f.write_str("logloglog"),
            OmegaMode::Const(c) => write!(f, "{c}"),
        }
    }
}

/// How the old/new cut-off time `T̂_v` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SplitPolicy {
    /// First `t` with `deg⁻(v,t) > ω(n)·ln n`; `n` if never reached.
    ThresholdLog(OmegaMode),
    /// First `t` with `deg⁻(v,t) > deg⁻(v,n)/2`.
    #[default]
    HalfFinal,
}

impl SplitPolicy {
    pub fn parse(mode: &str, omega: OmegaMode) -> Result<Self> {
        match mode {
            "log" => Ok(SplitPolicy::ThresholdLog(omega)),
            "half" => Ok(SplitPolicy::HalfFinal),
            other => Err(SpaError::usage(format!("bad split mode `{other}` (log or half)"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SplitPolicy::ThresholdLog(_) => "log",
            SplitPolicy::HalfFinal => "half",
        }
    }

    fn threshold(&self, graph: &GrownGraph, v: usize) -> f64 {
        match self {
            SplitPolicy::ThresholdLog(omega) => omega.threshold(graph.n()),
            SplitPolicy::HalfFinal => graph.in_degree(v) as f64 / 2.0,
        }
    }

    /// Number of old in-neighbours of `v`: those present at `T̂_v`.
    pub fn old_count(&self, graph: &GrownGraph, v: usize) -> usize {
        let k = graph.in_degree(v) as usize;
        let threshold = self.threshold(graph, v);
        if k as f64 > threshold {
            // deg > threshold  <=>  deg >= floor(threshold) + 1
            threshold.floor() as usize + 1
        } else {
            k
        }
    }

    /// `T̂_v` itself.
    pub fn cutoff_time(&self, graph: &GrownGraph, v: usize) -> u64 {
        let k = graph.in_degree(v);
        if k as f64 > self.threshold(graph, v) {
            let old = self.old_count(graph, v);
            graph.in_neighbors(v)[old - 1] as u64 + 1
        } else {
            graph.n() as u64
        }
    }
}

impl fmt::Display for SplitPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitPolicy::ThresholdLog(omega) => write!(f, "log(omega={omega})"),
            SplitPolicy::HalfFinal => f.write_str("half"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Directed,
    Undirected,
    Old,
    New,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Directed, Variant::Undirected, Variant::Old, Variant::New];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Directed => "directed",
            Variant::Undirected => "undirected",
            Variant::Old => "old",
            Variant::New => "new",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = SpaError;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| SpaError::usage(format!("unknown variant `{s}`")))
    }
}

#[inline]
fn pairs(d: u64) -> u64 {
    d * d.saturating_sub(1) / 2
}

/// Edge counts inside the neighbourhoods of one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VertexClustering {
    pub vertex: usize,
    pub in_degree: u32,
    /// `deg⁻ + deg⁺`.
    pub degree: u32,
    /// Edges with both endpoints in `N⁻(v)`.
    pub in_edges: u64,
    /// Those whose target is an old in-neighbour.
    pub old_edges: u64,
    /// Edges with both endpoints in `N(v)`.
    pub undirected_edges: u64,
}

impl VertexClustering {
    pub fn directed(&self) -> Option<f64> {
        (self.in_degree >= 2).then(|| self.in_edges as f64 / pairs(self.in_degree as u64) as f64)
    }

    pub fn undirected(&self) -> Option<f64> {
        (self.degree >= 2).then(|| self.undirected_edges as f64 / pairs(self.degree as u64) as f64)
    }

    pub fn old(&self) -> Option<f64> {
        (self.in_degree >= 2).then(|| self.old_edges as f64 / pairs(self.in_degree as u64) as f64)
    }

    pub fn new_part(&self) -> Option<f64> {
        (self.in_degree >= 2)
            .then(|| (self.in_edges - self.old_edges) as f64 / pairs(self.in_degree as u64) as f64)
    }

    pub fn value(&self, variant: Variant) -> Option<f64> {
        match variant {
            Variant::Directed => self.directed(),
            Variant::Undirected => self.undirected(),
            Variant::Old => self.old(),
            Variant::New => self.new_part(),
        }
    }

    /// Degree the variant is binned by.
    pub fn degree_for(&self, variant: Variant) -> u32 {
        match variant {
            Variant::Undirected => self.degree,
            _ => self.in_degree,
        }
    }
}

/// Reusable marker arrays for neighbourhood scans.
struct Marks {
    stamp: Vec<u32>,
    tag: u32,
}

impl Marks {
    fn new(n: usize) -> Self {
        Marks { stamp: vec![0; n], tag: 0 }
    }

    fn next(&mut self) {
        self.tag = self.tag.wrapping_add(1);
        if self.tag == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.tag = 1;
        }
    }

    #[inline]
    fn set(&mut self, v: usize) {
        self.stamp[v] = self.tag;
    }

    #[inline]
    fn has(&self, v: usize) -> bool {
        self.stamp[v] == self.tag
    }
}

fn count_vertex(graph: &GrownGraph, v: usize, split: &SplitPolicy, marks: &mut Marks) -> VertexClustering {
    let ins = graph.in_neighbors(v);
    let outs = graph.out_neighbors(v);
    let old = split.old_count(graph, v);
    // the old in-neighbours are exactly the first `old` (arrival order), so a
    // target w is old iff w <= ins[old - 1]
    let old_last = if old > 0 { Some(ins[old - 1] as usize) } else { None };

    marks.next();
    for &w in ins {
        marks.set(w as usize);
    }
    let mut in_edges = 0u64;
    let mut old_edges = 0u64;
    for &u in ins {
        for &w in graph.out_neighbors(u as usize) {
            let w = w as usize;
            if marks.has(w) {
                in_edges += 1;
                if old_last.is_some_and(|last| w <= last) {
                    old_edges += 1;
                }
            }
        }
    }

    for &w in outs {
        marks.set(w as usize);
    }
    let mut undirected_edges = in_edges;
    for &u in outs {
        for &w in graph.out_neighbors(u as usize) {
            if marks.has(w as usize) {
                undirected_edges += 1;
            }
        }
    }
    // edges from an in-neighbour to an out-neighbour
    for &u in ins {
        for &w in graph.out_neighbors(u as usize) {
            if marks.has(w as usize) && (w as usize) < v {
                undirected_edges += 1;
            }
        }
    }

    VertexClustering {
        vertex: v,
        in_degree: ins.len() as u32,
        degree: (ins.len() + outs.len()) as u32,
        in_edges,
        old_edges,
        undirected_edges,
    }
}

/// `c⁻(v)`, or `None` when `deg⁻(v) < 2`.
pub fn local_clustering_directed(graph: &GrownGraph, v: usize) -> Option<f64> {
    count_vertex(graph, v, &SplitPolicy::HalfFinal, &mut Marks::new(graph.n())).directed()
}

/// `c(v)` on the undirected view, or `None` when `deg(v) < 2`.
pub fn local_clustering_undirected(graph: &GrownGraph, v: usize) -> Option<f64> {
    count_vertex(graph, v, &SplitPolicy::HalfFinal, &mut Marks::new(graph.n())).undirected()
}

/// `(c_old, c_new)` for `v`, or `None` when `deg⁻(v) < 2`.
pub fn old_new_split(graph: &GrownGraph, v: usize, policy: &SplitPolicy) -> Option<(f64, f64)> {
    let c = count_vertex(graph, v, policy, &mut Marks::new(graph.n()));
    Some((c.old()?, c.new_part()?))
}

/// `(count, sum)` of per-vertex values at one exact degree.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bin {
    pub count: u64,
    pub sum: f64,
}

impl Bin {
    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }
}

/// Exact-degree curve `d -> (count, mean c)`; empty bins are absent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DegreeCurve {
    pub bins: BTreeMap<u32, Bin>,
}

impl DegreeCurve {
    pub fn add(&mut self, degree: u32, value: f64) {
        let bin = self.bins.entry(degree).or_default();
        bin.count += 1;
        bin.sum += value;
    }

    /// Pools another curve into this one (vertex-weighted).
    pub fn merge(&mut self, other: &DegreeCurve) {
        for (&d, b) in &other.bins {
            let bin = self.bins.entry(d).or_default();
            bin.count += b.count;
            bin.sum += b.sum;
        }
    }

    pub fn mean(&self, degree: u32) -> Option<f64> {
        self.bins.get(&degree).map(Bin::mean)
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.bins.keys().next_back().copied()
    }

    /// Mean over the band `[(1-δ)d, (1+δ)d]`; `None` when the band is empty.
    pub fn band(&self, d: f64, delta: f64) -> Option<BandPoint> {
        let (lo, hi) = band_limits(d, delta);
        if lo > hi {
            return None;
        }
        let (count, sum) = self
            .bins
            .range(lo..=hi)
            .fold((0u64, 0.0), |(c, s), (_, b)| (c + b.count, s + b.sum));
        (count > 0).then(|| BandPoint { d, count, mean: sum / count as f64 })
    }

    /// Banded curve on the geometric grid `2·1.1^j`.
    pub fn banded(&self, delta: f64) -> Result<Vec<BandPoint>> {
        check_delta(delta)?;
        let Some(max) = self.max_degree() else {
            return Ok(Vec::new());
        };
        Ok(band_grid(max, delta).into_iter().filter_map(|d| self.band(d, delta)).collect())
    }

    /// `(d, mean)` pairs, ascending in `d`.
    pub fn points(&self) -> Vec<(f64, u64, f64)> {
        self.bins.iter().map(|(&d, b)| (d as f64, b.count, b.mean())).collect()
    }
}

pub const BAND_GRID_RATIO: f64 = 1.1;
const BAND_SLACK: f64 = 1e-9;

/// Integer degrees inside `[(1-δ)d, (1+δ)d]`.
pub fn band_limits(d: f64, delta: f64) -> (u32, u32) {
    let lo = ((1.0 - delta) * d - BAND_SLACK).ceil().max(0.0) as u32;
    let hi = ((1.0 + delta) * d + BAND_SLACK).floor().max(0.0) as u32;
    (lo, hi)
}

/// Band centres `2·1.1^j` whose band can still reach `max_degree`.
pub fn band_grid(max_degree: u32, delta: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut d = 2.0f64;
    while (1.0 - delta) * d <= max_degree as f64 + BAND_SLACK {
        out.push(d);
        d *= BAND_GRID_RATIO;
    }
    out
}

pub fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 0.5 {
        Ok(())
    } else {
        Err(SpaError::usage(format!("delta must lie in (0, 1/2), got {delta}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub d: f64,
    pub count: u64,
    pub mean: f64,
}

/// Per-vertex clustering of a whole graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringReport {
    pub split: SplitPolicy,
    /// Vertices with `deg⁻ >= 2` or `deg >= 2`, ascending by id.
    pub per_vertex: Vec<VertexClustering>,
}

impl ClusteringReport {
    pub fn compute(graph: &GrownGraph, split: SplitPolicy) -> Self {
        let mut marks = Marks::new(graph.n());
        let per_vertex = (0..graph.n())
            .filter(|&v| graph.in_degree(v) >= 2 || graph.in_degree(v) + graph.out_degree(v) >= 2)
            .map(|v| count_vertex(graph, v, &split, &mut marks))
            .collect();
        ClusteringReport { split, per_vertex }
    }

    pub fn values(&self, variant: Variant) -> impl Iterator<Item = (usize, u32, f64)> + '_ {
        self.per_vertex
            .iter()
            .filter_map(move |c| c.value(variant).map(|x| (c.vertex, c.degree_for(variant), x)))
    }

    pub fn curve(&self, variant: Variant) -> DegreeCurve {
        let mut curve = DegreeCurve::default();
        for (_, d, c) in self.values(variant) {
            curve.add(d, c);
        }
        curve
    }

    pub fn banded(&self, variant: Variant, delta: f64) -> Result<Vec<BandPoint>> {
        self.curve(variant).banded(delta)
    }

    /// One `(degree, c)` record per eligible vertex.
    pub fn scatter(&self, variant: Variant) -> Vec<(u32, f64)> {
        self.values(variant).map(|(_, d, c)| (d, c)).collect()
    }

    pub fn get(&self, v: usize) -> Option<&VertexClustering> {
        self.per_vertex
            .binary_search_by_key(&v, |c| c.vertex)
            .ok()
            .map(|i| &self.per_vertex[i])
    }
}

/// Undirected triangles and wedges (paths of length two).
pub fn triangles_and_wedges(graph: &GrownGraph) -> (u64, u64) {
    let mut marks = Marks::new(graph.n());
    let mut triangles = 0u64;
    for a in 0..graph.n() {
        marks.next();
        let outs = graph.out_neighbors(a);
        for &b in outs {
            marks.set(b as usize);
        }
        // a > b > c with a→b, b→c, a→c: each triangle once, from its youngest vertex
        for &b in outs {
            for &c in graph.out_neighbors(b as usize) {
                if marks.has(c as usize) {
                    triangles += 1;
                }
            }
        }
    }
    let wedges = (0..graph.n())
        .map(|v| pairs(graph.in_degree(v) as u64 + graph.out_degree(v) as u64))
        .sum();
    (triangles, wedges)
}

/// `3·triangles / wedges` on the undirected view; 0 when there are no wedges.
pub fn global_clustering(graph: &GrownGraph) -> f64 {
    let (triangles, wedges) = triangles_and_wedges(graph);
    if wedges == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / wedges as f64
    }
}
