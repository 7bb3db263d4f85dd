//! Spatial index answering "which spheres of influence contain this point".
//!
//! Radii are never stored. Each entry keeps its in-degree, and the radius is
//! evaluated from `(in_degree, t)` when a candidate is tested. Entries live in
//! one level of a hierarchy of uniform torus grids: level `l` has cell side
//! `2^-l` and an entry sits at a level whose side is at least its radius, in
//! the cell holding its centre. A query therefore only scans the 3^m cells
//! around the query point on each level.
//!
//! Radii shrink as `t` grows, so an entry placed for an older `t` is still
//! correctly (if loosely) bucketed. Levels are tightened on every degree
//! update and by a full sweep each time `t` doubles.

use rustc_hash::FxHashMap;

use crate::error::{Result, SpaError};
use crate::geometry::{wrapped_distance, TorusPoint};
use crate::model::ModelParams;

/// A vertex handed to a [`CandidateSource`].
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceEntry {
    /// 0-based vertex id; the vertex born at step `t` has id `t - 1`.
    pub vertex: usize,
    pub position: TorusPoint,
    pub in_degree: u32,
}

/// Closed-ball membership shared by every candidate source.
///
/// A clamped volume of 1 means the sphere is the whole torus.
#[inline]
pub fn sphere_contains(params: &ModelParams, centre: &[f64], in_degree: u32, t: u64, x: &[f64]) -> bool {
    let volume = params.sphere_volume(in_degree, t);
    if volume >= 1.0 {
        return true;
    }
    let radius = crate::geometry::radius_for_volume(volume, params.dimension, params.norm);
    wrapped_distance(centre, x, params.norm) <= radius
}

/// Anything that can enumerate the spheres covering a point.
///
/// Implementations must agree exactly with [`sphere_contains`] evaluated at
/// the synchronised time.
pub trait CandidateSource {
    fn insert(&mut self, entry: InfluenceEntry) -> Result<()>;

    /// Record a new in-degree for a vertex already present.
    fn update_degree(&mut self, vertex: usize, in_degree: u32) -> Result<()>;

    /// Move the clock to `t`; all spheres are evaluated at `t` afterwards.
    fn advance(&mut self, t: u64);

    /// Current synchronised time.
    fn time(&self) -> u64;

    /// Vertices whose sphere contains `x`, ascending by id, written to `out`.
    fn covering_spheres(&self, x: &[f64], out: &mut Vec<usize>);
}

#[derive(Debug, Clone)]
struct Slot {
    in_degree: u32,
    level: u8,
    present: bool,
}

/// Multi-level grid index.
#[derive(Debug, Clone)]
pub struct InfluenceIndex {
    params: ModelParams,
    t: u64,
    coords: Vec<f64>,
    slots: Vec<Slot>,
    max_level: u8,
    levels: Vec<FxHashMap<u64, Vec<u32>>>,
    level_counts: Vec<usize>,
    next_sweep: u64,
    len: usize,
}

impl InfluenceIndex {
    /// Index sized for up to `params.n` vertices.
    pub fn new(params: &ModelParams) -> Self {
        let m = params.dimension.max(1);
        let log2n = (params.n.max(2) as f64).log2();
        // finest useful cell ~ radius of the smallest possible sphere A2/n
        let mut max_level = (log2n / m as f64).ceil() as usize + 2;
        // cell keys are packed into 64 bits
        max_level = max_level.min(62 / m).max(1);
        let max_level = max_level as u8;
        InfluenceIndex {
            params: params.clone(),
            t: 1,
            coords: Vec::new(),
            slots: Vec::new(),
            max_level,
            levels: (0..=max_level).map(|_| FxHashMap::default()).collect(),
            level_counts: vec![0; max_level as usize + 1],
            next_sweep: 2,
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn max_level(&self) -> u8 {
        self.max_level
    }

    /// Level currently holding `vertex`, if present.
    pub fn level_of(&self, vertex: usize) -> Option<u8> {
        self.slots.get(vertex).filter(|s| s.present).map(|s| s.level)
    }

    /// Finest level whose cell side is at least the current radius.
    fn level_for(&self, in_degree: u32) -> u8 {
        let volume = self.params.sphere_volume(in_degree, self.t);
        if volume >= 1.0 {
            return 0;
        }
        let r = crate::geometry::radius_for_volume(volume, self.params.dimension, self.params.norm);
        let mut level = 0u8;
        let mut side = 1.0f64;
        while level < self.max_level && side * 0.5 >= r {
            side *= 0.5;
            level += 1;
        }
        level
    }

    fn position(&self, vertex: usize) -> &[f64] {
        let m = self.params.dimension;
        &self.coords[vertex * m..(vertex + 1) * m]
    }

    fn cell_key(&self, x: &[f64], level: u8) -> u64 {
        let k = 1u64 << level;
        x.iter().rev().fold(0u64, |key, &c| key * k + cell_coord(c, k))
    }

    fn place(&mut self, vertex: usize, level: u8) {
        let key = self.cell_key(self.position(vertex), level);
        self.levels[level as usize].entry(key).or_default().push(vertex as u32);
        self.level_counts[level as usize] += 1;
        self.slots[vertex].level = level;
    }

    fn unplace(&mut self, vertex: usize) {
        let level = self.slots[vertex].level;
        let key = self.cell_key(self.position(vertex), level);
        let grid = &mut self.levels[level as usize];
        if let Some(bucket) = grid.get_mut(&key) {
            if let Some(i) = bucket.iter().position(|&v| v as usize == vertex) {
                bucket.swap_remove(i);
            }
            if bucket.is_empty() {
                grid.remove(&key);
            }
        }
        self.level_counts[level as usize] -= 1;
    }

    fn relevel(&mut self, vertex: usize) {
        let level = self.level_for(self.slots[vertex].in_degree);
        if level != self.slots[vertex].level {
            self.unplace(vertex);
            self.place(vertex, level);
        }
    }

    fn sweep(&mut self) {
        for v in 0..self.slots.len() {
            if self.slots[v].present {
                self.relevel(v);
            }
        }
    }

    /// Convenience wrapper returning a fresh vector.
    pub fn query(&self, x: &TorusPoint) -> Vec<usize> {
        let mut out = Vec::new();
        self.covering_spheres(x.coords(), &mut out);
        out
    }
}

#[inline]
fn cell_coord(c: f64, k: u64) -> u64 {
    ((c * k as f64) as u64).min(k - 1)
}

impl CandidateSource for InfluenceIndex {
    fn insert(&mut self, entry: InfluenceEntry) -> Result<()> {
        let m = self.params.dimension;
        if entry.position.dim() != m {
            return Err(SpaError::usage(format!(
                "entry dimension {} does not match index dimension {m}",
                entry.position.dim()
            )));
        }
        let v = entry.vertex;
        if self.slots.get(v).is_some_and(|s| s.present) {
            return Err(SpaError::usage(format!("vertex {v} already indexed")));
        }
        if v >= self.slots.len() {
            self.slots.resize(v + 1, Slot { in_degree: 0, level: 0, present: false });
            self.coords.resize((v + 1) * m, 0.0);
        }
        self.coords[v * m..(v + 1) * m].copy_from_slice(entry.position.coords());
        self.slots[v] = Slot { in_degree: entry.in_degree, level: 0, present: true };
        let level = self.level_for(entry.in_degree);
        self.place(v, level);
        self.len += 1;
        Ok(())
    }

    fn update_degree(&mut self, vertex: usize, in_degree: u32) -> Result<()> {
        match self.slots.get_mut(vertex) {
            Some(slot) if slot.present => slot.in_degree = in_degree,
            _ => return Err(SpaError::usage(format!("vertex {vertex} is not indexed"))),
        }
        self.relevel(vertex);
        Ok(())
    }

    fn advance(&mut self, t: u64) {
        debug_assert!(t >= self.t);
        self.t = t.max(1);
        if self.t >= self.next_sweep {
            while self.next_sweep <= self.t {
                self.next_sweep *= 2;
            }
            self.sweep();
        }
    }

    fn time(&self) -> u64 {
        self.t
    }

    fn covering_spheres(&self, x: &[f64], out: &mut Vec<usize>) {
        out.clear();
        let m = self.params.dimension;
        debug_assert_eq!(x.len(), m);
        let mut axis_cells: Vec<[u64; 3]> = vec![[0; 3]; m];
        let mut axis_len = vec![0usize; m];
        let mut digit = vec![0usize; m];
        for level in 0..=self.max_level {
            if self.level_counts[level as usize] == 0 {
                continue;
            }
            let grid = &self.levels[level as usize];
            let k = 1u64 << level;
            for (axis, &c) in x.iter().enumerate() {
                let home = cell_coord(c, k);
                let cells = &mut axis_cells[axis];
                let mut len = 0;
                for cand in [(home + k - 1) % k, home, (home + 1) % k] {
                    if !cells[..len].contains(&cand) {
                        cells[len] = cand;
                        len += 1;
                    }
                }
                axis_len[axis] = len;
            }
            // odometer over the product of per-axis cell lists
            digit.iter_mut().for_each(|d| *d = 0);
            loop {
                let key = (0..m)
                    .rev()
                    .fold(0u64, |key, axis| key * k + axis_cells[axis][digit[axis]]);
                if let Some(bucket) = grid.get(&key) {
                    for &u in bucket {
                        let u = u as usize;
                        let slot = &self.slots[u];
                        if sphere_contains(&self.params, self.position(u), slot.in_degree, self.t, x) {
                            out.push(u);
                        }
                    }
                }
                let mut axis = 0;
                while axis < m {
                    digit[axis] += 1;
                    if digit[axis] < axis_len[axis] {
                        break;
                    }
                    digit[axis] = 0;
                    axis += 1;
                }
                if axis == m {
                    break;
                }
            }
        }
        out.sort_unstable();
    }
}

/// Reference source: scans every vertex on every query.
#[derive(Debug, Clone)]
pub struct LinearScan {
    params: ModelParams,
    t: u64,
    coords: Vec<f64>,
    degrees: Vec<Option<u32>>,
}

impl LinearScan {
    pub fn new(params: &ModelParams) -> Self {
        LinearScan { params: params.clone(), t: 1, coords: Vec::new(), degrees: Vec::new() }
    }
}

impl CandidateSource for LinearScan {
    fn insert(&mut self, entry: InfluenceEntry) -> Result<()> {
        let m = self.params.dimension;
        if entry.position.dim() != m {
            return Err(SpaError::usage("entry dimension does not match"));
        }
        let v = entry.vertex;
        if self.degrees.get(v).is_some_and(Option::is_some) {
            return Err(SpaError::usage(format!("vertex {v} already indexed")));
        }
        if v >= self.degrees.len() {
            self.degrees.resize(v + 1, None);
            self.coords.resize((v + 1) * m, 0.0);
        }
        self.coords[v * m..(v + 1) * m].copy_from_slice(entry.position.coords());
        self.degrees[v] = Some(entry.in_degree);
        Ok(())
    }

    fn update_degree(&mut self, vertex: usize, in_degree: u32) -> Result<()> {
        match self.degrees.get_mut(vertex) {
            Some(Some(d)) => {
                *d = in_degree;
                Ok(())
            }
            _ => Err(SpaError::usage(format!("vertex {vertex} is not indexed"))),
        }
    }

    fn advance(&mut self, t: u64) {
        self.t = t.max(1);
    }

    fn time(&self) -> u64 {
        self.t
    }

    fn covering_spheres(&self, x: &[f64], out: &mut Vec<usize>) {
        out.clear();
        let m = self.params.dimension;
        for (u, deg) in self.degrees.iter().enumerate() {
            if let Some(deg) = *deg {
                if sphere_contains(&self.params, &self.coords[u * m..(u + 1) * m], deg, self.t, x) {
                    out.push(u);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NormChoice;
    use crate::rng::StreamKey;

    fn params(norm: NormChoice, dim: usize) -> ModelParams {
        ModelParams { p: 0.5, a1: 1.0, a2: 1.0, dimension: dim, norm, n: 5000, seed: 3 }
    }

    fn point(key: StreamKey, i: u64, m: usize) -> TorusPoint {
        TorusPoint::new((0..m).map(|a| key.position(i, a)).collect()).unwrap()
    }

    #[test]
    fn empty_index_returns_nothing() {
        let idx = InfluenceIndex::new(&params(NormChoice::Linf, 2));
        assert!(idx.query(&TorusPoint::new(vec![0.3, 0.3]).unwrap()).is_empty());
    }

    #[test]
    fn insert_then_query_at_centre() {
        let mut idx = InfluenceIndex::new(&params(NormChoice::L2, 2));
        idx.advance(100);
        let pos = TorusPoint::new(vec![0.2, 0.9]).unwrap();
        idx.insert(InfluenceEntry { vertex: 0, position: pos.clone(), in_degree: 0 }).unwrap();
        assert_eq!(idx.query(&pos), vec![0]);
        // radius at t=100, deg 0: area 0.01 -> r = sqrt(0.01/π) ≈ 0.0564
        let far = TorusPoint::new(vec![0.2, 0.96]).unwrap();
        assert!(idx.query(&far).is_empty());
        let dup = idx.insert(InfluenceEntry { vertex: 0, position: pos, in_degree: 0 });
        assert!(matches!(dup, Err(SpaError::Usage(_))));
        assert!(idx.update_degree(7, 1).is_err());
    }

    #[test]
    fn boundary_is_closed() {
        // Linf, m=1, A1=A2=1, t=8, deg 0: volume 1/8, radius exactly 1/16
        let p = params(NormChoice::Linf, 1);
        let mut idx = InfluenceIndex::new(&p);
        idx.advance(8);
        idx.insert(InfluenceEntry {
            vertex: 4,
            position: TorusPoint::new(vec![0.5]).unwrap(),
            in_degree: 0,
        })
        .unwrap();
        assert_eq!(idx.query(&TorusPoint::new(vec![0.5625]).unwrap()), vec![4]);
        assert!(idx.query(&TorusPoint::new(vec![0.5626]).unwrap()).is_empty());
    }

    #[test]
    fn same_class_update_keeps_level() {
        let p = params(NormChoice::Linf, 2);
        let mut idx = InfluenceIndex::new(&p);
        idx.advance(1000);
        idx.insert(InfluenceEntry { vertex: 0, position: TorusPoint::new(vec![0.5, 0.5]).unwrap(), in_degree: 10 })
            .unwrap();
        let before = idx.level_of(0).unwrap();
        idx.update_degree(0, 11).unwrap();
        assert_eq!(idx.level_of(0).unwrap(), before);
    }

    #[test]
    fn shrinking_radius_moves_boundary() {
        // Linf, m=1, t=64: deg 31 -> volume 1/2, r = 1/4; deg 7 -> volume 1/8, r = 1/16
        let p = params(NormChoice::Linf, 1);
        let mut idx = InfluenceIndex::new(&p);
        idx.advance(64);
        let centre = TorusPoint::new(vec![0.5]).unwrap();
        idx.insert(InfluenceEntry { vertex: 0, position: centre, in_degree: 31 }).unwrap();
        let old_edge = TorusPoint::new(vec![0.75]).unwrap();
        let new_edge = TorusPoint::new(vec![0.5625]).unwrap();
        assert_eq!(idx.query(&old_edge), vec![0]);
        let coarse = idx.level_of(0).unwrap();
        idx.update_degree(0, 7).unwrap();
        assert!(idx.level_of(0).unwrap() > coarse);
        assert!(idx.query(&old_edge).is_empty());
        assert_eq!(idx.query(&new_edge), vec![0]);
    }

    #[test]
    fn decay_matches_direct_formula() {
        let p = params(NormChoice::Linf, 1);
        assert_eq!(p.sphere_volume(0, 10), 0.1);
        assert_eq!(p.sphere_volume(0, 20), 0.05);
        let mut idx = InfluenceIndex::new(&p);
        idx.advance(10);
        idx.insert(InfluenceEntry { vertex: 0, position: TorusPoint::new(vec![0.5]).unwrap(), in_degree: 0 })
            .unwrap();
        // r(10) = 0.05, r(20) = 0.025
        let probe = TorusPoint::new(vec![0.54]).unwrap();
        assert_eq!(idx.query(&probe), vec![0]);
        idx.advance(20);
        assert!(idx.query(&probe).is_empty());
    }

    #[test]
    fn clamped_sphere_covers_whole_torus() {
        let p = params(NormChoice::L2, 2);
        let mut idx = InfluenceIndex::new(&p);
        idx.advance(3);
        // A1·2 + A2 = 3 >= t
        idx.insert(InfluenceEntry { vertex: 0, position: TorusPoint::new(vec![0.0, 0.0]).unwrap(), in_degree: 2 })
            .unwrap();
        assert_eq!(idx.query(&TorusPoint::new(vec![0.5, 0.5]).unwrap()), vec![0]);
        idx.advance(4);
        assert!(idx.query(&TorusPoint::new(vec![0.5, 0.5]).unwrap()).is_empty());
    }

    fn oracle_equivalence(norm: NormChoice, dim: usize, count: usize, seed: u64) {
        let p = params(norm, dim);
        let key = StreamKey::new(seed);
        let mut idx = InfluenceIndex::new(&p);
        let mut naive = LinearScan::new(&p);
        let mut degrees = vec![0u32; count];
        let (mut got, mut want) = (Vec::new(), Vec::new());
        for v in 0..count {
            let t = v as u64 + 1;
            idx.advance(t);
            naive.advance(t);
            let pos = point(key, 2 * t, dim);
            let entry = InfluenceEntry { vertex: v, position: pos, in_degree: 0 };
            idx.insert(entry.clone()).unwrap();
            naive.insert(entry).unwrap();
            // bump a pseudo-random earlier vertex
            let u = (key.coin(t, 0) * (v + 1) as f64) as usize;
            degrees[u] += 1 + (key.coin(t, 1) * 3.0) as u32;
            idx.update_degree(u, degrees[u]).unwrap();
            naive.update_degree(u, degrees[u]).unwrap();
            if v % 7 == 0 {
                let q = point(key, 2 * t + 1, dim);
                idx.covering_spheres(q.coords(), &mut got);
                naive.covering_spheres(q.coords(), &mut want);
                assert_eq!(got, want, "t={t}");
            }
        }
        for i in 0..200 {
            let q = point(key, 10_000_000 + i, dim);
            idx.covering_spheres(q.coords(), &mut got);
            naive.covering_spheres(q.coords(), &mut want);
            assert_eq!(got, want);
        }
    }

    #[test]
    fn randomized_updates_match_linear_scan() {
        for (norm, dim) in [
            (NormChoice::Linf, 1),
            (NormChoice::Linf, 2),
            (NormChoice::L2, 2),
            (NormChoice::L2, 3),
            (NormChoice::Linf, 3),
        ] {
            oracle_equivalence(norm, dim, 2000, dim as u64 * 31 + 7);
        }
    }

    #[test]
    fn hundred_random_entries_match_scan() {
        let p = params(NormChoice::L2, 2);
        let key = StreamKey::new(99);
        let mut idx = InfluenceIndex::new(&p);
        let mut naive = LinearScan::new(&p);
        idx.advance(150);
        naive.advance(150);
        for v in 0..100 {
            let entry = InfluenceEntry {
                vertex: v,
                position: point(key, v as u64, 2),
                in_degree: (key.coin(v as u64, 9) * 20.0) as u32,
            };
            idx.insert(entry.clone()).unwrap();
            naive.insert(entry).unwrap();
        }
        let mut want = Vec::new();
        for i in 0..100 {
            let q = point(key, 1000 + i, 2);
            naive.covering_spheres(q.coords(), &mut want);
            assert_eq!(idx.query(&q), want);
        }
    }
}
