//! Property suites shared by the `properties` and `acceptance` targets.
//! Each suite returns a description of the first counterexample.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use spa_core::geometry::{radius_to_volume, volume_to_radius, wrapped_distance};
use spa_core::graph::TrajectoryPolicy;
use spa_core::io::{parse_graph, serialize_graph};
use spa_core::rng::StreamKey;
use spa_core::stats::degree_census;
use spa_core::{
    generate, CandidateSource, Generator, InfluenceEntry, InfluenceIndex, LinearScan, ModelParams, NormChoice,
    TorusPoint,
};

pub type Outcome = Result<(), String>;

/// Torus distance by explicit minimisation over all `3^m` integer shifts.
pub fn shifted_distance(x: &[f64], y: &[f64], norm: NormChoice) -> f64 {
    let m = x.len();
    let mut best = f64::INFINITY;
    for code in 0..3usize.pow(m as u32) {
        let mut c = code;
        let diffs: Vec<f64> = (0..m)
            .map(|i| {
                let u = (c % 3) as f64 - 1.0;
                c /= 3;
                x[i] - y[i] + u
            })
            .collect();
        let d = match norm {
            NormChoice::L2 => diffs.iter().map(|d| d * d).sum::<f64>().sqrt(),
            NormChoice::Linf => diffs.iter().fold(0.0f64, |a, d| a.max(d.abs())),
        };
        best = best.min(d);
    }
    best
}

/// Identity, symmetry, triangle inequality and agreement with the shift
/// minimisation on `triples` sampled triples, spread over four geometries.
pub fn metric_axioms(triples: u64) -> Outcome {
    let key = StreamKey::new(2024);
    let geometries = [(NormChoice::Linf, 2), (NormChoice::L2, 2), (NormChoice::L2, 3), (NormChoice::Linf, 1)];
    for s in 0..triples {
        let (norm, m) = geometries[(s % 4) as usize];
        let point = |j: usize| -> Vec<f64> { (0..m).map(|a| key.position(s + 1, j * 8 + a)).collect() };
        let (x, y, z) = (point(0), point(1), point(2));
        let dxy = wrapped_distance(&x, &y, norm);
        let dxz = wrapped_distance(&x, &z, norm);
        let dyz = wrapped_distance(&y, &z, norm);
        let fail = |what: &str| Err(format!("{what} fails for {norm} m={m} at {x:?} {y:?} {z:?}"));
        if wrapped_distance(&x, &x, norm) != 0.0 || dxy < 0.0 {
            return fail("identity");
        }
        if dxy != wrapped_distance(&y, &x, norm) {
            return fail("symmetry");
        }
        if dxz > dxy + dyz + 1e-12 {
            return fail("triangle inequality");
        }
        if (dxy - shifted_distance(&x, &y, norm)).abs() > 1e-12 {
            return fail("shift minimisation");
        }
    }
    Ok(())
}

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

pub fn volume_radius_roundtrip(cases: u32) -> Outcome {
    run(cases, (1e-9f64..=1.0, 1usize..=4, any::<bool>()), |(v, m, l2)| {
        let norm = if l2 { NormChoice::L2 } else { NormChoice::Linf };
        let r = volume_to_radius(v, m, norm).unwrap();
        prop_assert!((radius_to_volume(r, m, norm) - v).abs() <= 1e-12, "v={} m={} {}", v, m, norm);
        Ok(())
    })
}

pub fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (0.05f64..=1.0, 0.1f64..0.95, 0.2f64..8.0, 1usize..=3, any::<bool>(), 2usize..700, any::<u64>()).prop_map(
        |(p, frac, a2, dimension, l2, n, seed)| ModelParams {
            p,
            // keeps p·A1 < 1
            a1: frac / p,
            a2,
            dimension,
            norm: if l2 { NormChoice::L2 } else { NormChoice::Linf },
            n,
            seed,
        },
    )
}

/// Edge direction, no multi-edges, degree accounting and trajectory ends.
pub fn graph_invariants(cases: u32) -> Outcome {
    run(cases, params_strategy(), |params| {
        let g = generate(&params, TrajectoryPolicy::All).unwrap();
        prop_assert_eq!(g.n(), params.n);
        let (mut in_sum, mut out_sum) = (0u64, 0u64);
        for v in 0..g.n() {
            in_sum += g.in_degree(v) as u64;
            out_sum += g.out_degree(v) as u64;
            prop_assert!(g.out_neighbors(v).iter().all(|&w| (w as usize) < v), "edge to a younger vertex");
            prop_assert!(g.out_neighbors(v).windows(2).all(|w| w[0] < w[1]), "repeated edge");
            let last = g.trajectory(v).unwrap().last().copied().unwrap();
            prop_assert_eq!(last.in_degree, g.in_degree(v));
        }
        prop_assert_eq!(in_sum, g.edge_count() as u64);
        prop_assert_eq!(out_sum, g.edge_count() as u64);
        let census = degree_census(&g, None).unwrap();
        prop_assert_eq!(census.total(), params.n as u64);
        prop_assert_eq!(census.degree_sum(), g.edge_count() as u64);
        Ok(())
    })
}

/// Out-degrees never change after a vertex's own step, and in-degree sums
/// match the edge count after every step.
pub fn out_degree_freeze(n: usize) -> Outcome {
    let params = ModelParams { n, ..ModelParams::default() };
    let mut gen = Generator::new(params.clone(), InfluenceIndex::new(&params)).map_err(|e| e.to_string())?;
    let mut out_degrees: Vec<u32> = Vec::new();
    let mut edges = 0u64;
    while !gen.is_finished() {
        gen.step().map_err(|e| e.to_string())?;
        let new_edges = gen.last_out_edges().count() as u32;
        out_degrees.push(new_edges);
        edges += new_edges as u64;
        let in_sum: u64 = gen.in_degrees().iter().map(|&d| d as u64).sum();
        if in_sum != edges {
            return Err(format!("in-degree sum {in_sum} != {edges} edges at step {}", gen.time()));
        }
    }
    let graph = gen.finish(TrajectoryPolicy::None).map_err(|e| e.to_string())?;
    match out_degrees.iter().enumerate().find(|&(v, &d)| graph.out_degree(v) != d) {
        Some((v, _)) => Err(format!("out-degree of vertex {} changed after its step", v + 1)),
        None => Ok(()),
    }
}

pub fn serialization_identity(cases: u32) -> Outcome {
    run(cases, (params_strategy(), 0usize..4), |(params, track)| {
        let policy = [TrajectoryPolicy::None, TrajectoryPolicy::All, TrajectoryPolicy::TopK(1), TrajectoryPolicy::TopK(7)]
            [track];
        let g = generate(&params, policy).unwrap();
        let text = serialize_graph(&g);
        let back = parse_graph(text.as_bytes()).unwrap();
        prop_assert_eq!(serialize_graph(&back), text);
        prop_assert_eq!(back, g);
        Ok(())
    })
}

/// The spatial index and a linear scan report the same covering set at
/// random probe points once loaded with a grown graph.
pub fn index_matches_scan(cases: u32) -> Outcome {
    run(cases, (params_strategy(), any::<u64>()), |(params, probe_seed)| {
        let params = ModelParams { n: params.n.min(400), ..params };
        let graph = generate(&params, TrajectoryPolicy::None).unwrap();
        let mut index = InfluenceIndex::new(&params);
        let mut scan = LinearScan::new(&params);
        for v in 0..graph.n() {
            let position = TorusPoint::new(graph.position(v).unwrap().to_vec()).unwrap();
            for source in [&mut index as &mut dyn CandidateSource, &mut scan] {
                source.advance(v as u64 + 1);
                source.insert(InfluenceEntry { vertex: v, position: position.clone(), in_degree: 0 }).unwrap();
            }
        }
        for v in 0..graph.n() {
            index.update_degree(v, graph.in_degree(v)).unwrap();
            scan.update_degree(v, graph.in_degree(v)).unwrap();
        }
        let key = StreamKey::new(probe_seed);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for i in 0..20u64 {
            let x: Vec<f64> = (0..params.dimension).map(|axis| key.position(i + 1, axis)).collect();
            index.covering_spheres(&x, &mut a);
            scan.covering_spheres(&x, &mut b);
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(&a, &b);
        }
        Ok(())
    })
}
