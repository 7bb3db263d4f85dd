//! Subcommand bodies.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use spa_core::clustering::{DegreeCurve, OmegaMode, SplitPolicy, Variant};
use spa_core::config::RunConfig;
use spa_core::io::{self, CURVE_HEADER, SCATTER_HEADER, TRAJECTORY_HEADER};
use spa_core::model::a2_for_mean_degree;
use spa_core::stats::{degree_census, powerlaw_exponent, theory_constants, trajectory_check, DegreeCensus};
use spa_core::verify::verify as run_verify;
use spa_core::{generate as grow, ClusteringReport, GrownGraph, ModelParams, SpaError};

use crate::VerificationFailed;

pub struct Options {
    pub delta: f64,
    pub split: SplitPolicy,
    pub omega: OmegaMode,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ReplicaRecord {
    seed: u64,
    file: String,
    vertices: usize,
    edges: usize,
    wall_seconds: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    params: &'a ModelParams,
    tracking: String,
    replicas: Vec<ReplicaRecord>,
    wall_seconds: f64,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(SpaError::Io).with_context(|| format!("creating {}", dir.display()))
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    io::write_atomic(&path, contents.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

/// Graph file name without `.gz` and `.tsv`.
fn stem(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "graph".into());
    let name = name.strip_suffix(".gz").unwrap_or(&name);
    let name = name.strip_suffix(".tsv").unwrap_or(name);
    name.to_string()
}

fn load(path: &Path) -> Result<GrownGraph> {
    io::load_graph(path).with_context(|| format!("reading {}", path.display()))
}

pub fn generate(config: &RunConfig, gz: bool) -> Result<()> {
    create_dir(&config.output_dir)?;
    let start = Instant::now();
    let replicas = config
        .replica_params()
        .into_par_iter()
        .map(|params| -> Result<ReplicaRecord> {
            let t0 = Instant::now();
            let graph = grow(&params, config.tracking)?;
            let file = format!("graph_s{}.tsv{}", params.seed, if gz { ".gz" } else { "" });
            let path = config.output_dir.join(&file);
            io::save_graph(&graph, &path).with_context(|| format!("writing {}", path.display()))?;
            Ok(ReplicaRecord {
                seed: params.seed,
                file,
                vertices: graph.n(),
                edges: graph.edge_count(),
                wall_seconds: t0.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for r in &replicas {
        println!("{}: {} vertices, {} edges, {:.2}s", r.file, r.vertices, r.edges, r.wall_seconds);
    }
    let manifest = Manifest {
        tool: "spa",
        version: env!("CARGO_PKG_VERSION"),
        params: &config.model,
        tracking: config.tracking.to_string(),
        replicas,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    write_output(&config.output_dir, "manifest.json", &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    write_output(&config.output_dir, "config.txt", &config.to_text())
}

/// Exact and banded rows for all four variants.
fn curves_csv(curves: &[DegreeCurve], delta: f64) -> Result<String> {
    let mut out = format!("{CURVE_HEADER}\n");
    for (variant, curve) in Variant::ALL.iter().zip(curves) {
        io::curve_rows(&mut out, *variant, curve);
    }
    for (variant, curve) in Variant::ALL.iter().zip(curves) {
        io::band_rows(&mut out, *variant, &curve.banded(delta)?);
    }
    Ok(out)
}

fn census_and_exponent(dir: &Path, name: &str, params: &ModelParams, census: &DegreeCensus, d_min: u32) -> Result<()> {
    let theory = theory_constants(params, census.counts.len().max(1) - 1)?;
    write_output(dir, &format!("{name}.census.csv"), &io::census_csv(census, &theory))?;
    match powerlaw_exponent(census, d_min) {
        Ok(fit) => write_output(dir, &format!("{name}.exponent.csv"), &io::exponent_csv(&fit, &theory))?,
        Err(SpaError::InsufficientData(why)) => eprintln!("{name}: exponent skipped ({why})"),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

struct Analysed {
    name: String,
    params: ModelParams,
    curves: Vec<DegreeCurve>,
    census: DegreeCensus,
}

pub fn stats(files: &[PathBuf], opts: &Options, d_min: u32) -> Result<()> {
    let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
    create_dir(&dir)?;
    let analysed = files
        .par_iter()
        .map(|path| -> Result<Analysed> {
            let graph = load(path)?;
            let name = stem(path);
            let report = ClusteringReport::compute(&graph, opts.split);
            let curves: Vec<DegreeCurve> = Variant::ALL.iter().map(|v| report.curve(*v)).collect();
            write_output(&dir, &format!("{name}.curves.csv"), &curves_csv(&curves, opts.delta)?)?;
            write_output(&dir, &format!("{name}.scatter.csv"), &scatter_csv(&report, &Variant::ALL))?;
            let census = degree_census(&graph, None)?;
            census_and_exponent(&dir, &name, graph.params(), &census, d_min)?;
            if !graph.trajectories().is_empty() {
                write_output(&dir, &format!("{name}.trajectories.csv"), &trajectory_csv(&graph, None, opts.omega)?)?;
            }
            Ok(Analysed { name, params: graph.params().clone(), curves, census })
        })
        .collect::<Result<Vec<_>>>()?;

    for a in &analysed {
        let c = &a.census;
        println!(
            "{}: n={} mean out-degree {:.3}, N0/n {:.4}",
            a.name,
            c.total(),
            c.degree_sum() as f64 / c.total() as f64,
            c.fraction(0)
        );
    }
    if analysed.len() > 1 {
        let mut pooled = vec![DegreeCurve::default(); Variant::ALL.len()];
        for a in &analysed {
            for (p, c) in pooled.iter_mut().zip(&a.curves) {
                p.merge(c);
            }
        }
        write_output(&dir, "pooled.curves.csv", &curves_csv(&pooled, opts.delta)?)?;
        let census = DegreeCensus::pooled(analysed.iter().map(|a| &a.census));
        census_and_exponent(&dir, "pooled", &analysed[0].params, &census, d_min)?;
        println!("pooled: {} graphs", analysed.len());
    }
    Ok(())
}

pub fn sweep(config: &RunConfig, ps: &[f64]) -> Result<()> {
    create_dir(&config.output_dir)?;
    let mut out = String::from("p,variant,d,count,mean_c\n");
    for &p in ps {
        let mut base = config.model.clone();
        base.p = p;
        base.a2 = a2_for_mean_degree(p, 10.0);
        base.validate()?;
        let seeds = config.replica_seeds();
        let reports: Vec<ClusteringReport> = seeds
            .par_iter()
            .map(|&s| -> Result<ClusteringReport> {
                let graph = grow(&base.with_seed(s), spa_core::TrajectoryPolicy::None)?;
                Ok(ClusteringReport::compute(&graph, config.split))
            })
            .collect::<Result<Vec<_>>>()?;
        for variant in [Variant::Directed, Variant::Undirected] {
            let mut curve = DegreeCurve::default();
            for r in &reports {
                curve.merge(&r.curve(variant));
            }
            let mut rows = String::new();
            io::curve_rows(&mut rows, variant, &curve);
            io::band_rows(&mut rows, variant, &curve.banded(config.delta)?);
            for row in rows.lines() {
                out.push_str(&format!("{p},{row}\n"));
            }
        }
        println!("p={p}: A2={:.4}, {} replicas", base.a2, seeds.len());
    }
    write_output(&config.output_dir, "sweep.csv", &out)
}

pub fn verify(config: &RunConfig, guard: usize) -> Result<()> {
    let mut failures = 0;
    for params in config.replica_params() {
        let report = run_verify(&params, guard)?;
        println!("{report}");
        for line in report.clustering_mismatches.iter().skip(1).take(4) {
            println!("  {line}");
        }
        failures += usize::from(!report.passed());
    }
    if failures > 0 {
        return Err(VerificationFailed(failures).into());
    }
    Ok(())
}

fn trajectory_csv(graph: &GrownGraph, vertices: Option<&[usize]>, omega: OmegaMode) -> Result<String> {
    let omega = omega.value(graph.n());
    let chosen: Vec<usize> = match vertices {
        Some(list) => list.to_vec(),
        None => graph.trajectories().keys().copied().collect(),
    };
    let mut out = format!("{TRAJECTORY_HEADER}\n");
    for v in chosen {
        io::trajectory_row(&mut out, &trajectory_check(graph, v, omega)?);
    }
    Ok(out)
}

pub fn trajectory(file: &Path, vertices: &[usize], opts: &Options) -> Result<()> {
    let graph = load(file)?;
    if vertices.is_empty() && graph.trajectories().is_empty() {
        return Err(SpaError::Usage(format!(
            "{} records no trajectories; regenerate with --track all or --track top:K",
            file.display()
        ))
        .into());
    }
    let ids = vertices
        .iter()
        .map(|&v| {
            if v == 0 || v > graph.n() {
                Err(SpaError::Usage(format!("vertex {v} outside 1..={}", graph.n())))
            } else {
                Ok(v - 1)
            }
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let checks = trajectory_csv(&graph, (!ids.is_empty()).then_some(ids.as_slice()), opts.omega)?;
    match &opts.out {
        Some(dir) => {
            create_dir(dir)?;
            let name = stem(file);
            write_output(dir, &format!("{name}.trajectories.csv"), &checks)?;
            write_output(dir, &format!("{name}.trajectory_samples.csv"), &io::trajectory_samples_csv(&graph))
        }
        None => {
            print!("{checks}");
            Ok(())
        }
    }
}

fn scatter_csv(report: &ClusteringReport, variants: &[Variant]) -> String {
    let mut out = format!("{SCATTER_HEADER}\n");
    for &variant in variants {
        for (d, c) in report.scatter(variant) {
            out.push_str(&format!("{variant},{d},{c}\n"));
        }
    }
    out
}

pub fn scatter(file: &Path, variant: &str, opts: &Options) -> Result<()> {
    let variants: Vec<Variant> = if variant == "all" { Variant::ALL.to_vec() } else { vec![variant.parse()?] };
    let graph = load(file)?;
    let report = ClusteringReport::compute(&graph, opts.split);
    let csv = scatter_csv(&report, &variants);
    match &opts.out {
        Some(dir) => {
            create_dir(dir)?;
            write_output(dir, &format!("{}.scatter.csv", stem(file)), &csv)
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
