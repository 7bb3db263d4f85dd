//! Graph files, CSV reports and atomic output.
//!
//! A graph file is plain text. Below, `→` stands for a tab:
//!
//! ```text
//! %spa-graph v1
//! p=0.7
//! a1=1
//! a2=4.2857142857142865
//! dimension=2
//! norm=linf
//! n=3
//! seed=1
//! %edges
//! 2→1
//! 3→1
//! %positions
//! 1→0.25→0.5
//! ...
//! %trajectories
//! 1→1→0
//! ...
//! ```
//!
//! Vertex ids are 1-based in files and 0-based in memory. Edges appear in
//! generation order (source ascending, then target ascending). The
//! positions and trajectories sections are optional. Floats use Rust's
//! shortest round-trip formatting, so serialize, parse, serialize yields
//! identical bytes. Paths ending in `.gz` are gzip-compressed; readers
//! detect gzip by its magic bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::clustering::{BandPoint, DegreeCurve, Variant};
use crate::error::{Result, SpaError};
use crate::graph::{GrownGraph, Trajectories, TrajectorySample};
use crate::model::ModelParams;
use crate::stats::{DegreeCensus, PowerLawFit, TheoryConstants, TrajectoryCheck};

pub const MAGIC: &str = "%spa-graph v1";

const PARAM_KEYS: [&str; 7] = ["p", "a1", "a2", "dimension", "norm", "n", "seed"];

/// Serializes a graph into the text format.
pub fn serialize_graph(graph: &GrownGraph) -> String {
    let params = graph.params();
    let mut out = String::with_capacity(16 * graph.edge_count() + 256);
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "p={}", params.p);
    let _ = writeln!(out, "a1={}", params.a1);
    let _ = writeln!(out, "a2={}", params.a2);
    let _ = writeln!(out, "dimension={}", params.dimension);
    let _ = writeln!(out, "norm={}", params.norm);
    let _ = writeln!(out, "n={}", params.n);
    let _ = writeln!(out, "seed={}", params.seed);
    out.push_str("%edges\n");
    for (s, t) in graph.edges() {
        let _ = writeln!(out, "{}\t{}", s + 1, t + 1);
    }
    if let Some(positions) = graph.positions() {
        out.push_str("%positions\n");
        for (v, coords) in positions.chunks(params.dimension).enumerate() {
            let _ = write!(out, "{}", v + 1);
            for c in coords {
                let _ = write!(out, "\t{c}");
            }
            out.push('\n');
        }
    }
    if !graph.trajectories().is_empty() {
        out.push_str("%trajectories\n");
        for (v, samples) in graph.trajectories() {
            for s in samples {
                let _ = writeln!(out, "{}\t{}\t{}", v + 1, s.t, s.in_degree);
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Edges,
    Positions,
    Trajectories,
}

struct Lines<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Iterator for Lines<'a> {
    /// `(byte offset, line without terminator)`
    type Item = (u64, &'a [u8]);

    fn next(&mut self) -> Option<Self::Item> {
        if self.pos >= self.data.len() {
            return None;
        }
        let start = self.pos;
        let rest = &self.data[start..];
        let (line, advance) = match rest.iter().position(|&b| b == b'\n') {
            Some(i) => (&rest[..i], i + 1),
            None => (rest, rest.len()),
        };
        self.pos += advance;
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        Some((start as u64, line))
    }
}

fn parse_err(offset: u64, message: impl Into<String>) -> SpaError {
    SpaError::Parse { offset, message: message.into() }
}

fn field<T: std::str::FromStr>(offset: u64, raw: Option<&str>, what: &str) -> Result<T> {
    let raw = raw.ok_or_else(|| parse_err(offset, format!("missing {what}")))?;
    raw.parse().map_err(|_| parse_err(offset, format!("bad {what} `{raw}`")))
}

/// Parses a graph from the text format.
pub fn parse_graph(data: &[u8]) -> Result<GrownGraph> {
    let mut lines = Lines { data, pos: 0 };
    match lines.next() {
        Some((_, l)) if l == MAGIC.as_bytes() => {}
        _ => return Err(parse_err(0, format!("expected `{MAGIC}`"))),
    }

    let mut header: [Option<String>; 7] = Default::default();
    let mut params: Option<ModelParams> = None;
    let mut section = Section::Header;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut positions: Option<Vec<f64>> = None;
    let mut trajectories = Trajectories::new();
    let mut edges_offset = 0u64;

    for (offset, raw) in lines {
        let line = std::str::from_utf8(raw).map_err(|_| parse_err(offset, "invalid UTF-8"))?;
        if let Some(name) = line.strip_prefix('%') {
            let next = match name {
                "edges" => Section::Edges,
                "positions" => Section::Positions,
                "trajectories" => Section::Trajectories,
                _ => return Err(parse_err(offset, format!("unknown section `{line}`"))),
            };
            let order = |s: Section| s as u8;
            if order(next) <= order(section) {
                return Err(parse_err(offset, format!("section `{line}` out of order")));
            }
            if section == Section::Header {
                params = Some(finish_header(&header, offset)?);
                edges_offset = offset;
            }
            if next == Section::Positions {
                positions = Some(Vec::new());
            }
            section = next;
            continue;
        }
        match section {
            Section::Header => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| parse_err(offset, format!("expected key=value, got `{line}`")))?;
                let slot = PARAM_KEYS
                    .iter()
                    .position(|k| *k == key)
                    .ok_or_else(|| parse_err(offset, format!("unknown header key `{key}`")))?;
                if header[slot].replace(value.to_string()).is_some() {
                    return Err(parse_err(offset, format!("duplicate header key `{key}`")));
                }
            }
            Section::Edges => {
                let params = params.as_ref().expect("header parsed");
                let mut parts = line.split('\t');
                let s: u32 = field(offset, parts.next(), "edge source")?;
                let t: u32 = field(offset, parts.next(), "edge target")?;
                if parts.next().is_some() {
                    return Err(parse_err(offset, "edge line has extra fields"));
                }
                if s == 0 || t == 0 || s as usize > params.n {
                    return Err(parse_err(offset, format!("edge ({s}, {t}) outside 1..={}", params.n)));
                }
                if t >= s {
                    return Err(parse_err(offset, format!("edge ({s}, {t}) does not point to an older vertex")));
                }
                if let Some(&last) = edges.last() {
                    if (s - 1, t - 1) <= last {
                        return Err(parse_err(offset, format!("edge ({s}, {t}) out of generation order or repeated")));
                    }
                }
                edges.push((s - 1, t - 1));
            }
            Section::Positions => {
                let params = params.as_ref().expect("header parsed");
                let coords = positions.as_mut().expect("section opened");
                let mut parts = line.split('\t');
                let v: usize = field(offset, parts.next(), "vertex id")?;
                if v != coords.len() / params.dimension + 1 {
                    return Err(parse_err(offset, format!("position for vertex {v} out of order")));
                }
                for axis in 0..params.dimension {
                    let c: f64 = field(offset, parts.next(), "coordinate")?;
                    if !(0.0..1.0).contains(&c) {
                        return Err(parse_err(offset, format!("coordinate {c} on axis {axis} outside [0, 1)")));
                    }
                    coords.push(c);
                }
                if parts.next().is_some() {
                    return Err(parse_err(offset, "position line has extra fields"));
                }
            }
            Section::Trajectories => {
                let params = params.as_ref().expect("header parsed");
                let mut parts = line.split('\t');
                let v: usize = field(offset, parts.next(), "vertex id")?;
                let t: u64 = field(offset, parts.next(), "time")?;
                let in_degree: u32 = field(offset, parts.next(), "in-degree")?;
                if parts.next().is_some() {
                    return Err(parse_err(offset, "trajectory line has extra fields"));
                }
                if v == 0 || v > params.n {
                    return Err(parse_err(offset, format!("trajectory vertex {v} outside 1..={}", params.n)));
                }
                let samples = trajectories.entry(v - 1).or_default();
                let sample = TrajectorySample { t, in_degree };
                if samples.last().is_some_and(|last| *last >= sample) {
                    return Err(parse_err(offset, format!("trajectory sample for vertex {v} out of order")));
                }
                samples.push(sample);
            }
        }
    }

    let params = match params {
        Some(p) => p,
        None => return Err(parse_err(data.len() as u64, "missing `%edges` section")),
    };
    if let Some(pos) = &positions {
        if pos.len() != params.n * params.dimension {
            return Err(parse_err(
                data.len() as u64,
                format!("positions section covers {} of {} vertices", pos.len() / params.dimension, params.n),
            ));
        }
    }
    GrownGraph::from_edges(params, edges, positions, trajectories).map_err(|e| parse_err(edges_offset, e.to_string()))
}

fn finish_header(header: &[Option<String>; 7], offset: u64) -> Result<ModelParams> {
    let get = |i: usize| {
        header[i]
            .as_deref()
            .ok_or_else(|| parse_err(offset, format!("header lacks `{}`", PARAM_KEYS[i])))
    };
    let params = ModelParams {
        p: field(offset, Some(get(0)?), "p")?,
        a1: field(offset, Some(get(1)?), "a1")?,
        a2: field(offset, Some(get(2)?), "a2")?,
        dimension: field(offset, Some(get(3)?), "dimension")?,
        norm: field(offset, Some(get(4)?), "norm")?,
        n: field(offset, Some(get(5)?), "n")?,
        seed: field(offset, Some(get(6)?), "seed")?,
    };
    params.validate().map_err(|e| parse_err(offset, e.to_string()))?;
    Ok(params)
}

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

/// Reads a graph file, transparently decompressing gzip.
pub fn load_graph(path: &Path) -> Result<GrownGraph> {
    let raw = fs::read(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut text = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut text)?;
        parse_graph(&text)
    } else {
        parse_graph(&raw)
    }
}

/// Writes a graph file atomically; `.gz` paths are compressed.
pub fn save_graph(graph: &GrownGraph, path: &Path) -> Result<()> {
    let text = serialize_graph(graph);
    if is_gz(path) {
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(text.as_bytes())?;
        write_atomic(path, &enc.finish()?)
    } else {
        write_atomic(path, text.as_bytes())
    }
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| SpaError::usage(format!("`{}` has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp: PathBuf = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// `variant,d,count,mean_c` for exact-degree bins.
pub fn curve_rows(out: &mut String, variant: Variant, curve: &DegreeCurve) {
    for (d, count, mean) in curve.points() {
        let _ = writeln!(out, "{variant},{d},{count},{mean}");
    }
}

/// `variant,d,count,mean_c` for banded bins; the variant carries a `_band` suffix.
pub fn band_rows(out: &mut String, variant: Variant, band: &[BandPoint]) {
    for b in band {
        let _ = writeln!(out, "{variant}_band,{:.4},{},{}", b.d, b.count, b.mean);
    }
}

pub const CURVE_HEADER: &str = "variant,d,count,mean_c";

pub const SCATTER_HEADER: &str = "variant,degree,c";

pub fn census_csv(census: &DegreeCensus, theory: &TheoryConstants) -> String {
    let mut out = String::from("i,count,fraction,c_i\n");
    for (i, &count) in census.counts.iter().enumerate() {
        let c_i = theory.c_coeffs.get(i).map(|c| c.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{i},{count},{},{c_i}", census.fraction(i));
    }
    out
}

pub fn exponent_csv(fit: &PowerLawFit, theory: &TheoryConstants) -> String {
    let ls = fit.ls_exponent.map(|x| x.to_string()).unwrap_or_default();
    format!(
        "estimate,stderr,d_min,tail_count,ls_exponent,theory\n{},{},{},{},{ls},{}\n",
        fit.estimate, fit.stderr, fit.d_min, fit.tail_count, theory.gamma
    )
}

pub const TRAJECTORY_HEADER: &str = "vertex,k,t_v,vacuous,ratio_min,ratio_max,samples_used";

pub fn trajectory_row(out: &mut String, check: &TrajectoryCheck) {
    let opt = |x: Option<f64>| x.map(|x| x.to_string()).unwrap_or_default();
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{}",
        check.vertex + 1,
        check.k,
        check.t_v,
        check.vacuous,
        opt(check.ratio_min),
        opt(check.ratio_max),
        check.samples_used
    );
}

/// `vertex,t,in_degree` rows for every recorded trajectory.
pub fn trajectory_samples_csv(graph: &GrownGraph) -> String {
    let mut out = String::from("vertex,t,in_degree\n");
    for (v, samples) in graph.trajectories() {
        for s in samples {
            let _ = writeln!(out, "{},{},{}", v + 1, s.t, s.in_degree);
        }
    }
    out
}
