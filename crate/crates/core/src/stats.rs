//! Degree statistics and the reference values they are compared against.

use std::collections::BTreeMap;

use crate::error::{Result, SpaError};
use crate::geometry::{radius_for_volume, wrapped_distance, TorusPoint};
use crate::graph::GrownGraph;
use crate::model::ModelParams;

/// Limits predicted for a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryConstants {
    /// In-degree power-law exponent `1 + 1/(p·A1)`.
    pub gamma: f64,
    /// Asymptotic mean out-degree `p·A2 / (1 - p·A1)`.
    pub mean_out: f64,
    /// Limiting fraction `c_i` of vertices with in-degree `i`, for `i = 0..=i_max`.
    pub c_coeffs: Vec<f64>,
}

pub fn theory_constants(params: &ModelParams, i_max: usize) -> Result<TheoryConstants> {
    let (p, a1, a2) = (params.p, params.a1, params.a2);
    let pa1 = p * a1;
    if pa1 >= 1.0 {
        return Err(SpaError::domain(format!("p·A1 must be < 1, got {pa1}")));
    }
    if p <= 0.0 || a1 <= 0.0 || a2 <= 0.0 {
        return Err(SpaError::domain("theory constants need p > 0, A1 > 0, A2 > 0"));
    }
    let mut c = Vec::with_capacity(i_max + 1);
    c.push(1.0 / (1.0 + p * a2));
    for i in 1..=i_max {
        let prev = c[i - 1];
        let fi = i as f64;
        c.push(prev * p * (a1 * (fi - 1.0) + a2) / (1.0 + p * (a1 * fi + a2)));
    }
    let constants = TheoryConstants { gamma: 1.0 + 1.0 / pa1, mean_out: p * a2 / (1.0 - pa1), c_coeffs: c };
    for (i, &ci) in constants.c_coeffs.iter().enumerate() {
        let direct = census_coefficient_product(params, i);
        if ((ci - direct) / direct).abs() > 1e-12 {
            return Err(SpaError::domain(format!(
                "c_{i} recurrence {ci} disagrees with product form {direct}"
            )));
        }
    }
    Ok(constants)
}

/// `c_i = p^i / (1 + pA2 + ipA1) · Π_{j<i} (jA1 + A2) / (1 + pA2 + jpA1)`,
/// with one factor of `p` folded into each product term to stay in range.
pub fn census_coefficient_product(params: &ModelParams, i: usize) -> f64 {
    let (p, a1, a2) = (params.p, params.a1, params.a2);
    let base = 1.0 + p * a2;
    let prod: f64 = (0..i)
        .map(|j| {
            let j = j as f64;
            p * (j * a1 + a2) / (base + j * p * a1)
        })
        .product();
    prod / (base + i as f64 * p * a1)
}

/// In-degree counts of `G_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeCensus {
    pub t: u64,
    /// `counts[i]` = number of vertices with in-degree `i`.
    pub counts: Vec<u64>,
}

impl DegreeCensus {
    pub fn from_degrees(t: u64, degrees: impl IntoIterator<Item = u32>) -> Self {
        let mut counts = Vec::new();
        for d in degrees {
            let d = d as usize;
            if d >= counts.len() {
                counts.resize(d + 1, 0);
            }
            counts[d] += 1;
        }
        DegreeCensus { t, counts }
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts.get(i).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `Σ i·N_i`.
    pub fn degree_sum(&self) -> u64 {
        self.counts.iter().enumerate().map(|(i, &c)| i as u64 * c).sum()
    }

    pub fn fraction(&self, i: usize) -> f64 {
        self.count(i) as f64 / self.total().max(1) as f64
    }

    /// Pools several censuses (counts summed; `t` summed).
    pub fn pooled<'a>(censuses: impl IntoIterator<Item = &'a DegreeCensus>) -> DegreeCensus {
        let mut out = DegreeCensus { t: 0, counts: Vec::new() };
        for c in censuses {
            out.t += c.t;
            if c.counts.len() > out.counts.len() {
                out.counts.resize(c.counts.len(), 0);
            }
            for (i, &k) in c.counts.iter().enumerate() {
                out.counts[i] += k;
            }
        }
        out
    }
}

/// Census of `G_t`; `None` means `t = n`.
pub fn degree_census(graph: &GrownGraph, t: Option<u64>) -> Result<DegreeCensus> {
    let n = graph.n() as u64;
    let t = t.unwrap_or(n);
    if t == 0 || t > n {
        return Err(SpaError::usage(format!("census time {t} outside [1, {n}]")));
    }
    let degrees = (0..t as usize).map(|v| graph.in_degree_at(v, t));
    Ok(DegreeCensus::from_degrees(t, degrees))
}

/// Per-in-degree counts (`0..=i_max`) of vertices of `G_t` inside the closed
/// ball of the given volume around `center`.
pub fn ball_census(graph: &GrownGraph, center: &TorusPoint, volume: f64, t: u64, i_max: usize) -> Result<Vec<u64>> {
    let params = graph.params();
    if !(volume > 0.0 && volume <= 1.0) {
        return Err(SpaError::usage(format!("ball volume {volume} outside (0, 1]")));
    }
    if center.dim() != params.dimension {
        return Err(SpaError::usage("ball centre dimension does not match the graph"));
    }
    let n = graph.n() as u64;
    if t == 0 || t > n {
        return Err(SpaError::usage(format!("census time {t} outside [1, {n}]")));
    }
    if !graph.has_positions() {
        return Err(SpaError::usage("graph has no positions; ball censuses need them"));
    }
    let radius = radius_for_volume(volume, params.dimension, params.norm);
    let mut counts = vec![0u64; i_max + 1];
    for v in 0..t as usize {
        let pos = graph.position(v).expect("positions present");
        if volume >= 1.0 || wrapped_distance(pos, center.coords(), params.norm) <= radius {
            let d = graph.in_degree_at(v, t) as usize;
            if d <= i_max {
                counts[d] += 1;
            }
        }
    }
    Ok(counts)
}

/// Nine fixed ball centres: a 3×3 grid on the first two axes (other axes at
/// 1/2), or nine evenly spaced points when `m = 1`.
pub fn ball_centers(m: usize) -> Vec<TorusPoint> {
    (0..9)
        .map(|k| {
            let coords = if m == 1 {
                vec![(k as f64 + 0.5) / 9.0]
            } else {
                let mut c = vec![0.5; m];
                c[0] = (k % 3) as f64 / 3.0 + 1.0 / 6.0;
                c[1] = (k / 3) as f64 / 3.0 + 1.0 / 6.0;
                c
            };
            TorusPoint::new(coords).expect("centres lie in [0,1)")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    pub estimate: f64,
    pub stderr: f64,
    pub d_min: u32,
    pub tail_count: u64,
    /// Exponent from a least-squares line through log-binned densities.
    pub ls_exponent: Option<f64>,
}

pub const MIN_TAIL: u64 = 100;

/// Tail exponent by the continuous-approximation MLE
/// `γ = 1 + N / Σ ln(d / (d_min - 1/2))` over degrees `d >= d_min`.
pub fn powerlaw_exponent(census: &DegreeCensus, d_min: u32) -> Result<PowerLawFit> {
    if d_min == 0 {
        return Err(SpaError::usage("d_min must be at least 1"));
    }
    let tail: Vec<(usize, u64)> = census
        .counts
        .iter()
        .enumerate()
        .skip(d_min as usize)
        .filter(|(_, &c)| c > 0)
        .map(|(d, &c)| (d, c))
        .collect();
    let n: u64 = tail.iter().map(|(_, c)| c).sum();
    if n < MIN_TAIL {
        return Err(SpaError::InsufficientData(format!(
            "{n} vertices with degree >= {d_min}; need at least {MIN_TAIL} ({} short)",
            MIN_TAIL - n
        )));
    }
    if tail.len() < 2 {
        return Err(SpaError::InsufficientData(format!(
            "all {n} tail vertices share degree {}; the exponent is not identifiable",
            tail[0].0
        )));
    }
    let shift = d_min as f64 - 0.5;
    let log_sum: f64 = tail.iter().map(|&(d, c)| c as f64 * (d as f64 / shift).ln()).sum();
    let estimate = 1.0 + n as f64 / log_sum;
    Ok(PowerLawFit {
        estimate,
        stderr: (estimate - 1.0) / (n as f64).sqrt(),
        d_min,
        tail_count: n,
        ls_exponent: log_binned_exponent(&tail),
    })
}

/// Densities in bins `[b, 2b)` fitted on log-log axes.
fn log_binned_exponent(tail: &[(usize, u64)]) -> Option<f64> {
    let mut bins: BTreeMap<u32, u64> = BTreeMap::new();
    let lo = tail.first()?.0 as f64;
    for &(d, c) in tail {
        let b = (d as f64 / lo).log2().floor() as u32;
        *bins.entry(b).or_default() += c;
    }
    let points: Vec<(f64, f64)> = bins
        .iter()
        .map(|(&b, &c)| {
            let start = lo * 2f64.powi(b as i32);
            let width = start;
            // geometric midpoint of [start, 2·start)
            (start * 2f64.sqrt(), c as f64 / width)
        })
        .collect();
    let fit = least_squares(points.iter().map(|&(x, y)| (x.ln(), y.ln())))?;
    Some(-fit.slope)
}

/// Degree-trajectory concentration for one vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryCheck {
    pub vertex: usize,
    /// Final in-degree.
    pub k: u32,
    /// Onset time `n (ω ln n / k)^{1/(p·A1)}`, clamped to `[1, n]`.
    pub t_v: f64,
    /// Set when `k < ω ln n`; no ratios are reported then.
    pub vacuous: bool,
    pub ratio_min: Option<f64>,
    pub ratio_max: Option<f64>,
    pub samples_used: usize,
}

/// Extremes of `deg⁻(v,t) / (k (t/n)^{p·A1})` over the recorded samples
/// with `t >= T_v`.
pub fn trajectory_check(graph: &GrownGraph, vertex: usize, omega: f64) -> Result<TrajectoryCheck> {
    if vertex >= graph.n() {
        return Err(SpaError::usage(format!("vertex {} beyond n = {}", vertex + 1, graph.n())));
    }
    let samples = graph.trajectory(vertex)?;
    let params = graph.params();
    let pa1 = params.p * params.a1;
    let n = graph.n() as f64;
    let k = graph.in_degree(vertex);
    let threshold = omega * n.ln();
    let vacuous = (k as f64) < threshold || pa1 <= 0.0;
    let t_v = if k == 0 || pa1 <= 0.0 {
        n
    } else {
        (n * (threshold / k as f64).powf(1.0 / pa1)).clamp(1.0, n)
    };
    if vacuous {
        return Ok(TrajectoryCheck {
            vertex,
            k,
            t_v,
            vacuous,
            ratio_min: None,
            ratio_max: None,
            samples_used: 0,
        });
    }
    let ratios: Vec<f64> = samples
        .iter()
        .filter(|s| s.t as f64 >= t_v)
        .map(|s| s.in_degree as f64 / (k as f64 * (s.t as f64 / n).powf(pa1)))
        .collect();
    let ratio_min = ratios.iter().copied().reduce(f64::min);
    let ratio_max = ratios.iter().copied().reduce(f64::max);
    Ok(TrajectoryCheck { vertex, k, t_v, vacuous, ratio_min, ratio_max, samples_used: ratios.len() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Ordinary least squares `y = slope·x + intercept`; `None` with fewer than
/// two points or no spread in `x`.
pub fn least_squares(points: impl IntoIterator<Item = (f64, f64)>) -> Option<LineFit> {
    let pts: Vec<(f64, f64)> = points.into_iter().collect();
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LineFit { slope, intercept, r2, points: n })
}

pub const MIN_SLOPE_BINS: usize = 5;

/// Selects `(d, mean)` points with `d_lo <= d <= d_hi`, `count >= min_count`
/// and a positive mean, requiring at least five.
fn slope_points(curve: &[(f64, u64, f64)], d_lo: f64, d_hi: f64, min_count: u64) -> Result<Vec<(f64, f64)>> {
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|&&(d, count, mean)| d >= d_lo && d <= d_hi && count >= min_count && mean > 0.0)
        .map(|&(d, _, mean)| (d.ln(), mean.ln()))
        .collect();
    if pts.len() < MIN_SLOPE_BINS {
        return Err(SpaError::InsufficientData(format!(
            "{} usable bins in [{d_lo}, {d_hi}] with count >= {min_count}; need {MIN_SLOPE_BINS}",
            pts.len()
        )));
    }
    Ok(pts)
}

/// Least-squares fit of `ln(mean c)` against `ln d`.
pub fn curve_slope(curve: &[(f64, u64, f64)], d_lo: f64, d_hi: f64, min_count: u64) -> Result<LineFit> {
    let pts = slope_points(curve, d_lo, d_hi, min_count)?;
    least_squares(pts).ok_or_else(|| SpaError::InsufficientData("degenerate degree range".into()))
}

/// Fit of the one-parameter model `c/d` on log axes: the intercept is
/// `ln c`, the slope is fixed at -1, and `r2` is measured against the
/// spread of `ln(mean c)`.
pub fn inverse_fit(curve: &[(f64, u64, f64)], d_lo: f64, d_hi: f64, min_count: u64) -> Result<LineFit> {
    let pts = slope_points(curve, d_lo, d_hi, min_count)?;
    let nf = pts.len() as f64;
    let intercept = pts.iter().map(|(x, y)| y + x).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|(x, y)| (y - (intercept - x)).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LineFit { slope: -1.0, intercept, r2, points: pts.len() })
}
