//! Points on the unit m-torus, the wrapped L2 / L∞ metric, and conversions
//! between ball volume and ball radius.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpaError};

/// Norm used to build the torus metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormChoice {
    L2,
    #[default]
    Linf,
}

impl NormChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            NormChoice::L2 => "l2",
            NormChoice::Linf => "linf",
        }
    }
}

impl fmt::Display for NormChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormChoice {
    type Err = SpaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(NormChoice::L2),
            "linf" | "l_inf" | "inf" => Ok(NormChoice::Linf),
            other => Err(SpaError::usage(format!("unknown norm `{other}` (expected l2 or linf)"))),
        }
    }
}

/// A position in `[0,1)^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(SpaError::usage("a torus point needs at least one coordinate"));
        }
        if let Some(c) = coords.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return Err(SpaError::usage(format!("coordinate {c} outside [0, 1)")));
        }
        Ok(TorusPoint { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// Torus distance between two points of equal dimension.
pub fn torus_distance(x: &TorusPoint, y: &TorusPoint, norm: NormChoice) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(SpaError::usage(format!(
            "dimension mismatch: {} vs {}",
            x.dim(),
            y.dim()
        )));
    }
    Ok(wrapped_distance(&x.coords, &y.coords, norm))
}

/// Slice form of [`torus_distance`]; callers guarantee equal lengths.
#[inline]
pub fn wrapped_distance(x: &[f64], y: &[f64], norm: NormChoice) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    match norm {
        NormChoice::Linf => x
            .iter()
            .zip(y)
            .map(|(a, b)| wrap_diff(*a, *b))
            .fold(0.0, f64::max),
        NormChoice::L2 => x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let d = wrap_diff(*a, *b);
                d * d
            })
            .sum::<f64>()
            .sqrt(),
    }
}

#[inline]
fn wrap_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Volume of the unit-radius ball in dimension `m`.
pub fn unit_ball_volume(m: usize, norm: NormChoice) -> f64 {
    match norm {
        NormChoice::Linf => 2f64.powi(m as i32),
        NormChoice::L2 => PI.powf(m as f64 / 2.0) / gamma_half_integer(m + 2),
    }
}

/// Γ(k/2) for a positive integer k.
fn gamma_half_integer(k: usize) -> f64 {
    debug_assert!(k > 0);
    if k.is_multiple_of(2) {
        // Γ(j) = (j-1)!
        (1..k / 2).map(|i| i as f64).product()
    } else {
        // Γ(1/2) = √π, Γ(x+1) = xΓ(x)
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < k as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Radius of the ball with volume `v` (wraparound ignored).
pub fn volume_to_radius(v: f64, m: usize, norm: NormChoice) -> Result<f64> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(SpaError::usage(format!("ball volume {v} outside (0, 1]")));
    }
    if m == 0 {
        return Err(SpaError::usage("dimension must be at least 1"));
    }
    Ok(radius_for_volume(v, m, norm))
}

#[inline]
pub(crate) fn radius_for_volume(v: f64, m: usize, norm: NormChoice) -> f64 {
    match norm {
        NormChoice::Linf => {
            if m == 1 {
                v / 2.0
            } else if m == 2 {
                v.sqrt() / 2.0
            } else {
                v.powf(1.0 / m as f64) / 2.0
            }
        }
        NormChoice::L2 => {
            let ratio = v / unit_ball_volume(m, norm);
            match m {
                1 => ratio,
                2 => ratio.sqrt(),
                _ => ratio.powf(1.0 / m as f64),
            }
        }
    }
}

/// Volume of the ball of radius `r`, capped at 1.
pub fn radius_to_volume(r: f64, m: usize, norm: NormChoice) -> f64 {
    (unit_ball_volume(m, norm) * r.powi(m as i32)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> TorusPoint {
        TorusPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        for norm in [NormChoice::L2, NormChoice::Linf] {
            let x = pt(&[0.3, 0.7, 0.1]);
            assert_eq!(torus_distance(&x, &x, norm).unwrap(), 0.0);
            let d = torus_distance(&pt(&[0.1]), &pt(&[0.9]), norm).unwrap();
            assert!((d - 0.2).abs() < 1e-15);
        }
        let d = torus_distance(&pt(&[0.95, 0.5]), &pt(&[0.05, 0.5]), NormChoice::Linf).unwrap();
        assert!((d - 0.1).abs() < 1e-15);
        let d = torus_distance(&pt(&[0.0, 0.0]), &pt(&[0.5, 0.5]), NormChoice::L2).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let err = torus_distance(&pt(&[0.1]), &pt(&[0.1, 0.2]), NormChoice::L2).unwrap_err();
        assert!(matches!(err, SpaError::Usage(_)));
    }

    #[test]
    fn point_rejects_out_of_range() {
        assert!(TorusPoint::new(vec![1.0]).is_err());
        assert!(TorusPoint::new(vec![-0.1]).is_err());
        assert!(TorusPoint::new(vec![]).is_err());
    }

    #[test]
    fn radius_examples() {
        assert_eq!(volume_to_radius(1.0, 2, NormChoice::Linf).unwrap(), 0.5);
        for norm in [NormChoice::L2, NormChoice::Linf] {
            assert!((volume_to_radius(0.25, 1, norm).unwrap() - 0.125).abs() < 1e-15);
        }
        let v = PI / 4.0 * 0.25;
        assert!((volume_to_radius(v, 2, NormChoice::L2).unwrap() - 0.25).abs() < 1e-15);
        assert!(volume_to_radius(0.0, 2, NormChoice::L2).is_err());
        assert!(volume_to_radius(1.5, 2, NormChoice::L2).is_err());
    }

    #[test]
    fn volume_examples() {
        assert_eq!(radius_to_volume(0.0, 3, NormChoice::L2), 0.0);
        assert_eq!(radius_to_volume(0.5, 2, NormChoice::Linf), 1.0);
        assert!((radius_to_volume(0.1, 2, NormChoice::L2) - PI * 0.01).abs() < 1e-15);
        assert_eq!(radius_to_volume(3.0, 2, NormChoice::L2), 1.0);
    }

    #[test]
    fn unit_ball_volumes() {
        // 2, π, 4π/3, π²/2, 8π²/15
        let expected = [2.0, PI, 4.0 * PI / 3.0, PI * PI / 2.0, 8.0 * PI * PI / 15.0];
        for (m, e) in expected.iter().enumerate() {
            let got = unit_ball_volume(m + 1, NormChoice::L2);
            assert!((got - e).abs() < 1e-12 * e, "m={} got {got} want {e}", m + 1);
        }
        assert_eq!(unit_ball_volume(3, NormChoice::Linf), 8.0);
    }

    #[test]
    fn norm_parses() {
        assert_eq!("L2".parse::<NormChoice>().unwrap(), NormChoice::L2);
        assert_eq!("linf".parse::<NormChoice>().unwrap(), NormChoice::Linf);
        assert!("l3".parse::<NormChoice>().is_err());
    }
}
