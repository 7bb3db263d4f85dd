//! Counter-based random streams.
//!
//! Every uniform is a pure function of `(seed, lane, step, index)`, so two
//! generators that discover candidates in different orders still draw the
//! same coin for the same `(step, candidate)` pair.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const LANE_POSITION: u64 = 0x5851_F42D_4C95_7F2D;
const LANE_COIN: u64 = 0x1405_7B7E_F767_814F;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Keyed stream family for one generation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    seed: u64,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey { seed }
    }

    #[inline]
    fn draw(&self, lane: u64, step: u64, index: u64) -> u64 {
        let h = splitmix(self.seed ^ lane);
        let h = splitmix(h ^ step.wrapping_mul(GOLDEN));
        splitmix(h ^ index)
    }

    /// Coordinate `axis` of the vertex born at `step`, uniform in `[0,1)`.
    #[inline]
    pub fn position(&self, step: u64, axis: usize) -> f64 {
        to_unit(self.draw(LANE_POSITION, step, axis as u64))
    }

    /// Uniform deciding the link from the vertex born at `step` to `target`.
    #[inline]
    pub fn coin(&self, step: u64, target: u64) -> f64 {
        to_unit(self.draw(LANE_COIN, step, target))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_pure_functions_of_the_key() {
        let a = StreamKey::new(7);
        let b = StreamKey::new(7);
        assert_eq!(a.coin(10, 3), b.coin(10, 3));
        assert_eq!(a.position(10, 1), b.position(10, 1));
        assert_ne!(a.coin(10, 3), a.coin(10, 4));
        assert_ne!(a.coin(10, 3), a.position(10, 3));
        assert_ne!(a.position(5, 0), StreamKey::new(8).position(5, 0));
    }

    #[test]
    fn uniforms_look_uniform() {
        let key = StreamKey::new(12345);
        let n = 200_000u64;
        let mut bins = [0u32; 10];
        let mut sum = 0.0;
        for i in 0..n {
            let u = key.coin(i / 7 + 1, i % 7);
            assert!((0.0..1.0).contains(&u));
            bins[(u * 10.0) as usize] += 1;
            sum += u;
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
        // chi-square with 9 dof; 0.999 quantile is about 27.9
        let expected = n as f64 / 10.0;
        let chi: f64 = bins
            .iter()
            .map(|&b| (b as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi < 27.9, "chi2 {chi}");
    }
}
