//! Zero-order-hold uniform measurement noise from a counter-based stream.
//!
//! Each value is a pure function of `(seed, ⌊t / sample_time⌋, channel)`:
//! the ChaCha8 key is derived from the seed, the stream id is the channel
//! and the word position is the hold-interval index. No generator state is
//! carried between calls.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSettings {
    pub enabled: bool,
    /// Half-width of the uniform distribution.
    pub amplitude: f64,
    /// Hold interval in seconds.
    pub sample_time: f64,
    pub seed: u64,
}

impl Default for NoiseSettings {
    fn default() -> Self {
        Self {
            enabled: false,
            amplitude: 0.1,
            sample_time: 0.01,
            seed: 0,
        }
    }
}

impl NoiseSettings {
    pub fn enabled_with_seed(seed: u64) -> Self {
        Self {
            enabled: true,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::Config(format!(
                "noise amplitude must be finite and >= 0, got {}",
                self.amplitude
            )));
        }
        if !(self.sample_time.is_finite() && self.sample_time > 0.0) {
            return Err(Error::Config(format!(
                "noise sample_time must be > 0, got {}",
                self.sample_time
            )));
        }
        Ok(())
    }

    /// Index of the hold interval containing `t`. Times within 1e-9 of a
    /// boundary (in units of `sample_time`) are assigned to the later
    /// interval so grid-aligned solver stages land consistently.
    pub fn interval(&self, t: f64) -> u64 {
        (t / self.sample_time + 1e-9).floor().max(0.0) as u64
    }
}

/// Noise value on `channel` at time `t`, in `[−amplitude, amplitude)`.
/// Zero when disabled.
pub fn sample_noise<T: Scalar>(settings: &NoiseSettings, t: T, channel: usize) -> T {
    if !settings.enabled {
        return T::zero();
    }
    T::lit(sample_at_interval(
        settings,
        settings.interval(t.as_f64()),
        channel,
    ))
}

pub(crate) fn sample_at_interval(settings: &NoiseSettings, interval: u64, channel: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    rng.set_stream(channel as u64);
    rng.set_word_pos(u128::from(interval) * 2);
    let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    settings.amplitude * (2.0 * unit - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disabled_is_zero() {
        let s = NoiseSettings::default();
        assert_eq!(sample_noise(&s, 1.234f64, 0), 0.0);
    }

    #[test]
    fn deterministic_and_held() {
        let s = NoiseSettings::enabled_with_seed(7);
        let a: f64 = sample_noise(&s, 0.123, 2);
        assert_eq!(a, sample_noise(&s, 0.123, 2));
        // same 10 ms interval
        assert_eq!(a, sample_noise(&s, 0.1299, 2));
        assert_ne!(a, sample_noise(&s, 0.133, 2));
        assert_ne!(a, sample_noise(&s, 0.123, 1));
        let other = NoiseSettings::enabled_with_seed(8);
        assert_ne!(a, sample_noise(&other, 0.123, 2));
    }

    #[test]
    fn grid_aligned_times_use_later_interval() {
        let s = NoiseSettings::enabled_with_seed(1);
        // 0.07 / 0.01 evaluates to 7.000000000000001 and 0.29/0.01 to 28.999999999999996
        assert_eq!(s.interval(0.07), 7);
        assert_eq!(s.interval(0.29), 29);
        assert_eq!(s.interval(0.0), 0);
    }

    #[test]
    fn bounded() {
        let s = NoiseSettings::enabled_with_seed(3);
        for i in 0..10_000u64 {
            let v = sample_at_interval(&s, i, 0);
            assert!((-0.1..0.1).contains(&v));
        }
    }

    #[test]
    fn uniform_by_kolmogorov_smirnov() {
        let s = NoiseSettings::enabled_with_seed(2024);
        let n = 100_000usize;
        let mut v: Vec<f64> = (0..n as u64)
            .map(|i| sample_at_interval(&s, i, 1))
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = v
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = (x + 0.1) / 0.2;
                let lo = i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64;
                (cdf - lo).abs().max((hi - cdf).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value of the one-sample KS statistic
        let critical = 1.628 / (n as f64).sqrt();
        assert!(d < critical, "KS statistic {d} >= {critical}");
    }
}
