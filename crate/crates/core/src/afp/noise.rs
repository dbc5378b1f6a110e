use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::Real;
use crate::{Error, Result};

/// Band-dependent observation noise.
///
/// For band `i` the observed value at a field cell is
/// `a_i * F_i * exp(sigma_i * g) + eps_i * |h| * level`, where `F_i` is the
/// noise-free pressure, `a_i = sqrt(s_i / s_max)` the band's source amplitude,
/// `level` the strongest received band amplitude at the field center and `g`,
/// `h` independent standard normals drawn per cell. Draws come from a stream
/// keyed by `(seed, nonce)` and are shared by all bands, so bands differ only
/// through their own `sigma_i` and `eps_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel<T> {
    pub sigma: Vec<T>,
    pub floor: Vec<T>,
    pub seed: u64,
}

impl<T: Real> NoiseModel<T> {
    pub fn new(sigma: Vec<T>, floor: Vec<T>, seed: u64) -> Result<Self> {
        if sigma.len() != floor.len() {
            return Err(Error::InvalidArgument(format!(
                "noise model has {} sigmas but {} floors",
                sigma.len(),
                floor.len()
            )));
        }
        if sigma.iter().chain(&floor).any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(Error::InvalidArgument("noise parameters must be finite and >= 0".into()));
        }
        Ok(Self { sigma, floor, seed })
    }

    /// No noise on any of `bands` bands.
    pub fn silent(bands: usize) -> Self {
        Self {
            sigma: vec![T::zero(); bands],
            floor: vec![T::zero(); bands],
            seed: 0,
        }
    }

    pub fn bands(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_identity(&self) -> bool {
        self.sigma.iter().chain(&self.floor).all(|v| *v == T::zero())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Random stream for one `(nonce, stream)` pair.
    pub(crate) fn rng(&self, nonce: u64, stream: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix(mix(mix(self.seed) ^ nonce) ^ stream))
    }

    /// Applies band `band`'s noise to noise-free values in place.
    pub(crate) fn corrupt(&self, values: &mut [T], band: usize, amplitude: T, level: T, nonce: u64) {
        let (sigma, eps) = (self.sigma[band], self.floor[band]);
        let mut rng = self.rng(nonce, BAND_STREAM);
        for v in values.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            let h: f64 = rng.sample(StandardNormal);
            let mult = if sigma == T::zero() { T::one() } else { (sigma * T::lit(g)).exp() };
            *v = amplitude * *v * mult + eps * T::lit(h.abs()) * level;
        }
    }
}

const BAND_STREAM: u64 = 0;

/// splitmix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_is_identity() {
        let n = NoiseModel::<f64>::silent(3);
        assert!(n.is_identity());
        let mut v = vec![0.1, 0.7, 0.0];
        n.corrupt(&mut v, 1, 1.0, 1.0, 42);
        assert_eq!(v, vec![0.1, 0.7, 0.0]);
    }

    #[test]
    fn streams_are_keyed() {
        let n = NoiseModel::new(vec![0.5, 0.5, 0.9], vec![0.1, 0.1, 0.1], 9).unwrap();
        let run = |band, nonce| {
            let mut v = vec![1.0f64; 8];
            n.corrupt(&mut v, band, 1.0, 1.0, nonce);
            v
        };
        assert_eq!(run(0, 3), run(0, 3));
        assert_eq!(run(0, 3), run(1, 3));
        assert_ne!(run(0, 3), run(2, 3));
        assert_ne!(run(0, 3), run(0, 4));
        assert!(run(0, 3).iter().all(|v| *v > 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(NoiseModel::new(vec![0.1], vec![0.1, 0.2], 0).is_err());
        assert!(NoiseModel::new(vec![-0.1f64], vec![0.0], 0).is_err());
    }
}
