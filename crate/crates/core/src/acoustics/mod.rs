//! Per-band sound propagation and acoustic field sampling.
//!
//! Two propagation models are provided behind [`AcousticModel`]:
//! an exact image-source model for empty rectangular rooms and a geodesic
//! attenuation model for arbitrary occupancy grids. Field values are linear
//! pressure amplitudes, with distances clamped at [`NEAR_FIELD_CLAMP_M`].

mod field;
mod geodesic;
mod image_source;

pub use field::{compute_field, compute_field_parallel, AcousticField, BandSel, FieldConfig};
pub use geodesic::{geodesic_pressure, GeodesicScene};
pub use image_source::{image_source_rir, pressure_from_rir, ImageSourceScene, ImpulseResponse, RoomSpec, Tap};

use crate::gridworld::Point;
use crate::scalar::Real;
use crate::{Error, Result};

/// Distances below this are clamped to avoid the `1/d` singularity.
pub const NEAR_FIELD_CLAMP_M: f64 = 0.1;
/// Speed of sound, m/s.
pub const SPEED_OF_SOUND: f64 = 343.0;
/// Number of subbands used by default.
pub const DEFAULT_BANDS: usize = 5;
/// Per-band amplitude retention per meter for the geodesic model; lower bands
/// lose more.
pub const DEFAULT_ABSORPTION: [f64; DEFAULT_BANDS] = [0.92, 0.94, 0.96, 0.97, 0.98];

/// Nonnegative per-band energies.
///
/// Source spectra built with [`BandSpectrum::new`] carry energy in at least one
/// band. Received spectra ([`BandSpectrum::received`]) may be silent.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpectrum<T> {
    energies: Vec<T>,
}

impl<T: Real> BandSpectrum<T> {
    pub fn new(energies: Vec<T>) -> Result<Self> {
        let s = Self::received(energies)?;
        if s.is_silent() {
            return Err(Error::InvalidArgument("spectrum needs energy in at least one band".into()));
        }
        Ok(s)
    }

    pub fn received(energies: Vec<T>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidArgument("spectrum needs at least one band".into()));
        }
        if let Some(bad) = energies.iter().find(|e| !(e.is_finite() && **e >= T::zero())) {
            return Err(Error::InvalidArgument(format!("band energy must be finite and >= 0, got {bad}")));
        }
        Ok(Self { energies })
    }

    /// Equal energy in every band.
    pub fn flat(bands: usize) -> Self {
        Self {
            energies: vec![T::one(); bands.max(1)],
        }
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn is_silent(&self) -> bool {
        self.energies.iter().all(|e| *e == T::zero())
    }

    pub fn is_flat(&self) -> bool {
        let first = self.energies[0];
        first > T::zero() && self.energies.iter().all(|e| *e == first)
    }

    /// Index of the largest energy, lowest index on ties.
    pub fn dominant_band(&self) -> usize {
        argmax_first(&self.energies)
    }

    pub fn max(&self) -> T {
        self.energies.iter().copied().fold(T::zero(), T::max)
    }
}

pub(crate) fn argmax_first<T: Real>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// A propagation model with the source position already bound.
pub trait AcousticModel<T: Real>: Sync {
    fn bands(&self) -> usize;

    /// Whether `point` is a valid receiver position (inside the scene and not
    /// inside an obstacle).
    fn is_open(&self, point: Point<T>) -> bool;

    /// Linear pressure received at `point` from a unit source in `band`.
    fn pressure_at(&self, point: Point<T>, band: usize) -> Result<T>;
}

/// `r_i = s_i * p_i(receiver)^2`.
pub fn received_band_energies<T: Real, M: AcousticModel<T> + ?Sized>(
    model: &M,
    spectrum: &BandSpectrum<T>,
    receiver: Point<T>,
) -> Result<BandSpectrum<T>> {
    let energies = spectrum
        .energies()
        .iter()
        .enumerate()
        .map(|(band, s)| model.pressure_at(receiver, band).map(|p| *s * p * p))
        .collect::<Result<Vec<_>>>()?;
    BandSpectrum::received(energies)
}

#[inline]
pub(crate) fn clamp_distance<T: Real>(d: T) -> T {
    d.max(T::lit(NEAR_FIELD_CLAMP_M))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_validation() {
        assert!(BandSpectrum::new(vec![0.0, 1.0]).is_ok());
        assert!(BandSpectrum::new(vec![0.0f64, 0.0]).is_err());
        assert!(BandSpectrum::new(vec![-1.0, 1.0]).is_err());
        assert!(BandSpectrum::new(vec![f64::NAN]).is_err());
        assert!(BandSpectrum::<f64>::new(vec![]).is_err());
        assert!(BandSpectrum::received(vec![0.0f64, 0.0]).unwrap().is_silent());
    }

    #[test]
    fn dominant_band_ties_to_lowest() {
        let s = BandSpectrum::new(vec![1.0, 3.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.dominant_band(), 1);
        assert!(BandSpectrum::<f32>::flat(5).is_flat());
    }
}
