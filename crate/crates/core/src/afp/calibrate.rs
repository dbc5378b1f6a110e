use rayon::prelude::*;

use super::{BandErrorPrior, NoiseModel, Predictor, Strategy, ERROR_FLOOR_M};
use crate::acoustics::{compute_field, AcousticField, AcousticModel, BandSpectrum, FieldConfig};
use crate::gridworld::Point;
use crate::scalar::Real;
use crate::{Error, Result};

/// One calibration measurement: a scene with its source bound, the emitted
/// spectrum and the receiver position.
#[derive(Debug, Clone)]
pub struct CalibrationSample<M, T> {
    pub model: M,
    pub spectrum: BandSpectrum<T>,
    pub receiver: Point<T>,
}

/// Per-band peak-distance error statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
    pub samples: usize,
}

impl<T: Real> CalibrationReport<T> {
    /// Prior built from the mean errors, each raised to at least
    /// [`ERROR_FLOOR_M`].
    pub fn prior(&self, alpha: T, beta: T) -> Result<BandErrorPrior<T>> {
        let floor = T::lit(ERROR_FLOOR_M);
        BandErrorPrior::new(self.mean.iter().map(|e| e.max(floor)).collect(), alpha, beta)
    }

    /// CSV with header `band,mean_error_m,std_error_m,n_samples`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("band,mean_error_m,std_error_m,n_samples\n");
        for (band, (m, s)) in self.mean.iter().zip(&self.std).enumerate() {
            out.push_str(&format!("{band},{m},{s},{}\n", self.samples));
        }
        out
    }
}

fn peak_distance<T: Real>(a: &AcousticField<T>, b: &AcousticField<T>) -> T {
    let ((ra, ca), _) = a.peak();
    let ((rb, cb), _) = b.peak();
    let dr = T::from_usize_lossy(ra.abs_diff(rb));
    let dc = T::from_usize_lossy(ca.abs_diff(cb));
    dr.hypot(dc) * a.resolution()
}

/// Measures, for every band, how far the noisy field's peak lands from the
/// noise-free field's peak. Sample `k` uses noise nonce `k`. Samples are
/// evaluated in parallel and reduced in input order, so the result does not
/// depend on the thread count.
pub fn calibrate_band_errors<T: Real, M: AcousticModel<T> + Send>(
    samples: &[CalibrationSample<M, T>],
    noise: &NoiseModel<T>,
    field: &FieldConfig<T>,
) -> Result<CalibrationReport<T>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("calibration set is empty".into()))?;
    let bands = first.model.bands();
    if samples.iter().any(|s| !s.spectrum.is_flat()) {
        return Err(Error::NonFlatCalibrationSpectrum);
    }
    if noise.bands() != bands {
        return Err(Error::InvalidArgument(format!(
            "noise model has {} bands, scenes have {bands}",
            noise.bands()
        )));
    }
    let predictor = Predictor {
        strategy: Strategy::Oracle,
        noise: noise.clone(),
        prior: BandErrorPrior::uniform(bands),
        field: *field,
    };
    let errors = samples
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            (0..bands)
                .map(|band| {
                    let clean = compute_field(&s.model, s.receiver, band, field)?;
                    let noisy = predictor.observe_band(&s.model, &s.spectrum, s.receiver, band, k as u64)?;
                    Ok(peak_distance(&noisy, &clean))
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let n = T::from_usize_lossy(errors.len());
    let mut mean = Vec::with_capacity(bands);
    let mut std = Vec::with_capacity(bands);
    for band in 0..bands {
        let m = kahan_sum(errors.iter().map(|e| e[band])) / n;
        let var = if errors.len() > 1 {
            kahan_sum(errors.iter().map(|e| (e[band] - m) * (e[band] - m))) / (n - T::one())
        } else {
            T::zero()
        };
        mean.push(m);
        std.push(var.sqrt());
    }
    Ok(CalibrationReport {
        mean,
        std,
        samples: errors.len(),
    })
}

fn kahan_sum<T: Real>(values: impl Iterator<Item = T>) -> T {
    let (mut sum, mut c) = (T::zero(), T::zero());
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
