use rand::Rng;

use super::{band_weights, BandErrorPrior, NoiseModel, Strategy, WeightBreakdown};
use crate::acoustics::{compute_field, received_band_energies, AcousticField, AcousticModel, BandSel, BandSpectrum, FieldConfig};
use crate::gridworld::Point;
use crate::scalar::Real;
use crate::{Error, Result};

/// A strategy together with everything it needs to produce a field.
#[derive(Debug, Clone)]
pub struct Predictor<T> {
    pub strategy: Strategy,
    pub noise: NoiseModel<T>,
    pub prior: BandErrorPrior<T>,
    pub field: FieldConfig<T>,
}

/// Predicted field and the band it was read from.
#[derive(Debug, Clone)]
pub struct Prediction<T> {
    pub field: AcousticField<T>,
    /// Energies received at the field center.
    pub received: BandSpectrum<T>,
    /// Present for the frequency-adaptive strategy.
    pub weights: Option<WeightBreakdown<T>>,
}

impl<T: Real> Predictor<T> {
    /// Noise-free oracle with default field geometry.
    pub fn oracle(bands: usize) -> Self {
        Self {
            strategy: Strategy::Oracle,
            noise: NoiseModel::silent(bands),
            prior: BandErrorPrior::uniform(bands),
            field: FieldConfig::default(),
        }
    }

    /// Predicts the field around `receiver` for a source emitting `spectrum`.
    /// `nonce` selects the noise draw; equal inputs give equal fields.
    pub fn predict_field<M: AcousticModel<T> + ?Sized>(
        &self,
        model: &M,
        spectrum: &BandSpectrum<T>,
        receiver: Point<T>,
        nonce: u64,
    ) -> Result<Prediction<T>> {
        let bands = model.bands();
        if spectrum.len() != bands || self.noise.bands() != bands || self.prior.bands() != bands {
            return Err(Error::InvalidArgument(format!(
                "band count mismatch: model {bands}, spectrum {}, noise {}, prior {}",
                spectrum.len(),
                self.noise.bands(),
                self.prior.bands()
            )));
        }
        let received = received_band_energies(model, spectrum, receiver)?;
        if received.is_silent() {
            return Err(Error::NoSignal);
        }
        let observed = |band: usize| self.observe_with(model, spectrum, &received, receiver, band, nonce);

        let mut weights = None;
        let field = match self.strategy {
            Strategy::Oracle => compute_field(model, receiver, received.dominant_band(), &self.field)?,
            Strategy::BestFreq => observed(self.prior.best_band())?,
            Strategy::HighestEnergy => observed(received.dominant_band())?,
            Strategy::FreqAdaptive => {
                let wb = band_weights(&self.prior, &received)?;
                let f = observed(wb.chosen)?;
                weights = Some(wb);
                f
            }
            Strategy::AllFreq => {
                let total = spectrum.energies().iter().fold(T::zero(), |a, b| a + *b);
                let n = self.field.size * self.field.size;
                let mut sum = vec![T::zero(); n];
                let mut template = None;
                for (band, s) in spectrum.energies().iter().enumerate() {
                    if *s == T::zero() {
                        continue;
                    }
                    let f = observed(band)?;
                    let w = *s / total;
                    for (acc, v) in sum.iter_mut().zip(f.values()) {
                        *acc = *acc + w * *v;
                    }
                    template.get_or_insert(f);
                }
                template.expect("spectrum has energy").with_values(BandSel::All, sum)?
            }
            Strategy::Random => {
                let clean = compute_field(model, receiver, 0, &self.field)?;
                let mut rng = self.noise.rng(nonce, u64::MAX);
                let values = (0..clean.values().len()).map(|_| T::lit(rng.random::<f64>())).collect();
                clean.with_values(BandSel::All, values)?
            }
        };
        Ok(Prediction { field, received, weights })
    }
}

impl<T: Real> Predictor<T> {
    /// Observed (noisy) field of a single band, as a per-band predictor sees it.
    pub fn observe_band<M: AcousticModel<T> + ?Sized>(
        &self,
        model: &M,
        spectrum: &BandSpectrum<T>,
        receiver: Point<T>,
        band: usize,
        nonce: u64,
    ) -> Result<AcousticField<T>> {
        let received = received_band_energies(model, spectrum, receiver)?;
        if received.is_silent() {
            return Err(Error::NoSignal);
        }
        self.observe_with(model, spectrum, &received, receiver, band, nonce)
    }

    fn observe_with<M: AcousticModel<T> + ?Sized>(
        &self,
        model: &M,
        spectrum: &BandSpectrum<T>,
        received: &BandSpectrum<T>,
        receiver: Point<T>,
        band: usize,
        nonce: u64,
    ) -> Result<AcousticField<T>> {
        let s_max = spectrum.max();
        let level = (received.max() / s_max).sqrt();
        let amplitude = (spectrum.energies()[band] / s_max).sqrt();
        let clean = compute_field(model, receiver, band, &self.field)?;
        let mut values = clean.values().to_vec();
        self.noise.corrupt(&mut values, band, amplitude, level, nonce);
        clean.with_values(BandSel::Band(band), values)
    }
}

/// Argmax cell `(row, col)` and value; ties go to the smallest cell.
pub fn field_peak<T: Real>(field: &AcousticField<T>) -> ((usize, usize), T) {
    field.peak()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustics::{GeodesicScene, DEFAULT_BANDS};
    use crate::gridworld::OccupancyGrid;

    fn room() -> OccupancyGrid<f64> {
        let mut rows = vec!["#".repeat(30)];
        rows.extend((0..18).map(|_| format!("#{}#", ".".repeat(28))));
        rows.push("#".repeat(30));
        OccupancyGrid::from_rows(0.5, &rows).unwrap()
    }

    fn predictor(strategy: Strategy, noise: NoiseModel<f64>) -> Predictor<f64> {
        Predictor {
            strategy,
            noise,
            prior: BandErrorPrior::new(vec![0.9, 0.5, 0.3, 0.2, 0.4], 5.0, 0.8).unwrap(),
            field: FieldConfig::default(),
        }
    }

    #[test]
    fn zero_noise_agrees_on_argmax() {
        let g = room();
        let scene = GeodesicScene::with_default_bands(&g, Point::new(11.0, 6.0)).unwrap();
        let spectrum = BandSpectrum::new(vec![0.2, 1.0, 0.6, 0.3, 0.1]).unwrap();
        let rcv = Point::new(4.0, 3.0);
        let oracle = Predictor::oracle(DEFAULT_BANDS).predict_field(&scene, &spectrum, rcv, 0).unwrap();
        for s in [Strategy::AllFreq, Strategy::BestFreq, Strategy::HighestEnergy, Strategy::FreqAdaptive] {
            let p = predictor(s, NoiseModel::silent(DEFAULT_BANDS)).predict_field(&scene, &spectrum, rcv, 0).unwrap();
            assert_eq!(field_peak(&p.field).0, field_peak(&oracle.field).0, "{s}");
        }
    }

    #[test]
    fn flat_spectrum_fa_equals_best_freq() {
        let g = room();
        let scene = GeodesicScene::with_default_bands(&g, Point::new(11.0, 6.0)).unwrap();
        let noise = NoiseModel::new(vec![0.8, 0.4, 0.2, 0.1, 0.3], vec![0.05; 5], 4).unwrap();
        let flat = BandSpectrum::flat(5);
        let rcv = Point::new(7.5, 6.0);
        // received energies differ through absorption, so only compare when q is flat enough
        let fa = predictor(Strategy::FreqAdaptive, noise.clone()).predict_field(&scene, &flat, rcv, 3).unwrap();
        let bf = predictor(Strategy::BestFreq, noise).predict_field(&scene, &flat, rcv, 3).unwrap();
        assert_eq!(fa.weights.unwrap().chosen, 3);
        assert_eq!(fa.field, bf.field);
    }

    #[test]
    fn silence_is_no_signal() {
        let g = OccupancyGrid::<f64>::from_rows(0.5, &["#######", "#..#..#", "#######"]).unwrap();
        let scene = GeodesicScene::with_default_bands(&g, Point::new(0.5, 0.5)).unwrap();
        let err = Predictor::oracle(5)
            .predict_field(&scene, &BandSpectrum::flat(5), Point::new(2.0, 0.5), 0)
            .unwrap_err();
        assert!(matches!(err, Error::NoSignal));
    }

    #[test]
    fn deterministic_per_nonce() {
        let g = room();
        let scene = GeodesicScene::with_default_bands(&g, Point::new(11.0, 6.0)).unwrap();
        let noise = NoiseModel::new(vec![0.8; 5], vec![0.1; 5], 11).unwrap();
        let p = predictor(Strategy::AllFreq, noise);
        let s = BandSpectrum::flat(5);
        let a = p.predict_field(&scene, &s, Point::new(3.0, 3.0), 5).unwrap();
        let b = p.predict_field(&scene, &s, Point::new(3.0, 3.0), 5).unwrap();
        let c = p.predict_field(&scene, &s, Point::new(3.0, 3.0), 6).unwrap();
        assert_eq!(a.field, b.field);
        assert_ne!(a.field, c.field);
    }

    #[test]
    fn all_zero_field_peak_is_origin() {
        let f = AcousticField::new(3, 0.5, Point::new(0.0, 0.0), BandSel::Band(0), vec![0.0; 9]).unwrap();
        assert_eq!(field_peak(&f), ((0, 0), 0.0));
        let mut v = vec![0.0; 9];
        v[5] = 0.2;
        assert_eq!(field_peak(&f.with_values(BandSel::Band(0), v).unwrap()), ((1, 2), 0.2));
    }
}
