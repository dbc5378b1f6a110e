//! Acoustic field prediction.
//!
//! The learned predictor is emulated by the noise-free field plus a
//! band-dependent noise layer ([`NoiseModel`]). Strategies differ only in which
//! band (or mix of bands) they read. Frequency-adaptive selection weighs each
//! band by a calibrated error prior and by its share of the received energy.

mod calibrate;
mod noise;
mod predict;
mod weights;

pub use calibrate::{calibrate_band_errors, CalibrationReport, CalibrationSample};
pub use noise::NoiseModel;
pub use predict::{field_peak, Prediction, Predictor};
pub use weights::{band_weights, BandErrorPrior, WeightBreakdown, DEFAULT_ALPHA, DEFAULT_BETA, ERROR_FLOOR_M};

use crate::{Error, Result};

/// Field prediction strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Noise-free field of the dominant received band.
    Oracle,
    /// Energy-weighted sum of every band's observed field.
    AllFreq,
    /// Band with the lowest calibrated error.
    BestFreq,
    /// Band with the most received energy.
    HighestEnergy,
    /// Band chosen by [`band_weights`].
    FreqAdaptive,
    /// Uniform random field, a chance-level baseline.
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Oracle,
        Strategy::AllFreq,
        Strategy::BestFreq,
        Strategy::HighestEnergy,
        Strategy::FreqAdaptive,
        Strategy::Random,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Oracle => "oracle",
            Strategy::AllFreq => "all-freq",
            Strategy::BestFreq => "best-freq",
            Strategy::HighestEnergy => "highest-energy",
            Strategy::FreqAdaptive => "freq-adaptive",
            Strategy::Random => "random",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .iter()
            .copied()
            .find(|st| st.name() == key)
            .or(match key.as_str() {
                "fa" => Some(Strategy::FreqAdaptive),
                _ => None,
            })
            .ok_or_else(|| Error::UnknownStrategy {
                name: s.to_string(),
                valid: Self::valid_names(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert_eq!("FREQ_ADAPTIVE".parse::<Strategy>().unwrap(), Strategy::FreqAdaptive);
        let err = "loudest".parse::<Strategy>().unwrap_err().to_string();
        assert!(err.contains("highest-energy") && err.contains("loudest"));
    }
}
