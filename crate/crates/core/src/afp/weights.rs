use serde::{Deserialize, Serialize};

use crate::acoustics::{argmax_first, BandSpectrum};
use crate::scalar::Real;
use crate::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 5.0;
pub const DEFAULT_BETA: f64 = 0.8;
/// Smallest per-band error a calibrated prior may carry, in meters.
pub const ERROR_FLOOR_M: f64 = 1e-3;

/// Per-band prediction errors `e` (meters) and the weighting exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct BandErrorPrior<T> {
    e: Vec<T>,
    alpha: T,
    beta: T,
}

#[derive(Serialize, Deserialize)]
struct PriorFile {
    e: Vec<f64>,
    alpha: f64,
    beta: f64,
}

impl<T: Real> BandErrorPrior<T> {
    pub fn new(e: Vec<T>, alpha: T, beta: T) -> Result<Self> {
        if e.is_empty() {
            return Err(Error::InvalidPrior("need at least one band".into()));
        }
        if let Some(bad) = e.iter().find(|x| !(x.is_finite() && **x > T::zero())) {
            return Err(Error::InvalidPrior(format!("band errors must be finite and > 0, got {bad}")));
        }
        if !(alpha.is_finite() && alpha > T::zero() && beta.is_finite() && beta > T::zero()) {
            return Err(Error::InvalidPrior(format!("alpha and beta must be > 0, got {alpha}, {beta}")));
        }
        Ok(Self { e, alpha, beta })
    }

    /// Equal errors of 1 m with default exponents.
    pub fn uniform(bands: usize) -> Self {
        Self {
            e: vec![T::one(); bands.max(1)],
            alpha: T::lit(DEFAULT_ALPHA),
            beta: T::lit(DEFAULT_BETA),
        }
    }

    pub fn errors(&self) -> &[T] {
        &self.e
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn bands(&self) -> usize {
        self.e.len()
    }

    pub fn with_exponents(&self, alpha: T, beta: T) -> Result<Self> {
        Self::new(self.e.clone(), alpha, beta)
    }

    /// Band with the lowest error, lowest index on ties.
    pub fn best_band(&self) -> usize {
        let mut best = 0;
        for (i, e) in self.e.iter().enumerate() {
            if *e < self.e[best] {
                best = i;
            }
        }
        best
    }

    pub fn to_json(&self) -> String {
        let file = PriorFile {
            e: self.e.iter().map(|x| x.to_f64_lossy()).collect(),
            alpha: self.alpha.to_f64_lossy(),
            beta: self.beta.to_f64_lossy(),
        };
        serde_json::to_string(&file).expect("prior serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PriorFile = serde_json::from_str(text)?;
        Self::new(file.e.into_iter().map(T::lit).collect(), T::lit(file.alpha), T::lit(file.beta))
    }
}

/// Intermediate terms of the band selection.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightBreakdown<T> {
    /// Prior weights `(1/e_i)^alpha`.
    pub p: Vec<T>,
    /// Energy weights `(r_i/r_max)^beta`.
    pub q: Vec<T>,
    /// `p_i * q_i`.
    pub w: Vec<T>,
    pub chosen: usize,
}

/// Scores each band by `(1/e_i)^alpha * (r_i/r_max)^beta` and picks the
/// maximum, lowest index on ties.
pub fn band_weights<T: Real>(prior: &BandErrorPrior<T>, r: &BandSpectrum<T>) -> Result<WeightBreakdown<T>> {
    if prior.bands() != r.len() {
        return Err(Error::InvalidArgument(format!(
            "prior has {} bands, spectrum has {}",
            prior.bands(),
            r.len()
        )));
    }
    let r_max = r.max();
    if r_max == T::zero() {
        return Err(Error::NoSignal);
    }
    let p: Vec<T> = prior.e.iter().map(|e| e.recip().powf(prior.alpha)).collect();
    let q: Vec<T> = r
        .energies()
        .iter()
        .map(|ri| if *ri == r_max { T::one() } else { (*ri / r_max).powf(prior.beta) })
        .collect();
    let w: Vec<T> = p.iter().zip(&q).map(|(a, b)| *a * *b).collect();
    let chosen = argmax_first(&w);
    Ok(WeightBreakdown { p, q, w, chosen })
}
