//! Audio-goal navigation simulator.

pub mod acoustics;
pub mod afp;
pub mod agent;
pub mod eikonal;
pub mod episodes;
pub mod error;
pub mod gridworld;
pub mod mapgen;
pub mod scalar;

pub use error::{Error, Result};

/// Double-precision instantiations.
pub type OccupancyGrid = gridworld::OccupancyGrid<f64>;
pub type Pose = gridworld::Pose<f64>;
pub type Point = gridworld::Point<f64>;
pub type AcousticField = acoustics::AcousticField<f64>;
pub type BandSpectrum = acoustics::BandSpectrum<f64>;
pub type DistanceField = eikonal::DistanceField<f64>;
pub type Episode = episodes::Episode<f64>;
pub type BandErrorPrior = afp::BandErrorPrior<f64>;
pub type NoiseModel = afp::NoiseModel<f64>;

/// Single-precision instantiations.
pub mod single {
    pub type OccupancyGrid = crate::gridworld::OccupancyGrid<f32>;
    pub type Pose = crate::gridworld::Pose<f32>;
    pub type Point = crate::gridworld::Point<f32>;
    pub type AcousticField = crate::acoustics::AcousticField<f32>;
    pub type BandSpectrum = crate::acoustics::BandSpectrum<f32>;
    pub type DistanceField = crate::eikonal::DistanceField<f32>;
    pub type Episode = crate::episodes::Episode<f32>;
    pub type BandErrorPrior = crate::afp::BandErrorPrior<f32>;
    pub type NoiseModel = crate::afp::NoiseModel<f32>;
}
