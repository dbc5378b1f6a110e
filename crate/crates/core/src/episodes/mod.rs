//! Episode schema, generation, dataset curation, metrics and batch evaluation.

mod curate;
mod evaluate;
mod generate;

pub use curate::{curate_field_dataset, parse_field_csv, write_field_csv, CurateConfig, FieldRecord, FIELD_CSV_PREFIX};
pub use evaluate::{
    aggregate, aggregate_csv, evaluate, peak_angle_error, prediction_errors, prediction_samples, results_csv, Aggregate,
    EvalConfig, EvalMode, EvalStrategy, Evaluation, PredictionError, PredictionSample,
};
pub use generate::{generate_episodes, EpisodeConstraints, SpectrumKind};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::acoustics::BandSpectrum;
use crate::agent::{Status, Task};
use crate::gridworld::{OccupancyGrid, Point, Pose};
use crate::scalar::Real;
use crate::{Error, Result};

/// Maps by scene name.
pub type Scenes<T> = BTreeMap<String, OccupancyGrid<T>>;

fn scene<'a, T>(scenes: &'a Scenes<T>, e: &Episode<T>) -> Result<&'a OccupancyGrid<T>> {
    scenes.get(&e.scene).ok_or_else(|| Error::InvalidEpisode {
        id: e.episode_id.clone(),
        msg: format!("unknown scene {:?}", e.scene),
    })
}

/// One navigation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode<T> {
    pub episode_id: String,
    pub scene: String,
    pub start: Pose<T>,
    pub goal: Point<T>,
    pub spectrum: BandSpectrum<T>,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct EpisodeLine {
    episode_id: String,
    scene: String,
    start: [f64; 3],
    goal: [f64; 2],
    spectrum: Vec<f64>,
    seed: u64,
}

impl<T: Real> Episode<T> {
    pub fn task(&self) -> Task<T> {
        Task {
            start: self.start,
            goal: self.goal,
            spectrum: self.spectrum.clone(),
            seed: self.seed,
        }
    }

    pub fn to_json_line(&self) -> String {
        let line = EpisodeLine {
            episode_id: self.episode_id.clone(),
            scene: self.scene.clone(),
            start: [
                self.start.x.to_f64_lossy(),
                self.start.y.to_f64_lossy(),
                self.start.heading_degrees().to_f64_lossy(),
            ],
            goal: [self.goal.x.to_f64_lossy(), self.goal.y.to_f64_lossy()],
            spectrum: self.spectrum.energies().iter().map(|e| e.to_f64_lossy()).collect(),
            seed: self.seed,
        };
        serde_json::to_string(&line).expect("episode serialises")
    }

    pub fn from_json_line(text: &str) -> Result<Self> {
        let line: EpisodeLine = serde_json::from_str(text)?;
        let spectrum = BandSpectrum::new(line.spectrum.into_iter().map(T::lit).collect()).map_err(|e| {
            Error::InvalidEpisode {
                id: line.episode_id.clone(),
                msg: e.to_string(),
            }
        })?;
        Ok(Self {
            start: Pose::from_degrees(T::lit(line.start[0]), T::lit(line.start[1]), T::lit(line.start[2])),
            goal: Point::new(T::lit(line.goal[0]), T::lit(line.goal[1])),
            spectrum,
            seed: line.seed,
            scene: line.scene,
            episode_id: line.episode_id,
        })
    }
}

pub fn episodes_to_jsonl<T: Real>(episodes: &[Episode<T>]) -> String {
    episodes.iter().map(|e| e.to_json_line() + "\n").collect()
}

/// Parses JSON lines, skipping blank lines.
pub fn episodes_from_jsonl<T: Real>(text: &str) -> Result<Vec<Episode<T>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            Episode::from_json_line(l).map_err(|e| Error::Parse(format!("episode line {}: {e}", i + 1)))
        })
        .collect()
}

/// Outcome of one episode under one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult<T> {
    pub episode_id: String,
    pub strategy: String,
    pub success: bool,
    /// Geodesic shortest-path length, meters.
    pub l: T,
    /// Traveled path length, meters.
    pub p: T,
    pub steps: usize,
    pub spl: T,
    pub soft_spl: T,
    pub status: Status,
}

fn check_lengths<T: Real>(l: T, p: T) -> Result<()> {
    if !(l > T::zero()) || !l.is_finite() {
        return Err(Error::InvalidArgument(format!("shortest path length must be > 0, got {l}")));
    }
    if !(p >= T::zero()) {
        return Err(Error::InvalidArgument(format!("path length must be >= 0, got {p}")));
    }
    Ok(())
}

/// Success weighted by path length: `S * l / max(p, l)`.
pub fn spl<T: Real>(success: bool, l: T, p: T) -> Result<T> {
    check_lengths(l, p)?;
    Ok(if success { l / p.max(l) } else { T::zero() })
}

/// SPL with the success flag forced to one.
pub fn soft_spl<T: Real>(l: T, p: T) -> Result<T> {
    check_lengths(l, p)?;
    Ok(l / p.max(l))
}
