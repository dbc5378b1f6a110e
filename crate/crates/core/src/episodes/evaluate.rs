use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::{scene, soft_spl, spl, Episode, EpisodeResult, Scenes};
use crate::acoustics::{AcousticField, BandSpectrum, FieldConfig, GeodesicScene, DEFAULT_ABSORPTION};
use crate::afp::{BandErrorPrior, NoiseModel, Predictor, Strategy};
use crate::agent::{run_episode, AgentConfig, Policy};
use crate::eikonal::fmm_solve;
use crate::gridworld::Point;
use crate::scalar::Real;
use crate::{Error, Result};

/// A field-prediction strategy, or the direction-follower baseline (which
/// reads frequency-adaptive fields but only uses the peak direction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalStrategy {
    Field(Strategy),
    DirectionFollower,
}

impl EvalStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            EvalStrategy::Field(s) => s.name(),
            EvalStrategy::DirectionFollower => "direction-follower",
        }
    }

    pub fn valid_names() -> String {
        format!("{}, direction-follower", Strategy::valid_names())
    }

    fn predictor_strategy(&self) -> Strategy {
        match self {
            EvalStrategy::Field(s) => *s,
            EvalStrategy::DirectionFollower => Strategy::FreqAdaptive,
        }
    }

    fn policy(&self) -> Policy {
        match self {
            EvalStrategy::Field(_) => Policy::FieldPeak,
            EvalStrategy::DirectionFollower => Policy::DirectionFollower,
        }
    }
}

impl fmt::Display for EvalStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EvalStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "direction-follower" || t == "df" {
            return Ok(EvalStrategy::DirectionFollower);
        }
        t.parse::<Strategy>().map(EvalStrategy::Field).map_err(|_| Error::UnknownStrategy {
            name: s.to_string(),
            valid: Self::valid_names(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalMode {
    Navigation,
    Prediction,
    Both,
}

impl EvalMode {
    fn navigates(&self) -> bool {
        matches!(self, EvalMode::Navigation | EvalMode::Both)
    }

    fn predicts(&self) -> bool {
        matches!(self, EvalMode::Prediction | EvalMode::Both)
    }
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "navigation" | "nav" => Ok(EvalMode::Navigation),
            "prediction" | "pred" => Ok(EvalMode::Prediction),
            "both" => Ok(EvalMode::Both),
            _ => Err(Error::Parse(format!("unknown mode {s:?} (valid: navigation, prediction, both)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig<T> {
    pub noise: NoiseModel<T>,
    pub prior: BandErrorPrior<T>,
    pub field: FieldConfig<T>,
    pub agent: AgentConfig<T>,
    pub absorption: Vec<T>,
    pub mode: EvalMode,
    /// Static receivers drawn per episode in prediction mode.
    pub samples_per_episode: usize,
    /// Thread count; 0 uses the rayon default. Never changes the output.
    pub workers: usize,
    /// Keep each navigation run's trajectory log.
    pub keep_trajectories: bool,
}

impl<T: Real> Default for EvalConfig<T> {
    fn default() -> Self {
        let bands = DEFAULT_ABSORPTION.len();
        Self {
            noise: NoiseModel::silent(bands),
            prior: BandErrorPrior::uniform(bands),
            field: FieldConfig::default(),
            agent: AgentConfig::default(),
            absorption: DEFAULT_ABSORPTION.iter().map(|a| T::lit(*a)).collect(),
            mode: EvalMode::Navigation,
            samples_per_episode: 4,
            workers: 0,
            keep_trajectories: false,
        }
    }
}

/// A static prediction problem: sound at `source`, agent at `receiver`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSample<T> {
    pub sample_id: String,
    pub scene: String,
    pub source: Point<T>,
    pub receiver: Point<T>,
    pub spectrum: BandSpectrum<T>,
    pub nonce: u64,
}

/// Peak errors of one strategy on one static sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionError<T> {
    pub sample_id: String,
    pub strategy: EvalStrategy,
    /// Radians between the predicted and true peak bearings, in `[0, pi]`.
    pub angle: T,
    /// Meters between the predicted and true peak cells.
    pub distance: T,
}

#[derive(Debug, Clone, Default)]
pub struct Evaluation<T> {
    pub results: Vec<EpisodeResult<T>>,
    /// Trajectory JSON lines parallel to `results`, when requested.
    pub trajectories: Vec<String>,
    pub predictions: Vec<PredictionError<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate<T> {
    pub strategy: EvalStrategy,
    pub sr: Option<T>,
    pub spl: Option<T>,
    pub soft_spl: Option<T>,
    pub angle_err: Option<T>,
    pub dist_err: Option<T>,
    pub n: usize,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))
}

/// Static samples along each episode's shortest path: up to `per_episode`
/// receivers spread evenly over the path cells, excluding the goal cell.
/// Nonces derive from the episode seed.
pub fn prediction_samples<T: Real>(
    scenes: &Scenes<T>,
    episodes: &[Episode<T>],
    per_episode: usize,
) -> Result<Vec<PredictionSample<T>>> {
    let mut out = Vec::new();
    for e in episodes {
        let grid = scene(scenes, e)?;
        let dist = fmm_solve(grid, &[grid.world_to_cell(e.goal)?])?;
        let mut path = dist.descent_path(grid.world_to_cell(e.start.position())?);
        path.pop();
        if path.is_empty() || per_episode == 0 {
            continue;
        }
        let k = per_episode.min(path.len());
        for j in 0..k {
            let cell = path[j * path.len() / k];
            out.push(PredictionSample {
                sample_id: format!("{}/{j}", e.episode_id),
                scene: e.scene.clone(),
                source: e.goal,
                receiver: grid.cell_center(cell),
                spectrum: e.spectrum.clone(),
                nonce: e.seed ^ (j as u64).wrapping_mul(0xD1B5_4A32_D192_ED03),
            });
        }
    }
    Ok(out)
}

/// Bearing of `(row, col)` from the field center; `None` at the center.
fn peak_bearing<T: Real>(field: &AcousticField<T>, cell: (usize, usize)) -> Option<T> {
    if cell == field.center_index() {
        return None;
    }
    let (dx, dy) = field.cell_offset(cell.0, cell.1);
    Some(dy.atan2(dx))
}

/// Angle between two peak bearings. Two center peaks agree exactly; one
/// center peak against an off-center one counts as a right angle.
pub fn peak_angle_error<T: Real>(field: &AcousticField<T>, predicted: (usize, usize), truth: (usize, usize)) -> T {
    match (peak_bearing(field, predicted), peak_bearing(field, truth)) {
        (None, None) => T::zero(),
        (Some(a), Some(b)) => crate::scalar::wrap_angle(a - b).abs(),
        _ => T::FRAC_PI_2(),
    }
}

/// Angle and distance errors of every strategy on every sample, ordered by
/// sample then strategy. The true peak is the noise-free field of the
/// dominant received band.
pub fn prediction_errors<T: Real>(
    scenes: &Scenes<T>,
    samples: &[PredictionSample<T>],
    strategies: &[EvalStrategy],
    config: &EvalConfig<T>,
) -> Result<Vec<PredictionError<T>>> {
    let run = || {
        samples
            .par_iter()
            .map(|s| {
                let grid = scenes
                    .get(&s.scene)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown scene {:?}", s.scene)))?;
                let model = GeodesicScene::new(grid, s.source, config.absorption.clone())?;
                let mut oracle = Predictor::oracle(config.absorption.len());
                oracle.field = config.field;
                let truth = oracle.predict_field(&model, &s.spectrum, s.receiver, s.nonce)?.field;
                let t = truth.peak().0;
                strategies
                    .iter()
                    .map(|st| {
                        let predictor = Predictor {
                            strategy: st.predictor_strategy(),
                            noise: config.noise.clone(),
                            prior: config.prior.clone(),
                            field: config.field,
                        };
                        let p = predictor.predict_field(&model, &s.spectrum, s.receiver, s.nonce)?.field.peak().0;
                        let dr = T::from_usize_lossy(p.0.abs_diff(t.0));
                        let dc = T::from_usize_lossy(p.1.abs_diff(t.1));
                        Ok(PredictionError {
                            sample_id: s.sample_id.clone(),
                            strategy: *st,
                            angle: peak_angle_error(&truth, p, t),
                            distance: dr.hypot(dc) * truth.resolution(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    };
    Ok(pool(config.workers)?.install(run)?.into_iter().flatten().collect())
}

fn navigate<T: Real>(
    scenes: &Scenes<T>,
    e: &Episode<T>,
    strategy: EvalStrategy,
    config: &EvalConfig<T>,
) -> Result<(EpisodeResult<T>, String)> {
    let grid = scene(scenes, e)?;
    let model = GeodesicScene::new(grid, e.goal, config.absorption.clone())?;
    let l = fmm_solve(grid, &[grid.world_to_cell(e.goal)?])?.value(grid.world_to_cell(e.start.position())?);
    let predictor = Predictor {
        strategy: strategy.predictor_strategy(),
        noise: config.noise.clone(),
        prior: config.prior.clone(),
        field: config.field,
    };
    let agent = AgentConfig {
        policy: strategy.policy(),
        ..config.agent.clone()
    };
    let out = run_episode(grid, &model, &e.task(), &predictor, &agent)?;
    let log = if config.keep_trajectories { out.trajectory_jsonl() } else { String::new() };
    let result = EpisodeResult {
        episode_id: e.episode_id.clone(),
        strategy: strategy.name().to_string(),
        success: out.success,
        l,
        p: out.path_length,
        steps: out.steps,
        spl: spl(out.success, l, out.path_length)?,
        soft_spl: soft_spl(l, out.path_length)?,
        status: out.status,
    };
    Ok((result, log))
}

/// Runs every strategy on every episode (navigation mode) and on static
/// samples along the episodes' shortest paths (prediction mode). Output is
/// sorted by episode id, then by the order of `strategies`, and does not
/// depend on the worker count.
pub fn evaluate<T: Real>(
    scenes: &Scenes<T>,
    episodes: &[Episode<T>],
    strategies: &[EvalStrategy],
    config: &EvalConfig<T>,
) -> Result<Evaluation<T>> {
    if episodes.is_empty() || strategies.is_empty() {
        return Err(Error::InvalidArgument("need at least one episode and one strategy".into()));
    }
    let mut sorted: Vec<&Episode<T>> = episodes.iter().collect();
    sorted.sort_by(|a, b| a.episode_id.cmp(&b.episode_id));
    let mut evaluation = Evaluation::default();
    if config.mode.navigates() {
        let jobs: Vec<(&Episode<T>, EvalStrategy)> =
            sorted.iter().flat_map(|e| strategies.iter().map(move |s| (*e, *s))).collect();
        let runs = pool(config.workers)?
            .install(|| jobs.par_iter().map(|(e, s)| navigate(scenes, e, *s, config)).collect::<Result<Vec<_>>>())?;
        let (results, logs): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
        evaluation.results = results;
        if config.keep_trajectories {
            evaluation.trajectories = logs;
        }
    }
    if config.mode.predicts() {
        let owned: Vec<Episode<T>> = sorted.iter().map(|e| (*e).clone()).collect();
        let samples = prediction_samples(scenes, &owned, config.samples_per_episode)?;
        evaluation.predictions = prediction_errors(scenes, &samples, strategies, config)?;
    }
    Ok(evaluation)
}

fn mean<T: Real>(values: impl Iterator<Item = T>) -> Option<T> {
    let (mut sum, mut n) = (T::zero(), 0usize);
    for v in values {
        sum = sum + v;
        n += 1;
    }
    (n > 0).then(|| sum / T::from_usize_lossy(n))
}

/// Per-strategy means in the order of `strategies`. `n` counts navigation
/// episodes when any were run, otherwise prediction samples.
pub fn aggregate<T: Real>(evaluation: &Evaluation<T>, strategies: &[EvalStrategy]) -> Vec<Aggregate<T>> {
    strategies
        .iter()
        .map(|st| {
            let nav: Vec<&EpisodeResult<T>> =
                evaluation.results.iter().filter(|r| r.strategy == st.name()).collect();
            let pred: Vec<&PredictionError<T>> =
                evaluation.predictions.iter().filter(|p| p.strategy == *st).collect();
            Aggregate {
                strategy: *st,
                sr: mean(nav.iter().map(|r| if r.success { T::one() } else { T::zero() })),
                spl: mean(nav.iter().map(|r| r.spl)),
                soft_spl: mean(nav.iter().map(|r| r.soft_spl)),
                angle_err: mean(pred.iter().map(|p| p.angle)),
                dist_err: mean(pred.iter().map(|p| p.distance)),
                n: if nav.is_empty() { pred.len() } else { nav.len() },
            }
        })
        .collect()
}

/// `episode_id,strategy,S,l,p,steps,spl,soft_spl,status`
pub fn results_csv<T: Real>(results: &[EpisodeResult<T>]) -> String {
    let mut out = String::from("episode_id,strategy,S,l,p,steps,spl,soft_spl,status\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.episode_id,
            r.strategy,
            u8::from(r.success),
            r.l,
            r.p,
            r.steps,
            r.spl,
            r.soft_spl,
            r.status.name()
        ));
    }
    out
}

/// `strategy,sr,spl,soft_spl,angle_err,dist_err,n`; metrics of a mode that
/// was not run are left empty.
pub fn aggregate_csv<T: Real>(rows: &[Aggregate<T>]) -> String {
    let cell = |v: Option<T>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut out = String::from("strategy,sr,spl,soft_spl,angle_err,dist_err,n\n");
    for a in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            a.strategy,
            cell(a.sr),
            cell(a.spl),
            cell(a.soft_spl),
            cell(a.angle_err),
            cell(a.dist_err),
            a.n
        ));
    }
    out
}
