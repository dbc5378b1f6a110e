use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Episode;
use crate::acoustics::BandSpectrum;
use crate::eikonal::fmm_solve;
use crate::gridworld::{Cell, OccupancyGrid, Pose, TURN_STEP_DEG};
use crate::scalar::Real;
use crate::{Error, Result};

const MAX_REJECTIONS: usize = 10_000;

/// Source spectrum families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumKind {
    /// Equal energy in every band (white noise).
    Flat,
    /// All energy in one random band.
    Tone,
    /// Energy peaked at a random band and falling off geometrically on both
    /// sides, like band-limited speech or a telephone ring.
    Skewed,
}

impl SpectrumKind {
    pub const ALL: [SpectrumKind; 3] = [SpectrumKind::Flat, SpectrumKind::Tone, SpectrumKind::Skewed];

    pub fn name(&self) -> &'static str {
        match self {
            SpectrumKind::Flat => "flat",
            SpectrumKind::Tone => "tone",
            SpectrumKind::Skewed => "skewed",
        }
    }

    pub fn sample<T: Real, R: Rng>(&self, bands: usize, rng: &mut R) -> BandSpectrum<T> {
        let energies = match self {
            SpectrumKind::Flat => vec![1.0; bands],
            SpectrumKind::Tone => {
                let k = rng.random_range(0..bands);
                (0..bands).map(|i| if i == k { 1.0 } else { 0.0 }).collect()
            }
            SpectrumKind::Skewed => {
                let peak = rng.random_range(0..bands) as i32;
                let decay: f64 = rng.random_range(0.02..0.5);
                (0..bands as i32).map(|i| decay.powi((i - peak).abs())).collect()
            }
        };
        BandSpectrum::new(energies.into_iter().map(T::lit).collect()).expect("library spectra carry energy")
    }
}

impl std::str::FromStr for SpectrumKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown spectrum kind {s:?} (valid: flat, tone, skewed)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeConstraints {
    pub min_distance: f64,
    pub max_distance: f64,
    pub bands: usize,
    /// Spectrum families drawn uniformly.
    pub spectra: Vec<SpectrumKind>,
}

impl Default for EpisodeConstraints {
    fn default() -> Self {
        Self {
            min_distance: 1.5,
            max_distance: 30.0,
            bands: crate::acoustics::DEFAULT_BANDS,
            spectra: SpectrumKind::ALL.to_vec(),
        }
    }
}

/// Samples `count` episodes with start and goal uniform over free cells and
/// geodesic distance within the constraint bounds. Episode ids are
/// `<scene>-<index>`.
pub fn generate_episodes<T: Real>(
    grid: &OccupancyGrid<T>,
    scene: &str,
    count: usize,
    seed: u64,
    constraints: &EpisodeConstraints,
) -> Result<Vec<Episode<T>>> {
    if constraints.spectra.is_empty() || constraints.bands == 0 {
        return Err(Error::InvalidArgument("need at least one spectrum kind and one band".into()));
    }
    let free: Vec<Cell> = grid.free_cells().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (T::lit(constraints.min_distance), T::lit(constraints.max_distance));
    let mut episodes = Vec::with_capacity(count);
    for k in 0..count {
        let mut rejections = 0;
        let (start, goal) = loop {
            let goal = free[rng.random_range(0..free.len())];
            let start = free[rng.random_range(0..free.len())];
            let d = fmm_solve(grid, &[goal])?.value(start);
            if d.is_finite() && d >= lo && d <= hi {
                break (start, goal);
            }
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(Error::Unsatisfiable(MAX_REJECTIONS));
            }
        };
        let heading = T::from_usize_lossy(rng.random_range(0..24usize)) * T::lit(TURN_STEP_DEG);
        let p = grid.cell_center(start);
        let kind = constraints.spectra[rng.random_range(0..constraints.spectra.len())];
        episodes.push(Episode {
            episode_id: format!("{scene}-{k:04}"),
            scene: scene.to_string(),
            start: Pose::from_degrees(p.x, p.y, heading),
            goal: grid.cell_center(goal),
            spectrum: kind.sample(constraints.bands, &mut rng),
            seed: rng.random(),
        });
    }
    Ok(episodes)
}
