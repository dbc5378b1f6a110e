use std::io::Write;
use std::path::{Path, PathBuf};

use audiogoal::acoustics::{FieldConfig, GeodesicScene};
use audiogoal::afp::{calibrate_band_errors, BandErrorPrior, CalibrationSample, NoiseModel, DEFAULT_ALPHA, DEFAULT_BETA};
use audiogoal::agent::{AgentConfig, StepRecord};
use audiogoal::eikonal::fmm_solve;
use audiogoal::episodes::{
    aggregate, aggregate_csv, curate_field_dataset, episodes_from_jsonl, episodes_to_jsonl, evaluate,
    generate_episodes, parse_field_csv, results_csv, write_field_csv, CurateConfig, Episode, EpisodeConstraints,
    EvalConfig, EvalMode, EvalStrategy, Scenes, SpectrumKind,
};
use audiogoal::gridworld::{Cell, OccupancyGrid, Point};
use audiogoal::mapgen::{generate_map, MapParams};
use audiogoal::Error;

use crate::render::{ascii_overlay, field_pgm};
use crate::{Cli, Command, Opts};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: 1,
        message: message.into(),
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnknownStrategy { .. } | Error::InvalidArgument(_) | Error::InvalidPrior(_) => 1,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn runtime(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> Result<String> {
    let o = &cli.opts;
    match cli.command {
        Command::GenMaps => gen_maps(o),
        Command::GenEpisodes => gen_episodes(o),
        Command::Curate => curate(o),
        Command::Calibrate => calibrate(o),
        Command::Evaluate => cmd_evaluate(o),
        Command::Render => cmd_render(o),
        Command::DistanceField => distance_field(o),
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| runtime(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| runtime(dir, e))?;
    tmp.write_all(bytes).map_err(|e| runtime(path, e))?;
    tmp.persist(path).map_err(|e| runtime(path, e.error))?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| runtime(path, e))
}

fn required<'a>(v: &'a Option<PathBuf>, flag: &str) -> Result<&'a PathBuf> {
    v.as_ref().ok_or_else(|| usage(format!("--{flag} is required")))
}

fn parse_list(text: &str, flag: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("--{flag}: bad number {s:?}"))))
        .collect()
}

fn parse_point(text: &str) -> Result<Point<f64>> {
    let v = parse_list(text, "goal")?;
    match v[..] {
        [x, y] => Ok(Point::new(x, y)),
        _ => Err(usage(format!("--goal expects x,y, got {text:?}"))),
    }
}

fn load_map(path: &Path) -> Result<OccupancyGrid<f64>> {
    OccupancyGrid::load(path).map_err(|e| runtime(path, e))
}

fn is_map_file(p: &Path) -> bool {
    p.is_file() && p.extension().is_some_and(|e| e == "txt" || e == "map" || e == "json")
}

/// Maps keyed by file stem.
fn load_scenes(path: &Path) -> Result<Scenes<f64>> {
    let mut files = Vec::new();
    if path.is_dir() {
        for entry in std::fs::read_dir(path).map_err(|e| runtime(path, e))? {
            let p = entry.map_err(|e| runtime(path, e))?.path();
            if is_map_file(&p) {
                files.push(p);
            }
        }
        files.sort();
    } else {
        files.push(path.to_path_buf());
    }
    if files.is_empty() {
        return Err(runtime(path, "no map files found"));
    }
    let mut scenes = Scenes::new();
    for f in files {
        let name = f.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        scenes.insert(name, load_map(&f)?);
    }
    Ok(scenes)
}

fn load_episodes(o: &Opts) -> Result<Vec<Episode<f64>>> {
    let path = required(&o.episodes, "episodes")?;
    episodes_from_jsonl(&read(path)?).map_err(|e| runtime(path, e))
}

fn absorption(o: &Opts) -> Result<Vec<f64>> {
    parse_list(&o.absorption, "absorption")
}

fn noise(o: &Opts, bands: usize) -> Result<NoiseModel<f64>> {
    let sigma = parse_list(&o.sigma, "sigma")?;
    let mut eps = parse_list(&o.eps, "eps")?;
    if eps.len() == 1 {
        eps = vec![eps[0]; bands];
    }
    if sigma.len() != bands || eps.len() != bands {
        return Err(usage(format!(
            "--sigma and --eps need {bands} values (one per band), got {} and {}",
            sigma.len(),
            eps.len()
        )));
    }
    Ok(NoiseModel::new(sigma, eps, o.noise_seed)?)
}

fn field(o: &Opts) -> Result<FieldConfig<f64>> {
    let f = FieldConfig {
        size: o.field_size,
        resolution: o.field_resolution,
    };
    f.validate()?;
    Ok(f)
}

/// Runs `f` on a pool of `workers` threads (0 = rayon default).
fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| usage(format!("cannot start {workers} workers: {e}")))?
        .install(f)
}

fn gen_maps(o: &Opts) -> Result<String> {
    for k in 0..o.count {
        let params = MapParams {
            width: o.width,
            height: o.height,
            rooms: o.rooms,
            door_width: o.door_width,
            resolution: o.resolution,
            seed: o.seed.wrapping_add(k as u64),
        };
        let grid: OccupancyGrid<f64> = generate_map(&params)?;
        write_atomic(&o.out.join(format!("map{k:02}.txt")), grid.to_ascii().as_bytes())?;
    }
    Ok(format!("wrote {} maps to {}", o.count, o.out.display()))
}

fn constraints(o: &Opts, bands: usize) -> Result<EpisodeConstraints> {
    let spectra = o
        .spectra
        .split(',')
        .map(|s| s.parse::<SpectrumKind>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| usage(e.to_string()))?;
    Ok(EpisodeConstraints {
        min_distance: o.min_distance,
        max_distance: o.max_distance,
        bands,
        spectra,
    })
}

fn gen_episodes(o: &Opts) -> Result<String> {
    let scenes = load_scenes(required(&o.maps, "maps")?)?;
    let c = constraints(o, absorption(o)?.len())?;
    let mut episodes = Vec::new();
    for (k, (name, grid)) in scenes.iter().enumerate() {
        episodes.extend(generate_episodes(grid, name, o.count, o.seed.wrapping_add(k as u64), &c)?);
    }
    let path = o.out.join("episodes.jsonl");
    write_atomic(&path, episodes_to_jsonl(&episodes).as_bytes())?;
    Ok(format!("wrote {} episodes to {}", episodes.len(), path.display()))
}

fn curate(o: &Opts) -> Result<String> {
    let scenes = load_scenes(required(&o.maps, "maps")?)?;
    let episodes = load_episodes(o)?;
    let config = CurateConfig {
        absorption: absorption(o)?,
        field: field(o)?,
        downsample: o.downsample,
        stride: o.stride,
    };
    let records = with_workers(o.workers, || Ok(curate_field_dataset(&scenes, &episodes, &config)?))?;
    let path = o.out.join("fields.csv");
    write_atomic(&path, write_field_csv(&records)?.as_bytes())?;
    Ok(format!("wrote {} field records to {}", records.len(), path.display()))
}

fn calibrate(o: &Opts) -> Result<String> {
    let scenes = load_scenes(required(&o.maps, "maps")?)?;
    let absorption = absorption(o)?;
    let bands = absorption.len();
    let episodes: Vec<Episode<f64>> = match &o.episodes {
        Some(_) => load_episodes(o)?.into_iter().filter(|e| e.spectrum.is_flat()).collect(),
        None => {
            let c = EpisodeConstraints {
                spectra: vec![SpectrumKind::Flat],
                ..constraints(o, bands)?
            };
            let per_scene = o.samples.div_ceil(scenes.len());
            let mut all = Vec::new();
            for (k, (name, grid)) in scenes.iter().enumerate() {
                all.extend(generate_episodes(grid, name, per_scene, o.seed.wrapping_add(k as u64), &c)?);
            }
            all.truncate(o.samples);
            all
        }
    };
    if episodes.is_empty() {
        return Err(usage("calibration needs flat-spectrum episodes"));
    }
    let samples = episodes
        .iter()
        .map(|e| {
            let grid = scenes
                .get(&e.scene)
                .ok_or_else(|| usage(format!("episode {} uses unknown scene {:?}", e.episode_id, e.scene)))?;
            Ok(CalibrationSample {
                model: GeodesicScene::new(grid, e.goal, absorption.clone())?,
                spectrum: e.spectrum.clone(),
                receiver: e.start.position(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (noise, field) = (noise(o, bands)?, field(o)?);
    let report = with_workers(o.workers, || Ok(calibrate_band_errors(&samples, &noise, &field)?))?;
    let prior = report.prior(o.alpha.unwrap_or(DEFAULT_ALPHA), o.beta.unwrap_or(DEFAULT_BETA))?;
    write_atomic(&o.out.join("calibration.csv"), report.to_csv().as_bytes())?;
    write_atomic(&o.out.join("prior.json"), (prior.to_json() + "\n").as_bytes())?;
    Ok(format!(
        "calibrated {} bands over {} samples; wrote {}",
        bands,
        report.samples,
        o.out.join("prior.json").display()
    ))
}

fn cmd_evaluate(o: &Opts) -> Result<String> {
    let strategies = o
        .strategies
        .split(',')
        .map(|s| s.parse::<EvalStrategy>())
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mode: EvalMode = o.mode.parse().map_err(|e: Error| usage(e.to_string()))?;
    let scenes = load_scenes(required(&o.maps, "maps")?)?;
    let episodes = load_episodes(o)?;
    let absorption = absorption(o)?;
    let bands = absorption.len();
    let mut prior = match &o.prior {
        Some(p) => BandErrorPrior::from_json(&read(p)?).map_err(|e| runtime(p, e))?,
        None => BandErrorPrior::uniform(bands),
    };
    if o.alpha.is_some() || o.beta.is_some() {
        prior = prior.with_exponents(o.alpha.unwrap_or(prior.alpha()), o.beta.unwrap_or(prior.beta()))?;
    }
    let config = EvalConfig {
        noise: noise(o, bands)?,
        prior,
        field: field(o)?,
        agent: AgentConfig {
            max_steps: o.max_steps,
            success_radius: o.success_radius,
            ..AgentConfig::default()
        },
        absorption,
        mode,
        samples_per_episode: o.samples_per_episode,
        workers: o.workers,
        keep_trajectories: o.log_trajectories,
    };
    let ev = evaluate(&scenes, &episodes, &strategies, &config)?;
    let rows = aggregate(&ev, &strategies);
    write_atomic(&o.out.join("results.csv"), results_csv(&ev.results).as_bytes())?;
    write_atomic(&o.out.join("aggregate.csv"), aggregate_csv(&rows).as_bytes())?;
    for (r, log) in ev.results.iter().zip(&ev.trajectories) {
        let name = format!("{}__{}.jsonl", r.episode_id, r.strategy);
        write_atomic(&o.out.join("trajectories").join(name), log.as_bytes())?;
    }
    Ok(aggregate_csv(&rows).trim_end().to_string())
}

fn cmd_render(o: &Opts) -> Result<String> {
    let map_path = required(&o.map, "map")?;
    let grid = load_map(map_path)?;
    let trajectory: Vec<StepRecord> = match &o.trajectory {
        Some(p) => read(p)?
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| runtime(p, format!("line {}: {e}", i + 1))))
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let goal = o.goal.as_deref().map(parse_point).transpose()?;
    write_atomic(&o.out.join("render.txt"), ascii_overlay(&grid, &trajectory, goal).as_bytes())?;
    let mut images = 0;
    if let Some(p) = &o.fields {
        let records = parse_field_csv::<f64>(&read(p)?).map_err(|e| runtime(p, e))?;
        for (k, r) in records.iter().enumerate() {
            let img = field_pgm(&r.values, o.scale).map_err(|e| runtime(p, e))?;
            write_atomic(&o.out.join(format!("field_{k:04}_band{}.pgm", r.band)), &img)?;
            images += 1;
        }
    }
    Ok(format!(
        "rendered {} trajectory steps and {images} field heatmaps to {}",
        trajectory.len(),
        o.out.display()
    ))
}

fn distance_field(o: &Opts) -> Result<String> {
    let grid = load_map(required(&o.map, "map")?)?;
    let goal = parse_point(o.goal.as_deref().ok_or_else(|| usage("--goal is required"))?)?;
    let cell = grid.world_to_cell(goal)?;
    let dist = fmm_solve(&grid, &[cell])?;
    let mut out = String::from("row,col,x,y,distance\n");
    for row in 0..grid.height() {
        for col in 0..grid.width() {
            let c = Cell::new(row, col);
            let p = grid.cell_center(c);
            out.push_str(&format!("{row},{col},{},{},{}\n", p.x, p.y, dist.value(c)));
        }
    }
    let path = o.out.join("distance.csv");
    write_atomic(&path, out.as_bytes())?;
    Ok(format!("wrote {}", path.display()))
}
