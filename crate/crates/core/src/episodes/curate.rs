use rayon::prelude::*;

use super::{Episode, Scenes};
use crate::acoustics::{compute_field, FieldConfig, GeodesicScene, DEFAULT_ABSORPTION};
use crate::eikonal::fmm_solve;
use crate::gridworld::Point;
use crate::scalar::Real;
use crate::{Error, Result};

/// Fixed leading columns of the field dataset CSV.
pub const FIELD_CSV_PREFIX: [&str; 6] = ["scene", "src_x", "src_y", "rcv_x", "rcv_y", "band"];

#[derive(Debug, Clone, PartialEq)]
pub struct CurateConfig<T> {
    pub absorption: Vec<T>,
    pub field: FieldConfig<T>,
    /// Center-preserving subsample to this side length after sampling.
    pub downsample: Option<usize>,
    /// Every `stride`-th cell of the shortest path becomes a receiver.
    pub stride: usize,
}

impl<T: Real> Default for CurateConfig<T> {
    fn default() -> Self {
        Self {
            absorption: DEFAULT_ABSORPTION.iter().map(|a| T::lit(*a)).collect(),
            field: FieldConfig::default(),
            downsample: None,
            stride: 4,
        }
    }
}

/// One field sample: `values` is row-major, row 0 south.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRecord<T> {
    pub scene: String,
    pub source: Point<T>,
    pub receiver: Point<T>,
    pub band: usize,
    pub values: Vec<T>,
}

/// Receivers for one episode: the start position, then every `stride`-th
/// cell center along the ground-truth shortest path to the goal.
fn receivers<T: Real>(scenes: &Scenes<T>, e: &Episode<T>, stride: usize) -> Result<Vec<Point<T>>> {
    let grid = super::scene(scenes, e)?;
    let dist = fmm_solve(grid, &[grid.world_to_cell(e.goal)?])?;
    let path = dist.descent_path(grid.world_to_cell(e.start.position())?);
    let mut out = vec![e.start.position()];
    out.extend(path.iter().skip(stride).step_by(stride).map(|c| grid.cell_center(*c)));
    Ok(out)
}

/// Per-band fields for every receiver of every episode, in episode order,
/// then receiver order, then band order.
pub fn curate_field_dataset<T: Real>(
    scenes: &Scenes<T>,
    episodes: &[Episode<T>],
    config: &CurateConfig<T>,
) -> Result<Vec<FieldRecord<T>>> {
    if config.stride == 0 {
        return Err(Error::InvalidArgument("receiver stride must be >= 1".into()));
    }
    let per_episode = episodes
        .par_iter()
        .map(|e| {
            let grid = super::scene(scenes, e)?;
            let model = GeodesicScene::new(grid, e.goal, config.absorption.clone())?;
            let mut records = Vec::new();
            for rcv in receivers(scenes, e, config.stride)? {
                for band in 0..config.absorption.len() {
                    let mut field = compute_field(&model, rcv, band, &config.field)?;
                    if let Some(n) = config.downsample {
                        field = field.downsample(n)?;
                    }
                    records.push(FieldRecord {
                        scene: e.scene.clone(),
                        source: e.goal,
                        receiver: rcv,
                        band,
                        values: field.values().to_vec(),
                    });
                }
            }
            Ok(records)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_episode.into_iter().flatten().collect())
}

/// CSV text of `records`. All records must share one field size. Values use
/// the shortest representation that parses back to the same number.
pub fn write_field_csv<T: Real>(records: &[FieldRecord<T>]) -> Result<String> {
    let n = records.first().map_or(0, |r| r.values.len());
    if records.iter().any(|r| r.values.len() != n) {
        return Err(Error::InvalidArgument("records have different field sizes".into()));
    }
    if records.iter().any(|r| r.scene.contains([',', '\n', '"'])) {
        return Err(Error::InvalidArgument("scene names may not contain commas, quotes or newlines".into()));
    }
    let mut out = FIELD_CSV_PREFIX.join(",");
    for i in 0..n {
        out.push_str(&format!(",v{i:02}"));
    }
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            r.scene, r.source.x, r.source.y, r.receiver.x, r.receiver.y, r.band
        ));
        for v in &r.values {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_field_csv<T: Real>(text: &str) -> Result<Vec<FieldRecord<T>>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty field CSV".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < FIELD_CSV_PREFIX.len() || columns[..FIELD_CSV_PREFIX.len()] != FIELD_CSV_PREFIX {
        return Err(Error::Parse(format!("bad field CSV header {header:?}")));
    }
    let n = columns.len() - FIELD_CSV_PREFIX.len();
    let side = (n as f64).sqrt().round() as usize;
    if side * side != n {
        return Err(Error::Parse(format!("{n} value columns is not a square field")));
    }
    lines
        .map(|(i, line)| {
            let err = |msg: String| Error::Parse(format!("field CSV line {}: {msg}", i + 1));
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != columns.len() {
                return Err(err(format!("expected {} columns, got {}", columns.len(), cells.len())));
            }
            let num = |s: &str| s.trim().parse::<f64>().map(T::lit).map_err(|_| err(format!("bad number {s:?}")));
            Ok(FieldRecord {
                scene: cells[0].to_string(),
                source: Point::new(num(cells[1])?, num(cells[2])?),
                receiver: Point::new(num(cells[3])?, num(cells[4])?),
                band: cells[5].trim().parse().map_err(|_| err(format!("bad band {:?}", cells[5])))?,
                values: cells[6..].iter().map(|s| num(s)).collect::<Result<_>>()?,
            })
        })
        .collect()
}
