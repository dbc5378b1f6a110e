//! Procedural multi-room layouts.
//!
//! The interior is split recursively (binary space partition) into `rooms`
//! rectangles separated by one-cell walls; every split wall gets one door, so
//! all free cells are mutually reachable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gridworld::{GridGeometry, OccupancyGrid, Point};
use crate::scalar::Real;
use crate::{Error, Result};

/// Smallest room side, in cells.
pub const MIN_ROOM_CELLS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct MapParams {
    /// Cells, including the border.
    pub width: usize,
    pub height: usize,
    pub rooms: usize,
    /// Door width in cells.
    pub door_width: usize,
    pub resolution: f64,
    pub seed: u64,
}

impl Default for MapParams {
    fn default() -> Self {
        Self {
            width: 40,
            height: 30,
            rooms: 4,
            door_width: 3,
            resolution: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    row: usize,
    col: usize,
    rows: usize,
    cols: usize,
}

struct Split {
    vertical: bool,
    /// Row or column of the wall.
    at: usize,
    /// Extent of the wall along its length, `[lo, hi)`.
    lo: usize,
    hi: usize,
}

pub fn generate_map<T: Real>(params: &MapParams) -> Result<OccupancyGrid<T>> {
    let MapParams {
        width,
        height,
        rooms,
        door_width,
        ..
    } = *params;
    if rooms == 0 || door_width == 0 {
        return Err(Error::InvalidArgument("rooms and door width must be >= 1".into()));
    }
    if width < MIN_ROOM_CELLS + 2 || height < MIN_ROOM_CELLS + 2 {
        return Err(Error::InvalidArgument(format!("map {width}x{height} is too small")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut leaves = vec![Rect {
        row: 1,
        col: 1,
        rows: height - 2,
        cols: width - 2,
    }];
    let mut splits = Vec::new();
    while leaves.len() < rooms {
        // split the largest splittable leaf, lowest index on ties
        let candidate = leaves
            .iter()
            .enumerate()
            .filter(|(_, r)| r.rows.max(r.cols) > 2 * MIN_ROOM_CELLS)
            .max_by(|a, b| (a.1.rows * a.1.cols).cmp(&(b.1.rows * b.1.cols)).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i);
        let Some(i) = candidate else {
            return Err(Error::InvalidArgument(format!(
                "cannot fit {rooms} rooms of at least {MIN_ROOM_CELLS} cells in a {width}x{height} map"
            )));
        };
        let r = leaves.swap_remove(i);
        let vertical = if r.cols > 2 * MIN_ROOM_CELLS && r.rows > 2 * MIN_ROOM_CELLS {
            r.cols >= r.rows
        } else {
            r.cols > 2 * MIN_ROOM_CELLS
        };
        let span = if vertical { r.cols } else { r.rows };
        let along = if vertical { r.rows } else { r.cols };
        if door_width > along {
            return Err(Error::InvalidArgument(format!("door width {door_width} exceeds wall length {along}")));
        }
        let offset = rng.random_range(MIN_ROOM_CELLS..=span - MIN_ROOM_CELLS - 1);
        if vertical {
            let at = r.col + offset;
            splits.push(Split { vertical, at, lo: r.row, hi: r.row + r.rows });
            leaves.push(Rect { cols: offset, ..r });
            leaves.push(Rect {
                col: at + 1,
                cols: r.cols - offset - 1,
                ..r
            });
        } else {
            let at = r.row + offset;
            splits.push(Split { vertical, at, lo: r.col, hi: r.col + r.cols });
            leaves.push(Rect { rows: offset, ..r });
            leaves.push(Rect {
                row: at + 1,
                rows: r.rows - offset - 1,
                ..r
            });
        }
    }

    let mut occupied = vec![true; width * height];
    for leaf in &leaves {
        for row in leaf.row..leaf.row + leaf.rows {
            for col in leaf.col..leaf.col + leaf.cols {
                occupied[row * width + col] = false;
            }
        }
    }
    let free = |occ: &[bool], row: usize, col: usize| !occ[row * width + col];
    for s in &splits {
        let cell = |t: usize| if s.vertical { (t, s.at) } else { (s.at, t) };
        let opens = |occ: &[bool], t: usize| {
            let (row, col) = cell(t);
            if s.vertical {
                free(occ, row, col - 1) && free(occ, row, col + 1)
            } else {
                free(occ, row - 1, col) && free(occ, row + 1, col)
            }
        };
        let starts: Vec<usize> = (s.lo..=s.hi.saturating_sub(door_width))
            .filter(|&t| (t..t + door_width).all(|u| opens(&occupied, u)))
            .collect();
        if starts.is_empty() {
            return Err(Error::InvalidArgument("no room for a door; try a smaller door width".into()));
        }
        let start = starts[rng.random_range(0..starts.len())];
        for t in start..start + door_width {
            let (row, col) = cell(t);
            occupied[row * width + col] = false;
        }
    }
    let geometry = GridGeometry {
        width,
        height,
        resolution: T::lit(params.resolution),
        origin: Point::new(T::zero(), T::zero()),
    };
    OccupancyGrid::new(geometry, occupied)
}
