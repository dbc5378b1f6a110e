//! Top-down occupancy-grid worlds, agent kinematics, depth sensing and the
//! partial map an agent builds while it explores.
//!
//! Cells are addressed by `(row, col)` where `row` indexes the y axis and
//! `col` the x axis. Row 0 is the southernmost (minimum y) row; the ASCII map
//! format stores the northernmost row first and is flipped on load.

mod grid;
mod observed;
mod pose;
mod sensing;

pub use grid::OccupancyGrid;
pub use observed::{CellState, ObservedMap};
pub use pose::{apply_action, segment_clear, Action, Pose, FORWARD_STEP_M, TURN_STEP_DEG};
pub use sensing::{integrate_observation, ray_chain, raycast_depth, DepthScan, RayHit, SensorConfig};

use crate::scalar::Real;
use crate::{Error, Result};

/// World-frame point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Bearing of `other` seen from `self`, in `(-pi, pi]`.
    pub fn bearing_to(&self, other: &Self) -> T {
        (other.y - self.y).atan2(other.x - self.x)
    }
}

/// Grid cell index. Ordering is lexicographic on `(row, col)`, which is the
/// tie-break order used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// Chebyshev distance in cells.
    pub fn chebyshev(&self, other: &Cell) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }
}

/// Shape and metric placement of a grid, shared by the world and the
/// observed map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry<T> {
    pub width: usize,
    pub height: usize,
    pub resolution: T,
    /// World coordinate of the center of cell (0, 0).
    pub origin: Point<T>,
}

impl<T: Real> GridGeometry<T> {
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    #[inline]
    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index / self.width, index % self.width)
    }

    pub fn contains(&self, row: i64, col: i64) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    pub fn cell_center(&self, cell: Cell) -> Point<T> {
        Point::new(
            self.origin.x + T::from_usize_lossy(cell.col) * self.resolution,
            self.origin.y + T::from_usize_lossy(cell.row) * self.resolution,
        )
    }

    /// Continuous cell coordinates: the integer part of each component is the
    /// column / row the point falls in.
    pub(crate) fn to_cell_coords(&self, p: Point<T>) -> (T, T) {
        let half = T::lit(0.5);
        (
            (p.x - self.origin.x) / self.resolution + half,
            (p.y - self.origin.y) / self.resolution + half,
        )
    }

    /// Cell whose center is nearest to `p`, or `None` outside the metric bounds.
    pub fn locate(&self, p: Point<T>) -> Option<Cell> {
        let (u, v) = self.to_cell_coords(p);
        if !(u.is_finite() && v.is_finite()) {
            return None;
        }
        let col = u.floor();
        let row = v.floor();
        if col < T::zero() || row < T::zero() {
            return None;
        }
        let col = col.to_usize()?;
        let row = row.to_usize()?;
        (col < self.width && row < self.height).then_some(Cell::new(row, col))
    }

    /// Maps a world point to its cell.
    pub fn world_to_cell(&self, p: Point<T>) -> Result<Cell> {
        self.locate(p).ok_or(Error::OutsideWorld {
            x: p.x.to_f64_lossy(),
            y: p.y.to_f64_lossy(),
        })
    }

    pub fn neighbors4(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        const OFFSETS: [(i64, i64); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
        OFFSETS.iter().filter_map(move |&(dr, dc)| {
            let r = cell.row as i64 + dr;
            let c = cell.col as i64 + dc;
            self.contains(r, c).then(|| Cell::new(r as usize, c as usize))
        })
    }

    /// 8-neighborhood in lexicographic `(row, col)` order.
    pub fn neighbors8(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        const OFFSETS: [(i64, i64); 8] = [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ];
        OFFSETS.iter().filter_map(move |&(dr, dc)| {
            let r = cell.row as i64 + dr;
            let c = cell.col as i64 + dc;
            self.contains(r, c).then(|| Cell::new(r as usize, c as usize))
        })
    }
}

/// Anything a planner can run over: the ground-truth grid or an observed map.
pub trait Traversable<T: Real> {
    fn geometry(&self) -> &GridGeometry<T>;

    /// Whether planning may pass through `cell`.
    fn passable(&self, cell: Cell) -> bool;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(w: usize, h: usize, res: f64) -> GridGeometry<f64> {
        GridGeometry {
            width: w,
            height: h,
            resolution: res,
            origin: Point::new(0.0, 0.0),
        }
    }

    #[test]
    fn world_to_cell_exact_multiple() {
        let g = geom(10, 10, 0.5);
        assert_eq!(g.world_to_cell(Point::new(1.0, 1.5)).unwrap(), Cell::new(3, 2));
    }

    #[test]
    fn world_to_cell_center_is_identity() {
        let g = geom(7, 9, 0.25);
        for row in 0..9 {
            for col in 0..7 {
                let c = Cell::new(row, col);
                assert_eq!(g.world_to_cell(g.cell_center(c)).unwrap(), c);
            }
        }
    }

    #[test]
    fn world_to_cell_out_of_bounds() {
        let g = geom(10, 10, 1.0);
        assert!(matches!(
            g.world_to_cell(Point::new(-5.0, 0.0)),
            Err(Error::OutsideWorld { .. })
        ));
        assert!(g.world_to_cell(Point::new(9.6, 0.0)).is_err());
        assert!(g.world_to_cell(Point::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn world_to_cell_nearest_center() {
        let g = geom(10, 10, 0.5);
        // within half a resolution of the center of (2, 4)
        assert_eq!(g.world_to_cell(Point::new(2.2, 0.8)).unwrap(), Cell::new(2, 4));
        assert_eq!(g.world_to_cell(Point::new(1.8, 1.2)).unwrap(), Cell::new(2, 4));
    }

    #[test]
    fn neighbor_orders() {
        let g = geom(5, 5, 1.0);
        let n: Vec<_> = g.neighbors8(Cell::new(2, 2)).collect();
        let mut sorted = n.clone();
        sorted.sort();
        assert_eq!(n, sorted);
        assert_eq!(n.len(), 8);
        assert_eq!(g.neighbors4(Cell::new(0, 0)).count(), 2);
    }
}
