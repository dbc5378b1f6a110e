//! Geodesic distance fields on occupancy grids.
//!
//! [`fmm_solve`] runs a first-order Fast Marching solve of `|grad T| = 1`.
//! Each update takes the smaller of the axis-aligned 4-neighbor upwind
//! solution and the same scheme on the diagonal neighbors. Cells within a
//! small radius of each source that have a clear line of sight are seeded with
//! their exact Euclidean distance.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::gridworld::{Cell, GridGeometry, Traversable};
use crate::scalar::Real;
use crate::{Error, Result};

/// Chebyshev radius (cells) around each source seeded with exact distances.
pub const SEED_RADIUS: usize = 2;

/// Per-cell geodesic distance in meters; `+inf` where unreachable or blocked.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField<T> {
    geometry: GridGeometry<T>,
    values: Vec<T>,
    sources: Vec<Cell>,
}

impl<T: Real> DistanceField<T> {
    pub fn geometry(&self) -> &GridGeometry<T> {
        &self.geometry
    }

    pub fn value(&self, cell: Cell) -> T {
        self.values[self.geometry.index(cell)]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn sources(&self) -> &[Cell] {
        &self.sources
    }

    pub fn is_reachable(&self, cell: Cell) -> bool {
        self.value(cell).is_finite()
    }

    /// Cells visited by repeated [`descend_step`] from `start`, inclusive,
    /// ending at a local minimum (a source when the field is well formed).
    pub fn descent_path(&self, start: Cell) -> Vec<Cell> {
        let mut path = vec![start];
        if !self.is_reachable(start) {
            return path;
        }
        let mut current = start;
        for _ in 0..self.geometry.len() {
            let next = descend_step(self, current);
            if next == current {
                break;
            }
            path.push(next);
            current = next;
        }
        path
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Far,
    Trial,
    Known,
}

struct Entry<T> {
    value: T,
    index: usize,
}

impl<T: Real> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Entry<T> {}

impl<T: Real> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reversed so `BinaryHeap` pops the smallest value; equal values pop in
/// index order, which keeps the acceptance order deterministic.
impl<T: Real> Ord for Entry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .partial_cmp(&self.value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Whether the straight segment between two cell centers only touches
/// passable cells. Uses the supercover of the segment, so corners count.
fn line_of_sight<T: Real, M: Traversable<T> + ?Sized>(map: &M, a: Cell, b: Cell) -> bool {
    let (r0, c0) = (a.row as i64, a.col as i64);
    let (dr, dc) = (b.row as i64 - r0, b.col as i64 - c0);
    let steps = 4 * dr.abs().max(dc.abs()).max(1);
    // sample at quarter-cell spacing plus exact corner crossings
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let r = r0 as f64 + dr as f64 * t;
        let c = c0 as f64 + dc as f64 * t;
        for rr in [(r - 1e-9).round(), (r + 1e-9).round()] {
            for cc in [(c - 1e-9).round(), (c + 1e-9).round()] {
                let cell = Cell::new(rr as usize, cc as usize);
                if !map.passable(cell) {
                    return false;
                }
            }
        }
    }
    true
}

/// Two-sided first-order upwind solve for one stencil with spacing `h`, given
/// the smaller known value along each of its two axes.
fn stencil_solve<T: Real>(a: T, b: T, h: T) -> T {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if !lo.is_finite() {
        return T::infinity();
    }
    if !hi.is_finite() || hi - lo >= h {
        return lo + h;
    }
    let diff = hi - lo;
    let two = T::lit(2.0);
    (lo + hi + (two * h * h - diff * diff).sqrt()) / two
}

/// Upwind update combining the axis stencil with the 45 degree rotated
/// stencil (spacing `h * sqrt 2`); the smaller solution wins. A diagonal
/// neighbor counts when at least one cell flanking the diagonal is passable,
/// so fronts wrap tightly around single wall corners.
fn upwind_update<T: Real, M: Traversable<T> + ?Sized>(
    map: &M,
    geom: &GridGeometry<T>,
    values: &[T],
    status: &[Status],
    cell: Cell,
) -> T {
    let h = geom.resolution;
    let (r, c) = (cell.row as i64, cell.col as i64);
    let known = |dr: i64, dc: i64| -> T {
        let (rr, cc) = (r + dr, c + dc);
        if !geom.contains(rr, cc) {
            return T::infinity();
        }
        if dr != 0 && dc != 0 {
            let flank_a = Cell::new(rr as usize, c as usize);
            let flank_b = Cell::new(r as usize, cc as usize);
            if !map.passable(flank_a) && !map.passable(flank_b) {
                return T::infinity();
            }
        }
        let i = geom.index(Cell::new(rr as usize, cc as usize));
        if status[i] == Status::Known {
            values[i]
        } else {
            T::infinity()
        }
    };
    let axis = stencil_solve(known(0, -1).min(known(0, 1)), known(-1, 0).min(known(1, 0)), h);
    let diag = stencil_solve(
        known(-1, -1).min(known(1, 1)),
        known(-1, 1).min(known(1, -1)),
        h * T::SQRT_2(),
    );
    axis.min(diag)
}

/// Solves the unit-speed Eikonal equation from `sources` over the passable
/// cells of `map`. Impassable sources are ignored; if none is passable the
/// solve fails.
pub fn fmm_solve<T: Real, M: Traversable<T> + ?Sized>(map: &M, sources: &[Cell]) -> Result<DistanceField<T>> {
    let geom = *map.geometry();
    let mut srcs: Vec<Cell> = sources
        .iter()
        .copied()
        .filter(|c| geom.contains(c.row as i64, c.col as i64) && map.passable(*c))
        .collect();
    srcs.sort();
    srcs.dedup();
    if srcs.is_empty() {
        return Err(Error::NoNavigableSource);
    }

    let n = geom.len();
    let mut values = vec![T::infinity(); n];
    let mut status = vec![Status::Far; n];
    let mut heap = BinaryHeap::new();

    for &s in &srcs {
        values[geom.index(s)] = T::zero();
    }
    for &s in &srcs {
        let rad = SEED_RADIUS as i64;
        for dr in -rad..=rad {
            for dc in -rad..=rad {
                let (r, c) = (s.row as i64 + dr, s.col as i64 + dc);
                if (dr == 0 && dc == 0) || !geom.contains(r, c) {
                    continue;
                }
                let cell = Cell::new(r as usize, c as usize);
                if !map.passable(cell) || !line_of_sight(map, s, cell) {
                    continue;
                }
                let d = T::from_i64(dr * dr + dc * dc).expect("small integer").sqrt() * geom.resolution;
                let i = geom.index(cell);
                if d < values[i] {
                    values[i] = d;
                }
            }
        }
    }
    for i in 0..n {
        if values[i].is_finite() {
            status[i] = Status::Trial;
            heap.push(Entry { value: values[i], index: i });
        }
    }

    while let Some(Entry { value, index }) = heap.pop() {
        if status[index] == Status::Known || value != values[index] {
            continue;
        }
        status[index] = Status::Known;
        let cell = geom.cell_at(index);
        for nb in geom.neighbors8(cell) {
            let j = geom.index(nb);
            if status[j] == Status::Known || !map.passable(nb) {
                continue;
            }
            let candidate = upwind_update(map, &geom, &values, &status, nb);
            if candidate < values[j] {
                values[j] = candidate;
                status[j] = Status::Trial;
                heap.push(Entry { value: candidate, index: j });
            }
        }
    }

    Ok(DistanceField {
        geometry: geom,
        values,
        sources: srcs,
    })
}

/// Returns `target` when passable, otherwise the passable cell with the fewest
/// 4-neighbor BFS hops from it (ties to the smallest `(row, col)`). The BFS
/// walks through blocked cells.
pub fn nearest_navigable<T: Real, M: Traversable<T> + ?Sized>(map: &M, target: Cell) -> Result<Cell> {
    let geom = map.geometry();
    if !geom.contains(target.row as i64, target.col as i64) {
        return Err(Error::InvalidArgument(format!("cell {target:?} outside grid")));
    }
    if map.passable(target) {
        return Ok(target);
    }
    let mut seen = vec![false; geom.len()];
    seen[geom.index(target)] = true;
    let mut layer = vec![target];
    while !layer.is_empty() {
        let mut next = Vec::new();
        for &c in &layer {
            for nb in geom.neighbors4(c) {
                let i = geom.index(nb);
                if !seen[i] {
                    seen[i] = true;
                    next.push(nb);
                }
            }
        }
        if let Some(best) = next.iter().copied().filter(|c| map.passable(*c)).min() {
            return Ok(best);
        }
        layer = next;
    }
    Err(Error::NoNavigableCell)
}

/// One step of steepest descent over the 8-neighborhood. Diagonal moves that
/// would cut a blocked corner are skipped. Returns `current` at a local minimum.
pub fn descend_step<T: Real>(field: &DistanceField<T>, current: Cell) -> Cell {
    let geom = field.geometry();
    let here = field.value(current);
    let mut best = current;
    let mut best_value = here;
    for nb in geom.neighbors8(current) {
        let v = field.value(nb);
        if !v.is_finite() {
            continue;
        }
        if nb.row != current.row && nb.col != current.col {
            let side_a = Cell::new(current.row, nb.col);
            let side_b = Cell::new(nb.row, current.col);
            if !field.is_reachable(side_a) || !field.is_reachable(side_b) {
                continue;
            }
        }
        if v < best_value {
            best = nb;
            best_value = v;
        }
    }
    best
}

/// Breadth-first hop distances (4-neighbor) through passable cells.
pub fn bfs_hops<T: Real, M: Traversable<T> + ?Sized>(map: &M, start: Cell) -> Vec<Option<usize>> {
    let geom = map.geometry();
    let mut hops = vec![None; geom.len()];
    if !map.passable(start) {
        return hops;
    }
    hops[geom.index(start)] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        let d = hops[geom.index(c)].unwrap_or(0);
        for nb in geom.neighbors4(c) {
            let i = geom.index(nb);
            if hops[i].is_none() && map.passable(nb) {
                hops[i] = Some(d + 1);
                queue.push_back(nb);
            }
        }
    }
    hops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::OccupancyGrid;

    fn open(w: usize, h: usize, res: f64) -> OccupancyGrid<f64> {
        let rows: Vec<String> = (0..h)
            .map(|r| {
                (0..w)
                    .map(|c| if r == 0 || c == 0 || r + 1 == h || c + 1 == w { '#' } else { '.' })
                    .collect()
            })
            .collect();
        OccupancyGrid::from_rows(res, &rows).unwrap()
    }

    #[test]
    fn axis_aligned_exact() {
        let g = open(20, 20, 0.5);
        let f = fmm_solve(&g, &[Cell::new(10, 3)]).unwrap();
        assert!((f.value(Cell::new(10, 8)) - 2.5).abs() < 1e-6);
        assert!((f.value(Cell::new(4, 3)) - 3.0).abs() < 1e-6);
        assert_eq!(f.value(Cell::new(10, 3)), 0.0);
    }

    #[test]
    fn diagonal_neighbor_within_ten_percent() {
        let g = open(10, 10, 1.0);
        let f = fmm_solve(&g, &[Cell::new(5, 5)]).unwrap();
        let d = f.value(Cell::new(6, 6));
        assert!((d - 2f64.sqrt()).abs() / 2f64.sqrt() < 0.1);
    }

    #[test]
    fn occupied_cells_are_infinite() {
        let g = OccupancyGrid::<f64>::parse_ascii("res 1\n######\n#..#.#\n######\n").unwrap();
        let f = fmm_solve(&g, &[Cell::new(1, 1)]).unwrap();
        assert!(f.value(Cell::new(0, 0)).is_infinite());
        assert!(f.value(Cell::new(1, 4)).is_infinite());
        assert_eq!(f.value(Cell::new(1, 2)), 1.0);
    }

    #[test]
    fn all_sources_occupied_is_error() {
        let g = open(5, 5, 1.0);
        assert!(matches!(
            fmm_solve(&g, &[Cell::new(0, 0), Cell::new(4, 4)]),
            Err(Error::NoNavigableSource)
        ));
        assert!(matches!(fmm_solve::<f64, _>(&g, &[]), Err(Error::NoNavigableSource)));
    }

    #[test]
    fn works_in_f32() {
        let g = OccupancyGrid::<f32>::parse_ascii("res 0.5\n#######\n#.....#\n#######\n").unwrap();
        let f = fmm_solve(&g, &[Cell::new(1, 1)]).unwrap();
        assert_eq!(f.value(Cell::new(1, 5)), 2.0f32);
    }

    #[test]
    fn nearest_navigable_identity_and_pillar() {
        let g = OccupancyGrid::<f64>::parse_ascii("res 1\n#####\n#...#\n#.#.#\n#...#\n#####\n").unwrap();
        assert_eq!(nearest_navigable(&g, Cell::new(1, 1)).unwrap(), Cell::new(1, 1));
        // pillar at (2, 2): its four neighbors are free, smallest is (1, 2)
        assert_eq!(nearest_navigable(&g, Cell::new(2, 2)).unwrap(), Cell::new(1, 2));
    }

    #[test]
    fn nearest_navigable_deep_block() {
        let rows = [
            "#########",
            "#.......#",
            "#.#####.#",
            "#.#####.#",
            "#.#####.#",
            "#.......#",
            "#########",
        ];
        let g = OccupancyGrid::<f64>::from_rows(1.0, &rows).unwrap();
        // block spans rows 2..=4, cols 2..=6; its center (3, 4) is 2 hops from row 1 and row 5
        let got = nearest_navigable(&g, Cell::new(3, 4)).unwrap();
        assert_eq!(got, Cell::new(1, 4));
    }

    #[test]
    fn descend_straight_corridor() {
        let g = OccupancyGrid::<f64>::parse_ascii("res 1\n########\n#......#\n########\n").unwrap();
        let f = fmm_solve(&g, &[Cell::new(1, 1)]).unwrap();
        assert_eq!(descend_step(&f, Cell::new(1, 5)), Cell::new(1, 4));
        assert_eq!(descend_step(&f, Cell::new(1, 1)), Cell::new(1, 1));
    }

    #[test]
    fn descend_avoids_corner_cutting() {
        let rows = ["#####", "#..##", "##..#", "#####"];
        // free: (2,1),(2,2),(1,2),(1,3); (2,2)->(1,3) is not a corner cut, (2,1)->(1,2) is
        let g = OccupancyGrid::<f64>::from_rows(1.0, &rows).unwrap();
        let f = fmm_solve(&g, &[Cell::new(1, 3)]).unwrap();
        assert_eq!(descend_step(&f, Cell::new(2, 1)), Cell::new(2, 2));
    }
}
