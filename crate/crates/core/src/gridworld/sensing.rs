use super::{Cell, GridGeometry, ObservedMap, OccupancyGrid, Pose};
use crate::gridworld::Point;
use crate::scalar::Real;

/// Depth sensor parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorConfig<T> {
    pub fov: T,
    pub n_rays: usize,
    pub max_range: T,
}

impl<T: Real> Default for SensorConfig<T> {
    fn default() -> Self {
        Self {
            fov: T::lit(90.0).to_radians(),
            n_rays: 64,
            max_range: T::lit(5.0),
        }
    }
}

impl<T: Real> SensorConfig<T> {
    /// Absolute angle of ray `i` for an agent facing `heading`.
    pub fn ray_angle(&self, heading: T, i: usize) -> T {
        if self.n_rays <= 1 {
            return heading;
        }
        let frac = T::from_usize_lossy(i) / T::from_usize_lossy(self.n_rays - 1) - T::lit(0.5);
        heading + self.fov * frac
    }
}

/// One depth return: range to the first occupied cell boundary and that cell,
/// or `max_range` and `None` when nothing was hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit<T> {
    pub range: T,
    pub cell: Option<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthScan<T> {
    pub config: SensorConfig<T>,
    pub hits: Vec<RayHit<T>>,
}

impl<T: Real> DepthScan<T> {
    pub fn ranges(&self) -> Vec<T> {
        self.hits.iter().map(|h| h.range).collect()
    }
}

/// Walks the 4-connected chain of cells crossed by the ray `start + t * dir`
/// for `t` in `[0, max_t]`, calling `visit(cell, t_enter)` until it returns
/// `false` or the ray leaves the grid. On exact corner crossings the x step is
/// taken first.
pub fn ray_chain<T: Real>(
    geom: &GridGeometry<T>,
    start: Point<T>,
    dir: (T, T),
    max_t: T,
    mut visit: impl FnMut(Cell, T) -> bool,
) {
    let Some(mut cell) = geom.locate(start) else {
        return;
    };
    let (u, v) = geom.to_cell_coords(start);
    let res = geom.resolution;
    let (dx, dy) = dir;
    let inf = T::infinity();

    let axis = |pos: T, d: T| -> (T, T, i64) {
        if d > T::zero() {
            ((pos.floor() + T::one() - pos) * res / d, res / d, 1)
        } else if d < T::zero() {
            ((pos - pos.floor()) * res / -d, res / -d, -1)
        } else {
            (inf, inf, 0)
        }
    };
    let (mut t_max_x, t_delta_x, step_x) = axis(u, dx);
    let (mut t_max_y, t_delta_y, step_y) = axis(v, dy);

    if !visit(cell, T::zero()) {
        return;
    }
    loop {
        let (t_enter, r, c) = if t_max_x <= t_max_y {
            let t = t_max_x;
            t_max_x = t_max_x + t_delta_x;
            (t, cell.row as i64, cell.col as i64 + step_x)
        } else {
            let t = t_max_y;
            t_max_y = t_max_y + t_delta_y;
            (t, cell.row as i64 + step_y, cell.col as i64)
        };
        if !(t_enter <= max_t) || !geom.contains(r, c) {
            return;
        }
        cell = Cell::new(r as usize, c as usize);
        if !visit(cell, t_enter) {
            return;
        }
    }
}

fn cast<T: Real>(grid: &OccupancyGrid<T>, origin: Point<T>, angle: T, max_range: T) -> RayHit<T> {
    let mut hit = RayHit {
        range: max_range,
        cell: None,
    };
    ray_chain(grid.geometry(), origin, (angle.cos(), angle.sin()), max_range, |cell, t| {
        if t >= max_range {
            return false;
        }
        if grid.is_occupied(cell) {
            hit = RayHit {
                range: t,
                cell: Some(cell),
            };
            return false;
        }
        true
    });
    hit
}

/// Casts `config.n_rays` rays across the field of view. Deterministic.
pub fn raycast_depth<T: Real>(grid: &OccupancyGrid<T>, pose: &Pose<T>, config: &SensorConfig<T>) -> DepthScan<T> {
    let n = config.n_rays.max(1);
    let origin = pose.position();
    let hits = (0..n)
        .map(|i| cast(grid, origin, config.ray_angle(pose.heading, i), config.max_range))
        .collect();
    DepthScan {
        config: SensorConfig { n_rays: n, ..*config },
        hits,
    }
}

/// Marks the cells each ray crossed before its hit as free and the hit cell as
/// occupied. Rays without a hit free every cell entered before `max_range`.
pub fn integrate_observation<T: Real>(map: &mut ObservedMap<T>, pose: &Pose<T>, scan: &DepthScan<T>) {
    let origin = pose.position();
    let geom = *map.geometry();
    if let Some(c) = geom.locate(origin) {
        map.mark_free(c);
    }
    for (i, hit) in scan.hits.iter().enumerate() {
        let angle = scan.config.ray_angle(pose.heading, i);
        ray_chain(&geom, origin, (angle.cos(), angle.sin()), scan.config.max_range, |cell, t| {
            if Some(cell) == hit.cell {
                map.mark_occupied(cell);
                return false;
            }
            if t >= hit.range {
                return false;
            }
            map.mark_free(cell);
            true
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::CellState;

    fn room(w: usize, h: usize, res: f64) -> OccupancyGrid<f64> {
        let rows: Vec<String> = (0..h)
            .map(|r| {
                (0..w)
                    .map(|c| if r == 0 || c == 0 || r + 1 == h || c + 1 == w { '#' } else { '.' })
                    .collect()
            })
            .collect();
        OccupancyGrid::from_rows(res, &rows).unwrap()
    }

    fn single_ray() -> SensorConfig<f64> {
        SensorConfig {
            fov: 1e-3,
            n_rays: 1,
            max_range: 20.0,
        }
    }

    #[test]
    fn flat_wall_distance() {
        let g = room(12, 5, 0.5);
        // east wall occupies col 11, its west boundary sits at x = 5.25
        let pose = Pose::new(4.25, 1.0, 0.0);
        let scan = raycast_depth(&g, &pose, &single_ray());
        assert!((scan.hits[0].range - 1.0).abs() <= 0.25);
        assert_eq!(scan.hits[0].cell, Some(Cell::new(2, 11)));
    }

    #[test]
    fn long_corridor_caps_at_max_range() {
        let g = room(40, 3, 0.5);
        let pose = Pose::new(0.5, 0.5, 0.0);
        let cfg = SensorConfig {
            fov: 0.1,
            n_rays: 3,
            max_range: 5.0,
        };
        let scan = raycast_depth(&g, &pose, &cfg);
        assert_eq!(scan.hits[1].range, 5.0);
        assert_eq!(scan.hits[1].cell, None);
    }

    #[test]
    fn translation_symmetry() {
        let rows = ["########", "#......#", "#...#..#", "#......#", "########"];
        let shifted: Vec<String> = rows.iter().map(|r| format!("##{r}")).collect();
        let a = OccupancyGrid::<f64>::from_rows(1.0, &rows).unwrap();
        let b = OccupancyGrid::<f64>::from_rows(1.0, &shifted).unwrap();
        let cfg = SensorConfig::default();
        for heading in [0.0, 0.3, 2.0, 4.0] {
            let sa = raycast_depth(&a, &Pose::new(1.2, 2.1, heading), &cfg);
            let sb = raycast_depth(&b, &Pose::new(3.2, 2.1, heading), &cfg);
            for (x, y) in sa.hits.iter().zip(&sb.hits) {
                assert!((x.range - y.range).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ray_angles_span_fov() {
        let cfg = SensorConfig::<f64>::default();
        assert!((cfg.ray_angle(0.0, 0) + std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((cfg.ray_angle(0.0, 63) - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn first_observation_marks_agent_cell() {
        let g = room(10, 10, 0.5);
        let pose = Pose::new(2.0, 2.0, 0.0);
        let start = g.world_to_cell(pose.position()).unwrap();
        let mut m = ObservedMap::new(*g.geometry(), start);
        let scan = raycast_depth(&g, &pose, &SensorConfig::default());
        integrate_observation(&mut m, &pose, &scan);
        assert_eq!(m.state(start), CellState::Free);
        let snapshot = m.clone();
        integrate_observation(&mut m, &pose, &scan);
        assert_eq!(m, snapshot);
    }

    /// Line-of-sight test by dense sampling, independent of the DDA walk.
    fn visible(g: &OccupancyGrid<f64>, from: Point<f64>, to: Point<f64>) -> bool {
        let n = 2000;
        let target = g.world_to_cell(to).unwrap();
        for k in 0..=n {
            let t = k as f64 / n as f64;
            let p = Point::new(from.x + (to.x - from.x) * t, from.y + (to.y - from.y) * t);
            let c = g.world_to_cell(p).unwrap();
            if c == target {
                return true;
            }
            if g.is_occupied(c) {
                return false;
            }
        }
        true
    }

    #[test]
    fn full_scan_reveals_closed_room() {
        let g = room(10, 10, 0.5);
        let mut pose = Pose::new(2.0, 2.5, 0.0);
        let start = g.world_to_cell(pose.position()).unwrap();
        let mut m = ObservedMap::new(*g.geometry(), start);
        let cfg = SensorConfig::default();
        for _ in 0..24 {
            let scan = raycast_depth(&g, &pose, &cfg);
            integrate_observation(&mut m, &pose, &scan);
            pose = crate::gridworld::apply_action(&g, &pose, crate::gridworld::Action::TurnLeft);
        }
        for cell in g.free_cells() {
            assert!(visible(&g, pose.position(), g.cell_center(cell)));
            assert_eq!(m.state(cell), CellState::Free, "cell {cell:?}");
        }
        for i in 0..g.geometry().len() {
            let c = g.geometry().cell_at(i);
            match m.state(c) {
                CellState::Free => assert!(g.is_free(c)),
                CellState::Occupied => assert!(g.is_occupied(c)),
                CellState::Unknown => {}
            }
        }
    }
}
