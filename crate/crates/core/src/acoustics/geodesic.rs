use super::{clamp_distance, AcousticModel, DEFAULT_ABSORPTION};
use crate::eikonal::{fmm_solve, DistanceField};
use crate::gridworld::{OccupancyGrid, Point};
use crate::scalar::Real;
use crate::{Error, Result};

/// Geodesic attenuation model on an occupancy grid: a unit source in band `b`
/// produces `a_b^d / max(d, 0.1)` at geodesic distance `d`, and silence where
/// the receiver is unreachable. The distance field is solved once per source.
#[derive(Debug, Clone)]
pub struct GeodesicScene<'a, T> {
    grid: &'a OccupancyGrid<T>,
    source: Point<T>,
    absorption: Vec<T>,
    distances: DistanceField<T>,
}

impl<'a, T: Real> GeodesicScene<'a, T> {
    pub fn new(grid: &'a OccupancyGrid<T>, source: Point<T>, absorption: Vec<T>) -> Result<Self> {
        if let Some(a) = absorption.iter().find(|a| !(**a > T::zero() && **a <= T::one())) {
            return Err(Error::InvalidArgument(format!("absorption {a} outside (0, 1]")));
        }
        if absorption.is_empty() {
            return Err(Error::InvalidArgument("need at least one band".into()));
        }
        let cell = grid.world_to_cell(source)?;
        if grid.is_occupied(cell) {
            return Err(Error::OccupiedPosition {
                x: source.x.to_f64_lossy(),
                y: source.y.to_f64_lossy(),
            });
        }
        let distances = fmm_solve(grid, &[cell])?;
        Ok(Self {
            grid,
            source,
            absorption,
            distances,
        })
    }

    /// Scene with the default five-band absorption profile.
    pub fn with_default_bands(grid: &'a OccupancyGrid<T>, source: Point<T>) -> Result<Self> {
        Self::new(grid, source, DEFAULT_ABSORPTION.iter().map(|a| T::lit(*a)).collect())
    }

    pub fn source(&self) -> Point<T> {
        self.source
    }

    pub fn grid(&self) -> &OccupancyGrid<T> {
        self.grid
    }

    pub fn distances(&self) -> &DistanceField<T> {
        &self.distances
    }

    pub fn absorption(&self) -> &[T] {
        &self.absorption
    }

    /// Geodesic distance from the source to `point`'s cell; `+inf` if blocked.
    pub fn distance_to(&self, point: Point<T>) -> T {
        match self.grid.geometry().locate(point) {
            Some(c) => self.distances.value(c),
            None => T::infinity(),
        }
    }
}

impl<T: Real> AcousticModel<T> for GeodesicScene<'_, T> {
    fn bands(&self) -> usize {
        self.absorption.len()
    }

    fn is_open(&self, point: Point<T>) -> bool {
        self.grid.is_free_point(point)
    }

    fn pressure_at(&self, point: Point<T>, band: usize) -> Result<T> {
        let a = *self
            .absorption
            .get(band)
            .ok_or_else(|| Error::InvalidArgument(format!("band {band} out of range")))?;
        let d = self.distance_to(point);
        if !d.is_finite() {
            return Ok(T::zero());
        }
        Ok(a.powf(d) / clamp_distance(d))
    }
}

/// One-shot geodesic pressure at `rcv` from a unit source at `source`.
pub fn geodesic_pressure<T: Real>(
    grid: &OccupancyGrid<T>,
    source: Point<T>,
    rcv: Point<T>,
    band: usize,
    absorption: T,
) -> Result<T> {
    let mut bands = vec![T::one(); band + 1];
    bands[band] = absorption;
    GeodesicScene::new(grid, source, bands)?.pressure_at(rcv, band)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open() -> OccupancyGrid<f64> {
        let rows: Vec<String> = (0..12)
            .map(|r| {
                (0..12)
                    .map(|c| if r == 0 || c == 0 || r == 11 || c == 11 { '#' } else { '.' })
                    .collect()
            })
            .collect();
        OccupancyGrid::from_rows(0.5, &rows).unwrap()
    }

    #[test]
    fn receiver_at_source_is_clamped() {
        let g = open();
        let p = Point::new(2.0, 2.0);
        assert_eq!(geodesic_pressure(&g, p, p, 0, 0.9).unwrap(), 10.0);
    }

    #[test]
    fn pure_inverse_distance() {
        let g = open();
        let v = geodesic_pressure(&g, Point::new(1.0, 2.0), Point::new(3.0, 2.0), 2, 1.0).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sealed_receiver_is_silent() {
        let g = OccupancyGrid::<f64>::parse_ascii("res 0.5\n########\n#...#..#\n#...#..#\n########\n").unwrap();
        let v = geodesic_pressure(&g, Point::new(0.5, 0.5), Point::new(3.0, 0.5), 0, 0.95).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn occupied_source_is_error() {
        let g = open();
        assert!(geodesic_pressure(&g, Point::new(0.0, 0.0), Point::new(2.0, 2.0), 0, 0.9).is_err());
    }

    #[test]
    fn bad_absorption_rejected() {
        let g = open();
        assert!(GeodesicScene::new(&g, Point::new(2.0, 2.0), vec![0.0]).is_err());
        assert!(GeodesicScene::new(&g, Point::new(2.0, 2.0), vec![1.5]).is_err());
    }
}
