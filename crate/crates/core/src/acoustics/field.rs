use rayon::prelude::*;

use super::AcousticModel;
use crate::gridworld::Point;
use crate::scalar::Real;
use crate::{Error, Result};

/// Which band a field was computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BandSel {
    Band(usize),
    All,
}

impl std::fmt::Display for BandSel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BandSel::Band(b) => write!(f, "{b}"),
            BandSel::All => f.write_str("all"),
        }
    }
}

impl std::str::FromStr for BandSel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(BandSel::All);
        }
        s.parse()
            .map(BandSel::Band)
            .map_err(|_| Error::Parse(format!("bad band {s:?}")))
    }
}

/// Side length (odd) and pitch of the sampled field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig<T> {
    pub size: usize,
    pub resolution: T,
}

impl<T: Real> Default for FieldConfig<T> {
    fn default() -> Self {
        Self {
            size: 9,
            resolution: T::lit(0.5),
        }
    }
}

impl<T: Real> FieldConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.size < 3 || self.size.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("field size must be odd and >= 3, got {}", self.size)));
        }
        if !(self.resolution > T::zero()) {
            return Err(Error::InvalidArgument("field resolution must be positive".into()));
        }
        Ok(())
    }
}

/// `L x L` world-axis-aligned pressure grid centered on a receiver.
///
/// Row index grows with y (row 0 is the southern edge), column index with x.
/// Values are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticField<T> {
    size: usize,
    resolution: T,
    center: Point<T>,
    band: BandSel,
    values: Vec<T>,
}

impl<T: Real> AcousticField<T> {
    pub fn new(size: usize, resolution: T, center: Point<T>, band: BandSel, values: Vec<T>) -> Result<Self> {
        FieldConfig { size, resolution }.validate()?;
        if values.len() != size * size {
            return Err(Error::InvalidArgument(format!(
                "field of size {size} needs {} values, got {}",
                size * size,
                values.len()
            )));
        }
        if values.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidArgument("field values must be finite and >= 0".into()));
        }
        Ok(Self {
            size,
            resolution,
            center,
            band,
            values,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn resolution(&self) -> T {
        self.resolution
    }

    pub fn center(&self) -> Point<T> {
        self.center
    }

    pub fn band(&self) -> BandSel {
        self.band
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn center_index(&self) -> (usize, usize) {
        (self.size / 2, self.size / 2)
    }

    pub fn value(&self, row: usize, col: usize) -> T {
        self.values[row * self.size + col]
    }

    /// World position of cell `(row, col)`.
    pub fn cell_position(&self, row: usize, col: usize) -> Point<T> {
        cell_position(self.center, self.size, self.resolution, row, col)
    }

    /// Offset of `(row, col)` from the center cell in meters, `(east, north)`.
    pub fn cell_offset(&self, row: usize, col: usize) -> (T, T) {
        let h = (self.size / 2) as i64;
        (
            T::from_i64(col as i64 - h).expect("small") * self.resolution,
            T::from_i64(row as i64 - h).expect("small") * self.resolution,
        )
    }

    /// Argmax cell and value; ties go to the smallest `(row, col)`.
    pub fn peak(&self) -> ((usize, usize), T) {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        ((best / self.size, best % self.size), self.values[best])
    }

    /// Center-preserving subsample to `new_size` cells per side, taking every
    /// `size / new_size`-th cell outward from the center.
    pub fn downsample(&self, new_size: usize) -> Result<Self> {
        FieldConfig {
            size: new_size,
            resolution: self.resolution,
        }
        .validate()?;
        if new_size > self.size {
            return Err(Error::InvalidArgument(format!("cannot downsample {} to {new_size}", self.size)));
        }
        let stride = self.size / new_size;
        let c = (self.size / 2) as i64;
        let h = (new_size / 2) as i64;
        let mut values = Vec::with_capacity(new_size * new_size);
        for r in 0..new_size as i64 {
            for k in 0..new_size as i64 {
                let row = (c + (r - h) * stride as i64) as usize;
                let col = (c + (k - h) * stride as i64) as usize;
                values.push(self.value(row, col));
            }
        }
        Ok(Self {
            size: new_size,
            resolution: self.resolution * T::from_usize_lossy(stride),
            center: self.center,
            band: self.band,
            values,
        })
    }

    /// Same geometry, new values.
    pub fn with_values(&self, band: BandSel, values: Vec<T>) -> Result<Self> {
        Self::new(self.size, self.resolution, self.center, band, values)
    }
}

fn cell_position<T: Real>(center: Point<T>, size: usize, res: T, row: usize, col: usize) -> Point<T> {
    let h = (size / 2) as i64;
    Point::new(
        center.x + T::from_i64(col as i64 - h).expect("small") * res,
        center.y + T::from_i64(row as i64 - h).expect("small") * res,
    )
}

fn sample<T: Real, M: AcousticModel<T> + ?Sized>(model: &M, p: Point<T>, band: usize) -> Result<T> {
    if model.is_open(p) {
        model.pressure_at(p, band)
    } else {
        Ok(T::zero())
    }
}

fn check_receiver<T: Real, M: AcousticModel<T> + ?Sized>(model: &M, receiver: Point<T>, band: usize) -> Result<()> {
    if band >= model.bands() {
        return Err(Error::InvalidArgument(format!("band {band} out of range")));
    }
    if !model.is_open(receiver) {
        return Err(Error::OccupiedPosition {
            x: receiver.x.to_f64_lossy(),
            y: receiver.y.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Samples the model on an `L x L` grid centered at `receiver`. Cells off the
/// map or inside obstacles read 0.
pub fn compute_field<T: Real, M: AcousticModel<T> + ?Sized>(
    model: &M,
    receiver: Point<T>,
    band: usize,
    config: &FieldConfig<T>,
) -> Result<AcousticField<T>> {
    config.validate()?;
    check_receiver(model, receiver, band)?;
    let n = config.size;
    let values = (0..n * n)
        .map(|i| sample(model, cell_position(receiver, n, config.resolution, i / n, i % n), band))
        .collect::<Result<Vec<_>>>()?;
    AcousticField::new(n, config.resolution, receiver, BandSel::Band(band), values)
}

/// [`compute_field`] with the cells evaluated on the rayon pool. Produces
/// identical values.
pub fn compute_field_parallel<T: Real, M: AcousticModel<T> + ?Sized>(
    model: &M,
    receiver: Point<T>,
    band: usize,
    config: &FieldConfig<T>,
) -> Result<AcousticField<T>> {
    config.validate()?;
    check_receiver(model, receiver, band)?;
    let n = config.size;
    let values = (0..n * n)
        .into_par_iter()
        .map(|i| sample(model, cell_position(receiver, n, config.resolution, i / n, i % n), band))
        .collect::<Result<Vec<_>>>()?;
    AcousticField::new(n, config.resolution, receiver, BandSel::Band(band), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustics::{GeodesicScene, ImageSourceScene, RoomSpec};
    use crate::gridworld::OccupancyGrid;

    fn open(n: usize) -> OccupancyGrid<f64> {
        let rows: Vec<String> = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| if r == 0 || c == 0 || r + 1 == n || c + 1 == n { '#' } else { '.' })
                    .collect()
            })
            .collect();
        OccupancyGrid::from_rows(0.5, &rows).unwrap()
    }

    #[test]
    fn source_at_center_peaks_at_center() {
        let g = open(20);
        let p = Point::new(4.5, 4.5);
        let scene = GeodesicScene::with_default_bands(&g, p).unwrap();
        let f = compute_field(&scene, p, 0, &FieldConfig::default()).unwrap();
        assert_eq!(f.peak(), ((4, 4), 10.0));
        assert_eq!(f.value(4, 4), scene.pressure_at(p, 0).unwrap());
    }

    #[test]
    fn source_due_east_peaks_on_east_edge() {
        let g = open(30);
        let rcv = Point::new(6.0, 6.0);
        let src = Point::new(9.0, 6.0);
        let scene = GeodesicScene::with_default_bands(&g, src).unwrap();
        let f = compute_field(&scene, rcv, 2, &FieldConfig::default()).unwrap();
        let ((row, col), _) = f.peak();
        assert_eq!((row, col), (4, 8));
    }

    #[test]
    fn blocked_cells_read_zero() {
        let g = open(8);
        let rcv = Point::new(0.5, 0.5);
        let scene = GeodesicScene::with_default_bands(&g, Point::new(2.0, 2.0)).unwrap();
        let f = compute_field(&scene, rcv, 0, &FieldConfig::default()).unwrap();
        // rows/cols 0..=2 fall off the map or on the border wall
        assert_eq!(f.value(0, 0), 0.0);
        assert_eq!(f.value(3, 3), 0.0);
        assert!(f.value(4, 4) > 0.0);
    }

    #[test]
    fn receiver_must_be_free() {
        let g = open(8);
        let scene = GeodesicScene::with_default_bands(&g, Point::new(2.0, 2.0)).unwrap();
        assert!(compute_field(&scene, Point::new(0.0, 0.0), 0, &FieldConfig::default()).is_err());
        assert!(compute_field(&scene, Point::new(1.0, 1.0), 7, &FieldConfig::default()).is_err());
    }

    #[test]
    fn parallel_matches_sequential() {
        let room = RoomSpec::new(6.0, 5.0, vec![0.6, 0.8]).unwrap();
        let scene = ImageSourceScene::new(room, Point::new(1.1, 3.9), 3).unwrap();
        let cfg = FieldConfig::default();
        let a = compute_field(&scene, Point::new(3.3, 2.2), 1, &cfg).unwrap();
        let b = compute_field_parallel(&scene, Point::new(3.3, 2.2), 1, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn downsample_preserves_center() {
        let values: Vec<f64> = (0..81).map(|v| v as f64).collect();
        let f = AcousticField::new(9, 0.5, Point::new(0.0, 0.0), BandSel::Band(0), values).unwrap();
        let d = f.downsample(3).unwrap();
        assert_eq!(d.value(1, 1), f.value(4, 4));
        assert_eq!(d.values(), &[10.0, 13.0, 16.0, 37.0, 40.0, 43.0, 64.0, 67.0, 70.0]);
        assert_eq!(d.resolution(), 1.5);
    }

    #[test]
    fn peak_tie_break() {
        let f = AcousticField::new(3, 0.5, Point::new(0.0, 0.0), BandSel::All, vec![0.0; 9]).unwrap();
        assert_eq!(f.peak(), ((0, 0), 0.0));
        let mut v = vec![0.0; 9];
        v[5] = 1.0;
        v[7] = 1.0;
        let f = AcousticField::new(3, 0.5, Point::new(0.0, 0.0), BandSel::All, v).unwrap();
        assert_eq!(f.peak(), ((1, 2), 1.0));
    }

    #[test]
    fn field_shape_validation() {
        assert!(AcousticField::new(4, 0.5, Point::new(0.0, 0.0), BandSel::All, vec![0.0; 16]).is_err());
        assert!(AcousticField::new(3, 0.5, Point::new(0.0, 0.0), BandSel::All, vec![0.0; 8]).is_err());
        assert!(AcousticField::new(3, 0.5, Point::new(0.0, 0.0), BandSel::All, vec![-1.0; 9]).is_err());
    }
}
