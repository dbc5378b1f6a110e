use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Cell, GridGeometry, Point, Traversable};
use crate::scalar::Real;
use crate::{Error, Result};

/// Immutable ground-truth world. Border cells are always occupied.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid<T> {
    geometry: GridGeometry<T>,
    occupied: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct JsonMap {
    resolution: f64,
    rows: Vec<String>,
}

impl<T: Real> OccupancyGrid<T> {
    /// Builds a grid from row-major occupancy flags (row 0 = minimum y).
    pub fn new(geometry: GridGeometry<T>, occupied: Vec<bool>) -> Result<Self> {
        let GridGeometry { width, height, resolution, .. } = geometry;
        if !(resolution > T::zero()) || !resolution.is_finite() {
            return Err(Error::InvalidGrid(format!("resolution must be > 0, got {resolution}")));
        }
        if width < 3 || height < 3 {
            return Err(Error::InvalidGrid(format!("grid must be at least 3x3, got {width}x{height}")));
        }
        if occupied.len() != width * height {
            return Err(Error::InvalidGrid(format!(
                "expected {} cells, got {}",
                width * height,
                occupied.len()
            )));
        }
        let grid = Self { geometry, occupied };
        for row in 0..height {
            for col in 0..width {
                let border = row == 0 || col == 0 || row + 1 == height || col + 1 == width;
                if border && grid.is_free(Cell::new(row, col)) {
                    return Err(Error::InvalidGrid(format!(
                        "border cell (row {row}, col {col}) must be occupied"
                    )));
                }
            }
        }
        if grid.largest_component() < 2 {
            return Err(Error::InvalidGrid(
                "need a connected free region of at least two cells".into(),
            ));
        }
        Ok(grid)
    }

    /// Builds a grid from text rows, northernmost row first, `#` occupied and
    /// `.` free. The origin sits at (0, 0).
    pub fn from_rows<S: AsRef<str>>(resolution: T, rows: &[S]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map(|r| r.as_ref().chars().count()).unwrap_or(0);
        let mut occupied = vec![false; width * height];
        for (k, line) in rows.iter().enumerate() {
            let line = line.as_ref();
            if line.chars().count() != width {
                return Err(Error::MapParse {
                    line: k + 1,
                    msg: format!("expected {width} columns, got {}", line.chars().count()),
                });
            }
            let row = height - 1 - k;
            for (col, ch) in line.chars().enumerate() {
                occupied[row * width + col] = match ch {
                    '#' => true,
                    '.' => false,
                    other => {
                        return Err(Error::MapParse {
                            line: k + 1,
                            msg: format!("unexpected character {other:?}"),
                        })
                    }
                };
            }
        }
        let geometry = GridGeometry {
            width,
            height,
            resolution,
            origin: Point::new(T::zero(), T::zero()),
        };
        Self::new(geometry, occupied)
    }

    /// Parses the ASCII map format: `res <meters>` then one line per row.
    pub fn parse_ascii(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::MapParse {
            line: 1,
            msg: "empty map".into(),
        })?;
        let res = header
            .trim()
            .strip_prefix("res")
            .map(str::trim)
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Error::MapParse {
                line: 1,
                msg: format!("expected `res <meters-per-cell>`, got {header:?}"),
            })?;
        let rows: Vec<&str> = lines.map(|(_, l)| l.trim_end()).collect();
        Self::from_rows(T::lit(res), &rows)
    }

    /// Parses `{ "resolution": f, "rows": [...] }`.
    pub fn parse_json(text: &str) -> Result<Self> {
        let map: JsonMap = serde_json::from_str(text)?;
        Self::from_rows(T::lit(map.resolution), &map.rows)
    }

    /// Loads a map, choosing the parser from the extension (`.json` or ASCII).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::parse_json(&text)
        } else {
            Self::parse_ascii(&text)
        }
    }

    /// Text rows, northernmost first.
    pub fn rows(&self) -> Vec<String> {
        (0..self.height())
            .rev()
            .map(|row| {
                (0..self.width())
                    .map(|col| if self.is_occupied(Cell::new(row, col)) { '#' } else { '.' })
                    .collect()
            })
            .collect()
    }

    pub fn to_ascii(&self) -> String {
        let mut out = format!("res {}\n", self.geometry.resolution);
        for row in self.rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let map = JsonMap {
            resolution: self.geometry.resolution.to_f64_lossy(),
            rows: self.rows(),
        };
        serde_json::to_string(&map).expect("map serialises")
    }

    pub fn geometry(&self) -> &GridGeometry<T> {
        &self.geometry
    }

    pub fn width(&self) -> usize {
        self.geometry.width
    }

    pub fn height(&self) -> usize {
        self.geometry.height
    }

    pub fn resolution(&self) -> T {
        self.geometry.resolution
    }

    pub fn is_occupied(&self, cell: Cell) -> bool {
        self.occupied[self.geometry.index(cell)]
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        !self.is_occupied(cell)
    }

    /// Whether `p` is inside the world and on a free cell.
    pub fn is_free_point(&self, p: Point<T>) -> bool {
        self.geometry.locate(p).is_some_and(|c| self.is_free(c))
    }

    pub fn world_to_cell(&self, p: Point<T>) -> Result<Cell> {
        self.geometry.world_to_cell(p)
    }

    pub fn cell_center(&self, cell: Cell) -> Point<T> {
        self.geometry.cell_center(cell)
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.geometry.len())
            .filter(|&i| !self.occupied[i])
            .map(|i| self.geometry.cell_at(i))
    }

    /// Labels 4-connected free components; occupied cells get `usize::MAX`.
    pub fn components(&self) -> Vec<usize> {
        let g = &self.geometry;
        let mut label = vec![usize::MAX; g.len()];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..g.len() {
            if self.occupied[start] || label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            queue.push_back(g.cell_at(start));
            while let Some(c) = queue.pop_front() {
                for n in g.neighbors4(c) {
                    let i = g.index(n);
                    if !self.occupied[i] && label[i] == usize::MAX {
                        label[i] = next;
                        queue.push_back(n);
                    }
                }
            }
            next += 1;
        }
        label
    }

    fn largest_component(&self) -> usize {
        let labels = self.components();
        let mut sizes = std::collections::HashMap::new();
        for l in labels.into_iter().filter(|&l| l != usize::MAX) {
            *sizes.entry(l).or_insert(0usize) += 1;
        }
        sizes.values().copied().max().unwrap_or(0)
    }
}

impl<T: Real> Traversable<T> for OccupancyGrid<T> {
    fn geometry(&self) -> &GridGeometry<T> {
        &self.geometry
    }

    fn passable(&self, cell: Cell) -> bool {
        self.is_free(cell)
    }
}
