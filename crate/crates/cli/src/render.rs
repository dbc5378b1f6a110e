//! Text and image diagnostics built from logged data.

use audiogoal::agent::StepRecord;
use audiogoal::gridworld::{OccupancyGrid, Point};

/// Map rows (north first) with the trajectory drawn over free cells: `*` for
/// visited cells, `S` the first pose, `E` the last pose and `G` the goal.
pub fn ascii_overlay(grid: &OccupancyGrid<f64>, trajectory: &[StepRecord], goal: Option<Point<f64>>) -> String {
    let mut rows: Vec<Vec<char>> = grid.rows().iter().map(|r| r.chars().collect()).collect();
    let h = grid.height();
    let mut mark = |p: Point<f64>, ch: char| {
        if let Some(c) = grid.geometry().locate(p) {
            rows[h - 1 - c.row][c.col] = ch;
        }
    };
    for r in trajectory {
        mark(Point::new(r.pose[0], r.pose[1]), '*');
    }
    if let (Some(first), Some(last)) = (trajectory.first(), trajectory.last()) {
        mark(Point::new(first.pose[0], first.pose[1]), 'S');
        mark(Point::new(last.pose[0], last.pose[1]), 'E');
    }
    if let Some(g) = goal {
        mark(g, 'G');
    }
    let mut out = String::new();
    for r in rows {
        out.extend(r);
        out.push('\n');
    }
    out
}

/// Binary PGM of a square row-major field (row 0 south), each cell drawn as
/// a `scale x scale` block. Values map linearly from 0 to the field maximum
/// onto 0..255; negative values clamp to 0.
pub fn field_pgm(values: &[f64], scale: usize) -> Result<Vec<u8>, String> {
    let side = (values.len() as f64).sqrt().round() as usize;
    if side == 0 || side * side != values.len() {
        return Err(format!("{} values do not form a square field", values.len()));
    }
    if scale == 0 {
        return Err("scale must be >= 1".into());
    }
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let px = side * scale;
    let mut out = format!("P5\n{px} {px}\n255\n").into_bytes();
    for y in 0..px {
        let row = side - 1 - y / scale;
        for x in 0..px {
            let v = values[row * side + x / scale];
            let level = if max > 0.0 { (v.max(0.0) / max * 255.0).round() } else { 0.0 };
            out.push(level as u8);
        }
    }
    Ok(out)
}
