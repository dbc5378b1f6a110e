use serde::{Deserialize, Serialize};

use super::sensing::ray_chain;
use super::{OccupancyGrid, Point};
use crate::scalar::{normalize_heading, Real};

/// Forward translation per MOVE_FORWARD, meters.
pub const FORWARD_STEP_M: f64 = 0.25;
/// Rotation per TURN_LEFT / TURN_RIGHT, degrees.
pub const TURN_STEP_DEG: f64 = 15.0;

const TURNS_PER_REV: i64 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Action {
    MoveForward,
    TurnLeft,
    TurnRight,
    Stop,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::MoveForward, Action::TurnLeft, Action::TurnRight, Action::Stop];

    pub fn name(&self) -> &'static str {
        match self {
            Action::MoveForward => "MOVE_FORWARD",
            Action::TurnLeft => "TURN_LEFT",
            Action::TurnRight => "TURN_RIGHT",
            Action::Stop => "STOP",
        }
    }
}

/// Agent position (meters) and heading (radians in `[0, 2pi)`, counter-clockwise from +x).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose<T> {
    pub x: T,
    pub y: T,
    pub heading: T,
}

impl<T: Real> Pose<T> {
    /// Headings within rounding distance of the 15 degree lattice are snapped
    /// onto it, so turning is exact.
    pub fn new(x: T, y: T, heading: T) -> Self {
        let mut pose = Self {
            x,
            y,
            heading: normalize_heading(heading),
        };
        if let Some(k) = pose.lattice_index() {
            pose.heading = T::from_i64(k).expect("small integer") * T::lit(TURN_STEP_DEG).to_radians();
        }
        pose
    }

    pub fn from_degrees(x: T, y: T, heading_deg: T) -> Self {
        Self::new(x, y, heading_deg.to_radians())
    }

    /// Heading in degrees, exact on the 15 degree lattice.
    pub fn heading_degrees(&self) -> T {
        match self.lattice_index() {
            Some(k) => T::from_i64(k).expect("small integer") * T::lit(TURN_STEP_DEG),
            None => self.heading.to_degrees(),
        }
    }

    pub fn position(&self) -> Point<T> {
        Point::new(self.x, self.y)
    }

    pub fn is_valid(&self, grid: &OccupancyGrid<T>) -> bool {
        grid.is_free_point(self.position())
    }

    /// Index of the heading on the 15 degree lattice, if it sits on it.
    fn lattice_index(&self) -> Option<i64> {
        let step = T::lit(TURN_STEP_DEG).to_radians();
        let k = self.heading / step;
        let kr = k.round();
        ((k - kr).abs() < T::lit(1e-4)).then(|| kr.to_i64().unwrap_or(0).rem_euclid(TURNS_PER_REV))
    }

    fn turned(&self, steps: i64) -> T {
        let step = T::lit(TURN_STEP_DEG).to_radians();
        match self.lattice_index() {
            Some(k) => {
                let m = (k + steps).rem_euclid(TURNS_PER_REV);
                T::from_i64(m).expect("small integer") * step
            }
            None => normalize_heading(self.heading + T::from_i64(steps).expect("small integer") * step),
        }
    }

    /// Unit heading vector; exact on the four axis directions.
    pub fn direction(&self) -> (T, T) {
        match self.lattice_index() {
            Some(0) => (T::one(), T::zero()),
            Some(6) => (T::zero(), T::one()),
            Some(12) => (-T::one(), T::zero()),
            Some(18) => (T::zero(), -T::one()),
            _ => (self.heading.cos(), self.heading.sin()),
        }
    }
}

/// Whether the straight segment `a -> b` and its endpoint touch only free cells.
pub fn segment_clear<T: Real>(grid: &OccupancyGrid<T>, a: Point<T>, b: Point<T>) -> bool {
    if !grid.is_free_point(a) || !grid.is_free_point(b) {
        return false;
    }
    let len = a.distance(&b);
    if len == T::zero() {
        return true;
    }
    let dir = ((b.x - a.x) / len, (b.y - a.y) / len);
    let mut clear = true;
    ray_chain(grid.geometry(), a, dir, len, |cell, _| {
        if grid.is_occupied(cell) {
            clear = false;
        }
        clear
    });
    clear
}

/// Applies one discrete action. Blocked forward motion leaves the pose unchanged.
pub fn apply_action<T: Real>(grid: &OccupancyGrid<T>, pose: &Pose<T>, action: Action) -> Pose<T> {
    match action {
        Action::TurnLeft => Pose {
            heading: pose.turned(1),
            ..*pose
        },
        Action::TurnRight => Pose {
            heading: pose.turned(-1),
            ..*pose
        },
        Action::Stop => *pose,
        Action::MoveForward => {
            let (dx, dy) = pose.direction();
            let step = T::lit(FORWARD_STEP_M);
            let dest = Point::new(pose.x + step * dx, pose.y + step * dy);
            if segment_clear(grid, pose.position(), dest) {
                Pose {
                    x: dest.x,
                    y: dest.y,
                    heading: pose.heading,
                }
            } else {
                *pose
            }
        }
    }
}
