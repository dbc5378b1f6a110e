//! Hierarchical navigation: long-term goals from predicted field peaks, FMM
//! planning over the observed map, discrete actions toward short-term goals.

mod run;

pub use run::{run_episode, EpisodeOutcome, StepRecord, Task};

use serde::{Deserialize, Serialize};

use crate::acoustics::AcousticField;
use crate::eikonal::nearest_navigable;
use crate::gridworld::{Action, Cell, ObservedMap, Point, Pose, SensorConfig, TURN_STEP_DEG};
use crate::scalar::{wrap_angle, Real};

pub const MAX_STEPS: usize = 500;
pub const SUCCESS_RADIUS_M: f64 = 1.0;
pub const STUCK_STEPS: usize = 20;
/// Distance of the direction follower's goal from the agent.
pub const DIRECTION_GOAL_M: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Running,
    Stopped,
    Timeout,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Running => "RUNNING",
            Status::Stopped => "STOPPED",
            Status::Timeout => "TIMEOUT",
        }
    }
}

/// How long-term goals are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    /// Go to the predicted peak; stop when the peak sits at the field center.
    FieldPeak,
    /// Walk a fixed distance toward the predicted peak direction; stopped
    /// automatically near the true goal.
    DirectionFollower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig<T> {
    pub max_steps: usize,
    pub success_radius: T,
    pub stuck_steps: usize,
    pub sensor: SensorConfig<T>,
    pub policy: Policy,
}

impl<T: Real> Default for AgentConfig<T> {
    fn default() -> Self {
        Self {
            max_steps: MAX_STEPS,
            success_radius: T::lit(SUCCESS_RADIUS_M),
            stuck_steps: STUCK_STEPS,
            sensor: SensorConfig::default(),
            policy: Policy::FieldPeak,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Goal<T> {
    pub point: Point<T>,
    pub peak_value: T,
}

#[derive(Debug, Clone)]
pub struct NavState<T> {
    pub pose: Pose<T>,
    pub observed: ObservedMap<T>,
    pub goal: Option<Goal<T>>,
    pub steps_taken: usize,
    pub path_length: T,
    pub status: Status,
}

impl<T: Real> NavState<T> {
    pub fn new(pose: Pose<T>, observed: ObservedMap<T>) -> Self {
        Self {
            pose,
            observed,
            goal: None,
            steps_taken: 0,
            path_length: T::zero(),
            status: Status::Running,
        }
    }

    /// Moves `target` onto the map and onto a cell the agent believes navigable.
    fn snap(&self, target: Point<T>) -> Point<T> {
        let g = self.observed.geometry();
        let to_index = |v: T, o: T, n: usize| {
            let k = ((v - o) / g.resolution).round();
            k.max(T::zero()).min(T::from_usize_lossy(n - 1)).to_usize().unwrap_or(0)
        };
        let cell = Cell::new(to_index(target.y, g.origin.y, g.height), to_index(target.x, g.origin.x, g.width));
        match nearest_navigable(&self.observed, cell) {
            Ok(c) if c == cell && g.locate(target) == Some(cell) => target,
            Ok(c) => g.cell_center(c),
            Err(_) => target,
        }
    }

    /// Sets the goal to `point` with `value` regardless of the current goal.
    pub fn set_goal(&mut self, point: Point<T>, value: T) {
        if value > T::zero() {
            self.goal = Some(Goal {
                point: self.snap(point),
                peak_value: value,
            });
        }
    }
}

/// Accepts the field peak as the long-term goal when there is no goal yet or
/// when it is strictly louder than the current one. Returns whether the goal
/// changed.
pub fn maybe_update_goal<T: Real>(state: &mut NavState<T>, field: &AcousticField<T>) -> bool {
    let ((row, col), value) = field.peak();
    if !(value > T::zero()) {
        return false;
    }
    if state.goal.is_some_and(|g| !(value > g.peak_value)) {
        return false;
    }
    state.set_goal(field.cell_position(row, col), value);
    true
}

/// True iff the field peak is exactly the center cell.
pub fn should_stop<T: Real>(field: &AcousticField<T>) -> bool {
    field.peak().0 == field.center_index()
}

/// Turn toward `target` until within half a turn increment, then go forward.
/// An exactly opposite target turns left.
pub fn act_toward<T: Real>(pose: &Pose<T>, target: Point<T>) -> Action {
    let bearing = pose.position().bearing_to(&target);
    let diff = wrap_angle(bearing - pose.heading);
    let half = T::lit(TURN_STEP_DEG / 2.0).to_radians() + T::lit(1e-9);
    if diff.abs() <= half {
        Action::MoveForward
    } else if diff > T::zero() {
        Action::TurnLeft
    } else {
        Action::TurnRight
    }
}

/// Direction-follower goal: `DIRECTION_GOAL_M` from the agent toward the
/// field peak. `None` when the peak is the center cell.
pub fn direction_goal<T: Real>(pose: &Pose<T>, field: &AcousticField<T>) -> Option<(Point<T>, T)> {
    let ((row, col), value) = field.peak();
    if (row, col) == field.center_index() || !(value > T::zero()) {
        return None;
    }
    let (dx, dy) = field.cell_offset(row, col);
    let n = dx.hypot(dy);
    let reach = T::lit(DIRECTION_GOAL_M);
    Some((Point::new(pose.x + dx / n * reach, pose.y + dy / n * reach), value))
}
