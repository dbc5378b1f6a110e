use serde::{Deserialize, Serialize};

use super::{act_toward, direction_goal, maybe_update_goal, should_stop, AgentConfig, Goal, NavState, Policy, Status};
use crate::acoustics::{AcousticField, AcousticModel, BandSpectrum};
use crate::afp::Predictor;
use crate::eikonal::{descend_step, fmm_solve};
use crate::gridworld::{apply_action, integrate_observation, raycast_depth, Action, ObservedMap, FORWARD_STEP_M, OccupancyGrid, Point, Pose};
use crate::scalar::Real;
use crate::{Error, Result};

/// Start, goal and emitted sound of one navigation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Task<T> {
    pub start: Pose<T>,
    pub goal: Point<T>,
    pub spectrum: BandSpectrum<T>,
    pub seed: u64,
}

/// One line of the trajectory log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// `[x, y, heading_deg]` before the action.
    pub pose: [f64; 3],
    pub action: Action,
    pub goal: Option<[f64; 2]>,
    pub goal_value: Option<f64>,
    /// Predicted peak `[row, col]` in the field.
    pub peak: Option<[usize; 2]>,
    pub peak_value: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EpisodeOutcome<T> {
    pub status: Status,
    pub success: bool,
    pub steps: usize,
    pub path_length: T,
    pub final_pose: Pose<T>,
    pub trajectory: Vec<StepRecord>,
}

impl<T: Real> EpisodeOutcome<T> {
    /// Trajectory as JSON lines.
    pub fn trajectory_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.trajectory {
            out.push_str(&serde_json::to_string(r).expect("record serialises"));
            out.push('\n');
        }
        out
    }
}

fn step_nonce(seed: u64, step: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ step as u64
}

struct Runner<'a, T, M: ?Sized> {
    grid: &'a OccupancyGrid<T>,
    model: &'a M,
    task: &'a Task<T>,
    predictor: &'a Predictor<T>,
    config: &'a AgentConfig<T>,
    state: NavState<T>,
    recenter: bool,
}

impl<T: Real, M: AcousticModel<T> + ?Sized> Runner<'_, T, M> {
    fn predict(&self) -> Result<Option<AcousticField<T>>> {
        let nonce = step_nonce(self.task.seed, self.state.steps_taken);
        match self
            .predictor
            .predict_field(self.model, &self.task.spectrum, self.state.pose.position(), nonce)
        {
            Ok(p) => Ok(Some(p.field)),
            Err(Error::NoSignal) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn decide(&mut self, field: Option<&AcousticField<T>>) -> Action {
        let pos = self.state.pose.position();
        match self.config.policy {
            Policy::FieldPeak => {
                if let Some(f) = field {
                    maybe_update_goal(&mut self.state, f);
                }
                let Some(goal) = self.state.goal else {
                    return Action::TurnLeft;
                };
                let geom = self.grid.geometry();
                let here = geom.locate(pos).expect("pose inside world");
                let arrived = geom.locate(goal.point).is_some_and(|g| g.chebyshev(&here) <= 1);
                if arrived {
                    if field.is_some_and(should_stop) {
                        return Action::Stop;
                    }
                    if let Some(f) = field {
                        let ((row, col), value) = f.peak();
                        self.state.set_goal(f.cell_position(row, col), value);
                    }
                }
            }
            Policy::DirectionFollower => {
                if pos.distance(&self.task.goal) <= self.config.success_radius {
                    return Action::Stop;
                }
                if let Some((p, v)) = field.and_then(|f| direction_goal(&self.state.pose, f)) {
                    self.state.set_goal(p, v);
                }
            }
        }
        match self.state.goal.and_then(|g| self.waypoint(g)) {
            Some(target) if target.distance(&pos) > T::lit(1e-9) => act_toward(&self.state.pose, target),
            _ => Action::TurnLeft,
        }
    }

    /// Next point to drive toward, or `None` if the goal is unreachable on
    /// the observed map.
    fn waypoint(&mut self, goal: Goal<T>) -> Option<Point<T>> {
        let geom = *self.grid.geometry();
        let pos = self.state.pose.position();
        let here = geom.locate(pos)?;
        if self.recenter {
            let c = geom.cell_center(here);
            if c.distance(&pos) > geom.resolution * T::lit(0.1) {
                return Some(c);
            }
            self.recenter = false;
        }
        // the goal cell may have been observed occupied since it was chosen
        self.state.set_goal(goal.point, goal.peak_value);
        let goal = self.state.goal?;
        let target = geom.locate(goal.point)?;
        let field = fmm_solve(&self.state.observed, &[target]).ok()?;
        if !field.is_reachable(here) {
            return None;
        }
        let next = descend_step(&field, here);
        Some(if next == here { goal.point } else { geom.cell_center(next) })
    }

    fn run(mut self) -> Result<EpisodeOutcome<T>> {
        let mut trajectory = Vec::new();
        let mut still = 0;
        while self.state.status == Status::Running {
            if self.state.steps_taken >= self.config.max_steps {
                self.state.status = Status::Timeout;
                break;
            }
            let scan = raycast_depth(self.grid, &self.state.pose, &self.config.sensor);
            integrate_observation(&mut self.state.observed, &self.state.pose, &scan);
            let field = self.predict()?;
            let action = self.decide(field.as_ref());

            let pose = self.state.pose;
            let peak = field.as_ref().map(|f| f.peak());
            trajectory.push(StepRecord {
                step: self.state.steps_taken,
                pose: [pose.x.to_f64_lossy(), pose.y.to_f64_lossy(), pose.heading_degrees().to_f64_lossy()],
                action,
                goal: self.state.goal.map(|g| [g.point.x.to_f64_lossy(), g.point.y.to_f64_lossy()]),
                goal_value: self.state.goal.map(|g| g.peak_value.to_f64_lossy()),
                peak: peak.map(|((r, c), _)| [r, c]),
                peak_value: peak.map(|(_, v)| v.to_f64_lossy()),
            });

            self.state.steps_taken += 1;
            if action == Action::Stop {
                self.state.status = Status::Stopped;
                break;
            }
            let next = apply_action(self.grid, &pose, action);
            if action == Action::MoveForward {
                if next.position() == pose.position() {
                    self.recenter = true;
                } else {
                    self.state.path_length = self.state.path_length + T::lit(FORWARD_STEP_M);
                }
            }
            still = if next.position() == pose.position() { still + 1 } else { 0 };
            self.state.pose = next;
            if still >= self.config.stuck_steps {
                still = 0;
                self.recenter = false;
                if let Some(f) = &field {
                    let ((row, col), value) = f.peak();
                    self.state.set_goal(f.cell_position(row, col), value);
                }
            }
        }
        let final_pose = self.state.pose;
        let success =
            self.state.status == Status::Stopped && final_pose.position().distance(&self.task.goal) <= self.config.success_radius;
        Ok(EpisodeOutcome {
            status: self.state.status,
            success,
            steps: self.state.steps_taken,
            path_length: self.state.path_length,
            final_pose,
            trajectory,
        })
    }
}

/// Runs one episode to STOP or the step cap. Fails before any step if the
/// start or goal is not on a free cell.
pub fn run_episode<T: Real, M: AcousticModel<T> + ?Sized>(
    grid: &OccupancyGrid<T>,
    model: &M,
    task: &Task<T>,
    predictor: &Predictor<T>,
    config: &AgentConfig<T>,
) -> Result<EpisodeOutcome<T>> {
    if !task.start.is_valid(grid) {
        return Err(Error::InvalidArgument("start pose is not on a free cell".into()));
    }
    if !grid.is_free_point(task.goal) {
        return Err(Error::InvalidArgument("goal is not on a free cell".into()));
    }
    let start_cell = grid.world_to_cell(task.start.position())?;
    let runner = Runner {
        grid,
        model,
        task,
        predictor,
        config,
        state: NavState::new(task.start, ObservedMap::new(*grid.geometry(), start_cell)),
        recenter: false,
    };
    runner.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustics::GeodesicScene;
    use crate::afp::{BandErrorPrior, NoiseModel, Strategy};
    use crate::eikonal::fmm_solve;
    use crate::gridworld::Cell;

    fn grid(rows: &[&str]) -> OccupancyGrid<f64> {
        OccupancyGrid::from_rows(0.5, rows).unwrap()
    }

    fn corridor() -> OccupancyGrid<f64> {
        let wall = "#".repeat(25);
        let open = format!("#{}#", ".".repeat(23));
        grid(&[&wall, &open, &open, &open, &wall])
    }

    fn l_shape() -> OccupancyGrid<f64> {
        let mut rows = vec!["#".repeat(24)];
        for _ in 0..14 {
            rows.push(format!("#...{}", "#".repeat(20)));
        }
        for _ in 0..3 {
            rows.push(format!("#{}#", ".".repeat(22)));
        }
        rows.push("#".repeat(24));
        OccupancyGrid::from_rows(0.5, &rows).unwrap()
    }

    fn task(start: Pose<f64>, goal: Point<f64>) -> Task<f64> {
        Task {
            start,
            goal,
            spectrum: BandSpectrum::flat(5),
            seed: 3,
        }
    }

    fn oracle_run(g: &OccupancyGrid<f64>, t: &Task<f64>) -> EpisodeOutcome<f64> {
        let scene = GeodesicScene::with_default_bands(g, t.goal).unwrap();
        run_episode(g, &scene, t, &Predictor::oracle(5), &AgentConfig::default()).unwrap()
    }

    #[test]
    fn start_near_goal_stops_quickly() {
        let g = corridor();
        let out = oracle_run(&g, &task(Pose::new(5.0, 1.0, 3.0), Point::new(5.5, 1.0)));
        assert!(out.success, "{:?}", out.status);
        assert!(out.steps <= 24, "{}", out.steps);
    }

    #[test]
    fn open_corridor_is_near_optimal() {
        let g = corridor();
        let t = task(Pose::new(1.0, 1.0, 0.0), Point::new(11.0, 1.0));
        let out = oracle_run(&g, &t);
        let l = fmm_solve(&g, &[g.world_to_cell(t.goal).unwrap()]).unwrap().value(Cell::new(2, 2));
        assert!(out.success);
        assert!(out.path_length <= 1.1 * l, "{} vs {l}", out.path_length);
    }

    #[test]
    fn sealed_goal_times_out() {
        let g = grid(&["##########", "#....#...#", "#....#...#", "##########"]);
        let out = oracle_run(&g, &task(Pose::new(1.0, 1.0, 0.0), Point::new(3.5, 1.0)));
        assert_eq!(out.status, Status::Timeout);
        assert!(!out.success);
        assert_eq!(out.steps, 500);
    }

    #[test]
    fn invalid_start_is_rejected() {
        let g = corridor();
        let scene = GeodesicScene::with_default_bands(&g, Point::new(5.0, 1.0)).unwrap();
        let t = task(Pose::new(0.0, 0.0, 0.0), Point::new(5.0, 1.0));
        assert!(run_episode(&g, &scene, &t, &Predictor::oracle(5), &AgentConfig::default()).is_err());
    }

    #[test]
    fn oracle_goal_values_increase_and_poses_stay_free() {
        let g = l_shape();
        let t = task(Pose::new(1.0, 7.0, 0.0), Point::new(10.0, 1.0));
        let out = oracle_run(&g, &t);
        assert!(out.success);
        let mut values: Vec<f64> = out.trajectory.iter().filter_map(|r| r.goal_value).collect();
        values.dedup();
        for r in &out.trajectory {
            assert!(g.is_free_point(Point::new(r.pose[0], r.pose[1])));
        }
        assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
        let replay = oracle_run(&g, &t);
        assert_eq!(replay.trajectory_jsonl(), out.trajectory_jsonl());
    }

    #[test]
    fn direction_follower_is_not_faster_in_l_corridor() {
        let g = l_shape();
        let goal = Point::new(10.0, 1.0);
        let scene = GeodesicScene::with_default_bands(&g, goal).unwrap();
        let predictor = Predictor {
            strategy: Strategy::FreqAdaptive,
            noise: NoiseModel::new(vec![0.8, 0.4, 0.2, 0.1, 0.3], vec![0.1; 5], 0).unwrap(),
            prior: BandErrorPrior::new(vec![1.2, 0.72, 0.41, 0.27, 0.65], 5.0, 0.8).unwrap(),
            field: Default::default(),
        };
        let df_config = AgentConfig {
            policy: Policy::DirectionFollower,
            ..AgentConfig::default()
        };
        for seed in 0..4 {
            let t = Task { seed, ..task(Pose::new(1.0, 7.0, 0.0), goal) };
            let afp = run_episode(&g, &scene, &t, &predictor, &AgentConfig::default()).unwrap();
            let df = run_episode(&g, &scene, &t, &predictor, &df_config).unwrap();
            assert!(afp.success);
            assert!(df.steps >= afp.steps, "seed {seed}: df {} afp {}", df.steps, afp.steps);
        }
    }
}
