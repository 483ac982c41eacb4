//! Conflict-based search over discontinuity-bounded single-robot plans, with
//! a shrinking discontinuity bound and growing primitive sets across outer
//! iterations. Conflict-free nodes are repaired by the trajectory optimizer.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::path::PathBuf;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, info};

use crate::dbastar::{plan, Constraint, DbSolution, EuclideanHeuristic, PlanError, SearchParams, SingleRobotProblem};
use crate::dynamics::{Bounds, MetricWeights, RobotState, RobotType};
use crate::geometry::{footprint_distance, place, RobotBody};
use crate::primitives::{MotionPrimitive, PrimitiveError, PrimitiveGenerator, PrimitiveSet};
use crate::scalar::Scalar;
use crate::scenario_io::ProblemInstance;
use crate::trajopt::{optimize, JointGuess, OptWeights, OptimizedSolution};

/// Two robots in collision at one timestep.
#[derive(Clone, Debug, PartialEq)]
pub struct Conflict<T> {
    pub i: usize,
    pub j: usize,
    pub xi: RobotState<T>,
    pub xj: RobotState<T>,
    pub time: usize,
}

/// Node of the constraint tree.
#[derive(Clone, Debug, PartialEq)]
pub struct HighLevelNode<T> {
    pub solutions: Vec<DbSolution<T>>,
    pub constraints: Vec<Constraint<T>>,
    /// Sum of arrival times in seconds.
    pub cost: T,
}

impl<T: Scalar> HighLevelNode<T> {
    fn new(solutions: Vec<DbSolution<T>>, constraints: Vec<Constraint<T>>, dt: T) -> Self {
        let cost = solutions
            .iter()
            .fold(T::zero(), |a, s| a + T::count(s.horizon()) * dt);
        Self {
            solutions,
            constraints,
            cost,
        }
    }

    pub fn constraints_for(&self, robot: usize) -> Vec<Constraint<T>> {
        self.constraints
            .iter()
            .filter(|c| c.robot == robot)
            .cloned()
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub delta0: f64,
    pub delta_rate: f64,
    pub alpha: f64,
    /// Primitives per robot type in the first iteration.
    pub primitives0: usize,
    /// Factor by which the primitive count grows per iteration.
    pub primitive_growth: usize,
    /// Inclusive range of primitive lengths in timesteps.
    pub primitive_steps: [usize; 2],
    /// Pre-generated primitive files; types without one are generated on the fly.
    pub primitive_files: BTreeMap<RobotType, PathBuf>,
    pub dt: f64,
    /// Seconds.
    pub time_limit: f64,
    pub max_iterations: Option<usize>,
    /// High-level expansions per iteration.
    pub max_expansions: usize,
    /// Collision margin for conflict detection.
    pub margin: f64,
    pub seed: u64,
    /// Return after the first emitted solution.
    pub stop_after_first: bool,
    /// Keep expanding the constraint tree after a successful optimization
    /// instead of moving on to the next iteration.
    pub continue_after_success: bool,
    pub optimizer: OptWeights<f64>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            delta0: 0.5,
            delta_rate: 0.9,
            alpha: 0.5,
            primitives0: 100,
            primitive_growth: 2,
            primitive_steps: [5, 15],
            primitive_files: BTreeMap::new(),
            dt: 0.1,
            time_limit: 60.0,
            max_iterations: None,
            max_expansions: 10_000,
            margin: 0.0,
            seed: 0,
            stop_after_first: false,
            continue_after_success: false,
            optimizer: OptWeights::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid planner configuration: {0}")]
    Invalid(String),
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if !(self.delta0 > 0.0) {
            return bad("delta0 must be positive");
        }
        if !(self.delta_rate > 0.0 && self.delta_rate < 1.0) {
            return bad("delta_rate must lie in (0, 1)");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if self.primitives0 == 0 || self.primitive_growth == 0 {
            return bad("primitive counts must be positive");
        }
        if self.primitive_steps[0] == 0 || self.primitive_steps[0] > self.primitive_steps[1] {
            return bad("primitive_steps must be a nonempty range of positive lengths");
        }
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.time_limit >= 0.0) {
            return bad("time_limit must be nonnegative");
        }
        if !(self.margin >= 0.0) {
            return bad("margin must be nonnegative");
        }
        if !(self.optimizer.penalty_multiplier > 1.0 && self.optimizer.beta >= 0.0) {
            return bad("optimizer needs beta >= 0 and penalty_multiplier > 1");
        }
        Ok(())
    }

    /// Primitives per type used in iteration `n` (1-based).
    pub fn primitive_count(&self, n: usize) -> usize {
        let factor = self.primitive_growth.saturating_pow((n - 1) as u32);
        self.primitives0.saturating_mul(factor)
    }
}

/// Discontinuity bound of iteration `n` (1-based).
pub fn compute_delta(config: &PlannerConfig, n: usize) -> f64 {
    assert!(n >= 1, "iterations are numbered from 1");
    config.delta0 * config.delta_rate.powi((n - 1) as i32)
}

/// Placed state of robot `i` at timestep `k`, with the final state held.
fn footprint_at<T: Scalar>(
    body: &RobotBody<T>,
    s: &DbSolution<T>,
    k: usize,
) -> crate::geometry::Footprint<T> {
    place(body.robot_type, &body.shape, s.state_at(k).as_slice())
}

/// First collision in time order (then by robot pair), with robots parked at
/// their final states after their horizon.
pub fn get_earliest_conflict<T: Scalar>(
    solutions: &[DbSolution<T>],
    bodies: &[RobotBody<T>],
    margin: T,
) -> Option<Conflict<T>> {
    assert_eq!(solutions.len(), bodies.len());
    let horizon = solutions.iter().map(|s| s.horizon()).max().unwrap_or(0);
    let radii: Vec<T> = bodies
        .iter()
        .map(|b| {
            let r = b.shape.bounding_radius();
            match b.robot_type {
                // trailer center sits behind the car
                RobotType::CarWithTrailer => r + T::lit(crate::dynamics::TRAILER_HITCH),
                _ => r,
            }
        })
        .collect();
    for k in 0..=horizon {
        let prints: Vec<_> = bodies
            .iter()
            .zip(solutions)
            .map(|(b, s)| footprint_at(b, s, k))
            .collect();
        for i in 0..prints.len() {
            for j in i + 1..prints.len() {
                let (pi, pj) = (solutions[i].state_at(k), solutions[j].state_at(k));
                let gap = (pi.0[0] - pj.0[0]).hypot(pi.0[1] - pj.0[1]) - radii[i] - radii[j];
                if gap >= margin {
                    continue;
                }
                if footprint_distance(&prints[i], &prints[j]) < margin {
                    return Some(Conflict {
                        i,
                        j,
                        xi: pi.clone(),
                        xj: pj.clone(),
                        time: k,
                    });
                }
            }
        }
    }
    None
}

/// Shared inputs of the single-robot searches within one iteration.
pub struct LowLevel<'a, T> {
    pub instance: &'a ProblemInstance<T>,
    /// Primitive set of each robot.
    pub primitives: Vec<&'a PrimitiveSet<T>>,
    pub delta: T,
    pub alpha: T,
    pub deadline: Option<Instant>,
}

impl<T: Scalar> LowLevel<'_, T> {
    pub fn dt(&self) -> T {
        self.primitives[0].dt()
    }

    pub fn plan_robot(&self, i: usize, constraints: &[Constraint<T>]) -> Result<DbSolution<T>, PlanError> {
        let r = &self.instance.robots[i];
        let problem = SingleRobotProblem {
            robot_type: r.robot_type,
            shape: r.shape,
            bounds: &r.bounds,
            start: &r.start,
            goal: &r.goal,
            workspace: &self.instance.workspace,
            primitives: self.primitives[i],
            constraints,
        };
        let mut params = SearchParams::new(self.delta, self.alpha);
        params.deadline = self.deadline;
        let h = EuclideanHeuristic::new(r.robot_type, &r.bounds, &r.goal);
        plan(&problem, &params, &h).map(|o| o.solution)
    }

    /// Unconstrained plan for every robot.
    pub fn root(&self) -> Result<HighLevelNode<T>, (usize, PlanError)> {
        let mut sols = Vec::with_capacity(self.instance.robots.len());
        for i in 0..self.instance.robots.len() {
            sols.push(self.plan_robot(i, &[]).map_err(|e| (i, e))?);
        }
        Ok(HighLevelNode::new(sols, Vec::new(), self.dt()))
    }

    /// Children of `node` resolving `conflict`; infeasible children are
    /// dropped and counted in `dropped`.
    pub fn branch(
        &self,
        node: &HighLevelNode<T>,
        conflict: &Conflict<T>,
        dropped: &mut usize,
    ) -> Result<Vec<HighLevelNode<T>>, PlanError> {
        let mut out = Vec::with_capacity(2);
        for (c, x) in [(conflict.i, &conflict.xi), (conflict.j, &conflict.xj)] {
            let mut constraints = node.constraints.clone();
            constraints.push(Constraint {
                robot: c,
                state: x.clone(),
                time: conflict.time,
            });
            let own: Vec<_> = constraints.iter().filter(|k| k.robot == c).cloned().collect();
            match self.plan_robot(c, &own) {
                Ok(sol) => {
                    let mut sols = node.solutions.clone();
                    sols[c] = sol;
                    out.push(HighLevelNode::new(sols, constraints, self.dt()));
                }
                Err(PlanError::Infeasible { .. }) | Err(PlanError::ExpansionLimit(_)) => *dropped += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }
}

struct Queued<T> {
    node: HighLevelNode<T>,
    seq: usize,
}

impl<T: Scalar> PartialEq for Queued<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Queued<T> {}

impl<T: Scalar> PartialOrd for Queued<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Queued<T> {
    // max-heap: lower cost, then fewer constraints, then older
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .node
            .cost
            .partial_cmp(&self.node.cost)
            .unwrap_or(Ordering::Equal)
            .then(other.node.constraints.len().cmp(&self.node.constraints.len()))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Counters of one constraint-tree search.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TreeStats {
    pub expansions: usize,
    pub conflicts: usize,
    pub dropped_children: usize,
    pub conflict_free_nodes: usize,
}

/// What the tree search does after a conflict-free node was handled.
pub enum Next {
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeEnd {
    Exhausted,
    ExpansionLimit,
    Stopped,
    RootInfeasible(usize),
    TimeLimit,
}

/// Best-first search of the constraint tree. `on_solution` receives every
/// conflict-free node in pop order. A constrained replan can come out cheaper
/// than its parent (the low level merges states), so pops are not globally
/// sorted by cost.
pub fn search_tree<T: Scalar>(
    low: &LowLevel<'_, T>,
    margin: T,
    max_expansions: usize,
    stats: &mut TreeStats,
    mut on_solution: impl FnMut(&HighLevelNode<T>) -> Next,
) -> TreeEnd {
    let bodies: Vec<_> = low.instance.robots.iter().map(|r| r.body()).collect();
    let root = match low.root() {
        Ok(r) => r,
        Err((_, PlanError::TimeLimit { .. })) => return TreeEnd::TimeLimit,
        Err((i, _)) => return TreeEnd::RootInfeasible(i),
    };
    let mut open = BinaryHeap::new();
    let mut seq = 0;
    open.push(Queued { node: root, seq });
    while let Some(Queued { node, .. }) = open.pop() {
        if stats.expansions >= max_expansions {
            return TreeEnd::ExpansionLimit;
        }
        stats.expansions += 1;
        if low.deadline.map_or(false, |d| Instant::now() >= d) {
            return TreeEnd::TimeLimit;
        }
        match get_earliest_conflict(&node.solutions, &bodies, margin) {
            None => {
                stats.conflict_free_nodes += 1;
                if let Next::Stop = on_solution(&node) {
                    return TreeEnd::Stopped;
                }
            }
            Some(conflict) => {
                stats.conflicts += 1;
                match low.branch(&node, &conflict, &mut stats.dropped_children) {
                    Ok(children) => {
                        for child in children {
                            seq += 1;
                            open.push(Queued { node: child, seq });
                        }
                    }
                    Err(PlanError::TimeLimit { .. }) => return TreeEnd::TimeLimit,
                    Err(_) => stats.dropped_children += 1,
                }
            }
        }
    }
    TreeEnd::Exhausted
}

/// A solution reported by [`solve`].
#[derive(Clone, Debug, PartialEq)]
pub struct Emission<T> {
    pub solution: OptimizedSolution<T>,
    /// Sum of arrival times of the optimized trajectories.
    pub cost: T,
    /// Cost of the discontinuous guess it was repaired from.
    pub guess_cost: T,
    pub iteration: usize,
    pub delta: T,
    /// Seconds since the start of `solve`.
    pub wall_time: f64,
}

/// Diagnostics of one outer iteration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub delta: f64,
    pub primitives: usize,
    pub tree: TreeStats,
    pub optimizer_calls: usize,
    pub optimizer_failures: usize,
    pub emitted: usize,
    pub end: String,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Termination {
    TimeLimit,
    StopAfterFirst,
    MaxIterations,
    Cancelled,
}

#[derive(Clone, Debug)]
pub struct SolveReport<T> {
    pub emissions: Vec<Emission<T>>,
    pub iterations: Vec<IterationStats>,
    pub termination: Termination,
    pub elapsed: f64,
}

impl<T> SolveReport<T> {
    pub fn best(&self) -> Option<&Emission<T>> {
        self.emissions.last()
    }

    pub fn expansions(&self) -> usize {
        self.iterations.iter().map(|s| s.tree.expansions).sum()
    }
}

#[derive(Debug, Error)]
pub enum SolveError<T: std::fmt::Debug> {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error(transparent)]
    Primitives(#[from] PrimitiveError),
    #[error("no solution found within {:.1} s over {} iterations", .0.elapsed, .0.iterations.len())]
    NoSolution(Box<SolveReport<T>>),
}

/// Primitive source of one robot type: a fixed pool from file or a generator.
enum Source<T> {
    Pool(Vec<MotionPrimitive<T>>),
    Generator(PrimitiveGenerator<T>),
}

struct TypePrimitives<T> {
    set: PrimitiveSet<T>,
    source: Source<T>,
}

impl<T: Scalar> TypePrimitives<T> {
    fn new(rt: RobotType, config: &PlannerConfig) -> Result<Self, PrimitiveError> {
        let dt = T::lit(config.dt);
        let bounds = Bounds::default_for(rt);
        let weights = MetricWeights::default_for(rt);
        let source = match config.primitive_files.get(&rt) {
            Some(path) => {
                let loaded: PrimitiveSet<T> = PrimitiveSet::load(path, rt, &bounds, weights.clone())?;
                if (loaded.dt() - dt).abs() > T::lit(1e-12) {
                    return Err(PrimitiveError::InvalidRequest(format!(
                        "{} has dt {} but the planner uses {}",
                        path.display(),
                        loaded.dt(),
                        dt
                    )));
                }
                let mut pool = loaded.primitives().to_vec();
                pool.reverse();
                Source::Pool(pool)
            }
            None => {
                // each type gets its own stream so adding robots of another type changes nothing
                let seed = config.seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(rt as u64 + 1));
                let range = (config.primitive_steps[0], config.primitive_steps[1]);
                Source::Generator(PrimitiveGenerator::new(rt, bounds, dt, range, seed)?)
            }
        };
        Ok(Self {
            set: PrimitiveSet::new(rt, dt, weights, Vec::new()),
            source,
        })
    }

    fn grow_to(&mut self, count: usize) -> Result<(), PrimitiveError> {
        let missing = count.saturating_sub(self.set.len());
        if missing == 0 {
            return Ok(());
        }
        match &mut self.source {
            Source::Pool(pool) => {
                let take = missing.min(pool.len());
                let batch: Vec<_> = (0..take).filter_map(|_| pool.pop()).collect();
                self.set.extend(batch);
            }
            Source::Generator(g) => self.set.extend(g.generate(missing)?),
        }
        Ok(())
    }
}

/// Anytime multi-robot planning. `on_emit` sees every emission as it is
/// produced and may return `false` to stop early.
pub fn solve<T: Scalar>(
    instance: &ProblemInstance<T>,
    config: &PlannerConfig,
    mut on_emit: impl FnMut(&Emission<T>) -> bool,
) -> Result<SolveReport<T>, SolveError<T>> {
    config.validate()?;
    instance.validate().map_err(|e| SolveError::Instance(e.to_string()))?;
    let started = Instant::now();
    let deadline = started + Duration::from_secs_f64(config.time_limit);
    let weights: OptWeights<T> = config.optimizer.cast();
    let dt = T::lit(config.dt);
    let margin = T::lit(config.margin);

    let mut types: BTreeMap<RobotType, TypePrimitives<T>> = BTreeMap::new();
    for r in &instance.robots {
        if !types.contains_key(&r.robot_type) {
            types.insert(r.robot_type, TypePrimitives::new(r.robot_type, config)?);
        }
    }

    let mut report = SolveReport {
        emissions: Vec::new(),
        iterations: Vec::new(),
        termination: Termination::TimeLimit,
        elapsed: 0.0,
    };
    let mut best_cost = T::infinity();
    let mut n = 0;
    'outer: loop {
        n += 1;
        if config.max_iterations.map_or(false, |m| n > m) {
            report.termination = Termination::MaxIterations;
            break;
        }
        if Instant::now() >= deadline {
            break;
        }
        let iter_start = Instant::now();
        let count = config.primitive_count(n);
        for t in types.values_mut() {
            t.grow_to(count)?;
        }
        let delta = compute_delta(config, n);
        let low = LowLevel {
            instance,
            primitives: instance
                .robots
                .iter()
                .map(|r| &types[&r.robot_type].set)
                .collect(),
            delta: T::lit(delta),
            alpha: T::lit(config.alpha),
            deadline: Some(deadline),
        };
        let mut stats = IterationStats {
            iteration: n,
            delta,
            primitives: types.values().map(|t| t.set.len()).sum(),
            tree: TreeStats::default(),
            optimizer_calls: 0,
            optimizer_failures: 0,
            emitted: 0,
            end: String::new(),
            seconds: 0.0,
        };
        info!(iteration = n, delta, primitives = stats.primitives, "iteration start");
        let mut stop = None;
        let mut tree = TreeStats::default();
        let end = search_tree(&low, margin, config.max_expansions, &mut tree, |node| {
            if Instant::now() >= deadline {
                return Next::Stop;
            }
            stats.optimizer_calls += 1;
            let guess = JointGuess::from_db(&node.solutions, dt);
            match optimize(&guess, instance, &weights) {
                Ok(solution) => {
                    let cost = solution.cost();
                    debug!(guess = node.cost.as_f64(), cost = cost.as_f64(), "optimizer succeeded");
                    if cost < best_cost {
                        best_cost = cost;
                        let emission = Emission {
                            solution,
                            cost,
                            guess_cost: node.cost,
                            iteration: n,
                            delta: T::lit(delta),
                            wall_time: started.elapsed().as_secs_f64(),
                        };
                        info!(
                            iteration = n,
                            cost = cost.as_f64(),
                            t = emission.wall_time,
                            "solution emitted"
                        );
                        stats.emitted += 1;
                        let keep_going = on_emit(&emission);
                        report.emissions.push(emission);
                        if !keep_going {
                            stop = Some(Termination::Cancelled);
                            return Next::Stop;
                        }
                        if config.stop_after_first {
                            stop = Some(Termination::StopAfterFirst);
                            return Next::Stop;
                        }
                    }
                    if config.continue_after_success {
                        Next::Continue
                    } else {
                        Next::Stop
                    }
                }
                Err(e) => {
                    stats.optimizer_failures += 1;
                    debug!(error = %e, "optimizer failed");
                    Next::Continue
                }
            }
        });
        stats.tree = tree;
        stats.end = format!("{end:?}");
        stats.seconds = iter_start.elapsed().as_secs_f64();
        info!(
            iteration = n,
            expansions = stats.tree.expansions,
            conflicts = stats.tree.conflicts,
            dropped = stats.tree.dropped_children,
            optimizer_calls = stats.optimizer_calls,
            optimizer_failures = stats.optimizer_failures,
            end = %stats.end,
            "iteration done"
        );
        report.iterations.push(stats);
        if let Some(t) = stop {
            report.termination = t;
            break 'outer;
        }
        if end == TreeEnd::TimeLimit {
            break;
        }
    }
    report.elapsed = started.elapsed().as_secs_f64();
    if report.emissions.is_empty() {
        Err(SolveError::NoSolution(Box::new(report)))
    } else {
        Ok(report)
    }
}

/// Runs [`solve`] on a worker thread and streams emissions over a channel.
/// The join handle yields the final report.
pub fn solve_stream(
    instance: ProblemInstance<f64>,
    config: PlannerConfig,
) -> (
    mpsc::Receiver<Emission<f64>>,
    std::thread::JoinHandle<Result<SolveReport<f64>, SolveError<f64>>>,
) {
    let (tx, rx) = mpsc::channel();
    let handle = std::thread::spawn(move || {
        solve(&instance, &config, |e| {
            let _ = tx.send(e.clone());
            true
        })
    });
    (rx, handle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ControlAction;
    use crate::geometry::Shape;

    fn line(y: f64, x0: f64, dx: f64, k: usize) -> DbSolution<f64> {
        DbSolution {
            states: (0..=k).map(|t| RobotState(vec![x0 + dx * t as f64, y, 0.0])).collect(),
            actions: vec![ControlAction(vec![0.0, 0.0]); k],
            delta_used: 0.1,
        }
    }

    fn disks(n: usize) -> Vec<RobotBody<f64>> {
        vec![
            RobotBody {
                robot_type: RobotType::Unicycle1,
                shape: Shape::disk(0.1),
            };
            n
        ]
    }

    #[test]
    fn delta_schedule() {
        let mut c = PlannerConfig::default();
        assert_eq!(compute_delta(&c, 1), 0.5);
        c.delta_rate = 0.5;
        assert_eq!(compute_delta(&c, 3), 0.125);
        let d: Vec<_> = (1..20).map(|n| compute_delta(&c, n)).collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(c.primitive_count(1), 100);
        assert_eq!(c.primitive_count(4), 800);
    }

    #[test]
    fn parallel_lines_have_no_conflict() {
        let sols = vec![line(0.0, 0.0, 0.1, 10), line(1.0, 0.0, 0.1, 10)];
        assert!(get_earliest_conflict(&sols, &disks(2), 0.0).is_none());
    }

    #[test]
    fn earliest_of_two_crossings() {
        // robot 1 oscillates across robot 0's line: overlaps at k = 7 and k = 12
        let a = line(0.0, 0.0, 0.0, 20);
        let mut b = line(1.0, 0.0, 0.0, 20);
        b.states[7].0[1] = 0.05;
        b.states[12].0[1] = 0.05;
        let c = get_earliest_conflict(&[a, b], &disks(2), 0.0).unwrap();
        assert_eq!((c.i, c.j, c.time), (0, 1, 7));
    }

    #[test]
    fn parked_robot_conflicts() {
        // robot 0 stops at x = 0.5 after 5 steps; robot 1 passes there at k = 9
        let a = line(0.0, 0.0, 0.1, 5);
        let b = line(0.0, -0.4, 0.1, 20);
        let sols = [a, b];
        let c = get_earliest_conflict(&sols, &disks(2), 0.0).unwrap();
        assert!(c.time > 5);
        assert_eq!(c.xi, sols[0].states[5]);
    }

    #[test]
    fn config_round_trips_and_validates() {
        let c = PlannerConfig::default();
        let text = serde_yaml::to_string(&c).unwrap();
        let back: PlannerConfig = serde_yaml::from_str(&text).unwrap();
        assert_eq!(back, c);
        let partial: PlannerConfig = serde_yaml::from_str("delta0: 0.3\nseed: 4\n").unwrap();
        assert_eq!(partial.delta0, 0.3);
        assert_eq!(partial.alpha, 0.5);
        let bad = PlannerConfig { delta0: 0.0, ..PlannerConfig::default() };
        assert!(bad.validate().is_err());
        assert!(serde_yaml::from_str::<PlannerConfig>("nope: 1\n").is_err());
    }
}
