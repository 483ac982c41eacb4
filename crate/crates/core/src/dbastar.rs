//! Discontinuity-bounded A* over motion primitives with time-indexed
//! constraints (dynamic obstacles).
//!
//! Search costs are counted in integer timesteps internally so that arrival
//! times can be matched exactly during traceback; they are reported in
//! seconds (`steps * dt`).
//!
//! Nodes reached at or before the latest constraint time live in a
//! space-time layer: they are only merged with nodes reached at exactly the
//! same timestep. Later nodes form the spatial layer, where a cheaper
//! arrival at an explored node within `(1 - alpha) * delta` is appended to
//! that node's arrival list and the node is re-queued.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{distance_slices, Bounds, ControlAction, MetricWeights, RobotState, RobotType};
use crate::geometry::{in_free_space, place, Shape, Workspace};
use crate::primitives::{applied_state, MotionPrimitive, PrimitiveSet};
use crate::scalar::{angle_diff, Scalar};

/// Forbids robot `robot` from being within `delta` of `state` at timestep `time`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    pub robot: usize,
    pub state: RobotState<T>,
    pub time: usize,
}

/// A delta-discontinuity-bounded state/action sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct DbSolution<T> {
    pub states: Vec<RobotState<T>>,
    pub actions: Vec<ControlAction<T>>,
    pub delta_used: T,
}

impl<T: Scalar> DbSolution<T> {
    /// Number of actions.
    pub fn horizon(&self) -> usize {
        self.actions.len()
    }

    pub fn cost(&self, dt: T) -> T {
        T::count(self.horizon()) * dt
    }

    /// State at timestep `k`; the final state is held after the horizon.
    pub fn state_at(&self, k: usize) -> &RobotState<T> {
        &self.states[k.min(self.states.len() - 1)]
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("no solution: open list exhausted after {expansions} expansions")]
    Infeasible { expansions: usize },
    #[error("time limit reached after {expansions} expansions")]
    TimeLimit { expansions: usize },
    #[error("expansion limit of {0} reached")]
    ExpansionLimit(usize),
    #[error("invalid search arguments: {0}")]
    InvalidArguments(String),
}

/// Cost-to-go estimate in seconds.
pub trait Heuristic<T> {
    fn estimate(&self, x: &[T]) -> T;
}

/// Planar distance to the goal divided by the robot's top speed.
#[derive(Clone, Debug)]
pub struct EuclideanHeuristic<T> {
    pub goal: [T; 2],
    pub max_speed: T,
}

impl<T: Scalar> EuclideanHeuristic<T> {
    pub fn new(robot: RobotType, bounds: &Bounds<T>, goal: &RobotState<T>) -> Self {
        Self {
            goal: goal.position(),
            max_speed: bounds.max_speed(robot),
        }
    }
}

impl<T: Scalar> Heuristic<T> for EuclideanHeuristic<T> {
    fn estimate(&self, x: &[T]) -> T {
        (x[0] - self.goal[0]).hypot(x[1] - self.goal[1]) / self.max_speed
    }
}

/// Uninformed search (Dijkstra order).
pub struct ZeroHeuristic;

impl<T: Scalar> Heuristic<T> for ZeroHeuristic {
    fn estimate(&self, _x: &[T]) -> T {
        T::zero()
    }
}

/// Everything the single-robot search needs besides the tuning parameters.
pub struct SingleRobotProblem<'a, T> {
    pub robot_type: RobotType,
    pub shape: Shape<T>,
    pub bounds: &'a Bounds<T>,
    pub start: &'a RobotState<T>,
    pub goal: &'a RobotState<T>,
    pub workspace: &'a Workspace<T>,
    pub primitives: &'a PrimitiveSet<T>,
    /// Constraints for this robot; the `robot` field is not inspected.
    pub constraints: &'a [Constraint<T>],
}

#[derive(Clone, Debug)]
pub struct SearchParams<T> {
    pub delta: T,
    pub alpha: T,
    pub deadline: Option<Instant>,
    pub max_expansions: Option<usize>,
    /// Keep the explored tree for [`SearchOutcome::explored`].
    pub record_tree: bool,
}

impl<T: Scalar> SearchParams<T> {
    pub fn new(delta: T, alpha: T) -> Self {
        Self {
            delta,
            alpha,
            deadline: None,
            max_expansions: None,
            record_tree: false,
        }
    }
}

/// One explored edge, for visualization dumps.
#[derive(Clone, Debug, Serialize)]
pub struct ExploredEdge {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
    pub time: usize,
}

#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    pub expansions: usize,
    pub nodes: usize,
    pub motions_checked: usize,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome<T> {
    pub solution: DbSolution<T>,
    pub stats: SearchStats,
    pub explored: Vec<ExploredEdge>,
}

impl<T> SearchOutcome<T> {
    /// YAML dump of the explored tree.
    pub fn explored_yaml(&self) -> String {
        serde_yaml::to_string(&self.explored).unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug)]
struct Arrival {
    g: usize,
    parent: Option<usize>,
    motion: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layer {
    SpaceTime,
    Spatial,
}

struct Node<T> {
    state: Vec<T>,
    g: usize,
    layer: Layer,
    /// Sorted by `g` descending; the last entry is the current best.
    arrivals: Vec<Arrival>,
}

struct QueueEntry<T> {
    f: T,
    g: usize,
    seq: usize,
    node: usize,
}

impl<T: Scalar> PartialEq for QueueEntry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for QueueEntry<T> {}

impl<T: Scalar> PartialOrd for QueueEntry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for QueueEntry<T> {
    // max-heap: smaller f first, then larger g, then insertion order
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .partial_cmp(&self.f)
            .unwrap_or(Ordering::Equal)
            .then(self.g.cmp(&other.g))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Exact radius search over explored states. Buckets on planar position with
/// a cell size that bounds the metric from below, so no neighbor is missed.
struct SpatialHash {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl SpatialHash {
    fn new(cell: f64) -> Self {
        Self {
            cell: cell.max(1e-9),
            buckets: HashMap::new(),
        }
    }

    fn key(&self, x: f64, y: f64) -> (i64, i64) {
        ((x / self.cell).floor() as i64, (y / self.cell).floor() as i64)
    }

    fn insert(&mut self, x: f64, y: f64, id: usize) {
        let k = self.key(x, y);
        self.buckets.entry(k).or_default().push(id);
    }

    fn candidates(&self, x: f64, y: f64, mut f: impl FnMut(usize)) {
        let (cx, cy) = self.key(x, y);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.buckets.get(&(cx + dx, cy + dy)) {
                    for &id in v {
                        f(id);
                    }
                }
            }
        }
    }
}

/// True when the translated motion keeps more than `delta` away from every
/// constraint whose timestep falls on the motion. The motion starts at
/// timestep `node_g`; state `i` of the motion occupies timestep `node_g + i`.
pub fn constraint_filter<T: Scalar>(
    robot: RobotType,
    weights: &MetricWeights<T>,
    node_g: usize,
    motion: &[RobotState<T>],
    constraints: &[Constraint<T>],
    delta: T,
) -> bool {
    constraints.iter().all(|c| {
        if c.time < node_g {
            return true;
        }
        let idx = c.time - node_g;
        match motion.get(idx) {
            Some(s) => distance_slices(robot, s.as_slice(), c.state.as_slice(), &weights.0, false) > delta,
            None => true,
        }
    })
}

fn motion_obeys_constraints<T: Scalar>(
    robot: RobotType,
    weights: &[T],
    node_state: &[T],
    node_g: usize,
    m: &MotionPrimitive<T>,
    constraints: &[Constraint<T>],
    delta: T,
    buf: &mut Vec<T>,
) -> bool {
    constraints.iter().all(|c| {
        if c.time < node_g || c.time - node_g > m.len() {
            return true;
        }
        applied_state(node_state, m, c.time - node_g, buf);
        distance_slices(robot, buf, c.state.as_slice(), weights, false) > delta
    })
}

fn motion_collision_free<T: Scalar>(
    robot: RobotType,
    shape: &Shape<T>,
    ws: &Workspace<T>,
    node_state: &[T],
    m: &MotionPrimitive<T>,
    buf: &mut Vec<T>,
) -> bool {
    (0..=m.len()).all(|k| {
        applied_state(node_state, m, k, buf);
        in_free_space(place(robot, shape, buf).parts(), ws)
    })
}

/// Discontinuity-bounded A* from `start` to within `delta` of `goal`.
pub fn plan<T: Scalar>(
    problem: &SingleRobotProblem<'_, T>,
    params: &SearchParams<T>,
    heuristic: &dyn Heuristic<T>,
) -> Result<SearchOutcome<T>, PlanError> {
    let rt = problem.robot_type;
    let (delta, alpha) = (params.delta, params.alpha);
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(PlanError::InvalidArguments(format!("alpha = {alpha} not in (0, 1)")));
    }
    if !(delta > T::zero()) {
        return Err(PlanError::InvalidArguments(format!("delta = {delta} must be positive")));
    }
    if problem.primitives.robot_type() != rt {
        return Err(PlanError::InvalidArguments("primitive set is for another robot type".into()));
    }
    if problem.start.len() != rt.state_dim() || problem.goal.len() != rt.state_dim() {
        return Err(PlanError::InvalidArguments("start/goal dimension".into()));
    }
    let w = &problem.primitives.weights().0;
    let dt = problem.primitives.dt();
    let prims = problem.primitives;
    let constraints = problem.constraints;
    let last_constraint = constraints.iter().map(|c| c.time).max();
    let in_space_time = |g: usize| last_constraint.map_or(false, |t| g <= t);
    let merge_radius = (T::one() - alpha) * delta;
    let apply_radius = alpha * delta;

    let min_pos_weight = w[0].min(w[1]).as_f64();
    let mut index = SpatialHash::new(merge_radius.as_f64() / min_pos_weight);
    let mut nodes: Vec<Node<T>> = Vec::new();
    let mut open = BinaryHeap::new();
    let mut seq = 0usize;
    let mut stats = SearchStats::default();
    let mut explored = Vec::new();

    let start = problem.start.as_slice().to_vec();
    index.insert(start[0].as_f64(), start[1].as_f64(), 0);
    let layer0 = if in_space_time(0) { Layer::SpaceTime } else { Layer::Spatial };
    open.push(QueueEntry {
        f: heuristic.estimate(&start),
        g: 0,
        seq,
        node: 0,
    });
    nodes.push(Node {
        state: start,
        g: 0,
        layer: layer0,
        arrivals: vec![Arrival {
            g: 0,
            parent: None,
            motion: None,
        }],
    });

    let mut buf = Vec::with_capacity(rt.state_dim());
    let mut candidates = Vec::new();
    while let Some(entry) = open.pop() {
        if let Some(next) = open.peek() {
            debug_assert!(entry.cmp(next) != Ordering::Less, "heap order violated");
        }
        let n = entry.node;
        if nodes[n].g != entry.g {
            continue;
        }
        let g = nodes[n].g;
        let goal_dist = distance_slices(rt, &nodes[n].state, problem.goal.as_slice(), w, false);
        if goal_dist <= delta {
            let parked_ok = constraints.iter().all(|c| {
                c.time < g || distance_slices(rt, &nodes[n].state, c.state.as_slice(), w, false) > delta
            });
            if parked_ok {
                stats.nodes = nodes.len();
                let solution = traceback(&nodes, prims, n, g, delta);
                return Ok(SearchOutcome {
                    solution,
                    stats,
                    explored,
                });
            }
        }
        stats.expansions += 1;
        if let Some(limit) = params.max_expansions {
            if stats.expansions > limit {
                return Err(PlanError::ExpansionLimit(limit));
            }
        }
        if stats.expansions % 64 == 0 {
            if let Some(deadline) = params.deadline {
                if Instant::now() >= deadline {
                    return Err(PlanError::TimeLimit {
                        expansions: stats.expansions,
                    });
                }
            }
        }

        let node_state = nodes[n].state.clone();
        for mi in prims.query_applicable_indices(&node_state, apply_radius) {
            let m = prims.get(mi);
            stats.motions_checked += 1;
            if !motion_obeys_constraints(rt, w, &node_state, g, m, constraints, delta, &mut buf) {
                continue;
            }
            let gt = g + m.len();
            applied_state(&node_state, m, m.len(), &mut buf);
            let layer = if in_space_time(gt) { Layer::SpaceTime } else { Layer::Spatial };
            candidates.clear();
            index.candidates(buf[0].as_f64(), buf[1].as_f64(), |id| {
                let other = &nodes[id];
                let same_layer = other.layer == layer && (layer == Layer::Spatial || other.g == gt);
                if same_layer && distance_slices(rt, &other.state, &buf, w, false) <= merge_radius {
                    candidates.push(id);
                }
            });
            let matched = !candidates.is_empty();
            // a motion that cannot improve any node is dropped before the collision check
            if matched && candidates.iter().all(|&id| nodes[id].g <= gt) {
                continue;
            }
            if !motion_collision_free(rt, &problem.shape, problem.workspace, &node_state, m, &mut buf) {
                continue;
            }
            applied_state(&node_state, m, m.len(), &mut buf);
            for &id in &candidates {
                if gt < nodes[id].g {
                    let other = &mut nodes[id];
                    other.g = gt;
                    other.arrivals.push(Arrival {
                        g: gt,
                        parent: Some(n),
                        motion: Some(mi),
                    });
                    seq += 1;
                    open.push(QueueEntry {
                        f: T::count(gt) * dt + heuristic.estimate(&other.state),
                        g: gt,
                        seq,
                        node: id,
                    });
                }
            }
            if matched {
                continue;
            }
            let id = nodes.len();
            if params.record_tree {
                explored.push(ExploredEdge {
                    from: node_state.iter().map(|v| v.as_f64()).collect(),
                    to: buf.iter().map(|v| v.as_f64()).collect(),
                    time: gt,
                });
            }
            index.insert(buf[0].as_f64(), buf[1].as_f64(), id);
            seq += 1;
            open.push(QueueEntry {
                f: T::count(gt) * dt + heuristic.estimate(&buf),
                g: gt,
                seq,
                node: id,
            });
            nodes.push(Node {
                state: buf.clone(),
                g: gt,
                layer,
                arrivals: vec![Arrival {
                    g: gt,
                    parent: Some(n),
                    motion: Some(mi),
                }],
            });
        }
    }
    Err(PlanError::Infeasible {
        expansions: stats.expansions,
    })
}

/// Follows arrivals backwards, matching each parent's arrival time exactly.
fn traceback<T: Scalar>(
    nodes: &[Node<T>],
    prims: &PrimitiveSet<T>,
    goal_node: usize,
    goal_g: usize,
    delta: T,
) -> DbSolution<T> {
    let mut segments = Vec::new();
    let (mut n, mut t) = (goal_node, goal_g);
    loop {
        let arrival = nodes[n]
            .arrivals
            .iter()
            .find(|a| a.g == t)
            .expect("every expansion time is recorded as an arrival");
        match (arrival.parent, arrival.motion) {
            (Some(p), Some(m)) => {
                segments.push((p, m));
                t -= prims.get(m).len();
                n = p;
            }
            _ => break,
        }
    }
    segments.reverse();
    let mut states = Vec::new();
    let mut actions = Vec::new();
    for &(p, mi) in &segments {
        let m = prims.get(mi);
        let origin = &nodes[p].state;
        let mut buf = Vec::new();
        for k in 0..m.len() {
            applied_state(origin, m, k, &mut buf);
            states.push(RobotState(buf.clone()));
        }
        actions.extend(m.actions.iter().cloned());
    }
    states.push(RobotState(nodes[goal_node].state.clone()));
    DbSolution {
        states,
        actions,
        delta_used: delta,
    }
}

/// Outcome of one validation check with the worst observed value.
#[derive(Clone, Debug, PartialEq)]
pub struct Check<T> {
    pub pass: bool,
    pub worst: T,
    /// First offending timestep, if any.
    pub first_failure: Option<usize>,
}

impl<T: Scalar> Check<T> {
    fn new(worst: T) -> Self {
        Self {
            pass: true,
            worst,
            first_failure: None,
        }
    }

    fn fail(&mut self, k: usize) {
        self.pass = false;
        self.first_failure.get_or_insert(k);
    }
}

/// Independent re-check of the discontinuity-bounded solution conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<T> {
    /// Largest `d(x_{k+1}, step(x_k, u_k))`.
    pub continuity: Check<T>,
    /// Largest action bound violation.
    pub actions: Check<T>,
    /// Smallest clearance to obstacles and workspace boundary.
    pub collision: Check<T>,
    pub start: Check<T>,
    pub goal: Check<T>,
    /// Smallest distance to a constraint state at its timestep.
    pub constraints: Check<T>,
    pub structure_ok: bool,
}

impl<T: Scalar> ValidationReport<T> {
    pub fn passed(&self) -> bool {
        self.structure_ok
            && self.continuity.pass
            && self.actions.pass
            && self.collision.pass
            && self.start.pass
            && self.goal.pass
            && self.constraints.pass
    }
}

/// Validation inputs shared with [`plan`].
pub struct ValidationInput<'a, T> {
    pub robot_type: RobotType,
    pub shape: Shape<T>,
    pub bounds: &'a Bounds<T>,
    pub weights: &'a MetricWeights<T>,
    pub dt: T,
    pub start: &'a RobotState<T>,
    pub goal: &'a RobotState<T>,
    pub workspace: &'a Workspace<T>,
    pub constraints: &'a [Constraint<T>],
}

/// Re-checks every condition of a delta-bounded solution from scratch:
/// step continuity, action bounds, free space, start and goal proximity,
/// and constraint clearance (the final state is held after the horizon).
pub fn validate<T: Scalar>(
    sol: &DbSolution<T>,
    input: &ValidationInput<'_, T>,
    delta: T,
) -> ValidationReport<T> {
    let rt = input.robot_type;
    let w = &input.weights.0;
    let slack = delta * T::lit(1e-9) + T::lit(1e-12);
    let bound = delta + slack;
    let structure_ok = !sol.states.is_empty()
        && sol.states.len() == sol.actions.len() + 1
        && sol.states.iter().all(|s| s.len() == rt.state_dim())
        && sol.actions.iter().all(|u| u.0.len() == rt.action_dim());
    let mut report = ValidationReport {
        continuity: Check::new(T::zero()),
        actions: Check::new(T::zero()),
        collision: Check::new(T::infinity()),
        start: Check::new(T::zero()),
        goal: Check::new(T::zero()),
        constraints: Check::new(T::infinity()),
        structure_ok,
    };
    if !structure_ok {
        return report;
    }
    let mut next = vec![T::zero(); rt.state_dim()];
    for (k, u) in sol.actions.iter().enumerate() {
        let x = sol.states[k].as_slice();
        // the step is recomputed here rather than trusting the search
        rt.rate(x, u.as_slice(), &mut next);
        for i in 0..next.len() {
            next[i] = x[i] + next[i] * input.dt;
        }
        let mut sum = T::zero();
        for i in 0..next.len() {
            let d = if rt.is_angle(i) {
                angle_diff(sol.states[k + 1].0[i], next[i])
            } else {
                sol.states[k + 1].0[i] - next[i]
            };
            sum = sum + (w[i] * d) * (w[i] * d);
        }
        let gap = sum.sqrt();
        report.continuity.worst = report.continuity.worst.max(gap);
        if gap > bound {
            report.continuity.fail(k);
        }
        let mut viol = T::zero();
        for (i, &v) in u.0.iter().enumerate() {
            viol = viol.max(input.bounds.action_lo[i] - v).max(v - input.bounds.action_hi[i]);
        }
        report.actions.worst = report.actions.worst.max(viol);
        if viol > T::lit(1e-12) {
            report.actions.fail(k);
        }
    }
    for (k, x) in sol.states.iter().enumerate() {
        let fp = place(rt, &input.shape, x.as_slice());
        for part in fp.parts() {
            let c = crate::geometry::clearance(part, input.workspace);
            report.collision.worst = report.collision.worst.min(c);
        }
        if !in_free_space(fp.parts(), input.workspace) {
            report.collision.fail(k);
        }
    }
    let d0 = distance_slices(rt, sol.states[0].as_slice(), input.start.as_slice(), w, false);
    report.start.worst = d0;
    if d0 > bound {
        report.start.fail(0);
    }
    let last = sol.states.len() - 1;
    let dk = distance_slices(rt, sol.states[last].as_slice(), input.goal.as_slice(), w, false);
    report.goal.worst = dk;
    if dk > bound {
        report.goal.fail(last);
    }
    for c in input.constraints {
        let x = sol.state_at(c.time);
        let d = distance_slices(rt, x.as_slice(), c.state.as_slice(), w, false);
        report.constraints.worst = report.constraints.worst.min(d);
        if d <= delta {
            report.constraints.fail(c.time);
        }
    }
    report
}
