//! Joint trajectory optimization by single shooting.
//!
//! Decision variables are every robot's actions plus one shared timestep.
//! States come from forward Euler rollouts, so dynamics hold exactly. Goal
//! attainment, collisions and state bounds are squared penalties whose
//! weights grow over outer rounds; action and timestep bounds are enforced
//! by projection inside a limited-memory quasi-Newton solver.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::debug;

use crate::dbastar::DbSolution;
use crate::dynamics::{ControlAction, MetricWeights, RobotState, RobotType, TRAILER_HITCH};
use crate::geometry::{contact, place, PlacedShape, Shape, Workspace};
use crate::matrix::Matrix;
use crate::scalar::{angle_diff, Scalar};
use crate::scenario_io::ProblemInstance;

/// States and actions of one robot; `states.len() == actions.len() + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotTrajectory<T> {
    pub states: Vec<RobotState<T>>,
    pub actions: Vec<ControlAction<T>>,
}

impl<T: Scalar> RobotTrajectory<T> {
    pub fn horizon(&self) -> usize {
        self.actions.len()
    }

    /// State at timestep `k`, parked at the final state afterwards.
    pub fn state_at(&self, k: usize) -> &RobotState<T> {
        &self.states[k.min(self.states.len() - 1)]
    }
}

/// Initial guess: per-robot sequences (possibly discontinuous) and a nominal timestep.
#[derive(Clone, Debug, PartialEq)]
pub struct JointGuess<T> {
    pub robots: Vec<RobotTrajectory<T>>,
    pub dt: T,
}

impl<T: Scalar> JointGuess<T> {
    pub fn from_db(solutions: &[DbSolution<T>], dt: T) -> Self {
        Self {
            robots: solutions
                .iter()
                .map(|s| RobotTrajectory {
                    states: s.states.clone(),
                    actions: s.actions.clone(),
                })
                .collect(),
            dt,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(serialize = "T: Serialize", deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct OptWeights<T> {
    /// Control regularization.
    pub beta: T,
    pub penalty_initial: T,
    pub penalty_multiplier: T,
    pub max_rounds: usize,
    pub goal_tol_position: T,
    pub goal_tol_other: T,
    /// Accepted robot-robot penetration depth.
    pub collision_tol: T,
    /// Desired clearance inside the hinge penalties.
    pub collision_margin: T,
    pub state_tol: T,
    pub dt_min_factor: T,
    pub dt_max_factor: T,
    /// Quasi-Newton iterations per round.
    pub max_iterations: usize,
    /// Weight of the initial guess-tracking phase; zero disables it.
    pub tracking_weight: T,
}

impl<T: Scalar> Default for OptWeights<T> {
    fn default() -> Self {
        Self {
            beta: T::lit(0.01),
            penalty_initial: T::lit(10.0),
            penalty_multiplier: T::lit(5.0),
            max_rounds: 8,
            goal_tol_position: T::lit(1e-3),
            goal_tol_other: T::lit(1e-2),
            collision_tol: T::lit(1e-4),
            collision_margin: T::lit(0.01),
            state_tol: T::lit(1e-4),
            dt_min_factor: T::lit(0.5),
            dt_max_factor: T::lit(2.0),
            max_iterations: 400,
            tracking_weight: T::lit(10.0),
        }
    }
}

impl OptWeights<f64> {
    pub fn cast<T: Scalar>(&self) -> OptWeights<T> {
        OptWeights {
            beta: T::lit(self.beta),
            penalty_initial: T::lit(self.penalty_initial),
            penalty_multiplier: T::lit(self.penalty_multiplier),
            max_rounds: self.max_rounds,
            goal_tol_position: T::lit(self.goal_tol_position),
            goal_tol_other: T::lit(self.goal_tol_other),
            collision_tol: T::lit(self.collision_tol),
            collision_margin: T::lit(self.collision_margin),
            state_tol: T::lit(self.state_tol),
            dt_min_factor: T::lit(self.dt_min_factor),
            dt_max_factor: T::lit(self.dt_max_factor),
            max_iterations: self.max_iterations,
            tracking_weight: T::lit(self.tracking_weight),
        }
    }
}

/// Worst-case values of every feasibility condition, with locations.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport<T> {
    pub max_residual: T,
    /// (robot, step)
    pub residual_at: Option<(usize, usize)>,
    pub max_action_violation: T,
    pub action_violation_at: Option<(usize, usize)>,
    pub max_state_violation: T,
    pub state_violation_at: Option<(usize, usize)>,
    /// Smallest robot-robot signed distance, parked robots included.
    pub min_robot_margin: T,
    /// (i, j, timestep)
    pub robot_margin_at: Option<(usize, usize, usize)>,
    /// Smallest clearance to obstacles and workspace walls.
    pub min_clearance: T,
    pub clearance_at: Option<(usize, usize)>,
    /// Per robot: (planar position error, largest other-component error).
    pub goal_errors: Vec<(T, T)>,
    /// Start state mismatch, per robot.
    pub start_errors: Vec<T>,
}

impl<T: Scalar> FeasibilityReport<T> {
    /// Names of the violated constraint classes.
    pub fn failures(&self, w: &OptWeights<T>) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !(self.max_residual <= T::lit(1e-6)) {
            out.push("dynamics");
        }
        if !(self.max_action_violation <= T::lit(1e-9)) {
            out.push("action bounds");
        }
        if !(self.max_state_violation <= w.state_tol) {
            out.push("state bounds");
        }
        if !(self.min_robot_margin >= -w.collision_tol) {
            out.push("robot collision");
        }
        if !(self.min_clearance > T::zero()) {
            out.push("obstacle collision");
        }
        if self
            .goal_errors
            .iter()
            .any(|&(p, o)| !(p <= w.goal_tol_position && o <= w.goal_tol_other))
        {
            out.push("goal");
        }
        if self.start_errors.iter().any(|&e| !(e <= T::lit(1e-9))) {
            out.push("start");
        }
        out
    }

    pub fn passed(&self, w: &OptWeights<T>) -> bool {
        self.failures(w).is_empty()
    }
}

/// Re-checks every constraint of the joint problem on the given trajectories.
pub fn feasibility_report<T: Scalar>(
    robots: &[RobotTrajectory<T>],
    dt: T,
    instance: &ProblemInstance<T>,
) -> FeasibilityReport<T> {
    assert_eq!(robots.len(), instance.robots.len());
    let mut r = FeasibilityReport {
        max_residual: T::zero(),
        residual_at: None,
        max_action_violation: T::zero(),
        action_violation_at: None,
        max_state_violation: T::zero(),
        state_violation_at: None,
        min_robot_margin: T::infinity(),
        robot_margin_at: None,
        min_clearance: T::infinity(),
        clearance_at: None,
        goal_errors: Vec::new(),
        start_errors: Vec::new(),
    };
    for (i, (traj, spec)) in robots.iter().zip(&instance.robots).enumerate() {
        let rt = spec.robot_type;
        let mut next = vec![T::zero(); rt.state_dim()];
        for (k, u) in traj.actions.iter().enumerate() {
            let x = traj.states[k].as_slice();
            rt.step_into(x, u.as_slice(), dt, &mut next);
            let res = component_errors(rt, &traj.states[k + 1].0, &next)
                .fold(T::zero(), |a, e| a.max(e.abs()));
            if res > r.max_residual {
                r.max_residual = res;
                r.residual_at = Some((i, k));
            }
            let mut viol = T::zero();
            for (c, &v) in u.0.iter().enumerate() {
                viol = viol.max(spec.bounds.action_lo[c] - v).max(v - spec.bounds.action_hi[c]);
            }
            if viol > r.max_action_violation {
                r.max_action_violation = viol;
                r.action_violation_at = Some((i, k));
            }
        }
        for (k, x) in traj.states.iter().enumerate() {
            let v = spec.bounds.state_violation(rt, x.as_slice());
            if v > r.max_state_violation {
                r.max_state_violation = v;
                r.state_violation_at = Some((i, k));
            }
            for part in place(rt, &spec.shape, x.as_slice()).parts() {
                let c = crate::geometry::clearance(part, &instance.workspace);
                if c < r.min_clearance {
                    r.min_clearance = c;
                    r.clearance_at = Some((i, k));
                }
            }
        }
        let last = traj.states.last().expect("nonempty trajectory");
        r.goal_errors.push(goal_error(rt, &last.0, &spec.goal.0));
        let start_err = component_errors(rt, &traj.states[0].0, &spec.start.0)
            .fold(T::zero(), |a, e| a.max(e.abs()));
        r.start_errors.push(start_err);
    }
    let horizon = robots.iter().map(|t| t.horizon()).max().unwrap_or(0);
    for k in 0..=horizon {
        let prints: Vec<_> = robots
            .iter()
            .zip(&instance.robots)
            .map(|(t, s)| place(s.robot_type, &s.shape, t.state_at(k).as_slice()))
            .collect();
        for i in 0..prints.len() {
            for j in i + 1..prints.len() {
                let d = crate::geometry::footprint_distance(&prints[i], &prints[j]);
                if d < r.min_robot_margin {
                    r.min_robot_margin = d;
                    r.robot_margin_at = Some((i, j, k));
                }
            }
        }
    }
    r
}

fn component_errors<'a, T: Scalar>(
    rt: RobotType,
    a: &'a [T],
    b: &'a [T],
) -> impl Iterator<Item = T> + 'a {
    (0..a.len()).map(move |c| {
        if rt.is_angle(c) {
            angle_diff(a[c], b[c])
        } else {
            a[c] - b[c]
        }
    })
}

fn goal_error<T: Scalar>(rt: RobotType, x: &[T], goal: &[T]) -> (T, T) {
    let pos = (x[0] - goal[0]).hypot(x[1] - goal[1]);
    let other = component_errors(rt, x, goal)
        .skip(2)
        .fold(T::zero(), |a, e| a.max(e.abs()));
    (pos, other)
}

/// Penalty weights for one evaluation of the objective.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyWeights<T> {
    pub goal: T,
    pub collision: T,
    pub state: T,
    pub tracking: T,
}

impl<T: Scalar> PenaltyWeights<T> {
    pub fn uniform(w: T) -> Self {
        Self {
            goal: w,
            collision: w,
            state: w,
            tracking: T::zero(),
        }
    }
}

/// Fixed structure of the decision vector and the penalty terms.
pub struct ObjectiveStructure<'a, T> {
    pub instance: &'a ProblemInstance<T>,
    pub horizons: Vec<usize>,
    pub beta: T,
    pub margin: T,
    /// States to track in the warm-start phase, one sequence per robot.
    pub targets: Option<Vec<Vec<RobotState<T>>>>,
    offsets: Vec<usize>,
    metric: Vec<MetricWeights<T>>,
}

impl<'a, T: Scalar> ObjectiveStructure<'a, T> {
    pub fn new(instance: &'a ProblemInstance<T>, horizons: Vec<usize>, beta: T, margin: T) -> Self {
        assert_eq!(horizons.len(), instance.robots.len());
        let mut offsets = Vec::with_capacity(horizons.len() + 1);
        let mut o = 0;
        for (k, r) in horizons.iter().zip(&instance.robots) {
            offsets.push(o);
            o += k * r.robot_type.action_dim();
        }
        offsets.push(o);
        let metric = instance
            .robots
            .iter()
            .map(|r| MetricWeights::default_for(r.robot_type))
            .collect();
        Self {
            instance,
            horizons,
            beta,
            margin,
            targets: None,
            offsets,
            metric,
        }
    }

    /// Length of the decision vector (actions then the timestep).
    pub fn len(&self) -> usize {
        self.offsets[self.horizons.len()] + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pack(&self, robots: &[RobotTrajectory<T>], dt: T) -> Vec<T> {
        let mut z = Vec::with_capacity(self.len());
        for r in robots {
            for u in &r.actions {
                z.extend_from_slice(u.as_slice());
            }
        }
        z.push(dt);
        debug_assert_eq!(z.len(), self.len());
        z
    }

    fn actions<'z>(&self, z: &'z [T], i: usize) -> &'z [T] {
        &z[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Forward Euler rollout from the exact start states.
    pub fn rollout(&self, z: &[T]) -> Vec<Vec<Vec<T>>> {
        let dt = z[z.len() - 1];
        self.instance
            .robots
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let rt = spec.robot_type;
                let m = rt.action_dim();
                let us = self.actions(z, i);
                let mut xs = Vec::with_capacity(self.horizons[i] + 1);
                xs.push(spec.start.0.clone());
                for k in 0..self.horizons[i] {
                    let mut next = vec![T::zero(); rt.state_dim()];
                    rt.step_into(&xs[k], &us[k * m..(k + 1) * m], dt, &mut next);
                    xs.push(next);
                }
                xs
            })
            .collect()
    }

    pub fn unpack(&self, z: &[T]) -> (Vec<RobotTrajectory<T>>, T) {
        let xs = self.rollout(z);
        let robots = xs
            .into_iter()
            .enumerate()
            .map(|(i, states)| {
                let m = self.instance.robots[i].robot_type.action_dim();
                RobotTrajectory {
                    states: states.into_iter().map(RobotState).collect(),
                    actions: self
                        .actions(z, i)
                        .chunks_exact(m)
                        .map(|u| ControlAction(u.to_vec()))
                        .collect(),
                }
            })
            .collect();
        (robots, z[z.len() - 1])
    }
}

/// Value of the penalized objective with its split into parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation<T> {
    pub value: T,
    /// `sum_i K_i * dt + beta * sum |u|^2`
    pub cost: T,
    /// Unweighted sum of squared goal, collision and state-bound penalty terms.
    pub violation: T,
}

/// Derivatives of a part's pose with respect to the robot state.
fn add_part_gradient<T: Scalar>(
    rt: RobotType,
    part: usize,
    x: &[T],
    d_pos: [T; 2],
    d_theta: T,
    gx: &mut [T],
) {
    gx[0] = gx[0] + d_pos[0];
    gx[1] = gx[1] + d_pos[1];
    match (rt, part) {
        (RobotType::DoubleIntegrator2D, _) => {}
        (_, 0) => gx[2] = gx[2] + d_theta,
        (_, _) => {
            let l = T::lit(TRAILER_HITCH);
            let (s, c) = x[3].sin_cos();
            gx[3] = gx[3] + d_theta + d_pos[0] * l * s - d_pos[1] * l * c;
        }
    }
}

fn perp_dot<T: Scalar>(n: [T; 2], p: [T; 2], center: [T; 2]) -> T {
    // n . perp(p - center)
    -n[0] * (p[1] - center[1]) + n[1] * (p[0] - center[0])
}

fn bounding_gap<T: Scalar>(a: &PlacedShape<T>, b: &PlacedShape<T>) -> T {
    let d = (a.position[0] - b.position[0]).hypot(a.position[1] - b.position[1]);
    d - a.shape.bounding_radius() - b.shape.bounding_radius()
}

/// Clearance of a part to each workspace wall with its pose derivatives:
/// (clearance, d/dposition, d/dorientation).
fn wall_terms<T: Scalar>(p: &PlacedShape<T>, ws: &Workspace<T>) -> [(T, [T; 2], T); 4] {
    let o = T::zero();
    let one = T::one();
    let walls = [
        ([one, o], ws.hi[0]),
        ([-one, o], -ws.lo[0]),
        ([o, one], ws.hi[1]),
        ([o, -one], -ws.lo[1]),
    ];
    walls.map(|(n, b)| {
        let s = p.support(n);
        let c = b - (n[0] * s[0] + n[1] * s[1]);
        let dth = match p.shape {
            Shape::Disk { .. } => o,
            Shape::OrientedBox { .. } => -perp_dot(n, s, p.position),
        };
        (c, [-n[0], -n[1]], dth)
    })
}

/// Penalized objective and its gradient with respect to `z` (actions, then dt).
pub fn objective_and_gradient<T: Scalar>(
    st: &ObjectiveStructure<'_, T>,
    z: &[T],
    pen: &PenaltyWeights<T>,
    grad: Option<&mut [T]>,
) -> Evaluation<T> {
    let inst = st.instance;
    let dt = z[z.len() - 1];
    let xs = st.rollout(z);
    let two = T::lit(2.0);
    let margin = st.margin;
    let mut gx: Vec<Vec<Vec<T>>> = xs
        .iter()
        .map(|r| r.iter().map(|x| vec![T::zero(); x.len()]).collect())
        .collect();
    let mut cost = T::zero();
    let mut violation = T::zero();
    let mut penalty = T::zero();

    for (i, spec) in inst.robots.iter().enumerate() {
        let rt = spec.robot_type;
        let k_i = st.horizons[i];
        cost = cost + T::count(k_i) * dt;
        for &u in st.actions(z, i) {
            cost = cost + st.beta * u * u;
        }
        // goal
        let x_k = &xs[i][k_i];
        for (c, e) in component_errors(rt, x_k, &spec.goal.0).enumerate() {
            violation = violation + e * e;
            penalty = penalty + pen.goal * e * e;
            gx[i][k_i][c] = gx[i][k_i][c] + two * pen.goal * e;
        }
        for k in 1..=k_i {
            let x = &xs[i][k];
            // state bounds
            for c in 0..x.len() {
                if rt.is_angle(c) {
                    continue;
                }
                let over = x[c] - spec.bounds.state_hi[c];
                let under = spec.bounds.state_lo[c] - x[c];
                if over > T::zero() {
                    violation = violation + over * over;
                    penalty = penalty + pen.state * over * over;
                    gx[i][k][c] = gx[i][k][c] + two * pen.state * over;
                } else if under > T::zero() {
                    violation = violation + under * under;
                    penalty = penalty + pen.state * under * under;
                    gx[i][k][c] = gx[i][k][c] - two * pen.state * under;
                }
            }
            if let Some(max) = spec.bounds.max_hitch_angle {
                let d = angle_diff(x[2], x[3]);
                let h = d.abs() - max;
                if h > T::zero() {
                    violation = violation + h * h;
                    penalty = penalty + pen.state * h * h;
                    let g = two * pen.state * h * d.signum();
                    gx[i][k][2] = gx[i][k][2] + g;
                    gx[i][k][3] = gx[i][k][3] - g;
                }
            }
            // obstacles and walls
            let fp = place(rt, &spec.shape, x);
            for (pi, part) in fp.parts().iter().enumerate() {
                for (c, dpos, dth) in wall_terms(part, &inst.workspace) {
                    let h = margin - c;
                    if h > T::zero() {
                        violation = violation + h * h;
                        penalty = penalty + pen.collision * h * h;
                        let s = -two * pen.collision * h;
                        add_part_gradient(rt, pi, x, [s * dpos[0], s * dpos[1]], s * dth, &mut gx[i][k]);
                    }
                }
                for obs in &inst.workspace.obstacles {
                    if bounding_gap(part, obs) >= margin {
                        continue;
                    }
                    let ct = contact(part, obs);
                    let h = margin - ct.distance;
                    if h > T::zero() {
                        violation = violation + h * h;
                        penalty = penalty + pen.collision * h * h;
                        // d sd / d part pose: -normal, -normal . perp(pa - ca)
                        let s = -two * pen.collision * h;
                        let n = ct.normal;
                        let dth = -perp_dot(n, ct.point_a, part.position);
                        add_part_gradient(rt, pi, x, [-s * n[0], -s * n[1]], s * dth, &mut gx[i][k]);
                    }
                }
            }
            // tracking
            if let Some(targets) = &st.targets {
                if pen.tracking > T::zero() {
                    let target = &targets[i][k.min(targets[i].len() - 1)].0;
                    let w = &st.metric[i].0;
                    for (c, e) in component_errors(rt, x, target).enumerate() {
                        let we = w[c] * w[c];
                        penalty = penalty + pen.tracking * we * e * e;
                        gx[i][k][c] = gx[i][k][c] + two * pen.tracking * we * e;
                    }
                }
            }
        }
    }

    // robot-robot, with parking after each horizon
    let horizon = st.horizons.iter().copied().max().unwrap_or(0);
    let n = inst.robots.len();
    for t in 1..=horizon {
        let idx: Vec<usize> = st.horizons.iter().map(|&k| t.min(k)).collect();
        let prints: Vec<_> = (0..n)
            .map(|i| place(inst.robots[i].robot_type, &inst.robots[i].shape, &xs[i][idx[i]]))
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                if idx[i] == 0 && idx[j] == 0 {
                    continue;
                }
                for (pa, a) in prints[i].parts().iter().enumerate() {
                    for (pb, b) in prints[j].parts().iter().enumerate() {
                        if bounding_gap(a, b) >= margin {
                            continue;
                        }
                        let ct = contact(a, b);
                        let h = margin - ct.distance;
                        if h <= T::zero() {
                            continue;
                        }
                        violation = violation + h * h;
                        penalty = penalty + pen.collision * h * h;
                        let s = -two * pen.collision * h;
                        let nrm = ct.normal;
                        let (ri, rj) = (inst.robots[i].robot_type, inst.robots[j].robot_type);
                        let dth_a = -perp_dot(nrm, ct.point_a, a.position);
                        let dth_b = perp_dot(nrm, ct.point_b, b.position);
                        let xi = xs[i][idx[i]].clone();
                        let xj = xs[j][idx[j]].clone();
                        add_part_gradient(ri, pa, &xi, [-s * nrm[0], -s * nrm[1]], s * dth_a, &mut gx[i][idx[i]]);
                        add_part_gradient(rj, pb, &xj, [s * nrm[0], s * nrm[1]], s * dth_b, &mut gx[j][idx[j]]);
                    }
                }
            }
        }
    }

    let value = cost + penalty;
    if let Some(grad) = grad {
        adjoint(st, z, &xs, &gx, grad);
    }
    Evaluation {
        value,
        cost,
        violation,
    }
}

/// Backward pass through the rollouts.
fn adjoint<T: Scalar>(
    st: &ObjectiveStructure<'_, T>,
    z: &[T],
    xs: &[Vec<Vec<T>>],
    gx: &[Vec<Vec<T>>],
    grad: &mut [T],
) {
    let dt = z[z.len() - 1];
    let two = T::lit(2.0);
    let mut g_dt = T::zero();
    for (i, spec) in st.instance.robots.iter().enumerate() {
        let rt = spec.robot_type;
        let (n, m) = (rt.state_dim(), rt.action_dim());
        let k_i = st.horizons[i];
        g_dt = g_dt + T::count(k_i);
        let mut a = Matrix::zeros(n, n);
        let mut b = Matrix::zeros(n, m);
        let mut rate = vec![T::zero(); n];
        let mut lambda = gx[i][k_i].clone();
        let off = st.offsets[i];
        for k in (0..k_i).rev() {
            let u = &z[off + k * m..off + (k + 1) * m];
            let x = &xs[i][k];
            rt.jacobians_into(x, u, dt, &mut a, &mut b);
            rt.rate(x, u, &mut rate);
            let gu = &mut grad[off + k * m..off + (k + 1) * m];
            for (c, g) in gu.iter_mut().enumerate() {
                *g = two * st.beta * u[c];
            }
            b.add_transpose_mul(&lambda, gu);
            for c in 0..n {
                g_dt = g_dt + rate[c] * lambda[c];
            }
            let mut prev = gx[i][k].clone();
            a.add_transpose_mul(&lambda, &mut prev);
            lambda = prev;
        }
    }
    let last = grad.len() - 1;
    grad[last] = g_dt;
}

/// One outer round of the penalty schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrace<T> {
    pub weight: T,
    pub objective: T,
    pub violation: T,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizedSolution<T> {
    pub robots: Vec<RobotTrajectory<T>>,
    pub dt: T,
    /// `sum_i K_i * dt + beta * sum |u|^2` on the returned trajectories.
    pub objective: T,
    pub report: FeasibilityReport<T>,
    pub trace: Vec<RoundTrace<T>>,
}

impl<T: Scalar> OptimizedSolution<T> {
    /// Sum of arrival times.
    pub fn cost(&self) -> T {
        self.robots
            .iter()
            .fold(T::zero(), |a, r| a + T::count(r.horizon()) * self.dt)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptFailure<T: Scalar> {
    #[error("guess does not match the instance: {0}")]
    BadGuess(String),
    #[error("optimization did not converge to a feasible solution (violated: {})", .failed.join(", "))]
    Infeasible {
        failed: Vec<&'static str>,
        best: Box<OptimizedSolution<T>>,
    },
}

/// Pads empty horizons and clamps actions into bounds.
fn prepare_guess<T: Scalar>(
    guess: &JointGuess<T>,
    instance: &ProblemInstance<T>,
) -> Result<Vec<RobotTrajectory<T>>, OptFailure<T>> {
    if guess.robots.len() != instance.robots.len() {
        return Err(OptFailure::BadGuess(format!(
            "{} trajectories for {} robots",
            guess.robots.len(),
            instance.robots.len()
        )));
    }
    if !(guess.dt > T::zero()) {
        return Err(OptFailure::BadGuess("non-positive timestep".into()));
    }
    let mut out = Vec::with_capacity(guess.robots.len());
    for (i, (g, spec)) in guess.robots.iter().zip(&instance.robots).enumerate() {
        let rt = spec.robot_type;
        if g.states.len() != g.actions.len() + 1
            || g.states.iter().any(|s| s.len() != rt.state_dim())
            || g.actions.iter().any(|u| u.0.len() != rt.action_dim())
        {
            return Err(OptFailure::BadGuess(format!("robot {i}: inconsistent dimensions")));
        }
        let mut t = g.clone();
        for u in &mut t.actions {
            spec.bounds.clamp_action(&mut u.0);
        }
        if t.actions.is_empty() {
            // a robot already at its goal still needs one step
            t.actions.push(ControlAction(vec![T::zero(); rt.action_dim()]));
            t.states.push(t.states[0].clone());
        }
        out.push(t);
    }
    Ok(out)
}

/// Repairs a discontinuous joint guess into feasible trajectories.
pub fn optimize<T: Scalar>(
    guess: &JointGuess<T>,
    instance: &ProblemInstance<T>,
    w: &OptWeights<T>,
) -> Result<OptimizedSolution<T>, OptFailure<T>> {
    let robots = prepare_guess(guess, instance)?;
    let horizons = robots.iter().map(|r| r.horizon()).collect();
    let mut st = ObjectiveStructure::new(instance, horizons, w.beta, w.collision_margin);
    let mut z = st.pack(&robots, guess.dt);

    let mut lo = Vec::with_capacity(z.len());
    let mut hi = Vec::with_capacity(z.len());
    for (r, spec) in robots.iter().zip(&instance.robots) {
        for _ in 0..r.horizon() {
            lo.extend_from_slice(&spec.bounds.action_lo);
            hi.extend_from_slice(&spec.bounds.action_hi);
        }
    }
    lo.push(guess.dt);
    hi.push(guess.dt);

    let mut trace = Vec::new();
    if w.tracking_weight > T::zero() {
        st.targets = Some(robots.iter().map(|r| r.states.clone()).collect());
        let pen = PenaltyWeights {
            tracking: w.tracking_weight,
            ..PenaltyWeights::uniform(w.penalty_initial)
        };
        let iters = minimize(&st, &pen, &mut z, &lo, &hi, w.max_iterations);
        debug!(iterations = iters, "tracking warm start done");
        st.targets = None;
    }
    let n = z.len();
    lo[n - 1] = guess.dt * w.dt_min_factor;
    hi[n - 1] = guess.dt * w.dt_max_factor;

    let mut weight = w.penalty_initial;
    let mut best: Option<OptimizedSolution<T>> = None;
    for round in 0..w.max_rounds {
        let pen = PenaltyWeights::uniform(weight);
        let iterations = minimize(&st, &pen, &mut z, &lo, &hi, w.max_iterations);
        let eval = objective_and_gradient(&st, &z, &pen, None);
        let (trajs, dt) = st.unpack(&z);
        let report = feasibility_report(&trajs, dt, instance);
        trace.push(RoundTrace {
            weight,
            objective: eval.cost,
            violation: eval.violation,
            iterations,
        });
        debug!(
            round,
            weight = weight.as_f64(),
            objective = eval.cost.as_f64(),
            violation = eval.violation.as_f64(),
            iterations,
            "penalty round"
        );
        let sol = OptimizedSolution {
            robots: trajs,
            dt,
            objective: eval.cost,
            report,
            trace: trace.clone(),
        };
        let done = sol.report.passed(w);
        best = Some(sol);
        if done {
            break;
        }
        weight = weight * w.penalty_multiplier;
    }
    let best = best.ok_or_else(|| OptFailure::BadGuess("no optimization rounds".into()))?;
    if best.report.passed(w) {
        Ok(best)
    } else {
        Err(OptFailure::Infeasible {
            failed: best.report.failures(w),
            best: Box::new(best),
        })
    }
}

/// Projected limited-memory BFGS with backtracking. Returns the iteration count.
fn minimize<T: Scalar>(
    st: &ObjectiveStructure<'_, T>,
    pen: &PenaltyWeights<T>,
    z: &mut Vec<T>,
    lo: &[T],
    hi: &[T],
    max_iter: usize,
) -> usize {
    const MEMORY: usize = 8;
    let n = z.len();
    let project = |v: &mut [T]| {
        for i in 0..n {
            v[i] = v[i].max(lo[i]).min(hi[i]);
        }
    };
    project(z);
    let mut g = vec![T::zero(); n];
    let mut f = objective_and_gradient(st, z, pen, Some(&mut g)).value;
    let mut hist: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::new();
    let mut trial = vec![T::zero(); n];
    let mut g_trial = vec![T::zero(); n];
    let eps = T::epsilon().sqrt() * T::lit(1e-3);
    let mut stalled = 0;
    for it in 0..max_iter {
        // variables pinned at a bound with the gradient pushing outward stay fixed
        let free: Vec<bool> = (0..n)
            .map(|i| {
                let at_lo = z[i] <= lo[i] + eps * (T::one() + lo[i].abs()) && g[i] > T::zero();
                let at_hi = z[i] >= hi[i] - eps * (T::one() + hi[i].abs()) && g[i] < T::zero();
                !(at_lo || at_hi) && lo[i] < hi[i]
            })
            .collect();
        let pg = (0..n)
            .filter(|&i| free[i])
            .fold(T::zero(), |a, i| a.max(g[i].abs()));
        if pg <= T::lit(1e-10) * (T::one() + f.abs()) {
            return it;
        }
        let mut d: Vec<T> = (0..n).map(|i| if free[i] { -g[i] } else { T::zero() }).collect();
        two_loop(&hist, &mut d, &free);
        let mut slope = (0..n).fold(T::zero(), |a, i| a + g[i] * d[i]);
        if !(slope < T::zero()) {
            hist.clear();
            d = (0..n).map(|i| if free[i] { -g[i] } else { T::zero() }).collect();
            slope = (0..n).fold(T::zero(), |a, i| a + g[i] * d[i]);
        }
        let mut step = T::one();
        if hist.is_empty() {
            // first step: move at most 0.1 in any variable
            let dmax = d.iter().fold(T::zero(), |a, v| a.max(v.abs()));
            if dmax > T::lit(0.1) {
                step = T::lit(0.1) / dmax;
            }
        }
        let mut accepted = false;
        let mut f_trial = f;
        for _ in 0..40 {
            for i in 0..n {
                trial[i] = z[i] + step * d[i];
            }
            project(&mut trial);
            let dec = (0..n).fold(T::zero(), |a, i| a + g[i] * (trial[i] - z[i]));
            f_trial = objective_and_gradient(st, &trial, pen, Some(&mut g_trial)).value;
            if f_trial <= f + T::lit(1e-4) * dec.min(T::zero()) && f_trial.is_finite() {
                accepted = true;
                break;
            }
            step = step * T::lit(0.5);
        }
        let _ = slope;
        if !accepted {
            if hist.is_empty() {
                return it;
            }
            hist.clear();
            continue;
        }
        let s: Vec<T> = (0..n).map(|i| trial[i] - z[i]).collect();
        let y: Vec<T> = (0..n).map(|i| g_trial[i] - g[i]).collect();
        let sy = s.iter().zip(&y).fold(T::zero(), |a, (&p, &q)| a + p * q);
        let yy = y.iter().fold(T::zero(), |a, &q| a + q * q);
        if sy > T::epsilon() * yy.sqrt() * s.iter().fold(T::zero(), |a, &p| a + p * p).sqrt() {
            if hist.len() == MEMORY {
                hist.pop_front();
            }
            hist.push_back((s, y, T::one() / sy));
        }
        let rel = (f - f_trial).abs() / (T::one() + f.abs());
        std::mem::swap(z, &mut trial);
        std::mem::swap(&mut g, &mut g_trial);
        f = f_trial;
        if rel < T::lit(1e-15) {
            stalled += 1;
            if stalled >= 5 {
                return it + 1;
            }
        } else {
            stalled = 0;
        }
    }
    max_iter
}

/// Applies the inverse Hessian approximation to `d` in place, restricted to free variables.
fn two_loop<T: Scalar>(hist: &VecDeque<(Vec<T>, Vec<T>, T)>, d: &mut [T], free: &[bool]) {
    if hist.is_empty() {
        return;
    }
    let dot = |a: &[T], b: &[T]| {
        a.iter()
            .zip(b)
            .zip(free)
            .fold(T::zero(), |acc, ((&p, &q), &f)| if f { acc + p * q } else { acc })
    };
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let a = *rho * dot(s, d);
        for i in 0..d.len() {
            if free[i] {
                d[i] = d[i] - a * y[i];
            }
        }
        alphas.push(a);
    }
    let (s, y, _) = hist.back().unwrap();
    let yy = dot(y, y);
    let gamma = if yy > T::zero() { dot(s, y) / yy } else { T::one() };
    let gamma = if gamma > T::zero() { gamma } else { T::one() };
    for v in d.iter_mut() {
        *v = *v * gamma;
    }
    for ((s, y, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
        let b = *rho * dot(y, d);
        for i in 0..d.len() {
            if free[i] {
                d[i] = d[i] + (a - b) * s[i];
            }
        }
    }
}
