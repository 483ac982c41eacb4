//! Scene and solution files, the end-to-end validator, SVG rendering and the
//! benchmark harness.

use std::fmt::Write as _;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cbs::{solve, Emission, PlannerConfig, SolveError};
use crate::dynamics::{Bounds, ControlAction, RobotState, RobotType};
use crate::geometry::{footprint_distance, in_free_space, place, PlacedShape, RobotBody, Shape, Workspace};
use crate::scalar::{angle_diff, Scalar};
use crate::trajopt::RobotTrajectory;

/// One robot of a problem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotSpec<T> {
    pub robot_type: RobotType,
    pub shape: Shape<T>,
    pub start: RobotState<T>,
    pub goal: RobotState<T>,
    pub bounds: Bounds<T>,
}

impl<T: Scalar> RobotSpec<T> {
    /// Robot with the default bounds of its type.
    pub fn new(robot_type: RobotType, shape: Shape<T>, start: RobotState<T>, goal: RobotState<T>) -> Self {
        Self {
            robot_type,
            shape,
            start,
            goal,
            bounds: Bounds::default_for(robot_type),
        }
    }

    pub fn body(&self) -> RobotBody<T> {
        RobotBody {
            robot_type: self.robot_type,
            shape: self.shape,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance<T> {
    pub name: String,
    pub workspace: Workspace<T>,
    pub robots: Vec<RobotSpec<T>>,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read {}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
}

impl<T: Scalar> ProblemInstance<T> {
    /// Checks dimensions, free-space starts and goals, and mutual clearance.
    pub fn validate(&self) -> Result<(), InstanceError> {
        let bad = |m: String| Err(InstanceError::Invalid(m));
        if !self.workspace.is_valid() {
            return bad("workspace bounds or obstacle sizes are invalid".into());
        }
        if self.robots.is_empty() {
            return bad("no robots".into());
        }
        for (i, r) in self.robots.iter().enumerate() {
            let n = r.robot_type.state_dim();
            if r.start.len() != n || r.goal.len() != n {
                return bad(format!(
                    "robot {i} ({}) needs {n}-dimensional start and goal",
                    r.robot_type
                ));
            }
            if r.start.0.iter().chain(&r.goal.0).any(|v| !v.is_finite()) {
                return bad(format!("robot {i} has a non-finite start or goal"));
            }
            if !r.shape.is_valid() {
                return bad(format!("robot {i} has an invalid shape"));
            }
            if r.bounds.validate(r.robot_type).is_err() {
                return bad(format!("robot {i} has invalid bounds"));
            }
            for (what, x) in [("start", &r.start), ("goal", &r.goal)] {
                if !in_free_space(place(r.robot_type, &r.shape, x.as_slice()).parts(), &self.workspace) {
                    return bad(format!("{what} of robot {i} in collision"));
                }
                if !r.bounds.state_within(r.robot_type, x.as_slice(), T::zero()) {
                    return bad(format!("{what} of robot {i} violates the state bounds"));
                }
            }
        }
        for i in 0..self.robots.len() {
            for j in i + 1..self.robots.len() {
                let (a, b) = (&self.robots[i], &self.robots[j]);
                for (what, xa, xb) in [("starts", &a.start, &b.start), ("goals", &a.goal, &b.goal)] {
                    let fa = place(a.robot_type, &a.shape, xa.as_slice());
                    let fb = place(b.robot_type, &b.shape, xb.as_slice());
                    if footprint_distance(&fa, &fb) <= T::zero() {
                        return bad(format!("{what} of robots {i} and {j} overlap"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    environment: EnvironmentFile,
    robots: Vec<RobotFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvironmentFile {
    min: [f64; 2],
    max: [f64; 2],
    #[serde(default)]
    obstacles: Vec<ObstacleFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ObstacleKind {
    Box,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleFile {
    #[serde(rename = "type")]
    kind: ObstacleKind,
    center: [f64; 2],
    size: [f64; 2],
}

/// Exactly one of `disk: r` or `box: [length, width]`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    disk: Option<f64>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    rect: Option<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotFile {
    #[serde(rename = "type")]
    robot_type: RobotType,
    shape: ShapeFile,
    start: Vec<f64>,
    goal: Vec<f64>,
}

impl ProblemInstance<f64> {
    /// Parses and validates a scene from YAML text.
    pub fn from_yaml(text: &str, name: &str) -> Result<Self, InstanceError> {
        let file: SceneFile = serde_yaml::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
        let obstacles = file
            .environment
            .obstacles
            .iter()
            .map(|o| PlacedShape::aabb(o.center, o.size))
            .collect();
        let robots = file
            .robots
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let shape = match (r.shape.disk, r.shape.rect) {
                    (Some(radius), None) => Shape::disk(radius),
                    (None, Some([l, w])) => Shape::rect(l, w),
                    _ => {
                        return Err(InstanceError::Parse(format!(
                            "robot {i}: shape needs exactly one of `disk` or `box`"
                        )))
                    }
                };
                let mut start = RobotState(r.start);
                let mut goal = RobotState(r.goal);
                if start.len() == r.robot_type.state_dim() && goal.len() == r.robot_type.state_dim() {
                    r.robot_type.wrap_angles(&mut start.0);
                    r.robot_type.wrap_angles(&mut goal.0);
                }
                Ok(RobotSpec::new(r.robot_type, shape, start, goal))
            })
            .collect::<Result<_, _>>()?;
        let inst = Self {
            name: file.name.unwrap_or_else(|| name.to_string()),
            workspace: Workspace::new(file.environment.min, file.environment.max, obstacles),
            robots,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_yaml(&self) -> String {
        let file = SceneFile {
            name: Some(self.name.clone()),
            environment: EnvironmentFile {
                min: self.workspace.lo,
                max: self.workspace.hi,
                obstacles: self
                    .workspace
                    .obstacles
                    .iter()
                    .map(|o| {
                        let h = match o.shape {
                            Shape::OrientedBox { half_extents } => half_extents,
                            Shape::Disk { radius } => [radius, radius],
                        };
                        ObstacleFile {
                            kind: ObstacleKind::Box,
                            center: o.position,
                            size: [2.0 * h[0], 2.0 * h[1]],
                        }
                    })
                    .collect(),
            },
            robots: self
                .robots
                .iter()
                .map(|r| RobotFile {
                    robot_type: r.robot_type,
                    shape: match r.shape {
                        Shape::Disk { radius } => ShapeFile {
                            disk: Some(radius),
                            rect: None,
                        },
                        Shape::OrientedBox { half_extents: h } => ShapeFile {
                            disk: None,
                            rect: Some([2.0 * h[0], 2.0 * h[1]]),
                        },
                    },
                    start: r.start.0.clone(),
                    goal: r.goal.0.clone(),
                })
                .collect(),
        };
        serde_yaml::to_string(&file).expect("scene serializes")
    }
}

/// Reads and validates a scene file. The file stem is the default name.
pub fn parse_instance(path: impl AsRef<Path>) -> Result<ProblemInstance<f64>, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    ProblemInstance::from_yaml(&text, stem).map_err(|e| match e {
        InstanceError::Parse(m) => InstanceError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolutionMetadata {
    pub iteration: usize,
    pub delta: f64,
    /// Seconds from the start of planning to this solution.
    pub wall_time: f64,
}

/// Planner output: one trajectory per robot on a shared timestep.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySet {
    pub robots: Vec<RobotTrajectory<f64>>,
    pub dt: f64,
    /// Sum of arrival times, `sum_i K_i * dt`.
    pub cost: f64,
    pub metadata: SolutionMetadata,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionFile {
    dt: f64,
    cost: f64,
    #[serde(default)]
    metadata: SolutionMetadata,
    robots: Vec<TrajectoryFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryFile {
    states: Vec<Vec<f64>>,
    actions: Vec<Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum SolutionError {
    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("stored cost {stored} differs from recomputed cost {recomputed}")]
    Cost { stored: f64, recomputed: f64 },
}

impl TrajectorySet {
    pub fn from_emission(e: &Emission<f64>) -> Self {
        Self {
            robots: e.solution.robots.clone(),
            dt: e.solution.dt,
            cost: e.cost,
            metadata: SolutionMetadata {
                iteration: e.iteration,
                delta: e.delta,
                wall_time: e.wall_time,
            },
        }
    }

    pub fn recomputed_cost(&self) -> f64 {
        self.robots.iter().map(|r| r.horizon() as f64 * self.dt).sum()
    }

    fn check(&self) -> Result<(), SolutionError> {
        if self.robots.is_empty() {
            return Err(SolutionError::Schema("empty robot list".into()));
        }
        if !(self.dt > 0.0) {
            return Err(SolutionError::Schema("dt must be positive".into()));
        }
        for (i, r) in self.robots.iter().enumerate() {
            if r.states.len() != r.actions.len() + 1 {
                return Err(SolutionError::Schema(format!(
                    "robot {i}: {} states for {} actions",
                    r.states.len(),
                    r.actions.len()
                )));
            }
        }
        let recomputed = self.recomputed_cost();
        if (recomputed - self.cost).abs() > 1e-9 * (1.0 + recomputed.abs()) {
            return Err(SolutionError::Cost {
                stored: self.cost,
                recomputed,
            });
        }
        Ok(())
    }

    pub fn to_yaml(&self) -> Result<String, SolutionError> {
        self.check()?;
        let file = SolutionFile {
            dt: self.dt,
            cost: self.cost,
            metadata: self.metadata.clone(),
            robots: self
                .robots
                .iter()
                .map(|r| TrajectoryFile {
                    states: r.states.iter().map(|s| s.0.clone()).collect(),
                    actions: r.actions.iter().map(|u| u.0.clone()).collect(),
                })
                .collect(),
        };
        serde_yaml::to_string(&file).map_err(|e| SolutionError::Schema(e.to_string()))
    }

    pub fn from_yaml(text: &str) -> Result<Self, SolutionError> {
        let file: SolutionFile = serde_yaml::from_str(text).map_err(|e| SolutionError::Schema(e.to_string()))?;
        let ts = Self {
            robots: file
                .robots
                .into_iter()
                .map(|r| RobotTrajectory {
                    states: r.states.into_iter().map(RobotState).collect(),
                    actions: r.actions.into_iter().map(ControlAction).collect(),
                })
                .collect(),
            dt: file.dt,
            cost: file.cost,
            metadata: file.metadata,
        };
        ts.check()?;
        Ok(ts)
    }
}

pub fn write_solution(ts: &TrajectorySet, path: impl AsRef<Path>) -> Result<(), SolutionError> {
    let path = path.as_ref();
    fs::write(path, ts.to_yaml()?).map_err(|source| SolutionError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_solution(path: impl AsRef<Path>) -> Result<TrajectorySet, SolutionError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SolutionError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    TrajectorySet::from_yaml(&text)
}

/// Acceptance thresholds of the end-to-end validator.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatorTolerances {
    pub residual: f64,
    pub action: f64,
    pub margin: f64,
    pub goal_position: f64,
    pub goal_other: f64,
    pub start: f64,
}

impl Default for ValidatorTolerances {
    fn default() -> Self {
        Self {
            residual: 1e-6,
            action: 1e-9,
            margin: -1e-4,
            goal_position: 1e-3,
            goal_other: 1e-2,
            start: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationOutcome {
    /// One line per violated condition; empty when valid.
    pub failures: Vec<String>,
    pub max_residual: f64,
    pub min_margin: f64,
}

impl ValidationOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// End-to-end check of a trajectory set against its instance, written
/// without reference to planner internals: Euler consistency, action
/// bounds, free space, pairwise clearance with parking, start and goal.
pub fn validate_solution(
    instance: &ProblemInstance<f64>,
    ts: &TrajectorySet,
    tol: &ValidatorTolerances,
) -> ValidationOutcome {
    let mut out = ValidationOutcome {
        failures: Vec::new(),
        max_residual: 0.0,
        min_margin: f64::INFINITY,
    };
    if ts.robots.len() != instance.robots.len() {
        out.failures.push(format!(
            "{} trajectories for {} robots",
            ts.robots.len(),
            instance.robots.len()
        ));
        return out;
    }
    if let Err(e) = ts.check() {
        out.failures.push(e.to_string());
        return out;
    }
    let diff = |rt: RobotType, c: usize, a: f64, b: f64| if rt.is_angle(c) { angle_diff(a, b) } else { a - b };
    for (i, (traj, spec)) in ts.robots.iter().zip(&instance.robots).enumerate() {
        let rt = spec.robot_type;
        let n = rt.state_dim();
        if traj.states.iter().any(|s| s.len() != n) || traj.actions.iter().any(|u| u.0.len() != rt.action_dim()) {
            out.failures.push(format!("robot {i}: wrong state or action dimension"));
            continue;
        }
        let mut rate = vec![0.0; n];
        for (k, u) in traj.actions.iter().enumerate() {
            let x = &traj.states[k].0;
            rt.rate(x, &u.0, &mut rate);
            let res = (0..n)
                .map(|c| diff(rt, c, traj.states[k + 1].0[c], x[c] + ts.dt * rate[c]).abs())
                .fold(0.0, f64::max);
            out.max_residual = out.max_residual.max(res);
            if res > tol.residual {
                out.failures.push(format!("robot {i} step {k}: Euler residual {res:.3e}"));
            }
            if !spec.bounds.action_within(&u.0, tol.action) {
                out.failures.push(format!("robot {i} step {k}: action {:?} out of bounds", u.0));
            }
        }
        for (k, x) in traj.states.iter().enumerate() {
            if !in_free_space(place(rt, &spec.shape, &x.0).parts(), &instance.workspace) {
                out.failures.push(format!("robot {i} step {k}: not in free space"));
            }
        }
        let start_err = (0..n).map(|c| diff(rt, c, traj.states[0].0[c], spec.start.0[c]).abs()).fold(0.0, f64::max);
        if start_err > tol.start {
            out.failures.push(format!("robot {i}: first state is {start_err:.3e} from the start"));
        }
        let last = &traj.states[traj.states.len() - 1].0;
        let pos = (last[0] - spec.goal.0[0]).hypot(last[1] - spec.goal.0[1]);
        let other = (2..n).map(|c| diff(rt, c, last[c], spec.goal.0[c]).abs()).fold(0.0, f64::max);
        if pos > tol.goal_position || other > tol.goal_other {
            out.failures.push(format!("robot {i}: goal missed by {pos:.3e} m / {other:.3e}"));
        }
    }
    if !out.failures.is_empty() {
        return out;
    }
    let horizon = ts.robots.iter().map(|r| r.horizon()).max().unwrap_or(0);
    for k in 0..=horizon {
        let prints: Vec<_> = ts
            .robots
            .iter()
            .zip(&instance.robots)
            .map(|(t, s)| place(s.robot_type, &s.shape, &t.state_at(k).0))
            .collect();
        for i in 0..prints.len() {
            for j in i + 1..prints.len() {
                let d = footprint_distance(&prints[i], &prints[j]);
                out.min_margin = out.min_margin.min(d);
                if d < tol.margin {
                    out.failures.push(format!("robots {i} and {j} at step {k}: distance {d:.3e}"));
                }
            }
        }
    }
    out
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

fn svg_shape(out: &mut String, p: &PlacedShape<f64>, map: &impl Fn([f64; 2]) -> (f64, f64), scale: f64, style: &str) {
    match p.shape {
        Shape::Disk { radius } => {
            let (cx, cy) = map(p.position);
            let _ = writeln!(out, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" {style}/>"#, radius * scale);
        }
        Shape::OrientedBox { half_extents: h } => {
            let (s, c) = p.orientation.sin_cos();
            let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)].map(|(a, b)| {
                let lx = a * h[0];
                let ly = b * h[1];
                map([p.position[0] + c * lx - s * ly, p.position[1] + s * lx + c * ly])
            });
            let pts: Vec<String> = corners.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
            let _ = writeln!(out, r#"<polygon points="{}" {style}/>"#, pts.join(" "));
        }
    }
}

/// Static SVG of the scene and, optionally, the trajectories with
/// footprints every `stride` steps.
pub fn render_svg_string(instance: &ProblemInstance<f64>, ts: Option<&TrajectorySet>) -> String {
    const SCALE: f64 = 200.0;
    const PAD: f64 = 10.0;
    let ws = &instance.workspace;
    let width = (ws.hi[0] - ws.lo[0]) * SCALE + 2.0 * PAD;
    let height = (ws.hi[1] - ws.lo[1]) * SCALE + 2.0 * PAD;
    let map = |p: [f64; 2]| (PAD + (p[0] - ws.lo[0]) * SCALE, PAD + (ws.hi[1] - p[1]) * SCALE);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="{PAD}" y="{PAD}" width="{:.3}" height="{:.3}" fill="white" stroke="black" stroke-width="2"/>"#,
        width - 2.0 * PAD,
        height - 2.0 * PAD
    );
    for o in &ws.obstacles {
        svg_shape(&mut out, o, &map, SCALE, r##"class="obstacle" fill="#777777""##);
    }
    for (i, r) in instance.robots.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for (x, dash) in [(&r.start, ""), (&r.goal, r#" stroke-dasharray="4 3""#)] {
            for part in place(r.robot_type, &r.shape, &x.0).parts() {
                let style = format!(r#"fill="none" stroke="{color}" stroke-width="1.5"{dash}"#);
                svg_shape(&mut out, part, &map, SCALE, &style);
            }
        }
    }
    if let Some(ts) = ts {
        for (i, (traj, r)) in ts.robots.iter().zip(&instance.robots).enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let stride = (traj.states.len() / 10).max(1);
            for x in traj.states.iter().step_by(stride) {
                for part in place(r.robot_type, &r.shape, &x.0).parts() {
                    let style = format!(r#"fill="{color}" fill-opacity="0.15" stroke="none""#);
                    svg_shape(&mut out, part, &map, SCALE, &style);
                }
            }
            let pts: Vec<String> = traj
                .states
                .iter()
                .map(|x| {
                    let (px, py) = map([x.0[0], x.0[1]]);
                    format!("{px:.3},{py:.3}")
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline class="trajectory" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                pts.join(" ")
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn render_svg(
    instance: &ProblemInstance<f64>,
    ts: Option<&TrajectorySet>,
    path: impl AsRef<Path>,
) -> std::io::Result<()> {
    fs::write(path, render_svg_string(instance, ts))
}

/// One (instance, trial) result; the field names are the CSV columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub instance: String,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    pub t_first_s: Option<f64>,
    #[serde(rename = "J_first_s")]
    pub j_first_s: Option<f64>,
    pub iterations: usize,
    pub expansions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub instance: String,
    pub trials: usize,
    /// Success rate.
    pub p: f64,
    pub median_t: Option<f64>,
    pub median_j: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

impl BenchmarkReport {
    /// Aggregates per instance, in order of first appearance.
    pub fn summaries(&self) -> Vec<InstanceSummary> {
        let mut names: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.instance.as_str()) {
                names.push(&r.instance);
            }
        }
        names
            .into_iter()
            .map(|name| {
                let rows: Vec<_> = self.rows.iter().filter(|r| r.instance == name).collect();
                let ok: Vec<_> = rows.iter().filter(|r| r.success).collect();
                InstanceSummary {
                    instance: name.to_string(),
                    trials: rows.len(),
                    p: ok.len() as f64 / rows.len() as f64,
                    median_t: median(ok.iter().filter_map(|r| r.t_first_s).collect()),
                    median_j: median(ok.iter().filter_map(|r| r.j_first_s).collect()),
                }
            })
            .collect()
    }

    pub fn write_csv(&self, writer: impl std::io::Write) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(reader: impl std::io::Read) -> Result<Self, csv::Error> {
        let mut r = csv::Reader::from_reader(reader);
        let rows = r.deserialize().collect::<Result<Vec<BenchmarkRow>, _>>()?;
        Ok(Self { rows })
    }
}

/// Loads every `*.yaml` scene in a directory, sorted by file name. Any
/// invalid scene is a configuration error for the whole suite.
pub fn load_suite(dir: impl AsRef<Path>) -> Result<Vec<ProblemInstance<f64>>, InstanceError> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|source| InstanceError::Io {
            path: dir.to_path_buf(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |x| x == "yaml" || x == "yml"))
        .collect();
    paths.sort();
    paths.iter().map(parse_instance).collect()
}

/// Runs one trial and classifies it with the end-to-end validator. Every
/// emission must validate for the trial to count as a success.
pub fn run_trial(instance: &ProblemInstance<f64>, config: &PlannerConfig, trial: usize) -> BenchmarkRow {
    let seed = config.seed.wrapping_add(trial as u64);
    let cfg = PlannerConfig {
        seed,
        ..config.clone()
    };
    let mut row = BenchmarkRow {
        instance: instance.name.clone(),
        trial,
        seed,
        success: false,
        t_first_s: None,
        j_first_s: None,
        iterations: 0,
        expansions: 0,
    };
    let result = catch_unwind(AssertUnwindSafe(|| solve(instance, &cfg, |_| true)));
    let report = match result {
        Ok(Ok(report)) => report,
        Ok(Err(SolveError::NoSolution(report))) => {
            row.iterations = report.iterations.len();
            row.expansions = report.expansions();
            return row;
        }
        Ok(Err(e)) => {
            tracing::warn!(instance = %instance.name, trial, error = %e, "trial failed");
            return row;
        }
        Err(_) => {
            tracing::warn!(instance = %instance.name, trial, "trial panicked");
            return row;
        }
    };
    row.iterations = report.iterations.len();
    row.expansions = report.expansions();
    let tol = ValidatorTolerances::default();
    let all_valid = report
        .emissions
        .iter()
        .all(|e| validate_solution(instance, &TrajectorySet::from_emission(e), &tol).passed());
    if let Some(first) = report.emissions.first() {
        row.success = all_valid;
        row.t_first_s = Some(first.wall_time);
        row.j_first_s = Some(first.cost);
    }
    row
}

/// Runs `trials` seeded trials per instance on up to `parallelism` threads.
/// Rows come back ordered by instance, then trial.
pub fn run_benchmark(
    instances: &[ProblemInstance<f64>],
    trials: usize,
    config: &PlannerConfig,
    parallelism: usize,
) -> Result<BenchmarkReport, String> {
    if trials == 0 {
        return Err("trials must be at least 1".into());
    }
    let jobs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..trials).map(move |t| (i, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| e.to_string())?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, t)| run_trial(&instances[i], config, t))
            .collect::<Vec<_>>()
    });
    Ok(BenchmarkReport { rows })
}
