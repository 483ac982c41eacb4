//! Motion primitives: generation by random control rollouts, translation onto
//! a state, applicability queries and the YAML primitive file.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{distance_slices, sample_state, Bounds, ControlAction, MetricWeights, RobotState, RobotType};
use crate::scalar::{angle_diff, Scalar};

/// Actions are held constant for this many steps during generation.
pub const ACTION_HOLD_STEPS: usize = 5;
/// Tolerance of the Euler-consistency check applied to loaded primitives.
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PrimitiveError {
    #[error("could not generate {count} valid primitives within {attempts} rollouts")]
    Generation { count: usize, attempts: usize },
    #[error("invalid generation request: {0}")]
    InvalidRequest(String),
    #[error("primitive file is for `{found}`, expected `{expected}`")]
    WrongRobotType { expected: RobotType, found: RobotType },
    #[error("primitive {index}: {reason}")]
    Validation { index: usize, reason: String },
    #[error("malformed primitive file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A dynamics-consistent state/action sequence starting at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct MotionPrimitive<T> {
    pub robot_type: RobotType,
    /// `K + 1` states.
    pub states: Vec<RobotState<T>>,
    /// `K` actions.
    pub actions: Vec<ControlAction<T>>,
}

impl<T: Scalar> MotionPrimitive<T> {
    /// Number of actions `K`.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn duration(&self, dt: T) -> T {
        T::count(self.len()) * dt
    }

    pub fn start(&self) -> &RobotState<T> {
        &self.states[0]
    }

    /// Largest component-wise gap between `states[k+1]` and the Euler step
    /// from `states[k]` (angles compared on the circle).
    pub fn euler_residual(&self, dt: T) -> T {
        let n = self.robot_type.state_dim();
        let mut next = vec![T::zero(); n];
        let mut worst = T::zero();
        for (k, u) in self.actions.iter().enumerate() {
            self.robot_type
                .step_into(self.states[k].as_slice(), u.as_slice(), dt, &mut next);
            for i in 0..n {
                let target = self.states[k + 1].0[i];
                let d = if self.robot_type.is_angle(i) {
                    angle_diff(target, next[i])
                } else {
                    target - next[i]
                };
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    /// Checks structure, canonical start, bounds and Euler consistency.
    pub fn validate(&self, dt: T, bounds: &Bounds<T>) -> Result<(), String> {
        let rt = self.robot_type;
        if self.states.len() != self.actions.len() + 1 {
            return Err(format!(
                "{} states for {} actions",
                self.states.len(),
                self.actions.len()
            ));
        }
        if self.states.iter().any(|s| s.len() != rt.state_dim())
            || self.actions.iter().any(|a| a.0.len() != rt.action_dim())
        {
            return Err("dimension mismatch".into());
        }
        let tol = T::lit(CONSISTENCY_TOL);
        let p = self.states[0].position();
        if p[0].abs() > tol || p[1].abs() > tol {
            return Err("start is not at the origin".into());
        }
        if let Some(k) = self.actions.iter().position(|u| !bounds.action_within(u.as_slice(), tol)) {
            return Err(format!("action {k} out of bounds"));
        }
        let r = self.euler_residual(dt);
        if !(r <= tol) {
            return Err(format!("Euler-inconsistent (residual {r})"));
        }
        Ok(())
    }

    /// Moves the primitive so that its first state is at the origin.
    pub fn canonicalize(&mut self) {
        let [x0, y0] = self.states[0].position();
        if x0 == T::zero() && y0 == T::zero() {
            return;
        }
        for s in &mut self.states {
            s.0[0] = s.0[0] - x0;
            s.0[1] = s.0[1] - y0;
        }
    }
}

/// `x ⊕ m`: the primitive's states translated so that its start position
/// coincides with `x`'s position. Non-positional components are copied from
/// the primitive unchanged.
pub fn apply<T: Scalar>(x: &RobotState<T>, m: &MotionPrimitive<T>) -> Vec<RobotState<T>> {
    let [px, py] = x.position();
    let [ox, oy] = m.states[0].position();
    let (dx, dy) = (px - ox, py - oy);
    m.states.iter().map(|s| s.translated(dx, dy)).collect()
}

/// State `k` of `x ⊕ m` without materializing the whole sequence.
#[inline]
pub fn applied_state<T: Scalar>(x: &[T], m: &MotionPrimitive<T>, k: usize, out: &mut Vec<T>) {
    out.clear();
    out.extend_from_slice(m.states[k].as_slice());
    out[0] = out[0] + x[0] - m.states[0].0[0];
    out[1] = out[1] + x[1] - m.states[0].0[1];
}

/// Incremental primitive generator with its own deterministic RNG stream, so
/// that later batches extend rather than replace earlier ones.
pub struct PrimitiveGenerator<T> {
    robot_type: RobotType,
    bounds: Bounds<T>,
    dt: T,
    length_range: (usize, usize),
    rng: ChaCha8Rng,
}

impl<T: Scalar> PrimitiveGenerator<T> {
    pub fn new(
        robot_type: RobotType,
        bounds: Bounds<T>,
        dt: T,
        length_range: (usize, usize),
        seed: u64,
    ) -> Result<Self, PrimitiveError> {
        let (kmin, kmax) = length_range;
        if kmin == 0 || kmin > kmax {
            return Err(PrimitiveError::InvalidRequest(format!(
                "length range [{kmin}, {kmax}]"
            )));
        }
        bounds
            .validate(robot_type)
            .map_err(|e| PrimitiveError::InvalidRequest(e.to_string()))?;
        Ok(Self {
            robot_type,
            bounds,
            dt,
            length_range,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn random_action(&mut self) -> ControlAction<T> {
        let v = self
            .bounds
            .action_lo
            .iter()
            .zip(&self.bounds.action_hi)
            .map(|(&lo, &hi)| lo + (hi - lo) * T::lit(self.rng.gen::<f64>()))
            .collect();
        ControlAction(v)
    }

    fn rollout(&mut self) -> Option<MotionPrimitive<T>> {
        let rt = self.robot_type;
        let start = sample_state(rt, &mut self.rng, &self.bounds, ([T::zero(); 2], [T::zero(); 2]));
        let k = self.rng.gen_range(self.length_range.0..=self.length_range.1);
        let mut states = Vec::with_capacity(k + 1);
        let mut actions = Vec::with_capacity(k);
        states.push(start);
        let mut action = self.random_action();
        let mut next = vec![T::zero(); rt.state_dim()];
        for step in 0..k {
            if step > 0 && step % ACTION_HOLD_STEPS == 0 {
                action = self.random_action();
            }
            rt.step_into(states[step].as_slice(), action.as_slice(), self.dt, &mut next);
            if !self.bounds.state_within(rt, &next, T::zero()) {
                return None;
            }
            states.push(RobotState(next.clone()));
            actions.push(action.clone());
        }
        Some(MotionPrimitive {
            robot_type: rt,
            states,
            actions,
        })
    }

    /// Produces `count` more primitives, rejecting rollouts that leave the
    /// state bounds.
    pub fn generate(&mut self, count: usize) -> Result<Vec<MotionPrimitive<T>>, PrimitiveError> {
        let budget = 1000 * count;
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count {
            if attempts >= budget {
                return Err(PrimitiveError::Generation { count, attempts });
            }
            attempts += 1;
            if let Some(m) = self.rollout() {
                out.push(m);
            }
        }
        Ok(out)
    }
}

/// One-shot generation of `count` primitives.
pub fn generate<T: Scalar>(
    robot_type: RobotType,
    bounds: &Bounds<T>,
    dt: T,
    count: usize,
    length_range: (usize, usize),
    seed: u64,
) -> Result<Vec<MotionPrimitive<T>>, PrimitiveError> {
    if count == 0 {
        return Err(PrimitiveError::InvalidRequest("count must be positive".into()));
    }
    PrimitiveGenerator::new(robot_type, bounds.clone(), dt, length_range, seed)?.generate(count)
}

/// Primitives of one robot type plus an index over their start states
/// (position excluded).
#[derive(Clone, Debug)]
pub struct PrimitiveSet<T> {
    robot_type: RobotType,
    dt: T,
    weights: MetricWeights<T>,
    primitives: Vec<MotionPrimitive<T>>,
    /// Start states of all primitives, flattened.
    starts: Vec<T>,
}

impl<T: Scalar> PrimitiveSet<T> {
    pub fn new(
        robot_type: RobotType,
        dt: T,
        weights: MetricWeights<T>,
        primitives: Vec<MotionPrimitive<T>>,
    ) -> Self {
        let mut set = Self {
            robot_type,
            dt,
            weights,
            primitives: Vec::new(),
            starts: Vec::new(),
        };
        set.extend(primitives);
        set
    }

    pub fn extend(&mut self, primitives: impl IntoIterator<Item = MotionPrimitive<T>>) {
        for m in primitives {
            debug_assert_eq!(m.robot_type, self.robot_type);
            self.starts.extend_from_slice(m.states[0].as_slice());
            self.primitives.push(m);
        }
    }

    pub fn robot_type(&self) -> RobotType {
        self.robot_type
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn weights(&self) -> &MetricWeights<T> {
        &self.weights
    }

    pub fn primitives(&self) -> &[MotionPrimitive<T>] {
        &self.primitives
    }

    pub fn get(&self, i: usize) -> &MotionPrimitive<T> {
        &self.primitives[i]
    }

    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    /// Number of entries in the start-state index.
    pub fn index_len(&self) -> usize {
        self.starts.len() / self.robot_type.state_dim()
    }

    /// Indices of all primitives whose start state is within `radius` of `x`,
    /// ignoring position. Exact linear scan.
    pub fn query_applicable_indices(&self, x: &[T], radius: T) -> Vec<usize> {
        let n = self.robot_type.state_dim();
        let mut out = Vec::new();
        for (i, start) in self.starts.chunks_exact(n).enumerate() {
            if distance_slices(self.robot_type, x, start, &self.weights.0, true) <= radius {
                out.push(i);
            }
        }
        out
    }

    pub fn query_applicable(&self, x: &RobotState<T>, radius: T) -> Vec<&MotionPrimitive<T>> {
        self.query_applicable_indices(x.as_slice(), radius)
            .into_iter()
            .map(|i| &self.primitives[i])
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PrimitiveError> {
        let file = PrimitiveFile {
            robot_type: self.robot_type,
            dt: self.dt.as_f64(),
            primitives: self
                .primitives
                .iter()
                .map(|m| PrimitiveRecord {
                    states: m.states.iter().map(|s| s.0.iter().map(|v| v.as_f64()).collect()).collect(),
                    actions: m.actions.iter().map(|u| u.0.iter().map(|v| v.as_f64()).collect()).collect(),
                })
                .collect(),
        };
        let text = serde_yaml::to_string(&file).map_err(|e| PrimitiveError::Parse(e.to_string()))?;
        fs::write(path, text)?;
        Ok(())
    }

    /// Loads and validates a primitive file written by [`PrimitiveSet::save`]
    /// (or produced externally in the same format). Start states are
    /// translated to the origin.
    pub fn load(
        path: impl AsRef<Path>,
        robot_type: RobotType,
        bounds: &Bounds<T>,
        weights: MetricWeights<T>,
    ) -> Result<Self, PrimitiveError> {
        let text = fs::read_to_string(path)?;
        Self::from_yaml(&text, robot_type, bounds, weights)
    }

    pub fn from_yaml(
        text: &str,
        robot_type: RobotType,
        bounds: &Bounds<T>,
        weights: MetricWeights<T>,
    ) -> Result<Self, PrimitiveError> {
        let file: PrimitiveFile =
            serde_yaml::from_str(text).map_err(|e| PrimitiveError::Parse(e.to_string()))?;
        if file.robot_type != robot_type {
            return Err(PrimitiveError::WrongRobotType {
                expected: robot_type,
                found: file.robot_type,
            });
        }
        if !(file.dt > 0.0) {
            return Err(PrimitiveError::Parse(format!("dt must be positive, got {}", file.dt)));
        }
        let dt = T::lit(file.dt);
        let mut prims = Vec::with_capacity(file.primitives.len());
        for (index, rec) in file.primitives.into_iter().enumerate() {
            let mut m = MotionPrimitive {
                robot_type,
                states: rec.states.iter().map(|s| RobotState::from_f64(s)).collect(),
                actions: rec.actions.iter().map(|u| ControlAction::from_f64(u)).collect(),
            };
            if m.states.is_empty() {
                return Err(PrimitiveError::Validation {
                    index,
                    reason: "no states".into(),
                });
            }
            if m.states[0].len() == robot_type.state_dim() {
                m.canonicalize();
            }
            m.validate(dt, bounds)
                .map_err(|reason| PrimitiveError::Validation { index, reason })?;
            prims.push(m);
        }
        Ok(Self::new(robot_type, dt, weights, prims))
    }
}

#[derive(Serialize, Deserialize)]
struct PrimitiveFile {
    robot_type: RobotType,
    dt: f64,
    primitives: Vec<PrimitiveRecord>,
}

#[derive(Serialize, Deserialize)]
struct PrimitiveRecord {
    states: Vec<Vec<f64>>,
    actions: Vec<Vec<f64>>,
}
