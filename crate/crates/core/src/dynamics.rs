//! Robot dynamics: first-order unicycle, second-order unicycle, planar double
//! integrator and car with trailer, integrated with explicit Euler steps.
//!
//! All functions are pure. Angles are kept in (-pi, pi] after every step.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalar::{angle_diff, wrap_angle, Scalar};

/// Default integration step in seconds.
pub const DEFAULT_DT: f64 = 0.1;
/// Car wheelbase (m).
pub const CAR_WHEELBASE: f64 = 0.4;
/// Distance from the car's reference point to the trailer's center (m).
pub const TRAILER_HITCH: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("{what} has length {got}, expected {expected} for {robot}")]
    Dimension {
        what: &'static str,
        robot: RobotType,
        expected: usize,
        got: usize,
    },
    #[error("time step must be positive")]
    NonPositiveDt,
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("invalid metric weights: {0}")]
    InvalidWeights(String),
    #[error("unknown robot type `{0}`")]
    UnknownRobotType(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RobotType {
    #[serde(rename = "unicycle1")]
    Unicycle1,
    #[serde(rename = "unicycle2")]
    Unicycle2,
    #[serde(rename = "double_integrator2")]
    DoubleIntegrator2D,
    #[serde(rename = "car_with_trailer")]
    CarWithTrailer,
}

/// Physical meaning of one state component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentKind {
    Position,
    Angle,
    Velocity,
}

use ComponentKind::{Angle, Position, Velocity};

impl RobotType {
    pub const ALL: [RobotType; 4] = [
        RobotType::Unicycle1,
        RobotType::Unicycle2,
        RobotType::DoubleIntegrator2D,
        RobotType::CarWithTrailer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RobotType::Unicycle1 => "unicycle1",
            RobotType::Unicycle2 => "unicycle2",
            RobotType::DoubleIntegrator2D => "double_integrator2",
            RobotType::CarWithTrailer => "car_with_trailer",
        }
    }

    pub fn components(self) -> &'static [ComponentKind] {
        match self {
            RobotType::Unicycle1 => &[Position, Position, Angle],
            RobotType::Unicycle2 => &[Position, Position, Angle, Velocity, Velocity],
            RobotType::DoubleIntegrator2D => &[Position, Position, Velocity, Velocity],
            RobotType::CarWithTrailer => &[Position, Position, Angle, Angle],
        }
    }

    pub fn state_dim(self) -> usize {
        self.components().len()
    }

    pub fn action_dim(self) -> usize {
        2
    }

    #[inline]
    pub fn is_angle(self, i: usize) -> bool {
        self.components()[i] == Angle
    }

    /// Heading used to orient the collision shape, zero for robots without one.
    pub fn heading<T: Scalar>(self, x: &[T]) -> T {
        match self {
            RobotType::DoubleIntegrator2D => T::zero(),
            _ => x[2],
        }
    }

    fn check_state<T>(self, x: &[T]) -> Result<(), DynamicsError> {
        if x.len() != self.state_dim() {
            return Err(DynamicsError::Dimension {
                what: "state",
                robot: self,
                expected: self.state_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn check_action<T>(self, u: &[T]) -> Result<(), DynamicsError> {
        if u.len() != self.action_dim() {
            return Err(DynamicsError::Dimension {
                what: "action",
                robot: self,
                expected: self.action_dim(),
                got: u.len(),
            });
        }
        Ok(())
    }

    /// Continuous-time vector field `f(x, u)`.
    pub fn rate<T: Scalar>(self, x: &[T], u: &[T], out: &mut [T]) {
        match self {
            RobotType::Unicycle1 => {
                let (v, w) = (u[0], u[1]);
                out[0] = v * x[2].cos();
                out[1] = v * x[2].sin();
                out[2] = w;
            }
            RobotType::Unicycle2 => {
                let (v, w) = (x[3], x[4]);
                out[0] = v * x[2].cos();
                out[1] = v * x[2].sin();
                out[2] = w;
                out[3] = u[0];
                out[4] = u[1];
            }
            RobotType::DoubleIntegrator2D => {
                out[0] = x[2];
                out[1] = x[3];
                out[2] = u[0];
                out[3] = u[1];
            }
            RobotType::CarWithTrailer => {
                let (v, phi) = (u[0], u[1]);
                out[0] = v * x[2].cos();
                out[1] = v * x[2].sin();
                out[2] = v * phi.tan() / T::lit(CAR_WHEELBASE);
                out[3] = v / T::lit(TRAILER_HITCH) * (x[2] - x[3]).sin();
            }
        }
    }

    /// Euler step into a caller-provided buffer; dimensions are not checked.
    pub fn step_into<T: Scalar>(self, x: &[T], u: &[T], dt: T, out: &mut [T]) {
        self.rate(x, u, out);
        for (i, o) in out.iter_mut().enumerate() {
            *o = x[i] + *o * dt;
        }
        self.wrap_angles(out);
    }

    pub fn wrap_angles<T: Scalar>(self, x: &mut [T]) {
        for (i, kind) in self.components().iter().enumerate() {
            if *kind == Angle {
                x[i] = wrap_angle(x[i]);
            }
        }
    }

    /// `x + f(x, u) * dt` with angles re-wrapped.
    pub fn step<T: Scalar>(
        self,
        x: &RobotState<T>,
        u: &ControlAction<T>,
        dt: T,
    ) -> Result<RobotState<T>, DynamicsError> {
        self.check_state(x.as_slice())?;
        self.check_action(u.as_slice())?;
        if !(dt > T::zero()) {
            return Err(DynamicsError::NonPositiveDt);
        }
        let mut out = vec![T::zero(); self.state_dim()];
        self.step_into(x.as_slice(), u.as_slice(), dt, &mut out);
        Ok(RobotState(out))
    }

    /// Analytic Jacobians of the Euler step with respect to state and action.
    pub fn jacobians<T: Scalar>(
        self,
        x: &RobotState<T>,
        u: &ControlAction<T>,
        dt: T,
    ) -> Result<(Matrix<T>, Matrix<T>), DynamicsError> {
        self.check_state(x.as_slice())?;
        self.check_action(u.as_slice())?;
        let mut a = Matrix::zeros(self.state_dim(), self.state_dim());
        let mut b = Matrix::zeros(self.state_dim(), self.action_dim());
        self.jacobians_into(x.as_slice(), u.as_slice(), dt, &mut a, &mut b);
        Ok((a, b))
    }

    /// Writes the step Jacobians into preallocated matrices (fully overwritten).
    pub fn jacobians_into<T: Scalar>(
        self,
        x: &[T],
        u: &[T],
        dt: T,
        a: &mut Matrix<T>,
        b: &mut Matrix<T>,
    ) {
        let n = self.state_dim();
        *a = Matrix::identity(n);
        *b = Matrix::zeros(n, self.action_dim());
        match self {
            RobotType::Unicycle1 => {
                let (v, th) = (u[0], x[2]);
                a[(0, 2)] = -v * th.sin() * dt;
                a[(1, 2)] = v * th.cos() * dt;
                b[(0, 0)] = th.cos() * dt;
                b[(1, 0)] = th.sin() * dt;
                b[(2, 1)] = dt;
            }
            RobotType::Unicycle2 => {
                let (th, v) = (x[2], x[3]);
                a[(0, 2)] = -v * th.sin() * dt;
                a[(0, 3)] = th.cos() * dt;
                a[(1, 2)] = v * th.cos() * dt;
                a[(1, 3)] = th.sin() * dt;
                a[(2, 4)] = dt;
                b[(3, 0)] = dt;
                b[(4, 1)] = dt;
            }
            RobotType::DoubleIntegrator2D => {
                a[(0, 2)] = dt;
                a[(1, 3)] = dt;
                b[(2, 0)] = dt;
                b[(3, 1)] = dt;
            }
            RobotType::CarWithTrailer => {
                let (v, phi) = (u[0], u[1]);
                let (th0, th1) = (x[2], x[3]);
                let lc = T::lit(CAR_WHEELBASE);
                let lt = T::lit(TRAILER_HITCH);
                let c = (th0 - th1).cos();
                a[(0, 2)] = -v * th0.sin() * dt;
                a[(1, 2)] = v * th0.cos() * dt;
                a[(3, 2)] = v / lt * c * dt;
                a[(3, 3)] = T::one() - v / lt * c * dt;
                b[(0, 0)] = th0.cos() * dt;
                b[(1, 0)] = th0.sin() * dt;
                b[(2, 0)] = phi.tan() / lc * dt;
                let cphi = phi.cos();
                b[(2, 1)] = v / (lc * cphi * cphi) * dt;
                b[(3, 0)] = (th0 - th1).sin() / lt * dt;
            }
        }
    }
}

impl fmt::Display for RobotType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RobotType {
    type Err = DynamicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RobotType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| DynamicsError::UnknownRobotType(s.to_string()))
    }
}

/// Robot state vector; layout is given by [`RobotType::components`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotState<T>(pub Vec<T>);

/// Control input vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ControlAction<T>(pub Vec<T>);

impl<T: Scalar> RobotState<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self(values)
    }

    pub fn from_f64(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| T::lit(v)).collect())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn position(&self) -> [T; 2] {
        [self.0[0], self.0[1]]
    }

    pub fn translated(&self, dx: T, dy: T) -> Self {
        let mut v = self.0.clone();
        v[0] = v[0] + dx;
        v[1] = v[1] + dy;
        Self(v)
    }
}

impl<T: Scalar> ControlAction<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self(values)
    }

    pub fn from_f64(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| T::lit(v)).collect())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

/// Box bounds on states and actions. Angular state components carry infinite
/// bounds (they wrap instead); positions are limited by the workspace.
#[derive(Clone, Debug, PartialEq)]
pub struct Bounds<T> {
    pub state_lo: Vec<T>,
    pub state_hi: Vec<T>,
    pub action_lo: Vec<T>,
    pub action_hi: Vec<T>,
    /// Maximum |theta0 - theta1| for the car with trailer.
    pub max_hitch_angle: Option<T>,
}

impl<T: Scalar> Bounds<T> {
    pub fn default_for(robot: RobotType) -> Self {
        let inf = T::infinity();
        let l = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<_>>();
        let free = |n: usize| (vec![-inf; n], vec![inf; n]);
        match robot {
            RobotType::Unicycle1 => {
                let (state_lo, state_hi) = free(3);
                Self {
                    state_lo,
                    state_hi,
                    action_lo: l(&[-0.5, -0.5]),
                    action_hi: l(&[0.5, 0.5]),
                    max_hitch_angle: None,
                }
            }
            RobotType::Unicycle2 => Self {
                state_lo: vec![-inf, -inf, -inf, T::lit(-0.5), T::lit(-0.5)],
                state_hi: vec![inf, inf, inf, T::lit(0.5), T::lit(0.5)],
                action_lo: l(&[-0.25, -0.25]),
                action_hi: l(&[0.25, 0.25]),
                max_hitch_angle: None,
            },
            RobotType::DoubleIntegrator2D => Self {
                state_lo: vec![-inf, -inf, T::lit(-0.5), T::lit(-0.5)],
                state_hi: vec![inf, inf, T::lit(0.5), T::lit(0.5)],
                action_lo: l(&[-2.0, -2.0]),
                action_hi: l(&[2.0, 2.0]),
                max_hitch_angle: None,
            },
            RobotType::CarWithTrailer => {
                let (state_lo, state_hi) = free(4);
                Self {
                    state_lo,
                    state_hi,
                    action_lo: vec![T::lit(-0.1), -T::FRAC_PI_3()],
                    action_hi: vec![T::lit(0.5), T::FRAC_PI_3()],
                    max_hitch_angle: Some(T::FRAC_PI_4()),
                }
            }
        }
    }

    pub fn validate(&self, robot: RobotType) -> Result<(), DynamicsError> {
        if self.state_lo.len() != robot.state_dim() || self.state_hi.len() != robot.state_dim() {
            return Err(DynamicsError::InvalidBounds("state bound length".into()));
        }
        if self.action_lo.len() != robot.action_dim() || self.action_hi.len() != robot.action_dim()
        {
            return Err(DynamicsError::InvalidBounds("action bound length".into()));
        }
        let ordered = |lo: &[T], hi: &[T]| lo.iter().zip(hi).all(|(l, h)| l <= h);
        if !ordered(&self.state_lo, &self.state_hi) || !ordered(&self.action_lo, &self.action_hi) {
            return Err(DynamicsError::InvalidBounds("lo > hi".into()));
        }
        Ok(())
    }

    pub fn action_within(&self, u: &[T], tol: T) -> bool {
        u.iter()
            .zip(self.action_lo.iter().zip(&self.action_hi))
            .all(|(&v, (&lo, &hi))| v >= lo - tol && v <= hi + tol)
    }

    /// Largest amount by which the state exceeds its bounds (zero when inside).
    pub fn state_violation(&self, robot: RobotType, x: &[T]) -> T {
        let mut worst = T::zero();
        for i in 0..x.len() {
            if robot.is_angle(i) {
                continue;
            }
            worst = worst.max(self.state_lo[i] - x[i]).max(x[i] - self.state_hi[i]);
        }
        if let Some(max) = self.max_hitch_angle {
            worst = worst.max(angle_diff(x[2], x[3]).abs() - max);
        }
        worst
    }

    pub fn state_within(&self, robot: RobotType, x: &[T], tol: T) -> bool {
        self.state_violation(robot, x) <= tol
    }

    pub fn clamp_action(&self, u: &mut [T]) {
        for (i, v) in u.iter_mut().enumerate() {
            *v = v.max(self.action_lo[i]).min(self.action_hi[i]);
        }
    }

    /// Upper bound on planar speed, used by the search heuristic.
    pub fn max_speed(&self, robot: RobotType) -> T {
        let mag = |lo: T, hi: T| lo.abs().max(hi.abs());
        match robot {
            RobotType::Unicycle1 | RobotType::CarWithTrailer => {
                mag(self.action_lo[0], self.action_hi[0])
            }
            RobotType::Unicycle2 => mag(self.state_lo[3], self.state_hi[3]),
            RobotType::DoubleIntegrator2D => {
                let vx = mag(self.state_lo[2], self.state_hi[2]);
                let vy = mag(self.state_lo[3], self.state_hi[3]);
                (vx * vx + vy * vy).sqrt()
            }
        }
    }
}

/// Per-component weights of the state metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetricWeights<T>(pub Vec<T>);

impl<T: Scalar> MetricWeights<T> {
    /// 1.0 for positions, 0.5 for angles, 0.25 for velocities.
    pub fn default_for(robot: RobotType) -> Self {
        Self(
            robot
                .components()
                .iter()
                .map(|k| match k {
                    Position => T::one(),
                    Angle => T::lit(0.5),
                    Velocity => T::lit(0.25),
                })
                .collect(),
        )
    }

    pub fn validate(&self, robot: RobotType) -> Result<(), DynamicsError> {
        if self.0.len() != robot.state_dim() {
            return Err(DynamicsError::InvalidWeights(format!(
                "expected {} weights, got {}",
                robot.state_dim(),
                self.0.len()
            )));
        }
        for (w, kind) in self.0.iter().zip(robot.components()) {
            if *w < T::zero() || (*kind == Position && *w <= T::zero()) {
                return Err(DynamicsError::InvalidWeights(
                    "weights must be >= 0 and positive on positions".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Weighted Euclidean distance; angular components use the shortest arc.
pub fn distance<T: Scalar>(
    robot: RobotType,
    a: &RobotState<T>,
    b: &RobotState<T>,
    w: &MetricWeights<T>,
) -> Result<T, DynamicsError> {
    robot.check_state(a.as_slice())?;
    robot.check_state(b.as_slice())?;
    Ok(distance_slices(robot, a.as_slice(), b.as_slice(), &w.0, false))
}

/// Metric on raw slices. With `skip_position` the two planar position
/// components are ignored.
#[inline]
pub fn distance_slices<T: Scalar>(
    robot: RobotType,
    a: &[T],
    b: &[T],
    w: &[T],
    skip_position: bool,
) -> T {
    let mut sum = T::zero();
    for (i, kind) in robot.components().iter().enumerate() {
        let diff = match kind {
            Position if skip_position => continue,
            Angle => angle_diff(a[i], b[i]),
            _ => a[i] - b[i],
        };
        let wd = w[i] * diff;
        sum = sum + wd * wd;
    }
    sum.sqrt()
}

/// Uniform sample: positions inside `extent`, angles in (-pi, pi], other
/// components inside the state bounds. Degenerate intervals return their
/// single value.
pub fn sample_state<T: Scalar, R: Rng + ?Sized>(
    robot: RobotType,
    rng: &mut R,
    bounds: &Bounds<T>,
    extent: ([T; 2], [T; 2]),
) -> RobotState<T> {
    let mut uniform = |lo: T, hi: T| {
        if lo >= hi {
            lo
        } else {
            lo + (hi - lo) * T::lit(rng.gen::<f64>())
        }
    };
    let mut x = Vec::with_capacity(robot.state_dim());
    for (i, kind) in robot.components().iter().enumerate() {
        let v = match kind {
            Position => uniform(extent.0[i], extent.1[i]),
            // pi - [0, 2pi) lands in (-pi, pi]
            Angle => T::PI() - uniform(T::zero(), T::lit(2.0) * T::PI()),
            Velocity => uniform(bounds.state_lo[i], bounds.state_hi[i]),
        };
        x.push(v);
    }
    if let Some(max) = bounds.max_hitch_angle {
        x[3] = wrap_angle(x[2] + uniform(-max, max));
    }
    RobotState(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(v: &[f64]) -> RobotState<f64> {
        RobotState::from_f64(v)
    }

    fn u(v: &[f64]) -> ControlAction<f64> {
        ControlAction::from_f64(v)
    }

    #[test]
    fn unicycle_straight_line() {
        let x = RobotType::Unicycle1.step(&s(&[0.0, 0.0, 0.0]), &u(&[1.0, 0.0]), 0.1).unwrap();
        assert_eq!(x.0, vec![0.1, 0.0, 0.0]);
    }

    #[test]
    fn double_integrator_euler() {
        let x = RobotType::DoubleIntegrator2D
            .step(&s(&[0.0, 0.0, 0.5, 0.0]), &u(&[2.0, 0.0]), 0.1)
            .unwrap();
        assert!((x.0[0] - 0.05).abs() < 1e-15);
        assert!((x.0[2] - 0.7).abs() < 1e-15);
        assert_eq!(x.0[1], 0.0);
        assert_eq!(x.0[3], 0.0);
    }

    #[test]
    fn car_with_trailer_single_step() {
        // by hand: x += 0.5*cos(0)*0.1, theta0 += 0.5*tan(0.3)/0.4*0.1,
        // theta1 += 0.5/0.5*sin(0)*0.1
        let x = RobotType::CarWithTrailer
            .step(&s(&[0.0, 0.0, 0.0, 0.0]), &u(&[0.5, 0.3]), 0.1)
            .unwrap();
        let expected = [0.05, 0.0, 0.125 * 0.309_336_249_609_623_3, 0.0];
        for (a, b) in x.0.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let err = RobotType::Unicycle1.step(&s(&[0.0, 0.0]), &u(&[1.0, 0.0]), 0.1);
        assert!(matches!(err, Err(DynamicsError::Dimension { what: "state", .. })));
        let err = RobotType::Unicycle2.jacobians(&s(&[0.0; 5]), &u(&[1.0]), 0.1);
        assert!(matches!(err, Err(DynamicsError::Dimension { what: "action", .. })));
        let err = RobotType::Unicycle1.step(&s(&[0.0; 3]), &u(&[1.0, 0.0]), 0.0);
        assert_eq!(err, Err(DynamicsError::NonPositiveDt));
    }

    #[test]
    fn double_integrator_jacobian_structure() {
        let (a, b) = RobotType::DoubleIntegrator2D
            .jacobians(&s(&[0.3, -1.0, 0.2, 0.1]), &u(&[1.0, -0.5]), 0.1)
            .unwrap();
        let mut expected_a = Matrix::identity(4);
        expected_a[(0, 2)] = 0.1;
        expected_a[(1, 3)] = 0.1;
        assert_eq!(a, expected_a);
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(b[(r, c)], 0.0);
            }
        }
        assert_eq!(b[(2, 0)], 0.1);
        assert_eq!(b[(3, 1)], 0.1);
    }

    #[test]
    fn angle_wrap_distance() {
        let w = MetricWeights(vec![1.0; 3]);
        let d = distance(
            RobotType::Unicycle1,
            &s(&[0.0, 0.0, std::f64::consts::PI - 0.01]),
            &s(&[0.0, 0.0, -std::f64::consts::PI + 0.01]),
            &w,
        )
        .unwrap();
        assert!((d - 0.02).abs() < 1e-12);
    }

    #[test]
    fn single_axis_distance() {
        let w = MetricWeights(vec![1.0, 1.0, 0.5]);
        let d = distance(RobotType::Unicycle1, &s(&[1.0, 0.0, 0.0]), &s(&[0.0; 3]), &w).unwrap();
        assert_eq!(d, 1.0);
        let x = s(&[0.3, 0.2, 1.0]);
        assert_eq!(distance(RobotType::Unicycle1, &x, &x, &w).unwrap(), 0.0);
    }

    #[test]
    fn weights_validation() {
        assert!(MetricWeights(vec![1.0, 1.0, 0.0]).validate(RobotType::Unicycle1).is_ok());
        assert!(MetricWeights(vec![0.0, 1.0, 0.5]).validate(RobotType::Unicycle1).is_err());
        assert!(MetricWeights(vec![1.0, 1.0]).validate(RobotType::Unicycle1).is_err());
    }

    #[test]
    fn degenerate_sample_is_the_only_state() {
        let mut bounds = Bounds::<f64>::default_for(RobotType::DoubleIntegrator2D);
        bounds.state_lo[2] = 0.2;
        bounds.state_hi[2] = 0.2;
        bounds.state_lo[3] = -0.1;
        bounds.state_hi[3] = -0.1;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = sample_state(RobotType::DoubleIntegrator2D, &mut rng, &bounds, ([1.0, 2.0], [1.0, 2.0]));
        assert_eq!(x.0, vec![1.0, 2.0, 0.2, -0.1]);
    }

    #[test]
    fn samples_within_bounds_and_reproducible() {
        for robot in RobotType::ALL {
            let bounds = Bounds::<f64>::default_for(robot);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let extent = ([-1.0, 0.0], [2.0, 3.0]);
            let first: Vec<_> = (0..10_000)
                .map(|_| sample_state(robot, &mut rng, &bounds, extent))
                .collect();
            for x in &first {
                assert!(x.0[0] >= -1.0 && x.0[0] <= 2.0);
                assert!(x.0[1] >= 0.0 && x.0[1] <= 3.0);
                assert!(bounds.state_within(robot, &x.0, 1e-12));
                for i in 0..robot.state_dim() {
                    if robot.is_angle(i) {
                        assert!(x.0[i] > -std::f64::consts::PI && x.0[i] <= std::f64::consts::PI);
                    }
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let again: Vec<_> = (0..100)
                .map(|_| sample_state(robot, &mut rng, &bounds, extent))
                .collect();
            assert_eq!(&first[..100], &again[..]);
        }
    }

    #[test]
    fn parse_names() {
        for t in RobotType::ALL {
            assert_eq!(t.name().parse::<RobotType>().unwrap(), t);
        }
        assert!("quadrotor".parse::<RobotType>().is_err());
        assert_eq!(Bounds::<f64>::default_for(RobotType::DoubleIntegrator2D).max_speed(RobotType::DoubleIntegrator2D), 0.5f64.hypot(0.5));
    }
}
