//! Multi-robot kinodynamic motion planning with discontinuity-bounded
//! conflict-based search.
//!
//! The algorithms are generic over the scalar type (`f32` or `f64`). The
//! aliases below fix the scalar to `f64`, which is what file IO and the CLI use.

pub mod cbs;
pub mod dbastar;
pub mod dynamics;
pub mod geometry;
pub mod matrix;
pub mod primitives;
pub mod scalar;
pub mod scenario_io;
pub mod trajopt;

pub use dynamics::RobotType;
pub use scalar::Scalar;

pub type RobotState = dynamics::RobotState<f64>;
pub type ControlAction = dynamics::ControlAction<f64>;
pub type Bounds = dynamics::Bounds<f64>;
pub type MetricWeights = dynamics::MetricWeights<f64>;
pub type Shape = geometry::Shape<f64>;
pub type Workspace = geometry::Workspace<f64>;
pub type RobotBody = geometry::RobotBody<f64>;
pub type MotionPrimitive = primitives::MotionPrimitive<f64>;
pub type PrimitiveSet = primitives::PrimitiveSet<f64>;
pub type Constraint = dbastar::Constraint<f64>;
pub type DbSolution = dbastar::DbSolution<f64>;
pub type Conflict = cbs::Conflict<f64>;
pub type HighLevelNode = cbs::HighLevelNode<f64>;
pub type Emission = cbs::Emission<f64>;
pub type SolveReport = cbs::SolveReport<f64>;
pub type RobotSpec = scenario_io::RobotSpec<f64>;
pub type ProblemInstance = scenario_io::ProblemInstance<f64>;
pub type RobotTrajectory = trajopt::RobotTrajectory<f64>;
pub type OptWeights = trajopt::OptWeights<f64>;
