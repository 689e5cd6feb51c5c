//! Simulation library for a tendon-coupled two-link robotic finger driven by
//! a DC-motor slider, under a backstepping voltage controller.
//!
//! The finger's two joints are tied to a single actuated tendon through
//! pulleys, which reduces the mechanism to one independent coordinate. The
//! plant state is three-dimensional — proximal joint angle, joint rate, and
//! motor torque — and the controller steers it with the armature voltage
//! through two nested error surfaces, yielding a closed loop whose Lyapunov
//! function decays at a known analytic rate.
//!
//! Modules:
//!
//! * [`dynamics`] — rigid-body matrices, the tendon constraint, and the
//!   reduced single-coordinate plant with its exact partial derivatives.
//! * [`controller`] — error surfaces, virtual torque law, and the final
//!   voltage law, plus the Lyapunov function and its decay rate.
//! * [`trajectory`] — step and cubic-polynomial references with the
//!   derivatives the controller consumes.
//! * [`simulator`] — fixed-step RK4 integration of the closed loop and the
//!   per-step trace records.
//! * [`analysis`] — finite-difference oracles that re-derive the dynamics
//!   from energies, and metrics for step response, tracking, and Lyapunov
//!   decay.
//!
//! Everything is generic over the floating-point scalar via [`Scalar`];
//! the crate root re-exports `f64` aliases for ordinary use.
//!
//! ```
//! use fingersim_core::{simulator, SimConfig};
//!
//! let config = SimConfig::step_experiment();
//! let trace = simulator::run(&config).expect("closed loop is stable");
//! assert_eq!(trace.len(), 501);
//! assert!(trace.last().unwrap().e.abs() < 1e-3);
//! ```

pub mod analysis;
pub mod controller;
pub mod dynamics;
pub mod error;
pub mod scalar;
pub mod simulator;
pub mod trajectory;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use simulator::ControllerMode;

/// Finger link/pulley parameters at `f64` precision.
pub type FingerParams = dynamics::FingerParams<f64>;
/// Motor/slider parameters at `f64` precision.
pub type ActuatorParams = dynamics::ActuatorParams<f64>;
/// Full two-joint configuration at `f64` precision.
pub type FullJointState = dynamics::FullJointState<f64>;
/// Reduced plant state at `f64` precision.
pub type ReducedState = dynamics::ReducedState<f64>;
/// Reduced plant terms at `f64` precision.
pub type ReducedTerms = dynamics::ReducedTerms<f64>;
/// Backstepping gains at `f64` precision.
pub type ControllerGains = controller::ControllerGains<f64>;
/// Per-step controller outputs at `f64` precision.
pub type ControlSignals = controller::ControlSignals<f64>;
/// Reference sample at `f64` precision.
pub type ReferencePoint = trajectory::ReferencePoint<f64>;
/// Reference trajectory description at `f64` precision.
pub type TrajectorySpec = trajectory::TrajectorySpec<f64>;
/// Cubic polynomial coefficients at `f64` precision.
pub type CubicCoeffs = trajectory::CubicCoeffs<f64>;
/// Simulation configuration at `f64` precision.
pub type SimConfig = simulator::SimConfig<f64>;
/// One trace row at `f64` precision.
pub type TraceRecord = simulator::TraceRecord<f64>;
/// Finite-difference oracle step sizes at `f64` precision.
pub type OracleSteps = analysis::OracleSteps<f64>;
/// Step-response summary at `f64` precision.
pub type StepMetrics = analysis::StepMetrics<f64>;
/// Tracking-error summary at `f64` precision.
pub type TrackingMetrics = analysis::TrackingMetrics<f64>;
/// Lyapunov audit report at `f64` precision.
pub type LyapunovReport = analysis::LyapunovReport<f64>;
