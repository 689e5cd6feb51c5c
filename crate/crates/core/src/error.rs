//! Library error type.

use thiserror::Error;

/// Errors produced by the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or configuration value failed validation.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam {
        /// Dotted path of the offending value, e.g. `sim.dt`.
        name: &'static str,
        /// Human-readable description of the violated constraint.
        reason: String,
    },

    /// The input gain g = 1/M'' lost strict positivity. The backstepping law
    /// divides by g, so this is unrecoverable and points at a parameter set
    /// for which the combined inertia is no longer positive definite.
    #[error("input gain g = {g} is not strictly positive; combined inertia lost positive definiteness")]
    NonPositiveGain {
        /// Offending gain value (converted to `f64` for reporting).
        g: f64,
    },

    /// A derivative evaluation inside an integrator stage went non-finite.
    #[error("non-finite derivative during an integration stage at t = {t}")]
    NonFiniteStage {
        /// Stage time of the failed evaluation (s).
        t: f64,
    },

    /// The closed-loop state left the representable range. Carries the time
    /// and index of the failed step plus the last finite state so the caller
    /// can report where the run broke down.
    #[error(
        "simulation diverged at t = {t} (step {step}); last finite state \
         x = ({x1}, {x2}, {x3})"
    )]
    Diverged {
        /// Time at which the state stopped being finite (s).
        t: f64,
        /// Index of the failed step.
        step: usize,
        /// Last finite proximal angle (rad).
        x1: f64,
        /// Last finite proximal rate (rad/s).
        x2: f64,
        /// Last finite actuator torque (N·m).
        x3: f64,
    },
}

/// Convenience result alias for core operations.
pub type Result<T> = core::result::Result<T, Error>;

/// Returns an [`Error::InvalidParam`] unless `ok` holds.
pub(crate) fn require(ok: bool, name: &'static str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            name,
            reason: reason.to_string(),
        })
    }
}
