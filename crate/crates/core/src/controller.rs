//! Backstepping voltage controller.
//!
//! The combined plant is in strict-feedback form — position feeds rate, rate
//! feeds torque, torque feeds voltage — so the controller stacks three loops:
//!
//! 1. an error surface `s = de + lambda_s * e` collapses the position and
//!    rate errors into one signal whose nulling makes `e` decay
//!    exponentially;
//! 2. a virtual control `x3d = (1/g)(-f + ddx1d - lambda_s * de - k1 * s)`
//!    treats the actuator torque as the handle of the mechanical loop, giving
//!    `s' = g * eta - k1 * s` where `eta = x3 - x3d`;
//! 3. the torque loop `u = dx3d - k2 * eta - g * s` combined with the voltage
//!    law `E = (L/Kt)((Ra/L) x3 + (Kt Kb r1 / (ra L)) x2 + u)` cancels the
//!    armature dynamics exactly, so the torque state obeys `x3' = u` and
//!    `eta' = -k2 * eta - g * s`.
//!
//! Along closed-loop trajectories the Lyapunov function
//! `V = (s² + eta²)/2` then decays as `V' = -k1 s² - k2 eta²`, which the
//! analysis module audits numerically on every simulated run.

use crate::dynamics::{
    drift_and_gain, electrical_feedback, reduced_term_partials, reduced_terms, ActuatorParams,
    FingerParams, ReducedState,
};
use crate::error::{require, Error, Result};
use crate::scalar::{lit, Scalar};
use crate::trajectory::ReferencePoint;


/// Gains of the backstepping law. All three must be strictly positive for
/// the Lyapunov decay `V' = -k1 s² - k2 eta²` to hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerGains<T> {
    /// Error-surface gain λ (1/s): `s = de + lambda_s * e`.
    pub lambda_s: T,
    /// Surface gain k1 (1/s) of the mechanical loop.
    pub k1: T,
    /// Virtual-error gain k2 (1/s) of the torque loop.
    pub k2: T,
}

impl<T: Scalar> Default for ControllerGains<T> {
    /// Nominal tuning used by the bundled experiments.
    fn default() -> Self {
        Self {
            lambda_s: lit(3.4),
            k1: lit(28.0),
            k2: lit(40.0),
        }
    }
}

impl<T: Scalar> ControllerGains<T> {
    /// Checks that every gain is finite and strictly positive.
    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        require(
            self.lambda_s.is_finite() && self.lambda_s > zero,
            "controller.lambda",
            "must be strictly positive",
        )?;
        require(
            self.k1.is_finite() && self.k1 > zero,
            "controller.k1",
            "must be strictly positive",
        )?;
        require(
            self.k2.is_finite() && self.k2 > zero,
            "controller.k2",
            "must be strictly positive",
        )?;
        Ok(())
    }
}

/// Everything one controller evaluation produces, kept together so traces
/// can log the complete internal picture of each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSignals<T> {
    /// Tracking error `x1 - x1d` (rad).
    pub e: T,
    /// Error rate `x2 - dx1d` (rad/s).
    pub de: T,
    /// Error-surface value `de + lambda_s * e` (rad/s).
    pub s: T,
    /// Virtual control, the desired actuator torque (N·m).
    pub x3d: T,
    /// Analytic time derivative of the virtual control (N·m/s).
    pub dx3d: T,
    /// Virtual-control error `x3 - x3d` (N·m).
    pub eta: T,
    /// Torque-loop input `u = x3'` commanded through the voltage law (N·m/s).
    pub u: T,
    /// Armature voltage command E (V).
    pub e_volt: T,
    /// Lyapunov value `V = (s² + eta²)/2`.
    pub v: T,
    /// Lyapunov rate `V' = -k1 s² - k2 eta²`.
    pub vdot: T,
}

/// Inputs of the torque loop, bundled to keep the call site readable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorqueLoopInputs<T> {
    /// Analytic virtual-control rate (N·m/s).
    pub dx3d: T,
    /// Virtual-control error (N·m).
    pub eta: T,
    /// Plant input gain `g = 1/M''`.
    pub g: T,
    /// Error-surface value (rad/s).
    pub s: T,
}

/// Tracking error, error rate, and surface value
/// `(e, de, s) = (x1 - x1d, x2 - dx1d, de + lambda_s * e)`.
pub fn error_surface<T: Scalar>(
    x1: T,
    x2: T,
    r: ReferencePoint<T>,
    gains: &ControllerGains<T>,
) -> (T, T, T) {
    let e = x1 - r.x1d;
    let de = x2 - r.dx1d;
    (e, de, de + gains.lambda_s * e)
}

/// Virtual control `x3d = (1/g)(-f + ddx1d - lambda_s * de - k1 * s)`: the
/// actuator torque that would drive the error surface as `s' = -k1 s`.
///
/// Substituting the result back into `x2' = f + g x3` gives the closed-loop
/// surface dynamics `s' = g * eta - k1 * s` identically. The position error
/// enters only through `s`; the argument is accepted so callers can forward
/// [`error_surface`]'s full output.
///
/// # Errors
///
/// [`Error::NonPositiveGain`] when `g <= 0`, which signals that the combined
/// inertia upstream lost positive definiteness.
pub fn virtual_control<T: Scalar>(
    f: T,
    g: T,
    r: ReferencePoint<T>,
    _e: T,
    de: T,
    s: T,
    gains: &ControllerGains<T>,
) -> Result<T> {
    // Negated form on purpose: it also rejects a NaN gain, which `g <= 0`
    // would let through.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(g > T::zero()) {
        return Err(Error::NonPositiveGain {
            g: g.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((-f + r.ddx1d - gains.lambda_s * de - gains.k1 * s) / g)
}

/// Analytic total time derivative of the virtual control along the
/// closed-loop vector field.
///
/// Writing `x3d = (cpp + gpp + kpp) + mpp * w` with
/// `w = ddx1d - lambda_s * de - k1 * s`, the chain rule over
/// `x1' = x2`, `x2' = f + g x3`, and the reference derivatives gives
///
/// ```text
/// dx3d = mpp' x2 w + mpp w' + cpp_x1 x2 + cpp_x2 x2' + gpp' x2 + kpp' x2
/// w'   = dddx1d - lambda_s (x2' - ddx1d) - k1 s'
/// s'   = (x2' - ddx1d) + lambda_s de
/// ```
///
/// with every partial taken in closed form ([`reduced_term_partials`]), so no
/// numerical differentiation noise enters the control signal.
pub fn virtual_control_rate<T: Scalar>(
    fp: &FingerParams<T>,
    ap: &ActuatorParams<T>,
    state: ReducedState<T>,
    r: ReferencePoint<T>,
    gains: &ControllerGains<T>,
) -> T {
    let terms = reduced_terms(fp, ap, state.x1, state.x2);
    let (f, g) = drift_and_gain(terms);
    let (_, de, s) = error_surface(state.x1, state.x2, r, gains);
    let w = r.ddx1d - gains.lambda_s * de - gains.k1 * s;
    let p = reduced_term_partials(fp, ap, state.x1, state.x2);
    let xdd = f + g * state.x3;
    let sdot = (xdd - r.ddx1d) + gains.lambda_s * de;
    let wdot = r.dddx1d - gains.lambda_s * (xdd - r.ddx1d) - gains.k1 * sdot;
    p.dmpp_dx1 * state.x2 * w
        + terms.mpp * wdot
        + p.dcpp_dx1 * state.x2
        + p.dcpp_dx2 * xdd
        + p.dgpp_dx1 * state.x2
        + p.dkpp_dx1 * state.x2
}

/// Torque-loop input `u = dx3d - k2 * eta - g * s`.
///
/// Fed through the voltage law this makes the torque state obey `x3' = u`,
/// hence `eta' = -k2 * eta - g * s`; the `g * s` term cancels the
/// cross-coupling `g * eta` of the surface dynamics in the Lyapunov balance.
pub fn torque_loop<T: Scalar>(inputs: TorqueLoopInputs<T>, gains: &ControllerGains<T>) -> T {
    inputs.dx3d - gains.k2 * inputs.eta - inputs.g * inputs.s
}

/// Voltage law `E = (L/Kt)((Ra/L) x3 + (Kt Kb r1 / (ra L)) x2 + u)`.
///
/// This is feedback pre-compensation of the armature circuit: substituting E
/// into the torque-state equation cancels the resistive and back-EMF terms
/// exactly (they are evaluated through the same shared expression as the
/// plant), leaving `x3' = u` to floating-point accuracy.
pub fn voltage_law<T: Scalar>(
    ap: &ActuatorParams<T>,
    fp: &FingerParams<T>,
    x2: T,
    x3: T,
    u: T,
) -> T {
    (ap.l / ap.kt) * (electrical_feedback(fp, ap, x2, x3) + u)
}

/// Lyapunov value `V = (s² + eta²)/2`.
pub fn lyapunov<T: Scalar>(s: T, eta: T) -> T {
    lit::<T>(0.5) * (s * s + eta * eta)
}

/// Lyapunov rate `V' = -k1 s² - k2 eta²` (non-positive for valid gains).
pub fn lyapunov_rate<T: Scalar>(s: T, eta: T, gains: &ControllerGains<T>) -> T {
    -(gains.k1 * s * s) - gains.k2 * eta * eta
}

/// One full controller evaluation: errors, virtual control and its rate,
/// torque-loop input, voltage command, and Lyapunov instrumentation.
///
/// `e_volt` is the armature voltage to apply to the plant for this state and
/// reference.
///
/// # Errors
///
/// Propagates [`virtual_control`]'s failure when the input gain is not
/// strictly positive.
pub fn control_step<T: Scalar>(
    fp: &FingerParams<T>,
    ap: &ActuatorParams<T>,
    state: ReducedState<T>,
    r: ReferencePoint<T>,
    gains: &ControllerGains<T>,
) -> Result<ControlSignals<T>> {
    let terms = reduced_terms(fp, ap, state.x1, state.x2);
    let (f, g) = drift_and_gain(terms);
    let (e, de, s) = error_surface(state.x1, state.x2, r, gains);
    let x3d = virtual_control(f, g, r, e, de, s, gains)?;
    let eta = state.x3 - x3d;
    let dx3d = virtual_control_rate(fp, ap, state, r, gains);
    let u = torque_loop(TorqueLoopInputs { dx3d, eta, g, s }, gains);
    let e_volt = voltage_law(ap, fp, state.x2, state.x3, u);
    Ok(ControlSignals {
        e,
        de,
        s,
        x3d,
        dx3d,
        eta,
        u,
        e_volt,
        v: lyapunov(s, eta),
        vdot: lyapunov_rate(s, eta, gains),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::state_derivative;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn gains() -> ControllerGains<f64> {
        ControllerGains::default()
    }

    fn still(x1d: f64) -> ReferencePoint<f64> {
        ReferencePoint {
            x1d,
            dx1d: 0.0,
            ddx1d: 0.0,
            dddx1d: 0.0,
        }
    }

    #[test]
    fn gains_validate_and_reject_non_positive() {
        gains().validate().unwrap();
        let mut g = gains();
        g.k2 = 0.0;
        assert!(g.validate().unwrap_err().to_string().contains("controller.k2"));
    }

    #[test]
    fn error_surface_examples() {
        let g = gains();
        let r = still(0.0);
        assert_eq!(error_surface(0.0, 0.0, r, &g), (0.0, 0.0, 0.0));
        // e = 0.1, de = -0.34 nulls the surface at lambda = 3.4.
        let r2 = still(0.0);
        let (_, _, s) = error_surface(0.1, -0.34, r2, &g);
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-15);
        let mut g2 = gains();
        g2.lambda_s = 2.0;
        assert_eq!(error_surface(1.0, 0.0, still(0.5), &g2), (0.5, 0.0, 1.0));
    }

    #[test]
    fn virtual_control_example_and_identity() {
        let g = gains();
        let r = ReferencePoint {
            x1d: 0.0,
            dx1d: 0.0,
            ddx1d: 1.0,
            dddx1d: 0.0,
        };
        let x3d = virtual_control(-0.4, 2.0, r, 0.0, 0.1, 0.2, &g).unwrap();
        assert_relative_eq!(x3d, (0.4 + 1.0 - 0.34 - 5.6) / 2.0, max_relative = 1e-14);
        // Identity: f + g x3d - ddx1d + lambda de = -k1 s.
        let (f, gg, de, s) = (0.7, 3.1, -0.2, 0.45);
        let x3d = virtual_control(f, gg, r, 0.0, de, s, &g).unwrap();
        assert_relative_eq!(
            f + gg * x3d - r.ddx1d + g.lambda_s * de,
            -g.k1 * s,
            max_relative = 1e-12
        );
    }

    #[test]
    fn virtual_control_rejects_non_positive_gain() {
        let r = still(0.0);
        let err = virtual_control(0.0, 0.0, r, 0.0, 0.0, 0.0, &gains()).unwrap_err();
        assert!(matches!(err, crate::Error::NonPositiveGain { .. }));
        assert!(virtual_control(0.0, -1.0, r, 0.0, 0.0, 0.0, &gains()).is_err());
    }

    #[test]
    fn torque_loop_example_and_identity() {
        let g = gains();
        let u = torque_loop(
            TorqueLoopInputs {
                dx3d: 1.0,
                eta: 0.5,
                g: 2.0,
                s: 0.1,
            },
            &g,
        );
        assert_relative_eq!(u, -19.2, max_relative = 1e-14);
        let inputs = TorqueLoopInputs {
            dx3d: -0.3,
            eta: 0.7,
            g: 11.0,
            s: -0.2,
        };
        let u = torque_loop(inputs, &g);
        assert_abs_diff_eq!(
            u - inputs.dx3d + g.k2 * inputs.eta + inputs.g * inputs.s,
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn voltage_law_example() {
        let fp = crate::dynamics::FingerParams::<f64>::default();
        let ap = crate::dynamics::ActuatorParams::<f64>::default();
        // x3 = 0.02 N·m, everything else zero: E = (L/Kt)(Ra/L) x3 = 0.4 V.
        let e = voltage_law(&ap, &fp, 0.0, 0.02, 0.0);
        assert_relative_eq!(e, 0.4, max_relative = 1e-12);
        assert_eq!(voltage_law(&ap, &fp, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn voltage_law_cancels_armature_dynamics_exactly() {
        let fp = crate::dynamics::FingerParams::<f64>::default();
        let ap = crate::dynamics::ActuatorParams::<f64>::default();
        for (x2, x3, u) in [
            (0.0, 0.0, 1.0),
            (2.5, -0.4, -250.0),
            (-4.0, 0.9, 433.7),
            (0.3, 0.001, 0.02),
        ] {
            let e = voltage_law(&ap, &fp, x2, x3, u);
            let d = state_derivative(
                &fp,
                &ap,
                crate::dynamics::ReducedState { x1: 0.2, x2, x3 },
                e,
            );
            assert_abs_diff_eq!(d[2], u, epsilon = 1e-12);
        }
    }

    #[test]
    fn lyapunov_examples() {
        assert_eq!(lyapunov(0.0, 0.0), 0.0);
        assert_eq!(lyapunov(3.0, 4.0), 12.5);
        assert_eq!(lyapunov(-1.0, 1.0), 1.0);
        let g = gains();
        assert_eq!(lyapunov_rate(0.0, 0.0, &g), 0.0);
        assert_relative_eq!(lyapunov_rate(1.0, 1.0, &g), -68.0, max_relative = 1e-15);
        assert!(lyapunov_rate(-0.3, 0.9, &g) <= 0.0);
    }

    #[test]
    fn control_step_populates_consistent_signals() {
        let fp = crate::dynamics::FingerParams::<f64>::default();
        let ap = crate::dynamics::ActuatorParams::<f64>::default();
        let g = gains();
        let state = crate::dynamics::ReducedState {
            x1: 0.0,
            x2: 0.0,
            x3: 0.0,
        };
        let r = still(60.0_f64.to_radians());
        let sig = control_step(&fp, &ap, state, r, &g).unwrap();
        assert_relative_eq!(sig.e, -r.x1d, max_relative = 1e-15);
        assert_relative_eq!(sig.v, lyapunov(sig.s, sig.eta), max_relative = 1e-15);
        assert!(sig.vdot <= 0.0);
        assert!(sig.e_volt.is_finite());
        // The commanded voltage must push x1 toward the 60 degree target.
        let d = state_derivative(&fp, &ap, state, sig.e_volt);
        assert!(d[2] > 0.0, "torque must build up toward the step");
    }

    #[test]
    fn lti_special_case_matches_closed_form_rate() {
        // Springs, gravity, Coriolis, and damping off: f = 0, g constant.
        // (lc2 = 0 removes the configuration dependence of the inertia.)
        let fp = crate::dynamics::FingerParams::<f64> {
            grav: 0.0,
            k1s: 0.0,
            k2s: 0.0,
            lc2: 0.0,
            ..Default::default()
        };
        let ap = crate::dynamics::ActuatorParams::<f64> {
            b: 0.0,
            ..Default::default()
        };
        let g = gains();
        let state = crate::dynamics::ReducedState {
            x1: 0.3,
            x2: -0.7,
            x3: 0.04,
        };
        let r = still(1.0);
        let terms = reduced_terms(&fp, &ap, state.x1, state.x2);
        let (f, gg) = drift_and_gain(terms);
        assert_eq!(f, 0.0);
        let (_, de, _s) = error_surface(state.x1, state.x2, r, &g);
        let xdd = gg * state.x3;
        let edd = xdd - r.ddx1d;
        let sdot = edd + g.lambda_s * de;
        let expect = (-g.lambda_s * edd - g.k1 * sdot) / gg;
        let got = virtual_control_rate(&fp, &ap, state, r, &g);
        assert_relative_eq!(got, expect, max_relative = 1e-12);
    }

    #[test]
    fn virtual_control_rate_is_zero_at_equilibrium() {
        let fp = crate::dynamics::FingerParams::<f64> {
            grav: 0.0,
            k1s: 0.0,
            k2s: 0.0,
            ..Default::default()
        };
        let ap = crate::dynamics::ActuatorParams::<f64>::default();
        let state = crate::dynamics::ReducedState {
            x1: 0.0,
            x2: 0.0,
            x3: 0.0,
        };
        assert_eq!(virtual_control_rate(&fp, &ap, state, still(0.0), &gains()), 0.0);
    }
}
