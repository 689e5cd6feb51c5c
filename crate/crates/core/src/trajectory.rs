//! Reference generators.
//!
//! Every reference supplies analytic derivatives up to jerk, because the
//! controller differentiates its virtual control along the closed loop and
//! numerical differentiation of references would inject noise the stability
//! analysis does not model.

use crate::error::{require, Result};
use crate::scalar::{lit, Scalar};

/// One sampled reference point with derivatives up to jerk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoint<T> {
    /// Desired proximal angle (rad).
    pub x1d: T,
    /// Desired rate (rad/s).
    pub dx1d: T,
    /// Desired acceleration (rad/s²).
    pub ddx1d: T,
    /// Desired jerk (rad/s³); consumed by the virtual-control rate.
    pub dddx1d: T,
}

/// Cubic polynomial coefficients, highest power first:
/// `p(t) = a3 t³ + a2 t² + a1 t + a0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoeffs<T> {
    /// Cubic coefficient (rad/s³).
    pub a3: T,
    /// Quadratic coefficient (rad/s²).
    pub a2: T,
    /// Linear coefficient (rad/s).
    pub a1: T,
    /// Constant coefficient (rad).
    pub a0: T,
}

/// Reference shapes supported by the simulator.
///
/// `hold_after` clamps the reference and zeroes all derivatives beyond the
/// polynomial's domain end. For a raw cubic the domain ends at the largest
/// non-negative stationary point of the polynomial (where the commanded rate
/// crosses zero); for a boundary-specified move it ends at `duration`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectorySpec<T> {
    /// Constant setpoint from `t = 0`; all derivatives zero (the jump at
    /// `t = 0` is absorbed by the initial tracking error).
    Step {
        /// Setpoint (rad).
        amplitude: T,
    },
    /// Explicit cubic polynomial.
    CubicPoly {
        /// Polynomial coefficients.
        coeffs: CubicCoeffs<T>,
        /// Hold position (with zero derivatives) beyond the natural end.
        hold_after: bool,
    },
    /// Rest-to-rest cubic move fitted to boundary conditions.
    CubicBoundary {
        /// Start angle (rad).
        start: T,
        /// End angle (rad).
        end: T,
        /// Move duration (s), strictly positive.
        duration: T,
        /// Hold the end angle beyond `duration`.
        hold_after: bool,
    },
}

impl<T: Scalar> TrajectorySpec<T> {
    /// Checks finiteness of all fields and positivity of the move duration.
    pub fn validate(&self) -> Result<()> {
        match *self {
            TrajectorySpec::Step { amplitude } => {
                require(amplitude.is_finite(), "trajectory.amplitude", "must be finite")
            }
            TrajectorySpec::CubicPoly { coeffs, .. } => require(
                coeffs.a3.is_finite()
                    && coeffs.a2.is_finite()
                    && coeffs.a1.is_finite()
                    && coeffs.a0.is_finite(),
                "trajectory.coeffs",
                "must be finite",
            ),
            TrajectorySpec::CubicBoundary {
                start,
                end,
                duration,
                ..
            } => {
                require(start.is_finite(), "trajectory.start", "must be finite")?;
                require(end.is_finite(), "trajectory.end", "must be finite")?;
                require(
                    duration.is_finite() && duration > T::zero(),
                    "trajectory.duration",
                    "must be strictly positive",
                )
            }
        }
    }
}

/// Samples the reference and its derivatives at time `t >= 0`.
pub fn sample<T: Scalar>(spec: &TrajectorySpec<T>, t: T) -> ReferencePoint<T> {
    match *spec {
        TrajectorySpec::Step { amplitude } => ReferencePoint {
            x1d: amplitude,
            dx1d: T::zero(),
            ddx1d: T::zero(),
            dddx1d: T::zero(),
        },
        TrajectorySpec::CubicPoly { coeffs, hold_after } => {
            sample_cubic(coeffs, hold_domain_end(hold_after, natural_end(coeffs)), t)
        }
        TrajectorySpec::CubicBoundary {
            start,
            end,
            duration,
            hold_after,
        } => sample_cubic(
            boundary_coeffs(start, end, duration),
            hold_domain_end(hold_after, Some(duration)),
            t,
        ),
    }
}

/// Rest-to-rest cubic through `(0, theta_start)` and `(T, theta_end)` with
/// zero boundary velocities:
/// `a0 = theta_start, a1 = 0, a2 = 3Δ/T², a3 = -2Δ/T³` for
/// `Δ = theta_end - theta_start`.
///
/// # Errors
///
/// Rejects non-positive or non-finite durations.
pub fn cubic_from_boundary<T: Scalar>(
    theta_start: T,
    theta_end: T,
    duration: T,
) -> Result<CubicCoeffs<T>> {
    require(
        duration.is_finite() && duration > T::zero(),
        "trajectory.duration",
        "must be strictly positive",
    )?;
    Ok(boundary_coeffs(theta_start, theta_end, duration))
}

fn boundary_coeffs<T: Scalar>(theta_start: T, theta_end: T, duration: T) -> CubicCoeffs<T> {
    let delta = theta_end - theta_start;
    let d2 = duration * duration;
    CubicCoeffs {
        a3: lit::<T>(-2.0) * delta / (d2 * duration),
        a2: lit::<T>(3.0) * delta / d2,
        a1: T::zero(),
        a0: theta_start,
    }
}

fn hold_domain_end<T>(hold_after: bool, end: Option<T>) -> Option<T> {
    if hold_after {
        end
    } else {
        None
    }
}

/// Polynomial value and derivatives; holds the end position with zero
/// derivatives past `domain_end` when one is given.
fn sample_cubic<T: Scalar>(c: CubicCoeffs<T>, domain_end: Option<T>, t: T) -> ReferencePoint<T> {
    if let Some(te) = domain_end {
        if t > te {
            return ReferencePoint {
                x1d: cubic_position(c, te),
                dx1d: T::zero(),
                ddx1d: T::zero(),
                dddx1d: T::zero(),
            };
        }
    }
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let six = lit::<T>(6.0);
    ReferencePoint {
        x1d: cubic_position(c, t),
        dx1d: (three * c.a3 * t + two * c.a2) * t + c.a1,
        ddx1d: six * c.a3 * t + two * c.a2,
        dddx1d: six * c.a3,
    }
}

fn cubic_position<T: Scalar>(c: CubicCoeffs<T>, t: T) -> T {
    ((c.a3 * t + c.a2) * t + c.a1) * t + c.a0
}

/// Largest non-negative stationary point of the cubic (zero of
/// `3 a3 t² + 2 a2 t + a1`), or `None` when the commanded rate never settles
/// for `t >= 0`. Serves as the natural end of a raw cubic's move.
fn natural_end<T: Scalar>(c: CubicCoeffs<T>) -> Option<T> {
    let zero = T::zero();
    let a = lit::<T>(3.0) * c.a3;
    let b = lit::<T>(2.0) * c.a2;
    let cc = c.a1;
    if a == zero {
        if b == zero {
            // Constant or uniform ramp: either every point is stationary (the
            // sample is constant anyway) or none is.
            return None;
        }
        let root = -cc / b;
        return (root >= zero).then_some(root);
    }
    let disc = b * b - lit::<T>(4.0) * a * cc;
    if disc < zero {
        return None;
    }
    // Numerically stable quadratic roots via the q-split.
    let q = -(b + b.signum() * disc.sqrt()) / lit::<T>(2.0);
    let root_a = q / a;
    let root_b = if q == zero { zero } else { cc / q };
    let largest = root_a.max(root_b);
    (largest >= zero).then_some(largest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    // The literal is the point: check the degree conversion against
    // independently written digits, not against the same constant.
    #[allow(clippy::approx_constant)]
    fn step_holds_value_with_zero_derivatives() {
        let amp = 60.0_f64.to_radians();
        let spec = TrajectorySpec::Step { amplitude: amp };
        for t in [0.0, 0.5, 3.0] {
            let r = sample(&spec, t);
            assert_eq!(r.x1d, amp);
            assert_eq!((r.dx1d, r.ddx1d, r.dddx1d), (0.0, 0.0, 0.0));
        }
        assert_abs_diff_eq!(amp, 1.0472, epsilon = 1e-4);
    }

    fn raw_cubic() -> TrajectorySpec<f64> {
        TrajectorySpec::CubicPoly {
            coeffs: CubicCoeffs {
                a3: -0.0021,
                a2: 0.0314,
                a1: 0.0,
                a0: 0.0,
            },
            hold_after: true,
        }
    }

    #[test]
    fn cubic_poly_values_and_derivatives() {
        let r0 = sample(&raw_cubic(), 0.0);
        assert_eq!(r0.x1d, 0.0);
        assert_eq!(r0.dx1d, 0.0);
        assert_relative_eq!(r0.ddx1d, 0.0628, max_relative = 1e-15);
        assert_relative_eq!(r0.dddx1d, -0.0126, max_relative = 1e-15);
        // Direct polynomial evaluation at t = 5:
        // -0.0021 * 125 + 0.0314 * 25 = 0.5225.
        let r5 = sample(&raw_cubic(), 5.0);
        assert_relative_eq!(r5.x1d, 0.5225, max_relative = 1e-13);
    }

    #[test]
    fn cubic_poly_holds_after_its_stationary_point() {
        // Rate zero of 3 a3 t^2 + 2 a2 t: t* = 2 a2 / (3 |a3|).
        let tstar = 2.0 * 0.0314 / (3.0 * 0.0021);
        let spec = raw_cubic();
        let at_end = sample(&spec, tstar);
        let beyond = sample(&spec, tstar + 0.5);
        assert_abs_diff_eq!(at_end.dx1d, 0.0, epsilon = 1e-15);
        assert_relative_eq!(beyond.x1d, at_end.x1d, max_relative = 1e-12);
        assert_eq!((beyond.dx1d, beyond.ddx1d, beyond.dddx1d), (0.0, 0.0, 0.0));
        // Continuity across the seam.
        let just_before = sample(&spec, tstar * (1.0 - 1e-12));
        assert_relative_eq!(just_before.x1d, beyond.x1d, max_relative = 1e-9);
    }

    #[test]
    fn cubic_poly_without_hold_keeps_polynomial_branch() {
        let spec = TrajectorySpec::CubicPoly {
            coeffs: CubicCoeffs {
                a3: -0.0021,
                a2: 0.0314,
                a1: 0.0,
                a0: 0.0,
            },
            hold_after: false,
        };
        let r = sample(&spec, 20.0);
        assert_relative_eq!(r.x1d, -0.0021 * 8000.0 + 0.0314 * 400.0, max_relative = 1e-12);
        assert!(r.dx1d < 0.0);
    }

    #[test]
    fn boundary_fit_examples() {
        let c = cubic_from_boundary(0.25, 0.25, 2.0).unwrap();
        assert_eq!((c.a3, c.a2, c.a1, c.a0), (-0.0, 0.0, 0.0, 0.25));
        let c = cubic_from_boundary(0.0, 1.0, 1.0).unwrap();
        assert_eq!((c.a3, c.a2, c.a1, c.a0), (-2.0, 3.0, 0.0, 0.0));
        let c = cubic_from_boundary(0.0, 60.0_f64.to_radians(), 10.0).unwrap();
        assert_relative_eq!(c.a3, -0.0020944, max_relative = 1e-4);
        assert_relative_eq!(c.a2, 0.031416, max_relative = 1e-4);
    }

    #[test]
    fn boundary_fit_rejects_bad_duration() {
        assert!(cubic_from_boundary(0.0, 1.0, 0.0).is_err());
        assert!(cubic_from_boundary(0.0, 1.0, -3.0).is_err());
        assert!(cubic_from_boundary(0.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn boundary_move_has_zero_boundary_velocities() {
        let spec = TrajectorySpec::CubicBoundary {
            start: -0.4,
            end: 0.9,
            duration: 7.0,
            hold_after: true,
        };
        let r0 = sample(&spec, 0.0);
        let r_end = sample(&spec, 7.0);
        assert_eq!(r0.dx1d, 0.0);
        assert_abs_diff_eq!(r_end.dx1d, 0.0, epsilon = 1e-15);
        assert_relative_eq!(r0.x1d, -0.4, max_relative = 1e-15);
        assert_relative_eq!(r_end.x1d, 0.9, max_relative = 1e-12);
        // Held beyond the end.
        let r_past = sample(&spec, 9.0);
        assert_relative_eq!(r_past.x1d, 0.9, max_relative = 1e-12);
        assert_eq!(r_past.dx1d, 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences_on_the_smooth_domain() {
        let specs = [
            raw_cubic(),
            TrajectorySpec::CubicBoundary {
                start: 0.1,
                end: 1.2,
                duration: 4.0,
                hold_after: true,
            },
        ];
        let h = 1e-5;
        for spec in specs {
            for i in 1..30 {
                let t = 0.1 * f64::from(i);
                let r = sample(&spec, t);
                let plus = sample(&spec, t + h);
                let minus = sample(&spec, t - h);
                if plus.dx1d == 0.0 || minus.dx1d == 0.0 {
                    continue; // crossed into the held region
                }
                assert_abs_diff_eq!((plus.x1d - minus.x1d) / (2.0 * h), r.dx1d, epsilon = 1e-8);
                assert_abs_diff_eq!(
                    (plus.dx1d - minus.dx1d) / (2.0 * h),
                    r.ddx1d,
                    epsilon = 1e-8
                );
                assert_abs_diff_eq!(
                    (plus.ddx1d - minus.ddx1d) / (2.0 * h),
                    r.dddx1d,
                    epsilon = 1e-6
                );
            }
        }
    }

    #[test]
    fn validate_rejects_bad_specs() {
        let bad = TrajectorySpec::CubicBoundary {
            start: 0.0,
            end: 1.0,
            duration: -1.0,
            hold_after: true,
        };
        assert!(bad.validate().is_err());
        let nan_step = TrajectorySpec::Step { amplitude: f64::NAN };
        assert!(nan_step.validate().is_err());
    }
}
