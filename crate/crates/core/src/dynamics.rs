//! Finger, slider, and motor dynamics.
//!
//! The mechanism is a planar two-link finger whose joints are driven by an
//! inextensible tendon. The tendon wraps pulleys of radii `r1` (proximal
//! joint), `r2` (distal joint), and `ra` (actuator), which ties the joint
//! angles together through the holonomic constraint
//!
//! ```text
//! theta1 - (r2/r1) * theta2 = 0
//! ```
//!
//! so a single coordinate `x1 = theta1` determines the whole configuration.
//! This module evaluates the full two-joint terms (inertia, Coriolis,
//! gravity, springs), the constraint-reduction algebra, and the combined
//! finger + slider + motor plant seen by the controller,
//!
//! ```text
//! M''(x1) x1'' + C''(x1, x2) + G''(x1) + K'' x1 = tau_a ,
//! ```
//!
//! where `x2 = x1'` and the actuator torque `tau_a = x3` is itself a state of
//! the armature circuit. All operations are pure functions of value inputs
//! and are safe to call concurrently.

use crate::error::{require, Result};
use crate::scalar::{lit, Scalar};

/// Geometric, inertial, spring, and pulley constants of the two-link finger.
///
/// Center-of-mass distances are measured from each link's proximal joint;
/// inertias are about each link's own center of mass. `grav` is the in-plane
/// gravitational acceleration magnitude; gravity pulls the links toward the
/// hanging posture `theta = -pi/2`, and `grav = 0` disables it for
/// conservative-system tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerParams<T> {
    /// Link-1 mass (kg).
    pub m1: T,
    /// Link-2 mass (kg).
    pub m2: T,
    /// Link-1 length (m).
    pub l1: T,
    /// Link-2 length (m).
    pub l2: T,
    /// Link-1 COM distance from the proximal joint (m).
    pub lc1: T,
    /// Link-2 COM distance from the distal joint (m).
    pub lc2: T,
    /// Link-1 inertia about its COM (kg·m²).
    pub i1: T,
    /// Link-2 inertia about its COM (kg·m²).
    pub i2: T,
    /// Proximal joint pulley radius (m).
    pub r1: T,
    /// Distal joint pulley radius (m).
    pub r2: T,
    /// Proximal torsional spring stiffness (N·m/rad).
    pub k1s: T,
    /// Distal torsional spring stiffness (N·m/rad).
    pub k2s: T,
    /// In-plane gravitational acceleration magnitude (m/s²); 0 disables
    /// gravity.
    pub grav: T,
}

impl<T: Scalar> Default for FingerParams<T> {
    /// Nominal finger: 50 g / 40 g links of 60 mm / 40 mm, uniform-rod COM
    /// and inertia defaults (`lc = l/2`, `i = m l²/12`), 0.05 N·m/rad
    /// return springs, and millimeter-scale joint pulleys. The pulley radii
    /// keep the combined plant's input gain `g = 1/M''` small enough that the
    /// closed electro-mechanical loop stays well inside the integrator's
    /// stability region at the default 10 ms step.
    fn default() -> Self {
        let m1 = lit(0.05);
        let m2 = lit(0.04);
        let l1 = lit(0.06);
        let l2 = lit(0.04);
        let two = lit::<T>(2.0);
        let twelve = lit::<T>(12.0);
        Self {
            m1,
            m2,
            l1,
            l2,
            lc1: l1 / two,
            lc2: l2 / two,
            i1: m1 * l1 * l1 / twelve,
            i2: m2 * l2 * l2 / twelve,
            r1: lit(1.0e-3),
            r2: lit(0.8e-3),
            k1s: lit(0.05),
            k2s: lit(0.05),
            grav: lit(9.81),
        }
    }
}

impl<T: Scalar> FingerParams<T> {
    /// Checks physical plausibility: masses, lengths, and radii strictly
    /// positive; COM offsets within the links (0 allowed, to admit degenerate
    /// point-mass-at-joint configurations used by analytic special cases);
    /// inertias, stiffnesses, and gravity non-negative.
    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        require(self.m1.is_finite() && self.m1 > zero, "finger.m1", "must be strictly positive")?;
        require(self.m2.is_finite() && self.m2 > zero, "finger.m2", "must be strictly positive")?;
        require(self.l1.is_finite() && self.l1 > zero, "finger.l1", "must be strictly positive")?;
        require(self.l2.is_finite() && self.l2 > zero, "finger.l2", "must be strictly positive")?;
        require(
            self.lc1.is_finite() && self.lc1 >= zero && self.lc1 <= self.l1,
            "finger.lc1",
            "must lie within [0, l1]",
        )?;
        require(
            self.lc2.is_finite() && self.lc2 >= zero && self.lc2 <= self.l2,
            "finger.lc2",
            "must lie within [0, l2]",
        )?;
        require(self.i1.is_finite() && self.i1 >= zero, "finger.i1", "must be non-negative")?;
        require(self.i2.is_finite() && self.i2 >= zero, "finger.i2", "must be non-negative")?;
        require(self.r1.is_finite() && self.r1 > zero, "finger.r1", "must be strictly positive")?;
        require(self.r2.is_finite() && self.r2 > zero, "finger.r2", "must be strictly positive")?;
        require(self.k1s.is_finite() && self.k1s >= zero, "finger.k1s", "must be non-negative")?;
        require(self.k2s.is_finite() && self.k2s >= zero, "finger.k2s", "must be non-negative")?;
        require(self.grav.is_finite() && self.grav >= zero, "finger.grav", "must be non-negative")?;
        Ok(())
    }
}

/// Slider mass and DC-motor mechanical and electrical constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorParams<T> {
    /// Rotor inertia (kg·m²).
    pub j: T,
    /// Viscous damping on the rotor (N·m·s/rad).
    pub b: T,
    /// Actuator pulley radius (m).
    pub ra: T,
    /// Slider mass (kg).
    pub ms: T,
    /// Armature inductance (H).
    pub l: T,
    /// Armature resistance (Ω).
    pub rarm: T,
    /// Torque constant (N·m/A).
    pub kt: T,
    /// Back-EMF constant (V·s/rad).
    pub kb: T,
}

impl<T: Scalar> Default for ActuatorParams<T> {
    /// Nominal small DC gearmotor with a 10 mm output pulley and a 20 g
    /// tendon slider.
    fn default() -> Self {
        Self {
            j: lit(1.5e-4),
            b: lit(0.03),
            ra: lit(0.01),
            ms: lit(0.02),
            l: lit(1.0e-3),
            rarm: lit(1.0),
            kt: lit(0.05),
            kb: lit(0.05),
        }
    }
}

impl<T: Scalar> ActuatorParams<T> {
    /// Checks physical plausibility. Damping may be zero (conservative-system
    /// tests switch it off); everything else must be strictly positive.
    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        require(self.j.is_finite() && self.j > zero, "actuator.j", "must be strictly positive")?;
        require(self.b.is_finite() && self.b >= zero, "actuator.b", "must be non-negative")?;
        require(self.ra.is_finite() && self.ra > zero, "actuator.ra", "must be strictly positive")?;
        require(self.ms.is_finite() && self.ms > zero, "actuator.ms", "must be strictly positive")?;
        require(self.l.is_finite() && self.l > zero, "actuator.l", "must be strictly positive")?;
        require(
            self.rarm.is_finite() && self.rarm > zero,
            "actuator.rarm",
            "must be strictly positive",
        )?;
        require(self.kt.is_finite() && self.kt > zero, "actuator.kt", "must be strictly positive")?;
        require(self.kb.is_finite() && self.kb > zero, "actuator.kb", "must be strictly positive")?;
        Ok(())
    }
}

/// Both joint angles and rates of the unreduced finger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullJointState<T> {
    /// Joint angles `(theta1, theta2)` (rad).
    pub theta: [T; 2],
    /// Joint rates (rad/s).
    pub dtheta: [T; 2],
}

/// The third-order strict-feedback state of the combined plant:
/// proximal angle, proximal rate, actuator torque.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState<T> {
    /// Proximal joint angle `theta1` (rad).
    pub x1: T,
    /// Proximal joint rate (rad/s).
    pub x2: T,
    /// Actuator torque `tau_a` (N·m).
    pub x3: T,
}

impl<T: Scalar> ReducedState<T> {
    /// State at rest with zero torque.
    pub fn zero() -> Self {
        Self {
            x1: T::zero(),
            x2: T::zero(),
            x3: T::zero(),
        }
    }

    /// True when every component is finite.
    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }
}

/// Combined plant terms evaluated at one `(x1, x2)`.
///
/// `cpp` follows the convention of storing the velocity contribution as a
/// torque (already multiplied through by the rate), so the equation of motion
/// reads `mpp * x1'' + cpp + gpp + kpp = x3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedTerms<T> {
    /// Combined scalar inertia M''(x1) (kg·m² equivalent on the motor side).
    pub mpp: T,
    /// Combined velocity torque C''(x1, x2) (N·m).
    pub cpp: T,
    /// Combined gravity torque G''(x1) (N·m).
    pub gpp: T,
    /// Combined spring torque K'' · x1 (N·m).
    pub kpp: T,
}

/// Closed-form partial derivatives of the combined plant terms, used to
/// differentiate the virtual control analytically instead of numerically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedTermPartials<T> {
    /// ∂mpp/∂x1.
    pub dmpp_dx1: T,
    /// ∂cpp/∂x1 at the given rate.
    pub dcpp_dx1: T,
    /// ∂cpp/∂x2.
    pub dcpp_dx2: T,
    /// ∂gpp/∂x1.
    pub dgpp_dx1: T,
    /// ∂kpp/∂x1, i.e. the combined stiffness (independent of x1).
    pub dkpp_dx1: T,
}

/// Inertia coefficients `(alpha1, alpha2, beta)` of the two-link closed form:
/// `M11 = alpha1 + 2 beta cos(theta2)`, `M12 = alpha2 + beta cos(theta2)`,
/// `M22 = alpha2`.
fn inertia_coeffs<T: Scalar>(p: &FingerParams<T>) -> (T, T, T) {
    let alpha1 = p.i1 + p.i2 + p.m1 * p.lc1 * p.lc1 + p.m2 * (p.l1 * p.l1 + p.lc2 * p.lc2);
    let alpha2 = p.m2 * p.lc2 * p.lc2 + p.i2;
    let beta = p.m2 * p.l1 * p.lc2;
    (alpha1, alpha2, beta)
}

/// Inertia matrix of the two-link finger (symmetric positive definite).
pub fn mass_matrix<T: Scalar>(p: &FingerParams<T>, theta: [T; 2]) -> [[T; 2]; 2] {
    let (alpha1, alpha2, beta) = inertia_coeffs(p);
    let c2 = theta[1].cos();
    let off = alpha2 + beta * c2;
    [[alpha1 + lit::<T>(2.0) * beta * c2, off], [off, alpha2]]
}

/// Coriolis/centripetal matrix from the Christoffel symbols of
/// [`mass_matrix`], so `dM/dt - 2C` is skew-symmetric by construction.
pub fn coriolis_matrix<T: Scalar>(p: &FingerParams<T>, theta: [T; 2], dtheta: [T; 2]) -> [[T; 2]; 2] {
    let (_, _, beta) = inertia_coeffs(p);
    let h = -beta * theta[1].sin();
    [
        [h * dtheta[1], h * (dtheta[0] + dtheta[1])],
        [-h * dtheta[0], T::zero()],
    ]
}

/// Gravity torque vector, the configuration gradient of the potential
/// `U = grav * ((m1 lc1 + m2 l1) sin(theta1) + m2 lc2 sin(theta1 + theta2))`.
/// Gravity acts in the finger's plane and pulls the links toward the hanging
/// posture `theta = -pi/2`; the torque is maximal with the links stretched
/// horizontally at `theta = (0, 0)`.
pub fn gravity_vector<T: Scalar>(p: &FingerParams<T>, theta: [T; 2]) -> [T; 2] {
    let c1 = theta[0].cos();
    let c12 = (theta[0] + theta[1]).cos();
    [
        p.grav * ((p.m1 * p.lc1 + p.m2 * p.l1) * c1 + p.m2 * p.lc2 * c12),
        p.grav * (p.m2 * p.lc2 * c12),
    ]
}

/// Restoring torque of the diagonal joint springs with zero rest angle:
/// `(k1s * theta1, k2s * theta2)`.
pub fn spring_torque<T: Scalar>(p: &FingerParams<T>, theta: [T; 2]) -> [T; 2] {
    [p.k1s * theta[0], p.k2s * theta[1]]
}

/// Constraint row `A = [1, -r2/r1]`, the normal of the tendon coupling
/// `A · dtheta = 0`.
pub fn constraint_row<T: Scalar>(p: &FingerParams<T>) -> [T; 2] {
    [T::one(), -(p.r2 / p.r1)]
}

/// Reduction (null-space) column `D = [1, r1/r2]`, mapping the independent
/// coordinate onto both joints: `theta = D * x1`. Satisfies `A · D = 0`.
pub fn reduction_vector<T: Scalar>(p: &FingerParams<T>) -> [T; 2] {
    [T::one(), p.r1 / p.r2]
}

/// Expands the reduced coordinate and rate onto both joints through `D`.
/// The output satisfies the tendon constraint exactly by construction.
pub fn expand_state<T: Scalar>(p: &FingerParams<T>, x1: T, x2: T) -> FullJointState<T> {
    let rho = p.r1 / p.r2;
    FullJointState {
        theta: [x1, rho * x1],
        dtheta: [x2, rho * x2],
    }
}

/// Finger-side reduced terms obtained by projecting the two-joint model
/// through `D`: scalar inertia `mp = DᵀMD`, velocity coefficient `gamma`
/// (the velocity torque is `gamma * x2²`), gravity `gp = DᵀG`, and combined
/// stiffness `kp = DᵀKD = k1s + rho² k2s`.
struct FingerSide<T> {
    mp: T,
    gamma: T,
    gp: T,
    kp: T,
}

fn finger_side<T: Scalar>(p: &FingerParams<T>, x1: T) -> FingerSide<T> {
    let rho = p.r1 / p.r2;
    let (alpha1, alpha2, beta) = inertia_coeffs(p);
    let th2 = rho * x1;
    let one_rho = T::one() + rho;
    let two = lit::<T>(2.0);
    FingerSide {
        mp: alpha1 + two * rho * alpha2 + rho * rho * alpha2 + two * beta * one_rho * th2.cos(),
        gamma: -beta * rho * one_rho * th2.sin(),
        gp: p.grav
            * ((p.m1 * p.lc1 + p.m2 * p.l1) * x1.cos()
                + p.m2 * p.lc2 * one_rho * (one_rho * x1).cos()),
        kp: p.k1s + rho * rho * p.k2s,
    }
}

/// Combined plant terms at `(x1, x2)`.
///
/// The finger-side projection `DᵀMD` and friends are lifted to the motor side
/// with the lever ratio `sigma = ra/r1` (tendon travel maps motor rotation to
/// joint rotation as `phi = (r1/ra) x1`), and the slider + rotor contribute
/// `(r1/ra)(J + ms ra²)` of reflected inertia and `(r1/ra) B x2` of damping
/// torque:
///
/// ```text
/// mpp = (ra/r1) DᵀMD + (r1/ra)(J + ms ra²)
/// cpp = (ra/r1) gamma x2² + (r1/ra) B x2
/// gpp = (ra/r1) DᵀG
/// kpp = (ra/r1) (k1s + rho² k2s) x1
/// ```
pub fn reduced_terms<T: Scalar>(
    fp: &FingerParams<T>,
    ap: &ActuatorParams<T>,
    x1: T,
    x2: T,
) -> ReducedTerms<T> {
    let side = finger_side(fp, x1);
    let sigma = ap.ra / fp.r1;
    let sigma_inv = fp.r1 / ap.ra;
    ReducedTerms {
        mpp: sigma * side.mp + sigma_inv * (ap.j + ap.ms * ap.ra * ap.ra),
        cpp: sigma * side.gamma * x2 * x2 + sigma_inv * ap.b * x2,
        gpp: sigma * side.gp,
        kpp: sigma * side.kp * x1,
    }
}

/// Closed-form partial derivatives of [`reduced_terms`] with respect to the
/// state, used by the controller's analytic virtual-control rate.
pub fn reduced_term_partials<T: Scalar>(
    fp: &FingerParams<T>,
    ap: &ActuatorParams<T>,
    x1: T,
    x2: T,
) -> ReducedTermPartials<T> {
    let rho = fp.r1 / fp.r2;
    let (_, _, beta) = inertia_coeffs(fp);
    let th2 = rho * x1;
    let one_rho = T::one() + rho;
    let two = lit::<T>(2.0);
    let sigma = ap.ra / fp.r1;
    let sigma_inv = fp.r1 / ap.ra;
    let gamma = -beta * rho * one_rho * th2.sin();
    let dmp = -two * beta * one_rho * rho * th2.sin();
    let dgamma = -beta * rho * rho * one_rho * th2.cos();
    let dgp = dgp_dx1(fp, x1, one_rho);
    let kp = fp.k1s + rho * rho * fp.k2s;
    ReducedTermPartials {
        dmpp_dx1: sigma * dmp,
        dcpp_dx1: sigma * x2 * x2 * dgamma,
        dcpp_dx2: two * sigma * gamma * x2 + sigma_inv * ap.b,
        dgpp_dx1: sigma * dgp,
        dkpp_dx1: sigma * kp,
    }
}

/// d(DᵀG)/dx1 in closed form.
fn dgp_dx1<T: Scalar>(p: &FingerParams<T>, x1: T, one_rho: T) -> T {
    p.grav
        * (-(p.m1 * p.lc1 + p.m2 * p.l1) * x1.sin()
            - p.m2 * p.lc2 * one_rho * one_rho * (one_rho * x1).sin())
}

/// Drift and input gain of the strict-feedback form:
/// `f = -(cpp + gpp + kpp)/mpp`, `g = 1/mpp`, so `x2' = f + g x3`.
pub fn drift_and_gain<T: Scalar>(terms: ReducedTerms<T>) -> (T, T) {
    let f = -(terms.cpp + terms.gpp + terms.kpp) / terms.mpp;
    let g = T::one() / terms.mpp;
    (f, g)
}

/// Electrical feedback torque rate `(Ra/L) x3 + (Kt Kb r1 / (ra L)) x2`.
///
/// Both [`state_derivative`] and the controller's voltage law evaluate this
/// one expression, so the law's cancellation of the armature dynamics is
/// exact in floating point too, not just algebraically.
pub(crate) fn electrical_feedback<T: Scalar>(
    fp: &FingerParams<T>,
    ap: &ActuatorParams<T>,
    x2: T,
    x3: T,
) -> T {
    (ap.rarm / ap.l) * x3 + (ap.kt * ap.kb * fp.r1) / (ap.ra * ap.l) * x2
}

/// Time derivative of the reduced state under armature voltage `e_volt`:
///
/// ```text
/// x1' = x2
/// x2' = f(x1, x2) + g(x1) x3
/// x3' = -(Ra/L) x3 - (Kt Kb r1)/(ra L) x2 + (Kt/L) E
/// ```
///
/// The third row is the armature circuit expressed in torque units
/// (`x3 = Kt i`), with the back-EMF term reflecting the motor speed
/// `phi' = (r1/ra) x2`.
pub fn state_derivative<T: Scalar>(
    fp: &FingerParams<T>,
    ap: &ActuatorParams<T>,
    s: ReducedState<T>,
    e_volt: T,
) -> [T; 3] {
    let terms = reduced_terms(fp, ap, s.x1, s.x2);
    let (f, g) = drift_and_gain(terms);
    [
        s.x2,
        f + g * s.x3,
        (ap.kt / ap.l) * e_volt - electrical_feedback(fp, ap, s.x2, s.x3),
    ]
}

/// Total tendon force `f1 + f2` (N) required to realize an acceleration
/// `x1dd` at `(x1, x2)`, from the finger-side balance
/// `M' x1'' + gamma x2² + G' + K' x1 = r1 (f1 + f2)`.
///
/// Only the sum is determined by the reduced model; the split into the two
/// individual tendon tensions is statically indeterminate. The actuator
/// parameters do not enter the finger-side balance; the argument exists for
/// signature uniformity with the other plant operations.
pub fn tendon_force_sum<T: Scalar>(
    fp: &FingerParams<T>,
    _ap: &ActuatorParams<T>,
    x1: T,
    x2: T,
    x1dd: T,
) -> T {
    let side = finger_side(fp, x1);
    (side.mp * x1dd + side.gamma * x2 * x2 + side.gp + side.kp * x1) / fp.r1
}

/// Lagrange multiplier of the constraint force `Aᵀ lambda` in the full
/// two-joint equation of motion
///
/// ```text
/// M(theta) theta'' + C(theta, theta') theta' + G(theta) + K theta = tau + Aᵀ lambda .
/// ```
///
/// The joint state is expanded through `D` from `(x1, x2, x1dd)` and the
/// residual of the equation is projected onto `Aᵀ` (which together with `D`
/// spans the plane, since `A D = 0`). When the inputs are dynamically
/// consistent — `x1dd` is the actual acceleration produced by `tau` — the
/// `D` component of the residual vanishes and `Aᵀ lambda` absorbs the rest
/// exactly, making this a consistency diagnostic for the reduction.
pub fn lagrange_multiplier<T: Scalar>(
    fp: &FingerParams<T>,
    x1: T,
    x2: T,
    x1dd: T,
    tau: [T; 2],
) -> T {
    let st = expand_state(fp, x1, x2);
    let rho = fp.r1 / fp.r2;
    let ddtheta = [x1dd, rho * x1dd];
    let m = mass_matrix(fp, st.theta);
    let c = coriolis_matrix(fp, st.theta, st.dtheta);
    let g = gravity_vector(fp, st.theta);
    let k = spring_torque(fp, st.theta);
    let resid = [
        m[0][0] * ddtheta[0] + m[0][1] * ddtheta[1] + c[0][0] * st.dtheta[0]
            + c[0][1] * st.dtheta[1]
            + g[0]
            + k[0]
            - tau[0],
        m[1][0] * ddtheta[0] + m[1][1] * ddtheta[1] + c[1][0] * st.dtheta[0]
            + c[1][1] * st.dtheta[1]
            + g[1]
            + k[1]
            - tau[1],
    ];
    let a = constraint_row(fp);
    (a[0] * resid[0] + a[1] * resid[1]) / (a[0] * a[0] + a[1] * a[1])
}
