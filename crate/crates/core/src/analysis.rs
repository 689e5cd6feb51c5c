//! Independent checks and post-processing for simulation traces.
//!
//! Two kinds of tooling live here:
//!
//! * **Oracles** that re-derive the plant from first principles. The
//!   Lagrangian oracle builds `M`, `C·θ̇`, and `G` by finite-differencing the
//!   kinetic and potential energies, never touching the closed-form matrix
//!   code it is meant to check. The elimination oracle computes the combined
//!   rigid-body/slider acceleration directly from the full-coordinate
//!   matrices and the coupling ratios, providing an independent route to the
//!   reduced drift and gain.
//! * **Metrics** that summarize a finished trace: step-response figures
//!   (settling time, overshoot, steady-state error), tracking-error figures
//!   over an evaluation window, and a Lyapunov audit that confirms the
//!   recorded energy function decays the way the control design promises.

use crate::controller::{lyapunov_rate, ControllerGains};
use crate::dynamics::{
    coriolis_matrix, gravity_vector, mass_matrix, spring_torque, ActuatorParams, FingerParams,
};
use crate::error::{require, Result};
use crate::scalar::{lit, Scalar};
use crate::simulator::TraceRecord;

/// Finite-difference step sizes used by [`lagrangian_oracle_with_steps`].
///
/// The defaults are tuned per derivative kind. The kinetic energy is exactly
/// quadratic in the joint rates, so the velocity Hessian has no truncation
/// error and `h_hess` can stay large to suppress round-off. Position
/// derivatives of the trigonometric terms do truncate, so `h_pos` sits at the
/// usual central-difference sweet spot. The mixed position/velocity second
/// differences split the difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSteps<T> {
    /// Step for position gradients (potential energy → gravity vector).
    pub h_pos: T,
    /// Step for the velocity Hessian (kinetic energy → mass matrix).
    pub h_hess: T,
    /// Position step for the mixed second differences feeding `C·θ̇`.
    pub h_mix_pos: T,
    /// Velocity step for the mixed second differences feeding `C·θ̇`.
    pub h_mix_vel: T,
}

impl<T: Scalar> Default for OracleSteps<T> {
    fn default() -> Self {
        Self {
            h_pos: lit(1.0e-6),
            h_hess: lit(1.0e-3),
            h_mix_pos: lit(1.0e-5),
            h_mix_vel: lit(1.0e-2),
        }
    }
}

/// Total kinetic energy of the two links, from velocities of the mass
/// centers rather than from any precomputed inertia matrix.
///
/// Link 1 rotates about the fixed base, link 2 about the moving elbow:
///
/// ```text
/// T = ½ (m₁ l_c1² + i₁) θ̇₁²  +  ½ m₂ |v_c2|²  +  ½ i₂ (θ̇₁ + θ̇₂)²
/// ```
///
/// with the planar center-of-mass velocity of link 2 assembled from the
/// elbow velocity plus the rotation of the distal center offset.
pub fn kinetic_energy<T: Scalar>(fp: &FingerParams<T>, theta: [T; 2], dtheta: [T; 2]) -> T {
    let half = lit::<T>(0.5);
    let (s1, c1) = theta[0].sin_cos();
    let (s12, c12) = (theta[0] + theta[1]).sin_cos();
    let w2 = dtheta[0] + dtheta[1];
    let vx = -fp.l1 * s1 * dtheta[0] - fp.lc2 * s12 * w2;
    let vy = fp.l1 * c1 * dtheta[0] + fp.lc2 * c12 * w2;
    half * (fp.m1 * fp.lc1 * fp.lc1 + fp.i1) * dtheta[0] * dtheta[0]
        + half * fp.m2 * (vx * vx + vy * vy)
        + half * fp.i2 * w2 * w2
}

/// Gravitational potential energy of the two links, measured from the base
/// joint with the links hanging toward `θ = −π/2`.
///
/// Spring energy is deliberately excluded: the spring torque is linear and
/// exact, so it needs no finite-difference check, and keeping it out lets the
/// gradient of this function be compared against the gravity vector alone.
pub fn potential_energy<T: Scalar>(fp: &FingerParams<T>, theta: [T; 2]) -> T {
    let s1 = theta[0].sin();
    let s12 = (theta[0] + theta[1]).sin();
    fp.grav * (fp.m1 * fp.lc1 * s1 + fp.m2 * (fp.l1 * s1 + fp.lc2 * s12))
}

/// Finite-difference reconstruction of `M`, `C·θ̇`, and `G` with the default
/// step sizes. See [`lagrangian_oracle_with_steps`].
pub fn lagrangian_oracle<T: Scalar>(
    fp: &FingerParams<T>,
    theta: [T; 2],
    dtheta: [T; 2],
) -> ([[T; 2]; 2], [T; 2], [T; 2]) {
    lagrangian_oracle_with_steps(fp, theta, dtheta, OracleSteps::default())
}

/// Rebuilds the rigid-body terms by numerically differentiating the energies.
///
/// The three pieces follow straight from the Euler–Lagrange structure:
///
/// * `M[i][j] = ∂²T/∂θ̇ᵢ∂θ̇ⱼ` — central second differences in velocity;
/// * `G[i] = ∂U/∂θᵢ` — central first differences in position;
/// * `(C·θ̇)ᵢ = Σ_k (∂²T/∂θ̇ᵢ∂θ_k) θ̇_k − ∂T/∂θᵢ` — mixed second
///   differences, which is exactly the `Ṁθ̇ − ∂T/∂θ` split of the
///   Coriolis/centrifugal force.
///
/// Every entry converges at `O(h²)`, so halving a step should shrink its
/// truncation error roughly fourfold until round-off takes over.
pub fn lagrangian_oracle_with_steps<T: Scalar>(
    fp: &FingerParams<T>,
    theta: [T; 2],
    dtheta: [T; 2],
    steps: OracleSteps<T>,
) -> ([[T; 2]; 2], [T; 2], [T; 2]) {
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let t_at = |th: [T; 2], dth: [T; 2]| kinetic_energy(fp, th, dth);
    let shift = |v: [T; 2], i: usize, h: T| {
        let mut w = v;
        w[i] = w[i] + h;
        w
    };

    // Mass matrix: Hessian of T in the joint rates at fixed position.
    let hv = steps.h_hess;
    let mut m = [[T::zero(); 2]; 2];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let pp = t_at(theta, shift(shift(dtheta, i, hv), j, hv));
            let pm = t_at(theta, shift(shift(dtheta, i, hv), j, -hv));
            let mp = t_at(theta, shift(shift(dtheta, i, -hv), j, hv));
            let mm = t_at(theta, shift(shift(dtheta, i, -hv), j, -hv));
            *entry = (pp - pm - mp + mm) / (four * hv * hv);
        }
    }

    // Coriolis/centrifugal force: Ṁθ̇ − ∂T/∂θ, with Ṁθ̇ expanded through
    // the mixed partials ∂²T/∂θ̇ᵢ∂θ_k so only energy evaluations are needed.
    let hq = steps.h_mix_pos;
    let hw = steps.h_mix_vel;
    let mut cdq = [T::zero(); 2];
    for (i, entry) in cdq.iter_mut().enumerate() {
        let mut mdot_row = T::zero();
        for k in 0..2 {
            let pp = t_at(shift(theta, k, hq), shift(dtheta, i, hw));
            let pm = t_at(shift(theta, k, hq), shift(dtheta, i, -hw));
            let mp = t_at(shift(theta, k, -hq), shift(dtheta, i, hw));
            let mm = t_at(shift(theta, k, -hq), shift(dtheta, i, -hw));
            mdot_row = mdot_row + (pp - pm - mp + mm) / (four * hq * hw) * dtheta[k];
        }
        let tp = t_at(shift(theta, i, hq), dtheta);
        let tm = t_at(shift(theta, i, -hq), dtheta);
        *entry = mdot_row - (tp - tm) / (two * hq);
    }

    // Gravity vector: gradient of U in position.
    let hp = steps.h_pos;
    let mut g = [T::zero(); 2];
    for (i, entry) in g.iter_mut().enumerate() {
        let up = potential_energy(fp, shift(theta, i, hp));
        let um = potential_energy(fp, shift(theta, i, -hp));
        *entry = (up - um) / (two * hp);
    }

    (m, cdq, g)
}

/// Joint acceleration of the coupled finger/slider system computed by direct
/// elimination in the full coordinates, without the reduced closed forms.
///
/// The tendon ties the proximal joint, distal joint, slider, and motor
/// together through the pulley radii, so every equation of motion can be
/// projected onto the single independent coordinate. Writing
/// `R = C·θ̇ + G + Kθ` for the full-coordinate bias forces and
/// `(M·d)ᵢ = Mᵢ₁ + (r₁/r₂) Mᵢ₂` for the mass matrix contracted against the
/// coupling direction, balancing forces along the tendon gives
///
/// ```text
///        τ − b (r₁/r_a) ẋ₁ − r_a (R₁/r₁ + R₂/r₂)
/// ẍ₁ = ─────────────────────────────────────────────
///        J r₁/r_a + r_a m_s r₁ + r_a ((M·d)₁/r₁ + (M·d)₂/r₂)
/// ```
///
/// This must agree with the reduced drift-plus-gain form to round-off; the
/// two routes share no intermediate algebra beyond the raw matrices.
pub fn eliminated_acceleration<T: Scalar>(
    fp: &FingerParams<T>,
    ap: &ActuatorParams<T>,
    x1: T,
    x2: T,
    tau: T,
) -> T {
    let rho = fp.r1 / fp.r2;
    let theta = [x1, rho * x1];
    let dtheta = [x2, rho * x2];

    let m = mass_matrix(fp, theta);
    let c = coriolis_matrix(fp, theta, dtheta);
    let g = gravity_vector(fp, theta);
    let k = spring_torque(fp, theta);
    let r = [
        c[0][0] * dtheta[0] + c[0][1] * dtheta[1] + g[0] + k[0],
        c[1][0] * dtheta[0] + c[1][1] * dtheta[1] + g[1] + k[1],
    ];
    let md = [m[0][0] + rho * m[0][1], m[1][0] + rho * m[1][1]];

    let num = tau - ap.b * (fp.r1 / ap.ra) * x2 - ap.ra * (r[0] / fp.r1 + r[1] / fp.r2);
    let den = ap.j * fp.r1 / ap.ra
        + ap.ra * ap.ms * fp.r1
        + ap.ra * (md[0] / fp.r1 + md[1] / fp.r2);
    num / den
}

/// Step-response summary extracted from a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics<T> {
    /// First time after which the response stays inside the band forever
    /// (within the trace). `None` if the final sample is still outside.
    pub settling_time: Option<T>,
    /// Peak excursion beyond the target, as a percentage of the target
    /// magnitude; zero when the response never crosses the target.
    pub overshoot_pct: T,
    /// Signed terminal error `x₁(end) − target`.
    pub steady_state_error: T,
    /// Band half-width used, as a fraction of the target magnitude.
    pub band: T,
}

/// Default settling band: ±2 % of the step amplitude.
pub fn default_band<T: Scalar>() -> T {
    lit(0.02)
}

/// Computes settling time, overshoot, and steady-state error for a step
/// response toward `amplitude`.
///
/// Settling time is the timestamp of the first record after the last one
/// found outside the `band·|amplitude|` tube; a trace that never leaves the
/// tube settles at its first timestamp, and a trace whose final record is
/// still outside has not settled at all.
pub fn step_metrics<T: Scalar>(
    trace: &[TraceRecord<T>],
    amplitude: T,
    band: T,
) -> Result<StepMetrics<T>> {
    require(!trace.is_empty(), "metrics.trace", "trace has no records")?;
    require(
        amplitude.is_finite() && amplitude != T::zero(),
        "metrics.amplitude",
        "step amplitude must be finite and nonzero",
    )?;
    require(
        band.is_finite() && band > T::zero(),
        "metrics.band",
        "settling band must be positive",
    )?;

    let tube = band * amplitude.abs();
    let last_outside = trace
        .iter()
        .rposition(|rec| (rec.x1 - amplitude).abs() > tube);
    let settling_time = match last_outside {
        None => Some(trace[0].t),
        Some(i) if i + 1 == trace.len() => None,
        Some(i) => Some(trace[i + 1].t),
    };

    let peak = trace
        .iter()
        .map(|rec| rec.x1)
        .fold(T::neg_infinity(), T::max);
    let overshoot_pct = (peak - amplitude).max(T::zero()) / amplitude.abs() * lit(100.0);
    let steady_state_error = trace[trace.len() - 1].x1 - amplitude;

    Ok(StepMetrics {
        settling_time,
        overshoot_pct,
        steady_state_error,
        band,
    })
}

/// Tracking-error summary over the tail of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingMetrics<T> {
    /// Largest `|e|` at or after the window start.
    pub max_abs_error: T,
    /// Root-mean-square of `e` over the same window.
    pub rms_error: T,
    /// Start of the evaluation window, in seconds.
    pub window_start: T,
}

/// Default evaluation window start for tracking metrics: skip the first
/// second of transient.
pub fn default_window_start<T: Scalar>() -> T {
    lit(1.0)
}

/// Computes the worst-case and RMS tracking error from `window_start`
/// onward, using the recorded error column.
pub fn tracking_metrics<T: Scalar>(
    trace: &[TraceRecord<T>],
    window_start: T,
) -> Result<TrackingMetrics<T>> {
    require(!trace.is_empty(), "metrics.trace", "trace has no records")?;
    let mut count = 0usize;
    let mut max_abs = T::zero();
    let mut sum_sq = T::zero();
    for rec in trace.iter().filter(|rec| rec.t >= window_start) {
        count += 1;
        max_abs = max_abs.max(rec.e.abs());
        sum_sq = sum_sq + rec.e * rec.e;
    }
    require(
        count > 0,
        "metrics.window_start",
        "evaluation window starts after the trace ends",
    )?;
    Ok(TrackingMetrics {
        max_abs_error: max_abs,
        rms_error: (sum_sq / lit(count as f64)).sqrt(),
        window_start,
    })
}

/// Outcome of a Lyapunov audit over a trace. Thresholds are left to the
/// caller; the report just states the worst offenders and where they sit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovReport<T> {
    /// Largest single-step increase `V[i+1] − V[i]` (non-positive when the
    /// recorded function is monotonically decreasing).
    pub max_increase: T,
    /// Index of the record at which the largest increase lands.
    pub worst_increase_index: Option<usize>,
    /// Largest gap between the centered numerical derivative of the recorded
    /// `V` and the analytic decay rate `−k₁s² − k₂η²`.
    pub max_rate_residual: T,
    /// Index of the interior record with the worst rate residual.
    pub worst_residual_index: Option<usize>,
}

/// Audits the recorded Lyapunov column of a trace against the decay the
/// control design guarantees.
///
/// Two checks run in one pass. The monotonicity check scans consecutive
/// records for increases in `V`, which should be absent up to integration
/// error. The rate check differentiates `V` numerically with a centered
/// difference and compares against the analytic `V̇` rebuilt from the
/// recorded surfaces; the residual shrinks as `O(dt²)`, so a corrupted or
/// miscomputed `V` sample stands out at its exact index.
pub fn lyapunov_audit<T: Scalar>(
    trace: &[TraceRecord<T>],
    gains: &ControllerGains<T>,
) -> LyapunovReport<T> {
    let mut report = LyapunovReport {
        max_increase: T::zero(),
        worst_increase_index: None,
        max_rate_residual: T::zero(),
        worst_residual_index: None,
    };

    for i in 0..trace.len().saturating_sub(1) {
        let increase = trace[i + 1].v - trace[i].v;
        if report.worst_increase_index.is_none() || increase > report.max_increase {
            report.max_increase = increase;
            report.worst_increase_index = Some(i + 1);
        }
    }

    for i in 1..trace.len().saturating_sub(1) {
        let numeric = (trace[i + 1].v - trace[i - 1].v) / (trace[i + 1].t - trace[i - 1].t);
        let analytic = lyapunov_rate(trace[i].s, trace[i].eta, gains);
        let residual = (numeric - analytic).abs();
        if residual > report.max_rate_residual {
            report.max_rate_residual = residual;
            report.worst_residual_index = Some(i);
        }
    }

    report
}
