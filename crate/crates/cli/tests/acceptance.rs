//! Acceptance suite: one test per shipped guarantee, each printing a single
//! PASS line with the measured figure (visible under `--nocapture`).
//!
//! The ten checks cover: (1) energy-oracle equivalence of the dynamics,
//! (2) structural invariants (SPD mass matrix, passivity skew-symmetry,
//! constraint annihilation), (3) reduction-vs-elimination agreement,
//! (4) exact cancellation through the voltage law, (5) analytic-vs-numeric
//! virtual-control rate, (6) Lyapunov decay with second-order rate residual,
//! (7) step-response quality, (8) cubic tracking quality, (9) integrator
//! order, and (10) byte-level determinism with exact round-trips.

use std::time::Instant;

use fingersim_core::analysis::{
    eliminated_acceleration, lagrangian_oracle, lyapunov_audit, step_metrics, tracking_metrics,
};
use fingersim_core::controller::{control_step, virtual_control_rate};
use fingersim_core::dynamics::{
    constraint_row, coriolis_matrix, drift_and_gain, gravity_vector, mass_matrix, reduced_terms,
    reduction_vector, state_derivative,
};
use fingersim_core::simulator::{rk4_step, run};
use fingersim_core::trajectory::sample;
use fingersim_core::{
    ActuatorParams, CubicCoeffs, FingerParams, ReducedState, SimConfig, TrajectorySpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

#[test]
fn criterion_01_dynamics_match_the_energy_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fp = FingerParams::default();
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let theta = [
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        ];
        let dtheta = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let (m_fd, cdq_fd, g_fd) = lagrangian_oracle(&fp, theta, dtheta);
        let m = mass_matrix(&fp, theta);
        let c = coriolis_matrix(&fp, theta, dtheta);
        let g = gravity_vector(&fp, theta);
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max(rel(m_fd[i][j], m[i][j]));
            }
            let cdq = c[i][0] * dtheta[0] + c[i][1] * dtheta[1];
            worst = worst.max(rel(cdq_fd[i], cdq));
            worst = worst.max(rel(g_fd[i], g[i]));
        }
    }
    let elapsed = started.elapsed();
    assert!(worst < 1e-6, "worst relative error {worst}");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "criterion 01: PASS — oracle equivalence, worst rel error {worst:.3e} over 200 states \
         ({:.0} ms)",
        elapsed.as_secs_f64() * 1e3
    );
}

#[test]
fn criterion_02_structural_invariants_hold() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let fp = FingerParams::default();

    let mut worst_skew = 0.0_f64;
    for _ in 0..1000 {
        let theta = [
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        ];
        let dtheta = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let m = mass_matrix(&fp, theta);
        assert_eq!(m[0][1], m[1][0], "symmetry at {theta:?}");
        assert!(m[0][0] + m[1][1] > 0.0, "trace at {theta:?}");
        assert!(
            m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.0,
            "determinant at {theta:?}"
        );

        let h = 1e-6;
        let plus = mass_matrix(&fp, [theta[0] + h * dtheta[0], theta[1] + h * dtheta[1]]);
        let minus = mass_matrix(&fp, [theta[0] - h * dtheta[0], theta[1] - h * dtheta[1]]);
        let c = coriolis_matrix(&fp, theta, dtheta);
        for i in 0..2 {
            for j in 0..2 {
                let mdot_ij = (plus[i][j] - minus[i][j]) / (2.0 * h);
                let mdot_ji = (plus[j][i] - minus[j][i]) / (2.0 * h);
                let sym = (mdot_ij - 2.0 * c[i][j]) + (mdot_ji - 2.0 * c[j][i]);
                worst_skew = worst_skew.max(sym.abs());
            }
        }
    }
    assert!(worst_skew < 1e-9, "max |S+S^T| = {worst_skew}");

    // Constraint annihilation: arbitrary pulley pairs land within a few ulps
    // of zero; pairs whose ratio is a power of two cancel bitwise.
    let mut worst_ad = 0.0_f64;
    for _ in 0..100 {
        let fp = FingerParams {
            r1: rng.gen_range(1e-5..0.1),
            r2: rng.gen_range(1e-5..0.1),
            ..FingerParams::default()
        };
        let a = constraint_row(&fp);
        let d = reduction_vector(&fp);
        worst_ad = worst_ad.max((a[0] * d[0] + a[1] * d[1]).abs());
    }
    assert!(worst_ad <= 4.0 * f64::EPSILON, "max |A·d| = {worst_ad}");
    for _ in 0..100 {
        let r1 = rng.gen_range(1e-5..0.1);
        let fp = FingerParams {
            r1,
            r2: r1 * 0.5_f64.powi(rng.gen_range(-3..4)),
            ..FingerParams::default()
        };
        let a = constraint_row(&fp);
        let d = reduction_vector(&fp);
        assert_eq!(a[0] * d[0] + a[1] * d[1], 0.0, "r1={}, r2={}", fp.r1, fp.r2);
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "criterion 02: PASS — SPD + skew (max |S+Sᵀ| {worst_skew:.3e}) at 1000 states; \
         |A·d| ≤ {worst_ad:.3e} with power-of-two ratios bitwise zero"
    );
}

#[test]
fn criterion_03_reduction_equals_direct_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fp = FingerParams::default();
    let ap = ActuatorParams::default();
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let x1 = rng.gen_range(-1.5..1.5);
        let x2 = rng.gen_range(-5.0..5.0);
        let tau = rng.gen_range(-0.5..0.5);
        let (f, g) = drift_and_gain(reduced_terms(&fp, &ap, x1, x2));
        let direct = eliminated_acceleration(&fp, &ap, x1, x2, tau);
        worst = worst.max(rel(f + g * tau, direct));
    }
    assert!(worst < 1e-8, "worst relative error {worst}");
    println!(
        "criterion 03: PASS — reduced vs eliminated acceleration, worst rel error {worst:.3e} \
         over 200 states"
    );
}

#[test]
fn criterion_04_voltage_law_cancels_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let fp = FingerParams::default();
    let ap = ActuatorParams::default();
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let state = ReducedState {
            x1: rng.gen_range(-1.5..1.5),
            x2: rng.gen_range(-10.0..10.0),
            x3: rng.gen_range(-1.0..1.0),
        };
        let u = rng.gen_range(-500.0..500.0);
        let e_volt = fingersim_core::controller::voltage_law(&ap, &fp, state.x2, state.x3, u);
        let d = state_derivative(&fp, &ap, state, e_volt);
        worst = worst.max((d[2] - u).abs());
    }
    assert!(worst <= 1e-12, "worst |ẋ3 − u| = {worst}");
    println!("criterion 04: PASS — exact cancellation, worst |ẋ3 − u| = {worst:.3e} over 200 states");
}

#[test]
fn criterion_05_virtual_control_rate_matches_finite_differences() {
    let config = SimConfig::step_experiment();
    let trace = run(&config).unwrap();

    // Micro-flow the closed loop a hair forward and backward from each
    // sample and difference the virtual control evaluated there.
    let h = 1e-6;
    let flow = |state: ReducedState, t: f64, dt: f64| -> ReducedState {
        let y = [state.x1, state.x2, state.x3];
        let next = rk4_step(
            |tt, yy: [f64; 3]| {
                let s = ReducedState {
                    x1: yy[0],
                    x2: yy[1],
                    x3: yy[2],
                };
                let sig =
                    control_step(&config.fp, &config.ap, s, sample(&config.traj, tt), &config.gains)
                        .expect("control law evaluates");
                state_derivative(&config.fp, &config.ap, s, sig.e_volt)
            },
            y,
            t,
            dt,
        )
        .expect("micro-step stays finite");
        ReducedState {
            x1: next[0],
            x2: next[1],
            x3: next[2],
        }
    };
    let x3d_at = |state: ReducedState, t: f64| -> f64 {
        control_step(&config.fp, &config.ap, state, sample(&config.traj, t), &config.gains)
            .unwrap()
            .x3d
    };

    let mut worst_margin = f64::INFINITY;
    let mut worst_abs = 0.0_f64;
    for rec in &trace {
        let state = ReducedState {
            x1: rec.x1,
            x2: rec.x2,
            x3: rec.x3,
        };
        let refp = sample(&config.traj, rec.t);
        let analytic = virtual_control_rate(&config.fp, &config.ap, state, refp, &config.gains);
        let fd = (x3d_at(flow(state, rec.t, h), rec.t + h)
            - x3d_at(flow(state, rec.t, -h), rec.t - h))
            / (2.0 * h);
        let gap = (analytic - fd).abs();
        let budget = 1e-4 * (1.0 + analytic.abs());
        assert!(
            gap < budget,
            "t = {}: analytic {analytic} vs fd {fd} (gap {gap}, budget {budget})",
            rec.t
        );
        worst_abs = worst_abs.max(gap);
        worst_margin = worst_margin.min(budget - gap);
    }
    println!(
        "criterion 05: PASS — analytic ẋ3d vs finite difference at all {} samples, \
         worst gap {worst_abs:.3e}",
        trace.len()
    );
}

#[test]
fn criterion_06_lyapunov_decays_with_second_order_residual() {
    // Non-increase on both bundled experiments at the shipped step size.
    let step_trace = run(&SimConfig::step_experiment()).unwrap();
    let step_audit = lyapunov_audit(&step_trace, &SimConfig::step_experiment().gains);
    assert!(
        step_audit.max_increase <= 1e-9,
        "step experiment V increase {}",
        step_audit.max_increase
    );
    let track_config = SimConfig::tracking_experiment();
    let track_trace = run(&track_config).unwrap();
    let track_audit = lyapunov_audit(&track_trace, &track_config.gains);
    assert!(
        track_audit.max_increase <= 1e-9,
        "tracking experiment V increase {}",
        track_audit.max_increase
    );

    // The centered-difference rate residual is O(dt²): halving dt shrinks it
    // by roughly four.
    let residual_at = |dt: f64| {
        let mut config = SimConfig::step_experiment();
        config.dt = dt;
        config.t_end = 2.0;
        let trace = run(&config).unwrap();
        lyapunov_audit(&trace, &config.gains).max_rate_residual
    };
    let coarse = residual_at(1e-3);
    let fine = residual_at(5e-4);
    let ratio = coarse / fine;
    assert!(
        (2.8..=5.2).contains(&ratio),
        "residual ratio {ratio} (coarse {coarse}, fine {fine})"
    );
    println!(
        "criterion 06: PASS — V non-increasing (worst step increase {:.3e}, tracking {:.3e}); \
         rate-residual ratio {ratio:.2} on dt halving",
        step_audit.max_increase, track_audit.max_increase
    );
}

#[test]
fn criterion_07_step_response_is_overshoot_free_and_settles() {
    let config = SimConfig::step_experiment();
    let started = Instant::now();
    let trace = run(&config).unwrap();
    let elapsed = started.elapsed();

    let amplitude = 60.0_f64.to_radians();
    let m = step_metrics(&trace, amplitude, 0.02).unwrap();
    assert!(m.overshoot_pct < 0.1, "overshoot {}%", m.overshoot_pct);
    let settling = m.settling_time.expect("the step settles");
    assert!(settling <= 2.0, "settling time {settling}");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 07: PASS — overshoot {:.3}% (< 0.1%), settling {settling} s (≤ 2.0 s), \
         run in {:.0} ms",
        m.overshoot_pct,
        elapsed.as_secs_f64() * 1e3
    );
}

#[test]
fn criterion_08_cubic_tracking_stays_within_five_hundredths_deg() {
    let started = Instant::now();

    // Rest-to-rest boundary fit (the bundled tracking experiment) and the
    // same move written as explicit rounded coefficients.
    let boundary = SimConfig::tracking_experiment();
    let mut poly = SimConfig::tracking_experiment();
    poly.traj = TrajectorySpec::CubicPoly {
        coeffs: CubicCoeffs {
            a3: -0.0021,
            a2: 0.0314,
            a1: 0.0,
            a0: 0.0,
        },
        hold_after: true,
    };

    let mut worst_deg = 0.0_f64;
    for config in [&boundary, &poly] {
        let trace = run(config).unwrap();
        let m = tracking_metrics(&trace, 1.0).unwrap();
        let max_deg = m.max_abs_error.to_degrees();
        assert!(max_deg <= 0.05, "post-transient error {max_deg}°");
        worst_deg = worst_deg.max(max_deg);
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 2.0, "took {elapsed:?}");
    println!(
        "criterion 08: PASS — cubic tracking error ≤ {worst_deg:.4}° (≤ 0.05°) on both cubic \
         references, runs in {:.0} ms",
        elapsed.as_secs_f64() * 1e3
    );
}

#[test]
fn criterion_09_integrator_is_fourth_order() {
    let integrate = |dt: f64| {
        let n = (1.0 / dt).round() as usize;
        let mut y = [1.0_f64];
        for i in 0..n {
            y = rk4_step(|_, y: [f64; 1]| [-y[0]], y, dt * i as f64, dt).unwrap();
        }
        (y[0] - (-1.0_f64).exp()).abs()
    };
    let ratio = integrate(0.1) / integrate(0.05);
    assert!((12.0..=20.0).contains(&ratio), "convergence ratio {ratio}");

    let final_x1 = |dt: f64| {
        let mut config = SimConfig::step_experiment();
        config.dt = dt;
        run(&config).unwrap().last().unwrap().x1
    };
    let gap = (final_x1(0.01) - final_x1(0.005)).abs();
    assert!(gap < 1e-6, "dt-halving changed final x1 by {gap}");
    println!(
        "criterion 09: PASS — RK4 error ratio {ratio:.2} ∈ [12, 20]; final x1 shifts {gap:.3e} rad \
         on dt halving"
    );
}

#[test]
fn criterion_10_runs_are_byte_identical_and_round_trips_exact() {
    use fingersim_cli::config::{parse_config, write_config};
    use fingersim_cli::trace_io::{format_trace, parse_trace};
    use std::process::Command;

    let base = std::env::temp_dir().join(format!("fingersim-accept-{}", std::process::id()));
    std::fs::create_dir_all(&base).unwrap();
    let config_path = base.join("run.cfg");
    std::fs::write(&config_path, "sim.t_end = 1\n").unwrap();

    let exe = env!("CARGO_BIN_EXE_fingersim");
    for dir in ["a", "b"] {
        let output = Command::new(exe)
            .args(["simulate", "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(base.join(dir))
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "simulate into {dir} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    let a = std::fs::read(base.join("a/trace.csv")).unwrap();
    let b = std::fs::read(base.join("b/trace.csv")).unwrap();
    assert_eq!(a, b, "repeated runs must be byte-identical");

    // Config round-trip: serialize → parse is the identity.
    for config in [SimConfig::default(), SimConfig::tracking_experiment()] {
        let text = write_config(&config);
        assert_eq!(parse_config(&text).unwrap(), config);
    }

    // CSV round-trip: the file reproduces the in-memory trace exactly.
    let trace = run(&parse_config("sim.t_end = 1\n").unwrap()).unwrap();
    let text = String::from_utf8(a).unwrap();
    assert_eq!(parse_trace(&text).unwrap(), trace);
    assert_eq!(format_trace(&trace).as_bytes(), text.as_bytes());

    std::fs::remove_dir_all(&base).ok();
    println!(
        "criterion 10: PASS — byte-identical reruns ({} bytes), config and CSV round-trips exact",
        text.len()
    );
}
