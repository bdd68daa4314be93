mod common;

use common::{assert_close, assert_vec_close, max_diff, v};
use lagdirac::constraints::discrete_constraint_residual;
use lagdirac::integrator::*;
use lagdirac::mechanics::{d1_ld, d2_ld, ConfigPair, DiscreteSetup, MechModel, Scheme};
use lagdirac::models::*;
use lagdirac::{Error, Matrix, Vector};

fn heis(scheme: Scheme) -> DiscreteSetup {
    DiscreteSetup::new(heisenberg(), HEISENBERG_H, scheme).unwrap()
}

fn disk(scheme: Scheme) -> DiscreteSetup {
    DiscreteSetup::new(rolling_disk_default(), DISK_H, scheme).unwrap()
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn heisenberg_minus_step_continues_the_line() {
    let (q0, q1) = heisenberg_seed();
    let r = step(&heis(Scheme::Minus), &q0, &q1, &opts()).unwrap();
    assert_vec_close(&r.q_next, &v(&[1.10, 0.20, -0.10]), 1e-14);
    assert_eq!(r.mu.len(), 1);
    assert!(r.mu[0].abs() < 1e-12);
    assert!(r.residual_norm <= opts().tol);
}

#[test]
fn free_particle_step_is_linear_extrapolation() {
    let s = DiscreteSetup::new(free_particle(3).unwrap(), 0.37, Scheme::Plus).unwrap();
    let (a, b) = (v(&[1.0, -2.0, 0.5]), v(&[1.5, -1.0, 0.25]));
    let r = step(&s, &a, &b, &opts()).unwrap();
    assert_vec_close(&r.q_next, &(2.0 * &b - &a), 1e-15);
    assert_eq!(r.mu.len(), 0);
}

#[test]
fn oscillator_step_matches_recurrence() {
    let s = DiscreteSetup::new(oscillator(1.0).unwrap(), 0.1, Scheme::Minus).unwrap();
    let r = step(&s, &v(&[1.0]), &v(&[1.0]), &opts()).unwrap();
    assert_close(r.q_next[0], 0.99, 1e-14);
}

#[test]
fn heisenberg_minus_run_is_a_straight_line() {
    let (q0, q1) = heisenberg_seed();
    let traj = run(&heis(Scheme::Minus), &q0, &q1, 10, &opts()).unwrap();
    assert_eq!(traj.len(), 12);
    let d = &q1 - &q0;
    for (k, q) in traj.q.iter().enumerate() {
        assert_vec_close(q, &(&q0 + &d * k as f64), 1e-14);
    }
    assert!(traj.multipliers.iter().all(|mu| mu[0].abs() < 1e-12));
}

#[test]
fn zero_steps_return_the_seed() {
    let (q0, q1) = heisenberg_seed();
    let traj = run(&heis(Scheme::Plus), &q0, &q1, 0, &opts()).unwrap();
    assert_eq!(traj.q, vec![q0, q1]);
    assert!(traj.multipliers.is_empty());
    assert_eq!(traj.momenta.len(), 2);
    assert_eq!(traj.diagnostics.len(), 1);
}

#[test]
fn disk_heading_follows_linear_recurrence() {
    let (q0, q1) = rolling_disk_seed();
    let traj = run(&disk(Scheme::Plus), &q0, &q1, 10, &opts()).unwrap();
    for k in 1..traj.len() - 1 {
        let r = traj.q[k + 1][3] - 2.0 * traj.q[k][3] + traj.q[k - 1][3];
        assert!(r.abs() < 1e-10, "k={k}: {r:e}");
    }
}

#[test]
fn seed_from_velocity() {
    let s = heis(Scheme::Minus);
    let seed = build_q1_from_velocity(&s, &v(&[1.0, 0.0, 0.1]), &v(&[5.0, 10.0, -10.0])).unwrap();
    assert_vec_close(seed.q1(), &v(&[1.05, 0.1, 0.0]), 1e-15);
    assert!(seed.constraint_residual[0].abs() < 1e-12);
    let q0 = v(&[0.3, 0.2, 0.1]);
    assert_eq!(build_q1_from_velocity(&s, &q0, &Vector::zeros(3)).unwrap().q1(), &q0);
    // z velocity alone violates the constraint; the sum is kept as given
    let bad = build_q1_from_velocity(&s, &q0, &v(&[0.0, 0.0, 1.0])).unwrap();
    assert_vec_close(bad.q1(), &v(&[0.3, 0.2, 0.11]), 1e-15);
    assert_close(bad.constraint_residual[0], 1.0, 1e-12);
    assert!(build_q1_from_velocity(&s, &q0, &v(&[1.0])).is_err());
}

#[test]
fn dla_residual_of_solved_steps() {
    for s in [disk(Scheme::Plus), disk(Scheme::Minus), heis(Scheme::Plus)] {
        let q0 = Vector::from_fn(s.dim(), |i, _| 0.1 * i as f64);
        let seed = build_q1_from_velocity(&s, &q0, &Vector::zeros(s.dim())).unwrap();
        let (q0, q1) = (seed.pair.q0().clone(), seed.q1().clone());
        let r = step(&s, &q0, &q1, &opts()).unwrap();
        let res = lagrange_d_alembert_residual(&s, &q0, &q1, &r.q_next, &r.mu).unwrap();
        assert!(res.amax() < opts().tol * 10.0, "{res:?}");
    }
}

#[test]
fn dla_residual_on_straight_line_and_perturbed() {
    let s = heis(Scheme::Minus);
    let (a, b, c) = (v(&[1.0, 0.0, 0.1]), v(&[1.05, 0.1, 0.0]), v(&[1.10, 0.20, -0.10]));
    let res = lagrange_d_alembert_residual(&s, &a, &b, &c, &v(&[0.0])).unwrap();
    assert_eq!(res.len(), 4);
    assert!(res.amax() < 1e-12, "{res:?}");
    for i in 0..3 {
        let mut cp = c.clone();
        cp[i] += 1e-3;
        let res = lagrange_d_alembert_residual(&s, &a, &b, &cp, &v(&[0.0])).unwrap();
        assert!(res.amax() > 1e-4, "component {i}: {res:?}");
    }
    assert!(matches!(
        lagrange_d_alembert_residual(&s, &a, &b, &c, &v(&[0.0, 0.0])),
        Err(Error::DimensionMismatch { .. })
    ));
}

/// Hand-written residual with the documented multiplier sign.
fn momentum_matching(s: &DiscreteSetup, traj: &Trajectory, k: usize) -> f64 {
    let prev = traj.pair(k - 1).unwrap();
    let next = traj.pair(k).unwrap();
    let mu = traj.multiplier(k).unwrap();
    let sign = if s.scheme == Scheme::Plus { 1.0 } else { -1.0 };
    let force = s.model.omega(&traj.q[k]).tr_mul(mu) * sign;
    (d2_ld(s, &prev).unwrap() + d1_ld(s, &next).unwrap() - force).amax()
}

#[test]
fn momentum_matching_and_constraints_along_disk_runs() {
    for scheme in [Scheme::Plus, Scheme::Minus] {
        let s = disk(scheme);
        let (q0, q1) = rolling_disk_seed();
        let traj = run(&s, &q0, &q1, 500, &opts()).unwrap();
        for k in 1..traj.len() - 1 {
            assert!(momentum_matching(&s, &traj, k) <= 10.0 * opts().tol, "{scheme} k={k}");
            let c = discrete_constraint_residual(&s, &traj.pair(k).unwrap()).unwrap();
            assert!(c.amax() <= 10.0 * opts().tol, "{scheme} k={k}: {c:?}");
        }
        // momenta[k] is D2 of the pair ending at k
        for k in 1..traj.len() {
            assert_eq!(traj.momenta[k], d2_ld(&s, &traj.pair(k - 1).unwrap()).unwrap());
        }
    }
}

#[test]
fn seed_violation_is_reported_not_fatal() {
    let s = disk(Scheme::Plus);
    let (q0, q1) = rolling_disk_seed();
    let traj = run(&s, &q0, &q1, 5, &opts()).unwrap();
    assert!(traj.seed_constraint_residual > 1e-3);
    let m = disk(Scheme::Minus);
    let traj = run(&m, &q0, &q1, 5, &opts()).unwrap();
    assert!(traj.seed_constraint_residual < 1e-4);
}

/// `L = v^2/2 + 0.1 v^4 - q^2/2`; the rectangle-rule DEL is a monotone
/// cubic in the next velocity.
fn stiff_velocity_model() -> MechModel {
    MechModel::new("quartic_v", 1, |q: &Vector, v: &Vector| {
        0.5 * v[0] * v[0] + 0.1 * v[0].powi(4) - 0.5 * q[0] * q[0]
    })
    .unwrap()
    .with_gradients(
        |q: &Vector, _v: &Vector| -q.clone(),
        |_q: &Vector, v: &Vector| v.map(|x| x + 0.4 * x * x * x),
    )
}

fn bisect_del(h: f64, q_prev: f64, q_curr: f64) -> f64 {
    let g = |w: f64| w + 0.4 * w * w * w;
    let u = (q_curr - q_prev) / h;
    let target = g(u) - h * q_curr;
    let (mut lo, mut hi) = (-100.0, 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    q_curr + h * 0.5 * (lo + hi)
}

#[test]
fn unconstrained_stepper_matches_bisection_oracle() {
    let h = 0.05;
    for mode in [JacobianMode::Analytic, JacobianMode::FiniteDifference] {
        let s = DiscreteSetup::new(stiff_velocity_model(), h, Scheme::Plus).unwrap();
        // converge to the rounding floor so the global comparison is fair
        let o = SolverOptions {
            jacobian_mode: mode,
            tol: 1e-14,
            ..opts()
        };
        let traj = run(&s, &v(&[1.0]), &v(&[1.08]), 200, &o).unwrap();
        // each step solves the same scalar equation as the oracle
        for k in 2..traj.len() {
            let c = bisect_del(h, traj.q[k - 2][0], traj.q[k - 1][0]);
            assert_close(traj.q[k][0], c, 1e-12);
        }
        // and the whole path agrees while rounding has not compounded
        let (mut a, mut b) = (1.0, 1.08);
        for k in 2..50 {
            let c = bisect_del(h, a, b);
            assert_close(traj.q[k][0], c, 1e-12);
            a = b;
            b = c;
        }
    }
}

#[test]
fn oscillator_matches_closed_recurrence() {
    let (h, w) = (0.1, 1.3);
    let s = DiscreteSetup::new(oscillator(w).unwrap(), h, Scheme::Minus).unwrap();
    let traj = run(&s, &v(&[1.0]), &v(&[0.99]), 1000, &opts()).unwrap();
    let c = 2.0 - h * h * w * w;
    let (mut a, mut b) = (1.0, 0.99);
    for k in 2..traj.len() {
        let next = c * b - a;
        assert_close(traj.q[k][0], next, 1e-12);
        a = b;
        b = next;
    }
}

#[test]
fn heisenberg_time_reversal() {
    let (q0, q1) = heisenberg_seed();
    let n = 50;
    for scheme in [Scheme::Plus, Scheme::Minus] {
        let s = heis(scheme);
        let fwd = run(&s, &q0, &q1, n, &opts()).unwrap();
        let back = run(&s, &q1, &q0, n, &opts()).unwrap();
        let d = &q1 - &q0;
        for k in 0..back.len() {
            let expected = &q1 - &d * k as f64;
            assert_vec_close(&back.q[k], &expected, 1e-12);
        }
        // the reversed run passes back through the forward states
        assert_vec_close(&back.q[1], &fwd.q[0], 0.0);
    }
}

#[test]
fn runs_are_bit_identical() {
    let (q0, q1) = rolling_disk_seed();
    let s = disk(Scheme::Plus);
    let a = run(&s, &q0, &q1, 200, &opts()).unwrap();
    let b = run(&s, &q0, &q1, 200, &opts()).unwrap();
    assert_eq!(a, b);
    let bits = |t: &Trajectory| -> Vec<u64> { t.q.iter().flat_map(|q| q.iter().map(|x| x.to_bits())).collect() };
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn concurrent_runs_agree_with_sequential() {
    let (q0, q1) = rolling_disk_seed();
    let s = disk(Scheme::Minus);
    let reference = run(&s, &q0, &q1, 100, &opts()).unwrap();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..4).map(|_| scope.spawn(|| run(&s, &q0, &q1, 100, &opts()).unwrap())).collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), reference);
        }
    });
}

#[test]
fn jacobian_modes_agree_on_the_disk() {
    let (q0, q1) = rolling_disk_seed();
    for scheme in [Scheme::Plus, Scheme::Minus] {
        let s = disk(scheme);
        let a = run(&s, &q0, &q1, 100, &opts()).unwrap();
        let fd = SolverOptions {
            jacobian_mode: JacobianMode::FiniteDifference,
            ..opts()
        };
        let b = run(&s, &q0, &q1, 100, &fd).unwrap();
        for (x, y) in a.q.iter().zip(&b.q) {
            assert!(max_diff(x, y) < 1e-10);
        }
    }
}

#[test]
fn models_without_hessians_still_converge() {
    // the disk without analytic second derivatives: blocks are differenced
    let base = rolling_disk_default();
    let bare = MechModel::new("bare_disk", 4, {
        let b = base.clone();
        move |q: &Vector, v: &Vector| b.lagrangian(q, v)
    })
    .unwrap()
    .with_constraints(2, {
        let b = base.clone();
        move |q: &Vector| b.omega(q)
    })
    .unwrap();
    let (q0, q1) = rolling_disk_seed();
    let a = run(&disk(Scheme::Minus), &q0, &q1, 50, &opts()).unwrap();
    let s = DiscreteSetup::new(bare, DISK_H, Scheme::Minus).unwrap();
    // differenced gradients carry ~1e-9 rounding noise here, so tol must sit above it
    let b = run(&s, &q0, &q1, 50, &SolverOptions { tol: 1e-8, ..opts() }).unwrap();
    for (x, y) in a.q.iter().zip(&b.q) {
        assert!(max_diff(x, y) < 1e-6);
    }
}

#[test]
fn iteration_cap_is_reported() {
    let s = DiscreteSetup::new(stiff_velocity_model(), 0.1, Scheme::Plus).unwrap();
    let o = SolverOptions {
        max_iters: 1,
        ..opts()
    };
    let err = step(&s, &v(&[1.0]), &v(&[1.3]), &o).unwrap_err();
    assert!(matches!(err, Error::NoConvergence { iters: 1, .. }), "{err:?}");
    let err = run(&s, &v(&[1.0]), &v(&[1.3]), 3, &o).unwrap_err();
    match err {
        Error::StepFailed { index, source } => {
            assert_eq!(index, 2);
            assert!(matches!(*source, Error::NoConvergence { .. }));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn degenerate_lagrangian_is_singular() {
    // the second coordinate carries no kinetic term
    let m = MechModel::new("degenerate", 2, |q: &Vector, v: &Vector| 0.5 * v[0] * v[0] - 0.5 * q[0] * q[0])
        .unwrap()
        .with_gradients(
            |q: &Vector, _v: &Vector| v(&[-q[0], 0.0]),
            |_q: &Vector, vel: &Vector| v(&[vel[0], 0.0]),
        )
        .with_hessians(
            |_q: &Vector, _v: &Vector| Matrix::zeros(2, 2),
            |_q: &Vector, _v: &Vector| Matrix::from_diagonal(&v(&[1.0, 0.0])),
        );
    let s = DiscreteSetup::new(m, 0.1, Scheme::Plus).unwrap();
    let err = step(&s, &v(&[1.0, 0.0]), &v(&[1.0, 0.0]), &opts()).unwrap_err();
    assert!(matches!(err, Error::SingularJacobian { .. }), "{err:?}");
}

#[test]
fn rank_deficient_base_point_is_an_error() {
    let m = MechModel::new("vanish", 2, |_q: &Vector, v: &Vector| 0.5 * v.norm_squared())
        .unwrap()
        .with_constraints(1, |q: &Vector| Matrix::from_row_slice(1, 2, &[q[0], q[1]]))
        .unwrap();
    let s = DiscreteSetup::new(m, 0.1, Scheme::Minus).unwrap();
    let err = step(&s, &v(&[1.0, 1.0]), &v(&[0.0, 0.0]), &opts()).unwrap_err();
    assert!(matches!(err, Error::RankDeficient { .. }), "{err:?}");
}

#[test]
fn invalid_options_are_rejected() {
    let (q0, q1) = heisenberg_seed();
    let s = heis(Scheme::Plus);
    for bad in [
        SolverOptions { tol: 0.0, ..opts() },
        SolverOptions { tol: f64::NAN, ..opts() },
        SolverOptions { max_iters: 0, ..opts() },
    ] {
        assert!(matches!(step(&s, &q0, &q1, &bad), Err(Error::InvalidParameter(_))));
        assert!(run(&s, &q0, &q1, 2, &bad).is_err());
    }
    assert!(matches!(step(&s, &v(&[1.0]), &v(&[2.0]), &opts()), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn trajectory_accessors() {
    let (q0, q1) = heisenberg_seed();
    let traj = run(&heis(Scheme::Plus), &q0, &q1, 4, &opts()).unwrap();
    assert_eq!(traj.len(), 6);
    assert!(!traj.is_empty());
    assert_close(traj.time(5), 0.05, 1e-15);
    assert!(traj.multiplier(0).is_none());
    assert!(traj.multiplier(4).is_some());
    assert!(traj.multiplier(5).is_none());
    assert_eq!(traj.pairs().len(), 5);
    assert!(matches!(traj.pair(5), Err(Error::IndexOutOfRange { .. })));
    assert_eq!(traj.momenta.len(), 6);
    assert_eq!(traj.momenta_minus.len(), 5);
    assert_eq!(traj.total_iterations(), traj.steps.iter().map(|s| s.iters).sum::<usize>());
    let quiet = run_from_pair(&heis(Scheme::Plus), ConfigPair::new(q0, q1).unwrap(), 4, &opts(), false).unwrap();
    assert!(quiet.diagnostics.is_empty());
    assert_eq!(quiet.q, traj.q);
}
