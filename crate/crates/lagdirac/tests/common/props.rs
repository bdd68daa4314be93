//! Property checks shared by the proptest suite and the acceptance runner.

use lagdirac::cli::{simulate, write_csv, RunConfig, SeedMode};
use lagdirac::dirac::*;
use lagdirac::integrator::JacobianMode;
use lagdirac::mechanics::{discrete_derivatives, gradient_consistency, ConfigPair, DiscreteSetup, MechModel, PhaseState, Scheme, DEFAULT_FD_STEP};
use lagdirac::models::{self, ModelId};
use lagdirac::Vector;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn bundled_models() -> Vec<MechModel> {
    vec![
        models::rolling_disk_default(),
        models::heisenberg(),
        models::oscillator(1.0).unwrap(),
        models::oscillator_nd(3, 2.5).unwrap(),
        models::free_particle(2).unwrap(),
    ]
}

fn coords(n: usize, range: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-range..range, n).prop_map(Vector::from_vec)
}

fn scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::Plus), Just(Scheme::Minus)]
}

/// `(model index, q, v, fd pair increment, h)`.
pub fn gradient_case() -> impl Strategy<Value = (usize, Vector, Vector, Vector, f64)> {
    (0..5usize, coords(4, 3.0), coords(4, 3.0), coords(4, 0.3), 1e-3..0.5f64)
}

fn truncate(x: &Vector, n: usize) -> Vector {
    x.rows(0, n).into_owned()
}

/// Analytic gradients agree with differenced `L`, and the chain-rule
/// discrete derivatives agree with differenced `L_d`.
pub fn check_gradient(case: (usize, Vector, Vector, Vector, f64)) -> Result<(), TestCaseError> {
    let (idx, q, v, d, h) = case;
    let model = bundled_models().swap_remove(idx);
    let n = model.dim();
    let (q, v, d) = (truncate(&q, n), truncate(&v, n), truncate(&d, n));
    let dev = gradient_consistency(&model, &q, &v, DEFAULT_FD_STEP);
    prop_assert!(dev < 1e-6, "{}: gradient deviation {dev:e}", model.id());

    let setup = DiscreteSetup::new(model, h, Scheme::Plus).unwrap();
    let pair = ConfigPair::from_delta(q.clone(), d).unwrap();
    let (d1, d2) = discrete_derivatives(&setup, &pair).unwrap();
    let ld = |a: &Vector, b: &Vector| {
        lagdirac::mechanics::discrete_lagrangian(&setup, &ConfigPair::new(a.clone(), b.clone()).unwrap()).unwrap()
    };
    for i in 0..n {
        for (which, base, other, analytic) in [(0, pair.q0(), pair.q1(), d1[i]), (1, pair.q1(), pair.q0(), d2[i])] {
            let e = 1e-6 * base[i].abs().max(1.0);
            let mut bp = base.clone();
            bp[i] += e;
            let mut bm = base.clone();
            bm[i] -= e;
            let fd = if which == 0 {
                (ld(&bp, other) - ld(&bm, other)) / (2.0 * e)
            } else {
                (ld(other, &bp) - ld(other, &bm)) / (2.0 * e)
            };
            let rel = (analytic - fd).abs() / fd.abs().max(1.0);
            prop_assert!(rel < 1e-6, "{}: D{} component {i}: {analytic} vs {fd}", setup.model.id(), which + 1);
        }
    }
    Ok(())
}

/// `(z_prev, z_mid, z_next, h)` with a common dimension.
pub fn triple_case() -> impl Strategy<Value = (PhaseTriple, f64)> {
    (1..6usize)
        .prop_flat_map(|n| {
            (
                coords(n, 100.0),
                coords(n, 100.0),
                coords(n, 100.0),
                coords(n, 100.0),
                coords(n, 100.0),
                coords(n, 100.0),
                1e-4..2.0f64,
            )
        })
        .prop_map(|(a, b, c, d, e, f, h)| {
            let t = PhaseTriple::new(
                PhaseState::new(a, b).unwrap(),
                PhaseState::new(c, d).unwrap(),
                PhaseState::new(e, f).unwrap(),
            )
            .unwrap();
            (t, h)
        })
}

/// `kappa_d` is invertible and both gamma maps equal flat after the inverse.
pub fn check_kappa_gamma(case: (PhaseTriple, f64)) -> Result<(), TestCaseError> {
    let (t, h) = case;
    let e01 = kappa_d(&t.z_prev, &t.z_mid).unwrap();
    let e12 = kappa_d(&t.z_mid, &t.z_next).unwrap();
    prop_assert_eq!(kappa_d_inverse(&e01).unwrap(), (t.z_prev.clone(), t.z_mid.clone()));
    prop_assert_eq!(kappa_d_inverse(&e12).unwrap(), (t.z_mid.clone(), t.z_next.clone()));
    prop_assert_eq!(&e01.neg_p0, &(-&t.z_prev.p));
    prop_assert_eq!(gamma_plus(&e01, &t, h).unwrap(), flat_plus(&t, h).unwrap());
    prop_assert_eq!(gamma_minus(&e12, &t, h).unwrap(), flat_minus(&t, h).unwrap());
    Ok(())
}

/// Two covector blocks, two difference pairs, two scalars.
pub type PairingCase = (Vector, Vector, Vector, Vector, Vector, Vector, Vector, Vector, f64, f64, f64);

pub fn pairing_case() -> impl Strategy<Value = PairingCase> {
    (1..6usize).prop_flat_map(|n| {
        (
            coords(n, 10.0),
            coords(n, 10.0),
            coords(n, 10.0),
            coords(n, 10.0),
            coords(n, 10.0),
            coords(n, 10.0),
            coords(n, 10.0),
            coords(n, 10.0),
            -5.0..5.0f64,
            -5.0..5.0f64,
            1e-3..2.0f64,
        )
    })
}

fn eval_plus(eta: &Vector, xi: &Vector, dq: &Vector, dp: &Vector, h: f64) -> f64 {
    // z0 at the origin, z1 = (h dq, 0), z2.p = h dp
    let n = eta.len();
    let z0 = PhaseState::new(Vector::zeros(n), Vector::zeros(n)).unwrap();
    let z1 = PhaseState::new(dq * h, Vector::zeros(n)).unwrap();
    let zeta = CotangentCotangentElement::new(z1.q.clone(), z1.p.clone(), eta.clone(), xi.clone()).unwrap();
    pairing_plus(&zeta, &z0, &z1, &(dp * h), h).unwrap()
}

fn eval_minus(eta: &Vector, xi: &Vector, dq: &Vector, dp: &Vector, h: f64) -> f64 {
    // z0 = (0, h dp), z1.q = h dq, p_prev = 0
    let n = eta.len();
    let z0 = PhaseState::new(Vector::zeros(n), dp * h).unwrap();
    let z1 = PhaseState::new(dq * h, Vector::zeros(n)).unwrap();
    let zeta = CotangentCotangentElement::new(z0.q.clone(), z0.p.clone(), eta.clone(), xi.clone()).unwrap();
    pairing_minus(&zeta, &Vector::zeros(n), &z0, &z1, h).unwrap()
}

/// Bilinearity of both pairings in the covector and in the differences.
pub fn check_pairing(case: PairingCase) -> Result<(), TestCaseError> {
    let (eta, xi, eta2, xi2, dq, dp, dq2, dp2, a, b, h) = case;
    for eval in [eval_plus, eval_minus] {
        let p = |e: &Vector, x: &Vector, q: &Vector, r: &Vector| eval(e, x, q, r, h);
        // entries are at most 10, so each pairing is at most 200 n
        let scale = 1e-12 * 1e3 * (1.0 + a.abs() + b.abs()).powi(2);
        let base = p(&eta, &xi, &dq, &dp);
        // the pairing formula itself
        let direct = eta.dot(&dq) + dp.dot(&xi);
        prop_assert!((base - direct).abs() <= scale, "{base} vs {direct}");
        // linear in (eta, xi)
        let lhs = p(&(&eta * a + &eta2 * b), &(&xi * a + &xi2 * b), &dq, &dp);
        let rhs = a * base + b * p(&eta2, &xi2, &dq, &dp);
        prop_assert!((lhs - rhs).abs() <= scale, "covector linearity {lhs} vs {rhs}");
        // linear in the differences
        let lhs = p(&eta, &xi, &(&dq * a + &dq2 * b), &(&dp * a + &dp2 * b));
        let rhs = a * base + b * p(&eta, &xi, &dq2, &dp2);
        prop_assert!((lhs - rhs).abs() <= scale, "difference linearity {lhs} vs {rhs}");
        // common scaling
        let lhs = p(&(&eta * a), &(&xi * a), &dq, &dp);
        prop_assert!((lhs - a * base).abs() <= scale);
    }
    Ok(())
}

/// A small random run configuration.
pub fn run_config_case() -> impl Strategy<Value = RunConfig> {
    (0..4usize, scheme(), 1e-3..0.05f64, 1..30usize, coords(4, 1.0), coords(4, 1.0), any::<bool>()).prop_map(
        |(idx, scheme, h, steps, q0, v0, fd)| {
            let model = ModelId::ALL[idx];
            let n = match model {
                ModelId::RollingDisk => 4,
                ModelId::Heisenberg => 3,
                _ => 1,
            };
            RunConfig {
                model,
                scheme,
                h,
                n_steps: steps,
                q0: truncate(&q0, n),
                seed: SeedMode::V0(truncate(&v0, n)),
                params: model.default_params(),
                out_path: "unused.csv".into(),
                diagnostics_on: true,
                tol: 1e-12,
                max_iters: 50,
                jacobian: if fd { JacobianMode::FiniteDifference } else { JacobianMode::Analytic },
            }
        },
    )
}

fn render(cfg: &RunConfig) -> Vec<u8> {
    let (setup, traj) = simulate(cfg).expect("small runs converge");
    let mut buf = Vec::new();
    write_csv(&setup, &traj, &mut buf).unwrap();
    buf
}

/// Identical configs give byte-identical CSV with `steps + 2` lines.
pub fn check_csv_determinism(cfg: RunConfig) -> Result<(), TestCaseError> {
    let a = render(&cfg);
    let b = render(&cfg.clone());
    prop_assert!(a == b, "CSV differs between identical runs");
    let lines = a.iter().filter(|&&c| c == b'\n').count();
    prop_assert_eq!(lines, cfg.n_steps + 2);
    Ok(())
}
