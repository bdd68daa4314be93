//! Discrete energies, momentum series, symplecticity of the unconstrained
//! one-step map, and empirical convergence order.

use crate::constraints::discrete_constraint_residual;
use crate::dirac::{membership_residual, DiracWindow};
use crate::error::check_dim;
use crate::integrator::{build_q1_from_velocity, run_from_pair, SolverOptions, Trajectory};
use crate::mechanics::{discrete_derivatives, discrete_lagrangian, ConfigPair, DiscreteSetup, PhaseState, Scheme};
use crate::numeric::max_abs;
use crate::{Error, Matrix, Result, Vector};

/// Per-pair diagnostics. `dirac_residual` is `None` where the three-point
/// window would run past the end of the trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagRecord {
    pub energy_plus: f64,
    pub energy_minus: f64,
    pub constraint_norm: f64,
    pub dirac_residual: Option<f64>,
}

impl DiagRecord {
    /// The energy matching the scheme.
    pub fn energy(&self, scheme: Scheme) -> f64 {
        match scheme {
            Scheme::Plus => self.energy_plus,
            Scheme::Minus => self.energy_minus,
        }
    }
}

/// `<p_next, v_k - q_k> - L_d(q_k, v_k)`.
pub fn energy_plus(setup: &DiscreteSetup, q_k: &Vector, v_k: &Vector, p_next: &Vector) -> Result<f64> {
    let pair = ConfigPair::new(q_k.clone(), v_k.clone())?;
    energy_plus_pair(setup, &pair, p_next)
}

/// `<p_k, q_next - v_next> - L_d(v_next, q_next)`.
pub fn energy_minus(setup: &DiscreteSetup, v_next: &Vector, q_next: &Vector, p_k: &Vector) -> Result<f64> {
    let pair = ConfigPair::new(v_next.clone(), q_next.clone())?;
    energy_minus_pair(setup, &pair, p_k)
}

/// [`energy_plus`] on a pair, using its stored increment.
pub fn energy_plus_pair(setup: &DiscreteSetup, pair: &ConfigPair, p_next: &Vector) -> Result<f64> {
    check_dim(setup.dim(), p_next.len(), "momentum")?;
    Ok(p_next.dot(pair.delta()) - discrete_lagrangian(setup, pair)?)
}

/// [`energy_minus`] on a pair, using its stored increment.
pub fn energy_minus_pair(setup: &DiscreteSetup, pair: &ConfigPair, p_k: &Vector) -> Result<f64> {
    check_dim(setup.dim(), p_k.len(), "momentum")?;
    Ok(p_k.dot(pair.delta()) - discrete_lagrangian(setup, pair)?)
}

/// Both energies of a pair with the discrete Legendre momenta substituted:
/// `p_next = D2 L_d` for plus and `p_k = -D1 L_d` for minus.
pub fn pair_energies(setup: &DiscreteSetup, pair: &ConfigPair) -> Result<(f64, f64)> {
    let (d1, d2) = discrete_derivatives(setup, pair)?;
    let ld = discrete_lagrangian(setup, pair)?;
    Ok((d2.dot(pair.delta()) - ld, -d1.dot(pair.delta()) - ld))
}

/// Diagnostics for a sequence of consecutive pairs.
pub fn trajectory_diagnostics(setup: &DiscreteSetup, pairs: &[ConfigPair]) -> Result<Vec<DiagRecord>> {
    let mut out = Vec::with_capacity(pairs.len());
    for (k, pair) in pairs.iter().enumerate() {
        let (energy_plus, energy_minus) = pair_energies(setup, pair)?;
        let constraint_norm = max_abs(&discrete_constraint_residual(setup, pair)?);
        let dirac_residual = if k + 1 < pairs.len() {
            let w = DiracWindow::from_slice(setup, pairs, k)?;
            Some(membership_residual(setup, &w)?.max())
        } else {
            None
        };
        out.push(DiagRecord {
            energy_plus,
            energy_minus,
            constraint_norm,
            dirac_residual,
        });
    }
    Ok(out)
}

/// `p_k[coord_index]` for every state of the trajectory.
pub fn momentum_series(traj: &Trajectory, coord_index: usize) -> Result<Vec<f64>> {
    let n = traj.q.first().map_or(0, |q| q.len());
    if coord_index >= n {
        return Err(Error::IndexOutOfRange {
            index: coord_index,
            len: n,
        });
    }
    Ok(traj.momenta.iter().map(|p| p[coord_index]).collect())
}

/// One step of the unconstrained discrete Hamiltonian map
/// `(q0, p0) -> (q1, p1)`: solve `p0 = -D1 L_d(q0, q1)` by Newton, then
/// `p1 = D2 L_d(q0, q1)`.
pub fn discrete_hamiltonian_map(setup: &DiscreteSetup, z: &PhaseState) -> Result<PhaseState> {
    if setup.model.n_constraints() != 0 {
        return Err(Error::InvalidParameter(
            "the phase map is only defined for unconstrained models".into(),
        ));
    }
    let n = setup.dim();
    check_dim(n, z.q.len(), "phase position")?;
    check_dim(n, z.p.len(), "phase momentum")?;
    let h = setup.h;
    let mut d = Vector::zeros(n);
    let tol = 1e-15;
    let max_iters = 60;
    for iter in 0..=max_iters {
        let v = &d / h;
        let lq = setup.model.grad_q(&z.q, &v, setup.fd_step) * h;
        let lv = setup.model.grad_v(&z.q, &v, setup.fd_step);
        let f = &z.p + &lq - &lv;
        let scale = z
            .p
            .iter()
            .zip(lq.iter().zip(lv.iter()))
            .map(|(a, (b, c))| a.abs() + b.abs() + c.abs())
            .fold(1.0_f64, f64::max);
        if max_abs(&f) <= tol * scale {
            break;
        }
        if iter == max_iters {
            return Err(Error::NoConvergence {
                iters: iter,
                residual: max_abs(&f),
            });
        }
        let (hqv, hvv) = setup.model.hessian_blocks(&z.q, &v, setup.fd_step);
        let jac: Matrix = hqv - hvv / h;
        let cond = {
            let sv = crate::numeric::sorted_singular_values(&jac);
            sv[0] / sv[sv.len() - 1]
        };
        let step = jac
            .lu()
            .solve(&(-f))
            .ok_or(Error::SingularJacobian { cond })?;
        d += step;
    }
    let pair = ConfigPair::from_delta(z.q.clone(), d)?;
    let (_, d2) = discrete_derivatives(setup, &pair)?;
    PhaseState::new(pair.q1().clone(), d2)
}

/// `max |D^T J D - J|` for the Jacobian `D` of the one-step phase map at
/// `z`, computed by central differences with absolute step `probe_eps`.
pub fn symplectic_residual(setup: &DiscreteSetup, z: &PhaseState, probe_eps: f64) -> Result<f64> {
    if !(probe_eps > 0.0) {
        return Err(Error::InvalidParameter("probe_eps must be positive".into()));
    }
    let n = setup.dim();
    let mut jac = Matrix::zeros(2 * n, 2 * n);
    for j in 0..2 * n {
        let mut plus = z.clone();
        let mut minus = z.clone();
        if j < n {
            plus.q[j] += probe_eps;
            minus.q[j] -= probe_eps;
        } else {
            plus.p[j - n] += probe_eps;
            minus.p[j - n] -= probe_eps;
        }
        let zp = discrete_hamiltonian_map(setup, &plus)?;
        let zm = discrete_hamiltonian_map(setup, &minus)?;
        for i in 0..n {
            jac[(i, j)] = (zp.q[i] - zm.q[i]) / (2.0 * probe_eps);
            jac[(n + i, j)] = (zp.p[i] - zm.p[i]) / (2.0 * probe_eps);
        }
    }
    let mut canon = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        canon[(i, n + i)] = 1.0;
        canon[(n + i, i)] = -1.0;
    }
    let defect = jac.transpose() * &canon * &jac - canon;
    Ok(defect.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
}

/// Result of a three-grid self-convergence study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConvergenceOrder {
    /// `log2(|Q_h - Q_{h/2}| / |Q_{h/2} - Q_{h/4}|)`.
    Order(f64),
    /// All three grids agree to rounding; no order can be inferred.
    ExactMatch,
}

impl ConvergenceOrder {
    pub fn value(&self) -> Option<f64> {
        match self {
            ConvergenceOrder::Order(p) => Some(*p),
            ConvergenceOrder::ExactMatch => None,
        }
    }
}

fn steps_for(t_final: f64, h: f64) -> Result<usize> {
    let n = (t_final / h).round();
    if n < 1.0 || ((n * h) - t_final).abs() > 1e-9 * t_final.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "T_final = {t_final} is not a whole number of steps of {h}"
        )));
    }
    Ok(n as usize)
}

/// Final configuration at `t_final` from `q0` with initial velocity `v0`.
pub fn final_configuration(
    setup: &DiscreteSetup,
    q0: &Vector,
    v0: &Vector,
    t_final: f64,
    opts: &SolverOptions,
) -> Result<Vector> {
    let intervals = steps_for(t_final, setup.h)?;
    let seed = build_q1_from_velocity(setup, q0, v0)?;
    let traj = run_from_pair(setup, seed.pair, intervals - 1, opts, false)?;
    Ok(traj.q.last().expect("nonempty trajectory").clone())
}

/// Empirical order from grids `h`, `h/2`, `h/4` with seeds built from `(q0, v0)`.
pub fn self_convergence_order(
    setup: &DiscreteSetup,
    q0: &Vector,
    v0: &Vector,
    t_final: f64,
    opts: &SolverOptions,
) -> Result<ConvergenceOrder> {
    let h = setup.h;
    let qa = final_configuration(setup, q0, v0, t_final, opts)?;
    let qb = final_configuration(&setup.clone().with_h(h / 2.0)?, q0, v0, t_final, opts)?;
    let qc = final_configuration(&setup.clone().with_h(h / 4.0)?, q0, v0, t_final, opts)?;
    let e1 = (&qa - &qb).norm();
    let e2 = (&qb - &qc).norm();
    let floor = 64.0 * f64::EPSILON * qc.norm().max(1.0);
    if e1 <= floor && e2 <= floor {
        return Ok(ConvergenceOrder::ExactMatch);
    }
    if e2 == 0.0 {
        return Ok(ConvergenceOrder::Order(f64::INFINITY));
    }
    Ok(ConvergenceOrder::Order((e1 / e2).log2()))
}
