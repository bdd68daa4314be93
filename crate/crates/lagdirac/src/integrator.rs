//! Per-step Newton solution of the discrete Lagrange-d'Alembert equations
//! and trajectory generation.
//!
//! One step solves, for the increment `d = q_next - q_curr` and multipliers `mu`,
//!
//! ```text
//! D2 L_d(q_prev, q_curr) + D1 L_d(q_curr, q_next) - s mu^T omega(q_curr) = 0
//! omega(b) (q_next - q_curr) / h = 0
//! ```
//!
//! with `b = q_next`, `s = +1` for [`Scheme::Plus`] and `b = q_curr`,
//! `s = -1` for [`Scheme::Minus`].

use log::{debug, warn};

use crate::constraints::{constraint_base, ConstraintEval};
use crate::diagnostics::{self, DiagRecord};
use crate::error::check_dim;
use crate::mechanics::{discrete_derivatives, ConfigPair, DiscreteSetup, Scheme};
use crate::numeric::{central_jacobian, dot2, max_abs, sorted_singular_values, two_sum};
use crate::{Error, Matrix, Result, Vector};

/// Condition number beyond which the step Jacobian is treated as singular.
const SINGULAR_COND: f64 = 1e15;
/// Seed pairs whose discrete constraint residual exceeds this are reported.
const SEED_WARN: f64 = 1e-10;

/// How the Newton Jacobian is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum JacobianMode {
    /// Hessian blocks and constraint derivatives from the model, falling
    /// back to differencing the gradients when the model omits them.
    #[default]
    Analytic,
    /// Central differences of the full step residual.
    FiniteDifference,
}

/// Newton solver settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Convergence threshold. Each residual component `F_i` must satisfy
    /// `|F_i| <= tol * max(1, s_i)` where `s_i` is the sum of the magnitudes
    /// of the terms that make up `F_i`. Models that rely on differenced
    /// gradients need `tol` above the differencing noise, about
    /// `eps |L| / fd_step`.
    pub tol: f64,
    pub max_iters: usize,
    pub jacobian_mode: JacobianMode,
    /// Condition estimate above which a warning is logged.
    pub cond_warn: f64,
    pub max_backtracks: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 50,
            jacobian_mode: JacobianMode::Analytic,
            cond_warn: 1e12,
            max_backtracks: 10,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one accepted step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub q_next: Vector,
    /// Exact increment `q_next - q_curr` found by the solver.
    pub increment: Vector,
    /// Multipliers in the reported sign convention (see module docs).
    pub mu: Vector,
    pub iters: usize,
    /// Scaled max-norm residual, at most `tol` on success.
    pub residual_norm: f64,
    /// Unscaled max-norm residual.
    pub raw_residual_norm: f64,
    pub jacobian_cond_estimate: f64,
}

fn sign(scheme: Scheme) -> f64 {
    match scheme {
        Scheme::Plus => 1.0,
        Scheme::Minus => -1.0,
    }
}

struct StepProblem<'a> {
    setup: &'a DiscreteSetup,
    q_curr: &'a Vector,
    d2_prev: Vector,
    omega_curr: Matrix,
}

impl StepProblem<'_> {
    fn n(&self) -> usize {
        self.setup.dim()
    }

    fn m(&self) -> usize {
        self.omega_curr.nrows()
    }

    fn base(&self, d: &Vector) -> Vector {
        match self.setup.scheme {
            Scheme::Plus => self.q_curr + d,
            Scheme::Minus => self.q_curr.clone(),
        }
    }

    /// Residual and per-component magnitude scale at `(d, mu)` (solver sign).
    fn residual(&self, d: &Vector, mu: &Vector) -> (Vector, Vector) {
        let (n, m) = (self.n(), self.m());
        let setup = self.setup;
        let h = setup.h;
        let v = d / h;
        let lq = setup.model.grad_q(self.q_curr, &v, setup.fd_step) * h;
        let lv = setup.model.grad_v(self.q_curr, &v, setup.fd_step);
        let force = self.omega_curr.tr_mul(mu);
        let mut f = Vector::zeros(n + m);
        let mut s = Vector::zeros(n + m);
        for i in 0..n {
            f[i] = self.d2_prev[i] + (lq[i] - lv[i]) - force[i];
            s[i] = self.d2_prev[i].abs() + lq[i].abs() + lv[i].abs();
            for r in 0..m {
                s[i] += (self.omega_curr[(r, i)] * mu[r]).abs();
            }
        }
        if m > 0 {
            let wb = match setup.scheme {
                Scheme::Plus => setup.model.omega(&self.base(d)),
                Scheme::Minus => self.omega_curr.clone(),
            };
            for r in 0..m {
                let mut acc = 0.0;
                let mut mag = 0.0;
                for j in 0..n {
                    let t = wb[(r, j)] * d[j];
                    acc += t;
                    mag += t.abs();
                }
                f[n + r] = acc / h;
                s[n + r] = mag / h;
            }
        }
        (f, s)
    }

    fn jacobian(&self, d: &Vector, mu: &Vector, mode: JacobianMode) -> Matrix {
        let (n, m) = (self.n(), self.m());
        let setup = self.setup;
        let h = setup.h;
        match mode {
            JacobianMode::FiniteDifference => {
                let mut x = Vector::zeros(n + m);
                x.rows_mut(0, n).copy_from(d);
                x.rows_mut(n, m).copy_from(mu);
                central_jacobian(&x, n + m, setup.fd_step, |y| {
                    let dd = y.rows(0, n).into_owned();
                    let mm = y.rows(n, m).into_owned();
                    self.residual(&dd, &mm).0
                })
            }
            JacobianMode::Analytic => {
                let v = d / h;
                let (hqv, hvv) = setup.model.hessian_blocks(self.q_curr, &v, setup.fd_step);
                let mut jac = Matrix::zeros(n + m, n + m);
                jac.view_mut((0, 0), (n, n)).copy_from(&(hqv - hvv / h));
                if m > 0 {
                    jac.view_mut((0, n), (n, m)).copy_from(&(-self.omega_curr.transpose()));
                    let mut j21 = match setup.scheme {
                        Scheme::Plus => setup.model.omega(&self.base(d)),
                        Scheme::Minus => self.omega_curr.clone(),
                    };
                    if setup.scheme == Scheme::Plus {
                        j21 += setup.model.constraint_derivative(&self.base(d), d, setup.fd_step);
                    }
                    jac.view_mut((n, 0), (m, n)).copy_from(&(j21 / h));
                }
                jac
            }
        }
    }
}

fn scaled_norm(f: &Vector, s: &Vector) -> f64 {
    f.iter()
        .zip(s.iter())
        .map(|(fi, si)| fi.abs() / si.max(1.0))
        .fold(0.0_f64, f64::max)
}

fn condition(jac: &Matrix) -> f64 {
    let sv = sorted_singular_values(jac);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Solve one step from the pair `(q_prev, q_curr)`, using its stored increment
/// as the initial guess for the next one.
pub fn step_from_pair(setup: &DiscreteSetup, prev: &ConfigPair, opts: &SolverOptions) -> Result<StepResult> {
    opts.validate()?;
    setup.check_pair(prev)?;
    let q_curr = prev.q1();
    let (_, d2_prev) = discrete_derivatives(setup, prev)?;
    let eval = ConstraintEval::new(&setup.model, q_curr)?;
    let problem = StepProblem {
        setup,
        q_curr,
        d2_prev,
        omega_curr: eval.omega,
    };
    let (n, m) = (problem.n(), problem.m());

    let mut d = prev.delta().clone();
    let mut mu = Vector::zeros(m);
    let (mut f, s0) = problem.residual(&d, &mu);
    let mut norm = scaled_norm(&f, &s0);
    let mut iters = 0;
    while norm > opts.tol {
        if iters == opts.max_iters {
            return Err(Error::NoConvergence {
                iters,
                residual: norm,
            });
        }
        let jac = problem.jacobian(&d, &mu, opts.jacobian_mode);
        let cond = condition(&jac);
        if !(cond < SINGULAR_COND) {
            return Err(Error::SingularJacobian { cond });
        }
        let delta = jac
            .lu()
            .solve(&(-&f))
            .ok_or(Error::SingularJacobian { cond })?;
        let mut t = 1.0;
        let mut backtracks = 0;
        loop {
            let d_try = &d + delta.rows(0, n) * t;
            let mu_try = &mu + delta.rows(n, m) * t;
            let (f_try, s_try) = problem.residual(&d_try, &mu_try);
            let norm_try = scaled_norm(&f_try, &s_try);
            if norm_try <= norm || backtracks == opts.max_backtracks {
                d = d_try;
                mu = mu_try;
                f = f_try;
                norm = norm_try;
                break;
            }
            t *= 0.5;
            backtracks += 1;
        }
        if backtracks > 0 {
            debug!("step used {backtracks} backtracks (t = {t})");
        }
        iters += 1;
    }

    let jac = problem.jacobian(&d, &mu, opts.jacobian_mode);
    let cond = condition(&jac);
    if !(cond < SINGULAR_COND) {
        return Err(Error::SingularJacobian { cond });
    }
    if cond > opts.cond_warn {
        warn!("step Jacobian condition estimate {cond:e} exceeds {:e}", opts.cond_warn);
    }
    if setup.scheme == Scheme::Plus && m > 0 {
        ConstraintEval::new(&setup.model, &problem.base(&d))?;
    }
    Ok(StepResult {
        q_next: q_curr + &d,
        increment: d,
        mu: mu * sign(setup.scheme),
        iters,
        residual_norm: norm,
        raw_residual_norm: max_abs(&f),
        jacobian_cond_estimate: cond,
    })
}

/// Solve for `q_next` given `(q_prev, q_curr)`.
pub fn step(setup: &DiscreteSetup, q_prev: &Vector, q_curr: &Vector, opts: &SolverOptions) -> Result<StepResult> {
    let prev = ConfigPair::new(q_prev.clone(), q_curr.clone())?;
    step_from_pair(setup, &prev, opts)
}

/// Step residual `[n force components, m constraint components]` for the
/// triple `(q_prev, q_curr, q_next)` and reported multipliers `mu`.
pub fn lagrange_d_alembert_residual(
    setup: &DiscreteSetup,
    q_prev: &Vector,
    q_curr: &Vector,
    q_next: &Vector,
    mu: &Vector,
) -> Result<Vector> {
    let prev = ConfigPair::new(q_prev.clone(), q_curr.clone())?;
    let next = ConfigPair::new(q_curr.clone(), q_next.clone())?;
    lagrange_d_alembert_residual_pairs(setup, &prev, &next, mu)
}

/// As [`lagrange_d_alembert_residual`] on two consecutive pairs, using their
/// stored increments.
pub fn lagrange_d_alembert_residual_pairs(
    setup: &DiscreteSetup,
    prev: &ConfigPair,
    next: &ConfigPair,
    mu: &Vector,
) -> Result<Vector> {
    setup.check_pair(prev)?;
    setup.check_pair(next)?;
    let (n, m) = (setup.dim(), setup.model.n_constraints());
    check_dim(m, mu.len(), "multipliers")?;
    let (_, d2) = discrete_derivatives(setup, prev)?;
    let (d1, _) = discrete_derivatives(setup, next)?;
    let omega = setup.model.omega(next.q0());
    let sg = sign(setup.scheme);
    let mut r = Vector::zeros(n + m);
    // compensated sums keep the evaluation floor below the solver tolerance
    // when positions are large compared with the increments
    for i in 0..n {
        let terms = [(d2[i], 1.0), (d1[i], 1.0)]
            .into_iter()
            .chain((0..m).map(|k| (-sg * omega[(k, i)], mu[k])));
        r[i] = dot2(terms);
    }
    if m > 0 {
        let wb = setup.model.omega(constraint_base(setup.scheme, next));
        for k in 0..m {
            r[n + k] = dot2((0..n).map(|j| (wb[(k, j)], next.delta()[j]))) / setup.h;
        }
    }
    Ok(r)
}

/// A second point from a position and velocity: `q1 = q0 + h v0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedPair {
    pub pair: ConfigPair,
    /// Discrete constraint residual of the pair. Not projected away.
    pub constraint_residual: Vector,
}

impl SeedPair {
    pub fn q1(&self) -> &Vector {
        self.pair.q1()
    }
}

pub fn build_q1_from_velocity(setup: &DiscreteSetup, q0: &Vector, v0: &Vector) -> Result<SeedPair> {
    check_dim(setup.dim(), q0.len(), "q0")?;
    check_dim(setup.dim(), v0.len(), "v0")?;
    let pair = ConfigPair::from_delta(q0.clone(), v0 * setup.h)?;
    let constraint_residual = crate::constraints::discrete_constraint_residual(setup, &pair)?;
    Ok(SeedPair {
        pair,
        constraint_residual,
    })
}

/// Newton statistics for one accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepStats {
    pub iters: usize,
    pub residual_norm: f64,
    pub jacobian_cond_estimate: f64,
}

/// A uniform-time discrete path with momenta, multipliers and diagnostics.
///
/// With `N + 1` states `q_0..q_N`:
/// - `increments[k] = q_{k+1} - q_k` as produced by the solver (`N` entries)
/// - `momenta[0] = -D1 L_d(q_0, q_1)`, `momenta[k] = D2 L_d(q_{k-1}, q_k)`
/// - `momenta_minus[k] = -D1 L_d(q_k, q_{k+1})` (`N` entries)
/// - `multipliers[k - 1]` belongs to state `k` for `1 <= k <= N - 1`
/// - `diagnostics[k]` belongs to the pair `(q_k, q_{k+1})`
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub h: f64,
    pub scheme: Scheme,
    pub t0: f64,
    pub q: Vec<Vector>,
    pub increments: Vec<Vector>,
    pub momenta: Vec<Vector>,
    pub momenta_minus: Vec<Vector>,
    pub multipliers: Vec<Vector>,
    pub steps: Vec<StepStats>,
    pub diagnostics: Vec<DiagRecord>,
    pub seed_constraint_residual: f64,
}

impl Trajectory {
    /// Number of states.
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.h
    }

    /// Pair `(q_k, q_{k+1})` carrying the solver increment.
    pub fn pair(&self, k: usize) -> Result<ConfigPair> {
        if k >= self.increments.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.increments.len(),
            });
        }
        ConfigPair::from_parts(self.q[k].clone(), self.q[k + 1].clone(), self.increments[k].clone())
    }

    pub fn pairs(&self) -> Vec<ConfigPair> {
        (0..self.increments.len())
            .map(|k| self.pair(k).expect("index in range"))
            .collect()
    }

    /// Multipliers at state `k`, if that state was produced by a step.
    pub fn multiplier(&self, k: usize) -> Option<&Vector> {
        if k == 0 {
            None
        } else {
            self.multipliers.get(k - 1)
        }
    }

    pub fn total_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.iters).sum()
    }
}

/// Integrate `n_steps` steps from the seed `(q0, q1)` and fill diagnostics.
/// The result holds `n_steps + 2` states.
pub fn run(
    setup: &DiscreteSetup,
    q0: &Vector,
    q1: &Vector,
    n_steps: usize,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    let seed = ConfigPair::new(q0.clone(), q1.clone())?;
    run_from_pair(setup, seed, n_steps, opts, true)
}

/// Integrate from a seed pair. Positions are accumulated with compensated
/// summation; the exact solver increments are kept alongside.
pub fn run_from_pair(
    setup: &DiscreteSetup,
    seed: ConfigPair,
    n_steps: usize,
    opts: &SolverOptions,
    with_diagnostics: bool,
) -> Result<Trajectory> {
    opts.validate()?;
    setup.check_pair(&seed)?;
    let n = setup.dim();
    let seed_res = crate::constraints::discrete_constraint_residual(setup, &seed)?;
    let seed_constraint_residual = max_abs(&seed_res);
    if seed_constraint_residual > SEED_WARN {
        warn!(
            "seed pair violates the {} discrete constraint by {seed_constraint_residual:e}",
            setup.scheme
        );
    }

    let mut q = Vec::with_capacity(n_steps + 2);
    let mut increments = Vec::with_capacity(n_steps + 1);
    let mut multipliers = Vec::with_capacity(n_steps);
    let mut steps = Vec::with_capacity(n_steps);
    q.push(seed.q0().clone());
    q.push(seed.q1().clone());
    increments.push(seed.delta().clone());

    // low-order parts of the compensated positions
    let mut lo = Vector::zeros(n);
    let mut prev = seed;
    for k in 1..=n_steps {
        let res = step_from_pair(setup, &prev, opts).map_err(|e| Error::StepFailed {
            index: k + 1,
            source: Box::new(e),
        })?;
        let hi = prev.q1();
        let mut next = Vector::zeros(n);
        for i in 0..n {
            let (s, e) = two_sum(hi[i], res.increment[i]);
            let (s2, e2) = two_sum(s, lo[i] + e);
            next[i] = s2;
            lo[i] = e2;
        }
        let pair = ConfigPair::from_parts(hi.clone(), next.clone(), res.increment.clone())?;
        q.push(next);
        increments.push(res.increment);
        multipliers.push(res.mu);
        steps.push(StepStats {
            iters: res.iters,
            residual_norm: res.residual_norm,
            jacobian_cond_estimate: res.jacobian_cond_estimate,
        });
        prev = pair;
    }

    let mut traj = Trajectory {
        h: setup.h,
        scheme: setup.scheme,
        t0: 0.0,
        q,
        increments,
        momenta: Vec::new(),
        momenta_minus: Vec::new(),
        multipliers,
        steps,
        diagnostics: Vec::new(),
        seed_constraint_residual,
    };
    let pairs = traj.pairs();
    let mut momenta = Vec::with_capacity(pairs.len() + 1);
    let mut momenta_minus = Vec::with_capacity(pairs.len());
    for (k, pair) in pairs.iter().enumerate() {
        let (d1, d2) = discrete_derivatives(setup, pair)?;
        if k == 0 {
            momenta.push(-&d1);
        }
        momenta.push(d2);
        momenta_minus.push(-d1);
    }
    traj.momenta = momenta;
    traj.momenta_minus = momenta_minus;
    if with_diagnostics {
        traj.diagnostics = diagnostics::trajectory_diagnostics(setup, &pairs)?;
    }
    Ok(traj)
}
