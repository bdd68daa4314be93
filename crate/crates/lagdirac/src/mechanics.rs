//! Lagrangian models, finite difference maps on `Q`, the discrete Lagrangian
//! and its partial derivatives, and the discrete Legendre transforms.
//!
//! Configuration space is a single global chart `R^n`. Angles are plain
//! unwrapped reals.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::check_dim;
use crate::numeric::{central_gradient, central_jacobian};
use crate::{Error, Matrix, Result, Vector};

/// Default relative finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

pub type ScalarFn = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&Vector, &Vector) -> Matrix + Send + Sync>;
pub type ConstraintFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// A Lagrangian system `L(q, v)` with `m` linear velocity constraints
/// `omega(q) v = 0`.
///
/// Only the Lagrangian is mandatory. Missing gradients and Hessian blocks
/// are replaced by central differences.
#[derive(Clone)]
pub struct MechModel {
    id: String,
    dim_q: usize,
    n_constraints: usize,
    lagrangian: ScalarFn,
    grad_q: Option<VectorFn>,
    grad_v: Option<VectorFn>,
    hess_qv: Option<MatrixFn>,
    hess_vv: Option<MatrixFn>,
    constraint: Option<ConstraintFn>,
    constraint_dq: Option<MatrixFn>,
    names: Vec<String>,
    params: BTreeMap<String, f64>,
}

impl fmt::Debug for MechModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MechModel")
            .field("id", &self.id)
            .field("dim_q", &self.dim_q)
            .field("n_constraints", &self.n_constraints)
            .field("analytic_gradients", &self.has_analytic_gradients())
            .field("names", &self.names)
            .field("params", &self.params)
            .finish()
    }
}

impl MechModel {
    /// Unconstrained model with the given Lagrangian. Coordinates are named `q0, q1, ...`.
    pub fn new<F>(id: impl Into<String>, dim_q: usize, lagrangian: F) -> Result<Self>
    where
        F: Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
    {
        if dim_q == 0 {
            return Err(Error::InvalidParameter("dim_q must be positive".into()));
        }
        Ok(Self {
            id: id.into(),
            dim_q,
            n_constraints: 0,
            lagrangian: Arc::new(lagrangian),
            grad_q: None,
            grad_v: None,
            hess_qv: None,
            hess_vv: None,
            constraint: None,
            constraint_dq: None,
            names: (0..dim_q).map(|i| format!("q{i}")).collect(),
            params: BTreeMap::new(),
        })
    }

    /// Analytic `dL/dq` and `dL/dv`.
    pub fn with_gradients<G, H>(mut self, grad_q: G, grad_v: H) -> Self
    where
        G: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
        H: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    {
        self.grad_q = Some(Arc::new(grad_q));
        self.grad_v = Some(Arc::new(grad_v));
        self
    }

    /// Analytic Hessian blocks: `hess_qv[i][j] = d^2 L / dq_i dv_j` and
    /// `hess_vv[i][j] = d^2 L / dv_i dv_j`.
    pub fn with_hessians<A, B>(mut self, hess_qv: A, hess_vv: B) -> Self
    where
        A: Fn(&Vector, &Vector) -> Matrix + Send + Sync + 'static,
        B: Fn(&Vector, &Vector) -> Matrix + Send + Sync + 'static,
    {
        self.hess_qv = Some(Arc::new(hess_qv));
        self.hess_vv = Some(Arc::new(hess_vv));
        self
    }

    /// Constraint one-forms: `omega(q)` is an `m x n` matrix whose rows are the forms.
    pub fn with_constraints<F>(mut self, m: usize, omega: F) -> Result<Self>
    where
        F: Fn(&Vector) -> Matrix + Send + Sync + 'static,
    {
        if m >= self.dim_q {
            return Err(Error::InvalidParameter(format!(
                "need fewer constraints than coordinates (m = {m}, n = {})",
                self.dim_q
            )));
        }
        self.n_constraints = m;
        self.constraint = if m == 0 { None } else { Some(Arc::new(omega)) };
        Ok(self)
    }

    /// Analytic derivative `(q, u) -> d(omega(q) u)/dq`, an `m x n` matrix.
    pub fn with_constraint_derivative<F>(mut self, d: F) -> Self
    where
        F: Fn(&Vector, &Vector) -> Matrix + Send + Sync + 'static,
    {
        self.constraint_dq = Some(Arc::new(d));
        self
    }

    pub fn with_names<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self> {
        check_dim(self.dim_q, names.len(), "coordinate names")?;
        self.names = names.iter().map(|s| s.as_ref().to_string()).collect();
        Ok(self)
    }

    pub fn with_param(mut self, key: impl Into<String>, value: f64) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim_q
    }

    pub fn n_constraints(&self) -> usize {
        self.n_constraints
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    pub fn has_analytic_gradients(&self) -> bool {
        self.grad_q.is_some() && self.grad_v.is_some()
    }

    pub fn has_hessians(&self) -> bool {
        self.hess_qv.is_some() && self.hess_vv.is_some()
    }

    pub fn lagrangian(&self, q: &Vector, v: &Vector) -> f64 {
        (self.lagrangian)(q, v)
    }

    /// `dL/dq`, analytic when available, otherwise central differences.
    pub fn grad_q(&self, q: &Vector, v: &Vector, fd_step: f64) -> Vector {
        match &self.grad_q {
            Some(g) => g(q, v),
            None => central_gradient(q, fd_step, |x| (self.lagrangian)(x, v)),
        }
    }

    /// `dL/dv`, analytic when available, otherwise central differences.
    pub fn grad_v(&self, q: &Vector, v: &Vector, fd_step: f64) -> Vector {
        match &self.grad_v {
            Some(g) => g(q, v),
            None => central_gradient(v, fd_step, |x| (self.lagrangian)(q, x)),
        }
    }

    /// `(hess_qv, hess_vv)`; differenced from the gradients when not supplied.
    pub fn hessian_blocks(&self, q: &Vector, v: &Vector, fd_step: f64) -> (Matrix, Matrix) {
        if let (Some(a), Some(b)) = (&self.hess_qv, &self.hess_vv) {
            return (a(q, v), b(q, v));
        }
        let n = self.dim_q;
        // column j of d(grad_q)/dv is d^2L/dq_i dv_j over i
        let qv = central_jacobian(v, n, fd_step, |x| self.grad_q(q, x, fd_step));
        let vv = central_jacobian(v, n, fd_step, |x| self.grad_v(q, x, fd_step));
        (qv, vv)
    }

    /// Constraint matrix `omega(q)`, `m x n` (zero rows when unconstrained).
    pub fn omega(&self, q: &Vector) -> Matrix {
        match &self.constraint {
            Some(f) => f(q),
            None => Matrix::zeros(0, self.dim_q),
        }
    }

    /// `d(omega(q) u)/dq`, analytic when supplied.
    pub fn constraint_derivative(&self, q: &Vector, u: &Vector, fd_step: f64) -> Matrix {
        if self.n_constraints == 0 {
            return Matrix::zeros(0, self.dim_q);
        }
        match &self.constraint_dq {
            Some(f) => f(q, u),
            None => central_jacobian(q, self.n_constraints, fd_step, |x| self.omega(x) * u),
        }
    }
}

/// Which of the two discrete constructions is in use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Plus,
    Minus,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Plus => "plus",
            Scheme::Minus => "minus",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(Scheme::Plus),
            "minus" | "-" => Ok(Scheme::Minus),
            other => Err(Error::InvalidParameter(format!("unknown scheme '{other}'"))),
        }
    }
}

/// A model together with a step size and scheme.
#[derive(Clone, Debug)]
pub struct DiscreteSetup {
    pub model: MechModel,
    pub h: f64,
    pub scheme: Scheme,
    pub fd_step: f64,
}

impl DiscreteSetup {
    pub fn new(model: MechModel, h: f64, scheme: Scheme) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
        }
        Ok(Self {
            model,
            h,
            scheme,
            fd_step: DEFAULT_FD_STEP,
        })
    }

    pub fn with_fd_step(mut self, fd_step: f64) -> Result<Self> {
        if !(fd_step > 0.0 && fd_step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "fd_step must be positive, got {fd_step}"
            )));
        }
        self.fd_step = fd_step;
        Ok(self)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_h(mut self, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
        }
        self.h = h;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub(crate) fn check_pair(&self, pair: &ConfigPair) -> Result<()> {
        check_dim(self.model.dim(), pair.dim(), "configuration pair")
    }
}

/// A pair `(q0, q1)` of configurations.
///
/// The increment `q1 - q0` is stored alongside the endpoints. Integrators
/// fill it with the exact Newton increment so that velocities do not
/// suffer cancellation when the positions are large.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigPair {
    q0: Vector,
    q1: Vector,
    delta: Vector,
}

impl ConfigPair {
    pub fn new(q0: Vector, q1: Vector) -> Result<Self> {
        check_dim(q0.len(), q1.len(), "pair endpoints")?;
        let delta = &q1 - &q0;
        Ok(Self { q0, q1, delta })
    }

    /// Pair `(q0, q0 + delta)`.
    pub fn from_delta(q0: Vector, delta: Vector) -> Result<Self> {
        check_dim(q0.len(), delta.len(), "pair increment")?;
        let q1 = &q0 + &delta;
        Ok(Self { q0, q1, delta })
    }

    /// Pair with an explicitly supplied increment. The caller guarantees
    /// `q1` is `q0 + delta` up to rounding.
    pub fn from_parts(q0: Vector, q1: Vector, delta: Vector) -> Result<Self> {
        check_dim(q0.len(), q1.len(), "pair endpoints")?;
        check_dim(q0.len(), delta.len(), "pair increment")?;
        Ok(Self { q0, q1, delta })
    }

    pub fn q0(&self) -> &Vector {
        &self.q0
    }

    pub fn q1(&self) -> &Vector {
        &self.q1
    }

    /// `q1 - q0`.
    pub fn delta(&self) -> &Vector {
        &self.delta
    }

    pub fn dim(&self) -> usize {
        self.q0.len()
    }

    pub fn velocity(&self, h: f64) -> Vector {
        &self.delta / h
    }
}

/// A cotangent point `(q, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseState {
    pub q: Vector,
    pub p: Vector,
}

impl PhaseState {
    pub fn new(q: Vector, p: Vector) -> Result<Self> {
        check_dim(q.len(), p.len(), "phase state")?;
        Ok(Self { q, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }
}

/// A Pontryagin point `(q, v, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PontryaginState {
    pub q: Vector,
    pub v: Vector,
    pub p: Vector,
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("h must be positive, got {h}")))
    }
}

/// Forward map: `(q0, (q1 - q0)/h)`.
pub fn fd_map_forward(pair: &ConfigPair, h: f64) -> Result<(Vector, Vector)> {
    check_h(h)?;
    Ok((pair.q0.clone(), pair.velocity(h)))
}

/// Backward map: `(q1, (q1 - q0)/h)`.
pub fn fd_map_backward(pair: &ConfigPair, h: f64) -> Result<(Vector, Vector)> {
    check_h(h)?;
    Ok((pair.q1.clone(), pair.velocity(h)))
}

/// `L_d(q0, q1) = h L(q0, (q1 - q0)/h)`.
pub fn discrete_lagrangian(setup: &DiscreteSetup, pair: &ConfigPair) -> Result<f64> {
    setup.check_pair(pair)?;
    let v = pair.velocity(setup.h);
    Ok(setup.h * setup.model.lagrangian(&pair.q0, &v))
}

/// Both partial derivatives `(D1 L_d, D2 L_d)` from one gradient evaluation.
pub fn discrete_derivatives(setup: &DiscreteSetup, pair: &ConfigPair) -> Result<(Vector, Vector)> {
    setup.check_pair(pair)?;
    let v = pair.velocity(setup.h);
    let lq = setup.model.grad_q(&pair.q0, &v, setup.fd_step);
    let lv = setup.model.grad_v(&pair.q0, &v, setup.fd_step);
    let d1 = lq * setup.h - &lv;
    Ok((d1, lv))
}

/// `D1 L_d = h dL/dq(q0, v) - dL/dv(q0, v)` with `v = (q1 - q0)/h`.
pub fn d1_ld(setup: &DiscreteSetup, pair: &ConfigPair) -> Result<Vector> {
    discrete_derivatives(setup, pair).map(|(d1, _)| d1)
}

/// `D2 L_d = dL/dv(q0, v)` with `v = (q1 - q0)/h`.
pub fn d2_ld(setup: &DiscreteSetup, pair: &ConfigPair) -> Result<Vector> {
    setup.check_pair(pair)?;
    let v = pair.velocity(setup.h);
    Ok(setup.model.grad_v(&pair.q0, &v, setup.fd_step))
}

/// Post-step momentum: `(q1, D2 L_d(q0, q1))`.
pub fn legendre_plus(setup: &DiscreteSetup, pair: &ConfigPair) -> Result<PhaseState> {
    Ok(PhaseState {
        q: pair.q1.clone(),
        p: d2_ld(setup, pair)?,
    })
}

/// Pre-step momentum: `(q0, -D1 L_d(q0, q1))`.
pub fn legendre_minus(setup: &DiscreteSetup, pair: &ConfigPair) -> Result<PhaseState> {
    Ok(PhaseState {
        q: pair.q0.clone(),
        p: -d1_ld(setup, pair)?,
    })
}

/// Largest relative deviation between the model's analytic gradients and
/// central differences of its Lagrangian at `(q, v)`. Zero when the model
/// has no analytic gradients.
///
/// Relative means `|analytic - fd| / max(1, |fd|)` per component.
pub fn gradient_consistency(model: &MechModel, q: &Vector, v: &Vector, fd_step: f64) -> f64 {
    let (Some(gq), Some(gv)) = (&model.grad_q, &model.grad_v) else {
        return 0.0;
    };
    let fq = central_gradient(q, fd_step, |x| model.lagrangian(x, v));
    let fv = central_gradient(v, fd_step, |x| model.lagrangian(q, x));
    let rel = |a: &Vector, b: &Vector| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
            .fold(0.0_f64, f64::max)
    };
    rel(&gq(q, v), &fq).max(rel(&gv(q, v), &fv))
}
