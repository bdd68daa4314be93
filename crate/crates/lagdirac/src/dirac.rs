//! Discrete bundle maps, discrete dual pairings, discrete Dirac
//! differentials of `L_d`, and numerical certification that trajectory
//! data lies in the discrete induced Dirac structure.
//!
//! Elements of `T*T*Q` are stored in chart coordinates `(q, p, eta, xi)`.
//! All `(+)` objects are based at the middle point of a window and consume
//! the momentum one step ahead; `(-)` objects consume the momentum one step
//! behind.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraints::ConstraintEval;
use crate::error::check_dim;
use crate::mechanics::{discrete_derivatives, ConfigPair, DiscreteSetup, PhaseState, Scheme};
use crate::{Error, Result, Vector};

/// Tolerance used when checking that two views of the same point agree.
pub const CONSISTENCY_TOL: f64 = 1e-12;

/// An element `(q, p, eta, xi)` of `T*T*Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentCotangentElement {
    pub base_q: Vector,
    pub base_p: Vector,
    pub eta: Vector,
    pub xi: Vector,
}

impl CotangentCotangentElement {
    pub fn new(base_q: Vector, base_p: Vector, eta: Vector, xi: Vector) -> Result<Self> {
        let n = base_q.len();
        check_dim(n, base_p.len(), "base momentum")?;
        check_dim(n, eta.len(), "eta block")?;
        check_dim(n, xi.len(), "xi block")?;
        Ok(Self {
            base_q,
            base_p,
            eta,
            xi,
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            base_q: Vector::zeros(n),
            base_p: Vector::zeros(n),
            eta: Vector::zeros(n),
            xi: Vector::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.base_q.len()
    }
}

/// Three consecutive cotangent points.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTriple {
    pub z_prev: PhaseState,
    pub z_mid: PhaseState,
    pub z_next: PhaseState,
}

impl PhaseTriple {
    pub fn new(z_prev: PhaseState, z_mid: PhaseState, z_next: PhaseState) -> Result<Self> {
        let n = z_mid.dim();
        for z in [&z_prev, &z_mid, &z_next] {
            check_dim(n, z.q.len(), "triple position")?;
            check_dim(n, z.p.len(), "triple momentum")?;
        }
        Ok(Self {
            z_prev,
            z_mid,
            z_next,
        })
    }
}

/// An element `((q0, q1), (-p0, p1))` of `T*(Q x Q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentProductElement {
    pub pair_q: ConfigPair,
    pub neg_p0: Vector,
    pub p1: Vector,
}

/// `((q0, p0), (q1, p1)) -> ((q0, q1), (-p0, p1))`.
pub fn kappa_d(z0: &PhaseState, z1: &PhaseState) -> Result<CotangentProductElement> {
    let n = z0.dim();
    check_dim(n, z0.p.len(), "kappa z0 momentum")?;
    check_dim(n, z1.q.len(), "kappa z1 position")?;
    check_dim(n, z1.p.len(), "kappa z1 momentum")?;
    Ok(CotangentProductElement {
        pair_q: ConfigPair::new(z0.q.clone(), z1.q.clone())?,
        neg_p0: -&z0.p,
        p1: z1.p.clone(),
    })
}

/// Inverse of [`kappa_d`].
pub fn kappa_d_inverse(elem: &CotangentProductElement) -> Result<(PhaseState, PhaseState)> {
    Ok((
        PhaseState::new(elem.pair_q.q0().clone(), -&elem.neg_p0)?,
        PhaseState::new(elem.pair_q.q1().clone(), elem.p1.clone())?,
    ))
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("h must be positive, got {h}")))
    }
}

/// `(q1, p1, -(p2 - p1)/h, (q1 - q0)/h)` for the triple `(z0, z1, z2)`.
pub fn flat_plus(triple: &PhaseTriple, h: f64) -> Result<CotangentCotangentElement> {
    check_h(h)?;
    let (z0, z1, z2) = (&triple.z_prev, &triple.z_mid, &triple.z_next);
    CotangentCotangentElement::new(
        z1.q.clone(),
        z1.p.clone(),
        -(&z2.p - &z1.p) / h,
        (&z1.q - &z0.q) / h,
    )
}

/// `(q0, p0, -(p0 - p_{-1})/h, (q1 - q0)/h)` for the triple `(z_{-1}, z0, z1)`.
pub fn flat_minus(triple: &PhaseTriple, h: f64) -> Result<CotangentCotangentElement> {
    check_h(h)?;
    let (zm, z0, z1) = (&triple.z_prev, &triple.z_mid, &triple.z_next);
    CotangentCotangentElement::new(
        z0.q.clone(),
        z0.p.clone(),
        -(&z0.p - &zm.p) / h,
        (&z1.q - &z0.q) / h,
    )
}

fn close(a: &Vector, b: &Vector) -> bool {
    a.len() == b.len()
        && a
            .iter()
            .zip(b.iter())
            .all(|(x, y)| (x - y).abs() <= CONSISTENCY_TOL * x.abs().max(y.abs()).max(1.0))
}

fn check_same(a: &PhaseState, b: &PhaseState, what: &str) -> Result<()> {
    if close(&a.q, &b.q) && close(&a.p, &b.p) {
        Ok(())
    } else {
        Err(Error::Inconsistent(format!(
            "{what}: element ({:?}, {:?}) does not match context ({:?}, {:?})",
            a.q.as_slice(),
            a.p.as_slice(),
            b.q.as_slice(),
            b.p.as_slice()
        )))
    }
}

/// `flat_plus` composed with the inverse of `kappa_d`. The element supplies
/// `(z0, z1)`; the context supplies `p2` and must agree with the element.
pub fn gamma_plus(
    elem: &CotangentProductElement,
    context: &PhaseTriple,
    h: f64,
) -> Result<CotangentCotangentElement> {
    let (z0, z1) = kappa_d_inverse(elem)?;
    check_same(&z0, &context.z_prev, "gamma_plus first point")?;
    check_same(&z1, &context.z_mid, "gamma_plus second point")?;
    flat_plus(&PhaseTriple::new(z0, z1, context.z_next.clone())?, h)
}

/// `flat_minus` composed with the inverse of `kappa_d`. The element supplies
/// `(z0, z1)`; the context supplies `p_{-1}` and must agree with the element.
pub fn gamma_minus(
    elem: &CotangentProductElement,
    context: &PhaseTriple,
    h: f64,
) -> Result<CotangentCotangentElement> {
    let (z0, z1) = kappa_d_inverse(elem)?;
    check_same(&z0, &context.z_mid, "gamma_minus first point")?;
    check_same(&z1, &context.z_next, "gamma_minus second point")?;
    flat_minus(&PhaseTriple::new(context.z_prev.clone(), z0, z1)?, h)
}

fn check_base(zeta: &CotangentCotangentElement, z: &PhaseState) -> Result<()> {
    if close(&zeta.base_q, &z.q) && close(&zeta.base_p, &z.p) {
        Ok(())
    } else {
        Err(Error::BaseMismatch(format!(
            "covector based at {:?} paired with point {:?}",
            zeta.base_q.as_slice(),
            z.q.as_slice()
        )))
    }
}

/// `<eta, (q1 - q0)/h> + <(p2 - p1)/h, xi>`, with `zeta` based at `z1`.
pub fn pairing_plus(
    zeta: &CotangentCotangentElement,
    z0: &PhaseState,
    z1: &PhaseState,
    z2_p: &Vector,
    h: f64,
) -> Result<f64> {
    check_h(h)?;
    let n = zeta.dim();
    for v in [&z0.q, &z1.q, &z1.p, z2_p] {
        check_dim(n, v.len(), "pairing argument")?;
    }
    check_base(zeta, z1)?;
    let dq = (&z1.q - &z0.q) / h;
    let dp = (z2_p - &z1.p) / h;
    Ok(zeta.eta.dot(&dq) + dp.dot(&zeta.xi))
}

/// `<eta, (q1 - q0)/h> + <(p0 - p_{-1})/h, xi>`, with `zeta` based at `z0`.
pub fn pairing_minus(
    zeta: &CotangentCotangentElement,
    p_prev: &Vector,
    z0: &PhaseState,
    z1: &PhaseState,
    h: f64,
) -> Result<f64> {
    check_h(h)?;
    let n = zeta.dim();
    for v in [p_prev, &z0.q, &z0.p, &z1.q] {
        check_dim(n, v.len(), "pairing argument")?;
    }
    check_base(zeta, z0)?;
    let dq = (&z1.q - &z0.q) / h;
    let dp = (&z0.p - p_prev) / h;
    Ok(zeta.eta.dot(&dq) + dp.dot(&zeta.xi))
}

/// Coordinates of the `(+)` discrete Dirac differential at `(q0, v0)`:
/// `(v0, D2 L_d(q0, v0), -(D2 L_d(q1, v1) + D1 L_d(q1, v1))/h, (v0 - q0)/h)`.
pub fn dirac_differential_plus(
    setup: &DiscreteSetup,
    first: &ConfigPair,
    next: &ConfigPair,
) -> Result<CotangentCotangentElement> {
    let (_, d2_first) = discrete_derivatives(setup, first)?;
    let (d1_next, d2_next) = discrete_derivatives(setup, next)?;
    let h = setup.h;
    CotangentCotangentElement::new(
        first.q1().clone(),
        d2_first,
        -(d2_next + d1_next) / h,
        first.velocity(h),
    )
}

/// Coordinates of the `(-)` discrete Dirac differential at `(v1, q1)`:
/// `(v1, -D1 L_d(v1, q1), -(D2 L_d(v0, q0) + D1 L_d(v0, q0))/h, (q1 - v1)/h)`.
pub fn dirac_differential_minus(
    setup: &DiscreteSetup,
    pair: &ConfigPair,
    prev: &ConfigPair,
) -> Result<CotangentCotangentElement> {
    let (d1_pair, _) = discrete_derivatives(setup, pair)?;
    let (d1_prev, d2_prev) = discrete_derivatives(setup, prev)?;
    let h = setup.h;
    CotangentCotangentElement::new(
        pair.q0().clone(),
        -d1_pair,
        -(d2_prev + d1_prev) / h,
        pair.velocity(h),
    )
}

/// Three consecutive configurations as two pairs, plus the two momenta the
/// scheme needs.
///
/// Plus: `first = (q0, v0)`, `second = (q1, v1)`, `p_a = p1`, `p_b = p2`.
/// Minus: `first = (v0, q0)`, `second = (v1, q1)`, `p_a = p_{-1}`, `p_b = p0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracWindow {
    pub first: ConfigPair,
    pub second: ConfigPair,
    pub p_a: Vector,
    pub p_b: Vector,
}

impl DiracWindow {
    /// Window from two consecutive pairs with the scheme's discrete Legendre
    /// momenta: `D2 L_d` of each pair for plus, `-D1 L_d` for minus.
    pub fn from_pairs(setup: &DiscreteSetup, first: ConfigPair, second: ConfigPair) -> Result<Self> {
        let (d1a, d2a) = discrete_derivatives(setup, &first)?;
        let (d1b, d2b) = discrete_derivatives(setup, &second)?;
        let (p_a, p_b) = match setup.scheme {
            Scheme::Plus => (d2a, d2b),
            Scheme::Minus => (-d1a, -d1b),
        };
        Ok(Self {
            first,
            second,
            p_a,
            p_b,
        })
    }

    /// Window starting at pair `k` of a sequence of pairs.
    pub fn from_slice(setup: &DiscreteSetup, pairs: &[ConfigPair], k: usize) -> Result<Self> {
        if k + 1 >= pairs.len() {
            return Err(Error::IncompleteWindow {
                index: k,
                states: pairs.len() + 1,
            });
        }
        Self::from_pairs(setup, pairs[k].clone(), pairs[k + 1].clone())
    }
}

/// The three local conditions for membership in the discrete Dirac structure.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct MembershipResidual {
    /// Norm of the discrete constraint residual.
    pub constraint: f64,
    /// Norm of the mismatch between the two velocity approximations.
    pub second_order: f64,
    /// Distance of the force covector from the annihilator.
    pub annihilator: f64,
}

impl MembershipResidual {
    pub fn max(&self) -> f64 {
        self.constraint.max(self.second_order).max(self.annihilator)
    }
}

/// Evaluate the membership conditions for the discrete Dirac differential
/// and the discrete vector field read off the window.
pub fn membership_residual(setup: &DiscreteSetup, window: &DiracWindow) -> Result<MembershipResidual> {
    let n = setup.dim();
    setup.check_pair(&window.first)?;
    setup.check_pair(&window.second)?;
    check_dim(n, window.p_a.len(), "window momentum")?;
    check_dim(n, window.p_b.len(), "window momentum")?;
    let h = setup.h;
    let DiracWindow {
        first,
        second,
        p_a,
        p_b,
    } = window;
    match setup.scheme {
        Scheme::Plus => {
            // (q0, v0) = first, (q1, v1) = second, p1 = p_a, p2 = p_b
            let dd = dirac_differential_plus(setup, first, second)?;
            let q1 = second.q0();
            let ev = ConstraintEval::new(&setup.model, first.q1())?;
            let constraint = (&ev.omega * first.delta() / h).norm();
            let q_hat = (q1 - first.q0()) / h;
            let second_order = (&dd.xi - q_hat).norm();
            let force = &dd.eta + (p_b - p_a) / h;
            let annihilator = ConstraintEval::new(&setup.model, q1)?.annihilator_residual(&force)?;
            Ok(MembershipResidual {
                constraint,
                second_order,
                annihilator,
            })
        }
        Scheme::Minus => {
            // (v0, q0) = first, (v1, q1) = second, p_{-1} = p_a, p0 = p_b
            let dd = dirac_differential_minus(setup, second, first)?;
            let q0 = first.q1();
            let ev = ConstraintEval::new(&setup.model, second.q0())?;
            let constraint = (&ev.omega * second.delta() / h).norm();
            let q_hat = (second.q1() - q0) / h;
            let second_order = (&dd.xi - q_hat).norm();
            let force = &dd.eta + (p_b - p_a) / h;
            let annihilator = ConstraintEval::new(&setup.model, q0)?.annihilator_residual(&force)?;
            Ok(MembershipResidual {
                constraint,
                second_order,
                annihilator,
            })
        }
    }
}

/// Local parameters of an element of the discrete Dirac structure at a
/// base point: an admissible velocity `q_hat`, a momentum rate `p_hat`, and
/// multipliers `mu` for the annihilator offset.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureSample {
    pub q_hat: Vector,
    pub p_hat: Vector,
    pub mu: Vector,
}

/// Build the phase triple and covector of a structure element at `base`.
///
/// For plus the base is the middle point `(q1, p1)` and the element is
/// `X = (q1 - h q_hat, p1, q1, p1)` with `p2 = p1 + h p_hat`. For minus the
/// base is `(q0, p0)` with `q1 = q0 + h q_hat` and `p_{-1} = p0 - h p_hat`.
/// The covector is the flat image plus `(omega^T mu, 0)`.
pub fn structure_element(
    setup: &DiscreteSetup,
    base: &PhaseState,
    sample: &StructureSample,
) -> Result<(PhaseTriple, CotangentCotangentElement)> {
    let n = setup.dim();
    check_dim(n, base.q.len(), "structure base")?;
    check_dim(n, sample.q_hat.len(), "structure velocity")?;
    check_dim(n, sample.p_hat.len(), "structure momentum rate")?;
    check_dim(setup.model.n_constraints(), sample.mu.len(), "structure multipliers")?;
    let h = setup.h;
    let offset = setup.model.omega(&base.q).tr_mul(&sample.mu);
    let step_q = &sample.q_hat * h;
    let step_p = &sample.p_hat * h;
    let (triple, mut zeta) = match setup.scheme {
        Scheme::Plus => {
            let z0 = PhaseState::new(&base.q - &step_q, base.p.clone())?;
            let z2 = PhaseState::new(&base.q + &step_q, &base.p + &step_p)?;
            let t = PhaseTriple::new(z0, base.clone(), z2)?;
            let f = flat_plus(&t, h)?;
            (t, f)
        }
        Scheme::Minus => {
            let zm = PhaseState::new(&base.q - &step_q, &base.p - &step_p)?;
            let z1 = PhaseState::new(&base.q + &step_q, base.p.clone())?;
            let t = PhaseTriple::new(zm, base.clone(), z1)?;
            let f = flat_minus(&t, h)?;
            (t, f)
        }
    };
    zeta.eta += offset;
    Ok((triple, zeta))
}

/// `<alpha_a, X_b> + <alpha_b, X_a>` in the scheme's discrete pairing.
pub fn isotropy_defect(
    setup: &DiscreteSetup,
    base: &PhaseState,
    a: &StructureSample,
    b: &StructureSample,
) -> Result<f64> {
    let (ta, za) = structure_element(setup, base, a)?;
    let (tb, zb) = structure_element(setup, base, b)?;
    let h = setup.h;
    let pair = |zeta: &CotangentCotangentElement, t: &PhaseTriple| match setup.scheme {
        Scheme::Plus => pairing_plus(zeta, &t.z_prev, &t.z_mid, &t.z_next.p, h),
        Scheme::Minus => pairing_minus(zeta, &t.z_prev.p, &t.z_mid, &t.z_next, h),
    };
    Ok(pair(&za, &tb)? + pair(&zb, &ta)?)
}

/// Draw a random structure sample at `base`: `q_hat` uniform in the unit
/// cube of kernel coordinates, `p_hat` and `mu` uniform in `[-1, 1]`.
pub fn random_structure_sample<R: Rng>(
    setup: &DiscreteSetup,
    base: &PhaseState,
    rng: &mut R,
) -> Result<StructureSample> {
    let n = setup.dim();
    let m = setup.model.n_constraints();
    let ev = ConstraintEval::new(&setup.model, &base.q)?;
    let k = ev.kernel_basis();
    let c = Vector::from_fn(k.ncols(), |_, _| rng.gen_range(-1.0..=1.0));
    Ok(StructureSample {
        q_hat: k * c,
        p_hat: Vector::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0)),
        mu: Vector::from_fn(m, |_, _| rng.gen_range(-1.0..=1.0)),
    })
}

/// Largest isotropy defect over `trials` random pairs of structure
/// elements at `base`. Deterministic for a given seed.
pub fn isotropy_samples(setup: &DiscreteSetup, base: &PhaseState, trials: usize, rng_seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let a = random_structure_sample(setup, base, &mut rng)?;
        let b = random_structure_sample(setup, base, &mut rng)?;
        worst = worst.max(isotropy_defect(setup, base, &a, &b)?.abs());
    }
    Ok(worst)
}
