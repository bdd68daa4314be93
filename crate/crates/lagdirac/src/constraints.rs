//! Constraint distributions, their annihilators, and the discrete
//! constraint spaces used by the two schemes.

use crate::error::check_dim;
use crate::mechanics::{ConfigPair, DiscreteSetup, MechModel, Scheme};
use crate::numeric::max_abs;
use crate::{Error, Matrix, Result, Vector};

/// Numerical rank threshold relative to the largest singular value.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Constraint matrix evaluated at one point, with orthonormal bases for its
/// row space and its kernel.
#[derive(Clone, Debug)]
pub struct ConstraintEval {
    pub omega: Matrix,
    pub base_q: Vector,
    row_basis: Matrix,
    kernel: Matrix,
}

impl ConstraintEval {
    pub fn new(model: &MechModel, q: &Vector) -> Result<Self> {
        Self::with_tol(model, q, DEFAULT_RANK_TOL)
    }

    /// Evaluate `omega(q)` and verify full row rank with `sigma_i > rank_tol * sigma_max`.
    pub fn with_tol(model: &MechModel, q: &Vector, rank_tol: f64) -> Result<Self> {
        check_dim(model.dim(), q.len(), "constraint base point")?;
        let omega = model.omega(q);
        Self::from_matrix(omega, q.clone(), rank_tol)
    }

    pub fn from_matrix(omega: Matrix, base_q: Vector, rank_tol: f64) -> Result<Self> {
        let (m, n) = omega.shape();
        check_dim(n, base_q.len(), "constraint matrix columns")?;
        if m == 0 {
            return Ok(Self {
                omega,
                base_q,
                row_basis: Matrix::zeros(n, 0),
                kernel: Matrix::identity(n, n),
            });
        }
        // pad to square so the SVD returns a full set of right singular vectors
        let mut padded = Matrix::zeros(n.max(m), n);
        padded.rows_mut(0, m).copy_from(&omega);
        let svd = padded.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[b]
                .partial_cmp(&svd.singular_values[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let smax = svd.singular_values[order[0]];
        let rank = order
            .iter()
            .filter(|&&i| smax > 0.0 && svd.singular_values[i] > rank_tol * smax)
            .count();
        if rank < m {
            return Err(Error::RankDeficient {
                q: base_q.iter().copied().collect(),
                rank,
                rows: m,
            });
        }
        let mut row_basis = Matrix::zeros(n, m);
        let mut kernel = Matrix::zeros(n, n - m);
        for (k, &i) in order.iter().enumerate() {
            let col = v_t.row(i).transpose();
            if k < m {
                row_basis.set_column(k, &col);
            } else {
                kernel.set_column(k - m, &col);
            }
        }
        Ok(Self {
            omega,
            base_q,
            row_basis,
            kernel,
        })
    }

    pub fn n_constraints(&self) -> usize {
        self.omega.nrows()
    }

    /// Orthonormal basis of the admissible velocities, `n x (n - m)`.
    pub fn kernel_basis(&self) -> &Matrix {
        &self.kernel
    }

    /// Orthonormal basis of the row space of `omega`, `n x m`.
    pub fn row_space_basis(&self) -> &Matrix {
        &self.row_basis
    }

    /// Norm of the part of `alpha` orthogonal to the row space of `omega`.
    pub fn annihilator_residual(&self, alpha: &Vector) -> Result<f64> {
        check_dim(self.omega.ncols(), alpha.len(), "covector")?;
        let proj = &self.row_basis * (self.row_basis.transpose() * alpha);
        Ok((alpha - proj).norm())
    }
}

/// Base point of the discrete constraint for the given scheme.
pub fn constraint_base(scheme: Scheme, pair: &ConfigPair) -> &Vector {
    match scheme {
        Scheme::Plus => pair.q1(),
        Scheme::Minus => pair.q0(),
    }
}

/// `omega(b) (q1 - q0)/h`, with `b = q1` (plus) or `b = q0` (minus).
/// Zero exactly when the pair lies in the discrete constraint space.
pub fn discrete_constraint_residual(setup: &DiscreteSetup, pair: &ConfigPair) -> Result<Vector> {
    discrete_constraint_residual_for(setup, setup.scheme, pair)
}

/// As [`discrete_constraint_residual`] with an explicit scheme.
pub fn discrete_constraint_residual_for(
    setup: &DiscreteSetup,
    scheme: Scheme,
    pair: &ConfigPair,
) -> Result<Vector> {
    setup.check_pair(pair)?;
    let base = constraint_base(scheme, pair);
    let ev = ConstraintEval::new(&setup.model, base)?;
    Ok(&ev.omega * pair.delta() / setup.h)
}

/// Whether the max-norm of the discrete constraint residual is at most `tol`.
pub fn in_discrete_constraint_space(setup: &DiscreteSetup, pair: &ConfigPair, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    Ok(max_abs(&discrete_constraint_residual(setup, pair)?) <= tol)
}

/// `mu^T omega(q)`.
pub fn annihilator_covector(model: &MechModel, q: &Vector, mu: &Vector) -> Result<Vector> {
    check_dim(model.dim(), q.len(), "base point")?;
    check_dim(model.n_constraints(), mu.len(), "multipliers")?;
    Ok(model.omega(q).tr_mul(mu))
}

/// Distance of `alpha` from the annihilator of the constraint distribution at `q`.
pub fn annihilator_residual(model: &MechModel, q: &Vector, alpha: &Vector) -> Result<f64> {
    ConstraintEval::new(model, q)?.annihilator_residual(alpha)
}
