//! Bundled models: the vertical rolling disk, the Heisenberg system, and
//! unconstrained oscillator / free particle references.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::dvector;

use crate::mechanics::MechModel;
use crate::{Error, Matrix, Result, Vector};

/// Step size used for the rolling disk reference run.
pub const DISK_H: f64 = 0.001;
/// Step size used for the Heisenberg reference run.
pub const HEISENBERG_H: f64 = 0.01;

/// Seed pair for the rolling disk in `(x, y, theta, phi)` order. The values
/// are the 7-digit reference data, not `pi / 3`.
#[allow(clippy::approx_constant)]
pub fn rolling_disk_seed() -> (Vector, Vector) {
    (
        dvector![0.0, 0.0, 0.0, 1.0471976],
        dvector![0.005, 0.0086603, 0.01, 1.0481976],
    )
}

/// Seed pair for the Heisenberg system in `(x, y, z)` order.
pub fn heisenberg_seed() -> (Vector, Vector) {
    (dvector![1.0, 0.0, 0.1], dvector![1.05, 0.1, 0.0])
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

/// Vertical disk rolling without slipping on a plane.
///
/// Coordinates `(x, y, theta, phi)`: contact point, rolling angle, heading.
/// `L = m/2 (vx^2 + vy^2) + I/2 vtheta^2 + J/2 vphi^2 + pot_amp sin(theta)`,
/// i.e. the forcing potential is `V = -pot_amp sin(theta)`.
/// Constraints `vx = R cos(phi) vtheta`, `vy = R sin(phi) vtheta`.
pub fn rolling_disk(m: f64, i: f64, j: f64, r: f64, pot_amp: f64) -> Result<MechModel> {
    positive("m", m)?;
    positive("I", i)?;
    positive("J", j)?;
    positive("R", r)?;
    if !pot_amp.is_finite() {
        return Err(Error::InvalidParameter("pot_amp must be finite".into()));
    }
    let mass = dvector![m, m, i, j];
    let mass_l = mass.clone();
    let mass_v = mass.clone();
    MechModel::new("rolling_disk", 4, move |q: &Vector, v: &Vector| {
        0.5 * v.component_mul(v).dot(&mass_l) + pot_amp * q[2].sin()
    })?
    .with_gradients(
        move |q: &Vector, _v: &Vector| dvector![0.0, 0.0, pot_amp * q[2].cos(), 0.0],
        move |_q: &Vector, v: &Vector| v.component_mul(&mass_v),
    )
    .with_hessians(
        |_q: &Vector, _v: &Vector| Matrix::zeros(4, 4),
        move |_q: &Vector, _v: &Vector| Matrix::from_diagonal(&mass),
    )
    .with_constraints(2, move |q: &Vector| {
        let (s, c) = q[3].sin_cos();
        Matrix::from_row_slice(2, 4, &[1.0, 0.0, -r * c, 0.0, 0.0, 1.0, -r * s, 0.0])
    })?
    .with_constraint_derivative(move |q: &Vector, u: &Vector| {
        let (s, c) = q[3].sin_cos();
        let mut d = Matrix::zeros(2, 4);
        d[(0, 3)] = r * s * u[2];
        d[(1, 3)] = -r * c * u[2];
        d
    })
    .with_names(&["x", "y", "theta", "phi"])
    .map(|md| {
        md.with_param("m", m)
            .with_param("I", i)
            .with_param("J", j)
            .with_param("R", r)
            .with_param("pot_amp", pot_amp)
    })
}

/// Rolling disk with `m = 1`, `I = 0.25`, `J = 0.5`, `R = 1`, `pot_amp = 10`.
pub fn rolling_disk_default() -> MechModel {
    rolling_disk(1.0, 0.25, 0.5, 1.0, 10.0).expect("default disk parameters are valid")
}

/// Heisenberg system: `L = |v|^2 / 2` on `R^3` with `vz = y vx - x vy`.
pub fn heisenberg() -> MechModel {
    MechModel::new("heisenberg", 3, |_q: &Vector, v: &Vector| 0.5 * v.norm_squared())
        .and_then(|md| {
            md.with_gradients(|_q: &Vector, _v: &Vector| Vector::zeros(3), |_q, v: &Vector| v.clone())
                .with_hessians(
                    |_q: &Vector, _v: &Vector| Matrix::zeros(3, 3),
                    |_q: &Vector, _v: &Vector| Matrix::identity(3, 3),
                )
                .with_constraints(1, |q: &Vector| Matrix::from_row_slice(1, 3, &[-q[1], q[0], 1.0]))
        })
        .map(|md| {
            md.with_constraint_derivative(|_q: &Vector, u: &Vector| {
                Matrix::from_row_slice(1, 3, &[u[1], -u[0], 0.0])
            })
        })
        .and_then(|md| md.with_names(&["x", "y", "z"]))
        .expect("heisenberg model is well formed")
}

/// One-dimensional harmonic oscillator `L = v^2/2 - omega0^2 q^2 / 2`.
pub fn oscillator(omega0: f64) -> Result<MechModel> {
    oscillator_nd(1, omega0)
}

/// `n` decoupled oscillators with a common frequency.
pub fn oscillator_nd(n: usize, omega0: f64) -> Result<MechModel> {
    positive("omega0", omega0)?;
    let w2 = omega0 * omega0;
    let names: Vec<String> = if n == 1 {
        vec!["q".into()]
    } else {
        (0..n).map(|i| format!("q{i}")).collect()
    };
    Ok(MechModel::new("oscillator", n, move |q: &Vector, v: &Vector| {
        0.5 * v.norm_squared() - 0.5 * w2 * q.norm_squared()
    })?
    .with_gradients(move |q: &Vector, _v: &Vector| -w2 * q, |_q, v: &Vector| v.clone())
    .with_hessians(
        move |_q: &Vector, _v: &Vector| Matrix::zeros(n, n),
        move |_q: &Vector, _v: &Vector| Matrix::identity(n, n),
    )
    .with_names(&names)?
    .with_param("omega0", omega0)
    .with_param("n", n as f64))
}

/// Free particle `L = |v|^2 / 2` in `n` dimensions.
pub fn free_particle(n: usize) -> Result<MechModel> {
    let names: Vec<String> = if n == 1 {
        vec!["q".into()]
    } else {
        (0..n).map(|i| format!("q{i}")).collect()
    };
    Ok(MechModel::new("free_particle", n, |_q: &Vector, v: &Vector| 0.5 * v.norm_squared())?
        .with_gradients(move |_q: &Vector, _v: &Vector| Vector::zeros(n), |_q, v: &Vector| v.clone())
        .with_hessians(
            move |_q: &Vector, _v: &Vector| Matrix::zeros(n, n),
            move |_q: &Vector, _v: &Vector| Matrix::identity(n, n),
        )
        .with_names(&names)?
        .with_param("n", n as f64))
}

/// Identifier of a bundled model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelId {
    RollingDisk,
    Heisenberg,
    Oscillator,
    FreeParticle,
}

impl ModelId {
    pub const ALL: [ModelId; 4] = [
        ModelId::RollingDisk,
        ModelId::Heisenberg,
        ModelId::Oscillator,
        ModelId::FreeParticle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelId::RollingDisk => "rolling_disk",
            ModelId::Heisenberg => "heisenberg",
            ModelId::Oscillator => "oscillator",
            ModelId::FreeParticle => "free_particle",
        }
    }

    /// Parameter names and defaults.
    pub fn default_params(&self) -> BTreeMap<String, f64> {
        let pairs: &[(&str, f64)] = match self {
            ModelId::RollingDisk => &[
                ("m", 1.0),
                ("I", 0.25),
                ("J", 0.5),
                ("R", 1.0),
                ("pot_amp", 10.0),
            ],
            ModelId::Heisenberg => &[],
            ModelId::Oscillator => &[("omega0", 1.0), ("n", 1.0)],
            ModelId::FreeParticle => &[("n", 1.0)],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model '{s}'")))
    }
}

/// A bundled model identifier plus parameter overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub id: ModelId,
    pub params: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn new(id: ModelId) -> Self {
        Self {
            id,
            params: BTreeMap::new(),
        }
    }

    /// Defaults merged with overrides. Unknown keys are an error.
    pub fn resolved_params(&self) -> Result<BTreeMap<String, f64>> {
        let mut all = self.id.default_params();
        for (k, v) in &self.params {
            match all.get_mut(k) {
                Some(slot) => *slot = *v,
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "model {} has no parameter '{k}'",
                        self.id
                    )))
                }
            }
        }
        Ok(all)
    }

    pub fn build(&self) -> Result<MechModel> {
        let p = self.resolved_params()?;
        let count = |key: &str| -> Result<usize> {
            let x = p[key];
            if x >= 1.0 && x.fract() == 0.0 && x < 1e6 {
                Ok(x as usize)
            } else {
                Err(Error::InvalidParameter(format!(
                    "{key} must be a positive integer, got {x}"
                )))
            }
        };
        match self.id {
            ModelId::RollingDisk => rolling_disk(p["m"], p["I"], p["J"], p["R"], p["pot_amp"]),
            ModelId::Heisenberg => Ok(heisenberg()),
            ModelId::Oscillator => oscillator_nd(count("n")?, p["omega0"]),
            ModelId::FreeParticle => free_particle(count("n")?),
        }
    }
}
