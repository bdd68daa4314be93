//! Unconstrained oscillator: the integrator reproduces the Stormer-Verlet
//! recurrence and its one-step map is symplectic.

use lagdirac::diagnostics::{discrete_hamiltonian_map, symplectic_residual};
use lagdirac::integrator::{run, SolverOptions};
use lagdirac::mechanics::{DiscreteSetup, PhaseState, Scheme};
use lagdirac::models::oscillator;
use lagdirac::Vector;

fn main() -> lagdirac::Result<()> {
    let h = 0.1;
    let setup = DiscreteSetup::new(oscillator(1.0)?, h, Scheme::Plus)?;
    let q0 = Vector::from_element(1, 1.0);
    let q1 = Vector::from_element(1, h.cos());
    let traj = run(&setup, &q0, &q1, 999, &SolverOptions::default())?;

    let mut err = 0.0_f64;
    for k in 2..traj.len() {
        let expected = (2.0 - h * h) * traj.q[k - 1][0] - traj.q[k - 2][0];
        err = err.max((traj.q[k][0] - expected).abs());
    }
    println!("recurrence deviation over {} steps: {err:.1e}", traj.len() - 1);

    let mut z = PhaseState::new(Vector::from_element(1, 0.7), Vector::from_element(1, -0.3))?;
    for k in 0..3 {
        let res = symplectic_residual(&setup, &z, 1e-5)?;
        println!("point {k}: q = {:.4}, p = {:.4}, |D^T J D - J| = {res:.1e}", z.q[0], z.p[0]);
        z = discrete_hamiltonian_map(&setup, &z)?;
    }
    Ok(())
}
