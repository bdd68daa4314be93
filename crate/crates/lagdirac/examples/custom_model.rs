//! A user-defined nonholonomic system: a knife edge (Chaplygin sleigh
//! without mass offset) on an inclined plane, given only by its Lagrangian
//! and constraint form. Gradients and Jacobians are differenced.

use lagdirac::integrator::{run, SolverOptions};
use lagdirac::mechanics::{DiscreteSetup, MechModel, Scheme};
use lagdirac::{Matrix, Vector};

fn main() -> lagdirac::Result<()> {
    let (g, alpha) = (9.81, 0.3_f64);
    // q = (x, y, phi); the blade may only move along its heading
    let knife = MechModel::new("knife_edge", 3, move |q: &Vector, v: &Vector| {
        0.5 * (v[0] * v[0] + v[1] * v[1]) + 0.5 * v[2] * v[2] + g * alpha.sin() * q[0]
    })?
    .with_constraints(1, |q: &Vector| Matrix::from_row_slice(1, 3, &[q[2].sin(), -q[2].cos(), 0.0]))?
    .with_names(&["x", "y", "phi"])?;

    let h = 0.01;
    let setup = DiscreteSetup::new(knife, h, Scheme::Minus)?;
    // turning at unit rate, starting at rest along the x axis
    let q0 = Vector::from_vec(vec![0.0, 0.0, 0.0]);
    let q1 = Vector::from_vec(vec![0.0, 0.0, h]);
    let opts = SolverOptions {
        tol: 1e-9,
        ..SolverOptions::default()
    };
    let traj = run(&setup, &q0, &q1, 999, &opts)?;

    let cons = traj.diagnostics.iter().map(|d| d.constraint_norm).fold(0.0, f64::max);
    for k in (0..traj.len()).step_by(200) {
        let q = &traj.q[k];
        println!("t = {:5.2}: x = {:8.4}, y = {:8.4}, phi = {:6.3}", traj.time(k), q[0], q[1], q[2]);
    }
    println!("max constraint residual: {cons:.1e}, Newton iterations: {}", traj.total_iterations());
    Ok(())
}
