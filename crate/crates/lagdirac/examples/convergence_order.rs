//! Empirical convergence order from three step sizes.

use lagdirac::diagnostics::self_convergence_order;
use lagdirac::integrator::SolverOptions;
use lagdirac::mechanics::{DiscreteSetup, Scheme};
use lagdirac::models::{oscillator, rolling_disk_default, rolling_disk_seed};
use lagdirac::Vector;

fn main() -> lagdirac::Result<()> {
    let opts = SolverOptions::default();

    // a0 = 0 at q0 = 0, so the velocity seed is second-order consistent
    let osc = DiscreteSetup::new(oscillator(1.0)?, 0.01, Scheme::Plus)?;
    let order = self_convergence_order(&osc, &Vector::zeros(1), &Vector::from_element(1, 1.0), 1.0, &opts)?;
    println!("oscillator from q0 = 0: {order:?}");

    // with a0 != 0 the seed q1 = q0 + h v0 is off by h^2 a0 / 2, which shows up as order 1
    let order = self_convergence_order(&osc, &Vector::from_element(1, 1.0), &Vector::zeros(1), 1.0, &opts)?;
    println!("oscillator from q0 = 1: {order:?}");

    // the disk is accelerating at t = 0 as well, so this also reads as order 1
    let disk = DiscreteSetup::new(rolling_disk_default(), 0.01, Scheme::Minus)?;
    let q0 = rolling_disk_seed().0;
    let v0 = Vector::from_vec(vec![5.0, 8.6603, 10.0, 1.0]);
    println!("rolling disk: {:?}", self_convergence_order(&disk, &q0, &v0, 1.0, &opts)?);
    Ok(())
}
