//! Heisenberg system from the standard seed: straight-line motion with
//! zero multipliers and constant discrete energy.

use lagdirac::integrator::{run, SolverOptions};
use lagdirac::mechanics::{DiscreteSetup, Scheme};
use lagdirac::models::{heisenberg, heisenberg_seed, HEISENBERG_H};

fn main() -> lagdirac::Result<()> {
    let (q0, q1) = heisenberg_seed();
    for scheme in [Scheme::Plus, Scheme::Minus] {
        let setup = DiscreteSetup::new(heisenberg(), HEISENBERG_H, scheme)?;
        let traj = run(&setup, &q0, &q1, 9_999, &SolverOptions::default())?;
        let mu = traj.multipliers.iter().map(|m| m.amax()).fold(0.0, f64::max);
        let e0 = traj.diagnostics[0].energy(scheme);
        let drift = traj
            .diagnostics
            .iter()
            .map(|d| (d.energy(scheme) - e0).abs())
            .fold(0.0, f64::max);
        let last = traj.q.last().unwrap();
        println!(
            "{scheme}: t = {:.1}, q = ({:.4}, {:.4}, {:.4}), max |mu| = {mu:.1e}, E = {e0:.6}, drift = {drift:.1e}",
            traj.time(traj.len() - 1),
            last[0],
            last[1],
            last[2]
        );
    }
    Ok(())
}
