//! Vertical rolling disk: constraint residual, conserved p_phi and
//! energy behaviour under step refinement.

use lagdirac::diagnostics::momentum_series;
use lagdirac::integrator::{build_q1_from_velocity, run_from_pair, SolverOptions, Trajectory};
use lagdirac::mechanics::{DiscreteSetup, Scheme};
use lagdirac::models::{rolling_disk_default, rolling_disk_seed, DISK_H};

fn simulate(h: f64) -> lagdirac::Result<Trajectory> {
    let (q0, q1) = rolling_disk_seed();
    let setup = DiscreteSetup::new(rolling_disk_default(), h, Scheme::Minus)?;
    let v0 = (&q1 - &q0) / DISK_H;
    let seed = build_q1_from_velocity(&setup, &q0, &v0)?;
    let steps = (5.0 / h).round() as usize;
    run_from_pair(&setup, seed.pair, steps - 1, &SolverOptions::default(), true)
}

fn main() -> lagdirac::Result<()> {
    for h in [DISK_H, DISK_H / 2.0, DISK_H / 4.0] {
        let traj = simulate(h)?;
        let cons = traj.diagnostics[1..].iter().map(|d| d.constraint_norm).fold(0.0, f64::max);
        let p_phi = momentum_series(&traj, 3)?;
        let e: Vec<f64> = traj.diagnostics.iter().map(|d| d.energy_minus / h).collect();
        let (lo, hi) = e.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        let q = traj.q.last().unwrap();
        println!(
            "h = {h}: final (x, y) = ({:.5}, {:.5}), max constraint = {cons:.1e}, p_phi = {:.12}, energy/h spread = {:.3e}",
            q[0],
            q[1],
            p_phi.last().unwrap(),
            hi - lo
        );
    }
    Ok(())
}
