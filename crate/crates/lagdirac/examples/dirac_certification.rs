//! Check a computed trajectory against the discrete Dirac structure: the
//! membership conditions along the motion and isotropy at a sample point.

use lagdirac::dirac::{isotropy_samples, membership_residual, DiracWindow};
use lagdirac::integrator::{run, SolverOptions};
use lagdirac::mechanics::{DiscreteSetup, PhaseState, Scheme};
use lagdirac::models::{rolling_disk_default, rolling_disk_seed, DISK_H};

fn main() -> lagdirac::Result<()> {
    let (q0, q1) = rolling_disk_seed();
    for scheme in [Scheme::Plus, Scheme::Minus] {
        let setup = DiscreteSetup::new(rolling_disk_default(), DISK_H, scheme)?;
        let traj = run(&setup, &q0, &q1, 500, &SolverOptions::default())?;
        let pairs = traj.pairs();
        let mut worst = lagdirac::dirac::MembershipResidual::default();
        // the first window tests the seed pair, which is user input
        for k in 1..pairs.len() - 1 {
            let r = membership_residual(&setup, &DiracWindow::from_slice(&setup, &pairs, k)?)?;
            worst.constraint = worst.constraint.max(r.constraint);
            worst.second_order = worst.second_order.max(r.second_order);
            worst.annihilator = worst.annihilator.max(r.annihilator);
        }
        let base = PhaseState::new(traj.q[10].clone(), traj.momenta[10].clone())?;
        let iso = isotropy_samples(&setup, &base, 100, 1)?;
        println!(
            "{scheme}: constraint {:.1e}, second order {:.1e}, annihilator {:.1e}, isotropy {iso:.1e}",
            worst.constraint, worst.second_order, worst.annihilator
        );
    }
    Ok(())
}
