//! Weight-10 and weight-17 stabilizer-like observables evaluated through
//! back-evolution at the Clifford point: <W> = <psi| U^n Z_anchor U^-n |psi>.
//!
//! The weight-17 anchor defaults to qubit 62; back-propagating Z58 instead
//! reproduces the printed 17-site string, shown here for comparison.

use gpeps::circuit::{Observable, ObservableSpec};
use gpeps::lattice::SystemSize;
use gpeps::peps::PepsState;

fn main() -> gpeps::error::Result<()> {
    let size = SystemSize::EAGLE;
    let specs: Vec<ObservableSpec> = ["w10", "w17", "omega@58@n5"].iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    for theta in [0.3, 0.6, 0.9] {
        let mut psi = PepsState::for_size(size, 32)?;
        psi.evolve(theta, 5)?;
        for spec in &specs {
            let (obs, id) = spec.resolve(Some(size), 5, psi.num_sites())?;
            let Observable::CliffordWeightN { anchor, back_steps } = obs else { unreachable!() };
            let v = psi.clifford_weight_measure(back_steps, anchor)?;
            println!("theta {theta:.2}  {id:<14} {v:+.6}");
        }
    }
    Ok(())
}
