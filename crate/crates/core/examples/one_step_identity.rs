//! After one Trotter step from |0...0>, every site has <Z> = cos(theta)
//! exactly: the ZZ layer is diagonal and cannot change Z expectations.

use gpeps::circuit::Pauli;
use gpeps::lattice::SystemSize;
use gpeps::peps::PepsState;

fn main() -> gpeps::error::Result<()> {
    for theta in [0.0, 0.3, 0.7, 1.0, std::f64::consts::FRAC_PI_2] {
        let mut psi = PepsState::for_size(SystemSize::EAGLE, 4)?;
        psi.evolve(theta, 1)?;
        let worst = (0..psi.num_sites())
            .map(|v| psi.measure_site(v, Pauli::Z).map(|z| (z - theta.cos()).abs()))
            .collect::<gpeps::error::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("theta {theta:.4}  cos {:+.6}  max |<Z_i> - cos| = {worst:.1e}  chi used {}", theta.cos(), psi.max_bond_dimension());
    }
    Ok(())
}
