//! Translation-invariant evolution on the infinite heavy-hex lattice using a
//! ten-site unit cell, compared with the bulk site of the finite devices.

use gpeps::circuit::Pauli;
use gpeps::lattice::{Device, SystemSize};
use gpeps::peps::{evolve_infinite, PepsState};

fn main() -> gpeps::error::Result<()> {
    let theta = 0.7;
    let cell = PepsState::for_size(SystemSize::Infinite, 32)?;
    let cell = evolve_infinite(cell, theta, 5, 32)?;
    let per_site: Vec<f64> = (0..cell.num_sites()).map(|v| cell.measure_site(v, Pauli::Z)).collect::<Result<_, _>>()?;
    println!("unit cell <Z>: {per_site:.6?}");
    println!("infinite average {:.6}", cell.average_magnetization()?);

    for (device, bulk) in [(Device::Eagle127, 62), (Device::Osprey433, 181), (Device::Condor1121, 505)] {
        let mut psi = PepsState::for_size(SystemSize::Device(device), 32)?;
        psi.evolve(theta, 5)?;
        println!(
            "{:<11} average {:.6}  bulk site {bulk} {:.6}",
            SystemSize::Device(device).to_string(),
            psi.average_magnetization()?,
            psi.measure_site(bulk, Pauli::Z)?
        );
    }
    println!("cell site 2 {:.6}", per_site[2]);
    Ok(())
}
