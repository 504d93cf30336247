//! At five steps the bulk sites of every device see an identical light cone,
//! so they agree exactly with the unit cell of the infinite lattice.

use gpeps::circuit::Pauli;
use gpeps::lattice::{Device, SystemSize};
use gpeps::peps::PepsState;

fn bulk_z(size: SystemSize, site: usize, theta: f64) -> f64 {
    let mut s = PepsState::for_size(size, 32).unwrap();
    s.evolve(theta, 5).unwrap();
    s.measure_site(site, Pauli::Z).unwrap()
}

#[test]
fn bulk_anchors_agree_across_sizes() {
    for theta in [0.4, 0.69] {
        let cell = bulk_z(SystemSize::Infinite, 2, theta);
        for (d, site) in [(Device::Eagle127, 62), (Device::Osprey433, 181), (Device::Condor1121, 505)] {
            let v = bulk_z(SystemSize::Device(d), site, theta);
            assert!((v - cell).abs() <= 1e-10, "{d:?} site {site} at {theta}: {v} vs {cell}");
        }
    }
}
