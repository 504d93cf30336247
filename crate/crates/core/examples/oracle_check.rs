//! Exact statevector values against gPEPS on the small fixtures: trees are
//! exact at any depth, the 12-ring until the light cone wraps the loop.

use gpeps::circuit::{Direction, Pauli};
use gpeps::lattice::Fixture;
use gpeps::oracle::evolve_exact;
use gpeps::peps::PepsState;

fn main() -> gpeps::error::Result<()> {
    let theta = 0.9;
    for fixture in Fixture::ALL {
        let g = fixture.graph();
        for n in 1..=4 {
            let exact = evolve_exact(&g, theta, n, Direction::Forward)?;
            let mut psi = PepsState::product_zero(g.clone(), 16)?;
            psi.evolve(theta, n)?;
            let mut worst = 0.0f64;
            for v in 0..g.num_vertices() {
                worst = worst.max((psi.measure_site(v, Pauli::Z)? - exact.expect_z(v)).abs());
            }
            println!("{:<10} n={n}  max |gPEPS - exact| = {worst:.2e}", fixture.name());
        }
    }
    Ok(())
}
