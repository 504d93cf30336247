//! Twenty steps at theta = 1.0 on the infinite lattice, tracking how the
//! bulk <Z> converges with bond dimension at every step.
//!
//! Pass a list of bond dimensions as arguments (default 8 16 32); the
//! largest ones take minutes.

use gpeps::circuit::{Direction, Pauli};
use gpeps::lattice::SystemSize;
use gpeps::peps::PepsState;

fn main() -> gpeps::error::Result<()> {
    let chis: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let chis = if chis.is_empty() { vec![8, 16, 32] } else { chis };
    let steps = 20;
    let mut table = Vec::new();
    for &chi in &chis {
        let mut psi = PepsState::for_size(SystemSize::Infinite, chi)?;
        let mut col = Vec::with_capacity(steps);
        for _ in 0..steps {
            let trunc = psi.trotter_step(1.0, Direction::Forward)?;
            col.push((psi.measure_site(2, Pauli::Z)?, trunc));
        }
        table.push(col);
    }
    print!("{:>3}", "n");
    for chi in &chis {
        print!(" {:>12} {:>8}", format!("chi={chi}"), "trunc");
    }
    println!();
    for n in 0..steps {
        print!("{:>3}", n + 1);
        for col in &table {
            print!(" {:>12.8} {:>8.1e}", col[n].0, col[n].1);
        }
        println!();
    }
    Ok(())
}
