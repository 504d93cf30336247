//! Belief-propagation gauging on a loopy ring: the amplitudes change only by
//! a global factor, while the bond weights move to the BP fixed point.

use gpeps::lattice::Fixture;
use gpeps::peps::{BpOptions, PepsState};

fn main() -> gpeps::error::Result<()> {
    let mut psi = PepsState::product_zero(Fixture::Ring12Hex.graph(), 16)?;
    psi.evolve(0.8, 2)?;
    let before = psi.contract_amplitudes()?;
    let lam_before = psi.lambda(0).to_vec();

    let report = psi.bp_gauge(BpOptions::default())?;
    let after = psi.contract_amplitudes()?;

    let (k, _) = before.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap();
    let factor = after[k] / before[k];
    let dev = before.iter().zip(&after).map(|(b, a)| (a - b * factor).norm()).fold(0.0, f64::max);
    let scale = after.iter().map(|a| a.norm()).fold(0.0, f64::max);
    println!("BP converged in {} sweeps, residual {:.1e}", report.iterations, report.residual);
    println!("global factor {factor:.6}, max relative deviation {:.1e}", dev / scale);
    println!("edge 0 weights before {lam_before:.4?}");
    println!("edge 0 weights after  {:.4?}", psi.lambda(0));
    Ok(())
}
