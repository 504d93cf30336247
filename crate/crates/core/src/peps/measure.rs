//! Mean-field measurement and exact contraction.

use super::PepsState;
use crate::circuit::{Pauli, PauliString};
use crate::error::{invalid, Error, Result};
use crate::oracle::{StateVector, MAX_QUBITS};
use crate::tensor::{contract, Tensor, C64, ZERO};

impl PepsState {
    /// Single-site reduced density matrix with every bond closed by
    /// `diag(λ²)`, unnormalized.
    pub fn site_density(&self, v: usize) -> Result<[[C64; 2]; 2]> {
        self.check_site(v)?;
        let mut w = self.sites[v].clone();
        for (k, &e) in self.legs[v].iter().enumerate() {
            w.scale_axis(k + 1, &self.lambdas[e]);
        }
        let rest = w.len() / 2;
        let (up, down) = w.data().split_at(rest);
        let dot = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| p * q.conj()).sum::<C64>();
        Ok([[dot(up, up), dot(up, down)], [dot(down, up), dot(down, down)]])
    }

    /// `Re Tr(ρ P) / Tr ρ` for the mean-field `ρ` of site `v`.
    pub fn measure_site(&self, v: usize, p: Pauli) -> Result<f64> {
        let rho = self.site_density(v)?;
        let norm = rho[0][0].re + rho[1][1].re;
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numeric(format!("site {v} has non-positive norm {norm}")));
        }
        let op = p.matrix();
        let mut acc = ZERO;
        for s in 0..2 {
            for t in 0..2 {
                acc += rho[s][t] * op[t][s];
            }
        }
        Ok(acc.re / norm)
    }

    /// Mean of `<Z_i>` over all sites (the unit-cell sites for an infinite
    /// state).
    pub fn average_magnetization(&self) -> Result<f64> {
        let mut sum = 0.0;
        for v in 0..self.num_sites() {
            sum += self.measure_site(v, Pauli::Z)?;
        }
        Ok(sum / self.num_sites() as f64)
    }

    /// Exact contraction of the network into `2^m` amplitudes, unnormalized.
    /// Qubit `q` is bit `q` of the index.
    pub fn contract_amplitudes(&self) -> Result<Vec<C64>> {
        if self.infinite {
            return invalid("cannot contract an infinite lattice");
        }
        let m = self.num_sites();
        if m > MAX_QUBITS {
            return Err(Error::Capacity { qubits: m, max: MAX_QUBITS });
        }
        #[derive(Clone, Copy, PartialEq)]
        enum Axis {
            Phys(usize),
            Bond(usize),
        }
        // breadth-first order keeps the open boundary small
        let mut order = vec![0usize];
        let mut seen = vec![false; m];
        seen[0] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &w in self.graph.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
        }

        let mut acc = Tensor::scalar(C64::new(1.0, 0.0));
        let mut axes: Vec<Axis> = Vec::new();
        for &v in &order {
            let mut t = self.sites[v].clone();
            let mut t_axes = vec![Axis::Phys(v)];
            for (k, &e) in self.legs[v].iter().enumerate() {
                // each bond weight is absorbed once, on the lower endpoint
                if self.graph.edges()[e].0 == v {
                    t.scale_axis(k + 1, &self.lambdas[e]);
                }
                t_axes.push(Axis::Bond(e));
            }
            let pairs: Vec<(usize, usize)> = axes
                .iter()
                .enumerate()
                .filter_map(|(i, ax)| t_axes.iter().position(|x| x == ax).map(|j| (i, j)))
                .collect();
            acc = contract(&acc, &t, &pairs)?;
            let keep_a = axes.iter().enumerate().filter(|(i, _)| !pairs.iter().any(|p| p.0 == *i)).map(|(_, a)| *a);
            let keep_t = t_axes.iter().enumerate().filter(|(j, _)| !pairs.iter().any(|p| p.1 == *j)).map(|(_, a)| *a);
            axes = keep_a.chain(keep_t).collect();
        }
        // most significant qubit first in row-major order
        let perm: Vec<usize> = (0..m)
            .rev()
            .map(|q| axes.iter().position(|&a| a == Axis::Phys(q)).expect("physical axis"))
            .collect();
        Ok(acc.permute(&perm)?.into_data())
    }

    /// Normalized exact state vector.
    pub fn to_statevector(&self) -> Result<StateVector> {
        let amps = self.contract_amplitudes()?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Numeric(format!("state norm {norm}")));
        }
        StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
    }

    /// `<P>` by exact contraction; only available for at most 22 sites.
    pub fn expect_pauli_exact(&self, p: &PauliString) -> Result<f64> {
        self.to_statevector()?.expect_pauli(p)
    }
}
