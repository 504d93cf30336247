//! Brute-force statevector simulation, used as ground truth on small graphs.
//!
//! Qubit `q` is bit `q` of the amplitude index.

use crate::circuit::{build_schedule, Direction, GateRef, Matrix2, Matrix4, Pauli, PauliString, TrotterSchedule};
use crate::error::{invalid, Error, Result};
use crate::lattice::Graph;
use crate::tensor::{C64, ONE, ZERO};
use std::f64::consts::FRAC_PI_2;

pub const MAX_QUBITS: usize = 22;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0...0>` on `m` qubits.
    pub fn zero(m: usize) -> Result<Self> {
        if m > MAX_QUBITS {
            return Err(Error::Capacity { qubits: m, max: MAX_QUBITS });
        }
        let mut amps = vec![ZERO; 1 << m];
        amps[0] = ONE;
        Ok(Self { num_qubits: m, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return invalid(format!("{} amplitudes is not a power of two", amps.len()));
        }
        let m = amps.len().trailing_zeros() as usize;
        if m > MAX_QUBITS {
            return Err(Error::Capacity { qubits: m, max: MAX_QUBITS });
        }
        Ok(Self { num_qubits: m, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply_single(&mut self, q: usize, g: &Matrix2) {
        let m = 1usize << q;
        for i in 0..self.amps.len() {
            if i & m != 0 {
                continue;
            }
            let (a0, a1) = (self.amps[i], self.amps[i | m]);
            self.amps[i] = g[0][0] * a0 + g[0][1] * a1;
            self.amps[i | m] = g[1][0] * a0 + g[1][1] * a1;
        }
    }

    /// Applies `g` to qubits `(a, b)`; `a` is the more significant bit of
    /// the gate basis.
    pub fn apply_pair(&mut self, a: usize, b: usize, g: &Matrix4) {
        let (ma, mb) = (1usize << a, 1usize << b);
        let diagonal = (0..4).all(|r| (0..4).all(|c| r == c || g[r][c] == ZERO));
        if diagonal {
            for (i, amp) in self.amps.iter_mut().enumerate() {
                let k = 2 * usize::from(i & ma != 0) + usize::from(i & mb != 0);
                *amp *= g[k][k];
            }
            return;
        }
        for i in 0..self.amps.len() {
            if i & (ma | mb) != 0 {
                continue;
            }
            let idx = [i, i | mb, i | ma, i | ma | mb];
            let old = idx.map(|j| self.amps[j]);
            for (r, &j) in idx.iter().enumerate() {
                self.amps[j] = (0..4).map(|c| g[r][c] * old[c]).sum();
            }
        }
    }

    pub fn apply_schedule(&mut self, s: &TrotterSchedule) {
        for gate in s.gates() {
            match gate {
                GateRef::Single(q, g) => self.apply_single(q, g),
                GateRef::Pair((a, b), g) => self.apply_pair(a, b, g),
            }
        }
    }

    /// `n` Trotter steps of the graph's circuit.
    pub fn evolve(&mut self, g: &Graph, theta_h: f64, n: usize, direction: Direction) -> Result<()> {
        if g.num_vertices() != self.num_qubits {
            return invalid(format!("graph has {} sites, state has {}", g.num_vertices(), self.num_qubits));
        }
        let s = build_schedule(g, theta_h, direction);
        for _ in 0..n {
            self.apply_schedule(&s);
        }
        Ok(())
    }

    pub fn expect_z(&self, q: usize) -> f64 {
        let m = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & m == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    /// `<ψ|P|ψ>`.
    pub fn expect_pauli(&self, p: &PauliString) -> Result<f64> {
        if p.max_site() >= self.num_qubits {
            return invalid(format!("Pauli string {p} exceeds {} qubits", self.num_qubits));
        }
        let (mut flip, mut zmask, mut ys) = (0usize, 0usize, 0u32);
        for (q, op) in p.iter() {
            match op {
                Pauli::X => flip |= 1 << q,
                Pauli::Y => {
                    flip |= 1 << q;
                    zmask |= 1 << q;
                    ys += 1;
                }
                Pauli::Z => zmask |= 1 << q,
            }
        }
        // P|i> = i^ys (-1)^{popcount(i & zmask)} |i ^ flip>
        let mut acc = ZERO;
        for (i, a) in self.amps.iter().enumerate() {
            let term = self.amps[i ^ flip].conj() * a;
            if (i & zmask).count_ones() % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let phase = [ONE, C64::new(0.0, 1.0), -ONE, C64::new(0.0, -1.0)][(ys % 4) as usize];
        Ok((phase * acc).re)
    }
}

/// `U(θ)^n |0...0>` (or the adjoint evolution).
pub fn evolve_exact(g: &Graph, theta_h: f64, n: usize, direction: Direction) -> Result<StateVector> {
    let mut sv = StateVector::zero(g.num_vertices())?;
    sv.evolve(g, theta_h, n, direction)?;
    Ok(sv)
}

/// `<ψ(θ,n)| U^n(π/2) Z_anchor U†^n(π/2) |ψ(θ,n)>`.
pub fn expect_omega_protocol(g: &Graph, theta_h: f64, n: usize, anchor: usize) -> Result<f64> {
    if anchor >= g.num_vertices() {
        return invalid(format!("anchor {anchor} out of range"));
    }
    let mut sv = evolve_exact(g, theta_h, n, Direction::Forward)?;
    sv.evolve(g, FRAC_PI_2, n, Direction::Adjoint)?;
    Ok(sv.expect_z(anchor))
}
