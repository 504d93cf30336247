//! Graph PEPS in Vidal form: one tensor `Γ_v` per vertex, one diagonal bond
//! weight vector `λ_e` per edge.
//!
//! Site tensors are stored as `[phys, leg_0, leg_1, ...]` where leg `k`
//! points at `graph.neighbors(v)[k]`. Bond weights are kept outside the
//! tensors, sorted descending with maximum exactly 1.

mod bp;
mod checkpoint;
mod measure;
mod update;

pub use bp::{BpMessages, BpOptions, BpReport};
pub use checkpoint::Checkpoint;

use crate::circuit::{build_schedule, Direction, GateRef, Matrix2};
use crate::error::{invalid, Result};
use crate::lattice::{build_unit_cell, Graph, SystemSize, UnitCellGraph};
use crate::tensor::{Tensor, DEFAULT_FLOOR, ONE};
use std::f64::consts::FRAC_PI_2;

#[derive(Clone, Debug, PartialEq)]
pub struct PepsState {
    graph: Graph,
    /// The graph is the quotient of a translation-invariant lattice.
    infinite: bool,
    sites: Vec<Tensor>,
    lambdas: Vec<Vec<f64>>,
    /// `legs[v][k]` is the edge id of leg `k` of site `v`.
    legs: Vec<Vec<usize>>,
    chi_max: usize,
    lambda_floor: f64,
    history: Vec<(f64, Direction)>,
}

impl PepsState {
    /// `|0...0>` with every bond dimension 1.
    pub fn product_zero(graph: Graph, chi_max: usize) -> Result<Self> {
        if chi_max == 0 {
            return invalid("chi must be at least 1");
        }
        let legs: Vec<Vec<usize>> = (0..graph.num_vertices())
            .map(|v| graph.neighbors(v).iter().map(|&w| graph.edge_index(v, w).expect("neighbor edge")).collect())
            .collect();
        let sites = legs
            .iter()
            .map(|l| {
                let mut shape = vec![2];
                shape.extend(std::iter::repeat_n(1, l.len()));
                let mut t = Tensor::zeros(&shape);
                t.data_mut()[0] = ONE;
                t
            })
            .collect();
        Ok(Self {
            lambdas: vec![vec![1.0]; graph.num_edges()],
            graph,
            infinite: false,
            sites,
            legs,
            chi_max,
            lambda_floor: DEFAULT_FLOOR,
            history: Vec::new(),
        })
    }

    /// Translation-invariant state on the infinite lattice, one tensor per
    /// unit-cell site. Inter-cell bonds become bonds of the folded graph, so
    /// every cell shares the same tensors and weights.
    pub fn unit_cell_zero(cell: &UnitCellGraph, chi_max: usize) -> Result<Self> {
        let mut s = Self::product_zero(cell.quotient_graph(), chi_max)?;
        s.infinite = true;
        Ok(s)
    }

    /// `|0...0>` on the lattice of `size`; the unit cell for `Infinite`.
    pub fn for_size(size: SystemSize, chi_max: usize) -> Result<Self> {
        match size {
            SystemSize::Infinite => Self::unit_cell_zero(&build_unit_cell(), chi_max),
            _ => Self::product_zero(size.graph(), chi_max),
        }
    }

    pub fn with_lambda_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor > 0.0 && floor < 1.0) {
            return invalid(format!("lambda floor must lie in (0, 1), got {floor}"));
        }
        self.lambda_floor = floor;
        Ok(self)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn is_infinite(&self) -> bool {
        self.infinite
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn site(&self, v: usize) -> &Tensor {
        &self.sites[v]
    }

    pub fn lambda(&self, edge: usize) -> &[f64] {
        &self.lambdas[edge]
    }

    pub fn lambdas(&self) -> &[Vec<f64>] {
        &self.lambdas
    }

    pub fn chi_max(&self) -> usize {
        self.chi_max
    }

    pub fn set_chi_max(&mut self, chi: usize) -> Result<()> {
        if chi == 0 {
            return invalid("chi must be at least 1");
        }
        self.chi_max = chi;
        Ok(())
    }

    pub fn lambda_floor(&self) -> f64 {
        self.lambda_floor
    }

    /// Angles and directions of every Trotter step applied so far.
    pub fn history(&self) -> &[(f64, Direction)] {
        &self.history
    }

    pub fn bond_dimension(&self, edge: usize) -> usize {
        self.lambdas[edge].len()
    }

    pub fn max_bond_dimension(&self) -> usize {
        self.lambdas.iter().map(Vec::len).max().unwrap_or(1)
    }

    /// Position of the leg of `v` that points at `w`.
    pub(crate) fn leg_of(&self, v: usize, w: usize) -> Option<usize> {
        self.graph.neighbors(v).binary_search(&w).ok()
    }

    pub(crate) fn check_site(&self, v: usize) -> Result<()> {
        if v >= self.num_sites() {
            return invalid(format!("site {v} out of range for {} sites", self.num_sites()));
        }
        Ok(())
    }

    /// Contracts `g` into the physical index of site `v`.
    pub fn apply_single_site(&mut self, v: usize, g: &Matrix2) -> Result<()> {
        self.check_site(v)?;
        let gate = Tensor::new(vec![2, 2], g.iter().flatten().copied().collect())?;
        let t = &self.sites[v];
        let shape = t.shape().to_vec();
        let rest = t.len() / 2;
        let data = crate::tensor::gemm(gate.data(), t.data(), 2, 2, rest);
        self.sites[v] = Tensor::new(shape, data)?;
        Ok(())
    }

    /// One Trotter step; returns the largest truncation error of its gates.
    pub fn trotter_step(&mut self, theta_h: f64, direction: Direction) -> Result<f64> {
        let schedule = build_schedule(&self.graph, theta_h, direction);
        let mut worst = 0.0f64;
        for gate in schedule.gates() {
            match gate {
                GateRef::Single(v, g) => self.apply_single_site(v, g)?,
                GateRef::Pair((a, b), g) => worst = worst.max(self.apply_two_site(a, b, g)?),
            }
        }
        self.history.push((theta_h, direction));
        Ok(worst)
    }

    /// `n` forward steps; returns the largest truncation error seen.
    pub fn evolve(&mut self, theta_h: f64, n: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for _ in 0..n {
            worst = worst.max(self.trotter_step(theta_h, Direction::Forward)?);
        }
        Ok(worst)
    }

    /// `<U^n(π/2) Z_anchor U†^n(π/2)>`: back-evolves a copy of the state
    /// `n_back` adjoint steps at the Clifford point and measures `Z` there.
    pub fn clifford_weight_measure(&self, n_back: usize, anchor: usize) -> Result<f64> {
        self.check_site(anchor)?;
        let mut copy = self.clone();
        for _ in 0..n_back {
            copy.trotter_step(FRAC_PI_2, Direction::Adjoint)?;
        }
        copy.measure_site(anchor, crate::circuit::Pauli::Z)
    }
}

/// Runs `n` forward steps of a unit-cell state at bond dimension `chi`.
pub fn evolve_infinite(mut cell_state: PepsState, theta_h: f64, n: usize, chi: usize) -> Result<PepsState> {
    if !cell_state.is_infinite() {
        return invalid("evolve_infinite needs a unit-cell state");
    }
    cell_state.set_chi_max(chi)?;
    cell_state.evolve(theta_h, n)?;
    Ok(cell_state)
}
