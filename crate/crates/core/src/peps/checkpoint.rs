//! JSON checkpoints. Floats are written in shortest round-trip form, so a
//! save/load cycle reproduces the state bit for bit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::PepsState;
use crate::circuit::Direction;
use crate::error::{invalid, Result};
use crate::lattice::Graph;
use crate::tensor::Tensor;

const FORMAT: &str = "gpeps-checkpoint/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub graph_hash: String,
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub infinite: bool,
    pub chi_max: usize,
    pub lambda_floor: f64,
    pub steps: usize,
    pub history: Vec<(f64, Direction)>,
    pub sites: Vec<Tensor>,
    pub lambdas: Vec<Vec<f64>>,
}

impl PepsState {
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: FORMAT.to_string(),
            graph_hash: self.graph.content_hash(),
            num_vertices: self.graph.num_vertices(),
            edges: self.graph.edges().to_vec(),
            infinite: self.infinite,
            chi_max: self.chi_max,
            lambda_floor: self.lambda_floor,
            steps: self.history.len(),
            history: self.history.clone(),
            sites: self.sites.clone(),
            lambdas: self.lambdas.clone(),
        }
    }

    pub fn from_checkpoint(c: Checkpoint) -> Result<Self> {
        if c.format != FORMAT {
            return invalid(format!("unknown checkpoint format {:?}", c.format));
        }
        let graph = Graph::new(c.num_vertices, c.edges)?;
        if graph.content_hash() != c.graph_hash {
            return invalid("checkpoint graph hash does not match its edge list");
        }
        if c.steps != c.history.len() {
            return invalid("checkpoint step count disagrees with its history");
        }
        let mut state = PepsState::product_zero(graph, c.chi_max)?.with_lambda_floor(c.lambda_floor)?;
        if c.sites.len() != state.sites.len() || c.lambdas.len() != state.lambdas.len() {
            return invalid("checkpoint tensor count does not match the graph");
        }
        for (v, t) in c.sites.iter().enumerate() {
            let deg = state.legs[v].len();
            let ok = t.rank() == deg + 1
                && t.shape()[0] == 2
                && state.legs[v].iter().enumerate().all(|(k, &e)| t.shape()[k + 1] == c.lambdas[e].len());
            if !ok {
                return invalid(format!("checkpoint tensor for site {v} has shape {:?}", t.shape()));
            }
        }
        state.infinite = c.infinite;
        state.history = c.history;
        state.sites = c.sites;
        state.lambdas = c.lambdas;
        Ok(state)
    }

    pub fn save<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, &self.checkpoint())?;
        Ok(())
    }

    pub fn load<R: Read>(r: R) -> Result<Self> {
        Self::from_checkpoint(serde_json::from_reader(r)?)
    }
}
