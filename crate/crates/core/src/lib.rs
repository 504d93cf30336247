pub mod error;
pub mod analysis;
pub mod circuit;
pub mod cli;
pub mod lattice;
pub mod oracle;
pub mod peps;
pub mod plot;
pub mod tensor;
