//! Density-of-states simulation for quantum spin glasses on graphs and
//! hypergraphs, with exact moment combinatorics for cross-checking.
//!
//! The random Hamiltonian on a hypergraph `G` with `e(G)` edges is
//!
//! ```text
//! H = e(G)^{-1/2} * sum_e 3^{-|e|/2} * sum_a alpha_(a,e) * sigma_(a,e)
//! ```
//!
//! where `sigma_(a,e)` places the Pauli letter `a_j` on the j-th vertex of `e`.

pub mod config;
pub mod ensemble;
pub mod hypergraph;
pub mod limit_laws;
pub mod moment_oracle;
pub mod numeric;
pub mod partitions;
pub mod pauli;
pub mod sampling;
pub mod spectra;

pub use ensemble::{CouplingDistribution, HamiltonianSample};
pub use hypergraph::Hypergraph;
pub use limit_laws::LimitLaw;
pub use moment_oracle::MomentBreakdown;
pub use partitions::PairPartition;
pub use pauli::PauliString;
pub use spectra::{EmpiricalDos, Spectrum};
