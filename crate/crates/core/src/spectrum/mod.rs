//! Effective Hamiltonian of the reference atom dressed by the medium.

pub mod assemble;
pub mod diagonalize;
pub mod labels;
pub mod oracle;
pub mod scan;
pub mod self_energy;

pub use assemble::{assemble_medium_block, coupling_block, medium_block_bytes, CouplingBlock, FactoredMedium, MediumBlock, DEFAULT_MEMORY_BUDGET};
pub use diagonalize::{cluster_eigenvalues, diagonalize, Cluster, SpectrumPoint, DEFAULT_CLUSTER_TOL, DISORDERED_CLUSTER_TOL};
pub use labels::symmetry_labels;
pub use oracle::{full_matrix_self_energy, run_oracle, OracleCase, OracleReport};
pub use scan::{average_clusters, scan, AveragedCluster, ScanPoint, ScanRequest, ScanResult, SolverOptions};
pub use self_energy::{self_energy, SelfEnergyEvaluator, SelfEnergyMatrix};
