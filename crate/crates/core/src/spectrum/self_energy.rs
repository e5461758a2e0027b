//! Self-energy matrix of the reference atom's excited manifold.

use faer::Mat;
use nalgebra::Vector3;
use num_complex::Complex64;

use super::assemble::{assemble_medium_block, coupling_block, FactoredMedium};
use crate::angular::{dipole_matrix, TransitionScheme};
use crate::error::{Error, Result};
use crate::medium::DipoleCloud;

/// `Sigma` on the excited manifold (rates in units of the free-space
/// linewidth), basis `|F, M>` with `M = -F..F` quantized along z.
#[derive(Clone, Debug)]
pub struct SelfEnergyMatrix {
    pub matrix: Mat<Complex64>,
    pub atom_position: Vector3<f64>,
    pub n_scatterers: usize,
    pub realization_index: u64,
}

impl SelfEnergyMatrix {
    pub fn free(n_excited: usize, atom_position: Vector3<f64>) -> Self {
        let mut matrix = Mat::<Complex64>::zeros(n_excited, n_excited);
        for i in 0..n_excited {
            matrix[(i, i)] = Complex64::new(0.0, -0.5);
        }
        SelfEnergyMatrix { matrix, atom_position, n_scatterers: 0, realization_index: 0 }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest growth rate allowed by the anti-Hermitian part, `-2` times the
    /// smallest eigenvalue of `i (Sigma - Sigma^dagger) / 2`. Nonpositive
    /// when every mode decays; `-1` for the free atom.
    pub fn max_gain(&self) -> Result<f64> {
        let n = self.dim();
        let herm = Mat::<Complex64>::from_fn(n, n, |i, j| {
            Complex64::new(0.0, 0.5) * (self.matrix[(i, j)] - self.matrix[(j, i)].conj())
        });
        let vals = herm
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        Ok(-2.0 * vals.into_iter().fold(f64::INFINITY, f64::min))
    }
}

/// Reusable evaluator for one cloud: the medium block is factored once and
/// each atom position costs one solve with three right-hand sides.
pub struct SelfEnergyEvaluator<'a> {
    cloud: &'a DipoleCloud,
    medium: FactoredMedium,
    dipoles: [Mat<Complex64>; 3],
    /// Negates one side of the coupling; negative control for the oracle.
    corrupt_coupling_sign: bool,
}

impl<'a> SelfEnergyEvaluator<'a> {
    pub fn new(scheme: &TransitionScheme, cloud: &'a DipoleCloud, include_medium_linewidth: bool, memory_budget: u64) -> Result<Self> {
        let table = dipole_matrix(scheme)?;
        let block = assemble_medium_block(cloud, include_medium_linewidth, memory_budget)?;
        let medium = FactoredMedium::new(&block)?;
        Ok(SelfEnergyEvaluator { cloud, medium, dipoles: table.cartesian(), corrupt_coupling_sign: false })
    }

    pub fn with_corrupted_coupling(mut self, corrupt: bool) -> Self {
        self.corrupt_coupling_sign = corrupt;
        self
    }

    pub fn pivot_ratio(&self) -> f64 {
        self.medium.pivot_ratio
    }

    /// `T = K^T A0^{-1} K`, the medium-mediated 3x3 propagator at the atom.
    pub fn medium_response(&self, atom: &Vector3<f64>) -> Result<[[Complex64; 3]; 3]> {
        let mut t = [[Complex64::new(0.0, 0.0); 3]; 3];
        if self.cloud.is_empty() {
            return Ok(t);
        }
        let k = coupling_block(self.cloud, atom)?.matrix;
        let mut x = k.clone();
        self.medium.solve_in_place(&mut x);
        let sign = if self.corrupt_coupling_sign { -1.0 } else { 1.0 };
        for mu in 0..3 {
            for nu in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..k.nrows() {
                    acc += k[(r, mu)] * x[(r, nu)];
                }
                t[mu][nu] = sign * acc;
            }
        }
        Ok(t)
    }

    pub fn self_energy(&self, atom: &Vector3<f64>) -> Result<SelfEnergyMatrix> {
        let t = self.medium_response(atom)?;
        let ne = self.dipoles[0].nrows();
        let mut out = SelfEnergyMatrix::free(ne, *atom);
        out.n_scatterers = self.cloud.len();
        out.realization_index = self.cloud.realization_index;
        if self.cloud.is_empty() {
            return Ok(out);
        }
        for mu in 0..3 {
            for nu in 0..3 {
                if t[mu][nu] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                // t_{mu nu} D_mu D_nu^dagger
                let prod = &self.dipoles[mu] * self.dipoles[nu].adjoint();
                for i in 0..ne {
                    for j in 0..ne {
                        out.matrix[(i, j)] += t[mu][nu] * prod[(i, j)];
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One-shot self-energy for a single atom position.
pub fn self_energy(scheme: &TransitionScheme, cloud: &DipoleCloud, atom: &Vector3<f64>) -> Result<SelfEnergyMatrix> {
    SelfEnergyEvaluator::new(scheme, cloud, false, super::assemble::DEFAULT_MEMORY_BUDGET)?.self_energy(atom)
}
