//! Medium block `A0 = E - H_medium` at `E = omega_0` and the atom-medium
//! coupling block.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::greens::green_matrix;
use crate::medium::DipoleCloud;

/// Default memory budget for the medium block (bytes).
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

/// Pivot ratio below which the medium block is treated as singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

/// Bytes needed to store the dense medium block for `n` scatterers.
pub fn medium_block_bytes(n: usize) -> u64 {
    let dim = 3 * n as u64;
    16 * dim * dim
}

/// Dense `3N x 3N` medium block, rows and columns indexed by `(a, e)` as
/// `3 a + e`.
#[derive(Clone, Debug)]
pub struct MediumBlock {
    pub matrix: Mat<Complex64>,
    pub n_scatterers: usize,
}

/// Builds `A0`: diagonal `-delta_M` (plus `i Gamma_e / 2` when the
/// scatterer linewidth is included), off-diagonal `-f0^2 D(r_a - r_b)`.
pub fn assemble_medium_block(cloud: &DipoleCloud, include_medium_linewidth: bool, memory_budget: u64) -> Result<MediumBlock> {
    let n = cloud.len();
    let needed = medium_block_bytes(n);
    if needed > memory_budget {
        return Err(Error::MemoryBudget { needed, budget: memory_budget });
    }
    let model = &cloud.model;
    let mut diag = Complex64::new(-model.delta_m, 0.0);
    if include_medium_linewidth {
        diag += Complex64::new(0.0, model.gamma_e / 2.0);
    }
    let dim = 3 * n;
    let mut matrix = Mat::<Complex64>::zeros(dim, dim);
    for a in 0..n {
        for e in 0..3 {
            matrix[(3 * a + e, 3 * a + e)] = diag;
        }
        for b in a + 1..n {
            let sep = cloud.positions[a] - cloud.positions[b];
            if sep.norm() == 0.0 {
                return Err(Error::CoincidentPoints);
            }
            let d = green_matrix(&sep, 1.0);
            for e in 0..3 {
                for f in 0..3 {
                    let v = -model.f0_sq * d[(e, f)];
                    matrix[(3 * a + e, 3 * b + f)] = v;
                    matrix[(3 * b + f, 3 * a + e)] = v;
                }
            }
        }
    }
    Ok(MediumBlock { matrix, n_scatterers: n })
}

/// LU factorization of the medium block, reused for every atom position.
pub struct FactoredMedium {
    lu: Option<PartialPivLu<Complex64>>,
    pub dim: usize,
    /// Ratio of the smallest to the largest pivot modulus.
    pub pivot_ratio: f64,
}

impl FactoredMedium {
    pub fn new(block: &MediumBlock) -> Result<Self> {
        let dim = block.matrix.nrows();
        if dim == 0 {
            return Ok(FactoredMedium { lu: None, dim, pivot_ratio: 1.0 });
        }
        let lu = block.matrix.partial_piv_lu();
        let u = lu.U();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..dim {
            let p = u[(i, i)].norm();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let pivot_ratio = if hi > 0.0 { lo / hi } else { 0.0 };
        if !(pivot_ratio > SINGULAR_PIVOT_RATIO) {
            return Err(Error::SingularMedium { condition: 1.0 / pivot_ratio });
        }
        Ok(FactoredMedium { lu: Some(lu), dim, pivot_ratio })
    }

    /// Overwrites `rhs` with `A0^{-1} rhs`.
    pub fn solve_in_place(&self, rhs: &mut Mat<Complex64>) {
        if let Some(lu) = &self.lu {
            lu.solve_in_place(rhs.as_mut());
        }
    }
}

/// Coupling block `K[(a, e), nu] = f0 D_{e nu}(r_atom - r_a)`, `3N x 3`.
#[derive(Clone, Debug)]
pub struct CouplingBlock {
    pub matrix: Mat<Complex64>,
}

pub fn coupling_block(cloud: &DipoleCloud, atom: &Vector3<f64>) -> Result<CouplingBlock> {
    let f0 = cloud.model.f0_sq.sqrt();
    let n = cloud.len();
    let mut matrix = Mat::<Complex64>::zeros(3 * n, 3);
    for (a, r) in cloud.positions.iter().enumerate() {
        let sep = atom - r;
        if sep.norm() == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        let d = green_matrix(&sep, 1.0);
        for e in 0..3 {
            for nu in 0..3 {
                matrix[(3 * a + e, nu)] = f0 * d[(e, nu)];
            }
        }
    }
    Ok(CouplingBlock { matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::MediumModel;

    fn model() -> MediumModel {
        MediumModel::with_detuning(10.0, 1.0, 117.0).unwrap()
    }

    #[test]
    fn single_scatterer_block_is_diagonal() {
        let cloud = DipoleCloud::from_positions(vec![Vector3::new(0.1, 0.2, 0.3)], model());
        let block = assemble_medium_block(&cloud, false, DEFAULT_MEMORY_BUDGET).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { Complex64::new(-117.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                assert_eq!(block.matrix[(i, j)], expected);
            }
        }
    }

    #[test]
    fn pair_blocks_are_transposes() {
        let cloud = DipoleCloud::from_positions(vec![Vector3::zeros(), Vector3::new(0.3, -0.4, 0.5)], model());
        let block = assemble_medium_block(&cloud, false, DEFAULT_MEMORY_BUDGET).unwrap();
        let d = green_matrix(&Vector3::new(-0.3, 0.4, -0.5), 1.0);
        for e in 0..3 {
            for f in 0..3 {
                assert_eq!(block.matrix[(e, 3 + f)], block.matrix[(3 + f, e)]);
                assert!((block.matrix[(e, 3 + f)] + model().f0_sq * d[(e, f)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn budget_is_checked_before_allocation() {
        let cloud = DipoleCloud::from_positions(vec![Vector3::zeros(), Vector3::new(1.0, 0.0, 0.0)], model());
        assert_eq!(medium_block_bytes(2), 16 * 36);
        let err = assemble_medium_block(&cloud, false, 100).unwrap_err();
        assert!(matches!(err, Error::MemoryBudget { needed: 576, budget: 100 }));
    }

    #[test]
    fn linewidth_flag_adds_decay() {
        let cloud = DipoleCloud::from_positions(vec![Vector3::zeros()], model());
        let block = assemble_medium_block(&cloud, true, DEFAULT_MEMORY_BUDGET).unwrap();
        assert_eq!(block.matrix[(0, 0)], Complex64::new(-117.0, 0.5));
    }
}
