//! Non-Hermitian eigendecomposition of the self-energy and degeneracy
//! clustering.

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use super::self_energy::SelfEnergyMatrix;
use crate::angular::HalfInt;
use crate::error::{Error, Result};

/// Default clustering tolerance (absolute, complex eigenvalue distance).
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-3;
/// Clustering tolerance used for disordered clouds.
pub const DISORDERED_CLUSTER_TOL: f64 = 1e-2;

/// Group of (nearly) degenerate eigenvalues `Delta - i Gamma / 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub delta: f64,
    pub gamma: f64,
    pub multiplicity: usize,
    /// Indices into `SpectrumPoint::eigenvalues`.
    pub members: Vec<usize>,
    /// Largest distance of a member from the cluster mean.
    pub width: f64,
    /// `|M|` along the local symmetry axis, when assigned.
    pub label: Option<HalfInt>,
    pub low_confidence: bool,
}

#[derive(Clone, Debug)]
pub struct SpectrumPoint {
    pub distance: f64,
    pub eigenvalues: Vec<Complex64>,
    /// Right eigenvectors as columns, not orthogonalized.
    pub eigenvectors: Mat<Complex64>,
    pub clusters: Vec<Cluster>,
}

impl SpectrumPoint {
    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.multiplicity).collect()
    }

    /// Largest modulus of the overlap between distinct normalized eigenvectors.
    pub fn max_overlap(&self) -> f64 {
        let n = self.eigenvectors.ncols();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (self.eigenvectors.col(i), self.eigenvectors.col(j));
                let dot: Complex64 = (0..a.nrows()).map(|r| a[r].conj() * b[r]).sum();
                best = best.max(dot.norm() / (a.norm_l2() * b.norm_l2()));
            }
        }
        best
    }
}

/// Eigendecomposition plus greedy clustering; clusters are ordered by
/// decreasing decay rate.
pub fn diagonalize(sigma: &SelfEnergyMatrix, distance: f64, cluster_tol: f64) -> Result<SpectrumPoint> {
    if !(cluster_tol > 0.0) {
        return Err(Error::Config(format!("cluster tolerance must be positive, got {cluster_tol}")));
    }
    let n = sigma.dim();
    let evd = sigma.matrix.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let eigenvalues: Vec<Complex64> = evd.S().column_vector().iter().copied().collect();
    if eigenvalues.len() != n || eigenvalues.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Eigen("non-finite or incomplete eigenvalues".into()));
    }
    let eigenvectors = evd.U().to_owned();
    let clusters = cluster_eigenvalues(&eigenvalues, cluster_tol);
    Ok(SpectrumPoint { distance, eigenvalues, eigenvectors, clusters })
}

/// Single-linkage grouping of eigenvalues closer than `tol`.
pub fn cluster_eigenvalues(eigenvalues: &[Complex64], tol: f64) -> Vec<Cluster> {
    let n = eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[a].im.total_cmp(&eigenvalues[b].im).then(eigenvalues[a].re.total_cmp(&eigenvalues[b].re)));
    let mut assigned = vec![false; n];
    let mut clusters = Vec::new();
    for &seed in &order {
        if assigned[seed] {
            continue;
        }
        assigned[seed] = true;
        let mut members = vec![seed];
        let mut k = 0;
        while k < members.len() {
            let cur = eigenvalues[members[k]];
            for &j in &order {
                if !assigned[j] && (eigenvalues[j] - cur).norm() <= tol {
                    assigned[j] = true;
                    members.push(j);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        let mean: Complex64 = members.iter().map(|&i| eigenvalues[i]).sum::<Complex64>() / members.len() as f64;
        let width = members.iter().map(|&i| (eigenvalues[i] - mean).norm()).fold(0.0, f64::max);
        clusters.push(Cluster {
            delta: mean.re,
            gamma: -2.0 * mean.im,
            multiplicity: members.len(),
            members,
            width,
            label: None,
            low_confidence: false,
        });
    }
    clusters.sort_by(|a, b| b.gamma.total_cmp(&a.gamma).then(a.delta.total_cmp(&b.delta)));
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    #[test]
    fn free_pair_is_one_cluster() {
        let sigma = SelfEnergyMatrix::free(2, Vector3::zeros());
        let point = diagonalize(&sigma, 1.0, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(point.clusters.len(), 1);
        let c = &point.clusters[0];
        assert_eq!(c.multiplicity, 2);
        assert!((c.gamma - 1.0).abs() < 1e-14 && c.delta.abs() < 1e-14);
    }

    #[test]
    fn clusters_sorted_by_rate() {
        let vals = [Complex64::new(0.1, -0.2), Complex64::new(0.0, -0.7), Complex64::new(0.1, -0.2 - 1e-5)];
        let clusters = cluster_eigenvalues(&vals, 1e-3);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].members, vec![1]);
        assert_eq!(clusters[1].multiplicity, 2);
        assert!(clusters[0].gamma > clusters[1].gamma);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let sigma = SelfEnergyMatrix::free(1, Vector3::zeros());
        assert!(diagonalize(&sigma, 1.0, 0.0).is_err());
    }
}
