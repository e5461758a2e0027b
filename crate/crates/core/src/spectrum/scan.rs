//! Distance sweeps with configuration averaging.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assemble::DEFAULT_MEMORY_BUDGET;
use super::diagonalize::{diagonalize, Cluster, SpectrumPoint, DEFAULT_CLUSTER_TOL, DISORDERED_CLUSTER_TOL};
use super::labels::symmetry_labels;
use super::self_energy::SelfEnergyEvaluator;
use crate::angular::{HalfInt, TransitionScheme};
use crate::error::{Error, Result};
use crate::medium::{generate_cloud, AtomPlacement, Geometry, MediumModel, Placement};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Absolute clustering tolerance; defaults depend on the placement mode.
    pub cluster_tol: Option<f64>,
    pub include_medium_linewidth: bool,
    pub memory_budget: u64,
    /// Minimum gap between the atom and the dielectric surface.
    pub min_clearance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { cluster_tol: None, include_medium_linewidth: false, memory_budget: DEFAULT_MEMORY_BUDGET, min_clearance: 1e-6 }
    }
}

impl SolverOptions {
    pub fn resolved_cluster_tol(&self, placement: &Placement) -> f64 {
        self.cluster_tol.unwrap_or(if placement.is_disordered() { DISORDERED_CLUSTER_TOL } else { DEFAULT_CLUSTER_TOL })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRequest {
    pub scheme: TransitionScheme,
    pub geometry: Geometry,
    pub model: MediumModel,
    pub placement: Placement,
    pub realizations: usize,
    pub atom_placement: AtomPlacement,
    /// Distances in reduced wavelengths, ascending.
    pub distances: Vec<f64>,
    pub solver: SolverOptions,
}

/// Cluster averaged over realizations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AveragedCluster {
    pub label: Option<HalfInt>,
    pub multiplicity: usize,
    pub gamma: f64,
    pub delta: f64,
    pub stderr_gamma: f64,
    pub stderr_delta: f64,
    pub n_realizations: usize,
    pub low_confidence: bool,
    /// Largest cluster width seen in any realization.
    pub width: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanPoint {
    pub distance: f64,
    pub clusters: Vec<AveragedCluster>,
    /// Label matching across realizations failed; clusters were matched by
    /// decay-rate rank instead.
    pub label_fallback: bool,
    /// Per-realization clusters before averaging.
    pub raw: Vec<Vec<Cluster>>,
    /// Failures at this distance (one entry per failed realization).
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RealizationInfo {
    pub index: u64,
    pub n_scatterers: usize,
    pub pivot_ratio: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    pub realizations: Vec<RealizationInfo>,
}

impl ScanResult {
    pub fn failures(&self) -> usize {
        self.points.iter().map(|p| p.errors.len()).sum()
    }
}

impl ScanRequest {
    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        self.geometry.validate()?;
        if self.realizations == 0 {
            return Err(Error::Config("at least one realization is required".into()));
        }
        if self.distances.is_empty() {
            return Err(Error::Config("distance list is empty".into()));
        }
        if self.distances.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("distances must be strictly ascending".into()));
        }
        Ok(())
    }

    pub fn n_realizations(&self) -> usize {
        if self.placement.is_disordered() {
            self.realizations
        } else {
            1
        }
    }
}

/// Largest growth rate (units of the free-space rate) accepted before a point is rejected.
pub const GAIN_TOLERANCE: f64 = 1e-8;

type RealizationOutcome = (RealizationInfo, Vec<std::result::Result<SpectrumPoint, String>>);

fn run_realization(req: &ScanRequest, index: u64, tol: f64) -> Result<RealizationOutcome> {
    let start = Instant::now();
    let cloud = generate_cloud(&req.geometry, &req.model, req.placement, index)?;
    let evaluator = SelfEnergyEvaluator::new(&req.scheme, &cloud, req.solver.include_medium_linewidth, req.solver.memory_budget)?;
    let axis = req.geometry.symmetry_axis();
    let points = req
        .distances
        .iter()
        .map(|&d| -> std::result::Result<SpectrumPoint, String> {
            let atom = req.geometry.atom_site(req.atom_placement, d).map_err(|e| e.to_string())?;
            let clearance = req.geometry.distance_to_surface(&atom);
            if clearance < req.solver.min_clearance {
                return Err(format!("atom at distance {d} is {clearance} from the surface, below the minimum clearance"));
            }
            let sigma = evaluator.self_energy(&atom).map_err(|e| e.to_string())?;
            let gain = sigma.max_gain().map_err(|e| e.to_string())?;
            if gain > GAIN_TOLERANCE {
                return Err(format!(
                    "self-energy at distance {d} has a growing mode (rate {gain:.3e}); the atom is too close to the discrete medium for a lossless model"
                ));
            }
            let mut point = diagonalize(&sigma, d, tol).map_err(|e| e.to_string())?;
            symmetry_labels(&mut point, req.scheme.f_excited, axis).map_err(|e| e.to_string())?;
            Ok(point)
        })
        .collect();
    let info = RealizationInfo {
        index,
        n_scatterers: cloud.len(),
        pivot_ratio: evaluator.pivot_ratio(),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((info, points))
}

/// Runs the sweep. Realizations are evaluated in parallel; results are
/// collected in index order so the output does not depend on scheduling.
pub fn scan(req: &ScanRequest) -> Result<ScanResult> {
    req.validate()?;
    let tol = req.solver.resolved_cluster_tol(&req.placement);
    let outcomes: Vec<Result<RealizationOutcome>> =
        (0..req.n_realizations() as u64).into_par_iter().map(|i| run_realization(req, i, tol)).collect();
    let outcomes: Vec<RealizationOutcome> = outcomes.into_iter().collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(req.distances.len());
    for (k, &distance) in req.distances.iter().enumerate() {
        let mut spectra = Vec::new();
        let mut errors = Vec::new();
        for (info, pts) in &outcomes {
            match &pts[k] {
                Ok(p) => spectra.push(p),
                Err(e) => errors.push(format!("realization {}: {e}", info.index)),
            }
        }
        let (clusters, label_fallback) = average_clusters(&spectra);
        let raw = spectra.iter().map(|p| p.clusters.clone()).collect();
        points.push(ScanPoint { distance, clusters, label_fallback, raw, errors });
    }
    Ok(ScanResult { points, realizations: outcomes.into_iter().map(|(info, _)| info).collect() })
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

type ClusterKey = (Option<i32>, usize);

fn signature(point: &SpectrumPoint) -> BTreeMap<ClusterKey, Vec<&Cluster>> {
    let mut map: BTreeMap<ClusterKey, Vec<&Cluster>> = BTreeMap::new();
    for c in &point.clusters {
        map.entry((c.label.map(HalfInt::doubled), c.multiplicity)).or_default().push(c);
    }
    map
}

/// Matches clusters across realizations by label (then decay-rate rank
/// within a label) and averages them. Falls back to matching individual
/// eigenvalues by decay-rate rank when the label sets differ.
pub fn average_clusters(spectra: &[&SpectrumPoint]) -> (Vec<AveragedCluster>, bool) {
    if spectra.is_empty() {
        return (Vec::new(), false);
    }
    let signatures: Vec<_> = spectra.iter().map(|p| signature(p)).collect();
    let shape = |s: &BTreeMap<ClusterKey, Vec<&Cluster>>| s.iter().map(|(k, v)| (*k, v.len())).collect::<Vec<_>>();
    let reference = shape(&signatures[0]);
    let consistent = signatures.iter().all(|s| shape(s) == reference);
    let n_real = spectra.len();
    let mut out = Vec::new();
    if consistent {
        for (key, members) in &signatures[0] {
            for rank in 0..members.len() {
                let group: Vec<&Cluster> = signatures.iter().map(|s| s[key][rank]).collect();
                let (gamma, stderr_gamma) = mean_and_stderr(&group.iter().map(|c| c.gamma).collect::<Vec<_>>());
                let (delta, stderr_delta) = mean_and_stderr(&group.iter().map(|c| c.delta).collect::<Vec<_>>());
                out.push(AveragedCluster {
                    label: members[rank].label,
                    multiplicity: key.1,
                    gamma,
                    delta,
                    stderr_gamma,
                    stderr_delta,
                    n_realizations: n_real,
                    low_confidence: group.iter().any(|c| c.low_confidence),
                    width: group.iter().map(|c| c.width).fold(0.0, f64::max),
                });
            }
        }
    } else {
        let ranked: Vec<Vec<(f64, f64)>> = spectra
            .iter()
            .map(|p| {
                let mut v: Vec<(f64, f64)> = p.eigenvalues.iter().map(|z| (-2.0 * z.im, z.re)).collect();
                v.sort_by(|a, b| b.0.total_cmp(&a.0));
                v
            })
            .collect();
        for rank in 0..ranked[0].len() {
            let (gamma, stderr_gamma) = mean_and_stderr(&ranked.iter().map(|r| r[rank].0).collect::<Vec<_>>());
            let (delta, stderr_delta) = mean_and_stderr(&ranked.iter().map(|r| r[rank].1).collect::<Vec<_>>());
            out.push(AveragedCluster {
                label: None,
                multiplicity: 1,
                gamma,
                delta,
                stderr_gamma,
                stderr_delta,
                n_realizations: n_real,
                low_confidence: true,
                width: 0.0,
            });
        }
    }
    out.sort_by(|a, b| b.gamma.total_cmp(&a.gamma).then(a.delta.total_cmp(&b.delta)));
    (out, !consistent)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(placement: Placement, distances: Vec<f64>) -> ScanRequest {
        ScanRequest {
            scheme: TransitionScheme::rb87_f0_f1(),
            geometry: Geometry::Box { size: [1.0, 1.0, 1.0] },
            model: MediumModel::with_detuning(5.0, 1.0, 60.0).unwrap(),
            placement,
            realizations: 3,
            atom_placement: AtomPlacement::Facing,
            distances,
            solver: SolverOptions::default(),
        }
    }

    #[test]
    fn ordered_scan_single_evaluation() {
        let res = scan(&request(Placement::OrderedLattice, vec![0.5, 1.0, 2.0])).unwrap();
        assert_eq!(res.realizations.len(), 1);
        for p in &res.points {
            assert_eq!(p.clusters.len(), 1);
            assert_eq!(p.clusters[0].n_realizations, 1);
            assert_eq!(p.clusters[0].stderr_gamma, 0.0);
            assert!(p.clusters[0].gamma > 0.0);
        }
    }

    #[test]
    fn disordered_scan_reports_stderr() {
        let res = scan(&request(Placement::Disordered { seed: 7, r_min: 0.1 }, vec![0.3])).unwrap();
        assert_eq!(res.realizations.len(), 3);
        let c = &res.points[0].clusters[0];
        assert_eq!(c.n_realizations, 3);
        assert!(c.stderr_gamma > 0.0);
    }

    #[test]
    fn unsorted_distances_rejected() {
        assert!(scan(&request(Placement::OrderedLattice, vec![1.0, 0.5])).is_err());
    }
}
