//! Subcommands of the runner.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, GeometryConfig, PlacementConfig, ResolvedConfig};
use super::output::{config_hash, num, output_path, provenance_line, write_csv, write_json, VERSION};
use crate::error::{Error, Result};
use crate::medium::{permittivity_scan, MediumModel};
use crate::spectrum::{run_oracle, scan, OracleReport, ScanRequest, ScanResult};
use crate::vdw::{dipole_sq_sum, vdw_shift, VdwSpec};

/// Options shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub strict: bool,
    /// Worker threads; `None` uses one per core.
    pub threads: Option<usize>,
    pub corrupt_coupling_sign: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { out_dir: PathBuf::from("out"), strict: false, threads: None, corrupt_coupling_sign: false }
    }
}

impl RunOptions {
    /// Runs `f` on a dedicated pool of the requested size.
    fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        faer::set_global_parallelism(faer::Par::Seq);
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            builder = builder.num_threads(n.max(1));
        }
        let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}

pub const SCAN_COLUMNS: [&str; 8] = [
    "distance_nm",
    "label",
    "multiplicity",
    "gamma_over_gamma_inf",
    "delta_over_gamma_inf",
    "stderr_gamma",
    "stderr_delta",
    "n_realizations",
];
pub const VDW_COLUMN: &str = "vdw_shift_over_gamma_inf";
pub const VDW_COLUMNS: [&str; 3] = ["distance_nm", "vdw_shift_over_gamma_inf", "quad_error_estimate"];
pub const CONVERGE_COLUMNS: [&str; 11] = [
    "density",
    "delta_m",
    "placement",
    "distance_nm",
    "label",
    "multiplicity",
    "gamma_over_gamma_inf",
    "delta_over_gamma_inf",
    "stderr_gamma",
    "stderr_delta",
    "n_realizations",
];
pub const FIT_COLUMNS: [&str; 3] = ["omega_over_gamma_inf", "eps_re", "eps_im"];

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub model: MediumModel,
    pub target_eps: f64,
    /// Largest `|Re eps / target - 1|` within `FLATNESS_WINDOW` of the
    /// reference frequency.
    pub flatness_deviation: f64,
    pub csv: PathBuf,
}

/// Half-width (in linewidths) of the window used for the flatness summary.
pub const FLATNESS_WINDOW: f64 = 10.0;

/// Largest relative deviation of `Re eps` from `target` over `|omega| <= half_width`.
pub fn flatness_deviation(model: &MediumModel, target: f64, half_width: f64) -> Result<f64> {
    let omegas: Vec<f64> = (0..=400).map(|i| -half_width + 2.0 * half_width * i as f64 / 400.0).collect();
    let eps = permittivity_scan(model, &omegas)?;
    Ok(eps.iter().map(|e| (e.re / target - 1.0).abs()).fold(0.0, f64::max))
}

pub fn cmd_fit(cfg: &ResolvedConfig, opts: &RunOptions) -> Result<FitReport> {
    let fit = &cfg.config.fit;
    if fit.points < 2 || !(fit.window > 0.0) {
        return Err(Error::Config("fit scan needs a positive window and at least two points".into()));
    }
    let model = cfg.model;
    let omegas: Vec<f64> = (0..fit.points).map(|i| -fit.window + 2.0 * fit.window * i as f64 / (fit.points - 1) as f64).collect();
    let eps = permittivity_scan(&model, &omegas)?;
    let hash = config_hash(&cfg.config)?;
    let rows: Vec<Vec<String>> = omegas.iter().zip(&eps).map(|(w, e)| vec![num(*w), num(e.re), num(e.im)]).collect();
    let csv = output_path(&opts.out_dir, &cfg.config.name, "fit.csv");
    write_csv(&csv, &provenance_line(&hash, &cfg.config.name), &FIT_COLUMNS, &rows)?;
    let report = FitReport {
        model,
        target_eps: model.target_eps,
        flatness_deviation: flatness_deviation(&model, model.target_eps, FLATNESS_WINDOW)?,
        csv,
    };
    write_json(&output_path(&opts.out_dir, &cfg.config.name, "fit.json"), &serde_json::json!({
        "version": VERSION,
        "config_sha256": hash,
        "resolved": cfg,
        "report": &report,
    }))?;
    Ok(report)
}

fn scan_request(cfg: &ResolvedConfig) -> ScanRequest {
    ScanRequest {
        scheme: cfg.scheme.clone(),
        geometry: cfg.geometry.clone(),
        model: cfg.model,
        placement: cfg.placement,
        realizations: cfg.config.placement.realizations,
        atom_placement: cfg.atom_placement,
        distances: cfg.distances.clone(),
        solver: cfg.config.solver,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VdwRow {
    pub distance_nm: f64,
    pub shift: f64,
    pub error_estimate: f64,
}

fn vdw_rows(cfg: &ResolvedConfig) -> Result<Vec<VdwRow>> {
    let eps = cfg.config.vdw.eps.unwrap_or(cfg.model.target_eps);
    let spec = VdwSpec::new(eps, dipole_sq_sum(&cfg.scheme)?, cfg.geometry.clone(), cfg.config.vdw.quad_tol)?;
    cfg.distances
        .par_iter()
        .zip(cfg.distances_nm.par_iter())
        .map(|(&d, &d_nm)| {
            let site = cfg.geometry.atom_site(cfg.atom_placement, d)?;
            let r = vdw_shift(&spec, &site)?;
            Ok(VdwRow { distance_nm: d_nm, shift: r.shift, error_estimate: r.error_estimate })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanOutcome {
    pub result: ScanResult,
    pub vdw: Option<Vec<VdwRow>>,
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub seconds: f64,
}

fn scan_rows(cfg: &ResolvedConfig, result: &ScanResult, vdw: Option<&[VdwRow]>) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (k, point) in result.points.iter().enumerate() {
        for c in &point.clusters {
            let mut row = vec![
                num(cfg.distances_nm[k]),
                c.label.map(|l| num(l.value())).unwrap_or_default(),
                c.multiplicity.to_string(),
                num(c.gamma),
                num(c.delta),
                num(c.stderr_gamma),
                num(c.stderr_delta),
                c.n_realizations.to_string(),
            ];
            if let Some(v) = vdw {
                row.push(num(v[k].shift));
            }
            rows.push(row);
        }
    }
    rows
}

fn scan_sidecar(cfg: &ResolvedConfig, hash: &str, result: &ScanResult, seconds: f64) -> serde_json::Value {
    let seeds: Vec<u64> = result.realizations.iter().map(|r| r.index).collect();
    let points: Vec<_> = result
        .points
        .iter()
        .zip(&cfg.distances_nm)
        .map(|(p, d_nm)| {
            serde_json::json!({
                "distance_nm": d_nm,
                "distance": p.distance,
                "label_fallback": p.label_fallback,
                "low_confidence_labels": p.clusters.iter().filter(|c| c.low_confidence).count(),
                "max_cluster_width": p.clusters.iter().map(|c| c.width).fold(0.0, f64::max),
                "errors": p.errors,
                "raw_clusters": p.raw,
            })
        })
        .collect();
    serde_json::json!({
        "version": VERSION,
        "config_sha256": hash,
        "resolved": cfg,
        "master_seed": cfg.config.placement.seed,
        "realization_streams": seeds,
        "realizations": result.realizations,
        "condition_estimates": result.realizations.iter().map(|r| 1.0 / r.pivot_ratio).collect::<Vec<_>>(),
        "seconds": seconds,
        "failures": result.failures(),
        "points": points,
    })
}

pub fn cmd_scan(cfg: &ResolvedConfig, opts: &RunOptions) -> Result<ScanOutcome> {
    let start = Instant::now();
    let req = scan_request(cfg);
    let (result, vdw) = opts.install(|| -> Result<_> {
        let result = scan(&req)?;
        let vdw = if cfg.config.vdw.enabled { Some(vdw_rows(cfg)?) } else { None };
        Ok((result, vdw))
    })??;
    if opts.strict && result.failures() > 0 {
        let first = result.points.iter().flat_map(|p| p.errors.iter()).next().cloned().unwrap_or_default();
        return Err(Error::Eigen(format!("{} point failures (strict mode); first: {first}", result.failures())));
    }
    let hash = config_hash(&cfg.config)?;
    let mut header: Vec<&str> = SCAN_COLUMNS.to_vec();
    if vdw.is_some() {
        header.push(VDW_COLUMN);
    }
    let csv = output_path(&opts.out_dir, &cfg.config.name, "scan.csv");
    write_csv(&csv, &provenance_line(&hash, &cfg.config.name), &header, &scan_rows(cfg, &result, vdw.as_deref()))?;
    let seconds = start.elapsed().as_secs_f64();
    let sidecar = output_path(&opts.out_dir, &cfg.config.name, "scan.json");
    let mut json = scan_sidecar(cfg, &hash, &result, seconds);
    if let Some(v) = &vdw {
        json["vdw"] = serde_json::to_value(v)?;
        json["vdw_note"] = "macroscopic estimate; upper bound on the magnitude of the ground-state interaction".into();
    }
    write_json(&sidecar, &json)?;
    Ok(ScanOutcome { result, vdw, csv, sidecar, seconds })
}

pub const PERIOD_COLUMNS: [&str; 5] = ["period_nm", "distance_nm", "max_label", "max_label_gamma", "max_other_gamma"];

#[derive(Clone, Debug, Serialize)]
pub struct PeriodRow {
    pub period_nm: f64,
    pub distance_nm: f64,
    pub max_label: Option<f64>,
    /// Decay rate of the cluster with the largest `|M|`.
    pub max_label_gamma: f64,
    /// Fastest decay among the remaining clusters.
    pub max_other_gamma: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodScanReport {
    pub rows: Vec<PeriodRow>,
    /// Row with the slowest maximal-`|M|` decay.
    pub most_subradiant: Option<PeriodRow>,
    pub csv: PathBuf,
}

/// Repeats the distance sweep of a comb configuration at each period.
pub fn cmd_period_scan(cfg: &ExperimentConfig, periods_nm: &[f64], opts: &RunOptions) -> Result<PeriodScanReport> {
    if periods_nm.is_empty() {
        return Err(Error::Config("period scan needs at least one period".into()));
    }
    let mut rows = Vec::new();
    for &period in periods_nm {
        let mut c = cfg.clone();
        match &mut c.geometry {
            GeometryConfig::CombPcw { period_nm, .. } => *period_nm = period,
            _ => return Err(Error::Config("period scan needs a comb geometry".into())),
        }
        let resolved = c.resolve()?;
        let req = scan_request(&resolved);
        let result = opts.install(|| scan(&req))??;
        if opts.strict && result.failures() > 0 {
            return Err(Error::Eigen(format!("{} point failures at period {period} nm (strict mode)", result.failures())));
        }
        for (point, &d_nm) in result.points.iter().zip(&resolved.distances_nm) {
            let Some(top) = point.clusters.iter().max_by(|a, b| {
                let key = |c: &crate::spectrum::AveragedCluster| c.label.map_or(-1, |l| l.doubled());
                key(a).cmp(&key(b)).then(b.gamma.total_cmp(&a.gamma))
            }) else {
                continue;
            };
            let others = point.clusters.iter().filter(|c| !std::ptr::eq(*c, top)).map(|c| c.gamma).fold(f64::NAN, f64::max);
            rows.push(PeriodRow {
                period_nm: period,
                distance_nm: d_nm,
                max_label: top.label.map(|l| l.value()),
                max_label_gamma: top.gamma,
                max_other_gamma: others,
            });
        }
    }
    let hash = config_hash(cfg)?;
    let csv = output_path(&opts.out_dir, &cfg.name, "periods.csv");
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![num(r.period_nm), num(r.distance_nm), r.max_label.map(num).unwrap_or_default(), num(r.max_label_gamma), num(r.max_other_gamma)]
        })
        .collect();
    write_csv(&csv, &provenance_line(&hash, &cfg.name), &PERIOD_COLUMNS, &csv_rows)?;
    let most_subradiant = rows.iter().min_by(|a, b| a.max_label_gamma.total_cmp(&b.max_label_gamma)).cloned();
    Ok(PeriodScanReport { rows, most_subradiant, csv })
}

pub fn cmd_vdw(cfg: &ResolvedConfig, opts: &RunOptions) -> Result<Vec<VdwRow>> {
    let rows = opts.install(|| vdw_rows(cfg))??;
    let hash = config_hash(&cfg.config)?;
    let csv_rows: Vec<Vec<String>> = rows.iter().map(|r| vec![num(r.distance_nm), num(r.shift), num(r.error_estimate)]).collect();
    write_csv(
        &output_path(&opts.out_dir, &cfg.config.name, "vdw.csv"),
        &provenance_line(&hash, &cfg.config.name),
        &VDW_COLUMNS,
        &csv_rows,
    )?;
    Ok(rows)
}

pub fn cmd_oracle(instances: usize, max_scatterers: usize, seed: u64, opts: &RunOptions) -> Result<OracleReport> {
    let report = opts.install(|| run_oracle(instances, max_scatterers, seed, opts.corrupt_coupling_sign))??;
    write_json(&opts.out_dir.join("oracle.json"), &report)?;
    if !report.passed {
        let worst = report.cases.iter().filter(|c| !c.passed).count();
        return Err(Error::Oracle(format!(
            "{worst} of {} instances failed, max relative error {:e}",
            report.cases.len(),
            report.max_rel_error
        )));
    }
    Ok(report)
}

/// One curve of a convergence study.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergeCurve {
    pub density: f64,
    pub delta_m: f64,
    pub placement: String,
    pub n_scatterers: usize,
    /// Decay rates per distance, each cluster repeated by its multiplicity,
    /// in descending order.
    pub gammas: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairDeviation {
    pub a: String,
    pub b: String,
    pub max_rel_deviation: f64,
    /// Largest deviation in units of the combined standard error.
    pub max_sigma: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergeReport {
    pub curves: Vec<ConvergeCurve>,
    pub pairs: Vec<PairDeviation>,
    pub trusted_distances_nm: Vec<f64>,
    pub csv: PathBuf,
}

fn curve_key(c: &ConvergeCurve) -> String {
    format!("{}@{}", c.placement, c.density)
}

fn expanded(result: &ScanResult) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    result
        .points
        .iter()
        .map(|p| {
            let mut g: Vec<(f64, f64)> =
                p.clusters.iter().flat_map(|c| std::iter::repeat_n((c.gamma, c.stderr_gamma), c.multiplicity)).collect();
            g.sort_by(|a, b| b.0.total_cmp(&a.0));
            g.into_iter().unzip()
        })
        .unzip()
}

fn compare(a: &ConvergeCurve, b: &ConvergeCurve, trusted: &[usize]) -> PairDeviation {
    let mut max_rel: f64 = 0.0;
    let mut max_sigma: f64 = 0.0;
    for &k in trusted {
        for (i, (ga, gb)) in a.gammas[k].iter().zip(&b.gammas[k]).enumerate() {
            max_rel = max_rel.max((ga - gb).abs() / gb.abs());
            let err = a.stderr[k][i].hypot(b.stderr[k][i]);
            if err > 0.0 {
                max_sigma = max_sigma.max((ga - gb).abs() / err);
            } else if ga != gb {
                max_sigma = f64::INFINITY;
            }
        }
    }
    PairDeviation { a: curve_key(a), b: curve_key(b), max_rel_deviation: max_rel, max_sigma }
}

/// Runs the same sweep at several densities (each calibrated to the same
/// target permittivity) and placement modes, and compares neighbouring curves.
pub fn cmd_converge(cfg: &ResolvedConfig, densities: Option<&[f64]>, opts: &RunOptions) -> Result<ConvergeReport> {
    let conv = cfg.config.converge.clone().unwrap_or(super::config::ConvergeConfig {
        densities: Vec::new(),
        placements: Vec::new(),
        trusted_min_scaled: 1.25,
    });
    let mut dens: Vec<f64> = densities.map(<[f64]>::to_vec).unwrap_or(conv.densities.clone());
    dens.sort_by(f64::total_cmp);
    dens.dedup();
    let placements: Vec<PlacementConfig> =
        if conv.placements.is_empty() { vec![cfg.config.placement.clone()] } else { conv.placements.clone() };
    if dens.is_empty() || dens.len() * placements.len() < 2 {
        return Err(Error::Config("convergence needs at least two densities (or two placement modes)".into()));
    }
    if cfg.config.medium.target()?.is_none() {
        return Err(Error::Config("convergence needs a target permittivity so each density can be calibrated".into()));
    }
    let mut curves = Vec::new();
    let mut rows = Vec::new();
    for placement in &placements {
        for &density in &dens {
            let mut sub: ExperimentConfig = cfg.config.clone();
            sub.medium.density = density;
            sub.placement = placement.clone();
            sub.vdw.enabled = false;
            sub.converge = None;
            let resolved = sub.resolve()?;
            let req = scan_request(&resolved);
            let result = opts.install(|| scan(&req))??;
            if opts.strict && result.failures() > 0 {
                return Err(Error::Eigen(format!("{} point failures at density {density} (strict mode)", result.failures())));
            }
            for (k, p) in result.points.iter().enumerate() {
                for c in &p.clusters {
                    rows.push(vec![
                        num(density),
                        num(resolved.model.delta_m),
                        placement.mode.clone(),
                        num(cfg.distances_nm[k]),
                        c.label.map(|l| num(l.value())).unwrap_or_default(),
                        c.multiplicity.to_string(),
                        num(c.gamma),
                        num(c.delta),
                        num(c.stderr_gamma),
                        num(c.stderr_delta),
                        c.n_realizations.to_string(),
                    ]);
                }
            }
            let (gammas, stderr) = expanded(&result);
            curves.push(ConvergeCurve {
                density,
                delta_m: resolved.model.delta_m,
                placement: placement.mode.clone(),
                n_scatterers: result.realizations.first().map(|r| r.n_scatterers).unwrap_or(0),
                gammas,
                stderr,
            });
        }
    }
    let scale = cfg.geometry.scale();
    let trusted: Vec<usize> = (0..cfg.distances.len()).filter(|&k| cfg.distances[k] / scale >= conv.trusted_min_scaled).collect();
    let mut pairs = Vec::new();
    for (pi, _) in placements.iter().enumerate() {
        let block = &curves[pi * dens.len()..(pi + 1) * dens.len()];
        for w in block.windows(2) {
            pairs.push(compare(&w[0], &w[1], &trusted));
        }
    }
    if placements.len() > 1 {
        for (di, _) in dens.iter().enumerate() {
            for pj in 1..placements.len() {
                pairs.push(compare(&curves[di], &curves[pj * dens.len() + di], &trusted));
            }
        }
    }
    let hash = config_hash(&cfg.config)?;
    let csv = output_path(&opts.out_dir, &cfg.config.name, "converge.csv");
    write_csv(&csv, &provenance_line(&hash, &cfg.config.name), &CONVERGE_COLUMNS, &rows)?;
    let report = ConvergeReport { curves, pairs, trusted_distances_nm: trusted.iter().map(|&k| cfg.distances_nm[k]).collect(), csv };
    write_json(&output_path(&opts.out_dir, &cfg.config.name, "converge.json"), &serde_json::json!({
        "version": VERSION,
        "config_sha256": hash,
        "resolved": cfg,
        "report": &report,
    }))?;
    Ok(report)
}
