//! Experiment configuration: the JSON schema users write (lengths in nm)
//! and its resolution into internal units.

use serde::{Deserialize, Serialize};

use crate::angular::TransitionScheme;
use crate::error::{Error, Result};
use crate::medium::{fit_detuning, AtomPlacement, Geometry, MediumModel, Placement, DEFAULT_R_MIN};
use crate::spectrum::SolverOptions;
use crate::vdw::DEFAULT_QUAD_TOL;

/// Refractive index of fused silica.
pub const SILICA_INDEX: f64 = 1.45;
/// Refractive index of InGaP.
pub const INGAP_INDEX: f64 = 3.31;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeConfig {
    Preset(String),
    Explicit { f_excited: f64, f_ground: f64, lambda0_nm: f64, gamma_inf_mhz: f64, label: Option<String> },
}

impl SchemeConfig {
    pub fn resolve(&self) -> Result<TransitionScheme> {
        match self {
            SchemeConfig::Preset(name) => TransitionScheme::preset(name).ok_or_else(|| {
                Error::Config(format!("unknown transition preset {name:?}; known: {}", TransitionScheme::PRESETS.join(", ")))
            }),
            SchemeConfig::Explicit { f_excited, f_ground, lambda0_nm, gamma_inf_mhz, label } => TransitionScheme::new(
                *f_excited,
                *f_ground,
                *lambda0_nm,
                *gamma_inf_mhz,
                label.as_deref().unwrap_or("custom"),
            )
            .map_err(|e| Error::Config(e.to_string())),
        }
    }
}

/// Geometry block, lengths in nm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometryConfig {
    Cylinder {
        radius_nm: f64,
        length_nm: f64,
    },
    CombPcw {
        period_nm: f64,
        periods: usize,
        tooth_height_nm: Option<f64>,
        tooth_width_nm: Option<f64>,
        backbone_width_nm: Option<f64>,
        backbone_thickness_nm: Option<f64>,
    },
    Slab {
        thickness_nm: f64,
        extent_y_nm: f64,
        extent_z_nm: f64,
    },
    HalfSpace,
    Box {
        size_nm: [f64; 3],
    },
}

impl GeometryConfig {
    pub fn resolve(&self, lambda_bar_nm: f64) -> Result<Geometry> {
        let s = |v: f64| v / lambda_bar_nm;
        let geom = match *self {
            GeometryConfig::Cylinder { radius_nm, length_nm } => Geometry::Cylinder { radius: s(radius_nm), length: s(length_nm) },
            GeometryConfig::CombPcw { period_nm, periods, tooth_height_nm, tooth_width_nm, backbone_width_nm, backbone_thickness_nm } => {
                if periods == 0 {
                    return Err(Error::Config("comb needs at least one period".into()));
                }
                Geometry::CombPcw {
                    period: s(period_nm),
                    tooth_height: s(tooth_height_nm.unwrap_or(1.5 * period_nm)),
                    tooth_width: s(tooth_width_nm.unwrap_or(0.5 * period_nm)),
                    backbone_width: s(backbone_width_nm.unwrap_or(period_nm)),
                    backbone_thickness: s(backbone_thickness_nm.unwrap_or(1.5 * period_nm)),
                    length: s(period_nm * periods as f64),
                }
            }
            GeometryConfig::Slab { thickness_nm, extent_y_nm, extent_z_nm } => {
                Geometry::Slab { thickness: s(thickness_nm), extent_y: s(extent_y_nm), extent_z: s(extent_z_nm) }
            }
            GeometryConfig::HalfSpace => Geometry::HalfSpace,
            GeometryConfig::Box { size_nm } => Geometry::Box { size: size_nm.map(s) },
        };
        geom.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(geom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    /// Scatterers per reduced wavelength cubed.
    pub density: f64,
    #[serde(default = "one")]
    pub gamma_e: f64,
    pub target_eps: Option<f64>,
    pub refractive_index: Option<f64>,
    /// `"silica"` or `"ingap"`.
    pub material: Option<String>,
    pub delta_m: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl MediumConfig {
    pub fn silica(density: f64) -> Self {
        MediumConfig { density, gamma_e: 1.0, target_eps: None, refractive_index: None, material: Some("silica".into()), delta_m: None }
    }

    /// Requested dielectric constant, when the block asks for calibration.
    pub fn target(&self) -> Result<Option<f64>> {
        let material = match self.material.as_deref() {
            None => None,
            Some("silica") => Some(SILICA_INDEX * SILICA_INDEX),
            Some("ingap") => Some(INGAP_INDEX * INGAP_INDEX),
            Some(other) => return Err(Error::Config(format!("unknown material {other:?}; known: silica, ingap"))),
        };
        let given = [self.target_eps, self.refractive_index.map(|n| n * n), material, self.delta_m.map(|_| f64::NAN)];
        let count = given.iter().filter(|v| v.is_some()).count();
        if count != 1 {
            return Err(Error::Config(
                "medium block needs exactly one of target_eps, refractive_index, material or delta_m".into(),
            ));
        }
        Ok(given[..3].iter().flatten().next().copied())
    }

    pub fn resolve(&self) -> Result<MediumModel> {
        let as_config = |e: Error| Error::Config(e.to_string());
        match self.target()? {
            Some(eps) => {
                let delta = fit_detuning(self.density, self.gamma_e, eps).map_err(as_config)?;
                let mut model = MediumModel::with_detuning(self.density, self.gamma_e, delta).map_err(as_config)?;
                model.target_eps = eps;
                Ok(model)
            }
            None => MediumModel::with_detuning(self.density, self.gamma_e, self.delta_m.unwrap_or(f64::NAN)).map_err(as_config),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementConfig {
    /// `"ordered"` or `"disordered"`.
    pub mode: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_usize")]
    pub realizations: usize,
    /// Exclusion radius in reduced wavelengths.
    #[serde(default = "default_r_min")]
    pub r_min: f64,
}

fn one_usize() -> usize {
    1
}

fn default_r_min() -> f64 {
    DEFAULT_R_MIN
}

impl PlacementConfig {
    pub fn ordered() -> Self {
        PlacementConfig { mode: "ordered".into(), seed: 0, realizations: 1, r_min: DEFAULT_R_MIN }
    }

    pub fn disordered(seed: u64, realizations: usize) -> Self {
        PlacementConfig { mode: "disordered".into(), seed, realizations, r_min: DEFAULT_R_MIN }
    }

    pub fn resolve(&self) -> Result<Placement> {
        match self.mode.as_str() {
            "ordered" => Ok(Placement::OrderedLattice),
            "disordered" => {
                if self.realizations == 0 {
                    return Err(Error::Config("disordered placement needs at least one realization".into()));
                }
                Ok(Placement::Disordered { seed: self.seed, r_min: self.r_min })
            }
            other => Err(Error::Config(format!("unknown placement mode {other:?}; use ordered or disordered"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Geometric,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub distances_nm: Option<Vec<f64>>,
    pub start_nm: Option<f64>,
    pub stop_nm: Option<f64>,
    pub points: Option<usize>,
    #[serde(default = "geometric")]
    pub spacing: Spacing,
    /// Atom placement label; defaults to the geometry's natural placement.
    pub atom_placement: Option<AtomPlacement>,
}

fn geometric() -> Spacing {
    Spacing::Geometric
}

impl SweepConfig {
    pub fn range(start_nm: f64, stop_nm: f64, points: usize, atom_placement: Option<AtomPlacement>) -> Self {
        SweepConfig { distances_nm: None, start_nm: Some(start_nm), stop_nm: Some(stop_nm), points: Some(points), spacing: Spacing::Geometric, atom_placement }
    }

    pub fn list(distances_nm: Vec<f64>, atom_placement: Option<AtomPlacement>) -> Self {
        SweepConfig { distances_nm: Some(distances_nm), start_nm: None, stop_nm: None, points: None, spacing: Spacing::Geometric, atom_placement }
    }

    pub fn distances_nm(&self) -> Result<Vec<f64>> {
        if let Some(list) = &self.distances_nm {
            if self.start_nm.is_some() || self.stop_nm.is_some() || self.points.is_some() {
                return Err(Error::Config("sweep takes either distances_nm or a start/stop/points range".into()));
            }
            return Ok(list.clone());
        }
        let (Some(a), Some(b), Some(n)) = (self.start_nm, self.stop_nm, self.points) else {
            return Err(Error::Config("sweep needs distances_nm or start_nm, stop_nm and points".into()));
        };
        if !(a > 0.0 && b > a) || n < 2 {
            return Err(Error::Config("sweep range needs 0 < start_nm < stop_nm and at least two points".into()));
        }
        Ok((0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Geometric => a * (b / a).powf(t),
                    Spacing::Linear => a + (b - a) * t,
                }
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VdwConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    /// Dielectric constant used in the macroscopic formula; defaults to the
    /// medium's target.
    pub eps: Option<f64>,
}

fn default_quad_tol() -> f64 {
    DEFAULT_QUAD_TOL
}

impl Default for VdwConfig {
    fn default() -> Self {
        VdwConfig { enabled: false, quad_tol: DEFAULT_QUAD_TOL, eps: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Half-width of the permittivity scan around the reference frequency.
    pub window: f64,
    pub points: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { window: 400.0, points: 801 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub densities: Vec<f64>,
    /// Placement modes to compare; defaults to the main placement block.
    #[serde(default)]
    pub placements: Vec<PlacementConfig>,
    /// Smallest distance, in units of the geometry scale (cylinder radius,
    /// comb period), included in the deviation summary.
    #[serde(default = "default_trusted")]
    pub trusted_min_scaled: f64,
}

fn default_trusted() -> f64 {
    1.25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub scheme: SchemeConfig,
    pub geometry: GeometryConfig,
    pub medium: MediumConfig,
    pub placement: PlacementConfig,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub vdw: VdwConfig,
    #[serde(default)]
    pub fit: FitConfig,
    pub converge: Option<ConvergeConfig>,
    /// Marks presets that take hours at full scale.
    #[serde(default)]
    pub long_running: bool,
}

/// Every derived quantity of a configuration, in internal units.
#[derive(Clone, Debug, Serialize)]
pub struct ResolvedConfig {
    pub config: ExperimentConfig,
    pub scheme: TransitionScheme,
    pub lambda_bar_nm: f64,
    pub geometry: Geometry,
    pub model: MediumModel,
    pub placement: Placement,
    pub atom_placement: AtomPlacement,
    pub distances_nm: Vec<f64>,
    pub distances: Vec<f64>,
    pub expected_scatterers: usize,
    pub memory_estimate_bytes: u64,
    pub cluster_tol: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let scheme = self.scheme.resolve()?;
        let lambda_bar_nm = scheme.reduced_wavelength_nm();
        let geometry = self.geometry.resolve(lambda_bar_nm)?;
        let model = self.medium.resolve()?;
        let placement = self.placement.resolve()?;
        let atom_placement = self.sweep.atom_placement.unwrap_or_else(|| geometry.default_placement());
        let distances_nm = self.sweep.distances_nm()?;
        if distances_nm.iter().any(|d| !(*d > 0.0)) || distances_nm.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("distances must be positive and strictly ascending".into()));
        }
        let distances: Vec<f64> = distances_nm.iter().map(|d| d / lambda_bar_nm).collect();
        for &d in &distances {
            geometry.atom_site(atom_placement, d).map_err(|e| Error::Config(e.to_string()))?;
        }
        let expected_scatterers = expected_scatterers(&geometry, &model, &placement);
        let memory_estimate_bytes = crate::spectrum::medium_block_bytes(expected_scatterers);
        if memory_estimate_bytes > self.solver.memory_budget && !matches!(geometry, Geometry::HalfSpace) {
            return Err(Error::MemoryBudget { needed: memory_estimate_bytes, budget: self.solver.memory_budget });
        }
        if self.vdw.enabled && !(self.vdw.quad_tol > 0.0) {
            return Err(Error::Config("vdw quad_tol must be positive".into()));
        }
        Ok(ResolvedConfig {
            config: self.clone(),
            cluster_tol: self.solver.resolved_cluster_tol(&placement),
            scheme,
            lambda_bar_nm,
            geometry,
            model,
            placement,
            atom_placement,
            distances_nm,
            distances,
            expected_scatterers,
            memory_estimate_bytes,
        })
    }
}

/// Scatterer count before generating the cloud: `round(n0 V)` for random
/// placement, an exact lattice count for the ordered lattice.
fn expected_scatterers(geometry: &Geometry, model: &MediumModel, placement: &Placement) -> usize {
    match placement {
        Placement::Disordered { .. } => crate::medium::expected_count(geometry, model).unwrap_or(0),
        Placement::OrderedLattice => crate::medium::generate_cloud(geometry, model, *placement, 0).map(|c| c.len()).unwrap_or(0),
    }
}
