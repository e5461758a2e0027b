//! Named experiment presets. Desk presets run in minutes on one core; the
//! others follow the full published scale and take hours.

use super::config::*;
use crate::error::{Error, Result};
use crate::medium::AtomPlacement;
use crate::spectrum::SolverOptions;

const RB_LAMBDA_NM: f64 = 780.241;
const CS_LAMBDA_NM: f64 = 852.347;
const FIBER_RADIUS_NM: f64 = 200.0;
const COMB_DESK_PERIOD_NM: f64 = 300.0;
/// Lowest density whose InGaP calibration clears the delta_M >= 20 Gamma_e floor.
const COMB_DESK_DENSITY: f64 = 6.0;
const FULL_MEMORY_BUDGET: u64 = 8 << 30;

pub const PRESET_NAMES: [&str; 17] = [
    "fig2-desk",
    "fig2",
    "fig3-desk",
    "fig3",
    "fig5-desk",
    "fig5",
    "fig6-desk",
    "fig6",
    "fig7-desk",
    "fig7",
    "fig8-desk",
    "fig8",
    "fig10",
    "fig11-desk",
    "fig11",
    "fig12-desk",
    "fig12",
];

fn cylinder(name: &str, scheme: &str, lambda_nm: f64, wavelengths: f64, density: f64, points: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        scheme: SchemeConfig::Preset(scheme.into()),
        geometry: GeometryConfig::Cylinder { radius_nm: FIBER_RADIUS_NM, length_nm: wavelengths * lambda_nm },
        medium: MediumConfig::silica(density),
        placement: PlacementConfig::ordered(),
        sweep: SweepConfig::range(1.25 * FIBER_RADIUS_NM, 10.0 * FIBER_RADIUS_NM, points, Some(AtomPlacement::Radial)),
        solver: SolverOptions::default(),
        vdw: VdwConfig::default(),
        fit: FitConfig::default(),
        converge: None,
        long_running: false,
    }
}

fn comb(name: &str, scheme: &str, period_nm: f64, periods: usize, density: f64, placement: AtomPlacement) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        scheme: SchemeConfig::Preset(scheme.into()),
        geometry: GeometryConfig::CombPcw {
            period_nm,
            periods,
            tooth_height_nm: None,
            tooth_width_nm: None,
            backbone_width_nm: None,
            backbone_thickness_nm: None,
        },
        medium: MediumConfig { material: None, refractive_index: Some(INGAP_INDEX), ..MediumConfig::silica(density) },
        placement: PlacementConfig::ordered(),
        sweep: SweepConfig::range(50.0, 1000.0, 24, Some(placement)),
        solver: SolverOptions::default(),
        vdw: VdwConfig::default(),
        fit: FitConfig::default(),
        converge: None,
        long_running: false,
    }
}

fn full_scale(mut cfg: ExperimentConfig, realizations: usize) -> ExperimentConfig {
    cfg.long_running = true;
    cfg.placement = PlacementConfig::disordered(1, realizations);
    cfg.solver.memory_budget = FULL_MEMORY_BUDGET;
    cfg
}

/// Configuration of a named preset.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let cfg = match name {
        "fig2-desk" => {
            let mut c = cylinder(name, "rb87-f0-f1", RB_LAMBDA_NM, 2.0, 10.0, 40);
            c.vdw.enabled = true;
            c
        }
        "fig2" => {
            let mut c = full_scale(cylinder(name, "rb87-f0-f1", RB_LAMBDA_NM, 4.0, 20.0, 60), 20);
            c.vdw.enabled = true;
            c
        }
        "fig3-desk" => cylinder(name, "cs133-f5-f4", CS_LAMBDA_NM, 2.0, 10.0, 24),
        "fig3" => full_scale(cylinder(name, "cs133-f5-f4", CS_LAMBDA_NM, 4.0, 20.0, 60), 20),
        "fig5-desk" => comb(name, "cs133-f5-f4", COMB_DESK_PERIOD_NM, 8, COMB_DESK_DENSITY, AtomPlacement::BehindTooth),
        "fig5" => full_scale(comb(name, "cs133-f5-f4", 400.0, 16, 20.0, AtomPlacement::BehindTooth), 20),
        "fig6-desk" => comb(name, "cs133-f5-f4", COMB_DESK_PERIOD_NM, 8, COMB_DESK_DENSITY, AtomPlacement::BetweenTeeth),
        "fig6" => full_scale(comb(name, "cs133-f5-f4", 400.0, 16, 20.0, AtomPlacement::BetweenTeeth), 20),
        "fig7-desk" => comb(name, "rb87-f3-f2", COMB_DESK_PERIOD_NM, 8, COMB_DESK_DENSITY, AtomPlacement::BehindTooth),
        "fig7" => full_scale(comb(name, "rb87-f3-f2", 370.0, 16, 20.0, AtomPlacement::BehindTooth), 20),
        "fig8-desk" => comb(name, "rb87-f3-f2", COMB_DESK_PERIOD_NM, 8, COMB_DESK_DENSITY, AtomPlacement::BetweenTeeth),
        "fig8" => full_scale(comb(name, "rb87-f3-f2", 370.0, 16, 20.0, AtomPlacement::BetweenTeeth), 20),
        "fig10" => {
            let mut c = cylinder(name, "rb87-f0-f1", RB_LAMBDA_NM, 2.0, 20.0, 2);
            c.fit = FitConfig { window: 400.0, points: 801 };
            c
        }
        "fig11-desk" => {
            let mut c = cylinder(name, "rb87-f0-f1", RB_LAMBDA_NM, 2.0, 10.0, 24);
            c.sweep = SweepConfig::range(1.25 * FIBER_RADIUS_NM, 4.0 * FIBER_RADIUS_NM, 24, Some(AtomPlacement::Radial));
            c.placement = PlacementConfig::disordered(1, 8);
            c.converge = Some(ConvergeConfig { densities: vec![5.0, 10.0, 15.0], placements: Vec::new(), trusted_min_scaled: 1.25 });
            c
        }
        "fig11" => {
            let mut c = full_scale(cylinder(name, "rb87-f0-f1", RB_LAMBDA_NM, 4.0, 20.0, 40), 20);
            c.converge = Some(ConvergeConfig { densities: vec![5.0, 10.0, 15.0, 20.0], placements: Vec::new(), trusted_min_scaled: 1.25 });
            c
        }
        "fig12-desk" => {
            let mut c = cylinder(name, "rb87-f0-f1", RB_LAMBDA_NM, 2.0, 10.0, 16);
            c.sweep = SweepConfig::range(1.25 * FIBER_RADIUS_NM, 4.0 * FIBER_RADIUS_NM, 16, Some(AtomPlacement::Radial));
            c.converge = Some(ConvergeConfig {
                densities: vec![10.0],
                placements: vec![PlacementConfig::ordered(), PlacementConfig::disordered(1, 6)],
                trusted_min_scaled: 1.25,
            });
            c
        }
        "fig12" => {
            let mut c = full_scale(cylinder(name, "rb87-f0-f1", RB_LAMBDA_NM, 4.0, 20.0, 40), 20);
            c.converge = Some(ConvergeConfig {
                densities: vec![20.0],
                placements: vec![PlacementConfig::ordered(), PlacementConfig::disordered(1, 20)],
                trusted_min_scaled: 1.25,
            });
            c
        }
        other => return Err(Error::Config(format!("unknown preset {other:?}; known: {}", PRESET_NAMES.join(", ")))),
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_resolves() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            assert_eq!(cfg.long_running, !name.ends_with("-desk") && name != "fig10", "{name}");
            let text = serde_json::to_string(&cfg).unwrap();
            assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        }
    }
}
