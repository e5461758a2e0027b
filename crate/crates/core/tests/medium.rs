use approx::assert_relative_eq;
use nalgebra::Vector3;
use proptest::prelude::*;

use nanoqed::medium::{
    expected_count, far_detuned_eps, fit_detuning, gamma_e_from_dipole, generate_cloud, permittivity, permittivity_scan, DipoleCloud,
    Geometry, MediumModel, Placement,
};
use nanoqed::spectrum::{assemble_medium_block, DEFAULT_MEMORY_BUDGET};

const SILICA: f64 = 2.1025;

// Detunings solving Re eps(omega_0) = 1.45^2 exactly, from an
// arbitrary-precision root of the self-consistency condition.
const SILICA_DETUNINGS: [(f64, f64); 4] =
    [(5.0, 58.43519411231271), (10.0, 116.8936795128107), (15.0, 175.3469873260046), (20.0, 233.7990013561177)];

#[test]
fn calibration_matches_independent_root() {
    for (n0, delta) in SILICA_DETUNINGS {
        assert_relative_eq!(fit_detuning(n0, 1.0, SILICA).unwrap(), delta, max_relative = 1e-9);
    }
}

#[test]
fn calibration_reproduces_published_offsets() {
    for ((n0, _), published) in SILICA_DETUNINGS.iter().zip([58.0, 117.0, 175.0, 233.0]) {
        assert!((fit_detuning(*n0, 1.0, SILICA).unwrap() - published).abs() <= 2.0);
    }
}

#[test]
fn high_index_calibration_refines_the_closed_form_seed() {
    let eps = 3.31f64.powi(2);
    let seed = std::f64::consts::PI * 20.0 * (eps + 2.0) / (eps - 1.0);
    let fitted = fit_detuning(20.0, 1.0, eps).unwrap();
    assert_relative_eq!(fitted, 81.55224885454736, max_relative = 1e-9);
    assert!((fitted - seed).abs() < 0.01 * seed);
}

#[test]
fn permittivity_reference_points() {
    let m = MediumModel::with_detuning(20.0, 1.0, 233.0).unwrap();
    let eps = permittivity(&m, 0.0).unwrap();
    assert_relative_eq!(eps.re, 2.10767632769181688668, max_relative = 1e-10);
    assert_relative_eq!(eps.im, 0.00472503211176212861, max_relative = 1e-8);
    let m = MediumModel::with_detuning(20.0, 1.0, 233.8).unwrap();
    let eps = permittivity(&m, 10.0).unwrap();
    assert_relative_eq!(eps.re, 2.17098040682519832328, max_relative = 1e-10);
    assert_relative_eq!(eps.im, 0.00535926852356735535, max_relative = 1e-8);
}

#[test]
fn far_detuned_closed_form() {
    for n0 in [2.0, 5.0, 20.0] {
        for ratio in [50.0, 100.0, 400.0] {
            let delta = ratio;
            if delta < 3.0 * std::f64::consts::PI * n0 {
                continue;
            }
            let m = MediumModel::with_detuning(n0, 1.0, delta).unwrap();
            let exact = permittivity(&m, 0.0).unwrap().re;
            assert_relative_eq!(exact, far_detuned_eps(n0, 1.0, delta), max_relative = 1e-3);
        }
    }
}

#[test]
fn passive_across_the_resonance() {
    let m = MediumModel::calibrated(10.0, 1.0, SILICA).unwrap();
    let omegas: Vec<f64> = (0..=2000).map(|i| -500.0 + 0.5 * i as f64).collect();
    let eps = permittivity_scan(&m, &omegas).unwrap();
    for (w, e) in omegas.iter().zip(&eps) {
        assert!(e.im >= -1e-9, "gain at omega = {w}: {e}");
    }
    // the loss peaks at the local-field shifted pole, delta_M - beta
    let (peak, _) = omegas.iter().zip(&eps).max_by(|a, b| a.1.im.total_cmp(&b.1.im)).unwrap();
    assert!((*peak - (m.delta_m - m.beta())).abs() < 0.2 * m.beta(), "peak at {peak}");
    // and Re eps is negative inside the stop band up to delta_M + 2 beta
    let mid = m.delta_m + 0.5 * m.beta();
    let k = omegas.iter().position(|&w| w >= mid).unwrap();
    assert!(eps[k].re < 0.0);
    // pointwise evaluation agrees with the continued scan
    for k in [0, 700, 1500, 2000] {
        let direct = permittivity(&m, omegas[k]).unwrap();
        assert!((direct - eps[k]).norm() < 1e-9 * direct.norm());
    }
}

#[test]
fn linewidth_from_dipole_has_cubic_frequency_factor() {
    let g = gamma_e_from_dipole(0.75, 1.0).unwrap();
    assert_relative_eq!(g, 1.0, max_relative = 1e-15);
    let delta = 233.0 * 6.0666e6 / 384.230e12;
    let shifted = gamma_e_from_dipole(0.75, 1.0 + delta).unwrap();
    assert!((shifted / g - 1.0 - 3.0 * delta).abs() < 1e-9);
}

#[test]
fn medium_block_is_complex_symmetric() {
    let model = MediumModel::calibrated(10.0, 1.0, SILICA).unwrap();
    let cloud = generate_cloud(&Geometry::Box { size: [1.4, 1.4, 1.4] }, &model, Placement::Disordered { seed: 3, r_min: 0.1 }, 0).unwrap();
    assert!(cloud.len() >= 20);
    let a = assemble_medium_block(&cloud, true, DEFAULT_MEMORY_BUDGET).unwrap().matrix;
    let mut diff = 0.0f64;
    let mut norm = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            diff = diff.max((a[(i, j)] - a[(j, i)]).norm());
            norm = norm.max(a[(i, j)].norm());
        }
    }
    assert!(diff <= 1e-12 * norm);
}

#[test]
fn ordered_lattices_are_mirror_symmetric() {
    let model = MediumModel::calibrated(10.0, 1.0, SILICA).unwrap();
    for geom in [Geometry::Cylinder { radius: 1.6, length: 12.0 }, Geometry::comb(2.4, 4)] {
        let cloud = generate_cloud(&geom, &model, Placement::OrderedLattice, 0).unwrap();
        let mirrored = cloud.reflected_y();
        for p in &mirrored.positions {
            assert!(cloud.positions.iter().any(|q| (p - q).norm() < 1e-12), "{}", geom.kind());
        }
    }
}

fn disordered_geometry() -> impl Strategy<Value = Geometry> {
    prop_oneof![
        (0.5..1.5f64, 1.0..4.0f64).prop_map(|(radius, length)| Geometry::Cylinder { radius, length }),
        (0.5..2.0f64, 0.5..2.0f64, 0.5..2.0f64).prop_map(|(a, b, c)| Geometry::Box { size: [a, b, c] }),
        (0.4..1.0f64, 1.0..3.0f64, 1.0..3.0f64).prop_map(|(t, y, z)| Geometry::Slab { thickness: t, extent_y: y, extent_z: z }),
        (1.2..2.0f64, 1usize..3).prop_map(|(p, n)| Geometry::comb(p, n)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn disordered_clouds_respect_shape_and_hard_core(geom in disordered_geometry(), seed in 0u64..1000, n0 in 2.0..8.0f64, index in 0u64..4) {
        prop_assume!(geom.volume() * n0 >= 2.0);
        let model = MediumModel::with_detuning(n0, 1.0, 40.0 * n0).unwrap();
        let r_min = 0.1;
        let cloud = generate_cloud(&geom, &model, Placement::Disordered { seed, r_min }, index).unwrap();
        prop_assert_eq!(cloud.len(), expected_count(&geom, &model).unwrap());
        prop_assert!(cloud.positions.iter().all(|p| geom.contains(p)));
        if cloud.len() > 1 {
            prop_assert!(cloud.min_separation() >= r_min);
        }
        let again = generate_cloud(&geom, &model, Placement::Disordered { seed, r_min }, index).unwrap();
        prop_assert_eq!(&cloud.positions, &again.positions);
        if cloud.len() > 2 {
            let other = generate_cloud(&geom, &model, Placement::Disordered { seed, r_min }, index + 1).unwrap();
            prop_assert_ne!(&cloud.positions, &other.positions);
        }
    }

    #[test]
    fn ordered_clouds_are_lattice_points_inside(geom in disordered_geometry(), n0 in 2.0..8.0f64) {
        prop_assume!(geom.volume() * n0 >= 2.0);
        let model = MediumModel::with_detuning(n0, 1.0, 40.0 * n0).unwrap();
        let cloud = generate_cloud(&geom, &model, Placement::OrderedLattice, 0).unwrap();
        let s = model.lattice_spacing();
        for p in &cloud.positions {
            prop_assert!(geom.contains(p));
            for c in p.iter() {
                prop_assert!(((c / s) - (c / s).round()).abs() < 1e-9);
            }
        }
        let expected = geom.volume() * n0;
        prop_assert!((cloud.len() as f64 - expected).abs() < 0.6 * expected + 10.0);
    }

    #[test]
    fn clouds_never_cover_the_atom_site(seed in 0u64..500, rho in 1.7..4.0f64) {
        let geom = Geometry::Cylinder { radius: 1.6, length: 3.0 };
        let model = MediumModel::with_detuning(6.0, 1.0, 240.0).unwrap();
        let cloud: DipoleCloud = generate_cloud(&geom, &model, Placement::Disordered { seed, r_min: 0.1 }, 0).unwrap();
        let atom = geom.atom_site(nanoqed::medium::AtomPlacement::Radial, rho).unwrap();
        let nearest = cloud.positions.iter().map(|p| (p - atom).norm()).fold(f64::INFINITY, f64::min);
        prop_assert!(nearest >= rho - 1.6 - 1e-12);
        prop_assert!(atom == Vector3::new(rho, 0.0, 0.0));
    }
}
