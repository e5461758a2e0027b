use approx::assert_relative_eq;
use nalgebra::Vector3;
use proptest::prelude::*;

use nanoqed::angular::TransitionScheme;
use nanoqed::medium::Geometry;
use nanoqed::vdw::{dipole_sq_sum, half_space_shift, image_potential_flat, vdw_shift, volume_integral, VdwSpec, DEFAULT_QUAD_TOL};

const LAMBDA_BAR_NM: f64 = 780.241 / (2.0 * std::f64::consts::PI);

// Arbitrary-precision cubature of |r - r'|^-6 over a cylinder of radius 1.6
// and length 12.6, seen from (2.4, 0, 0).
const CYLINDER_REFERENCE: f64 = 0.733059787297877543745918789724;

// Same integral over the cube [-1, 1]^3 from (2.5, 1.5, 0.2), where two faces
// are visible and the entry face changes across the cone.
const CUBE_REFERENCE: f64 = 0.0246182363631046190538994466488;

fn cylinder() -> Geometry {
    Geometry::Cylinder { radius: 1.6, length: 12.6 }
}

#[test]
fn half_space_at_optical_distances() {
    for z_nm in [100.0, 200.0, 400.0] {
        let z = z_nm / LAMBDA_BAR_NM;
        let est = volume_integral(&Geometry::HalfSpace, &Vector3::new(z, 0.0, 0.0), 1e-9).unwrap();
        assert_relative_eq!(est.value, std::f64::consts::PI / (6.0 * z.powi(3)), max_relative = 1e-6);
        let spec = VdwSpec::new(2.1025, 0.25, Geometry::HalfSpace, 1e-9).unwrap();
        let shift = vdw_shift(&spec, &Vector3::new(z, 0.0, 0.0)).unwrap().shift;
        assert_relative_eq!(shift, half_space_shift(2.1025, 0.25, z), max_relative = 1e-6);
    }
}

#[test]
fn dilute_limit_agrees_with_image_dipole() {
    let eps = 1.0 + 1e-4;
    let z = 200.0 / LAMBDA_BAR_NM;
    let spec = VdwSpec::new(eps, 0.25, Geometry::HalfSpace, 1e-9).unwrap();
    let micro = vdw_shift(&spec, &Vector3::new(z, 0.0, 0.0)).unwrap().shift;
    let image = image_potential_flat(eps, 0.25, z).unwrap();
    assert_relative_eq!(micro, image, max_relative = 1e-4);
}

#[test]
fn image_to_microscopic_ratio_away_from_the_dilute_limit() {
    for eps in [1.5, 2.1025, 10.9561] {
        let z = 0.9;
        let spec = VdwSpec::new(eps, 0.75, Geometry::HalfSpace, 1e-9).unwrap();
        let micro = vdw_shift(&spec, &Vector3::new(z, 0.0, 0.0)).unwrap().shift;
        let image = image_potential_flat(eps, 0.75, z).unwrap();
        assert_relative_eq!(image / micro, 2.0 * (eps + 2.0) / (3.0 * (eps + 1.0)), max_relative = 1e-6);
    }
}

#[test]
fn cylinder_matches_reference_cubature() {
    let est = volume_integral(&cylinder(), &Vector3::new(2.4, 0.0, 0.0), 1e-9).unwrap();
    assert_relative_eq!(est.value, CYLINDER_REFERENCE, max_relative = 1e-8);
    assert!(est.error < 1e-8 * est.value);
}

#[test]
fn off_axis_cube_matches_reference_cubature() {
    let est = volume_integral(&Geometry::Box { size: [2.0, 2.0, 2.0] }, &Vector3::new(2.5, 1.5, 0.2), 1e-9).unwrap();
    assert_relative_eq!(est.value, CUBE_REFERENCE, max_relative = 1e-8);
}

#[test]
fn box_integral_is_additive() {
    let p = Vector3::new(2.5, 0.3, 0.2);
    let whole = volume_integral(&Geometry::Box { size: [2.0, 2.0, 2.0] }, &p, 1e-9).unwrap().value;
    let half = Geometry::Box { size: [1.0, 2.0, 2.0] };
    let near = volume_integral(&half, &(p - Vector3::new(0.5, 0.0, 0.0)), 1e-9).unwrap().value;
    let far = volume_integral(&half, &(p + Vector3::new(0.5, 0.0, 0.0)), 1e-9).unwrap().value;
    assert_relative_eq!(whole, near + far, max_relative = 1e-8);
}

#[test]
fn tighter_tolerance_stays_within_the_error_estimate() {
    let comb = Geometry::comb(2.4, 3);
    let comb_site = comb.atom_site(nanoqed::medium::AtomPlacement::BetweenTeeth, 0.5).unwrap();
    for (geom, p) in [(cylinder(), Vector3::new(2.4, 0.0, 0.0)), (comb, comb_site)] {
        let coarse = volume_integral(&geom, &p, 1e-6).unwrap();
        let fine = volume_integral(&geom, &p, 5e-7).unwrap();
        assert!((coarse.value - fine.value).abs() <= coarse.error.max(1e-12 * coarse.value), "{}", geom.kind());
    }
}

#[test]
fn attraction_weakens_with_distance_from_a_cylinder() {
    let spec = VdwSpec::new(2.1025, dipole_sq_sum(&TransitionScheme::cs133_f5_f4()).unwrap(), cylinder(), DEFAULT_QUAD_TOL).unwrap();
    let shifts: Vec<f64> = [1.8, 2.2, 2.8, 3.6, 5.0].iter().map(|&r| vdw_shift(&spec, &Vector3::new(r, 0.0, 0.0)).unwrap().shift).collect();
    assert!(shifts.iter().all(|s| *s < 0.0));
    assert!(shifts.windows(2).all(|w| w[0] < w[1]), "{shifts:?}");
}

#[test]
fn points_inside_are_rejected() {
    assert!(volume_integral(&cylinder(), &Vector3::new(1.0, 0.0, 0.0), 1e-6).is_err());
    assert!(VdwSpec::new(1.0, 0.75, cylinder(), 1e-6).is_err());
    assert!(VdwSpec::new(2.0, 0.75, cylinder(), 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn half_space_scales_as_inverse_cube(z in 0.2..5.0f64) {
        let est = volume_integral(&Geometry::HalfSpace, &Vector3::new(z, 0.0, 0.0), 1e-8).unwrap();
        prop_assert!((est.value * z.powi(3) / (std::f64::consts::PI / 6.0) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn box_is_bounded_by_the_half_space(gap in 0.2..2.0f64, y in -0.5..0.5f64, z in -0.5..0.5f64) {
        let p = Vector3::new(0.5 + gap, y, z);
        let boxed = volume_integral(&Geometry::Box { size: [1.0, 1.0, 1.0] }, &p, 1e-6).unwrap().value;
        let bound = std::f64::consts::PI / (6.0 * gap.powi(3));
        prop_assert!(boxed > 0.0 && boxed < bound);
    }
}
