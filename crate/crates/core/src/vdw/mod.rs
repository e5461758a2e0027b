//! Static van der Waals shift of the ground-state atom from the macroscopic
//! volume formula
//!
//! ```text
//! Delta(r) = -(3 / 4 pi) (eps - 1)/(eps + 2) S \int_V d^3r' |r - r'|^{-6}
//! ```
//!
//! with `S = sum_n |d_nm|^2` over the excited manifold. The shift is an upper
//! bound on the magnitude of the true ground-state interaction.
//!
//! The volume integral is taken in spherical coordinates around the atom:
//! the radial part is exact along each ray (`(t1^-3 - t2^-3)/3` per segment
//! inside the body) and the two angles are integrated adaptively.

pub mod quadrature;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::angular::{dipole_matrix, TransitionScheme};
use crate::error::{Error, Result};
use crate::medium::{Aabb, Geometry};
use quadrature::{integrate, Estimate};

pub const DEFAULT_QUAD_TOL: f64 = 1e-7;
const MAX_PIECES: usize = 4000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VdwSpec {
    pub eps: f64,
    pub dipole_sq_sum: f64,
    pub geometry: Geometry,
    pub quad_tol: f64,
}

impl VdwSpec {
    pub fn new(eps: f64, dipole_sq_sum: f64, geometry: Geometry, quad_tol: f64) -> Result<Self> {
        if !(eps > 1.0) {
            return Err(Error::Vdw(format!("dielectric constant must exceed 1, got {eps}")));
        }
        if !(dipole_sq_sum > 0.0) {
            return Err(Error::Vdw(format!("dipole sum must be positive, got {dipole_sq_sum}")));
        }
        if !(quad_tol > 0.0) {
            return Err(Error::Vdw(format!("quadrature tolerance must be positive, got {quad_tol}")));
        }
        geometry.validate()?;
        Ok(VdwSpec { eps, dipole_sq_sum, geometry, quad_tol })
    }

    pub fn prefactor(&self) -> f64 {
        -3.0 / (4.0 * std::f64::consts::PI) * (self.eps - 1.0) / (self.eps + 2.0) * self.dipole_sq_sum
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VdwResult {
    /// Shift in units of the free-space linewidth.
    pub shift: f64,
    pub error_estimate: f64,
    pub integral: f64,
    pub integral_error: f64,
}

/// `sum_n |d_nm|^2` for a ground sublevel, from the dipole table.
pub fn dipole_sq_sum(scheme: &TransitionScheme) -> Result<f64> {
    let sums = dipole_matrix(scheme)?.ground_sums();
    let first = sums[0];
    if sums.iter().any(|s| (s - first).abs() > 1e-12 * first) {
        return Err(Error::Vdw("ground sublevels have unequal dipole sums".into()));
    }
    Ok(first)
}

/// Convex piece of a body; the volume integral is additive over pieces.
enum Part<'a> {
    Whole(&'a Geometry),
    Block(Aabb),
}

impl Part<'_> {
    fn ray_intervals(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Vec<(f64, f64)> {
        match self {
            Part::Whole(g) => g.ray_intervals(origin, dir),
            Part::Block(b) => b.ray_interval(origin, dir).into_iter().collect(),
        }
    }

    /// Center and radius of a sphere enclosing the piece.
    fn bounding_sphere(&self) -> Option<(Vector3<f64>, f64)> {
        let b = match self {
            Part::Whole(Geometry::HalfSpace) => return None,
            Part::Whole(Geometry::Cylinder { radius, length }) => {
                return Some((Vector3::zeros(), radius.hypot(length / 2.0)));
            }
            Part::Whole(g) => g.bounding_box_unchecked(),
            Part::Block(b) => *b,
        };
        Some(((b.min + b.max) / 2.0, (b.max - b.min).norm() / 2.0))
    }
}

fn parts(geometry: &Geometry) -> Vec<Part<'_>> {
    match geometry {
        Geometry::CombPcw { .. } => geometry.comb_boxes().into_iter().map(Part::Block).collect(),
        _ => vec![Part::Whole(geometry)],
    }
}

/// Unit vectors completing `w` to a right-handed frame.
fn frame(w: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if w.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = w.cross(&helper).normalize();
    (e1, w.cross(&e1))
}

fn part_integral(part: &Part<'_>, position: &Vector3<f64>, rel_tol: f64, abs_floor: f64) -> Estimate {
    // polar axis towards the piece, restricted to the cone that contains it
    let (axis, theta_max) = match part.bounding_sphere() {
        Some((center, radius)) => {
            let to_center = center - position;
            let dist = to_center.norm();
            if dist > radius * (1.0 + 1e-9) {
                (to_center / dist, (radius / dist).asin() * (1.0 + 1e-12))
            } else {
                (if dist > 0.0 { to_center / dist } else { -Vector3::x() }, std::f64::consts::PI)
            }
        }
        None => (-Vector3::x(), std::f64::consts::PI),
    };
    let (e1, e2) = frame(&axis);
    let direction = |theta: f64, phi: f64| axis * theta.cos() + (e1 * phi.cos() + e2 * phi.sin()) * theta.sin();
    let radial = |theta: f64, phi: f64| -> f64 {
        let solid = theta.sin();
        part.ray_intervals(position, &direction(theta, phi))
            .iter()
            .map(|&(t1, t2)| {
                let far = if t2.is_finite() { t2.powi(-3) } else { 0.0 };
                solid * (t1.powi(-3) - far) / 3.0
            })
            .sum()
    };
    let hits = |theta: f64, phi: f64| !part.ray_intervals(position, &direction(theta, phi)).is_empty();
    // the axis points into the piece, so every meridian meets it in one run from theta = 0
    let inner_tol = 0.1 * rel_tol;
    integrate_edges(
        |phi| {
            support(|theta| hits(theta, phi), 0.0, theta_max, false).into_iter().fold(
                Estimate { value: 0.0, error: 0.0 },
                |acc, (t0, t1)| {
                    let e = integrate_edges(|theta| Estimate { value: radial(theta, phi), error: 0.0 }, t0, t1, 0.1 * abs_floor, inner_tol);
                    Estimate { value: acc.value + e.value, error: acc.error + e.error }
                },
            )
        },
        0.0,
        2.0 * std::f64::consts::PI,
        abs_floor,
        rel_tol,
    )
}

/// Adaptive quadrature over `[a, b]` after the substitution
/// `x = mid + half (3s - s^3) / 2`, which makes square-root edges smooth.
fn integrate_edges(f: impl Fn(f64) -> Estimate, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Estimate {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    integrate(
        |s| {
            let e = f(mid + half * (3.0 * s - s * s * s) / 2.0);
            let jac = half * 1.5 * (1.0 - s * s);
            Estimate { value: e.value * jac, error: e.error * jac.abs() }
        },
        -1.0,
        1.0,
        abs_tol,
        rel_tol,
        MAX_PIECES,
    )
}

const SUPPORT_SAMPLES: usize = 32;
const EDGE_BISECTIONS: usize = 40;

/// Sub-intervals of `[a, b]` where `inside` holds, with edges located by
/// bisection. With `periodic`, a run wrapping past `b` is returned as one
/// interval extending beyond `b`.
fn support(inside: impl Fn(f64) -> bool, a: f64, b: f64, periodic: bool) -> Vec<(f64, f64)> {
    let n = SUPPORT_SAMPLES;
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let flags: Vec<bool> = xs.iter().map(|&x| inside(x)).collect();
    if flags.iter().all(|&f| f) {
        return vec![(a, b)];
    }
    if !flags.iter().any(|&f| f) {
        return Vec::new();
    }
    let edge = |lo: f64, hi: f64, lo_inside: bool| {
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..EDGE_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if inside(mid) == lo_inside {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo_inside { lo } else { hi }
    };
    let mut runs = Vec::new();
    let mut i = 0;
    while i <= n {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = if i == 0 { a } else { edge(xs[i - 1], xs[i], false) };
        let mut j = i;
        while j < n && flags[j + 1] {
            j += 1;
        }
        let end = if j == n { b } else { edge(xs[j], xs[j + 1], true) };
        runs.push((start, end));
        i = j + 1;
    }
    if periodic && runs.len() > 1 && flags[0] && flags[n] {
        let first = runs.remove(0);
        let last = runs.last_mut().expect("at least one run");
        last.1 = b + (first.1 - a);
    }
    runs
}

/// `\int_V |r - r'|^{-6} d^3r'` for `r` outside the body.
pub fn volume_integral(geometry: &Geometry, position: &Vector3<f64>, rel_tol: f64) -> Result<Estimate> {
    if geometry.contains(position) || !(geometry.distance_to_surface(position) > 0.0) {
        return Err(Error::Vdw("position is inside or on the surface of the body".into()));
    }
    let pieces = parts(geometry);
    // a coarse pass sets the absolute scale below which pieces need no refinement
    let coarse: f64 = pieces.iter().map(|p| part_integral(p, position, 1e-3, 0.0).value).sum();
    let floor = 0.1 * rel_tol * coarse.abs() / pieces.len() as f64;
    let mut total = Estimate { value: 0.0, error: 0.0 };
    for p in &pieces {
        let e = part_integral(p, position, 0.1 * rel_tol, floor);
        total.value += e.value;
        total.error += e.error;
    }
    Ok(total)
}

/// Shift of the ground state at `position` (reduced units).
pub fn vdw_shift(spec: &VdwSpec, position: &Vector3<f64>) -> Result<VdwResult> {
    let est = volume_integral(&spec.geometry, position, spec.quad_tol)?;
    let pre = spec.prefactor();
    Ok(VdwResult { shift: pre * est.value, error_estimate: (pre * est.error).abs(), integral: est.value, integral_error: est.error })
}

/// Image-dipole energy of the atom at height `z` above a flat surface,
/// `U = -(eps - 1)/(eps + 1) S / (12 z^3)`.
pub fn image_potential_flat(eps: f64, dipole_sq_sum: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Vdw(format!("height must be positive, got {z}")));
    }
    Ok(-(eps - 1.0) / (eps + 1.0) * dipole_sq_sum / (12.0 * z.powi(3)))
}

/// Closed-form half-space shift, `-(eps - 1) S / (8 (eps + 2) z^3)`.
pub fn half_space_shift(eps: f64, dipole_sq_sum: f64, z: f64) -> f64 {
    -(eps - 1.0) * dipole_sq_sum / (8.0 * (eps + 2.0) * z.powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dipole_sums_follow_multiplicity_ratio() {
        assert_relative_eq!(dipole_sq_sum(&TransitionScheme::rb87_f0_f1()).unwrap(), 0.25, max_relative = 1e-14);
        assert_relative_eq!(dipole_sq_sum(&TransitionScheme::cs133_f5_f4()).unwrap(), 0.75 * 11.0 / 9.0, max_relative = 1e-14);
    }

    #[test]
    fn half_space_integral() {
        let z = 1.3;
        let est = volume_integral(&Geometry::HalfSpace, &Vector3::new(z, 0.0, 0.0), 1e-8).unwrap();
        assert_relative_eq!(est.value, std::f64::consts::PI / (6.0 * z.powi(3)), max_relative = 1e-8);
    }

    #[test]
    fn inside_rejected() {
        assert!(volume_integral(&Geometry::HalfSpace, &Vector3::new(-0.1, 0.0, 0.0), 1e-6).is_err());
        assert!(volume_integral(&Geometry::HalfSpace, &Vector3::new(0.0, 0.0, 0.0), 1e-6).is_err());
    }

    #[test]
    fn dilute_limit_matches_image() {
        let eps = 1.0 + 1e-6;
        let spec = VdwSpec::new(eps, 0.75, Geometry::HalfSpace, 1e-8).unwrap();
        let z = 2.0;
        let shift = vdw_shift(&spec, &Vector3::new(z, 0.0, 0.0)).unwrap().shift;
        assert_relative_eq!(shift, image_potential_flat(eps, 0.75, z).unwrap(), max_relative = 1e-5);
    }
}
