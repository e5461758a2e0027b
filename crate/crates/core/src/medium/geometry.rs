//! Dielectric shapes in reduced units.
//!
//! Every shape presents its outer surface towards `+x`; the reference atom is
//! placed on that side. The waveguide axis is `z`.
//!
//! * `Cylinder`: axis `z`, centered at the origin.
//! * `CombPcw`: backbone `x in [-b, 0]`, teeth `x in [0, h]` centered at
//!   `z = k a`, both with `|y| <= t/2`; tooth tips lie in the plane `x = h`.
//! * `Slab`: `x in [-thickness, 0]`, lateral extents centered on the origin.
//! * `HalfSpace`: `x <= 0`.
//! * `Box`: centered at the origin.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|i| p[i] > self.min[i] && p[i] < self.max[i])
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|i| (self.max[i] - self.min[i]).max(0.0)).product()
    }

    /// Parameter interval `[t0, t1]` (with `t0 >= 0`) of the ray inside the box.
    pub fn ray_interval(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<(f64, f64)> {
        let mut t0 = 0.0f64;
        let mut t1 = f64::INFINITY;
        for i in 0..3 {
            if dir[i] == 0.0 {
                if origin[i] <= self.min[i] || origin[i] >= self.max[i] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[i];
            let (mut a, mut b) = ((self.min[i] - origin[i]) * inv, (self.max[i] - origin[i]) * inv);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 >= t1 {
                return None;
            }
        }
        Some((t0, t1))
    }

    /// Distance from `p` to the box (zero inside).
    pub fn distance(&self, p: &Vector3<f64>) -> f64 {
        let d = Vector3::from_fn(|i, _| (self.min[i] - p[i]).max(0.0).max(p[i] - self.max[i]));
        d.norm()
    }
}

/// Nanostructure shape, lengths in reduced wavelengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Geometry {
    Cylinder { radius: f64, length: f64 },
    CombPcw { period: f64, tooth_height: f64, tooth_width: f64, backbone_width: f64, backbone_thickness: f64, length: f64 },
    Slab { thickness: f64, extent_y: f64, extent_z: f64 },
    HalfSpace,
    Box { size: [f64; 3] },
}

/// Where the reference atom sits relative to the structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtomPlacement {
    /// Cylinder: on the x axis at radial coordinate `rho = distance`.
    Radial,
    /// Comb: facing the central tooth, `distance` beyond the tooth tips.
    BehindTooth,
    /// Comb: facing the gap between the two central teeth.
    BetweenTeeth,
    /// Slab, half-space or box: `distance` beyond the `+x` face.
    Facing,
}

impl AtomPlacement {
    pub fn parse(label: &str) -> Result<Self> {
        match label {
            "radial" => Ok(Self::Radial),
            "behind-tooth" => Ok(Self::BehindTooth),
            "between-teeth" => Ok(Self::BetweenTeeth),
            "facing" => Ok(Self::Facing),
            other => Err(Error::AtomSite(format!("unknown placement label {other:?}"))),
        }
    }
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(Error::Geometry(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            Geometry::Cylinder { radius, length } => {
                positive("radius", *radius)?;
                positive("length", *length)
            }
            Geometry::CombPcw { period, tooth_height, tooth_width, backbone_width, backbone_thickness, length } => {
                positive("period", *period)?;
                positive("tooth height", *tooth_height)?;
                positive("tooth width", *tooth_width)?;
                positive("backbone width", *backbone_width)?;
                positive("backbone thickness", *backbone_thickness)?;
                positive("length", *length)?;
                if tooth_width >= period {
                    return Err(Error::Geometry("tooth width must be smaller than the period".into()));
                }
                Ok(())
            }
            Geometry::Slab { thickness, extent_y, extent_z } => {
                positive("thickness", *thickness)?;
                positive("extent_y", *extent_y)?;
                positive("extent_z", *extent_z)
            }
            Geometry::HalfSpace => Ok(()),
            Geometry::Box { size } => size.iter().try_for_each(|s| positive("box size", *s)),
        }
    }

    /// Comb with the default proportions `h = 1.5a`, `w = 0.5a`, backbone
    /// width `a` and thickness `1.5a`, spanning `periods` periods.
    pub fn comb(period: f64, periods: usize) -> Self {
        Geometry::CombPcw {
            period,
            tooth_height: 1.5 * period,
            tooth_width: 0.5 * period,
            backbone_width: period,
            backbone_thickness: 1.5 * period,
            length: period * periods as f64,
        }
    }

    /// Axis-aligned boxes with disjoint interiors whose union is the comb.
    pub fn comb_boxes(&self) -> Vec<Aabb> {
        let Geometry::CombPcw { period, tooth_height, tooth_width, backbone_width, backbone_thickness, length } = *self else {
            return Vec::new();
        };
        let half_t = backbone_thickness / 2.0;
        let half_l = length / 2.0;
        let mut boxes = vec![Aabb {
            min: Vector3::new(-backbone_width, -half_t, -half_l),
            max: Vector3::new(0.0, half_t, half_l),
        }];
        let k_max = ((half_l + tooth_width / 2.0) / period).floor() as i64;
        for k in -k_max..=k_max {
            let zc = k as f64 * period;
            let z0 = (zc - tooth_width / 2.0).max(-half_l);
            let z1 = (zc + tooth_width / 2.0).min(half_l);
            if z1 > z0 {
                boxes.push(Aabb { min: Vector3::new(0.0, -half_t, z0), max: Vector3::new(tooth_height, half_t, z1) });
            }
        }
        boxes
    }

    /// Strict interior test.
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        match self {
            Geometry::Cylinder { radius, length } => p.x * p.x + p.y * p.y < radius * radius && p.z.abs() < length / 2.0,
            Geometry::CombPcw { .. } => self.comb_boxes().iter().any(|b| b.contains(p)),
            Geometry::Slab { thickness, extent_y, extent_z } => {
                p.x < 0.0 && p.x > -thickness && p.y.abs() < extent_y / 2.0 && p.z.abs() < extent_z / 2.0
            }
            Geometry::HalfSpace => p.x < 0.0,
            Geometry::Box { size } => (0..3).all(|i| p[i].abs() < size[i] / 2.0),
        }
    }

    /// Finite bounding box, or `None` for unbounded shapes.
    pub fn bounding_box(&self) -> Option<Aabb> {
        let b = match self {
            Geometry::Cylinder { radius, length } => Aabb {
                min: Vector3::new(-radius, -radius, -length / 2.0),
                max: Vector3::new(*radius, *radius, length / 2.0),
            },
            Geometry::CombPcw { tooth_height, backbone_width, backbone_thickness, length, .. } => Aabb {
                min: Vector3::new(-backbone_width, -backbone_thickness / 2.0, -length / 2.0),
                max: Vector3::new(*tooth_height, backbone_thickness / 2.0, length / 2.0),
            },
            Geometry::Slab { thickness, extent_y, extent_z } => Aabb {
                min: Vector3::new(-thickness, -extent_y / 2.0, -extent_z / 2.0),
                max: Vector3::new(0.0, extent_y / 2.0, extent_z / 2.0),
            },
            Geometry::HalfSpace => return None,
            Geometry::Box { size } => Aabb {
                min: Vector3::new(-size[0] / 2.0, -size[1] / 2.0, -size[2] / 2.0),
                max: Vector3::new(size[0] / 2.0, size[1] / 2.0, size[2] / 2.0),
            },
        };
        if (0..3).all(|i| b.min[i].is_finite() && b.max[i].is_finite()) {
            Some(b)
        } else {
            None
        }
    }

    /// Volume in reduced wavelengths cubed (infinite for unbounded shapes).
    pub fn volume(&self) -> f64 {
        match self {
            Geometry::Cylinder { radius, length } => std::f64::consts::PI * radius * radius * length,
            Geometry::CombPcw { .. } => self.comb_boxes().iter().map(Aabb::volume).sum(),
            Geometry::Slab { thickness, extent_y, extent_z } => thickness * extent_y * extent_z,
            Geometry::HalfSpace => f64::INFINITY,
            Geometry::Box { size } => size.iter().product(),
        }
    }

    /// Sorted, disjoint parameter intervals where the ray
    /// `origin + t dir` (`t >= 0`, `|dir| = 1`) is inside the shape.
    pub fn ray_intervals(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Vec<(f64, f64)> {
        match self {
            Geometry::Cylinder { radius, length } => {
                let slab = Aabb {
                    min: Vector3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, -length / 2.0),
                    max: Vector3::new(f64::INFINITY, f64::INFINITY, length / 2.0),
                };
                let Some((z0, z1)) = slab.ray_interval(origin, dir) else {
                    return Vec::new();
                };
                let a = dir.x * dir.x + dir.y * dir.y;
                if a == 0.0 {
                    return if origin.x * origin.x + origin.y * origin.y < radius * radius { vec![(z0, z1)] } else { Vec::new() };
                }
                let b = origin.x * dir.x + origin.y * dir.y;
                let c = origin.x * origin.x + origin.y * origin.y - radius * radius;
                let disc = b * b - a * c;
                if disc <= 0.0 {
                    return Vec::new();
                }
                let sq = disc.sqrt();
                // stable roots of a t^2 + 2 b t + c
                let q = -(b + b.signum() * sq);
                let (mut r0, mut r1) = (q / a, c / q);
                if r0 > r1 {
                    std::mem::swap(&mut r0, &mut r1);
                }
                let t0 = r0.max(z0).max(0.0);
                let t1 = r1.min(z1);
                if t1 > t0 {
                    vec![(t0, t1)]
                } else {
                    Vec::new()
                }
            }
            Geometry::CombPcw { .. } => {
                let mut spans: Vec<(f64, f64)> =
                    self.comb_boxes().iter().filter_map(|b| b.ray_interval(origin, dir)).collect();
                merge_intervals(&mut spans)
            }
            Geometry::HalfSpace => {
                if dir.x < 0.0 {
                    vec![((-origin.x / dir.x).max(0.0), f64::INFINITY)]
                } else if origin.x < 0.0 {
                    vec![(0.0, f64::INFINITY)]
                } else {
                    Vec::new()
                }
            }
            Geometry::Slab { .. } | Geometry::Box { .. } => {
                let b = self.bounding_box_unchecked();
                b.ray_interval(origin, dir).into_iter().collect()
            }
        }
    }

    /// Bounding box of slabs and boxes (finite by construction).
    pub fn bounding_box_unchecked(&self) -> Aabb {
        match self {
            Geometry::Slab { thickness, extent_y, extent_z } => Aabb {
                min: Vector3::new(-thickness, -extent_y / 2.0, -extent_z / 2.0),
                max: Vector3::new(0.0, extent_y / 2.0, extent_z / 2.0),
            },
            _ => self.bounding_box().expect("bounded shape"),
        }
    }

    /// Distance from an exterior point to the surface (zero inside).
    pub fn distance_to_surface(&self, p: &Vector3<f64>) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        match self {
            Geometry::Cylinder { radius, length } => {
                let radial = ((p.x * p.x + p.y * p.y).sqrt() - radius).max(0.0);
                let axial = (p.z.abs() - length / 2.0).max(0.0);
                radial.hypot(axial)
            }
            Geometry::CombPcw { .. } => self.comb_boxes().iter().map(|b| b.distance(p)).fold(f64::INFINITY, f64::min),
            Geometry::HalfSpace => p.x.max(0.0),
            Geometry::Slab { .. } | Geometry::Box { .. } => self.bounding_box_unchecked().distance(p),
        }
    }

    /// Position of the reference atom for a placement label at `distance`.
    ///
    /// For the cylinder `distance` is the radial coordinate `rho`; for every
    /// other shape it is the gap to the facing surface.
    pub fn atom_site(&self, placement: AtomPlacement, distance: f64) -> Result<Vector3<f64>> {
        if !(distance > 0.0) || !distance.is_finite() {
            return Err(Error::AtomSite(format!("distance must be positive, got {distance}")));
        }
        let site = match (self, placement) {
            (Geometry::Cylinder { radius, .. }, AtomPlacement::Radial) => {
                if distance <= *radius {
                    return Err(Error::AtomSite(format!("rho = {distance} lies inside the cylinder of radius {radius}")));
                }
                Vector3::new(distance, 0.0, 0.0)
            }
            (Geometry::CombPcw { tooth_height, .. }, AtomPlacement::BehindTooth) => Vector3::new(tooth_height + distance, 0.0, 0.0),
            (Geometry::CombPcw { tooth_height, period, .. }, AtomPlacement::BetweenTeeth) => {
                Vector3::new(tooth_height + distance, 0.0, period / 2.0)
            }
            (Geometry::Slab { .. } | Geometry::HalfSpace, AtomPlacement::Facing) => Vector3::new(distance, 0.0, 0.0),
            (Geometry::Box { size }, AtomPlacement::Facing) => Vector3::new(size[0] / 2.0 + distance, 0.0, 0.0),
            (geom, placement) => {
                return Err(Error::AtomSite(format!("placement {placement:?} is not defined for {}", geom.kind())));
            }
        };
        Ok(site)
    }

    /// Placement used when none is configured.
    pub fn default_placement(&self) -> AtomPlacement {
        match self {
            Geometry::Cylinder { .. } => AtomPlacement::Radial,
            Geometry::CombPcw { .. } => AtomPlacement::BehindTooth,
            _ => AtomPlacement::Facing,
        }
    }

    /// Local symmetry axis used to label eigenstates: the normal of the
    /// mirror plane spanned by the waveguide axis and the atom.
    pub fn symmetry_axis(&self) -> [f64; 3] {
        [0.0, 1.0, 0.0]
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Geometry::Cylinder { .. } => "cylinder",
            Geometry::CombPcw { .. } => "comb-pcw",
            Geometry::Slab { .. } => "slab",
            Geometry::HalfSpace => "half-space",
            Geometry::Box { .. } => "box",
        }
    }

    /// Characteristic transverse size used to scale distances in reports
    /// (cylinder radius, comb period, otherwise 1).
    pub fn scale(&self) -> f64 {
        match self {
            Geometry::Cylinder { radius, .. } => *radius,
            Geometry::CombPcw { period, .. } => *period,
            _ => 1.0,
        }
    }
}

fn merge_intervals(spans: &mut Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
    for &(a, b) in spans.iter() {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}
