//! Placement of medium scatterers inside a geometry.

use std::collections::HashMap;

use nalgebra::Vector3;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::Geometry;
use super::permittivity::MediumModel;
use crate::error::{Error, Result};

/// Default hard-core exclusion radius for disordered placement.
pub const DEFAULT_R_MIN: f64 = 0.1;

const ATTEMPTS_PER_SCATTERER: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Placement {
    /// Axis-aligned cubic lattice of spacing `n0^{-1/3}` through the origin.
    OrderedLattice,
    /// Uniform random placement with a hard core of radius `r_min`.
    Disordered { seed: u64, r_min: f64 },
}

impl Placement {
    pub fn is_disordered(&self) -> bool {
        matches!(self, Placement::Disordered { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DipoleCloud {
    pub positions: Vec<Vector3<f64>>,
    pub model: MediumModel,
    pub placement: Placement,
    pub realization_index: u64,
}

impl DipoleCloud {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Cloud with no scatterers (free atom).
    pub fn empty(model: MediumModel) -> Self {
        DipoleCloud { positions: Vec::new(), model, placement: Placement::OrderedLattice, realization_index: 0 }
    }

    /// Cloud with explicit positions.
    pub fn from_positions(positions: Vec<Vector3<f64>>, model: MediumModel) -> Self {
        DipoleCloud { positions, model, placement: Placement::OrderedLattice, realization_index: 0 }
    }

    /// Mirror image through the plane `y = 0`.
    pub fn reflected_y(&self) -> Self {
        let mut out = self.clone();
        for p in &mut out.positions {
            p.y = -p.y;
        }
        out
    }

    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.positions.iter().enumerate() {
            for b in &self.positions[i + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }
}

/// Number of scatterers a disordered cloud in `geom` receives.
pub fn expected_count(geom: &Geometry, model: &MediumModel) -> Result<usize> {
    let volume = geom.volume();
    if !volume.is_finite() {
        return Err(Error::Geometry(format!("cannot fill the unbounded {} with scatterers", geom.kind())));
    }
    Ok((model.n0 * volume).round() as usize)
}

/// Deterministic cloud for `(geometry, placement, realization_index)`.
pub fn generate_cloud(geom: &Geometry, model: &MediumModel, placement: Placement, realization_index: u64) -> Result<DipoleCloud> {
    geom.validate()?;
    let bbox = geom
        .bounding_box()
        .ok_or_else(|| Error::Geometry(format!("cannot fill the unbounded {} with scatterers", geom.kind())))?;
    if model.n0 * geom.volume() < 1.0 {
        return Err(Error::Geometry(format!(
            "n0 V = {:.3} is below one scatterer",
            model.n0 * geom.volume()
        )));
    }
    let positions = match placement {
        Placement::OrderedLattice => {
            let s = model.lattice_spacing();
            let lo = bbox.min.map(|v| (v / s).floor() as i64);
            let hi = bbox.max.map(|v| (v / s).ceil() as i64);
            let mut out = Vec::new();
            for i in lo.x..=hi.x {
                for j in lo.y..=hi.y {
                    for k in lo.z..=hi.z {
                        let p = Vector3::new(i as f64, j as f64, k as f64) * s;
                        if geom.contains(&p) {
                            out.push(p);
                        }
                    }
                }
            }
            out
        }
        Placement::Disordered { seed, r_min } => {
            if !(r_min >= 0.0) {
                return Err(Error::Config(format!("r_min must be non-negative, got {r_min}")));
            }
            let n = expected_count(geom, model)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(realization_index);
            place_disordered(geom, bbox.min, bbox.max, n, r_min, &mut rng)?
        }
    };
    Ok(DipoleCloud { positions, model: *model, placement, realization_index })
}

fn place_disordered(
    geom: &Geometry,
    lo: Vector3<f64>,
    hi: Vector3<f64>,
    n: usize,
    r_min: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vector3<f64>>> {
    let cell = if r_min > 0.0 { r_min } else { 1.0 };
    let key = |p: &Vector3<f64>| {
        (((p.x - lo.x) / cell).floor() as i64, ((p.y - lo.y) / cell).floor() as i64, ((p.z - lo.z) / cell).floor() as i64)
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let mut out: Vec<Vector3<f64>> = Vec::with_capacity(n);
    let max_attempts = ATTEMPTS_PER_SCATTERER * n.max(1);
    let r_min_sq = r_min * r_min;
    let mut attempts = 0;
    while out.len() < n {
        if attempts == max_attempts {
            return Err(Error::Placement { attempts, placed: out.len(), requested: n });
        }
        attempts += 1;
        let p = Vector3::from_fn(|i, _| lo[i] + (hi[i] - lo[i]) * rng.random::<f64>());
        if !geom.contains(&p) {
            continue;
        }
        let (cx, cy, cz) = key(&p);
        let clash = r_min > 0.0
            && (-1..=1).any(|dx| {
                (-1..=1).any(|dy| {
                    (-1..=1).any(|dz| {
                        grid.get(&(cx + dx, cy + dy, cz + dz))
                            .is_some_and(|ids| ids.iter().any(|&i| (out[i] - p).norm_squared() < r_min_sq))
                    })
                })
            });
        if clash {
            continue;
        }
        grid.entry((cx, cy, cz)).or_default().push(out.len());
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n0: f64) -> MediumModel {
        MediumModel::with_detuning(n0, 1.0, 100.0).unwrap()
    }

    #[test]
    fn box_count() {
        let geom = Geometry::Box { size: [2.0, 2.0, 2.0] };
        let cloud = generate_cloud(&geom, &model(5.0), Placement::Disordered { seed: 1, r_min: 0.1 }, 0).unwrap();
        assert_eq!(cloud.len(), 40);
        assert!(cloud.positions.iter().all(|p| geom.contains(p)));
        assert!(cloud.min_separation() >= 0.1);
    }

    #[test]
    fn same_seed_same_cloud() {
        let geom = Geometry::Cylinder { radius: 1.0, length: 3.0 };
        let p = Placement::Disordered { seed: 42, r_min: 0.1 };
        let a = generate_cloud(&geom, &model(5.0), p, 3).unwrap();
        let b = generate_cloud(&geom, &model(5.0), p, 3).unwrap();
        let c = generate_cloud(&geom, &model(5.0), p, 4).unwrap();
        assert_eq!(a.positions, b.positions);
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn ordered_lattice_is_clipped_and_mirror_symmetric() {
        let lambda_bar = 852.347 / (2.0 * std::f64::consts::PI);
        let geom = Geometry::Cylinder { radius: 200.0 / lambda_bar, length: 4.0 * 2.0 * std::f64::consts::PI };
        let cloud = generate_cloud(&geom, &model(20.0), Placement::OrderedLattice, 0).unwrap();
        let a = 200.0 / lambda_bar;
        assert!(cloud.positions.iter().all(|p| p.x * p.x + p.y * p.y <= a * a && p.z.abs() <= geom_half_length(&geom)));
        let mut mirrored: Vec<_> = cloud.reflected_y().positions.iter().map(|p| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]).collect();
        let mut original: Vec<_> = cloud.positions.iter().map(|p| [p.x.to_bits(), (p.y + 0.0).to_bits(), p.z.to_bits()]).collect();
        mirrored.iter_mut().for_each(|v| v[1] = (f64::from_bits(v[1]) + 0.0).to_bits());
        mirrored.sort();
        original.sort();
        assert_eq!(mirrored, original);
    }

    fn geom_half_length(geom: &Geometry) -> f64 {
        match geom {
            Geometry::Cylinder { length, .. } => length / 2.0,
            _ => unreachable!(),
        }
    }

    #[test]
    fn overcrowded_placement_fails() {
        let geom = Geometry::Box { size: [1.0, 1.0, 1.0] };
        let err = generate_cloud(&geom, &model(200.0), Placement::Disordered { seed: 0, r_min: 0.3 }, 0).unwrap_err();
        assert!(matches!(err, Error::Placement { .. }));
    }

    #[test]
    fn half_space_cannot_be_filled() {
        assert!(generate_cloud(&Geometry::HalfSpace, &model(1.0), Placement::OrderedLattice, 0).is_err());
    }
}
