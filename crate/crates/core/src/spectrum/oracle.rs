//! Brute-force check of the block-eliminated self-energy against the full
//! single-excitation resolvent.

use faer::linalg::solvers::Solve;
use faer::Mat;
use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::assemble::DEFAULT_MEMORY_BUDGET;
use super::self_energy::SelfEnergyEvaluator;
use crate::angular::{dipole_matrix, TransitionScheme};
use crate::error::{Error, Result};
use crate::greens::green_matrix;
use crate::medium::{DipoleCloud, MediumModel};

/// Largest cloud the oracle accepts.
pub const ORACLE_MAX_SCATTERERS: usize = 100;
/// Relative agreement required between the two routes.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// Self-energy from the dense `(n_e + n_g 3N)`-dimensional matrix
/// `E - H_eff` at `E = omega_0`: `Sigma = -(top-left block of its inverse)^{-1}`.
pub fn full_matrix_self_energy(
    scheme: &TransitionScheme,
    cloud: &DipoleCloud,
    atom: &Vector3<f64>,
    include_medium_linewidth: bool,
) -> Result<Mat<Complex64>> {
    let table = dipole_matrix(scheme)?;
    let (ne, ng) = (table.n_excited(), table.n_ground());
    let n = cloud.len();
    let dim = ne + ng * 3 * n;
    let model = &cloud.model;
    let f0 = model.f0_sq.sqrt();
    let mut m = Mat::<Complex64>::zeros(dim, dim);
    for i in 0..ne {
        m[(i, i)] = Complex64::new(0.0, 0.5);
    }
    // <n| d |m> for every q, evaluated straight from the spherical table
    let mut dvec = vec![vec![[Complex64::new(0.0, 0.0); 3]; ng]; ne];
    let fe = table.f_excited.doubled();
    let fg = table.f_ground.doubled();
    for el in &table.elements {
        let i = ((el.m_excited.doubled() + fe) / 2) as usize;
        let j = ((el.m_ground.doubled() + fg) / 2) as usize;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // d_q e_q^* summed into Cartesian components
        let cart = match el.q {
            -1 => [Complex64::new(s, 0.0), Complex64::new(0.0, s), Complex64::new(0.0, 0.0)],
            0 => [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            _ => [Complex64::new(-s, 0.0), Complex64::new(0.0, s), Complex64::new(0.0, 0.0)],
        };
        for mu in 0..3 {
            dvec[i][j][mu] += el.value * cart[mu];
        }
    }
    let idx = |g: usize, a: usize, e: usize| ne + g * 3 * n + 3 * a + e;
    for (a, ra) in cloud.positions.iter().enumerate() {
        let to_atom = green_matrix(&(atom - ra), 1.0);
        let from_atom = green_matrix(&(ra - atom), 1.0);
        for g in 0..ng {
            for e in 0..3 {
                for i in 0..ne {
                    let mut am = Complex64::new(0.0, 0.0);
                    let mut ma = Complex64::new(0.0, 0.0);
                    for mu in 0..3 {
                        am += dvec[i][g][mu] * to_atom[(mu, e)] * f0;
                        ma += f0 * from_atom[(e, mu)] * dvec[i][g][mu].conj();
                    }
                    m[(i, idx(g, a, e))] = -am;
                    m[(idx(g, a, e), i)] = -ma;
                }
            }
        }
        for (b, rb) in cloud.positions.iter().enumerate() {
            let block = if a == b {
                None
            } else {
                Some(green_matrix(&(ra - rb), 1.0))
            };
            for g in 0..ng {
                for e in 0..3 {
                    for f in 0..3 {
                        let v = match &block {
                            None if e == f => {
                                let mut d = Complex64::new(-model.delta_m, 0.0);
                                if include_medium_linewidth {
                                    d += Complex64::new(0.0, model.gamma_e / 2.0);
                                }
                                d
                            }
                            None => Complex64::new(0.0, 0.0),
                            Some(dab) => -model.f0_sq * dab[(e, f)],
                        };
                        m[(idx(g, a, e), idx(g, b, f))] = v;
                    }
                }
            }
        }
    }
    let lu = m.partial_piv_lu();
    let mut rhs = Mat::<Complex64>::zeros(dim, ne);
    for i in 0..ne {
        rhs[(i, i)] = Complex64::new(1.0, 0.0);
    }
    lu.solve_in_place(rhs.as_mut());
    let top = Mat::<Complex64>::from_fn(ne, ne, |i, j| rhs[(i, j)]);
    let mut inv = Mat::<Complex64>::identity(ne, ne);
    top.partial_piv_lu().solve_in_place(inv.as_mut());
    Ok(Mat::from_fn(ne, ne, |i, j| -inv[(i, j)]))
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleCase {
    pub scheme: String,
    pub n_scatterers: usize,
    pub include_medium_linewidth: bool,
    pub rel_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub cases: Vec<OracleCase>,
    pub max_rel_error: f64,
    pub passed: bool,
}

fn rel_diff(a: &Mat<Complex64>, b: &Mat<Complex64>) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            num += (a[(i, j)] - b[(i, j)]).norm_sqr();
            den += b[(i, j)].norm_sqr();
        }
    }
    (num / den).sqrt()
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, model: MediumModel) -> DipoleCloud {
    let mut pts: Vec<Vector3<f64>> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        if pts.iter().all(|q| (q - p).norm() > 0.2) {
            pts.push(p);
        }
    }
    DipoleCloud::from_positions(pts, model)
}

/// Compares the fast path with the full-matrix route on random instances,
/// cycling through the preset transitions. Instance 0 is the free atom.
pub fn run_oracle(instances: usize, max_scatterers: usize, seed: u64, corrupt_coupling_sign: bool) -> Result<OracleReport> {
    if max_scatterers > ORACLE_MAX_SCATTERERS {
        return Err(Error::Config(format!("oracle instances are capped at {ORACLE_MAX_SCATTERERS} scatterers")));
    }
    let schemes: Vec<TransitionScheme> =
        TransitionScheme::PRESETS.iter().filter_map(|name| TransitionScheme::preset(name)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(instances);
    for i in 0..instances {
        let scheme = &schemes[i % schemes.len()];
        let n = if i == 0 { 0 } else { rng.random_range(1..=max_scatterers.max(1)) };
        let delta = rng.random_range(20.0..300.0);
        let model = MediumModel::with_detuning(10.0, 1.0, delta)?;
        let cloud = random_cloud(&mut rng, n, model);
        let atom = Vector3::new(1.3 + rng.random::<f64>(), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let linewidth = i % 2 == 1;
        let fast = SelfEnergyEvaluator::new(scheme, &cloud, linewidth, DEFAULT_MEMORY_BUDGET)?
            .with_corrupted_coupling(corrupt_coupling_sign)
            .self_energy(&atom)?;
        let full = full_matrix_self_energy(scheme, &cloud, &atom, linewidth)?;
        let rel_error = rel_diff(&fast.matrix, &full);
        let passed = if n == 0 {
            let ne = full.nrows();
            (0..ne).all(|r| (0..ne).all(|c| fast.matrix[(r, c)] == if r == c { Complex64::new(0.0, -0.5) } else { Complex64::new(0.0, 0.0) }))
                && rel_error < ORACLE_TOLERANCE
        } else {
            rel_error < ORACLE_TOLERANCE
        };
        cases.push(OracleCase { scheme: scheme.label.clone(), n_scatterers: n, include_medium_linewidth: linewidth, rel_error, passed });
    }
    let max_rel_error = cases.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    let passed = cases.iter().all(|c| c.passed);
    Ok(OracleReport { cases, max_rel_error, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_oracle_passes() {
        let report = run_oracle(8, 6, 3, false).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn corrupted_coupling_fails() {
        let report = run_oracle(4, 6, 3, true).unwrap();
        assert!(!report.passed);
    }
}
