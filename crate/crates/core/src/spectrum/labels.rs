//! Labels `|M|` of eigenvalue clusters along the local symmetry axis.

use faer::Mat;
use num_complex::Complex64;

use super::diagonalize::SpectrumPoint;
use crate::angular::{angular_momentum_along, HalfInt};
use crate::error::{Error, Result};

/// Weights closer than this are reported as ambiguous.
pub const AMBIGUITY_MARGIN: f64 = 0.05;

/// Projectors onto the `|M| = k` subspaces of `axis . J`, for
/// `k = F, F-1, ...` down to 0 or 1/2, in that order.
fn abs_m_projectors(j: HalfInt, axis: [f64; 3]) -> Result<Vec<(HalfInt, Mat<Complex64>)>> {
    let n = j.multiplicity();
    let op = angular_momentum_along(j, axis);
    let evd = op.self_adjoint_eigen(faer::Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let vals: Vec<f64> = evd.S().column_vector().iter().map(|v| v.re).collect();
    let vecs = evd.U();
    let mut out = Vec::new();
    let mut k = j.abs();
    loop {
        let mut proj = Mat::<Complex64>::zeros(n, n);
        for (c, &m) in vals.iter().enumerate() {
            if (m.abs() - k.value()).abs() < 0.25 {
                for r in 0..n {
                    for s in 0..n {
                        proj[(r, s)] += vecs[(r, c)] * vecs[(s, c)].conj();
                    }
                }
            }
        }
        out.push((k, proj));
        if k.doubled() < 2 {
            break;
        }
        k = HalfInt::from_doubled(k.doubled() - 2);
    }
    Ok(out)
}

fn weight(proj: &Mat<Complex64>, v: faer::ColRef<'_, Complex64>) -> f64 {
    let n = v.nrows();
    let mut num = 0.0;
    let mut den = 0.0;
    for r in 0..n {
        let pv: Complex64 = (0..n).map(|s| proj[(r, s)] * v[s]).sum();
        num += pv.norm_sqr();
        den += v[r].norm_sqr();
    }
    num / den
}

/// Assigns `|M|` labels in place. Each `|M| > 0` can host two states and
/// `M = 0` one; clusters are labelled greedily by their largest average
/// weight. A cluster spanning the whole manifold stays unlabelled.
pub fn symmetry_labels(point: &mut SpectrumPoint, f_excited: HalfInt, axis: [f64; 3]) -> Result<()> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !(norm > 0.0) {
        return Err(Error::Config("symmetry axis must be nonzero".into()));
    }
    let axis = [axis[0] / norm, axis[1] / norm, axis[2] / norm];
    let n = f_excited.multiplicity();
    for c in &mut point.clusters {
        c.label = None;
        c.low_confidence = false;
    }
    if point.clusters.len() == 1 && point.clusters[0].multiplicity == n && n > 1 {
        return Ok(());
    }
    let projectors = abs_m_projectors(f_excited, axis)?;
    let weights: Vec<Vec<f64>> = point
        .clusters
        .iter()
        .map(|c| {
            projectors
                .iter()
                .map(|(_, p)| c.members.iter().map(|&i| weight(p, point.eigenvectors.col(i))).sum::<f64>() / c.members.len() as f64)
                .collect()
        })
        .collect();
    let mut capacity: Vec<usize> = projectors.iter().map(|(k, _)| if k.doubled() == 0 { 1 } else { 2 }).collect();
    let mut done = vec![false; point.clusters.len()];
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for (ci, c) in point.clusters.iter().enumerate() {
            if done[ci] {
                continue;
            }
            for (ki, &w) in weights[ci].iter().enumerate() {
                if capacity[ki] >= c.multiplicity && best.is_none_or(|b| w > b.2) {
                    best = Some((ci, ki, w));
                }
            }
        }
        let Some((ci, ki, _)) = best else { break };
        capacity[ki] -= point.clusters[ci].multiplicity;
        done[ci] = true;
        point.clusters[ci].label = Some(projectors[ki].0);
        point.clusters[ci].low_confidence = is_ambiguous(&weights[ci]);
    }
    for (ci, c) in point.clusters.iter_mut().enumerate() {
        if !done[ci] {
            // no slot left: fall back to the dominant weight
            let ki = argmax(&weights[ci]);
            c.label = Some(projectors[ki].0);
            c.low_confidence = true;
        }
    }
    Ok(())
}

fn argmax(w: &[f64]) -> usize {
    w.iter().enumerate().fold(0, |best, (i, &v)| if v > w[best] { i } else { best })
}

fn is_ambiguous(w: &[f64]) -> bool {
    let mut sorted = w.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.len() > 1 && sorted[0] - sorted[1] < AMBIGUITY_MARGIN
}
