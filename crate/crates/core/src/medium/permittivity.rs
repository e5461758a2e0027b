//! Self-consistent permittivity of a dense gas of V-type scatterers.
//!
//! With `beta = pi n0 Gamma_e` (density in units of the reduced wavelength,
//! rates in units of the reference linewidth) and `x = omega - delta_M`, the
//! refractive index `s = sqrt(eps)` solves
//!
//! ```text
//! eps (1 + beta / (x + i s Gamma_e/2)) = 1 - 2 beta / (x + i s Gamma_e/2)
//! ```
//!
//! which is a cubic in `s`. The physical branch is the one that tends to
//! `s = 1` far from the resonance; it is found by continuation from a far
//! detuned anchor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum ratio `delta_M / Gamma_e` accepted for a medium model.
pub const MIN_DETUNING_RATIO: f64 = 20.0;

const CONTINUATION_STEPS: usize = 600;
const CAUSALITY_TOL: f64 = 1e-9;

/// Parameters of the artificial medium.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumModel {
    /// Number density in scatterers per reduced wavelength cubed.
    pub n0: f64,
    /// Medium resonance offset `omega_M - omega_0` in units of the reference
    /// linewidth.
    pub delta_m: f64,
    /// Squared transition dipole of a scatterer in reduced units.
    pub f0_sq: f64,
    /// Scatterer linewidth in units of the reference linewidth.
    pub gamma_e: f64,
    /// Real permittivity at the reference frequency.
    pub target_eps: f64,
}

impl MediumModel {
    /// Model with a given detuning; the permittivity it realizes is computed.
    pub fn with_detuning(n0: f64, gamma_e: f64, delta_m: f64) -> Result<Self> {
        check_inputs(n0, gamma_e)?;
        if !(delta_m >= MIN_DETUNING_RATIO * gamma_e) {
            return Err(Error::Medium(format!(
                "delta_M = {delta_m} must be at least {MIN_DETUNING_RATIO} Gamma_e = {}",
                MIN_DETUNING_RATIO * gamma_e
            )));
        }
        let mut model = MediumModel { n0, delta_m, f0_sq: f0_sq_for(gamma_e), gamma_e, target_eps: f64::NAN };
        model.target_eps = permittivity(&model, 0.0)?.re;
        Ok(model)
    }

    /// Model whose detuning is calibrated so that `Re eps(omega_0) = target_eps`.
    pub fn calibrated(n0: f64, gamma_e: f64, target_eps: f64) -> Result<Self> {
        let delta_m = fit_detuning(n0, gamma_e, target_eps)?;
        let mut model = Self::with_detuning(n0, gamma_e, delta_m)?;
        model.target_eps = target_eps;
        Ok(model)
    }

    /// `pi n0 Gamma_e`: the polarizability density scale.
    pub fn beta(&self) -> f64 {
        std::f64::consts::PI * self.n0 * self.gamma_e
    }

    /// Ordered lattice spacing `n0^{-1/3}` in reduced wavelengths.
    pub fn lattice_spacing(&self) -> f64 {
        self.n0.powf(-1.0 / 3.0)
    }
}

fn check_inputs(n0: f64, gamma_e: f64) -> Result<()> {
    if !(n0 > 0.0) || !n0.is_finite() {
        return Err(Error::Medium(format!("density must be positive, got {n0}")));
    }
    if !(gamma_e > 0.0) || !gamma_e.is_finite() {
        return Err(Error::Medium(format!("medium linewidth must be positive, got {gamma_e}")));
    }
    Ok(())
}

/// `f0^2` that gives a scatterer linewidth `gamma_e` at `omega_M = omega_0`.
pub fn f0_sq_for(gamma_e: f64) -> f64 {
    0.75 * gamma_e
}

/// Spontaneous rate of a medium scatterer, `Gamma_e = (4/3) omega_M^3 f0^2`,
/// with `omega_m` in units of the reference transition frequency.
pub fn gamma_e_from_dipole(f0_sq: f64, omega_m: f64) -> Result<f64> {
    if !(f0_sq > 0.0) || !(omega_m > 0.0) {
        return Err(Error::Medium("dipole strength and frequency must be positive".into()));
    }
    Ok(4.0 / 3.0 * omega_m.powi(3) * f0_sq)
}

/// Coefficients `[c0, c1, c2, c3]` of the cubic in `s` at offset `x`.
fn cubic_coefficients(beta: f64, gamma_e: f64, x: f64) -> [Complex64; 4] {
    let g = Complex64::new(0.0, gamma_e / 2.0);
    [Complex64::new(-(x - 2.0 * beta), 0.0), -g, Complex64::new(x + beta, 0.0), g]
}

fn eval_poly(c: &[Complex64; 4], s: Complex64) -> (Complex64, Complex64) {
    let p = ((c[3] * s + c[2]) * s + c[1]) * s + c[0];
    let dp = (3.0 * c[3] * s + 2.0 * c[2]) * s + c[1];
    (p, dp)
}

/// All roots of `c3 s^3 + c2 s^2 + c1 s + c0` (Durand-Kerner with Newton
/// polishing). Degenerates to the quadratic when `c3` vanishes.
pub(crate) fn cubic_roots(c: &[Complex64; 4]) -> Vec<Complex64> {
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if c[3].norm() <= 1e-15 * scale {
        let (a, b, cc) = (c[2], c[1], c[0]);
        let disc = (b * b - 4.0 * a * cc).sqrt();
        // numerically stable quadratic
        let q = if (b.conj() * disc).re >= 0.0 { -0.5 * (b + disc) } else { -0.5 * (b - disc) };
        return vec![q / a, cc / q];
    }
    let monic = [c[0] / c[3], c[1] / c[3], c[2] / c[3]];
    let radius = 1.0 + monic.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots = [seed * radius * 0.5, seed * seed * radius * 0.5, seed * seed * seed * radius * 0.5];
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..3 {
            let z = roots[i];
            let p = ((z + monic[2]) * z + monic[1]) * z + monic[0];
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, w) in roots.iter().enumerate() {
                if j != i {
                    denom *= z - w;
                }
            }
            let step = p / denom;
            roots[i] = z - step;
            delta = delta.max(step.norm() / (1.0 + z.norm()));
        }
        if delta < 1e-16 {
            break;
        }
    }
    roots
        .iter()
        .map(|&r| {
            let mut z = r;
            for _ in 0..3 {
                let (p, dp) = eval_poly(c, z);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                if !step.re.is_finite() || !step.im.is_finite() {
                    break;
                }
                z -= step;
            }
            z
        })
        .collect()
}

fn nearest(roots: &[Complex64], target: Complex64) -> Complex64 {
    *roots
        .iter()
        .min_by(|a, b| (*a - target).norm().total_cmp(&(*b - target).norm()))
        .expect("cubic has roots")
}

/// Continues the physical root from a far-detuned anchor on the same side
/// of the resonance as `x_target`, returning `s`.
fn continue_root(beta: f64, gamma_e: f64, x_target: f64) -> Complex64 {
    let width = gamma_e / 2.0 + 1e-12;
    let anchor_mag = 1e4 * (beta + gamma_e) + 10.0 * x_target.abs();
    let anchor = if x_target < 0.0 { -anchor_mag } else { anchor_mag };
    let (u0, u1) = ((anchor / width).asinh(), (x_target / width).asinh());
    let mut s = nearest(&cubic_roots(&cubic_coefficients(beta, gamma_e, anchor)), Complex64::new(1.0, 0.0));
    for step in 1..=CONTINUATION_STEPS {
        let t = step as f64 / CONTINUATION_STEPS as f64;
        let x = width * (u0 + (u1 - u0) * t).sinh();
        let x = if step == CONTINUATION_STEPS { x_target } else { x };
        s = nearest(&cubic_roots(&cubic_coefficients(beta, gamma_e, x)), s);
    }
    s
}

fn admissible(s: Complex64) -> bool {
    let eps = s * s;
    eps.im >= -CAUSALITY_TOL * (1.0 + eps.norm()) && s.re >= -CAUSALITY_TOL
}

/// Complex permittivity at `omega` (offset from the reference frequency, in
/// units of the reference linewidth).
pub fn permittivity(model: &MediumModel, omega: f64) -> Result<Complex64> {
    check_inputs(model.n0, model.gamma_e)?;
    let x = omega - model.delta_m;
    let s = continue_root(model.beta(), model.gamma_e, x);
    if !admissible(s) {
        let roots = cubic_roots(&cubic_coefficients(model.beta(), model.gamma_e, x));
        return Err(Error::NoCausalRoot { omega, roots: roots.iter().map(|r| r * r).collect() });
    }
    Ok(s * s)
}

/// Permittivity along a frequency scan; the physical root is continued from
/// point to point so the result is continuous in `omega`.
pub fn permittivity_scan(model: &MediumModel, omegas: &[f64]) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(omegas.len());
    let mut prev: Option<(f64, Complex64)> = None;
    for &omega in omegas {
        let x = omega - model.delta_m;
        let s = match prev {
            // refine between consecutive points on the same side of resonance
            Some((px, ps)) if px.signum() == x.signum() && (x - px).abs() < 0.05 * (model.gamma_e + x.abs().min(px.abs())) => {
                nearest(&cubic_roots(&cubic_coefficients(model.beta(), model.gamma_e, x)), ps)
            }
            _ => continue_root(model.beta(), model.gamma_e, x),
        };
        if !admissible(s) {
            let roots = cubic_roots(&cubic_coefficients(model.beta(), model.gamma_e, x));
            return Err(Error::NoCausalRoot { omega, roots: roots.iter().map(|r| r * r).collect() });
        }
        prev = Some((x, s));
        out.push(s * s);
    }
    Ok(out)
}

/// Far-detuned closed form `Re eps = (1 + 2 beta/delta) / (1 - beta/delta)`
/// at the reference frequency.
pub fn far_detuned_eps(n0: f64, gamma_e: f64, delta_m: f64) -> f64 {
    let ratio = std::f64::consts::PI * n0 * gamma_e / delta_m;
    (1.0 + 2.0 * ratio) / (1.0 - ratio)
}

/// Detuning `delta_M` at which `Re eps(omega_0) = target_eps`.
///
/// Seeds with the Clausius-Mossotti closed form `pi n0 Gamma_e (eps+2)/(eps-1)`
/// and refines on the exact cubic root by a bracketed secant iteration.
pub fn fit_detuning(n0: f64, gamma_e: f64, target_eps: f64) -> Result<f64> {
    check_inputs(n0, gamma_e)?;
    if !(target_eps > 1.0) || !target_eps.is_finite() {
        return Err(Error::Medium(format!("target permittivity must exceed 1, got {target_eps}")));
    }
    let beta = std::f64::consts::PI * n0 * gamma_e;
    let seed = beta * (target_eps + 2.0) / (target_eps - 1.0);
    let residual = |delta: f64| -> f64 {
        let s = continue_root(beta, gamma_e, -delta);
        (s * s).re - target_eps
    };

    // Re eps(omega_0) decreases monotonically with delta above the
    // Lorentz-Lorenz pole at delta = beta.
    let mut lo = seed;
    let mut f_lo = residual(lo);
    let mut hi = seed;
    let mut f_hi = f_lo;
    let mut expand = 0;
    while f_lo < 0.0 {
        lo = beta + (lo - beta) * 0.5;
        f_lo = residual(lo);
        expand += 1;
        if expand > 60 {
            return Err(Error::Medium("failed to bracket the detuning from below".into()));
        }
    }
    while f_hi > 0.0 {
        hi *= 1.5;
        f_hi = residual(hi);
        expand += 1;
        if expand > 120 {
            return Err(Error::Medium("failed to bracket the detuning from above".into()));
        }
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    // Illinois-modified regula falsi
    let mut side = 0i8;
    for _ in 0..200 {
        let mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let f_mid = residual(mid);
        if (f_mid / target_eps).abs() < 1e-13 || (hi - lo).abs() < 1e-12 * mid {
            return Ok(mid);
        }
        if f_mid > 0.0 {
            lo = mid;
            f_lo = f_mid;
            if side == 1 {
                f_hi /= 2.0;
            }
            side = 1;
        } else {
            hi = mid;
            f_hi = f_mid;
            if side == -1 {
                f_lo /= 2.0;
            }
            side = -1;
        }
    }
    Ok((lo * f_hi - hi * f_lo) / (f_hi - f_lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cubic_roots_solve_the_cubic() {
        let c = cubic_coefficients(62.8, 1.0, -233.0);
        for r in cubic_roots(&c) {
            let (p, _) = eval_poly(&c, r);
            assert!(p.norm() < 1e-9 * (1.0 + r.norm().powi(3)), "residual {p}");
        }
    }

    #[test]
    fn quadratic_fallback() {
        let c = [Complex64::new(-2.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let mut roots: Vec<f64> = cubic_roots(&c).iter().map(|r| r.re).collect();
        roots.sort_by(f64::total_cmp);
        assert_relative_eq!(roots[0], -2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(roots[1], 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn far_below_resonance_is_vacuum() {
        let model = MediumModel::with_detuning(20.0, 1.0, 1e9).unwrap();
        assert_relative_eq!(permittivity(&model, 0.0).unwrap().re, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn silica_reference_point() {
        let model = MediumModel::with_detuning(20.0, 1.0, 233.0).unwrap();
        let eps = permittivity(&model, 0.0).unwrap();
        assert_relative_eq!(eps.re, 2.1025, max_relative = 5e-3);
        assert!(eps.im >= 0.0 && eps.im < 1e-2);
    }

    #[test]
    fn closed_form_agrees_far_detuned() {
        for (n0, delta) in [(5.0, 58.0), (10.0, 117.0), (20.0, 233.0), (2.0, 300.0), (1.0, 50.0)] {
            let model = MediumModel::with_detuning(n0, 1.0, delta).unwrap();
            let exact = permittivity(&model, 0.0).unwrap().re;
            assert_relative_eq!(exact, far_detuned_eps(n0, 1.0, delta), max_relative = 1e-3);
        }
    }

    #[test]
    fn gamma_e_anchor_and_linearity() {
        assert_relative_eq!(gamma_e_from_dipole(0.75, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(gamma_e_from_dipole(1.5, 1.0).unwrap(), 2.0, epsilon = 1e-15);
        // 233 linewidths of the Rb D2 line relative to its optical frequency
        let delta = 233.0 * 6.0666e6 / 384.230e12;
        let corrected = gamma_e_from_dipole(0.75, 1.0 + delta).unwrap();
        assert_relative_eq!(corrected, (1.0 + delta).powi(3), max_relative = 1e-14);
        assert_relative_eq!(corrected, 1.0, max_relative = 2e-5);
    }

    #[test]
    fn fit_rejects_gain_media() {
        assert!(fit_detuning(20.0, 1.0, 1.0).is_err());
        assert!(fit_detuning(20.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn fit_reaches_target() {
        let delta = fit_detuning(20.0, 1.0, 2.1025).unwrap();
        let model = MediumModel::with_detuning(20.0, 1.0, delta).unwrap();
        assert_relative_eq!(permittivity(&model, 0.0).unwrap().re, 2.1025, max_relative = 1e-6);
    }

    #[test]
    fn fit_diverges_as_eps_approaches_one() {
        let mut last = 0.0;
        for excess in [1e-1, 1e-2, 1e-3] {
            let delta = fit_detuning(20.0, 1.0, 1.0 + excess).unwrap();
            assert!(delta > last);
            // delta ~ 3 beta / (eps - 1)
            assert_relative_eq!(delta * excess, 3.0 * std::f64::consts::PI * 20.0, max_relative = 0.15);
            last = delta;
        }
    }

    #[test]
    fn small_detuning_rejected() {
        assert!(MediumModel::with_detuning(20.0, 1.0, 10.0).is_err());
    }
}
