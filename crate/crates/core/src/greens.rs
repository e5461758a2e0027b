//! Vacuum dyadic propagator of the electric field between two point dipoles.
//!
//! In reduced units (`hbar = c = 1`) the Fourier image at wavenumber `k` is
//!
//! ```text
//! D_{mu nu}(R) = -k^3 { (2i/3) h0(kR) delta_{mu nu} + (X_mu X_nu / R^2 - delta_{mu nu}/3) i h2(kR) }
//! ```

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Spherical Hankel function of the first kind, orders 0 and 2.
pub fn hankel1(order: u32, x: f64) -> Result<Complex64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::HankelArgument(x));
    }
    match order {
        0 => Ok(hankel0_unchecked(x)),
        2 => Ok(hankel2_unchecked(x)),
        other => Err(Error::HankelOrder(other)),
    }
}

#[inline]
fn hankel0_unchecked(x: f64) -> Complex64 {
    // -i e^{ix} / x
    let (s, c) = x.sin_cos();
    Complex64::new(s, -c) / x
}

#[inline]
fn hankel2_unchecked(x: f64) -> Complex64 {
    // (i/x) e^{ix} (1 + 3i/x - 3/x^2)
    let (s, c) = x.sin_cos();
    let phase = Complex64::new(c, s);
    let inv = 1.0 / x;
    let poly = Complex64::new(1.0 - 3.0 * inv * inv, 3.0 * inv);
    I * phase * poly * inv
}

/// Value of the propagator for one pair of points.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenTensor {
    pub matrix: Matrix3<Complex64>,
    pub separation: Vector3<f64>,
    pub wavenumber: f64,
}

impl GreenTensor {
    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }
}

/// Full 3x3 propagator from `r_from` to `r_to`.
pub fn green_tensor(r_from: &Vector3<f64>, r_to: &Vector3<f64>, k: f64) -> Result<GreenTensor> {
    if !(k > 0.0) {
        return Err(Error::HankelArgument(k));
    }
    let separation = r_to - r_from;
    if separation.norm() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(GreenTensor { matrix: green_matrix(&separation, k), separation, wavenumber: k })
}

/// Propagator for a known nonzero separation. Callers guarantee `R != 0`.
#[inline]
pub fn green_matrix(separation: &Vector3<f64>, k: f64) -> Matrix3<Complex64> {
    let r = separation.norm();
    let x = k * r;
    let h0 = hankel0_unchecked(x);
    let h2 = hankel2_unchecked(x);
    let k3 = k * k * k;
    let iso = -k3 * I * (2.0 / 3.0 * h0 - h2 / 3.0);
    let aniso = -k3 * I * h2;
    let u = separation / r;
    Matrix3::from_fn(|mu, nu| {
        let outer = aniso * (u[mu] * u[nu]);
        if mu == nu {
            iso + outer
        } else {
            outer
        }
    })
}
