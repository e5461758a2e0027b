//! Angular momentum algebra for closed `F -> F0` dipole transitions.
//!
//! Sublevels are indexed from the lowest projection upwards: index `i` of a
//! manifold with total momentum `F` carries `M = -F + i`. Dipole amplitudes
//! are normalized so that every excited sublevel decays at exactly one unit
//! of the natural rate, i.e. `sum_m |d_nm|^2 = 3/4` in reduced units where
//! `hbar = c = k0 = 1`.

use std::fmt;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sum rule of a closed transition in reduced units (`Gamma = 4/3 sum |d|^2`).
pub const DIPOLE_SUM: f64 = 0.75;

const MAX_FACTORIAL: usize = 170;

/// A non-negative or signed half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub fn from_doubled(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub fn from_f64(value: f64) -> Result<Self> {
        let twice = 2.0 * value;
        if !twice.is_finite() || (twice - twice.round()).abs() > 1e-9 || twice.abs() > 1e6 {
            return Err(Error::Angular(format!("{value} is not a half-integer")));
        }
        Ok(HalfInt(twice.round() as i32))
    }

    pub fn doubled(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    /// Number of projections `2j + 1`.
    pub fn multiplicity(self) -> usize {
        (self.0 + 1).max(0) as usize
    }

    /// Projections `-j, -j+1, .., j`.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let j = self.0;
        (0..self.multiplicity() as i32).map(move |i| HalfInt(-j + 2 * i))
    }
}

impl TryFrom<f64> for HalfInt {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        HalfInt::from_f64(value)
    }
}

impl From<HalfInt> for f64 {
    fn from(h: HalfInt) -> f64 {
        h.value()
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Closed optical transition of the reference atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionScheme {
    pub f_excited: HalfInt,
    pub f_ground: HalfInt,
    /// Vacuum transition wavelength in nm.
    pub lambda0_nm: f64,
    /// Natural linewidth in units of 2 pi MHz. Only used for reporting; all
    /// computed rates are in units of this value.
    pub gamma_inf_mhz: f64,
    pub label: String,
}

impl TransitionScheme {
    pub fn new(f_excited: f64, f_ground: f64, lambda0_nm: f64, gamma_inf_mhz: f64, label: &str) -> Result<Self> {
        let scheme = TransitionScheme {
            f_excited: HalfInt::from_f64(f_excited)?,
            f_ground: HalfInt::from_f64(f_ground)?,
            lambda0_nm,
            gamma_inf_mhz,
            label: label.to_string(),
        };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<()> {
        let (fe, fg) = (self.f_excited.doubled(), self.f_ground.doubled());
        if fe < 0 || fg < 0 {
            return Err(Error::Angular("angular momenta must be non-negative".into()));
        }
        if (fe - fg).abs() > 2 || (fe + fg) % 2 != 0 || (fe == 0 && fg == 0) {
            return Err(Error::Angular(format!(
                "F={} -> F0={} is not an electric dipole transition",
                self.f_excited, self.f_ground
            )));
        }
        if !(self.lambda0_nm > 0.0) || !(self.gamma_inf_mhz > 0.0) {
            return Err(Error::Angular("wavelength and linewidth must be positive".into()));
        }
        Ok(())
    }

    pub fn n_excited(&self) -> usize {
        self.f_excited.multiplicity()
    }

    pub fn n_ground(&self) -> usize {
        self.f_ground.multiplicity()
    }

    /// Reduced wavelength `lambda0 / 2 pi` in nm: the internal length unit.
    pub fn reduced_wavelength_nm(&self) -> f64 {
        self.lambda0_nm / (2.0 * std::f64::consts::PI)
    }

    /// 87Rb D2, F=0 -> F0=1 tripod.
    pub fn rb87_f0_f1() -> Self {
        Self::new(0.0, 1.0, 780.241, 6.0666, "Rb87-D2-F0-to-F1").unwrap()
    }

    /// 87Rb D2, F=3 -> F0=2.
    pub fn rb87_f3_f2() -> Self {
        Self::new(3.0, 2.0, 780.241, 6.0666, "Rb87-D2-F3-to-F2").unwrap()
    }

    /// 133Cs D2, F=5 -> F0=4.
    pub fn cs133_f5_f4() -> Self {
        Self::new(5.0, 4.0, 852.347, 5.2227, "Cs133-D2-F5-to-F4").unwrap()
    }

    /// V-type medium scatterer: J=1 excited, J=0 ground, isotropic.
    pub fn medium_v(lambda0_nm: f64) -> Self {
        Self::new(1.0, 0.0, lambda0_nm, 6.0666, "medium-V-J1-to-J0").unwrap()
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "rb87-f0-f1" => Some(Self::rb87_f0_f1()),
            "rb87-f3-f2" => Some(Self::rb87_f3_f2()),
            "cs133-f5-f4" => Some(Self::cs133_f5_f4()),
            "medium-v" => Some(Self::medium_v(780.241)),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 4] = ["rb87-f0-f1", "rb87-f3-f2", "cs133-f5-f4", "medium-v"];
}

fn factorials() -> &'static [f64; MAX_FACTORIAL + 1] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; MAX_FACTORIAL + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; MAX_FACTORIAL + 1];
        for i in 1..=MAX_FACTORIAL {
            t[i] = t[i - 1] * i as f64;
        }
        t
    })
}

fn fact(n: i32) -> f64 {
    factorials()[n as usize]
}

/// Wigner 3j symbol from doubled arguments.
pub fn wigner3j_doubled(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> Result<f64> {
    for (j, m) in [(j1, m1), (j2, m2), (j3, m3)] {
        if j < 0 {
            return Err(Error::Angular(format!("negative angular momentum {}", HalfInt(j))));
        }
        if m.abs() > j || (j + m) % 2 != 0 {
            return Err(Error::Angular(format!("projection {} incompatible with j = {}", HalfInt(m), HalfInt(j))));
        }
    }
    if (j1 + j2 + j3) % 2 != 0 {
        return Ok(0.0);
    }
    if m1 + m2 + m3 != 0 || j3 > j1 + j2 || j3 < (j1 - j2).abs() {
        return Ok(0.0);
    }
    let top = (j1 + j2 + j3) / 2 + 1;
    if top as usize > MAX_FACTORIAL {
        return Err(Error::Angular("angular momenta too large for the factorial table".into()));
    }

    // all of these are integers once the triangle and parity checks pass
    let a = (j1 + j2 - j3) / 2;
    let b = (j1 - j2 + j3) / 2;
    let c = (-j1 + j2 + j3) / 2;
    let triangle = fact(a) * fact(b) * fact(c) / fact(top);
    let norm = fact((j1 + m1) / 2)
        * fact((j1 - m1) / 2)
        * fact((j2 + m2) / 2)
        * fact((j2 - m2) / 2)
        * fact((j3 + m3) / 2)
        * fact((j3 - m3) / 2);

    let k_min = 0.max((j2 - j3 - m1) / 2).max((j1 - j3 + m2) / 2);
    let k_max = a.min((j1 - m1) / 2).min((j2 + m2) / 2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let denom = fact(k)
            * fact((j3 - j2 + m1) / 2 + k)
            * fact((j3 - j1 - m2) / 2 + k)
            * fact(a - k)
            * fact((j1 - m1) / 2 - k)
            * fact((j2 + m2) / 2 - k);
        let term = 1.0 / denom;
        sum += if k % 2 == 0 { term } else { -term };
    }
    let phase_exp = (j1 - j2 - m3) / 2;
    let phase = if phase_exp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok(phase * (triangle * norm).sqrt() * sum)
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)`. Zero when the triangle or
/// projection rules fail.
pub fn wigner3j(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> Result<f64> {
    let d = |x: f64| HalfInt::from_f64(x).map(HalfInt::doubled);
    wigner3j_doubled(d(j1)?, d(j2)?, d(j3)?, d(m1)?, d(m2)?, d(m3)?)
}

/// One spherical component `<F m_e| d_q |F0 m_g>` of the dipole operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipoleElement {
    pub m_excited: HalfInt,
    pub m_ground: HalfInt,
    pub q: i8,
    pub value: f64,
}

/// All nonzero dipole elements of a transition, with Cartesian helpers.
#[derive(Clone, Debug)]
pub struct DipoleTable {
    pub f_excited: HalfInt,
    pub f_ground: HalfInt,
    pub elements: Vec<DipoleElement>,
}

/// Nonzero spherical dipole elements of `scheme`, normalized to the closed
/// transition sum rule so that each excited sublevel decays at the natural
/// rate.
pub fn dipole_matrix(scheme: &TransitionScheme) -> Result<DipoleTable> {
    scheme.validate()?;
    let fe = scheme.f_excited.doubled();
    let fg = scheme.f_ground.doubled();
    let reduced = (DIPOLE_SUM * (fe as f64 + 1.0)).sqrt();
    let mut elements = Vec::new();
    for me in scheme.f_excited.projections() {
        for mg in scheme.f_ground.projections() {
            let q2 = me.doubled() - mg.doubled();
            if q2.abs() > 2 {
                continue;
            }
            // <F me| d_q |F0 mg> = (-1)^(F - me) (F 1 F0; -me q mg) <F||d||F0>
            let w = wigner3j_doubled(fe, 2, fg, -me.doubled(), q2, mg.doubled())?;
            if w == 0.0 {
                continue;
            }
            let phase = if ((fe - me.doubled()) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            elements.push(DipoleElement { m_excited: me, m_ground: mg, q: (q2 / 2) as i8, value: phase * w * reduced });
        }
    }
    Ok(DipoleTable { f_excited: scheme.f_excited, f_ground: scheme.f_ground, elements })
}

impl DipoleTable {
    pub fn n_excited(&self) -> usize {
        self.f_excited.multiplicity()
    }

    pub fn n_ground(&self) -> usize {
        self.f_ground.multiplicity()
    }

    fn excited_index(&self, m: HalfInt) -> usize {
        ((m.doubled() + self.f_excited.doubled()) / 2) as usize
    }

    fn ground_index(&self, m: HalfInt) -> usize {
        ((m.doubled() + self.f_ground.doubled()) / 2) as usize
    }

    /// `sum_{q, m_g} |d^q_{m_e, m_g}|^2` for every excited sublevel.
    pub fn excited_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_excited()];
        for e in &self.elements {
            sums[self.excited_index(e.m_excited)] += e.value * e.value;
        }
        sums
    }

    /// `sum_{q, m_e} |d^q_{m_e, m_g}|^2` for every ground sublevel.
    pub fn ground_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_ground()];
        for e in &self.elements {
            sums[self.ground_index(e.m_ground)] += e.value * e.value;
        }
        sums
    }

    /// Cartesian matrix elements `<n| d_mu |m>` as three `n_e x n_g` matrices
    /// (mu = x, y, z).
    pub fn cartesian(&self) -> [Mat<Complex64>; 3] {
        let (ne, ng) = (self.n_excited(), self.n_ground());
        let mut out = [Mat::zeros(ne, ng), Mat::zeros(ne, ng), Mat::zeros(ne, ng)];
        for e in &self.elements {
            let mut sph = [Complex64::new(0.0, 0.0); 3];
            sph[(e.q + 1) as usize] = Complex64::new(e.value, 0.0);
            let cart = spherical_to_cartesian(sph);
            let (i, j) = (self.excited_index(e.m_excited), self.ground_index(e.m_ground));
            for mu in 0..3 {
                out[mu][(i, j)] += cart[mu];
            }
        }
        out
    }

    /// Angular momentum operator `axis . J` on the excited manifold, in the
    /// `|F, M>` basis quantized along z.
    pub fn excited_angular_momentum(&self, axis: [f64; 3]) -> Mat<Complex64> {
        angular_momentum_along(self.f_excited, axis)
    }
}

/// Spherical basis vectors `e_{-1}, e_0, e_{+1}` in Cartesian components.
fn spherical_basis() -> [[Complex64; 3]; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        [c(s, 0.0), c(0.0, -s), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        [c(-s, 0.0), c(0.0, -s), c(0.0, 0.0)],
    ]
}

/// Converts spherical components `[v_{-1}, v_0, v_{+1}]` (defined by
/// `v_q = e_q . v`) to Cartesian `[v_x, v_y, v_z]`.
pub fn spherical_to_cartesian(v: [Complex64; 3]) -> [Complex64; 3] {
    let basis = spherical_basis();
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (q, e) in basis.iter().enumerate() {
        for mu in 0..3 {
            out[mu] += v[q] * e[mu].conj();
        }
    }
    out
}

/// Inverse of [`spherical_to_cartesian`].
pub fn cartesian_to_spherical(v: [Complex64; 3]) -> [Complex64; 3] {
    let basis = spherical_basis();
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (q, e) in basis.iter().enumerate() {
        out[q] = (0..3).map(|mu| e[mu] * v[mu]).sum();
    }
    out
}

/// `axis . J` for angular momentum `j` in the z-quantized basis.
pub fn angular_momentum_along(j: HalfInt, axis: [f64; 3]) -> Mat<Complex64> {
    let n = j.multiplicity();
    let jv = j.value();
    let mut op = Mat::<Complex64>::zeros(n, n);
    for (i, m) in j.projections().enumerate() {
        let mv = m.value();
        op[(i, i)] += Complex64::new(axis[2] * mv, 0.0);
        if i + 1 < n {
            // <m+1| J+ |m>
            let lad = (jv * (jv + 1.0) - mv * (mv + 1.0)).sqrt();
            // J_x = (J+ + J-)/2, J_y = (J+ - J-)/(2i)
            let up = Complex64::new(axis[0] * lad / 2.0, -axis[1] * lad / 2.0);
            op[(i + 1, i)] += up;
            op[(i, i + 1)] += up.conj();
        }
    }
    op
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn half_int_parsing() {
        assert_eq!(HalfInt::from_f64(2.5).unwrap().doubled(), 5);
        assert!(HalfInt::from_f64(0.3).is_err());
        assert_eq!(HalfInt::from_f64(1.0).unwrap().projections().map(|m| m.doubled()).collect::<Vec<_>>(), vec![-2, 0, 2]);
        assert_eq!(HalfInt::from_f64(0.0).unwrap().projections().count(), 1);
    }

    #[test]
    fn three_j_basic_values() {
        assert_relative_eq!(wigner3j(1.0, 1.0, 0.0, 0.0, 0.0, 0.0).unwrap(), -1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_eq!(wigner3j(1.0, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(wigner3j(1.0, 1.0, 3.0, 0.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(wigner3j(1.0, 1.0, 0.3, 0.0, 0.0, 0.0).is_err());
        assert!(wigner3j(1.0, 1.0, 1.0, 2.0, -1.0, -1.0).is_err());
    }

    #[test]
    fn sum_rule_all_schemes() {
        for name in TransitionScheme::PRESETS {
            let table = dipole_matrix(&TransitionScheme::preset(name).unwrap()).unwrap();
            for s in table.excited_sums() {
                assert_relative_eq!(s, DIPOLE_SUM, max_relative = 1e-12);
            }
            let ratio = (table.n_excited() as f64) / (table.n_ground() as f64);
            for s in table.ground_sums() {
                assert_relative_eq!(s, ratio * DIPOLE_SUM, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn tripod_and_v_atom_tables() {
        let tripod = dipole_matrix(&TransitionScheme::rb87_f0_f1()).unwrap();
        assert_eq!(tripod.elements.len(), 3);
        let v = dipole_matrix(&TransitionScheme::medium_v(780.0)).unwrap();
        assert_eq!(v.elements.len(), 3);
        for e in &v.elements {
            assert_relative_eq!(e.value.abs(), DIPOLE_SUM.sqrt(), max_relative = 1e-14);
        }
        for e in &tripod.elements {
            assert_relative_eq!(e.value.abs(), 0.5, max_relative = 1e-14);
        }
    }

    #[test]
    fn cesium_stretched_element_is_largest() {
        let table = dipole_matrix(&TransitionScheme::cs133_f5_f4()).unwrap();
        let find = |me: i32, mg: i32| {
            table
                .elements
                .iter()
                .find(|e| e.m_excited.doubled() == 2 * me && e.m_ground.doubled() == 2 * mg)
                .unwrap()
                .value
        };
        let stretched = find(5, 4).abs();
        let max = table.elements.iter().map(|e| e.value.abs()).fold(0.0, f64::max);
        assert_eq!(stretched, max);
        // |(5 1 4; -5 1 4)|^2 = 1/11 and |(5 1 4; -4 0 4)|^2 = 1/55
        assert_relative_eq!(stretched / find(4, 4).abs(), 5f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn cartesian_matches_spherical_norms() {
        let table = dipole_matrix(&TransitionScheme::rb87_f3_f2()).unwrap();
        let cart = table.cartesian();
        for n in 0..table.n_excited() {
            let s: f64 = (0..3).map(|mu| (0..table.n_ground()).map(|m| cart[mu][(n, m)].norm_sqr()).sum::<f64>()).sum();
            assert_relative_eq!(s, DIPOLE_SUM, max_relative = 1e-12);
        }
    }

    #[test]
    fn spherical_unit_z() {
        let z = spherical_to_cartesian([0.0.into(), 1.0.into(), 0.0.into()]);
        assert_eq!(z, [0.0.into(), 0.0.into(), 1.0.into()]);
    }

    #[test]
    fn angular_momentum_is_hermitian_with_integer_spectrum() {
        let j = HalfInt::from_f64(2.0).unwrap();
        let axis = [0.3, -0.5, 0.812403840463596];
        let op = angular_momentum_along(j, axis);
        for i in 0..5 {
            for k in 0..5 {
                assert_relative_eq!((op[(i, k)] - op[(k, i)].conj()).norm(), 0.0, epsilon = 1e-14);
            }
        }
        let mut eig: Vec<f64> = op.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        eig.sort_by(f64::total_cmp);
        for (e, m) in eig.iter().zip([-2.0, -1.0, 0.0, 1.0, 2.0]) {
            assert_relative_eq!(*e, m, epsilon = 1e-12);
        }
    }
}
