//! Adaptive Gauss-Kronrod (7/15) quadrature on an interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral estimate with an error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// One 15-point Kronrod rule with the embedded 7-point Gauss rule; `f`
/// returns the value and its own error estimate (for nested integrals).
fn gk15<F: FnMut(f64) -> Estimate>(f: &mut F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut values = [0.0; 15];
    let centre = f(c);
    values[14] = centre.value;
    let mut kron = WGK[7] * centre.value;
    let mut gauss = WG[3] * centre.value;
    let mut inner = WGK[7] * centre.error;
    for j in 0..7 {
        let dx = h * XGK[j];
        let (lo, hi) = (f(c - dx), f(c + dx));
        values[2 * j] = lo.value;
        values[2 * j + 1] = hi.value;
        kron += WGK[j] * (lo.value + hi.value);
        inner += WGK[j] * (lo.error + hi.error);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo.value + hi.value);
        }
    }
    // QUADPACK error scaling, pessimistic for kinks that the two rules miss alike
    let mean = 0.5 * kron;
    let mut resasc = WGK[7] * (values[14] - mean).abs();
    let mut resabs = WGK[7] * values[14].abs();
    for j in 0..7 {
        resasc += WGK[j] * ((values[2 * j] - mean).abs() + (values[2 * j + 1] - mean).abs());
        resabs += WGK[j] * (values[2 * j].abs() + values[2 * j + 1].abs());
    }
    let (resasc, resabs) = (resasc * h.abs(), resabs * h.abs());
    let mut err = ((kron - gauss) * h).abs();
    if resasc > 0.0 && err > 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && round > err {
        err = round;
    }
    Estimate { value: kron * h, error: err + inner * h.abs() }
}

/// Panels evaluated before adapting, so that a lucky agreement of the two
/// rules on a single panel cannot end the refinement.
const INITIAL_PIECES: usize = 4;

struct Piece {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Globally adaptive integration: bisects the piece with the largest error
/// until `error <= max(abs_tol, rel_tol |value|)` or `max_pieces` is reached.
pub fn integrate<F: FnMut(f64) -> Estimate>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_pieces: usize) -> Estimate {
    let mut heap = BinaryHeap::new();
    let (mut value, mut error) = (0.0, 0.0);
    for k in 0..INITIAL_PIECES {
        let lo = a + (b - a) * k as f64 / INITIAL_PIECES as f64;
        let hi = if k + 1 == INITIAL_PIECES { b } else { a + (b - a) * (k + 1) as f64 / INITIAL_PIECES as f64 };
        let est = gk15(&mut f, lo, hi);
        value += est.value;
        error += est.error;
        heap.push(Piece { a: lo, b: hi, est });
    }
    while error > abs_tol.max(rel_tol * value.abs()) && heap.len() < max_pieces {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let left = gk15(&mut f, worst.a, mid);
        let right = gk15(&mut f, mid, worst.b);
        value += left.value + right.value - worst.est.value;
        error += left.error + right.error - worst.est.error;
        heap.push(Piece { a: worst.a, b: mid, est: left });
        heap.push(Piece { a: mid, b: worst.b, est: right });
    }
    // re-sum to shed accumulated rounding from the running totals
    let (value, error) = heap.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.est.value, acc.1 + p.est.error));
    Estimate { value, error }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Estimate {
        move |x| Estimate { value: f(x), error: 0.0 }
    }

    #[test]
    fn polynomial_exact() {
        let r = integrate(plain(|x| x.powi(6) - 2.0 * x), 0.0, 2.0, 1e-14, 1e-14, 10);
        assert!((r.value - (128.0 / 7.0 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn step_function_converges() {
        let r = integrate(plain(|x| if x < 0.3 { 1.0 } else { 0.0 }), 0.0, 1.0, 1e-9, 0.0, 10_000);
        assert!((r.value - 0.3).abs() < 1e-8, "{r:?}");
        assert!((r.value - 0.3).abs() <= r.error + 1e-15);
    }
}
