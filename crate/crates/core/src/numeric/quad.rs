//! Gauss–Legendre rules and a globally adaptive Gauss–Kronrod (7, 15) integrator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// A fixed rule mapped onto arbitrary intervals.
#[derive(Clone, Debug)]
pub struct FixedRule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl FixedRule {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        FixedRule { x, w }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (xi, wi) in self.x.iter().zip(&self.w) {
            s += wi * f(c + h * xi);
        }
        s * h
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub converged: bool,
    pub panels: usize,
}

fn kronrod(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let d = h * XGK[j];
        let pair = f(c - d) + f(c + d);
        k += pair * WGK[j];
        if j % 2 == 1 {
            g += pair * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties by position keep the refinement order deterministic
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive Gauss–Kronrod on `[a, b]`, starting from `initial` equal panels.
///
/// Stops once the summed error estimate is at most `tol` or `max_panels` is reached.
pub fn adaptive(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    initial: usize,
    tol: f64,
    max_panels: usize,
) -> Quadrature {
    let n0 = initial.max(1);
    let mut heap = BinaryHeap::with_capacity(2 * n0);
    let step = (b - a) / n0 as f64;
    for i in 0..n0 {
        let lo = a + step * i as f64;
        let hi = if i + 1 == n0 {
            b
        } else {
            a + step * (i + 1) as f64
        };
        let (value, err) = kronrod(f, lo, hi);
        heap.push(Panel {
            a: lo,
            b: hi,
            value,
            err,
        });
    }
    let total_err = |h: &BinaryHeap<Panel>| h.iter().map(|p| p.err).sum::<f64>();
    let mut err = total_err(&heap);
    while err > tol && heap.len() < max_panels {
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod(f, worst.a, mid);
        let (v2, e2) = kronrod(f, mid, worst.b);
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        err += e1 + e2 - worst.err;
        if err < 0.0 {
            err = total_err(&heap);
        }
    }
    // sum in position order so the result does not depend on heap layout
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels
        .iter()
        .fold(Complex64::new(0.0, 0.0), |s, p| s + p.value);
    let error = panels.iter().map(|p| p.err).sum::<f64>();
    Quadrature {
        value,
        error,
        converged: error <= tol,
        panels: panels.len(),
    }
}

/// Real-valued convenience wrapper around [`adaptive`].
pub fn adaptive_real(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    initial: usize,
    tol: f64,
    max_panels: usize,
) -> (f64, f64, bool) {
    let g = |x: f64| Complex64::new(f(x), 0.0);
    let q = adaptive(&g, a, b, initial, tol, max_panels);
    (q.value.re, q.error, q.converged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rules_integrate_polynomials() {
        for n in [1usize, 2, 5, 12, 20] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            let got: f64 = x
                .iter()
                .zip(&w)
                .map(|(x, w)| w * x.powi(deg as i32 - 1))
                .sum();
            let want = if (deg - 1) % 2 == 0 {
                2.0 / deg as f64
            } else {
                0.0
            };
            assert!((got - want).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let f = |x: f64| Complex64::new(0.0, 200.0 * x).exp();
        let q = adaptive(&f, 0.0, 1.0, 4, 1e-13, 10_000);
        let want = (Complex64::new(0.0, 200.0).exp() - 1.0) / Complex64::new(0.0, 200.0);
        assert!(q.converged);
        assert!((q.value - want).norm() < 1e-13);
    }

    #[test]
    fn adaptive_real_sqrt_singularity() {
        let (v, _, ok) = adaptive_real(&|x: f64| x.sqrt(), 0.0, 1.0, 1, 1e-12, 5000);
        assert!(ok);
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }
}
