//! Numerical building blocks shared by the analytic modules.

pub mod dd;
pub mod gamma;
pub mod quad;

use num_complex::Complex64;

/// (e^z - 1) / z without cancellation near zero.
pub fn expm1_over(z: Complex64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let (x, y) = (z.re, z.im);
    let s = (0.5 * y).sin();
    let num = Complex64::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin());
    num / z
}
