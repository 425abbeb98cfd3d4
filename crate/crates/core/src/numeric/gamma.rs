//! Complex log-gamma (Lanczos, g = 7, nine terms) with reflection.

use num_complex::Complex64;
use std::f64::consts::PI;

const G: f64 = 7.0;
const P: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Validated region: |Re z| <= 4 and |Im z| <= 1e4 (away from the poles).
pub const VALID_RE: f64 = 4.0;
pub const VALID_IM: f64 = 1.0e4;

/// ln Γ(z), determined up to an additive multiple of 2πi.
///
/// Only `exp` of the result is meaningful; the branch of the imaginary part is not tracked.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z) Γ(1 - z) = π / sin(πz)
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(P[0], 0.0);
    for (i, p) in P.iter().enumerate().skip(1) {
        x += *p / (z + i as f64);
    }
    let t = z + G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + x.ln()
}

/// ln sin(πz), stable for large |Im z|.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if z.im.abs() < 20.0 {
        return (z * PI).sin().ln();
    }
    if z.im > 0.0 {
        // sin πz = (i/2) e^{-iπz} (1 - e^{2πiz})
        let w = (2.0 * PI * i * z).exp();
        -i * PI * z + (1.0 - w).ln() + Complex64::new(0.5f64.ln(), 0.5 * PI)
    } else {
        ln_sin_pi(z.conj()).conj()
    }
}

pub fn in_validated_region(z: Complex64) -> bool {
    z.re.abs() <= VALID_RE && z.im.abs() <= VALID_IM
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wrapped_diff(a: Complex64, b: Complex64) -> f64 {
        let d = a - b;
        let im = (d.im + PI).rem_euclid(2.0 * PI) - PI;
        Complex64::new(d.re, im).norm()
    }

    #[test]
    fn reference_values() {
        // ln Γ from a 50-digit evaluation: (re z, im z, re, im)
        let cases: [(f64, f64, f64, f64); 12] = [
            (
                0.5,
                14.134725141734693,
                -21.28383579968765729,
                23.305944848039549239,
            ),
            (
                0.5,
                -14.134725141734693,
                -21.28383579968765729,
                -23.305944848039549239,
            ),
            (1.5, 0.0, -0.12078223763524522235, 0.0),
            (2.0, 3.0, -2.0928517530927333496, 2.3023965434668676262),
            (-0.5, 7.25, -12.452708788617024052, 5.4783613766875396018),
            (-1.0, 0.5, 0.3906299057160610672, -4.4927996702893115041),
            (0.25, 100.0, -157.31198591151980437, 360.12442368392899024),
            (0.75, -236.5, -369.2079058414836849, -1056.5894943027274739),
            (1.0, 1000.0, -1566.423510622200878, 5908.5405938121983893),
            (0.5, 5000.0, -7853.0626954412784234, 37585.965965414520486),
            (-0.75, 2.0, -3.152832689989440986, -2.9307422565831503574),
            (0.1, 10000.0, -15710.728465564491993, 82102.775397397776067),
        ];
        for (a, b, re, im) in cases {
            let want = Complex64::new(re, im);
            let got = ln_gamma(Complex64::new(a, b));
            // relative error of Γ itself, allowing for rounding of a large phase
            let tol = 1e-12_f64.max(4.0 * f64::EPSILON * want.norm());
            let err = wrapped_diff(got, want);
            assert!(err < tol, "z = {a}+{b}i: err {err:e}");
        }
    }

    #[test]
    fn recurrence_holds() {
        for &(a, b) in &[(0.3, 2.0), (1.7, -40.0), (-0.4, 9.0)] {
            let z = Complex64::new(a, b);
            let lhs = ln_gamma(z + 1.0);
            let rhs = ln_gamma(z) + z.ln();
            assert!(wrapped_diff(lhs, rhs) < 1e-12);
        }
    }
}
