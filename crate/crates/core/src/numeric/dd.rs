//! Double-double arithmetic, just enough for reducing large phases.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

pub const TWO_PI: Dd = Dd {
    hi: std::f64::consts::TAU,
    lo: 2.449_293_598_294_706_4e-16,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    pub fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }

    pub fn round(self) -> Dd {
        let r = self.hi.round();
        if r == self.hi {
            let lo = self.lo.round();
            let (hi, lo) = quick_two_sum(r, lo);
            Dd { hi, lo }
        } else if (r - self.hi).abs() == 0.5 && self.lo != 0.0 {
            // hi sits on a half-integer; lo decides the direction
            if (self.lo > 0.0) == (r > self.hi) {
                Dd::from_f64(r)
            } else {
                Dd::from_f64(r - (r - self.hi).signum())
            }
        } else {
            Dd::from_f64(r)
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

/// Natural log of a positive integer below 2^53, to roughly 32 digits.
pub fn ln_u64(n: u64) -> Dd {
    assert!(n > 0 && n < (1u64 << 53));
    let x = n as f64;
    let mut e = x.log2().floor() as i32;
    let mut m = x / 2f64.powi(e);
    if m > std::f64::consts::SQRT_2 {
        m *= 0.5;
        e += 1;
    }
    // ln m = 2 atanh(u), u = (m-1)/(m+1), |u| < 0.172
    let num = Dd::from_f64(m - 1.0);
    let (dh, dl) = two_sum(m, 1.0);
    let u = num.div(Dd::new(dh, dl));
    let u2 = u * u;
    let mut term = u;
    let mut sum = u;
    let mut k = 1.0;
    while k < 80.0 {
        term = term * u2;
        k += 2.0;
        let add = term.div(Dd::from_f64(k));
        sum = sum + add;
        if add.hi.abs() < 1e-34 {
            break;
        }
    }
    LN2.mul_f64(e as f64) + sum.mul_f64(2.0)
}

/// `t * ln n` reduced into [-pi, pi], computed in double-double.
pub fn reduced_phase(t: f64, n: u64) -> f64 {
    let x = ln_u64(n).mul_f64(t);
    let k = x.div(TWO_PI).round();
    let r = x - TWO_PI * k;
    r.to_f64()
}
