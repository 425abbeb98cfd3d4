//! The smooth bump w₀ on [1/2, 2], its derivatives, and its Mellin transform W₀.
//!
//! With h(x) = exp(-1/(x(1-x))) on (0, 1), C = ∫₀¹ h and H(y) = C⁻¹∫₀^y h,
//! the weight is w₀(x) = H(2x - 1) - H(x - 1).

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{range_err, Error, Result};
use crate::numeric::expm1_over;
use crate::numeric::quad::{adaptive, adaptive_real, FixedRule};

const H_CELLS: usize = 4096;
pub const MAX_DERIVATIVE: usize = 12;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Brute-force maximum (t-step 0.01) over σ ∈ {-1, 0, 1}, t ∈ [0, 400] of |W₀(σ+it)| 2^{-|σ|} exp(√(|t|/2)), rounded up.
pub const DECAY_K: f64 = 1.91;
/// Same maximum for the sharper shape exp(-√|t|), over σ ∈ {-1, -1/2, 0, 1/2, 1}.
pub const DECAY_K_SHARP: f64 = 3.41;

#[inline]
pub fn bump_h(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        (-1.0 / (x * (1.0 - x))).exp()
    }
}

/// Shape of a decay envelope used for calibration and tail bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecayShape {
    /// exp(-√(|t|/2))
    HalfRoot,
    /// exp(-√|t|)
    Root,
}

impl DecayShape {
    pub fn envelope(self, t: f64) -> f64 {
        match self {
            DecayShape::HalfRoot => (-(0.5 * t.abs()).sqrt()).exp(),
            DecayShape::Root => (-t.abs().sqrt()).exp(),
        }
    }

    pub fn frozen_constant(self) -> f64 {
        match self {
            DecayShape::HalfRoot => DECAY_K,
            DecayShape::Root => DECAY_K_SHARP,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MellinEvaluation {
    pub s: Complex64,
    pub value: Complex64,
    pub estimated_error: f64,
    /// Set when the error estimate exceeds the configured tolerance.
    pub flagged: bool,
}

/// Anything that can supply Mellin transform values of a weight.
pub trait MellinProvider: Sync {
    fn mellin_value(&self, s: Complex64) -> Complex64;
}

impl<F: Fn(Complex64) -> Complex64 + Sync> MellinProvider for F {
    fn mellin_value(&self, s: Complex64) -> Complex64 {
        self(s)
    }
}

#[derive(Clone, Debug)]
pub struct BumpWeight {
    c: f64,
    tolerance: f64,
    /// H at the cell boundaries k / H_CELLS.
    h_table: Vec<f64>,
    cell_rule: FixedRule,
    /// Coefficients in v = x - 1/2 of P_k, where h^{(k)} = P_k(v) q^{-2k} h and q = 1/4 - v².
    deriv_polys: Vec<Vec<f64>>,
}

impl Default for BumpWeight {
    fn default() -> Self {
        Self::new()
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

fn poly_scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

fn poly_deriv(a: &[f64]) -> Vec<f64> {
    if a.len() <= 1 {
        return vec![0.0];
    }
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, x)| x * i as f64)
        .collect()
}

fn poly_eval(a: &[f64], v: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, c| acc * v + c)
}

fn derivative_polynomials(kmax: usize) -> Vec<Vec<f64>> {
    let q = vec![0.25, 0.0, -1.0];
    let dq = vec![0.0, -2.0];
    let q2 = poly_mul(&q, &q);
    let dq_q = poly_mul(&dq, &q);
    let mut out = vec![vec![1.0]];
    for k in 0..kmax {
        let p = &out[k];
        // P_{k+1} = P_k' q² - 2k P_k q' q + P_k q'
        let a = poly_mul(&poly_deriv(p), &q2);
        let b = poly_scale(&poly_mul(p, &dq_q), -2.0 * k as f64);
        let c = poly_mul(p, &dq);
        out.push(poly_add(&poly_add(&a, &b), &c));
    }
    out
}

impl BumpWeight {
    pub fn new() -> Self {
        Self::with_tolerance(DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(tolerance: f64) -> Self {
        let (c, _, _) = adaptive_real(&bump_h, 0.0, 1.0, 8, 1e-17, 10_000);
        let cell_rule = FixedRule::new(20);
        let width = 1.0 / H_CELLS as f64;
        let mut h_table = Vec::with_capacity(H_CELLS + 1);
        let mut acc = 0.0;
        h_table.push(0.0);
        for k in 0..H_CELLS {
            let a = k as f64 * width;
            acc += cell_rule.integrate(a, a + width, bump_h);
            h_table.push(acc / c);
        }
        h_table[H_CELLS] = 1.0;
        BumpWeight {
            c,
            tolerance,
            h_table,
            cell_rule: FixedRule::new(12),
            deriv_polys: derivative_polynomials(MAX_DERIVATIVE),
        }
    }

    /// C = ∫₀¹ h.
    pub fn normalization(&self) -> f64 {
        self.c
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// H(y) = C⁻¹ ∫₀^y h, clamped to 0 and 1 outside (0, 1).
    pub fn big_h(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return 1.0;
        }
        let k = ((y * H_CELLS as f64) as usize).min(H_CELLS - 1);
        let a = k as f64 / H_CELLS as f64;
        self.h_table[k] + self.cell_rule.integrate(a, y, bump_h) / self.c
    }

    pub fn eval_w0(&self, x: f64) -> f64 {
        if !(x > 0.5 && x < 2.0) {
            return 0.0;
        }
        self.big_h(2.0 * x - 1.0) - self.big_h(x - 1.0)
    }

    /// k-th derivative of h, for k ≤ 11.
    pub fn h_derivative(&self, x: f64, k: usize) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        let v = x - 0.5;
        let q = x * (1.0 - x);
        let p = poly_eval(&self.deriv_polys[k], v);
        if p == 0.0 {
            return 0.0;
        }
        let log_mag = p.abs().ln() - 2.0 * k as f64 * q.ln() - 1.0 / q;
        p.signum() * log_mag.exp()
    }

    pub fn eval_w0_derivative(&self, x: f64, j: usize) -> Result<f64> {
        if j > MAX_DERIVATIVE {
            return Err(Error::Config(format!(
                "derivative order {j} exceeds supported maximum {MAX_DERIVATIVE}"
            )));
        }
        if j == 0 {
            return Ok(self.eval_w0(x));
        }
        if !(x > 0.5 && x < 2.0) {
            return Ok(0.0);
        }
        Ok(if x <= 1.0 {
            2f64.powi(j as i32) / self.c * self.h_derivative(2.0 * x - 1.0, j - 1)
        } else {
            -self.h_derivative(x - 1.0, j - 1) / self.c
        })
    }

    /// |Σ_{m=0}^{m_max} w₀(x/2^m) - 1| with m_max = ⌈log₂ x⌉ + 1.
    pub fn partition_check(&self, x: f64) -> f64 {
        let m_max = x.log2().ceil().max(0.0) as i32 + 1;
        let mut s = 0.0;
        for m in 0..=m_max {
            s += self.eval_w0(x / 2f64.powi(m));
        }
        (s - 1.0).abs()
    }

    /// W₀(s) restricted to |Re s| ≤ 4, |Im s| ≤ 1e4.
    pub fn mellin_w0(&self, s: Complex64) -> Result<MellinEvaluation> {
        if s.re.abs() > 4.0 || !s.re.is_finite() {
            return Err(range_err("Re s", s.re, "[-4, 4]"));
        }
        if s.im.abs() > 1.0e4 || !s.im.is_finite() {
            return Err(range_err("Im s", s.im, "[-1e4, 1e4]"));
        }
        Ok(self.mellin_unchecked(s))
    }

    /// W₀(s) = -∫ w₀'(x) (x^s - 1)/s dx, integrated in u = log x on [-log 2, log 2].
    ///
    /// No range check; callers that need far-left values (trivial zeros) use this directly.
    pub fn mellin_unchecked(&self, s: Complex64) -> MellinEvaluation {
        let ln2 = std::f64::consts::LN_2;
        let c = self.c;
        let integrand = |u: f64| -> Complex64 {
            let x = u.exp();
            let dw = if u < 0.0 {
                2.0 / c * bump_h(2.0 * x - 1.0)
            } else {
                -bump_h(x - 1.0) / c
            };
            if dw == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            // (x^s - 1)/s = u · (e^{su} - 1)/(su)
            -(dw * x * u) * expm1_over(s * u)
        };
        let per_half = 2 + (s.im.abs() * ln2 / std::f64::consts::PI).ceil() as usize;
        let budget = 64 * per_half + 2048;
        let target = 0.05 * self.tolerance;
        let left = adaptive(&integrand, -ln2, 0.0, per_half, 0.5 * target, budget);
        let right = adaptive(&integrand, 0.0, ln2, per_half, 0.5 * target, budget);
        let estimated_error = left.error + right.error;
        MellinEvaluation {
            s,
            value: left.value + right.value,
            estimated_error,
            flagged: estimated_error > self.tolerance,
        }
    }

    /// The measured ratio |W₀(σ+it)| 2^{-|σ|} / envelope(t).
    pub fn decay_ratio(&self, s: Complex64, shape: DecayShape) -> f64 {
        let v = self.mellin_unchecked(s).value.norm();
        v * 2f64.powf(-s.re.abs()) / shape.envelope(s.im)
    }

    /// Brute-force maximum of [`Self::decay_ratio`] over σ in `sigmas`, t in `[0, t_max]` with `step`.
    pub fn calibrate_decay(
        &self,
        shape: DecayShape,
        sigmas: &[f64],
        t_max: f64,
        step: f64,
    ) -> (f64, Complex64) {
        use rayon::prelude::*;
        let n = (t_max / step).round() as usize;
        let points: Vec<Complex64> = sigmas
            .iter()
            .flat_map(|&sg| (0..=n).map(move |i| Complex64::new(sg, (i as f64 * step).min(t_max))))
            .collect();
        let ratios: Vec<f64> = points
            .par_iter()
            .map(|&s| self.decay_ratio(s, shape))
            .collect();
        let mut best = (f64::NEG_INFINITY, Complex64::new(0.0, 0.0));
        for (r, s) in ratios.into_iter().zip(points) {
            if r > best.0 {
                best = (r, s);
            }
        }
        best
    }

    /// CSV rows `x,w0` on the given grid.
    pub fn write_w0_csv<W: Write>(&self, out: &mut W, xs: &[f64]) -> Result<()> {
        writeln!(out, "x,w0")?;
        for &x in xs {
            writeln!(out, "{x},{}", self.eval_w0(x))?;
        }
        Ok(())
    }

    /// CSV rows `t,abs_w0` for |W₀(it)|.
    pub fn write_mellin_csv<W: Write>(&self, out: &mut W, ts: &[f64]) -> Result<()> {
        writeln!(out, "t,abs_w0")?;
        for &t in ts {
            let v = self.mellin_unchecked(Complex64::new(0.0, t)).value.norm();
            writeln!(out, "{t},{v:e}")?;
        }
        Ok(())
    }
}

impl MellinProvider for BumpWeight {
    fn mellin_value(&self, s: Complex64) -> Complex64 {
        self.mellin_unchecked(s).value
    }
}

/// ∫_a^b f(x) x^{s-1} dx for a weight `f` supported in `[a, b] ⊂ (0, ∞)`, without integration by parts.
///
/// Used to cross-check W₀ and for step-function test doubles.
pub fn mellin_direct(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    s: Complex64,
    tol: f64,
) -> MellinEvaluation {
    let (la, lb) = (a.ln(), b.ln());
    let g = |u: f64| f(u.exp()) * (s * u).exp();
    let panels = 2 + (s.im.abs() * (lb - la) / std::f64::consts::PI).ceil() as usize;
    let q = adaptive(&g, la, lb, panels, 0.05 * tol, 64 * panels + 2048);
    MellinEvaluation {
        s,
        value: q.value,
        estimated_error: q.error,
        flagged: q.error > tol,
    }
}
