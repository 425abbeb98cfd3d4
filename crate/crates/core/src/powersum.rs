//! Power sums f(t) = Σ c_r exp(t z_r): hypothesis checks, certified maximisation over
//! [A, 2A], the classical counterexample families, and a Poisson-kernel majorant.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::quad::adaptive;
use crate::weights::BumpWeight;

pub const DEFAULT_TERM_BUDGET: usize = 1_000_000;
pub const DEFAULT_EVAL_BUDGET: f64 = 4.0e9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub z: Complex64,
    pub c: Complex64,
}

impl Term {
    pub fn new(z: Complex64, c: Complex64) -> Self {
        Term { z, c }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSumConfig {
    pub terms: Vec<Term>,
    pub a: f64,
    /// Coefficient budget; the hypotheses need B ≥ Σ|c_r|.
    pub b: f64,
}

impl PowerSumConfig {
    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|r| r.c * (r.z * t).exp()).sum()
    }

    pub fn coefficient_total(&self) -> f64 {
        self.terms.iter().map(|r| r.c.norm()).sum()
    }

    /// Rigorous bound on |f'| over [A, 2A].
    pub fn lipschitz_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|r| {
                let growth = (self.a * r.z.re).max(2.0 * self.a * r.z.re).exp();
                r.c.norm() * r.z.norm() * growth
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    /// Hypothesis number, 1 to 5.
    pub hypothesis: u8,
    pub term: Option<usize>,
    pub detail: String,
}

/// Lists every violated hypothesis with the offending term.
pub fn validate_config(cfg: &PowerSumConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let Some(first) = cfg.terms.first() else {
        out.push(Violation {
            hypothesis: 1,
            term: None,
            detail: "no terms".into(),
        });
        return out;
    };
    if first.z != Complex64::new(0.0, 0.0) || first.c != Complex64::new(1.0, 0.0) {
        out.push(Violation {
            hypothesis: 1,
            term: Some(0),
            detail: format!("first term is (z={}, c={}), need (0, 1)", first.z, first.c),
        });
    }
    let a = cfg.a;
    let small_freq = cfg.b.max(1.0).ln().powi(2) / a;
    for (i, r) in cfg.terms.iter().enumerate() {
        if r.z.im < 0.0 {
            out.push(Violation {
                hypothesis: 2,
                term: Some(i),
                detail: format!("Im z = {} < 0", r.z.im),
            });
        }
        if r.z.re.abs() > 1.0 / (10.0 * a) {
            out.push(Violation {
                hypothesis: 3,
                term: Some(i),
                detail: format!("|Re z| = {} > 1/(10A)", r.z.re.abs()),
            });
        }
        if r.z.im.abs() <= small_freq && r.c.arg().abs() > 0.1 {
            out.push(Violation {
                hypothesis: 4,
                term: Some(i),
                detail: format!("|arg c| = {} > 1/10 at low frequency", r.c.arg().abs()),
            });
        }
    }
    let total = cfg.coefficient_total();
    if cfg.b < total {
        out.push(Violation {
            hypothesis: 5,
            term: None,
            detail: format!("B = {} < Σ|c| = {}", cfg.b, total),
        });
    }
    out
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SearchOptions {
    pub tolerance: f64,
    /// Maximum number of term evaluations (grid points × terms).
    pub eval_budget: f64,
    /// Run even when hypotheses fail (counterexample study).
    pub allow_invalid: bool,
}

impl SearchOptions {
    pub fn new(tolerance: f64) -> Self {
        SearchOptions {
            tolerance,
            eval_budget: DEFAULT_EVAL_BUDGET,
            allow_invalid: false,
        }
    }

    pub fn overriding(mut self) -> Self {
        self.allow_invalid = true;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub t_star: f64,
    pub value: f64,
    pub grid_step: f64,
    pub grid_points: usize,
    pub lipschitz_bound: f64,
    /// sup_{[A,2A]} |f| - value is at most this.
    pub certified_gap: f64,
}

/// Grid maximisation requiring the hypotheses to hold.
pub fn power_sum_search(cfg: &PowerSumConfig, tolerance: f64) -> Result<SearchResult> {
    power_sum_search_with(cfg, &SearchOptions::new(tolerance))
}

const CHUNK: usize = 2048;
const ANCHOR: usize = 64;

pub fn power_sum_search_with(cfg: &PowerSumConfig, opts: &SearchOptions) -> Result<SearchResult> {
    if cfg.terms.is_empty() {
        return Err(Error::Input("power sum has no terms".into()));
    }
    if !(cfg.a > 0.0 && cfg.a.is_finite()) {
        return Err(Error::Config(format!("A must be positive, got {}", cfg.a)));
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::Config(format!(
            "tolerance must be positive, got {}",
            opts.tolerance
        )));
    }
    if !opts.allow_invalid {
        let v = validate_config(cfg);
        if !v.is_empty() {
            let list: Vec<String> = v
                .iter()
                .map(|v| format!("H{}: {}", v.hypothesis, v.detail))
                .collect();
            return Err(Error::Precondition(format!(
                "hypotheses violated (pass an override to study counterexamples): {}",
                list.join("; ")
            )));
        }
    }
    let a = cfg.a;
    let lip = cfg.lipschitz_bound();
    let mut intervals = if lip > 0.0 {
        (a * lip / (2.0 * opts.tolerance)).ceil().max(1.0)
    } else {
        1.0
    };
    let required = (intervals + 1.0) * cfg.terms.len() as f64;
    if required > opts.eval_budget {
        return Err(Error::Resource {
            what: "power-sum grid",
            required,
            budget: opts.eval_budget,
        });
    }
    if intervals < 1.0 {
        intervals = 1.0;
    }
    let n = intervals as usize;
    let step = a / n as f64;
    let points = n + 1;
    let chunks = points.div_ceil(CHUNK);
    let best = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * CHUNK;
            let hi = ((ci + 1) * CHUNK).min(points);
            scan(cfg, a, step, lo, hi)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::NEG_INFINITY, 0usize), |acc, cand| {
            if cand.0 > acc.0 {
                cand
            } else {
                acc
            }
        });
    // A + n·(A/n) can round past 2A
    let t_star = (a + step * best.1 as f64).min(2.0 * a);
    Ok(SearchResult {
        t_star,
        value: cfg.eval(t_star).norm(),
        grid_step: step,
        grid_points: points,
        lipschitz_bound: lip,
        certified_gap: lip * step / 2.0,
    })
}

/// Max of |f| over grid indices lo..hi; earliest index wins ties.
fn scan(cfg: &PowerSumConfig, a: f64, step: f64, lo: usize, hi: usize) -> (f64, usize) {
    let r = cfg.terms.len();
    let rot: Vec<Complex64> = cfg.terms.iter().map(|t| (t.z * step).exp()).collect();
    let mut cur = vec![Complex64::new(0.0, 0.0); r];
    let mut best = (f64::NEG_INFINITY, lo);
    for j in lo..hi {
        if (j - lo) % ANCHOR == 0 {
            let tj = (a + step * j as f64).min(2.0 * a);
            for (c, term) in cur.iter_mut().zip(&cfg.terms) {
                *c = term.c * (term.z * tj).exp();
            }
        }
        let mut s = Complex64::new(0.0, 0.0);
        for (c, w) in cur.iter_mut().zip(&rot) {
            s += *c;
            *c *= *w;
        }
        let v = s.norm();
        if v > best.0 {
            best = (v, j);
        }
    }
    best
}

/// (t, |f(t)|) on `n` equally spaced points of [A, 2A].
pub fn trace(cfg: &PowerSumConfig, n: usize) -> Vec<(f64, f64)> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let t = cfg.a + cfg.a * i as f64 / (n - 1) as f64;
            (t, cfg.eval(t).norm())
        })
        .collect()
}

pub fn write_trace_csv<W: Write>(out: &mut W, rows: &[(f64, f64)]) -> Result<()> {
    writeln!(out, "t,abs_f")?;
    for (t, v) in rows {
        writeln!(out, "{t},{v:e}")?;
    }
    Ok(())
}

fn unit() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn imag(y: f64) -> Complex64 {
    Complex64::new(0.0, y)
}

/// z_r = 2πi(r-1)/R, c_r = 1: vanishes at every integer t in (0, R).
pub fn gen_vertical_ap(r: usize, a: f64) -> Result<PowerSumConfig> {
    if r < 2 {
        return Err(Error::Config(format!("R must be at least 2, got {r}")));
    }
    let terms = (0..r)
        .map(|k| Term::new(imag(2.0 * PI * k as f64 / r as f64), unit()))
        .collect();
    Ok(PowerSumConfig {
        terms,
        a,
        b: r as f64,
    })
}

/// (1 - e(t/(20A²)))^k expanded over subsets: 2^k terms with c = ±1.
pub fn gen_signed(k: usize, a: f64) -> Result<PowerSumConfig> {
    gen_signed_budget(k, a, DEFAULT_TERM_BUDGET)
}

pub fn gen_signed_budget(k: usize, a: f64, budget: usize) -> Result<PowerSumConfig> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if k >= 63 || (1usize << k) > budget {
        return Err(Error::Resource {
            what: "signed construction terms",
            required: 2f64.powi(k as i32),
            budget: budget as f64,
        });
    }
    let freq = 2.0 * PI / (20.0 * a * a);
    let terms = (0..(1usize << k))
        .map(|mask: usize| {
            let size = mask.count_ones();
            let c = if size % 2 == 0 { 1.0 } else { -1.0 };
            Term::new(imag(freq * size as f64), Complex64::new(c, 0.0))
        })
        .collect();
    Ok(PowerSumConfig {
        terms,
        a,
        b: 2f64.powi(k as i32),
    })
}

/// The bump used for the smooth family: w₀ mapped from [1/2, 2] onto [0, 1].
pub fn smooth_profile(w: &BumpWeight, x: f64) -> f64 {
    w.eval_w0(0.5 + 1.5 * x)
}

/// c_r = f(r/R), z_r = πir/(2A), r = 1..R, with f the rescaled bump.
pub fn gen_smooth_poisson(r: usize, a: f64, w: &BumpWeight) -> Result<PowerSumConfig> {
    if r < 8 {
        return Err(Error::Config(format!("R must be at least 8, got {r}")));
    }
    let terms: Vec<Term> = (1..=r)
        .map(|k| {
            let c = smooth_profile(w, k as f64 / r as f64);
            Term::new(imag(PI * k as f64 / (2.0 * a)), Complex64::new(c, 0.0))
        })
        .collect();
    let b = terms.iter().map(|t| t.c.norm()).sum::<f64>();
    Ok(PowerSumConfig { terms, a, b })
}

/// Coefficients of (1 + 3x + 4x² + 3x³ + x⁴)^k.
pub fn bourgain_coefficients(k: usize) -> Vec<f64> {
    let base = [1.0, 3.0, 4.0, 3.0, 1.0];
    let mut out = vec![1.0];
    for _ in 0..k {
        let mut next = vec![0.0; out.len() + 4];
        for (i, x) in out.iter().enumerate() {
            for (j, y) in base.iter().enumerate() {
                next[i + j] += x * y;
            }
        }
        out = next;
    }
    out
}

/// (e^{4πiθ} + 3e^{2πiθ} + 4 + 3e^{-2πiθ} + e^{-4πiθ})^k with θ = t/(3A), merged by frequency.
///
/// Frequencies are shifted by 4πk/(3A), a unimodular factor, so they start at 0 with
/// coefficient 1 and are non-negative. R counts multiplicity: 12^k.
pub fn gen_bourgain(k: usize, a: f64) -> Result<PowerSumConfig> {
    if k == 0 || k > 6 {
        return Err(Error::Resource {
            what: "Bourgain construction (12^k terms)",
            required: 12f64.powi(k as i32),
            budget: 12f64.powi(6),
        });
    }
    let coeffs = bourgain_coefficients(k);
    let freq = 2.0 * PI / (3.0 * a);
    let terms = coeffs
        .iter()
        .enumerate()
        .map(|(m, &c)| Term::new(imag(freq * m as f64), Complex64::new(c, 0.0)))
        .collect();
    Ok(PowerSumConfig {
        terms,
        a,
        b: 12f64.powi(k as i32),
    })
}

/// A random configuration satisfying all five hypotheses.
pub fn random_valid_config<G: Rng>(rng: &mut G, r: usize, a: f64) -> PowerSumConfig {
    let r = r.max(1);
    let mags: Vec<f64> = (1..r).map(|_| rng.gen_range(0.05..3.0)).collect();
    let b = (1.0 + mags.iter().sum::<f64>()) * rng.gen_range(1.0..1.5);
    let small = b.max(1.0).ln().powi(2) / a;
    let scale = match rng.gen_range(0..3) {
        0 => 1.0 / a,
        1 => 10.0 / a,
        _ => 3.0,
    };
    let mut terms = vec![Term::new(Complex64::new(0.0, 0.0), unit())];
    for m in mags {
        let im = rng.gen_range(0.0..=scale);
        let re = rng.gen_range(-1.0..=1.0) / (10.0 * a);
        let arg = if im <= small {
            rng.gen_range(-0.1..=0.1)
        } else {
            rng.gen_range(-PI..PI)
        };
        terms.push(Term::new(
            Complex64::new(re, im),
            Complex64::from_polar(m, arg),
        ));
    }
    PowerSumConfig { terms, a, b }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PoissonResult {
    /// (y/π)∫_{-L}^{L} log|f(t)| / ((t-x)² + y²) dt
    pub truncated: f64,
    pub quadrature_error: f64,
    /// Upper bound for the part beyond |t| > L under log|f(t)| ≤ κ|t|^{1/2}.
    pub tail_bound: f64,
    pub majorant: f64,
}

/// Poisson-kernel majorant of log|f(z)| from boundary samples of log|f| on ℝ.
pub fn poisson_majorant(
    log_abs_f: &(dyn Fn(f64) -> f64 + Sync),
    z: Complex64,
    truncation: f64,
    kappa: f64,
) -> Result<PoissonResult> {
    let (x, y) = (z.re, z.im);
    if !(y > 0.0) {
        return Err(Error::Input(format!("need Im z > 0, got {y}")));
    }
    if !(truncation >= 10.0 * z.norm()) {
        return Err(Error::Input(format!(
            "truncation {truncation} must be at least 10|z| = {}",
            10.0 * z.norm()
        )));
    }
    if !(kappa >= 0.0) {
        return Err(Error::Input(format!(
            "kappa must be non-negative, got {kappa}"
        )));
    }
    // t = x + y tan(φ/2) turns the kernel into dφ/(2π)
    let lo = 2.0 * ((-truncation - x) / y).atan();
    let hi = 2.0 * ((truncation - x) / y).atan();
    let bad = std::sync::atomic::AtomicBool::new(false);
    let g = |phi: f64| {
        let t = x + y * (0.5 * phi).tan();
        let v = log_abs_f(t);
        if !v.is_finite() {
            bad.store(true, std::sync::atomic::Ordering::Relaxed);
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(v / (2.0 * PI), 0.0)
    };
    let q = adaptive(&g, lo, hi, 64, 1e-11, 200_000);
    if bad.load(std::sync::atomic::Ordering::Relaxed) {
        return Err(Error::Input("non-finite log|f| sample".into()));
    }
    let tail_bound = 4.0 * kappa * y / (0.81 * PI * truncation.sqrt());
    Ok(PoissonResult {
        truncated: q.value.re,
        quadrature_error: q.error,
        tail_bound,
        majorant: q.value.re + tail_bound + q.error,
    })
}
