//! Mollified dyadic blocks D_N, the damped series I(z), and the Type I / Type II dichotomy.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::poly::n_pow_neg;
use super::{best_of, DetectorOutcome};
use crate::arith::{mollified_table, ArithTables};
use crate::error::{range_err, Error, Result};
use crate::numeric::gamma::{in_validated_region, ln_gamma};
use crate::params::ScaleParams;
use crate::zerosets::Zero;

/// Heights are batched as T = 7.5·2^k so that γ ∈ [T, 2T).
pub const DICHOTOMY_BASE_T: f64 = 7.5;

/// e^{-41.45} < 10^{-18}
const CUTOFF_FACTOR: f64 = 41.45;

pub const TYPE_TWO_THRESHOLD: f64 = 1.0 / 3.0;

/// N = 2^j with T^{1/100} ≤ N ≤ T^{1/2}(log T)².
pub fn dyadic_ns(params: &ScaleParams) -> Vec<u64> {
    let lo = params.t.powf(0.01);
    let hi = params.t.sqrt() * params.log_t().powi(2);
    (0..63)
        .map(|j| 1u64 << j)
        .filter(|&n| n as f64 >= lo && n as f64 <= hi)
        .collect()
}

pub fn dichotomy_height(gamma: f64) -> Result<f64> {
    if !(gamma >= DICHOTOMY_BASE_T) {
        return Err(range_err("γ", gamma, format!("[{DICHOTOMY_BASE_T}, inf)")));
    }
    let k = (gamma / DICHOTOMY_BASE_T).log2().floor();
    Ok(DICHOTOMY_BASE_T * 2f64.powf(k))
}

/// a(n) for n ≤ n_max, with the damping scale and length M.
#[derive(Clone, Debug)]
pub struct MollifiedCoefficients {
    m: f64,
    y: f64,
    cutoff: usize,
    a: Vec<i32>,
}

impl MollifiedCoefficients {
    /// Coefficients up to max(⌈41.45·Y⌉, 2·max N).
    pub fn new(params: &ScaleParams, tables: &ArithTables) -> Result<Self> {
        let y = params.damping();
        let cutoff = (CUTOFF_FACTOR * y).ceil() as usize;
        let top = dyadic_ns(params).last().map_or(0, |&n| 2 * n as usize);
        Self::up_to(params, tables, cutoff, cutoff.max(top))
    }

    fn up_to(
        params: &ScaleParams,
        tables: &ArithTables,
        cutoff: usize,
        n_max: usize,
    ) -> Result<Self> {
        if n_max > tables.limit() {
            return Err(range_err(
                "coefficient range",
                n_max as f64,
                format!("[1, {}]", tables.limit()),
            ));
        }
        let m = params.mollifier_length();
        Ok(MollifiedCoefficients {
            m,
            y: params.damping(),
            cutoff,
            a: mollified_table(tables, m, n_max)?,
        })
    }

    pub fn mollifier_length(&self) -> f64 {
        self.m
    }

    pub fn damping(&self) -> f64 {
        self.y
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn a(&self, n: usize) -> i32 {
        self.a[n]
    }

    fn term(&self, n: usize, s: Complex64) -> Complex64 {
        let c = self.a[n];
        if c == 0 {
            return Complex64::new(0.0, 0.0);
        }
        n_pow_neg(n as u64, s) * (c as f64 * (-(n as f64) / self.y).exp())
    }

    fn range_sum(&self, lo: usize, hi: usize, s: Complex64) -> Complex64 {
        (lo..=hi).map(|n| self.term(n, s)).sum()
    }

    /// Σ_{N < n ≤ 2N} a(n) n^{-s} e^{-n/Y}.
    pub fn d_n(&self, s: Complex64, n: u64) -> Result<Complex64> {
        let hi = 2 * n as usize;
        if hi >= self.a.len() {
            return Err(range_err(
                "2N",
                hi as f64,
                format!("[1, {}]", self.a.len() - 1),
            ));
        }
        Ok(self.range_sum(n as usize + 1, hi, s))
    }

    /// Σ_{N < n ≤ 2N} |a(n)| n^{-σ} e^{-n/Y}.
    pub fn d_n_abs(&self, sigma: f64, n: u64) -> f64 {
        ((n as usize + 1)..=(2 * n as usize).min(self.a.len() - 1))
            .map(|k| {
                self.a[k].abs() as f64 * (k as f64).powf(-sigma) * (-(k as f64) / self.y).exp()
            })
            .sum()
    }

    pub fn i_series(&self, z: Complex64) -> Result<ISeries> {
        let cut = self.cutoff;
        let a = 0.5 - z.re;
        let rate = 1.0 / self.y - a.max(0.0) / cut as f64;
        if !(rate > 0.0) {
            return Err(range_err(
                "Re z",
                z.re,
                "cutoff beyond the maximum of n^{1/2-Re z} e^{-n/Y}",
            ));
        }
        let c = cut as f64;
        // |a(n)| ≤ τ(n) ≤ 2√n
        let truncation_bound = 2.0 * c.powf(a) * (-c / self.y).exp() / rate;
        Ok(ISeries {
            z,
            value: self.range_sum(1, cut, z),
            cutoff: cut,
            truncation_bound,
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ISeries {
    pub z: Complex64,
    pub value: Complex64,
    pub cutoff: usize,
    pub truncation_bound: f64,
}

pub fn dirichlet_d_n(
    s: Complex64,
    n: u64,
    params: &ScaleParams,
    tables: &ArithTables,
) -> Result<Complex64> {
    let cut = (CUTOFF_FACTOR * params.damping()).ceil() as usize;
    MollifiedCoefficients::up_to(params, tables, cut, 2 * n as usize)?.d_n(s, n)
}

pub fn i_series(z: Complex64, params: &ScaleParams, tables: &ArithTables) -> Result<ISeries> {
    let cut = (CUTOFF_FACTOR * params.damping()).ceil() as usize;
    MollifiedCoefficients::up_to(params, tables, cut, cut)?.i_series(z)
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeOneOutcome {
    pub best: DetectorOutcome,
    /// one outcome per dyadic N, ascending
    pub blocks: Vec<DetectorOutcome>,
}

fn type1_with(
    rho: Zero,
    params: &ScaleParams,
    coeffs: &MollifiedCoefficients,
) -> Result<TypeOneOutcome> {
    let ns = dyadic_ns(params);
    if ns.is_empty() {
        return Err(Error::Config(format!(
            "no dyadic N in range at T = {}",
            params.t
        )));
    }
    let thr = params.detector_threshold();
    let blocks = ns
        .iter()
        .map(|&n| {
            Ok(DetectorOutcome::new(
                n as f64,
                coeffs.d_n(rho.rho(), n)?,
                thr,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = best_of(&blocks).expect("non-empty");
    Ok(TypeOneOutcome { best, blocks })
}

/// max_N |D_N(ρ)| against 1/(3 log T).
pub fn type1_check(
    rho: Zero,
    params: &ScaleParams,
    tables: &ArithTables,
) -> Result<TypeOneOutcome> {
    type1_with(rho, params, &MollifiedCoefficients::new(params, tables)?)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TypeTwo {
    pub value: Complex64,
    pub i_value: Complex64,
    /// Y^{1-ρ} Γ(1-ρ) M(1)
    pub residue: Complex64,
    pub m1: f64,
    pub truncation_bound: f64,
}

fn type2_with(rho: Zero, tables: &ArithTables, coeffs: &MollifiedCoefficients) -> Result<TypeTwo> {
    let s = Complex64::new(1.0, 0.0) - rho.rho();
    if !in_validated_region(s) {
        return Err(Error::Numeric(format!(
            "Γ({} {:+}i) is outside the validated region",
            s.re, s.im
        )));
    }
    let m1 = tables.mobius_harmonic(coeffs.m)?;
    let residue = (s * coeffs.y.ln() + ln_gamma(s)).exp() * m1;
    let i = coeffs.i_series(rho.rho())?;
    Ok(TypeTwo {
        value: i.value - residue,
        i_value: i.value,
        residue,
        m1,
        truncation_bound: i.truncation_bound,
    })
}

/// I(ρ) − Y^{1-ρ}Γ(1-ρ)M(1); equal to the Type II contour integral only when ζ(ρ) = 0.
pub fn type2_value(rho: Zero, params: &ScaleParams, tables: &ArithTables) -> Result<TypeTwo> {
    let cut = (CUTOFF_FACTOR * params.damping()).ceil() as usize;
    type2_with(
        rho,
        tables,
        &MollifiedCoefficients::up_to(params, tables, cut, cut)?,
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct Dichotomy {
    pub rho: Zero,
    pub t: f64,
    pub type1: TypeOneOutcome,
    pub type2: TypeTwo,
    pub type1_passed: bool,
    pub type2_passed: bool,
    /// max(3 log T·max|D_N|, 3|type2|)
    pub indicator: f64,
    pub passed: bool,
    /// |e^{-1/Y} + Σ_N D_N + rest − (type2 + residue)|
    pub identity_residual: f64,
    pub identity_tolerance: f64,
    pub identity_holds: bool,
    /// all blocks small and identity holds ⇒ |type2| ≥ 1/3
    pub cross_check: bool,
}

pub(crate) fn dichotomy_with(
    rho: Zero,
    params: &ScaleParams,
    tables: &ArithTables,
    coeffs: &MollifiedCoefficients,
) -> Result<Dichotomy> {
    let type1 = type1_with(rho, params, coeffs)?;
    let type2 = type2_with(rho, tables, coeffs)?;
    let s = rho.rho();
    let ns = dyadic_ns(params);
    let n_lo = *ns.first().expect("checked in type1") as usize;
    let n_hi = 2 * *ns.last().expect("checked in type1") as usize;
    let cut = coeffs.cutoff;
    let blocks: Complex64 = type1.blocks.iter().map(|b| b.value).sum();
    let mut rest = coeffs.range_sum(2, n_lo.min(cut), s);
    if n_hi < cut {
        rest += coeffs.range_sum(n_hi + 1, cut, s);
    }
    // blocks reaching past the I cutoff contribute terms I does not contain
    let overshoot = if n_hi > cut {
        coeffs.range_sum(cut + 1, n_hi, s)
    } else {
        Complex64::new(0.0, 0.0)
    };
    let first = (-1.0 / coeffs.y).exp();
    let identity_residual =
        (first + blocks + rest - overshoot - (type2.value + type2.residue)).norm();
    let scale: f64 = (1..=cut.max(n_hi))
        .map(|n| {
            coeffs.a[n].abs() as f64 * (n as f64).powf(-rho.beta) * (-(n as f64) / coeffs.y).exp()
        })
        .sum();
    let identity_tolerance = 1e-12 * scale + 1e-14;
    let identity_holds = identity_residual <= identity_tolerance;
    let log_t = params.log_t();
    let t1 = type1.best.magnitude;
    let t2 = type2.value.norm();
    let indicator = (3.0 * log_t * t1).max(3.0 * t2);
    let type1_passed = type1.best.passed;
    let type2_passed = t2 >= TYPE_TWO_THRESHOLD;
    let cross_check = !(type1.blocks.iter().all(|b| !b.passed) && identity_holds) || type2_passed;
    Ok(Dichotomy {
        rho,
        t: params.t,
        type1,
        type2,
        type1_passed,
        type2_passed,
        indicator,
        passed: indicator >= 1.0,
        identity_residual,
        identity_tolerance,
        identity_holds,
        cross_check,
    })
}

pub fn dichotomy_check(rho: Zero, params: &ScaleParams, tables: &ArithTables) -> Result<Dichotomy> {
    dichotomy_with(
        rho,
        params,
        tables,
        &MollifiedCoefficients::new(params, tables)?,
    )
}

/// Dichotomy at the batched height for every zero, in input order.
pub fn dichotomy_batch(
    zeros: &[Zero],
    params: &ScaleParams,
    tables: &ArithTables,
) -> Result<Vec<Dichotomy>> {
    let mut heights: Vec<f64> = zeros
        .iter()
        .map(|z| dichotomy_height(z.gamma))
        .collect::<Result<_>>()?;
    let per_zero = heights.clone();
    heights.sort_by(f64::total_cmp);
    heights.dedup();
    let ctx: Vec<(f64, ScaleParams, MollifiedCoefficients)> = heights
        .iter()
        .map(|&t| {
            let p = params.with_t(t)?;
            let c = MollifiedCoefficients::new(&p, tables)?;
            Ok((t, p, c))
        })
        .collect::<Result<_>>()?;
    zeros
        .par_iter()
        .zip(per_zero.par_iter())
        .map(|(z, t)| {
            let (_, p, c) = ctx.iter().find(|(h, _, _)| h == t).expect("height present");
            dichotomy_with(*z, p, tables, c)
        })
        .collect()
}
