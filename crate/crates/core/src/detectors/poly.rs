//! Dirichlet polynomials, the smoothed prime sum S_Y and its U-sweep.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{best_of, lattice_grid, DetectorOutcome};
use crate::arith::ArithTables;
use crate::error::{range_err, Error, Result};
use crate::numeric::dd::reduced_phase;
use crate::params::ScaleParams;
use crate::weights::{BumpWeight, DECAY_K_SHARP};
use crate::zerosets::{is_y_half_isolated, Zero, ZeroSet};

/// Indices of product polynomials stay below this.
pub const MAX_PRODUCT_INDEX: u64 = 100_000_000;

const PHASE_REDUCTION_ABOVE: f64 = 1_099_511_627_776.0; // 2^40
const BLOCK: usize = 4096;

/// n^{-s}, reducing t·log n modulo 2π in double-double when it is large.
#[inline]
pub(crate) fn n_pow_neg(n: u64, s: Complex64) -> Complex64 {
    let ln = (n as f64).ln();
    let raw = s.im * ln;
    let phase = if raw.abs() > PHASE_REDUCTION_ABOVE {
        reduced_phase(s.im, n)
    } else {
        raw
    };
    Complex64::from_polar((-s.re * ln).exp(), -phase)
}

/// Σ c_n n^{-s} (optionally times exp(-n/Y₀)) with real coefficients on a finite support.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletPoly {
    terms: Vec<(u64, f64)>,
    damping: Option<f64>,
}

impl DirichletPoly {
    /// Sorts by n and merges repeated indices.
    pub fn new(mut terms: Vec<(u64, f64)>, damping: Option<f64>) -> Result<Self> {
        if let Some(y0) = damping {
            if !(y0 > 0.0 && y0.is_finite()) {
                return Err(range_err("damping length", y0, "(0, inf)"));
            }
        }
        if terms.iter().any(|&(n, c)| n == 0 || !c.is_finite()) {
            return Err(Error::Input(
                "Dirichlet coefficients need n ≥ 1 and finite values".into(),
            ));
        }
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(u64, f64)> = Vec::with_capacity(terms.len());
        for (n, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == n => last.1 += c,
                _ => merged.push((n, c)),
            }
        }
        merged.retain(|t| t.1 != 0.0);
        Ok(DirichletPoly {
            terms: merged,
            damping,
        })
    }

    /// The empty product, B ≡ 1.
    pub fn one() -> Self {
        DirichletPoly {
            terms: vec![(1, 1.0)],
            damping: None,
        }
    }

    /// Λ(n) w₀(n/Y).
    pub fn lambda_weighted(tables: &ArithTables, w: &BumpWeight, y: f64) -> Result<Self> {
        let (lo, hi) = prime_window(tables, y)?;
        let terms = (lo..=hi)
            .filter_map(|n| {
                let l = tables.lambda(n);
                if l == 0.0 {
                    return None;
                }
                let c = l * w.eval_w0(n as f64 / y);
                (c != 0.0).then_some((n as u64, c))
            })
            .collect();
        DirichletPoly::new(terms, None)
    }

    pub fn terms(&self) -> &[(u64, f64)] {
        &self.terms
    }

    pub fn damping(&self) -> Option<f64> {
        self.damping
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> Option<(u64, u64)> {
        Some((self.terms.first()?.0, self.terms.last()?.0))
    }

    #[inline]
    fn weight(&self, n: u64, c: f64) -> f64 {
        match self.damping {
            Some(y0) => c * (-(n as f64) / y0).exp(),
            None => c,
        }
    }

    fn sum_slice(&self, slice: &[(u64, f64)], s: Complex64) -> Complex64 {
        slice
            .iter()
            .map(|&(n, c)| self.weight(n, c) * n_pow_neg(n, s))
            .sum()
    }

    /// Sequential direct summation.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.sum_slice(&self.terms, s)
    }

    /// Blocked parallel summation; partial sums are merged in index order.
    pub fn eval_blocked(&self, s: Complex64) -> Complex64 {
        let parts: Vec<Complex64> = self
            .terms
            .par_chunks(BLOCK)
            .map(|c| self.sum_slice(c, s))
            .collect();
        parts.into_iter().sum()
    }

    /// Σ |c_n| n^{-σ} damping(n), the triangle-inequality bound at Re s = σ.
    pub fn abs_bound(&self, sigma: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(n, c)| self.weight(n, c).abs() * (n as f64).powf(-sigma))
            .sum()
    }

    /// Dirichlet convolution of two undamped polynomials.
    pub fn product(&self, other: &DirichletPoly) -> Result<DirichletPoly> {
        if self.damping.is_some() || other.damping.is_some() {
            return Err(Error::Input(
                "product of damped polynomials is not a Dirichlet polynomial".into(),
            ));
        }
        if let (Some((_, a)), Some((_, b))) = (self.support(), other.support()) {
            let top = a as f64 * b as f64;
            if top > MAX_PRODUCT_INDEX as f64 {
                return Err(Error::Resource {
                    what: "product polynomial index",
                    required: top,
                    budget: MAX_PRODUCT_INDEX as f64,
                });
            }
        }
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for &(n, c) in &self.terms {
            for &(m, d) in &other.terms {
                terms.push((n * m, c * d));
            }
        }
        DirichletPoly::new(terms, None)
    }
}

/// Integers n with w₀(n/Y) possibly non-zero, checked against the table.
fn prime_window(tables: &ArithTables, y: f64) -> Result<(usize, usize)> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(range_err("Y", y, "(0, inf)"));
    }
    let hi = (2.0 * y).floor() as usize;
    if hi > tables.limit() {
        return Err(range_err("2Y", 2.0 * y, format!("[0, {}]", tables.limit())));
    }
    let lo = ((0.5 * y).floor() as usize + 1).max(1);
    Ok((lo, hi))
}

/// S_Y(s) = Σ Λ(n) n^{-s} w₀(n/Y).
pub fn prime_sum_s(
    s: Complex64,
    y: f64,
    tables: &ArithTables,
    w: &BumpWeight,
) -> Result<Complex64> {
    let (lo, hi) = prime_window(tables, y)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in lo..=hi {
        let l = tables.lambda(n);
        if l == 0.0 {
            continue;
        }
        let wt = w.eval_w0(n as f64 / y);
        if wt != 0.0 {
            acc += l * wt * n_pow_neg(n as u64, s);
        }
    }
    Ok(acc)
}

/// Σ Λ(n) n^{-σ} w₀(n/Y).
pub fn prime_sum_bound(sigma: f64, y: f64, tables: &ArithTables, w: &BumpWeight) -> Result<f64> {
    let (lo, hi) = prime_window(tables, y)?;
    Ok((lo..=hi)
        .map(|n| tables.lambda(n) * w.eval_w0(n as f64 / y) * (n as f64).powf(-sigma))
        .sum())
}

/// W₀(d) with an error estimate; negligible far values are replaced by their envelope bound.
pub(crate) fn w0_term(w: &BumpWeight, d: Complex64) -> (Complex64, f64) {
    let env = DECAY_K_SHARP * 2f64.powf(d.re.abs()) * (-d.im.abs().sqrt()).exp();
    if d.re.abs() <= 1.0 && (env < 1e-30 || d.im.abs() > 1e4) {
        return (Complex64::new(0.0, 0.0), env);
    }
    let m = w.mellin_unchecked(d);
    (m.value, m.estimated_error)
}

/// Where the values S(U) come from.
#[derive(Clone, Copy)]
pub enum PrimeSide<'a> {
    /// Direct prime sums from sieve tables.
    Primes {
        tables: &'a ArithTables,
        weight: &'a BumpWeight,
    },
    /// U^{1-ρ₀}W₀(1-ρ₀) − Σ_ρ U^{ρ-ρ₀}W₀(ρ-ρ₀) over a complete model set and its conjugates:
    /// the prime sum a function with exactly these zeros would have.
    ZeroModel {
        zeros: &'a ZeroSet,
        weight: &'a BumpWeight,
    },
}

impl<'a> PrimeSide<'a> {
    pub fn label(&self) -> &'static str {
        match self {
            PrimeSide::Primes { .. } => "primes",
            PrimeSide::ZeroModel { .. } => "zero_model",
        }
    }

    /// S(U) at s = ρ₀ for every U in `us`, in order.
    pub fn values(&self, rho0: Zero, us: &[f64]) -> Result<Vec<Complex64>> {
        let s = rho0.rho();
        match *self {
            PrimeSide::Primes { tables, weight } => {
                let umax = us.iter().cloned().fold(0.0, f64::max);
                let (_, hi) = prime_window(tables, umax)?;
                let pre: Vec<Complex64> = (0..=hi)
                    .into_par_iter()
                    .map(|n| {
                        let l = if n == 0 { 0.0 } else { tables.lambda(n) };
                        if l == 0.0 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            l * n_pow_neg(n as u64, s)
                        }
                    })
                    .collect();
                us.par_iter()
                    .map(|&u| {
                        let (lo, hi) = prime_window(tables, u)?;
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (n, v) in pre.iter().enumerate().take(hi + 1).skip(lo) {
                            if v.re == 0.0 && v.im == 0.0 {
                                continue;
                            }
                            acc += *v * weight.eval_w0(n as f64 / u);
                        }
                        Ok(acc)
                    })
                    .collect()
            }
            PrimeSide::ZeroModel { zeros, weight } => {
                match zeros.complete_range() {
                    Some((lo, hi)) if lo <= 0.0 && hi == f64::INFINITY => {}
                    other => {
                        return Err(Error::Precondition(format!(
                        "zero model needs a set complete on (0, inf), asserted range is {other:?}"
                    )))
                    }
                }
                let one = Complex64::new(1.0, 0.0);
                let main_d = one - s;
                let (main_w, _) = w0_term(weight, main_d);
                let terms: Vec<(Complex64, Complex64)> = zeros
                    .zeros()
                    .par_iter()
                    .flat_map_iter(|z| {
                        let d = z.rho() - s;
                        let dc = z.rho().conj() - s;
                        [(d, w0_term(weight, d).0), (dc, w0_term(weight, dc).0)]
                    })
                    .filter(|t| t.1 != Complex64::new(0.0, 0.0))
                    .collect();
                Ok(us
                    .par_iter()
                    .map(|&u| {
                        let lu = u.ln();
                        let mut acc = (main_d * lu).exp() * main_w;
                        for (d, wv) in &terms {
                            acc -= (*d * lu).exp() * *wv;
                        }
                        acc
                    })
                    .collect())
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Sweep {
    pub rho0: Zero,
    pub y: f64,
    pub source: &'static str,
    pub grid_ratio: f64,
    pub best: DetectorOutcome,
    /// (U, |S(U)|)
    pub trace: Vec<(f64, f64)>,
}

/// max over U ∈ (Y, Y²] on the lattice of |S(U)| at ρ₀, with no half-isolation check.
pub fn prime_sum_sweep(
    source: &PrimeSide,
    rho0: Zero,
    y: f64,
    params: &ScaleParams,
) -> Result<Sweep> {
    if !(y > 1.0) {
        return Err(range_err("Y", y, "(1, inf)"));
    }
    let grid = lattice_grid(y, y * y, params.u_grid_ratio)?;
    let vals = source.values(rho0, &grid)?;
    let tau = params.zero_sum_tau();
    let outcomes: Vec<DetectorOutcome> = grid
        .iter()
        .zip(&vals)
        .map(|(&u, &v)| DetectorOutcome::new(u, v, tau))
        .collect();
    let best = best_of(&outcomes).expect("grid is non-empty");
    Ok(Sweep {
        rho0,
        y,
        source: source.label(),
        grid_ratio: params.u_grid_ratio,
        best,
        trace: outcomes
            .iter()
            .map(|o| (o.parameter, o.magnitude))
            .collect(),
    })
}

/// [`prime_sum_sweep`] after checking that ρ₀ is Y-half-isolated in `zs`.
pub fn detect_half_isolated_u(
    zs: &ZeroSet,
    rho0: Zero,
    y: f64,
    source: &PrimeSide,
    params: &ScaleParams,
) -> Result<Sweep> {
    let idx = zs.index_of(&rho0).ok_or_else(|| {
        Error::Input(format!(
            "ρ₀ = {} + {}i is not in the zero set",
            rho0.beta, rho0.gamma
        ))
    })?;
    let h = is_y_half_isolated(zs, idx, y, params)?;
    if !h.holds {
        return Err(Error::NotHalfIsolated {
            reason: format!(
                "ρ₀ = {} + {}i is not {y}-half-isolated",
                rho0.beta, rho0.gamma
            ),
            witnesses: h.witnesses.iter().map(|&j| zs.zeros()[j]).collect(),
        });
    }
    prime_sum_sweep(source, rho0, y, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sieve_tables;
    use crate::zerosets::gen_line_config;

    #[test]
    fn empty_support_is_zero() {
        let t = sieve_tables(100).unwrap();
        let w = BumpWeight::new();
        assert_eq!(
            prime_sum_s(Complex64::new(0.5, 3.0), 0.9, &t, &w).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn six_term_enumeration() {
        let t = sieve_tables(100).unwrap();
        let w = BumpWeight::new();
        let want: f64 = [2usize, 3, 4, 5, 7, 8]
            .iter()
            .map(|&n| t.lambda(n) * w.eval_w0(n as f64 / 4.0))
            .sum();
        let got = prime_sum_s(Complex64::new(0.0, 0.0), 4.0, &t, &w).unwrap();
        assert!((got.re - want).abs() < 1e-14 && got.im == 0.0);
    }

    #[test]
    fn triangle_bound() {
        let t = sieve_tables(10_000).unwrap();
        let w = BumpWeight::new();
        for (sigma, tt, y) in [(0.5, 14.13, 50.0), (0.75, 200.0, 999.0), (-1.0, 3.0, 20.0)] {
            let v = prime_sum_s(Complex64::new(sigma, tt), y, &t, &w).unwrap();
            assert!(v.norm() <= prime_sum_bound(sigma, y, &t, &w).unwrap() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn range_is_checked() {
        let t = sieve_tables(100).unwrap();
        let w = BumpWeight::new();
        assert!(prime_sum_s(Complex64::new(0.5, 0.0), 60.0, &t, &w).is_err());
    }

    #[test]
    fn direct_and_blocked_agree() {
        let t = sieve_tables(50_000).unwrap();
        let w = BumpWeight::new();
        let p = DirichletPoly::lambda_weighted(&t, &w, 20_000.0).unwrap();
        for s in [
            Complex64::new(0.5, 14.13),
            Complex64::new(0.75, 1234.5),
            Complex64::new(1.0, 1e13),
        ] {
            let a = p.eval(s);
            let b = p.eval_blocked(s);
            assert!((a - b).norm() <= 1e-10 * a.norm().max(1e-300));
            let direct = prime_sum_s(s, 20_000.0, &t, &w).unwrap();
            assert!((a - direct).norm() <= 1e-10 * a.norm());
        }
    }

    #[test]
    fn damping_and_product() {
        let p = DirichletPoly::new(vec![(2, 1.0), (3, -2.0)], None).unwrap();
        let q = DirichletPoly::new(vec![(1, 1.0), (2, 0.5)], None).unwrap();
        let pq = p.product(&q).unwrap();
        assert_eq!(pq.terms(), &[(2, 1.0), (3, -2.0), (4, 0.5), (6, -1.0)]);
        let s = Complex64::new(0.3, 7.0);
        assert!((pq.eval(s) - p.eval(s) * q.eval(s)).norm() < 1e-14);
        let d = DirichletPoly::new(vec![(4, 1.0)], Some(2.0)).unwrap();
        assert!((d.eval(Complex64::new(0.0, 0.0)).re - (-2.0f64).exp()).abs() < 1e-15);
        assert!(d.product(&p).is_err());
    }

    #[test]
    fn zero_model_singleton_is_log2() {
        let w = BumpWeight::new();
        let zs = gen_line_config(&[(0.75, vec![200.0])]).unwrap();
        let src = PrimeSide::ZeroModel {
            zeros: &zs,
            weight: &w,
        };
        let rho0 = zs.zeros()[0];
        let v = src.values(rho0, &[10.0, 50.0, 100.0]).unwrap();
        for x in v {
            assert!((x.norm() - std::f64::consts::LN_2).abs() < 1e-6);
        }
    }

    #[test]
    fn half_isolation_is_required() {
        let w = BumpWeight::new();
        let t = sieve_tables(1000).unwrap();
        let p = ScaleParams::new(1000.0).unwrap();
        let zs = gen_line_config(&[(0.75, vec![200.0, 200.5])]).unwrap();
        let src = PrimeSide::Primes {
            tables: &t,
            weight: &w,
        };
        match detect_half_isolated_u(&zs, zs.zeros()[1], 10.0, &src, &p) {
            Err(Error::NotHalfIsolated { witnesses, .. }) => {
                assert_eq!(witnesses, vec![zs.zeros()[0]])
            }
            other => panic!("{other:?}"),
        }
        let s = detect_half_isolated_u(&zs, zs.zeros()[0], 10.0, &src, &p).unwrap();
        assert!(s.trace[0].0 <= 10.0 * 1.01 && s.trace.last().unwrap().0 * 1.01 > 100.0);
    }
}
