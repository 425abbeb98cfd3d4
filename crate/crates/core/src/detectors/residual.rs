//! Explicit-formula residual for S_U(ρ₀) with an analytic bound on everything left out.
//!
//! S_U(ρ₀) = U^{1-ρ₀}W₀(1-ρ₀) − Σ_ρ U^{ρ-ρ₀}W₀(ρ-ρ₀) − Σ_{k≥1} U^{-2k-ρ₀}W₀(-2k-ρ₀), the sum over
//! all non-trivial zeros including conjugates. The residual keeps zeros with |Im(ρ-ρ₀)| ≤ window
//! and the first few trivial zeros; the bound covers the rest.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::poly::{prime_sum_bound, prime_sum_s, w0_term};
use crate::arith::ArithTables;
use crate::error::{range_err, Result};
use crate::numeric::quad::adaptive_real;
use crate::params::ScaleParams;
use crate::weights::{BumpWeight, DECAY_K_SHARP};
use crate::zerosets::{Zero, ZeroSet};

/// Trivial zeros −2, …, −2K subtracted exactly.
pub const TRIVIAL_ZEROS_EXACT: usize = 4;

/// |N(T) − (T/2π) log(T/2πe) − 7/8| ≤ a log T + b log log T + c for T ≥ e.
const NT_ERR: (f64, f64, f64) = (0.112, 0.278, 2.510);

fn n_upper(t: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    t / tau * (t / (tau * std::f64::consts::E)).ln()
        + 0.875
        + NT_ERR.0 * t.ln()
        + NT_ERR.1 * t.ln().ln()
        + NT_ERR.2
}

fn n_upper_deriv(t: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    (t / tau).ln() / tau + NT_ERR.0 / t + NT_ERR.1 / (t * t.ln())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailParts {
    /// listed zeros (and conjugates) outside the window, by exact magnitude
    pub in_table: f64,
    /// zeros above the completeness limit, by the W₀ envelope and an N(T) upper bound
    pub beyond_table: f64,
    /// trivial zeros past −2K
    pub trivial_remainder: f64,
    /// quadrature and rounding
    pub slack: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub rho0: Zero,
    pub u: f64,
    pub window: f64,
    pub prime_sum: Complex64,
    pub main_term: Complex64,
    pub window_zero_sum: Complex64,
    pub trivial_sum: Complex64,
    pub residual: f64,
    pub tail: TailParts,
    pub tail_bound: f64,
    pub zeros_in_window: usize,
    pub within_bound: bool,
    /// Zeros above the completeness limit are taken on Re s = 1/2.
    pub assumes_rh_beyond_table: bool,
}

struct Term {
    d: Complex64,
    w: Complex64,
    err: f64,
}

/// Per-ρ₀ data reused across U.
pub struct ResidualContext<'a> {
    rho0: Zero,
    window: f64,
    weight: &'a BumpWeight,
    main: Term,
    inside: Vec<Term>,
    outside: Vec<Term>,
    trivial: Vec<Term>,
    /// U-independent part of the beyond-table bound, times U^{1/2-β₀} later
    beyond_base: f64,
    beyond_quad_err: f64,
    assumes_rh: bool,
}

impl<'a> ResidualContext<'a> {
    pub fn new(
        zs: &ZeroSet,
        rho0: Zero,
        weight: &'a BumpWeight,
        params: &ScaleParams,
    ) -> Result<Self> {
        let window = params.window;
        if !(window > 0.0) {
            return Err(range_err("window", window, "(0, inf)"));
        }
        let g0 = rho0.gamma;
        zs.require_complete(g0 - window, g0 + window, "explicit-formula residual")?;
        let (_, g_top) = zs.complete_range().expect("checked above");
        let s0 = rho0.rho();
        let eval = |d: Complex64| {
            let (w, err) = w0_term(weight, d);
            Term { d, w, err }
        };
        let listed: Vec<&Zero> = zs.zeros().iter().filter(|z| z.gamma <= g_top).collect();
        let all: Vec<Term> = listed
            .par_iter()
            .flat_map_iter(|z| [z.rho() - s0, z.rho().conj() - s0])
            .map(eval)
            .collect();
        let (inside, outside): (Vec<Term>, Vec<Term>) =
            all.into_iter().partition(|t| t.d.im.abs() <= window);
        let trivial = (1..=TRIVIAL_ZEROS_EXACT)
            .map(|k| eval(Complex64::new(-2.0 * k as f64, 0.0) - s0))
            .collect();
        let main = eval(Complex64::new(1.0, 0.0) - s0);
        let (beyond_base, beyond_quad_err, assumes_rh) = if g_top.is_finite() {
            let count = listed.len() as f64;
            let (b, e) = beyond_table_base(rho0, g_top, count);
            (b, e, true)
        } else {
            (0.0, 0.0, false)
        };
        Ok(ResidualContext {
            rho0,
            window,
            weight,
            main,
            inside,
            outside,
            trivial,
            beyond_base,
            beyond_quad_err,
            assumes_rh,
        })
    }

    pub fn zeros_in_window(&self) -> usize {
        self.inside.len()
    }

    pub fn at(&self, u: f64, tables: &ArithTables) -> Result<Residual> {
        if !(u > 2.0) {
            return Err(range_err("U", u, "(2, inf)"));
        }
        let s0 = self.rho0.rho();
        let lu = u.ln();
        let pw = |d: Complex64| (d * lu).exp();
        let prime_sum = prime_sum_s(s0, u, tables, self.weight)?;
        let main_term = pw(self.main.d) * self.main.w;
        let window_zero_sum: Complex64 = self.inside.iter().map(|t| pw(t.d) * t.w).sum();
        let trivial_sum: Complex64 = self.trivial.iter().map(|t| pw(t.d) * t.w).sum();
        let residual = (prime_sum - main_term + window_zero_sum + trivial_sum).norm();

        let in_table: f64 = self
            .outside
            .iter()
            .map(|t| u.powf(t.d.re) * (t.w.norm() + t.err))
            .sum();
        let beyond_table = u.powf(0.5 - self.rho0.beta) * (self.beyond_base + self.beyond_quad_err);
        let q = 2.0 / u;
        let k1 = (TRIVIAL_ZEROS_EXACT + 1) as f64;
        let trivial_remainder =
            std::f64::consts::LN_2 * q.powf(2.0 * k1 + self.rho0.beta) / (1.0 - q * q);
        let rounding =
            1e-14 * (prime_sum_bound(self.rho0.beta, u, tables, self.weight)? + main_term.norm());
        let slack = self.main.err * u.powf(self.main.d.re)
            + self
                .inside
                .iter()
                .map(|t| t.err * u.powf(t.d.re))
                .sum::<f64>()
            + self
                .trivial
                .iter()
                .map(|t| t.err * u.powf(t.d.re))
                .sum::<f64>()
            + rounding
            + 1e-14;
        let tail = TailParts {
            in_table,
            beyond_table,
            trivial_remainder,
            slack,
        };
        let tail_bound = in_table + beyond_table + trivial_remainder + slack;
        Ok(Residual {
            rho0: self.rho0,
            u,
            window: self.window,
            prime_sum,
            main_term,
            window_zero_sum,
            trivial_sum,
            residual,
            tail,
            tail_bound,
            zeros_in_window: self.inside.len(),
            within_bound: residual <= tail_bound,
            assumes_rh_beyond_table: self.assumes_rh,
        })
    }
}

/// Σ_{γ > G} K 2^{|1/2-β₀|} (e^{-√(γ-γ₀)} + e^{-√(γ+γ₀)}) by summation by parts against N(T).
fn beyond_table_base(rho0: Zero, g: f64, count_below: f64) -> (f64, f64) {
    let g0 = rho0.gamma;
    let amp = DECAY_K_SHARP * 2f64.powf((0.5 - rho0.beta).abs());
    let f = |t: f64| amp * ((-(t - g0).max(0.0).sqrt()).exp() + (-(t + g0).sqrt()).exp());
    let g = g.max(std::f64::consts::E * 1.01).max(g0 + 1.0);
    let edge = f(g) * (n_upper(g) - count_below);
    let v0 = (g - g0).sqrt();
    let integrand = |v: f64| {
        let t = g0 + v * v;
        f(t) * n_upper_deriv(t) * 2.0 * v
    };
    let (val, err, _) = adaptive_real(&integrand, v0, v0 + 200.0, 64, 1e-18, 20_000);
    (edge + val, err)
}

pub fn explicit_formula_residual(
    zs: &ZeroSet,
    rho0: Zero,
    u: f64,
    tables: &ArithTables,
    w: &BumpWeight,
    params: &ScaleParams,
) -> Result<Residual> {
    ResidualContext::new(zs, rho0, w, params)?.at(u, tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sieve_tables;
    use crate::error::Error;
    use crate::fixtures::zeta_fixture;

    #[test]
    fn first_zero_within_bound() {
        let zs = zeta_fixture();
        let w = BumpWeight::new();
        let t = sieve_tables(1000).unwrap();
        let p = ScaleParams::new(1000.0).unwrap();
        let ctx = ResidualContext::new(&zs, zs.zeros()[0], &w, &p).unwrap();
        let r = ctx.at(50.0, &t).unwrap();
        assert!(r.within_bound, "{r:?}");
        assert!(r.tail_bound < 5e-3);
        let r2 = ctx.at(50.0 * (1.0 + 1e-6), &t).unwrap();
        assert!((r.residual - r2.residual).abs() <= 1e-3);
    }

    #[test]
    fn perturbed_ordinate_is_caught() {
        let zs = zeta_fixture().with_gamma_shifted(0, 1e-3).unwrap();
        let w = BumpWeight::new();
        let t = sieve_tables(1000).unwrap();
        let p = ScaleParams::new(1000.0).unwrap();
        let r = explicit_formula_residual(&zs, zs.zeros()[0], 50.0, &t, &w, &p).unwrap();
        assert!(!r.within_bound, "{r:?}");
    }

    #[test]
    fn needs_completeness() {
        let zs = zeta_fixture();
        let w = BumpWeight::new();
        let mut p = ScaleParams::new(1000.0).unwrap();
        p.window = 500.0;
        assert!(matches!(
            ResidualContext::new(&zs, zs.zeros()[0], &w, &p),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn counting_bound_dominates_table() {
        // N(236.6) = 100
        assert!(n_upper(236.6) >= 100.0);
        assert!(n_upper(14.2) >= 1.0);
    }
}
