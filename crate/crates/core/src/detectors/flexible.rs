//! Product detectors B(s) = Π S_{U_i}(s) of prescribed total length.

use num_complex::Complex64;
use serde::Serialize;

use super::poly::{detect_half_isolated_u, prime_sum_s, DirichletPoly, PrimeSide};
use super::DetectorOutcome;
use crate::arith::ArithTables;
use crate::error::{range_err, Error, Result};
use crate::params::ScaleParams;
use crate::weights::BumpWeight;
use crate::zerosets::{Zero, ZeroSet};

#[derive(Clone, Debug, Serialize)]
pub struct FlexibleDetector {
    pub rho0: Zero,
    pub a: f64,
    /// A_1, …, A_{r+1}
    pub scales: Vec<f64>,
    /// U_1, …, U_r
    pub factors: Vec<f64>,
    pub levels: Vec<DetectorOutcome>,
    /// number of factors plus one
    pub k: usize,
    #[serde(skip)]
    pub poly: DirichletPoly,
    pub coefficient_count: usize,
    pub support: (u64, u64),
    /// [A e^{-lower}, A e^{upper}]
    pub support_bounds: (f64, f64),
    /// max over m of |b(m)| / ((2 log m)^{k-1} (log 2T)^{k-1})
    pub coefficient_ratio: f64,
    pub value_at_rho0: Complex64,
}

impl FlexibleDetector {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.poly.eval(s)
    }

    /// Π S_{U_i}(s), each factor summed directly.
    pub fn factor_product(
        &self,
        s: Complex64,
        tables: &ArithTables,
        w: &BumpWeight,
    ) -> Result<Complex64> {
        self.factors
            .iter()
            .try_fold(Complex64::new(1.0, 0.0), |acc, &u| {
                Ok(acc * prime_sum_s(s, u, tables, w)?)
            })
    }

    /// A_{i+1} = A_i / U_i with U_i ∈ (A_i^{1/2}, A_i], recomputed from the factors alone.
    pub fn replay(&self) -> bool {
        let mut a = self.a;
        if self.scales.first() != Some(&a) || self.scales.len() != self.factors.len() + 1 {
            return false;
        }
        for (i, &u) in self.factors.iter().enumerate() {
            if !(u > a.sqrt() && u <= a) {
                return false;
            }
            a /= u;
            if self.scales[i + 1] != a {
                return false;
            }
        }
        true
    }

    pub fn support_ok(&self) -> bool {
        let (lo, hi) = self.support;
        lo as f64 >= self.support_bounds.0 && hi as f64 <= self.support_bounds.1
    }
}

fn coefficient_ratio(poly: &DirichletPoly, k: usize, t: f64) -> f64 {
    let e = (k - 1) as i32;
    let l2t = (2.0 * t).ln();
    poly.terms()
        .iter()
        .map(|&(m, c)| {
            let bound = (2.0 * (m as f64).ln()).powi(e) * l2t.powi(e);
            if bound == 0.0 {
                if c == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                c.abs() / bound
            }
        })
        .fold(0.0, f64::max)
}

/// Recursively picks U_i = argmax of the half-isolated sweep at Y = A_i^{1/2} until A_i ≤ stop_scale.
pub fn build_flexible_detector(
    zs: &ZeroSet,
    rho0: Zero,
    a: f64,
    params: &ScaleParams,
    tables: &ArithTables,
    w: &BumpWeight,
) -> Result<FlexibleDetector> {
    if !(a > 1.0 && a.is_finite()) {
        return Err(range_err("A", a, "(1, inf)"));
    }
    if 2.0 * a > tables.limit() as f64 {
        return Err(range_err("2A", 2.0 * a, format!("[0, {}]", tables.limit())));
    }
    let stop = params.stop_scale();
    let source = PrimeSide::Primes { tables, weight: w };
    let mut scales = vec![a];
    let mut factors = Vec::new();
    let mut levels = Vec::new();
    let mut poly = DirichletPoly::one();
    let mut ai = a;
    while ai > stop {
        let level = factors.len() + 1;
        let sweep = detect_half_isolated_u(zs, rho0, ai.sqrt(), &source, params)?;
        if !sweep.best.passed {
            return Err(Error::Construction {
                level,
                msg: format!(
                    "max |S_U(ρ₀)| = {:e} over U ∈ ({}, {}] is below τ = {:e}",
                    sweep.best.magnitude,
                    ai.sqrt(),
                    ai,
                    sweep.best.threshold
                ),
            });
        }
        let u = sweep.best.parameter;
        poly = poly.product(&DirichletPoly::lambda_weighted(tables, w, u)?)?;
        factors.push(u);
        levels.push(sweep.best);
        ai /= u;
        scales.push(ai);
    }
    let k = factors.len() + 1;
    let support = poly.support().unwrap_or((1, 1));
    let support_bounds = (
        a * (-params.flex_lower_exponent()).exp(),
        a * params.flex_upper_exponent().exp(),
    );
    let det = FlexibleDetector {
        rho0,
        a,
        value_at_rho0: poly.eval(rho0.rho()),
        coefficient_ratio: coefficient_ratio(&poly, k, params.t),
        coefficient_count: poly.len(),
        scales,
        factors,
        levels,
        k,
        poly,
        support,
        support_bounds,
    };
    if !det.replay() {
        return Err(Error::Invariant(
            "flexible detector factor recursion does not replay".into(),
        ));
    }
    if !det.support_ok() {
        return Err(Error::Invariant(format!(
            "flexible detector support {:?} leaves [{:e}, {:e}]",
            det.support, det.support_bounds.0, det.support_bounds.1
        )));
    }
    if det.coefficient_ratio > 1.0 {
        return Err(Error::Invariant(format!(
            "flexible detector coefficient exceeds its bound by a factor {}",
            det.coefficient_ratio
        )));
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sieve_tables;
    use crate::zerosets::gen_line_config;

    fn setup() -> (ZeroSet, ArithTables, BumpWeight) {
        let zs = gen_line_config(&[(0.75, vec![200.0])]).unwrap();
        (zs, sieve_tables(2_000_000).unwrap(), BumpWeight::new())
    }

    #[test]
    fn below_stop_is_empty_product() {
        let (zs, t, w) = setup();
        let mut p = ScaleParams::new(1e4).unwrap();
        p.stop_scale = Some(100.0);
        let d = build_flexible_detector(&zs, zs.zeros()[0], 50.0, &p, &t, &w).unwrap();
        assert_eq!(d.k, 1);
        assert!(d.factors.is_empty());
        for s in [Complex64::new(0.5, 3.0), Complex64::new(2.0, -40.0)] {
            assert_eq!(d.eval(s), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn single_factor() {
        let (zs, t, w) = setup();
        let mut p = ScaleParams::new(1e4).unwrap();
        p.stop_scale = Some(100.0);
        let d = build_flexible_detector(&zs, zs.zeros()[0], 5000.0, &p, &t, &w).unwrap();
        assert_eq!(d.k, 2);
        let u = d.factors[0];
        assert!(d.support.0 as f64 >= u / 2.0 && d.support.1 as f64 <= 2.0 * u);
        assert!(d.replay());
    }

    #[test]
    fn two_factor_double_sum() {
        let (zs, t, w) = setup();
        let mut p = ScaleParams::new(1e4).unwrap();
        p.stop_scale = Some(20.0);
        p.flex_upper_exponent = Some(3.0);
        let d = build_flexible_detector(&zs, zs.zeros()[0], 1e5, &p, &t, &w).unwrap();
        assert_eq!(d.factors.len(), 2, "{:?}", d.factors);
        let (u1, u2) = (d.factors[0], d.factors[1]);
        for k in 0..10 {
            let s = Complex64::new(0.3 + 0.05 * k as f64, 13.0 * k as f64 - 40.0);
            let mut direct = Complex64::new(0.0, 0.0);
            for n1 in 1..=(2.0 * u1) as usize {
                let c1 = t.lambda(n1) * w.eval_w0(n1 as f64 / u1);
                if c1 == 0.0 {
                    continue;
                }
                for n2 in 1..=(2.0 * u2) as usize {
                    let c2 = t.lambda(n2) * w.eval_w0(n2 as f64 / u2);
                    if c2 != 0.0 {
                        direct += c1 * c2 * Complex64::new((n1 * n2) as f64, 0.0).powc(-s);
                    }
                }
            }
            let got = d.eval(s);
            assert!((got - direct).norm() <= 1e-10 * direct.norm().max(1.0));
            let fp = d.factor_product(s, &t, &w).unwrap();
            assert!((got - fp).norm() <= 1e-10 * fp.norm().max(1.0));
        }
    }

    #[test]
    fn failing_level_is_reported() {
        let (zs, t, w) = setup();
        let mut p = ScaleParams::new(1e4).unwrap();
        p.stop_scale = Some(100.0);
        p.zero_sum_tau = Some(1e9);
        let e = build_flexible_detector(&zs, zs.zeros()[0], 5000.0, &p, &t, &w).unwrap_err();
        assert!(matches!(e, Error::Construction { level: 1, .. }));
    }
}
