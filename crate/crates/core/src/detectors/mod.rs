//! Dirichlet-polynomial detectors and the identities they are checked against.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

mod classify;
mod flexible;
mod poly;
mod residual;
mod typeone;
mod zerosum;

pub use classify::{
    classify_clusters, classify_with_types, zero_types, ClusterLabel, ClusterType, TypeDSubset,
    ZeroTypes,
};
pub use flexible::{build_flexible_detector, FlexibleDetector};
pub use poly::{
    detect_half_isolated_u, prime_sum_bound, prime_sum_s, prime_sum_sweep, DirichletPoly,
    PrimeSide, Sweep, MAX_PRODUCT_INDEX,
};
pub use residual::{
    explicit_formula_residual, Residual, ResidualContext, TailParts, TRIVIAL_ZEROS_EXACT,
};
pub use typeone::{
    dichotomy_batch, dichotomy_check, dichotomy_height, dirichlet_d_n, dyadic_ns, i_series,
    type1_check, type2_value, Dichotomy, ISeries, MollifiedCoefficients, TypeOneOutcome, TypeTwo,
    DICHOTOMY_BASE_T, TYPE_TWO_THRESHOLD,
};
pub use zerosum::{zero_side_sum, zero_sum_search, zero_sum_terms, ZeroSumMode, ZeroSumSearch};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetectorOutcome {
    /// U, N or Z
    pub parameter: f64,
    pub value: Complex64,
    pub magnitude: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl DetectorOutcome {
    pub fn new(parameter: f64, value: Complex64, threshold: f64) -> Self {
        let magnitude = value.norm();
        DetectorOutcome {
            parameter,
            value,
            magnitude,
            threshold,
            passed: magnitude >= threshold,
        }
    }
}

/// Largest magnitude; the earliest entry wins ties.
pub(crate) fn best_of(items: &[DetectorOutcome]) -> Option<DetectorOutcome> {
    let mut best: Option<DetectorOutcome> = None;
    for it in items {
        if best.map_or(true, |b| it.magnitude > b.magnitude) {
            best = Some(*it);
        }
    }
    best
}

/// Points r^j of the global lattice with lo < r^j ≤ hi.
pub fn lattice_grid(lo: f64, hi: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(ratio > 1.0 && ratio.is_finite()) {
        return Err(Error::Config(format!(
            "grid ratio must exceed 1, got {ratio}"
        )));
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::Config(format!("grid range ({lo}, {hi}] is empty")));
    }
    let lr = ratio.ln();
    let j0 = (lo.ln() / lr).floor() as i64;
    let j1 = (hi.ln() / lr).ceil() as i64;
    let out: Vec<f64> = (j0..=j1)
        .map(|j| (j as f64 * lr).exp())
        .filter(|&v| v > lo && v <= hi)
        .collect();
    if out.is_empty() {
        return Err(Error::Config(format!(
            "grid range ({lo}, {hi}] contains no lattice point of ratio {ratio}"
        )));
    }
    Ok(out)
}

pub fn write_trace_csv<W: std::io::Write>(
    out: &mut W,
    header: &str,
    rows: &[(f64, f64)],
) -> Result<()> {
    writeln!(out, "{header},magnitude")?;
    for (p, m) in rows {
        writeln!(out, "{p},{m:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_covers_range() {
        let g = lattice_grid(10.0, 100.0, 1.01).unwrap();
        assert!(g[0] > 10.0 && g[0] <= 10.0 * 1.01);
        let last = *g.last().unwrap();
        assert!(last <= 100.0 && last * 1.01 > 100.0);
        for w in g.windows(2) {
            assert!((w[1] / w[0] - 1.01).abs() < 1e-12);
        }
        assert!(lattice_grid(10.0, 5.0, 1.01).is_err());
        assert!(lattice_grid(10.0, 10.0, 1.01).is_err());
    }

    #[test]
    fn outcome_flag() {
        let o = DetectorOutcome::new(1.0, Complex64::new(3.0, 4.0), 5.0);
        assert!(o.passed);
        assert_eq!(o.magnitude, 5.0);
    }
}
