//! The zero-side sum Σ W(ρ−ρ₀) Z^{ρ−ρ₀} over zeros just above ρ₀, and its search over Z.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{best_of, lattice_grid, DetectorOutcome};
use crate::error::{range_err, Error, Result};
use crate::params::ScaleParams;
use crate::weights::MellinProvider;
use crate::zerosets::{Zero, ZeroSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroSumMode {
    /// γ₀ ≤ γ ≤ γ₀ + (log T)²
    OneSided,
    /// |γ − γ₀| ≤ (log T)², report-only: shows what zeros below do to the sum
    TwoSided,
}

/// (ρ − ρ₀, W(ρ − ρ₀)) over the window; ρ₀ must belong to `zs`.
pub fn zero_sum_terms(
    zs: &ZeroSet,
    rho0: Zero,
    y: f64,
    w: &dyn MellinProvider,
    params: &ScaleParams,
    mode: ZeroSumMode,
) -> Result<Vec<(Complex64, Complex64)>> {
    if !(y > 1.0) {
        return Err(range_err("Y", y, "(1, inf)"));
    }
    if zs.index_of(&rho0).is_none() {
        return Err(Error::Input(format!(
            "ρ₀ = {} + {}i is not in the zero set",
            rho0.beta, rho0.gamma
        )));
    }
    let h = params.log_t().powi(2);
    let lo = match mode {
        ZeroSumMode::OneSided => rho0.gamma,
        ZeroSumMode::TwoSided => rho0.gamma - h,
    };
    let hi = rho0.gamma + h;
    zs.require_complete(lo, hi, "zero-side sum")?;
    let gap = params.real_gap(y);
    let idx: Vec<usize> = zs
        .gamma_window(lo, hi)
        .filter(|&j| (zs.zeros()[j].beta - rho0.beta).abs() <= gap)
        .collect();
    Ok(idx
        .par_iter()
        .map(|&j| {
            let d = zs.zeros()[j].rho() - rho0.rho();
            (d, w.mellin_value(d))
        })
        .collect())
}

fn sum_at(terms: &[(Complex64, Complex64)], z: f64) -> Complex64 {
    let lz = z.ln();
    terms.iter().map(|(d, wv)| *wv * (*d * lz).exp()).sum()
}

pub fn zero_side_sum(
    zs: &ZeroSet,
    rho0: Zero,
    z: f64,
    y: f64,
    w: &dyn MellinProvider,
    params: &ScaleParams,
    mode: ZeroSumMode,
) -> Result<Complex64> {
    if !(z > 0.0) {
        return Err(range_err("Z", z, "(0, inf)"));
    }
    Ok(sum_at(&zero_sum_terms(zs, rho0, y, w, params, mode)?, z))
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroSumSearch {
    pub rho0: Zero,
    pub y: f64,
    pub mode: ZeroSumMode,
    pub terms: usize,
    pub best: DetectorOutcome,
    /// sup |d/dt f(t)| over t = log Z ∈ [log Y, 2 log Y]
    pub lipschitz: f64,
    /// (Z, |f|)
    pub trace: Vec<(f64, f64)>,
    pub z_max: f64,
}

/// Max of |zero_side_sum| over the lattice in (Y, min(Y², z_cap)].
pub fn zero_sum_search(
    zs: &ZeroSet,
    rho0: Zero,
    y: f64,
    w: &dyn MellinProvider,
    params: &ScaleParams,
    mode: ZeroSumMode,
    z_cap: Option<f64>,
) -> Result<ZeroSumSearch> {
    let range = params.y_range_for(rho0.gamma);
    if y < range.y_min || y > range.y_max {
        return Err(range_err(
            "Y",
            y,
            format!("[{}, {}]", range.y_min, range.y_max),
        ));
    }
    let terms = zero_sum_terms(zs, rho0, y, w, params, mode)?;
    let z_max = z_cap.map_or(y * y, |c| c.min(y * y));
    let grid = lattice_grid(y, z_max, params.u_grid_ratio)?;
    let tau = params.zero_sum_tau();
    let outcomes: Vec<DetectorOutcome> = grid
        .par_iter()
        .map(|&z| DetectorOutcome::new(z, sum_at(&terms, z), tau))
        .collect();
    let best = best_of(&outcomes).expect("grid is non-empty");
    let lipschitz = terms
        .iter()
        .map(|(d, wv)| (*wv * *d).norm() * y.powf(d.re).max(y.powf(2.0 * d.re)))
        .sum();
    Ok(ZeroSumSearch {
        rho0,
        y,
        mode,
        terms: terms.len(),
        best,
        lipschitz,
        trace: outcomes
            .iter()
            .map(|o| (o.parameter, o.magnitude))
            .collect(),
        z_max,
    })
}
