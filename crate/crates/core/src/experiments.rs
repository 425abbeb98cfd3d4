//! Scenario drivers: bow and AP obstructions, the Type I/II dichotomy, and cluster censuses.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{sieve_tables, ArithTables};
use crate::detectors::{
    classify_with_types, dichotomy_batch, dichotomy_height, dyadic_ns, prime_sum_sweep,
    zero_sum_search, Dichotomy, PrimeSide, ResidualContext, Sweep, ZeroSumMode, ZeroSumSearch,
};
use crate::detectors::{zero_types, ZeroTypes};
use crate::error::{Error, Result};
use crate::params::ScaleParams;
use crate::report::{sha256_hex, ExperimentReport};
use crate::weights::BumpWeight;
use crate::zerosets::{
    bow_length, cluster_decompose, gen_bow, gen_line_config, gen_vertical_ap_zeros,
    is_half_isolated, HalfIsolationVerdict, Zero, ZeroSet,
};

fn zeros_hash(zs: &ZeroSet) -> String {
    let mut bytes = Vec::with_capacity(16 * zs.len());
    for z in zs.zeros() {
        bytes.extend_from_slice(&z.beta.to_le_bytes());
        bytes.extend_from_slice(&z.gamma.to_le_bytes());
    }
    sha256_hex(&bytes)
}

fn verdict(zs: &ZeroSet, idx: usize, params: &ScaleParams) -> Value {
    match is_half_isolated(zs, idx, params) {
        Ok(v) => serde_json::to_value::<HalfIsolationVerdict>(v).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string(), "kind": e.kind() }),
    }
}

#[derive(Serialize)]
struct SweepRecord<'a> {
    role: &'a str,
    rho0: Zero,
    max_magnitude: f64,
    argmax: f64,
    sweep: &'a Sweep,
    half_isolation: Value,
}

/// Largest Y with Y² < e^{2π/δ}/2, so no sweep point reaches the first Poisson alias.
pub fn bow_sweep_y(t0: f64, c: f64) -> Result<f64> {
    let delta = c / t0.ln();
    let y = (0.5 * (2.0 * PI / delta).exp()).sqrt() / 1.01;
    if !(y > 2.0) {
        return Err(Error::Config(format!(
            "c = {c} at T0 = {t0} leaves no sweep range below the first alias (Y = {y})"
        )));
    }
    Ok(y)
}

/// S(U) from a zero model at the bottom, middle and an isolated control of a bow.
pub fn bow_experiment(t0: f64, eps: f64, c: f64, params: &ScaleParams) -> Result<ExperimentReport> {
    let l = bow_length(t0, eps)?;
    let bow = gen_bow(t0, eps, c)?;
    let w = BumpWeight::new();
    let y = bow_sweep_y(t0, c)?;
    let bottom = 0;
    let middle = l / 2 - 1; // j = L/2
    let mid = bow.zeros()[middle];
    let control_set = gen_line_config(&[(mid.beta, vec![mid.gamma])])?;
    let control = control_set.zeros()[0];

    let bow_src = PrimeSide::ZeroModel {
        zeros: &bow,
        weight: &w,
    };
    let ctl_src = PrimeSide::ZeroModel {
        zeros: &control_set,
        weight: &w,
    };
    let s_bottom = prime_sum_sweep(&bow_src, bow.zeros()[bottom], y, params)?;
    let s_middle = prime_sum_sweep(&bow_src, mid, y, params)?;
    let s_control = prime_sum_sweep(&ctl_src, control, y, params)?;

    // |S(U) + log 2| ≤ |U^{1-ρ₀}W₀(1-ρ₀)| + |U^{-2iγ₀}W₀(-2iγ₀)| for the singleton
    let s0 = control.rho();
    let main = w.mellin_unchecked(Complex64::new(1.0, 0.0) - s0);
    let conj = w.mellin_unchecked(s0.conj() - s0);
    let control_tail = s_control
        .trace
        .iter()
        .map(|&(u, _)| {
            u.powf(1.0 - control.beta) * (main.value.norm() + main.estimated_error)
                + conj.value.norm()
                + conj.estimated_error
                + w.mellin_unchecked(Complex64::new(0.0, 0.0)).estimated_error
        })
        .fold(0.0, f64::max);
    let control_dev = s_control
        .trace
        .iter()
        .map(|&(_, m)| (m - LN_2).abs())
        .fold(0.0, f64::max);

    // the bottom with the rest of its rising ramp removed
    let ramp_end = l / 4;
    let trimmed_zeros: Vec<Zero> = bow
        .zeros()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i == bottom || *i >= ramp_end)
        .map(|(_, z)| *z)
        .collect();
    let trimmed = gen_line_config_from(&trimmed_zeros)?;

    let mut rep = ExperimentReport::new(
        "bow",
        json!({ "t0": t0, "eps": eps, "c": c, "length": l, "y": y, "source": "zero_model" }),
        params,
    )
    .with_provenance("bow_zeros_sha256", json!(zeros_hash(&bow)));
    for (role, zs, idx, sw) in [
        ("bottom", &bow, bottom, &s_bottom),
        ("middle", &bow, middle, &s_middle),
        ("control", &control_set, 0, &s_control),
    ] {
        rep.push(&SweepRecord {
            role,
            rho0: zs.zeros()[idx],
            max_magnitude: sw.best.magnitude,
            argmax: sw.best.parameter,
            sweep: sw,
            half_isolation: verdict(zs, idx, params),
        })?;
    }
    let (b, m, ct) = (
        s_bottom.best.magnitude,
        s_middle.best.magnitude,
        s_control.best.magnitude,
    );
    rep.summary = json!({
        "bottom_max": b,
        "middle_max": m,
        "control_max": ct,
        "middle_over_control": m / ct,
        "middle_over_bottom": m / b,
        "middle_below_bottom": m < b,
        "middle_below_control": m < ct,
        "control_deviation_from_log2": control_dev,
        "control_tail_bound": control_tail,
        "control_within_tail": control_dev <= control_tail,
        "bottom_half_isolated_full_bow": verdict(&bow, bottom, params)["holds"],
        "bottom_half_isolated_without_left_ramp": verdict(&trimmed, 0, params)["holds"],
    });
    Ok(rep)
}

fn gen_line_config_from(zeros: &[Zero]) -> Result<ZeroSet> {
    let mut by_line: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for z in zeros {
        by_line
            .entry(z.beta.to_bits())
            .or_insert((z.beta, Vec::new()))
            .1
            .push(z.gamma);
    }
    gen_line_config(&by_line.into_values().collect::<Vec<_>>())
}

#[derive(Serialize)]
struct ApRecord<'a> {
    role: &'a str,
    spacing: f64,
    search: &'a ZeroSumSearch,
}

/// Zero-side sums over a vertical AP with difference 2πc/log T starting at γ = T.
pub fn ap_obstruction_experiment(
    c: f64,
    count: usize,
    params: &ScaleParams,
) -> Result<ExperimentReport> {
    if !(c > 0.0) {
        return Err(Error::Config(format!("c must be positive, got {c}")));
    }
    let t = params.t;
    let spacing = 2.0 * PI * c / params.log_t();
    let beta = 0.75;
    let ap = gen_vertical_ap_zeros(beta, t, spacing, count)?;
    let w = BumpWeight::new();
    let z_cap = 0.5 * t.powf(1.0 / c);
    let bottom = ap.zeros()[0];
    let middle = ap.zeros()[count / 2];
    let y = params.y_range_for(middle.gamma).y_min;
    if z_cap <= y {
        return Err(Error::Config(format!(
            "T^(1/c)/2 = {z_cap} does not exceed Y = {y}; lower c or raise T"
        )));
    }
    let mid = zero_sum_search(
        &ap,
        middle,
        y,
        &w,
        params,
        ZeroSumMode::TwoSided,
        Some(z_cap),
    )?;
    let bot = zero_sum_search(
        &ap,
        bottom,
        y,
        &w,
        params,
        ZeroSumMode::OneSided,
        Some(z_cap),
    )?;
    let wide_spacing = 4.0 * params.log_t().powi(2);
    let wide = gen_vertical_ap_zeros(beta, t, wide_spacing, 3)?;
    let wide_mid = zero_sum_search(
        &wide,
        wide.zeros()[1],
        y,
        &w,
        params,
        ZeroSumMode::TwoSided,
        Some(z_cap),
    )?;

    let mut rep = ExperimentReport::new(
        "ap",
        json!({ "c": c, "count": count, "beta": beta, "spacing": spacing, "y": y, "z_cap": z_cap }),
        params,
    )
    .with_provenance("ap_zeros_sha256", json!(zeros_hash(&ap)));
    rep.push(&ApRecord {
        role: "middle",
        spacing,
        search: &mid,
    })?;
    rep.push(&ApRecord {
        role: "bottom",
        spacing,
        search: &bot,
    })?;
    rep.push(&ApRecord {
        role: "wide_spacing_middle",
        spacing: wide_spacing,
        search: &wide_mid,
    })?;
    let (m, b) = (mid.best.magnitude, bot.best.magnitude);
    rep.summary = json!({
        "middle_max": m,
        "bottom_max": b,
        "middle_over_bottom": m / b,
        "middle_below_bottom": m < b,
        "bottom_passed": bot.best.passed,
        "threshold": bot.best.threshold,
        "wide_spacing_middle_max": wide_mid.best.magnitude,
        "wide_spacing_deviation_from_log2": (wide_mid.best.magnitude - LN_2).abs(),
    });
    Ok(rep)
}

fn dichotomy_table_size(params: &ScaleParams, heights: &[f64]) -> Result<usize> {
    let mut need = 200;
    for &t in heights {
        let p = params.with_t(t)?;
        let cut = (41.45 * p.damping()).ceil() as usize;
        let top = dyadic_ns(&p).last().map_or(0, |&n| 2 * n as usize);
        need = need.max(cut).max(top);
    }
    Ok(need)
}

#[derive(Serialize)]
struct NegativeControl {
    u: f64,
    shift: f64,
    genuine_residual: f64,
    genuine_bound: f64,
    genuine_within: bool,
    perturbed_residual: f64,
    perturbed_bound: f64,
    perturbed_within: bool,
    perturbed_dichotomy_identity_holds: bool,
}

/// Type I/II per zero at T = 7.5·2^k with γ ∈ [T, 2T).
pub fn dichotomy_experiment(zs: &ZeroSet, params: &ScaleParams) -> Result<ExperimentReport> {
    let heights: Vec<f64> = zs
        .zeros()
        .iter()
        .map(|z| dichotomy_height(z.gamma))
        .collect::<Result<_>>()?;
    let tables = sieve_tables(dichotomy_table_size(params, &heights)?)?;
    let out = dichotomy_batch(zs.zeros(), params, &tables)?;
    let mut rep = ExperimentReport::new("dichotomy", json!({ "zeros": zs.len() }), params)
        .with_provenance("zeros_sha256", json!(zeros_hash(zs)));
    let mut distinct = heights.clone();
    distinct.dedup();
    rep.inputs["heights"] = json!(distinct);
    for d in &out {
        rep.push(&dichotomy_record(d))?;
    }
    let count = |f: &dyn Fn(&Dichotomy) -> bool| out.iter().filter(|d| f(d)).count();
    let negative = negative_control(zs, params, &tables)?;
    rep.summary = json!({
        "zeros": out.len(),
        "passed": count(&|d| d.passed),
        "type1_only": count(&|d| d.type1_passed && !d.type2_passed),
        "type2_only": count(&|d| !d.type1_passed && d.type2_passed),
        "both": count(&|d| d.type1_passed && d.type2_passed),
        "neither": count(&|d| !d.type1_passed && !d.type2_passed),
        "identity_holds": count(&|d| d.identity_holds),
        "cross_check": count(&|d| d.cross_check),
        "min_indicator": out.iter().map(|d| d.indicator).fold(f64::INFINITY, f64::min),
        "max_identity_residual": out.iter().map(|d| d.identity_residual).fold(0.0, f64::max),
        "negative_control": negative,
    });
    Ok(rep)
}

fn dichotomy_record(d: &Dichotomy) -> Value {
    json!({
        "rho": d.rho,
        "t": d.t,
        "type1_max": d.type1.best.magnitude,
        "type1_n": d.type1.best.parameter,
        "type1_threshold": d.type1.best.threshold,
        "type2": d.type2.value,
        "type2_abs": d.type2.value.norm(),
        "residue": d.type2.residue,
        "type1_passed": d.type1_passed,
        "type2_passed": d.type2_passed,
        "indicator": d.indicator,
        "passed": d.passed,
        "identity_residual": d.identity_residual,
        "identity_tolerance": d.identity_tolerance,
        "cross_check": d.cross_check,
    })
}

/// The explicit-formula residual at the lowest zero, for the set and for the set with that
/// ordinate moved by 10⁻³.
fn negative_control(zs: &ZeroSet, params: &ScaleParams, tables: &ArithTables) -> Result<Value> {
    let Some(&first) = zs.zeros().first() else {
        return Ok(json!({ "skipped": "empty zero set" }));
    };
    let w = BumpWeight::new();
    let u = 50.0;
    let shift = 1e-3;
    let genuine = match ResidualContext::new(zs, first, &w, params) {
        Ok(ctx) => ctx.at(u, tables)?,
        Err(e @ Error::Precondition(_)) => return Ok(json!({ "skipped": e.to_string() })),
        Err(e) => return Err(e),
    };
    let moved = zs.with_gamma_shifted(0, shift)?;
    let z1 = moved.zeros()[0];
    let perturbed = ResidualContext::new(&moved, z1, &w, params)?.at(u, tables)?;
    let pd = dichotomy_batch(&[z1], params, tables)?;
    Ok(serde_json::to_value(NegativeControl {
        u,
        shift,
        genuine_residual: genuine.residual,
        genuine_bound: genuine.tail_bound,
        genuine_within: genuine.within_bound,
        perturbed_residual: perturbed.residual,
        perturbed_bound: perturbed.tail_bound,
        perturbed_within: perturbed.within_bound,
        perturbed_dichotomy_identity_holds: pd[0].identity_holds,
    })?)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RnhEntry {
    pub sigma: f64,
    pub n: u64,
    pub h: u64,
    pub count: usize,
}

fn sigma_grid(zs: &ZeroSet) -> Vec<f64> {
    let mut g: Vec<f64> = (0..=10).map(|k| 0.5 + 0.05 * k as f64).collect();
    if let Some(lines) = zs.lines() {
        g.extend(lines.iter().copied().filter(|&b| b >= 0.5));
    }
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    g
}

/// Clusters, labels, half-isolation, N(σ, ·) and R_{N,H}(σ); counts only.
pub fn census(zs: &ZeroSet, params: &ScaleParams) -> Result<ExperimentReport> {
    let t = params.t;
    let mut rep = ExperimentReport::new("census", json!({ "zeros": zs.len() }), params)
        .with_provenance("zeros_sha256", json!(zeros_hash(zs)));
    let sigmas = sigma_grid(zs);
    let n_sigma: Vec<Value> = sigmas
        .iter()
        .map(|&s| {
            let c = |hi: f64| {
                zs.zeros()
                    .iter()
                    .filter(|z| z.beta >= s && z.gamma <= hi)
                    .count()
            };
            json!({ "sigma": s, "n_sigma_t": c(t), "n_sigma_2t": c(2.0 * t) })
        })
        .collect();
    if zs.is_empty() {
        rep.summary = json!({
            "zeros": 0, "clusters": 0, "cluster_sizes": [], "labels": {},
            "half_isolated": 0, "n_sigma": n_sigma, "rnh": [], "consistent": true,
        });
        return Ok(rep);
    }
    let decomp = cluster_decompose(zs, params)?;
    let ns = dyadic_ns(params);
    let need = (41.45 * params.damping()).ceil() as usize;
    let tables = sieve_tables(need.max(ns.last().map_or(0, |&n| 2 * n as usize)).max(16))?;
    let all: Vec<usize> = (0..zs.len()).collect();
    let types: Vec<Option<ZeroTypes>> = zero_types(zs, &all, params, &tables)?
        .into_iter()
        .map(Some)
        .collect();
    let labels = classify_with_types(&decomp, zs, &types, params)?;
    let coeffs = crate::detectors::MollifiedCoefficients::new(params, &tables)?;
    let thr = params.detector_threshold();
    // detected[i][k]: |D_{N_k}(ρ_i)| ≥ 1/(3 log T)
    let detected: Vec<Vec<bool>> = zs
        .zeros()
        .par_iter()
        .map(|z| {
            ns.iter()
                .map(|&n| coeffs.d_n(z.rho(), n).map(|v| v.norm() >= thr))
                .collect()
        })
        .collect::<Result<_>>()?;
    let half: Vec<Option<bool>> = (0..zs.len())
        .into_par_iter()
        .map(|i| is_half_isolated(zs, i, params).ok().map(|v| v.holds))
        .collect();

    let mut per_line: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    for (i, z) in zs.zeros().iter().enumerate() {
        let e = per_line.entry(format!("{}", z.beta)).or_default();
        e.0 += 1;
        match half[i] {
            Some(true) => e.1 += 1,
            None => e.2 += 1,
            _ => {}
        }
    }

    let log_t = params.log_t();
    let max_size = decomp.clusters.iter().map(|c| c.size()).max().unwrap_or(1);
    let hs: Vec<u64> = (0..64)
        .map(|j| 1u64 << j)
        .take_while(|&h| h as usize <= max_size)
        .collect();
    let in_window = |g: f64| g >= t && g <= 2.0 * t;
    let half_iso: Vec<Zero> = zs
        .zeros()
        .iter()
        .zip(&half)
        .filter(|(_, h)| **h == Some(true))
        .map(|(z, _)| *z)
        .collect();
    let mut rnh = Vec::new();
    let mut counted_members: Vec<usize> = Vec::new();
    for &sigma in &sigmas {
        for (k, &n) in ns.iter().enumerate() {
            for &h in &hs {
                let mut count = 0;
                for cl in &decomp.clusters {
                    let size = cl.size() as u64;
                    if size < h || size > 2 * h || cl.line_beta < sigma {
                        continue;
                    }
                    let z = zs.zeros();
                    if !cl.member_indices.iter().all(|&m| in_window(z[m].gamma)) {
                        continue;
                    }
                    let hits = cl
                        .member_indices
                        .iter()
                        .filter(|&&m| detected[m][k])
                        .count();
                    if (hits as f64) < h as f64 * log_t.powf(-params.rnh_exponent) {
                        continue;
                    }
                    let radius = cl.size() as f64 * log_t.powf(params.rnh_radius_exponent);
                    let anchored = half_iso.iter().any(|r0| {
                        r0.beta >= sigma
                            && cl
                                .member_indices
                                .iter()
                                .all(|&m| (z[m].gamma - r0.gamma).abs() <= radius)
                    });
                    if anchored {
                        count += cl.size();
                        counted_members.extend(&cl.member_indices);
                    }
                }
                if count > 0 {
                    rnh.push(RnhEntry { sigma, n, h, count });
                }
            }
        }
    }
    counted_members.sort_unstable();
    counted_members.dedup();
    let in_one_cluster = counted_members.iter().all(|&m| {
        decomp
            .clusters
            .iter()
            .filter(|c| c.member_indices.contains(&m))
            .count()
            == 1
    });
    let size_sum: usize = decomp.clusters.iter().map(|c| c.size()).sum();
    let mut label_counts: BTreeMap<String, usize> = BTreeMap::new();
    for l in &labels {
        for t in &l.types {
            *label_counts.entry(format!("{t:?}")).or_default() += 1;
        }
        rep.push(l)?;
    }
    rep.summary = json!({
        "zeros": zs.len(),
        "clusters": decomp.clusters.len(),
        "cluster_sizes": decomp.clusters.iter().map(|c| c.size()).collect::<Vec<_>>(),
        "labels": label_counts,
        "half_isolated": half.iter().filter(|h| **h == Some(true)).count(),
        "half_isolation_unknown": half.iter().filter(|h| h.is_none()).count(),
        "per_line": per_line.iter().map(|(k, v)| (k.clone(), json!({ "zeros": v.0, "half_isolated": v.1, "unknown": v.2 }))).collect::<BTreeMap<_, _>>(),
        "n_sigma": n_sigma,
        "rnh": rnh,
        "consistent": size_sum == zs.len() && in_one_cluster,
    });
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::zeta_fixture;
    use crate::zerosets::ZeroSetSource;

    #[test]
    fn census_empty_and_singleton() {
        let p = ScaleParams::new(1000.0).unwrap();
        let r = census(&ZeroSet::empty(ZeroSetSource::Synthetic), &p).unwrap();
        assert_eq!(r.summary["clusters"], 0);
        for row in r.summary["n_sigma"].as_array().unwrap() {
            assert_eq!(row["n_sigma_t"], 0);
        }
        let one = gen_line_config(&[(0.7, vec![1500.0])]).unwrap();
        let r = census(&one, &p).unwrap();
        for row in r.summary["n_sigma"].as_array().unwrap() {
            let s = row["sigma"].as_f64().unwrap();
            assert_eq!(row["n_sigma_2t"], if s <= 0.7 { 1 } else { 0 });
            assert_eq!(row["n_sigma_t"], 0);
        }
    }

    #[test]
    fn census_cluster_sizes() {
        let mut p = ScaleParams::new(1000.0).unwrap();
        p.cluster_gap = Some(5.0);
        let zs = gen_line_config(&[
            (0.5, vec![1100.0, 1104.0, 1108.0]),
            (0.6, vec![1300.0]),
            (0.8, vec![1500.0, 1501.0, 1502.0, 1503.0, 1504.0]),
        ])
        .unwrap();
        let r = census(&zs, &p).unwrap();
        let mut sizes: Vec<u64> = r.summary["cluster_sizes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 3, 5]);
        assert_eq!(r.summary["consistent"], true);
        let again = census(&zs, &p).unwrap();
        assert_eq!(r.to_json().unwrap(), again.to_json().unwrap());
    }

    #[test]
    fn dichotomy_small_batch() {
        let zs = zeta_fixture();
        let p = ScaleParams::new(100.0).unwrap();
        let r = dichotomy_experiment(&zs, &p).unwrap();
        assert_eq!(r.summary["passed"], 100, "{}", r.summary);
        let nc = &r.summary["negative_control"];
        assert_eq!(nc["genuine_within"], true, "{nc}");
        assert_eq!(nc["perturbed_within"], false, "{nc}");
    }

    #[test]
    fn ap_orderings() {
        let p = ScaleParams::new(1e6).unwrap();
        let r = ap_obstruction_experiment(2.0, 501, &p).unwrap();
        let s = &r.summary;
        assert_eq!(s["middle_below_bottom"], true, "{s}");
        assert_eq!(s["bottom_passed"], true);
        assert!(
            s["wide_spacing_deviation_from_log2"].as_f64().unwrap() < 1e-6,
            "{s}"
        );
    }

    #[test]
    fn bow_orderings() {
        let p = ScaleParams::new(1e4).unwrap();
        let r = bow_experiment(1e4, 0.65, 10.0, &p).unwrap();
        let s = &r.summary;
        assert_eq!(s["middle_below_control"], true, "{s}");
        assert_eq!(s["middle_below_bottom"], true, "{s}");
        assert_eq!(s["control_within_tail"], true, "{s}");
    }
}
