//! Type A/B/C/D labels for maximal clusters.

use rayon::prelude::*;
use serde::Serialize;

use super::typeone::{dichotomy_with, MollifiedCoefficients};
use crate::arith::ArithTables;
use crate::error::{Error, Result};
use crate::params::ScaleParams;
use crate::zerosets::{
    find_half_isolated_near_cluster, Cluster, ClusterDecomposition, NearbySearch, ZeroSet,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ClusterType {
    /// at least half the members are Type II
    A,
    /// at least half are Type I and some member lies outside [T, 2T]
    B,
    /// many zeros to the right nearby
    C,
    /// at least half are Type I, inside the window, few zeros to the right
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZeroTypes {
    pub type1: bool,
    pub type2: bool,
    /// dyadic N attaining max |D_N(ρ)| (smallest on ties)
    pub best_n: u64,
    pub type1_magnitude: f64,
    pub type2_magnitude: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeDSubset {
    pub n: u64,
    pub members: Vec<usize>,
    /// |C'| ≥ |C| / (log T)²
    pub meets_size_bound: bool,
    pub nearby: Option<NearbySearch>,
    pub nearby_error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterLabel {
    pub cluster: usize,
    pub line_beta: f64,
    pub size: usize,
    pub gamma_span: (f64, f64),
    pub types: Vec<ClusterType>,
    pub type1_count: usize,
    pub type2_count: usize,
    pub outside_window: bool,
    /// zeros with β greater than the line within cluster_gap·|C| of some member
    pub right_count: usize,
    pub type_c_bound: f64,
    pub type_d: Option<TypeDSubset>,
}

/// Type I/II for every zero in `zs` at the parameters' T.
pub fn zero_types(
    zs: &ZeroSet,
    idx: &[usize],
    params: &ScaleParams,
    tables: &ArithTables,
) -> Result<Vec<ZeroTypes>> {
    let coeffs = MollifiedCoefficients::new(params, tables)?;
    idx.par_iter()
        .map(|&i| {
            let d = dichotomy_with(zs.get(i)?, params, tables, &coeffs)?;
            Ok(ZeroTypes {
                type1: d.type1_passed,
                type2: d.type2_passed,
                best_n: d.type1.best.parameter as u64,
                type1_magnitude: d.type1.best.magnitude,
                type2_magnitude: d.type2.value.norm(),
            })
        })
        .collect()
}

fn right_count(zs: &ZeroSet, cl: &Cluster, radius: f64) -> Result<usize> {
    let (lo, hi) = cl.gamma_span(zs);
    zs.require_complete(lo - radius, hi + radius, "cluster classification")?;
    let z = zs.zeros();
    Ok(zs
        .gamma_window(lo - radius, hi + radius)
        .filter(|&j| z[j].beta > cl.line_beta)
        .filter(|&j| {
            cl.member_indices
                .iter()
                .any(|&m| z[m].dist(&z[j]) <= radius)
        })
        .count())
}

fn type_d_subset(
    zs: &ZeroSet,
    cl: &Cluster,
    types: &[Option<ZeroTypes>],
    params: &ScaleParams,
) -> TypeDSubset {
    let mut classes: Vec<(u64, Vec<usize>)> = Vec::new();
    for &m in &cl.member_indices {
        let t = types[m].expect("checked by caller");
        if !t.type1 {
            continue;
        }
        match classes.iter_mut().find(|c| c.0 == t.best_n) {
            Some(c) => c.1.push(m),
            None => classes.push((t.best_n, vec![m])),
        }
    }
    classes.sort_by_key(|c| c.0);
    let mut best = (0u64, Vec::new());
    for c in classes {
        if c.1.len() > best.1.len() {
            best = c;
        }
    }
    let (nearby, nearby_error) = match find_half_isolated_near_cluster(zs, cl, params) {
        Ok(n) => (Some(n), None),
        Err(e) => (None, Some(e.to_string())),
    };
    TypeDSubset {
        n: best.0,
        meets_size_bound: best.1.len() as f64 >= cl.size() as f64 / params.log_t().powi(2),
        members: best.1,
        nearby,
        nearby_error,
    }
}

/// Labels from precomputed types indexed like `zs`; entries may be `None` only outside clusters.
pub fn classify_with_types(
    decomp: &ClusterDecomposition,
    zs: &ZeroSet,
    types: &[Option<ZeroTypes>],
    params: &ScaleParams,
) -> Result<Vec<ClusterLabel>> {
    if types.len() != zs.len() {
        return Err(Error::Precondition(format!(
            "{} type records for {} zeros",
            types.len(),
            zs.len()
        )));
    }
    let (t_lo, t_hi) = (params.t, 2.0 * params.t);
    let log_t = params.log_t();
    let z = zs.zeros();
    decomp
        .clusters
        .iter()
        .enumerate()
        .map(|(ci, cl)| {
            if let Some(&m) = cl.member_indices.iter().find(|&&m| types[m].is_none()) {
                return Err(Error::Precondition(format!(
                    "no Type I/II record for member {m} of cluster {ci}"
                )));
            }
            let size = cl.size();
            let half = size as f64 / 2.0;
            let ts: Vec<ZeroTypes> = cl
                .member_indices
                .iter()
                .map(|&m| types[m].unwrap())
                .collect();
            let type1_count = ts.iter().filter(|t| t.type1).count();
            let type2_count = ts.iter().filter(|t| t.type2).count();
            let outside_window = cl
                .member_indices
                .iter()
                .any(|&m| z[m].gamma < t_lo || z[m].gamma > t_hi);
            let rc = right_count(zs, cl, params.cluster_gap() * size as f64)?;
            let type_c_bound = size as f64 / log_t.powf(params.type_c_exponent);
            let a = type2_count as f64 >= half;
            let mostly_one = type1_count as f64 >= half;
            let b = mostly_one && outside_window;
            let c = !a && !b && rc as f64 >= type_c_bound;
            let d = mostly_one && !b && (rc as f64) < type_c_bound;
            let types_here: Vec<ClusterType> = [
                (a, ClusterType::A),
                (b, ClusterType::B),
                (c, ClusterType::C),
                (d, ClusterType::D),
            ]
            .into_iter()
            .filter_map(|(on, t)| on.then_some(t))
            .collect();
            let type_d = d.then(|| type_d_subset(zs, cl, types, params));
            Ok(ClusterLabel {
                cluster: ci,
                line_beta: cl.line_beta,
                size,
                gamma_span: cl.gamma_span(zs),
                types: types_here,
                type1_count,
                type2_count,
                outside_window,
                right_count: rc,
                type_c_bound,
                type_d,
            })
        })
        .collect()
}

/// Computes Type I/II for all cluster members at T, then labels.
pub fn classify_clusters(
    decomp: &ClusterDecomposition,
    zs: &ZeroSet,
    params: &ScaleParams,
    tables: &ArithTables,
) -> Result<Vec<ClusterLabel>> {
    let members: Vec<usize> = decomp
        .clusters
        .iter()
        .flat_map(|c| c.member_indices.iter().copied())
        .collect();
    let computed = zero_types(zs, &members, params, tables)?;
    let mut types = vec![None; zs.len()];
    for (m, t) in members.into_iter().zip(computed) {
        types[m] = Some(t);
    }
    classify_with_types(decomp, zs, &types, params)
}
