//! Zero sets: table ingestion, synthetic line configurations, clusters and half-isolation.

use std::collections::BTreeSet;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{range_err, Error, Result};
use crate::params::{ScaleParams, YRange};

/// Above this many distinct real parts no line labelling is inferred.
pub const LINE_INFERENCE_MAX: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub beta: f64,
    pub gamma: f64,
}

impl Zero {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(range_err("beta", beta, "(0, 1)"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(range_err("gamma", gamma, "(0, inf)"));
        }
        Ok(Zero { beta, gamma })
    }

    pub fn on_critical_line(gamma: f64) -> Result<Self> {
        Zero::new(0.5, gamma)
    }

    pub fn rho(&self) -> Complex64 {
        Complex64::new(self.beta, self.gamma)
    }

    pub fn dist(&self, other: &Zero) -> f64 {
        (self.beta - other.beta).hypot(self.gamma - other.gamma)
    }

    fn cmp_key(&self, other: &Zero) -> std::cmp::Ordering {
        self.gamma
            .total_cmp(&other.gamma)
            .then(self.beta.total_cmp(&other.beta))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroSetSource {
    Table,
    Synthetic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroFormat {
    /// one ordinate per line, β = 1/2
    Ordinates,
    /// "β γ" per line
    BetaGamma,
}

fn ser_range<S: Serializer>(r: &Option<(f64, f64)>, s: S) -> std::result::Result<S::Ok, S::Error> {
    // JSON has no infinity; an open upper end is written as null
    let v = r.map(|(lo, hi)| (lo, if hi.is_finite() { Some(hi) } else { None }));
    v.serialize(s)
}

/// Zeros sorted by (γ, β), optionally labelled by vertical lines.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroSet {
    zeros: Vec<Zero>,
    lines: Option<Vec<f64>>,
    c_f: Option<f64>,
    #[serde(serialize_with = "ser_range")]
    complete_range: Option<(f64, f64)>,
    source: ZeroSetSource,
}

#[derive(Clone, Debug)]
pub struct LoadOutcome {
    pub set: ZeroSet,
    pub duplicates_removed: usize,
    pub warnings: Vec<String>,
    /// Distinct-β threshold used for line inference.
    pub line_inference_max: usize,
}

fn min_gap(lines: &[f64]) -> Option<f64> {
    lines
        .windows(2)
        .map(|w| w[1] - w[0])
        .min_by(|a, b| a.total_cmp(b))
}

impl ZeroSet {
    /// Sorts and removes exact duplicates; returns the set and the number removed.
    pub fn from_zeros(mut zeros: Vec<Zero>, source: ZeroSetSource) -> (Self, usize) {
        zeros.sort_by(Zero::cmp_key);
        let before = zeros.len();
        zeros.dedup();
        let removed = before - zeros.len();
        (
            ZeroSet {
                zeros,
                lines: None,
                c_f: None,
                complete_range: None,
                source,
            },
            removed,
        )
    }

    pub fn empty(source: ZeroSetSource) -> Self {
        ZeroSet::from_zeros(Vec::new(), source).0
    }

    /// Labels lines by the distinct β values; `false` if there are too many.
    pub fn infer_lines(&mut self) -> bool {
        let set: BTreeSet<u64> = self.zeros.iter().map(|z| z.beta.to_bits()).collect();
        if set.len() > LINE_INFERENCE_MAX {
            self.lines = None;
            self.c_f = None;
            return false;
        }
        self.set_lines_from_zeros();
        true
    }

    fn set_lines_from_zeros(&mut self) {
        let mut lines: Vec<f64> = self.zeros.iter().map(|z| z.beta).collect();
        lines.sort_by(|a, b| a.total_cmp(b));
        lines.dedup();
        self.c_f = min_gap(&lines);
        self.lines = Some(lines);
    }

    /// Drops any line labels.
    pub fn without_lines(mut self) -> Self {
        self.lines = None;
        self.c_f = None;
        self
    }

    pub fn with_complete_range(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) || lo.is_nan() {
            return Err(Error::Input(format!(
                "complete range [{lo}, {hi}] is empty"
            )));
        }
        self.complete_range = Some((lo, hi));
        Ok(self)
    }

    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn get(&self, idx: usize) -> Result<Zero> {
        self.zeros
            .get(idx)
            .copied()
            .ok_or_else(|| range_err("zero index", idx as f64, format!("[0, {})", self.len())))
    }

    pub fn lines(&self) -> Option<&[f64]> {
        self.lines.as_deref()
    }

    pub fn c_f(&self) -> Option<f64> {
        self.c_f
    }

    pub fn complete_range(&self) -> Option<(f64, f64)> {
        self.complete_range
    }

    pub fn source(&self) -> ZeroSetSource {
        self.source
    }

    pub fn is_complete_on(&self, lo: f64, hi: f64) -> bool {
        matches!(self.complete_range, Some((a, b)) if a <= lo && hi <= b)
    }

    /// Ordinates below 0 are outside the model and need no completeness.
    pub fn require_complete(&self, lo: f64, hi: f64, what: &str) -> Result<()> {
        let lo = lo.max(0.0);
        if self.is_complete_on(lo, hi) {
            return Ok(());
        }
        Err(Error::Precondition(format!(
            "{what} needs the zero set complete on [{lo}, {hi}], asserted range is {:?}",
            self.complete_range
        )))
    }

    /// Indices with γ in [lo, hi].
    pub fn gamma_window(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = self.zeros.partition_point(|z| z.gamma < lo);
        let b = self.zeros.partition_point(|z| z.gamma <= hi);
        a..b.max(a)
    }

    /// Indices j ≠ idx with |ρ_j − ρ_idx| ≤ radius.
    pub fn neighbours(&self, idx: usize, radius: f64) -> Vec<usize> {
        let z0 = self.zeros[idx];
        self.gamma_window(z0.gamma - radius, z0.gamma + radius)
            .filter(|&j| j != idx && self.zeros[j].dist(&z0) <= radius)
            .collect()
    }

    pub fn index_of(&self, z: &Zero) -> Option<usize> {
        self.zeros.binary_search_by(|p| p.cmp_key(z)).ok()
    }

    /// Copy with one ordinate moved by `delta`; labels and completeness are kept.
    pub fn with_gamma_shifted(&self, idx: usize, delta: f64) -> Result<ZeroSet> {
        let mut zeros = self.zeros.clone();
        let z = self.get(idx)?;
        zeros[idx] = Zero::new(z.beta, z.gamma + delta)?;
        let (mut out, _) = ZeroSet::from_zeros(zeros, self.source);
        out.lines = self.lines.clone();
        out.c_f = self.c_f;
        out.complete_range = self.complete_range;
        Ok(out)
    }

    /// Copy with extra zeros added; line labels are recomputed if present.
    pub fn with_added(&self, extra: &[Zero]) -> ZeroSet {
        let mut zeros = self.zeros.clone();
        zeros.extend_from_slice(extra);
        let (mut out, _) = ZeroSet::from_zeros(zeros, self.source);
        out.complete_range = self.complete_range;
        if self.lines.is_some() {
            out.set_lines_from_zeros();
        }
        out
    }
}

/// Parses a zero table held in memory.
pub fn parse_zeros(text: &str, format: ZeroFormat) -> Result<LoadOutcome> {
    let mut zeros = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line_no = i + 1;
        let bad = |msg: String| Error::Parse { line: line_no, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
        let zero = match (format, fields.as_slice()) {
            (ZeroFormat::Ordinates, [g]) => Zero::on_critical_line(num(g)?),
            (ZeroFormat::BetaGamma, [b, g]) => Zero::new(num(b)?, num(g)?),
            (ZeroFormat::Ordinates, _) => {
                return Err(bad(format!("expected one ordinate, got {line:?}")))
            }
            (ZeroFormat::BetaGamma, _) => {
                return Err(bad(format!("expected \"beta gamma\", got {line:?}")))
            }
        }
        .map_err(|e| bad(e.to_string()))?;
        zeros.push(zero);
    }
    let (mut set, removed) = ZeroSet::from_zeros(zeros, ZeroSetSource::Table);
    let mut warnings = Vec::new();
    if removed > 0 {
        warnings.push(format!("removed {removed} exact duplicate zeros"));
    }
    if !set.infer_lines() {
        warnings.push(format!(
            "more than {LINE_INFERENCE_MAX} distinct real parts; lines not inferred"
        ));
    }
    Ok(LoadOutcome {
        set,
        duplicates_removed: removed,
        warnings,
        line_inference_max: LINE_INFERENCE_MAX,
    })
}

pub fn load_zeros(path: &Path, format: ZeroFormat) -> Result<LoadOutcome> {
    let text = std::fs::read_to_string(path)?;
    let out = parse_zeros(&text, format)?;
    for w in &out.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(out)
}

fn synthetic(zeros: Vec<Zero>) -> ZeroSet {
    let (mut set, _) = ZeroSet::from_zeros(zeros, ZeroSetSource::Synthetic);
    set.set_lines_from_zeros();
    // nothing exists outside what was generated
    set.complete_range = Some((0.0, f64::INFINITY));
    set
}

/// One vertical line per entry.
pub fn gen_line_config(spec: &[(f64, Vec<f64>)]) -> Result<ZeroSet> {
    let mut seen = BTreeSet::new();
    let mut zeros = Vec::new();
    for (beta, gammas) in spec {
        if !seen.insert(beta.to_bits()) {
            return Err(Error::Input(format!("duplicate line beta = {beta}")));
        }
        for &g in gammas {
            zeros.push(Zero::new(*beta, g)?);
        }
    }
    let mut set = synthetic(zeros);
    let mut lines: Vec<f64> = spec.iter().map(|(b, _)| *b).collect();
    lines.sort_by(|a, b| a.total_cmp(b));
    set.c_f = min_gap(&lines);
    set.lines = Some(lines);
    Ok(set)
}

/// β + i(γ₀ + k·spacing), k = 0..count.
pub fn gen_vertical_ap_zeros(
    beta: f64,
    gamma0: f64,
    spacing: f64,
    count: usize,
) -> Result<ZeroSet> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Config(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    if count == 0 {
        return Err(Error::Config("count must be at least 1".into()));
    }
    let zeros = (0..count)
        .map(|k| Zero::new(beta, gamma0 + k as f64 * spacing))
        .collect::<Result<Vec<_>>>()?;
    Ok(synthetic(zeros))
}

/// Length of the bow, round(T₀^ε).
pub fn bow_length(t0: f64, eps: f64) -> Result<usize> {
    let l = t0.powf(eps).round();
    if !(8.0..=1e6).contains(&l) {
        return Err(range_err("bow length round(T0^eps)", l, "[8, 1e6]"));
    }
    Ok(l as usize)
}

/// Real part of the j-th bow zero, computed from integers so both slopes share exact values.
pub fn bow_beta(j: usize, l: usize) -> f64 {
    let (j, l) = (j as f64, l as f64);
    if 4.0 * j <= l {
        (l + 2.0 * j) / (2.0 * l)
    } else if 4.0 * j <= 3.0 * l {
        0.75
    } else {
        (3.0 * l - 2.0 * j) / (2.0 * l)
    }
}

/// Bow configuration x_j, j = 1..L: real parts rise to 3/4, stay, and fall back;
/// ordinates T₀ + c·j/log T₀.
pub fn gen_bow(t0: f64, eps: f64, c: f64) -> Result<ZeroSet> {
    if !(t0 > 1.0) {
        return Err(range_err("T0", t0, "(1, inf)"));
    }
    if !(c > 0.0) {
        return Err(range_err("c", c, "(0, inf)"));
    }
    let l = bow_length(t0, eps)?;
    let step = c / t0.ln();
    let zeros = (1..=l)
        .map(|j| Zero::new(bow_beta(j, l), t0 + step * j as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(synthetic(zeros))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub line_beta: f64,
    pub member_indices: Vec<usize>,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.member_indices.len()
    }

    pub fn gamma_span(&self, zs: &ZeroSet) -> (f64, f64) {
        let z = zs.zeros();
        (
            z[self.member_indices[0]].gamma,
            z[*self.member_indices.last().unwrap()].gamma,
        )
    }

    /// Member with the smallest ordinate.
    pub fn bottom(&self) -> usize {
        self.member_indices[0]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterDecomposition {
    pub clusters: Vec<Cluster>,
    pub zero_to_cluster: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterSummary {
    pub line: f64,
    pub size: usize,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    #[serde(rename = "type")]
    pub kind: Option<String>,
}

impl ClusterDecomposition {
    pub fn summaries(&self, zs: &ZeroSet) -> Vec<ClusterSummary> {
        self.clusters
            .iter()
            .map(|c| {
                let (lo, hi) = c.gamma_span(zs);
                ClusterSummary {
                    line: c.line_beta,
                    size: c.size(),
                    gamma_lo: lo,
                    gamma_hi: hi,
                    kind: None,
                }
            })
            .collect()
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so representatives are deterministic
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Maximal clusters: same-line zeros chained by ordinate gaps ≤ cluster_gap.
pub fn cluster_decompose(zs: &ZeroSet, params: &ScaleParams) -> Result<ClusterDecomposition> {
    let Some(lines) = zs.lines() else {
        return Err(Error::Precondition(
            "lines required: cluster decomposition needs line labels; infer them on load or use a synthetic generator".into(),
        ));
    };
    let gap = params.cluster_gap();
    let n = zs.len();
    let mut dsu = Dsu::new(n);
    let mut last_on_line: Vec<Option<usize>> = vec![None; lines.len()];
    for (i, z) in zs.zeros().iter().enumerate() {
        let li = lines
            .binary_search_by(|b| b.total_cmp(&z.beta))
            .map_err(|_| {
                Error::Invariant(format!("zero {i} has beta {} not in the line set", z.beta))
            })?;
        if let Some(prev) = last_on_line[li] {
            if z.gamma - zs.zeros()[prev].gamma <= gap {
                dsu.union(prev, i);
            }
        }
        last_on_line[li] = Some(i);
    }
    let mut root_to_cluster = vec![usize::MAX; n];
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut zero_to_cluster = vec![0; n];
    // indices ascend in (γ, β), so clusters come out ordered by their bottom zero
    for i in 0..n {
        let r = dsu.find(i);
        if root_to_cluster[r] == usize::MAX {
            root_to_cluster[r] = clusters.len();
            clusters.push(Cluster {
                line_beta: zs.zeros()[i].beta,
                member_indices: Vec::new(),
            });
        }
        let c = root_to_cluster[r];
        clusters[c].member_indices.push(i);
        zero_to_cluster[i] = c;
    }
    Ok(ClusterDecomposition {
        clusters,
        zero_to_cluster,
    })
}

/// Distinct lines, or every pair of ordinates at least `gap` apart.
pub fn clusters_separated(zs: &ZeroSet, a: &Cluster, b: &Cluster, gap: f64) -> bool {
    if a.line_beta != b.line_beta {
        return true;
    }
    let z = zs.zeros();
    a.member_indices.iter().all(|&i| {
        b.member_indices
            .iter()
            .all(|&j| (z[i].gamma - z[j].gamma).abs() >= gap)
    })
}

/// Mean spacing of zeta zeros at height γ, 2π / log(γ/2π).
pub fn mean_zero_spacing(gamma: f64) -> f64 {
    2.0 * std::f64::consts::PI
        / (gamma / (2.0 * std::f64::consts::PI))
            .max(std::f64::consts::E)
            .ln()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YHalfIsolation {
    pub holds: bool,
    pub y: f64,
    /// Indices of neighbours satisfying neither condition.
    pub witnesses: Vec<usize>,
    /// The neighbourhood radius is below the mean zero spacing at this height.
    pub sparse_neighbourhood: bool,
}

struct Neighbourhood {
    z0: Zero,
    radius: f64,
    members: Vec<usize>,
}

fn neighbourhood(zs: &ZeroSet, idx: usize, params: &ScaleParams) -> Result<Neighbourhood> {
    let z0 = zs.get(idx)?;
    let radius = params.neighborhood_radius(z0.gamma);
    zs.require_complete(z0.gamma - radius, z0.gamma + radius, "half-isolation test")?;
    Ok(Neighbourhood {
        z0,
        radius,
        members: zs.neighbours(idx, radius),
    })
}

fn violators(zs: &ZeroSet, nb: &Neighbourhood, y: f64, params: &ScaleParams) -> Vec<usize> {
    let near = params.real_gap(y);
    let left = params.left_gap(nb.z0.gamma, y);
    nb.members
        .iter()
        .copied()
        .filter(|&j| {
            let z = zs.zeros()[j];
            let above = (z.beta - nb.z0.beta).abs() <= near && z.gamma >= nb.z0.gamma;
            let to_left = z.beta <= nb.z0.beta - left;
            !(above || to_left)
        })
        .collect()
}

pub fn is_y_half_isolated(
    zs: &ZeroSet,
    idx: usize,
    y: f64,
    params: &ScaleParams,
) -> Result<YHalfIsolation> {
    if !(y > 1.0) {
        return Err(range_err("Y", y, "(1, inf)"));
    }
    let nb = neighbourhood(zs, idx, params)?;
    let witnesses = violators(zs, &nb, y, params);
    Ok(YHalfIsolation {
        holds: witnesses.is_empty(),
        y,
        witnesses,
        sparse_neighbourhood: nb.radius < mean_zero_spacing(nb.z0.gamma),
    })
}

/// Geometric grid y_min·r^k over the range.
pub fn y_grid(range: &YRange, ratio: f64) -> Result<Vec<f64>> {
    if !(range.y_min > 1.0 && range.y_min <= range.y_max) {
        return Err(Error::Config(format!(
            "Y-range [{}, {}] is empty or not above 1",
            range.y_min, range.y_max
        )));
    }
    if !(ratio > 1.0) {
        return Err(Error::Config(format!(
            "grid ratio must exceed 1, got {ratio}"
        )));
    }
    let n = ((range.y_max / range.y_min).ln() / ratio.ln()).floor() as usize;
    Ok((0..=n)
        .map(|k| range.y_min * ratio.powi(k as i32))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfIsolationVerdict {
    pub holds: bool,
    pub certifying_y: Option<f64>,
    pub y_range: YRange,
    pub grid_points: usize,
    /// Witnesses at the smallest grid Y when no Y certifies.
    pub witnesses: Vec<usize>,
    pub sparse_neighbourhood: bool,
}

pub fn is_half_isolated(
    zs: &ZeroSet,
    idx: usize,
    params: &ScaleParams,
) -> Result<HalfIsolationVerdict> {
    let z0 = zs.get(idx)?;
    let range = params.y_range_for(z0.gamma);
    let grid = y_grid(&range, params.u_grid_ratio)?;
    let nb = neighbourhood(zs, idx, params)?;
    let sparse = nb.radius < mean_zero_spacing(z0.gamma);
    let mut first_witnesses = None;
    for &y in &grid {
        let w = violators(zs, &nb, y, params);
        if w.is_empty() {
            return Ok(HalfIsolationVerdict {
                holds: true,
                certifying_y: Some(y),
                y_range: range,
                grid_points: grid.len(),
                witnesses: Vec::new(),
                sparse_neighbourhood: sparse,
            });
        }
        first_witnesses.get_or_insert(w);
    }
    Ok(HalfIsolationVerdict {
        holds: false,
        certifying_y: None,
        y_range: range,
        grid_points: grid.len(),
        witnesses: first_witnesses.unwrap_or_default(),
        sparse_neighbourhood: sparse,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum NearbySearch {
    Found {
        index: usize,
        path: Vec<usize>,
        /// min over cluster members of |ρ₀ − ρ′|
        distance_to_cluster: f64,
        /// distance_to_cluster ≤ cluster_gap·|C|
        within_bound: bool,
    },
    Exhausted {
        path: Vec<usize>,
    },
}

/// Radius of the step sets Z_j, 2(log T)².
pub fn nearby_step_radius(params: &ScaleParams) -> f64 {
    2.0 * params.log_t().powi(2)
}

/// Walks right (or down on the same line) from the bottom of `cl` until no zero within
/// 2(log T)² lies strictly right of, or directly below, the current one.
pub fn find_half_isolated_near_cluster(
    zs: &ZeroSet,
    cl: &Cluster,
    params: &ScaleParams,
) -> Result<NearbySearch> {
    if cl.member_indices.is_empty() {
        return Err(Error::Input("empty cluster".into()));
    }
    for &m in &cl.member_indices {
        zs.get(m)?;
    }
    let rad = nearby_step_radius(params);
    let (lo, hi) = cl.gamma_span(zs);
    let inflate = params.cluster_gap() * cl.size() as f64 + rad;
    zs.require_complete(lo - inflate, hi + inflate, "nearby half-isolated search")?;
    let z = zs.zeros();
    let mut cur = cl.bottom();
    let mut path = vec![cur];
    for _ in 0..zs.len() {
        let zc = z[cur];
        zs.require_complete(
            zc.gamma - rad,
            zc.gamma + rad,
            "nearby half-isolated search",
        )?;
        let next = zs
            .neighbours(cur, rad)
            .into_iter()
            .filter(|&j| z[j].beta > zc.beta || (z[j].beta == zc.beta && z[j].gamma < zc.gamma))
            .min_by(|&a, &b| {
                z[b].beta
                    .total_cmp(&z[a].beta)
                    .then(z[a].gamma.total_cmp(&z[b].gamma))
            });
        match next {
            None => {
                let d = cl
                    .member_indices
                    .iter()
                    .map(|&m| z[m].dist(&zc))
                    .fold(f64::INFINITY, f64::min);
                return Ok(NearbySearch::Found {
                    index: cur,
                    path,
                    distance_to_cluster: d,
                    within_bound: d <= params.cluster_gap() * cl.size() as f64,
                });
            }
            Some(j) => {
                cur = j;
                path.push(j);
            }
        }
    }
    Ok(NearbySearch::Exhausted { path })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ScaleParams {
        ScaleParams::new(1000.0).unwrap()
    }

    #[test]
    fn parse_examples() {
        let out = parse_zeros("14.134725142\n", ZeroFormat::Ordinates).unwrap();
        assert_eq!(
            out.set.zeros(),
            &[Zero {
                beta: 0.5,
                gamma: 14.134725142
            }]
        );
        let out = parse_zeros("0.75 101.25\n", ZeroFormat::BetaGamma).unwrap();
        assert_eq!(
            out.set.zeros(),
            &[Zero {
                beta: 0.75,
                gamma: 101.25
            }]
        );
        let out = parse_zeros("", ZeroFormat::Ordinates).unwrap();
        assert!(out.set.is_empty());
        assert!(out.set.complete_range().is_none());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_zeros("14.1\n\nabc\n", ZeroFormat::Ordinates) {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_zeros("0.5 14 3\n", ZeroFormat::BetaGamma) {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse_zeros("-3\n", ZeroFormat::Ordinates).is_err());
    }

    #[test]
    fn duplicates_and_sorting() {
        let out = parse_zeros("25.0\n14.0\n25.0\n21.0\n", ZeroFormat::Ordinates).unwrap();
        assert_eq!(out.duplicates_removed, 1);
        assert_eq!(out.warnings.len(), 1);
        let g: Vec<f64> = out.set.zeros().iter().map(|z| z.gamma).collect();
        assert_eq!(g, vec![14.0, 21.0, 25.0]);
        assert_eq!(out.set.lines(), Some(&[0.5][..]));
    }

    #[test]
    fn too_many_lines_are_not_inferred() {
        let text: String = (1..=70)
            .map(|k| format!("{} {}\n", k as f64 / 100.0, 10.0 + k as f64))
            .collect();
        let out = parse_zeros(&text, ZeroFormat::BetaGamma).unwrap();
        assert!(out.set.lines().is_none());
    }

    #[test]
    fn line_config_examples() {
        let zs = gen_line_config(&[(0.75, vec![100.0, 100.5])]).unwrap();
        assert_eq!(zs.len(), 2);
        assert_eq!(zs.lines(), Some(&[0.75][..]));
        let zs = gen_line_config(&[(0.5, vec![10.0]), (0.75, vec![12.0])]).unwrap();
        assert_eq!(zs.c_f(), Some(0.25));
        assert!(gen_line_config(&[]).unwrap().is_empty());
        assert!(gen_line_config(&[(0.5, vec![1.0]), (0.5, vec![2.0])]).is_err());
    }

    #[test]
    fn vertical_ap_examples() {
        let spacing = 2.0 * std::f64::consts::PI / 100.0;
        assert!((spacing - 0.06283).abs() < 1e-5);
        let zs = gen_vertical_ap_zeros(0.75, 1000.0, spacing, 1).unwrap();
        assert_eq!(zs.len(), 1);
        let zs = gen_vertical_ap_zeros(0.75, 1000.0, spacing, 50).unwrap();
        let mut p = params();
        p.cluster_gap = Some(spacing * 51.0);
        assert_eq!(cluster_decompose(&zs, &p).unwrap().clusters.len(), 1);
    }

    #[test]
    fn bow_shape() {
        let zs = gen_bow(1000.0, 0.5, 1.0).unwrap();
        let l = zs.len();
        assert_eq!(l, 32);
        assert_eq!(bow_beta(l / 2, l), 0.75);
        assert_eq!(bow_beta(l / 4, l), 0.75);
        assert_eq!(bow_beta(l / 4 + 1, l), 0.75);
        assert_eq!(bow_beta(1, l), bow_beta(l - 1, l));
        let step = 1.0 / 1000f64.ln();
        for w in zs.zeros().windows(2) {
            assert!((w[1].gamma - w[0].gamma - step).abs() < 1e-9);
        }
        assert!(gen_bow(1000.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn distinct_lines_same_gamma_are_separate() {
        let zs = gen_line_config(&[(0.5, vec![100.0]), (0.75, vec![100.0])]).unwrap();
        let d = cluster_decompose(&zs, &params()).unwrap();
        assert_eq!(d.clusters.len(), 2);
        assert!(d.clusters.iter().all(|c| c.size() == 1));
        let one = gen_line_config(&[(0.5, vec![100.0])]).unwrap();
        assert_eq!(
            cluster_decompose(&one, &params()).unwrap().clusters.len(),
            1
        );
    }

    #[test]
    fn decomposition_needs_lines() {
        let mut out = parse_zeros("14.0\n", ZeroFormat::Ordinates).unwrap();
        out.set.lines = None;
        assert!(matches!(
            cluster_decompose(&out.set, &params()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn y_half_isolated_examples() {
        let p = params();
        let single = gen_line_config(&[(0.5, vec![100.0])]).unwrap();
        assert!(is_y_half_isolated(&single, 0, 10.0, &p).unwrap().holds);
        let above = gen_line_config(&[(0.5, vec![100.0, 100.1])]).unwrap();
        assert!(is_y_half_isolated(&above, 0, 10.0, &p).unwrap().holds);
        let r = is_y_half_isolated(&above, 1, 10.0, &p).unwrap();
        assert!(!r.holds);
        assert_eq!(r.witnesses, vec![0]);
        assert!(is_y_half_isolated(&above, 0, 1.0, &p).is_err());
    }

    #[test]
    fn completeness_is_enforced() {
        let out = parse_zeros("100.0\n", ZeroFormat::Ordinates).unwrap();
        assert!(matches!(
            is_y_half_isolated(&out.set, 0, 10.0, &params()),
            Err(Error::Precondition(_))
        ));
        let zs = out.set.with_complete_range(90.0, 105.0).unwrap();
        assert!(is_y_half_isolated(&zs, 0, 10.0, &params()).is_err());
        let zs = zs.with_complete_range(50.0, 150.0).unwrap();
        assert!(is_y_half_isolated(&zs, 0, 10.0, &params()).unwrap().holds);
    }

    #[test]
    fn half_isolated_examples() {
        let p = params();
        let single = gen_line_config(&[(0.5, vec![500.0])]).unwrap();
        let v = is_half_isolated(&single, 0, &p).unwrap();
        assert!(v.holds);
        assert_eq!(v.certifying_y, Some(v.y_range.y_min));
        let ap = gen_vertical_ap_zeros(0.75, 500.0, 0.1, 21).unwrap();
        assert!(!is_half_isolated(&ap, 10, &p).unwrap().holds);
        assert!(is_half_isolated(&ap, 0, &p).unwrap().holds);
        let mut bad = p.clone();
        bad.y_range = Some((100.0, 10.0));
        assert!(matches!(
            is_half_isolated(&single, 0, &bad),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn nearby_search_examples() {
        let p = params();
        let zs = gen_line_config(&[(0.5, vec![300.0])]).unwrap();
        let d = cluster_decompose(&zs, &p).unwrap();
        match find_half_isolated_near_cluster(&zs, &d.clusters[0], &p).unwrap() {
            NearbySearch::Found { index, path, .. } => {
                assert_eq!(index, 0);
                assert_eq!(path, vec![0]);
            }
            other => panic!("{other:?}"),
        }
        let zs = gen_line_config(&[(0.5, vec![300.0]), (0.7, vec![305.0])]).unwrap();
        let d = cluster_decompose(&zs, &p).unwrap();
        let cl = d.clusters.iter().find(|c| c.line_beta == 0.5).unwrap();
        match find_half_isolated_near_cluster(&zs, cl, &p).unwrap() {
            NearbySearch::Found {
                index,
                path,
                within_bound,
                ..
            } => {
                assert_eq!(
                    zs.zeros()[index],
                    Zero {
                        beta: 0.7,
                        gamma: 305.0
                    }
                );
                assert_eq!(path.len(), 2);
                assert!(within_bound);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nearby_result_is_half_isolated_under_hypothesis_f() {
        let zs = gen_line_config(&[
            (0.5, vec![300.0, 301.0, 302.5]),
            (0.6, vec![303.0, 303.4]),
            (0.8, vec![310.0, 340.0]),
        ])
        .unwrap();
        let c_f = zs.c_f().unwrap();
        let base = params();
        let y_min = base.y_range_for(300.0).y_min;
        let p = base.with_hypothesis_f_gaps(c_f, y_min).unwrap();
        let d = cluster_decompose(&zs, &p).unwrap();
        for cl in &d.clusters {
            if let NearbySearch::Found { index, .. } =
                find_half_isolated_near_cluster(&zs, cl, &p).unwrap()
            {
                for &y in &[y_min, 2.0 * y_min, base.t.sqrt()] {
                    assert!(is_y_half_isolated(&zs, index, y, &p).unwrap().holds);
                }
            } else {
                panic!("exhausted");
            }
        }
    }
}
