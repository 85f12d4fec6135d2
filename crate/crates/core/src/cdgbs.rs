//! Constant-dimension generalised binary search.
//!
//! The simplex is cut into slabs along the first coordinate. Cross-sections are learned by
//! recursing one dimension down, and a slab is refined only while its two endpoint
//! cross-sections fail to cover it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{binomial, Point};
use crate::labelling::{slab_covered, EmpiricalLabelling};
use crate::partition::{lift_section, MembershipOracle, SectionOracle};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GbsConfig {
    pub m: usize,
    pub n: usize,
    pub eps: f64,
    /// Merge labels on interior conflicts instead of halting.
    pub adversarial: bool,
    pub seed: u64,
    /// Floor for the accuracy requested from recursive calls.
    pub min_eps: f64,
}

impl GbsConfig {
    pub fn new(m: usize, n: usize, eps: f64) -> Self {
        GbsConfig { m, n, eps, adversarial: false, seed: 0, min_eps: 1e-12 }
    }

    pub fn adversarial(mut self, on: bool) -> Self {
        self.adversarial = on;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of dyadic refinement levels, `⌈log2(2/ε)⌉`.
    pub fn levels(&self) -> usize {
        (2.0 / self.eps).log2().ceil().max(0.0) as usize
    }

    pub fn uncovered_cap(&self) -> usize {
        2 * (binomial((self.n + self.m) as u64, self.m as u64) as usize + 2 * self.n)
    }

    /// Accuracy requested from the cross-section at `t`, in the section's own coordinates.
    pub fn sub_eps(&self, t: f64) -> f64 {
        let (m, n) = (self.m as f64, self.n as f64);
        (self.eps * self.eps / (85.0 * (1.0 - t) * n * m.powf(2.5))).max(self.min_eps)
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || self.n == 0 {
            return Err(Error::InvalidInput("need eps > 0 and at least one label".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GbsStats {
    pub queries: u64,
    /// Uncovered slabs found at each level of the outermost run.
    pub uncovered_per_level: Vec<usize>,
    /// Largest uncovered count seen at any level of any recursive run.
    pub max_uncovered: usize,
    /// Halting guards fired anywhere in the recursion.
    pub halts: usize,
    /// Interior conflicts seen on non-adversarial runs; valid lexicographic oracles never cause one.
    pub lex_conflicts: usize,
    pub merges: usize,
    /// Extra cross-sections learned by the fixing loop of the outermost run.
    pub fix_calls: usize,
    pub total_fix_calls: usize,
}

#[derive(Clone, Debug)]
pub struct GbsRun {
    pub labelling: EmpiricalLabelling,
    pub stats: GbsStats,
}

/// `[x - 2^{-level}, x]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DyadicInterval {
    pub level: u32,
    pub x: f64,
}

impl DyadicInterval {
    pub fn bounds(&self) -> (f64, f64) {
        (self.x - 0.5f64.powi(self.level as i32), self.x)
    }
}

/// Learned cross-sections and the labelling built from them.
#[derive(Clone, Debug)]
pub struct GbsState {
    m: usize,
    sections: BTreeMap<u64, Vec<(Point, usize)>>,
    pub labelling: EmpiricalLabelling,
}

impl GbsState {
    pub fn new(m: usize, n: usize) -> Self {
        GbsState { m, sections: BTreeMap::new(), labelling: EmpiricalLabelling::new(m, n) }
    }

    /// Points learned on the cross-section at `t`, tagged with their own labels.
    pub fn section(&self, t: f64) -> Option<&[(Point, usize)]> {
        self.sections.get(&t.to_bits()).map(Vec::as_slice)
    }

    pub fn section_coordinates(&self) -> Vec<f64> {
        self.sections.keys().map(|k| f64::from_bits(*k)).collect()
    }

    fn tagged(&self, t: f64) -> Vec<(Point, usize)> {
        self.section(t).unwrap_or(&[]).iter().map(|(p, l)| (p.clone(), self.labelling.find(*l))).collect()
    }

    pub fn slab_covered(&self, a: f64, b: f64, eps: f64) -> bool {
        slab_covered(self.m, a, b, &self.tagged(a), &self.tagged(b), eps)
    }

    fn learn_section(
        &mut self,
        t: f64,
        cfg: &GbsConfig,
        oracle: &mut dyn MembershipOracle,
        stats: &mut GbsStats,
    ) -> Result<()> {
        if self.sections.contains_key(&t.to_bits()) {
            return Ok(());
        }
        let pts: Vec<(Point, usize)> = if self.m == 1 || t >= 1.0 {
            // Δ^0 section or the apex e_1
            let mut p = vec![0.0; self.m];
            p[0] = t.min(1.0);
            let label = oracle.query(&p)?;
            vec![(p, label)]
        } else {
            let sub =
                GbsConfig { m: self.m - 1, eps: cfg.sub_eps(t), seed: mix(cfg.seed ^ t.to_bits()), ..cfg.clone() };
            let mut so = SectionOracle::new(oracle, t)?;
            let lab = run(&sub, &mut so, stats, false)?;
            (0..cfg.n).flat_map(|l| lab.points(l).iter().map(move |w| (lift_section(t, w), l))).collect()
        };
        self.labelling.extend(pts.iter().cloned())?;
        self.sections.insert(t.to_bits(), pts);
        Ok(())
    }

    fn resolve_conflicts(&mut self, cfg: &GbsConfig, stats: &mut GbsStats) -> Result<bool> {
        let mut found = false;
        while let Some((i, j, _)) = self.labelling.interior_conflict(conflict_depth(cfg.eps)) {
            found = true;
            if !cfg.adversarial {
                stats.lex_conflicts += 1;
                break;
            }
            self.labelling.merge_labels(i, j)?;
            stats.merges += 1;
        }
        Ok(found)
    }
}

/// Overlap depth that counts as a conflict. Boundary points are resolved far finer than this,
/// so the facet rounding of near-coincident pairs stays below it.
pub(crate) fn conflict_depth(eps: f64) -> f64 {
    eps / 32.0
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 33)).wrapping_mul(0xff51_afd7_ed55_8ccd);
    z = (z ^ (z >> 33)).wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    z ^ (z >> 33)
}

/// Point strictly inside `(a, b)` from a golden-ratio sequence offset by the seed.
fn probe(a: f64, b: f64, seed: u64, k: usize) -> f64 {
    let phase = (mix(seed) >> 11) as f64 / (1u64 << 53) as f64;
    let frac = (phase + k as f64 * 0.618_033_988_749_894_9).fract();
    a + (b - a) * (0.25 + 0.5 * frac)
}

/// Learns an ε-close labelling from a lexicographic oracle.
pub fn cd_gbs(cfg: &GbsConfig, oracle: &mut dyn MembershipOracle) -> Result<GbsRun> {
    start(&cfg.clone().adversarial(false), oracle)
}

/// As [`cd_gbs`], merging labels whose hulls overlap in their interiors.
pub fn cd_gbs_adversarial(cfg: &GbsConfig, oracle: &mut dyn MembershipOracle) -> Result<GbsRun> {
    start(&cfg.clone().adversarial(true), oracle)
}

fn start(cfg: &GbsConfig, oracle: &mut dyn MembershipOracle) -> Result<GbsRun> {
    cfg.validate()?;
    if oracle.dim() != cfg.m || oracle.label_count() != cfg.n {
        return Err(Error::InvalidInput("oracle shape does not match the configuration".into()));
    }
    let before = oracle.queries();
    let mut stats = GbsStats::default();
    let labelling = run(cfg, oracle, &mut stats, true)?;
    stats.queries = oracle.queries() - before;
    Ok(GbsRun { labelling, stats })
}

fn run(
    cfg: &GbsConfig,
    oracle: &mut dyn MembershipOracle,
    stats: &mut GbsStats,
    top: bool,
) -> Result<EmpiricalLabelling> {
    if cfg.m == 0 {
        let mut lab = EmpiricalLabelling::new(0, cfg.n);
        let label = oracle.query(&[])?;
        lab.add_query(&[], label)?;
        return Ok(lab);
    }
    let mut st = GbsState::new(cfg.m, cfg.n);
    st.learn_section(0.0, cfg, oracle, stats)?;
    st.learn_section(1.0, cfg, oracle, stats)?;
    let cap = cfg.uncovered_cap();
    let mut active = vec![(0.0, 1.0)];
    for _ in 0..cfg.levels() {
        let uncovered: Vec<(f64, f64)> =
            active.iter().copied().filter(|&(a, b)| !st.slab_covered(a, b, cfg.eps)).collect();
        if top {
            stats.uncovered_per_level.push(uncovered.len());
        }
        stats.max_uncovered = stats.max_uncovered.max(uncovered.len());
        active = uncovered;
        if active.is_empty() {
            break;
        }
        let conflict = st.resolve_conflicts(cfg, stats)?;
        if active.len() > cap || (conflict && !cfg.adversarial) {
            stats.halts += 1;
            break;
        }
        let mut next = Vec::with_capacity(2 * active.len());
        for &(a, b) in &active {
            let mid = 0.5 * (a + b);
            // below float resolution the slab is as thin as it gets
            if mid <= a || mid >= b {
                continue;
            }
            st.learn_section(mid, cfg, oracle, stats)?;
            next.push((a, mid));
            next.push((mid, b));
        }
        active = next;
    }
    let fixes = fix_intervals(&mut st, active, cfg, oracle, stats)?;
    if top {
        stats.fix_calls = fixes;
    }
    if cfg.adversarial {
        st.resolve_conflicts(cfg, stats)?;
    }
    let mut lab = st.labelling;
    lab.compact();
    Ok(lab)
}

/// Splits uncovered slabs at seeded interior points until all are covered.
fn fix_intervals(
    st: &mut GbsState,
    mut pending: Vec<(f64, f64)>,
    cfg: &GbsConfig,
    oracle: &mut dyn MembershipOracle,
    stats: &mut GbsStats,
) -> Result<usize> {
    let cap = cfg.uncovered_cap();
    let mut attempts = 0;
    while let Some((a, b)) = pending.pop() {
        if st.slab_covered(a, b, cfg.eps) {
            continue;
        }
        attempts += 1;
        if attempts > cap {
            return Err(Error::DegenerateNeighborhood);
        }
        let z = probe(a, b, cfg.seed, attempts);
        if z <= a || z >= b {
            continue;
        }
        st.learn_section(z, cfg, oracle, stats)?;
        stats.total_fix_calls += 1;
        if cfg.adversarial {
            st.resolve_conflicts(cfg, stats)?;
        }
        pending.push((a, z));
        pending.push((z, b));
    }
    Ok(attempts)
}

/// Dyadic intervals of level `k` whose slab is not covered by its endpoint cross-sections;
/// missing cross-sections count as empty.
pub fn uncovered_intervals(st: &GbsState, k: u32, eps: f64) -> Vec<DyadicInterval> {
    (1..=1u64 << k)
        .map(|i| DyadicInterval { level: k, x: i as f64 / (1u64 << k) as f64 })
        .filter(|d| {
            let (a, b) = d.bounds();
            !st.slab_covered(a, b, eps)
        })
        .collect()
}

/// Re-learns cross-sections near `x` until every slab meeting `B_{ε/2}(x) ∩ [0, 1]` is covered.
/// Returns the number of recursive calls made.
pub fn fix_uncovered_critical(
    st: &mut GbsState,
    x: f64,
    cfg: &GbsConfig,
    oracle: &mut dyn MembershipOracle,
) -> Result<usize> {
    let (lo, hi) = ((x - cfg.eps / 2.0).max(0.0), (x + cfg.eps / 2.0).min(1.0));
    let mut stats = GbsStats::default();
    let cap = cfg.uncovered_cap();
    let mut attempts = 0;
    loop {
        let mut cuts: Vec<f64> = st.section_coordinates();
        cuts.retain(|&t| t > lo && t < hi);
        let below = st.section_coordinates().into_iter().filter(|&t| t <= lo).last();
        let above = st.section_coordinates().into_iter().find(|&t| t >= hi);
        let mut pts: Vec<f64> = below.into_iter().chain(cuts).chain(above).collect();
        pts.dedup();
        let bad = pts.windows(2).map(|w| (w[0], w[1])).find(|&(a, b)| !st.slab_covered(a, b, cfg.eps));
        let Some((a, b)) = bad else { return Ok(attempts) };
        attempts += 1;
        if attempts > cap {
            return Err(Error::DegenerateNeighborhood);
        }
        let z = probe(a.max(lo), b.min(hi), cfg.seed, attempts);
        st.learn_section(z, cfg, oracle, &mut stats)?;
    }
}

impl GbsState {
    /// Learns the cross-sections at `0` and `1` and at every dyadic point up to `level`.
    pub fn seed_grid(&mut self, level: u32, cfg: &GbsConfig, oracle: &mut dyn MembershipOracle) -> Result<()> {
        let mut stats = GbsStats::default();
        for i in 0..=1u64 << level {
            self.learn_section(i as f64 / (1u64 << level) as f64, cfg, oracle, &mut stats)?;
        }
        Ok(())
    }
}

/// `(∏_{i=1}^m (C(n+i, i) + 2n)) 2^{2m²} log2^m(170 n m^{5/2} / ε)`.
pub fn query_bound(m: usize, n: usize, eps: f64) -> f64 {
    let prod: f64 = (1..=m).map(|i| (binomial((n + i) as u64, i as u64) + 2 * n as u64) as f64).product();
    let log = (170.0 * n as f64 * (m as f64).powf(2.5) / eps).log2();
    prod * 2f64.powi(2 * (m * m) as i32) * log.powi(m as i32)
}

/// `n ⌈log2(2/ε)⌉ + 2n`.
pub fn one_dim_query_bound(n: usize, eps: f64) -> f64 {
    (n * (2.0 / eps).log2().ceil() as usize + 2 * n) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::VPolytope;
    use crate::partition::{make_oracle, random_uepp, LabelSource, OracleKind, Policy, Uepp, UeppOptions};
    use std::sync::Arc;

    fn oracle(u: Uepp, kind: OracleKind) -> crate::partition::Oracle {
        let src: Arc<dyn LabelSource> = Arc::new(u);
        make_oracle(src, kind, 1)
    }

    #[test]
    fn zero_dimensional_run_is_one_query() {
        let u = Uepp::new(0, vec![vec![], vec![]], vec![0.0, 1.0]).unwrap();
        let mut o = oracle(u, OracleKind::Lexicographic);
        let run = cd_gbs(&GbsConfig::new(0, 2, 0.1), &mut o).unwrap();
        assert_eq!(run.stats.queries, 1);
        assert_eq!(run.labelling.points(1).len(), 1);
    }

    #[test]
    fn interval_boundary_is_bracketed() {
        // label 0 on [0, 0.37], label 1 on [0.37, 1]
        let u = Uepp::new(1, vec![vec![-1.0], vec![0.0]], vec![0.0, -0.37]).unwrap();
        let eps = 2f64.powi(-10);
        let mut o = oracle(u, OracleKind::Lexicographic);
        let run = cd_gbs(&GbsConfig::new(1, 2, eps), &mut o).unwrap();
        let left = run.labelling.hull(0).bounding_box().unwrap().1[0];
        let right = run.labelling.hull(1).bounding_box().unwrap().0[0];
        assert!(left <= 0.37 && right >= 0.37 && right - left <= 2.0 * eps);
        assert!(run.stats.queries as f64 <= 2.0 * (2.0 / eps).log2().ceil() + 2.0);
    }

    #[test]
    fn planar_run_is_close() {
        for seed in 0..3 {
            let u = random_uepp(2, 3, seed, UeppOptions::default()).unwrap();
            let mut o = oracle(u, OracleKind::Lexicographic);
            let run = cd_gbs(&GbsConfig::new(2, 3, 0.1), &mut o).unwrap();
            assert!(run.labelling.is_eps_close(&VPolytope::simplex(2), 0.1).is_close);
            assert!((run.stats.queries as f64) <= query_bound(2, 3, 0.1));
            assert_eq!(run.stats.halts, 0);
        }
    }

    #[test]
    fn round_robin_merges_coinciding_cells() {
        let u = random_uepp(2, 4, 3, UeppOptions { duplicate_rows: 1, empty_cells: 0 }).unwrap();
        let mut o = oracle(u, OracleKind::Adversarial(Policy::RoundRobin));
        let run = cd_gbs_adversarial(&GbsConfig::new(2, 4, 0.1), &mut o).unwrap();
        assert_eq!(run.labelling.find(3), run.labelling.find(0));
        assert!(run.labelling.is_eps_close(&VPolytope::simplex(2), 0.1).is_close);
    }

    #[test]
    fn uncovered_intervals_and_fixing() {
        let u = random_uepp(2, 3, 8, UeppOptions::default()).unwrap();
        let cfg = GbsConfig::new(2, 3, 0.1);
        let mut o = oracle(u, OracleKind::Lexicographic);
        let mut st = GbsState::new(2, 3);
        assert_eq!(uncovered_intervals(&st, 1, 0.1).len(), 2);
        st.seed_grid(5, &cfg, &mut o).unwrap();
        assert!(uncovered_intervals(&st, 5, 0.1).is_empty());
        assert_eq!(fix_uncovered_critical(&mut st, 0.5, &cfg, &mut o).unwrap(), 0);
    }
}
