//! Bimatrix games, best-response oracles and the search for well-supported equilibria.
//!
//! Mixed strategies are in reduced coordinates: `u ∈ Δ^{d-1}` stands for
//! `u' = (1 - Σu, u_1, ..., u_{d-1})`.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cdgbs::{cd_gbs_adversarial, GbsConfig};
use crate::crgbs::{cr_gbs, CrConfig};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{in_simplex, Norm, Point, ETA};
use crate::labelling::EmpiricalLabelling;
use crate::partition::{make_oracle, LabelSource, MembershipOracle, Oracle, OracleKind, Policy, Uepp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Row,
    Column,
}

/// Payoff matrices with a counter of every audited payoff read.
#[derive(Debug, Serialize, Deserialize)]
#[serde(try_from = "GameJson", into = "GameJson")]
pub struct BimatrixGame {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    reads: Arc<AtomicU64>,
}

#[derive(Serialize, Deserialize)]
struct GameJson {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
}

impl TryFrom<GameJson> for BimatrixGame {
    type Error = Error;
    fn try_from(g: GameJson) -> Result<Self> {
        BimatrixGame::new(g.a, g.b)
    }
}

impl From<BimatrixGame> for GameJson {
    fn from(g: BimatrixGame) -> Self {
        GameJson { a: g.a, b: g.b }
    }
}

impl Clone for BimatrixGame {
    /// The clone gets its own read counter.
    fn clone(&self) -> Self {
        BimatrixGame { a: self.a.clone(), b: self.b.clone(), reads: Arc::default() }
    }
}

impl BimatrixGame {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> Result<Self> {
        let m = a.len();
        let n = a.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput("games need at least one row and one column".into()));
        }
        if b.len() != m || a.iter().chain(&b).any(|r| r.len() != n) {
            return Err(Error::InvalidInput("A and B must both be m × n".into()));
        }
        if a.iter().chain(&b).flatten().any(|v| !(-ETA..=1.0 + ETA).contains(v)) {
            return Err(Error::InvalidInput("payoffs must lie in [0, 1]".into()));
        }
        Ok(BimatrixGame { a, b, reads: Arc::default() })
    }

    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.a[0].len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        self.reads.fetch_add(1, Ordering::Relaxed);
        &self.a
    }

    pub fn b(&self) -> &[Vec<f64>] {
        self.reads.fetch_add(1, Ordering::Relaxed);
        &self.b
    }

    /// Audited payoff reads so far.
    pub fn payoff_reads(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GameJson { a: self.a.clone(), b: self.b.clone() }).expect("plain data")
    }
}

/// `(1 - Σu, u_1, ..., u_{d-1})`.
pub fn full(u: &[f64]) -> Point {
    std::iter::once(1.0 - u.iter().sum::<f64>()).chain(u.iter().copied()).collect()
}

fn check_mix(d: usize, u: &[f64]) -> Result<()> {
    check_dim(d - 1, u.len())?;
    if !in_simplex(u, ETA) {
        return Err(Error::OutsideSimplex(u.to_vec()));
    }
    Ok(())
}

/// `(U_r, U_c) = (u'ᵀ A v', u'ᵀ B v')`.
pub fn utilities(g: &BimatrixGame, u: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    check_mix(g.rows(), u)?;
    check_mix(g.cols(), v)?;
    let (uf, vf) = (full(u), full(v));
    let form = |mat: &[Vec<f64>]| -> f64 {
        uf.iter().zip(mat).map(|(ui, row)| ui * row.iter().zip(&vf).map(|(p, q)| p * q).sum::<f64>()).sum()
    };
    Ok((form(g.a()), form(g.b())))
}

/// Utility of each pure strategy of `side` against the opponent's mix.
pub fn pure_utilities(g: &BimatrixGame, side: Side, opponent: &[f64]) -> Result<Vec<f64>> {
    match side {
        Side::Row => {
            check_mix(g.cols(), opponent)?;
            let vf = full(opponent);
            Ok(g.a().iter().map(|row| row.iter().zip(&vf).map(|(p, q)| p * q).sum()).collect())
        }
        Side::Column => {
            check_mix(g.rows(), opponent)?;
            let uf = full(opponent);
            let b = g.b();
            Ok((0..g.cols()).map(|j| (0..g.rows()).map(|i| uf[i] * b[i][j]).sum()).collect())
        }
    }
}

pub fn best_value(g: &BimatrixGame, side: Side, opponent: &[f64]) -> Result<f64> {
    Ok(pure_utilities(g, side, opponent)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Best responses of `side` as a UEPP over the opponent's simplex. Built by the oracle
/// owner, so payoff reads here are not audited.
pub fn br_partition(g: &BimatrixGame, side: Side) -> Uepp {
    let (mat, labels, d): (Vec<Vec<f64>>, usize, usize) = match side {
        Side::Row => (g.a.clone(), g.rows(), g.cols()),
        Side::Column => ((0..g.cols()).map(|j| g.b.iter().map(|r| r[j]).collect()).collect(), g.cols(), g.rows()),
    };
    let a = (0..labels).map(|i| (1..d).map(|j| mat[i][j] - mat[i][0]).collect()).collect();
    let b = (0..labels).map(|i| mat[i][0]).collect();
    Uepp::new(d - 1, a, b).expect("shapes checked by the game")
}

/// Best-response oracle of `side` over the opponent's mixed strategies.
pub fn br_oracle(g: &BimatrixGame, side: Side, kind: OracleKind, seed: u64) -> Oracle {
    let src: Arc<dyn LabelSource> = Arc::new(br_partition(g, side));
    make_oracle(src, kind, seed)
}

/// Uniform payoffs in `[0, 1]`.
pub fn random_game(m: usize, n: usize, seed: u64) -> Result<BimatrixGame> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut mat = || (0..m).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
    let a = mat();
    BimatrixGame::new(a, mat())
}

/// `G_{x,y}` with `x, y` drawn uniformly from `(0.01, 0.99)`.
pub fn random_lower_bound_game(seed: u64) -> Result<BimatrixGame> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let x = rng.random_range(0.01..0.99);
    lower_bound_game(x, rng.random_range(0.01..0.99))
}

/// `G_{x,y}`: `A = (x x; 0 1)`, `B = (0 y; 1 y)`. Its only equilibrium is `(y, x)`.
pub fn lower_bound_game(x: f64, y: f64) -> Result<BimatrixGame> {
    if !(0.0 < x && x < 1.0 && 0.0 < y && y < 1.0) {
        return Err(Error::InvalidInput(format!("need x, y in (0, 1), got {x}, {y}")));
    }
    BimatrixGame::new(vec![vec![x, x], vec![0.0, 1.0]], vec![vec![0.0, y], vec![1.0, y]])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub eps: f64,
    pub seed: u64,
    /// Grid halvings allowed past spacing `eps / 8`.
    pub extra_refinements: u32,
    /// Largest number of grid points per simplex.
    pub grid_cap: u64,
}

impl SolveConfig {
    pub fn new(eps: f64) -> Self {
        SolveConfig { eps, seed: 0, extra_refinements: 3, grid_cap: 2_000_000 }
    }
}

/// Output of the oracle-only solver; it carries no payoff information.
#[derive(Clone, Debug, Serialize)]
pub struct WsneSolution {
    pub u: Point,
    pub v: Point,
    /// Supports in full coordinates.
    pub row_support: Vec<usize>,
    pub col_support: Vec<usize>,
    pub row_queries: u64,
    pub col_queries: u64,
    /// Grid spacing at which the profile was accepted.
    pub resolution: f64,
    pub sigma_row: f64,
    pub sigma_col: f64,
    #[serde(skip)]
    pub row_labelling: EmpiricalLabelling,
    #[serde(skip)]
    pub col_labelling: EmpiricalLabelling,
}

/// Regrets of the supported pure strategies, by full index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WsneCertificate {
    pub u: Point,
    pub v: Point,
    pub eps: f64,
    pub row_support: Vec<usize>,
    pub col_support: Vec<usize>,
    pub row_regrets: Vec<(usize, f64)>,
    pub col_regrets: Vec<(usize, f64)>,
    pub valid: bool,
}

impl WsneCertificate {
    pub fn max_regret(&self) -> f64 {
        self.row_regrets.iter().chain(&self.col_regrets).map(|r| r.1).fold(0.0, f64::max)
    }
}

/// Support of a reduced mix in full coordinates, ignoring masses at or below `θ = 1e-9`.
pub fn support(u: &[f64]) -> Vec<usize> {
    full(u).iter().enumerate().filter(|(_, p)| **p > ETA).map(|(i, _)| i).collect()
}

pub fn verify_wsne(g: &BimatrixGame, u: &[f64], v: &[f64], eps: f64) -> Result<WsneCertificate> {
    check_mix(g.rows(), u)?;
    check_mix(g.cols(), v)?;
    let regrets = |side: Side, own: &[f64], opp: &[f64]| -> Result<Vec<(usize, f64)>> {
        let pu = pure_utilities(g, side, opp)?;
        let best = pu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(support(own).into_iter().map(|i| (i, best - pu[i])).collect())
    };
    let row_regrets = regrets(Side::Row, u, v)?;
    let col_regrets = regrets(Side::Column, v, u)?;
    let valid = row_regrets.iter().chain(&col_regrets).all(|r| r.1 <= eps + ETA);
    Ok(WsneCertificate {
        u: u.to_vec(),
        v: v.to_vec(),
        eps,
        row_support: support(u),
        col_support: support(v),
        row_regrets,
        col_regrets,
        valid,
    })
}

/// `max(√(d-1), 1)`, the ℓ2 Lipschitz constant of utilities over `Δ^{d-1}`.
pub fn lipschitz(d: usize) -> f64 {
    ((d as f64) - 1.0).sqrt().max(1.0)
}

/// Learns an adversarially labelled best-response partition at accuracy `delta`.
/// Single-label partitions need no queries.
fn learn_side(oracle: &mut Oracle, delta: f64, seed: u64, use_cr: bool) -> Result<EmpiricalLabelling> {
    let (m, n) = (oracle.dim(), oracle.label_count());
    if n == 1 {
        let mut lab = EmpiricalLabelling::new(m, 1);
        let corners = crate::geometry::simplex_vertices(m);
        lab.extend(corners.into_iter().map(|p| (p, 0)))?;
        return Ok(lab);
    }
    if use_cr {
        Ok(cr_gbs(&CrConfig::new(m, n, delta).adversarial(true).seed(seed), oracle)?.labelling)
    } else {
        Ok(cd_gbs_adversarial(&GbsConfig::new(m, n, delta).seed(seed), oracle)?.labelling)
    }
}

/// Calls `f` on the integer compositions `c` of `steps` into `d + 1` parts, where `c[1..] / steps`
/// is the reduced grid point. Stops early once `f` returns true.
fn for_each_grid(d: usize, steps: u64, f: &mut dyn FnMut(&[u64]) -> bool) -> bool {
    fn rec(i: usize, left: u64, comp: &mut Vec<u64>, f: &mut dyn FnMut(&[u64]) -> bool) -> bool {
        if i + 1 == comp.len() {
            comp[i] = left;
            return f(comp);
        }
        for c in 0..=left {
            comp[i] = c;
            if rec(i + 1, left - c, comp, f) {
                return true;
            }
        }
        false
    }
    rec(0, steps, &mut vec![0u64; d + 1], f)
}

fn grid_point(comp: &[u64], steps: u64) -> (Point, u64) {
    let p = comp[1..].iter().map(|&c| c as f64 / steps as f64).collect();
    let s = (0..comp.len()).filter(|&k| comp[k] > 0).fold(0, |b, k| b | 1 << k);
    (p, s)
}

/// Grid points of `Δ^d` with spacing `1/steps` in reduced coordinates, with their full supports.
pub fn simplex_grid(d: usize, steps: u64) -> Vec<(Point, Vec<usize>)> {
    let mut out = Vec::new();
    for_each_grid(d, steps, &mut |comp| {
        let p = comp[1..].iter().map(|&c| c as f64 / steps as f64).collect();
        out.push((p, (0..comp.len()).filter(|&k| comp[k] > 0).collect()));
        false
    });
    out
}

pub fn simplex_grid_size(d: usize, steps: u64) -> u64 {
    crate::geometry::binomial(steps + d as u64, d as u64)
}

fn bits(labels: &[usize]) -> u64 {
    labels.iter().fold(0, |b, &l| b | 1 << l)
}

/// `(support mask, Voronoi mask) → representative point`, grown level by level.
type Classes = BTreeMap<(u64, u64), Point>;

/// One side of the search: a labelling over `Δ^d` and the classes met so far.
struct GridSide<'a> {
    lab: &'a EmpiricalLabelling,
    d: usize,
    sigma: f64,
    classes: Classes,
}

impl GridSide<'_> {
    /// Visits the points of the `steps` grid that the `prev` grid lacks; `on_new` sees each new
    /// class and may stop the walk.
    fn walk(
        &mut self,
        steps: u64,
        prev: Option<u64>,
        on_new: &mut dyn FnMut(&(u64, u64), &Point) -> bool,
    ) -> Result<bool> {
        let mut err = None;
        let (lab, sigma, classes) = (self.lab, self.sigma, &mut self.classes);
        let stopped = for_each_grid(self.d, steps, &mut |comp| {
            if prev.is_some_and(|q| comp.iter().all(|&c| (c * q) % steps == 0)) {
                return false;
            }
            let (p, s) = grid_point(comp, steps);
            let vor = match lab.voronoi_labels(&p, Norm::L2, sigma) {
                Ok(v) => bits(&v),
                Err(e) => {
                    err = Some(e);
                    return true;
                }
            };
            let key = (s, vor);
            if classes.contains_key(&key) {
                return false;
            }
            let stop = on_new(&key, &p);
            classes.insert(key, p);
            stop
        });
        match err {
            Some(e) => Err(e),
            None => Ok(stopped),
        }
    }
}

/// `supp(u) ⊆ V_R(v)` and `supp(v) ⊆ V_C(u)`.
fn compatible(u: &(u64, u64), v: &(u64, u64)) -> bool {
    u.0 & !v.1 == 0 && v.0 & !u.1 == 0
}

/// Finds a profile whose supports sit inside the slack Voronoi best-response sets of labellings
/// learned through the two oracles. `row_oracle` answers row best responses over column mixes.
pub fn solve_wsne(row_oracle: &mut Oracle, col_oracle: &mut Oracle, cfg: &SolveConfig) -> Result<WsneSolution> {
    if !(cfg.eps > 0.0) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let (m, n) = (row_oracle.label_count(), col_oracle.label_count());
    if row_oracle.dim() + 1 != n || col_oracle.dim() + 1 != m || m > 63 || n > 63 {
        return Err(Error::InvalidInput("oracle shapes do not form a game".into()));
    }
    let eps_c = cfg.eps / (2.0 * lipschitz(m));
    let eps_r = cfg.eps / (2.0 * lipschitz(n));
    let (r0, c0) = (row_oracle.queries(), col_oracle.queries());
    let col_lab = learn_side(col_oracle, eps_c / 2.0, cfg.seed, true)?;
    let row_lab = learn_side(row_oracle, eps_r / 2.0, cfg.seed ^ 1, false)?;
    let sigma_col = (cfg.eps / 8.0).min(eps_c / 2.0);
    let sigma_row = (cfg.eps / 8.0).min(eps_r / 2.0);
    let base = (8.0 / cfg.eps).ceil() as u64;
    // coarse grids first; acceptance is sound at any resolution
    let mut schedule: Vec<u64> = (0..3).rev().map(|h| (base >> h).max(1)).collect();
    schedule.extend((1..=cfg.extra_refinements).map(|h| base << h));
    schedule.dedup();
    let mut us = GridSide { lab: &col_lab, d: m - 1, sigma: sigma_col, classes: Classes::new() };
    let mut vs = GridSide { lab: &row_lab, d: n - 1, sigma: sigma_row, classes: Classes::new() };
    let mut prev = None;
    let mut found: Option<(Point, Point, u64)> = None;
    for steps in schedule {
        if simplex_grid_size(m - 1, steps) > cfg.grid_cap || simplex_grid_size(n - 1, steps) > cfg.grid_cap {
            break;
        }
        // tabulate the smaller grid, then stream the larger one against it
        let u_small = simplex_grid_size(m - 1, steps) <= simplex_grid_size(n - 1, steps);
        let (small, large) = if u_small { (&mut us, &mut vs) } else { (&mut vs, &mut us) };
        let pair = |a: &Point, b: &Point| if u_small { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        let fits = |a: &(u64, u64), b: &(u64, u64)| if u_small { compatible(a, b) } else { compatible(b, a) };
        let mut hit = None;
        let others = &large.classes;
        small.walk(steps, prev, &mut |k, p| {
            hit = others.iter().find(|(lk, _)| fits(k, lk)).map(|(_, q)| pair(p, q));
            hit.is_some()
        })?;
        if hit.is_none() {
            let tab = &small.classes;
            large.walk(steps, prev, &mut |k, p| {
                hit = tab.iter().find(|(sk, _)| fits(sk, k)).map(|(_, q)| pair(q, p));
                hit.is_some()
            })?;
        }
        if let Some((u, v)) = hit {
            found = Some((u, v, steps));
            break;
        }
        prev = Some(steps);
    }
    let (u, v, steps) =
        found.ok_or(Error::FixedPointNotFound(cfg.eps / 8.0 / 2f64.powi(cfg.extra_refinements as i32)))?;
    Ok(WsneSolution {
        row_support: support(&u),
        col_support: support(&v),
        u,
        v,
        row_queries: row_oracle.queries() - r0,
        col_queries: col_oracle.queries() - c0,
        resolution: 1.0 / steps as f64,
        sigma_row,
        sigma_col,
        row_labelling: row_lab,
        col_labelling: col_lab,
    })
}

/// Builds both adversarial oracles from the game, then solves through them only.
pub fn solve_game(g: &BimatrixGame, policy: Policy, cfg: &SolveConfig) -> Result<WsneSolution> {
    let mut ro = br_oracle(g, Side::Row, OracleKind::Adversarial(policy), cfg.seed);
    let mut co = br_oracle(g, Side::Column, OracleKind::Adversarial(policy), cfg.seed ^ 0x5eed);
    solve_wsne(&mut ro, &mut co, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_against_uniform() {
        let g = BimatrixGame::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![0.0; 2]; 2]).unwrap();
        assert!((utilities(&g, &[0.5], &[0.5]).unwrap().0 - 0.5).abs() < 1e-12);
        // pure column 1 picks out column 1 of A
        assert_eq!(pure_utilities(&g, Side::Row, &[1.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn rejects_out_of_range_payoffs() {
        assert!(BimatrixGame::new(vec![vec![1.5]], vec![vec![0.0]]).is_err());
        assert!(lower_bound_game(1.0, 0.5).is_err());
    }

    #[test]
    fn tie_handling_by_oracle_kind() {
        let g = lower_bound_game(0.3, 0.6).unwrap();
        let mut strong = br_oracle(&g, Side::Row, OracleKind::Lexicographic, 0);
        assert_eq!(strong.query_set(&[0.3]).unwrap(), vec![0, 1]);
        assert_eq!(strong.query(&[0.3]).unwrap(), 0);
        let mut adv = br_oracle(&g, Side::Row, OracleKind::Adversarial(Policy::MaxIndex), 0);
        assert_eq!(adv.query(&[0.3]).unwrap(), 1);
        assert_eq!(adv.query(&[0.2]).unwrap(), 0);
        assert_eq!(adv.query(&[0.4]).unwrap(), 1);
    }

    #[test]
    fn partition_matches_direct_argmax() {
        let g = random_game(4, 3, 2).unwrap();
        let u = br_partition(&g, Side::Column);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let x = crate::partition::dirichlet_point(3, &mut rng);
            let pu = pure_utilities(&g, Side::Column, &x).unwrap();
            let best = pu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let want: Vec<usize> = (0..3).filter(|&j| pu[j] >= best - 1e-9).collect();
            assert_eq!(u.label_set(&x).unwrap(), want);
        }
    }

    #[test]
    fn grid_counts() {
        assert_eq!(simplex_grid(2, 4).len() as u64, simplex_grid_size(2, 4));
        assert_eq!(simplex_grid_size(2, 4), 15);
        assert!(simplex_grid(0, 5) == vec![(vec![], vec![0])]);
    }

    #[test]
    fn lower_bound_game_solution_is_near_equilibrium() {
        let g = lower_bound_game(0.5, 0.5).unwrap();
        let sol = solve_game(&g, Policy::Seeded, &SolveConfig::new(0.05)).unwrap();
        assert!((sol.u[0] - 0.5).abs() <= 0.05 && (sol.v[0] - 0.5).abs() <= 0.05, "{:?} {:?}", sol.u, sol.v);
        assert!(verify_wsne(&g, &sol.u, &sol.v, 0.05).unwrap().valid);
    }

    #[test]
    fn dominant_pair_is_found() {
        let g = BimatrixGame::new(vec![vec![0.9, 0.8], vec![0.1, 0.2]], vec![vec![0.2, 0.7], vec![0.1, 0.6]]).unwrap();
        let sol = solve_game(&g, Policy::Seeded, &SolveConfig::new(0.1)).unwrap();
        assert_eq!((sol.row_support.clone(), sol.col_support.clone()), (vec![0], vec![1]));
        assert_eq!(verify_wsne(&g, &sol.u, &sol.v, 0.0).unwrap().max_regret(), 0.0);
    }

    #[test]
    fn solver_reads_no_payoffs() {
        let g = random_game(3, 3, 5).unwrap();
        let mut ro = br_oracle(&g, Side::Row, OracleKind::Adversarial(Policy::Seeded), 0);
        let mut co = br_oracle(&g, Side::Column, OracleKind::Adversarial(Policy::Seeded), 1);
        let before = g.payoff_reads();
        let sol = solve_wsne(&mut ro, &mut co, &SolveConfig::new(0.1)).unwrap();
        assert_eq!(g.payoff_reads(), before);
        assert!(verify_wsne(&g, &sol.u, &sol.v, 0.1).unwrap().valid);
    }

    #[test]
    fn degenerate_sides() {
        let g = BimatrixGame::new(vec![vec![0.3, 0.9]], vec![vec![0.5, 0.1]]).unwrap();
        let sol = solve_game(&g, Policy::MaxIndex, &SolveConfig::new(0.1)).unwrap();
        assert_eq!(sol.row_queries, 0);
        assert_eq!(sol.col_support, vec![0]);
    }
}
