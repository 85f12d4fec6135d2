//! `n`-player `k`-action games learned by querying best responses on an ℓ1 lattice net.
//!
//! A player's strategy is a reduced mix in `Δ^{k-1}`; the view of player `i` is the
//! concatenation of the other players' reduced mixes, in player order.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bimatrix::{full, simplex_grid, support, BimatrixGame};
use crate::error::{Error, Result};
use crate::geometry::{binomial, dist1, in_simplex, Point, ETA};
use crate::partition::{OracleKind, Policy};

/// Net points per player before learning gives up.
pub const NET_CAP: u64 = 1_000_000;
/// Profiles examined per search resolution before giving up.
pub const PROFILE_CAP: u64 = 50_000_000;

#[derive(Debug, Serialize, Deserialize)]
#[serde(try_from = "TensorJson", into = "TensorJson")]
pub struct NormalFormGame {
    n: usize,
    k: usize,
    u: Vec<f64>,
    reads: Arc<AtomicU64>,
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    n: usize,
    k: usize,
    u: Vec<f64>,
}

impl TryFrom<TensorJson> for NormalFormGame {
    type Error = Error;
    fn try_from(t: TensorJson) -> Result<Self> {
        NormalFormGame::new(t.n, t.k, t.u)
    }
}

impl From<NormalFormGame> for TensorJson {
    fn from(g: NormalFormGame) -> Self {
        TensorJson { n: g.n, k: g.k, u: g.u }
    }
}

impl Clone for NormalFormGame {
    fn clone(&self) -> Self {
        NormalFormGame { n: self.n, k: self.k, u: self.u.clone(), reads: Arc::default() }
    }
}

impl NormalFormGame {
    /// `u` is flat row-major by `(player, a_0, ..., a_{n-1})`.
    pub fn new(n: usize, k: usize, u: Vec<f64>) -> Result<Self> {
        if n < 2 || k < 1 {
            return Err(Error::InvalidInput("need at least two players and one action".into()));
        }
        let want = n * k.checked_pow(n as u32).ok_or_else(|| Error::InvalidInput("tensor too large".into()))?;
        if u.len() != want {
            return Err(Error::DimensionMismatch { expected: want, got: u.len() });
        }
        if u.iter().any(|v| !(-ETA..=1.0 + ETA).contains(v)) {
            return Err(Error::InvalidInput("utilities must lie in [0, 1]".into()));
        }
        Ok(NormalFormGame { n, k, u, reads: Arc::default() })
    }

    pub fn from_fn(n: usize, k: usize, f: impl Fn(usize, &[usize]) -> f64) -> Result<Self> {
        let profiles = k.pow(n as u32);
        let mut u = Vec::with_capacity(n * profiles);
        for i in 0..n {
            for p in 0..profiles {
                u.push(f(i, &decode(p, n, k)));
            }
        }
        NormalFormGame::new(n, k, u)
    }

    pub fn from_bimatrix(g: &BimatrixGame) -> Result<Self> {
        if g.rows() != g.cols() {
            return Err(Error::InvalidInput("tensor games need equal action counts".into()));
        }
        let (a, b) = (g.a(), g.b());
        NormalFormGame::from_fn(2, g.rows(), |i, p| if i == 0 { a[p[0]][p[1]] } else { b[p[0]][p[1]] })
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn actions(&self) -> usize {
        self.k
    }

    /// Audited read of `U_i(a)`.
    pub fn utility(&self, i: usize, profile: &[usize]) -> f64 {
        self.reads.fetch_add(1, Ordering::Relaxed);
        self.u[self.index(i, profile)]
    }

    pub fn payoff_reads(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }

    fn index(&self, i: usize, profile: &[usize]) -> usize {
        profile.iter().fold(i, |acc, &a| acc * self.k + a)
    }

    /// The utility table of player `i` as seen by an oracle; not audited.
    fn table(&self, i: usize) -> Vec<f64> {
        let p = self.k.pow(self.n as u32);
        self.u[i * p..(i + 1) * p].to_vec()
    }
}

fn decode(mut p: usize, n: usize, k: usize) -> Vec<usize> {
    let mut a = vec![0; n];
    for slot in a.iter_mut().rev() {
        *slot = p % k;
        p /= k;
    }
    a
}

/// Splits a view of the others into per-player reduced mixes.
fn split(view: &[f64], n: usize, k: usize) -> Result<Vec<&[f64]>> {
    let d = k - 1;
    if view.len() != (n - 1) * d {
        return Err(Error::DimensionMismatch { expected: (n - 1) * d, got: view.len() });
    }
    let parts: Vec<&[f64]> = if d == 0 { vec![&[][..]; n - 1] } else { view.chunks(d).collect() };
    if let Some(bad) = parts.iter().find(|p| !in_simplex(p, ETA)) {
        return Err(Error::OutsideSimplex(bad.to_vec()));
    }
    Ok(parts)
}

/// `U_i^r` for every `r` from a utility table and the others' mixes.
fn pure_values(table: &[f64], n: usize, k: usize, i: usize, others: &[&[f64]]) -> Vec<f64> {
    let fulls: Vec<Point> = others.iter().map(|x| full(x)).collect();
    let mut out = vec![0.0; k];
    for p in 0..k.pow(n as u32) {
        let a = decode(p, n, k);
        let mut w = 1.0;
        let mut slot = 0;
        for (j, &aj) in a.iter().enumerate() {
            if j != i {
                w *= fulls[slot][aj];
                slot += 1;
            }
        }
        if w != 0.0 {
            out[a[i]] += w * table[p];
        }
    }
    out
}

/// `U_i^r(x_{-i})`, the expected utility of pure `r` against the others' mixes.
pub fn expected_utility(g: &NormalFormGame, i: usize, r: usize, x_minus_i: &[f64]) -> Result<f64> {
    pure_utilities(g, i, x_minus_i)?
        .get(r)
        .copied()
        .ok_or_else(|| Error::InvalidInput(format!("action {r} out of range")))
}

pub fn pure_utilities(g: &NormalFormGame, i: usize, x_minus_i: &[f64]) -> Result<Vec<f64>> {
    if i >= g.n {
        return Err(Error::InvalidInput(format!("player {i} out of range")));
    }
    let others = split(x_minus_i, g.n, g.k)?;
    g.reads.fetch_add(1, Ordering::Relaxed);
    Ok(pure_values(&g.table(i), g.n, g.k, i, &others))
}

/// `E_i(x_{-i}) = max_r U_i^r(x_{-i})`.
pub fn best_value(g: &NormalFormGame, i: usize, x_minus_i: &[f64]) -> Result<f64> {
    Ok(pure_utilities(g, i, x_minus_i)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// The view of player `i`: every other player's reduced mix, concatenated.
pub fn others(profile: &[Point], i: usize) -> Point {
    profile.iter().enumerate().filter(|(j, _)| *j != i).flat_map(|(_, x)| x.iter().copied()).collect()
}

/// Best-response oracle of one player over the others' mixes.
#[derive(Clone, Debug)]
pub struct MultiBrOracle {
    n: usize,
    k: usize,
    player: usize,
    table: Vec<f64>,
    kind: OracleKind,
    seed: u64,
    turn: u64,
    count: u64,
    budget: Option<u64>,
    answered: Vec<Vec<Point>>,
}

pub fn multi_br_oracle(g: &NormalFormGame, player: usize, kind: OracleKind, seed: u64) -> Result<MultiBrOracle> {
    if player >= g.n {
        return Err(Error::InvalidInput(format!("player {player} out of range")));
    }
    Ok(MultiBrOracle {
        n: g.n,
        k: g.k,
        player,
        table: g.table(player),
        kind,
        seed,
        turn: 0,
        count: 0,
        budget: None,
        answered: vec![Vec::new(); g.k],
    })
}

impl MultiBrOracle {
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn actions(&self) -> usize {
        self.k
    }

    pub fn queries(&self) -> u64 {
        self.count
    }

    fn charge(&mut self) -> Result<()> {
        if self.budget.is_some_and(|b| self.count >= b) {
            return Err(Error::BudgetExhausted);
        }
        self.count += 1;
        Ok(())
    }

    fn ties(&self, view: &[f64]) -> Result<Vec<usize>> {
        let others = split(view, self.n, self.k)?;
        let v = pure_values(&self.table, self.n, self.k, self.player, &others);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((0..self.k).filter(|&r| v[r] >= max - ETA).collect())
    }

    /// Strong query: every best response.
    pub fn query_set(&mut self, view: &[f64]) -> Result<Vec<usize>> {
        self.charge()?;
        self.ties(view)
    }

    pub fn query(&mut self, view: &[f64]) -> Result<usize> {
        self.charge()?;
        let ties = self.ties(view)?;
        let pick = if ties.len() == 1 {
            ties[0]
        } else {
            match self.kind {
                OracleKind::Lexicographic => ties[0],
                OracleKind::Adversarial(Policy::MaxIndex) => ties[ties.len() - 1],
                OracleKind::Adversarial(Policy::RoundRobin) => {
                    self.turn += 1;
                    ties[(self.turn as usize - 1) % ties.len()]
                }
                OracleKind::Adversarial(Policy::Seeded) => {
                    let h = ties.iter().fold(self.seed ^ 0x9e37_79b9, |h, &l| {
                        (h ^ l as u64).wrapping_mul(0x0100_0000_01b3).rotate_left(17)
                    });
                    ties[(h % ties.len() as u64) as usize]
                }
                OracleKind::Adversarial(Policy::AntiLearner) => {
                    let d = |r: usize| self.answered[r].iter().map(|p| dist1(p, view)).fold(f64::INFINITY, f64::min);
                    *ties.iter().min_by(|&&p, &&q| d(p).total_cmp(&d(q))).expect("non-empty tie set")
                }
            }
        };
        if self.kind == OracleKind::Adversarial(Policy::AntiLearner) {
            self.answered[pick].push(view.to_vec());
        }
        Ok(pick)
    }
}

/// The lattice `((2ε'/d)Z)^d ∩ Δ^d` with `ε' = eps/(n-1)` and `d = k-1`, for each of the
/// `n - 1` other players. The spacing is rounded down to `1/κ` with `κ = ⌈d/(2ε')⌉`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetSpec {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub eps_prime: f64,
    pub kappa: u64,
    pub spacing: f64,
    pub simplex_points: Vec<Point>,
    /// `|M|^{n-1}`.
    pub size: u64,
}

impl NetSpec {
    /// Every point of the product lattice, as views of one player.
    pub fn points(&self) -> Vec<Point> {
        let mut out: Vec<Point> = vec![Vec::new()];
        for _ in 1..self.n {
            out = out
                .iter()
                .flat_map(|pre| self.simplex_points.iter().map(move |q| pre.iter().chain(q).copied().collect()))
                .collect();
        }
        out
    }
}

pub fn build_net(n: usize, k: usize, eps: f64) -> Result<NetSpec> {
    if n < 2 || k < 2 || !(eps > 0.0) {
        return Err(Error::InvalidInput("nets need n ≥ 2, k ≥ 2 and eps > 0".into()));
    }
    let d = k - 1;
    let eps_prime = eps / (n - 1) as f64;
    let kappa = (d as f64 / (2.0 * eps_prime) - 1e-12).ceil().max(1.0) as u64;
    let single = binomial(kappa + d as u64, d as u64);
    let size = single.checked_pow((n - 1) as u32).filter(|&s| s <= NET_CAP);
    let Some(size) = size else {
        return Err(Error::CapExceeded(format!("net of {single}^{} points", n - 1)));
    };
    let simplex_points = simplex_grid(d, kappa).into_iter().map(|p| p.0).collect();
    Ok(NetSpec { n, k, eps, eps_prime, kappa, spacing: 1.0 / kappa as f64, simplex_points, size })
}

/// Queried points of each action of one player; distances are ℓ1 to the nearest stored point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiLabelling {
    pub player: usize,
    pub points: Vec<Vec<Point>>,
}

impl MultiLabelling {
    pub fn distance(&self, r: usize, view: &[f64]) -> f64 {
        self.points[r].iter().map(|p| dist1(p, view)).fold(f64::INFINITY, f64::min)
    }

    /// Actions within `sigma` of the nearest one.
    pub fn voronoi_labels(&self, view: &[f64], sigma: f64) -> Vec<usize> {
        let d: Vec<f64> = (0..self.points.len()).map(|r| self.distance(r, view)).collect();
        let min = d.iter().copied().fold(f64::INFINITY, f64::min);
        (0..d.len()).filter(|&r| d[r] <= min + sigma + ETA).collect()
    }
}

/// Net accuracy used for learning: `eps/4`, leaving `eps/4` of Voronoi slack.
pub fn learning_net_eps(eps: f64) -> f64 {
    eps / 4.0
}

/// Queries each player's oracle at every point of the `eps/4` net of its view.
pub fn learn_multiplayer_labellings(oracles: &mut [MultiBrOracle], eps: f64) -> Result<Vec<MultiLabelling>> {
    let n = oracles.len();
    let k = oracles.first().map_or(0, |o| o.k);
    if oracles.iter().enumerate().any(|(i, o)| o.n != n || o.k != k || o.player != i) {
        return Err(Error::InvalidInput("need one oracle per player, in order".into()));
    }
    if k == 1 {
        return Ok((0..n).map(|player| MultiLabelling { player, points: vec![vec![Vec::new()]] }).collect());
    }
    let net = build_net(n, k, learning_net_eps(eps))?;
    let pts = net.points();
    let mut out = Vec::with_capacity(n);
    for o in oracles.iter_mut() {
        let mut points = vec![Vec::new(); k];
        for p in &pts {
            let r = o.query(p)?;
            points[r].push(p.clone());
        }
        out.push(MultiLabelling { player: o.player, points });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiCertificate {
    pub profile: Vec<Point>,
    pub eps: f64,
    pub supports: Vec<Vec<usize>>,
    /// Regret of each supported action, per player.
    pub regrets: Vec<Vec<(usize, f64)>>,
    pub valid: bool,
}

impl MultiCertificate {
    pub fn max_regret(&self) -> f64 {
        self.regrets.iter().flatten().map(|r| r.1).fold(0.0, f64::max)
    }
}

pub fn verify_wsne_multiplayer(g: &NormalFormGame, x: &[Point], eps: f64) -> Result<MultiCertificate> {
    if x.len() != g.n {
        return Err(Error::DimensionMismatch { expected: g.n, got: x.len() });
    }
    let mut regrets = Vec::with_capacity(g.n);
    for i in 0..g.n {
        if x[i].len() != g.k - 1 || !in_simplex(&x[i], ETA) {
            return Err(Error::OutsideSimplex(x[i].clone()));
        }
        let pu = pure_utilities(g, i, &others(x, i))?;
        let best = pu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        regrets.push(support(&x[i]).into_iter().map(|r| (r, best - pu[r])).collect::<Vec<_>>());
    }
    let valid = regrets.iter().flatten().all(|r: &(usize, f64)| r.1 <= eps + ETA);
    Ok(MultiCertificate { profile: x.to_vec(), eps, supports: x.iter().map(|p| support(p)).collect(), regrets, valid })
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiSolution {
    pub profile: Vec<Point>,
    pub supports: Vec<Vec<usize>>,
    pub resolution: f64,
    pub sigma: f64,
}

/// Grid search over `Δ(A)` for a profile whose supports lie in the slack-`eps/4` Voronoi sets of
/// the labellings. Grids go from coarse to the first resolution whose per-player rounding
/// is within `eps/(8(n-1))`, then halve up to `extra_refinements` more times.
pub fn solve_wsne_multiplayer(labs: &[MultiLabelling], eps: f64, extra_refinements: u32) -> Result<MultiSolution> {
    let n = labs.len();
    let k = labs.first().map_or(0, |l| l.points.len());
    if n < 2 || k == 0 || labs.iter().any(|l| l.points.len() != k) {
        return Err(Error::InvalidInput("labellings do not form a game".into()));
    }
    let sigma = eps / 4.0;
    let d = k - 1;
    // rounding to spacing h moves each player by at most h·d/2 in ℓ1
    let target = eps / (8.0 * (n - 1) as f64);
    let fine = ((d as f64) / (2.0 * target)).ceil().max(1.0) as u64;
    let mut schedule: Vec<u64> = (0..3).rev().map(|h| (fine >> h).max(1)).collect();
    schedule.extend((1..=extra_refinements).map(|h| fine << h));
    schedule.dedup();
    for steps in schedule {
        let grid = simplex_grid(d, steps);
        let g = grid.len() as u64;
        if g.checked_pow(n as u32).is_none_or(|t| t > PROFILE_CAP) {
            break;
        }
        if let Some(p) = search(labs, &grid, sigma)? {
            let profile: Vec<Point> = p.iter().map(|&ix| grid[ix].0.clone()).collect();
            return Ok(MultiSolution {
                supports: profile.iter().map(|x| support(x)).collect(),
                profile,
                resolution: 1.0 / steps as f64,
                sigma,
            });
        }
    }
    Err(Error::FixedPointNotFound(target))
}

fn search(labs: &[MultiLabelling], grid: &[(Point, Vec<usize>)], sigma: f64) -> Result<Option<Vec<usize>>> {
    let n = labs.len();
    let g = grid.len();
    let masks: Vec<u64> = grid.iter().map(|(_, s)| s.iter().fold(0, |b, &r| b | 1 << r)).collect();
    // Voronoi mask of player i at each grid tuple of the others, indexed in player order
    let others_count = g.pow((n - 1) as u32);
    let mut vor: Vec<Vec<u64>> = Vec::with_capacity(n);
    for lab in labs {
        let mut table = Vec::with_capacity(others_count);
        for t in 0..others_count {
            let view: Point = decode(t, n - 1, g).iter().flat_map(|&ix| grid[ix].0.iter().copied()).collect();
            table.push(lab.voronoi_labels(&view, sigma).iter().fold(0u64, |b, &r| b | 1 << r));
        }
        vor.push(table);
    }
    for t in 0..g.pow(n as u32) {
        let prof = decode(t, n, g);
        let ok = (0..n).all(|i| {
            let rest = prof.iter().enumerate().filter(|(j, _)| *j != i).fold(0, |acc, (_, &ix)| acc * g + ix);
            masks[prof[i]] & !vor[i][rest] == 0
        });
        if ok {
            return Ok(Some(prof));
        }
    }
    Ok(None)
}

/// Jordan's three-player matching pennies: 1 matches 2, 2 matches 3, 3 mismatches 1.
/// Its only equilibrium is uniform.
pub fn jordan_game() -> NormalFormGame {
    NormalFormGame::from_fn(3, 2, |i, a| {
        let hit = match i {
            0 => a[0] == a[1],
            1 => a[1] == a[2],
            _ => a[2] != a[0],
        };
        if hit {
            1.0
        } else {
            0.0
        }
    })
    .expect("fixed shape")
}

pub fn random_game(n: usize, k: usize, seed: u64) -> Result<NormalFormGame> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let u = (0..n * k.pow(n as u32)).map(|_| rng.random::<f64>()).collect();
    NormalFormGame::new(n, k, u)
}
