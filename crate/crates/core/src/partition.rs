//! Ground-truth partitions of `Δ^m` and the membership oracles that answer for them.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{
    binomial, chebyshev, convex_hull, distance_to_hull, dot, in_simplex, section_map, AffineMap, HPolytope, Norm,
    Point, VPolytope, ETA,
};

/// Upper-envelope partition: label `i` owns the points where `(Ay + b)_i` is maximal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UeppJson", into = "UeppJson")]
pub struct Uepp {
    m: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct UeppJson {
    m: usize,
    n: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl TryFrom<UeppJson> for Uepp {
    type Error = Error;
    fn try_from(j: UeppJson) -> Result<Self> {
        check_dim(j.n, j.a.len())?;
        Uepp::new(j.m, j.a, j.b)
    }
}

impl From<Uepp> for UeppJson {
    fn from(u: Uepp) -> Self {
        UeppJson { m: u.m, n: u.b.len(), a: u.a, b: u.b }
    }
}

impl Uepp {
    pub fn new(m: usize, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::InvalidInput("a partition needs at least one label".into()));
        }
        check_dim(b.len(), a.len())?;
        for row in &a {
            check_dim(m, row.len())?;
        }
        if a.iter().flatten().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite UEPP entry".into()));
        }
        Ok(Uepp { m, a, b })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn values(&self, y: &[f64]) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(row, b)| dot(row, y) + b).collect()
    }

    /// The partition pulled back through `map`: labels of `w` are the labels of `map(w)`.
    pub fn compose(&self, map: &AffineMap) -> Result<Uepp> {
        check_dim(self.m, map.out_dim())?;
        let k = map.in_dim();
        let mat = map.matrix();
        let a =
            self.a.iter().map(|row| (0..k).map(|j| (0..self.m).map(|r| row[r] * mat[r][j]).sum()).collect()).collect();
        let b = self.a.iter().zip(&self.b).map(|(row, b)| b + dot(row, map.shift())).collect();
        Uepp::new(k, a, b)
    }

    /// The UEPP `(A^x, b^x)` of the rescaled cross-section `f_x(𝒫^x)`.
    pub fn section(&self, x: f64) -> Result<Uepp> {
        let f = section_map(self.m, x)?;
        self.compose(f.inverse().expect("section map carries its inverse"))
    }
}

pub fn uepp_label_set(u: &Uepp, y: &[f64]) -> Result<Vec<usize>> {
    u.label_set(y)
}

/// Anything that can report the full label set of a point of `Δ^m`.
pub trait LabelSource: fmt::Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn label_count(&self) -> usize;
    fn label_set(&self, x: &[f64]) -> Result<Vec<usize>>;
}

fn check_point(dim: usize, x: &[f64]) -> Result<()> {
    check_dim(dim, x.len())?;
    if !in_simplex(x, ETA) {
        return Err(Error::OutsideSimplex(x.to_vec()));
    }
    Ok(())
}

impl LabelSource for Uepp {
    fn dim(&self) -> usize {
        self.m
    }

    fn label_count(&self) -> usize {
        self.n()
    }

    /// Every label within `ETA` of the envelope.
    fn label_set(&self, y: &[f64]) -> Result<Vec<usize>> {
        check_point(self.m, y)?;
        let v = self.values(y);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((0..v.len()).filter(|&i| v[i] >= max - ETA).collect())
    }
}

/// Explicit cells, optionally remembering the UEPP they came from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionGroundTruth {
    pub m: usize,
    pub n: usize,
    pub cells: Vec<(usize, VPolytope)>,
    pub source: Option<Uepp>,
}

impl PartitionGroundTruth {
    pub fn cell(&self, label: usize) -> Option<&VPolytope> {
        self.cells.iter().find(|(l, _)| *l == label).map(|(_, c)| c)
    }
}

impl LabelSource for PartitionGroundTruth {
    fn dim(&self) -> usize {
        self.m
    }

    fn label_count(&self) -> usize {
        self.n
    }

    fn label_set(&self, x: &[f64]) -> Result<Vec<usize>> {
        if let Some(u) = &self.source {
            return u.label_set(x);
        }
        check_point(self.m, x)?;
        let d: Vec<(usize, f64)> =
            self.cells.iter().map(|(l, c)| (*l, distance_to_hull(x, c, Norm::L2).dist)).collect();
        let min = d.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        // cells that miss x by float noise still own it when nothing else does
        let tol = ETA.max(min);
        let mut out: Vec<usize> = d.iter().filter(|p| p.1 <= tol).map(|p| p.0).collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// Half-space form of cell `i`; the last `m + 1` rows are the facets of `Δ^m`.
pub fn uepp_cell_h(u: &Uepp, i: usize) -> HPolytope {
    let m = u.m;
    let mut rows: Vec<(Point, f64)> = Vec::new();
    for j in 0..u.n() {
        if j != i {
            let normal = (0..m).map(|k| u.a[i][k] - u.a[j][k]).collect();
            rows.push((normal, u.b[j] - u.b[i]));
        }
    }
    rows.extend(HPolytope::simplex(m).rows().iter().cloned());
    HPolytope::new(m, rows)
}

pub const CELL_DIM_CAP: usize = 4;
pub const CELL_LABEL_CAP: usize = 8;

pub fn uepp_cells(u: &Uepp) -> Result<PartitionGroundTruth> {
    if u.m > CELL_DIM_CAP || u.n() > CELL_LABEL_CAP {
        return Err(Error::CapExceeded(format!(
            "cell enumeration limited to m ≤ {CELL_DIM_CAP}, n ≤ {CELL_LABEL_CAP}"
        )));
    }
    let cells = (0..u.n())
        .map(|i| {
            let cell = if u.m == 0 {
                if u.label_set(&[])?.contains(&i) {
                    VPolytope::new(0, vec![vec![]])
                } else {
                    VPolytope::empty(0)
                }
            } else {
                uepp_cell_h(u, i).to_vpolytope()
            };
            Ok((i, cell))
        })
        .collect::<Result<_>>()?;
    Ok(PartitionGroundTruth { m: u.m, n: u.n(), cells, source: Some(u.clone()) })
}

/// Vertex first-coordinates of every cell plus the points where each cell's cross-section
/// thickness crosses `alpha`.
pub fn critical_coordinates(u: &Uepp, alpha: f64) -> Result<Vec<f64>> {
    if alpha <= 0.0 {
        return Err(Error::InvalidInput("alpha must be positive".into()));
    }
    if u.m == 0 {
        return Ok(Vec::new());
    }
    let gt = uepp_cells(u)?;
    let mut out = Vec::new();
    for (i, cell) in &gt.cells {
        if cell.is_empty() {
            continue;
        }
        let xs: Vec<f64> = cell.vertices().iter().map(|v| v[0]).collect();
        out.extend(&xs);
        // a nonempty 0-dimensional section has infinite thickness, so for m = 1
        // the α-coordinates are the vertex coordinates themselves
        if u.m == 1 {
            continue;
        }
        let h = uepp_cell_h(u, *i);
        let tau = |x: f64| chebyshev(&h.section(x)).map(|c| c.radius);
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        const SAMPLES: usize = 64;
        let grid: Vec<f64> = (0..=SAMPLES).map(|s| lo + (hi - lo) * s as f64 / SAMPLES as f64).collect();
        let thick: Vec<bool> = grid.iter().map(|&x| tau(x).map(|t| t >= alpha)).collect::<Result<_>>()?;
        let (Some(first), Some(last)) = (thick.iter().position(|&b| b), thick.iter().rposition(|&b| b)) else {
            continue;
        };
        let bisect = |mut thin: f64, mut fat: f64| -> Result<f64> {
            for _ in 0..60 {
                let mid = 0.5 * (thin + fat);
                if tau(mid)? >= alpha {
                    fat = mid;
                } else {
                    thin = mid;
                }
            }
            Ok(fat)
        };
        out.push(if first == 0 { lo } else { bisect(grid[first - 1], grid[first])? });
        out.push(if last == SAMPLES { hi } else { bisect(grid[last + 1], grid[last])? });
    }
    out.retain(|x| (-ETA..=1.0 + ETA).contains(x));
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= ETA);
    Ok(out)
}

/// Upper bound on the number of critical coordinates.
pub fn critical_bound(m: usize, n: usize) -> u64 {
    binomial((n + m) as u64, m as u64) + 2 * n as u64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UeppOptions {
    /// Rows `0..d` are copied onto the last `d` rows, forcing coinciding cells.
    pub duplicate_rows: usize,
    /// Rows right after the duplicated block never attain the maximum.
    pub empty_cells: usize,
}

/// Perturbed power diagram of Dirichlet-distributed sites.
pub fn random_uepp(m: usize, n: usize, seed: u64, options: UeppOptions) -> Result<Uepp> {
    if n == 0 || 2 * options.duplicate_rows + options.empty_cells > n {
        return Err(Error::InvalidInput("not enough rows for the requested degeneracies".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a: Vec<Point> = Vec::with_capacity(n);
    let mut b: Vec<f64> = Vec::with_capacity(n);
    for _ in 0..n {
        let site = dirichlet_point(m, &mut rng);
        b.push(-dot(&site, &site) + rng.random_range(-0.02..0.02));
        a.push(site.iter().map(|s| 2.0 * s).collect());
    }
    for r in 0..options.duplicate_rows {
        a[n - 1 - r] = a[r].clone();
        b[n - 1 - r] = b[r];
    }
    for r in options.duplicate_rows..options.duplicate_rows + options.empty_cells {
        a[r] = vec![0.0; m];
        b[r] = -100.0;
    }
    Uepp::new(m, a, b)
}

/// Uniform point of `Δ^m`: normalized exponentials with the first coordinate dropped.
pub fn dirichlet_point<R: Rng>(m: usize, rng: &mut R) -> Point {
    let e: Vec<f64> = (0..=m).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    e[1..].iter().map(|v| v / total).collect()
}

/// How an adversarial oracle resolves ties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// A fixed member per tie set, chosen by hashing the set with the seed.
    Seeded,
    RoundRobin,
    MaxIndex,
    /// The member whose hull of earlier answers is nearest, so hulls grow least.
    AntiLearner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleKind {
    Lexicographic,
    Adversarial(Policy),
}

impl OracleKind {
    pub fn is_adversarial(&self) -> bool {
        matches!(self, OracleKind::Adversarial(_))
    }
}

/// Counter, optional transcript and optional budget of an oracle.
#[derive(Clone, Debug, Default, Serialize)]
pub struct QueryLog {
    count: u64,
    transcript: Option<Vec<(Point, usize)>>,
    budget: Option<u64>,
}

#[derive(Serialize)]
struct LogLine<'a> {
    index: usize,
    point: &'a [f64],
    label: usize,
}

impl QueryLog {
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn transcript(&self) -> Option<&[(Point, usize)]> {
        self.transcript.as_deref()
    }

    fn charge(&mut self) -> Result<()> {
        if self.budget.is_some_and(|b| self.count >= b) {
            return Err(Error::BudgetExhausted);
        }
        self.count += 1;
        Ok(())
    }

    fn record(&mut self, x: &[f64], label: usize) {
        if let Some(t) = &mut self.transcript {
            t.push((x.to_vec(), label));
        }
    }

    fn fresh(&self) -> QueryLog {
        QueryLog { count: 0, transcript: self.transcript.as_ref().map(|_| Vec::new()), budget: self.budget }
    }

    /// One JSON object per line: `{"index":…,"point":[…],"label":…}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for (index, (point, label)) in self.transcript.iter().flatten().enumerate() {
            out.push_str(&serde_json::to_string(&LogLine { index, point, label: *label }).expect("plain data"));
            out.push('\n');
        }
        out
    }
}

/// Point-to-label access; the only view of a partition a learner gets.
pub trait MembershipOracle {
    fn dim(&self) -> usize;
    fn label_count(&self) -> usize;
    fn query(&mut self, x: &[f64]) -> Result<usize>;
    /// Queries charged so far, including those issued through derived oracles.
    fn queries(&self) -> u64;
}

pub struct Oracle {
    source: Arc<dyn LabelSource>,
    kind: OracleKind,
    seed: u64,
    log: QueryLog,
    turn: u64,
    answered: Vec<VPolytope>,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle").field("kind", &self.kind).field("queries", &self.log.count).finish()
    }
}

impl Clone for Oracle {
    fn clone(&self) -> Self {
        Oracle {
            source: self.source.clone(),
            kind: self.kind,
            seed: self.seed,
            log: self.log.fresh(),
            turn: 0,
            answered: vec![VPolytope::empty(self.source.dim()); self.source.label_count()],
        }
    }
}

pub fn make_oracle(source: Arc<dyn LabelSource>, kind: OracleKind, seed: u64) -> Oracle {
    let answered = vec![VPolytope::empty(source.dim()); source.label_count()];
    Oracle { source, kind, seed, log: QueryLog::default(), turn: 0, answered }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Oracle {
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.log.budget = Some(budget);
        self
    }

    pub fn with_transcript(mut self) -> Self {
        self.log.transcript = Some(Vec::new());
        self
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn log(&self) -> &QueryLog {
        &self.log
    }

    pub fn source(&self) -> &Arc<dyn LabelSource> {
        &self.source
    }

    /// Strong query: the full label set, charged as one query.
    pub fn query_set(&mut self, x: &[f64]) -> Result<Vec<usize>> {
        self.log.charge()?;
        let set = self.source.label_set(x)?;
        self.log.record(x, set[0]);
        Ok(set)
    }

    fn choose(&mut self, x: &[f64], ties: &[usize]) -> usize {
        if ties.len() == 1 {
            return ties[0];
        }
        match self.kind {
            OracleKind::Lexicographic => ties[0],
            OracleKind::Adversarial(Policy::MaxIndex) => ties[ties.len() - 1],
            OracleKind::Adversarial(Policy::RoundRobin) => {
                self.turn += 1;
                ties[(self.turn as usize - 1) % ties.len()]
            }
            OracleKind::Adversarial(Policy::Seeded) => {
                let h = ties.iter().fold(splitmix(self.seed), |h, &l| splitmix(h ^ l as u64));
                ties[(h % ties.len() as u64) as usize]
            }
            OracleKind::Adversarial(Policy::AntiLearner) => {
                let d = |l: usize| distance_to_hull(x, &self.answered[l], Norm::L2).dist;
                *ties.iter().min_by(|&&p, &&q| d(p).total_cmp(&d(q))).expect("non-empty tie set")
            }
        }
    }
}

impl MembershipOracle for Oracle {
    fn dim(&self) -> usize {
        self.source.dim()
    }

    fn label_count(&self) -> usize {
        self.source.label_count()
    }

    fn query(&mut self, x: &[f64]) -> Result<usize> {
        self.log.charge()?;
        let ties = self.source.label_set(x)?;
        let label = self.choose(x, &ties);
        if self.kind == OracleKind::Adversarial(Policy::AntiLearner) {
            let mut pts = self.answered[label].vertices().to_vec();
            pts.push(x.to_vec());
            self.answered[label] = convex_hull(&pts);
        }
        self.log.record(x, label);
        Ok(label)
    }

    fn queries(&self) -> u64 {
        self.log.count
    }
}

/// `Q ∘ f_t^{-1}`: queries the cross-section at first coordinate `t` in rescaled coordinates.
pub struct SectionOracle<'a> {
    parent: &'a mut dyn MembershipOracle,
    t: f64,
}

impl<'a> SectionOracle<'a> {
    pub fn new(parent: &'a mut dyn MembershipOracle, t: f64) -> Result<Self> {
        if parent.dim() == 0 || !(0.0..1.0).contains(&t) {
            return Err(Error::InvalidInput(format!("no cross-section at {t}")));
        }
        Ok(SectionOracle { parent, t })
    }
}

pub(crate) fn lift_section(t: f64, w: &[f64]) -> Point {
    std::iter::once(t).chain(w.iter().map(|v| (1.0 - t) * v)).collect()
}

impl MembershipOracle for SectionOracle<'_> {
    fn dim(&self) -> usize {
        self.parent.dim() - 1
    }

    fn label_count(&self) -> usize {
        self.parent.label_count()
    }

    fn query(&mut self, w: &[f64]) -> Result<usize> {
        check_dim(self.dim(), w.len())?;
        self.parent.query(&lift_section(self.t, w))
    }

    fn queries(&self) -> u64 {
        self.parent.queries()
    }
}

/// `Q ∘ g` for an affine `g` from a lower-dimensional simplex into the parent's domain.
pub struct MappedOracle<'a> {
    parent: &'a mut dyn MembershipOracle,
    map: AffineMap,
}

impl<'a> MappedOracle<'a> {
    pub fn new(parent: &'a mut dyn MembershipOracle, map: AffineMap) -> Result<Self> {
        check_dim(parent.dim(), map.out_dim())?;
        Ok(MappedOracle { parent, map })
    }
}

impl MembershipOracle for MappedOracle<'_> {
    fn dim(&self) -> usize {
        self.map.in_dim()
    }

    fn label_count(&self) -> usize {
        self.parent.label_count()
    }

    fn query(&mut self, w: &[f64]) -> Result<usize> {
        check_dim(self.dim(), w.len())?;
        self.parent.query(&self.map.apply(w))
    }

    fn queries(&self) -> u64 {
        self.parent.queries()
    }
}
