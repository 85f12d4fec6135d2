//! Empirical labellings: labelled point sets, their hulls, and the checks learners and
//! solvers run against them.

use std::cell::OnceCell;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::lp::{LinearProgram, LpOutcome};
use crate::geometry::{
    convex_hull, dist, distance_to_hull, distance_within, dot, facets, in_simplex, slice, HPolytope, Norm, Point,
    VPolytope, ETA,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "LabellingJson", into = "LabellingJson")]
pub struct EmpiricalLabelling {
    m: usize,
    n: usize,
    points: Vec<Vec<Point>>,
    parent: Vec<usize>,
    merges: Vec<(usize, usize)>,
    /// Hull of every class, stored at the class root; empty elsewhere.
    hulls: Vec<VPolytope>,
}

#[derive(Serialize, Deserialize)]
struct LabellingJson {
    m: usize,
    n: usize,
    points: BTreeMap<String, Vec<Point>>,
    merges: Vec<(usize, usize)>,
}

impl From<EmpiricalLabelling> for LabellingJson {
    fn from(l: EmpiricalLabelling) -> Self {
        let points =
            l.points.into_iter().enumerate().filter(|(_, p)| !p.is_empty()).map(|(i, p)| (i.to_string(), p)).collect();
        LabellingJson { m: l.m, n: l.n, points, merges: l.merges }
    }
}

impl TryFrom<LabellingJson> for EmpiricalLabelling {
    type Error = Error;
    fn try_from(j: LabellingJson) -> Result<Self> {
        let mut l = EmpiricalLabelling::new(j.m, j.n);
        let mut batch = Vec::new();
        for (k, pts) in j.points {
            let label: usize = k.parse().map_err(|_| Error::InvalidInput(format!("bad label key {k:?}")))?;
            batch.extend(pts.into_iter().map(|p| (p, label)));
        }
        l.extend(batch)?;
        for (i, k) in j.merges {
            l.merge_labels(i, k)?;
        }
        Ok(l)
    }
}

impl EmpiricalLabelling {
    pub fn new(m: usize, n: usize) -> Self {
        EmpiricalLabelling {
            m,
            n,
            points: vec![Vec::new(); n],
            parent: (0..n).collect(),
            merges: Vec::new(),
            hulls: vec![VPolytope::empty(m); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn label_count(&self) -> usize {
        self.n
    }

    pub fn find(&self, mut label: usize) -> usize {
        while self.parent[label] != label {
            label = self.parent[label];
        }
        label
    }

    pub fn merges(&self) -> &[(usize, usize)] {
        &self.merges
    }

    /// Points attributed to `label` itself, not to its merge class.
    pub fn points(&self, label: usize) -> &[Point] {
        &self.points[label]
    }

    pub fn total_points(&self) -> usize {
        self.points.iter().map(Vec::len).sum()
    }

    /// Hull of the class containing `label`.
    pub fn hull(&self, label: usize) -> &VPolytope {
        &self.hulls[self.find(label)]
    }

    /// Roots of the classes with at least one point.
    pub fn classes(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.parent[i] == i && !self.hulls[i].is_empty()).collect()
    }

    pub fn members(&self, root: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.find(i) == root).collect()
    }

    fn check(&self, x: &[f64], label: usize) -> Result<()> {
        if label >= self.n {
            return Err(Error::InvalidInput(format!("label {label} out of range for {} labels", self.n)));
        }
        check_dim(self.m, x.len())?;
        if !in_simplex(x, ETA) {
            return Err(Error::OutsideSimplex(x.to_vec()));
        }
        Ok(())
    }

    pub fn add_query(&mut self, x: &[f64], label: usize) -> Result<()> {
        self.check(x, label)?;
        self.points[label].push(x.to_vec());
        let root = self.find(label);
        let mut pts = self.hulls[root].vertices().to_vec();
        pts.push(x.to_vec());
        self.hulls[root] = convex_hull(&pts);
        Ok(())
    }

    /// Adds many points, rebuilding each touched hull once.
    pub fn extend(&mut self, batch: impl IntoIterator<Item = (Point, usize)>) -> Result<()> {
        let mut fresh: BTreeMap<usize, Vec<Point>> = BTreeMap::new();
        for (x, label) in batch {
            self.check(&x, label)?;
            fresh.entry(self.find(label)).or_default().push(x.clone());
            self.points[label].push(x);
        }
        for (root, mut pts) in fresh {
            pts.extend(self.hulls[root].vertices().iter().cloned());
            self.hulls[root] = convex_hull(&pts);
        }
        Ok(())
    }

    pub fn merge_labels(&mut self, i: usize, j: usize) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::InvalidInput(format!("merge of {i} and {j} out of range")));
        }
        let (ri, rj) = (self.find(i), self.find(j));
        if ri == rj {
            return Ok(());
        }
        let (lo, hi) = (ri.min(rj), ri.max(rj));
        self.parent[hi] = lo;
        let mut pts = self.hulls[lo].vertices().to_vec();
        pts.extend(self.hulls[hi].vertices().iter().cloned());
        self.hulls[lo] = convex_hull(&pts);
        self.hulls[hi] = VPolytope::empty(self.m);
        self.merges.push((i, j));
        Ok(())
    }

    /// Keeps only the points that are vertices of their own label's hull; class hulls are
    /// unchanged since they are hulls of those per-label hulls.
    pub fn compact(&mut self) {
        for pts in &mut self.points {
            let own = convex_hull(pts);
            let mut keep: Vec<Point> = Vec::new();
            for p in pts.drain(..) {
                if own.vertices().contains(&p) && !keep.contains(&p) {
                    keep.push(p);
                }
            }
            *pts = keep;
        }
    }

    /// Distance from `x` to the nearest class hull.
    pub fn distance(&self, x: &[f64], norm: Norm) -> f64 {
        self.classes().iter().map(|&c| distance_to_hull(x, &self.hulls[c], norm).dist).fold(f64::INFINITY, f64::min)
    }

    pub fn is_eps_close(&self, region: &VPolytope, eps: f64) -> CoverageReport {
        let hulls: Vec<&VPolytope> = self.classes().iter().map(|&c| &self.hulls[c]).collect();
        certify_cover(region, &hulls, eps)
    }

    /// Whether the endpoint cross-sections at `x` and `y` alone cover the slab between them.
    pub fn is_slice_covered(&self, x: f64, y: f64, eps: f64) -> Result<bool> {
        if !(0.0 <= x && x <= y && y <= 1.0) {
            return Err(Error::InvalidInput(format!("bad slice [{x}, {y}]")));
        }
        if self.m == 0 {
            return Err(Error::InvalidInput("slices need m ≥ 1".into()));
        }
        let at = |t: f64| -> Vec<(Point, usize)> {
            (0..self.n)
                .flat_map(|l| {
                    self.points[l].iter().filter(move |p| (p[0] - t).abs() <= ETA).map(move |p| (p.clone(), l))
                })
                .map(|(p, l)| (p, self.find(l)))
                .collect()
        };
        Ok(slab_covered(self.m, x, y, &at(x), &at(y), eps))
    }

    pub fn voronoi_labels(&self, x: &[f64], norm: Norm, sigma: f64) -> Result<Vec<usize>> {
        let d: Vec<(usize, f64)> =
            self.classes().into_iter().map(|c| (c, distance_to_hull(x, &self.hulls[c], norm).dist)).collect();
        voronoi_select(self, &d, sigma)
    }

    /// Labels `i ≠ j` and a point `z ∈ P̂_j` lying in the interior of a full-dimensional `P̂_i`
    /// by more than `depth` (at least `2η`). Stored points sit only as close to cell boundaries as
    /// the learner resolved them, so callers pass a depth above that resolution.
    pub fn interior_conflict(&self, depth: f64) -> Option<(usize, usize, Point)> {
        let depth = depth.max(2.0 * ETA);
        let classes = self.classes();
        for &i in &classes {
            let hi = &self.hulls[i];
            if !hi.is_full_dim() {
                continue;
            }
            let facet_form = OnceCell::new();
            for &j in &classes {
                if i == j || !boxes_overlap(hi, &self.hulls[j]) {
                    continue;
                }
                if let Some(z) = self.hulls[j].vertices().iter().find(|z| interior_by(z, hi, depth)) {
                    return Some((i, j, z.clone()));
                }
                let h = facet_form.get_or_init(|| facets(hi));
                if let Some(z) = h.as_ref().and_then(|h| deep_point(&self.hulls[j], h, depth)) {
                    return Some((i, j, z));
                }
            }
        }
        None
    }
}

fn boxes_overlap(p: &VPolytope, q: &VPolytope) -> bool {
    match (p.bounding_box(), q.bounding_box()) {
        (Some((pl, ph)), Some((ql, qh))) => (0..pl.len()).all(|k| pl[k] < qh[k] && ql[k] < ph[k]),
        _ => false,
    }
}

/// A point of `conv(q)` satisfying every row of `h` with slack above `depth`, by the LP
/// `max s` over convex weights `λ` with `normal·(Vλ) ≥ offset + s`.
fn deep_point(q: &VPolytope, h: &HPolytope, depth: f64) -> Option<Point> {
    let v = q.vertices();
    let k = v.len();
    let d = q.dim();
    // variables: λ (k), s+ , s-
    let mut c = vec![0.0; k + 2];
    c[k] = -1.0;
    c[k + 1] = 1.0;
    let mut lp = LinearProgram::new(c);
    for (normal, offset) in h.rows() {
        let mut row: Vec<f64> = v.iter().map(|p| -dot(normal, p)).collect();
        row.push(1.0);
        row.push(-1.0);
        lp.le(row, -offset);
    }
    let mut ones = vec![1.0; k];
    ones.extend([0.0, 0.0]);
    lp.eq(ones, 1.0);
    // cap s so the program stays bounded
    let mut cap = vec![0.0; k + 2];
    cap[k] = 1.0;
    lp.le(cap, 1.0);
    let x = match lp.solve() {
        LpOutcome::Optimal { x, .. } if x[k] - x[k + 1] > depth => x,
        _ => return None,
    };
    // the pivoting can drift on near-coincident vertices; trust only a checked witness
    let weight: f64 = x[..k].iter().sum();
    if (weight - 1.0).abs() > 1e-9 {
        return None;
    }
    let z: Point = (0..d).map(|a| (0..k).map(|i| x[i] * v[i][a]).sum()).collect();
    h.rows().iter().all(|(normal, offset)| dot(normal, &z) - offset > depth).then_some(z)
}

/// Classes within `sigma` of the nearest one, expanded to their member labels.
pub(crate) fn voronoi_select(l: &EmpiricalLabelling, d: &[(usize, f64)], sigma: f64) -> Result<Vec<usize>> {
    let min = d.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::InvalidInput("every hull is empty".into()));
    }
    let mut out: Vec<usize> = d.iter().filter(|p| p.1 <= min + sigma + ETA).flat_map(|p| l.members(p.0)).collect();
    out.sort_unstable();
    Ok(out)
}

/// `z` lies in the interior of the full-dimensional `h` by more than `ETA`.
pub fn strictly_interior(z: &[f64], h: &VPolytope) -> bool {
    interior_by(z, h, ETA)
}

/// `z` lies in the interior of the full-dimensional `h` by more than `depth`.
pub fn interior_by(z: &[f64], h: &VPolytope, depth: f64) -> bool {
    let d = h.dim();
    if !h.is_full_dim() {
        return false;
    }
    let v = h.vertices();
    if d == 1 {
        let lo = v.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = v.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        return z[0] > lo + depth && z[0] < hi - depth;
    }
    if d == 2 && h.is_ccw_polygon() {
        return (0..v.len()).all(|k| {
            let (a, b) = (&v[k], &v[(k + 1) % v.len()]);
            let cross = (b[0] - a[0]) * (z[1] - a[1]) - (b[1] - a[1]) * (z[0] - a[0]);
            cross > depth * dist(a, b)
        });
    }
    if !distance_within(z, h, ETA) {
        return false;
    }
    // some axis probe leaves any supporting facet by at least 4·depth
    let step = 4.0 * depth * (d as f64).sqrt();
    (0..d).all(|k| {
        [-step, step].iter().all(|s| {
            let mut p = z.to_vec();
            p[k] += s;
            distance_within(&p, h, ETA)
        })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub eps: f64,
    pub is_close: bool,
    /// A region point not certified to lie within `eps` of a hull.
    pub witness: Option<Point>,
    /// Box radius below which the certifier stops refining; a negative report at this
    /// resolution is conservative.
    pub checked_resolution: f64,
}

const MAX_BOXES: usize = 4_000_000;

/// Certifies that every point of `region` lies within `eps` of some hull.
///
/// Boxes over the region's bounding box are refined until each is either shown to miss the
/// region, shown covered, or small enough to stop. A box is covered when its center's
/// projection onto the region is close enough to a hull to absorb the whole box, or when every
/// vertex of the box clipped to the region is within `eps` of one hull, which suffices since
/// distance to a convex set is convex. A failing report whose witness is farther than `eps`
/// from every hull is definitive; one found at the resolution floor is conservative.
pub fn certify_cover(region: &VPolytope, hulls: &[&VPolytope], eps: f64) -> CoverageReport {
    let r_min = eps / 1024.0;
    let report = |is_close, witness| CoverageReport { eps, is_close, witness, checked_resolution: r_min };
    let Some((lo, hi)) = region.bounding_box() else { return report(true, None) };
    if hulls.iter().all(|h| h.is_empty()) {
        return report(false, Some(region.vertices()[0].clone()));
    }
    let d = region.dim();
    let region_h = facets(region);
    let nearest = |p: &[f64]| -> Vec<(f64, usize)> {
        let mut v: Vec<(f64, usize)> =
            hulls.iter().enumerate().map(|(k, h)| (distance_to_hull(p, h, Norm::L2).dist, k)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    };
    let mut stack = vec![(lo, hi)];
    let mut boxes = 0usize;
    while let Some((lo, hi)) = stack.pop() {
        boxes += 1;
        let c: Point = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let r = 0.5 * dist(&lo, &hi);
        let proj = distance_to_hull(&c, region, Norm::L2);
        let (dc, p) = (proj.dist, proj.witness.expect("region is non-empty"));
        if dc > r + ETA {
            continue;
        }
        let near = nearest(&p);
        let dp = near[0].0;
        if dp > eps {
            return report(false, Some(p));
        }
        if dp + dc + r <= eps {
            continue;
        }
        let corners: Vec<Point> = (0..1usize << d)
            .map(|mask| (0..d).map(|a| if mask >> a & 1 == 1 { hi[a] } else { lo[a] }).collect())
            .collect();
        let probe = match &region_h {
            Some(h) if !corners.iter().all(|q| h.contains(q, ETA)) => clip(h, &lo, &hi),
            _ => corners,
        };
        if probe.is_empty() {
            continue;
        }
        if near.iter().take(2).any(|&(_, k)| probe.iter().all(|q| distance_within(q, hulls[k], eps))) {
            continue;
        }
        if r <= r_min || boxes > MAX_BOXES {
            return report(false, Some(p));
        }
        let axis = (0..d).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).expect("d ≥ 1");
        let mid = 0.5 * (lo[axis] + hi[axis]);
        let (mut lo2, mut hi1) = (lo.clone(), hi.clone());
        lo2[axis] = mid;
        hi1[axis] = mid;
        stack.push((lo2, hi));
        stack.push((lo, hi1));
    }
    report(true, None)
}

/// Vertices of the box `[lo, hi]` intersected with `h`.
fn clip(h: &HPolytope, lo: &[f64], hi: &[f64]) -> Vec<Point> {
    let d = lo.len();
    let mut rows: Vec<(Point, f64)> = h.rows().to_vec();
    for k in 0..d {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        rows.push((e.clone(), lo[k]));
        e[k] = -1.0;
        rows.push((e, -hi[k]));
    }
    HPolytope::new(d, rows).to_vpolytope().vertices().to_vec()
}

/// Coverage of the slab `(Δ^m)^{x,y}` by `Conv(P̂^x_c, P̂^y_c)` over classes `c`, where
/// `at_x` and `at_y` carry the cross-section points tagged by class.
pub fn slab_covered(m: usize, x: f64, y: f64, at_x: &[(Point, usize)], at_y: &[(Point, usize)], eps: f64) -> bool {
    if y - x <= 0.0 {
        return true;
    }
    match m {
        0 => true,
        1 => {
            let common = at_x.iter().any(|(_, c)| at_y.iter().any(|(_, d)| c == d));
            let w = y - x;
            common
                || match (at_x.is_empty(), at_y.is_empty()) {
                    (false, false) => w / 2.0 <= eps,
                    (true, true) => false,
                    _ => w <= eps,
                }
        }
        2 => fiber::covered(x, y, at_x, at_y, eps),
        _ => {
            let mut by_class: BTreeMap<usize, Vec<Point>> = BTreeMap::new();
            for (p, c) in at_x.iter().chain(at_y) {
                by_class.entry(*c).or_default().push(p.clone());
            }
            let hulls: Vec<VPolytope> = by_class.values().map(|p| convex_hull(p)).collect();
            let refs: Vec<&VPolytope> = hulls.iter().collect();
            let region = slice(&VPolytope::simplex(m), x, y).expect("ordered slice bounds");
            certify_cover(&region, &refs, eps).is_close
        }
    }
}

/// Planar slabs: the two-sided class hulls are trapezoids whose fibers are intervals between
/// linear functions of the first coordinate, so the uncovered part of the slab splits into
/// convex quadrilaterals between consecutive crossings of those functions.
mod fiber {
    use super::*;

    /// Linear in the slab parameter `τ ∈ [0, 1]`: value `a` at `τ = 0`, `b` at `τ = 1`.
    #[derive(Clone, Copy, Debug)]
    struct Lin {
        a: f64,
        b: f64,
    }

    impl Lin {
        fn at(&self, t: f64) -> f64 {
            self.a + (self.b - self.a) * t
        }
    }

    pub(super) fn covered(x: f64, y: f64, at_x: &[(Point, usize)], at_y: &[(Point, usize)], eps: f64) -> bool {
        let range = |pts: &[(Point, usize)], c: usize| -> Option<(f64, f64)> {
            pts.iter().filter(|p| p.1 == c).map(|p| p.0[1]).fold(None, |acc, w| match acc {
                None => Some((w, w)),
                Some((lo, hi)) => Some((lo.min(w), hi.max(w))),
            })
        };
        let mut classes: Vec<usize> = at_x.iter().chain(at_y).map(|p| p.1).collect();
        classes.sort_unstable();
        classes.dedup();
        let mut bands: Vec<(Lin, Lin)> = Vec::new();
        let mut hulls: Vec<VPolytope> = Vec::new();
        for &c in &classes {
            let (rx, ry) = (range(at_x, c), range(at_y, c));
            let mut pts = Vec::new();
            if let Some((lo, hi)) = rx {
                pts.push(vec![x, lo]);
                pts.push(vec![x, hi]);
            }
            if let Some((lo, hi)) = ry {
                pts.push(vec![y, lo]);
                pts.push(vec![y, hi]);
            }
            if let (Some(a), Some(b)) = (rx, ry) {
                bands.push((Lin { a: a.0, b: b.0 }, Lin { a: a.1, b: b.1 }));
            }
            hulls.push(convex_hull(&pts));
        }
        if hulls.is_empty() {
            return false;
        }
        let floor = Lin { a: 0.0, b: 0.0 };
        let ceil = Lin { a: 1.0 - x, b: 1.0 - y };
        let mut lines: Vec<Lin> = vec![floor, ceil];
        for (lo, hi) in &bands {
            lines.push(*lo);
            lines.push(*hi);
        }
        let mut cuts = vec![0.0, 1.0];
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (p, q) = (lines[i], lines[j]);
                let den = (p.b - p.a) - (q.b - q.a);
                if den.abs() > 1e-300 {
                    let t = (q.a - p.a) / den;
                    if t > 0.0 && t < 1.0 {
                        cuts.push(t);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let s_of = |t: f64| x + (y - x) * t;
        let ctx = Ctx { hulls: &hulls, eps, s_of: &s_of };
        for win in cuts.windows(2) {
            let (t0, t1) = (win[0], win[1]);
            let tm = 0.5 * (t0 + t1);
            let top = ceil.at(tm);
            let mut spans: Vec<(f64, Lin, Lin)> = bands.iter().map(|(lo, hi)| (lo.at(tm), *lo, *hi)).collect();
            spans.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut reach = floor;
            for (start, lo, hi) in spans.into_iter().chain(std::iter::once((top, ceil, ceil))) {
                if start > reach.at(tm) && !ctx.quad(reach, lo, t0, t1, 0.0, 1.0, 0) {
                    return false;
                }
                if hi.at(tm) > reach.at(tm) {
                    reach = hi;
                }
                if reach.at(tm) >= top {
                    break;
                }
            }
        }
        true
    }

    struct Ctx<'a> {
        hulls: &'a [VPolytope],
        eps: f64,
        s_of: &'a dyn Fn(f64) -> f64,
    }

    impl Ctx<'_> {
        /// The convex piece between `lo` and `hi` over `[t0, t1]`, restricted to the fraction
        /// `[u0, u1]` of the gap's height.
        #[allow(clippy::too_many_arguments)]
        fn quad(&self, lo: Lin, hi: Lin, t0: f64, t1: f64, u0: f64, u1: f64, depth: u32) -> bool {
            let pt = |t: f64, u: f64| vec![(self.s_of)(t), lo.at(t) + u * (hi.at(t) - lo.at(t))];
            let corners = [pt(t0, u0), pt(t0, u1), pt(t1, u0), pt(t1, u1)];
            if self.hulls.iter().any(|h| corners.iter().all(|q| distance_within(q, h, self.eps))) {
                return true;
            }
            let c = pt(0.5 * (t0 + t1), 0.5 * (u0 + u1));
            let rho = corners.iter().map(|q| dist(q, &c)).fold(0.0, f64::max);
            let dc = self.hulls.iter().map(|h| distance_to_hull(&c, h, Norm::L2).dist).fold(f64::INFINITY, f64::min);
            if dc > self.eps {
                return false;
            }
            if dc + rho <= self.eps {
                return true;
            }
            if depth >= 14 {
                return false;
            }
            let (tm, um) = (0.5 * (t0 + t1), 0.5 * (u0 + u1));
            self.quad(lo, hi, t0, tm, u0, um, depth + 1)
                && self.quad(lo, hi, tm, t1, u0, um, depth + 1)
                && self.quad(lo, hi, t0, tm, um, u1, depth + 1)
                && self.quad(lo, hi, tm, t1, um, u1, depth + 1)
        }
    }
}
