//! Convex geometry over the corner simplex: polytopes in vertex and halfspace form,
//! projections, hulls, Chebyshev centers, cross-sections and the simplex maps.

mod hull;
pub mod lp;
mod project;
mod thickness;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub use hull::{affine_dim, convex_hull, facets};
pub use project::{distance_to_hull, distance_within, min_norm_point, Norm, Projection};
pub use thickness::{chebyshev, grid_thickness, Chebyshev};

/// Predicate tolerance shared by every membership and equality test.
pub const ETA: f64 = 1e-9;

pub type Point = Vec<f64>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn dist1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Affine combination `(1 - t) a + t b`.
pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Point {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Membership in `Δ^m` up to `tol`.
pub fn in_simplex(x: &[f64], tol: f64) -> bool {
    x.iter().all(|v| v.is_finite() && *v >= -tol) && x.iter().sum::<f64>() <= 1.0 + tol
}

/// Vertices `0, e_1, ..., e_m` of `Δ^m`.
pub fn simplex_vertices(m: usize) -> Vec<Point> {
    let mut out = vec![vec![0.0; m]];
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        out.push(e);
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Solves the square system `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        let scale = a[piv].iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if a[piv][col].abs() <= 1e-12 * scale.max(1e-300) || a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Convex polytope given by its vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Point>", into = "Vec<Point>")]
pub struct VPolytope {
    dim: usize,
    vertices: Vec<Point>,
    affine_dim: Option<usize>,
    /// Vertices of a full-dimensional planar polygon stored counter-clockwise.
    ccw: bool,
}

impl From<Vec<Point>> for VPolytope {
    fn from(vertices: Vec<Point>) -> Self {
        let dim = vertices.first().map_or(0, |v| v.len());
        VPolytope::new(dim, vertices)
    }
}

impl From<VPolytope> for Vec<Point> {
    fn from(p: VPolytope) -> Self {
        p.vertices
    }
}

impl VPolytope {
    /// Wraps a vertex list without canonicalization.
    pub fn new(dim: usize, vertices: Vec<Point>) -> Self {
        let affine_dim = if vertices.is_empty() { None } else { Some(affine_dim(&vertices)) };
        VPolytope { dim, vertices, affine_dim, ccw: false }
    }

    pub(crate) fn from_parts(dim: usize, vertices: Vec<Point>, affine_dim: Option<usize>, ccw: bool) -> Self {
        VPolytope { dim, vertices, affine_dim, ccw }
    }

    pub fn empty(dim: usize) -> Self {
        VPolytope { dim, vertices: Vec::new(), affine_dim: None, ccw: false }
    }

    /// The corner simplex `Δ^m`.
    pub fn simplex(m: usize) -> Self {
        let verts = simplex_vertices(m);
        if m == 2 {
            return VPolytope { dim: 2, vertices: verts, affine_dim: Some(2), ccw: true };
        }
        VPolytope { dim: m, vertices: verts, affine_dim: Some(m), ccw: false }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Affine dimension, `None` for the empty polytope.
    pub fn affine_dim(&self) -> Option<usize> {
        self.affine_dim
    }

    pub fn is_full_dim(&self) -> bool {
        self.affine_dim == Some(self.dim)
    }

    pub(crate) fn is_ccw_polygon(&self) -> bool {
        self.ccw
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        distance_within(x, self, ETA)
    }

    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        let first = self.vertices.first()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for v in &self.vertices[1..] {
            for k in 0..self.dim {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Some((lo, hi))
    }
}

/// Intersection of halfspaces `normal·x ≥ offset` with unit normals.
#[derive(Clone, Debug, PartialEq)]
pub struct HPolytope {
    dim: usize,
    rows: Vec<(Point, f64)>,
    infeasible: bool,
}

impl Serialize for HPolytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> =
            self.rows.iter().map(|(n, o)| n.iter().copied().chain(std::iter::once(*o)).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HPolytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let dim = rows.first().map_or(0, |r| r.len().saturating_sub(1));
        if rows.iter().any(|r| r.len() != dim + 1) {
            return Err(serde::de::Error::custom("ragged halfspace rows"));
        }
        let rows = rows.into_iter().map(|mut r| {
            let o = r.pop().unwrap_or(0.0);
            (r, o)
        });
        Ok(HPolytope::new(dim, rows))
    }
}

impl HPolytope {
    /// Normalizes each row; rows with a vanishing normal are dropped when trivially
    /// satisfied and mark the polytope infeasible otherwise.
    pub fn new(dim: usize, rows: impl IntoIterator<Item = (Point, f64)>) -> Self {
        let mut out = Vec::new();
        let mut infeasible = false;
        for (normal, offset) in rows {
            assert_eq!(normal.len(), dim, "halfspace normal has wrong dimension");
            let len = norm(&normal);
            if len <= 1e-12 {
                if offset > ETA {
                    infeasible = true;
                }
                continue;
            }
            out.push((normal.iter().map(|v| v / len).collect(), offset / len));
        }
        HPolytope { dim, rows: out, infeasible }
    }

    /// `Δ^m` as `x_i ≥ 0` for each i followed by `-Σx/√m ≥ -1/√m`.
    pub fn simplex(m: usize) -> Self {
        let mut rows = Vec::new();
        for i in 0..m {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            rows.push((e, 0.0));
        }
        rows.push((vec![-1.0; m], -1.0));
        HPolytope::new(m, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[(Point, f64)] {
        &self.rows
    }

    pub fn is_trivially_infeasible(&self) -> bool {
        self.infeasible
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        !self.infeasible && self.rows.iter().all(|(n, o)| dot(n, x) >= o - tol)
    }

    /// Vertex enumeration by solving every `dim`-subset of rows.
    pub fn to_vpolytope(&self) -> VPolytope {
        if self.infeasible {
            return VPolytope::empty(self.dim);
        }
        if self.dim == 0 {
            return VPolytope::new(0, vec![vec![]]);
        }
        let mut verts: Vec<Point> = Vec::new();
        for subset in (0..self.rows.len()).combinations(self.dim) {
            let a: Vec<Vec<f64>> = subset.iter().map(|&i| self.rows[i].0.clone()).collect();
            let b: Vec<f64> = subset.iter().map(|&i| self.rows[i].1).collect();
            let Some(x) = solve_linear(a, b) else { continue };
            if !self.contains(&x, 1e-9) {
                continue;
            }
            if verts.iter().all(|v| dist(v, &x) > 1e-9) {
                verts.push(x);
            }
        }
        convex_hull(&verts)
    }

    /// Cross-section at first coordinate `x`, expressed in the remaining coordinates.
    pub fn section(&self, x: f64) -> HPolytope {
        let mut h = HPolytope::new(self.dim - 1, self.rows.iter().map(|(n, o)| (n[1..].to_vec(), o - n[0] * x)));
        h.infeasible |= self.infeasible;
        h
    }
}

/// Affine map `x ↦ M x + s`, optionally carrying a verified inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    matrix: Vec<Vec<f64>>,
    shift: Point,
    in_dim: usize,
    inverse: Option<Box<AffineMap>>,
}

impl AffineMap {
    pub fn new(in_dim: usize, matrix: Vec<Vec<f64>>, shift: Point) -> Result<Self> {
        check_dim(matrix.len(), shift.len())?;
        for row in &matrix {
            check_dim(in_dim, row.len())?;
        }
        Ok(AffineMap { matrix, shift, in_dim, inverse: None })
    }

    pub fn identity(m: usize) -> Self {
        let matrix = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let mut map = AffineMap { matrix, shift: vec![0.0; m], in_dim: m, inverse: None };
        map.inverse = Some(Box::new(map.clone()));
        map
    }

    /// Attaches `inverse` after checking `self(inverse(p)) = p` on the basis points of the
    /// inverse's domain.
    pub fn with_inverse(mut self, inverse: AffineMap) -> Result<Self> {
        check_dim(self.in_dim, inverse.out_dim())?;
        check_dim(inverse.in_dim, self.out_dim())?;
        for p in simplex_vertices(inverse.in_dim) {
            let back = self.apply(&inverse.apply(&p));
            if dist(&back, &p) > ETA {
                return Err(Error::InvalidInput("affine inverse fails the round trip".into()));
            }
        }
        self.inverse = Some(Box::new(inverse));
        Ok(self)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn out_dim(&self) -> usize {
        self.shift.len()
    }

    pub fn inverse(&self) -> Option<&AffineMap> {
        self.inverse.as_deref()
    }

    pub fn apply(&self, x: &[f64]) -> Point {
        self.matrix.iter().zip(&self.shift).map(|(row, s)| dot(row, x) + s).collect()
    }

    /// Operator norm bound via the Frobenius norm of the linear part.
    pub fn frobenius(&self) -> f64 {
        self.matrix.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `f_x(v) = (v_2, ..., v_m) / (1 - x)`, mapping `(Δ^m)^x` onto `Δ^{m-1}`.
pub fn section_map(m: usize, x: f64) -> Result<AffineMap> {
    if m == 0 {
        return Err(Error::InvalidInput("section map needs m ≥ 1".into()));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::InvalidInput(format!("section coordinate {x} outside [0, 1)")));
    }
    let s = 1.0 / (1.0 - x);
    let fwd: Vec<Vec<f64>> = (1..m).map(|i| (0..m).map(|j| if j == i { s } else { 0.0 }).collect()).collect();
    let mut inv: Vec<Vec<f64>> = vec![vec![0.0; m - 1]];
    for i in 0..m - 1 {
        inv.push((0..m - 1).map(|j| if j == i { 1.0 - x } else { 0.0 }).collect());
    }
    let mut shift = vec![0.0; m];
    shift[0] = x;
    AffineMap::new(m, fwd, vec![0.0; m - 1])?.with_inverse(AffineMap::new(m - 1, inv, shift)?)
}

/// `φ_m(x) = (1 - Σx, x_1, ..., x_m)` into the probability simplex.
pub fn lambda_embed(m: usize) -> AffineMap {
    let mut matrix = vec![vec![-1.0; m]];
    let mut back = Vec::new();
    for i in 0..m {
        matrix.push((0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect());
        back.push((0..=m).map(|j| if j == i + 1 { 1.0 } else { 0.0 }).collect());
    }
    let mut shift = vec![0.0; m + 1];
    shift[0] = 1.0;
    let fwd = AffineMap { matrix, shift, in_dim: m, inverse: None };
    let inv = AffineMap { matrix: back, shift: vec![0.0; m], in_dim: m + 1, inverse: None };
    AffineMap { inverse: Some(Box::new(inv)), ..fwd }
}

/// A face of `Δ^m` given by a subset of its vertices `{0, e_1, ..., e_m}` (vertex `i ≥ 1` is `e_i`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Face {
    pub vertex_subset: Vec<usize>,
    pub dim: usize,
}

impl Face {
    pub fn vertices(&self, m: usize) -> Vec<Point> {
        let all = simplex_vertices(m);
        self.vertex_subset.iter().map(|&i| all[i].clone()).collect()
    }

    pub fn contains_origin(&self) -> bool {
        self.vertex_subset.first() == Some(&0)
    }
}

/// All k-faces of `Δ^m` with the map `φ_F` onto `Δ^k`; `φ_F^{-1}` is attached as the inverse.
pub fn enumerate_k_faces(m: usize, k: usize) -> Result<Vec<(Face, AffineMap)>> {
    if k > m {
        return Err(Error::InvalidInput(format!("face dimension {k} exceeds m = {m}")));
    }
    let mut out = Vec::new();
    for subset in (0..=m).combinations(k + 1) {
        // φ_F keeps the coordinates of the face vertices after the first one
        let fwd: Vec<Vec<f64>> =
            subset[1..].iter().map(|&v| (0..m).map(|j| if j + 1 == v { 1.0 } else { 0.0 }).collect()).collect();
        let mut inv = vec![vec![0.0; k]; m];
        let mut shift = vec![0.0; m];
        for (j, &v) in subset[1..].iter().enumerate() {
            inv[v - 1][j] = 1.0;
        }
        if subset[0] != 0 {
            let v0 = subset[0] - 1;
            shift[v0] = 1.0;
            inv[v0] = vec![-1.0; k];
        }
        let map = AffineMap::new(m, fwd, vec![0.0; k])?.with_inverse(AffineMap::new(k, inv, shift)?)?;
        out.push((Face { vertex_subset: subset, dim: k }, map));
    }
    Ok(out)
}

/// Maximum pairwise vertex distance.
pub fn diameter(p: &VPolytope) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::EmptyPolytope);
    }
    let v = p.vertices();
    let mut best: f64 = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.max(dist(&v[i], &v[j]));
        }
    }
    Ok(best)
}

/// `P ∩ {x_1 = x}` by clipping every vertex pair at the hyperplane.
pub fn cross_section(p: &VPolytope, x: f64) -> Result<VPolytope> {
    if p.dim() == 0 {
        return Err(Error::InvalidInput("cross-section needs dimension ≥ 1".into()));
    }
    let v = p.vertices();
    let mut pts = Vec::new();
    for (i, a) in v.iter().enumerate() {
        if (a[0] - x).abs() <= ETA {
            let mut q = a.clone();
            q[0] = x;
            pts.push(q);
        }
        for b in &v[i + 1..] {
            let (da, db) = (a[0] - x, b[0] - x);
            if (da < -ETA && db > ETA) || (da > ETA && db < -ETA) {
                let t = da / (da - db);
                let mut q = lerp(a, b, t);
                q[0] = x;
                pts.push(q);
            }
        }
    }
    Ok(convex_hull(&pts))
}

/// `P ∩ {x ≤ x_1 ≤ y}`.
pub fn slice(p: &VPolytope, x: f64, y: f64) -> Result<VPolytope> {
    if x > y {
        return Err(Error::InvalidInput(format!("slice bounds reversed: {x} > {y}")));
    }
    let mut pts: Vec<Point> = p.vertices().iter().filter(|v| v[0] >= x - ETA && v[0] <= y + ETA).cloned().collect();
    pts.extend(cross_section(p, x)?.vertices().iter().cloned());
    pts.extend(cross_section(p, y)?.vertices().iter().cloned());
    Ok(convex_hull(&pts))
}

/// Offsets every row not listed in `boundary_rows` inward by `gamma`.
pub fn gamma_interior(p: &HPolytope, boundary_rows: &[usize], gamma: f64) -> HPolytope {
    let mut out = p.clone();
    for (i, row) in out.rows.iter_mut().enumerate() {
        if !boundary_rows.contains(&i) {
            row.1 += gamma;
        }
    }
    out
}
