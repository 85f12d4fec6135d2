use super::lp::{LinearProgram, LpOutcome};
use super::{dist, dot, Point, VPolytope};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Norm {
    L2,
    L1,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub dist: f64,
    /// Nearest point of the hull; `None` for the empty polytope.
    pub witness: Option<Point>,
}

/// Distance from `x` to `conv(p)` in the chosen norm.
pub fn distance_to_hull(x: &[f64], p: &VPolytope, norm: Norm) -> Projection {
    if p.is_empty() {
        return Projection { dist: f64::INFINITY, witness: None };
    }
    match norm {
        Norm::L2 => {
            let w = project_l2(x, p);
            Projection { dist: dist(x, &w), witness: Some(w) }
        }
        Norm::L1 => project_l1(x, p),
    }
}

/// Whether the ℓ2 distance from `x` to `conv(p)` is at most `r`; stops as soon as
/// either answer is certified.
pub fn distance_within(x: &[f64], p: &VPolytope, r: f64) -> bool {
    if p.is_empty() {
        return false;
    }
    let v = p.vertices();
    if v.len() <= 3 || p.dim() == 1 || p.is_ccw_polygon() {
        return dist(x, &project_l2(x, p)) <= r;
    }
    let q: Vec<Point> = v.iter().map(|w| w.iter().zip(x).map(|(a, b)| a - b).collect()).collect();
    match wolfe(&q, Some(r)) {
        Wolfe { decided: Some(inside), .. } => inside,
        Wolfe { x, .. } => super::norm(&x) <= r,
    }
}

/// Minimum-norm point of `conv(points)` and its convex weights.
pub fn min_norm_point(points: &[Point]) -> (Point, Vec<f64>) {
    let res = wolfe(points, None);
    let mut weights = vec![0.0; points.len()];
    for (i, w) in res.support.iter().zip(&res.weights) {
        weights[*i] = *w;
    }
    (res.x, weights)
}

fn project_l2(x: &[f64], p: &VPolytope) -> Point {
    let v = p.vertices();
    if p.dim() == 1 {
        let lo = v.iter().map(|w| w[0]).fold(f64::INFINITY, f64::min);
        let hi = v.iter().map(|w| w[0]).fold(f64::NEG_INFINITY, f64::max);
        return vec![x[0].clamp(lo, hi)];
    }
    match v.len() {
        1 => return v[0].clone(),
        2 => return project_segment(x, &v[0], &v[1]),
        3 => return project_triangle(x, &v[0], &v[1], &v[2]),
        _ => {}
    }
    if p.is_ccw_polygon() {
        return project_polygon(x, v);
    }
    let q: Vec<Point> = v.iter().map(|w| w.iter().zip(x).map(|(a, b)| a - b).collect()).collect();
    let res = wolfe(&q, None);
    res.x.iter().zip(x).map(|(a, b)| a + b).collect()
}

fn project_segment(x: &[f64], a: &[f64], b: &[f64]) -> Point {
    let ab: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
    let len2 = dot(&ab, &ab);
    if len2 <= 0.0 {
        return a.to_vec();
    }
    let ax: Vec<f64> = x.iter().zip(a).map(|(p, q)| p - q).collect();
    let t = (dot(&ax, &ab) / len2).clamp(0.0, 1.0);
    a.iter().zip(&ab).map(|(p, d)| p + t * d).collect()
}

fn project_triangle(x: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> Point {
    let e1: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
    let e2: Vec<f64> = c.iter().zip(a).map(|(p, q)| p - q).collect();
    let r: Vec<f64> = x.iter().zip(a).map(|(p, q)| p - q).collect();
    let (g11, g12, g22) = (dot(&e1, &e1), dot(&e1, &e2), dot(&e2, &e2));
    let det = g11 * g22 - g12 * g12;
    if det > 1e-14 * (g11 * g22).max(1e-300) {
        let (r1, r2) = (dot(&e1, &r), dot(&e2, &r));
        let s = (g22 * r1 - g12 * r2) / det;
        let t = (g11 * r2 - g12 * r1) / det;
        if s >= 0.0 && t >= 0.0 && s + t <= 1.0 {
            return a.iter().zip(e1.iter().zip(&e2)).map(|(p, (u, v))| p + s * u + t * v).collect();
        }
    }
    [project_segment(x, a, b), project_segment(x, b, c), project_segment(x, a, c)]
        .into_iter()
        .min_by(|p, q| dist(x, p).total_cmp(&dist(x, q)))
        .unwrap()
}

fn project_polygon(x: &[f64], v: &[Point]) -> Point {
    let n = v.len();
    let inside = (0..n).all(|i| {
        let (a, b) = (&v[i], &v[(i + 1) % n]);
        let cross = (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]);
        cross >= 0.0
    });
    if inside {
        return x.to_vec();
    }
    (0..n).map(|i| project_segment(x, &v[i], &v[(i + 1) % n])).min_by(|p, q| dist(x, p).total_cmp(&dist(x, q))).unwrap()
}

fn project_l1(x: &[f64], p: &VPolytope) -> Projection {
    let v = p.vertices();
    let (k, d) = (v.len(), x.len());
    let mut c = vec![0.0; k + d];
    for ci in c.iter_mut().skip(k) {
        *ci = 1.0;
    }
    let mut lp = LinearProgram::new(c);
    for j in 0..d {
        let mut row = vec![0.0; k + d];
        for i in 0..k {
            row[i] = v[i][j];
        }
        row[k + j] = -1.0;
        let mut neg: Vec<f64> = row.iter().map(|a| -a).collect();
        neg[k + j] = -1.0;
        lp.le(row, x[j]).le(neg, -x[j]);
    }
    let mut ones = vec![0.0; k + d];
    for o in ones.iter_mut().take(k) {
        *o = 1.0;
    }
    lp.eq(ones, 1.0);
    match lp.solve() {
        LpOutcome::Optimal { x: sol, .. } => {
            let w: Point = (0..d).map(|j| (0..k).map(|i| sol[i] * v[i][j]).sum()).collect();
            Projection { dist: super::dist1(x, &w), witness: Some(w) }
        }
        _ => {
            // the LP is always feasible and bounded; fall back to the nearest vertex
            let best = v.iter().min_by(|a, b| super::dist1(x, a).total_cmp(&super::dist1(x, b))).unwrap();
            Projection { dist: super::dist1(x, best), witness: Some(best.clone()) }
        }
    }
}

struct Wolfe {
    x: Point,
    support: Vec<usize>,
    weights: Vec<f64>,
    decided: Option<bool>,
}

const MAX_MAJOR: usize = 2_000;
const MAX_MINOR: usize = 200;

/// Wolfe's minimum-norm-point algorithm on the origin-shifted vertex set `q`.
///
/// With a threshold `r`, returns as soon as `‖x‖ ≤ r` (feasible upper bound) or the
/// separating-hyperplane lower bound exceeds `r`.
fn wolfe(q: &[Point], threshold: Option<f64>) -> Wolfe {
    let scale = q.iter().map(|v| dot(v, v)).fold(0.0f64, f64::max).max(1e-300);
    let i0 = (0..q.len()).min_by(|&a, &b| dot(&q[a], &q[a]).total_cmp(&dot(&q[b], &q[b]))).unwrap();
    let mut support = vec![i0];
    let mut weights = vec![1.0];
    let mut x = q[i0].clone();
    let mut decided = None;
    for _ in 0..MAX_MAJOR {
        let xx = dot(&x, &x);
        let (j, xq) = (0..q.len()).map(|i| (i, dot(&x, &q[i]))).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        if let Some(r) = threshold {
            let upper = xx.sqrt();
            if upper <= r {
                decided = Some(true);
                break;
            }
            if xq > 0.0 && xq / upper > r {
                decided = Some(false);
                break;
            }
        }
        if xx <= 1e-30 * scale || xx - xq <= 1e-13 * scale || support.contains(&j) {
            break;
        }
        support.push(j);
        weights.push(0.0);
        let mut singular = false;
        for _ in 0..MAX_MINOR {
            let Some(alpha) = affine_minimizer(q, &support) else {
                singular = true;
                break;
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0f64;
            let mut hit = None;
            for k in 0..support.len() {
                if alpha[k] <= 1e-14 {
                    let denom = weights[k] - alpha[k];
                    if denom > 0.0 && weights[k] / denom <= theta {
                        theta = weights[k] / denom;
                        hit = Some(k);
                    }
                }
            }
            for k in 0..support.len() {
                weights[k] = theta * alpha[k] + (1.0 - theta) * weights[k];
            }
            if let Some(k) = hit {
                weights[k] = 0.0;
            }
            let mut k = 0;
            while k < support.len() {
                if weights[k] <= 1e-14 {
                    support.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            for w in weights.iter_mut() {
                *w /= total;
            }
        }
        if singular {
            support.pop();
            weights.pop();
            break;
        }
        x = combine(q, &support, &weights);
    }
    Wolfe { x, support, weights, decided }
}

fn combine(q: &[Point], support: &[usize], weights: &[f64]) -> Point {
    let mut x = vec![0.0; q[0].len()];
    for (&i, &w) in support.iter().zip(weights) {
        for (xk, qk) in x.iter_mut().zip(&q[i]) {
            *xk += w * qk;
        }
    }
    x
}

/// Minimizer of `‖Σ α_i q_i‖` over the affine hull of the support (`Σα = 1`).
fn affine_minimizer(q: &[Point], support: &[usize]) -> Option<Vec<f64>> {
    let s = support.len();
    let mut a = vec![vec![0.0; s + 1]; s + 1];
    for i in 0..s {
        for j in i..s {
            let g = dot(&q[support[i]], &q[support[j]]);
            a[i][j] = g;
            a[j][i] = g;
        }
        a[i][s] = 1.0;
        a[s][i] = 1.0;
    }
    let mut b = vec![0.0; s + 1];
    b[s] = 1.0;
    let sol = super::solve_linear(a, b)?;
    Some(sol[..s].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn projection_onto_simplex_facet() {
        let p = VPolytope::simplex(2);
        let r = distance_to_hull(&[1.0, 1.0], &p, Norm::L2);
        assert!((r.dist - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(dist(r.witness.as_ref().unwrap(), &[0.5, 0.5]) < 1e-12);
        assert_eq!(distance_to_hull(&[0.2, 0.2], &p, Norm::L2).dist, 0.0);
        let e = distance_to_hull(&[0.2, 0.2], &VPolytope::empty(2), Norm::L2);
        assert!(e.dist.is_infinite() && e.witness.is_none());
    }

    #[test]
    fn wolfe_matches_barycentric_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let verts: Vec<Point> = (0..6).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
            let x: Point = (0..3).map(|_| rng.random::<f64>() * 2.0 - 0.5).collect();
            let p = VPolytope::new(3, verts.clone());
            let d = distance_to_hull(&x, &p, Norm::L2).dist;
            // brute force over a barycentric grid on the 6 vertices (step 1/10)
            let mut best = f64::INFINITY;
            let n = 10;
            let mut stack = vec![(0usize, n, vec![0.0; 3])];
            while let Some((i, left, acc)) = stack.pop() {
                if i == 5 {
                    let pt: Point = (0..3).map(|k| acc[k] + left as f64 / n as f64 * verts[5][k]).collect();
                    best = best.min(dist(&pt, &x));
                    continue;
                }
                for c in 0..=left {
                    let w = c as f64 / n as f64;
                    let pt: Point = (0..3).map(|k| acc[k] + w * verts[i][k]).collect();
                    stack.push((i + 1, left - c, pt));
                }
            }
            assert!(d <= best + 1e-9, "wolfe {d} above grid {best}");
            assert!(best - d <= 0.25, "grid too far from wolfe");
        }
    }

    #[test]
    fn threshold_test_agrees_with_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let verts: Vec<Point> = (0..7).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
            let p = VPolytope::new(4, verts);
            let x: Point = (0..4).map(|_| rng.random::<f64>() * 1.5 - 0.25).collect();
            let d = distance_to_hull(&x, &p, Norm::L2).dist;
            let r = rng.random::<f64>() * 0.5;
            if (d - r).abs() > 1e-9 {
                assert_eq!(distance_within(&x, &p, r), d <= r);
            }
        }
    }

    #[test]
    fn l1_distance_to_segment() {
        let p = VPolytope::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        let r = distance_to_hull(&[0.5, 0.3], &p, Norm::L1);
        assert!((r.dist - 0.3).abs() < 1e-9);
        let r = distance_to_hull(&[1.5, 0.5], &p, Norm::L1);
        assert!((r.dist - 1.0).abs() < 1e-9);
    }

    #[test]
    fn min_norm_point_of_square_offset() {
        let pts = vec![vec![1.0, -1.0], vec![1.0, 1.0], vec![3.0, 1.0], vec![3.0, -1.0]];
        let (x, w) = min_norm_point(&pts);
        assert!(dist(&x, &[1.0, 0.0]) < 1e-12);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
