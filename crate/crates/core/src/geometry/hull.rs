use itertools::Itertools;

use super::{dist, distance_within, dot, norm, HPolytope, Point, VPolytope, ETA};

/// Affine dimension of a non-empty point set, with rank decided at tolerance `ETA`.
pub fn affine_dim(points: &[Point]) -> usize {
    affine_basis(points).len()
}

/// Orthonormal basis of the affine hull directions, anchored at `points[0]`.
fn affine_basis(points: &[Point]) -> Vec<Point> {
    let Some(origin) = points.first() else { return Vec::new() };
    let mut basis: Vec<Point> = Vec::new();
    let d = origin.len();
    loop {
        if basis.len() == d {
            return basis;
        }
        // pick the point with the largest residual to stay numerically stable
        let mut best: Option<(f64, Point)> = None;
        for p in points {
            let mut r: Point = p.iter().zip(origin).map(|(a, b)| a - b).collect();
            for b in &basis {
                let c = dot(&r, b);
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= c * bi;
                }
            }
            let len = dot(&r, &r).sqrt();
            if best.as_ref().is_none_or(|(l, _)| len > *l) {
                best = Some((len, r));
            }
        }
        match best {
            Some((len, r)) if len > ETA => basis.push(r.iter().map(|v| v / len).collect()),
            _ => return basis,
        }
    }
}

/// Canonical hull: duplicates and points within `ETA` of the hull of the others are removed.
pub fn convex_hull(points: &[Point]) -> VPolytope {
    let Some(first) = points.first() else { return VPolytope::empty(0) };
    let d = first.len();
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| {
        a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    pts.dedup_by(|a, b| dist(a, b) <= ETA);
    let basis = affine_basis(&pts);
    match basis.len() {
        0 => VPolytope::from_parts(d, vec![pts[0].clone()], Some(0), false),
        1 => {
            let u = &basis[0];
            let key = |p: &Point| dot(p, u);
            let lo = pts.iter().min_by(|a, b| key(a).total_cmp(&key(b))).unwrap().clone();
            let hi = pts.iter().max_by(|a, b| key(a).total_cmp(&key(b))).unwrap().clone();
            VPolytope::from_parts(d, vec![lo, hi], Some(1), false)
        }
        2 => {
            let o = pts[0].clone();
            let proj: Vec<[f64; 2]> = pts
                .iter()
                .map(|p| {
                    let r: Point = p.iter().zip(&o).map(|(a, b)| a - b).collect();
                    if d == 2 {
                        [p[0], p[1]]
                    } else {
                        [dot(&r, &basis[0]), dot(&r, &basis[1])]
                    }
                })
                .collect();
            let idx = monotone_chain(&proj);
            let verts = idx.into_iter().map(|i| pts[i].clone()).collect();
            VPolytope::from_parts(d, verts, Some(2), d == 2)
        }
        k => {
            let mut keep: Vec<Point> = pts;
            let mut i = 0;
            while i < keep.len() {
                let p = keep.swap_remove(i);
                let others = VPolytope::from_parts(d, keep.clone(), Some(k), false);
                if distance_within(&p, &others, ETA) {
                    continue;
                }
                keep.push(p);
                let last = keep.len() - 1;
                keep.swap(i, last);
                i += 1;
            }
            VPolytope::from_parts(d, keep, Some(k), false)
        }
    }
}

/// Facet form of a full-dimensional polytope; `None` otherwise.
pub fn facets(p: &VPolytope) -> Option<HPolytope> {
    if !p.is_full_dim() {
        return None;
    }
    let d = p.dim();
    let v = p.vertices();
    let mut rows: Vec<(Point, f64)> = Vec::new();
    for subset in (0..v.len()).combinations(d) {
        let origin = &v[subset[0]];
        let diffs: Vec<Point> =
            subset[1..].iter().map(|&i| v[i].iter().zip(origin).map(|(a, b)| a - b).collect()).collect();
        let basis = affine_basis(&std::iter::once(vec![0.0; d]).chain(diffs).collect::<Vec<_>>());
        if basis.len() < d - 1 {
            continue;
        }
        // the unit axis with the largest residual against the facet directions
        let normal = (0..d)
            .map(|k| {
                let mut r = vec![0.0; d];
                r[k] = 1.0;
                for b in &basis {
                    let c = dot(&r, b);
                    for (ri, bi) in r.iter_mut().zip(b) {
                        *ri -= c * bi;
                    }
                }
                r
            })
            .max_by(|a, b| norm(a).total_cmp(&norm(b)))?;
        let len = norm(&normal);
        let mut normal: Point = normal.iter().map(|x| x / len).collect();
        let mut offset = dot(&normal, origin);
        let side: Vec<f64> = v.iter().map(|w| dot(&normal, w) - offset).collect();
        let (below, above) = (side.iter().any(|s| *s < -ETA), side.iter().any(|s| *s > ETA));
        if below && above {
            continue;
        }
        if below {
            normal.iter_mut().for_each(|x| *x = -*x);
            offset = -offset;
        }
        if rows.iter().all(|(n, o)| dist(n, &normal) > 1e-9 || (o - offset).abs() > 1e-9) {
            rows.push((normal, offset));
        }
    }
    Some(HPolytope::new(d, rows))
}

/// Indices of the counter-clockwise hull, collinear points dropped.
fn monotone_chain(p: &[[f64; 2]]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[a][0].total_cmp(&p[b][0]).then(p[a][1].total_cmp(&p[b][1])));
    let turn = |o: usize, a: usize, b: usize| {
        let cross = (p[a][0] - p[o][0]) * (p[b][1] - p[o][1]) - (p[a][1] - p[o][1]) * (p[b][0] - p[o][0]);
        let chord = ((p[b][0] - p[o][0]).powi(2) + (p[b][1] - p[o][1]).powi(2)).sqrt();
        cross > ETA * chord.max(ETA)
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> =
            if pass == 0 { Box::new(order.iter()) } else { Box::new(order.iter().rev()) };
        for &i in iter {
            while hull.len() >= start + 2 && !turn(hull[hull.len() - 2], hull[hull.len() - 1], i) {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance_to_hull, Norm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<Point>) -> Vec<Point> {
        v.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap());
        v
    }

    #[test]
    fn collinear_midpoint_removed() {
        let h = convex_hull(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.0]]);
        assert_eq!(sorted(h.vertices().to_vec()), vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(h.affine_dim(), Some(1));
    }

    #[test]
    fn centroid_of_triangle_removed() {
        let mut pts = VPolytope::simplex(2).vertices().to_vec();
        pts.push(vec![1.0 / 3.0, 1.0 / 3.0]);
        let h = convex_hull(&pts);
        assert_eq!(h.vertices().len(), 3);
        let mut pts3 = VPolytope::simplex(3).vertices().to_vec();
        pts3.push(vec![0.2, 0.2, 0.2]);
        pts3.push(vec![0.1, 0.0, 0.3]);
        assert_eq!(convex_hull(&pts3).vertices().len(), 4);
    }

    #[test]
    fn random_hulls_contain_inputs_and_are_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=3 {
            for _ in 0..10 {
                let pts: Vec<Point> = (0..20).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
                let h = convex_hull(&pts);
                for p in &pts {
                    assert!(distance_to_hull(p, &h, Norm::L2).dist <= ETA);
                }
                let again = convex_hull(h.vertices());
                assert_eq!(sorted(again.vertices().to_vec()), sorted(h.vertices().to_vec()));
            }
        }
    }

    #[test]
    fn facets_of_simplex_and_square() {
        let h = facets(&VPolytope::simplex(3)).unwrap();
        assert_eq!(h.rows().len(), 4);
        assert!(h.contains(&[0.2, 0.2, 0.2], 0.0) && !h.contains(&[0.5, 0.5, 0.5], 1e-9));
        let sq = convex_hull(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(facets(&sq).unwrap().rows().len(), 4);
        assert!(facets(&VPolytope::new(2, vec![vec![0.0, 0.0], vec![1.0, 1.0]])).is_none());
    }

    #[test]
    fn planar_hull_in_three_dimensions() {
        let pts = vec![vec![0.0, 0.0, 0.5], vec![1.0, 0.0, 0.5], vec![0.0, 1.0, 0.5], vec![0.2, 0.2, 0.5]];
        let h = convex_hull(&pts);
        assert_eq!(h.affine_dim(), Some(2));
        assert_eq!(h.vertices().len(), 3);
    }
}
