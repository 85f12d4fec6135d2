use super::lp::{LinearProgram, LpOutcome};
use super::{HPolytope, Point, ETA};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Chebyshev {
    /// Thickness `τ`: radius of the largest inscribed ℓ2 ball.
    pub radius: f64,
    /// A deepest point; `None` for an empty polytope.
    pub center: Option<Point>,
}

/// Chebyshev center by the LP `max r s.t. normal·x ≥ offset + r` over unit normals.
pub fn chebyshev(p: &HPolytope) -> Result<Chebyshev> {
    if p.is_trivially_infeasible() {
        return Ok(Chebyshev { radius: 0.0, center: None });
    }
    let d = p.dim();
    if d == 0 {
        return Ok(Chebyshev { radius: 0.0, center: Some(Vec::new()) });
    }
    // variables: x+ (d), x- (d), r
    let mut c = vec![0.0; 2 * d + 1];
    c[2 * d] = -1.0;
    let mut lp = LinearProgram::new(c);
    for (normal, offset) in p.rows() {
        let mut row = vec![0.0; 2 * d + 1];
        for k in 0..d {
            row[k] = -normal[k];
            row[d + k] = normal[k];
        }
        row[2 * d] = 1.0;
        lp.le(row, -offset);
    }
    match lp.solve() {
        LpOutcome::Infeasible => Ok(Chebyshev { radius: 0.0, center: None }),
        LpOutcome::Unbounded => Err(Error::Unbounded),
        LpOutcome::Optimal { x, .. } => {
            let center: Point = (0..d).map(|k| x[k] - x[d + k]).collect();
            let r = x[2 * d];
            Ok(Chebyshev { radius: if r <= ETA { 0.0 } else { r }, center: Some(center) })
        }
    }
}

/// Thickness estimate for an arbitrary set given by a membership predicate: the largest
/// distance from an inside grid point to the nearest outside grid point on a grid of the
/// given spacing over the box `[lo, hi]` padded by one cell. Accurate to about `spacing·√d`.
pub fn grid_thickness(contains: &dyn Fn(&[f64]) -> bool, lo: &[f64], hi: &[f64], spacing: f64) -> f64 {
    let d = lo.len();
    let dims: Vec<usize> = (0..d).map(|k| ((hi[k] - lo[k]) / spacing).ceil() as usize + 3).collect();
    let total: usize = dims.iter().product();
    let mut field = vec![0.0f64; total];
    let mut any_inside = false;
    let mut idx = vec![0usize; d];
    for cell in field.iter_mut() {
        let p: Point = (0..d).map(|k| lo[k] + (idx[k] as f64 - 1.0) * spacing).collect();
        if contains(&p) {
            *cell = BIG;
            any_inside = true;
        }
        for k in 0..d {
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    if !any_inside {
        return 0.0;
    }
    let mut stride = 1;
    for k in 0..d {
        let n = dims[k];
        let mut line = vec![0.0; n];
        let mut out = vec![0.0; n];
        for base in 0..total {
            if (base / stride) % n != 0 {
                continue;
            }
            for i in 0..n {
                line[i] = field[base + i * stride];
            }
            edt_1d(&line, &mut out);
            for i in 0..n {
                field[base + i * stride] = out[i];
            }
        }
        stride *= n;
    }
    field.iter().filter(|v| **v < BIG / 2.0).fold(0.0f64, |a, v| a.max(*v)).sqrt() * spacing
}

const BIG: f64 = 1e30;

/// Felzenszwalb–Huttenlocher squared distance transform of a sampled function.
fn edt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let qf = q as f64;
        loop {
            let vk = v[k] as f64;
            let s = ((f[q] + qf * qf) - (f[v[k]] + vk * vk)) / (2.0 * qf - 2.0 * vk);
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                v[0] = q;
                z[1] = f64::INFINITY;
                break;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let dq = q as f64 - v[k] as f64;
        *o = dq * dq + f[v[k]];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dist, HPolytope};

    #[test]
    fn chebyshev_of_triangle() {
        let c = chebyshev(&HPolytope::simplex(2)).unwrap();
        let lam = 1.0 / (2.0 + 2f64.sqrt());
        assert!((c.radius - lam).abs() < 1e-9);
        assert!(dist(c.center.as_ref().unwrap(), &[lam, lam]) < 1e-7);
    }

    #[test]
    fn chebyshev_degenerate_and_unbounded() {
        let seg = HPolytope::new(
            2,
            vec![(vec![0.0, 1.0], 0.0), (vec![0.0, -1.0], 0.0), (vec![1.0, 0.0], 0.0), (vec![-1.0, 0.0], -1.0)],
        );
        assert_eq!(chebyshev(&seg).unwrap().radius, 0.0);
        let half = HPolytope::new(2, vec![(vec![1.0, 0.0], 0.0)]);
        assert_eq!(chebyshev(&half), Err(Error::Unbounded));
        let empty = HPolytope::new(1, vec![(vec![1.0], 1.0), (vec![-1.0], 0.0)]);
        let c = chebyshev(&empty).unwrap();
        assert_eq!(c.radius, 0.0);
        assert!(c.center.is_none());
    }

    #[test]
    fn grid_thickness_of_disc_and_square() {
        let disc = |p: &[f64]| p[0] * p[0] + p[1] * p[1] <= 0.25;
        let t = grid_thickness(&disc, &[-0.5, -0.5], &[0.5, 0.5], 0.01);
        assert!((t - 0.5).abs() < 0.03, "{t}");
        let sq = |p: &[f64]| p.iter().all(|v| (0.0..=1.0).contains(v));
        let t = grid_thickness(&sq, &[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], 0.05);
        assert!((t - 0.5).abs() < 0.1, "{t}");
    }
}
