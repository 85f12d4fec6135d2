//! Test-side oracles that share no code with the library's geometry.
#![allow(dead_code)]

use polylearn::partition::Uepp;

/// Distance from `x` to `conv(pts)` by away-step Frank-Wolfe; an upper bound on the true
/// distance that is tight for polytopes after enough iterations.
pub fn hull_distance(x: &[f64], pts: &[Vec<f64>]) -> f64 {
    if pts.is_empty() {
        return f64::INFINITY;
    }
    let d = x.len();
    if d == 1 {
        let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        return (lo - x[0]).max(x[0] - hi).max(0.0);
    }
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
    let start = (0..pts.len()).min_by(|&i, &j| sq(&pts[i], x).total_cmp(&sq(&pts[j], x))).unwrap();
    let mut lam = vec![0.0; pts.len()];
    lam[start] = 1.0;
    let mut p = pts[start].clone();
    for _ in 0..20_000 {
        let g: Vec<f64> = p.iter().zip(x).map(|(a, b)| a - b).collect();
        let dotg = |v: &[f64]| v.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        let gp = dotg(&p);
        let s = (0..pts.len()).min_by(|&i, &j| dotg(&pts[i]).total_cmp(&dotg(&pts[j]))).unwrap();
        let a =
            (0..pts.len()).filter(|&i| lam[i] > 0.0).max_by(|&i, &j| dotg(&pts[i]).total_cmp(&dotg(&pts[j]))).unwrap();
        let fw_gap = gp - dotg(&pts[s]);
        if fw_gap < 1e-15 {
            break;
        }
        let away_gap = dotg(&pts[a]) - gp;
        let (dir, max_step, fw): (Vec<f64>, f64, bool) = if fw_gap >= away_gap {
            (pts[s].iter().zip(&p).map(|(v, q)| v - q).collect(), 1.0, true)
        } else {
            let l = lam[a];
            (p.iter().zip(&pts[a]).map(|(q, v)| q - v).collect(), if l < 1.0 { l / (1.0 - l) } else { 1e12 }, false)
        };
        let dd: f64 = dir.iter().map(|v| v * v).sum();
        if dd == 0.0 {
            break;
        }
        let step = (-dotg(&dir) / dd).clamp(0.0, max_step);
        if fw {
            lam.iter_mut().for_each(|l| *l *= 1.0 - step);
            lam[s] += step;
        } else {
            lam.iter_mut().for_each(|l| *l *= 1.0 + step);
            lam[a] -= step;
            if lam[a] < 1e-15 {
                lam[a] = 0.0;
            }
        }
        p = (0..d).map(|k| pts.iter().zip(&lam).map(|(v, l)| v[k] * l).sum()).collect();
    }
    sq(&p, x).sqrt()
}

/// Grid of `Δ^m` with `steps` cells per edge, enumerated directly.
pub fn simplex_grid(m: usize, steps: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; m];
    loop {
        if cur.iter().sum::<usize>() <= steps {
            out.push(cur.iter().map(|&c| c as f64 / steps as f64).collect());
        }
        let mut k = 0;
        loop {
            if k == m {
                return out;
            }
            cur[k] += 1;
            if cur[k] <= steps {
                break;
            }
            cur[k] = 0;
            k += 1;
        }
    }
}

/// Labels whose affine value is within `tol` of the maximum at `y`.
pub fn argmax_labels(u: &Uepp, y: &[f64], tol: f64) -> Vec<usize> {
    let v: Vec<f64> = (0..u.n()).map(|i| u.b()[i] + u.a()[i].iter().zip(y).map(|(a, b)| a * b).sum::<f64>()).collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..v.len()).filter(|&i| v[i] >= max - tol).collect()
}

/// Largest distance from a grid point of `Δ^m` to the nearest class hull.
pub fn worst_grid_gap(classes: &[Vec<Vec<f64>>], m: usize, steps: usize) -> f64 {
    simplex_grid(m, steps)
        .iter()
        .map(|x| classes.iter().map(|c| hull_distance(x, c)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Points of every label in the class of each root.
pub fn class_points(l: &polylearn::labelling::EmpiricalLabelling) -> Vec<Vec<Vec<f64>>> {
    l.classes().iter().map(|&r| l.members(r).iter().flat_map(|&i| l.points(i).to_vec()).collect()).collect()
}

/// Every stored point carries one of its true labels.
pub fn labels_sound(u: &Uepp, l: &polylearn::labelling::EmpiricalLabelling) -> bool {
    (0..u.n()).all(|i| l.points(i).iter().all(|p| argmax_labels(u, p, 1e-9).contains(&i)))
}

/// `full(u)ᵀ M full(v)` written out from the matrices.
pub fn bilinear(mat: &[Vec<f64>], u: &[f64], v: &[f64]) -> f64 {
    let uf: Vec<f64> = std::iter::once(1.0 - u.iter().sum::<f64>()).chain(u.iter().copied()).collect();
    let vf: Vec<f64> = std::iter::once(1.0 - v.iter().sum::<f64>()).chain(v.iter().copied()).collect();
    let mut s = 0.0;
    for i in 0..uf.len() {
        for j in 0..vf.len() {
            s += uf[i] * mat[i][j] * vf[j];
        }
    }
    s
}

/// Largest supported regret of a bimatrix profile, from the matrices.
pub fn bimatrix_regret(a: &[Vec<f64>], b: &[Vec<f64>], u: &[f64], v: &[f64]) -> f64 {
    let (m, n) = (a.len(), a[0].len());
    let pure = |d: usize, i: usize| -> Vec<f64> {
        let mut e = vec![0.0; d - 1];
        if i > 0 {
            e[i - 1] = 1.0;
        }
        e
    };
    let row: Vec<f64> = (0..m).map(|i| bilinear(a, &pure(m, i), v)).collect();
    let col: Vec<f64> = (0..n).map(|j| bilinear(b, u, &pure(n, j))).collect();
    let uf: Vec<f64> = std::iter::once(1.0 - u.iter().sum::<f64>()).chain(u.iter().copied()).collect();
    let vf: Vec<f64> = std::iter::once(1.0 - v.iter().sum::<f64>()).chain(v.iter().copied()).collect();
    let rb = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cb = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let r = (0..m).filter(|&i| uf[i] > 1e-9).map(|i| rb - row[i]).fold(0.0, f64::max);
    let c = (0..n).filter(|&j| vf[j] > 1e-9).map(|j| cb - col[j]).fold(0.0, f64::max);
    r.max(c)
}

/// Largest supported regret of a profile of a tensor game given by `u(i, a)`.
pub fn tensor_regret(n: usize, k: usize, u: &dyn Fn(usize, &[usize]) -> f64, x: &[Vec<f64>]) -> f64 {
    let fulls: Vec<Vec<f64>> =
        x.iter().map(|p| std::iter::once(1.0 - p.iter().sum::<f64>()).chain(p.iter().copied()).collect()).collect();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mut vals = vec![0.0; k];
        for idx in 0..k.pow(n as u32) {
            let mut a = vec![0; n];
            let mut t = idx;
            for s in (0..n).rev() {
                a[s] = t % k;
                t /= k;
            }
            let w: f64 = (0..n).filter(|&j| j != i).map(|j| fulls[j][a[j]]).product();
            vals[a[i]] += w * u(i, &a);
        }
        let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for r in 0..k {
            if fulls[i][r] > 1e-9 {
                worst = worst.max(best - vals[r]);
            }
        }
    }
    worst
}

pub fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}
