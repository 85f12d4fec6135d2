//! Dense two-phase simplex for the small linear programs used by the geometry layer.
//!
//! Problems are stated as: minimize `c·x` subject to `A_ub x ≤ b_ub`, `A_eq x = b_eq`, `x ≥ 0`.
//! Bland's rule is used throughout, so degenerate instances cannot cycle.

const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(c: Vec<f64>) -> Self {
        LinearProgram { c, ..Default::default() }
    }

    pub fn le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.a_ub.push(row);
        self.b_ub.push(rhs);
        self
    }

    pub fn eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
        self
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.c)
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_orig: usize,
    n_total: usize,
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.c.len();
        let m_ub = lp.a_ub.len();
        let m_eq = lp.a_eq.len();
        let m = m_ub + m_eq;
        let n_slack = m_ub;
        // artificial variables: one per row whose slack cannot start in the basis
        let needs_art: Vec<bool> = (0..m).map(|i| if i < m_ub { lp.b_ub[i] < 0.0 } else { true }).collect();
        let n_art = needs_art.iter().filter(|&&b| b).count();
        let artificial_start = n + n_slack;
        let n_total = artificial_start + n_art;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut art = artificial_start;
        for i in 0..m {
            let mut row = vec![0.0; n_total + 1];
            let (coeffs, rhs) =
                if i < m_ub { (&lp.a_ub[i], lp.b_ub[i]) } else { (&lp.a_eq[i - m_ub], lp.b_eq[i - m_ub]) };
            row[..n].copy_from_slice(&coeffs[..n]);
            if i < m_ub {
                row[n + i] = 1.0;
            }
            row[n_total] = rhs;
            if rhs < 0.0 {
                for v in row.iter_mut() {
                    *v = -*v;
                }
            }
            if needs_art[i] {
                row[art] = 1.0;
                basis.push(art);
                art += 1;
            } else {
                basis.push(n + i);
            }
            rows.push(row);
        }
        Tableau { rows, basis, n_orig: n, n_total, artificial_start }
    }

    fn run(mut self, c: &[f64]) -> LpOutcome {
        if self.artificial_start < self.n_total {
            let mut phase1 = vec![0.0; self.n_total];
            for v in phase1.iter_mut().skip(self.artificial_start) {
                *v = 1.0;
            }
            let allowed = vec![true; self.n_total];
            if self.optimize(&phase1, &allowed).is_err() {
                return LpOutcome::Infeasible;
            }
            let infeas: f64 = self
                .basis
                .iter()
                .zip(&self.rows)
                .filter(|(&b, _)| b >= self.artificial_start)
                .map(|(_, r)| r[self.n_total])
                .sum();
            let scale = 1.0 + self.rows.iter().map(|r| r[self.n_total].abs()).fold(0.0, f64::max);
            if infeas > 1e-9 * scale {
                return LpOutcome::Infeasible;
            }
            self.drive_out_artificials();
        }
        let mut cost = vec![0.0; self.n_total];
        cost[..self.n_orig].copy_from_slice(c);
        let allowed: Vec<bool> = (0..self.n_total).map(|j| j < self.artificial_start).collect();
        if self.optimize(&cost, &allowed).is_err() {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![0.0; self.n_orig];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_orig {
                x[b] = self.rows[i][self.n_total].max(0.0);
            }
        }
        let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { x, value }
    }

    /// Returns `Err(())` on unboundedness.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<(), ()> {
        let rhs = self.n_total;
        for _ in 0..MAX_PIVOTS {
            let mut entering = None;
            for j in 0..self.n_total {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut r = cost[j];
                for (i, &b) in self.basis.iter().enumerate() {
                    r -= cost[b] * self.rows[i][j];
                }
                if r < -1e-10 {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[j] > PIVOT_TOL {
                    let ratio = row[rhs] / row[j];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - 1e-12 || (ratio <= best + 1e-12 && self.basis[i] < self.basis[k]) {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((i, _)) = leave else { return Err(()) };
            self.pivot(i, j);
        }
        Ok(())
    }

    fn pivot(&mut self, i: usize, j: usize) {
        let p = self.rows[i][j];
        for v in self.rows[i].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[i].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k != i {
                let f = row[j];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        self.basis[i] = j;
    }

    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.artificial_start {
                let col = (0..self.artificial_start).find(|&j| self.rows[i][j].abs() > 1e-9);
                match col {
                    Some(j) => self.pivot(i, j),
                    None => {
                        // redundant equality row
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}
