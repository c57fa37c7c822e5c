//! Dense two-phase simplex for box-constrained variables with Bland's
//! anti-cycling rule. Small instances only; no sparsity, no scaling.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-9;

/// Maximize `objective . x` subject to `cut.0 . x >= cut.1` for every cut
/// and `lo <= x <= hi` elementwise. Bounds must be finite.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cuts: Vec<(Vec<f64>, f64)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    ncols: usize,
    nstruct: usize,
    rows: Vec<Vec<f64>>,
    x_basic: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<Status>,
    upper: Vec<f64>, // lower is 0 for every column after shifting
    blocked: Vec<bool>,
}

impl Tableau {
    fn value(&self, j: usize) -> f64 {
        match self.status[j] {
            Status::AtLower => 0.0,
            Status::AtUpper => self.upper[j],
            Status::Basic => {
                let r = self.basis.iter().position(|&b| b == j).unwrap();
                self.x_basic[r]
            }
        }
    }

    fn reduced_costs(&self, c: &[f64]) -> Vec<f64> {
        let m = self.rows.len();
        let mut d = c.to_vec();
        for i in 0..m {
            let cb = c[self.basis[i]];
            if cb != 0.0 {
                for j in 0..self.ncols {
                    d[j] -= cb * self.rows[i][j];
                }
            }
        }
        d
    }

    /// One phase of bounded simplex. Returns Ok(()) at optimality.
    fn optimize(&mut self, c: &[f64]) -> Result<()> {
        let m = self.rows.len();
        let mut d = self.reduced_costs(c);
        loop {
            // Bland: smallest-index eligible entering column
            let mut enter = None;
            for j in 0..self.ncols {
                if self.blocked[j] || self.status[j] == Status::Basic {
                    continue;
                }
                let favorable = match self.status[j] {
                    Status::AtLower => d[j] > COST_TOL,
                    Status::AtUpper => d[j] < -COST_TOL,
                    Status::Basic => false,
                };
                if favorable {
                    enter = Some(j);
                    break;
                }
            }
            let Some(je) = enter else { return Ok(()) };
            let sigma = if self.status[je] == Status::AtLower { 1.0 } else { -1.0 };
            // ratio test: how far the entering variable can move before a
            // basic variable hits a bound or the entering one flips bounds
            let mut t_max = self.upper[je]; // bound flip distance
            let mut leave: Option<(usize, Status)> = None; // (row, bound hit)
            for i in 0..m {
                let w = sigma * self.rows[i][je];
                let (t, hit) = if w > PIVOT_TOL {
                    ((self.x_basic[i] / w).max(0.0), Status::AtLower)
                } else if w < -PIVOT_TOL && self.upper[self.basis[i]].is_finite() {
                    (
                        ((self.upper[self.basis[i]] - self.x_basic[i]) / (-w)).max(0.0),
                        Status::AtUpper,
                    )
                } else {
                    continue;
                };
                // Bland among ties: keep the row whose basic var has the
                // smallest index
                let take = match leave {
                    None => t < t_max - PIVOT_TOL,
                    Some((r, _)) => {
                        t < t_max - PIVOT_TOL
                            || (t <= t_max + PIVOT_TOL && self.basis[i] < self.basis[r])
                    }
                };
                if take {
                    t_max = t_max.min(t);
                    leave = Some((i, hit));
                }
            }
            if t_max.is_infinite() {
                return Err(Error::Lp("unbounded direction".into()));
            }
            // move basic values
            for i in 0..m {
                self.x_basic[i] -= sigma * t_max * self.rows[i][je];
            }
            match leave {
                None => {
                    // bound flip, no basis change
                    self.status[je] = if sigma > 0.0 { Status::AtUpper } else { Status::AtLower };
                }
                Some((r, hit)) => {
                    let jl = self.basis[r];
                    let new_val = match self.status[je] {
                        Status::AtLower => sigma * t_max,
                        Status::AtUpper => self.upper[je] - t_max,
                        Status::Basic => unreachable!(),
                    };
                    // pivot on (r, je)
                    let piv = self.rows[r][je];
                    if piv.abs() < PIVOT_TOL {
                        return Err(Error::Lp("zero pivot".into()));
                    }
                    let inv = 1.0 / piv;
                    for v in self.rows[r].iter_mut() {
                        *v *= inv;
                    }
                    for i in 0..m {
                        if i == r {
                            continue;
                        }
                        let f = self.rows[i][je];
                        if f != 0.0 {
                            for j in 0..self.ncols {
                                self.rows[i][j] -= f * self.rows[r][j];
                            }
                        }
                    }
                    let f = d[je];
                    if f != 0.0 {
                        for j in 0..self.ncols {
                            d[j] -= f * self.rows[r][j];
                        }
                    }
                    self.status[jl] = hit;
                    self.status[je] = Status::Basic;
                    self.basis[r] = je;
                    self.x_basic[r] = new_val;
                }
            }
        }
    }
}

/// Exact simplex optimum. Returns the optimal point.
pub fn lp_solve(lp: &LinearProgram) -> Result<Vec<f64>> {
    let n = lp.objective.len();
    if lp.lo.len() != n || lp.hi.len() != n {
        return Err(Error::Lp("bound vectors do not match objective length".into()));
    }
    for j in 0..n {
        if !lp.lo[j].is_finite() || !lp.hi[j].is_finite() || lp.lo[j] > lp.hi[j] + 1e-12 {
            return Err(Error::Lp(format!("invalid box [{}, {}]", lp.lo[j], lp.hi[j])));
        }
    }
    let m = lp.cuts.len();
    // shift x = lo + y with y in [0, hi - lo]; cuts become -g.y <= -(h - g.lo)
    let ncols = n + 2 * m; // structural, slack, artificial
    let mut rows = vec![vec![0.0; ncols]; m];
    let mut x_basic = vec![0.0; m];
    let mut basis = vec![0usize; m];
    let mut status = vec![Status::AtLower; ncols];
    let mut upper = vec![f64::INFINITY; ncols];
    let mut blocked = vec![false; ncols];
    for j in 0..n {
        upper[j] = lp.hi[j] - lp.lo[j];
    }
    let mut any_artificial = false;
    for (i, (g, h)) in lp.cuts.iter().enumerate() {
        if g.len() != n {
            return Err(Error::Lp("cut length mismatch".into()));
        }
        let shift: f64 = g.iter().zip(&lp.lo).map(|(a, b)| a * b).sum();
        let mut b = -(h - shift);
        let mut coef: Vec<f64> = g.iter().map(|&v| -v).collect();
        let mut slack_sign = 1.0;
        if b < 0.0 {
            for v in coef.iter_mut() {
                *v = -*v;
            }
            b = -b;
            slack_sign = -1.0;
        }
        rows[i][..n].copy_from_slice(&coef);
        rows[i][n + i] = slack_sign;
        rows[i][n + m + i] = 1.0;
        if slack_sign > 0.0 {
            // slack itself is a feasible basic variable
            basis[i] = n + i;
            status[n + i] = Status::Basic;
            blocked[n + m + i] = true;
            upper[n + m + i] = 0.0;
        } else {
            basis[i] = n + m + i;
            status[n + m + i] = Status::Basic;
            any_artificial = true;
        }
        x_basic[i] = b;
    }
    let mut t = Tableau { ncols, nstruct: n, rows, x_basic, basis, status, upper, blocked };
    if any_artificial {
        let mut c1 = vec![0.0; ncols];
        for j in n + m..ncols {
            if !t.blocked[j] {
                c1[j] = -1.0;
            }
        }
        t.optimize(&c1)?;
        let infeas: f64 = (n + m..ncols).map(|j| t.value(j)).sum();
        if infeas > 1e-7 {
            return Err(Error::Infeasible);
        }
        // freeze artificials at zero for phase 2
        for j in n + m..ncols {
            t.blocked[j] = true;
            t.upper[j] = 0.0;
        }
    }
    let mut c2 = vec![0.0; ncols];
    c2[..n].copy_from_slice(&lp.objective);
    t.optimize(&c2)?;
    let x: Vec<f64> = (0..t.nstruct).map(|j| lp.lo[j] + t.value(j)).collect();
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(obj: &[f64], lo: &[f64], hi: &[f64], cuts: &[(Vec<f64>, f64)]) -> Result<Vec<f64>> {
        lp_solve(&LinearProgram {
            objective: obj.to_vec(),
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            cuts: cuts.to_vec(),
        })
    }

    #[test]
    fn box_only() {
        let x = solve(&[1.0], &[0.0], &[1.0], &[]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9);
        let x = solve(&[-2.0, 3.0], &[-1.0, 0.0], &[1.0, 2.0], &[]).unwrap();
        assert!((x[0] + 1.0).abs() < 1e-9 && (x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn single_cut() {
        // maximize x + y, x,y in [0,1], x + y <= 1 (i.e. -x - y >= -1)
        let x = solve(&[1.0, 1.0], &[0.0; 2], &[1.0; 2], &[(vec![-1.0, -1.0], -1.0)]).unwrap();
        assert!((x[0] + x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn binding_lower_cut() {
        // maximize -x with x >= 0.3
        let x = solve(&[-1.0], &[0.0], &[1.0], &[(vec![1.0], 0.3)]).unwrap();
        assert!((x[0] - 0.3).abs() < 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        // x >= 2 with x <= 1
        assert!(matches!(
            solve(&[1.0], &[0.0], &[1.0], &[(vec![1.0], 2.0)]),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn degenerate_duplicate_cuts_terminate() {
        // many duplicate and redundant cuts around the same optimum
        let mut cuts = Vec::new();
        for _ in 0..40 {
            cuts.push((vec![-1.0, -1.0], -1.0));
            cuts.push((vec![-1.0, 0.0], -0.5));
            cuts.push((vec![0.0, -1.0], -0.5));
        }
        let x = solve(&[1.0, 1.0], &[0.0; 2], &[1.0; 2], &cuts).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-8 && (x[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn mixed_signs_and_shifted_bounds() {
        // maximize 2x - y over x in [-1, 2], y in [1, 3], x - y >= -1
        let x = solve(&[2.0, -1.0], &[-1.0, 1.0], &[2.0, 3.0], &[(vec![1.0, -1.0], -1.0)]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
    }
}
