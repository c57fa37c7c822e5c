//! Linear objectives under affine positive-semidefinite constraints, solved
//! by spectral cutting planes over a simplex core. Each violated PSD
//! constraint contributes the cut v† F(x) v >= 0 at its minimum eigenvector,
//! so the LP relaxation objective converges to the SDP optimum from above.

mod simplex;

pub use simplex::{lp_solve, LinearProgram};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{is_hermitian, min_eigenpair, CMat};

/// Affine matrix map x -> F0 + sum_i x_i F_i with Hermitian coefficients.
#[derive(Debug, Clone)]
pub struct AffineMatrix {
    pub f0: CMat,
    pub fs: Vec<CMat>,
}

impl AffineMatrix {
    pub fn eval(&self, x: &[f64]) -> CMat {
        let mut m = self.f0.clone();
        for (xi, fi) in x.iter().zip(&self.fs) {
            m += fi.scale(*xi);
        }
        m
    }
}

/// Maximize `objective . x` over the box subject to every affine map being
/// PSD.
#[derive(Debug, Clone)]
pub struct LinearMatrixProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub psd_constraints: Vec<AffineMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LmiStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone, Serialize)]
pub struct LmiSolution {
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub status: LmiStatus,
    pub max_psd_violation: f64,
    pub cuts_used: usize,
    pub iterations: usize,
}

pub const DEFAULT_PSD_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_CUTS: usize = 5000;

const PRUNE_AFTER: usize = 50;

struct Cut {
    coeffs: Vec<f64>,
    rhs: f64,
    inactive: usize,
}

impl LinearMatrixProgram {
    fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars
            || self.lo.len() != self.num_vars
            || self.hi.len() != self.num_vars
        {
            return Err(Error::Lp("vector lengths do not match num_vars".into()));
        }
        for c in &self.psd_constraints {
            if c.fs.len() != self.num_vars {
                return Err(Error::Lp("PSD constraint has wrong coefficient count".into()));
            }
            for f in std::iter::once(&c.f0).chain(&c.fs) {
                if !is_hermitian(f, 1e-9) {
                    return Err(Error::Lp("PSD constraint matrix is not Hermitian".into()));
                }
            }
        }
        Ok(())
    }
}

/// Cutting-plane solve. The returned objective is a valid upper bound on the
/// SDP optimum at every iteration and nonincreasing across iterations.
pub fn solve(prog: &LinearMatrixProgram, psd_tol: f64, max_cuts: usize) -> Result<LmiSolution> {
    prog.validate()?;
    let mut cuts: Vec<Cut> = Vec::new();
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        let lp = LinearProgram {
            objective: prog.objective.clone(),
            lo: prog.lo.clone(),
            hi: prog.hi.clone(),
            cuts: cuts.iter().map(|c| (c.coeffs.clone(), c.rhs)).collect(),
        };
        let x = match lp_solve(&lp) {
            Ok(x) => x,
            Err(Error::Infeasible) => {
                return Ok(LmiSolution {
                    x: vec![0.0; prog.num_vars],
                    objective_value: f64::NEG_INFINITY,
                    status: LmiStatus::Infeasible,
                    max_psd_violation: f64::NAN,
                    cuts_used: cuts.len(),
                    iterations,
                })
            }
            Err(e) => return Err(e),
        };
        let objective_value: f64 =
            prog.objective.iter().zip(&x).map(|(c, xi)| c * xi).sum();

        let mut worst = 0.0f64;
        let mut new_cuts: Vec<Cut> = Vec::new();
        for c in &prog.psd_constraints {
            let m = c.eval(&x);
            let (lam, v) = min_eigenpair(&m)?;
            if lam < -psd_tol {
                worst = worst.max(-lam);
                let quad = |f: &CMat| -> f64 {
                    let mv = f * &v;
                    v.iter().zip(mv.iter()).map(|(a, b)| (a.conj() * b).re).sum()
                };
                let coeffs: Vec<f64> = c.fs.iter().map(quad).collect();
                let rhs = -quad(&c.f0);
                new_cuts.push(Cut { coeffs, rhs, inactive: 0 });
            }
        }
        if new_cuts.is_empty() {
            return Ok(LmiSolution {
                x,
                objective_value,
                status: LmiStatus::Optimal,
                max_psd_violation: 0.0,
                cuts_used: cuts.len(),
                iterations,
            });
        }
        if cuts.len() + new_cuts.len() > max_cuts {
            return Ok(LmiSolution {
                x,
                objective_value,
                status: LmiStatus::IterationLimit,
                max_psd_violation: worst,
                cuts_used: cuts.len(),
                iterations,
            });
        }
        // age out cuts that stayed slack for many consecutive iterations
        for c in cuts.iter_mut() {
            let slack: f64 =
                c.coeffs.iter().zip(&x).map(|(g, xi)| g * xi).sum::<f64>() - c.rhs;
            if slack > 1e-7 {
                c.inactive += 1;
            } else {
                c.inactive = 0;
            }
        }
        cuts.retain(|c| c.inactive < PRUNE_AFTER);
        cuts.extend(new_cuts);
    }
}
