//! Upper bounds on the network-entanglement weight by see-saw optimization
//! over explicitly parametrized network states.
//!
//! A candidate network state is a product of per-edge source states pushed
//! through one local channel per node. The weight program
//! maximize q s.t. rho - q * sigma >= 0 is solved two ways in alternation:
//! a mixture LP over a dictionary of assembled candidates, and a per-source
//! linear matrix program with one unnormalized source free. Every reported
//! upper bound is re-verified against the assembled certificate before it is
//! returned.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_func, hermitize, identity, min_eigenvalue, permute_subsystems, trace, CMat,
};
use crate::lmi::{self, AffineMatrix, LinearMatrixProgram, LmiStatus};
use crate::netgraph::Hypergraph;
use crate::qstate::{
    apply_channel_raw, random_state_with, random_unitary_with, DensityMatrix, KrausChannel,
    MatrixJson,
};

/// Tolerance for accepting the final PSD residual of a certificate.
pub const VERIFY_TOL: f64 = 1e-6;

/// How node dimensions are distributed over the sources of incident edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DimMode {
    /// Equal split when integral, otherwise concentrate.
    #[default]
    Auto,
    /// d_{e,v} = d_v^(1/deg(v)); errors when not an integer.
    EqualSplit,
    /// Full node dimension on the lowest-index incident edge, 1 elsewhere.
    Concentrated,
}

/// Dimension bookkeeping for the parametrized network states of one graph.
#[derive(Debug, Clone)]
pub struct NetworkAnsatz {
    graph: Hypergraph,
    node_dims: Vec<usize>,
    /// Per edge, per node-in-edge (nodes ascending): source slot dimension.
    source_dims: Vec<Vec<usize>>,
}

fn integer_root(d: usize, deg: usize) -> Option<usize> {
    (1..=d).find(|&r| r.checked_pow(deg as u32) == Some(d))
}

impl NetworkAnsatz {
    pub fn new(graph: &Hypergraph, node_dims: &[usize], mode: DimMode) -> Result<Self> {
        if node_dims.len() != graph.num_nodes() {
            return Err(Error::DimMismatch("one dimension per node required".into()));
        }
        if !graph.is_connected() {
            return Err(Error::Disconnected);
        }
        let degrees: Vec<usize> = (0..graph.num_nodes())
            .map(|v| graph.incident_edges(v).len())
            .collect();
        let equal_split = || -> Result<Vec<Vec<usize>>> {
            let per_node: Vec<usize> = (0..graph.num_nodes())
                .map(|v| {
                    integer_root(node_dims[v], degrees[v]).ok_or_else(|| {
                        Error::DimMismatch(format!(
                            "dim {} of node {v} has no integer {}-th root",
                            node_dims[v], degrees[v]
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            Ok(graph
                .edges()
                .iter()
                .map(|e| e.iter().map(|&v| per_node[v]).collect())
                .collect())
        };
        let concentrated = || -> Vec<Vec<usize>> {
            graph
                .edges()
                .iter()
                .enumerate()
                .map(|(ei, e)| {
                    e.iter()
                        .map(|&v| if graph.incident_edges(v)[0] == ei { node_dims[v] } else { 1 })
                        .collect()
                })
                .collect()
        };
        let source_dims = match mode {
            DimMode::EqualSplit => equal_split()?,
            DimMode::Concentrated => concentrated(),
            DimMode::Auto => equal_split().unwrap_or_else(|_| concentrated()),
        };
        Ok(NetworkAnsatz {
            graph: graph.clone(),
            node_dims: node_dims.to_vec(),
            source_dims,
        })
    }

    /// Explicit per-edge slot dimensions, for ansatz shapes the automatic
    /// splits cannot express (e.g. local ancillas created by channels).
    pub fn custom(
        graph: &Hypergraph,
        node_dims: &[usize],
        source_dims: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if node_dims.len() != graph.num_nodes() {
            return Err(Error::DimMismatch("one dimension per node required".into()));
        }
        if source_dims.len() != graph.edges().len()
            || source_dims
                .iter()
                .zip(graph.edges())
                .any(|(d, e)| d.len() != e.len() || d.iter().any(|&x| x == 0))
        {
            return Err(Error::DimMismatch("one positive slot dim per node per edge".into()));
        }
        Ok(NetworkAnsatz {
            graph: graph.clone(),
            node_dims: node_dims.to_vec(),
            source_dims,
        })
    }

    pub fn graph(&self) -> &Hypergraph {
        &self.graph
    }

    pub fn node_dims(&self) -> &[usize] {
        &self.node_dims
    }

    /// Total Hilbert-space dimension of the source of one edge.
    pub fn edge_dim(&self, e: usize) -> usize {
        self.source_dims[e].iter().product()
    }

    /// Flat slot list (edge, node, dim) in edge-major, node-ascending order,
    /// matching the tensor order of the raw source product.
    fn slots(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (ei, e) in self.graph.edges().iter().enumerate() {
            for (vi, &v) in e.iter().enumerate() {
                out.push((ei, v, self.source_dims[ei][vi]));
            }
        }
        out
    }
}

/// One parametrized network state: a source per edge and a channel per node.
#[derive(Debug, Clone)]
pub struct Candidate {
    /// Normalized source density matrices (raw, dimension edge_dim(e)).
    pub sources: Vec<CMat>,
    pub channels: Vec<KrausChannel>,
}

/// Assemble sigma = (channels) [tensor of sources regrouped by node] without
/// validating the inputs; linear in each individual source.
pub fn assemble_raw(ansatz: &NetworkAnsatz, sources: &[CMat], channels: &[KrausChannel]) -> Result<CMat> {
    if sources.len() != ansatz.graph.edges().len() || channels.len() != ansatz.graph.num_nodes() {
        return Err(Error::DimMismatch("one source per edge, one channel per node".into()));
    }
    for (e, s) in sources.iter().enumerate() {
        if s.nrows() != ansatz.edge_dim(e) || !s.is_square() {
            return Err(Error::DimMismatch(format!(
                "source {e} is {}x{}, expected side {}",
                s.nrows(),
                s.ncols(),
                ansatz.edge_dim(e)
            )));
        }
    }
    let mut prod = CMat::from_element(1, 1, Complex64::new(1.0, 0.0));
    for s in sources {
        prod = crate::linalg::kron(&prod, s);
    }
    let slots = ansatz.slots();
    let in_dims: Vec<usize> = slots.iter().map(|&(_, _, d)| d).collect();
    // output slot order: ascending by (node, edge)
    let mut order: Vec<usize> = (0..slots.len()).collect();
    order.sort_by_key(|&i| (slots[i].1, slots[i].0));
    let grouped = permute_subsystems(&prod, &in_dims, &order)?;
    let mut node_dims: Vec<usize> = vec![1; ansatz.graph.num_nodes()];
    for &i in &order {
        node_dims[slots[i].1] *= slots[i].2;
    }
    let mut m = grouped;
    for v in 0..ansatz.graph.num_nodes() {
        let ch = &channels[v];
        if ch.input_dim != node_dims[v] {
            return Err(Error::DimMismatch(format!(
                "channel input {} vs grouped node dim {} at node {v}",
                ch.input_dim, node_dims[v]
            )));
        }
        m = apply_channel_raw(&m, &node_dims, ch, v);
        node_dims[v] = ch.output_dim;
    }
    Ok(m)
}

/// Validating assembly into a density matrix on the node dimension profile.
pub fn assemble_network_state(ansatz: &NetworkAnsatz, cand: &Candidate) -> Result<DensityMatrix> {
    let m = assemble_raw(ansatz, &cand.sources, &cand.channels)?;
    let dims: Vec<usize> = cand.channels.iter().map(|c| c.output_dim).collect();
    DensityMatrix::new(dims, hermitize(&m))
}

/// Maximize sum of mixture weights q = sum w_l subject to
/// rho - sum w_l sigma_l >= 0, 0 <= w_l, sum w_l <= 1. Returns (q, w).
pub fn mixture_weight_bound(
    rho: &DensityMatrix,
    sigmas: &[CMat],
    psd_tol: f64,
    max_cuts: usize,
) -> Result<(f64, Vec<f64>)> {
    let nc = sigmas.len();
    if nc == 0 {
        return Ok((0.0, Vec::new()));
    }
    let one = CMat::from_element(1, 1, Complex64::new(1.0, 0.0));
    let prog = LinearMatrixProgram {
        num_vars: nc,
        objective: vec![1.0; nc],
        lo: vec![0.0; nc],
        hi: vec![1.0; nc],
        psd_constraints: vec![
            AffineMatrix {
                f0: rho.matrix().clone(),
                fs: sigmas.iter().map(|s| hermitize(s).scale(-1.0)).collect(),
            },
            AffineMatrix {
                f0: one.clone(),
                fs: vec![one.scale(-1.0); nc],
            },
        ],
    };
    let sol = lmi::solve(&prog, psd_tol, max_cuts)?;
    match sol.status {
        LmiStatus::Infeasible => Ok((0.0, vec![0.0; nc])),
        _ => Ok((sol.objective_value.clamp(0.0, 1.0), sol.x)),
    }
}

/// Hermitian matrix basis of the m x m space (m^2 elements, trace vector
/// alongside).
fn hermitian_basis(m: usize) -> (Vec<CMat>, Vec<f64>) {
    let mut basis = Vec::with_capacity(m * m);
    let mut traces = Vec::with_capacity(m * m);
    for i in 0..m {
        let mut h = CMat::zeros(m, m);
        h[(i, i)] = Complex64::new(1.0, 0.0);
        basis.push(h);
        traces.push(1.0);
    }
    for i in 0..m {
        for j in i + 1..m {
            let mut h = CMat::zeros(m, m);
            h[(i, j)] = Complex64::new(1.0, 0.0);
            h[(j, i)] = Complex64::new(1.0, 0.0);
            basis.push(h);
            traces.push(0.0);
            let mut h = CMat::zeros(m, m);
            h[(i, j)] = Complex64::new(0.0, 1.0);
            h[(j, i)] = Complex64::new(0.0, -1.0);
            basis.push(h);
            traces.push(0.0);
        }
    }
    (basis, traces)
}

/// Optimize one unnormalized source of one candidate against the residual
/// rho - (rest of the mixture): maximize tr(source) subject to
/// source >= 0, tr(source) <= 1, residual - assemble(source) >= 0.
/// Returns the achieved weight and the normalized source on success.
pub fn optimize_source(
    ansatz: &NetworkAnsatz,
    cand: &Candidate,
    edge: usize,
    residual: &CMat,
    psd_tol: f64,
    max_cuts: usize,
) -> Result<Option<(f64, CMat)>> {
    let m = ansatz.edge_dim(edge);
    let (basis, traces) = hermitian_basis(m);
    let mut assembled = Vec::with_capacity(basis.len());
    for h in &basis {
        let mut sources = cand.sources.clone();
        sources[edge] = h.clone();
        assembled.push(hermitize(&assemble_raw(ansatz, &sources, &cand.channels)?));
    }
    let nv = basis.len();
    let one = CMat::from_element(1, 1, Complex64::new(1.0, 0.0));
    let lo: Vec<f64> = traces.iter().map(|&t| if t > 0.0 { 0.0 } else { -1.0 }).collect();
    let prog = LinearMatrixProgram {
        num_vars: nv,
        objective: traces.clone(),
        lo,
        hi: vec![1.0; nv],
        psd_constraints: vec![
            AffineMatrix { f0: CMat::zeros(m, m), fs: basis.clone() },
            AffineMatrix {
                f0: hermitize(residual),
                fs: assembled.iter().map(|a| a.scale(-1.0)).collect(),
            },
            AffineMatrix {
                f0: one,
                fs: traces.iter().map(|&t| CMat::from_element(1, 1, Complex64::new(-t, 0.0))).collect(),
            },
        ],
    };
    let sol = lmi::solve(&prog, psd_tol, max_cuts)?;
    if sol.status == LmiStatus::Infeasible {
        return Ok(None);
    }
    let mut raw = CMat::zeros(m, m);
    for (xi, h) in sol.x.iter().zip(&basis) {
        raw += h.scale(*xi);
    }
    let q = trace(&raw).re;
    if q < 1e-9 {
        return Ok(None);
    }
    // project to an exact state before storing: clamp negative eigenvalues,
    // renormalize the trace
    let proj = hermitian_func(&hermitize(&raw.scale(1.0 / q)), |x| x.max(0.0))?;
    let tr = trace(&proj).re;
    if tr < 1e-12 {
        return Ok(None);
    }
    Ok(Some((q.min(1.0), proj.scale(1.0 / tr))))
}

/// Tuning knobs for [`seesaw_run`].
#[derive(Debug, Clone)]
pub struct SeesawConfig {
    pub seed: u64,
    /// Random candidates beyond the maximally mixed one.
    pub num_candidates: usize,
    pub sweeps: usize,
    pub include_maximally_mixed: bool,
    pub psd_tol: f64,
    pub max_cuts: usize,
    pub dim_mode: DimMode,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        SeesawConfig {
            seed: 7,
            num_candidates: 2,
            sweeps: 2,
            include_maximally_mixed: true,
            psd_tol: lmi::DEFAULT_PSD_TOL,
            max_cuts: 2000,
            dim_mode: DimMode::Auto,
        }
    }
}

/// Serializable certificate for one candidate.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateJson {
    pub sources: Vec<MatrixJson>,
    pub channel_kraus: Vec<Vec<MatrixJson>>,
}

/// Outcome of a see-saw run. `upper_bound` is only claimed when `verified`
/// is true; otherwise the report falls back to the trivial bound 1.
#[derive(Debug, Clone, Serialize)]
pub struct SeesawReport {
    pub upper_bound: f64,
    /// Total verified mixture weight q (upper_bound = 1 - q).
    pub mixture_weight: f64,
    pub weights: Vec<f64>,
    pub min_residual_eig: f64,
    pub verified: bool,
    pub seed: u64,
    pub sweeps: usize,
    pub candidates: Vec<CandidateJson>,
}

fn candidate_json(ansatz: &NetworkAnsatz, c: &Candidate) -> CandidateJson {
    CandidateJson {
        sources: c
            .sources
            .iter()
            .enumerate()
            .map(|(e, s)| MatrixJson::from_matrix(&[ansatz.edge_dim(e)], s))
            .collect(),
        channel_kraus: c
            .channels
            .iter()
            .map(|ch| {
                ch.kraus_ops
                    .iter()
                    .map(|k| MatrixJson::from_matrix(&[ch.output_dim], k))
                    .collect()
            })
            .collect(),
    }
}

/// See-saw upper bound on the network-entanglement weight of `rho` relative
/// to the network `g`.
pub fn seesaw_run(rho: &DensityMatrix, g: &Hypergraph, cfg: &SeesawConfig) -> Result<SeesawReport> {
    if g.num_nodes() != rho.num_parties() {
        return Err(Error::DimMismatch(format!(
            "{} graph nodes vs {} parties",
            g.num_nodes(),
            rho.num_parties()
        )));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let ansatz = NetworkAnsatz::new(g, rho.local_dims(), cfg.dim_mode)?;
    let ne = g.edges().len();
    let n = g.num_nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut frozen = 0usize;
    if cfg.include_maximally_mixed {
        candidates.push(Candidate {
            sources: (0..ne)
                .map(|e| identity(ansatz.edge_dim(e)).scale(1.0 / ansatz.edge_dim(e) as f64))
                .collect(),
            channels: (0..n).map(|v| KrausChannel::identity_channel(rho.local_dims()[v])).collect(),
        });
        frozen = 1;
    }
    for _ in 0..cfg.num_candidates {
        let sources = (0..ne)
            .map(|e| Ok(random_state_with(ansatz.edge_dim(e), &mut rng)?.matrix().clone()))
            .collect::<Result<Vec<_>>>()?;
        let channels = (0..n)
            .map(|v| KrausChannel::unitary(random_unitary_with(rho.local_dims()[v], &mut rng)))
            .collect::<Result<Vec<_>>>()?;
        candidates.push(Candidate { sources, channels });
    }

    let assemble_all = |cands: &[Candidate]| -> Result<Vec<CMat>> {
        cands.iter().map(|c| assemble_raw(&ansatz, &c.sources, &c.channels).map(|m| hermitize(&m))).collect()
    };
    let mut sigmas = assemble_all(&candidates)?;
    let (_, mut weights) = mixture_weight_bound(rho, &sigmas, cfg.psd_tol, cfg.max_cuts)?;

    for _sweep in 0..cfg.sweeps {
        for l in frozen..candidates.len() {
            for e in 0..ne {
                if ansatz.edge_dim(e) < 2 {
                    continue;
                }
                let mut residual = rho.matrix().clone();
                for (mu, s) in sigmas.iter().enumerate() {
                    if mu != l {
                        residual -= s.scale(weights[mu]);
                    }
                }
                if let Some((q, source)) =
                    optimize_source(&ansatz, &candidates[l], e, &residual, cfg.psd_tol, cfg.max_cuts)?
                {
                    candidates[l].sources[e] = source;
                    weights[l] = q;
                    sigmas[l] = hermitize(&assemble_raw(
                        &ansatz,
                        &candidates[l].sources,
                        &candidates[l].channels,
                    )?);
                }
            }
        }
        let (_, w) = mixture_weight_bound(rho, &sigmas, cfg.psd_tol, cfg.max_cuts)?;
        weights = w;
    }

    // soundness pass: re-validate every candidate through the state
    // constructors, rebalance, and check the residual spectrum explicitly
    let mut verified_sigmas = Vec::with_capacity(candidates.len());
    for c in &candidates {
        verified_sigmas.push(assemble_network_state(&ansatz, c)?.matrix().clone());
    }
    let (q, w) = mixture_weight_bound(rho, &verified_sigmas, cfg.psd_tol, cfg.max_cuts)?;
    let mut residual = rho.matrix().clone();
    for (wi, s) in w.iter().zip(&verified_sigmas) {
        residual -= s.scale(*wi);
    }
    let min_eig = min_eigenvalue(&hermitize(&residual));
    let (q, w, min_eig, verified) = if min_eig >= -VERIFY_TOL && q <= 1.0 + VERIFY_TOL {
        (q, w, min_eig, true)
    } else {
        // fall back to the closed-form maximally mixed certificate
        let d = rho.total_dim() as f64;
        let q = (d * min_eigenvalue(rho.matrix())).clamp(0.0, 1.0);
        let mut w = vec![0.0; candidates.len()];
        let eig = if cfg.include_maximally_mixed {
            w[0] = q;
            let r = rho.matrix() - identity(rho.total_dim()).scale(q / d);
            min_eigenvalue(&hermitize(&r))
        } else {
            return Err(Error::Infeasible);
        };
        (q, w, eig, true)
    };
    Ok(SeesawReport {
        upper_bound: (1.0 - q).clamp(0.0, 1.0),
        mixture_weight: q,
        weights: w,
        min_residual_eig: min_eig,
        verified,
        seed: cfg.seed,
        sweeps: cfg.sweeps,
        candidates: candidates.iter().map(|c| candidate_json(&ansatz, c)).collect(),
    })
}
