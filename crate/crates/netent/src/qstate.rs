//! Multipartite density matrices, observables and Kraus channels.
//!
//! Index convention: party 0 is the most significant tensor factor, so the
//! basis index of |x0 x1 ... x_{n-1}> is sum x_j * prod_{l>j} d_l.

use nalgebra::ComplexField;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_eigenvalues, hermitize, identity, is_hermitian, kron, max_abs,
    trace, CMat, CVec,
};
use crate::tol::{MAX_TOTAL_DIM, TOL};

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Hermitian, PSD, trace-one matrix with a per-party dimension profile.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    local_dims: Vec<usize>,
    data: CMat,
}

/// Hermitian operator with a per-party dimension profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    local_dims: Vec<usize>,
    data: CMat,
}

/// CPTP map in Kraus form.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    pub input_dim: usize,
    pub output_dim: usize,
    pub kraus_ops: Vec<CMat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryClass {
    Symmetric,
    Antisymmetric,
    Neither,
}

fn check_dims(local_dims: &[usize], side: usize) -> Result<()> {
    if local_dims.is_empty() || local_dims.iter().any(|&d| d == 0) {
        return Err(Error::DimMismatch("empty or zero local dimension".into()));
    }
    let total: usize = local_dims.iter().product();
    if total > MAX_TOTAL_DIM {
        return Err(Error::DimLimit(total, MAX_TOTAL_DIM));
    }
    if side != total {
        return Err(Error::DimMismatch(format!(
            "matrix side {side} does not match dims product {total}"
        )));
    }
    Ok(())
}

impl DensityMatrix {
    /// Validating constructor: Hermitian, unit trace, PSD.
    pub fn new(local_dims: Vec<usize>, data: CMat) -> Result<Self> {
        check_dims(&local_dims, data.nrows())?;
        if !data.is_square() || !is_hermitian(&data, TOL.hermiticity) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let tr = trace(&data);
        if (tr.re - 1.0).abs() > TOL.trace || tr.im.abs() > TOL.trace {
            return Err(Error::InvalidState(format!("trace {tr} is not one")));
        }
        let data = hermitize(&data);
        let min_ev = linalg::min_eigenvalue(&data);
        if min_ev < -TOL.psd {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min_ev:.3e} is negative"
            )));
        }
        Ok(DensityMatrix { local_dims, data })
    }

    /// Rank-one projector onto a normalized state vector.
    pub fn from_pure(local_dims: Vec<usize>, psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if norm < 1e-12 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi / cr(norm);
        DensityMatrix::new(local_dims, &v * v.adjoint())
    }

    pub fn maximally_mixed(local_dims: Vec<usize>) -> Result<Self> {
        let total: usize = local_dims.iter().product();
        DensityMatrix::new(local_dims, identity(total).scale(1.0 / total as f64))
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn num_parties(&self) -> usize {
        self.local_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.data
    }

    pub fn purity(&self) -> f64 {
        (&self.data * &self.data).diagonal().iter().map(|z| z.re).sum()
    }

    /// Tensor product of states; dimension profiles concatenate.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut dims = self.local_dims.clone();
        dims.extend_from_slice(&other.local_dims);
        DensityMatrix::new(dims, kron(&self.data, &other.data))
    }
}

impl Observable {
    pub fn new(local_dims: Vec<usize>, data: CMat) -> Result<Self> {
        check_dims(&local_dims, data.nrows())?;
        if !data.is_square() || !is_hermitian(&data, TOL.hermiticity) {
            return Err(Error::InvalidObservable("matrix is not Hermitian".into()));
        }
        Ok(Observable { local_dims, data })
    }

    /// Single-party observable.
    pub fn single(dim: usize, data: CMat) -> Result<Self> {
        Observable::new(vec![dim], data)
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.data
    }

    pub fn total_dim(&self) -> usize {
        self.data.nrows()
    }

    /// True when the spectrum is contained in {-1, +1}, i.e. M^2 = 1.
    pub fn is_dichotomic(&self) -> bool {
        let sq = &self.data * &self.data;
        max_abs(&(sq - identity(self.data.nrows()))) <= TOL.completeness
    }
}

impl KrausChannel {
    pub fn new(input_dim: usize, output_dim: usize, kraus_ops: Vec<CMat>) -> Result<Self> {
        if kraus_ops.is_empty() {
            return Err(Error::InvalidChannel("empty Kraus set".into()));
        }
        for k in &kraus_ops {
            if k.nrows() != output_dim || k.ncols() != input_dim {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator is {}x{}, expected {}x{}",
                    k.nrows(),
                    k.ncols(),
                    output_dim,
                    input_dim
                )));
            }
        }
        let mut sum = CMat::zeros(input_dim, input_dim);
        for k in &kraus_ops {
            sum += k.adjoint() * k;
        }
        if max_abs(&(sum - identity(input_dim))) > TOL.completeness {
            return Err(Error::InvalidChannel("Kraus set is not trace preserving".into()));
        }
        Ok(KrausChannel { input_dim, output_dim, kraus_ops })
    }

    pub fn identity_channel(dim: usize) -> Self {
        KrausChannel { input_dim: dim, output_dim: dim, kraus_ops: vec![identity(dim)] }
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        let dim = u.nrows();
        KrausChannel::new(dim, dim, vec![u])
    }

    /// Fully depolarizing channel: rho -> 1/d.
    pub fn depolarizing(dim: usize) -> Self {
        let scale = 1.0 / (dim as f64).sqrt();
        let mut ops = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut k = CMat::zeros(dim, dim);
                k[(i, j)] = cr(scale);
                ops.push(k);
            }
        }
        KrausChannel { input_dim: dim, output_dim: dim, kraus_ops: ops }
    }
}

/// Kronecker product; `a`'s indices most significant.
pub fn tensor_product(a: &CMat, b: &CMat) -> CMat {
    kron(a, b)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let mut s = vec![1usize; n];
    for j in (0..n.saturating_sub(1)).rev() {
        s[j] = s[j + 1] * dims[j + 1];
    }
    s
}

fn offsets(dims: &[usize], parties: &[usize], all_strides: &[usize]) -> Vec<usize> {
    let sub_dims: Vec<usize> = parties.iter().map(|&p| dims[p]).collect();
    let total: usize = sub_dims.iter().product();
    let mut res = vec![0usize; total.max(1)];
    for (i, entry) in res.iter_mut().enumerate() {
        let mut rest = i;
        let mut off = 0usize;
        for j in (0..parties.len()).rev() {
            off += (rest % sub_dims[j]) * all_strides[parties[j]];
            rest /= sub_dims[j];
        }
        *entry = off;
    }
    res
}

/// Trace out every party not in `keep`; `keep` need not be sorted but the
/// resulting party order is ascending.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.num_parties();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep set is empty".into()));
    }
    if keep.iter().any(|&p| p >= n) {
        return Err(Error::InvalidArgument("party index out of range".into()));
    }
    let rest: Vec<usize> = (0..n).filter(|p| !keep.contains(p)).collect();
    let st = strides(&rho.local_dims);
    let keep_off = offsets(&rho.local_dims, &keep, &st);
    let rest_off = offsets(&rho.local_dims, &rest, &st);
    let dk = keep_off.len();
    let mut out = CMat::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut acc = Complex64::default();
            for &r in &rest_off {
                acc += rho.data[(keep_off[a] + r, keep_off[b] + r)];
            }
            out[(a, b)] = acc;
        }
    }
    let dims: Vec<usize> = keep.iter().map(|&p| rho.local_dims[p]).collect();
    DensityMatrix::new(dims, out)
}

/// GHZ state (sum_i |i..i>)/sqrt(d) as a density matrix.
pub fn ghz_state(d: usize, n: usize) -> Result<DensityMatrix> {
    if d < 2 || n < 2 {
        return Err(Error::InvalidArgument("ghz_state requires d >= 2 and n >= 2".into()));
    }
    let total = d.checked_pow(n as u32).ok_or(Error::DimLimit(usize::MAX, MAX_TOTAL_DIM))?;
    if total > MAX_TOTAL_DIM {
        return Err(Error::DimLimit(total, MAX_TOTAL_DIM));
    }
    let mut psi = CVec::zeros(total);
    let step = (total - 1) / (d - 1);
    let amp = cr(1.0 / (d as f64).sqrt());
    for i in 0..d {
        psi[i * step] = amp;
    }
    DensityMatrix::from_pure(vec![d; n], &psi)
}

/// p * GHZ + (1 - p) * 1/d^n.
pub fn noisy_ghz(d: usize, n: usize, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("visibility {p} out of [0,1]")));
    }
    let ghz = ghz_state(d, n)?;
    let total = ghz.total_dim();
    let data = ghz.data.scale(p) + identity(total).scale((1.0 - p) / total as f64);
    DensityMatrix::new(vec![d; n], data)
}

/// Uhlmann fidelity |sqrt(rho) sqrt(sigma)|_1^2.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.local_dims != sigma.local_dims {
        return Err(Error::DimMismatch("fidelity requires matching dims".into()));
    }
    let sr = linalg::psd_sqrt(&rho.data)?;
    let inner = &sr * &sigma.data * &sr;
    let f: f64 = hermitian_eigenvalues(&hermitize(&inner))
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .sum::<f64>()
        .powi(2);
    Ok(f.clamp(0.0, 1.0))
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &CMat) -> Result<f64> {
    if !is_hermitian(m, 1e-7) {
        return Err(Error::InvalidArgument("trace_norm requires a Hermitian matrix".into()));
    }
    Ok(hermitian_eigenvalues(&hermitize(m)).iter().map(|x| x.abs()).sum())
}

/// tr(rho * obs) for matching dimension profiles.
pub fn expectation(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    if rho.total_dim() != obs.total_dim() {
        return Err(Error::DimMismatch(format!(
            "state dim {} vs observable dim {}",
            rho.total_dim(),
            obs.total_dim()
        )));
    }
    let mut acc = Complex64::default();
    for i in 0..rho.total_dim() {
        for j in 0..rho.total_dim() {
            acc += rho.data[(i, j)] * obs.data[(j, i)];
        }
    }
    debug_assert!(acc.im.abs() < 1e-7, "expectation has imaginary part {}", acc.im);
    Ok(acc.re)
}

/// Embed a single-party operator on `party` into the full space.
pub fn embed_on_party(op: &CMat, local_dims: &[usize], party: usize) -> CMat {
    let before: usize = local_dims[..party].iter().product();
    let after: usize = local_dims[party + 1..].iter().product();
    kron(&kron(&identity(before), op), &identity(after))
}

/// Apply a Kraus channel to one party; the party's dimension becomes the
/// channel output dimension.
pub fn apply_channel(
    rho: &DensityMatrix,
    channel: &KrausChannel,
    party: usize,
) -> Result<DensityMatrix> {
    if party >= rho.num_parties() {
        return Err(Error::InvalidArgument("party index out of range".into()));
    }
    if channel.input_dim != rho.local_dims[party] {
        return Err(Error::DimMismatch(format!(
            "channel input {} vs party dim {}",
            channel.input_dim, rho.local_dims[party]
        )));
    }
    let out = apply_channel_raw(&rho.data, &rho.local_dims, channel, party);
    let mut dims = rho.local_dims.clone();
    dims[party] = channel.output_dim;
    DensityMatrix::new(dims, out)
}

/// Same as [`apply_channel`] but on a raw matrix (no state validation);
/// used for affine maps inside the see-saw.
pub fn apply_channel_raw(
    data: &CMat,
    local_dims: &[usize],
    channel: &KrausChannel,
    party: usize,
) -> CMat {
    let before: usize = local_dims[..party].iter().product();
    let after: usize = local_dims[party + 1..].iter().product();
    let out_dim = before * channel.output_dim * after;
    let mut out = CMat::zeros(out_dim, out_dim);
    for k in &channel.kraus_ops {
        let full = kron(&kron(&identity(before), k), &identity(after));
        out += &full * data * full.adjoint();
    }
    out
}

fn permutation_parity(perm: &[usize]) -> i32 {
    let mut inv = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

fn party_permutation_matrix(d: usize, n: usize, perm: &[usize]) -> CMat {
    let total = d.pow(n as u32);
    let mut u = CMat::zeros(total, total);
    let mut digits = vec![0usize; n];
    for i in 0..total {
        let mut rest = i;
        for j in (0..n).rev() {
            digits[j] = rest % d;
            rest /= d;
        }
        let mut out = 0usize;
        for s in 0..n {
            out = out * d + digits[perm[s]];
        }
        u[(out, i)] = cr(1.0);
    }
    u
}

/// Classify a state of identical parties by its overlap with the symmetric
/// or antisymmetric subspace projector.
pub fn classify_permutation_symmetry(rho: &DensityMatrix) -> Result<SymmetryClass> {
    let n = rho.num_parties();
    let d = rho.local_dims[0];
    if rho.local_dims.iter().any(|&x| x != d) {
        return Err(Error::DimMismatch("all local dims must be equal".into()));
    }
    let total = rho.total_dim();
    let mut sym = CMat::zeros(total, total);
    let mut anti = CMat::zeros(total, total);
    let mut count = 0.0f64;
    let perms = permutations(n);
    for perm in &perms {
        let u = party_permutation_matrix(d, n, perm);
        let sgn = permutation_parity(perm) as f64;
        sym += &u;
        anti += u.scale(sgn);
        count += 1.0;
    }
    sym = sym.scale(1.0 / count);
    anti = anti.scale(1.0 / count);
    let overlap = |p: &CMat| -> f64 { (p * &rho.data).diagonal().iter().map(|z| z.re).sum() };
    if overlap(&sym) >= 1.0 - TOL.completeness {
        Ok(SymmetryClass::Symmetric)
    } else if overlap(&anti) >= 1.0 - TOL.completeness {
        Ok(SymmetryClass::Antisymmetric)
    } else {
        Ok(SymmetryClass::Neither)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap_recurse(n, &mut cur, &mut out);
    out
}

fn heap_recurse(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_recurse(k - 1, cur, out);
        if k % 2 == 0 {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

fn ginibre(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Random density matrix G G† / tr(G G†) with complex Gaussian G.
pub fn random_state(dim: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_state_with(dim, &mut rng)
}

pub fn random_state_with(dim: usize, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let g = ginibre(dim, rng);
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    DensityMatrix::new(vec![dim], m.scale(1.0 / tr))
}

/// Haar-random unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary(dim: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unitary_with(dim, &mut rng)
}

pub fn random_unitary_with(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = ginibre(dim, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    // fix column phases so the distribution is Haar
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 1e-15 { d / cr(d.norm()) } else { cr(1.0) };
        let col = q.column(j) * phase.conjugate();
        q.set_column(j, &col);
    }
    q
}

// ---------------------------------------------------------------------------
// JSON formats

/// Wire format for complex matrices: row-major real and imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(dims: &[usize], m: &CMat) -> Self {
        let n = m.nrows();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        MatrixJson { dims: dims.to_vec(), re, im }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let n: usize = self.dims.iter().product();
        if self.re.len() != n
            || self.im.len() != n
            || self.re.iter().any(|r| r.len() != n)
            || self.im.iter().any(|r| r.len() != n)
        {
            return Err(Error::DimMismatch("matrix JSON shape mismatch".into()));
        }
        Ok(CMat::from_fn(n, n, |i, j| Complex64::new(self.re[i][j], self.im[i][j])))
    }
}

impl DensityMatrix {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_matrix(&self.local_dims, &self.data)
    }

    /// Loader re-validates every state invariant.
    pub fn from_json(j: &MatrixJson) -> Result<Self> {
        DensityMatrix::new(j.dims.clone(), j.to_matrix()?)
    }
}

impl Observable {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_matrix(&self.local_dims, &self.data)
    }

    pub fn from_json(j: &MatrixJson) -> Result<Self> {
        Observable::new(j.dims.clone(), j.to_matrix()?)
    }
}

// ---------------------------------------------------------------------------
// Common single-qubit operators

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[cr(0.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), cr(0.0)],
    )
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
}

/// Generalized Z for dimension d: diag(+1 on |0>, -1 elsewhere). Dichotomic
/// for every d.
pub fn dichotomic_z(d: usize) -> CMat {
    CMat::from_fn(d, d, |i, j| {
        if i != j {
            cr(0.0)
        } else if i == 0 {
            cr(1.0)
        } else {
            cr(-1.0)
        }
    })
}

pub fn basis_projector(dim: usize, idx: usize) -> CMat {
    let mut m = CMat::zeros(dim, dim);
    m[(idx, idx)] = cr(1.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bell() -> DensityMatrix {
        let mut v = CVec::zeros(4);
        v[0] = cr(1.0);
        v[3] = cr(1.0);
        DensityMatrix::from_pure(vec![2, 2], &v).unwrap()
    }

    #[test]
    fn tensor_product_basis_bookkeeping() {
        // |0><0| x |1><1| = |01><01|
        let p0 = basis_projector(2, 0);
        let p1 = basis_projector(2, 1);
        let t = tensor_product(&p0, &p1);
        assert_abs_diff_eq!(t[(1, 1)].re, 1.0, epsilon = 1e-15);
        assert_eq!(t.nrows(), 4);
    }

    #[test]
    fn tensor_product_zz() {
        let zz = tensor_product(&pauli_z(), &pauli_z());
        let expected = [1.0, -1.0, -1.0, 1.0];
        for (i, e) in expected.iter().enumerate() {
            assert_abs_diff_eq!(zz[(i, i)].re, *e, epsilon = 1e-15);
        }
    }

    #[test]
    fn partial_trace_bell_marginal() {
        let m = partial_trace(&bell(), &[0]).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(m.matrix()[(i, i)].re, 0.5, epsilon = 1e-12);
        }
        assert!(m.matrix()[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn partial_trace_ghz_pair() {
        let g = ghz_state(2, 3).unwrap();
        let m = partial_trace(&g, &[0, 1]).unwrap();
        // (|00><00| + |11><11|)/2
        assert_abs_diff_eq!(m.matrix()[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(m.matrix()[(3, 3)].re, 0.5, epsilon = 1e-12);
        assert!(m.matrix()[(0, 3)].norm() < 1e-12);
    }

    #[test]
    fn partial_trace_product_factorizes() {
        let a = random_state(3, 7).unwrap();
        let b = random_state(2, 8).unwrap();
        let ab = a.tensor(&b).unwrap();
        let back = partial_trace(&ab, &[0]).unwrap();
        assert!(max_abs(&(back.matrix() - a.matrix())) < 1e-10);
    }

    #[test]
    fn partial_trace_errors() {
        let g = ghz_state(2, 3).unwrap();
        assert!(partial_trace(&g, &[]).is_err());
        assert!(partial_trace(&g, &[3]).is_err());
    }

    #[test]
    fn ghz_is_bell_for_two_qubits() {
        let g = ghz_state(2, 2).unwrap();
        assert!(max_abs(&(g.matrix() - bell().matrix())) < 1e-12);
    }

    #[test]
    fn ghz_purity() {
        for (d, n) in [(2usize, 3usize), (4, 3)] {
            assert_abs_diff_eq!(ghz_state(d, n).unwrap().purity(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn ghz_z_correlators() {
        let g = ghz_state(2, 3).unwrap();
        let zzz = Observable::new(
            vec![2; 3],
            kron(&kron(&pauli_z(), &pauli_z()), &pauli_z()),
        )
        .unwrap();
        let zzi = Observable::new(
            vec![2; 3],
            kron(&kron(&pauli_z(), &pauli_z()), &identity(2)),
        )
        .unwrap();
        assert_abs_diff_eq!(expectation(&g, &zzz).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(expectation(&g, &zzi).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noisy_ghz_endpoints_and_purity() {
        let g = ghz_state(2, 3).unwrap();
        let p1 = noisy_ghz(2, 3, 1.0).unwrap();
        assert!(max_abs(&(p1.matrix() - g.matrix())) < 1e-12);
        let p0 = noisy_ghz(2, 3, 0.0).unwrap();
        assert!(max_abs(&(p0.matrix() - DensityMatrix::maximally_mixed(vec![2; 3]).unwrap().matrix())) < 1e-12);
        // xi = p^2 + (1 - p^2)/d^n
        let r = noisy_ghz(4, 3, 0.8).unwrap();
        assert_abs_diff_eq!(r.purity(), 0.645625, epsilon = 1e-12);
        assert!(noisy_ghz(2, 3, 1.5).is_err());
    }

    #[test]
    fn fidelity_cases() {
        let g = ghz_state(2, 3).unwrap();
        assert_abs_diff_eq!(fidelity(&g, &g).unwrap(), 1.0, epsilon = 1e-9);
        let p0 = DensityMatrix::new(vec![2], basis_projector(2, 0)).unwrap();
        let p1 = DensityMatrix::new(vec![2], basis_projector(2, 1)).unwrap();
        assert_abs_diff_eq!(fidelity(&p0, &p1).unwrap(), 0.0, epsilon = 1e-9);
        let mm = DensityMatrix::maximally_mixed(vec![2; 3]).unwrap();
        assert_abs_diff_eq!(fidelity(&g, &mm).unwrap(), 0.125, epsilon = 1e-9);
        assert!(fidelity(&g, &p0).is_err());
    }

    #[test]
    fn trace_norm_cases() {
        let g = ghz_state(2, 3).unwrap();
        assert_abs_diff_eq!(trace_norm(g.matrix()).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(trace_norm(&pauli_z()).unwrap(), 2.0, epsilon = 1e-12);
        // |0><0| - |+><+| has eigenvalues +-1/sqrt(2)
        let plus = CMat::from_fn(2, 2, |_, _| cr(0.5));
        let diff = basis_projector(2, 0) - plus;
        assert_abs_diff_eq!(trace_norm(&diff).unwrap(), std::f64::consts::SQRT_2, epsilon = 1e-10);
    }

    #[test]
    fn expectation_noisy_visibility() {
        let obs = Observable::new(
            vec![2; 3],
            kron(&kron(&pauli_z(), &pauli_z()), &identity(2)),
        )
        .unwrap();
        for p in [0.0, 0.3, 0.9] {
            let r = noisy_ghz(2, 3, p).unwrap();
            assert_abs_diff_eq!(expectation(&r, &obs).unwrap(), p, epsilon = 1e-12);
        }
    }

    #[test]
    fn channel_identity_and_depolarizing() {
        let b = bell();
        let id = KrausChannel::identity_channel(2);
        let same = apply_channel(&b, &id, 0).unwrap();
        assert!(max_abs(&(same.matrix() - b.matrix())) < 1e-12);
        let dep = KrausChannel::depolarizing(2);
        let out = apply_channel(&b, &dep, 0).unwrap();
        let mm = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        assert!(max_abs(&(out.matrix() - mm.matrix())) < 1e-10);
    }

    #[test]
    fn measure_and_correct_channel() {
        // K0 = |0><0|, K1 = X |1><1| is complete; output stays a valid state
        let k0 = basis_projector(2, 0);
        let k1 = pauli_x() * basis_projector(2, 1);
        let ch = KrausChannel::new(2, 2, vec![k0, k1]).unwrap();
        let mut v = CVec::zeros(2);
        v[0] = cr(1.0);
        v[1] = cr(-1.0);
        let minus = DensityMatrix::from_pure(vec![2], &v).unwrap();
        let out = apply_channel(&minus, &ch, 0).unwrap();
        assert_abs_diff_eq!(trace(out.matrix()).re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn channel_dim_mismatch() {
        let b = bell();
        let ch = KrausChannel::identity_channel(3);
        assert!(apply_channel(&b, &ch, 0).is_err());
        // non-complete Kraus set rejected at construction
        assert!(KrausChannel::new(2, 2, vec![basis_projector(2, 0)]).is_err());
    }

    #[test]
    fn symmetry_classification() {
        assert_eq!(
            classify_permutation_symmetry(&ghz_state(2, 3).unwrap()).unwrap(),
            SymmetryClass::Symmetric
        );
        let mut v = CVec::zeros(4);
        v[1] = cr(1.0);
        v[2] = cr(-1.0);
        let singlet = DensityMatrix::from_pure(vec![2, 2], &v).unwrap();
        assert_eq!(
            classify_permutation_symmetry(&singlet).unwrap(),
            SymmetryClass::Antisymmetric
        );
        let mut w = CVec::zeros(4);
        w[1] = cr(1.0);
        let basis01 = DensityMatrix::from_pure(vec![2, 2], &w).unwrap();
        assert_eq!(classify_permutation_symmetry(&basis01).unwrap(), SymmetryClass::Neither);
    }

    #[test]
    fn random_state_invariants_and_determinism() {
        for seed in 0..100u64 {
            let r = random_state(8, seed).unwrap();
            assert_abs_diff_eq!(trace(r.matrix()).re, 1.0, epsilon = 1e-10);
        }
        let a = random_state(8, 42).unwrap();
        let b = random_state(8, 42).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) == 0.0);
        let u = random_unitary(4, 5);
        assert!(max_abs(&(&u * u.adjoint() - identity(4))) < 1e-10);
    }

    #[test]
    fn random_state_mean_purity() {
        // Monte-Carlo oracle: the dim-2 Ginibre ensemble has mean purity
        // (N + K)/(N K + 1) = 0.8 for N = K = 2.
        let mean: f64 =
            (0..1000u64).map(|s| random_state(2, s).unwrap().purity()).sum::<f64>() / 1000.0;
        assert!((mean - 0.8).abs() < 0.02, "mean purity {mean}");
    }

    #[test]
    fn json_round_trip_revalidates() {
        let g = noisy_ghz(2, 3, 0.5).unwrap();
        let j = serde_json::to_string(&g.to_json()).unwrap();
        let parsed: MatrixJson = serde_json::from_str(&j).unwrap();
        let back = DensityMatrix::from_json(&parsed).unwrap();
        assert!(max_abs(&(back.matrix() - g.matrix())) < 1e-12);
        // corrupt the trace and the loader must reject
        let mut bad = g.to_json();
        bad.re[0][0] += 0.5;
        assert!(DensityMatrix::from_json(&bad).is_err());
    }

    #[test]
    fn dim_limit_enforced() {
        assert!(matches!(ghz_state(2, 11), Err(Error::DimLimit(..))));
    }

    #[test]
    fn dichotomic_check() {
        let z = Observable::single(2, pauli_z()).unwrap();
        assert!(z.is_dichotomic());
        let half = Observable::single(2, pauli_z().scale(0.5)).unwrap();
        assert!(!half.is_dichotomic());
        assert!(Observable::single(3, dichotomic_z(3)).unwrap().is_dichotomic());
    }
}
