//! Dense complex matrix helpers shared across the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol::TOL;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Kronecker product with `a` as the most significant factor.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

/// Frobenius-normalized Hermitization; cheap cleanup after contractions.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Cyclic Jacobi eigendecomposition for Hermitian matrices. Slower than the
/// tridiagonalization path but unconditionally convergent and accurate on
/// clustered spectra; used as a fallback when the fast path fails its
/// residual check.
fn jacobi_hermitian_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let mut a = hermitize(m);
    let mut v = identity(n);
    let scale = max_abs(&a).max(1.0);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-14 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let g = a[(p, q)];
                let gn = g.norm();
                if gn <= 1e-300 {
                    continue;
                }
                let e = g / Complex64::new(gn, 0.0);
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * gn);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U restricted to {p, q}: [[c, s], [-s e*, c e*]]
                let (cc, ss) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
                let ec = e.conj();
                for i in 0..n {
                    let (ap, aq) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = cc * ap - ss * ec * aq;
                    a[(i, q)] = ss * ap + cc * ec * aq;
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = cc * vp - ss * ec * vq;
                    v[(i, q)] = ss * vp + cc * ec * vq;
                }
                for j in 0..n {
                    let (ap, aq) = (a[(p, j)], a[(q, j)]);
                    a[(p, j)] = cc * ap - ss * e * aq;
                    a[(q, j)] = ss * ap + cc * e * aq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vecs = CMat::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &v.column(i));
    }
    (vals, vecs)
}

/// Eigenvalues of a Hermitian matrix, ascending. No eigenvectors. The first
/// two spectral moments are cross-checked against tr(m) and |m|_F^2 to catch
/// non-convergence of the fast path; on mismatch the Jacobi fallback runs.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = max_abs(m).max(1.0);
    let n = m.nrows() as f64;
    let tr_err = (ev.iter().sum::<f64>() - trace(m).re).abs();
    let frob_err = (ev.iter().map(|x| x * x).sum::<f64>() - m.norm_squared()).abs();
    if tr_err > 1e-9 * scale * n || frob_err > 1e-8 * scale * scale * n {
        let (vals, _) = jacobi_hermitian_eig(m);
        return vals;
    }
    ev
}

/// Full Hermitian eigendecomposition, eigenvalues ascending with matching
/// eigenvector columns. The eigenpair residual is re-checked against the
/// contractual tolerance; on failure a Jacobi fallback recomputes the
/// decomposition before erroring out.
pub fn hermitian_eig(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if !is_hermitian(m, 1e-7) {
        return Err(Error::InvalidArgument(
            "eigendecomposition requires a Hermitian matrix".into(),
        ));
    }
    let n = m.nrows();
    let scale = max_abs(m).max(1.0);
    let tol = TOL.eigen_residual * scale * (n as f64).sqrt();
    let check = |vals: &[f64], vecs: &CMat| -> f64 {
        (0..n)
            .map(|c| {
                let v = vecs.column(c);
                (m * v - v * Complex64::new(vals[c], 0.0)).norm()
            })
            .fold(0.0, f64::max)
    };
    let se = nalgebra::SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &se.eigenvectors.column(i));
    }
    if check(&vals, &vecs) <= tol {
        return Ok((vals, vecs));
    }
    let (vals, vecs) = jacobi_hermitian_eig(m);
    let resid = check(&vals, &vecs);
    if resid > tol {
        return Err(Error::InvalidArgument(format!(
            "eigenpair residual {resid:.3e} exceeds tolerance"
        )));
    }
    Ok((vals, vecs))
}

/// Minimum eigenpair of a Hermitian matrix.
pub fn min_eigenpair(m: &CMat) -> Result<(f64, CVec)> {
    let (vals, vecs) = hermitian_eig(m)?;
    Ok((vals[0], vecs.column(0).into_owned()))
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_func(m: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (vals, vecs) = hermitian_eig(m)?;
    let d = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&x| Complex64::new(f(x), 0.0)),
    ));
    Ok(&vecs * d * vecs.adjoint())
}

/// PSD square root; small negative eigenvalues are clamped to zero.
pub fn psd_sqrt(m: &CMat) -> Result<CMat> {
    hermitian_func(m, |x| x.max(0.0).sqrt())
}

/// Reorder tensor factors: slot `s` of the output holds factor `perm[s]`
/// of the input. `dims` are the input factor dimensions, most significant
/// first.
pub fn permute_subsystems(m: &CMat, dims: &[usize], perm: &[usize]) -> Result<CMat> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimMismatch(format!(
            "matrix side {} vs dims product {}",
            m.nrows(),
            total
        )));
    }
    if perm.len() != dims.len() {
        return Err(Error::InvalidArgument("permutation length mismatch".into()));
    }
    let mut seen = vec![false; dims.len()];
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
        seen[p] = true;
    }
    // map[i] = flat index of basis vector i after reordering
    let n = dims.len();
    let mut map = vec![0usize; total];
    let mut digits = vec![0usize; n];
    for (i, entry) in map.iter_mut().enumerate() {
        let mut rest = i;
        for j in (0..n).rev() {
            digits[j] = rest % dims[j];
            rest /= dims[j];
        }
        let mut out = 0usize;
        for &src in perm {
            out = out * dims[src] + digits[src];
        }
        *entry = out;
    }
    let mut res = CMat::zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            res[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(res)
}
