//! Dense symmetric linear algebra used by the pipeline.
//!
//! Everything here operates on `f64` and is deterministic: symmetric
//! eigendecomposition via Householder tridiagonalization followed by
//! implicit-shift QL, Cholesky factorization for SPD solves, and a
//! conjugate-gradient solver for the normal equations. Matrices in this
//! crate are small enough (n ≤ a few thousand) that unblocked dense
//! routines are the right tool.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Eigendecomposition of a symmetric matrix: `a = vectors * diag(values) * vectors^T`.
///
/// `values` are sorted ascending; column `j` of `vectors` is the unit
/// eigenvector for `values[j]`.
pub struct SymmetricEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

/// Result of a conjugate-gradient solve.
pub struct CgSolution {
    pub x: Array1<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximum absolute entry of a matrix (max-norm).
pub fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn hypot(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
///
/// On return `q` holds the accumulated orthogonal transform (A = Q T Q^T),
/// `d` the diagonal of T and `e` the subdiagonal (e[0] = 0). Works on a
/// flat row-major buffer; only the lower triangle of the input is read.
fn householder_tridiag(q: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| q[i * n + k].abs()).sum();
            if scale == 0.0 {
                e[i] = q[i * n + l];
            } else {
                for k in 0..=l {
                    q[i * n + k] /= scale;
                    h += q[i * n + k] * q[i * n + k];
                }
                let f = q[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                q[i * n + l] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    q[j * n + i] = q[i * n + j] / h;
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += q[j * n + k] * q[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g_acc += q[k * n + j] * q[i * n + k];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * q[i * n + j];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = q[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        q[j * n + k] -= f * e[k] + g * q[i * n + k];
                    }
                }
            }
        } else {
            e[i] = q[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += q[i * n + k] * q[k * n + j];
                }
                for k in 0..i {
                    q[k * n + j] -= g * q[k * n + i];
                }
            }
        }
        d[i] = q[i * n + i];
        q[i * n + i] = 1.0;
        for j in 0..i {
            q[j * n + i] = 0.0;
            q[i * n + j] = 0.0;
        }
    }
}

/// Implicit-shift QL iteration on a tridiagonal matrix.
///
/// Rotations are applied to the columns of `q` when provided, so that on
/// success `d` holds the eigenvalues and the columns of `q` the
/// eigenvectors of the original matrix.
fn tridiag_ql(d: &mut [f64], e: &mut [f64], q: Option<&mut [f64]>, n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    let mut qbuf = q;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::EigenNonConvergence(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = hypot(g, 1.0);
            let sign_r = if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = qbuf.as_deref_mut() {
                    for k in 0..n {
                        f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn check_square(a: &Array2<f64>) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::Parameter(format!(
            "expected a square matrix, got {r}x{c}"
        )));
    }
    Ok(r)
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(a: &Array2<f64>) -> Result<SymmetricEigen> {
    let n = check_square(a)?;
    let mut q: Vec<f64> = a.iter().copied().collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n > 0 {
        householder_tridiag(&mut q, &mut d, &mut e, n);
        tridiag_ql(&mut d, &mut e, Some(&mut q), n)?;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = Array1::from_iter(order.iter().map(|&i| d[i]));
    let mut vectors = Array2::zeros((n, n));
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[[row, new_col]] = q[row * n + old_col];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Eigenvalues of a symmetric matrix, ascending, without eigenvectors.
pub fn symmetric_eigenvalues(a: &Array2<f64>) -> Result<Array1<f64>> {
    let n = check_square(a)?;
    let mut q: Vec<f64> = a.iter().copied().collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n > 0 {
        householder_tridiag(&mut q, &mut d, &mut e, n);
        tridiag_ql(&mut d, &mut e, None, n)?;
    }
    d.sort_by(f64::total_cmp);
    Ok(Array1::from_vec(d))
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = check_square(a)?;
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag -= l[[j, k]] * l[[j, k]];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(Error::RankDeficient(format!(
                "Cholesky pivot {diag:.3e} at column {j}"
            )));
        }
        let ljj = diag.sqrt();
        l[[j, j]] = ljj;
        for i in (j + 1)..n {
            let mut v = a[[i, j]];
            for k in 0..j {
                v -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = v / ljj;
        }
    }
    Ok(l)
}

/// Solve `L L^T x = b` given the lower Cholesky factor `L`.
pub fn cholesky_solve(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = b.clone();
    for i in 0..n {
        let mut v = x[i];
        for k in 0..i {
            v -= l[[i, k]] * x[k];
        }
        x[i] = v / l[[i, i]];
    }
    for i in (0..n).rev() {
        let mut v = x[i];
        for k in (i + 1)..n {
            v -= l[[k, i]] * x[k];
        }
        x[i] = v / l[[i, i]];
    }
    x
}

/// Solve a symmetric positive-definite system via Cholesky.
pub fn solve_spd(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let l = cholesky(a)?;
    Ok(cholesky_solve(&l, b))
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = check_square(a)?;
    let l = cholesky(a)?;
    let mut inv = Array2::<f64>::zeros((n, n));
    let mut unit = Array1::<f64>::zeros(n);
    for j in 0..n {
        unit[j] = 1.0;
        let col = cholesky_solve(&l, &unit);
        inv.column_mut(j).assign(&col);
        unit[j] = 0.0;
    }
    // symmetrize away rounding drift
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (inv[[i, j]] + inv[[j, i]]);
            inv[[i, j]] = v;
            inv[[j, i]] = v;
        }
    }
    Ok(inv)
}

/// Minimum-norm solve of a symmetric (possibly singular) system using the
/// eigendecomposition: components on eigenvalues below `rel_tol * lambda_max`
/// are dropped.
pub fn solve_sym_pinv(a: &Array2<f64>, b: &Array1<f64>, rel_tol: f64) -> Result<Array1<f64>> {
    let eig = symmetric_eigen(a)?;
    let lam_max = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cutoff = rel_tol * lam_max;
    let n = b.len();
    let mut x = Array1::<f64>::zeros(n);
    for j in 0..n {
        let lam = eig.values[j];
        if lam.abs() > cutoff {
            let coeff = eig.vectors.column(j).dot(b) / lam;
            x.scaled_add(coeff, &eig.vectors.column(j));
        }
    }
    Ok(x)
}

/// Symmetric square root on the nonnegative eigenspace: eigenvalues below
/// zero are clipped. The caller is responsible for PSD validation.
pub fn sym_sqrt_clipped(eig: &SymmetricEigen) -> Array2<f64> {
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for j in 0..n {
        let root = eig.values[j].max(0.0).sqrt();
        scaled.column_mut(j).mapv_inplace(|v| v * root);
    }
    scaled.dot(&eig.vectors.t())
}

/// Conjugate gradients for a symmetric positive-definite system.
///
/// Stops when `||b - A x||_2 <= rel_tol * ||b||_2` or after `max_iter`
/// iterations, whichever comes first.
pub fn conjugate_gradient(
    a: &Array2<f64>,
    b: &Array1<f64>,
    rel_tol: f64,
    max_iter: usize,
) -> CgSolution {
    let n = b.len();
    let b_norm = b.dot(b).sqrt();
    if b_norm == 0.0 {
        return CgSolution {
            x: Array1::zeros(n),
            iterations: 0,
            converged: true,
        };
    }
    let threshold = rel_tol * b_norm;
    let mut x = Array1::<f64>::zeros(n);
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rs = r.dot(&r);
    if rs.sqrt() <= threshold {
        return CgSolution {
            x,
            iterations: 0,
            converged: true,
        };
    }
    for iter in 1..=max_iter {
        let ap = a.dot(&p);
        let denom = p.dot(&ap);
        if denom <= 0.0 {
            return CgSolution {
                x,
                iterations: iter - 1,
                converged: false,
            };
        }
        let alpha = rs / denom;
        x.scaled_add(alpha, &p);
        r.scaled_add(-alpha, &ap);
        let rs_new = r.dot(&r);
        if rs_new.sqrt() <= threshold {
            return CgSolution {
                x,
                iterations: iter,
                converged: true,
            };
        }
        let beta = rs_new / rs;
        p = &r + &(beta * &p);
        rs = rs_new;
    }
    CgSolution {
        x,
        iterations: max_iter,
        converged: false,
    }
}
