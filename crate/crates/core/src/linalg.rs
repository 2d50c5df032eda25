//! Dense complex linear algebra shared by the rest of the crate.
//!
//! Bipartite matrices use row-major index order: the basis vector
//! `|i⟩ ⊗ |a⟩` of a `d × r` space sits at index `i * r + a`.

use ndarray::{Array1, Array2, ArrayView2, Axis, ShapeBuilder};
use ndarray_linalg::{Eigh, EigValsh, Inverse, Norm, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Array2<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    Array2::from_diag_elem(n, ONE)
}

pub fn diag(values: &[f64]) -> CMat {
    Array2::from_diag(&Array1::from_iter(values.iter().map(|&v| c(v))))
}

pub fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

pub fn check_square(m: &CMat) -> Result<usize> {
    let (r, cl) = m.dim();
    if r != cl {
        return Err(Error::Shape { expected: format!("square matrix, {r}x{r}"), found: format!("{r}x{cl}") });
    }
    Ok(r)
}

pub fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape { expected: format!("dim {a}"), found: format!("dim {b}") });
    }
    Ok(())
}

/// Largest elementwise deviation `|m_ij - conj(m_ji)|`.
pub fn max_asymmetry(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// `(m + m†) / 2`.
pub fn hermitize(m: &CMat) -> CMat {
    let mut out = m.clone();
    let n = m.nrows();
    for i in 0..n {
        out[[i, i]] = c(m[[i, i]].re);
        for j in (i + 1)..n {
            let v = (m[[i, j]] + m[[j, i]].conj()) * 0.5;
            out[[i, j]] = v;
            out[[j, i]] = v.conj();
        }
    }
    out
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diag().sum()
}

pub fn frobenius(m: &CMat) -> f64 {
    m.norm_l2()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a Hermitian matrix.
pub fn eigh(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    // LAPACK reads a row-major complex matrix as its transpose, which conjugates the
    // eigenvectors; a column-major copy avoids that
    let mut f = Array2::zeros(m.raw_dim().f());
    f.assign(m);
    let (w, v) = f.eigh(UPLO::Upper)?;
    Ok((w.to_vec(), v))
}

pub fn eigvalsh(m: &CMat) -> Result<Vec<f64>> {
    Ok(m.eigvalsh(UPLO::Upper)?.to_vec())
}

/// `V diag(values) V†`.
pub fn reconstruct(values: &[f64], vectors: &CMat) -> CMat {
    let mut scaled = vectors.clone();
    for (j, mut col) in scaled.axis_iter_mut(Axis(1)).enumerate() {
        col.mapv_inplace(|z| z * values[j]);
    }
    scaled.dot(&dagger(vectors))
}

/// Eigenvalues at or below `n·ε·max|λ|` are roundoff; their square roots would not be.
pub fn roundoff_floor(values: &[f64]) -> f64 {
    let top = values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    values.len() as f64 * f64::EPSILON * top
}

/// Principal square root of a positive semi-definite matrix; negative and roundoff-level
/// eigenvalues are set to zero.
pub fn psd_sqrt(m: &CMat) -> Result<CMat> {
    let (w, v) = eigh(m)?;
    let floor = roundoff_floor(&w);
    let roots: Vec<f64> = w.iter().map(|&x| if x > floor { x.sqrt() } else { 0.0 }).collect();
    Ok(reconstruct(&roots, &v))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Reduced matrix on the first factor of a `da × db` bipartite matrix.
pub fn partial_trace_second(m: &CMat, da: usize, db: usize) -> CMat {
    let mut out = Array2::zeros((da, da));
    for i in 0..da {
        for j in 0..da {
            let mut s = ZERO;
            for k in 0..db {
                s += m[[i * db + k, j * db + k]];
            }
            out[[i, j]] = s;
        }
    }
    out
}

/// Reduced matrix on the second factor of a `da × db` bipartite matrix.
pub fn partial_trace_first(m: &CMat, da: usize, db: usize) -> CMat {
    let mut out = Array2::zeros((db, db));
    for k in 0..db {
        for l in 0..db {
            let mut s = ZERO;
            for i in 0..da {
                s += m[[i * db + k, i * db + l]];
            }
            out[[k, l]] = s;
        }
    }
    out
}

/// `(A ⊗ I_r) X` for a system operator `A` of size `d` and `X` of size `d·r`.
pub fn lmul_sys(a: &CMat, x: &CMat, r: usize) -> CMat {
    if r == 1 {
        return a.dot(x);
    }
    let d = a.nrows();
    let cols = x.ncols();
    let flat = x.as_standard_layout().into_owned().into_shape_with_order((d, r * cols)).expect("contiguous reshape");
    a.dot(&flat).into_shape_with_order((d * r, cols)).expect("contiguous reshape")
}

/// `(A ⊗ I_r) X (A ⊗ I_r)†`.
pub fn conjugate_sys(a: &CMat, x: &CMat, r: usize) -> CMat {
    let ax = lmul_sys(a, x, r);
    lmul_sys(a, &dagger(&ax), r).mapv(|z| z.conj()).reversed_axes()
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = check_square(a)?;
    if n == 0 {
        return Ok(CMat::zeros((0, 0)));
    }
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;
    let norm1 = one_norm(&a.view());
    let s = if norm1 > THETA_13 { (norm1 / THETA_13).log2().ceil() as i32 } else { 0 };
    let a = a.mapv(|z| z / 2f64.powi(s));
    let id = identity(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let u_inner = &a6 * c(B[13]) + &a4 * c(B[11]) + &a2 * c(B[9]);
    let u = a.dot(&(a6.dot(&u_inner) + &a6 * c(B[7]) + &a4 * c(B[5]) + &a2 * c(B[3]) + &id * c(B[1])));
    let v_inner = &a6 * c(B[12]) + &a4 * c(B[10]) + &a2 * c(B[8]);
    let v = a6.dot(&v_inner) + &a6 * c(B[6]) + &a4 * c(B[4]) + &a2 * c(B[2]) + &id * c(B[0]);
    let q_inv = (&v - &u).inv()?;
    let mut r = q_inv.dot(&(&v + &u));
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

pub fn one_norm(a: &ArrayView2<Complex64>) -> f64 {
    a.axis_iter(Axis(1)).map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Column-stacking vectorization: `vec(X)[i + j·n] = X[i, j]`.
pub fn vectorize(x: &CMat) -> Array1<Complex64> {
    let n = x.nrows();
    let mut v = Array1::zeros(n * x.ncols());
    for j in 0..x.ncols() {
        for i in 0..n {
            v[i + j * n] = x[[i, j]];
        }
    }
    v
}

pub fn unvectorize(v: &Array1<Complex64>, n: usize) -> CMat {
    let mut x = Array2::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            x[[i, j]] = v[i + j * n];
        }
    }
    x
}

/// Sum of singular values.
pub fn trace_norm_general(a: &CMat) -> Result<f64> {
    use ndarray_linalg::SVD;
    let (_, s, _) = a.svd(false, false)?;
    Ok(s.sum())
}

/// Trace norm of a Hermitian matrix, skipping rows and columns that are identically zero.
pub fn trace_norm_hermitian(a: &CMat) -> Result<f64> {
    let n = a.nrows();
    let live: Vec<usize> = (0..n).filter(|&i| a.row(i).iter().any(|z| *z != ZERO)).collect();
    if live.is_empty() {
        return Ok(0.0);
    }
    let block = if live.len() == n { hermitize(a) } else { hermitize(&a.select(Axis(0), &live).select(Axis(1), &live)) };
    Ok(eigvalsh(&block)?.iter().map(|x| x.abs()).sum())
}
