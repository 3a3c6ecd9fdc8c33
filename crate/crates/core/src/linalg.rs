//! Dense complex linear algebra on top of `faer`.
//!
//! Vectorization is column stacking: `vec(X)[i + D*j] = X[i, j]`, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

pub use faer::c64;

use crate::error::{Error, Result};

/// Dense complex matrix.
pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

#[inline]
pub fn cx(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

pub fn zeros(n: usize) -> CMat {
    Mat::zeros(n, n)
}

pub fn eye(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn from_rows(rows: &[&[c64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    Mat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    Mat::from_fn(n, m, |i, j| re(rows[i][j]))
}

pub fn diag(entries: &[c64]) -> CMat {
    let n = entries.len();
    Mat::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
}

pub fn dagger(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn transpose(a: &CMat) -> CMat {
    a.transpose().to_owned()
}

pub fn conj(a: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].conj())
}

pub fn scale(a: &CMat, k: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * k)
}

pub fn scale_re(a: &CMat, k: f64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * k)
}

/// `a += k * b`
pub fn axpy(a: &mut CMat, k: c64, b: &CMat) {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            a[(i, j)] += k * b[(i, j)];
        }
    }
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn trace(a: &CMat) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Kronecker product of a list of factors, first factor most significant.
pub fn kron_all(factors: &[CMat]) -> CMat {
    let mut acc = eye(1);
    for f in factors {
        acc = kron(&acc, f);
    }
    acc
}

/// Adds `k * (a ⊗ b)` into `target`, skipping structural zeros of `a` and `b`.
pub fn add_kron(target: &mut CMat, k: c64, a: &CMat, b: &CMat) {
    let (br, bc) = (b.nrows(), b.ncols());
    let bnz: Vec<(usize, usize, c64)> = nonzeros(b);
    for (ai, aj, av) in nonzeros(a) {
        let s = k * av;
        for &(bi, bj, bv) in &bnz {
            target[(ai * br + bi, aj * bc + bj)] += s * bv;
        }
    }
}

pub fn nonzeros(a: &CMat) -> Vec<(usize, usize, c64)> {
    let mut out = Vec::new();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)];
            if v != ZERO {
                out.push((i, j, v));
            }
        }
    }
    out
}

pub fn vectorize(a: &CMat) -> CMat {
    let (n, m) = (a.nrows(), a.ncols());
    Mat::from_fn(n * m, 1, |k, _| a[(k % n, k / n)])
}

pub fn devectorize(v: &CMat, n: usize) -> CMat {
    assert_eq!(v.nrows(), n * n);
    Mat::from_fn(n, n, |i, j| v[(i + n * j, 0)])
}

/// Frobenius norm.
pub fn fro(a: &CMat) -> f64 {
    a.norm_l2()
}

/// Max absolute entry.
pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn dist(a: &CMat, b: &CMat) -> f64 {
    op_norm(&(a - b))
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    a.nrows() == a.ncols() && max_abs(&(a - a.adjoint())) <= tol * (1.0 + max_abs(a))
}

pub fn hermitian_part(a: &CMat) -> CMat {
    scale_re(&(a + a.adjoint()), 0.5)
}

/// Operator norm (largest singular value). Hermitian input goes through the
/// Hermitian eigensolver.
pub fn op_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    if a.nrows() == 1 && a.ncols() == 1 {
        return a[(0, 0)].norm();
    }
    let m = max_abs(a);
    if m == 0.0 {
        return 0.0;
    }
    if a.nrows() == a.ncols() && max_abs(&(a - a.adjoint())) <= 1e-14 * m {
        let ev = herm_eigvals(&hermitian_part(a));
        return ev.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    }
    singular_values(a)[0]
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    a.singular_values().expect("svd did not converge")
}

/// Trace norm (sum of singular values).
pub fn trace_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    if is_hermitian(a, 1e-14) {
        return herm_eigvals(&hermitian_part(a)).iter().map(|x| x.abs()).sum();
    }
    singular_values(a).iter().sum()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn herm_eigvals(a: &CMat) -> Vec<f64> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .expect("hermitian eigensolver did not converge")
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and
/// orthonormal eigenvectors as columns.
pub fn herm_eig(a: &CMat) -> (Vec<f64>, CMat) {
    let e = a
        .self_adjoint_eigen(Side::Lower)
        .expect("hermitian eigensolver did not converge");
    let vals = e.S().column_vector().iter().map(|x| x.re).collect();
    (vals, e.U().to_owned())
}

/// Eigenvalues and right eigenvectors of a general complex matrix.
pub fn eig(a: &CMat) -> Result<(Vec<c64>, CMat)> {
    let e = a
        .eigen()
        .map_err(|_| Error::Numeric("general eigensolver did not converge".into()))?;
    let vals = e.S().column_vector().iter().copied().collect();
    Ok((vals, e.U().to_owned()))
}

pub fn eigvals(a: &CMat) -> Result<Vec<c64>> {
    a.eigenvalues()
        .map_err(|_| Error::Numeric("general eigensolver did not converge".into()))
}

/// Solves `a x = b` by partially pivoted LU.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let lu = a.partial_piv_lu();
    let x = lu.solve(b);
    if x.col_iter().all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite())) {
        Ok(x)
    } else {
        Err(Error::Numeric("singular linear system".into()))
    }
}

/// Cholesky factor `L` with `a = L L*`.
pub fn cholesky(a: &CMat) -> Result<CMat> {
    let llt = a
        .llt(Side::Lower)
        .map_err(|_| Error::Numeric("matrix is not positive definite".into()))?;
    Ok(llt.L().to_owned())
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &CMat) -> CMat {
    let n = l.nrows();
    let mut x = eye(n);
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(
        l.as_ref(),
        x.as_mut(),
        faer::Par::Seq,
    );
    x
}

/// Full unitary `Q` of the QR decomposition of `a`.
pub fn qr_q(a: &CMat) -> CMat {
    a.qr().compute_Q()
}

fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant (Higham 2005).
pub fn expm(a: &CMat) -> CMat {
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
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    if norm == 0.0 {
        return eye(n);
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = scale_re(a, 0.5f64.powi(s));
    let id = eye(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |c: [f64; 4], m: [&CMat; 4]| -> CMat {
        let mut out = scale_re(m[0], c[0]);
        for k in 1..4 {
            axpy(&mut out, re(c[k]), m[k]);
        }
        out
    };
    let u_inner = lin([B[13], B[11], B[9], B[7]], [&a6, &a4, &a2, &id]);
    let u_tail = lin([B[5], B[3], B[1], 0.0], [&a4, &a2, &id, &id]);
    let u = &a * &(&(&a6 * &u_inner) + &u_tail);
    let v_inner = lin([B[12], B[10], B[8], B[6]], [&a6, &a4, &a2, &id]);
    let v_tail = lin([B[4], B[2], B[0], 0.0], [&a4, &a2, &id, &id]);
    let v = &(&a6 * &v_inner) + &v_tail;
    let p = &v + &u;
    let q = &v - &u;
    let mut r = solve(&q, &p).expect("Padé denominator is singular");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Fixed-step classical Runge–Kutta integration of `x' = a x`; used as an
/// independent check of [`expm`].
pub fn rk4_flow(a: &CMat, x0: &CMat, t: f64, steps: usize) -> CMat {
    let h = t / steps as f64;
    let mut x = x0.clone();
    for _ in 0..steps {
        let k1 = a * &x;
        let k2 = a * &(&x + scale_re(&k1, h / 2.0));
        let k3 = a * &(&x + scale_re(&k2, h / 2.0));
        let k4 = a * &(&x + scale_re(&k3, h));
        let mut inc = k1;
        axpy(&mut inc, re(2.0), &k2);
        axpy(&mut inc, re(2.0), &k3);
        axpy(&mut inc, ONE, &k4);
        axpy(&mut x, re(h / 6.0), &inc);
    }
    x
}

/// Orthonormal basis of traceless Hermitian `q×q` matrices (generalized
/// Gell-Mann matrices, normalized to `tr(g²) = 2`). For `q = 2` these are the
/// Pauli matrices σ₁, σ₂, σ₃.
pub fn gell_mann(q: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    for j in 0..q {
        for k in (j + 1)..q {
            let mut s = zeros(q);
            s[(j, k)] = ONE;
            s[(k, j)] = ONE;
            out.push(s);
            let mut a = zeros(q);
            a[(j, k)] = cx(0.0, -1.0);
            a[(k, j)] = cx(0.0, 1.0);
            out.push(a);
        }
    }
    for l in 1..q {
        let c = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut d = zeros(q);
        for m in 0..l {
            d[(m, m)] = re(c);
        }
        d[(l, l)] = re(-c * l as f64);
        out.push(d);
    }
    if q == 2 {
        // order as σ₁, σ₂, σ₃
        return vec![out[0].clone(), out[1].clone(), out[2].clone()];
    }
    out
}

pub mod pauli {
    use super::*;

    pub fn id() -> CMat {
        eye(2)
    }
    pub fn x() -> CMat {
        from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }
    pub fn y() -> CMat {
        from_rows(&[&[ZERO, cx(0.0, -1.0)], &[cx(0.0, 1.0), ZERO]])
    }
    pub fn z() -> CMat {
        from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }
    /// σ⁺ = |0⟩⟨1|.
    pub fn plus() -> CMat {
        from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
    }
    /// σ⁻ = |1⟩⟨0|.
    pub fn minus() -> CMat {
        from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]])
    }
    pub fn sigma(j: usize) -> CMat {
        match j {
            0 => id(),
            1 => x(),
            2 => y(),
            3 => z(),
            _ => panic!("pauli index out of range"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_of_product_is_kron_action() {
        let a = from_rows(&[&[cx(1.0, 2.0), cx(0.5, 0.0)], &[cx(-1.0, 0.3), cx(0.0, 1.0)]]);
        let x = from_rows(&[&[cx(0.2, 0.0), cx(1.0, -1.0)], &[cx(3.0, 0.0), cx(0.0, 0.7)]]);
        let b = from_rows(&[&[cx(0.0, 1.0), cx(2.0, 0.0)], &[cx(1.0, 1.0), cx(-0.4, 0.0)]]);
        let lhs = vectorize(&(&(&a * &x) * &b));
        let rhs = &kron(&transpose(&b), &a) * &vectorize(&x);
        assert!(max_abs(&(lhs - rhs)) < 1e-14);
        assert!(max_abs(&(devectorize(&vectorize(&x), 2) - &x)) < 1e-15);
    }

    #[test]
    fn expm_of_pauli_rotation() {
        let t = 0.7;
        let a = scale(&pauli::y(), cx(0.0, -t));
        let e = expm(&a);
        let expected = &scale_re(&eye(2), t.cos()) - &scale(&pauli::y(), cx(0.0, t.sin()));
        assert!(max_abs(&(e - expected)) < 1e-14);
    }

    #[test]
    fn expm_large_norm_matches_rk4() {
        let a = Mat::from_fn(4, 4, |i, j| cx(((i * 3 + j) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.3));
        let x0 = eye(4);
        let e = expm(&scale_re(&a, 1.5));
        let r = rk4_flow(&a, &x0, 1.5, 20000);
        assert!(max_abs(&(&e - &r)) / max_abs(&e) < 1e-9);
    }

    #[test]
    fn gell_mann_is_orthonormal() {
        for q in 2..5 {
            let g = gell_mann(q);
            assert_eq!(g.len(), q * q - 1);
            for (a, x) in g.iter().enumerate() {
                assert!(trace(x).norm() < 1e-14);
                for (b, y) in g.iter().enumerate() {
                    let ip = trace(&(x * y)).re;
                    let expect = if a == b { 2.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn norms_of_simple_matrices() {
        assert!((op_norm(&eye(3)) - 1.0).abs() < 1e-14);
        assert!((trace_norm(&pauli::z()) - 2.0).abs() < 1e-14);
        assert!((op_norm(&scale_re(&pauli::plus(), 2f64.sqrt())) - 2f64.sqrt()).abs() < 1e-14);
    }
}
