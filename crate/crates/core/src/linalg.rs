//! Dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::ComplexField as _;
use nalgebra::{Cholesky, Complex, DMatrix, DVector, Dyn};

use crate::Real;

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Largest entrywise deviation `|A_kl - conj(A_lk)|`.
pub fn hermitian_deviation<T: Real>(a: &CMatrix<T>) -> T {
    let n = a.nrows();
    let mut worst = T::zero();
    for k in 0..n {
        for l in k..n {
            let d = (a[(k, l)] - a[(l, k)].conj()).modulus();
            worst = worst.max(d);
        }
    }
    worst
}

/// Largest entry modulus.
pub fn max_modulus<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().fold(T::zero(), |m, z| m.max(z.modulus()))
}

pub fn frobenius<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().fold(T::zero(), |s, z| s + z.modulus_squared()).sqrt()
}

/// Averages `A` with its conjugate transpose.
pub fn hermitize<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let half = T::lit(0.5);
    (a + a.adjoint()).map(|z| z * half)
}

/// Real symmetric embedding `[[Re A, -Im A], [Im A, Re A]]` of a Hermitian matrix.
///
/// Eigenvalues of the embedding are those of `A`, each repeated twice, and
/// matrix functions (inverse, square root) commute with the embedding.
pub fn real_embedding<T: Real>(a: &CMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        for l in 0..n {
            let z = a[(k, l)];
            r[(k, l)] = z.re;
            r[(n + k, n + l)] = z.re;
            r[(n + k, l)] = z.im;
            r[(k, n + l)] = -z.im;
        }
    }
    r
}

/// Inverse of [`real_embedding`]; reads the left block column.
pub fn from_real_embedding<T: Real>(r: &DMatrix<T>) -> CMatrix<T> {
    let n = r.nrows() / 2;
    CMatrix::from_fn(n, n, |k, l| Complex::new(r[(k, l)], r[(n + k, l)]))
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen<T: Real>(a: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let eig = hermitize(a).symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue<T: Real>(a: &CMatrix<T>) -> T {
    if a.nrows() == 0 {
        return T::zero();
    }
    hermitian_eigen(a).0[0]
}

/// Factor `V` with `V V^H = A` for a Hermitian PSD `A`; eigen-directions whose
/// eigenvalue falls below `rel_cutoff * lambda_max` are dropped.
pub fn psd_factor<T: Real>(a: &CMatrix<T>, rel_cutoff: T) -> CMatrix<T> {
    let n = a.nrows();
    let (values, vectors) = hermitian_eigen(a);
    let top = values.last().copied().unwrap_or_else(T::zero);
    if top <= T::zero() {
        return CMatrix::zeros(n, 0);
    }
    let keep: Vec<usize> = (0..n).filter(|&i| values[i] > rel_cutoff * top).collect();
    CMatrix::from_fn(n, keep.len(), |r, c| {
        let i = keep[c];
        vectors[(r, i)] * values[i].sqrt()
    })
}

/// Solves `A x = b` for Hermitian positive-definite `A`.
pub fn solve_hpd<T: Real>(a: &CMatrix<T>, b: &CVector<T>) -> Option<CVector<T>> {
    Cholesky::<Complex<T>, Dyn>::new(hermitize(a)).map(|c| c.solve(b))
}

/// `Re Tr(A B)` for Hermitian `A`, `B`.
pub fn real_trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let n = a.nrows();
    let mut s = T::zero();
    for k in 0..n {
        for l in 0..n {
            let (x, y) = (a[(k, l)], b[(l, k)]);
            s += x.re * y.re - x.im * y.im;
        }
    }
    s
}

/// `x^H y`.
pub fn inner<T: Real>(x: &CVector<T>, y: &CVector<T>) -> Complex<T> {
    x.iter()
        .zip(y.iter())
        .fold(Complex::new(T::zero(), T::zero()), |s, (a, b)| s + a.conj() * b)
}

pub fn norm_sq<T: Real>(x: &CVector<T>) -> T {
    x.iter().fold(T::zero(), |s, z| s + z.modulus_squared())
}

/// Outer product `x x^H`.
pub fn outer_self<T: Real>(x: &CVector<T>) -> CMatrix<T> {
    CMatrix::from_fn(x.len(), x.len(), |k, l| x[k] * x[l].conj())
}
