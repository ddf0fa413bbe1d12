//! Small dense complex linear algebra: closed-form 2x2 eigensystems and
//! exponentials, plus a general dense eigenvalue solver for the truncated
//! full-space oracle.

use std::ops::{Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::BlockMatrix2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative threshold on the discriminant below which a 2x2 matrix is
/// treated as sitting at an exceptional point.
pub const EP_TOLERANCE: f64 = 1e-12;

/// Default dimension cap for [`eig_n`].
pub const DEFAULT_DIM_CAP: usize = 256;

/// One eigenvalue with its right eigenvector and the matching left vector,
/// an eigenvector of the adjoint for the conjugated eigenvalue. Vectors are
/// unnormalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair2 {
    pub value: Complex64,
    pub right: [Complex64; 2],
    pub left: [Complex64; 2],
}

/// Split `m = c I + M` with `M` traceless; returns `(c, M, s)` where
/// `M^2 = s I`.
fn trace_split(m: &BlockMatrix2) -> (Complex64, BlockMatrix2, Complex64) {
    let c = m.trace() / 2.0;
    let traceless = *m - BlockMatrix2::identity().scale(c);
    let half_gap = traceless[(0, 0)];
    let s = half_gap * half_gap + traceless[(0, 1)] * traceless[(1, 0)];
    (c, traceless, s)
}

/// Nonzero null vector of the singular 2x2 matrix `a`, taken from its
/// larger row.
fn null_vector(a: &BlockMatrix2) -> [Complex64; 2] {
    let r0 = a[(0, 0)].norm_sqr() + a[(0, 1)].norm_sqr();
    let r1 = a[(1, 0)].norm_sqr() + a[(1, 1)].norm_sqr();
    let (p, q) = if r0 >= r1 {
        (a[(0, 0)], a[(0, 1)])
    } else {
        (a[(1, 0)], a[(1, 1)])
    };
    [-q, p]
}

/// Whether `m` is at an exceptional point under the scale-aware test
/// `|gap^2 + 4 m01 m10| < EP_TOLERANCE * max(1, |gap|^2)`.
pub fn is_defective_discriminant(m: &BlockMatrix2) -> bool {
    let (_, traceless, s) = trace_split(m);
    let gap_sq = (2.0 * traceless[(0, 0)]).norm_sqr();
    (4.0 * s).norm() < EP_TOLERANCE * gap_sq.max(1.0)
}

/// Eigenvalues and right/left eigenvectors of a 2x2 complex matrix.
///
/// The first pair carries `c + sqrt(s)` with the principal square root.
/// At an exceptional point the matrix has a single eigenvector and
/// [`Error::DefectiveMatrix`] is returned with the coalesced eigenvalues.
/// A scalar matrix `c I` is diagonalizable and returns the standard basis.
pub fn eig2(m: &BlockMatrix2) -> Result<[Eigenpair2; 2]> {
    let (c, traceless, s) = trace_split(m);
    let root = s.sqrt();
    let values = [c + root, c - root];

    if is_defective_discriminant(m) {
        let scale = m.frobenius_norm().max(1.0);
        if traceless.frobenius_norm() <= EP_TOLERANCE * scale {
            let e0 = [ONE, ZERO];
            let e1 = [ZERO, ONE];
            return Ok([
                Eigenpair2 {
                    value: c,
                    right: e0,
                    left: e0,
                },
                Eigenpair2 {
                    value: c,
                    right: e1,
                    left: e1,
                },
            ]);
        }
        return Err(Error::DefectiveMatrix {
            eigenvalues: [c, c],
        });
    }

    let adj = m.adjoint();
    let pair = |value: Complex64| {
        let right = null_vector(&(*m - BlockMatrix2::identity().scale(value)));
        let left = null_vector(&(adj - BlockMatrix2::identity().scale(value.conj())));
        Eigenpair2 { value, right, left }
    };
    Ok([pair(values[0]), pair(values[1])])
}

/// `exp(scale * m)` by the trace split `scale * m = c I + M`, `M^2 = s I`:
/// `exp = e^c (cosh(sqrt s) I + sinh(sqrt s)/sqrt(s) M)`.
pub fn expm2(m: &BlockMatrix2, scale: f64) -> BlockMatrix2 {
    let (c, traceless, s) = trace_split(&m.scale(scale.into()));
    let (even, odd) = exp_even_odd(c, s);
    BlockMatrix2::identity().scale(even) + traceless.scale(odd)
}

/// `(e^c cosh z, e^c sinh(z)/z)` with `z^2 = s`.
fn exp_even_odd(c: Complex64, s: Complex64) -> (Complex64, Complex64) {
    if s.norm() < 1e-6 {
        // Taylor series in s; truncation error below s^4 / 8!.
        let ec = c.exp();
        let even = ONE + s / 2.0 + s * s / 24.0 + s * s * s / 720.0;
        let odd = ONE + s / 6.0 + s * s / 120.0 + s * s * s / 5040.0;
        return (ec * even, ec * odd);
    }
    let z = s.sqrt();
    let plus = (c + z).exp();
    let minus = (c - z).exp();
    let even = (plus + minus) / 2.0;
    let odd = if z.norm() < 1.0 {
        c.exp() * z.sinh() / z
    } else {
        (plus - minus) / (2.0 * z)
    };
    (even, odd)
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![ONE; dim])
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Block-diagonal matrix assembled from 2x2 blocks.
    pub fn block_diagonal(blocks: &[BlockMatrix2]) -> Self {
        let mut m = Self::zeros(2 * blocks.len());
        for (k, b) in blocks.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    m[(2 * k + i, 2 * k + j)] = b[(i, j)];
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let d = other.dim;
        Self::from_fn(self.dim * d, |i, j| {
            self[(i / d, j / d)] * other[(i % d, j % d)]
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `A v` for a column vector `v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;

    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;

    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        DenseMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

const SCHUR_MAX_ITER_PER_DIM: usize = 60;

/// All eigenvalues of a general complex matrix with the default cap.
pub fn eig_n(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    eig_n_capped(m, DEFAULT_DIM_CAP)
}

/// Complex Schur decomposition; the eigenvalues are the diagonal of the
/// triangular factor.
pub fn eig_n_capped(m: &DenseMatrix, cap: usize) -> Result<Vec<Complex64>> {
    let n = m.dim();
    if n > cap {
        return Err(Error::DimensionTooLarge { dim: n, cap });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let a = nalgebra::DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    let max_iter = SCHUR_MAX_ITER_PER_DIM * n;
    let schur = nalgebra::Schur::try_new(a, f64::EPSILON, max_iter)
        .ok_or(Error::ConvergenceFailure { max_iter })?;
    let t = schur.unpack().1;
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(m: [[f64; 2]; 2]) -> BlockMatrix2 {
        BlockMatrix2::from_real(m)
    }

    /// exp(A) by a 30-term Taylor series on A / 2^k, then k squarings.
    fn series_expm(m: &BlockMatrix2, scale: f64) -> BlockMatrix2 {
        let a = m.scale(scale.into());
        let k = (a.frobenius_norm().max(1.0).log2().ceil() as i32 + 4).max(0);
        let small = a.scale((0.5f64.powi(k)).into());
        let mut term = BlockMatrix2::identity();
        let mut sum = BlockMatrix2::identity();
        for j in 1..30 {
            term = (term * small).scale((1.0 / j as f64).into());
            sum = sum + term;
        }
        for _ in 0..k {
            sum = sum * sum;
        }
        sum
    }

    fn sorted_re(pairs: &[Eigenpair2; 2]) -> [f64; 2] {
        let mut v = [pairs[0].value.re, pairs[1].value.re];
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn eig2_diagonal() {
        let pairs = eig2(&real([[2.5, 0.0], [0.0, -1.5]])).unwrap();
        assert_eq!(sorted_re(&pairs), [-1.5, 2.5]);
    }

    #[test]
    fn eig2_coupled_block() {
        let m = real([[2.5, 1.0], [-1.0, -1.5]]);
        let pairs = eig2(&m).unwrap();
        let s3 = 3f64.sqrt();
        assert!((pairs[0].value - Complex64::new(0.5 + s3, 0.0)).norm() < 1e-14);
        assert!((pairs[1].value - Complex64::new(0.5 - s3, 0.0)).norm() < 1e-14);
        // independent root check: det(m - lambda I) vanishes
        for p in &pairs {
            let shifted = m - BlockMatrix2::identity().scale(p.value);
            assert!(shifted.det().norm() < 1e-12);
        }
        for p in &pairs {
            let mv = m.apply(&p.right);
            let lv = m.adjoint().apply(&p.left);
            for i in 0..2 {
                assert!((mv[i] - p.value * p.right[i]).norm() < 1e-12);
                assert!((lv[i] - p.value.conj() * p.left[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eig2_detects_exceptional_point() {
        match eig2(&real([[2.5, 2.0], [-2.0, -1.5]])) {
            Err(Error::DefectiveMatrix { eigenvalues }) => {
                assert!((eigenvalues[0] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
            }
            other => panic!("expected DefectiveMatrix, got {other:?}"),
        }
    }

    #[test]
    fn eig2_scalar_matrix_is_not_defective() {
        let pairs = eig2(&real([[0.7, 0.0], [0.0, 0.7]])).unwrap();
        assert_eq!(pairs[0].right, [ONE, ZERO]);
        assert_eq!(pairs[1].right, [ZERO, ONE]);
    }

    #[test]
    fn expm2_examples() {
        let e = expm2(&BlockMatrix2::zero(), 3.7);
        assert!(e.approx_eq(&BlockMatrix2::identity(), 0.0, 0.0));

        let e = expm2(&real([[2.5, 0.0], [0.0, -1.5]]), -1.0);
        let expected = real([[(-2.5f64).exp(), 0.0], [0.0, 1.5f64.exp()]]);
        assert!(e.approx_eq(&expected, 1e-15, 1e-14));
        assert!((e[(0, 0)].re - 0.082085).abs() < 1e-6);
        assert!((e[(1, 1)].re - 4.481689).abs() < 1e-6);

        let m = real([[2.5, 1.0], [-1.0, -1.5]]);
        let s3 = 3f64.sqrt();
        let closed = (BlockMatrix2::identity().scale(s3.cosh().into())
            - real([[2.0, 1.0], [-1.0, -2.0]]).scale((s3.sinh() / s3).into()))
        .scale((-0.5f64).exp().into());
        let e = expm2(&m, -1.0);
        assert!(e.approx_eq(&closed, 1e-14, 1e-13));
        let series = series_expm(&m, -1.0);
        assert!((e - series).frobenius_norm() <= 1e-10 * series.frobenius_norm());
    }

    #[test]
    fn expm2_matches_series_across_regimes() {
        // unbroken, near-EP, at EP, broken, complex entries
        let i = Complex64::i();
        let cases = [
            real([[2.5, 1.0], [-1.0, -1.5]]),
            real([[2.5, 1.999999], [-1.999999, -1.5]]),
            real([[2.5, 2.0], [-2.0, -1.5]]),
            real([[2.5, 3.0], [-3.0, -1.5]]),
            BlockMatrix2::new(ONE + i, 0.3 * i, -ONE, 2.0 * i),
        ];
        for m in &cases {
            for scale in [-5.0, -1.0, -0.2, 0.01, 0.7, 2.0] {
                let e = expm2(m, scale);
                let series = series_expm(m, scale);
                assert!(
                    (e - series).frobenius_norm() <= 1e-10 * series.frobenius_norm(),
                    "{m:?} scale {scale}"
                );
            }
        }
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_same_multiset(mut got: Vec<Complex64>, expected: &[Complex64], tol: f64) {
        assert_eq!(got.len(), expected.len());
        for e in expected {
            let (idx, dist) = got
                .iter()
                .enumerate()
                .map(|(k, g)| (k, (g - e).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(dist < tol, "{e} not found (closest at {dist:e})");
            got.swap_remove(idx);
        }
    }

    #[test]
    fn eig_n_simple_cases() {
        assert_same_multiset(eig_n(&DenseMatrix::identity(4)).unwrap(), &[ONE; 4], 1e-14);
        let b = real([[2.5, 0.0], [0.0, -1.5]]);
        let m = DenseMatrix::block_diagonal(&[b, b]);
        assert_same_multiset(
            eig_n(&m).unwrap(),
            &[c(2.5), c(-1.5), c(2.5), c(-1.5)],
            1e-12,
        );
    }

    #[test]
    fn eig_n_recovers_block_spectra_under_similarity() {
        let blocks = [
            real([[2.5, 1.0], [-1.0, -1.5]]),
            real([[2.5, 3.0], [-3.0, -1.5]]),
            real([[5.5, 1.0], [-1.0, 1.5]]),
            BlockMatrix2::new(ONE, Complex64::i(), c(0.5), c(-2.0)),
        ];
        let d = DenseMatrix::block_diagonal(&blocks);
        // dense similarity so the solver sees no block structure
        let n = d.dim();
        let p = DenseMatrix::from_fn(n, |i, j| {
            let v = ((i * 7 + j * 3) % 11) as f64 / 11.0;
            if i == j {
                c(2.0 + v)
            } else {
                Complex64::new(v - 0.5, 0.1 * v)
            }
        });
        let p_inv = invert(&p);
        let m = &(&p * &d) * &p_inv;
        let expected: Vec<Complex64> = blocks.iter().flat_map(eig_pair_values).collect();
        let got = eig_n(&m).unwrap();
        for &lambda in &got {
            let res = residual(&m, lambda);
            assert!(res <= 1e-8 * m.frobenius_norm(), "residual {res:e}");
        }
        assert_same_multiset(got, &expected, 1e-8);
    }

    #[test]
    fn eig_n_rejects_oversized_input() {
        let m = DenseMatrix::identity(5);
        assert!(matches!(
            eig_n_capped(&m, 4),
            Err(Error::DimensionTooLarge { dim: 5, cap: 4 })
        ));
    }

    fn eig_pair_values(b: &BlockMatrix2) -> [Complex64; 2] {
        let half = (b[(0, 0)] - b[(1, 1)]) / 2.0;
        let root = (half * half + b[(0, 1)] * b[(1, 0)]).sqrt();
        let mid = b.trace() / 2.0;
        [mid + root, mid - root]
    }

    /// Smallest singular-value proxy: min over unit vectors is hard, so use
    /// inverse iteration on (m - lambda I) and report ||(m - lambda) v||.
    fn residual(m: &DenseMatrix, lambda: Complex64) -> f64 {
        let n = m.dim();
        let shifted = m - &DenseMatrix::identity(n).scale(lambda + Complex64::new(1e-10, 1e-10));
        let inv = invert(&shifted);
        let mut v = vec![ONE; n];
        for _ in 0..3 {
            v = inv.apply(&v);
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= norm);
        }
        let mv = m.apply(&v);
        mv.iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Gauss-Jordan inverse with partial pivoting.
    fn invert(m: &DenseMatrix) -> DenseMatrix {
        let n = m.dim();
        let mut a = m.clone();
        let mut inv = DenseMatrix::identity(n);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .unwrap();
            for j in 0..n {
                let t = a[(col, j)];
                a[(col, j)] = a[(piv, j)];
                a[(piv, j)] = t;
                let t = inv[(col, j)];
                inv[(col, j)] = inv[(piv, j)];
                inv[(piv, j)] = t;
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for i in 0..n {
                if i != col {
                    let f = a[(i, col)];
                    for j in 0..n {
                        let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                        a[(i, j)] -= f * ac;
                        inv[(i, j)] -= f * ic;
                    }
                }
            }
        }
        inv
    }
}
