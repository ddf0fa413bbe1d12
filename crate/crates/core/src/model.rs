//! Model parameters and the per-subspace Hamiltonian blocks.
//!
//! The Hamiltonian couples a two-level system with splitting `alpha` to an
//! oscillator of quantum `homega` through the non-Hermitian term
//! `mu (sigma_+ a - sigma_- a^dagger)`. It leaves every two-dimensional span
//! of `|n, +1/2>` and `|n+1, -1/2>` invariant; the restriction to that span is
//! a [`BlockMatrix2`] in the basis order `[|n,+1/2>, |n+1,-1/2>]`.

use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Physical inputs. `homega` is the oscillator quantum as one number; the
/// temperature convention is k_B = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    alpha: f64,
    homega: f64,
    mu: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, homega: f64, mu: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "must be finite",
            });
        }
        if !(homega.is_finite() && homega > 0.0) {
            return Err(Error::InvalidParameter {
                name: "homega",
                value: homega,
                reason: "must be finite and positive",
            });
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "mu",
                value: mu,
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self { alpha, homega, mu })
    }

    /// Same `alpha` and `homega`, different coupling.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.alpha, self.homega, mu)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn homega(&self) -> f64 {
        self.homega
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `homega - alpha`, the detuning that sets the exceptional points.
    pub fn delta(&self) -> f64 {
        self.homega - self.alpha
    }
}

/// Oscillator quantum number `n` labelling the `(n+1)`-th invariant subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubspaceIndex(pub u32);

impl SubspaceIndex {
    pub fn n(self) -> u32 {
        self.0
    }

    /// `sqrt(n + 1)`, the ladder matrix element that enters every coupling.
    pub fn ladder(self) -> f64 {
        (f64::from(self.0) + 1.0).sqrt()
    }
}

impl From<u32> for SubspaceIndex {
    fn from(n: u32) -> Self {
        Self(n)
    }
}

/// Dense 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockMatrix2(pub [[Complex64; 2]; 2]);

impl BlockMatrix2 {
    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Self([[m00, m01], [m10, m11]])
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Self::new(
            m[0][0].into(),
            m[0][1].into(),
            m[1][0].into(),
            m[1][1].into(),
        )
    }

    pub fn zero() -> Self {
        Self([[ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Self([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Self([[a, ZERO], [ZERO, d]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Self([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }

    /// Entrywise comparison with `|a - b| <= abs + rel * max(|a|, |b|)`.
    pub fn approx_eq(&self, other: &Self, abs: f64, rel: f64) -> bool {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .all(|(a, b)| (a - b).norm() <= abs + rel * a.norm().max(b.norm()))
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[Complex64; 2], v: &[Complex64; 2]) -> Self {
        Self([
            [u[0] * v[0].conj(), u[0] * v[1].conj()],
            [u[1] * v[0].conj(), u[1] * v[1].conj()],
        ])
    }

    pub fn apply(&self, v: &[Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }
}

impl Index<(usize, usize)> for BlockMatrix2 {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

impl Add for BlockMatrix2 {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let (a, b) = (self.0, rhs.0);
        Self([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for BlockMatrix2 {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-ONE)
    }
}

impl Mul for BlockMatrix2 {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self(out)
    }
}

/// `H_{n+1}` restricted to `[|n,+1/2>, |n+1,-1/2>]`.
pub fn build_block(params: &ModelParams, n: SubspaceIndex) -> BlockMatrix2 {
    let nf = f64::from(n.0);
    let g = params.mu * n.ladder();
    BlockMatrix2::from_real([
        [params.alpha / 2.0 + nf * params.homega, g],
        [-g, -params.alpha / 2.0 + (nf + 1.0) * params.homega],
    ])
}

pub fn adjoint_block(m: &BlockMatrix2) -> BlockMatrix2 {
    m.adjoint()
}

/// `sigma_z` restricted to a block: `diag(1, -1)`.
pub fn sigma_z_block() -> BlockMatrix2 {
    BlockMatrix2::diag(ONE, -ONE)
}

/// Frobenius norm of `sigma_z H sigma_z^{-1} - H^dagger` on one block.
pub fn sigma_z_residual(params: &ModelParams, n: SubspaceIndex) -> f64 {
    let h = build_block(params, n);
    let sz = sigma_z_block();
    // sigma_z is its own inverse
    (sz * h * sz - h.adjoint()).frobenius_norm()
}
