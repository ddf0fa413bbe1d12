//! Truncated Fock-space realization of the full Hamiltonian, used as an
//! independent check of the block decomposition and of the symmetries.
//!
//! Basis index `2n + s` with `s = 0` for `|n, +1/2>` and `s = 1` for
//! `|n, -1/2>`, i.e. oscillator ⊗ spin with oscillator levels `0..=cutoff`.
//! Operators are built as Kronecker products of truncated ladder and Pauli
//! matrices, so `a^dagger` acting on the top level is dropped.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{build_block, ModelParams, SubspaceIndex};
use crate::smallmat::{eig_n, DenseMatrix};
use crate::spectral::{block_spectrum, critical_coupling};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedSpace {
    cutoff: usize,
}

impl TruncatedSpace {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidParameter {
                name: "cutoff",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        2 * (self.cutoff + 1)
    }

    /// Basis index of `|n, m_s>`, `spin_up` meaning `m_s = +1/2`.
    pub fn index(&self, n: usize, spin_up: bool) -> usize {
        2 * n + usize::from(!spin_up)
    }

    fn levels(&self) -> usize {
        self.cutoff + 1
    }

    /// Truncated annihilation operator on the oscillator factor.
    pub fn annihilation(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.levels(), |i, j| {
            if j == i + 1 {
                Complex64::new((j as f64).sqrt(), 0.0)
            } else {
                ZERO
            }
        })
        .kron(&DenseMatrix::identity(2))
    }

    pub fn creation(&self) -> DenseMatrix {
        self.annihilation().adjoint()
    }

    pub fn number(&self) -> DenseMatrix {
        let diag: Vec<Complex64> = (0..self.levels()).map(|n| (n as f64).into()).collect();
        DenseMatrix::from_diagonal(&diag).kron(&DenseMatrix::identity(2))
    }

    pub fn sigma_z(&self) -> DenseMatrix {
        self.spin(DenseMatrix::from_diagonal(&[ONE, -ONE]))
    }

    /// `|+1/2><-1/2|`.
    pub fn sigma_plus(&self) -> DenseMatrix {
        self.spin(DenseMatrix::from_fn(2, |i, j| {
            if (i, j) == (0, 1) {
                ONE
            } else {
                ZERO
            }
        }))
    }

    pub fn sigma_minus(&self) -> DenseMatrix {
        self.sigma_plus().adjoint()
    }

    /// Fock parity `(-1)^n` on the oscillator factor.
    pub fn parity(&self) -> DenseMatrix {
        let diag: Vec<Complex64> = (0..self.levels())
            .map(|n| if n % 2 == 0 { ONE } else { -ONE })
            .collect();
        DenseMatrix::from_diagonal(&diag).kron(&DenseMatrix::identity(2))
    }

    fn spin(&self, s: DenseMatrix) -> DenseMatrix {
        DenseMatrix::identity(self.levels()).kron(&s)
    }
}

fn add(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    a - &b.scale(-ONE)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `alpha/2 sigma_z + homega a^dagger a + mu (sigma_+ a - sigma_- a^dagger)`.
pub fn assemble_full(params: &ModelParams, space: &TruncatedSpace) -> DenseMatrix {
    let a = space.annihilation();
    let ad = space.creation();
    let diagonal = add(
        &space.sigma_z().scale(real(params.alpha() / 2.0)),
        &space.number().scale(real(params.homega())),
    );
    let coupling = &(&space.sigma_plus() * &a) - &(&space.sigma_minus() * &ad);
    add(&diagonal, &coupling.scale(real(params.mu())))
}

/// The Hamiltonian after the parity/time-reversal rules
/// `sigma -> -sigma`, `sigma_± -> -sigma_∓`, `a -> a`, `a^dagger -> a^dagger`
/// and complex conjugation of the coefficients.
pub fn pt_transformed(params: &ModelParams, space: &TruncatedSpace) -> DenseMatrix {
    let a = space.annihilation();
    let ad = space.creation();
    let diagonal = add(
        &space.sigma_z().scale(real(-params.alpha() / 2.0)),
        &space.number().scale(real(params.homega())),
    );
    // sigma_+ a - sigma_- a^dagger  ->  -sigma_- a + sigma_+ a^dagger
    let coupling = &(&space.sigma_plus() * &ad) - &(&space.sigma_minus() * &a);
    add(&diagonal, &coupling.scale(real(params.mu()))).conj()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecompositionReport {
    pub cutoff: usize,
    /// Spectrum of the truncated matrix.
    pub computed: Vec<Complex64>,
    /// `{-alpha/2}` and the spectra of blocks `n = 0..=cutoff-2`.
    pub expected: Vec<Complex64>,
    /// Largest distance in the one-to-one matching of `expected` into
    /// `computed`.
    pub max_mismatch: f64,
    /// Eigenvalues left over after matching: the top block `n = cutoff-1`
    /// and the uncoupled edge state `|cutoff, +1/2>`.
    pub leftover: Vec<Complex64>,
    pub tolerance: f64,
}

impl BlockDecompositionReport {
    pub fn passed(&self) -> bool {
        self.max_mismatch <= self.tolerance && self.leftover.len() == 3
    }

    pub fn contains(&self, value: Complex64, tol: f64) -> bool {
        self.computed.iter().any(|z| (z - value).norm() <= tol)
    }
}

/// Greedy nearest-neighbour matching of `expected` into `pool`; returns the
/// worst distance and the unmatched remainder of `pool`.
fn match_multiset(expected: &[Complex64], mut pool: Vec<Complex64>) -> (f64, Vec<Complex64>) {
    let mut worst = 0.0f64;
    for e in expected {
        let Some((idx, dist)) = pool
            .iter()
            .enumerate()
            .map(|(k, z)| (k, (z - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
        else {
            return (f64::INFINITY, pool);
        };
        worst = worst.max(dist);
        pool.swap_remove(idx);
    }
    (worst, pool)
}

pub const BLOCK_MATCH_TOLERANCE: f64 = 1e-8;

/// A coupling near `target` whose relative distance from the critical
/// coupling of every complete block below `cutoff` is at least 5%.
///
/// Defective eigenvalues of a dense matrix are only resolved to about
/// `sqrt(eps)`, so exact multiset comparisons need couplings away from EPs.
pub fn ep_free_coupling(params: &ModelParams, cutoff: usize, target: f64) -> f64 {
    let critical: Vec<f64> = (0..cutoff.saturating_sub(1))
        .map(|n| critical_coupling(params, SubspaceIndex(n as u32)))
        .collect();
    let clear = |mu: f64| critical.iter().all(|&c| (mu - c).abs() > 0.05 * c.max(mu));
    (0..200)
        .map(|k| target * (1.0 + 0.01 * k as f64))
        .find(|&mu| clear(mu))
        .unwrap_or(target)
}

pub fn block_decomposition_check(
    params: &ModelParams,
    cutoff: usize,
) -> Result<BlockDecompositionReport> {
    if cutoff < 2 {
        return Err(Error::InvalidParameter {
            name: "cutoff",
            value: cutoff as f64,
            reason: "block decomposition check needs at least 2",
        });
    }
    let space = TruncatedSpace::new(cutoff)?;
    let computed = eig_n(&assemble_full(params, &space))?;
    let mut expected = vec![real(-params.alpha() / 2.0)];
    for n in 0..cutoff - 1 {
        let s = block_spectrum(params, SubspaceIndex(n as u32));
        expected.push(s.e_plus);
        expected.push(s.e_minus);
    }
    let (max_mismatch, mut leftover) = match_multiset(&expected, computed.clone());
    leftover.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(BlockDecompositionReport {
        cutoff,
        computed,
        expected,
        max_mismatch,
        leftover,
        tolerance: BLOCK_MATCH_TOLERANCE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    pub hamiltonian_norm: f64,
    /// `||[H, P sigma_z]||_F`.
    pub commutator_residual: f64,
    /// `||sigma_z H sigma_z - H^dagger||_F`.
    pub sigma_z_residual: f64,
    /// `||P H P - H^dagger||_F`.
    pub parity_residual: f64,
    /// `||H_PT - H||_F`; nonzero means no PT invariance.
    pub pt_residual: f64,
    /// `||H - H^dagger||_F`.
    pub hermiticity_residual: f64,
    /// Largest entry of `H` linking basis states of different `P sigma_z`
    /// eigenvalue.
    pub grading_leak: f64,
}

pub fn symmetry_report(params: &ModelParams, cutoff: usize) -> Result<SymmetryReport> {
    let space = TruncatedSpace::new(cutoff)?;
    let h = assemble_full(params, &space);
    let hd = h.adjoint();
    let p = space.parity();
    let sz = space.sigma_z();
    let psz = &p * &sz;
    let commutator = &(&h * &psz) - &(&psz * &h);
    let grade = |i: usize| psz[(i, i)].re;
    let grading_leak = (0..h.dim())
        .flat_map(|i| (0..h.dim()).map(move |j| (i, j)))
        .filter(|&(i, j)| grade(i) != grade(j))
        .map(|(i, j)| h[(i, j)].norm())
        .fold(0.0, f64::max);
    Ok(SymmetryReport {
        hamiltonian_norm: h.frobenius_norm(),
        commutator_residual: commutator.frobenius_norm(),
        sigma_z_residual: (&(&(&sz * &h) * &sz) - &hd).frobenius_norm(),
        parity_residual: (&(&(&p * &h) * &p) - &hd).frobenius_norm(),
        pt_residual: (&pt_transformed(params, &space) - &h).frobenius_norm(),
        hermiticity_residual: (&h - &hd).frobenius_norm(),
        grading_leak,
    })
}

/// Principal 2x2 submatrix of the full matrix on `(|n,+1/2>, |n+1,-1/2>)`.
pub fn extract_block(
    full: &DenseMatrix,
    space: &TruncatedSpace,
    n: usize,
) -> crate::model::BlockMatrix2 {
    let idx = [space.index(n, true), space.index(n + 1, false)];
    crate::model::BlockMatrix2::new(
        full[(idx[0], idx[0])],
        full[(idx[0], idx[1])],
        full[(idx[1], idx[0])],
        full[(idx[1], idx[1])],
    )
}

/// `||H e_g - (-alpha/2) e_g||` for the state `|0, -1/2>`.
pub fn ground_state_residual(params: &ModelParams, space: &TruncatedSpace) -> f64 {
    let h = assemble_full(params, space);
    let g = space.index(0, false);
    let mut e = vec![ZERO; space.dim()];
    e[g] = ONE;
    let he = h.apply(&e);
    he.iter()
        .enumerate()
        .map(|(i, z)| {
            let target = if i == g {
                real(-params.alpha() / 2.0)
            } else {
                ZERO
            };
            (z - target).norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Block embedded in the full matrix equals [`build_block`] for every
/// complete block.
pub fn embedded_blocks_match(params: &ModelParams, space: &TruncatedSpace) -> bool {
    let full = assemble_full(params, space);
    (0..space.cutoff())
        .all(|n| extract_block(&full, space, n) == build_block(params, SubspaceIndex(n as u32)))
}
