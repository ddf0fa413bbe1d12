//! Metric operator `eta = sum_i |L_i><L_i|` built from biorthonormal left
//! eigenvectors, and its closed forms.
//!
//! Biorthonormality fixes only the products `<L_i|R_i> = 1`. The remaining
//! scale freedom `(L, R) -> (c L, R / conj(c))` is fixed by the balanced
//! gauge `|L_i| = |R_i|`, which gives a real symmetric metric with unit
//! determinant in both phases:
//!
//! * unbroken: `eta = [[|d|, -sgn(d) 2g], [-sgn(d) 2g, |d|]] / sqrt(d^2 - 4g^2)`
//! * broken:   `eta = [[2g, -d], [-d, 2g]] / sqrt(4g^2 - d^2)`
//!
//! with `d = homega - alpha` and `g = mu sqrt(n+1)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{build_block, BlockMatrix2, ModelParams, SubspaceIndex};
use crate::smallmat::{eig2, Eigenpair2};
use crate::spectral::{classify, discriminant, PhaseRegion};

fn inner(u: &[Complex64; 2], v: &[Complex64; 2]) -> Complex64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

fn norm(u: &[Complex64; 2]) -> f64 {
    (u[0].norm_sqr() + u[1].norm_sqr()).sqrt()
}

fn scaled(u: &[Complex64; 2], s: Complex64) -> [Complex64; 2] {
    [u[0] * s, u[1] * s]
}

/// Matched right/left eigenvector pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiorthoSystem {
    pub pairs: [Eigenpair2; 2],
}

impl BiorthoSystem {
    /// `(i, j) -> <L_i|R_j>`.
    pub fn overlap_matrix(&self) -> BlockMatrix2 {
        let p = &self.pairs;
        BlockMatrix2::new(
            inner(&p[0].left, &p[0].right),
            inner(&p[0].left, &p[1].right),
            inner(&p[1].left, &p[0].right),
            inner(&p[1].left, &p[1].right),
        )
    }

    /// `sum_i |L_i><L_i|`.
    pub fn left_metric(&self) -> BlockMatrix2 {
        self.pairs
            .iter()
            .map(|p| BlockMatrix2::outer(&p.left, &p.left))
            .fold(BlockMatrix2::zero(), |acc, m| acc + m)
    }
}

/// Biorthonormal eigensystem of a diagonalizable 2x2 matrix.
///
/// Each left vector is paired with the right vector it has nonzero overlap
/// with and normalized; the right vector is rescaled so that `<L_i|R_i> = 1`.
pub fn biortho_system(m: &BlockMatrix2) -> Result<BiorthoSystem> {
    let mut pairs = eig2(m)?;
    let cross = inner(&pairs[0].left, &pairs[1].right).norm();
    let direct = inner(&pairs[0].left, &pairs[0].right).norm();
    if cross > direct {
        let left0 = pairs[0].left;
        pairs[0].left = pairs[1].left;
        pairs[1].left = left0;
    }
    for p in pairs.iter_mut() {
        p.left = scaled(&p.left, (1.0 / norm(&p.left)).into());
        let overlap = inner(&p.left, &p.right);
        let scale = norm(&p.left) * norm(&p.right);
        if overlap.norm() <= 1e-14 * scale {
            return Err(Error::DefectiveMatrix {
                eigenvalues: [p.value, p.value],
            });
        }
        p.right = scaled(&p.right, overlap.inv());
    }
    Ok(BiorthoSystem { pairs })
}

/// Rescales each pair to `|L_i| = |R_i|` and rotates the common phase so the
/// largest component of `L_i` is real and positive. `<L_i|R_i>` is unchanged.
pub fn fix_gauge_balanced(b: &BiorthoSystem) -> BiorthoSystem {
    let mut out = *b;
    for p in out.pairs.iter_mut() {
        let k = (norm(&p.right) / norm(&p.left)).sqrt();
        let big = if p.left[0].norm() >= p.left[1].norm() {
            p.left[0]
        } else {
            p.left[1]
        };
        let phase = big.conj() / big.norm();
        p.left = scaled(&p.left, phase * k);
        p.right = scaled(&p.right, phase / k);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricMatrix {
    pub matrix: BlockMatrix2,
    pub region: PhaseRegion,
    pub n: SubspaceIndex,
}

fn refuse_at_ep(params: &ModelParams, n: SubspaceIndex) -> Result<PhaseRegion> {
    match classify(params, n) {
        PhaseRegion::Exceptional => Err(Error::ExceptionalPoint {
            n: n.n(),
            mu: params.mu(),
        }),
        region => Ok(region),
    }
}

/// Metric from the gauge-fixed left eigenvectors of `H_{n+1}`.
pub fn eta(params: &ModelParams, n: SubspaceIndex) -> Result<MetricMatrix> {
    let region = refuse_at_ep(params, n)?;
    let matrix = if params.mu() == 0.0 {
        BlockMatrix2::identity()
    } else {
        let system = biortho_system(&build_block(params, n))?;
        fix_gauge_balanced(&system).left_metric()
    };
    Ok(MetricMatrix { matrix, region, n })
}

/// Metric from the closed forms in the module docs.
pub fn eta_closed_form(params: &ModelParams, n: SubspaceIndex) -> Result<MetricMatrix> {
    let region = refuse_at_ep(params, n)?;
    if params.mu() == 0.0 {
        return Ok(MetricMatrix {
            matrix: BlockMatrix2::identity(),
            region,
            n,
        });
    }
    let delta = params.delta();
    let two_g = 2.0 * params.mu() * n.ladder();
    let root = discriminant(params, n).abs().sqrt();
    let (diag, off) = match region {
        PhaseRegion::Unbroken => (delta.abs(), -delta.signum() * two_g),
        _ => (two_g, -delta),
    };
    let matrix = BlockMatrix2::from_real([[diag, off], [off, diag]]).scale((1.0 / root).into());
    Ok(MetricMatrix { matrix, region, n })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricDiagnostics {
    pub region: PhaseRegion,
    /// `||eta - eta^T||_F`.
    pub symmetry_residual: f64,
    /// Largest imaginary part of any entry.
    pub imaginary_residual: f64,
    /// `|det(eta) - 1|`.
    pub det_error: f64,
    pub positive_definite: bool,
    /// `||eta H - H^dagger eta||_F`; vanishes only in the unbroken phase.
    pub intertwining_residual: f64,
    /// `||H||_F`, the scale for the intertwining residual.
    pub block_norm: f64,
}

pub fn verify_metric(params: &ModelParams, n: SubspaceIndex) -> Result<MetricDiagnostics> {
    let metric = eta(params, n)?;
    let m = metric.matrix;
    let h = build_block(params, n);
    let det = m.det();
    let trace = m.trace();
    Ok(MetricDiagnostics {
        region: metric.region,
        symmetry_residual: (m - m.transpose()).frobenius_norm(),
        imaginary_residual: m.max_abs_imag(),
        det_error: (det - Complex64::new(1.0, 0.0)).norm(),
        positive_definite: trace.re > 0.0 && det.re > 0.0,
        intertwining_residual: (m * h - h.adjoint() * m).frobenius_norm(),
        block_norm: h.frobenius_norm(),
    })
}
