//! Closed-form block spectra, phase classification and exceptional points.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, SubspaceIndex};
use crate::smallmat::EP_TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseRegion {
    /// Real, non-degenerate block spectrum.
    Unbroken,
    /// Complex-conjugate pair.
    Broken,
    /// Eigenvalues and eigenvectors coalesce; the metric is singular.
    Exceptional,
}

impl PhaseRegion {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseRegion::Unbroken => "unbroken",
            PhaseRegion::Broken => "broken",
            PhaseRegion::Exceptional => "exceptional",
        }
    }
}

impl fmt::Display for PhaseRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum2 {
    pub e_plus: Complex64,
    pub e_minus: Complex64,
    pub region: PhaseRegion,
    /// `delta^2 - 4 mu^2 (n+1)`.
    pub discriminant: f64,
}

/// `delta^2 - 4 mu^2 (n+1)`, evaluated in real arithmetic.
pub fn discriminant(params: &ModelParams, n: SubspaceIndex) -> f64 {
    let delta = params.delta();
    let g = params.mu() * n.ladder();
    delta * delta - 4.0 * g * g
}

fn region_from(params: &ModelParams, disc: f64) -> PhaseRegion {
    // mu = 0 blocks are Hermitian (diagonal), even when delta = 0.
    if params.mu() == 0.0 {
        return PhaseRegion::Unbroken;
    }
    let delta = params.delta();
    if disc.abs() < EP_TOLERANCE * (delta * delta).max(1.0) {
        PhaseRegion::Exceptional
    } else if disc > 0.0 {
        PhaseRegion::Unbroken
    } else {
        PhaseRegion::Broken
    }
}

pub fn classify(params: &ModelParams, n: SubspaceIndex) -> PhaseRegion {
    region_from(params, discriminant(params, n))
}

/// `E± = ((2n+1) homega ± sqrt(disc)) / 2`, with `e_plus >= e_minus` when
/// real and `Im(e_plus) > 0` when broken. At the EP both equal the centre.
pub fn block_spectrum(params: &ModelParams, n: SubspaceIndex) -> Spectrum2 {
    let disc = discriminant(params, n);
    let region = region_from(params, disc);
    let centre = (2.0 * f64::from(n.n()) + 1.0) * params.homega() / 2.0;
    let half_split = disc.abs().sqrt() / 2.0;
    let (e_plus, e_minus) = match region {
        PhaseRegion::Unbroken => (
            Complex64::new(centre + half_split, 0.0),
            Complex64::new(centre - half_split, 0.0),
        ),
        PhaseRegion::Broken => (
            Complex64::new(centre, half_split),
            Complex64::new(centre, -half_split),
        ),
        PhaseRegion::Exceptional => (centre.into(), centre.into()),
    };
    Spectrum2 {
        e_plus,
        e_minus,
        region,
        discriminant: disc,
    }
}

/// `mu_c = |delta| / (2 sqrt(n+1))`.
pub fn critical_coupling(params: &ModelParams, n: SubspaceIndex) -> f64 {
    params.delta().abs() / (2.0 * n.ladder())
}

/// Bisection width at which [`locate_ep_numeric`] stops.
pub const EP_BISECTION_WIDTH: f64 = 1e-12;

/// Locates the EP by bisection on the sign of the discriminant as a function
/// of the coupling over `[lo, hi]`. The coupling stored in `params` is
/// ignored.
pub fn locate_ep_numeric(params: &ModelParams, n: SubspaceIndex, lo: f64, hi: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(Error::NoSignChange { lo, hi });
    }
    let f = |mu: f64| params.with_mu(mu).map(|p| discriminant(&p, n));
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    let sign_a = fa.signum();
    for _ in 0..200 {
        if b - a <= EP_BISECTION_WIDTH {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == sign_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(mu: f64) -> ModelParams {
        ModelParams::new(5.0, 1.0, mu).unwrap()
    }

    const N0: SubspaceIndex = SubspaceIndex(0);

    #[test]
    fn spectrum_examples() {
        let s = block_spectrum(&p(0.0), N0);
        assert_eq!(s.region, PhaseRegion::Unbroken);
        assert_eq!((s.e_plus.re, s.e_minus.re), (2.5, -1.5));

        let s = block_spectrum(&p(2.0), N0);
        assert_eq!(s.region, PhaseRegion::Exceptional);
        assert_eq!((s.e_plus, s.e_minus), (0.5.into(), 0.5.into()));

        let s = block_spectrum(&p(3.0), N0);
        assert_eq!(s.region, PhaseRegion::Broken);
        assert_eq!(s.discriminant, -20.0);
        assert!((s.e_plus - Complex64::new(0.5, 5f64.sqrt())).norm() < 1e-15);
        assert!((s.e_minus - Complex64::new(0.5, -2.236068)).norm() < 1e-6);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&p(1.9), N0), PhaseRegion::Unbroken);
        assert_eq!(classify(&p(2.1), N0), PhaseRegion::Broken);
        let resonant = ModelParams::new(1.0, 1.0, 0.3).unwrap();
        for n in [0, 1, 7] {
            assert_eq!(classify(&resonant, SubspaceIndex(n)), PhaseRegion::Broken);
        }
        let resonant_free = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(classify(&resonant_free, N0), PhaseRegion::Unbroken);
    }

    #[test]
    fn critical_coupling_examples() {
        assert_eq!(critical_coupling(&p(0.0), N0), 2.0);
        assert!(
            (critical_coupling(&p(0.0), SubspaceIndex(1)) - std::f64::consts::SQRT_2).abs() < 1e-12
        );
        let resonant = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(critical_coupling(&resonant, SubspaceIndex(3)), 0.0);
    }

    #[test]
    fn bisection_examples() {
        let mu = locate_ep_numeric(&p(0.0), N0, 0.0, 5.0).unwrap();
        assert!((mu - 2.0).abs() < 1e-10);
        let mu = locate_ep_numeric(&p(0.0), SubspaceIndex(5), 0.0, 5.0).unwrap();
        assert!((mu - 2.0 / 6f64.sqrt()).abs() < 1e-10);
        assert!((mu - 0.816497).abs() < 1e-6);
        assert!(matches!(
            locate_ep_numeric(&p(0.0), N0, 3.0, 4.0),
            Err(Error::NoSignChange { .. })
        ));
        assert!(locate_ep_numeric(&p(0.0), N0, 4.0, 3.0).is_err());
    }

    #[test]
    fn region_follows_critical_coupling() {
        for n in 0..6 {
            let idx = SubspaceIndex(n);
            let mu_c = critical_coupling(&p(0.0), idx);
            assert_eq!(classify(&p(mu_c * 0.999), idx), PhaseRegion::Unbroken);
            assert_eq!(classify(&p(mu_c * 1.001), idx), PhaseRegion::Broken);
            assert_eq!(classify(&p(mu_c), idx), PhaseRegion::Exceptional);
        }
    }
}
