//! Metric-weighted partition function `Z = tr(exp(-H/tau) eta)` of one
//! invariant subspace and the derived observables
//!
//! ```text
//! F = -tau ln Z
//! S = ln Z + tau d(ln Z)/d tau
//! C = 2 tau d(ln Z)/d tau + tau^2 d^2(ln Z)/d tau^2
//! ```
//!
//! `Z` is evaluated from the matrix exponential and the eigenvector-built
//! metric. Its closed form is `A exp(-c/tau) cosh(b/tau)` (unbroken) or
//! `A exp(-c/tau) cos(b/tau)` (broken) with `c = (2n+1) homega / 2`, `b` half
//! the level splitting, and `A = 2|d|/D` or `4g/D`. The derivatives of
//! `ln |Z|` used by `S` and `C` come from that closed form and are checked
//! against centered differences of the matrix route.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::metric::eta;
use crate::model::{build_block, ModelParams, SubspaceIndex};
use crate::smallmat::expm2;
use crate::spectral::{classify, critical_coupling, discriminant, PhaseRegion};

/// Temperature in energy units (k_B = 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Temperature(f64);

impl Temperature {
    pub fn new(tau: f64) -> Result<Self> {
        if tau.is_finite() && tau > 0.0 {
            Ok(Self(tau))
        } else {
            Err(Error::InvalidParameter {
                name: "tau",
                value: tau,
                reason: "must be finite and positive",
            })
        }
    }

    pub fn tau(self) -> f64 {
        self.0
    }
}

/// Largest admissible imaginary part of the raw trace relative to `|Z|`.
pub const TRACE_IMAG_TOLERANCE: f64 = 1e-10;

/// Closed-form ingredients of `ln |Z|` for one non-exceptional block.
#[derive(Debug, Clone, Copy)]
struct Branch {
    broken: bool,
    prefactor: f64,
    centre: f64,
    half_split: f64,
}

impl Branch {
    fn new(params: &ModelParams, n: SubspaceIndex) -> Result<Self> {
        let region = classify(params, n);
        let centre = (2.0 * f64::from(n.n()) + 1.0) * params.homega() / 2.0;
        let root = discriminant(params, n).abs().sqrt();
        let half_split = root / 2.0;
        match region {
            PhaseRegion::Exceptional => Err(Error::ExceptionalPoint {
                n: n.n(),
                mu: params.mu(),
            }),
            PhaseRegion::Unbroken => Ok(Self {
                broken: false,
                prefactor: if params.mu() == 0.0 {
                    2.0
                } else {
                    2.0 * params.delta().abs() / root
                },
                centre,
                half_split,
            }),
            PhaseRegion::Broken => Ok(Self {
                broken: true,
                prefactor: 4.0 * params.mu() * n.ladder() / root,
                centre,
                half_split,
            }),
        }
    }

    fn ratio(&self, tau: f64) -> f64 {
        self.half_split / tau
    }

    fn z(&self, tau: f64) -> f64 {
        let x = self.ratio(tau);
        let osc = if self.broken { x.cos() } else { x.cosh() };
        self.prefactor * (-self.centre / tau).exp() * osc
    }

    /// `ln |Z|`, overflow-safe in the unbroken branch.
    fn ln_abs_z(&self, tau: f64) -> f64 {
        let x = self.ratio(tau);
        let osc = if self.broken {
            x.cos().abs().ln()
        } else {
            x.abs() + (-2.0 * x.abs()).exp().ln_1p() - std::f64::consts::LN_2
        };
        self.prefactor.ln() - self.centre / tau + osc
    }

    /// First and second tau-derivatives of `ln |Z|`.
    fn ln_z_derivatives(&self, tau: f64) -> (f64, f64) {
        let x = self.ratio(tau);
        let (b, c) = (self.half_split, self.centre);
        let (t2, t3, t4) = (tau * tau, tau * tau * tau, tau * tau * tau * tau);
        if self.broken {
            let tan = x.tan();
            let sec2 = 1.0 + tan * tan;
            (
                c / t2 + b * tan / t2,
                -2.0 * c / t3 - 2.0 * b * tan / t3 - b * b * sec2 / t4,
            )
        } else {
            let tanh = x.tanh();
            let sech2 = 1.0 - tanh * tanh;
            (
                c / t2 - b * tanh / t2,
                -2.0 * c / t3 + 2.0 * b * tanh / t3 + b * b * sech2 / t4,
            )
        }
    }

    fn entropy(&self, tau: f64) -> f64 {
        let x = self.ratio(tau);
        if self.broken {
            self.prefactor.ln() + x.cos().ln() + x * x.tan()
        } else {
            let ln_cosh = x.abs() + (-2.0 * x.abs()).exp().ln_1p() - std::f64::consts::LN_2;
            self.prefactor.ln() + ln_cosh - x * x.tanh()
        }
    }

    fn specific_heat(&self, tau: f64) -> f64 {
        let x = self.ratio(tau);
        if self.broken {
            let sec = 1.0 / x.cos();
            -(x * sec) * (x * sec)
        } else {
            let sech = 1.0 / x.cosh();
            (x * sech) * (x * sech)
        }
    }
}

/// Raw complex trace `tr(exp(-H/tau) eta)` together with the summed
/// magnitude of its terms.
pub fn partition_trace(
    params: &ModelParams,
    n: SubspaceIndex,
    t: Temperature,
) -> Result<(Complex64, f64)> {
    let metric = eta(params, n)?;
    let boltzmann = expm2(&build_block(params, n), -1.0 / t.tau());
    let product = boltzmann * metric.matrix;
    let scale = (0..2)
        .flat_map(|i| (0..2).map(move |k| (i, k)))
        .map(|(i, k)| (boltzmann[(i, k)] * metric.matrix[(k, i)]).norm())
        .sum();
    Ok((product.trace(), scale))
}

/// Matrix-route partition function. May be negative in the broken phase.
///
/// The imaginary part of the trace must be below `TRACE_IMAG_TOLERANCE * |Z|`
/// (or at rounding level of the summed terms when `Z` itself is near zero).
pub fn partition_function(params: &ModelParams, n: SubspaceIndex, t: Temperature) -> Result<f64> {
    let (trace, scale) = partition_trace(params, n, t)?;
    let floor = 64.0 * f64::EPSILON * scale;
    if trace.im.abs() > (TRACE_IMAG_TOLERANCE * trace.re.abs()).max(floor) {
        return Err(Error::ComplexTrace {
            re: trace.re,
            imag: trace.im,
        });
    }
    Ok(trace.re)
}

/// Closed-form partition function.
pub fn partition_function_closed(
    params: &ModelParams,
    n: SubspaceIndex,
    t: Temperature,
) -> Result<f64> {
    Ok(Branch::new(params, n)?.z(t.tau()))
}

/// `-tau ln Z`, or `None` when `Z <= 0`.
pub fn free_energy(params: &ModelParams, n: SubspaceIndex, t: Temperature) -> Result<Option<f64>> {
    let z = partition_function(params, n, t)?;
    Ok((z > 0.0).then(|| -t.tau() * z.ln()))
}

/// Closed-form entropy, or `None` when `Z <= 0`.
pub fn entropy(params: &ModelParams, n: SubspaceIndex, t: Temperature) -> Result<Option<f64>> {
    let branch = Branch::new(params, n)?;
    Ok((branch.z(t.tau()) > 0.0).then(|| branch.entropy(t.tau())))
}

/// Closed-form specific heat: `x^2 sech^2 x >= 0` (unbroken) or
/// `-x^2 sec^2 x <= 0` (broken) with `x = b / tau`. Defined from `ln |Z|`
/// so it is reported even when `Z < 0`.
pub fn specific_heat(params: &ModelParams, n: SubspaceIndex, t: Temperature) -> Result<f64> {
    Ok(Branch::new(params, n)?.specific_heat(t.tau()))
}

/// Analytic `(d ln|Z|/d tau, d^2 ln|Z|/d tau^2)`.
pub fn ln_z_derivatives(
    params: &ModelParams,
    n: SubspaceIndex,
    t: Temperature,
) -> Result<(f64, f64)> {
    Ok(Branch::new(params, n)?.ln_z_derivatives(t.tau()))
}

/// Closed-form `ln |Z|`.
pub fn ln_abs_partition_function(
    params: &ModelParams,
    n: SubspaceIndex,
    t: Temperature,
) -> Result<f64> {
    Ok(Branch::new(params, n)?.ln_abs_z(t.tau()))
}

/// All observables at one `(n, mu, tau)`, from a single branch.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoPoint {
    pub n: SubspaceIndex,
    pub mu: f64,
    pub tau: f64,
    pub region: PhaseRegion,
    pub mu_c: f64,
    pub z: Option<f64>,
    pub free_energy: Option<f64>,
    pub entropy: Option<f64>,
    pub specific_heat: Option<f64>,
    pub z_positive: bool,
    /// Set when evaluation failed for a reason other than sitting at the EP.
    pub error: Option<Error>,
}

impl ThermoPoint {
    fn undefined(params: &ModelParams, n: SubspaceIndex, tau: f64, region: PhaseRegion) -> Self {
        Self {
            n,
            mu: params.mu(),
            tau,
            region,
            mu_c: critical_coupling(params, n),
            z: None,
            free_energy: None,
            entropy: None,
            specific_heat: None,
            z_positive: false,
            error: None,
        }
    }

    /// No observable is defined (EP or failed evaluation).
    pub fn all_undefined(&self) -> bool {
        self.z.is_none()
            && self.free_energy.is_none()
            && self.entropy.is_none()
            && self.specific_heat.is_none()
    }
}

pub fn thermo_point(params: &ModelParams, n: SubspaceIndex, t: Temperature) -> ThermoPoint {
    let tau = t.tau();
    let region = classify(params, n);
    let mut point = ThermoPoint::undefined(params, n, tau, region);
    if region == PhaseRegion::Exceptional {
        return point;
    }
    let evaluated =
        Branch::new(params, n).and_then(|branch| Ok((branch, partition_function(params, n, t)?)));
    match evaluated {
        Ok((branch, z)) => {
            point.z = Some(z);
            point.z_positive = z > 0.0;
            point.specific_heat = Some(branch.specific_heat(tau));
            if point.z_positive {
                point.free_energy = Some(-tau * z.ln());
                point.entropy = Some(branch.entropy(tau));
            }
        }
        Err(e) => point.error = Some(e),
    }
    point
}

/// Centered-difference estimates of the `ln Z` derivatives from the matrix
/// route, next to their analytic values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDiffReport {
    pub step: f64,
    pub d1_numeric: f64,
    pub d1_analytic: f64,
    pub d2_numeric: f64,
    pub d2_analytic: f64,
    pub entropy_numeric: f64,
    pub entropy_analytic: f64,
    pub specific_heat_numeric: f64,
    pub specific_heat_analytic: f64,
}

fn rel_err(numeric: f64, analytic: f64) -> f64 {
    let diff = (numeric - analytic).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / analytic.abs()
    }
}

impl FiniteDiffReport {
    pub fn d1_rel_error(&self) -> f64 {
        rel_err(self.d1_numeric, self.d1_analytic)
    }

    pub fn d2_rel_error(&self) -> f64 {
        rel_err(self.d2_numeric, self.d2_analytic)
    }

    pub fn entropy_rel_error(&self) -> f64 {
        rel_err(self.entropy_numeric, self.entropy_analytic)
    }

    pub fn specific_heat_rel_error(&self) -> f64 {
        rel_err(self.specific_heat_numeric, self.specific_heat_analytic)
    }

    /// Largest of the four relative errors.
    pub fn max_rel_error(&self) -> f64 {
        [
            self.d1_rel_error(),
            self.d2_rel_error(),
            self.entropy_rel_error(),
            self.specific_heat_rel_error(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn finite_diff_check(
    params: &ModelParams,
    n: SubspaceIndex,
    t: Temperature,
    step: f64,
) -> Result<FiniteDiffReport> {
    let tau = t.tau();
    if !(step.is_finite() && step > 0.0 && step < tau) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "must be positive and smaller than tau",
        });
    }
    let (lo, hi) = (tau - step, tau + step);
    let mut ln_z = [0.0; 3];
    for (slot, at) in ln_z.iter_mut().zip([lo, tau, hi]) {
        let z = partition_function(params, n, Temperature::new(at)?)?;
        if z <= 0.0 {
            return Err(Error::StencilCrossesSingularity { lo, hi });
        }
        *slot = z.ln();
    }
    let d1_numeric = (ln_z[2] - ln_z[0]) / (2.0 * step);
    let d2_numeric = (ln_z[2] - 2.0 * ln_z[1] + ln_z[0]) / (step * step);

    let branch = Branch::new(params, n)?;
    let (d1_analytic, d2_analytic) = branch.ln_z_derivatives(tau);
    Ok(FiniteDiffReport {
        step,
        d1_numeric,
        d1_analytic,
        d2_numeric,
        d2_analytic,
        entropy_numeric: ln_z[1] + tau * d1_numeric,
        entropy_analytic: branch.entropy(tau),
        specific_heat_numeric: 2.0 * tau * d1_numeric + tau * tau * d2_numeric,
        specific_heat_analytic: branch.specific_heat(tau),
    })
}
