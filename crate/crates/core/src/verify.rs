//! Oracle suite over a built-in grid: every closed form against its
//! independent route, plus the full-space and symmetry checks.

use std::fmt;

use crate::error::Result;
use crate::fullspace::{block_decomposition_check, ep_free_coupling, symmetry_report};
use crate::metric::{eta, eta_closed_form, verify_metric};
use crate::model::{build_block, sigma_z_residual, ModelParams, SubspaceIndex};
use crate::spectral::{classify, critical_coupling, locate_ep_numeric, PhaseRegion};
use crate::thermo::{
    entropy, finite_diff_check, ln_z_derivatives, partition_function, partition_function_closed,
    partition_trace, specific_heat, Temperature,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {:<24} {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.checks.push(Check {
            name,
            passed,
            detail,
        });
    }
}

pub const VERIFY_SUBSPACES: std::ops::RangeInclusive<u32> = 0..=8;
pub const VERIFY_TAUS: [f64; 4] = [0.5, 1.0, 5.0, 50.0];

/// Couplings on both sides of `mu_c` for one subspace, excluding the EP.
pub fn coupling_grid(params: &ModelParams, n: SubspaceIndex, per_side: usize) -> Vec<f64> {
    let mu_c = critical_coupling(params, n);
    let k = per_side as f64;
    if mu_c == 0.0 {
        return (1..=per_side).map(|i| 2.0 * i as f64 / k).collect();
    }
    let below = (1..=per_side).map(|i| mu_c * i as f64 / (k + 1.0));
    let above = (1..=per_side).map(|i| mu_c * (1.0 + 1.5 * i as f64 / k));
    below.chain(above).collect()
}

fn grid(alpha: f64, homega: f64, per_side: usize) -> Result<Vec<(ModelParams, SubspaceIndex)>> {
    let base = ModelParams::new(alpha, homega, 0.0)?;
    let mut out = Vec::new();
    for n in VERIFY_SUBSPACES.map(SubspaceIndex) {
        out.push((base, n));
        for mu in coupling_grid(&base, n, per_side) {
            out.push((base.with_mu(mu)?, n));
        }
    }
    Ok(out)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / b.abs()
    }
}

/// Runs the full suite for the `(alpha, homega)` family.
pub fn run_verification(alpha: f64, homega: f64, cutoff: usize) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    let points = grid(alpha, homega, 20)?;
    let base = ModelParams::new(alpha, homega, 0.0)?;

    let worst = max_of(
        points
            .iter()
            .map(|(p, n)| sigma_z_residual(p, *n) / (1.0 + build_block(p, *n).frobenius_norm())),
    );
    report.push(
        "sigma_z_pseudo_hermitian",
        worst < 1e-12,
        format!(
            "max relative residual {worst:.3e} over {} points",
            points.len()
        ),
    );

    let mut ep_err: f64 = 0.0;
    for n in VERIFY_SUBSPACES.map(SubspaceIndex) {
        let mu_c = critical_coupling(&base, n);
        if mu_c > 0.0 {
            let found = locate_ep_numeric(&base, n, 0.0, 2.0 * mu_c + 1.0)?;
            ep_err = ep_err.max((found - mu_c).abs());
        }
    }
    report.push(
        "ep_location",
        ep_err < 1e-10,
        format!("bisection vs closed form {ep_err:.3e}"),
    );

    let regular: Vec<_> = points
        .iter()
        .filter(|(p, n)| classify(p, *n) != PhaseRegion::Exceptional)
        .collect();
    let mut metric_err: f64 = 0.0;
    let mut det_err: f64 = 0.0;
    let mut all_pd = true;
    let mut intertwine: f64 = 0.0;
    for (p, n) in &regular {
        let e = eta(p, *n)?.matrix;
        let c = eta_closed_form(p, *n)?.matrix;
        metric_err = metric_err.max((e - c).frobenius_norm());
        let d = verify_metric(p, *n)?;
        det_err = det_err.max(d.det_error);
        all_pd &= d.positive_definite;
        if d.region == PhaseRegion::Unbroken {
            intertwine = intertwine.max(d.intertwining_residual / d.block_norm);
        }
    }
    report.push(
        "metric_dual_route",
        metric_err < 1e-10,
        format!("max ||eta_vec - eta_closed||_F = {metric_err:.3e}"),
    );
    report.push(
        "metric_unit_det_positive",
        det_err < 1e-10 && all_pd,
        format!("max |det - 1| = {det_err:.3e}, positive definite: {all_pd}"),
    );
    report.push(
        "metric_intertwining",
        intertwine < 1e-10,
        format!("max ||eta H - H^+ eta|| / ||H|| (unbroken) = {intertwine:.3e}"),
    );

    let mut z_err: f64 = 0.0;
    let mut imag: f64 = 0.0;
    let mut z_count = 0usize;
    for (p, n) in &regular {
        for tau in VERIFY_TAUS {
            let t = Temperature::new(tau)?;
            let closed = partition_function_closed(p, *n, t)?;
            let (trace, scale) = partition_trace(p, *n, t)?;
            // skip points where Z sits on a cosine node
            if closed.abs() < 1e-4 * scale {
                continue;
            }
            z_err = z_err.max(rel(trace.re, closed));
            imag = imag.max(trace.im.abs() / closed.abs());
            z_count += 1;
        }
    }
    report.push(
        "partition_dual_route",
        z_err < 1e-10 && imag < 1e-10,
        format!("max relative gap {z_err:.3e}, max Im/|Z| {imag:.3e} over {z_count} points"),
    );

    let mut fd_err: f64 = 0.0;
    let mut fd_count = 0usize;
    for (p, n) in &regular {
        for tau in [1.0, 2.0, 5.0] {
            let t = Temperature::new(tau)?;
            if !is_smooth_point(p, *n, tau) {
                continue;
            }
            let r = finite_diff_check(p, *n, t, 1e-4 * tau)?;
            fd_err = fd_err
                .max(r.entropy_rel_error())
                .max(r.specific_heat_rel_error());
            fd_count += 1;
        }
    }
    report.push(
        "finite_differences",
        fd_err < 1e-6 && fd_count > 0,
        format!("max relative error of S, Cv {fd_err:.3e} over {fd_count} points"),
    );

    let mut gibbs_err: f64 = 0.0;
    for n in VERIFY_SUBSPACES.map(SubspaceIndex) {
        for tau in [0.5, 1.0, 5.0] {
            let t = Temperature::new(tau)?;
            let h = build_block(&base, n);
            let levels = [h[(0, 0)].re, h[(1, 1)].re];
            let weights = levels.map(|e| (-e / tau).exp());
            let z: f64 = weights.iter().sum();
            let gibbs: f64 = weights.iter().map(|w| w / z).map(|q| -q * q.ln()).sum();
            let s = entropy(&base, n, t)?.unwrap_or(f64::NAN);
            gibbs_err = gibbs_err.max((s - gibbs).abs());
            let zm = partition_function(&base, n, t)?;
            gibbs_err = gibbs_err.max(rel(zm, z));
        }
    }
    report.push(
        "hermitian_limit_gibbs",
        gibbs_err < 1e-9,
        format!("max deviation from Gibbs entropy {gibbs_err:.3e}"),
    );

    let mu_one = base.with_mu(1.0)?;
    let mu_free = ep_free_coupling(&base, cutoff, 1.0);
    let decomposition = block_decomposition_check(&base.with_mu(mu_free)?, cutoff)?;
    report.push(
        "block_decomposition",
        decomposition.passed(),
        format!(
            "cutoff {cutoff}, mu {mu_free}: max mismatch {:.3e}, {} leftover edge eigenvalues",
            decomposition.max_mismatch,
            decomposition.leftover.len()
        ),
    );

    let sym = symmetry_report(&mu_one, cutoff)?;
    let scale = sym.hamiltonian_norm;
    report.push(
        "p_sigma_z_commutator",
        sym.commutator_residual < 1e-12 * scale && sym.grading_leak == 0.0,
        format!(
            "||[H, P sigma_z]|| / ||H|| = {:.3e}",
            sym.commutator_residual / scale
        ),
    );
    report.push(
        "full_pseudo_hermiticity",
        sym.sigma_z_residual < 1e-12 * scale && sym.parity_residual < 1e-12 * scale,
        format!(
            "sigma_z {:.3e}, parity {:.3e} (relative)",
            sym.sigma_z_residual / scale,
            sym.parity_residual / scale
        ),
    );
    report.push(
        "pt_non_invariance",
        sym.pt_residual > 0.1 * scale,
        format!("||H_PT - H|| / ||H|| = {:.3e}", sym.pt_residual / scale),
    );

    Ok(report)
}

/// Points where the centered second difference is well conditioned: the
/// scaled half-splitting `x = b / tau` lies in `[0.3, 3]` (unbroken) or
/// `[0.3, 1.2]` (broken, clear of the first cosine node at `pi/2`), and `Cv`
/// is at least 5% of `|2 tau lnZ'|`, the larger of the two terms it is the
/// sum of.
pub fn is_smooth_point(params: &ModelParams, n: SubspaceIndex, tau: f64) -> bool {
    let x = crate::spectral::discriminant(params, n).abs().sqrt() / 2.0 / tau;
    let in_window = match classify(params, n) {
        PhaseRegion::Unbroken => (0.3..=3.0).contains(&x),
        PhaseRegion::Broken => (0.3..=1.2).contains(&x),
        PhaseRegion::Exceptional => false,
    };
    if !in_window {
        return false;
    }
    let Ok(t) = Temperature::new(tau) else {
        return false;
    };
    match (ln_z_derivatives(params, n, t), specific_heat(params, n, t)) {
        (Ok((d1, _)), Ok(cv)) => cv.abs() >= 0.05 * (2.0 * tau * d1).abs(),
        _ => false,
    }
}
