//! Brute-force quadrature used only for verification: adaptive Simpson
//! integration and singularity-aware integration against the memory kernel.
//! Nothing in the solver path depends on this module.

use crate::kernel::{ln_gamma, KernelSpec};
use crate::{Error, Result};

const MAX_DEPTH: usize = 60;

/// Adaptive Simpson integration of `f` over [a, b] to absolute tolerance
/// `tol`. Subdivision stops once an interval shrinks below 1e−13 of the
/// original span, so evaluation noise (finite differences, inner quadratures)
/// cannot stall the recursion; its residual contribution is negligible at
/// that width. Fails loudly if the depth is exhausted before the local error
/// estimate drops below the budget.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let width_floor = (b - a).abs() * 1e-13;
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, width_floor, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    width_floor: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a).abs() <= width_floor {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numeric(format!(
            "adaptive quadrature did not reach tolerance {tol} on [{a}, {b}]"
        )));
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, width_floor, depth - 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, width_floor, depth - 1)?;
    Ok(l + r)
}

/// Numeric `∫_a^b K(τ) g(τ) dτ` with `0 ≤ a < b`, valid up to the kernel's
/// singularity at τ = 0.
///
/// For the weakly singular Gamma kernel the substitution τ = ρ^{1/α} removes
/// the τ^{α−1} factor exactly:
/// `∫ K(τ) g(τ) dτ = κ γ^α/(α Γ(α)) ∫ e^{−γ ρ^{1/α}} g(ρ^{1/α}) dρ`,
/// leaving a bounded integrand even when a = 0.
pub fn integrate_kernel_weighted(
    spec: &KernelSpec,
    a: f64,
    b: f64,
    g: impl Fn(f64) -> f64,
    tol: f64,
) -> Result<f64> {
    if !(a >= 0.0 && b >= a) {
        return Err(Error::InvalidArgument(format!(
            "kernel integration window [{a}, {b}] must satisfy 0 <= a <= b"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    match spec {
        KernelSpec::Zero => Ok(0.0),
        KernelSpec::ExponentialSum { .. } => {
            adaptive_simpson(|t| spec.eval_from_zero(t) * g(t), a, b, tol)
        }
        KernelSpec::WeaklySingularGamma { kappa, alpha, gamma } => {
            let coef = kappa * (alpha * gamma.ln() - ln_gamma(*alpha)).exp() / alpha;
            let lo = a.powf(*alpha);
            let hi = b.powf(*alpha);
            adaptive_simpson(
                |rho: f64| {
                    let tau = rho.powf(1.0 / alpha);
                    coef * (-gamma * tau).exp() * g(tau)
                },
                lo,
                hi,
                tol,
            )
        }
    }
}

/// Numeric `∫_a^b K(τ) dτ`.
pub fn integrate_kernel(spec: &KernelSpec, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_kernel_weighted(spec, a, b, |_| 1.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11, "∫ sin = {v}");
        let v = adaptive_simpson(|x: f64| (-x * x).exp(), -6.0, 6.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn simpson_empty_interval() {
        assert_eq!(adaptive_simpson(|x: f64| x, 2.0, 2.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn kernel_integration_handles_the_singular_origin() {
        // ∫₀^b κ γ^α/Γ(α) τ^{α−1} e^{−γτ} dτ = κ P(α, γb)
        let spec = KernelSpec::gamma_type(0.5, 0.3, 2.0).unwrap();
        let b = 0.7;
        let v = integrate_kernel(&spec, 0.0, b, 1e-12).unwrap();
        let expect =
            0.5 * crate::kernel::lower_gamma_regularized(0.3, 2.0 * b).unwrap();
        assert!((v - expect).abs() < 1e-10, "{v} vs {expect}");
    }

    #[test]
    fn kernel_integration_weighted_matches_plain_product() {
        let spec = KernelSpec::prony(&[(0.5, 1.0)]).unwrap();
        let v = integrate_kernel_weighted(&spec, 0.1, 1.4, |t| t * t, 1e-12).unwrap();
        let direct =
            adaptive_simpson(|t: f64| 0.5 * (-t).exp() * t * t, 0.1, 1.4, 1e-12).unwrap();
        assert!((v - direct).abs() < 1e-11);
    }
}
