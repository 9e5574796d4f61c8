//! Independent reference computations used only by tests, the acceptance
//! suite and the verification subcommands: a modal spectral solver, a
//! manufactured solution, and brute-force quadrature of the convolution
//! weights. These deliberately share no discretization machinery with the
//! solver path.

pub mod modal;
pub mod quad;

pub use modal::{modal_coefficients, modal_solve, ModalConfig, ModalSolution};
pub use quad::{adaptive_simpson, integrate_kernel, integrate_kernel_weighted};

use crate::convolution::TimeGrid;
use crate::kernel::KernelSpec;
use crate::timestepper::SpaceTimeFn;
use crate::{Error, Result};
use std::sync::Arc;

/// Adaptive double quadrature of the defining integrals of (ω⁺_{n,l}, ω⁻_{n,l}),
/// to an absolute target of about 1e−11.
///
/// The inner s-integral is mapped to τ = t − s and handled by the
/// singularity-aware kernel quadrature. For weakly singular kernels and
/// l ∈ {n−1, n} the outer integrand behaves like (t − t_{n−1})^α near the
/// slab start, so the outer variable is substituted as t = t_{n−1} + ρ^{1/α}
/// before adapting. Failure to meet the tolerance is reported as an error.
pub fn quad_weight_oracle(
    spec: &KernelSpec,
    grid: &TimeGrid,
    n: usize,
    l: usize,
) -> Result<(f64, f64)> {
    assert!(
        1 <= l && l <= n && n <= grid.n_steps(),
        "oracle indices need 1 <= l <= n <= N"
    );
    if matches!(spec, KernelSpec::Zero) {
        return Ok((0.0, 0.0));
    }
    let tol = 1e-11;
    let t_n0 = grid.time(n - 1);
    let t_n1 = grid.time(n);
    let kn = t_n1 - t_n0;
    let t_l0 = grid.time(l - 1);
    let t_l1 = grid.time(l);
    let kl = t_l1 - t_l0;
    let inner_tol = 0.2 * tol / kn;

    // ∫_{t_{l−1}}^{t∧t_l} K(t−s) ψ(s) ds; an inner quadrature failure yields
    // NaN, which the outer adaptivity turns into a loud tolerance error.
    let inner = |t: f64, upper_hat: bool| -> f64 {
        let s_hi = t_l1.min(t);
        if s_hi <= t_l0 {
            return 0.0;
        }
        integrate_kernel_weighted(
            spec,
            t - s_hi,
            t - t_l0,
            |tau| {
                let s = t - tau;
                if upper_hat {
                    (s - t_l0) / kl // ψ_l
                } else {
                    (t_l1 - s) / kl // ψ_{l−1}
                }
            },
            inner_tol,
        )
        .unwrap_or(f64::NAN)
    };

    let outer = |g: &dyn Fn(f64) -> f64| -> Result<f64> {
        match spec {
            KernelSpec::WeaklySingularGamma { alpha, .. } if l + 1 >= n => {
                let inv = 1.0 / alpha;
                adaptive_simpson(
                    |rho: f64| {
                        if rho <= 0.0 {
                            return 0.0;
                        }
                        g(t_n0 + rho.powf(inv)) * inv * rho.powf(inv - 1.0)
                    },
                    0.0,
                    kn.powf(*alpha),
                    0.4 * tol,
                )
            }
            _ => adaptive_simpson(g, t_n0, t_n1, 0.4 * tol),
        }
    };

    let plus = outer(&|t| inner(t, false))?;
    let minus = outer(&|t| inner(t, true))?;
    if !plus.is_finite() || !minus.is_finite() {
        return Err(Error::Numeric(format!(
            "weight oracle tolerance not met at (n={n}, l={l})"
        )));
    }
    Ok((plus, minus))
}

/// A problem with a known exact solution, for rate verification.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub kernel: KernelSpec,
    pub domain_length: f64,
    /// Final time of the verification runs.
    pub horizon: f64,
    /// u(x, t)
    pub exact: SpaceTimeFn,
    /// u̇(x, t)
    pub exact_velocity: SpaceTimeFn,
    /// ∂u/∂x (x, t)
    pub exact_dx: SpaceTimeFn,
    /// ∂u̇/∂x (x, t)
    pub exact_velocity_dx: SpaceTimeFn,
    /// Right-hand side f(x, t) making u solve the model problem exactly.
    pub load: SpaceTimeFn,
}

/// Known cases, by id.
///
/// `"sinpi-t2"`: u(x, t) = sin(πx) t² on (0, 1), zero initial data, exponential
/// kernel K = κγ e^{−γt} with κ = 1/2, γ = 1. Using
/// ∫₀ᵗ e^{−γ(t−s)} s² ds = t²/γ − 2t/γ² + 2(1 − e^{−γt})/γ³, the load is
/// f = sin(πx) [2 + π²((1−κ)t² + 2κt/γ − (2κ/γ²)(1 − e^{−γt}))].
pub fn manufactured_case(id: &str) -> Result<ManufacturedCase> {
    use std::f64::consts::PI;
    match id {
        "sinpi-t2" => {
            let kappa = 0.5;
            let gamma = 1.0;
            let kernel = KernelSpec::prony(&[(kappa * gamma, gamma)])?;
            Ok(ManufacturedCase {
                name: id.to_string(),
                kernel,
                domain_length: 1.0,
                horizon: 1.0,
                exact: Arc::new(|x, t| (PI * x).sin() * t * t),
                exact_velocity: Arc::new(|x, t| 2.0 * t * (PI * x).sin()),
                exact_dx: Arc::new(|x, t| PI * (PI * x).cos() * t * t),
                exact_velocity_dx: Arc::new(|x, t| 2.0 * t * PI * (PI * x).cos()),
                load: Arc::new(move |x, t| {
                    (PI * x).sin()
                        * (2.0
                            + PI
                                * PI
                                * ((1.0 - kappa) * t * t + 2.0 * kappa * t / gamma
                                    - 2.0 * kappa / (gamma * gamma)
                                        * (1.0 - (-gamma * t).exp())))
                }),
            })
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown manufactured case '{other}'"
        ))),
    }
}

/// Residual of the model problem for a manufactured case at an interior point,
/// with ü and Au formed by centered second differences and the memory term by
/// singularity-aware quadrature of the differenced Laplacian. Limited by the
/// finite-difference truncation, around 1e−7.
pub fn manufactured_residual(case: &ManufacturedCase, x: f64, t: f64) -> Result<f64> {
    let eps = 1e-4;
    if t <= eps || x <= eps || x >= case.domain_length - eps {
        return Err(Error::InvalidArgument(format!(
            "residual check point ({x}, {t}) too close to the boundary"
        )));
    }
    let u = &case.exact;
    let u_tt = (u(x, t + eps) - 2.0 * u(x, t) + u(x, t - eps)) / (eps * eps);
    let a_u = |s: f64| -> f64 {
        if s < eps {
            // u(·, 0) = 0 for the shipped case; the limit is exact there
            return -(u(x + eps, s) - 2.0 * u(x, s) + u(x - eps, s)) / (eps * eps);
        }
        -(u(x + eps, s) - 2.0 * u(x, s) + u(x - eps, s)) / (eps * eps)
    };
    let memory = integrate_kernel_weighted(&case.kernel, 0.0, t, |tau| a_u(t - tau), 1e-10)?;
    Ok(u_tt + a_u(t) - memory - (case.load)(x, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weight_oracle_zero_kernel() {
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        assert_eq!(
            quad_weight_oracle(&KernelSpec::zero(), &grid, 3, 2).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn weight_oracle_partition_of_unity_singular() {
        // for the α = 1/2 kernel, ω⁺ + ω⁻ must equal ∫∫ K over the region
        let spec = KernelSpec::gamma_type(0.4, 0.5, 1.0).unwrap();
        let grid = TimeGrid::uniform(0.8, 4).unwrap();
        for (n, l) in [(1usize, 1usize), (3, 3), (3, 2), (4, 1)] {
            let (p, m) = quad_weight_oracle(&spec, &grid, n, l).unwrap();
            let direct = adaptive_simpson(
                |t: f64| {
                    let s_hi = grid.time(l).min(t);
                    integrate_kernel_weighted(&spec, t - s_hi, t - grid.time(l - 1), |_| 1.0, 1e-13)
                        .unwrap()
                },
                grid.time(n - 1),
                grid.time(n),
                1e-12,
            )
            .unwrap();
            assert!(
                (p + m - direct).abs() <= 1e-9,
                "oracle partition of unity at (n={n}, l={l}): {} vs {direct}",
                p + m
            );
        }
    }

    #[test]
    fn manufactured_case_closed_form_values() {
        let case = manufactured_case("sinpi-t2").unwrap();
        // all memory and elliptic terms vanish at t = 0 for this u
        let f0 = (case.load)(0.3, 0.0);
        assert!((f0 - 2.0 * (PI * 0.3).sin()).abs() < 1e-14, "f(x,0) = {f0}");
        // u(x, 1) = sin(πx)
        let u1 = (case.exact)(0.3, 1.0);
        assert!((u1 - (PI * 0.3).sin()).abs() < 1e-15);
        assert!(manufactured_case("nope").is_err());
    }

    #[test]
    fn manufactured_residual_vanishes() {
        let case = manufactured_case("sinpi-t2").unwrap();
        let r = manufactured_residual(&case, 0.3, 0.7).unwrap();
        assert!(r.abs() <= 1e-6, "residual at (0.3, 0.7) = {r}");
    }

    #[test]
    fn manufactured_residual_on_sample_grid() {
        let case = manufactured_case("sinpi-t2").unwrap();
        let mut worst: f64 = 0.0;
        for i in 1..=10 {
            for j in 1..=10 {
                let x = 0.05 + 0.85 * (i as f64 - 1.0) / 9.0;
                let t = 0.1 + 0.9 * (j as f64 - 1.0) / 9.0;
                let r = manufactured_residual(&case, x, t).unwrap();
                worst = worst.max(r.abs());
            }
        }
        assert!(worst <= 1e-6, "max residual on 10x10 grid = {worst}");
    }
}
