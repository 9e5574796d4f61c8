//! Modal spectral reference solver for Dirichlet–Dirichlet problems.
//!
//! With eigenpairs `e_k(x) = sin(kπx/L)`, `λ_k = (kπ/L)²` of the operator,
//! each modal coefficient solves the scalar Volterra equation
//!
//! ```text
//!     ü_k + λ_k u_k − λ_k ∫₀ᵗ K(t−s) u_k(s) ds = f_k(t),
//! ```
//!
//! integrated here by the trapezoidal rule in time with product integration
//! (piecewise-linear interpolation of the history against the exact kernel)
//! for the memory term. Both parts are second order in `dt_fine`, and the
//! discretization is genuinely different from the cG(1)cG(1) scheme, so
//! agreement is evidence of correctness rather than shared bugs.

use crate::kernel::KernelSpec;
use crate::{Error, Result};
use std::sync::Arc;

/// Modal load f_k(t); the first argument is the 1-based mode index.
pub type ModalLoad = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;

/// Configuration of the modal reference solve.
#[derive(Clone)]
pub struct ModalConfig {
    pub n_modes: usize,
    /// Time step of the scalar integrator; the oracle error is O(dt_fine²),
    /// so pick it small enough that the oracle error is well below the
    /// solver error being measured.
    pub dt_fine: f64,
    pub kernel: KernelSpec,
    pub domain_length: f64,
    pub horizon: f64,
    /// Modal coefficients of u⁰ (1-based mode k at index k−1).
    pub initial_displacement: Vec<f64>,
    /// Modal coefficients of u¹.
    pub initial_velocity: Vec<f64>,
    pub modal_load: Option<ModalLoad>,
}

/// Sampled modal solution on the fine time grid.
pub struct ModalSolution {
    pub times: Vec<f64>,
    /// `modes[k][i]` = coefficient of mode k+1 at time `times[i]`.
    pub modes: Vec<Vec<f64>>,
    pub domain_length: f64,
}

impl ModalSolution {
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    /// Displacement u(x, t_i) by superposition.
    pub fn eval(&self, x: f64, time_index: usize) -> f64 {
        let l = self.domain_length;
        self.modes
            .iter()
            .enumerate()
            .map(|(k, u)| u[time_index] * ((k + 1) as f64 * std::f64::consts::PI * x / l).sin())
            .sum()
    }

    /// ∂u/∂x (x, t_i).
    pub fn eval_dx(&self, x: f64, time_index: usize) -> f64 {
        let l = self.domain_length;
        self.modes
            .iter()
            .enumerate()
            .map(|(k, u)| {
                let omega = (k + 1) as f64 * std::f64::consts::PI / l;
                u[time_index] * omega * (omega * x).cos()
            })
            .sum()
    }

    pub fn final_index(&self) -> usize {
        self.times.len() - 1
    }
}

/// Integrate all modes; Dirichlet–Dirichlet boundary conditions only.
pub fn modal_solve(cfg: &ModalConfig) -> Result<ModalSolution> {
    if cfg.n_modes == 0 {
        return Err(Error::InvalidArgument("modal solve needs n_modes >= 1".into()));
    }
    if cfg.initial_displacement.len() != cfg.n_modes
        || cfg.initial_velocity.len() != cfg.n_modes
    {
        return Err(Error::InvalidArgument(format!(
            "modal data must have {} entries",
            cfg.n_modes
        )));
    }
    if !(cfg.dt_fine > 0.0) || !(cfg.horizon > 0.0) || !(cfg.domain_length > 0.0) {
        return Err(Error::InvalidArgument(
            "dt_fine, horizon and domain length must be positive".into(),
        ));
    }
    let n_steps = (cfg.horizon / cfg.dt_fine).round().max(1.0) as usize;
    let dt = cfg.horizon / n_steps as f64;
    let times: Vec<f64> = (0..=n_steps)
        .map(|i| cfg.horizon * i as f64 / n_steps as f64)
        .collect();

    // product-integration weights per lag bin j: contribution of slab
    // (t_{l−1}, t_l) to Q(t_m) with j = m − l is
    //   w_lower[j]·u_{l−1} + w_upper[j]·u_l,
    // from the exact moments of K over (j·dt, (j+1)·dt).
    let mut w_lower = vec![0.0; n_steps];
    let mut w_upper = vec![0.0; n_steps];
    for (j, (wl, wu)) in w_lower.iter_mut().zip(w_upper.iter_mut()).enumerate() {
        let m = cfg.kernel.local_moments(j as f64 * dt, dt)?;
        *wl = m[1] / dt;
        *wu = m[0] - m[1] / dt;
    }

    // Split the memory term as Q(t) = u(0)(κ − ξ(t)) + Q̃(t) with
    // Q̃(t) = ∫₀ᵗ K(t−s)(u(s) − u(0)) ds. The first part is integrated
    // exactly over each step (it carries the t^α startup behavior of weakly
    // singular kernels, which would otherwise cut the trapezoid to order
    // 1+α); the remainder is smooth enough for full second order.
    let kappa = cfg.kernel.total_mass();
    let mut modes = Vec::with_capacity(cfg.n_modes);
    for k in 1..=cfg.n_modes {
        let omega = k as f64 * std::f64::consts::PI / cfg.domain_length;
        let lambda = omega * omega;
        let f = |t: f64| cfg.modal_load.as_ref().map_or(0.0, |load| load(k, t));

        let u0 = cfg.initial_displacement[k - 1];
        let mut u = Vec::with_capacity(n_steps + 1);
        u.push(u0);
        let mut v = cfg.initial_velocity[k - 1];
        let mut q_prev = 0.0; // Q̃(t₀) = 0
        for m in 1..=n_steps {
            // known part of Q̃(t_m): all history slabs plus the lower-hat
            // part of the current slab
            let mut q_known = w_lower[0] * (u[m - 1] - u0);
            for l in 1..m {
                let j = m - l;
                q_known += w_lower[j] * (u[l - 1] - u0) + w_upper[j] * (u[l] - u0);
            }
            // exact ∫_{I_m} u(0)(κ − ξ) dt
            let star = u0 * (kappa * dt - cfg.kernel.xi_integral(times[m - 1], times[m]));
            let r1 = u[m - 1] + 0.5 * dt * v;
            let rhs = v
                + lambda * star
                + 0.5
                    * dt
                    * (-lambda * u[m - 1] + lambda * q_prev + f(times[m - 1]) + f(times[m])
                        + lambda * (q_known - w_upper[0] * u0));
            let eff = lambda * (1.0 - w_upper[0]);
            let v_new = (rhs - 0.5 * dt * eff * r1) / (1.0 + 0.25 * dt * dt * eff);
            let u_new = r1 + 0.5 * dt * v_new;
            q_prev = q_known + w_upper[0] * (u_new - u0);
            u.push(u_new);
            v = v_new;
        }
        modes.push(u);
    }
    Ok(ModalSolution { times, modes, domain_length: cfg.domain_length })
}

/// Modal coefficients a_k = (2/L) ∫₀ᴸ f(x) sin(kπx/L) dx by composite
/// 5-point Gauss over 200 panels.
pub fn modal_coefficients(f: impl Fn(f64) -> f64, length: f64, n_modes: usize) -> Vec<f64> {
    const GAUSS5: [(f64, f64); 5] = [
        (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
        (0.0, 0.568_888_888_888_888_9),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
        (0.906_179_845_938_664, 0.236_926_885_056_189_08),
    ];
    let panels = 200;
    let h = length / panels as f64;
    (1..=n_modes)
        .map(|k| {
            let omega = k as f64 * std::f64::consts::PI / length;
            let mut s = 0.0;
            for p in 0..panels {
                let xl = p as f64 * h;
                for &(q, w) in &GAUSS5 {
                    let x = xl + 0.5 * h * (q + 1.0);
                    s += 0.5 * h * w * f(x) * (omega * x).sin();
                }
            }
            2.0 / length * s
        })
        .collect()
}
