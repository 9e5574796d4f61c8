//! Convolution quadrature weights of the cG(1)cG(1) scheme, the history sum,
//! and the exponential-kernel recurrence accelerator.
//!
//! For time levels `0 = t₀ < … < t_N` with temporal hat functions ψ_l, the
//! scheme couples step n to slab `I_l = (t_{l−1}, t_l)` through
//!
//! ```text
//!   ω⁺_{n,l} = ∫_{I_n} ∫_{t_{l−1}}^{t∧t_l} K(t−s) ψ_{l−1}(s) ds dt,
//!   ω⁻_{n,l} = ∫_{I_n} ∫_{t_{l−1}}^{t∧t_l} K(t−s) ψ_l(s) ds dt.
//! ```
//!
//! Both are computed in closed form, never by runtime quadrature: after the
//! substitution τ = t−s the double integral collapses to `∫ K(τ) W(τ) dτ`
//! with W piecewise quadratic, which reduces to the kernel's local moments
//! `∫ σ^p K(a+σ) dσ` (elementary for Prony sums, incomplete-gamma calls for
//! the weakly singular family). The l = n slab honors the `t ∧ t_l`
//! truncation, where the inner integral only reaches up to t.

use crate::fem1d::SymTridiag;
use crate::kernel::{exp_e0, exp_f1, exp_fbar, KernelSpec, PronyTerm};
use crate::{Error, Result};

/// Partition 0 = t₀ < t₁ < … < t_N of the time interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// Uniform grid with `n_steps` steps on [0, horizon].
    pub fn uniform(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "time horizon must be positive, got {horizon}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::InvalidArgument("uniform grid needs n_steps >= 1".into()));
        }
        let times = (0..=n_steps)
            .map(|i| horizon * i as f64 / n_steps as f64)
            .collect();
        Ok(TimeGrid { times })
    }

    /// Grid from explicit levels; must start at 0 and be strictly increasing.
    /// A single level `[0]` describes a zero-step run.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times[0] != 0.0 {
            return Err(Error::InvalidArgument(
                "time grid must start at t = 0".into(),
            ));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "time levels must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(TimeGrid { times })
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, level: usize) -> f64 {
        self.times[level]
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Step size k_n = t_n − t_{n−1} for 1 ≤ n ≤ N.
    pub fn step(&self, n: usize) -> f64 {
        self.times[n] - self.times[n - 1]
    }

    pub fn max_step(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn is_uniform(&self) -> bool {
        if self.n_steps() < 2 {
            return true;
        }
        let k = self.step(1);
        (2..=self.n_steps()).all(|n| (self.step(n) - k).abs() <= 1e-14 * k)
    }
}

/// The weight arrays ω⁺_{n,l}, ω⁻_{n,l} for one step n, indexed by l−1.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvWeights {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl ConvWeights {
    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }
}

/// Closed-form (ω⁺_{n,l}, ω⁻_{n,l}) for 1 ≤ l ≤ n ≤ N.
pub fn weight_pair(
    spec: &KernelSpec,
    grid: &TimeGrid,
    n: usize,
    l: usize,
) -> Result<(f64, f64)> {
    assert!(
        1 <= l && l <= n && n <= grid.n_steps(),
        "weight indices need 1 <= l <= n <= N, got l={l}, n={n}, N={}",
        grid.n_steps()
    );
    if matches!(spec, KernelSpec::Zero) {
        return Ok((0.0, 0.0));
    }
    let with_context = |e: Error| {
        Error::Numeric(format!("weight computation failed at (n={n}, l={l}): {e}"))
    };
    if l == n {
        // inner upper limit is t, not t_n:
        //   ω⁻ = (1/2k) ∫₀ᵏ (k−τ)² K(τ) dτ,  ω⁺ = (1/2k) ∫₀ᵏ (k²−τ²) K(τ) dτ
        let k = grid.step(n);
        let m = spec.local_moments(0.0, k).map_err(with_context)?;
        let minus = (k * k * m[0] - 2.0 * k * m[1] + m[2]) / (2.0 * k);
        let plus = (k * k * m[0] - m[2]) / (2.0 * k);
        return Ok((plus, minus));
    }
    // l < n: τ = t − s ranges over [a, b+k] with the geometric weights
    //   W⁺(τ) = (min(k, τ−a)² − max(0, τ−b)²) / 2k,
    //   W⁻(τ) = (min(k, τ−a) − max(0, τ−b)) − W⁺(τ),
    // piecewise quadratic with breakpoints a+k and b.
    let k = grid.step(l);
    let kn = grid.step(n);
    let a = grid.time(n - 1) - grid.time(l);
    let b = grid.time(n) - grid.time(l);
    let c1 = (a + k).min(b);
    let c2 = (a + k).max(b);
    let mut plus = 0.0;
    let mut minus = 0.0;

    // [a, c1]: W⁺ = σ²/2k, W⁻ = σ − σ²/2k (σ = τ − a)
    let d1 = c1 - a;
    if d1 > 0.0 {
        let m = spec.local_moments(a, d1).map_err(with_context)?;
        plus += m[2] / (2.0 * k);
        minus += m[1] - m[2] / (2.0 * k);
    }

    // [c1, c2]
    let d2 = c2 - c1;
    if d2 > 0.0 {
        let m = spec.local_moments(c1, d2).map_err(with_context)?;
        if k <= kn {
            // full slab window: W⁺ = W⁻ = k/2
            plus += 0.5 * k * m[0];
            minus += 0.5 * k * m[0];
        } else {
            // window clipped on both sides: W⁺ = kn(kn + 2σ)/2k (σ = τ − b)
            let p = (kn * kn * m[0] + 2.0 * kn * m[1]) / (2.0 * k);
            plus += p;
            minus += kn * m[0] - p;
        }
    }

    // [c2, b+k]: W⁺ = ((k²−e0²) − 2e0σ − σ²)/2k, W⁻ = (Δ−σ) − W⁺ (σ = τ − c2)
    let d3 = b + k - c2;
    if d3 > 0.0 {
        let e0 = c2 - b;
        let m = spec.local_moments(c2, d3).map_err(with_context)?;
        let p = ((k * k - e0 * e0) * m[0] - 2.0 * e0 * m[1] - m[2]) / (2.0 * k);
        plus += p;
        minus += d3 * m[0] - m[1] - p;
    }

    Ok((plus, minus))
}

/// All weights ω±_{n,l}, l = 1..n, for one step.
pub fn weights(spec: &KernelSpec, grid: &TimeGrid, n: usize) -> Result<ConvWeights> {
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for l in 1..=n {
        let (p, m) = weight_pair(spec, grid, n, l)?;
        plus.push(p);
        minus.push(m);
    }
    Ok(ConvWeights { plus, minus })
}

/// History term Σ_{l=1}^{n−1} (ω⁻_{n,l} S U₁^l + ω⁺_{n,l} S U₁^{l−1}).
///
/// `history[l]` holds the nodal vector U₁^l; the stiffness matrix is applied
/// once to the accumulated weighted sum (fixed mesh, so S is shared by all
/// levels).
pub fn history_sum(
    stiffness: &SymTridiag,
    history: &[Vec<f64>],
    w: &ConvWeights,
    n: usize,
) -> Result<Vec<f64>> {
    let dim = stiffness.dim();
    if n == 1 {
        return Ok(vec![0.0; dim]);
    }
    if history.len() < n {
        return Err(Error::InvalidState(format!(
            "history holds {} levels but step {n} needs levels 0..{}",
            history.len(),
            n - 1
        )));
    }
    if w.len() < n - 1 {
        return Err(Error::InvalidState(format!(
            "weight table has {} entries but step {n} sums l = 1..{}",
            w.len(),
            n - 1
        )));
    }
    let mut acc = vec![0.0; dim];
    for l in 1..n {
        let wm = w.minus[l - 1];
        let wp = w.plus[l - 1];
        for i in 0..dim {
            acc[i] += wm * history[l][i] + wp * history[l - 1][i];
        }
    }
    Ok(stiffness.apply(&acc))
}

/// O(1)-per-term history state for Prony kernels, exploiting
/// `e^{−γ(t_n−s)} = e^{−γ k_n} e^{−γ(t_{n−1}−s)}`.
///
/// After processing step n the per-term vectors hold
/// `R_j = Σ_{l=1}^{n} e^{−γ_j (t_n − t_l)} k_l (f̄(γ_j k_l) U₁^l + f₁(γ_j k_l) U₁^{l−1})`,
/// from which the history term of step n+1 is
/// `Σ_j c_j k_{n+1} e₀(γ_j k_{n+1}) · S R_j`.
#[derive(Debug, Clone)]
pub struct ExpRecurrence {
    terms: Vec<PronyTerm>,
    state: Vec<Vec<f64>>,
}

impl ExpRecurrence {
    /// Zeroed state; only exponential-sum kernels are supported.
    pub fn new(spec: &KernelSpec, dim: usize) -> Result<Self> {
        let terms = spec
            .prony_terms()
            .ok_or_else(|| {
                Error::Unsupported(
                    "exponential history recurrence requires an exponential-sum kernel".into(),
                )
            })?
            .to_vec();
        let state = vec![vec![0.0; dim]; terms.len()];
        Ok(ExpRecurrence { terms, state })
    }

    /// Fold step n's slab (U₁^{n−1}, U₁ⁿ) into the state. Call after the step
    /// that produced U₁ⁿ.
    pub fn update(&mut self, grid: &TimeGrid, n: usize, u_prev: &[f64], u_curr: &[f64]) {
        let k = grid.step(n);
        for (term, r) in self.terms.iter().zip(self.state.iter_mut()) {
            let x = term.rate * k;
            let decay = (-x).exp();
            let c_curr = k * exp_fbar(x);
            let c_prev = k * exp_f1(x);
            for i in 0..r.len() {
                r[i] = decay * r[i] + c_curr * u_curr[i] + c_prev * u_prev[i];
            }
        }
    }

    /// History term for step n, answered from the state in O(terms · dim).
    /// Equals the direct `history_sum` for exponential kernels.
    pub fn history_sum(
        &self,
        stiffness: &SymTridiag,
        grid: &TimeGrid,
        n: usize,
    ) -> Vec<f64> {
        let dim = stiffness.dim();
        let k = grid.step(n);
        let mut acc = vec![0.0; dim];
        for (term, r) in self.terms.iter().zip(&self.state) {
            let scale = term.amplitude * k * exp_e0(term.rate * k);
            for i in 0..dim {
                acc[i] += scale * r[i];
            }
        }
        stiffness.apply(&acc)
    }
}
