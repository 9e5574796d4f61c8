//! Memory kernels and the auxiliary tail-mass function ξ.
//!
//! A kernel `K` must satisfy `K ≥ 0`, `K̇ ≤ 0` and `‖K‖_{L1(ℝ⁺)} = κ < 1`.
//! Two concrete families are provided besides the zero kernel:
//!
//! - a Prony (exponential) series `K(t) = Σ_j c_j e^{−γ_j t}` with
//!   `κ = Σ_j c_j/γ_j`;
//! - a weakly singular Gamma-type kernel
//!   `K(t) = κ γ^α t^{α−1} e^{−γt} / Γ(α)` with `0 < α < 1`, which is the
//!   Gamma(α, γ) probability density scaled by κ, so `‖K‖_{L1} = κ` exactly.
//!
//! The tail mass `ξ(t) = ∫_t^∞ K(s) ds` has closed forms for both families;
//! it is completely monotone, `ξ(0) = κ`, and of positive type.

mod special;

pub use special::{gamma_regularized_pair, ln_gamma, lower_gamma_regularized, upper_gamma_regularized};

pub(crate) use special::{exp_e0, exp_f1, exp_f2, exp_fbar};

use crate::{Error, Result};

/// One decaying-exponential term `c e^{−γ t}` of a Prony series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PronyTerm {
    /// Amplitude `c` (1/time²).
    pub amplitude: f64,
    /// Decay rate `γ` (1/time).
    pub rate: f64,
}

/// A memory kernel with total mass κ < 1.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// K ≡ 0 (the memoryless wave equation).
    Zero,
    /// Prony series `Σ_j c_j e^{−γ_j t}`.
    ExponentialSum { terms: Vec<PronyTerm> },
    /// `κ γ^α t^{α−1} e^{−γt} / Γ(α)`, weakly singular at the origin for α < 1.
    WeaklySingularGamma { kappa: f64, alpha: f64, gamma: f64 },
}

impl KernelSpec {
    pub fn zero() -> Self {
        KernelSpec::Zero
    }

    /// Build a Prony kernel from `(c, γ)` pairs. Requires every `c > 0`,
    /// `γ > 0` and total mass `Σ c/γ < 1`.
    pub fn prony(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidArgument(
                "prony kernel needs at least one (c, gamma) term".into(),
            ));
        }
        let mut mass = 0.0;
        for &(c, g) in pairs {
            if !(c > 0.0 && c.is_finite()) || !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "prony term (c={c}, gamma={g}) must have c > 0 and gamma > 0"
                )));
            }
            mass += c / g;
        }
        if mass >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "prony kernel has total mass kappa = {mass}; the model requires kappa < 1"
            )));
        }
        Ok(KernelSpec::ExponentialSum {
            terms: pairs
                .iter()
                .map(|&(c, g)| PronyTerm { amplitude: c, rate: g })
                .collect(),
        })
    }

    /// Build the weakly singular Gamma-type kernel. Requires `0 ≤ κ < 1`,
    /// `0 < α < 1` and `γ > 0`.
    pub fn gamma_type(kappa: f64, alpha: f64, gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&kappa) || !kappa.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gamma kernel has kappa = {kappa}; the model requires 0 <= kappa < 1"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma kernel requires 0 < alpha < 1, got {alpha}"
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gamma kernel requires gamma > 0, got {gamma}"
            )));
        }
        Ok(KernelSpec::WeaklySingularGamma { kappa, alpha, gamma })
    }

    /// Pointwise evaluation K(t) for t > 0. The kernel may be unbounded at
    /// t = 0, so nonpositive arguments are rejected.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!(
                "kernel evaluation requires t > 0, got {t}"
            )));
        }
        Ok(match self {
            KernelSpec::Zero => 0.0,
            KernelSpec::ExponentialSum { terms } => terms
                .iter()
                .map(|p| p.amplitude * (-p.rate * t).exp())
                .sum(),
            KernelSpec::WeaklySingularGamma { kappa, alpha, gamma } => {
                let log_k = (alpha - 1.0) * t.ln() + alpha * gamma.ln() - gamma * t
                    - ln_gamma(*alpha);
                kappa * log_k.exp()
            }
        })
    }

    /// Pointwise value for quadrature internals; exponential sums extend
    /// continuously to t = 0, where the public `eval` refuses to guess.
    pub(crate) fn eval_from_zero(&self, t: f64) -> f64 {
        match self {
            KernelSpec::ExponentialSum { terms } if t == 0.0 => {
                terms.iter().map(|p| p.amplitude).sum()
            }
            KernelSpec::Zero => 0.0,
            _ => self.eval(t).expect("t > 0"),
        }
    }

    /// Total mass κ = ∫₀^∞ K; guaranteed < 1 by construction.
    pub fn total_mass(&self) -> f64 {
        match self {
            KernelSpec::Zero => 0.0,
            KernelSpec::ExponentialSum { terms } => {
                terms.iter().map(|p| p.amplitude / p.rate).sum()
            }
            KernelSpec::WeaklySingularGamma { kappa, .. } => *kappa,
        }
    }

    /// Tail mass ξ(t) = κ − ∫₀ᵗ K = ∫_t^∞ K, for t ≥ 0.
    ///
    /// Closed forms: `Σ (c_j/γ_j) e^{−γ_j t}` for the Prony family and
    /// `κ Q(α, γt)` for the Gamma family, so ξ(0) = κ exactly.
    pub fn xi(&self, t: f64) -> f64 {
        assert!(t >= 0.0, "xi requires t >= 0, got {t}");
        match self {
            KernelSpec::Zero => 0.0,
            KernelSpec::ExponentialSum { terms } => terms
                .iter()
                .map(|p| p.amplitude / p.rate * (-p.rate * t).exp())
                .sum(),
            KernelSpec::WeaklySingularGamma { kappa, alpha, gamma } => {
                kappa
                    * upper_gamma_regularized(*alpha, gamma * t)
                        .expect("incomplete gamma with validated parameters")
            }
        }
    }

    /// Exact ∫_a^b ξ(s) ds for 0 ≤ a ≤ b. For the Gamma family this uses the
    /// antiderivative Ξ(t) = κ [t Q(α, γt) + (α/γ) P(α+1, γt)], Ξ′ = ξ.
    pub fn xi_integral(&self, a: f64, b: f64) -> f64 {
        assert!(0.0 <= a && a <= b, "xi integral needs 0 <= a <= b");
        match self {
            KernelSpec::Zero => 0.0,
            KernelSpec::ExponentialSum { terms } => terms
                .iter()
                .map(|p| {
                    p.amplitude / (p.rate * p.rate) * ((-p.rate * a).exp() - (-p.rate * b).exp())
                })
                .sum(),
            KernelSpec::WeaklySingularGamma { kappa, alpha, gamma } => {
                let anti = |t: f64| {
                    let (p, q) = gamma_regularized_pair(*alpha, gamma * t)
                        .expect("incomplete gamma with validated parameters");
                    let _ = p;
                    let p_next = lower_gamma_regularized(alpha + 1.0, gamma * t)
                        .expect("incomplete gamma with validated parameters");
                    kappa * (t * q + alpha / gamma * p_next)
                };
                anti(b) - anti(a)
            }
        }
    }

    /// True for kernels unbounded at the origin.
    pub fn is_singular(&self) -> bool {
        matches!(self, KernelSpec::WeaklySingularGamma { alpha, .. } if *alpha < 1.0)
    }

    /// Prony terms, if this is an exponential-sum kernel.
    pub fn prony_terms(&self) -> Option<&[PronyTerm]> {
        match self {
            KernelSpec::ExponentialSum { terms } => Some(terms),
            _ => None,
        }
    }

    /// Local moments of the kernel over a shifted window:
    /// `m_p = ∫₀^d σ^p K(a + σ) dσ` for p = 0, 1, 2, with a ≥ 0, d > 0.
    ///
    /// These are the primitives behind the closed-form convolution weights.
    /// The Prony form is evaluated in the factored, cancellation-free shape
    /// `Σ_j c_j e^{−γ_j a} · d^{p+1} f_p(γ_j d)`; the Gamma form reduces to
    /// differences of regularized incomplete gamma functions.
    pub fn local_moments(&self, a: f64, d: f64) -> Result<[f64; 3]> {
        assert!(a >= 0.0 && d > 0.0, "moment window needs a >= 0, d > 0");
        match self {
            KernelSpec::Zero => Ok([0.0; 3]),
            KernelSpec::ExponentialSum { terms } => {
                let mut m = [0.0; 3];
                for p in terms {
                    let x = p.rate * d;
                    let scale = p.amplitude * (-p.rate * a).exp();
                    m[0] += scale * d * exp_e0(x);
                    m[1] += scale * d * d * exp_f1(x);
                    m[2] += scale * d * d * d * exp_f2(x);
                }
                Ok(m)
            }
            KernelSpec::WeaklySingularGamma { kappa, alpha, gamma } => {
                // Raw moments R_p = ∫_a^{a+d} τ^p K dτ
                //            = κ (α)_p γ^{−p} [P(α+p, γ(a+d)) − P(α+p, γa)],
                // then shift: m1 = R1 − a R0, m2 = R2 − 2a R1 + a² R0.
                let x0 = gamma * a;
                let x1 = gamma * (a + d);
                let mut raw = [0.0; 3];
                let mut rising = 1.0; // (α)_p = α(α+1)⋯(α+p−1)
                for (p, r) in raw.iter_mut().enumerate() {
                    let ap = alpha + p as f64;
                    let (p0, q0) = gamma_regularized_pair(ap, x0)?;
                    let (p1, q1) = gamma_regularized_pair(ap, x1)?;
                    // difference from whichever side keeps full precision
                    let diff = if p0 > 0.5 { q0 - q1 } else { p1 - p0 };
                    *r = kappa * rising * gamma.powi(-(p as i32)) * diff;
                    rising *= ap;
                }
                Ok([
                    raw[0],
                    raw[1] - a * raw[0],
                    raw[2] - 2.0 * a * raw[1] + a * a * raw[0],
                ])
            }
        }
    }
}

/// Composite-quadrature approximation of the positive-type form
/// `∫₀ᵀ ∫₀ᵗ g(t−s) φ(t) φ(s) ds dt`,
/// with φ given by `quad_n` samples on the uniform grid over [0, T].
///
/// Uses the symmetric identity (the triangular integral is half the full
/// square with `g(|t−s|)`) and trapezoid weights, so for a positive-type g
/// the result is a positive semidefinite quadratic form up to roundoff.
pub fn positive_type_residual(
    g: impl Fn(f64) -> f64,
    time_horizon: f64,
    phi: &[f64],
    quad_n: usize,
) -> Result<f64> {
    if quad_n < 2 {
        return Err(Error::InvalidArgument(format!(
            "positive-type quadrature needs at least 2 points, got {quad_n}"
        )));
    }
    if phi.len() != quad_n {
        return Err(Error::InvalidArgument(format!(
            "phi has {} samples but quad_n = {quad_n}",
            phi.len()
        )));
    }
    if !(time_horizon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time horizon must be positive, got {time_horizon}"
        )));
    }
    let dt = time_horizon / (quad_n - 1) as f64;
    // v_i = w_i φ_i with trapezoid weights
    let v: Vec<f64> = phi
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let w = if i == 0 || i == quad_n - 1 { 0.5 * dt } else { dt };
            w * p
        })
        .collect();
    let mut acc = 0.0;
    for i in 0..quad_n {
        // diagonal once, off-diagonal pairs twice; total halved afterwards
        acc += g(0.0) * v[i] * v[i];
        for j in 0..i {
            acc += 2.0 * g((i - j) as f64 * dt) * v[i] * v[j];
        }
    }
    Ok(0.5 * acc)
}

/// Result of the sampled kernel-shape diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct KernelShapeCheck {
    pub nonnegative: bool,
    pub nonincreasing: bool,
}

impl KernelShapeCheck {
    pub fn ok(&self) -> bool {
        self.nonnegative && self.nonincreasing
    }
}

/// Sample K on `n` points of (0, 10/γ_min] and check K ≥ 0 and K nonincreasing.
/// Both families are monotone by construction; this guards misuse.
pub fn check_kernel_shape(spec: &KernelSpec, n: usize) -> KernelShapeCheck {
    let rate = match spec {
        KernelSpec::Zero => {
            return KernelShapeCheck { nonnegative: true, nonincreasing: true }
        }
        KernelSpec::ExponentialSum { terms } => terms
            .iter()
            .map(|p| p.rate)
            .fold(f64::INFINITY, f64::min),
        KernelSpec::WeaklySingularGamma { gamma, .. } => *gamma,
    };
    let t_max = 10.0 / rate;
    let mut nonnegative = true;
    let mut nonincreasing = true;
    let mut prev = f64::INFINITY;
    for i in 1..=n {
        let t = t_max * i as f64 / n as f64;
        let v = spec.eval(t).expect("t > 0");
        if v < 0.0 {
            nonnegative = false;
        }
        if v > prev * (1.0 + 1e-12) {
            nonincreasing = false;
        }
        prev = v;
    }
    KernelShapeCheck { nonnegative, nonincreasing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::quad::{adaptive_simpson, integrate_kernel};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn paper_kernel() -> KernelSpec {
        // decaying exponential with kappa = 0.5: K(t) = 0.5 e^{-t}
        KernelSpec::prony(&[(0.5, 1.0)]).unwrap()
    }

    #[test]
    fn zero_kernel_evaluates_to_zero() {
        let k = KernelSpec::zero();
        assert_eq!(k.eval(1.0).unwrap(), 0.0);
        assert_eq!(k.total_mass(), 0.0);
        assert_eq!(k.xi(3.7), 0.0);
    }

    #[test]
    fn exponential_closed_form() {
        let k = paper_kernel();
        // K(ln 2) = 0.5 e^{-ln 2} = 0.25
        let v = k.eval(2f64.ln()).unwrap();
        assert!((v - 0.25).abs() < 1e-15, "K(ln2) = {v}");
        assert!((k.total_mass() - 0.5).abs() < 1e-15);
        // xi(ln 2) = 0.5 e^{-ln 2} = 0.25 as well (c/γ = 1/2·e^{-t})
        assert!((k.xi(2f64.ln()) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_nonpositive_time() {
        let k = paper_kernel();
        assert!(k.eval(0.0).is_err());
        assert!(k.eval(-1.0).is_err());
    }

    #[test]
    fn gamma_kernel_diverges_like_power_at_origin() {
        let k = KernelSpec::gamma_type(0.5, 0.5, 1.0).unwrap();
        // K(t) t^{1/2} → κ γ^α / Γ(α) as t → 0⁺
        let coef = 0.5 / ln_gamma(0.5).exp();
        for &t in &[1e-4, 1e-6, 1e-8] {
            let scaled = k.eval(t).unwrap() * t.sqrt();
            assert!(
                (scaled - coef).abs() < coef * 1e-3,
                "t={t}: K t^0.5 = {scaled}, expect ≈ {coef}"
            );
        }
    }

    #[test]
    fn gamma_total_mass_matches_quadrature() {
        let k = KernelSpec::gamma_type(0.3, 0.7, 2.0).unwrap();
        assert_eq!(k.total_mass(), 0.3);
        // tail beyond 60/γ is below 1e-20
        let numeric = integrate_kernel(&k, 0.0, 60.0 / 2.0, 1e-12).unwrap();
        assert!(
            (k.total_mass() - numeric).abs() < 1e-9,
            "kappa = 0.3 vs quadrature {numeric}"
        );
    }

    #[test]
    fn xi_at_zero_equals_total_mass_exactly() {
        for spec in [
            KernelSpec::zero(),
            paper_kernel(),
            KernelSpec::prony(&[(0.2, 0.8), (0.1, 1.6)]).unwrap(),
            KernelSpec::gamma_type(0.3, 0.7, 2.0).unwrap(),
        ] {
            assert_eq!(spec.xi(0.0), spec.total_mass());
        }
    }

    #[test]
    fn xi_matches_quadrature_on_random_times() {
        let mut rng = StdRng::seed_from_u64(11);
        let specs = [
            paper_kernel(),
            KernelSpec::prony(&[(0.2, 0.8), (0.1, 1.6)]).unwrap(),
            KernelSpec::gamma_type(0.4, 0.5, 1.0).unwrap(),
            KernelSpec::gamma_type(0.3, 0.7, 2.0).unwrap(),
        ];
        for spec in &specs {
            for _ in 0..50 {
                let t: f64 = rng.random_range(0.01..6.0);
                let integral = integrate_kernel(spec, 0.0, t, 1e-12).unwrap();
                let expect = spec.total_mass() - integral;
                assert!(
                    (spec.xi(t) - expect).abs() <= 1e-9,
                    "xi({t}) = {} vs kappa - quad = {expect} for {spec:?}",
                    spec.xi(t)
                );
            }
        }
    }

    #[test]
    fn xi_strictly_decreasing_when_kernel_nonzero() {
        for spec in [paper_kernel(), KernelSpec::gamma_type(0.4, 0.5, 1.0).unwrap()] {
            let mut prev = spec.xi(0.0);
            for i in 1..=100 {
                let t = 10.0 * i as f64 / 100.0;
                let x = spec.xi(t);
                assert!(x < prev, "xi not strictly decreasing at t={t}");
                assert!(x > 0.0 && x <= spec.total_mass());
                prev = x;
            }
        }
    }

    #[test]
    fn local_moments_match_quadrature() {
        let mut rng = StdRng::seed_from_u64(0x6d);
        let specs = [
            paper_kernel(),
            KernelSpec::prony(&[(0.2, 3.0), (0.05, 0.2)]).unwrap(),
            KernelSpec::gamma_type(0.4, 0.5, 1.0).unwrap(),
            KernelSpec::gamma_type(0.2, 0.9, 3.0).unwrap(),
        ];
        for spec in &specs {
            for _ in 0..20 {
                let a: f64 = rng.random_range(0.0..3.0);
                let d: f64 = rng.random_range(0.01..1.0);
                let m = spec.local_moments(a, d).unwrap();
                for p in 0..3 {
                    let quad = adaptive_simpson(
                        |s: f64| {
                            (s - a).powi(p as i32) * spec.eval(s.max(a + 1e-300)).unwrap()
                        },
                        a,
                        a + d,
                        1e-13,
                    );
                    // only smooth windows here; singular windows are covered
                    // through integrate_kernel in the weight tests
                    if spec.is_singular() && a == 0.0 {
                        continue;
                    }
                    let quad = quad.unwrap();
                    assert!(
                        (m[p] - quad).abs() < 1e-10,
                        "moment p={p} a={a} d={d}: {} vs {quad}",
                        m[p]
                    );
                }
            }
        }
    }

    #[test]
    fn positive_type_residual_zero_kernel() {
        let phi: Vec<f64> = (0..100).map(|i| (i as f64 * 0.13).sin()).collect();
        let r = positive_type_residual(|_| 0.0, 4.0, &phi, 100).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn positive_type_residual_rejects_small_grid() {
        assert!(positive_type_residual(|_| 1.0, 4.0, &[1.0], 1).is_err());
    }

    #[test]
    fn xi_is_positive_type_for_random_trig_polynomials() {
        let mut rng = StdRng::seed_from_u64(23);
        let big_t = 4.0;
        let n = 201;
        let specs = [paper_kernel(), KernelSpec::gamma_type(0.4, 0.5, 1.0).unwrap()];
        for spec in &specs {
            for _ in 0..20 {
                let coeffs: Vec<(f64, f64)> = (1..=5)
                    .map(|m| (rng.random_range(-1.0..1.0), m as f64))
                    .collect();
                let phi: Vec<f64> = (0..n)
                    .map(|i| {
                        let t = big_t * i as f64 / (n - 1) as f64;
                        coeffs.iter().map(|&(a, m)| a * (m * t).sin()).sum()
                    })
                    .collect();
                let r = positive_type_residual(|t| spec.xi(t), big_t, &phi, n).unwrap();
                assert!(r >= -1e-12, "xi residual {r} < -1e-12 for {spec:?}");
            }
        }
    }

    #[test]
    fn sine_weighted_phi_residual_is_nonnegative() {
        // g = xi of the paper kernel, phi(t) = sin(5t), T = 4
        let spec = paper_kernel();
        let n = 401;
        let phi: Vec<f64> = (0..n)
            .map(|i| (5.0 * 4.0 * i as f64 / (n - 1) as f64).sin())
            .collect();
        let r = positive_type_residual(|t| spec.xi(t), 4.0, &phi, n).unwrap();
        assert!(r >= -1e-12, "residual = {r}");
    }

    #[test]
    fn non_positive_type_kernel_goes_negative() {
        // g(t) = t e^{−t} is nonnegative but increasing near 0, hence not of
        // positive type; a brute-force search over φ = sin(mt) finds negatives.
        let n = 401;
        let mut most_negative = f64::INFINITY;
        for m in 1..=10 {
            let phi: Vec<f64> = (0..n)
                .map(|i| (m as f64 * 4.0 * i as f64 / (n - 1) as f64).sin())
                .collect();
            let r = positive_type_residual(|t| t * (-t).exp(), 4.0, &phi, n).unwrap();
            most_negative = most_negative.min(r);
        }
        assert!(
            most_negative < -1e-3,
            "expected a clearly negative residual, best was {most_negative}"
        );
    }

    #[test]
    fn constructors_reject_invalid_parameters() {
        assert!(KernelSpec::prony(&[]).is_err());
        assert!(KernelSpec::prony(&[(2.0, 1.0)]).is_err()); // kappa = 2
        assert!(KernelSpec::prony(&[(-0.5, 1.0)]).is_err());
        assert!(KernelSpec::prony(&[(0.5, 0.0)]).is_err());
        assert!(KernelSpec::gamma_type(1.0, 0.5, 1.0).is_err()); // kappa = 1
        assert!(KernelSpec::gamma_type(0.5, 1.5, 1.0).is_err()); // alpha >= 1
        assert!(KernelSpec::gamma_type(0.5, 0.5, -1.0).is_err());
        let err = KernelSpec::prony(&[(2.0, 1.0)]).unwrap_err().to_string();
        assert!(err.contains("kappa < 1"), "message should cite kappa < 1: {err}");
    }

    #[test]
    fn shape_check_passes_for_valid_kernels() {
        for spec in [
            KernelSpec::zero(),
            paper_kernel(),
            KernelSpec::gamma_type(0.4, 0.5, 1.0).unwrap(),
        ] {
            assert!(check_kernel_shape(&spec, 100).ok(), "{spec:?}");
        }
    }
}
