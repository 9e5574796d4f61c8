//! Special functions needed by the kernel closed forms: log-gamma and the
//! regularized incomplete gamma functions, plus the exponential moment
//! functions used by the convolution weights.

use crate::{Error, Result};

/// Maximum iterations for the incomplete-gamma series / continued fraction.
const MAX_ITER: usize = 500;

/// Lanczos coefficients, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π/sin(πx)
        let s = (std::f64::consts::PI * x).sin();
        std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x)
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
    }
}

/// Regularized upper incomplete gamma function Q(α, x) = Γ(α, x)/Γ(α).
///
/// Q(α, 0) = 1, Q is monotone decreasing in x, and
/// Q(α+1, x) = Q(α, x) + x^α e^{−x}/Γ(α+1).
pub fn upper_gamma_regularized(alpha: f64, x: f64) -> Result<f64> {
    gamma_regularized_pair(alpha, x).map(|(_, q)| q)
}

/// Regularized lower incomplete gamma function P(α, x) = γ(α, x)/Γ(α) = 1 − Q(α, x).
pub fn lower_gamma_regularized(alpha: f64, x: f64) -> Result<f64> {
    gamma_regularized_pair(alpha, x).map(|(p, _)| p)
}

/// Both P(α, x) and Q(α, x), computed on the side that avoids cancellation:
/// power series for x < α + 1, modified Lentz continued fraction otherwise.
pub fn gamma_regularized_pair(alpha: f64, x: f64) -> Result<(f64, f64)> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "incomplete gamma requires alpha > 0, got {alpha}"
        )));
    }
    if x < 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!(
            "incomplete gamma requires x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    // exp(−x + α ln x − ln Γ(α))
    let prefactor = (-x + alpha * x.ln() - ln_gamma(alpha)).exp();
    if x < alpha + 1.0 {
        let p = series_lower(alpha, x, prefactor)?;
        Ok((p, 1.0 - p))
    } else {
        let q = lentz_upper(alpha, x, prefactor)?;
        Ok((1.0 - q, q))
    }
}

/// P(α, x) = prefactor · Σ_{n≥0} x^n / (α(α+1)⋯(α+n)).
fn series_lower(alpha: f64, x: f64, prefactor: f64) -> Result<f64> {
    let mut term = 1.0 / alpha;
    let mut sum = term;
    let mut ap = alpha;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON {
            return Ok(prefactor * sum);
        }
    }
    Err(Error::Numeric(format!(
        "incomplete gamma series did not converge (alpha={alpha}, x={x})"
    )))
}

/// Q(α, x) by the modified Lentz continued fraction,
/// Q = prefactor / (x + 1 − α + K_{n≥1} n(α−n)/(x + 2n + 1 − α)).
fn lentz_upper(alpha: f64, x: f64, prefactor: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let b0 = x + 1.0 - alpha;
    let mut f = if b0.abs() < TINY { TINY } else { b0 };
    let mut c = f;
    let mut d = 0.0_f64;
    for n in 1..=MAX_ITER {
        let nf = n as f64;
        let an = nf * (alpha - nf);
        let bn = x + 2.0 * nf + 1.0 - alpha;
        d = bn + an * d;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        c = bn + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            return Ok(prefactor / f);
        }
    }
    Err(Error::Numeric(format!(
        "incomplete gamma continued fraction did not converge (alpha={alpha}, x={x})"
    )))
}

// Exponential moment functions over one interval of length k, with x = γk:
//   e0(x) = (1/k)   ∫₀ᵏ e^{−γσ} dσ
//   f1(x) = (1/k²)  ∫₀ᵏ σ e^{−γσ} dσ
//   f2(x) = (1/k³)  ∫₀ᵏ σ² e^{−γσ} dσ
//   fbar(x) = e0(x) − f1(x)
// Each switches to its Taylor series below |x| = 0.5 where the closed-form
// numerator cancels.

pub(crate) fn exp_e0(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0 - 0.5 * x
    } else {
        -f64::exp_m1(-x) / x
    }
}

pub(crate) fn exp_f1(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // Σ (−1)^j (j+1)/(j+2)! x^j
        let mut sum = 0.0;
        let mut pow = 1.0;
        let mut fact = 2.0; // (j+2)! at j = 0
        for j in 0..24 {
            let term = pow * (j as f64 + 1.0) / fact;
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
            pow *= -x;
            fact *= j as f64 + 3.0;
        }
        sum
    } else {
        (1.0 - (1.0 + x) * (-x).exp()) / (x * x)
    }
}

pub(crate) fn exp_fbar(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // Σ (−1)^j x^j/(j+2)!
        let mut sum = 0.0;
        let mut pow = 1.0_f64;
        let mut fact = 2.0;
        for j in 0..24 {
            let term: f64 = pow / fact;
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
            pow *= -x;
            fact *= j as f64 + 3.0;
        }
        sum
    } else {
        (x - 1.0 + (-x).exp()) / (x * x)
    }
}

pub(crate) fn exp_f2(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // Σ (−1)^j (j+1)(j+2)/(j+3)! x^j
        let mut sum = 0.0;
        let mut pow = 1.0;
        let mut fact = 6.0; // (j+3)! at j = 0
        for j in 0..24 {
            let term = pow * (j as f64 + 1.0) * (j as f64 + 2.0) / fact;
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
            pow *= -x;
            fact *= j as f64 + 4.0;
        }
        sum
    } else {
        (2.0 - (2.0 + 2.0 * x + x * x) * (-x).exp()) / (x * x * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(2.0)).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-13);
        // reflection branch: Γ(0.1)Γ(0.9) = π/sin(0.1π)
        let lhs = ln_gamma(0.1) + ln_gamma(0.9);
        let rhs = (std::f64::consts::PI / (0.1 * std::f64::consts::PI).sin()).ln();
        assert!((lhs - rhs).abs() < 1e-13, "reflection identity: {lhs} vs {rhs}");
    }

    #[test]
    fn q_closed_form_alpha_one() {
        // Q(1, x) = e^{−x}
        let q = upper_gamma_regularized(1.0, 0.5).unwrap();
        assert!((q - 0.6065306597126334).abs() < 1e-14, "Q(1,0.5) = {q}");
    }

    #[test]
    fn q_at_zero_is_one() {
        assert_eq!(upper_gamma_regularized(0.5, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn q_half_one_reference() {
        // Q(1/2, 1) = erfc(1), reference value from high-precision integration
        let q = upper_gamma_regularized(0.5, 1.0).unwrap();
        assert!((q - 0.15729920705028513).abs() < 1e-13, "Q(0.5,1) = {q}");
    }

    #[test]
    fn q_rejects_nonpositive_alpha() {
        assert!(upper_gamma_regularized(0.0, 1.0).is_err());
        assert!(upper_gamma_regularized(-1.0, 1.0).is_err());
    }

    #[test]
    fn q_recurrence() {
        // Q(α+1, x) = Q(α, x) + x^α e^{−x} / Γ(α+1), on a deterministic grid
        for i in 0..20 {
            let alpha = 0.05 + 0.37 * i as f64;
            for j in 0..20 {
                let x = 0.01 + 0.9 * j as f64;
                let lhs = upper_gamma_regularized(alpha + 1.0, x).unwrap();
                let rhs = upper_gamma_regularized(alpha, x).unwrap()
                    + (alpha * x.ln() - x - ln_gamma(alpha + 1.0)).exp();
                assert!(
                    (lhs - rhs).abs() < 1e-12,
                    "recurrence failed at alpha={alpha}, x={x}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn q_monotone_decreasing_in_x() {
        for &alpha in &[0.3, 0.5, 1.7, 4.2] {
            let mut prev = 1.0;
            for j in 1..60 {
                let x = 0.2 * j as f64;
                let q = upper_gamma_regularized(alpha, x).unwrap();
                assert!(q <= prev + 1e-15 && (0.0..=1.0).contains(&q));
                prev = q;
            }
        }
    }

    #[test]
    fn exp_moments_match_quadrature() {
        // compare against straightforward Simpson integration of the definitions
        let simpson = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| {
            let n = 2000;
            let h = (b - a) / n as f64;
            let mut s = f(a) + f(b);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(a + i as f64 * h);
            }
            s * h / 3.0
        };
        for &x in &[1e-9, 1e-4, 0.3, 0.499, 0.501, 2.0, 10.0] {
            // integrals on (0,1) with γ = x, k = 1
            let e0 = simpson(&|s: f64| (-x * s).exp(), 0.0, 1.0);
            let m1 = simpson(&|s: f64| s * (-x * s).exp(), 0.0, 1.0);
            let m2 = simpson(&|s: f64| s * s * (-x * s).exp(), 0.0, 1.0);
            assert!((exp_e0(x) - e0).abs() < 1e-12, "e0({x})");
            assert!((exp_f1(x) - m1).abs() < 1e-12, "f1({x})");
            assert!((exp_f2(x) - m2).abs() < 1e-12, "f2({x})");
            assert!((exp_fbar(x) - (e0 - m1)).abs() < 1e-12, "fbar({x})");
        }
    }
}
