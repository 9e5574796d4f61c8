//! Symmetric tridiagonal matrices and their LDLᵀ (Thomas) factorization.

use crate::{Error, Result};

/// Symmetric tridiagonal matrix stored as main diagonal and one off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn zeros(n: usize) -> Self {
        SymTridiag {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// y = A x
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n, "dimension mismatch in tridiagonal apply");
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }

    /// xᵀ A x
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        assert_eq!(x.len(), n, "dimension mismatch in quadratic form");
        let mut s = 0.0;
        for i in 0..n {
            s += self.diag[i] * x[i] * x[i];
            if i + 1 < n {
                s += 2.0 * self.off[i] * x[i] * x[i + 1];
            }
        }
        s
    }

    /// C = a·self + b·other (same sparsity).
    pub fn linear_combination(&self, a: f64, other: &SymTridiag, b: f64) -> SymTridiag {
        assert_eq!(self.dim(), other.dim());
        SymTridiag {
            diag: self
                .diag
                .iter()
                .zip(&other.diag)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            off: self
                .off
                .iter()
                .zip(&other.off)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    /// LDLᵀ factorization; fails if a pivot is not strictly positive,
    /// i.e. if the matrix is not positive definite.
    pub fn factorize(&self) -> Result<TridiagFactor> {
        let n = self.dim();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let mut di = self.diag[i];
            if i > 0 {
                di -= l[i - 1] * l[i - 1] * d[i - 1];
            }
            if !(di > 0.0) || !di.is_finite() {
                return Err(Error::Numeric(format!(
                    "tridiagonal factorization pivot {di} at row {i}; matrix not SPD"
                )));
            }
            d[i] = di;
            if i + 1 < n {
                l[i] = self.off[i] / di;
            }
        }
        Ok(TridiagFactor { d, l })
    }

    /// Convenience: factorize and solve A x = b once.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        Ok(self.factorize()?.solve(b))
    }
}

/// LDLᵀ factors of an SPD tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagFactor {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl TridiagFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        assert_eq!(b.len(), n, "dimension mismatch in tridiagonal solve");
        let mut x = b.to_vec();
        // forward: L z = b
        for i in 1..n {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        // diagonal
        for i in 0..n {
            x[i] /= self.d[i];
        }
        // backward: Lᵀ x = z
        for i in (0..n - 1).rev() {
            x[i] -= self.l[i] * x[i + 1];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn solve_recovers_known_vector() {
        let mut rng = StdRng::seed_from_u64(7);
        for n in [1usize, 2, 3, 17, 64] {
            // diagonally dominant => SPD
            let off: Vec<f64> = (0..n.saturating_sub(1))
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let diag: Vec<f64> = (0..n)
                .map(|i| {
                    let mut s = 2.5;
                    if i > 0 {
                        s += off[i - 1].abs();
                    }
                    if i < off.len() {
                        s += off[i].abs();
                    }
                    s
                })
                .collect();
            let a = SymTridiag { diag, off };
            let x_true: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let b = a.apply(&x_true);
            let x = a.solve(&b).unwrap();
            for i in 0..n {
                assert!((x[i] - x_true[i]).abs() < 1e-12, "n={n}, i={i}");
            }
        }
    }

    #[test]
    fn factorization_rejects_indefinite_matrix() {
        let a = SymTridiag {
            diag: vec![1.0, -1.0],
            off: vec![0.0],
        };
        assert!(a.factorize().is_err());
    }

    #[test]
    fn quadratic_form_matches_apply() {
        let a = SymTridiag {
            diag: vec![2.0, 3.0, 4.0],
            off: vec![-1.0, 0.5],
        };
        let x = vec![1.0, -2.0, 0.5];
        let ax = a.apply(&x);
        let dot: f64 = x.iter().zip(&ax).map(|(u, v)| u * v).sum();
        assert!((a.quadratic_form(&x) - dot).abs() < 1e-14);
    }
}
