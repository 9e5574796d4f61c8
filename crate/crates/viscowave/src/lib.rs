//! Solver library for the hyperbolic integro-differential equation
//!
//! ```text
//!     ü + A u − ∫₀ᵗ K(t−s) A u(s) ds = f,   u(0) = u⁰,  u̇(0) = u¹,
//! ```
//!
//! with `A = −∂²/∂x²` on an interval, arising in linear and fractional
//! viscoelasticity. The memory kernel `K` is nonnegative, nonincreasing and
//! has total mass `κ = ‖K‖_{L1(ℝ⁺)} < 1`; it is either a Prony series
//! (sum of decaying exponentials) or weakly singular of Gamma type.
//!
//! The discretization is a continuous space-time Galerkin method, cG(1)cG(1):
//! piecewise-linear trial functions in both space and time, piecewise-constant
//! test functions in time. The convolution term is integrated exactly per time
//! slab through closed-form weights ω⁺/ω⁻ ([`convolution`]), and for Prony
//! kernels the history can be updated by an O(1)-per-term exponential
//! recurrence instead of the full sum.
//!
//! Modules:
//! - [`kernel`]: memory kernels, tail mass ξ, incomplete gamma, diagnostics
//! - [`fem1d`]: P1 mesh, mass/stiffness assembly, projections, norms
//! - [`convolution`]: convolution weights, history sums, exponential recurrence
//! - [`timestepper`]: the per-step solve and the run driver
//! - [`oracle`]: independent reference computations (modal solver, manufactured
//!   solutions, brute-force quadrature) used by tests and verification commands
//! - [`cli`]: config files, experiment drivers and CSV emission

pub mod cli;
pub mod convolution;
pub mod fem1d;
pub mod kernel;
pub mod oracle;
pub mod timestepper;

/// Library error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Structurally invalid argument (sizes, counts, unknown names).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Operation incompatible with the current state.
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// A numeric procedure failed to converge or produced non-finite values.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Requested combination is not supported.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Config file could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 1 for validation failures, 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
