//! 1D piecewise-linear finite elements: mesh, assembly of the mass and
//! stiffness matrices for `A = −∂²/∂x²`, Dirichlet elimination, L2 and Ritz
//! projections, and norms.
//!
//! At least one end must carry a homogeneous Dirichlet condition so that the
//! stiffness matrix restricted to the free degrees of freedom stays SPD. A
//! Neumann end contributes its traction to the load vector only.

mod tridiag;

pub use tridiag::{SymTridiag, TridiagFactor};

use crate::{Error, Result};

/// 3-point Gauss-Legendre rule on [-1, 1] (exact through degree 5).
const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
    (0.0, 0.888_888_888_888_888_9),
    (0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
];

/// 5-point Gauss-Legendre rule on [-1, 1] (exact through degree 9).
const GAUSS5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// 2-point Gauss-Legendre rule on [-1, 1] (exact through degree 3).
pub(crate) const GAUSS2: [(f64, f64); 2] = [
    (-0.577_350_269_189_625_7, 1.0),
    (0.577_350_269_189_625_7, 1.0),
];

/// Strictly increasing node coordinates on [0, L].
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
}

impl Mesh1D {
    /// Uniform mesh with `n_elems` elements on [0, length].
    pub fn uniform(length: f64, n_elems: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "mesh length must be positive, got {length}"
            )));
        }
        if n_elems < 2 {
            return Err(Error::InvalidArgument(format!(
                "mesh needs at least 2 elements, got {n_elems}"
            )));
        }
        let nodes = (0..=n_elems)
            .map(|i| length * i as f64 / n_elems as f64)
            .collect();
        Ok(Mesh1D { nodes })
    }

    /// Mesh from an explicit node list; must be strictly increasing, start at
    /// 0, and contain at least 3 nodes.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "mesh needs at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "mesh must start at x = 0, got {}",
                nodes[0]
            )));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "mesh nodes must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Mesh1D { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_elems(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn length(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Endpoints of element `e`.
    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    /// Largest element size h.
    pub fn h_max(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Piecewise-linear interpolation of full nodal values at x ∈ [0, L].
    pub fn interpolate(&self, nodal: &[f64], x: f64) -> f64 {
        assert_eq!(nodal.len(), self.nodes.len(), "nodal vector size mismatch");
        let (e, s) = self.locate(x);
        nodal[e] * (1.0 - s) + nodal[e + 1] * s
    }

    /// Derivative of the piecewise-linear interpolant (element slope) at x.
    pub fn interpolate_dx(&self, nodal: &[f64], x: f64) -> f64 {
        assert_eq!(nodal.len(), self.nodes.len(), "nodal vector size mismatch");
        let (e, _) = self.locate(x);
        let (xl, xr) = self.element(e);
        (nodal[e + 1] - nodal[e]) / (xr - xl)
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let x = x.clamp(0.0, self.length());
        let e = match self
            .nodes
            .binary_search_by(|n| n.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(self.n_elems() - 1),
            Err(i) => i - 1,
        };
        let (xl, xr) = self.element(e);
        (e, (x - xl) / (xr - xl))
    }
}

/// Condition at one end of the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    /// Homogeneous Dirichlet, u = 0.
    Dirichlet,
    /// Constant traction g; enters the load vector, the node stays free.
    Neumann { traction: f64 },
}

/// Boundary conditions at both ends. At least one must be Dirichlet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcSpec {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
}

impl BcSpec {
    pub fn dirichlet_dirichlet() -> Self {
        BcSpec { left: BoundaryKind::Dirichlet, right: BoundaryKind::Dirichlet }
    }

    /// Dirichlet at x = 0, constant Neumann traction at x = L.
    pub fn dirichlet_neumann(traction: f64) -> Self {
        BcSpec {
            left: BoundaryKind::Dirichlet,
            right: BoundaryKind::Neumann { traction },
        }
    }
}

/// Assembled free-DOF system: mass and stiffness of the P1 space with
/// Dirichlet nodes eliminated.
#[derive(Debug, Clone)]
pub struct FemSystem {
    mesh: Mesh1D,
    bc: BcSpec,
    /// Node index of the first free DOF (0 or 1).
    first_free: usize,
    mass: SymTridiag,
    stiffness: SymTridiag,
}

/// Assemble mass and stiffness from exact element integrals of the hat
/// functions and eliminate Dirichlet DOFs.
pub fn assemble(mesh: Mesh1D, bc: BcSpec) -> Result<FemSystem> {
    if matches!(bc.left, BoundaryKind::Neumann { .. })
        && matches!(bc.right, BoundaryKind::Neumann { .. })
    {
        return Err(Error::InvalidArgument(
            "at least one boundary must be Dirichlet to keep the operator positive definite"
                .into(),
        ));
    }
    let m = mesh.n_elems();
    let first_free = match bc.left {
        BoundaryKind::Dirichlet => 1,
        BoundaryKind::Neumann { .. } => 0,
    };
    let last_free = match bc.right {
        BoundaryKind::Dirichlet => m - 1,
        BoundaryKind::Neumann { .. } => m,
    };
    let n_free = last_free + 1 - first_free;
    let mut mass = SymTridiag::zeros(n_free);
    let mut stiffness = SymTridiag::zeros(n_free);
    for e in 0..m {
        let (xl, xr) = mesh.element(e);
        let h = xr - xl;
        // element matrices: M_e = h/6 [[2,1],[1,2]], S_e = 1/h [[1,-1],[-1,1]]
        for (local, node) in [(0usize, e), (1usize, e + 1)] {
            if node < first_free || node > last_free {
                continue;
            }
            let i = node - first_free;
            mass.diag[i] += h / 3.0;
            stiffness.diag[i] += 1.0 / h;
            let other = e + 1 - local; // the opposite node of this element
            if other >= first_free && other <= last_free && other == node + 1 {
                mass.off[i] += h / 6.0;
                stiffness.off[i] += -1.0 / h;
            }
        }
    }
    Ok(FemSystem { mesh, bc, first_free, mass, stiffness })
}

impl FemSystem {
    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn bc(&self) -> &BcSpec {
        &self.bc
    }

    pub fn mass(&self) -> &SymTridiag {
        &self.mass
    }

    pub fn stiffness(&self) -> &SymTridiag {
        &self.stiffness
    }

    pub fn n_free(&self) -> usize {
        self.mass.dim()
    }

    /// Node index of free DOF `i`.
    pub fn node_of_free(&self, i: usize) -> usize {
        self.first_free + i
    }

    /// Full nodal vector (Dirichlet zeros included) from free coefficients.
    pub fn full_values(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.n_free(), "free coefficient size mismatch");
        let mut full = vec![0.0; self.mesh.nodes().len()];
        full[self.first_free..self.first_free + coeffs.len()].copy_from_slice(coeffs);
        full
    }

    /// (f, φ_i) for every free DOF by per-element 5-point Gauss quadrature.
    fn hat_products(&self, f: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
        let mut b = vec![0.0; self.n_free()];
        let last_free = self.first_free + self.n_free() - 1;
        for e in 0..self.mesh.n_elems() {
            let (xl, xr) = self.mesh.element(e);
            let h = xr - xl;
            for &(q, w) in &GAUSS5 {
                let x = xl + 0.5 * h * (q + 1.0);
                let fx = f(x);
                if !fx.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "integrand not finite at x = {x}"
                    )));
                }
                let phi_right = (x - xl) / h;
                for (node, phi) in [(e, 1.0 - phi_right), (e + 1, phi_right)] {
                    if node >= self.first_free && node <= last_free {
                        b[node - self.first_free] += 0.5 * h * w * fx * phi;
                    }
                }
            }
        }
        Ok(b)
    }
}

/// L2 projection of `f` onto the FE space: solves M c = ((f, φ_i))_i and
/// returns the free-DOF coefficients.
pub fn l2_project(sys: &FemSystem, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let b = sys.hat_products(&f)?;
    sys.mass().solve(&b)
}

/// Ritz projection of `v` given its derivative: solves S c = (a(v, φ_i))_i
/// with a(v, φ_i) = ∫ v′ φ_i′ integrated per element.
pub fn ritz_project(sys: &FemSystem, v_dx: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let mut b = vec![0.0; sys.n_free()];
    let last_free = sys.first_free + sys.n_free() - 1;
    for e in 0..sys.mesh.n_elems() {
        let (xl, xr) = sys.mesh.element(e);
        let h = xr - xl;
        for &(q, w) in &GAUSS3 {
            let x = xl + 0.5 * h * (q + 1.0);
            let dv = v_dx(x);
            // φ′ = ∓1/h on the element
            for (node, dphi) in [(e, -1.0 / h), (e + 1, 1.0 / h)] {
                if node >= sys.first_free && node <= last_free {
                    b[node - sys.first_free] += 0.5 * h * w * dv * dphi;
                }
            }
        }
    }
    sys.stiffness().solve(&b)
}

/// Load vector Bⁿ_i = ∫_{I_n} (f(·,t), φ_i) dt over one time slab, by 2-point
/// Gauss in time and 5-point Gauss in space, plus the constant Neumann
/// traction contribution `k_n · g` at a Neumann boundary DOF.
pub fn load_vector(
    sys: &FemSystem,
    f: impl Fn(f64, f64) -> f64,
    t_start: f64,
    t_end: f64,
) -> Result<Vec<f64>> {
    let k = t_end - t_start;
    let mut b = vec![0.0; sys.n_free()];
    for &(qt, wt) in &GAUSS2 {
        let t = t_start + 0.5 * k * (qt + 1.0);
        let spatial = sys.hat_products(&|x| f(x, t))?;
        for (bi, si) in b.iter_mut().zip(&spatial) {
            *bi += 0.5 * k * wt * si;
        }
    }
    if let BoundaryKind::Neumann { traction } = sys.bc.left {
        b[0] += k * traction;
    }
    if let BoundaryKind::Neumann { traction } = sys.bc.right {
        let n = sys.n_free();
        b[n - 1] += k * traction;
    }
    Ok(b)
}

/// L2 and energy (H1-seminorm) magnitudes of an FE function or error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
}

/// Norms of the FE function with the given free coefficients:
/// ‖v_h‖² = vᵀMv and ‖v_h‖_V² = vᵀSv.
pub fn norms(sys: &FemSystem, coeffs: &[f64]) -> Result<Norms> {
    if coeffs.len() != sys.n_free() {
        return Err(Error::InvalidArgument(format!(
            "coefficient vector has {} entries, system has {} free DOFs",
            coeffs.len(),
            sys.n_free()
        )));
    }
    Ok(Norms {
        l2: sys.mass().quadratic_form(coeffs).max(0.0).sqrt(),
        h1: sys.stiffness().quadratic_form(coeffs).max(0.0).sqrt(),
    })
}

/// Error norms ‖v_h − v‖ of the FE function against an exact function and its
/// derivative, by 5-point Gauss per element.
pub fn error_norms(
    sys: &FemSystem,
    coeffs: &[f64],
    exact: impl Fn(f64) -> f64,
    exact_dx: impl Fn(f64) -> f64,
) -> Result<Norms> {
    if coeffs.len() != sys.n_free() {
        return Err(Error::InvalidArgument(format!(
            "coefficient vector has {} entries, system has {} free DOFs",
            coeffs.len(),
            sys.n_free()
        )));
    }
    let full = sys.full_values(coeffs);
    let mut l2_sq = 0.0;
    let mut h1_sq = 0.0;
    for e in 0..sys.mesh.n_elems() {
        let (xl, xr) = sys.mesh.element(e);
        let h = xr - xl;
        let slope = (full[e + 1] - full[e]) / h;
        for &(q, w) in &GAUSS5 {
            let x = xl + 0.5 * h * (q + 1.0);
            let s = (x - xl) / h;
            let vh = full[e] * (1.0 - s) + full[e + 1] * s;
            let de = vh - exact(x);
            let dd = slope - exact_dx(x);
            l2_sq += 0.5 * h * w * de * de;
            h1_sq += 0.5 * h * w * dd * dd;
        }
    }
    Ok(Norms { l2: l2_sq.sqrt(), h1: h1_sq.sqrt() })
}
