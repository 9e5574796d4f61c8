//! The cG(1)cG(1) time-stepping engine.
//!
//! Per slab I_n the scheme couples (U₁ⁿ, U₂ⁿ) through
//!
//! ```text
//!   M U₁ⁿ − (k_n/2) M U₂ⁿ = M U₁ⁿ⁻¹ + (k_n/2) M U₂ⁿ⁻¹,
//!   M U₂ⁿ + (k_n/2 − ω⁻_{n,n}) S U₁ⁿ
//!       = M U₂ⁿ⁻¹ + (−k_n/2 + ω⁺_{n,n}) S U₁ⁿ⁻¹
//!         + Σ_{l<n} (ω⁻_{n,l} S U₁ˡ + ω⁺_{n,l} S U₁ˡ⁻¹) + Bⁿ,
//! ```
//!
//! on a fixed mesh (one M, one S). The first equation reduces exactly to
//! `U₁ⁿ = U₁ⁿ⁻¹ + (k_n/2)(U₂ⁿ⁻¹ + U₂ⁿ)`; substituting it into the second
//! leaves a single SPD tridiagonal solve per step,
//!
//! ```text
//!   [M + (k_n/2)(k_n/2 − ω⁻_{n,n}) S] U₂ⁿ
//!       = M U₂ⁿ⁻¹ + (ω⁺_{n,n} + ω⁻_{n,n} − k_n) S U₁ⁿ⁻¹
//!         − (k_n/2)(k_n/2 − ω⁻_{n,n}) S U₂ⁿ⁻¹ + history + Bⁿ.
//! ```
//!
//! The matrix stays SPD because ω⁻_{n,n} ≤ κ k_n/2 < k_n/2; this is checked
//! directly on random vectors in debug builds rather than through a constant.

use crate::convolution::{history_sum, weight_pair, weights, ExpRecurrence, TimeGrid};
use crate::fem1d::{assemble, l2_project, load_vector, BcSpec, FemSystem, Mesh1D, TridiagFactor};
use crate::kernel::KernelSpec;
use crate::{Error, Result};
use std::sync::Arc;

/// A function of space alone.
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// A function of space and time, called as f(x, t).
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Zero function of space.
pub fn zero_space_fn() -> SpaceFn {
    Arc::new(|_| 0.0)
}

/// Zero load.
pub fn zero_load() -> SpaceTimeFn {
    Arc::new(|_, _| 0.0)
}

/// How the memory term is accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistoryMode {
    /// Full sum over all past levels, O(n) per step; works for every kernel.
    Direct,
    /// Exponential recurrence, O(terms) per step; Prony kernels only.
    Recurrence,
}

/// Full description of one run.
#[derive(Clone)]
pub struct Problem {
    pub kernel: KernelSpec,
    pub mesh: Mesh1D,
    pub bc: BcSpec,
    pub grid: TimeGrid,
    pub initial_displacement: SpaceFn,
    pub initial_velocity: SpaceFn,
    pub load: SpaceTimeFn,
    /// Probe coordinates for the reported time series.
    pub probes: Vec<f64>,
    pub history_mode: HistoryMode,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        if self.history_mode == HistoryMode::Recurrence && self.kernel.prony_terms().is_none() {
            return Err(Error::Unsupported(
                "recurrence history mode requires an exponential-sum kernel".into(),
            ));
        }
        for &p in &self.probes {
            if !(0.0..=self.mesh.length()).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "probe x = {p} outside the domain [0, {}]",
                    self.mesh.length()
                )));
            }
        }
        Ok(())
    }
}

/// Mutable state of a run: current (U₁ⁿ, U₂ⁿ), history, energy log.
pub struct SolverState {
    sys: FemSystem,
    n: usize,
    u1: Vec<f64>,
    u2: Vec<f64>,
    history: Vec<Vec<f64>>,
    recurrence: Option<ExpRecurrence>,
    energy: Vec<f64>,
    cached_factor: Option<(f64, TridiagFactor)>,
}

impl SolverState {
    pub fn system(&self) -> &FemSystem {
        &self.sys
    }

    pub fn step_index(&self) -> usize {
        self.n
    }

    /// Free-DOF displacement coefficients U₁ⁿ.
    pub fn u1(&self) -> &[f64] {
        &self.u1
    }

    /// Free-DOF velocity coefficients U₂ⁿ.
    pub fn u2(&self) -> &[f64] {
        &self.u2
    }

    /// Energy log E⁰..Eⁿ with Eⁿ = U₂ᵀM U₂ + U₁ᵀS U₁.
    pub fn energy_log(&self) -> &[f64] {
        &self.energy
    }

    fn energy(&self) -> f64 {
        self.sys.mass().quadratic_form(&self.u2) + self.sys.stiffness().quadratic_form(&self.u1)
    }
}

/// Project the initial data: U₁⁰ = P_h u⁰, U₂⁰ = P_h u¹.
pub fn init(problem: &Problem) -> Result<SolverState> {
    problem.validate()?;
    let sys = assemble(problem.mesh.clone(), problem.bc)?;
    let u1 = l2_project(&sys, |x| (problem.initial_displacement)(x))?;
    let u2 = l2_project(&sys, |x| (problem.initial_velocity)(x))?;
    let recurrence = match problem.history_mode {
        HistoryMode::Direct => None,
        HistoryMode::Recurrence => Some(ExpRecurrence::new(&problem.kernel, sys.n_free())?),
    };
    let mut state = SolverState {
        sys,
        n: 0,
        u1: u1.clone(),
        u2,
        history: match problem.history_mode {
            HistoryMode::Direct => vec![u1],
            HistoryMode::Recurrence => Vec::new(),
        },
        recurrence,
        energy: Vec::new(),
        cached_factor: None,
    };
    state.energy.push(state.energy());
    Ok(state)
}

#[cfg(debug_assertions)]
fn debug_check_spd(a: &crate::fem1d::SymTridiag, seed: u64) {
    // cheap deterministic xorshift vectors; an indefinite step matrix cannot
    // occur while kappa < 1, so this only guards kernel misuse
    let mut s = seed | 1;
    for _ in 0..2 {
        let x: Vec<f64> = (0..a.dim())
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s % 2000) as f64 / 1000.0 - 1.0
            })
            .collect();
        if x.iter().any(|v| *v != 0.0) {
            debug_assert!(
                a.quadratic_form(&x) > 0.0,
                "step matrix lost positive definiteness"
            );
        }
    }
}

/// Advance the state through slab I_{n+1}.
pub fn step(state: &mut SolverState, problem: &Problem) -> Result<()> {
    let n = state.n + 1;
    let grid = &problem.grid;
    if n > grid.n_steps() {
        return Err(Error::InvalidState(format!(
            "cannot step past the final time level {}",
            grid.n_steps()
        )));
    }
    let with_step = |e: Error| Error::Numeric(format!("step {n} failed: {e}"));
    let k = grid.step(n);
    let (wp_nn, wm_nn) = weight_pair(&problem.kernel, grid, n, n).map_err(with_step)?;

    let hist = match problem.history_mode {
        HistoryMode::Direct => {
            let w = weights(&problem.kernel, grid, n).map_err(with_step)?;
            history_sum(state.sys.stiffness(), &state.history, &w, n).map_err(with_step)?
        }
        HistoryMode::Recurrence => state
            .recurrence
            .as_ref()
            .expect("recurrence state exists in recurrence mode")
            .history_sum(state.sys.stiffness(), grid, n),
    };

    let b = load_vector(
        &state.sys,
        |x, t| (problem.load)(x, t),
        grid.time(n - 1),
        grid.time(n),
    )
    .map_err(with_step)?;

    let m_u2 = state.sys.mass().apply(&state.u2);
    let s_u1 = state.sys.stiffness().apply(&state.u1);
    let s_u2 = state.sys.stiffness().apply(&state.u2);
    let half = 0.5 * k;
    let a_coeff = half * (half - wm_nn);
    let c1 = wp_nn + wm_nn - k;
    let rhs: Vec<f64> = (0..state.u2.len())
        .map(|i| m_u2[i] + c1 * s_u1[i] - a_coeff * s_u2[i] + hist[i] + b[i])
        .collect();

    let reuse = matches!(&state.cached_factor, Some((kc, _)) if *kc == k);
    if !reuse {
        let a = state
            .sys
            .mass()
            .linear_combination(1.0, state.sys.stiffness(), a_coeff);
        #[cfg(debug_assertions)]
        debug_check_spd(&a, n as u64);
        let factor = a.factorize().map_err(with_step)?;
        state.cached_factor = Some((k, factor));
    }
    let u2_new = state
        .cached_factor
        .as_ref()
        .expect("factor cached above")
        .1
        .solve(&rhs);
    if u2_new.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "step {n} produced non-finite velocity coefficients"
        )));
    }
    let u1_new: Vec<f64> = state
        .u1
        .iter()
        .zip(state.u2.iter().zip(&u2_new))
        .map(|(u1, (u2_old, u2))| u1 + half * (u2_old + u2))
        .collect();

    match problem.history_mode {
        HistoryMode::Direct => state.history.push(u1_new.clone()),
        HistoryMode::Recurrence => {
            let u_prev = std::mem::take(&mut state.u1);
            state
                .recurrence
                .as_mut()
                .expect("recurrence state exists")
                .update(grid, n, &u_prev, &u1_new);
        }
    }
    state.u1 = u1_new;
    state.u2 = u2_new;
    state.n = n;
    state.energy.push(state.energy());
    Ok(())
}

/// Output of a full run: probe time series, the final state and energy log.
pub struct RunOutput {
    pub times: Vec<f64>,
    /// `probe_values[level][p]` = U₁(x_p, t_level) by linear interpolation.
    pub probe_values: Vec<Vec<f64>>,
    pub state: SolverState,
}

impl RunOutput {
    pub fn energy_log(&self) -> &[f64] {
        self.state.energy_log()
    }
}

/// Execute init plus all N steps.
pub fn run(problem: &Problem) -> Result<RunOutput> {
    let mut state = init(problem)?;
    let mut probe_values = Vec::with_capacity(problem.grid.n_steps() + 1);
    let sample = |state: &SolverState| -> Vec<f64> {
        let full = state.sys.full_values(&state.u1);
        problem
            .probes
            .iter()
            .map(|&x| problem.mesh.interpolate(&full, x))
            .collect()
    };
    probe_values.push(sample(&state));
    for _ in 0..problem.grid.n_steps() {
        step(&mut state, problem)?;
        probe_values.push(sample(&state));
    }
    Ok(RunOutput {
        times: problem.grid.times().to_vec(),
        probe_values,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem1d::{error_norms, norms};
    use crate::oracle::{modal_solve, ModalConfig};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn standing_wave_problem(n_elems: usize, n_steps: usize, kernel: KernelSpec) -> Problem {
        Problem {
            kernel,
            mesh: Mesh1D::uniform(1.0, n_elems).unwrap(),
            bc: BcSpec::dirichlet_dirichlet(),
            grid: TimeGrid::uniform(1.0, n_steps).unwrap(),
            initial_displacement: Arc::new(|x| (PI * x).sin()),
            initial_velocity: zero_space_fn(),
            load: zero_load(),
            probes: vec![0.5],
            history_mode: HistoryMode::Direct,
        }
    }

    #[test]
    fn init_projects_initial_data() {
        // zero data stays zero
        let mut p = standing_wave_problem(8, 4, KernelSpec::zero());
        p.initial_displacement = zero_space_fn();
        let state = init(&p).unwrap();
        assert!(state.u1().iter().all(|v| *v == 0.0));
        assert!(state.u2().iter().all(|v| *v == 0.0));

        // data already in V_h reproduces its nodal values
        let mesh = Mesh1D::uniform(1.0, 8).unwrap();
        let nodal: Vec<f64> = mesh.nodes().iter().map(|&x| x * (1.0 - x)).collect();
        let mesh_for_closure = mesh.clone();
        let p = Problem {
            kernel: KernelSpec::zero(),
            mesh,
            bc: BcSpec::dirichlet_dirichlet(),
            grid: TimeGrid::uniform(1.0, 4).unwrap(),
            initial_displacement: Arc::new(move |x| mesh_for_closure.interpolate(&nodal, x)),
            initial_velocity: zero_space_fn(),
            load: zero_load(),
            probes: vec![],
            history_mode: HistoryMode::Direct,
        };
        let state = init(&p).unwrap();
        for i in 0..state.u1().len() {
            let x = state.system().mesh().nodes()[state.system().node_of_free(i)];
            assert!(
                (state.u1()[i] - x * (1.0 - x)).abs() < 1e-12,
                "projection of a V_h function must be its nodal values"
            );
        }
    }

    #[test]
    fn init_matches_l2_projection() {
        let p = standing_wave_problem(16, 4, KernelSpec::zero());
        let state = init(&p).unwrap();
        let sys = assemble(p.mesh.clone(), p.bc).unwrap();
        let proj = l2_project(&sys, |x| (PI * x).sin()).unwrap();
        for (a, b) in state.u1().iter().zip(&proj) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn undamped_step_conserves_energy() {
        let p = standing_wave_problem(32, 100, KernelSpec::zero());
        let mut state = init(&p).unwrap();
        let e0 = state.energy_log()[0];
        step(&mut state, &p).unwrap();
        let e1 = state.energy_log()[1];
        assert!(
            ((e1 - e0) / e0).abs() < 1e-12,
            "one-step relative energy drift {}",
            (e1 - e0) / e0
        );
    }

    #[test]
    fn undamped_long_run_energy_drift() {
        let mut p = standing_wave_problem(16, 1000, KernelSpec::zero());
        p.grid = TimeGrid::uniform(10.0, 1000).unwrap();
        let out = run(&p).unwrap();
        let e0 = out.energy_log()[0];
        let max_drift = out
            .energy_log()
            .iter()
            .map(|e| ((e - e0) / e0).abs())
            .fold(0.0, f64::max);
        assert!(max_drift <= 1e-8, "relative energy drift {max_drift} over 1000 steps");
    }

    #[test]
    fn zero_data_stays_zero_with_memory() {
        let mut p = standing_wave_problem(8, 5, KernelSpec::prony(&[(0.5, 1.0)]).unwrap());
        p.initial_displacement = zero_space_fn();
        let mut state = init(&p).unwrap();
        step(&mut state, &p).unwrap();
        assert!(state.u1().iter().all(|v| *v == 0.0));
        assert!(state.u2().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn solution_is_linear_in_the_data() {
        let mut rng = StdRng::seed_from_u64(61);
        let coeffs: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let alpha = 1.7;
        let build = |scale: f64, coeffs: Vec<f64>| Problem {
            kernel: KernelSpec::prony(&[(0.5, 1.0)]).unwrap(),
            mesh: Mesh1D::uniform(1.0, 16).unwrap(),
            bc: BcSpec::dirichlet_dirichlet(),
            grid: TimeGrid::uniform(1.0, 20).unwrap(),
            initial_displacement: Arc::new(move |x| {
                scale
                    * coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, c)| c * ((k + 1) as f64 * PI * x).sin())
                        .sum::<f64>()
            }),
            initial_velocity: Arc::new(move |x| scale * (2.0 * PI * x).sin()),
            load: Arc::new(move |x, t| scale * (PI * x).sin() * (1.0 + t)),
            probes: vec![],
            history_mode: HistoryMode::Direct,
        };
        let base = run(&build(1.0, coeffs.clone())).unwrap();
        let scaled = run(&build(alpha, coeffs)).unwrap();
        for (u, v) in base.state.u1().iter().zip(scaled.state.u1()) {
            assert!(
                (alpha * u - v).abs() <= 1e-11,
                "final displacement not linear: {} vs {}",
                alpha * u,
                v
            );
        }
    }

    #[test]
    fn direct_and_recurrence_histories_agree() {
        let kernel = KernelSpec::prony(&[(0.3, 1.5), (0.1, 0.4)]).unwrap();
        let mut p = standing_wave_problem(16, 200, kernel);
        p.grid = TimeGrid::uniform(4.0, 200).unwrap();
        let direct = run(&p).unwrap();
        p.history_mode = HistoryMode::Recurrence;
        let rec = run(&p).unwrap();
        let mut max_diff = 0.0f64;
        for (u, v) in direct.state.u1().iter().zip(rec.state.u1()) {
            max_diff = max_diff.max((u - v).abs());
        }
        for (u, v) in direct.state.u2().iter().zip(rec.state.u2()) {
            max_diff = max_diff.max((u - v).abs());
        }
        assert!(max_diff <= 1e-10, "direct vs recurrence max nodal diff {max_diff}");
    }

    #[test]
    fn recurrence_mode_requires_prony_kernel() {
        let mut p = standing_wave_problem(8, 4, KernelSpec::gamma_type(0.4, 0.5, 1.0).unwrap());
        p.history_mode = HistoryMode::Recurrence;
        assert!(init(&p).is_err());
    }

    #[test]
    fn zero_step_run_reports_initial_data_only() {
        let mut p = standing_wave_problem(8, 1, KernelSpec::zero());
        p.grid = TimeGrid::from_times(vec![0.0]).unwrap();
        let out = run(&p).unwrap();
        assert_eq!(out.times.len(), 1);
        assert_eq!(out.probe_values.len(), 1);
        assert_eq!(out.energy_log().len(), 1);
    }

    #[test]
    fn history_length_tracks_step_count_in_direct_mode() {
        let p = standing_wave_problem(8, 6, KernelSpec::prony(&[(0.5, 1.0)]).unwrap());
        let mut state = init(&p).unwrap();
        for n in 1..=6 {
            step(&mut state, &p).unwrap();
            assert_eq!(state.history.len(), n + 1, "one vector per level, no jumps");
        }
        assert!(step(&mut state, &p).is_err(), "stepping past T must fail");
    }

    #[test]
    fn fine_run_matches_modal_oracle() {
        // κ = 0.5 exponential kernel, single-mode data, moderate resolution
        let kernel = KernelSpec::prony(&[(0.5, 1.0)]).unwrap();
        let p = Problem {
            kernel: kernel.clone(),
            mesh: Mesh1D::uniform(1.0, 64).unwrap(),
            bc: BcSpec::dirichlet_dirichlet(),
            grid: TimeGrid::uniform(1.0, 128).unwrap(),
            initial_displacement: Arc::new(|x| (PI * x).sin()),
            initial_velocity: zero_space_fn(),
            load: zero_load(),
            probes: vec![],
            history_mode: HistoryMode::Direct,
        };
        let out = run(&p).unwrap();
        let modal = modal_solve(&ModalConfig {
            n_modes: 1,
            dt_fine: 1.0 / 4096.0,
            kernel,
            domain_length: 1.0,
            horizon: 1.0,
            initial_displacement: vec![1.0],
            initial_velocity: vec![0.0],
            modal_load: None,
        })
        .unwrap();
        let end = modal.final_index();
        let diff = error_norms(
            out.state.system(),
            out.state.u1(),
            |x| modal.eval(x, end),
            |x| modal.eval_dx(x, end),
        )
        .unwrap();
        // both discretizations are second order; at h=1/64, k=1/128 the gap
        // must already be small
        assert!(diff.l2 <= 2e-3, "solver vs modal oracle L2 gap {}", diff.l2);
        let scale = norms(out.state.system(), out.state.u1()).unwrap().l2;
        assert!(scale > 0.1, "solution did not vanish (sanity)");
    }
}
