//! Experiment drivers behind the CLI subcommands. Each returns its results as
//! data so tests and the acceptance suite can reuse them, and writes CSV when
//! an output directory is given.

use super::config::{BcKind, Config, SweepAxis, SweepReference};
use super::report::{eoc, find_peaks, fmt_g17, write_csv};
use crate::convolution::{weights, TimeGrid};
use crate::fem1d::{error_norms, BcSpec, Mesh1D};
use crate::kernel::{check_kernel_shape, positive_type_residual, KernelShapeCheck};
use crate::oracle::{manufactured_case, modal_solve, ManufacturedCase, ModalConfig};
use crate::timestepper::{run, zero_load, HistoryMode, Problem, RunOutput};
use crate::{Error, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Result of the damping demo: probe series plus the emitted CSV text.
pub struct DemoOutput {
    pub probe_xs: Vec<f64>,
    pub times: Vec<f64>,
    /// `series[level][p]` = u(x_p, t_level).
    pub series: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    pub probes_csv: String,
    pub written: Vec<PathBuf>,
}

impl DemoOutput {
    /// Magnitudes of the strict local maxima of |u(x_p, ·)|.
    pub fn peak_magnitudes(&self, probe_index: usize) -> Vec<f64> {
        let signal: Vec<f64> = self.series.iter().map(|row| row[probe_index].abs()).collect();
        find_peaks(&signal).into_iter().map(|(_, v)| v).collect()
    }
}

/// Run the damping demo described by the config (defaults reproduce the
/// fixed-free bar pulled by a constant traction) and emit the probe CSV.
pub fn cmd_demo_damping(config: &Config, out_dir: Option<&Path>) -> Result<DemoOutput> {
    let problem = config.build_problem()?;
    let out = run(&problem)?;
    let mut csv = String::from("t");
    for p in &problem.probes {
        let _ = write!(csv, ",u_{p}");
    }
    csv.push('\n');
    for (i, t) in out.times.iter().enumerate() {
        csv.push_str(&fmt_g17(*t));
        for v in &out.probe_values[i] {
            csv.push(',');
            csv.push_str(&fmt_g17(*v));
        }
        csv.push('\n');
    }
    let mut energy_csv = String::from("t,energy\n");
    for (t, e) in out.times.iter().zip(out.energy_log()) {
        let _ = writeln!(energy_csv, "{},{}", fmt_g17(*t), fmt_g17(*e));
    }
    let mut written = Vec::new();
    if let Some(dir) = out_dir {
        written.push(write_csv(dir, "damping_probes.csv", &csv)?);
        written.push(write_csv(dir, "damping_energy.csv", &energy_csv)?);
    }
    Ok(DemoOutput {
        probe_xs: problem.probes.clone(),
        times: out.times,
        series: out.probe_values,
        energy: out.state.energy_log().to_vec(),
        probes_csv: csv,
        written,
    })
}

/// One row of a convergence sweep.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h: f64,
    pub k: f64,
    pub e_l2_displacement: f64,
    pub e_h1_displacement: f64,
    pub e_l2_velocity: f64,
    pub eoc_l2_displacement: Option<f64>,
    pub eoc_h1_displacement: Option<f64>,
    pub eoc_l2_velocity: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub axis: SweepAxis,
    pub reference: SweepReference,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "level,h,k,e_l2_displacement,e_h1_displacement,e_l2_velocity,\
             eoc_l2_displacement,eoc_h1_displacement,eoc_l2_velocity,status\n",
        );
        for r in &self.rows {
            let opt = |v: &Option<f64>| v.map(fmt_g17).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.level,
                fmt_g17(r.h),
                fmt_g17(r.k),
                fmt_g17(r.e_l2_displacement),
                fmt_g17(r.e_h1_displacement),
                fmt_g17(r.e_l2_velocity),
                opt(&r.eoc_l2_displacement),
                opt(&r.eoc_h1_displacement),
                opt(&r.eoc_l2_velocity),
                r.status
            );
        }
        s
    }

    /// EOC of the displacement L2 column between the last two rows.
    pub fn final_eoc_l2_displacement(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.eoc_l2_displacement)
    }
}

struct LevelErrors {
    h: f64,
    k: f64,
    l2: f64,
    h1: f64,
    v_l2: f64,
}

fn finish_table(
    axis: SweepAxis,
    reference: SweepReference,
    levels: Vec<LevelErrors>,
) -> ConvergenceTable {
    let mut rows = Vec::with_capacity(levels.len());
    for (i, e) in levels.iter().enumerate() {
        let prev = if i > 0 { Some(&levels[i - 1]) } else { None };
        let monotone = prev.is_none_or(|p| {
            e.l2 <= p.l2 && e.h1 <= p.h1 && e.v_l2 <= p.v_l2
        });
        rows.push(ConvergenceRow {
            level: i,
            h: e.h,
            k: e.k,
            e_l2_displacement: e.l2,
            e_h1_displacement: e.h1,
            e_l2_velocity: e.v_l2,
            eoc_l2_displacement: prev.map(|p| eoc(p.l2, e.l2)),
            eoc_h1_displacement: prev.map(|p| eoc(p.h1, e.h1)),
            eoc_l2_velocity: prev.map(|p| eoc(p.v_l2, e.v_l2)),
            status: if monotone { "ok".into() } else { "non-monotone".into() },
        });
    }
    ConvergenceTable { axis, reference, rows }
}

/// Problem for a manufactured verification run at given resolution.
pub fn manufactured_problem(
    case: &ManufacturedCase,
    n_elems: usize,
    n_steps: usize,
) -> Result<Problem> {
    let exact = case.exact.clone();
    let velocity = case.exact_velocity.clone();
    Ok(Problem {
        kernel: case.kernel.clone(),
        mesh: Mesh1D::uniform(case.domain_length, n_elems)?,
        bc: BcSpec::dirichlet_dirichlet(),
        grid: TimeGrid::uniform(case.horizon, n_steps)?,
        initial_displacement: Arc::new(move |x| exact(x, 0.0)),
        initial_velocity: Arc::new(move |x| velocity(x, 0.0)),
        load: case.load.clone(),
        probes: vec![],
        history_mode: HistoryMode::Direct,
    })
}

fn manufactured_level_errors(
    case: &ManufacturedCase,
    n_elems: usize,
    n_steps: usize,
) -> Result<LevelErrors> {
    let problem = manufactured_problem(case, n_elems, n_steps)?;
    let out = run(&problem)?;
    let t_end = case.horizon;
    let disp = error_norms(
        out.state.system(),
        out.state.u1(),
        |x| (case.exact)(x, t_end),
        |x| (case.exact_dx)(x, t_end),
    )?;
    let velo = error_norms(
        out.state.system(),
        out.state.u2(),
        |x| (case.exact_velocity)(x, t_end),
        |x| (case.exact_velocity_dx)(x, t_end),
    )?;
    Ok(LevelErrors {
        h: problem.mesh.h_max(),
        k: problem.grid.max_step(),
        l2: disp.l2,
        h1: disp.h1,
        v_l2: velo.l2,
    })
}

/// Spatial sweep against the manufactured solution: h halves from 1/8 while
/// k = 1/512 stays fixed, matching the finest reported mesh scale.
pub fn manufactured_sweep_h(levels: usize) -> Result<ConvergenceTable> {
    let case = manufactured_case("sinpi-t2")?;
    let mut rows = Vec::new();
    for i in 0..levels {
        rows.push(manufactured_level_errors(&case, 8 << i, 512)?);
    }
    Ok(finish_table(SweepAxis::H, SweepReference::Manufactured, rows))
}

/// Temporal sweep against the manufactured solution: k halves from 1/8 while
/// h = 1/256 stays fixed.
pub fn manufactured_sweep_k(levels: usize) -> Result<ConvergenceTable> {
    let case = manufactured_case("sinpi-t2")?;
    let mut rows = Vec::new();
    for i in 0..levels {
        rows.push(manufactured_level_errors(&case, 256, 8 << i)?);
    }
    Ok(finish_table(SweepAxis::K, SweepReference::Manufactured, rows))
}

fn fine_grid_sweep(config: &Config, axis: SweepAxis, levels: usize) -> Result<ConvergenceTable> {
    // solve levels 0..=levels of the configured zero-data problem; level i is
    // measured against the one-level-finer solution
    let base_elems = config.mesh()?.n_elems();
    let base_steps = config.problem.n_steps;
    let solve = |i: usize| -> Result<(RunOutput, Problem)> {
        let mut cfg = config.clone();
        match axis {
            SweepAxis::H => cfg.problem.n_elems = Some(base_elems << i),
            SweepAxis::K => cfg.problem.n_steps = base_steps << i,
        }
        if cfg.problem.nodes.is_some() {
            return Err(Error::Config(
                "fine-grid sweeps require a uniform mesh (n_elems), not an explicit node list"
                    .into(),
            ));
        }
        let problem = cfg.build_problem()?;
        Ok((run(&problem)?, problem))
    };
    let mut solutions = Vec::with_capacity(levels + 1);
    for i in 0..=levels {
        solutions.push(solve(i)?);
    }
    let mut rows = Vec::new();
    for i in 0..levels {
        let (coarse, problem) = &solutions[i];
        let (fine, fine_problem) = &solutions[i + 1];
        let ref_mesh = fine_problem.mesh.clone();
        let u1_ref = fine.state.system().full_values(fine.state.u1());
        let u2_ref = fine.state.system().full_values(fine.state.u2());
        let disp = error_norms(
            coarse.state.system(),
            coarse.state.u1(),
            |x| ref_mesh.interpolate(&u1_ref, x),
            |x| ref_mesh.interpolate_dx(&u1_ref, x),
        )?;
        let velo = error_norms(
            coarse.state.system(),
            coarse.state.u2(),
            |x| ref_mesh.interpolate(&u2_ref, x),
            |x| ref_mesh.interpolate_dx(&u2_ref, x),
        )?;
        rows.push(LevelErrors {
            h: problem.mesh.h_max(),
            k: problem.grid.max_step(),
            l2: disp.l2,
            h1: disp.h1,
            v_l2: velo.l2,
        });
    }
    Ok(finish_table(axis, SweepReference::FineGrid, rows))
}

/// Convergence sweep with halved h or k per level; errors against the
/// manufactured exact solution or a one-level-finer numerical reference.
pub fn cmd_converge(
    config: &Config,
    axis: SweepAxis,
    levels: usize,
    reference: SweepReference,
    out_dir: Option<&Path>,
) -> Result<ConvergenceTable> {
    if levels < 3 {
        return Err(Error::InvalidArgument(format!(
            "convergence sweep needs at least 3 levels, got {levels}"
        )));
    }
    let table = match (reference, axis) {
        (SweepReference::Manufactured, SweepAxis::H) => manufactured_sweep_h(levels)?,
        (SweepReference::Manufactured, SweepAxis::K) => manufactured_sweep_k(levels)?,
        (SweepReference::FineGrid, axis) => fine_grid_sweep(config, axis, levels)?,
    };
    if let Some(dir) = out_dir {
        let name = format!("convergence_{}.csv", table.axis.as_str());
        write_csv(dir, &name, &table.to_csv())?;
    }
    Ok(table)
}

/// Kernel diagnostics: κ, ξ samples, shape verdict, positive-type battery.
pub struct KernelReport {
    pub kappa: f64,
    pub xi_samples: Vec<(f64, f64)>,
    pub shape: KernelShapeCheck,
    pub min_positive_type_residual: f64,
    pub pass: bool,
}

/// Check κ < 1 (done at parse time), K ≥ 0 nonincreasing by sampling, and the
/// positive-type property of ξ against 20 random trigonometric polynomials.
pub fn cmd_check_kernel(config: &Config, seed: u64) -> Result<KernelReport> {
    let spec = config.kernel_spec()?;
    let kappa = spec.total_mass();
    let xi_samples: Vec<(f64, f64)> = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&t| (t, spec.xi(t)))
        .collect();
    let shape = check_kernel_shape(&spec, 100);
    let mut rng = StdRng::seed_from_u64(seed);
    let horizon = 4.0;
    let n = 201;
    let mut min_residual = f64::INFINITY;
    for _ in 0..20 {
        let coeffs: Vec<(f64, f64)> =
            (1..=5).map(|m| (rng.random_range(-1.0..1.0), m as f64)).collect();
        let phi: Vec<f64> = (0..n)
            .map(|i| {
                let t = horizon * i as f64 / (n - 1) as f64;
                coeffs.iter().map(|&(a, m)| a * (m * t).sin()).sum()
            })
            .collect();
        let r = positive_type_residual(|t| spec.xi(t), horizon, &phi, n)?;
        min_residual = min_residual.min(r);
    }
    let pass = shape.ok() && min_residual >= -1e-12;
    Ok(KernelReport {
        kappa,
        xi_samples,
        shape,
        min_positive_type_residual: min_residual,
        pass,
    })
}

/// Solver-vs-modal-oracle comparison on the configured kernel, mesh and grid
/// with single-mode initial data u⁰ = sin(πx/L), u¹ = 0, f = 0.
#[derive(Debug)]
pub struct OracleCompareReport {
    pub h: f64,
    pub k: f64,
    pub dt_fine: f64,
    pub l2_diff: f64,
    pub h1_diff: f64,
    pub max_probe_diff: f64,
}

impl OracleCompareReport {
    pub fn to_csv(&self) -> String {
        format!(
            "h,k,dt_fine,l2_diff,h1_diff,max_probe_diff\n{},{},{},{},{},{}\n",
            fmt_g17(self.h),
            fmt_g17(self.k),
            fmt_g17(self.dt_fine),
            fmt_g17(self.l2_diff),
            fmt_g17(self.h1_diff),
            fmt_g17(self.max_probe_diff),
        )
    }
}

pub fn cmd_oracle_compare(config: &Config, out_dir: Option<&Path>) -> Result<OracleCompareReport> {
    if config.problem.bc_left != BcKind::Dirichlet || config.problem.bc_right != BcKind::Dirichlet {
        return Err(Error::Unsupported(
            "the modal oracle handles Dirichlet-Dirichlet boundaries only; \
             set bc.left = bc.right = dirichlet"
                .into(),
        ));
    }
    let mut problem = config.build_problem()?;
    let length = problem.mesh.length();
    problem.initial_displacement =
        Arc::new(move |x| (std::f64::consts::PI * x / length).sin());
    problem.load = zero_load();
    let out = run(&problem)?;

    // oracle budget: dt_fine well below both discretization scales, so the
    // oracle error stays an order of magnitude under the gap being measured
    let h = problem.mesh.h_max();
    let k = problem.grid.max_step();
    let dt_fine = (h.min(k)) / 8.0;
    let modal = modal_solve(&ModalConfig {
        n_modes: 1,
        dt_fine,
        kernel: problem.kernel.clone(),
        domain_length: length,
        horizon: problem.grid.horizon(),
        initial_displacement: vec![1.0],
        initial_velocity: vec![0.0],
        modal_load: None,
    })?;
    let end = modal.final_index();
    let diff = error_norms(
        out.state.system(),
        out.state.u1(),
        |x| modal.eval(x, end),
        |x| modal.eval_dx(x, end),
    )?;
    let full = out.state.system().full_values(out.state.u1());
    let max_probe_diff = problem
        .probes
        .iter()
        .map(|&x| (problem.mesh.interpolate(&full, x) - modal.eval(x, end)).abs())
        .fold(0.0, f64::max);
    let report = OracleCompareReport {
        h,
        k,
        dt_fine,
        l2_diff: diff.l2,
        h1_diff: diff.h1,
        max_probe_diff,
    };
    if let Some(dir) = out_dir {
        write_csv(dir, "oracle_compare.csv", &report.to_csv())?;
    }
    Ok(report)
}

/// Weight table ω±_{n,l} for one step, for debugging.
pub struct WeightTable {
    pub n: usize,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl WeightTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,omega_plus,omega_minus\n");
        for (i, (p, m)) in self.plus.iter().zip(&self.minus).enumerate() {
            let _ = writeln!(s, "{},{},{}", i + 1, fmt_g17(*p), fmt_g17(*m));
        }
        s
    }
}

pub fn cmd_dump_weights(
    config: &Config,
    step: Option<usize>,
    out_dir: Option<&Path>,
) -> Result<WeightTable> {
    let spec = config.kernel_spec()?;
    let grid = TimeGrid::uniform(config.problem.horizon, config.problem.n_steps)?;
    let n = step.unwrap_or(grid.n_steps());
    if !(1..=grid.n_steps()).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "step must be in 1..={}, got {n}",
            grid.n_steps()
        )));
    }
    let w = weights(&spec, &grid, n)?;
    let table = WeightTable { n, plus: w.plus, minus: w.minus };
    if let Some(dir) = out_dir {
        write_csv(dir, &format!("weights_step{n}.csv"), &table.to_csv())?;
    }
    Ok(table)
}
