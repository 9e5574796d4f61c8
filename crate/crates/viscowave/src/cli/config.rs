//! Line-oriented `key = value` config files with `[problem]`, `[kernel]`,
//! `[run]` and `[sweep]` sections. Unknown sections or keys are rejected, all
//! physical values must be finite, and the κ < 1 kernel constraint is
//! validated at parse time.

use crate::fem1d::{BcSpec, BoundaryKind, Mesh1D};
use crate::kernel::KernelSpec;
use crate::timestepper::{zero_load, zero_space_fn, HistoryMode, Problem};
use crate::{convolution::TimeGrid, Error, Result};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

impl BcKind {
    fn parse(v: &str) -> Result<Self> {
        match v {
            "dirichlet" => Ok(BcKind::Dirichlet),
            "neumann" => Ok(BcKind::Neumann),
            other => Err(Error::Config(format!(
                "boundary condition must be 'dirichlet' or 'neumann', got '{other}'"
            ))),
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            BcKind::Dirichlet => "dirichlet",
            BcKind::Neumann => "neumann",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSection {
    /// Domain length L.
    pub length: f64,
    /// Uniform element count; mutually exclusive with `nodes`.
    pub n_elems: Option<usize>,
    /// Explicit node list as an alternative to `n_elems`.
    pub nodes: Option<Vec<f64>>,
    /// Final time T.
    pub horizon: f64,
    pub n_steps: usize,
    pub bc_left: BcKind,
    pub bc_right: BcKind,
    /// Constant Neumann traction, applied at whichever side is Neumann.
    pub neumann_g: f64,
    pub probes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSection {
    Zero,
    /// Flat list c1, gamma1, c2, gamma2, …
    Prony { terms: Vec<f64> },
    Gamma { kappa: f64, alpha: f64, gamma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub history_mode: HistoryMode,
    pub out: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    H,
    K,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::H => "h",
            SweepAxis::K => "k",
        }
    }

    pub fn parse(v: &str) -> Result<Self> {
        match v {
            "h" => Ok(SweepAxis::H),
            "k" => Ok(SweepAxis::K),
            other => Err(Error::Config(format!("sweep axis must be 'h' or 'k', got '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepReference {
    Manufactured,
    FineGrid,
}

impl SweepReference {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepReference::Manufactured => "manufactured",
            SweepReference::FineGrid => "fine-grid",
        }
    }

    pub fn parse(v: &str) -> Result<Self> {
        match v {
            "manufactured" => Ok(SweepReference::Manufactured),
            "fine-grid" => Ok(SweepReference::FineGrid),
            other => Err(Error::Config(format!(
                "sweep reference must be 'manufactured' or 'fine-grid', got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub levels: usize,
    pub reference: SweepReference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub problem: ProblemSection,
    pub kernel: KernelSection,
    pub run: RunSection,
    pub sweep: Option<SweepSection>,
}

impl Config {
    /// Built-in defaults: the damping demo setup. Exponential kernel with
    /// κ = 0.5 and rate γ = 1, zero data, Dirichlet at x = 0, constant
    /// Neumann traction g = −1 at x = 1, T = 40, h = 1/64, k = 0.05.
    pub fn demo_defaults() -> Self {
        Config {
            problem: ProblemSection {
                length: 1.0,
                n_elems: Some(64),
                nodes: None,
                horizon: 40.0,
                n_steps: 800,
                bc_left: BcKind::Dirichlet,
                bc_right: BcKind::Neumann,
                neumann_g: -1.0,
                probes: vec![0.25, 0.5, 1.0],
            },
            kernel: KernelSection::Prony { terms: vec![0.5, 1.0] },
            run: RunSection { history_mode: HistoryMode::Direct, out: None },
            sweep: None,
        }
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::demo_defaults();
        let mut section = String::new();
        let mut saw_sweep = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                match section.as_str() {
                    "problem" | "kernel" | "run" => {}
                    "sweep" => {
                        saw_sweep = true;
                        cfg.sweep = Some(SweepSection {
                            axis: SweepAxis::H,
                            levels: 4,
                            reference: SweepReference::Manufactured,
                        });
                    }
                    other => {
                        return Err(Error::Config(format!(
                            "line {}: unknown section [{other}]",
                            lineno + 1
                        )))
                    }
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let ctx = |e: Error| Error::Config(format!("line {}: {e}", lineno + 1));
            match (section.as_str(), key) {
                ("problem", "L") => cfg.problem.length = parse_f64(key, value)?,
                ("problem", "n_elems") => {
                    cfg.problem.n_elems = Some(parse_usize(key, value)?);
                    cfg.problem.nodes = None;
                }
                ("problem", "nodes") => {
                    cfg.problem.nodes = Some(parse_f64_list(key, value)?);
                    cfg.problem.n_elems = None;
                }
                ("problem", "T") => cfg.problem.horizon = parse_f64(key, value)?,
                ("problem", "n_steps") => cfg.problem.n_steps = parse_usize(key, value)?,
                ("problem", "bc.left") => cfg.problem.bc_left = BcKind::parse(value).map_err(ctx)?,
                ("problem", "bc.right") => {
                    cfg.problem.bc_right = BcKind::parse(value).map_err(ctx)?
                }
                ("problem", "neumann.g") => cfg.problem.neumann_g = parse_f64(key, value)?,
                ("problem", "probes") => cfg.problem.probes = parse_f64_list(key, value)?,
                ("kernel", "type") => {
                    cfg.kernel = match value {
                        "zero" => KernelSection::Zero,
                        "prony" => KernelSection::Prony { terms: Vec::new() },
                        "gamma" => KernelSection::Gamma { kappa: 0.0, alpha: 0.5, gamma: 1.0 },
                        other => {
                            return Err(Error::Config(format!(
                                "line {}: kernel type must be zero|prony|gamma, got '{other}'",
                                lineno + 1
                            )))
                        }
                    }
                }
                ("kernel", "terms") => match &mut cfg.kernel {
                    KernelSection::Prony { terms } => *terms = parse_f64_list(key, value)?,
                    _ => {
                        return Err(Error::Config(format!(
                            "line {}: 'terms' is only valid for kernel type prony",
                            lineno + 1
                        )))
                    }
                },
                ("kernel", "kappa") => match &mut cfg.kernel {
                    KernelSection::Gamma { kappa, .. } => *kappa = parse_f64(key, value)?,
                    _ => {
                        return Err(Error::Config(format!(
                            "line {}: 'kappa' is only valid for kernel type gamma",
                            lineno + 1
                        )))
                    }
                },
                ("kernel", "alpha") => match &mut cfg.kernel {
                    KernelSection::Gamma { alpha, .. } => *alpha = parse_f64(key, value)?,
                    _ => {
                        return Err(Error::Config(format!(
                            "line {}: 'alpha' is only valid for kernel type gamma",
                            lineno + 1
                        )))
                    }
                },
                ("kernel", "gamma") => match &mut cfg.kernel {
                    KernelSection::Gamma { gamma, .. } => *gamma = parse_f64(key, value)?,
                    _ => {
                        return Err(Error::Config(format!(
                            "line {}: 'gamma' is only valid for kernel type gamma",
                            lineno + 1
                        )))
                    }
                },
                ("run", "history_mode") => {
                    cfg.run.history_mode = match value {
                        "direct" => HistoryMode::Direct,
                        "recurrence" => HistoryMode::Recurrence,
                        other => {
                            return Err(Error::Config(format!(
                                "line {}: history_mode must be direct|recurrence, got '{other}'",
                                lineno + 1
                            )))
                        }
                    }
                }
                ("run", "out") => cfg.run.out = Some(value.to_string()),
                ("sweep", "axis") => {
                    cfg.sweep.as_mut().unwrap().axis = SweepAxis::parse(value).map_err(ctx)?
                }
                ("sweep", "levels") => cfg.sweep.as_mut().unwrap().levels = parse_usize(key, value)?,
                ("sweep", "reference") => {
                    cfg.sweep.as_mut().unwrap().reference =
                        SweepReference::parse(value).map_err(ctx)?
                }
                (sec, key) => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key '{key}' in section [{sec}]",
                        lineno + 1
                    )))
                }
            }
        }
        let _ = saw_sweep;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let p = &self.problem;
        if !(p.length > 0.0) || !p.length.is_finite() {
            return Err(Error::Config(format!("L must be positive and finite, got {}", p.length)));
        }
        if !(p.horizon > 0.0) || !p.horizon.is_finite() {
            return Err(Error::Config(format!("T must be positive and finite, got {}", p.horizon)));
        }
        if p.n_steps == 0 {
            return Err(Error::Config("n_steps must be at least 1".into()));
        }
        if !p.neumann_g.is_finite() {
            return Err(Error::Config("neumann.g must be finite".into()));
        }
        if p.probes.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("probes must be finite".into()));
        }
        if let Some(nodes) = &p.nodes {
            if nodes.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("mesh nodes must be finite".into()));
            }
            let last = nodes.last().copied().unwrap_or(f64::NAN);
            if (last - p.length).abs() > 1e-12 * p.length.max(1.0) {
                return Err(Error::Config(format!(
                    "explicit nodes end at {last} but L = {}",
                    p.length
                )));
            }
        }
        if let Some(s) = &self.sweep {
            if s.levels < 3 {
                return Err(Error::Config(format!(
                    "sweep needs at least 3 levels, got {}",
                    s.levels
                )));
            }
        }
        // κ < 1 and the remaining kernel constraints
        self.kernel_spec()?;
        Ok(())
    }

    /// Build the kernel, enforcing the κ < 1 constraint.
    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        match &self.kernel {
            KernelSection::Zero => Ok(KernelSpec::zero()),
            KernelSection::Prony { terms } => {
                if terms.is_empty() || terms.len() % 2 != 0 {
                    return Err(Error::Config(format!(
                        "prony terms must be c1,gamma1,c2,gamma2,… pairs; got {} values",
                        terms.len()
                    )));
                }
                let pairs: Vec<(f64, f64)> =
                    terms.chunks(2).map(|c| (c[0], c[1])).collect();
                KernelSpec::prony(&pairs).map_err(|e| Error::Config(e.to_string()))
            }
            KernelSection::Gamma { kappa, alpha, gamma } => {
                KernelSpec::gamma_type(*kappa, *alpha, *gamma)
                    .map_err(|e| Error::Config(e.to_string()))
            }
        }
    }

    pub fn mesh(&self) -> Result<Mesh1D> {
        match (&self.problem.nodes, self.problem.n_elems) {
            (Some(nodes), _) => Mesh1D::from_nodes(nodes.clone()),
            (None, Some(n)) => Mesh1D::uniform(self.problem.length, n),
            (None, None) => Err(Error::Config("specify n_elems or nodes".into())),
        }
    }

    pub fn bc(&self) -> BcSpec {
        let make = |kind: BcKind| match kind {
            BcKind::Dirichlet => BoundaryKind::Dirichlet,
            BcKind::Neumann => BoundaryKind::Neumann { traction: self.problem.neumann_g },
        };
        BcSpec { left: make(self.problem.bc_left), right: make(self.problem.bc_right) }
    }

    /// Zero-data problem described by this config (the §-demo style runs:
    /// u⁰ = u¹ = 0, f = 0, forcing enters through the Neumann traction).
    pub fn build_problem(&self) -> Result<Problem> {
        let problem = Problem {
            kernel: self.kernel_spec()?,
            mesh: self.mesh()?,
            bc: self.bc(),
            grid: TimeGrid::uniform(self.problem.horizon, self.problem.n_steps)?,
            initial_displacement: zero_space_fn(),
            initial_velocity: zero_space_fn(),
            load: zero_load(),
            probes: self.problem.probes.clone(),
            history_mode: self.run.history_mode,
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Canonical text form; `parse(serialize(cfg)) == cfg`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let p = &self.problem;
        s.push_str("[problem]\n");
        let _ = writeln!(s, "L = {}", p.length);
        if let Some(nodes) = &p.nodes {
            let _ = writeln!(s, "nodes = {}", join_f64(nodes));
        } else if let Some(n) = p.n_elems {
            let _ = writeln!(s, "n_elems = {n}");
        }
        let _ = writeln!(s, "T = {}", p.horizon);
        let _ = writeln!(s, "n_steps = {}", p.n_steps);
        let _ = writeln!(s, "bc.left = {}", p.bc_left.as_str());
        let _ = writeln!(s, "bc.right = {}", p.bc_right.as_str());
        let _ = writeln!(s, "neumann.g = {}", p.neumann_g);
        let _ = writeln!(s, "probes = {}", join_f64(&p.probes));
        s.push_str("\n[kernel]\n");
        match &self.kernel {
            KernelSection::Zero => s.push_str("type = zero\n"),
            KernelSection::Prony { terms } => {
                s.push_str("type = prony\n");
                let _ = writeln!(s, "terms = {}", join_f64(terms));
            }
            KernelSection::Gamma { kappa, alpha, gamma } => {
                s.push_str("type = gamma\n");
                let _ = writeln!(s, "kappa = {kappa}");
                let _ = writeln!(s, "alpha = {alpha}");
                let _ = writeln!(s, "gamma = {gamma}");
            }
        }
        s.push_str("\n[run]\n");
        let _ = writeln!(
            s,
            "history_mode = {}",
            match self.run.history_mode {
                HistoryMode::Direct => "direct",
                HistoryMode::Recurrence => "recurrence",
            }
        );
        if let Some(out) = &self.run.out {
            let _ = writeln!(s, "out = {out}");
        }
        if let Some(sweep) = &self.sweep {
            s.push_str("\n[sweep]\n");
            let _ = writeln!(s, "axis = {}", sweep.axis.as_str());
            let _ = writeln!(s, "levels = {}", sweep.levels);
            let _ = writeln!(s, "reference = {}", sweep.reference.as_str());
        }
        s
    }

    pub fn load_file(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text)
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::Config(format!("key '{key}': '{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("key '{key}': value must be finite")));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::Config(format!("key '{key}': '{v}' is not a count")))
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|item| parse_f64(key, item.trim()))
        .collect()
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
