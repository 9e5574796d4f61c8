use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use viscowave::cli::{
    cmd_check_kernel, cmd_converge, cmd_demo_damping, cmd_dump_weights, cmd_oracle_compare,
    Config, SweepAxis, SweepReference,
};

/// Solver and experiment harness for wave equations with viscoelastic
/// memory kernels (cG(1)cG(1) space-time finite elements).
#[derive(Parser)]
#[command(name = "viscowave", version, about)]
struct Cli {
    /// Config file (key = value sections); built-in demo defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed for randomized diagnostics.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the damping demo and write probe/energy CSVs.
    DemoDamping,
    /// Convergence sweep with halved h or k per level.
    Converge {
        #[arg(long, value_parser = parse_axis)]
        axis: Option<SweepAxis>,
        #[arg(long)]
        levels: Option<usize>,
        /// Error reference: manufactured | fine-grid.
        #[arg(long = "case", value_parser = parse_reference)]
        reference: Option<SweepReference>,
    },
    /// Kernel diagnostics: kappa, xi samples, monotonicity, positive type.
    CheckKernel,
    /// Compare the solver against the modal reference solution.
    OracleCompare,
    /// Dump the convolution weight table of one step.
    DumpWeights {
        /// Step index n (defaults to the final step N).
        #[arg(long)]
        step: Option<usize>,
    },
}

fn parse_axis(v: &str) -> Result<SweepAxis, String> {
    SweepAxis::parse(v).map_err(|e| e.to_string())
}

fn parse_reference(v: &str) -> Result<SweepReference, String> {
    SweepReference::parse(v).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> viscowave::Result<()> {
    let config = match &cli.config {
        Some(path) => Config::load_file(path)?,
        None => Config::demo_defaults(),
    };
    let out = Some(cli.out.as_path());
    match &cli.command {
        Command::DemoDamping => {
            let demo = cmd_demo_damping(&config, out)?;
            println!(
                "damping demo: {} levels, probes at {:?}",
                demo.times.len(),
                demo.probe_xs
            );
            for path in &demo.written {
                println!("wrote {}", path.display());
            }
        }
        Command::Converge { axis, levels, reference } => {
            let sweep = config.sweep;
            let axis = axis
                .or(sweep.map(|s| s.axis))
                .unwrap_or(SweepAxis::H);
            let levels = levels.or(sweep.map(|s| s.levels)).unwrap_or(5);
            let reference = reference
                .or(sweep.map(|s| s.reference))
                .unwrap_or(SweepReference::Manufactured);
            let table = cmd_converge(&config, axis, levels, reference, out)?;
            println!(
                "{:>5} {:>12} {:>12} {:>13} {:>13} {:>13} {:>8} {:>8} {:>8}  status",
                "level", "h", "k", "e_l2(u)", "e_h1(u)", "e_l2(v)", "eoc_l2", "eoc_h1", "eoc_v"
            );
            for r in &table.rows {
                let opt = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_default();
                println!(
                    "{:>5} {:>12.4e} {:>12.4e} {:>13.5e} {:>13.5e} {:>13.5e} {:>8} {:>8} {:>8}  {}",
                    r.level,
                    r.h,
                    r.k,
                    r.e_l2_displacement,
                    r.e_h1_displacement,
                    r.e_l2_velocity,
                    opt(r.eoc_l2_displacement),
                    opt(r.eoc_h1_displacement),
                    opt(r.eoc_l2_velocity),
                    r.status
                );
            }
        }
        Command::CheckKernel => {
            let report = cmd_check_kernel(&config, cli.seed)?;
            println!("kappa = {}", report.kappa);
            for (t, xi) in &report.xi_samples {
                println!("xi({t}) = {xi}");
            }
            println!(
                "kernel nonnegative: {}, nonincreasing: {}",
                report.shape.nonnegative, report.shape.nonincreasing
            );
            println!(
                "min positive-type residual over 20 random test functions: {:e}",
                report.min_positive_type_residual
            );
            if !report.pass {
                return Err(viscowave::Error::InvalidArgument(
                    "kernel diagnostics failed".into(),
                ));
            }
            println!("all kernel checks passed");
        }
        Command::OracleCompare => {
            let report = cmd_oracle_compare(&config, out)?;
            println!(
                "solver vs modal oracle at T (h = {:.4e}, k = {:.4e}, dt_fine = {:.4e}):",
                report.h, report.k, report.dt_fine
            );
            println!("  l2 diff         = {:e}", report.l2_diff);
            println!("  h1 diff         = {:e}", report.h1_diff);
            println!("  max probe diff  = {:e}", report.max_probe_diff);
        }
        Command::DumpWeights { step } => {
            let table = cmd_dump_weights(&config, *step, out)?;
            println!("weights for step n = {}", table.n);
            print!("{}", table.to_csv());
        }
    }
    Ok(())
}
