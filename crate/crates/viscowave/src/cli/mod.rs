//! Config parsing, experiment drivers and CSV emission behind the CLI.

mod commands;
mod config;
mod report;

pub use commands::{
    cmd_check_kernel, cmd_converge, cmd_demo_damping, cmd_dump_weights, cmd_oracle_compare,
    manufactured_problem, manufactured_sweep_h, manufactured_sweep_k, ConvergenceRow,
    ConvergenceTable, DemoOutput, KernelReport, OracleCompareReport, WeightTable,
};
pub use config::{
    BcKind, Config, KernelSection, ProblemSection, RunSection, SweepAxis, SweepReference,
    SweepSection,
};
pub use report::{eoc, find_peaks, fmt_g17, write_csv};
