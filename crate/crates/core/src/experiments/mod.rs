//! Reference studies: the single-configuration variance sweep, the four
//! reference cases, report files and a throughput benchmark.

pub mod bench;
pub mod cases;
pub mod output;
pub mod sweep;

pub use bench::{bench_scaling, time_generation, BenchPoint};
pub use cases::{builtin_case, builtin_cases, case_table, experiment1_config, CaseRow, NamedCase};
pub use output::{write_sweep_csv, write_sweep_json, write_sweep_outputs};
pub use sweep::{
    default_sigma2_grid, desk_sigma2_grid, run_sweep, CellRow, CellStatus, SpecError, SweepMode, SweepReport, SweepSpec,
};
