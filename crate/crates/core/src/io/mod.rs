//! Mesh generation and OBJ serialization, run configuration and the benchmark driver.

mod bench;
mod config;
mod obj;
mod sphere;

pub use bench::{
    orders_from_csv, run_benchmark, run_level, BenchmarkSummary, ErrorRow, LevelResult, OrderRow, RunError, StepRow,
};
pub use config::{parse_number, ConfigError, FieldName, HlRule, RunConfig};
pub use obj::{obj_string, parse_obj, read_obj, write_obj, ObjError};
pub use sphere::{gen_sphere, icosphere};
