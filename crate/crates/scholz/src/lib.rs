//! Persistent unit cache, graph text format, verification sweeps and
//! record output on top of [`scholz_core`].

pub mod cache;
pub mod checks;
pub mod graph_text;
pub mod records;
pub mod symbols;

pub use cache::UnitCache;
pub use checks::{Check, SweepConfig};
pub use records::{Format, Record, Summary, Verdict};

/// Errors of the IO layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] scholz_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
