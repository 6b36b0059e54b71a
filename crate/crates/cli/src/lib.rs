//! Configuration-driven experiment runner and result writers.

pub mod config;
pub mod experiments;
pub mod table;
pub mod vtk;

use std::path::Path;

use anyhow::{Context, Result};

pub use config::ExperimentConfig;
pub use experiments::{run, Outputs};
pub use table::{CsvTable, Value};

/// Writes tables and texts into `dir`; fields only when `vtk` is set.
pub fn write_outputs(outputs: &Outputs, dir: &Path, vtk: bool) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, table) in &outputs.tables {
        table.write(&dir.join(name))?;
    }
    for (name, text) in &outputs.texts {
        std::fs::write(dir.join(name), text).with_context(|| format!("writing {name}"))?;
    }
    if vtk {
        for (name, field) in &outputs.fields {
            vtk::write_vtk(field, &dir.join(name))?;
        }
    }
    Ok(())
}

/// Runs `cfg` on a pool of `threads` workers (all cores when `None`).
pub fn run_with_threads(cfg: &ExperimentConfig, seed: Option<u64>, threads: Option<usize>) -> Result<Outputs> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building the thread pool")?;
    pool.install(|| run(cfg, seed))
}
