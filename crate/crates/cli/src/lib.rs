//! Configuration, command dispatch and result serialization for the
//! `spinlink` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::path::{Path, PathBuf};

pub use config::{load_config, Command, Format, RunConfig, SweepConfig};
pub use error::{CliError, CliResult, ErrorKind};
pub use output::{write_table, Artifact, Field, Table};
pub use run::run_command;

/// `out.csv` with `f_target = 0.95` → `out_f0.95.csv`.
pub fn constraint_path(path: &Path, f_target: f64) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_f{f_target}.{}", ext.to_string_lossy()),
        None => format!("{stem}_f{f_target}"),
    };
    path.with_file_name(name)
}

/// Writes a command's artifact. A rate-vs-loss sweep written as CSV to a
/// file is split into one file per fidelity constraint.
pub fn emit(config: &RunConfig, command: Command, artifact: &Artifact) -> CliResult<Vec<PathBuf>> {
    let format = config.output.format;
    let path = config.output.path.as_deref();
    let split =
        command == Command::Sweep && format == Format::Csv && matches!(config.sweep, SweepConfig::RateVsLoss { .. });
    match (path, split) {
        (Some(p), true) => {
            let SweepConfig::RateVsLoss { constraints, .. } = &config.sweep else { unreachable!() };
            let mut written = Vec::new();
            for &f in constraints {
                let rows = artifact.table.rows.iter().filter(|r| r[0] == Field::Num(f)).cloned().collect();
                let part =
                    Artifact { table: Table { columns: artifact.table.columns.clone(), rows }, ..artifact.clone() };
                let target = constraint_path(p, f);
                write_table(&part, format, Some(&target))?;
                written.push(target);
            }
            Ok(written)
        }
        (p, _) => {
            write_table(artifact, format, p)?;
            Ok(p.map(Path::to_path_buf).into_iter().collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint_file_names() {
        assert_eq!(constraint_path(Path::new("a/rate.csv"), 0.95), PathBuf::from("a/rate_f0.95.csv"));
        assert_eq!(constraint_path(Path::new("rate"), 0.99), PathBuf::from("rate_f0.99"));
    }
}
