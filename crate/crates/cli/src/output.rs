//! Exit codes, tagged errors and atomic file output.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Input = 2,
    NonConvergence = 3,
    Validation = 4,
}

/// Error carrying its exit code and the module that raised it.
#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub module: &'static str,
    pub source: anyhow::Error,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {:#}", self.module, self.source)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn input_err<E: Into<anyhow::Error>>(module: &'static str) -> impl FnOnce(E) -> CliError {
    move |e| CliError { code: ExitCode::Input, module, source: e.into() }
}

pub fn fail(code: ExitCode, module: &'static str, msg: impl fmt::Display) -> CliError {
    CliError { code, module, source: anyhow::anyhow!("{msg}") }
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = input_err("io");
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let inner = || -> anyhow::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(path)?;
        Ok(())
    };
    inner().map_err(|e| io(e.context(format!("writing {}", path.display()))))
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report types serialize");
    out.push(b'\n');
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_atomic(path, &to_json(value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_creates_dirs() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b/out.json");
        write_json(&p, &vec![1, 2]).unwrap();
        write_json(&p, &vec![3]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "[\n  3\n]\n");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
