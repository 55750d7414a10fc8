use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::Path;

use serde::Serialize;
use tessfact_core::{Matrix, TessError};

use crate::error::{CliError, CliResult};

pub fn read_matrix(path: &Path) -> CliResult<Matrix> {
    let file = File::open(path).map_err(|e| CliError::in_file(path)(e.into()))?;
    Matrix::read_csv(BufReader::new(file)).map_err(CliError::in_file(path))
}

pub fn write_matrix(path: &Path, m: &Matrix) -> CliResult<()> {
    write_text(Some(path), &m.to_csv_string())
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Core(TessError::InvalidParams(e.to_string())))?;
    s.push('\n');
    Ok(s)
}

/// Writes to `path`, or to stdout when no path is given.
pub fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::in_file(p)(e.into())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Core(e.into()))
        }
    }
}
