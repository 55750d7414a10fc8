//! On-disk description of a factorized scheme. File names are relative to
//! the descriptor's directory.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use tessfact_core::factorization::support_masks;
use tessfact_core::{DemandMatrix, FactorPair, SchemeParams, TessError, TileReport};

use crate::error::{CliError, CliResult};
use crate::io::read_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Lossless,
    Lossy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeFiles {
    pub d: String,
    pub e: String,
    pub f: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeDescriptor {
    pub params: SchemeParams,
    pub mode: Mode,
    pub tiles: Vec<TileReport>,
    pub files: SchemeFiles,
}

pub struct LoadedScheme {
    pub descriptor: SchemeDescriptor,
    pub demand: DemandMatrix,
    pub pair: FactorPair,
}

fn shape_error(path: &Path, expected: String, found: (usize, usize)) -> CliError {
    CliError::in_file(path)(TessError::ShapeMismatch {
        context: "scheme file",
        expected,
        found: format!("{}x{}", found.0, found.1),
    })
}

impl SchemeDescriptor {
    pub fn load(path: &Path) -> CliResult<LoadedScheme> {
        let text = fs::read_to_string(path).map_err(|e| CliError::in_file(path)(e.into()))?;
        let descriptor: SchemeDescriptor =
            serde_json::from_str(&text).map_err(|e| CliError::Json {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        let p = descriptor.params;
        p.check_budgets().map_err(CliError::in_file(path))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let resolve = |name: &str| -> PathBuf { dir.join(name) };

        let (fp, dp, ep) = (
            resolve(&descriptor.files.f),
            resolve(&descriptor.files.d),
            resolve(&descriptor.files.e),
        );
        let f = read_matrix(&fp)?;
        let d = read_matrix(&dp)?;
        let e = read_matrix(&ep)?;
        let slots = p.shot_slots();
        if f.shape() != (p.users, p.subfunctions) {
            return Err(shape_error(
                &fp,
                format!("{}x{}", p.users, p.subfunctions),
                f.shape(),
            ));
        }
        if d.shape() != (p.users, slots) {
            return Err(shape_error(&dp, format!("{}x{slots}", p.users), d.shape()));
        }
        if e.shape() != (slots, p.subfunctions) {
            return Err(shape_error(
                &ep,
                format!("{slots}x{}", p.subfunctions),
                e.shape(),
            ));
        }
        let (ds, es) = support_masks(&p, &descriptor.tiles).map_err(CliError::in_file(path))?;
        let pair = FactorPair::new(d, e, ds, es, p.shots).map_err(CliError::in_file(path))?;
        let demand = DemandMatrix::new(f).map_err(CliError::in_file(&fp))?;
        Ok(LoadedScheme {
            descriptor,
            demand,
            pair,
        })
    }
}
