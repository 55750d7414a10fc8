use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use tessfact_core::protocol::mean_sampled_error;
use tessfact_core::{residual_error, run_end_to_end, SimulationReport, TessError};

use crate::error::{CliError, CliResult};
use crate::io::{read_matrix, to_json, write_text};
use crate::scheme::SchemeDescriptor;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// scheme.json written by `factorize`
    #[arg(long)]
    pub scheme: PathBuf,
    /// Input vector w as CSV, one row or one column of length L
    #[arg(long)]
    pub w: Option<PathBuf>,
    /// Also average errorE / (KL) over this many standard normal inputs
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct SampledError {
    samples: usize,
    seed: u64,
    mean_normalized_error: f64,
    /// `||DE - F||_F^2 / (KL)`, the limit of the sampled mean
    expected_normalized_error: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct Report {
    #[serde(flatten)]
    single: Option<SimulationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampled: Option<SampledError>,
}

fn read_vector(path: &PathBuf, len: usize) -> CliResult<Vec<f64>> {
    let m = read_matrix(path)?;
    let values = match m.shape() {
        (1, _) | (_, 1) => m.as_slice().to_vec(),
        (r, c) => {
            return Err(CliError::in_file(path)(TessError::ShapeMismatch {
                context: "input vector",
                expected: "a single row or column".into(),
                found: format!("{r}x{c}"),
            }))
        }
    };
    if values.len() != len {
        return Err(CliError::in_file(path)(TessError::ShapeMismatch {
            context: "input vector",
            expected: format!("length L = {len}"),
            found: format!("{}", values.len()),
        }));
    }
    Ok(values)
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    if args.w.is_none() && args.samples.is_none() {
        return Err(CliError::Usage("give --w, --samples, or both".into()));
    }
    let scheme = SchemeDescriptor::load(&args.scheme)?;
    let p = scheme.descriptor.params;
    let single = match &args.w {
        Some(path) => {
            let w = read_vector(path, p.subfunctions)?;
            Some(run_end_to_end(&scheme.demand, &w, &scheme.pair)?)
        }
        None => None,
    };
    let sampled = match args.samples {
        Some(samples) => {
            let kl = (p.users * p.subfunctions) as f64;
            Some(SampledError {
                samples,
                seed: args.seed,
                mean_normalized_error: mean_sampled_error(
                    &scheme.demand,
                    &scheme.pair,
                    samples,
                    args.seed,
                )?,
                expected_normalized_error: residual_error(&scheme.demand, &scheme.pair)? / kl,
            })
        }
        None => None,
    };
    write_text(args.out.as_deref(), &to_json(&Report { single, sampled })?)
}
