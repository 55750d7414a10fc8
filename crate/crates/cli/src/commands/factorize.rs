use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use tessfact_core::capacity::n_opt_upper;
use tessfact_core::protocol::measure_costs;
use tessfact_core::{
    factorize_lossless, factorize_lossy, residual_error, DemandMatrix, SchemeParams,
};

use crate::error::{CliError, CliResult};
use crate::io::{read_matrix, to_json, write_matrix, write_text};
use crate::params::ParamArgs;
use crate::scheme::{Mode, SchemeDescriptor, SchemeFiles};

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    /// Demand matrix F as CSV
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Number of servers N (0 picks a default)
    #[arg(short = 'N', long = "servers", default_value_t = 0)]
    pub servers: usize,
    #[arg(long, value_enum, default_value_t = Mode::Lossless)]
    pub mode: Mode,
    /// In lossy mode, zero out tiles that get no server instead of failing
    #[arg(long)]
    pub allow_dropped: bool,
    /// Output directory, created if missing
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct FactorizeReport {
    params: SchemeParams,
    mode: Mode,
    /// `||DE - F||_F^2`
    residual: f64,
    /// `residual / ||F||_F^2`, 0 for a zero demand
    relative_residual: f64,
    /// `residual / (KL)`
    normalized_residual: f64,
    servers_used: usize,
    gamma_measured: usize,
    delta_measured: usize,
    within_prediction_regime: bool,
    dropped_tiles: Vec<usize>,
}

/// Servers needed for a lossless run: the planner's count, raised so that
/// D and E have room for every rank.
fn default_lossless_servers(p: &SchemeParams) -> CliResult<usize> {
    Ok(n_opt_upper(p)?
        .max(p.users.div_ceil(p.shots))
        .max(p.subfunctions.div_ceil(p.shots)))
}

pub fn run(args: &FactorizeArgs) -> CliResult<()> {
    let f = read_matrix(&args.input)?;
    let params = args
        .params
        .resolve_with_shape(Some(f.shape()), args.servers)?;
    let f = DemandMatrix::new(f).map_err(CliError::in_file(&args.input))?;
    let out = match args.mode {
        Mode::Lossless => {
            let servers = match params.servers {
                0 => default_lossless_servers(&params)?,
                n => n,
            };
            factorize_lossless(&f, &params.with_servers(servers))?
        }
        Mode::Lossy => {
            if params.servers == 0 {
                return Err(CliError::Usage("lossy mode needs -N".into()));
            }
            factorize_lossy(&f, &params, params.servers, args.allow_dropped)?
        }
    };

    let residual = residual_error(&f, &out.pair)?;
    let norm_sq = f.matrix().frobenius_norm_sq();
    let (gamma_measured, delta_measured) = measure_costs(&out.pair);
    let p = out.plan.params;
    let report = FactorizeReport {
        params: p,
        mode: args.mode,
        residual,
        relative_residual: if norm_sq > 0.0 {
            residual / norm_sq
        } else {
            0.0
        },
        normalized_residual: residual / (p.users * p.subfunctions) as f64,
        servers_used: out.plan.servers_used(),
        gamma_measured,
        delta_measured,
        within_prediction_regime: out.within_prediction_regime,
        dropped_tiles: out.plan.dropped_tiles(),
    };
    let descriptor = SchemeDescriptor {
        params: p,
        mode: args.mode,
        tiles: out.tile_reports(),
        files: SchemeFiles {
            d: "D.csv".into(),
            e: "E.csv".into(),
            f: "F.csv".into(),
        },
    };

    fs::create_dir_all(&args.out).map_err(|e| CliError::in_file(&args.out)(e.into()))?;
    let dir = &args.out;
    write_matrix(&dir.join("D.csv"), &out.pair.d)?;
    write_matrix(&dir.join("E.csv"), &out.pair.e)?;
    write_matrix(&dir.join("F.csv"), f.matrix())?;
    write_text(Some(&dir.join("tiles.json")), &to_json(&descriptor.tiles)?)?;
    let report = to_json(&report)?;
    write_text(Some(&dir.join("report.json")), &report)?;
    write_text(Some(&dir.join("scheme.json")), &to_json(&descriptor)?)?;
    write_text(None, &report)
}
