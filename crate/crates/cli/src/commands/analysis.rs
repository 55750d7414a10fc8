use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use tessfact_core::mp::{monte_carlo_sweep, predicted_error, Ensemble, MonteCarloConfig, MpLaw};
use tessfact_core::TessError;

use crate::error::{CliError, CliResult};
use crate::io::{to_json, write_text};
use crate::params::ParamArgs;

#[derive(Debug, Args)]
pub struct MpArgs {
    /// Aspect ratio of the law
    #[arg(long)]
    pub lambda: f64,
    /// Density at these points
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub pdf: Vec<f64>,
    /// Distribution function at these points
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub cdf: Vec<f64>,
    /// Quantiles at these probabilities
    #[arg(long, value_delimiter = ',')]
    pub inv: Vec<f64>,
    /// Incomplete first moment up to these points
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub phi: Vec<f64>,
    /// Lower limit of the incomplete first moment (default: left edge)
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A single query prints a bare number; several print `query,arg,value` CSV.
pub fn run_mp(args: &MpArgs) -> CliResult<()> {
    let law = MpLaw::new(args.lambda)?;
    let from = args.from.unwrap_or(law.lower);
    let mut rows: Vec<(&str, f64, f64)> = Vec::new();
    rows.extend(args.pdf.iter().map(|&x| ("pdf", x, law.pdf(x))));
    rows.extend(args.cdf.iter().map(|&x| ("cdf", x, law.cdf(x))));
    for &p in &args.inv {
        rows.push(("inv", p, law.cdf_inv(p)?.x));
    }
    rows.extend(
        args.phi
            .iter()
            .map(|&t| ("phi", t, law.incomplete_first_moment(t, from).value)),
    );
    let text = match rows.as_slice() {
        [] => {
            return Err(CliError::Usage(
                "give at least one of --pdf, --cdf, --inv, --phi".into(),
            ))
        }
        [(_, _, v)] => format!("{v}\n"),
        many => {
            let mut s = String::from("query,arg,value\n");
            for (q, a, v) in many {
                let _ = writeln!(s, "{q},{a},{v}");
            }
            s
        }
    };
    write_text(args.out.as_deref(), &text)
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(short = 'N', long = "servers")]
    pub servers: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_predict(args: &PredictArgs) -> CliResult<()> {
    let p = args.params.resolve(args.servers)?;
    write_text(
        args.out.as_deref(),
        &to_json(&predicted_error(&p, args.servers)?)?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnsembleArg {
    Gaussian,
    Uniform,
}

impl From<EnsembleArg> for Ensemble {
    fn from(e: EnsembleArg) -> Self {
        match e {
            EnsembleArg::Gaussian => Ensemble::Gaussian,
            EnsembleArg::Uniform => Ensemble::Uniform,
        }
    }
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Server counts, repeated or comma separated
    #[arg(short = 'N', long = "servers", value_delimiter = ',', required = true)]
    pub servers: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = EnsembleArg::Gaussian)]
    pub ensemble: EnsembleArg,
    #[arg(long)]
    pub allow_dropped: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// CSV with columns `N,eps_pred,eps_emp,stderr,trials,seed`. `eps_pred` is
/// empty where the asymptotic prediction does not apply.
pub fn run_mc(args: &McArgs) -> CliResult<()> {
    let p = args.params.resolve(0)?;
    let config = MonteCarloConfig {
        trials: args.trials,
        seed: args.seed,
        ensemble: args.ensemble.into(),
        allow_dropped: args.allow_dropped,
    };
    let results = monte_carlo_sweep(&p, &args.servers, &config)?;
    let mut s = String::from("N,eps_pred,eps_emp,stderr,trials,seed\n");
    for r in &results {
        let pred = match predicted_error(&p, r.servers) {
            Ok(e) => e.epsilon_predicted.to_string(),
            Err(TessError::OutsideRegime(msg)) => {
                log::warn!("no prediction for N={}: {msg}", r.servers);
                String::new()
            }
            Err(e) => return Err(e.into()),
        };
        let _ = writeln!(
            s,
            "{},{pred},{},{},{},{}",
            r.servers, r.mean, r.std_error, r.trials, r.seed
        );
    }
    write_text(args.out.as_deref(), &s)
}
