//! Empirical reconstruction error of the lossy scheme over random demands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, TessError};
use crate::factorization::{extract_tile, factorize_lossy, rank_budget};
use crate::matrix::Matrix;
use crate::model::{DemandMatrix, SchemeParams};
use crate::svd::svd;
use crate::tessellation::build_tessellation;

/// Entry distribution of the random demand matrices. Both have zero mean and
/// unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    #[default]
    Gaussian,
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloConfig {
    pub trials: usize,
    pub seed: u64,
    pub ensemble: Ensemble,
    pub allow_dropped: bool,
}

impl MonteCarloConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            ensemble: Ensemble::Gaussian,
            allow_dropped: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MonteCarloResult {
    pub servers: usize,
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
    /// `||DE - F||_F^2 / (KL)` per trial, in trial order.
    pub per_trial: Vec<f64>,
}

impl MonteCarloResult {
    fn from_samples(servers: usize, seed: u64, per_trial: Vec<f64>) -> Self {
        let n = per_trial.len() as f64;
        let mean = per_trial.iter().sum::<f64>() / n;
        let std_error = if per_trial.len() > 1 {
            let var = per_trial.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self {
            servers,
            mean,
            std_error,
            trials: per_trial.len(),
            seed,
            per_trial,
        }
    }
}

/// Random `K x L` demand for one trial. Each trial uses its own ChaCha
/// stream, so results do not depend on scheduling.
pub fn sample_demand(
    params: &SchemeParams,
    ensemble: Ensemble,
    seed: u64,
    trial: u64,
) -> DemandMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let bound = 3f64.sqrt();
    let uniform = Uniform::new_inclusive(-bound, bound).expect("finite bounds");
    let m = Matrix::from_fn(params.users, params.subfunctions, |_, _| match ensemble {
        Ensemble::Gaussian => StandardNormal.sample(&mut rng),
        Ensemble::Uniform => rng.sample(uniform),
    });
    DemandMatrix::new(m).expect("samples are finite")
}

fn check(params: &SchemeParams, config: &MonteCarloConfig) -> Result<()> {
    params.check_budgets()?;
    if config.trials == 0 {
        return Err(TessError::InvalidParams("trials must be at least 1".into()));
    }
    Ok(())
}

/// Mean normalized error of `factorize_lossy` with `servers` servers.
pub fn monte_carlo(
    params: &SchemeParams,
    servers: usize,
    config: &MonteCarloConfig,
) -> Result<MonteCarloResult> {
    check(params, config)?;
    let kl = (params.users * params.subfunctions) as f64;
    let per_trial = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let f = sample_demand(params, config.ensemble, config.seed, trial);
            let out = factorize_lossy(&f, params, servers, config.allow_dropped)?;
            Ok(out.total_residual_sq() / kl)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloResult::from_samples(
        servers,
        config.seed,
        per_trial,
    ))
}

/// Same as calling [`monte_carlo`] once per server count, but each trial's
/// tile spectra are computed once and shared by all server counts. Results
/// are bit-identical to the single-count version.
pub fn monte_carlo_sweep(
    params: &SchemeParams,
    servers: &[usize],
    config: &MonteCarloConfig,
) -> Result<Vec<MonteCarloResult>> {
    check(params, config)?;
    if servers.contains(&0) {
        return Err(TessError::InvalidParams("N must be positive".into()));
    }
    let kl = (params.users * params.subfunctions) as f64;
    let plan = build_tessellation(params)?;
    let rows = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let f = sample_demand(params, config.ensemble, config.seed, trial);
            let spectra = plan
                .tiles
                .iter()
                .map(|t| Ok(svd(&extract_tile(&f, t)?)?.singular_values))
                .collect::<Result<Vec<_>>>()?;
            servers
                .iter()
                .map(|&n| {
                    let ranks = rank_budget(&plan, n, Some(&spectra), config.allow_dropped)?;
                    let total: f64 = spectra
                        .iter()
                        .zip(&ranks)
                        .map(|(s, &q)| s[q..].iter().map(|x| x * x).sum::<f64>())
                        .sum();
                    Ok(total / kl)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(servers
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let samples = rows.iter().map(|r| r[i]).collect();
            MonteCarloResult::from_samples(n, config.seed, samples)
        })
        .collect())
}
