//! Asymptotic reconstruction error of the tessellated lossy scheme.

use serde::Serialize;

use super::law::MpLaw;
use crate::error::{Result, TessError};
use crate::model::SchemeParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ErrorPrediction {
    pub lambda: f64,
    /// Target CDF level `1 - T gamma N / K`.
    pub level: f64,
    /// Truncation point solving `F(t) = level`.
    pub t: f64,
    /// `Phi(t, lower)`.
    pub phi: f64,
    /// Predicted mean of `||DE - F||_F^2 / (KL)`.
    pub epsilon_predicted: f64,
    /// Set when `level` falls below the atom at zero.
    pub below_atom: bool,
}

impl ErrorPrediction {
    fn at_level(law: MpLaw, level: f64) -> Result<Self> {
        let q = law.cdf_inv(level)?;
        let phi = law.incomplete_first_moment(q.x, law.lower).value;
        Ok(Self {
            lambda: law.lambda,
            level,
            t: q.x,
            phi,
            epsilon_predicted: phi,
            below_atom: q.below_atom,
        })
    }
}

/// Prediction for `params` with `servers` servers. Requires `Delta | K`,
/// `Gamma | L` and `N T Gamma <= K L`.
pub fn predicted_error(params: &SchemeParams, servers: usize) -> Result<ErrorPrediction> {
    params.check_budgets()?;
    if !params.divisible() {
        return Err(TessError::OutsideRegime(
            "prediction needs Delta | K and Gamma | L".into(),
        ));
    }
    let kl = (params.users * params.subfunctions) as u128;
    let used = servers as u128 * params.shots as u128 * params.comp_budget as u128;
    if used > kl {
        return Err(TessError::OutsideRegime(format!(
            "N T Gamma = {used} exceeds K L = {kl}"
        )));
    }
    let law = MpLaw::new(params.comm_budget as f64 / params.comp_budget as f64)?;
    ErrorPrediction::at_level(law, (kl - used) as f64 / kl as f64)
}

/// Prediction from normalized budgets `delta`, `gamma`, aspect `kappa` and
/// the operating rate expressed as a multiple of capacity, `R / C`, with
/// `C = T max(delta kappa, gamma)`.
pub fn predicted_error_normalized(
    delta: f64,
    gamma: f64,
    kappa: f64,
    shots: usize,
    rate_over_capacity: f64,
) -> Result<ErrorPrediction> {
    for (name, v) in [("delta", delta), ("gamma", gamma), ("kappa", kappa)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(TessError::InvalidParams(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    if shots == 0 {
        return Err(TessError::InvalidParams("T must be positive".into()));
    }
    let t = shots as f64;
    let capacity = t * (delta * kappa).max(gamma);
    let rate = rate_over_capacity * capacity;
    let level = 1.0 - t * gamma / rate;
    if !(0.0..=1.0).contains(&level) {
        return Err(TessError::OutsideRegime(format!(
            "rate R/C = {rate_over_capacity} gives CDF level {level} outside [0, 1]"
        )));
    }
    ErrorPrediction::at_level(MpLaw::new(delta * kappa / gamma)?, level)
}

/// Expected `sum_{i>q} sigma_i^2` for a `Delta x Gamma` tile of i.i.d.
/// unit-variance entries.
pub fn tile_error_expectation(comm_budget: usize, comp_budget: usize, rank: usize) -> Result<f64> {
    if comm_budget == 0 || comp_budget == 0 {
        return Err(TessError::InvalidParams(
            "tile sides must be positive".into(),
        ));
    }
    let max = comm_budget.min(comp_budget);
    if rank > max {
        return Err(TessError::RankOutOfRange { rank, max });
    }
    let law = MpLaw::new(comm_budget as f64 / comp_budget as f64)?;
    let q = law.cdf_inv(1.0 - rank as f64 / comm_budget as f64)?;
    let phi = law.incomplete_first_moment(q.x, law.lower).value;
    Ok((comm_budget * comp_budget) as f64 * phi)
}
