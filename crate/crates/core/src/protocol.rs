//! Algebraic simulation of the master/server/user pipeline.
//!
//! Server `n` computes its subfunctions, sends `T` linear combinations
//! `z = E w`, and user `k` forms `F'_k = d_k^T z`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TessError};
use crate::matrix::Matrix;
use crate::model::{DemandMatrix, FactorPair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulationReport {
    pub z: Vec<f64>,
    pub f_true: Vec<f64>,
    pub f_decoded: Vec<f64>,
    pub error_e: f64,
    pub gamma_measured: usize,
    pub delta_measured: usize,
}

pub fn encode(e: &Matrix, w: &[f64]) -> Result<Vec<f64>> {
    e.matvec(w)
}

pub fn decode(d: &Matrix, z: &[f64]) -> Result<Vec<f64>> {
    d.matvec(z)
}

/// Per-server maxima of computed subfunctions and reached users, each the
/// size of the union of supports over that server's `T` shots. Returns
/// `(gamma, delta)`.
pub fn measure_costs(pair: &FactorPair) -> (usize, usize) {
    let t = pair.shots;
    let mut gamma = 0;
    let mut delta = 0;
    for n in 0..pair.servers() {
        let shots = n * t..(n + 1) * t;
        let computed = (0..pair.e.cols())
            .filter(|&j| shots.clone().any(|c| pair.e_support.get(c, j)))
            .count();
        let reached = (0..pair.d.rows())
            .filter(|&i| shots.clone().any(|c| pair.d_support.get(i, c)))
            .count();
        gamma = gamma.max(computed);
        delta = delta.max(reached);
    }
    (gamma, delta)
}

/// Runs encode and decode for one input vector and compares against `F w`.
pub fn run_end_to_end(f: &DemandMatrix, w: &[f64], pair: &FactorPair) -> Result<SimulationReport> {
    let f = f.matrix();
    if pair.d.rows() != f.rows() || pair.e.cols() != f.cols() {
        return Err(TessError::ShapeMismatch {
            context: "simulation",
            expected: format!("scheme for a {}x{} demand", f.rows(), f.cols()),
            found: format!("{}x{}", pair.d.rows(), pair.e.cols()),
        });
    }
    if let Some(i) = w.iter().position(|x| !x.is_finite()) {
        return Err(TessError::NonFinite { row: i, col: 0 });
    }
    let z = encode(&pair.e, w)?;
    let f_decoded = decode(&pair.d, &z)?;
    let f_true = f.matvec(w)?;
    let error_e = f_true
        .iter()
        .zip(&f_decoded)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let (gamma_measured, delta_measured) = measure_costs(pair);
    Ok(SimulationReport {
        z,
        f_true,
        f_decoded,
        error_e,
        gamma_measured,
        delta_measured,
    })
}

/// Mean of `errorE / (KL)` over `samples` standard normal input vectors,
/// each pushed through encode and decode.
pub fn mean_sampled_error(
    f: &DemandMatrix,
    pair: &FactorPair,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(TessError::InvalidParams(
            "at least one sample is required".into(),
        ));
    }
    let (k, l) = f.matrix().shape();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![0.0; l];
    let mut total = 0.0;
    for _ in 0..samples {
        for x in w.iter_mut() {
            *x = StandardNormal.sample(&mut rng);
        }
        total += run_end_to_end(f, &w, pair)?.error_e;
    }
    Ok(total / (samples as f64 * (k * l) as f64))
}
