//! Per-tile SVD factorization of F into the sparse pair (D, E).
//!
//! Every tile `P` of the tessellation is factored as `F_P ~ D_P E_P` with
//! `D_P = U_q diag(S_q)` and `E_P = V_q^T`. Tile `j` owns a contiguous run of
//! server-shot slots: its `q` factor columns occupy the first `q` columns of
//! D starting at `T * first_server(j)`, and the same rows of E. Padding shots
//! up to the next multiple of T stay zero, as do all unassigned entries.
//!
//! Because the tiles partition F, the squared error of the whole product is
//! the sum of the per-tile truncation errors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TessError};
use crate::matrix::{Matrix, SupportMask};
use crate::model::{DemandMatrix, FactorPair, SchemeParams};
use crate::svd::{svd, truncate};
use crate::tessellation::{assign_ranks, build_tessellation, servers_for_ranks, Tile, TilePlan};

#[derive(Debug, Clone, PartialEq)]
pub struct TileFactor {
    pub tile_id: usize,
    /// `|rows| x q`.
    pub left: Matrix,
    /// `q x |cols|`.
    pub right: Matrix,
    pub residual_sq: f64,
    /// Full spectrum of the tile, non-increasing.
    pub singular_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub pair: FactorPair,
    pub plan: TilePlan,
    pub factors: Vec<TileFactor>,
    /// False when `Delta` does not divide K or `Gamma` does not divide L; the
    /// asymptotic error prediction does not cover such schemes.
    pub within_prediction_regime: bool,
}

impl Factorization {
    pub fn total_residual_sq(&self) -> f64 {
        self.factors.iter().map(|f| f.residual_sq).sum()
    }

    pub fn tile_reports(&self) -> Vec<TileReport> {
        self.plan
            .tiles
            .iter()
            .zip(&self.factors)
            .map(|(t, f)| TileReport {
                tile_id: t.id,
                family: t.family.label().to_string(),
                rows: t.rows.clone(),
                cols: t.cols.clone(),
                q: t.allocated_rank,
                max_rank: t.max_rank,
                residual_sq: f.residual_sq,
                server_ids: t.servers.clone(),
            })
            .collect()
    }
}

/// JSON record of one tile in a factorization report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TileReport {
    pub tile_id: usize,
    pub family: String,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub q: usize,
    pub max_rank: usize,
    pub residual_sq: f64,
    pub server_ids: Vec<usize>,
}

/// F restricted to the tile's rows and columns, in stored order.
pub fn extract_tile(f: &DemandMatrix, tile: &Tile) -> Result<Matrix> {
    f.matrix().select(&tile.rows, &tile.cols)
}

/// Per-tile ranks for a budget of `servers` servers.
///
/// Servers are dealt out in rounds, one per tile per round, skipping tiles
/// that already hold full rank; with equal tiles this is `floor(N/m)`
/// servers (`T` ranks each) per tile. The last, partial round goes to the
/// tiles whose next server would capture the most energy (sum of the next
/// `T` squared singular values) when `spectra` is given, otherwise to the
/// earliest tiles. Ties go to the earlier tile. No server is split between
/// tiles, and the total residual never increases with `servers`.
///
/// With fewer servers than tiles some tiles must get rank zero, which is an
/// error unless `allow_dropped` is set.
pub fn rank_budget(
    plan: &TilePlan,
    servers: usize,
    spectra: Option<&[Vec<f64>]>,
    allow_dropped: bool,
) -> Result<Vec<usize>> {
    let tiles = &plan.tiles;
    let shots = plan.params.shots;
    let m = tiles.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    if let Some(s) = spectra {
        if s.len() != m {
            return Err(TessError::ShapeMismatch {
                context: "rank_budget spectra",
                expected: format!("{m} spectra"),
                found: format!("{}", s.len()),
            });
        }
    }
    if servers < m && !allow_dropped {
        return Err(TessError::TilesDropped { tiles: m, servers });
    }

    let caps: Vec<usize> = tiles.iter().map(|t| t.max_rank.div_ceil(shots)).collect();
    let filled = |level: usize| caps.iter().map(|&c| c.min(level)).sum::<usize>();
    let top = caps.iter().copied().max().unwrap_or(0);
    let mut level = 0;
    while level < top && filled(level + 1) <= servers {
        level += 1;
    }
    let mut alloc: Vec<usize> = caps.iter().map(|&c| c.min(level)).collect();
    let left = servers - filled(level);

    let mut open: Vec<usize> = (0..m).filter(|&j| caps[j] > level).collect();
    if let Some(s) = spectra {
        let gain = |j: usize| -> f64 {
            let lo = (level * shots).min(s[j].len());
            let hi = ((level + 1) * shots).min(tiles[j].max_rank).min(s[j].len());
            s[j][lo..hi.max(lo)].iter().map(|x| x * x).sum()
        };
        // Stable sort keeps tile order among equal gains.
        open.sort_by(|&a, &b| gain(b).total_cmp(&gain(a)));
    }
    for &j in open.iter().take(left) {
        alloc[j] += 1;
    }
    Ok(alloc
        .iter()
        .zip(tiles)
        .map(|(&a, t)| (a * shots).min(t.max_rank))
        .collect())
}

/// Exact factorization using `n_opt_upper` servers (or more; extra servers
/// stay idle with zero columns and rows).
pub fn factorize_lossless(f: &DemandMatrix, params: &SchemeParams) -> Result<Factorization> {
    let params = params.validate()?;
    check_shape(f, &params)?;
    let plan = build_tessellation(&params)?;
    let ranks: Vec<usize> = plan.tiles.iter().map(|t| t.max_rank).collect();
    let required = servers_for_ranks(&ranks, params.shots);
    if required > params.servers {
        return Err(TessError::InsufficientServers {
            required,
            available: params.servers,
        });
    }
    let spectra = tile_svds(f, &plan)?;
    let plan = assign_ranks(&plan, &ranks)?;
    finish(plan, spectra)
}

/// Truncated-SVD factorization with `servers` servers; any `N >= 1` is
/// accepted (subject to `allow_dropped` when `N` is below the tile count).
pub fn factorize_lossy(
    f: &DemandMatrix,
    params: &SchemeParams,
    servers: usize,
    allow_dropped: bool,
) -> Result<Factorization> {
    params.check_budgets()?;
    if servers == 0 {
        return Err(TessError::InvalidParams("N must be positive".into()));
    }
    let params = params.with_servers(servers);
    check_shape(f, &params)?;
    let plan = build_tessellation(&params)?;
    let svds = tile_svds(f, &plan)?;
    let spectra: Vec<Vec<f64>> = svds.iter().map(|s| s.singular_values.clone()).collect();
    let ranks = rank_budget(&plan, servers, Some(&spectra), allow_dropped)?;
    let plan = assign_ranks(&plan, &ranks)?;
    let dropped = plan.dropped_tiles();
    if !dropped.is_empty() {
        log::warn!("tiles dropped to rank zero: {dropped:?}");
    }
    finish(plan, svds)
}

/// `||DE - F||_F^2` computed densely.
pub fn residual_error(f: &DemandMatrix, pair: &FactorPair) -> Result<f64> {
    let f = f.matrix();
    if pair.d.rows() != f.rows() || pair.e.cols() != f.cols() {
        return Err(TessError::ShapeMismatch {
            context: "residual_error",
            expected: format!("{}x{}", f.rows(), f.cols()),
            found: format!("{}x{}", pair.d.rows(), pair.e.cols()),
        });
    }
    Ok(pair.product().sub(f)?.frobenius_norm_sq())
}

fn check_shape(f: &DemandMatrix, params: &SchemeParams) -> Result<()> {
    let shape = f.matrix().shape();
    if shape != (params.users, params.subfunctions) {
        return Err(TessError::ShapeMismatch {
            context: "demand matrix",
            expected: format!("{}x{}", params.users, params.subfunctions),
            found: format!("{}x{}", shape.0, shape.1),
        });
    }
    Ok(())
}

fn tile_svds(f: &DemandMatrix, plan: &TilePlan) -> Result<Vec<crate::svd::Svd>> {
    plan.tiles
        .par_iter()
        .map(|t| svd(&extract_tile(f, t)?))
        .collect()
}

fn finish(plan: TilePlan, svds: Vec<crate::svd::Svd>) -> Result<Factorization> {
    let factors = plan
        .tiles
        .iter()
        .zip(svds)
        .map(|(tile, s)| {
            let t = truncate(&s, tile.allocated_rank)?;
            Ok(TileFactor {
                tile_id: tile.id,
                left: t.left,
                right: t.right,
                residual_sq: t.residual_sq,
                singular_values: s.singular_values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pair = assemble(&plan, &factors)?;
    Ok(Factorization {
        within_prediction_regime: plan.params.divisible(),
        pair,
        plan,
        factors,
    })
}

/// Places every tile factor into D and E at its servers' shot slots.
pub fn assemble(plan: &TilePlan, factors: &[TileFactor]) -> Result<FactorPair> {
    let p = &plan.params;
    let slots = p.shot_slots();
    let used = plan.servers_used();
    if used > p.servers {
        return Err(TessError::InsufficientServers {
            required: used,
            available: p.servers,
        });
    }
    let mut d = Matrix::zeros(p.users, slots);
    let mut e = Matrix::zeros(slots, p.subfunctions);
    let mut ds = SupportMask::empty(p.users, slots);
    let mut es = SupportMask::empty(slots, p.subfunctions);

    for (tile, factor) in plan.tiles.iter().zip(factors) {
        let q = tile.allocated_rank;
        if q == 0 {
            continue;
        }
        let offset = tile.servers[0] * p.shots;
        for k in 0..q {
            let col = offset + k;
            for (a, &i) in tile.rows.iter().enumerate() {
                d[(i, col)] = factor.left[(a, k)];
                ds.set(i, col, true);
            }
            for (b, &j) in tile.cols.iter().enumerate() {
                e[(col, j)] = factor.right[(k, b)];
                es.set(col, j, true);
            }
        }
    }
    FactorPair::new(d, e, ds, es, p.shots)
}

/// Support masks of D and E rebuilt from a tile report, for loading a
/// scheme back from disk.
pub fn support_masks(
    params: &SchemeParams,
    tiles: &[TileReport],
) -> Result<(SupportMask, SupportMask)> {
    let slots = params.shot_slots();
    let mut ds = SupportMask::empty(params.users, slots);
    let mut es = SupportMask::empty(slots, params.subfunctions);
    for t in tiles {
        if t.q == 0 {
            continue;
        }
        let first = *t.server_ids.first().ok_or_else(|| {
            TessError::InvalidParams(format!(
                "tile {} has rank {} but no servers",
                t.tile_id, t.q
            ))
        })?;
        if t.server_ids.len() * params.shots < t.q {
            return Err(TessError::InvalidParams(format!(
                "tile {} has rank {} but only {} servers",
                t.tile_id,
                t.q,
                t.server_ids.len()
            )));
        }
        let offset = first * params.shots;
        for col in offset..offset + t.q {
            if col >= slots {
                return Err(TessError::IndexOutOfBounds {
                    index: col,
                    bound: slots,
                });
            }
            for &i in &t.rows {
                if i >= params.users {
                    return Err(TessError::IndexOutOfBounds {
                        index: i,
                        bound: params.users,
                    });
                }
                ds.set(i, col, true);
            }
            for &j in &t.cols {
                if j >= params.subfunctions {
                    return Err(TessError::IndexOutOfBounds {
                        index: j,
                        bound: params.subfunctions,
                    });
                }
                es.set(col, j, true);
            }
        }
    }
    Ok((ds, es))
}

/// True when any two columns of D have equal or disjoint supports, and the
/// same holds for the rows of E.
pub fn has_disjoint_supports(pair: &FactorPair) -> bool {
    let cols = (0..pair.d.cols()).map(|c| pair.d_support.column_support(c));
    let rows = (0..pair.e.rows()).map(|r| pair.e_support.row_support(r));
    equal_or_disjoint(cols, pair.d.rows()) && equal_or_disjoint(rows, pair.e.cols())
}

/// Disjoint supports with every column of D and every row of E of the same
/// support size (empty padding columns included).
pub fn has_balanced_supports(pair: &FactorPair) -> bool {
    let same_size = |sizes: Vec<usize>| sizes.windows(2).all(|w| w[0] == w[1]);
    has_disjoint_supports(pair)
        && same_size(
            (0..pair.d.cols())
                .map(|c| pair.d_support.column_support(c).len())
                .collect(),
        )
        && same_size(
            (0..pair.e.rows())
                .map(|r| pair.e_support.row_support(r).len())
                .collect(),
        )
}

fn equal_or_disjoint(sets: impl Iterator<Item = Vec<usize>>, universe: usize) -> bool {
    let mut owner: Vec<Option<Vec<usize>>> = vec![None; universe];
    for set in sets {
        for &x in &set {
            match &owner[x] {
                Some(s) if *s != set => return false,
                Some(_) => {}
                None => owner[x] = Some(set.clone()),
            }
        }
    }
    true
}
