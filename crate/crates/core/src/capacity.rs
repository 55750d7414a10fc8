//! Closed-form server counts, capacity and the communication/computation
//! tradeoff, all in exact rational arithmetic.

use serde::{Serialize, Serializer};

use crate::error::{Result, TessError};
use crate::model::{Rational, SchemeParams};
use crate::tessellation::min_tile_count;

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

fn ratio(a: usize, b: usize) -> Rational {
    Rational::new(a as u64, b as u64)
}

fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_opt_rational<S: Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&r.to_string()),
        None => s.serialize_none(),
    }
}

/// Servers used by the tessellation scheme: each tile of rank `r` needs
/// `ceil(r/T)` servers.
pub fn n_opt_upper(p: &SchemeParams) -> Result<usize> {
    p.check_budgets()?;
    let (k, l, t, d, g) = (
        p.users,
        p.subfunctions,
        p.shots,
        p.comm_budget,
        p.comp_budget,
    );
    let (kq, kr) = (k / d, k % d);
    let (lq, lr) = (l / g, l % g);
    let term = |side: usize, count: usize| {
        if side == 0 {
            0
        } else {
            ceil_div(side, t) * count
        }
    };
    Ok(term(d.min(g), kq * lq) + term(kr.min(g), lq) + term(lr.min(d), kq) + term(kr.min(lr), 1))
}

/// `KL / (T max(Delta, Gamma))`.
pub fn n_lower(p: &SchemeParams) -> Result<Rational> {
    p.check_budgets()?;
    Ok(ratio(
        p.users * p.subfunctions,
        p.shots * p.comm_budget.max(p.comp_budget),
    ))
}

/// The lower bound used for the gap certificate. When `T >= min(Delta,
/// Gamma)` every tile fits in one server, so the tile count
/// `ceil(K/Delta) ceil(L/Gamma)` also bounds N from below and is the tighter
/// of the two.
pub fn n_converse(p: &SchemeParams) -> Result<Rational> {
    let lower = n_lower(p)?;
    if p.shots < p.comm_budget.min(p.comp_budget) {
        Ok(lower)
    } else {
        Ok(lower.max(Rational::from_integer(min_tile_count(p) as u64)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Exactness {
    Exact,
    ConstantGap,
}

/// Exact when `T >= min(Delta, Gamma)`, or the larger budget divides its
/// dimension and T divides the smaller budget.
pub fn optimality_status(p: &SchemeParams) -> Result<Exactness> {
    p.check_budgets()?;
    let (k, l, t, d, g) = (
        p.users,
        p.subfunctions,
        p.shots,
        p.comm_budget,
        p.comp_budget,
    );
    let exact = t >= d.min(g)
        || (d >= g && k % d == 0 && g % t == 0)
        || (g >= d && l % g == 0 && d % t == 0);
    Ok(if exact {
        Exactness::Exact
    } else {
        Exactness::ConstantGap
    })
}

/// `n_opt_upper / n_converse`. Below 8 whenever `T < max(Delta, Gamma)`; a
/// larger value panics because it can only come from a broken formula.
pub fn gap_ratio(p: &SchemeParams) -> Result<Rational> {
    let r = Rational::from_integer(n_opt_upper(p)? as u64) / n_converse(p)?;
    if p.shots < p.comm_budget.max(p.comp_budget) {
        assert!(
            r < Rational::from_integer(8),
            "gap ratio {r} >= 8 for {p:?}"
        );
    }
    Ok(r)
}

/// `n_opt_upper / n_lower` without the tile-count converse.
pub fn raw_gap_ratio(p: &SchemeParams) -> Result<Rational> {
    Ok(Rational::from_integer(n_opt_upper(p)? as u64) / n_lower(p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CapacityCase {
    /// T divides min(Delta, Gamma): C = T max(Delta, Gamma) / L.
    ShotsDivideMin,
    /// T exceeds min(Delta, Gamma): C = Delta Gamma / L.
    ShotsExceedMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Capacity {
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    pub case: CapacityCase,
}

fn check_divisible(p: &SchemeParams) -> Result<()> {
    p.check_budgets()?;
    if !p.users.is_multiple_of(p.comm_budget) {
        return Err(TessError::OutsideRegime(format!(
            "Delta does not divide K ({} mod {} != 0)",
            p.users, p.comm_budget
        )));
    }
    if !p.subfunctions.is_multiple_of(p.comp_budget) {
        return Err(TessError::OutsideRegime(format!(
            "Gamma does not divide L ({} mod {} != 0)",
            p.subfunctions, p.comp_budget
        )));
    }
    Ok(())
}

/// Lossless capacity `K / N_opt` in the two closed-form cases.
pub fn capacity_simple(p: &SchemeParams) -> Result<Capacity> {
    check_divisible(p)?;
    let (t, d, g, l) = (p.shots, p.comm_budget, p.comp_budget, p.subfunctions);
    let small = d.min(g);
    let c = if small % t == 0 {
        Capacity {
            value: ratio(t * d.max(g), l),
            case: CapacityCase::ShotsDivideMin,
        }
    } else if t > small {
        Capacity {
            value: ratio(d * g, l),
            case: CapacityCase::ShotsExceedMin,
        }
    } else {
        return Err(TessError::OutsideRegime(format!(
            "outside closed form: T = {t} neither divides nor exceeds min(Delta, Gamma) = {small}"
        )));
    };
    debug_assert_eq!(
        c.value * Rational::from_integer(n_opt_upper(p)? as u64),
        Rational::from_integer(p.users as u64)
    );
    Ok(c)
}

/// Capacity from the normalized budgets, `C = T max(delta kappa, gamma)`,
/// for `T | min`. Accepts real inputs since it is only used for plots.
pub fn capacity_from_fractions(delta: f64, gamma: f64, kappa: f64, shots: usize) -> f64 {
    shots as f64 * (delta * kappa).max(gamma)
}

/// A `(gamma, delta)` operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OperatingPoint {
    #[serde(serialize_with = "ser_rational")]
    pub gamma: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub delta: Rational,
}

impl OperatingPoint {
    pub fn new(gamma: Rational, delta: Rational) -> Self {
        Self { gamma, delta }
    }

    pub fn product(&self) -> Rational {
        self.gamma * self.delta
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum TradeoffCurve {
    /// Every point with `gamma delta = 1/N` is optimal.
    Hyperbola {
        #[serde(serialize_with = "ser_rational")]
        product: Rational,
    },
    /// Two optimal corner points.
    Corners { points: [OperatingPoint; 2] },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Baseline {
    pub name: &'static str,
    pub point: OperatingPoint,
    pub dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tradeoff {
    pub servers: usize,
    pub curve: TradeoffCurve,
    pub baselines: Vec<Baseline>,
}

/// Optimal operating points for `N = params.servers`. The centralized
/// baseline `(1/L, 1)` and the fully parallel `(1, 1/K)` are flagged as
/// dominated when their `gamma delta` exceeds `1/N`.
pub fn tradeoff_points(p: &SchemeParams) -> Result<Tradeoff> {
    check_divisible(p)?;
    let n = p.servers;
    if n == 0 {
        return Err(TessError::InvalidParams("N must be positive".into()));
    }
    let (k, l, t) = (p.users, p.subfunctions, p.shots);
    let small = p.comm_budget.min(p.comp_budget);
    let curve = if small.is_multiple_of(t) {
        TradeoffCurve::Corners {
            points: [
                OperatingPoint::new(ratio(k, n * t), ratio(t, k)),
                OperatingPoint::new(ratio(t, l), ratio(l, n * t)),
            ],
        }
    } else if t > small {
        TradeoffCurve::Hyperbola {
            product: ratio(1, n),
        }
    } else {
        return Err(TessError::OutsideRegime(format!(
            "outside closed form: T = {t} neither divides nor exceeds min(Delta, Gamma) = {small}"
        )));
    };
    let frontier = ratio(1, n);
    let baselines = [
        (
            "centralized",
            OperatingPoint::new(ratio(1, l), Rational::from_integer(1)),
        ),
        (
            "parallel",
            OperatingPoint::new(Rational::from_integer(1), ratio(1, k)),
        ),
    ]
    .into_iter()
    .map(|(name, point)| Baseline {
        name,
        point,
        dominated: point.product() > frontier,
    })
    .collect();
    Ok(Tradeoff {
        servers: n,
        curve,
        baselines,
    })
}

/// Everything the planner knows about one parameter tuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CapacityReport {
    pub params: SchemeParams,
    pub n_upper: usize,
    #[serde(serialize_with = "ser_rational")]
    pub n_lower: Rational,
    pub n_lower_value: f64,
    #[serde(serialize_with = "ser_rational")]
    pub n_converse: Rational,
    /// `K / n_upper`, the rate of the tessellation scheme.
    #[serde(serialize_with = "ser_rational")]
    pub rate: Rational,
    pub rate_value: f64,
    pub capacity: Option<Capacity>,
    pub capacity_note: Option<String>,
    pub exactness: Exactness,
    #[serde(serialize_with = "ser_rational")]
    pub gap_ratio: Rational,
    pub gap_ratio_value: f64,
    #[serde(serialize_with = "ser_opt_rational")]
    pub raw_gap_ratio: Option<Rational>,
    pub tradeoff: Option<Tradeoff>,
}

/// Builds the report. When `params.servers` is 0 the tradeoff is evaluated
/// at `N = n_upper`.
pub fn capacity_report(p: &SchemeParams) -> Result<CapacityReport> {
    let n_upper = n_opt_upper(p)?;
    let n_lower = n_lower(p)?;
    let n_converse = n_converse(p)?;
    let gap = gap_ratio(p)?;
    let raw = raw_gap_ratio(p)?;
    let rate = ratio(p.users, n_upper);
    let (capacity, capacity_note) = match capacity_simple(p) {
        Ok(c) => (Some(c), None),
        Err(TessError::OutsideRegime(msg)) => (None, Some(msg)),
        Err(e) => return Err(e),
    };
    let at = if p.servers == 0 {
        p.with_servers(n_upper)
    } else {
        *p
    };
    let tradeoff = match tradeoff_points(&at) {
        Ok(t) => Some(t),
        Err(TessError::OutsideRegime(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(CapacityReport {
        params: *p,
        n_upper,
        n_lower_value: to_f64(&n_lower),
        n_lower,
        n_converse,
        rate_value: to_f64(&rate),
        rate,
        capacity,
        capacity_note,
        exactness: optimality_status(p)?,
        gap_ratio_value: to_f64(&gap),
        gap_ratio: gap,
        raw_gap_ratio: (raw != gap).then_some(raw),
        tradeoff,
    })
}

/// One CSV-friendly row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    #[serde(rename = "K")]
    pub users: usize,
    #[serde(rename = "L")]
    pub subfunctions: usize,
    #[serde(rename = "T")]
    pub shots: usize,
    #[serde(rename = "Delta")]
    pub comm_budget: usize,
    #[serde(rename = "Gamma")]
    pub comp_budget: usize,
    pub gamma: f64,
    pub delta: f64,
    pub n_upper: usize,
    pub n_lower: f64,
    pub gap_ratio: f64,
    pub exact: bool,
}

/// Evaluates every `(Delta, Gamma)` pair in the given ranges (clipped to
/// `1..=K` and `1..=L`), in row-major order.
pub fn sweep(
    users: usize,
    subfunctions: usize,
    shots: usize,
    deltas: impl IntoIterator<Item = usize>,
    gammas: impl IntoIterator<Item = usize> + Clone,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for d in deltas.into_iter().filter(|&d| (1..=users).contains(&d)) {
        for g in gammas
            .clone()
            .into_iter()
            .filter(|&g| (1..=subfunctions).contains(&g))
        {
            let p = SchemeParams::new(users, subfunctions, 0, shots, d, g);
            rows.push(SweepRow {
                users,
                subfunctions,
                shots,
                comm_budget: d,
                comp_budget: g,
                gamma: to_f64(&p.comp_fraction()),
                delta: to_f64(&p.comm_fraction()),
                n_upper: n_opt_upper(&p)?,
                n_lower: to_f64(&n_lower(&p)?),
                gap_ratio: to_f64(&gap_ratio(&p)?),
                exact: optimality_status(&p)? == Exactness::Exact,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(k: usize, l: usize, t: usize, d: usize, g: usize) -> SchemeParams {
        SchemeParams::new(k, l, 0, t, d, g)
    }

    #[test]
    fn server_counts_for_worked_examples() {
        assert_eq!(n_opt_upper(&p(6, 10, 1, 3, 5)).unwrap(), 12);
        assert_eq!(n_opt_upper(&p(6, 10, 1, 3, 2)).unwrap(), 20);
        assert_eq!(n_opt_upper(&p(6, 10, 1, 2, 5)).unwrap(), 12);
        assert_eq!(n_opt_upper(&p(7, 11, 1, 3, 5)).unwrap(), 17);
        assert_eq!(n_opt_upper(&p(6, 10, 2, 3, 5)).unwrap(), 8);
        assert_eq!(n_opt_upper(&p(1, 1, 1, 1, 1)).unwrap(), 1);
    }

    #[test]
    fn lower_bounds() {
        assert_eq!(
            n_lower(&p(6, 10, 1, 3, 5)).unwrap(),
            Rational::from_integer(12)
        );
        assert_eq!(n_lower(&p(7, 11, 1, 3, 5)).unwrap(), Rational::new(77, 5));
        assert_eq!(
            n_lower(&p(1, 1, 1, 1, 1)).unwrap(),
            Rational::from_integer(1)
        );
    }

    #[test]
    fn gap_ratios() {
        assert_eq!(
            gap_ratio(&p(6, 10, 1, 3, 5)).unwrap(),
            Rational::from_integer(1)
        );
        let r = gap_ratio(&p(7, 11, 1, 3, 5)).unwrap();
        assert_eq!(r, Rational::new(85, 77));
        assert!((to_f64(&r) - 1.104).abs() < 1e-3);
    }

    #[test]
    fn tile_count_converse_when_shots_cover_a_tile() {
        // One row, 24 columns, tiles of width 23: two tiles, each one server.
        let q = p(1, 24, 22, 1, 23);
        assert_eq!(n_opt_upper(&q).unwrap(), 2);
        assert_eq!(n_lower(&q).unwrap(), Rational::new(24, 22 * 23));
        assert_eq!(n_converse(&q).unwrap(), Rational::from_integer(2));
        assert_eq!(gap_ratio(&q).unwrap(), Rational::from_integer(1));
    }

    #[test]
    fn optimality_conditions() {
        assert_eq!(
            optimality_status(&p(6, 10, 3, 3, 5)).unwrap(),
            Exactness::Exact
        );
        assert_eq!(
            optimality_status(&p(6, 10, 1, 3, 5)).unwrap(),
            Exactness::Exact
        );
        assert_eq!(
            optimality_status(&p(7, 11, 2, 3, 5)).unwrap(),
            Exactness::ConstantGap
        );
    }

    #[test]
    fn capacity_cases() {
        let c = capacity_simple(&p(6, 10, 1, 3, 5)).unwrap();
        assert_eq!(c.value, Rational::new(1, 2));
        assert_eq!(c.case, CapacityCase::ShotsDivideMin);

        let q = p(6, 10, 4, 3, 5);
        let c = capacity_simple(&q).unwrap();
        assert_eq!(c.value, Rational::new(3, 2));
        assert_eq!(c.case, CapacityCase::ShotsExceedMin);
        assert_eq!(n_opt_upper(&q).unwrap(), 4);

        // Single tile.
        let c = capacity_simple(&p(4, 6, 1, 4, 6)).unwrap();
        assert_eq!(
            c.value * Rational::from_integer(4),
            Rational::from_integer(4)
        );
    }

    #[test]
    fn capacity_errors() {
        let e = capacity_simple(&p(7, 10, 1, 3, 5)).unwrap_err();
        assert!(matches!(e, TessError::OutsideRegime(m) if m.contains("Delta does not divide K")));
        let e = capacity_simple(&p(6, 10, 2, 3, 5)).unwrap_err();
        assert!(matches!(e, TessError::OutsideRegime(m) if m.contains("outside closed form")));
    }

    #[test]
    fn tradeoff_corner_points_and_baselines() {
        let t = tradeoff_points(&SchemeParams::new(6, 10, 12, 1, 3, 5)).unwrap();
        assert_eq!(
            t.curve,
            TradeoffCurve::Corners {
                points: [
                    OperatingPoint::new(Rational::new(6, 12), Rational::new(1, 6)),
                    OperatingPoint::new(Rational::new(1, 10), Rational::new(10, 12)),
                ]
            }
        );
        assert!(t.baselines.iter().all(|b| b.dominated));
        assert_eq!(
            t.baselines[0].point,
            OperatingPoint::new(Rational::new(1, 10), Rational::from_integer(1))
        );
    }

    #[test]
    fn tradeoff_hyperbola() {
        let t = tradeoff_points(&SchemeParams::new(6, 10, 4, 4, 3, 5)).unwrap();
        assert_eq!(
            t.curve,
            TradeoffCurve::Hyperbola {
                product: Rational::new(1, 4)
            }
        );
    }

    #[test]
    fn report_json_has_exact_and_float_fields() {
        let r = capacity_report(&p(7, 11, 1, 3, 5)).unwrap();
        assert_eq!(r.n_upper, 17);
        assert!(r.capacity.is_none());
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["nLower"], "77/5");
        assert_eq!(json["gapRatio"], "85/77");
        assert_eq!(json["exactness"], "ConstantGap");
        assert!((json["nLowerValue"].as_f64().unwrap() - 15.4).abs() < 1e-12);
    }

    #[test]
    fn sweep_clips_ranges() {
        let rows = sweep(6, 10, 1, 1..=8, 1..=12).unwrap();
        assert_eq!(rows.len(), 60);
        let ex1 = rows
            .iter()
            .find(|r| r.comm_budget == 3 && r.comp_budget == 5)
            .unwrap();
        assert_eq!(ex1.n_upper, 12);
        assert!(ex1.exact);
    }
}
