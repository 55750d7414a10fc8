use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use tessfact_core::capacity::{sweep, CapacityCase, TradeoffCurve};
use tessfact_core::{capacity_report, CapacityReport, Exactness, TessError};

use crate::error::{CliError, CliResult};
use crate::io::{to_json, write_text};
use crate::params::ParamArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlanFormat {
    Json,
    Table,
    Csv,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Number of servers N (0 picks a default)
    #[arg(short = 'N', long = "servers", default_value_t = 0)]
    pub servers: usize,
    #[arg(long, value_enum, default_value_t = PlanFormat::Json)]
    pub format: PlanFormat,
    /// Sweep every Delta in 1..=K and Gamma in 1..=L (a given -D or -G pins
    /// that axis) and emit CSV
    #[arg(long)]
    pub sweep: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &PlanArgs) -> CliResult<()> {
    let text = if args.sweep || args.format == PlanFormat::Csv {
        sweep_csv(&args.params)?
    } else {
        let report = capacity_report(&args.params.resolve(args.servers)?)?;
        match args.format {
            PlanFormat::Table => table(&report),
            _ => to_json(&report)?,
        }
    };
    write_text(args.out.as_deref(), &text)
}

fn sweep_csv(p: &ParamArgs) -> CliResult<String> {
    let (Some(k), Some(l)) = (p.users, p.subfunctions) else {
        return Err(CliError::Usage("a sweep needs -K and -L".into()));
    };
    let deltas: Vec<usize> = p.comm_budget.map_or_else(|| (1..=k).collect(), |d| vec![d]);
    let gammas: Vec<usize> = p.comp_budget.map_or_else(|| (1..=l).collect(), |g| vec![g]);
    for (flag, v, bound) in [("-D", p.comm_budget, k), ("-G", p.comp_budget, l)] {
        if v.is_some_and(|v| v == 0 || v > bound) {
            return Err(TessError::InvalidParams(format!("{flag} must lie in 1..={bound}")).into());
        }
    }
    let rows = sweep(k, l, p.shots, deltas, gammas)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn table(r: &CapacityReport) -> String {
    let p = &r.params;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "K={} L={} T={} Delta={} Gamma={}",
        p.users, p.subfunctions, p.shots, p.comm_budget, p.comp_budget
    );
    let _ = writeln!(s, "{:<14}{}", "N upper", r.n_upper);
    let _ = writeln!(s, "{:<14}{} ({:.4})", "N lower", r.n_lower, r.n_lower_value);
    let _ = writeln!(s, "{:<14}{} ({:.4})", "rate K/N", r.rate, r.rate_value);
    match (&r.capacity, &r.capacity_note) {
        (Some(c), _) => {
            let case = match c.case {
                CapacityCase::ShotsDivideMin => "T divides min(Delta, Gamma)",
                CapacityCase::ShotsExceedMin => "T exceeds min(Delta, Gamma)",
            };
            let _ = writeln!(s, "{:<14}{} ({case})", "capacity", c.value);
        }
        (None, note) => {
            let _ = writeln!(
                s,
                "{:<14}bounds only: {}",
                "capacity",
                note.as_deref().unwrap_or("")
            );
        }
    }
    let exact = match r.exactness {
        Exactness::Exact => "exact",
        Exactness::ConstantGap => "within a constant factor",
    };
    let _ = writeln!(s, "{:<14}{exact}", "optimality");
    let _ = writeln!(
        s,
        "{:<14}{} ({:.4})",
        "gap ratio", r.gap_ratio, r.gap_ratio_value
    );
    if let Some(t) = &r.tradeoff {
        match &t.curve {
            TradeoffCurve::Hyperbola { product } => {
                let _ = writeln!(
                    s,
                    "{:<14}gamma * delta = {product} (N={})",
                    "tradeoff", t.servers
                );
            }
            TradeoffCurve::Corners { points } => {
                for (i, pt) in points.iter().enumerate() {
                    let label = if i == 0 { "tradeoff" } else { "" };
                    let _ = writeln!(
                        s,
                        "{label:<14}gamma={} delta={} (N={})",
                        pt.gamma, pt.delta, t.servers
                    );
                }
            }
        }
        for b in &t.baselines {
            let mark = if b.dominated {
                "dominated"
            } else {
                "on frontier"
            };
            let _ = writeln!(
                s,
                "{:<14}gamma={} delta={} {mark}",
                b.name, b.point.gamma, b.point.delta
            );
        }
    }
    s
}
