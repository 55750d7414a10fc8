use clap::Args;
use tessfact_core::SchemeParams;

use crate::error::{CliError, CliResult};

/// Scheme tuple flags shared by most subcommands; N is per command. K and L may be left out
/// where a demand matrix supplies them.
#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Number of users K
    #[arg(short = 'K', long = "users")]
    pub users: Option<usize>,
    /// Number of subfunctions L
    #[arg(short = 'L', long = "subfunctions")]
    pub subfunctions: Option<usize>,
    /// Shots per server T
    #[arg(short = 'T', long = "shots", default_value_t = 1)]
    pub shots: usize,
    /// Users reached per server, Delta
    #[arg(short = 'D', long = "comm-budget")]
    pub comm_budget: Option<usize>,
    /// Subfunctions computed per server, Gamma
    #[arg(short = 'G', long = "comp-budget")]
    pub comp_budget: Option<usize>,
}

fn require(value: Option<usize>, flag: &str) -> CliResult<usize> {
    value.ok_or_else(|| CliError::Usage(format!("missing required flag {flag}")))
}

impl ParamArgs {
    pub fn resolve(&self, servers: usize) -> CliResult<SchemeParams> {
        self.resolve_with_shape(None, servers)
    }

    /// Fills K and L from `shape` when given, rejecting explicit flags that
    /// disagree with it.
    pub fn resolve_with_shape(
        &self,
        shape: Option<(usize, usize)>,
        servers: usize,
    ) -> CliResult<SchemeParams> {
        let (users, subfunctions) = match shape {
            Some((k, l)) => {
                for (flag, given, actual) in [("-K", self.users, k), ("-L", self.subfunctions, l)] {
                    if given.is_some_and(|g| g != actual) {
                        return Err(CliError::Usage(format!(
                            "{flag} {} does not match the demand matrix ({k}x{l})",
                            given.unwrap_or_default()
                        )));
                    }
                }
                (k, l)
            }
            None => (
                require(self.users, "-K")?,
                require(self.subfunctions, "-L")?,
            ),
        };
        let p = SchemeParams::new(
            users,
            subfunctions,
            servers,
            self.shots,
            require(self.comm_budget, "-D")?,
            require(self.comp_budget, "-G")?,
        );
        p.check_budgets()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> ParamArgs {
        ParamArgs {
            users: Some(6),
            subfunctions: None,
            shots: 1,
            comm_budget: Some(3),
            comp_budget: Some(5),
        }
    }

    #[test]
    fn shape_fills_missing_dimensions() {
        let p = args().resolve_with_shape(Some((6, 10)), 0).unwrap();
        assert_eq!((p.users, p.subfunctions), (6, 10));
        assert!(args().resolve_with_shape(Some((7, 10)), 0).is_err());
        assert!(args().resolve(0).is_err());
    }

    #[test]
    fn budgets_are_checked() {
        let mut a = args();
        a.subfunctions = Some(4);
        assert_eq!(a.resolve(0).unwrap_err().exit_code(), 2);
    }
}
