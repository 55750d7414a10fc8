//! Scheme parameters and the matrices exchanged between the other modules.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TessError};
use crate::matrix::{Matrix, SupportMask};

/// Exact non-negative rational used for all closed-form quantities.
pub type Rational = Ratio<u64>;

/// The system tuple: users, subfunctions, servers, shots per server, and the
/// per-server communication (users reached) and computation (subfunctions
/// evaluated) budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeParams {
    #[serde(rename = "K")]
    pub users: usize,
    #[serde(rename = "L")]
    pub subfunctions: usize,
    #[serde(rename = "N")]
    pub servers: usize,
    #[serde(rename = "T")]
    pub shots: usize,
    #[serde(rename = "Delta")]
    pub comm_budget: usize,
    #[serde(rename = "Gamma")]
    pub comp_budget: usize,
}

impl SchemeParams {
    pub fn new(
        users: usize,
        subfunctions: usize,
        servers: usize,
        shots: usize,
        comm_budget: usize,
        comp_budget: usize,
    ) -> Self {
        Self {
            users,
            subfunctions,
            servers,
            shots,
            comm_budget,
            comp_budget,
        }
    }

    pub fn with_servers(self, servers: usize) -> Self {
        Self { servers, ..self }
    }

    /// Checks positivity and the two budget inequalities. The server count
    /// is not inspected, so this is the check used by closed-form planning
    /// and by the lossy entry point.
    pub fn check_budgets(&self) -> Result<()> {
        let named = [
            ("K", self.users),
            ("L", self.subfunctions),
            ("T", self.shots),
            ("Delta", self.comm_budget),
            ("Gamma", self.comp_budget),
        ];
        for (name, value) in named {
            if value == 0 {
                return Err(TessError::InvalidParams(format!("{name} must be positive")));
            }
        }
        if self.comm_budget > self.users {
            return Err(TessError::InvalidParams(format!(
                "Delta > K ({} > {})",
                self.comm_budget, self.users
            )));
        }
        if self.comp_budget > self.subfunctions {
            return Err(TessError::InvalidParams(format!(
                "Gamma > L ({} > {})",
                self.comp_budget, self.subfunctions
            )));
        }
        Ok(())
    }

    /// Full validation for the lossless setting: budgets plus `NT >= K` and
    /// `NT >= L`.
    pub fn validate(self) -> Result<Self> {
        self.check_budgets()?;
        if self.servers == 0 {
            return Err(TessError::InvalidParams("N must be positive".into()));
        }
        let nt = self.shot_slots();
        if nt < self.subfunctions {
            return Err(TessError::InvalidParams(format!(
                "NT < L ({nt} < {})",
                self.subfunctions
            )));
        }
        if nt < self.users {
            return Err(TessError::InvalidParams(format!(
                "NT < K ({nt} < {})",
                self.users
            )));
        }
        Ok(self)
    }

    /// Total number of server-shots, `N * T` (columns of D, rows of E).
    pub fn shot_slots(&self) -> usize {
        self.servers * self.shots
    }

    /// gamma = Gamma / L.
    pub fn comp_fraction(&self) -> Rational {
        Rational::new(self.comp_budget as u64, self.subfunctions as u64)
    }

    /// delta = Delta / K.
    pub fn comm_fraction(&self) -> Rational {
        Rational::new(self.comm_budget as u64, self.users as u64)
    }

    /// zeta = Delta / L, links activated per subfunction.
    pub fn links_per_subfunction(&self) -> Rational {
        Rational::new(self.comm_budget as u64, self.subfunctions as u64)
    }

    /// kappa = K / L.
    pub fn aspect(&self) -> Rational {
        Rational::new(self.users as u64, self.subfunctions as u64)
    }

    /// R = K / N. Panics if `servers == 0`.
    pub fn rate(&self) -> Rational {
        Rational::new(self.users as u64, self.servers as u64)
    }

    pub fn divisible(&self) -> bool {
        self.users.is_multiple_of(self.comm_budget)
            && self.subfunctions.is_multiple_of(self.comp_budget)
    }
}

/// The K x L coefficient matrix of the requested linear combinations.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandMatrix(Matrix);

impl DemandMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if let Some((row, col)) = matrix.first_non_finite() {
            return Err(TessError::NonFinite { row, col });
        }
        Ok(Self(matrix))
    }

    /// Same as [`DemandMatrix::new`] plus a shape check against `params`.
    pub fn for_params(matrix: Matrix, params: &SchemeParams) -> Result<Self> {
        if matrix.shape() != (params.users, params.subfunctions) {
            return Err(TessError::ShapeMismatch {
                context: "demand matrix",
                expected: format!("{}x{}", params.users, params.subfunctions),
                found: format!("{}x{}", matrix.rows(), matrix.cols()),
            });
        }
        Self::new(matrix)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_inner(self) -> Matrix {
        self.0
    }
}

/// Subfunction outputs `W_1..W_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputVector(Vec<f64>);

impl OutputVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(col) = values.iter().position(|v| !v.is_finite()) {
            return Err(TessError::NonFinite { row: 0, col });
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Communication matrix D (K x NT) and computing matrix E (NT x L) with their
/// supports. Column `c` of D and row `c` of E belong to server `c / T`, shot
/// `c % T` (zero-based).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub d: Matrix,
    pub e: Matrix,
    pub d_support: SupportMask,
    pub e_support: SupportMask,
    pub shots: usize,
}

impl FactorPair {
    pub fn new(
        d: Matrix,
        e: Matrix,
        d_support: SupportMask,
        e_support: SupportMask,
        shots: usize,
    ) -> Result<Self> {
        if d.cols() != e.rows() {
            return Err(TessError::ShapeMismatch {
                context: "factor pair",
                expected: format!("E with {} rows", d.cols()),
                found: format!("{}", e.rows()),
            });
        }
        if shots == 0 || !d.cols().is_multiple_of(shots) {
            return Err(TessError::ShapeMismatch {
                context: "factor pair",
                expected: format!("column count divisible by T = {shots}"),
                found: format!("{}", d.cols()),
            });
        }
        if (d_support.rows(), d_support.cols()) != d.shape()
            || (e_support.rows(), e_support.cols()) != e.shape()
        {
            return Err(TessError::ShapeMismatch {
                context: "factor pair",
                expected: "support masks shaped like D and E".into(),
                found: "mismatched mask".into(),
            });
        }
        if !d.nonzero_mask().is_subset_of(&d_support) || !e.nonzero_mask().is_subset_of(&e_support)
        {
            return Err(TessError::InvalidParams(
                "factor has nonzero entries outside its support".into(),
            ));
        }
        Ok(Self {
            d,
            e,
            d_support,
            e_support,
            shots,
        })
    }

    /// Pair whose supports are exactly the nonzero patterns of `d` and `e`.
    pub fn from_dense(d: Matrix, e: Matrix, shots: usize) -> Result<Self> {
        let ds = d.nonzero_mask();
        let es = e.nonzero_mask();
        Self::new(d, e, ds, es, shots)
    }

    pub fn servers(&self) -> usize {
        self.d.cols() / self.shots
    }

    pub fn product(&self) -> Matrix {
        self.d
            .matmul(&self.e)
            .expect("shapes checked at construction")
    }
}
