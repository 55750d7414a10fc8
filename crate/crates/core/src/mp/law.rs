//! The Marchenko-Pastur law with unit variance and shape `lambda`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use super::quadrature::{adaptive_simpson, Quadrature, ABS_TOL, MAX_INTERVALS};
use crate::error::{Result, TessError};

const BISECTION_STEPS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MpLaw {
    pub lambda: f64,
    /// `(1 - sqrt(lambda))^2`.
    pub lower: f64,
    /// `(1 + sqrt(lambda))^2`.
    pub upper: f64,
}

/// Result of inverting the CDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantile {
    pub x: f64,
    /// Set when the requested probability lies below the atom at zero; `x`
    /// is then the lower edge.
    pub below_atom: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    pub value: f64,
    /// Set when a limit had to be clamped into `[lower, upper]`.
    pub clamped: bool,
}

impl MpLaw {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(TessError::InvalidRatio(lambda));
        }
        let s = lambda.sqrt();
        Ok(Self {
            lambda,
            lower: (1.0 - s).powi(2),
            upper: (1.0 + s).powi(2),
        })
    }

    fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Mass of the point at zero, `1 - 1/lambda` for `lambda > 1`.
    pub fn atom_mass(&self) -> f64 {
        if self.lambda > 1.0 {
            1.0 - 1.0 / self.lambda
        } else {
            0.0
        }
    }

    /// Density of the continuous part.
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= self.lower || x >= self.upper || x <= 0.0 {
            return 0.0;
        }
        ((self.upper - x) * (x - self.lower)).sqrt() / (2.0 * PI * self.lambda * x)
    }

    /// Distribution function including the atom.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x < 0.0 {
            return 0.0;
        }
        if x >= self.upper {
            return 1.0;
        }
        if x <= self.lower {
            return self.atom_mass();
        }
        let (lam, lo, hi) = (self.lambda, self.lower, self.upper);
        let r = ((hi - x) / (x - lo)).sqrt();
        let mut acc = PI * lam + ((hi - x) * (x - lo)).sqrt()
            - (1.0 + lam) * ((r * r - 1.0) / (2.0 * r)).atan();
        if lam != 1.0 {
            acc += (1.0 - lam) * ((lo * r * r - hi) / (2.0 * (1.0 - lam) * r)).atan();
        }
        let mut value = acc / (2.0 * PI * lam);
        if lam > 1.0 {
            value += (lam - 1.0) / (2.0 * lam);
        }
        value.clamp(0.0, 1.0)
    }

    /// Smallest `x` in `[lower, upper]` with `cdf(x) = p`, by bisection.
    pub fn cdf_inv(&self, p: f64) -> Result<Quantile> {
        if !(0.0..=1.0).contains(&p) {
            return Err(TessError::InvalidProbability(p));
        }
        let atom = self.atom_mass();
        if p <= atom {
            return Ok(Quantile {
                x: self.lower,
                below_atom: p < atom,
            });
        }
        if p == 1.0 {
            return Ok(Quantile {
                x: self.upper,
                below_atom: false,
            });
        }
        let (mut a, mut b) = (self.lower, self.upper);
        for _ in 0..BISECTION_STEPS {
            let m = 0.5 * (a + b);
            if self.cdf(m) < p {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(Quantile {
            x: 0.5 * (a + b),
            below_atom: false,
        })
    }

    /// Edge angle for `x = lower + width sin^2(theta)`.
    fn angle(&self, x: f64) -> f64 {
        ((x - self.lower) / self.width())
            .clamp(0.0, 1.0)
            .sqrt()
            .asin()
    }

    /// `integral_r^t x f(x) dx` by adaptive Simpson after the edge
    /// substitution, which turns the integrand into
    /// `w^2 sin^2 cos^2 / (pi lambda)`.
    pub fn incomplete_first_moment(&self, t: f64, r: f64) -> Moment {
        let clamp = |x: f64| x.clamp(self.lower, self.upper);
        let (tc, rc) = (clamp(t), clamp(r));
        let clamped = tc != t || rc != r;
        if tc <= rc {
            return Moment {
                value: 0.0,
                clamped,
            };
        }
        let w = self.width();
        let scale = w * w / (PI * self.lambda);
        let q = adaptive_simpson(
            |th| {
                let (s, c) = th.sin_cos();
                scale * s * s * c * c
            },
            self.angle(rc),
            self.angle(tc),
            ABS_TOL,
            MAX_INTERVALS,
        );
        Moment {
            value: q.value,
            clamped,
        }
    }

    /// Continuous mass by quadrature of the transformed density. Together
    /// with [`MpLaw::atom_mass`] this should be 1.
    pub fn continuous_mass(&self) -> Quadrature {
        let w = self.width();
        let lo = self.lower;
        let lam = self.lambda;
        adaptive_simpson(
            |th| {
                let (s, c) = th.sin_cos();
                let x = lo + w * s * s;
                if x <= 0.0 {
                    // lambda = 1 at theta = 0: the limit of the integrand.
                    return w * c * c / PI;
                }
                w * w * s * s * c * c / (PI * lam * x)
            },
            0.0,
            FRAC_PI_2,
            ABS_TOL * 1e-2,
            MAX_INTERVALS,
        )
    }
}
