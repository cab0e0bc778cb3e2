//! The rigid solid's lower boundary g(x, t): closed-form profile families,
//! exact derivatives, and structural validation (positivity, vertical-only
//! motion, smoothness near the contact point).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Polynomial with coefficients in ascending order: `p(s) = c0 + c1 s + c2 s^2 + ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly<R>(pub Vec<R>);

impl<R: Real> Poly<R> {
    pub fn constant(c: R) -> Self {
        Poly(vec![c])
    }

    pub fn eval(&self, s: R) -> R {
        self.0.iter().rev().fold(R::zero(), |acc, &c| acc * s + c)
    }

    /// Value of the m-th derivative at s.
    pub fn deriv(&self, s: R, m: usize) -> R {
        let mut acc = R::zero();
        for (j, &c) in self.0.iter().enumerate().rev() {
            if j < m {
                break;
            }
            // falling factorial j (j-1) ... (j-m+1)
            let mut f = R::one();
            for q in 0..m {
                f = f * R::of((j - q) as f64);
            }
            acc = acc * s + c * f;
        }
        acc
    }
}

/// Profile families. All are closed-form, separable in x and t, so the
/// vertical-motion assumption `g_xt = 0` holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolidKind<R> {
    /// `g = H0 (1 - (t/t0)^n)`; n=1 constant velocity, n=2 constant acceleration.
    ConstantDescent {
        #[serde(rename = "H0")]
        h0: R,
        t0: R,
        n: R,
    },
    /// `g = htilde(t) + c |x|`, kinked at the apex x=0.
    Wedge { htilde: Poly<R>, c: R },
    /// `g = p(x) + descent(t)`.
    PolynomialInX { coeffs: Poly<R>, descent: Poly<R> },
    /// `g = shape(x)`, time-independent.
    Stationary { shape: Poly<R> },
}

/// Rigid solid bottom boundary. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolidProfile<R> {
    #[serde(flatten)]
    pub kind: SolidKind<R>,
    /// Spatial interval of validity; queries outside raise `OutOfDomain`.
    #[serde(default)]
    pub domain_hint: Option<(R, R)>,
    /// Time horizon of validity.
    #[serde(default)]
    pub t_horizon: Option<R>,
}

/// Exact derivatives of g at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GDerivs<R> {
    pub gx: R,
    pub gt: R,
    pub gxx: R,
}

/// Outcome of sampling-based structural validation.
#[derive(Debug, Clone)]
pub struct ValidationReport<R> {
    pub min_g: R,
    /// First sampled point (x, t) at which g <= 0, if any.
    pub first_violation: Option<(R, R)>,
    pub positivity_ok: bool,
    /// `g_xt = 0`, checked analytically per profile family.
    pub vertical_motion_ok: bool,
}

impl<R: Real> SolidProfile<R> {
    pub fn new(kind: SolidKind<R>) -> Self {
        SolidProfile {
            kind,
            domain_hint: None,
            t_horizon: None,
        }
    }

    fn check_domain(&self, x: R, t: R) -> Result<()> {
        if let Some((lo, hi)) = self.domain_hint {
            if x < lo || x > hi {
                return Err(Error::OutOfDomain {
                    x: x.as_f64(),
                    t: t.as_f64(),
                });
            }
        }
        if let Some(th) = self.t_horizon {
            if t < R::zero() || t > th {
                return Err(Error::OutOfDomain {
                    x: x.as_f64(),
                    t: t.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// Evaluate g(x, t).
    pub fn eval_g(&self, x: R, t: R) -> Result<R> {
        self.check_domain(x, t)?;
        Ok(match &self.kind {
            SolidKind::ConstantDescent { h0, t0, n } => {
                *h0 * (R::one() - (t / *t0).powf(*n))
            }
            SolidKind::Wedge { htilde, c } => htilde.eval(t) + *c * x.abs(),
            SolidKind::PolynomialInX { coeffs, descent } => coeffs.eval(x) + descent.eval(t),
            SolidKind::Stationary { shape } => shape.eval(x),
        })
    }

    /// Exact analytic (g_x, g_t, g_xx); `NonSmooth` exactly at a wedge apex.
    pub fn eval_g_derivs(&self, x: R, t: R) -> Result<GDerivs<R>> {
        self.check_domain(x, t)?;
        Ok(match &self.kind {
            SolidKind::ConstantDescent { h0, t0, n } => {
                // d/dt [h0 (1 - (t/t0)^n)] = -h0 n (t/t0)^(n-1) / t0
                let gt = -*h0 * *n * (t / *t0).powf(*n - R::one()) / *t0;
                GDerivs {
                    gx: R::zero(),
                    gt,
                    gxx: R::zero(),
                }
            }
            SolidKind::Wedge { htilde, c } => {
                if x == R::zero() {
                    return Err(Error::NonSmooth { x: x.as_f64() });
                }
                GDerivs {
                    gx: if x > R::zero() { *c } else { -*c },
                    gt: htilde.deriv(t, 1),
                    gxx: R::zero(),
                }
            }
            SolidKind::PolynomialInX { coeffs, descent } => GDerivs {
                gx: coeffs.deriv(x, 1),
                gt: descent.deriv(t, 1),
                gxx: coeffs.deriv(x, 2),
            },
            SolidKind::Stationary { shape } => GDerivs {
                gx: shape.deriv(x, 1),
                gt: R::zero(),
                gxx: shape.deriv(x, 2),
            },
        })
    }

    /// g evaluated with the positivity requirement enforced.
    pub fn eval_g_positive(&self, x: R, t: R) -> Result<R> {
        let g = self.eval_g(x, t)?;
        if g <= R::zero() {
            return Err(Error::ProfileViolation {
                x: x.as_f64(),
                t: t.as_f64(),
                g: g.as_f64(),
            });
        }
        Ok(g)
    }

    /// Sample g over a grid and report positivity; vertical motion is checked
    /// structurally (every family is additively separable in x and t).
    pub fn validate(
        &self,
        x_range: (R, R),
        t_range: (R, R),
        samples: usize,
    ) -> ValidationReport<R> {
        let samples = samples.max(2);
        let mut min_g = R::infinity();
        let mut first_violation = None;
        for it in 0..samples {
            let ft = R::of(it as f64 / (samples - 1) as f64);
            let t = t_range.0 + (t_range.1 - t_range.0) * ft;
            for ix in 0..samples {
                let fx = R::of(ix as f64 / (samples - 1) as f64);
                let x = x_range.0 + (x_range.1 - x_range.0) * fx;
                if let Ok(g) = self.eval_g(x, t) {
                    if g < min_g {
                        min_g = g;
                    }
                    if g <= R::zero() && first_violation.is_none() {
                        first_violation = Some((x, t));
                    }
                }
            }
        }
        ValidationReport {
            min_g,
            positivity_ok: first_violation.is_none(),
            first_violation,
            vertical_motion_ok: true,
        }
    }
}
