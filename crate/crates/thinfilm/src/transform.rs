//! Moving-to-fixed coordinate transforms: the linear map used by the solver,
//! the cutoff-based map used for cross-validation, the boundary data triple
//! (psi1, psi2, psi3), and boundary-condition lifting.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::solid::SolidProfile;

/// Affine map sending the moving interval [Lambda, L] to the fixed reference
/// interval [Lambda_bar, L], pinning the symmetry point L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMap<R> {
    pub lambda: R,
    pub lambda_bar: R,
    pub l: R,
}

impl<R: Real> LinearMap<R> {
    pub fn new(lambda: R, lambda_bar: R, l: R) -> Result<Self> {
        if !(lambda < l) || !(lambda_bar < l) {
            return Err(Error::MapDegenerate {
                lambda: lambda.as_f64(),
            });
        }
        Ok(LinearMap {
            lambda,
            lambda_bar,
            l,
        })
    }

    /// `x_bar = (x (L - Lambda_bar) + L (Lambda_bar - Lambda)) / (L - Lambda)`.
    pub fn forward(&self, x: R) -> Result<R> {
        if x < self.lambda || x > self.l {
            return Err(Error::OutOfDomain {
                x: x.as_f64(),
                t: f64::NAN,
            });
        }
        Ok((x * (self.l - self.lambda_bar) + self.l * (self.lambda_bar - self.lambda))
            / (self.l - self.lambda))
    }

    pub fn inverse(&self, xbar: R) -> Result<R> {
        if xbar < self.lambda_bar || xbar > self.l {
            return Err(Error::OutOfDomain {
                x: xbar.as_f64(),
                t: f64::NAN,
            });
        }
        Ok((xbar * (self.l - self.lambda) - self.l * (self.lambda_bar - self.lambda))
            / (self.l - self.lambda_bar))
    }

    /// Jacobian `dxbar/dx = (L - Lambda_bar)/(L - Lambda)`, independent of x.
    pub fn dxbar_dx(&self) -> R {
        (self.l - self.lambda_bar) / (self.l - self.lambda)
    }

    /// Mesh rate `dxbar/dt = -Lambda_dot (L - x)(L - Lambda_bar)/(L - Lambda)^2`
    /// at physical position x.
    pub fn dxbar_dt(&self, lambda_dot: R, x: R) -> Result<R> {
        if x < self.lambda || x > self.l {
            return Err(Error::OutOfDomain {
                x: x.as_f64(),
                t: f64::NAN,
            });
        }
        let dl = self.l - self.lambda;
        Ok(-lambda_dot * (self.l - x) * (self.l - self.lambda_bar) / (dl * dl))
    }
}

/// C-infinity smoothstep: 0 for r <= 0, 1 for r >= 1, built from the
/// mollifier phi(r) = exp(-1/r).
fn smoothstep<R: Real>(r: R) -> R {
    fn phi<R: Real>(r: R) -> R {
        if r > R::zero() {
            (-R::one() / r).exp()
        } else {
            R::zero()
        }
    }
    if r <= R::zero() {
        R::zero()
    } else if r >= R::one() {
        R::one()
    } else {
        let a = phi(r);
        let b = phi(R::one() - r);
        a / (a + b)
    }
}

/// Cutoff-based transform `Q_Lambda(x) = (x - Lambda) xi(x - Lambda) +
/// x (1 - xi(x - Lambda))` from the well-posedness construction. Bijective
/// for |Lambda| <= delta^2; the constructor enforces that constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffMap<R> {
    pub delta: R,
    pub lambda: R,
}

impl<R: Real> CutoffMap<R> {
    pub fn new(delta: R, lambda: R) -> Result<Self> {
        if !(delta > R::zero()) {
            return Err(Error::ConstraintViolation(format!(
                "cutoff half-width must be positive (got {})",
                delta.as_f64()
            )));
        }
        // bijectivity needs |Lambda| sup|xi'| < 1 with sup|xi'| ~ 3.6/delta;
        // the |Lambda| <= delta^2 smallness condition alone only implies that
        // for delta <~ 0.28, so enforce both
        let cap = (delta * delta).min(delta / R::of(4.0));
        if lambda.abs() > cap {
            return Err(Error::ConstraintViolation(format!(
                "|Lambda| = {} exceeds min(delta^2, delta/4) = {}; bijectivity not guaranteed",
                lambda.abs().as_f64(),
                cap.as_f64()
            )));
        }
        Ok(CutoffMap { delta, lambda })
    }

    /// `xi_delta(s)`: 1 on [0, delta], 0 on [2 delta, inf), smooth between.
    /// The derivative bound constant of this smoothstep is about 3.6/delta.
    pub fn xi(&self, s: R) -> R {
        smoothstep((R::of(2.0) * self.delta - s) / self.delta)
    }

    pub fn forward(&self, x: R) -> Result<R> {
        if x < self.lambda {
            return Err(Error::OutOfDomain {
                x: x.as_f64(),
                t: f64::NAN,
            });
        }
        let s = x - self.lambda;
        let xi = self.xi(s);
        Ok(s * xi + x * (R::one() - xi))
    }
}

/// Boundary data at the contact point: psi1 = g, psi2 = g_x - k,
/// psi3 = -2 Lambda g_t / g^3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData<R> {
    pub psi1: R,
    pub psi2: R,
    pub psi3: R,
}

pub fn boundary_data<R: Real>(
    profile: &SolidProfile<R>,
    lambda: R,
    t: R,
    k: R,
) -> Result<BoundaryData<R>> {
    let g = profile.eval_g_positive(lambda, t)?;
    let d = profile.eval_g_derivs(lambda, t)?;
    Ok(BoundaryData {
        psi1: g,
        psi2: d.gx - k,
        psi3: -R::of(2.0) * lambda * d.gt / (g * g * g),
    })
}

/// Subtract the boundary lifting from a profile sampled at `x` on the
/// reference half-line starting at 0:
/// `U = H - (psi2 x + psi3 x^3) xi_delta(x) - (1 - xi_delta(x))`.
pub fn lift_profile<R: Real>(
    h: &[R],
    x: &[R],
    data: &BoundaryData<R>,
    delta: R,
) -> Result<Vec<R>> {
    let map = CutoffMap::new(delta, R::zero())?;
    Ok(h.iter()
        .zip(x)
        .map(|(&hv, &xv)| {
            let xi = map.xi(xv);
            hv - (data.psi2 * xv + data.psi3 * xv * xv * xv) * xi - (R::one() - xi)
        })
        .collect())
}

/// Inverse of [`lift_profile`].
pub fn unlift_profile<R: Real>(
    u: &[R],
    x: &[R],
    data: &BoundaryData<R>,
    delta: R,
) -> Result<Vec<R>> {
    let map = CutoffMap::new(delta, R::zero())?;
    Ok(u.iter()
        .zip(x)
        .map(|(&uv, &xv)| {
            let xi = map.xi(xv);
            uv + (data.psi2 * xv + data.psi3 * xv * xv * xv) * xi + (R::one() - xi)
        })
        .collect())
}
