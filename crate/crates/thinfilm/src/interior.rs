//! Squeeze flow under the solid: the velocity coefficient A(x, t) in the
//! interior region 0 < x < Lambda, the flux matched at the contact point, and
//! the general Navier-slip variant of the interior ODE.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::num::Real;
use crate::solid::SolidProfile;

/// Slip condition at the liquid-solid interface. No-slip (beta = infinity)
/// is a distinguished variant, never a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slip<R> {
    NoSlip,
    Navier(R),
}

/// A(x) sampled over [0, Lambda] at a fixed time.
#[derive(Debug, Clone)]
pub struct InteriorSolution<R> {
    pub x: Vec<R>,
    pub a: Vec<R>,
    pub slip: Slip<R>,
    pub t: R,
}

/// Explicit no-slip solution `A = -6 x g_t / g^2` of the interior ODE
/// `A' + 2 (g_x/g) A + 6 g_t/g^2 = 0`, valid because `g_xt = 0`.
pub fn solve_a_noslip<R: Real>(profile: &SolidProfile<R>, x: R, t: R) -> Result<R> {
    let g = profile.eval_g_positive(x, t)?;
    let gt = profile.eval_g_derivs(x, t)?.gt;
    Ok(-R::of(6.0) * x * gt / (g * g))
}

/// Integrate the general-slip interior ODE `A' + r1 A + r2 = 0`, `A(0) = 0`,
/// with `r1 = g_x (1/beta + g/3) / (g (1/beta + g/6))` and
/// `r2 = g_t / (g (1/beta + g/6))`, by classical RK4 on the grid nodes.
/// Substeps are chosen so the total step count is at least `min_steps`
/// (default 512 via [`solve_a_slip`]).
pub fn solve_a_slip_with_steps<R: Real>(
    profile: &SolidProfile<R>,
    beta: R,
    t: R,
    grid: &Grid<R>,
    min_steps: usize,
) -> Result<InteriorSolution<R>> {
    if !(beta > R::zero()) {
        return Err(Error::ConstraintViolation(format!(
            "slip coefficient must be positive (got {})",
            beta.as_f64()
        )));
    }
    let inv_beta = R::one() / beta;
    let rhs = |x: R, a: R| -> Result<R> {
        let g = profile.eval_g_positive(x, t)?;
        let d = profile.eval_g_derivs(x, t)?;
        let sixth = g * R::of(1.0 / 6.0);
        let third = g * R::of(1.0 / 3.0);
        let denom = g * (inv_beta + sixth);
        let r1 = d.gx * (inv_beta + third) / denom;
        let r2 = d.gt / denom;
        Ok(-(r1 * a + r2))
    };
    let n = grid.n;
    let sub = (min_steps + n - 2) / (n - 1);
    let hsub = grid.dx() / R::of(sub as f64);
    let half = R::of(0.5);
    let mut a = R::zero();
    let mut out = Vec::with_capacity(n);
    out.push(a);
    for i in 0..n - 1 {
        let mut x = grid.node(i);
        for _ in 0..sub {
            let k1 = rhs(x, a)?;
            let k2 = rhs(x + hsub * half, a + hsub * half * k1)?;
            let k3 = rhs(x + hsub * half, a + hsub * half * k2)?;
            let k4 = rhs(x + hsub, a + hsub * k3)?;
            a = a + hsub * (k1 + R::of(2.0) * (k2 + k3) + k4) / R::of(6.0);
            x = x + hsub;
            if !a.is_finite() {
                return Err(Error::IntegrationFailure(format!(
                    "non-finite A near x = {}",
                    x.as_f64()
                )));
            }
        }
        out.push(a);
    }
    Ok(InteriorSolution {
        x: grid.nodes(),
        a: out,
        slip: Slip::Navier(beta),
        t,
    })
}

/// General-slip solve with the default resolution (512 RK4 steps minimum).
pub fn solve_a_slip<R: Real>(
    profile: &SolidProfile<R>,
    beta: R,
    t: R,
    grid: &Grid<R>,
) -> Result<InteriorSolution<R>> {
    solve_a_slip_with_steps(profile, beta, t, grid, 512)
}

/// Third derivative of the film imposed at the contact point by flux
/// matching: `h_xxx = A / (3 h)`.
pub fn contact_third_derivative<R: Real>(a_at_lambda: R, h_at_lambda: R) -> Result<R> {
    if h_at_lambda <= R::zero() {
        return Err(Error::DegenerateFilm {
            min_h: h_at_lambda.as_f64(),
        });
    }
    Ok(a_at_lambda / (R::of(3.0) * h_at_lambda))
}

/// Mass flux arriving from the interior region: `A h^2 / 6`.
pub fn interior_flux<R: Real>(a: R, h: R) -> Result<R> {
    if h <= R::zero() {
        return Err(Error::DegenerateFilm { min_h: h.as_f64() });
    }
    Ok(a * h * h / R::of(6.0))
}

/// Mass flux leaving into the film region, `h^3 h_xxx / 2`, normalized so
/// that with the contact relation `A = 3 h h_xxx` it matches the interior
/// flux `A h^2 / 6` identically.
pub fn exterior_flux<R: Real>(h: R, hxxx: R) -> Result<R> {
    if h <= R::zero() {
        return Err(Error::DegenerateFilm { min_h: h.as_f64() });
    }
    Ok(h * h * h * hxxx / R::of(2.0))
}
