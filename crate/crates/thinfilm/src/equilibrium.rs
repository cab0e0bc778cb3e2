//! Analytic steady states of the periodic system: the steady parabola, the
//! Lagrange multiplier, Young's contact-angle relation, and the
//! volume-constrained equilibrium contact point.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::solid::SolidProfile;

/// Interface energy coefficients. `b` is the liquid-gas coefficient and must
/// be positive; the Young relation further needs `(b + c - a)/b > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceEnergies<R> {
    pub a: R,
    pub b: R,
    pub c: R,
}

impl<R: Real> InterfaceEnergies<R> {
    pub fn new(a: R, b: R, c: R) -> Result<Self> {
        if a < R::zero() || c < R::zero() || !(b > R::zero()) {
            return Err(Error::EnergyConstraintViolation {
                a: a.as_f64(),
                b: b.as_f64(),
                c: c.as_f64(),
            });
        }
        Ok(InterfaceEnergies { a, b, c })
    }
}

/// Steady parabola `h(x) = coeff2 (x - L)^2 + apex` with its contact point
/// and Lagrange multiplier (reported for unit `b`; scale by `b` as needed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSolution<R> {
    pub lambda_bar: R,
    pub l: R,
    pub coeff2: R,
    pub apex: R,
    /// Lagrange multiplier at b = 1, i.e. `2 (g_x - k)/(L - Lambda_bar)`.
    pub lambda: R,
}

impl<R: Real> EquilibriumSolution<R> {
    pub fn eval(&self, x: R) -> R {
        let d = x - self.l;
        self.coeff2 * d * d + self.apex
    }

    pub fn eval_dx(&self, x: R) -> R {
        R::of(2.0) * self.coeff2 * (x - self.l)
    }

    /// Minimum film height over [Lambda_bar, L]; the slope is monotone so the
    /// minimum sits at one of the endpoints.
    pub fn min_h(&self) -> R {
        self.eval(self.lambda_bar).min(self.apex)
    }

    /// Exact volume of the liquid column under the parabola.
    pub fn film_volume(&self) -> R {
        let w = self.l - self.lambda_bar;
        self.coeff2 * w * w * w / R::of(3.0) + self.apex * w
    }
}

/// Construct the steady parabola pinned at `(Lambda_bar, g(Lambda_bar))` with
/// contact slope `g_x - k` and zero slope at the symmetry point L:
/// `coeff2 = (g_x - k)/(2 (Lambda_bar - L))`,
/// `apex = g(Lambda_bar) - ((g_x - k)/2)(Lambda_bar - L)`.
pub fn steady_profile<R: Real>(
    profile: &SolidProfile<R>,
    k: R,
    lambda_bar: R,
    l: R,
    t: R,
) -> Result<EquilibriumSolution<R>> {
    if !(lambda_bar < l) {
        return Err(Error::MapDegenerate {
            lambda: lambda_bar.as_f64(),
        });
    }
    let g = profile.eval_g_positive(lambda_bar, t)?;
    let gx = profile.eval_g_derivs(lambda_bar, t)?.gx;
    let slope = gx - k;
    let coeff2 = slope / (R::of(2.0) * (lambda_bar - l));
    let apex = g - slope * (lambda_bar - l) / R::of(2.0);
    let sol = EquilibriumSolution {
        lambda_bar,
        l,
        coeff2,
        apex,
        lambda: R::of(2.0) * slope / (l - lambda_bar),
    };
    let min_h = sol.min_h();
    if min_h <= R::zero() {
        return Err(Error::DegenerateFilm {
            min_h: min_h.as_f64(),
        });
    }
    Ok(sol)
}

/// Lagrange multiplier `lambda = 2 b (g_x - k)/(L - Lambda_bar)`; satisfies
/// `h_xx = -lambda/(2b)` on the steady parabola.
pub fn lagrange_multiplier<R: Real>(
    profile: &SolidProfile<R>,
    k: R,
    lambda_bar: R,
    l: R,
    t: R,
    energies: &InterfaceEnergies<R>,
) -> Result<R> {
    let gx = profile.eval_g_derivs(lambda_bar, t)?.gx;
    Ok(R::of(2.0) * energies.b * (gx - k) / (l - lambda_bar))
}

/// Young's relation `k = sqrt(1 - (a - c)/b) * g_x`.
pub fn young_angle<R: Real>(energies: &InterfaceEnergies<R>, gx: R) -> Result<R> {
    let radicand = R::one() - (energies.a - energies.c) / energies.b;
    if radicand <= R::zero() {
        return Err(Error::EnergyConstraintViolation {
            a: energies.a.as_f64(),
            b: energies.b.as_f64(),
            c: energies.c.as_f64(),
        });
    }
    if !(gx > R::zero()) {
        return Err(Error::ConstraintViolation(format!(
            "Young's relation needs a positive solid slope (got {})",
            gx.as_f64()
        )));
    }
    Ok(radicand.sqrt() * gx)
}

/// Total liquid volume of the candidate equilibrium at contact point
/// `lambda_bar`: numerically integrated solid piece plus the exact parabola
/// integral.
pub fn equilibrium_volume<R: Real>(
    profile: &SolidProfile<R>,
    k: R,
    lambda_bar: R,
    l: R,
    t: R,
) -> Result<R> {
    let sol = steady_profile(profile, k, lambda_bar, l, t)?;
    // composite Simpson for the solid piece; g is smooth away from wedge apexes
    let m = 512usize;
    let h = lambda_bar / R::of(m as f64);
    let mut acc = R::zero();
    if lambda_bar > R::zero() {
        for i in 0..m {
            let x0 = h * R::of(i as f64);
            let x1 = x0 + h;
            let xm = x0 + h * R::of(0.5);
            acc = acc
                + (profile.eval_g(x0, t)?
                    + R::of(4.0) * profile.eval_g(xm, t)?
                    + profile.eval_g(x1, t)?)
                    * h
                    / R::of(6.0);
        }
    }
    Ok(acc + sol.film_volume())
}

/// All equilibrium contact points whose total volume matches `v0`, found by a
/// 1000-point scan over (0, L) followed by bisection and secant polishing.
/// Roots are sorted ascending; the first entry is the designated solution.
pub fn solve_equilibrium_position<R: Real>(
    v0: R,
    profile: &SolidProfile<R>,
    k: R,
    l: R,
    t: R,
) -> Result<Vec<R>> {
    let nscan = 1000usize;
    let eps = l * R::of(1e-9);
    let f = |lam: R| -> Option<R> {
        equilibrium_volume(profile, k, lam, l, t)
            .ok()
            .map(|v| v - v0)
    };
    let mut vmin = R::infinity();
    let mut vmax = R::neg_infinity();
    let mut prev: Option<(R, R)> = None;
    let mut roots: Vec<R> = Vec::new();
    for i in 0..=nscan {
        let lam = eps + (l - R::of(2.0) * eps) * R::of(i as f64 / nscan as f64);
        let Some(fv) = f(lam) else {
            prev = None;
            continue;
        };
        let v = fv + v0;
        if v < vmin {
            vmin = v;
        }
        if v > vmax {
            vmax = v;
        }
        if fv == R::zero() {
            roots.push(lam);
            prev = Some((lam, fv));
            continue;
        }
        if let Some((plam, pfv)) = prev {
            if (pfv > R::zero()) != (fv > R::zero()) {
                roots.push(refine_root(&f, plam, pfv, lam, fv, v0));
            }
        }
        prev = Some((lam, fv));
    }
    if roots.is_empty() {
        return Err(Error::VolumeUnattainable {
            v0: v0.as_f64(),
            min: vmin.as_f64(),
            max: vmax.as_f64(),
        });
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < eps);
    Ok(roots)
}

fn refine_root<R: Real>(
    f: &dyn Fn(R) -> Option<R>,
    mut a: R,
    mut fa: R,
    mut b: R,
    mut fb: R,
    v0: R,
) -> R {
    let tol = (v0.abs() * R::of(1e-12)).max(R::of(1e-300));
    for _ in 0..200 {
        let mid = (a + b) * R::of(0.5);
        let Some(fm) = f(mid) else { break };
        if fm.abs() <= tol || (b - a).abs() < R::epsilon() * b.abs() {
            return mid;
        }
        if (fm > R::zero()) == (fa > R::zero()) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    // secant polish from the bracket endpoints
    let denom = fb - fa;
    if denom != R::zero() {
        let s = b - fb * (b - a) / denom;
        if s > a && s < b {
            return s;
        }
    }
    (a + b) * R::of(0.5)
}
