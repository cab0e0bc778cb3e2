//! Conserved and dissipated quantities along a run, and decay-rate fitting
//! for the stability experiments.

use crate::equilibrium::InterfaceEnergies;
use crate::error::{Error, Result};
use crate::evolution::{FilmState, Geometry};
use crate::grid::{extend_with_ghosts, GhostClosure, Grid};
use crate::num::Real;
use crate::solid::SolidProfile;

/// One row of the diagnostics stream.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRecord<R> {
    pub t: R,
    pub mass: R,
    pub energy: R,
    pub dissipation: R,
    pub lambda: R,
    pub min_h: R,
    pub newton_iters: usize,
    pub dt: R,
}

/// Result of an exponential fit `value ~ prefactor * exp(-omega t)`.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit<R> {
    pub omega: R,
    pub prefactor: R,
    pub r_squared: R,
    pub window: (R, R),
}

fn closure_for<R: Real>(
    state: &FilmState<R>,
    profile: &SolidProfile<R>,
    k: R,
    j: R,
) -> Result<GhostClosure<R>> {
    let g = profile.eval_g_positive(state.lambda, state.t)?;
    let d = profile.eval_g_derivs(state.lambda, state.t)?;
    let psi3 = -R::of(2.0) * state.lambda * d.gt / (g * g * g);
    Ok(GhostClosure {
        left_slope: j * (d.gx - k),
        left_third: j * j * j * psi3,
        right_slope: R::zero(),
        right_third: R::zero(),
    })
}

fn jacobian<R: Real>(geometry: &Geometry<R>, lambda: R) -> R {
    match *geometry {
        Geometry::Periodic { l, lambda_bar } => (l - lambda) / (l - lambda_bar),
        Geometry::HalfLine { .. } => R::one(),
    }
}

/// Integral of g over [0, lambda] by composite Simpson on 512 panels —
/// the same convention the stepper's boundary flux uses, so mass telescopes.
pub fn solid_column<R: Real>(profile: &SolidProfile<R>, lambda: R, t: R) -> Result<R> {
    if lambda == R::zero() {
        return Ok(R::zero());
    }
    let m = 512usize;
    let h = lambda / R::of(m as f64);
    let mut acc = R::zero();
    for i in 0..m {
        let x0 = h * R::of(i as f64);
        let x1 = x0 + h;
        let xm = x0 + h * R::of(0.5);
        acc = acc
            + (profile.eval_g(x0, t)? + R::of(4.0) * profile.eval_g(xm, t)? + profile.eval_g(x1, t)?)
                * h
                / R::of(6.0);
    }
    Ok(acc)
}

/// Total liquid mass: solid column plus the film integral in physical
/// coordinates (trapezoid of J H on the reference grid).
pub fn total_mass<R: Real>(
    state: &FilmState<R>,
    profile: &SolidProfile<R>,
    geometry: &Geometry<R>,
    grid: &Grid<R>,
) -> Result<R> {
    let j = jacobian(geometry, state.lambda);
    let jh: Vec<R> = state.h.iter().map(|&h| j * h).collect();
    let solid = match geometry {
        Geometry::Periodic { .. } => solid_column(profile, state.lambda, state.t)?,
        // the half-line film is attached at Lambda; no solid column is
        // enclosed by the truncated domain
        Geometry::HalfLine { .. } => R::zero(),
    };
    Ok(solid + grid.trapezoid(&jh))
}

/// Total interfacial energy `a int_0^Lambda g_x^2 + b int |h_x|^2 +
/// c int_Lambda^L g_x^2`, film integrals in physical coordinates.
pub fn total_energy<R: Real>(
    state: &FilmState<R>,
    profile: &SolidProfile<R>,
    geometry: &Geometry<R>,
    grid: &Grid<R>,
    energies: &InterfaceEnergies<R>,
    k: R,
) -> Result<R> {
    let j = jacobian(geometry, state.lambda);
    let dx = grid.dx();
    let closure = closure_for(state, profile, k, j)?;
    let ext = extend_with_ghosts(&state.h, grid, &closure);
    let n = grid.n;
    // centered slopes, exact at the boundaries by ghost construction
    let hx2: Vec<R> = (0..n)
        .map(|i| {
            let s = (ext[i + 3] - ext[i + 1]) / (R::of(2.0) * dx * j);
            s * s
        })
        .collect();
    let film_b = energies.b * grid.trapezoid(&hx2) * j;

    // solid-slope integrals by Simpson over each physical subinterval
    let gx2 = |x: R| -> Result<R> {
        let gx = profile.eval_g_derivs(x, state.t)?.gx;
        Ok(gx * gx)
    };
    let simpson = |lo: R, hi: R| -> Result<R> {
        if hi <= lo {
            return Ok(R::zero());
        }
        let m = 256usize;
        let h = (hi - lo) / R::of(m as f64);
        let mut acc = R::zero();
        for i in 0..m {
            let x0 = lo + h * R::of(i as f64);
            acc = acc
                + (gx2(x0)? + R::of(4.0) * gx2(x0 + h * R::of(0.5))? + gx2(x0 + h)?) * h
                    / R::of(6.0);
        }
        Ok(acc)
    };
    let (wet, dry) = match *geometry {
        Geometry::Periodic { l, .. } => (
            simpson(R::zero(), state.lambda)?,
            simpson(state.lambda, l)?,
        ),
        Geometry::HalfLine { x_max, .. } => (
            R::zero(),
            simpson(state.lambda, state.lambda + x_max)?,
        ),
    };
    Ok(energies.a * wet + film_b + energies.c * dry)
}

/// Dissipation magnitude `2 b int h^3 |h_xxx|^2 dx` in physical coordinates.
pub fn dissipation_rate<R: Real>(
    state: &FilmState<R>,
    geometry: &Geometry<R>,
    grid: &Grid<R>,
    b: R,
) -> Result<R> {
    let min_h = state.min_h();
    if min_h <= R::zero() {
        return Err(Error::DegenerateFilm {
            min_h: min_h.as_f64(),
        });
    }
    let j = jacobian(geometry, state.lambda);
    // one-sided stencils at the ends avoid needing the ghost closure here
    let d3 = crate::grid::third_derivative(&state.h, grid)?;
    let j3 = j * j * j;
    let integrand: Vec<R> = state
        .h
        .iter()
        .zip(&d3)
        .map(|(&h, &t3)| {
            let phys = t3 / j3;
            h * h * h * phys * phys
        })
        .collect();
    Ok(R::of(2.0) * b * grid.trapezoid(&integrand) * j)
}

/// Least-squares exponential fit on the log of a positive series.
pub fn fit_decay<R: Real>(series: &[(R, R)]) -> Result<DecayFit<R>> {
    if series.len() < 10 || series.iter().any(|&(_, v)| v <= R::zero()) {
        return Err(Error::NonPositiveSeries);
    }
    let n = R::of(series.len() as f64);
    let (mut st, mut sy, mut stt, mut sty) = (R::zero(), R::zero(), R::zero(), R::zero());
    for &(t, v) in series {
        let y = v.ln();
        st = st + t;
        sy = sy + y;
        stt = stt + t * t;
        sty = sty + t * y;
    }
    let denom = n * stt - st * st;
    if denom == R::zero() {
        return Err(Error::NonPositiveSeries);
    }
    let slope = (n * sty - st * sy) / denom;
    let intercept = (sy - slope * st) / n;
    let mean_y = sy / n;
    let (mut ss_res, mut ss_tot) = (R::zero(), R::zero());
    for &(t, v) in series {
        let y = v.ln();
        let yhat = intercept + slope * t;
        ss_res = ss_res + (y - yhat) * (y - yhat);
        ss_tot = ss_tot + (y - mean_y) * (y - mean_y);
    }
    let r_squared = if ss_tot == R::zero() {
        R::one()
    } else {
        (R::one() - ss_res / ss_tot).max(R::zero())
    };
    Ok(DecayFit {
        omega: -slope,
        prefactor: intercept.exp(),
        r_squared,
        window: (series[0].0, series[series.len() - 1].0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::steady_profile;
    use crate::solid::{Poly, SolidKind};
    use approx::assert_relative_eq;

    fn ramp(g0: f64, gx: f64) -> SolidProfile<f64> {
        SolidProfile::new(SolidKind::Stationary {
            shape: Poly(vec![g0, gx]),
        })
    }

    #[test]
    fn mass_of_flat_film() {
        // g = 1 on (0, 0.5), h = 1 on (0.5, 2) -> total 2
        let p = ramp(1.0, 0.0);
        let geom = Geometry::Periodic {
            l: 2.0,
            lambda_bar: 0.5,
        };
        let grid = geom.reference_grid(51).unwrap();
        let state = FilmState::sample(&grid, 0.5, 0.0, |_| 1.0);
        let m = total_mass(&state, &p, &geom, &grid).unwrap();
        assert_relative_eq!(m, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn mass_of_steady_parabola_matches_closed_form() {
        let p = ramp(0.9, 0.2);
        let eq = steady_profile(&p, 0.1, 0.5, 2.0, 0.0).unwrap();
        let geom = Geometry::Periodic {
            l: 2.0,
            lambda_bar: 0.5,
        };
        let grid = geom.reference_grid(401).unwrap();
        let state = FilmState::sample(&grid, 0.5, 0.0, |x| eq.eval(x));
        let m = total_mass(&state, &p, &geom, &grid).unwrap();
        let solid = 0.9 * 0.5 + 0.1 * 0.25;
        let expect = solid + eq.film_volume();
        assert_relative_eq!(m, expect, max_relative = 1e-6);
    }

    #[test]
    fn energy_of_flat_configuration_is_zero() {
        let p = ramp(1.0, 0.0);
        let geom = Geometry::Periodic {
            l: 2.0,
            lambda_bar: 0.5,
        };
        let grid = geom.reference_grid(51).unwrap();
        let state = FilmState::sample(&grid, 0.5, 0.0, |_| 1.0);
        let e = InterfaceEnergies::new(1.0, 1.0, 1.0).unwrap();
        let en = total_energy(&state, &p, &geom, &grid, &e, 0.0).unwrap();
        assert!(en.abs() < 1e-14, "energy {en}");
    }

    #[test]
    fn energy_of_steady_parabola() {
        // b int |h_x|^2 = 4 coeff2^2 (L - Lambda_bar)^3 / 3 = 0.005
        let p = ramp(0.9, 0.2);
        let geom = Geometry::Periodic {
            l: 2.0,
            lambda_bar: 0.5,
        };
        let grid = geom.reference_grid(201).unwrap();
        let eq = steady_profile(&p, 0.1, 0.5, 2.0, 0.0).unwrap();
        let state = FilmState::sample(&grid, 0.5, 0.0, |x| eq.eval(x));
        let e = InterfaceEnergies::new(0.0, 1.0, 0.0).unwrap();
        let en = total_energy(&state, &p, &geom, &grid, &e, 0.1).unwrap();
        assert_relative_eq!(en, 0.005, max_relative = 1e-4);
        // doubling b doubles the film term
        let e2 = InterfaceEnergies::new(0.0, 2.0, 0.0).unwrap();
        let en2 = total_energy(&state, &p, &geom, &grid, &e2, 0.1).unwrap();
        assert_relative_eq!(en2, 2.0 * en, max_relative = 1e-12);
    }

    #[test]
    fn dissipation_of_steady_parabola_vanishes() {
        let p = ramp(0.9, 0.2);
        let geom = Geometry::Periodic {
            l: 2.0,
            lambda_bar: 0.5,
        };
        let grid = geom.reference_grid(51).unwrap();
        let eq = steady_profile(&p, 0.1, 0.5, 2.0, 0.0).unwrap();
        let state = FilmState::sample(&grid, 0.5, 0.0, |x| eq.eval(x));
        let d = dissipation_rate(&state, &geom, &grid, 1.0).unwrap();
        assert!(d <= 1e-20, "dissipation {d}");
    }

    #[test]
    fn dissipation_of_cubic_profile() {
        // h = 1 + eps x^3 on (0, 1): 2 int h^3 (6 eps)^2 ~ 72 eps^2
        let geom: Geometry<f64> = Geometry::HalfLine {
            x_max: 1.0,
            far_height: 1.0,
        };
        let grid = geom.reference_grid(201).unwrap();
        let eps = 1e-3;
        let state = FilmState::sample(&grid, 0.0, 0.0, |x| 1.0 + eps * x * x * x);
        let d = dissipation_rate(&state, &geom, &grid, 1.0).unwrap();
        assert_relative_eq!(d, 7.2e-5, max_relative = 2e-2);
    }

    #[test]
    fn decay_fit_exact_exponential() {
        let series: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.1;
                (t, 3.0 * (-0.7 * t).exp())
            })
            .collect();
        let fit = fit_decay(&series).unwrap();
        assert_relative_eq!(fit.omega, 0.7, epsilon = 1e-10);
        assert_relative_eq!(fit.prefactor, 3.0, max_relative = 1e-10);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn decay_fit_constant_and_errors() {
        let series: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 2.5)).collect();
        let fit = fit_decay(&series).unwrap();
        assert_relative_eq!(fit.omega, 0.0, epsilon = 1e-12);
        assert!(matches!(
            fit_decay(&series[..5]),
            Err(Error::NonPositiveSeries)
        ));
        let bad: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, -1.0)).collect();
        assert!(matches!(fit_decay(&bad), Err(Error::NonPositiveSeries)));
    }
}
