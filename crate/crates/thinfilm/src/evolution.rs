//! Implicit time integration of the coupled unknowns (H on the reference
//! grid, Lambda).
//!
//! The moving domain is pulled back to a fixed reference interval and the
//! PDE is discretized in conservative ALE flux form,
//! `d/dt (J H) + d/dxbar (F_phys - w H) = 0`, with half-width boundary cells
//! so that trapezoid-weighted row sums telescope to the boundary fluxes
//! exactly. Each step solves the coupled nonlinear system for (H, Lambda)
//! by Newton iteration on a banded-plus-arrowhead Jacobian.

use crate::error::{Error, Result};
use crate::grid::{divergence_from_faces, extend_with_ghosts, face_third, GhostClosure, Grid};
use crate::linalg::{solve_arrowhead, Banded};
use crate::num::Real;
use crate::solid::SolidProfile;

/// Film heights on the reference grid plus the contact point.
#[derive(Debug, Clone, PartialEq)]
pub struct FilmState<R> {
    pub h: Vec<R>,
    pub lambda: R,
    pub t: R,
}

impl<R: Real> FilmState<R> {
    pub fn sample(grid: &Grid<R>, lambda: R, t: R, f: impl Fn(R) -> R) -> Self {
        FilmState {
            h: grid.nodes().iter().map(|&x| f(x)).collect(),
            lambda,
            t,
        }
    }

    pub fn min_h(&self) -> R {
        self.h.iter().copied().fold(R::infinity(), R::min)
    }
}

/// Backward differentiation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Bdf1,
    Bdf2,
}

/// Time stepping controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig<R> {
    pub dt: R,
    pub scheme: Scheme,
    pub newton_tol: R,
    pub newton_maxit: usize,
    pub dt_min: R,
    pub dt_max: R,
}

impl<R: Real> StepperConfig<R> {
    pub fn with_dt(dt: R) -> Self {
        StepperConfig {
            dt,
            scheme: Scheme::Bdf1,
            newton_tol: R::of(1e-11),
            newton_maxit: 12,
            dt_min: dt / R::of(1024.0),
            dt_max: dt,
        }
    }
}

/// Spatial setting: the periodic-cell system on (Lambda, L) with symmetry at
/// L, or the half-line system truncated at distance `x_max` from the contact
/// point with far-field height `far_height`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry<R> {
    Periodic { l: R, lambda_bar: R },
    HalfLine { x_max: R, far_height: R },
}

impl<R: Real> Geometry<R> {
    /// Fixed reference grid the solver marches on.
    pub fn reference_grid(&self, n: usize) -> Result<Grid<R>> {
        match *self {
            Geometry::Periodic { l, lambda_bar } => Grid::new(n, lambda_bar, l),
            Geometry::HalfLine { x_max, .. } => Grid::new(n, R::zero(), x_max),
        }
    }

    /// Jacobian dx/dxbar of the moving-to-fixed map at contact point `lambda`.
    fn jacobian(&self, lambda: R) -> Result<R> {
        match *self {
            Geometry::Periodic { l, lambda_bar } => {
                if lambda >= l {
                    return Err(Error::MapDegenerate {
                        lambda: lambda.as_f64(),
                    });
                }
                Ok((l - lambda) / (l - lambda_bar))
            }
            Geometry::HalfLine { .. } => Ok(R::one()),
        }
    }

    /// Mesh velocity dx/dt at reference coordinate `xbar`.
    fn mesh_velocity(&self, lambda_dot: R, xbar: R) -> R {
        match *self {
            Geometry::Periodic { l, lambda_bar } => lambda_dot * (l - xbar) / (l - lambda_bar),
            Geometry::HalfLine { .. } => lambda_dot,
        }
    }
}

/// Per-step diagnostics handed to the run sink.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo<R> {
    pub newton_iters: usize,
    pub dt: R,
    pub lambda_dot: R,
}

type Source<R> = Box<dyn Fn(R, R) -> R + Send + Sync>;

/// One solver instance per run; single-threaded stepping.
pub struct Solver<'a, R: Real> {
    pub profile: &'a SolidProfile<R>,
    pub k: R,
    pub geometry: Geometry<R>,
    pub grid: Grid<R>,
    pub cfg: StepperConfig<R>,
    /// Manufactured-solution forcing added to the PDE rows; production runs
    /// leave this None.
    pub source: Option<Source<R>>,
}

struct Hist<'s, R> {
    old: &'s FilmState<R>,
    old2: Option<&'s FilmState<R>>,
    /// BDF weights (a0, a1, a2) so that a0 y_new + a1 y_old + a2 y_old2
    /// approximates dt * dy/dt.
    a: [R; 3],
}

fn bdf_weights<R: Real>(scheme: Scheme, ratio: Option<R>) -> [R; 3] {
    match (scheme, ratio) {
        (Scheme::Bdf1, _) | (Scheme::Bdf2, None) => [R::one(), -R::one(), R::zero()],
        (Scheme::Bdf2, Some(r)) => {
            let one = R::one();
            [
                (one + R::of(2.0) * r) / (one + r),
                -(one + r),
                r * r / (one + r),
            ]
        }
    }
}

impl<'a, R: Real> Solver<'a, R> {
    pub fn new(
        profile: &'a SolidProfile<R>,
        k: R,
        geometry: Geometry<R>,
        n: usize,
        cfg: StepperConfig<R>,
    ) -> Result<Self> {
        Ok(Solver {
            profile,
            k,
            geometry,
            grid: geometry.reference_grid(n)?,
            cfg,
            source: None,
        })
    }

    /// Residual of one BDF1 step from `old` to `new`; length n+1. Rows 0..n
    /// are the conservative PDE rows scaled by dt (half-line mode replaces
    /// the last with the far-field Dirichlet row); row n is the contact
    /// closure `H(0) - g(Lambda)`.
    pub fn assemble_residual(
        &self,
        new: &FilmState<R>,
        old: &FilmState<R>,
        dt: R,
    ) -> Result<Vec<R>> {
        self.residual(
            new,
            &Hist {
                old,
                old2: None,
                a: bdf_weights(Scheme::Bdf1, None),
            },
            dt,
        )
    }

    fn residual(&self, new: &FilmState<R>, hist: &Hist<R>, dt: R) -> Result<Vec<R>> {
        let n = self.grid.n;
        let dx = self.grid.dx();
        let min_h = new.min_h();
        if min_h <= R::zero() {
            return Err(Error::DegenerateFilm {
                min_h: min_h.as_f64(),
            });
        }
        let [a0, a1, a2] = hist.a;
        let j_new = self.geometry.jacobian(new.lambda)?;
        let j_old = self.geometry.jacobian(hist.old.lambda)?;
        let lambda_dot = {
            let mut acc = a0 * new.lambda + a1 * hist.old.lambda;
            if let Some(o2) = hist.old2 {
                acc = acc + a2 * o2.lambda;
            }
            acc / dt
        };

        let g = self.profile.eval_g_positive(new.lambda, new.t)?;
        let d = self.profile.eval_g_derivs(new.lambda, new.t)?;
        let psi2 = d.gx - self.k;
        let psi3 = -R::of(2.0) * new.lambda * d.gt / (g * g * g);
        let closure = GhostClosure {
            left_slope: j_new * psi2,
            left_third: j_new * j_new * j_new * psi3,
            right_slope: R::zero(),
            right_third: R::zero(),
        };
        let ext = extend_with_ghosts(&new.h, &self.grid, &closure);

        let j3 = j_new * j_new * j_new;
        let half = R::of(0.5);
        let cube = |v: R| v * v * v;
        let mut faces = Vec::with_capacity(n + 1);
        // imposed left flux: squeeze inflow plus the mesh advection of the
        // contact height. BDF1 uses the Simpson average of g over the sweep,
        // which telescopes the solid-column increment exactly (discrete mass
        // conservation); BDF2 needs the instantaneous g(Lambda_new) to keep
        // its second order in time.
        let gbar = {
            let (lo, hi) = (hist.old.lambda, new.lambda);
            if lo == hi || hist.old2.is_some() {
                g
            } else {
                let mid = (lo + hi) * half;
                (self.profile.eval_g(lo, new.t)?
                    + R::of(4.0) * self.profile.eval_g(mid, new.t)?
                    + self.profile.eval_g(hi, new.t)?)
                    / R::of(6.0)
            }
        };
        faces.push(-R::of(2.0) * new.lambda * d.gt - lambda_dot * gbar);
        for face in 1..n {
            let xf = self.grid.a + dx * (R::of(face as f64) - half);
            let h3 = (cube(ext[face + 1]) + cube(ext[face + 2])) * half;
            let f_phys = h3 * face_third(&ext, face, dx) / j3;
            let w = self.geometry.mesh_velocity(lambda_dot, xf);
            let hf = (new.h[face - 1] + new.h[face]) * half;
            faces.push(f_phys - w * hf);
        }
        match self.geometry {
            // symmetry: both physical and mesh flux vanish at x = L
            Geometry::Periodic { .. } => faces.push(R::zero()),
            // far field is flat (zero physical flux) but fluid streams
            // through the moving truncation boundary
            Geometry::HalfLine { .. } => faces.push(-lambda_dot * new.h[n - 1]),
        }

        let div = divergence_from_faces(&faces, n, dx);
        let mut res = Vec::with_capacity(n + 1);
        for i in 0..n {
            let mut m = a0 * j_new * new.h[i] + a1 * j_old * hist.old.h[i];
            if let Some(o2) = hist.old2 {
                m = m + a2 * self.geometry.jacobian(o2.lambda)? * o2.h[i];
            }
            let mut r = m + dt * div[i];
            if let Some(src) = &self.source {
                r = r - dt * src(self.grid.node(i), new.t);
            }
            res.push(r);
        }
        if let Geometry::HalfLine { far_height, .. } = self.geometry {
            res[n - 1] = new.h[n - 1] - far_height;
        }
        res.push(new.h[0] - g);
        Ok(res)
    }

    fn newton_solve(&self, hist: &Hist<R>, dt: R, t_new: R) -> Result<(FilmState<R>, usize)> {
        let n = self.grid.n;
        // the flux-divergence term of the residual cannot be evaluated below
        // roundoff ~ ulp * dt * h^3 / dx^4; on fine grids that floor sits
        // above a fixed absolute tolerance, so the tolerance must track it
        let dx = self.grid.dx();
        let hmax = hist
            .old
            .h
            .iter()
            .fold(R::one(), |m, &h| m.max(h.abs()));
        let floor =
            R::epsilon() * R::of(16.0) * dt * hmax * hmax * hmax / (dx * dx * dx * dx);
        let tol = self.cfg.newton_tol.max(floor);
        let mut new = FilmState {
            h: hist.old.h.clone(),
            lambda: hist.old.lambda,
            t: t_new,
        };
        let diverged = |e: Error| match e {
            Error::DegenerateFilm { .. } | Error::MapDegenerate { .. } | Error::SingularMatrix => {
                Error::NewtonDiverged {
                    t: t_new.as_f64(),
                    dt: dt.as_f64(),
                }
            }
            other => other,
        };
        for it in 0..=self.cfg.newton_maxit {
            let res = self.residual(&new, hist, dt).map_err(diverged)?;
            let rmax = res.iter().fold(R::zero(), |m, &r| m.max(r.abs()));
            if rmax <= tol && rmax.is_finite() {
                return Ok((new, it));
            }
            if it == self.cfg.newton_maxit || !rmax.is_finite() {
                return Err(Error::NewtonDiverged {
                    t: t_new.as_f64(),
                    dt: dt.as_f64(),
                });
            }

            // banded block by colored finite differences: columns 7 apart
            // influence disjoint row ranges (half-bandwidth 3)
            let eps = R::of(1e-7);
            let mut band = Banded::zeros(n, 3, 3);
            let mut probe = new.clone();
            for color in 0..7usize {
                let mut steps = vec![R::zero(); n];
                probe.h.copy_from_slice(&new.h);
                for j in (color..n).step_by(7) {
                    steps[j] = eps * (R::one() + new.h[j].abs());
                    probe.h[j] = probe.h[j] + steps[j];
                }
                let rp = self.residual(&probe, hist, dt).map_err(diverged)?;
                for j in (color..n).step_by(7) {
                    let lo = j.saturating_sub(3);
                    let hi = (j + 3).min(n - 1);
                    for i in lo..=hi {
                        band.set(i, j, (rp[i] - res[i]) / steps[j]);
                    }
                }
            }
            // dense Lambda column by finite differences
            let lstep = eps * (R::one() + new.lambda.abs());
            probe.h.copy_from_slice(&new.h);
            probe.lambda = new.lambda + lstep;
            let rl = self.residual(&probe, hist, dt).map_err(diverged)?;
            probe.lambda = new.lambda;
            let col: Vec<R> = (0..n).map(|i| (rl[i] - res[i]) / lstep).collect();
            // closure row is analytic: d/dH0 = 1, d/dLambda = -g_x
            let mut row = vec![R::zero(); n];
            row[0] = R::one();
            let dval = -self.profile.eval_g_derivs(new.lambda, t_new)?.gx;

            let rhs_b: Vec<R> = res[..n].iter().map(|&r| -r).collect();
            let (dh, dl) =
                solve_arrowhead(band, &col, &row, dval, &rhs_b, -res[n]).map_err(diverged)?;
            for i in 0..n {
                new.h[i] = new.h[i] + dh[i];
            }
            new.lambda = new.lambda + dl;
        }
        unreachable!()
    }

    /// Eulerian time derivative of h at the contact point from the spatial
    /// operator, converted to a contact velocity via the kinematic relation
    /// `Lambda_dot = (dh/dt - g_t)/k`. Diagnostic only; the implicit closure
    /// is authoritative.
    pub fn contact_velocity_diag(&self, state: &FilmState<R>) -> Result<R> {
        let d = self.profile.eval_g_derivs(state.lambda, state.t)?;
        let g = self.profile.eval_g_positive(state.lambda, state.t)?;
        let j = self.geometry.jacobian(state.lambda)?;
        let dx = self.grid.dx();
        let psi3 = -R::of(2.0) * state.lambda * d.gt / (g * g * g);
        let closure = GhostClosure {
            left_slope: j * (d.gx - self.k),
            left_third: j * j * j * psi3,
            right_slope: R::zero(),
            right_third: R::zero(),
        };
        let ext = extend_with_ghosts(&state.h, &self.grid, &closure);
        let cube = |v: R| v * v * v;
        let f0 = -R::of(2.0) * state.lambda * d.gt;
        let f1 = (cube(state.h[0]) + cube(state.h[1])) * R::of(0.5) * face_third(&ext, 1, dx)
            / (j * j * j);
        let dhdt = -(f1 - f0) / (j * dx * R::of(0.5));
        // use the contact angle the grid actually realizes over the first
        // half-cell, g_x - (H1 - H0)/(J dx) -> k; with the nominal k the
        // diagnostic carries an O(dx) bias proportional to Lambda_dot h_xx
        let k_eff = d.gx - (state.h[1] - state.h[0]) / (j * dx);
        contact_velocity(dhdt, d.gt, k_eff)
    }

    /// March from `initial` to `t_end` with adaptive dt (halving on Newton
    /// failure, gentle regrowth on success), emitting one record per
    /// accepted step.
    pub fn run(
        &self,
        initial: FilmState<R>,
        t_end: R,
        mut sink: impl FnMut(&FilmState<R>, &StepInfo<R>),
    ) -> Result<FilmState<R>> {
        let rupture_floor = initial.min_h() * R::of(1e-6);
        let mut old = initial;
        let mut old2: Option<(FilmState<R>, R)> = None;
        let mut dt = self.cfg.dt.max(self.cfg.dt_min).min(self.cfg.dt_max);
        let tiny = R::of(1e-12) * t_end.abs().max(R::one());
        while old.t < t_end - tiny {
            let mut step_dt = dt.min(t_end - old.t);
            let (new, iters) = loop {
                let hist = match (&old2, self.cfg.scheme) {
                    (Some((prev, dt_prev)), Scheme::Bdf2) => Hist {
                        old: &old,
                        old2: Some(prev),
                        a: bdf_weights(Scheme::Bdf2, Some(step_dt / *dt_prev)),
                    },
                    _ => Hist {
                        old: &old,
                        old2: None,
                        a: bdf_weights(Scheme::Bdf1, None),
                    },
                };
                match self.newton_solve(&hist, step_dt, old.t + step_dt) {
                    Ok(pair) => break pair,
                    Err(Error::NewtonDiverged { t, dt: _ }) => {
                        step_dt = step_dt * R::of(0.5);
                        dt = step_dt;
                        if step_dt < self.cfg.dt_min {
                            return Err(Error::NewtonDiverged {
                                t,
                                dt: step_dt.as_f64(),
                            });
                        }
                    }
                    Err(e) => return Err(e),
                }
            };
            let min_h = new.min_h();
            if min_h <= rupture_floor {
                return Err(Error::Rupture {
                    t: new.t.as_f64(),
                    min_h: min_h.as_f64(),
                });
            }
            let info = StepInfo {
                newton_iters: iters,
                dt: step_dt,
                lambda_dot: (new.lambda - old.lambda) / step_dt,
            };
            sink(&new, &info);
            old2 = Some((old, step_dt));
            old = new;
            dt = (dt * R::of(1.5)).min(self.cfg.dt_max);
        }
        Ok(old)
    }
}

/// Kinematic contact velocity `(dh/dt - g_t)/k` from Eulerian data at the
/// contact point.
pub fn contact_velocity<R: Real>(dhdt_at_contact: R, gt: R, k: R) -> Result<R> {
    if k == R::zero() {
        return Err(Error::ZeroContactAngle);
    }
    Ok((dhdt_at_contact - gt) / k)
}
