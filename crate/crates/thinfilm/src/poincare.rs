//! Discrete Poincaré-type constant: minimize the Rayleigh quotient
//! `int |phi_xxx|^2 / int |phi_x|^2` over grid functions satisfying the
//! contact-point Robin condition `phi_x = bc_ratio * phi`, the symmetry
//! condition `phi_x = 0` at the right end, and (optionally) zero mean.
//!
//! Constraints are eliminated exactly by solving for three pivot unknowns,
//! then the reduced generalized eigenproblem is solved by Cholesky reduction
//! to a symmetric standard problem.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::num::Real;

/// Smallest constrained Rayleigh quotient and companions.
#[derive(Debug, Clone)]
pub struct PoincareResult<R> {
    pub mu: R,
    pub n: usize,
    /// Reciprocal of mu: the constant of the lower-order estimate.
    pub constant_c: R,
    /// Supremum of `|phi(contact)|^2 / int |phi_xxx|^2` over the admissible
    /// space; infinite when the third-derivative form is singular there.
    pub trace_constant: R,
    /// The `n_modes` smallest quotients, ascending.
    pub modes: Vec<R>,
}

fn midpoint_first_difference<R: Real + nalgebra::RealField>(grid: &Grid<R>) -> DMatrix<R> {
    // (n-1) x n forward differences to cell midpoints; kernel = constants,
    // no checkerboard mode (a centered D1 and centered D3 share the
    // oscillatory nullvector (-1)^i, which wrecks the generalized problem)
    let n = grid.n;
    let dx = grid.dx();
    let mut d = DMatrix::<R>::zeros(n - 1, n);
    for i in 0..n - 1 {
        d[(i, i)] = -R::one() / dx;
        d[(i, i + 1)] = R::one() / dx;
    }
    d
}

fn face_third_difference<R: Real + nalgebra::RealField>(grid: &Grid<R>) -> DMatrix<R> {
    // (n-3) x n compact third differences at interior faces; kernel =
    // quadratics. The outermost rows stand in for the two boundary faces as
    // well (their quadrature weight is doubled by the caller).
    let n = grid.n;
    let dx = grid.dx();
    let inv = R::one() / (dx * dx * dx);
    let mut d = DMatrix::<R>::zeros(n - 3, n);
    for r in 0..n - 3 {
        d[(r, r)] = -inv;
        d[(r, r + 1)] = R::of(3.0) * inv;
        d[(r, r + 2)] = -R::of(3.0) * inv;
        d[(r, r + 3)] = inv;
    }
    d
}

fn trapezoid_weights<R: Real>(grid: &Grid<R>) -> Vec<R> {
    let n = grid.n;
    let dx = grid.dx();
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                dx * R::of(0.5)
            } else {
                dx
            }
        })
        .collect()
}

/// Minimize the discrete quotient on `grid` under the Robin condition with
/// coefficient `bc_ratio` at the left end, symmetry at the right end, and
/// zero mean when `zero_mean` is set. Returns the `n_modes` smallest
/// quotients alongside the minimum.
pub fn discrete_poincare<R: Real + nalgebra::RealField>(
    grid: &Grid<R>,
    bc_ratio: R,
    n_modes: usize,
    zero_mean: bool,
) -> Result<PoincareResult<R>> {
    let n = grid.n;
    if n < 50 {
        return Err(Error::GridTooSmall { n });
    }
    // scale the stencil matrices to O(1) entries (dx and dx^3 respectively);
    // forming D3^T W D3 directly carries dx^-6 magnitudes that wreck the
    // eigensolve beyond n ~ 400. The quotient is restored by dx^-4 at the end.
    let dx = grid.dx();
    let cub = dx * dx * dx;
    let d1 = midpoint_first_difference(grid) * dx;
    let d3 = face_third_difference(grid) * cub;
    // midpoint-rule weights: one cell per D1 row; one face per D3 row, with
    // the end rows covering the boundary faces too
    let w1 = vec![dx; n - 1];
    let mut w3 = vec![dx; n - 3];
    w3[0] = dx * R::of(2.0);
    w3[n - 4] = dx * R::of(2.0);

    // constraint rows: one-sided second-order first derivatives at the ends
    let mut c_rows: Vec<DVector<R>> = Vec::new();
    let half = R::of(0.5);
    let mut left = DVector::<R>::zeros(n);
    left[0] = -R::of(3.0) * half - bc_ratio * dx;
    left[1] = R::of(4.0) * half;
    left[2] = -half;
    c_rows.push(left);
    let mut right = DVector::<R>::zeros(n);
    right[n - 1] = R::of(3.0) * half;
    right[n - 2] = -R::of(4.0) * half;
    right[n - 3] = half;
    c_rows.push(right);
    if zero_mean {
        let wq = trapezoid_weights(grid);
        c_rows.push(DVector::<R>::from_iterator(n, wq.into_iter()));
    }
    let m = c_rows.len();

    // eliminate pivot unknowns: phi_0 for the left row, phi_{n-1} for the
    // right row, phi_{n-2} for the mean row
    let pivots: Vec<usize> = if zero_mean {
        vec![0, n - 1, n - 2]
    } else {
        vec![0, n - 1]
    };
    let free: Vec<usize> = (0..n).filter(|i| !pivots.contains(i)).collect();
    let mut cp = DMatrix::<R>::zeros(m, m);
    let mut cf = DMatrix::<R>::zeros(m, free.len());
    for (r, row) in c_rows.iter().enumerate() {
        for (pc, &p) in pivots.iter().enumerate() {
            cp[(r, pc)] = row[p];
        }
        for (fc, &f) in free.iter().enumerate() {
            cf[(r, fc)] = row[f];
        }
    }
    let cp_inv = cp
        .try_inverse()
        .ok_or(Error::SingularConstraint)?;
    let pivot_expr = -(cp_inv * cf); // pivot values = pivot_expr * free values

    // nullspace basis: columns indexed by free unknowns
    let nf = free.len();
    let mut z = DMatrix::<R>::zeros(n, nf);
    for (fc, &f) in free.iter().enumerate() {
        z[(f, fc)] = R::one();
        for (pc, &p) in pivots.iter().enumerate() {
            z[(p, fc)] = pivot_expr[(pc, fc)];
        }
    }

    let wd3 = {
        let mut t = d3.clone();
        for i in 0..n - 3 {
            for j in 0..n {
                t[(i, j)] *= w3[i];
            }
        }
        t
    };
    let wd1 = {
        let mut t = d1.clone();
        for i in 0..n - 1 {
            for j in 0..n {
                t[(i, j)] *= w1[i];
            }
        }
        t
    };
    let a_full = d3.transpose() * wd3;
    let b_full = d1.transpose() * wd1;
    let a_r = z.transpose() * &a_full * &z;
    let b_r = z.transpose() * &b_full * &z;
    // symmetrize against accumulation noise
    let a_r = (&a_r + a_r.transpose()) * R::of(0.5);
    let b_r = (&b_r + b_r.transpose()) * R::of(0.5);

    // B_r is positive definite (the compact D1 kernel is constants, and the
    // Robin row excludes those); reduce to a standard symmetric problem.
    let chol = b_r.clone().cholesky().ok_or(Error::SingularConstraint)?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or(Error::SingularConstraint)?;
    let mmat = &l_inv * &a_r * l_inv.transpose();
    let mmat = (&mmat + mmat.transpose()) * R::of(0.5);
    let eig = mmat.symmetric_eigen();
    let quart = dx * dx * dx * dx;
    let mut vals: Vec<R> = eig.eigenvalues.iter().map(|&v| v / quart).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mu = vals[0];

    // trace constant sup |phi(0)|^2 / phi^T A phi = z0^T A_r^{-1} z0
    let z0 = {
        let mut v = DVector::<R>::zeros(nf);
        for fc in 0..nf {
            v[fc] = z[(0, fc)];
        }
        v
    };
    let trace_constant = match a_r.clone().cholesky() {
        Some(ch) => {
            let y = ch.solve(&z0);
            z0.dot(&y) * cub * cub
        }
        None => <R as Real>::of(f64::INFINITY),
    };

    let modes: Vec<R> = vals.iter().copied().take(n_modes.max(1)).collect();
    Ok(PoincareResult {
        mu,
        n,
        constant_c: R::one() / mu,
        trace_constant,
        modes,
    })
}
