//! Uniform-grid finite differences for the conservative fourth-order operator
//! `(h^3 h_xxx)_x`, with ghost-node closures for the contact-point and
//! symmetry boundary conditions.
//!
//! Boundary cells are half-width, so summing `flux_divergence` against
//! trapezoid weights telescopes exactly to the boundary-flux difference;
//! this is the discrete backbone of mass conservation.

use crate::error::{Error, Result};
use crate::num::Real;

/// Uniform grid with `n >= 7` nodes on [a, b].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<R> {
    pub n: usize,
    pub a: R,
    pub b: R,
}

impl<R: Real> Grid<R> {
    pub fn new(n: usize, a: R, b: R) -> Result<Self> {
        if n < 7 {
            return Err(Error::GridTooSmall { n });
        }
        if !(b > a) {
            return Err(Error::ConstraintViolation(format!(
                "grid endpoints must satisfy a < b (got {} >= {})",
                a.as_f64(),
                b.as_f64()
            )));
        }
        Ok(Grid { n, a, b })
    }

    #[inline]
    pub fn dx(&self) -> R {
        (self.b - self.a) / R::of((self.n - 1) as f64)
    }

    #[inline]
    pub fn node(&self, i: usize) -> R {
        self.a + self.dx() * R::of(i as f64)
    }

    pub fn nodes(&self) -> Vec<R> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Trapezoid quadrature of nodal samples.
    pub fn trapezoid(&self, f: &[R]) -> R {
        let half = R::of(0.5);
        let inner: R = f[1..f.len() - 1].iter().copied().sum();
        (inner + (f[0] + f[f.len() - 1]) * half) * self.dx()
    }
}

/// Boundary closure imposed through ghost nodes, in grid coordinates:
/// one-sided slope and third derivative at each end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostClosure<R> {
    pub left_slope: R,
    pub left_third: R,
    pub right_slope: R,
    pub right_third: R,
}

impl<R: Real> GhostClosure<R> {
    /// Symmetry closure on both ends (slope and third derivative zero).
    pub fn symmetric() -> Self {
        GhostClosure {
            left_slope: R::zero(),
            left_third: R::zero(),
            right_slope: R::zero(),
            right_third: R::zero(),
        }
    }
}

/// Ghost values `[h(-1), h(-2), h(n), h(n+1)]` solving the centered slope and
/// third-derivative conditions at each boundary node.
pub fn assemble_ghosts<R: Real>(h: &[R], grid: &Grid<R>, closure: &GhostClosure<R>) -> [R; 4] {
    let n = h.len();
    let dx = grid.dx();
    let two = R::of(2.0);
    let third = R::of(1.0 / 3.0);
    // left: slope condition with its (dx^3/3) h''' Taylor correction, so the
    // ghost is exact on cubics, then the centered third-derivative condition
    // (h2 - 2h1 + 2hm1 - hm2)/(2dx^3) = q.
    let cub = dx * dx * dx;
    let hm1 = h[1] - two * dx * closure.left_slope - third * cub * closure.left_third;
    let hm2 = h[2] - two * h[1] + two * hm1 - two * cub * closure.left_third;
    // mirrored on the right
    let hp0 = h[n - 2] + two * dx * closure.right_slope + third * cub * closure.right_third;
    let hp1 = two * hp0 - two * h[n - 2] + h[n - 3] + two * cub * closure.right_third;
    [hm1, hm2, hp0, hp1]
}

/// Copy `h` into a buffer with two ghost nodes on each side
/// (`ext[i + 2]` is node `i`).
pub fn extend_with_ghosts<R: Real>(
    h: &[R],
    grid: &Grid<R>,
    closure: &GhostClosure<R>,
) -> Vec<R> {
    let n = h.len();
    let [hm1, hm2, hp0, hp1] = assemble_ghosts(h, grid, closure);
    let mut ext = Vec::with_capacity(n + 4);
    ext.push(hm2);
    ext.push(hm1);
    ext.extend_from_slice(h);
    ext.push(hp0);
    ext.push(hp1);
    ext
}

/// Nodal third derivative; centered 4-point stencil in the interior,
/// second-order one-sided stencils at the two nodes near each boundary.
/// Exact on polynomials of degree <= 4.
pub fn third_derivative<R: Real>(h: &[R], grid: &Grid<R>) -> Result<Vec<R>> {
    let n = h.len();
    if n < 7 {
        return Err(Error::GridTooSmall { n });
    }
    let dx = grid.dx();
    let denom = R::of(2.0) * dx * dx * dx;
    let c0 = [-5.0, 18.0, -24.0, 14.0, -3.0];
    let c1 = [-3.0, 10.0, -12.0, 6.0, -1.0];
    let mut out = vec![R::zero(); n];
    let stencil = |c: &[f64; 5], f: &[R]| -> R {
        c.iter()
            .zip(f)
            .map(|(&ci, &fi)| R::of(ci) * fi)
            .sum::<R>()
            / denom
    };
    out[0] = stencil(&c0, &h[0..5]);
    out[1] = stencil(&c1, &h[0..5]);
    for i in 2..n - 2 {
        out[i] = (h[i + 2] - R::of(2.0) * h[i + 1] + R::of(2.0) * h[i - 1] - h[i - 2]) / denom;
    }
    // mirrored one-sided stencils; odd derivative flips sign
    let rev: Vec<R> = h[n - 5..n].iter().rev().copied().collect();
    out[n - 2] = -stencil(&c1, &rev[0..5]);
    out[n - 1] = -stencil(&c0, &rev[0..5]);
    Ok(out)
}

/// Third derivative at interior face `i+1/2` from the ghost-extended buffer.
/// `face` ranges over 1..n-1; face i sits between nodes i-1 and i.
#[inline]
pub fn face_third<R: Real>(ext: &[R], face: usize, dx: R) -> R {
    // nodes (face-2 .. face+1) around the face midpoint
    let i = face + 2; // ext index of the node right of the face
    let three = R::of(3.0);
    (ext[i + 1] - three * ext[i] + three * ext[i - 1] - ext[i - 2]) / (dx * dx * dx)
}

/// Divergence of the flux `h^3 h_xxx` with half-cell boundary treatment.
/// Face values of `h^3` are arithmetic means of nodal cubes; the two boundary
/// faces use the closure's imposed third derivatives exactly.
pub fn flux_divergence<R: Real>(
    h: &[R],
    grid: &Grid<R>,
    closure: &GhostClosure<R>,
) -> Result<Vec<R>> {
    let n = h.len();
    if n < 7 {
        return Err(Error::GridTooSmall { n });
    }
    let min_h = h.iter().copied().fold(R::infinity(), R::min);
    if min_h <= R::zero() {
        return Err(Error::DegenerateFilm {
            min_h: min_h.as_f64(),
        });
    }
    let dx = grid.dx();
    let ext = extend_with_ghosts(h, grid, closure);
    let fluxes = face_fluxes_raw(&ext, n, dx, closure);
    Ok(divergence_from_faces(&fluxes, n, dx))
}

/// Face fluxes `h^3 h_xxx` at the n+1 faces (0 and n are the boundary nodes).
fn face_fluxes_raw<R: Real>(ext: &[R], n: usize, dx: R, closure: &GhostClosure<R>) -> Vec<R> {
    let half = R::of(0.5);
    let cube = |v: R| v * v * v;
    let mut f = Vec::with_capacity(n + 1);
    f.push(cube(ext[2]) * closure.left_third);
    for face in 1..n {
        let h3 = (cube(ext[face + 1]) + cube(ext[face + 2])) * half;
        f.push(h3 * face_third(ext, face, dx));
    }
    f.push(cube(ext[n + 1]) * closure.right_third);
    f
}

/// Divergence with half cells at both ends: summing against trapezoid
/// weights telescopes to `F[n] - F[0]`.
pub fn divergence_from_faces<R: Real>(fluxes: &[R], n: usize, dx: R) -> Vec<R> {
    let two = R::of(2.0);
    let mut d = Vec::with_capacity(n);
    d.push((fluxes[1] - fluxes[0]) * two / dx);
    for i in 1..n - 1 {
        d.push((fluxes[i + 1] - fluxes[i]) / dx);
    }
    d.push((fluxes[n] - fluxes[n - 1]) * two / dx);
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n: usize) -> Grid<f64> {
        Grid::new(n, 0.0, 1.0).unwrap()
    }

    fn sample(g: &Grid<f64>, f: impl Fn(f64) -> f64) -> Vec<f64> {
        g.nodes().iter().map(|&x| f(x)).collect()
    }

    #[test]
    fn grid_too_small() {
        assert!(matches!(Grid::<f64>::new(5, 0.0, 1.0), Err(Error::GridTooSmall { n: 5 })));
    }

    #[test]
    fn third_derivative_exact_on_cubics() {
        let g = grid(21);
        let h = sample(&g, |_| 3.7);
        for v in third_derivative(&h, &g).unwrap() {
            assert_relative_eq!(v, 0.0, epsilon = 1e-10);
        }
        let h = sample(&g, |x| x * x);
        for v in third_derivative(&h, &g).unwrap() {
            assert_relative_eq!(v, 0.0, epsilon = 1e-9);
        }
        let h = sample(&g, |x| x * x * x);
        for v in third_derivative(&h, &g).unwrap() {
            assert_relative_eq!(v, 6.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn flux_divergence_annihilates_low_order() {
        let g = grid(31);
        let sym = GhostClosure::symmetric();
        let h = sample(&g, |_| 1.0);
        for v in flux_divergence(&h, &g, &sym).unwrap() {
            assert_relative_eq!(v, 0.0, epsilon = 1e-12);
        }
        // affine profile: h_xxx = 0, but the slope closure must match
        let affine = GhostClosure {
            left_slope: 0.1,
            left_third: 0.0,
            right_slope: 0.1,
            right_third: 0.0,
        };
        let h = sample(&g, |x| 1.0 + 0.1 * x);
        for v in flux_divergence(&h, &g, &affine).unwrap() {
            assert_relative_eq!(v, 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn flux_divergence_rejects_nonpositive_film() {
        let g = grid(11);
        let mut h = sample(&g, |_| 1.0);
        h[4] = -0.1;
        assert!(matches!(
            flux_divergence(&h, &g, &GhostClosure::symmetric()),
            Err(Error::DegenerateFilm { .. })
        ));
    }

    #[test]
    fn flux_divergence_converges_second_order() {
        // h = 1 + eps x^3; exact divergence 54 eps^2 x^2 (1 + eps x^3)^2
        let eps = 0.1;
        let f = |x: f64| 1.0 + eps * x * x * x;
        let exact = |x: f64| 54.0 * eps * eps * x * x * (1.0 + eps * x * x * x).powi(2);
        let mut errs = Vec::new();
        for &n in &[41usize, 81, 161] {
            let g = grid(n);
            let closure = GhostClosure {
                left_slope: 0.0,
                left_third: 6.0 * eps,
                right_slope: 3.0 * eps,
                right_third: 6.0 * eps,
            };
            let h = sample(&g, f);
            let div = flux_divergence(&h, &g, &closure).unwrap();
            let err = g
                .nodes()
                .iter()
                .zip(&div)
                .skip(1)
                .take(n - 2)
                .map(|(&x, &d)| (d - exact(x)).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        let o1 = (errs[0] / errs[1]).log2();
        let o2 = (errs[1] / errs[2]).log2();
        assert!(o1 > 1.8 && o1 < 2.2, "order {o1}");
        assert!(o2 > 1.8 && o2 < 2.2, "order {o2}");
    }

    #[test]
    fn ghosts_reproduce_imposed_slope() {
        let g = grid(11);
        let h = sample(&g, |_| 1.0);
        let closure = GhostClosure {
            left_slope: 0.5,
            left_third: 0.0,
            right_slope: 0.0,
            right_third: 0.0,
        };
        let [hm1, hm2, hp0, hp1] = assemble_ghosts(&h, &g, &closure);
        let dx = g.dx();
        assert_relative_eq!((h[1] - hm1) / (2.0 * dx), 0.5, epsilon = 1e-13);
        assert_relative_eq!(
            (h[2] - 2.0 * h[1] + 2.0 * hm1 - hm2) / (2.0 * dx * dx * dx),
            0.0,
            epsilon = 1e-10
        );
        // symmetric right closure on constant data mirrors the interior
        assert_relative_eq!(hp0, h[g.n - 2], epsilon = 1e-14);
        assert_relative_eq!(hp1, h[g.n - 3], epsilon = 1e-14);
    }

    #[test]
    fn ghosts_mirror_symmetric_data() {
        let g = grid(11);
        // data symmetric about b = 1
        let h = sample(&g, |x| 1.0 + (x - 1.0) * (x - 1.0));
        let [_, _, hp0, hp1] = assemble_ghosts(&h, &g, &GhostClosure::symmetric());
        assert_relative_eq!(hp0, h[g.n - 2], epsilon = 1e-13);
        assert_relative_eq!(hp1, h[g.n - 3], epsilon = 1e-13);
    }

    #[test]
    fn discrete_conservation_telescopes() {
        let g = grid(41);
        let closure = GhostClosure {
            left_slope: -0.3,
            left_third: 1.7,
            right_slope: 0.2,
            right_third: -0.4,
        };
        let h = sample(&g, |x| 1.0 + 0.2 * (3.0 * x).sin());
        let div = flux_divergence(&h, &g, &closure).unwrap();
        let total = g.trapezoid(&div);
        let ext = extend_with_ghosts(&h, &g, &closure);
        let fl = h[0].powi(3) * closure.left_third;
        let fr = h[g.n - 1].powi(3) * closure.right_third;
        let _ = ext;
        assert_relative_eq!(total, fr - fl, max_relative = 1e-11);
    }

    #[test]
    fn steady_parabola_has_zero_discrete_third_derivative() {
        let g: Grid<f64> = Grid::new(41, 0.5, 2.0).unwrap();
        let coeff2 = -1.0 / 30.0;
        let h: Vec<f64> = g.nodes().iter().map(|&x| coeff2 * (x - 2.0).powi(2) + 1.075).collect();
        let closure = GhostClosure {
            left_slope: 2.0 * coeff2 * (0.5 - 2.0),
            left_third: 0.0,
            right_slope: 0.0,
            right_third: 0.0,
        };
        let ext = extend_with_ghosts(&h, &g, &closure);
        let dx = g.dx();
        for face in 1..g.n {
            assert_relative_eq!(face_third(&ext, face, dx), 0.0, epsilon = 1e-9);
        }
        let d3 = third_derivative(&h, &g).unwrap();
        for v in d3 {
            assert_relative_eq!(v, 0.0, epsilon = 1e-9);
        }
    }
}
