//! Banded LU with partial pivoting and the bordered (arrowhead) solve used
//! by the implicit stepper: a banded block plus one dense column and row.

use crate::error::{Error, Result};
use crate::num::Real;

/// Band matrix in LAPACK-style storage with `kl` extra rows for pivoting fill-in.
/// Entry (i, j) lives at storage row `kl + ku + i - j`.
pub struct Banded<R> {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<R>,
}

impl<R: Real> Banded<R> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let rows = 2 * kl + ku + 1;
        Banded {
            n,
            kl,
            ku,
            data: vec![R::zero(); rows * n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let r = self.kl + self.ku + i - j;
        r * self.n + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> R {
        let d = i as isize - j as isize;
        if d > self.kl as isize || -d > (self.ku + self.kl) as isize {
            R::zero()
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Set entry (i, j); must be within the declared band `|i-j| <= kl/ku`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: R) {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(
            i as isize - j as isize <= self.kl as isize
                && j as isize - i as isize <= self.ku as isize,
            "entry ({i},{j}) outside band"
        );
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut R {
        let k = self.idx(i, j);
        &mut self.data[k]
    }

    /// In-place LU factorization with row partial pivoting (dgbtf2-style).
    pub fn factor(mut self) -> Result<BandedLu<R>> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let kv = kl + ku; // effective upper bandwidth after pivoting
        let mut piv = vec![0usize; n];
        for j in 0..n {
            let imax = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.get(j, j).abs();
            for i in (j + 1)..=imax {
                let v = self.get(i, j).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[j] = p;
            if best == R::zero() || !best.is_finite() {
                return Err(Error::SingularMatrix);
            }
            let cmax = (j + kv).min(n - 1);
            if p != j {
                for c in j..=cmax {
                    let a = self.get(j, c);
                    let b = self.get(p, c);
                    *self.at(j, c) = b;
                    *self.at(p, c) = a;
                }
            }
            let pivot = self.get(j, j);
            for i in (j + 1)..=imax {
                let l = self.get(i, j) / pivot;
                *self.at(i, j) = l;
                for c in (j + 1)..=cmax {
                    let u = self.get(j, c);
                    if u != R::zero() {
                        *self.at(i, c) = self.get(i, c) - l * u;
                    }
                }
            }
        }
        Ok(BandedLu { mat: self, piv })
    }
}

/// Factored band matrix.
pub struct BandedLu<R> {
    mat: Banded<R>,
    piv: Vec<usize>,
}

impl<R: Real> BandedLu<R> {
    /// Solve A x = b in place.
    pub fn solve(&self, b: &mut [R]) {
        let n = self.mat.n;
        let kl = self.mat.kl;
        let kv = self.mat.kl + self.mat.ku;
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                b.swap(p, j);
            }
            let bj = b[j];
            let imax = (j + kl).min(n - 1);
            for i in (j + 1)..=imax {
                b[i] = b[i] - self.mat.get(i, j) * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] = b[j] / self.mat.get(j, j);
            let bj = b[j];
            let imin = j.saturating_sub(kv);
            for i in imin..j {
                b[i] = b[i] - self.mat.get(i, j) * bj;
            }
        }
    }
}

/// Solve the bordered system
/// `[B  c; r^T  d] [x; y] = [rhs_b; rhs_s]`
/// where `B` is banded, via two banded solves and a scalar Schur complement.
pub fn solve_arrowhead<R: Real>(
    b: Banded<R>,
    col: &[R],
    row: &[R],
    d: R,
    rhs_b: &[R],
    rhs_s: R,
) -> Result<(Vec<R>, R)> {
    let lu = b.factor()?;
    let mut y1 = rhs_b.to_vec();
    lu.solve(&mut y1);
    let mut y2 = col.to_vec();
    lu.solve(&mut y2);
    let rty1: R = row.iter().zip(&y1).map(|(&a, &b)| a * b).sum();
    let rty2: R = row.iter().zip(&y2).map(|(&a, &b)| a * b).sum();
    let denom = d - rty2;
    if denom == R::zero() || !denom.is_finite() {
        return Err(Error::SingularMatrix);
    }
    let y = (rhs_s - rty1) / denom;
    let x: Vec<R> = y1.iter().zip(&y2).map(|(&a, &b)| a - b * y).collect();
    Ok((x, y))
}
