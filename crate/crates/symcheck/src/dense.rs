//! Small dense exact matrices and vectors. Everything here is O(n^3)-naive;
//! model dimensions stay at or below 16 (so(m) coordinates below 120).

use crate::scalar::Scalar;
use crate::sparse::{dense_to_sparse, Echelon};

/// Row-major dense matrix over exact scalars.
#[derive(Clone, PartialEq)]
pub struct DMat {
    pub nrows: usize,
    pub ncols: usize,
    pub a: Vec<Scalar>,
}

impl DMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DMat {
            nrows,
            ncols,
            a: vec![Scalar::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DMat::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Scalar::one();
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut m = DMat::zeros(nrows, ncols);
        for r in 0..nrows {
            for c in 0..ncols {
                *m.at_mut(r, c) = f(r, c);
            }
        }
        m
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        &self.a[r * self.ncols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Scalar {
        &mut self.a[r * self.ncols + c]
    }

    pub fn transpose(&self) -> DMat {
        DMat::from_fn(self.ncols, self.nrows, |r, c| self.at(c, r).clone())
    }

    pub fn add(&self, o: &DMat) -> DMat {
        assert_eq!((self.nrows, self.ncols), (o.nrows, o.ncols));
        DMat::from_fn(self.nrows, self.ncols, |r, c| self.at(r, c) + o.at(r, c))
    }

    pub fn sub(&self, o: &DMat) -> DMat {
        assert_eq!((self.nrows, self.ncols), (o.nrows, o.ncols));
        DMat::from_fn(self.nrows, self.ncols, |r, c| self.at(r, c) - o.at(r, c))
    }

    pub fn neg(&self) -> DMat {
        DMat::from_fn(self.nrows, self.ncols, |r, c| -self.at(r, c))
    }

    pub fn scale(&self, s: &Scalar) -> DMat {
        DMat::from_fn(self.nrows, self.ncols, |r, c| self.at(r, c) * s)
    }

    pub fn mul(&self, o: &DMat) -> DMat {
        assert_eq!(self.ncols, o.nrows);
        let mut m = DMat::zeros(self.nrows, o.ncols);
        for r in 0..self.nrows {
            for k in 0..self.ncols {
                let v = self.at(r, k);
                if v.is_zero() {
                    continue;
                }
                for c in 0..o.ncols {
                    if !o.at(k, c).is_zero() {
                        let add = v * o.at(k, c);
                        *m.at_mut(r, c) += &add;
                    }
                }
            }
        }
        m
    }

    pub fn commutator(&self, o: &DMat) -> DMat {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.ncols, v.len());
        (0..self.nrows)
            .map(|r| {
                let mut acc = Scalar::zero();
                for c in 0..self.ncols {
                    if !v[c].is_zero() && !self.at(r, c).is_zero() {
                        acc += &(self.at(r, c) * &v[c]);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn trace(&self) -> Scalar {
        assert_eq!(self.nrows, self.ncols);
        let mut acc = Scalar::zero();
        for i in 0..self.nrows {
            acc += self.at(i, i);
        }
        acc
    }

    /// Frobenius pairing Tr(A B^t) = sum of entrywise products.
    pub fn frob(&self, o: &DMat) -> Scalar {
        assert_eq!((self.nrows, self.ncols), (o.nrows, o.ncols));
        let mut acc = Scalar::zero();
        for (x, y) in self.a.iter().zip(o.a.iter()) {
            if !x.is_zero() && !y.is_zero() {
                acc += &(x * y);
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|x| x.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|r| (0..r).all(|c| self.at(r, c) == self.at(c, r)))
    }

    pub fn is_skew(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|r| (0..=r).all(|c| *self.at(r, c) == -self.at(c, r)))
    }

    /// Flatten a skew matrix into upper-triangle coordinates (r < c), entry <M e_c, e_r>.
    pub fn skew_coords(&self) -> Vec<Scalar> {
        assert!(self.nrows == self.ncols);
        let n = self.nrows;
        let mut v = Vec::with_capacity(n * (n - 1) / 2);
        for r in 0..n {
            for c in r + 1..n {
                v.push(self.at(r, c).clone());
            }
        }
        v
    }

    /// Kernel basis of the matrix as a linear map, via the streaming eliminator.
    pub fn kernel(&self) -> Vec<Vec<Scalar>> {
        let mut ech = Echelon::<Scalar>::new(self.ncols);
        for r in 0..self.nrows {
            let row: Vec<(u32, Scalar)> = (0..self.ncols)
                .filter(|&c| !self.at(r, c).is_zero())
                .map(|c| (c as u32, self.at(r, c).clone()))
                .collect();
            ech.offer(row);
        }
        ech.nullspace()
    }

    pub fn rank(&self) -> usize {
        let mut ech = Echelon::<Scalar>::new(self.ncols);
        for r in 0..self.nrows {
            ech.offer(dense_to_sparse(&self.a[r * self.ncols..(r + 1) * self.ncols]));
        }
        ech.rank()
    }
}

impl std::fmt::Debug for DMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "DMat {}x{} [", self.nrows, self.ncols)?;
        for r in 0..self.nrows {
            let row: Vec<String> = (0..self.ncols).map(|c| format!("{}", self.at(r, c))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    assert_eq!(a.len(), b.len());
    let mut acc = Scalar::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        if !x.is_zero() && !y.is_zero() {
            acc += &(x * y);
        }
    }
    acc
}

pub fn axpy(y: &mut [Scalar], a: &Scalar, x: &[Scalar]) {
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        if !xi.is_zero() {
            *yi += &(a * xi);
        }
    }
}

/// Solve M x = b exactly when a solution exists (M square or tall, any rank).
/// Returns None when inconsistent.
pub fn solve_exact(m: &DMat, b: &[Scalar]) -> Option<Vec<Scalar>> {
    assert_eq!(m.nrows, b.len());
    // augmented elimination over columns of M plus the rhs
    let mut ech = Echelon::<Scalar>::new(m.ncols + 1);
    for r in 0..m.nrows {
        let mut row: Vec<(u32, Scalar)> = (0..m.ncols)
            .filter(|&c| !m.at(r, c).is_zero())
            .map(|c| (c as u32, m.at(r, c).clone()))
            .collect();
        if !b[r].is_zero() {
            row.push((m.ncols as u32, b[r].clone()));
        }
        ech.offer(row);
    }
    // solution exists iff the last column is not a pivot; read it off the nullspace.
    let ns = ech.nullspace();
    for v in ns {
        if !v[m.ncols].is_zero() {
            let lam = v[m.ncols].inv();
            return Some(
                v[..m.ncols]
                    .iter()
                    .map(|x| -&(x * &lam))
                    .collect(),
            );
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    #[test]
    fn mul_and_commutator() {
        let a = DMat::from_fn(2, 2, |r, c| s((r * 2 + c) as i64));
        let id = DMat::identity(2);
        assert_eq!(a.mul(&id), a);
        assert!(a.commutator(&a).is_zero());
    }

    #[test]
    fn solve_small_system() {
        let m = DMat::from_fn(2, 2, |r, c| s([[2, 1], [1, 3]][r][c]));
        let x = solve_exact(&m, &[s(5), s(10)]).unwrap();
        assert_eq!(x, vec![s(1), s(3)]);
        // inconsistent system
        let m2 = DMat::from_fn(2, 1, |r, _| s([1, 1][r]));
        assert!(solve_exact(&m2, &[s(1), s(2)]).is_none());
    }

    #[test]
    fn kernel_matches_rank() {
        let m = DMat::from_fn(3, 4, |r, c| s(((r + 1) * (c + 1)) as i64));
        assert_eq!(m.rank() + m.kernel().len(), 4);
    }
}
