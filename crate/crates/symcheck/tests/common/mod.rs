//! Test-side oracle: textbook dense Gaussian elimination over exact scalars,
//! written independently of the library's streaming eliminator. Golden
//! dimensions in the acceptance suite were produced by this code path.

use symcheck::scalar::Scalar;
use symcheck::sparse::SparseMatrix;

/// Dense nullity by full forward elimination with partial (first-nonzero)
/// pivoting. No sharing with symcheck::sparse.
pub fn dense_nullity(rows: &[Vec<Scalar>], ncols: usize) -> usize {
    let mut a: Vec<Vec<Scalar>> = rows.to_vec();
    let nrows = a.len();
    let mut rank = 0usize;
    let mut row = 0usize;
    for col in 0..ncols {
        // find a pivot at or below `row`
        let mut piv = None;
        for r in row..nrows {
            if !a[r][col].is_zero() {
                piv = Some(r);
                break;
            }
        }
        let piv = match piv {
            Some(p) => p,
            None => continue,
        };
        a.swap(row, piv);
        let inv = a[row][col].inv();
        for c in col..ncols {
            a[row][c] = &a[row][c] * &inv;
        }
        for r in 0..nrows {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..ncols {
                    let sub = &f * &a[row][c];
                    a[r][c] = &a[r][c] - &sub;
                }
            }
        }
        row += 1;
        rank += 1;
        if row == nrows {
            break;
        }
    }
    ncols - rank
}

pub fn to_dense(m: &SparseMatrix) -> Vec<Vec<Scalar>> {
    m.rows
        .iter()
        .map(|row| {
            let mut out = vec![Scalar::zero(); m.ncols];
            for (c, v) in row {
                out[*c as usize] = v.clone();
            }
            out
        })
        .collect()
}
