//! Sparse exact matrices, rank and nullspace over Q, Q(sqrt d) and GF(p).
//!
//! The work-horse is [`Echelon`], a streaming eliminator: rows are offered one at
//! a time, reduced against the pivot rows accumulated so far, and either vanish
//! or contribute a new pivot. Large constraint systems are never materialized.

use std::collections::BinaryHeap;
use std::io::{BufRead, Write};

use crate::error::{Result, SymError};
use crate::scalar::{FieldSpec, FpCtx, Scalar};

/// One sparse row: strictly increasing column indices, no explicit zeros.
pub type SparseVec<T> = Vec<(u32, T)>;

/// Element operations the eliminator needs. Implemented by exact scalars and by
/// prime-field elements carrying their modulus.
pub trait Elem: Clone + PartialEq {
    fn is_zero(&self) -> bool;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Elem for Scalar {
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn one_like(&self) -> Self {
        Scalar::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// GF(p) element; the modulus rides along so the `Elem` impl stays context-free.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Fp {
    pub v: u64,
    pub p: u64,
}

impl Fp {
    fn ctx(&self) -> FpCtx {
        FpCtx::new(self.p)
    }
}

impl Elem for Fp {
    fn is_zero(&self) -> bool {
        self.v == 0
    }
    fn one_like(&self) -> Self {
        Fp { v: 1, p: self.p }
    }
    fn add(&self, o: &Self) -> Self {
        Fp {
            v: self.ctx().add(self.v, o.v),
            p: self.p,
        }
    }
    fn sub(&self, o: &Self) -> Self {
        Fp {
            v: self.ctx().sub(self.v, o.v),
            p: self.p,
        }
    }
    fn mul(&self, o: &Self) -> Self {
        Fp {
            v: self.ctx().mul(self.v, o.v),
            p: self.p,
        }
    }
    fn div(&self, o: &Self) -> Self {
        Fp {
            v: self.ctx().mul(self.v, self.ctx().inv(o.v)),
            p: self.p,
        }
    }
    fn neg(&self) -> Self {
        Fp {
            v: if self.v == 0 { 0 } else { self.p - self.v },
            p: self.p,
        }
    }
}

/// Streaming row-echelon accumulator.
pub struct Echelon<T: Elem> {
    ncols: usize,
    rows: Vec<SparseVec<T>>,
    col_pivot: Vec<Option<u32>>,
    scratch: Vec<Option<T>>,
}

impl<T: Elem> Echelon<T> {
    pub fn new(ncols: usize) -> Self {
        Echelon {
            ncols,
            rows: Vec::new(),
            col_pivot: vec![None; ncols],
            scratch: vec![None; ncols],
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_full_rank(&self) -> bool {
        self.rows.len() == self.ncols
    }

    /// Reduce `row` against the pivots; keep it as a new pivot if nonzero.
    /// Returns true when the row increased the rank.
    pub fn offer(&mut self, row: SparseVec<T>) -> bool {
        if row.is_empty() {
            return false;
        }
        let mut heap: BinaryHeap<std::cmp::Reverse<u32>> = BinaryHeap::new();
        for (c, v) in row {
            debug_assert!((c as usize) < self.ncols);
            if !v.is_zero() {
                heap.push(std::cmp::Reverse(c));
                self.scratch[c as usize] = Some(v);
            }
        }
        let mut out: SparseVec<T> = Vec::new();
        while let Some(std::cmp::Reverse(c)) = heap.pop() {
            let a = match self.scratch[c as usize].take() {
                Some(a) if !a.is_zero() => a,
                _ => continue, // duplicate heap entry or cancelled value
            };
            match self.col_pivot[c as usize] {
                Some(r) => {
                    // pivot row has leading coefficient 1 at column c
                    let prow = &self.rows[r as usize];
                    for (cc, vv) in prow[1..].iter() {
                        let delta = a.mul(vv);
                        let cell = &mut self.scratch[*cc as usize];
                        match cell {
                            Some(old) => {
                                let nv = old.sub(&delta);
                                if nv.is_zero() {
                                    *cell = None;
                                } else {
                                    *cell = Some(nv);
                                }
                            }
                            None => {
                                *cell = Some(delta.neg());
                                heap.push(std::cmp::Reverse(*cc));
                            }
                        }
                    }
                }
                None => out.push((c, a)),
            }
        }
        if out.is_empty() {
            return false;
        }
        // normalize leading coefficient to 1
        let lead = out[0].1.clone();
        if lead != lead.one_like() {
            for (_, v) in out.iter_mut() {
                *v = v.div(&lead);
            }
        }
        self.col_pivot[out[0].0 as usize] = Some(self.rows.len() as u32);
        self.rows.push(out);
        true
    }

    /// Pivot-normalized reduced-echelon nullspace basis, one vector per free
    /// column in ascending order, each scaled so its first nonzero entry is 1.
    pub fn nullspace(mut self) -> Vec<Vec<T>>
    where
        T: ZeroMake,
    {
        // full back-substitution: visit pivot rows in descending pivot column
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&r| std::cmp::Reverse(self.rows[r][0].0));
        for &r in &order {
            let row = std::mem::take(&mut self.rows[r]);
            let mut new_row: SparseVec<T> = vec![row[0].clone()];
            let mut acc: Vec<(u32, T)> = row[1..].to_vec();
            // eliminate entries at other pivot columns (their rows are already reduced)
            let mut heap: BinaryHeap<std::cmp::Reverse<u32>> = BinaryHeap::new();
            for (c, v) in acc.drain(..) {
                self.scratch[c as usize] = Some(v);
                heap.push(std::cmp::Reverse(c));
            }
            while let Some(std::cmp::Reverse(c)) = heap.pop() {
                let a = match self.scratch[c as usize].take() {
                    Some(a) if !a.is_zero() => a,
                    _ => continue,
                };
                match self.col_pivot[c as usize] {
                    Some(rr) if rr as usize != r => {
                        let prow = &self.rows[rr as usize];
                        for (cc, vv) in prow[1..].iter() {
                            let delta = a.mul(vv);
                            let cell = &mut self.scratch[*cc as usize];
                            match cell {
                                Some(old) => {
                                    let nv = old.sub(&delta);
                                    if nv.is_zero() {
                                        *cell = None;
                                    } else {
                                        *cell = Some(nv);
                                    }
                                }
                                None => {
                                    *cell = Some(delta.neg());
                                    heap.push(std::cmp::Reverse(*cc));
                                }
                            }
                        }
                    }
                    _ => new_row.push((c, a)),
                }
            }
            new_row[1..].sort_by_key(|e| e.0);
            self.rows[r] = new_row;
        }

        let zero = T::make_zero(&self);
        let mut basis = Vec::new();
        for f in 0..self.ncols {
            if self.col_pivot[f].is_some() {
                continue;
            }
            let mut v = vec![zero.clone(); self.ncols];
            v[f] = zero.one_like();
            for row in &self.rows {
                if let Some((_, a)) = row[1..].iter().find(|(c, _)| *c as usize == f) {
                    v[row[0].0 as usize] = a.neg();
                }
            }
            // scale so the first nonzero entry is 1
            if let Some(first) = v.iter().find(|x| !x.is_zero()).cloned() {
                if first != first.one_like() {
                    for x in v.iter_mut() {
                        if !x.is_zero() {
                            *x = x.div(&first);
                        }
                    }
                }
            }
            basis.push(v);
        }
        basis
    }
}

/// Supplies a zero value of the right shape (GF(p) elements need the modulus).
pub trait ZeroMake: Elem {
    fn make_zero(ech: &Echelon<Self>) -> Self;
}

impl ZeroMake for Scalar {
    fn make_zero(_: &Echelon<Self>) -> Self {
        Scalar::zero()
    }
}

impl ZeroMake for Fp {
    fn make_zero(ech: &Echelon<Self>) -> Self {
        let p = ech
            .rows
            .first()
            .and_then(|r| r.first())
            .map(|(_, v)| v.p)
            .unwrap_or(3);
        Fp { v: 0, p }
    }
}

/// Sparse exact matrix with optional provenance labels.
#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<SparseVec<Scalar>>,
    pub row_labels: Option<Vec<String>>,
    pub col_labels: Option<Vec<String>>,
}

impl SparseMatrix {
    pub fn new(ncols: usize) -> Self {
        SparseMatrix {
            nrows: 0,
            ncols,
            rows: Vec::new(),
            row_labels: None,
            col_labels: None,
        }
    }

    pub fn push_row(&mut self, mut row: SparseVec<Scalar>, label: Option<String>) {
        row.retain(|(_, v)| !v.is_zero());
        row.sort_by_key(|e| e.0);
        debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
        if let Some(l) = label {
            self.row_labels.get_or_insert_with(Vec::new).push(l);
        }
        self.rows.push(row);
        self.nrows += 1;
    }

    /// The effective exact field of the entries: promotes Rational to
    /// Quadratic(d) when entries demand it, rejects mixed extensions.
    pub fn entry_field(&self) -> Result<FieldSpec> {
        let mut d: Option<i64> = None;
        for row in &self.rows {
            for (_, v) in row {
                if let Some(dd) = v.disc() {
                    match d {
                        None => d = Some(dd),
                        Some(prev) if prev == dd => {}
                        Some(prev) => {
                            return Err(SymError::MixedExtensions {
                                what: format!("entries in Q(sqrt {prev}) and Q(sqrt {dd})"),
                            })
                        }
                    }
                }
            }
        }
        Ok(match d {
            None => FieldSpec::Rational,
            Some(d) => FieldSpec::Quadratic { d },
        })
    }

    fn fp_ctx(&self, p: u64) -> Result<FpCtx> {
        match self.entry_field()? {
            FieldSpec::Rational => Ok(FpCtx::new(p)),
            FieldSpec::Quadratic { d } => FpCtx::with_disc(p, d).ok_or(SymError::MixedExtensions {
                what: format!("{d} is not a quadratic residue mod {p}"),
            }),
            FieldSpec::PrimeField { .. } => unreachable!(),
        }
    }

    pub fn to_fp_rows(&self, p: u64) -> Result<Vec<SparseVec<Fp>>> {
        let ctx = self.fp_ctx(p)?;
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(c, v)| Ok((*c, Fp { v: v.to_fp(&ctx)?, p })))
                    .collect()
            })
            .collect()
    }

    /// Exact rank over the requested field.
    pub fn rank(&self, f: &FieldSpec) -> Result<usize> {
        match f {
            FieldSpec::Rational | FieldSpec::Quadratic { .. } => {
                self.entry_field()?; // validates single extension
                let mut ech = Echelon::<Scalar>::new(self.ncols);
                for row in &self.rows {
                    ech.offer(row.clone());
                }
                Ok(ech.rank())
            }
            FieldSpec::PrimeField { p } => {
                let mut ech = Echelon::<Fp>::new(self.ncols);
                for row in self.to_fp_rows(*p)? {
                    ech.offer(row);
                }
                Ok(ech.rank())
            }
        }
    }

    /// Reduced-echelon nullspace basis over the requested field. Prime-field
    /// vectors are returned with entries lifted to integers in [0, p).
    pub fn nullspace(&self, f: &FieldSpec) -> Result<Vec<Vec<Scalar>>> {
        match f {
            FieldSpec::Rational | FieldSpec::Quadratic { .. } => {
                self.entry_field()?;
                let mut ech = Echelon::<Scalar>::new(self.ncols);
                for row in &self.rows {
                    ech.offer(row.clone());
                }
                Ok(ech.nullspace())
            }
            FieldSpec::PrimeField { p } => {
                let mut ech = Echelon::<Fp>::new(self.ncols);
                for row in self.to_fp_rows(*p)? {
                    ech.offer(row);
                }
                Ok(ech
                    .nullspace()
                    .into_iter()
                    .map(|v| v.into_iter().map(|x| Scalar::from_int(x.v as i64)).collect())
                    .collect())
            }
        }
    }

    /// Exact matrix-vector product.
    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.ncols);
        self.rows
            .iter()
            .map(|row| {
                let mut acc = Scalar::zero();
                for (c, a) in row {
                    if !v[*c as usize].is_zero() {
                        acc += &(a * &v[*c as usize]);
                    }
                }
                acc
            })
            .collect()
    }

    /// Golden file format: `nrows ncols field` then `row col value` per nonzero.
    pub fn write_golden<W: Write>(&self, w: &mut W) -> Result<()> {
        let field = self.entry_field()?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, field.token())?;
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                writeln!(w, "{} {} {}", r, c, v.to_token())?;
            }
        }
        Ok(())
    }

    pub fn read_golden<R: BufRead>(r: &mut R) -> Result<SparseMatrix> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(SymError::Parse("bad golden header".into()));
        }
        let nrows: usize = parts[0]
            .parse()
            .map_err(|_| SymError::Parse("bad nrows".into()))?;
        let ncols: usize = parts[1]
            .parse()
            .map_err(|_| SymError::Parse("bad ncols".into()))?;
        let field = FieldSpec::parse(parts[2])?;
        let disc = match field {
            FieldSpec::Quadratic { d } => Some(d),
            _ => None,
        };
        let mut rows: Vec<SparseVec<Scalar>> = vec![Vec::new(); nrows];
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let p: Vec<&str> = line.split_whitespace().collect();
            if p.len() != 3 {
                return Err(SymError::Parse(format!("bad golden line `{line}`")));
            }
            let ri: usize = p[0].parse().map_err(|_| SymError::Parse("bad row".into()))?;
            let ci: u32 = p[1].parse().map_err(|_| SymError::Parse("bad col".into()))?;
            if ri >= nrows || ci as usize >= ncols {
                return Err(SymError::IndexOutOfRange {
                    what: format!("golden entry ({ri},{ci})"),
                });
            }
            rows[ri].push((ci, Scalar::parse_token(p[2], disc)?));
        }
        for row in rows.iter_mut() {
            row.sort_by_key(|e| e.0);
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            rows,
            row_labels: None,
            col_labels: None,
        })
    }
}

/// Rank of the projection of span(basis) onto the given coordinate block,
/// over the requested field.
pub fn block_projection_rank(
    basis: &[Vec<Scalar>],
    block: &[usize],
    f: &FieldSpec,
) -> Result<usize> {
    if basis.is_empty() {
        return Ok(0);
    }
    let len = basis[0].len();
    for v in basis {
        if v.len() != len {
            return Err(SymError::IndexOutOfRange {
                what: "basis vectors of unequal length".into(),
            });
        }
    }
    for &b in block {
        if b >= len {
            return Err(SymError::IndexOutOfRange {
                what: format!("block coordinate {b} out of range {len}"),
            });
        }
    }
    let mut m = SparseMatrix::new(block.len());
    for v in basis {
        let row: SparseVec<Scalar> = block
            .iter()
            .enumerate()
            .filter(|(_, &b)| !v[b].is_zero())
            .map(|(i, &b)| (i as u32, v[b].clone()))
            .collect();
        m.push_row(row, None);
    }
    m.rank(f)
}

/// Helper: rank of a set of dense exact vectors.
pub fn dense_span_rank(vectors: &[Vec<Scalar>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let mut ech = Echelon::<Scalar>::new(vectors[0].len());
    for v in vectors {
        ech.offer(dense_to_sparse(v));
    }
    ech.rank()
}

pub fn dense_to_sparse(v: &[Scalar]) -> SparseVec<Scalar> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i as u32, x.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    fn mat(rows: &[&[i64]]) -> SparseMatrix {
        let ncols = rows[0].len();
        let mut m = SparseMatrix::new(ncols);
        for r in rows {
            let row: SparseVec<Scalar> = r
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(c, &v)| (c as u32, s(v)))
                .collect();
            m.push_row(row, None);
        }
        m
    }

    #[test]
    fn identity_rank() {
        let m = mat(&[
            &[1, 0, 0, 0, 0],
            &[0, 1, 0, 0, 0],
            &[0, 0, 1, 0, 0],
            &[0, 0, 0, 1, 0],
            &[0, 0, 0, 0, 1],
        ]);
        assert_eq!(m.rank(&FieldSpec::Rational).unwrap(), 5);
    }

    #[test]
    fn ones_rank_one() {
        let m = mat(&[&[1, 1], &[1, 1]]);
        assert_eq!(m.rank(&FieldSpec::Rational).unwrap(), 1);
    }

    #[test]
    fn zero_matrix_nullspace_is_standard_basis() {
        let mut m = SparseMatrix::new(4);
        for _ in 0..3 {
            m.push_row(vec![], None);
        }
        let ns = m.nullspace(&FieldSpec::Rational).unwrap();
        assert_eq!(ns.len(), 4);
        for (i, v) in ns.iter().enumerate() {
            for (j, x) in v.iter().enumerate() {
                assert_eq!(*x, if i == j { Scalar::one() } else { Scalar::zero() });
            }
        }
    }

    #[test]
    fn row_1_1_nullspace() {
        let m = mat(&[&[1, 1]]);
        let ns = m.nullspace(&FieldSpec::Rational).unwrap();
        assert_eq!(ns.len(), 1);
        // pivot-normalized: first nonzero entry is 1
        assert_eq!(ns[0][0], Scalar::one());
        assert_eq!(ns[0][1], s(-1));
    }

    #[test]
    fn nullspace_vectors_annihilate() {
        let m = mat(&[&[2, 4, -2, 0], &[1, 2, 0, 3], &[3, 6, -2, 3]]);
        let ns = m.nullspace(&FieldSpec::Rational).unwrap();
        assert_eq!(m.rank(&FieldSpec::Rational).unwrap() + ns.len(), 4);
        for v in &ns {
            assert!(m.apply(v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn modular_rank_matches_rational_on_small_matrix() {
        let m = mat(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        let rq = m.rank(&FieldSpec::Rational).unwrap();
        let rp = m
            .rank(&FieldSpec::PrimeField { p: 1_000_000_007 })
            .unwrap();
        assert_eq!(rq, 2);
        assert_eq!(rp, 2);
    }

    #[test]
    fn denominator_divisible_by_prime_errors() {
        let p = 1_000_000_007u64;
        let mut m = SparseMatrix::new(1);
        m.push_row(vec![(0, Scalar::from_frac(1, p as i64))], None);
        assert!(matches!(
            m.rank(&FieldSpec::PrimeField { p }),
            Err(SymError::DenominatorDivisibleByPrime { .. })
        ));
    }

    #[test]
    fn mixed_extension_rejected() {
        let mut m = SparseMatrix::new(2);
        m.push_row(vec![(0, Scalar::sqrt_d(2))], None);
        m.push_row(vec![(1, Scalar::sqrt_d(3))], None);
        assert!(matches!(
            m.rank(&FieldSpec::Rational),
            Err(SymError::MixedExtensions { .. })
        ));
    }

    #[test]
    fn quadratic_entries_rank() {
        // rows (1, sqrt3), (sqrt3, 3) are dependent over Q(sqrt 3)
        let mut m = SparseMatrix::new(2);
        m.push_row(vec![(0, Scalar::one()), (1, Scalar::sqrt_d(3))], None);
        m.push_row(vec![(0, Scalar::sqrt_d(3)), (1, s(3))], None);
        assert_eq!(m.rank(&FieldSpec::Rational).unwrap(), 1);
        let ns = m.nullspace(&FieldSpec::Rational).unwrap();
        assert_eq!(ns.len(), 1);
        assert!(m.apply(&ns[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn block_projection_rank_examples() {
        let e1 = vec![Scalar::one(), Scalar::zero(), Scalar::zero()];
        let e2 = vec![Scalar::zero(), Scalar::one(), Scalar::zero()];
        assert_eq!(
            block_projection_rank(&[e1, e2], &[0], &FieldSpec::Rational).unwrap(),
            1
        );
        assert_eq!(
            block_projection_rank(&[], &[0, 1], &FieldSpec::Rational).unwrap(),
            0
        );
    }

    #[test]
    fn determinism_on_repeat() {
        let m = mat(&[&[1, 2, 3, 4], &[0, 1, 1, 1], &[1, 3, 4, 5]]);
        let a = m.nullspace(&FieldSpec::Rational).unwrap();
        let b = m.nullspace(&FieldSpec::Rational).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn golden_round_trip_bit_exact() {
        let mut m = SparseMatrix::new(3);
        m.push_row(
            vec![(0, Scalar::from_frac(-3, 7)), (2, &Scalar::sqrt_d(3) + &s(1))],
            None,
        );
        m.push_row(vec![(1, s(5))], None);
        let mut buf = Vec::new();
        m.write_golden(&mut buf).unwrap();
        let m2 = SparseMatrix::read_golden(&mut std::io::Cursor::new(&buf)).unwrap();
        let mut buf2 = Vec::new();
        m2.write_golden(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
        assert_eq!(m.rows, m2.rows);
    }
}
