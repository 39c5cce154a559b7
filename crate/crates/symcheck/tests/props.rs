//! Property tests for the exact linear algebra kernel and the golden file
//! format.

use proptest::prelude::*;

use symcheck::scalar::{FieldSpec, Scalar};
use symcheck::sparse::SparseMatrix;

fn arb_matrix() -> impl Strategy<Value = SparseMatrix> {
    // up to 8x10, small rational entries, ~40% fill
    (1usize..8, 1usize..10).prop_flat_map(|(nrows, ncols)| {
        proptest::collection::vec(
            proptest::collection::vec((any::<bool>(), -9i64..10, 1i64..5), ncols),
            nrows,
        )
        .prop_map(move |rows| {
            let mut m = SparseMatrix::new(ncols);
            for r in rows {
                let row: Vec<(u32, Scalar)> = r
                    .into_iter()
                    .enumerate()
                    .filter(|(_, (keep, num, _))| *keep && *num != 0)
                    .map(|(c, (_, num, den))| (c as u32, Scalar::from_frac(num, den)))
                    .collect();
                m.push_row(row, None);
            }
            m
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_plus_nullity_is_ncols(m in arb_matrix()) {
        let rank = m.rank(&FieldSpec::Rational).unwrap();
        let ns = m.nullspace(&FieldSpec::Rational).unwrap();
        prop_assert_eq!(rank + ns.len(), m.ncols);
    }

    #[test]
    fn nullspace_vectors_annihilate_exactly(m in arb_matrix()) {
        for v in m.nullspace(&FieldSpec::Rational).unwrap() {
            prop_assert!(m.apply(&v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn modular_rank_never_exceeds_rational_rank(m in arb_matrix()) {
        let rq = m.rank(&FieldSpec::Rational).unwrap();
        for p in [1_000_000_007u64, 2_147_483_647] {
            let rp = m.rank(&FieldSpec::PrimeField { p }).unwrap();
            prop_assert!(rp <= rq);
        }
    }

    #[test]
    fn golden_format_round_trips(m in arb_matrix()) {
        let mut buf = Vec::new();
        m.write_golden(&mut buf).unwrap();
        let m2 = SparseMatrix::read_golden(&mut std::io::Cursor::new(&buf)).unwrap();
        let mut buf2 = Vec::new();
        m2.write_golden(&mut buf2).unwrap();
        prop_assert_eq!(buf, buf2);
        prop_assert_eq!(m.rows, m2.rows);
    }

    #[test]
    fn scalar_field_axioms_hold_in_quadratic_extension(
        a in (-20i64..20, 1i64..9, -20i64..20, 1i64..9),
        b in (-20i64..20, 1i64..9, -20i64..20, 1i64..9),
    ) {
        let mk = |(p, q, r, s): (i64, i64, i64, i64)| {
            &Scalar::from_frac(p, q) + &(&Scalar::from_frac(r, s) * &Scalar::sqrt_d(3))
        };
        let x = mk(a);
        let y = mk(b);
        prop_assert_eq!(&(&x + &y) - &y, x.clone());
        if !y.is_zero() {
            prop_assert_eq!(&(&x * &y) / &y, x.clone());
        }
        prop_assert_eq!(&x * &y, &y * &x);
    }
}
