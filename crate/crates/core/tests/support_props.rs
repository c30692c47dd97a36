use proptest::prelude::*;
use sparse_diffres::support::{is_tshape, rdm, replay, SupportMatrix};

fn entry() -> impl Strategy<Value = Vec<i64>> {
    prop_oneof![
        3 => Just(vec![]),
        2 => prop::collection::vec(-2i64..=2, 1..4),
    ]
}

fn matrix() -> impl Strategy<Value = Vec<Vec<Vec<i64>>>> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(m, n)| prop::collection::vec(prop::collection::vec(entry(), n), m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn rdm_output_is_tshape_with_generic_rank(rows in matrix()) {
        let m = SupportMatrix::from_int_entries(&rows);
        let res = rdm(&m).unwrap();
        let (i, j) = res.index;
        prop_assert!(is_tshape(&res.matrix, i, j));
        prop_assert_eq!(i + j, m.rank_by_evaluation(7));
        prop_assert_eq!(res.matrix.rank_by_evaluation(11), i + j);
        prop_assert_eq!(&replay(&m, &res.trace), &res.matrix);
        prop_assert_eq!(res.matrix.regenerate(), res.matrix.entries().to_vec());
        if i + j < rows.len().min(rows[0].len()) {
            // A rank-deficient T-shape has a zero block of 0-rank above max(m,n).
            prop_assert!(rows.len() + rows[0].len() - (i + j) > rows.len().max(rows[0].len()));
        }
    }
}

fn low_rank_matrix() -> impl Strategy<Value = Vec<Vec<Vec<i64>>>> {
    (1usize..=3, 2usize..=6, 2usize..=6).prop_flat_map(|(r, m, n)| {
        (
            prop::collection::vec(prop::collection::vec(entry(), n), r),
            prop::collection::vec(prop::collection::vec(-2i64..=2, r), m),
        )
            .prop_map(|(base, mix)| {
                mix.iter()
                    .map(|w| {
                        (0..base[0].len())
                            .map(|c| {
                                let mut e = vec![0i64; 4];
                                for (wt, row) in w.iter().zip(&base) {
                                    for (k, x) in row[c].iter().enumerate() {
                                        e[k] += wt * x;
                                    }
                                }
                                while e.last() == Some(&0) {
                                    e.pop();
                                }
                                e
                            })
                            .collect()
                    })
                    .collect()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn rdm_handles_rank_deficient_matrices(rows in low_rank_matrix()) {
        let m = SupportMatrix::from_int_entries(&rows);
        let res = rdm(&m).unwrap();
        let (i, j) = res.index;
        prop_assert!(is_tshape(&res.matrix, i, j));
        prop_assert_eq!(i + j, m.rank_by_evaluation(3));
        prop_assert_eq!(&replay(&m, &res.trace), &res.matrix);
    }
}
