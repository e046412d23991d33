use ms2gd::{read_libsvm, write_libsvm, CsrMatrix, Dataset};
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = Dataset> {
    (1usize..30).prop_flat_map(|d| {
        let row = proptest::collection::btree_map(0..d, -1e6f64..1e6, 0..d.min(8));
        let labelled = (prop_oneof![Just(1.0), Just(-1.0), -100.0f64..100.0], row);
        proptest::collection::vec(labelled, 1..20).prop_map(move |rows| {
            let labels = rows.iter().map(|(l, _)| *l).collect();
            let m = CsrMatrix::from_rows(d, rows.into_iter().map(|(_, r)| r.into_iter())).unwrap();
            Dataset::new(m, labels, "prop").unwrap()
        })
    })
}

proptest! {
    #[test]
    fn write_then_read_preserves_arrays(data in dataset()) {
        let mut buf = Vec::new();
        write_libsvm(&data, &mut buf).unwrap();
        let back = read_libsvm(buf.as_slice(), Some(data.n_cols()), "prop").unwrap();
        prop_assert_eq!(back.features(), data.features());
        prop_assert_eq!(back.labels(), data.labels());
    }

    #[test]
    fn row_lengths_match_offsets(data in dataset()) {
        let m = data.features();
        for i in 0..m.n_rows() {
            let omega = m.row_offsets()[i + 1] - m.row_offsets()[i];
            prop_assert_eq!(omega, m.row(i).nnz());
            prop_assert!(omega <= m.n_cols());
        }
    }
}
