use std::io::Write;

use fakerev_core::data_io::{
    load_reviews_csv, load_reviews_csv_with, train_test_split, write_dataset_csv, Dataset,
    LoadOptions, RawReview, SplitSpec,
};
use fakerev_core::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dataset(labels: &[Option<u8>]) -> Dataset {
    Dataset {
        reviews: labels
            .iter()
            .enumerate()
            .map(|(i, &label)| RawReview {
                id: i as u64,
                url: format!("u{i}"),
                rating: Some(4.0),
                text: format!("review {i}"),
                collected_by: "t".into(),
                label,
            })
            .collect(),
        source_files: Vec::new(),
    }
}

/// The held-out ids as the rand crate's own shuffle would choose them.
fn oracle_test_ids(ds: &Dataset, fraction: f64, seed: u64) -> Vec<u64> {
    let mut labeled: Vec<u64> = ds.reviews.iter().filter(|r| r.label.is_some()).map(|r| r.id).collect();
    let k = (labeled.len() as f64 * fraction).ceil() as usize;
    labeled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test = labeled[..k].to_vec();
    test.sort_unstable();
    test
}

#[test]
fn split_matches_library_shuffle() {
    for (n, fraction, seed) in [(10, 0.2, 9), (37, 0.3, 1), (1000, 0.2, 9), (5, 0.5, 123)] {
        let ds = dataset(&vec![Some(1); n]);
        let (_, test) = train_test_split(
            &ds,
            &SplitSpec {
                test_fraction: fraction,
                seed,
                stratify: false,
            },
        )
        .unwrap();
        assert_eq!(test.ids(), oracle_test_ids(&ds, fraction, seed), "n={n} seed={seed}");
    }
}

#[test]
fn csv_round_trip_through_disk() {
    let ds = dataset(&[Some(1), None, Some(0)]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reviews.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    write_dataset_csv(&ds, &mut f).unwrap();
    f.flush().unwrap();
    let back = load_reviews_csv(&path).unwrap();
    assert_eq!(back.reviews, ds.reviews);
    assert_eq!(back.source_files, vec![path]);
}

#[test]
fn loader_errors_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "url,review,label\nx,fine,1\ny,short\n").unwrap();
    match load_reviews_csv(&path) {
        Err(e @ Error::MalformedRow { row: 3, expected: 3, found: 2, .. }) => {
            assert!(e.to_string().contains("bad.csv"));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        load_reviews_csv(dir.path().join("missing.csv")),
        Err(Error::PathError { .. })
    ));
}

#[test]
fn blank_rows_kept_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    std::fs::write(&path, "review\nok\n\"\"\n").unwrap();
    let (ds, report) = load_reviews_csv_with(&path, LoadOptions { keep_empty_text: true }).unwrap();
    assert_eq!(ds.len(), 2);
    assert!(report.rejected.is_empty());
}

proptest! {
    #[test]
    fn split_partitions_labeled_rows(
        labels in proptest::collection::vec(proptest::option::weighted(0.9, 0u8..2), 2..120),
        fraction in 0.05f64..0.95,
        seed in any::<u64>(),
        stratify in any::<bool>(),
    ) {
        let ds = dataset(&labels);
        let spec = SplitSpec { test_fraction: fraction, seed, stratify };
        match train_test_split(&ds, &spec) {
            Ok((train, test)) => {
                let mut all: Vec<u64> = train.ids().into_iter().chain(test.ids()).collect();
                all.sort_unstable();
                let labeled: Vec<u64> = ds.reviews.iter().filter(|r| r.label.is_some()).map(|r| r.id).collect();
                prop_assert_eq!(all, labeled);
                prop_assert!(train.ids().windows(2).all(|w| w[0] < w[1]));
                prop_assert!(test.ids().windows(2).all(|w| w[0] < w[1]));
                if !stratify {
                    let n = train.len() + test.len();
                    prop_assert_eq!(test.len(), (n as f64 * fraction).ceil() as usize);
                }
                let again = train_test_split(&ds, &spec).unwrap();
                prop_assert_eq!(again.1.ids(), test.ids());
            }
            Err(Error::DegenerateSplit { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
