use fakerev_core::embedding::{
    build_training_pairs, negative_sample, sgns_pair_loss_and_grad, train_sgns, SgnsConfig,
    UnigramTable,
};
use fakerev_core::rng::SeedRng;
use fakerev_core::synthetic::two_cluster_corpus;
use fakerev_core::vectorize::EmbeddingTable;
use proptest::prelude::*;
use rand::Rng;

fn pair_loss(v: &[f64], u_c: &[f64], negs: &[Vec<f64>]) -> f64 {
    let refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
    sgns_pair_loss_and_grad(v, u_c, &refs).loss
}

fn rel_err(a: &[f64], n: &[f64]) -> f64 {
    let diff = a.iter().zip(n).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(n.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

#[test]
fn pair_gradient_matches_finite_differences() {
    let mut rng = SeedRng::new(21).stream();
    let eps = 1e-5;
    let dim = 8;
    for _ in 0..100 {
        let mut vec8 = || (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        let v = vec8();
        let u_c = vec8();
        let negs: Vec<Vec<f64>> = (0..5).map(|_| vec8()).collect();
        let refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
        let g = sgns_pair_loss_and_grad(&v, &u_c, &refs);

        let central = |f: &dyn Fn(f64) -> f64| (f(eps) - f(-eps)) / (2.0 * eps);
        let shift = |base: &[f64], j: usize, h: f64| {
            let mut b = base.to_vec();
            b[j] += h;
            b
        };
        let num_v: Vec<f64> = (0..dim).map(|j| central(&|h| pair_loss(&shift(&v, j, h), &u_c, &negs))).collect();
        let num_c: Vec<f64> = (0..dim).map(|j| central(&|h| pair_loss(&v, &shift(&u_c, j, h), &negs))).collect();
        assert!(rel_err(&g.center, &num_v) <= 1e-4);
        assert!(rel_err(&g.context, &num_c) <= 1e-4);
        for k in 0..negs.len() {
            let num_n: Vec<f64> = (0..dim)
                .map(|j| {
                    central(&|h| {
                        let mut n2 = negs.clone();
                        n2[k][j] += h;
                        pair_loss(&v, &u_c, &n2)
                    })
                })
                .collect();
            assert!(rel_err(&g.negatives[k], &num_n) <= 1e-4);
        }
    }
}

fn draw_frequencies(counts: &[u64], seed: u64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let table = UnigramTable::new(counts, 0.75);
    let total: f64 = counts.iter().map(|&c| (c as f64).powf(0.75)).sum();
    let draws = negative_sample(&table, &mut SeedRng::new(seed).stream(), n, &[]);
    let expected = counts.iter().map(|&c| (c as f64).powf(0.75) / total).collect();
    let seen = (0..counts.len())
        .map(|t| draws.iter().filter(|&&d| d == t).count() as f64 / n as f64)
        .collect();
    (expected, seen)
}

#[test]
fn sampler_frequencies_within_two_percent() {
    // every probability ≥ 0.23, so 2% relative is ≥ 3.4 standard errors at 100k draws
    let (expected, seen) = draw_frequencies(&[2, 3, 5], 31, 100_000);
    for (t, (e, s)) in expected.iter().zip(&seen).enumerate() {
        assert!((s - e).abs() <= 0.02 * e, "token {t}: {s} vs {e}");
    }
}

#[test]
fn sampler_passes_chi_square_on_skewed_counts() {
    let n = 100_000;
    let (expected, seen) = draw_frequencies(&[1, 4, 9, 20, 50], 32, n);
    let chi2: f64 = expected
        .iter()
        .zip(&seen)
        .map(|(e, s)| (s - e).powi(2) / e * n as f64)
        .sum();
    // 0.999 quantile of chi-square with 4 degrees of freedom
    assert!(chi2 < 18.47, "chi2 = {chi2}");
}

#[test]
fn sampler_is_deterministic() {
    let table = UnigramTable::new(&[3, 1, 4, 1, 5], 0.75);
    let a = negative_sample(&table, &mut SeedRng::new(5).stream(), 50, &[2]);
    let b = negative_sample(&table, &mut SeedRng::new(5).stream(), 50, &[2]);
    assert_eq!(a, b);
    assert!(!a.contains(&2));
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn cluster_similarities(table: &EmbeddingTable, clusters: &[Vec<String>; 2]) -> (f64, f64) {
    let (mut intra, mut n_intra, mut inter, mut n_inter) = (0.0, 0, 0.0, 0);
    for (ci, c) in clusters.iter().enumerate() {
        for (i, a) in c.iter().enumerate() {
            for b in &c[i + 1..] {
                intra += cosine(table.get(a).unwrap(), table.get(b).unwrap());
                n_intra += 1;
            }
            if ci == 0 {
                for b in &clusters[1] {
                    inter += cosine(table.get(a).unwrap(), table.get(b).unwrap());
                    n_inter += 1;
                }
            }
        }
    }
    (intra / n_intra as f64, inter / n_inter as f64)
}

#[test]
fn clusters_separate_and_loss_falls() {
    let (docs, clusters) = two_cluster_corpus(1000, 10, 10, 9);
    let run = train_sgns(&docs, &SgnsConfig::default()).unwrap();
    assert_eq!(run.table.len(), 20);
    let (intra, inter) = cluster_similarities(&run.table, &clusters);
    assert!(intra > inter, "intra {intra} <= inter {inter}");
    let losses: Vec<f64> = run.log.iter().map(|e| e.mean_loss).collect();
    assert_eq!(losses.len(), 5);
    assert!(losses.windows(2).all(|w| w[1] <= w[0]), "{losses:?}");
}

#[test]
fn training_is_bit_reproducible() {
    let (docs, _) = two_cluster_corpus(100, 5, 8, 3);
    let cfg = SgnsConfig {
        dim: 16,
        epochs: 2,
        ..Default::default()
    };
    let a = train_sgns(&docs, &cfg).unwrap();
    let b = train_sgns(&docs, &cfg).unwrap();
    assert_eq!(a.table, b.table);
    assert_eq!(a.log, b.log);
}

proptest! {
    #[test]
    fn pair_loss_is_positive_and_finite(
        v in proptest::collection::vec(-10.0f64..10.0, 4),
        u in proptest::collection::vec(-10.0f64..10.0, 4),
        n in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 4), 0..6),
    ) {
        let l = pair_loss(&v, &u, &n);
        prop_assert!(l > 0.0 && l.is_finite());
    }

    // past |u·v| ~ 745 the exact loss is below the smallest subnormal
    #[test]
    fn pair_loss_never_negative_for_huge_inputs(
        v in proptest::collection::vec(-1e6f64..1e6, 4),
        u in proptest::collection::vec(-1e6f64..1e6, 4),
        n in proptest::collection::vec(proptest::collection::vec(-1e6f64..1e6, 4), 0..6),
    ) {
        let l = pair_loss(&v, &u, &n);
        prop_assert!(l >= 0.0 && l.is_finite());
    }

    #[test]
    fn pairs_stay_within_window(
        doc in proptest::collection::vec(0usize..50, 0..30),
        window in 1usize..6,
        seed in any::<u64>(),
    ) {
        let mut rng = SeedRng::new(seed).stream();
        let pairs = build_training_pairs(std::slice::from_ref(&doc), window, &mut rng);
        // window=full radius bounds the count from above
        prop_assert!(pairs.len() <= doc.len() * 2 * window);
        if doc.len() >= 2 {
            prop_assert!(pairs.len() >= 2 * (doc.len() - 1));
        }
    }
}
