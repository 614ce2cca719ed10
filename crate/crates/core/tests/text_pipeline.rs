use fakerev_core::text::{self, porter, PipelineConfig, Preprocessor};
use proptest::prelude::*;

/// word<TAB>stem pairs produced by an independent implementation of the
/// original Porter rules.
const VOCAB: &str = include_str!("fixtures/porter_vocab.tsv");

fn vocab() -> impl Iterator<Item = (&'static str, &'static str)> {
    VOCAB.lines().filter_map(|l| l.split_once('\t'))
}

#[test]
fn porter_matches_reference_vocabulary() {
    let mut mismatches = Vec::new();
    let mut n = 0;
    for (word, expected) in vocab() {
        n += 1;
        let got = porter::stem(word);
        if got != expected {
            mismatches.push(format!("{word}: got {got}, want {expected}"));
        }
    }
    assert!(n > 9000);
    assert!(mismatches.is_empty(), "{} mismatches: {:?}", mismatches.len(), &mismatches[..mismatches.len().min(20)]);
}

#[test]
fn porter_is_not_idempotent_everywhere() {
    // e.g. agree -> agre -> agr. Idempotence is only claimed for fixed-point stems.
    assert_eq!(porter::stem("agree"), "agre");
    assert_eq!(porter::stem("agre"), "agr");
    let fixed = vocab().filter(|(_, s)| porter::stem(s) == *s).count();
    let total = vocab().count();
    assert!(fixed as f64 / total as f64 > 0.9);
}

/// Words whose stem is a Porter fixed point and not itself a stopword
/// ("owns" stems to the stopword "own").
fn fixed_point_words() -> Vec<&'static str> {
    let stop = text::Stopwords::builtin();
    vocab()
        .filter(|(w, s)| porter::stem(s) == *s && porter::stem(w) == *s && !stop.contains(s))
        .map(|(w, _)| w)
        .collect()
}

fn noisy_text() -> impl Strategy<Value = String> {
    let words = fixed_point_words();
    let piece = prop_oneof![
        4 => proptest::sample::select(words).prop_map(str::to_string),
        1 => proptest::sample::select(vec!["the", "and", "is", "not", "very"]).prop_map(str::to_string),
        1 => proptest::sample::select(vec!["!!", ",", "...", "😀", "🚀", "(", "?", "\u{2764}\u{fe0f}"]).prop_map(str::to_string),
    ];
    (proptest::collection::vec((piece, any::<bool>()), 0..25)).prop_map(|parts| {
        parts
            .into_iter()
            .map(|(p, upper)| if upper { p.to_uppercase() } else { p })
            .collect::<Vec<_>>()
            .join(" ")
    })
}

proptest! {
    #[test]
    fn preprocess_is_idempotent_on_fixed_point_vocabulary(text in noisy_text()) {
        let p = Preprocessor::new(&PipelineConfig::default()).unwrap();
        let once = p.tokens(&text);
        let twice = p.tokens(&once.join(" "));
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn output_tokens_are_clean(text in "\\PC{0,80}") {
        let p = Preprocessor::new(&PipelineConfig::default()).unwrap();
        for tok in p.tokens(&text) {
            prop_assert!(!tok.is_empty());
            prop_assert_eq!(text::lowercase(&tok), tok.clone());
            prop_assert!(!tok.chars().any(text::is_punct), "{tok}");
            prop_assert!(!tok.chars().any(text::is_emoji), "{tok}");
        }
    }

    #[test]
    fn tokens_follow_input_order(words in proptest::collection::vec("[a-z]{1,8}", 0..20)) {
        // Every output token comes from a distinct input word, in order.
        let p = Preprocessor::new(&PipelineConfig::default()).unwrap();
        let out = p.tokens(&words.join(" "));
        let mapped: Vec<String> = words.iter().map(|w| porter::stem(w)).collect();
        let mut it = mapped.iter();
        for tok in &out {
            prop_assert!(it.any(|m| m == tok), "{tok} out of order");
        }
    }
}
