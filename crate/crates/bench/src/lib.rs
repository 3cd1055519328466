//! Synthetic workloads shared by the benchmark targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hellvec::{
    build_vocabulary, count_cooccurrences, normalize_rows, select_context_dictionary,
    ContextDictionary, ContextScenario, CooccurrenceMatrix, DistributionMatrix, Vocabulary,
    WindowSpec,
};

/// Zipf-ish random corpus: `n_docs` documents over `n_types` word types.
pub fn synthetic_docs(seed: u64, n_docs: usize, n_types: usize) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..n_types).map(|i| 1.0 / (i as f64 + 1.0)).collect();
    let total: f64 = weights.iter().sum();
    (0..n_docs)
        .map(|_| {
            (0..rng.gen_range(8..40))
                .map(|_| {
                    let mut pick = rng.gen_range(0.0..total);
                    let mut idx = 0;
                    for (i, w) in weights.iter().enumerate() {
                        if pick < *w {
                            idx = i;
                            break;
                        }
                        pick -= w;
                    }
                    format!("w{idx}")
                })
                .collect()
        })
        .collect()
}

pub struct CountedCorpus {
    pub docs: Vec<Vec<String>>,
    pub vocab: Vocabulary,
    pub ctx: ContextDictionary,
    pub window: WindowSpec,
    pub counts: CooccurrenceMatrix,
    pub distributions: DistributionMatrix,
}

pub fn counted_corpus(seed: u64, n_docs: usize, n_types: usize, window_size: usize) -> CountedCorpus {
    let docs = synthetic_docs(seed, n_docs, n_types);
    let vocab = build_vocabulary(docs.iter().flatten(), 1);
    let ctx = select_context_dictionary(&vocab, &ContextScenario::All).unwrap();
    let window = WindowSpec::new(window_size, true).unwrap();
    let counts = count_cooccurrences(&docs, &vocab, &ctx, window);
    let distributions = normalize_rows(&counts);
    CountedCorpus {
        docs,
        vocab,
        ctx,
        window,
        counts,
        distributions,
    }
}
