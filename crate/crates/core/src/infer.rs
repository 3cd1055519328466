//! Representations for unseen words and multi-word phrases: count the
//! phrase's contexts over a corpus, normalize to √P, and pass the result
//! through the trained encoder.

use std::collections::HashMap;

use thiserror::Error;

use crate::cooccur::SparseRow;
use crate::corpus::{
    normalize_token, select_context_dictionary, ContextDictionary, ContextScenario, CorpusError,
    Vocabulary, WindowSpec,
};
use crate::fingerprint::Fingerprint;
use crate::hellinger::k_smallest;
use crate::reduce::Encoder;

#[derive(Debug, Error)]
pub enum InferError {
    #[error("phrase must contain at least one token")]
    EmptyPhrase,
    #[error("phrase {0:?} does not occur in the corpus")]
    UnseenInCorpus(String),
    #[error("phrase {0:?} occurs but has no in-dictionary context words")]
    NoContexts(String),
    #[error("encoder fingerprint does not match this vocabulary, scenario, and window")]
    FingerprintMismatch,
    #[error("cannot rank neighbors of a zero vector")]
    ZeroVector,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// A contiguous token sequence treated as one atomic unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseQuery {
    tokens: Vec<String>,
}

impl PhraseQuery {
    /// Wraps already-normalized tokens.
    pub fn new(tokens: Vec<String>) -> Result<Self, InferError> {
        if tokens.is_empty() {
            return Err(InferError::EmptyPhrase);
        }
        Ok(PhraseQuery { tokens })
    }

    /// Splits raw text on whitespace and normalizes each token.
    pub fn from_raw(text: &str) -> Result<Self, InferError> {
        PhraseQuery::new(text.split_whitespace().map(normalize_token).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Counts context words around every exact occurrence of each phrase, in a
/// single pass over the documents.
///
/// The window anchors at the phrase boundaries: positions before the first
/// token and after the last token, clipped at document edges. Tokens inside
/// the phrase are never counted as their own context. Returns per-phrase
/// (counts over D, number of occurrences).
pub fn count_phrase_contexts_batch(
    docs: &[Vec<String>],
    phrases: &[PhraseQuery],
    vocab: &Vocabulary,
    ctx: &ContextDictionary,
    window: WindowSpec,
) -> Vec<(SparseRow, u64)> {
    let mut acc: Vec<(HashMap<u32, f64>, u64)> = vec![(HashMap::new(), 0); phrases.len()];
    for doc in docs {
        let cols: Vec<Option<u32>> = doc
            .iter()
            .map(|t| vocab.id(t).and_then(|id| ctx.column_of(id)))
            .collect();
        for (phrase, slot) in phrases.iter().zip(acc.iter_mut()) {
            let plen = phrase.tokens.len();
            if plen > doc.len() {
                continue;
            }
            for start in 0..=doc.len() - plen {
                if doc[start..start + plen] != phrase.tokens[..] {
                    continue;
                }
                slot.1 += 1;
                let end = start + plen - 1;
                // j ranges over window positions outside the phrase
                #[allow(clippy::needless_range_loop)]
                if window.symmetric {
                    for j in start.saturating_sub(window.size)..start {
                        if let Some(c) = cols[j] {
                            *slot.0.entry(c).or_insert(0.0) += 1.0;
                        }
                    }
                }
                #[allow(clippy::needless_range_loop)]
                for j in end + 1..=(end + window.size).min(doc.len() - 1) {
                    if let Some(c) = cols[j] {
                        *slot.0.entry(c).or_insert(0.0) += 1.0;
                    }
                }
            }
        }
    }
    acc.into_iter()
        .map(|(map, occurrences)| {
            let mut row: SparseRow = map.into_iter().collect();
            row.sort_unstable_by_key(|&(c, _)| c);
            (row, occurrences)
        })
        .collect()
}

/// Single-phrase wrapper; a phrase with zero occurrences is a distinct
/// unseen-in-corpus outcome.
pub fn count_phrase_contexts(
    docs: &[Vec<String>],
    phrase: &PhraseQuery,
    vocab: &Vocabulary,
    ctx: &ContextDictionary,
    window: WindowSpec,
) -> Result<SparseRow, InferError> {
    let mut out = count_phrase_contexts_batch(docs, std::slice::from_ref(phrase), vocab, ctx, window);
    let (row, occurrences) = out.pop().expect("one phrase in, one row out");
    if occurrences == 0 {
        return Err(InferError::UnseenInCorpus(phrase.text()));
    }
    Ok(row)
}

/// Holds the context configuration for a batch of inference queries; the
/// encoder's fingerprint is verified once at construction.
pub struct PhraseInferencer<'a> {
    vocab: &'a Vocabulary,
    ctx: ContextDictionary,
    window: WindowSpec,
    encoder: &'a Encoder,
}

impl<'a> PhraseInferencer<'a> {
    pub fn new(
        vocab: &'a Vocabulary,
        scenario: &ContextScenario,
        window: WindowSpec,
        encoder: &'a Encoder,
    ) -> Result<Self, InferError> {
        let fp = Fingerprint::compute(vocab, scenario, window);
        if fp != encoder.fingerprint() {
            return Err(InferError::FingerprintMismatch);
        }
        let ctx = select_context_dictionary(vocab, scenario)?;
        Ok(PhraseInferencer {
            vocab,
            ctx,
            window,
            encoder,
        })
    }

    pub fn context_dictionary(&self) -> &ContextDictionary {
        &self.ctx
    }

    /// Counts, normalizes to √P, and encodes in one go.
    pub fn infer(&self, docs: &[Vec<String>], phrase: &PhraseQuery) -> Result<Vec<f64>, InferError> {
        let counts = count_phrase_contexts(docs, phrase, self.vocab, &self.ctx, self.window)?;
        self.encode_counts(&counts, phrase)
    }

    /// Encodes pre-accumulated counts (for callers that stream the corpus
    /// in shards and sum count vectors before encoding).
    pub fn encode_counts(&self, counts: &SparseRow, phrase: &PhraseQuery) -> Result<Vec<f64>, InferError> {
        let sum: f64 = counts.iter().map(|(_, v)| v).sum();
        if sum <= 0.0 {
            return Err(InferError::NoContexts(phrase.text()));
        }
        let sqrt_dist: SparseRow = counts
            .iter()
            .map(|&(c, v)| (c, (v / sum).sqrt()))
            .collect();
        Ok(self.encoder.encode_unchecked(&sqrt_dist))
    }
}

/// One-shot inference for a single phrase.
pub fn infer_vector(
    docs: &[Vec<String>],
    phrase: &PhraseQuery,
    vocab: &Vocabulary,
    scenario: &ContextScenario,
    window: WindowSpec,
    encoder: &Encoder,
) -> Result<Vec<f64>, InferError> {
    PhraseInferencer::new(vocab, scenario, window, encoder)?.infer(docs, phrase)
}

/// k nearest rows of a dense embedding matrix by cosine distance, ties by
/// ascending id. Rows with zero norm are not rankable and are skipped.
pub fn neighbors_of_vector(
    v: &[f64],
    vectors: &ndarray::Array2<f64>,
    k: usize,
) -> Result<Vec<(u32, f64)>, InferError> {
    let vnorm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if vnorm == 0.0 || !vnorm.is_finite() {
        return Err(InferError::ZeroVector);
    }
    let d = vectors.ncols();
    assert_eq!(v.len(), d, "query dimension must match embedding dimension");
    let data = vectors.as_slice().expect("row-major");
    let candidates = (0..vectors.nrows() as u32).filter_map(|id| {
        let row = &data[id as usize * d..(id as usize + 1) * d];
        let mut dot = 0.0;
        let mut norm = 0.0;
        for (a, b) in v.iter().zip(row) {
            dot += a * b;
            norm += b * b;
        }
        if norm == 0.0 {
            return None;
        }
        Some((id, 1.0 - dot / (vnorm * norm.sqrt())))
    });
    Ok(k_smallest(candidates, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooccur::{count_cooccurrences, merge, normalize_rows};
    use crate::corpus::build_vocabulary;
    use crate::reduce::{hellinger_pca, embed_all, PcaOptions};
    use ndarray::Array2;

    fn doc(text: &str) -> Vec<String> {
        text.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn phrase_contexts_anchor_at_boundaries() {
        let corpus = vec![doc("i flew british airways to rome")];
        let vocab = build_vocabulary(corpus[0].iter(), 1);
        let ctx = select_context_dictionary(&vocab, &ContextScenario::All).unwrap();
        let phrase = PhraseQuery::from_raw("british airways").unwrap();
        let counts = count_phrase_contexts(
            &corpus,
            &phrase,
            &vocab,
            &ctx,
            WindowSpec::new(1, true).unwrap(),
        )
        .unwrap();
        let by_word: HashMap<&str, f64> = counts
            .iter()
            .map(|&(c, v)| (vocab.word(ctx.vocab_id_of_column(c)), v))
            .collect();
        assert_eq!(by_word, HashMap::from([("flew", 1.0), ("to", 1.0)]));
    }

    #[test]
    fn single_word_phrase_matches_cooccurrence_row() {
        let corpus = vec![doc("the cat sat on the mat"), doc("the dog sat on the rug")];
        let all: Vec<String> = corpus.iter().flatten().cloned().collect();
        let vocab = build_vocabulary(all, 1);
        let ctx = select_context_dictionary(&vocab, &ContextScenario::All).unwrap();
        let w = WindowSpec::new(2, true).unwrap();
        let m = count_cooccurrences(&corpus, &vocab, &ctx, w);
        for word in ["the", "sat", "rug"] {
            let phrase = PhraseQuery::from_raw(word).unwrap();
            let counts = count_phrase_contexts(&corpus, &phrase, &vocab, &ctx, w).unwrap();
            assert_eq!(counts.as_slice(), m.row(vocab.id(word).unwrap()), "row for {word}");
        }
    }

    #[test]
    fn absent_phrase_is_unseen() {
        let corpus = vec![doc("a b c")];
        let vocab = build_vocabulary(corpus[0].iter(), 1);
        let ctx = select_context_dictionary(&vocab, &ContextScenario::All).unwrap();
        let phrase = PhraseQuery::from_raw("b a").unwrap();
        assert!(matches!(
            count_phrase_contexts(&corpus, &phrase, &vocab, &ctx, WindowSpec::new(1, true).unwrap()),
            Err(InferError::UnseenInCorpus(_))
        ));
    }

    #[test]
    fn phrase_tokens_never_count_themselves() {
        // the second "a b" occurrence neighbors the first one
        let corpus = vec![doc("a b a b c")];
        let vocab = build_vocabulary(corpus[0].iter(), 1);
        let ctx = select_context_dictionary(&vocab, &ContextScenario::All).unwrap();
        let phrase = PhraseQuery::from_raw("a b").unwrap();
        let counts = count_phrase_contexts(
            &corpus,
            &phrase,
            &vocab,
            &ctx,
            WindowSpec::new(1, true).unwrap(),
        )
        .unwrap();
        // occurrence at 0: after = "a"(2); occurrence at 2: before = "b"(1), after = "c"(4)
        let by_word: HashMap<&str, f64> = counts
            .iter()
            .map(|&(c, v)| (vocab.word(ctx.vocab_id_of_column(c)), v))
            .collect();
        assert_eq!(by_word, HashMap::from([("a", 1.0), ("b", 1.0), ("c", 1.0)]));
    }

    #[test]
    fn shard_counts_sum_linearly() {
        let corpus = vec![doc("x y z x y"), doc("y x y w"), doc("z x y z")];
        let all: Vec<String> = corpus.iter().flatten().cloned().collect();
        let vocab = build_vocabulary(all, 1);
        let ctx = select_context_dictionary(&vocab, &ContextScenario::All).unwrap();
        let w = WindowSpec::new(2, true).unwrap();
        let phrase = PhraseQuery::from_raw("x y").unwrap();
        let whole = count_phrase_contexts(&corpus, &phrase, &vocab, &ctx, w).unwrap();
        let mut summed: HashMap<u32, f64> = HashMap::new();
        for shard in corpus.chunks(1) {
            let (row, _) =
                count_phrase_contexts_batch(shard, std::slice::from_ref(&phrase), &vocab, &ctx, w)
                    .pop()
                    .unwrap();
            for (c, v) in row {
                *summed.entry(c).or_insert(0.0) += v;
            }
        }
        let mut summed: Vec<(u32, f64)> = summed.into_iter().filter(|&(_, v)| v > 0.0).collect();
        summed.sort_unstable_by_key(|&(c, _)| c);
        assert_eq!(whole, summed);
    }

    #[test]
    fn in_vocabulary_round_trip_matches_embedding_rows() {
        let corpus = vec![
            doc("the quick brown fox jumps over the lazy dog"),
            doc("the lazy dog sleeps while the quick fox runs"),
            doc("a brown dog and a quick cat play"),
        ];
        let all: Vec<String> = corpus.iter().flatten().cloned().collect();
        let vocab = build_vocabulary(all, 1);
        let scenario = ContextScenario::All;
        let window = WindowSpec::new(2, true).unwrap();
        let ctx = select_context_dictionary(&vocab, &scenario).unwrap();
        let m = normalize_rows(&count_cooccurrences(&corpus, &vocab, &ctx, window));
        let fp = Fingerprint::compute(&vocab, &scenario, window);
        let opts = PcaOptions {
            fingerprint: fp,
            ..PcaOptions::default()
        };
        let (enc, emb) = hellinger_pca(&m, 4, &opts).unwrap();
        let inferencer = PhraseInferencer::new(&vocab, &scenario, window, &enc).unwrap();
        for id in 0..vocab.len() as u32 {
            if m.is_zero_row(id) {
                continue;
            }
            let phrase = PhraseQuery::from_raw(vocab.word(id)).unwrap();
            let v = inferencer.infer(&corpus, &phrase).unwrap();
            for (a, b) in v.iter().zip(emb.row(id)) {
                assert!((a - b).abs() < 1e-6, "word {} drifted", vocab.word(id));
            }
        }
    }

    #[test]
    fn mismatched_fingerprint_is_rejected() {
        let corpus = vec![doc("a b c a b c")];
        let vocab = build_vocabulary(corpus[0].iter(), 1);
        let window = WindowSpec::new(1, true).unwrap();
        let ctx = select_context_dictionary(&vocab, &ContextScenario::All).unwrap();
        let m = normalize_rows(&count_cooccurrences(&corpus, &vocab, &ctx, window));
        let (enc, _) = hellinger_pca(&m, 2, &PcaOptions::default()).unwrap();
        // default (zero) fingerprint on the encoder, real one expected
        assert!(matches!(
            PhraseInferencer::new(&vocab, &ContextScenario::All, window, &enc),
            Err(InferError::FingerprintMismatch)
        ));
    }

    #[test]
    fn one_hot_context_extracts_encoder_row() {
        // phrase occurs once with a single in-dictionary context word c:
        // sqrt-distribution is one-hot at c, so the vector is U's row c
        let corpus = vec![doc("zzz qqq ppp")];
        let vocab = build_vocabulary(["qqq", "ppp", "zzz", "qqq", "ppp", "zzz"], 1);
        let scenario = ContextScenario::All;
        let window = WindowSpec::new(1, false).unwrap();
        let ctx = select_context_dictionary(&vocab, &scenario).unwrap();
        let m = normalize_rows(&count_cooccurrences(&corpus, &vocab, &ctx, window));
        let fp = Fingerprint::compute(&vocab, &scenario, window);
        let (enc, _) = hellinger_pca(
            &m,
            2,
            &PcaOptions {
                fingerprint: fp,
                ..PcaOptions::default()
            },
        )
        .unwrap();
        let inferencer = PhraseInferencer::new(&vocab, &scenario, window, &enc).unwrap();
        let phrase = PhraseQuery::from_raw("zzz").unwrap();
        let v = inferencer.infer(&corpus, &phrase).unwrap();
        let qqq_col = ctx.column_of(vocab.id("qqq").unwrap()).unwrap() as usize;
        for (j, x) in v.iter().enumerate() {
            assert!((x - enc.u()[(qqq_col, j)]).abs() < 1e-12);
        }
    }

    #[test]
    fn vector_neighbors_rank_by_cosine() {
        let vectors = Array2::from_shape_vec(
            (4, 2),
            vec![1.0, 0.0, 0.9, 0.1, 0.0, 1.0, 0.0, 0.0],
        )
        .unwrap();
        let nn = neighbors_of_vector(&[1.0, 0.0], &vectors, 10).unwrap();
        // zero row 3 skipped; exact match first at distance 0
        assert_eq!(nn.len(), 3);
        assert_eq!(nn[0].0, 0);
        assert!(nn[0].1.abs() < 1e-12);
        assert_eq!(nn[1].0, 1);
        assert_eq!(nn[2].0, 2);

        assert!(matches!(
            neighbors_of_vector(&[0.0, 0.0], &vectors, 1),
            Err(InferError::ZeroVector)
        ));
    }

    #[test]
    fn planted_nearest_vector_matches_brute_force() {
        let mut data = Vec::new();
        for i in 0..6 {
            data.extend([(i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()]);
        }
        let vectors = Array2::from_shape_vec((6, 2), data.clone()).unwrap();
        let q = [0.3, -0.4];
        let nn = neighbors_of_vector(&q, &vectors, 6).unwrap();
        let qn = (q[0] * q[0] + q[1] * q[1]).sqrt();
        let mut brute: Vec<(u32, f64)> = (0..6u32)
            .map(|i| {
                let r = &data[i as usize * 2..i as usize * 2 + 2];
                let rn = (r[0] * r[0] + r[1] * r[1]).sqrt();
                (i, 1.0 - (q[0] * r[0] + q[1] * r[1]) / (qn * rn))
            })
            .collect();
        brute.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        assert_eq!(
            nn.iter().map(|&(i, _)| i).collect::<Vec<_>>(),
            brute.iter().map(|&(i, _)| i).collect::<Vec<_>>()
        );
    }

    #[test]
    fn embed_all_and_inferencer_agree_on_zero_context_phrases() {
        let corpus = vec![doc("solo")];
        let vocab = build_vocabulary(["solo", "solo"], 1);
        let scenario = ContextScenario::All;
        let window = WindowSpec::new(1, true).unwrap();
        let ctx = select_context_dictionary(&vocab, &scenario).unwrap();
        let counts = count_cooccurrences(&corpus, &vocab, &ctx, window);
        let m = normalize_rows(&counts);
        assert!(m.is_zero_row(0));
        let fp = Fingerprint::compute(&vocab, &scenario, window);
        let enc = {
            // d=1 PCA over an all-zero matrix still yields an encoder
            let (enc, emb) = hellinger_pca(
                &m,
                1,
                &PcaOptions {
                    fingerprint: fp,
                    ..PcaOptions::default()
                },
            )
            .unwrap();
            assert_eq!(embed_all(&m, &enc).row(0), emb.row(0));
            enc
        };
        let inferencer = PhraseInferencer::new(&vocab, &scenario, window, &enc).unwrap();
        let phrase = PhraseQuery::from_raw("solo").unwrap();
        assert!(matches!(
            inferencer.infer(&corpus, &phrase),
            Err(InferError::NoContexts(_))
        ));
    }

    #[test]
    fn merged_shard_counts_give_identical_inference() {
        let corpus = vec![doc("m n o p m n"), doc("n m p o n m")];
        let all: Vec<String> = corpus.iter().flatten().cloned().collect();
        let vocab = build_vocabulary(all, 1);
        let scenario = ContextScenario::All;
        let window = WindowSpec::new(1, true).unwrap();
        let ctx = select_context_dictionary(&vocab, &scenario).unwrap();
        let counts = merge(vec![
            count_cooccurrences(&corpus[..1], &vocab, &ctx, window),
            count_cooccurrences(&corpus[1..], &vocab, &ctx, window),
        ])
        .unwrap();
        let m = normalize_rows(&counts);
        let fp = Fingerprint::compute(&vocab, &scenario, window);
        let (enc, emb) = hellinger_pca(
            &m,
            2,
            &PcaOptions {
                fingerprint: fp,
                ..PcaOptions::default()
            },
        )
        .unwrap();
        let inferencer = PhraseInferencer::new(&vocab, &scenario, window, &enc).unwrap();
        let v = inferencer
            .infer(&corpus, &PhraseQuery::from_raw("m").unwrap())
            .unwrap();
        assert_eq!(v.as_slice(), emb.row(vocab.id("m").unwrap()));
    }
}
