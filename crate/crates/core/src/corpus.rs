//! Corpus streaming, token normalization, and dictionary construction.
//!
//! The canonical input is pre-tokenized text (one sentence per line,
//! space-separated); [`tokenize`] is a basic whitespace-plus-punctuation
//! splitter shipped as a convenience for raw text.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

const NUMBER_SENTINEL: &str = "NUMBER";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid context scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("malformed vocabulary line {line}: {reason}")]
    MalformedVocabLine { line: usize, reason: String },
    #[error("duplicate word in vocabulary file: {0}")]
    DuplicateWord(String),
    #[error("vocabulary of {0} words exceeds the u32 id space")]
    TooLarge(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Lowercases a token and collapses every maximal run of ASCII digits into
/// the sentinel `NUMBER`. The sentinel itself is left untouched by the
/// lowercasing pass, which makes the function idempotent.
pub fn normalize_token(raw: &str) -> String {
    let mut replaced = String::with_capacity(raw.len() + 8);
    let mut in_digits = false;
    for ch in raw.chars() {
        if ch.is_ascii_digit() {
            if !in_digits {
                replaced.push_str(NUMBER_SENTINEL);
                in_digits = true;
            }
        } else {
            in_digits = false;
            replaced.push(ch);
        }
    }

    let mut out = String::with_capacity(replaced.len());
    let mut rest = replaced.as_str();
    while !rest.is_empty() {
        if rest.starts_with(NUMBER_SENTINEL) {
            out.push_str(NUMBER_SENTINEL);
            rest = &rest[NUMBER_SENTINEL.len()..];
        } else {
            let ch = rest.chars().next().expect("non-empty");
            out.extend(ch.to_lowercase());
            rest = &rest[ch.len_utf8()..];
        }
    }
    out
}

/// Basic tokenizer: splits on whitespace, peels punctuation off word
/// boundaries into single-character tokens, and keeps hyphens and
/// apostrophes that sit between alphanumeric characters inside the word.
pub fn tokenize(line: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in line.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut cur = String::new();
        for (i, &ch) in chars.iter().enumerate() {
            let joiner = (ch == '-' || ch == '\'')
                && i > 0
                && chars[i - 1].is_alphanumeric()
                && i + 1 < chars.len()
                && chars[i + 1].is_alphanumeric();
            if ch.is_alphanumeric() || joiner {
                cur.push(ch);
            } else {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                tokens.push(ch.to_string());
            }
        }
        if !cur.is_empty() {
            tokens.push(cur);
        }
    }
    tokens
}

/// The word dictionary W: every word kept at construction has
/// `count >= min_count`, ids are contiguous and assigned in descending
/// count order with lexicographic tie-breaks.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    entries: Vec<(String, u64)>,
    index: HashMap<String, u32>,
    total_tokens: u64,
    min_count: u64,
}

impl Vocabulary {
    /// Finalizes a raw count map. `total_tokens` is the full stream length,
    /// including tokens that fall below `min_count`.
    pub fn from_counts(
        counts: HashMap<String, u64>,
        total_tokens: u64,
        min_count: u64,
    ) -> Result<Self, CorpusError> {
        let mut entries: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count)
            .collect();
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        if entries.len() >= u32::MAX as usize {
            return Err(CorpusError::TooLarge(entries.len()));
        }
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (w, _))| (w.clone(), i as u32))
            .collect();
        Ok(Vocabulary {
            entries,
            index,
            total_tokens,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.entries[id as usize].0
    }

    pub fn count(&self, id: u32) -> u64 {
        self.entries[id as usize].1
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Corpus-level relative frequency, computed against the raw token
    /// total rather than the sum of surviving counts.
    pub fn relative_frequency(&self, id: u32) -> f64 {
        if self.total_tokens == 0 {
            0.0
        } else {
            self.count(id) as f64 / self.total_tokens as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(w, c)| (w.as_str(), *c))
    }

    /// Writes `word<TAB>count` lines in id order. The raw token total is
    /// stored in a `<path>.meta` sidecar so that corpus-level frequencies
    /// survive a round trip without disturbing the main format.
    pub fn write_to_path(&self, path: &Path) -> Result<(), CorpusError> {
        let mut w = BufWriter::new(File::create(path)?);
        for (word, count) in &self.entries {
            writeln!(w, "{word}\t{count}")?;
        }
        w.flush()?;
        let meta = sidecar_path(path);
        let mut m = BufWriter::new(File::create(meta)?);
        writeln!(m, "total_tokens={}", self.total_tokens)?;
        writeln!(m, "min_count={}", self.min_count)?;
        m.flush()?;
        Ok(())
    }

    pub fn read_from_path(path: &Path) -> Result<Self, CorpusError> {
        let reader = BufReader::new(File::open(path)?);
        let mut entries = Vec::new();
        let mut index = HashMap::new();
        let mut prev_count = u64::MAX;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                // ids are line numbers; a blank line would shift them all
                return Err(CorpusError::MalformedVocabLine {
                    line: lineno,
                    reason: "empty line".into(),
                });
            }
            let (word, count_str) =
                line.split_once('\t')
                    .ok_or_else(|| CorpusError::MalformedVocabLine {
                        line: lineno,
                        reason: "expected word<TAB>count".into(),
                    })?;
            let count: u64 =
                count_str
                    .trim()
                    .parse()
                    .map_err(|e| CorpusError::MalformedVocabLine {
                        line: lineno,
                        reason: format!("bad count: {e}"),
                    })?;
            if count > prev_count {
                return Err(CorpusError::MalformedVocabLine {
                    line: lineno,
                    reason: "counts must be nonincreasing".into(),
                });
            }
            prev_count = count;
            if index.insert(word.to_string(), entries.len() as u32).is_some() {
                return Err(CorpusError::DuplicateWord(word.to_string()));
            }
            entries.push((word.to_string(), count));
        }
        if entries.len() >= u32::MAX as usize {
            return Err(CorpusError::TooLarge(entries.len()));
        }

        let sum: u64 = entries.iter().map(|(_, c)| c).sum();
        let mut total_tokens = sum;
        let mut min_count = entries.last().map(|(_, c)| *c).unwrap_or(1);
        match read_sidecar(&sidecar_path(path)) {
            Some((total, min)) => {
                total_tokens = total;
                if let Some(min) = min {
                    min_count = min;
                }
            }
            None => log::warn!(
                "no {} sidecar; using sum of stored counts as total_tokens",
                sidecar_path(path).display()
            ),
        }
        Ok(Vocabulary {
            entries,
            index,
            total_tokens,
            min_count,
        })
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".meta");
    PathBuf::from(s)
}

fn read_sidecar(path: &Path) -> Option<(u64, Option<u64>)> {
    let content = std::fs::read_to_string(path).ok()?;
    let mut total = None;
    let mut min = None;
    for line in content.lines() {
        if let Some((k, v)) = line.split_once('=') {
            match k.trim() {
                "total_tokens" => total = v.trim().parse().ok(),
                "min_count" => min = v.trim().parse().ok(),
                _ => {}
            }
        }
    }
    total.map(|t| (t, min))
}

/// Counts a normalized token stream into a [`Vocabulary`].
pub fn build_vocabulary<I, S>(tokens: I, min_count: u64) -> Vocabulary
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for tok in tokens {
        *counts.entry(tok.as_ref().to_string()).or_insert(0) += 1;
        total += 1;
    }
    Vocabulary::from_counts(counts, total, min_count).expect("token stream exceeds id space")
}

/// Context-dictionary selection rule. Frequency thresholds are relative
/// (count / total_tokens) and compared strictly, so a word sitting exactly
/// at a threshold falls in neither open set.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextScenario {
    /// The k highest-count words.
    TopK(usize),
    /// Every word in the vocabulary.
    All,
    /// Words with relative frequency strictly below the threshold.
    FreqBelow(f64),
    /// Words with relative frequency strictly between the two thresholds.
    FreqBand(f64, f64),
    /// Words with relative frequency strictly above the threshold.
    FreqAbove(f64),
}

impl ContextScenario {
    pub fn validate(&self) -> Result<(), CorpusError> {
        match *self {
            ContextScenario::TopK(k) if k < 1 => {
                Err(CorpusError::InvalidScenario("top-k requires k >= 1".into()))
            }
            ContextScenario::FreqBelow(t) | ContextScenario::FreqAbove(t)
                if !(t.is_finite() && t > 0.0) =>
            {
                Err(CorpusError::InvalidScenario(format!(
                    "threshold must be finite and positive, got {t}"
                )))
            }
            ContextScenario::FreqBand(lo, hi)
                if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) =>
            {
                Err(CorpusError::InvalidScenario(format!(
                    "band requires 0 < lo < hi, got ({lo}, {hi})"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Exact, bit-level encoding used for fingerprinting.
    pub fn canonical_string(&self) -> String {
        match *self {
            ContextScenario::TopK(k) => format!("top:{k}"),
            ContextScenario::All => "all".to_string(),
            ContextScenario::FreqBelow(t) => format!("below:{:016x}", t.to_bits()),
            ContextScenario::FreqBand(lo, hi) => {
                format!("band:{:016x},{:016x}", lo.to_bits(), hi.to_bits())
            }
            ContextScenario::FreqAbove(t) => format!("above:{:016x}", t.to_bits()),
        }
    }
}

impl std::fmt::Display for ContextScenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            ContextScenario::TopK(k) => write!(f, "top:{k}"),
            ContextScenario::All => write!(f, "all"),
            ContextScenario::FreqBelow(t) => write!(f, "below:{t}"),
            ContextScenario::FreqBand(lo, hi) => write!(f, "band:{lo},{hi}"),
            ContextScenario::FreqAbove(t) => write!(f, "above:{t}"),
        }
    }
}

impl std::str::FromStr for ContextScenario {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| CorpusError::InvalidScenario(format!("{msg} (got {s:?})"));
        let scenario = if s == "all" {
            ContextScenario::All
        } else if let Some(k) = s.strip_prefix("top:") {
            ContextScenario::TopK(k.parse().map_err(|_| bad("bad top-k count"))?)
        } else if let Some(t) = s.strip_prefix("below:") {
            ContextScenario::FreqBelow(t.parse().map_err(|_| bad("bad threshold"))?)
        } else if let Some(t) = s.strip_prefix("above:") {
            ContextScenario::FreqAbove(t.parse().map_err(|_| bad("bad threshold"))?)
        } else if let Some(rest) = s.strip_prefix("band:") {
            let (lo, hi) = rest
                .split_once(',')
                .ok_or_else(|| bad("band needs lo,hi"))?;
            ContextScenario::FreqBand(
                lo.parse().map_err(|_| bad("bad low threshold"))?,
                hi.parse().map_err(|_| bad("bad high threshold"))?,
            )
        } else {
            return Err(bad(
                "expected one of all | top:K | below:T | band:LO,HI | above:T",
            ));
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Context window shape: `size` positions after the center word, and for
/// symmetric windows also `size` positions before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub size: usize,
    pub symmetric: bool,
}

impl WindowSpec {
    pub fn new(size: usize, symmetric: bool) -> Result<Self, CorpusError> {
        if size < 1 {
            return Err(CorpusError::InvalidWindow("size must be >= 1".into()));
        }
        Ok(WindowSpec { size, symmetric })
    }
}

impl std::fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}{}",
            if self.symmetric { "sym" } else { "asym" },
            self.size
        )
    }
}

/// The context dictionary D, a subset of the vocabulary with contiguous
/// column ids following vocabulary id order.
#[derive(Debug, Clone)]
pub struct ContextDictionary {
    words: Vec<u32>,
    index: HashMap<u32, u32>,
}

impl ContextDictionary {
    fn from_ids(words: Vec<u32>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(col, &id)| (id, col as u32))
            .collect();
        ContextDictionary { words, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Column id for a vocabulary word id, if the word is a context word.
    pub fn column_of(&self, vocab_id: u32) -> Option<u32> {
        self.index.get(&vocab_id).copied()
    }

    pub fn vocab_id_of_column(&self, col: u32) -> u32 {
        self.words[col as usize]
    }

    pub fn iter_vocab_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().copied()
    }
}

/// Applies a [`ContextScenario`] to a vocabulary. `TopK` with k > |W| is
/// clamped with a warning rather than rejected.
pub fn select_context_dictionary(
    vocab: &Vocabulary,
    scenario: &ContextScenario,
) -> Result<ContextDictionary, CorpusError> {
    scenario.validate()?;
    let n = vocab.len();
    let ids: Vec<u32> = match *scenario {
        ContextScenario::TopK(k) => {
            if k > n {
                log::warn!("top-k of {k} exceeds vocabulary size {n}; clamping");
            }
            (0..k.min(n) as u32).collect()
        }
        ContextScenario::All => (0..n as u32).collect(),
        ContextScenario::FreqBelow(t) => (0..n as u32)
            .filter(|&id| vocab.relative_frequency(id) < t)
            .collect(),
        ContextScenario::FreqAbove(t) => (0..n as u32)
            .filter(|&id| vocab.relative_frequency(id) > t)
            .collect(),
        ContextScenario::FreqBand(lo, hi) => (0..n as u32)
            .filter(|&id| {
                let f = vocab.relative_frequency(id);
                f > lo && f < hi
            })
            .collect(),
    };
    Ok(ContextDictionary::from_ids(ids))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusMode {
    /// Each line of each file is one document.
    SentencePerLine,
    /// Each file is one document.
    DocumentPerFile,
}

/// Streams documents from plain-text files as normalized token lists.
pub struct CorpusReader {
    paths: Vec<PathBuf>,
    mode: CorpusMode,
    normalize: bool,
    use_tokenizer: bool,
}

impl CorpusReader {
    pub fn new<P: Into<PathBuf>>(paths: Vec<P>, mode: CorpusMode) -> Self {
        CorpusReader {
            paths: paths.into_iter().map(Into::into).collect(),
            mode,
            normalize: true,
            use_tokenizer: false,
        }
    }

    pub fn normalize(mut self, on: bool) -> Self {
        self.normalize = on;
        self
    }

    pub fn use_tokenizer(mut self, on: bool) -> Self {
        self.use_tokenizer = on;
        self
    }

    fn split(&self, text: &str) -> Vec<String> {
        let raw: Vec<String> = if self.use_tokenizer {
            tokenize(text)
        } else {
            text.split_whitespace().map(str::to_string).collect()
        };
        if self.normalize {
            raw.iter().map(|t| normalize_token(t)).collect()
        } else {
            raw
        }
    }

    pub fn for_each_document<F>(&self, mut f: F) -> Result<(), CorpusError>
    where
        F: FnMut(Vec<String>),
    {
        for path in &self.paths {
            match self.mode {
                CorpusMode::SentencePerLine => {
                    let reader = BufReader::new(File::open(path)?);
                    for line in reader.lines() {
                        let line = line?;
                        let doc = self.split(&line);
                        if !doc.is_empty() {
                            f(doc);
                        }
                    }
                }
                CorpusMode::DocumentPerFile => {
                    let mut text = String::new();
                    File::open(path)?.read_to_string(&mut text)?;
                    let doc = self.split(&text);
                    if !doc.is_empty() {
                        f(doc);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn read_all(&self) -> Result<Vec<Vec<String>>, CorpusError> {
        let mut docs = Vec::new();
        self.for_each_document(|d| docs.push(d))?;
        Ok(docs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_lowercases() {
        assert_eq!(normalize_token("The"), "the");
    }

    #[test]
    fn normalize_replaces_digit_runs() {
        assert_eq!(normalize_token("1984"), "NUMBER");
        assert_eq!(normalize_token("mp3-player"), "mpNUMBER-player");
        assert_eq!(normalize_token("1A2"), "NUMBERaNUMBER");
    }

    #[test]
    fn normalize_sentinel_is_stable() {
        assert_eq!(normalize_token("NUMBER"), "NUMBER");
        assert_eq!(normalize_token("NuMbEr"), "number");
    }

    #[test]
    fn tokenizer_splits_punctuation_keeps_joiners() {
        assert_eq!(
            tokenize("The cat, (sadly) isn't mp3-ready."),
            vec!["The", "cat", ",", "(", "sadly", ")", "isn't", "mp3-ready", "."]
        );
    }

    #[test]
    fn vocabulary_applies_min_count() {
        let v = build_vocabulary(["a", "a", "a", "b"], 2);
        assert_eq!(v.len(), 1);
        assert_eq!(v.id("a"), Some(0));
        assert_eq!(v.count(0), 3);
        assert_eq!(v.total_tokens(), 4);
    }

    #[test]
    fn vocabulary_breaks_ties_lexicographically() {
        let v = build_vocabulary(["c", "a", "b"], 1);
        assert_eq!(v.word(0), "a");
        assert_eq!(v.word(1), "b");
        assert_eq!(v.word(2), "c");
    }

    #[test]
    fn empty_stream_gives_empty_vocabulary() {
        let v = build_vocabulary(Vec::<String>::new(), 1);
        assert!(v.is_empty());
        assert_eq!(v.total_tokens(), 0);
    }

    #[test]
    fn index_inverts_entries() {
        let v = build_vocabulary(["x", "y", "x", "z", "z", "z"], 1);
        for id in 0..v.len() as u32 {
            assert_eq!(v.id(v.word(id)), Some(id));
        }
    }

    fn abc_vocab() -> Vocabulary {
        let mut counts = HashMap::new();
        counts.insert("a".to_string(), 5);
        counts.insert("b".to_string(), 3);
        counts.insert("c".to_string(), 2);
        Vocabulary::from_counts(counts, 10, 1).unwrap()
    }

    #[test]
    fn select_top_k() {
        let d = select_context_dictionary(&abc_vocab(), &ContextScenario::TopK(2)).unwrap();
        assert_eq!(d.iter_vocab_ids().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn select_freq_below_is_strict() {
        // relative frequencies are 0.5, 0.3, 0.2; b sits exactly at 0.3
        let d = select_context_dictionary(&abc_vocab(), &ContextScenario::FreqBelow(0.3)).unwrap();
        assert_eq!(d.iter_vocab_ids().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn select_freq_band() {
        let d = select_context_dictionary(&abc_vocab(), &ContextScenario::FreqBand(0.15, 0.4))
            .unwrap();
        assert_eq!(d.iter_vocab_ids().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn select_top_k_clamps() {
        let d = select_context_dictionary(&abc_vocab(), &ContextScenario::TopK(99)).unwrap();
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn select_all_follows_id_order() {
        let d = select_context_dictionary(&abc_vocab(), &ContextScenario::All).unwrap();
        assert_eq!(d.iter_vocab_ids().collect::<Vec<_>>(), vec![0, 1, 2]);
        for col in 0..3u32 {
            assert_eq!(d.column_of(d.vocab_id_of_column(col)), Some(col));
        }
    }

    #[test]
    fn scenario_validation_rejects_bad_band() {
        assert!(ContextScenario::FreqBand(0.5, 0.1).validate().is_err());
        assert!(ContextScenario::TopK(0).validate().is_err());
        assert!("band:1e-6,1e-5".parse::<ContextScenario>().is_ok());
        assert!("band:1e-5,1e-6".parse::<ContextScenario>().is_err());
    }

    #[test]
    fn vocab_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        let v = build_vocabulary(["b", "a", "b", "c", "b", "q"], 2);
        v.write_to_path(&path).unwrap();
        let loaded = Vocabulary::read_from_path(&path).unwrap();
        assert_eq!(loaded.len(), v.len());
        assert_eq!(loaded.total_tokens(), 6);
        assert_eq!(loaded.word(0), "b");
        assert_eq!(loaded.count(0), 3);
    }

    #[test]
    fn vocab_file_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        std::fs::write(&path, "a\t3\nb\tnot-a-number\n").unwrap();
        match Vocabulary::read_from_path(&path) {
            Err(CorpusError::MalformedVocabLine { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected malformed-line error, got {other:?}"),
        }
    }

    #[test]
    fn sentence_per_line_reader() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.txt");
        std::fs::write(&path, "The cat sat\n\non the 3 mats\n").unwrap();
        let docs = CorpusReader::new(vec![path], CorpusMode::SentencePerLine)
            .read_all()
            .unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0], vec!["the", "cat", "sat"]);
        assert_eq!(docs[1], vec!["on", "the", "NUMBER", "mats"]);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(raw in "\\PC{1,40}") {
            let once = normalize_token(&raw);
            prop_assert_eq!(normalize_token(&once), once);
        }

        #[test]
        fn counts_bounded_by_total(tokens in proptest::collection::vec("[a-e]", 0..200),
                                   min_count in 1u64..4) {
            let v = build_vocabulary(tokens.iter(), min_count);
            let sum: u64 = v.iter().map(|(_, c)| c).sum();
            prop_assert!(sum <= v.total_tokens());
            if min_count == 1 {
                prop_assert_eq!(sum, v.total_tokens());
            }
        }

        #[test]
        fn freq_threshold_partitions_vocab(counts in proptest::collection::vec(1u64..50, 1..20),
                                           theta in 0.01f64..0.9) {
            let map: HashMap<String, u64> = counts
                .iter()
                .enumerate()
                .map(|(i, &c)| (format!("w{i}"), c))
                .collect();
            let total: u64 = counts.iter().sum();
            let v = Vocabulary::from_counts(map, total, 1).unwrap();
            let below =
                select_context_dictionary(&v, &ContextScenario::FreqBelow(theta)).unwrap();
            let above =
                select_context_dictionary(&v, &ContextScenario::FreqAbove(theta)).unwrap();
            let at: Vec<u32> = (0..v.len() as u32)
                .filter(|&id| v.relative_frequency(id) == theta)
                .collect();
            prop_assert_eq!(below.len() + above.len() + at.len(), v.len());
            for id in 0..v.len() as u32 {
                let in_below = below.column_of(id).is_some();
                let in_above = above.column_of(id).is_some();
                let in_at = at.contains(&id);
                prop_assert_eq!(usize::from(in_below) + usize::from(in_above) + usize::from(in_at), 1);
            }
        }
    }
}
