//! Word-similarity and word-analogy evaluation over either raw √P
//! distributions (Hellinger distance) or dense embeddings (cosine).
//!
//! Out-of-vocabulary words and zero rows are never imputed: the affected
//! pair or question is skipped and the skip is reported next to the score.

use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::cooccur::DistributionMatrix;
use crate::corpus::{normalize_token, Vocabulary};
use crate::hellinger::hellinger_distance;
use crate::reduce::TextEmbeddings;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("malformed dataset line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("score lists differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("rank correlation undefined: an input ranking is constant")]
    DegenerateRanking,
    #[error("every pair or question was skipped; nothing to evaluate")]
    AllSkipped,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone)]
pub struct SimilarityDataset {
    pub pairs: Vec<(String, String, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityFormat {
    Auto,
    Tab,
    Comma,
}

/// Loads word pairs with human scores. Words pass through
/// [`normalize_token`]; a single header line is tolerated; lines may carry
/// extra trailing fields (only the first three are read).
pub fn load_similarity(
    path: &Path,
    format: SimilarityFormat,
) -> Result<SimilarityDataset, EvalError> {
    let reader = BufReader::new(File::open(path)?);
    let mut pairs = Vec::new();
    let mut sep: Option<char> = match format {
        SimilarityFormat::Auto => None,
        SimilarityFormat::Tab => Some('\t'),
        SimilarityFormat::Comma => Some(','),
    };
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        // the separator locks in on the first line that parses; a leading
        // header never constrains it
        let s = sep.unwrap_or(if line.contains('\t') { '\t' } else { ',' });
        let fields: Vec<&str> = line.split(s).map(str::trim).collect();
        if fields.len() < 3 {
            if lineno == 0 {
                continue; // header
            }
            return Err(EvalError::Malformed {
                line: lineno,
                reason: format!("expected at least 3 {s:?}-separated fields"),
            });
        }
        match fields[2].parse::<f64>() {
            Ok(score) if score.is_finite() => {
                sep = Some(s);
                pairs.push((
                    normalize_token(fields[0]),
                    normalize_token(fields[1]),
                    score,
                ));
            }
            _ if lineno == 0 => continue, // header
            _ => {
                return Err(EvalError::Malformed {
                    line: lineno,
                    reason: format!("bad score {:?}", fields[2]),
                })
            }
        }
    }
    if pairs.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    Ok(SimilarityDataset { pairs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Semantic,
    Syntactic,
}

#[derive(Debug, Clone)]
pub struct AnalogyQuestion {
    pub a: String,
    pub b: String,
    pub c: String,
    pub expected: String,
    pub section: Section,
}

#[derive(Debug, Clone)]
pub struct AnalogyDataset {
    pub questions: Vec<AnalogyQuestion>,
}

/// Loads a Mikolov-format analogy file: lines of four space-separated
/// words, with `: section-name` delimiters. Sections whose name contains
/// "gram" are syntactic, all others semantic (also the default before any
/// delimiter).
pub fn load_analogies(path: &Path) -> Result<AnalogyDataset, EvalError> {
    let reader = BufReader::new(File::open(path)?);
    let mut questions = Vec::new();
    let mut section = Section::Semantic;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix(':') {
            section = if name.to_lowercase().contains("gram") {
                Section::Syntactic
            } else {
                Section::Semantic
            };
            continue;
        }
        let words: Vec<&str> = trimmed.split_whitespace().collect();
        if words.len() != 4 {
            return Err(EvalError::Malformed {
                line: lineno,
                reason: format!("expected 4 words, found {}", words.len()),
            });
        }
        questions.push(AnalogyQuestion {
            a: normalize_token(words[0]),
            b: normalize_token(words[1]),
            c: normalize_token(words[2]),
            expected: normalize_token(words[3]),
            section,
        });
    }
    if questions.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    Ok(AnalogyDataset { questions })
}

fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // ranks are 1-based; ties share the average rank of their run
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(model: &[f64], human: &[f64]) -> Result<f64, EvalError> {
    if model.len() != human.len() || model.is_empty() {
        return Err(EvalError::LengthMismatch {
            left: model.len(),
            right: human.len(),
        });
    }
    let ra = average_ranks(model);
    let rb = average_ranks(human);
    let n = ra.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (a, b) in ra.iter().zip(&rb) {
        cov += (a - mean) * (b - mean);
        var_a += (a - mean) * (a - mean);
        var_b += (b - mean) * (b - mean);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(EvalError::DegenerateRanking);
    }
    Ok(cov / (var_a * var_b).sqrt())
}

/// A word representation that can be scored: raw √P distributions under
/// the Hellinger distance, or dense vectors under cosine.
pub enum Repr<'a> {
    Raw {
        matrix: &'a DistributionMatrix,
        vocab: &'a Vocabulary,
    },
    Dense(&'a TextEmbeddings),
}

impl<'a> Repr<'a> {
    fn id(&self, word: &str) -> Option<u32> {
        match self {
            Repr::Raw { vocab, .. } => vocab.id(word),
            Repr::Dense(emb) => emb.index.get(word).copied(),
        }
    }

    fn word(&self, id: u32) -> &str {
        match self {
            Repr::Raw { vocab, .. } => vocab.word(id),
            Repr::Dense(emb) => &emb.words[id as usize],
        }
    }

    fn n_words(&self) -> usize {
        match self {
            Repr::Raw { matrix, .. } => matrix.n_words(),
            Repr::Dense(emb) => emb.words.len(),
        }
    }

    fn representable(&self, id: u32) -> bool {
        match self {
            Repr::Raw { matrix, .. } => !matrix.is_zero_row(id),
            Repr::Dense(emb) => emb.row(id).iter().any(|&v| v != 0.0),
        }
    }

    fn lookup(&self, word: &str) -> Option<u32> {
        self.id(word).filter(|&id| self.representable(id))
    }

    /// Similarity for ranking: negated Hellinger distance for raw rows,
    /// cosine for dense vectors. `None` means the pair must be skipped.
    pub fn similarity_score(&self, w1: &str, w2: &str) -> Option<f64> {
        let (i, j) = (self.lookup(w1)?, self.lookup(w2)?);
        Some(match self {
            Repr::Raw { matrix, .. } => -hellinger_distance(matrix.row(i), matrix.row(j)),
            Repr::Dense(emb) => cosine(emb.row(i), emb.row(j)),
        })
    }

    /// Similarity shifted into [0, 1] for the multiplicative analogy
    /// objective: (cos+1)/2 for dense vectors, 1 − H for raw rows.
    fn affinity(&self, x: u32, q: u32) -> f64 {
        match self {
            Repr::Raw { matrix, .. } => {
                1.0 - hellinger_distance(matrix.row(x), matrix.row(q))
            }
            Repr::Dense(emb) => (cosine(emb.row(x), emb.row(q)) + 1.0) / 2.0,
        }
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    dot / (na.sqrt() * nb.sqrt())
}

pub const DEFAULT_3COSMUL_EPSILON: f64 = 0.001;

/// Answers "a is to b as c is to ?" with the 3CosMul objective
/// argmax_x s(x,b)·s(x,c) / (s(x,a) + ε) over all representable words
/// except the question words; ties break toward the smaller word id.
/// `None` means the question must be skipped.
pub fn answer_analogy_3cosmul(
    repr: &Repr,
    a: &str,
    b: &str,
    c: &str,
    epsilon: f64,
) -> Option<String> {
    let (ia, ib, ic) = (repr.lookup(a)?, repr.lookup(b)?, repr.lookup(c)?);
    let mut best: Option<(f64, u32)> = None;
    for x in 0..repr.n_words() as u32 {
        if x == ia || x == ib || x == ic || !repr.representable(x) {
            continue;
        }
        let score = repr.affinity(x, ib) * repr.affinity(x, ic) / (repr.affinity(x, ia) + epsilon);
        // strict improvement keeps the smallest id on ties
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, x));
        }
    }
    best.map(|(_, x)| repr.word(x).to_string())
}

/// Task score plus honest coverage: `evaluated + skipped` always equals
/// the dataset size.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub task: String,
    pub score: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Spearman correlation between model similarities and human scores over
/// the pairs both words of which are representable.
pub fn evaluate_similarity(
    repr: &Repr,
    ds: &SimilarityDataset,
    task: &str,
) -> Result<EvalReport, EvalError> {
    let scored: Vec<Option<f64>> = ds
        .pairs
        .par_iter()
        .map(|(w1, w2, _)| repr.similarity_score(w1, w2))
        .collect();
    let mut model = Vec::new();
    let mut human = Vec::new();
    for (s, (_, _, h)) in scored.iter().zip(&ds.pairs) {
        if let Some(s) = s {
            model.push(*s);
            human.push(*h);
        }
    }
    if model.is_empty() {
        return Err(EvalError::AllSkipped);
    }
    Ok(EvalReport {
        task: task.to_string(),
        score: spearman(&model, &human)?,
        evaluated: model.len(),
        skipped: ds.pairs.len() - model.len(),
    })
}

#[derive(Debug, Clone)]
pub struct AnalogyReport {
    pub semantic: EvalReport,
    pub syntactic: EvalReport,
    pub total: EvalReport,
}

/// Exact-match accuracy under 3CosMul, reported per section and overall.
/// A question with any unrepresentable word (including the expected
/// answer) is skipped and excluded from the denominator; a section with
/// nothing evaluated reports a score of 0.
pub fn evaluate_analogy(repr: &Repr, ds: &AnalogyDataset, epsilon: f64) -> AnalogyReport {
    let outcomes: Vec<(Section, Option<bool>)> = ds
        .questions
        .par_iter()
        .map(|q| {
            if repr.lookup(&q.expected).is_none() {
                return (q.section, None);
            }
            let answer = answer_analogy_3cosmul(repr, &q.a, &q.b, &q.c, epsilon);
            (q.section, answer.map(|w| w == q.expected))
        })
        .collect();

    let mut counts = [(0usize, 0usize, 0usize); 2]; // (correct, evaluated, skipped)
    for (section, outcome) in outcomes {
        let slot = &mut counts[(section == Section::Syntactic) as usize];
        match outcome {
            Some(correct) => {
                slot.0 += correct as usize;
                slot.1 += 1;
            }
            None => slot.2 += 1,
        }
    }
    let report = |task: &str, (correct, evaluated, skipped): (usize, usize, usize)| EvalReport {
        task: task.to_string(),
        score: if evaluated == 0 {
            0.0
        } else {
            correct as f64 / evaluated as f64
        },
        evaluated,
        skipped,
    };
    let total = (
        counts[0].0 + counts[1].0,
        counts[0].1 + counts[1].1,
        counts[0].2 + counts[1].2,
    );
    AnalogyReport {
        semantic: report("semantic", counts[0]),
        syntactic: report("syntactic", counts[1]),
        total: report("total", total),
    }
}
