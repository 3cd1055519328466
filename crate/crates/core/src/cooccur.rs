//! Windowed co-occurrence counting and the square-root conditional
//! probability transform.
//!
//! Counts n(c,w) are accumulated per document; windows clip at document
//! boundaries and never cross them, which keeps sharded counting and a
//! final [`merge`] bit-identical to a single sequential pass. Out-of-
//! vocabulary tokens occupy window positions but contribute no counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use crate::corpus::{ContextDictionary, ContextScenario, Vocabulary, WindowSpec};

const MAGIC: &[u8; 6] = b"HCOOC1";

/// Sparse row: (column id, value) pairs with strictly increasing columns
/// and strictly positive values.
pub type SparseRow = Vec<(u32, f64)>;

#[derive(Debug, Error)]
pub enum CoocError {
    #[error("cannot merge: {0}")]
    MergeMismatch(String),
    #[error("malformed co-occurrence file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Payload discriminator of the binary container.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Counts = 0,
    SqrtProbabilities = 1,
}

/// Raw windowed counts n(c,w), one sparse row per vocabulary word.
#[derive(Debug, Clone)]
pub struct CooccurrenceMatrix {
    rows: Vec<SparseRow>,
    n_contexts: u32,
    window: WindowSpec,
    scenario: Option<ContextScenario>,
}

impl CooccurrenceMatrix {
    pub fn n_words(&self) -> usize {
        self.rows.len()
    }

    pub fn n_contexts(&self) -> usize {
        self.n_contexts as usize
    }

    pub fn window(&self) -> WindowSpec {
        self.window
    }

    /// `None` when the matrix was loaded from a file, which does not record
    /// the selection scenario.
    pub fn scenario(&self) -> Option<&ContextScenario> {
        self.scenario.as_ref()
    }

    pub fn row(&self, word: u32) -> &[(u32, f64)] {
        &self.rows[word as usize]
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn total_mass(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(_, v)| v).sum::<f64>())
            .sum()
    }

    pub fn write_to_path(&self, path: &Path) -> Result<(), CoocError> {
        let mut w = BufWriter::new(File::create(path)?);
        write_container(
            &mut w,
            MatrixKind::Counts,
            &self.rows,
            self.n_contexts,
            self.window,
        )
    }
}

/// Rows √P_w of the matrix C̃: each nonzero row is an elementwise square
/// root of a conditional distribution, hence unit ℓ2 norm.
#[derive(Debug, Clone)]
pub struct DistributionMatrix {
    rows: Vec<SparseRow>,
    n_contexts: u32,
    zero_rows: BTreeSet<u32>,
    window: WindowSpec,
    scenario: Option<ContextScenario>,
}

impl DistributionMatrix {
    /// Wraps pre-built sparse rows; words with empty rows are recorded as
    /// zero rows. Values are taken as-is.
    pub fn from_rows(
        rows: Vec<SparseRow>,
        n_contexts: u32,
        window: WindowSpec,
        scenario: Option<ContextScenario>,
    ) -> Self {
        let zero_rows = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_empty())
            .map(|(i, _)| i as u32)
            .collect();
        DistributionMatrix {
            rows,
            n_contexts,
            zero_rows,
            window,
            scenario,
        }
    }

    pub fn n_words(&self) -> usize {
        self.rows.len()
    }

    pub fn n_contexts(&self) -> usize {
        self.n_contexts as usize
    }

    pub fn window(&self) -> WindowSpec {
        self.window
    }

    pub fn scenario(&self) -> Option<&ContextScenario> {
        self.scenario.as_ref()
    }

    pub fn row(&self, word: u32) -> &[(u32, f64)] {
        &self.rows[word as usize]
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    /// Words that had no counted context under this scenario and window.
    pub fn zero_rows(&self) -> &BTreeSet<u32> {
        &self.zero_rows
    }

    pub fn is_zero_row(&self, word: u32) -> bool {
        self.zero_rows.contains(&word)
    }

    pub fn write_to_path(&self, path: &Path) -> Result<(), CoocError> {
        let mut w = BufWriter::new(File::create(path)?);
        write_container(
            &mut w,
            MatrixKind::SqrtProbabilities,
            &self.rows,
            self.n_contexts,
            self.window,
        )
    }
}

/// Counts windowed co-occurrences over a batch of documents.
///
/// For a center word at position i, context positions are i+1..=i+size for
/// an asymmetric window, plus i-size..=i-1 for a symmetric one, clipped at
/// document boundaries. The center position itself is never counted.
pub fn count_cooccurrences(
    docs: &[Vec<String>],
    vocab: &Vocabulary,
    ctx: &ContextDictionary,
    window: WindowSpec,
) -> CooccurrenceMatrix {
    let mut rows: Vec<HashMap<u32, f64>> = vec![HashMap::new(); vocab.len()];
    for doc in docs {
        let word_ids: Vec<Option<u32>> = doc.iter().map(|t| vocab.id(t)).collect();
        let col_ids: Vec<Option<u32>> = word_ids
            .iter()
            .map(|id| id.and_then(|i| ctx.column_of(i)))
            .collect();
        for (i, center) in word_ids.iter().enumerate() {
            let Some(w) = *center else { continue };
            let row = &mut rows[w as usize];
            let lo = if window.symmetric {
                i.saturating_sub(window.size)
            } else {
                i + 1
            };
            let hi = (i + window.size).min(doc.len() - 1);
            // j is a window position, not a collection cursor
            #[allow(clippy::needless_range_loop)]
            for j in lo..=hi {
                if j == i {
                    continue;
                }
                if let Some(c) = col_ids[j] {
                    *row.entry(c).or_insert(0.0) += 1.0;
                }
            }
        }
    }
    let rows = rows
        .into_iter()
        .map(|m| {
            let mut row: SparseRow = m.into_iter().collect();
            row.sort_unstable_by_key(|&(c, _)| c);
            row
        })
        .collect();
    CooccurrenceMatrix {
        rows,
        n_contexts: ctx.len() as u32,
        window,
        scenario: None,
    }
}

impl CooccurrenceMatrix {
    /// Attaches the scenario the context dictionary was selected under.
    pub fn set_scenario(&mut self, scenario: ContextScenario) {
        self.scenario = Some(scenario);
    }
}

/// Elementwise sum of partial count matrices. All parts must agree on
/// dimensions, window, and scenario.
pub fn merge(parts: Vec<CooccurrenceMatrix>) -> Result<CooccurrenceMatrix, CoocError> {
    let mut iter = parts.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| CoocError::MergeMismatch("no parts given".into()))?;
    let mut acc: Vec<BTreeMap<u32, f64>> = first
        .rows
        .iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    for part in iter {
        if part.n_words() != acc.len() || part.n_contexts != first.n_contexts {
            return Err(CoocError::MergeMismatch(format!(
                "dimension mismatch: ({}, {}) vs ({}, {})",
                part.n_words(),
                part.n_contexts,
                acc.len(),
                first.n_contexts
            )));
        }
        if part.window != first.window {
            return Err(CoocError::MergeMismatch("window mismatch".into()));
        }
        if part.scenario != first.scenario {
            return Err(CoocError::MergeMismatch("scenario mismatch".into()));
        }
        for (target, row) in acc.iter_mut().zip(&part.rows) {
            for &(c, v) in row {
                *target.entry(c).or_insert(0.0) += v;
            }
        }
    }
    Ok(CooccurrenceMatrix {
        rows: acc
            .into_iter()
            .map(|m| m.into_iter().filter(|&(_, v)| v != 0.0).collect())
            .collect(),
        n_contexts: first.n_contexts,
        window: first.window,
        scenario: first.scenario,
    })
}

/// Maps each counted row to √(n(c,w) / Σ_c n(c,w)). Rows with no counts are
/// recorded as zero rows and left empty.
pub fn normalize_rows(counts: &CooccurrenceMatrix) -> DistributionMatrix {
    let mut zero_rows = BTreeSet::new();
    let rows = counts
        .rows
        .iter()
        .enumerate()
        .map(|(w, row)| {
            let sum: f64 = row.iter().map(|(_, v)| v).sum();
            if sum <= 0.0 {
                zero_rows.insert(w as u32);
                Vec::new()
            } else {
                row.iter().map(|&(c, v)| (c, (v / sum).sqrt())).collect()
            }
        })
        .collect();
    DistributionMatrix {
        rows,
        n_contexts: counts.n_contexts,
        zero_rows,
        window: counts.window,
        scenario: counts.scenario.clone(),
    }
}

/// Mean number of stored entries per row, over all words.
pub fn avg_nonzero_contexts(m: &CooccurrenceMatrix) -> f64 {
    if m.rows.is_empty() {
        return 0.0;
    }
    let nnz: usize = m.rows.iter().map(Vec::len).sum();
    nnz as f64 / m.rows.len() as f64
}

fn write_container<W: Write>(
    w: &mut W,
    kind: MatrixKind,
    rows: &[SparseRow],
    n_contexts: u32,
    window: WindowSpec,
) -> Result<(), CoocError> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(rows.len() as u32)?;
    w.write_u32::<LittleEndian>(n_contexts)?;
    w.write_u32::<LittleEndian>(window.size as u32)?;
    w.write_u8(window.symmetric as u8)?;
    w.write_u8(kind as u8)?;
    for (id, row) in rows.iter().enumerate() {
        w.write_u32::<LittleEndian>(id as u32)?;
        w.write_u32::<LittleEndian>(row.len() as u32)?;
        for &(c, v) in row {
            w.write_u32::<LittleEndian>(c)?;
            w.write_f64::<LittleEndian>(v)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Either payload of the binary container.
pub enum LoadedMatrix {
    Counts(CooccurrenceMatrix),
    SqrtProbabilities(DistributionMatrix),
}

pub fn read_matrix_from_path(path: &Path) -> Result<LoadedMatrix, CoocError> {
    let mut r = BufReader::new(File::open(path)?);
    read_container(&mut r)
}

fn read_container<R: Read>(r: &mut R) -> Result<LoadedMatrix, CoocError> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CoocError::Malformed("bad magic bytes".into()));
    }
    let n_words = r.read_u32::<LittleEndian>()?;
    let n_contexts = r.read_u32::<LittleEndian>()?;
    let size = r.read_u32::<LittleEndian>()? as usize;
    let symmetric = match r.read_u8()? {
        0 => false,
        1 => true,
        b => return Err(CoocError::Malformed(format!("bad symmetric flag {b}"))),
    };
    let kind = match r.read_u8()? {
        0 => MatrixKind::Counts,
        1 => MatrixKind::SqrtProbabilities,
        b => return Err(CoocError::Malformed(format!("bad kind byte {b}"))),
    };
    let window = WindowSpec::new(size, symmetric)
        .map_err(|e| CoocError::Malformed(format!("bad window: {e}")))?;

    let mut rows: Vec<Option<SparseRow>> = vec![None; n_words as usize];
    for _ in 0..n_words {
        let id = r.read_u32::<LittleEndian>()?;
        if id >= n_words {
            return Err(CoocError::Malformed(format!(
                "row id {id} out of range (|W| = {n_words})"
            )));
        }
        let nnz = r.read_u32::<LittleEndian>()?;
        let mut row = Vec::with_capacity(nnz as usize);
        let mut prev: Option<u32> = None;
        for _ in 0..nnz {
            let c = r.read_u32::<LittleEndian>()?;
            let v = r.read_f64::<LittleEndian>()?;
            if c >= n_contexts {
                return Err(CoocError::Malformed(format!(
                    "column {c} out of range (|D| = {n_contexts})"
                )));
            }
            if prev.is_some_and(|p| c <= p) {
                return Err(CoocError::Malformed(
                    "columns must be strictly increasing within a row".into(),
                ));
            }
            prev = Some(c);
            row.push((c, v));
        }
        if rows[id as usize].replace(row).is_some() {
            return Err(CoocError::Malformed(format!("duplicate row id {id}")));
        }
    }
    let rows: Vec<SparseRow> = rows.into_iter().map(|r| r.unwrap_or_default()).collect();
    Ok(match kind {
        MatrixKind::Counts => LoadedMatrix::Counts(CooccurrenceMatrix {
            rows,
            n_contexts,
            window,
            scenario: None,
        }),
        MatrixKind::SqrtProbabilities => {
            LoadedMatrix::SqrtProbabilities(DistributionMatrix::from_rows(
                rows, n_contexts, window, None,
            ))
        }
    })
}
