//! Dimensionality reduction of the √P matrix: uncentered PCA of the Gram
//! matrix C̃ᵀC̃, and a stochastic low-rank approximation trained by SGD.
//! Both expose the encoder U, which maps any √P vector into d dimensions.

mod pca;
mod slra;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array2;
use thiserror::Error;

use crate::cooccur::DistributionMatrix;
use crate::corpus::Vocabulary;
use crate::fingerprint::Fingerprint;

pub use pca::{hellinger_pca, CovariancePrecision, PcaOptions};
pub use slra::{per_row_gradients, per_row_loss, slra_train, SlraHyperparams};

const MAGIC: &[u8; 5] = b"HENC1";

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("requested dimension {d} is invalid for {n_contexts} context words")]
    InvalidDim { d: usize, n_contexts: usize },
    #[error(
        "dense Gram matrix for {n_contexts} context words needs {bytes} bytes \
         (limit {limit}); use SLRA instead"
    )]
    GramTooLarge {
        n_contexts: usize,
        bytes: usize,
        limit: usize,
    },
    #[error("SGD diverged at epoch {epoch}: loss {loss:.6e} exceeds 10x initial {initial:.6e}")]
    Diverged {
        epoch: usize,
        loss: f64,
        initial: f64,
    },
    #[error("bad hyperparameters: {0}")]
    BadHyperparams(String),
    #[error("encoder fingerprint mismatch: encoder was trained under a different context configuration")]
    FingerprintMismatch,
    #[error("malformed encoder or embedding file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceMethod {
    Pca = 0,
    Slra = 1,
}

/// The trained encoder U ∈ ℝ^{|D|×d}. A fingerprint binds it to the
/// vocabulary, scenario, and window it was trained under.
#[derive(Debug, Clone)]
pub struct Encoder {
    u: Array2<f64>,
    method: ReduceMethod,
    fingerprint: Fingerprint,
}

impl Encoder {
    pub(crate) fn new(u: Array2<f64>, method: ReduceMethod, fingerprint: Fingerprint) -> Self {
        Encoder {
            u,
            method,
            fingerprint,
        }
    }

    pub fn n_contexts(&self) -> usize {
        self.u.nrows()
    }

    pub fn dim(&self) -> usize {
        self.u.ncols()
    }

    pub fn method(&self) -> ReduceMethod {
        self.method
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    pub fn u(&self) -> &Array2<f64> {
        &self.u
    }

    /// Uᵀ·x for a sparse √P vector indexed over the encoder's context
    /// dictionary. The caller passes the fingerprint of the configuration
    /// that produced `x`; a mismatch means the vector lives in a different
    /// column space and is rejected.
    pub fn encode(&self, x: &[(u32, f64)], fingerprint: Fingerprint) -> Result<Vec<f64>, ReduceError> {
        if fingerprint != self.fingerprint {
            return Err(ReduceError::FingerprintMismatch);
        }
        Ok(self.encode_unchecked(x))
    }

    pub(crate) fn encode_unchecked(&self, x: &[(u32, f64)]) -> Vec<f64> {
        let d = self.u.ncols();
        let us = self.u.as_slice().expect("row-major encoder");
        let mut out = vec![0.0; d];
        for &(c, v) in x {
            let row = &us[c as usize * d..(c as usize + 1) * d];
            for (o, &u) in out.iter_mut().zip(row) {
                *o += v * u;
            }
        }
        out
    }

    /// Projection reconstruction error Σ_w ‖UUᵀ√P_w − √P_w‖² (V := U).
    pub fn projection_error(&self, m: &DistributionMatrix) -> f64 {
        reconstruction_error(m, &self.u, &self.u)
    }
}

/// The SLRA factor pair: `encoder.u` maps into d dimensions, `v`
/// reconstructs. `loss_history[0]` is the loss at initialization and each
/// following entry is the full loss at an epoch end.
#[derive(Debug, Clone)]
pub struct SlraModel {
    pub encoder: Encoder,
    v: Array2<f64>,
    hyperparams: SlraHyperparams,
    pub loss_history: Vec<f64>,
}

impl SlraModel {
    pub fn v(&self) -> &Array2<f64> {
        &self.v
    }

    pub fn hyperparams(&self) -> &SlraHyperparams {
        &self.hyperparams
    }

    pub fn reconstruction_error(&self, m: &DistributionMatrix) -> f64 {
        reconstruction_error(m, &self.encoder.u, &self.v)
    }

    pub fn write_to_path(&self, path: &Path) -> Result<(), ReduceError> {
        write_encoder(path, &self.encoder, Some(&self.v))
    }
}

/// Σ over nonzero rows of ‖VUᵀ√P_w − √P_w‖².
pub fn reconstruction_error(m: &DistributionMatrix, u: &Array2<f64>, v: &Array2<f64>) -> f64 {
    let d = u.ncols();
    let n = u.nrows();
    assert_eq!(v.nrows(), n, "U and V must share dimensions");
    assert_eq!(v.ncols(), d, "U and V must share dimensions");
    let us = u.as_slice().expect("row-major");
    let vs = v.as_slice().expect("row-major");
    reconstruction_error_slices(m, us, vs, n, d)
}

pub(crate) fn reconstruction_error_slices(
    m: &DistributionMatrix,
    us: &[f64],
    vs: &[f64],
    n: usize,
    d: usize,
) -> f64 {
    let mut total = 0.0;
    let mut h = vec![0.0; d];
    let mut y = vec![0.0; n];
    for row in m.rows() {
        if row.is_empty() {
            continue;
        }
        h.iter_mut().for_each(|e| *e = 0.0);
        for &(c, xv) in row {
            let ur = &us[c as usize * d..(c as usize + 1) * d];
            for (hj, &uj) in h.iter_mut().zip(ur) {
                *hj += xv * uj;
            }
        }
        for (c2, yc) in y.iter_mut().enumerate() {
            let vr = &vs[c2 * d..(c2 + 1) * d];
            *yc = vr.iter().zip(&h).map(|(&a, &b)| a * b).sum();
        }
        for &(c, xv) in row {
            y[c as usize] -= xv;
        }
        total += y.iter().map(|e| e * e).sum::<f64>();
    }
    total
}

/// Dense |W|×d embeddings, row w = Uᵀ√P_w. Zero rows carry zero vectors.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    vectors: Array2<f64>,
    zero_rows: BTreeSet<u32>,
    fingerprint: Fingerprint,
}

impl EmbeddingMatrix {
    pub fn n_words(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn row(&self, w: u32) -> &[f64] {
        let d = self.vectors.ncols();
        let s = self.vectors.as_slice().expect("row-major");
        &s[w as usize * d..(w as usize + 1) * d]
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn zero_rows(&self) -> &BTreeSet<u32> {
        &self.zero_rows
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }
}

/// Encodes every row of the distribution matrix through the encoder.
pub fn embed_all(m: &DistributionMatrix, enc: &Encoder) -> EmbeddingMatrix {
    let d = enc.dim();
    let mut vectors = Array2::zeros((m.n_words(), d));
    for (w, row) in m.rows().iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        let emb = enc.encode_unchecked(row);
        vectors.row_mut(w).iter_mut().zip(&emb).for_each(|(o, &e)| *o = e);
    }
    EmbeddingMatrix {
        vectors,
        zero_rows: m.zero_rows().clone(),
        fingerprint: enc.fingerprint(),
    }
}

/// Writes the binary encoder container. `v` must be given exactly when the
/// encoder came from SLRA.
pub fn write_encoder(
    path: &Path,
    enc: &Encoder,
    v: Option<&Array2<f64>>,
) -> Result<(), ReduceError> {
    match (enc.method, v.is_some()) {
        (ReduceMethod::Slra, false) => {
            return Err(ReduceError::Malformed(
                "SLRA encoder requires the V matrix".into(),
            ))
        }
        (ReduceMethod::Pca, true) => {
            return Err(ReduceError::Malformed(
                "PCA encoder carries no V matrix".into(),
            ))
        }
        _ => {}
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(enc.n_contexts() as u32)?;
    w.write_u32::<LittleEndian>(enc.dim() as u32)?;
    w.write_u8(enc.method as u8)?;
    w.write_all(enc.fingerprint.as_bytes())?;
    for &x in enc.u.as_slice().expect("row-major") {
        w.write_f64::<LittleEndian>(x)?;
    }
    if let Some(v) = v {
        if v.dim() != enc.u.dim() {
            return Err(ReduceError::Malformed("U/V dimension mismatch".into()));
        }
        for &x in v.as_slice().expect("row-major") {
            w.write_f64::<LittleEndian>(x)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads an encoder container; the V matrix is present exactly for SLRA.
pub fn read_encoder(path: &Path) -> Result<(Encoder, Option<Array2<f64>>), ReduceError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(ReduceError::Malformed("bad magic bytes".into()));
    }
    let n = r.read_u32::<LittleEndian>()? as usize;
    let d = r.read_u32::<LittleEndian>()? as usize;
    let method = match r.read_u8()? {
        0 => ReduceMethod::Pca,
        1 => ReduceMethod::Slra,
        b => return Err(ReduceError::Malformed(format!("bad method byte {b}"))),
    };
    let mut fp = [0u8; 16];
    r.read_exact(&mut fp)?;
    let read_matrix = |r: &mut BufReader<File>| -> Result<Array2<f64>, ReduceError> {
        let mut data = vec![0.0; n * d];
        for x in data.iter_mut() {
            *x = r.read_f64::<LittleEndian>()?;
        }
        Array2::from_shape_vec((n, d), data)
            .map_err(|e| ReduceError::Malformed(format!("bad shape: {e}")))
    };
    let u = read_matrix(&mut r)?;
    let v = match method {
        ReduceMethod::Pca => None,
        ReduceMethod::Slra => Some(read_matrix(&mut r)?),
    };
    Ok((
        Encoder {
            u,
            method,
            fingerprint: Fingerprint::from_bytes(fp),
        },
        v,
    ))
}

/// Embeddings loaded back from the text interchange format.
#[derive(Debug, Clone)]
pub struct TextEmbeddings {
    pub words: Vec<String>,
    pub index: std::collections::HashMap<String, u32>,
    pub vectors: Array2<f64>,
}

impl TextEmbeddings {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn row(&self, id: u32) -> &[f64] {
        let d = self.vectors.ncols();
        let s = self.vectors.as_slice().expect("row-major");
        &s[id as usize * d..(id as usize + 1) * d]
    }
}

/// Text format: first line `|W| d`, then one `word v1 .. vd` line per word
/// in id order, full float precision.
pub fn write_embeddings_text<W: Write>(
    mut w: W,
    emb: &EmbeddingMatrix,
    vocab: &Vocabulary,
) -> Result<(), ReduceError> {
    if vocab.len() != emb.n_words() {
        return Err(ReduceError::Malformed(format!(
            "vocabulary has {} words but embeddings have {} rows",
            vocab.len(),
            emb.n_words()
        )));
    }
    writeln!(w, "{} {}", emb.n_words(), emb.dim())?;
    for id in 0..emb.n_words() as u32 {
        write!(w, "{}", vocab.word(id))?;
        for x in emb.row(id) {
            write!(w, " {x}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_embeddings_text<R: BufRead>(r: R) -> Result<TextEmbeddings, ReduceError> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| ReduceError::Malformed("empty embedding file".into()))??;
    let mut parts = header.split_whitespace();
    let n: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ReduceError::Malformed("bad header".into()))?;
    let d: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ReduceError::Malformed("bad header".into()))?;
    let mut words = Vec::with_capacity(n);
    let mut index = std::collections::HashMap::with_capacity(n);
    let mut data = Vec::with_capacity(n * d);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let word = fields
            .next()
            .ok_or_else(|| ReduceError::Malformed(format!("empty line {}", i + 1)))?;
        let start = data.len();
        for f in fields {
            data.push(f.parse::<f64>().map_err(|e| {
                ReduceError::Malformed(format!("bad float on line {}: {e}", i + 1))
            })?);
        }
        if data.len() - start != d {
            return Err(ReduceError::Malformed(format!(
                "line {} has {} values, expected {d}",
                i + 1,
                data.len() - start
            )));
        }
        if index.insert(word.to_string(), words.len() as u32).is_some() {
            return Err(ReduceError::Malformed(format!("duplicate word {word:?}")));
        }
        words.push(word.to_string());
    }
    if words.len() != n {
        return Err(ReduceError::Malformed(format!(
            "header promised {n} words, found {}",
            words.len()
        )));
    }
    let vectors = Array2::from_shape_vec((n, d), data)
        .map_err(|e| ReduceError::Malformed(format!("bad shape: {e}")))?;
    Ok(TextEmbeddings {
        words,
        index,
        vectors,
    })
}
