//! Word vector representations built from co-occurrence counts.
//!
//! The pipeline: stream a corpus into a frequency dictionary, count windowed
//! co-occurrences against a context dictionary, normalize rows into
//! square-root conditional-probability distributions, then either query the
//! raw distributions under the Hellinger distance or reduce them to dense
//! vectors with an uncentered PCA or a stochastic low-rank approximation.
//! The learned encoder maps any count vector into the reduced space, which
//! makes representations for unseen words and phrases cheap to infer.

pub mod cooccur;
pub mod corpus;
pub mod evalsuite;
pub mod fingerprint;
pub mod hellinger;
pub mod infer;
pub mod reduce;

// dense matrices in the public API are ndarray types
pub use ndarray;

pub use cooccur::{
    avg_nonzero_contexts, count_cooccurrences, merge, normalize_rows, read_matrix_from_path,
    CooccurrenceMatrix, CoocError, DistributionMatrix, LoadedMatrix, MatrixKind, SparseRow,
};
pub use corpus::{
    build_vocabulary, normalize_token, select_context_dictionary, tokenize, ContextDictionary,
    ContextScenario, CorpusError, CorpusMode, CorpusReader, Vocabulary, WindowSpec,
};
pub use evalsuite::{
    answer_analogy_3cosmul, evaluate_analogy, evaluate_similarity, load_analogies,
    load_similarity, spearman, AnalogyDataset, AnalogyQuestion, AnalogyReport, EvalError,
    EvalReport, Repr, Section, SimilarityDataset, SimilarityFormat,
};
pub use fingerprint::Fingerprint;
pub use hellinger::{hellinger_distance, nearest_neighbors, HellingerError, NeighborList};
pub use infer::{
    count_phrase_contexts, count_phrase_contexts_batch, infer_vector, neighbors_of_vector,
    InferError, PhraseInferencer, PhraseQuery,
};
pub use reduce::{
    embed_all, hellinger_pca, per_row_gradients, per_row_loss, read_embeddings_text,
    read_encoder, reconstruction_error, slra_train, write_embeddings_text, write_encoder,
    CovariancePrecision, EmbeddingMatrix, Encoder, PcaOptions, ReduceError, ReduceMethod,
    SlraHyperparams, SlraModel, TextEmbeddings,
};
