//! Subcommand implementations. Stages communicate only through artifact
//! files, so every run is reproducible from its config and seed.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use hellvec::{
    avg_nonzero_contexts, count_cooccurrences, count_phrase_contexts_batch, evaluate_analogy,
    evaluate_similarity, hellinger_pca, load_analogies, load_similarity, nearest_neighbors,
    neighbors_of_vector, normalize_rows, read_embeddings_text, read_encoder,
    read_matrix_from_path, select_context_dictionary, slra_train, write_embeddings_text,
    write_encoder, ContextDictionary, ContextScenario, CooccurrenceMatrix, CoocError,
    CorpusMode, CorpusReader, CovariancePrecision, DistributionMatrix, EvalReport, Fingerprint,
    LoadedMatrix, PcaOptions, PhraseInferencer, PhraseQuery, Repr, SimilarityFormat,
    SlraHyperparams, TextEmbeddings, Vocabulary, WindowSpec,
};

use crate::config::{resolve, resolve_required, FileConfig};
use crate::{
    CliError, CoocArgs, CorpusArgs, EmbedArgs, EvalArgs, FormatArg, GridArgs, InferArgs,
    ModeArg, NeighborsArgs, ReducerArg, SymmetryArg, TaskArg, VocabArgs,
};

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn corpus_reader(args: &CorpusArgs, cfg: &FileConfig) -> Result<CorpusReader, CliError> {
    let paths: Vec<PathBuf> = if !args.corpus.is_empty() {
        args.corpus.clone()
    } else {
        cfg.get_list("corpus")
            .map(|v| v.into_iter().map(PathBuf::from).collect())
            .ok_or_else(|| CliError::Usage("no corpus given (--corpus or corpus= key)".into()))?
    };
    let mode = match args.mode {
        Some(ModeArg::Lines) => CorpusMode::SentencePerLine,
        Some(ModeArg::Docs) => CorpusMode::DocumentPerFile,
        None => match cfg.raw("corpus_mode") {
            Some("docs") => CorpusMode::DocumentPerFile,
            Some("lines") | None => CorpusMode::SentencePerLine,
            Some(other) => {
                return Err(CliError::Usage(format!(
                    "corpus_mode must be lines or docs, got {other:?}"
                )))
            }
        },
    };
    let normalize = !args.no_normalize && resolve(None, cfg.get("normalize"), true)?;
    let tokenize = args.tokenize || resolve(None, cfg.get("tokenize"), false)?;
    Ok(CorpusReader::new(paths, mode)
        .normalize(normalize)
        .use_tokenizer(tokenize))
}

fn scenario_from(arg: Option<&str>, cfg: &FileConfig) -> Result<ContextScenario, CliError> {
    let raw = arg
        .or_else(|| cfg.raw("scenario"))
        .unwrap_or("top:10000");
    raw.parse::<ContextScenario>().map_err(CliError::from)
}

fn window_from(
    size: Option<usize>,
    symmetric: Option<bool>,
    cfg: &FileConfig,
) -> Result<WindowSpec, CliError> {
    let size = resolve(size, cfg.get("window_size"), 1)?;
    let symmetric = resolve(symmetric, cfg.get("symmetric"), true)?;
    WindowSpec::new(size, symmetric).map_err(CliError::from)
}

fn vocab_path(flag: Option<PathBuf>, cfg: &FileConfig) -> Result<PathBuf, CliError> {
    resolve_required(
        flag,
        Ok(cfg.raw("vocab").map(PathBuf::from)),
        "vocabulary path (--vocab or vocab= key)",
    )
}

/// Streams the corpus once, counting token frequencies.
fn count_vocabulary(reader: &CorpusReader, min_count: u64) -> Result<Vocabulary, CliError> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    reader.for_each_document(|doc| {
        total += doc.len() as u64;
        for token in doc {
            *counts.entry(token).or_insert(0) += 1;
        }
    })?;
    Vocabulary::from_counts(counts, total, min_count).map_err(CliError::from)
}

/// Streams the corpus in chunks; each chunk is counted over worker shards
/// and merged, which is bit-identical to one sequential pass.
fn count_corpus(
    reader: &CorpusReader,
    vocab: &Vocabulary,
    ctx: &ContextDictionary,
    window: WindowSpec,
    workers: usize,
) -> Result<CooccurrenceMatrix, CliError> {
    const CHUNK_DOCS: usize = 16384;

    fn flush(
        buf: &mut Vec<Vec<String>>,
        acc: &mut Option<CooccurrenceMatrix>,
        vocab: &Vocabulary,
        ctx: &ContextDictionary,
        window: WindowSpec,
        workers: usize,
    ) -> Result<(), CoocError> {
        if buf.is_empty() {
            return Ok(());
        }
        let part = if workers > 1 && buf.len() >= 2 * workers {
            let shard = buf.len().div_ceil(workers);
            let parts: Vec<CooccurrenceMatrix> = buf
                .par_chunks(shard)
                .map(|docs| count_cooccurrences(docs, vocab, ctx, window))
                .collect();
            hellvec::merge(parts)?
        } else {
            count_cooccurrences(buf, vocab, ctx, window)
        };
        *acc = Some(match acc.take() {
            None => part,
            Some(prev) => hellvec::merge(vec![prev, part])?,
        });
        buf.clear();
        Ok(())
    }

    let mut acc: Option<CooccurrenceMatrix> = None;
    let mut buf: Vec<Vec<String>> = Vec::with_capacity(CHUNK_DOCS);
    let mut pending: Result<(), CoocError> = Ok(());
    reader.for_each_document(|doc| {
        if pending.is_err() {
            return;
        }
        buf.push(doc);
        if buf.len() >= CHUNK_DOCS {
            pending = flush(&mut buf, &mut acc, vocab, ctx, window, workers);
        }
    })?;
    pending.map_err(CliError::from)?;
    flush(&mut buf, &mut acc, vocab, ctx, window, workers).map_err(CliError::from)?;
    Ok(acc.unwrap_or_else(|| count_cooccurrences(&[], vocab, ctx, window)))
}

fn load_vocab_file(path: &Path) -> Result<Vocabulary, CliError> {
    Vocabulary::read_from_path(path).map_err(|e| {
        CliError::Data(format!(
            "cannot load vocabulary {}: {e}; run the vocab stage first",
            path.display()
        ))
    })
}

fn load_distribution(path: &Path) -> Result<DistributionMatrix, CliError> {
    let loaded = read_matrix_from_path(path).map_err(|e| {
        CliError::Data(format!(
            "cannot load co-occurrence file {}: {e}; run the cooc stage first",
            path.display()
        ))
    })?;
    Ok(match loaded {
        LoadedMatrix::Counts(c) => normalize_rows(&c),
        LoadedMatrix::SqrtProbabilities(d) => d,
    })
}

fn load_encoder_file(
    path: &Path,
) -> Result<(hellvec::Encoder, Option<hellvec::ndarray::Array2<f64>>), CliError> {
    read_encoder(path).map_err(|e| {
        CliError::Data(format!(
            "cannot load encoder {}: {e}; run the embed stage first",
            path.display()
        ))
    })
}

fn load_embeddings_file(path: &Path) -> Result<TextEmbeddings, CliError> {
    let file = File::open(path).map_err(|e| {
        CliError::Data(format!(
            "cannot load embeddings {}: {e}; run the embed stage first",
            path.display()
        ))
    })?;
    read_embeddings_text(BufReader::new(file)).map_err(CliError::from)
}

pub fn run_vocab(cfg: &FileConfig, args: VocabArgs) -> Result<(), CliError> {
    let reader = corpus_reader(&args.corpus, cfg)?;
    let min_count = resolve(args.min_count, cfg.get("min_count"), 100)?;
    let output = vocab_path(args.output, cfg)?;
    let vocab = count_vocabulary(&reader, min_count)?;
    vocab.write_to_path(&output)?;
    log::info!(
        "vocabulary: {} words (min_count {min_count}), {} tokens -> {}",
        vocab.len(),
        vocab.total_tokens(),
        output.display()
    );
    Ok(())
}

pub fn run_cooc(cfg: &FileConfig, args: CoocArgs, workers: usize) -> Result<(), CliError> {
    let reader = corpus_reader(&args.corpus, cfg)?;
    let vocab = load_vocab_file(&vocab_path(args.vocab, cfg)?)?;
    let scenario = scenario_from(args.scenario.as_deref(), cfg)?;
    let window = window_from(args.window_size, args.symmetric, cfg)?;
    let output = resolve_required(
        args.output,
        Ok(cfg.raw("cooc").map(PathBuf::from)),
        "output path (--output or cooc= key)",
    )?;

    let ctx = select_context_dictionary(&vocab, &scenario)?;
    let mut counts = count_corpus(&reader, &vocab, &ctx, window, workers)?;
    counts.set_scenario(scenario.clone());
    counts.write_to_path(&output)?;
    log::info!(
        "counted |W|={} x |D|={} under {scenario} {window}: avg {:.1} contexts/word -> {}",
        counts.n_words(),
        counts.n_contexts(),
        avg_nonzero_contexts(&counts),
        output.display()
    );
    if let Some(sqrt_path) = args.write_sqrt {
        normalize_rows(&counts).write_to_path(&sqrt_path)?;
        log::info!("sqrt-probability matrix -> {}", sqrt_path.display());
    }
    Ok(())
}

pub fn run_embed(cfg: &FileConfig, args: EmbedArgs, seed: u64) -> Result<(), CliError> {
    let vocab = load_vocab_file(&vocab_path(args.vocab, cfg)?)?;
    let cooc_path = resolve_required(
        args.cooc,
        Ok(cfg.raw("cooc").map(PathBuf::from)),
        "co-occurrence file (--cooc or cooc= key)",
    )?;
    let scenario = resolve_required(
        args.scenario,
        Ok(cfg.raw("scenario").map(str::to_string)),
        "--scenario (must match the cooc stage)",
    )?
    .parse::<ContextScenario>()?;
    let reducer = args.reducer.map(Ok).unwrap_or_else(|| {
        match cfg.raw("reducer") {
            None | Some("pca") => Ok(ReducerArg::Pca),
            Some("slra") => Ok(ReducerArg::Slra),
            Some("none") => Ok(ReducerArg::None),
            Some(other) => Err(CliError::Usage(format!(
                "reducer must be pca, slra, or none, got {other:?}"
            ))),
        }
    })?;
    let output_dir = resolve(
        args.output_dir,
        Ok(cfg.raw("output_dir").map(PathBuf::from)),
        PathBuf::from("."),
    )?;
    std::fs::create_dir_all(&output_dir)?;

    let m = load_distribution(&cooc_path)?;
    if m.n_words() != vocab.len() {
        return Err(CliError::Data(format!(
            "vocabulary has {} words but the cooc file has {} rows; \
             artifacts come from different vocab stages",
            vocab.len(),
            m.n_words()
        )));
    }
    let window = m.window();
    if let Some(size) = cfg.get::<usize>("window_size")? {
        if size != window.size {
            return Err(CliError::Data(format!(
                "config window_size={size} but the cooc file was counted with {}; \
                 re-run the cooc stage",
                window.size
            )));
        }
    }
    if let Some(symmetric) = cfg.get::<bool>("symmetric")? {
        if symmetric != window.symmetric {
            return Err(CliError::Data(format!(
                "config symmetric={symmetric} but the cooc file was counted with \
                 symmetric={}; re-run the cooc stage",
                window.symmetric
            )));
        }
    }
    let ctx = select_context_dictionary(&vocab, &scenario)?;
    if ctx.len() != m.n_contexts() {
        return Err(CliError::Data(format!(
            "scenario {scenario} selects {} context words but the cooc file has |D|={}; \
             the scenario does not match the cooc stage",
            ctx.len(),
            m.n_contexts()
        )));
    }
    let fingerprint = Fingerprint::compute(&vocab, &scenario, window);

    match reducer {
        ReducerArg::None => {
            let sqrt_path = output_dir.join("sqrt.bin");
            m.write_to_path(&sqrt_path)?;
            log::info!(
                "reducer none: wrote normalized distributions for raw-mode evaluation -> {}",
                sqrt_path.display()
            );
        }
        ReducerArg::Pca => {
            let dim = resolve(args.dim, cfg.get("dim"), 100)?;
            let precision = if args.f32_covariance || resolve(None, cfg.get("f32_covariance"), false)? {
                CovariancePrecision::F32
            } else {
                CovariancePrecision::F64
            };
            let opts = PcaOptions {
                precision,
                fingerprint,
                ..PcaOptions::default()
            };
            let (encoder, embeddings) = hellinger_pca(&m, dim, &opts)?;
            let enc_path = output_dir.join("encoder.bin");
            write_encoder(&enc_path, &encoder, None)?;
            let emb_path = output_dir.join("embeddings.txt");
            write_embeddings_text(BufWriter::new(File::create(&emb_path)?), &embeddings, &vocab)?;
            log::info!(
                "pca d={dim}: projection error {:.4} -> {} + {}",
                encoder.projection_error(&m),
                enc_path.display(),
                emb_path.display()
            );
        }
        ReducerArg::Slra => {
            let dim = resolve(args.dim, cfg.get("dim"), 100)?;
            let hp = SlraHyperparams {
                learning_rate: resolve(args.learning_rate, cfg.get("learning_rate"), 0.01)?,
                final_learning_rate: resolve(
                    args.final_learning_rate,
                    cfg.get("final_learning_rate"),
                    1e-4,
                )?,
                epochs: resolve(args.epochs, cfg.get("epochs"), 10)?,
                seed,
                init_scale: match args.init_scale {
                    Some(s) => Some(s),
                    None => cfg.get("init_scale")?,
                },
            };
            let model = slra_train(&m, dim, &hp, fingerprint)?;
            let enc_path = output_dir.join("encoder.bin");
            model.write_to_path(&enc_path)?;
            let embeddings = hellvec::embed_all(&m, &model.encoder);
            let emb_path = output_dir.join("embeddings.txt");
            write_embeddings_text(BufWriter::new(File::create(&emb_path)?), &embeddings, &vocab)?;
            log::info!(
                "slra d={dim} ({} epochs): loss {:.4} -> {:.4}, reconstruction {:.4} -> {} + {}",
                hp.epochs,
                model.loss_history.first().unwrap_or(&0.0),
                model.loss_history.last().unwrap_or(&0.0),
                model.reconstruction_error(&m),
                enc_path.display(),
                emb_path.display()
            );
        }
    }
    Ok(())
}

fn print_report(report: &EvalReport) {
    println!(
        "{}\t{:.4}\t{}\t{}",
        report.task, report.score, report.evaluated, report.skipped
    );
}

fn similarity_format(arg: FormatArg) -> SimilarityFormat {
    match arg {
        FormatArg::Auto => SimilarityFormat::Auto,
        FormatArg::Tab => SimilarityFormat::Tab,
        FormatArg::Comma => SimilarityFormat::Comma,
    }
}

fn task_name(task: TaskArg) -> &'static str {
    match task {
        TaskArg::Ws353 => "ws353",
        TaskArg::Rg65 => "rg65",
        TaskArg::Rw => "rw",
        TaskArg::Analogy => "analogy",
    }
}

pub fn run_eval(cfg: &FileConfig, args: EvalArgs) -> Result<(), CliError> {
    let data = resolve_required(
        args.data,
        Ok(cfg.raw("data").map(PathBuf::from)),
        "--data",
    )?;
    let epsilon = resolve(args.epsilon, cfg.get("epsilon"), hellvec::evalsuite::DEFAULT_3COSMUL_EPSILON)?;

    enum Storage {
        Dense(TextEmbeddings),
        Raw(DistributionMatrix, Vocabulary),
    }
    let embeddings = args
        .embeddings
        .or_else(|| cfg.raw("embeddings").map(PathBuf::from));
    let storage = if let Some(emb_path) = embeddings {
        Storage::Dense(load_embeddings_file(&emb_path)?)
    } else {
        let cooc = resolve_required(
            args.raw_cooc,
            Ok(cfg.raw("cooc").map(PathBuf::from)),
            "--raw-cooc (or --embeddings)",
        )?;
        let vocab = load_vocab_file(&vocab_path(args.vocab, cfg)?)?;
        Storage::Raw(load_distribution(&cooc)?, vocab)
    };
    let repr = match &storage {
        Storage::Dense(emb) => Repr::Dense(emb),
        Storage::Raw(matrix, vocab) => Repr::Raw { matrix, vocab },
    };

    match args.task {
        TaskArg::Analogy => {
            let ds = load_analogies(&data)?;
            let report = evaluate_analogy(&repr, &ds, epsilon);
            for (suffix, r) in [
                ("semantic", &report.semantic),
                ("syntactic", &report.syntactic),
                ("total", &report.total),
            ] {
                print_report(&EvalReport {
                    task: format!("analogy.{suffix}"),
                    ..r.clone()
                });
            }
        }
        task => {
            let ds = load_similarity(&data, similarity_format(args.format))?;
            let report = evaluate_similarity(&repr, &ds, task_name(task))?;
            print_report(&report);
        }
    }
    Ok(())
}

pub fn run_neighbors(cfg: &FileConfig, args: NeighborsArgs) -> Result<(), CliError> {
    let embeddings = args
        .embeddings
        .or_else(|| cfg.raw("embeddings").map(PathBuf::from));
    if let Some(emb_path) = embeddings {
        let emb = load_embeddings_file(&emb_path)?;
        let id = *emb
            .index
            .get(&args.word)
            .ok_or_else(|| CliError::Data(format!("word {:?} not in embeddings", args.word)))?;
        let nn = neighbors_of_vector(emb.row(id), &emb.vectors, args.k + 1)?;
        for (nid, dist) in nn.into_iter().filter(|&(nid, _)| nid != id).take(args.k) {
            println!("{}\t{:.6}", emb.words[nid as usize], dist);
        }
    } else {
        let cooc = resolve_required(
            args.raw_cooc,
            Ok(cfg.raw("cooc").map(PathBuf::from)),
            "--raw-cooc (or --embeddings)",
        )?;
        let vocab = load_vocab_file(&vocab_path(args.vocab, cfg)?)?;
        let m = load_distribution(&cooc)?;
        let id = vocab
            .id(&args.word)
            .ok_or_else(|| CliError::Data(format!("word {:?} not in vocabulary", args.word)))?;
        let nn = nearest_neighbors(&m, id, args.k)
            .map_err(|e| CliError::Data(e.to_string()))?;
        for (nid, dist) in nn.neighbors {
            println!("{}\t{:.6}", vocab.word(nid), dist);
        }
    }
    Ok(())
}

pub fn run_infer(cfg: &FileConfig, args: InferArgs) -> Result<(), CliError> {
    let reader = corpus_reader(&args.corpus, cfg)?;
    let vocab = load_vocab_file(&vocab_path(args.vocab, cfg)?)?;
    let scenario = scenario_from(args.scenario.as_deref(), cfg)?;
    let window = window_from(args.window_size, args.symmetric, cfg)?;
    let encoder_path = resolve_required(
        args.encoder,
        Ok(cfg.raw("encoder").map(PathBuf::from)),
        "--encoder",
    )?;
    let (encoder, _v) = load_encoder_file(&encoder_path)?;
    let inferencer = PhraseInferencer::new(&vocab, &scenario, window, &encoder)?;

    let phrases: Vec<PhraseQuery> = args
        .phrases
        .iter()
        .map(|p| PhraseQuery::from_raw(p))
        .collect::<Result<_, _>>()?;

    // one streaming pass over the corpus for the whole batch
    const CHUNK_DOCS: usize = 16384;
    let mut totals: Vec<(HashMap<u32, f64>, u64)> = vec![(HashMap::new(), 0); phrases.len()];
    let mut buf: Vec<Vec<String>> = Vec::with_capacity(CHUNK_DOCS);
    {
        let ctx = inferencer.context_dictionary();
        let flush = |buf: &mut Vec<Vec<String>>, totals: &mut Vec<(HashMap<u32, f64>, u64)>| {
            if buf.is_empty() {
                return;
            }
            let parts = count_phrase_contexts_batch(buf, &phrases, &vocab, ctx, window);
            for ((row, occ), slot) in parts.into_iter().zip(totals.iter_mut()) {
                for (c, v) in row {
                    *slot.0.entry(c).or_insert(0.0) += v;
                }
                slot.1 += occ;
            }
            buf.clear();
        };
        reader.for_each_document(|doc| {
            buf.push(doc);
            if buf.len() >= CHUNK_DOCS {
                flush(&mut buf, &mut totals);
            }
        })?;
        flush(&mut buf, &mut totals);
    }

    let emb = args
        .embeddings
        .or_else(|| cfg.raw("embeddings").map(PathBuf::from))
        .map(|p| load_embeddings_file(&p))
        .transpose()?;

    let mut failures = 0;
    for (phrase, (counts, occurrences)) in phrases.iter().zip(totals) {
        println!("phrase\t{}", phrase.text());
        if occurrences == 0 {
            println!("unseen-in-corpus");
            failures += 1;
            continue;
        }
        let mut row: Vec<(u32, f64)> = counts.into_iter().collect();
        row.sort_unstable_by_key(|&(c, _)| c);
        let vector = match inferencer.encode_counts(&row, phrase) {
            Ok(v) => v,
            Err(e) => {
                println!("no-result\t{e}");
                failures += 1;
                continue;
            }
        };
        if args.print_vector {
            let rendered: Vec<String> = vector.iter().map(|v| v.to_string()).collect();
            println!("vector\t{}", rendered.join(" "));
        }
        if let Some(emb) = &emb {
            let nn = neighbors_of_vector(&vector, &emb.vectors, args.k)?;
            for (nid, dist) in nn {
                println!("{}\t{:.6}", emb.words[nid as usize], dist);
            }
        }
    }
    if failures == phrases.len() {
        return Err(CliError::Data("no phrase produced a vector".into()));
    }
    Ok(())
}

enum GridDataset {
    Similarity(hellvec::SimilarityDataset),
    Analogy(hellvec::AnalogyDataset),
}

pub fn run_grid(cfg: &FileConfig, args: GridArgs, workers: usize) -> Result<(), CliError> {
    let reader = corpus_reader(&args.corpus, cfg)?;
    let data = resolve_required(args.data, Ok(cfg.raw("data").map(PathBuf::from)), "--data")?;
    let epsilon = resolve(args.epsilon, cfg.get("epsilon"), hellvec::evalsuite::DEFAULT_3COSMUL_EPSILON)?;
    let scenarios_raw = resolve_required(
        args.scenarios,
        Ok(cfg.raw("scenarios").map(str::to_string)),
        "--scenarios",
    )?;
    let scenarios: Vec<ContextScenario> = scenarios_raw
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<ContextScenario>().map_err(CliError::from))
        .collect::<Result<_, _>>()?;
    let windows_raw = resolve(
        args.window_sizes,
        Ok(cfg.raw("window_sizes").map(str::to_string)),
        "1".to_string(),
    )?;
    let windows: Vec<usize> = windows_raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|e| CliError::Usage(format!("bad window size {s:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let symmetries: Vec<bool> = match args.symmetry.unwrap_or(SymmetryArg::Both) {
        SymmetryArg::Sym => vec![true],
        SymmetryArg::Asym => vec![false],
        SymmetryArg::Both => vec![true, false],
    };
    if scenarios.is_empty() || windows.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }

    let vocab = match args.vocab.or_else(|| cfg.raw("vocab").map(PathBuf::from)) {
        Some(path) => load_vocab_file(&path)?,
        None => {
            let min_count = resolve(args.min_count, cfg.get("min_count"), 100)?;
            count_vocabulary(&reader, min_count)?
        }
    };
    let dataset = match args.task {
        TaskArg::Analogy => GridDataset::Analogy(load_analogies(&data)?),
        _ => GridDataset::Similarity(load_similarity(&data, similarity_format(args.format))?),
    };

    let mut out: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(
        out,
        "scenario,window_size,symmetric,task,score,evaluated,skipped,status"
    )?;

    for scenario in &scenarios {
        for &size in &windows {
            for &symmetric in &symmetries {
                let window = match WindowSpec::new(size, symmetric) {
                    Ok(w) => w,
                    Err(e) => {
                        write_grid_failure(&mut out, scenario, size, symmetric, &e.to_string())?;
                        continue;
                    }
                };
                match grid_cell(&reader, &vocab, scenario, window, &dataset, epsilon, workers, args.task) {
                    Ok(reports) => {
                        for r in reports {
                            writeln!(
                                out,
                                "{scenario},{size},{symmetric},{},{:.4},{},{},ok",
                                r.task, r.score, r.evaluated, r.skipped
                            )?;
                        }
                    }
                    Err(e) => {
                        write_grid_failure(&mut out, scenario, size, symmetric, &e.to_string())?
                    }
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn write_grid_failure(
    out: &mut dyn Write,
    scenario: &ContextScenario,
    size: usize,
    symmetric: bool,
    reason: &str,
) -> Result<(), CliError> {
    let clean = reason.replace([',', '\n'], ";");
    writeln!(out, "{scenario},{size},{symmetric},,,,,failed: {clean}")?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn grid_cell(
    reader: &CorpusReader,
    vocab: &Vocabulary,
    scenario: &ContextScenario,
    window: WindowSpec,
    dataset: &GridDataset,
    epsilon: f64,
    workers: usize,
    task: TaskArg,
) -> Result<Vec<EvalReport>, CliError> {
    let ctx = select_context_dictionary(vocab, scenario)?;
    let counts = count_corpus(reader, vocab, &ctx, window, workers)?;
    let m = normalize_rows(&counts);
    let repr = Repr::Raw {
        matrix: &m,
        vocab,
    };
    Ok(match dataset {
        GridDataset::Similarity(ds) => vec![evaluate_similarity(&repr, ds, task_name(task))?],
        GridDataset::Analogy(ds) => {
            let report = evaluate_analogy(&repr, ds, epsilon);
            vec![
                EvalReport {
                    task: "analogy.semantic".into(),
                    ..report.semantic
                },
                EvalReport {
                    task: "analogy.syntactic".into(),
                    ..report.syntactic
                },
                EvalReport {
                    task: "analogy.total".into(),
                    ..report.total
                },
            ]
        }
    })
}
