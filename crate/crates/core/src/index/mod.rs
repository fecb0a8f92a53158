//! The corpus index: feature dictionary, sparse matrices and metadata.

pub mod corpus;
pub mod format;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::featurizer::{Feature, Interner, Sym};
use crate::frontend::{AnnotatedTree, FrontendError, MethodSource};
pub use corpus::{featurize_counts, ingest, ingest_files, Corpus, IngestStats, MethodRecord, SourceFile};
pub use format::{load_index, read_index, save_index, write_index, FORMAT_VERSION, MAGIC};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("index format: {0}")]
    Format(#[from] FormatError),
    #[error("corpus has more than {max} distinct features")]
    Capacity { max: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("not an index file")]
    BadMagic,
    #[error("unsupported version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("checksum mismatch")]
    Checksum,
    #[error("file is truncated")]
    Truncated,
    #[error("corrupt {0}")]
    Corrupt(&'static str),
}

/// Compressed sparse rows with `u32` column ids and counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csr {
    offsets: Vec<u64>,
    cols: Vec<u32>,
    vals: Vec<u32>,
}

impl Default for Csr {
    fn default() -> Self {
        Self { offsets: vec![0], cols: Vec::new(), vals: Vec::new() }
    }
}

impl Csr {
    pub(crate) fn from_parts(offsets: Vec<u64>, cols: Vec<u32>, vals: Vec<u32>) -> Result<Self, FormatError> {
        let ok = offsets.first() == Some(&0)
            && offsets.windows(2).all(|w| w[0] <= w[1])
            && offsets.last().copied() == Some(cols.len() as u64)
            && cols.len() == vals.len();
        if !ok {
            return Err(FormatError::Corrupt("row offsets"));
        }
        Ok(Self { offsets, cols, vals })
    }

    /// Appends a row; `entries` must be sorted by column.
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (u32, u32)>) {
        for (c, v) in entries {
            self.cols.push(c);
            self.vals.push(v);
        }
        self.offsets.push(self.cols.len() as u64);
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Column ids and counts of row `i`.
    pub fn row(&self, i: usize) -> (&[u32], &[u32]) {
        let (a, b) = (self.offsets[i] as usize, self.offsets[i + 1] as usize);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub(crate) fn parts(&self) -> (&[u64], &[u32], &[u32]) {
        (&self.offsets, &self.cols, &self.vals)
    }
}

/// Per-column document frequency, idf and per-row norms for TF-IDF.
#[derive(Debug, Clone, Default)]
pub struct TfIdf {
    pub df: Vec<u32>,
    pub idf: Vec<f64>,
    pub norms: Vec<f64>,
}

impl TfIdf {
    /// `(1 + ln tf) · ln(J / df)`.
    pub fn weight(&self, col: u32, tf: u32) -> f64 {
        (1.0 + (tf as f64).ln()) * self.idf[col as usize]
    }

    fn compute(m: &Csr, columns: usize) -> Self {
        let mut df = vec![0u32; columns];
        for &c in &m.cols {
            df[c as usize] += 1;
        }
        let j = m.rows() as f64;
        let idf: Vec<f64> = df.iter().map(|&d| if d == 0 { 0.0 } else { (j / d as f64).ln() }).collect();
        let mut t = Self { df, idf, norms: Vec::with_capacity(m.rows()) };
        for i in 0..m.rows() {
            let (cols, vals) = m.row(i);
            let sq: f64 = cols.iter().zip(vals).map(|(&c, &v)| t.weight(c, v).powi(2)).sum();
            t.norms.push(sq.sqrt());
        }
        t
    }
}

/// The loaded, immutable index over a corpus.
#[derive(Debug, Clone)]
pub struct CorpusIndex {
    symbols: Interner,
    features: Vec<Feature>,
    dictionary: FxHashMap<Feature, u32>,
    matrix: Csr,
    words: Csr,
    methods: Vec<MethodSource>,
    feature_tfidf: TfIdf,
    word_tfidf: TfIdf,
}

impl PartialEq for CorpusIndex {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
            && self.features == other.features
            && self.matrix == other.matrix
            && self.words == other.words
            && self.methods == other.methods
    }
}

/// Default cap on distinct features; column ids must fit in `u32`.
pub const MAX_FEATURES: usize = u32::MAX as usize - 1;

pub fn build_index(corpus: &Corpus) -> Result<CorpusIndex, IndexError> {
    build_index_with_limit(corpus, MAX_FEATURES)
}

/// Assigns column ids in order of first appearance and builds both matrices.
pub fn build_index_with_limit(corpus: &Corpus, max_features: usize) -> Result<CorpusIndex, IndexError> {
    let mut dictionary: FxHashMap<Feature, u32> = FxHashMap::default();
    let mut features = Vec::new();
    let mut matrix = Csr::default();
    let mut words = Csr::default();
    let mut row: Vec<(u32, u32)> = Vec::new();
    for r in &corpus.records {
        row.clear();
        for &(f, n) in &r.features {
            let id = match dictionary.get(&f) {
                Some(&id) => id,
                None => {
                    if features.len() >= max_features {
                        return Err(IndexError::Capacity { max: max_features });
                    }
                    let id = features.len() as u32;
                    features.push(f);
                    dictionary.insert(f, id);
                    id
                }
            };
            row.push((id, n));
        }
        row.sort_unstable();
        matrix.push_row(row.iter().copied());
        words.push_row(r.words.iter().copied());
    }
    let methods = corpus.records.iter().map(|r| r.source.clone()).collect();
    Ok(CorpusIndex::assemble(corpus.symbols.clone(), features, matrix, words, methods))
}

impl CorpusIndex {
    pub(crate) fn assemble(
        symbols: Interner,
        features: Vec<Feature>,
        matrix: Csr,
        words: Csr,
        methods: Vec<MethodSource>,
    ) -> Self {
        let dictionary = features.iter().enumerate().map(|(i, f)| (*f, i as u32)).collect();
        let feature_tfidf = TfIdf::compute(&matrix, features.len());
        let word_tfidf = TfIdf::compute(&words, symbols.len());
        Self { symbols, features, dictionary, matrix, words, methods, feature_tfidf, word_tfidf }
    }

    pub fn empty() -> Self {
        Self::assemble(Interner::new(), Vec::new(), Csr::default(), Csr::default(), Vec::new())
    }

    pub fn len(&self) -> usize {
        self.methods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.methods.is_empty()
    }

    pub fn symbols(&self) -> &Interner {
        &self.symbols
    }

    /// Column id of a feature whose symbols come from this index's table.
    pub fn feature_id(&self, f: &Feature) -> Option<u32> {
        self.dictionary.get(f).copied()
    }

    pub fn feature(&self, id: u32) -> Feature {
        self.features[id as usize]
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    /// The binary method × feature matrix `D` (values hold term counts).
    pub fn matrix(&self) -> &Csr {
        &self.matrix
    }

    /// The method × word matrix; columns are symbol ids.
    pub fn words(&self) -> &Csr {
        &self.words
    }

    pub fn feature_tfidf(&self) -> &TfIdf {
        &self.feature_tfidf
    }

    pub fn word_tfidf(&self) -> &TfIdf {
        &self.word_tfidf
    }

    /// `|S(F(m))|`.
    pub fn support_len(&self, method: usize) -> usize {
        self.matrix.row(method).0.len()
    }

    pub fn method(&self, id: usize) -> &MethodSource {
        &self.methods[id]
    }

    pub fn methods(&self) -> &[MethodSource] {
        &self.methods
    }

    /// Re-parses a stored method body.
    pub fn parse_method(&self, id: usize) -> Result<AnnotatedTree, FrontendError> {
        self.methods[id].parse()
    }

    /// Word column of `text`, if it occurs in the corpus.
    pub fn word_id(&self, text: &str) -> Option<Sym> {
        self.symbols.get(text)
    }
}
