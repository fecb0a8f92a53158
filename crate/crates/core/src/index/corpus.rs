//! Corpus ingestion: discovery, deduplication and featurization.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::IndexError;
use crate::featurizer::{featurize_tree, Feature, Interner, Sym, Symbols};
use crate::frontend::{content_hash, parse_compilation_unit, AnnotatedTree, FrontendError, MethodSource};

/// Methods featurized per parallel work unit.
const CHUNK: usize = 256;

/// One indexed method with its feature and word counts, sorted by key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodRecord {
    pub source: MethodSource,
    pub features: Vec<(Feature, u32)>,
    pub words: Vec<(Sym, u32)>,
}

impl MethodRecord {
    /// `|F(m)|`.
    pub fn feature_count(&self) -> u64 {
        self.features.iter().map(|&(_, n)| n as u64).sum()
    }

    /// `|S(F(m))|`.
    pub fn support_len(&self) -> usize {
        self.features.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub files: usize,
    pub unreadable_files: usize,
    pub unlexable_files: usize,
    pub duplicate_projects: usize,
    pub duplicate_files: usize,
    pub methods_found: usize,
    pub duplicate_methods: usize,
    pub unparseable_methods: usize,
    pub methods: usize,
}

/// Deduplicated, featurized methods sharing one symbol table.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub symbols: Interner,
    pub records: Vec<MethodRecord>,
    pub stats: IngestStats,
}

/// Feature and word counts of one tree; symbols come from `syms`.
pub fn featurize_counts(tree: &AnnotatedTree, syms: &mut dyn Symbols) -> (Vec<(Feature, u32)>, Vec<(Sym, u32)>) {
    let features = featurize_tree(tree, syms);
    let mut fc: FxHashMap<Feature, u32> = FxHashMap::default();
    for f in features.all() {
        *fc.entry(*f).or_insert(0) += 1;
    }
    let mut wc: FxHashMap<Sym, u32> = FxHashMap::default();
    for leaf in tree.tree.leaves() {
        *wc.entry(syms.intern(&leaf.text)).or_insert(0) += 1;
    }
    let mut features: Vec<_> = fc.into_iter().collect();
    features.sort_unstable();
    let mut words: Vec<_> = wc.into_iter().collect();
    words.sort_unstable();
    (features, words)
}

/// A file of the corpus. `path` starts with the project directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub project: String,
    pub path: String,
    pub text: String,
    pub hash: u64,
}

impl SourceFile {
    pub fn new(project: &str, path: &str, text: String) -> Self {
        Self { project: project.to_string(), path: path.to_string(), hash: content_hash(&text), text }
    }
}

/// Reads every `.java` and `.json` file below `root`. The first path
/// component names the project.
pub fn ingest(root: &Path) -> Result<Corpus, IndexError> {
    if !root.is_dir() {
        return Err(IndexError::Io {
            path: root.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "corpus root is not a directory"),
        });
    }
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        match entry {
            Ok(e) if e.file_type().is_file() => {
                let ext = e.path().extension().and_then(|x| x.to_str()).unwrap_or("");
                if ext == "java" || ext == "json" {
                    paths.push(e.into_path());
                }
            }
            Ok(_) => {}
            Err(e) => log::warn!("skipping unreadable entry: {e}"),
        }
    }
    let mut stats = IngestStats { files: paths.len(), ..Default::default() };
    let read: Vec<Option<SourceFile>> = paths
        .par_iter()
        .map(|p| {
            let rel = p.strip_prefix(root).unwrap_or(p);
            let comps: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            let project = if comps.len() > 1 { comps[0].clone() } else { String::new() };
            match std::fs::read_to_string(p) {
                Ok(text) => Some(SourceFile::new(&project, &comps.join("/"), text)),
                Err(e) => {
                    log::warn!("cannot read {}: {e}", p.display());
                    None
                }
            }
        })
        .collect();
    stats.unreadable_files = read.iter().filter(|f| f.is_none()).count();
    Ok(ingest_files(read.into_iter().flatten().collect(), stats))
}

/// Deduplicates projects and files, then extracts and featurizes methods.
pub fn ingest_files(read: Vec<SourceFile>, mut stats: IngestStats) -> Corpus {
    let mut projects: BTreeMap<String, Vec<SourceFile>> = BTreeMap::new();
    for f in read {
        projects.entry(f.project.clone()).or_default().push(f);
    }
    let mut seen_projects = FxHashSet::default();
    let mut seen_files = FxHashSet::default();
    let mut files = Vec::new();
    for (_, mut pf) in projects {
        let mut hashes: Vec<u64> = pf.iter().map(|f| f.hash).collect();
        hashes.sort_unstable();
        let key = content_hash(&hashes.iter().map(|h| format!("{h:016x}")).collect::<Vec<_>>().join(" "));
        if !seen_projects.insert(key) {
            stats.duplicate_projects += 1;
            continue;
        }
        pf.sort_by(|a, b| a.path.cmp(&b.path));
        for f in pf {
            if seen_files.insert(f.hash) {
                files.push(f);
            } else {
                stats.duplicate_files += 1;
            }
        }
    }

    let extracted: Vec<Result<Vec<MethodSource>, FrontendError>> = files
        .par_iter()
        .map(|f| {
            if f.path.ends_with(".json") {
                let name = f.path.rsplit('/').next().unwrap_or(&f.path).trim_end_matches(".json");
                Ok(vec![MethodSource::interchange(&f.project, &f.path, name, f.text.clone())])
            } else {
                parse_compilation_unit(&f.text)
                    .map(|ms| ms.into_iter().map(|m| MethodSource::new(&f.project, &f.path, m)).collect())
            }
        })
        .collect();
    let mut sources = Vec::new();
    for (f, r) in files.iter().zip(extracted) {
        match r {
            Ok(ms) => sources.extend(ms),
            Err(e) => {
                log::warn!("cannot tokenize {}: {e}", f.path);
                stats.unlexable_files += 1;
            }
        }
    }
    Corpus::from_sources(sources, stats)
}

impl Corpus {
    /// Sorts by (project, path, offset), drops repeated bodies and featurizes
    /// the rest. Methods that fail to parse are skipped and counted.
    pub fn from_sources(mut sources: Vec<MethodSource>, mut stats: IngestStats) -> Self {
        stats.methods_found += sources.len();
        sources.sort_by(|a, b| (&a.project, &a.path, a.offset).cmp(&(&b.project, &b.path, b.offset)));
        let mut seen = FxHashSet::default();
        let before = sources.len();
        sources.retain(|m| seen.insert(m.hash));
        stats.duplicate_methods += before - sources.len();

        type Chunk = (Interner, Vec<Option<MethodRecord>>);
        let chunks: Vec<Chunk> = sources
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut local = Interner::new();
                let records = chunk
                    .iter()
                    .map(|src| match src.parse() {
                        Ok(tree) => {
                            let (features, words) = featurize_counts(&tree, &mut local);
                            Some(MethodRecord { source: src.clone(), features, words })
                        }
                        Err(e) => {
                            log::warn!("skipping {}:{} ({}): {e}", src.path, src.line, src.name);
                            None
                        }
                    })
                    .collect();
                (local, records)
            })
            .collect();

        let mut symbols = Interner::new();
        let mut records = Vec::with_capacity(sources.len());
        for (local, recs) in chunks {
            let map: Vec<Sym> = local.strings().iter().map(|s| symbols.intern(s)).collect();
            for r in recs {
                let Some(mut r) = r else {
                    stats.unparseable_methods += 1;
                    continue;
                };
                for (f, _) in &mut r.features {
                    *f = f.map_syms(|s| map[s as usize]);
                }
                r.features.sort_unstable();
                for (w, _) in &mut r.words {
                    *w = map[*w as usize];
                }
                r.words.sort_unstable();
                records.push(r);
            }
        }
        stats.methods = records.len();
        Self { symbols, records, stats }
    }
}
