//! Python bindings: `import structsearch`.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde_json::{Map, Value};
use structsearch::bench::{compare_engines, gen_queries, reports_to_json, Engine, QueryKind};
use structsearch::config::{ConfigOverrides, EngineConfig};
use structsearch::featurizer::{featurize_tree, Interner};
use structsearch::frontend::{export_tree, import_tree, parse_query, AnnotatedTree, FrontendError};
use structsearch::index::{build_index, ingest, load_index, read_index, save_index, write_index, CorpusIndex, IndexError};
use structsearch::recommend::{run, RecommendError, RecommendationDocument};
use structsearch::rerank::MethodCache;

pyo3::create_exception!(structsearch, ParseError, PyValueError);
pyo3::create_exception!(structsearch, IndexFormatError, PyValueError);

fn parse_err(e: FrontendError) -> PyErr {
    ParseError::new_err(e.to_string())
}

fn index_err(e: IndexError) -> PyErr {
    match e {
        IndexError::Io { .. } => PyIOError::new_err(e.to_string()),
        IndexError::Format(_) => IndexFormatError::new_err(e.to_string()),
        IndexError::Capacity { .. } => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse(query: &str) -> PyResult<AnnotatedTree> {
    let tree = match serde_json::from_str::<Value>(query) {
        Ok(Value::Object(obj)) if obj.contains_key("kind") => import_tree(query),
        _ => parse_query(query),
    };
    tree.map_err(parse_err)
}

fn to_json(v: &Bound<'_, PyAny>) -> PyResult<Value> {
    if v.is_none() {
        Ok(Value::Null)
    } else if let Ok(b) = v.extract::<bool>() {
        Ok(Value::Bool(b))
    } else if let Ok(i) = v.extract::<u64>() {
        Ok(Value::from(i))
    } else if let Ok(f) = v.extract::<f64>() {
        Ok(Value::from(f))
    } else if let Ok(s) = v.extract::<String>() {
        Ok(Value::String(s))
    } else {
        Err(PyTypeError::new_err(format!("unsupported configuration value {v}")))
    }
}

fn engine_config(base: &EngineConfig, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<EngineConfig> {
    let Some(dict) = overrides else { return Ok(base.clone()) };
    let mut map = Map::new();
    for (k, v) in dict.iter() {
        map.insert(k.extract::<String>()?, to_json(&v)?);
    }
    ConfigOverrides::from_json(Value::Object(map))
        .and_then(|o| o.apply(base))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Features of a snippet, rendered as text, in source order.
#[pyfunction]
fn featurize(query: &str) -> PyResult<Vec<String>> {
    let tree = parse(query)?;
    let mut syms = Interner::default();
    let features = featurize_tree(&tree, &mut syms);
    Ok(features.all().iter().map(|f| f.display(&syms).to_string()).collect())
}

/// The interchange document of a snippet.
#[pyfunction]
fn export(query: &str) -> PyResult<String> {
    Ok(export_tree(&parse(query)?))
}

/// A read-only corpus index.
#[pyclass(module = "structsearch", frozen)]
struct Index {
    inner: CorpusIndex,
}

#[pymethods]
impl Index {
    /// Indexes a corpus directory holding one subdirectory per project.
    #[staticmethod]
    fn build(corpus: PathBuf) -> PyResult<Self> {
        let c = ingest(&corpus).map_err(index_err)?;
        Ok(Index { inner: build_index(&c).map_err(index_err)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Index { inner: load_index(&path).map_err(index_err)? })
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        let inner = read_index(data).map_err(|e| IndexFormatError::new_err(e.to_string()))?;
        Ok(Index { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_index(&self.inner, &path).map_err(index_err)
    }

    fn to_bytes(&self) -> Vec<u8> {
        write_index(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn feature_count(&self) -> usize {
        self.inner.feature_count()
    }

    /// Recommendations for a query as the machine-format JSON document.
    #[pyo3(signature = (query, config=None))]
    fn recommend(&self, py: Python<'_>, query: &str, config: Option<&Bound<'_, PyDict>>) -> PyResult<String> {
        let config = engine_config(&EngineConfig::default(), config)?;
        let tree = parse(query)?;
        let result = py.detach(|| run(&self.inner, tree, &config));
        let recommendations = match result {
            Ok(trace) => trace.recommendations,
            Err(RecommendError::NoResult) => Vec::new(),
            Err(e) => return Err(ParseError::new_err(e.to_string())),
        };
        let mut doc = RecommendationDocument { recommendations }.to_json();
        doc.push('\n');
        Ok(doc)
    }

    /// Recall of every engine on `n` generated queries of each kind, as JSON.
    #[pyo3(signature = (n, seed=0, config=None))]
    fn bench(&self, py: Python<'_>, n: usize, seed: u64, config: Option<&Bound<'_, PyDict>>) -> PyResult<String> {
        let config = engine_config(&EngineConfig::default(), config)?;
        py.detach(|| {
            let cache = MethodCache::build(&self.inner);
            let mut reports = Vec::new();
            for kind in [QueryKind::Contiguous, QueryKind::NonContiguous] {
                let set = gen_queries(&self.inner, n, kind, seed).map_err(|e| e.to_string())?;
                reports.push(compare_engines(&self.inner, Some(&cache), &set, kind, &Engine::ALL, &config));
            }
            Ok(reports_to_json(&reports))
        })
        .map_err(PyValueError::new_err::<String>)
    }
}

#[pymodule]
#[pyo3(name = "structsearch")]
fn structsearch_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Index>()?;
    m.add_function(wrap_pyfunction!(featurize, m)?)?;
    m.add_function(wrap_pyfunction!(export, m)?)?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("IndexFormatError", m.py().get_type::<IndexFormatError>())?;
    Ok(())
}
