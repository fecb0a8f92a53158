//! Seeded generator of Java-like corpora for benchmarks and tests.
//!
//! Methods are drawn from a small statement grammar over a skewed vocabulary
//! of types, call names and fields. A fraction of methods are variants of an
//! earlier method in the same project: locals renamed, each top-level
//! statement regenerated with some probability and each remaining non-local
//! name redrawn with some probability. A few files are verbatim copies so deduplication has work.

use std::fs;
use std::io;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::index::{ingest_files, Corpus, IngestStats, SourceFile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub methods: usize,
    pub seed: u64,
    pub methods_per_file: usize,
    pub files_per_project: usize,
    /// Probability that a method is a variant of an earlier one.
    pub variant_rate: f64,
    /// Per-name redraw probability inside a variant.
    pub mutation_rate: f64,
    /// Per-statement regeneration probability inside a variant.
    pub rewrite_rate: f64,
    /// Probability that a file is repeated verbatim in the next project.
    pub duplicate_file_rate: f64,
}

impl SynthConfig {
    pub fn new(methods: usize, seed: u64) -> Self {
        Self {
            methods,
            seed,
            methods_per_file: 8,
            files_per_project: 12,
            variant_rate: 0.25,
            mutation_rate: 0.35,
            rewrite_rate: 0.3,
            duplicate_file_rate: 0.01,
        }
    }
}

const VERBS: &[&str] = &[
    "get", "set", "read", "load", "decode", "open", "close", "parse", "build", "add", "put", "remove", "update",
    "compute", "find", "create", "check", "write", "append", "apply", "resolve", "register", "notify", "handle",
    "convert", "format", "validate", "start", "stop", "reset", "flush", "copy", "merge", "sort", "filter", "draw",
    "measure", "layout", "bind", "release", "acquire", "scan", "encode", "send", "receive", "init", "dispose",
];

const NOUNS: &[&str] = &[
    "Item", "Value", "Name", "Count", "Size", "Index", "Key", "Entry", "Node", "View", "Child", "Parent", "Text",
    "Image", "Bitmap", "Stream", "Buffer", "File", "Path", "Config", "Options", "Listener", "Handler", "Task",
    "Request", "Response", "Header", "Body", "Message", "Event", "State", "Status", "Result", "Error", "Cache",
    "Table", "Column", "Row", "Record", "Field", "Type", "Model", "Layer", "Frame", "Width", "Height", "Color",
    "Style", "Font", "Token", "Session", "User", "Account", "Context", "Manager", "Service", "Thread", "Lock",
    "Timer", "Queue", "Bytes", "Line", "Offset", "Length", "Position", "Bounds", "Rect", "Point", "Matrix",
];

const TYPES: &[&str] = &[
    "int", "long", "boolean", "double", "float", "String", "Object", "StringBuilder", "List<String>",
    "Map<String, Integer>", "Set<String>", "File", "InputStream", "OutputStream", "Reader", "Writer", "Bitmap",
    "View", "ViewGroup", "Context", "Intent", "Bundle", "Cursor", "Uri", "JSONObject", "JSONArray", "Node",
    "Element", "Document", "Socket", "URL", "Thread", "Runnable", "Handler", "Message", "Date", "Calendar",
    "Matcher", "Pattern", "BigDecimal", "byte[]", "int[]", "char[]", "ArrayList<Integer>", "Iterator<String>",
    "Rect", "Paint", "Canvas", "Point", "Path", "Random", "Logger", "Connection", "ResultSet", "Statement",
];

const CLASSES: &[&str] = &[
    "Math", "Arrays", "Collections", "Objects", "Integer", "Long", "String", "Double", "Boolean", "System",
    "BitmapFactory", "TextUtils", "Log", "Files", "Paths", "Pattern", "Thread", "Executors", "Color",
    "Uri", "Intent", "Environment", "TimeUnit", "Character", "Optional", "Stream", "Utils", "IOUtils",
];

const NEWABLE: &[&str] = &[
    "StringBuilder", "ArrayList<>", "HashMap<>", "HashSet<>", "File", "Intent", "Bundle", "Rect", "Paint",
    "Point", "Object", "Random", "JSONObject", "JSONArray", "Thread", "Handler", "Date", "FileInputStream",
    "FileOutputStream", "BufferedReader", "InputStreamReader", "ByteArrayOutputStream", "BitmapFactory.Options",
];

const EXCEPTIONS: &[&str] = &[
    "IOException", "IllegalArgumentException", "IllegalStateException", "NullPointerException",
    "NumberFormatException", "JSONException", "InterruptedException", "SQLException", "RuntimeException",
    "FileNotFoundException", "SecurityException", "Exception",
];

const LOCALS: &[&str] = &[
    "result", "count", "item", "value", "name", "list", "map", "builder", "input", "output", "file", "buffer",
    "index", "key", "entry", "node", "view", "child", "text", "data", "size", "total", "offset", "length",
    "temp", "current", "next", "prev", "options", "image", "stream", "reader", "writer", "line", "parts",
    "width", "height", "bounds", "status", "response", "request", "config", "cursor", "uri", "intent", "source",
];

const STRINGS: &[&str] = &[
    "", "id", "name", "type", "value", "error", "ok", "utf-8", "/", ",", ":", "default", "main", "data",
    "invalid state", "not found", "failed to load", "unexpected value", "key", "url", "%d items", "\\n",
];

/// Draws skewed towards the front of `items`.
fn skewed<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    let u: f64 = rng.random();
    items[((u * u) * items.len() as f64) as usize]
}

/// Non-local names for one method. Variants replay the template's stream and
/// redraw each name with probability `rate` from a separate stream.
struct Names {
    base: ChaCha8Rng,
    alt: ChaCha8Rng,
    rate: f64,
}

impl Names {
    fn pick<T>(&mut self, f: impl Fn(&mut ChaCha8Rng) -> T) -> T {
        let v = f(&mut self.base);
        if self.rate > 0.0 && self.alt.random_bool(self.rate) {
            f(&mut self.alt)
        } else {
            v
        }
    }

    fn call(&mut self) -> String {
        self.pick(|r| format!("{}{}", skewed(r, VERBS), skewed(r, NOUNS)))
    }

    fn getter(&mut self) -> String {
        self.pick(|r| {
            let verb = *["get", "is", "has", "find", "compute", "read", "load"].choose(r).unwrap();
            format!("{verb}{}", skewed(r, NOUNS))
        })
    }

    fn field(&mut self) -> String {
        self.pick(|r| {
            let n = skewed(r, NOUNS);
            match r.random_range(0..3) {
                0 => format!("m{n}"),
                1 => format!("{}{}", n[..1].to_lowercase(), &n[1..]),
                _ => n.to_uppercase(),
            }
        })
    }

    fn ty(&mut self) -> String {
        self.pick(|r| skewed(r, TYPES).to_string())
    }

    fn class(&mut self) -> String {
        self.pick(|r| skewed(r, CLASSES).to_string())
    }

    fn newable(&mut self) -> String {
        self.pick(|r| skewed(r, NEWABLE).to_string())
    }

    fn exception(&mut self) -> String {
        self.pick(|r| skewed(r, EXCEPTIONS).to_string())
    }

    fn literal(&mut self) -> String {
        self.pick(|r| match r.random_range(0..10) {
            0..=3 => r.random_range(0..4).to_string(),
            4..=5 => [8, 10, 16, 32, 100, 255, 1024, 4096].choose(r).unwrap().to_string(),
            6..=8 => format!("\"{}\"", skewed(r, STRINGS)),
            _ => ["true", "false", "null"].choose(r).unwrap().to_string(),
        })
    }
}

/// Emits one method. Structure comes from `shape`, names from `names`.
struct MethodGen<'a> {
    /// Seeds of the template's top-level statements.
    plan: ChaCha8Rng,
    rewrite: f64,
    shape: ChaCha8Rng,
    names: Names,
    local_names: &'a [&'a str],
    locals: Vec<String>,
    lines: Vec<String>,
    budget: usize,
}

impl MethodGen<'_> {
    fn fresh_local(&mut self) -> String {
        let i = self.locals.len();
        let base = self.local_names[i % self.local_names.len()];
        let name = if i < self.local_names.len() { base.to_string() } else { format!("{base}{}", i / self.local_names.len()) };
        self.locals.push(name.clone());
        name
    }

    fn some_local(&mut self) -> Option<String> {
        if self.locals.is_empty() {
            None
        } else {
            let i = self.shape.random_range(0..self.locals.len());
            Some(self.locals[i].clone())
        }
    }

    fn receiver(&mut self) -> String {
        match self.shape.random_range(0..6) {
            0..=2 => self.some_local().unwrap_or_else(|| self.names.field()),
            3 => self.names.class(),
            4 => format!("this.{}", self.names.field()),
            _ => self.names.field(),
        }
    }

    fn args(&mut self, depth: u32) -> String {
        let n = self.shape.random_range(0..4);
        (0..n).map(|_| self.expr(depth + 1)).collect::<Vec<_>>().join(", ")
    }

    fn expr(&mut self, depth: u32) -> String {
        let leaf_only = depth >= 2;
        let k = if leaf_only { self.shape.random_range(0..3) } else { self.shape.random_range(0..9) };
        match k {
            0 => self.some_local().unwrap_or_else(|| self.names.literal()),
            1 => self.names.literal(),
            2 => self.names.field(),
            3 | 4 => {
                let recv = self.receiver();
                let m = self.names.call();
                let a = self.args(depth);
                format!("{recv}.{m}({a})")
            }
            5 => {
                let t = self.names.newable();
                let a = self.args(depth);
                format!("new {t}({a})")
            }
            6 => {
                let a = self.expr(depth + 1);
                let op = *["+", "-", "*", "/", "%"].choose(&mut self.shape).unwrap();
                let b = self.expr(depth + 1);
                format!("{a} {op} {b}")
            }
            7 => {
                let recv = self.receiver();
                let m = self.names.getter();
                format!("{recv}.{m}()")
            }
            _ => {
                let t = self.names.ty();
                let v = self.some_local().unwrap_or_else(|| self.names.field());
                let m = self.names.getter();
                format!("(({t}) {v}).{m}()")
            }
        }
    }

    fn cond(&mut self) -> String {
        let base = match self.shape.random_range(0..7) {
            0 => format!("{} != null", self.receiver()),
            1 => format!("{} == null", self.receiver()),
            2 => {
                let a = self.expr(1);
                let op = *["<", ">", "<=", ">=", "==", "!="].choose(&mut self.shape).unwrap();
                let b = self.names.literal();
                format!("{a} {op} {b}")
            }
            3 => format!("!{}.isEmpty()", self.receiver()),
            4 => format!("{}.equals({})", self.receiver(), self.expr(1)),
            5 => format!("{} instanceof {}", self.receiver(), self.names.newable().trim_end_matches("<>")),
            _ => {
                let recv = self.receiver();
                let m = self.names.getter();
                format!("{recv}.{m}()")
            }
        };
        if self.shape.random_bool(0.15) {
            let extra = format!("{} > {}", self.expr(2), self.names.literal());
            let op = if self.shape.random_bool(0.5) { "&&" } else { "||" };
            format!("{base} {op} {extra}")
        } else {
            base
        }
    }

    fn push(&mut self, indent: usize, line: String) {
        self.lines.push(format!("{}{line}", "    ".repeat(indent)));
        self.budget = self.budget.saturating_sub(1);
    }

    fn block(&mut self, indent: usize, max: usize) {
        let n = self.shape.random_range(1..=max.max(1));
        let scope = self.locals.len();
        for i in 0..n {
            if i > 0 && self.budget == 0 {
                break;
            }
            self.statement(indent);
        }
        self.locals.truncate(scope);
    }

    fn statement(&mut self, indent: usize) {
        let compound = indent < 4 && self.budget >= 3;
        let k = if compound { self.shape.random_range(0..26) } else { self.shape.random_range(0..14) };
        match k {
            0..=4 => {
                let t = self.names.ty();
                let e = self.expr(0);
                let v = self.fresh_local();
                self.push(indent, format!("{t} {v} = {e};"));
            }
            5..=7 | 13 => {
                let recv = self.receiver();
                let m = self.names.call();
                let a = self.args(0);
                self.push(indent, format!("{recv}.{m}({a});"));
            }
            8 | 9 => {
                let target = self.some_local().unwrap_or_else(|| format!("this.{}", self.names.field()));
                let op = *["=", "=", "+=", "-=", "|="].choose(&mut self.shape).unwrap();
                let e = self.expr(0);
                self.push(indent, format!("{target} {op} {e};"));
            }
            10 => match self.some_local() {
                Some(v) => {
                    let op = if self.shape.random_bool(0.7) { "++" } else { "--" };
                    self.push(indent, format!("{v}{op};"));
                }
                None => {
                    let f = self.names.field();
                    let e = self.expr(0);
                    self.push(indent, format!("{f} = {e};"));
                }
            },
            11 => {
                let c = self.cond();
                let t = self.names.exception();
                let msg = self.names.literal();
                self.push(indent, format!("if ({c}) {{"));
                self.push(indent + 1, format!("throw new {t}({msg});"));
                self.push(indent, "}".into());
            }
            12 => {
                let c = self.cond();
                self.push(indent, format!("if ({c}) {{"));
                self.push(indent + 1, "return;".into());
                self.push(indent, "}".into());
            }
            14..=17 => {
                let c = self.cond();
                self.push(indent, format!("if ({c}) {{"));
                self.block(indent + 1, 3);
                if self.shape.random_bool(0.3) && self.budget > 1 {
                    self.push(indent, "} else {".into());
                    self.block(indent + 1, 2);
                }
                self.push(indent, "}".into());
            }
            18 | 19 => {
                let i = self.fresh_local();
                let bound = match self.shape.random_range(0..3) {
                    0 => format!("{}.size()", self.receiver()),
                    1 => format!("{}.length", self.receiver()),
                    _ => self.names.literal(),
                };
                self.push(indent, format!("for (int {i} = 0; {i} < {bound}; {i}++) {{"));
                self.block(indent + 1, 3);
                self.push(indent, "}".into());
                self.locals.pop();
            }
            20 => {
                let t = self.names.ty();
                let coll = self.receiver();
                let v = self.fresh_local();
                self.push(indent, format!("for ({t} {v} : {coll}) {{"));
                self.block(indent + 1, 3);
                self.push(indent, "}".into());
                self.locals.pop();
            }
            21 => {
                let c = self.cond();
                self.push(indent, format!("while ({c}) {{"));
                self.block(indent + 1, 3);
                self.push(indent, "}".into());
            }
            22 | 23 => {
                self.push(indent, "try {".into());
                self.block(indent + 1, 3);
                let t = self.names.exception();
                let e = self.fresh_local();
                self.push(indent, format!("}} catch ({t} {e}) {{"));
                let recv = self.names.class();
                let m = self.names.call();
                self.push(indent + 1, format!("{recv}.{m}({e});"));
                self.locals.pop();
                if self.shape.random_bool(0.2) {
                    self.push(indent, "} finally {".into());
                    self.block(indent + 1, 1);
                }
                self.push(indent, "}".into());
            }
            24 => {
                let v = self.some_local().unwrap_or_else(|| self.names.field());
                self.push(indent, format!("switch ({v}) {{"));
                for _ in 0..self.shape.random_range(1..=3) {
                    let lit = self.names.literal();
                    self.push(indent + 1, format!("case {lit}:"));
                    self.block(indent + 2, 1);
                    self.push(indent + 2, "break;".into());
                }
                self.push(indent + 1, "default:".into());
                self.block(indent + 2, 1);
                self.push(indent, "}".into());
            }
            _ => {
                let c = self.cond();
                self.push(indent, format!("if ({c}) {{"));
                self.block(indent + 1, 4);
                self.push(indent, "}".into());
            }
        }
    }

    /// Reseeds the structure and name streams before a top-level statement.
    /// A variant replaces both seeds with probability `rewrite`.
    fn reseed(&mut self) {
        let mut shape = self.plan.random::<u64>();
        let mut names = self.plan.random::<u64>();
        if self.rewrite > 0.0 && self.names.alt.random_bool(self.rewrite) {
            shape = self.names.alt.random();
            names = self.names.alt.random();
        }
        self.shape = ChaCha8Rng::seed_from_u64(shape);
        self.names.base = ChaCha8Rng::seed_from_u64(names);
    }

    fn method(mut self, name: &str, params: usize) -> String {
        let mut decl = Vec::new();
        for _ in 0..params {
            let t = self.names.ty();
            let v = self.fresh_local();
            decl.push(format!("{t} {v}"));
        }
        let ret = if self.shape.random_bool(0.4) { Some(self.names.ty()) } else { None };
        while self.budget > usize::from(ret.is_some()) {
            self.reseed();
            self.statement(2);
        }
        if ret.is_some() {
            let e = self.some_local().unwrap_or_else(|| self.names.literal());
            self.push(2, format!("return {e};"));
        }
        let mut out = format!(
            "    public {} {name}({}) {{\n",
            ret.as_deref().unwrap_or("void"),
            decl.join(", ")
        );
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str("    }\n");
        out
    }
}

#[derive(Clone, Copy)]
struct Template {
    shape_seed: u64,
    names_seed: u64,
    lines: usize,
    params: usize,
}

/// Generates `config.methods` methods as Java files grouped into projects.
/// The same configuration always yields the same files.
pub fn generate_files(config: &SynthConfig) -> Vec<SourceFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut files = Vec::new();
    let mut made = 0usize;
    let mut file_no = 0usize;
    let mut templates: Vec<Template> = Vec::new();
    let mut pending_dup: Option<SourceFile> = None;
    while made < config.methods {
        let project_no = file_no / config.files_per_project;
        let project = format!("project{project_no:05}");
        if file_no % config.files_per_project == 0 {
            templates.clear();
            if let Some(dup) = pending_dup.take() {
                let path = format!("{project}/{}", dup.path.split_once('/').map_or("", |(_, rest)| rest));
                files.push(SourceFile::new(&project, &path, dup.text));
            }
        }
        let class = format!("{}{}{file_no}", skewed(&mut rng, NOUNS), skewed(&mut rng, NOUNS));
        let mut text = format!("package gen.p{project_no};\n\npublic class {class} {{\n");
        let count = config.methods_per_file.min(config.methods - made);
        for m in 0..count {
            let variant = !templates.is_empty() && rng.random_bool(config.variant_rate);
            let t = if variant {
                templates[rng.random_range(0..templates.len())]
            } else {
                let lines = match rng.random_range(0..10) {
                    0..=2 => rng.random_range(5..12),
                    3..=7 => rng.random_range(12..24),
                    _ => rng.random_range(24..45),
                };
                let t = Template { shape_seed: rng.random(), names_seed: rng.random(), lines, params: rng.random_range(0..4) };
                templates.push(t);
                t
            };
            let shift = if variant { rng.random_range(1..LOCALS.len()) } else { 0 };
            let local_names: Vec<&str> = LOCALS[shift..].iter().chain(&LOCALS[..shift]).copied().collect();
            let gen = MethodGen {
                plan: ChaCha8Rng::seed_from_u64(t.shape_seed ^ t.names_seed),
                rewrite: if variant { config.rewrite_rate } else { 0.0 },
                shape: ChaCha8Rng::seed_from_u64(t.shape_seed),
                names: Names {
                    base: ChaCha8Rng::seed_from_u64(t.names_seed),
                    alt: ChaCha8Rng::seed_from_u64(rng.random()),
                    rate: if variant { config.mutation_rate } else { 0.0 },
                },
                local_names: &local_names,
                locals: Vec::new(),
                lines: Vec::new(),
                budget: t.lines,
            };
            let name = format!("{}{}{m}", skewed(&mut rng, VERBS), skewed(&mut rng, NOUNS));
            text.push_str(&gen.method(&name, t.params));
            text.push('\n');
        }
        text.push_str("}\n");
        made += count;
        let file = SourceFile::new(&project, &format!("{project}/src/gen/{class}.java"), text);
        if rng.random_bool(config.duplicate_file_rate) {
            pending_dup = Some(file.clone());
        }
        files.push(file);
        file_no += 1;
    }
    files
}

/// Writes the files below `root`.
pub fn write_corpus(files: &[SourceFile], root: &Path) -> io::Result<()> {
    for f in files {
        let path = root.join(&f.path);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, &f.text)?;
    }
    Ok(())
}

/// The corpus that ingesting the generated files from disk would produce.
pub fn synthetic_corpus(config: &SynthConfig) -> Corpus {
    let files = generate_files(config);
    let stats = IngestStats { files: files.len(), ..IngestStats::default() };
    ingest_files(files, stats)
}
