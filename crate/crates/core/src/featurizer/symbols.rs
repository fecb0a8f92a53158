//! String interning for token texts and node labels.

use rustc_hash::FxHashMap;

pub type Sym = u32;

/// The sentinel replacing every local variable name.
pub const VAR: Sym = 0;
pub const VAR_TEXT: &str = "#VAR";

/// Anything that can map strings to symbols.
pub trait Symbols {
    fn intern(&mut self, text: &str) -> Sym;
    fn resolve(&self, sym: Sym) -> &str;
}

/// An append-only symbol table. Symbol 0 is always `#VAR`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interner {
    strings: Vec<String>,
    map: FxHashMap<String, Sym>,
}

impl Default for Interner {
    fn default() -> Self {
        Self::new()
    }
}

impl Interner {
    pub fn new() -> Self {
        let mut s = Self { strings: Vec::new(), map: FxHashMap::default() };
        s.intern(VAR_TEXT);
        s
    }

    /// Rebuilds a table from its strings in id order.
    pub fn from_strings(strings: Vec<String>) -> Option<Self> {
        if strings.first().map(String::as_str) != Some(VAR_TEXT) {
            return None;
        }
        let mut map = FxHashMap::default();
        map.reserve(strings.len());
        for (i, s) in strings.iter().enumerate() {
            if map.insert(s.clone(), i as Sym).is_some() {
                return None;
            }
        }
        Some(Self { strings, map })
    }

    pub fn get(&self, text: &str) -> Option<Sym> {
        self.map.get(text).copied()
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn strings(&self) -> &[String] {
        &self.strings
    }
}

impl Symbols for Interner {
    fn intern(&mut self, text: &str) -> Sym {
        if let Some(&s) = self.map.get(text) {
            return s;
        }
        let s = self.strings.len() as Sym;
        self.strings.push(text.to_string());
        self.map.insert(text.to_string(), s);
        s
    }

    fn resolve(&self, sym: Sym) -> &str {
        &self.strings[sym as usize]
    }
}

/// A private extension of a frozen table: known strings keep their ids and
/// new ones get ids past the end of the base, so symbols from the overlay and
/// the base compare consistently.
#[derive(Debug, Clone)]
pub struct Overlay<'a> {
    base: &'a Interner,
    extra: Interner,
}

impl<'a> Overlay<'a> {
    pub fn new(base: &'a Interner) -> Self {
        Self { base, extra: Interner { strings: Vec::new(), map: FxHashMap::default() } }
    }

    /// Whether `sym` exists in the base table.
    pub fn is_base(&self, sym: Sym) -> bool {
        (sym as usize) < self.base.len()
    }
}

impl Symbols for Overlay<'_> {
    fn intern(&mut self, text: &str) -> Sym {
        if let Some(s) = self.base.get(text) {
            return s;
        }
        let offset = self.base.len() as Sym;
        if let Some(s) = self.extra.get(text) {
            return s + offset;
        }
        let s = self.extra.strings.len() as Sym;
        self.extra.strings.push(text.to_string());
        self.extra.map.insert(text.to_string(), s);
        s + offset
    }

    fn resolve(&self, sym: Sym) -> &str {
        let n = self.base.len() as Sym;
        if sym < n {
            self.base.resolve(sym)
        } else {
            &self.extra.strings[(sym - n) as usize]
        }
    }
}
