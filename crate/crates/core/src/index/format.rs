//! Binary index files. The byte layout is documented in `docs/index-format.md`.

use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{CorpusIndex, Csr, FormatError, IndexError};
use crate::featurizer::{Context, Feature, Interner};
use crate::frontend::{BodyFormat, MethodSource};

pub const MAGIC: [u8; 8] = *b"SSRCHIDX";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 * 4 + 32;

struct Out(Vec<u8>);

impl Out {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
    fn context(&mut self, c: &Context) {
        match *c {
            Context::Positional(i, l) => {
                self.u8(0);
                self.u32(i);
                self.u32(l);
            }
            Context::Token(t) => {
                self.u8(1);
                self.u32(t);
                self.u32(0);
            }
        }
    }
    fn feature(&mut self, f: &Feature) {
        match f {
            Feature::Token(t) => {
                self.u8(0);
                self.u32(*t);
            }
            Feature::Parent(t, i, l) => {
                self.u8(1);
                self.u32(*t);
                self.u32(*i);
                self.u32(*l);
            }
            Feature::Sibling(a, b) => {
                self.u8(2);
                self.u32(*a);
                self.u32(*b);
            }
            Feature::VarUsage(a, b) => {
                self.u8(3);
                self.context(a);
                self.context(b);
            }
        }
    }
    fn csr(&mut self, m: &Csr) {
        let (offsets, cols, vals) = m.parts();
        self.u64(cols.len() as u64);
        for &o in offsets {
            self.u64(o);
        }
        for &c in cols {
            self.u32(c);
        }
        for &v in vals {
            self.u32(v);
        }
    }
}

struct In<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> In<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).ok_or(FormatError::Truncated)?;
        let s = self.buf.get(self.pos..end).ok_or(FormatError::Truncated)?;
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn len(&mut self, elem: usize) -> Result<usize, FormatError> {
        let n = self.u64()? as usize;
        if n.checked_mul(elem).is_none_or(|b| b > self.buf.len() - self.pos) {
            return Err(FormatError::Truncated);
        }
        Ok(n)
    }
    fn str(&mut self) -> Result<String, FormatError> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| FormatError::Corrupt("string"))
    }
    fn context(&mut self) -> Result<Context, FormatError> {
        let tag = self.u8()?;
        let (a, b) = (self.u32()?, self.u32()?);
        match tag {
            0 => Ok(Context::Positional(a, b)),
            1 => Ok(Context::Token(a)),
            _ => Err(FormatError::Corrupt("context tag")),
        }
    }
    fn feature(&mut self) -> Result<Feature, FormatError> {
        Ok(match self.u8()? {
            0 => Feature::Token(self.u32()?),
            1 => Feature::Parent(self.u32()?, self.u32()?, self.u32()?),
            2 => Feature::Sibling(self.u32()?, self.u32()?),
            3 => Feature::VarUsage(self.context()?, self.context()?),
            _ => return Err(FormatError::Corrupt("feature tag")),
        })
    }
    fn csr(&mut self, rows: usize) -> Result<Csr, FormatError> {
        let nnz = self.len(8)?;
        let mut offsets = Vec::with_capacity(rows + 1);
        for _ in 0..=rows {
            offsets.push(self.u64()?);
        }
        let cols = (0..nnz).map(|_| self.u32()).collect::<Result<Vec<_>, _>>()?;
        let vals = (0..nnz).map(|_| self.u32()).collect::<Result<Vec<_>, _>>()?;
        Csr::from_parts(offsets, cols, vals)
    }
}

/// Serializes an index into its file representation.
pub fn write_index(index: &CorpusIndex) -> Vec<u8> {
    let mut p = Out(Vec::new());
    for s in index.symbols.strings() {
        p.str(s);
    }
    for f in &index.features {
        p.feature(f);
    }
    p.csr(&index.matrix);
    p.csr(&index.words);
    for m in &index.methods {
        p.str(&m.project);
        p.str(&m.path);
        p.str(&m.name);
        p.u32(m.params.len() as u32);
        for a in &m.params {
            p.str(a);
        }
        p.str(&m.body);
        p.u8(match m.format {
            BodyFormat::Source => 0,
            BodyFormat::Interchange => 1,
        });
        p.u32(m.line);
        p.u64(m.offset as u64);
        p.u64(m.hash);
    }
    let payload = p.0;
    let mut h = Out(Vec::with_capacity(HEADER_LEN + payload.len()));
    h.0.extend_from_slice(&MAGIC);
    h.u32(FORMAT_VERSION);
    h.u64(index.methods.len() as u64);
    h.u64(index.features.len() as u64);
    h.u64(index.symbols.len() as u64);
    h.u64(payload.len() as u64);
    h.0.extend_from_slice(&Sha256::digest(&payload));
    h.0.extend_from_slice(&payload);
    h.0
}

/// SHA-256 of the payload, as stored in the header.
pub fn checksum(bytes: &[u8]) -> Option<[u8; 32]> {
    bytes.get(HEADER_LEN - 32..HEADER_LEN).map(|s| s.try_into().unwrap())
}

pub fn read_index(bytes: &[u8]) -> Result<CorpusIndex, FormatError> {
    let mut r = In { buf: bytes, pos: 0 };
    if bytes.len() < MAGIC.len() || r.take(MAGIC.len())? != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(FormatError::Version { found: version, expected: FORMAT_VERSION });
    }
    let methods = r.u64()? as usize;
    let features = r.u64()? as usize;
    let symbols = r.u64()? as usize;
    let payload_len = r.u64()? as usize;
    let sum: [u8; 32] = r.take(32)?.try_into().unwrap();
    let payload = &bytes[HEADER_LEN..];
    if payload.len() < payload_len {
        return Err(FormatError::Truncated);
    }
    if payload.len() > payload_len {
        return Err(FormatError::Corrupt("trailing bytes"));
    }
    if Sha256::digest(payload)[..] != sum {
        return Err(FormatError::Checksum);
    }
    let mut r = In { buf: payload, pos: 0 };
    let strings = (0..symbols).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
    let symbols = Interner::from_strings(strings).ok_or(FormatError::Corrupt("symbol table"))?;
    let features = (0..features).map(|_| r.feature()).collect::<Result<Vec<_>, _>>()?;
    let matrix = r.csr(methods)?;
    let words = r.csr(methods)?;
    if matrix.cols.iter().any(|&c| c as usize >= features.len())
        || words.cols.iter().any(|&c| c as usize >= symbols.len())
    {
        return Err(FormatError::Corrupt("column id"));
    }
    let mut metas = Vec::with_capacity(methods);
    for _ in 0..methods {
        let project = r.str()?;
        let path = r.str()?;
        let name = r.str()?;
        let n = r.u32()?;
        let params = (0..n).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
        let body = r.str()?;
        let format = match r.u8()? {
            0 => BodyFormat::Source,
            1 => BodyFormat::Interchange,
            _ => return Err(FormatError::Corrupt("body format")),
        };
        let line = r.u32()?;
        let offset = r.u64()? as usize;
        let hash = r.u64()?;
        metas.push(MethodSource { project, path, name, params, body, format, line, offset, hash });
    }
    if r.pos != payload.len() {
        return Err(FormatError::Corrupt("payload length"));
    }
    Ok(CorpusIndex::assemble(symbols, features, matrix, words, metas))
}

pub fn save_index(index: &CorpusIndex, path: &Path) -> Result<(), IndexError> {
    let io = |source| IndexError::Io { path: path.display().to_string(), source };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(&write_index(index)).map_err(io)?;
    f.sync_all().map_err(io)
}

pub fn load_index(path: &Path) -> Result<CorpusIndex, IndexError> {
    let bytes = std::fs::read(path).map_err(|source| IndexError::Io { path: path.display().to_string(), source })?;
    Ok(read_index(&bytes)?)
}
