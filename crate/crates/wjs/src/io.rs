//! Corpus and fingerprint persistence.
//!
//! Corpora travel as the usual sparse text format — one document per
//! line, `label index:weight index:weight …` with 1-based indices —
//! plus `#` comment lines for run metadata. Fingerprints travel as a
//! little-endian binary file whose header pins everything two files must
//! agree on before their codes may be compared: algorithm (with its
//! parameter), fingerprint length, master seed, and a digest of the
//! corpus that produced them. A trailing-word checksum over the whole
//! payload turns silent corruption into a loud error.

use crate::sketch::{Algorithm, Fingerprint, HashCode, SparseWeightedSet};
use crate::variates::absorb;
use std::io::{BufRead, Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed token {token:?} (expected index:weight)")]
    MalformedToken { line: usize, token: String },
    #[error("line {line}: feature indices are 1-based; 0 is not a valid index")]
    ZeroIndex { line: usize },
    #[error("line {line}: feature index {index} appears more than once")]
    DuplicateIndex { line: usize, index: u64 },
    #[error("line {line}: negative weight {value}")]
    NegativeWeight { line: usize, value: f64 },
    #[error("line {line}: weight is not a finite number")]
    NonFiniteWeight { line: usize },
}

/// A parsed corpus: documents in file order (doc ids are their
/// positions), plus the 1-based numbers of lines that held no features
/// and were skipped.
#[derive(Debug, Clone)]
pub struct ParsedCorpus {
    pub docs: Vec<SparseWeightedSet>,
    pub skipped_lines: Vec<usize>,
}

pub fn parse_sparse_file(path: impl AsRef<Path>) -> Result<ParsedCorpus, ParseError> {
    let file = std::fs::File::open(path)?;
    parse_sparse_reader(std::io::BufReader::new(file))
}

pub fn parse_sparse_reader(reader: impl BufRead) -> Result<ParsedCorpus, ParseError> {
    let mut docs = Vec::new();
    let mut skipped_lines = Vec::new();
    for (line0, line) in reader.lines().enumerate() {
        let line_no = line0 + 1;
        let line = line?;
        let trimmed = line.trim_start();
        if trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let Some(label) = tokens.next() else {
            skipped_lines.push(line_no);
            continue;
        };
        let mut seen = std::collections::HashSet::new();
        let mut entries = Vec::new();
        for token in tokens {
            let (index, weight) = parse_feature(token, line_no)?;
            if !seen.insert(index) {
                return Err(ParseError::DuplicateIndex {
                    line: line_no,
                    index,
                });
            }
            if weight > 0.0 {
                entries.push((index - 1, weight));
            }
        }
        if entries.is_empty() {
            skipped_lines.push(line_no);
            continue;
        }
        let doc = SparseWeightedSet::new(docs.len() as u64, entries)
            .expect("parser pre-validates weights and duplicates")
            .with_label(label);
        docs.push(doc);
    }
    Ok(ParsedCorpus {
        docs,
        skipped_lines,
    })
}

fn parse_feature(token: &str, line: usize) -> Result<(u64, f64), ParseError> {
    let malformed = || ParseError::MalformedToken {
        line,
        token: token.to_string(),
    };
    let (idx, val) = token.split_once(':').ok_or_else(malformed)?;
    let index: u64 = idx.parse().map_err(|_| malformed())?;
    let weight: f64 = val.parse().map_err(|_| malformed())?;
    if index == 0 {
        return Err(ParseError::ZeroIndex { line });
    }
    if weight.is_nan() || weight.is_infinite() {
        return Err(ParseError::NonFiniteWeight { line });
    }
    if weight < 0.0 {
        return Err(ParseError::NegativeWeight {
            line,
            value: weight,
        });
    }
    Ok((index, weight))
}

/// Write documents in the sparse text format, preceded by `#` comment
/// lines. Labels fall back to the doc id when empty.
pub fn write_sparse_file(
    path: impl AsRef<Path>,
    docs: &[SparseWeightedSet],
    comments: &[String],
) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for comment in comments {
        writeln!(out, "# {comment}")?;
    }
    for doc in docs {
        if doc.label().is_empty() {
            write!(out, "{}", doc.doc_id())?;
        } else {
            write!(out, "{}", doc.label())?;
        }
        for &(element, weight) in doc.entries() {
            write!(out, " {}:{}", element + 1, weight)?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Order-insensitive digest of a corpus: documents are folded in
/// ascending doc-id order, covering ids, supports, and weight bits, so
/// fingerprints of different corpora (or reweighted ones) can never be
/// compared by accident.
pub fn corpus_digest(docs: &[SparseWeightedSet]) -> u64 {
    let mut order: Vec<&SparseWeightedSet> = docs.iter().collect();
    order.sort_by_key(|d| d.doc_id());
    let mut h = absorb(0, 0x636f_7270_7573_3a31); // personalization word
    for doc in order {
        h = absorb(h, doc.doc_id());
        h = absorb(h, doc.len() as u64);
        for &(element, weight) in doc.entries() {
            h = absorb(h, element);
            h = absorb(h, weight.to_bits());
        }
    }
    h
}

const MAGIC: [u8; 4] = *b"WJS1";
const FORMAT_VERSION: u16 = 1;
/// Reserved element word marking an empty sample in index-only records.
const EMPTY_SENTINEL: u64 = u64::MAX;

#[derive(Debug, Error)]
pub enum FingerprintFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a fingerprint file (bad magic)")]
    BadMagic,
    #[error("unsupported fingerprint file version {found} (this build reads {FORMAT_VERSION})")]
    UnsupportedVersion { found: u16 },
    #[error("unknown algorithm tag {tag}")]
    UnknownAlgorithmTag { tag: u8 },
    #[error("header payload flag contradicts the algorithm")]
    CorruptHeader,
    #[error("file ends before the declared {expected} records")]
    Truncated { expected: u64 },
    #[error("file has data past the declared records")]
    TrailingBytes,
    #[error("checksum mismatch: file is corrupt or was edited")]
    ChecksumMismatch,
    #[error("record for doc {doc_id} has {got} codes, header declares {expected}")]
    RecordLength { doc_id: u64, got: usize, expected: u32 },
    #[error("record for doc {doc_id} holds a code variant the algorithm cannot produce")]
    CodeVariant { doc_id: u64 },
}

/// One document's fingerprint codes inside a file.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintRecord {
    pub doc_id: u64,
    pub codes: Vec<HashCode>,
}

/// In-memory form of a fingerprint file.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintFile {
    pub algorithm: Algorithm,
    pub d: u32,
    pub seed: u64,
    pub corpus_digest: u64,
    pub records: Vec<FingerprintRecord>,
}

impl FingerprintFile {
    /// View one record as a comparable [`Fingerprint`].
    pub fn fingerprint(&self, record: &FingerprintRecord) -> Fingerprint {
        Fingerprint::from_parts(self.algorithm, self.seed, record.codes.clone())
    }

    pub fn find(&self, doc_id: u64) -> Option<&FingerprintRecord> {
        self.records.iter().find(|r| r.doc_id == doc_id)
    }
}

struct WordSink {
    bytes: Vec<u8>,
    checksum: u64,
}

impl WordSink {
    fn new() -> Self {
        Self {
            bytes: Vec::new(),
            checksum: 0,
        }
    }

    fn put(&mut self, word: u64) {
        self.bytes.extend_from_slice(&word.to_le_bytes());
        self.checksum = absorb(self.checksum, word);
    }
}

pub fn write_fingerprints(
    path: impl AsRef<Path>,
    file: &FingerprintFile,
) -> Result<(), FingerprintFileError> {
    let (tag, param) = file.algorithm.wire();
    let has_payload = file.algorithm.pair_valued();

    let mut body = WordSink::new();
    for record in &file.records {
        if record.codes.len() != file.d as usize {
            return Err(FingerprintFileError::RecordLength {
                doc_id: record.doc_id,
                got: record.codes.len(),
                expected: file.d,
            });
        }
        body.put(record.doc_id);
        for code in &record.codes {
            match (*code, has_payload) {
                (HashCode::Pair { element, y_bits }, true) => {
                    body.put(element);
                    body.put(y_bits);
                }
                (HashCode::Index(element), false) if element != EMPTY_SENTINEL => {
                    body.put(element);
                }
                (HashCode::Empty, false) => body.put(EMPTY_SENTINEL),
                _ => {
                    return Err(FingerprintFileError::CodeVariant {
                        doc_id: record.doc_id,
                    })
                }
            }
        }
    }

    let header_words = [
        u64::from(FORMAT_VERSION),
        u64::from(tag),
        u64::from(has_payload),
        param.to_bits(),
        u64::from(file.d),
        file.seed,
        file.corpus_digest,
        file.records.len() as u64,
    ];
    let mut checksum = header_words.iter().fold(0, |h, &w| absorb(h, w));
    for chunk in body.bytes.chunks_exact(8) {
        checksum = absorb(checksum, u64::from_le_bytes(chunk.try_into().unwrap()));
    }

    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(&MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&[tag, u8::from(has_payload)])?;
    out.write_all(&param.to_bits().to_le_bytes())?;
    out.write_all(&file.d.to_le_bytes())?;
    out.write_all(&file.seed.to_le_bytes())?;
    out.write_all(&file.corpus_digest.to_le_bytes())?;
    out.write_all(&(file.records.len() as u64).to_le_bytes())?;
    out.write_all(&checksum.to_le_bytes())?;
    out.write_all(&body.bytes)?;
    out.flush()?;
    Ok(())
}

pub fn read_fingerprints(path: impl AsRef<Path>) -> Result<FingerprintFile, FingerprintFileError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    read_fingerprint_bytes(&bytes)
}

fn read_fingerprint_bytes(bytes: &[u8]) -> Result<FingerprintFile, FingerprintFileError> {
    let mut cursor = Cursor { bytes, at: 0 };
    if cursor.take(4)? != MAGIC {
        return Err(FingerprintFileError::BadMagic);
    }
    let version = u16::from_le_bytes(cursor.take(2)?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(FingerprintFileError::UnsupportedVersion { found: version });
    }
    let tag = cursor.take(1)?[0];
    let has_payload = cursor.take(1)?[0] != 0;
    let param = f64::from_bits(cursor.u64()?);
    let d = u32::from_le_bytes(cursor.take(4)?.try_into().unwrap());
    let seed = cursor.u64()?;
    let corpus_digest = cursor.u64()?;
    let record_count = cursor.u64()?;
    let stored_checksum = cursor.u64()?;

    let algorithm =
        Algorithm::from_wire(tag, param).ok_or(FingerprintFileError::UnknownAlgorithmTag { tag })?;
    if algorithm.pair_valued() != has_payload || d == 0 {
        return Err(FingerprintFileError::CorruptHeader);
    }

    let header_words = [
        u64::from(version),
        u64::from(tag),
        u64::from(has_payload),
        param.to_bits(),
        u64::from(d),
        seed,
        corpus_digest,
        record_count,
    ];
    let mut checksum = header_words.iter().fold(0, |h, &w| absorb(h, w));
    for chunk in bytes[cursor.at..].chunks_exact(8) {
        checksum = absorb(checksum, u64::from_le_bytes(chunk.try_into().unwrap()));
    }

    let mut records = Vec::with_capacity(record_count.min(1 << 20) as usize);
    for _ in 0..record_count {
        let doc_id = cursor.u64().map_err(|_| FingerprintFileError::Truncated {
            expected: record_count,
        })?;
        let mut codes = Vec::with_capacity(d as usize);
        for _ in 0..d {
            let element = cursor.u64().map_err(|_| FingerprintFileError::Truncated {
                expected: record_count,
            })?;
            codes.push(if has_payload {
                let y_bits = cursor.u64().map_err(|_| FingerprintFileError::Truncated {
                    expected: record_count,
                })?;
                if element == EMPTY_SENTINEL {
                    return Err(FingerprintFileError::CodeVariant { doc_id });
                }
                HashCode::Pair { element, y_bits }
            } else if element == EMPTY_SENTINEL {
                HashCode::Empty
            } else {
                HashCode::Index(element)
            });
        }
        records.push(FingerprintRecord { doc_id, codes });
    }
    if cursor.at != bytes.len() {
        return Err(FingerprintFileError::TrailingBytes);
    }
    if checksum != stored_checksum {
        return Err(FingerprintFileError::ChecksumMismatch);
    }
    Ok(FingerprintFile {
        algorithm,
        d,
        seed,
        corpus_digest,
        records,
    })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FingerprintFileError> {
        if self.at + n > self.bytes.len() {
            return Err(FingerprintFileError::Truncated { expected: 0 });
        }
        let slice = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(slice)
    }

    fn u64(&mut self) -> Result<u64, FingerprintFileError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
