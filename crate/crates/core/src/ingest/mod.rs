//! Streaming construction of a [`KnowledgeBase`] from dump files.
//!
//! Two line-oriented formats are accepted: the Statement-JSONL format, which
//! carries ranks and qualifiers, and Wikidata-style truthy N-Triples, which
//! carries neither. Union statements need qualifiers, so a knowledge base
//! loaded only from N-Triples has no classification axes.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use serde::Serialize;
use thiserror::Error;

use crate::model::{Claim, KnowledgeBase, KnowledgeBaseBuilder, PropertyId};

mod jsonl;
mod ntriples;

pub use jsonl::{parse_record, write_jsonl, write_record};
pub use ntriples::NTriplesPrefixes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Jsonl,
    NTriples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OnMalformed {
    #[default]
    Fail,
    SkipAndCount,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub format: Format,
    /// `None` keeps every property.
    pub property_allowlist: Option<HashSet<PropertyId>>,
    pub on_malformed: OnMalformed,
    pub prefixes: NTriplesPrefixes,
}

impl IngestOptions {
    pub fn jsonl() -> Self {
        Self::default()
    }

    pub fn ntriples() -> Self {
        Self {
            format: Format::NTriples,
            ..Self::default()
        }
    }

    pub fn skip_malformed(mut self) -> Self {
        self.on_malformed = OnMalformed::SkipAndCount;
        self
    }

    pub fn allow_properties(mut self, properties: impl IntoIterator<Item = PropertyId>) -> Self {
        self.property_allowlist = Some(properties.into_iter().collect());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub lines_read: u64,
    pub statements_kept: u64,
    /// Well-formed lines that were filtered out.
    pub statements_dropped: u64,
    pub malformed_lines: u64,
    /// 1-based line number within its stream.
    pub first_error: Option<(u64, String)>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("i/o failure while reading input: {0}")]
    Io(#[from] io::Error),
}

/// Outcome of decoding one line.
pub(crate) enum Parsed {
    Keep(Claim),
    Drop,
    Blank,
}

/// Feeds any number of streams into one knowledge base.
#[derive(Debug)]
pub struct Ingester {
    builder: KnowledgeBaseBuilder,
    opts: IngestOptions,
    report: IngestReport,
}

impl Ingester {
    pub fn new(opts: IngestOptions) -> Self {
        Self {
            builder: KnowledgeBaseBuilder::new(),
            opts,
            report: IngestReport::default(),
        }
    }

    pub fn read(&mut self, mut reader: impl BufRead) -> Result<(), IngestError> {
        let mut buf = Vec::with_capacity(256);
        let mut line_no = 0u64;
        loop {
            buf.clear();
            if reader.read_until(b'\n', &mut buf)? == 0 {
                return Ok(());
            }
            line_no += 1;
            self.report.lines_read += 1;
            let parsed = match std::str::from_utf8(&buf) {
                Ok(line) => match self.opts.format {
                    Format::Jsonl => jsonl::parse_line(line),
                    Format::NTriples => ntriples::parse_line(line, &self.opts.prefixes),
                },
                Err(e) => Err(format!("invalid UTF-8: {e}")),
            };
            match parsed {
                Ok(Parsed::Keep(claim)) => {
                    let allowed = self
                        .opts
                        .property_allowlist
                        .as_ref()
                        .is_none_or(|allow| allow.contains(&claim.property));
                    if allowed {
                        self.builder.push(claim);
                        self.report.statements_kept += 1;
                    } else {
                        self.report.statements_dropped += 1;
                    }
                }
                Ok(Parsed::Drop) => self.report.statements_dropped += 1,
                Ok(Parsed::Blank) => {}
                Err(message) => {
                    if self.opts.on_malformed == OnMalformed::Fail {
                        return Err(IngestError::Malformed { line: line_no, message });
                    }
                    self.report.malformed_lines += 1;
                    if self.report.first_error.is_none() {
                        self.report.first_error = Some((line_no, message));
                    }
                }
            }
        }
    }

    /// Switches the line format for subsequent streams.
    pub fn set_format(&mut self, format: Format) {
        self.opts.format = format;
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    pub fn finish(self) -> (KnowledgeBase, IngestReport) {
        (self.builder.freeze(), self.report)
    }
}

/// Reads Statement-JSONL; `opts.format` is ignored.
pub fn ingest_jsonl(
    stream: impl BufRead,
    opts: &IngestOptions,
) -> Result<(KnowledgeBase, IngestReport), IngestError> {
    let mut ingester = Ingester::new(IngestOptions {
        format: Format::Jsonl,
        ..opts.clone()
    });
    ingester.read(stream)?;
    Ok(ingester.finish())
}

/// Reads truthy N-Triples; `opts.format` is ignored.
pub fn ingest_ntriples(
    stream: impl BufRead,
    opts: &IngestOptions,
) -> Result<(KnowledgeBase, IngestReport), IngestError> {
    let mut ingester = Ingester::new(IngestOptions {
        format: Format::NTriples,
        ..opts.clone()
    });
    ingester.read(stream)?;
    Ok(ingester.finish())
}

/// Opens a plain or gzip-compressed file, sniffing the gzip magic bytes.
pub fn open_input(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let mut reader = BufReader::with_capacity(1 << 20, File::open(path)?);
    let gzipped = reader.fill_buf()?.starts_with(&[0x1f, 0x8b]);
    if gzipped {
        Ok(Box::new(BufReader::with_capacity(1 << 20, MultiGzDecoder::new(reader))))
    } else {
        Ok(Box::new(reader))
    }
}

/// Same sniffing as [`open_input`] for an arbitrary reader.
pub fn decompressing(reader: impl Read + Send + 'static) -> io::Result<Box<dyn BufRead + Send>> {
    let mut reader = BufReader::new(reader);
    if reader.fill_buf()?.starts_with(&[0x1f, 0x8b]) {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(reader))))
    } else {
        Ok(Box::new(reader))
    }
}
