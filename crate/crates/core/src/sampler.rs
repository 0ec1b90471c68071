//! Extraction of the leading records of a delimited text file.
//!
//! Only as many bytes as are needed to produce `max_rows` records are read
//! from the underlying stream. Quoted fields follow RFC 4180: a quoted cell
//! may contain the delimiter, line breaks and doubled quotes.

use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of rows (header included) handed to the model.
pub const DEFAULT_SAMPLE_ROWS: usize = 10;

const BOM: char = '\u{feff}';

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("file contains no records")]
    EmptyFile,
    #[error("content is not valid UTF-8 text (record {record})")]
    DecodeError { record: usize },
    #[error("unterminated quoted field starting in record {record}")]
    MalformedQuoting { record: usize },
    #[error("sample must contain between 1 and {max} rows, got {got}")]
    RowCount { got: usize, max: usize },
    #[error("row {row} has no cells")]
    EmptyRow { row: usize },
    #[error("I/O error while reading sample: {0}")]
    Io(#[from] std::io::Error),
}

/// Header row plus up to nine data rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSample {
    rows: Vec<Vec<String>>,
    source_name: String,
    delimiter: char,
}

impl DatasetSample {
    /// Wraps an already-parsed matrix (the API path, where the client did the sampling).
    pub fn from_rows(
        rows: Vec<Vec<String>>,
        source_name: impl Into<String>,
    ) -> Result<Self, SampleError> {
        if rows.is_empty() || rows.len() > DEFAULT_SAMPLE_ROWS {
            return Err(SampleError::RowCount {
                got: rows.len(),
                max: DEFAULT_SAMPLE_ROWS,
            });
        }
        if let Some(row) = rows.iter().position(Vec::is_empty) {
            return Err(SampleError::EmptyRow { row });
        }
        Ok(Self {
            rows,
            source_name: source_name.into(),
            delimiter: ',',
        })
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn header(&self) -> &[String] {
        &self.rows[0]
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn delimiter(&self) -> char {
        self.delimiter
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn into_rows(self) -> Vec<Vec<String>> {
        self.rows
    }
}

/// Reads the first `max_rows` records of `content`.
///
/// Blank lines are not records. A UTF-8 byte-order mark at the start of the
/// stream is stripped. `max_rows` is clamped to at least one.
pub fn sample_csv<R: Read>(
    content: R,
    delimiter: char,
    max_rows: usize,
    source_name: impl Into<String>,
) -> Result<DatasetSample, SampleError> {
    let max_rows = max_rows.max(1);
    let mut reader = RecordReader::new(BufReader::new(content), delimiter);
    let mut rows = Vec::with_capacity(max_rows.min(DEFAULT_SAMPLE_ROWS));
    while rows.len() < max_rows {
        match reader.next_record()? {
            Some(record) => rows.push(record),
            None => break,
        }
    }
    if rows.is_empty() {
        return Err(SampleError::EmptyFile);
    }
    Ok(DatasetSample {
        rows,
        source_name: source_name.into(),
        delimiter,
    })
}

/// Convenience wrapper over an in-memory string.
pub fn sample_str(
    content: &str,
    delimiter: char,
    max_rows: usize,
) -> Result<DatasetSample, SampleError> {
    sample_csv(content.as_bytes(), delimiter, max_rows, "stdin")
}

struct RecordReader<R> {
    inner: R,
    delimiter: char,
    line: Vec<u8>,
    records_seen: usize,
    at_start: bool,
}

impl<R: BufRead> RecordReader<R> {
    fn new(inner: R, delimiter: char) -> Self {
        Self {
            inner,
            delimiter,
            line: Vec::new(),
            records_seen: 0,
            at_start: true,
        }
    }

    /// Reads one physical line (terminator included). `Ok(None)` at EOF.
    fn read_line(&mut self) -> Result<Option<String>, SampleError> {
        self.line.clear();
        if self.inner.read_until(b'\n', &mut self.line)? == 0 {
            return Ok(None);
        }
        let mut text = String::from_utf8(std::mem::take(&mut self.line)).map_err(|_| {
            SampleError::DecodeError {
                record: self.records_seen,
            }
        })?;
        if self.at_start {
            self.at_start = false;
            if text.starts_with(BOM) {
                text.drain(..BOM.len_utf8());
            }
        }
        Ok(Some(text))
    }

    fn next_record(&mut self) -> Result<Option<Vec<String>>, SampleError> {
        loop {
            let Some(line) = self.read_line()? else {
                return Ok(None);
            };
            if strip_terminator(&line).is_empty() {
                continue;
            }
            let record = self.parse_record(line)?;
            self.records_seen += 1;
            return Ok(Some(record));
        }
    }

    /// Parses a record starting at `line`, pulling further lines while a quoted
    /// field remains open.
    fn parse_record(&mut self, first: String) -> Result<Vec<String>, SampleError> {
        let mut cells = Vec::new();
        let mut cell = String::new();
        let mut in_quotes = false;
        let mut line = first;

        loop {
            let mut chars = line.chars().peekable();
            while let Some(c) = chars.next() {
                if in_quotes {
                    if c == '"' {
                        if chars.peek() == Some(&'"') {
                            chars.next();
                            cell.push('"');
                        } else {
                            in_quotes = false;
                        }
                    } else {
                        cell.push(c);
                    }
                    continue;
                }
                match c {
                    '"' if cell.is_empty() => in_quotes = true,
                    '\n' => {}
                    '\r' if chars.peek() == Some(&'\n') => {}
                    c if c == self.delimiter => cells.push(std::mem::take(&mut cell)),
                    c => cell.push(c),
                }
            }
            if !in_quotes {
                break;
            }
            match self.read_line()? {
                Some(next) => line = next,
                None => {
                    return Err(SampleError::MalformedQuoting {
                        record: self.records_seen,
                    })
                }
            }
        }
        cells.push(cell);
        Ok(cells)
    }
}

fn strip_terminator(line: &str) -> &str {
    let line = line.strip_suffix('\n').unwrap_or(line);
    line.strip_suffix('\r').unwrap_or(line)
}
