//! Response-pool and preference-pair file formats.
//!
//! Pools are UTF-8 JSON Lines, one instruction per line with its model
//! responses. Binarized output is also JSON Lines with a fixed key order,
//! one chosen/rejected pair per line, so identical inputs produce
//! byte-identical files.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::select::Strategy;

/// One model's response to an instruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub model: String,
    pub text: String,
}

/// A response-pool row: an instruction and the responses sampled for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionRecord {
    pub instruction_id: String,
    pub instruction: String,
    pub responses: Vec<ModelResponse>,
}

/// Chosen or rejected side of a preference pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSide {
    pub model: String,
    pub text: String,
    pub mb_sup: f64,
}

/// A binarized preference row. Field order here is the serialized key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub instruction_id: String,
    pub instruction: String,
    pub chosen: PairSide,
    pub rejected: PairSide,
    pub mb_sim: f64,
    pub strategy: Strategy,
    pub flags: Vec<String>,
}

/// Streaming reader over a pool file. Yields records in file order; each
/// malformed line surfaces as an `Err` carrying its line number, and the
/// stream continues afterwards so callers choose whether to abort.
pub struct PoolReader<R> {
    reader: R,
    line_no: usize,
    seen_ids: HashSet<String>,
    buf: String,
}

impl PoolReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_reader(BufReader::new(file)))
    }
}

impl<R: BufRead> PoolReader<R> {
    pub fn from_reader(reader: R) -> Self {
        PoolReader {
            reader,
            line_no: 0,
            seen_ids: HashSet::new(),
            buf: String::new(),
        }
    }

    fn parse_line(&mut self) -> Result<InstructionRecord> {
        let line_no = self.line_no;
        let record: InstructionRecord = serde_json::from_str(self.buf.trim_end())
            .map_err(|e| Error::Validation(format!("line {line_no}: {e}")))?;
        if record.responses.is_empty() {
            return Err(Error::Validation(format!(
                "line {line_no}: record `{}` has no responses",
                record.instruction_id
            )));
        }
        let mut models = HashSet::new();
        for r in &record.responses {
            if !models.insert(r.model.as_str()) {
                return Err(Error::Validation(format!(
                    "line {line_no}: duplicate model `{}` in responses",
                    r.model
                )));
            }
        }
        if !self.seen_ids.insert(record.instruction_id.clone()) {
            return Err(Error::Validation(format!(
                "line {line_no}: duplicate instruction_id `{}`",
                record.instruction_id
            )));
        }
        Ok(record)
    }
}

impl<R: BufRead> Iterator for PoolReader<R> {
    type Item = Result<InstructionRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            self.line_no += 1;
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {
                    if self.buf.trim().is_empty() {
                        continue;
                    }
                    return Some(self.parse_line());
                }
                Err(e) => return Some(Err(Error::Validation(format!("line {}: {e}", self.line_no)))),
            }
        }
    }
}

/// Opens a pool file for streaming reads.
pub fn read_pool(path: &Path) -> Result<PoolReader<BufReader<File>>> {
    PoolReader::open(path)
}

/// Writer that lands output atomically: bytes go to `<path>.tmp` and the file
/// is renamed into place by `finish`. Dropping without finishing removes the
/// partial file.
pub struct AtomicFile {
    writer: Option<BufWriter<File>>,
    tmp: PathBuf,
    path: PathBuf,
}

impl AtomicFile {
    pub fn create(path: &Path) -> Result<Self> {
        let tmp = tmp_path(path);
        let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        Ok(AtomicFile {
            writer: Some(BufWriter::new(file)),
            tmp,
            path: path.to_path_buf(),
        })
    }

    pub fn writer(&mut self) -> &mut BufWriter<File> {
        self.writer.as_mut().expect("writer taken")
    }

    pub fn finish(mut self) -> Result<()> {
        let mut writer = self.writer.take().expect("writer taken");
        let flush = writer.flush();
        drop(writer);
        if let Err(e) = flush {
            let _ = fs::remove_file(&self.tmp);
            return Err(Error::io(&self.tmp, e));
        }
        fs::rename(&self.tmp, &self.path).map_err(|e| {
            let _ = fs::remove_file(&self.tmp);
            Error::io(&self.path, e)
        })
    }
}

impl Drop for AtomicFile {
    fn drop(&mut self) {
        if self.writer.take().is_some() {
            let _ = fs::remove_file(&self.tmp);
        }
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Streaming pair writer over an [`AtomicFile`].
pub struct PairWriter {
    file: AtomicFile,
    written: u64,
}

impl PairWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(PairWriter {
            file: AtomicFile::create(path)?,
            written: 0,
        })
    }

    pub fn write(&mut self, pair: &PreferencePair) -> Result<()> {
        let out = self.file.writer();
        serde_json::to_writer(&mut *out, pair)?;
        out.write_all(b"\n")
            .map_err(|e| Error::io(&self.file.path, e))?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn finish(self) -> Result<()> {
        self.file.finish()
    }
}

/// Writes pairs as JSON Lines with the fixed key order
/// `instruction_id, instruction, chosen, rejected, mb_sim, strategy, flags`.
pub fn write_pairs<'a, I>(pairs: I, path: &Path) -> Result<u64>
where
    I: IntoIterator<Item = &'a PreferencePair>,
{
    let mut writer = PairWriter::create(path)?;
    for pair in pairs {
        writer.write(pair)?;
    }
    let n = writer.written();
    writer.finish()?;
    Ok(n)
}

/// Streaming reader over a pairs file.
pub struct PairReader<R> {
    reader: R,
    line_no: usize,
    buf: String,
}

impl PairReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(PairReader {
            reader: BufReader::new(file),
            line_no: 0,
            buf: String::new(),
        })
    }
}

impl<R: BufRead> Iterator for PairReader<R> {
    type Item = Result<PreferencePair>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            self.line_no += 1;
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {
                    if self.buf.trim().is_empty() {
                        continue;
                    }
                    let parsed = serde_json::from_str(self.buf.trim_end())
                        .map_err(|e| Error::Validation(format!("line {}: {e}", self.line_no)));
                    return Some(parsed);
                }
                Err(e) => return Some(Err(Error::Validation(format!("line {}: {e}", self.line_no)))),
            }
        }
    }
}

/// Reads a whole pairs file into memory. Streaming callers use [`PairReader`].
pub fn read_pairs(path: &Path) -> Result<Vec<PreferencePair>> {
    PairReader::open(path)?.collect()
}

/// One row of the public UltraFeedback export; annotation fields are ignored.
#[derive(Deserialize)]
struct UltraFeedbackRow {
    instruction: String,
    #[serde(default)]
    completions: Vec<UltraFeedbackCompletion>,
}

#[derive(Deserialize)]
struct UltraFeedbackCompletion {
    model: String,
    response: String,
}

/// Converts an UltraFeedback-shaped JSONL export into the pool format.
/// Every input row becomes exactly one record; ids are `uf-<row index>`.
pub fn convert_ultrafeedback<R: BufRead>(input: R, out_path: &Path) -> Result<u64> {
    let mut file = AtomicFile::create(out_path)?;
    let mut count: u64 = 0;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Validation(format!("line {line_no}: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: UltraFeedbackRow = serde_json::from_str(&line)
            .map_err(|e| Error::Validation(format!("line {line_no}: {e}")))?;
        if row.completions.is_empty() {
            return Err(Error::Validation(format!(
                "line {line_no}: row has no completions"
            )));
        }
        let mut models = HashSet::new();
        for c in &row.completions {
            if !models.insert(c.model.as_str()) {
                return Err(Error::Validation(format!(
                    "line {line_no}: duplicate model `{}` in completions",
                    c.model
                )));
            }
        }
        let record = InstructionRecord {
            instruction_id: format!("uf-{idx:06}"),
            instruction: row.instruction,
            responses: row
                .completions
                .into_iter()
                .map(|c| ModelResponse {
                    model: c.model,
                    text: c.response,
                })
                .collect(),
        };
        let out = file.writer();
        serde_json::to_writer(&mut *out, &record)?;
        out.write_all(b"\n").map_err(|e| Error::io(out_path, e))?;
        count += 1;
    }
    file.finish()?;
    Ok(count)
}

/// Serializes a value as pretty JSON to `path` atomically.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut file = AtomicFile::create(path)?;
    let out = file.writer();
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    file.finish()
}

/// Reads a JSON value from `path`.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut buf = String::new();
    reader
        .read_to_string(&mut buf)
        .map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&buf)?)
}
