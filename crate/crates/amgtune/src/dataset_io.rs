//! Line-oriented dataset files.
//!
//! ```text
//! # amgtune dataset
//! version = 1
//! fingerprint = 5c1e0d0a9b3f7a21
//! stage = raw
//! q3 = none
//! dims = 3
//! ---
//! 0 4 2 1234.5 1
//! 1 0 7 inf 0
//! ```
//!
//! Each sample line holds the grid indices, the fitness and a converged flag.

use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;

use amgtune_core::evaluator::Stage;
use amgtune_core::{Dataset, FitnessSample, ParameterVector};

pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum DatasetFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DatasetFileError + '_ {
    move |source| DatasetFileError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Header fields of a dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetHeader {
    pub fingerprint: u64,
    pub stage: Stage,
    pub q3: Option<f64>,
    pub dims: usize,
}

impl DatasetHeader {
    pub fn of(d: &Dataset, dims: usize) -> Self {
        DatasetHeader {
            fingerprint: d.fingerprint,
            stage: d.stage,
            q3: d.q3,
            dims,
        }
    }

    pub fn format(&self) -> String {
        let q3 = self.q3.map_or_else(|| "none".to_string(), |q| format!("{q:?}"));
        format!(
            "# amgtune dataset\nversion = {VERSION}\nfingerprint = {:016x}\nstage = {}\nq3 = {q3}\ndims = {}\n---\n",
            self.fingerprint,
            self.stage.as_str(),
            self.dims
        )
    }
}

pub fn format_sample(s: &FitnessSample) -> String {
    let mut line = String::new();
    for i in &s.vector.indices {
        let _ = write!(line, "{i} ");
    }
    let _ = writeln!(line, "{:?} {}", s.value, u8::from(s.converged));
    line
}

pub fn format_dataset(d: &Dataset, dims: usize) -> String {
    let mut s = DatasetHeader::of(d, dims).format();
    for sample in &d.samples {
        s.push_str(&format_sample(sample));
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> DatasetFileError {
    DatasetFileError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_sample(text: &str, line: usize, dims: usize) -> Result<FitnessSample, DatasetFileError> {
    let tok: Vec<&str> = text.split_whitespace().collect();
    if tok.len() != dims + 2 {
        return Err(perr(line, format!("expected {} fields, got {}", dims + 2, tok.len())));
    }
    let indices = tok[..dims]
        .iter()
        .map(|t| t.parse::<u32>().map_err(|_| perr(line, format!("bad index `{t}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let value: f64 = tok[dims]
        .parse()
        .map_err(|_| perr(line, format!("bad fitness `{}`", tok[dims])))?;
    if value.is_nan() || value < 0.0 {
        return Err(perr(line, format!("fitness {value} must be non-negative")));
    }
    let converged = match tok[dims + 1] {
        "1" => true,
        "0" => false,
        t => return Err(perr(line, format!("bad converged flag `{t}`"))),
    };
    Ok(FitnessSample {
        vector: ParameterVector::new(indices),
        value,
        converged,
    })
}

/// Parses a whole file. Returns the header and the dataset.
pub fn parse_dataset(text: &str) -> Result<(DatasetHeader, Dataset), DatasetFileError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut fields = std::collections::BTreeMap::new();
    let mut body_start = None;
    for (line, l) in lines.by_ref() {
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if l == "---" {
            body_start = Some(line);
            break;
        }
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| perr(line, format!("expected `key = value`, got `{l}`")))?;
        fields.insert(k.trim().to_string(), (line, v.trim().to_string()));
    }
    let end = body_start.ok_or_else(|| perr(text.lines().count().max(1), "missing `---` header terminator"))?;
    let get = |k: &str| {
        fields
            .get(k)
            .ok_or_else(|| perr(end, format!("header lacks `{k}`")))
    };
    let (l, v) = get("version")?;
    if v.parse::<u32>().ok() != Some(VERSION) {
        return Err(perr(*l, format!("unsupported version `{v}`")));
    }
    let (l, v) = get("fingerprint")?;
    let fingerprint = u64::from_str_radix(v, 16).map_err(|_| perr(*l, format!("bad fingerprint `{v}`")))?;
    let (l, v) = get("stage")?;
    let stage = Stage::parse(v).ok_or_else(|| perr(*l, format!("unknown stage `{v}`")))?;
    let (l, v) = get("q3")?;
    let q3 = match v.as_str() {
        "none" => None,
        s => Some(s.parse::<f64>().map_err(|_| perr(*l, format!("bad q3 `{s}`")))?),
    };
    let (l, v) = get("dims")?;
    let dims = v.parse().map_err(|_| perr(*l, format!("bad dims `{v}`")))?;

    let mut samples = Vec::new();
    for (line, l) in lines {
        if l.is_empty() {
            continue;
        }
        samples.push(parse_sample(l, line, dims)?);
    }
    let header = DatasetHeader {
        fingerprint,
        stage,
        q3,
        dims,
    };
    let dataset = Dataset {
        fingerprint,
        samples,
        stage,
        q3,
    };
    Ok((header, dataset))
}

pub fn read_dataset(path: &Path) -> Result<(DatasetHeader, Dataset), DatasetFileError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_dataset(&text)
}

pub fn write_dataset(path: &Path, d: &Dataset, dims: usize) -> Result<(), DatasetFileError> {
    fs::write(path, format_dataset(d, dims)).map_err(io_err(path))
}

/// Appends samples to a raw dataset file as they are produced, so an
/// interrupted run can resume.
pub struct CheckpointWriter {
    file: File,
    written: usize,
}

impl CheckpointWriter {
    /// Starts a fresh file.
    pub fn create(path: &Path, header: &DatasetHeader) -> Result<Self, DatasetFileError> {
        let mut file = File::create(path).map_err(io_err(path))?;
        file.write_all(header.format().as_bytes()).map_err(io_err(path))?;
        Ok(CheckpointWriter { file, written: 0 })
    }

    /// Reopens a checkpoint. The header must equal `header`; a trailing
    /// partial line is discarded. Returns the samples already on disk.
    pub fn resume(
        path: &Path,
        header: &DatasetHeader,
    ) -> Result<(Self, Vec<FitnessSample>), DatasetFileError> {
        let mut text = fs::read_to_string(path).map_err(io_err(path))?;
        if !text.ends_with('\n') {
            let keep = text.rfind('\n').map_or(0, |i| i + 1);
            text.truncate(keep);
        }
        let (found, d) = parse_dataset(&text)?;
        if &found != header {
            return Err(perr(1, "checkpoint header does not match this run"));
        }
        fs::write(path, &text).map_err(io_err(path))?;
        let file = OpenOptions::new().append(true).open(path).map_err(io_err(path))?;
        Ok((
            CheckpointWriter {
                file,
                written: d.samples.len(),
            },
            d.samples,
        ))
    }

    pub fn append(&mut self, samples: &[FitnessSample]) -> io::Result<()> {
        let mut chunk = String::new();
        for s in samples {
            chunk.push_str(&format_sample(s));
        }
        self.file.write_all(chunk.as_bytes())?;
        self.file.flush()?;
        self.written += samples.len();
        Ok(())
    }

    pub fn written(&self) -> usize {
        self.written
    }
}
