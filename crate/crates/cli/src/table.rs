//! CSV result tables with a `#`-prefixed metadata preamble.

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed table: {0}")]
    Malformed(String),
}

/// Provenance stored alongside the rows.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Metadata {
    pub version: String,
    pub seed: u64,
    /// Fully resolved TOML configuration.
    pub config: String,
    /// Additional `key = value` lines.
    pub notes: Vec<(String, String)>,
}

/// A rectangular numeric table.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Metadata,
}

const CONFIG_BEGIN: &str = "# --- config ---";
const CONFIG_END: &str = "# --- end config ---";

impl ResultTable {
    pub fn new(header: Vec<String>, metadata: Metadata) -> Self {
        Self {
            header,
            rows: Vec::new(),
            metadata,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width differs from header"
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv_string(&self) -> Result<String, TableError> {
        let mut out = String::new();
        out.push_str(&format!("# shotnoise {}\n", self.metadata.version));
        out.push_str(&format!("# seed = {}\n", self.metadata.seed));
        for (k, v) in &self.metadata.notes {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str(CONFIG_BEGIN);
        out.push('\n');
        for line in self.metadata.config.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(CONFIG_END);
        out.push('\n');
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
        }
        let body = writer
            .into_inner()
            .map_err(|e| TableError::Io(e.into_error()))?;
        out.push_str(&String::from_utf8(body).expect("ascii output"));
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<(), TableError> {
        let mut file = fs::File::create(path)?;
        file.write_all(self.to_csv_string()?.as_bytes())?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut metadata = Metadata::default();
        let mut in_config = false;
        let mut config = Vec::new();
        let mut body_start = 0;
        for (k, line) in text.lines().enumerate() {
            if !line.starts_with('#') {
                body_start = k;
                break;
            }
            if line == CONFIG_BEGIN {
                in_config = true;
            } else if line == CONFIG_END {
                in_config = false;
            } else if in_config {
                config.push(line.strip_prefix("# ").unwrap_or(&line[1..]));
            } else if let Some(v) = line.strip_prefix("# shotnoise ") {
                metadata.version = v.to_string();
            } else if let Some(v) = line.strip_prefix("# seed = ") {
                metadata.seed = v
                    .parse()
                    .map_err(|_| TableError::Malformed(format!("bad seed line: {line}")))?;
            } else if let Some((key, value)) = line[1..].trim().split_once(" = ") {
                metadata.notes.push((key.to_string(), value.to_string()));
            }
            body_start = k + 1;
        }
        metadata.config = config.iter().map(|l| format!("{l}\n")).collect();
        let body: String = text
            .lines()
            .skip(body_start)
            .map(|l| format!("{l}\n"))
            .collect();
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| TableError::Malformed(format!("not a number: {v}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != header.len() {
                return Err(TableError::Malformed("ragged row".into()));
            }
            rows.push(row);
        }
        Ok(Self {
            header,
            rows,
            metadata,
        })
    }

    pub fn read(path: &Path) -> Result<Self, TableError> {
        Self::parse(&fs::read_to_string(path)?)
    }
}
