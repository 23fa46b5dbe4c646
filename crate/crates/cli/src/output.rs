//! Deterministic table writers (CSV or JSON, same columns either way) and
//! the per-run manifest. Floats are written in shortest round-trip form, so
//! equal bit patterns give equal bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::OutputFormat;
use crate::CliError;

/// One table cell.
#[derive(Debug, Clone)]
pub enum Cell {
    U64(u64),
    I64(i64),
    F64(f64),
    Str(String),
    Bool(bool),
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::U64(v) => v.to_string(),
            Cell::I64(v) => v.to_string(),
            Cell::F64(v) => format!("{v}"),
            Cell::Str(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::U64(v) => Value::from(*v),
            Cell::I64(v) => Value::from(*v),
            Cell::F64(v) => Value::from(*v),
            Cell::Str(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Null => Value::Null,
        }
    }
}

/// Streams one table to `<dir>/<stem>.<ext>` without holding it in memory.
pub struct TableWriter {
    w: BufWriter<File>,
    format: OutputFormat,
    columns: &'static [&'static str],
    rows: u64,
    filename: String,
}

impl TableWriter {
    pub fn create(
        dir: &Path,
        stem: &str,
        format: OutputFormat,
        columns: &'static [&'static str],
    ) -> Result<Self, CliError> {
        let filename = format!("{stem}.{}", format.extension());
        let mut w = BufWriter::new(File::create(dir.join(&filename))?);
        match format {
            OutputFormat::Csv => writeln!(w, "{}", columns.join(","))?,
            OutputFormat::Json => write!(w, "[")?,
        }
        Ok(TableWriter {
            w,
            format,
            columns,
            rows: 0,
            filename,
        })
    }

    pub fn row(&mut self, cells: &[Cell]) -> Result<(), CliError> {
        debug_assert_eq!(cells.len(), self.columns.len());
        match self.format {
            OutputFormat::Csv => {
                let line: Vec<String> = cells.iter().map(Cell::csv).collect();
                writeln!(self.w, "{}", line.join(","))?;
            }
            OutputFormat::Json => {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(cells) {
                    obj.insert((*name).to_string(), cell.json());
                }
                if self.rows > 0 {
                    write!(self.w, ",")?;
                }
                write!(self.w, "\n{}", Value::Object(obj))?;
            }
        }
        self.rows += 1;
        Ok(())
    }

    /// Flush and return (filename, row count).
    pub fn finish(mut self) -> Result<(String, u64), CliError> {
        if self.format == OutputFormat::Json {
            writeln!(self.w, "\n]")?;
        }
        self.w.flush()?;
        Ok((self.filename, self.rows))
    }
}

/// Write a small JSON document (fit results) with a stable key order.
pub fn write_json(dir: &Path, filename: &str, value: &Value) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(dir.join(filename))?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Usage(e.into()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// The manifest carries everything needed to reproduce a run: the resolved
/// config (which alone determines the data bytes), the code version, and
/// execution details (directory, workers, wall time) that do not affect the
/// data.
pub struct Manifest {
    command: &'static str,
    config: Map<String, Value>,
    workers: Value,
    out_dir: PathBuf,
    outputs: Vec<String>,
    started: std::time::Instant,
}

impl Manifest {
    pub fn start(
        command: &'static str,
        config: Map<String, Value>,
        parallelism: fractal_walk::Parallelism,
        out_dir: &Path,
    ) -> Result<Self, CliError> {
        fs::create_dir_all(out_dir)?;
        let workers = match parallelism {
            fractal_walk::Parallelism::Auto => Value::from("auto"),
            fractal_walk::Parallelism::Sequential => Value::from(0u64),
            fractal_walk::Parallelism::Workers(n) => Value::from(n as u64),
        };
        Ok(Manifest {
            command,
            config,
            workers,
            out_dir: out_dir.to_path_buf(),
            outputs: Vec::new(),
            started: std::time::Instant::now(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn add_output(&mut self, filename: String) {
        self.outputs.push(filename);
    }

    pub fn write(self) -> Result<(), CliError> {
        let value = serde_json::json!({
            "command": self.command,
            "code_version": env!("CARGO_PKG_VERSION"),
            "config": Value::Object(self.config),
            "execution": {
                "out_dir": self.out_dir.display().to_string(),
                "workers": self.workers,
                "wall_time_seconds": self.started.elapsed().as_secs_f64(),
            },
            "outputs": self.outputs,
        });
        write_json(&self.out_dir, "manifest.json", &value)
    }
}
