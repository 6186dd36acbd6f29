//! Text I/O: dataset CSV files, float formatting, and a small writer for
//! deterministic JSON output.
//!
//! All floating-point output goes through [`fmt_f64`] so that identical runs
//! produce byte-identical files and every value round-trips exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Formats with 17 significant digits, enough for exact `f64` round-trips.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes one dataset as CSV with a `V1..Vd` header row.
pub fn dataset_to_csv(data: &DMatrix<f64>) -> String {
    let (n, d) = data.shape();
    let mut out = String::new();
    for j in 0..d {
        if j > 0 {
            out.push(',');
        }
        let _ = write!(out, "V{}", j + 1);
    }
    out.push('\n');
    for i in 0..n {
        for j in 0..d {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(data[(i, j)]));
        }
        out.push('\n');
    }
    out
}

pub fn write_dataset_csv(path: &Path, data: &DMatrix<f64>) -> Result<()> {
    fs::write(path, dataset_to_csv(data)).map_err(|e| Error::io(path, e))
}

/// Reads a numeric CSV observation matrix.
///
/// A header row is auto-detected: if any cell of the first line fails to
/// parse as a finite number, the line is treated as a header. Missing or
/// non-finite cells abort with their 1-based location.
pub fn read_dataset_csv(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset_csv(&text, &path.display().to_string())
}

pub fn parse_dataset_csv(text: &str, origin: &str) -> Result<DMatrix<f64>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let parsed: Vec<Option<f64>> = cells
            .iter()
            .map(|c| c.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        if idx == 0 && rows.is_empty() && parsed.iter().any(Option::is_none) {
            // header row
            width = Some(cells.len());
            continue;
        }
        let mut row = Vec::with_capacity(cells.len());
        for (col, value) in parsed.into_iter().enumerate() {
            match value {
                Some(v) => row.push(v),
                None => {
                    return Err(parse_err(
                        idx + 1,
                        format!(
                            "cell ({},{}) is not a finite number: {:?}",
                            idx + 1,
                            col + 1,
                            cells[col]
                        ),
                    ))
                }
            }
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(parse_err(
                    idx + 1,
                    format!("expected {w} columns, found {}", row.len()),
                ))
            }
            _ => {}
        }
        rows.push(row);
    }
    let d = width.ok_or(Error::EmptyInput("csv file"))?;
    if rows.is_empty() {
        return Err(Error::EmptyInput("csv file"));
    }
    let n = rows.len();
    let mut m = DMatrix::zeros(n, d);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// Minimal JSON writer with caller-controlled key order.
///
/// `serde_json` is used for reading; writing goes through this so output
/// bytes depend only on the data, never on hash iteration order.
pub struct JsonWriter {
    buf: String,
    needs_comma: Vec<bool>,
}

impl JsonWriter {
    pub fn new() -> Self {
        JsonWriter {
            buf: String::new(),
            needs_comma: vec![false],
        }
    }

    pub fn finish(self) -> String {
        self.buf
    }

    fn pre_value(&mut self) {
        if let Some(last) = self.needs_comma.last_mut() {
            if *last {
                self.buf.push(',');
            }
            *last = true;
        }
    }

    pub fn begin_object(&mut self) -> &mut Self {
        self.pre_value();
        self.buf.push('{');
        self.needs_comma.push(false);
        self
    }

    pub fn end_object(&mut self) -> &mut Self {
        self.needs_comma.pop();
        self.buf.push('}');
        self
    }

    pub fn begin_array(&mut self) -> &mut Self {
        self.pre_value();
        self.buf.push('[');
        self.needs_comma.push(false);
        self
    }

    pub fn end_array(&mut self) -> &mut Self {
        self.needs_comma.pop();
        self.buf.push(']');
        self
    }

    pub fn key(&mut self, name: &str) -> &mut Self {
        self.pre_value();
        self.push_string(name);
        self.buf.push(':');
        // the value that follows must not emit a comma
        if let Some(last) = self.needs_comma.last_mut() {
            *last = false;
        }
        self
    }

    pub fn string(&mut self, value: &str) -> &mut Self {
        self.pre_value();
        self.push_string(value);
        self
    }

    pub fn uint(&mut self, value: u64) -> &mut Self {
        self.pre_value();
        let _ = write!(self.buf, "{value}");
        self
    }

    pub fn float(&mut self, value: f64) -> &mut Self {
        self.pre_value();
        // JSON has no infinities; quote the formatted value for validity.
        if value.is_finite() {
            self.buf.push_str(&fmt_f64(value));
        } else {
            self.push_string(&format!("{value}"));
        }
        self
    }

    pub fn bool(&mut self, value: bool) -> &mut Self {
        self.pre_value();
        self.buf.push_str(if value { "true" } else { "false" });
        self
    }

    /// `[j+1, k+1]` pair array, converting to 1-based external indexing.
    pub fn pair_one_based(&mut self, pair: (usize, usize)) -> &mut Self {
        self.begin_array();
        self.uint(pair.0 as u64 + 1);
        self.uint(pair.1 as u64 + 1);
        self.end_array()
    }

    fn push_string(&mut self, s: &str) {
        self.buf.push('"');
        for c in s.chars() {
            match c {
                '"' => self.buf.push_str("\\\""),
                '\\' => self.buf.push_str("\\\\"),
                '\n' => self.buf.push_str("\\n"),
                '\r' => self.buf.push_str("\\r"),
                '\t' => self.buf.push_str("\\t"),
                c if (c as u32) < 0x20 => {
                    let _ = write!(self.buf, "\\u{:04x}", c as u32);
                }
                c => self.buf.push(c),
            }
        }
        self.buf.push('"');
    }
}

impl Default for JsonWriter {
    fn default() -> Self {
        Self::new()
    }
}
