//! Output encodings: CSV with 17 significant digits and LF endings, JSON with
//! extended reals as strings.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::{Serialize, Serializer};

/// A float that may be infinite or NaN. Finite values serialize as JSON
/// numbers; the others as `"inf"`, `"-inf"`, `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(special(self.0))
        }
    }
}

fn special(v: f64) -> &'static str {
    if v.is_nan() {
        "nan"
    } else if v > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

/// One CSV field: `{:.16e}` for finite values.
pub fn csv_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        special(v).to_string()
    }
}

/// Header plus rows of numbers, each line ending in `\n`.
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    body: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), body: String::new() }
    }

    pub fn push(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.header.len());
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                self.body.push(',');
            }
            self.body.push_str(&csv_number(*v));
        }
        self.body.push('\n');
    }

    /// Row whose first column is an integer id.
    pub fn push_with_id(&mut self, id: u64, rest: &[f64]) {
        let _ = write!(self.body, "{id}");
        for v in rest {
            self.body.push(',');
            self.body.push_str(&csv_number(*v));
        }
        self.body.push('\n');
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        out.push_str(&self.body);
        out
    }
}

/// Writes `contents` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> io::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, contents)
        }
        None => io::stdout().lock().write_all(contents.as_bytes()),
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
