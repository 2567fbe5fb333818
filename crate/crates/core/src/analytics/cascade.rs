//! Cascade error-correction efficiency `f_casc(e)`.
//!
//! Cascade leaks `f_casc · h(e)` bits per corrected bit. The efficiency is
//! tabulated at a few QBER anchors and linearly interpolated between them;
//! below the first anchor the first value holds, above the last anchor the
//! lookup clamps and flags the result.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

/// Anchors for Cascade efficiency as reported for the original protocol.
pub const DEFAULT_ANCHORS: [(f64, f64); 4] =
    [(0.01, 1.16), (0.05, 1.16), (0.1, 1.22), (0.15, 1.35)];

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTable {
    anchors: Vec<(f64, f64)>,
}

/// One table lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiency {
    pub value: f64,
    /// QBER was above the last anchor.
    pub clamped: bool,
}

impl Default for CascadeTable {
    fn default() -> Self {
        Self {
            anchors: DEFAULT_ANCHORS.to_vec(),
        }
    }
}

impl CascadeTable {
    pub fn new(anchors: Vec<(f64, f64)>) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::Config("cascade table has no rows".into()));
        }
        for w in anchors.windows(2) {
            if w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::Config(format!(
                    "cascade table QBER column must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        for &(e, f) in &anchors {
            if !(0.0..=1.0).contains(&e) || !(f.is_finite() && f >= 1.0) {
                return Err(Error::Config(format!(
                    "cascade table row ({e}, {f}) out of range"
                )));
            }
        }
        Ok(Self { anchors })
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    /// Reads a two-column `qber efficiency` table. Columns may be separated by
    /// whitespace or a comma; `#` starts a comment.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        parse_table(&text).map_err(|(line, msg)| Error::Parse {
            path: path.display().to_string(),
            line,
            msg,
        })
    }

    pub fn lookup(&self, e: f64) -> Efficiency {
        let (first, last) = (self.anchors[0], self.anchors[self.anchors.len() - 1]);
        if e <= first.0 {
            return Efficiency {
                value: first.1,
                clamped: false,
            };
        }
        if e > last.0 {
            return Efficiency {
                value: last.1,
                clamped: true,
            };
        }
        let i = self.anchors.partition_point(|&(x, _)| x < e);
        let (x0, y0) = self.anchors[i - 1];
        let (x1, y1) = self.anchors[i];
        let value = y0 + (y1 - y0) * (e - x0) / (x1 - x0);
        Efficiency {
            value,
            clamped: false,
        }
    }

    pub fn efficiency(&self, e: f64) -> f64 {
        self.lookup(e).value
    }
}

impl FromStr for CascadeTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_table(s).map_err(|(line, msg)| Error::Parse {
            path: "<string>".into(),
            line,
            msg,
        })
    }
}

fn parse_table(text: &str) -> std::result::Result<CascadeTable, (usize, String)> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|c| !c.is_empty())
            .collect();
        if cols.len() != 2 {
            return Err((i + 1, format!("expected 2 columns, found {}", cols.len())));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| (i + 1, format!("{s:?}: {e}")));
        rows.push((parse(cols[0])?, parse(cols[1])?));
    }
    CascadeTable::new(rows).map_err(|e| (0, e.to_string()))
}

/// `f_casc(e)` from the default anchor table.
pub fn f_cascade(e: f64) -> f64 {
    CascadeTable::default().efficiency(e)
}
