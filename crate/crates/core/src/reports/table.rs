use std::fmt::Write as _;

/// A single output value. Points where the security condition fails are
/// written as the sentinel `insecure` rather than as a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value(f64),
    Insecure,
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Cell::Value(v) => Some(v),
            Cell::Insecure => None,
        }
    }

    /// `Value(v)` when `secure`, else the sentinel.
    pub fn secure_or_sentinel(v: f64, secure: bool) -> Self {
        if secure && v.is_finite() {
            Cell::Value(v)
        } else {
            Cell::Insecure
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Value(v)
    }
}

pub const INSECURE: &str = "insecure";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Layout {
    /// Comma separated with a header row.
    #[default]
    Csv,
    /// Whitespace separated, header as a `#` comment, sentinel as `NaN`.
    Gnuplot,
}

/// Rows of named real-valued columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let i = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn render(&self, layout: Layout) -> String {
        let (sep, prefix, sentinel) = match layout {
            Layout::Csv => (",", "", INSECURE),
            Layout::Gnuplot => (" ", "# ", "NaN"),
        };
        let mut out = String::new();
        out.push_str(prefix);
        out.push_str(&self.header.join(sep));
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                match cell {
                    Cell::Value(v) => write!(out, "{v}").unwrap(),
                    Cell::Insecure => out.push_str(sentinel),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        self.render(Layout::Csv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_both_layouts() {
        let mut t = Table::new(vec!["x", "y"]);
        t.push(vec![0.5.into(), Cell::Insecure]);
        t.push(vec![1e-7.into(), 2.0.into()]);
        assert_eq!(t.to_csv(), "x,y\n0.5,insecure\n0.0000001,2\n");
        assert_eq!(t.render(Layout::Gnuplot), "# x y\n0.5 NaN\n0.0000001 2\n");
        assert_eq!(t.column("y").unwrap()[0], Cell::Insecure);
    }
}
