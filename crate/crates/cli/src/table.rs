// SPDX-License-Identifier: Apache-2.0

//! CSV tables with an optional block of `# key=value` comment lines.
//!
//! Output uses `,` separators, `.` decimals and LF line endings. Angles are
//! printed with 6 decimals, other reals with 12, and negative zero is
//! printed as zero.

use num_rational::Rational64;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    /// Comment lines without the leading `# `.
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            comments: Vec::new(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, key: &str, value: impl std::fmt::Display) {
        self.comments.push(format!("{key}={value}"));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Index of a header column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row).expect("writing to memory");
        }
        let bytes = w.into_inner().expect("writing to memory");
        out.push_str(std::str::from_utf8(&bytes).expect("fields are UTF-8"));
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, csv::Error> {
        let comments = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| l.trim_start_matches('#').trim_start().to_string())
            .collect();
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            comments,
            header,
            rows,
        })
    }
}

fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

pub fn angle(x: f64) -> String {
    fixed(x, 6)
}

pub fn real(x: f64) -> String {
    fixed(x, 12)
}

/// `p/q`, also for integers.
pub fn rational(r: Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
