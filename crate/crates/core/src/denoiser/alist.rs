//! Reader and writer for the alist sparse parity-check format.
//!
//! ```text
//! n m
//! max_col_degree max_row_degree
//! column degrees (n values)
//! row degrees (m values)
//! n lines of 1-indexed check indices, zero padded
//! m lines of 1-indexed variable indices, zero padded
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::LdpcCode;
use crate::error::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next non-blank line as integers, with its 1-based line number.
    fn next_numbers(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let values = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| Error::Alist {
                        line: i + 1,
                        msg: format!("expected a non-negative integer, found {tok:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((i + 1, values));
        }
        Err(Error::Alist {
            line: self.last + 1,
            msg: format!("unexpected end of input while reading {what}"),
        })
    }

    fn next_exact(&mut self, count: usize, what: &str) -> Result<(usize, Vec<usize>)> {
        let (line, values) = self.next_numbers(what)?;
        if values.len() != count {
            return Err(Error::Alist {
                line,
                msg: format!("expected {count} values for {what}, found {}", values.len()),
            });
        }
        Ok((line, values))
    }
}

/// One adjacency line: `degree` indices in `1..=bound` followed by zero padding.
fn adjacency(
    lines: &mut Lines<'_>,
    degree: usize,
    max_degree: usize,
    bound: usize,
    what: &str,
) -> Result<(usize, Vec<usize>)> {
    let (line, values) = lines.next_numbers(what)?;
    let err = |msg: String| Error::Alist { line, msg };
    if values.len() < degree || values.len() > max_degree.max(degree) {
        return Err(err(format!(
            "{what} has {} entries, expected degree {degree} (max {max_degree})",
            values.len()
        )));
    }
    let (used, padding) = values.split_at(degree);
    if padding.iter().any(|&v| v != 0) {
        return Err(err(format!("{what} lists more than its degree {degree}")));
    }
    let mut out = Vec::with_capacity(degree);
    for &v in used {
        if v == 0 || v > bound {
            return Err(err(format!("index {v} in {what} outside 1..={bound}")));
        }
        out.push(v - 1);
    }
    Ok((line, out))
}

pub fn parse_alist(text: &str) -> Result<LdpcCode> {
    let mut lines = Lines::new(text);
    let (_, header) = lines.next_exact(2, "header")?;
    let (n, m) = (header[0], header[1]);
    if n == 0 {
        return Err(Error::Alist {
            line: 1,
            msg: "code length must be positive".into(),
        });
    }
    let (line, maxes) = lines.next_exact(2, "maximum degrees")?;
    let (max_col, max_row) = (maxes[0], maxes[1]);
    let (col_line, col_deg) = lines.next_exact(n, "column degrees")?;
    let (row_line, row_deg) = if m > 0 {
        lines.next_exact(m, "row degrees")?
    } else {
        (line, Vec::new())
    };
    if col_deg.iter().any(|&d| d > max_col) {
        return Err(Error::Alist {
            line: col_line,
            msg: format!("a column degree exceeds the maximum {max_col}"),
        });
    }
    if row_deg.iter().any(|&d| d > max_row) {
        return Err(Error::Alist {
            line: row_line,
            msg: format!("a row degree exceeds the maximum {max_row}"),
        });
    }

    let mut cols = Vec::with_capacity(n);
    for (j, &d) in col_deg.iter().enumerate() {
        if d == 0 && max_col == 0 {
            cols.push(Vec::new());
            continue;
        }
        let (line, mut entries) = adjacency(&mut lines, d, max_col, m, &format!("column {}", j + 1))?;
        entries.sort_unstable();
        if entries.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Alist {
                line,
                msg: format!("column {} repeats a check", j + 1),
            });
        }
        cols.push(entries);
    }
    let mut rows = Vec::with_capacity(m);
    let mut row_lines = Vec::with_capacity(m);
    for (i, &d) in row_deg.iter().enumerate() {
        let (line, entries) = adjacency(&mut lines, d, max_row, n, &format!("row {}", i + 1))?;
        rows.push(entries);
        row_lines.push(line);
    }

    // Both adjacency views must describe the same edge set.
    let mut from_cols = vec![Vec::new(); m];
    for (j, checks) in cols.iter().enumerate() {
        for &c in checks {
            from_cols[c].push(j);
        }
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row.sort_unstable();
        if *row != from_cols[i] {
            return Err(Error::Alist {
                line: row_lines[i],
                msg: format!("row {} disagrees with the column lists", i + 1),
            });
        }
    }
    LdpcCode::from_checks(n, rows)
}

pub fn read_alist(path: &Path) -> Result<LdpcCode> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    parse_alist(&text)
}

fn joined(values: impl Iterator<Item = usize>) -> String {
    values.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn padded(list: &[usize], width: usize) -> String {
    joined(list.iter().map(|&i| i + 1).chain(std::iter::repeat(0)).take(width))
}

pub fn to_alist(code: &LdpcCode) -> String {
    let cols = code.var_checks();
    let rows = code.checks();
    let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", code.n(), rows.len());
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", joined(cols.iter().map(Vec::len)));
    if !rows.is_empty() {
        let _ = writeln!(out, "{}", joined(rows.iter().map(Vec::len)));
    }
    if max_col > 0 {
        for list in cols {
            let _ = writeln!(out, "{}", padded(list, max_col));
        }
    }
    for list in rows {
        let _ = writeln!(out, "{}", padded(list, max_row));
    }
    out
}
