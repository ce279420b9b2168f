//! Matrix Market exchange format, dense in memory.
//!
//! Reading accepts `coordinate` and `array` formats with the `real` field
//! and `general` or `symmetric` storage. Writing always emits coordinate
//! real general with entries in column-major order and floats printed as the
//! shortest decimal that parses back to the same bits, so a write-read-write
//! cycle is byte identical. Negative zeros are dropped like positive zeros.

use std::collections::VecDeque;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::ModelError;
use crate::linalg::DMat;

/// Serializes a matrix in coordinate real general format.
pub fn write_matrix_market<W: Write>(mat: &DMat, mut w: W) -> io::Result<()> {
    let nnz = mat.iter().filter(|&&v| v != 0.0).count();
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", mat.nrows(), mat.ncols(), nnz)?;
    for j in 0..mat.ncols() {
        for i in 0..mat.nrows() {
            let v = mat[(i, j)];
            if v != 0.0 {
                writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}

pub fn write_matrix_market_file(mat: &DMat, path: &Path) -> Result<(), ModelError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market(mat, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Parses a Matrix Market stream into a dense matrix.
pub fn read_matrix_market<R: BufRead>(r: R) -> Result<DMat, ModelError> {
    let mut tk = Tokens::new(r);

    let (header_line, header) = tk
        .next_raw_line()?
        .ok_or_else(|| parse_err(1, "empty file, expected a MatrixMarket header"))?;
    let fields: Vec<String> =
        header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(
            header_line,
            "header must read '%%MatrixMarket matrix <format> <field> <symmetry>'",
        ));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(header_line, &format!("unsupported format '{}'", other))),
    };
    if fields[3] != "real" {
        return Err(parse_err(
            header_line,
            &format!("unsupported field '{}', only 'real' is handled", fields[3]),
        ));
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(parse_err(header_line, &format!("unsupported symmetry '{}'", other)))
        }
    };

    let mat = if coordinate {
        read_coordinate(&mut tk, symmetric)?
    } else {
        read_array(&mut tk, symmetric)?
    };
    if let Some((line, tok)) = tk.next_token()? {
        return Err(parse_err(line, &format!("unexpected trailing data '{}'", tok)));
    }
    Ok(mat)
}

pub fn read_matrix_market_file(path: &Path) -> Result<DMat, ModelError> {
    read_matrix_market(BufReader::new(File::open(path)?))
}

fn read_coordinate<R: BufRead>(tk: &mut Tokens<R>, symmetric: bool) -> Result<DMat, ModelError> {
    let rows = tk.expect_index("row count")?;
    let cols = tk.expect_index("column count")?;
    let nnz = tk.expect_index("entry count")?;
    if symmetric && rows != cols {
        return Err(parse_err(tk.line_no, "symmetric matrix must be square"));
    }
    let mut mat = DMat::zeros(rows, cols);
    for _ in 0..nnz {
        let i = tk.expect_index("row index")?;
        let j = tk.expect_index("column index")?;
        let v = tk.expect_value()?;
        if i == 0 || i > rows || j == 0 || j > cols {
            return Err(parse_err(
                tk.line_no,
                &format!("entry ({}, {}) outside a {}x{} matrix", i, j, rows, cols),
            ));
        }
        mat[(i - 1, j - 1)] = v;
        if symmetric && i != j {
            mat[(j - 1, i - 1)] = v;
        }
    }
    Ok(mat)
}

fn read_array<R: BufRead>(tk: &mut Tokens<R>, symmetric: bool) -> Result<DMat, ModelError> {
    let rows = tk.expect_index("row count")?;
    let cols = tk.expect_index("column count")?;
    if symmetric && rows != cols {
        return Err(parse_err(tk.line_no, "symmetric matrix must be square"));
    }
    let mut mat = DMat::zeros(rows, cols);
    for j in 0..cols {
        let start = if symmetric { j } else { 0 };
        for i in start..rows {
            let v = tk.expect_value()?;
            mat[(i, j)] = v;
            if symmetric && i != j {
                mat[(j, i)] = v;
            }
        }
    }
    Ok(mat)
}

fn parse_err(line: usize, msg: &str) -> ModelError {
    ModelError::Parse { line, msg: msg.to_string() }
}

/// Whitespace tokenizer that skips comment and blank lines while tracking
/// line numbers for error reports.
struct Tokens<R: BufRead> {
    lines: io::Lines<R>,
    line_no: usize,
    current: VecDeque<String>,
}

impl<R: BufRead> Tokens<R> {
    fn new(r: R) -> Self {
        Tokens { lines: r.lines(), line_no: 0, current: VecDeque::new() }
    }

    fn next_raw_line(&mut self) -> Result<Option<(usize, String)>, ModelError> {
        match self.lines.next() {
            None => Ok(None),
            Some(line) => {
                self.line_no += 1;
                Ok(Some((self.line_no, line?)))
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<(usize, String)>, ModelError> {
        loop {
            if let Some(tok) = self.current.pop_front() {
                return Ok(Some((self.line_no, tok)));
            }
            match self.next_raw_line()? {
                None => return Ok(None),
                Some((_, line)) => {
                    let trimmed = line.trim();
                    if trimmed.is_empty() || trimmed.starts_with('%') {
                        continue;
                    }
                    self.current.extend(trimmed.split_whitespace().map(String::from));
                }
            }
        }
    }

    fn expect_index(&mut self, what: &str) -> Result<usize, ModelError> {
        match self.next_token()? {
            None => Err(parse_err(self.line_no + 1, &format!("missing {}", what))),
            Some((line, tok)) => tok
                .parse::<usize>()
                .map_err(|_| parse_err(line, &format!("bad {} '{}'", what, tok))),
        }
    }

    fn expect_value(&mut self) -> Result<f64, ModelError> {
        match self.next_token()? {
            None => Err(parse_err(self.line_no + 1, "missing matrix value")),
            Some((line, tok)) => tok
                .parse::<f64>()
                .map_err(|_| parse_err(line, &format!("bad value '{}'", tok))),
        }
    }
}
