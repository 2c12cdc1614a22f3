//! Matrix Market coordinate files (`real`, `general` or `symmetric`).

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Writes `a`; exactly symmetric square matrices use symmetric storage
/// (lower triangle). Values are printed in shortest round-trip form.
pub fn write_matrix_market(a: &CsrMatrix, mut out: impl Write) -> Result<()> {
    let symmetric = a.nrows() == a.ncols() && a.asymmetry() == 0.0;
    let entries: Vec<_> = a.triplets().filter(|&(i, j, _)| !symmetric || i >= j).collect();
    writeln!(out, "%%MatrixMarket matrix coordinate real {}", if symmetric { "symmetric" } else { "general" })?;
    writeln!(out, "{} {} {}", a.nrows(), a.ncols(), entries.len())?;
    for (i, j, v) in entries {
        writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn read_matrix_market(input: impl BufRead) -> Result<CsrMatrix> {
    let mut lines = input.lines().enumerate();
    let bad = |line: usize, msg: &str| Error::MatrixMarket { line: line + 1, msg: msg.to_string() };
    let (n0, header) = lines.next().ok_or_else(|| bad(0, "empty file"))?;
    let header = header?.to_ascii_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "coordinate" || fields[3] != "real" {
        return Err(bad(n0, "expected `%%MatrixMarket matrix coordinate real <symmetry>`"));
    }
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        _ => return Err(bad(n0, "unsupported symmetry")),
    };
    let mut builder: Option<TripletBuilder> = None;
    let (mut expected, mut seen) = (0, 0);
    for (n, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match builder.as_mut() {
            None => {
                let dims: Vec<usize> = parts
                    .iter()
                    .map(|p| p.parse().map_err(|_| bad(n, "bad size line")))
                    .collect::<Result<_>>()?;
                if dims.len() != 3 {
                    return Err(bad(n, "size line needs rows, columns and entries"));
                }
                expected = dims[2];
                builder = Some(TripletBuilder::new(dims[0], dims[1]));
            }
            Some(b) => {
                if parts.len() != 3 {
                    return Err(bad(n, "entry needs row, column and value"));
                }
                let i: usize = parts[0].parse().map_err(|_| bad(n, "bad row index"))?;
                let j: usize = parts[1].parse().map_err(|_| bad(n, "bad column index"))?;
                let v: f64 = parts[2].parse().map_err(|_| bad(n, "bad value"))?;
                if i == 0 || j == 0 || i > b.nrows() || j > b.ncols() {
                    return Err(bad(n, "index out of range"));
                }
                b.push(i - 1, j - 1, v);
                if symmetric && i != j {
                    b.push(j - 1, i - 1, v);
                }
                seen += 1;
            }
        }
    }
    let b = builder.ok_or_else(|| bad(0, "missing size line"))?;
    if seen != expected {
        return Err(bad(0, &format!("expected {expected} entries, found {seen}")));
    }
    Ok(b.build())
}
