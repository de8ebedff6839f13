//! Matrix text files: a `rows cols` header, then one whitespace-separated row per line.

use std::path::Path;

use opnorm_core::kv::fmt_f64;
use opnorm_core::Matrix;

use crate::error::CliError;

pub fn to_text(m: &Matrix) -> String {
    let mut out = format!("{} {}\n", m.n_rows(), m.n_cols());
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn from_text(text: &str) -> Result<Matrix, CliError> {
    let bad = |line: usize, msg: String| CliError::Runtime(format!("matrix file line {line}: {msg}"));
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| bad(hline, "header must be `rows cols`".into()))?;
    let [rows, cols] = dims[..] else {
        return Err(bad(hline, "header must be `rows cols`".into()));
    };
    let mut data = Vec::with_capacity(rows * cols);
    for (line, text) in lines {
        let before = data.len();
        for tok in text.split_whitespace() {
            data.push(tok.parse::<f64>().map_err(|_| bad(line, format!("bad entry `{tok}`")))?);
        }
        if data.len() - before != cols {
            return Err(bad(line, format!("expected {cols} entries")));
        }
    }
    if data.len() != rows * cols {
        return Err(bad(hline, format!("expected {rows} rows, found {}", data.len() / cols.max(1))));
    }
    Matrix::new(rows, cols, data).map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn read(path: &Path) -> Result<Matrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    from_text(&text)
}
