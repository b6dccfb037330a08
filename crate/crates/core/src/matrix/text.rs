//! Plain-text matrix format: one row per line, comma-separated decimal
//! literals, no header.

use super::DenseMatrix;
use crate::error::{GinvError, Result};

/// Parses the text format. Blank trailing lines are ignored; blank lines
/// between rows are not.
pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let lines: Vec<&str> = text
        .trim_end_matches(['\n', '\r', ' ', '\t'])
        .lines()
        .collect();
    if lines.is_empty() || (lines.len() == 1 && lines[0].trim().is_empty()) {
        return Err(GinvError::Parse {
            line: 1,
            column: 1,
            message: "empty matrix".into(),
        });
    }
    let mut entries = Vec::new();
    let mut cols = None;
    for (li, raw) in lines.iter().enumerate() {
        let line = raw.trim_end_matches('\r');
        let mut count = 0;
        let mut column = 1;
        for field in line.split(',') {
            let lead = field.len() - field.trim_start().len();
            let literal = field.trim();
            let value: f64 = literal.parse().map_err(|_| GinvError::Parse {
                line: li + 1,
                column: column + lead,
                message: if literal.is_empty() {
                    "missing value".to_string()
                } else {
                    format!("invalid number {literal:?}")
                },
            })?;
            if !value.is_finite() {
                return Err(GinvError::Parse {
                    line: li + 1,
                    column: column + lead,
                    message: format!("non-finite value {literal:?}"),
                });
            }
            entries.push(value);
            count += 1;
            column += field.len() + 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(GinvError::Parse {
                    line: li + 1,
                    column: 1,
                    message: format!("row has {count} values, expected {c}"),
                })
            }
            _ => {}
        }
    }
    let cols = cols.unwrap_or(0);
    DenseMatrix::new(lines.len(), cols, entries)
}

/// Writes `m` with `digits` significant digits per entry. With 17 digits the
/// output parses back to bitwise-identical values.
pub fn format_matrix(m: &DenseMatrix, digits: usize) -> String {
    let prec = digits.max(1) - 1;
    let mut out = String::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{:.*e}", prec, m.get(i, j)));
        }
        out.push('\n');
    }
    out
}
