//! Parser and writer for the alist sparse-matrix exchange format.
//!
//! Layout (all entries 1-indexed, whitespace separated):
//!
//! ```text
//! n_qubits n_checks
//! max_qubit_degree max_check_degree
//! <n_qubits qubit degrees>
//! <n_checks check degrees>
//! <n_qubits lines: checks containing each qubit>
//! <n_checks lines: qubits contained in each check>
//! ```
//!
//! Zero entries are accepted as padding, as produced by writers that pad
//! irregular codes to the maximum degree.

use crate::code::ParityCheckMatrix;

/// Parse failure, carrying the 1-indexed line it was detected on.
#[derive(Debug, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        msg: msg.into(),
    })
}

struct Lines<'a> {
    inner: std::str::Lines<'a>,
    current: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines(),
            current: 0,
        }
    }

    /// Next non-blank line with its 1-indexed number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        loop {
            let line = self.inner.next()?;
            self.current += 1;
            if !line.trim().is_empty() {
                return Some((self.current, line));
            }
        }
    }
}

fn parse_counts(line: &str, lineno: usize, expected: usize) -> Result<Vec<usize>, ParseError> {
    let values: Result<Vec<usize>, _> = line.split_whitespace().map(|t| t.parse()).collect();
    match values {
        Ok(v) if v.len() == expected => Ok(v),
        Ok(v) => err(
            lineno,
            format!("expected {expected} entries, found {}", v.len()),
        ),
        Err(_) => err(lineno, "expected unsigned integers"),
    }
}

/// Parses an alist document into a parity-check matrix. Row supports come
/// from the per-check adjacency lists, converted to 0-indexing; the
/// per-qubit lists are cross-checked against them.
pub fn parse_alist(text: &str) -> Result<ParityCheckMatrix, ParseError> {
    let mut lines = Lines::new(text);

    let (lineno, header) = match lines.next() {
        Some(l) => l,
        None => return err(1, "empty file"),
    };
    let header = parse_counts(header, lineno, 2)?;
    let (n_qubits, n_checks) = (header[0], header[1]);
    if n_qubits == 0 || n_checks == 0 {
        return err(lineno, "matrix dimensions must be positive");
    }

    let (lineno, maxdeg) = match lines.next() {
        Some(l) => l,
        None => return err(lineno + 1, "missing maximum-degree line"),
    };
    let maxdeg = parse_counts(maxdeg, lineno, 2)?;
    let (max_qdeg, max_cdeg) = (maxdeg[0], maxdeg[1]);

    let (lineno, qdeg_line) = match lines.next() {
        Some(l) => l,
        None => return err(lineno + 1, "missing qubit-degree list"),
    };
    let qubit_degrees = parse_counts(qdeg_line, lineno, n_qubits)?;
    if let Some(d) = qubit_degrees.iter().find(|&&d| d > max_qdeg) {
        return err(lineno, format!("qubit degree {d} exceeds maximum {max_qdeg}"));
    }

    let (lineno, cdeg_line) = match lines.next() {
        Some(l) => l,
        None => return err(lineno + 1, "missing check-degree list"),
    };
    let check_degrees = parse_counts(cdeg_line, lineno, n_checks)?;
    if let Some(d) = check_degrees.iter().find(|&&d| d > max_cdeg) {
        return err(lineno, format!("check degree {d} exceeds maximum {max_cdeg}"));
    }

    // Per-qubit adjacency: collected to cross-check the per-check lists.
    let mut qubit_adjacency: Vec<Vec<usize>> = Vec::with_capacity(n_qubits);
    let mut last_line = lineno;
    for q in 0..n_qubits {
        let (lineno, line) = match lines.next() {
            Some(l) => l,
            None => return err(last_line + 1, format!("missing adjacency for qubit {q}")),
        };
        last_line = lineno;
        let mut entries = Vec::new();
        for tok in line.split_whitespace() {
            let v: usize = match tok.parse() {
                Ok(v) => v,
                Err(_) => return err(lineno, "expected unsigned integers"),
            };
            if v == 0 {
                continue; // padding
            }
            if v > n_checks {
                return err(lineno, format!("check index {v} out of range 1..={n_checks}"));
            }
            entries.push(v - 1);
        }
        if entries.len() != qubit_degrees[q] {
            return err(
                lineno,
                format!(
                    "qubit {q} lists {} checks, degree list says {}",
                    entries.len(),
                    qubit_degrees[q]
                ),
            );
        }
        entries.sort_unstable();
        qubit_adjacency.push(entries);
    }

    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(n_checks);
    for c in 0..n_checks {
        let (lineno, line) = match lines.next() {
            Some(l) => l,
            None => return err(last_line + 1, format!("missing adjacency for check {c}")),
        };
        last_line = lineno;
        let mut entries = Vec::new();
        for tok in line.split_whitespace() {
            let v: usize = match tok.parse() {
                Ok(v) => v,
                Err(_) => return err(lineno, "expected unsigned integers"),
            };
            if v == 0 {
                continue; // padding
            }
            if v > n_qubits {
                return err(lineno, format!("qubit index {v} out of range 1..={n_qubits}"));
            }
            entries.push(v - 1);
        }
        if entries.len() != check_degrees[c] {
            return err(
                lineno,
                format!(
                    "check {c} lists {} qubits, degree list says {}",
                    entries.len(),
                    check_degrees[c]
                ),
            );
        }
        entries.sort_unstable();
        rows.push(entries);
    }

    // Cross-check the two adjacency views.
    let mut derived = vec![Vec::new(); n_qubits];
    for (c, row) in rows.iter().enumerate() {
        for &q in row {
            derived[q].push(c);
        }
    }
    for q in 0..n_qubits {
        if derived[q] != qubit_adjacency[q] {
            return err(
                last_line,
                format!("qubit {q}: per-qubit and per-check adjacency disagree"),
            );
        }
    }

    ParityCheckMatrix::new(n_qubits, rows).map_err(|e| ParseError {
        line: last_line,
        msg: e.to_string(),
    })
}

/// Writes a matrix in alist format (unpadded adjacency lines).
pub fn write_alist(h: &ParityCheckMatrix) -> String {
    let cols = h.column_supports();
    let max_qdeg = cols.iter().map(|c| c.len()).max().unwrap_or(0);
    let max_cdeg = h.rows().map(|r| r.len()).max().unwrap_or(0);
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", h.n_qubits(), h.n_checks()));
    out.push_str(&format!("{max_qdeg} {max_cdeg}\n"));
    let join = |v: &[usize], offset: usize| {
        if v.is_empty() && offset > 0 {
            // Empty adjacency lists are padded with a zero entry.
            return "0".to_string();
        }
        v.iter()
            .map(|x| (x + offset).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let qdegs: Vec<usize> = cols.iter().map(|c| c.len()).collect();
    let cdegs: Vec<usize> = h.rows().map(|r| r.len()).collect();
    out.push_str(&format!("{}\n", join(&qdegs, 0)));
    out.push_str(&format!("{}\n", join(&cdegs, 0)));
    for col in &cols {
        out.push_str(&format!("{}\n", join(col, 1)));
    }
    for row in h.rows() {
        out.push_str(&format!("{}\n", join(row, 1)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 3\n";

    #[test]
    fn parses_small_matrix() {
        let h = parse_alist(SMALL).unwrap();
        assert_eq!(h.n_qubits(), 3);
        assert_eq!(h.n_checks(), 2);
        assert_eq!(h.row(0), &[0, 1]);
        assert_eq!(h.row(1), &[1, 2]);
    }

    #[test]
    fn rejects_out_of_range_index() {
        // Check 1 references qubit 4 in a 3-qubit matrix.
        let text = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 4\n";
        let e = parse_alist(text).unwrap_err();
        assert_eq!(e.line, 9);
        assert!(e.msg.contains("out of range"));
    }

    #[test]
    fn rejects_degree_mismatch() {
        // Check 0 lists one qubit but the degree list says two.
        let text = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1\n2 3\n";
        let e = parse_alist(text).unwrap_err();
        assert_eq!(e.line, 8);
    }

    #[test]
    fn rejects_malformed_header() {
        assert!(parse_alist("").is_err());
        assert!(parse_alist("3\n").is_err());
        assert!(parse_alist("a b\n").is_err());
    }

    #[test]
    fn rejects_inconsistent_adjacency_views() {
        // Qubit 0 claims membership in check 2, but check 2's row omits it.
        let text = "3 2\n2 2\n1 2 1\n2 2\n2\n1 2\n2\n1 2\n2 3\n";
        let e = parse_alist(text).unwrap_err();
        assert!(e.msg.contains("disagree"));
    }

    #[test]
    fn accepts_zero_padding() {
        let text = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";
        let h = parse_alist(text).unwrap();
        assert_eq!(h.row(0), &[0, 1]);
    }

    #[test]
    fn write_parse_round_trip() {
        let h = ParityCheckMatrix::new(5, vec![vec![0, 1, 4], vec![1, 2], vec![3, 4]]).unwrap();
        let text = write_alist(&h);
        let back = parse_alist(&text).unwrap();
        assert_eq!(back, h);
    }
}
