//! Plain-text pattern files.
//!
//! ```text
//! # k_grid=1000 t_grid=0.000001
//! 3,14,27,39
//! 8,19,30,41
//! ```
//!
//! One pattern per line, comma-separated ascending 1-based indices. An empty
//! line is an empty pattern.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::Pattern;
use crate::error::PatternError;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("missing or malformed header; expected `# k_grid=<int> t_grid=<seconds>`")]
    BadHeader,
    #[error("line {line}: bad index {token:?}")]
    BadIndex { line: usize, token: String },
    #[error("line {line}: {source}")]
    BadPattern { line: usize, source: PatternError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Grid description carried by the header line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridHeader {
    pub k_grid: u32,
    pub t_grid: f64,
}

pub fn write_patterns<'a, W, I>(mut out: W, header: GridHeader, patterns: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Pattern>,
{
    writeln!(out, "# k_grid={} t_grid={}", header.k_grid, header.t_grid)?;
    let mut line = String::new();
    for p in patterns {
        line.clear();
        for (i, idx) in p.indices().iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&idx.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()
}

pub fn read_patterns<R: BufRead>(input: R) -> Result<(GridHeader, Vec<Pattern>), FormatError> {
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(line) => parse_header(&line?).ok_or(FormatError::BadHeader)?,
        None => return Err(FormatError::BadHeader),
    };
    let mut patterns = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        let trimmed = line.trim();
        let mut indices = Vec::new();
        if !trimmed.is_empty() {
            for token in trimmed.split(',') {
                let token = token.trim();
                let idx = token.parse::<u32>().map_err(|_| FormatError::BadIndex { line: lineno, token: token.to_string() })?;
                indices.push(idx);
            }
        }
        let p = Pattern::new(indices, header.k_grid, header.t_grid)
            .map_err(|source| FormatError::BadPattern { line: lineno, source })?;
        patterns.push(p);
    }
    Ok((header, patterns))
}

fn parse_header(line: &str) -> Option<GridHeader> {
    let rest = line.trim().strip_prefix('#')?;
    let (mut k_grid, mut t_grid) = (None, None);
    for field in rest.split_whitespace() {
        let (key, value) = field.split_once('=')?;
        match key {
            "k_grid" => k_grid = value.parse::<u32>().ok().filter(|&k| k > 0),
            "t_grid" => t_grid = value.parse::<f64>().ok().filter(|t| t.is_finite() && *t > 0.0),
            _ => {}
        }
    }
    Some(GridHeader { k_grid: k_grid?, t_grid: t_grid? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_exact_layout() {
        let h = GridHeader { k_grid: 10, t_grid: 1e-6 };
        let ps = [Pattern::new(vec![3, 7], 10, 1e-6).unwrap(), Pattern::new(vec![], 10, 1e-6).unwrap()];
        let mut buf = Vec::new();
        write_patterns(&mut buf, h, &ps).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# k_grid=10 t_grid=0.000001\n3,7\n\n");
    }

    #[test]
    fn reads_back() {
        let text = "# k_grid=10 t_grid=0.000001\n3,7\n\n1,2,10\n";
        let (h, ps) = read_patterns(text.as_bytes()).unwrap();
        assert_eq!(h, GridHeader { k_grid: 10, t_grid: 1e-6 });
        assert_eq!(ps.len(), 3);
        assert_eq!(ps[0].indices(), &[3, 7]);
        assert!(ps[1].is_empty());
        assert_eq!(ps[2].indices(), &[1, 2, 10]);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(read_patterns("3,7\n".as_bytes()), Err(FormatError::BadHeader)));
        assert!(matches!(read_patterns("".as_bytes()), Err(FormatError::BadHeader)));
        assert!(matches!(read_patterns("# k_grid=0 t_grid=1\n".as_bytes()), Err(FormatError::BadHeader)));
        assert!(matches!(
            read_patterns("# k_grid=10 t_grid=1\n3,x\n".as_bytes()),
            Err(FormatError::BadIndex { line: 2, .. })
        ));
        assert!(matches!(
            read_patterns("# k_grid=10 t_grid=1\n1,2\n7,3\n".as_bytes()),
            Err(FormatError::BadPattern { line: 3, source: PatternError::NotIncreasing { .. } })
        ));
        assert!(matches!(
            read_patterns("# k_grid=10 t_grid=1\n11\n".as_bytes()),
            Err(FormatError::BadPattern { line: 2, source: PatternError::OutOfRange { .. } })
        ));
    }
}
