//! Delimited numeric matrices: rows are time points, columns coordinates.

use std::fs;
use std::path::Path;

use hdcp::SeriesMatrix;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

const CANDIDATES: [u8; 3] = [b',', b'\t', b';'];

/// Parsed input together with what was inferred about its layout.
pub struct LoadedMatrix {
    pub series: SeriesMatrix,
    pub sha256: String,
    pub delimiter: char,
    pub header: Option<Vec<String>>,
}

pub fn parse_delimiter(raw: &str) -> Result<u8, Failure> {
    match raw {
        "comma" | "," => Ok(b','),
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        "semicolon" | ";" => Ok(b';'),
        "space" | " " => Ok(b' '),
        other if other.len() == 1 && other.is_ascii() => Ok(other.as_bytes()[0]),
        other => Err(Failure::Usage(format!("unsupported delimiter '{other}'"))),
    }
}

/// Most frequent candidate delimiter on the first non-empty line; comma when
/// none occurs (single-column data).
fn sniff_delimiter(text: &str) -> u8 {
    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let counts = CANDIDATES.map(|d| line.bytes().filter(|&b| b == d).count());
    let (best, &count) = counts.iter().enumerate().max_by_key(|&(i, c)| (*c, std::cmp::Reverse(i))).unwrap();
    if count == 0 { b',' } else { CANDIDATES[best] }
}

pub fn load(path: &Path, delimiter: Option<&str>) -> Result<LoadedMatrix, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| Failure::Data(format!("{}: not valid UTF-8", path.display())))?;
    let delim = match delimiter {
        Some(raw) => parse_delimiter(raw)?,
        None => sniff_delimiter(&text),
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delim)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut header = None;
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Failure::Data(format!("line {line}: {e}")))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Vec<Result<f64, _>> = record.iter().map(str::parse::<f64>).collect();
        if rows.is_empty() && header.is_none() && parsed.iter().any(Result::is_err) {
            header = Some(record.iter().map(str::to_owned).collect::<Vec<_>>());
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Failure::Data(format!("line {line}: expected {expected} fields, found {}", record.len())));
        }
        let mut row = Vec::with_capacity(expected);
        for (col, (value, raw)) in parsed.into_iter().zip(record.iter()).enumerate() {
            row.push(value.map_err(|_| Failure::Data(format!("line {line}, column {}: cannot parse '{raw}' as a number", col + 1)))?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Failure::Data(format!("{}: no numeric rows", path.display())));
    }
    let series = SeriesMatrix::from_rows(&rows).map_err(Failure::from_data)?;
    Ok(LoadedMatrix { series, sha256, delimiter: delim as char, header })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sniffing_prefers_the_most_frequent_candidate() {
        assert_eq!(sniff_delimiter("1;2;3\n4;5;6\n"), b';');
        assert_eq!(sniff_delimiter("\n1\t2,5\t3\n"), b'\t');
        assert_eq!(sniff_delimiter("7\n8\n"), b',');
    }

    #[test]
    fn delimiter_names() {
        assert_eq!(parse_delimiter("tab").unwrap(), b'\t');
        assert_eq!(parse_delimiter("|").unwrap(), b'|');
        assert!(parse_delimiter("::").is_err());
    }
}
