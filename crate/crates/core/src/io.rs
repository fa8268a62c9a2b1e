//! CSV and PGM file formats.

use std::fs;
use std::path::Path;

use crate::element::{Element, MaskedMatrix};
use crate::error::{Error, Result};

fn parse_field(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse {s:?} as a number")))
}

fn reader(text: &str, header: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

/// One matrix row per line, no header. A single line or a single column is a vector.
pub fn parse_matrix_csv(text: &str) -> Result<Element> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader(text, false).records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push(rec.iter().map(|f| parse_field(f, i + 1)).collect::<Result<_>>()?);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix file".into()));
    }
    if rows.len() == 1 {
        return Ok(Element::vector(rows.remove(0)));
    }
    Element::from_rows(&rows)
}

pub fn format_matrix_csv(x: &Element) -> String {
    let mut out = String::new();
    for i in 0..x.rows() {
        let row: Vec<String> = x.row(i).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Triples `i,j,value` under a header line.
pub fn parse_triples_csv(text: &str, rows: usize, cols: usize) -> Result<MaskedMatrix> {
    let mut entries = Vec::new();
    for (k, rec) in reader(text, true).records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.len() != 3 {
            return Err(Error::Parse(format!("line {}: expected i,j,value", k + 2)));
        }
        let index = |f: &str| {
            f.parse::<usize>()
                .map_err(|_| Error::Parse(format!("line {}: bad index {f:?}", k + 2)))
        };
        entries.push((index(&rec[0])?, index(&rec[1])?, parse_field(&rec[2], k + 2)?));
    }
    MaskedMatrix::new(rows, cols, entries)
}

pub fn format_triples_csv(m: &MaskedMatrix) -> String {
    let mut out = String::from("i,j,value\n");
    for &(i, j, v) in m.entries() {
        out.push_str(&format!("{i},{j},{v:?}\n"));
    }
    out
}

pub fn read_matrix_csv(path: &Path) -> Result<Element> {
    parse_matrix_csv(&read_text(path)?)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Binary 8-bit PGM with values mapped linearly from `[min, max]` onto `0..=255`.
pub fn pgm_bytes(x: &Element) -> Vec<u8> {
    let (lo, hi) = x
        .as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    let mut out = format!("P5\n{} {}\n255\n", x.cols(), x.rows()).into_bytes();
    for i in 0..x.rows() {
        for &v in x.row(i) {
            let level = if span > 0.0 { (v - lo) / span * 255.0 } else { 0.0 };
            out.push(level.round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

pub fn write_pgm(path: &Path, x: &Element) -> Result<()> {
    fs::write(path, pgm_bytes(x)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
