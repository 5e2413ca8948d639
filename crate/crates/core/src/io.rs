//! CSV and binary (`CSK1`) encodings of weighted datasets.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! b"CSK1" | n: u64 | d: u64 | has_weights: u8 | n*d f64 (row-major) | n f64 weights
//! ```
//!
//! CSV has one row per point and `d` numeric columns, plus a final `weight`
//! column when the header names one. Without weights every point gets `1/n`.

use std::io::{BufRead, Read, Write};

use crate::error::{CoresetError, Result};
use crate::model::WeightedDataset;

pub const MAGIC: &[u8; 4] = b"CSK1";
/// Magic, `n`, `d` and the flag byte.
pub const HEADER_BYTES: usize = 4 + 8 + 8 + 1;

/// Size in bytes of the binary encoding of `n` points in dimension `d`.
pub fn binary_size(n: usize, d: usize, with_weights: bool) -> usize {
    HEADER_BYTES + 8 * n * d + if with_weights { 8 * n } else { 0 }
}

pub fn write_binary<W: Write>(data: &WeightedDataset, with_weights: bool, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(data.len() as u64).to_le_bytes())?;
    out.write_all(&(data.dim() as u64).to_le_bytes())?;
    out.write_all(&[u8::from(with_weights)])?;
    for v in data.raw_points() {
        out.write_all(&v.to_le_bytes())?;
    }
    if with_weights {
        for w in data.weights() {
            out.write_all(&w.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn encode_binary(data: &WeightedDataset) -> Vec<u8> {
    let mut buf = Vec::with_capacity(binary_size(data.len(), data.dim(), true));
    write_binary(data, true, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

pub fn read_binary<R: Read>(mut input: R) -> Result<WeightedDataset> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CoresetError::Format("bad magic, expected CSK1".into()));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let d = u64::from_le_bytes(word) as usize;
    let mut flag = [0u8; 1];
    input.read_exact(&mut flag)?;
    let with_weights = match flag[0] {
        0 => false,
        1 => true,
        other => return Err(CoresetError::Format(format!("bad weight flag {other}"))),
    };
    let mut read_f64s = |count: usize| -> Result<Vec<f64>> {
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            input.read_exact(&mut word)?;
            values.push(f64::from_le_bytes(word));
        }
        Ok(values)
    };
    let points = read_f64s(n.checked_mul(d).ok_or_else(|| CoresetError::Format("size overflow".into()))?)?;
    let weights = if with_weights { read_f64s(n)? } else { vec![1.0 / n.max(1) as f64; n] };
    WeightedDataset::new(points, weights, d)
}

pub fn decode_binary(bytes: &[u8]) -> Result<WeightedDataset> {
    read_binary(bytes)
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub point: Vec<f64>,
    pub weight: Option<f64>,
}

/// Incremental CSV reader; yields rows without holding the whole file.
pub struct CsvRows<R: Read> {
    records: csv::StringRecordsIntoIter<R>,
    has_weight: bool,
    pending: Option<csv::StringRecord>,
    line: usize,
}

impl<R: Read> CsvRows<R> {
    pub fn new(input: R) -> Result<Self> {
        let mut records = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(input)
            .into_records();
        let first = match records.next() {
            Some(r) => Some(r.map_err(|e| CoresetError::Format(e.to_string()))?),
            None => None,
        };
        let (has_weight, pending) = match first {
            Some(rec) if rec.iter().any(|f| f.parse::<f64>().is_err()) => {
                let has_weight = rec.iter().next_back().is_some_and(|f| f.eq_ignore_ascii_case("weight"));
                (has_weight, None)
            }
            other => (false, other),
        };
        Ok(Self { records, has_weight, pending, line: 0 })
    }

    pub fn has_weight_column(&self) -> bool {
        self.has_weight
    }

    fn parse(&self, rec: &csv::StringRecord) -> Result<CsvRow> {
        let mut values = Vec::with_capacity(rec.len());
        for field in rec.iter() {
            values.push(
                field
                    .parse::<f64>()
                    .map_err(|_| CoresetError::Format(format!("row {}: cannot parse '{field}'", self.line)))?,
            );
        }
        let weight = if self.has_weight { values.pop() } else { None };
        if values.is_empty() {
            return Err(CoresetError::Format(format!("row {}: no coordinates", self.line)));
        }
        Ok(CsvRow { point: values, weight })
    }
}

impl<R: Read> Iterator for CsvRows<R> {
    type Item = Result<CsvRow>;

    fn next(&mut self) -> Option<Self::Item> {
        let rec = match self.pending.take() {
            Some(rec) => rec,
            None => match self.records.next()? {
                Ok(rec) => rec,
                Err(e) => return Some(Err(CoresetError::Format(e.to_string()))),
            },
        };
        self.line += 1;
        Some(self.parse(&rec))
    }
}

pub fn read_csv<R: Read>(input: R) -> Result<WeightedDataset> {
    let rows = CsvRows::new(input)?;
    let has_weight = rows.has_weight_column();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut dim = None;
    for row in rows {
        let row = row?;
        match dim {
            None => dim = Some(row.point.len()),
            Some(d) if d != row.point.len() => {
                return Err(CoresetError::DimensionMismatch { expected: d, got: row.point.len() })
            }
            _ => {}
        }
        points.extend_from_slice(&row.point);
        weights.push(row.weight.unwrap_or(0.0));
    }
    let dim = dim.ok_or(CoresetError::EmptyDataset)?;
    if !has_weight {
        let n = weights.len() as f64;
        weights.iter_mut().for_each(|w| *w = 1.0 / n);
    }
    WeightedDataset::new(points, weights, dim)
}

/// Writes a header `x0,..,x{d-1}[,weight]` and one row per point. Values use
/// the shortest representation that parses back to the same `f64`.
pub fn write_csv<W: Write>(data: &WeightedDataset, with_weights: bool, out: W) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    let mut header: Vec<String> = (0..data.dim()).map(|j| format!("x{j}")).collect();
    if with_weights {
        header.push("weight".into());
    }
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for (x, w) in data.rows().zip(data.weights()) {
        line.clear();
        for (j, v) in x.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_f64(*v));
        }
        if with_weights {
            line.push(',');
            line.push_str(&format_f64(*w));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn format_f64(v: f64) -> String {
    // Display for f64 is the shortest round-trip form
    format!("{v}")
}

/// Reads either format, choosing by magic bytes.
pub fn read_any<R: BufRead>(mut input: R) -> Result<WeightedDataset> {
    let head = input.fill_buf()?;
    if head.starts_with(MAGIC) {
        read_binary(input)
    } else {
        read_csv(input)
    }
}
