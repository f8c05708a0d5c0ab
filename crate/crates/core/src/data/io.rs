//! CSV and JSONL readers for scored pairs and embedding pairs.
//!
//! CSV pair rows are `similarity,label[,fold]`; an optional header line is
//! skipped. CSV embedding rows are `label,a_1..a_d,b_1..b_d`. JSONL rows are
//! objects with either `"sim"` or `"emb_a"`/`"emb_b"`, plus `"label"` and an
//! optional `"fold"`.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{CalibError, Result};
use crate::measure::{checked_similarity, cosine_similarity, Dataset, Label, PairRecord};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl InputFormat {
    /// Guesses the format from the file extension; anything but `.jsonl` or
    /// `.json` is read as CSV.
    pub fn from_path(path: &Path) -> InputFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => InputFormat::Jsonl,
            _ => InputFormat::Csv,
        }
    }
}

impl FromStr for InputFormat {
    type Err = CalibError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(InputFormat::Csv),
            "jsonl" => Ok(InputFormat::Jsonl),
            other => Err(CalibError::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

fn parse_err(line: u64, message: impl Into<String>) -> CalibError {
    CalibError::Parse {
        line,
        message: message.into(),
    }
}

fn range_err(line: u64, message: impl Into<String>) -> CalibError {
    CalibError::Range {
        line,
        message: message.into(),
    }
}

fn parse_number(field: &str, line: u64, what: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("cannot parse {what} {field:?}")))
}

fn parse_label(field: &str, line: u64) -> Result<Label> {
    let value = field
        .trim()
        .parse::<i64>()
        .map_err(|_| parse_err(line, format!("cannot parse label {field:?}")))?;
    to_label(value, line)
}

fn to_label(value: i64, line: u64) -> Result<Label> {
    Label::try_from(value).map_err(|_| range_err(line, format!("label {value} is not -1 or +1")))
}

fn to_record<T: Scalar>(s: f64, label: Label, line: u64) -> Result<PairRecord<T>> {
    let s = checked_similarity(T::lit(s))
        .map_err(|_| range_err(line, format!("similarity {s} outside [-1, 1]")))?;
    Ok(PairRecord {
        similarity: s,
        label,
    })
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader)
}

fn finish<T: Scalar>(records: Vec<PairRecord<T>>, folds: Vec<Option<usize>>) -> Result<Dataset<T>> {
    let with_fold = folds.iter().filter(|f| f.is_some()).count();
    if with_fold == 0 {
        return Ok(Dataset::new(records));
    }
    if with_fold != folds.len() {
        return Err(CalibError::InvalidFolds(
            "fold ids must be given for every row or for none".into(),
        ));
    }
    Dataset::with_folds(records, folds.into_iter().map(Option::unwrap).collect())
}

#[derive(Deserialize)]
struct JsonRow {
    sim: Option<f64>,
    emb_a: Option<Vec<f64>>,
    emb_b: Option<Vec<f64>>,
    label: i64,
    fold: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Score,
    Embedding,
    Either,
}

fn json_rows<R: Read, T: Scalar>(reader: R, kind: RowKind) -> Result<Dataset<T>> {
    let mut records = Vec::new();
    let mut folds = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonRow =
            serde_json::from_str(&line).map_err(|e| parse_err(line_no, e.to_string()))?;
        let label = to_label(row.label, line_no)?;
        let s = match (row.sim, row.emb_a, row.emb_b) {
            (Some(s), _, _) if kind != RowKind::Embedding => s,
            (_, Some(a), Some(b)) if kind != RowKind::Score => embedding_similarity(&a, &b, line_no)?,
            _ => {
                let expected = match kind {
                    RowKind::Score => "\"sim\"",
                    RowKind::Embedding => "\"emb_a\" and \"emb_b\"",
                    RowKind::Either => "\"sim\" or \"emb_a\"/\"emb_b\"",
                };
                return Err(parse_err(line_no, format!("row needs {expected}")));
            }
        };
        records.push(to_record(s, label, line_no)?);
        folds.push(row.fold);
    }
    finish(records, folds)
}

fn embedding_similarity(a: &[f64], b: &[f64], line: u64) -> Result<f64> {
    cosine_similarity(a, b).map_err(|e| match e {
        CalibError::DimensionMismatch { left, right } => {
            range_err(line, format!("embedding dimensions differ ({left} vs {right})"))
        }
        other => range_err(line, other.to_string()),
    })
}

/// Reads scored pairs. Row order is preserved.
pub fn read_pairs<R: Read, T: Scalar>(reader: R, format: InputFormat) -> Result<Dataset<T>> {
    match format {
        InputFormat::Jsonl => json_rows(reader, RowKind::Score),
        InputFormat::Csv => {
            let mut records = Vec::new();
            let mut folds = Vec::new();
            let mut columns = None;
            for (i, row) in csv_reader(reader).records().enumerate() {
                let row = row.map_err(|e| {
                    let line = e.position().map_or(0, |p| p.line());
                    parse_err(line, e.to_string())
                })?;
                let line = row.position().map_or(i as u64 + 1, |p| p.line());
                if i == 0 && row.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
                    // header
                    continue;
                }
                if !(2..=3).contains(&row.len()) {
                    return Err(parse_err(
                        line,
                        format!("expected similarity,label[,fold], found {} fields", row.len()),
                    ));
                }
                if *columns.get_or_insert(row.len()) != row.len() {
                    return Err(parse_err(line, "inconsistent number of columns"));
                }
                let s = parse_number(&row[0], line, "similarity")?;
                let label = parse_label(&row[1], line)?;
                records.push(to_record(s, label, line)?);
                folds.push(match row.get(2) {
                    Some(f) => Some(
                        f.parse::<usize>()
                            .map_err(|_| parse_err(line, format!("cannot parse fold {f:?}")))?,
                    ),
                    None => None,
                });
            }
            finish(records, folds)
        }
    }
}

/// Reads embedding pairs and scores each row by cosine similarity.
pub fn read_embeddings<R: Read, T: Scalar>(reader: R, format: InputFormat) -> Result<Dataset<T>> {
    match format {
        InputFormat::Jsonl => json_rows(reader, RowKind::Embedding),
        InputFormat::Csv => {
            let mut records = Vec::new();
            let mut dim = None;
            for (i, row) in csv_reader(reader).records().enumerate() {
                let row = row.map_err(|e| {
                    let line = e.position().map_or(0, |p| p.line());
                    parse_err(line, e.to_string())
                })?;
                let line = row.position().map_or(i as u64 + 1, |p| p.line());
                if i == 0 && row.get(0).is_some_and(|f| f.parse::<i64>().is_err()) {
                    continue;
                }
                let fields = row.len().saturating_sub(1);
                if fields == 0 || fields % 2 != 0 {
                    return Err(parse_err(
                        line,
                        "expected label followed by two equal-length vectors",
                    ));
                }
                let d = fields / 2;
                if let Some(prev) = dim.replace(d) {
                    if prev != d {
                        return Err(range_err(
                            line,
                            format!("embedding dimensions differ ({prev} vs {d})"),
                        ));
                    }
                }
                let label = parse_label(&row[0], line)?;
                let values = (1..row.len())
                    .map(|k| parse_number(&row[k], line, "embedding value"))
                    .collect::<Result<Vec<f64>>>()?;
                let s = embedding_similarity(&values[..d], &values[d..], line)?;
                records.push(to_record(s, label, line)?);
            }
            Ok(Dataset::new(records))
        }
    }
}

pub fn load_pairs<T: Scalar>(path: &Path, format: InputFormat) -> Result<Dataset<T>> {
    read_pairs(File::open(path)?, format)
}

pub fn load_embeddings<T: Scalar>(path: &Path, format: InputFormat) -> Result<Dataset<T>> {
    read_embeddings(File::open(path)?, format)
}

/// Loads a dataset whose JSONL rows may mix scores and embeddings. CSV input
/// is read as scored pairs.
pub fn load_dataset<T: Scalar>(path: &Path, format: InputFormat) -> Result<Dataset<T>> {
    match format {
        InputFormat::Jsonl => json_rows(File::open(path)?, RowKind::Either),
        InputFormat::Csv => load_pairs(path, format),
    }
}

/// Writes scored pairs (and fold ids, if any) in the given format.
pub fn write_pairs<W: Write, T: Scalar>(
    dataset: &Dataset<T>,
    mut out: W,
    format: InputFormat,
) -> Result<()> {
    let folds = dataset.folds();
    match format {
        InputFormat::Csv => {
            if folds.is_some() {
                writeln!(out, "similarity,label,fold")?;
            } else {
                writeln!(out, "similarity,label")?;
            }
            for (i, r) in dataset.records().iter().enumerate() {
                match folds {
                    Some(f) => writeln!(out, "{},{},{}", r.similarity, r.label.as_i8(), f[i])?,
                    None => writeln!(out, "{},{}", r.similarity, r.label.as_i8())?,
                }
            }
        }
        InputFormat::Jsonl => {
            for (i, r) in dataset.records().iter().enumerate() {
                match folds {
                    Some(f) => writeln!(
                        out,
                        r#"{{"sim":{},"label":{},"fold":{}}}"#,
                        r.similarity,
                        r.label.as_i8(),
                        f[i]
                    )?,
                    None => writeln!(out, r#"{{"sim":{},"label":{}}}"#, r.similarity, r.label.as_i8())?,
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(text: &str, format: InputFormat) -> Result<Dataset<f64>> {
        read_pairs(text.as_bytes(), format)
    }

    #[test]
    fn csv_two_lines() {
        let d = pairs("0.9,1\n-0.3,-1\n", InputFormat::Csv).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.records()[0].similarity, 0.9);
        assert_eq!(d.records()[1].label, Label::Negative);
    }

    #[test]
    fn csv_header_and_folds() {
        let d = pairs("similarity,label,fold\n0.9,1,0\n-0.3,-1,1\n0.2,+1,0\n", InputFormat::Csv).unwrap();
        assert_eq!(d.folds(), Some(&[0, 1, 0][..]));
    }

    #[test]
    fn csv_clamps_noise() {
        let d = pairs("1.0000003,1\n", InputFormat::Csv).unwrap();
        assert_eq!(d.records()[0].similarity, 1.0);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        match pairs("0.9,1\n0.2,0\n", InputFormat::Csv) {
            Err(CalibError::Range { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match pairs("0.9,1\n0.2,1\nabc,1\n", InputFormat::Csv) {
            Err(CalibError::Parse { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match pairs("0.9,1\n1.5,1\n", InputFormat::Csv) {
            Err(CalibError::Range { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(pairs("0.9,1,0\n0.3,1\n", InputFormat::Csv).is_err());
    }

    #[test]
    fn jsonl_pairs() {
        let d = pairs("{\"sim\":0.5,\"label\":1}\n\n{\"sim\":-0.1,\"label\":-1}\n", InputFormat::Jsonl).unwrap();
        assert_eq!(d.len(), 2);
        assert!(matches!(
            pairs("{\"sim\":0.5,\"label\":2}\n", InputFormat::Jsonl),
            Err(CalibError::Range { line: 1, .. })
        ));
        assert!(matches!(
            pairs("{\"label\":1}\n", InputFormat::Jsonl),
            Err(CalibError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn embeddings_jsonl() {
        let text = "{\"emb_a\":[0.6,0.8],\"emb_b\":[0.6,0.8],\"label\":1}\n\
                    {\"emb_a\":[1,0],\"emb_b\":[0,1],\"label\":-1}\n";
        let d: Dataset<f64> = read_embeddings(text.as_bytes(), InputFormat::Jsonl).unwrap();
        assert!((d.records()[0].similarity - 1.0).abs() < 1e-15);
        assert_eq!(d.records()[1].similarity, 0.0);

        let zero = "{\"emb_a\":[0,0],\"emb_b\":[1,0],\"label\":1}\n";
        assert!(read_embeddings::<_, f64>(zero.as_bytes(), InputFormat::Jsonl).is_err());
        let mismatch = "{\"emb_a\":[1,0,0],\"emb_b\":[1,0],\"label\":1}\n";
        assert!(read_embeddings::<_, f64>(mismatch.as_bytes(), InputFormat::Jsonl).is_err());
    }

    #[test]
    fn embeddings_csv() {
        let d: Dataset<f64> =
            read_embeddings("label,a1,a2,b1,b2\n1,1,0,2,0\n-1,1,0,0,3\n".as_bytes(), InputFormat::Csv)
                .unwrap();
        assert_eq!(d.records()[0].similarity, 1.0);
        assert_eq!(d.records()[1].similarity, 0.0);
        assert!(read_embeddings::<_, f64>("1,1,0,2\n".as_bytes(), InputFormat::Csv).is_err());
    }

    #[test]
    fn write_then_read() {
        let d = Dataset::with_folds(
            vec![
                PairRecord::new(0.123456789012345, Label::Positive).unwrap(),
                PairRecord::new(-0.75, Label::Negative).unwrap(),
            ],
            vec![1, 0],
        )
        .unwrap();
        for format in [InputFormat::Csv, InputFormat::Jsonl] {
            let mut buf = Vec::new();
            write_pairs(&d, &mut buf, format).unwrap();
            let back: Dataset<f64> = read_pairs(buf.as_slice(), format).unwrap();
            assert_eq!(back, d);
        }
    }
}
