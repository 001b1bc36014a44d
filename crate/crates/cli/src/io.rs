//! Tab-separated table I/O.
//!
//! Input tables need the columns `id`, `score` and `label`; `group`,
//! `truth` and `side` are picked up by name when present. Row order is kept.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use compfdr::evalues::EValueVector;
use compfdr::filters::partition_by_key;
use compfdr::model::{CompetitionTable, GroupedTable, RejectionReport};

use crate::error::{CliError, Result};

/// A parsed input table with its optional group column.
#[derive(Debug, Clone, PartialEq)]
pub struct InputTable {
    pub table: CompetitionTable,
    pub groups: Option<Vec<String>>,
}

impl InputTable {
    /// Group keys in order of first appearance.
    pub fn keys(&self) -> Vec<String> {
        let mut keys: Vec<String> = Vec::new();
        for g in self.groups.iter().flatten() {
            if !keys.contains(g) {
                keys.push(g.clone());
            }
        }
        keys
    }

    /// Splits by the group column, with `r_of(key)` as each group's symmetry.
    pub fn grouped(&self, r_of: impl Fn(&str) -> f64) -> Result<GroupedTable> {
        let groups = self
            .groups
            .as_ref()
            .ok_or_else(|| CliError::Config("the input table has no `group` column".into()))?;
        let map: HashMap<String, String> = self
            .table
            .ids()
            .iter()
            .cloned()
            .zip(groups.iter().cloned())
            .collect();
        let split = partition_by_key(&self.table, &map, 1.0).map_err(CliError::Table)?;
        let rs = split.keys().iter().map(|k| r_of(k)).collect();
        Ok(GroupedTable::new(
            split.groups().to_vec(),
            rs,
            split.keys().to_vec(),
        )?)
    }
}

fn tsv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .flexible(false)
        .from_reader(reader)
}

fn tsv_writer<W: Write>(writer: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().delimiter(b'\t').from_writer(writer)
}

fn malformed(line: u64, message: impl Into<String>) -> CliError {
    CliError::Malformed {
        line,
        message: message.into(),
    }
}

fn csv_error(e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    malformed(line, e.to_string())
}

fn column(headers: &csv::StringRecord, name: &'static str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn required(headers: &csv::StringRecord, name: &'static str) -> Result<usize> {
    column(headers, name).ok_or(CliError::MissingColumn(name))
}

fn flag(value: &str, name: &str, line: u64) -> Result<bool> {
    match value.trim() {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(malformed(line, format!("{name} must be 0 or 1, got `{other}`"))),
    }
}

fn number(value: &str, name: &str, line: u64) -> Result<f64> {
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| malformed(line, format!("{name} `{value}` is not a number")))?;
    if !v.is_finite() {
        return Err(malformed(line, format!("{name} `{value}` is not finite")));
    }
    Ok(v)
}

pub fn parse_table<R: Read>(reader: R) -> Result<InputTable> {
    let mut rdr = tsv_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let id_col = required(&headers, "id")?;
    let score_col = required(&headers, "score")?;
    let label_col = required(&headers, "label")?;
    let group_col = column(&headers, "group");
    let truth_col = column(&headers, "truth");
    let side_col = column(&headers, "side");

    let (mut ids, mut scores, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    let mut groups = group_col.map(|_| Vec::new());
    let mut truth = truth_col.map(|_| Vec::new());
    let mut side = side_col.map(|_| Vec::new());
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        ids.push(record[id_col].to_string());
        scores.push(number(&record[score_col], "score", line)?);
        labels.push(flag(&record[label_col], "label", line)?);
        if let (Some(c), Some(v)) = (group_col, groups.as_mut()) {
            v.push(record[c].to_string());
        }
        if let (Some(c), Some(v)) = (truth_col, truth.as_mut()) {
            v.push(flag(&record[c], "truth", line)?);
        }
        if let (Some(c), Some(v)) = (side_col, side.as_mut()) {
            v.push(number(&record[c], "side", line)?);
        }
    }
    let mut table = CompetitionTable::new(ids, scores, labels).map_err(CliError::Table)?;
    if let Some(t) = truth {
        table = table.with_truth(t).map_err(CliError::Table)?;
    }
    if let Some(s) = side {
        table = table.with_side(s).map_err(CliError::Table)?;
    }
    Ok(InputTable { table, groups })
}

pub fn read_table(path: &Path) -> Result<InputTable> {
    let file = File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_table(file)
}

/// Emits the columns present in `input`, in the order
/// `id, group, score, label, truth, side`.
pub fn emit_table(input: &InputTable) -> Result<Vec<u8>> {
    let t = &input.table;
    let mut header = vec!["id"];
    if input.groups.is_some() {
        header.push("group");
    }
    header.extend(["score", "label"]);
    if t.truth().is_some() {
        header.push("truth");
    }
    if t.side().is_some() {
        header.push("side");
    }
    let mut w = tsv_writer(Vec::new());
    w.write_record(&header).map_err(csv_error)?;
    for j in 0..t.len() {
        let mut row = vec![t.ids()[j].clone()];
        if let Some(g) = &input.groups {
            row.push(g[j].clone());
        }
        row.push(t.scores()[j].to_string());
        row.push(u8::from(t.labels()[j]).to_string());
        if let Some(h) = t.truth() {
            row.push(u8::from(h[j]).to_string());
        }
        if let Some(s) = t.side() {
            row.push(s[j].to_string());
        }
        w.write_record(&row).map_err(csv_error)?;
    }
    into_bytes(w)
}

fn into_bytes(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| CliError::Config(format!("buffer flush failed: {e}")))
}

/// `id, group, score` rows of every rejection.
pub fn emit_rejections(report: &RejectionReport) -> Result<Vec<u8>> {
    let mut w = tsv_writer(Vec::new());
    w.write_record(["id", "group", "score"]).map_err(csv_error)?;
    for r in &report.rejected {
        w.write_record([r.id.as_str(), r.group.as_str(), &r.score.to_string()])
            .map_err(csv_error)?;
    }
    into_bytes(w)
}

/// Reads `id, e` rows.
pub fn parse_evalues<R: Read>(reader: R) -> Result<EValueVector> {
    let mut rdr = tsv_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let id_col = required(&headers, "id")?;
    let e_col = required(&headers, "e")?;
    let (mut ids, mut values) = (Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        ids.push(record[id_col].to_string());
        values.push(number(&record[e_col], "e", line)?);
    }
    EValueVector::new(ids, values).map_err(CliError::Table)
}

pub fn read_evalues(path: &Path) -> Result<EValueVector> {
    let file = File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_evalues(file)
}

/// Tab-separated rows with a header.
pub fn emit_tsv<S: AsRef<str>>(header: &[&str], rows: &[Vec<S>]) -> Result<Vec<u8>> {
    write_rows(tsv_writer(Vec::new()), header, rows)
}

/// Comma-separated rows with a header.
pub fn emit_csv<S: AsRef<str>>(header: &[&str], rows: &[Vec<S>]) -> Result<Vec<u8>> {
    write_rows(csv::Writer::from_writer(Vec::new()), header, rows)
}

fn write_rows<S: AsRef<str>>(mut w: csv::Writer<Vec<u8>>, header: &[&str], rows: &[Vec<S>]) -> Result<Vec<u8>> {
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(row.iter().map(AsRef::as_ref)).map_err(csv_error)?;
    }
    into_bytes(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_table() {
        let t = parse_table("id\tscore\tlabel\na\t3\t1\nb\t2\t0\nc\t1.5\t1\n".as_bytes()).unwrap();
        assert_eq!(t.table.len(), 3);
        assert!(t.groups.is_none());
        assert_eq!(t.table.labels(), &[true, false, true]);
    }

    #[test]
    fn group_keys_follow_first_appearance() {
        let text = "id\tgroup\tscore\tlabel\na\tz\t3\t1\nb\ty\t2\t0\nc\tz\t1\t1\n";
        let t = parse_table(text.as_bytes()).unwrap();
        assert_eq!(t.keys(), vec!["z", "y"]);
        let g = t.grouped(|k| if k == "y" { 2.0 } else { 1.0 }).unwrap();
        assert_eq!(g.keys(), &["z".to_string(), "y".to_string()]);
        assert_eq!(g.r(), &[1.0, 2.0]);
        assert_eq!(g.groups()[0].ids(), &["a".to_string(), "c".to_string()]);
    }

    #[test]
    fn bad_rows_name_their_line() {
        let err = parse_table("id\tscore\tlabel\na\t3\t1\nb\t2\t2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CliError::Malformed { line: 3, .. }), "{err}");
        let err = parse_table("id\tscore\tlabel\na\tx\t1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CliError::Malformed { line: 2, .. }), "{err}");
        let err = parse_table("id\tlabel\na\t1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CliError::MissingColumn("score")));
        let err = parse_table("id\tscore\tlabel\na\t1\n".as_bytes()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn emit_then_parse_is_identity() {
        let text = "id\tgroup\tscore\tlabel\ttruth\tside\na\tg1\t0.1\t1\t0\t-2.5\nb\tg2\t1e-7\t0\t1\t3\n";
        let t = parse_table(text.as_bytes()).unwrap();
        let again = parse_table(emit_table(&t).unwrap().as_slice()).unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn evalue_rows() {
        let e = parse_evalues("id\te\na\t2.5\nb\t0\n".as_bytes()).unwrap();
        assert_eq!(e.values(), &[2.5, 0.0]);
        assert!(parse_evalues("id\te\na\t-1\n".as_bytes()).is_err());
    }
}
