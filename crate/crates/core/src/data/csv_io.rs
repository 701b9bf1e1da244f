use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Dataset, Matrix};
use crate::error::{Error, Result};

/// Reads a headed, comma-separated numeric table from `path`.
///
/// When `label_column` is given, that column is removed from the features and
/// parsed as a 0/1 anomaly label.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    read_csv(file, label_column, name)
}

/// Reader-based core of [`load_csv`]; accepts any byte source.
pub fn read_csv<R: Read>(
    reader: R,
    label_column: Option<&str>,
    name: impl Into<String>,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::InvalidDataset("missing header row".into()));
    }
    let label_idx = match label_column {
        Some(col) => Some(
            header
                .iter()
                .position(|h| h == col)
                .ok_or_else(|| Error::MissingLabelColumn(col.to_owned()))?,
        ),
        None => None,
    };
    let feature_idx: Vec<usize> = (0..header.len())
        .filter(|&j| Some(j) != label_idx)
        .collect();
    let feature_names: Vec<String> = feature_idx.iter().map(|&j| header[j].clone()).collect();

    let mut features = Matrix::empty(feature_idx.len());
    let mut labels = label_idx.map(|_| Vec::new());
    let mut row_buf = Vec::with_capacity(feature_idx.len());

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row: line,
                expected: header.len(),
                found: record.len(),
            });
        }
        row_buf.clear();
        for &j in &feature_idx {
            row_buf.push(parse_cell(&record[j], line, j, &header[j])?);
        }
        features.push_row(&row_buf)?;
        if let (Some(li), Some(labels)) = (label_idx, labels.as_mut()) {
            labels.push(parse_label(&record[li], line)?);
        }
    }

    Dataset::new(name, features, feature_names, labels)
}

fn parse_cell(raw: &str, row: usize, column: usize, name: &str) -> Result<f64> {
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::NonNumericCell {
            row,
            column,
            name: name.to_owned(),
            value: raw.to_owned(),
        }),
    }
}

fn parse_label(raw: &str, row: usize) -> Result<bool> {
    match raw.parse::<f64>() {
        Ok(0.0) => Ok(false),
        Ok(1.0) => Ok(true),
        _ => Err(Error::InvalidLabel {
            row,
            value: raw.to_owned(),
        }),
    }
}

/// Writes `ds` as CSV. Labels, when present, go in a trailing `label` column.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    if ds.labels().is_some() {
        header.push("label");
    }
    w.write_record(&header)?;
    let mut fields = Vec::with_capacity(header.len());
    for i in 0..ds.n() {
        fields.clear();
        fields.extend(ds.row(i).iter().map(|v| format!("{v:?}")));
        if let Some(l) = ds.labels() {
            fields.push(if l[i] { "1".into() } else { "0".into() });
        }
        w.write_record(&fields)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
