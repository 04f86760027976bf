//! CSV formats.
//!
//! - feature table: `start_time`, then one column per feature; values are
//!   written with 17 significant digits so they parse back bit-exactly.
//! - training table: feature columns plus `labels`, semicolon-separated
//!   class names. A `start_time` column, if present, is ignored.
//! - segment annotations: `start_time,end_time,labels`.
//! - frame dump: `start_time,rms,labels`.

use std::io::{Read, Write};

use crate::audio::{feature_names, FeatureVector};
use crate::error::{Error, Result};
use crate::eval::{FrameAnnotation, Segment};
use crate::ferns::{LabelSet, TrainingSet};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse(field: &str, what: &str, row: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Csv(format!("row {row}: bad {what} `{field}`")))
}

pub fn join_labels(labels: &LabelSet, catalog: &[String]) -> String {
    labels.names(catalog).join(";")
}

pub fn split_labels(field: &str) -> Vec<&str> {
    field
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

/// Class index for `name`, appending it to `catalog` when new.
fn intern(catalog: &mut Vec<String>, name: &str) -> usize {
    match catalog.iter().position(|c| c == name) {
        Some(i) => i,
        None => {
            catalog.push(name.to_string());
            catalog.len() - 1
        }
    }
}

pub fn write_features<W: Write>(w: W, rows: &[(f64, FeatureVector)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["start_time".to_string()];
    header.extend(feature_names());
    out.write_record(&header)?;
    for (t, x) in rows {
        let mut rec = vec![num(*t)];
        rec.extend(x.0.iter().map(|&v| num(v)));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes labeled feature rows: the canonical feature columns plus `labels`.
pub fn write_training<W: Write>(
    w: W,
    catalog: &[String],
    rows: impl IntoIterator<Item = (FeatureVector, LabelSet)>,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = feature_names();
    header.push("labels".into());
    out.write_record(&header)?;
    for (x, y) in rows {
        let mut rec: Vec<String> = x.0.iter().map(|&v| num(v)).collect();
        rec.push(join_labels(&y, catalog));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a generic labeled table with the given feature column names.
pub fn write_training_set<W: Write>(w: W, set: &TrainingSet, names: &[String]) -> Result<()> {
    if names.len() != set.feature_count() {
        return Err(Error::InvalidParameter("column names do not match feature count".into()));
    }
    let mut out = csv::Writer::from_writer(w);
    let mut header = names.to_vec();
    header.push("labels".into());
    out.write_record(&header)?;
    for (x, y) in set.iter() {
        let mut rec: Vec<String> = x.iter().map(|&v| num(v)).collect();
        rec.push(join_labels(y, set.classes()));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a training table. The class catalog is the sorted set of label
/// names found in the file. Returns the set and its feature column names.
pub fn read_training<R: Read>(r: R) -> Result<(TrainingSet, Vec<String>)> {
    let mut reader = csv::Reader::from_reader(r);
    let header = reader.headers()?.clone();
    let label_col = header
        .iter()
        .position(|h| h == "labels")
        .ok_or_else(|| Error::Csv("missing `labels` column".into()))?;
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|&i| i != label_col && &header[i] != "start_time")
        .collect();
    let names = feature_cols.iter().map(|&i| header[i].to_string()).collect();

    let mut rows: Vec<(Vec<f64>, Vec<String>)> = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec?;
        let x = feature_cols
            .iter()
            .map(|&i| parse(&rec[i], "feature value", n + 1))
            .collect::<Result<Vec<_>>>()?;
        let y = split_labels(&rec[label_col]).into_iter().map(String::from).collect();
        rows.push((x, y));
    }
    let mut catalog: Vec<String> = rows.iter().flat_map(|(_, y)| y.iter().cloned()).collect();
    catalog.sort();
    catalog.dedup();
    if rows.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut set = TrainingSet::new(catalog.clone(), feature_cols.len())?;
    for (x, y) in rows {
        set.push(&x, LabelSet::from_names(&y, &catalog)?)?;
    }
    Ok((set, names))
}

/// Reads a feature table into `(start_time, features)` rows.
pub fn read_features<R: Read>(r: R) -> Result<Vec<(f64, Vec<f64>)>> {
    let mut reader = csv::Reader::from_reader(r);
    let header = reader.headers()?.clone();
    let time_col = header.iter().position(|h| h == "start_time");
    let cols: Vec<usize> = (0..header.len())
        .filter(|&i| Some(i) != time_col && &header[i] != "labels")
        .collect();
    reader
        .records()
        .enumerate()
        .map(|(n, rec)| {
            let rec = rec?;
            let t = match time_col {
                Some(c) => parse(&rec[c], "start_time", n + 1)?,
                None => 0.0,
            };
            let x = cols
                .iter()
                .map(|&i| parse(&rec[i], "feature value", n + 1))
                .collect::<Result<Vec<_>>>()?;
            Ok((t, x))
        })
        .collect()
}

pub fn write_frame_dump<W: Write>(w: W, frames: &[FrameAnnotation], catalog: &[String]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["start_time", "rms", "labels"])?;
    for f in frames {
        out.write_record([num(f.start_time), num(f.rms), join_labels(&f.labels, catalog)])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a frame dump, interning label names into `catalog`.
pub fn read_frame_dump<R: Read>(r: R, catalog: &mut Vec<String>) -> Result<Vec<FrameAnnotation>> {
    let mut reader = csv::Reader::from_reader(r);
    let header = reader.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Csv(format!("missing `{name}` column")))
    };
    let (t, rms, labels) = (col("start_time")?, col("rms")?, col("labels")?);
    reader
        .records()
        .enumerate()
        .map(|(n, rec)| {
            let rec = rec?;
            let ids: Vec<usize> = split_labels(&rec[labels])
                .into_iter()
                .map(|l| intern(catalog, l))
                .collect();
            Ok(FrameAnnotation {
                start_time: parse(&rec[t], "start_time", n + 1)?,
                rms: parse(&rec[rms], "rms", n + 1)?,
                labels: LabelSet::new(ids),
            })
        })
        .collect()
}

pub fn write_segments<W: Write>(w: W, segments: &[Segment], catalog: &[String]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["start_time", "end_time", "labels"])?;
    for s in segments {
        out.write_record([num(s.start), num(s.end), join_labels(&s.labels, catalog)])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads segment annotations, interning label names into `catalog`.
pub fn read_segments<R: Read>(r: R, catalog: &mut Vec<String>) -> Result<Vec<Segment>> {
    let mut reader = csv::Reader::from_reader(r);
    let header = reader.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Csv(format!("missing `{name}` column")))
    };
    let (s, e, labels) = (col("start_time")?, col("end_time")?, col("labels")?);
    reader
        .records()
        .enumerate()
        .map(|(n, rec)| {
            let rec = rec?;
            let start = parse(&rec[s], "start_time", n + 1)?;
            let end = parse(&rec[e], "end_time", n + 1)?;
            if end < start {
                return Err(Error::Csv(format!("row {}: segment ends before it starts", n + 1)));
            }
            let ids: Vec<usize> = split_labels(&rec[labels])
                .into_iter()
                .map(|l| intern(catalog, l))
                .collect();
            Ok(Segment {
                start,
                end,
                labels: LabelSet::new(ids),
            })
        })
        .collect()
}

/// True when the CSV header names an `rms` column, i.e. a frame dump.
pub fn is_frame_dump(header_line: &str) -> bool {
    header_line.split(',').any(|h| h.trim() == "rms")
}
