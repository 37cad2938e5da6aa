//! JSON-lines surrogate tables: one header object
//! `{"space": [...], "max_epoch": E}` followed by one object per
//! configuration, `{"id", "params": {name: value}, "accuracy": [...],
//! "epoch_seconds": [...]}`. Numbers use the shortest form that parses back
//! to the same `f64`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use deepbo_core::hpspace::{Configuration, HyperparameterSpace, ParamValue};
use deepbo_core::tabular::{LearningCurve, SurrogateTable, TableEntry};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    space: HyperparameterSpace,
    max_epoch: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    id: usize,
    params: BTreeMap<String, ParamValue>,
    accuracy: Vec<f64>,
    epoch_seconds: Vec<f64>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn write_line<W: Write, T: Serialize>(out: &mut W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")
}

pub fn write_table<W: Write>(table: &SurrogateTable, mut out: W) -> Result<()> {
    let names: Vec<&str> = table.space().params().iter().map(|p| p.name()).collect();
    let header = Header { space: table.space().clone(), max_epoch: table.max_epoch() };
    write_line(&mut out, &header).map_err(io_err("<table output>"))?;
    for e in table.entries() {
        let row = Row {
            id: e.config.id,
            params: names.iter().map(|n| n.to_string()).zip(e.config.values.iter().cloned()).collect(),
            accuracy: e.curve.accuracy().to_vec(),
            epoch_seconds: e.curve.epoch_seconds().to_vec(),
        };
        write_line(&mut out, &row).map_err(io_err("<table output>"))?;
    }
    Ok(())
}

pub fn read_table<R: BufRead>(input: R) -> Result<SurrogateTable> {
    let mut header: Option<Header> = None;
    let mut rows: BTreeMap<usize, (usize, TableEntry)> = BTreeMap::new();
    for (i, line) in input.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| parse_err(n, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let Some(h) = &header else {
            let h: Header = serde_json::from_str(&line).map_err(|e| parse_err(n, format!("bad header: {e}")))?;
            if h.max_epoch == 0 {
                return Err(parse_err(n, "max_epoch must be >= 1"));
            }
            header = Some(h);
            continue;
        };
        let row: Row = serde_json::from_str(&line).map_err(|e| parse_err(n, format!("bad record: {e}")))?;
        let entry = entry_from_row(&h.space, h.max_epoch, row).map_err(|m| parse_err(n, m))?;
        let id = entry.config.id;
        if let Some((first, _)) = rows.insert(id, (n, entry)) {
            return Err(parse_err(n, format!("duplicate id {id} (first seen on line {first})")));
        }
    }
    let Some(header) = header else {
        return Err(parse_err(0, format!("empty table: need >= {} entries", deepbo_core::tabular::MIN_TABLE_ENTRIES)));
    };
    if let Some((pos, (&id, &(line, _)))) = rows.iter().enumerate().find(|(pos, (id, _))| *pos != **id) {
        return Err(parse_err(line, format!("ids must be contiguous from 0: id {id} found where {pos} was expected")));
    }
    let entries: Vec<TableEntry> = rows.into_values().map(|(_, e)| e).collect();
    Ok(SurrogateTable::new(header.space, header.max_epoch, entries)?)
}

fn entry_from_row(space: &HyperparameterSpace, max_epoch: usize, mut row: Row) -> Result<TableEntry, String> {
    if row.accuracy.len() != max_epoch || row.epoch_seconds.len() != max_epoch {
        return Err(format!(
            "id {}: curve has {} accuracies and {} epoch times, header says max_epoch = {max_epoch}",
            row.id,
            row.accuracy.len(),
            row.epoch_seconds.len()
        ));
    }
    let mut values = Vec::with_capacity(space.dim());
    for p in space.params() {
        let v = row.params.remove(p.name()).ok_or_else(|| format!("id {}: missing parameter {}", row.id, p.name()))?;
        values.push(v);
    }
    let extra: BTreeSet<&String> = row.params.keys().collect();
    if !extra.is_empty() {
        return Err(format!("id {}: unknown parameters {extra:?}", row.id));
    }
    space.validate(&values).map_err(|e| format!("id {}: {e}", row.id))?;
    let curve = LearningCurve::new(row.accuracy, row.epoch_seconds).map_err(|e| format!("id {}: {e}", row.id))?;
    Ok(TableEntry { config: Configuration { id: row.id, values }, curve })
}

pub fn load_table(path: &Path) -> Result<SurrogateTable> {
    let file = File::open(path).map_err(io_err(path))?;
    read_table(BufReader::new(file)).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        other => other,
    })
}

pub fn save_table(table: &SurrogateTable, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    write_table(table, &mut out)?;
    out.flush().map_err(io_err(path))
}
