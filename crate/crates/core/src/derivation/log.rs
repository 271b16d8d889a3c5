//! Line-based JSON derivation logs: a header record, then one record per node.
//!
//! ```text
//! {"v":1,"problem":"p1","origins":["input"],"rules":["Resolution"]}
//! {"id":0,"l":"input","p":[],"s":1,"q":1}
//! ```

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DerivationStore, Label, NodeId};

pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: malformed record: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: premise {premise} does not refer to an earlier node")]
    DanglingPremise { line: usize, premise: u64 },
    #[error("unsupported log version {found} (expected {LOG_VERSION})")]
    Version { found: u32 },
}

#[derive(Serialize, Deserialize)]
struct Header {
    v: u32,
    problem: String,
    origins: Vec<String>,
    rules: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    id: u64,
    l: String,
    p: Vec<u64>,
    s: u8,
    q: u8,
}

pub fn write_log<W: Write>(store: &DerivationStore, mut out: W) -> io::Result<()> {
    let header =
        Header { v: LOG_VERSION, problem: store.problem().to_string(), origins: store.origins(), rules: store.rules() };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for n in store.nodes() {
        let rec = NodeRecord {
            id: n.id.0 as u64,
            l: n.label.name().to_string(),
            p: n.premises.iter().map(|p| p.0 as u64).collect(),
            s: n.selected as u8,
            q: n.in_proof as u8,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_log_file(store: &DerivationStore, path: impl AsRef<Path>) -> io::Result<()> {
    write_log(store, BufWriter::new(File::create(path)?))
}

fn flag(v: u8, line: usize, name: &str) -> Result<bool, LogError> {
    match v {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(LogError::Malformed { line, msg: format!("flag `{name}` must be 0 or 1") }),
    }
}

/// Reads a log. Record ids need only be unique and increasing; they are renumbered densely.
pub fn read_log<R: BufRead>(input: R) -> Result<DerivationStore, LogError> {
    let mut lines = input.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let (hline, htext) = lines.next().ok_or(LogError::Malformed { line: 1, msg: "missing header".into() })?;
    let htext = htext?;
    let version: serde_json::Value =
        serde_json::from_str(&htext).map_err(|e| LogError::Malformed { line: hline, msg: e.to_string() })?;
    if let Some(v) = version.get("v").and_then(|v| v.as_u64()) {
        if v != LOG_VERSION as u64 {
            return Err(LogError::Version { found: v as u32 });
        }
    }
    let header: Header =
        serde_json::from_value(version).map_err(|e| LogError::Malformed { line: hline, msg: e.to_string() })?;

    let mut store = DerivationStore::new(header.problem);
    let mut ids: HashMap<u64, NodeId> = HashMap::new();
    let mut last_id: Option<u64> = None;
    for (line, text) in lines {
        let text = text?;
        let rec: NodeRecord =
            serde_json::from_str(&text).map_err(|e| LogError::Malformed { line, msg: e.to_string() })?;
        if last_id.is_some_and(|l| rec.id <= l) {
            return Err(LogError::Malformed { line, msg: format!("node id {} is not increasing", rec.id) });
        }
        last_id = Some(rec.id);
        let mut premises = Vec::with_capacity(rec.p.len());
        for p in &rec.p {
            match ids.get(p) {
                Some(&id) => premises.push(id),
                None => return Err(LogError::DanglingPremise { line, premise: *p }),
            }
        }
        let label = if premises.is_empty() {
            if !header.origins.contains(&rec.l) {
                return Err(LogError::Malformed { line, msg: format!("origin `{}` not declared in header", rec.l) });
            }
            Label::origin(&rec.l)
        } else {
            if !header.rules.contains(&rec.l) {
                return Err(LogError::Malformed { line, msg: format!("rule `{}` not declared in header", rec.l) });
            }
            Label::rule(&rec.l)
        };
        let id = store.record(label, &premises).map_err(|e| LogError::Malformed { line, msg: e.to_string() })?;
        store.set_selected(id, flag(rec.s, line, "s")?);
        store.set_in_proof(id, flag(rec.q, line, "q")?);
        ids.insert(rec.id, id);
    }
    Ok(store)
}

pub fn read_log_file(path: impl AsRef<Path>) -> Result<DerivationStore, LogError> {
    read_log(BufReader::new(File::open(path)?))
}
