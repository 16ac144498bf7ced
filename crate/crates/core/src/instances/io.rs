//! Line-oriented instance files.
//!
//! ```text
//! # comment
//! target t
//! edge 0 x t 0
//! edge 1 x y 3
//! ```
//!
//! Vertices are implicit from edge endpoints. [`serialize_instance`] writes
//! the canonical form (no comments, edges in id order), which parses back to
//! the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::graph::{Instance, RawEdge, RawInstance};

use super::InstanceError;

pub fn parse_instance(text: &str) -> Result<RawInstance, InstanceError> {
    let err = |line: usize, message: String| InstanceError::Parse { line, message };
    let mut target: Option<String> = None;
    let mut edges: Vec<RawEdge> = Vec::new();
    let mut seen: Vec<Option<usize>> = Vec::new();
    let mut last_line = 0;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw_line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        match (tokens[0], &target) {
            ("target", None) => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "expected `target <name>`".into()));
                }
                target = Some(tokens[1].to_owned());
            }
            ("target", Some(_)) => return Err(err(line_no, "second `target` line".into())),
            (_, None) => return Err(err(line_no, "first line must be `target <name>`".into())),
            ("edge", Some(_)) => {
                if tokens.len() != 5 {
                    return Err(err(line_no, "expected `edge <id> <tail> <head> <cost>`".into()));
                }
                let id: usize = tokens[1]
                    .parse()
                    .map_err(|_| err(line_no, format!("bad edge id `{}`", tokens[1])))?;
                let cost: i64 = tokens[4]
                    .parse()
                    .map_err(|_| err(line_no, format!("bad cost `{}`", tokens[4])))?;
                if seen.len() <= id {
                    seen.resize(id + 1, None);
                }
                if let Some(prev) = seen[id] {
                    return Err(err(
                        line_no,
                        format!("duplicate edge id {id} (first on line {prev})"),
                    ));
                }
                seen[id] = Some(line_no);
                edges.push(RawEdge {
                    id,
                    tail: tokens[2].to_owned(),
                    head: tokens[3].to_owned(),
                    cost,
                });
            }
            (other, Some(_)) => return Err(err(line_no, format!("unknown directive `{other}`"))),
        }
    }
    let Some(target) = target else {
        return Err(err(last_line, "missing `target` line".into()));
    };
    if let Some(gap) = seen.iter().position(Option::is_none) {
        return Err(err(
            last_line,
            format!("edge ids are not dense: {gap} is missing"),
        ));
    }
    edges.sort_by_key(|e| e.id);
    Ok(RawInstance { target, edges })
}

pub fn serialize_instance(inst: &Instance) -> String {
    let raw = inst.to_raw();
    let mut out = format!("target {}\n", raw.target);
    for e in &raw.edges {
        writeln!(out, "edge {} {} {} {}", e.id, e.tail, e.head, e.cost).unwrap();
    }
    out
}

pub fn read_instance(text: &str) -> Result<Instance, InstanceError> {
    Ok(Instance::validate(parse_instance(text)?)?)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| InstanceError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    read_instance(&text)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    fs::write(path, serialize_instance(inst)).map_err(|e| InstanceError::Write {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
