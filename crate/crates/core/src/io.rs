//! JSON readers for families, graphs and hypergraphs.
//!
//! Syntax errors carry the line and column reported by the JSON parser;
//! structural errors carry a field path such as `minimal_sets[2][0]`.

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::family::{MonotoneFamily, SetFamily};
use crate::graphs::GraphSpec;
use crate::simulate::HypergraphSpec;
use crate::subset::{Subset, MAX_GROUND};

/// Largest vertex count accepted in a graph file.
pub const MAX_GRAPH_VERTICES: usize = 4096;

fn invalid(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn object<'a>(v: &'a Value, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
    let obj = v
        .as_object()
        .ok_or_else(|| invalid("$", "expected a JSON object"))?;
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(invalid(
            k.clone(),
            format!("unknown field; expected one of {}", allowed.join(", ")),
        ));
    }
    Ok(obj)
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| invalid(name, "missing required field"))
}

fn index(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| invalid(path, "expected a non-negative integer"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| invalid(path, "expected an array"))
}

/// Reads `[[i, j, ..], ..]` as subsets of `{0..n-1}`; repeated indices
/// inside one set are rejected.
fn subsets(v: &Value, n: usize, path: &str) -> Result<Vec<Subset>> {
    let outer = array(v, path)?;
    let mut out = Vec::with_capacity(outer.len());
    for (i, inner) in outer.iter().enumerate() {
        let set_path = format!("{path}[{i}]");
        let mut s = Subset::EMPTY;
        for (j, x) in array(inner, &set_path)?.iter().enumerate() {
            let elem_path = format!("{set_path}[{j}]");
            let e = index(x, &elem_path)?;
            if e >= n {
                return Err(invalid(
                    elem_path,
                    format!("index {e} out of range for ground set of size {n}"),
                ));
            }
            if s.contains(e) {
                return Err(invalid(elem_path, format!("index {e} repeated")));
            }
            s = s.insert(e);
        }
        out.push(s);
    }
    Ok(out)
}

fn ground(obj: &Map<String, Value>, name: &str) -> Result<usize> {
    let n = index(field(obj, name)?, name)?;
    if n > MAX_GROUND {
        return Err(Error::GroundSetTooLarge { n, cap: MAX_GROUND });
    }
    Ok(n)
}

/// Parses family JSON `{"n": .., "minimal_sets": [[..], ..]}` and returns
/// the canonical family together with the inputs dropped as dominated.
pub fn parse_family_verbose(text: &str) -> Result<(MonotoneFamily, Vec<Subset>)> {
    let v = parse_value(text)?;
    let obj = object(&v, &["n", "minimal_sets"])?;
    let n = ground(obj, "n")?;
    let sets = subsets(field(obj, "minimal_sets")?, n, "minimal_sets")?;
    MonotoneFamily::canonicalize(n, sets).map_err(|e| match e {
        Error::Invalid { path, message } => Error::Invalid {
            path: path.replace("sets", "minimal_sets"),
            message,
        },
        other => other,
    })
}

pub fn parse_family(text: &str) -> Result<MonotoneFamily> {
    parse_family_verbose(text).map(|(f, _)| f)
}

/// Parses a generator collection `{"n": .., "sets": [[..], ..]}`.
pub fn parse_set_family(text: &str) -> Result<SetFamily> {
    let v = parse_value(text)?;
    let obj = object(&v, &["n", "sets"])?;
    let n = ground(obj, "n")?;
    let sets = subsets(field(obj, "sets")?, n, "sets")?;
    SetFamily::new(n, sets)
}

/// Parses graph JSON `{"vertices": .., "edges": [[a, b], ..]}`.
pub fn parse_graph(text: &str) -> Result<GraphSpec> {
    let v = parse_value(text)?;
    let obj = object(&v, &["vertices", "edges"])?;
    let vertices = index(field(obj, "vertices")?, "vertices")?;
    if vertices > MAX_GRAPH_VERTICES {
        return Err(Error::GraphTooLarge(format!(
            "{vertices} vertices exceed {MAX_GRAPH_VERTICES}"
        )));
    }
    let raw = array(field(obj, "edges")?, "edges")?;
    let mut edges = Vec::with_capacity(raw.len());
    for (i, e) in raw.iter().enumerate() {
        let path = format!("edges[{i}]");
        let pair = array(e, &path)?;
        if pair.len() != 2 {
            return Err(invalid(path, "an edge must have exactly two endpoints"));
        }
        let a = index(&pair[0], &format!("{path}[0]"))?;
        let b = index(&pair[1], &format!("{path}[1]"))?;
        edges.push((a, b));
    }
    GraphSpec::new(vertices, edges)
}

/// Parses hypergraph JSON `{"n": .., "k": .., "edges": [[..], ..]}`.
pub fn parse_hypergraph(text: &str) -> Result<HypergraphSpec> {
    let v = parse_value(text)?;
    let obj = object(&v, &["n", "k", "edges"])?;
    let n = index(field(obj, "n")?, "n")?;
    if n > MAX_GROUND {
        return Err(Error::TooLarge(format!("{n} vertices exceed {MAX_GROUND}")));
    }
    let k = index(field(obj, "k")?, "k")?;
    let edges = subsets(field(obj, "edges")?, n, "edges")?;
    HypergraphSpec::new(n, k, edges)
}

/// Canonical JSON text: object keys sorted, compact separators.
pub fn to_canonical_json<T: serde::Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable report");
    serde_json::to_string(&v).expect("JSON value")
}

pub fn to_canonical_json_pretty<T: serde::Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable report");
    serde_json::to_string_pretty(&v).expect("JSON value")
}
