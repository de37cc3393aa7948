//! Shared test support: small-graph fixtures, exhaustive partition
//! enumeration, an independent map-equation oracle, and a minimal JSON
//! Schema checker for the published output schemas.

// Each test binary compiles this module separately and uses a subset.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use legisgraph::cluster::{FlowGraph, WeightedDigraph};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas")
}

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i}")).collect()
}

pub fn undirected(n: usize, edges: &[(u32, u32)]) -> WeightedDigraph {
    let mut arcs = Vec::new();
    for &(a, b) in edges {
        arcs.push((a, b, 1.0));
        arcs.push((b, a, 1.0));
    }
    WeightedDigraph::new(ids(n), vec![1; n], arcs)
}

/// Two 4-cliques joined by one edge.
pub fn barbell() -> WeightedDigraph {
    let mut edges = Vec::new();
    for base in [0u32, 4u32] {
        for i in 0..4 {
            for j in (i + 1)..4 {
                edges.push((base + i, base + j));
            }
        }
    }
    edges.push((3, 4));
    undirected(8, &edges)
}

/// Four 4-cliques joined into a ring by single edges.
pub fn clique_ring() -> WeightedDigraph {
    let mut edges = Vec::new();
    for k in 0..4u32 {
        let base = 4 * k;
        for i in 0..4 {
            for j in (i + 1)..4 {
                edges.push((base + i, base + j));
            }
        }
        let next = 4 * ((k + 1) % 4);
        edges.push((base + 3, next));
    }
    undirected(16, &edges)
}

/// All set partitions of `n` elements as restricted growth strings.
pub fn enumerate_partitions(n: usize) -> Vec<Vec<u32>> {
    fn rec(i: usize, maxv: u32, a: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == a.len() {
            out.push(a.clone());
            return;
        }
        for v in 0..=maxv + 1 {
            a[i] = v;
            rec(i + 1, maxv.max(v), a, out);
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut a = vec![0u32; n];
    rec(1, 0, &mut a, &mut out);
    out
}

/// Independent two-level map-equation computation, straight from the
/// two-codebook entropy formulation (index codebook over normalized exit
/// flows, one module codebook per module). Used as the oracle against the
/// production `codelength`.
pub fn oracle_codelength(flow: &FlowGraph, assignment: &[u32]) -> f64 {
    let m = assignment.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut exit = vec![0.0f64; m];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
    for v in 0..flow.len() {
        members[assignment[v] as usize].push(v);
        for &(t, f) in &flow.out_flows[v] {
            if assignment[t as usize] != assignment[v] {
                exit[assignment[v] as usize] += f;
            }
        }
    }
    let total_exit: f64 = exit.iter().sum();
    let mut l = 0.0;
    if total_exit > 0.0 {
        let mut h = 0.0;
        for &q in &exit {
            if q > 0.0 {
                let p = q / total_exit;
                h -= p * p.log2();
            }
        }
        l += total_exit * h;
    }
    for i in 0..m {
        let p_circ: f64 = exit[i] + members[i].iter().map(|&v| flow.visit_rates[v]).sum::<f64>();
        if p_circ <= 0.0 {
            continue;
        }
        let mut h = 0.0;
        if exit[i] > 0.0 {
            let p = exit[i] / p_circ;
            h -= p * p.log2();
        }
        for &v in &members[i] {
            let pv = flow.visit_rates[v];
            if pv > 0.0 {
                let p = pv / p_circ;
                h -= p * p.log2();
            }
        }
        l += p_circ * h;
    }
    l
}

/// Minimal JSON Schema checker covering the subset used by the shipped
/// schemas: type, properties, required, items, enum, numeric bounds,
/// minItems, additionalProperties (schema form), and `$ref` into
/// `definitions` (same file or a sibling schema file).
pub struct SchemaSet {
    docs: BTreeMap<String, serde_json::Value>,
}

impl SchemaSet {
    pub fn load() -> SchemaSet {
        let mut docs = BTreeMap::new();
        for entry in std::fs::read_dir(schema_dir()).expect("schema dir") {
            let path = entry.expect("entry").path();
            if path.extension().and_then(|e| e.to_str()) == Some("json") {
                let name = path.file_name().unwrap().to_str().unwrap().to_string();
                let doc: serde_json::Value =
                    serde_json::from_str(&std::fs::read_to_string(&path).expect("read schema"))
                        .expect("valid schema json");
                docs.insert(name, doc);
            }
        }
        SchemaSet { docs }
    }

    pub fn validate(&self, schema_file: &str, value: &serde_json::Value) -> Result<(), String> {
        let doc = self
            .docs
            .get(schema_file)
            .ok_or_else(|| format!("unknown schema {schema_file}"))?;
        self.check(doc.clone(), schema_file, value, "$")
    }

    fn resolve(&self, current: &str, reference: &str) -> Result<(serde_json::Value, String), String> {
        let (file, pointer) = match reference.split_once('#') {
            Some((f, p)) => (if f.is_empty() { current } else { f }, p),
            None => (reference, ""),
        };
        let doc = self
            .docs
            .get(file)
            .ok_or_else(|| format!("unresolved $ref file {file}"))?;
        let target = doc
            .pointer(pointer)
            .ok_or_else(|| format!("unresolved $ref {reference}"))?;
        Ok((target.clone(), file.to_string()))
    }

    fn check(
        &self,
        schema: serde_json::Value,
        file: &str,
        value: &serde_json::Value,
        path: &str,
    ) -> Result<(), String> {
        use serde_json::Value;
        let obj = match &schema {
            Value::Object(o) => o,
            _ => return Ok(()),
        };
        if let Some(Value::String(reference)) = obj.get("$ref") {
            let (target, target_file) = self.resolve(file, reference)?;
            return self.check(target, &target_file, value, path);
        }
        if let Some(types) = obj.get("type") {
            let names: Vec<String> = match types {
                Value::String(s) => vec![s.clone()],
                Value::Array(a) => a
                    .iter()
                    .filter_map(|v| v.as_str().map(str::to_string))
                    .collect(),
                _ => vec![],
            };
            let matches = names.iter().any(|t| match t.as_str() {
                "object" => value.is_object(),
                "array" => value.is_array(),
                "string" => value.is_string(),
                "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
                "number" => value.is_number(),
                "boolean" => value.is_boolean(),
                "null" => value.is_null(),
                _ => false,
            });
            if !matches {
                return Err(format!("{path}: expected type {names:?}, got {value}"));
            }
        }
        if let Some(Value::Array(allowed)) = obj.get("enum") {
            if !allowed.contains(value) {
                return Err(format!("{path}: {value} not in enum"));
            }
        }
        if let Some(n) = value.as_f64() {
            for (key, cmp) in [
                ("minimum", n >= obj.get("minimum").and_then(|v| v.as_f64()).unwrap_or(f64::MIN)),
                ("maximum", n <= obj.get("maximum").and_then(|v| v.as_f64()).unwrap_or(f64::MAX)),
                (
                    "exclusiveMinimum",
                    obj.get("exclusiveMinimum")
                        .and_then(|v| v.as_f64())
                        .map(|b| n > b)
                        .unwrap_or(true),
                ),
                (
                    "exclusiveMaximum",
                    obj.get("exclusiveMaximum")
                        .and_then(|v| v.as_f64())
                        .map(|b| n < b)
                        .unwrap_or(true),
                ),
            ] {
                if obj.contains_key(key) && !cmp {
                    return Err(format!("{path}: {n} violates {key}"));
                }
            }
        }
        if let Value::Object(map) = value {
            if let Some(Value::Array(required)) = obj.get("required") {
                for r in required {
                    let name = r.as_str().unwrap_or("");
                    if !map.contains_key(name) {
                        return Err(format!("{path}: missing required property {name}"));
                    }
                }
            }
            let props = obj.get("properties").and_then(|p| p.as_object());
            for (k, v) in map {
                if let Some(schema) = props.and_then(|p| p.get(k)) {
                    self.check(schema.clone(), file, v, &format!("{path}.{k}"))?;
                } else if let Some(additional) = obj.get("additionalProperties") {
                    if additional.is_object() {
                        self.check(additional.clone(), file, v, &format!("{path}.{k}"))?;
                    }
                }
            }
        }
        if let Value::Array(items) = value {
            if let Some(Value::Number(min)) = obj.get("minItems") {
                if (items.len() as u64) < min.as_u64().unwrap_or(0) {
                    return Err(format!("{path}: fewer than minItems"));
                }
            }
            if let Some(item_schema) = obj.get("items") {
                for (i, item) in items.iter().enumerate() {
                    self.check(item_schema.clone(), file, item, &format!("{path}[{i}]"))?;
                }
            }
        }
        Ok(())
    }
}
