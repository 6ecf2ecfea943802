//! Text formats: instance and allocation documents, DIMACS CNF, hypergraph
//! edge lists, and reduction sidecars.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Allocation, Bundle, ImportanceOrdering, Instance, ItemId, Polarity};
use crate::reductions::{CnfFormula, Hypergraph, ReductionKind, Source};

pub const FORMAT_VERSION: &str = "1";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    version: String,
    agents: usize,
    items: Vec<String>,
    orderings: Vec<Vec<(String, Polarity)>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AllocationDoc {
    version: String,
    bundles: Vec<Vec<String>>,
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
}

fn check_version(v: &str) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::document("version", format!("unsupported version {v:?}, expected {FORMAT_VERSION:?}")));
    }
    Ok(())
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = from_json(text)?;
    check_version(&doc.version)?;
    if doc.agents != doc.orderings.len() {
        return Err(Error::document(
            "agents",
            format!("declares {} agents but {} orderings are given", doc.agents, doc.orderings.len()),
        ));
    }
    let mut index = HashMap::new();
    for (k, l) in doc.items.iter().enumerate() {
        if l.is_empty() {
            return Err(Error::document(format!("items[{k}]"), "empty label"));
        }
        if index.insert(l.as_str(), k).is_some() {
            return Err(Error::document(format!("items[{k}]"), format!("duplicate item {l:?}")));
        }
    }
    let m = doc.items.len();
    let mut orderings = Vec::with_capacity(doc.agents);
    for (a, row) in doc.orderings.iter().enumerate() {
        let mut seen = vec![false; m];
        let mut ranked = Vec::with_capacity(m);
        for (pos, (label, pol)) in row.iter().enumerate() {
            let field = || format!("orderings[{a}][{pos}]");
            let &k = index.get(label.as_str()).ok_or_else(|| Error::document(field(), format!("unknown item {label:?}")))?;
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::document(field(), format!("item {label:?} listed twice")));
            }
            ranked.push((ItemId(k), *pol));
        }
        if ranked.len() != m {
            let missing: Vec<&str> = (0..m).filter(|&k| !seen[k]).map(|k| doc.items[k].as_str()).collect();
            return Err(Error::document(format!("orderings[{a}]"), format!("missing items {missing:?}")));
        }
        orderings.push(ImportanceOrdering::new(ranked)?);
    }
    Instance::new(doc.items, orderings)
}

/// Canonical form: sorted keys, one agent ordering per line.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"agents\": {},", inst.n());
    let items: Vec<String> = inst.labels().iter().map(|l| quote(l)).collect();
    let _ = writeln!(out, "  \"items\": [{}],", items.join(", "));
    out.push_str("  \"orderings\": [\n");
    for (a, ord) in inst.orderings().iter().enumerate() {
        let pairs: Vec<String> = ord
            .ranked()
            .iter()
            .map(|&(it, p)| format!("[{}, {}]", quote(inst.label(it)), quote(polarity_name(p))))
            .collect();
        let sep = if a + 1 < inst.n() { "," } else { "" };
        let _ = writeln!(out, "    [{}]{sep}", pairs.join(", "));
    }
    out.push_str("  ],\n");
    let _ = writeln!(out, "  \"version\": {}", quote(FORMAT_VERSION));
    out.push_str("}\n");
    out
}

fn polarity_name(p: Polarity) -> &'static str {
    match p {
        Polarity::Good => "good",
        Polarity::Chore => "chore",
    }
}

/// Parses an allocation document against `inst`; every bundle lists labels.
pub fn parse_allocation(text: &str, inst: &Instance) -> Result<Allocation> {
    let doc: AllocationDoc = from_json(text)?;
    check_version(&doc.version)?;
    if doc.bundles.len() != inst.n() {
        return Err(Error::document(
            "bundles",
            format!("{} bundles for an instance with {} agents", doc.bundles.len(), inst.n()),
        ));
    }
    let mut owner: Vec<Option<usize>> = vec![None; inst.m()];
    let mut bundles = Vec::with_capacity(inst.n());
    for (a, labels) in doc.bundles.iter().enumerate() {
        let mut b = Bundle::EMPTY;
        for (pos, l) in labels.iter().enumerate() {
            let field = || format!("bundles[{a}][{pos}]");
            let it = inst.item_by_label(l).ok_or_else(|| Error::document(field(), format!("unknown item {l:?}")))?;
            if let Some(prev) = owner[it.0].replace(a) {
                return Err(Error::document(field(), format!("item {l:?} already given to agent {}", prev + 1)));
            }
            b.insert(it);
        }
        bundles.push(b);
    }
    Allocation::from_bundles(bundles)
}

/// Canonical form: one bundle per line, labels in item order.
pub fn serialize_allocation(alloc: &Allocation, inst: &Instance) -> String {
    let mut out = String::from("{\n  \"bundles\": [\n");
    for (a, b) in alloc.bundles().iter().enumerate() {
        let labels: Vec<String> = b.iter().map(|it| quote(inst.label(it))).collect();
        let sep = if a + 1 < alloc.n() { "," } else { "" };
        let _ = writeln!(out, "    [{}]{sep}", labels.join(", "));
    }
    out.push_str("  ],\n");
    let _ = writeln!(out, "  \"version\": {}", quote(FORMAT_VERSION));
    out.push_str("}\n");
    out
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = ln + 1;
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if header.is_some() {
                return Err(Error::parse(lineno, "duplicate problem line"));
            }
            let f: Vec<&str> = rest.split_whitespace().collect();
            match f.as_slice() {
                ["cnf", v, c] => {
                    let v = v.parse().map_err(|_| Error::parse(lineno, format!("bad variable count {v:?}")))?;
                    let c = c.parse().map_err(|_| Error::parse(lineno, format!("bad clause count {c:?}")))?;
                    header = Some((v, c));
                }
                _ => return Err(Error::parse(lineno, "expected `p cnf <vars> <clauses>`")),
            }
            continue;
        }
        if header.is_none() {
            return Err(Error::parse(lineno, "clause before problem line"));
        }
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| Error::parse(lineno, format!("bad literal {tok:?}")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
        }
    }
    let (vars, count) = header.ok_or_else(|| Error::parse(1, "missing problem line"))?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != count {
        return Err(Error::parse(text.lines().count(), format!("header declares {count} clauses, found {}", clauses.len())));
    }
    CnfFormula::new(vars, clauses)
}

pub fn serialize_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.vars, f.clauses.len());
    for c in &f.clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}

/// One edge per line as whitespace-separated 1-based vertices; `#` starts a
/// comment; an optional `vertices N` line fixes the vertex count, which
/// otherwise is the largest vertex mentioned.
pub fn parse_hypergraph(text: &str) -> Result<Hypergraph> {
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let lineno = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("vertices") {
            let n = rest.trim().parse().map_err(|_| Error::parse(lineno, format!("bad vertex count {:?}", rest.trim())))?;
            if declared.replace(n).is_some() {
                return Err(Error::parse(lineno, "duplicate vertices line"));
            }
            continue;
        }
        let edge = line
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| Error::parse(lineno, format!("bad vertex {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if edge.contains(&0) {
            return Err(Error::parse(lineno, "vertices are numbered from 1"));
        }
        edges.push(edge);
    }
    let vertices = declared.unwrap_or_else(|| edges.iter().flatten().copied().max().unwrap_or(0));
    Hypergraph::new(vertices, edges)
}

pub fn serialize_hypergraph(h: &Hypergraph) -> String {
    let mut out = format!("vertices {}\n", h.vertices);
    for e in &h.edges {
        let vs: Vec<String> = e.iter().map(usize::to_string).collect();
        out.push_str(&vs.join(" "));
        out.push('\n');
    }
    out
}

/// What `reduce` writes next to the reduced instance so that witnesses can
/// be translated back later.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionSidecar {
    pub version: String,
    pub kind: ReductionKind,
    pub source: Source,
}

impl ReductionSidecar {
    pub fn new(kind: ReductionKind, source: Source) -> Self {
        ReductionSidecar { version: FORMAT_VERSION.to_string(), kind, source }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let s: ReductionSidecar = from_json(text)?;
        check_version(&s.version)?;
        Ok(s)
    }

    pub fn serialize(&self) -> String {
        to_canonical_json(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
  "agents": 2,
  "items": ["a", "b"],
  "orderings": [
    [["a", "good"], ["b", "chore"]],
    [["b", "chore"], ["a", "good"]]
  ],
  "version": "1"
}
"#;

    #[test]
    fn instance_round_trip_is_byte_identical() {
        let inst = parse_instance(DOC).unwrap();
        assert_eq!(serialize_instance(&inst), DOC);
    }

    #[test]
    fn instance_errors_name_the_field() {
        let dup = DOC.replace(r#"[["b", "chore"], ["a", "good"]]"#, r#"[["b", "chore"], ["b", "good"]]"#);
        match parse_instance(&dup) {
            Err(Error::Document { field, .. }) => assert_eq!(field, "orderings[1][1]"),
            other => panic!("unexpected {other:?}"),
        }
        let dup_item = DOC.replace(r#"["a", "b"]"#, r#"["a", "a"]"#);
        assert!(matches!(parse_instance(&dup_item), Err(Error::Document { .. })));
        assert!(matches!(parse_instance(&DOC.replace("\"agents\": 2", "\"agents\": 3")), Err(Error::Document { .. })));
        assert!(matches!(parse_instance(&DOC.replace("\"1\"", "\"9\"")), Err(Error::Document { .. })));
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        match parse_instance("{\n  \"agents\": 2,\n  oops\n}") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn allocation_round_trip_and_validation() {
        let inst = parse_instance(DOC).unwrap();
        let text = "{\n  \"bundles\": [\n    [\"b\"],\n    [\"a\"]\n  ],\n  \"version\": \"1\"\n}\n";
        let alloc = parse_allocation(text, &inst).unwrap();
        assert_eq!(alloc.bundle(0), Bundle::singleton(ItemId(1)));
        assert_eq!(serialize_allocation(&alloc, &inst), text);
        assert!(parse_allocation(&text.replace("[\"a\"]", "[\"b\"]"), &inst).is_err());
        assert!(parse_allocation(&text.replace("[\"a\"]", "[\"z\"]"), &inst).is_err());
        let short = "{\"bundles\": [[\"a\"]], \"version\": \"1\"}";
        assert!(matches!(parse_allocation(short, &inst), Err(Error::Document { .. })));
    }

    #[test]
    fn dimacs_parsing() {
        let f = parse_dimacs("c hi\np cnf 2 2\n1 -2 0\n2\n 0\n").unwrap();
        assert_eq!(f.clauses, vec![vec![1, -2], vec![2]]);
        assert_eq!(parse_dimacs(&serialize_dimacs(&f)).unwrap(), f);
        assert!(parse_dimacs("p cnf 1 2\n1 0\n").is_err());
        assert!(parse_dimacs("1 0\n").is_err());
        assert!(matches!(parse_dimacs("p cnf 1 1\n3 0\n"), Err(Error::InvalidFormula(_))));
    }

    #[test]
    fn hypergraph_parsing() {
        let h = parse_hypergraph("# one edge\n1 2 3  # all\n").unwrap();
        assert_eq!((h.vertices, h.edges.clone()), (3, vec![vec![1, 2, 3]]));
        let h2 = parse_hypergraph("vertices 4\n1 2\n").unwrap();
        assert_eq!(h2.vertices, 4);
        assert_eq!(parse_hypergraph(&serialize_hypergraph(&h2)).unwrap(), h2);
        assert!(parse_hypergraph("1 x\n").is_err());
        assert!(parse_hypergraph("0 1\n").is_err());
    }

    #[test]
    fn sidecar_round_trip() {
        let f = CnfFormula::new(1, vec![vec![1]]).unwrap();
        let s = ReductionSidecar::new(ReductionKind::SatEf, Source::Cnf(f));
        assert_eq!(ReductionSidecar::parse(&s.serialize()).unwrap(), s);
    }
}
